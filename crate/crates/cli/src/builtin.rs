//! The eight benchmark plants with their safety specifications. Linear
//! plants use discrete transition matrices A, B (x' = Ax + Bu) built from
//! continuous-time chains via explicit Euler; angle thresholds are radians
//! (1.5708 ~ 90 degrees).

use anyhow::{bail, Result};
use falsify_core::plant::Dynamics;
use falsify_core::{BoxDomain, PlantSpec};

pub const BUILTIN_NAMES: [&str; 8] = [
    "cartpole",
    "pendulum",
    "quadcopter",
    "self-driving",
    "lane-keeping",
    "4-car-platoon",
    "8-car-platoon",
    "oscillator",
];

pub fn builtin_plant(name: &str) -> Result<PlantSpec> {
    Ok(match name {
        "cartpole" => cartpole(),
        "pendulum" => pendulum(),
        "quadcopter" => quadcopter(),
        "self-driving" => self_driving(),
        "lane-keeping" => lane_keeping(),
        "4-car-platoon" => car_platoon(4),
        "8-car-platoon" => car_platoon(8),
        "oscillator" => oscillator(),
        other => bail!(
            "unknown builtin plant `{other}` (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ),
    })
}

pub fn builtin_spec(name: &str) -> Result<&'static str> {
    Ok(match name {
        "cartpole" => {
            "always[0,200] (abs(eta) < 1.5708 and abs(delta) < 0.3 and abs(v1) < 0.3 and abs(v2) < 0.5)"
        }
        "pendulum" => "always[0,200] (abs(eta) < 1.5708 and abs(omega) < 1.5708)",
        "quadcopter" => "always[0,300] (abs(eta1) < 1.5708 and abs(eta2) < 1.5708)",
        "self-driving" => "always[0,200] (abs(eta) < 1.5708 and abs(d) < 2.0)",
        "lane-keeping" => "always[0,300] (abs(d) < 0.9)",
        "4-car-platoon" => {
            "always[0,200] (abs(a) <= 2.0 and abs(b) <= 0.5 and abs(c) <= 0.35 and abs(d) <= 0.5 and abs(e) <= 1.0 and abs(f) <= 0.5 and abs(g) <= 1.0)"
        }
        "8-car-platoon" => {
            "always[0,200] (abs(a) <= 2.0 and abs(b) <= 0.5 and abs(c) <= 1.0 and abs(d) <= 0.5 and abs(e) <= 1.0 and abs(f) <= 0.5 and abs(g) <= 1.0 and abs(h) <= 0.5 and abs(i) <= 1.0 and abs(j) <= 0.5 and abs(k) <= 1.0 and abs(l) <= 0.5 and abs(m) <= 1.0 and abs(n) <= 0.5 and abs(o) <= 1.0)"
        }
        "oscillator" => "always[0,300] (a < 0.05)",
        other => bail!(
            "unknown builtin plant `{other}` (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ),
    })
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn cartpole() -> PlantSpec {
    PlantSpec {
        name: "cartpole".to_string(),
        dt: 0.02,
        horizon: 200,
        init_box: BoxDomain::new(vec![(-0.05, 0.05); 4]).unwrap(),
        control_bounds: vec![(-10.0, 10.0)],
        variables: names(&["delta", "v1", "eta", "v2"]),
        dynamics: Dynamics::CartPole {
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            gravity: 9.8,
        },
    }
}

fn pendulum() -> PlantSpec {
    PlantSpec {
        name: "pendulum".to_string(),
        dt: 0.02,
        horizon: 200,
        init_box: BoxDomain::new(vec![(-0.35, 0.35); 2]).unwrap(),
        control_bounds: vec![(-15.0, 15.0)],
        variables: names(&["eta", "omega"]),
        dynamics: Dynamics::Pendulum { gravity: 9.8, mass: 1.0, length: 1.0 },
    }
}

fn quadcopter() -> PlantSpec {
    // two weakly unstable attitude channels sharing one actuator
    let dt = 0.05;
    PlantSpec {
        name: "quadcopter".to_string(),
        dt,
        horizon: 300,
        init_box: BoxDomain::new(vec![(-0.5, 0.5); 2]).unwrap(),
        control_bounds: vec![(-1.0, 1.0)],
        variables: names(&["eta1", "eta2"]),
        dynamics: Dynamics::Linear {
            a: vec![vec![1.01, 0.0], vec![0.0, 1.01]],
            b: vec![vec![dt], vec![dt]],
        },
    }
}

fn self_driving() -> PlantSpec {
    PlantSpec {
        name: "self-driving".to_string(),
        dt: 0.1,
        horizon: 200,
        init_box: BoxDomain::new(vec![(-0.8, 0.8), (-1.5, 1.5)]).unwrap(),
        control_bounds: vec![(-10.0, 10.0)],
        variables: names(&["eta", "d"]),
        dynamics: Dynamics::LaneFollow { speed: 2.0 },
    }
}

fn lane_keeping() -> PlantSpec {
    // integrator chain d -> v -> psi -> r with actuation on v and r
    let dt = 0.05;
    let mut a = vec![vec![0.0; 4]; 4];
    for i in 0..4 {
        a[i][i] = 1.0;
        if i + 1 < 4 {
            a[i][i + 1] = dt;
        }
    }
    let mut b = vec![vec![0.0; 2]; 4];
    b[1][0] = dt;
    b[3][1] = dt;
    PlantSpec {
        name: "lane-keeping".to_string(),
        dt,
        horizon: 300,
        init_box: BoxDomain::new(vec![(-0.5, 0.5), (-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2)])
            .unwrap(),
        control_bounds: vec![(-1.0, 1.0); 2],
        variables: names(&["d", "v", "psi", "r"]),
        dynamics: Dynamics::Linear { a, b },
    }
}

/// `cars`-vehicle platoon: per following car a relative distance and a
/// relative velocity, plus the leader's velocity; each car's control is its
/// acceleration, and consecutive accelerations drive the relative velocity.
fn car_platoon(cars: usize) -> PlantSpec {
    let pairs = cars - 1;
    let n = 2 * pairs + 1;
    let dt = 0.1;
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for i in 0..pairs {
        a[2 * i][2 * i + 1] = dt;
    }
    let mut b = vec![vec![0.0; cars]; n];
    for i in 0..pairs {
        b[2 * i + 1][i] = -dt;
        b[2 * i + 1][i + 1] = dt;
    }
    b[n - 1][0] = dt;
    let vars: Vec<String> =
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    PlantSpec {
        name: format!("{cars}-car-platoon"),
        dt,
        horizon: 200,
        init_box: BoxDomain::new(vec![(-0.25, 0.25); n]).unwrap(),
        control_bounds: vec![(-2.0, 2.0); cars],
        variables: vars,
        dynamics: Dynamics::Linear { a, b },
    }
}

fn oscillator() -> PlantSpec {
    // driven rotation (last two states) feeding a 16-stage low-pass cascade
    // whose output is the monitored variable `a`
    let n = 18;
    let dt = 0.05;
    let lambda = 5.0;
    let omega = 3.0;
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for i in 0..16 {
        a[i][i] -= dt * lambda;
        a[i][i + 1] += dt * lambda;
    }
    a[16][17] += dt * omega;
    a[17][16] -= dt * omega;
    let mut b = vec![vec![0.0; 2]; n];
    b[16][0] = dt;
    b[17][1] = dt;
    let mut vars = vec!["a".to_string()];
    vars.extend((1..16).map(|i| format!("x{i}")));
    vars.push("o1".to_string());
    vars.push("o2".to_string());
    PlantSpec {
        name: "oscillator".to_string(),
        dt,
        horizon: 300,
        init_box: BoxDomain::new(vec![(-0.02, 0.02); n]).unwrap(),
        control_bounds: vec![(-1.0, 1.0); 2],
        variables: vars,
        dynamics: Dynamics::Linear { a, b },
    }
}
