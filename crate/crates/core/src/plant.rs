//! Deterministic discrete-time simulators for the benchmark environments.
//!
//! Every plant advances with explicit Euler at a fixed `dt`; control inputs
//! are clamped to `control_bounds` before the dynamics are applied.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::controller::{Controller, ControllerError};
use crate::trace::{BoxDomain, SearchPoint, Trace};

/// Plant dynamics. Linear plants store the discrete recurrence matrices
/// directly (`x' = A x + B u`, dt already folded in); nonlinear plants store
/// their physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    Linear { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
    Pendulum { gravity: f64, mass: f64, length: f64 },
    CartPole { cart_mass: f64, pole_mass: f64, pole_half_length: f64, gravity: f64 },
    /// Kinematic lane model: `eta' = eta + u dt`, `d' = d + speed sin(eta) dt`.
    LaneFollow { speed: f64 },
}

impl Dynamics {
    pub fn state_dim(&self) -> usize {
        match self {
            Dynamics::Linear { a, .. } => a.len(),
            Dynamics::Pendulum { .. } | Dynamics::LaneFollow { .. } => 2,
            Dynamics::CartPole { .. } => 4,
        }
    }

    pub fn control_dim(&self) -> usize {
        match self {
            Dynamics::Linear { b, .. } => b.first().map(|r| r.len()).unwrap_or(0),
            Dynamics::Pendulum { .. } | Dynamics::CartPole { .. } | Dynamics::LaneFollow { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlantError {
    StateDimensionMismatch { expected: usize, found: usize },
    ControlDimensionMismatch { expected: usize, found: usize },
    NonFiniteInput,
    NonFiniteState { step: usize },
    Controller(ControllerError),
    ZeroHorizon,
}

impl fmt::Display for PlantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlantError::StateDimensionMismatch { expected, found } => {
                write!(f, "state dimension mismatch: expected {expected}, found {found}")
            }
            PlantError::ControlDimensionMismatch { expected, found } => {
                write!(f, "control dimension mismatch: expected {expected}, found {found}")
            }
            PlantError::NonFiniteInput => write!(f, "non-finite state or control input"),
            PlantError::NonFiniteState { step } => {
                write!(f, "simulation produced a non-finite state at step {step}")
            }
            PlantError::Controller(e) => write!(f, "controller error: {e}"),
            PlantError::ZeroHorizon => write!(f, "simulation horizon must be at least 1"),
        }
    }
}

impl core::error::Error for PlantError {}

impl From<ControllerError> for PlantError {
    fn from(e: ControllerError) -> Self {
        PlantError::Controller(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    pub name: String,
    pub dt: f64,
    pub horizon: usize,
    pub init_box: BoxDomain,
    pub control_bounds: Vec<(f64, f64)>,
    pub variables: Vec<String>,
    pub dynamics: Dynamics,
}

impl PlantSpec {
    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    pub fn control_dim(&self) -> usize {
        self.dynamics.control_dim()
    }

    /// Clamp a raw control vector to the plant's actuator bounds.
    pub fn clamp_control(&self, control: &[f64]) -> Vec<f64> {
        control
            .iter()
            .zip(&self.control_bounds)
            .map(|(&u, &(lo, hi))| u.clamp(lo, hi))
            .collect()
    }

    /// One Euler step under a (clamped) control input.
    pub fn step(&self, state: &[f64], control: &[f64]) -> Result<Vec<f64>, PlantError> {
        if state.len() != self.state_dim() {
            return Err(PlantError::StateDimensionMismatch {
                expected: self.state_dim(),
                found: state.len(),
            });
        }
        if control.len() != self.control_dim() {
            return Err(PlantError::ControlDimensionMismatch {
                expected: self.control_dim(),
                found: control.len(),
            });
        }
        if !state.iter().chain(control.iter()).all(|v| v.is_finite()) {
            return Err(PlantError::NonFiniteInput);
        }
        let u = self.clamp_control(control);
        let dt = self.dt;
        Ok(match &self.dynamics {
            Dynamics::Linear { a, b } => a
                .iter()
                .zip(b)
                .map(|(arow, brow)| {
                    arow.iter().zip(state).map(|(c, x)| c * x).sum::<f64>()
                        + brow.iter().zip(&u).map(|(c, x)| c * x).sum::<f64>()
                })
                .collect(),
            Dynamics::Pendulum { gravity, mass, length } => {
                let (eta, omega) = (state[0], state[1]);
                let acc = gravity / length * libm::sin(eta) + u[0] / (mass * length * length);
                alloc::vec![eta + omega * dt, omega + acc * dt]
            }
            Dynamics::CartPole { cart_mass, pole_mass, pole_half_length, gravity } => {
                let (pos, v1, eta, v2) = (state[0], state[1], state[2], state[3]);
                let total = cart_mass + pole_mass;
                let (sin, cos) = (libm::sin(eta), libm::cos(eta));
                let temp = (u[0] + pole_mass * pole_half_length * v2 * v2 * sin) / total;
                let eta_acc = (gravity * sin - cos * temp)
                    / (pole_half_length * (4.0 / 3.0 - pole_mass * cos * cos / total));
                let pos_acc = temp - pole_mass * pole_half_length * eta_acc * cos / total;
                alloc::vec![pos + v1 * dt, v1 + pos_acc * dt, eta + v2 * dt, v2 + eta_acc * dt]
            }
            Dynamics::LaneFollow { speed } => {
                let (eta, d) = (state[0], state[1]);
                alloc::vec![eta + u[0] * dt, d + speed * libm::sin(eta) * dt]
            }
        })
    }

    /// Roll the closed loop forward for `horizon` steps; the returned trace
    /// has `horizon + 1` states with `states[0] = init`.
    pub fn simulate<C: Controller + ?Sized>(
        &self,
        controller: &C,
        init: &SearchPoint,
        horizon: usize,
    ) -> Result<Trace, PlantError> {
        if horizon == 0 {
            return Err(PlantError::ZeroHorizon);
        }
        let mut states = Vec::with_capacity(horizon + 1);
        states.push(init.coords.clone());
        for k in 0..horizon {
            let u = controller.control(states.last().unwrap())?;
            let next = self.step(states.last().unwrap(), &u)?;
            if !next.iter().all(|v| v.is_finite()) {
                return Err(PlantError::NonFiniteState { step: k + 1 });
            }
            states.push(next);
        }
        Trace::new(self.dt, self.variables.clone(), states)
            .map_err(|_| PlantError::NonFiniteState { step: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::FnController;
    use alloc::string::ToString;
    use alloc::vec;

    fn pendulum() -> PlantSpec {
        PlantSpec {
            name: "pendulum".to_string(),
            dt: 0.02,
            horizon: 200,
            init_box: BoxDomain::new(vec![(-0.35, 0.35), (-0.35, 0.35)]).unwrap(),
            control_bounds: vec![(-15.0, 15.0)],
            variables: vec!["eta".to_string(), "omega".to_string()],
            dynamics: Dynamics::Pendulum { gravity: 9.8, mass: 1.0, length: 1.0 },
        }
    }

    fn lane_follow() -> PlantSpec {
        PlantSpec {
            name: "self-driving".to_string(),
            dt: 0.1,
            horizon: 200,
            init_box: BoxDomain::new(vec![(-0.8, 0.8), (-1.5, 1.5)]).unwrap(),
            control_bounds: vec![(-10.0, 10.0)],
            variables: vec!["eta".to_string(), "d".to_string()],
            dynamics: Dynamics::LaneFollow { speed: 2.0 },
        }
    }

    #[test]
    fn pendulum_equilibrium() {
        let p = pendulum();
        assert_eq!(p.step(&[0.0, 0.0], &[0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn linear_zero_state_zero_control_stays_zero() {
        let p = PlantSpec {
            name: "lin".to_string(),
            dt: 0.02,
            horizon: 10,
            init_box: BoxDomain::new(vec![(-1.0, 1.0); 3]).unwrap(),
            control_bounds: vec![(-1.0, 1.0)],
            variables: vec!["a".to_string(), "b".to_string(), "c".to_string()],
            dynamics: Dynamics::Linear {
                a: vec![vec![1.0, 0.02, 0.0], vec![0.0, 1.0, 0.02], vec![0.0, 0.0, 0.9]],
                b: vec![vec![0.0], vec![0.0], vec![0.02]],
            },
        };
        assert_eq!(p.step(&[0.0; 3], &[0.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn control_is_clamped() {
        let p = pendulum();
        let clamped = p.step(&[0.0, 0.0], &[100.0]).unwrap();
        let at_bound = p.step(&[0.0, 0.0], &[15.0]).unwrap();
        assert_eq!(clamped, at_bound);
    }

    #[test]
    fn lane_follow_distance_grows_with_positive_heading() {
        // constant u = 0 keeps eta fixed at 0.1 > 0, so d strictly increases;
        // hand-integrated values for 3 steps.
        let p = lane_follow();
        let ctrl = FnController(|_: &[f64]| vec![0.0]);
        let tr = p.simulate(&ctrl, &SearchPoint::new(vec![0.1, 0.0]), 3).unwrap();
        let gain = 2.0 * libm::sin(0.1) * 0.1;
        for k in 0..=3 {
            assert!((tr.states[k][0] - 0.1).abs() < 1e-15);
            assert!((tr.states[k][1] - gain * k as f64).abs() < 1e-12);
        }
        assert!(tr.states[1][1] < tr.states[2][1] && tr.states[2][1] < tr.states[3][1]);
    }

    #[test]
    fn simulate_length_and_determinism() {
        let p = pendulum();
        let ctrl = FnController(|s: &[f64]| vec![-10.0 * s[0] - 3.0 * s[1]]);
        let init = SearchPoint::new(vec![0.2, -0.1]);
        let t1 = p.simulate(&ctrl, &init, 1).unwrap();
        assert_eq!(t1.len(), 2);
        let a = p.simulate(&ctrl, &init, 50).unwrap();
        let b = p.simulate(&ctrl, &init, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_superposition_with_zero_control() {
        let a = vec![
            vec![0.98, 0.02, 0.0],
            vec![-0.02, 0.97, 0.01],
            vec![0.0, 0.01, 0.95],
        ];
        let p = PlantSpec {
            name: "lin".to_string(),
            dt: 0.02,
            horizon: 10,
            init_box: BoxDomain::new(vec![(-1.0, 1.0); 3]).unwrap(),
            control_bounds: vec![(-1.0, 1.0)],
            variables: vec!["a".to_string(), "b".to_string(), "c".to_string()],
            dynamics: Dynamics::Linear { a, b: vec![vec![0.0]; 3] },
        };
        let x = [0.3, -0.2, 0.5];
        let y = [-0.1, 0.4, 0.2];
        let zero = [0.0; 1];
        let sx = p.step(&x, &zero).unwrap();
        let sy = p.step(&y, &zero).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        let s_scaled = p.step(&scaled, &zero).unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let s_sum = p.step(&sum, &zero).unwrap();
        for i in 0..3 {
            assert!((s_scaled[i] - 2.5 * sx[i]).abs() < 1e-12);
            assert!((s_sum[i] - (sx[i] + sy[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let p = pendulum();
        assert!(matches!(p.step(&[f64::NAN, 0.0], &[0.0]), Err(PlantError::NonFiniteInput)));
    }

    #[test]
    fn dimension_mismatches_rejected() {
        let p = pendulum();
        assert!(matches!(
            p.step(&[0.0], &[0.0]),
            Err(PlantError::StateDimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            p.step(&[0.0, 0.0], &[0.0, 0.0]),
            Err(PlantError::ControlDimensionMismatch { expected: 1, found: 2 })
        ));
    }
}
