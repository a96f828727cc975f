//! Regenerates the checked-in fixtures: one JSON file per builtin plant and
//! the two deliberately weak reference controllers used by the test suite.
//!
//! The weak controllers are linear gains embedded exactly into small ReLU
//! networks:
//! - pendulum: u = -4*eta - omega. The restoring gain is below the gravity
//!   torque coefficient (g/l = 9.8), so the upright equilibrium stays
//!   unstable and the angle escapes from almost any initial state.
//! - self-driving: u = -0.5*eta. Heading decays too slowly, so a large
//!   initial heading plus offset drives the lateral distance past 2.0.

use std::fs;
use std::path::Path;

use anyhow::Result;
use falsify_core::controller::embed_linear_as_mlp;
use falsify_cli::builtin::{builtin_plant, BUILTIN_NAMES};
use falsify_cli::formats::{save_controller, save_plant};

fn main() -> Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(root.join("plants"))?;
    fs::create_dir_all(root.join("controllers"))?;

    for name in BUILTIN_NAMES {
        let plant = builtin_plant(name)?;
        let path = root.join("plants").join(format!("{name}.json"));
        save_plant(&path, &plant)?;
        println!("wrote {}", path.display());
    }

    let weak_pendulum = embed_linear_as_mlp(&[vec![-4.0, -1.0]], &[0.0], &[16, 16])?;
    let path = root.join("controllers").join("pendulum-weak.json");
    save_controller(&path, &weak_pendulum)?;
    println!("wrote {}", path.display());

    let weak_self_driving = embed_linear_as_mlp(&[vec![-0.5, 0.0]], &[0.0], &[16, 16])?;
    let path = root.join("controllers").join("self-driving-weak.json");
    save_controller(&path, &weak_self_driving)?;
    println!("wrote {}", path.display());

    Ok(())
}
