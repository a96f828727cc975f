//! Evolution-strategy synthesis of a linear proxy for a neural controller,
//! and one-shot refinement of the proxy against a spurious falsifying input.
//!
//! Fitness for a candidate coefficient matrix is the negated mean distance
//! between the proxy's and the AI controller's outputs along a shared rollout
//! driven by the AI controller. Noise is drawn by mirror sampling (each row
//! paired with its negation) and the update is the standardized-reward
//! stochastic gradient estimate
//! `theta += lr * 1/(m sigma) * sum_i N_i R_i`.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::controller::{ControllerError, MlpController, ProxyProgram};
use crate::plant::{PlantError, PlantSpec};
use crate::rng::{self, standard_normal};
use crate::trace::{sample_uniform, SearchPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct EsParams {
    /// Population size, even (mirror sampling pairs).
    pub population: usize,
    /// Outer iterations.
    pub max_iterations: usize,
    /// Coefficient updates per outer iteration.
    pub time_steps: usize,
    pub noise_std: f64,
    pub learning_rate: f64,
    /// Terminate once the proxy's rollout distance drops below this.
    pub fitness_threshold: f64,
    /// Steps per fitness rollout.
    pub rollout_horizon: usize,
    pub seed: u64,
}

impl Default for EsParams {
    fn default() -> Self {
        EsParams {
            population: 50,
            max_iterations: 100,
            time_steps: 100,
            noise_std: 0.1,
            learning_rate: 0.05,
            fitness_threshold: 0.1,
            rollout_horizon: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisError {
    InvalidParams(&'static str),
    Plant(PlantError),
    Controller(ControllerError),
    NonFiniteFitness { candidate: usize },
}

impl fmt::Display for SynthesisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisError::InvalidParams(what) => write!(f, "invalid parameters: {what}"),
            SynthesisError::Plant(e) => write!(f, "{e}"),
            SynthesisError::Controller(e) => write!(f, "{e}"),
            SynthesisError::NonFiniteFitness { candidate } => {
                write!(f, "non-finite fitness for population member {candidate}")
            }
        }
    }
}

impl core::error::Error for SynthesisError {}

impl From<PlantError> for SynthesisError {
    fn from(e: PlantError) -> Self {
        SynthesisError::Plant(e)
    }
}

impl From<ControllerError> for SynthesisError {
    fn from(e: ControllerError) -> Self {
        SynthesisError::Controller(e)
    }
}

impl EsParams {
    fn validate(&self) -> Result<(), SynthesisError> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(SynthesisError::InvalidParams("population must be even and >= 2"));
        }
        if !(self.noise_std > 0.0) {
            return Err(SynthesisError::InvalidParams("noise_std must be positive"));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(SynthesisError::InvalidParams("learning_rate must be non-negative"));
        }
        if self.rollout_horizon == 0 {
            return Err(SynthesisError::InvalidParams("rollout_horizon must be >= 1"));
        }
        Ok(())
    }
}

/// The states visited by the AI-controlled system from one initial state,
/// together with the AI controller's output at each of them. All population
/// members of an update round are scored against this shared rollout.
struct SharedRollout {
    states: Vec<Vec<f64>>,
    ai_outputs: Vec<Vec<f64>>,
}

fn ai_rollout(
    plant: &PlantSpec,
    ai: &MlpController,
    init: &SearchPoint,
    horizon: usize,
) -> Result<SharedRollout, SynthesisError> {
    let mut states = Vec::with_capacity(horizon);
    let mut ai_outputs = Vec::with_capacity(horizon);
    let mut state = init.coords.clone();
    for k in 0..horizon {
        let u = ai.forward(&state)?;
        let next = plant.step(&state, &u)?;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(SynthesisError::Plant(PlantError::NonFiniteState { step: k + 1 }));
        }
        states.push(state);
        ai_outputs.push(u);
        state = next;
    }
    Ok(SharedRollout { states, ai_outputs })
}

/// Mean Euclidean distance between proxy and AI outputs along the rollout,
/// with the proxy given as a flat row-major coefficient slice.
fn flat_distance(rollout: &SharedRollout, theta: &[f64], m: usize, n: usize) -> f64 {
    let cols = n + 1;
    let steps = rollout.states.len();
    let mut total = 0.0;
    for (state, ai_out) in rollout.states.iter().zip(&rollout.ai_outputs) {
        let mut sq = 0.0;
        for i in 0..m {
            let row = &theta[i * cols..(i + 1) * cols];
            let y: f64 = row[..n].iter().zip(state).map(|(c, x)| c * x).sum::<f64>() + row[n];
            let d = y - ai_out[i];
            sq += d * d;
        }
        total += libm::sqrt(sq);
    }
    total / steps as f64
}

/// Mean Euclidean distance between the two controllers' outputs over an
/// `horizon`-step rollout of the plant driven by the AI controller.
pub fn rollout_distance(
    plant: &PlantSpec,
    ai: &MlpController,
    proxy: &ProxyProgram,
    init: &SearchPoint,
    horizon: usize,
) -> Result<f64, SynthesisError> {
    let rollout = ai_rollout(plant, ai, init, horizon)?;
    Ok(flat_distance(&rollout, &proxy.flatten(), proxy.control_dim(), proxy.state_dim()))
}

/// One standardized-reward gradient step; returns false (and leaves `theta`
/// unchanged) when all rewards tie.
fn gradient_step(theta: &mut [f64], noise: &[Vec<f64>], rewards: &[f64], lr: f64, sigma: f64) -> bool {
    let m = rewards.len();
    let mean = rewards.iter().sum::<f64>() / m as f64;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / m as f64;
    let std = libm::sqrt(var);
    if std == 0.0 {
        return false;
    }
    let scale = lr / (m as f64 * sigma);
    for (i, row) in noise.iter().enumerate() {
        let r = (rewards[i] - mean) / std;
        for (t, n) in theta.iter_mut().zip(row) {
            *t += scale * n * r;
        }
    }
    true
}

fn mirror_noise<R: Rng + ?Sized>(rng: &mut R, population: usize, dim: usize) -> Vec<Vec<f64>> {
    let half = population / 2;
    let mut noise: Vec<Vec<f64>> = (0..half)
        .map(|_| (0..dim).map(|_| standard_normal(rng)).collect())
        .collect();
    for i in 0..half {
        let neg: Vec<f64> = noise[i].iter().map(|v| -v).collect();
        noise.push(neg);
    }
    noise
}

/// Synthesize a linear proxy for `ai` from a random initialization.
pub fn es_synthesize(
    plant: &PlantSpec,
    ai: &MlpController,
    params: &EsParams,
) -> Result<ProxyProgram, SynthesisError> {
    es_synthesize_from(plant, ai, None, params)
}

/// Synthesize a linear proxy, optionally starting from a given coefficient
/// matrix instead of a random one.
pub fn es_synthesize_from(
    plant: &PlantSpec,
    ai: &MlpController,
    initial: Option<&ProxyProgram>,
    params: &EsParams,
) -> Result<ProxyProgram, SynthesisError> {
    params.validate()?;
    let m = plant.control_dim();
    let n = plant.state_dim();
    let dim = m * (n + 1);
    let mut rng = rng::stream(params.seed);
    let mut theta: Vec<f64> = match initial {
        Some(p) => p.flatten(),
        None => (0..dim).map(|_| 0.1 * standard_normal(&mut rng)).collect(),
    };
    for _ in 0..params.max_iterations {
        // termination check on a fresh init, once per outer iteration
        let init = sample_uniform(&plant.init_box, &mut rng);
        let rollout = ai_rollout(plant, ai, &init, params.rollout_horizon)?;
        if flat_distance(&rollout, &theta, m, n) <= params.fitness_threshold {
            return Ok(ProxyProgram::from_flat(&theta, m, n));
        }
        for _ in 0..params.time_steps {
            // fresh mirrored noise per round: reusing one batch across rounds
            // freezes the search directions and stalls short of the optimum
            let noise = mirror_noise(&mut rng, params.population, dim);
            let init = sample_uniform(&plant.init_box, &mut rng);
            let rollout = ai_rollout(plant, ai, &init, params.rollout_horizon)?;
            update_round(&mut theta, &rollout, &noise, m, n, params)?;
        }
    }
    Ok(ProxyProgram::from_flat(&theta, m, n))
}

fn update_round(
    theta: &mut [f64],
    rollout: &SharedRollout,
    noise: &[Vec<f64>],
    m: usize,
    n: usize,
    params: &EsParams,
) -> Result<(), SynthesisError> {
    let mut rewards = Vec::with_capacity(noise.len());
    let mut candidate = theta.to_vec();
    for (ci, row) in noise.iter().enumerate() {
        for ((c, t), nz) in candidate.iter_mut().zip(theta.iter()).zip(row) {
            *c = t + params.noise_std * nz;
        }
        let dist = flat_distance(rollout, &candidate, m, n);
        if !dist.is_finite() {
            return Err(SynthesisError::NonFiniteFitness { candidate: ci });
        }
        rewards.push(-dist);
    }
    gradient_step(theta, noise, &rewards, params.learning_rate, params.noise_std);
    Ok(())
}

/// One-shot refinement against a spurious falsifying input: a single noise
/// batch, `time_steps` update rounds, every fitness rollout initialized at
/// `spurious`. Callers apply this at most once per detected spurious
/// violation.
pub fn refine(
    plant: &PlantSpec,
    ai: &MlpController,
    proxy: &ProxyProgram,
    spurious: &SearchPoint,
    params: &EsParams,
) -> Result<ProxyProgram, SynthesisError> {
    params.validate()?;
    let m = proxy.control_dim();
    let n = proxy.state_dim();
    let dim = m * (n + 1);
    let mut rng = rng::stream(params.seed);
    let mut theta = proxy.flatten();
    let noise = mirror_noise(&mut rng, params.population, dim);
    // the rollout is driven by the AI controller from a fixed init, so it is
    // identical across rounds and computed once
    let rollout = ai_rollout(plant, ai, spurious, params.rollout_horizon)?;
    for _ in 0..params.time_steps {
        update_round(&mut theta, &rollout, &noise, m, n, params)?;
    }
    Ok(ProxyProgram::from_flat(&theta, m, n))
}

/// Normalized mean absolute error between the two controllers' outputs along
/// an AI-driven rollout (Eq.-style alignment metric).
///
/// Each output channel is min-max normalized jointly over both series; a
/// channel that is constant across both series contributes zero.
pub fn evaluate_alignment(
    plant: &PlantSpec,
    ai: &MlpController,
    proxy: &ProxyProgram,
    init: &SearchPoint,
    horizon: usize,
) -> Result<f64, SynthesisError> {
    let rollout = ai_rollout(plant, ai, init, horizon)?;
    let m = proxy.control_dim();
    let steps = rollout.states.len();
    let mut proxy_outputs = Vec::with_capacity(steps);
    for state in &rollout.states {
        proxy_outputs.push(proxy.forward(state)?);
    }
    let mut total = 0.0;
    for i in 0..m {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..steps {
            lo = lo.min(rollout.ai_outputs[k][i]).min(proxy_outputs[k][i]);
            hi = hi.max(rollout.ai_outputs[k][i]).max(proxy_outputs[k][i]);
        }
        if hi > lo {
            let range = hi - lo;
            for k in 0..steps {
                total += libm::fabs(rollout.ai_outputs[k][i] - proxy_outputs[k][i]) / range;
            }
        }
    }
    Ok(total / (steps * m) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::embed_linear_as_mlp;
    use crate::plant::Dynamics;
    use crate::trace::BoxDomain;
    use alloc::string::ToString;
    use alloc::vec;

    fn lane_plant() -> PlantSpec {
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

    fn linear_ai(k: &[Vec<f64>], b: &[f64]) -> MlpController {
        embed_linear_as_mlp(k, b, &[8, 8]).unwrap()
    }

    #[test]
    fn distance_zero_for_matching_proxy() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let proxy = ProxyProgram::new(vec![vec![-2.0, -1.0, 0.0]]).unwrap();
        let d = rollout_distance(&plant, &ai, &proxy, &SearchPoint::new(vec![0.3, 0.1]), 50).unwrap();
        assert!(d < 1e-9, "d = {d}");
    }

    #[test]
    fn distance_constant_gap() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![0.0, 0.0]], &[1.5]);
        let proxy = ProxyProgram::zeros(1, 2);
        let d = rollout_distance(&plant, &ai, &proxy, &SearchPoint::new(vec![0.0, 0.0]), 30).unwrap();
        assert!((d - 1.5).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn hand_rollout_three_steps() {
        // u = -eta: hand-integrate the lane model and hand-evaluate both
        // controllers at the three visited states.
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-1.0, 0.0]], &[0.0]);
        let proxy = ProxyProgram::new(vec![vec![-0.5, 0.0, 0.1]]).unwrap();
        let init = SearchPoint::new(vec![0.4, 0.2]);
        let mut eta = 0.4;
        let mut d = 0.2;
        let mut expected = 0.0;
        for _ in 0..3 {
            let u_ai = -eta;
            let u_proxy = -0.5 * eta + 0.1;
            expected += libm::fabs(u_ai - u_proxy);
            let next_eta = eta + u_ai * 0.1;
            let next_d = d + 2.0 * libm::sin(eta) * 0.1;
            eta = next_eta;
            d = next_d;
        }
        expected /= 3.0;
        let got = rollout_distance(&plant, &ai, &proxy, &init, 3).unwrap();
        assert!((got - expected).abs() < 1e-9, "got {got}, expected {expected}");
    }

    #[test]
    fn seeded_target_terminates_immediately() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let target = ProxyProgram::new(vec![vec![-2.0, -1.0, 0.0]]).unwrap();
        let params = EsParams { rollout_horizon: 20, seed: 3, ..EsParams::default() };
        let out = es_synthesize_from(&plant, &ai, Some(&target), &params).unwrap();
        assert_eq!(out, target);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let params = EsParams {
            max_iterations: 2,
            time_steps: 10,
            rollout_horizon: 20,
            seed: 11,
            ..EsParams::default()
        };
        let a = es_synthesize(&plant, &ai, &params).unwrap();
        let b = es_synthesize(&plant, &ai, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mirror_noise_rows_negate() {
        let mut r = rng::stream(2);
        let noise = mirror_noise(&mut r, 10, 7);
        for i in 0..5 {
            for j in 0..7 {
                assert_eq!(noise[i][j], -noise[5 + i][j]);
            }
        }
    }

    #[test]
    fn gradient_step_skips_on_tied_rewards() {
        let mut theta = vec![1.0, 2.0];
        let noise = vec![vec![0.5, -0.5], vec![-0.5, 0.5]];
        let moved = gradient_step(&mut theta, &noise, &[3.0, 3.0], 0.1, 0.1);
        assert!(!moved);
        assert_eq!(theta, vec![1.0, 2.0]);
    }

    #[test]
    fn gradient_step_standardizes_rewards() {
        let mut theta = vec![0.0];
        let noise = vec![vec![1.0], vec![-1.0]];
        // rewards standardized to (1, -1); update = lr/(m sigma) * (1*1 + (-1)*(-1)) = lr/sigma
        let moved = gradient_step(&mut theta, &noise, &[-1.0, -3.0], 0.05, 0.1);
        assert!(moved);
        assert!((theta[0] - 0.5).abs() < 1e-12, "theta = {}", theta[0]);
    }

    #[test]
    fn update_moves_toward_target_in_one_dimension() {
        // distance |theta - theta*| with theta* = 2: a single mirrored pair
        // must step toward the target.
        let target = 2.0;
        let mut theta = vec![0.0];
        let noise = vec![vec![1.0], vec![-1.0]];
        let sigma = 0.1;
        let rewards: Vec<f64> = noise
            .iter()
            .map(|row| -libm::fabs(theta[0] + sigma * row[0] - target))
            .collect();
        gradient_step(&mut theta, &noise, &rewards, 0.05, sigma);
        assert!(theta[0] > 0.0, "theta moved away: {}", theta[0]);
    }

    #[test]
    fn zero_learning_rate_refine_is_identity() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let proxy = ProxyProgram::new(vec![vec![-1.0, 0.3, 0.2]]).unwrap();
        let params = EsParams {
            learning_rate: 0.0,
            time_steps: 5,
            rollout_horizon: 20,
            seed: 4,
            ..EsParams::default()
        };
        let out = refine(&plant, &ai, &proxy, &SearchPoint::new(vec![0.2, 0.1]), &params).unwrap();
        assert_eq!(out, proxy);
    }

    #[test]
    fn refine_decreases_distance_at_spurious_point() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let perturbed = ProxyProgram::new(vec![vec![-1.5, -1.0, 0.0]]).unwrap();
        let spurious = SearchPoint::new(vec![0.5, 0.4]);
        let params = EsParams {
            learning_rate: 1e-3,
            time_steps: 100,
            rollout_horizon: 50,
            seed: 11,
            ..EsParams::default()
        };
        let before = rollout_distance(&plant, &ai, &perturbed, &spurious, 50).unwrap();
        let refined = refine(&plant, &ai, &perturbed, &spurious, &params).unwrap();
        let after = rollout_distance(&plant, &ai, &refined, &spurious, 50).unwrap();
        assert!(after < before, "distance did not decrease: {before} -> {after}");
    }

    #[test]
    fn refine_delta_scales_with_learning_rate() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let proxy = ProxyProgram::new(vec![vec![-1.5, -0.8, 0.1]]).unwrap();
        let spurious = SearchPoint::new(vec![0.3, -0.2]);
        let base = EsParams { learning_rate: 1e-3, time_steps: 1, rollout_horizon: 20, seed: 6, ..EsParams::default() };
        let doubled = EsParams { learning_rate: 2e-3, ..base.clone() };
        let r1 = refine(&plant, &ai, &proxy, &spurious, &base).unwrap();
        let r2 = refine(&plant, &ai, &proxy, &spurious, &doubled).unwrap();
        let d1: Vec<f64> = r1.flatten().iter().zip(proxy.flatten()).map(|(a, b)| a - b).collect();
        let d2: Vec<f64> = r2.flatten().iter().zip(proxy.flatten()).map(|(a, b)| a - b).collect();
        for (a, b) in d1.iter().zip(&d2) {
            assert!((2.0 * a - b).abs() < 1e-12, "delta not linear in lr: {a} vs {b}");
        }
    }

    #[test]
    fn alignment_zero_for_identical_controllers() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-2.0, -1.0]], &[0.0]);
        let proxy = ProxyProgram::new(vec![vec![-2.0, -1.0, 0.0]]).unwrap();
        let mae = evaluate_alignment(&plant, &ai, &proxy, &SearchPoint::new(vec![0.3, 0.1]), 100).unwrap();
        assert!(mae < 1e-9);
    }

    #[test]
    fn alignment_extremes_give_one() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![0.0, 0.0]], &[1.0]);
        let proxy = ProxyProgram::zeros(1, 2);
        let mae = evaluate_alignment(&plant, &ai, &proxy, &SearchPoint::new(vec![0.0, 0.0]), 10).unwrap();
        assert!((mae - 1.0).abs() < 1e-12, "mae = {mae}");
    }

    #[test]
    fn alignment_matches_naive_computation() {
        let plant = lane_plant();
        let ai = linear_ai(&[vec![-1.0, 0.5]], &[0.2]);
        let proxy = ProxyProgram::new(vec![vec![-0.7, 0.4, 0.0]]).unwrap();
        let init = SearchPoint::new(vec![0.4, -0.3]);
        let h = 5;
        // naive: re-simulate, collect both series, normalize, average
        let mut state = init.coords.clone();
        let mut ai_series = vec![];
        let mut proxy_series = vec![];
        for _ in 0..h {
            let u_ai = ai.forward(&state).unwrap();
            let u_proxy = proxy.forward(&state).unwrap();
            ai_series.push(u_ai[0]);
            proxy_series.push(u_proxy[0]);
            state = plant.step(&state, &u_ai).unwrap();
        }
        let lo = ai_series.iter().chain(&proxy_series).cloned().fold(f64::INFINITY, f64::min);
        let hi = ai_series.iter().chain(&proxy_series).cloned().fold(f64::NEG_INFINITY, f64::max);
        let expected: f64 = ai_series
            .iter()
            .zip(&proxy_series)
            .map(|(a, p)| ((a - lo) / (hi - lo) - (p - lo) / (hi - lo)).abs())
            .sum::<f64>()
            / h as f64;
        let got = evaluate_alignment(&plant, &ai, &proxy, &init, h).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }
}
