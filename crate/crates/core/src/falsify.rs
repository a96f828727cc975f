//! Simulated-annealing falsification trials, epsilon-greedy
//! sub-specification sampling, and the campaign loop that ties synthesis,
//! search, spurious-violation checking, and refinement together.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::controller::{Controller, MlpController, ProxyProgram};
use crate::plant::{PlantError, PlantSpec};
use crate::rng::{self, standard_normal};
use crate::stl::{robustness, split_conjunctive, EvalError, StlFormula};
use crate::synthesis::{es_synthesize, refine, EsParams, SynthesisError};
use crate::trace::{clip_to_box, sample_uniform, BoxDomain, SearchPoint, Trace};

/// Monotonic time source, in seconds. The campaign is written against this
/// so the algorithmic core stays clock-free; tests pass a null clock and the
/// CLI passes a wall clock.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero; all phase timings come out as zero.
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaParams {
    /// Inner iterations per trial.
    pub max_iterations: usize,
    pub initial_temp: f64,
    /// Multiplicative cooling applied each iteration, in (0, 1).
    pub cooling: f64,
    /// Gaussian perturbation std as a fraction of the box width.
    pub perturb_scale: f64,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams { max_iterations: 100, initial_temp: 1.0, cooling: 0.95, perturb_scale: 0.1 }
    }
}

/// Budget for a falsification campaign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Number of simulated-annealing trials.
    Trials(usize),
    /// Wall-time limit in seconds, checked between SA iterations.
    WallTime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    /// Lowest robustness observed so far; starts at +infinity.
    pub lowest_robustness: f64,
    pub falsified: bool,
    pub attempts: usize,
}

/// Per-sub-specification history driving epsilon-greedy sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSpecLedger {
    pub entries: Vec<LedgerEntry>,
}

impl SubSpecLedger {
    pub fn new(n_subspecs: usize) -> Self {
        SubSpecLedger {
            entries: alloc::vec![
                LedgerEntry { lowest_robustness: f64::INFINITY, falsified: false, attempts: 0 };
                n_subspecs
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn record(&mut self, index: usize, robustness: f64) {
        let e = &mut self.entries[index];
        e.lowest_robustness = e.lowest_robustness.min(robustness);
    }
}

/// Epsilon-greedy choice: explore a uniformly random sub-specification with
/// probability `epsilon`, otherwise exploit the one with the lowest recorded
/// robustness (ties to the lowest index).
pub fn sample_subspec<R: Rng + ?Sized>(ledger: &SubSpecLedger, epsilon: f64, rng: &mut R) -> usize {
    debug_assert!(!ledger.is_empty());
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..ledger.len())
    } else {
        let mut best = 0;
        for (i, e) in ledger.entries.iter().enumerate() {
            if e.lowest_robustness < ledger.entries[best].lowest_robustness {
                best = i;
            }
        }
        best
    }
}

/// Gaussian perturbation with per-dimension std `scale * (upper - lower)`,
/// clipped back into the box.
pub fn perturb<R: Rng + ?Sized>(
    p: &SearchPoint,
    box_: &BoxDomain,
    scale: f64,
    rng: &mut R,
) -> SearchPoint {
    let coords: Vec<f64> = p
        .coords
        .iter()
        .zip(box_.bounds())
        .map(|(&x, &(lo, hi))| x + scale * (hi - lo) * standard_normal(rng))
        .collect();
    clip_to_box(&SearchPoint::new(coords), box_).expect("dimensions match by construction")
}

#[derive(Debug, Clone, PartialEq)]
pub enum SaOutcome {
    Falsified { point: SearchPoint, robustness: f64 },
    Exhausted { best_point: SearchPoint, best_robustness: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaTrialResult {
    pub outcome: SaOutcome,
    /// Robustness evaluations performed (initial sample plus perturbations).
    pub evaluations: usize,
    /// True when the trial was cut short by the budget.
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CampaignError {
    Plant(PlantError),
    Synthesis(SynthesisError),
    Eval(EvalError),
    InvalidEpsilon(f64),
    EmptyBudget,
}

impl fmt::Display for CampaignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CampaignError::Plant(e) => write!(f, "{e}"),
            CampaignError::Synthesis(e) => write!(f, "{e}"),
            CampaignError::Eval(e) => write!(f, "{e}"),
            CampaignError::InvalidEpsilon(v) => write!(f, "epsilon must be in [0, 1], got {v}"),
            CampaignError::EmptyBudget => write!(f, "budget limit must be positive"),
        }
    }
}

impl core::error::Error for CampaignError {}

impl From<PlantError> for CampaignError {
    fn from(e: PlantError) -> Self {
        CampaignError::Plant(e)
    }
}

impl From<SynthesisError> for CampaignError {
    fn from(e: SynthesisError) -> Self {
        CampaignError::Synthesis(e)
    }
}

impl From<EvalError> for CampaignError {
    fn from(e: EvalError) -> Self {
        CampaignError::Eval(e)
    }
}

/// One simulated-annealing trial against an arbitrary robustness landscape.
///
/// Returns as soon as any evaluation comes out negative; otherwise anneals
/// for `max_iterations` perturbations and reports the best point seen.
/// `stop` is polled before each evaluation so a wall-time budget can cut the
/// trial short.
pub fn sa_trial_with<R, E, S>(
    mut eval: E,
    box_: &BoxDomain,
    params: &SaParams,
    rng: &mut R,
    mut stop: S,
) -> Result<SaTrialResult, CampaignError>
where
    R: Rng + ?Sized,
    E: FnMut(&SearchPoint) -> Result<f64, CampaignError>,
    S: FnMut() -> bool,
{
    let mut current = sample_uniform(box_, rng);
    let mut current_rb = eval(&current)?;
    let mut evaluations = 1;
    if current_rb < 0.0 {
        return Ok(SaTrialResult {
            outcome: SaOutcome::Falsified { point: current, robustness: current_rb },
            evaluations,
            aborted: false,
        });
    }
    let mut best = current.clone();
    let mut best_rb = current_rb;
    let mut temp = params.initial_temp;
    for _ in 0..params.max_iterations {
        if stop() {
            return Ok(SaTrialResult {
                outcome: SaOutcome::Exhausted { best_point: best, best_robustness: best_rb },
                evaluations,
                aborted: true,
            });
        }
        let candidate = perturb(&current, box_, params.perturb_scale, rng);
        let candidate_rb = eval(&candidate)?;
        evaluations += 1;
        if candidate_rb < 0.0 {
            return Ok(SaTrialResult {
                outcome: SaOutcome::Falsified { point: candidate, robustness: candidate_rb },
                evaluations,
                aborted: false,
            });
        }
        if candidate_rb < best_rb {
            best = candidate.clone();
            best_rb = candidate_rb;
        }
        let delta = candidate_rb - current_rb;
        if delta < 0.0 || rng.random::<f64>() < libm::exp(-delta / temp) {
            current = candidate;
            current_rb = candidate_rb;
        }
        temp *= params.cooling;
    }
    Ok(SaTrialResult {
        outcome: SaOutcome::Exhausted { best_point: best, best_robustness: best_rb },
        evaluations,
        aborted: false,
    })
}

/// Simulated-annealing trial on a closed-loop system: each evaluation
/// simulates the plant under `controller` from the candidate initial state
/// and computes the robustness of `phi` on the resulting trace.
pub fn sa_trial<C, R>(
    plant: &PlantSpec,
    controller: &C,
    phi: &StlFormula,
    box_: &BoxDomain,
    params: &SaParams,
    rng: &mut R,
) -> Result<SaTrialResult, CampaignError>
where
    C: Controller + ?Sized,
    R: Rng + ?Sized,
{
    sa_trial_with(
        |p| {
            let trace = plant.simulate(controller, p, plant.horizon)?;
            Ok(robustness(phi, &trace, 0)?)
        },
        box_,
        params,
        rng,
        || false,
    )
}

/// Which system's robustness feeds the epsilon-greedy ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerSource {
    /// Record the proxy-system robustness of every trial (default: the
    /// signal is available even on non-falsifying trials).
    Proxy,
    /// Record the real-system robustness, only observable on replays.
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignParams {
    pub budget: Budget,
    pub sa: SaParams,
    pub es: EsParams,
    pub epsilon: f64,
    pub seed: u64,
    /// Stop at the first genuine violation instead of running out the budget.
    pub stop_on_first: bool,
    pub ledger_source: LedgerSource,
}

impl Default for CampaignParams {
    fn default() -> Self {
        CampaignParams {
            budget: Budget::Trials(50),
            sa: SaParams::default(),
            es: EsParams::default(),
            epsilon: 0.9,
            seed: 0,
            stop_on_first: false,
            ledger_source: LedgerSource::Proxy,
        }
    }
}

/// A genuine violation: replaying `point` on the AI-controlled system makes
/// the sampled sub-specification's robustness negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationRecord {
    pub subspec_index: usize,
    pub point: SearchPoint,
    /// Robustness of the sampled sub-spec on the real trace.
    pub robustness: f64,
    /// Robustness of every sub-spec on the real trace, for coverage.
    pub all_robustness: Vec<f64>,
    pub trial: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimings {
    pub synthesis: f64,
    pub refinement: f64,
    pub proxy_exec: f64,
    pub ai_exec: f64,
    pub plant_exec: f64,
    /// Everything else (sampling, robustness evaluation, bookkeeping).
    pub algorithm: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutcome {
    pub violations: Vec<ViolationRecord>,
    pub ledger: SubSpecLedger,
    pub trials: usize,
    /// Trials whose violation survived the real-system check.
    pub genuine_trials: usize,
    pub spurious_violations: usize,
    pub refinements: usize,
    pub timings: PhaseTimings,
    pub proxy: ProxyProgram,
    pub n_subspecs: usize,
}

/// Simulate with per-step controller/plant timing attribution.
fn timed_simulate<C: Controller + ?Sized>(
    plant: &PlantSpec,
    controller: &C,
    init: &SearchPoint,
    clock: &dyn Clock,
    controller_time: &mut f64,
    plant_time: &mut f64,
) -> Result<Trace, CampaignError> {
    let mut states = Vec::with_capacity(plant.horizon + 1);
    states.push(init.coords.clone());
    for k in 0..plant.horizon {
        let t0 = clock.now();
        let u = controller.control(states.last().unwrap()).map_err(PlantError::Controller)?;
        let t1 = clock.now();
        let next = plant.step(states.last().unwrap(), &u)?;
        let t2 = clock.now();
        *controller_time += t1 - t0;
        *plant_time += t2 - t1;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(CampaignError::Plant(PlantError::NonFiniteState { step: k + 1 }));
        }
        states.push(next);
    }
    Ok(Trace::new(plant.dt, plant.variables.clone(), states)
        .expect("simulation output is well-formed"))
}

/// The full falsification pipeline: synthesize (or adopt) a proxy, split the
/// specification, then run epsilon-greedy-sampled SA trials on the
/// proxy-controlled system until the budget runs out, replaying every
/// proxy-system violation on the AI-controlled system to separate genuine
/// violations from spurious ones. Each spurious violation triggers exactly
/// one proxy refinement.
pub fn run_campaign(
    plant: &PlantSpec,
    ai: &MlpController,
    phi: &StlFormula,
    initial_proxy: Option<ProxyProgram>,
    params: &CampaignParams,
    clock: &dyn Clock,
) -> Result<CampaignOutcome, CampaignError> {
    if !(0.0..=1.0).contains(&params.epsilon) {
        return Err(CampaignError::InvalidEpsilon(params.epsilon));
    }
    match params.budget {
        Budget::Trials(0) => return Err(CampaignError::EmptyBudget),
        Budget::WallTime(limit) if !(limit > 0.0) => return Err(CampaignError::EmptyBudget),
        _ => {}
    }
    let start = clock.now();
    let mut timings = PhaseTimings::default();

    let mut proxy = match initial_proxy {
        Some(p) => p,
        None => {
            let t0 = clock.now();
            let es = EsParams { seed: derived_seed(params.seed, 0), ..params.es.clone() };
            let p = es_synthesize(plant, ai, &es)?;
            timings.synthesis = clock.now() - t0;
            p
        }
    };

    let subs = split_conjunctive(phi);
    let n_subspecs = subs.len();
    let mut ledger = SubSpecLedger::new(n_subspecs);
    let mut violations = Vec::new();
    let mut trials = 0usize;
    let mut genuine_trials = 0usize;
    let mut spurious_violations = 0usize;
    let mut refinements = 0usize;

    let budget_left = |trials: usize, now: f64| match params.budget {
        Budget::Trials(limit) => trials < limit,
        Budget::WallTime(limit) => now - start < limit,
    };

    while budget_left(trials, clock.now()) {
        let mut rng = rng::derive_stream(params.seed, 1 + trials as u64);
        let idx = sample_subspec(&ledger, params.epsilon, &mut rng);
        ledger.entries[idx].attempts += 1;
        let sub = &subs.subs[idx];

        let result = {
            let proxy_ref = &proxy;
            let timings = &mut timings;
            sa_trial_with(
                |p| {
                    let trace = timed_simulate(
                        plant,
                        proxy_ref,
                        p,
                        clock,
                        &mut timings.proxy_exec,
                        &mut timings.plant_exec,
                    )?;
                    Ok(robustness(sub, &trace, 0)?)
                },
                &plant.init_box,
                &params.sa,
                &mut rng,
                || !budget_left(trials, clock.now()),
            )?
        };
        trials += 1;

        let (falsifying, trial_min_rb) = match &result.outcome {
            SaOutcome::Falsified { point, robustness } => (Some(point.clone()), *robustness),
            SaOutcome::Exhausted { best_robustness, .. } => (None, *best_robustness),
        };
        if params.ledger_source == LedgerSource::Proxy {
            ledger.record(idx, trial_min_rb);
        }

        if let Some(point) = falsifying {
            // replay on the real system
            let real_trace = timed_simulate(
                plant,
                ai,
                &point,
                clock,
                &mut timings.ai_exec,
                &mut timings.plant_exec,
            )?;
            let mut all_robustness = Vec::with_capacity(n_subspecs);
            for s in &subs.subs {
                all_robustness.push(robustness(s, &real_trace, 0)?);
            }
            let real_rb = all_robustness[idx];
            if params.ledger_source == LedgerSource::Real {
                ledger.record(idx, real_rb);
            }
            if real_rb < 0.0 {
                genuine_trials += 1;
                for (j, &rb) in all_robustness.iter().enumerate() {
                    if rb < 0.0 {
                        ledger.entries[j].falsified = true;
                    }
                }
                violations.push(ViolationRecord {
                    subspec_index: idx,
                    point,
                    robustness: real_rb,
                    all_robustness,
                    trial: trials - 1,
                    elapsed_seconds: clock.now() - start,
                });
                if params.stop_on_first {
                    break;
                }
            } else {
                // spurious: refine the proxy once and continue
                spurious_violations += 1;
                let t0 = clock.now();
                let es = EsParams {
                    seed: derived_seed(params.seed, 1 + refinements as u64),
                    learning_rate: 1e-3,
                    ..params.es.clone()
                };
                proxy = refine(plant, ai, &proxy, &point, &es)?;
                refinements += 1;
                timings.refinement += clock.now() - t0;
            }
        }
    }

    timings.total = clock.now() - start;
    timings.algorithm = (timings.total
        - timings.synthesis
        - timings.refinement
        - timings.proxy_exec
        - timings.ai_exec
        - timings.plant_exec)
        .max(0.0);

    Ok(CampaignOutcome {
        violations,
        ledger,
        trials,
        genuine_trials,
        spurious_violations,
        refinements,
        timings,
        proxy,
        n_subspecs,
    })
}

// Seed-space separation between the synthesis/refinement streams and the
// per-trial streams (which use indices >= 1 in the trial loop).
fn derived_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0xa076_1d64_78bd_642f) ^ 0x2545_f491_4f6c_dd1d
}
