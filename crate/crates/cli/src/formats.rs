//! On-disk formats: plant fixtures, controller weights, proxy coefficients,
//! campaign configuration, result records, and trace CSV.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use falsify_core::controller::{Activation, Layer};
use falsify_core::falsify::{
    Budget, CampaignParams, LedgerSource, PhaseTimings, SaParams, SubSpecLedger, ViolationRecord,
};
use falsify_core::plant::Dynamics;
use falsify_core::synthesis::EsParams;
use falsify_core::{BoxDomain, MlpController, PlantSpec, ProxyProgram, Trace};

// ---------------------------------------------------------------------------
// plant fixtures

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PlantParams {
    Pendulum { gravity: f64, mass: f64, length: f64 },
    CartPole { cart_mass: f64, pole_mass: f64, pole_half_length: f64, gravity: f64 },
    LaneFollow { speed: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantFile {
    pub name: String,
    pub state_dim: usize,
    pub control_dim: usize,
    pub dt: f64,
    pub horizon: usize,
    pub init_box: Vec<(f64, f64)>,
    pub control_bounds: Vec<(f64, f64)>,
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PlantParams>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "A")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "B")]
    pub b: Option<Vec<Vec<f64>>>,
}

impl PlantFile {
    pub fn from_spec(plant: &PlantSpec) -> Self {
        let (params, a, b) = match &plant.dynamics {
            Dynamics::Linear { a, b } => (None, Some(a.clone()), Some(b.clone())),
            Dynamics::Pendulum { gravity, mass, length } => (
                Some(PlantParams::Pendulum { gravity: *gravity, mass: *mass, length: *length }),
                None,
                None,
            ),
            Dynamics::CartPole { cart_mass, pole_mass, pole_half_length, gravity } => (
                Some(PlantParams::CartPole {
                    cart_mass: *cart_mass,
                    pole_mass: *pole_mass,
                    pole_half_length: *pole_half_length,
                    gravity: *gravity,
                }),
                None,
                None,
            ),
            Dynamics::LaneFollow { speed } => {
                (Some(PlantParams::LaneFollow { speed: *speed }), None, None)
            }
        };
        PlantFile {
            name: plant.name.clone(),
            state_dim: plant.state_dim(),
            control_dim: plant.control_dim(),
            dt: plant.dt,
            horizon: plant.horizon,
            init_box: plant.init_box.bounds().to_vec(),
            control_bounds: plant.control_bounds.clone(),
            variables: plant.variables.clone(),
            params,
            a,
            b,
        }
    }

    pub fn into_spec(self) -> Result<PlantSpec> {
        let dynamics = match (self.params, self.a, self.b) {
            (Some(p), None, None) => match p {
                PlantParams::Pendulum { gravity, mass, length } => {
                    Dynamics::Pendulum { gravity, mass, length }
                }
                PlantParams::CartPole { cart_mass, pole_mass, pole_half_length, gravity } => {
                    Dynamics::CartPole { cart_mass, pole_mass, pole_half_length, gravity }
                }
                PlantParams::LaneFollow { speed } => Dynamics::LaneFollow { speed },
            },
            (None, Some(a), Some(b)) => {
                if a.len() != self.state_dim
                    || a.iter().any(|row| row.len() != self.state_dim)
                {
                    bail!("plant `{}`: A must be {1}x{1}", self.name, self.state_dim);
                }
                if b.len() != self.state_dim
                    || b.iter().any(|row| row.len() != self.control_dim)
                {
                    bail!(
                        "plant `{}`: B must be {}x{}",
                        self.name,
                        self.state_dim,
                        self.control_dim
                    );
                }
                Dynamics::Linear { a, b }
            }
            _ => bail!("plant `{}`: give either `params` or both `A` and `B`", self.name),
        };
        if dynamics.state_dim() != self.state_dim {
            bail!(
                "plant `{}`: declared state_dim {} but dynamics have {}",
                self.name,
                self.state_dim,
                dynamics.state_dim()
            );
        }
        if dynamics.control_dim() != self.control_dim {
            bail!(
                "plant `{}`: declared control_dim {} but dynamics have {}",
                self.name,
                self.control_dim,
                dynamics.control_dim()
            );
        }
        if self.variables.len() != self.state_dim {
            bail!("plant `{}`: {} variable names for state_dim {}", self.name, self.variables.len(), self.state_dim);
        }
        if self.control_bounds.len() != self.control_dim {
            bail!("plant `{}`: {} control bounds for control_dim {}", self.name, self.control_bounds.len(), self.control_dim);
        }
        if self.horizon == 0 {
            bail!("plant `{}`: horizon must be >= 1", self.name);
        }
        if !(self.dt > 0.0) {
            bail!("plant `{}`: dt must be positive", self.name);
        }
        let init_box = BoxDomain::new(self.init_box)
            .map_err(|e| anyhow::anyhow!("plant `{}`: {e}", self.name))?;
        if init_box.dim() != self.state_dim {
            bail!("plant `{}`: init_box dimension mismatch", self.name);
        }
        Ok(PlantSpec {
            name: self.name,
            dt: self.dt,
            horizon: self.horizon,
            init_box,
            control_bounds: self.control_bounds,
            variables: self.variables,
            dynamics,
        })
    }
}

pub fn load_plant(path: &Path) -> Result<PlantSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading plant fixture {}", path.display()))?;
    let file: PlantFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing plant fixture {}", path.display()))?;
    file.into_spec()
}

pub fn save_plant(path: &Path, plant: &PlantSpec) -> Result<()> {
    let text = serde_json::to_string_pretty(&PlantFile::from_spec(plant))?;
    fs::write(path, text + "\n")
        .with_context(|| format!("writing plant fixture {}", path.display()))
}

// ---------------------------------------------------------------------------
// controller weights

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerJson {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub activation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightFile {
    pub input_dim: usize,
    pub output_dim: usize,
    pub output_scale: Vec<f64>,
    pub layers: Vec<LayerJson>,
}

fn activation_from_str(s: &str) -> Result<Activation> {
    Ok(match s {
        "relu" => Activation::Relu,
        "tanh" => Activation::Tanh,
        "linear" => Activation::Linear,
        other => bail!("unknown activation `{other}` (expected relu, tanh, or linear)"),
    })
}

fn activation_to_str(a: Activation) -> &'static str {
    match a {
        Activation::Relu => "relu",
        Activation::Tanh => "tanh",
        Activation::Linear => "linear",
    }
}

impl WeightFile {
    pub fn from_controller(c: &MlpController) -> Self {
        WeightFile {
            input_dim: c.input_dim(),
            output_dim: c.output_dim(),
            output_scale: c.output_scale().to_vec(),
            layers: c
                .layers()
                .iter()
                .map(|l| LayerJson {
                    w: l.weights.clone(),
                    b: l.bias.clone(),
                    activation: activation_to_str(l.activation).to_string(),
                })
                .collect(),
        }
    }

    pub fn into_controller(self) -> Result<MlpController> {
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                Ok(Layer {
                    weights: l.w,
                    bias: l.b,
                    activation: activation_from_str(&l.activation)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let c = MlpController::new(layers, self.output_scale)
            .map_err(|e| anyhow::anyhow!("invalid weight file: {e}"))?;
        if c.input_dim() != self.input_dim {
            bail!("weight file declares input_dim {} but layers expect {}", self.input_dim, c.input_dim());
        }
        if c.output_dim() != self.output_dim {
            bail!("weight file declares output_dim {} but layers produce {}", self.output_dim, c.output_dim());
        }
        Ok(c)
    }
}

pub fn load_controller(path: &Path) -> Result<MlpController> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading weight file {}", path.display()))?;
    let file: WeightFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing weight file {}", path.display()))?;
    file.into_controller()
}

pub fn save_controller(path: &Path, c: &MlpController) -> Result<()> {
    let text = serde_json::to_string(&WeightFile::from_controller(c))?;
    fs::write(path, text + "\n").with_context(|| format!("writing weight file {}", path.display()))
}

// ---------------------------------------------------------------------------
// proxy coefficients

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyFile {
    pub state_dim: usize,
    pub control_dim: usize,
    pub theta: Vec<Vec<f64>>,
}

pub fn load_proxy(path: &Path) -> Result<ProxyProgram> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading proxy file {}", path.display()))?;
    let file: ProxyFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing proxy file {}", path.display()))?;
    let proxy = ProxyProgram::new(file.theta)
        .map_err(|e| anyhow::anyhow!("invalid proxy file: {e}"))?;
    if proxy.state_dim() != file.state_dim || proxy.control_dim() != file.control_dim {
        bail!(
            "proxy file declares {}x{} but theta is {}x{}",
            file.control_dim,
            file.state_dim,
            proxy.control_dim(),
            proxy.state_dim()
        );
    }
    Ok(proxy)
}

pub fn save_proxy(path: &Path, proxy: &ProxyProgram) -> Result<()> {
    let file = ProxyFile {
        state_dim: proxy.state_dim(),
        control_dim: proxy.control_dim(),
        theta: proxy.theta.clone(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    fs::write(path, text + "\n").with_context(|| format!("writing proxy file {}", path.display()))
}

// ---------------------------------------------------------------------------
// campaign configuration

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetJson {
    pub kind: String,
    pub limit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SaJson {
    pub max_iterations: usize,
    pub t0: f64,
    pub cooling: f64,
    pub perturb_scale: f64,
}

impl Default for SaJson {
    fn default() -> Self {
        let d = SaParams::default();
        SaJson {
            max_iterations: d.max_iterations,
            t0: d.initial_temp,
            cooling: d.cooling,
            perturb_scale: d.perturb_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EsJson {
    pub population: usize,
    pub max_iterations: usize,
    pub time_steps: usize,
    pub noise_std: f64,
    pub learning_rate: f64,
    pub fitness_threshold: f64,
    pub rollout_horizon: usize,
}

impl Default for EsJson {
    fn default() -> Self {
        let d = EsParams::default();
        EsJson {
            population: d.population,
            max_iterations: d.max_iterations,
            time_steps: d.time_steps,
            noise_std: d.noise_std,
            learning_rate: d.learning_rate,
            fitness_threshold: d.fitness_threshold,
            rollout_horizon: d.rollout_horizon,
        }
    }
}

fn default_epsilon() -> f64 {
    0.9
}
fn default_repeats() -> usize {
    1
}
fn default_out_dir() -> String {
    "results".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignConfig {
    /// Builtin plant name or path to a plant fixture file.
    pub plant: String,
    /// Path to a controller weight file.
    pub controller: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec_path: Option<String>,
    pub budget: BudgetJson,
    #[serde(default)]
    pub sa: SaJson,
    #[serde(default)]
    pub es: EsJson,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub stop_on_first: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_path: Option<String>,
    /// "proxy" (default) or "real": which system feeds the ledger.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger_source: Option<String>,
}

impl CampaignConfig {
    pub fn budget(&self) -> Result<Budget> {
        match self.budget.kind.as_str() {
            "trials" => {
                if self.budget.limit < 1.0 || self.budget.limit.fract() != 0.0 {
                    bail!("budget limit for kind `trials` must be a positive integer");
                }
                Ok(Budget::Trials(self.budget.limit as usize))
            }
            "wall_time" => {
                if !(self.budget.limit > 0.0) {
                    bail!("budget limit for kind `wall_time` must be positive seconds");
                }
                Ok(Budget::WallTime(self.budget.limit))
            }
            other => bail!("unknown budget kind `{other}` (expected trials or wall_time)"),
        }
    }

    pub fn campaign_params(&self, seed: u64) -> Result<CampaignParams> {
        if self.repeats < 1 {
            bail!("repeats must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            bail!("epsilon must be in [0, 1], got {}", self.epsilon);
        }
        let ledger_source = match self.ledger_source.as_deref() {
            None | Some("proxy") => LedgerSource::Proxy,
            Some("real") => LedgerSource::Real,
            Some(other) => bail!("unknown ledger_source `{other}` (expected proxy or real)"),
        };
        Ok(CampaignParams {
            budget: self.budget()?,
            sa: SaParams {
                max_iterations: self.sa.max_iterations,
                initial_temp: self.sa.t0,
                cooling: self.sa.cooling,
                perturb_scale: self.sa.perturb_scale,
            },
            es: EsParams {
                population: self.es.population,
                max_iterations: self.es.max_iterations,
                time_steps: self.es.time_steps,
                noise_std: self.es.noise_std,
                learning_rate: self.es.learning_rate,
                fitness_threshold: self.es.fitness_threshold,
                rollout_horizon: self.es.rollout_horizon,
                seed: 0,
            },
            epsilon: self.epsilon,
            seed,
            stop_on_first: self.stop_on_first,
            ledger_source,
        })
    }
}

pub fn load_config(path: &Path) -> Result<CampaignConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

// ---------------------------------------------------------------------------
// result records

/// Serialized violation record. Deliberately excludes wall-clock fields so
/// result files are byte-identical across reruns with the same seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationJson {
    pub repeat: usize,
    pub trial: usize,
    pub subspec_index: usize,
    pub point: Vec<f64>,
    pub robustness: f64,
    pub all_robustness: Vec<f64>,
}

impl ViolationJson {
    pub fn from_record(repeat: usize, r: &ViolationRecord) -> Self {
        ViolationJson {
            repeat,
            trial: r.trial,
            subspec_index: r.subspec_index,
            point: r.point.coords.clone(),
            robustness: r.robustness,
            all_robustness: r.all_robustness.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntryJson {
    pub lowest_robustness: f64,
    pub falsified: bool,
    pub attempts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerJson {
    pub repeats: Vec<Vec<LedgerEntryJson>>,
}

pub fn ledger_entries(ledger: &SubSpecLedger) -> Vec<LedgerEntryJson> {
    ledger
        .entries
        .iter()
        .map(|e| LedgerEntryJson {
            lowest_robustness: e.lowest_robustness,
            falsified: e.falsified,
            attempts: e.attempts,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingsJson {
    pub synthesis: f64,
    pub refinement: f64,
    pub proxy_exec: f64,
    pub ai_exec: f64,
    pub plant_exec: f64,
    pub algorithm: f64,
    pub total: f64,
}

impl From<PhaseTimings> for TimingsJson {
    fn from(t: PhaseTimings) -> Self {
        TimingsJson {
            synthesis: t.synthesis,
            refinement: t.refinement,
            proxy_exec: t.proxy_exec,
            ai_exec: t.ai_exec,
            plant_exec: t.plant_exec,
            algorithm: t.algorithm,
            total: t.total,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub seed: u64,
    pub trials: usize,
    pub genuine_trials: usize,
    pub spurious_violations: usize,
    pub refinements: usize,
    pub violations: usize,
    pub success_rate: f64,
    pub coverage: f64,
    pub timings: TimingsJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub n_subspecs: usize,
    pub repeats: Vec<RepeatSummary>,
    pub mean_success_rate: f64,
    pub mean_coverage: f64,
    pub total_violations: usize,
    pub campaigns_with_violation: usize,
}

// ---------------------------------------------------------------------------
// trace CSV

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let mut out = String::from("t");
    for v in &trace.variables {
        out.push(',');
        out.push_str(v);
    }
    out.push('\n');
    for (k, state) in trace.states.iter().enumerate() {
        out.push_str(&format!("{}", k as f64 * trace.dt));
        for x in state {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing trace {}", path.display()))
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("trace file is empty")?;
    let mut cols = header.split(',');
    if cols.next() != Some("t") {
        bail!("trace header must start with `t`");
    }
    let variables: Vec<String> = cols.map(|s| s.to_string()).collect();
    if variables.is_empty() {
        bail!("trace header lists no state variables");
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != variables.len() + 1 {
            bail!("trace row {} has {} fields, expected {}", i + 2, fields.len(), variables.len() + 1);
        }
        let mut parsed = fields.iter().map(|f| {
            f.parse::<f64>().with_context(|| format!("trace row {}: bad number `{f}`", i + 2))
        });
        times.push(parsed.next().unwrap()?);
        states.push(parsed.collect::<Result<Vec<f64>>>()?);
    }
    if states.len() < 2 {
        bail!("trace file needs at least two data rows to recover dt");
    }
    // t column is k * dt, so row 1 carries dt exactly
    let dt = times[1];
    Trace::new(dt, variables, states).map_err(|e| anyhow::anyhow!("invalid trace: {e}"))
}
