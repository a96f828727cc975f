//! Campaign orchestration on top of the core engine: resolve configured
//! inputs, run repeats, persist results, and print reports.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};

use falsify_core::falsify::{run_campaign, CampaignOutcome, Clock};
use falsify_core::stl::{parse_stl, StlFormula};
use falsify_core::{MlpController, PlantSpec, ProxyProgram};

use crate::builtin::builtin_plant;
use crate::formats::{
    self, ledger_entries, CampaignConfig, LedgerJson, RepeatSummary, Summary, ViolationJson,
};
use crate::metrics::{coverage, success_rate};
use crate::stats::{a12, effect_label, mann_whitney_u};

/// Monotonic wall clock for phase timings.
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// A plant argument is a fixture path if such a file exists, otherwise a
/// builtin name.
pub fn resolve_plant(arg: &str) -> Result<PlantSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        formats::load_plant(path)
    } else {
        builtin_plant(arg)
    }
}

pub fn resolve_spec(config: &CampaignConfig, plant: &PlantSpec) -> Result<StlFormula> {
    let text = match (&config.spec, &config.spec_path) {
        (Some(s), None) => s.clone(),
        (None, Some(p)) => fs::read_to_string(p)
            .with_context(|| format!("reading spec file {p}"))?,
        (Some(_), Some(_)) => bail!("config sets both `spec` and `spec_path`; pick one"),
        (None, None) => bail!("config must set `spec` or `spec_path`"),
    };
    parse_stl(text.trim(), &plant.variables).map_err(|e| anyhow::anyhow!("invalid spec: {e}"))
}

/// Everything a campaign needs, resolved and validated before trial 1.
pub struct ResolvedCampaign {
    pub config: CampaignConfig,
    pub plant: PlantSpec,
    pub controller: MlpController,
    pub phi: StlFormula,
    pub proxy: Option<ProxyProgram>,
}

pub fn resolve_config(config: CampaignConfig) -> Result<ResolvedCampaign> {
    let plant = resolve_plant(&config.plant)?;
    let controller = formats::load_controller(Path::new(&config.controller))?;
    if controller.input_dim() != plant.state_dim() {
        bail!(
            "controller expects {}-dimensional input but plant `{}` has {} states",
            controller.input_dim(),
            plant.name,
            plant.state_dim()
        );
    }
    if controller.output_dim() != plant.control_dim() {
        bail!(
            "controller produces {} outputs but plant `{}` takes {} controls",
            controller.output_dim(),
            plant.name,
            plant.control_dim()
        );
    }
    let phi = resolve_spec(&config, &plant)?;
    let proxy = match &config.proxy_path {
        Some(p) => {
            let proxy = formats::load_proxy(Path::new(p))?;
            if proxy.state_dim() != plant.state_dim() || proxy.control_dim() != plant.control_dim()
            {
                bail!("proxy in {p} does not match plant `{}` dimensions", plant.name);
            }
            Some(proxy)
        }
        None => None,
    };
    // surface parameter errors now rather than mid-run
    config.campaign_params(config.seed)?;
    Ok(ResolvedCampaign { config, plant, controller, phi, proxy })
}

pub struct CampaignArtifacts {
    pub outcomes: Vec<CampaignOutcome>,
    pub summary: Summary,
}

/// Run all configured repeats and write violations.jsonl, summary.json, and
/// ledger.json into the output directory.
pub fn run_repeats(resolved: &ResolvedCampaign, out_dir: &Path) -> Result<CampaignArtifacts> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let clock = WallClock::new();
    let mut outcomes = Vec::with_capacity(resolved.config.repeats);
    let mut violations_file = fs::File::create(out_dir.join("violations.jsonl"))?;
    let mut ledgers = Vec::new();
    let mut repeat_summaries = Vec::new();

    for repeat in 0..resolved.config.repeats {
        let seed = resolved.config.seed.wrapping_add(repeat as u64);
        let params = resolved.config.campaign_params(seed)?;
        let outcome = run_campaign(
            &resolved.plant,
            &resolved.controller,
            &resolved.phi,
            resolved.proxy.clone(),
            &params,
            &clock,
        )
        .map_err(|e| anyhow::anyhow!("campaign failed (repeat {repeat}): {e}"))?;

        for record in &outcome.violations {
            let line = serde_json::to_string(&ViolationJson::from_record(repeat, record))?;
            writeln!(violations_file, "{line}")?;
        }
        let all: Vec<Vec<f64>> =
            outcome.violations.iter().map(|v| v.all_robustness.clone()).collect();
        repeat_summaries.push(RepeatSummary {
            seed,
            trials: outcome.trials,
            genuine_trials: outcome.genuine_trials,
            spurious_violations: outcome.spurious_violations,
            refinements: outcome.refinements,
            violations: outcome.violations.len(),
            success_rate: if outcome.trials > 0 {
                success_rate(outcome.genuine_trials, outcome.trials)
            } else {
                0.0
            },
            coverage: coverage(&all, outcome.n_subspecs),
            timings: outcome.timings.into(),
        });
        ledgers.push(ledger_entries(&outcome.ledger));
        outcomes.push(outcome);
    }

    let n = repeat_summaries.len() as f64;
    let summary = Summary {
        n_subspecs: outcomes[0].n_subspecs,
        mean_success_rate: repeat_summaries.iter().map(|r| r.success_rate).sum::<f64>() / n,
        mean_coverage: repeat_summaries.iter().map(|r| r.coverage).sum::<f64>() / n,
        total_violations: repeat_summaries.iter().map(|r| r.violations).sum(),
        campaigns_with_violation:
            repeat_summaries.iter().filter(|r| r.violations > 0).count(),
        repeats: repeat_summaries,
    };
    fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(
        out_dir.join("ledger.json"),
        serde_json::to_string_pretty(&LedgerJson { repeats: ledgers })? + "\n",
    )?;
    Ok(CampaignArtifacts { outcomes, summary })
}

// ---------------------------------------------------------------------------
// report

pub struct ResultsDir {
    pub summary: Summary,
    pub violations: Vec<ViolationJson>,
}

pub fn load_results(dir: &Path) -> Result<ResultsDir> {
    let summary: Summary = serde_json::from_str(
        &fs::read_to_string(dir.join("summary.json"))
            .with_context(|| format!("reading {}", dir.join("summary.json").display()))?,
    )?;
    let text = fs::read_to_string(dir.join("violations.jsonl"))
        .with_context(|| format!("reading {}", dir.join("violations.jsonl").display()))?;
    let violations = text
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect::<Result<Vec<ViolationJson>>>()?;
    Ok(ResultsDir { summary, violations })
}

fn per_repeat_metric(results: &ResultsDir, f: impl Fn(&RepeatSummary) -> f64) -> Vec<f64> {
    results.summary.repeats.iter().map(f).collect()
}

pub fn render_report(results: &ResultsDir, baseline: Option<&ResultsDir>) -> Result<String> {
    let mut out = String::new();
    let s = &results.summary;
    // recompute the headline metrics from the raw violation records so the
    // report never disagrees with violations.jsonl
    let all: Vec<Vec<f64>> = results.violations.iter().map(|v| v.all_robustness.clone()).collect();
    let recomputed_cov = coverage(&all, s.n_subspecs);
    out.push_str(&format!("repeats:            {}\n", s.repeats.len()));
    out.push_str(&format!("sub-specifications: {}\n", s.n_subspecs));
    out.push_str(&format!("total violations:   {}\n", results.violations.len()));
    out.push_str(&format!("mean success rate:  {:.4}\n", s.mean_success_rate));
    out.push_str(&format!("mean coverage:      {:.1}%\n", s.mean_coverage));
    out.push_str(&format!("pooled coverage:    {recomputed_cov:.1}%\n"));
    out.push_str("per-repeat: seed trials violations success_rate coverage\n");
    for r in &s.repeats {
        out.push_str(&format!(
            "  {:>6} {:>6} {:>10} {:>12.4} {:>7.1}%\n",
            r.seed, r.trials, r.violations, r.success_rate, r.coverage
        ));
    }

    if let Some(base) = baseline {
        out.push_str("\nvs baseline (ours - baseline)/baseline, Mann-Whitney U, A12:\n");
        let metrics: [(&str, fn(&RepeatSummary) -> f64); 3] = [
            ("success_rate", |r| r.success_rate),
            ("coverage", |r| r.coverage),
            ("violations", |r| r.violations as f64),
        ];
        for (name, f) in metrics {
            let ours = per_repeat_metric(results, f);
            let theirs = per_repeat_metric(base, f);
            let mean_ours = ours.iter().sum::<f64>() / ours.len() as f64;
            let mean_theirs = theirs.iter().sum::<f64>() / theirs.len() as f64;
            let rel = if mean_theirs != 0.0 {
                format!("{:+.1}%", (mean_ours - mean_theirs) / mean_theirs * 100.0)
            } else {
                "---".to_string()
            };
            let (u, p) = mann_whitney_u(&ours, &theirs)?;
            let a = a12(&ours, &theirs)?;
            out.push_str(&format!(
                "  {name:<13} ours {mean_ours:.4} baseline {mean_theirs:.4} rel {rel} U={u} p={p:.4} A12={a:.3} ({})\n",
                effect_label(a)
            ));
        }
    }
    Ok(out)
}

/// Output directory helper used by `bench`.
pub fn out_dir_for(config: &CampaignConfig, cli_out: Option<&str>) -> PathBuf {
    PathBuf::from(cli_out.unwrap_or(&config.out_dir))
}
