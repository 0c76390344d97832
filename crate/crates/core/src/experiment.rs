//! Seeded experiment runner shared by the CLI and the test suites.
//!
//! Randomness for trial `i` of experiment `tag` comes from
//! `StreamFamily::new(seed, tag).stream(i)`, and all aggregation goes
//! through [`fold_trials`], so metrics do not depend on the worker count.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bellspace::{singlet, singlet_along, BellOutcome};
use crate::chsh::{analytic_s, chsh_streams, optimal_settings, ChshSettings, ModelKind};
use crate::ensemble::{
    acceptance_rate_analytic, ensemble_trial, mean_infidelity_analytic, EnsembleTally,
    OutcomeSubmodel, SelectionConfig,
};
use crate::error::{Error, Result};
use crate::qcore::{axis_state, fidelity, DensityMatrix, PureState, Sign, UnitAxis};
use crate::report::{Metrics, RunReport};
use crate::stream::{fold_trials, StreamFamily, TrialRng};
use crate::teleport::{bob_marginal_before_classical, haar_random_qubit, teleport_once, TeleportTrial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TeleportQm,
    TeleportEnsemble,
    Chsh,
    Isotropy,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::TeleportQm => "teleport-qm",
            Experiment::TeleportEnsemble => "teleport-ensemble",
            Experiment::Chsh => "chsh",
            Experiment::Isotropy => "isotropy",
        }
    }
}

/// `malus` or `det` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Submodel {
    Malus,
    Det,
}

impl From<Submodel> for OutcomeSubmodel {
    fn from(s: Submodel) -> Self {
        match s {
            Submodel::Malus => OutcomeSubmodel::Malus,
            Submodel::Det => OutcomeSubmodel::DeterministicSign,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Angles in radians: polar from +z, azimuth from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    pub theta: f64,
    pub phi: f64,
}

impl Polar {
    pub fn axis(&self) -> UnitAxis {
        UnitAxis::from_polar(self.theta, self.phi)
    }

    fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.phi.is_finite()
    }
}

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub trials: u64,
    pub seed: u64,
    /// Cone half-angle; `teleport-ensemble` only.
    pub epsilon: Option<f64>,
    /// Detector rule; `teleport-ensemble`, or `chsh` as shorthand for an
    /// ensemble model.
    pub submodel: Option<Submodel>,
    /// `chsh` only.
    pub model: Option<ModelKind>,
    /// `[a, a', b, b']`; `chsh` only, defaults to [`optimal_settings`].
    pub settings: Option<[Polar; 4]>,
    /// Input direction. `teleport-qm` draws a Haar-random input per trial
    /// when absent; `teleport-ensemble` defaults to +z.
    pub input: Option<Polar>,
    pub format: OutputFormat,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub emit_trials: bool,
    /// Worker threads; `None` uses the global pool. Never affects metrics.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            trials: DEFAULT_TRIALS,
            seed: 0,
            epsilon: None,
            submodel: None,
            model: None,
            settings: None,
            input: None,
            format: OutputFormat::Json,
            output: None,
            emit_trials: false,
            workers: None,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks every field and its applicability to the chosen experiment.
    pub fn validate(&self) -> Result<()> {
        use Experiment::*;
        if self.trials == 0 {
            return Err(Error::validation("trials", "must be at least 1"));
        }
        if let Some(eps) = self.epsilon {
            if self.experiment != TeleportEnsemble {
                return Err(not_applicable("epsilon", self.experiment));
            }
            if !(eps > 0.0 && eps <= PI) {
                return Err(Error::validation(
                    "epsilon",
                    format!("must satisfy 0 < epsilon <= pi, got {eps}"),
                ));
            }
        }
        if self.submodel.is_some() && !matches!(self.experiment, TeleportEnsemble | Chsh) {
            return Err(not_applicable("submodel", self.experiment));
        }
        if self.model.is_some() && self.experiment != Chsh {
            return Err(not_applicable("model", self.experiment));
        }
        if self.experiment == Chsh {
            self.chsh_model()?;
        }
        if let Some(settings) = &self.settings {
            if self.experiment != Chsh {
                return Err(not_applicable("settings", self.experiment));
            }
            if !settings.iter().all(Polar::is_finite) {
                return Err(Error::validation("settings", "angles must be finite"));
            }
        }
        if let Some(input) = &self.input {
            if !matches!(self.experiment, TeleportQm | TeleportEnsemble) {
                return Err(not_applicable("input", self.experiment));
            }
            if !input.is_finite() {
                return Err(Error::validation("input", "angles must be finite"));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::validation("workers", "must be at least 1"));
        }
        Ok(())
    }

    fn chsh_model(&self) -> Result<ModelKind> {
        let implied = self.submodel.map(|s| match s {
            Submodel::Malus => ModelKind::EnsembleMalus,
            Submodel::Det => ModelKind::EnsembleDet,
        });
        match (self.model, implied) {
            (Some(m), Some(i)) if m != i => Err(Error::validation(
                "submodel",
                format!("conflicts with model {}", m.as_str()),
            )),
            (Some(m), _) => Ok(m),
            (None, Some(i)) => Ok(i),
            (None, None) => Ok(ModelKind::Qm),
        }
    }

    fn chsh_settings(&self) -> ChshSettings {
        match &self.settings {
            Some([a, ap, b, bp]) => ChshSettings {
                a: a.axis(),
                a_prime: ap.axis(),
                b: b.axis(),
                b_prime: bp.axis(),
            },
            None => optimal_settings(),
        }
    }
}

fn not_applicable(field: &'static str, experiment: Experiment) -> Error {
    Error::validation(field, format!("not used by {}", experiment.as_str()))
}

/// Validates `config` and runs it.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let body = || match config.experiment {
        Experiment::TeleportQm => run_teleport_qm(config),
        Experiment::TeleportEnsemble => run_teleport_ensemble(config),
        Experiment::Chsh => run_chsh(config),
        Experiment::Isotropy => run_isotropy(config),
    };
    let (metrics, trials) = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::validation("workers", e.to_string()))?
            .install(body)?,
        None => body()?,
    };
    Ok(RunReport::new(
        config,
        metrics,
        trials,
        start.elapsed().as_secs_f64() * 1e3,
    ))
}

type Rows = Option<Vec<Map<String, Value>>>;

fn collect_rows<F>(trials: u64, row: F) -> Vec<Map<String, Value>>
where
    F: Fn(u64) -> Map<String, Value> + Sync + Send,
{
    (0..trials).into_par_iter().map(row).collect()
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("rows are objects"),
    }
}

fn teleport_qm_trial(config: &ExperimentConfig, rng: &mut TrialRng) -> Result<TeleportTrial> {
    let input = match &config.input {
        Some(p) => axis_state(&p.axis(), Sign::Plus),
        None => haar_random_qubit(rng),
    };
    teleport_once(&input, rng)
}

#[derive(Debug, Clone, Copy)]
struct QmTally {
    n: u64,
    counts: [u64; 4],
    fidelity_sum: f64,
    min_fidelity: f64,
    max_prob_dev: f64,
    max_marginal_dev: f64,
    errors: u64,
}

impl Default for QmTally {
    fn default() -> Self {
        QmTally {
            n: 0,
            counts: [0; 4],
            fidelity_sum: 0.0,
            min_fidelity: f64::INFINITY,
            max_prob_dev: 0.0,
            max_marginal_dev: 0.0,
            errors: 0,
        }
    }
}

fn run_teleport_qm(config: &ExperimentConfig) -> Result<(Metrics, Rows)> {
    let streams = StreamFamily::new(config.seed, config.experiment.as_str());
    let mixed = DensityMatrix::maximally_mixed(2)?;
    let tally = fold_trials(
        config.trials,
        QmTally::default,
        |acc, i| {
            let mut rng = streams.stream(i);
            acc.n += 1;
            let Ok(t) = teleport_qm_trial(config, &mut rng) else {
                acc.errors += 1;
                return;
            };
            acc.counts[t.outcome.index()] += 1;
            acc.fidelity_sum += t.fidelity_out;
            acc.min_fidelity = acc.min_fidelity.min(t.fidelity_out);
            acc.max_prob_dev = acc.max_prob_dev.max((t.probability - 0.25).abs());
            match bob_marginal_before_classical(&t.input_state) {
                Ok(rho) => acc.max_marginal_dev = acc.max_marginal_dev.max(rho.max_abs_diff(&mixed)),
                Err(_) => acc.errors += 1,
            }
        },
        |acc, p| {
            acc.n += p.n;
            for (c, d) in acc.counts.iter_mut().zip(p.counts) {
                *c += d;
            }
            acc.fidelity_sum += p.fidelity_sum;
            acc.min_fidelity = acc.min_fidelity.min(p.min_fidelity);
            acc.max_prob_dev = acc.max_prob_dev.max(p.max_prob_dev);
            acc.max_marginal_dev = acc.max_marginal_dev.max(p.max_marginal_dev);
            acc.errors += p.errors;
        },
    );
    if tally.errors > 0 {
        return Err(Error::validation("input", "teleportation trial failed"));
    }
    let n = tally.n as f64;
    let mut m = Metrics::default();
    m.push("trials", n);
    m.push("mean_fidelity", tally.fidelity_sum / n);
    m.push("min_fidelity", tally.min_fidelity);
    m.push("max_infidelity", 1.0 - tally.min_fidelity);
    for o in BellOutcome::ALL {
        m.push_owned(format!("freq_{}", outcome_key(o)), tally.counts[o.index()] as f64 / n);
    }
    m.push("freq_std_error", (0.25 * 0.75 / n).sqrt());
    m.push("max_outcome_probability_deviation", tally.max_prob_dev);
    m.push("max_no_signalling_deviation", tally.max_marginal_dev);

    let rows = config.emit_trials.then(|| {
        collect_rows(config.trials, |i| {
            let mut rng = streams.stream(i);
            let t = teleport_qm_trial(config, &mut rng).expect("validated above");
            let a = t.input_state.amplitudes();
            let c = t.bob_corrected.amplitudes();
            obj(json!({
                "index": i,
                "input_re0": a[0].re, "input_im0": a[0].im,
                "input_re1": a[1].re, "input_im1": a[1].im,
                "outcome": outcome_key(t.outcome),
                "probability": t.probability,
                "bob_re0": c[0].re, "bob_im0": c[0].im,
                "bob_re1": c[1].re, "bob_im1": c[1].im,
                "fidelity": t.fidelity_out,
            }))
        })
    });
    Ok((m, rows))
}

fn outcome_key(o: BellOutcome) -> &'static str {
    match o {
        BellOutcome::PsiMinus => "psi_minus",
        BellOutcome::PsiPlus => "psi_plus",
        BellOutcome::PhiMinus => "phi_minus",
        BellOutcome::PhiPlus => "phi_plus",
    }
}

fn run_teleport_ensemble(config: &ExperimentConfig) -> Result<(Metrics, Rows)> {
    let epsilon = config.epsilon.unwrap_or(DEFAULT_EPSILON);
    let submodel = config.submodel.unwrap_or(Submodel::Malus);
    let cfg = SelectionConfig::new(epsilon, submodel.into())?;
    let alice = config.input.map(|p| p.axis()).unwrap_or(UnitAxis::Z);
    let streams = StreamFamily::new(config.seed, config.experiment.as_str());

    let tally = fold_trials(
        config.trials,
        EnsembleTally::default,
        |acc, i| acc.record(&ensemble_trial(&alice, &cfg, &mut streams.stream(i))),
        |acc, p| acc.merge(&p),
    );
    let s = tally.summary();
    let analytic = acceptance_rate_analytic(epsilon)?;
    let mut m = Metrics::default();
    m.push("trials", s.trials as f64);
    m.push("epsilon", epsilon);
    m.push("accepted", s.accepted as f64);
    m.push("acceptance_rate", s.acceptance_rate);
    m.push("acceptance_rate_analytic", analytic);
    let sigma = (analytic * (1.0 - analytic) / s.trials as f64).sqrt();
    m.push("acceptance_binomial_sigma", sigma);
    m.push(
        "acceptance_z_score",
        if sigma > 0.0 { (s.acceptance_rate - analytic) / sigma } else { 0.0 },
    );
    m.push_opt("mean_conditional_fidelity", s.mean_conditional_fidelity);
    m.push_opt("mean_conditional_infidelity", s.mean_conditional_infidelity);
    m.push("mean_conditional_infidelity_analytic", mean_infidelity_analytic(epsilon)?);
    m.push_opt("bob_plus_rate", s.bob_plus_rate);

    let rows = config.emit_trials.then(|| {
        collect_rows(config.trials, |i| {
            let t = ensemble_trial(&alice, &cfg, &mut streams.stream(i));
            let h = t.hidden_axis;
            obj(json!({
                "index": i,
                "accepted": t.accepted,
                "axis_x": h.x(), "axis_y": h.y(), "axis_z": h.z(),
                "conditional_fidelity": t.conditional_fidelity,
                "bob_outcome": t.bob_outcome,
            }))
        })
    });
    Ok((m, rows))
}

fn run_chsh(config: &ExperimentConfig) -> Result<(Metrics, Rows)> {
    let kind = config.chsh_model()?;
    let model = kind.model();
    let settings = config.chsh_settings();
    let tag = config.experiment.as_str();
    let est = chsh_streams(model, &settings, config.trials, config.seed, tag)?;
    let mut m = Metrics::default();
    m.push("trials_per_pair", config.trials as f64);
    let names = ["ab", "ab_prime", "a_prime_b", "a_prime_b_prime"];
    for (k, name) in names.iter().enumerate() {
        m.push_owned(format!("e_{name}"), est.correlations[k]);
        m.push_owned(format!("e_{name}_std_error"), est.correlation_std_errors[k]);
    }
    m.push("s_value", est.s_value);
    m.push("abs_s", est.abs_s());
    m.push("s_std_error", est.std_error);
    let analytic = analytic_s(model, &settings);
    m.push("s_analytic", analytic);
    m.push("abs_s_analytic", analytic.abs());
    m.push(
        "local_bound_excess_sigma",
        if est.std_error > 0.0 { (est.abs_s() - 2.0) / est.std_error } else { 0.0 },
    );

    let rows = config.emit_trials.then(|| {
        let mut rows = Vec::new();
        for (k, (a, b)) in settings.pairs().iter().enumerate() {
            let streams = StreamFamily::new(config.seed, &format!("{tag}/pair{k}"));
            rows.extend(collect_rows(config.trials, |i| {
                let (x, y) = model.joint_outcome(a, b, &mut streams.stream(i));
                obj(json!({ "pair": names[k], "index": i, "alice": x, "bob": y }))
            }));
        }
        rows
    });
    Ok((m, rows))
}

#[derive(Debug, Clone, Copy)]
struct IsoTally {
    n: u64,
    min_fidelity: f64,
    max_amp_dev: f64,
    fidelity_sum: f64,
}

fn isotropy_trial(streams: &StreamFamily, i: u64, reference: &PureState) -> (UnitAxis, f64, f64) {
    let axis = UnitAxis::sample_uniform(&mut streams.stream(i));
    let s = singlet_along(&axis);
    let f = fidelity(&s, reference).expect("two qubits each");
    (axis, f, s.max_abs_diff(reference))
}

fn run_isotropy(config: &ExperimentConfig) -> Result<(Metrics, Rows)> {
    let streams = StreamFamily::new(config.seed, config.experiment.as_str());
    let reference = singlet();
    let tally = fold_trials(
        config.trials,
        || IsoTally {
            n: 0,
            min_fidelity: f64::INFINITY,
            max_amp_dev: 0.0,
            fidelity_sum: 0.0,
        },
        |acc, i| {
            let (_, f, dev) = isotropy_trial(&streams, i, &reference);
            acc.n += 1;
            acc.min_fidelity = acc.min_fidelity.min(f);
            acc.max_amp_dev = acc.max_amp_dev.max(dev);
            acc.fidelity_sum += f;
        },
        |acc, p| {
            acc.n += p.n;
            acc.min_fidelity = acc.min_fidelity.min(p.min_fidelity);
            acc.max_amp_dev = acc.max_amp_dev.max(p.max_amp_dev);
            acc.fidelity_sum += p.fidelity_sum;
        },
    );
    let mut m = Metrics::default();
    m.push("trials", tally.n as f64);
    m.push("mean_fidelity", tally.fidelity_sum / tally.n as f64);
    m.push("min_fidelity", tally.min_fidelity);
    m.push("max_infidelity", 1.0 - tally.min_fidelity);
    m.push("max_amplitude_deviation", tally.max_amp_dev);
    let rows = config.emit_trials.then(|| {
        collect_rows(config.trials, |i| {
            let (axis, f, dev) = isotropy_trial(&streams, i, &reference);
            obj(json!({
                "index": i,
                "axis_x": axis.x(), "axis_y": axis.y(), "axis_z": axis.z(),
                "fidelity": f,
                "amplitude_deviation": dev,
            }))
        })
    });
    Ok((m, rows))
}
