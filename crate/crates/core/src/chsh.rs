//! Correlation and CHSH estimation over pluggable joint-outcome models.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bellspace::singlet;
use crate::ensemble::{ensemble_outcome, sample_pair, OutcomeSubmodel};
use crate::error::{Error, Result};
use crate::qcore::{measure_along, UnitAxis};
use crate::stream::{fold_trials, StreamFamily};

/// Produces one joint `(alice, bob)` click pair, each exactly `+1` or `-1`.
pub trait OutcomeModel: Sync {
    fn joint_outcome(&self, a: &UnitAxis, b: &UnitAxis, rng: &mut dyn RngCore) -> (i8, i8);

    /// Closed-form `E(a, b)` for this model.
    fn analytic_correlation(&self, a: &UnitAxis, b: &UnitAxis) -> f64;
}

/// Singlet statistics sampled from the closed-form joint law
/// `P(x, y) = (1 - x y a.b)/4`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuantumSinglet;

impl OutcomeModel for QuantumSinglet {
    fn joint_outcome(&self, a: &UnitAxis, b: &UnitAxis, rng: &mut dyn RngCore) -> (i8, i8) {
        let x: i8 = if rng.random::<bool>() { 1 } else { -1 };
        let p_opposite = 0.5 * (1.0 + a.dot(b));
        let y = if rng.random::<f64>() < p_opposite { -x } else { x };
        (x, y)
    }

    fn analytic_correlation(&self, a: &UnitAxis, b: &UnitAxis) -> f64 {
        -a.dot(b)
    }
}

/// Singlet statistics from sequential projective measurements on the
/// statevector. Slower; kept as an independent route for cross-checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct StatevectorSinglet;

impl OutcomeModel for StatevectorSinglet {
    fn joint_outcome(&self, a: &UnitAxis, b: &UnitAxis, rng: &mut dyn RngCore) -> (i8, i8) {
        let psi = singlet();
        let (sa, _, post) = measure_along(&psi, 0, a, rng).expect("qubit 0 exists");
        let (sb, _, _) = measure_along(&post, 1, b, rng).expect("qubit 1 exists");
        (sa.value(), sb.value())
    }

    fn analytic_correlation(&self, a: &UnitAxis, b: &UnitAxis) -> f64 {
        -a.dot(b)
    }
}

/// Hidden-axis pairs with a local detector rule on each side.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleModel {
    pub submodel: OutcomeSubmodel,
}

impl EnsembleModel {
    pub const MALUS: EnsembleModel = EnsembleModel {
        submodel: OutcomeSubmodel::Malus,
    };
    pub const DETERMINISTIC: EnsembleModel = EnsembleModel {
        submodel: OutcomeSubmodel::DeterministicSign,
    };
}

impl OutcomeModel for EnsembleModel {
    fn joint_outcome(&self, a: &UnitAxis, b: &UnitAxis, rng: &mut dyn RngCore) -> (i8, i8) {
        let pair = sample_pair(rng);
        let (alice, bob) = (pair.alice_photon(), pair.bob_photon());
        let x = ensemble_outcome(a, &alice.axis, alice.sign, self.submodel, rng);
        let y = ensemble_outcome(b, &bob.axis, bob.sign, self.submodel, rng);
        (x, y)
    }

    fn analytic_correlation(&self, a: &UnitAxis, b: &UnitAxis) -> f64 {
        match self.submodel {
            OutcomeSubmodel::Malus => -a.dot(b) / 3.0,
            OutcomeSubmodel::DeterministicSign => -1.0 + 2.0 * a.angle_to(b) / PI,
        }
    }
}

/// Named model choices exposed to the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Qm,
    EnsembleMalus,
    EnsembleDet,
}

impl ModelKind {
    pub fn model(self) -> &'static dyn OutcomeModel {
        match self {
            ModelKind::Qm => &QuantumSinglet,
            ModelKind::EnsembleMalus => &EnsembleModel::MALUS,
            ModelKind::EnsembleDet => &EnsembleModel::DETERMINISTIC,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Qm => "qm",
            ModelKind::EnsembleMalus => "ensemble-malus",
            ModelKind::EnsembleDet => "ensemble-det",
        }
    }
}

/// Sample mean of the click product with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ProductTally {
    n: u64,
    sum: i64,
}

impl ProductTally {
    fn estimate(self) -> CorrelationEstimate {
        let n = self.n.max(1) as f64;
        let mean = self.sum as f64 / n;
        CorrelationEstimate {
            mean,
            // products are +-1, so the sample variance is 1 - mean^2
            std_error: ((1.0 - mean * mean).max(0.0) / n).sqrt(),
            trials: self.n,
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::validation("trials", "must be at least 1"));
    }
    Ok(())
}

/// Estimates `E(a, b)` from a single caller-owned stream.
pub fn correlation<R: RngCore>(
    model: &dyn OutcomeModel,
    a: &UnitAxis,
    b: &UnitAxis,
    trials: u64,
    rng: &mut R,
) -> Result<f64> {
    Ok(correlation_estimate(model, a, b, trials, rng)?.mean)
}

pub fn correlation_estimate<R: RngCore>(
    model: &dyn OutcomeModel,
    a: &UnitAxis,
    b: &UnitAxis,
    trials: u64,
    rng: &mut R,
) -> Result<CorrelationEstimate> {
    check_trials(trials)?;
    let mut tally = ProductTally::default();
    for _ in 0..trials {
        let (x, y) = model.joint_outcome(a, b, rng);
        tally.n += 1;
        tally.sum += i64::from(x * y);
    }
    Ok(tally.estimate())
}

/// Estimates `E(a, b)` with one counter-based stream per trial, in parallel
/// on the current rayon pool.
pub fn correlation_streams(
    model: &dyn OutcomeModel,
    a: &UnitAxis,
    b: &UnitAxis,
    trials: u64,
    streams: &StreamFamily,
) -> Result<CorrelationEstimate> {
    check_trials(trials)?;
    let tally = fold_trials(
        trials,
        ProductTally::default,
        |acc, i| {
            let mut rng = streams.stream(i);
            let (x, y) = model.joint_outcome(a, b, &mut rng);
            acc.n += 1;
            acc.sum += i64::from(x * y);
        },
        |acc, p| {
            acc.n += p.n;
            acc.sum += p.sum;
        },
    );
    Ok(tally.estimate())
}

/// The four CHSH measurement directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a: UnitAxis,
    pub a_prime: UnitAxis,
    pub b: UnitAxis,
    pub b_prime: UnitAxis,
}

impl ChshSettings {
    /// Pairs in combination order: `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(UnitAxis, UnitAxis); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }

    pub fn rotated(&self, about: &UnitAxis, angle: f64) -> Self {
        ChshSettings {
            a: self.a.rotated(about, angle),
            a_prime: self.a_prime.rotated(about, angle),
            b: self.b.rotated(about, angle),
            b_prime: self.b_prime.rotated(about, angle),
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        ChshSettings {
            a: UnitAxis::sample_uniform(rng),
            a_prime: UnitAxis::sample_uniform(rng),
            b: UnitAxis::sample_uniform(rng),
            b_prime: UnitAxis::sample_uniform(rng),
        }
    }
}

/// Angles 0, 90, 45 and 135 degrees from +z toward +x.
pub fn optimal_settings() -> ChshSettings {
    let h = FRAC_1_SQRT_2;
    ChshSettings {
        a: UnitAxis::Z,
        a_prime: UnitAxis::X,
        b: UnitAxis::normalize(h, 0.0, h).expect("nonzero"),
        b_prime: UnitAxis::normalize(h, 0.0, -h).expect("nonzero"),
    }
}

/// `E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh_combination(e: &[f64; 4]) -> f64 {
    e[0] - e[1] + e[2] + e[3]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub settings: ChshSettings,
    /// `[E(a,b), E(a,b'), E(a',b), E(a',b')]`.
    pub correlations: [f64; 4],
    pub correlation_std_errors: [f64; 4],
    pub s_value: f64,
    pub trials_per_pair: u64,
    /// Root-sum-square of the four correlation standard errors.
    pub std_error: f64,
}

impl ChshEstimate {
    fn from_estimates(settings: ChshSettings, est: [CorrelationEstimate; 4], trials: u64) -> Self {
        let correlations = est.map(|e| e.mean);
        let correlation_std_errors = est.map(|e| e.std_error);
        ChshEstimate {
            settings,
            correlations,
            correlation_std_errors,
            s_value: chsh_combination(&correlations),
            trials_per_pair: trials,
            std_error: correlation_std_errors.iter().map(|s| s * s).sum::<f64>().sqrt(),
        }
    }

    pub fn abs_s(&self) -> f64 {
        self.s_value.abs()
    }
}

/// CHSH estimate from a single caller-owned stream; the four correlations
/// consume it one after another.
pub fn chsh_s<R: RngCore>(
    model: &dyn OutcomeModel,
    settings: &ChshSettings,
    trials_per_pair: u64,
    rng: &mut R,
) -> Result<ChshEstimate> {
    check_trials(trials_per_pair)?;
    let mut est = Vec::with_capacity(4);
    for (a, b) in settings.pairs() {
        est.push(correlation_estimate(model, &a, &b, trials_per_pair, rng)?);
    }
    let est: [CorrelationEstimate; 4] = est.try_into().expect("four pairs");
    Ok(ChshEstimate::from_estimates(*settings, est, trials_per_pair))
}

/// CHSH estimate with an independent stream family per settings pair,
/// keyed `(seed, "{tag}/pair{k}")`.
pub fn chsh_streams(
    model: &dyn OutcomeModel,
    settings: &ChshSettings,
    trials_per_pair: u64,
    seed: u64,
    tag: &str,
) -> Result<ChshEstimate> {
    check_trials(trials_per_pair)?;
    let pairs = settings.pairs();
    let mut est = [CorrelationEstimate {
        mean: 0.0,
        std_error: 0.0,
        trials: 0,
    }; 4];
    for (k, (a, b)) in pairs.iter().enumerate() {
        let streams = StreamFamily::new(seed, &format!("{tag}/pair{k}"));
        est[k] = correlation_streams(model, a, b, trials_per_pair, &streams)?;
    }
    Ok(ChshEstimate::from_estimates(*settings, est, trials_per_pair))
}

/// Analytic CHSH value of `model` at `settings`.
pub fn analytic_s(model: &dyn OutcomeModel, settings: &ChshSettings) -> f64 {
    chsh_combination(&settings.pairs().map(|(a, b)| model.analytic_correlation(&a, &b)))
}
