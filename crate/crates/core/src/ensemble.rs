//! State-selection model of teleportation.
//!
//! The source emits an ensemble of EPR pairs. Each pair carries a hidden
//! quantization axis shared by both photons, with opposite signs along it.
//! Alice's input photon is the `+` state along her own axis; a pair takes
//! part in the protocol only when its hidden axis lies inside a cone of
//! half-angle `epsilon` around Alice's axis. Nothing collapses: Bob's photon
//! already carries the hidden axis it left the source with.
//!
//! Bob-side functions take the hidden pair (or Bob's own photon) and never
//! Alice's axis.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{axis_state, fidelity, PureState, Sign, UnitAxis};

/// One ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HiddenPair {
    axis: UnitAxis,
    alice_sign: Sign,
    bob_sign: Sign,
}

impl HiddenPair {
    /// Bob's sign is always the opposite of Alice's.
    pub fn new(axis: UnitAxis, alice_sign: Sign) -> Self {
        HiddenPair {
            axis,
            alice_sign,
            bob_sign: alice_sign.flip(),
        }
    }

    pub fn axis(&self) -> UnitAxis {
        self.axis
    }

    pub fn alice_sign(&self) -> Sign {
        self.alice_sign
    }

    pub fn bob_sign(&self) -> Sign {
        self.bob_sign
    }

    pub fn alice_photon(&self) -> LocalPhoton {
        LocalPhoton {
            axis: self.axis,
            sign: self.alice_sign,
        }
    }

    pub fn bob_photon(&self) -> LocalPhoton {
        LocalPhoton {
            axis: self.axis,
            sign: self.bob_sign,
        }
    }
}

/// A single photon as the ensemble model sees it: hidden axis and sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalPhoton {
    pub axis: UnitAxis,
    pub sign: Sign,
}

impl LocalPhoton {
    pub fn state(&self) -> PureState {
        axis_state(&self.axis, self.sign)
    }
}

/// How a detector turns a photon's hidden axis into a `+1`/`-1` click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeSubmodel {
    /// `P(+1) = (1 + s * setting.axis) / 2`.
    Malus,
    /// `s * sign(setting.axis)`, with ties going to `+1`.
    DeterministicSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionConfig {
    epsilon: f64,
    outcome_submodel: OutcomeSubmodel,
}

impl SelectionConfig {
    /// `epsilon` is the cone half-angle in radians, `0 < epsilon <= pi`.
    pub fn new(epsilon: f64, outcome_submodel: OutcomeSubmodel) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(SelectionConfig {
            epsilon,
            outcome_submodel,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn outcome_submodel(&self) -> OutcomeSubmodel {
        self.outcome_submodel
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= PI) {
        return Err(Error::validation(
            "epsilon",
            format!("must satisfy 0 < epsilon <= pi, got {epsilon}"),
        ));
    }
    Ok(())
}

/// Outcome of one state-selection attempt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleTrial {
    pub accepted: bool,
    pub hidden_axis: UnitAxis,
    /// Bob's photon after correction; present iff accepted.
    pub bob_state: Option<PureState>,
    /// Fidelity of the corrected photon with Alice's input; present iff accepted.
    pub conditional_fidelity: Option<f64>,
    /// Bob's detector click along Alice's axis under the configured submodel;
    /// present iff accepted.
    pub bob_outcome: Option<i8>,
}

/// Draws the hidden axis (two uniforms, inverse CDF) and then Alice's sign.
pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R) -> HiddenPair {
    let axis = UnitAxis::sample_uniform(rng);
    let alice_sign = if rng.random::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    };
    HiddenPair::new(axis, alice_sign)
}

/// True iff the pair's hidden axis lies within `epsilon` of `alice_axis`.
/// The boundary is included; antipodal axes are not identified.
pub fn state_select(alice_axis: &UnitAxis, pair: &HiddenPair, cfg: &SelectionConfig) -> bool {
    pair.axis.angle_to(alice_axis) <= cfg.epsilon
}

/// Solid-angle fraction of the acceptance cone, `(1 - cos eps)/2`.
pub fn acceptance_rate_analytic(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    // 1 - cos e = 2 sin^2(e/2), stable for small e
    Ok((0.5 * epsilon).sin().powi(2))
}

/// Mean of `1 - cos^2(a/2)` over the cone with uniform solid-angle weight,
/// `(1 - cos eps)/4`.
pub fn mean_infidelity_analytic(epsilon: f64) -> Result<f64> {
    Ok(0.5 * acceptance_rate_analytic(epsilon)?)
}

/// Alice's one-bit message: whether Bob must flip his photon's sign.
///
/// Alice's input carries `+` along her axis. Her side of the selected pair
/// carries `alice_sign`; Bob's carries the opposite, so Bob flips exactly
/// when Alice's side already agrees with the input.
pub fn alice_message(pair_alice_side: &LocalPhoton) -> bool {
    pair_alice_side.sign == Sign::Plus
}

/// Bob's correction. Reads only his own photon and Alice's bit.
pub fn bob_correct(photon: LocalPhoton, flip: bool) -> LocalPhoton {
    if flip {
        LocalPhoton {
            axis: photon.axis,
            sign: photon.sign.flip(),
        }
    } else {
        photon
    }
}

/// A detector click for one photon.
pub fn ensemble_outcome<R: Rng + ?Sized>(
    setting: &UnitAxis,
    photon_axis: &UnitAxis,
    sign: Sign,
    submodel: OutcomeSubmodel,
    rng: &mut R,
) -> i8 {
    let projection = setting.dot(photon_axis);
    let s = f64::from(sign.value());
    match submodel {
        OutcomeSubmodel::Malus => {
            let p_plus = 0.5 * (1.0 + s * projection);
            if rng.random::<f64>() < p_plus {
                1
            } else {
                -1
            }
        }
        OutcomeSubmodel::DeterministicSign => {
            // ties go to +1
            if projection == 0.0 || (projection > 0.0) == (sign == Sign::Plus) {
                1
            } else {
                -1
            }
        }
    }
}

/// One ensemble teleportation attempt for an input `+` along `alice_axis`.
pub fn ensemble_trial<R: Rng + ?Sized>(
    alice_axis: &UnitAxis,
    cfg: &SelectionConfig,
    rng: &mut R,
) -> EnsembleTrial {
    let pair = sample_pair(rng);
    if !state_select(alice_axis, &pair, cfg) {
        return EnsembleTrial {
            accepted: false,
            hidden_axis: pair.axis,
            bob_state: None,
            conditional_fidelity: None,
            bob_outcome: None,
        };
    }
    let flip = alice_message(&pair.alice_photon());
    let corrected = bob_correct(pair.bob_photon(), flip);
    let bob_state = corrected.state();
    let target = axis_state(alice_axis, Sign::Plus);
    let f = fidelity(&target, &bob_state).expect("both one qubit");
    let click = ensemble_outcome(
        alice_axis,
        &corrected.axis,
        corrected.sign,
        cfg.outcome_submodel,
        rng,
    );
    EnsembleTrial {
        accepted: true,
        hidden_axis: pair.axis,
        bob_state: Some(bob_state),
        conditional_fidelity: Some(f),
        bob_outcome: Some(click),
    }
}

/// Running counts and sums; merging is plain addition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnsembleTally {
    pub trials: u64,
    pub accepted: u64,
    pub fidelity_sum: f64,
    pub infidelity_sum: f64,
    pub bob_plus: u64,
}

impl EnsembleTally {
    pub fn record(&mut self, trial: &EnsembleTrial) {
        self.trials += 1;
        if let Some(f) = trial.conditional_fidelity {
            self.accepted += 1;
            self.fidelity_sum += f;
            self.infidelity_sum += 1.0 - f;
        }
        if trial.bob_outcome == Some(1) {
            self.bob_plus += 1;
        }
    }

    pub fn merge(&mut self, other: &EnsembleTally) {
        self.trials += other.trials;
        self.accepted += other.accepted;
        self.fidelity_sum += other.fidelity_sum;
        self.infidelity_sum += other.infidelity_sum;
        self.bob_plus += other.bob_plus;
    }

    pub fn summary(&self) -> EnsembleSummary {
        let rate = self.accepted as f64 / self.trials.max(1) as f64;
        let per_accepted = |x: f64| (self.accepted > 0).then(|| x / self.accepted as f64);
        EnsembleSummary {
            trials: self.trials,
            accepted: self.accepted,
            acceptance_rate: rate,
            acceptance_std_error: (rate * (1.0 - rate) / self.trials.max(1) as f64).sqrt(),
            mean_conditional_fidelity: per_accepted(self.fidelity_sum),
            mean_conditional_infidelity: per_accepted(self.infidelity_sum),
            bob_plus_rate: per_accepted(self.bob_plus as f64),
            records: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub trials: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// Binomial standard error of `acceptance_rate`.
    pub acceptance_std_error: f64,
    /// Absent when no trial was accepted.
    pub mean_conditional_fidelity: Option<f64>,
    pub mean_conditional_infidelity: Option<f64>,
    pub bob_plus_rate: Option<f64>,
    pub records: Vec<EnsembleTrial>,
}

/// Runs `trials` attempts from a single stream and keeps every record.
pub fn run_ensemble_teleport<R: Rng + ?Sized>(
    alice_axis: &UnitAxis,
    cfg: &SelectionConfig,
    trials: u64,
    rng: &mut R,
) -> Result<EnsembleSummary> {
    if trials == 0 {
        return Err(Error::validation("trials", "must be at least 1"));
    }
    let mut tally = EnsembleTally::default();
    let mut records = Vec::with_capacity(trials.min(1 << 20) as usize);
    for _ in 0..trials {
        let t = ensemble_trial(alice_axis, cfg, rng);
        tally.record(&t);
        records.push(t);
    }
    let mut summary = tally.summary();
    summary.records = records;
    Ok(summary)
}
