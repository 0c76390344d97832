//! Collapse-model teleportation on an exact 3-qubit statevector.
//!
//! Register layout: qubit 0 is Alice's input photon, qubits 1 and 2 are the
//! EPR pair (photon 2 with Alice, photon 3 with Bob), prepared as the singlet.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bellspace::{bell_measure, bell_probabilities, bell_project, singlet, BellOutcome, MeasurementRecord};
use crate::error::{Error, Result};
use crate::qcore::{
    apply_one_qubit, fidelity, tensor, Complex64, DensityMatrix, Gate, PureState,
};

/// Alice's two measured qubits.
pub const ALICE_PAIR: (usize, usize) = (0, 1);
pub const BOB_QUBIT: usize = 2;

/// Bob's outcome-dependent unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliCorrection {
    Identity,
    Z,
    X,
    /// `X` first, then `Z`.
    ZX,
}

impl PauliCorrection {
    pub fn gate(self) -> Gate {
        match self {
            PauliCorrection::Identity => Gate::IDENTITY,
            PauliCorrection::Z => Gate::Z,
            PauliCorrection::X => Gate::X,
            PauliCorrection::ZX => Gate::Z.then_after(&Gate::X),
        }
    }

    pub fn apply(self, state: &PureState) -> Result<PureState> {
        apply_one_qubit(&self.gate(), 0, state)
    }
}

/// Correction table for a singlet resource.
pub fn correction_for(outcome: BellOutcome) -> PauliCorrection {
    match outcome {
        BellOutcome::PsiMinus => PauliCorrection::Identity,
        BellOutcome::PsiPlus => PauliCorrection::Z,
        BellOutcome::PhiMinus => PauliCorrection::X,
        BellOutcome::PhiPlus => PauliCorrection::ZX,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportTrial {
    pub input_state: PureState,
    pub outcome: BellOutcome,
    /// Exact probability of `outcome` for this input.
    pub probability: f64,
    pub bob_before: PureState,
    pub bob_corrected: PureState,
    pub fidelity_out: f64,
}

/// `input (x) singlet` on qubits `0 | 1 2`.
pub fn prepare(input: &PureState) -> Result<PureState> {
    if input.num_qubits() != 1 {
        return Err(Error::validation("input", "teleportation input must be one qubit"));
    }
    tensor(input, &singlet())
}

/// Bob's qubit after Alice's pair collapsed onto `outcome`.
///
/// `post` must factor as `bell(outcome) (x) bob`; the Bell factor is
/// contracted away.
pub fn bob_state(post: &PureState, outcome: BellOutcome) -> Result<PureState> {
    let b = outcome.amplitudes();
    let amps = post.amplitudes();
    let bob: [Complex64; 2] =
        std::array::from_fn(|r| (0..4).map(|xy| amps[2 * xy + r] * b[xy]).sum());
    PureState::normalized_slice(&bob)
}

fn finish(input: &PureState, record: MeasurementRecord) -> Result<TeleportTrial> {
    let bob_before = bob_state(&record.post_state, record.outcome)?;
    let bob_corrected = correction_for(record.outcome).apply(&bob_before)?;
    let fidelity_out = fidelity(input, &bob_corrected)?;
    Ok(TeleportTrial {
        input_state: input.clone(),
        outcome: record.outcome,
        probability: record.probability,
        bob_before,
        bob_corrected,
        fidelity_out,
    })
}

/// One full run: prepare, Bell-measure Alice's pair, hand the outcome to Bob,
/// correct, and score.
pub fn teleport_once<R: Rng + ?Sized>(input: &PureState, rng: &mut R) -> Result<TeleportTrial> {
    let state = prepare(input)?;
    let record = bell_measure(&state, ALICE_PAIR, rng)?;
    finish(input, record)
}

/// Same as [`teleport_once`] with the Bell outcome forced.
pub fn teleport_branch(input: &PureState, outcome: BellOutcome) -> Result<TeleportTrial> {
    let state = prepare(input)?;
    let record = bell_project(&state, ALICE_PAIR, outcome)?;
    finish(input, record)
}

/// Exact Bell-outcome probabilities for `input`.
pub fn outcome_law(input: &PureState) -> Result<[f64; 4]> {
    bell_probabilities(&prepare(input)?, ALICE_PAIR)
}

/// Bob's state averaged over Alice's outcomes, before any classical message.
pub fn bob_marginal_before_classical(input: &PureState) -> Result<DensityMatrix> {
    let state = prepare(input)?;
    let mut entries = vec![Complex64::new(0.0, 0.0); 4];
    for outcome in BellOutcome::ALL {
        let record = bell_project(&state, ALICE_PAIR, outcome)?;
        let bob = bob_state(&record.post_state, outcome)?;
        let rho = DensityMatrix::from_pure(&bob)?;
        for (e, r) in entries.iter_mut().zip(rho.entries()) {
            *e += r * record.probability;
        }
    }
    DensityMatrix::new(2, entries)
}

/// Haar-random qubit: two standard complex normals, normalized.
pub fn haar_random_qubit<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let mut draw = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        };
        let amps = vec![draw(), draw()];
        if let Ok(state) = PureState::normalized(amps) {
            return state;
        }
    }
}
