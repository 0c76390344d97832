//! Bell basis, the singlet along arbitrary quantization axes, and projective
//! Bell-basis measurement of a qubit pair inside a 3-qubit register.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{axis_state, qubit_mask, tensor, Complex64, PureState, Sign, UnitAxis};

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellOutcome {
    /// Fixed order used for sampling and histograms.
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PsiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PhiPlus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Real amplitudes over `|00>, |01>, |10>, |11>`.
    pub fn amplitudes(self) -> [f64; 4] {
        const H: f64 = FRAC_1_SQRT_2;
        match self {
            BellOutcome::PsiMinus => [0.0, H, -H, 0.0],
            BellOutcome::PsiPlus => [0.0, H, H, 0.0],
            BellOutcome::PhiMinus => [H, 0.0, 0.0, -H],
            BellOutcome::PhiPlus => [H, 0.0, 0.0, H],
        }
    }

    pub fn state(self) -> PureState {
        PureState::from_real(&self.amplitudes()).expect("Bell states are normalized")
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellOutcome::PsiMinus => "psi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PhiPlus => "phi+",
        })
    }
}

/// Result of one Bell-basis measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: BellOutcome,
    /// Exact Born probability of `outcome`.
    pub probability: f64,
    /// Full 3-qubit state after collapse, renormalized.
    pub post_state: PureState,
}

/// `(|01> - |10>)/sqrt2`.
pub fn singlet() -> PureState {
    BellOutcome::PsiMinus.state()
}

/// `(|+>_n |->_n - |->_n |+>_n)/sqrt2` with the same axis on both factors.
pub fn singlet_along(axis: &UnitAxis) -> PureState {
    let plus = axis_state(axis, Sign::Plus);
    let minus = axis_state(axis, Sign::Minus);
    let pm = tensor(&plus, &minus).expect("two qubits");
    let mp = tensor(&minus, &plus).expect("two qubits");
    let amplitudes: [Complex64; 4] =
        std::array::from_fn(|i| (pm.amplitude(i) - mp.amplitude(i)) * FRAC_1_SQRT_2);
    PureState::normalized_slice(&amplitudes).expect("singlet has unit norm")
}

/// `[Psi-, Psi+, Phi-, Phi+]`.
pub fn bell_basis() -> [PureState; 4] {
    BellOutcome::ALL.map(BellOutcome::state)
}

/// Validated pair of distinct qubits in a 3-qubit register plus the spectator.
#[derive(Debug, Clone, Copy)]
struct PairLayout {
    first: usize,
    second: usize,
    spectator: usize,
}

impl PairLayout {
    fn new(state: &PureState, pair: (usize, usize)) -> Result<Self> {
        let n = state.num_qubits();
        if n != 3 {
            return Err(Error::validation(
                "state",
                format!("Bell measurement expects 3 qubits, got {n}"),
            ));
        }
        let (first, second) = pair;
        for q in [first, second] {
            if q >= n {
                return Err(Error::Index {
                    index: q,
                    num_qubits: n,
                });
            }
        }
        if first == second {
            return Err(Error::validation("pair", "qubits must be distinct"));
        }
        let spectator = 3 - first - second;
        Ok(PairLayout {
            first,
            second,
            spectator,
        })
    }

    fn masks(&self) -> (usize, usize, usize) {
        (
            qubit_mask(self.first, 3),
            qubit_mask(self.second, 3),
            qubit_mask(self.spectator, 3),
        )
    }

    /// Spectator amplitudes `<b|_pair |psi>` and their squared norm, which is
    /// the outcome probability.
    fn remainder(&self, state: &PureState, outcome: BellOutcome) -> ([Complex64; 2], f64) {
        let b = outcome.amplitudes();
        let (m1, m2, ms) = self.masks();
        let mut rem = [Complex64::new(0.0, 0.0); 2];
        for (i, a) in state.amplitudes().iter().enumerate() {
            let pair = 2 * usize::from(i & m1 != 0) + usize::from(i & m2 != 0);
            rem[usize::from(i & ms != 0)] += a * b[pair];
        }
        let p = rem[0].norm_sqr() + rem[1].norm_sqr();
        (rem, p)
    }

    /// Normalized `|b> (x) rem` laid out in register order.
    fn collapse(&self, outcome: BellOutcome, rem: [Complex64; 2]) -> Result<PureState> {
        let b = outcome.amplitudes();
        let (m1, m2, ms) = self.masks();
        let amps: [Complex64; 8] = std::array::from_fn(|i| {
            let pair = 2 * usize::from(i & m1 != 0) + usize::from(i & m2 != 0);
            rem[usize::from(i & ms != 0)] * b[pair]
        });
        PureState::normalized_slice(&amps)
    }
}

/// Exact outcome probabilities in [`BellOutcome::ALL`] order.
pub fn bell_probabilities(state: &PureState, pair: (usize, usize)) -> Result<[f64; 4]> {
    let layout = PairLayout::new(state, pair)?;
    Ok(BellOutcome::ALL.map(|o| layout.remainder(state, o).1))
}

/// Collapse onto a chosen outcome without sampling.
pub fn bell_project(
    state: &PureState,
    pair: (usize, usize),
    outcome: BellOutcome,
) -> Result<MeasurementRecord> {
    let layout = PairLayout::new(state, pair)?;
    let (rem, probability) = layout.remainder(state, outcome);
    Ok(MeasurementRecord {
        outcome,
        probability,
        post_state: layout.collapse(outcome, rem)?,
    })
}

/// Samples a Bell outcome on `pair` with Born-rule weights and collapses.
///
/// Draws one uniform from `rng`. Zero-probability branches are never chosen.
pub fn bell_measure<R: Rng + ?Sized>(
    state: &PureState,
    pair: (usize, usize),
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let layout = PairLayout::new(state, pair)?;
    let norm_sq = state.norm_sqr();
    if norm_sq.is_nan() || norm_sq <= 0.5 {
        return Err(Error::Degenerate(norm_sq));
    }
    let branches = BellOutcome::ALL.map(|o| layout.remainder(state, o));
    let total: f64 = branches.iter().map(|b| b.1).sum();
    let u = rng.random::<f64>() * total;

    let mut chosen = None;
    let mut acc = 0.0;
    for (k, (_, p)) in branches.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        chosen = Some(k);
        acc += p;
        if u < acc {
            break;
        }
    }
    let k = chosen.ok_or(Error::Degenerate(total))?;
    let (rem, probability) = branches[k];
    let outcome = BellOutcome::ALL[k];
    Ok(MeasurementRecord {
        outcome,
        probability,
        post_state: layout.collapse(outcome, rem)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity, partial_trace, DensityMatrix, EXACT_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singlet_amplitudes() {
        let s = singlet();
        let expected = [0.0, 0.7071067811865475, -0.7071067811865475, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < EXACT_TOL && a.im == 0.0);
        }
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < EXACT_TOL);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(partial_trace(&s, 1).unwrap().max_abs_diff(&mixed) < EXACT_TOL);
    }

    #[test]
    fn singlet_along_z_reduces_to_singlet() {
        assert!(singlet_along(&UnitAxis::Z).max_abs_diff(&singlet()) < EXACT_TOL);
    }

    #[test]
    fn singlet_along_x_same_state() {
        let f = fidelity(&singlet_along(&UnitAxis::X), &singlet()).unwrap();
        assert!((f - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn bell_basis_orthonormal_and_complete() {
        let basis = bell_basis();
        assert!(basis[0].max_abs_diff(&singlet()) < EXACT_TOL);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let g = a.inner(b).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g.re - target).abs() < EXACT_TOL && g.im.abs() < EXACT_TOL);
            }
        }
        // sum of projectors = I_4
        for r in 0..4 {
            for c in 0..4 {
                let sum: Complex64 = basis
                    .iter()
                    .map(|b| b.amplitude(r) * b.amplitude(c).conj())
                    .sum();
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((sum - Complex64::new(target, 0.0)).norm() < EXACT_TOL);
            }
        }
    }

    #[test]
    fn z_up_with_singlet_gives_uniform_outcomes() {
        let input = axis_state(&UnitAxis::Z, Sign::Plus);
        let state = tensor(&input, &singlet()).unwrap();
        let p = bell_probabilities(&state, (0, 1)).unwrap();
        for pk in p {
            assert!((pk - 0.25).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn prepared_bell_pair_is_certain() {
        let anything = axis_state(&UnitAxis::from_polar(0.8, 2.0), Sign::Minus);
        let state = tensor(&BellOutcome::PsiPlus.state(), &anything).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rec = bell_measure(&state, (0, 1), &mut rng).unwrap();
            assert_eq!(rec.outcome, BellOutcome::PsiPlus);
            assert!((rec.probability - 1.0).abs() < EXACT_TOL);
            assert!(rec.post_state.max_abs_diff(&state) < EXACT_TOL);
        }
    }

    #[test]
    fn measurement_is_deterministic_for_a_seed() {
        let input = axis_state(&UnitAxis::from_polar(1.3, 0.2), Sign::Plus);
        let state = tensor(&input, &singlet()).unwrap();
        let a = bell_measure(&state, (0, 1), &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = bell_measure(&state, (0, 1), &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_adjacent_pair() {
        // Phi+ on qubits (0, 2), qubit 1 in |1>
        let h = FRAC_1_SQRT_2;
        let state = PureState::from_real(&[0.0, 0.0, h, 0.0, 0.0, 0.0, 0.0, h]).unwrap();
        let p = bell_probabilities(&state, (0, 2)).unwrap();
        assert!((p[BellOutcome::PhiPlus.index()] - 1.0).abs() < EXACT_TOL);
        let p_swapped = bell_probabilities(&state, (2, 0)).unwrap();
        assert!((p_swapped[BellOutcome::PhiPlus.index()] - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn bad_pairs_rejected() {
        let state = PureState::basis(3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(bell_measure(&state, (0, 0), &mut rng).is_err());
        assert!(bell_measure(&state, (0, 3), &mut rng).is_err());
        let two = PureState::basis(2, 0).unwrap();
        assert!(bell_measure(&two, (0, 1), &mut rng).is_err());
    }
}
