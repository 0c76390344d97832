//! Dense complex linear algebra for registers of one to three qubits.
//!
//! Basis states are indexed with qubit 0 as the most significant bit, so a
//! 3-qubit index `i` encodes `|q0 q1 q2>` as `i = 4*q0 + 2*q1 + q2`. Every
//! other module inherits this convention.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// A probability amplitude.
pub type ComplexAmplitude = Complex64;

/// Tolerance for checks that are exact in real arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

/// Slack allowed on density-matrix eigenvalues below zero.
pub const PSD_SLACK: f64 = 1e-10;

pub const MAX_QUBITS: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sign of a spin projection along a quantization axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `+1` or `-1`.
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Self {
        if v >= 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A direction on the unit 2-sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitAxis {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitAxis {
    pub const X: UnitAxis = UnitAxis { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: UnitAxis = UnitAxis { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: UnitAxis = UnitAxis { x: 0.0, y: 0.0, z: 1.0 };

    /// Accepts components only if they already have unit length.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm_sq = x * x + y * y + z * z;
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > EXACT_TOL {
            return Err(Error::NonUnitAxis { norm_sq });
        }
        Ok(UnitAxis { x, y, z })
    }

    /// Rescales an arbitrary nonzero vector onto the sphere.
    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::NonUnitAxis { norm_sq: norm * norm });
        }
        Ok(UnitAxis {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x toward +y.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        UnitAxis {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    /// Uniform on the sphere by inverse CDF: `z` uniform on [-1, 1], azimuth
    /// uniform on [0, 2pi). Consumes exactly two uniforms.
    pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let phi: f64 = 2.0 * PI * rng.random::<f64>();
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let (sp, cp) = phi.sin_cos();
        UnitAxis {
            x: rho * cp,
            y: rho * sp,
            z,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &UnitAxis) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Angle in `[0, pi]` between two axes.
    pub fn angle_to(&self, other: &UnitAxis) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    /// `(theta, phi)` with `theta` in `[0, pi]` and `phi` in `(-pi, pi]`.
    pub fn polar(&self) -> (f64, f64) {
        (self.z.clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }

    pub fn antipode(&self) -> Self {
        UnitAxis {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Rotates `self` by `angle` about `about` (right-hand rule, Rodrigues).
    pub fn rotated(&self, about: &UnitAxis, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let k = about;
        let kxv = [
            k.y * self.z - k.z * self.y,
            k.z * self.x - k.x * self.z,
            k.x * self.y - k.y * self.x,
        ];
        let kdv = k.dot(self);
        let v = self.to_array();
        let k = k.to_array();
        let r: [f64; 3] = std::array::from_fn(|i| v[i] * c + kxv[i] * s + k[i] * kdv * (1.0 - c));
        // renormalize to keep drift out of repeated rotations
        UnitAxis::normalize(r[0], r[1], r[2]).expect("rotation preserves length")
    }
}

const MAX_DIM: usize = 1 << MAX_QUBITS;

/// A normalized state vector of 1 to 3 qubits.
///
/// Amplitudes live inline; slots past `dim()` are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: [Complex64; MAX_DIM],
}

impl PureState {
    /// Validates length, finiteness and normalization.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_slice(&amplitudes)
    }

    /// Slice form of [`PureState::new`].
    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sq = norm_sqr(amplitudes);
        if (norm_sq - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self::from_parts_unchecked(num_qubits, amplitudes))
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::normalized_slice(&amplitudes)
    }

    /// Slice form of [`PureState::normalized`].
    pub fn normalized_slice(amplitudes: &[Complex64]) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = norm_sqr(amplitudes).sqrt();
        if norm < 1e-150 {
            return Err(Error::Degenerate(norm));
        }
        let mut out = Self::from_parts_unchecked(num_qubits, amplitudes);
        for a in out.amps.iter_mut() {
            *a /= norm;
        }
        Ok(out)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() > MAX_DIM {
            return Err(Error::BadLength(amplitudes.len()));
        }
        let mut buf = [ZERO; MAX_DIM];
        for (b, &r) in buf.iter_mut().zip(amplitudes) {
            *b = Complex64::new(r, 0.0);
        }
        Self::from_slice(&buf[..amplitudes.len()])
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(num_qubits));
        }
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(Error::Index { index, num_qubits });
        }
        let mut amps = [ZERO; MAX_DIM];
        amps[index] = ONE;
        Ok(PureState { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps[..self.dim()]
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes()[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(self.amplitudes())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest per-amplitude distance, phase-sensitive.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Copies `amplitudes` (length `2^num_qubits`) without validation.
    pub(crate) fn from_parts_unchecked(num_qubits: usize, amplitudes: &[Complex64]) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        let mut amps = [ZERO; MAX_DIM];
        amps[..amplitudes.len()].copy_from_slice(amplitudes);
        PureState { num_qubits, amps }
    }
}

/// Serialized as a list of `[re, im]` pairs.
impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for a in self.amplitudes() {
            seq.serialize_element(&[a.re, a.im])?;
        }
        seq.end()
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    match len {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        n => Err(Error::BadLength(n)),
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Bit mask selecting `qubit` inside an `n`-qubit basis index.
#[inline]
pub(crate) fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// The +1 or -1 eigenstate of the spin component along `axis`.
///
/// With `axis = (sin t cos p, sin t sin p, cos t)`:
/// `plus = (cos t/2, e^{ip} sin t/2)`, `minus = (-e^{-ip} sin t/2, cos t/2)`.
/// This phase choice makes `|+>|-> - |->|+>` equal the z-basis singlet
/// amplitude for amplitude along every axis.
pub fn axis_state(axis: &UnitAxis, sign: Sign) -> PureState {
    let (theta, phi) = axis.polar();
    let (s, c) = (0.5 * theta).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let amplitudes = match sign {
        Sign::Plus => [Complex64::new(c, 0.0), e * s],
        Sign::Minus => [-e.conj() * s, Complex64::new(c, 0.0)],
    };
    PureState::from_parts_unchecked(1, &amplitudes)
}

/// Kronecker product; `a` occupies the more significant qubits.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let n = a.num_qubits + b.num_qubits;
    if n > MAX_QUBITS {
        return Err(Error::Capacity(n));
    }
    let mut amps = [ZERO; MAX_DIM];
    let db = b.dim();
    for (i, x) in a.amplitudes().iter().enumerate() {
        for (j, y) in b.amplitudes().iter().enumerate() {
            amps[i * db + j] = x * y;
        }
    }
    Ok(PureState { num_qubits: n, amps })
}

/// A 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate(pub [[Complex64; 2]; 2]);

impl Gate {
    pub const IDENTITY: Gate = Gate([[ONE, ZERO], [ZERO, ONE]]);
    pub const X: Gate = Gate([[ZERO, ONE], [ONE, ZERO]]);
    pub const Y: Gate = Gate([
        [ZERO, Complex64::new(0.0, -1.0)],
        [Complex64::new(0.0, 1.0), ZERO],
    ]);
    pub const Z: Gate = Gate([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);
    pub const H: Gate = Gate([
        [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
        [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
    ]);

    /// `self * rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Gate) -> Gate {
        let (a, b) = (&self.0, &rhs.0);
        Gate(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
        }))
    }

    pub fn adjoint(&self) -> Gate {
        let m = &self.0;
        Gate([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Largest entry of `|U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().then_after(self);
        let mut worst: f64 = 0.0;
        for (i, row) in p.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// Applies `gate` to qubit `target`, leaving the rest untouched.
pub fn apply_one_qubit(gate: &Gate, target: usize, state: &PureState) -> Result<PureState> {
    let defect = gate.unitarity_defect();
    if defect.is_nan() || defect > EXACT_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let n = state.num_qubits;
    if target >= n {
        return Err(Error::Index {
            index: target,
            num_qubits: n,
        });
    }
    let mask = qubit_mask(target, n);
    let m = &gate.0;
    let mut out = state.clone();
    for i0 in (0..state.dim()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (a0, a1) = (state.amps[i0], state.amps[i1]);
        out.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
        out.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
    Ok(out)
}

/// `|<a|b>|^2`, clamped into `[0, 1]`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Hermitian, unit-trace, positive semidefinite operator on 1 or 2 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Row-major `entries`; every invariant is checked.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDensity(format!("unsupported dimension {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::Dimension {
                left: entries.len(),
                right: dim * dim,
            });
        }
        let rho = DensityMatrix { dim, entries };
        rho.validate()?;
        Ok(rho)
    }

    /// `|psi><psi|` for a 1- or 2-qubit state.
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        let dim = psi.dim();
        if dim > 4 {
            return Err(Error::InvalidDensity(format!("unsupported dimension {dim}")));
        }
        let a = psi.amplitudes();
        let entries = (0..dim * dim)
            .map(|k| a[k / dim] * a[k % dim].conj())
            .collect();
        Ok(DensityMatrix { dim, entries })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let entries = (0..dim * dim)
            .map(|k| {
                if k / dim == k % dim {
                    Complex64::new(1.0 / dim as f64, 0.0)
                } else {
                    ZERO
                }
            })
            .collect();
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|k| (self.entry(k / d, k % d) - self.entry(k % d, k / d).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let m = DMatrix::<Complex<f64>>::from_fn(d, d, |i, j| {
            (self.entry(i, j) + self.entry(j, i).conj()) * 0.5
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let h = self.hermiticity_defect();
        if h > EXACT_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({h:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > EXACT_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min_ev = self.eigenvalues()[0];
        if min_ev < -PSD_SLACK {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        DensityMatrix { dim, entries }
    }
}

/// Reduced state of qubit `keep`.
pub fn partial_trace(state: &PureState, keep: usize) -> Result<DensityMatrix> {
    let n = state.num_qubits;
    if n < 2 {
        return Err(Error::validation(
            "state",
            "partial trace needs at least two qubits",
        ));
    }
    if keep >= n {
        return Err(Error::Index {
            index: keep,
            num_qubits: n,
        });
    }
    let mask = qubit_mask(keep, n);
    let a = state.amplitudes();
    let mut rho = [ZERO; 4];
    for i in (0..state.dim()).filter(|i| i & mask == 0) {
        let pair = [a[i], a[i | mask]];
        for r in 0..2 {
            for c in 0..2 {
                rho[2 * r + c] += pair[r] * pair[c].conj();
            }
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(2, rho.to_vec()))
}

/// `(tr(rho X), tr(rho Y), tr(rho Z))`.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim != 2 {
        return Err(Error::Dimension {
            left: rho.dim,
            right: 2,
        });
    }
    let r01 = rho.entry(0, 1);
    Ok([
        2.0 * r01.re,
        -2.0 * r01.im,
        (rho.entry(0, 0) - rho.entry(1, 1)).re,
    ])
}

/// Projective spin measurement of one qubit along `axis`.
///
/// Returns the sampled sign, its exact probability, and the collapsed state.
pub fn measure_along<R: Rng + ?Sized>(
    state: &PureState,
    qubit: usize,
    axis: &UnitAxis,
    rng: &mut R,
) -> Result<(Sign, f64, PureState)> {
    let n = state.num_qubits;
    if qubit >= n {
        return Err(Error::Index {
            index: qubit,
            num_qubits: n,
        });
    }
    let dim = state.dim();
    let project = |sign: Sign| -> [Complex64; MAX_DIM] {
        let e = axis_state(axis, sign);
        let (e0, e1) = (e.amps[0], e.amps[1]);
        let mask = qubit_mask(qubit, n);
        let mut out = [ZERO; MAX_DIM];
        for i0 in (0..dim).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let c = e0.conj() * state.amps[i0] + e1.conj() * state.amps[i1];
            out[i0] = e0 * c;
            out[i1] = e1 * c;
        }
        out
    };
    let plus = project(Sign::Plus);
    let p_plus = norm_sqr(&plus).clamp(0.0, 1.0);
    let u: f64 = rng.random();
    let (sign, branch, p) = if u < p_plus {
        (Sign::Plus, plus, p_plus)
    } else {
        (Sign::Minus, project(Sign::Minus), 1.0 - p_plus)
    };
    Ok((sign, p, PureState::normalized_slice(&branch[..dim])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(state: &PureState, expected: &[Complex64]) {
        assert_eq!(state.dim(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < EXACT_TOL, "{:?} != {:?}", state, expected);
        }
    }

    #[test]
    fn axis_state_z_eigenstates() {
        assert_amps(&axis_state(&UnitAxis::Z, Sign::Plus), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_amps(&axis_state(&UnitAxis::Z, Sign::Minus), &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn axis_state_x_plus_matches_hand_diagonalization() {
        // sigma_x = [[0,1],[1,0]]: +1 eigenvector is (1,1)/sqrt2
        assert_amps(&axis_state(&UnitAxis::X, Sign::Plus), &[c(H, 0.0), c(H, 0.0)]);
    }

    #[test]
    fn axis_state_is_eigenvector_of_spin_component() {
        let axis = UnitAxis::from_polar(1.1, -2.3);
        let [x, y, z] = axis.to_array();
        for sign in [Sign::Plus, Sign::Minus] {
            let v = axis_state(&axis, sign);
            let (a, b) = (v.amplitude(0), v.amplitude(1));
            // (n . sigma) v
            let top = a * z + b * c(x, -y);
            let bottom = a * c(x, y) - b * z;
            let s = sign.value() as f64;
            assert!((top - a * s).norm() < 1e-12);
            assert!((bottom - b * s).norm() < 1e-12);
        }
    }

    #[test]
    fn non_unit_axis_rejected() {
        assert!(matches!(UnitAxis::new(0.0, 0.0, 2.0), Err(Error::NonUnitAxis { .. })));
        assert!(UnitAxis::new(0.6, 0.8, 0.0).is_ok());
        assert!(UnitAxis::normalize(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tensor_examples() {
        let zero = PureState::basis(1, 0).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let plus = PureState::from_real(&[H, H]).unwrap();
        assert_amps(&tensor(&zero, &zero).unwrap(), &[ONE, ZERO, ZERO, ZERO]);
        assert_amps(&tensor(&zero, &one).unwrap(), &[ZERO, ONE, ZERO, ZERO]);
        assert_amps(
            &tensor(&plus, &zero).unwrap(),
            &[c(H, 0.0), ZERO, c(H, 0.0), ZERO],
        );
    }

    #[test]
    fn tensor_over_capacity() {
        let two = PureState::basis(2, 0).unwrap();
        assert_eq!(tensor(&two, &two), Err(Error::Capacity(4)));
    }

    #[test]
    fn apply_gate_examples() {
        let zero = PureState::basis(1, 0).unwrap();
        assert_eq!(apply_one_qubit(&Gate::IDENTITY, 0, &zero).unwrap(), zero);
        assert_amps(&apply_one_qubit(&Gate::X, 0, &zero).unwrap(), &[ZERO, ONE]);
        let s01 = PureState::basis(2, 1).unwrap();
        assert_amps(
            &apply_one_qubit(&Gate::Z, 1, &s01).unwrap(),
            &[ZERO, c(-1.0, 0.0), ZERO, ZERO],
        );
        // Z on qubit 0 sees |0> there and does nothing
        assert_eq!(apply_one_qubit(&Gate::Z, 0, &s01).unwrap(), s01);
    }

    #[test]
    fn apply_gate_errors() {
        let zero = PureState::basis(1, 0).unwrap();
        let bad = Gate([[ONE, ONE], [ZERO, ONE]]);
        assert!(matches!(apply_one_qubit(&bad, 0, &zero), Err(Error::NotUnitary(_))));
        assert!(matches!(apply_one_qubit(&Gate::X, 1, &zero), Err(Error::Index { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::basis(1, 0).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let plus = PureState::from_real(&[H, H]).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < EXACT_TOL);
        assert!(fidelity(&zero, &one).unwrap().abs() < EXACT_TOL);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < EXACT_TOL);
        let two = PureState::basis(2, 0).unwrap();
        assert!(matches!(fidelity(&zero, &two), Err(Error::Dimension { .. })));
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let v = axis_state(&UnitAxis::from_polar(0.3, 0.9), Sign::Plus);
        let rotated = PureState::new(
            v.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, 2.1)).collect(),
        )
        .unwrap();
        assert!((fidelity(&v, &rotated).unwrap() - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn partial_trace_examples() {
        let product = PureState::basis(2, 0).unwrap();
        let ket0 = DensityMatrix::from_pure(&PureState::basis(1, 0).unwrap()).unwrap();
        for keep in 0..2 {
            assert!(partial_trace(&product, keep).unwrap().max_abs_diff(&ket0) < EXACT_TOL);
        }
        let singlet = PureState::from_real(&[0.0, H, -H, 0.0]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        for keep in 0..2 {
            assert!(partial_trace(&singlet, keep).unwrap().max_abs_diff(&mixed) < EXACT_TOL);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let one = PureState::basis(1, 0).unwrap();
        assert!(partial_trace(&one, 0).is_err());
        let three = PureState::basis(3, 5).unwrap();
        assert!(matches!(partial_trace(&three, 3), Err(Error::Index { .. })));
        // |101>: middle qubit is |0>
        let ket0 = DensityMatrix::from_pure(&PureState::basis(1, 0).unwrap()).unwrap();
        assert!(partial_trace(&three, 1).unwrap().max_abs_diff(&ket0) < EXACT_TOL);
    }

    #[test]
    fn bloch_examples() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(bloch_vector(&mixed).unwrap(), [0.0, 0.0, 0.0]);
        let ket0 = DensityMatrix::from_pure(&PureState::basis(1, 0).unwrap()).unwrap();
        assert_eq!(bloch_vector(&ket0).unwrap(), [0.0, 0.0, 1.0]);
        let xplus = DensityMatrix::from_pure(&axis_state(&UnitAxis::X, Sign::Plus)).unwrap();
        let b = bloch_vector(&xplus).unwrap();
        assert!((b[0] - 1.0).abs() < EXACT_TOL && b[1].abs() < EXACT_TOL && b[2].abs() < EXACT_TOL);
        let big = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(matches!(bloch_vector(&big), Err(Error::Dimension { .. })));
    }

    #[test]
    fn bloch_vector_recovers_axis() {
        let axis = UnitAxis::from_polar(2.0, 0.7);
        let rho = DensityMatrix::from_pure(&axis_state(&axis, Sign::Minus)).unwrap();
        let b = bloch_vector(&rho).unwrap();
        for (bi, ai) in b.iter().zip(axis.to_array()) {
            assert!((bi + ai).abs() < 1e-12);
        }
    }

    #[test]
    fn density_validation() {
        let not_hermitian = vec![c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        assert!(DensityMatrix::new(2, not_hermitian).is_err());
        let bad_trace = vec![c(0.7, 0.0), ZERO, ZERO, c(0.7, 0.0)];
        assert!(DensityMatrix::new(2, bad_trace).is_err());
        let negative = vec![c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)];
        assert!(DensityMatrix::new(2, negative).is_err());
        let singlet = PureState::from_real(&[0.0, H, -H, 0.0]).unwrap();
        DensityMatrix::from_pure(&singlet).unwrap().validate().unwrap();
    }

    #[test]
    fn state_construction_errors() {
        assert!(matches!(PureState::from_real(&[1.0, 0.0, 0.0]), Err(Error::BadLength(3))));
        assert!(matches!(PureState::from_real(&[1.0, 1.0]), Err(Error::NotNormalized { .. })));
        assert!(matches!(PureState::from_real(&[f64::NAN, 0.0]), Err(Error::NonFinite)));
        assert!(matches!(
            PureState::normalized(vec![ZERO, ZERO]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rotation_preserves_angles() {
        let about = UnitAxis::from_polar(0.4, 1.2);
        let a = UnitAxis::from_polar(1.0, 0.1);
        let b = UnitAxis::from_polar(2.2, -1.9);
        let (ra, rb) = (a.rotated(&about, 0.77), b.rotated(&about, 0.77));
        assert!((a.dot(&b) - ra.dot(&rb)).abs() < 1e-12);
        let z = UnitAxis::Z.rotated(&UnitAxis::Y, PI / 2.0);
        assert!((z.x() - 1.0).abs() < 1e-12);
    }
}
