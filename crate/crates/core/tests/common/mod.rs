//! Independent reference computations used by the integration suites.
//!
//! Nothing here calls into the crate's estimators; each oracle is plain
//! quadrature or hand algebra.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule on `[lo, hi]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Mean of `sin^2(a/2)` over a cone of half-angle `eps`, weighted by solid
/// angle `sin a da`.
pub fn cone_mean_infidelity(eps: f64) -> f64 {
    let num = simpson(|a| (0.5 * a).sin().powi(2) * a.sin(), 0.0, eps, 2000);
    let den = simpson(|a| a.sin(), 0.0, eps, 2000);
    num / den
}

/// Solid-angle fraction of a cone, by quadrature.
pub fn cone_fraction(eps: f64) -> f64 {
    simpson(|a| a.sin(), 0.0, eps, 2000) / 2.0
}

/// Average of `f(direction)` over the unit sphere by a tensor Simpson rule in
/// `(cos theta, phi)`. Discontinuous integrands need a fine grid.
pub fn sphere_average<F: Fn([f64; 3]) -> f64>(f: F, n_z: usize, n_phi: usize) -> f64 {
    let inner = |z: f64| {
        let rho = (1.0 - z * z).max(0.0).sqrt();
        simpson(
            |phi| f([rho * phi.cos(), rho * phi.sin(), z]),
            0.0,
            2.0 * PI,
            n_phi,
        )
    };
    simpson(inner, -1.0, 1.0, n_z) / (4.0 * PI)
}

pub fn planar(theta: f64) -> [f64; 3] {
    [theta.sin(), 0.0, theta.cos()]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `E(a,b)` for local hidden axes with the Malus rule, as a sphere average
/// of `(a.P)(-(b.P))`.
pub fn malus_correlation_oracle(a: [f64; 3], b: [f64; 3]) -> f64 {
    sphere_average(|p| -dot(a, p) * dot(b, p), 64, 64)
}

/// `E(a,b)` for the deterministic sign rule: `-<sgn(a.P) sgn(b.P)>` over the
/// sphere, counted on a fine grid.
pub fn deterministic_correlation_oracle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let sgn = |x: f64| if x >= 0.0 { 1.0 } else { -1.0 };
    // midpoint rule in (z, phi) is exact in measure for this indicator up to
    // the grid resolution
    let (nz, np) = (1200usize, 1200usize);
    let mut acc = 0.0;
    for i in 0..nz {
        let z = -1.0 + (i as f64 + 0.5) * 2.0 / nz as f64;
        let rho = (1.0 - z * z).sqrt();
        for j in 0..np {
            let phi = (j as f64 + 0.5) * 2.0 * PI / np as f64;
            let p = [rho * phi.cos(), rho * phi.sin(), z];
            acc += sgn(dot(a, p)) * sgn(dot(b, p));
        }
    }
    -acc / (nz * np) as f64
}

/// Four-sigma band for a mean of `n` products bounded by 1.
pub fn four_over_sqrt(n: u64) -> f64 {
    4.0 / (n as f64).sqrt()
}
