//! Seeded random parameter and frequency points for the property suites.

use num_complex::Complex64;
use rand::Rng;

use crate::params::{Deformation, ShockParameters};

/// Sampling box: `F` entries uniform in `[-f_bound, f_bound]`, `M` uniform in
/// the open interval `(M1, M*)`, `R` uniform in `ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub f_bound: f64,
    pub ratio: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            f_bound: 2.0,
            ratio: (0.0, 5.0),
        }
    }
}

pub fn random_deformation<R: Rng>(rng: &mut R, bound: f64) -> Deformation {
    let mut g = || {
        if bound > 0.0 {
            rng.gen_range(-bound..=bound)
        } else {
            0.0
        }
    };
    Deformation::new(g(), g(), g(), g())
}

/// A point satisfying the downstream Lax inequalities strictly.
pub fn random_admissible<R: Rng>(rng: &mut R, b: &SampleBox) -> ShockParameters {
    loop {
        let f = random_deformation(rng, b.f_bound);
        let m1 = (f.f11 * f.f11 + f.f12 * f.f12).sqrt();
        let ms = (1.0 + m1 * m1).sqrt();
        let m = rng.gen_range(m1..ms);
        let r = rng.gen_range(b.ratio.0..b.ratio.1);
        if !(m > m1 && m < ms && r > 0.0) {
            continue;
        }
        if let Ok(p) = ShockParameters::new(m, r, f) {
            return p;
        }
    }
}

/// `(s, omega)` with `Re s` log-uniform in `eta`, `Im s` uniform in
/// `[-xi, xi]` and `omega` of random sign with modulus in `[0.2, 2]`.
pub fn random_frequency<R: Rng>(rng: &mut R, eta: (f64, f64), xi: f64) -> (Complex64, f64) {
    let re = (rng.gen_range(eta.0.ln()..eta.1.ln())).exp();
    let im = rng.gen_range(-xi..=xi);
    let omega = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    (Complex64::new(re, im), omega)
}
