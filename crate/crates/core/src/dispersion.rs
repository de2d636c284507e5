//! Normal-mode exponents: the dispersion relation
//! `det(s A0 + lambda A1 + i omega A2) = 0` and its decaying root.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DerivedQuantities;
use crate::poly::Poly;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A Laplace-Fourier point with a chosen exponent `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub s: Complex64,
    pub omega: f64,
    pub lambda: Complex64,
    /// `s + lambda`
    pub big_omega: Complex64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
}

impl FrequencyPoint {
    pub fn new(d: &DerivedQuantities, s: Complex64, omega: f64, lambda: Complex64) -> Self {
        let (sigma1, sigma2) = sigmas(d, omega, lambda);
        Self {
            s,
            omega,
            lambda,
            big_omega: s + lambda,
            sigma1,
            sigma2,
        }
    }
}

fn sigmas(d: &DerivedQuantities, omega: f64, lambda: Complex64) -> (Complex64, Complex64) {
    let f = d.deformation;
    (
        f.f11 * lambda + I * (omega * f.f21),
        f.f12 * lambda + I * (omega * f.f22),
    )
}

/// `M^2 Omega^2 - sigma1^2 - sigma2^2 - lambda^2 + omega^2`.
pub fn dispersion_residual(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> Complex64 {
    let m_sq = d.mach * d.mach;
    let big = s + lambda;
    let (s1, s2) = sigmas(d, omega, lambda);
    m_sq * big * big - s1 * s1 - s2 * s2 - lambda * lambda + omega * omega
}

/// The same quantity written as `M^2 Omega^2 - M*^2 lambda^2 + K2 omega^2 - 2 i l0 lambda omega`.
pub fn dispersion_residual_expanded(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> Complex64 {
    let m_sq = d.mach * d.mach;
    let big = s + lambda;
    m_sq * big * big - d.mach_star_sq() * lambda * lambda + d.k2 * omega * omega
        - 2.0 * I * (d.ell0 * omega) * lambda
}

/// `Omega^3 (M^2 Omega^2 - sigma1^2 - sigma2^2)(M^2 Omega^2 - sigma1^2 - sigma2^2 - lambda^2 + omega^2)`
/// as a degree-7 polynomial in `lambda`.
pub fn dispersion_polynomial(d: &DerivedQuantities, s: Complex64, omega: f64) -> Poly {
    let f = d.deformation;
    let one = Complex64::new(1.0, 0.0);
    let m_sq = Complex64::from(d.mach * d.mach);
    let big = Poly::linear(s, one);
    let sigma1 = Poly::linear(I * (omega * f.f21), f.f11.into());
    let sigma2 = Poly::linear(I * (omega * f.f22), f.f12.into());
    let acoustic = big
        .mul(&big)
        .scale(m_sq)
        .add(&sigma1.mul(&sigma1).scale(-one))
        .add(&sigma2.mul(&sigma2).scale(-one));
    let last = acoustic.add(&Poly::new(vec![(omega * omega).into(), 0.0.into(), -one]));
    big.pow(3).mul(&acoustic).mul(&last)
}

/// All seven exponents with multiplicity.
///
/// `omega = 0` uses the exact factorization; otherwise the roots come from the
/// expanded polynomial via its companion matrix.
pub fn full_dispersion_roots(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
) -> Result<Vec<Complex64>> {
    if s == Complex64::new(0.0, 0.0) && omega == 0.0 {
        return Err(Error::InvalidParameters(
            "dispersion roots need s != 0 or omega != 0".into(),
        ));
    }
    if omega == 0.0 {
        let m = d.mach;
        let ms = m * s;
        let mut roots = vec![-s; 3];
        for speed in [d.m1, -d.m1, d.mach_star, -d.mach_star] {
            let denom = speed - m;
            if denom == 0.0 {
                return Err(Error::DegeneratePolynomial {
                    leading: 0.0,
                    norm: 1.0,
                });
            }
            roots.push(ms / denom);
        }
        return Ok(roots);
    }
    dispersion_polynomial(d, s, omega).roots()
}

/// Both roots of the last dispersion factor, labelled by the decay property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HershRoot {
    pub plus: Complex64,
    pub minus: Complex64,
    /// The two roots coincide (vanishing discriminant) at `Re s = 0`.
    pub glancing: bool,
    /// Richardson value of `lim_{eta -> 0+}`, present when `Re s = 0`.
    pub extrapolated: Option<Complex64>,
}

/// Closed-form pair `(M^2 s - i l0 omega +- sqrt(disc)) / beta^2`, principal branch.
///
/// With `omega` replaced by `sgn(l0) omega` this is the `|l0|` form; both
/// describe the same roots, so no explicit back-map is needed.
pub fn closed_form_pair(d: &DerivedQuantities, s: Complex64, omega: f64) -> (Complex64, Complex64) {
    let m_sq = d.mach * d.mach;
    let lw = d.ell0 * omega;
    let disc = m_sq * d.mach_star_sq() * s * s - 2.0 * I * (lw * m_sq) * s
        + (d.k2 * d.beta_sq() - d.ell0 * d.ell0) * omega * omega;
    let root = disc.sqrt();
    let base = m_sq * s - I * lw;
    let b2 = d.beta_sq();
    ((base + root) / b2, (base - root) / b2)
}

fn frequency_scale(s: Complex64, omega: f64) -> f64 {
    s.norm() + omega.abs()
}

pub fn hersh_roots(d: &DerivedQuantities, s: Complex64, omega: f64) -> Result<HershRoot> {
    let scale = frequency_scale(s, omega);
    if scale == 0.0 {
        return Err(Error::InvalidParameters(
            "s and omega cannot both vanish".into(),
        ));
    }
    let tol = 1e-12 * scale;
    if s.re > tol {
        let (a, b) = closed_form_pair(d, s, omega);
        if a.re.abs() < tol && b.re.abs() < tol {
            return Err(Error::BranchAmbiguity { s, omega, tol });
        }
        let (plus, minus) = if a.re >= b.re { (a, b) } else { (b, a) };
        return Ok(HershRoot {
            plus,
            minus,
            glancing: false,
            extrapolated: None,
        });
    }
    if s.re < -tol {
        return Err(Error::InvalidParameters(format!(
            "Re s = {} must be non-negative",
            s.re
        )));
    }
    boundary_limit(d, Complex64::new(0.0, s.im), omega, scale)
}

/// `Re s = 0`: the decaying root is defined as the limit from `Re s > 0`.
fn boundary_limit(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    scale: f64,
) -> Result<HershRoot> {
    let h = 1e-6 * scale;
    let coarse = hersh_roots(d, s + h, omega)?.plus;
    let fine = hersh_roots(d, s + 0.5 * h, omega)?.plus;
    let extrapolated = 2.0 * fine - coarse;

    let (a, b) = closed_form_pair(d, s, omega);
    let glancing = (a - b).norm() <= 1e-7 * scale;
    let (plus, minus) = if (a - extrapolated).norm() <= (b - extrapolated).norm() {
        (a, b)
    } else {
        (b, a)
    };
    Ok(HershRoot {
        plus,
        minus,
        glancing,
        extrapolated: Some(extrapolated),
    })
}

/// The unique decaying exponent `lambda^+(s, omega)`.
pub fn lambda_plus(d: &DerivedQuantities, s: Complex64, omega: f64) -> Result<Complex64> {
    hersh_roots(d, s, omega).map(|h| h.plus)
}

/// Imaginary parts `delta^+-` of the exponents at `s = i xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImaginaryBranches {
    Real {
        plus: f64,
        minus: f64,
    },
    /// Negative radicand: `xi` lies strictly between the transition points.
    NoRealBranch,
}

/// Radicand `M^2 M*^2 xi^2 - 2 l0 M^2 xi omega + (l0^2 - K2 beta^2) omega^2`.
pub fn delta_radicand(d: &DerivedQuantities, xi: f64, omega: f64) -> f64 {
    let m_sq = d.mach * d.mach;
    m_sq * d.mach_star_sq() * xi * xi - 2.0 * d.ell0 * m_sq * xi * omega
        + (d.ell0 * d.ell0 - d.k2 * d.beta_sq()) * omega * omega
}

/// `delta^+-(xi, omega)`. For the `|l0|`-reduced system with unit Fourier
/// variable pass `omega = d.omega_sign()`.
pub fn delta_pm(d: &DerivedQuantities, xi: f64, omega: f64) -> ImaginaryBranches {
    let q = delta_radicand(d, xi, omega);
    if q < 0.0 {
        return ImaginaryBranches::NoRealBranch;
    }
    let base = d.mach * d.mach * xi - d.ell0 * omega;
    let root = q.sqrt();
    let b2 = d.beta_sq();
    ImaginaryBranches::Real {
        plus: (base + root) / b2,
        minus: (base - root) / b2,
    }
}
