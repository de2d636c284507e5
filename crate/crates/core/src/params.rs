//! Unperturbed shock state and the scalar combinations derived from it.
//!
//! Everything downstream (matrices, dispersion roots, the Lopatinski
//! determinant, classification) is expressed through [`DerivedQuantities`],
//! which carries a copy of the inputs so callers only pass one value around.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaled deformation gradient behind the shock, `F_ij = F^+_ij / c^+`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Deformation {
    pub f11: f64,
    pub f12: f64,
    pub f21: f64,
    pub f22: f64,
}

impl Deformation {
    pub const ZERO: Self = Self {
        f11: 0.0,
        f12: 0.0,
        f21: 0.0,
        f22: 0.0,
    };

    pub fn new(f11: f64, f12: f64, f21: f64, f22: f64) -> Self {
        Self { f11, f12, f21, f22 }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn det(&self) -> f64 {
        self.f11 * self.f22 - self.f12 * self.f21
    }

    /// `F : F`, the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.f11 * self.f11 + self.f12 * self.f12 + self.f21 * self.f21 + self.f22 * self.f22
    }

    /// Off-diagonal entry of the Cauchy-Green tensor `F F^T`.
    pub fn ell0(&self) -> f64 {
        self.f11 * self.f21 + self.f12 * self.f22
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.f11, self.f12, self.f21, self.f22]
    }

    fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

/// Downstream Mach number `M`, density ratio `R = rho^+ / rho^-`, deformation
/// gradient and the optional upstream Mach number `M_-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockParameters {
    pub mach: f64,
    pub ratio: f64,
    pub deformation: Deformation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mach_upstream: Option<f64>,
}

impl ShockParameters {
    pub fn new(mach: f64, ratio: f64, deformation: Deformation) -> Result<Self> {
        let p = Self {
            mach,
            ratio,
            deformation,
            mach_upstream: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_upstream(mut self, mach_upstream: f64) -> Result<Self> {
        self.mach_upstream = Some(mach_upstream);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mach.is_finite() && self.mach > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "M must be finite and positive, got {}",
                self.mach
            )));
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "R must be finite and positive, got {}",
                self.ratio
            )));
        }
        if !self.deformation.is_finite() {
            return Err(Error::InvalidParameters(
                "deformation gradient has non-finite entries".into(),
            ));
        }
        if let Some(m) = self.mach_upstream {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "M_- must be finite and positive, got {m}"
                )));
            }
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedQuantities> {
        derive(self)
    }
}

/// All scalar combinations of `(M, R, F)` used by the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub mach: f64,
    pub ratio: f64,
    pub deformation: Deformation,
    pub m1: f64,
    pub m2: f64,
    pub mach_star: f64,
    pub beta: f64,
    pub ell0: f64,
    pub sigma: f64,
    pub d0: f64,
    pub a0: f64,
    /// Elastic Mach number `sqrt(M^2 - M1^2)`; NaN when `M < M1`.
    pub mach_tilde: f64,
    /// `(M sigma - |l0| beta)^2 - M*^4 Mtilde^2`, written in factored form.
    pub d: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub det_f: f64,
}

impl DerivedQuantities {
    pub fn mach_star_sq(&self) -> f64 {
        self.mach_star * self.mach_star
    }

    pub fn beta_sq(&self) -> f64 {
        self.beta * self.beta
    }

    pub fn abs_ell0(&self) -> f64 {
        self.ell0.abs()
    }

    /// `sgn(l0)` with `sgn(0) = 1`: the Fourier variable at which a root of the
    /// `|l0|`-reduced system with `omega = 1` sits in the original variables.
    pub fn omega_sign(&self) -> f64 {
        if self.ell0 < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// `K1 + K2 - K`. Positive means uniformly stable.
    pub fn margin(&self) -> f64 {
        (self.k1 + self.k2) - self.k
    }

    /// Second expression for sigma, `sqrt(M*^2 (1 + M2^2) - l0^2)`.
    pub fn sigma_alt(&self) -> f64 {
        (self.mach_star_sq() * (1.0 + self.m2 * self.m2) - self.ell0 * self.ell0).sqrt()
    }

    pub fn lax_downstream(&self) -> bool {
        self.m1 < self.mach && self.mach < self.mach_star
    }

    pub fn params(&self) -> ShockParameters {
        ShockParameters {
            mach: self.mach,
            ratio: self.ratio,
            deformation: self.deformation,
            mach_upstream: None,
        }
    }
}

pub fn derive(params: &ShockParameters) -> Result<DerivedQuantities> {
    params.validate()?;
    let f = params.deformation;
    let m = params.mach;
    let r = params.ratio;
    let m_sq = m * m;

    let m1_sq = f.f11 * f.f11 + f.f12 * f.f12;
    let m2_sq = f.f21 * f.f21 + f.f22 * f.f22;
    let mstar_sq = 1.0 + m1_sq;
    let beta_sq = mstar_sq - m_sq;
    let mach_star = mstar_sq.sqrt();
    if beta_sq <= 0.0 {
        return Err(Error::NonHyperbolicPoint { mach: m, mach_star });
    }
    let beta = beta_sq.sqrt();
    let ell0 = f.ell0();
    let det_f = f.det();
    let sigma = (mstar_sq + m2_sq + det_f * det_f).sqrt();
    let mach_tilde = (m_sq - m1_sq).sqrt();
    let abs_l = ell0.abs();
    let minus = m * sigma - abs_l * beta;
    let plus = m * sigma + abs_l * beta;
    let mstar4 = mstar_sq * mstar_sq;

    Ok(DerivedQuantities {
        mach: m,
        ratio: r,
        deformation: f,
        m1: m1_sq.sqrt(),
        m2: m2_sq.sqrt(),
        mach_star,
        beta,
        ell0,
        sigma,
        d0: (mstar_sq + m_sq) / (2.0 * m_sq),
        a0: -beta_sq * r / (2.0 * m_sq),
        mach_tilde,
        d: (minus - mstar_sq * mach_tilde) * (minus + mstar_sq * mach_tilde),
        k: r * (m_sq - m1_sq) + m2_sq,
        k1: minus * minus / mstar4,
        k2: 1.0 + m2_sq,
        k3: plus * plus / mstar4,
        det_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpstreamCheck {
    NotChecked,
    Pass,
    Fail,
}

/// Result of the 1-shock (Lax) inequalities. Failures are data, not errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `M1 < M < M*`, strict.
    pub downstream: bool,
    /// `M - M1`.
    pub margin_lower: f64,
    /// `M* - M`.
    pub margin_upper: f64,
    pub upstream: UpstreamCheck,
    /// `M_- - M / sqrt(M^2 - M1^2)` when `M_-` was supplied.
    pub upstream_margin: Option<f64>,
    /// Strict mode only: whether `det F` lies in the caller's declared range.
    pub det_within_bounds: Option<bool>,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.downstream
            && self.upstream != UpstreamCheck::Fail
            && self.det_within_bounds != Some(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaxOptions {
    /// Closed interval of acceptable `det F`, for callers that tie `det F`
    /// to the densities. `None` leaves `det F` unrestricted.
    pub det_bounds: Option<(f64, f64)>,
}

pub fn check_lax(params: &ShockParameters) -> AdmissibilityReport {
    check_lax_with(params, &LaxOptions::default())
}

pub fn check_lax_with(params: &ShockParameters, opts: &LaxOptions) -> AdmissibilityReport {
    let f = params.deformation;
    let m = params.mach;
    let m1_sq = f.f11 * f.f11 + f.f12 * f.f12;
    let m1 = m1_sq.sqrt();
    let mach_star = (1.0 + m1_sq).sqrt();

    let (upstream, upstream_margin) = match params.mach_upstream {
        None => (UpstreamCheck::NotChecked, None),
        Some(m_minus) => {
            let tilde_sq = m * m - m1_sq;
            if tilde_sq <= 0.0 {
                (UpstreamCheck::Fail, Some(f64::NEG_INFINITY))
            } else {
                let margin = m_minus - m / tilde_sq.sqrt();
                let verdict = if margin > 0.0 {
                    UpstreamCheck::Pass
                } else {
                    UpstreamCheck::Fail
                };
                (verdict, Some(margin))
            }
        }
    };

    let det_within_bounds = opts.det_bounds.map(|(lo, hi)| {
        let det = f.det();
        lo <= det && det <= hi
    });

    AdmissibilityReport {
        downstream: m1 < m && m < mach_star,
        margin_lower: m - m1,
        margin_upper: mach_star - m,
        upstream,
        upstream_margin,
        det_within_bounds,
    }
}
