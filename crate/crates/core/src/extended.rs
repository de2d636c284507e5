//! Double-double re-evaluation of the stability conditions near the threshold,
//! where the three equivalent forms differ by rearrangements with cancellation.

use serde::Serialize;
use twofloat::TwoFloat;

use crate::params::ShockParameters;

/// Signed distances to the threshold, positive on the uniformly stable side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedMargins {
    /// `K1 + K2 - K`
    pub margin: TwoFloat,
    /// Left minus right side of the quartic-in-`F` condition.
    pub quartic: TwoFloat,
    /// `1 + D / M*^4 - Mtilde^2 (R - 1)`
    pub elastic_mach: TwoFloat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionSigns {
    pub quartic: bool,
    pub elastic_mach: bool,
    pub k_form: bool,
}

impl ExtendedMargins {
    pub fn signs(&self) -> ConditionSigns {
        let zero = TwoFloat::from(0.0);
        ConditionSigns {
            quartic: self.quartic > zero,
            elastic_mach: self.elastic_mach > zero,
            k_form: self.margin > zero,
        }
    }
}

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// Quotient with one correction step; the crate's own division is only
/// accurate to about one double ulp.
fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b;
    q + (a - q * b) / b
}

/// Requires `M < M*` (callers check admissibility first).
pub fn extended_margins(p: &ShockParameters) -> ExtendedMargins {
    let f = p.deformation;
    let (f11, f12, f21, f22) = (tf(f.f11), tf(f.f12), tf(f.f21), tf(f.f22));
    let m = tf(p.mach);
    let r = tf(p.ratio);
    let one = tf(1.0);
    let m_sq = m * m;
    let m1_sq = f11 * f11 + f12 * f12;
    let m2_sq = f21 * f21 + f22 * f22;
    let mstar_sq = one + m1_sq;
    let beta_sq = mstar_sq - m_sq;
    let beta = beta_sq.sqrt();
    let ell0 = f11 * f21 + f12 * f22;
    let abs_l = ell0.abs();
    let det = f11 * f22 - f12 * f21;
    let frob = m1_sq + m2_sq;
    let sigma_sq = one + frob + det * det;
    let sigma = sigma_sq.sqrt();
    let mstar4 = mstar_sq * mstar_sq;

    let k = r * (m_sq - m1_sq) + m2_sq;
    let minus = m * sigma - abs_l * beta;
    let k1 = div(minus * minus, mstar4);
    let k2 = one + m2_sq;
    let margin = k1 + k2 - k;

    let lhs = (mstar_sq + m_sq) * sigma_sq - k * mstar4 + ell0 * ell0 * (tf(2.0) * mstar_sq - m_sq);
    let rhs = tf(2.0) * m * abs_l * (beta_sq * sigma_sq).sqrt();
    let quartic = lhs - rhs;

    let tilde_sq = m_sq - m1_sq;
    let tilde = tilde_sq.sqrt();
    let d = (minus - mstar_sq * tilde) * (minus + mstar_sq * tilde);
    let elastic_mach = one + div(d, mstar4) - tilde_sq * (r - one);

    ExtendedMargins {
        margin,
        quartic,
        elastic_mach,
    }
}
