//! Closed-form classification and its cross-check against the numerical roots.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::extended::{extended_margins, ConditionSigns};
use crate::lopatinski::{find_boundary_roots, scan_boundary_axis, RootRecord};
use crate::params::{
    check_lax_with, AdmissibilityReport, DerivedQuantities, LaxOptions, ShockParameters,
};
use crate::scan::{interior_winding, scan_interior_roots, ScanConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    UniformlyStable,
    WeaklyStable,
    ViolentlyUnstable,
    Inadmissible,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::UniformlyStable => "UniformlyStable",
            Verdict::WeaklyStable => "WeaklyStable",
            Verdict::ViolentlyUnstable => "ViolentlyUnstable",
            Verdict::Inadmissible => "Inadmissible",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative band around the threshold inside which the conditions are
/// re-evaluated in double-double arithmetic.
pub const NEAR_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    /// `(K1 + K2) - K`; NaN when the point is not hyperbolic.
    pub margin: f64,
    /// The quartic-in-`F` condition evaluated as written.
    pub condition_usc_prime: bool,
    /// `K < K1 + K2`.
    pub condition_usc_hat: bool,
    /// The elastic-Mach form `Mtilde^2 (R - 1) < 1 + D / M*^4`.
    pub condition_usc1: bool,
    /// Boundary roots found on the imaginary axis.
    pub delta_branch_roots: usize,
    /// Closed form and numerics agree. Always true for closed-form-only results.
    pub agreement: bool,
    pub extended_precision: bool,
    pub admissibility: AdmissibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedQuantities>,
    pub boundary_roots: Vec<RootRecord>,
    pub interior_roots: Vec<RootRecord>,
    /// Roots seen by the independent sign-change scan along the imaginary axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis_roots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
}

impl StabilityVerdict {
    pub fn summary(&self) -> String {
        match &self.derived {
            Some(d) => format!(
                "{} at M={}, R={}, F=[{}, {}; {}, {}]: margin {:e}, {} boundary root(s), {} interior root(s)",
                self.verdict,
                d.mach,
                d.ratio,
                d.deformation.f11,
                d.deformation.f12,
                d.deformation.f21,
                d.deformation.f22,
                self.margin,
                self.delta_branch_roots,
                self.interior_roots.len()
            ),
            None => format!("{}", self.verdict),
        }
    }

    pub fn near_threshold(&self) -> bool {
        match &self.derived {
            Some(d) => self.margin.abs() <= NEAR_THRESHOLD * (d.k1 + d.k2),
            None => false,
        }
    }

    fn inadmissible(report: AdmissibilityReport, derived: Option<DerivedQuantities>) -> Self {
        Self {
            verdict: Verdict::Inadmissible,
            margin: derived.map_or(f64::NAN, |d| d.margin()),
            condition_usc_prime: false,
            condition_usc_hat: false,
            condition_usc1: false,
            delta_branch_roots: 0,
            agreement: true,
            extended_precision: false,
            admissibility: report,
            derived,
            boundary_roots: Vec::new(),
            interior_roots: Vec::new(),
            axis_roots: None,
            winding: None,
        }
    }
}

/// The three equivalent conditions in plain double precision.
pub fn condition_signs(d: &DerivedQuantities) -> ConditionSigns {
    let m_sq = d.mach * d.mach;
    let mstar_sq = d.mach_star_sq();
    let mstar4 = mstar_sq * mstar_sq;
    let sigma_sq = d.sigma * d.sigma;
    let l_sq = d.ell0 * d.ell0;
    let lhs = (mstar_sq + m_sq) * sigma_sq - d.k * mstar4 + l_sq * (2.0 * mstar_sq - m_sq);
    let rhs = 2.0 * d.mach * d.abs_ell0() * (d.beta_sq() * sigma_sq).sqrt();
    let tilde_sq = d.mach_tilde * d.mach_tilde;
    ConditionSigns {
        quartic: lhs > rhs,
        elastic_mach: tilde_sq * (d.ratio - 1.0) < 1.0 + d.d / mstar4,
        k_form: d.k < d.k1 + d.k2,
    }
}

fn closed_form(d: &DerivedQuantities, report: AdmissibilityReport) -> StabilityVerdict {
    let mut signs = condition_signs(d);
    let mut margin = d.margin();
    let near = margin.abs() <= NEAR_THRESHOLD * (d.k1 + d.k2);
    let split = !(signs.quartic == signs.k_form && signs.elastic_mach == signs.k_form);
    let extended = near || split;
    if extended {
        let e = extended_margins(&d.params());
        signs = e.signs();
        margin = e.margin.into();
    }
    StabilityVerdict {
        verdict: if signs.k_form {
            Verdict::UniformlyStable
        } else {
            Verdict::WeaklyStable
        },
        margin,
        condition_usc_prime: signs.quartic,
        condition_usc_hat: signs.k_form,
        condition_usc1: signs.elastic_mach,
        delta_branch_roots: 0,
        agreement: true,
        extended_precision: extended,
        admissibility: report,
        derived: Some(*d),
        boundary_roots: Vec::new(),
        interior_roots: Vec::new(),
        axis_roots: None,
        winding: None,
    }
}

/// Verdict from `K < K1 + K2` (strict), with the other two forms evaluated
/// alongside. Only the downstream Lax inequalities are checked here.
pub fn classify_closed_form(d: &DerivedQuantities) -> StabilityVerdict {
    let report = check_lax_with(&d.params(), &LaxOptions::default());
    if !report.admissible() {
        return StabilityVerdict::inadmissible(report, Some(*d));
    }
    closed_form(d, report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub lax: LaxOptions,
    /// Locate the boundary roots from the closed-form construction.
    pub boundary_roots: bool,
    /// Run the numerical checks (axis scan, interior scan) and require agreement.
    pub numerical: bool,
    pub scan: ScanConfig,
    /// Samples per half-line of the imaginary-axis sign-change scan.
    pub axis_samples: usize,
    pub exec: Execution,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            lax: LaxOptions::default(),
            boundary_roots: true,
            numerical: true,
            scan: ScanConfig::default(),
            axis_samples: 400,
            exec: Execution::default(),
        }
    }
}

impl ClassifyOptions {
    pub fn fast() -> Self {
        Self {
            boundary_roots: false,
            numerical: false,
            ..Self::default()
        }
    }
}

/// Admissibility, closed form and, per `opts`, the numerical paths.
/// A failed agreement check is returned as [`Error::Disagreement`].
pub fn classify(params: &ShockParameters, opts: &ClassifyOptions) -> Result<StabilityVerdict> {
    let report = check_lax_with(params, &opts.lax);
    let derived = params.derive().ok();
    let d = match derived {
        Some(d) if report.admissible() => d,
        _ => return Ok(StabilityVerdict::inadmissible(report, derived)),
    };
    let mut v = closed_form(&d, report);
    if opts.boundary_roots || opts.numerical {
        v.boundary_roots = find_boundary_roots(&d)?;
        v.delta_branch_roots = v.boundary_roots.len();
    }
    if !opts.numerical {
        return Ok(v);
    }

    let axis = scan_boundary_axis(&d, opts.axis_samples)?;
    v.axis_roots = Some(axis.len());
    v.interior_roots = scan_interior_roots(&d, &opts.scan, opts.exec);
    if opts.scan.winding {
        v.winding = interior_winding(&d, &opts.scan);
    }

    let weak = v.verdict == Verdict::WeaklyStable;
    let boundary_ok = v.near_threshold()
        || ((!v.boundary_roots.is_empty()) == weak && (!axis.is_empty()) == weak);
    let interior_ok = v.interior_roots.is_empty() && v.winding.is_none_or(|w| w == 0);
    if !v.interior_roots.is_empty() {
        v.verdict = Verdict::ViolentlyUnstable;
    }
    v.agreement = boundary_ok && interior_ok;
    if v.agreement {
        Ok(v)
    } else {
        Err(Error::Disagreement(Box::new(v)))
    }
}

/// Full classification with default options.
pub fn classify_full(params: &ShockParameters) -> Result<StabilityVerdict> {
    classify(params, &ClassifyOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Deformation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(m: f64, r: f64, f: Deformation) -> ShockParameters {
        ShockParameters::new(m, r, f).unwrap()
    }

    fn closed(m: f64, r: f64, f: Deformation) -> StabilityVerdict {
        classify_closed_form(&point(m, r, f).derive().unwrap())
    }

    fn quick() -> ClassifyOptions {
        ClassifyOptions {
            scan: ScanConfig {
                n_eta: 100,
                n_xi: 200,
                ..ScanConfig::default()
            },
            ..ClassifyOptions::default()
        }
    }

    #[test]
    fn gas_example() {
        let v = closed(0.8, 1.2, Deformation::ZERO);
        assert_eq!(v.verdict, Verdict::UniformlyStable);
        assert!(v.condition_usc_prime && v.condition_usc1 && v.condition_usc_hat);
    }

    #[test]
    fn stretched_example_is_weak() {
        let v = closed(1.0, 3.0, Deformation::diag(0.5, 0.5));
        assert_eq!(v.verdict, Verdict::WeaklyStable);
        assert!((v.margin - (-0.25)).abs() < 1e-12);
        let full = classify(&point(1.0, 3.0, Deformation::diag(0.5, 0.5)), &quick()).unwrap();
        assert!(full.delta_branch_roots > 0 && full.agreement);
    }

    #[test]
    fn sheared_examples() {
        let f = Deformation::new(0.6, 0.3, 0.2, 0.4);
        let v = classify(&point(1.0, 2.0, f), &quick()).unwrap();
        assert_eq!(v.verdict, Verdict::UniformlyStable);
        assert!((v.derived.unwrap().k - 1.3).abs() < 1e-12);
        assert!((v.margin + 1.3 - 1.8139).abs() < 1e-4);
        assert_eq!(v.delta_branch_roots, 0);
        assert!(v.agreement);

        let v = classify(&point(1.0, 3.2, f), &quick()).unwrap();
        assert_eq!(v.verdict, Verdict::WeaklyStable);
        let d = v.derived.unwrap();
        let root = v
            .boundary_roots
            .iter()
            .find(|r| r.branch == Some(crate::lopatinski::DeltaBranch::Plus))
            .unwrap();
        // delta = sqrt(K - K2) / beta with K = 1.96, K2 = 1.2, beta = sqrt(0.45)
        let delta = (0.76f64).sqrt() / 0.45f64.sqrt();
        assert!((root.lambda.im - delta).abs() < 1e-12);
        assert!((d.k - 1.96).abs() < 1e-12);
        assert!(root.normalized_residual < 1e-8);
    }

    #[test]
    fn lax_failure_is_inadmissible() {
        let v = classify_full(&point(0.4, 2.0, Deformation::diag(0.5, 0.5))).unwrap();
        assert_eq!(v.verdict, Verdict::Inadmissible);
        let v = classify_full(&point(1.2, 2.0, Deformation::diag(0.5, 0.5))).unwrap();
        assert_eq!(v.verdict, Verdict::Inadmissible);
        assert!(v.derived.is_none());
        let p = point(0.8, 1.5, Deformation::ZERO)
            .with_upstream(1.0)
            .unwrap();
        assert_eq!(
            classify(&p, &ClassifyOptions::fast()).unwrap().verdict,
            Verdict::Inadmissible
        );
    }

    #[test]
    fn rarefaction_is_uniformly_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut n = 0;
        while n < 1000 {
            let f = Deformation::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let m1 = (f.f11 * f.f11 + f.f12 * f.f12).sqrt();
            let ms = (1.0 + m1 * m1).sqrt();
            let m = rng.gen_range(m1..ms);
            let Ok(p) = ShockParameters::new(m, rng.gen_range(1e-3..1.0), f) else {
                continue;
            };
            let Ok(d) = p.derive() else { continue };
            if !d.lax_downstream() {
                continue;
            }
            assert_eq!(
                classify_closed_form(&d).verdict,
                Verdict::UniformlyStable,
                "{p:?}"
            );
            n += 1;
        }
    }

    #[test]
    fn threshold_is_weak() {
        // F = 0, M = 0.5: K = 0.25 R and K1 + K2 = 1.25, so R = 5 sits on the threshold exactly
        let v = closed(0.5, 5.0, Deformation::ZERO);
        assert_eq!(v.margin, 0.0);
        assert_eq!(v.verdict, Verdict::WeaklyStable);
        assert!(v.extended_precision);
    }

    #[test]
    fn elastic_stabilization() {
        // gas point just past the threshold, M^2 (R - 1) = 1.01
        let gas = closed(0.5, 5.04, Deformation::ZERO);
        assert_eq!(gas.verdict, Verdict::WeaklyStable);
        let elastic = closed(0.5, 5.04, Deformation::new(0.0, 0.0, 0.0, 0.3));
        assert_eq!(elastic.verdict, Verdict::UniformlyStable);
    }

    #[test]
    fn monotone_in_ratio() {
        let f = Deformation::new(0.6, 0.3, 0.2, 0.4);
        let verdicts: Vec<Verdict> = (1..=600)
            .map(|k| closed(1.0, k as f64 * 0.01, f).verdict)
            .collect();
        let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(flips, 1);
        assert_eq!(verdicts[0], Verdict::UniformlyStable);
    }
}
