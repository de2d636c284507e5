//! Self-checks at a single parameter point, collected into a JSON report.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify_closed_form, Verdict};
use crate::dispersion::{full_dispersion_roots, hersh_roots};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::lopatinski::{
    build_determinant, closed_form_determinant, find_boundary_roots, reduced_bracket,
    reduced_residual, residual_scale, scan_boundary_axis, RootRecord, ACCEPT_TOL,
};
use crate::params::{DerivedQuantities, ShockParameters};
use crate::sampling::random_frequency;
use crate::scan::{interior_winding, scan_interior_roots, ScanConfig};
use crate::system::{boundary_kernel, kernel_residual, SystemMatrices};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub scan: ScanConfig,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
            scan: ScanConfig {
                winding: true,
                ..ScanConfig::default()
            },
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: usize,
    /// Largest normalized defect seen.
    pub max: f64,
    pub tol: f64,
    /// Sample points where the check could not be evaluated.
    pub skipped: usize,
    pub pass: bool,
}

impl SuiteResult {
    fn from_values(name: &'static str, values: &[Option<f64>], tol: f64) -> Self {
        let max =
            values
                .iter()
                .flatten()
                .fold(0.0f64, |a, &b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let skipped = values.iter().filter(|v| v.is_none()).count();
        Self {
            name,
            samples: values.len(),
            max,
            tol,
            skipped,
            pass: max <= tol && skipped < values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub params: ShockParameters,
    pub verdict: Verdict,
    pub margin: f64,
    pub suites: Vec<SuiteResult>,
    pub boundary_roots: Vec<RootRecord>,
    pub axis_roots: usize,
    pub interior_roots: Vec<RootRecord>,
    pub winding: Option<i64>,
    pub pass: bool,
}

struct Sample {
    s: Complex64,
    omega: f64,
}

fn determinant_defect(d: &DerivedQuantities, mats: &SystemMatrices, p: &Sample) -> Option<f64> {
    let lambda = hersh_roots(d, p.s, p.omega).ok()?.plus;
    let kernel = boundary_kernel(d, mats, p.s, p.omega);
    let generic = build_determinant(mats, &kernel, p.s, p.omega, lambda)
        .ok()?
        .det;
    let closed = closed_form_determinant(d, p.s, p.omega, lambda);
    Some((generic - closed).norm() / generic.norm().max(closed.norm()))
}

/// `bracket = Omega r_bnd - s r_disp` holds for every `lambda`; with `lambda^+`
/// the second term vanishes, so the determinant's zeros are those of `r_bnd`.
fn chain_defect(d: &DerivedQuantities, p: &Sample) -> Option<f64> {
    let lambda = hersh_roots(d, p.s, p.omega).ok()?.plus;
    let (r_disp, r_bnd) = reduced_residual(d, p.s, p.omega, lambda);
    let big = p.s + lambda;
    let bracket = reduced_bracket(d, p.s, p.omega, lambda);
    let scale = residual_scale(d, p.s, p.omega, lambda);
    let identity =
        (bracket - (big * r_bnd - p.s * r_disp)).norm() / (scale * (big.norm() + p.s.norm()));
    Some(identity.max(r_disp.norm() / scale))
}

fn dispersion_defect(d: &DerivedQuantities, p: &Sample) -> Option<f64> {
    let lambda = hersh_roots(d, p.s, p.omega).ok()?.plus;
    let roots = full_dispersion_roots(d, p.s, p.omega).ok()?;
    let positive: Vec<&Complex64> = roots.iter().filter(|r| r.re > 0.0).collect();
    if positive.len() != 1 {
        return Some(f64::INFINITY);
    }
    Some((positive[0] - lambda).norm() / (1.0 + lambda.norm()))
}

pub fn verify(params: &ShockParameters, opts: &VerifyOptions) -> Result<VerifyReport> {
    let d = params.derive()?;
    if !d.lax_downstream() {
        return Err(Error::InvalidParameters(
            "verify needs a Lax-admissible point".into(),
        ));
    }
    let mats = SystemMatrices::assemble(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples: Vec<Sample> = (0..opts.samples.max(1))
        .map(|_| {
            let (s, omega) = random_frequency(&mut rng, (1e-3, 5.0), 5.0);
            Sample { s, omega }
        })
        .collect();

    let det = map_slice(&samples, opts.exec, |p| determinant_defect(&d, &mats, p));
    let kernel = map_slice(&samples, opts.exec, |p| {
        Some(kernel_residual(
            &mats,
            &boundary_kernel(&d, &mats, p.s, p.omega),
            p.s,
            p.omega,
        ))
    });
    let chain = map_slice(&samples, opts.exec, |p| chain_defect(&d, p));
    let disp = map_slice(&samples, opts.exec, |p| dispersion_defect(&d, p));

    let closed = classify_closed_form(&d);
    let boundary = find_boundary_roots(&d)?;
    let axis = scan_boundary_axis(&d, 400)?;
    let interior = scan_interior_roots(&d, &opts.scan, opts.exec);
    let winding = if opts.scan.winding {
        interior_winding(&d, &opts.scan)
    } else {
        None
    };

    let weak = closed.verdict == Verdict::WeaklyStable;
    let boundary_max = boundary
        .iter()
        .chain(&axis)
        .map(|r| r.normalized_residual)
        .fold(0.0, f64::max);
    let mut boundary_suite = SuiteResult::from_values(
        "boundary_roots",
        &boundary
            .iter()
            .chain(&axis)
            .map(|r| Some(r.normalized_residual))
            .collect::<Vec<_>>(),
        ACCEPT_TOL,
    );
    boundary_suite.max = boundary_max;
    boundary_suite.skipped = 0;
    boundary_suite.pass = boundary_max <= ACCEPT_TOL
        && (closed.near_threshold() || (boundary.is_empty() != weak && axis.is_empty() != weak));

    let interior_suite = SuiteResult {
        name: "interior_scan",
        samples: opts.scan.n_eta * opts.scan.n_xi,
        max: interior.len() as f64,
        tol: 0.0,
        skipped: 0,
        pass: interior.is_empty() && winding.is_none_or(|w| w == 0),
    };

    let suites = vec![
        SuiteResult::from_values("determinant_equivalence", &det, 1e-10),
        SuiteResult::from_values("kernel_residual", &kernel, 1e-12),
        SuiteResult::from_values("reduction_chain", &chain, 1e-12),
        SuiteResult::from_values("dispersion_roots", &disp, 1e-9),
        boundary_suite,
        interior_suite,
    ];
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport {
        params: *params,
        verdict: closed.verdict,
        margin: closed.margin,
        suites,
        boundary_roots: boundary,
        axis_roots: axis.len(),
        interior_roots: interior,
        winding,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Deformation;

    fn opts() -> VerifyOptions {
        VerifyOptions {
            samples: 200,
            scan: ScanConfig {
                n_eta: 80,
                n_xi: 160,
                winding: true,
                ..ScanConfig::default()
            },
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn weak_point_passes() {
        let p = ShockParameters::new(1.0, 3.2, Deformation::new(0.6, 0.3, 0.2, 0.4)).unwrap();
        let r = verify(&p, &opts()).unwrap();
        for s in &r.suites {
            assert!(s.pass, "{s:?}");
        }
        assert_eq!(r.verdict, Verdict::WeaklyStable);
        assert_eq!(r.winding, Some(0));
        assert!(r.pass);
    }

    #[test]
    fn stable_point_passes() {
        let p = ShockParameters::new(0.9, 1.7, Deformation::new(0.2, 0.5, -0.4, 0.3)).unwrap();
        let r = verify(&p, &opts()).unwrap();
        assert!(r.pass, "{:?}", r.suites);
        assert!(r.boundary_roots.is_empty() && r.axis_roots == 0);
    }

    #[test]
    fn inadmissible_is_an_error() {
        let p = ShockParameters::new(0.2, 1.7, Deformation::diag(0.5, 0.5)).unwrap();
        assert!(verify(&p, &opts()).is_err());
    }
}
