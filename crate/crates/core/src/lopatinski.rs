//! The Lopatinski determinant and the roots of the reduced system.
//!
//! Two independent routes are provided for the determinant: the generic
//! construction (row-replace the interior symbol with `A1 U0`) and the
//! factored closed form. Roots are located in the `|l0|`-reduced variables
//! with unit Fourier variable; in the original variables they sit at
//! `omega = sgn(l0)`, see [`DerivedQuantities::omega_sign`].

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion::{delta_pm, delta_radicand, hersh_roots, ImaginaryBranches};
use crate::error::{Error, Result};
use crate::params::DerivedQuantities;
use crate::system::{boundary_kernel, BoundaryKernel, Complex7, SystemMatrices};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-replaced interior symbol and its determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct LopatinskiMatrix {
    pub matrix: Complex7,
    pub det: Complex64,
    /// Smallest singular value of the six retained rows.
    pub selection_margin: f64,
}

/// Row 1 of `s A0 + lambda A1 + i omega A2` is replaced by `(A1 U0)^T`.
pub fn build_determinant(
    mats: &SystemMatrices,
    kernel: &BoundaryKernel,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> Result<LopatinskiMatrix> {
    let mut matrix = mats.symbol(s, omega, lambda);
    let retained = matrix.rows(1, 6).into_owned();
    let sv = retained.svd(false, false).singular_values;
    let largest = sv.max();
    let smallest = sv.min();
    if smallest.is_nan() || smallest <= 1e-12 * largest {
        return Err(Error::SingularSelection { smallest });
    }
    matrix.set_row(0, &kernel.a1u0.transpose());
    let det = matrix.determinant();
    Ok(LopatinskiMatrix {
        matrix,
        det,
        selection_margin: smallest,
    })
}

/// Generic determinant at `(s, omega)` with `lambda = lambda^+`.
pub fn lopatinski_determinant(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
) -> Result<LopatinskiMatrix> {
    let mats = SystemMatrices::assemble(d);
    let kernel = boundary_kernel(d, &mats, s, omega);
    let lambda = hersh_roots(d, s, omega)?.plus;
    build_determinant(&mats, &kernel, s, omega, lambda)
}

/// Left-hand side of the reduced boundary equation (the braces of the
/// factored determinant).
pub fn reduced_bracket(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> Complex64 {
    let m_sq = d.mach * d.mach;
    let m1_sq = d.m1 * d.m1;
    let m2_sq = d.m2 * d.m2;
    let big = s + lambda;
    let w2 = omega * omega;
    let il = I * (d.ell0 * omega);
    (lambda * lambda - w2) * s
        + (m_sq * s - il) * big * lambda
        + m1_sq * lambda * lambda * s
        + m2_sq * w2 * lambda
        + il * lambda * (s - lambda)
        + d.ratio * (m_sq - m1_sq) * w2 * big
}

/// `beta^2 Omega^2 (omega^2 - lambda^2) / (2 M^2) * reduced_bracket`.
pub fn closed_form_determinant(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> Complex64 {
    let big = s + lambda;
    let pre = d.beta_sq() * big * big * (omega * omega - lambda * lambda) / (2.0 * d.mach * d.mach);
    pre * reduced_bracket(d, s, omega, lambda)
}

/// Residuals of the two reduced equations
/// `M^2 Omega^2 - M*^2 lambda^2 + K2 omega^2 - 2i|l0| lambda omega` and
/// `M^2 Omega^2 - M^2 lambda^2 + K omega^2 - 2i|l0| lambda omega`,
/// with `omega` given in the original variables.
pub fn reduced_residual(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> (Complex64, Complex64) {
    let m_sq = d.mach * d.mach;
    let big = s + lambda;
    let w2 = omega * omega;
    let common = m_sq * big * big - 2.0 * I * (d.ell0 * omega) * lambda;
    let lam2 = lambda * lambda;
    (
        common - d.mach_star_sq() * lam2 + d.k2 * w2,
        common - m_sq * lam2 + d.k * w2,
    )
}

/// Sum of the term magnitudes of the reduced equations, for normalizing residuals.
pub fn residual_scale(d: &DerivedQuantities, s: Complex64, omega: f64, lambda: Complex64) -> f64 {
    let m_sq = d.mach * d.mach;
    let w2 = omega * omega;
    m_sq * (s + lambda).norm_sqr()
        + d.mach_star_sq() * lambda.norm_sqr()
        + d.k.max(d.k2) * w2
        + 2.0 * d.abs_ell0() * lambda.norm() * omega.abs()
}

/// Scale-normalized `max(|r_disp|, |r_bnd|)`.
pub fn normalized_residual(
    d: &DerivedQuantities,
    s: Complex64,
    omega: f64,
    lambda: Complex64,
) -> f64 {
    let (a, b) = reduced_residual(d, s, omega, lambda);
    let scale = residual_scale(d, s, omega, lambda);
    if scale == 0.0 {
        return 0.0;
    }
    a.norm().max(b.norm()) / scale
}

/// Merge points of the two imaginary branches, reduced variables, `omega = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionPoints {
    pub xi_star_plus: f64,
    pub xi_star_minus: f64,
    /// `sqrt(K1) / beta`
    pub delta_star_plus: f64,
    /// `-sqrt(K3) / beta`
    pub delta_star_minus: f64,
}

impl TransitionPoints {
    /// `(M^2 xi* - |l0|) / beta^2`, the common value of both branches at a merge point.
    pub fn delta_at(d: &DerivedQuantities, xi: f64) -> f64 {
        (d.mach * d.mach * xi - d.abs_ell0()) / d.beta_sq()
    }
}

pub fn transition_points(d: &DerivedQuantities) -> TransitionPoints {
    let denom = d.mach * d.mach_star_sq();
    let a = d.mach * d.abs_ell0();
    let b = d.beta * d.sigma;
    TransitionPoints {
        xi_star_plus: (a + b) / denom,
        xi_star_minus: (a - b) / denom,
        delta_star_plus: d.k1.sqrt() / d.beta,
        delta_star_minus: -d.k3.sqrt() / d.beta,
    }
}

/// `M^2 M*^2 xi^2 - 2|l0| M^2 xi + l0^2 - K2 beta^2`.
pub fn merge_quadratic(d: &DerivedQuantities, xi: f64) -> f64 {
    delta_radicand(d, xi, d.omega_sign())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// `Re s > 0`
    Interior,
    /// `Re s = 0`
    Boundary,
}

/// Which imaginary branch a boundary root was constructed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaBranch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootRecord {
    pub s: Complex64,
    pub lambda: Complex64,
    pub omega: f64,
    pub residual_dispersion: Complex64,
    pub residual_boundary: Complex64,
    /// Scale-normalized `max(|residual_dispersion|, |residual_boundary|)`.
    pub normalized_residual: f64,
    pub kind: RootKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<DeltaBranch>,
}

impl RootRecord {
    pub fn new(
        d: &DerivedQuantities,
        s: Complex64,
        omega: f64,
        lambda: Complex64,
        kind: RootKind,
    ) -> Self {
        let (residual_dispersion, residual_boundary) = reduced_residual(d, s, omega, lambda);
        Self {
            s,
            lambda,
            omega,
            residual_dispersion,
            residual_boundary,
            normalized_residual: normalized_residual(d, s, omega, lambda),
            kind,
            branch: None,
        }
    }

    /// `lambda^2 - (K2 - K) omega^2 / beta^2`, normalized by `|lambda|^2 + omega^2`.
    pub fn l2_defect(&self, d: &DerivedQuantities) -> f64 {
        let target = (d.k2 - d.k) * self.omega * self.omega / d.beta_sq();
        (self.lambda * self.lambda - target).norm()
            / (self.lambda.norm_sqr() + self.omega * self.omega)
    }
}

/// Default acceptance tolerance on normalized reduced residuals.
pub const ACCEPT_TOL: f64 = 1e-8;

fn delta_branch(d: &DerivedQuantities, xi: f64, branch: DeltaBranch) -> f64 {
    let b2 = d.beta_sq();
    let base = d.mach * d.mach * xi - d.abs_ell0();
    let root = merge_quadratic(d, xi).max(0.0).sqrt();
    match branch {
        DeltaBranch::Plus => (base + root) / b2,
        DeltaBranch::Minus => (base - root) / b2,
    }
}

/// Solves `delta(xi) = target` on the monotone half-line of `branch`
/// starting at the merge point. `None` when the target is out of range.
fn solve_on_branch(
    d: &DerivedQuantities,
    target: f64,
    branch: DeltaBranch,
    tp: &TransitionPoints,
) -> Option<f64> {
    // delta^+ increases on [xi*+, inf); delta^- increases on (-inf, xi*-].
    // Map both to an increasing function g(t) with t >= 0 and g(0) at the merge point.
    let (start, dir, sign) = match branch {
        DeltaBranch::Plus => (tp.xi_star_plus, 1.0, 1.0),
        DeltaBranch::Minus => (tp.xi_star_minus, -1.0, -1.0),
    };
    let g = |t: f64| sign * (delta_branch(d, start + dir * t, branch) - target);
    let g0 = g(0.0);
    let tol = 1e-12 * (1.0 + target.abs());
    if g0 > tol {
        return None;
    }
    if g0 >= 0.0 {
        return Some(start);
    }
    let mut hi = 1.0_f64.max(start.abs());
    while g(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(start + dir * 0.5 * (lo + hi))
}

/// Roots `(s, lambda) = (i xi, i delta)` of the reduced system on the
/// imaginary axis, built from `lambda^2 = (K2 - K) / beta^2` and matched to
/// the `delta^+` branch (`xi >= xi*+`) and the `delta^-` branch (`xi <= xi*-`).
pub fn find_boundary_roots(d: &DerivedQuantities) -> Result<Vec<RootRecord>> {
    if !d.lax_downstream() {
        return Err(Error::InvalidParameters(
            "boundary roots need M1 < M < M*".into(),
        ));
    }
    let excess = d.k - d.k2;
    if excess < 0.0 {
        return Ok(Vec::new());
    }
    let delta = excess.sqrt() / d.beta;
    let tp = transition_points(d);
    let omega = d.omega_sign();
    let mut out = Vec::new();

    for (branch, target) in [(DeltaBranch::Plus, delta), (DeltaBranch::Minus, -delta)] {
        let Some(xi) = solve_on_branch(d, target, branch, &tp) else {
            continue;
        };
        let (ok, bound) = match branch {
            DeltaBranch::Plus => (
                xi >= tp.xi_star_plus - 1e-12 * (1.0 + xi.abs()),
                tp.xi_star_plus,
            ),
            DeltaBranch::Minus => (
                xi <= tp.xi_star_minus + 1e-12 * (1.0 + xi.abs()),
                tp.xi_star_minus,
            ),
        };
        if !ok {
            return Err(Error::BranchMismatch { xi, bound });
        }
        let mut rec = RootRecord::new(
            d,
            Complex64::new(0.0, xi),
            omega,
            Complex64::new(0.0, target),
            RootKind::Boundary,
        );
        rec.branch = Some(branch);
        out.push(rec);
    }
    Ok(out)
}

/// Numerical existence check on the imaginary axis that does not use
/// `lambda^2 = (K2 - K) / beta^2`: the boundary residual
/// `r_bnd(i xi, lambda^+(0, xi))` is sampled on both real-branch half-lines,
/// sign changes are bisected, and the half-lines are extended until the
/// residual is negative at their far end.
pub fn scan_boundary_axis(d: &DerivedQuantities, samples: usize) -> Result<Vec<RootRecord>> {
    if !d.lax_downstream() {
        return Err(Error::InvalidParameters(
            "boundary scan needs M1 < M < M*".into(),
        ));
    }
    let tp = transition_points(d);
    let omega = d.omega_sign();
    let samples = samples.max(8);
    let residual = |xi: f64| -> Result<(f64, Complex64)> {
        let s = Complex64::new(0.0, xi);
        let lambda = hersh_roots(d, s, omega)?.plus;
        Ok((reduced_residual(d, s, omega, lambda).1.re, lambda))
    };

    let mut out = Vec::new();
    for (start, dir, branch) in [
        (tp.xi_star_plus, 1.0, DeltaBranch::Plus),
        (tp.xi_star_minus, -1.0, DeltaBranch::Minus),
    ] {
        let at = |t: f64| start + dir * t;
        let mut span = 10.0f64.max(4.0 * start.abs());
        while residual(at(span))?.0 >= 0.0 {
            span *= 2.0;
            if span > 1e12 {
                break;
            }
        }
        let mut prev_t = 0.0;
        let mut prev = residual(at(0.0))?.0;
        if prev == 0.0 {
            out.push(boundary_record(d, at(0.0), omega, branch)?);
            continue;
        }
        for k in 1..=samples {
            let t = span * (k as f64 / samples as f64).powi(2);
            let cur = residual(at(t))?.0;
            if cur == 0.0 || (prev > 0.0) != (cur > 0.0) {
                let (mut lo, mut hi) = (prev_t, t);
                let lo_pos = prev > 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let v = residual(at(mid))?.0;
                    if (v > 0.0) == lo_pos {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(boundary_record(d, at(0.5 * (lo + hi)), omega, branch)?);
            }
            prev = cur;
            prev_t = t;
        }
    }
    Ok(out)
}

fn boundary_record(
    d: &DerivedQuantities,
    xi: f64,
    omega: f64,
    branch: DeltaBranch,
) -> Result<RootRecord> {
    let s = Complex64::new(0.0, xi);
    let lambda = hersh_roots(d, s, omega)?.plus;
    let mut rec = RootRecord::new(d, s, omega, lambda, RootKind::Boundary);
    rec.branch = Some(branch);
    Ok(rec)
}

/// Imaginary branches for the reduced system at `s = i xi`, unit Fourier variable.
pub fn reduced_delta(d: &DerivedQuantities, xi: f64) -> ImaginaryBranches {
    delta_pm(d, xi, d.omega_sign())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Deformation, ShockParameters};
    use approx::assert_relative_eq;

    fn derived(m: f64, r: f64, f: Deformation) -> DerivedQuantities {
        ShockParameters::new(m, r, f).unwrap().derive().unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residual_difference_is_l2() {
        let d = derived(0.9, 1.7, Deformation::new(0.2, 0.5, -0.4, 0.3));
        let s = c(0.3, -0.2);
        let lam = c(0.1, 1.4);
        let w = 0.8;
        let (a, b) = reduced_residual(&d, s, w, lam);
        let diff = a - b;
        let expect = -d.beta_sq() * lam * lam + (d.k2 - d.k) * w * w;
        assert!((diff - expect).norm() < 1e-13);
    }

    #[test]
    fn stretched_weak_root_residuals() {
        let d = derived(1.0, 3.0, Deformation::diag(0.5, 0.5));
        let s = c(0.0, 0.50264);
        let lam = c(0.0, 2.23607);
        let (a, b) = reduced_residual(&d, s, 1.0, lam);
        assert!(a.norm() < 1e-3 && b.norm() < 1e-3);
        // with the recomputed frequency the residuals drop to round-off
        let xi = (-(5.0f64.sqrt()) / 2.0 + 1.875f64.sqrt()) / 0.5;
        let (a, b) = reduced_residual(&d, c(0.0, xi), 1.0, c(0.0, 5.0f64.sqrt()));
        assert!(a.norm() < 1e-12 && b.norm() < 1e-12);
    }

    #[test]
    fn transition_points_stretched() {
        let d = derived(1.0, 3.0, Deformation::diag(0.5, 0.5));
        let tp = transition_points(&d);
        assert_relative_eq!(tp.xi_star_plus, 0.5, epsilon = 1e-14);
        assert_relative_eq!(tp.xi_star_minus, -0.5, epsilon = 1e-14);
        assert_relative_eq!(tp.delta_star_plus, 2.0, epsilon = 1e-13);
        assert_relative_eq!(tp.delta_star_minus, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn transition_points_gas() {
        let d = derived(0.8, 1.2, Deformation::ZERO);
        let tp = transition_points(&d);
        assert_relative_eq!(tp.xi_star_plus, 0.75, epsilon = 1e-14);
        assert_relative_eq!(tp.xi_star_minus, -0.75, epsilon = 1e-14);
        assert_relative_eq!(tp.delta_star_plus, 0.8 / 0.6, epsilon = 1e-14);
    }

    #[test]
    fn transition_points_general() {
        let d = derived(1.0, 2.0, Deformation::new(0.6, 0.3, 0.2, 0.4));
        let tp = transition_points(&d);
        for xi in [tp.xi_star_plus, tp.xi_star_minus] {
            assert!(merge_quadratic(&d, xi).abs() < 1e-12);
        }
        assert_relative_eq!(
            TransitionPoints::delta_at(&d, tp.xi_star_plus),
            tp.delta_star_plus,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            TransitionPoints::delta_at(&d, tp.xi_star_minus),
            tp.delta_star_minus,
            epsilon = 1e-12
        );
        assert_relative_eq!(tp.delta_star_plus * d.beta, d.k1.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(-tp.delta_star_minus * d.beta, d.k3.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn stretched_boundary_roots() {
        let d = derived(1.0, 3.0, Deformation::diag(0.5, 0.5));
        let roots = find_boundary_roots(&d).unwrap();
        assert_eq!(roots.len(), 2);
        let plus = roots
            .iter()
            .find(|r| r.branch == Some(DeltaBranch::Plus))
            .unwrap();
        assert_relative_eq!(plus.s.im, 0.502545, epsilon = 1e-6);
        assert_relative_eq!(plus.lambda.im, 5.0f64.sqrt(), epsilon = 1e-12);
        assert!(plus.normalized_residual < 1e-12);
        let minus = roots
            .iter()
            .find(|r| r.branch == Some(DeltaBranch::Minus))
            .unwrap();
        assert_relative_eq!(minus.s.im, -0.502545, epsilon = 1e-6);
        assert_relative_eq!(minus.lambda.im, -(5.0f64.sqrt()), epsilon = 1e-12);
        for r in &roots {
            assert!(r.l2_defect(&d) < 1e-12);
            assert_eq!(r.kind, RootKind::Boundary);
        }
    }

    #[test]
    fn no_roots_when_uniformly_stable() {
        assert!(
            find_boundary_roots(&derived(1.0, 2.0, Deformation::diag(0.5, 0.5)))
                .unwrap()
                .is_empty()
        );
        assert!(find_boundary_roots(&derived(0.8, 1.2, Deformation::ZERO))
            .unwrap()
            .is_empty());
        assert!(
            scan_boundary_axis(&derived(1.0, 2.0, Deformation::diag(0.5, 0.5)), 200)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn minus_branch_needs_larger_k_when_sheared() {
        // l0 != 0 separates the two thresholds K1 + K2 < K3 + K2
        let f = Deformation::new(0.6, 0.3, 0.2, 0.4);
        let base = derived(1.0, 1.0, f);
        let r_plus = (base.k1 + base.k2 - base.m2 * base.m2) / (1.0 - base.m1 * base.m1);
        let r_minus = (base.k3 + base.k2 - base.m2 * base.m2) / (1.0 - base.m1 * base.m1);
        assert!(r_plus < r_minus);
        let between = derived(1.0, 0.5 * (r_plus + r_minus), f);
        let roots = find_boundary_roots(&between).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].branch, Some(DeltaBranch::Plus));
        let above = derived(1.0, r_minus + 0.1, f);
        assert_eq!(find_boundary_roots(&above).unwrap().len(), 2);
    }

    #[test]
    fn negative_ell0_roots_sit_at_negative_omega() {
        let f = Deformation::new(0.6, 0.3, -0.2, -0.4);
        let d = derived(1.0, 3.5, f);
        assert!(d.ell0 < 0.0);
        let roots = find_boundary_roots(&d).unwrap();
        assert!(!roots.is_empty());
        for r in &roots {
            assert_eq!(r.omega, -1.0);
            assert!(r.normalized_residual < 1e-10);
        }
    }

    #[test]
    fn axis_scan_matches_construction() {
        let f = Deformation::new(0.6, 0.3, 0.2, 0.4);
        let d = derived(1.0, 3.2, f);
        let built = find_boundary_roots(&d).unwrap();
        let scanned = scan_boundary_axis(&d, 400).unwrap();
        assert_eq!(built.len(), scanned.len());
        for b in &built {
            let m = scanned.iter().find(|r| r.branch == b.branch).unwrap();
            assert!((m.s - b.s).norm() < 1e-9, "{} vs {}", m.s, b.s);
            assert!(
                (m.lambda - b.lambda).norm() < 1e-7,
                "{} vs {}",
                m.lambda,
                b.lambda
            );
        }
    }

    #[test]
    fn determinant_vanishes_at_weak_root() {
        let d = derived(1.0, 3.0, Deformation::diag(0.5, 0.5));
        let mats = SystemMatrices::assemble(&d);
        for r in find_boundary_roots(&d).unwrap() {
            let kernel = boundary_kernel(&d, &mats, r.s, r.omega);
            let lm = build_determinant(&mats, &kernel, r.s, r.omega, r.lambda).unwrap();
            let scale = lm.matrix.row_iter().map(|row| row.norm()).product::<f64>();
            assert!(lm.det.norm() <= 1e-8 * scale, "{}", lm.det);
        }
    }

    #[test]
    fn generic_and_closed_form_agree() {
        let d = derived(0.9, 1.7, Deformation::new(0.2, 0.5, -0.4, 0.3));
        let s = c(0.4, -0.9);
        let lm = lopatinski_determinant(&d, s, 1.3).unwrap();
        let lam = crate::dispersion::lambda_plus(&d, s, 1.3).unwrap();
        let cf = closed_form_determinant(&d, s, 1.3, lam);
        assert!((lm.det - cf).norm() <= 1e-10 * cf.norm());
    }

    #[test]
    fn singular_selection_is_reported() {
        let d = derived(0.9, 1.7, Deformation::ZERO);
        let mats = SystemMatrices::assemble(&d);
        let s = c(0.5, 0.0);
        let kernel = boundary_kernel(&d, &mats, s, 0.0);
        // lambda = -s zeroes the F rows of the symbol
        let err = build_determinant(&mats, &kernel, s, 0.0, -s).unwrap_err();
        assert!(matches!(err, Error::SingularSelection { .. }));
    }
}
