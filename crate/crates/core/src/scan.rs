//! Search for roots of the reduced system with `Re s > 0`.
//!
//! By homogeneity of degree two and the conjugation symmetry
//! `(s, lambda, omega) -> (conj s, conj lambda, -omega)`, a scan at `omega = 1`
//! over `Re s > 0`, `Im s` of both signs, covers every frequency. The scanned
//! function is `r_bnd(s, lambda^+(s, 1), 1)`: with `lambda = lambda^+` the first
//! reduced equation holds identically, so its zeros are the roots sought.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::hersh_roots;
use crate::exec::{map_indexed, map_slice, Execution};
use crate::lopatinski::{reduced_residual, residual_scale, RootKind, RootRecord};
use crate::params::DerivedQuantities;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub eta_min: f64,
    pub eta_max: f64,
    /// Scan `Im s` over `[-xi_max, xi_max]`.
    pub xi_max: f64,
    /// Log-spaced samples in `Re s`.
    pub n_eta: usize,
    pub n_xi: usize,
    /// A refined point is a root when its normalized residual is below this.
    pub accept_tol: f64,
    /// Relative Newton step size at which refinement stops.
    pub newton_tol: f64,
    /// Local minima refined per scan, smallest first.
    pub max_seeds: usize,
    pub newton_iters: usize,
    /// Also compute the winding number of the scanned function around the window.
    pub winding: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            eta_min: 1e-4,
            eta_max: 10.0,
            xi_max: 10.0,
            n_eta: 400,
            n_xi: 800,
            accept_tol: 1e-8,
            newton_tol: 1e-12,
            max_seeds: 64,
            newton_iters: 80,
            winding: false,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        let ok = self.eta_min > 0.0
            && self.eta_max > self.eta_min
            && self.xi_max > 0.0
            && self.n_eta >= 2
            && self.n_xi >= 2
            && self.accept_tol > 0.0
            && self.newton_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::error::Error::Config(format!(
                "invalid scan window {self:?}"
            )))
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        let (a, b) = (self.eta_min.ln(), self.eta_max.ln());
        (0..self.n_eta)
            .map(|i| (a + (b - a) * i as f64 / (self.n_eta - 1) as f64).exp())
            .collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n_xi)
            .map(|j| -self.xi_max + 2.0 * self.xi_max * j as f64 / (self.n_xi - 1) as f64)
            .collect()
    }
}

/// A zero found by the scanner, with the normalized modulus at it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanHit {
    pub s: Complex64,
    pub residual: f64,
}

/// Normalized modulus `|f(s)| / scale(s)`; infinite where `f` is undefined.
fn modulus<F>(f: &F, s: Complex64) -> f64
where
    F: Fn(Complex64) -> Option<(Complex64, f64)>,
{
    match f(s) {
        Some((v, scale)) if scale > 0.0 && v.is_finite() => v.norm() / scale,
        _ => f64::INFINITY,
    }
}

/// Grid scan plus damped Newton refinement for zeros of `f` with
/// `Re s >= eta_min`. `f` returns the value and a magnitude scale.
pub fn scan_for_zeros<F>(f: &F, cfg: &ScanConfig, exec: Execution) -> Vec<ScanHit>
where
    F: Fn(Complex64) -> Option<(Complex64, f64)> + Sync + Send,
{
    let etas = cfg.etas();
    let xis = cfg.xis();
    let (ne, nx) = (etas.len(), xis.len());
    let grid: Vec<Vec<f64>> = map_indexed(ne, exec, |i| {
        xis.iter()
            .map(|&xi| modulus(f, Complex64::new(etas[i], xi)))
            .collect()
    });

    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..ne {
        for j in 0..nx {
            let v = grid[i][j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= ne as i64 || b >= nx as i64 {
                        continue;
                    }
                    if grid[a as usize][b as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push((v, i, j));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(cfg.max_seeds);

    let starts: Vec<Complex64> = seeds
        .iter()
        .map(|&(_, i, j)| Complex64::new(etas[i], xis[j]))
        .collect();
    let refined = map_slice(&starts, exec, |&s0| refine(f, s0, cfg));

    let mut hits: Vec<ScanHit> = Vec::new();
    for hit in refined.into_iter().flatten() {
        let dup = hits
            .iter()
            .any(|h| (h.s - hit.s).norm() <= 1e-6 * (1.0 + hit.s.norm()));
        if !dup {
            hits.push(hit);
        }
    }
    hits.sort_by(|a, b| a.s.re.total_cmp(&b.s.re).then(a.s.im.total_cmp(&b.s.im)));
    hits
}

fn refine<F>(f: &F, mut s: Complex64, cfg: &ScanConfig) -> Option<ScanHit>
where
    F: Fn(Complex64) -> Option<(Complex64, f64)>,
{
    let value = |z: Complex64| f(z).map(|(v, _)| v).filter(|v| v.is_finite());
    let mut fs = value(s)?;
    for _ in 0..cfg.newton_iters {
        let h = 1e-7 * (1.0 + s.norm());
        let dfs = (value(s + h)? - value(s - h)?) / (2.0 * h);
        if dfs.norm() == 0.0 || !dfs.is_finite() {
            break;
        }
        let step = fs / dfs;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let next = s - step * t;
            if next.re > 0.0 {
                if let Some(fn_) = value(next) {
                    if fn_.norm() < fs.norm() {
                        s = next;
                        fs = fn_;
                        moved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !moved || (step * t).norm() <= cfg.newton_tol * (1.0 + s.norm()) {
            break;
        }
    }
    let residual = modulus(f, s);
    (residual <= cfg.accept_tol && s.re >= cfg.eta_min).then_some(ScanHit { s, residual })
}

/// The scanned function for the shock problem.
pub fn interior_objective(d: &DerivedQuantities, s: Complex64) -> Option<(Complex64, f64)> {
    let lambda = hersh_roots(d, s, 1.0).ok()?.plus;
    let r_bnd = reduced_residual(d, s, 1.0, lambda).1;
    Some((r_bnd, residual_scale(d, s, 1.0, lambda)))
}

/// Roots with `Re s > 0` inside the window, as records at `omega = 1`.
pub fn scan_interior_roots(
    d: &DerivedQuantities,
    cfg: &ScanConfig,
    exec: Execution,
) -> Vec<RootRecord> {
    let f = |s: Complex64| interior_objective(d, s);
    scan_for_zeros(&f, cfg, exec)
        .into_iter()
        .filter_map(|hit| {
            let lambda = hersh_roots(d, hit.s, 1.0).ok()?.plus;
            Some(RootRecord::new(d, hit.s, 1.0, lambda, RootKind::Interior))
        })
        .collect()
}

/// Winding number of `f` along the boundary of the scan window,
/// counterclockwise, with adaptive refinement wherever the phase jumps by
/// more than a quarter turn between samples. `None` when `f` is undefined
/// or vanishes on the boundary.
pub fn winding_number<F>(f: &F, cfg: &ScanConfig) -> Option<i64>
where
    F: Fn(Complex64) -> Option<(Complex64, f64)>,
{
    let corners = [
        Complex64::new(cfg.eta_min, -cfg.xi_max),
        Complex64::new(cfg.eta_max, -cfg.xi_max),
        Complex64::new(cfg.eta_max, cfg.xi_max),
        Complex64::new(cfg.eta_min, cfg.xi_max),
    ];
    let value = |z: Complex64| {
        f(z).map(|(v, _)| v)
            .filter(|v| v.is_finite() && v.norm() > 0.0)
    };
    let pieces = 512;
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let mut prev_z = a;
        let mut prev_v = value(a)?;
        for m in 1..=pieces {
            let z = a + (b - a) * (m as f64 / pieces as f64);
            let v = value(z)?;
            total += phase_change(&value, prev_z, prev_v, z, v, 0)?;
            prev_z = z;
            prev_v = v;
        }
    }
    Some((total / std::f64::consts::TAU).round() as i64)
}

fn phase_change<G>(
    value: &G,
    za: Complex64,
    va: Complex64,
    zb: Complex64,
    vb: Complex64,
    depth: u32,
) -> Option<f64>
where
    G: Fn(Complex64) -> Option<Complex64>,
{
    let dphi = (vb / va).arg();
    if dphi.abs() <= std::f64::consts::FRAC_PI_4 {
        return Some(dphi);
    }
    if depth >= 40 {
        return None;
    }
    let zm = 0.5 * (za + zb);
    let vm = value(zm)?;
    Some(
        phase_change(value, za, va, zm, vm, depth + 1)?
            + phase_change(value, zm, vm, zb, vb, depth + 1)?,
    )
}

/// Winding number of the shock objective around the scan window.
pub fn interior_winding(d: &DerivedQuantities, cfg: &ScanConfig) -> Option<i64> {
    winding_number(&|s| interior_objective(d, s), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::hersh_roots;
    use crate::params::{Deformation, ShockParameters};

    fn small() -> ScanConfig {
        ScanConfig {
            n_eta: 120,
            n_xi: 240,
            ..ScanConfig::default()
        }
    }

    fn derived(m: f64, r: f64, f: Deformation) -> DerivedQuantities {
        ShockParameters::new(m, r, f).unwrap().derive().unwrap()
    }

    /// `r_bnd` with the sign of `K` flipped, which has a zero with `Re s > 0`.
    fn planted(d: &DerivedQuantities, s: Complex64) -> Option<(Complex64, f64)> {
        let lambda = hersh_roots(d, s, 1.0).ok()?.plus;
        let m_sq = d.mach * d.mach;
        let big = s + lambda;
        let i = Complex64::new(0.0, 1.0);
        let v = m_sq * big * big - m_sq * lambda * lambda - d.k - 2.0 * i * d.ell0 * lambda;
        Some((v, residual_scale(d, s, 1.0, lambda)))
    }

    #[test]
    fn stable_point_has_no_interior_roots() {
        let d = derived(1.0, 2.0, Deformation::diag(0.5, 0.5));
        assert!(scan_interior_roots(&d, &small(), Execution::default()).is_empty());
        assert_eq!(interior_winding(&d, &small()), Some(0));
    }

    #[test]
    fn weakly_stable_point_has_no_interior_roots() {
        let d = derived(1.0, 3.2, Deformation::new(0.6, 0.3, 0.2, 0.4));
        assert!(scan_interior_roots(&d, &small(), Execution::default()).is_empty());
    }

    #[test]
    fn planted_root_is_found() {
        let d = derived(1.0, 2.0, Deformation::diag(0.5, 0.5));
        let f = |s| planted(&d, s);
        let hits = scan_for_zeros(&f, &small(), Execution::Sequential);
        assert!(!hits.is_empty());
        for h in &hits {
            assert!(h.s.re > 0.0 && h.residual < 1e-8);
            assert!(f(h.s).unwrap().0.norm() < 1e-8);
        }
        let w = winding_number(&f, &small()).unwrap();
        assert_eq!(w as usize, hits.len());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let d = derived(1.0, 2.0, Deformation::new(0.3, 0.0, 0.1, 0.5));
        let f = |s| planted(&d, s);
        let a = scan_for_zeros(&f, &small(), Execution::Sequential);
        let b = scan_for_zeros(&f, &small(), Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn planted_root_scales_with_omega() {
        let d = derived(1.0, 2.0, Deformation::diag(0.5, 0.5));
        let hits = scan_for_zeros(&|s| planted(&d, s), &small(), Execution::default());
        let s = hits[0].s;
        // at omega = 2 the root sits at 2 s with lambda^+ doubled
        let l1 = hersh_roots(&d, s, 1.0).unwrap().plus;
        let l2 = hersh_roots(&d, 2.0 * s, 2.0).unwrap().plus;
        assert!((l2 - 2.0 * l1).norm() < 1e-12 * l1.norm().max(1.0));
    }
}
