//! Constant-coefficient linearized problem behind the shock.
//!
//! Unknowns are ordered `U = (p, v1, v2, F11, F21, F12, F22)`, i.e. the two
//! columns `F_1 = (F11, F21)` and `F_2 = (F12, F22)` follow the velocity.
//! Boundary rows are ordered: mass flux, differentiated front condition,
//! the two `F_1j` conditions, the two `F_2j` conditions.

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::params::DerivedQuantities;

pub type Real7 = SMatrix<f64, 7, 7>;
pub type Real6x7 = SMatrix<f64, 6, 7>;
pub type Complex7 = SMatrix<Complex64, 7, 7>;
pub type Complex6x7 = SMatrix<Complex64, 6, 7>;
pub type CVector7 = SVector<Complex64, 7>;

pub const UNKNOWNS: [&str; 7] = ["p", "v1", "v2", "F11", "F21", "F12", "F22"];
pub const BOUNDARY_ROWS: [&str; 6] = ["mass", "front", "F11", "F12", "F21", "F22"];

const P: usize = 0;
const V1: usize = 1;
const V2: usize = 2;
const F11: usize = 3;
const F21: usize = 4;
const F12: usize = 5;
const F22: usize = 6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a0: Real7,
    pub a1: Real7,
    pub a2: Real7,
    pub b0: Real6x7,
    pub b2: Real6x7,
    pub b3: Real6x7,
}

/// Eigenvalue sign counts of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl SystemMatrices {
    pub fn assemble(d: &DerivedQuantities) -> Self {
        let (a0, a1, a2) = assemble_interior(d);
        let (b0, b2, b3) = assemble_boundary(d);
        Self {
            a0,
            a1,
            a2,
            b0,
            b2,
            b3,
        }
    }

    /// `s A0 + lambda A1 + i omega A2`.
    pub fn symbol(&self, s: Complex64, omega: f64, lambda: Complex64) -> Complex7 {
        let io = I * omega;
        Complex7::from_fn(|r, c| {
            s * self.a0[(r, c)] + lambda * self.a1[(r, c)] + io * self.a2[(r, c)]
        })
    }

    /// `s B0 + i omega B2 + B3`.
    pub fn boundary_symbol(&self, s: Complex64, omega: f64) -> Complex6x7 {
        let io = I * omega;
        Complex6x7::from_fn(|r, c| s * self.b0[(r, c)] + io * self.b2[(r, c)] + self.b3[(r, c)])
    }

    pub fn a1_eigenvalues(&self) -> [f64; 7] {
        let eig = SymmetricEigen::new(self.a1);
        let mut ev: [f64; 7] = eig.eigenvalues.into();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn a1_signature(&self) -> Signature {
        let ev = self.a1_eigenvalues();
        let scale = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = 1e-13 * scale.max(1.0);
        let mut sig = Signature {
            negative: 0,
            zero: 0,
            positive: 0,
        };
        for x in ev {
            if x < -tol {
                sig.negative += 1;
            } else if x > tol {
                sig.positive += 1;
            } else {
                sig.zero += 1;
            }
        }
        sig
    }

    pub fn a1_det(&self) -> f64 {
        self.a1.determinant()
    }

    pub fn named(&self) -> [(&'static str, MatrixView<'_>); 6] {
        [
            ("A0", MatrixView::Square(&self.a0)),
            ("A1", MatrixView::Square(&self.a1)),
            ("A2", MatrixView::Square(&self.a2)),
            ("B0", MatrixView::Boundary(&self.b0)),
            ("B2", MatrixView::Boundary(&self.b2)),
            ("B3", MatrixView::Boundary(&self.b3)),
        ]
    }
}

#[derive(Debug, Clone, Copy)]
pub enum MatrixView<'a> {
    Square(&'a Real7),
    Boundary(&'a Real6x7),
}

impl MatrixView<'_> {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            MatrixView::Square(m) => (0..7).map(|r| m.row(r).iter().copied().collect()).collect(),
            MatrixView::Boundary(m) => (0..6).map(|r| m.row(r).iter().copied().collect()).collect(),
        }
    }
}

pub fn assemble_interior(d: &DerivedQuantities) -> (Real7, Real7, Real7) {
    let f = d.deformation;
    let m_sq = d.mach * d.mach;

    let mut a0 = Real7::identity();
    a0[(V1, V1)] = m_sq;
    a0[(V2, V2)] = m_sq;

    let mut a1 = Real7::identity();
    a1[(V1, V1)] = m_sq;
    a1[(V2, V2)] = m_sq;
    set_sym(&mut a1, P, V1, 1.0);
    set_sym(&mut a1, V1, F11, -f.f11);
    set_sym(&mut a1, V2, F21, -f.f11);
    set_sym(&mut a1, V1, F12, -f.f12);
    set_sym(&mut a1, V2, F22, -f.f12);

    let mut a2 = Real7::zeros();
    set_sym(&mut a2, P, V2, 1.0);
    set_sym(&mut a2, V1, F11, -f.f21);
    set_sym(&mut a2, V2, F21, -f.f21);
    set_sym(&mut a2, V1, F12, -f.f22);
    set_sym(&mut a2, V2, F22, -f.f22);

    (a0, a1, a2)
}

fn set_sym(m: &mut Real7, r: usize, c: usize, v: f64) {
    m[(r, c)] = v;
    m[(c, r)] = v;
}

/// `(B0, B2, B3)` for `B0 dU/dt + B2 dU/dx2 + B3 U = 0` on the shock.
pub fn assemble_boundary(d: &DerivedQuantities) -> (Real6x7, Real6x7, Real6x7) {
    let f = d.deformation;
    let m_sq = d.mach * d.mach;
    let r = d.ratio;
    let mut b0 = Real6x7::zeros();
    let mut b2 = Real6x7::zeros();
    let mut b3 = Real6x7::zeros();

    // v1 + d0 p - l0/(M^2 R) v2 = 0
    b3[(0, P)] = d.d0;
    b3[(0, V1)] = 1.0;
    b3[(0, V2)] = -d.ell0 / (m_sq * r);

    // (d/dt - l0/M^2 d/dx2) v2 - a0 dp/dx2 = 0
    b0[(1, V2)] = 1.0;
    b2[(1, V2)] = -d.ell0 / m_sq;
    b2[(1, P)] = -d.a0;

    // F1j + F_1j p - F_2j/R v2 = 0
    b3[(2, F11)] = 1.0;
    b3[(2, P)] = f.f11;
    b3[(2, V2)] = -f.f21 / r;
    b3[(3, F12)] = 1.0;
    b3[(3, P)] = f.f12;
    b3[(3, V2)] = -f.f22 / r;

    // F2j - F_1j v2 = 0
    b3[(4, F21)] = 1.0;
    b3[(4, V2)] = -f.f11;
    b3[(5, F22)] = 1.0;
    b3[(5, V2)] = -f.f12;

    (b0, b2, b3)
}

/// Boundary trace `U0` spanning the kernel of `s B0 + i omega B2 + B3`,
/// together with `A1 U0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryKernel {
    pub u0: CVector7,
    pub a1u0: CVector7,
}

/// Closed-form kernel vector, scaled so its first component is
/// `s - i l0 omega / M^2`. `A1 U0` is formed by multiplication.
pub fn boundary_kernel(
    d: &DerivedQuantities,
    mats: &SystemMatrices,
    s: Complex64,
    omega: f64,
) -> BoundaryKernel {
    let u0 = kernel_vector(d, s, omega);
    let a1 = mats.a1.map(Complex64::from);
    BoundaryKernel { u0, a1u0: a1 * u0 }
}

pub fn kernel_vector(d: &DerivedQuantities, s: Complex64, omega: f64) -> CVector7 {
    let f = d.deformation;
    let m_sq = d.mach * d.mach;
    let r = d.ratio;
    let a0 = d.a0;
    let lw = I * (d.ell0 * omega / m_sq);
    let iw = I * omega;
    CVector7::from([
        s - lw,
        -d.d0 * s + lw,
        iw * a0,
        -f.f11 * s + iw * (a0 * f.f21 / r + d.ell0 * f.f11 / m_sq),
        iw * (a0 * f.f11),
        -f.f12 * s + iw * (a0 * f.f22 / r + d.ell0 * f.f12 / m_sq),
        iw * (a0 * f.f12),
    ])
}

/// Factored closed form of `A1 U0`, used only as a cross-check of the product.
pub fn a1u0_closed_form(d: &DerivedQuantities, s: Complex64, omega: f64) -> CVector7 {
    let f = d.deformation;
    let m_sq = d.mach * d.mach;
    let pre = -d.beta_sq() / (2.0 * m_sq);
    let iw = I * omega;
    let zero = Complex64::new(0.0, 0.0);
    CVector7::from([
        s,
        iw * d.ell0 - s * m_sq,
        iw * (d.ratio * (m_sq - d.m1 * d.m1)),
        iw * f.f21 - s * f.f11,
        zero,
        iw * f.f22 - s * f.f12,
        zero,
    ]) * Complex64::from(pre)
}

/// `|(s B0 + i omega B2 + B3) U0| / |U0|`.
pub fn kernel_residual(
    mats: &SystemMatrices,
    kernel: &BoundaryKernel,
    s: Complex64,
    omega: f64,
) -> f64 {
    let res = mats.boundary_symbol(s, omega) * kernel.u0;
    res.norm() / kernel.u0.norm()
}

/// Singular values of `s B0 + i omega B2 + B3`, descending.
pub fn boundary_singular_values(mats: &SystemMatrices, s: Complex64, omega: f64) -> Vec<f64> {
    let m = mats.boundary_symbol(s, omega);
    let svd = m.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Deformation, ShockParameters};
    use approx::assert_relative_eq;

    fn derived(m: f64, r: f64, f: Deformation) -> DerivedQuantities {
        ShockParameters::new(m, r, f).unwrap().derive().unwrap()
    }

    #[test]
    fn gas_block_structure() {
        let d = derived(0.8, 1.2, Deformation::ZERO);
        let mats = SystemMatrices::assemble(&d);
        for r in 0..7 {
            for c in 0..7 {
                let coupled = (r, c) == (0, 1) || (r, c) == (1, 0);
                if r != c && !coupled {
                    assert_eq!(mats.a1[(r, c)], 0.0, "({r},{c})");
                }
            }
        }
        // eigenvalues of [[1,1],[1,M^2]], then M^2 (v2) and four ones
        let m2 = 0.64;
        let disc = ((1.0 - m2) * (1.0 - m2) + 4.0f64).sqrt();
        let lo = 0.5 * (1.0 + m2 - disc);
        let hi = 0.5 * (1.0 + m2 + disc);
        let ev = mats.a1_eigenvalues();
        assert_relative_eq!(ev[0], lo, epsilon = 1e-14);
        assert_relative_eq!(ev[6], hi, epsilon = 1e-14);
        assert_relative_eq!(ev[1], m2, epsilon = 1e-14);
        for x in &ev[2..6] {
            assert_relative_eq!(*x, 1.0, epsilon = 1e-14);
        }
        assert_eq!(
            mats.a1_signature(),
            Signature {
                negative: 1,
                zero: 0,
                positive: 6
            }
        );
    }

    #[test]
    fn gas_signature_flips_at_sonic() {
        // one negative eigenvalue iff M < 1 when F = 0
        let sub = SystemMatrices::assemble(&derived(0.99, 1.0, Deformation::ZERO));
        assert_eq!(sub.a1_signature().negative, 1);
        let mut d = derived(0.5, 1.0, Deformation::ZERO);
        d.mach = 1.2;
        let sup = SystemMatrices::assemble(&d);
        assert_eq!(sup.a1_signature().negative, 0);
    }

    #[test]
    fn stretched_entries_and_signature() {
        let d = derived(1.0, 3.0, Deformation::diag(0.5, 0.5));
        let mats = SystemMatrices::assemble(&d);
        assert_eq!(mats.a1[(3, 1)], -0.5);
        assert_eq!(mats.a1[(1, 3)], -0.5);
        assert_eq!(mats.a1[(5, 2)], 0.0);
        assert_eq!(
            mats.a1_signature(),
            Signature {
                negative: 1,
                zero: 0,
                positive: 6
            }
        );
        assert!(mats.a1_det().abs() > 1e-12);
        assert_eq!(
            mats.a0,
            Real7::from_diagonal(&SVector::from([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]))
        );
    }

    #[test]
    fn exact_symmetry() {
        let d = derived(0.9, 2.0, Deformation::new(0.3, -0.8, 1.4, 0.2));
        let mats = SystemMatrices::assemble(&d);
        assert_eq!(mats.a1, mats.a1.transpose());
        assert_eq!(mats.a2, mats.a2.transpose());
        assert!(mats.a0.diagonal().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn boundary_rows_match_conditions() {
        let d = derived(0.9, 2.0, Deformation::new(0.3, -0.8, 1.4, 0.2));
        let mats = SystemMatrices::assemble(&d);
        let m_sq = 0.81;
        let row0: Vec<f64> = mats.b3.row(0).iter().copied().collect();
        assert_eq!(
            row0,
            vec![d.d0, 1.0, -d.ell0 / (m_sq * 2.0), 0.0, 0.0, 0.0, 0.0]
        );
        let row4: Vec<f64> = mats.b3.row(4).iter().copied().collect();
        assert_eq!(row4, vec![0.0, 0.0, -0.3, 0.0, 1.0, 0.0, 0.0]);
        let row5: Vec<f64> = mats.b3.row(5).iter().copied().collect();
        assert_eq!(row5, vec![0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 1.0]);
        // B0 lives only in the front row, on v2
        for r in 0..6 {
            for c in 0..7 {
                let expect = if (r, c) == (1, V2) { 1.0 } else { 0.0 };
                assert_eq!(mats.b0[(r, c)], expect);
            }
        }
        assert_eq!(mats.b2[(1, P)], -d.a0);
        assert_eq!(mats.b2[(1, V2)], -d.ell0 / m_sq);
        assert_eq!(mats.b2.iter().filter(|x| **x != 0.0).count(), 2);
        assert_eq!(mats.b3.row(1).iter().filter(|x| **x != 0.0).count(), 0);
    }

    #[test]
    fn one_dimensional_kernel() {
        let f = Deformation::new(0.4, 0.7, -0.2, 0.9);
        let d = derived(0.95, 1.7, f);
        let s = Complex64::new(0.7, -0.3);
        let u = kernel_vector(&d, s, 0.0);
        let expect = [1.0, -d.d0, 0.0, -f.f11, 0.0, -f.f12, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((u[k] - s * *e).norm() < 1e-15, "component {k}");
        }
        let mats = SystemMatrices::assemble(&d);
        let ker = boundary_kernel(&d, &mats, s, 0.0);
        let first = s * (1.0 - d.d0);
        assert!((ker.a1u0[0] - first).norm() < 1e-14);
        assert!((first + s * d.beta_sq() / (2.0 * d.mach * d.mach)).norm() < 1e-14);
    }

    #[test]
    fn third_component_of_a1u0() {
        let d = derived(0.95, 1.7, Deformation::new(0.4, 0.7, -0.2, 0.9));
        let mats = SystemMatrices::assemble(&d);
        let omega = 1.3;
        let ker = boundary_kernel(&d, &mats, Complex64::new(0.2, 0.5), omega);
        let m_sq = d.mach * d.mach;
        let expect = I * (d.a0 * omega * (m_sq - d.m1 * d.m1));
        assert!((ker.a1u0[2] - expect).norm() < 1e-14);
        let alt = -I * (d.beta_sq() / (2.0 * m_sq) * d.ratio * (m_sq - d.m1 * d.m1) * omega);
        assert!((ker.a1u0[2] - alt).norm() < 1e-14);
    }

    #[test]
    fn product_matches_factored_form() {
        let d = derived(0.95, 1.7, Deformation::new(0.4, 0.7, -0.2, 0.9));
        let mats = SystemMatrices::assemble(&d);
        let s = Complex64::new(0.3, 1.1);
        let ker = boundary_kernel(&d, &mats, s, -0.8);
        let cf = a1u0_closed_form(&d, s, -0.8);
        assert!((ker.a1u0 - cf).norm() < 1e-14 * cf.norm().max(1.0));
    }

    #[test]
    fn kernel_has_rank_six() {
        let d = derived(0.95, 1.7, Deformation::new(0.4, 0.7, -0.2, 0.9));
        let mats = SystemMatrices::assemble(&d);
        let s = Complex64::new(0.3, 1.1);
        let ker = boundary_kernel(&d, &mats, s, 0.6);
        assert!(kernel_residual(&mats, &ker, s, 0.6) < 1e-14);
        let sv = boundary_singular_values(&mats, s, 0.6);
        assert_eq!(sv.len(), 6);
        assert!(sv[5] > 1e-3);
    }

    #[test]
    fn kernel_is_homogeneous() {
        let d = derived(0.95, 1.7, Deformation::new(0.4, 0.7, -0.2, 0.9));
        let s = Complex64::new(0.3, 1.1);
        let t = 2.5;
        let a = kernel_vector(&d, s * t, 0.6 * t);
        let b = kernel_vector(&d, s, 0.6) * Complex64::from(t);
        assert!((a - b).norm() < 1e-14);
    }
}
