//! Dense complex polynomials, coefficients in ascending order.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self(coeffs)
    }

    pub fn constant(c: Complex64) -> Self {
        Self(vec![c])
    }

    /// `a + b x`
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        Self(vec![a, b])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn leading(&self) -> Complex64 {
        *self.0.last().unwrap_or(&Complex64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.0.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly(
            (0..n)
                .map(|k| *self.0.get(k).unwrap_or(&zero) + *other.0.get(k).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly(self.0.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(Complex64::new(1.0, 0.0)), |acc, _| {
            acc.mul(self)
        })
    }

    /// All roots, with multiplicity, from the eigenvalues of the companion
    /// matrix followed by Newton polishing.
    ///
    /// A leading coefficient below `1e-14 * |coeffs|` is reported as
    /// [`Error::DegeneratePolynomial`] rather than silently dropped.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        let norm = self.norm();
        let lead = self.leading();
        if self.0.is_empty() || lead.norm() <= 1e-14 * norm || norm == 0.0 {
            return Err(Error::DegeneratePolynomial {
                leading: lead.norm(),
                norm,
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }

        let mut companion = DMatrix::<Complex64>::zeros(n, n);
        for k in 1..n {
            companion[(k, k - 1)] = Complex64::new(1.0, 0.0);
        }
        for k in 0..n {
            companion[(k, n - 1)] = -self.0[k] / lead;
        }
        let schur =
            Schur::try_new(companion, 1e-15, 10_000).ok_or(Error::DegeneratePolynomial {
                leading: lead.norm(),
                norm,
            })?;
        let (_, t) = schur.unpack();
        let roots = (0..n).map(|k| self.polish(t[(k, k)])).collect();
        Ok(roots)
    }

    /// Newton refinement; a step is kept only if it lowers `|p|`, so clustered
    /// roots are never pushed away from the cluster.
    pub fn polish(&self, mut z: Complex64) -> Complex64 {
        let target = 1e-12 * self.norm();
        let (mut p, mut dp) = self.eval_with_derivative(z);
        for _ in 0..50 {
            if p.norm() <= target * z.norm().max(1.0).powi(self.degree() as i32) || dp.norm() == 0.0
            {
                break;
            }
            let next = z - p / dp;
            let (pn, dpn) = self.eval_with_derivative(next);
            if pn.norm().is_nan() || pn.norm() >= p.norm() {
                break;
            }
            z = next;
            p = pn;
            dp = dpn;
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn product_of_linear_factors() {
        let want = [c(1.0, 0.0), c(-2.0, 1.0), c(0.5, -3.0), c(4.0, 0.0)];
        let p = want.iter().fold(Poly::constant(c(2.0, 0.0)), |acc, r| {
            acc.mul(&Poly::linear(-r, c(1.0, 0.0)))
        });
        assert_eq!(p.degree(), 4);
        let got = sorted(p.roots().unwrap());
        let want = sorted(want.to_vec());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn triple_root_cluster() {
        let p = Poly::linear(c(0.3, -0.2), c(1.0, 0.0))
            .pow(3)
            .mul(&Poly::linear(c(-2.0, 0.0), c(1.0, 0.0)));
        let roots = p.roots().unwrap();
        let near = roots
            .iter()
            .filter(|r| (*r - c(-0.3, 0.2)).norm() < 1e-4)
            .count();
        assert_eq!(near, 3);
        assert!(roots.iter().any(|r| (r - c(2.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn degenerate_leading_coefficient() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1e-20, 0.0)]);
        assert!(matches!(p.roots(), Err(Error::DegeneratePolynomial { .. })));
    }

    #[test]
    fn horner_derivative() {
        let p = Poly::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)]);
        let x = c(0.5, -1.0);
        let (v, dv) = p.eval_with_derivative(x);
        assert!((v - (c(1.0, 0.0) + c(0.0, 2.0) * x + 3.0 * x * x)).norm() < 1e-14);
        assert!((dv - (c(0.0, 2.0) + 6.0 * x)).norm() < 1e-14);
    }
}
