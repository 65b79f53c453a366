//! LU factorization with partial pivoting for complex tridiagonal systems.
//!
//! Row interchanges fill one extra superdiagonal, so the `U` factor has
//! bandwidth two. Layout follows the classic `gttrf`/`gttrs` pair.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// `|re| + |im|`: a cheap magnitude that is good enough for pivot choice.
fn cabs1<T: Real>(z: Cplx<T>) -> T {
    z.re.abs() + z.im.abs()
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    /// multipliers of `L`
    lower: Vec<Cplx<T>>,
    /// diagonal of `U`
    diag: Vec<Cplx<T>>,
    /// first superdiagonal of `U`
    upper: Vec<Cplx<T>>,
    /// fill-in second superdiagonal of `U`
    upper2: Vec<Cplx<T>>,
    /// `swapped[i]`: rows `i` and `i + 1` were exchanged at step `i`
    swapped: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    /// Factors the matrix with subdiagonal `sub` (`A[i+1][i]`), diagonal
    /// `diag`, and superdiagonal `sup` (`A[i][i+1]`).
    pub fn factor(sub: &[Cplx<T>], diag: &[Cplx<T>], sup: &[Cplx<T>]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::Solver("empty matrix".into()));
        }
        if sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::Solver(format!(
                "band lengths {}, {}, {} do not describe an {n} x {n} tridiagonal matrix",
                sub.len(),
                n,
                sup.len()
            )));
        }
        let zero = Cplx::new(T::zero(), T::zero());
        let mut lower = sub.to_vec();
        let mut d = diag.to_vec();
        let mut u1 = sup.to_vec();
        let mut u2 = vec![zero; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if cabs1(d[i]) >= cabs1(lower[i]) {
                if d[i] != zero {
                    let fact = lower[i] / d[i];
                    lower[i] = fact;
                    d[i + 1] = d[i + 1] - fact * u1[i];
                }
            } else {
                let fact = d[i] / lower[i];
                d[i] = lower[i];
                lower[i] = fact;
                let temp = u1[i];
                u1[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 1 < n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -fact * u1[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(i) = d.iter().position(|z| *z == zero || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Solver(format!("singular pivot at row {i}")));
        }
        Ok(Self { lower, diag: d, upper: u1, upper2: u2, swapped })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [Cplx<T>]) -> Result<()> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::Solver(format!("right-hand side has length {}, expected {n}", b.len())));
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.lower[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.lower[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.diag[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.upper[n - 2] * b[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.upper[i] * b[i + 1] - self.upper2[i] * b[i + 2]) / self.diag[i];
        }
        Ok(())
    }
}

/// `y = A x` for the tridiagonal matrix `(sub, diag, sup)`.
pub fn tridiag_matvec<T: Real>(sub: &[Cplx<T>], diag: &[Cplx<T>], sup: &[Cplx<T>], x: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut acc = diag[i] * x[i];
            if i > 0 {
                acc = acc + sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc = acc + sup[i] * x[i + 1];
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn pivoting_path_is_exercised() {
        // tiny leading diagonal forces an interchange on the first step
        let sub = vec![c(1.0, 0.0), c(2.0, 1.0)];
        let diag = vec![c(1e-12, 0.0), c(0.5, -0.1), c(3.0, 0.0)];
        let sup = vec![c(4.0, 0.0), c(-1.0, 2.0)];
        let lu = TridiagonalLu::factor(&sub, &diag, &sup).unwrap();
        assert!(lu.swapped[0]);
        let x_true = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.25, -1.0)];
        let mut b = tridiag_matvec(&sub, &diag, &sup, &x_true);
        lu.solve_in_place(&mut b).unwrap();
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn one_by_one() {
        let lu = TridiagonalLu::factor(&[], &[c(2.0, 2.0)], &[]).unwrap();
        let mut b = vec![c(4.0, 0.0)];
        lu.solve_in_place(&mut b).unwrap();
        assert!((b[0] - c(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let z = c(0.0, 0.0);
        let r = TridiagonalLu::factor(&[z], &[z, c(1.0, 0.0)], &[z]);
        assert!(matches!(r, Err(Error::Solver(_))));
    }

    #[test]
    fn f32_solve() {
        let one = Cplx::new(1.0f32, 0.0);
        let lu = TridiagonalLu::factor(&[one], &[Cplx::new(3.0, 0.5), Cplx::new(3.0, 0.5)], &[one]).unwrap();
        let mut b = vec![one, one];
        lu.solve_in_place(&mut b).unwrap();
        let back = tridiag_matvec(&[one], &[Cplx::new(3.0, 0.5), Cplx::new(3.0, 0.5)], &[one], &b);
        assert!((back[0] - one).norm() < 1e-5);
    }

    proptest! {
        #[test]
        fn solve_inverts_matvec(
            entries in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3 * 12),
            shift in 0.05f64..1.0,
        ) {
            let n = 12;
            let z = |k: usize| c(entries[k].0, entries[k].1);
            let sub: Vec<_> = (0..n - 1).map(z).collect();
            let diag: Vec<_> = (0..n).map(|k| z(n + k) + c(0.0, shift)).collect();
            let sup: Vec<_> = (0..n - 1).map(|k| z(2 * n + k)).collect();
            let x_true: Vec<_> = (0..n).map(|k| c(k as f64, 1.0 - k as f64)).collect();
            let mut b = tridiag_matvec(&sub, &diag, &sup, &x_true);
            if let Ok(lu) = TridiagonalLu::factor(&sub, &diag, &sup) {
                lu.solve_in_place(&mut b).unwrap();
                let back = tridiag_matvec(&sub, &diag, &sup, &b);
                let orig = tridiag_matvec(&sub, &diag, &sup, &x_true);
                let scale: f64 = orig.iter().map(|v| v.norm()).fold(1.0, f64::max);
                for (u, v) in back.iter().zip(&orig) {
                    prop_assert!((u - v).norm() <= 1e-8 * scale);
                }
            }
        }
    }
}
