//! Small dense complex kernels used as an independent reference path:
//! Gaussian elimination and a cyclic Jacobi eigensolver for Hermitian
//! matrices. Intended for `n` of a few hundred at most.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Cplx::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Cplx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_tridiagonal(sub: &[Cplx<T>], diag: &[Cplx<T>], sup: &[Cplx<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = sub[i];
                m[(i, i + 1)] = sup[i];
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn conj_transpose(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale(&self, left: &[T], right: &[T]) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = m[(i, j)] * (left[i] * right[j]);
            }
        }
        m
    }

    pub fn matvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Inverse by Gaussian elimination with partial pivoting on `[A | I]`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(col);
            if a[(piv, col)].norm() == T::zero() || !a[(piv, col)].norm().is_finite() {
                return Err(Error::Solver(format!("dense matrix singular at column {col}")));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a.data[col * n + j] = a.data[col * n + j] / p;
                inv.data[col * n + j] = inv.data[col * n + j] / p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a.data[col * n + j], inv.data[col * n + j]);
                    a.data[i * n + j] = a.data[i * n + j] - f * ac;
                    inv.data[i * n + j] = inv.data[i * n + j] - f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn off_diagonal_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s = s + self[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi sweeps.
///
/// Each rotation first removes the phase of `a[p][q]` and then applies the
/// real symmetric Jacobi rotation to the resulting 2 x 2 block.
pub fn hermitian_eigenvalues<T: Real>(m: &DenseMatrix<T>, max_sweeps: usize) -> Result<Vec<T>> {
    let n = m.n;
    let mut a = m.clone();
    // symmetrize away rounding noise in the input
    for i in 0..n {
        a[(i, i)] = Cplx::new(a[(i, i)].re, T::zero());
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * T::lit(0.5);
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let target = T::epsilon() * a.frobenius();
    for _ in 0..max_sweeps {
        if a.off_diagonal_norm() <= target {
            let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    Err(Error::Solver(format!("Jacobi sweeps did not converge in {max_sweeps} sweeps")))
}

fn rotate<T: Real>(a: &mut DenseMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    let phase = apq / mag;
    let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane
    let jpp = Cplx::new(c, T::zero());
    let jpq = Cplx::new(s, T::zero());
    let jqp = phase.conj() * (-s);
    let jqq = phase.conj() * c;
    let n = a.n;
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Cplx::new(T::zero(), T::zero());
    a[(q, p)] = Cplx::new(T::zero(), T::zero());
    a[(p, p)] = Cplx::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Cplx::new(a[(q, q)].re, T::zero());
}

/// Largest singular value of a dense matrix: square root of the top
/// eigenvalue of `G^* G`.
pub fn largest_singular_value<T: Real>(g: &DenseMatrix<T>) -> Result<T> {
    let gram = g.conj_transpose().matmul(g);
    let ev = hermitian_eigenvalues(&gram, 60)?;
    Ok(ev.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt())
}
