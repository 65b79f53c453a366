//! Second-order finite-difference model of `P(h) - E ∓ iε` on a truncated
//! line or on a radial half-line sector.

use crate::banded::{tridiag_matvec, TridiagonalLu};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::scalar::{Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// `x in [-L, L]`, potential `V(|x|)`
    Line,
    /// `r in [r_min, r_max]` for one angular sector `ell`
    HalfLine { ell: usize },
}

/// Which sign of `∓ iε`: `Plus` is the upper sign, giving `P - E - iε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    /// Imaginary part of every diagonal entry, per unit `ε`.
    fn imag_factor<T: Real>(self) -> T {
        match self {
            Sign::Plus => -T::one(),
            Sign::Minus => T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    pub geometry: Geometry,
    pub dim: usize,
    pub r_min: T,
    pub r_max: T,
    pub n_points: usize,
    pub spacing: T,
}

impl<T: Real> Grid1D<T> {
    fn build(geometry: Geometry, dim: usize, r_min: T, r_max: T, n_points: usize) -> Result<Self> {
        if dim == 2 || dim == 0 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if matches!(geometry, Geometry::Line) && dim != 1 {
            return Err(Error::Domain("line geometry models n = 1 only".into()));
        }
        if matches!(geometry, Geometry::HalfLine { .. }) && !(r_min > T::zero()) {
            return Err(Error::Domain("half-line grids need r_min > 0".into()));
        }
        if n_points < 2 || !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::Domain(format!("bad grid: [{r_min}, {r_max}] with {n_points} points")));
        }
        let spacing = (r_max - r_min) / T::from_usize_lossy(n_points - 1);
        Ok(Self { geometry, dim, r_min, r_max, n_points, spacing })
    }

    /// `[-half_width, half_width]` with `n_points` nodes.
    pub fn line(half_width: T, n_points: usize) -> Result<Self> {
        Self::build(Geometry::Line, 1, -half_width, half_width, n_points)
    }

    pub fn half_line(dim: usize, ell: usize, r_min: T, r_max: T, n_points: usize) -> Result<Self> {
        Self::build(Geometry::HalfLine { ell }, dim, r_min, r_max, n_points)
    }

    /// Same geometry and extent with the fewest nodes meeting `spacing <= limit`.
    pub fn with_spacing_at_most(&self, limit: T) -> Result<Self> {
        let n = ((self.r_max - self.r_min) / limit).ceil().to_usize().unwrap_or(usize::MAX).saturating_add(1);
        Self::build(self.geometry, self.dim, self.r_min, self.r_max, n.max(2))
    }

    pub fn node(&self, i: usize) -> T {
        self.r_min + self.spacing * T::from_usize_lossy(i)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Radius `|x|` of node `i`.
    pub fn radius(&self, i: usize) -> T {
        self.node(i).abs()
    }
}

/// Largest spacing that resolves the local wavelength: `h / (10 sqrt(E + max(0, -min V)))`.
pub fn resolution_limit<T: Real>(h: T, energy: T, v_min: T) -> T {
    h / (T::lit(10.0) * (energy + (-v_min).max(T::zero())).sqrt())
}

/// `V(r) + h^2 [ell (ell + n - 2) + (n - 1)(n - 3)/4] / r^2` on a half-line,
/// `V(|x|)` on the line.
pub fn effective_potential<T: Real>(spec: &PotentialSpec<T>, grid: &Grid1D<T>, h: T, x: T) -> Result<T> {
    if grid.dim == 2 || grid.dim == 0 {
        return Err(Error::UnsupportedDimension(grid.dim));
    }
    match grid.geometry {
        // the origin itself is evaluated as the smallest positive radius
        Geometry::Line => spec.eval_v(x.abs().max(T::min_positive_value())),
        Geometry::HalfLine { .. } => {
            if !(x > T::zero()) {
                return Err(Error::Domain(format!("half-line radius {x} must be positive")));
            }
            Ok(spec.eval_v(x)? + h * h * centrifugal::<T>(grid) / (x * x))
        }
    }
}

/// `ell (ell + n - 2) + (n - 1)(n - 3) / 4`; zero on the line.
fn centrifugal<T: Real>(grid: &Grid1D<T>) -> T {
    match grid.geometry {
        Geometry::Line => T::zero(),
        Geometry::HalfLine { ell } => {
            let n = T::from_usize_lossy(grid.dim);
            let l = T::from_usize_lossy(ell);
            let (two, three) = (T::lit(2.0), T::lit(3.0));
            l * (l + n - two) + (n - T::one()) * (n - three) / T::lit(4.0)
        }
    }
}

/// Complex symmetric tridiagonal matrix of `-h^2 d^2 + V_eff - E ∓ iε` with
/// Dirichlet conditions beyond both ends, plus its LU factors.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    pub grid: Grid1D<T>,
    pub h: T,
    pub energy: T,
    pub eps: T,
    pub sign: Sign,
    pub diag: Vec<Cplx<T>>,
    pub offdiag: Vec<Cplx<T>>,
    pub v_eff: Vec<T>,
    lu: Option<TridiagonalLu<T>>,
}

impl<T: Real> DiscreteOperator<T> {
    /// Assembles the matrix without factoring it; `eps = 0` is allowed here.
    pub fn assemble(spec: &PotentialSpec<T>, grid: Grid1D<T>, h: T, energy: T, eps: T, sign: Sign) -> Result<Self> {
        if !(h > T::zero() && energy > T::zero() && eps >= T::zero()) {
            return Err(Error::Precondition(format!("need h > 0, E > 0, eps >= 0; got {h}, {energy}, {eps}")));
        }
        let v: Vec<T> = (0..grid.n_points)
            .map(|i| spec.eval_v(grid.radius(i).max(T::min_positive_value())))
            .collect::<Result<_>>()?;
        let v_min = v.iter().copied().fold(T::infinity(), T::min);
        let v_eff: Vec<T> = match grid.geometry {
            Geometry::Line => v,
            Geometry::HalfLine { .. } => {
                let c = centrifugal::<T>(&grid) * h * h;
                (0..grid.n_points).map(|i| v[i] + c / (grid.node(i) * grid.node(i))).collect()
            }
        };
        let limit = resolution_limit(h, energy, v_min);
        if grid.spacing > limit {
            let suggested_points = ((grid.r_max - grid.r_min) / limit).ceil().to_usize().unwrap_or(usize::MAX) + 1;
            return Err(Error::Resolution { spacing: grid.spacing.as_f64(), limit: limit.as_f64(), suggested_points });
        }
        let kin = h * h / (grid.spacing * grid.spacing);
        let two = T::lit(2.0);
        let im = sign.imag_factor::<T>() * eps;
        let diag = v_eff.iter().map(|&v| Cplx::new(two * kin + v - energy, im)).collect();
        let offdiag = vec![Cplx::new(-kin, T::zero()); grid.n_points - 1];
        Ok(Self { grid, h, energy, eps, sign, diag, offdiag, v_eff, lu: None })
    }

    /// Assembles and factors; `eps` must be positive.
    pub fn discretize(spec: &PotentialSpec<T>, grid: Grid1D<T>, h: T, energy: T, eps: T, sign: Sign) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::Precondition(format!("eps = {eps} must be positive for solves")));
        }
        Self::assemble(spec, grid, h, energy, eps, sign)?.factorize()
    }

    /// Factors an assembled operator so that it can be solved against.
    pub fn factorize(mut self) -> Result<Self> {
        if !(self.eps > T::zero()) {
            return Err(Error::Precondition(format!("eps = {} must be positive for solves", self.eps)));
        }
        self.lu = Some(TridiagonalLu::factor(&self.offdiag, &self.diag, &self.offdiag)?);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.grid.n_points
    }

    /// `A x`.
    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        tridiag_matvec(&self.offdiag, &self.diag, &self.offdiag, x)
    }

    /// `(A ± iε) x`: the discretized `P(h) - E` without the shift.
    pub fn apply_unshifted(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let shift = Cplx::new(T::zero(), self.sign.imag_factor::<T>() * self.eps);
        self.apply(x).into_iter().zip(x).map(|(y, &xi)| y - shift * xi).collect()
    }

    fn factors(&self) -> Result<&TridiagonalLu<T>> {
        self.lu.as_ref().ok_or_else(|| Error::Solver("operator was assembled without factorization".into()))
    }

    /// Solves `A x = rhs` with one step of iterative refinement.
    pub fn solve(&self, rhs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let lu = self.factors()?;
        if rhs.len() != self.n() {
            return Err(Error::Solver(format!("rhs length {} != {}", rhs.len(), self.n())));
        }
        let mut x = rhs.to_vec();
        lu.solve_in_place(&mut x)?;
        let ax = self.apply(&x);
        let mut correction: Vec<Cplx<T>> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        lu.solve_in_place(&mut correction)?;
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi = *xi + ci;
        }
        Ok(x)
    }

    /// Solves `A^* x = rhs`. `A` is complex symmetric, so `A^* = conj(A)` and
    /// `x = conj(A^{-1} conj(rhs))`.
    pub fn solve_adjoint(&self, rhs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let conj: Vec<Cplx<T>> = rhs.iter().map(|z| z.conj()).collect();
        Ok(self.solve(&conj)?.into_iter().map(|z| z.conj()).collect())
    }
}
