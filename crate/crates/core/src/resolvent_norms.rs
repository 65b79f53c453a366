//! Weighted resolvent norms `‖W (P - E ∓ iε)^{-1} W‖` and the discrete
//! Carleman residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{largest_singular_value, DenseMatrix};
use crate::discrete_operator::{DiscreteOperator, Sign};
use crate::error::{Error, Result};
use crate::phase_weight::PhaseWeightProfile;
use crate::scalar::{norm2, Cplx, Real};

/// Restarts allowed after a run exhausts `max_iter`.
pub const MAX_RESTARTS: usize = 3;
/// Consecutive iterations that must meet the tolerance.
const STREAK: usize = 3;
/// Per-point exponent clamp for `e^{phi/h}`, in natural-log units.
const EXP_CLAMP: f64 = 700.0;

/// Decay weight `<x>^{-s}`, optionally multiplied by `1_{|x| >= M}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec<T> {
    pub s: T,
    pub cutoff: Option<T>,
}

impl<T: Real> WeightSpec<T> {
    pub fn new(s: T, cutoff: Option<T>) -> Result<Self> {
        if !(s > T::lit(0.5)) || !s.is_finite() {
            return Err(Error::Precondition(format!("weight exponent s = {s} must exceed 1/2")));
        }
        if let Some(m) = cutoff {
            if !(m >= T::zero()) || !m.is_finite() {
                return Err(Error::Precondition(format!("cutoff {m} must be a finite nonnegative radius")));
            }
        }
        Ok(Self { s, cutoff })
    }

    pub fn eval(&self, x: T) -> T {
        let r = x.abs();
        if self.cutoff.is_some_and(|m| r < m) {
            return T::zero();
        }
        (T::one() + r * r).powf(-self.s / T::lit(2.0))
    }

    pub fn values(&self, nodes: &[T]) -> Vec<T> {
        nodes.iter().map(|&x| self.eval(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult<T> {
    pub value: T,
    pub iterations: usize,
    pub rel_tol_achieved: T,
    pub converged: bool,
    pub h: T,
    pub energy: T,
    pub eps: T,
    pub s: T,
    pub cutoff: Option<T>,
    pub sign: Sign,
}

fn hadamard<T: Real>(w: &[T], x: &[Cplx<T>]) -> Vec<Cplx<T>> {
    w.iter().zip(x).map(|(&a, &z)| z * a).collect()
}

/// `G^* G x` with `G = W R W`.
fn apply_gram<T: Real>(op: &DiscreteOperator<T>, w: &[T], x: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
    let y = op.solve(&hadamard(w, x))?;
    let w2: Vec<T> = w.iter().map(|&a| a * a).collect();
    let z = op.solve_adjoint(&hadamard(&w2, &y))?;
    Ok(hadamard(w, &z))
}

struct PowerRun<T> {
    lambda: T,
    rel_err: T,
    iterations: usize,
    converged: bool,
}

fn power_run<T: Real>(op: &DiscreteOperator<T>, w: &[T], tol: T, max_iter: usize, rng: &mut ChaCha8Rng) -> Result<PowerRun<T>> {
    // a real start vector keeps the two signs exact conjugates of each other
    let mut x: Vec<Cplx<T>> = w
        .iter()
        .map(|&wi| Cplx::new(if wi > T::zero() { T::lit(rng.gen_range(-1.0..1.0)) } else { T::zero() }, T::zero()))
        .collect();
    let nx = norm2(&x);
    if nx == T::zero() {
        // every weight vanishes: G = 0
        return Ok(PowerRun { lambda: T::zero(), rel_err: T::zero(), iterations: 0, converged: true });
    }
    x.iter_mut().for_each(|z| *z = *z / nx);
    let two = T::lit(2.0);
    let (mut prev, mut prev_step) = (T::zero(), T::infinity());
    let mut streak = 0;
    let mut rel_err = T::infinity();
    for it in 1..=max_iter {
        let z = apply_gram(op, w, &x)?;
        let lambda = x.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum::<T>().max(T::zero());
        let nz = norm2(&z);
        if nz == T::zero() {
            return Ok(PowerRun { lambda: T::zero(), rel_err: T::zero(), iterations: it, converged: true });
        }
        x = z.into_iter().map(|v| v / nz).collect();
        let step = (lambda - prev).abs();
        if it > 1 {
            // geometric extrapolation of the remaining gap
            let rho = if prev_step > T::zero() { (step / prev_step).min(T::lit(0.999)) } else { T::zero() };
            rel_err = step / (T::one() - rho) / lambda / two;
            streak = if rel_err <= tol { streak + 1 } else { 0 };
            if streak >= STREAK {
                return Ok(PowerRun { lambda, rel_err, iterations: it, converged: true });
            }
        }
        prev_step = step;
        prev = lambda;
    }
    Ok(PowerRun { lambda: prev, rel_err, iterations: max_iter, converged: false })
}

/// Largest singular value of `W R W` by power iteration on `G^* G`.
///
/// `tol` bounds the relative error of the singular value itself. Runs that
/// exhaust `max_iter` are restarted from fresh seeded vectors up to
/// [`MAX_RESTARTS`] times; the best estimate is kept.
pub fn weighted_resolvent_norm<T: Real>(
    op: &DiscreteOperator<T>,
    weights: &WeightSpec<T>,
    tol: T,
    max_iter: usize,
    seed: u64,
) -> Result<NormResult<T>> {
    if !(tol > T::lit(1e-12) && tol < T::lit(1e-2)) {
        return Err(Error::Precondition(format!("tolerance {tol} outside (1e-12, 1e-2)")));
    }
    if max_iter == 0 {
        return Err(Error::Precondition("max_iter must be positive".into()));
    }
    let w = weights.values(&op.grid.nodes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = power_run(op, &w, tol, max_iter, &mut rng)?;
    let mut iterations = best.iterations;
    for _ in 0..MAX_RESTARTS {
        if best.converged {
            break;
        }
        let run = power_run(op, &w, tol, max_iter, &mut rng)?;
        iterations += run.iterations;
        if run.converged || run.lambda > best.lambda {
            best = run;
        }
    }
    Ok(NormResult {
        value: best.lambda.sqrt(),
        iterations,
        rel_tol_achieved: best.rel_err,
        converged: best.converged,
        h: op.h,
        energy: op.energy,
        eps: op.eps,
        s: weights.s,
        cutoff: weights.cutoff,
        sign: op.sign,
    })
}

/// Reference value from the explicitly inverted dense matrix; small grids only.
pub fn dense_norm<T: Real>(op: &DiscreteOperator<T>, weights: &WeightSpec<T>) -> Result<T> {
    if op.n() > 400 {
        return Err(Error::Precondition(format!("dense reference limited to 400 points, got {}", op.n())));
    }
    let w = weights.values(&op.grid.nodes());
    let a = DenseMatrix::from_tridiagonal(&op.offdiag, &op.diag, &op.offdiag);
    largest_singular_value(&a.inverse()?.scale(&w, &w))
}

/// Both sides of the discrete Carleman estimate, divided by `e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanResidual<T> {
    /// `‖<x>^{-s} e^{phi/h} v‖^2`
    pub lhs: T,
    /// `h^{-2} ‖<x>^{s} e^{phi/h} (P - E) v‖^2 + (ε/h) ‖e^{phi/h} v‖^2`
    pub rhs: T,
    /// common natural-log factor removed from both sides
    pub log_scale: T,
    /// some point needed the exponent clamp
    pub clamped: bool,
}

impl<T: Real> CarlemanResidual<T> {
    /// `lhs / rhs`; `0` when both vanish.
    pub fn ratio(&self) -> Result<T> {
        if self.lhs == T::zero() {
            return Ok(T::zero());
        }
        let r = self.lhs / self.rhs;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Numeric { lo: 0.0, hi: 0.0, msg: "Carleman ratio overflows".into() })
        }
    }
}

/// Evaluates the Carleman residual for `v`, which must vanish at both end nodes.
/// The operator's own `ε` enters only through the second right-hand term.
pub fn carleman_residual<T: Real>(
    op: &DiscreteOperator<T>,
    profile: &PhaseWeightProfile<T>,
    s: T,
    v: &[Cplx<T>],
) -> Result<CarlemanResidual<T>> {
    let n = op.n();
    if v.len() != n {
        return Err(Error::Precondition(format!("vector length {} != {n}", v.len())));
    }
    let zero = Cplx::new(T::zero(), T::zero());
    if v[0] != zero || v[n - 1] != zero {
        return Err(Error::Precondition("v must vanish at the boundary nodes".into()));
    }
    let nodes = op.grid.nodes();
    let log_w: Vec<T> = nodes.iter().map(|&x| profile.phi_interp(x) / op.h).collect();
    let top = log_w.iter().copied().fold(T::neg_infinity(), T::max);
    let clamp = T::lit(EXP_CLAMP);
    let mut clamped = false;
    let e: Vec<T> = log_w
        .iter()
        .map(|&l| {
            let d = l - top;
            if d < -clamp {
                clamped = true;
            }
            d.max(-clamp).exp()
        })
        .collect();
    let pv = op.apply_unshifted(v);
    let dx = op.grid.spacing;
    let (mut lhs, mut first, mut second) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let bracket = T::one() + nodes[i] * nodes[i];
        let ev2 = e[i] * e[i] * v[i].norm_sqr();
        lhs = lhs + bracket.powf(-s) * ev2;
        first = first + bracket.powf(s) * e[i] * e[i] * pv[i].norm_sqr();
        second = second + ev2;
    }
    let rhs = (first / (op.h * op.h) + second * op.eps / op.h) * dx;
    Ok(CarlemanResidual { lhs: lhs * dx, rhs, log_scale: top * T::lit(2.0), clamped })
}

/// Shape of the random test functions fed to [`carleman_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpBatch<T> {
    pub count: usize,
    pub center_range: (T, T),
    pub width_range: (T, T),
    /// frequency range as multiples of `sqrt(E)`
    pub frequency_range: (T, T),
    pub seed: u64,
}

/// Smooth compactly supported bumps `chi((x - c)/w) e^{i xi x / h}` sampled on
/// the operator grid. The random draws do not depend on `h`, so equal seeds
/// give the same family of shapes at every `h`.
pub fn random_bumps<T: Real>(op: &DiscreteOperator<T>, batch: &BumpBatch<T>) -> Result<Vec<Vec<Cplx<T>>>> {
    let nodes = op.grid.nodes();
    let (lo, hi) = (op.grid.r_min, op.grid.r_max);
    let mut rng = ChaCha8Rng::seed_from_u64(batch.seed);
    let uniform = |rng: &mut ChaCha8Rng, (a, b): (T, T)| a + (b - a) * T::lit(rng.gen_range(0.0..1.0));
    let mut out = Vec::with_capacity(batch.count);
    for _ in 0..batch.count {
        let width = uniform(&mut rng, batch.width_range);
        let center = uniform(&mut rng, batch.center_range);
        let xi = uniform(&mut rng, batch.frequency_range) * op.energy.sqrt();
        if center - width <= lo || center + width >= hi {
            return Err(Error::Precondition(format!("bump at {center} with width {width} leaves the grid")));
        }
        let v = nodes
            .iter()
            .map(|&x| {
                let t = (x - center) / width;
                if t.abs() >= T::one() {
                    return Cplx::new(T::zero(), T::zero());
                }
                let amp = (T::one() - T::one() / (T::one() - t * t)).exp();
                Cplx::from_polar(amp, xi * x / op.h)
            })
            .collect();
        out.push(v);
    }
    Ok(out)
}
