//! Weight `w` and phase `phi` of the radial Carleman estimate, with the
//! parameter chain that fixes `eta`, `tau0`, `a` and `M`.
//!
//! Notation: `W = w / w'` and `Phi = phi'' / phi'` are the logarithmic
//! derivative ratios, and `m~` is the truncated inverse decay profile used
//! beyond `M`.

use crate::error::{Error, Result};
use crate::potential::{delta_limit, smooth_step, EnvelopeSpec};
use crate::quadrature::{adaptive_simpson, integrate_piecewise};
use crate::scalar::Real;

/// `omega = 1` up to this radius.
pub const OMEGA_FLAT: f64 = 0.55;
/// `omega = 0` from this radius on.
pub const OMEGA_ZERO: f64 = 0.7;
/// Absolute tolerance (in `ln w` and `phi`) for every quadrature panel.
pub const QUAD_TOL: f64 = 1e-10;

/// Cutoff with `omega = 1` on `|r| <= 0.55`, `omega = 0` on `|r| >= 0.7`.
pub fn omega<T: Real>(r: T) -> T {
    let lo = T::lit(OMEGA_FLAT);
    let hi = T::lit(OMEGA_ZERO);
    T::one() - smooth_step((r.abs() - lo) / (hi - lo))
}

/// Admissible `eta`: `min(1, (4 - 4 delta - delta^2) / (2 delta^2))`, or 1 for `delta = 0`.
pub fn choose_eta<T: Real>(delta: T) -> Result<T> {
    if !(delta >= T::zero() && delta < delta_limit::<T>()) {
        return Err(Error::param("choose_eta", format!("delta = {delta} outside [0, sqrt(8) - 2)")));
    }
    if delta == T::zero() {
        return Ok(T::one());
    }
    let four = T::lit(4.0);
    let upper = (four - four * delta - delta * delta) / (delta * delta);
    Ok(T::one().min(T::lit(0.5) * upper))
}

/// `tau0 = max(1, first bound, second bound)` where the second bound is
/// maximized over a sample of `[1/2, b]` with step `1e-4`.
pub fn compute_tau0<T: Real>(env: &EnvelopeSpec<T>, delta: T, eta: T, b: T) -> Result<T> {
    let quarter = T::lit(0.25);
    let denom = T::one() - delta - quarter * (T::one() + eta) * delta * delta;
    if !(denom > T::zero()) {
        return Err(Error::param(
            "compute_tau0",
            format!("1 - delta - (1 + eta) delta^2 / 4 = {denom} is not positive; eta too large"),
        ));
    }
    if b < T::one() {
        return Err(Error::param("compute_tau0", format!("b = {b} must be at least 1")));
    }
    let first = (T::lit(9.0) * T::lit(2.0).powf(delta - T::one()) * env.c1 / denom).sqrt();

    let half = T::lit(0.5);
    let step = T::lit(1e-4);
    let n = ((b - half) / step).ceil().to_usize().unwrap_or(0);
    let mut second = T::zero();
    for i in 0..=n {
        let r = (half + step * T::from_usize_lossy(i)).min(b);
        let inner = if r < T::one() {
            T::lit(2.0) * env.c1 * r.powf(-delta)
        } else {
            env.p.eval(r) + env.c0 * env.m.eval(r)
        };
        let val = T::lit(2.0) * (r + T::one()).powf(T::lit(1.5)) * inner.max(T::zero()).sqrt();
        second = second.max(val);
    }
    Ok(T::one().max(first).max(second))
}

/// `a = max(sqrt(20) tau0 E^{-1/2}, b)` and `M = 2a`.
pub fn compute_a_m<T: Real>(tau0: T, energy: T, b: T) -> (T, T) {
    let a = (T::lit(20.0).sqrt() * tau0 / energy.sqrt()).max(b);
    (a, T::lit(2.0) * a)
}

/// `m~(r) = min(E / (2 c0 m(r)), (r + 1)^(2s - 1))`; with `c0 = 0` the first
/// argument is infinite.
pub fn eval_m_tilde<T: Real>(env: &EnvelopeSpec<T>, energy: T, s: T, r: T) -> Result<T> {
    let poly = (r + T::one()).powf(T::lit(2.0) * s - T::one());
    if env.c0 == T::zero() {
        return Ok(poly);
    }
    let m = env.m_checked(r)?;
    Ok((energy / (T::lit(2.0) * env.c0 * m)).min(poly))
}

/// The full parameter ledger of the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanParams<T> {
    pub energy: T,
    /// weight exponent, `s > 1/2`
    pub s: T,
    pub delta: T,
    pub eta: T,
    pub tau0: T,
    /// transition radius
    pub b: T,
    /// start of the quadratic taper of `phi'`
    pub a: T,
    /// `M`: `phi` is constant on `[M, inf)`
    pub outer: T,
    pub h0: T,
}

impl<T: Real> CarlemanParams<T> {
    /// Checks the ledger invariants. `a` and `M` are not recomputed here, so
    /// hand-built ledgers may deviate from `compute_a_m` as long as
    /// `M > a >= b`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(energy: T, s: T, delta: T, eta: T, tau0: T, b: T, a: T, outer: T, h0: T) -> Result<Self> {
        let bad = |m: String| Err(Error::param("carleman_params", m));
        if !(energy > T::zero() && energy.is_finite()) {
            return bad(format!("energy {energy} must be positive"));
        }
        if !(s > T::lit(0.5)) {
            return bad(format!("s = {s} must exceed 1/2"));
        }
        if !(delta >= T::zero() && delta < delta_limit::<T>()) {
            return bad(format!("delta = {delta} outside [0, sqrt(8) - 2)"));
        }
        if !(eta > T::zero()) {
            return bad(format!("eta = {eta} must be positive"));
        }
        if delta > T::zero() {
            let four = T::lit(4.0);
            let upper = (four - four * delta - delta * delta) / (delta * delta);
            if !(eta < upper) {
                return bad(format!("eta = {eta} must be below {upper}"));
            }
        }
        if !(tau0 >= T::one()) {
            return bad(format!("tau0 = {tau0} must be at least 1"));
        }
        if !(b >= T::one() && a >= b && outer > a) {
            return bad(format!("need M > a >= b >= 1, got b = {b}, a = {a}, M = {outer}"));
        }
        if !(h0 > T::zero() && h0 <= T::one()) {
            return bad(format!("h0 = {h0} must lie in (0, 1]"));
        }
        Ok(Self { energy, s, delta, eta, tau0, b, a, outer, h0 })
    }

    /// Breakpoints excluded from every profile grid.
    pub fn breakpoints(&self) -> [T; 3] {
        [T::lit(0.5), self.a, self.outer]
    }

    pub fn with_h0(self, h0: T) -> Result<Self> {
        Self::new(self.energy, self.s, self.delta, self.eta, self.tau0, self.b, self.a, self.outer, h0)
    }
}

/// Closed-form pieces of the construction for one parameter ledger.
#[derive(Debug, Clone)]
pub struct PhaseWeight<T> {
    pub params: CarlemanParams<T>,
    pub env: EnvelopeSpec<T>,
}

/// Everything the pointwise inequality needs at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    pub r: T,
    pub w: T,
    pub w_prime: T,
    pub phi: T,
    pub phi_prime: T,
    pub phi_doubleprime: T,
    pub w_ratio: T,
    pub phi_ratio: T,
    pub m_tilde: T,
}

impl<T: Real> PhaseWeight<T> {
    pub fn new(params: CarlemanParams<T>, env: EnvelopeSpec<T>) -> Self {
        Self { params, env }
    }

    pub fn m_tilde(&self, r: T) -> Result<T> {
        eval_m_tilde(&self.env, self.params.energy, self.params.s, r)
    }

    /// `W = w / w'`.
    pub fn w_ratio(&self, r: T) -> Result<T> {
        if r < self.params.outer {
            Ok(r * (T::one() + omega(r)) / T::lit(2.0))
        } else {
            Ok(r / T::lit(2.0) * self.m_tilde(r)?)
        }
    }

    /// `Phi = phi'' / phi'` on `r < M` (zero beyond, where `phi' = 0`).
    pub fn phi_ratio(&self, r: T) -> T {
        let p = &self.params;
        if r < T::lit(0.5) {
            -p.delta / (T::lit(2.0) * r)
        } else if r < p.a {
            -(r + T::one()).recip()
        } else if r < p.outer {
            -T::lit(2.0) / (p.outer - r)
        } else {
            T::zero()
        }
    }

    fn near_origin_coeff(&self) -> T {
        let p = &self.params;
        T::lit(2.0).powf(T::one() - p.delta / T::lit(2.0)) * p.tau0 / T::lit(3.0)
    }

    pub fn phi_prime(&self, r: T) -> T {
        let p = &self.params;
        if r < T::lit(0.5) {
            self.near_origin_coeff() * r.powf(-p.delta / T::lit(2.0))
        } else if r < p.a {
            p.tau0 / (r + T::one())
        } else if r < p.outer {
            let q = (p.outer - r) / (p.outer - p.a);
            p.tau0 / (p.a + T::one()) * q * q
        } else {
            T::zero()
        }
    }

    pub fn phi_doubleprime(&self, r: T) -> T {
        self.phi_ratio(r) * self.phi_prime(r)
    }

    /// `phi(r)` for `r < 1/2` in closed form.
    fn phi_near_origin(&self, r: T) -> T {
        let e = T::one() - self.params.delta / T::lit(2.0);
        self.near_origin_coeff() * r.powf(e) / e
    }

    fn log_w_integrand_inner(r: T) -> T {
        T::lit(2.0) / (r * (T::one() + omega(r)))
    }

    fn log_w_increment(&self, from: T, to: T, tol: T) -> Result<T> {
        let outer = self.params.outer;
        let knots = [T::lit(OMEGA_FLAT), T::lit(OMEGA_ZERO)];
        let inner = |t: T| Self::log_w_integrand_inner(t);
        let tail = |t: T| match self.m_tilde(t) {
            Ok(m) => T::lit(2.0) / (t * m),
            Err(_) => T::nan(),
        };
        let mut acc = T::zero();
        if from < outer {
            acc = acc + integrate_piecewise(&inner, from, to.min(outer), &knots, tol)?;
        }
        if to > outer {
            acc = acc + adaptive_simpson(&tail, from.max(outer), to, tol)?;
        }
        Ok(acc)
    }

    /// Evaluates every field at a single radius, integrating from scratch
    /// with tolerance `tol`.
    pub fn sample(&self, r: T, tol: T) -> Result<ProfileSample<T>> {
        if !(r > T::zero()) {
            return Err(Error::Domain(format!("profile evaluated at r = {r}")));
        }
        let half = T::lit(0.5);
        let w = if r < half {
            r
        } else {
            (half.ln() + self.log_w_increment(half, r, tol)?).exp()
        };
        let phi = if r < half {
            self.phi_near_origin(r)
        } else {
            let f = |t: T| self.phi_prime(t);
            let upper = r.min(self.params.outer);
            self.phi_near_origin(half) + integrate_piecewise(&f, half, upper, &[self.params.a], tol)?
        };
        self.assemble(r, w, phi)
    }

    fn assemble(&self, r: T, w: T, phi: T) -> Result<ProfileSample<T>> {
        let w_ratio = self.w_ratio(r)?;
        let w_prime = if r < T::lit(0.5) { T::one() } else { w / w_ratio };
        if !(w.is_finite() && w_prime.is_finite()) {
            return Err(Error::Numeric { lo: r.as_f64(), hi: r.as_f64(), msg: "weight overflow".into() });
        }
        Ok(ProfileSample {
            r,
            w,
            w_prime,
            phi,
            phi_prime: self.phi_prime(r),
            phi_doubleprime: self.phi_doubleprime(r),
            w_ratio,
            phi_ratio: self.phi_ratio(r),
            m_tilde: self.m_tilde(r)?,
        })
    }

    /// Tabulates the construction on `grid`.
    pub fn build_profile(&self, grid: &[T]) -> Result<PhaseWeightProfile<T>> {
        validate_profile_grid(grid, &self.params)?;
        let tol = T::lit(QUAD_TOL);
        let half = T::lit(0.5);
        let outer = self.params.outer;
        let mut out = PhaseWeightProfile::with_capacity(self.params, grid.len());

        let mut log_w = half.ln();
        let mut phi = self.phi_near_origin(half);
        let mut pos = half;
        let phi_prime = |t: T| self.phi_prime(t);
        let mut phi_at_outer = None;
        for &r in grid {
            let sample = if r < half {
                self.assemble(r, r, self.phi_near_origin(r))?
            } else {
                log_w = log_w + self.log_w_increment(pos, r, tol)?;
                if r < outer {
                    phi = phi + integrate_piecewise(&phi_prime, pos, r, &[self.params.a], tol)?;
                } else {
                    let at_outer = match phi_at_outer {
                        Some(v) => v,
                        None => {
                            let v = phi + integrate_piecewise(&phi_prime, pos, outer, &[self.params.a], tol)?;
                            phi_at_outer = Some(v);
                            v
                        }
                    };
                    phi = at_outer;
                }
                pos = r;
                self.assemble(r, log_w.exp(), phi)?
            };
            out.push(sample);
        }
        out.phi_at_outer = match phi_at_outer {
            Some(v) => v,
            None => phi + integrate_piecewise(&phi_prime, pos.max(half), outer, &[self.params.a], tol)?,
        };
        Ok(out)
    }
}

fn validate_profile_grid<T: Real>(grid: &[T], params: &CarlemanParams<T>) -> Result<()> {
    if grid.is_empty() || !(grid[0] > T::zero()) {
        return Err(Error::Domain("profile grid must be non-empty and start at r > 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("profile grid must be strictly increasing".into()));
    }
    for bp in params.breakpoints() {
        if grid.contains(&bp) {
            return Err(Error::Domain(format!("profile grid contains breakpoint {bp}")));
        }
    }
    Ok(())
}

/// Default radial grid: geometric on `(r_min, 1)` with ratio `1 + step`,
/// uniform with `step` on `[1, 3M]`, every breakpoint nudged half a step away.
pub fn default_grid<T: Real>(params: &CarlemanParams<T>, r_min: T, step: T) -> Vec<T> {
    let mut grid = Vec::new();
    let ratio = T::one() + step;
    let mut r = r_min;
    while r < T::one() {
        grid.push(r);
        r = r * ratio;
    }
    let end = T::lit(3.0) * params.outer;
    let n = ((end - T::one()) / step).ceil().to_usize().unwrap_or(0);
    grid.extend((0..=n).map(|i| T::one() + step * T::from_usize_lossy(i)));
    avoid_breakpoints(&mut grid, &params.breakpoints());
    grid
}

/// Moves grid points that sit on (or within a quarter step of) a breakpoint
/// to the midpoint with their right neighbour.
pub fn avoid_breakpoints<T: Real>(grid: &mut [T], breakpoints: &[T]) {
    let n = grid.len();
    for &bp in breakpoints {
        for i in 0..n {
            let local = if i + 1 < n {
                grid[i + 1] - grid[i]
            } else if i > 0 {
                grid[i] - grid[i - 1]
            } else {
                T::one()
            };
            if (grid[i] - bp).abs() < T::lit(0.25) * local {
                grid[i] = if i + 1 < n { T::lit(0.5) * (bp + grid[i + 1]) } else { bp + T::lit(0.5) * local };
                if grid[i] <= bp {
                    grid[i] = bp + T::lit(0.5) * local;
                }
            }
        }
    }
}

/// Tabulated `w`, `phi` and their derived ratios, aligned with `grid`.
#[derive(Debug, Clone)]
pub struct PhaseWeightProfile<T> {
    pub params: CarlemanParams<T>,
    pub grid: Vec<T>,
    pub w: Vec<T>,
    pub w_prime: Vec<T>,
    pub phi: Vec<T>,
    pub phi_prime: Vec<T>,
    pub phi_doubleprime: Vec<T>,
    pub w_ratio: Vec<T>,
    pub phi_ratio: Vec<T>,
    pub m_tilde: Vec<T>,
    /// `phi(M)`, the maximum of `phi`.
    pub phi_at_outer: T,
}

impl<T: Real> PhaseWeightProfile<T> {
    fn with_capacity(params: CarlemanParams<T>, n: usize) -> Self {
        Self {
            params,
            grid: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            w_prime: Vec::with_capacity(n),
            phi: Vec::with_capacity(n),
            phi_prime: Vec::with_capacity(n),
            phi_doubleprime: Vec::with_capacity(n),
            w_ratio: Vec::with_capacity(n),
            phi_ratio: Vec::with_capacity(n),
            m_tilde: Vec::with_capacity(n),
            phi_at_outer: T::zero(),
        }
    }

    fn push(&mut self, s: ProfileSample<T>) {
        self.grid.push(s.r);
        self.w.push(s.w);
        self.w_prime.push(s.w_prime);
        self.phi.push(s.phi);
        self.phi_prime.push(s.phi_prime);
        self.phi_doubleprime.push(s.phi_doubleprime);
        self.w_ratio.push(s.w_ratio);
        self.phi_ratio.push(s.phi_ratio);
        self.m_tilde.push(s.m_tilde);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn sample(&self, i: usize) -> ProfileSample<T> {
        ProfileSample {
            r: self.grid[i],
            w: self.w[i],
            w_prime: self.w_prime[i],
            phi: self.phi[i],
            phi_prime: self.phi_prime[i],
            phi_doubleprime: self.phi_doubleprime[i],
            w_ratio: self.w_ratio[i],
            phi_ratio: self.phi_ratio[i],
            m_tilde: self.m_tilde[i],
        }
    }

    /// `phi` at arbitrary `x`, linearly interpolated in `|x|`; constant
    /// `phi(M)` beyond `M` and beyond the table, `0` at the origin.
    pub fn phi_interp(&self, x: T) -> T {
        let r = x.abs();
        if r >= self.params.outer || self.grid.is_empty() {
            return self.phi_at_outer;
        }
        let idx = self.grid.partition_point(|&g| g <= r);
        if idx == 0 {
            let g0 = self.grid[0];
            return self.phi[0] * r / g0;
        }
        if idx >= self.grid.len() {
            return self.phi_at_outer;
        }
        let (r0, r1) = (self.grid[idx - 1], self.grid[idx]);
        let t = (r - r0) / (r1 - r0);
        self.phi[idx - 1] + t * (self.phi[idx] - self.phi[idx - 1])
    }

    /// CSV with columns `r,w,w_prime,phi,phi_prime,phi_doubleprime,W,Phi,m_tilde`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,w,w_prime,phi,phi_prime,phi_doubleprime,W,Phi,m_tilde\n");
        for i in 0..self.len() {
            let cols = [
                self.grid[i],
                self.w[i],
                self.w_prime[i],
                self.phi[i],
                self.phi_prime[i],
                self.phi_doubleprime[i],
                self.w_ratio[i],
                self.phi_ratio[i],
                self.m_tilde[i],
            ];
            let line: Vec<String> = cols.iter().map(|v| crate::fmt17(v.as_f64())).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}
