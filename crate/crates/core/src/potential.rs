//! Radial potentials, their hypothesis envelopes, and the transition radius `b`.
//!
//! Every family is built from `exp(-1/t)` transitions or the classical
//! `exp(1 - 1/(1 - x^2))` bump, so `V` is smooth and `dV/dr` is evaluated in
//! closed form rather than by differencing.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn flat<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        (-t.recip()).exp()
    }
}

fn flat_prime<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        flat(t) / (t * t)
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity in between.
pub fn smooth_step<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let (f, g) = (flat(t), flat(T::one() - t));
    f / (f + g)
}

/// Derivative of [`smooth_step`] with respect to `t`.
pub fn smooth_step_prime<T: Real>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let s = T::one() - t;
    let (f, g) = (flat(t), flat(s));
    let den = f + g;
    (flat_prime(t) * g + f * flat_prime(s)) / (den * den)
}

/// Unit-height bump `exp(1 - 1/(1 - x^2))` supported in `|x| < 1`, and its derivative.
fn bump<T: Real>(x: T) -> (T, T) {
    let q = T::one() - x * x;
    if q <= T::zero() {
        return (T::zero(), T::zero());
    }
    let v = (T::one() - q.recip()).exp();
    (v, -T::lit(2.0) * x * v / (q * q))
}

/// Radial potential families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    Zero,
    /// `depth` on the plateau `[inner + ramp, outer - ramp]`, smooth ramps
    /// inside `[inner, outer]`, zero outside.
    SmoothWell { depth: T, inner: T, outer: T, ramp: T },
    /// Bump of the given `height` centered at radius `center`. On the line
    /// (`V(|x|)`) this is a pair of barriers at `x = ±center` enclosing a well;
    /// radially it is a spherical shell.
    DoubleBarrier { height: T, center: T, half_width: T },
    /// `amplitude * r^(-exponent)`, optionally switched off smoothly over
    /// `[support - ramp, support]`.
    SingularPower { amplitude: T, exponent: T, cutoff: Option<(T, T)> },
    /// `amplitude * <r>^(-rho)`.
    LongRange { amplitude: T, rho: T },
}

/// Largest admissible singular exponent: `delta < sqrt(8) - 2`.
pub fn delta_limit<T: Real>() -> T {
    T::lit(8.0).sqrt() - T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec<T> {
    family: Family<T>,
}

impl<T: Real> PotentialSpec<T> {
    pub fn new(family: Family<T>) -> Result<Self> {
        let bad = |m: &str| Err(Error::MalformedSpec(m.to_string()));
        let all_finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        match &family {
            Family::Zero => {}
            Family::SmoothWell { depth, inner, outer, ramp } => {
                if !all_finite(&[*depth, *inner, *outer, *ramp]) {
                    return bad("smooth_well parameters must be finite");
                }
                if *inner < T::zero() || *ramp <= T::zero() || *inner + T::lit(2.0) * *ramp > *outer {
                    return bad("smooth_well needs 0 <= inner, ramp > 0 and inner + 2*ramp <= outer");
                }
            }
            Family::DoubleBarrier { height, center, half_width } => {
                if !all_finite(&[*height, *center, *half_width]) {
                    return bad("double_barrier parameters must be finite");
                }
                if *half_width <= T::zero() || *center < *half_width {
                    return bad("double_barrier needs 0 < half_width <= center");
                }
            }
            Family::SingularPower { amplitude, exponent, cutoff } => {
                if !all_finite(&[*amplitude, *exponent]) {
                    return bad("singular_power parameters must be finite");
                }
                if *exponent < T::zero() || *exponent >= delta_limit::<T>() {
                    return bad("singular_power exponent must lie in [0, sqrt(8) - 2)");
                }
                if let Some((support, ramp)) = cutoff {
                    if !(*ramp > T::zero() && *support > *ramp && support.is_finite()) {
                        return bad("singular_power cutoff needs 0 < ramp < support");
                    }
                }
            }
            Family::LongRange { amplitude, rho } => {
                if !all_finite(&[*amplitude, *rho]) || *rho <= T::zero() {
                    return bad("long_range needs finite amplitude and rho > 0");
                }
            }
        }
        Ok(Self { family })
    }

    pub fn zero() -> Self {
        Self { family: Family::Zero }
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Zero => "zero",
            Family::SmoothWell { .. } => "smooth_well",
            Family::DoubleBarrier { .. } => "double_barrier",
            Family::SingularPower { .. } => "singular_power",
            Family::LongRange { .. } => "long_range",
        }
    }

    /// `R0` with `V = 0` for `r >= R0`; `None` when the support is unbounded.
    pub fn support_radius(&self) -> Option<T> {
        match &self.family {
            Family::Zero => Some(T::zero()),
            Family::SmoothWell { outer, .. } => Some(*outer),
            Family::DoubleBarrier { center, half_width, .. } => Some(*center + *half_width),
            Family::SingularPower { cutoff, .. } => cutoff.map(|(s, _)| s),
            Family::LongRange { .. } => None,
        }
    }

    /// Singular exponent of the family (zero for bounded families).
    pub fn singular_exponent(&self) -> T {
        match &self.family {
            Family::SingularPower { exponent, .. } => *exponent,
            _ => T::zero(),
        }
    }

    /// `(V(r), dV/dr(r))`.
    fn value_and_slope(&self, r: T) -> (T, T) {
        let two = T::lit(2.0);
        match &self.family {
            Family::Zero => (T::zero(), T::zero()),
            Family::SmoothWell { depth, inner, outer, ramp } => {
                if r <= *inner || r >= *outer {
                    return (T::zero(), T::zero());
                }
                let up = (r - *inner) / *ramp;
                let down = (*outer - r) / *ramp;
                let (su, sd) = (smooth_step(up), smooth_step(down));
                let (du, dd) = (smooth_step_prime(up) / *ramp, -smooth_step_prime(down) / *ramp);
                (*depth * su * sd, *depth * (du * sd + su * dd))
            }
            Family::DoubleBarrier { height, center, half_width } => {
                let (v, d) = bump((r - *center) / *half_width);
                (*height * v, *height * d / *half_width)
            }
            Family::SingularPower { amplitude, exponent, cutoff } => {
                let p = r.powf(-*exponent);
                let (v, d) = (*amplitude * p, -*exponent * *amplitude * p / r);
                match cutoff {
                    None => (v, d),
                    Some((support, ramp)) => {
                        let t = (*support - r) / *ramp;
                        let (chi, dchi) = (smooth_step(t), -smooth_step_prime(t) / *ramp);
                        (v * chi, d * chi + v * dchi)
                    }
                }
            }
            Family::LongRange { amplitude, rho } => {
                let bracket = T::one() + r * r;
                let v = *amplitude * bracket.powf(-*rho / two);
                (v, -*rho * r * v / bracket)
            }
        }
    }

    /// `V(r)` for `r > 0`.
    pub fn eval_v(&self, r: T) -> Result<T> {
        self.check_radius(r)?;
        let (v, _) = self.value_and_slope(r);
        finite_or_malformed(v, r)
    }

    /// `dV/dr(r)` for `r > 0`.
    pub fn eval_dv(&self, r: T) -> Result<T> {
        self.check_radius(r)?;
        let (_, d) = self.value_and_slope(r);
        finite_or_malformed(d, r)
    }

    fn check_radius(&self, r: T) -> Result<()> {
        if r > T::zero() && r.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("potential evaluated at r = {r}, need r > 0")))
        }
    }

    /// Lists every grid point where one of the four hypothesis bounds fails.
    pub fn check_assumptions(&self, env: &EnvelopeSpec<T>, grid: &[T]) -> Result<AssumptionReport<T>> {
        check_grid(grid)?;
        let mut violations = Vec::new();
        for &r in grid {
            let v = self.eval_v(r)?;
            let dv = self.eval_dv(r)?;
            let checks = if r < T::one() {
                [
                    (Bound::ValueNearOrigin, v, env.c1 * r.powf(-env.delta)),
                    (Bound::SlopeNearOrigin, dv, env.c1 * r.powf(-T::one() - env.delta)),
                ]
            } else {
                [
                    (Bound::ValueFar, v, env.p.eval(r)),
                    (Bound::SlopeFar, dv, env.c0 * env.m.eval(r) / r),
                ]
            };
            for (bound, value, limit) in checks {
                if value > limit {
                    violations.push(Violation { r, bound, value, limit });
                }
            }
        }
        Ok(AssumptionReport { violations })
    }

    /// Largest grid point `r >= 1` with `V + r V' >= E/4`, or 1 when there is none.
    pub fn compute_b(&self, energy: T, grid: &[T]) -> Result<T> {
        check_grid(grid)?;
        if energy <= T::zero() {
            return Err(Error::param("compute_b", "energy must be positive"));
        }
        let last = *grid.last().expect("non-empty grid");
        if let Some(r0) = self.support_radius() {
            if last <= r0.max(T::one()) {
                return Err(Error::InsufficientDomain(format!(
                    "grid ends at {last} but the potential is supported up to {r0}"
                )));
            }
        }
        let quarter = energy / T::lit(4.0);
        let mut b = T::one();
        for &r in grid.iter().filter(|&&r| r >= T::one()) {
            let (v, dv) = self.value_and_slope(r);
            if v + r * dv >= quarter {
                b = r;
            }
        }
        Ok(b)
    }

    /// Same family with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let family = match self.family.clone() {
            Family::Zero => Family::Zero,
            Family::SmoothWell { depth, inner, outer, ramp } => {
                Family::SmoothWell { depth: depth * factor, inner, outer, ramp }
            }
            Family::DoubleBarrier { height, center, half_width } => {
                Family::DoubleBarrier { height: height * factor, center, half_width }
            }
            Family::SingularPower { amplitude, exponent, cutoff } => {
                Family::SingularPower { amplitude: amplitude * factor, exponent, cutoff }
            }
            Family::LongRange { amplitude, rho } => Family::LongRange { amplitude: amplitude * factor, rho },
        };
        Self { family }
    }
}

fn finite_or_malformed<T: Real>(x: T, r: T) -> Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::MalformedSpec(format!("non-finite potential value at r = {r}")))
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if grid[0] <= T::zero() {
        return Err(Error::Domain("grid must start at r > 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// The bounded far-field profile `p(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarBound<T> {
    Zero,
    Constant(T),
    /// `amplitude * (r + 1)^(-rho)`
    Power { amplitude: T, rho: T },
}

impl<T: Real> FarBound<T> {
    pub fn eval(&self, r: T) -> T {
        match *self {
            FarBound::Zero => T::zero(),
            FarBound::Constant(c) => c,
            FarBound::Power { amplitude, rho } => amplitude * (r + T::one()).powf(-rho),
        }
    }
}

/// Long-range decay profile `m(r)` with values in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay<T> {
    /// `log^(-1-rho)(r + e)`
    Log { rho: T },
    /// `(r + 1)^(-rho)`
    Power { rho: T },
}

impl<T: Real> Decay<T> {
    pub fn eval(&self, r: T) -> T {
        match *self {
            Decay::Log { rho } => (r + T::E()).ln().powf(-T::one() - rho),
            Decay::Power { rho } => (r + T::one()).powf(-rho),
        }
    }

    pub fn rho(&self) -> T {
        match *self {
            Decay::Log { rho } | Decay::Power { rho } => rho,
        }
    }
}

/// Hypothesis constants `c0, c1, delta` together with `p` and `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSpec<T> {
    pub c0: T,
    pub c1: T,
    pub delta: T,
    pub p: FarBound<T>,
    pub m: Decay<T>,
}

impl<T: Real> EnvelopeSpec<T> {
    pub fn new(c0: T, c1: T, delta: T, p: FarBound<T>, m: Decay<T>) -> Result<Self> {
        let env = Self { c0, c1, delta, p, m };
        env.validate()?;
        Ok(env)
    }

    /// All constants zero, `p = 0`: the envelope of `V = 0`.
    pub fn trivial(m: Decay<T>) -> Self {
        Self { c0: T::zero(), c1: T::zero(), delta: T::zero(), p: FarBound::Zero, m }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Envelope(m.to_string()));
        if !(self.c0 >= T::zero() && self.c0.is_finite() && self.c1 >= T::zero() && self.c1.is_finite()) {
            return bad("c0 and c1 must be finite and nonnegative");
        }
        if !(self.delta >= T::zero() && self.delta < delta_limit::<T>()) {
            return bad("delta must lie in [0, sqrt(8) - 2)");
        }
        if !(self.m.rho() > T::zero()) {
            return bad("m needs rho > 0");
        }
        match self.p {
            FarBound::Constant(c) if !(c >= T::zero() && c.is_finite()) => return bad("p must be nonnegative"),
            FarBound::Power { amplitude, rho } if !(amplitude >= T::zero() && rho >= T::zero()) => {
                return bad("p needs nonnegative amplitude and exponent")
            }
            _ => {}
        }
        Ok(())
    }

    /// Numerical checks of the decay hypotheses on a sampled range: `m` in
    /// `(0, 1]`, non-increasing on the upper half of the grid, and
    /// `(r + 1)^(-1) m(r)` with a finite composite-trapezoid integral.
    pub fn check_decay(&self, grid: &[T]) -> Result<T> {
        check_grid(grid)?;
        let values: Vec<T> = grid.iter().map(|&r| self.m.eval(r)).collect();
        if values.iter().any(|&v| !(v > T::zero() && v <= T::one())) {
            return Err(Error::Envelope("m leaves (0, 1] on the grid".into()));
        }
        let tail = &values[values.len() / 2..];
        if tail.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Envelope("m is not decreasing on the grid tail".into()));
        }
        let half = T::lit(0.5);
        let integral = grid
            .windows(2)
            .zip(values.windows(2))
            .map(|(r, m)| half * (r[1] - r[0]) * (m[0] / (r[0] + T::one()) + m[1] / (r[1] + T::one())))
            .sum::<T>();
        if integral.is_finite() {
            Ok(integral)
        } else {
            Err(Error::Envelope("(r+1)^-1 m(r) integral is not finite".into()))
        }
    }

    /// `m(r)`, refusing values that underflow to zero.
    pub fn m_checked(&self, r: T) -> Result<T> {
        let m = self.m.eval(r);
        if m > T::zero() {
            Ok(m)
        } else {
            Err(Error::Envelope(format!("m({r}) vanished numerically")))
        }
    }

    /// Smallest `c0`, `c1` (and the scale of `p`) for which the grid check of
    /// `spec` passes, given the shapes of `p` and `m` and the exponent `delta`.
    /// A `Constant` or `Power` far bound has its amplitude fitted; `Zero` is
    /// replaced by a constant when `V` is positive somewhere beyond `r = 1`.
    pub fn tightest(spec: &PotentialSpec<T>, delta: T, p: FarBound<T>, m: Decay<T>, grid: &[T]) -> Result<Self> {
        check_grid(grid)?;
        let mut c0 = T::zero();
        let mut c1 = T::zero();
        let mut p_scale = T::zero();
        for &r in grid {
            let v = spec.eval_v(r)?;
            let dv = spec.eval_dv(r)?;
            if r < T::one() {
                c1 = c1.max(v * r.powf(delta)).max(dv * r.powf(T::one() + delta));
            } else {
                c0 = c0.max(dv * r / m.eval(r));
                let shape = match p {
                    FarBound::Power { rho, .. } => (r + T::one()).powf(-rho),
                    _ => T::one(),
                };
                p_scale = p_scale.max(v / shape);
            }
        }
        let p = match p {
            FarBound::Power { rho, .. } => FarBound::Power { amplitude: p_scale, rho },
            FarBound::Zero if p_scale == T::zero() => FarBound::Zero,
            _ => FarBound::Constant(p_scale),
        };
        Self::new(c0, c1, delta, p, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `V <= c1 r^-delta` on `r < 1`
    ValueNearOrigin,
    /// `V <= p(r)` on `r >= 1`
    ValueFar,
    /// `V' <= c1 r^(-1-delta)` on `r < 1`
    SlopeNearOrigin,
    /// `V' <= c0 r^-1 m(r)` on `r >= 1`
    SlopeFar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub r: T,
    pub bound: Bound,
    pub value: T,
    pub limit: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> AssumptionReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}
