//! Pointwise check of `A - (1 + eta) B >= (E/2) w'` and of the bracketed
//! lower bound that implies it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_weight::{PhaseWeight, PhaseWeightProfile, ProfileSample};
use crate::potential::PotentialSpec;
use crate::scalar::{Cplx, Real};

/// Default relative rounding slack: a point is a violation when its residual
/// is below `-DEFAULT_TOL * max(1, E w'(r))`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `A = w'(E + phi'^2 - V) + w (2 phi' phi'' - V')`.
pub fn a_term<T: Real>(s: &ProfileSample<T>, v: T, dv: T, energy: T) -> T {
    let two = T::lit(2.0);
    s.w_prime * (energy + s.phi_prime * s.phi_prime - v) + s.w * (two * s.phi_prime * s.phi_doubleprime - dv)
}

/// `B = (w phi'')^2 / (w' + 4 h^-1 phi' w)`.
pub fn b_term<T: Real>(s: &ProfileSample<T>, h: T) -> T {
    if s.phi_doubleprime == T::zero() {
        return T::zero();
    }
    let num = s.w * s.phi_doubleprime;
    num * num / (s.w_prime + T::lit(4.0) * s.phi_prime * s.w / h)
}

/// Bracketed lower bound minus `E/2`; `min(W, h / (4 phi'))` counts as `W`
/// where `phi' = 0` since it multiplies `phi'^2 = 0`.
pub fn bracket_term<T: Real>(s: &ProfileSample<T>, v: T, dv: T, energy: T, h: T, eta: T) -> T {
    let two = T::lit(2.0);
    let k = T::one() + eta;
    let kinetic = if s.phi_prime > T::zero() {
        let cap = s.w_ratio.min(h / (T::lit(4.0) * s.phi_prime));
        let wp = s.w_ratio * s.phi_ratio;
        s.phi_prime * s.phi_prime * (T::one() + two * wp - k * wp * s.phi_ratio * cap)
    } else {
        T::zero()
    };
    energy + kinetic - v - s.w_ratio * dv - energy / two
}

fn ensure_off_breakpoints<T: Real>(pw: &PhaseWeight<T>, r: T) -> Result<()> {
    if pw.params.breakpoints().contains(&r) {
        return Err(Error::Domain(format!("r = {r} is a breakpoint of the construction")));
    }
    Ok(())
}

/// `A(r)` at an arbitrary radius (weight integrated to `1e-13`).
pub fn eval_a<T: Real>(pw: &PhaseWeight<T>, spec: &PotentialSpec<T>, r: T) -> Result<T> {
    ensure_off_breakpoints(pw, r)?;
    let s = pw.sample(r, T::lit(1e-13))?;
    Ok(a_term(&s, spec.eval_v(r)?, spec.eval_dv(r)?, pw.params.energy))
}

/// `B(r)` at an arbitrary radius.
pub fn eval_b<T: Real>(pw: &PhaseWeight<T>, r: T, h: T) -> Result<T> {
    ensure_off_breakpoints(pw, r)?;
    if !(h > T::zero()) {
        return Err(Error::Domain(format!("h = {h} must be positive")));
    }
    let s = pw.sample(r, T::lit(1e-13))?;
    Ok(b_term(&s, h))
}

#[derive(Debug, Clone)]
pub struct InequalityReport<T> {
    pub h: T,
    pub grid: Vec<T>,
    /// `A - (1 + eta) B - (E/2) w'`
    pub residual: Vec<T>,
    /// bracketed bound minus `E/2`
    pub bracket_residual: Vec<T>,
    pub min_residual: T,
    /// `(r, residual)` for every point beyond the rounding slack
    pub violations: Vec<(T, T)>,
    pub tol: T,
}

impl<T: Real> InequalityReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// CSV rows `r,residual,bracket_residual`, then the summary
    /// `min_residual,h,pass`.
    pub fn to_csv(&self) -> String {
        let f = |x: T| crate::fmt17(x.as_f64());
        let mut out = String::from("r,residual,bracket_residual\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!("{},{},{}\n", f(self.grid[i]), f(self.residual[i]), f(self.bracket_residual[i])));
        }
        out.push_str("min_residual,h,pass\n");
        out.push_str(&format!("{},{},{}\n", f(self.min_residual), f(self.h), self.passed()));
        out
    }
}

/// Residuals of the crucial lower bound on the whole profile grid.
pub fn verify_pointwise<T: Real>(
    profile: &PhaseWeightProfile<T>,
    spec: &PotentialSpec<T>,
    h: T,
    tol: T,
) -> Result<InequalityReport<T>> {
    let params = &profile.params;
    if !(h > T::zero()) || h > params.h0 {
        return Err(Error::Precondition(format!("h = {h} must lie in (0, h0 = {}]", params.h0)));
    }
    verify_range(profile, spec, h, tol, 0..profile.len())
}

fn verify_range<T: Real>(
    profile: &PhaseWeightProfile<T>,
    spec: &PotentialSpec<T>,
    h: T,
    tol: T,
    range: std::ops::Range<usize>,
) -> Result<InequalityReport<T>> {
    let params = &profile.params;
    let energy = params.energy;
    let eta = params.eta;
    let k = T::one() + eta;
    let half_e = energy / T::lit(2.0);
    let rows: Vec<(T, T, T, T)> = range
        .into_par_iter()
        .map(|i| {
            let s = profile.sample(i);
            let v = spec.eval_v(s.r)?;
            let dv = spec.eval_dv(s.r)?;
            let residual = a_term(&s, v, dv, energy) - k * b_term(&s, h) - half_e * s.w_prime;
            let bracket = bracket_term(&s, v, dv, energy, h, eta);
            let slack = tol * T::one().max(energy * s.w_prime);
            Ok((s.r, residual, bracket, slack))
        })
        .collect::<Result<_>>()?;

    let mut rep = InequalityReport {
        h,
        grid: Vec::with_capacity(rows.len()),
        residual: Vec::with_capacity(rows.len()),
        bracket_residual: Vec::with_capacity(rows.len()),
        min_residual: T::infinity(),
        violations: Vec::new(),
        tol,
    };
    for (r, res, br, slack) in rows {
        rep.grid.push(r);
        rep.residual.push(res);
        rep.bracket_residual.push(br);
        rep.min_residual = rep.min_residual.min(res);
        if !(res >= -slack) {
            rep.violations.push((r, res));
        }
    }
    Ok(rep)
}

/// Largest `h0` of the form `min(1, 1/(1+eta)) / 2^k` for which the
/// inequality holds on the `(1/2, a)` part of the grid.
pub fn select_h0<T: Real>(profile: &PhaseWeightProfile<T>, spec: &PotentialSpec<T>, tol: T) -> Result<T> {
    let params = &profile.params;
    let lo = profile.grid.partition_point(|&r| r <= T::lit(0.5));
    let hi = profile.grid.partition_point(|&r| r < params.a);
    let mut h = T::one().min((T::one() + params.eta).recip());
    for _ in 0..60 {
        if verify_range(profile, spec, h, tol, lo..hi)?.passed() {
            return Ok(h);
        }
        h = h / T::lit(2.0);
    }
    Err(Error::param("select_h0", "no h0 down to 2^-60 satisfies the inequality on (1/2, a)"))
}

/// Radial energy density `|h u'|^2 - (V_eff - phi'^2 - E) |u|^2` per grid point.
pub fn spherical_energy<T: Real>(
    phi_prime: &[T],
    u: &[Cplx<T>],
    u_prime: &[Cplx<T>],
    v_eff: &[T],
    h: T,
    energy: T,
) -> Result<Vec<T>> {
    let n = phi_prime.len();
    if u.len() != n || u_prime.len() != n || v_eff.len() != n {
        return Err(Error::Domain(format!(
            "shape mismatch: phi' {n}, u {}, u' {}, V_eff {}",
            u.len(),
            u_prime.len(),
            v_eff.len()
        )));
    }
    Ok((0..n)
        .map(|i| (u_prime[i] * h).norm_sqr() - (v_eff[i] - phi_prime[i] * phi_prime[i] - energy) * u[i].norm_sqr())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_weight::{compute_a_m, default_grid, CarlemanParams};
    use crate::potential::{Decay, EnvelopeSpec};
    use approx::assert_relative_eq;

    fn free() -> (PhaseWeight<f64>, PotentialSpec<f64>) {
        let (a, outer) = compute_a_m(1.0, 1.0, 1.0);
        let params = CarlemanParams::new(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, a, outer, 0.5).unwrap();
        (PhaseWeight::new(params, EnvelopeSpec::trivial(Decay::Power { rho: 0.5 })), PotentialSpec::zero())
    }

    #[test]
    fn a_beyond_outer_radius_is_energy_times_slope() {
        let (pw, v) = free();
        let r = pw.params.outer * 1.5;
        let s = pw.sample(r, 1e-12).unwrap();
        assert_relative_eq!(eval_a(&pw, &v, r).unwrap(), s.w_prime, max_relative = 1e-10);
        assert_eq!(eval_b(&pw, r, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn a_near_origin_closed_form() {
        let (pw, v) = free();
        assert_relative_eq!(eval_a(&pw, &v, 0.25).unwrap(), 13.0 / 9.0, max_relative = 1e-14);
        assert_eq!(eval_b(&pw, 0.25, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn a_matches_finite_difference() {
        let (pw, v) = free();
        let f = |r: f64| {
            let s = pw.sample(r, 1e-13).unwrap();
            s.w * (1.0 + s.phi_prime * s.phi_prime)
        };
        let step = 1e-6;
        let fd = (f(2.0 + step) - f(2.0 - step)) / (2.0 * step);
        assert_relative_eq!(eval_a(&pw, &v, 2.0).unwrap(), fd, max_relative = 1e-6);
    }

    #[test]
    fn b_closed_form_at_one() {
        let (pw, _) = free();
        let s = pw.sample(1.0, 1e-13).unwrap();
        let h = 0.1;
        let expected = (s.w * 1.0 / 4.0).powi(2) / (s.w_prime + 4.0 / h * 0.5 * s.w);
        assert_relative_eq!(eval_b(&pw, 1.0, h).unwrap(), expected, max_relative = 1e-8);
    }

    #[test]
    fn breakpoints_rejected() {
        let (pw, v) = free();
        assert!(matches!(eval_a(&pw, &v, 0.5), Err(Error::Domain(_))));
        assert!(matches!(eval_b(&pw, pw.params.a, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn free_profile_passes_and_tail_is_half_energy_slope() {
        let (pw, v) = free();
        let grid = default_grid(&pw.params, 1e-4, 1e-3);
        let prof = pw.build_profile(&grid).unwrap();
        let rep = verify_pointwise(&prof, &v, 0.1, DEFAULT_TOL).unwrap();
        assert!(rep.passed());
        for (i, &r) in rep.grid.iter().enumerate() {
            if r > pw.params.outer {
                assert_relative_eq!(rep.residual[i], 0.5 * prof.w_prime[i], max_relative = 1e-12);
            }
        }
        assert!(matches!(verify_pointwise(&prof, &v, 0.6, DEFAULT_TOL), Err(Error::Precondition(_))));
    }

    #[test]
    fn b_monotone_in_h() {
        let (pw, _) = free();
        let grid = default_grid(&pw.params, 1e-4, 1e-2);
        let prof = pw.build_profile(&grid).unwrap();
        for i in 0..prof.len() {
            let s = prof.sample(i);
            if s.phi_prime > 0.0 {
                let b = [0.2, 0.1, 0.05].map(|h| b_term(&s, h));
                assert!(b[1] <= b[0] && b[2] <= b[1]);
            }
        }
    }

    #[test]
    fn energy_density_examples() {
        let n = 4;
        let zeros = vec![Cplx::new(0.0, 0.0); n];
        let f = spherical_energy(&vec![0.0; n], &zeros, &zeros, &vec![0.3; n], 0.1, 1.0).unwrap();
        assert!(f.iter().all(|&x| x == 0.0));

        let u = vec![Cplx::new(0.6f64, 0.8); n];
        let f = spherical_energy(&vec![0.0; n], &u, &zeros, &vec![0.0; n], 0.1, 1.0).unwrap();
        assert!(f.iter().all(|&x| (x - 1.0).abs() < 1e-15));

        assert!(spherical_energy(&[0.0; 3], &u, &zeros, &vec![0.0; n], 0.1, 1.0).is_err());
    }

    #[test]
    fn plane_wave_energy_density() {
        // u = exp(i r sqrt(E) / h), u' by centered differences
        let (h, e, dr) = (0.1f64, 1.0f64, 1e-4f64);
        let r: Vec<f64> = (0..200).map(|i| 1.0 + dr * i as f64).collect();
        let u: Vec<Cplx<f64>> = r.iter().map(|&x| Cplx::from_polar(1.0, x * e.sqrt() / h)).collect();
        let du: Vec<Cplx<f64>> = (0..r.len())
            .map(|i| {
                let (l, rr) = (i.saturating_sub(1), (i + 1).min(r.len() - 1));
                (u[rr] - u[l]) / (r[rr] - r[l])
            })
            .collect();
        let f = spherical_energy(&vec![0.0; r.len()], &u, &du, &vec![0.0; r.len()], h, e).unwrap();
        for &x in &f[1..r.len() - 1] {
            assert!((x - 2.0 * e).abs() < 1e-5, "F = {x}");
        }
    }
}
