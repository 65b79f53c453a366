//! Parameter assembly, sweeps over `(E, h, ε, M)`, and growth-law fits.

use rayon::prelude::*;

use crate::carleman_check::{select_h0, verify_pointwise, DEFAULT_TOL};
use crate::discrete_operator::{DiscreteOperator, Grid1D, Sign};
use crate::error::{Error, Result};
use crate::phase_weight::{avoid_breakpoints, choose_eta, compute_a_m, compute_tau0, CarlemanParams, PhaseWeight};
use crate::potential::{EnvelopeSpec, PotentialSpec};
use crate::phase_weight::PhaseWeightProfile;
use crate::resolvent_norms::{
    carleman_residual, random_bumps, weighted_resolvent_norm, BumpBatch, CarlemanResidual, NormResult, WeightSpec,
};
use crate::scalar::{Cplx, Real};

/// Sample step of the scan that locates `b`.
const B_SCAN_STEP: f64 = 1e-3;
/// Points in the `(1/2, a)` slice used to pick `h0`.
const H0_POINTS: usize = 20_000;
/// Default number of profile points for verification runs.
pub const PROFILE_POINTS: usize = 100_000;

/// Radial sample on which `b` is located: `[1, R]` with `R` past the support,
/// or a long stretch for potentials without compact support.
fn b_scan_grid<T: Real>(spec: &PotentialSpec<T>) -> Vec<T> {
    let end = match spec.support_radius() {
        Some(r0) => T::lit(10.0).max(T::lit(2.0) * r0 + T::one()),
        None => T::lit(200.0),
    };
    let step = T::lit(B_SCAN_STEP);
    let n = ((end - T::one()) / step).ceil().to_usize().unwrap_or(0);
    (0..=n).map(|i| T::one() + step * T::from_usize_lossy(i)).collect()
}

/// Runs the whole chain `b -> eta -> tau0 -> (a, M) -> h0`. Errors carry
/// the name of the stage that raised them.
pub fn run_params<T: Real>(spec: &PotentialSpec<T>, env: &EnvelopeSpec<T>, energy: T, s: T) -> Result<CarlemanParams<T>> {
    let b = spec.compute_b(energy, &b_scan_grid(spec)).map_err(|e| e.in_stage("compute_b"))?;
    let delta = env.delta;
    let eta = choose_eta(delta).map_err(|e| e.in_stage("choose_eta"))?;
    let tau0 = compute_tau0(env, delta, eta, b).map_err(|e| e.in_stage("compute_tau0"))?;
    let (a, outer) = compute_a_m(tau0, energy, b);
    let h_start = T::one().min((T::one() + eta).recip());
    let params = CarlemanParams::new(energy, s, delta, eta, tau0, b, a, outer, h_start)
        .map_err(|e| e.in_stage("carleman_params"))?;

    let half = T::lit(0.5);
    let step = (a - half) / T::from_usize_lossy(H0_POINTS + 1);
    let mut grid: Vec<T> = (1..=H0_POINTS).map(|i| half + step * T::from_usize_lossy(i)).collect();
    avoid_breakpoints(&mut grid, &params.breakpoints());
    let profile = PhaseWeight::new(params, env.clone()).build_profile(&grid).map_err(|e| e.in_stage("select_h0"))?;
    let h0 = select_h0(&profile, spec, T::lit(DEFAULT_TOL)).map_err(|e| e.in_stage("select_h0"))?;
    params.with_h0(h0).map_err(|e| e.in_stage("select_h0"))
}

/// Profile grid over `(r_min, 3M)` with roughly `n_points` points: geometric
/// below 1, uniform above, breakpoints avoided.
pub fn profile_grid<T: Real>(params: &CarlemanParams<T>, r_min: T, n_points: usize) -> Vec<T> {
    let span = (T::one() / r_min).ln() + T::lit(3.0) * params.outer - T::one();
    let step = span / T::from_usize_lossy(n_points.max(2));
    crate::phase_weight::default_grid(params, r_min, step)
}

/// Human-readable ledger, one `name = value` per line.
pub fn ledger<T: Real>(params: &CarlemanParams<T>) -> String {
    let rows = [
        ("E", params.energy),
        ("s", params.s),
        ("delta", params.delta),
        ("eta", params.eta),
        ("b", params.b),
        ("tau0", params.tau0),
        ("a", params.a),
        ("M", params.outer),
        ("h0", params.h0),
    ];
    rows.iter().map(|(k, v)| format!("{k} = {}\n", crate::fmt17(v.as_f64()))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometrySpec {
    Line,
    HalfLine { dim: usize, ell: usize, r_min: f64 },
}

impl GeometrySpec {
    pub fn grid(&self, r_max: f64, n_points: usize) -> Result<Grid1D<f64>> {
        match *self {
            GeometrySpec::Line => Grid1D::line(r_max, n_points),
            GeometrySpec::HalfLine { dim, ell, r_min } => Grid1D::half_line(dim, ell, r_min, r_max, n_points),
        }
    }

    fn start(&self, r_max: f64) -> f64 {
        match *self {
            GeometrySpec::Line => -r_max,
            GeometrySpec::HalfLine { r_min, .. } => r_min,
        }
    }
}

/// `max(3M, 10) + 5 h sqrt(E) / ε`, capped; the flag reports whether the cap bound.
pub fn default_r_max(outer: f64, h: f64, energy: f64, eps: f64, cap: f64) -> (f64, bool) {
    let r = (3.0 * outer).max(10.0) + 5.0 * h * energy.sqrt() / eps;
    if r > cap {
        (cap, true)
    } else {
        (r, false)
    }
}

/// Assembles the operator on `[start, r_max]` with the fewest points that
/// satisfy the wavelength rule.
pub fn assemble_operator(
    spec: &PotentialSpec<f64>,
    geometry: GeometrySpec,
    r_max: f64,
    h: f64,
    energy: f64,
    eps: f64,
    sign: Sign,
) -> Result<DiscreteOperator<f64>> {
    let start = geometry.start(r_max);
    // first guess ignores wells; the refusal carries the exact count otherwise
    let limit = crate::discrete_operator::resolution_limit(h, energy, 0.0);
    let mut n = ((r_max - start) / limit).ceil() as usize + 1;
    for _ in 0..3 {
        match DiscreteOperator::assemble(spec, geometry.grid(r_max, n)?, h, energy, eps, sign) {
            Err(Error::Resolution { suggested_points, .. }) => n = suggested_points.max(n + 1),
            other => return other,
        }
    }
    DiscreteOperator::assemble(spec, geometry.grid(r_max, n)?, h, energy, eps, sign)
}

/// [`assemble_operator`] followed by the factorization.
pub fn build_operator(
    spec: &PotentialSpec<f64>,
    geometry: GeometrySpec,
    r_max: f64,
    h: f64,
    energy: f64,
    eps: f64,
    sign: Sign,
) -> Result<DiscreteOperator<f64>> {
    assemble_operator(spec, geometry, r_max, h, energy, eps, sign)?.factorize()
}

/// Norm cutoff choice: none, the `M` of the parameter chain, or a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    None,
    Outer,
    At(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub potential: PotentialSpec<f64>,
    pub envelope: EnvelopeSpec<f64>,
    pub geometry: GeometrySpec,
    pub energies: Vec<f64>,
    pub hs: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub s: f64,
    pub cutoffs: Vec<Cutoff>,
    pub signs: Vec<Sign>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// upper limit on the truncation radius
    pub r_max_cap: f64,
    /// also verify the pointwise inequality at every `(E, h)`
    pub verify: bool,
}

impl SweepSpec {
    /// Sweep with default numerics; lists must still be filled in.
    pub fn new(potential: PotentialSpec<f64>, envelope: EnvelopeSpec<f64>, geometry: GeometrySpec) -> Self {
        Self {
            potential,
            envelope,
            geometry,
            energies: vec![1.0],
            hs: Vec::new(),
            epsilons: Vec::new(),
            s: 1.0,
            cutoffs: vec![Cutoff::None],
            signs: vec![Sign::Plus],
            tol: 1e-8,
            max_iter: 5000,
            seed: 0,
            r_max_cap: 1e4,
            verify: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::Precondition(format!("{name} list is empty")));
            }
            if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(Error::Precondition(format!("{name} value {x} is not positive")));
            }
            Ok(())
        };
        positive("E", &self.energies)?;
        positive("h", &self.hs)?;
        positive("eps", &self.epsilons)?;
        if self.cutoffs.is_empty() || self.signs.is_empty() {
            return Err(Error::Precondition("cutoff and sign lists must be non-empty".into()));
        }
        if let Some(Cutoff::At(m)) = self.cutoffs.iter().find(|c| matches!(c, Cutoff::At(m) if !(*m >= 0.0))) {
            return Err(Error::Precondition(format!("cutoff {m} is negative")));
        }
        WeightSpec::new(self.s, None)?;
        Ok(())
    }
}

/// Result of [`verify_pointwise`] at one `(E, h)` of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyRow {
    pub energy: f64,
    pub h: f64,
    pub min_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<NormResult<f64>>,
    pub verifications: Vec<VerifyRow>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

fn cutoff_key(c: Option<f64>) -> f64 {
    c.unwrap_or(f64::NEG_INFINITY)
}

fn sort_rows(rows: &mut [NormResult<f64>]) {
    rows.sort_by(|a, b| {
        let ka = (a.energy, a.h, a.eps, cutoff_key(a.cutoff));
        let kb = (b.energy, b.h, b.eps, cutoff_key(b.cutoff));
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal).then(a.sign.cmp(&b.sign))
    });
}

/// CSV with the fixed column set `E,h,eps,s,cutoff_M,sign,value,iterations,converged`.
pub fn rows_to_csv(rows: &[NormResult<f64>]) -> String {
    let mut out = String::from("E,h,eps,s,cutoff_M,sign,value,iterations,converged\n");
    for r in rows {
        let cutoff = r.cutoff.map_or_else(|| "none".to_string(), crate::fmt17);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            crate::fmt17(r.energy),
            crate::fmt17(r.h),
            crate::fmt17(r.eps),
            crate::fmt17(r.s),
            cutoff,
            r.sign.symbol(),
            crate::fmt17(r.value),
            r.iterations,
            r.converged
        ));
    }
    out
}

/// Evaluates every `(E, h, ε, cutoff, sign)` tuple on a pool of `workers`
/// threads. Rows come back sorted by `(E, h, ε, cutoff)`, independent of
/// completion order.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| sweep_inner(spec))
}

fn sweep_inner(spec: &SweepSpec) -> Result<SweepResult> {
    let params: Vec<CarlemanParams<f64>> = spec
        .energies
        .par_iter()
        .map(|&e| run_params(&spec.potential, &spec.envelope, e, spec.s))
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let mut verifications = Vec::new();
    if spec.verify {
        for p in &params {
            if let Some(h) = spec.hs.iter().find(|&&h| h > p.h0) {
                return Err(Error::Precondition(format!("h = {h} exceeds h0 = {} at E = {}", p.h0, p.energy)));
            }
            let profile = PhaseWeight::new(*p, spec.envelope.clone()).build_profile(&profile_grid(p, 1e-4, PROFILE_POINTS))?;
            for &h in &spec.hs {
                let rep = verify_pointwise(&profile, &spec.potential, h, DEFAULT_TOL)?;
                verifications.push(VerifyRow { energy: p.energy, h, min_residual: rep.min_residual, passed: rep.passed() });
            }
        }
    }

    let mut tasks = Vec::new();
    for p in &params {
        for &h in &spec.hs {
            for &eps in &spec.epsilons {
                let (r_max, capped) = default_r_max(p.outer, h, p.energy, eps, spec.r_max_cap);
                if capped {
                    warnings.push(format!(
                        "truncation radius capped at {r_max} for E = {}, h = {h}, eps = {eps}",
                        p.energy
                    ));
                }
                for &sign in &spec.signs {
                    tasks.push((p, h, eps, r_max, sign));
                }
            }
        }
    }
    let nested: Vec<Vec<NormResult<f64>>> = tasks
        .par_iter()
        .map(|&(p, h, eps, r_max, sign)| {
            let op = build_operator(&spec.potential, spec.geometry, r_max, h, p.energy, eps, sign)?;
            spec.cutoffs
                .iter()
                .map(|c| {
                    let cutoff = match *c {
                        Cutoff::None => None,
                        Cutoff::Outer => Some(p.outer),
                        Cutoff::At(m) => Some(m),
                    };
                    weighted_resolvent_norm(&op, &WeightSpec::new(spec.s, cutoff)?, spec.tol, spec.max_iter, spec.seed)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<NormResult<f64>> = nested.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(SweepResult { rows, verifications, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthModel {
    /// `log g = C h^{-1} + c`
    ExpInInvH,
    /// `log g = k log(1/h) + c`
    PolyInInvH,
}

impl GrowthModel {
    pub fn name(self) -> &'static str {
        match self {
            GrowthModel::ExpInInvH => "exp_in_inv_h",
            GrowthModel::PolyInInvH => "poly_in_inv_h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub model: GrowthModel,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// rows skipped because they did not converge
    pub dropped: usize,
}

/// Least-squares fit of `log(value)` against `1/h` or `log(1/h)` over the
/// converged rows, which must share `(E, ε, s, cutoff)`.
pub fn fit_growth(rows: &[NormResult<f64>], model: GrowthModel) -> Result<FitReport> {
    let used: Vec<&NormResult<f64>> = rows.iter().filter(|r| r.converged).collect();
    let dropped = rows.len() - used.len();
    if used.len() < 3 {
        return Err(Error::Fit(format!("{} converged rows; at least 3 needed", used.len())));
    }
    let key = |r: &NormResult<f64>| (r.energy, r.eps, r.s, r.cutoff);
    if used.iter().any(|r| key(r) != key(used[0])) {
        return Err(Error::Fit("rows mix different (E, eps, s, cutoff_M)".into()));
    }
    if let Some(r) = used.iter().find(|r| !(r.value > 0.0)) {
        return Err(Error::Fit(format!("non-positive value {} at h = {}", r.value, r.h)));
    }
    let pts: Vec<(f64, f64)> = used
        .iter()
        .map(|r| {
            let x = match model {
                GrowthModel::ExpInInvH => 1.0 / r.h,
                GrowthModel::PolyInInvH => (1.0 / r.h).ln(),
            };
            (x, r.value.ln())
        })
        .collect();
    let (slope, intercept, r_squared) = least_squares(&pts)?;
    Ok(FitReport { model, slope, intercept, r_squared, points_used: pts.len(), dropped })
}

/// Ordinary least squares `y = slope x + intercept`, with `r^2`.
pub fn least_squares(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    Ok((slope, intercept, r_squared))
}

/// `‖W R W f‖ / ‖f‖` for a fixed probe `f`: one solve, cheap enough to scan.
pub fn probe_response(op: &DiscreteOperator<f64>, weights: &WeightSpec<f64>, probe: &dyn Fn(f64) -> f64) -> Result<f64> {
    let nodes = op.grid.nodes();
    let w = weights.values(&nodes);
    let f: Vec<Cplx<f64>> = nodes.iter().zip(&w).map(|(&x, &wi)| Cplx::new(wi * probe(x), 0.0)).collect();
    let nf = crate::scalar::norm2(&f);
    if nf == 0.0 {
        return Ok(0.0);
    }
    let u = op.solve(&f)?;
    let wu: Vec<Cplx<f64>> = u.iter().zip(&w).map(|(z, &wi)| z * wi).collect();
    Ok(crate::scalar::norm2(&wu) / nf)
}

/// Location of the largest probe response in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub at: f64,
    pub response: f64,
}

/// Maximizes `f` on `[lo, hi]`: a uniform scan of `samples` points followed by
/// golden-section refinement around the best sample.
pub fn locate_peak(f: &(dyn Fn(f64) -> Result<f64> + Sync), lo: f64, hi: f64, samples: usize, refine: usize) -> Result<Peak> {
    if !(hi > lo) || samples < 3 {
        return Err(Error::Precondition(format!("bad scan [{lo}, {hi}] with {samples} samples")));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    let values: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = lo + step * i as f64;
            f(x).map(|v| (x, v))
        })
        .collect::<Result<_>>()?;
    let (mut best_x, mut best_v) = values[0];
    for &(x, v) in &values {
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best_x - step).max(lo), (best_x + step).min(hi));
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..refine {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    Ok(Peak { at: best_x, response: best_v })
}

/// Settings for locating the resonance-driven maximum of the interior norm
/// inside a window of `k = 1/h` at fixed `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSearch {
    pub k_range: (f64, f64),
    /// absorption used for the cheap first pass on a short domain
    pub coarse_eps: f64,
    pub coarse_samples: usize,
    pub fine_samples: usize,
    pub refine_steps: usize,
    /// centers of the narrow point probes
    pub probe_at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakNorm {
    pub coarse: Peak,
    pub fine: Peak,
    pub norm: NormResult<f64>,
}

/// Gaussian point probes of width `h / 5`.
fn point_probes(centers: &[f64], h: f64) -> impl Fn(f64) -> f64 + '_ {
    let width = 0.2 * h;
    move |x: f64| centers.iter().map(|&c| (-((x - c) / width).powi(2)).exp()).sum()
}

/// Finds the `h = 1/k` in the window where the resolvent is largest and
/// returns the norm there.
///
/// A single solve against fixed point probes tracks the norm closely near a
/// resonance, so the window is first scanned on a short, strongly absorbing
/// domain, then rescanned around that peak on the full domain at the
/// requested `ε`, and finally the norm is computed at the refined `h`.
#[allow(clippy::too_many_arguments)]
pub fn resonant_norm(
    spec: &PotentialSpec<f64>,
    geometry: GeometrySpec,
    energy: f64,
    eps: f64,
    weights: &WeightSpec<f64>,
    r_max: &(dyn Fn(f64) -> f64 + Sync),
    search: &PeakSearch,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<PeakNorm> {
    let reach = spec.support_radius().unwrap_or(10.0) + 1.0;
    let response = |k: f64, e: f64, radius: f64| -> Result<f64> {
        let h = 1.0 / k;
        let op = build_operator(spec, geometry, radius, h, energy, e, Sign::Plus)?;
        probe_response(&op, weights, &point_probes(&search.probe_at, h))
    };
    let coarse_eps = search.coarse_eps.max(eps);
    let short = |k: f64| response(k, coarse_eps, reach + 5.0 * energy.sqrt() / (k * coarse_eps));
    let (lo, hi) = search.k_range;
    let coarse = locate_peak(&short, lo, hi, search.coarse_samples, search.refine_steps)?;

    let half = coarse_eps * coarse.at / energy;
    let full = |k: f64| response(k, eps, r_max(1.0 / k));
    let fine = locate_peak(
        &full,
        (coarse.at - half).max(lo),
        (coarse.at + half).min(hi),
        search.fine_samples,
        search.refine_steps,
    )?;
    let h = 1.0 / fine.at;
    let op = build_operator(spec, geometry, r_max(h), h, energy, eps, Sign::Plus)?;
    let norm = weighted_resolvent_norm(&op, weights, tol, max_iter, seed)?;
    Ok(PeakNorm { coarse, fine, norm })
}

/// Randomized Carleman residual check at one `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanBatch {
    pub h: f64,
    pub residuals: Vec<CarlemanResidual<f64>>,
}

impl CarlemanBatch {
    /// Largest `lhs / rhs` over the batch.
    pub fn max_ratio(&self) -> Result<f64> {
        self.residuals.iter().map(|r| r.ratio()).try_fold(0.0, |m: f64, r| r.map(|r| m.max(r)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,index,lhs,rhs,log_scale,ratio\n");
        for (i, r) in self.residuals.iter().enumerate() {
            let ratio = r.ratio().map_or_else(|_| "inf".to_string(), crate::fmt17);
            out.push_str(&format!(
                "{},{i},{},{},{},{ratio}\n",
                crate::fmt17(self.h),
                crate::fmt17(r.lhs),
                crate::fmt17(r.rhs),
                crate::fmt17(r.log_scale)
            ));
        }
        out
    }
}

/// Bump centers span `1.2 M` on either side of the origin (one side on a
/// half-line), so both the region where `phi` grows and the flat region
/// beyond `M` are exercised.
pub fn carleman_batch(
    spec: &PotentialSpec<f64>,
    geometry: GeometrySpec,
    profile: &PhaseWeightProfile<f64>,
    h: f64,
    eps: f64,
    count: usize,
    seed: u64,
) -> Result<CarlemanBatch> {
    let params = &profile.params;
    let reach = 1.2 * params.outer;
    let r_max = reach + 2.0;
    let op = assemble_operator(spec, geometry, r_max, h, params.energy, eps, Sign::Plus)?;
    let lo = match geometry {
        GeometrySpec::Line => -reach,
        GeometrySpec::HalfLine { r_min, .. } => r_min + 1.0,
    };
    let batch = BumpBatch {
        count,
        center_range: (lo, reach),
        width_range: (0.2, 1.0),
        frequency_range: (0.8, 1.2),
        seed,
    };
    let residuals = random_bumps(&op, &batch)?
        .iter()
        .map(|v| carleman_residual(&op, profile, params.s, v))
        .collect::<Result<_>>()?;
    Ok(CarlemanBatch { h, residuals })
}
