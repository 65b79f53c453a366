//! Flat INI-style run configuration.
//!
//! ```text
//! [potential]
//! family = double_barrier
//! height = 2
//! center = 1.5
//! half_width = 0.1
//!
//! [envelope]
//! mode = auto          # or explicit, with c0 / c1 / p
//! delta = 0
//! p = constant         # zero | constant | power
//! m = power            # power | log
//! m_rho = 1
//!
//! [carleman]
//! E = 1
//! s = 1
//!
//! [sweep]
//! h = 0.1, 0.05, 0.025
//! eps = 1e-3
//! ```
//!
//! `#` and `;` start comments. Unknown sections or keys are errors.

use std::collections::BTreeMap;

use crate::discrete_operator::Sign;
use crate::error::{Error, Result};
use crate::experiments::{Cutoff, GeometrySpec, GrowthModel, SweepSpec};
use crate::potential::{Decay, EnvelopeSpec, Family, FarBound, PotentialSpec};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

type Section = BTreeMap<String, Entry>;

/// Raw `section -> key -> value` table with line numbers kept for errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    sections: BTreeMap<String, Section>,
}

const KNOWN: &[(&str, &[&str])] = &[
    (
        "potential",
        &[
            "family", "depth", "inner", "outer", "ramp", "height", "center", "half_width", "amplitude", "exponent",
            "support", "rho",
        ],
    ),
    ("envelope", &["mode", "c0", "c1", "delta", "p", "p_amplitude", "p_rho", "m", "m_rho"]),
    ("carleman", &["E", "s", "h", "eps", "sign", "cutoff_M", "tol", "points", "r_min"]),
    ("geometry", &["kind", "n", "ell", "r_min", "r_max"]),
    ("sweep", &["E", "h", "eps", "cutoff_M", "sign", "tol", "max_iter", "seed", "r_max_cap", "verify", "fit"]),
];

impl Ini {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ini = Ini::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(Error::Config { line, msg: format!("unknown section [{name}]") });
                }
                ini.sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some(section) = current.as_ref() else {
                return Err(Error::Config { line, msg: "key outside of any section".into() });
            };
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Config { line, msg: format!("expected key = value, got '{body}'") });
            };
            let key = key.trim().to_string();
            let allowed = KNOWN.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config { line, msg: format!("unknown key '{key}' in [{section}]") });
            }
            let map = ini.sections.get_mut(section).expect("section registered");
            if map.contains_key(&key) {
                return Err(Error::Config { line, msg: format!("duplicate key '{key}' in [{section}]") });
            }
            map.insert(key, Entry { value: value.trim().to_string(), line });
        }
        Ok(ini)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn line_of(&self, section: &str) -> usize {
        self.sections.get(section).and_then(|s| s.values().map(|e| e.line).min()).unwrap_or(0)
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config { line: e.line, msg: format!("'{}' is not a number", e.value) }),
        }
    }

    fn required(&self, section: &str, key: &str) -> Result<f64> {
        self.number(section, key)?.ok_or_else(|| Error::Config {
            line: self.line_of(section),
            msg: format!("missing key '{key}' in [{section}]"),
        })
    }

    fn integer(&self, section: &str, key: &str) -> Result<Option<u64>> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::Config { line: e.line, msg: format!("'{}' is not a nonnegative integer", e.value) }),
        }
    }

    fn list<V>(&self, section: &str, key: &str, item: impl Fn(&str) -> Option<V>) -> Result<Option<Vec<V>>> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|t| {
                let t = t.trim();
                item(t).ok_or_else(|| Error::Config { line: e.line, msg: format!("bad list item '{t}' for {key}") })
            })
            .collect::<Result<Vec<V>>>()
            .map(Some)
    }

    fn numbers(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.list(section, key, |t| t.parse().ok())
    }
}

fn parse_sign(t: &str) -> Option<Sign> {
    match t {
        "+" | "plus" => Some(Sign::Plus),
        "-" | "minus" => Some(Sign::Minus),
        _ => None,
    }
}

fn parse_cutoff(t: &str) -> Option<Cutoff> {
    match t {
        "none" => Some(Cutoff::None),
        "M" => Some(Cutoff::Outer),
        _ => t.parse().ok().map(Cutoff::At),
    }
}

/// Everything a subcommand may need, resolved from one file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec<f64>,
    pub envelope: EnvelopeSpec<f64>,
    pub energy: f64,
    pub s: f64,
    pub h: Option<f64>,
    pub eps: Option<f64>,
    pub sign: Sign,
    pub cutoff: Cutoff,
    pub tol: f64,
    pub profile_points: usize,
    pub r_min: f64,
    pub geometry: GeometrySpec,
    pub r_max: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub fit: Option<GrowthModel>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::parse(text)?;
        let potential = potential_from(&ini)?;
        let envelope = envelope_from(&ini, &potential)?;
        let c = "carleman";
        let energy = ini.number(c, "E")?.unwrap_or(1.0);
        let s = ini.number(c, "s")?.unwrap_or(1.0);
        let sign = match ini.entry(c, "sign") {
            None => Sign::Plus,
            Some(e) => parse_sign(&e.value).ok_or_else(|| Error::Config { line: e.line, msg: "sign must be + or -".into() })?,
        };
        let cutoff = match ini.entry(c, "cutoff_M") {
            None => Cutoff::None,
            Some(e) => parse_cutoff(&e.value)
                .ok_or_else(|| Error::Config { line: e.line, msg: "cutoff_M must be none, M or a radius".into() })?,
        };
        let geometry = geometry_from(&ini)?;
        let mut cfg = RunConfig {
            potential,
            envelope,
            energy,
            s,
            h: ini.number(c, "h")?,
            eps: ini.number(c, "eps")?,
            sign,
            cutoff,
            tol: ini.number(c, "tol")?.unwrap_or(crate::carleman_check::DEFAULT_TOL),
            profile_points: ini.integer(c, "points")?.map_or(crate::experiments::PROFILE_POINTS, |n| n as usize),
            r_min: ini.number(c, "r_min")?.unwrap_or(1e-4),
            geometry,
            r_max: ini.number("geometry", "r_max")?,
            sweep: None,
            fit: None,
        };
        if ini.has_section("sweep") {
            let (sweep, fit) = sweep_from(&ini, &cfg)?;
            cfg.sweep = Some(sweep);
            cfg.fit = fit;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { line: 0, msg: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text)
    }
}

fn potential_from(ini: &Ini) -> Result<PotentialSpec<f64>> {
    let p = "potential";
    let family = match ini.get(p, "family").unwrap_or("zero") {
        "zero" => Family::Zero,
        "smooth_well" => Family::SmoothWell {
            depth: ini.required(p, "depth")?,
            inner: ini.required(p, "inner")?,
            outer: ini.required(p, "outer")?,
            ramp: ini.number(p, "ramp")?.unwrap_or(0.1),
        },
        "double_barrier" => Family::DoubleBarrier {
            height: ini.required(p, "height")?,
            center: ini.required(p, "center")?,
            half_width: ini.required(p, "half_width")?,
        },
        "singular_power" => Family::SingularPower {
            amplitude: ini.required(p, "amplitude")?,
            exponent: ini.required(p, "exponent")?,
            cutoff: match ini.number(p, "support")? {
                Some(support) => Some((support, ini.number(p, "ramp")?.unwrap_or(0.5))),
                None => None,
            },
        },
        "long_range" => Family::LongRange { amplitude: ini.required(p, "amplitude")?, rho: ini.required(p, "rho")? },
        other => {
            let line = ini.entry(p, "family").map_or(0, |e| e.line);
            return Err(Error::Config { line, msg: format!("unknown potential family '{other}'") });
        }
    };
    PotentialSpec::new(family)
}

/// Radial sample used when fitting envelope constants automatically.
pub fn envelope_fit_grid(potential: &PotentialSpec<f64>) -> Vec<f64> {
    let end = potential.support_radius().map_or(200.0, |r0| (2.0 * r0 + 1.0).max(10.0));
    let mut grid = Vec::new();
    let mut r = 1e-4;
    while r < 1.0 {
        grid.push(r);
        r *= 1.0 + 1e-3;
    }
    let n = ((end - 1.0) / 1e-3).ceil() as usize;
    grid.extend((0..=n).map(|i| 1.0 + 1e-3 * i as f64));
    grid
}

fn envelope_from(ini: &Ini, potential: &PotentialSpec<f64>) -> Result<EnvelopeSpec<f64>> {
    let e = "envelope";
    let delta = ini.number(e, "delta")?.unwrap_or_else(|| potential.singular_exponent());
    let m_rho = ini.number(e, "m_rho")?.unwrap_or(1.0);
    let m = match ini.get(e, "m").unwrap_or("power") {
        "power" => Decay::Power { rho: m_rho },
        "log" => Decay::Log { rho: m_rho },
        other => {
            return Err(Error::Config { line: ini.entry(e, "m").map_or(0, |x| x.line), msg: format!("unknown m '{other}'") })
        }
    };
    let p_amp = ini.number(e, "p_amplitude")?.unwrap_or(0.0);
    let p = match ini.get(e, "p").unwrap_or("constant") {
        "zero" => FarBound::Zero,
        "constant" => FarBound::Constant(p_amp),
        "power" => FarBound::Power { amplitude: p_amp, rho: ini.number(e, "p_rho")?.unwrap_or(1.0) },
        other => {
            return Err(Error::Config { line: ini.entry(e, "p").map_or(0, |x| x.line), msg: format!("unknown p '{other}'") })
        }
    };
    match ini.get(e, "mode").unwrap_or("auto") {
        "auto" => EnvelopeSpec::tightest(potential, delta, p, m, &envelope_fit_grid(potential)),
        "explicit" => {
            let env = EnvelopeSpec::new(ini.required(e, "c0")?, ini.required(e, "c1")?, delta, p, m)?;
            let report = potential.check_assumptions(&env, &envelope_fit_grid(potential))?;
            if let Some(v) = report.violations.first() {
                return Err(Error::Envelope(format!(
                    "{:?} fails at r = {}: {} > {}",
                    v.bound, v.r, v.value, v.limit
                )));
            }
            Ok(env)
        }
        other => Err(Error::Config {
            line: ini.entry(e, "mode").map_or(0, |x| x.line),
            msg: format!("envelope mode must be auto or explicit, got '{other}'"),
        }),
    }
}

fn geometry_from(ini: &Ini) -> Result<GeometrySpec> {
    let g = "geometry";
    match ini.get(g, "kind").unwrap_or("line") {
        "line" => {
            if let Some(n) = ini.integer(g, "n")? {
                if n != 1 {
                    return Err(Error::UnsupportedDimension(n as usize));
                }
            }
            Ok(GeometrySpec::Line)
        }
        "half_line" => {
            let dim = ini.integer(g, "n")?.unwrap_or(3) as usize;
            if dim == 2 || dim == 0 {
                return Err(Error::UnsupportedDimension(dim));
            }
            Ok(GeometrySpec::HalfLine {
                dim,
                ell: ini.integer(g, "ell")?.unwrap_or(0) as usize,
                r_min: ini.number(g, "r_min")?.unwrap_or(1e-4),
            })
        }
        other => Err(Error::Config {
            line: ini.entry(g, "kind").map_or(0, |x| x.line),
            msg: format!("geometry kind must be line or half_line, got '{other}'"),
        }),
    }
}

fn sweep_from(ini: &Ini, cfg: &RunConfig) -> Result<(SweepSpec, Option<GrowthModel>)> {
    let w = "sweep";
    let mut spec = SweepSpec::new(cfg.potential.clone(), cfg.envelope.clone(), cfg.geometry);
    spec.s = cfg.s;
    spec.energies = ini.numbers(w, "E")?.unwrap_or_else(|| vec![cfg.energy]);
    spec.hs = ini.numbers(w, "h")?.unwrap_or_default();
    spec.epsilons = ini.numbers(w, "eps")?.unwrap_or_default();
    if let Some(c) = ini.list(w, "cutoff_M", parse_cutoff)? {
        spec.cutoffs = c;
    }
    if let Some(s) = ini.list(w, "sign", parse_sign)? {
        spec.signs = s;
    }
    if let Some(t) = ini.number(w, "tol")? {
        spec.tol = t;
    }
    if let Some(m) = ini.integer(w, "max_iter")? {
        spec.max_iter = m as usize;
    }
    if let Some(s) = ini.integer(w, "seed")? {
        spec.seed = s;
    }
    if let Some(c) = ini.number(w, "r_max_cap")? {
        spec.r_max_cap = c;
    }
    spec.verify = match ini.entry(w, "verify") {
        None => false,
        Some(e) => e.value.parse().map_err(|_| Error::Config { line: e.line, msg: "verify must be true or false".into() })?,
    };
    let fit = match ini.entry(w, "fit") {
        None => None,
        Some(e) => match e.value.as_str() {
            "none" => None,
            "exp" | "exp_in_inv_h" => Some(GrowthModel::ExpInInvH),
            "poly" | "poly_in_inv_h" => Some(GrowthModel::PolyInInvH),
            other => return Err(Error::Config { line: e.line, msg: format!("unknown fit model '{other}'") }),
        },
    };
    spec.validate().map_err(|err| Error::Config { line: ini.line_of(w), msg: err.to_string() })?;
    Ok((spec, fit))
}
