//! Scenario files and the `validate`, `solve` and `sweep` commands.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! model = "cylinder(1)"        # registry expression, or a [model] table
//! kappa = 0.0                  # scalar, or a list for `sweep`
//! p = { y = [0.0, 0.0], t = 0.0 }
//! q = { y = [1.0, 1.0], t = 0.0 }
//! out = "runs/cylinder"        # optional, relative to the scenario file
//!
//! [solver]
//! segments = 200
//! grad_tol = 1e-7
//!
//! [seeds]
//! straight = true
//! windings = [-2, -1, 0, 1, 2]
//! random = 4
//!
//! [validation]
//! lo = [-2.0, 0.0]
//! hi = [3.0, 6.3]
//! samples = 2000
//! ```
//!
//! A custom model replaces the string with a table of polynomial terms,
//! where `L0` is a polynomial in `(y1..ym, v1..vm)`:
//!
//! ```toml
//! [model]
//! dim = 1
//! l0 = [{ coef = 0.5, exps = [0, 2] }, { coef = -3.0, exps = [0, 0] }]
//! omega = [[{ coef = 0.25, exps = [1] }]]
//! d = [{ coef = 0.1, exps = [0] }]
//! periods = [0.0]              # 0 marks a non-periodic axis
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FermatError, Result};
use crate::lagrangian::{validate_assumptions, Region, ValidationReport};
use crate::model::{Point, PolynomialModel, StationaryModel, Topology};
use crate::poly::Polynomial;
use crate::registry::parse_model;
use crate::solver::{multi_start, MultiStart, SeedSpec, SolutionRecord, SolverOptions};
use crate::variational::Branch;

/// Environment variable naming the output directory when neither the
/// command line nor the scenario sets one.
pub const OUT_DIR_ENV: &str = "FERMAT_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "fermat-out";

/// Relative tolerance of the sweep monotonicity check.
pub const MONOTONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: PolynomialModel,
    pub p: Point,
    pub q: Point,
    pub kappas: Vec<f64>,
    pub solver: SolverOptions,
    pub seeds: SeedPlan,
    pub region: Region,
    pub samples: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedPlan {
    pub straight: bool,
    pub windings: Vec<i64>,
    pub random: u64,
}

impl Default for SeedPlan {
    fn default() -> Self {
        Self {
            straight: true,
            windings: Vec::new(),
            random: 0,
        }
    }
}

impl SeedPlan {
    pub fn seeds(&self) -> Vec<SeedSpec> {
        let mut seeds = Vec::new();
        if self.straight {
            seeds.push(SeedSpec::Straight);
        }
        seeds.extend(self.windings.iter().map(|&k| SeedSpec::Winding(k)));
        seeds.extend((0..self.random).map(SeedSpec::Random));
        seeds
    }
}

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub segments: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    model: toml::Value,
    p: RawPoint,
    q: RawPoint,
    kappa: RawKappa,
    #[serde(default)]
    solver: SolverOptions,
    #[serde(default)]
    seeds: SeedPlan,
    #[serde(default)]
    validation: RawValidation,
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    y: Vec<f64>,
    #[serde(default)]
    t: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawKappa {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawValidation {
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
    samples: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomModel {
    #[serde(default = "custom_name")]
    name: String,
    dim: usize,
    l0: Vec<RawTerm>,
    #[serde(default)]
    omega: Option<Vec<Vec<RawTerm>>>,
    #[serde(default)]
    d: Option<Vec<RawTerm>>,
    #[serde(default)]
    periods: Option<Vec<f64>>,
}

fn custom_name() -> String {
    "custom".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coef: f64,
    exps: Vec<u32>,
}

fn field_err(field: &str, message: impl Into<String>) -> FermatError {
    FermatError::Parse {
        location: Some(format!("field '{field}'")),
        message: message.into(),
    }
}

fn terms(field: &str, nvars: usize, raw: &[RawTerm]) -> Result<Polynomial> {
    let mut poly = Polynomial::zero(nvars);
    for (i, t) in raw.iter().enumerate() {
        if t.exps.len() != nvars {
            return Err(field_err(
                &format!("{field}[{i}].exps"),
                format!("expected {nvars} exponents, got {}", t.exps.len()),
            ));
        }
        if !t.coef.is_finite() {
            return Err(field_err(&format!("{field}[{i}].coef"), "coefficient must be finite"));
        }
        poly.push(t.coef, t.exps.clone());
    }
    Ok(poly)
}

fn custom_model(value: toml::Value) -> Result<PolynomialModel> {
    let c = CustomModel::deserialize(value).map_err(|e| field_err("model", e.to_string()))?;
    let m = c.dim;
    if m == 0 {
        return Err(field_err("model.dim", "dimension must be positive"));
    }
    let l0 = terms("model.l0", 2 * m, &c.l0)?;
    let omega = match &c.omega {
        None => vec![Polynomial::zero(m); m],
        Some(rows) if rows.len() == m => rows
            .iter()
            .enumerate()
            .map(|(k, r)| terms(&format!("model.omega[{k}]"), m, r))
            .collect::<Result<_>>()?,
        Some(rows) => {
            return Err(field_err(
                "model.omega",
                format!("expected {m} components, got {}", rows.len()),
            ))
        }
    };
    let d = c.d.as_deref().map(|d| terms("model.d", m, d)).transpose()?;
    let topology = match &c.periods {
        None => Topology::euclidean(m),
        Some(p) if p.len() == m => Topology::with_periods(
            p.iter().map(|&v| (v != 0.0).then_some(v)).collect(),
        )
        .map_err(|e| field_err("model.periods", e.to_string()))?,
        Some(_) => return Err(field_err("model.periods", format!("expected {m} entries"))),
    };
    PolynomialModel::new(c.name, m, l0, omega, d, topology)
        .map_err(|e| field_err("model", e.to_string()))
}

fn toml_location(text: &str, err: &toml::de::Error) -> Option<String> {
    let span = err.span()?;
    let before = &text[..span.start.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Some(format!("line {line}, column {col}"))
}

impl Scenario {
    /// Parses a scenario; relative output directories resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| FermatError::Parse {
            location: toml_location(text, &e),
            message: e.message().to_string(),
        })?;

        let model = match raw.model {
            toml::Value::String(s) => parse_model(&s).map_err(|e| field_err("model", e.to_string()))?,
            v @ toml::Value::Table(_) => custom_model(v)?,
            _ => return Err(field_err("model", "expected a registry string or a table")),
        };
        let m = model.dim();

        let point = |name: &str, rp: RawPoint| -> Result<Point> {
            if rp.y.len() != m {
                return Err(field_err(
                    &format!("{name}.y"),
                    format!("model '{}' needs {m} coordinates, got {}", model.name(), rp.y.len()),
                ));
            }
            let pt = Point::new(rp.y, rp.t);
            if !pt.is_finite() {
                return Err(field_err(name, "coordinates must be finite"));
            }
            Ok(pt)
        };
        let p = point("p", raw.p)?;
        let q = point("q", raw.q)?;

        let kappas = match raw.kappa {
            RawKappa::One(k) => vec![k],
            RawKappa::Many(ks) => ks,
        };
        if kappas.iter().any(|k| !k.is_finite()) {
            return Err(field_err("kappa", "values must be finite"));
        }

        raw.solver
            .validate()
            .map_err(|e| field_err("solver", e.to_string()))?;

        let (lo, hi) = default_region(&model, &p, &q);
        let lo = raw.validation.lo.unwrap_or(lo);
        let hi = raw.validation.hi.unwrap_or(hi);
        if lo.len() != m || hi.len() != m {
            return Err(field_err("validation", format!("lo and hi need {m} coordinates")));
        }
        let samples = raw.validation.samples.unwrap_or(2000);
        if samples == 0 {
            return Err(field_err("validation.samples", "must be positive"));
        }

        let out = raw.out.map(|o| match base_dir {
            Some(b) if o.is_relative() => b.join(o),
            _ => o,
        });

        Ok(Self {
            model,
            p,
            q,
            kappas,
            solver: raw.solver,
            seeds: raw.seeds,
            region: Region::new(lo, hi),
            samples,
            out,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| FermatError::Parse {
            location: Some(path.display().to_string()),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(n) = o.segments {
            self.solver.segments = n;
        }
        if let Some(s) = o.seed {
            self.solver.rng_seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self.solver.validate()
    }

    /// Output directory: explicit setting, then the environment, then a fixed default.
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
        })
    }
}

/// Box spanned by the endpoints plus a unit margin; periodic axes use one period.
fn default_region(model: &PolynomialModel, p: &Point, q: &Point) -> (Vec<f64>, Vec<f64>) {
    let top = model.topology();
    (0..model.dim())
        .map(|k| match top.period(k) {
            Some(per) => (0.0, per),
            None => (p.y[k].min(q.y[k]) - 1.0, p.y[k].max(q.y[k]) + 1.0),
        })
        .unzip()
}

/// Report of `validate` together with the admissibility verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationOutcome {
    pub model: String,
    pub report: ValidationReport,
    pub kappa: Vec<KappaVerdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaVerdict {
    pub kappa: f64,
    pub admissible: bool,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.report.convexity_ok() && self.kappa.iter().all(|k| k.admissible)
    }

    /// The failure as an error, if any.
    pub fn gate(&self) -> Result<()> {
        if !self.report.convexity_ok() {
            return Err(FermatError::Inadmissible {
                kappa: self.kappa.first().map_or(f64::NAN, |k| k.kappa),
                reason: format!(
                    "sampled convexity margin {} is not positive",
                    self.report.convexity_margin
                ),
            });
        }
        match self.kappa.iter().find(|k| !k.admissible) {
            Some(k) => Err(FermatError::Inadmissible {
                kappa: k.kappa,
                reason: format!(
                    "kappa must not exceed -sup L(x,0) = {}",
                    self.report.kappa_admissible_bound
                ),
            }),
            None => Ok(()),
        }
    }

    pub fn render(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(s, "model                  {}", self.model);
        let _ = writeln!(s, "samples                {}", r.samples);
        let _ = writeln!(s, "Q(K) = -1              {}", r.qk_check);
        let _ = writeln!(s, "convexity margin       {:.6e}", r.convexity_margin);
        let _ = writeln!(s, "growth                 {}", r.growth_ok);
        let _ = writeln!(s, "energy lower bound     {}", r.energy_bound_ok);
        let _ = writeln!(s, "sup L(x, 0)            {:.6e}", r.sup_l0_at_zero);
        let _ = writeln!(s, "kappa bound            {:.6e}", r.kappa_admissible_bound);
        let _ = writeln!(s, "cone samples           {}", r.cone_samples);
        for k in &self.kappa {
            let verdict = if k.admissible { "admissible" } else { "REJECTED" };
            let _ = writeln!(s, "kappa {:<16} {verdict}", k.kappa);
        }
        s
    }
}

pub fn run_validation(sc: &Scenario) -> Result<ValidationOutcome> {
    let report = validate_assumptions(&sc.model, &sc.region, sc.samples, sc.solver.rng_seed)?;
    let kappa = sc
        .kappas
        .iter()
        .map(|&k| KappaVerdict {
            kappa: k,
            admissible: report.admits(k),
        })
        .collect();
    Ok(ValidationOutcome {
        model: sc.model.name().to_string(),
        report,
        kappa,
    })
}

/// Runs the sampled assumption checks and writes `validation.json`.
/// The caller decides the exit status from [`ValidationOutcome::passed`].
pub fn cmd_validate(sc: &Scenario, out: &Path) -> Result<ValidationOutcome> {
    let outcome = run_validation(sc)?;
    fs::create_dir_all(out)?;
    write_json(&out.join("validation.json"), &outcome)?;
    Ok(outcome)
}

/// Result of one `solve`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub kappa: f64,
    pub run: MultiStart,
}

impl SolveOutcome {
    pub fn converged(&self) -> Vec<&SolutionRecord> {
        self.run.converged().collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<6} {:>20} {:>8} {:>11} {:>11} {:>11} {:>6}",
            "branch", "time", "winding", "el_resid", "energy_dev", "noether_dev", "iters"
        );
        for r in &self.run.records {
            let flag = if r.converged { "" } else { "  (not converged)" };
            let _ = writeln!(
                s,
                "{:<6} {:>20.15} {:>8} {:>11.3e} {:>11.3e} {:>11.3e} {:>6}{flag}",
                r.branch.to_string(),
                r.time(),
                winding_label(&r.winding),
                r.el_residual,
                r.energy_dev,
                r.noether_dev,
                r.iters
            );
        }
        for (seed, err) in &self.run.failures {
            let _ = writeln!(s, "seed {seed} failed: {err}");
        }
        s
    }
}

fn winding_label(w: &[i64]) -> String {
    w.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

const SUMMARY_HEADER: [&str; 9] = [
    "branch",
    "t_plus",
    "t_minus",
    "winding",
    "el_residual",
    "energy_dev",
    "noether_dev",
    "iters",
    "seed",
];

fn summary_row(r: &SolutionRecord) -> Vec<String> {
    vec![
        r.branch.to_string(),
        fmt17(r.arrival.t_plus),
        fmt17(r.arrival.t_minus),
        winding_label(&r.winding),
        fmt17(r.el_residual),
        fmt17(r.energy_dev),
        fmt17(r.noether_dev),
        r.iters.to_string(),
        r.seed.clone(),
    ]
}

/// `records.json` entry; paths are referenced by file name.
#[derive(Serialize)]
struct RecordFile<'a> {
    seed: &'a str,
    branch: Branch,
    converged: bool,
    iters: usize,
    grad_norm: f64,
    winding: &'a [i64],
    arrival: &'a crate::variational::ArrivalEvaluation,
    el_residual: f64,
    energy_dev: f64,
    noether_dev: f64,
    z_star: String,
    geodesic: String,
}

#[derive(Serialize)]
struct RunFile<'a> {
    model: String,
    topology: String,
    p: &'a Point,
    q: &'a Point,
    kappa: f64,
    solver: &'a SolverOptions,
    records: Vec<RecordFile<'a>>,
    failures: Vec<Failure<'a>>,
}

#[derive(Serialize)]
struct Failure<'a> {
    seed: &'a str,
    error: &'a str,
}

/// Solves one energy level and writes `summary.csv`, `records.json` and the
/// path tables under `paths/`. Fails with exit status 4 when no seed converges.
pub fn cmd_solve(sc: &Scenario, out: &Path) -> Result<SolveOutcome> {
    let kappa = match sc.kappas.as_slice() {
        [k] => *k,
        [] => return Err(FermatError::Argument("kappa list is empty".into())),
        _ => {
            return Err(FermatError::Argument(
                "solve takes a single kappa; use sweep for a list".into(),
            ))
        }
    };
    run_validation(sc)?.gate()?;
    let outcome = solve_level(sc, kappa, out)?;
    if outcome.run.converged().next().is_none() {
        return Err(FermatError::NoConvergence {
            attempts: sc.seeds.seeds().len(),
        });
    }
    Ok(outcome)
}

fn solve_level(sc: &Scenario, kappa: f64, out: &Path) -> Result<SolveOutcome> {
    let seeds = sc.seeds.seeds();
    if seeds.is_empty() {
        return Err(FermatError::Argument("the seed plan is empty".into()));
    }
    let run = multi_start(&sc.model, &sc.p, &sc.q, kappa, &seeds, &sc.solver);

    let paths_dir = out.join("paths");
    fs::create_dir_all(&paths_dir)?;

    let mut summary = csv::Writer::from_path(out.join("summary.csv"))?;
    summary.write_record(SUMMARY_HEADER)?;
    let mut records = Vec::new();
    for (i, r) in run.records.iter().enumerate() {
        let z_name = format!("paths/record-{i:03}-z.csv");
        let g_name = format!("paths/record-{i:03}-geodesic.csv");
        r.z_star.write_table(io::BufWriter::new(fs::File::create(out.join(&z_name))?))?;
        r.geodesic
            .write_table(io::BufWriter::new(fs::File::create(out.join(&g_name))?))?;
        if r.converged {
            summary.write_record(summary_row(r))?;
        }
        records.push(RecordFile {
            seed: &r.seed,
            branch: r.branch,
            converged: r.converged,
            iters: r.iters,
            grad_norm: r.grad_norm,
            winding: &r.winding,
            arrival: &r.arrival,
            el_residual: r.el_residual,
            energy_dev: r.energy_dev,
            noether_dev: r.noether_dev,
            z_star: z_name,
            geodesic: g_name,
        });
    }
    summary.flush()?;

    let file = RunFile {
        model: sc.model.name(),
        topology: sc.model.topology().to_string(),
        p: &sc.p,
        q: &sc.q,
        kappa,
        solver: &sc.solver,
        records,
        failures: run
            .failures
            .iter()
            .map(|(seed, error)| Failure { seed, error })
            .collect(),
    };
    write_json(&out.join("records.json"), &file)?;
    Ok(SolveOutcome { kappa, run })
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kappa: f64,
    pub record: SolutionRecord,
    /// False if a record of the same winding class at a larger kappa has a
    /// later (plus branch) or earlier (minus branch) arrival.
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub levels: Vec<SolveOutcome>,
    pub rows: Vec<SweepRow>,
}

impl SweepOutcome {
    pub fn monotone(&self) -> bool {
        self.rows.iter().all(|r| r.monotone)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>12} {:>20} {:>8} {:>11} monotone", "kappa", "time", "winding", "el_resid");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>12} {:>20.15} {:>8} {:>11.3e} {}",
                r.kappa,
                r.record.time(),
                winding_label(&r.record.winding),
                r.record.el_residual,
                r.monotone
            );
        }
        s
    }
}

/// Runs [`cmd_solve`] per kappa (into `kappa-<i>/`) and writes the long
/// table `sweep.csv`. Every kappa is checked for admissibility first.
pub fn cmd_sweep(sc: &Scenario, out: &Path) -> Result<SweepOutcome> {
    if sc.kappas.is_empty() {
        return Err(FermatError::Argument("kappa list is empty".into()));
    }
    run_validation(sc)?.gate()?;

    let mut levels = Vec::new();
    for (i, &k) in sc.kappas.iter().enumerate() {
        let dir = out.join(format!("kappa-{i:03}"));
        fs::create_dir_all(&dir)?;
        levels.push(solve_level(sc, k, &dir)?);
    }

    let mut rows: Vec<SweepRow> = levels
        .iter()
        .flat_map(|l| {
            l.run.converged().map(|r| SweepRow {
                kappa: l.kappa,
                record: r.clone(),
                monotone: true,
            })
        })
        .collect();
    let snapshot = rows.clone();
    for row in &mut rows {
        row.monotone = snapshot.iter().all(|other| {
            if other.record.winding != row.record.winding || other.kappa <= row.kappa {
                return true;
            }
            let (a, b) = (row.record.time(), other.record.time());
            let tol = MONOTONE_TOL * (1.0 + a.abs());
            match row.record.branch {
                Branch::Plus => b <= a + tol,
                Branch::Minus => b >= a - tol,
            }
        });
    }

    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    let mut header = vec!["kappa"];
    header.extend(SUMMARY_HEADER);
    header.push("monotone");
    w.write_record(&header)?;
    for r in &rows {
        let mut row = vec![fmt17(r.kappa)];
        row.extend(summary_row(&r.record));
        row.push(r.monotone.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;

    if let Some(l) = levels.iter().find(|l| l.run.converged().next().is_none()) {
        eprintln!("no converged record at kappa = {}", l.kappa);
        return Err(FermatError::NoConvergence {
            attempts: sc.seeds.seeds().len(),
        });
    }
    Ok(SweepOutcome { levels, rows })
}

/// Pretty JSON with every float written with 17 significant digits.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci17::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    fs::write(path, buf)?;
    Ok(())
}

#[derive(Default)]
struct Sci17 {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for Sci17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
