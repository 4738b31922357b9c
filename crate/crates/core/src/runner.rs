//! JSON-configured experiments and their CSV / JSON reports.
//!
//! Every experiment produces [`VerificationReport`]s. The check table
//! `<experiment>.csv` has the columns
//! `instance_id, inequality_name, lhs, rhs, slack, pass`, sorted by instance id;
//! `<experiment>.json` holds the full reports and `summary.json` the pass
//! counts. Some experiments add a data table (stages, probe cells, ratios).
//! Files are written to a temporary file and renamed into place.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynsys::{make_grid_interval_shift, make_periodic_shift, make_random_system, DynSystem, MetricStyle};
use crate::groups::{
    build_folner_sofic, build_random_sofic, folner_defect, sofic_defects, FolnerSet, Fraction, GammaPolicy,
    GroupElement, GroupModel, SoficApproximation,
};
use crate::mapspace::{amenable_finite_stage, finite_stage_h, stage_seed, MapLimits, StageSeries};
use crate::metricspace::{
    separated_number, spanning_number, CountMode, FinitePseudometricSpace, Pseudometric, SolverLimits,
    DEFAULT_EXACT_GUARD,
};
use crate::theorems::{
    map_instance, probe_conjecture, product_instance, verify_orbit_identity, verify_product, verify_prop31,
    verify_prop32, Check, FamilyParams, ProbeRow, VerificationReport,
};
use crate::{Error, PExponent, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MDIMLAB_OUT_DIR";

/// Output directory when neither flag, config nor environment names one.
pub const FALLBACK_OUT_DIR: &str = "mdimlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VerifyProp31,
    VerifyProp32,
    VerifyLemma51,
    VerifyThm52,
    Sandwich,
    SoficCheck,
    OrbitIdentity,
    MdimAmenable,
    MdimSofic,
    ProbeConjecture,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::VerifyProp31,
        ExperimentKind::VerifyProp32,
        ExperimentKind::VerifyLemma51,
        ExperimentKind::VerifyThm52,
        ExperimentKind::Sandwich,
        ExperimentKind::SoficCheck,
        ExperimentKind::OrbitIdentity,
        ExperimentKind::MdimAmenable,
        ExperimentKind::MdimSofic,
        ExperimentKind::ProbeConjecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VerifyProp31 => "verify_prop31",
            ExperimentKind::VerifyProp32 => "verify_prop32",
            ExperimentKind::VerifyLemma51 => "verify_lemma51",
            ExperimentKind::VerifyThm52 => "verify_thm52",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::SoficCheck => "sofic_check",
            ExperimentKind::OrbitIdentity => "orbit_identity",
            ExperimentKind::MdimAmenable => "mdim_amenable",
            ExperimentKind::MdimSofic => "mdim_sofic",
            ExperimentKind::ProbeConjecture => "probe_conjecture",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::VerifyProp31 => "N_eps(Map, rho_p) <= N_eps(Map, rho_inf) on seeded exhaustive instances",
            ExperimentKind::VerifyProp32 => "N_eps(Map, rho_inf) <= lambda^d N_eps'(Map, rho_p) over a lambda grid",
            ExperimentKind::VerifyLemma51 => "product map-space containments and S / N product bounds",
            ExperimentKind::VerifyThm52 => "stage-wise (1/d) ln bounds for product systems",
            ExperimentKind::Sandwich => "N_2eps <= S_eps <= N_eps on seeded random pseudometric spaces",
            ExperimentKind::SoficCheck => "Folner-derived and random sofic defects",
            ExperimentKind::OrbitIdentity => "orbit-map distance identity and membership of orbit maps",
            ExperimentKind::MdimAmenable => "ln N_eps(X, rho_Fn) / |Fn| and its ratio to |ln eps| on grid shifts",
            ExperimentKind::MdimSofic => "sofic stage series (1/d_i) ln N_eps(Map, rho_p)",
            ExperimentKind::ProbeConjecture => "tail proxies of the liminf and limsup stage values over an (F, delta, eps) grid",
        }
    }

    fn needs_seed(self) -> bool {
        !matches!(self, ExperimentKind::OrbitIdentity | ExperimentKind::MdimAmenable)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// A system described in a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Full shift over `alphabet_size` symbols at mutual distance `distance`.
    PeriodicShift {
        alphabet_size: usize,
        #[serde(default = "one")]
        distance: f64,
        period: usize,
    },
    GridShift {
        m: usize,
        period: usize,
    },
    Random {
        group: GroupModel,
        n_points: usize,
        seed: u64,
        #[serde(default)]
        style: MetricStyle,
    },
}

fn one() -> f64 {
    1.0
}

impl SystemSpec {
    pub fn build(&self) -> Result<DynSystem> {
        match *self {
            SystemSpec::PeriodicShift {
                alphabet_size,
                distance,
                period,
            } => {
                if alphabet_size == 0 {
                    return Err(Error::config("system.alphabet_size", "must be at least 1"));
                }
                make_periodic_shift(&FinitePseudometricSpace::uniform(alphabet_size, distance), period)
            }
            SystemSpec::GridShift { m, period } => make_grid_interval_shift(m, period),
            SystemSpec::Random {
                group,
                n_points,
                seed,
                style,
            } => make_random_system(group, n_points, seed, style),
        }
    }
}

/// Parameter grids; each present grid must be nonempty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub lambda: Option<Vec<f64>>,
    pub p: Option<Vec<PExponent>>,
    pub eps: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    /// Følner sizes or stage sizes.
    pub n: Option<Vec<usize>>,
    /// Grid-shift resolutions.
    pub m: Option<Vec<usize>>,
    /// Random sofic sizes.
    pub d: Option<Vec<usize>>,
    /// Finite sets `F`, as canonical element strings.
    pub f: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    pub max_exact_component: usize,
    pub max_cliques: usize,
    pub max_candidates: usize,
    pub sample_budget: usize,
    pub greedy_fallback: bool,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        let map = MapLimits::default();
        LimitsConfig {
            max_exact_component: DEFAULT_EXACT_GUARD,
            max_cliques: map.solver.max_cliques,
            max_candidates: map.max_candidates,
            sample_budget: map.sample_budget,
            greedy_fallback: false,
        }
    }
}

impl LimitsConfig {
    fn solver(&self) -> SolverLimits {
        SolverLimits {
            max_exact_component: self.max_exact_component,
            max_cliques: self.max_cliques,
        }
    }

    fn map(&self, seed: u64) -> MapLimits {
        MapLimits {
            max_candidates: self.max_candidates,
            solver: self.solver(),
            sample_budget: self.sample_budget,
            seed,
            greedy_fallback: self.greedy_fallback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub instances: Option<usize>,
    #[serde(default)]
    pub family: Option<FamilyParams>,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tail_fraction: Option<f64>,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn nonempty<T>(name: &str, grid: &Option<Vec<T>>) -> Result<()> {
    match grid {
        Some(g) if g.is_empty() => Err(Error::config(format!("grids.{name}"), "grid must be nonempty")),
        _ => Ok(()),
    }
}

fn require<'a, T>(name: &str, value: &'a Option<T>) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::config(name, "required for this experiment"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config("<config>", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Structural checks; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grids;
        nonempty("lambda", &g.lambda)?;
        nonempty("p", &g.p)?;
        nonempty("eps", &g.eps)?;
        nonempty("delta", &g.delta)?;
        nonempty("n", &g.n)?;
        nonempty("m", &g.m)?;
        nonempty("d", &g.d)?;
        nonempty("f", &g.f)?;
        if let Some(lambda) = g.lambda.iter().flatten().find(|&&l| !(l > 1.0)) {
            return Err(Error::config("grids.lambda", format!("lambda must exceed 1, got {lambda}")));
        }
        if let Some(e) = g.eps.iter().flatten().find(|&&e| !(e > 0.0)) {
            return Err(Error::config("grids.eps", format!("eps must be positive, got {e}")));
        }
        if let Some(dl) = g.delta.iter().flatten().find(|&&dl| !(dl >= 0.0)) {
            return Err(Error::config("grids.delta", format!("delta must be nonnegative, got {dl}")));
        }
        if g.n.iter().flatten().any(|&n| n == 0) {
            return Err(Error::config("grids.n", "sizes must be positive"));
        }
        if g.d.iter().flatten().any(|&n| n == 0) {
            return Err(Error::config("grids.d", "sizes must be positive"));
        }
        if g.m.iter().flatten().any(|&n| n == 0) {
            return Err(Error::config("grids.m", "resolutions must be positive"));
        }
        if self.jobs == Some(0) {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        if let Some(t) = self.tail_fraction {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::config("tail_fraction", format!("must lie in (0, 1], got {t}")));
            }
        }
        if self.experiment.needs_seed() {
            require("seed", &self.seed)?;
        }
        use ExperimentKind::*;
        match self.experiment {
            VerifyProp31 | VerifyProp32 | VerifyLemma51 | VerifyThm52 | Sandwich => {
                if *require("instances", &self.instances)? == 0 {
                    return Err(Error::config("instances", "must be at least 1"));
                }
            }
            SoficCheck => {
                if g.n.is_none() && g.d.is_none() {
                    return Err(Error::config("grids.n", "sofic_check needs grids.n or grids.d"));
                }
            }
            OrbitIdentity => {
                require("system", &self.system)?;
                require("grids.n", &g.n)?;
                require("grids.f", &g.f)?;
                require("grids.delta", &g.delta)?;
            }
            MdimAmenable => {
                match require("system", &self.system)? {
                    SystemSpec::GridShift { .. } => {}
                    _ => return Err(Error::config("system.kind", "mdim_amenable needs a grid_shift system")),
                }
            }
            MdimSofic | ProbeConjecture => {
                require("system", &self.system)?;
                require("grids.f", &g.f)?;
                require("grids.delta", &g.delta)?;
                require("grids.eps", &g.eps)?;
                if g.n.is_none() && g.d.is_none() {
                    return Err(Error::config("grids.n", "stage sizes are required (grids.n or grids.d)"));
                }
            }
        }
        Ok(())
    }

    /// `--out`, then the config's `out`, then [`OUT_DIR_ENV`], then [`FALLBACK_OUT_DIR`].
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn p_grid(&self) -> Vec<PExponent> {
        self.grids.p.clone().unwrap_or_else(|| vec![PExponent::Infinity])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub total: usize,
    pub passes: usize,
    pub failures: usize,
    #[serde(skip)]
    pub wall_time_secs: f64,
    /// Smallest slack per inequality name.
    pub min_slack: BTreeMap<String, Value>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

fn extended(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// Writes reports sorted by instance id: one CSV row per check, or the full reports as JSON.
pub fn emit_report(reports: &[VerificationReport], format: ReportFormat, path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::invalid("no results to report"));
    }
    let mut sorted: Vec<&VerificationReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    match format {
        ReportFormat::Json => write_json(path, &sorted),
        ReportFormat::Csv => write_atomic(path, |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["instance_id", "inequality_name", "lhs", "rhs", "slack", "pass"])?;
            for r in sorted {
                for Check {
                    name,
                    lhs,
                    rhs,
                    slack,
                    pass,
                } in &r.checks
                {
                    out.write_record([
                        r.instance_id.as_str(),
                        name,
                        &lhs.to_string(),
                        &rhs.to_string(),
                        &slack.to_string(),
                        &pass.to_string(),
                    ])?;
                }
            }
            out.flush()?;
            Ok(())
        }),
    }
}

/// Outcome of one experiment's computation, before files are written.
struct Outcome {
    reports: Vec<VerificationReport>,
    tables: Vec<(String, Table)>,
}

enum Table {
    Csv(Vec<Value>, Vec<&'static str>),
    Json(Value),
}

fn wrap<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_instance(id))
}

/// Runs `config` and writes its reports under `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    config.validate()?;
    let start = Instant::now();
    let outcome = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?
            .install(|| compute(config))?,
        None => compute(config)?,
    };
    let name = config.experiment.name();
    let mut files = Vec::new();
    let csv_path = out_dir.join(format!("{name}.csv"));
    let json_path = out_dir.join(format!("{name}.json"));
    emit_report(&outcome.reports, ReportFormat::Csv, &csv_path)?;
    emit_report(&outcome.reports, ReportFormat::Json, &json_path)?;
    files.push(csv_path);
    files.push(json_path);
    for (file, table) in &outcome.tables {
        let path = out_dir.join(file);
        match table {
            Table::Csv(rows, header) => write_atomic(&path, |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(header)?;
                for row in rows {
                    let cells: Vec<String> = header
                        .iter()
                        .map(|h| match &row[*h] {
                            Value::String(s) => s.clone(),
                            Value::Null => String::new(),
                            v => v.to_string(),
                        })
                        .collect();
                    out.write_record(&cells)?;
                }
                out.flush()?;
                Ok(())
            })?,
            Table::Json(value) => write_json(&path, value)?,
        }
        files.push(path);
    }

    let total = outcome.reports.len();
    let passes = outcome.reports.iter().filter(|r| r.pass).count();
    let mut min_slack: BTreeMap<String, f64> = BTreeMap::new();
    for c in outcome.reports.iter().flat_map(|r| &r.checks) {
        let e = min_slack.entry(c.name.clone()).or_insert(f64::INFINITY);
        *e = e.min(c.slack);
    }
    let summary = RunSummary {
        experiment: config.experiment,
        total,
        passes,
        failures: total - passes,
        wall_time_secs: start.elapsed().as_secs_f64(),
        min_slack: min_slack.into_iter().map(|(k, v)| (k, extended(v))).collect(),
        files: Vec::new(),
    };
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    files.push(summary_path);
    Ok(RunSummary { files, ..summary })
}

fn compute(config: &ExperimentConfig) -> Result<Outcome> {
    use ExperimentKind::*;
    let reports_only = |reports| Outcome {
        reports,
        tables: Vec::new(),
    };
    match config.experiment {
        VerifyProp31 => map_family(config, false).map(reports_only),
        VerifyProp32 => map_family(config, true).map(reports_only),
        VerifyLemma51 => product_family(config, true).map(reports_only),
        VerifyThm52 => product_family(config, false).map(reports_only),
        Sandwich => sandwich(config).map(reports_only),
        SoficCheck => sofic_check(config).map(reports_only),
        OrbitIdentity => orbit_identity(config).map(reports_only),
        MdimAmenable => mdim_amenable(config),
        MdimSofic => mdim_sofic(config),
        ProbeConjecture => probe(config),
    }
}

fn map_family(config: &ExperimentConfig, prop32: bool) -> Result<Vec<VerificationReport>> {
    let seed = config.seed();
    let params = config.family.unwrap_or_default();
    let limits = config.limits.map(seed);
    let lambdas = config.grids.lambda.clone().unwrap_or_else(|| vec![1.5, 2.0, 4.0]);
    let reports: Vec<Vec<VerificationReport>> = (0..config.instances.unwrap_or(0))
        .into_par_iter()
        .map(|i| {
            let inst = map_instance(seed, i, &params)?;
            let ps = config.grids.p.clone().unwrap_or_else(|| vec![inst.p]);
            let mut out = Vec::new();
            for (k, &p) in ps.iter().enumerate() {
                let eps = config.grids.eps.as_ref().map_or(inst.eps, |g| g[i % g.len()]);
                let id = if ps.len() == 1 { inst.id.clone() } else { format!("{}-p{k}", inst.id) };
                if prop32 {
                    for (j, &lambda) in lambdas.iter().enumerate() {
                        let id = format!("{id}-l{j}");
                        out.push(wrap(&id, verify_prop32(&id, &inst.spec(), eps, p, lambda, &limits))?);
                    }
                } else {
                    out.push(wrap(&id, verify_prop31(&id, &inst.spec(), eps, p, &limits))?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(reports.into_iter().flatten().collect())
}

fn product_family(config: &ExperimentConfig, lemma: bool) -> Result<Vec<VerificationReport>> {
    let seed = config.seed();
    let params = config.family.unwrap_or_else(FamilyParams::products);
    let limits = config.limits.map(seed);
    (0..config.instances.unwrap_or(0))
        .into_par_iter()
        .map(|i| {
            let inst = product_instance(seed, i, &params)?;
            let (l, t) = wrap(&inst.id, verify_product(&inst.id, &inst.as_instance(), &limits))?;
            Ok(if lemma { l } else { t })
        })
        .collect()
}

fn sandwich(config: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let seed = config.seed();
    let max_points = config.family.map_or(12, |f| f.max_points);
    let fractions = config
        .grids
        .eps
        .clone()
        .unwrap_or_else(|| (0..20).map(|k| (f64::from(k) + 0.5) / 16.0).collect());
    let limits = config.limits.solver();
    (0..config.instances.unwrap_or(0))
        .into_par_iter()
        .map(|i| {
            let id = format!("{seed}-{i:04}");
            let s = stage_seed(seed, i);
            let style = if s.is_multiple_of(2) {
                MetricStyle::EuclideanEmbedding
            } else {
                MetricStyle::RandomUltrametric
            };
            let n = 1 + (s >> 8) as usize % max_points.max(1);
            let sys = wrap(&id, make_random_system(GroupModel::Integers, n, s, style))?;
            let space = sys.space();
            let all: Vec<usize> = (0..space.len()).collect();
            let diam = space.diameter().max(0.1);
            let mut r = VerificationReport::informational(&id, json!({ "n": n, "style": style, "diameter": diam }));
            for &frac in &fractions {
                let eps = diam * frac;
                let run = || -> Result<(usize, usize, usize)> {
                    Ok((
                        separated_number(space, &all, 2.0 * eps, CountMode::Exact, &limits)?.value,
                        spanning_number(space, &all, eps, CountMode::Exact, &limits)?.value,
                        separated_number(space, &all, eps, CountMode::Exact, &limits)?.value,
                    ))
                };
                let (n2, s_eps, n_eps) = wrap(&id, run())?;
                r.add_check("sandwich_lower", n2 as f64, s_eps as f64);
                r.add_check("sandwich_upper", s_eps as f64, n_eps as f64);
            }
            Ok(r)
        })
        .collect()
}

fn fraction(x: Fraction) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn sofic_check(config: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let int = GroupElement::Int;
    for &n in config.grids.n.iter().flatten() {
        let id = format!("folner-{n:06}");
        let f = wrap(&id, FolnerSet::interval(0, n as i64))?;
        let elements: Vec<GroupElement> = (-4..=4).map(int).collect();
        let sigma = wrap(&id, build_folner_sofic(&f, GammaPolicy::OrderPreserving, &elements))?;
        let mut r = VerificationReport::informational(&id, json!({ "group": "integers", "F": format!("[0,{n})") }));
        let d = |s: i64, t: i64| wrap(&id, sofic_defects(&sigma, &int(s), &int(t)));
        r.add_quantity("folner_defect_1", fraction(wrap(&id, folner_defect(&f, &int(1)))?));
        r.add_check("mul_defect_1_1", fraction(d(1, 1)?.mul_defect), 0.0);
        r.add_check("dist_agreement_0_1", fraction(d(0, 1)?.dist_agreement), 0.0);
        for s in [-2i64, -1, 1, 2] {
            for t in [-2i64, -1, 1, 2] {
                let bound = Fraction::new(s.unsigned_abs() + t.unsigned_abs() + (s + t).unsigned_abs(), n as u64);
                r.add_check("mul_defect_boundary_bound", fraction(d(s, t)?.mul_defect), fraction(bound));
            }
        }
        reports.push(r);
    }
    for (i, &dsize) in config.grids.d.iter().flatten().enumerate() {
        let id = format!("random-{dsize:06}");
        let seed = stage_seed(config.seed(), i);
        let sigma = wrap(&id, build_random_sofic(dsize, seed))?;
        let mut r = VerificationReport::informational(&id, json!({ "group": "free_rank2", "d": dsize, "seed": seed }));
        let e = GroupModel::FreeRank2.identity();
        let a: GroupElement = "a".parse()?;
        let b: GroupElement = "b".parse()?;
        r.add_quantity("fixed_point_fraction_a", fraction(wrap(&id, sofic_defects(&sigma, &a, &e))?.dist_agreement));
        r.add_quantity("agreement_a_b", fraction(wrap(&id, sofic_defects(&sigma, &a, &b))?.dist_agreement));
        let ball = GroupModel::FreeRank2.ball(2);
        let worst = ball
            .iter()
            .flat_map(|s| ball.iter().map(move |t| (s, t)))
            .map(|(s, t)| sofic_defects(&sigma, s, t).map(|x| fraction(x.mul_defect)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        r.add_check("word_composition_mul_defect", worst, 0.0);
        reports.push(r);
    }
    Ok(reports)
}

fn folner_for(group: GroupModel, n: usize) -> Result<FolnerSet> {
    match group {
        GroupModel::Integers => FolnerSet::interval(0, n as i64),
        GroupModel::IntegerPairs => FolnerSet::square(n as i64),
        GroupModel::Cyclic(m) => FolnerSet::cyclic_whole(m),
        GroupModel::FreeRank2 => Err(Error::config("system.group", "the free group has no Følner sets")),
    }
}

fn f_grid(config: &ExperimentConfig, group: GroupModel) -> Result<Vec<FolnerSet>> {
    config
        .grids
        .f
        .iter()
        .flatten()
        .map(|items| FolnerSet::parse(group, items).map_err(|e| Error::config("grids.f", e.to_string())))
        .collect()
}

fn orbit_identity(config: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let sys = require("system", &config.system)?.build()?;
    let fs = f_grid(config, sys.group())?;
    let mut cells = Vec::new();
    for (ni, &n) in config.grids.n.iter().flatten().enumerate() {
        for (fi, f) in fs.iter().enumerate() {
            for (di, &delta) in config.grids.delta.iter().flatten().enumerate() {
                cells.push((format!("n{ni:03}-f{fi:03}-d{di:03}"), n, f, delta));
            }
        }
    }
    cells
        .par_iter()
        .map(|(id, n, f, delta)| {
            let fnn = wrap(id, folner_for(sys.group(), *n))?;
            wrap(id, verify_orbit_identity(id, &sys, &fnn, f, *delta))
        })
        .collect()
}

fn mdim_amenable(config: &ExperimentConfig) -> Result<Outcome> {
    let Some(SystemSpec::GridShift { m, period }) = config.system.clone() else {
        return Err(Error::config("system.kind", "mdim_amenable needs a grid_shift system"));
    };
    let ms = config.grids.m.clone().unwrap_or_else(|| vec![m]);
    let ns = config.grids.n.clone().unwrap_or_else(|| vec![period]);
    let ps = config.p_grid();
    let limits = config.limits.solver();
    let mut cells = Vec::new();
    for &m in &ms {
        for &n in &ns {
            for &p in &ps {
                cells.push((m, n, p));
            }
        }
    }
    let results: Vec<(VerificationReport, Value)> = cells
        .par_iter()
        .map(|&(m, n, p)| {
            let id = format!("m{m:03}-n{n:03}-p{p}");
            let sys = wrap(&id, make_grid_interval_shift(m, period))?;
            let eps = 1.0 / m as f64;
            let fnn = wrap(&id, FolnerSet::interval(0, n as i64))?;
            let s = wrap(&id, amenable_finite_stage(&sys, &[fnn], eps, p, &limits))?;
            let stage = &s.series.stages[0];
            let mut r = VerificationReport::informational(
                &id,
                json!({ "m": m, "period": period, "n": n, "eps": eps, "p": p }),
            );
            r.add_quantity("count", stage.count as f64);
            r.add_quantity("value", stage.value);
            r.add_quantity("ratio", s.ratios[0]);
            let row = json!({
                "m": m, "period": period, "n": n, "p": p.to_string(), "eps": eps,
                "count": stage.count, "exactness": stage.exactness.to_string(),
                "value": stage.value, "ratio": s.ratios[0],
            });
            if p.is_infinite() {
                // distinct grid configurations differ by at least 1/m in some visible coordinate
                let visible = n.min(period) as u32;
                let expected = (m + 1).pow(visible);
                let expected_ratio = (expected as f64).ln() / n as f64 / (m as f64).ln();
                r.add_check("closed_form_count", (stage.count as f64 - expected as f64).abs(), 0.0);
                r.add_check("closed_form_ratio", (s.ratios[0] - expected_ratio).abs(), 1e-9);
            }
            Ok((r, row))
        })
        .collect::<Result<_>>()?;
    let (reports, rows): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(Outcome {
        reports,
        tables: vec![(
            "amenable_stages.csv".to_string(),
            Table::Csv(rows, vec!["m", "period", "n", "p", "eps", "count", "exactness", "value", "ratio"]),
        )],
    })
}

/// Stage approximations: Følner-derived on `[0, n)` (or squares) for amenable
/// groups, seeded random permutations of size `d` for the free group.
fn stage_sigmas(config: &ExperimentConfig, sys: &DynSystem, fs: &[FolnerSet]) -> Result<Vec<SoficApproximation>> {
    let group = sys.group();
    if group == GroupModel::FreeRank2 {
        let sizes = config.grids.d.clone().or_else(|| config.grids.n.clone()).unwrap_or_default();
        return sizes
            .iter()
            .enumerate()
            .map(|(i, &d)| build_random_sofic(d, stage_seed(config.seed(), i)))
            .collect();
    }
    let mut elements: Vec<GroupElement> = Vec::new();
    for g in fs.iter().flat_map(|f| f.elements()) {
        if !elements.contains(g) {
            elements.push(g.clone());
        }
    }
    config
        .grids
        .n
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, &n)| {
            let fnn = folner_for(group, n)?;
            build_folner_sofic(&fnn, GammaPolicy::SeededRandom(stage_seed(config.seed(), i)), &elements)
        })
        .collect()
}

fn mdim_sofic(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = require("system", &config.system)?.build()?;
    let fs = f_grid(config, sys.group())?;
    let sigmas = stage_sigmas(config, &sys, &fs)?;
    let limits = config.limits.map(config.seed());
    let tail = config.tail_fraction.unwrap_or(0.5);
    let mut cells = Vec::new();
    for (fi, f) in fs.iter().enumerate() {
        for &delta in config.grids.delta.iter().flatten() {
            for &eps in config.grids.eps.iter().flatten() {
                for &p in &config.p_grid() {
                    cells.push((cells.len(), fi, f, delta, eps, p));
                }
            }
        }
    }
    let results: Vec<(VerificationReport, Vec<Value>, Value)> = cells
        .par_iter()
        .map(|&(c, fi, f, delta, eps, p)| {
            let id = format!("cell{c:04}");
            let series: StageSeries = wrap(&id, finite_stage_h(&sys, &sigmas, f, delta, eps, p, tail, &limits))?;
            let mut r = VerificationReport::informational(
                &id,
                json!({ "F": f, "delta": delta, "eps": eps, "p": p, "stages": sigmas.len() }),
            );
            r.add_quantity("liminf_proxy", series.liminf_proxy);
            r.add_quantity("limsup_proxy", series.limsup_proxy);
            r.add_check("liminf_proxy_le_limsup_proxy", series.liminf_proxy, series.limsup_proxy);
            let rows = series
                .stages
                .iter()
                .map(|s| {
                    json!({
                        "cell": c, "f_index": fi, "delta": delta, "eps": eps, "p": p.to_string(),
                        "stage_index": s.stage_index, "d": s.d, "count": s.count,
                        "exactness": s.exactness.to_string(), "value": s.value.to_string(),
                    })
                })
                .collect();
            let summary = json!({
                "cell": c, "F": f, "delta": delta, "eps": eps, "p": p,
                "liminf_proxy": extended(series.liminf_proxy),
                "limsup_proxy": extended(series.limsup_proxy),
            });
            Ok((r, rows, summary))
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (r, rs, s) in results {
        reports.push(r);
        rows.extend(rs);
        summaries.push(s);
    }
    Ok(Outcome {
        reports,
        tables: vec![
            (
                "stages.csv".to_string(),
                Table::Csv(
                    rows,
                    vec!["cell", "f_index", "delta", "eps", "p", "stage_index", "d", "count", "exactness", "value"],
                ),
            ),
            ("stages_summary.json".to_string(), Table::Json(Value::Array(summaries))),
        ],
    })
}

fn probe(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = require("system", &config.system)?.build()?;
    let fs = f_grid(config, sys.group())?;
    let sigmas = stage_sigmas(config, &sys, &fs)?;
    let limits = config.limits.map(config.seed());
    let tail = config.tail_fraction.unwrap_or(0.5);
    let deltas = config.grids.delta.clone().unwrap_or_default();
    let epss = config.grids.eps.clone().unwrap_or_default();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for (k, &p) in config.p_grid().iter().enumerate() {
        let table: Vec<ProbeRow> = probe_conjecture(&sys, &sigmas, &fs, &deltas, &epss, p, tail, &limits)?;
        for (c, row) in table.into_iter().enumerate() {
            let id = format!("p{k}-cell{c:04}");
            let mut r = VerificationReport::informational(
                &id,
                json!({ "F": row.f, "delta": row.delta, "eps": row.eps, "p": p }),
            );
            r.add_quantity("liminf_proxy", row.liminf_proxy);
            r.add_quantity("limsup_proxy", row.limsup_proxy);
            r.add_quantity("gap", row.gap);
            r.add_check("liminf_proxy_le_limsup_proxy", row.liminf_proxy, row.limsup_proxy);
            reports.push(r);
            rows.push(json!({
                "p": p.to_string(), "f_index": row.f_index, "f": row.f, "delta": row.delta, "eps": row.eps,
                "liminf_proxy": row.liminf_proxy.to_string(), "limsup_proxy": row.limsup_proxy.to_string(),
                "gap": row.gap.to_string(), "stages": row.stages, "all_exact": row.all_exact,
            }));
        }
    }
    Ok(Outcome {
        reports,
        tables: vec![(
            "probe_table.csv".to_string(),
            Table::Csv(
                rows,
                vec!["p", "f_index", "f", "delta", "eps", "liminf_proxy", "limsup_proxy", "gap", "stages", "all_exact"],
            ),
        )],
    })
}

/// Process exit status for a run result: 0 success, 1 a failed check, 2 a
/// config error, 3 a guard overflow.
pub fn exit_code(result: &Result<RunSummary>) -> i32 {
    match result {
        Ok(s) if s.failures == 0 => 0,
        Ok(_) => 1,
        Err(e) => match e.root() {
            Error::Config { .. } | Error::InvalidInput(_) | Error::Json(_) => 2,
            Error::GuardExceeded { .. } | Error::NotExact(_) => 3,
            _ => 1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(text)
    }

    #[test]
    fn validation_names_fields() {
        let e = config(r#"{"experiment": "verify_prop32", "seed": 1, "instances": 2, "grids": {"lambda": []}}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "grids.lambda"), "{e}");
        let e = config(r#"{"experiment": "verify_prop31", "instances": 2}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "seed"));
        let e = config(r#"{"experiment": "nope"}"#).unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
        let e = config(r#"{"experiment": "sandwich", "seed": 1, "instances": 1, "bogus": 3}"#).unwrap_err();
        assert!(e.to_string().contains("bogus"));
        let e = config(r#"{"experiment": "orbit_identity", "system": {"kind": "grid_shift", "m": 2, "period": 2}, "grids": {"n": [3], "delta": [0.5]}}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "grids.f"));
    }

    #[test]
    fn prop31_smoke_run() {
        let cfg = config(
            r#"{"experiment": "verify_prop31", "seed": 5, "instances": 4,
                "limits": {"max_exact_component": 256}, "jobs": 2}"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let s = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!((s.total, s.passes, s.failures), (4, 4, 0));
        assert_eq!(exit_code(&Ok(s.clone())), 0);
        let csv = fs::read_to_string(dir.path().join("verify_prop31.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("instance_id,inequality_name,lhs,rhs,slack,pass"));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn guard_overflow_maps_to_exit_3() {
        let cfg = config(
            r#"{"experiment": "verify_prop31", "seed": 5, "instances": 6, "limits": {"max_candidates": 1}}"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = run_experiment(&cfg, dir.path());
        assert_eq!(exit_code(&r), 3);
        assert!(r.unwrap_err().to_string().starts_with("instance 5-"));
    }

    #[test]
    fn emit_report_sorts_and_formats() {
        let mut a = VerificationReport::informational("b", json!({}));
        a.add_check("x", f64::NEG_INFINITY, 0.0);
        let mut b = VerificationReport::informational("a", json!({}));
        b.add_check("y", 1.0, 2.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&[a, b], ReportFormat::Csv, &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "instance_id,inequality_name,lhs,rhs,slack,pass\na,y,1,2,1,true\nb,x,-inf,0,inf,true\n"
        );
        assert!(emit_report(&[], ReportFormat::Csv, &path).is_err());
    }

    #[test]
    fn out_dir_precedence() {
        let mut cfg = config(r#"{"experiment": "mdim_amenable", "system": {"kind": "grid_shift", "m": 2, "period": 2}}"#)
            .unwrap();
        assert_eq!(cfg.resolve_out_dir(Some(Path::new("flag"))), PathBuf::from("flag"));
        cfg.out = Some(PathBuf::from("cfg"));
        assert_eq!(cfg.resolve_out_dir(None), PathBuf::from("cfg"));
    }
}
