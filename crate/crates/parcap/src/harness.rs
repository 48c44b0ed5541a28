//! Experiment orchestration: configuration, CSV/JSON/SVG emission, golden
//! comparison with per-field tolerances, and the CLI entry point used by
//! the `parcap` binary.
//!
//! Every experiment is deterministic for a fixed config (no unseeded
//! randomness anywhere in the pipeline), so reruns produce byte-identical
//! CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::appendix::{kernel_max, series_bound_ratio, sharp_integral_ratio, InequalityReport};
use crate::capacity::{capacitary_measure, capacity_numeric, CapacityBackend, CapacityProblem};
use crate::domain::{ClosedSetSpec, ProblemParams};
use crate::error::{Error, Result};
use crate::pde::{
    bilateral_check, constant_data, flat_bound, sample_linear, solve_cauchy, very_singular_profile,
    ProfileKind, SolverConfig,
};
use crate::potential::equivalence_report;

/// Experiment description (JSON). Fields mirror the CLI flags; the config
/// file wins when both are given.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub q: f64,
    #[serde(default)]
    pub set: Option<ClosedSetSpec>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_probes_x")]
    pub probes_x: Vec<f64>,
    #[serde(default = "default_probe_times")]
    pub probe_times: Vec<f64>,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_refine")]
    pub capacity_refine: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_version")]
    pub version: u32,
}

fn default_h() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    0.2
}
fn default_probes_x() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 1.5, 2.0]
}
fn default_probe_times() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}
fn default_eps_list() -> Vec<f64> {
    vec![0.1, 0.05, 0.025]
}
fn default_refine() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    0
}
fn default_version() -> u32 {
    1
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.q)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if let Some(set) = &self.set {
            set.validate()?;
        }
        if !(self.h > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::Config("h and t_end must be positive".into()));
        }
        for &t in &self.probe_times {
            if t <= 0.0 || t > self.t_end + 1e-12 {
                return Err(Error::Config(format!(
                    "probe time {t} outside (0, t_end = {}]",
                    self.t_end
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Emission helpers
// ---------------------------------------------------------------------------

/// CSV with a fixed float format so identical runs are byte-identical.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::new();
    writeln!(text, "{}", header.join(",")).ok();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(text, "{}", line.join(",")).ok();
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Minimal polyline SVG: one line per series over a common scale.
pub fn write_svg_lines(path: &Path, title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> Result<()> {
    let (w, h) = (640.0, 400.0);
    let margin = 46.0;
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, pts) in series {
        for (x, y) in pts {
            xmin = xmin.min(*x);
            xmax = xmax.max(*x);
            ymin = ymin.min(*y);
            ymax = ymax.max(*y);
        }
    }
    if !xmin.is_finite() || xmax <= xmin {
        xmax = xmin + 1.0;
    }
    if !ymin.is_finite() || ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| margin + (x - xmin) / (xmax - xmin) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - ymin) / (ymax - ymin) * (h - 2.0 * margin);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    );
    writeln!(
        svg,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>",
        w - 2.0 * margin,
        h - 2.0 * margin
    )
    .ok();
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let path_data: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            path_data.join(" ")
        )
        .ok();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
            w - margin - 120.0,
            margin + 16.0 * (i + 1) as f64
        )
        .ok();
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Golden comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenTolerances {
    #[serde(default = "default_rel_tol")]
    pub default_rel_tol: f64,
    /// dotted JSON paths with their own relative tolerance
    #[serde(default)]
    pub fields: std::collections::HashMap<String, f64>,
}

fn default_rel_tol() -> f64 {
    1e-9
}

impl Default for GoldenTolerances {
    fn default() -> Self {
        Self {
            default_rel_tol: default_rel_tol(),
            fields: Default::default(),
        }
    }
}

/// Compare two JSON documents numerically. Returns the list of mismatches
/// (empty = pass); any schema difference is a mismatch naming the path.
pub fn golden_compare(
    new: &serde_json::Value,
    golden: &serde_json::Value,
    tol: &GoldenTolerances,
) -> Vec<String> {
    let mut diffs = Vec::new();
    walk("", new, golden, tol, &mut diffs);
    diffs
}

fn walk(
    path: &str,
    new: &serde_json::Value,
    golden: &serde_json::Value,
    tol: &GoldenTolerances,
    diffs: &mut Vec<String>,
) {
    use serde_json::Value::*;
    match (new, golden) {
        (Number(a), Number(b)) => {
            let (a, b) = (
                a.as_f64().unwrap_or(f64::NAN),
                b.as_f64().unwrap_or(f64::NAN),
            );
            let rel = tol.fields.get(path).copied().unwrap_or(tol.default_rel_tol);
            if !((a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)) {
                diffs.push(format!("{path}: {a} vs golden {b} (rel tol {rel})"));
            }
        }
        (Object(a), Object(b)) => {
            let keys: std::collections::BTreeSet<&std::string::String> =
                a.keys().chain(b.keys()).collect();
            for key in keys {
                let sub = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                match (a.get(key), b.get(key)) {
                    (Some(x), Some(y)) => walk(&sub, x, y, tol, diffs),
                    (Some(_), None) => diffs.push(format!("{sub}: missing in golden")),
                    (None, Some(_)) => diffs.push(format!("{sub}: missing in output")),
                    (None, None) => {}
                }
            }
        }
        (Array(a), Array(b)) => {
            if a.len() != b.len() {
                diffs.push(format!("{path}: length {} vs golden {}", a.len(), b.len()));
                return;
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                walk(&format!("{path}[{i}]"), x, y, tol, diffs);
            }
        }
        (x, y) if x == y => {}
        _ => diffs.push(format!("{path}: type/value mismatch")),
    }
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "parcap",
    about = "Capacitary potentials and maximal solutions of u_t - Δu + u^q = 0",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    // (see load_config: a config file overrides the individual flags)
    /// Spatial dimension N
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Absorption exponent q
    #[arg(long, default_value_t = 4.0)]
    q: f64,
    /// Output directory
    #[arg(long, default_value = "parcap-out")]
    out: PathBuf,
    /// JSON experiment config overriding the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Golden JSON file to compare the primary output against
    #[arg(long)]
    golden: Option<PathBuf>,
    /// Golden tolerance config (JSON)
    #[arg(long)]
    golden_tol: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Variational capacity of a set, with bracket and dual measure
    Capacity {
        #[command(flatten)]
        common: CommonArgs,
        /// Set: ball | interval | two-intervals | cantor | point
        #[arg(long, default_value = "ball")]
        set: String,
        /// Ball/interval radius
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Grid spacing (0 = automatic)
        #[arg(long, default_value_t = 0.0)]
        h: f64,
    },
    /// Series/integral capacitary potentials over a probe grid
    Potential {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "ball")]
        set: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Cauchy solve with flat or Gaussian data; probe table and snapshots
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Data: flat | gaussian
        #[arg(long, default_value = "gaussian")]
        data: String,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        #[arg(long, default_value_t = 0.5)]
        t_end: f64,
    },
    /// Maximal solution vs capacitary potential ratio table
    Sandwich {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "interval")]
        set: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Refinement factor for the stability check (1 = base only)
        #[arg(long, default_value_t = 1.0)]
        refine: f64,
    },
    /// Very singular self-similar profile by shooting
    Profile {
        #[command(flatten)]
        common: CommonArgs,
        /// Profile kind: radial | halfline
        #[arg(long, default_value = "radial")]
        kind: String,
    },
    /// Appendix inequality sweeps
    Appendix {
        #[command(flatten)]
        common: CommonArgs,
        /// Lemma: kernel | integral | series
        #[arg(long, default_value = "integral")]
        lemma: String,
        /// Sweep: "default" or a JSON file with tuples
        #[arg(long, default_value = "default")]
        sweep: String,
    },
    /// Quick run of every capability at coarse resolution
    All {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the verification suite (one check or all)
    Verify {
        /// Check name (see --check list) or "all"
        #[arg(long, default_value = "all")]
        check: String,
        /// Print the known check names and exit
        #[arg(long, default_value_t = false)]
        list: bool,
        /// Output directory for the JSON report
        #[arg(long, default_value = "parcap-out")]
        out: PathBuf,
    },
}

/// Entry point used by the binary: exit 0 on pass, 2 on assertion/run
/// failure, 1 on usage errors.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(Error::Config(msg)) | Err(Error::InvalidParams(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

impl CommonArgs {
    fn load_config(&self) -> Result<Option<ExperimentConfig>> {
        match &self.config {
            None => Ok(None),
            Some(path) => {
                let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                cfg.validate()?;
                Ok(Some(cfg))
            }
        }
    }

    /// Exponents from the config file when given, else from the flags.
    fn params(&self) -> Result<(ProblemParams, Option<ExperimentConfig>)> {
        let cfg = self.load_config()?;
        let params = match &cfg {
            Some(c) => c.params()?,
            None => ProblemParams::new(self.n, self.q)?,
        };
        Ok((params, cfg))
    }
}

fn parse_set(name: &str, radius: f64) -> Result<ClosedSetSpec> {
    Ok(match name {
        "ball" => ClosedSetSpec::Ball {
            center: vec![0.0],
            radius,
        },
        "interval" => ClosedSetSpec::interval(-radius, radius),
        "two-intervals" => ClosedSetSpec::Union {
            members: vec![
                ClosedSetSpec::interval(-radius - 1.0, -1.0),
                ClosedSetSpec::interval(1.0, radius + 1.0),
            ],
        },
        "cantor" => ClosedSetSpec::CantorSet {
            interval: [-radius, radius],
            ratio: 1.0 / 3.0,
            depth: 3,
        },
        "point" => ClosedSetSpec::point1(0.0),
        other => {
            return Err(Error::Config(format!(
                "unknown set '{other}' (ball | interval | two-intervals | cantor | point)"
            )))
        }
    })
}

fn check_golden(common: &CommonArgs, primary_json: &serde_json::Value) -> Result<bool> {
    let Some(golden_path) = &common.golden else {
        return Ok(true);
    };
    let golden: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(golden_path)?)?;
    let tol = match &common.golden_tol {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => GoldenTolerances::default(),
    };
    let diffs = golden_compare(primary_json, &golden, &tol);
    if diffs.is_empty() {
        println!("golden: PASS");
        Ok(true)
    } else {
        for d in &diffs {
            println!("golden mismatch: {d}");
        }
        Ok(false)
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Capacity {
            common,
            set,
            radius,
            h,
        } => {
            std::fs::create_dir_all(&common.out)?;
            let (params, cfg) = common.params()?;
            let spec = match cfg.as_ref().and_then(|c| c.set.clone()) {
                Some(s) => s,
                None => parse_set(&set, radius)?,
            };
            let mut prob = CapacityProblem::new(params, spec.clone())?;
            if h > 0.0 {
                prob.h = h;
            }
            let est = capacity_numeric(&prob)?;
            let nu = capacitary_measure(&prob)?;
            let out = serde_json::json!({
                "set": spec,
                "n": common.n,
                "q": common.q,
                "estimate": est,
                "dual_mass": nu.total_mass(),
            });
            let path = common.out.join("capacity.json");
            std::fs::write(&path, serde_json::to_string_pretty(&out)?)?;
            println!(
                "capacity value {:.6e} bracket [{:.6e}, {:.6e}] dual mass {:.6e} -> {}",
                est.value,
                est.bracket_lo,
                est.bracket_hi,
                nu.total_mass(),
                path.display()
            );
            let pass = est.validate().is_ok() && (nu.total_mass() / est.value - 1.0).abs() < 0.05;
            Ok(pass && check_golden(&common, &out)?)
        }
        Command::Potential {
            common,
            set,
            radius,
        } => {
            std::fs::create_dir_all(&common.out)?;
            let (params, cfg) = common.params()?;
            let spec = match cfg.as_ref().and_then(|c| c.set.clone()) {
                Some(s) => s,
                None => parse_set(&set, radius)?,
            };
            let probes_x = cfg
                .as_ref()
                .map(|c| c.probes_x.clone())
                .unwrap_or_else(default_probes_x);
            let probe_times = cfg
                .as_ref()
                .map(|c| c.probe_times.clone())
                .unwrap_or_else(default_probe_times);
            let cap = CapacityBackend::with_refinement(
                params,
                cfg.as_ref().map(|c| c.capacity_refine).unwrap_or(1.0),
            );
            let rows = equivalence_report(&spec, &probes_x, &probe_times, &params, &cap)?;
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.x,
                        r.t,
                        r.w_series,
                        r.w_integral,
                        r.ratio,
                        r.tail,
                        r.tail_envelope,
                    ]
                })
                .collect();
            write_csv(
                &common.out.join("potential.csv"),
                &[
                    "x",
                    "t",
                    "w_series",
                    "w_integral",
                    "ratio",
                    "tail",
                    "tail_envelope",
                ],
                &table,
            )?;
            let ratios: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.ratio)).collect();
            write_svg_lines(
                &common.out.join("potential_ratio.svg"),
                "integral/series potential ratio",
                &[("ratio", ratios)],
            )?;
            let finite = rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
            let out = serde_json::json!({"rows": rows.len(), "all_finite": finite});
            println!(
                "potential table: {} rows, finite ratios: {finite} -> {}",
                rows.len(),
                common.out.join("potential.csv").display()
            );
            Ok(finite && check_golden(&common, &out)?)
        }
        Command::Solve {
            common,
            data,
            h,
            t_end,
        } => {
            std::fs::create_dir_all(&common.out)?;
            let (params, file_cfg) = common.params()?;
            let h = file_cfg.as_ref().map(|c| c.h).unwrap_or(h);
            let t_end = file_cfg.as_ref().map(|c| c.t_end).unwrap_or(t_end);
            let mut cfg = SolverConfig::line(params, 6.0, h, t_end);
            if let Some(dt) = file_cfg.as_ref().and_then(|c| c.dt) {
                cfg.dt = dt;
            }
            let u0 = match data.as_str() {
                "flat" => constant_data(1e8, &cfg)?,
                "gaussian" => {
                    let mut g = cfg.grid()?;
                    let mut x = [0.0];
                    for i in 0..g.len() {
                        g.node(i, &mut x);
                        g.values[i] = (-x[0] * x[0]).exp();
                    }
                    g
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown data '{other}' (flat | gaussian)"
                    )))
                }
            };
            let times: Vec<f64> = default_probe_times()
                .into_iter()
                .filter(|t| *t <= t_end)
                .chain([t_end])
                .collect();
            let run = solve_cauchy(&u0, &cfg, &times, None)?;
            let mut rows = Vec::new();
            for (snap, &t) in run.snapshots.iter().zip(&times) {
                for &x in &default_probes_x() {
                    let u = sample_linear(snap, x);
                    let bound = flat_bound(&params, t);
                    rows.push(vec![x, t, u, bound, bound - u]);
                }
            }
            write_csv(
                &common.out.join("probes.csv"),
                &["x", "t", "u", "bound_OK1", "slack"],
                &rows,
            )?;
            if let Some(last) = run.snapshots.last() {
                let mut grid_rows = Vec::with_capacity(last.len());
                let mut x = [0.0];
                for i in 0..last.len() {
                    last.node(i, &mut x);
                    grid_rows.push(vec![x[0], last.values[i]]);
                }
                write_csv(
                    &common.out.join("final_snapshot.csv"),
                    &["x", "u"],
                    &grid_rows,
                )?;
            }
            let ok = rows.iter().all(|r| r[4] >= -1e-6 * r[3].abs());
            let out = serde_json::json!({"probe_rows": rows.len(), "bound_ok": ok});
            println!(
                "solve: {} probe rows, universal bound satisfied: {ok}",
                rows.len()
            );
            Ok(ok && check_golden(&common, &out)?)
        }
        Command::Sandwich {
            common,
            set,
            radius,
            refine,
        } => {
            std::fs::create_dir_all(&common.out)?;
            let (params, file_cfg) = common.params()?;
            let spec = match file_cfg.as_ref().and_then(|c| c.set.clone()) {
                Some(s) => s,
                None => parse_set(&set, radius)?,
            };
            let probes_x = file_cfg
                .as_ref()
                .map(|c| c.probes_x.clone())
                .unwrap_or_else(default_probes_x);
            let probe_times = file_cfg
                .as_ref()
                .map(|c| c.probe_times.clone())
                .unwrap_or_else(default_probe_times);
            let eps_list = file_cfg
                .as_ref()
                .map(|c| c.eps_list.clone())
                .unwrap_or_else(default_eps_list);
            let run = |factor: f64| -> Result<(f64, f64, Vec<Vec<f64>>)> {
                let cap = CapacityBackend::with_refinement(params, factor);
                let h = 0.02 / factor;
                let t_end = probe_times.iter().cloned().fold(0.2, f64::max);
                let mut cfg = SolverConfig::line(params, radius + 4.0, h, t_end);
                cfg.ramp = Some(crate::pde::TimeRamp {
                    dt0: 1e-8,
                    factor: 1.002,
                });
                let rows = bilateral_check(
                    &spec,
                    &cfg,
                    &cap,
                    &[1e2, 1e4, 1e6, 1e8],
                    &eps_list,
                    &probes_x,
                    &probe_times,
                )?;
                let mut rmin = f64::INFINITY;
                let mut rmax: f64 = 0.0;
                let table: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| {
                        if r.ratio.is_finite() {
                            rmin = rmin.min(r.ratio);
                            rmax = rmax.max(r.ratio);
                        }
                        vec![r.x, r.t, r.u, r.w, r.ratio]
                    })
                    .collect();
                Ok((rmin, rmax, table))
            };
            let (rmin, rmax, table) = run(refine)?;
            write_csv(
                &common.out.join("sandwich.csv"),
                &["x", "t", "u", "w_series", "ratio"],
                &table,
            )?;
            let envelope = rmax / rmin;
            println!("sandwich ratio range [{rmin:.4}, {rmax:.4}], envelope {envelope:.4}");
            let out = serde_json::json!({"rmin": rmin, "rmax": rmax, "envelope": envelope});
            let pass = rmin > 0.0 && rmax.is_finite();
            Ok(pass && check_golden(&common, &out)?)
        }
        Command::Profile { common, kind } => {
            std::fs::create_dir_all(&common.out)?;
            let (params, _) = common.params()?;
            let kind = match kind.as_str() {
                "radial" => ProfileKind::RadialVss,
                "halfline" => ProfileKind::HalfLine,
                other => {
                    return Err(Error::Config(format!(
                        "unknown profile kind '{other}' (radial | halfline)"
                    )))
                }
            };
            let profile = match very_singular_profile(&params, kind) {
                Ok(p) => p,
                Err(Error::NoProfileRegime(msg)) => {
                    return Err(Error::Config(msg));
                }
                Err(e) => return Err(e),
            };
            let rows: Vec<Vec<f64>> = profile
                .ys
                .iter()
                .zip(&profile.fs)
                .map(|(y, f)| vec![*y, *f])
                .collect();
            write_csv(&common.out.join("profile.csv"), &["y", "f"], &rows)?;
            let pts: Vec<(f64, f64)> = profile.ys.iter().cloned().zip(profile.fs.clone()).collect();
            write_svg_lines(
                &common.out.join("profile.svg"),
                "very singular profile",
                &[("f(y)", pts)],
            )?;
            println!(
                "profile f(0) = {:.8} on [0, {:.1}] -> {}",
                profile.f_origin,
                profile.ys.last().unwrap(),
                common.out.join("profile.csv").display()
            );
            let out = serde_json::json!({"f_origin": profile.f_origin});
            Ok(check_golden(&common, &out)?)
        }
        Command::Appendix {
            common,
            lemma,
            sweep,
        } => {
            std::fs::create_dir_all(&common.out)?;
            let report = run_appendix_sweep(&lemma, &sweep)?;
            let json_path = common.out.join(format!("appendix_{lemma}.json"));
            std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;
            write_csv(
                &common.out.join(format!("appendix_{lemma}.csv")),
                &["max_ratio"],
                &[vec![report.max_ratio]],
            )?;
            println!(
                "{}: max ratio {:.6e} at {:?}, pass = {} -> {}",
                report.name,
                report.max_ratio,
                report.argmax,
                report.pass,
                json_path.display()
            );
            let out = serde_json::to_value(&report)?;
            Ok(report.pass && check_golden(&common, &out)?)
        }
        Command::Verify { check, list, out } => {
            if list {
                for name in crate::verify::CHECK_NAMES {
                    println!("{name}");
                }
                return Ok(true);
            }
            std::fs::create_dir_all(&out)?;
            let names: Vec<&str> = if check == "all" {
                crate::verify::CHECK_NAMES.to_vec()
            } else {
                vec![check.as_str()]
            };
            let mut all = true;
            let mut report = Vec::new();
            for name in names {
                let outcome = crate::verify::run_check(name)?;
                let verdict = if outcome.pass { "PASS" } else { "FAIL" };
                println!("[{verdict}] {name}: {}", outcome.detail);
                all &= outcome.pass;
                report.push(serde_json::json!({
                    "check": name,
                    "pass": outcome.pass,
                    "detail": outcome.detail,
                }));
            }
            std::fs::write(
                out.join("verify.json"),
                serde_json::to_string_pretty(&serde_json::Value::Array(report))?,
            )?;
            Ok(all)
        }
        Command::All { common } => {
            let out = common.out.clone();
            let mut ok = true;
            for args in [
                vec!["parcap", "capacity", "--set", "interval", "--out"],
                vec!["parcap", "potential", "--set", "ball", "--out"],
                vec!["parcap", "solve", "--data", "gaussian", "--q", "2", "--out"],
                vec!["parcap", "profile", "--q", "2", "--out"],
                vec!["parcap", "appendix", "--lemma", "kernel", "--out"],
                vec!["parcap", "appendix", "--lemma", "series", "--out"],
            ] {
                let mut argv: Vec<std::ffi::OsString> = args.iter().map(|s| s.into()).collect();
                argv.push(out.clone().into_os_string());
                ok &= cli_run(argv) == 0;
            }
            Ok(ok)
        }
    }
}

/// Fixed, versioned sweeps (v1) for the appendix lemmas; "default" selects
/// them, a JSON path supplies custom tuples.
pub fn run_appendix_sweep(lemma: &str, sweep: &str) -> Result<InequalityReport> {
    match lemma {
        "kernel" => {
            let tuples: Vec<(f64, f64, f64, usize)> = if sweep == "default" {
                let mut v = Vec::new();
                for n in [1usize, 2, 3] {
                    for a in [0.5, 1.0, 2.0 * n as f64, 3.0 * n as f64, 8.0 * n as f64] {
                        v.push((a, 2.0 * a + 1.0, 1.0, n));
                        v.push((a, 2.0 * a + 1.0, 0.3, n));
                    }
                }
                v
            } else {
                serde_json::from_str(&std::fs::read_to_string(sweep)?)?
            };
            let mut worst = 0.0_f64;
            let mut arg = Vec::new();
            let mut pass = true;
            for (a, b, t, n) in tuples.iter().copied() {
                match kernel_max(a, b, t, n) {
                    Ok(km) => {
                        let rel = (km.value - km.grid_value).abs() / km.value;
                        if rel > worst {
                            worst = rel;
                            arg = vec![a, b, t, n as f64];
                        }
                    }
                    Err(_) => pass = false,
                }
            }
            Ok(InequalityReport {
                name: "kernel-max closed form vs grid search".into(),
                sweep: format!("{} tuples (v1)", tuples.len()),
                max_ratio: worst,
                argmax: arg,
                pass: pass && worst < 0.005,
            })
        }
        "integral" => {
            let tuples: Vec<(f64, f64, f64, f64)> = if sweep == "default" {
                default_integral_sweep()
            } else {
                serde_json::from_str(&std::fs::read_to_string(sweep)?)?
            };
            let mut max_ratio = 0.0_f64;
            let mut arg = Vec::new();
            for (a, b, abig, bbig) in tuples.iter().copied() {
                let r = sharp_integral_ratio(a, b, abig, bbig, 1.0)?;
                if r > max_ratio {
                    max_ratio = r;
                    arg = vec![a, b, abig, bbig];
                }
            }
            Ok(InequalityReport {
                name: "sharp two-Gaussian integral vs envelope".into(),
                sweep: format!("{} tuples (v1, kappa = 1)", tuples.len()),
                max_ratio,
                argmax: arg,
                pass: max_ratio.is_finite() && max_ratio > 0.0,
            })
        }
        "series" => {
            let mut max_ratio = 0.0_f64;
            let mut arg = Vec::new();
            for alpha in [0.5, 1.0, 2.0] {
                for beta in [-1.0, 0.0, 1.0] {
                    for n in [10usize, 20, 40, 80] {
                        let r = series_bound_ratio(alpha, beta, 2.0, 0.25, 2, n)?;
                        if r > max_ratio {
                            max_ratio = r;
                            arg = vec![alpha, beta, n as f64];
                        }
                    }
                }
            }
            Ok(InequalityReport {
                name: "square-root series vs envelope".into(),
                sweep: "alpha x beta x n grid (v1)".into(),
                max_ratio,
                argmax: arg,
                pass: max_ratio.is_finite(),
            })
        }
        other => Err(Error::Config(format!(
            "unknown lemma '{other}' (kernel | integral | series)"
        ))),
    }
}

/// v1 sweep: a, b in {0.25, 0.5, 1, 2, 3}; A in {0.5, ..., 8}; B chosen
/// with A B >= kappa = 1. At least 200 tuples.
pub fn default_integral_sweep() -> Vec<(f64, f64, f64, f64)> {
    let mut v = Vec::new();
    for a in [0.25, 0.5, 1.0, 2.0, 3.0] {
        for b in [0.25, 0.5, 1.0, 2.0, 3.0] {
            for abig in [0.5, 1.0, 2.0, 4.0, 8.0] {
                for bbig in [1.5 / abig, 2.0, 6.0] {
                    if bbig > 1.0 / abig {
                        v.push((a, b, abig, bbig));
                    }
                }
            }
        }
    }
    v
}
