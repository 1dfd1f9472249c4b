//! Run orchestration and on-disk reports.
//!
//! A run directory holds:
//! - `trajectory.csv`: one row per record, columns [`CSV_COLUMNS`]
//! - `dense.csv`: one row per step, columns [`DENSE_COLUMNS`]
//! - `summary.json`: scenario, config, trajectory metadata and verdicts
//! - `*.svg`: optional line charts of selected columns

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{evolve, FlowConfig, TrajectoryRecord};
use crate::gbc::{chern_density_closed_form, chern_density_pfaffian};
use crate::monitor::{
    evaluate_checks, pointwise_det_inequality, Check, DenseSample, MonitorRecord, TrajectoryMeta,
    CHECK_NAMES, CSV_COLUMNS, DENSE_COLUMNS,
};
use crate::scenario::ScenarioSpec;
use crate::spacelike::AnyState;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const DENSE_CSV: &str = "dense.csv";
pub const SUMMARY_JSON: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: ScenarioSpec,
    pub config: FlowConfig,
    pub meta: TrajectoryMeta,
    pub verdicts: BTreeMap<String, Check>,
    pub all_pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub trajectory: TrajectoryRecord,
    pub csv_path: PathBuf,
    pub dense_path: PathBuf,
    pub summary_path: PathBuf,
    pub svg_paths: Vec<PathBuf>,
}

impl RunReport {
    pub fn aborted(&self) -> bool {
        self.summary.meta.abort.is_some()
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn records_csv(records: &[MonitorRecord]) -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        let row: Vec<String> = r.values().iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn dense_csv(dense: &[DenseSample]) -> String {
    let mut s = DENSE_COLUMNS.join(",");
    s.push('\n');
    for d in dense {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(d.t),
            fmt_f64(d.vol),
            fmt_f64(d.int_h2),
            fmt_f64(d.mh),
            fmt_f64(d.int_a_nm2)
        );
    }
    s
}

fn parse_rows(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Format("empty csv".into()))?;
    if head.split(',').collect::<Vec<_>>() != header {
        return Err(Error::Format(format!("unexpected csv header '{head}'")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("{c}: {e}")))
                })
                .collect()
        })
        .collect()
}

pub fn parse_records_csv(text: &str) -> Result<Vec<MonitorRecord>> {
    parse_rows(text, &CSV_COLUMNS)?
        .iter()
        .map(|r| MonitorRecord::from_values(r))
        .collect()
}

pub fn parse_dense_csv(text: &str) -> Result<Vec<DenseSample>> {
    parse_rows(text, &DENSE_COLUMNS)?
        .into_iter()
        .map(|r| {
            if r.len() != DENSE_COLUMNS.len() {
                return Err(Error::Format("dense row width".into()));
            }
            Ok(DenseSample {
                t: r[0],
                vol: r[1],
                int_h2: r[2],
                mh: r[3],
                int_a_nm2: r[4],
            })
        })
        .collect()
}

pub fn evolve_any(state: &AnyState, config: &FlowConfig) -> Result<TrajectoryRecord> {
    let mut sink = |_: &MonitorRecord| {};
    match state {
        AnyState::Grid(s) => evolve(s, config, &mut sink),
        AnyState::Homogeneous(s) => evolve(s, config, &mut sink),
    }
}

/// Builds the scenario, evolves it, evaluates every check and writes the run directory.
pub fn run(spec: &ScenarioSpec, config: &FlowConfig, out: &Path, svg: bool) -> Result<RunReport> {
    config.validate()?;
    let state = spec.build()?;
    let traj = evolve_any(&state, config)?;
    let meta = TrajectoryMeta::of(&traj);
    let checks = evaluate_checks(&meta, &traj.records, &traj.dense)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let verdicts: BTreeMap<String, Check> =
        checks.into_iter().map(|c| (c.name.clone(), c)).collect();
    let summary = Summary {
        scenario: spec.clone(),
        config: config.clone(),
        meta,
        verdicts,
        all_pass,
    };

    fs::create_dir_all(out)?;
    let csv_path = out.join(TRAJECTORY_CSV);
    let dense_path = out.join(DENSE_CSV);
    let summary_path = out.join(SUMMARY_JSON);
    fs::write(&csv_path, records_csv(&traj.records))?;
    fs::write(&dense_path, dense_csv(&traj.dense))?;
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    let svg_paths = if svg {
        write_plots(out, &traj.records)?
    } else {
        Vec::new()
    };

    Ok(RunReport {
        summary,
        trajectory: traj,
        csv_path,
        dense_path,
        summary_path,
        svg_paths,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Checks whose recomputed verdict differs from the stored one.
    pub mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.mismatches.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

/// Recomputes every verdict of a run directory from its CSV files.
pub fn verify(dir: &Path) -> Result<VerifyReport> {
    let summary: Summary = serde_json::from_str(&fs::read_to_string(dir.join(SUMMARY_JSON))?)?;
    let records = parse_records_csv(&fs::read_to_string(dir.join(TRAJECTORY_CSV))?)?;
    let dense = parse_dense_csv(&fs::read_to_string(dir.join(DENSE_CSV))?)?;
    let checks = evaluate_checks(&summary.meta, &records, &dense)?;
    let mut mismatches = Vec::new();
    for name in CHECK_NAMES {
        let fresh = checks.iter().find(|c| c.name == name).map(|c| c.pass);
        let stored = summary.verdicts.get(name).map(|c| c.pass);
        if fresh != stored {
            mismatches.push(format!("{name}: stored {stored:?}, recomputed {fresh:?}"));
        }
    }
    Ok(VerifyReport { checks, mismatches })
}

// ---------------------------------------------------------------------------
// Oracle sweep

#[derive(Debug, Clone, Serialize)]
pub struct OracleDimension {
    pub n: usize,
    pub trials: usize,
    /// `max |pfaffian − closed| / (1 + |closed|)`
    pub max_deviation: f64,
    pub eigen_draws: usize,
    pub eigen_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub dimensions: Vec<OracleDimension>,
}

pub const EIGEN_DRAWS: usize = 100_000;

/// Random symmetric positive-definite `n×n` matrix, well conditioned.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.5
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
    (&a + a.transpose()) * 0.5
}

pub fn oracle(
    trials: usize,
    dims: &[usize],
    seed: u64,
    eigen_draws: usize,
) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dimensions = Vec::new();
    for &n in dims {
        if !matches!(n, 2 | 4 | 6) {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut max_deviation: f64 = 0.0;
        for _ in 0..trials {
            let g = random_spd(&mut rng, n);
            let h = random_symmetric(&mut rng, n);
            let closed = chern_density_closed_form(&g, &h, n)?;
            let pf = chern_density_pfaffian(&g, &h, n)?;
            max_deviation = max_deviation.max((pf - closed).abs() / (1.0 + closed.abs()));
        }
        let mut violations = 0;
        let mut lambda = vec![0.0; n];
        for _ in 0..eigen_draws {
            for l in lambda.iter_mut() {
                *l = rng.gen_range(-10.0..=10.0);
            }
            if !pointwise_det_inequality(&lambda)?.holds {
                violations += 1;
            }
        }
        dimensions.push(OracleDimension {
            n,
            trials,
            max_deviation,
            eigen_draws,
            eigen_violations: violations,
        });
    }
    Ok(OracleReport { seed, dimensions })
}

// ---------------------------------------------------------------------------
// Plots

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

fn line_chart(title: &str, xs: &[f64], series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 56.0;
    let finite = |v: &f64| v.is_finite();
    let (xmin, xmax) = bounds(xs.iter().copied().filter(finite));
    let (ymin, ymax) = bounds(
        series
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .filter(finite),
    );
    let sx = |x: f64| PAD + (x - xmin) / (xmax - xmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - ymin) / (ymax - ymin) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} L{PAD} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    for (y, label) in [(ymin, ymin), (ymax, ymax)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{label:.4e}</text>"#,
            PAD - 4.0,
            sy(y) + 4.0
        );
    }
    for x in [xmin, xmax] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{x:.3}</text>"#,
            sx(x),
            H - PAD + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">t</text>"#,
        W / 2.0,
        H - 12.0
    );
    for (k, ser) in series.iter().enumerate() {
        let mut d = String::new();
        for (i, (x, y)) in xs.iter().zip(&ser.values).enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2} {:.2} ",
                if i == 0 { "M" } else { "L" },
                sx(*x),
                sy(*y)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="{}" stroke-width="2" fill="none"/>"#,
            d.trim_end(),
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{}">{}</text>"#,
            W - PAD - 80.0,
            PAD + 16.0 * k as f64,
            ser.color,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

pub fn write_plots(dir: &Path, records: &[MonitorRecord]) -> Result<Vec<PathBuf>> {
    let xs: Vec<f64> = records.iter().map(|r| r.t).collect();
    let col = |f: fn(&MonitorRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let charts: Vec<(&str, &str, Vec<Series>)> = vec![
        (
            "monotone",
            "Monotone functionals",
            vec![
                Series {
                    label: "MH",
                    color: "#1f77b4",
                    values: col(|r| r.mh),
                },
                Series {
                    label: "MA",
                    color: "#d62728",
                    values: col(|r| r.ma),
                },
            ],
        ),
        (
            "decay_bound",
            "sup |A|² and decay bound",
            vec![
                Series {
                    label: "amax2",
                    color: "#1f77b4",
                    values: col(|r| r.amax2),
                },
                Series {
                    label: "bound24",
                    color: "#ff7f0e",
                    values: col(|r| r.bound24),
                },
            ],
        ),
        (
            "pinch",
            "Pinching integral",
            vec![Series {
                label: "pinch",
                color: "#2ca02c",
                values: col(|r| r.pinch),
            }],
        ),
        (
            "certificate",
            "Rescaled volume certificate",
            vec![Series {
                label: "cert",
                color: "#9467bd",
                values: col(|r| r.cert),
            }],
        ),
        (
            "residuals",
            "Constraint residuals",
            vec![
                Series {
                    label: "gauss",
                    color: "#8c564b",
                    values: col(|r| r.gauss_res),
                },
                Series {
                    label: "codazzi",
                    color: "#e377c2",
                    values: col(|r| r.codazzi_res),
                },
            ],
        ),
    ];
    let mut paths = Vec::new();
    for (file, title, series) in charts {
        let path = dir.join(format!("{file}.svg"));
        fs::write(&path, line_chart(title, &xs, &series))?;
        paths.push(path);
    }
    Ok(paths)
}
