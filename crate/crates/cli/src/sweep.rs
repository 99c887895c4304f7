//! Parameter sweeps: every (scheme, resolution, r) cell of a [`RunSpec`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context as _, Result};
use rayon::prelude::*;

use hjbmarch::advect1d::{cfl_step_1d, march_1d};
use hjbmarch::marchers::{ground_truth, march, TruthCache};
use hjbmarch::metrics::{
    error_vs_analytic, error_vs_analytic_1d, error_vs_reference, SWEEP_CSV_HEADER,
};
use hjbmarch::{Field64, GridSpec64, MarchConfig, SweepRecord};

use crate::config::{AnyScheme, RunSpec};

/// Things a sweep needs besides the [`RunSpec`].
#[derive(Debug, Clone)]
pub struct Context {
    pub cache: TruthCache,
    pub jobs: usize,
}

/// One finished cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub record: SweepRecord<f64>,
    pub steps: usize,
    /// `(time, field)` for every requested report time.
    pub slices: Vec<(f64, Field64)>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    scheme: AnyScheme,
    resolution: usize,
    r: f64,
}

fn cells(spec: &RunSpec) -> Vec<Cell> {
    let mut out = Vec::with_capacity(spec.cells());
    for &scheme in &spec.schemes {
        for &resolution in &spec.resolutions {
            for &r in &spec.multipliers {
                out.push(Cell {
                    scheme,
                    resolution,
                    r,
                });
            }
        }
    }
    out
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn check_finite(field: &Field64, what: &str) -> Result<()> {
    if let Some(node) = field.first_non_finite() {
        bail!("{what}: non-finite value at node {node}");
    }
    Ok(())
}

fn run_cell_2d(
    spec: &RunSpec,
    cell: Cell,
    truth: Option<&Field64>,
    times: &[f64],
) -> Result<CellResult> {
    let AnyScheme::Grid(scheme) = cell.scheme else {
        unreachable!("1D scheme in a 2D sweep")
    };
    let label = format!("{} at {} cells, r = {}", scheme, cell.resolution, cell.r);
    let problem = spec.problem_2d()?;
    let mut config = MarchConfig::with_multiplier(&*problem, scheme, cell.resolution, cell.r)?;
    let mut record: Vec<usize> = times
        .iter()
        .map(|&t| config.time.nearest_index(t))
        .collect();
    record.push(0);
    record.sort_unstable();
    record.dedup();
    config.record = record;

    let mut walls = Vec::with_capacity(spec.repeats);
    let mut result = None;
    for _ in 0..spec.repeats {
        let start = Instant::now();
        let out = march(&*problem, &config).with_context(|| label.clone())?;
        walls.push(start.elapsed());
        result.get_or_insert(out);
    }
    let (slices, report) = result.expect("at least one repeat");
    for s in &slices {
        check_finite(&s.field, &label)?;
    }
    let at = |n: usize| {
        slices
            .iter()
            .find(|s| s.index == n)
            .expect("recorded slice")
    };
    let zero = &at(0).field;
    let error = match truth {
        Some(reference) => {
            let stride = reference.grid().cells() / cell.resolution;
            error_vs_reference(zero, reference, stride, 0.0)?
        }
        None => error_vs_analytic(zero, &*problem, 0.0)?,
    };
    let out_slices = times
        .iter()
        .map(|&t| {
            let s = at(config.time.nearest_index(t));
            (s.time, s.field.clone())
        })
        .collect();
    Ok(CellResult {
        record: SweepRecord {
            scheme: scheme.name().to_string(),
            resolution: cell.resolution,
            k: report.k,
            r: cell.r,
            wall_ms: median(walls).as_secs_f64() * 1e3,
            updates: report.node_updates(),
            error,
        },
        steps: report.steps,
        slices: out_slices,
    })
}

fn run_cell_1d(spec: &RunSpec, cell: Cell, report_time: f64) -> Result<CellResult> {
    let AnyScheme::Line(scheme) = cell.scheme else {
        unreachable!("2D scheme in a 1D sweep")
    };
    let label = format!("{} at {} cells, r = {}", scheme, cell.resolution, cell.r);
    let problem = spec.problem_1d()?;
    let grid = GridSpec64::unit(1, cell.resolution)?;
    let k = cell.r * cfl_step_1d(&problem, grid.spacing());
    let mut walls = Vec::with_capacity(spec.repeats);
    let mut result = None;
    for _ in 0..spec.repeats {
        let start = Instant::now();
        let out =
            march_1d(&problem, scheme, grid, k, report_time).with_context(|| label.clone())?;
        walls.push(start.elapsed());
        result.get_or_insert(out);
    }
    let m = result.expect("at least one repeat");
    check_finite(&m.field, &label)?;
    let error = error_vs_analytic_1d(&m.field, &problem, report_time)?;
    Ok(CellResult {
        record: SweepRecord {
            scheme: scheme.name().to_string(),
            resolution: cell.resolution,
            k: m.time.step(),
            r: cell.r,
            wall_ms: median(walls).as_secs_f64() * 1e3,
            updates: m.node_updates,
            error,
        },
        steps: m.time.steps(),
        slices: vec![(report_time, m.field)],
    })
}

/// Loads or computes the reference slice a 2D problem without a closed form
/// is measured against. `None` when the problem has one.
pub fn truth_for(spec: &RunSpec, ctx: &Context) -> Result<Option<Field64>> {
    if spec.is_1d() {
        return Ok(None);
    }
    let problem = spec.problem_2d()?;
    if problem.has_analytic() {
        return Ok(None);
    }
    for &n in &spec.resolutions {
        if !spec.truth_resolution.is_multiple_of(n) {
            bail!(
                "resolution {n} does not divide the ground-truth resolution {}",
                spec.truth_resolution
            );
        }
    }
    let field =
        ground_truth(&*problem, spec.truth_resolution, Some(&ctx.cache)).with_context(|| {
            format!(
                "ground truth for {} at {}",
                problem.id(),
                spec.truth_resolution
            )
        })?;
    Ok(Some(field))
}

/// Runs every cell, in parallel up to `ctx.jobs`. Results come back in
/// scheme, resolution, r order whatever the scheduling.
pub fn execute(spec: &RunSpec, ctx: &Context) -> Result<Vec<CellResult>> {
    if spec.cells() == 0 {
        bail!("empty sweep: need at least one scheme, resolution and r");
    }
    let truth = truth_for(spec, ctx)?;
    let times = spec.report_times()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs.max(1))
        .build()?;
    let cells = cells(spec);
    pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                log::info!(
                    "running {} at {} cells, r = {}",
                    cell.scheme.name(),
                    cell.resolution,
                    cell.r
                );
                if spec.is_1d() {
                    run_cell_1d(spec, cell, times[0])
                } else {
                    run_cell_2d(spec, cell, truth.as_ref(), &times)
                }
            })
            .collect()
    })
}

pub fn sweep_csv(results: &[CellResult]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in results {
        s.push_str(&r.record.csv_row());
        s.push('\n');
    }
    s
}

pub fn summary_table(results: &[CellResult]) -> String {
    let mut s = format!(
        "{:<15} {:>6} {:>6} {:>12} {:>7} {:>12} {:>11} {:>11} {:>10}\n",
        "scheme", "cells", "r", "k", "steps", "updates", "L1", "Linf", "wall ms"
    );
    for c in results {
        let r = &c.record;
        s.push_str(&format!(
            "{:<15} {:>6} {:>6} {:>12.5e} {:>7} {:>12} {:>11.4e} {:>11.4e} {:>10.1}\n",
            r.scheme,
            r.resolution,
            r.r,
            r.k,
            c.steps,
            r.updates,
            r.error.l1,
            r.error.linf,
            r.wall_ms
        ));
    }
    s
}

pub fn field_file_name(record: &SweepRecord<f64>, time: f64) -> String {
    format!(
        "{}-n{}-r{}-t{}.csv",
        record.scheme, record.resolution, record.r, time
    )
}

/// Files written so far; removed again unless [`Written::keep`] is called.
#[derive(Debug, Default)]
pub struct Written {
    paths: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    keep: bool,
}

impl Written {
    pub fn create_dir(&mut self, dir: &Path) -> Result<()> {
        let mut missing: Vec<PathBuf> = dir
            .ancestors()
            .take_while(|d| !d.as_os_str().is_empty() && !d.exists())
            .map(Path::to_path_buf)
            .collect();
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        missing.reverse();
        self.dirs.extend(missing);
        Ok(())
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> Result<()> {
        self.paths.push(path.to_path_buf());
        let mut f =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        f.write_all(contents)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    pub fn keep(mut self) -> Vec<PathBuf> {
        self.keep = true;
        std::mem::take(&mut self.paths)
    }
}

impl Drop for Written {
    fn drop(&mut self) {
        if self.keep {
            return;
        }
        for p in &self.paths {
            let _ = fs::remove_file(p);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

/// Writes `sweep.csv` and the requested field slices under `out`.
pub fn write_outputs(
    out: &Path,
    results: &[CellResult],
    fields: bool,
    written: &mut Written,
) -> Result<()> {
    written.create_dir(out)?;
    written.write(&out.join("sweep.csv"), sweep_csv(results).as_bytes())?;
    if fields {
        let dir = out.join("fields");
        written.create_dir(&dir)?;
        for c in results {
            for (t, field) in &c.slices {
                let path = dir.join(field_file_name(&c.record, *t));
                written.write(&path, field.to_csv_string().as_bytes())?;
            }
        }
    }
    Ok(())
}

/// The `run` subcommand: sweep, write outputs, return the results.
///
/// Nothing is left on disk when any cell fails.
pub fn cmd_run(spec: &RunSpec, ctx: &Context) -> Result<Vec<CellResult>> {
    let results = execute(spec, ctx)?;
    let mut written = Written::default();
    write_outputs(&spec.out_dir, &results, spec.write_fields, &mut written)?;
    written.keep();
    Ok(results)
}
