//! Backward time marching for 2D problems: explicit, implicit and hybrid.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::fast_marching::{solve_slice_into, FmmWorkspace, SliceInputs};
use crate::geometry::{Field, GridSpec, NodeClass, TimeSpec};
use crate::local_updates::explicit_node_update;
use crate::problem::IsotropicProblem;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Explicit,
    Implicit,
    Hybrid,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Explicit, Scheme::Implicit, Scheme::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::Implicit => "implicit",
            Scheme::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "explicit" => Ok(Scheme::Explicit),
            "implicit" => Ok(Scheme::Implicit),
            "hybrid" => Ok(Scheme::Hybrid),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Largest step for which the explicit scheme is monotone, `h / (sqrt(2) F2)`.
pub fn cfl_step_2d<T: Real, P: IsotropicProblem<T> + ?Sized>(problem: &P, h: T) -> T {
    let (_, f2) = problem.speed_bounds();
    h / (T::SQRT_2() * f2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarchConfig<T> {
    pub scheme: Scheme,
    pub grid: GridSpec<T>,
    pub time: TimeSpec<T>,
    /// Time indices whose slices are returned. Index `0` is `t = 0`.
    pub record: Vec<usize>,
    /// The `r` in `k = r k_cfl`, when the step was chosen that way.
    pub step_multiplier: Option<T>,
}

impl<T: Real> MarchConfig<T> {
    /// Unit-square grid with `cells` per axis and `k <= r k_cfl`, recording `t = 0`.
    pub fn with_multiplier<P: IsotropicProblem<T> + ?Sized>(
        problem: &P,
        scheme: Scheme,
        cells: usize,
        r: T,
    ) -> Result<Self> {
        if !(r.is_finite() && r > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "step multiplier must be positive, got {r}"
            )));
        }
        let grid = GridSpec::unit(2, cells)?;
        let k = r * cfl_step_2d(problem, grid.spacing());
        let time = TimeSpec::with_max_step(problem.terminal_time(), k)?;
        Ok(Self {
            scheme,
            grid,
            time,
            record: vec![0],
            step_multiplier: Some(r),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.grid.dim() != 2 {
            return Err(Error::InvalidGrid("the 2D marchers need a 2D grid".into()));
        }
        if let Some(&bad) = self.record.iter().find(|&&n| n > self.time.steps()) {
            return Err(Error::InvalidTime(format!(
                "recorded index {bad} is past the last slice {}",
                self.time.steps()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RecordedSlice<T> {
    pub index: usize,
    pub time: T,
    pub field: Field<T>,
}

/// Cost accounting for one march.
///
/// A node update is one new value computed at a node outside the fixed set,
/// explicit or implicit; `local_solves` counts the quadratic solves the
/// marching order performed on top of that.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport<T> {
    pub scheme: Scheme,
    pub cells: usize,
    pub k: T,
    pub steps: usize,
    /// Updates per slice, for `n = N-1, ..., 0`.
    pub updates_per_slice: Vec<usize>,
    pub explicit_updates: u64,
    pub implicit_updates: u64,
    pub local_solves: u64,
    pub order_violations: u64,
    pub wall: Duration,
}

impl<T: Real> RunReport<T> {
    pub fn node_updates(&self) -> u64 {
        self.explicit_updates + self.implicit_updates
    }
}

/// Relative slack of the per-node CFL test, so that `k = k_cfl` passes
/// everywhere despite rounding in `k = T / N`.
const CFL_SLACK: f64 = 1e-9;

/// Marches `problem` from `t = T` down to `t = 0`.
pub fn march<T: Real, P: IsotropicProblem<T> + ?Sized>(
    problem: &P,
    config: &MarchConfig<T>,
) -> Result<(Vec<RecordedSlice<T>>, RunReport<T>)> {
    config.validate()?;
    let start = Instant::now();
    let grid = config.grid;
    let time = config.time;
    let n_nodes = grid.len();
    let (h, k) = (grid.spacing(), time.step());
    let scheme = config.scheme;

    let k_cfl = cfl_step_2d(problem, h);
    if scheme == Scheme::Explicit && k > k_cfl * (T::one() + T::lit(CFL_SLACK)) {
        log::warn!("explicit step {k} exceeds the monotonicity bound {k_cfl}; expect oscillations");
    }

    let classes = problem.boundary_mask().labels(&grid);
    let dirichlet: Vec<usize> = (0..n_nodes)
        .filter(|&i| classes[i] == NodeClass::Dirichlet)
        .collect();
    let free: Vec<usize> = (0..n_nodes)
        .filter(|&i| classes[i] != NodeClass::Dirichlet)
        .collect();
    let (f1, f2) = problem.speed_bounds();
    let k1 = problem.cost_lower_bound();

    let mut v = Field::from_fn(grid, |node| problem.terminal(grid.point(node)));
    if let Some(node) = v.first_non_finite() {
        return Err(Error::NonFinite {
            node,
            time: time.terminal().to_f64_lossy(),
        });
    }
    let mut next = v.clone();
    let mut speed = vec![T::zero(); n_nodes];
    let mut cost = vec![T::zero(); n_nodes];
    let mut fixed: Vec<Option<T>> = vec![None; n_nodes];
    let mut ws = FmmWorkspace::new();
    let mut slices = Vec::new();
    let mut report = RunReport {
        scheme,
        cells: grid.cells(),
        k,
        steps: time.steps(),
        updates_per_slice: Vec::with_capacity(time.steps()),
        explicit_updates: 0,
        implicit_updates: 0,
        local_solves: 0,
        order_violations: 0,
        wall: Duration::ZERO,
    };
    if config.record.contains(&time.steps()) {
        slices.push(RecordedSlice {
            index: time.steps(),
            time: time.terminal(),
            field: v.clone(),
        });
    }

    let threshold = h * (T::one() + T::lit(CFL_SLACK)) / (k * T::SQRT_2());
    for n in (0..time.steps()).rev() {
        let t = time.time(n);
        problem.sample_speed(&grid, t, &mut speed);
        problem.sample_cost(&grid, t, &mut cost);
        check_bounds(&speed, &cost, (f1, f2), k1, t)?;

        fixed.iter_mut().for_each(|q| *q = None);
        for &node in &dirichlet {
            fixed[node] = Some(problem.dirichlet(grid.point(node), t));
        }

        let mut explicit = 0usize;
        let mut implicit = 0usize;
        match scheme {
            Scheme::Explicit => {
                for &node in &dirichlet {
                    next[node] = fixed[node].unwrap();
                }
                for &node in &free {
                    next[node] = explicit_node_update(&v, node, speed[node], cost[node], k);
                }
                explicit = free.len();
            }
            Scheme::Implicit | Scheme::Hybrid => {
                if scheme == Scheme::Hybrid {
                    for &node in &free {
                        if speed[node] <= threshold {
                            fixed[node] =
                                Some(explicit_node_update(&v, node, speed[node], cost[node], k));
                            explicit += 1;
                        }
                    }
                }
                implicit = free.len() - explicit;
                if implicit == 0 {
                    for node in 0..n_nodes {
                        next[node] = fixed[node].unwrap();
                    }
                } else {
                    let inputs = SliceInputs {
                        v_next: &v,
                        speed: &speed,
                        cost: &cost,
                        k,
                        fixed: &fixed,
                    };
                    let stats = solve_slice_into(&inputs, &mut ws, &mut next)?;
                    report.local_solves += stats.local_solves as u64;
                    report.order_violations += stats.order_violations as u64;
                }
            }
        }
        if let Some(node) = next.first_non_finite() {
            return Err(Error::NonFinite {
                node,
                time: t.to_f64_lossy(),
            });
        }
        report.explicit_updates += explicit as u64;
        report.implicit_updates += implicit as u64;
        report.updates_per_slice.push(explicit + implicit);
        std::mem::swap(&mut v, &mut next);
        if config.record.contains(&n) {
            slices.push(RecordedSlice {
                index: n,
                time: t,
                field: v.clone(),
            });
        }
    }
    report.wall = start.elapsed();
    Ok((slices, report))
}

/// Marches to `t = 0` and returns that slice.
pub fn march_to_zero<T: Real, P: IsotropicProblem<T> + ?Sized>(
    problem: &P,
    config: &MarchConfig<T>,
) -> Result<(Field<T>, RunReport<T>)> {
    let mut config = config.clone();
    config.record = vec![0];
    let (mut slices, report) = march(problem, &config)?;
    Ok((
        slices.pop().expect("t = 0 is always recorded").field,
        report,
    ))
}

fn check_bounds<T: Real>(speed: &[T], cost: &[T], (f1, f2): (T, T), k1: T, t: T) -> Result<()> {
    let slack = T::lit(1e-12);
    let lo = f1 * (T::one() - slack);
    let hi = f2 * (T::one() + slack);
    if let Some(i) = speed.iter().position(|&f| !(f >= lo && f <= hi)) {
        return Err(Error::BoundsViolated(format!(
            "speed {} at node {i}, t = {t} is outside [{f1}, {f2}]",
            speed[i]
        )));
    }
    if let Some(i) = cost
        .iter()
        .position(|&c| !(c >= k1 * (T::one() - slack) && c > T::zero()))
    {
        return Err(Error::BoundsViolated(format!(
            "running cost {} at node {i}, t = {t} is below {k1}",
            cost[i]
        )));
    }
    Ok(())
}

/// Where ground-truth fields are cached.
#[derive(Debug, Clone)]
pub struct TruthCache {
    dir: PathBuf,
}

impl TruthCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, problem_id: &str, cells: usize) -> PathBuf {
        self.dir.join(format!("{problem_id}-{cells}.csv"))
    }

    fn header(problem_id: &str, cells: usize) -> String {
        format!("hjbmarch-gt v1 {problem_id} {cells}")
    }

    /// Cached field, or `None` when the file is missing or does not parse.
    pub fn load<T: Real>(&self, problem_id: &str, grid: &GridSpec<T>) -> Option<Field<T>> {
        let path = self.path_for(problem_id, grid.cells());
        let file = fs::File::open(&path).ok()?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader.read_line(&mut first).ok()?;
        if first.trim_end() != Self::header(problem_id, grid.cells()) {
            log::warn!("ignoring {}: unexpected header", path.display());
            return None;
        }
        match Field::read_csv(*grid, reader) {
            Ok(f) if f.first_non_finite().is_none() => Some(f),
            Ok(_) => {
                log::warn!("ignoring {}: non-finite values", path.display());
                None
            }
            Err(e) => {
                log::warn!("ignoring {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store<T: Real>(&self, problem_id: &str, field: &Field<T>) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let cells = field.grid().cells();
        let path = self.path_for(problem_id, cells);
        let tmp = path.with_extension("csv.tmp");
        {
            let mut w = std::io::BufWriter::new(fs::File::create(&tmp)?);
            writeln!(w, "{}", Self::header(problem_id, cells))?;
            field.write_csv(&mut w)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// Reference `t = 0` slice for a problem without a closed-form solution:
/// the explicit scheme at the CFL step on a fine grid. Loaded from `cache`
/// when present and valid, computed and stored otherwise.
pub fn ground_truth<T: Real, P: IsotropicProblem<T> + ?Sized>(
    problem: &P,
    fine_cells: usize,
    cache: Option<&TruthCache>,
) -> Result<Field<T>> {
    if problem.has_analytic() {
        return Err(Error::HasAnalytic(problem.id()));
    }
    let grid = GridSpec::unit(2, fine_cells)?;
    let id = problem.id();
    if let Some(f) = cache.and_then(|c| c.load(&id, &grid)) {
        log::info!("ground truth for {id} at {fine_cells} loaded from cache");
        return Ok(f);
    }
    log::info!("computing ground truth for {id} at {fine_cells}");
    let config = MarchConfig::with_multiplier(problem, Scheme::Explicit, fine_cells, T::one())?;
    let (field, report) = march_to_zero(problem, &config)?;
    log::info!(
        "ground truth done in {:.1?} ({} steps)",
        report.wall,
        report.steps
    );
    if let Some(c) = cache {
        c.store(&id, &field)?;
    }
    Ok(field)
}
