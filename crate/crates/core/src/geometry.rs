//! Uniform grids, time partitions, grid functions and boundary classification.
//!
//! Nodes are addressed by a flat row-major index: in 2D node `(i, j)` (with
//! `i` along x and `j` along y) lives at `j * n + i`, so one CSV row holds one
//! grid row of constant y. In 1D the flat index is `i`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::{Error, Real, Result};

/// Uniform lattice on `[lo, hi]` or `[lo, hi]^2`, boundary nodes included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    n: usize,
    lo: T,
    hi: T,
    h: T,
}

impl<T: Real> GridSpec<T> {
    /// Builds a grid with `points_per_axis` nodes per axis on `extents`.
    pub fn new(dim: usize, points_per_axis: usize, extents: (T, T)) -> Result<Self> {
        let (lo, hi) = extents;
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if points_per_axis < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per axis, got {points_per_axis}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid(format!(
                "degenerate extents [{lo}, {hi}]"
            )));
        }
        let h = (hi - lo) / T::from_count(points_per_axis - 1);
        Ok(Self {
            dim,
            n: points_per_axis,
            lo,
            hi,
            h,
        })
    }

    /// Unit interval or unit square split into `cells` intervals per axis (`h = 1/cells`).
    pub fn unit(dim: usize, cells: usize) -> Result<Self> {
        Self::new(dim, cells + 1, (T::zero(), T::one()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Number of intervals per axis.
    pub fn cells(&self) -> usize {
        self.n - 1
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn extents(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        if self.dim == 1 {
            self.n
        } else {
            self.n * self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && (j < self.n || (self.dim == 1 && j == 0)));
        j * self.n + i
    }

    /// Inverse of [`GridSpec::index`].
    #[inline]
    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.n, node / self.n)
    }

    /// Coordinate of the `i`-th node along an axis. The last node maps to `hi` exactly.
    #[inline]
    pub fn coordinate(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + self.h * T::from_count(i)
        }
    }

    /// Physical position of a node; the second component is `lo` in 1D.
    #[inline]
    pub fn point(&self, node: usize) -> [T; 2] {
        let (i, j) = self.coords(node);
        if self.dim == 1 {
            [self.coordinate(i), self.lo]
        } else {
            [self.coordinate(i), self.coordinate(j)]
        }
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let (i, j) = self.coords(node);
        let last = self.n - 1;
        i == 0 || i == last || (self.dim == 2 && (j == 0 || j == last))
    }

    /// The `2 * dim` von Neumann neighbours of `node`; off-grid ones have `node: None`.
    pub fn neighbors(&self, node: usize) -> Neighbors {
        let (i, j) = self.coords(node);
        let last = self.n - 1;
        let mut out = Neighbors {
            items: [Neighbor::EMPTY; 4],
            len: 2 * self.dim,
        };
        out.items[0] = Neighbor {
            axis: 0,
            direction: Direction::Minus,
            node: (i > 0).then(|| node - 1),
        };
        out.items[1] = Neighbor {
            axis: 0,
            direction: Direction::Plus,
            node: (i < last).then(|| node + 1),
        };
        if self.dim == 2 {
            out.items[2] = Neighbor {
                axis: 1,
                direction: Direction::Minus,
                node: (j > 0).then(|| node - self.n),
            };
            out.items[3] = Neighbor {
                axis: 1,
                direction: Direction::Plus,
                node: (j < last).then(|| node + self.n),
            };
        }
        out
    }

    /// Neighbours of `node` along one axis, `[minus, plus]`.
    #[inline]
    pub fn axis_neighbors(&self, node: usize, axis: usize) -> [Option<usize>; 2] {
        let (i, j) = self.coords(node);
        let last = self.n - 1;
        match axis {
            0 => [(i > 0).then(|| node - 1), (i < last).then(|| node + 1)],
            _ => [
                (j > 0).then(|| node - self.n),
                (j < last).then(|| node + self.n),
            ],
        }
    }

    /// Whether `fine` contains every node of `self`, returning the index stride.
    pub fn nesting_stride(&self, fine: &GridSpec<T>) -> Option<usize> {
        if self.dim != fine.dim || self.lo != fine.lo || self.hi != fine.hi {
            return None;
        }
        let (c, f) = (self.cells(), fine.cells());
        (f % c == 0).then(|| f / c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub axis: usize,
    pub direction: Direction,
    pub node: Option<usize>,
}

impl Neighbor {
    const EMPTY: Neighbor = Neighbor {
        axis: 0,
        direction: Direction::Minus,
        node: None,
    };
}

/// Fixed-capacity neighbour list returned by [`GridSpec::neighbors`].
#[derive(Debug, Clone, Copy)]
pub struct Neighbors {
    items: [Neighbor; 4],
    len: usize,
}

impl Neighbors {
    pub fn as_slice(&self) -> &[Neighbor] {
        &self.items[..self.len]
    }

    pub fn present(&self) -> impl Iterator<Item = usize> + '_ {
        self.as_slice().iter().filter_map(|n| n.node)
    }
}

impl std::ops::Deref for Neighbors {
    type Target = [Neighbor];
    fn deref(&self) -> &[Neighbor] {
        self.as_slice()
    }
}

/// Uniform partition of `[0, T]` into `N` steps of size `k = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec<T> {
    terminal: T,
    steps: usize,
    k: T,
}

impl<T: Real> TimeSpec<T> {
    pub fn new(terminal: T, steps: usize) -> Result<Self> {
        if !(terminal.is_finite() && terminal > T::zero()) {
            return Err(Error::InvalidTime(format!(
                "terminal time must be positive, got {terminal}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidTime("need at least one step".into()));
        }
        Ok(Self {
            terminal,
            steps,
            k: terminal / T::from_count(steps),
        })
    }

    /// Smallest uniform partition whose step does not exceed `requested`
    /// (up to a relative slack of 1e-9, so `T / k` landing a hair above an
    /// integer does not add a step).
    pub fn with_max_step(terminal: T, requested: T) -> Result<Self> {
        if !(requested.is_finite() && requested > T::zero()) {
            return Err(Error::InvalidTime(format!(
                "step must be positive, got {requested}"
            )));
        }
        let ratio = (terminal / requested).to_f64_lossy();
        let steps = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize;
        Self::new(terminal, steps)
    }

    pub fn terminal(&self) -> T {
        self.terminal
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> T {
        self.k
    }

    /// `t_n`; exact at both `n = 0` and `n = N`.
    #[inline]
    pub fn time(&self, n: usize) -> T {
        self.terminal * T::from_count(n) / T::from_count(self.steps)
    }

    /// Index of the slice closest to `t`, clamped to `[0, N]`.
    pub fn nearest_index(&self, t: T) -> usize {
        let x = (t / self.k).round().to_f64_lossy();
        x.clamp(0.0, self.steps as f64) as usize
    }
}

/// One time slice of grid values. `+inf` is a legal "no value yet" sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn filled(grid: GridSpec<T>, value: T) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec<T>, f: impl FnMut(usize) -> T) -> Self {
        Self {
            grid,
            values: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn from_values(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parse(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    /// First node holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// Keeps every `stride`-th node along each axis.
    pub fn restrict(&self, stride: usize) -> Result<Field<T>> {
        if stride == 0 || !self.grid.cells().is_multiple_of(stride) {
            return Err(Error::NotNested(format!(
                "stride {stride} does not divide {} cells",
                self.grid.cells()
            )));
        }
        let coarse = GridSpec::new(
            self.grid.dim(),
            self.grid.cells() / stride + 1,
            self.grid.extents(),
        )?;
        Ok(Field::from_fn(coarse, |node| {
            let (i, j) = coarse.coords(node);
            self.at(i * stride, j * stride)
        }))
    }

    /// CSV text: one line per grid row, shortest round-trip number formatting.
    pub fn to_csv_string(&self) -> String {
        let n = self.grid.points_per_axis();
        let mut out = String::with_capacity(self.values.len() * 20);
        for row in self.values.chunks(n) {
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    /// Parses CSV rows produced by [`Field::write_csv`] onto `grid`.
    pub fn read_csv<R: BufRead>(grid: GridSpec<T>, r: R) -> Result<Self> {
        let n = grid.points_per_axis();
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let before = values.len();
            for tok in line.split(',') {
                let v: T = tok.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad number `{}`", lineno + 1, tok))
                })?;
                values.push(v);
            }
            if values.len() - before != n {
                return Err(Error::Parse(format!(
                    "line {}: expected {n} columns, got {}",
                    lineno + 1,
                    values.len() - before
                )));
            }
        }
        Self::from_values(grid, values)
    }
}

impl<T> std::ops::Index<usize> for Field<T> {
    type Output = T;
    #[inline]
    fn index(&self, node: usize) -> &T {
        &self.values[node]
    }
}

impl<T> std::ops::IndexMut<usize> for Field<T> {
    #[inline]
    fn index_mut(&mut self, node: usize) -> &mut T {
        &mut self.values[node]
    }
}

/// How a boundary edge is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Values are prescribed.
    Dirichlet,
    /// No data; nodes are computed with truncated stencils.
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Dirichlet,
    Outflow,
}

/// Per-edge boundary assignment: `[x = lo, x = hi, y = lo, y = hi]`.
///
/// A corner touching a Dirichlet edge is Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryMask {
    pub edges: [BoundaryKind; 4],
}

impl BoundaryMask {
    pub fn all_dirichlet() -> Self {
        Self {
            edges: [BoundaryKind::Dirichlet; 4],
        }
    }

    pub fn classify<T: Real>(&self, grid: &GridSpec<T>, node: usize) -> NodeClass {
        let (i, j) = grid.coords(node);
        let last = grid.points_per_axis() - 1;
        let mut touches = [i == 0, i == last, false, false];
        if grid.dim() == 2 {
            touches[2] = j == 0;
            touches[3] = j == last;
        }
        let mut class = NodeClass::Interior;
        for (edge, &t) in self.edges.iter().zip(&touches) {
            if t {
                match edge {
                    BoundaryKind::Dirichlet => return NodeClass::Dirichlet,
                    BoundaryKind::Outflow => class = NodeClass::Outflow,
                }
            }
        }
        class
    }

    pub fn labels<T: Real>(&self, grid: &GridSpec<T>) -> Vec<NodeClass> {
        (0..grid.len()).map(|n| self.classify(grid, n)).collect()
    }

    /// Flat indices of the Dirichlet nodes, ascending.
    pub fn dirichlet_nodes<T: Real>(&self, grid: &GridSpec<T>) -> Vec<usize> {
        (0..grid.len())
            .filter(|&n| self.classify(grid, n) == NodeClass::Dirichlet)
            .collect()
    }
}
