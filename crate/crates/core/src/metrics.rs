//! Error norms and sweep records.
//!
//! `l1` is the mean absolute error over the compared nodes (not scaled by
//! cell area), `linf` the maximum. Boundary nodes are included.

use crate::geometry::Field;
use crate::problem::{Advection1DProblem, IsotropicProblem};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub l1: T,
    pub linf: T,
    pub nodes_compared: usize,
    pub slice_time: T,
}

impl<T: Real> ErrorReport<T> {
    /// Norms of the pairwise differences.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, T)>, slice_time: T) -> Self {
        let mut sum = T::zero();
        let mut linf = T::zero();
        let mut n = 0usize;
        for (a, b) in pairs {
            let d = (a - b).abs();
            sum = sum + d;
            linf = linf.max(d);
            n += 1;
        }
        let l1 = if n == 0 {
            T::zero()
        } else {
            sum / T::from_count(n)
        };
        Self {
            l1,
            linf,
            nodes_compared: n,
            slice_time,
        }
    }
}

pub fn error_vs_analytic<T: Real, P: IsotropicProblem<T> + ?Sized>(
    field: &Field<T>,
    problem: &P,
    t: T,
) -> Result<ErrorReport<T>> {
    if !problem.has_analytic() {
        return Err(Error::NoAnalytic(problem.id()));
    }
    let grid = field.grid();
    let mut exact = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        match problem.analytic(grid.point(node), t) {
            Some(u) => exact.push(u),
            None => return Err(Error::NoAnalytic(problem.id())),
        }
    }
    Ok(ErrorReport::from_pairs(
        field.values().iter().copied().zip(exact),
        t,
    ))
}

pub fn error_vs_analytic_1d<T: Real>(
    field: &Field<T>,
    problem: &Advection1DProblem<T>,
    t: T,
) -> Result<ErrorReport<T>> {
    let grid = field.grid();
    let exact = problem
        .analytic
        .as_ref()
        .ok_or_else(|| Error::NoAnalytic(problem.id.clone()))?;
    let pairs = (0..grid.len()).map(|i| (field[i], exact(grid.coordinate(i), t)));
    Ok(ErrorReport::from_pairs(pairs, t))
}

/// Compares `field` with `reference` on the nodes they share. `stride` is the
/// number of reference cells per field cell and must match the two grids.
pub fn error_vs_reference<T: Real>(
    field: &Field<T>,
    reference: &Field<T>,
    stride: usize,
    slice_time: T,
) -> Result<ErrorReport<T>> {
    match field.grid().nesting_stride(reference.grid()) {
        Some(s) if s == stride => {}
        found => {
            return Err(Error::NotNested(format!(
                "{} cells do not embed in {} cells with stride {stride} (found {found:?})",
                field.grid().cells(),
                reference.grid().cells()
            )))
        }
    }
    let restricted = reference.restrict(stride)?;
    Ok(ErrorReport::from_pairs(
        field
            .values()
            .iter()
            .copied()
            .zip(restricted.values().iter().copied()),
        slice_time,
    ))
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_slope<T: Real>(points: &[(T, T)]) -> Result<T> {
    let mut hs: Vec<f64> = points.iter().map(|p| p.0.to_f64_lossy()).collect();
    hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::NotEnoughData(format!(
            "need errors at 3 distinct spacings, got {}",
            hs.len()
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.0 > T::zero() && p.1 > T::zero()))
    {
        return Err(Error::NotEnoughData(format!(
            "cannot take logs of ({}, {})",
            p.0, p.1
        )));
    }
    let xs: Vec<T> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = points.iter().map(|p| p.1.ln()).collect();
    let n = T::from_count(points.len());
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in xs.iter().zip(&ys) {
        sxy = sxy + (*x - mx) * (*y - my);
        sxx = sxx + (*x - mx) * (*x - mx);
    }
    Ok(sxy / sxx)
}

pub const SWEEP_CSV_HEADER: &str = "scheme,resolution,k,r,wall_ms,updates,l1,linf";

/// One cell of an accuracy-versus-cost sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    pub scheme: String,
    pub resolution: usize,
    pub k: T,
    pub r: T,
    pub wall_ms: f64,
    pub updates: u64,
    pub error: ErrorReport<T>,
}

impl<T: Real> SweepRecord<T> {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{},{},{}",
            self.scheme,
            self.resolution,
            self.k,
            self.r,
            self.wall_ms,
            self.updates,
            self.error.l1,
            self.error.linf
        )
    }

    pub fn h(&self) -> T {
        T::one() / T::from_count(self.resolution)
    }
}

/// `(h, l1)` pairs of the records using `scheme`.
pub fn l1_points<T: Real>(records: &[SweepRecord<T>], scheme: &str) -> Vec<(T, T)> {
    records
        .iter()
        .filter(|r| r.scheme == scheme)
        .map(|r| (r.h(), r.error.l1))
        .collect()
}
