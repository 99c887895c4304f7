//! Slow reference solvers used to cross-check the fast paths.
//!
//! [`gauss_seidel_slice`] iterates the coupled implicit system of one slice
//! to a fixed point, and [`bisect_local`] solves the scalar local equations
//! by bracketing. Neither shares code with the closed-form solves or the
//! marching order of [`crate::fast_marching`].

use crate::fast_marching::SliceInputs;
use crate::geometry::Field;
use crate::local_updates::QuadraticInputs;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalEquation {
    OneSided,
    TwoSided,
}

/// Solves the local equation by bisection on the admissible interval
/// `[max W, W0 + kK)`, where it reads
/// `|(V - W_i)_i| / h - (W0 + kK - V) / (k f) = 0` (an increasing function).
///
/// `tol` is an absolute interval width; `0` bisects down to adjacent floats.
pub fn bisect_local<T: Real>(kind: LocalEquation, inp: &QuadraticInputs<T>, tol: T) -> Option<T> {
    let cap = inp.w0 + inp.k * inp.cost;
    let kf = inp.k * inp.speed;
    let ws: Vec<T> = match kind {
        LocalEquation::OneSided => vec![inp.w1],
        LocalEquation::TwoSided => vec![inp.w1, inp.w2?],
    };
    let lo0 = ws.iter().copied().fold(T::neg_infinity(), T::max);
    if !(lo0 < cap) {
        return None;
    }
    let residual = |v: T| {
        let sq = ws.iter().fold(T::zero(), |acc, &w| acc + (v - w) * (v - w));
        sq.sqrt() / inp.h - (cap - v) / kf
    };
    let r0 = residual(lo0);
    if r0 > T::zero() {
        return None;
    }
    if r0 == T::zero() {
        return Some(lo0);
    }
    let (mut lo, mut hi) = (lo0, cap);
    for _ in 0..4000 {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        if residual(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let v = lo + (hi - lo) / T::lit(2.0);
    (v < cap).then_some(v)
}

#[derive(Debug, Clone)]
pub struct OracleResult<T> {
    pub field: Field<T>,
    /// Full sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Largest change in the last sweep.
    pub max_change: T,
}

/// Gauss-Seidel iteration of one implicit slice.
///
/// Non-fixed nodes start at their stay-in-place value; each visit replaces a
/// node by the smallest of that cap and every admissible one- and two-sided
/// solution over the neighbours and quadrants present, all computed by
/// bisection. Sweeps cycle through the four lexicographic orderings.
pub fn gauss_seidel_slice<T: Real>(
    inputs: &SliceInputs<'_, T>,
    tol: T,
    max_iters: usize,
) -> OracleResult<T> {
    gauss_seidel_slice_from(inputs, tol, max_iters, 0)
}

/// As [`gauss_seidel_slice`], starting the ordering cycle at `first_ordering`.
pub fn gauss_seidel_slice_from<T: Real>(
    inputs: &SliceInputs<'_, T>,
    tol: T,
    max_iters: usize,
    first_ordering: usize,
) -> OracleResult<T> {
    let grid = *inputs.v_next.grid();
    let m = grid.points_per_axis();
    let rows = if grid.dim() == 2 { m } else { 1 };
    let mut v = Field::from_fn(grid, |node| match inputs.fixed[node] {
        Some(q) => q,
        None => inputs.v_next[node] + inputs.k * inputs.cost[node],
    });
    if inputs.fixed.iter().all(Option::is_some) {
        return OracleResult {
            field: v,
            iterations: 0,
            converged: true,
            max_change: T::zero(),
        };
    }

    let mut iterations = 0;
    let mut max_change = T::infinity();
    while iterations < max_iters {
        let ordering = (first_ordering + iterations) % 4;
        max_change = T::zero();
        for jj in 0..rows {
            let j = if ordering & 2 == 0 { jj } else { rows - 1 - jj };
            for ii in 0..m {
                let i = if ordering & 1 == 0 { ii } else { m - 1 - ii };
                let node = grid.index(i, j);
                if inputs.fixed[node].is_some() {
                    continue;
                }
                let new = local_min(&v, inputs, node);
                max_change = max_change.max((new - v[node]).abs());
                v[node] = new;
            }
        }
        iterations += 1;
        if max_change < tol {
            break;
        }
    }
    OracleResult {
        field: v,
        iterations,
        converged: max_change < tol,
        max_change,
    }
}

fn local_min<T: Real>(v: &Field<T>, inputs: &SliceInputs<'_, T>, node: usize) -> T {
    let grid = v.grid();
    let base = QuadraticInputs {
        w0: inputs.v_next[node],
        w1: T::zero(),
        w2: None,
        h: grid.spacing(),
        k: inputs.k,
        speed: inputs.speed[node],
        cost: inputs.cost[node],
    };
    let mut best = base.w0 + base.k * base.cost;
    let xs = grid.axis_neighbors(node, 0);
    let ys = if grid.dim() == 2 {
        grid.axis_neighbors(node, 1)
    } else {
        [None, None]
    };
    for a in xs.iter().chain(&ys).flatten() {
        let inp = QuadraticInputs { w1: v[*a], ..base };
        if let Some(s) = bisect_local(LocalEquation::OneSided, &inp, T::zero()) {
            best = best.min(s);
        }
    }
    for a in xs.iter().flatten() {
        for b in ys.iter().flatten() {
            let inp = QuadraticInputs {
                w1: v[*a],
                w2: Some(v[*b]),
                ..base
            };
            if let Some(s) = bisect_local(LocalEquation::TwoSided, &inp, T::zero()) {
                best = best.min(s);
            }
        }
    }
    best
}
