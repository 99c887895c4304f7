//! Modified Fast Marching for one implicit time slice.
//!
//! Each slice of the implicit scheme is a static Eikonal problem whose speed
//! depends on the unknown, `k f / (V^{n+1} - V + k K)`. Nodes start at their
//! stay-in-place value and are accepted in increasing order of value; an
//! accepted node can only lower the values of its neighbours.
//!
//! Not-yet-reached nodes ("Far") already carry a finite value, the
//! stay-in-place cap, so they have to compete with the heap for acceptance:
//! a Far node whose cap is below everything Considered is final. Far nodes
//! are therefore kept in a list sorted by `(cap, index)` and merged with the
//! heap pops.

mod heap;

pub use heap::ConsideredHeap;

use crate::geometry::Field;
use crate::local_updates::{lowest_neighbor, trial_value, QuadraticInputs};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    Far,
    Considered,
    Accepted,
}

/// Everything one slice solve needs. `fixed[node]` holds the value of nodes
/// in the set `Q` (Dirichlet data, and in the hybrid scheme the nodes already
/// updated explicitly); those are never recomputed.
#[derive(Debug, Clone, Copy)]
pub struct SliceInputs<'a, T> {
    /// The known slice `V^{n+1}`.
    pub v_next: &'a Field<T>,
    /// `f(x, t_n)` per node.
    pub speed: &'a [T],
    /// `K(x, t_n)` per node.
    pub cost: &'a [T],
    pub k: T,
    pub fixed: &'a [Option<T>],
}

impl<T: Real> SliceInputs<'_, T> {
    fn validate(&self) -> Result<()> {
        let n = self.v_next.grid().len();
        if self.speed.len() != n || self.cost.len() != n || self.fixed.len() != n {
            return Err(Error::InvalidParameter(format!(
                "slice inputs sized {}/{}/{} for {n} nodes",
                self.speed.len(),
                self.cost.len(),
                self.fixed.len()
            )));
        }
        if !(self.k > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "time step {} must be positive",
                self.k
            )));
        }
        let mut any = false;
        for (node, q) in self.fixed.iter().enumerate() {
            if let Some(q) = q {
                if !q.is_finite() {
                    return Err(Error::NonFinite {
                        node,
                        time: f64::NAN,
                    });
                }
                any = true;
            }
        }
        if !any {
            return Err(Error::InvalidParameter("the fixed set Q is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SliceStats {
    pub accepted: usize,
    /// Local quadratic solves performed.
    pub local_solves: usize,
    /// Accepted values that were smaller than their predecessor. Always zero
    /// for a correct solve; kept as a counter so checks can run in release.
    pub order_violations: usize,
}

/// Reusable buffers, so a march does not allocate per slice.
#[derive(Debug, Clone, Default)]
pub struct FmmWorkspace<T> {
    labels: Vec<NodeLabel>,
    heap: ConsideredHeap<T>,
    far: Vec<(T, usize)>,
}

impl<T: Real> FmmWorkspace<T> {
    pub fn new() -> Self {
        Self {
            labels: Vec::new(),
            heap: ConsideredHeap::new(0),
            far: Vec::new(),
        }
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }
}

/// Solves one slice into a fresh field.
pub fn solve_slice<T: Real>(inputs: &SliceInputs<'_, T>) -> Result<(Field<T>, SliceStats)> {
    let mut out = inputs.v_next.clone();
    let stats = solve_slice_into(inputs, &mut FmmWorkspace::new(), &mut out)?;
    Ok((out, stats))
}

/// Solves one slice, writing `V^n` into `out` (which must share the grid).
pub fn solve_slice_into<T: Real>(
    inputs: &SliceInputs<'_, T>,
    ws: &mut FmmWorkspace<T>,
    out: &mut Field<T>,
) -> Result<SliceStats> {
    inputs.validate()?;
    let grid = *inputs.v_next.grid();
    if out.grid() != &grid {
        return Err(Error::InvalidGrid(
            "output field is on a different grid".into(),
        ));
    }
    let n = grid.len();
    let (h, k) = (grid.spacing(), inputs.k);
    let v_next = inputs.v_next.values();

    ws.labels.clear();
    ws.labels.resize(n, NodeLabel::Far);
    ws.heap.reset(n);
    ws.far.clear();
    for node in 0..n {
        match inputs.fixed[node] {
            Some(q) => {
                out[node] = q;
                ws.labels[node] = NodeLabel::Considered;
                ws.heap.push_or_decrease(node, q);
            }
            None => {
                let cap = v_next[node] + k * inputs.cost[node];
                debug_assert!(cap.is_finite(), "non-finite cap at node {node}");
                out[node] = cap;
                ws.far.push((cap, node));
            }
        }
    }
    ws.far
        .sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let mut stats = SliceStats::default();
    let mut last = T::neg_infinity();
    let mut far_pos = 0;
    loop {
        while far_pos < ws.far.len() && ws.labels[ws.far[far_pos].1] != NodeLabel::Far {
            far_pos += 1;
        }
        let far_next = ws.far.get(far_pos).copied();
        let (value, node) = match (ws.heap.peek(), far_next) {
            (None, None) => break,
            (Some(_), None) => ws.heap.pop().unwrap(),
            (None, Some(f)) => {
                far_pos += 1;
                f
            }
            (Some(top), Some(f)) => {
                if f.0 < top.0 || (f.0 == top.0 && f.1 < top.1) {
                    far_pos += 1;
                    f
                } else {
                    ws.heap.pop().unwrap()
                }
            }
        };
        ws.labels[node] = NodeLabel::Accepted;
        stats.accepted += 1;
        if value < last {
            stats.order_violations += 1;
        }
        debug_assert!(value >= last, "acceptance order broken at node {node}");
        last = value;

        for axis in 0..grid.dim() {
            for nb in grid.axis_neighbors(node, axis).into_iter().flatten() {
                if ws.labels[nb] == NodeLabel::Accepted || inputs.fixed[nb].is_some() {
                    continue;
                }
                if !(value < out[nb]) {
                    continue;
                }
                let w2 = if grid.dim() == 2 {
                    accepted_transverse(out, &ws.labels, nb, 1 - axis)
                } else {
                    None
                };
                let trial = trial_value(&QuadraticInputs {
                    w0: v_next[nb],
                    w1: value,
                    w2,
                    h,
                    k,
                    speed: inputs.speed[nb],
                    cost: inputs.cost[nb],
                });
                stats.local_solves += 1;
                if trial < out[nb] {
                    out[nb] = trial;
                    ws.labels[nb] = NodeLabel::Considered;
                    ws.heap.push_or_decrease(nb, trial);
                }
            }
        }
    }
    Ok(stats)
}

/// Smaller of the Accepted neighbours of `node` along `axis`. Covers the four
/// cases none / one side / other side / both sides.
#[inline]
fn accepted_transverse<T: Real>(
    out: &Field<T>,
    labels: &[NodeLabel],
    node: usize,
    axis: usize,
) -> Option<T> {
    out.grid()
        .axis_neighbors(node, axis)
        .into_iter()
        .flatten()
        .filter(|&m| labels[m] == NodeLabel::Accepted)
        .map(|m| out[m])
        .reduce(T::min)
}

/// Static upwind Eikonal solve `|grad u| = K / f` from a boundary set, by the
/// textbook Fast Marching Method. Used as the `k -> inf` limit of a slice.
pub fn static_eikonal<T: Real>(
    grid: &crate::geometry::GridSpec<T>,
    slowness: &[T],
    fixed: &[Option<T>],
) -> Field<T> {
    let n = grid.len();
    let h = grid.spacing();
    let mut out = Field::filled(*grid, T::infinity());
    let mut accepted = vec![false; n];
    let mut heap = ConsideredHeap::new(n);
    for (node, q) in fixed.iter().enumerate() {
        if let Some(q) = q {
            out[node] = *q;
            heap.push_or_decrease(node, *q);
        }
    }
    while let Some((_, node)) = heap.pop() {
        accepted[node] = true;
        for nb in grid.neighbors(node).present() {
            if accepted[nb] || fixed[nb].is_some() {
                continue;
            }
            let r = slowness[nb] * h;
            let a = lowest_neighbor(&out, grid, nb, 0).unwrap_or(T::infinity());
            let b = if grid.dim() == 2 {
                lowest_neighbor(&out, grid, nb, 1).unwrap_or(T::infinity())
            } else {
                T::infinity()
            };
            let (lo, hi) = (a.min(b), a.max(b));
            let u = if hi - lo >= r {
                lo + r
            } else {
                let two = T::lit(2.0);
                (lo + hi + (two * r * r - (hi - lo) * (hi - lo)).sqrt()) / two
            };
            if u < out[nb] {
                out[nb] = u;
                heap.push_or_decrease(nb, u);
            }
        }
    }
    out
}
