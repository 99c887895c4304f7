//! Problem definitions: isotropic terminal-value problems in 2D and the 1D
//! advection testbed, plus the built-in benchmark catalog.

mod advection;
mod catalog;

use std::sync::Arc;

use crate::geometry::{BoundaryMask, GridSpec};
use crate::Real;

pub use advection::{advection_catalog, Advection1DProblem, ADVECTION_CASES};
pub use catalog::{
    by_name, experiment1, experiment2, experiment3, experiment4, Experiment1, Experiment2,
    Experiment3, Experiment4, ProblemParams,
};

/// A time-dependent isotropic Eikonal problem
/// `v_t + K(x,t) - f(x,t) |grad v| = 0` on the unit square, `t in [0, T)`,
/// with `v = q` on the Dirichlet boundary and `v(., T) = q_T`.
pub trait IsotropicProblem<T: Real>: Send + Sync {
    /// Stable identifier, used e.g. to key ground-truth caches.
    fn id(&self) -> String;

    fn terminal_time(&self) -> T;

    /// Speed `f(x, t) > 0`.
    fn speed(&self, p: [T; 2], t: T) -> T;

    /// Running cost `K(x, t) > 0`.
    fn running_cost(&self, p: [T; 2], t: T) -> T;

    /// Boundary data `q(x, t)` on Dirichlet nodes.
    fn dirichlet(&self, p: [T; 2], t: T) -> T;

    /// Terminal data `q_T(x)` on the whole domain.
    fn terminal(&self, p: [T; 2]) -> T;

    fn boundary_mask(&self) -> BoundaryMask;

    /// `(F1, F2)` with `0 < F1 <= f <= F2` everywhere.
    fn speed_bounds(&self) -> (T, T);

    /// `K1` with `K >= K1 > 0` everywhere.
    fn cost_lower_bound(&self) -> T;

    /// Exact solution, when one is known.
    fn analytic(&self, _p: [T; 2], _t: T) -> Option<T> {
        None
    }

    fn has_analytic(&self) -> bool {
        self.analytic([T::lit(0.5), T::lit(0.5)], T::zero())
            .is_some()
    }

    /// Fills `out[node] = f(x_node, t)`. Problems with structured speeds may
    /// override this with something cheaper than per-node evaluation.
    fn sample_speed(&self, grid: &GridSpec<T>, t: T, out: &mut [T]) {
        for (node, v) in out.iter_mut().enumerate() {
            *v = self.speed(grid.point(node), t);
        }
    }

    /// Fills `out[node] = K(x_node, t)`.
    fn sample_cost(&self, grid: &GridSpec<T>, t: T, out: &mut [T]) {
        for (node, v) in out.iter_mut().enumerate() {
            *v = self.running_cost(grid.point(node), t);
        }
    }
}

impl<T: Real, P: IsotropicProblem<T> + ?Sized> IsotropicProblem<T> for Box<P> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn terminal_time(&self) -> T {
        (**self).terminal_time()
    }
    fn speed(&self, p: [T; 2], t: T) -> T {
        (**self).speed(p, t)
    }
    fn running_cost(&self, p: [T; 2], t: T) -> T {
        (**self).running_cost(p, t)
    }
    fn dirichlet(&self, p: [T; 2], t: T) -> T {
        (**self).dirichlet(p, t)
    }
    fn terminal(&self, p: [T; 2]) -> T {
        (**self).terminal(p)
    }
    fn boundary_mask(&self) -> BoundaryMask {
        (**self).boundary_mask()
    }
    fn speed_bounds(&self) -> (T, T) {
        (**self).speed_bounds()
    }
    fn cost_lower_bound(&self) -> T {
        (**self).cost_lower_bound()
    }
    fn analytic(&self, p: [T; 2], t: T) -> Option<T> {
        (**self).analytic(p, t)
    }
    fn has_analytic(&self) -> bool {
        (**self).has_analytic()
    }
    fn sample_speed(&self, grid: &GridSpec<T>, t: T, out: &mut [T]) {
        (**self).sample_speed(grid, t, out)
    }
    fn sample_cost(&self, grid: &GridSpec<T>, t: T, out: &mut [T]) {
        (**self).sample_cost(grid, t, out)
    }
}

pub(crate) type SpaceTimeFn<T> = Arc<dyn Fn([T; 2], T) -> T + Send + Sync>;
pub(crate) type SpaceFn<T> = Arc<dyn Fn([T; 2]) -> T + Send + Sync>;

/// Problem assembled from closures. Used for randomized property checks and
/// for callers with their own data.
#[derive(Clone)]
pub struct FnProblem<T> {
    pub id: String,
    pub terminal_time: T,
    pub speed: SpaceTimeFn<T>,
    pub running_cost: SpaceTimeFn<T>,
    pub dirichlet: SpaceTimeFn<T>,
    pub terminal: SpaceFn<T>,
    pub mask: BoundaryMask,
    pub speed_bounds: (T, T),
    pub cost_lower_bound: T,
    pub analytic: Option<SpaceTimeFn<T>>,
}

impl<T: Real> FnProblem<T> {
    /// Constant data: `f`, `K`, zero boundary and terminal values, all edges Dirichlet.
    pub fn constant(id: &str, terminal_time: T, f: T, k: T) -> Self {
        Self {
            id: id.to_string(),
            terminal_time,
            speed: Arc::new(move |_, _| f),
            running_cost: Arc::new(move |_, _| k),
            dirichlet: Arc::new(|_, _| T::zero()),
            terminal: Arc::new(|_| T::zero()),
            mask: BoundaryMask::all_dirichlet(),
            speed_bounds: (f, f),
            cost_lower_bound: k,
            analytic: None,
        }
    }
}

impl<T: Real> IsotropicProblem<T> for FnProblem<T> {
    fn id(&self) -> String {
        self.id.clone()
    }
    fn terminal_time(&self) -> T {
        self.terminal_time
    }
    fn speed(&self, p: [T; 2], t: T) -> T {
        (self.speed)(p, t)
    }
    fn running_cost(&self, p: [T; 2], t: T) -> T {
        (self.running_cost)(p, t)
    }
    fn dirichlet(&self, p: [T; 2], t: T) -> T {
        (self.dirichlet)(p, t)
    }
    fn terminal(&self, p: [T; 2]) -> T {
        (self.terminal)(p)
    }
    fn boundary_mask(&self) -> BoundaryMask {
        self.mask
    }
    fn speed_bounds(&self) -> (T, T) {
        self.speed_bounds
    }
    fn cost_lower_bound(&self) -> T {
        self.cost_lower_bound
    }
    fn analytic(&self, p: [T; 2], t: T) -> Option<T> {
        self.analytic.as_ref().map(|u| u(p, t))
    }
    fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }
}

/// Distance to the boundary of the unit square.
#[inline]
pub fn distance_to_boundary<T: Real>(p: [T; 2]) -> T {
    let [x, y] = p;
    x.min(y).min(T::one() - x).min(T::one() - y)
}
