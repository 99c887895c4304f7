use std::collections::BTreeMap;

use super::{distance_to_boundary, IsotropicProblem};
use crate::geometry::{BoundaryKind, BoundaryMask, GridSpec};
use crate::{Error, Real, Result};

/// Named numeric parameters, e.g. `{"gamma": 11.0}`.
pub type ProblemParams = BTreeMap<String, f64>;

/// Zero exit cost, unit speed and cost; the value is `min(dist(x), T - t)`.
#[derive(Debug, Clone, Copy)]
pub struct Experiment1<T> {
    terminal: T,
}

pub fn experiment1<T: Real>() -> Experiment1<T> {
    Experiment1 {
        terminal: T::lit(1.2),
    }
}

impl<T: Real> IsotropicProblem<T> for Experiment1<T> {
    fn id(&self) -> String {
        "experiment1".into()
    }
    fn terminal_time(&self) -> T {
        self.terminal
    }
    fn speed(&self, _p: [T; 2], _t: T) -> T {
        T::one()
    }
    fn running_cost(&self, _p: [T; 2], _t: T) -> T {
        T::one()
    }
    fn dirichlet(&self, _p: [T; 2], _t: T) -> T {
        T::zero()
    }
    fn terminal(&self, _p: [T; 2]) -> T {
        T::zero()
    }
    fn boundary_mask(&self) -> BoundaryMask {
        BoundaryMask::all_dirichlet()
    }
    fn speed_bounds(&self) -> (T, T) {
        (T::one(), T::one())
    }
    fn cost_lower_bound(&self) -> T {
        T::one()
    }
    fn analytic(&self, p: [T; 2], t: T) -> Option<T> {
        Some(distance_to_boundary(p).min(self.terminal - t))
    }
    fn has_analytic(&self) -> bool {
        true
    }
}

/// Speed `1/(2y+1)`, inflow data `e^{lambda t}` on `y = 0`, the other three
/// sides outflow. Exact solution `y + y^2 + e^{lambda (t + y + y^2)}`.
#[derive(Debug, Clone, Copy)]
pub struct Experiment2<T> {
    lambda: T,
    terminal: T,
}

pub fn experiment2<T: Real>(lambda: T) -> Result<Experiment2<T>> {
    if !(lambda.is_finite() && lambda > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(Experiment2 {
        lambda,
        terminal: T::lit(1.2),
    })
}

impl<T: Real> Experiment2<T> {
    pub fn lambda(&self) -> T {
        self.lambda
    }

    fn exact(&self, y: T, t: T) -> T {
        let s = y + y * y;
        s + (self.lambda * (t + s)).exp()
    }
}

impl<T: Real> IsotropicProblem<T> for Experiment2<T> {
    fn id(&self) -> String {
        format!("experiment2-lambda{}", self.lambda)
    }
    fn terminal_time(&self) -> T {
        self.terminal
    }
    fn speed(&self, p: [T; 2], _t: T) -> T {
        T::one() / (T::lit(2.0) * p[1] + T::one())
    }
    fn running_cost(&self, _p: [T; 2], _t: T) -> T {
        T::one()
    }
    fn dirichlet(&self, p: [T; 2], t: T) -> T {
        self.exact(p[1], t)
    }
    fn terminal(&self, p: [T; 2]) -> T {
        self.exact(p[1], self.terminal)
    }
    fn boundary_mask(&self) -> BoundaryMask {
        BoundaryMask {
            edges: [
                BoundaryKind::Outflow,
                BoundaryKind::Outflow,
                BoundaryKind::Dirichlet,
                BoundaryKind::Outflow,
            ],
        }
    }
    fn speed_bounds(&self) -> (T, T) {
        (T::one() / T::lit(3.0), T::one())
    }
    fn cost_lower_bound(&self) -> T {
        T::one()
    }
    fn analytic(&self, p: [T; 2], t: T) -> Option<T> {
        Some(self.exact(p[1], t))
    }
    fn has_analytic(&self) -> bool {
        true
    }
}

/// Stiff speed `((1 + 2 dist(x)) / 2)^gamma` with spatially uniform exit
/// penalty `q(t) = (e^8 - e^{8(1-t)}) / (e^8 - 1)`.
#[derive(Debug, Clone, Copy)]
pub struct Experiment3<T> {
    gamma: T,
    terminal: T,
}

pub fn experiment3<T: Real>(gamma: T) -> Result<Experiment3<T>> {
    if !(gamma.is_finite() && gamma > T::one()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    Ok(Experiment3 {
        gamma,
        terminal: T::one(),
    })
}

impl<T: Real> Experiment3<T> {
    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Minimal time to reach the boundary.
    pub fn exit_time(&self, p: [T; 2]) -> T {
        let phi = distance_to_boundary(p);
        let g1 = self.gamma - T::one();
        let two = T::lit(2.0);
        two.powf(g1) / g1 * (T::one() - (T::one() + two * phi).powf(-g1))
    }

    /// Exit penalty; defined for all `s`, including `s > T`.
    pub fn exit_penalty(s: T) -> T {
        let e8 = T::lit(8.0).exp();
        (e8 - (T::lit(8.0) * (T::one() - s)).exp()) / (e8 - T::one())
    }

    fn exact(&self, p: [T; 2], t: T) -> T {
        let tau = self.exit_time(p);
        tau + Self::exit_penalty(t + tau)
    }
}

impl<T: Real> IsotropicProblem<T> for Experiment3<T> {
    fn id(&self) -> String {
        format!("experiment3-gamma{}", self.gamma)
    }
    fn terminal_time(&self) -> T {
        self.terminal
    }
    fn speed(&self, p: [T; 2], _t: T) -> T {
        ((T::one() + T::lit(2.0) * distance_to_boundary(p)) / T::lit(2.0)).powf(self.gamma)
    }
    fn running_cost(&self, _p: [T; 2], _t: T) -> T {
        T::one()
    }
    fn dirichlet(&self, _p: [T; 2], t: T) -> T {
        Self::exit_penalty(t)
    }
    fn terminal(&self, p: [T; 2]) -> T {
        self.exact(p, self.terminal)
    }
    fn boundary_mask(&self) -> BoundaryMask {
        BoundaryMask::all_dirichlet()
    }
    fn speed_bounds(&self) -> (T, T) {
        (T::lit(0.5).powf(self.gamma), T::one())
    }
    fn cost_lower_bound(&self) -> T {
        T::one()
    }
    fn analytic(&self, p: [T; 2], t: T) -> Option<T> {
        Some(self.exact(p, t))
    }
    fn has_analytic(&self) -> bool {
        true
    }
}

/// Oscillating speed `0.1 + 4.9 sin^2(pi t) sin^16(8 pi x) sin^16(8 pi y)`,
/// zero data, `T = 4`. No closed-form solution.
#[derive(Debug, Clone, Copy)]
pub struct Experiment4<T> {
    terminal: T,
}

pub fn experiment4<T: Real>() -> Experiment4<T> {
    Experiment4 {
        terminal: T::lit(4.0),
    }
}

impl<T: Real> Experiment4<T> {
    fn spatial_factor(v: T) -> T {
        let s = (T::lit(8.0) * T::PI() * v).sin();
        let s2 = s * s;
        let s4 = s2 * s2;
        let s8 = s4 * s4;
        s8 * s8
    }

    fn time_factor(t: T) -> T {
        let s = (T::PI() * t).sin();
        s * s
    }
}

impl<T: Real> IsotropicProblem<T> for Experiment4<T> {
    fn id(&self) -> String {
        "experiment4".into()
    }
    fn terminal_time(&self) -> T {
        self.terminal
    }
    fn speed(&self, p: [T; 2], t: T) -> T {
        T::lit(0.1)
            + T::lit(4.9)
                * Self::time_factor(t)
                * Self::spatial_factor(p[0])
                * Self::spatial_factor(p[1])
    }
    fn running_cost(&self, _p: [T; 2], _t: T) -> T {
        T::one()
    }
    fn dirichlet(&self, _p: [T; 2], _t: T) -> T {
        T::zero()
    }
    fn terminal(&self, _p: [T; 2]) -> T {
        T::zero()
    }
    fn boundary_mask(&self) -> BoundaryMask {
        BoundaryMask::all_dirichlet()
    }
    fn speed_bounds(&self) -> (T, T) {
        (T::lit(0.1), T::lit(5.0))
    }
    fn cost_lower_bound(&self) -> T {
        T::one()
    }

    // Separable in x, y and t; same arithmetic as `speed`, evaluated once per axis.
    fn sample_speed(&self, grid: &GridSpec<T>, t: T, out: &mut [T]) {
        let n = grid.points_per_axis();
        let axis: Vec<T> = (0..n)
            .map(|i| Self::spatial_factor(grid.coordinate(i)))
            .collect();
        let a = T::lit(4.9) * Self::time_factor(t);
        let base = T::lit(0.1);
        for (node, v) in out.iter_mut().enumerate() {
            let (i, j) = grid.coords(node);
            let sy = if grid.dim() == 2 {
                axis[j]
            } else {
                Self::spatial_factor(grid.extents().0)
            };
            *v = base + a * axis[i] * sy;
        }
    }
}

/// Looks a catalog problem up by name. Unknown names or parameters are errors.
pub fn by_name<T: Real>(
    name: &str,
    params: &ProblemParams,
) -> Result<Box<dyn IsotropicProblem<T>>> {
    let allowed: &[&str] = match name {
        "experiment1" | "experiment4" => &[],
        "experiment2" => &["lambda"],
        "experiment3" => &["gamma"],
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!(
            "`{name}` takes no parameter `{bad}`"
        )));
    }
    let get = |key: &str, default: f64| T::lit(params.get(key).copied().unwrap_or(default));
    Ok(match name {
        "experiment1" => Box::new(experiment1::<T>()),
        "experiment2" => Box::new(experiment2(get("lambda", 0.1))?),
        "experiment3" => Box::new(experiment3(get("gamma", 11.0))?),
        _ => Box::new(experiment4::<T>()),
    })
}
