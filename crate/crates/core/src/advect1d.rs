//! Forward time stepping for `v_t + f(x,t) v_x = g(x,t)` on `(0, 1)` with
//! inflow at `x = 0`: explicit and implicit first-order upwind, their hybrid,
//! and a first-order semi-Lagrangian scheme.
//!
//! Node 0 always carries the inflow value. The outflow end needs no
//! condition since every stencil only looks left.

use crate::geometry::{Field, GridSpec, TimeSpec};
use crate::problem::Advection1DProblem;
use crate::{Error, Real, Result};

/// `lambda = (k / h) f(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CourantNumber<T>(pub T);

impl<T: Real> CourantNumber<T> {
    #[inline]
    pub fn new(k: T, h: T, f: T) -> Self {
        debug_assert!(f >= T::zero(), "negative speed");
        CourantNumber(k / h * f)
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn satisfies_cfl(self) -> bool {
        self.0 <= T::one()
    }
}

/// One step from `t_now` to `t_next = t_now + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<T> {
    pub k: T,
    pub t_now: T,
    pub t_next: T,
}

impl<T: Real> Step<T> {
    pub fn new(t_now: T, k: T) -> Self {
        Self {
            k,
            t_now,
            t_next: t_now + k,
        }
    }
}

/// Which 1D scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme1D {
    Explicit,
    Implicit,
    Hybrid,
    SemiLagrangian,
}

impl Scheme1D {
    pub const ALL: [Scheme1D; 4] = [
        Scheme1D::Explicit,
        Scheme1D::Implicit,
        Scheme1D::Hybrid,
        Scheme1D::SemiLagrangian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme1D::Explicit => "explicit",
            Scheme1D::Implicit => "implicit",
            Scheme1D::Hybrid => "hybrid",
            Scheme1D::SemiLagrangian => "semilagrangian",
        }
    }
}

impl std::fmt::Display for Scheme1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Scheme1D::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown 1D scheme `{s}`")))
    }
}

#[inline]
fn explicit_value<T: Real>(lambda: T, left: T, center: T, k: T, g: T) -> T {
    lambda * left + (T::one() - lambda) * center + k * g
}

#[inline]
fn implicit_value<T: Real>(lambda: T, new_left: T, old_center: T, k: T, g: T) -> T {
    (old_center + lambda * new_left + k * g) / (T::one() + lambda)
}

fn check_grid<T: Real>(v: &Field<T>) -> GridSpec<T> {
    let grid = *v.grid();
    assert_eq!(grid.dim(), 1, "1D scheme on a {}D field", grid.dim());
    grid
}

/// Forward Euler upwind step. Logs a warning when some `lambda > 1`.
pub fn step_explicit_1d<T: Real>(
    v: &Field<T>,
    p: &Advection1DProblem<T>,
    step: Step<T>,
) -> Field<T> {
    let grid = check_grid(v);
    let h = grid.spacing();
    let mut out = v.clone();
    let mut violated = false;
    for i in 1..grid.len() {
        let x = grid.coordinate(i);
        let lambda = CourantNumber::new(step.k, h, p.speed(x, step.t_now));
        violated |= !lambda.satisfies_cfl();
        out[i] = explicit_value(
            lambda.value(),
            v[i - 1],
            v[i],
            step.k,
            p.source(x, step.t_now),
        );
    }
    out[0] = p.inflow(step.t_next);
    if violated {
        log::warn!(
            "explicit 1D step at t = {} violates the CFL condition",
            step.t_now
        );
    }
    out
}

/// Backward Euler upwind step, solved by one left-to-right sweep.
pub fn step_implicit_1d<T: Real>(
    v: &Field<T>,
    p: &Advection1DProblem<T>,
    step: Step<T>,
) -> Field<T> {
    let grid = check_grid(v);
    let h = grid.spacing();
    let mut out = v.clone();
    out[0] = p.inflow(step.t_next);
    for i in 1..grid.len() {
        let x = grid.coordinate(i);
        let lambda = CourantNumber::new(step.k, h, p.speed(x, step.t_next));
        out[i] = implicit_value(
            lambda.value(),
            out[i - 1],
            v[i],
            step.k,
            p.source(x, step.t_next),
        );
    }
    out
}

/// Explicit update wherever `lambda^n_i <= 1`, implicit sweep over the rest.
pub fn step_hybrid_1d<T: Real>(v: &Field<T>, p: &Advection1DProblem<T>, step: Step<T>) -> Field<T> {
    let grid = check_grid(v);
    let h = grid.spacing();
    let mut out = v.clone();
    let mut explicit = vec![false; grid.len()];
    out[0] = p.inflow(step.t_next);
    for i in 1..grid.len() {
        let x = grid.coordinate(i);
        let lambda = CourantNumber::new(step.k, h, p.speed(x, step.t_now));
        if lambda.satisfies_cfl() {
            explicit[i] = true;
            out[i] = explicit_value(
                lambda.value(),
                v[i - 1],
                v[i],
                step.k,
                p.source(x, step.t_now),
            );
        }
    }
    for i in 1..grid.len() {
        if explicit[i] {
            continue;
        }
        let x = grid.coordinate(i);
        let lambda = CourantNumber::new(step.k, h, p.speed(x, step.t_next));
        out[i] = implicit_value(
            lambda.value(),
            out[i - 1],
            v[i],
            step.k,
            p.source(x, step.t_next),
        );
    }
    out
}

/// Follows the characteristic back from `(x_i, t_next)` for time `k` and
/// interpolates linearly. Feet left of the inflow boundary interpolate the
/// inflow data in time instead.
pub fn step_semilagrangian_1d<T: Real>(
    v: &Field<T>,
    p: &Advection1DProblem<T>,
    step: Step<T>,
) -> Field<T> {
    let grid = check_grid(v);
    let h = grid.spacing();
    let beta_next = p.inflow(step.t_next);
    let mut out = v.clone();
    out[0] = beta_next;
    for i in 1..grid.len() {
        let x = grid.coordinate(i);
        let f = p.speed(x, step.t_next);
        let g = p.source(x, step.t_next);
        // foot position in index units
        let foot = T::from_count(i) - step.k * f / h;
        out[i] = if foot >= T::zero() {
            let below = foot.floor();
            let j = below.to_usize().unwrap_or(0).min(grid.len() - 2);
            let xi = foot - T::from_count(j);
            step.k * g + xi * v[j + 1] + (T::one() - xi) * v[j]
        } else {
            // Hits x = 0 after travelling `tau < k`; theta = tau / k.
            let tau = x / f;
            let theta = tau / step.k;
            tau * g + theta * v[0] + (T::one() - theta) * beta_next
        };
    }
    out
}

/// `k_hat = h / max f`.
pub fn cfl_step_1d<T: Real>(p: &Advection1DProblem<T>, h: T) -> T {
    h / p.speed_max
}

/// Result of a forward 1D march.
#[derive(Debug, Clone)]
pub struct March1D<T> {
    pub field: Field<T>,
    pub time: TimeSpec<T>,
    /// Grid values computed, `N * (M - 1)`.
    pub node_updates: u64,
}

/// Marches from `t = 0` to `report_time` with the largest uniform step not
/// exceeding `k_requested`.
pub fn march_1d<T: Real>(
    p: &Advection1DProblem<T>,
    scheme: Scheme1D,
    grid: GridSpec<T>,
    k_requested: T,
    report_time: T,
) -> Result<March1D<T>> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid("1D march needs a 1D grid".into()));
    }
    if !(p.speed_min > T::zero()) {
        return Err(Error::BoundsViolated(format!(
            "{}: speed must be positive",
            p.id
        )));
    }
    let time = TimeSpec::with_max_step(report_time, k_requested)?;
    let mut v = Field::from_fn(grid, |i| (p.initial)(grid.coordinate(i)));
    v[0] = p.inflow(T::zero());
    for n in 0..time.steps() {
        let step = Step {
            k: time.step(),
            t_now: time.time(n),
            t_next: time.time(n + 1),
        };
        v = match scheme {
            Scheme1D::Explicit => step_explicit_1d(&v, p, step),
            Scheme1D::Implicit => step_implicit_1d(&v, p, step),
            Scheme1D::Hybrid => step_hybrid_1d(&v, p, step),
            Scheme1D::SemiLagrangian => step_semilagrangian_1d(&v, p, step),
        };
        if let Some(node) = v.first_non_finite() {
            return Err(Error::NonFinite {
                node,
                time: step.t_next.to_f64_lossy(),
            });
        }
    }
    let node_updates = (time.steps() * (grid.len() - 1)) as u64;
    Ok(March1D {
        field: v,
        time,
        node_updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::advection_catalog;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn constant(f: f64, inflow: f64) -> Advection1DProblem<f64> {
        Advection1DProblem {
            id: "const".into(),
            speed: Arc::new(move |_, _| f),
            inflow: Arc::new(move |_| inflow),
            initial: Arc::new(|_| 0.0),
            source: Arc::new(|_, _| 0.0),
            analytic: None,
            report_time: 1.0,
            speed_max: f,
            speed_min: f,
        }
    }

    fn field(values: &[f64]) -> Field<f64> {
        let g = GridSpec::new(1, values.len(), (0.0, 1.0)).unwrap();
        Field::from_values(g, values.to_vec()).unwrap()
    }

    #[test]
    fn explicit_examples() {
        let v = field(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let h = 0.25;
        let out = step_explicit_1d(&v, &constant(1.0, 0.0), Step::new(0.0, h));
        assert_eq!(&out.values()[1..], &[0.0, 1.0, 2.0, 3.0]);

        let out = step_explicit_1d(&v, &constant(0.0, 0.0), Step::new(0.0, 0.1));
        assert_eq!(&out.values()[1..], &v.values()[1..]);

        let v = field(&[0.0, 1.0, 2.0]);
        let out = step_explicit_1d(&v, &constant(1.0, 0.0), Step::new(0.0, 0.25));
        assert_eq!(out[1], 0.5);
        assert_eq!(out[2], 1.5);
    }

    #[test]
    fn implicit_examples() {
        let v = field(&[0.0, 1.0, 2.0]);
        let out = step_implicit_1d(&v, &constant(0.0, 0.0), Step::new(0.0, 0.3));
        assert_eq!(&out.values()[1..], &v.values()[1..]);

        let out = step_implicit_1d(&v, &constant(1.0, 0.0), Step::new(0.0, 0.5));
        assert_eq!(out[1], 0.5);

        // Huge lambda: each node copies its new left neighbour.
        let out = step_implicit_1d(&v, &constant(1e15, 7.0), Step::new(0.0, 1.0));
        for i in 1..3 {
            assert!((out[i] - out[i - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn semilagrangian_examples() {
        let v = field(&[0.0, 1.0, 2.0, 3.0]);
        let h = 1.0 / 3.0;
        let shift = step_semilagrangian_1d(&v, &constant(1.0, 0.0), Step::new(0.0, h));
        let exp = step_explicit_1d(&v, &constant(1.0, 0.0), Step::new(0.0, h));
        assert_eq!(shift.values(), exp.values());

        let id = step_semilagrangian_1d(&v, &constant(0.0, 0.0), Step::new(0.0, 0.2));
        assert_eq!(&id.values()[1..], &v.values()[1..]);

        let out = step_semilagrangian_1d(&v, &constant(1.0, 0.0), Step::new(0.0, 1.5 * h));
        assert!((out[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cfl_steps() {
        let p = advection_catalog::<f64>("fig2a").unwrap();
        assert_eq!(cfl_step_1d(&p, 1.0 / 64.0), 1.0 / 64.0 / 1024.0);
        assert_eq!(cfl_step_1d(&constant(1.0, 0.0), 0.01), 0.01);
        let p = advection_catalog::<f64>("fig2d").unwrap();
        assert_eq!(cfl_step_1d(&p, 1.0 / 128.0), 1.0 / (128.0 * 4.0));
    }

    #[test]
    fn hybrid_endpoints_are_bitwise() {
        let p = advection_catalog::<f64>("fig3a").unwrap();
        let grid = GridSpec::unit(1, 64).unwrap();
        let h = grid.spacing();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = Field::from_fn(grid, |_| rng.gen_range(-1.0..1.0));

        let k = cfl_step_1d(&p, h);
        let a = step_hybrid_1d(&v, &p, Step::new(0.1, k));
        let b = step_explicit_1d(&v, &p, Step::new(0.1, k));
        assert_eq!(a.values(), b.values());

        let k = 1.01 * h / p.speed_min;
        let a = step_hybrid_1d(&v, &p, Step::new(0.1, k));
        let b = step_implicit_1d(&v, &p, Step::new(0.1, k));
        assert_eq!(a.values(), b.values());
    }

    /// Straightforward two-pass reference on 8 nodes.
    #[test]
    fn hybrid_mixed_case_matches_reference() {
        let p = advection_catalog::<f64>("fig3a").unwrap();
        let grid = GridSpec::new(1, 8, (0.0, 1.0)).unwrap();
        let h = 1.0 / 7.0;
        let k = 4.0 * cfl_step_1d(&p, h);
        let v: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let t0 = 0.05;

        let mut reference = v.clone();
        reference[0] = p.inflow(t0 + k);
        let lam: Vec<f64> = (0..8)
            .map(|i| k / h * (2.0 - i as f64 * h).powi(8))
            .collect();
        let mut done = [false; 8];
        for i in 1..8 {
            if lam[i] <= 1.0 {
                reference[i] = lam[i] * v[i - 1] + (1.0 - lam[i]) * v[i];
                done[i] = true;
            }
        }
        assert!(done.iter().any(|d| *d) && !done[1..].iter().all(|d| *d));
        for i in 1..8 {
            if !done[i] {
                reference[i] = (v[i] + lam[i] * reference[i - 1]) / (1.0 + lam[i]);
            }
        }
        let out = step_hybrid_1d(&Field::from_values(grid, v).unwrap(), &p, Step::new(t0, k));
        for i in 0..8 {
            assert!((out[i] - reference[i]).abs() <= 1e-13, "node {i}");
        }
    }

    #[test]
    fn discrete_maximum_principle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = advection_catalog::<f64>("fig2c").unwrap();
        let grid = GridSpec::unit(1, 40).unwrap();
        let h = grid.spacing();
        for trial in 0..50 {
            let v = Field::from_fn(grid, |_| rng.gen_range(-2.0..3.0));
            let t0: f64 = rng.gen_range(0.0..0.9);
            let k_cfl = cfl_step_1d(&p, h);
            let k_big = k_cfl * rng.gen_range(1.0..50.0);
            let beta = [p.inflow(t0), p.inflow(t0 + k_cfl), p.inflow(t0 + k_big)];
            let lo = v
                .values()
                .iter()
                .chain(&beta)
                .copied()
                .fold(f64::INFINITY, f64::min);
            let hi = v
                .values()
                .iter()
                .chain(&beta)
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let outs = [
                step_explicit_1d(&v, &p, Step::new(t0, k_cfl)),
                step_implicit_1d(&v, &p, Step::new(t0, k_big)),
                step_hybrid_1d(&v, &p, Step::new(t0, k_big)),
                step_semilagrangian_1d(&v, &p, Step::new(t0, k_big)),
            ];
            for out in &outs {
                for &x in out.values() {
                    assert!(
                        x >= lo - 1e-12 && x <= hi + 1e-12,
                        "trial {trial}: {x} not in [{lo}, {hi}]"
                    );
                }
            }
        }
    }

    #[test]
    fn constant_speed_shift_is_exact() {
        let p = constant(1.0, 0.0);
        let grid = GridSpec::<f64>::unit(1, 50).unwrap();
        let h = grid.spacing();
        let v = Field::from_fn(grid, |i| (grid.coordinate(i) * 3.0).exp());
        let out = step_explicit_1d(&v, &p, Step::new(0.0, h));
        for i in 1..grid.len() {
            assert!((out[i] - v[i - 1]).abs() <= 1e-14);
        }
    }
}
