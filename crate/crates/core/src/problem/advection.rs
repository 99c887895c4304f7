use std::sync::Arc;

use crate::{Error, Real, Result};

type Fn1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type Fn2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// `v_t + f(x,t) v_x = g(x,t)` on `(0, 1)` with `v(0,t) = beta(t)`,
/// `v(x,0) = alpha(x)` and `f > 0`, marched forward to `report_time`.
#[derive(Clone)]
pub struct Advection1DProblem<T> {
    pub id: String,
    pub speed: Fn2<T>,
    pub inflow: Fn1<T>,
    pub initial: Fn1<T>,
    pub source: Fn2<T>,
    pub analytic: Option<Fn2<T>>,
    pub report_time: T,
    /// `max f` over the space-time domain.
    pub speed_max: T,
    /// `min f` over the space-time domain.
    pub speed_min: T,
}

impl<T: Real> std::fmt::Debug for Advection1DProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Advection1DProblem")
            .field("id", &self.id)
            .field("report_time", &self.report_time)
            .field("speed_max", &self.speed_max)
            .field("speed_min", &self.speed_min)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Advection1DProblem<T> {
    #[inline]
    pub fn speed(&self, x: T, t: T) -> T {
        (self.speed)(x, t)
    }

    #[inline]
    pub fn inflow(&self, t: T) -> T {
        (self.inflow)(t)
    }

    #[inline]
    pub fn source(&self, x: T, t: T) -> T {
        (self.source)(x, t)
    }

    pub fn analytic(&self, x: T, t: T) -> Option<T> {
        self.analytic.as_ref().map(|v| v(x, t))
    }

    /// Replaces the initial data. The closed-form solution, which was built
    /// for the original data, is dropped.
    pub fn with_initial(mut self, alpha: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.initial = Arc::new(alpha);
        self.analytic = None;
        self
    }
}

pub const ADVECTION_CASES: [&str; 8] = [
    "fig1a", "fig1b", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b",
];

/// Travel time from `x = 0` to `x` for each time-independent speed of the
/// stiff/non-stiff suite, i.e. `int_0^x ds / f(s)`.
fn travel_time<T: Real>(case: &str, x: T) -> T {
    let two = T::lit(2.0);
    let two_pi_x = two * T::PI() * x;
    match case {
        "fig2a" => (T::one() - (T::one() + x).powi(-9)) / T::lit(9.0),
        "fig2b" => T::lit(0.505) * x + T::lit(49.5) * two_pi_x.sin() / (T::lit(200.0) * T::PI()),
        "fig2c" => ((two - x).powi(-9) - two.powi(-9)) / T::lit(9.0),
        "fig2d" => T::one() / (two - x) - T::lit(0.5),
        "fig3a" => ((two - x).powi(-7) - two.powi(-7)) / T::lit(7.0),
        "fig3b" => {
            (T::lit(25.5) * x + T::lit(24.5) * two_pi_x.sin() / (two * T::PI())) / T::lit(50.0)
        }
        _ => unreachable!("no travel time for {case}"),
    }
}

/// The 1D test problems by case id.
///
/// `fig2*` and `fig3*` use the inflow `sin(10 pi t)` with zero initial data;
/// their exact solution follows the characteristics back to the inflow,
/// `v(x, t) = beta(t - tau(x))` for `t >= tau(x)` and `0` before.
pub fn advection_catalog<T: Real>(case_id: &str) -> Result<Advection1DProblem<T>> {
    let two = T::lit(2.0);
    let zero_source: Fn2<T> = Arc::new(|_, _| T::zero());
    let p = match case_id {
        "fig1a" => Advection1DProblem {
            id: case_id.into(),
            speed: Arc::new(move |x, _| T::one() / (two * x + T::one())),
            inflow: Arc::new(|t: T| (-t).exp()),
            initial: Arc::new(|x: T| (x * x + x).exp()),
            source: zero_source,
            analytic: Some(Arc::new(|x: T, t: T| (x * x + x - t).exp())),
            report_time: T::lit(1.5),
            speed_max: T::one(),
            speed_min: T::one() / T::lit(3.0),
        },
        "fig1b" => Advection1DProblem {
            id: case_id.into(),
            speed: Arc::new(|_, _| T::one()),
            inflow: Arc::new(|t: T| t.exp()),
            initial: Arc::new(|x: T| x.exp()),
            // v = e^{x+t} needs v_t + v_x = 2 e^{x+t}.
            source: Arc::new(move |x: T, t: T| two * (x + t).exp()),
            analytic: Some(Arc::new(|x: T, t: T| (x + t).exp())),
            report_time: T::lit(1.5),
            speed_max: T::one(),
            speed_min: T::one(),
        },
        "fig2a" | "fig2b" | "fig2c" | "fig2d" | "fig3a" | "fig3b" => {
            let (speed, speed_max, report): (Fn2<T>, f64, f64) = match case_id {
                "fig2a" => (Arc::new(|x: T, _| (T::one() + x).powi(10)), 1024.0, 1.0),
                "fig2b" => (
                    Arc::new(|x: T, _| {
                        T::lit(100.0)
                            / (T::lit(50.5) + T::lit(49.5) * (T::lit(2.0) * T::PI() * x).cos())
                    }),
                    100.0,
                    1.0,
                ),
                "fig2c" => (Arc::new(move |x: T, _| (two - x).powi(10)), 1024.0, 1.0),
                "fig2d" => (Arc::new(move |x: T, _| (two - x).powi(2)), 4.0, 1.0),
                "fig3a" => (Arc::new(move |x: T, _| (two - x).powi(8)), 256.0, 0.184),
                _ => (
                    Arc::new(|x: T, _| {
                        T::lit(50.0)
                            / (T::lit(25.5) + T::lit(24.5) * (T::lit(2.0) * T::PI() * x).cos())
                    }),
                    50.0,
                    0.663,
                ),
            };
            let beta = |t: T| (T::lit(10.0) * T::PI() * t).sin();
            let case: &'static str = ADVECTION_CASES.iter().find(|c| **c == case_id).unwrap();
            Advection1DProblem {
                id: case_id.into(),
                speed,
                inflow: Arc::new(beta),
                initial: Arc::new(|_| T::zero()),
                source: zero_source,
                analytic: Some(Arc::new(move |x: T, t: T| {
                    let s = t - travel_time(case, x);
                    if s >= T::zero() {
                        beta(s)
                    } else {
                        T::zero()
                    }
                })),
                report_time: T::lit(report),
                speed_max: T::lit(speed_max),
                speed_min: T::one(),
            }
        }
        _ => return Err(Error::UnknownProblem(case_id.to_string())),
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn catalog_point_values() {
        let p = advection_catalog::<f64>("fig1a").unwrap();
        assert_relative_eq!(p.analytic(1.0, 0.0).unwrap(), 2f64.exp());
        let p = advection_catalog::<f64>("fig2a").unwrap();
        assert_relative_eq!(p.speed(1.0, 0.0), 1024.0);
        let p = advection_catalog::<f64>("fig2b").unwrap();
        assert_relative_eq!(p.speed(0.0, 0.0), 1.0);
        assert_relative_eq!(p.speed(0.5, 0.0), 100.0, epsilon = 1e-10);
        assert!(advection_catalog::<f64>("fig9z").is_err());
    }

    #[test]
    fn speed_bounds_bracket_samples() {
        for case in ADVECTION_CASES {
            let p = advection_catalog::<f64>(case).unwrap();
            let mut hi = 0.0f64;
            let mut lo = f64::INFINITY;
            for i in 0..=1000 {
                let f = p.speed(i as f64 / 1000.0, 0.3);
                hi = hi.max(f);
                lo = lo.min(f);
            }
            assert!(
                hi <= p.speed_max * (1.0 + 1e-12) && hi >= 0.99 * p.speed_max,
                "{case}"
            );
            assert!(lo >= p.speed_min * (1.0 - 1e-12), "{case}");
        }
    }

    /// Exact solutions satisfy `v_t + f v_x = g` (central differences, smooth region).
    #[test]
    fn analytic_solutions_satisfy_the_pde() {
        let e = 1e-6;
        for case in ADVECTION_CASES {
            let p = advection_catalog::<f64>(case).unwrap();
            let v = |x: f64, t: f64| p.analytic(x, t).unwrap();
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let t = p.report_time;
                let vt = (v(x, t + e) - v(x, t - e)) / (2.0 * e);
                let vx = (v(x + e, t) - v(x - e, t)) / (2.0 * e);
                let r = vt + p.speed(x, t) * vx - p.source(x, t);
                let scale = 1.0 + vt.abs().max(p.speed(x, t) * vx.abs());
                assert!(r.abs() / scale <= 1e-5, "{case} x={x}: residual {r}");
            }
            assert_relative_eq!(v(0.0, 0.37), p.inflow(0.37), epsilon = 1e-12);
        }
    }

    #[test]
    fn overriding_initial_data_drops_the_exact_solution() {
        let p = advection_catalog::<f64>("fig2d")
            .unwrap()
            .with_initial(|x| x);
        assert!(p.analytic.is_none());
        assert_eq!((p.initial)(0.25), 0.25);
    }
}
