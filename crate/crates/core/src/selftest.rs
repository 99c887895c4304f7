//! Property checks that can run on any machine, outside the test harness.
//!
//! [`run_all`] drives the same invariants the unit tests cover (local-solve
//! monotonicity, agreement with the oracles, acceptance order, comparison
//! principle, determinism, exact solutions) on seeded random data and
//! reports one outcome per property.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::advect1d::{march_1d, Scheme1D};
use crate::fast_marching::{solve_slice, SliceInputs};
use crate::geometry::{Field, GridSpec};
use crate::local_updates::{
    local_value, quadratic_one_sided, quadratic_two_sided, OneSided, QuadraticInputs, TwoSided,
};
use crate::marchers::{march, march_to_zero, MarchConfig, Scheme};
use crate::oracle::{bisect_local, gauss_seidel_slice, LocalEquation};
use crate::problem::{
    advection_catalog, experiment1, experiment2, experiment3, experiment4, FnProblem,
    IsotropicProblem,
};
use crate::Result;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

type Check = fn(u64) -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 10] = [
    ("local solves are monotone", local_monotonicity),
    (
        "closed-form local solves match bisection",
        local_vs_bisection,
    ),
    ("slice solver matches Gauss-Seidel", slice_vs_gauss_seidel),
    ("acceptance order is causal", causal_order),
    ("comparison principle", comparison_principle),
    ("runs are bitwise reproducible", determinism),
    ("hybrid reduces to explicit and implicit", hybrid_endpoints),
    ("exact solutions satisfy the PDE", pde_residuals),
    ("1D explicit shift is exact", exact_shift),
    ("local solves are first-order consistent", local_consistency),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs every check with the given seed. Errors count as failures.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check(seed) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                passed,
                detail,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

fn random_local(rng: &mut ChaCha8Rng) -> QuadraticInputs<f64> {
    let w1 = rng.gen_range(-1.0..1.0);
    QuadraticInputs {
        w0: w1 + rng.gen_range(-0.3..1.0),
        w1,
        w2: Some(w1 + rng.gen_range(-0.3..0.3)),
        h: rng.gen_range(0.005..0.2),
        k: rng.gen_range(0.001..1.0),
        speed: rng.gen_range(0.1..5.0),
        cost: rng.gen_range(0.5..2.0),
    }
}

fn local_monotonicity(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let base = random_local(&mut rng);
        let v = local_value(&base);
        let mut bumped = [base; 3];
        bumped[0].w0 += 1e-3;
        bumped[1].w1 += 1e-3;
        bumped[2].w2 = base.w2.map(|w| w + 1e-3);
        for b in &bumped {
            worst = worst.max(v - local_value(b));
        }
    }
    Ok((
        worst <= 1e-12,
        format!("largest decrease {worst:.3e} over 10^4 tuples"),
    ))
}

fn local_vs_bisection(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    for _ in 0..10_000 {
        let inp = random_local(&mut rng);
        match (
            quadratic_one_sided(&inp),
            bisect_local(LocalEquation::OneSided, &inp, 0.0),
        ) {
            (OneSided::Root(a), Some(b)) => worst = worst.max((a - b).abs()),
            (OneSided::NoSolution, None) => {}
            _ => mismatched += 1,
        }
        match (
            quadratic_two_sided(&inp),
            bisect_local(LocalEquation::TwoSided, &inp, 0.0),
        ) {
            (TwoSided::Root(a), Some(b)) => worst = worst.max((a - b).abs()),
            (TwoSided::Fallback, None) => {}
            _ => mismatched += 1,
        }
    }
    Ok((
        worst <= 1e-9 && mismatched == 0,
        format!("max gap {worst:.3e}, {mismatched} existence mismatches"),
    ))
}

/// Random slice on a `cells`-per-axis unit grid with the boundary fixed.
pub struct RandomSlice {
    pub v_next: Field<f64>,
    pub speed: Vec<f64>,
    pub cost: Vec<f64>,
    pub fixed: Vec<Option<f64>>,
    pub k: f64,
}

impl RandomSlice {
    /// Smooth positive `f in [0.1, 5]`, `K in [0.5, 2]`, random `V^{n+1}`.
    pub fn new(seed: u64, cells: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = GridSpec::unit(2, cells).expect("cells >= 2");
        let mut smooth = |lo: f64, hi: f64| {
            let (a, b, c, d) = (
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.5..3.0),
                rng.gen::<f64>(),
                rng.gen::<f64>(),
            );
            move |p: [f64; 2]| {
                let s = ((a * p[0] + c) * std::f64::consts::TAU).sin()
                    * ((b * p[1] + d) * std::f64::consts::TAU).cos();
                lo + (hi - lo) * 0.5 * (1.0 + s)
            }
        };
        let (fs, ks, vs) = (smooth(0.1, 5.0), smooth(0.5, 2.0), smooth(0.0, 1.0));
        let speed = (0..grid.len()).map(|n| fs(grid.point(n))).collect();
        let cost = (0..grid.len()).map(|n| ks(grid.point(n))).collect();
        let v_next = Field::from_fn(grid, |n| vs(grid.point(n)) + 0.05 * rng.gen::<f64>());
        let fixed = (0..grid.len())
            .map(|n| grid.is_boundary(n).then(|| 0.3 * rng.gen::<f64>()))
            .collect();
        let k = rng.gen_range(0.005..0.5);
        Self {
            v_next,
            speed,
            cost,
            fixed,
            k,
        }
    }

    pub fn inputs(&self) -> SliceInputs<'_, f64> {
        SliceInputs {
            v_next: &self.v_next,
            speed: &self.speed,
            cost: &self.cost,
            k: self.k,
            fixed: &self.fixed,
        }
    }

    /// `L_inf` distance between the slice solver and the Gauss-Seidel oracle.
    pub fn oracle_gap(&self) -> Result<f64> {
        let (fmm, _) = solve_slice(&self.inputs())?;
        let gs = gauss_seidel_slice(&self.inputs(), 1e-13, 20_000);
        if !gs.converged {
            return Ok(f64::INFINITY);
        }
        Ok(fmm
            .values()
            .iter()
            .zip(gs.field.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn slice_vs_gauss_seidel(seed: u64) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..5 {
        worst = worst.max(RandomSlice::new(seed.wrapping_add(i), 16).oracle_gap()?);
    }
    Ok((
        worst <= 1e-10,
        format!("max L_inf gap {worst:.3e} over 5 slices of 17x17 nodes"),
    ))
}

fn causal_order(seed: u64) -> Result<(bool, String)> {
    let mut violations = 0;
    for i in 0..10 {
        let (_, stats) = solve_slice(&RandomSlice::new(seed.wrapping_add(100 + i), 32).inputs())?;
        violations += stats.order_violations;
    }
    let p = experiment4::<f64>();
    for scheme in [Scheme::Implicit, Scheme::Hybrid] {
        let (_, rep) = march_to_zero(&p, &MarchConfig::with_multiplier(&p, scheme, 32, 8.0)?)?;
        violations += rep.order_violations as usize;
    }
    Ok((
        violations == 0,
        format!("{violations} out-of-order acceptances"),
    ))
}

fn comparison_principle(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.gen_range(0.05..0.5);
    let base = experiment3::<f64>(5.0)?;
    let raised = FnProblem {
        id: "raised".into(),
        terminal_time: base.terminal_time(),
        speed: std::sync::Arc::new(move |p, t| base.speed(p, t)),
        running_cost: std::sync::Arc::new(move |p, t| base.running_cost(p, t)),
        dirichlet: std::sync::Arc::new(move |p, t| base.dirichlet(p, t)),
        terminal: std::sync::Arc::new(move |p| base.terminal(p) + c),
        mask: base.boundary_mask(),
        speed_bounds: base.speed_bounds(),
        cost_lower_bound: base.cost_lower_bound(),
        analytic: None,
    };
    let mut worst_low = 0.0f64;
    let mut worst_high = 0.0f64;
    for scheme in Scheme::ALL {
        for r in [0.5, 1.0, 4.0, 16.0] {
            if scheme == Scheme::Explicit && r > 1.0 {
                continue;
            }
            let mut cfg = MarchConfig::with_multiplier(&base, scheme, 16, r)?;
            cfg.record = (0..=cfg.time.steps()).collect();
            let (a, _) = march(&base, &cfg)?;
            let (b, _) = march(&raised, &cfg)?;
            for (sa, sb) in a.iter().zip(&b) {
                for (x, y) in sa.field.values().iter().zip(sb.field.values()) {
                    worst_low = worst_low.max(x - y);
                    worst_high = worst_high.max(y - x - c);
                }
            }
        }
    }
    Ok((
        worst_low <= 1e-12 && worst_high <= 1e-12,
        format!("raise {c:.3}: worst drop {worst_low:.2e}, worst excess {worst_high:.2e}"),
    ))
}

fn determinism(seed: u64) -> Result<(bool, String)> {
    let s = RandomSlice::new(seed, 24);
    let (a, _) = solve_slice(&s.inputs())?;
    let (b, _) = solve_slice(&s.inputs())?;
    let mut same = a
        .values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    let p = experiment4::<f64>();
    for scheme in Scheme::ALL {
        let cfg = MarchConfig::with_multiplier(
            &p,
            scheme,
            24,
            if scheme == Scheme::Explicit { 1.0 } else { 4.0 },
        )?;
        let (x, _) = march_to_zero(&p, &cfg)?;
        let (y, _) = march_to_zero(&p, &cfg)?;
        same &= x
            .values()
            .iter()
            .zip(y.values())
            .all(|(u, v)| u.to_bits() == v.to_bits());
    }
    Ok((
        same,
        if same {
            "identical bits".into()
        } else {
            "outputs differ".into()
        },
    ))
}

fn hybrid_endpoints(_seed: u64) -> Result<(bool, String)> {
    let p = experiment4::<f64>();
    let run = |s, r| -> Result<Field<f64>> {
        Ok(march_to_zero(&p, &MarchConfig::with_multiplier(&p, s, 32, r)?)?.0)
    };
    let same = |a: &Field<f64>, b: &Field<f64>| {
        a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    };
    let low = same(&run(Scheme::Hybrid, 1.0)?, &run(Scheme::Explicit, 1.0)?);
    let high = same(&run(Scheme::Hybrid, 64.0)?, &run(Scheme::Implicit, 64.0)?);
    Ok((
        low && high,
        format!("r=1 equals explicit: {low}; r=64 equals implicit: {high}"),
    ))
}

/// Largest `|v_t + K - f |grad v||` of the exact solution over `samples`
/// random space-time points, by central differences with step `1e-5`.
///
/// Points within `kink_margin` of a switch in the nearest boundary side are
/// skipped, as are (for the first experiment) points near `dist = T - t`.
pub fn max_pde_residual<P: IsotropicProblem<f64> + ?Sized>(
    p: &P,
    seed: u64,
    samples: usize,
    kink_margin: f64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = 1e-5;
    let u = |x: f64, y: f64, t: f64| {
        p.analytic([x, y], t)
            .expect("problem has an exact solution")
    };
    let mut worst = 0.0f64;
    let mut accepted = 0;
    while accepted < samples {
        let (x, y) = (rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98));
        let t = rng.gen_range(0.0..p.terminal_time() - 0.01);
        let mut d = [x, y, 1.0 - x, 1.0 - y];
        d.sort_by(f64::total_cmp);
        if d[1] - d[0] <= kink_margin {
            continue;
        }
        if p.id() == "experiment1" && (d[0] - (p.terminal_time() - t)).abs() <= kink_margin {
            continue;
        }
        accepted += 1;
        let ut = (u(x, y, t + e) - u(x, y, t - e)) / (2.0 * e);
        let ux = (u(x + e, y, t) - u(x - e, y, t)) / (2.0 * e);
        let uy = (u(x, y + e, t) - u(x, y - e, t)) / (2.0 * e);
        let r = ut + p.running_cost([x, y], t) - p.speed([x, y], t) * ux.hypot(uy);
        worst = worst.max(r.abs());
    }
    worst
}

fn pde_residuals(seed: u64) -> Result<(bool, String)> {
    let mut worst = max_pde_residual(&experiment1::<f64>(), seed, 100, 0.05);
    for lambda in [0.1, 0.25, 0.8] {
        worst = worst.max(max_pde_residual(&experiment2(lambda)?, seed + 1, 100, 0.0));
    }
    for gamma in [5.0, 11.0] {
        worst = worst.max(max_pde_residual(&experiment3(gamma)?, seed + 2, 100, 0.05));
    }
    Ok((worst <= 1e-4, format!("max residual {worst:.3e}")))
}

fn exact_shift(_seed: u64) -> Result<(bool, String)> {
    let p = advection_catalog::<f64>("fig1b")?;
    let grid = GridSpec::unit(1, 64)?;
    let mut worst = 0.0f64;
    // f = 1, k = h: one step moves the data by exactly one node.
    let k = grid.spacing();
    let mut v = Field::from_fn(grid, |i| (p.initial)(grid.coordinate(i)));
    let src = p.clone();
    let no_source = crate::problem::Advection1DProblem {
        source: std::sync::Arc::new(|_, _| 0.0),
        analytic: None,
        ..src
    };
    for n in 0..20 {
        let step = crate::advect1d::Step::new(k * n as f64, k);
        let next = crate::advect1d::step_explicit_1d(&v, &no_source, step);
        for i in 1..grid.len() {
            worst = worst.max((next[i] - v[i - 1]).abs());
        }
        v = next;
    }
    let m = march_1d(&no_source, Scheme1D::Explicit, grid, k, 0.5)?;
    let ok = worst <= 1e-14 && m.field.first_non_finite().is_none();
    Ok((ok, format!("max per-step deviation {worst:.2e}")))
}

/// Truncation error of the one-sided solve on smooth data.
///
/// With `u = |x|^2 / 2`, `f = 1` and `K = |x|` the radial profile is a
/// stationary solution. Feeding `W1 = u(x - h)`, `W0 = u(x)` and comparing the
/// returned value with `u(x)` gives the local error; scaled by the operator
/// weight `1/h + 1/(k f)` it is the truncation error and should be `O(h)`.
fn local_consistency(_seed: u64) -> Result<(bool, String)> {
    let u = |x: f64| 0.5 * x * x;
    let (x, k) = (0.8, 0.5);
    let mut pts = Vec::new();
    for m in 4..12 {
        let h = 0.5f64.powi(m);
        let inp = QuadraticInputs {
            w0: u(x),
            w1: u(x - h),
            w2: None,
            h,
            k,
            speed: 1.0,
            cost: x,
        };
        let v = quadratic_one_sided(&inp).value_or_inf();
        pts.push((h, (v - u(x)).abs() * (1.0 / h + 1.0 / k)));
    }
    let slope = crate::metrics::convergence_slope(&pts)?;
    Ok((
        (0.7..=1.1).contains(&slope),
        format!("truncation slope {slope:.3}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for outcome in run_all(7) {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }
}
