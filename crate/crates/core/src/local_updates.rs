//! Node-local formulas of the 2D upwind discretization.
//!
//! With `c = W0 + kK` (the stay-in-place value) every implicit local solve
//! looks for `V` in `[max W, c)` with
//!
//! ```text
//!   sum_i ((V - W_i) / h)^2 = ((c - V) / (k f))^2 .
//! ```
//!
//! The left side increases and the right side decreases on that interval, so
//! the admissible root is unique when it exists. Requiring `c - V > 0` keeps
//! the modified speed `k f / (c - V)` positive; roots on the other branch of
//! the squared relation are discarded.

use crate::geometry::{Field, GridSpec};
use crate::Real;

/// One-sided upwind difference magnitudes, `max(D-, -D+, 0)` per axis.
/// Off-grid neighbours do not take part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpwindGradientSample<T> {
    pub gx: T,
    pub gy: T,
}

impl<T: Real> UpwindGradientSample<T> {
    pub fn of(field: &Field<T>, node: usize) -> Self {
        let grid = field.grid();
        let center = field[node];
        debug_assert!(center.is_finite(), "upwind gradient of a non-finite value");
        let axis = |a: usize| -> T {
            let lowest = lowest_neighbor(field, grid, node, a);
            match lowest {
                Some(w) if w < center => (center - w) / grid.spacing(),
                _ => T::zero(),
            }
        };
        let gx = axis(0);
        let gy = if grid.dim() == 2 { axis(1) } else { T::zero() };
        Self { gx, gy }
    }

    pub fn norm(&self) -> T {
        self.gx.hypot(self.gy)
    }
}

/// Smaller of the two neighbour values along `axis`, ignoring off-grid ones.
#[inline]
pub(crate) fn lowest_neighbor<T: Real>(
    field: &Field<T>,
    grid: &GridSpec<T>,
    node: usize,
    axis: usize,
) -> Option<T> {
    grid.axis_neighbors(node, axis)
        .iter()
        .flatten()
        .map(|&n| field[n])
        .reduce(T::min)
}

/// Explicit backward step at one node:
/// `V^n = V^{n+1} + k (K - f |grad^+ V^{n+1}|)`.
#[inline]
pub fn explicit_node_update<T: Real>(v_next: &Field<T>, node: usize, speed: T, cost: T, k: T) -> T {
    let g = UpwindGradientSample::of(v_next, node);
    v_next[node] + k * (cost - speed * g.norm())
}

/// Value of staying put for one step: `W0 + k K`.
#[inline]
pub fn stay_in_place<T: Real>(w0: T, k: T, cost: T) -> T {
    debug_assert!(w0.is_finite());
    w0 + k * cost
}

/// Inputs of a local implicit solve at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticInputs<T> {
    /// Value at this node in the known slice `t_{n+1}`.
    pub w0: T,
    /// Value of the newly accepted neighbour.
    pub w1: T,
    /// Accepted transverse neighbour (the smaller one when both are).
    pub w2: Option<T>,
    pub h: T,
    pub k: T,
    pub speed: T,
    pub cost: T,
}

impl<T: Real> QuadraticInputs<T> {
    #[inline]
    pub fn cap(&self) -> T {
        stay_in_place(self.w0, self.k, self.cost)
    }

    /// `h / (k f)`.
    #[inline]
    fn rho(&self) -> T {
        self.h / (self.k * self.speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneSided<T> {
    Root(T),
    NoSolution,
}

impl<T: Real> OneSided<T> {
    /// The root, or `+inf` so the caller's comparison rejects it.
    pub fn value_or_inf(self) -> T {
        match self {
            OneSided::Root(v) => v,
            OneSided::NoSolution => T::infinity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoSided<T> {
    Root(T),
    Fallback,
}

/// Solves `((V - W1)/h)^2 = ((c - V)/(k f))^2` on `[W1, c)`.
///
/// Both sides are non-negative on the admissible interval, so the squared
/// relation reduces to its linear branch `(V - W1)/h = (c - V)/(k f)`.
pub fn quadratic_one_sided<T: Real>(inp: &QuadraticInputs<T>) -> OneSided<T> {
    debug_assert!(inp.w1.is_finite() && inp.w0.is_finite());
    debug_assert!(inp.h > T::zero() && inp.k > T::zero() && inp.speed > T::zero());
    let c = inp.cap();
    if !(inp.w1 < c) {
        return OneSided::NoSolution;
    }
    let kf = inp.k * inp.speed;
    let v = ((kf * inp.w1 + inp.h * c) / (kf + inp.h)).max(inp.w1);
    if c - v > T::zero() {
        OneSided::Root(v)
    } else {
        OneSided::NoSolution
    }
}

/// Solves `((V-W1)/h)^2 + ((V-W2)/h)^2 = ((c - V)/(k f))^2` on `[max(W1,W2), c)`.
///
/// Works in the shifted unknown `s = V - max(W1, W2)`, which gives
/// `(2 - rho^2) s^2 + 2 (d + rho^2 D) s + (d^2 - rho^2 D^2) = 0` with
/// `d = |W1 - W2|`, `D = c - max(W1, W2)` and `rho = h / (k f)`.
pub fn quadratic_two_sided<T: Real>(inp: &QuadraticInputs<T>) -> TwoSided<T> {
    let w2 = inp.w2.expect("two-sided solve needs W2");
    debug_assert!(inp.w1.is_finite() && w2.is_finite() && inp.w0.is_finite());
    let c = inp.cap();
    let m = inp.w1.max(w2);
    let span = c - m;
    if !(span > T::zero()) {
        return TwoSided::Fallback;
    }
    let d = (inp.w1 - w2).abs();
    let rho2 = inp.rho() * inp.rho();
    let two = T::lit(2.0);
    let a = two - rho2;
    let b = two * (d + rho2 * span);
    let cc = d * d - rho2 * span * span;
    if cc > T::zero() {
        return TwoSided::Fallback;
    }
    let s = match smallest_nonnegative_root(a, b, cc) {
        Some(s) => s,
        None => return TwoSided::Fallback,
    };
    let v = m + s;
    if s < span && c - v > T::zero() {
        TwoSided::Root(v)
    } else {
        TwoSided::Fallback
    }
}

/// Smallest root `>= 0` of `a s^2 + b s + c`, assuming `b > 0`, `c <= 0`.
fn smallest_nonnegative_root<T: Real>(a: T, b: T, c: T) -> Option<T> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if a.abs() <= T::epsilon() * scale {
        return (b > T::zero()).then(|| (-c / b).max(T::zero()));
    }
    let mut disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        if disc >= -T::lit(1e-12) * scale * scale {
            disc = T::zero();
        } else {
            return None;
        }
    }
    // q = -(b + sign(b) sqrt(disc)) / 2, roots q / a and c / q.
    let q = -(b + disc.sqrt()) / T::lit(2.0);
    let r1 = q / a;
    let r2 = if q != T::zero() { c / q } else { r1 };
    [r1, r2]
        .into_iter()
        .filter(|r| r.is_finite() && *r >= T::zero())
        .reduce(T::min)
}

/// Trial value for a node: the two-sided root when a transverse neighbour
/// is accepted and the root is admissible, otherwise the one-sided solve from
/// the smaller of `W1`, `W2`, and `+inf` when that has no solution either.
///
/// When the two-sided root is inadmissible the larger neighbour lies above
/// the solution, so only the smaller one is upwind. Taking it (rather than
/// always `W1`) keeps this function monotone in each input; inside the
/// marching loop both choices give the same slice, because the smaller
/// neighbour was accepted first and already offered its one-sided value.
#[inline]
pub fn trial_value<T: Real>(inp: &QuadraticInputs<T>) -> T {
    match inp.w2 {
        Some(w2) => match quadratic_two_sided(inp) {
            TwoSided::Root(v) => v,
            TwoSided::Fallback => quadratic_one_sided(&QuadraticInputs {
                w1: inp.w1.min(w2),
                w2: None,
                ..*inp
            })
            .value_or_inf(),
        },
        None => quadratic_one_sided(inp).value_or_inf(),
    }
}

/// Value the node takes from these inputs: the trial value capped by staying
/// in place. Unlike [`trial_value`] this is finite whenever the inputs are.
#[inline]
pub fn local_value<T: Real>(inp: &QuadraticInputs<T>) -> T {
    trial_value(inp).min(inp.cap())
}

/// Residual of the implicit discretization at `node`:
/// `(V^{n+1} - V^n)/k + K - f |grad^+ V^n|`.
pub fn implicit_residual<T: Real>(
    v_now: &Field<T>,
    v_next: &Field<T>,
    node: usize,
    speed: T,
    cost: T,
    k: T,
) -> T {
    let g = UpwindGradientSample::of(v_now, node);
    (v_next[node] - v_now[node]) / k + cost - speed * g.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;
    use crate::oracle::{bisect_local, LocalEquation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inputs(
        w0: f64,
        w1: f64,
        w2: Option<f64>,
        h: f64,
        k: f64,
        f: f64,
        cost: f64,
    ) -> QuadraticInputs<f64> {
        QuadraticInputs {
            w0,
            w1,
            w2,
            h,
            k,
            speed: f,
            cost,
        }
    }

    #[test]
    fn explicit_update_examples() {
        let g = GridSpec::<f64>::new(2, 3, (0.0, 2.0)).unwrap();
        let flat = Field::filled(g, 4.0);
        let c = g.index(1, 1);
        assert!((explicit_node_update(&flat, c, 1.0, 1.0, 0.1) - 4.1).abs() < 1e-15);

        // h = 1: centre 2, left 1, right 3, up = down = 2.
        let mut v = Field::filled(g, 2.0);
        v[g.index(0, 1)] = 1.0;
        v[g.index(2, 1)] = 3.0;
        let s = UpwindGradientSample::of(&v, c);
        assert_eq!((s.gx, s.gy), (1.0, 0.0));
        assert_eq!(explicit_node_update(&v, c, 1.0, 1.0, 0.5), 2.0);

        // Corner: only the on-grid neighbours count.
        let mut v = Field::filled(g, 5.0);
        v[g.index(1, 0)] = 4.0;
        let s = UpwindGradientSample::of(&v, g.index(0, 0));
        assert_eq!((s.gx, s.gy), (1.0, 0.0));
    }

    #[test]
    fn stay_in_place_examples() {
        assert!((stay_in_place(1.0f64, 0.1, 1.0) - 1.1).abs() < 1e-15);
        assert_eq!(stay_in_place(0.0, 0.3, 2.0), 0.6);
    }

    #[test]
    fn one_sided_examples() {
        assert_eq!(
            quadratic_one_sided(&inputs(1.0, 0.0, None, 1.0, 1.0, 1.0, 0.0)),
            OneSided::Root(0.5)
        );
        // W1 = W0 + kK: the only root has zero denominator.
        assert_eq!(
            quadratic_one_sided(&inputs(1.0, 1.5, None, 1.0, 0.5, 1.0, 1.0)),
            OneSided::NoSolution
        );
        assert_eq!(
            quadratic_one_sided(&inputs(1.0, 2.0, None, 1.0, 0.5, 1.0, 1.0)),
            OneSided::NoSolution
        );

        let inp = inputs(3.0, 3.0, None, 0.1, 0.5, 2.0, 1.0);
        let v = quadratic_one_sided(&inp).value_or_inf();
        let oracle = bisect_local(LocalEquation::OneSided, &inp, 1e-14).unwrap();
        assert!((v - oracle).abs() <= 1e-12);
        // (V - 3)/0.1 = 3.5 - V
        assert!((v - 3.35 / 1.1).abs() < 1e-14);
    }

    #[test]
    fn two_sided_examples() {
        let v = quadratic_two_sided(&inputs(1.0, 0.0, Some(0.0), 1.0, 1.0, 1.0, 0.0));
        match v {
            TwoSided::Root(v) => assert!((v - (2f64.sqrt() - 1.0)).abs() < 1e-15),
            TwoSided::Fallback => panic!("expected a root"),
        }
        assert_eq!(
            quadratic_two_sided(&inputs(1.0, 0.0, Some(0.9), 1.0, 1.0, 1.0, 0.0)),
            TwoSided::Fallback
        );

        // Symmetric W1 = W2 = w is the one-sided problem with h / sqrt(2).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let w = rng.gen_range(-1.0..1.0);
            let (h, k, f, cost) = (
                rng.gen_range(0.01..0.5),
                rng.gen_range(0.01..2.0),
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.5..2.0),
            );
            let w0 = w + rng.gen_range(-0.5..1.0);
            let two = quadratic_two_sided(&inputs(w0, w, Some(w), h, k, f, cost));
            let one = quadratic_one_sided(&inputs(w0, w, None, h / 2f64.sqrt(), k, f, cost));
            match (two, one) {
                (TwoSided::Root(a), OneSided::Root(b)) => {
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()))
                }
                (TwoSided::Fallback, OneSided::NoSolution) => {}
                other => panic!("mismatch {other:?}"),
            }
        }
    }

    fn random_inputs(rng: &mut ChaCha8Rng) -> QuadraticInputs<f64> {
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

    #[test]
    fn local_solves_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eps = 1e-3;
        for _ in 0..10_000 {
            let base = random_inputs(&mut rng);
            let v = local_value(&base);
            for which in 0..3 {
                let mut up = base;
                match which {
                    0 => up.w0 += eps,
                    1 => up.w1 += eps,
                    _ => up.w2 = up.w2.map(|w| w + eps),
                }
                let vu = local_value(&up);
                assert!(
                    vu >= v - 1e-12,
                    "raising input {which} lowered {v} -> {vu} for {base:?}"
                );
            }
        }
    }

    #[test]
    fn roots_respect_causality() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10_000 {
            let inp = random_inputs(&mut rng);
            if let OneSided::Root(v) = quadratic_one_sided(&inp) {
                assert!(v >= inp.w1 && v < inp.cap());
            }
            if let TwoSided::Root(v) = quadratic_two_sided(&inp) {
                assert!(v >= inp.w1.max(inp.w2.unwrap()) && v < inp.cap());
            }
        }
    }

    /// A strictly admissible two-sided root solves the implicit equation at the node.
    #[test]
    fn two_sided_root_zeroes_the_implicit_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let grid = GridSpec::<f64>::unit(2, 2).unwrap();
        let centre = grid.index(1, 1);
        let mut checked = 0;
        for _ in 0..5000 {
            let mut inp = random_inputs(&mut rng);
            inp.h = grid.spacing();
            let TwoSided::Root(v) = quadratic_two_sided(&inp) else {
                continue;
            };
            let w2 = inp.w2.unwrap();
            if !(v > inp.w1.max(w2) && v < inp.cap()) {
                continue;
            }
            let mut now = Field::filled(grid, 1e6);
            now[centre] = v;
            now[grid.index(0, 1)] = inp.w1;
            now[grid.index(1, 0)] = w2;
            let next = Field::filled(grid, inp.w0);
            let r = implicit_residual(&now, &next, centre, inp.speed, inp.cost, inp.k);
            assert!(r.abs() <= 1e-10 * (1.0 / inp.k).max(1.0), "residual {r}");
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn closed_forms_agree_with_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10_000 {
            let inp = random_inputs(&mut rng);
            let one = quadratic_one_sided(&inp);
            let one_b = bisect_local(LocalEquation::OneSided, &inp, 1e-13);
            match (one, one_b) {
                (OneSided::Root(a), Some(b)) => assert!((a - b).abs() <= 1e-9),
                (OneSided::NoSolution, None) => {}
                other => panic!("one-sided mismatch {other:?} for {inp:?}"),
            }
            let two = quadratic_two_sided(&inp);
            let two_b = bisect_local(LocalEquation::TwoSided, &inp, 1e-13);
            match (two, two_b) {
                (TwoSided::Root(a), Some(b)) => assert!((a - b).abs() <= 1e-9),
                (TwoSided::Fallback, None) => {}
                other => panic!("two-sided mismatch {other:?} for {inp:?}"),
            }
        }
    }
}
