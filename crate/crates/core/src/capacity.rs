//! One-shot quantum capacity lower bound through the conditional Renyi-2
//! entropy of the complementary Choi state.
//!
//! The bound for `n` uses at error `epsilon` is
//! `H2(B|F) - (g(sqrt(eps/2) - d) + 4 log2(1/d) + 2) / n` with `d = delta*`
//! minimizing the correction, and
//! `H2(B|F) = max_sigma -log2 Tr[((I (x) sigma)^(-1/4) rho (I (x) sigma)^(-1/4))^2]`.

use num_complex::Complex;

use crate::channel::{choi_bf, stinespring_isometry, BipartiteState, ProbeState};
use crate::optimize::{golden_section, grid_multistart, NelderMead};
use crate::qlin::{bloch_matrix, kron, ComplexMatrix, DEFAULT_FLOOR};
use crate::unitary::UnitaryParams;
use crate::{Error, Real, Result};

/// Default cap on the Bloch radius of `sigma_F`.
pub const DEFAULT_RADIUS_CAP: f64 = 1.0 - 1e-7;

/// Conditioning state `sigma_F = (I + p . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningState<T> {
    bloch: [T; 3],
}

impl<T: Real> ConditioningState<T> {
    pub fn new(bloch: [T; 3]) -> Result<Self> {
        let norm = norm3(bloch);
        if !(norm <= T::one()) {
            return Err(Error::OutOfRange {
                name: "sigma bloch radius",
                value: norm.to_f64_lossy(),
                range: "[0, 1]",
            });
        }
        Ok(Self { bloch })
    }

    /// Maximally mixed `I/2`.
    pub fn maximally_mixed() -> Self {
        Self { bloch: [T::zero(); 3] }
    }

    /// Radial projection of an arbitrary vector onto the ball of radius `cap`.
    pub fn projected(x: [T; 3], cap: T) -> Self {
        let norm = norm3(x);
        if norm > cap {
            let s = cap / norm;
            Self { bloch: x.map(|c| c * s) }
        } else {
            Self { bloch: x }
        }
    }

    pub fn bloch(&self) -> [T; 3] {
        self.bloch
    }

    pub fn matrix(&self) -> ComplexMatrix<T> {
        bloch_matrix(T::one(), self.bloch)
    }

    /// Ascending eigenvalues `(1 -+ |p|) / 2`.
    pub fn eigenvalues(&self) -> [T; 2] {
        let h = T::lit(0.5);
        let n = norm3(self.bloch);
        [h * (T::one() - n), h * (T::one() + n)]
    }

    /// `sigma^p` with eigenvalues floored, from the closed form
    /// `a I + b (p_hat . sigma)`.
    pub fn power(&self, p: T, floor: T) -> ComplexMatrix<T> {
        let [lo, hi] = self.eigenvalues().map(|l| l.max(floor).powf(p));
        let h = T::lit(0.5);
        let n = norm3(self.bloch);
        let a = h * (hi + lo);
        if n == T::zero() {
            return bloch_matrix(T::lit(2.0) * a, [T::zero(); 3]);
        }
        let b = (hi - lo) / n;
        bloch_matrix(T::lit(2.0) * a, self.bloch.map(|c| b * c))
    }
}

fn norm3<T: Real>(v: [T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `g(x) = -log2(1 - sqrt(1 - x^2))`, evaluated without cancellation.
pub fn g_eps<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero() && x <= T::one()) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x.to_f64_lossy(),
            range: "(0, 1]",
        });
    }
    let s = (T::one() - x * x).max(T::zero()).sqrt();
    Ok(-(x * x / (T::one() + s)).log2())
}

fn g_prime<T: Real>(x: T) -> T {
    let s = (T::one() - x * x).sqrt();
    -(T::lit(2.0) / x + x / (s * (T::one() + s))) / T::LN_2()
}

/// Sandwiched Renyi-2 divergence `D2(rho || I (x) sigma)` in bits.
pub fn renyi2_divergence<T: Real>(rho: &BipartiteState<T>, sigma: &ConditioningState<T>, floor: T) -> Result<T> {
    if !(floor > T::zero()) {
        return Err(Error::OutOfRange {
            name: "floor",
            value: floor.to_f64_lossy(),
            range: "(0, inf)",
        });
    }
    let s = kron(&ComplexMatrix::identity(2), &sigma.power(T::lit(-0.25), floor));
    let x = (s * rho.rho_bf) * s;
    Ok(x.trace_product(&x).re.log2())
}

/// Optimizer settings for both the `sigma_F` search and the probe search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub floor: T,
    pub radius_cap: T,
    /// Points per axis of the cubic seed grid for `sigma_F`.
    pub sigma_grid: usize,
    pub sigma_restarts: usize,
    pub sigma_nm: NelderMead<T>,
    /// Points per axis of the `(phi1, phi2)` seed grid.
    pub probe_grid: usize,
    pub probe_restarts: usize,
    pub probe_nm: NelderMead<T>,
    /// Additional probe seeds, e.g. drawn from a seeded generator.
    pub extra_probe_starts: Vec<[T; 2]>,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            floor: T::lit(DEFAULT_FLOOR),
            radius_cap: T::lit(DEFAULT_RADIUS_CAP),
            sigma_grid: 9,
            sigma_restarts: 3,
            sigma_nm: NelderMead::default(),
            probe_grid: 13,
            probe_restarts: 3,
            probe_nm: NelderMead {
                initial_step: T::lit(0.2),
                diameter_tol: T::lit(1e-6),
                max_iterations: 400,
            },
            extra_probe_starts: Vec::new(),
        }
    }
}

/// Iteration metadata of an optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OptimizerTrace {
    pub evaluations: usize,
    pub converged: bool,
}

/// Maximizer of `-D2` over `sigma_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Solution<T> {
    pub value: T,
    pub sigma: ConditioningState<T>,
    /// Best value on the seed grid alone.
    pub grid_value: T,
    pub trace: OptimizerTrace,
}

/// Seed points of a `k x k x k` grid on `[-1, 1]^3` inside the unit ball.
pub fn bloch_grid<T: Real>(k: usize) -> Vec<Vec<T>> {
    let step = |i: usize| {
        if k == 1 {
            T::zero()
        } else {
            -T::one() + T::lit(2.0) * T::count(i) / T::count(k - 1)
        }
    };
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                let v = [step(i), step(j), step(l)];
                if norm3(v) <= T::one() + T::epsilon() {
                    out.push(v.to_vec());
                }
            }
        }
    }
    out
}

/// `H2(B|F) = max_sigma -D2(rho || I (x) sigma)`: grid seeds then simplex
/// refinement from the best few.
pub fn h2_conditional<T: Real>(rho: &BipartiteState<T>, cfg: &OptimizerConfig<T>) -> Result<H2Solution<T>> {
    if !(cfg.floor > T::zero()) {
        return Err(Error::OutOfRange {
            name: "floor",
            value: cfg.floor.to_f64_lossy(),
            range: "(0, inf)",
        });
    }
    let cap = cfg.radius_cap;
    let objective = |x: &[T]| {
        let sigma = ConditioningState::projected([x[0], x[1], x[2]], cap);
        renyi2_divergence(rho, &sigma, cfg.floor).unwrap_or(T::nan())
    };
    let seeds = bloch_grid(cfg.sigma_grid.max(1));
    let run = grid_multistart(objective, &seeds, cfg.sigma_restarts, &cfg.sigma_nm);
    let x = &run.best.x;
    let sigma = ConditioningState::projected([x[0], x[1], x[2]], cap);
    let value = -run.best.value;
    debug_assert!(value <= T::one() + T::lit(1e-9), "H2 above dimension bound: {value}");
    Ok(H2Solution {
        value,
        sigma,
        grid_value: -run.grid_value,
        trace: OptimizerTrace {
            evaluations: run.total_evaluations,
            converged: run.all_converged,
        },
    })
}

/// Result of the probe-optimized conditional entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeH2<T> {
    pub h2: T,
    pub probe: ProbeState<T>,
    pub sigma: ConditioningState<T>,
    pub trace: OptimizerTrace,
}

/// Seeds of a `k x k` grid: `phi1` over `[0, pi]`, `phi2` over `[0, 2 pi]`,
/// followed by the extra starts.
pub fn probe_grid<T: Real>(k: usize, extra: &[[T; 2]]) -> Vec<Vec<T>> {
    let k = k.max(2);
    let mut out = Vec::with_capacity(k * k + extra.len());
    for i in 0..k {
        for j in 0..k {
            let frac = |n: usize| T::count(n) / T::count(k - 1);
            out.push(vec![T::PI() * frac(i), T::TAU() * frac(j)]);
        }
    }
    out.extend(extra.iter().map(|e| e.to_vec()));
    out
}

/// Maximizes `H2(B|F)` over the probe `(phi1, phi2)`.
pub fn best_probe_h2<T: Real>(p: &UnitaryParams<T>, cfg: &OptimizerConfig<T>) -> Result<ProbeH2<T>> {
    p.validate()?;
    let solve = |x: &[T]| -> Result<(ProbeState<T>, H2Solution<T>)> {
        let probe = ProbeState::wrapped(x[0], x[1]);
        let iso = stinespring_isometry(p, &probe)?;
        Ok((probe, h2_conditional(&choi_bf(&iso), cfg)?))
    };
    let inner_evals = std::cell::Cell::new(0usize);
    let inner_ok = std::cell::Cell::new(true);
    let objective = |x: &[T]| match solve(x) {
        Ok((_, s)) => {
            inner_evals.set(inner_evals.get() + s.trace.evaluations);
            inner_ok.set(inner_ok.get() && s.trace.converged);
            -s.value
        }
        Err(_) => T::nan(),
    };
    let seeds = probe_grid(cfg.probe_grid, &cfg.extra_probe_starts);
    let run = grid_multistart(objective, &seeds, cfg.probe_restarts, &cfg.probe_nm);
    let (probe, sol) = solve(&run.best.x)?;
    Ok(ProbeH2 {
        h2: sol.value,
        probe,
        sigma: sol.sigma,
        trace: OptimizerTrace {
            evaluations: inner_evals.get() + sol.trace.evaluations,
            converged: run.all_converged && inner_ok.get(),
        },
    })
}

/// `epsilon`, `n` and the slack `delta` of the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams<T> {
    pub epsilon: T,
    pub n: u64,
    pub delta: T,
}

impl<T: Real> BoundParams<T> {
    pub fn new(epsilon: T, n: u64, delta: T) -> Result<Self> {
        check_epsilon(epsilon)?;
        if n == 0 {
            return Err(Error::OutOfRange {
                name: "n",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        let top = (epsilon * T::lit(0.5)).sqrt();
        if !(delta > T::zero() && delta < top) {
            return Err(Error::OutOfRange {
                name: "delta",
                value: delta.to_f64_lossy(),
                range: "(0, sqrt(epsilon/2))",
            });
        }
        Ok(Self { epsilon, n, delta })
    }

    /// Parameters at the optimal slack `delta*`.
    pub fn optimal(epsilon: T, n: u64) -> Result<Self> {
        Self::new(epsilon, n, delta_star(epsilon)?)
    }

    /// `g(sqrt(eps/2) - delta) + 4 log2(1/delta) + 2`.
    pub fn correction(&self) -> Result<T> {
        let u = (self.epsilon * T::lit(0.5)).sqrt() - self.delta;
        Ok(g_eps(u)? - T::lit(4.0) * self.delta.log2() + T::lit(2.0))
    }
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon.to_f64_lossy(),
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// `g(sqrt(eps/2) - delta) - 4 log2(delta)`; `+inf` outside the open domain.
pub fn delta_objective<T: Real>(epsilon: T, delta: T) -> T {
    let u = (epsilon * T::lit(0.5)).sqrt() - delta;
    if !(delta > T::zero() && u > T::zero()) {
        return T::infinity();
    }
    match g_eps(u) {
        Ok(g) => g - T::lit(4.0) * delta.log2(),
        Err(_) => T::infinity(),
    }
}

/// Derivative of [`delta_objective`] in `delta`.
pub fn delta_objective_derivative<T: Real>(epsilon: T, delta: T) -> T {
    let u = (epsilon * T::lit(0.5)).sqrt() - delta;
    -g_prime(u) - T::lit(4.0) / (delta * T::LN_2())
}

/// Slack minimizing the correction term: golden section to a bracket of
/// `1e-12`, then bisection on the analytic derivative inside the final
/// bracket to remove the flat-minimum rounding.
pub fn delta_star<T: Real>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    let top = (epsilon * T::lit(0.5)).sqrt();
    let tiny = top * T::lit(1e-12);
    let width = T::lit(1e-12).max(T::epsilon() * top * T::lit(8.0));
    let mut d = golden_section(|d| delta_objective(epsilon, d), tiny, top - tiny, width);
    let slope = |d| delta_objective_derivative(epsilon, d);
    let pad = width.max(top * T::lit(1e-6));
    let (mut lo, mut hi) = ((d - pad).max(tiny), (d + pad).min(top - tiny));
    if slope(lo) < T::zero() && slope(hi) > T::zero() {
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        d = T::lit(0.5) * (lo + hi);
    }
    Ok(d)
}

/// Closed-form `delta*` from the cubic stationarity condition, evaluated with
/// principal complex roots; returns the complex value, whose imaginary part
/// vanishes up to rounding.
pub fn delta_star_closed_form<T: Real>(epsilon: T) -> Result<Complex<T>> {
    check_epsilon(epsilon)?;
    let c = |x: f64| Complex::new(T::lit(x), T::zero());
    let e = Complex::new(epsilon, T::zero());
    let third = T::lit(1.0 / 3.0);
    let radicand = (c(2.0) * e * e * e).sqrt()
        + (c(1728.0) * e * e + c(715392.0) * e - c(5971968.0)).sqrt()
        + c(648.0) * (c(2.0) * e).sqrt();
    let k = radicand.powf(third);
    let i_sqrt3 = Complex::new(T::zero(), T::lit(3.0).sqrt());
    let cbrt2 = c(2.0f64.cbrt());
    let first = c(13.0) * e.sqrt() / (c(15.0) * c(2.0).sqrt());
    let second = (c(1.0) + i_sqrt3) * k / (c(30.0) * cbrt2 * cbrt2);
    let third_term = (c(1.0) - i_sqrt3) * (e + c(144.0)) / (c(30.0) * cbrt2 * k);
    Ok(first - second - third_term)
}

/// One-shot bound record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult<T> {
    pub h2: T,
    pub epsilon: T,
    pub n: u64,
    pub delta_star: T,
    pub correction: T,
    /// `h2 - correction / n`.
    pub raw_bound: T,
    /// `max(0, raw_bound)`.
    pub clamped_bound: T,
    pub sigma_opt: Option<ConditioningState<T>>,
    pub probe_opt: Option<ProbeState<T>>,
    pub optimizer_trace: OptimizerTrace,
}

/// Lower bound on the one-shot capacity from a given `H2(B|F)`.
pub fn one_shot_lower_bound<T: Real>(h2: T, epsilon: T, n: u64) -> Result<CapacityResult<T>> {
    if !h2.is_finite() {
        return Err(Error::OutOfRange {
            name: "h2",
            value: h2.to_f64_lossy(),
            range: "[-1, 1]",
        });
    }
    let bp = BoundParams::optimal(epsilon, n)?;
    let correction = bp.correction()?;
    let n_t = T::from_u64(n).ok_or(Error::OutOfRange {
        name: "n",
        value: n as f64,
        range: "representable",
    })?;
    let raw_bound = h2 - correction / n_t;
    Ok(CapacityResult {
        h2,
        epsilon,
        n,
        delta_star: bp.delta,
        correction,
        raw_bound,
        clamped_bound: raw_bound.max(T::zero()),
        sigma_opt: None,
        probe_opt: None,
        optimizer_trace: OptimizerTrace::default(),
    })
}

/// Probe-optimized `H2(B|F)` followed by the one-shot bound.
pub fn capacity_bound<T: Real>(
    p: &UnitaryParams<T>,
    epsilon: T,
    n: u64,
    cfg: &OptimizerConfig<T>,
) -> Result<CapacityResult<T>> {
    let best = best_probe_h2(p, cfg)?;
    let mut out = one_shot_lower_bound(best.h2, epsilon, n)?;
    out.sigma_opt = Some(best.sigma);
    out.probe_opt = Some(best.probe);
    out.optimizer_trace = best.trace;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::{herm_power, kron};
    use crate::unitary::Vertex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn quick() -> OptimizerConfig<f64> {
        OptimizerConfig {
            probe_grid: 5,
            probe_restarts: 1,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_eps(1.0).unwrap(), 0.0);
        assert!((g_eps(0.6).unwrap() - 5f64.log2()).abs() < 1e-12);
        assert!((g_eps(0.1f64).unwrap() - 7.640_235_851_269_44).abs() < 1e-10);
        assert!(g_eps(0.0).is_err());
        assert!(g_eps(1.5).is_err());
        let xs: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        assert!(xs.windows(2).all(|w| g_eps(w[0]).unwrap() > g_eps(w[1]).unwrap()));
        // Small arguments stay finite.
        assert!(g_eps(1e-12f64).unwrap().is_finite());
    }

    #[test]
    fn g_derivative_matches_finite_difference() {
        for x in [0.05f64, 0.2, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (g_eps(x + h).unwrap() - g_eps(x - h).unwrap()) / (2.0 * h);
            assert!((fd - g_prime(x)).abs() < 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn sigma_power_matches_spectral_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = ConditioningState::projected(v, 1.0 - 1e-7);
            for p in [-0.25f64, -0.5, 0.5] {
                let a = s.power(p, 1e-9);
                let b = herm_power(&s.matrix(), p, 1e-9).unwrap();
                // The small eigenvalue near the cap is ~5e-8, so the spectral
                // route carries ~1e-9 relative error after inversion.
                let err = a.max_abs_diff(&b) / b.max_abs().max(1.0);
                assert!(err < 1e-8, "p={p} |v|={} err={err:e}", norm3(s.bloch()));
            }
        }
        let mixed = ConditioningState::<f64>::maximally_mixed();
        assert!(mixed.power(-0.25, 1e-9).max_abs_diff(&M::identity(2).scale(0.5f64.powf(-0.25))) < 1e-15);
        assert!(ConditioningState::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn divergence_examples() {
        let rho = BipartiteState::new(M::identity(4).scale(0.25)).unwrap();
        let sigma = ConditioningState::maximally_mixed();
        assert!((renyi2_divergence(&rho, &sigma, 1e-9).unwrap() + 1.0).abs() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex::new(0.0, 0.0);
        let phi = M::projector(&[Complex::new(s, 0.0), z, z, Complex::new(s, 0.0)]);
        let rho = BipartiteState::new(phi).unwrap();
        assert!((renyi2_divergence(&rho, &sigma, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!(renyi2_divergence(&rho, &sigma, 0.0).is_err());
    }

    #[test]
    fn swap_divergence_at_floored_pure_sigma() {
        let probe = ProbeState::new(0.7, 1.3).unwrap();
        let rho = choi_bf(&stinespring_isometry(&Vertex::S.params(), &probe).unwrap());
        let sigma = ConditioningState::new(probe.bloch()).unwrap();
        let floor = 1e-9;
        let v: f64 = -renyi2_divergence(&rho, &sigma, floor).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn h2_of_product_state_is_collision_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..5 {
            let rb = bloch_matrix(1.0, [0.3 * rng.gen::<f64>(), 0.2, -0.4 * rng.gen::<f64>()]);
            let sf = bloch_matrix(1.0, [0.1, -0.5 * rng.gen::<f64>(), 0.3]);
            let rho = BipartiteState::new(kron(&rb, &sf)).unwrap();
            let h = h2_conditional(&rho, &OptimizerConfig::default()).unwrap();
            let expect = -rb.trace_product(&rb).re.log2();
            assert!((h.value - expect).abs() < 1e-6, "{} vs {expect}", h.value);
            assert!(h.trace.converged);
        }
    }

    #[test]
    fn h2_vertex_examples() {
        let cfg = OptimizerConfig::default();
        let probe = ProbeState::new(0.0, 0.0).unwrap();
        let at = |v: Vertex| -> H2Solution<f64> { h2_conditional(&choi_bf(&stinespring_isometry(&v.params(), &probe).unwrap()), &cfg).unwrap() };
        assert!(at(Vertex::I).value <= 1e-9);
        assert!(at(Vertex::C).value <= 1e-9);
        assert!((at(Vertex::S).value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn refined_h2_never_below_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = OptimizerConfig::default();
        for _ in 0..5 {
            let mut a = [0.0; 3].map(|_: f64| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2));
            a.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let p = UnitaryParams::from_array(a).unwrap();
            let probe = ProbeState::new(rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap();
            let rho = choi_bf(&stinespring_isometry(&p, &probe).unwrap());
            let h = h2_conditional(&rho, &cfg).unwrap();
            assert!(h.value >= h.grid_value);
            assert!(h.value <= 1.0 && h.value >= -1.0);
        }
    }

    #[test]
    fn best_probe_at_swap_and_identity() {
        let s = best_probe_h2(&Vertex::S.params(), &quick()).unwrap();
        assert!((s.h2 - 1.0).abs() < 1e-3);
        let i = best_probe_h2(&Vertex::I.params(), &quick()).unwrap();
        assert!(i.h2 <= 1e-6);
        assert!(best_probe_h2(&UnitaryParams { alpha_x: 0.1, alpha_y: 0.2, alpha_z: 0.0 }, &quick()).is_err());
    }

    #[test]
    fn delta_star_is_stationary_and_interior() {
        for eps in [0.01, 0.05, 0.1, 0.3] {
            let d = delta_star(eps).unwrap();
            let top = (eps / 2.0f64).sqrt();
            assert!(d > 0.0 && d < top);
            assert!(delta_objective_derivative(eps, d).abs() < 1e-6);
            let h = 1e-7;
            let fd = (delta_objective(eps, d + h) - delta_objective(eps, d - h)) / (2.0 * h);
            assert!(fd.abs() < 1e-5, "eps={eps} fd={fd}");
        }
        assert!(delta_star(0.0).is_err());
        assert!(delta_star(1.0).is_err());
    }

    #[test]
    fn delta_star_matches_closed_form() {
        for eps in [0.01f64, 0.05, 0.1] {
            let num = delta_star(eps).unwrap();
            let cf = delta_star_closed_form(eps).unwrap();
            assert!(cf.im.abs() < 1e-9);
            assert!((num - cf.re).abs() < 1e-6, "eps={eps}: {num} vs {}", cf.re);
        }
    }

    #[test]
    fn delta_objective_has_single_minimum() {
        for eps in [0.01, 0.05, 0.1, 0.3] {
            let top = (eps / 2.0f64).sqrt();
            let vals: Vec<f64> = (1..=1000).map(|i| delta_objective(eps, top * i as f64 / 1001.0)).collect();
            let minima = (1..vals.len() - 1).filter(|&i| vals[i] < vals[i - 1] && vals[i] < vals[i + 1]).count();
            assert_eq!(minima, 1, "eps={eps}");
        }
    }

    #[test]
    fn bound_examples() {
        let b = one_shot_lower_bound(0.0, 0.05, 100).unwrap();
        assert_eq!(b.clamped_bound, 0.0);
        assert!(b.raw_bound < 0.0);
        let ns = [10u64, 100, 1000, 10_000, 1_000_000];
        let raws: Vec<f64> = ns.iter().map(|&n| one_shot_lower_bound(1.0, 0.05, n).unwrap().raw_bound).collect();
        assert!(raws.windows(2).all(|w| w[0] < w[1]));
        assert!((raws[4] - 1.0).abs() < 1e-3);
        let b = one_shot_lower_bound(1.0f64, 0.05, 1000).unwrap();
        assert_eq!(b.clamped_bound, b.raw_bound.max(0.0));
        assert!((b.raw_bound - (1.0 - b.correction / 1000.0)).abs() < 1e-15);
        let corr: Vec<f64> = [0.01, 0.05, 0.1, 0.3]
            .iter()
            .map(|&e| one_shot_lower_bound(1.0, e, 10).unwrap().correction)
            .collect();
        assert!(corr.windows(2).all(|w| w[0] > w[1]));
        assert!(one_shot_lower_bound(1.0, 0.05, 0).is_err());
        assert!(BoundParams::new(0.05, 10, 0.2).is_err());
    }
}
