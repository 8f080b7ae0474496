//! Quantum Fisher information of the channel output with respect to the
//! environment parameters `(r, theta1, theta2)`, its prior average, and the
//! probe-maximized figure of merit with divergence classification.

use crate::channel::{env_bloch_derivatives, stinespring_isometry, ChannelIsometry, EnvState, ProbeState};
use crate::optimize::{grid_multistart, NelderMead};
use crate::qlin::{eigh, ComplexMatrix};
use crate::quadrature::{composite, graded_toward_end, Neumaier, Rule};
use crate::unitary::UnitaryParams;
use crate::{capacity, Error, Real, Result};

/// Below this `det(rho)` the pure-state formula is used.
pub const PURITY_TOL: f64 = 1e-10;

/// Symmetric 3x3 QFI matrix indexed by `(r, theta1, theta2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiMatrix<T> {
    pub entries: [[T; 3]; 3],
}

impl<T: Real> QfiMatrix<T> {
    pub fn trace(&self) -> T {
        self.entries[0][0] + self.entries[1][1] + self.entries[2][2]
    }

    pub fn diagonal(&self) -> [T; 3] {
        [self.entries[0][0], self.entries[1][1], self.entries[2][2]]
    }

    pub fn asymmetry(&self) -> T {
        let e = &self.entries;
        (e[0][1] - e[1][0]).abs().max((e[0][2] - e[2][0]).abs()).max((e[1][2] - e[2][1]).abs())
    }

    pub fn min_eigenvalue(&self) -> T {
        let rows: Vec<T> = self.entries.iter().flatten().copied().collect();
        let m = ComplexMatrix::from_real_rows(3, 3, &rows).expect("3x3").hermitian_part();
        eigh(&m).map(|e| e.values[0]).unwrap_or(T::nan())
    }
}

/// Closed 2x2 determinant, real part.
fn det2<T: Real>(m: &ComplexMatrix<T>) -> T {
    (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re
}

/// QFI of a qubit family from the state and its three partial derivatives.
pub fn qfi_matrix<T: Real>(rho: &ComplexMatrix<T>, derivs: &[ComplexMatrix<T>; 3], purity_tol: T) -> QfiMatrix<T> {
    let det = det2(rho);
    let mut entries = [[T::zero(); 3]; 3];
    let pure = det < purity_tol;
    let rd: Vec<ComplexMatrix<T>> = derivs.iter().map(|d| rho * d).collect();
    for a in 0..3 {
        for b in a..3 {
            let base = derivs[a].trace_product(&derivs[b]).re;
            let v = if pure {
                T::lit(2.0) * base
            } else {
                base + rd[a].trace_product(&rd[b]).re / det
            };
            entries[a][b] = v;
            entries[b][a] = v;
        }
    }
    QfiMatrix { entries }
}

/// Trace of [`qfi_matrix`] without the off-diagonal entries.
pub fn qfi_trace<T: Real>(rho: &ComplexMatrix<T>, derivs: &[ComplexMatrix<T>; 3], purity_tol: T) -> T {
    let det = det2(rho);
    let mut acc = T::zero();
    for d in derivs {
        let base = d.trace_product(d).re;
        acc = acc
            + if det < purity_tol {
                T::lit(2.0) * base
            } else {
                let rd = rho * d;
                base + rd.trace_product(&rd).re / det
            };
    }
    acc
}

/// The channel as an affine map of the environment Bloch vector:
/// `N(I/2 + v . sigma / 2) = offset + sum_k v_k basis_k`.
#[derive(Debug, Clone, Copy)]
pub struct AffineChannel<T> {
    pub offset: ComplexMatrix<T>,
    pub basis: [ComplexMatrix<T>; 3],
}

impl<T: Real> AffineChannel<T> {
    pub fn new(iso: &ChannelIsometry<T>) -> Self {
        let t = iso.transfer();
        let half = T::lit(0.5);
        let offset = t.apply(&ComplexMatrix::identity(2).scale(half));
        let basis = crate::qlin::paulis().map(|s| t.apply(&s.scale(half)));
        Self { offset, basis }
    }

    fn combine(&self, v: [T; 3]) -> ComplexMatrix<T> {
        self.basis[0].scale(v[0]) + self.basis[1].scale(v[1]) + self.basis[2].scale(v[2])
    }

    /// Output state and its derivatives in `(r, theta1, theta2)`.
    pub fn output_with_derivatives(&self, env: &EnvState<T>) -> (ComplexMatrix<T>, [ComplexMatrix<T>; 3]) {
        let two = T::lit(2.0);
        let (s1, c1) = env.theta1.sin_cos();
        let (s2, c2) = env.theta2.sin_cos();
        let n = [s1 * c2, s1 * s2, c1];
        let tr = two * env.r;
        let rho = self.offset + self.combine(n.map(|x| tr * x));
        let d_r = self.combine(n.map(|x| two * x));
        let d_t1 = self.combine([tr * c1 * c2, tr * c1 * s2, -tr * s1]);
        let d_t2 = self.combine([-tr * s1 * s2, tr * s1 * c2, T::zero()]);
        (rho, [d_r, d_t1, d_t2])
    }
}

/// Bloch-vector form of the channel, `b_out = offset + matrix . v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochChannel<T> {
    pub offset: [T; 3],
    pub matrix: [[T; 3]; 3],
}

fn bloch_of<T: Real>(m: &ComplexMatrix<T>) -> [T; 3] {
    let two = T::lit(2.0);
    [two * m[(0, 1)].re, -two * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

fn mat_vec<T: Real>(m: &[[T; 3]; 3], v: [T; 3]) -> [T; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl<T: Real> BlochChannel<T> {
    pub fn new(affine: &AffineChannel<T>) -> Self {
        let cols = affine.basis.map(|b| bloch_of(&b));
        Self {
            offset: bloch_of(&affine.offset),
            matrix: [0, 1, 2].map(|i| [cols[0][i], cols[1][i], cols[2][i]]),
        }
    }
}

/// QFI trace from an output Bloch vector `b` and its derivatives; the same
/// quantity as [`qfi_trace`] with `det = (1 - |b|^2) / 4`.
pub fn bloch_qfi_trace<T: Real>(b: [T; 3], derivs: &[[T; 3]; 3], purity_tol: T) -> T {
    let slack = T::one() - dot(b, b);
    let pure = T::lit(0.25) * slack < purity_tol;
    let mut acc = T::zero();
    for &d in derivs {
        acc = acc + dot(d, d);
        if !pure {
            let p = dot(b, d);
            acc = acc + p * p / slack;
        }
    }
    acc
}

/// Output state and derivatives through the channel transfer; the derivatives
/// are exact since the channel is affine in the environment state.
pub fn output_derivatives<T: Real>(
    iso: &ChannelIsometry<T>,
    env: &EnvState<T>,
) -> Result<(ComplexMatrix<T>, [ComplexMatrix<T>; 3])> {
    let rho = iso.channel_of(&env.matrix())?;
    let d = env_bloch_derivatives(env);
    Ok((rho, [iso.channel_of(&d[0])?, iso.channel_of(&d[1])?, iso.channel_of(&d[2])?]))
}

/// QFI of the channel output at environment `env`.
pub fn channel_qfi<T: Real>(p: &UnitaryParams<T>, probe: &ProbeState<T>, env: &EnvState<T>) -> Result<QfiMatrix<T>> {
    let iso = stinespring_isometry(p, probe)?;
    let (rho, d) = output_derivatives(&iso, env)?;
    Ok(qfi_matrix(&rho, &d, T::lit(PURITY_TOL)))
}

/// Prior density `sin(theta1/2) / (2 pi)` on `[0,1/2] x [0,pi] x [0,2pi]`.
pub fn prior_weight<T: Real>(env: &EnvState<T>) -> T {
    (T::lit(0.5) * env.theta1).sin() / T::TAU()
}

/// Prior over the environment parameters.
#[derive(Debug, Clone, Copy)]
pub struct PriorSpec<T> {
    pub weight: fn(&EnvState<T>) -> T,
}

impl<T: Real> Default for PriorSpec<T> {
    fn default() -> Self {
        Self { weight: prior_weight }
    }
}

impl<T: Real> PriorSpec<T> {
    /// Total prior mass over `[0, 1/2 - eta] x [0,pi] x [0,2pi]`.
    pub fn mass(&self, quad: &QuadratureSpec<T>, eta: T) -> Result<T> {
        let rules = quad.rules(eta)?;
        let mut acc = Neumaier::default();
        rules.for_each_node(|env, w| acc.add(w * (self.weight)(&env)));
        Ok(acc.total())
    }
}

/// Tensor-product cubature layout. The `r` axis uses panels shrinking
/// geometrically toward the cutoff `1/2 - eta`; the angles use equal panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub r_nodes_per_panel: usize,
    pub r_ratio: T,
    pub theta1_panels: usize,
    pub theta1_nodes_per_panel: usize,
    pub theta2_panels: usize,
    pub theta2_nodes_per_panel: usize,
    pub purity_tol: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            r_nodes_per_panel: 8,
            r_ratio: T::lit(0.25),
            theta1_panels: 2,
            theta1_nodes_per_panel: 16,
            theta2_panels: 4,
            theta2_nodes_per_panel: 8,
            purity_tol: T::lit(PURITY_TOL),
        }
    }
}

/// Concrete 1-D rules for one cutoff.
#[derive(Debug, Clone)]
pub struct CubatureRules<T> {
    pub r: Rule<T>,
    pub theta1: Rule<T>,
    pub theta2: Rule<T>,
}

impl<T: Real> CubatureRules<T> {
    pub fn node_count(&self) -> usize {
        self.r.len() * self.theta1.len() * self.theta2.len()
    }

    /// Visits every node in a fixed order with its product weight.
    pub fn for_each_node(&self, mut f: impl FnMut(EnvState<T>, T)) {
        for (&r, &wr) in self.r.nodes.iter().zip(&self.r.weights) {
            for (&t1, &w1) in self.theta1.nodes.iter().zip(&self.theta1.weights) {
                for (&t2, &w2) in self.theta2.nodes.iter().zip(&self.theta2.weights) {
                    f(
                        EnvState {
                            r,
                            theta1: t1,
                            theta2: t2,
                        },
                        wr * w1 * w2,
                    );
                }
            }
        }
    }
}

/// Smallest cutoff the `r` grading resolves when `eta = 0`.
const MIN_GRADING: f64 = 1e-9;

impl<T: Real> QuadratureSpec<T> {
    /// Every per-panel node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            r_nodes_per_panel: 2 * self.r_nodes_per_panel,
            theta1_nodes_per_panel: 2 * self.theta1_nodes_per_panel,
            theta2_nodes_per_panel: 2 * self.theta2_nodes_per_panel,
            ..*self
        }
    }

    pub fn rules(&self, eta: T) -> Result<CubatureRules<T>> {
        check_eta(eta)?;
        let half = T::lit(0.5);
        let finest = eta.max(T::lit(MIN_GRADING));
        Ok(CubatureRules {
            r: graded_toward_end(T::zero(), half - eta, self.r_ratio, finest, self.r_nodes_per_panel)?,
            theta1: composite(T::zero(), T::PI(), self.theta1_panels, self.theta1_nodes_per_panel)?,
            theta2: composite(T::zero(), T::TAU(), self.theta2_panels, self.theta2_nodes_per_panel)?,
        })
    }
}

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if !(eta >= T::zero() && eta <= T::lit(0.4)) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta.to_f64_lossy(),
            range: "[0, 0.4]",
        });
    }
    Ok(())
}

/// Prior-averaged QFI trace for a fixed channel on precomputed rules.
pub fn average_on_rules<T: Real>(
    channel: &AffineChannel<T>,
    rules: &CubatureRules<T>,
    prior: &PriorSpec<T>,
    purity_tol: T,
) -> Result<T> {
    let bc = BlochChannel::new(channel);
    let two = T::lit(2.0);
    let mut acc = Neumaier::default();
    for (&t1, &w1) in rules.theta1.nodes.iter().zip(&rules.theta1.weights) {
        let (s1, c1) = t1.sin_cos();
        for (&t2, &w2) in rules.theta2.nodes.iter().zip(&rules.theta2.weights) {
            let (s2, c2) = t2.sin_cos();
            // Images of the direction and its angular derivatives.
            let mn = mat_vec(&bc.matrix, [s1 * c2, s1 * s2, c1]);
            let m1 = mat_vec(&bc.matrix, [c1 * c2, c1 * s2, -s1]);
            let m2 = mat_vec(&bc.matrix, [-s1 * s2, s1 * c2, T::zero()]);
            let d_r = mn.map(|x| two * x);
            let angular_weight = w1 * w2;
            let mut inner = Neumaier::default();
            for (&r, &wr) in rules.r.nodes.iter().zip(&rules.r.weights) {
                let tr = two * r;
                let b = [0, 1, 2].map(|i| bc.offset[i] + tr * mn[i]);
                let derivs = [d_r, m1.map(|x| tr * x), m2.map(|x| tr * x)];
                let v = bloch_qfi_trace(b, &derivs, purity_tol);
                let env = EnvState { r, theta1: t1, theta2: t2 };
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand {
                        value: v.to_f64_lossy(),
                        r: r.to_f64_lossy(),
                        theta1: t1.to_f64_lossy(),
                        theta2: t2.to_f64_lossy(),
                    });
                }
                inner.add(wr * (prior.weight)(&env) * v);
            }
            acc.add(angular_weight * inner.total());
        }
    }
    Ok(acc.total())
}

/// `int tr F(theta) pi(theta) d theta` over `r <= 1/2 - eta`.
pub fn avg_trace_qfi<T: Real>(
    p: &UnitaryParams<T>,
    probe: &ProbeState<T>,
    quad: &QuadratureSpec<T>,
    eta: T,
) -> Result<T> {
    let channel = AffineChannel::new(&stinespring_isometry(p, probe)?);
    average_on_rules(&channel, &quad.rules(eta)?, &PriorSpec::default(), quad.purity_tol)
}

/// Whether the regularized average grows without bound as `eta -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Finite,
    Divergent,
}

/// Default cutoffs `1e-2 .. 1e-6`.
pub fn default_eta_schedule<T: Real>() -> Vec<T> {
    [1e-2, 1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&x| T::lit(x)).collect()
}

/// Settings of [`maximize_over_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct FisherConfig<T> {
    pub quad: QuadratureSpec<T>,
    /// Strictly decreasing cutoffs; the first drives the probe search.
    pub eta_schedule: Vec<T>,
    /// Slope of the average against `ln(1/eta)` above which it is divergent.
    pub slope_threshold: T,
    /// The slope is fitted over cutoffs within this factor of the smallest.
    pub slope_window: T,
    pub probe_grid: usize,
    pub probe_restarts: usize,
    pub probe_nm: NelderMead<T>,
    pub extra_probe_starts: Vec<[T; 2]>,
}

impl<T: Real> Default for FisherConfig<T> {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            eta_schedule: default_eta_schedule(),
            slope_threshold: T::lit(0.5),
            slope_window: T::lit(100.0),
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

/// Probe-maximized averaged QFI.
#[derive(Debug, Clone, PartialEq)]
pub struct AvgQfiResult<T> {
    /// Extrapolated `eta -> 0` value; `None` when divergent.
    pub value: Option<T>,
    pub probe_opt: ProbeState<T>,
    /// `(eta, regularized value)` in schedule order.
    pub eta_trace: Vec<(T, T)>,
    pub classification: Classification,
    /// Fitted slope against `ln(1/eta)`.
    pub slope: T,
    /// `4 / value`; `+inf` when the value is zero, `0` when divergent.
    pub cr_scalar: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// Least-squares slope of value against `ln(1/eta)` over the cutoffs within
/// `window` of the smallest.
pub fn divergence_slope<T: Real>(trace: &[(T, T)], window: T) -> Option<T> {
    let eta_min = trace.iter().map(|e| e.0).fold(T::infinity(), T::min);
    let pts: Vec<(T, T)> = trace
        .iter()
        .filter(|(e, _)| *e <= eta_min * window * T::lit(1.000001))
        .map(|&(e, v)| (-e.ln(), v))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = T::count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// `eta -> 0` estimate from the two smallest cutoffs, linear in `eta`.
pub fn extrapolate<T: Real>(trace: &[(T, T)]) -> T {
    let mut pts = trace.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    match pts.as_slice() {
        [] => T::nan(),
        [only] => only.1,
        [(e0, v0), (e1, v1), ..] => *v0 + (*v0 - *v1) * *e0 / (*e1 - *e0),
    }
}

/// Rejects schedules that are too short, non-positive or not strictly
/// decreasing.
pub fn check_schedule<T: Real>(schedule: &[T]) -> Result<()> {
    if schedule.len() < 2 {
        return Err(Error::Quadrature("eta schedule needs at least two cutoffs".into()));
    }
    for w in schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Quadrature("eta schedule must be strictly decreasing".into()));
        }
    }
    schedule.iter().try_for_each(|&e| {
        check_eta(e)?;
        if e == T::zero() {
            return Err(Error::OutOfRange {
                name: "eta",
                value: 0.0,
                range: "(0, 0.4]",
            });
        }
        Ok(())
    })
}

/// Regularized averages over the schedule for a fixed probe, then
/// classification and extrapolation.
pub fn evaluate_schedule<T: Real>(
    p: &UnitaryParams<T>,
    probe: &ProbeState<T>,
    cfg: &FisherConfig<T>,
) -> Result<AvgQfiResult<T>> {
    check_schedule(&cfg.eta_schedule)?;
    let channel = AffineChannel::new(&stinespring_isometry(p, probe)?);
    let prior = PriorSpec::default();
    let mut trace = Vec::with_capacity(cfg.eta_schedule.len());
    for &eta in &cfg.eta_schedule {
        let v = average_on_rules(&channel, &cfg.quad.rules(eta)?, &prior, cfg.quad.purity_tol)?;
        trace.push((eta, v));
    }
    let slope = divergence_slope(&trace, cfg.slope_window).unwrap_or(T::zero());
    let classification = if slope > cfg.slope_threshold {
        Classification::Divergent
    } else {
        Classification::Finite
    };
    let (value, cr_scalar) = match classification {
        Classification::Divergent => (None, T::zero()),
        Classification::Finite => {
            let v = extrapolate(&trace).max(T::zero());
            (Some(v), if v > T::zero() { T::lit(4.0) / v } else { T::infinity() })
        }
    };
    Ok(AvgQfiResult {
        value,
        probe_opt: *probe,
        eta_trace: trace,
        classification,
        slope,
        cr_scalar,
        evaluations: cfg.eta_schedule.len(),
        converged: true,
    })
}

/// Maximizes the averaged QFI over the probe at the largest cutoff, then
/// evaluates the whole schedule at the maximizer.
pub fn maximize_over_probe<T: Real>(p: &UnitaryParams<T>, cfg: &FisherConfig<T>) -> Result<AvgQfiResult<T>> {
    p.validate()?;
    check_schedule(&cfg.eta_schedule)?;
    let rules = cfg.quad.rules(cfg.eta_schedule[0])?;
    let prior = PriorSpec::default();
    let objective = |x: &[T]| {
        let probe = ProbeState::wrapped(x[0], x[1]);
        stinespring_isometry(p, &probe)
            .and_then(|iso| average_on_rules(&AffineChannel::new(&iso), &rules, &prior, cfg.quad.purity_tol))
            .map(|v| -v)
            .unwrap_or(T::nan())
    };
    let seeds = capacity::probe_grid(cfg.probe_grid, &cfg.extra_probe_starts);
    let run = grid_multistart(objective, &seeds, cfg.probe_restarts, &cfg.probe_nm);
    let probe = ProbeState::wrapped(run.best.x[0], run.best.x[1]);
    let mut out = evaluate_schedule(p, &probe, cfg)?;
    out.evaluations += run.total_evaluations;
    out.converged = run.all_converged;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::Vertex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn env(r: f64, t1: f64, t2: f64) -> EnvState<f64> {
        EnvState::new(r, t1, t2).unwrap()
    }

    #[test]
    fn swap_closed_form() {
        let probe = ProbeState::new(0.4, 1.0).unwrap();
        for (r, t1, t2) in [(0.3, FRAC_PI_2, 0.0), (0.1, 0.7, 2.0), (0.45, 2.5, 5.0)] {
            let f = channel_qfi(&Vertex::S.params(), &probe, &env(r, t1, t2)).unwrap();
            let d = f.diagonal();
            assert!((d[0] - 4.0 / (1.0 - 4.0 * r * r)).abs() < 1e-10);
            assert!((d[1] - 4.0 * r * r).abs() < 1e-10);
            assert!((d[2] - 4.0 * r * r * t1.sin().powi(2)).abs() < 1e-10);
        }
        let f = channel_qfi(&Vertex::S.params(), &probe, &env(0.3, FRAC_PI_2, 0.0)).unwrap();
        assert!((f.entries[1][1] - 0.36).abs() < 1e-12);
        let f = channel_qfi(&Vertex::S.params(), &probe, &env(0.0, 1.0, 1.0)).unwrap();
        assert!((f.entries[0][0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn identity_has_no_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let probe = ProbeState::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap();
            let e = env(rng.gen_range(0.0..0.5), rng.gen_range(0.0..PI), rng.gen_range(0.0..std::f64::consts::TAU));
            let f = channel_qfi(&Vertex::I.params(), &probe, &e).unwrap();
            assert!(f.entries.iter().flatten().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn dcnot_closed_form_at_aligned_probe() {
        let f = channel_qfi(&Vertex::D.params(), &ProbeState::new(0.0, 0.0).unwrap(), &env(0.2, 1.1, 0.5)).unwrap();
        assert!((f.entries[2][2] - 4.0 * 0.04 * 1.1f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn qfi_is_symmetric_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..500 {
            let mut a = [0.0; 3].map(|_: f64| rng.gen_range(0.0..FRAC_PI_2));
            a.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let p = UnitaryParams::from_array(a).unwrap();
            let probe = ProbeState::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap();
            let e = env(rng.gen_range(0.0..0.49), rng.gen_range(0.0..PI), rng.gen_range(0.0..std::f64::consts::TAU));
            let f = channel_qfi(&p, &probe, &e).unwrap();
            assert!(f.asymmetry() < 1e-10);
            assert!(f.min_eigenvalue() > -1e-8, "{:?}", f);
            let fast = AffineChannel::new(&stinespring_isometry(&p, &probe).unwrap());
            let (rho, d) = fast.output_with_derivatives(&e);
            assert!((qfi_trace(&rho, &d, PURITY_TOL) - f.trace()).abs() < 1e-10 * f.trace().max(1.0));
            let bc = BlochChannel::new(&fast);
            let bn = mat_vec(&bc.matrix, e.bloch());
            let b = [0, 1, 2].map(|i| bc.offset[i] + bn[i]);
            let db = d.map(|m| bloch_of(&m));
            assert!((0..3).all(|i| (bloch_of(&rho)[i] - b[i]).abs() < 1e-12));
            assert!((bloch_qfi_trace(b, &db, PURITY_TOL) - f.trace()).abs() < 1e-9 * f.trace().max(1.0));
        }
    }

    #[test]
    fn theta2_unidentifiable_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..50 {
            let mut a = [0.0; 3].map(|_: f64| rng.gen_range(0.0..FRAC_PI_2));
            a.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let p = UnitaryParams::from_array(a).unwrap();
            let probe = ProbeState::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..std::f64::consts::TAU)).unwrap();
            let f = channel_qfi(&p, &probe, &env(0.0, 1.0, 2.0)).unwrap();
            assert!(f.entries[2][2].abs() < 1e-14);
        }
    }

    #[test]
    fn branch_switch_is_continuous_on_swap() {
        // det = (1 - 4 r^2) / 4 crosses the purity tolerance near r = 1/2.
        let tol = PURITY_TOL;
        let r = (0.25 * (1.0 - 4.0 * tol)).sqrt();
        let probe = ProbeState::new(0.3, 0.3).unwrap();
        let iso = stinespring_isometry(&Vertex::S.params(), &probe).unwrap();
        let (rho, d) = output_derivatives(&iso, &env(r, 1.2, 0.8)).unwrap();
        let mixed = qfi_matrix(&rho, &d, 0.0);
        let pure = qfi_matrix(&rho, &d, 1.0);
        for a in 1..3 {
            assert!((mixed.entries[a][a] - pure.entries[a][a]).abs() < 1e-4);
        }
    }

    #[test]
    fn prior_examples_and_mass() {
        assert_eq!(prior_weight(&env(0.1, 0.0, 0.0)), 0.0);
        assert!((prior_weight(&env(0.1, PI, 0.0)) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let m: f64 = PriorSpec::default().mass(&QuadratureSpec::default(), 0.0).unwrap();
        assert!((m - 1.0).abs() < 1e-8, "{m}");
    }

    #[test]
    fn eta_validation() {
        let q = QuadratureSpec::<f64>::default();
        assert!(q.rules(-1e-3).is_err());
        assert!(q.rules(0.5).is_err());
        let cfg = FisherConfig {
            eta_schedule: vec![1e-3, 1e-2],
            ..FisherConfig::default()
        };
        assert!(maximize_over_probe(&Vertex::I.params(), &cfg).is_err());
    }

    #[test]
    fn swap_average_grows_logarithmically() {
        let probe = ProbeState::new(0.0, 0.0).unwrap();
        let q = QuadratureSpec::default();
        let p = Vertex::S.params();
        // F_rr integrates to 2 ln((1 - eta)/eta) against the prior; the
        // angular terms add O(1e-4) between the two cutoffs.
        let a = avg_trace_qfi(&p, &probe, &q, 1e-4).unwrap();
        let b = avg_trace_qfi(&p, &probe, &q, 1e-6).unwrap();
        let exact = 2.0 * ((1.0 - 1e-6) / 1e-6f64).ln() - 2.0 * ((1.0 - 1e-4) / 1e-4f64).ln();
        assert!(((b - a) - exact).abs() < 1e-3, "{} vs {exact}", b - a);
    }

    #[test]
    fn identity_average_is_zero() {
        let probe = ProbeState::new(0.9, 0.2).unwrap();
        let v = avg_trace_qfi(&Vertex::I.params(), &probe, &QuadratureSpec::default(), 1e-6).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn slope_and_extrapolation() {
        let trace: Vec<(f64, f64)> = [1e-2f64, 1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&e| (e, 3.0 - 2.0 * e.ln())).collect();
        assert!((divergence_slope(&trace, 100.0).unwrap() - 2.0).abs() < 1e-12);
        let lin: Vec<(f64, f64)> = [1e-2, 1e-3].iter().map(|&e| (e, 1.5 - 7.0 * e)).collect();
        assert!((extrapolate(&lin) - 1.5).abs() < 1e-12);
    }
}
