//! Environment-parametrized channel induced by a two-qubit unitary.
//!
//! The probe `A` starts in a fixed pure state `|phi>`, the environment `E` in
//! `theta`. After the unitary, `B` is the probe output and `F` the
//! environment output. With the probe fixed, the map `E -> B (x) F` is the
//! isometry `V|e> = U(|phi> (x) |e>)`; tracing `F` gives the channel, tracing
//! `B` its complement.

use num_complex::Complex;

use crate::qlin::{self, bloch_matrix, kron, partial_trace, ComplexMatrix, Subsystem};
use crate::unitary::{build_unitary, UnitaryParams};
use crate::{Error, Real, Result};

/// Pure probe `cos(phi1/2)|0> + exp(i phi2) sin(phi1/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeState<T> {
    pub phi1: T,
    pub phi2: T,
}

impl<T: Real> ProbeState<T> {
    /// Validated constructor: `phi1` in `[0, pi]`, `phi2` in `[0, 2 pi)`.
    pub fn new(phi1: T, phi2: T) -> Result<Self> {
        if !(phi1 >= T::zero() && phi1 <= T::PI()) {
            return Err(Error::OutOfRange {
                name: "phi1",
                value: phi1.to_f64_lossy(),
                range: "[0, pi]",
            });
        }
        if !(phi2 >= T::zero() && phi2 < T::TAU()) {
            return Err(Error::OutOfRange {
                name: "phi2",
                value: phi2.to_f64_lossy(),
                range: "[0, 2 pi)",
            });
        }
        Ok(Self { phi1, phi2 })
    }

    /// Maps arbitrary angles onto the canonical chart describing the same
    /// ray: `phi1` reflected into `[0, pi]` (shifting `phi2` by `pi` when
    /// needed), `phi2` reduced mod `2 pi`.
    pub fn wrapped(phi1: T, phi2: T) -> Self {
        let tau = T::TAU();
        let mut a = phi1 % tau;
        if a < T::zero() {
            a = a + tau;
        }
        let mut b = phi2;
        if a > T::PI() {
            a = tau - a;
            b = b + T::PI();
        }
        b = b % tau;
        if b < T::zero() {
            b = b + tau;
        }
        if b >= tau {
            b = T::zero();
        }
        Self { phi1: a, phi2: b }
    }

    pub fn ket(&self) -> [Complex<T>; 2] {
        let h = T::lit(0.5) * self.phi1;
        let (s, c) = h.sin_cos();
        let (s2, c2) = self.phi2.sin_cos();
        [Complex::new(c, T::zero()), Complex::new(c2 * s, s2 * s)]
    }

    pub fn bloch(&self) -> [T; 3] {
        let (s1, c1) = self.phi1.sin_cos();
        let (s2, c2) = self.phi2.sin_cos();
        [s1 * c2, s1 * s2, c1]
    }

    pub fn density(&self) -> ComplexMatrix<T> {
        ComplexMatrix::projector(&self.ket())
    }
}

/// Environment state `I/2 + r (sin t1 cos t2, sin t1 sin t2, cos t1) . sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState<T> {
    pub r: T,
    pub theta1: T,
    pub theta2: T,
}

impl<T: Real> EnvState<T> {
    /// Validated constructor over `[0, 1/2] x [0, pi] x [0, 2 pi]`.
    pub fn new(r: T, theta1: T, theta2: T) -> Result<Self> {
        if !(r >= T::zero() && r <= T::lit(0.5)) {
            return Err(Error::OutOfRange {
                name: "r",
                value: r.to_f64_lossy(),
                range: "[0, 1/2]",
            });
        }
        if !(theta1 >= T::zero() && theta1 <= T::PI()) {
            return Err(Error::OutOfRange {
                name: "theta1",
                value: theta1.to_f64_lossy(),
                range: "[0, pi]",
            });
        }
        if !(theta2 >= T::zero() && theta2 <= T::TAU()) {
            return Err(Error::OutOfRange {
                name: "theta2",
                value: theta2.to_f64_lossy(),
                range: "[0, 2 pi]",
            });
        }
        Ok(Self { r, theta1, theta2 })
    }

    pub fn direction(&self) -> [T; 3] {
        let (s1, c1) = self.theta1.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        [s1 * c2, s1 * s2, c1]
    }

    /// Bloch vector `2 r n`; its length is at most one.
    pub fn bloch(&self) -> [T; 3] {
        let two_r = T::lit(2.0) * self.r;
        self.direction().map(|x| two_r * x)
    }

    pub fn matrix(&self) -> ComplexMatrix<T> {
        bloch_matrix(T::one(), self.bloch())
    }
}

/// Partial derivatives of the environment matrix with respect to
/// `(r, theta1, theta2)`; each is traceless Hermitian.
pub fn env_bloch_derivatives<T: Real>(env: &EnvState<T>) -> [ComplexMatrix<T>; 3] {
    let two = T::lit(2.0);
    let (s1, c1) = env.theta1.sin_cos();
    let (s2, c2) = env.theta2.sin_cos();
    let two_r = two * env.r;
    let d_r = [two * s1 * c2, two * s1 * s2, two * c1];
    let d_t1 = [two_r * c1 * c2, two_r * c1 * s2, -two_r * s1];
    let d_t2 = [-two_r * s1 * s2, two_r * s1 * c2, T::zero()];
    [d_r, d_t1, d_t2].map(|v| bloch_matrix(T::zero(), v))
}

/// Stinespring isometry `V: E -> B (x) F` for a fixed probe.
#[derive(Debug, Clone, Copy)]
pub struct ChannelIsometry<T> {
    /// 4x2, columns `V|0>` and `V|1>`.
    pub v: ComplexMatrix<T>,
    pub probe: ProbeState<T>,
    pub params: UnitaryParams<T>,
}

/// `V|e> = U(|phi> (x) |e>)`.
pub fn stinespring_isometry<T: Real>(p: &UnitaryParams<T>, probe: &ProbeState<T>) -> Result<ChannelIsometry<T>> {
    let u = build_unitary(p)?;
    let phi = ComplexMatrix::column(&probe.ket());
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let mut v = ComplexMatrix::zeros(4, 2);
    for e in 0..2 {
        let mut basis = [zero, zero];
        basis[e] = one;
        let col = u * kron(&phi, &ComplexMatrix::column(&basis));
        for i in 0..4 {
            v[(i, e)] = col[(i, 0)];
        }
    }
    Ok(ChannelIsometry {
        v,
        probe: *probe,
        params: *p,
    })
}

impl<T: Real> ChannelIsometry<T> {
    /// `V^dagger V`, the 2x2 identity up to rounding.
    pub fn gram(&self) -> ComplexMatrix<T> {
        self.v.adjoint() * self.v
    }

    fn dilate(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        (&self.v * m) * self.v.adjoint()
    }

    /// `Tr_F[V m V^dagger]` for any operator `m` on `E`.
    pub fn channel_of(&self, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        check_qubit_operator(m)?;
        partial_trace(&self.dilate(m), Subsystem::First)
    }

    /// `Tr_B[V m V^dagger]` for any operator `m` on `E`.
    pub fn complement_of(&self, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        check_qubit_operator(m)?;
        partial_trace(&self.dilate(m), Subsystem::Second)
    }

    /// Linear transfer coefficients of the channel, for fast repeated
    /// application.
    pub fn transfer(&self) -> ChannelTransfer<T> {
        let mut images = [ComplexMatrix::zeros(2, 2); 4];
        for (k, img) in images.iter_mut().enumerate() {
            let mut unit = ComplexMatrix::zeros(2, 2);
            unit[(k / 2, k % 2)] = Complex::new(T::one(), T::zero());
            *img = partial_trace(&self.dilate(&unit), Subsystem::First).expect("4x4 dilation");
        }
        ChannelTransfer { images }
    }
}

fn check_qubit_operator<T: Real>(m: &ComplexMatrix<T>) -> Result<()> {
    if m.dims() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: "2x2".into(),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    Ok(())
}

/// The channel as images of the matrix units `|i><j|`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelTransfer<T> {
    images: [ComplexMatrix<T>; 4],
}

impl<T: Real> ChannelTransfer<T> {
    /// `sum_ij m_ij N(|i><j|)`.
    pub fn apply(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::zeros(2, 2);
        for (k, img) in self.images.iter().enumerate() {
            let w = m[(k / 2, k % 2)];
            if w.re != T::zero() || w.im != T::zero() {
                out = out + img.scale_complex(w);
            }
        }
        out
    }
}

/// Channel output `N(theta) = Tr_F[V theta V^dagger]` on the probe side.
pub fn apply_channel<T: Real>(iso: &ChannelIsometry<T>, env: &EnvState<T>) -> ComplexMatrix<T> {
    iso.channel_of(&env.matrix()).expect("2x2 environment matrix")
}

/// Complementary output `Tr_B[V theta V^dagger]` on the environment side.
pub fn apply_complement<T: Real>(iso: &ChannelIsometry<T>, env: &EnvState<T>) -> ComplexMatrix<T> {
    iso.complement_of(&env.matrix()).expect("2x2 environment matrix")
}

/// Bipartite state `rho_BF` on reference `B` and complementary output `F`.
#[derive(Debug, Clone, Copy)]
pub struct BipartiteState<T> {
    pub rho_bf: ComplexMatrix<T>,
}

impl<T: Real> BipartiteState<T> {
    pub fn new(rho_bf: ComplexMatrix<T>) -> Result<Self> {
        if rho_bf.dims() != (4, 4) {
            return Err(Error::DimensionMismatch {
                expected: "4x4".into(),
                found: format!("{}x{}", rho_bf.rows(), rho_bf.cols()),
            });
        }
        Ok(Self { rho_bf })
    }

    pub fn check(&self) -> qlin::DensityCheck<T> {
        qlin::validate_density(&self.rho_bf)
    }

    /// Reduced state of the reference `B`.
    pub fn reference_marginal(&self) -> ComplexMatrix<T> {
        partial_trace(&self.rho_bf, Subsystem::First).expect("4x4")
    }
}

/// `rho_BF = (id (x) N^c)(Phi)` with `Phi = (1/2) sum_ij |ii><jj|`.
pub fn choi_bf<T: Real>(iso: &ChannelIsometry<T>) -> BipartiteState<T> {
    let half = T::lit(0.5);
    let mut rho = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let mut unit = ComplexMatrix::zeros(2, 2);
            unit[(i, j)] = Complex::new(T::one(), T::zero());
            let f = iso.complement_of(&unit).expect("2x2 unit");
            rho = rho + kron(&unit, &f).scale(half);
        }
    }
    BipartiteState { rho_bf: rho }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::validate_density;
    use crate::unitary::Vertex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    type M = ComplexMatrix<f64>;

    fn random_params(rng: &mut impl Rng) -> UnitaryParams<f64> {
        let mut a = [0.0; 3].map(|_: f64| rng.gen_range(0.0..FRAC_PI_2));
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        UnitaryParams::from_array(a).unwrap()
    }

    fn random_probe(rng: &mut impl Rng) -> ProbeState<f64> {
        ProbeState::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    fn random_env(rng: &mut impl Rng) -> EnvState<f64> {
        EnvState::new(rng.gen_range(0.0..0.5), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    #[test]
    fn probe_and_env_validation() {
        assert!(ProbeState::new(-0.1, 0.0).is_err());
        assert!(ProbeState::new(0.1, 2.0 * PI).is_err());
        assert!(EnvState::new(0.6, 0.0, 0.0).is_err());
        assert!(EnvState::new(0.1, 4.0, 0.0).is_err());
        let k = ProbeState::new(1.2f64, 0.7).unwrap().ket();
        assert!(((k[0].norm_sqr() + k[1].norm_sqr()) - 1.0).abs() < 1e-14);
        assert!(validate_density(&EnvState::new(0.5, 1.0, 2.0).unwrap().matrix()).valid);
    }

    #[test]
    fn wrapped_probe_describes_same_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = rng.gen_range(-10.0..10.0);
            let b = rng.gen_range(-10.0..10.0);
            let raw = ProbeState { phi1: a, phi2: b };
            let w = ProbeState::wrapped(a, b);
            assert!(ProbeState::new(w.phi1, w.phi2).is_ok());
            assert!(raw.density().max_abs_diff(&w.density()) < 1e-12);
        }
    }

    #[test]
    fn swap_isometry_columns() {
        let probe = ProbeState::new(1.1, 0.4).unwrap();
        let iso = stinespring_isometry(&Vertex::S.params(), &probe).unwrap();
        let phi = M::column(&probe.ket());
        let e0 = M::from_real_rows(2, 1, &[1.0, 0.0]).unwrap();
        let e1 = M::from_real_rows(2, 1, &[0.0, 1.0]).unwrap();
        let c0 = kron(&e0, &phi);
        let c1 = kron(&e1, &phi);
        for i in 0..4 {
            assert!((iso.v[(i, 0)] - c0[(i, 0)]).norm() < 1e-15);
            assert!((iso.v[(i, 1)] - c1[(i, 0)]).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_isometry_columns() {
        let iso = stinespring_isometry(&Vertex::I.params(), &ProbeState::new(0.0, 0.0).unwrap()).unwrap();
        let expect = M::from_real_rows(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(iso.v.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn isometry_property_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..300 {
            let iso = stinespring_isometry(&random_params(&mut rng), &random_probe(&mut rng)).unwrap();
            assert!(iso.gram().max_abs_diff(&M::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn swap_channel_is_identity_on_env() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let probe = random_probe(&mut rng);
            let env = random_env(&mut rng);
            let iso = stinespring_isometry(&Vertex::S.params(), &probe).unwrap();
            assert!(apply_channel(&iso, &env).max_abs_diff(&env.matrix()) < 1e-12);
            assert!(apply_complement(&iso, &env).max_abs_diff(&probe.density()) < 1e-12);
        }
    }

    #[test]
    fn identity_channel_returns_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let probe = random_probe(&mut rng);
            let env = random_env(&mut rng);
            let iso = stinespring_isometry(&Vertex::I.params(), &probe).unwrap();
            assert!(apply_channel(&iso, &env).max_abs_diff(&probe.density()) < 1e-12);
            assert!(apply_complement(&iso, &env).max_abs_diff(&env.matrix()) < 1e-12);
        }
    }

    #[test]
    fn c_vertex_output_at_probe_zero() {
        let iso = stinespring_isometry(&Vertex::C.params(), &ProbeState::new(0.0, 0.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let env = random_env(&mut rng);
            let out = apply_channel(&iso, &env);
            let a = env.r * env.theta1.sin() * env.theta2.cos();
            assert!((out[(0, 0)].re - 0.5).abs() < 1e-12);
            assert!((out[(1, 1)].re - 0.5).abs() < 1e-12);
            assert!((out[(0, 1)] - Complex::new(0.0, a)).norm() < 1e-12);
            assert!((out[(1, 0)] - Complex::new(0.0, -a)).norm() < 1e-12);
        }
    }

    #[test]
    fn channel_is_trace_preserving_and_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..200 {
            let iso = stinespring_isometry(&random_params(&mut rng), &random_probe(&mut rng)).unwrap();
            let envs = [random_env(&mut rng), random_env(&mut rng), random_env(&mut rng)];
            let w: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let total: f64 = w.iter().sum();
            let mut mix = M::zeros(2, 2);
            let mut mixed_out = M::zeros(2, 2);
            for (e, wi) in envs.iter().zip(w) {
                mix = mix + e.matrix().scale(wi / total);
                mixed_out = mixed_out + apply_channel(&iso, e).scale(wi / total);
            }
            assert!(iso.channel_of(&mix).unwrap().max_abs_diff(&mixed_out) < 1e-12);
            let out = apply_channel(&iso, &envs[0]);
            let comp = apply_complement(&iso, &envs[0]);
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            assert!((comp.trace().re - 1.0).abs() < 1e-12);
            assert!(validate_density(&out).valid);
            assert!(validate_density(&comp).valid);
            let fast = iso.transfer().apply(&envs[0].matrix());
            assert!(fast.max_abs_diff(&out) < 1e-13);
        }
    }

    #[test]
    fn choi_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex::new(0.0, 0.0);
        let phi = M::projector(&[Complex::new(s, 0.0), z, z, Complex::new(s, 0.0)]);
        let probe = ProbeState::new(0.9, 2.0).unwrap();
        let i = choi_bf(&stinespring_isometry(&Vertex::I.params(), &probe).unwrap());
        assert!(i.rho_bf.max_abs_diff(&phi) < 1e-12);

        let sw = choi_bf(&stinespring_isometry(&Vertex::S.params(), &probe).unwrap());
        let expect = kron(&M::identity(2).scale(0.5), &probe.density());
        assert!(sw.rho_bf.max_abs_diff(&expect) < 1e-12);
        assert!(sw.reference_marginal().max_abs_diff(&M::identity(2).scale(0.5)) < 1e-12);

        for phi1 in [0.0, PI] {
            let c = choi_bf(&stinespring_isometry(&Vertex::C.params(), &ProbeState::new(phi1, 0.3).unwrap()).unwrap());
            #[rustfmt::skip]
            let expect = M::from_real_rows(4, 4, &[
                1., 0., 0., 1.,
                0., 1., 1., 0.,
                0., 1., 1., 0.,
                1., 0., 0., 1.,
            ]).unwrap().scale(0.25);
            assert!(c.rho_bf.max_abs_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn choi_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let st = choi_bf(&stinespring_isometry(&random_params(&mut rng), &random_probe(&mut rng)).unwrap());
            assert!(st.check().valid);
            assert!(st.reference_marginal().max_abs_diff(&M::identity(2).scale(0.5)) < 1e-12);
        }
    }

    #[test]
    fn env_derivative_examples() {
        let [x, _, z] = qlin::paulis::<f64>();
        let d = env_bloch_derivatives(&EnvState::new(0.3, 0.0, 0.0).unwrap());
        assert!(d[0].max_abs_diff(&z) < 1e-15);
        assert!(d[1].max_abs_diff(&x.scale(0.3)) < 1e-15);
        let d = env_bloch_derivatives(&EnvState::new(0.0, 1.0, 1.0).unwrap());
        assert!(d[2].max_abs() == 0.0);
    }

    #[test]
    fn env_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let h = 1e-5;
        for _ in 0..200 {
            let e = EnvState {
                r: rng.gen_range(0.01..0.49),
                theta1: rng.gen_range(0.01..3.13),
                theta2: rng.gen_range(0.0..std::f64::consts::TAU),
            };
            let d = env_bloch_derivatives(&e);
            for (a, da) in d.iter().enumerate() {
                let shift = |s: f64| {
                    let mut v = [e.r, e.theta1, e.theta2];
                    v[a] += s;
                    EnvState { r: v[0], theta1: v[1], theta2: v[2] }.matrix()
                };
                let fd = (shift(h) - shift(-h)).scale(0.5 / h);
                assert!(fd.max_abs_diff(da) < 1e-9);
                assert!(da.hermitian_defect() == 0.0);
                assert!(da.trace().norm() < 1e-15);
            }
        }
    }
}
