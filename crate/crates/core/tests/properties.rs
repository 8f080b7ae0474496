//! Structural invariants as randomized properties.

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qrl_core::capacity::{bloch_grid, h2_conditional, renyi2_divergence, ConditioningState, OptimizerConfig};
use qrl_core::channel::{apply_channel, apply_complement, choi_bf, stinespring_isometry, EnvState, ProbeState};
use qrl_core::fisher::{channel_qfi, PriorSpec, QuadratureSpec};
use qrl_core::qlin::{eigh, validate_density};
use qrl_core::unitary::{build_unitary, canonical_phase, magic_basis_reconstruction, UnitaryParams};
use qrl_core::Matrix;

fn tetrahedron() -> impl Strategy<Value = UnitaryParams<f64>> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b, c)| {
        let x = a * FRAC_PI_2;
        let y = b * x;
        UnitaryParams::new(x, y, c * y).unwrap()
    })
}

fn probe() -> impl Strategy<Value = ProbeState<f64>> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(a, b)| ProbeState::new(a, b).unwrap())
}

// Mixed interior of the Bloch ball, away from coordinate singularities.
fn interior_env() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.02..0.45f64, 0.1..(PI - 0.1), 0.0..2.0 * PI)
}

fn output(p: &UnitaryParams<f64>, probe: &ProbeState<f64>, e: [f64; 3]) -> Matrix {
    let iso = stinespring_isometry(p, probe).unwrap();
    apply_channel(&iso, &EnvState::new(e[0], e[1], e[2]).unwrap())
}

/// QFI from the spectral form of the symmetric logarithmic derivative, with
/// parameter derivatives of the output taken by central differences.
fn qfi_by_differences(p: &UnitaryParams<f64>, probe: &ProbeState<f64>, e: [f64; 3]) -> [[f64; 3]; 3] {
    let h = 1e-5;
    let derivs: Vec<Matrix> = (0..3)
        .map(|k| {
            let mut up = e;
            let mut dn = e;
            up[k] += h;
            dn[k] -= h;
            (output(p, probe, up) - output(p, probe, dn)).scale(0.5 / h)
        })
        .collect();
    let eig = eigh(&output(p, probe, e)).unwrap();
    let v = &eig.vectors;
    let in_basis = |d: &Matrix| v.adjoint() * *d * *v;
    let dd: Vec<Matrix> = derivs.iter().map(in_basis).collect();
    let mut f = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    let s = eig.values[i] + eig.values[j];
                    if s > 1e-12 {
                        f[a][b] += 2.0 * (dd[a][(i, j)] * dd[b][(j, i)]).re / s;
                    }
                }
            }
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unitary_and_magic_basis_agree(p in tetrahedron()) {
        let u = build_unitary(&p).unwrap();
        prop_assert!((u.adjoint() * u).max_abs_diff(&Matrix::identity(4)) < 1e-12);
        let m = magic_basis_reconstruction(&p).scale_complex(canonical_phase(&p));
        prop_assert!(u.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn channel_outputs_are_states(p in tetrahedron(), pr in probe(), r in 0.0..=0.5f64, t1 in 0.0..=PI, t2 in 0.0..2.0 * PI) {
        let iso = stinespring_isometry(&p, &pr).unwrap();
        let env = EnvState::new(r, t1, t2).unwrap();
        for rho in [apply_channel(&iso, &env), apply_complement(&iso, &env)] {
            let c = validate_density(&rho);
            prop_assert!((c.trace.re - 1.0).abs() < 1e-10 && c.trace.im.abs() < 1e-10);
            prop_assert!(c.min_eigenvalue > -1e-10 && c.hermitian_defect < 1e-10);
        }
        prop_assert!(iso.gram().max_abs_diff(&Matrix::identity(2)) < 1e-12);
        prop_assert!(choi_bf(&iso).check().valid);
    }

    #[test]
    fn qfi_matches_finite_differences(p in tetrahedron(), pr in probe(), e in interior_env()) {
        let env = EnvState::new(e.0, e.1, e.2).unwrap();
        let got = channel_qfi(&p, &pr, &env).unwrap();
        let want = qfi_by_differences(&p, &pr, [e.0, e.1, e.2]);
        for a in 0..3 {
            for b in 0..3 {
                let scale = want[a][b].abs().max(1.0);
                prop_assert!((got.entries[a][b] - want[a][b]).abs() < 1e-6 * scale,
                    "F[{a}][{b}] {} vs {}", got.entries[a][b], want[a][b]);
            }
        }
        prop_assert!(got.asymmetry() < 1e-12);
        prop_assert!(got.min_eigenvalue() > -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // The optimizer never loses to an exhaustive 21^3 scan of the ball.
    #[test]
    fn h2_beats_dense_grid(p in tetrahedron(), pr in probe()) {
        let rho = choi_bf(&stinespring_isometry(&p, &pr).unwrap());
        let cfg = OptimizerConfig::<f64>::default();
        let refined = h2_conditional(&rho, &cfg).unwrap().value;
        let best_grid = bloch_grid::<f64>(21)
            .into_iter()
            .map(|x| {
                let s = ConditioningState::projected([x[0], x[1], x[2]], cfg.radius_cap);
                -renyi2_divergence(&rho, &s, cfg.floor).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(refined >= best_grid - 1e-4, "{refined} < {best_grid}");
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&refined));
    }
}

#[test]
fn prior_mass_is_one() {
    let prior = PriorSpec::<f64>::default();
    let quad = QuadratureSpec::default();
    for eta in [0.0, 1e-2, 1e-4, 1e-6] {
        let mass = prior.mass(&quad, eta).unwrap();
        assert!((mass - (1.0 - 2.0 * eta)).abs() < 1e-8, "eta={eta}: {mass}");
    }
}

// Nearby unitaries give nearby capacities.
#[test]
fn h2_is_continuous_in_alpha() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let cfg = OptimizerConfig::<f64> {
        probe_grid: 7,
        ..OptimizerConfig::default()
    };
    let h2 = |a: [f64; 3]| qrl_core::capacity::best_probe_h2(&UnitaryParams::from_array(a).unwrap(), &cfg).unwrap().h2;
    for _ in 0..100 {
        let x = rng.gen_range(0.0..FRAC_PI_2);
        let y = rng.gen_range(0.0..=x);
        let z = rng.gen_range(0.0..=y);
        // Step inward along the diagonal keeps the ordering intact.
        let s = rng.gen_range(0.0..5e-4);
        let a = [x, y, z];
        let b = [(x - s).max(0.0), (y - s).max(0.0), (z - s).max(0.0)];
        let (ha, hb) = (h2(a), h2(b));
        assert!((ha - hb).abs() <= 0.05, "{a:?} -> {ha}, {b:?} -> {hb}");
    }
}
