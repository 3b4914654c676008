use proptest::prelude::*;
use selfsim_core::kernels::MemoryKernel;
use selfsim_core::quad;
use selfsim_core::specfun::{gamma, MittagLefflerParams};
use selfsim_core::spectral::*;
use selfsim_core::volterra::TimeGrid;
use selfsim_core::Complex64;

fn gaussian() -> InitialData {
    InitialData::Gaussian { width: 1.0, mass: 1.0 }
}

fn sup_error<F: Fn(f64, f64) -> f64>(kernel: &MemoryKernel, exact: F) -> f64 {
    let g = ModeGrid::new(1, 256, 12.0, false).unwrap();
    let times = [0.5, 1.0, 5.0];
    let tg = TimeGrid::with_step(5.0, 1e-3).unwrap();
    let out = evolve(kernel, &gaussian(), &g, &times, tg).unwrap();
    let mut worst: f64 = 0.0;
    for (f, &t) in out.iter().zip(&times) {
        for i in 0..g.len() {
            let x2 = g.xi_sq(i);
            let want = exact(x2, t) * gaussian().fourier(&g.xi(i), 1);
            worst = worst.max((f.values[i] - Complex64::new(want, 0.0)).norm());
        }
    }
    worst
}

#[test]
fn closed_form_kernels() {
    assert!(sup_error(&MemoryKernel::cosine(), cosine_relaxation_exact) <= 1e-5);
    assert!(sup_error(&MemoryKernel::neg_exponential(), neg_exponential_relaxation_exact) <= 1e-6);
}

#[test]
fn long_time_splits() {
    let g = ModeGrid::new(1, 64, 6.0, false).unwrap();
    let tg = TimeGrid::with_step(40.0, 1e-2).unwrap();
    let times: Vec<f64> = (1..=4000).map(|i| i as f64 * 1e-2).collect();

    let neg = evolve(&MemoryKernel::neg_exponential(), &gaussian(), &g, &times, tg).unwrap();
    for (f, &t) in neg.iter().zip(&times).step_by(97) {
        for i in 0..g.len() {
            let x2 = g.xi_sq(i);
            let u0 = gaussian().fourier(&g.xi(i), 1);
            let static_part = u0 / (1.0 + x2);
            assert!((f.values[i].re - static_part).abs() <= u0 * (-(1.0 + x2) * t).exp() + 1e-6);
        }
    }

    // the oscillating remainder of the cosine kernel averages out
    let cos = evolve(&MemoryKernel::cosine(), &gaussian(), &g, &times, tg).unwrap();
    let i = g.index_of([8, 0, 0]).unwrap();
    let x2 = g.xi_sq(i);
    let static_part = gaussian().fourier(&g.xi(i), 1) / (1.0 + x2);
    let mean = |upto: usize| cos[..upto].iter().map(|f| f.values[i].re - static_part).sum::<f64>() / upto as f64;
    assert!(mean(4000).abs() < mean(400).abs());
    assert!(mean(4000).abs() < 0.02 * static_part);
}

#[test]
fn fractional_residual_of_limit_profile() {
    let g = ModeGrid::new(1, 16, 4.0, false).unwrap();
    let t = 1.3;
    for beta in [-0.5, 0.0, 0.5, 1.0] {
        let alpha = 1.0 + beta;
        let ml = MittagLefflerParams::new(alpha).unwrap();
        let w = limit_profile(beta, &g, t, 1.0).unwrap();
        for j in [0i64, 1, 3, 7] {
            let i = g.index_of([j, 0, 0]).unwrap();
            let x2 = g.xi_sq(i);
            // s = t - u² removes the (t - s)^β singularity
            let conv = quad::integrate(
                |u| {
                    let s = t - u * u;
                    2.0 * u.powf(2.0 * beta + 1.0) / gamma(1.0 + beta).unwrap()
                        * ml.eval(-x2 * s.max(0.0).powf(alpha)).unwrap()
                },
                0.0,
                t.sqrt(),
                1e-12,
                1e-10,
            );
            let residual = w.values[i].re + x2 * conv - 1.0;
            assert!(residual.abs() < 1e-4, "β={beta} ξ²={x2}: {residual:e}");
        }
    }
}

#[test]
fn limit_profile_special_cases() {
    let g = ModeGrid::new(2, 16, 3.0, false).unwrap();
    let heat = limit_profile(0.0, &g, 0.7, 2.0).unwrap();
    let wave = limit_profile(1.0, &g, 0.7, 2.0).unwrap();
    for i in 0..g.len() {
        let x2 = g.xi_sq(i);
        assert!((heat.values[i].re - 2.0 * (-x2 * 0.7).exp()).abs() < 1e-14);
        assert!((wave.values[i].re - 2.0 * (x2.sqrt() * 0.7).cos()).abs() < 1e-13);
    }
}

#[test]
fn box_data_synthesizes_to_indicator() {
    let g = ModeGrid::new(1, 1024, 100.0, false).unwrap();
    let data = InitialData::Box { half_width: 1.0, mass: 2.0 };
    let u = synthesize(&data.sample(&g).unwrap()).unwrap();
    // away from the jumps the truncated sinc series is close to the plateau
    for (i, v) in u.values.iter().enumerate() {
        let x = u.x(i)[0].abs();
        if x < 0.8 {
            assert!((v - 1.0).abs() < 0.02, "x={x} v={v}");
        } else if x > 1.2 {
            assert!(v.abs() < 0.02);
        }
    }
    assert!((u.integral() - 2.0).abs() < 1e-2);
}

#[test]
fn radial_norm_matches_cartesian() {
    let f = |g: ModeGrid| {
        let u0 = InitialData::Gaussian { width: 0.8, mass: 1.0 };
        let field = u0.sample(&g).unwrap();
        hs_norm(&field, -1.0)
    };
    let cart = f(ModeGrid::new(3, 48, 9.0, false).unwrap());
    let radial = f(ModeGrid::new(3, 2048, 9.0, true).unwrap());
    assert!((cart / radial - 1.0).abs() < 1e-6, "{cart} {radial}");
}

fn kernel_strategy() -> impl Strategy<Value = MemoryKernel> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|a| MemoryKernel::heat(a).unwrap()),
        (0.1f64..3.0).prop_map(|c| MemoryKernel::wave(c).unwrap()),
        (-0.9f64..1.0).prop_map(|b| MemoryKernel::fractional(b).unwrap()),
        (0.1f64..3.0, 0.1f64..3.0).prop_map(|(m, c)| MemoryKernel::exponential(m, c, 0.0).unwrap()),
        Just(MemoryKernel::neg_exponential()),
        Just(MemoryKernel::cosine()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_and_symmetry_preserved(k in kernel_strategy(), step in 1usize..=10, w in 0.3f64..2.0) {
        let g = ModeGrid::new(2, 16, 4.0, false).unwrap();
        let tg = TimeGrid::new(1.0, 10).unwrap();
        let u0 = InitialData::Box { half_width: w, mass: 1.7 };
        let t = tg.node(step);
        let f = evolve(&k, &u0, &g, &[t], tg).unwrap().remove(0);
        prop_assert_eq!(f.values[g.zero_index()].re, 1.7);
        prop_assert_eq!(f.mass, 1.7);
        prop_assert_eq!(f.hermitian_defect(), 0.0);
        let u = synthesize(&f).unwrap();
        prop_assert!(u.max_imag < 1e-10);
    }

    #[test]
    fn norm_is_homogeneous(c in -5.0f64..5.0, s in -3.0f64..2.0) {
        let g = ModeGrid::new(1, 64, 6.0, false).unwrap();
        let f = gaussian().sample(&g).unwrap();
        prop_assert!((hs_norm(&f.scale(c), s) - c.abs() * hs_norm(&f, s)).abs() < 1e-13);
    }
}
