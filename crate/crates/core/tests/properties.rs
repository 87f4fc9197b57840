use num_complex::Complex64;
use proptest::prelude::*;
use rdspectral::postprocess::{fourier_upsample_1d, fourier_upsample_2d, max_abs_error};
use rdspectral::stepper::{build_exp_tables, LinearSymbol};
use rdspectral::{integrate, Axis, GridSpec, IntegrateOptions, ModelSpec, Scheme, State, StepControl, StepSize};

fn run(m: &ModelSpec, g: &GridSpec, init: State, scheme: Scheme, dt: f64, t: f64) -> State {
    let step = if scheme.is_adaptive() {
        StepSize::Adaptive(StepControl::new(dt, 1e-10))
    } else {
        StepSize::Fixed(dt)
    };
    let opts = IntegrateOptions {
        scheme,
        step,
        t_final: t,
        snapshot_every: None,
        dealias: false,
    };
    integrate(m, g, init, &opts, &mut |_| Ok(())).unwrap().final_state
}

#[test]
fn pure_diffusion_matches_exact_decay_for_every_model() {
    for name in rdspectral::list_models() {
        let m = ModelSpec::by_name(name, &[]).unwrap().without_reaction();
        let n = if m.dims == 1 { 128 } else { 32 };
        let g = GridSpec::new(n, m.default_grid.1, m.dims).unwrap();
        let ic = ModelSpec::by_name(name, &[]).unwrap().initial_condition(&g).unwrap();
        let symbol = LinearSymbol::new(&g, &m.diffusivities).unwrap();
        for scheme in [Scheme::Rk4, Scheme::Etdrk4, Scheme::Etdrk4b] {
            let dt = 1.0;
            let out = run(&m, &g, ic.clone(), scheme, dt, 20.0 * dt);
            let tab = build_exp_tables(&symbol, 20.0 * dt).unwrap();
            for s in 0..m.species() {
                let scale = ic.spectral[s].iter().map(|z| z.norm()).fold(0.0, f64::max);
                for (i, z) in out.spectral[s].iter().enumerate() {
                    let exact = ic.spectral[s][i] * tab.species[s].e_full[i];
                    assert!((z - exact).norm() <= 1e-12 * scale, "{name} {scheme}");
                }
            }
        }
    }
}

/// Classical RK4 on the reaction ODE of a well-mixed state.
fn scalar_rk4(m: &ModelSpec, y0: &[f64], dt: f64, steps: usize) -> Vec<f64> {
    let f = |y: &[f64]| -> Vec<f64> {
        let fields: Vec<Vec<f64>> = y.iter().map(|&v| vec![v]).collect();
        m.reaction.rates(&fields).into_iter().map(|r| r[0]).collect()
    };
    let mut y = y0.to_vec();
    for _ in 0..steps {
        let k1 = f(&y);
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * dt * k).collect();
        let k2 = f(&y2);
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * dt * k).collect();
        let k3 = f(&y3);
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + dt * k).collect();
        let k4 = f(&y4);
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[test]
fn well_mixed_state_follows_the_reaction_ode() {
    for (name, y0) in [("gray1d", vec![0.6, 0.3]), ("epidemic", vec![0.2, 0.9]), ("labyrinthe2d", vec![0.3, -0.1])] {
        let m = ModelSpec::by_name(name, &[]).unwrap();
        let g = GridSpec::new(16, 10.0, m.dims).unwrap();
        let ic = State::from_physical(&g, 0.0, y0.iter().map(|&v| vec![v; g.len()]).collect()).unwrap();
        let expect = scalar_rk4(&m, &y0, 0.1, 100);
        for scheme in [Scheme::Rk4, Scheme::Etdrk4, Scheme::Etdrk4b] {
            let out = run(&m, &g, ic.clone(), scheme, 0.1, 10.0);
            for (s, e) in expect.iter().enumerate() {
                for v in &out.physical[s] {
                    assert!((v - e).abs() < 1e-10, "{name} {scheme}: {v} vs {e}");
                }
            }
        }
        // the adaptive scheme is fifth order: compare with a much finer RK4 run
        let fine = scalar_rk4(&m, &y0, 0.001, 10_000);
        let out = run(&m, &g, ic, Scheme::Ck45, 0.1, 10.0);
        for (s, e) in fine.iter().enumerate() {
            assert!((out.physical[s][0] - e).abs() < 1e-8, "{name} ck45");
        }
    }
}

#[test]
fn identical_runs_are_bitwise_identical() {
    let m = ModelSpec::by_name("labyrinthe2d", &[]).unwrap();
    let g = GridSpec::new(32, 100.0, 2).unwrap();
    let a = run(&m, &g, m.initial_condition(&g).unwrap(), Scheme::Ck45, 0.1, 5.0);
    let b = run(&m, &g, m.initial_condition(&g).unwrap(), Scheme::Ck45, 0.1, 5.0);
    for (x, y) in a.physical.iter().flatten().zip(b.physical.iter().flatten()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

fn band_limited(coeffs: &[(f64, f64)], l: f64, x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let w = k as f64 * std::f64::consts::PI / l;
            a * (w * x).cos() + b * (w * x).sin()
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(vals in proptest::collection::vec(-5.0f64..5.0, 32)) {
        let g = GridSpec::new(32, 3.0, 1).unwrap();
        let spec = g.forward(&vals).unwrap();
        let phys: f64 = vals.iter().map(|v| v * v).sum();
        let freq: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
        prop_assert!((phys - freq).abs() <= 1e-10 * phys.max(1.0));
    }

    #[test]
    fn round_trip(vals in proptest::collection::vec(-5.0f64..5.0, 64)) {
        let g = GridSpec::new(8, 3.0, 2).unwrap();
        let back = g.inverse_real(&g.forward(&vals).unwrap()).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_symbol_is_even_in_wavenumber(n in (2usize..20).prop_map(|k| 2 * k), l in 0.5f64..200.0) {
        let g = GridSpec::new(n, l, 1).unwrap();
        let w = g.omega_sq();
        for i in 1..n {
            prop_assert!((w[i] - w[n - i]).abs() <= 1e-12 * w[i]);
        }
    }

    #[test]
    fn upsample_preserves_mean(vals in proptest::collection::vec(-5.0f64..5.0, 12), factor in 1usize..5) {
        let up = fourier_upsample_1d(&vals, 12 * factor).unwrap();
        let m0 = vals.iter().sum::<f64>() / 12.0;
        let m1 = up.iter().sum::<f64>() / up.len() as f64;
        prop_assert!((m0 - m1).abs() < 1e-12);
    }

    #[test]
    fn upsample_is_exact_on_band_limited_fields(
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        new_n in 16usize..70,
    ) {
        let l = 4.0;
        let coarse = Axis { n: 16, half_length: l }.coords();
        let fine = Axis { n: new_n, half_length: l }.coords();
        let f: Vec<f64> = coarse.iter().map(|&x| band_limited(&coeffs, l, x)).collect();
        let up = fourier_upsample_1d(&f, new_n).unwrap();
        for (u, x) in up.iter().zip(&fine) {
            prop_assert!((u - band_limited(&coeffs, l, *x)).abs() < 1e-11);
        }
    }

    #[test]
    fn upsample_2d_mean(vals in proptest::collection::vec(-5.0f64..5.0, 24)) {
        let up = fourier_upsample_2d(&vals, 6, 4, 12, 10).unwrap();
        let m0 = vals.iter().sum::<f64>() / 24.0;
        let m1 = up.iter().sum::<f64>() / 120.0;
        prop_assert!((m0 - m1).abs() < 1e-12);
    }

    #[test]
    fn max_abs_error_matches_scalar_loop(a in proptest::collection::vec(-5.0f64..5.0, 20), b in proptest::collection::vec(-5.0f64..5.0, 20)) {
        let got = max_abs_error(&[a.clone()], &[b.clone()]).unwrap();
        let mut want = 0.0;
        for i in 0..20 {
            let d = (a[i] - b[i]).abs();
            if d > want {
                want = d;
            }
        }
        prop_assert_eq!(got, want);
    }
}

#[test]
fn spectral_of_real_field_is_hermitian() {
    let g = GridSpec::new(16, 2.0, 2).unwrap();
    let f = g.sample(|x, y| (x * 1.3).sin() * (y - 0.2).cos() + x * 0.01);
    let s = g.forward(&f).unwrap();
    let (nx, ny) = (16, 16);
    for j in 0..ny {
        for i in 0..nx {
            let conj: Complex64 = s[((ny - j) % ny) * nx + (nx - i) % nx].conj();
            assert!((s[j * nx + i] - conj).norm() < 1e-12);
        }
    }
}
