//! The gray1d RK4 integrating-factor loop written out directly against
//! rustfft, independent of the library stepper.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

struct Script {
    n: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Script {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Self {
            n,
            fwd: p.plan_fft_forward(n),
            inv: p.plan_fft_inverse(n),
        }
    }
    fn fft(&self, u: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut v);
        v
    }
    fn real_ifft(&self, v: &[Complex64]) -> Vec<f64> {
        let mut w = v.to_vec();
        self.inv.process(&mut w);
        w.iter().map(|z| z.re / self.n as f64).collect()
    }
}

/// Returns (u, v) after `steps` steps of size `dt`.
pub fn gray1d_rk4_script(n: usize, steps: usize, dt: f64) -> [Vec<f64>; 2] {
    let (l, epsilon) = (50.0, 0.01_f64);
    let a = 9.0 * epsilon;
    let b = 0.4 * epsilon.powf(1.0 / 3.0);
    let s = Script::new(n);
    let x: Vec<f64> = (0..n).map(|i| (2.0 * l / n as f64) * (i as f64 - (n / 2) as f64)).collect();
    let bump: Vec<f64> = x.iter().map(|x| (PI * (x - l) / (2.0 * l)).sin().powi(100)).collect();
    let mut u = [
        bump.iter().map(|s| 1.0 - 0.5 * s).collect::<Vec<_>>(),
        bump.iter().map(|s| 0.25 * s).collect::<Vec<_>>(),
    ];
    let mut uhat = [s.fft(&u[0]), s.fft(&u[1])];
    let ksq: Vec<f64> = (0..n)
        .map(|i| {
            let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            (PI / l * k).powi(2)
        })
        .collect();
    let e: [Vec<f64>; 2] = [
        ksq.iter().map(|k| (-dt * k / 2.0).exp()).collect(),
        ksq.iter().map(|k| (-epsilon * dt * k / 2.0).exp()).collect(),
    ];
    let e2: [Vec<f64>; 2] = [e[0].iter().map(|v| v * v).collect(), e[1].iter().map(|v| v * v).collect()];
    let rhside = |u: &[Vec<f64>; 2]| -> [Vec<f64>; 2] {
        let t1: Vec<f64> = (0..n).map(|i| u[0][i] * u[1][i] * u[1][i]).collect();
        [
            (0..n).map(|i| -t1[i] + a * (1.0 - u[0][i])).collect(),
            (0..n).map(|i| t1[i] - b * u[1][i]).collect(),
        ]
    };
    let dtfft = |r: [Vec<f64>; 2]| -> [Vec<Complex64>; 2] {
        [0, 1].map(|c| s.fft(&r[c]).into_iter().map(|z| z * dt).collect())
    };
    let comb = |f: &dyn Fn(usize, usize) -> Complex64| -> [Vec<f64>; 2] {
        [0, 1].map(|c| s.real_ifft(&(0..n).map(|i| f(c, i)).collect::<Vec<_>>()))
    };
    for _ in 0..steps {
        let k1 = dtfft(rhside(&u));
        let u2 = comb(&|c, i| (uhat[c][i] + k1[c][i] / 2.0) * e[c][i]);
        let k2 = dtfft(rhside(&u2));
        let u3 = comb(&|c, i| uhat[c][i] * e[c][i] + k2[c][i] / 2.0);
        let k3 = dtfft(rhside(&u3));
        let u4 = comb(&|c, i| uhat[c][i] * e2[c][i] + k3[c][i] * e[c][i]);
        let k4 = dtfft(rhside(&u4));
        for c in 0..2 {
            for i in 0..n {
                uhat[c][i] = uhat[c][i] * e2[c][i]
                    + (k1[c][i] * e2[c][i] + (k2[c][i] + k3[c][i]) * (2.0 * e[c][i]) + k4[c][i]) / 6.0;
            }
        }
        u = [s.real_ifft(&uhat[0]), s.real_ifft(&uhat[1])];
    }
    u
}
