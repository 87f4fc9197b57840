//! Fourth-order exponential time differencing Runge-Kutta schemes.
//!
//! Both schemes share the same final quadrature weights
//!
//! ```text
//! U+ = e^{L dt} U + dt [ (phi0 - 3 phi1 + 4 phi2) N(U)
//!                      + 2 (phi1 - 2 phi2) (N(s2) + N(s3))
//!                      + (4 phi2 - phi1) N(s4) ]
//! ```
//!
//! with every `phi` evaluated at `L dt`, and differ only in how the
//! intermediate stages `s2, s3, s4` are formed.

use super::{guard, ExpTables, SpectralSystem};
use crate::error::{Error, Result};
use crate::state::State;

#[derive(Clone, Copy)]
enum Variant {
    CoxMatthews,
    Krogstad,
}

/// Cox-Matthews ETDRK4:
///
/// ```text
/// a = E/2 U + dt/2 phi0(L dt/2) N(U)
/// b = E/2 U + dt/2 phi0(L dt/2) N(a)
/// c = E/2 a + dt/2 phi0(L dt/2) (2 N(b) - N(U))
/// ```
pub fn etdrk4_step(sys: &mut SpectralSystem, state: &mut State, tables: &ExpTables, dt: f64) -> Result<()> {
    step(sys, state, tables, dt, Variant::CoxMatthews)
}

/// Krogstad's ETDRK4-B:
///
/// ```text
/// s2 = E/2 U + dt/2 phi0(L dt/2) N(U)
/// s3 = E/2 U + dt/2 [phi0 - 2 phi1](L dt/2) N(U) + dt phi1(L dt/2) N(s2)
/// s4 = E U + dt [phi0 - 2 phi1](L dt) N(U) + 2 dt phi1(L dt) N(s3)
/// ```
pub fn etdrk4b_step(sys: &mut SpectralSystem, state: &mut State, tables: &ExpTables, dt: f64) -> Result<()> {
    step(sys, state, tables, dt, Variant::Krogstad)
}

fn step(sys: &mut SpectralSystem, state: &mut State, tables: &ExpTables, dt: f64, variant: Variant) -> Result<()> {
    sys.check_state(state)?;
    if tables.dt != dt {
        return Err(Error::InvalidParameter(format!(
            "tables were built for dt = {} but the step uses dt = {dt}",
            tables.dt
        )));
    }
    let t_end = state.t + dt;
    let h = dt;
    let hh = 0.5 * dt;

    let mut n1 = sys.zeros_spec();
    let mut n2 = sys.zeros_spec();
    let mut n3 = sys.zeros_spec();
    let mut n4 = sys.zeros_spec();
    let mut s2 = sys.zeros_spec();
    let mut stage = sys.zeros_spec();
    let mut phys = sys.zeros_phys();

    sys.nonlinear(&state.physical, 1.0, &mut n1);

    // second stage is common to both variants
    for (s, tab) in tables.species.iter().enumerate() {
        let u = &state.spectral[s];
        for (i, w) in s2[s].iter_mut().enumerate() {
            *w = tab.e_half[i] * u[i] + n1[s][i] * (hh * tab.phi0_half[i]);
        }
    }
    sys.to_physical(&s2, &mut phys);
    guard(&phys, state.t)?;
    sys.nonlinear(&phys, 1.0, &mut n2);

    for (s, tab) in tables.species.iter().enumerate() {
        let u = &state.spectral[s];
        for (i, w) in stage[s].iter_mut().enumerate() {
            *w = match variant {
                Variant::CoxMatthews => tab.e_half[i] * u[i] + n2[s][i] * (hh * tab.phi0_half[i]),
                Variant::Krogstad => {
                    tab.e_half[i] * u[i]
                        + n1[s][i] * (hh * (tab.phi0_half[i] - 2.0 * tab.phi1_half[i]))
                        + n2[s][i] * (h * tab.phi1_half[i])
                }
            };
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, state.t)?;
    sys.nonlinear(&phys, 1.0, &mut n3);

    for (s, tab) in tables.species.iter().enumerate() {
        let u = &state.spectral[s];
        for (i, w) in stage[s].iter_mut().enumerate() {
            *w = match variant {
                Variant::CoxMatthews => {
                    tab.e_half[i] * s2[s][i]
                        + (n3[s][i] * 2.0 - n1[s][i]) * (hh * tab.phi0_half[i])
                }
                Variant::Krogstad => {
                    tab.e_full[i] * u[i]
                        + n1[s][i] * (h * (tab.phi0[i] - 2.0 * tab.phi1[i]))
                        + n3[s][i] * (2.0 * h * tab.phi1[i])
                }
            };
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, state.t)?;
    sys.nonlinear(&phys, 1.0, &mut n4);

    for (s, tab) in tables.species.iter().enumerate() {
        let u = &state.spectral[s];
        for (i, w) in stage[s].iter_mut().enumerate() {
            let (p0, p1, p2) = (tab.phi0[i], tab.phi1[i], tab.phi2[i]);
            let w1 = h * (4.0 * p2 - 3.0 * p1 + p0);
            let w23 = 2.0 * h * (p1 - 2.0 * p2);
            let w4 = h * (4.0 * p2 - p1);
            *w = tab.e_full[i] * u[i] + n1[s][i] * w1 + (n2[s][i] + n3[s][i]) * w23 + n4[s][i] * w4;
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, t_end)?;

    state.spectral = stage;
    state.physical = phys;
    state.t = t_end;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::models::{Linear, ModelSpec, NoReaction};
    use crate::stepper::build_exp_tables;
    use std::sync::Arc;

    type StepFn = fn(&mut SpectralSystem, &mut State, &ExpTables, f64) -> Result<()>;
    const SCHEMES: [(&str, StepFn); 2] = [("etdrk4", etdrk4_step), ("etdrk4b", etdrk4b_step)];

    #[test]
    fn pure_diffusion_is_exact_decay() {
        let g = GridSpec::new(16, 4.0, 2).unwrap();
        let m = ModelSpec::custom("heat", vec![1.0, 0.05], Arc::new(NoReaction { species: 2 }), 2, (16, 4.0)).unwrap();
        for (name, f) in SCHEMES {
            let mut sys = SpectralSystem::new(&m, &g).unwrap();
            for dt in [0.05, 1.0, 10.0] {
                let u = g.sample(|x, y| (-(x * x + 2.0 * y * y) / 3.0).exp());
                let v = g.sample(|x, y| (0.5 * x).sin() * (0.25 * y).cos());
                let mut st = State::from_physical(&g, 0.0, vec![u, v]).unwrap();
                let u0 = st.spectral.clone();
                let tab = build_exp_tables(&sys.symbol, dt).unwrap();
                f(&mut sys, &mut st, &tab, dt).unwrap();
                for s in 0..2 {
                    let scale = u0[s].iter().map(|z| z.norm()).fold(0.0, f64::max);
                    for i in 0..g.len() {
                        let expect = u0[s][i] * tab.species[s].e_full[i];
                        assert!((st.spectral[s][i] - expect).norm() <= 1e-14 * scale, "{name} dt={dt}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_symbol_reduces_to_classical_rk4() {
        let g = GridSpec::new(4, 1.0, 1).unwrap();
        let m = ModelSpec::custom("grow", vec![0.0], Arc::new(Linear { rates: vec![1.0] }), 1, (4, 1.0)).unwrap();
        for (name, f) in SCHEMES {
            let mut errs = Vec::new();
            for h in [0.2_f64, 0.1] {
                let mut sys = SpectralSystem::new(&m, &g).unwrap();
                let mut st = State::from_physical(&g, 0.0, vec![vec![1.0; 4]]).unwrap();
                let tab = build_exp_tables(&sys.symbol, h).unwrap();
                f(&mut sys, &mut st, &tab, h).unwrap();
                let textbook = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
                assert!((st.physical[0][0] - textbook).abs() < 1e-15, "{name}");
                errs.push((st.physical[0][0] - h.exp()).abs());
            }
            // local error O(h^5): halving h shrinks it ~32x
            let ratio = errs[0] / errs[1];
            assert!(ratio > 28.0 && ratio < 36.0, "{name}: {ratio}");
        }
    }

    #[test]
    fn work_counts_match_rk4() {
        let g = GridSpec::new(16, 4.0, 1).unwrap();
        let m = ModelSpec::by_name("gray1d", &[]).unwrap();
        for (_, f) in SCHEMES {
            let mut sys = SpectralSystem::new(&m, &g).unwrap();
            let mut st = m.initial_condition(&g).unwrap();
            let tab = build_exp_tables(&sys.symbol, 0.1).unwrap();
            f(&mut sys, &mut st, &tab, 0.1).unwrap();
            assert_eq!(sys.counters.reaction_evals, 4);
            assert_eq!(sys.counters.forward_transforms, 8);
            assert_eq!(sys.counters.inverse_transforms, 8);
        }
    }
}
