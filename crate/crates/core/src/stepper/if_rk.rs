//! Integrating-factor Runge-Kutta schemes.
//!
//! With `~U = e^{-Lt} U` the system becomes `~U' = e^{-Lt} N(e^{Lt} ~U)`,
//! which carries no stiff linear term. Writing the stages back in terms of
//! `U`, stage `i` of an explicit tableau `(a, b, c)` reads
//!
//! ```text
//! U_i     = e^{L a_i dt} U_n + sum_j b_ij e^{L (a_i - a_j) dt} k_j
//! k_i     = dt N(U_i)
//! U_{n+1} = e^{L dt} U_n + sum_j c_j e^{L (1 - a_j) dt} k_j
//! ```
//!
//! so everything stays in spectral space and only `N` needs a round trip.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{guard, ExpTables, SpectralSystem};
use crate::error::{Error, Result};
use crate::state::State;

/// Classical fourth-order integrating-factor step.
///
/// Four reaction evaluations, four forward and four inverse transforms per
/// species. Stage algebra:
///
/// ```text
/// k1 = dt F[f(u)]
/// u2 = F^-1[E/2 (U + k1/2)]
/// u3 = F^-1[E/2 U + k2/2]
/// u4 = F^-1[E U + E/2 k3]
/// U+ = E U + (E k1 + 2 E/2 (k2 + k3) + k4) / 6
/// ```
pub fn if_rk4_step(sys: &mut SpectralSystem, state: &mut State, tables: &ExpTables, dt: f64) -> Result<()> {
    sys.check_state(state)?;
    check_tables(tables, dt)?;
    let t_end = state.t + dt;

    let mut k1 = sys.zeros_spec();
    let mut k2 = sys.zeros_spec();
    let mut k3 = sys.zeros_spec();
    let mut k4 = sys.zeros_spec();
    let mut stage = sys.zeros_spec();
    let mut phys = sys.zeros_phys();

    sys.nonlinear(&state.physical, dt, &mut k1);

    for (s, tab) in tables.species.iter().enumerate() {
        for (i, w) in stage[s].iter_mut().enumerate() {
            *w = tab.e_half[i] * (state.spectral[s][i] + k1[s][i] * 0.5);
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, state.t)?;
    sys.nonlinear(&phys, dt, &mut k2);

    for (s, tab) in tables.species.iter().enumerate() {
        for (i, w) in stage[s].iter_mut().enumerate() {
            *w = tab.e_half[i] * state.spectral[s][i] + k2[s][i] * 0.5;
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, state.t)?;
    sys.nonlinear(&phys, dt, &mut k3);

    for (s, tab) in tables.species.iter().enumerate() {
        for (i, w) in stage[s].iter_mut().enumerate() {
            *w = tab.e_full[i] * state.spectral[s][i] + tab.e_half[i] * k3[s][i];
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, state.t)?;
    sys.nonlinear(&phys, dt, &mut k4);

    for (s, tab) in tables.species.iter().enumerate() {
        for (i, w) in stage[s].iter_mut().enumerate() {
            let (e, eh) = (tab.e_full[i], tab.e_half[i]);
            *w = e * state.spectral[s][i]
                + (e * k1[s][i] + 2.0 * eh * (k2[s][i] + k3[s][i]) + k4[s][i]) / 6.0;
        }
    }
    sys.to_physical(&stage, &mut phys);
    guard(&phys, t_end)?;

    state.spectral = stage;
    state.physical = phys;
    state.t = t_end;
    Ok(())
}

fn check_tables(tables: &ExpTables, dt: f64) -> Result<()> {
    if tables.dt != dt {
        return Err(Error::InvalidParameter(format!(
            "tables were built for dt = {} but the step uses dt = {dt}",
            tables.dt
        )));
    }
    Ok(())
}

/// An explicit Runge-Kutta tableau with an embedded lower-order solution.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddedTableau {
    pub a: [f64; 6],
    pub b: [[f64; 5]; 6],
    /// Fifth-order weights (propagated, local extrapolation).
    pub c_high: [f64; 6],
    /// Fourth-order weights (error estimate only).
    pub c_low: [f64; 6],
}

/// Cash-Karp 4(5) coefficients.
pub const CASH_KARP: EmbeddedTableau = EmbeddedTableau {
    a: [0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0],
    b: [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
        [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
        [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
        [
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ],
    c_high: [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0],
    c_low: [
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        1.0 / 4.0,
    ],
};

/// Adaptive step-size controller state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub rel_tol: f64,
    pub safety: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Added to `|u|` in the error scale so quiescent regions do not demand
    /// zero error.
    pub abs_floor: f64,
    /// Growth and shrink limits per step.
    pub max_growth: f64,
    pub max_shrink: f64,
    pub accepted: u64,
    pub rejected: u64,
}

impl StepControl {
    pub fn new(dt: f64, rel_tol: f64) -> Self {
        Self {
            dt,
            rel_tol,
            safety: 0.9,
            dt_min: 1e-8,
            dt_max: 10.0,
            abs_floor: 1e-8,
            max_growth: 5.0,
            max_shrink: 0.1,
            accepted: 0,
            rejected: 0,
        }
    }

    /// A controller that never changes `dt`; used to run Cash-Karp at a fixed step.
    pub fn pinned(dt: f64, rel_tol: f64) -> Self {
        Self {
            dt_min: dt,
            dt_max: dt,
            ..Self::new(dt, rel_tol)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.dt_min > 0.0
            && self.dt_min <= self.dt_max
            && self.dt >= self.dt_min
            && self.dt <= self.dt_max
            && self.safety > 0.0
            && self.safety <= 1.0
            && self.abs_floor >= 0.0
            && self.max_growth >= 1.0
            && self.max_shrink > 0.0
            && self.max_shrink <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "step control needs rel_tol > 0 and dt_min <= dt <= dt_max, got {self:?}"
            )))
        }
    }
}

/// Result of one adaptive attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ck45Outcome {
    pub accepted: bool,
    /// Step size that was attempted.
    pub dt: f64,
    /// Scaled error norm; `<= 1` means accepted.
    pub error: f64,
    /// Unscaled max-norm of the fourth/fifth order difference.
    pub raw_error: f64,
    /// Proposed size for the next attempt.
    pub next_dt: f64,
}

/// Exponential factors `e^{L c dt}` for every distinct `c` the tableau needs.
struct Factors {
    by_exponent: HashMap<u64, Vec<Vec<f64>>>,
}

impl Factors {
    fn build(sys: &SpectralSystem, tab: &EmbeddedTableau, dt: f64) -> Self {
        let mut exps: Vec<f64> = Vec::new();
        for i in 0..6 {
            exps.push(tab.a[i]);
            exps.push(1.0 - tab.a[i]);
            for j in 0..i {
                exps.push(tab.a[i] - tab.a[j]);
            }
        }
        let mut by_exponent = HashMap::new();
        for c in exps {
            by_exponent.entry(c.to_bits()).or_insert_with(|| {
                sys.symbol
                    .species
                    .iter()
                    .map(|l| l.iter().map(|v| (v * c * dt).exp()).collect())
                    .collect()
            });
        }
        Self { by_exponent }
    }

    fn get(&self, c: f64, s: usize) -> &[f64] {
        &self.by_exponent[&c.to_bits()][s]
    }
}

/// One attempted integrating-factor Cash-Karp step of size `ctrl.dt`.
///
/// The fifth-order solution is propagated. The error is the max-norm of the
/// physical fourth/fifth order difference, scaled componentwise by
/// `rel_tol * (|u| + abs_floor)`. On acceptance `state` advances and the next
/// step is `safety * dt * err^(-1/5)`; on rejection `state` is untouched and
/// the retry uses `err^(-1/4)`. Both are clamped to `[dt_min, dt_max]` and to
/// the growth/shrink limits.
pub fn if_ck45_step(sys: &mut SpectralSystem, state: &mut State, ctrl: &mut StepControl) -> Result<Ck45Outcome> {
    sys.check_state(state)?;
    ctrl.validate()?;
    let tab = &CASH_KARP;
    let dt = ctrl.dt;
    let factors = Factors::build(sys, tab, dt);

    let mut k: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(6);
    let mut stage = sys.zeros_spec();
    let mut phys = sys.zeros_phys();
    let mut stage_failed = false;

    let mut k0 = sys.zeros_spec();
    sys.nonlinear(&state.physical, dt, &mut k0);
    k.push(k0);

    for i in 1..6 {
        for s in 0..sys.species() {
            let ea = factors.get(tab.a[i], s);
            for (m, w) in stage[s].iter_mut().enumerate() {
                *w = state.spectral[s][m] * ea[m];
            }
            for j in 0..i {
                let b = tab.b[i][j];
                if b == 0.0 {
                    continue;
                }
                let e = factors.get(tab.a[i] - tab.a[j], s);
                for (m, w) in stage[s].iter_mut().enumerate() {
                    *w += k[j][s][m] * (b * e[m]);
                }
            }
        }
        sys.to_physical(&stage, &mut phys);
        if guard(&phys, state.t).is_err() {
            stage_failed = true;
            break;
        }
        let mut ki = sys.zeros_spec();
        sys.nonlinear(&phys, dt, &mut ki);
        k.push(ki);
    }

    let mut raw_error = f64::NAN;
    let mut error = f64::NAN;
    let mut next_phys = sys.zeros_phys();
    if !stage_failed {
        let mut diff = sys.zeros_spec();
        for s in 0..sys.species() {
            let ef = factors.get(1.0, s);
            for (m, w) in stage[s].iter_mut().enumerate() {
                *w = state.spectral[s][m] * ef[m];
            }
            for j in 0..6 {
                let e = factors.get(1.0 - tab.a[j], s);
                let (ch, cd) = (tab.c_high[j], tab.c_high[j] - tab.c_low[j]);
                for m in 0..stage[s].len() {
                    let kj = k[j][s][m] * e[m];
                    stage[s][m] += kj * ch;
                    diff[s][m] += kj * cd;
                }
            }
        }
        sys.to_physical(&stage, &mut next_phys);
        let mut diff_phys = sys.zeros_phys();
        sys.to_physical(&diff, &mut diff_phys);
        if guard(&next_phys, state.t + dt).is_ok() {
            raw_error = 0.0;
            error = 0.0;
            for (d, u) in diff_phys.iter().zip(&next_phys) {
                for (&dv, &uv) in d.iter().zip(u) {
                    raw_error = raw_error.max(dv.abs());
                    error = error.max(dv.abs() / (ctrl.rel_tol * (uv.abs() + ctrl.abs_floor)));
                }
            }
        }
    }

    let accepted = error <= 1.0;
    let next_dt = if accepted {
        let factor = if error == 0.0 {
            ctrl.max_growth
        } else {
            (ctrl.safety * error.powf(-0.2)).min(ctrl.max_growth)
        };
        (dt * factor).clamp(ctrl.dt_min, ctrl.dt_max)
    } else {
        let factor = if error.is_finite() {
            (ctrl.safety * error.powf(-0.25)).max(ctrl.max_shrink)
        } else {
            ctrl.max_shrink
        };
        (dt * factor).clamp(ctrl.dt_min, ctrl.dt_max)
    };

    if accepted {
        state.spectral = stage;
        state.physical = next_phys;
        state.t += dt;
        ctrl.accepted += 1;
    } else {
        ctrl.rejected += 1;
        if dt <= ctrl.dt_min {
            return Err(if error.is_finite() {
                Error::StepUnderflow { t: state.t, dt, dt_min: ctrl.dt_min }
            } else {
                Error::BlowUp { t: state.t, max_abs: f64::INFINITY }
            });
        }
    }
    ctrl.dt = next_dt;

    Ok(Ck45Outcome {
        accepted,
        dt,
        error,
        raw_error,
        next_dt,
    })
}
