use std::time::{Duration, Instant};

use super::{
    build_exp_tables, etdrk4_step, etdrk4b_step, if_ck45_step, if_rk4_step, Counters, ExpTables, Scheme,
    SpectralSystem, StepControl,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::models::ModelSpec;
use crate::state::State;

#[derive(Debug, Clone, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    Adaptive(StepControl),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub scheme: Scheme,
    pub step: StepSize,
    pub t_final: f64,
    /// Time between snapshots; `None` records only the initial and final states.
    pub snapshot_every: Option<f64>,
    pub dealias: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: State,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub counters: Counters,
    pub snapshots: usize,
    pub wall_time: Duration,
    /// Every accepted step size, in order.
    pub dt_history: Vec<f64>,
}

impl RunSummary {
    pub fn mean_dt(&self) -> f64 {
        if self.dt_history.is_empty() {
            0.0
        } else {
            self.dt_history.iter().sum::<f64>() / self.dt_history.len() as f64
        }
    }
}

/// Relative slack when deciding that a time has been reached.
const TIME_SLACK: f64 = 1e-9;

impl IntegrateOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if let Some(every) = self.snapshot_every {
            if !(every > 0.0 && every.is_finite()) {
                return Err(Error::InvalidConfig(format!("snapshot cadence must be > 0, got {every}")));
            }
        }
        match (&self.step, self.scheme) {
            (StepSize::Fixed(dt), s) if !s.is_adaptive() => {
                if !(*dt > 0.0 && dt.is_finite()) {
                    return Err(Error::InvalidConfig(format!("dt must be > 0, got {dt}")));
                }
                Ok(())
            }
            (StepSize::Adaptive(ctrl), Scheme::Ck45) => ctrl.validate(),
            (StepSize::Adaptive(_), s) if s.is_etd() => Err(Error::InvalidConfig(format!(
                "{s} runs at a fixed step only; its phi tables would have to be rebuilt on every step change"
            ))),
            (StepSize::Adaptive(_), s) => Err(Error::InvalidConfig(format!("{s} runs at a fixed step only"))),
            (StepSize::Fixed(_), s) => Err(Error::InvalidConfig(format!("{s} needs an adaptive step control"))),
        }
    }
}

/// Drives `initial` to `t_final`, calling `sink` on the initial state, at
/// every snapshot time and on the final state.
///
/// Fixed-step runs take `floor(t_final / dt)` full steps and shorten the last
/// one to land exactly on `t_final`. Adaptive runs also clip steps so every
/// snapshot time is hit exactly.
pub fn integrate(
    model: &ModelSpec,
    grid: &GridSpec,
    initial: State,
    opts: &IntegrateOptions,
    sink: &mut dyn FnMut(&State) -> Result<()>,
) -> Result<RunSummary> {
    opts.validate()?;
    let started = Instant::now();
    let mut sys = SpectralSystem::new(model, grid)?.with_dealias(opts.dealias);
    sys.check_state(&initial)?;
    let mut state = initial;
    let mut snapshots = 0;
    let mut dt_history = Vec::new();
    let mut rejected = 0;

    sink(&state)?;
    snapshots += 1;
    let mut next_snap = opts.snapshot_every;
    let t0 = state.t;
    let t_end = t0 + opts.t_final;

    match &opts.step {
        StepSize::Fixed(dt) => {
            let dt = *dt;
            let full = ((opts.t_final / dt) * (1.0 + TIME_SLACK)).floor() as u64;
            let remainder = opts.t_final - full as f64 * dt;
            let partial = (remainder > TIME_SLACK * dt).then_some(remainder);
            let mut tables: Option<ExpTables> = None;
            let total = full + u64::from(partial.is_some());
            for k in 0..total {
                let h = if k < full { dt } else { partial.unwrap_or(dt) };
                if tables.as_ref().is_none_or(|t| t.dt != h) {
                    tables = Some(build_exp_tables(&sys.symbol, h)?);
                }
                let tab = tables.as_ref().expect("built above");
                advance_fixed(opts.scheme, &mut sys, &mut state, tab, h)?;
                // pin to the nominal grid of times to avoid drift
                state.t = if k + 1 < total || partial.is_none() && k + 1 == full {
                    t0 + (k + 1) as f64 * dt
                } else {
                    t_end
                };
                dt_history.push(h);
                if k + 1 < total {
                    emit_due(&state, &mut next_snap, opts.snapshot_every, dt, sink, &mut snapshots)?;
                }
            }
        }
        StepSize::Adaptive(ctrl) => {
            let mut ctrl = ctrl.clone();
            while t_end - state.t > TIME_SLACK * ctrl.dt_min.max(1e-12) {
                let target = next_snap.map_or(t_end, |s| (t0 + s).min(t_end));
                let proposed = ctrl.dt;
                let remaining = target - state.t;
                let clipped = remaining < proposed;
                if clipped {
                    ctrl.dt = remaining.max(ctrl.dt_min.min(remaining));
                }
                let saved = ctrl.clone();
                let out = if clipped {
                    // a clipped step may fall below dt_min; relax the bound for it
                    let mut tmp = StepControl {
                        dt_min: ctrl.dt.min(ctrl.dt_min),
                        ..ctrl.clone()
                    };
                    let out = if_ck45_step(&mut sys, &mut state, &mut tmp)?;
                    ctrl.accepted = tmp.accepted;
                    ctrl.rejected = tmp.rejected;
                    ctrl.dt = if out.accepted {
                        out.next_dt.max(proposed.min(saved.dt_max)).clamp(saved.dt_min, saved.dt_max)
                    } else {
                        tmp.dt.max(saved.dt_min)
                    };
                    out
                } else {
                    if_ck45_step(&mut sys, &mut state, &mut ctrl)?
                };
                if out.accepted {
                    dt_history.push(out.dt);
                    if clipped && (target - state.t).abs() <= TIME_SLACK * target.abs().max(1.0) {
                        state.t = target;
                    }
                    if state.t < t_end {
                        emit_due(&state, &mut next_snap, opts.snapshot_every, 0.0, sink, &mut snapshots)?;
                    }
                } else {
                    rejected += 1;
                }
            }
            state.t = t_end;
        }
    }

    if opts.t_final > 0.0 {
        sink(&state)?;
        snapshots += 1;
    }

    Ok(RunSummary {
        final_state: state,
        accepted_steps: dt_history.len() as u64,
        rejected_steps: rejected,
        counters: sys.counters,
        snapshots,
        wall_time: started.elapsed(),
        dt_history,
    })
}

fn advance_fixed(scheme: Scheme, sys: &mut SpectralSystem, state: &mut State, tab: &ExpTables, h: f64) -> Result<()> {
    match scheme {
        Scheme::Rk4 => if_rk4_step(sys, state, tab, h),
        Scheme::Etdrk4 => etdrk4_step(sys, state, tab, h),
        Scheme::Etdrk4b => etdrk4b_step(sys, state, tab, h),
        Scheme::Ck45 => unreachable!("validated: ck45 is adaptive"),
    }
}

/// Emits a snapshot if the state has reached the next cadence time, then
/// advances the cadence past the current time.
fn emit_due(
    state: &State,
    next_snap: &mut Option<f64>,
    every: Option<f64>,
    dt: f64,
    sink: &mut dyn FnMut(&State) -> Result<()>,
    count: &mut usize,
) -> Result<()> {
    let (Some(next), Some(every)) = (next_snap.as_mut(), every) else {
        return Ok(());
    };
    let slack = TIME_SLACK * dt.max(every);
    if state.t + slack >= *next {
        sink(state)?;
        *count += 1;
        while *next <= state.t + slack {
            *next += every;
        }
    }
    Ok(())
}
