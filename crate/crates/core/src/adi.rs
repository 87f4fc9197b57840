//! Alternating-direction-implicit stepping with dense Fourier
//! differentiation matrices, for single-species 2D models.
//!
//! A field is held as a matrix `U` with one row per `y` node and one column
//! per `x` node, so `D_y` acts from the left and `D_x^T` from the right. With
//! `h = dt/2`, `A = I - h D_y` and `B = I - h D_x^T`, a step is
//!
//! ```text
//! U' = A^{-1} U (I + h D_x^T) + A^{-1} h F(U)
//! U+ = (I + h D_y) U' B^{-1} + h F(W) B^{-1}
//! ```
//!
//! where `W = U'` in the [`AdiReaction::AsPrinted`] form. That form loses a
//! `dt^2/4 F'(U) U_t` term per step and converges at first order when the
//! reaction is nonzero; [`AdiReaction::Extrapolated`] uses `W = 2U' - U`,
//! which restores it and gives second order.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::models::ModelSpec;
use crate::state::State;
use crate::stepper::guard;

/// Second-derivative Fourier differentiation matrix on `n` periodic nodes
/// over `[-L, L)`.
pub fn build_diff_matrix(n: usize, half_length: f64) -> Result<DMatrix<f64>> {
    let grid = GridSpec::from_axes(&[Axis { n, half_length }])?;
    let symbol = grid.omega_sq().to_vec();
    let mut d = DMatrix::zeros(n, n);
    let mut work = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        grid.forward_into(&e, &mut work)?;
        for (z, w) in work.iter_mut().zip(&symbol) {
            *z *= -w;
        }
        grid.inverse_real_into(&mut work, &mut col)?;
        d.set_column(j, &nalgebra::DVector::from_column_slice(&col));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdiReaction {
    /// Reaction in the second half step evaluated at the half-step field.
    AsPrinted,
    /// Reaction in the second half step evaluated at `2 U' - U`.
    #[default]
    Extrapolated,
}

/// Differentiation matrices for one grid and the factorizations for one `dt`.
#[derive(Debug, Clone)]
pub struct DiffMatrix {
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
    pub diffusivity: f64,
    dt: f64,
    /// `I + h D_y` and `I + h D_x^T`.
    explicit_y: DMatrix<f64>,
    explicit_xt: DMatrix<f64>,
    /// LU of `A = I - h D_y` and of `B^T = I - h D_x`.
    lu_a: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_bt: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DiffMatrix {
    pub fn new(grid: &GridSpec, diffusivity: f64, dt: f64) -> Result<Self> {
        if grid.dims() != 2 {
            return Err(Error::InvalidGrid("ADI needs a 2D grid".into()));
        }
        let ax = grid.axis(0);
        let ay = grid.axis(1);
        let dx = build_diff_matrix(ax.n, ax.half_length)? * diffusivity;
        let dy = build_diff_matrix(ay.n, ay.half_length)? * diffusivity;
        let mut m = Self {
            explicit_y: dy.clone(),
            explicit_xt: dx.clone(),
            lu_a: LU::new(DMatrix::identity(1, 1)),
            lu_bt: LU::new(DMatrix::identity(1, 1)),
            dx,
            dy,
            diffusivity,
            dt: f64::NAN,
        };
        m.set_dt(dt)?;
        Ok(m)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Refactorizes for a new step size.
    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let h = 0.5 * dt;
        let (nx, ny) = (self.dx.nrows(), self.dy.nrows());
        let a = DMatrix::identity(ny, ny) - &self.dy * h;
        let bt = DMatrix::identity(nx, nx) - &self.dx * h;
        self.explicit_y = DMatrix::identity(ny, ny) + &self.dy * h;
        self.explicit_xt = DMatrix::identity(nx, nx) + self.dx.transpose() * h;
        self.lu_a = LU::new(a);
        self.lu_bt = LU::new(bt);
        // the eigenvalues of D are <= 0, so I - hD is never singular
        assert!(self.lu_a.is_invertible() && self.lu_bt.is_invertible());
        self.dt = dt;
        Ok(())
    }

    fn solve_left(&self, m: &mut DMatrix<f64>) {
        let ok = self.lu_a.solve_mut(m);
        debug_assert!(ok);
    }

    /// `m <- m B^{-1}`, computed as `(B^{-T} m^T)^T`.
    fn solve_right(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut t = m.transpose();
        let ok = self.lu_bt.solve_mut(&mut t);
        debug_assert!(ok);
        t.transpose()
    }
}

/// Wall time spent in each part of an ADI run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdiTiming {
    pub factorization: Duration,
    pub multiplies: Duration,
    pub solves: Duration,
    pub reaction: Duration,
}

impl AdiTiming {
    pub fn total(&self) -> Duration {
        self.factorization + self.multiplies + self.solves + self.reaction
    }
}

#[derive(Debug, Clone)]
pub struct AdiSummary {
    pub final_state: State,
    pub steps: u64,
    pub reaction_evals: u64,
    pub snapshots: usize,
    pub wall_time: Duration,
    pub timing: AdiTiming,
}

/// The pieces of a model the ADI step needs.
#[derive(Debug, Clone)]
pub struct AdiSystem {
    pub mats: DiffMatrix,
    pub variant: AdiReaction,
    model: ModelSpec,
    nx: usize,
    ny: usize,
    pub timing: AdiTiming,
    pub reaction_evals: u64,
}

impl AdiSystem {
    pub fn new(model: &ModelSpec, grid: &GridSpec, dt: f64, variant: AdiReaction) -> Result<Self> {
        if model.species() != 1 || model.dims != 2 {
            return Err(Error::InvalidConfig(format!(
                "ADI handles single-species 2D models only; {} has {} species in {}D",
                model.name,
                model.species(),
                model.dims
            )));
        }
        let started = Instant::now();
        let mats = DiffMatrix::new(grid, model.diffusivities[0], dt)?;
        let timing = AdiTiming {
            factorization: started.elapsed(),
            ..Default::default()
        };
        Ok(Self {
            mats,
            variant,
            model: model.clone(),
            nx: grid.nx(),
            ny: grid.ny(),
            timing,
            reaction_evals: 0,
        })
    }

    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        let started = Instant::now();
        self.mats.set_dt(dt)?;
        self.timing.factorization += started.elapsed();
        Ok(())
    }

    fn reaction(&mut self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let started = Instant::now();
        // row-major (x fastest) is nalgebra's column-major transpose
        let flat: Vec<f64> = u.transpose().as_slice().to_vec();
        let mut rates = vec![vec![0.0; flat.len()]];
        self.model.reaction.apply(&[flat], &mut rates);
        self.reaction_evals += 1;
        let out = DMatrix::from_row_slice(self.ny, self.nx, &rates[0]);
        self.timing.reaction += started.elapsed();
        out
    }

    /// One ADI step of size `self.mats.dt()` on `u` (rows `y`, columns `x`).
    pub fn step(&mut self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let h = 0.5 * self.mats.dt;
        let f0 = self.reaction(u);

        let t = Instant::now();
        let mut half = u * &self.mats.explicit_xt + f0 * h;
        self.timing.multiplies += t.elapsed();
        let t = Instant::now();
        self.mats.solve_left(&mut half);
        self.timing.solves += t.elapsed();

        let f1 = match self.variant {
            AdiReaction::AsPrinted => self.reaction(&half),
            AdiReaction::Extrapolated => self.reaction(&(&half * 2.0 - u)),
        };
        let t = Instant::now();
        let rhs = &self.mats.explicit_y * &half + f1 * h;
        self.timing.multiplies += t.elapsed();
        let t = Instant::now();
        let out = self.mats.solve_right(&rhs);
        self.timing.solves += t.elapsed();
        out
    }
}

/// Field (x fastest) to an `ny x nx` matrix and back.
pub fn to_matrix(grid: &GridSpec, field: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(grid.ny(), grid.nx(), field)
}

pub fn from_matrix(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Convenience single step on a flat field.
pub fn adi_step(model: &ModelSpec, grid: &GridSpec, field: &[f64], dt: f64, variant: AdiReaction) -> Result<Vec<f64>> {
    if field.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            actual: field.len(),
        });
    }
    let mut sys = AdiSystem::new(model, grid, dt, variant)?;
    Ok(from_matrix(&sys.step(&to_matrix(grid, field))))
}

/// Drives `initial` to `t_final` with fixed ADI steps, shortening the last
/// one, and calls `sink` on the initial state, every `snapshot_every` and the
/// final state.
pub fn adi_integrate(
    model: &ModelSpec,
    grid: &GridSpec,
    initial: &State,
    dt: f64,
    t_final: f64,
    snapshot_every: Option<f64>,
    variant: AdiReaction,
    sink: &mut dyn FnMut(&State) -> Result<()>,
) -> Result<AdiSummary> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_final must be >= 0, got {t_final}")));
    }
    if let Some(every) = snapshot_every {
        if !(every > 0.0 && every.is_finite()) {
            return Err(Error::InvalidConfig(format!("snapshot cadence must be > 0, got {every}")));
        }
    }
    let started = Instant::now();
    let mut sys = AdiSystem::new(model, grid, dt, variant)?;
    if initial.species() != 1 || initial.physical[0].len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            actual: initial.physical.first().map_or(0, Vec::len),
        });
    }
    sink(initial)?;
    let mut snapshots = 1;
    let mut u = to_matrix(grid, &initial.physical[0]);
    let t0 = initial.t;
    let full = ((t_final / dt) * (1.0 + 1e-9)).floor() as u64;
    let remainder = t_final - full as f64 * dt;
    let partial = remainder > 1e-9 * dt;
    let total = full + u64::from(partial);
    let mut next_snap = snapshot_every;
    for k in 0..total {
        if k == full {
            sys.set_dt(remainder)?;
        }
        u = sys.step(&u);
        let t = if k < full { t0 + (k + 1) as f64 * dt } else { t0 + t_final };
        guard(&[u.as_slice().to_vec()], t)?;
        if k + 1 < total {
            if let (Some(next), Some(every)) = (next_snap.as_mut(), snapshot_every) {
                if t - t0 + 1e-9 * dt >= *next {
                    sink(&State::from_physical(grid, t, vec![from_matrix(&u)])?)?;
                    snapshots += 1;
                    while *next <= t - t0 + 1e-9 * dt {
                        *next += every;
                    }
                }
            }
        }
    }
    let final_state = if total == 0 {
        initial.clone()
    } else {
        let s = State::from_physical(grid, t0 + t_final, vec![from_matrix(&u)])?;
        sink(&s)?;
        snapshots += 1;
        s
    };
    Ok(AdiSummary {
        final_state,
        steps: total,
        reaction_evals: sys.reaction_evals,
        snapshots,
        wall_time: started.elapsed(),
        timing: sys.timing,
    })
}
