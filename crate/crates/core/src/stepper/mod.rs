//! Time integration in spectral space.
//!
//! Every scheme advances `U_t = L U + N(U)` mode by mode, where `L = -d Omega^2`
//! is diagonal and `N(U) = F[f(F^-1 U)]` is the transformed pointwise reaction.
//! The integrating-factor schemes ([`if_rk4_step`], [`if_ck45_step`]) run an
//! explicit Runge-Kutta method on `e^{-Lt} U`; the exponential time
//! differencing schemes ([`etdrk4_step`], [`etdrk4b_step`]) approximate the
//! variation-of-constants integral with [`crate::phi`] weights.

mod etd;
mod if_rk;
mod integrate;

pub use etd::{etdrk4_step, etdrk4b_step};
pub use if_rk::{if_ck45_step, if_rk4_step, Ck45Outcome, StepControl, CASH_KARP};
pub use integrate::{integrate, IntegrateOptions, RunSummary, StepSize};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::models::{ModelSpec, Reaction};
use crate::phi::phi;
use crate::state::State;

/// Any `|u|` above this aborts a run.
pub const BLOW_UP_THRESHOLD: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Rk4,
    Ck45,
    Etdrk4,
    Etdrk4b,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Rk4, Scheme::Ck45, Scheme::Etdrk4, Scheme::Etdrk4b];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::Ck45 => "ck45",
            Scheme::Etdrk4 => "etdrk4",
            Scheme::Etdrk4b => "etdrk4b",
        }
    }

    pub fn is_adaptive(self) -> bool {
        self == Scheme::Ck45
    }

    pub fn is_etd(self) -> bool {
        matches!(self, Scheme::Etdrk4 | Scheme::Etdrk4b)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown scheme `{s}` (valid: rk4, ck45, etdrk4, etdrk4b)"
            ))
        })
    }
}

/// Diagonal linear operator `L_s = -d_s Omega^2` for each species.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSymbol {
    pub species: Vec<Vec<f64>>,
}

impl LinearSymbol {
    pub fn new(grid: &GridSpec, diffusivities: &[f64]) -> Result<Self> {
        let species = diffusivities
            .iter()
            .map(|&d| {
                if !(d >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "diffusivity must be non-negative, got {d}"
                    )));
                }
                Ok(grid.omega_sq().iter().map(|w2| -d * w2).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { species })
    }
}

/// Per-mode weights for one species at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesTables {
    /// `e^{L dt}`
    pub e_full: Vec<f64>,
    /// `e^{L dt / 2}`
    pub e_half: Vec<f64>,
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub phi0_half: Vec<f64>,
    pub phi1_half: Vec<f64>,
}

/// Exponentials and phi-function weights for every species at one `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTables {
    pub dt: f64,
    pub species: Vec<SpeciesTables>,
}

/// Builds [`ExpTables`] for `symbol` at step `dt`.
pub fn build_exp_tables(symbol: &LinearSymbol, dt: f64) -> Result<ExpTables> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let species = symbol
        .species
        .iter()
        .map(|l| {
            let z: Vec<f64> = l.iter().map(|v| v * dt).collect();
            let zh: Vec<f64> = z.iter().map(|v| 0.5 * v).collect();
            SpeciesTables {
                e_full: z.iter().map(|v| v.exp()).collect(),
                e_half: zh.iter().map(|v| v.exp()).collect(),
                phi0: z.iter().map(|&v| phi(0, v)).collect(),
                phi1: z.iter().map(|&v| phi(1, v)).collect(),
                phi2: z.iter().map(|&v| phi(2, v)).collect(),
                phi0_half: zh.iter().map(|&v| phi(0, v)).collect(),
                phi1_half: zh.iter().map(|&v| phi(1, v)).collect(),
            }
        })
        .collect();
    Ok(ExpTables { dt, species })
}

/// Work counters, accumulated over the lifetime of a [`SpectralSystem`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub reaction_evals: u64,
    pub forward_transforms: u64,
    pub inverse_transforms: u64,
}

/// A model discretized on a grid: the pieces every stepper needs.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    pub grid: GridSpec,
    pub symbol: LinearSymbol,
    reaction: Arc<dyn Reaction>,
    dealias: Option<Vec<f64>>,
    pub counters: Counters,
}

impl SpectralSystem {
    pub fn new(model: &ModelSpec, grid: &GridSpec) -> Result<Self> {
        if model.dims != grid.dims() {
            return Err(Error::InvalidGrid(format!(
                "model {} is {}D but the grid is {}D",
                model.name,
                model.dims,
                grid.dims()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            symbol: LinearSymbol::new(grid, &model.diffusivities)?,
            reaction: model.reaction.clone(),
            dealias: None,
            counters: Counters::default(),
        })
    }

    /// Apply the 2/3-rule mask to every transformed reaction term.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on.then(|| self.grid.dealias_mask());
        self
    }

    pub fn species(&self) -> usize {
        self.symbol.species.len()
    }

    fn zeros_spec(&self) -> Vec<Vec<Complex64>> {
        vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; self.species()]
    }

    fn zeros_phys(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.grid.len()]; self.species()]
    }

    /// `N = F[f(u)]` for physical stage values `u`, scaled by `scale`.
    fn nonlinear(&mut self, phys: &[Vec<f64>], scale: f64, out: &mut [Vec<Complex64>]) {
        let mut rates = self.zeros_phys();
        self.reaction.apply(phys, &mut rates);
        self.counters.reaction_evals += 1;
        for (o, r) in out.iter_mut().zip(&rates) {
            self.grid
                .forward_into(r, o)
                .expect("stage buffers are sized by the grid");
            self.counters.forward_transforms += 1;
            if let Some(mask) = &self.dealias {
                for (z, m) in o.iter_mut().zip(mask) {
                    *z *= *m;
                }
            }
            if scale != 1.0 {
                o.iter_mut().for_each(|z| *z *= scale);
            }
        }
    }

    /// Realified inverse of every species.
    fn to_physical(&mut self, spec: &[Vec<Complex64>], out: &mut [Vec<f64>]) {
        let mut work = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (o, s) in out.iter_mut().zip(spec) {
            work.copy_from_slice(s);
            self.grid
                .inverse_real_into(&mut work, o)
                .expect("stage buffers are sized by the grid");
            self.counters.inverse_transforms += 1;
        }
    }

    fn check_state(&self, state: &State) -> Result<()> {
        if state.species() != self.species() {
            return Err(Error::InvalidParameter(format!(
                "state has {} species, model has {}",
                state.species(),
                self.species()
            )));
        }
        for (u, s) in state.physical.iter().zip(&state.spectral) {
            if u.len() != self.grid.len() || s.len() != self.grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: self.grid.len(),
                    actual: u.len().min(s.len()),
                });
            }
        }
        Ok(())
    }
}

/// Largest magnitude over all fields, or an error if it exceeds
/// [`BLOW_UP_THRESHOLD`] or is not finite.
pub(crate) fn guard(fields: &[Vec<f64>], t: f64) -> Result<f64> {
    let mut max_abs = 0.0_f64;
    for v in fields.iter().flatten() {
        if !v.is_finite() {
            return Err(Error::BlowUp { t, max_abs: f64::INFINITY });
        }
        max_abs = max_abs.max(v.abs());
    }
    if max_abs > BLOW_UP_THRESHOLD {
        return Err(Error::BlowUp { t, max_abs });
    }
    Ok(max_abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        let err = "rk5".parse::<Scheme>().unwrap_err().to_string();
        assert!(err.contains("rk4, ck45, etdrk4, etdrk4b"));
    }

    #[test]
    fn symbol_is_non_positive_and_zero_at_zero_mode() {
        let g = GridSpec::new(16, 3.0, 2).unwrap();
        let s = LinearSymbol::new(&g, &[1.0, 0.05, 0.0]).unwrap();
        for l in &s.species {
            assert!(l.iter().all(|&v| v <= 0.0));
            assert_eq!(l[0], 0.0);
        }
        assert!(s.species[2].iter().all(|&v| v == 0.0));
        assert!(LinearSymbol::new(&g, &[-1.0]).is_err());
    }

    #[test]
    fn tables_zero_mode_and_single_mode() {
        let g = GridSpec::new(8, 1.0, 1).unwrap();
        let sym = LinearSymbol::new(&g, &[1.0]).unwrap();
        let t = build_exp_tables(&sym, 0.3).unwrap();
        let s = &t.species[0];
        assert_eq!((s.e_full[0], s.phi0[0], s.phi1[0], s.phi2[0]), (1.0, 1.0, 0.5, 1.0 / 6.0));

        let one = LinearSymbol { species: vec![vec![-1.0]] };
        let t = build_exp_tables(&one, 1.0).unwrap();
        assert_eq!(t.species[0].e_full[0], (-1.0_f64).exp());

        assert!(build_exp_tables(&one, 0.0).is_err());
        assert!(build_exp_tables(&one, f64::NAN).is_err());
    }

    #[test]
    fn tables_recurrence_spot_check() {
        // z = -0.4 from L = -4, dt = 0.1
        let sym = LinearSymbol { species: vec![vec![-4.0]] };
        let t = build_exp_tables(&sym, 0.1).unwrap();
        let s = &t.species[0];
        let z = -0.4_f64;
        let direct0 = (z.exp() - 1.0) / z;
        let direct1 = (z.exp() - 1.0 - z) / (z * z);
        assert!((s.phi0[0] - direct0).abs() < 1e-14);
        assert!((s.phi1[0] - direct1).abs() < 1e-13);
        assert!((z * s.phi1[0] - (s.phi0[0] - 1.0)).abs() < 1e-14);
        assert!((z * s.phi2[0] - (s.phi1[0] - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn tables_invariants_on_a_real_grid() {
        let g = GridSpec::new(64, 10.0, 2).unwrap();
        let sym = LinearSymbol::new(&g, &[1.0, 0.01]).unwrap();
        for dt in [1e-3, 0.1, 2.0] {
            let t = build_exp_tables(&sym, dt).unwrap();
            for (s, l) in t.species.iter().zip(&sym.species) {
                for i in 0..g.len() {
                    assert!(s.e_full[i] > 0.0 && s.e_full[i] <= 1.0);
                    let sq = s.e_half[i] * s.e_half[i];
                    assert!((sq - s.e_full[i]).abs() <= 1e-13 * s.e_full[i]);
                    let z = l[i] * dt;
                    assert!((z * s.phi1[i] - (s.phi0[i] - 1.0)).abs() < 1e-10);
                    assert!((z * s.phi2[i] - (s.phi1[i] - 0.5)).abs() < 1e-10);
                    let zh = 0.5 * z;
                    assert!((zh * s.phi1_half[i] - (s.phi0_half[i] - 1.0)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn blow_up_guard() {
        assert_eq!(guard(&[vec![1.0, -3.0]], 0.0).unwrap(), 3.0);
        assert!(matches!(guard(&[vec![f64::NAN]], 2.0), Err(Error::BlowUp { t, .. }) if t == 2.0));
        assert!(matches!(guard(&[vec![2e10]], 1.0), Err(Error::BlowUp { .. })));
    }
}
