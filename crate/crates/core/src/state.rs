use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Solution at one time level: per-species physical fields and their spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub physical: Vec<Vec<f64>>,
    pub spectral: Vec<Vec<Complex64>>,
}

impl State {
    /// Builds a synchronized state by transforming each species.
    pub fn from_physical(grid: &GridSpec, t: f64, physical: Vec<Vec<f64>>) -> Result<Self> {
        if physical.is_empty() {
            return Err(Error::InvalidParameter("state needs at least one species".into()));
        }
        let spectral = physical
            .iter()
            .map(|u| grid.forward(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            physical,
            spectral,
        })
    }

    /// Builds a synchronized state from spectra, realifying each inverse.
    pub fn from_spectral(grid: &GridSpec, t: f64, spectral: Vec<Vec<Complex64>>) -> Result<Self> {
        let physical = spectral
            .iter()
            .map(|s| grid.inverse_real(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            physical,
            spectral,
        })
    }

    pub fn species(&self) -> usize {
        self.physical.len()
    }

    /// Largest `|u|` over every species; NaN propagates.
    pub fn max_abs(&self) -> f64 {
        self.physical
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    /// True if every inverse transform is real to `1e-10 * ||u||_inf` and
    /// agrees with the stored physical field to the same tolerance.
    pub fn is_synchronized(&self, grid: &GridSpec) -> bool {
        self.physical.iter().zip(&self.spectral).all(|(u, s)| {
            let mut back = s.clone();
            if grid.inverse_complex(&mut back).is_err() || u.len() != back.len() {
                return false;
            }
            let scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            back.iter()
                .zip(u)
                .all(|(z, &v)| z.im.abs() <= 1e-10 * scale && (z.re - v).abs() <= 1e-10 * scale)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_synchronized() {
        let g = GridSpec::new(16, 5.0, 2).unwrap();
        let u = g.sample(|x, y| (0.3 * x).sin() * (-0.1 * y * y).exp());
        let s = State::from_physical(&g, 0.0, vec![u.clone()]).unwrap();
        assert!(s.is_synchronized(&g));
        let back = State::from_spectral(&g, 0.0, s.spectral.clone()).unwrap();
        for (a, b) in back.physical[0].iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tampered_spectrum_is_not_synchronized() {
        let g = GridSpec::new(8, 1.0, 1).unwrap();
        let mut s = State::from_physical(&g, 0.0, vec![vec![1.0; 8]]).unwrap();
        s.spectral[0][1] = Complex64::new(0.0, 3.0);
        assert!(!s.is_synchronized(&g));
    }

    #[test]
    fn max_abs_sees_nan() {
        let g = GridSpec::new(4, 1.0, 1).unwrap();
        let mut s = State::from_physical(&g, 0.0, vec![vec![1.0, -2.0, 0.5, 0.0]]).unwrap();
        assert_eq!(s.max_abs(), 2.0);
        s.physical[0][2] = f64::NAN;
        assert!(s.max_abs().is_nan());
    }
}
