//! Periodic grids and the physical <-> spectral transform contract.
//!
//! Fields are flat `Vec<f64>` buffers. In 2D the layout is `y`-major with `x`
//! fastest, i.e. node `(i, j)` lives at `j * nx + i`. Spectral fields share
//! that layout.
//!
//! The forward transform is unnormalized; the inverse divides by the total
//! number of nodes. Inverses used by the solvers always discard the imaginary
//! part ([`GridSpec::inverse_real`]), each species being transformed on its own.
//!
//! Any even `n >= 4` is accepted; powers of two give the fastest transforms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// One periodic axis covering `[-half_length, half_length)` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub half_length: f64,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Node positions `-L + i * 2L / n`; `+L` is the periodic image of `-L`.
    pub fn coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n)
            .map(|i| -self.half_length + i as f64 * h)
            .collect()
    }

    /// Signed mode index at storage position `i`: `0, 1, .., n/2, -n/2+1, .., -1`.
    pub fn mode_index(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Angular wavenumbers `(pi / L) * [0, 1, .., n/2, -n/2+1, .., -1]`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let scale = PI / self.half_length;
        (0..self.n)
            .map(|i| scale * self.mode_index(i) as f64)
            .collect()
    }
}

struct Plans {
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

/// Uniform periodic grid in one or two dimensions, with its wavenumbers,
/// Laplacian symbol and transform plans. Immutable once built; cloning is
/// cheap and clones may be shared across threads.
#[derive(Clone)]
pub struct GridSpec {
    axes: Vec<Axis>,
    wavenumbers: Vec<Vec<f64>>,
    omega_sq: Arc<Vec<f64>>,
    plans: Arc<Plans>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec").field("axes", &self.axes).finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

impl GridSpec {
    /// Square grid with `n` nodes and half-length `half_length` on every axis.
    pub fn new(n: usize, half_length: f64, dims: usize) -> Result<Self> {
        match dims {
            1 | 2 => Self::from_axes(&vec![Axis { n, half_length }; dims]),
            _ => Err(Error::InvalidGrid(format!("dims must be 1 or 2, got {dims}"))),
        }
    }

    /// Grid from explicit per-axis sizes, `x` first.
    pub fn from_axes(axes: &[Axis]) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dims must be 1 or 2, got {}",
                axes.len()
            )));
        }
        for a in axes {
            if a.n < 4 || a.n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "n must be even and at least 4, got {}",
                    a.n
                )));
            }
            if !(a.half_length > 0.0 && a.half_length.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "half-length must be positive and finite, got {}",
                    a.half_length
                )));
            }
        }

        let wavenumbers: Vec<Vec<f64>> = axes.iter().map(Axis::wavenumbers).collect();
        let omega_sq = match wavenumbers.as_slice() {
            [wx] => wx.iter().map(|w| w * w).collect(),
            [wx, wy] => {
                let mut out = Vec::with_capacity(wx.len() * wy.len());
                for ky in wy {
                    for kx in wx {
                        out.push(kx * kx + ky * ky);
                    }
                }
                out
            }
            _ => unreachable!(),
        };

        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: axes.iter().map(|a| planner.plan_fft_forward(a.n)).collect(),
            inverse: axes.iter().map(|a| planner.plan_fft_inverse(a.n)).collect(),
        };

        Ok(Self {
            axes: axes.to_vec(),
            wavenumbers,
            omega_sq: Arc::new(omega_sq),
            plans: Arc::new(plans),
        })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn nx(&self) -> usize {
        self.axes[0].n
    }

    /// Number of rows; 1 for a 1D grid.
    pub fn ny(&self) -> usize {
        self.axes.get(1).map_or(1, |a| a.n)
    }

    /// Total node count, `n^dims` for square grids.
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        self.axes[axis].coords()
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// `Omega^2 = omega_x^2 (+ omega_y^2)` in storage order.
    pub fn omega_sq(&self) -> &[f64] {
        &self.omega_sq
    }

    /// Evaluate `f(x, y)` on every node (y is 0 in 1D).
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let xs = self.coords(0);
        let ys = if self.dims() == 2 { self.coords(1) } else { vec![0.0] };
        let mut out = Vec::with_capacity(self.len());
        for &y in &ys {
            for &x in &xs {
                out.push(f(x, y));
            }
        }
        out
    }

    /// 2/3-rule mask: 1 for modes kept, 0 for modes whose index on any axis
    /// exceeds `n / 3`.
    pub fn dealias_mask(&self) -> Vec<f64> {
        let keep = |a: &Axis, i: usize| a.mode_index(i).unsigned_abs() as usize <= a.n / 3;
        let ax = &self.axes[0];
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny() {
            let row_ok = self.dims() == 1 || keep(&self.axes[1], j);
            for i in 0..ax.n {
                out.push(if row_ok && keep(ax, i) { 1.0 } else { 0.0 });
            }
        }
        out
    }

    fn check_len(&self, actual: usize) -> Result<()> {
        if actual == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.len(),
                actual,
            })
        }
    }

    /// Unnormalized forward DFT of a real field.
    pub fn forward(&self, field: &[f64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.forward_into(field, &mut out)?;
        Ok(out)
    }

    pub fn forward_into(&self, field: &[f64], out: &mut [Complex64]) -> Result<()> {
        self.check_len(field.len())?;
        self.check_len(out.len())?;
        for (o, &v) in out.iter_mut().zip(field) {
            *o = Complex64::new(v, 0.0);
        }
        self.transform_in_place(out, &self.plans.forward);
        Ok(())
    }

    /// Unnormalized forward DFT of a complex field, in place.
    pub fn forward_complex(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform_in_place(data, &self.plans.forward);
        Ok(())
    }

    /// Normalized inverse DFT, in place, keeping the imaginary part.
    pub fn inverse_complex(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform_in_place(data, &self.plans.inverse);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
        Ok(())
    }

    /// Normalized inverse DFT with the imaginary part discarded.
    pub fn inverse_real(&self, spectral: &[Complex64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        let mut scratch = spectral.to_vec();
        self.inverse_real_into(&mut scratch, &mut out)?;
        Ok(out)
    }

    /// Like [`Self::inverse_real`] but reuses `work` (clobbered) to avoid
    /// allocation in the time-stepping loops.
    pub fn inverse_real_into(&self, work: &mut [Complex64], out: &mut [f64]) -> Result<()> {
        self.check_len(work.len())?;
        self.check_len(out.len())?;
        self.transform_in_place(work, &self.plans.inverse);
        let scale = 1.0 / self.len() as f64;
        for (o, z) in out.iter_mut().zip(work.iter()) {
            *o = z.re * scale;
        }
        Ok(())
    }

    /// Multiply by the diffusion symbol `-d * Omega^2`.
    pub fn apply_laplacian_symbol(&self, spectral: &[Complex64], d: f64) -> Result<Vec<Complex64>> {
        self.check_len(spectral.len())?;
        if !(d >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusivity must be non-negative, got {d}"
            )));
        }
        Ok(spectral
            .iter()
            .zip(self.omega_sq.iter())
            .map(|(z, w2)| z * (-d * w2))
            .collect())
    }

    fn transform_in_place(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let nx = self.nx();
        let px = &plans[0];
        let mut scratch = vec![Complex64::new(0.0, 0.0); px.get_inplace_scratch_len()];
        // process_with_scratch walks consecutive chunks of length nx
        px.process_with_scratch(data, &mut scratch);

        if let Some(py) = plans.get(1) {
            let ny = self.ny();
            let mut cols = vec![Complex64::new(0.0, 0.0); data.len()];
            for j in 0..ny {
                for i in 0..nx {
                    cols[i * ny + j] = data[j * nx + i];
                }
            }
            scratch.resize(py.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
            py.process_with_scratch(&mut cols, &mut scratch);
            for i in 0..nx {
                for j in 0..ny {
                    data[j * nx + i] = cols[i * ny + j];
                }
            }
        }
    }
}
