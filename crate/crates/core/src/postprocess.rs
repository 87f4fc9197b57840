//! Spectral upsampling, front tracking, pulse counting and error metrics.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Last index (exclusive) of the low-frequency block of an `n`-point
/// spectrum. The Nyquist mode of an even transform stays in the low block.
fn low_block(n: usize) -> usize {
    (n - n % 2) / 2 + 1
}

fn padded_index(k: usize, n: usize, new_n: usize) -> usize {
    if k < low_block(n) {
        k
    } else {
        k + new_n - n
    }
}

fn check_sizes(n: usize, new_n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidGrid("cannot upsample an empty field".into()));
    }
    if new_n < n {
        return Err(Error::InvalidGrid(format!("upsampling cannot shrink {n} points to {new_n}")));
    }
    Ok(())
}

/// Band-limited interpolation of a periodic field onto `new_n` equispaced
/// nodes by zero-padding its spectrum.
pub fn fourier_upsample_1d(field: &[f64], new_n: usize) -> Result<Vec<f64>> {
    let n = field.len();
    check_sizes(n, new_n)?;
    let mut planner = FftPlanner::new();
    let mut spec: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); new_n];
    for (k, z) in spec.into_iter().enumerate() {
        padded[padded_index(k, n, new_n)] = z;
    }
    planner.plan_fft_inverse(new_n).process(&mut padded);
    // forward is unnormalized, inverse divides by new_n: scaling by new_n / n
    // leaves an overall 1 / n
    Ok(padded.iter().map(|z| z.re / n as f64).collect())
}

fn fft_2d(data: &mut [Complex64], nx: usize, ny: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let (px, py) = if inverse {
        (planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny))
    } else {
        (planner.plan_fft_forward(nx), planner.plan_fft_forward(ny))
    };
    px.process(data);
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = data[j * nx + i];
        }
        py.process(&mut col);
        for j in 0..ny {
            data[j * nx + i] = col[j];
        }
    }
}

/// Two-dimensional zero-pad upsampling of an `ny x nx` field (x fastest).
pub fn fourier_upsample_2d(field: &[f64], nx: usize, ny: usize, new_nx: usize, new_ny: usize) -> Result<Vec<f64>> {
    if field.len() != nx * ny {
        return Err(Error::ShapeMismatch {
            expected: nx * ny,
            actual: field.len(),
        });
    }
    check_sizes(nx, new_nx)?;
    check_sizes(ny, new_ny)?;
    let mut planner = FftPlanner::new();
    let mut spec: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_2d(&mut spec, nx, ny, false, &mut planner);
    let mut padded = vec![Complex64::new(0.0, 0.0); new_nx * new_ny];
    for j in 0..ny {
        let pj = padded_index(j, ny, new_ny);
        for i in 0..nx {
            padded[pj * new_nx + padded_index(i, nx, new_nx)] = spec[j * nx + i];
        }
    }
    fft_2d(&mut padded, new_nx, new_ny, true, &mut planner);
    let norm = (nx * ny) as f64;
    Ok(padded.iter().map(|z| z.re / norm).collect())
}

/// Upsamples every species of a field on `grid` to `new_n` points per axis.
pub fn upsample_on_grid(grid: &GridSpec, field: &[f64], new_n: &[usize]) -> Result<Vec<f64>> {
    match (grid.dims(), new_n) {
        (1, [n]) => fourier_upsample_1d(field, *n),
        (2, [nx, ny]) => fourier_upsample_2d(field, grid.nx(), grid.ny(), *nx, *ny),
        _ => Err(Error::InvalidGrid(format!(
            "{} new sizes given for a {}D grid",
            new_n.len(),
            grid.dims()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrontSide {
    #[default]
    Rightmost,
    Leftmost,
}

/// Position where `u` crosses `threshold`, linearly interpolated between the
/// bracketing nodes, or `None` if it never does.
pub fn front_position(u: &[f64], grid: &GridSpec, threshold: f64, side: FrontSide) -> Option<f64> {
    if grid.dims() != 1 || u.len() != grid.len() || u.len() < 2 {
        return None;
    }
    let x = grid.coords(0);
    let crosses = |i: usize| {
        let (a, b) = (u[i] - threshold, u[i + 1] - threshold);
        (a >= 0.0) != (b >= 0.0)
    };
    let i = match side {
        FrontSide::Rightmost => (0..u.len() - 1).rev().find(|&i| crosses(i))?,
        FrontSide::Leftmost => (0..u.len() - 1).find(|&i| crosses(i))?,
    };
    let s = (threshold - u[i]) / (u[i + 1] - u[i]);
    Some(x[i] + s * (x[i + 1] - x[i]))
}

pub const DEFAULT_FRONT_THRESHOLD: f64 = 1e-4;
pub const MIN_FIT_SAMPLES: usize = 10;

/// Front positions over time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrace {
    pub threshold: f64,
    pub side: FrontSide,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
}

impl FrontTrace {
    pub fn new(threshold: f64, side: FrontSide) -> Self {
        Self {
            threshold,
            side,
            times: Vec::new(),
            positions: Vec::new(),
        }
    }

    /// Records the front of `u` at time `t`; returns whether one was found.
    pub fn record(&mut self, t: f64, u: &[f64], grid: &GridSpec) -> bool {
        match front_position(u, grid, self.threshold, self.side) {
            Some(x) => {
                self.times.push(t);
                self.positions.push(x);
                true
            }
            None => false,
        }
    }

    /// Default fit window: the final half of the recorded times.
    pub fn default_window(&self) -> Option<(f64, f64)> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        Some((0.5 * (first + last), last))
    }

    /// Least-squares speed over `window`, or over the final half if `None`.
    pub fn speed(&self, window: Option<(f64, f64)>) -> Result<f64> {
        front_speed(self, window)
    }
}

pub fn front_speed(trace: &FrontTrace, window: Option<(f64, f64)>) -> Result<f64> {
    let Some((t0, t1)) = window.or_else(|| trace.default_window()) else {
        return Err(Error::Insufficient("front trace is empty".into()));
    };
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.positions)
        .filter(|(t, _)| **t >= t0 && **t <= t1)
        .map(|(t, x)| (*t, *x))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Insufficient(format!(
            "{} front samples in [{t0}, {t1}], need at least {MIN_FIT_SAMPLES}",
            pts.len()
        )));
    }
    Ok(least_squares_slope(&pts))
}

/// Slope of the least-squares line through `(x, y)` points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Number of strict local maxima above `floor`, with periodic neighbours.
pub fn pulse_count(v: &[f64], floor: f64) -> usize {
    let n = v.len();
    if n < 3 {
        return 0;
    }
    (0..n)
        .filter(|&i| {
            let (l, r) = (v[(i + n - 1) % n], v[(i + 1) % n]);
            v[i] > floor && v[i] > l && v[i] > r
        })
        .count()
}

/// `max |a - b|` over all species and points.
pub fn max_abs_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        for (p, q) in x.iter().zip(y) {
            let d = (p - q).abs();
            if d.is_nan() {
                return Ok(f64::NAN);
            }
            worst = worst.max(d);
        }
    }
    Ok(worst)
}
