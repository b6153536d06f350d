//! Uniform periodic grids on the n-torus [0, 2π)ⁿ and Fourier differentiation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

pub const MIN_POINTS_PER_AXIS: usize = 8;

/// Row-major grid: axis 0 varies slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGrid {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl TorusGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(LabError::InvalidModel(
                "grid needs at least one axis".into(),
            ));
        }
        if let Some(&s) = sizes.iter().find(|&&s| s < MIN_POINTS_PER_AXIS) {
            return Err(LabError::InvalidModel(format!(
                "grid axis has {s} points, need at least {MIN_POINTS_PER_AXIS}"
            )));
        }
        let mut strides = vec![1; sizes.len()];
        for a in (0..sizes.len() - 1).rev() {
            strides[a] = strides[a + 1] * sizes[a + 1];
        }
        Ok(TorusGrid { sizes, strides })
    }

    pub fn uniform(n: usize, size: usize) -> Result<Self> {
        Self::new(vec![size; n])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Non-power-of-two axes work but take the slower FFT paths.
    pub fn is_power_of_two(&self) -> bool {
        self.sizes.iter().all(|s| s.is_power_of_two())
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for a in 0..self.dim() {
            out[a] = flat / self.strides[a];
            flat %= self.strides[a];
        }
        out
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.sizes)
            .map(|(&i, &s)| 2.0 * PI * i as f64 / s as f64)
            .collect()
    }

    /// Quadrature cell volume Π(2π/size).
    pub fn cell_volume(&self) -> f64 {
        self.sizes.iter().map(|&s| 2.0 * PI / s as f64).product()
    }

    /// Samples of a function of the grid coordinates.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|p| f(&self.point(p))).collect()
    }

    /// Start index of every line along `axis`.
    fn line_starts(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.strides[axis];
        let block = stride * self.sizes[axis];
        let outer = self.len() / block;
        (0..outer).flat_map(move |o| (0..stride).map(move |i| o * block + i))
    }
}

impl fmt::Display for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", s.join("x"))
    }
}

/// Signed wavenumber of FFT bin `j` for an axis of `size` points.
fn wavenumber(j: usize, size: usize) -> i64 {
    if j <= size / 2 {
        j as i64
    } else {
        j as i64 - size as i64
    }
}

fn is_nyquist(j: usize, size: usize) -> bool {
    size.is_multiple_of(2) && j == size / 2
}

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// FFT plans for every axis of a grid.
///
/// All transforms also come in a complex form. Every operator here is
/// complex-linear and maps real fields to real fields, so two real fields can
/// be processed at once as `f + i·h`.
pub struct SpectralOps {
    grid: TorusGrid,
    plans: Vec<AxisPlan>,
    /// Points whose multi-index hits the Nyquist bin on some axis.
    nyquist_mask: Vec<bool>,
}

impl fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOps")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Clone for SpectralOps {
    fn clone(&self) -> Self {
        SpectralOps::new(self.grid.clone())
    }
}

pub type Complex64 = Complex<f64>;

fn to_complex(field: &[f64]) -> Vec<Complex64> {
    field.iter().map(|&v| Complex::new(v, 0.0)).collect()
}

fn real_part(field: Vec<Complex64>) -> Vec<f64> {
    field.into_iter().map(|c| c.re).collect()
}

impl SpectralOps {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let plans = grid
            .sizes
            .iter()
            .map(|&s| AxisPlan {
                forward: planner.plan_fft_forward(s),
                inverse: planner.plan_fft_inverse(s),
            })
            .collect();
        let nyquist_mask = (0..grid.len())
            .map(|p| {
                grid.multi_index(p)
                    .iter()
                    .zip(&grid.sizes)
                    .any(|(&j, &s)| is_nyquist(j, s))
            })
            .collect();
        SpectralOps {
            grid,
            plans,
            nyquist_mask,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn gather(&self, field: &[Complex64], axis: usize) -> Vec<Complex64> {
        let size = self.grid.sizes[axis];
        let stride = self.grid.strides[axis];
        if stride == 1 {
            return field.to_vec();
        }
        let mut buf = Vec::with_capacity(field.len());
        for start in self.grid.line_starts(axis) {
            buf.extend((0..size).map(|j| field[start + j * stride]));
        }
        buf
    }

    fn scatter(&self, buf: Vec<Complex64>, axis: usize) -> Vec<Complex64> {
        let size = self.grid.sizes[axis];
        let stride = self.grid.strides[axis];
        if stride == 1 {
            return buf;
        }
        let mut out = vec![Complex::new(0.0, 0.0); buf.len()];
        for (line, start) in self.grid.line_starts(axis).enumerate() {
            for j in 0..size {
                out[start + j * stride] = buf[line * size + j];
            }
        }
        out
    }

    /// ∂f/∂x^axis of the trigonometric interpolant; the Nyquist bin is dropped
    /// so real data stays real.
    pub fn derivative(&self, field: &[f64], axis: usize) -> Vec<f64> {
        real_part(self.derivative_complex(&to_complex(field), axis))
    }

    pub fn derivative_complex(&self, field: &[Complex64], axis: usize) -> Vec<Complex64> {
        assert_eq!(field.len(), self.grid.len(), "field/grid size mismatch");
        let size = self.grid.sizes[axis];
        let mut buf = self.gather(field, axis);
        let plan = &self.plans[axis];
        plan.forward.process(&mut buf);
        let scale = 1.0 / size as f64;
        let factors: Vec<Complex64> = (0..size)
            .map(|j| {
                if is_nyquist(j, size) {
                    Complex::new(0.0, 0.0)
                } else {
                    Complex::new(0.0, wavenumber(j, size) as f64 * scale)
                }
            })
            .collect();
        for line in buf.chunks_mut(size) {
            line.iter_mut().zip(&factors).for_each(|(c, f)| *c *= f);
        }
        plan.inverse.process(&mut buf);
        self.scatter(buf, axis)
    }

    pub fn gradient(&self, field: &[f64]) -> Vec<Vec<f64>> {
        (0..self.grid.dim())
            .map(|a| self.derivative(field, a))
            .collect()
    }

    pub fn gradient_complex(&self, field: &[Complex64]) -> Vec<Vec<Complex64>> {
        (0..self.grid.dim())
            .map(|a| self.derivative_complex(field, a))
            .collect()
    }

    /// Component of `field` carried by Fourier modes with a Nyquist index on any axis.
    pub fn nyquist_part(&self, field: &[f64]) -> Vec<f64> {
        real_part(self.nyquist_part_complex(&to_complex(field)))
    }

    pub fn nyquist_part_complex(&self, field: &[Complex64]) -> Vec<Complex64> {
        if self.grid.sizes.iter().all(|s| s % 2 == 1) {
            return vec![Complex::new(0.0, 0.0); field.len()];
        }
        let mut data = field.to_vec();
        for axis in 0..self.grid.dim() {
            data = self.transform_axis(data, axis, true);
        }
        for (c, &keep) in data.iter_mut().zip(&self.nyquist_mask) {
            if !keep {
                *c = Complex::new(0.0, 0.0);
            }
        }
        for axis in 0..self.grid.dim() {
            data = self.transform_axis(data, axis, false);
        }
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    fn transform_axis(&self, data: Vec<Complex64>, axis: usize, forward: bool) -> Vec<Complex64> {
        let mut buf = self.gather(&data, axis);
        let plan = &self.plans[axis];
        if forward {
            plan.forward.process(&mut buf);
        } else {
            plan.inverse.process(&mut buf);
        }
        self.scatter(buf, axis)
    }
}
