//! Cartesian grid bookkeeping and the scaled discrete Fourier transform pair.
//!
//! The physical domain is the square `[-1,1]^2`; computations happen on the
//! padded square `[-2,2]^2` with `2*nx` nodes per axis so that waves leave the
//! physical region before boundary wrap-around matters. Spatial nodes are
//! `x_i = i * 2/nx` and frequency nodes `xi_k = k * Omega/nx` for
//! `i, k = -nx..nx`, with maximal bandwidth `Omega = nx*pi/2`. The spacing and
//! bandwidth satisfy the Nyquist relation `spacing * Omega = pi`, which makes
//! the two grids exactly DFT-conjugate.
//!
//! [`dft2_forward`] is scaled by `spacing^2` so spectra approximate the
//! continuous integral `F f(xi) = \int f(x) e^{-i x.xi} dx`; [`dft2_inverse`]
//! carries the reciprocal `(Omega/nx)^2 / (2 pi)^2` weight.

use crate::fft::{rotate_half_into, Complex64, Fft2};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Square padded grid. Side length 2 physical, pad factor 2, `nx` nodes per
/// axis on the physical square (must be positive and even).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    nx: usize,
}

impl Grid2D {
    pub fn new(nx: usize) -> Self {
        assert!(nx >= 2 && nx % 2 == 0, "nx must be positive and even, got {nx}");
        Grid2D { nx }
    }

    /// Nodes per axis on the physical square.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Nodes per axis on the padded square (`2*nx`).
    pub fn padded_n(&self) -> usize {
        2 * self.nx
    }

    /// Total nodes of the padded grid.
    pub fn node_count(&self) -> usize {
        self.padded_n() * self.padded_n()
    }

    /// Side length of the physical square.
    pub fn side_length(&self) -> f64 {
        2.0
    }

    /// Ratio of computational to physical side length.
    pub fn pad_factor(&self) -> usize {
        2
    }

    /// Node spacing `2/nx`.
    pub fn spacing(&self) -> f64 {
        2.0 / self.nx as f64
    }

    /// Maximal bandwidth `Omega = nx*pi/2`.
    pub fn omega(&self) -> f64 {
        self.nx as f64 * PI / 2.0
    }

    /// Frequency node spacing `Omega/nx` (always `pi/2`).
    pub fn freq_step(&self) -> f64 {
        self.omega() / self.nx as f64
    }

    /// Spatial coordinate of centered node index `i` in `-nx..nx`.
    pub fn x_at(&self, i: i64) -> f64 {
        i as f64 * self.spacing()
    }

    /// Frequency coordinate of centered node index `k` in `-nx..nx`.
    pub fn xi_at(&self, k: i64) -> f64 {
        k as f64 * self.freq_step()
    }

    /// Flat row-major offset of centered indices `(i1, i2)`.
    pub fn flat(&self, i1: i64, i2: i64) -> usize {
        let n = self.padded_n() as i64;
        let a1 = i1 + self.nx as i64;
        let a2 = i2 + self.nx as i64;
        debug_assert!(a1 >= 0 && a1 < n && a2 >= 0 && a2 < n);
        (a1 * n + a2) as usize
    }

    /// Frequency magnitudes `|xi_k|` over the padded grid in wrapped DFT
    /// order; used by the propagator and the spatial filters.
    pub fn rho_wrapped(&self) -> Vec<f64> {
        let n = self.padded_n();
        let dxi = self.freq_step();
        let mut rho = vec![0.0; n * n];
        for w1 in 0..n {
            let k1 = wrapped_to_centered(w1, n) as f64 * dxi;
            for w2 in 0..n {
                let k2 = wrapped_to_centered(w2, n) as f64 * dxi;
                rho[w1 * n + w2] = (k1 * k1 + k2 * k2).sqrt();
            }
        }
        rho
    }
}

/// 0/1 mask of the nodes inside the given radius, centered row-major; the
/// solvers project every iterate onto this set.
pub fn support_mask(grid: Grid2D, radius: f64) -> Vec<f64> {
    let nx = grid.nx() as i64;
    let r2 = radius * radius;
    let mut mask = vec![0.0; grid.node_count()];
    for i1 in -nx..nx {
        let x = grid.x_at(i1);
        for i2 in -nx..nx {
            let y = grid.x_at(i2);
            if x * x + y * y <= r2 {
                mask[grid.flat(i1, i2)] = 1.0;
            }
        }
    }
    mask
}

/// Centered frequency index of a wrapped DFT index.
pub fn wrapped_to_centered(w: usize, n: usize) -> i64 {
    let w = w as i64;
    let n = n as i64;
    if w < n / 2 {
        w
    } else {
        w - n
    }
}

/// Real scalar field on the padded grid, row-major centered storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField2D { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::DimensionMismatch {
                context: "ScalarField2D::from_values",
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        Ok(ScalarField2D { grid, values })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at centered node indices.
    pub fn get(&self, i1: i64, i2: i64) -> f64 {
        self.values[self.grid.flat(i1, i2)]
    }

    pub fn set(&mut self, i1: i64, i2: i64, v: f64) {
        let idx = self.grid.flat(i1, i2);
        self.values[idx] = v;
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest radius at which the field is non-negligible relative to its
    /// maximum; returns 0 for the zero field.
    pub fn support_radius(&self, rel_tol: f64) -> f64 {
        let max = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        let nx = self.grid.nx() as i64;
        let mut r2max = 0.0f64;
        for i1 in -nx..nx {
            for i2 in -nx..nx {
                if self.get(i1, i2).abs() > rel_tol * max {
                    let x = self.grid.x_at(i1);
                    let y = self.grid.x_at(i2);
                    r2max = r2max.max(x * x + y * y);
                }
            }
        }
        r2max.sqrt()
    }
}

/// Complex spectrum on the frequency grid, row-major centered storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField2D {
    grid: Grid2D,
    values: Vec<Complex64>,
}

impl SpectrumField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        SpectrumField2D { grid, values: vec![Complex64::new(0.0, 0.0); grid.node_count()] }
    }

    pub fn from_values(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::DimensionMismatch {
                context: "SpectrumField2D::from_values",
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        Ok(SpectrumField2D { grid, values })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Value at centered frequency indices.
    pub fn get(&self, k1: i64, k2: i64) -> Complex64 {
        self.values[self.grid.flat(k1, k2)]
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Discrete approximation of the continuous 2D Fourier transform.
pub fn dft2_forward(field: &ScalarField2D) -> SpectrumField2D {
    let grid = field.grid();
    let n = grid.padded_n();
    let fft = Fft2::new(n);
    let mut ws = fft.make_scratch();

    let mut wrapped = vec![0.0f64; n * n];
    rotate_half_into(field.values(), &mut wrapped, n);
    let mut buf: Vec<Complex64> = wrapped.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut buf, &mut ws);

    let scale = grid.spacing() * grid.spacing();
    let mut centered = vec![Complex64::new(0.0, 0.0); n * n];
    rotate_half_into(&buf, &mut centered, n);
    for v in centered.iter_mut() {
        *v *= scale;
    }
    SpectrumField2D { grid, values: centered }
}

/// Inverse of [`dft2_forward`]. Fails if the reconstructed field has an
/// imaginary residue above `1e-8` of its own norm, which signals a spectrum
/// that is not conjugate-symmetric.
pub fn dft2_inverse(spec: &SpectrumField2D) -> Result<ScalarField2D> {
    let grid = spec.grid();
    let n = grid.padded_n();
    let fft = Fft2::new(n);
    let mut ws = fft.make_scratch();

    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    rotate_half_into(spec.values(), &mut buf, n);
    fft.inverse(&mut buf, &mut ws);

    let dxi = grid.freq_step();
    let scale = dxi * dxi / (4.0 * PI * PI);
    let mut re_sq = 0.0;
    let mut im_sq = 0.0;
    for v in buf.iter() {
        re_sq += v.re * v.re;
        im_sq += v.im * v.im;
    }
    let total = (re_sq + im_sq).sqrt();
    if total > 0.0 && im_sq.sqrt() > 1e-8 * total {
        return Err(Error::NonNegligibleImaginaryPart { ratio: im_sq.sqrt() / total });
    }

    let mut centered = vec![Complex64::new(0.0, 0.0); n * n];
    rotate_half_into(&buf, &mut centered, n);
    let values = centered.iter().map(|v| v.re * scale).collect();
    Ok(ScalarField2D { grid, values })
}

/// Zero-pad physical-square samples (row-major `nx x nx`) into the center of
/// the padded grid.
pub fn embed_pad(grid: Grid2D, physical: &[f64]) -> Result<ScalarField2D> {
    let nx = grid.nx();
    if physical.len() != nx * nx {
        return Err(Error::DimensionMismatch {
            context: "embed_pad",
            expected: nx * nx,
            got: physical.len(),
        });
    }
    let mut field = ScalarField2D::zeros(grid);
    let half = nx as i64 / 2;
    for (r, row) in physical.chunks_exact(nx).enumerate() {
        for (c, &v) in row.iter().enumerate() {
            field.set(r as i64 - half, c as i64 - half, v);
        }
    }
    Ok(field)
}

/// Extract the central physical square (row-major `nx x nx`).
pub fn crop_physical(field: &ScalarField2D) -> Vec<f64> {
    let nx = field.grid().nx();
    let half = nx as i64 / 2;
    let mut out = Vec::with_capacity(nx * nx);
    for i1 in -half..half {
        for i2 in -half..half {
            out.push(field.get(i1, i2));
        }
    }
    out
}
