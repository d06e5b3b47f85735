//! Low-level FFT plumbing shared by the grid, wave and filter modules.
//!
//! Fields and spectra are stored publicly in *centered* row-major order
//! (node index `i + nx` for `i` in `-nx..nx`). The transforms here operate on
//! the standard *wrapped* DFT order; [`rotate_half_into`] converts between the
//! two. For even side lengths the rotation is an involution, so the same call
//! performs both directions.

use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub use rustfft::num_complex::Complex64;

/// Planned in-place 2D FFT of a square complex buffer, unnormalized in both
/// directions (the callers fold the grid-dependent scale factors).
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

/// Reusable workspace for [`Fft2`]; one per thread of execution.
pub struct FftScratch {
    tmp: Vec<Complex64>,
    plan: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Fft2 { n, fwd, inv, scratch_len }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn make_scratch(&self) -> FftScratch {
        FftScratch {
            tmp: vec![Complex64::new(0.0, 0.0); self.n * self.n],
            plan: vec![Complex64::new(0.0, 0.0); self.scratch_len],
        }
    }

    /// Unnormalized forward DFT, row-major `n x n`, in place.
    pub fn forward(&self, buf: &mut [Complex64], ws: &mut FftScratch) {
        self.pass(buf, ws, true);
    }

    /// Unnormalized inverse DFT (conjugate kernel, no `1/n^2`), in place.
    pub fn inverse(&self, buf: &mut [Complex64], ws: &mut FftScratch) {
        self.pass(buf, ws, false);
    }

    fn pass(&self, buf: &mut [Complex64], ws: &mut FftScratch, forward: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n * n, "Fft2 buffer size");
        let plan = if forward { &self.fwd } else { &self.inv };
        for row in buf.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut ws.plan);
        }
        transpose_square(buf, &mut ws.tmp, n);
        for row in ws.tmp.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut ws.plan);
        }
        transpose_square(&ws.tmp, buf, n);
    }
}

fn transpose_square(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// Swap the half-planes of a square row-major array in both axes.
///
/// Maps centered storage (index `i + nx`) to wrapped DFT storage
/// (index `i mod n`) and back; `n` must be even.
pub fn rotate_half_into<T: Copy>(src: &[T], dst: &mut [T], n: usize) {
    debug_assert_eq!(src.len(), n * n);
    debug_assert_eq!(dst.len(), n * n);
    debug_assert_eq!(n % 2, 0);
    let h = n / 2;
    for i in 0..n {
        let ii = (i + h) % n;
        let row = i * n;
        let row_out = ii * n;
        for j in 0..n {
            dst[row_out + (j + h) % n] = src[row + j];
        }
    }
}

/// Planned 1D FFT pair used by the temporal convolutions.
pub struct Fft1 {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft1 {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft1 {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }
}
