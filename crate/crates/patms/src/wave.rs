//! Sampled PAT forward operator and its exact algebraic adjoint.
//!
//! The forward map propagates an initial pressure with the spectral cosine
//! propagator `F p(xi, t) = cos(|xi| t) F f(xi)` on the padded grid and
//! samples the pressure at the grid node nearest to each detector. The
//! adjoint is the exact transpose of that discrete chain (scatter-add,
//! cosine multiplier, adjoint DFT weights), not an approximate
//! backprojection, so Landweber and ISTA see a true adjoint pair.
//!
//! Each time step needs one 2D transform of the padded grid. Since the
//! per-step spectra are conjugate-symmetric, two consecutive steps are packed
//! into the real and imaginary parts of a single complex transform. Time
//! steps are processed in a fixed number of chunks ([`TIME_CHUNKS`]) merged
//! in chunk order, so results do not depend on the worker thread count.

use crate::fft::{rotate_half_into, Complex64, Fft2};
use crate::grid::{Grid2D, ScalarField2D};
use crate::{Error, Result, SUPPORT_RADIUS};
use rayon::prelude::*;

/// Fixed number of time chunks for parallel processing; per-chunk sums are
/// sequential and chunks merge in order, independent of thread count.
const TIME_CHUNKS: usize = 8;

/// Equidistant detectors on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRing {
    n: usize,
    positions: Vec<(f64, f64)>,
}

impl DetectorRing {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "need at least one detector");
        let positions = (0..n)
            .map(|l| {
                let ang = 2.0 * std::f64::consts::PI * l as f64 / n as f64;
                (ang.cos(), ang.sin())
            })
            .collect();
        DetectorRing { n, positions }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }
}

/// Uniform time samples `t_k = k dt`, `k = 0..nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nt: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(nt: usize, dt: f64) -> Self {
        assert!(nt > 0 && dt > 0.0, "need positive nt and dt");
        TimeGrid { nt, dt }
    }

    /// Default acquisition window: `dt = spacing`, `nt = 200` (duration 4 on
    /// the standard grid), long enough for waves from the support disk to
    /// traverse the detectors with the filter tails included.
    pub fn default_for(grid: Grid2D) -> Self {
        TimeGrid::new(200, grid.spacing())
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_at(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.nt as f64 * self.dt
    }

    /// Whether the window captures all arrivals from sources within
    /// `support_radius` plus a temporal filter tail.
    pub fn covers(&self, support_radius: f64, filter_tail: f64) -> bool {
        self.duration() >= 1.0 + support_radius + filter_tail
    }
}

/// Time-resolved pressure at the detectors, row-major `n x nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveData {
    ring: DetectorRing,
    time: TimeGrid,
    values: Vec<f64>,
}

impl WaveData {
    pub fn new(ring: DetectorRing, time: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != ring.n() * time.nt() {
            return Err(Error::DimensionMismatch {
                context: "WaveData::new",
                expected: ring.n() * time.nt(),
                got: values.len(),
            });
        }
        Ok(WaveData { ring, time, values })
    }

    pub fn zeros(ring: DetectorRing, time: TimeGrid) -> Self {
        let len = ring.n() * time.nt();
        WaveData { ring, time, values: vec![0.0; len] }
    }

    pub fn ring(&self) -> &DetectorRing {
        &self.ring
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, detector: usize, k: usize) -> f64 {
        self.values[detector * self.time.nt() + k]
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// The sampled forward operator with precomputed propagator tables.
///
/// Construction costs one cosine table of `nt * (2 nx)^2` doubles; reuse the
/// operator for repeated applications (the solvers apply it thousands of
/// times).
pub struct WaveOperator {
    grid: Grid2D,
    ring: DetectorRing,
    time: TimeGrid,
    fft: Fft2,
    det_wrapped: Vec<usize>,
    cos_tab: Vec<f64>,
    mirror: Vec<u32>,
}

impl WaveOperator {
    pub fn new(grid: Grid2D, ring: DetectorRing, time: TimeGrid) -> Self {
        let n = grid.padded_n();
        let nn = n * n;
        let dx = grid.spacing();

        let det_wrapped = ring
            .positions()
            .iter()
            .map(|&(x, y)| {
                let i1 = (x / dx).round() as i64;
                let i2 = (y / dx).round() as i64;
                let w1 = i1.rem_euclid(n as i64) as usize;
                let w2 = i2.rem_euclid(n as i64) as usize;
                w1 * n + w2
            })
            .collect();

        let rho = grid.rho_wrapped();
        let nt = time.nt();
        let mut cos_tab = vec![0.0f64; nt * nn];
        cos_tab.par_chunks_mut(nn).enumerate().for_each(|(k, row)| {
            let t = time.t_at(k);
            for (c, &r) in row.iter_mut().zip(rho.iter()) {
                *c = (r * t).cos();
            }
        });

        let mut mirror = vec![0u32; nn];
        for w1 in 0..n {
            let m1 = (n - w1) % n;
            for w2 in 0..n {
                let m2 = (n - w2) % n;
                mirror[w1 * n + w2] = (m1 * n + m2) as u32;
            }
        }

        WaveOperator { grid, ring, time, fft: Fft2::new(n), det_wrapped, cos_tab, mirror }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn ring(&self) -> &DetectorRing {
        &self.ring
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    /// Even-aligned time ranges assigned to the fixed chunk set.
    fn chunk_ranges(&self) -> Vec<(usize, usize)> {
        let nt = self.time.nt();
        let mut len = nt.div_ceil(TIME_CHUNKS);
        if len % 2 == 1 {
            len += 1;
        }
        let mut out = Vec::new();
        let mut start = 0;
        while start < nt {
            let end = (start + len).min(nt);
            out.push((start, end));
            start = end;
        }
        out
    }

    /// Forward map on raw centered field values.
    pub fn forward_flat(&self, f_values: &[f64]) -> Vec<f64> {
        let n = self.grid.padded_n();
        let nn = n * n;
        assert_eq!(f_values.len(), nn);
        let nt = self.time.nt();
        let n_det = self.ring.n();

        let mut wrapped = vec![0.0f64; nn];
        rotate_half_into(f_values, &mut wrapped, n);
        let mut spec: Vec<Complex64> = wrapped.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut ws = self.fft.make_scratch();
        self.fft.forward(&mut spec, &mut ws);

        let inv_nn = 1.0 / nn as f64;
        let chunks = self.chunk_ranges();
        let partials: Vec<Vec<f64>> = chunks
            .par_iter()
            .map(|&(k0, k1)| {
                let mut ws = self.fft.make_scratch();
                let mut z = vec![Complex64::new(0.0, 0.0); nn];
                let len = k1 - k0;
                let mut local = vec![0.0f64; n_det * len];
                let mut k = k0;
                while k < k1 {
                    let paired = k + 1 < k1;
                    let c0 = &self.cos_tab[k * nn..(k + 1) * nn];
                    if paired {
                        // pack cos(rho t_k) F and cos(rho t_{k+1}) F into one
                        // transform; both spectra are conjugate-symmetric
                        let c1 = &self.cos_tab[(k + 1) * nn..(k + 2) * nn];
                        for i in 0..nn {
                            z[i] = spec[i] * Complex64::new(c0[i], c1[i]);
                        }
                    } else {
                        for i in 0..nn {
                            z[i] = spec[i] * c0[i];
                        }
                    }
                    self.fft.inverse(&mut z, &mut ws);
                    for (l, &node) in self.det_wrapped.iter().enumerate() {
                        local[l * len + (k - k0)] = z[node].re * inv_nn;
                        if paired {
                            local[l * len + (k - k0) + 1] = z[node].im * inv_nn;
                        }
                    }
                    k += 2;
                }
                local
            })
            .collect();

        let mut out = vec![0.0f64; n_det * nt];
        for (&(k0, k1), local) in chunks.iter().zip(partials.iter()) {
            let len = k1 - k0;
            for l in 0..n_det {
                out[l * nt + k0..l * nt + k1].copy_from_slice(&local[l * len..(l + 1) * len]);
            }
        }
        out
    }

    /// Exact transpose of [`WaveOperator::forward_flat`].
    pub fn adjoint_flat(&self, g_values: &[f64]) -> Vec<f64> {
        let n = self.grid.padded_n();
        let nn = n * n;
        let nt = self.time.nt();
        let n_det = self.ring.n();
        assert_eq!(g_values.len(), n_det * nt);

        let chunks = self.chunk_ranges();
        let partials: Vec<Vec<Complex64>> = chunks
            .par_iter()
            .map(|&(k0, k1)| {
                let mut ws = self.fft.make_scratch();
                let mut acc = vec![Complex64::new(0.0, 0.0); nn];
                let mut h = vec![Complex64::new(0.0, 0.0); nn];
                let mut k = k0;
                while k < k1 {
                    let paired = k + 1 < k1;
                    for v in h.iter_mut() {
                        *v = Complex64::new(0.0, 0.0);
                    }
                    for (l, &node) in self.det_wrapped.iter().enumerate() {
                        let re = g_values[l * nt + k];
                        let im = if paired { g_values[l * nt + k + 1] } else { 0.0 };
                        h[node] += Complex64::new(re, im);
                    }
                    self.fft.forward(&mut h, &mut ws);
                    let c0 = &self.cos_tab[k * nn..(k + 1) * nn];
                    if paired {
                        // split the packed transform into the two underlying
                        // conjugate-symmetric parts via the mirror index
                        let c1 = &self.cos_tab[(k + 1) * nn..(k + 2) * nn];
                        for i in 0..nn {
                            let zm = h[self.mirror[i] as usize];
                            let r = Complex64::new(zm.re, -zm.im);
                            acc[i] += h[i] * Complex64::new(0.5 * c0[i], -0.5 * c1[i])
                                + r * Complex64::new(0.5 * c0[i], 0.5 * c1[i]);
                        }
                    } else {
                        for i in 0..nn {
                            acc[i] += h[i] * c0[i];
                        }
                    }
                    k += 2;
                }
                acc
            })
            .collect();

        let mut acc = vec![Complex64::new(0.0, 0.0); nn];
        for partial in partials.iter() {
            for (a, p) in acc.iter_mut().zip(partial.iter()) {
                *a += p;
            }
        }

        let mut ws = self.fft.make_scratch();
        self.fft.inverse(&mut acc, &mut ws);
        let inv_nn = 1.0 / nn as f64;
        let re: Vec<f64> = acc.iter().map(|v| v.re * inv_nn).collect();
        let mut centered = vec![0.0f64; nn];
        rotate_half_into(&re, &mut centered, n);
        centered
    }

    pub fn forward(&self, f: &ScalarField2D) -> Result<WaveData> {
        if f.grid() != self.grid {
            return Err(Error::DimensionMismatch {
                context: "WaveOperator::forward grid",
                expected: self.grid.node_count(),
                got: f.grid().node_count(),
            });
        }
        let support = f.support_radius(1e-12);
        if support > SUPPORT_RADIUS {
            log::warn!(
                "initial pressure has support radius {support:.3} outside the admissible disk {SUPPORT_RADIUS}"
            );
        }
        let values = self.forward_flat(f.values());
        WaveData::new(self.ring.clone(), self.time.clone(), values)
    }

    pub fn adjoint(&self, g: &WaveData) -> Result<ScalarField2D> {
        if g.ring().n() != self.ring.n() || g.time() != &self.time {
            return Err(Error::DimensionMismatch {
                context: "WaveOperator::adjoint data",
                expected: self.ring.n() * self.time.nt(),
                got: g.values().len(),
            });
        }
        ScalarField2D::from_values(self.grid, self.adjoint_flat(g.values()))
    }
}

/// One-shot forward solve; build a [`WaveOperator`] instead for repeated use.
pub fn wave_forward(f: &ScalarField2D, ring: &DetectorRing, time: &TimeGrid) -> Result<WaveData> {
    WaveOperator::new(f.grid(), ring.clone(), time.clone()).forward(f)
}

/// One-shot exact adjoint of [`wave_forward`].
pub fn wave_adjoint(g: &WaveData, grid: Grid2D) -> Result<ScalarField2D> {
    WaveOperator::new(grid, g.ring().clone(), g.time().clone()).adjoint(g)
}

/// Dense matrix of the sampled forward operator, shape
/// `(n*nt) x node_count`, built column by column from canonical basis fields.
/// Test oracle for small grids only.
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yv) in y.iter().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row.iter()) {
                *o += a * yv;
            }
        }
        out
    }
}

/// Maximum `nx` accepted by [`dense_forward_matrix`].
pub const DENSE_ORACLE_MAX_NX: usize = 16;

pub fn dense_forward_matrix(
    grid: Grid2D,
    ring: &DetectorRing,
    time: &TimeGrid,
) -> Result<DenseMatrix> {
    if grid.nx() > DENSE_ORACLE_MAX_NX {
        return Err(Error::GridTooLarge { nx: grid.nx(), max: DENSE_ORACLE_MAX_NX });
    }
    let op = WaveOperator::new(grid, ring.clone(), time.clone());
    let cols = grid.node_count();
    let rows = ring.n() * time.nt();
    let mut data = vec![0.0; rows * cols];
    let mut basis = vec![0.0; cols];
    for c in 0..cols {
        basis[c] = 1.0;
        let col = op.forward_flat(&basis);
        basis[c] = 0.0;
        for (r, &v) in col.iter().enumerate() {
            data[r * cols + c] = v;
        }
    }
    Ok(DenseMatrix { rows, cols, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_field(grid: Grid2D, seed: u64) -> ScalarField2D {
        let mut f = ScalarField2D::zeros(grid);
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        for v in f.values_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        f
    }

    fn bump_field(grid: Grid2D, beta: f64) -> ScalarField2D {
        let mut f = ScalarField2D::zeros(grid);
        let nx = grid.nx() as i64;
        for i1 in -nx..nx {
            for i2 in -nx..nx {
                let x = grid.x_at(i1);
                let y = grid.x_at(i2);
                let r2 = x * x + y * y;
                if r2 <= SUPPORT_RADIUS * SUPPORT_RADIUS {
                    f.set(i1, i2, (-beta * r2).exp());
                }
            }
        }
        f
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = Grid2D::new(8);
        let ring = DetectorRing::new(12);
        let time = TimeGrid::new(10, grid.spacing());
        let op = WaveOperator::new(grid, ring.clone(), time.clone());
        let g = op.forward(&ScalarField2D::zeros(grid)).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
        let f = op.adjoint(&WaveData::zeros(ring, time)).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn detector_ring_on_unit_circle() {
        let ring = DetectorRing::new(300);
        for &(x, y) in ring.positions() {
            assert!((x * x + y * y - 1.0).abs() < 1e-14);
        }
        let (x0, y0) = ring.positions()[0];
        assert!((x0 - 1.0).abs() < 1e-14 && y0.abs() < 1e-14);
    }

    #[test]
    fn time_zero_column_samples_field() {
        let grid = Grid2D::new(16);
        let ring = DetectorRing::new(20);
        let time = TimeGrid::new(8, grid.spacing());
        let op = WaveOperator::new(grid, ring.clone(), time);
        let f = bump_field(grid, 64.0);
        let g = op.forward(&f).unwrap();
        // detectors sit at radius ~1 where the admissible field vanishes
        for l in 0..ring.n() {
            assert!(g.get(l, 0).abs() < 1e-12, "detector {l}");
        }
    }

    #[test]
    fn forward_is_linear() {
        let grid = Grid2D::new(8);
        let ring = DetectorRing::new(10);
        let time = TimeGrid::new(12, grid.spacing());
        let op = WaveOperator::new(grid, ring, time);
        let f1 = test_field(grid, 1);
        let f2 = test_field(grid, 2);
        let (a, b) = (1.7, -0.6);
        let mut comb = ScalarField2D::zeros(grid);
        for i in 0..grid.node_count() {
            comb.values_mut()[i] = a * f1.values()[i] + b * f2.values()[i];
        }
        let g1 = op.forward(&f1).unwrap();
        let g2 = op.forward(&f2).unwrap();
        let gc = op.forward(&comb).unwrap();
        let scale = gc.l2_norm().max(1.0);
        for i in 0..gc.values().len() {
            let expect = a * g1.values()[i] + b * g2.values()[i];
            assert!((gc.values()[i] - expect).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn propagator_symbol_is_even_in_time() {
        let grid = Grid2D::new(8);
        for &t in &[0.15, 0.4, 1.3] {
            for &r in grid.rho_wrapped().iter().step_by(17) {
                assert_eq!((r * t).cos(), (r * -t).cos());
            }
        }
    }

    #[test]
    fn adjoint_inner_product() {
        let grid = Grid2D::new(12);
        let ring = DetectorRing::new(18);
        let time = TimeGrid::new(25, grid.spacing()); // odd nt exercises the unpaired step
        let op = WaveOperator::new(grid, ring.clone(), time.clone());
        for seed in 0..20 {
            let f = test_field(grid, seed);
            let mut g = WaveData::zeros(ring.clone(), time.clone());
            let mut state = seed.wrapping_mul(77777).wrapping_add(13);
            for v in g.values_mut() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            }
            let wf = op.forward(&f).unwrap();
            let wg = op.adjoint(&g).unwrap();
            let lhs: f64 = wf.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
            let rhs: f64 = f.values().iter().zip(wg.values()).map(|(a, b)| a * b).sum();
            let denom = f.l2_norm() * g.l2_norm();
            assert!((lhs - rhs).abs() <= 1e-10 * denom, "seed {seed}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn dense_oracle_matches_operator() {
        let grid = Grid2D::new(8);
        let ring = DetectorRing::new(10);
        let time = TimeGrid::new(9, grid.spacing());
        let op = WaveOperator::new(grid, ring.clone(), time.clone());
        let dense = dense_forward_matrix(grid, &ring, &time).unwrap();
        assert_eq!(dense.rows(), ring.n() * time.nt());
        assert_eq!(dense.cols(), grid.node_count());

        // forward against matrix-vector product
        let f = test_field(grid, 5);
        let via_matrix = dense.apply(f.values());
        let via_op = op.forward(&f).unwrap();
        let scale = via_op.l2_norm().max(1.0);
        for (a, b) in via_matrix.iter().zip(via_op.values()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }

        // a dense column is the forward image of the basis field
        let c = grid.flat(1, -2);
        let mut basis = ScalarField2D::zeros(grid);
        basis.values_mut()[c] = 1.0;
        let gcol = op.forward(&basis).unwrap();
        for r in 0..dense.rows() {
            assert!((dense.get(r, c) - gcol.values()[r]).abs() < 1e-14);
        }

        // adjoint against the transpose
        let mut g = WaveData::zeros(ring.clone(), time.clone());
        for (i, v) in g.values_mut().iter_mut().enumerate() {
            *v = ((i * 37 + 5) % 23) as f64 / 10.0 - 1.0;
        }
        let via_t = dense.apply_transpose(g.values());
        let via_adj = op.adjoint(&g).unwrap();
        let scale = via_adj.l2_norm().max(1.0);
        for (a, b) in via_t.iter().zip(via_adj.values()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }

        // t = 0 rows of the matrix sample basis fields at detector nodes
        for l in 0..ring.n() {
            let row = l * time.nt();
            let ones: usize = (0..dense.cols())
                .filter(|&cc| (dense.get(row, cc) - 1.0).abs() < 1e-12)
                .count();
            assert_eq!(ones, 1, "detector {l} t=0 row selects one node");
        }
    }

    #[test]
    fn dense_oracle_guards_grid_size() {
        let ring = DetectorRing::new(4);
        let time = TimeGrid::new(4, 0.1);
        assert!(matches!(
            dense_forward_matrix(Grid2D::new(18), &ring, &time),
            Err(Error::GridTooLarge { .. })
        ));
    }
}
