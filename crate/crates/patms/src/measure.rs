//! Compressed-sensing measurement matrices acting on the detector axis.
//!
//! A measurement matrix `A` maps the `n` detector traces to `m <= n` linear
//! combinations, applied independently at every time sample, so it commutes
//! with temporal convolution. Gaussian matrices draw i.i.d. `N(0, 1/m)`
//! entries from a ChaCha12 stream seeded with a user seed (same seed, same
//! matrix, on every platform); the `1/m` variance keeps expected row norms
//! at one so solver step sizes are comparable across matrix kinds.

use crate::wave::{DetectorRing, TimeGrid, WaveData};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Compressed measurements, row-major `m x nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsData {
    m: usize,
    time: TimeGrid,
    values: Vec<f64>,
}

impl CsData {
    pub fn new(m: usize, time: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != m * time.nt() {
            return Err(Error::DimensionMismatch {
                context: "CsData::new",
                expected: m * time.nt(),
                got: values.len(),
            });
        }
        Ok(CsData { m, time, values })
    }

    pub fn zeros(m: usize, time: TimeGrid) -> Self {
        let len = m * time.nt();
        CsData { m, time, values: vec![0.0; len] }
    }

    pub fn m(&self) -> usize {
        self.m
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

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// Row `j` selects detector `factor * j`; selected columns strictly
    /// increasing.
    Subsample { factor: usize, cols: Vec<usize> },
    /// Dense i.i.d. `N(0, 1/m)` entries, reproducible from the seed.
    Gaussian { seed: u64, entries: Vec<f64> },
    /// Pass-through (`m = n`).
    Identity,
    /// Dense entries loaded from a file.
    Dense { entries: Vec<f64> },
}

/// The `m x n` sensing operator applied per time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    m: usize,
    n: usize,
    kind: Kind,
}

impl MeasurementMatrix {
    /// Uniform subsampling: row `j` (0-based) has its single unit entry in
    /// column `factor * j`.
    pub fn subsampling(n: usize, factor: usize) -> Result<Self> {
        assert!(factor >= 1, "factor must be at least 1");
        if n % factor != 0 {
            return Err(Error::NotDivisible { n, factor });
        }
        let m = n / factor;
        let cols = (0..m).map(|j| factor * j).collect();
        Ok(MeasurementMatrix { m, n, kind: Kind::Subsample { factor, cols } })
    }

    /// Seeded Gaussian sensing matrix with `N(0, 1/m)` entries.
    pub fn gaussian(m: usize, n: usize, seed: u64) -> Self {
        assert!(m <= n, "need m <= n");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let scale = 1.0 / (m as f64).sqrt();
        let entries = (0..m * n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
            .collect();
        MeasurementMatrix { m, n, kind: Kind::Gaussian { seed, entries } }
    }

    pub fn identity(n: usize) -> Self {
        MeasurementMatrix { m: n, n, kind: Kind::Identity }
    }

    /// Dense matrix from row-major entries (e.g. reloaded from a file).
    pub fn from_dense(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != m * n {
            return Err(Error::DimensionMismatch {
                context: "MeasurementMatrix::from_dense",
                expected: m * n,
                got: entries.len(),
            });
        }
        Ok(MeasurementMatrix { m, n, kind: Kind::Dense { entries } })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.kind {
            Kind::Gaussian { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Row-major dense entries (materialized for the implicit kinds), the
    /// serialization format.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m * self.n];
        match &self.kind {
            Kind::Subsample { cols, .. } => {
                for (j, &c) in cols.iter().enumerate() {
                    out[j * self.n + c] = 1.0;
                }
            }
            Kind::Identity => {
                for j in 0..self.m {
                    out[j * self.n + j] = 1.0;
                }
            }
            Kind::Gaussian { entries, .. } | Kind::Dense { entries } => {
                out.copy_from_slice(entries);
            }
        }
        out
    }

    /// Apply to a vector on the detector axis.
    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        match &self.kind {
            Kind::Identity => x.to_vec(),
            Kind::Subsample { cols, .. } => cols.iter().map(|&c| x[c]).collect(),
            Kind::Gaussian { entries, .. } | Kind::Dense { entries } => (0..self.m)
                .map(|j| {
                    entries[j * self.n..(j + 1) * self.n]
                        .iter()
                        .zip(x.iter())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        }
    }

    /// Apply the transpose to a vector of measurements.
    pub fn apply_transpose_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.m);
        let mut out = vec![0.0; self.n];
        match &self.kind {
            Kind::Identity => out.copy_from_slice(y),
            Kind::Subsample { cols, .. } => {
                for (j, &c) in cols.iter().enumerate() {
                    out[c] = y[j];
                }
            }
            Kind::Gaussian { entries, .. } | Kind::Dense { entries } => {
                for (j, &yv) in y.iter().enumerate() {
                    let row = &entries[j * self.n..(j + 1) * self.n];
                    for (o, &a) in out.iter_mut().zip(row.iter()) {
                        *o += a * yv;
                    }
                }
            }
        }
        out
    }
}

impl MeasurementMatrix {
    /// Apply to flat row-major `n x nt` data, producing `m x nt`.
    pub(crate) fn apply_rows(&self, g: &[f64], nt: usize) -> Vec<f64> {
        assert_eq!(g.len(), self.n * nt);
        let mut out = vec![0.0; self.m * nt];
        match &self.kind {
            Kind::Identity => out.copy_from_slice(g),
            Kind::Subsample { cols, .. } => {
                for (j, &c) in cols.iter().enumerate() {
                    out[j * nt..(j + 1) * nt].copy_from_slice(&g[c * nt..(c + 1) * nt]);
                }
            }
            Kind::Gaussian { entries, .. } | Kind::Dense { entries } => {
                for j in 0..self.m {
                    let row = &entries[j * self.n..(j + 1) * self.n];
                    let dst = &mut out[j * nt..(j + 1) * nt];
                    for (l, &a) in row.iter().enumerate() {
                        if a != 0.0 {
                            let src = &g[l * nt..(l + 1) * nt];
                            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                                *d += a * s;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Transpose action on flat row-major `m x nt` data, producing `n x nt`.
    pub(crate) fn apply_transpose_rows(&self, y: &[f64], nt: usize) -> Vec<f64> {
        assert_eq!(y.len(), self.m * nt);
        let mut out = vec![0.0; self.n * nt];
        match &self.kind {
            Kind::Identity => out.copy_from_slice(y),
            Kind::Subsample { cols, .. } => {
                for (j, &c) in cols.iter().enumerate() {
                    out[c * nt..(c + 1) * nt].copy_from_slice(&y[j * nt..(j + 1) * nt]);
                }
            }
            Kind::Gaussian { entries, .. } | Kind::Dense { entries } => {
                for j in 0..self.m {
                    let row = &entries[j * self.n..(j + 1) * self.n];
                    let src = &y[j * nt..(j + 1) * nt];
                    for (l, &a) in row.iter().enumerate() {
                        if a != 0.0 {
                            let dst = &mut out[l * nt..(l + 1) * nt];
                            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                                *d += a * s;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Apply the matrix to wave data at every time sample.
pub fn measure(mat: &MeasurementMatrix, g: &WaveData) -> Result<CsData> {
    if mat.n() != g.ring().n() {
        return Err(Error::DimensionMismatch {
            context: "measure detector count",
            expected: mat.n(),
            got: g.ring().n(),
        });
    }
    let nt = g.time().nt();
    let n = mat.n();
    let m = mat.m();
    let mut out = vec![0.0; m * nt];
    let mut col = vec![0.0; n];
    for k in 0..nt {
        for l in 0..n {
            col[l] = g.values()[l * nt + k];
        }
        let yk = mat.apply_vec(&col);
        for j in 0..m {
            out[j * nt + k] = yk[j];
        }
    }
    CsData::new(m, g.time().clone(), out)
}

/// Exact transpose of [`measure`]: scatter measurements back to the detector
/// axis at every time sample.
pub fn measure_adjoint(mat: &MeasurementMatrix, y: &CsData) -> Result<WaveData> {
    if mat.m() != y.m() {
        return Err(Error::DimensionMismatch {
            context: "measure_adjoint row count",
            expected: mat.m(),
            got: y.m(),
        });
    }
    let nt = y.time().nt();
    let n = mat.n();
    let m = mat.m();
    let mut out = vec![0.0; n * nt];
    let mut col = vec![0.0; m];
    for k in 0..nt {
        for j in 0..m {
            col[j] = y.values()[j * nt + k];
        }
        let gk = mat.apply_transpose_vec(&col);
        for l in 0..n {
            out[l * nt + k] = gk[l];
        }
    }
    WaveData::new(DetectorRing::new(n), y.time().clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{convolve_temporal, convolve_temporal_cs, TemporalFilterBank, TimePadding};

    fn ramp_data(n: usize, nt: usize) -> WaveData {
        let ring = DetectorRing::new(n);
        let time = TimeGrid::new(nt, 0.02);
        let values = (0..n * nt).map(|i| (i as f64 * 0.37).sin()).collect();
        WaveData::new(ring, time, values).unwrap()
    }

    #[test]
    fn subsampling_selects_rows() {
        let mat = MeasurementMatrix::subsampling(300, 4).unwrap();
        assert_eq!(mat.m(), 75);
        let dense = mat.to_dense();
        // 1-based: row 1 -> column 1, row 2 -> column 5, row 75 -> column 297
        assert_eq!(dense[0], 1.0);
        assert_eq!(dense[300 + 4], 1.0);
        assert_eq!(dense[74 * 300 + 296], 1.0);
        assert_eq!(dense.iter().filter(|&&v| v != 0.0).count(), 75);

        let g = ramp_data(300, 6);
        let y = measure(&mat, &g).unwrap();
        for j in 0..75 {
            for k in 0..6 {
                assert_eq!(y.values()[j * 6 + k], g.get(4 * j, k));
            }
        }
        assert!(matches!(
            MeasurementMatrix::subsampling(10, 3),
            Err(Error::NotDivisible { .. })
        ));
    }

    #[test]
    fn factor_one_is_identity() {
        let mat = MeasurementMatrix::subsampling(12, 1).unwrap();
        let g = ramp_data(12, 5);
        let y = measure(&mat, &g).unwrap();
        assert_eq!(y.values(), g.values());
        // applying the explicit identity again changes nothing
        let y2 = measure(&MeasurementMatrix::identity(12), &g).unwrap();
        assert_eq!(y2.values(), g.values());
    }

    #[test]
    fn gaussian_is_deterministic_and_seed_sensitive() {
        let a = MeasurementMatrix::gaussian(75, 300, 42);
        let b = MeasurementMatrix::gaussian(75, 300, 42);
        assert_eq!(a.to_dense(), b.to_dense());
        let c = MeasurementMatrix::gaussian(75, 300, 43);
        let differing = a
            .to_dense()
            .iter()
            .zip(c.to_dense().iter())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing as f64 >= 0.99 * (75.0 * 300.0));
    }

    #[test]
    fn gaussian_moments() {
        for seed in [1u64, 7, 1234] {
            let mat = MeasurementMatrix::gaussian(75, 300, seed);
            let dense = mat.to_dense();
            let mn = dense.len() as f64;
            let mean = dense.iter().sum::<f64>() / mn;
            assert!(mean.abs() <= 0.027, "seed {seed}: mean {mean}");
            let var = dense.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / mn;
            let target = 1.0 / 75.0;
            assert!(
                (var - target).abs() <= 0.2 * target,
                "seed {seed}: var {var} target {target}"
            );
        }
    }

    #[test]
    fn adjoint_is_transpose() {
        for mat in [
            MeasurementMatrix::subsampling(20, 4).unwrap(),
            MeasurementMatrix::gaussian(7, 20, 3),
            MeasurementMatrix::identity(20),
        ] {
            let g = ramp_data(20, 4);
            let time = g.time().clone();
            let mut y = CsData::zeros(mat.m(), time);
            for (i, v) in y.values_mut().iter_mut().enumerate() {
                *v = (i as f64 * 0.11).cos();
            }
            let lhs: f64 = measure(&mat, &g)
                .unwrap()
                .values()
                .iter()
                .zip(y.values())
                .map(|(a, b)| a * b)
                .sum();
            let rhs: f64 = g
                .values()
                .iter()
                .zip(measure_adjoint(&mat, &y).unwrap().values())
                .map(|(a, b)| a * b)
                .sum();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
        // subsample adjoint scatters into the selected slots only
        let mat = MeasurementMatrix::subsampling(8, 2).unwrap();
        let time = TimeGrid::new(2, 0.1);
        let mut y = CsData::zeros(4, time);
        y.values_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let g = measure_adjoint(&mat, &y).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(2, 0), 3.0);
        assert_eq!(g.get(1, 0), 0.0);
        assert_eq!(g.get(3, 1), 0.0);
    }

    #[test]
    fn flat_row_paths_match_struct_paths() {
        let g = ramp_data(20, 7);
        for mat in [
            MeasurementMatrix::subsampling(20, 5).unwrap(),
            MeasurementMatrix::gaussian(6, 20, 9),
            MeasurementMatrix::identity(20),
        ] {
            let via_struct = measure(&mat, &g).unwrap();
            let via_flat = mat.apply_rows(g.values(), 7);
            assert_eq!(via_struct.values(), &via_flat[..]);
            let back_struct = measure_adjoint(&mat, &via_struct).unwrap();
            let back_flat = mat.apply_transpose_rows(&via_flat, 7);
            assert_eq!(back_struct.values(), &back_flat[..]);
        }
    }

    #[test]
    fn measurement_commutes_with_temporal_convolution() {
        let bank = TemporalFilterBank::standard();
        let n = 24;
        let nt = 140;
        let ring = DetectorRing::new(n);
        let time = TimeGrid::new(nt, 0.02);
        let values = (0..n * nt)
            .map(|i| ((i as f64 * 0.13).sin() + (i as f64 * 0.029).cos()) * 0.5)
            .collect();
        let g = WaveData::new(ring, time, values).unwrap();
        let mat = MeasurementMatrix::gaussian(9, n, 11);
        for j in 0..bank.scales() {
            let conv_then_measure = measure(&mat, &convolve_temporal(&g, &bank, j).unwrap())
                .unwrap();
            let measure_then_conv = convolve_temporal_cs(
                &measure(&mat, &g).unwrap(),
                &bank,
                j,
                TimePadding::Zero,
            )
            .unwrap();
            let scale = conv_then_measure.l2_norm().max(1.0);
            for (a, b) in conv_then_measure
                .values()
                .iter()
                .zip(measure_then_conv.values())
            {
                assert!((a - b).abs() <= 1e-12 * scale, "scale {j}");
            }
        }
    }
}
