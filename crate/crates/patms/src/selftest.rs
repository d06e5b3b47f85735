//! Property suites behind `patms selftest`.
//!
//! Each suite re-derives an identity the pipeline depends on and checks the
//! implementation against it at a configurable grid size: the reciprocity
//! identity between temporal and spatial filtering, the frame bounds and
//! dual reproduction, adjoint exactness against the dense oracle, the
//! radial Radon loop closures, and the solver descent contracts.

use crate::filters::{
    convolve_spatial, convolve_temporal, frame_bounds, radial_radon_oracle,
    radon_dual_filter_analytic, Dim, FrequencyBand, SpatialFilterBank, SpatialKernel,
    TemporalFilterBank,
};
use crate::grid::{dft2_forward, dft2_inverse, support_mask, Grid2D, ScalarField2D};
use crate::measure::MeasurementMatrix;
use crate::recon::CsPatOperator;
use crate::solvers::{estimate_operator_norm, ista, landweber, AdjointPair, SolverConfig};
use crate::wave::{dense_forward_matrix, DetectorRing, TimeGrid, WaveOperator};
use crate::SUPPORT_RADIUS;

/// One verified assertion.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of a suite run.
#[derive(Debug, Clone)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One formatted line per check plus a summary line.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {} ... {} ({})",
                    self.suite,
                    c.name,
                    if c.passed { "ok" } else { "FAIL" },
                    c.detail
                )
            })
            .collect();
        out.push(format!(
            "[{}] {} of {} checks passed",
            self.suite,
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        ));
        out
    }
}

struct Collector {
    suite: String,
    checks: Vec<Check>,
}

impl Collector {
    fn new(suite: &str) -> Self {
        Collector { suite: suite.to_string(), checks: Vec::new() }
    }

    fn le(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: value <= bound,
            detail: format!("{value:.3e} <= {bound:.1e}"),
        });
    }

    fn gt(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: value > bound,
            detail: format!("{value:.3e} > {bound:.1e}"),
        });
    }

    fn yes(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }

    fn finish(self) -> Report {
        Report { suite: self.suite, checks: self.checks }
    }
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Tight Gaussian bump used where a smooth compactly supported field with a
/// controlled bandwidth is needed.
fn tight_bump(grid: Grid2D, beta: f64) -> ScalarField2D {
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

fn lcg_fill(values: &mut [f64], seed: u64) {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(12345);
    for v in values.iter_mut() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }
}

/// Reciprocity identity: temporal filtering of simulated data against
/// propagation of the spatially filtered source, per scale, on a grid sized
/// so the comparison window stays clear of periodic wrap-around.
pub fn reciprocity_suite(nx: usize) -> Report {
    let mut c = Collector::new("reciprocity");
    let grid = Grid2D::new(nx);
    let bank = TemporalFilterBank::standard();
    let sbank = SpatialFilterBank::new(&bank, grid);
    let dt = grid.spacing();
    let nt = (2.2 / dt).round() as usize;
    let ring = DetectorRing::new(300);
    let time = TimeGrid::new(nt, dt);
    let op = WaveOperator::new(grid, ring.clone(), time.clone());

    let f = tight_bump(grid, 128.0);
    let g = match op.forward(&f) {
        Ok(g) => g,
        Err(e) => {
            c.yes("forward solve", false, e.to_string());
            return c.finish();
        }
    };
    for j in 0..bank.scales() {
        let lhs = convolve_temporal(&g, &bank, j).unwrap();
        let filtered = convolve_spatial(&f, SpatialKernel::Scale(j), &sbank).unwrap();
        // the convolved source legitimately spreads past the support disk,
        // so propagate it through the raw path
        let rhs = op.forward_flat(filtered.values());
        let err = rel_l2(lhs.values(), &rhs);
        c.le(&format!("temporal vs spatial filtering, scale {j}"), err, 0.05);
    }
    c.finish()
}

/// Frame bounds on the certified band, dual reproduction, and band-limited
/// synthesis-analysis reproduction.
pub fn frames_suite(nx: usize) -> Report {
    let mut c = Collector::new("frames");
    let grid = Grid2D::new(nx);
    let bank = TemporalFilterBank::standard();
    let sbank = SpatialFilterBank::new(&bank, grid);
    let band_hi = 32.0 * 2.0f64.sqrt();

    let (a, b) = frame_bounds(&bank, FrequencyBand::new(0.0, band_hi), 500);
    c.gt("lower frame bound on [0, 32*sqrt2]", a, 1e-3);
    c.yes("frame bounds ordered", a <= b, format!("A={a:.3e} B={b:.3e}"));

    // pointwise reproduction sum over non-degenerate nodes
    let n = grid.padded_n();
    let mut degenerate = vec![false; n * n];
    for (k1, k2) in sbank.degenerate_nodes() {
        degenerate[grid.flat(k1, k2)] = true;
    }
    let spectra: Vec<_> = (0..sbank.scales()).map(|j| sbank.spectrum_field(j).unwrap()).collect();
    let duals: Vec<_> = (0..sbank.scales()).map(|j| sbank.dual_field(j).unwrap()).collect();
    let mut worst: f64 = 0.0;
    let nxi = grid.nx() as i64;
    for k1 in -nxi..nxi {
        for k2 in -nxi..nxi {
            if degenerate[grid.flat(k1, k2)] {
                continue;
            }
            let s: f64 = spectra
                .iter()
                .zip(duals.iter())
                .map(|(u, d)| u.get(k1, k2).re * d.get(k1, k2).re)
                .sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    c.le("dual reproduction sum deviation", worst, 1e-12);

    // reproduction of a band-limited field through analysis + dual synthesis
    let mut f = ScalarField2D::zeros(grid);
    lcg_fill(f.values_mut(), 42);
    let mut spec = dft2_forward(&f);
    for k1 in -nxi..nxi {
        for k2 in -nxi..nxi {
            let w = (grid.xi_at(k1).powi(2) + grid.xi_at(k2).powi(2)).sqrt();
            if w > band_hi {
                let idx = grid.flat(k1, k2);
                spec.values_mut()[idx] = crate::fft::Complex64::new(0.0, 0.0);
            }
        }
    }
    let fbl = dft2_inverse(&spec).unwrap();
    let mut acc = ScalarField2D::zeros(grid);
    for j in 0..sbank.scales() {
        let analyzed = convolve_spatial(&fbl, SpatialKernel::Scale(j), &sbank).unwrap();
        let synth = convolve_spatial(&analyzed, SpatialKernel::Dual(j), &sbank).unwrap();
        for (av, sv) in acc.values_mut().iter_mut().zip(synth.values()) {
            *av += sv;
        }
    }
    c.le(
        "band-limited reproduction error",
        rel_l2(acc.values(), fbl.values()),
        1e-3,
    );
    c.finish()
}

/// Fourier-slice cross-check: the spectral route for `u_j` against the 2D
/// transform of the Abel-quadrature radial profile, at in-band frequencies
/// where the spectrum is non-negligible.
pub fn fourier_slice_check(nx: usize, frequencies: usize) -> Report {
    let mut c = Collector::new("fourier-slice");
    let grid = Grid2D::new(nx);
    let bank = TemporalFilterBank::standard();
    let band_hi = 32.0 * 2.0f64.sqrt();

    for j in 0..bank.scales() {
        // radial profile by Abel quadrature, evaluated once per distinct
        // squared node radius
        let mut field = ScalarField2D::zeros(grid);
        let nxi = grid.nx() as i64;
        let mut cache: std::collections::HashMap<i64, f64> = std::collections::HashMap::new();
        let dx = grid.spacing();
        for i1 in -nxi..nxi {
            for i2 in -nxi..nxi {
                let key = i1 * i1 + i2 * i2;
                let v = *cache.entry(key).or_insert_with(|| {
                    let r = (key as f64).sqrt() * dx;
                    radon_dual_filter_analytic(&bank, j, Dim::Two, r).unwrap()
                });
                field.set(i1, i2, v);
            }
        }
        let spec = dft2_forward(&field);
        // spread test frequencies along a diagonal-ish sweep inside the band
        let peak = (0..200)
            .map(|i| bank.spectrum(j, band_hi * i as f64 / 199.0).unwrap())
            .fold(0.0f64, f64::max);
        let mut checked = 0usize;
        let mut worst: f64 = 0.0;
        let mut k1 = 1i64;
        let mut k2 = 0i64;
        while checked < frequencies {
            let w = (grid.xi_at(k1).powi(2) + grid.xi_at(k2).powi(2)).sqrt();
            if w <= band_hi {
                let expect = bank.spectrum(j, w).unwrap();
                if expect >= 1e-3 * peak {
                    let got = spec.get(k1, k2).re;
                    worst = worst.max((got - expect).abs() / expect.abs());
                    checked += 1;
                }
            }
            // walk a deterministic lattice path
            k1 += 2;
            if grid.xi_at(k1) > band_hi {
                k1 = 1;
                k2 += 1;
                if grid.xi_at(k2) > band_hi {
                    break;
                }
            }
        }
        c.yes(
            &format!("spectral vs Abel route, scale {j}"),
            checked >= frequencies.min(50) && worst <= 1e-4,
            format!("{checked} frequencies, worst rel dev {worst:.3e}"),
        );
    }
    c.finish()
}

/// Adjoint exactness: random inner-product pairs at the given size and the
/// dense-matrix transpose oracle on the 8-node grid.
pub fn adjoint_suite(nx: usize) -> Report {
    let mut c = Collector::new("adjoint");
    let grid = Grid2D::new(nx);
    let ring = DetectorRing::new(300);
    let time = TimeGrid::new(2 * nx, grid.spacing());
    let op = WaveOperator::new(grid, ring.clone(), time.clone());
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut f = vec![0.0; grid.node_count()];
        let mut g = vec![0.0; ring.n() * time.nt()];
        lcg_fill(&mut f, seed * 2 + 1);
        lcg_fill(&mut g, seed * 2 + 2);
        let wf = op.forward_flat(&f);
        let wg = op.adjoint_flat(&g);
        let lhs: f64 = wf.iter().zip(&g).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.iter().zip(&wg).map(|(a, b)| a * b).sum();
        let fn2: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let gn2: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max((lhs - rhs).abs() / (fn2 * gn2));
    }
    c.le("random-pair inner products (20 seeds)", worst, 1e-10);

    // dense oracle on the small grid
    let sgrid = Grid2D::new(8);
    let sring = DetectorRing::new(10);
    let stime = TimeGrid::new(12, sgrid.spacing());
    let sop = WaveOperator::new(sgrid, sring.clone(), stime.clone());
    let dense = dense_forward_matrix(sgrid, &sring, &stime).unwrap();
    let mut f = vec![0.0; sgrid.node_count()];
    let mut g = vec![0.0; sring.n() * stime.nt()];
    lcg_fill(&mut f, 333);
    lcg_fill(&mut g, 444);
    let fwd_dev = rel_l2(&sop.forward_flat(&f), &dense.apply(&f));
    c.le("dense oracle forward deviation (8x8)", fwd_dev, 1e-12);
    let adj_dev = rel_l2(&sop.adjoint_flat(&g), &dense.apply_transpose(&g));
    c.le("dense oracle transpose deviation (8x8)", adj_dev, 1e-12);
    c.finish()
}

/// Loop closures for the radial Radon formulas.
pub fn appendix_suite() -> Report {
    let mut c = Collector::new("appendix");
    let bank = TemporalFilterBank::standard();
    let tail = 10.0 / bank.base_scale();
    for j in 0..bank.scales() {
        let mut worst3: f64 = 0.0;
        let mut worst2: f64 = 0.0;
        for &t in &[0.0, 0.05, 0.1] {
            let v = bank.eval(j, t).unwrap();
            let u3 = |s: f64| radon_dual_filter_analytic(&bank, j, Dim::Three, s).unwrap();
            let r3 = radial_radon_oracle(&u3, Dim::Three, t, tail).unwrap();
            worst3 = worst3.max((r3 - v).abs() / v.abs());
            let u2 = |s: f64| radon_dual_filter_analytic(&bank, j, Dim::Two, s).unwrap();
            let r2 = radial_radon_oracle(&u2, Dim::Two, t, tail).unwrap();
            worst2 = worst2.max((r2 - v).abs() / v.abs());
        }
        c.le(&format!("3D loop closure, scale {j}"), worst3, 1e-6);
        c.le(&format!("2D loop closure, scale {j}"), worst2, 1e-4);
    }
    c.finish()
}

// -- dense linear-algebra oracle helpers (small systems only) --

/// Cholesky factorization of a symmetric positive-definite matrix; returns
/// the lower factor or `None` if a pivot is not positive.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

/// Dense least-squares solution of `op x = y` restricted to the masked
/// columns, by normal equations and Cholesky. Panics if the masked system is
/// rank-deficient; small test systems only.
fn dense_masked_least_squares(op: &dyn AdjointPair, y: &[f64], mask: &[f64]) -> Vec<f64> {
    let cols: Vec<usize> =
        (0..op.domain_dim()).filter(|&i| mask[i] != 0.0).collect();
    let k = cols.len();
    // materialize the masked columns
    let mut a = vec![vec![0.0; 0]; k];
    let mut e = vec![0.0; op.domain_dim()];
    for (ci, &c) in cols.iter().enumerate() {
        e[c] = 1.0;
        a[ci] = op.apply(&e);
        e[c] = 0.0;
    }
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let v: f64 = a[i].iter().zip(a[j].iter()).map(|(p, q)| p * q).sum();
            gram[i * k + j] = v;
            gram[j * k + i] = v;
        }
    }
    let rhs: Vec<f64> = (0..k).map(|i| a[i].iter().zip(y.iter()).map(|(p, q)| p * q).sum()).collect();
    let l = cholesky(&gram, k).expect("masked system is rank-deficient");
    let xk = cholesky_solve(&l, k, &rhs);
    let mut x = vec![0.0; op.domain_dim()];
    for (ci, &c) in cols.iter().enumerate() {
        x[c] = xk[ci];
    }
    x
}

/// Solver descent contracts: monotone Landweber residuals and ISTA
/// objectives with the automatic step size, agreement with the dense
/// pseudoinverse oracle, the power-iteration accuracy, a full-rank check of
/// the dense oracle, and sparse recovery on a small system.
pub fn solvers_suite() -> Report {
    let mut c = Collector::new("solvers");
    let grid = Grid2D::new(8);
    let ring = DetectorRing::new(14);
    let time = TimeGrid::new(18, grid.spacing());
    let wave = WaveOperator::new(grid, ring.clone(), time.clone());
    let mat = MeasurementMatrix::subsampling(14, 2).unwrap();
    let op = CsPatOperator::new(&wave, &mat).unwrap();
    let mask = support_mask(grid, SUPPORT_RADIUS);

    // consistent data from a masked source
    let mut truth = vec![0.0; grid.node_count()];
    lcg_fill(&mut truth, 5);
    for (t, &m) in truth.iter_mut().zip(mask.iter()) {
        *t *= m;
    }
    let y = op.apply(&truth);

    // power iteration against a dense oracle: materialize the composite
    // matrix, form the small Gram matrix on the measurement side, and
    // iterate it to convergence through plain dense arithmetic
    let l_est = estimate_operator_norm(&op, 30, 0);
    let rows = op.range_dim();
    let cols = op.domain_dim();
    let mut dense = vec![0.0; rows * cols];
    let mut e = vec![0.0; cols];
    for cidx in 0..cols {
        e[cidx] = 1.0;
        for (r, v) in op.apply(&e).into_iter().enumerate() {
            dense[r * cols + cidx] = v;
        }
        e[cidx] = 0.0;
    }
    let mut gram = vec![0.0; rows * rows];
    for i in 0..rows {
        for j in 0..=i {
            let v: f64 = (0..cols).map(|k| dense[i * cols + k] * dense[j * cols + k]).sum();
            gram[i * rows + j] = v;
            gram[j * rows + i] = v;
        }
    }
    let mut z = vec![1.0; rows];
    let mut l_ref = 0.0;
    for _ in 0..1000 {
        let mut zn = vec![0.0; rows];
        for i in 0..rows {
            zn[i] = gram[i * rows..(i + 1) * rows].iter().zip(&z).map(|(a, b)| a * b).sum();
        }
        l_ref = zn.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in zn.iter_mut() {
            *v /= l_ref;
        }
        z = zn;
    }
    c.le(
        "power-iteration accuracy vs dense eigenvalue oracle",
        (l_est - l_ref).abs() / l_ref,
        0.05,
    );

    // Landweber with auto step: monotone residuals, matches the dense
    // pseudoinverse on consistent data
    let cfg = SolverConfig { max_iters: 4000, rel_tol: 1e-12, ..Default::default() };
    let lw = landweber(&op, &y, Some(&mask), &cfg);
    let monotone = lw.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    c.yes("Landweber residual monotonicity (auto step)", monotone, format!(
        "{} iterations",
        lw.iterations
    ));
    let pinv = dense_masked_least_squares(&op, &y, &mask);
    c.le("Landweber vs dense pseudoinverse", rel_l2(&lw.solution, &pinv), 1e-4);

    // ISTA objective monotonicity under the data-scaled lambda rule
    let lambda = 1e-3 * op.apply_adjoint(&y).iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let icfg = SolverConfig { lambda, max_iters: 800, rel_tol: 1e-12, ..Default::default() };
    let is = ista(&op, &y, Some(&mask), &icfg);
    let imono = is.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    c.yes("ISTA objective monotonicity (auto step)", imono, format!(
        "{} iterations",
        is.iterations
    ));

    // sparse recovery: 3-sparse source, support containment and accuracy
    let mut sparse = vec![0.0; grid.node_count()];
    sparse[grid.flat(1, 2)] = 1.0;
    sparse[grid.flat(-2, 0)] = -0.8;
    sparse[grid.flat(0, -3)] = 0.6;
    let ys = op.apply(&sparse);
    let lam_s = 1e-3 * op.apply_adjoint(&ys).iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let scfg = SolverConfig { lambda: lam_s, max_iters: 6000, rel_tol: 1e-13, ..Default::default() };
    let sol = ista(&op, &ys, Some(&mask), &scfg);
    let err = rel_l2(&sol.solution, &sparse);
    let thresh = 1e-3 * sol.solution.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let support_ok = sol
        .solution
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() > thresh)
        .all(|(i, _)| sparse[i] != 0.0);
    c.yes(
        "sparse recovery support containment",
        support_ok,
        format!("relative error {err:.3e}"),
    );
    c.le("sparse recovery error", err, 0.1);

    // Dense oracle rank certificate: with 40 detectors and 60 time samples
    // the 8-node grid gives a full-column-rank matrix (nearest-node snapping
    // on coarser grids leaves too few distinct sample nodes). dt = spacing/2
    // keeps the corner modes below the temporal Nyquist rate.
    let rgrid = Grid2D::new(8);
    let rring = DetectorRing::new(40);
    let rtime = TimeGrid::new(60, rgrid.spacing() / 2.0);
    let dense = dense_forward_matrix(rgrid, &rring, &rtime).unwrap();
    let cols = dense.cols();
    let mut gram = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in 0..=i {
            let mut v = 0.0;
            for r in 0..dense.rows() {
                v += dense.get(r, i) * dense.get(r, j);
            }
            gram[i * cols + j] = v;
            gram[j * cols + i] = v;
        }
    }
    let finite = gram.iter().all(|v| v.is_finite());
    let full_rank = finite && cholesky(&gram, cols).is_some();
    c.yes(
        "dense oracle full column rank (8x8, n=40, nt=60)",
        full_rank,
        format!("{cols} columns"),
    );
    c.finish()
}

/// Run every suite at the given grid size.
pub fn all_suites(nx: usize) -> Vec<Report> {
    vec![
        reciprocity_suite(nx),
        frames_suite(nx),
        fourier_slice_check(nx, 50),
        adjoint_suite(nx),
        appendix_suite(),
        solvers_suite(),
    ]
}
