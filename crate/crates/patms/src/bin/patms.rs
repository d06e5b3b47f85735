//! Command-line front end: phantom generation, forward simulation,
//! compressed measurement, reconstruction, rendering, and the property
//! self-tests. Every command is a thin wrapper over the library and is
//! deterministic given its flags and seeds.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O failure, 4 numerical failure.
//! The `PATMS_THREADS` environment variable caps the worker thread count
//! (default: all logical cores).

use clap::{Parser, Subcommand, ValueEnum};
use patms::filters::TemporalFilterBank;
use patms::grid::{Grid2D, ScalarField2D};
use patms::io;
use patms::measure::{measure, CsData, MeasurementMatrix};
use patms::phantom::{
    make_phantom, relative_l2_error, render_image, Normalization, PhantomKind, PhantomSpec,
};
use patms::recon::{
    reconstruct_baseline_l1, reconstruct_landweber, reconstruct_multiscale, MultiscaleConfig,
    ReconResult,
};
use patms::selftest;
use patms::wave::{DetectorRing, TimeGrid, WaveOperator};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "patms",
    version,
    about = "2D photoacoustic forward simulation and multiscale CS reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Disks,
    SmoothBump,
    DeltaGrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixArg {
    Subsample,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Multiscale,
    L1,
    Landweber,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Symmetric,
    Minmax,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Reciprocity,
    Frames,
    Adjoint,
    Appendix,
    Solvers,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a phantom field on the padded grid.
    Phantom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "disks")]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        nx: usize,
    },
    /// Simulate detector data from a phantom field file.
    Forward {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 300)]
        detectors: usize,
        #[arg(long, default_value_t = 200)]
        nt: usize,
        /// Time step; defaults to the grid spacing.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a compressed-sensing measurement matrix to detector data.
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "subsample")]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 4)]
        factor: usize,
        #[arg(long, default_value_t = 75)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "save-matrix")]
        save_matrix: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct the initial pressure from compressed measurements.
    Reconstruct {
        #[arg(long)]
        y: PathBuf,
        /// Measurement matrix file; alternative to --factor.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Subsampling factor used when no matrix file is given.
        #[arg(long, default_value_t = 4)]
        factor: usize,
        #[arg(long, value_enum, default_value = "multiscale")]
        method: MethodArg,
        /// Number of filters in the multiscale bank.
        #[arg(long, default_value_t = 3)]
        scales: usize,
        /// Fixed l1 weight; defaults to the data-scaled rule.
        #[arg(long)]
        lambda: Option<f64>,
        /// Iteration budget applied to every solve stage.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 100)]
        nx: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "save-factors")]
        save_factors: Option<PathBuf>,
        #[arg(long = "metrics-out")]
        metrics_out: Option<PathBuf>,
        /// Ground-truth field for the error metric.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Render a 2D array file as a 16-bit PGM image.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "symmetric")]
        norm: NormArg,
    },
    /// Run the property suites; exits 0 only if every assertion passes.
    Selftest {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 64)]
        nx: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("patms: {e}");
            ExitCode::from(match e {
                patms::Error::Io(_) | patms::Error::Format(_) => EXIT_IO,
                _ => EXIT_NUMERICAL,
            })
        }
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("PATMS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                return;
            }
        }
        eprintln!("patms: ignoring invalid PATMS_THREADS={v}");
    }
}

fn load_field(path: &Path) -> patms::Result<ScalarField2D> {
    let (dims, data) = io::read_array(path)?;
    if dims.len() != 2 || dims[0] != dims[1] || dims[0] % 4 != 0 {
        return Err(patms::Error::Format(format!(
            "expected a square padded field, got dims {dims:?}"
        )));
    }
    let grid = Grid2D::new(dims[0] / 2);
    ScalarField2D::from_values(grid, data)
}

fn run(cmd: Command) -> patms::Result<ExitCode> {
    match cmd {
        Command::Phantom { out, kind, seed, nx } => {
            let kind = match kind {
                KindArg::Disks => PhantomKind::Disks,
                KindArg::SmoothBump => PhantomKind::SmoothBump,
                KindArg::DeltaGrid => PhantomKind::DeltaGrid,
            };
            let grid = Grid2D::new(nx);
            let field = make_phantom(&PhantomSpec::generate(kind, seed), grid)?;
            let n = grid.padded_n();
            io::write_array(&out, &[n, n], field.values())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Forward { input, detectors, nt, dt, out } => {
            let f = load_field(&input)?;
            let dt = dt.unwrap_or(f.grid().spacing());
            let ring = DetectorRing::new(detectors);
            let time = TimeGrid::new(nt, dt);
            let op = WaveOperator::new(f.grid(), ring, time);
            let g = op.forward(&f)?;
            io::write_array(&out, &[detectors, nt], g.values())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Measure { input, matrix, factor, m, seed, save_matrix, out } => {
            let (dims, data) = io::read_array(&input)?;
            if dims.len() != 2 {
                return Err(patms::Error::Format(format!(
                    "expected detector data (2D), got dims {dims:?}"
                )));
            }
            let (n, nt) = (dims[0], dims[1]);
            let ring = DetectorRing::new(n);
            let time = TimeGrid::new(nt, 1.0); // dt does not enter the measurement
            let g = patms::wave::WaveData::new(ring, time, data)?;
            let mat = match matrix {
                MatrixArg::Subsample => MeasurementMatrix::subsampling(n, factor)?,
                MatrixArg::Gaussian => MeasurementMatrix::gaussian(m, n, seed),
            };
            if let Some(path) = save_matrix {
                io::write_array(&path, &[mat.m(), mat.n()], &mat.to_dense())?;
            }
            let y = measure(&mat, &g)?;
            io::write_array(&out, &[y.m(), nt], y.values())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reconstruct {
            y,
            matrix,
            factor,
            method,
            scales,
            lambda,
            iters,
            nx,
            out,
            save_factors,
            metrics_out,
            truth,
        } => {
            let (dims, data) = io::read_array(&y)?;
            if dims.len() != 2 {
                return Err(patms::Error::Format(format!(
                    "expected measurement data (2D), got dims {dims:?}"
                )));
            }
            let (m, nt) = (dims[0], dims[1]);
            let grid = Grid2D::new(nx);
            let time = TimeGrid::new(nt, grid.spacing());
            let ydata = CsData::new(m, time.clone(), data)?;

            let mat = match matrix {
                Some(path) => {
                    let (mdims, mdata) = io::read_array(&path)?;
                    if mdims.len() != 2 {
                        return Err(patms::Error::Format(format!(
                            "expected a matrix (2D), got dims {mdims:?}"
                        )));
                    }
                    MeasurementMatrix::from_dense(mdims[0], mdims[1], mdata)?
                }
                None => MeasurementMatrix::subsampling(m * factor, factor)?,
            };
            let ring = DetectorRing::new(mat.n());
            let wave = WaveOperator::new(grid, ring, time);

            if scales < 2 {
                return Err(patms::Error::ScaleOutOfRange { scale: scales, max: 1 });
            }
            let bank = TemporalFilterBank::new(8.0, scales - 1);
            let mut cfg = MultiscaleConfig { lambda_override: lambda, ..Default::default() };
            if let Some(n) = iters {
                cfg.low_iters = n;
                cfg.high_iters = n;
                cfg.deconv_iters = n;
            }
            let truth_field = match &truth {
                Some(p) => Some(load_field(p)?),
                None => None,
            };

            let result: ReconResult = match method {
                MethodArg::Multiscale => {
                    reconstruct_multiscale(&ydata, &mat, &wave, &bank, &cfg, truth_field.as_ref())?
                }
                MethodArg::L1 => {
                    reconstruct_baseline_l1(&ydata, &mat, &wave, &cfg, truth_field.as_ref())?
                }
                MethodArg::Landweber => {
                    reconstruct_landweber(&ydata, &mat, &wave, &cfg, truth_field.as_ref())?
                }
            };

            let n = grid.padded_n();
            io::write_array(&out, &[n, n], result.f_hat.values())?;
            if let Some(dir) = save_factors {
                if let Some(factors) = &result.factors {
                    std::fs::create_dir_all(&dir)?;
                    for (j, field) in factors.fields.iter().enumerate() {
                        let path = dir.join(format!("factor_{j}.afb"));
                        io::write_array(&path, &[n, n], field.values())?;
                    }
                }
            }
            if let Some(path) = metrics_out {
                let mut rows: Vec<(String, String)> = Vec::new();
                if let Some(t) = &truth_field {
                    let err = match result.rel_l2_error {
                        Some(e) => e,
                        None => relative_l2_error(&result.f_hat, t)?,
                    };
                    rows.push(("rel_l2_error".into(), format!("{err}")));
                }
                if let Some(factors) = &result.factors {
                    for (j, it) in factors.iterations.iter().enumerate() {
                        rows.push((format!("iters_scale_{j}"), format!("{it}")));
                    }
                }
                rows.push(("op_norm".into(), format!("{}", result.op_norm)));
                rows.push(("step_size".into(), format!("{}", result.step_size)));
                io::write_metrics_csv(&path, &rows)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { input, out, norm } => {
            let (dims, data) = io::read_array(&input)?;
            if dims.len() != 2 {
                return Err(patms::Error::Format(format!(
                    "expected a 2D array, got dims {dims:?}"
                )));
            }
            let norm = match norm {
                NormArg::Symmetric => Normalization::Symmetric,
                NormArg::Minmax => Normalization::MinMax,
            };
            let bytes = render_image(&data, dims[1], dims[0], norm);
            io::write_bytes_atomic(&out, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { suite, nx } => {
            let reports = match suite {
                SuiteArg::Reciprocity => vec![selftest::reciprocity_suite(nx)],
                SuiteArg::Frames => vec![selftest::frames_suite(nx)],
                SuiteArg::Adjoint => vec![selftest::adjoint_suite(nx)],
                SuiteArg::Appendix => vec![selftest::appendix_suite()],
                SuiteArg::Solvers => vec![selftest::solvers_suite()],
                SuiteArg::All => selftest::all_suites(nx),
            };
            let mut ok = true;
            for report in &reports {
                for line in report.lines() {
                    println!("{line}");
                }
                ok &= report.passed();
            }
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_NUMERICAL))
            }
        }
    }
}
