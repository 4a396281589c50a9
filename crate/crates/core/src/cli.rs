//! Batch front end. Every command reads JSON inputs, writes one JSON (or CSV)
//! artifact, and maps failures to exit codes: 0 pass, 2 validation failure
//! or negative verdict, 3 numerical conditioning failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::cayley::{PhiSpec, SchurParameter};
use crate::error::{Error, ErrorClass, Result};
use crate::io::{self, MatrixJson, MeasureFile, MomentFile};
use crate::linalg::{self, CMat, CVec};
use crate::model::MomentModel;
use crate::moments::{self, MomentSequence, Tolerances};
use crate::nevanlinna;
use crate::reconstruct;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Moment-reproduction threshold used by `verify` when the problem is determinate.
pub const VERIFY_TOL_DETERMINATE: f64 = 1e-8;
/// Same, for moments recovered from the large-`|z|` expansion.
pub const VERIFY_TOL_ASYMPTOTIC: f64 = 1e-3;
pub const GRAM_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Parser)]
#[command(name = "hamburger", version, about = "Truncated matrix Hamburger moment problem toolkit")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, default_value_t = moments::DEFAULT_TOL_PSD)]
    pub tol_psd: f64,
    #[arg(long, global = true, default_value_t = moments::DEFAULT_TOL_RANK)]
    pub tol_rank: f64,
    #[arg(long, global = true, default_value_t = moments::DEFAULT_TOL_HERM)]
    pub tol_herm: f64,
    /// Seed for randomized consistency checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Decide solvability from the block Hankel matrix.
    Check(MomentsArg),
    /// Build the Gram model and report rank, domain and defect numbers.
    Build {
        #[command(flatten)]
        input: MomentsArg,
        /// Include Q, A, I and K in the report.
        #[arg(long)]
        dump: bool,
    },
    /// Evaluate R(z) on a grid and write CSV.
    Evaluate {
        #[command(flatten)]
        input: MomentsArg,
        #[command(flatten)]
        phi: PhiArg,
        /// "re0:re1:n,im0:im1:n"
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Recover moments and (optionally) interval masses from R(z).
    Reconstruct {
        #[command(flatten)]
        input: MomentsArg,
        #[command(flatten)]
        phi: PhiArg,
        #[command(flatten)]
        perron: PerronArgs,
    },
    /// Moment reproduction and Herglotz checks.
    Verify {
        #[command(flatten)]
        input: MomentsArg,
        #[command(flatten)]
        phi: PhiArg,
    },
    /// Moments of a discrete measure file.
    Generate {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        order: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArg {
    #[arg(long)]
    pub moments: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhiArg {
    /// zero | unitary:THETA | parameter JSON file
    #[arg(long, default_value = "zero")]
    pub phi: String,
}

#[derive(Debug, Clone, Args)]
pub struct PerronArgs {
    /// a:b
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// Number of equal cells the interval is cut into.
    #[arg(long, default_value_t = 1)]
    pub cells: usize,
    /// Comma-separated decreasing ε schedule.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, default_value_t = reconstruct::DEFAULT_N_QUAD)]
    pub n_quad: usize,
}

/// A finished run: the artifact text and whether the verdict was positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub text: String,
    pub pass: bool,
}

impl RunConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            psd: self.tol_psd,
            rank: self.tol_rank,
            herm: self.tol_herm,
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn matrices(ms: &[CMat]) -> Vec<MatrixJson> {
    ms.iter().map(MatrixJson::from_matrix).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Parses `"re0:re1:n,im0:im1:n"` into points ordered real-part-major.
pub fn parse_grid(spec: &str) -> Result<Vec<Complex64>> {
    let axis = |s: &str| -> Result<Vec<f64>> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Input(format!("grid axis '{s}' is not lo:hi:n")));
        }
        let lo: f64 = parts[0].parse().map_err(|_| Error::Input(format!("bad number '{}'", parts[0])))?;
        let hi: f64 = parts[1].parse().map_err(|_| Error::Input(format!("bad number '{}'", parts[1])))?;
        let n: usize = parts[2].parse().map_err(|_| Error::Input(format!("bad count '{}'", parts[2])))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Input(format!("grid axis '{s}' is empty or non-finite")));
        }
        Ok(linspace(lo, hi, n))
    };
    let (re, im) = spec
        .split_once(',')
        .ok_or_else(|| Error::Input(format!("grid '{spec}' needs a real and an imaginary axis")))?;
    let (re, im) = (axis(re)?, axis(im)?);
    Ok(re
        .iter()
        .flat_map(|&x| im.iter().map(move |&y| Complex64::new(x, y)))
        .collect())
}

fn parse_interval(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Input(format!("interval '{s}' is not a:b")))?;
    let a: f64 = a.trim().parse().map_err(|_| Error::Input(format!("bad number '{a}'")))?;
    let b: f64 = b.trim().parse().map_err(|_| Error::Input(format!("bad number '{b}'")))?;
    Ok((a, b))
}

/// Herglotz sample used by `reconstruct` and `verify`.
pub fn default_herglotz_grid() -> Vec<Complex64> {
    let ys = [0.05, 0.1, 0.3, 0.7, 1.5, 3.0, 10.0];
    linspace(-5.0, 5.0, 21)
        .into_iter()
        .flat_map(|x| ys.iter().map(move |&y| Complex64::new(x, y)))
        .collect()
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(values: &[nevanlinna::NevanlinnaValue], dim: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["z_re".to_string(), "z_im".to_string()];
    for j in 0..dim {
        for k in 0..dim {
            header.push(format!("R_{j}{k}_re"));
            header.push(format!("R_{j}{k}_im"));
        }
    }
    w.write_record(&header)?;
    for v in values {
        let mut row = vec![format_float(v.z.re), format_float(v.z.im)];
        for j in 0..dim {
            for k in 0..dim {
                row.push(format_float(v.r[(j, k)].re));
                row.push(format_float(v.r[(j, k)].im));
            }
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

struct Recovery {
    moments_recovered: Vec<CMat>,
    max_abs_error: f64,
    measure: Option<MeasureFile>,
    herglotz: reconstruct::HerglotzReport,
    determinate: bool,
}

fn recover(model: &MomentModel, phi: &SchurParameter) -> Result<Recovery> {
    let input = model.moments();
    let herglotz = reconstruct::herglotz_check(&nevanlinna::evaluate_grid(model, phi, &default_herglotz_grid())?);
    if model.is_determinate() {
        let mu = reconstruct::recover_discrete(model)?;
        let regenerated = moments::generate_from_measure(&mu, input.order())?;
        let max_abs_error = regenerated
            .moments()
            .iter()
            .zip(input.moments())
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max);
        Ok(Recovery {
            moments_recovered: regenerated.moments().to_vec(),
            max_abs_error,
            measure: Some(MeasureFile::from_measure(&mu)),
            herglotz,
            determinate: true,
        })
    } else {
        let fit = reconstruct::asymptotic_moments(
            |z| nevanlinna::evaluate_matrix(model, phi, z).map(|v| v.r),
            2,
            &reconstruct::default_y_grid(),
        )?;
        let max_abs_error = fit
            .moments
            .iter()
            .zip(input.moments())
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max);
        Ok(Recovery {
            moments_recovered: fit.moments,
            max_abs_error,
            measure: None,
            herglotz,
            determinate: false,
        })
    }
}

/// Largest relative violation of `⟨x_{h,j}, x_{g,k}⟩ = (S_{j+k} h, g)` over
/// seeded random vectors.
fn gram_identity_residual(model: &MomentModel, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = &model.gram;
    let (d, n) = (g.dim(), g.n());
    let mut worst = 0.0_f64;
    for _ in 0..8 {
        let mut draw = || CVec::from_fn(d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (h, f) = (draw(), draw());
        for j in 0..=n {
            for k in 0..=n {
                let lhs = g.embed(&h, j)?.inner(&g.embed(&f, k)?);
                let rhs = linalg::form(model.moments().moment(j + k), &h, &f);
                worst = worst.max((lhs - rhs).norm() / (g.hankel_norm() * h.norm() * f.norm()));
            }
        }
    }
    Ok(worst)
}

fn load(cfg: &RunConfig, input: &MomentsArg) -> Result<MomentSequence> {
    io::read_moments(&input.moments, cfg.tol_herm)
}

fn build_model(cfg: &RunConfig, input: &MomentsArg) -> Result<MomentModel> {
    MomentModel::build(&load(cfg, input)?, &cfg.tolerances())
}

fn resolve_phi(model: &MomentModel, phi: &PhiArg) -> Result<SchurParameter> {
    PhiSpec::parse_cli(&phi.phi)?.resolve(&model.cayley)
}

/// Executes one command and returns its artifact.
pub fn run(cfg: &RunConfig) -> Result<Artifact> {
    cfg.tolerances().validate()?;
    match &cfg.command {
        Command::Check(input) => {
            let m = load(cfg, input)?;
            let report = moments::check_solvability(&m, &cfg.tolerances());
            Ok(Artifact {
                pass: report.solvable,
                text: to_json(&report)?,
            })
        }
        Command::Build { input, dump } => {
            let model = build_model(cfg, input)?;
            let g = &model.gram;
            let mut report = json!({
                "dim": g.dim(),
                "order": g.moments().order(),
                "rank": g.rank(),
                "domain_dim": model.shift.domain_dim,
                "defect_dims": [model.cayley.defect_dims.0, model.cayley.defect_dims.1],
                "determinate": model.is_determinate(),
                "shift_consistency_residual": model.shift.consistency_residual,
                "symmetry_residual": model.shift.symmetry_residual(),
                "k_range_residual": model.k_range_residual(),
            });
            if *dump {
                report["dump"] = json!({
                    "Q": MatrixJson::from_matrix(g.coord_map()),
                    "A": MatrixJson::from_matrix(&model.shift.action),
                    "I": MatrixJson::from_matrix(&model.embed_i.matrix),
                    "K": MatrixJson::from_matrix(&model.embed_k.matrix),
                });
            }
            Ok(Artifact {
                pass: true,
                text: to_json(&report)?,
            })
        }
        Command::Evaluate { input, phi, grid } => {
            let model = build_model(cfg, input)?;
            let p = resolve_phi(&model, phi)?;
            let zs = parse_grid(grid)?;
            let values = nevanlinna::evaluate_grid(&model, &p, &zs)?;
            Ok(Artifact {
                pass: true,
                text: write_csv(&values, model.dim())?,
            })
        }
        Command::Reconstruct { input, phi, perron } => {
            let model = build_model(cfg, input)?;
            let p = resolve_phi(&model, phi)?;
            let rec = recover(&model, &p)?;
            let distribution = match &perron.interval {
                None => None,
                Some(iv) => {
                    let (a, b) = parse_interval(iv)?;
                    if perron.cells == 0 {
                        return Err(Error::Input("cells must be positive".into()));
                    }
                    let grid = linspace(a, b, perron.cells + 1);
                    let eps = perron.eps.clone().unwrap_or_else(|| reconstruct::DEFAULT_EPS.to_vec());
                    Some(reconstruct::reconstruct_distribution(
                        |z| nevanlinna::evaluate_matrix(&model, &p, z).map(|v| v.r),
                        &grid,
                        &eps,
                        perron.n_quad,
                        model.moments().moment(0),
                    )?)
                }
            };
            let report = json!({
                "moments_in": MomentFile::from_sequence(model.moments()).moments,
                "moments_recovered": matrices(&rec.moments_recovered),
                "max_abs_error": rec.max_abs_error,
                "herglotz_min_eig": rec.herglotz.min_eigenvalue,
                "determinate": rec.determinate,
                "measure": rec.measure,
                "distribution": distribution,
            });
            Ok(Artifact {
                pass: rec.herglotz.pass,
                text: to_json(&report)?,
            })
        }
        Command::Verify { input, phi } => {
            let model = build_model(cfg, input)?;
            let p = resolve_phi(&model, phi)?;
            let rec = recover(&model, &p)?;
            let tolerance = if rec.determinate {
                VERIFY_TOL_DETERMINATE
            } else {
                VERIFY_TOL_ASYMPTOTIC
            };
            let gram_residual = gram_identity_residual(&model, cfg.seed)?;
            let pass = rec.max_abs_error <= tolerance && rec.herglotz.pass && gram_residual <= GRAM_IDENTITY_TOL;
            let report = json!({
                "moments_in": MomentFile::from_sequence(model.moments()).moments,
                "moments_recovered": matrices(&rec.moments_recovered),
                "max_abs_error": rec.max_abs_error,
                "herglotz_min_eig": rec.herglotz.min_eigenvalue,
                "determinate": rec.determinate,
                "tolerance": tolerance,
                "gram_identity_residual": gram_residual,
                "seed": cfg.seed,
                "pass": pass,
            });
            Ok(Artifact {
                pass,
                text: to_json(&report)?,
            })
        }
        Command::Generate { measure, order } => {
            let mu = io::read_measure(measure)?;
            let m = moments::generate_from_measure(&mu, *order)?;
            Ok(Artifact {
                pass: true,
                text: to_json(&MomentFile::from_sequence(&m))?,
            })
        }
    }
}

pub fn exit_code(result: &Result<Artifact>) -> i32 {
    match result {
        Ok(a) if a.pass => EXIT_PASS,
        Ok(_) => EXIT_VALIDATION,
        Err(e) => match e.class() {
            ErrorClass::Validation => EXIT_VALIDATION,
            ErrorClass::Numerical => EXIT_NUMERICAL,
        },
    }
}

pub fn error_json(e: &Error) -> String {
    json!({ "error": e.to_string(), "kind": e.tag() }).to_string() + "\n"
}

/// Runs, writes the artifact (or the error object) and returns the exit code.
pub fn main_with(cfg: &RunConfig) -> i32 {
    let result = run(cfg);
    let code = exit_code(&result);
    let text = match &result {
        Ok(a) => a.text.clone(),
        Err(e) => error_json(e),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("failed to write output: {e}");
        return EXIT_VALIDATION;
    }
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:1:2,0.5:1.5:3").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], Complex64::new(0.0, 0.5));
        assert_eq!(g[1], Complex64::new(0.0, 1.0));
        assert_eq!(g[5], Complex64::new(1.0, 1.5));
        assert_eq!(parse_grid("0:0:1,2:2:1").unwrap(), vec![Complex64::new(0.0, 2.0)]);
        assert!(parse_grid("0:1:0,1:2:2").is_err());
        assert!(parse_grid("0:1:2").is_err());
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0).parse::<f64>().unwrap(), -2.0);
    }

    #[test]
    fn interval_parsing() {
        assert_eq!(parse_interval("-1.5:2").unwrap(), (-1.5, 2.0));
        assert!(parse_interval("1").is_err());
    }
}
