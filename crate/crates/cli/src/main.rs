//! Command-line front door: apply the operator, run verification bundles,
//! solve Dirichlet problems, and drive regularity experiments from config
//! files. All outputs are deterministic JSON/CSV written atomically.
//!
//! Exit codes: 0 all checks pass, 1 check failures, 2 config/schema
//! violations, 3 computation errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vt_core::checks::{run_named_check, CheckOptions, CheckReport, CHECK_NAMES};
use vt_core::corpus::{corpus, CorpusSpec};
use vt_core::dirichlet::{family_basis, solve_dirichlet, solve_on_basis, ExteriorData};
use vt_core::operator::{apply_hypersingular, apply_spectral, OperatorOutput, VtParams};
use vt_core::padic::DomainFamily;
use vt_core::regularity::{
    check_measure_density, estimate_holder_exponent, fundamental_profile_fit,
    make_punctured_disk, make_sphere_union_domain, LambdaSequence, RegularityReport,
};
use vt_core::report::{write_json, CsvTable};
use vt_core::schema::{
    ratio_bounds, DomainJson, ExperimentJson, ProblemJson, StepFunctionJson, TermJson,
};
use vt_core::schwartz::StepFunction;

#[derive(Parser)]
#[command(name = "vt", about = "Fractional-order analysis on p-adic spaces", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Prime base of the field.
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Order of the fractional operator.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Dimension of the underlying space.
    #[arg(long, global = true)]
    dimension: Option<usize>,
    /// Seed for all randomized corpora.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output path for the primary report/result file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the pass tolerance of ratio-style checks.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the fractional operator to a step function from a JSON file.
    Apply {
        #[command(flatten)]
        common: Common,
        /// Input step-function JSON.
        #[arg(long)]
        input: PathBuf,
        /// spectral | hypersingular | both
        #[arg(long, default_value = "both")]
        method: String,
    },
    /// Exact Fourier transform (or inverse) of a step function.
    Fourier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = false)]
        inverse: bool,
    },
    /// Run a named verification bundle (or `all`).
    Verify {
        #[command(flatten)]
        common: Common,
        /// Check name; `vt verify --check list` prints the catalog.
        #[arg(long)]
        check: String,
        /// For `poincare-wirtinger-tightness`: also sweep scales and write a
        /// CSV (columns alpha, N, m, lambda_min, ratio_max).
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
    },
    /// Solve a Dirichlet problem described by a config file.
    Dirichlet {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: PathBuf,
        /// Optional separate report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Boundary-regularity experiment described by a config file.
    Regularity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: PathBuf,
        /// CSV with one row per resolved shell.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit a seeded corpus of random step functions.
    Corpus {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        support: i32,
        #[arg(long, default_value_t = 3)]
        scale: i32,
        #[arg(long, default_value_t = 0.6)]
        density: f64,
        /// Real-valued corpus instead of complex.
        #[arg(long, default_value_t = false)]
        real: bool,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                AppError::Config(_) => EXIT_CONFIG,
                AppError::Compute(_) => EXIT_COMPUTE,
            })
        }
    }
}

enum AppError {
    Config(String),
    Compute(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(s) => write!(f, "{s}"),
            AppError::Compute(s) => write!(f, "{s}"),
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Config(e.to_string())
}

fn compute_err(e: vt_core::Error) -> AppError {
    match e {
        vt_core::Error::Config(msg) => AppError::Config(msg),
        other => AppError::Compute(other.to_string()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("read {path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| AppError::Config(format!("parse {path:?}: {e}")))
}

fn out_path(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn dispatch(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::Apply { common, input, method } => cmd_apply(common, &input, &method),
        Command::Fourier { common, input, inverse } => cmd_fourier(common, &input, inverse),
        Command::Verify { common, check, sweep_csv } => cmd_verify(common, &check, sweep_csv),
        Command::Dirichlet { common, config, report } => cmd_dirichlet(common, &config, report),
        Command::Regularity { common, config, csv } => cmd_regularity(common, &config, csv),
        Command::Corpus { common, count, support, scale, density, real } => {
            cmd_corpus(common, count, support, scale, density, real)
        }
    }
}

#[derive(Serialize)]
struct TailJson {
    coeff_re: f64,
    coeff_im: f64,
    from_exp: i32,
    decay_exponent: f64,
}

#[derive(Serialize)]
struct ApplyReport {
    method: String,
    alpha: f64,
    prime: u32,
    dimension: usize,
    result: StepFunctionJson,
    tail: TailJson,
    dual_route_gap: Option<f64>,
}

fn tail_json(out: &OperatorOutput, dim: usize) -> TailJson {
    TailJson {
        coeff_re: out.tail_coeff.re,
        coeff_im: out.tail_coeff.im,
        from_exp: out.tail_from_exp,
        decay_exponent: -(out.alpha + dim as f64),
    }
}

fn cmd_apply(common: Common, input: &Path, method: &str) -> Result<ExitCode, AppError> {
    let fj: StepFunctionJson = read_json(input)?;
    let f = fj.to_function().map_err(compute_err)?;
    let alpha = common.alpha.ok_or(AppError::Config("--alpha is required".into()))?;
    let params = VtParams::new(alpha, f.prime(), f.dim()).map_err(compute_err)?;
    let (primary, gap, label) = match method {
        "spectral" => (apply_spectral(&f, &params).map_err(compute_err)?, None, "spectral"),
        "hypersingular" => {
            (apply_hypersingular(&f, &params).map_err(compute_err)?, None, "hypersingular")
        }
        "both" => {
            let a = apply_spectral(&f, &params).map_err(compute_err)?;
            let b = apply_hypersingular(&f, &params).map_err(compute_err)?;
            let gap = a.rel_sup_gap(&b).map_err(compute_err)?;
            (a, Some(gap), "both")
        }
        other => return Err(AppError::Config(format!("unknown method `{other}`"))),
    };
    let report = ApplyReport {
        method: label.into(),
        alpha,
        prime: f.prime(),
        dimension: f.dim(),
        result: StepFunctionJson::from_function(&primary.step),
        tail: tail_json(&primary, f.dim()),
        dual_route_gap: gap,
    };
    let path = out_path(&common, "apply.json");
    write_json(&path, &report).map_err(compute_err)?;
    if let Some(g) = gap {
        let tol = common.tolerance.unwrap_or(vt_core::checks::tolerances::DUAL_ROUTE_REL);
        if g > tol {
            eprintln!("dual-route gap {g:.3e} exceeds tolerance {tol:.3e}");
            return Ok(ExitCode::from(EXIT_CHECK_FAILED));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fourier(common: Common, input: &Path, inverse: bool) -> Result<ExitCode, AppError> {
    let fj: StepFunctionJson = read_json(input)?;
    let f = fj.to_function().map_err(compute_err)?;
    let g = if inverse {
        f.inverse_fourier().map_err(compute_err)?
    } else {
        f.fourier().map_err(compute_err)?
    };
    let path = out_path(&common, "fourier.json");
    write_json(&path, &StepFunctionJson::from_function(&g)).map_err(compute_err)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    checks: Vec<CheckReport>,
    pass: bool,
}

fn cmd_verify(
    common: Common,
    check: &str,
    sweep_csv: Option<PathBuf>,
) -> Result<ExitCode, AppError> {
    if let Some(path) = &sweep_csv {
        let alphas = common.alpha.map(|a| vec![a]).unwrap_or_else(|| vec![0.3, 0.5, 0.8]);
        let rows = vt_core::sobolev::rayleigh_sweep(
            common.p.unwrap_or(2),
            common.dimension.unwrap_or(1),
            0,
            &[1, 2, 3],
            &alphas,
            common.seed,
        )
        .map_err(compute_err)?;
        let mut table = CsvTable::new(&["alpha", "N", "m", "lambda_min", "ratio_max"]);
        for r in rows {
            table.push_row(vec![
                CsvTable::float(r.alpha),
                r.n_exp.to_string(),
                r.scale.to_string(),
                CsvTable::float(r.lambda_min),
                CsvTable::float(r.ratio_max),
            ]);
        }
        table.write(path).map_err(compute_err)?;
    }
    if check == "list" {
        for name in CHECK_NAMES {
            println!("{name}");
        }
        println!("comparison");
        println!("regularity-dichotomy");
        println!("fundamental-harmonicity");
        return Ok(ExitCode::SUCCESS);
    }
    let opts = CheckOptions { prime: common.p, alpha: common.alpha, dim: common.dimension };
    let names: Vec<&str> = if check == "all" {
        let mut v: Vec<&str> = CHECK_NAMES.to_vec();
        v.push("comparison");
        v.push("regularity-dichotomy");
        v
    } else {
        vec![check]
    };
    let mut reports = Vec::new();
    let mut all_pass = true;
    for name in names {
        let mut rep = run_named_check(name, common.seed, &opts).map_err(compute_err)?;
        if let Some(tol) = common.tolerance {
            rep.pass = rep.ratio <= tol;
        }
        if !rep.pass {
            all_pass = false;
            eprintln!("FAIL {name}: ratio {:.3e} {:?}", rep.ratio, rep.details);
        }
        reports.push(rep);
    }
    let report = VerifyReport { seed: common.seed, checks: reports, pass: all_pass };
    let path = out_path(&common, "verify.json");
    write_json(&path, &report).map_err(compute_err)?;
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CHECK_FAILED) })
}

#[derive(Serialize)]
struct SolutionJson {
    prime: u32,
    dimension: usize,
    terms: Vec<TermJson>,
    residual_rel: f64,
    energy: f64,
    min_value: f64,
    max_value: f64,
    basis_cells: usize,
}

fn cmd_dirichlet(
    common: Common,
    config: &Path,
    report: Option<PathBuf>,
) -> Result<ExitCode, AppError> {
    let pj: ProblemJson = read_json(config)?;
    let problem = pj.to_problem().map_err(compute_err)?;
    let system = match problem.omega.family() {
        DomainFamily::Explicit => {
            solve_dirichlet(&problem, pj.scale_m, pj.support_m).map_err(compute_err)?
        }
        _ => {
            let (basis, ball_of) =
                family_basis(&problem.omega, pj.scale_m, 2).map_err(compute_err)?;
            solve_on_basis(&problem, basis, ball_of).map_err(compute_err)?
        }
    };
    let values = system.cell_values();
    let terms: Vec<TermJson> = system
        .basis
        .iter()
        .zip(&values)
        .map(|(c, v)| TermJson {
            cell_center: c.center.encode(),
            cell_radius_exp: c.radius_exp,
            re: *v,
            im: 0.0,
        })
        .collect();
    let sol = SolutionJson {
        prime: problem.omega.prime(),
        dimension: problem.omega.dim(),
        residual_rel: system.residual_rel,
        energy: system.energy(),
        min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        basis_cells: system.basis.len(),
        terms,
    };
    let path = out_path(&common, "solution.json");
    write_json(&path, &sol).map_err(compute_err)?;
    if let Some(rp) = report {
        #[derive(Serialize)]
        struct Minimal {
            residual_rel: f64,
            basis_cells: usize,
            domain: DomainJson,
        }
        let m = Minimal {
            residual_rel: system.residual_rel,
            basis_cells: system.basis.len(),
            domain: DomainJson::from_domain(&problem.omega),
        };
        write_json(&rp, &m).map_err(compute_err)?;
    }
    let tol = common.tolerance.unwrap_or(vt_core::checks::tolerances::WEAK_RESIDUAL);
    if system.residual_rel > tol {
        eprintln!("weak residual {:.3e} exceeds tolerance {tol:.3e}", system.residual_rel);
        return Ok(ExitCode::from(EXIT_CHECK_FAILED));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RegularityOut {
    config: ExperimentJson,
    report: RegularityReport,
    nu_exact: String,
    condition_52_pass: bool,
}

fn cmd_regularity(
    common: Common,
    config: &Path,
    csv: Option<PathBuf>,
) -> Result<ExitCode, AppError> {
    let ej: ExperimentJson = read_json(config)?;
    let prime = ej.prime.or(common.p).unwrap_or(2);
    match ej.domain_family.as_str() {
        "sphere-union" => {
            if ej.lambda.len() < 2 {
                return Err(AppError::Config("sphere-union needs at least two shells".into()));
            }
            let (rm, rp) = ratio_bounds(&ej.lambda).map_err(compute_err)?;
            let seq = LambdaSequence::new(ej.lambda.clone(), rm, rp).map_err(compute_err)?;
            let depth = ej.depth.unwrap_or(ej.lambda.len() as u32) as usize;
            let omega =
                make_sphere_union_domain(&seq, prime, depth, rm <= 2.0).map_err(compute_err)?;
            let g = ExteriorData::Radial {
                amplitude: ej.amplitude.unwrap_or(1.0),
                exponent: ej.delta.unwrap_or(0.4),
            };
            let f = StepFunction::zero(prime, 1);
            let report = estimate_holder_exponent(&omega, &seq, ej.alpha, &f, &g, &ej.m_list)
                .map_err(compute_err)?;
            let density = check_measure_density(&omega, &seq, prime).map_err(compute_err)?;
            if let Some(path) = csv {
                let mut table = CsvTable::new(&["lambda", "radius", "sup_abs_u"]);
                for s in &report.samples {
                    table.push_row(vec![
                        s.lambda.to_string(),
                        CsvTable::float(s.radius),
                        CsvTable::float(s.sup_abs_u),
                    ]);
                }
                table.write(&path).map_err(compute_err)?;
            }
            let pass = report.gamma_fit > 0.0
                && report.fit_r2 >= vt_core::checks::tolerances::FIT_R2_MIN;
            let out = RegularityOut {
                config: ej,
                nu_exact: format!("{}*p^{}", density.nu.mantissa(), density.nu.exponent()),
                condition_52_pass: density.pass,
                report,
            };
            let path = out_path(&common, "regularity.json");
            write_json(&path, &out).map_err(compute_err)?;
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CHECK_FAILED) })
        }
        "punctured-disk" => {
            let depth = ej.depth.unwrap_or(12);
            let omega = make_punctured_disk(prime, depth);
            let seq = if ej.lambda.len() >= 2 {
                let (rm, rp) = ratio_bounds(&ej.lambda).map_err(compute_err)?;
                LambdaSequence::new(ej.lambda.clone(), rm, rp).map_err(compute_err)?
            } else {
                LambdaSequence::new(vec![1, 3, 9], 3.0, 3.0).map_err(compute_err)?
            };
            let density = check_measure_density(&omega, &seq, prime).map_err(compute_err)?;
            let shells: Vec<u32> = (1..=depth.min(10)).collect();
            let (slope, r2) =
                fundamental_profile_fit(prime, ej.alpha, &shells).map_err(compute_err)?;
            #[derive(Serialize)]
            struct DiskOut {
                gamma_fit: f64,
                fit_r2: f64,
                expected_exponent: f64,
                nu_exact: String,
                condition_52_pass: bool,
                config: ExperimentJson,
            }
            if let Some(path) = csv {
                let p = prime as f64;
                let c = (1.0 - p.powf(-ej.alpha)) / (1.0 - p.powf(-ej.alpha - 1.0));
                let mut table = CsvTable::new(&["lambda", "radius", "sup_abs_u"]);
                for l in &shells {
                    let r = p.powf(-(*l as f64));
                    table.push_row(vec![
                        l.to_string(),
                        CsvTable::float(r),
                        CsvTable::float(c * r.powf(ej.alpha - 1.0)),
                    ]);
                }
                table.write(&path).map_err(compute_err)?;
            }
            let out = DiskOut {
                expected_exponent: ej.alpha - 1.0,
                gamma_fit: slope,
                fit_r2: r2,
                nu_exact: format!("{}*p^{}", density.nu.mantissa(), density.nu.exponent()),
                condition_52_pass: density.pass,
                config: ej,
            };
            let path = out_path(&common, "regularity.json");
            write_json(&path, &out).map_err(compute_err)?;
            Ok(ExitCode::SUCCESS)
        }
        other => Err(AppError::Config(format!("unknown domain_family `{other}`"))),
    }
}

fn cmd_corpus(
    common: Common,
    count: usize,
    support: i32,
    scale: i32,
    density: f64,
    real: bool,
) -> Result<ExitCode, AppError> {
    let prime = common.p.unwrap_or(2);
    let dim = common.dimension.unwrap_or(1);
    let spec = CorpusSpec { prime, dim, support_exp: support, scale, density, real };
    let functions = corpus(common.seed, &spec, count).map_err(compute_err)?;
    let dir = out_path(&common, "corpus");
    std::fs::create_dir_all(&dir).map_err(config_err)?;
    for (i, f) in functions.iter().enumerate() {
        let path = dir.join(format!("f_{i:03}.json"));
        write_json(&path, &StepFunctionJson::from_function(f)).map_err(compute_err)?;
    }
    Ok(ExitCode::SUCCESS)
}
