use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use bornlab_core::csm::{
    born_matrix, spin_rotation, standard_context, transform_context, Context, ContextMap, GroupElement, Spin,
};
use bornlab_core::gleason::{
    fit_density, sample_contexts, sample_frame, verify_frame_hypothesis, BlochPower, DensityFrame,
    DensityOperator, FitReport, FrameFunction, COUNTEREXAMPLE_RESIDUAL_BOUND, EXACT_FIT_RESIDUAL,
};
use bornlab_core::numerics::{frobenius_distance, haar_unitary, RngStream, STOCHASTIC_TOL, UNITARY_TOL};
use bornlab_core::phase_recovery::{recover_with_tol, RecoverySettings, RecoveryStatus};
use bornlab_core::stochastic::{
    classify_with_tol, is_bistochastic_with_tol, sample_bistochastic, validate_stochastic_with_tol,
    ClassKind, ProbabilityMatrix,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::format::{
    csv_table, parse_complex_matrix, parse_context, parse_probability_matrix, parse_samples, FormatError,
    MatrixJson,
};

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Verified = 0,
    Violated = 1,
    Undecided = 2,
    Usage = 64,
    InputFormat = 65,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit: Exit,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<bornlab_core::Error> for CliError {
    fn from(e: bornlab_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bornlab",
    version,
    about = "Probability matrices, projector contexts and Gleason fits"
)]
pub struct Cli {
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance on unitarity of input matrices
    #[arg(long, global = true, default_value_t = UNITARY_TOL)]
    tol_unitary: f64,
    /// Tolerance on row and column sums of probability matrices
    #[arg(long, global = true, default_value_t = STOCHASTIC_TOL)]
    tol_stochastic: f64,
    /// Write the report to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a probability matrix (stochastic, unistochastic, ...)
    Check {
        path: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
    /// Print the transition probability table between two contexts as CSV
    Born {
        /// Unitary mapping the standard context to the target context
        #[arg(long, conflicts_with_all = ["from", "to"], required_unless_present = "from")]
        unitary: Option<PathBuf>,
        #[arg(long, requires = "to")]
        from: Option<PathBuf>,
        #[arg(long, requires = "from")]
        to: Option<PathBuf>,
    },
    /// Search for phases that make a bistochastic matrix unistochastic
    Recover {
        path: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
    /// Frame functions and density-operator fits
    Gleason {
        #[command(subcommand)]
        action: GleasonAction,
    },
    /// Born tables along a sequence of spin rotations
    Chain {
        /// 1/2 or 1
        #[arg(long, default_value = "1/2", value_parser = parse_spin)]
        spin: Spin,
        /// Rotation "nx,ny,nz,angle"; repeat for a sequence. Angles accept pi, pi/3, -2*pi/3, ...
        #[arg(long = "axis-angles", required = true, allow_hyphen_values = true, value_parser = parse_axis_angle)]
        axis_angles: Vec<[f64; 4]>,
        /// Modality of the starting context
        #[arg(long, default_value_t = 0)]
        start: usize,
    },
    /// Draw a random matrix
    Sample {
        #[arg(long, value_enum)]
        kind: SampleKind,
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Debug, Clone, Copy, Args)]
struct Budget {
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
}

impl Budget {
    fn settings(self) -> RecoverySettings {
        RecoverySettings {
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            ..RecoverySettings::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum GleasonAction {
    /// Sample a frame function, fit a density operator, report the residuals
    Demo {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Number of sampled contexts; defaults to 3·dim²
        #[arg(long)]
        contexts: Option<usize>,
        /// Use the Bloch-cubic frame function (dimension 2 only)
        #[arg(long)]
        counterexample: bool,
    },
    /// Fit a density operator to a samples file
    Fit { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleKind {
    HaarUnitary,
    Bistochastic,
    Unistochastic,
}

fn parse_spin(s: &str) -> Result<Spin, String> {
    s.parse::<Spin>().map_err(|e| e.to_string())
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let (numerator, divisor) = match body.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| format!("bad angle {s:?}"))?),
        None => (body, 1.0),
    };
    let factor = match numerator.split_once('*') {
        Some((k, "pi")) => k.parse::<f64>().map_err(|_| format!("bad angle {s:?}"))?,
        None if numerator == "pi" => 1.0,
        _ => return Err(format!("bad angle {s:?}")),
    };
    Ok(sign * factor * std::f64::consts::PI / divisor)
}

fn parse_axis_angle(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected nx,ny,nz,angle, got {s:?}"));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(&parts[..3]) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad axis component {part:?}"))?;
    }
    out[3] = parse_angle(parts[3])?;
    Ok(out)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    exit: Exit::Verified,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    exit: Exit::Usage,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let mut diagnostics = Vec::new();
    let result = dispatch(&cli, &mut diagnostics).and_then(|(exit, document)| match &cli.out {
        Some(path) => {
            fs::write(path, &document)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            Ok((exit, String::new()))
        }
        None => Ok((exit, document)),
    });
    let mut stderr: String = diagnostics.iter().map(|d| format!("{d}\n")).collect();
    match result {
        Ok((exit, stdout)) => Outcome { exit, stdout, stderr },
        Err(CliError::Usage(msg)) => {
            stderr.push_str(&format!("error: {msg}\n"));
            Outcome {
                exit: Exit::Usage,
                stdout: String::new(),
                stderr,
            }
        }
        Err(CliError::Input(msg)) => {
            stderr.push_str(&format!("error: {msg}\n"));
            Outcome {
                exit: Exit::InputFormat,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn dispatch(cli: &Cli, diagnostics: &mut Vec<String>) -> Result<(Exit, String), CliError> {
    let rng = RngStream::new(cli.seed, 0);
    match &cli.command {
        Command::Check { path, budget } => check(path, budget.settings(), &rng, cli.tol_stochastic),
        Command::Born { unitary, from, to } => match (unitary, from, to) {
            (Some(u), _, _) => born_from_unitary(u, cli.tol_unitary, cli.tol_stochastic, diagnostics),
            (None, Some(f), Some(t)) => born_between(f, t, cli.tol_stochastic, diagnostics),
            _ => Err(CliError::Usage(
                "born needs --unitary or both --from and --to".into(),
            )),
        },
        Command::Recover { path, budget } => recover(path, budget.settings(), &rng, cli.tol_stochastic),
        Command::Gleason { action } => match action {
            GleasonAction::Demo {
                dim,
                contexts,
                counterexample,
            } => gleason_demo(*dim, *contexts, *counterexample, cli.seed),
            GleasonAction::Fit { path } => gleason_fit(path, diagnostics),
        },
        Command::Chain {
            spin,
            axis_angles,
            start,
        } => chain(*spin, axis_angles, *start),
        Command::Sample { kind, dim } => sample(*kind, *dim, cli.seed),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn table(m: &ProbabilityMatrix) -> Vec<Vec<f64>> {
    (0..m.n()).map(|i| m.matrix().row(i).to_vec()).collect()
}

#[derive(Serialize)]
struct CheckReport {
    n: usize,
    kind: &'static str,
    witness: Option<MatrixJson>,
    certificate: Option<String>,
    restarts_used: Option<usize>,
    objective: Option<f64>,
}

fn check(
    path: &Path,
    settings: RecoverySettings,
    rng: &RngStream,
    tol: f64,
) -> Result<(Exit, String), CliError> {
    settings.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let m = parse_probability_matrix(&read(path)?)?;
    if !validate_stochastic_with_tol(&m, tol) {
        let report = CheckReport {
            n: m.n(),
            kind: "not-stochastic",
            witness: None,
            certificate: Some(format!(
                "entries outside [0, 1] or row sums off by up to {:e}",
                m.row_sum_deviation()
            )),
            restarts_used: None,
            objective: None,
        };
        return Ok((Exit::Violated, to_json(&report)));
    }
    let class = classify_with_tol(&m, &settings, rng, tol)?;
    let exit = match class.kind {
        ClassKind::Unistochastic => Exit::Verified,
        ClassKind::Undecided | ClassKind::BistochasticOnly => Exit::Undecided,
        ClassKind::NotUnistochastic | ClassKind::StochasticOnly => Exit::Violated,
    };
    let report = CheckReport {
        n: m.n(),
        kind: class.kind.as_str(),
        witness: class.witness.as_ref().map(MatrixJson::from_complex),
        certificate: class.certificate,
        restarts_used: class.restarts_used,
        objective: class.objective,
    };
    Ok((exit, to_json(&report)))
}

fn verified_table(m: &ProbabilityMatrix, tol: f64, diagnostics: &mut Vec<String>) -> (Exit, String) {
    let exit = if is_bistochastic_with_tol(m, tol) {
        Exit::Verified
    } else {
        diagnostics.push(format!(
            "table is not bistochastic: row deviation {:e}, column deviation {:e}",
            m.row_sum_deviation(),
            m.column_sum_deviation()
        ));
        Exit::Violated
    };
    (exit, csv_table(m.matrix()))
}

fn born_from_unitary(
    path: &Path,
    tol_unitary: f64,
    tol_stochastic: f64,
    diagnostics: &mut Vec<String>,
) -> Result<(Exit, String), CliError> {
    let u = parse_complex_matrix(&read(path)?)?;
    if !u.is_square() {
        return Err(CliError::Input(format!(
            "unitary must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let n = u.rows();
    if n < 2 {
        return Err(CliError::Input("unitary must be at least 2x2".into()));
    }
    let map = ContextMap::with_tol(u, "standard", "target", tol_unitary)?;
    let start = standard_context(n)?;
    let target = transform_context(&start, &map)?;
    let m = born_matrix(&start, &target)?;
    Ok(verified_table(&m, tol_stochastic, diagnostics))
}

fn born_between(
    from: &Path,
    to: &Path,
    tol_stochastic: f64,
    diagnostics: &mut Vec<String>,
) -> Result<(Exit, String), CliError> {
    let a = parse_context(&read(from)?)?;
    let b = parse_context(&read(to)?)?;
    if a.dim() != b.dim() {
        return Err(CliError::Input(format!(
            "contexts have different dimensions: {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let m = born_matrix(&a, &b)?;
    Ok(verified_table(&m, tol_stochastic, diagnostics))
}

#[derive(Serialize)]
struct RecoverReport {
    status: &'static str,
    n: usize,
    objective: Option<f64>,
    restarts_used: usize,
    witness: Option<MatrixJson>,
    phases: Option<MatrixJson>,
    reason: Option<String>,
}

fn recover(
    path: &Path,
    settings: RecoverySettings,
    rng: &RngStream,
    tol: f64,
) -> Result<(Exit, String), CliError> {
    settings.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let m = parse_probability_matrix(&read(path)?)?;
    let result = match recover_with_tol(&m, &settings, rng, tol) {
        Ok(r) => r,
        Err(e @ (bornlab_core::Error::NotStochastic(_) | bornlab_core::Error::NotBistochastic(_))) => {
            let report = RecoverReport {
                status: "rejected",
                n: m.n(),
                objective: None,
                restarts_used: 0,
                witness: None,
                phases: None,
                reason: Some(e.to_string()),
            };
            return Ok((Exit::Violated, to_json(&report)));
        }
        Err(e) => return Err(e.into()),
    };
    let (status, exit) = match result.status {
        RecoveryStatus::Success => ("success", Exit::Verified),
        RecoveryStatus::Exhausted => ("exhausted", Exit::Undecided),
    };
    let report = RecoverReport {
        status,
        n: m.n(),
        objective: Some(result.objective),
        restarts_used: result.restarts_used,
        witness: result.witness.as_ref().map(MatrixJson::from_complex),
        phases: result.phases.as_ref().map(MatrixJson::from_real),
        reason: None,
    };
    Ok((exit, to_json(&report)))
}

#[derive(Serialize)]
struct GleasonReport {
    source: &'static str,
    dim: usize,
    contexts: Option<usize>,
    sample_count: usize,
    rank_of_design: usize,
    rank_deficient: bool,
    raw_residual: f64,
    projected_residual: f64,
    min_raw_eigenvalue: f64,
    frame_max_deviation: Option<f64>,
    /// Frobenius distance between the fitted and the generating density operator.
    target_error: Option<f64>,
    verdict: &'static str,
    rho: MatrixJson,
    raw_rho: MatrixJson,
    warnings: Vec<String>,
}

fn fit_verdict(raw_residual: f64) -> (&'static str, Exit) {
    if raw_residual < EXACT_FIT_RESIDUAL {
        ("density", Exit::Verified)
    } else if raw_residual > COUNTEREXAMPLE_RESIDUAL_BOUND {
        ("no-density", Exit::Violated)
    } else {
        ("inconclusive", Exit::Undecided)
    }
}

fn gleason_report(
    source: &'static str,
    dim: usize,
    contexts: Option<usize>,
    fit: &FitReport,
    frame_max_deviation: Option<f64>,
    target_error: Option<f64>,
) -> (Exit, String) {
    let (verdict, exit) = fit_verdict(fit.raw_residual);
    let mut warnings = Vec::new();
    if fit.is_rank_deficient() {
        warnings.push(format!(
            "rank-deficient design: rank {} < {}; the fit is not unique",
            fit.rank_of_design,
            dim * dim
        ));
    }
    let report = GleasonReport {
        source,
        dim,
        contexts,
        sample_count: fit.sample_count,
        rank_of_design: fit.rank_of_design,
        rank_deficient: fit.is_rank_deficient(),
        raw_residual: fit.raw_residual,
        projected_residual: fit.projected_residual,
        min_raw_eigenvalue: fit.min_raw_eigenvalue,
        frame_max_deviation,
        target_error,
        verdict,
        rho: MatrixJson::from_complex(fit.rho.matrix()),
        raw_rho: MatrixJson::from_complex(&fit.raw_rho),
        warnings,
    };
    (exit, to_json(&report))
}

fn gleason_demo(
    dim: usize,
    contexts: Option<usize>,
    counterexample: bool,
    seed: u64,
) -> Result<(Exit, String), CliError> {
    if dim < 2 {
        return Err(CliError::Usage("--dim must be at least 2".into()));
    }
    if counterexample && dim != 2 {
        return Err(CliError::Usage(
            "--counterexample is only defined for --dim 2".into(),
        ));
    }
    let count = contexts.unwrap_or(3 * dim * dim);
    if count == 0 {
        return Err(CliError::Usage("--contexts must be at least 1".into()));
    }
    let sampled = sample_contexts(dim, count, &RngStream::new(seed, 2))?;
    let (frame, truth, source): (Box<dyn FrameFunction>, Option<DensityOperator>, _) = if counterexample {
        (Box::new(BlochPower::cubic()), None, "bloch-cubic")
    } else {
        let rho = DensityOperator::random(dim, &RngStream::new(seed, 1));
        (Box::new(DensityFrame { rho: rho.clone() }), Some(rho), "density")
    };
    let frame_dev = verify_frame_hypothesis(frame.as_ref(), &sampled)?.max_deviation;
    let fit = fit_density(&sample_frame(frame.as_ref(), &sampled)?, dim)?;
    let target_error = truth
        .map(|rho| frobenius_distance(fit.rho.matrix(), rho.matrix()))
        .transpose()?;
    Ok(gleason_report(
        source,
        dim,
        Some(count),
        &fit,
        Some(frame_dev),
        target_error,
    ))
}

fn gleason_fit(path: &Path, diagnostics: &mut Vec<String>) -> Result<(Exit, String), CliError> {
    let samples = parse_samples(&read(path)?)?;
    let dim = samples
        .first()
        .map(|s| s.projector.dim())
        .ok_or_else(|| CliError::Input("samples file is empty".into()))?;
    let fit = fit_density(&samples, dim)?;
    if fit.is_rank_deficient() {
        diagnostics.push(format!(
            "warning: design rank {} is below {}; add samples for a unique fit",
            fit.rank_of_design,
            dim * dim
        ));
    }
    Ok(gleason_report("samples", dim, None, &fit, None, None))
}

#[derive(Serialize)]
struct ChainStep {
    axis: [f64; 3],
    angle: f64,
    /// Born table from the previous context to this one.
    table: Vec<Vec<f64>>,
    /// Probability of each modality of this context given the start modality.
    from_start: Vec<f64>,
}

#[derive(Serialize)]
struct ChainReport {
    spin: String,
    dim: usize,
    start: usize,
    steps: Vec<ChainStep>,
    /// Born table from the first context to the last.
    composed: Vec<Vec<f64>>,
}

fn chain(spin: Spin, axis_angles: &[[f64; 4]], start: usize) -> Result<(Exit, String), CliError> {
    let dim = spin.dim();
    if start >= dim {
        return Err(CliError::Usage(format!(
            "--start must be below {dim} for spin {spin}"
        )));
    }
    let first: Context = standard_context(dim)?;
    let mut current = first.clone();
    let mut steps = Vec::with_capacity(axis_angles.len());
    for &[x, y, z, angle] in axis_angles {
        let g = GroupElement::rotation(spin, [x, y, z], angle).map_err(|e| CliError::Usage(e.to_string()))?;
        let next = transform_context(&current, &spin_rotation(&g))?;
        let overall = born_matrix(&first, &next)?;
        let axis = match g.motion() {
            bornlab_core::csm::Motion::Rotation { axis, .. } => *axis,
            bornlab_core::csm::Motion::Composed(_) => unreachable!("a single rotation"),
        };
        steps.push(ChainStep {
            axis,
            angle,
            table: table(&born_matrix(&current, &next)?),
            from_start: overall.matrix().row(start).to_vec(),
        });
        current = next;
    }
    let report = ChainReport {
        spin: spin.to_string(),
        dim,
        start,
        steps,
        composed: table(&born_matrix(&first, &current)?),
    };
    Ok((Exit::Verified, to_json(&report)))
}

fn sample(kind: SampleKind, dim: usize, seed: u64) -> Result<(Exit, String), CliError> {
    if dim < 2 {
        return Err(CliError::Usage("--dim must be at least 2".into()));
    }
    let rng = RngStream::new(seed, 0);
    let matrix = match kind {
        SampleKind::HaarUnitary => MatrixJson::from_complex(&haar_unitary(dim, &rng)),
        SampleKind::Unistochastic => {
            let m = ProbabilityMatrix::from_unitary(&haar_unitary(dim, &rng))?;
            MatrixJson::from_real(m.matrix())
        }
        SampleKind::Bistochastic => match sample_bistochastic(dim, &rng, 100_000) {
            Ok(m) => MatrixJson::from_real(m.matrix()),
            Err(e) => {
                #[derive(Serialize)]
                struct Exhausted {
                    status: &'static str,
                    reason: String,
                }
                let report = Exhausted {
                    status: "exhausted",
                    reason: e.to_string(),
                };
                return Ok((Exit::Undecided, to_json(&report)));
            }
        },
    };
    Ok((Exit::Verified, to_json(&matrix)))
}
