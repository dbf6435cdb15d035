use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poscon::{plot, report, spec_file};
use poscon_core::controllability::{AnalysisError, SystemSI, TargetKind};
use poscon_core::Tolerances;

#[derive(Parser)]
#[command(
    name = "poscon",
    version,
    about = "Polyhedrality and controllability analysis of single-input positive linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide polyhedrality of the controllable sets and report generators.
    Analyze {
        /// Problem description (JSON, schema 1).
        file: PathBuf,
        /// Write the full machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        tol: TolFlags,
    },
    /// Certify controllability of the target sets in the file.
    Check {
        /// Problem description (JSON, schema 1) with at least one target.
        file: PathBuf,
        /// Membership horizon override (defaults to the vertex number, or
        /// 10n when the finite set is not polyhedral).
        #[arg(long)]
        horizon: Option<usize>,
        /// Write the full machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        tol: TolFlags,
    },
    /// Export simplex cross-sections of the reachable cones.
    Plot {
        /// Problem description (JSON, schema 1).
        file: PathBuf,
        /// Horizons to draw, e.g. --k 3,8,19.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value_t = PlotFormat::Svg)]
        format: PlotFormat,
        /// Output directory; the file keeps the input's stem.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolFlags,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotFormat {
    Svg,
    Csv,
}

/// Numeric knobs; a flag beats the input file's `options`, which beat the
/// dimension defaults.
#[derive(Args, Clone, Copy, Default)]
struct TolFlags {
    /// Entries at or below this count as structural zeros.
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Eigenvalue comparison tolerance.
    #[arg(long)]
    tol_eig: Option<f64>,
    /// Modulus clustering width for the dominant-eigenvalue circle.
    #[arg(long)]
    tol_cluster: Option<f64>,
    /// Angle rationality tolerance.
    #[arg(long)]
    tol_angle: Option<f64>,
    /// Largest denominator tried when recognizing rational angles.
    #[arg(long)]
    q_max: Option<u32>,
    /// Feasibility tolerance of the membership and recursion programs.
    #[arg(long)]
    tol_lp: Option<f64>,
    /// Convergence tolerance of the limit-matrix iteration.
    #[arg(long)]
    tol_lim: Option<f64>,
    /// Rank decision tolerance on the reachability matrix.
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Trajectory replay tolerance.
    #[arg(long)]
    tol_sim: Option<f64>,
    /// Residual tolerance of recursion certificates.
    #[arg(long)]
    tol_recur: Option<f64>,
    /// Direct-iteration search cap.
    #[arg(long)]
    k_max: Option<usize>,
}

impl TolFlags {
    fn apply(&self, tol: &mut Tolerances) {
        if let Some(v) = self.tol_zero {
            tol.tol_zero = v;
        }
        if let Some(v) = self.tol_eig {
            tol.tol_eig = v;
        }
        if let Some(v) = self.tol_cluster {
            tol.tol_cluster = v;
        }
        if let Some(v) = self.tol_angle {
            tol.tol_angle = v;
        }
        if let Some(v) = self.q_max {
            tol.q_max = v;
        }
        if let Some(v) = self.tol_lp {
            tol.tol_lp = v;
        }
        if let Some(v) = self.tol_lim {
            tol.tol_lim = v;
        }
        if let Some(v) = self.tol_rank {
            tol.tol_rank = v;
        }
        if let Some(v) = self.tol_sim {
            tol.tol_sim = v;
        }
        if let Some(v) = self.tol_recur {
            tol.tol_recur = v;
        }
        if let Some(v) = self.k_max {
            tol.k_max = v;
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<spec_file::InputError> for Failure {
    fn from(e: spec_file::InputError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<plot::PlotError> for Failure {
    fn from(e: plot::PlotError) -> Self {
        match e {
            plot::PlotError::SvgUnsupportedDim { .. } => {
                Failure { code: 2, message: e.to_string() }
            }
            plot::PlotError::Analysis(inner) => Failure::from(inner),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let (code, name) = match &e {
            AnalysisError::Disagreement { .. } => (3, "Disagreement"),
            AnalysisError::Structure(_) => (2, "Structure"),
            AnalysisError::RankDeficient { .. } => (2, "RankDeficient"),
            AnalysisError::Spectral(_) => (1, "Spectral"),
            AnalysisError::Cone(_) => (1, "Cone"),
            AnalysisError::Lp(_) => (1, "Lp"),
            AnalysisError::LimitDiverged { .. } => (1, "LimitDiverged"),
            AnalysisError::LimitGeneratorUsed { .. } => (1, "LimitGeneratorUsed"),
        };
        Failure { code, message: format!("error[{name}]: {e}") }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("error[Io]: {}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { file, json, tol } => analyze(&file, json.as_deref(), tol),
        Command::Check { file, horizon, json, tol } => {
            check(&file, horizon, json.as_deref(), tol)
        }
        Command::Plot { file, k, format, out, tol } => plot_cmd(&file, &k, format, &out, tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_system(
    path: &Path,
    flags: TolFlags,
) -> Result<(SystemSI, Vec<(TargetKind, Vec<Vec<f64>>)>, Option<usize>), Failure> {
    let instance = spec_file::load(path)?;
    let mut tol = spec_file::effective_tolerances(instance.a.dim(), &instance.options);
    flags.apply(&mut tol);
    let horizon_opt = instance.options.n;
    let sys = SystemSI::new(instance.a, instance.b, tol).map_err(|e| {
        // A system rejected during construction is an input problem.
        let mut f = Failure::from(e);
        f.code = 2;
        f
    })?;
    Ok((sys, instance.targets, horizon_opt))
}

fn build_report(
    command: &str,
    sys: &SystemSI,
    targets: &[(TargetKind, Vec<Vec<f64>>)],
    horizon: Option<usize>,
) -> Result<report::ReportFile, Failure> {
    let fin = sys.polyhedral_fin()?;
    let inf = sys.polyhedral_inf()?;
    let special = sys.special_case()?;
    let lim = sys.limit_cone()?;
    let mut target_reports = Vec::new();
    for (kind, vertices) in targets {
        let check = sys.check_target(vertices, *kind, horizon)?;
        let kind_name = match kind {
            TargetKind::Cone => "cone",
            TargetKind::Polytope => "polytope",
        };
        target_reports.push(report::target_set_report(kind_name, &check));
    }
    Ok(report::ReportFile {
        tool: report::tool_info(),
        command: command.to_string(),
        tolerances: report::tolerances_report(sys.tolerances()),
        system: report::system_report(sys),
        analysis: report::analysis_report(&fin, &inf, &special, &lim),
        targets: if target_reports.is_empty() {
            None
        } else {
            Some(target_reports)
        },
    })
}

fn emit(rep: &report::ReportFile, json: Option<&Path>) -> Result<(), Failure> {
    print!("{}", report::human_summary(rep));
    if let Some(path) = json {
        let text = report::to_canonical_json(rep);
        std::fs::write(path, text).map_err(|e| io_failure(path, e))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn analyze(path: &Path, json: Option<&Path>, flags: TolFlags) -> Result<(), Failure> {
    let (sys, targets, horizon) = load_system(path, flags)?;
    let rep = build_report("analyze", &sys, &targets, horizon)?;
    emit(&rep, json)
}

fn check(
    path: &Path,
    horizon: Option<usize>,
    json: Option<&Path>,
    flags: TolFlags,
) -> Result<(), Failure> {
    let (sys, targets, file_horizon) = load_system(path, flags)?;
    if targets.is_empty() {
        return Err(Failure {
            code: 2,
            message: "error[BadShape]: check needs at least one target in the input file".into(),
        });
    }
    let rep = build_report("check", &sys, &targets, horizon.or(file_horizon))?;
    emit(&rep, json)
}

fn plot_cmd(
    path: &Path,
    ks: &[usize],
    format: PlotFormat,
    out_dir: &Path,
    flags: TolFlags,
) -> Result<(), Failure> {
    let (sys, _, _) = load_system(path, flags)?;
    let data = plot::build(&sys, ks)?;
    let (text, ext) = match format {
        PlotFormat::Csv => (plot::to_csv(&data), "csv"),
        PlotFormat::Svg => (plot::to_svg(&data)?, "svg"),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".to_string());
    let out_path = out_dir.join(format!("{stem}.{ext}"));
    std::fs::write(&out_path, text).map_err(|e| io_failure(&out_path, e))?;
    println!("wrote {}", out_path.display());
    Ok(())
}
