//! `nbisect`: generate, refine, verify and inspect simplicial meshes.
//!
//! Exit codes: 0 success, 1 verification failure, 2 structural, parse or
//! usage error. Verbosity is read from `NBISECT_LOG` (e.g. `info`,
//! `debug`); the default is `warn`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use nbisect::quality::write_csv;
use nbisect::{
    get_non_conformal_simplices, is_mesh_conformal, is_reflected, kuhn_mesh, mark_mesh, quality_stats,
    random_simplex_mesh, read_mesh, regular_simplex_mesh, run_campaign, similarity_classes, simplex_volume,
    write_mesh, CampaignConfig, Element, GridSpec, Mesh,
};

#[derive(Parser)]
#[command(name = "nbisect", version, about = "Conformal marked bisection of n-dimensional simplicial meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and write it in the nbisect text format.
    Gen(GenArgs),
    /// Run a refinement campaign described by a key = value config.
    Refine(RefineArgs),
    /// Verify conformity and/or reflectivity of a mesh.
    Check(CheckArgs),
    /// Print the quality statistics of a mesh as CSV.
    Quality(QualityArgs),
    /// Print a summary of a mesh.
    Info(InfoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Kuhn,
    Regular,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "kuhn")]
    generator: GeneratorKind,
    /// Space dimension n.
    #[arg(long, short = 'n', default_value_t = 2)]
    dim: usize,
    /// Grid divisions per axis (kuhn).
    #[arg(long, short = 'k', default_value_t = 2)]
    divisions: usize,
    /// Edge length (regular).
    #[arg(long, default_value_t = 1.0)]
    edge: f64,
    /// Seed (random).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest accepted shape quality (random).
    #[arg(long, default_value_t = 0.01)]
    min_quality: f64,
    /// Store bisection marks with the mesh.
    #[arg(long)]
    mark: bool,
    /// Output file.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct RefineArgs {
    /// Config file with one `key = value` per line.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set iterations=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct CheckArgs {
    mesh: PathBuf,
    /// Mesh the checked mesh was refined from; defaults to the mesh itself.
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    check: CheckKind,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Conformity,
    Reflectivity,
    All,
}

#[derive(Args)]
struct QualityArgs {
    mesh: PathBuf,
    /// Also count similarity classes with this tolerance.
    #[arg(long)]
    classes: Option<f64>,
}

#[derive(Args)]
struct InfoArgs {
    mesh: PathBuf,
}

/// Why a command did not succeed, mapped to the exit code.
enum Failure {
    Verification(String),
    Structural(String),
}

impl From<nbisect::Error> for Failure {
    fn from(e: nbisect::Error) -> Self {
        Failure::Structural(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Structural(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn gen(a: GenArgs) -> Outcome {
    let mesh = match a.generator {
        GeneratorKind::Kuhn => kuhn_mesh(&GridSpec::unit(a.dim, a.divisions))?,
        GeneratorKind::Regular => regular_simplex_mesh(a.dim, a.edge)?,
        GeneratorKind::Random => random_simplex_mesh(a.dim, a.seed, a.min_quality)?,
    };
    let mesh = if a.mark { mark_mesh(mesh)? } else { mesh };
    write_mesh(&mesh, &a.output)?;
    println!(
        "wrote {}: dimension {}, {} elements, {} vertices",
        a.output.display(),
        mesh.dim(),
        mesh.element_count(),
        mesh.vertex_count()
    );
    Ok(())
}

fn refine(a: RefineArgs) -> Outcome {
    let mut config = match &a.config {
        Some(path) => CampaignConfig::parse(&std::fs::read_to_string(path)?)
            .map_err(|e| Failure::Structural(format!("{}: {e}", path.display())))?,
        None => CampaignConfig::default(),
    };
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Structural(format!("override '{o}' is not KEY=VALUE")))?;
        config.set(k.trim(), v.trim())?;
    }
    let outcome = run_campaign(&config)?;
    if config.csv.is_none() {
        write_csv(std::io::stdout().lock(), &outcome.reports)?;
    }
    if let Some(f) = outcome.failure {
        return Err(Failure::Verification(format!("{} check failed at iteration {}", f.check, f.iteration)));
    }
    info!(
        "campaign finished: {} elements, {} vertices",
        outcome.mesh.element_count(),
        outcome.mesh.vertex_count()
    );
    Ok(())
}

fn check(a: CheckArgs) -> Outcome {
    let mesh = read_mesh(&a.mesh)?;
    let initial = match &a.initial {
        Some(p) => read_mesh(p)?,
        None => mesh.clone(),
    };
    let mut failed = Vec::new();
    if a.check != CheckKind::Reflectivity {
        let hanging = get_non_conformal_simplices(&mesh).len();
        let conformal = is_mesh_conformal(&mesh, &initial)?;
        println!("conformity: {}", if conformal && hanging == 0 { "pass" } else { "fail" });
        if hanging > 0 {
            println!("  {hanging} elements have hanging vertices");
        }
        if !conformal || hanging > 0 {
            failed.push("conformity");
        }
    }
    if a.check != CheckKind::Conformity {
        let reflected = is_reflected(&mesh)?;
        println!("reflectivity: {}", if reflected { "pass" } else { "fail" });
        if !reflected {
            failed.push("reflectivity");
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} failed", failed.join(" and "))))
    }
}

fn quality(a: QualityArgs) -> Outcome {
    let mesh = read_mesh(&a.mesh)?;
    write_csv(std::io::stdout().lock(), &[quality_stats(&mesh)?])?;
    if let Some(tol) = a.classes {
        let c = similarity_classes(mesh.simplices(), mesh.vertices(), tol)?;
        println!("similarity classes: {c}");
    }
    Ok(())
}

fn info_cmd(a: InfoArgs) -> Outcome {
    let mesh = read_mesh(&a.mesh)?;
    let (mut unmarked, mut tree, mut maubach) = (0, 0, 0);
    for e in mesh.elements() {
        match e {
            Element::Unmarked(_) => unmarked += 1,
            Element::Tree(_) => tree += 1,
            Element::Maubach(_) => maubach += 1,
        }
    }
    let levels = mesh.elements().iter().map(Element::level);
    let (lo, hi) = levels.fold((usize::MAX, 0), |(lo, hi), l| (lo.min(l), hi.max(l)));
    let volume = total_volume(&mesh)?;
    println!("dimension: {}", mesh.dim());
    println!("vertices: {}", mesh.vertex_count());
    println!("elements: {}", mesh.element_count());
    println!("marks: {unmarked} unmarked, {tree} tree, {maubach} maubach");
    if !mesh.is_empty() {
        println!("levels: {lo}..={hi}");
    }
    println!("volume: {volume}");
    println!("hanging-vertex elements: {}", get_non_conformal_simplices(&mesh).len());
    Ok(())
}

fn total_volume(mesh: &Mesh) -> nbisect::Result<f64> {
    mesh.simplices().map(|s| simplex_volume(s, mesh.vertices())).sum()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NBISECT_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Refine(a) => refine(a),
        Command::Check(a) => check(a),
        Command::Quality(a) => quality(a),
        Command::Info(a) => info_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("nbisect: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Structural(msg)) => {
            eprintln!("nbisect: error: {msg}");
            ExitCode::from(2)
        }
    }
}
