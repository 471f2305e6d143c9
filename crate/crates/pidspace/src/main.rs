use std::fs;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pidspace::error::{AppError, AppResult};
use pidspace::project::{self, Overrides, Project, Reference};
use pidspace::schema::{self, AnalysisDoc, RegionMapDoc, SimDoc, SweepDoc, TfDoc, SCHEMA_VERSION};
use pidspace::{export, parallel, service, svg};
use pidspace_core::TransferFunction;

const CSV_HELP: &str = "\
CSV columns:
  boundaries   kind,constraint_value,x,y,theta,theta_l  (theta_l only for MS curves)
  members      x,y  (centers of cells meeting every required constraint)
  simulation   time,reference,output,error,control

Units: phase margins in degrees, gain margins in dB, weight frequencies in
rad/s, sample times in seconds, frequency angles theta in radians.

Exit codes: 0 success, 1 io, 2 config, 3 numerics, 4 precondition.
Environment: PIDSPACE_THREADS bounds the number of worker threads.";

#[derive(Parser)]
#[command(name = "pidspace", version, about = "Gain-space design of digital PID controllers", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-order-hold discretization of the plant; prints the pole mapping.
    Discretize(DiscretizeArgs),
    /// Classifies a gain plane and writes the region map.
    Region(RegionArgs),
    /// Checks one gain point.
    Analyze(AnalyzeArgs),
    /// Closed-loop time response at one gain point.
    Simulate(SimulateArgs),
    /// Serves the JSON API over the project.
    Serve(ServeArgs),
    /// Writes the figure set (SVG, CSV, JSON) into a directory.
    Export(ExportArgs),
}

#[derive(Args)]
struct DiscretizeArgs {
    /// Project configuration (JSON).
    #[arg(long, required_unless_present = "plant")]
    config: Option<PathBuf>,
    /// A continuous transfer function document instead of a project.
    #[arg(long, conflicts_with = "config", requires = "sample_time")]
    plant: Option<PathBuf>,
    /// Sample time in seconds.
    #[arg(long)]
    sample_time: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Values that replace configuration keys. `none` clears a constraint.
#[derive(Args, Default)]
struct OverrideArgs {
    #[arg(long, value_name = "DEG|none")]
    pm_min: Option<String>,
    #[arg(long, value_name = "DEG|none")]
    pm_max: Option<String>,
    #[arg(long, value_name = "DB|none")]
    gm_min: Option<String>,
    /// Drop the stability requirement.
    #[arg(long)]
    no_stability: bool,
    /// Value of the gain not on the plane.
    #[arg(long, allow_hyphen_values = true)]
    fixed: Option<f64>,
    #[arg(long)]
    sample_time: Option<f64>,
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true, value_parser = parse_range)]
    x_range: Option<[f64; 2]>,
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true, value_parser = parse_range)]
    y_range: Option<[f64; 2]>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
}

impl OverrideArgs {
    fn overrides(&self) -> AppResult<Overrides> {
        let opt = |name: &str, v: &Option<String>| -> AppResult<Option<Option<f64>>> {
            v.as_deref()
                .map(|s| match s {
                    "none" | "null" => Ok(None),
                    _ => s
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| AppError::Config(format!("--{name}: expected a number or none, got {s:?}"))),
                })
                .transpose()
        };
        Ok(Overrides {
            stability: self.no_stability.then_some(false),
            pm_min: opt("pm-min", &self.pm_min)?,
            pm_max: opt("pm-max", &self.pm_max)?,
            gm_min: opt("gm-min", &self.gm_min)?,
            weights: None,
            fixed: self.fixed,
            sample_time: self.sample_time,
            x_range: self.x_range,
            y_range: self.y_range,
            nx: self.nx,
            ny: self.ny,
        })
    }
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) => Ok([a, b]),
            _ => Err(format!("expected LO,HI, got {s:?}")),
        },
        _ => Err(format!("expected LO,HI, got {s:?}")),
    }
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Run the configured sweep and write a sweep document.
    #[arg(long)]
    sweep: bool,
    /// Region map (or sweep) JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    members_csv: Option<PathBuf>,
    #[arg(long)]
    boundaries_csv: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct GainArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kp: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ki: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kd: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    gains: GainArgs,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Append a simulation: step|ramp and the number of steps.
    #[arg(long, num_args = 2, value_names = ["REF", "N"])]
    simulate: Option<Vec<String>>,
    /// Simulate even when the loop is unstable.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    gains: GainArgs,
    #[arg(long, default_value = "step")]
    reference: String,
    #[arg(long, default_value_t = service::DEFAULT_SIM_STEPS)]
    steps: usize,
    #[arg(long)]
    force: bool,
    /// Simulation JSON; stdout when neither this nor --csv is given.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    /// Concurrent computations.
    #[arg(long, default_value_t = 2)]
    workers: usize,
    /// Directory of static assets served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Project to compute from.
    #[arg(long, required_unless_present = "map")]
    config: Option<PathBuf>,
    /// Render a saved region map instead of computing one.
    #[arg(long, conflicts_with = "config")]
    map: Option<PathBuf>,
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Gain point for the analysis figures.
    #[arg(long, allow_hyphen_values = true)]
    kp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ki: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kd: Option<f64>,
    #[arg(long, default_value_t = service::DEFAULT_SIM_STEPS)]
    steps: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> AppResult<()> {
    parallel::init_threads()?;
    match cli.command {
        Command::Discretize(a) => discretize(a),
        Command::Region(a) => region(a),
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Serve(a) => serve(a),
        Command::Export(a) => export_all(a),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> AppResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| AppError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn create(path: &Path) -> AppResult<fs::File> {
    fs::File::create(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

fn load(config: &Path, o: &OverrideArgs) -> AppResult<Project> {
    let base = Project::from_config(project::read_config(config)?)?;
    base.with_overrides(&o.overrides()?)
}

fn discretize(a: DiscretizeArgs) -> AppResult<()> {
    let (plant, t, out) = match (&a.config, &a.plant) {
        (Some(c), _) => {
            let cfg = project::read_config(c)?;
            let t = a
                .sample_time
                .or(cfg.sample_time)
                .ok_or_else(|| AppError::Config("sample_time is required".into()))?;
            (cfg.plant.to_tf()?, t, a.out.clone().or(cfg.output.discrete.clone()))
        }
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| AppError::Io(format!("{}: {e}", p.display())))?;
            let doc: TfDoc = serde_json::from_str(&text)?;
            (doc.to_tf()?, a.sample_time.expect("required by clap"), a.out.clone())
        }
        (None, None) => unreachable!("clap requires --config or --plant"),
    };
    if plant.is_discrete() {
        return Err(AppError::Config("plant is already discrete".into()));
    }
    let d = plant.c2d_zoh(t)?;
    eprint!("{}", pole_table(&plant, &d, t)?);
    write_out(out.as_deref(), &schema::to_json(&TfDoc::from_tf(&d)))
}

/// Continuous poles, their images `e^{pT}` and the nearest discrete pole.
fn pole_table(c: &TransferFunction, d: &TransferFunction, t: f64) -> AppResult<String> {
    use std::fmt::Write;
    let cp = c.poles()?;
    let dp = d.poles()?;
    let mut s = String::new();
    let _ = writeln!(s, "{:>26}  {:>26}  {:>26}", "s pole", "exp(s T)", "z pole");
    for p in cp {
        let m = (p * t).exp();
        let z = dp
            .iter()
            .min_by(|a, b| (**a - m).norm().total_cmp(&(**b - m).norm()))
            .copied()
            .unwrap_or(m);
        let _ = writeln!(
            s,
            "{:>12.6} {:>+12.6}j  {:>12.8} {:>+12.8}j  {:>12.8} {:>+12.8}j",
            p.re, p.im, m.re, m.im, z.re, z.im
        );
    }
    Ok(s)
}

fn region(a: RegionArgs) -> AppResult<()> {
    let cfg = project::read_config(&a.config)?;
    let out = cfg.output.clone();
    let p = Project::from_config(cfg)?.with_overrides(&a.overrides.overrides()?)?;
    if a.sweep {
        let sweep = p.sweep()?;
        let doc = SweepDoc::from_sweep(&sweep);
        for w in &doc.warnings {
            eprintln!("warning: {w}");
        }
        return write_out(a.out.as_deref().or(out.sweep.as_deref()), &schema::to_json(&doc));
    }
    let map = p.region_map()?;
    for w in &map.warnings {
        eprintln!("warning: {w}");
    }
    if map.member_count() == 0 {
        eprintln!("empty region: no cell meets every constraint");
    } else if map.clipped.any() {
        eprintln!("note: the region reaches the edge of the plotted range");
    }
    write_region_files(
        &map,
        a.svg.as_deref().or(out.svg.as_deref()),
        a.members_csv.as_deref().or(out.members_csv.as_deref()),
        a.boundaries_csv.as_deref().or(out.boundaries_csv.as_deref()),
    )?;
    write_out(
        a.out.as_deref().or(out.region.as_deref()),
        &schema::to_json(&RegionMapDoc::from_map(&map)),
    )
}

fn write_region_files(
    map: &pidspace_core::region::RegionMap,
    svg_path: Option<&Path>,
    members: Option<&Path>,
    boundaries: Option<&Path>,
) -> AppResult<()> {
    if let Some(path) = svg_path {
        write_out(Some(path), &svg::region_svg(map))?;
    }
    if let Some(path) = members {
        export::members_csv(map, create(path)?)?;
    }
    if let Some(path) = boundaries {
        export::boundaries_csv(&map.boundaries, create(path)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeWithSim {
    version: u32,
    analysis: AnalysisDoc,
    simulation: SimDoc,
}

fn analyze(a: AnalyzeArgs) -> AppResult<()> {
    let cfg = project::read_config(&a.config)?;
    let out_path = a.out.clone().or(cfg.output.analysis.clone());
    let p = Project::from_config(cfg)?.with_overrides(&a.overrides.overrides()?)?;
    let g = a.gains;
    match &a.simulate {
        None => write_out(out_path.as_deref(), &p.analysis_json(g.kp, g.ki, g.kd)?),
        Some(v) => {
            let reference: Reference = v[0].parse()?;
            let n: usize = v[1]
                .parse()
                .map_err(|_| AppError::Config(format!("--simulate: expected a step count, got {:?}", v[1])))?;
            let analysis = p.analyze(g.kp, g.ki, g.kd)?;
            let simulation = p.simulate(g.kp, g.ki, g.kd, reference, n, a.force)?;
            let doc = AnalyzeWithSim { version: SCHEMA_VERSION, analysis, simulation };
            write_out(out_path.as_deref(), &schema::to_json(&doc))
        }
    }
}

fn simulate(a: SimulateArgs) -> AppResult<()> {
    let cfg = project::read_config(&a.config)?;
    let out_path = a.out.clone().or(cfg.output.simulation.clone());
    let p = Project::from_config(cfg)?;
    let g = a.gains;
    let reference: Reference = a.reference.parse()?;
    let sim = p.simulate(g.kp, g.ki, g.kd, reference, a.steps, a.force)?;
    if sim.diverging {
        eprintln!("warning: the closed loop is unstable; the response diverges");
    }
    if let Some(path) = &a.csv {
        export::simulation_csv(&sim, create(path)?)?;
    }
    if let Some(path) = &a.svg {
        write_out(Some(path), &svg::response_svg(&sim))?;
    }
    if out_path.is_some() || a.csv.is_none() {
        write_out(out_path.as_deref(), &schema::to_json(&sim))?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> AppResult<()> {
    let p = Project::load(&a.config)?;
    if let Some(d) = &a.static_dir {
        if !d.is_dir() {
            return Err(AppError::Config(format!("{} is not a directory", d.display())));
        }
    }
    let state = Arc::new(service::AppState::new(p, a.workers));
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| AppError::Io(e.to_string()))?;
    rt.block_on(service::serve(state, SocketAddr::new(a.bind, a.port), a.static_dir))
}

fn export_all(a: ExportArgs) -> AppResult<()> {
    fs::create_dir_all(&a.dir).map_err(|e| AppError::Io(format!("{}: {e}", a.dir.display())))?;
    let dir = |name: &str| a.dir.join(name);
    if let Some(m) = &a.map {
        let text = fs::read_to_string(m).map_err(|e| AppError::Io(format!("{}: {e}", m.display())))?;
        let map = serde_json::from_str::<RegionMapDoc>(&text)?.to_map()?;
        return write_region_files(
            &map,
            Some(&dir("region.svg")),
            Some(&dir("members.csv")),
            Some(&dir("boundaries.csv")),
        );
    }
    let p = load(a.config.as_deref().expect("required by clap"), &a.overrides)?;
    let map = p.region_map()?;
    write_out(Some(&dir("region.json")), &schema::to_json(&RegionMapDoc::from_map(&map)))?;
    write_region_files(
        &map,
        Some(&dir("region.svg")),
        Some(&dir("members.csv")),
        Some(&dir("boundaries.csv")),
    )?;
    if a.kp.is_none() && a.ki.is_none() && a.kd.is_none() {
        return Ok(());
    }
    let (kp, ki, kd) = (a.kp.unwrap_or(0.0), a.ki.unwrap_or(0.0), a.kd.unwrap_or(0.0));
    let analysis = p.analyze(kp, ki, kd)?;
    write_out(Some(&dir("analysis.json")), &schema::to_json(&analysis))?;
    let ctx = p.context()?;
    let gains = p.gains(kp, ki, kd)?;
    write_out(Some(&dir("bode.svg")), &svg::bode_svg(&ctx, &gains)?)?;
    if p.weights.is_some() {
        write_out(Some(&dir("robust_performance.svg")), &svg::rp_svg(&ctx, &gains)?)?;
    }
    if analysis.flags.stable.pass {
        let sim = p.simulate(kp, ki, kd, Reference::Step, a.steps, false)?;
        write_out(Some(&dir("step.json")), &schema::to_json(&sim))?;
        export::simulation_csv(&sim, create(&dir("step.csv"))?)?;
        write_out(Some(&dir("step.svg")), &svg::response_svg(&sim))?;
    } else {
        eprintln!("note: unstable loop, step response skipped");
    }
    Ok(())
}
