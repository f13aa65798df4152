//! Command line front end. Every command resolves one RunConfig from flags
//! and an optional config file (flags win), then writes its outputs with
//! 17-significant-digit floats so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use basinbound::fmt::float17;
use basinbound::{
    classify_forward, extract_boundary, points_csv, rasterize, run_check,
    trace_manifold_with, write_ppm, Branch, Error, GridSpec, ManifoldKind, MapFamily, OrbitBudget,
    Point2, RegionContext, ScalarMap, TraceOptions, Verdict, CATALOG,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Checks a sweep runs at each (delta, mu): parameter thresholds plus the
/// escape-region certificates whose hypotheses move with delta.
const SWEEP_CORE: [&str; 8] = [
    "flip_saddle_origin",
    "eigen_thresholds_origin",
    "alpha_attracting_threshold",
    "lemma5_beta_cone_forward_escape",
    "lemma4_wdelta_backward_escape",
    "lemma6_right_wedge",
    "prop16i_q4_right_wedge",
    "prop16ii_q4_deep_strip",
];

fn catalog_help() -> String {
    let mut out = String::from("Checks (for `verify --checks`):\n");
    for c in CATALOG {
        let _ = writeln!(out, "  {:<34} {}", c.id, c.summary);
    }
    out
}

#[derive(Parser)]
#[command(
    name = "basinbound",
    version,
    about = "Orbit fates, invariant manifolds, basin rasters, and a runnable check catalog \
             for a family of planar quadratic maps",
    after_long_help = catalog_help()
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    /// Print the resolved configuration in config-file syntax and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Quadratic family parameters.
    #[arg(
        long,
        global = true,
        num_args = 2,
        value_names = ["DELTA", "MU"],
        allow_negative_numbers = true,
        conflicts_with = "general"
    )]
    henon: Option<Vec<f64>>,

    /// General family: first-component map, coupling map, reference slope.
    /// Maps are catalog specs such as logistic(2) or linear_plus_sine(0.1,0.001).
    #[arg(long, global = true, num_args = 3, value_names = ["G", "H", "DELTA_REF"])]
    general: Option<Vec<String>>,

    /// Plain-text config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// RNG seed for sampling-based commands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for grid commands; 0 keeps the library default.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Iteration cap per orbit.
    #[arg(long, global = true)]
    max_iter: Option<usize>,

    /// Max-norm radius beyond which an orbit counts as escaped.
    #[arg(long, global = true, allow_negative_numbers = true)]
    escape_norm: Option<f64>,

    /// Distance to a fixed point that starts the convergence confirmation.
    #[arg(long, global = true)]
    attract_tol: Option<f64>,

    /// Consecutive in-tolerance steps required to confirm convergence.
    #[arg(long, global = true)]
    confirm_steps: Option<usize>,

    /// Raster dimensions.
    #[arg(long, global = true, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,

    /// Rectangle x_min x_max y_min y_max for rasters and manifold clipping.
    #[arg(
        long,
        global = true,
        num_args = 4,
        value_names = ["X0", "X1", "Y0", "Y1"],
        allow_negative_numbers = true
    )]
    window: Option<Vec<f64>>,

    /// Output path (basin treats it as a stem for .ppm and _boundary.csv).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the forward fate of one point.
    Classify {
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        point: Vec<f64>,
        /// Also list every closed region containing the point.
        #[arg(long)]
        regions: bool,
    },
    /// Rasterize orbit fates over the window and export the basin boundary.
    Basin,
    /// Trace one invariant-manifold branch of the saddle at the origin to CSV.
    Manifold {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum)]
        branch: BranchArg,
        /// Arclength at which tracing stops.
        #[arg(long, default_value_t = 8.0)]
        target: f64,
        /// Max spacing between consecutive polyline points.
        #[arg(long, default_value_t = 0.01)]
        spacing: f64,
    },
    /// Run catalog checks and write a JSON report.
    Verify {
        /// Comma-separated check ids, or "all".
        #[arg(long, default_value = "all", value_delimiter = ',')]
        checks: Vec<String>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// For each mu, find the largest delta in the grid passing the core checks.
    Sweep {
        /// Logistic parameters, each in (1, 3).
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        mu: Vec<f64>,
        /// Coupling values to test, ascending or not; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 120)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

enum CmdError {
    /// Exit 2: bad arguments, bad config, unwritable outputs.
    Usage(String),
    /// Exit 3: the requested computation needs a saddle at the origin.
    Dynamics(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::OriginNotSaddle => CmdError::Dynamics(e.to_string()),
            other => CmdError::Usage(other.to_string()),
        }
    }
}

#[derive(Clone, PartialEq)]
enum MapChoice {
    Henon { delta: f64, mu: f64 },
    General { g: String, h: String, delta_ref: f64 },
}

/// Everything a command needs, with the budget already resolved against the
/// chosen map's defaults so the canonical echo is fully explicit.
struct Run {
    map: MapFamily,
    choice: MapChoice,
    budget: OrbitBudget,
    seed: u64,
    workers: usize,
    grid: Option<(usize, usize)>,
    window: Option<(f64, f64, f64, f64)>,
    out: Option<PathBuf>,
}

#[derive(Default)]
struct FileConfig {
    map: Option<MapChoice>,
    seed: Option<u64>,
    workers: Option<usize>,
    max_iter: Option<usize>,
    escape_norm: Option<f64>,
    attract_tol: Option<f64>,
    confirm_steps: Option<usize>,
    grid: Option<(usize, usize)>,
    window: Option<(f64, f64, f64, f64)>,
    out: Option<PathBuf>,
}

fn parse_config_file(path: &Path) -> Result<FileConfig, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| {
            CmdError::Usage(format!("{}:{}: {what}: `{raw}`", path.display(), lineno + 1))
        };
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad("bad number"));
        let int = |v: &str| v.parse::<usize>().map_err(|_| bad("bad integer"));
        match key {
            "map" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                cfg.map = Some(match parts.as_slice() {
                    ["henon", d, m] => MapChoice::Henon { delta: num(d)?, mu: num(m)? },
                    ["general", g, h, d] => MapChoice::General {
                        g: (*g).to_string(),
                        h: (*h).to_string(),
                        delta_ref: num(d)?,
                    },
                    _ => return Err(bad("expected `henon D MU` or `general G H DELTA_REF`")),
                });
            }
            "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("bad integer"))?),
            "workers" => cfg.workers = Some(int(value)?),
            "max_iter" => cfg.max_iter = Some(int(value)?),
            "escape_norm" => cfg.escape_norm = Some(num(value)?),
            "attract_tol" => cfg.attract_tol = Some(num(value)?),
            "confirm_steps" => cfg.confirm_steps = Some(int(value)?),
            "grid" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [nx, ny] = parts.as_slice() else {
                    return Err(bad("expected `grid = NX NY`"));
                };
                cfg.grid = Some((int(nx)?, int(ny)?));
            }
            "window" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [a, b, c, d] = parts.as_slice() else {
                    return Err(bad("expected `window = X0 X1 Y0 Y1`"));
                };
                cfg.window = Some((num(a)?, num(b)?, num(c)?, num(d)?));
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            _ => return Err(bad("unknown key")),
        }
    }
    Ok(cfg)
}

/// Catalog specs keep no meaningful whitespace, so the canonical form drops
/// it all and the config file can treat a spec as one token.
fn canonical_spec(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn resolve(args: &ConfigArgs) -> Result<Run, CmdError> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => FileConfig::default(),
    };

    let choice = if let Some(hm) = &args.henon {
        MapChoice::Henon { delta: hm[0], mu: hm[1] }
    } else if let Some(parts) = &args.general {
        let delta_ref = parts[2]
            .parse::<f64>()
            .map_err(|_| CmdError::Usage(format!("bad DELTA_REF `{}`", parts[2])))?;
        MapChoice::General {
            g: canonical_spec(&parts[0]),
            h: canonical_spec(&parts[1]),
            delta_ref,
        }
    } else {
        file.map.clone().unwrap_or(MapChoice::Henon { delta: 0.1, mu: 2.0 })
    };

    let map = match &choice {
        MapChoice::Henon { delta, mu } => MapFamily::henon(*delta, *mu)?,
        MapChoice::General { g, h, delta_ref } => MapFamily::general(
            ScalarMap::from_catalog(g)?,
            ScalarMap::from_catalog(h)?,
            *delta_ref,
        )?,
    };

    let mut budget = OrbitBudget::default_for(&map);
    if let Some(n) = args.max_iter.or(file.max_iter) {
        budget = budget.with_max_iter(n);
    }
    if let Some(r) = args.escape_norm.or(file.escape_norm) {
        budget = budget.with_escape_norm(r);
    }
    if let Some(t) = args.attract_tol.or(file.attract_tol) {
        budget = budget.with_attract_tol(t);
    }
    if let Some(k) = args.confirm_steps.or(file.confirm_steps) {
        budget = budget.with_confirm_steps(k);
    }

    Ok(Run {
        map,
        choice,
        budget,
        seed: args.seed.or(file.seed).unwrap_or(7),
        workers: args.workers.or(file.workers).unwrap_or(0),
        grid: args.grid.as_ref().map(|g| (g[0], g[1])).or(file.grid),
        window: args.window.as_ref().map(|w| (w[0], w[1], w[2], w[3])).or(file.window),
        out: args.out.clone().or(file.out),
    })
}

impl Run {
    /// The normalized config echo: valid config-file syntax, floats at 17
    /// significant digits, stable under another parse-echo round trip.
    fn canonical(&self) -> String {
        let mut out = String::new();
        match &self.choice {
            MapChoice::Henon { delta, mu } => {
                let _ = writeln!(out, "map = henon {} {}", float17(*delta), float17(*mu));
            }
            MapChoice::General { g, h, delta_ref } => {
                let _ = writeln!(out, "map = general {g} {h} {}", float17(*delta_ref));
            }
        }
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "workers = {}", self.workers);
        let _ = writeln!(out, "max_iter = {}", self.budget.max_iter);
        let _ = writeln!(out, "escape_norm = {}", float17(self.budget.escape_norm));
        let _ = writeln!(out, "attract_tol = {}", float17(self.budget.attract_tol));
        let _ = writeln!(out, "confirm_steps = {}", self.budget.confirm_steps);
        if let Some((nx, ny)) = self.grid {
            let _ = writeln!(out, "grid = {nx} {ny}");
        }
        if let Some((x0, x1, y0, y1)) = self.window {
            let _ = writeln!(
                out,
                "window = {} {} {} {}",
                float17(x0),
                float17(x1),
                float17(y0),
                float17(y1)
            );
        }
        if let Some(path) = &self.out {
            let _ = writeln!(out, "out = {}", path.display());
        }
        out
    }

    fn out_path(&self) -> Result<&PathBuf, CmdError> {
        self.out
            .as_ref()
            .ok_or_else(|| CmdError::Usage("--out is required for this command".into()))
    }

    fn with_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, CmdError> {
        if self.workers == 0 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CmdError::Usage(format!("cannot build a {}-thread pool: {e}", self.workers)))?;
        Ok(pool.install(f))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CmdError> {
    std::fs::write(path, bytes)
        .map_err(|e| CmdError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_classify(run: &Run, point: &[f64], regions: bool) -> Result<u8, CmdError> {
    let p = Point2::new(point[0], point[1])?;
    let fate = classify_forward(&run.map, p, &run.budget);
    let witness = match fate.witness {
        Some(tag) => format!("{tag:?}"),
        None => "none".into(),
    };
    println!("fate={} iters={} witness={witness}", fate.kind, fate.iterations_used);
    if regions {
        let params = *run.map.params().ok_or_else(|| {
            CmdError::Usage("--regions needs the quadratic family (--henon)".into())
        })?;
        let tags = RegionContext::new(params)?.classify(p);
        let names: Vec<String> = tags.iter().map(|t| format!("{t:?}")).collect();
        println!("regions={}", names.join(","));
    }
    Ok(0)
}

fn cmd_basin(run: &Run) -> Result<u8, CmdError> {
    let (nx, ny) = run.grid.unwrap_or((400, 400));
    let (x0, x1, y0, y1) = run.window.unwrap_or((-1.0, 2.0, -0.5, 0.5));
    let grid = GridSpec::new(nx, ny, x0, x1, y0, y1)?;
    let raster = run.with_pool(|| rasterize(&run.map, &grid, &run.budget))?;
    let boundary = extract_boundary(&raster);

    let stem = run.out_path()?;
    let ppm_path = stem.with_extension("ppm");
    let file_name = stem
        .file_stem()
        .ok_or_else(|| CmdError::Usage(format!("bad output stem {}", stem.display())))?
        .to_string_lossy()
        .into_owned();
    let csv_path = stem.with_file_name(format!("{file_name}_boundary.csv"));

    write_ppm(&raster, &ppm_path)
        .map_err(|e| CmdError::Usage(format!("cannot write {}: {e}", ppm_path.display())))?;
    write_file(&csv_path, points_csv(&boundary).as_bytes())?;
    println!(
        "wrote {} ({nx}x{ny}) and {} ({} boundary cells)",
        ppm_path.display(),
        csv_path.display(),
        boundary.len()
    );
    Ok(0)
}

fn cmd_manifold(
    run: &Run,
    kind: KindArg,
    branch: BranchArg,
    target: f64,
    spacing: f64,
) -> Result<u8, CmdError> {
    let kind = match kind {
        KindArg::Stable => ManifoldKind::Stable,
        KindArg::Unstable => ManifoldKind::Unstable,
    };
    let branch = match branch {
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
    };
    let mut options = TraceOptions::default();
    if let Some(w) = run.window {
        options.window = Some(w);
    }
    let trace = trace_manifold_with(&run.map, kind, branch, target, spacing, &options)?;
    let path = run.out_path()?;
    write_file(path, trace.curve.to_csv().as_bytes())?;
    println!(
        "wrote {} ({} points, arclength {}, {:?})",
        path.display(),
        trace.curve.points.len(),
        float17(trace.curve.total_arclength()),
        trace.outcome
    );
    Ok(0)
}

fn cmd_verify(run: &Run, checks: &[String], samples: usize) -> Result<u8, CmdError> {
    let ids: Vec<&str> = if checks.len() == 1 && checks[0] == "all" {
        CATALOG.iter().map(|c| c.id).collect()
    } else {
        checks.iter().map(String::as_str).collect()
    };
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        reports.push(run_check(&run.map, id, samples, run.seed)?);
    }
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| CmdError::Usage(format!("cannot serialize report: {e}")))?;
    let path = run.out_path()?;
    write_file(path, json.as_bytes())?;

    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let fails = count(Verdict::Fail);
    println!(
        "wrote {}: {} checks, {} pass, {fails} fail, {} inapplicable",
        path.display(),
        reports.len(),
        count(Verdict::Pass),
        count(Verdict::Inapplicable)
    );
    Ok(if fails > 0 { 1 } else { 0 })
}

fn cmd_sweep(run: &Run, mu: &[f64], deltas: &[f64], samples: usize) -> Result<u8, CmdError> {
    for &m in mu {
        if !(1.0 < m && m < 3.0) {
            return Err(CmdError::Usage(format!("mu = {m} is outside (1, 3)")));
        }
    }
    let mut csv = String::from("mu,delta_star\n");
    if !deltas.is_empty() {
        for &m in mu {
            let mut best: Option<f64> = None;
            for &d in deltas {
                if delta_passes_core(d, m, samples, run.seed)? {
                    best = Some(best.map_or(d, |b: f64| b.max(d)));
                }
            }
            let star = best.map_or_else(|| "none".into(), float17);
            let _ = writeln!(csv, "{},{star}", float17(m));
        }
    }
    let path = run.out_path()?;
    write_file(path, csv.as_bytes())?;
    println!("wrote {} ({} mu values, {} deltas)", path.display(), mu.len(), deltas.len());
    Ok(0)
}

/// A delta passes when the core set has no failures and at least one check
/// actually ran: all-inapplicable would say nothing about the parameters.
fn delta_passes_core(delta: f64, mu: f64, samples: usize, seed: u64) -> Result<bool, CmdError> {
    let map = match MapFamily::henon(delta, mu) {
        Ok(m) => m,
        Err(_) => return Ok(false),
    };
    let mut ran_any = false;
    for id in SWEEP_CORE {
        let report = run_check(&map, id, samples, seed)?;
        match report.verdict {
            Verdict::Fail => return Ok(false),
            Verdict::Pass => ran_any = true,
            Verdict::Inapplicable => {}
        }
    }
    Ok(ran_any)
}

fn run(cli: Cli) -> Result<u8, CmdError> {
    let run = resolve(&cli.config)?;
    if cli.print_config {
        print!("{}", run.canonical());
        return Ok(0);
    }
    match cli.command {
        None => Err(CmdError::Usage(
            "missing command: classify, basin, manifold, verify, or sweep (see --help)".into(),
        )),
        Some(Command::Classify { point, regions }) => cmd_classify(&run, &point, regions),
        Some(Command::Basin) => cmd_basin(&run),
        Some(Command::Manifold { kind, branch, target, spacing }) => {
            cmd_manifold(&run, kind, branch, target, spacing)
        }
        Some(Command::Verify { checks, samples }) => cmd_verify(&run, &checks, samples),
        Some(Command::Sweep { mu, deltas, samples }) => cmd_sweep(&run, &mu, &deltas, samples),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Dynamics(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
