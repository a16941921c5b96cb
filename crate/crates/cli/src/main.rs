//! `asced`: build codes, generate ensembles, check the splitting property,
//! run Monte-Carlo sweeps and merge their CSV output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use asced_core::channel::{derive_stream, SeedPlan};
use asced_core::codes::{validate_css, CodeSpec, StabilizerCode};
use asced_core::degeneracy::{verify_splitting, DegeneracySetId};
use asced_core::ensemble::{generate_splitters, EnsembleFile, SplitterParams, SplitterSet};
use asced_core::gf2::BinaryMatrix;
use asced_core::sim::{run_point, with_threads, Experiment, ExperimentConfig, PointStats, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
enum CliError {
    /// Bad input: flags, config files, schemas, failed checks.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<asced_core::Error> for CliError {
    fn from(e: asced_core::Error) -> Self {
        use asced_core::Error as E;
        match e {
            E::Io(_) | E::BudgetExhausted(_) | E::InconsistentEstimate | E::NoCandidates => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "asced",
    version,
    about = "Quaternary BP and affine subcode ensemble decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a code from a spec file and report its parameters.
    BuildCode(BuildCodeArgs),
    /// Generate the splitter/overcomplete ensemble of an experiment.
    GenEnsemble(GenEnsembleArgs),
    /// Check that splitters cut degeneracy sets into equal parts.
    VerifySplitting(VerifyArgs),
    /// Run the Monte-Carlo sweep of an experiment.
    Simulate(SimulateArgs),
    /// Merge simulation CSVs into one labeled table.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct BuildCodeArgs {
    /// Code spec JSON.
    #[arg(long)]
    config: PathBuf,
    /// Directory for H, H_X and H_Z in the matrix text format.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenEnsembleArgs {
    /// Experiment JSON.
    #[arg(long)]
    config: PathBuf,
    /// Ensemble JSON to write.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the working matrix of every batch.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Code spec JSON (n - k at most 16).
    #[arg(long)]
    config: PathBuf,
    /// Check the splitters stored in this ensemble instead of fresh ones.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    delta: usize,
    #[arg(long, default_value_t = 2)]
    weight: usize,
    /// Largest overlap with rows of the same block; unlimited when absent.
    #[arg(long)]
    max_overlap: Option<usize>,
    /// Number of splitter sets to draw.
    #[arg(long, default_value_t = 100)]
    sets: usize,
    /// Degeneracy sets checked per splitter set.
    #[arg(long, default_value_t = 10)]
    ids: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
struct SimulateArgs {
    /// Experiment JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; receives `<stem>.csv` and `<stem>.json`.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Reuse a stored ensemble instead of generating one.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Write 0 in the seconds column so reruns compare byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Keep finished points of an earlier run with the same config.
    #[arg(long)]
    resume: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Simulation CSVs; labels come from the sidecar next to each.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn with_file<T>(path: &Path, r: asced_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        CliError::Runtime(m) => CliError::Runtime(format!("{}: {m}", path.display())),
    })
}

fn load_code(path: &Path) -> CliResult<(CodeSpec, StabilizerCode)> {
    let spec = with_file(path, CodeSpec::from_json(&read(path)?))?;
    let code = with_file(path, spec.build())?;
    Ok((spec, code))
}

fn load_experiment(path: &Path, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let mut cfg = with_file(path, ExperimentConfig::from_json(&read(path)?))?;
    if let Some(s) = seed {
        cfg.mc.seed = s;
    }
    Ok(cfg)
}

fn build_code(args: &BuildCodeArgs) -> CliResult<()> {
    let (_, code) = load_code(&args.config)?;
    let css = code.css_blocks();
    let verdict = match css {
        Some(b) if validate_css(&b.hx, &b.hz)?.is_ok() => "ok",
        Some(_) => "failed",
        None => "n/a",
    };
    println!("n={} k={} rank={} css={verdict}", code.n(), code.k(), code.rank());
    if let Some(dir) = &args.matrix_out {
        write(&dir.join("H.txt"), &code.check_matrix().to_text())?;
        if let Some(b) = css {
            write(&dir.join("HX.txt"), &b.hx.to_text())?;
            write(&dir.join("HZ.txt"), &b.hz.to_text())?;
        }
    }
    if verdict == "failed" {
        return Err(CliError::Validation("H_X H_Z^T is not zero".into()));
    }
    Ok(())
}

fn gen_ensemble(args: &GenEnsembleArgs) -> CliResult<()> {
    let cfg = load_experiment(&args.config, args.seed)?;
    let exp = Experiment::prepare(cfg)?;
    let file = exp.ensemble_file();
    write(&args.out, &file.to_json()?)?;
    if let Some(dir) = &args.matrix_out {
        for (i, b) in exp.ensemble.batches.iter().enumerate() {
            write(&dir.join(format!("batch_{i}.txt")), &b.working_matrix().to_text())?;
        }
        if let Some(b) = &exp.ensemble.plain {
            write(&dir.join("plain.txt"), &b.working_matrix().to_text())?;
        }
    }
    println!(
        "batches={} paths={} duplicates={} hash={}",
        exp.ensemble.batches.len(),
        exp.config.num_paths(),
        exp.ensemble.duplicate_batches,
        file.hash
    );
    Ok(())
}

fn stored_splitters(path: &Path) -> CliResult<Vec<SplitterSet>> {
    let file = with_file(path, EnsembleFile::from_json(&read(path)?))?;
    file.batches
        .iter()
        .map(|r| {
            Ok(SplitterSet {
                a_x: with_file(path, BinaryMatrix::from_text(&r.a_x))?,
                a_z: with_file(path, BinaryMatrix::from_text(&r.a_z))?,
            })
        })
        .collect()
}

fn verify(args: &VerifyArgs) -> CliResult<()> {
    let (_, code) = load_code(&args.config)?;
    let sets = match &args.ensemble {
        Some(path) => stored_splitters(path)?,
        None => {
            let params = SplitterParams {
                max_overlap: args.max_overlap,
                ..SplitterParams::new(args.delta, args.weight)
            };
            (0..args.sets)
                .map(|i| {
                    generate_splitters(
                        &code,
                        params,
                        &mut derive_stream(SeedPlan::construction(args.seed), i as u64),
                    )
                })
                .collect::<asced_core::Result<Vec<_>>>()?
        }
    };
    let mut stream = derive_stream(SeedPlan::construction(args.seed), u64::MAX);
    let (mut checked, mut failed) = (0usize, 0usize);
    for (i, s) in sets.iter().enumerate() {
        for _ in 0..args.ids {
            let id = DegeneracySetId::random(&code, &mut stream)?;
            let rep = verify_splitting(&code, s, &id)?;
            checked += 1;
            if !rep.passes() {
                failed += 1;
                println!("set {i}: sizes {:?}, expected {} each", rep.sizes, rep.expected);
            }
        }
    }
    println!("checked={checked} failed={failed}");
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {checked} splits were uneven"
        )));
    }
    Ok(())
}

/// JSON written next to every simulation CSV.
#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    label: String,
    config: ExperimentConfig,
    ensemble_hash: String,
    flags: SimulateArgs,
    points: Vec<PointStats>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

fn csv_text(points: &[PointStats], timing: bool) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for p in points {
        out.push_str(&p.csv_row(timing));
        out.push('\n');
    }
    out
}

/// Finished points of an earlier run, if its sidecar matches.
fn previous_points(sidecar_path: &Path, cfg: &ExperimentConfig, hash: &str) -> CliResult<Vec<PointStats>> {
    if !sidecar_path.exists() {
        return Ok(Vec::new());
    }
    let old: Sidecar = serde_json::from_str(&read(sidecar_path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", sidecar_path.display())))?;
    if old.config.code != cfg.code
        || old.config.decoder != cfg.decoder
        || old.config.ensemble != cfg.ensemble
        || old.config.bp4 != cfg.bp4
        || old.config.mc != cfg.mc
        || old.ensemble_hash != hash
    {
        return Err(CliError::Validation(format!(
            "{}: earlier run used a different configuration; cannot resume",
            sidecar_path.display()
        )));
    }
    Ok(old.points)
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = load_experiment(&args.config, args.seed)?;
    let exp = match &args.ensemble {
        Some(path) => {
            let file = with_file(path, EnsembleFile::from_json(&read(path)?))?;
            if file.code != cfg.code || file.seed != cfg.mc.seed {
                return Err(CliError::Validation(format!(
                    "{}: ensemble was built for another code or seed",
                    path.display()
                )));
            }
            with_file(path, Experiment::with_ensemble(cfg, &file))?
        }
        None => Experiment::prepare(cfg)?,
    };
    let hash = exp.ensemble_file().hash;
    let label = stem(&args.config);
    let csv_path = args.out.join(format!("{label}.csv"));
    let sidecar_path = args.out.join(format!("{label}.json"));
    let timing = !args.no_timing;

    let mut done = if args.resume {
        previous_points(&sidecar_path, &exp.config, &hash)?
    } else {
        Vec::new()
    };
    done.retain(|s| exp.config.channel.p_list.contains(&s.p));
    let mut points = Vec::with_capacity(exp.config.channel.p_list.len());
    for &p in &exp.config.channel.p_list {
        if let Some(s) = done.iter().find(|s| s.p == p) {
            info!("p={p} already done, skipping");
            points.push(s.clone());
            continue;
        }
        let mut s = with_threads(args.threads, || run_point(&exp, p))??;
        if !timing {
            s.wall_seconds = 0.0;
        }
        points.push(s);
        // rewritten after every point so an interrupted sweep can resume
        let sidecar = Sidecar {
            label: label.clone(),
            config: exp.config.clone(),
            ensemble_hash: hash.clone(),
            flags: args.clone(),
            points: points.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Runtime(e.to_string()))?;
        write(&csv_path, &csv_text(&points, timing))?;
        write(&sidecar_path, &json)?;
    }
    if points.iter().all(|s| done.contains(s)) {
        write(&csv_path, &csv_text(&points, timing))?;
    }
    println!("{}", csv_path.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct TidyRow<'a> {
    curve: &'a str,
    p: f64,
    ler: f64,
    ci_low: f64,
    ci_high: f64,
    t1f_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct SimRow {
    p: f64,
    ler: f64,
    ci_low: f64,
    ci_high: f64,
    t1f_fraction: Option<f64>,
}

fn curve_label(csv_path: &Path) -> CliResult<String> {
    let sidecar = csv_path.with_extension("json");
    if !sidecar.exists() {
        return Ok(stem(csv_path));
    }
    #[derive(Deserialize)]
    struct Label {
        label: String,
    }
    let l: Label = serde_json::from_str(&read(&sidecar)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", sidecar.display())))?;
    Ok(l.label)
}

fn report(args: &ReportArgs) -> CliResult<()> {
    let expected: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut curves: BTreeMap<usize, (String, Vec<SimRow>)> = BTreeMap::new();
    for (i, path) in args.inputs.iter().enumerate() {
        let bad = |m: String| CliError::Validation(format!("{}: {m}", path.display()));
        let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(bad(format!(
                "unexpected header {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let rows = rdr
            .deserialize()
            .collect::<Result<Vec<SimRow>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        curves.insert(i, (curve_label(path)?, rows));
    }
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| io_err(path, e))?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for (label, rows) in curves.values() {
        for r in rows {
            w.serialize(TidyRow {
                curve: label,
                p: r.p,
                ler: r.ler,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                t1f_fraction: r.t1f_fraction,
            })
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::BuildCode(a) => build_code(a),
        Command::GenEnsemble(a) => gen_ensemble(a),
        Command::VerifySplitting(a) => verify(a),
        Command::Simulate(a) => simulate(a),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
