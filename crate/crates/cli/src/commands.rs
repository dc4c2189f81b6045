use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use critwave::analysis::{self, DiagnosticsOptions, DiagnosticsSeries};
use critwave::dalembert;
use critwave::io;
use critwave::profiles::{self, ExtractConfig};
use critwave::solver::{self, Outcome, RunSample};
use critwave::FieldState;

use crate::config::{self, KeyValues, SimConfig};
use crate::manifest::{self, ExperimentManifest};
use crate::{Cli, CliError, Command, DalembertAction};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Simulate => simulate(cli),
        Command::Dalembert { action } => match action {
            DalembertAction::Check { n } => dalembert_check(cli, *n),
            DalembertAction::Evolve { input, t } => dalembert_evolve(cli, input, *t),
        },
        Command::Analyze(args) => analyze(cli, args),
        Command::Profiles(args) => profiles_cmd(cli, args),
        Command::Sweep(args) => sweep(cli, args),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        CliError::Runtime(format!("cannot write {}: {e}", path.display()))
    })?))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> critwave::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_manifest<T: Serialize>(
    out: &Path,
    config: &T,
    start: f64,
    outcome: &str,
    files: &[String],
) -> Result<(), CliError> {
    let m = ExperimentManifest {
        config_hash: manifest::config_hash(config),
        tool_version: manifest::tool_version(),
        start_time: start,
        end_time: manifest::now(),
        outcome: outcome.to_string(),
        files: manifest::inventory(out, files)?,
    };
    write_with(&out.join("manifest.json"), |w| io::write_json(w, &m))
}

fn load_config(cli: &Cli) -> Result<(KeyValues, PathBuf), CliError> {
    let path = cli
        .global
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((config::read_file(path)?, base))
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    #[serde(flatten)]
    outcome: Outcome,
    family: &'a str,
    steps: usize,
    energy_drift: f64,
    max_amplitude: f64,
    contamination_time: f64,
    samples: &'a [RunSample],
}

/// What one simulate run leaves behind besides its files.
struct RunResult {
    outcome: Outcome,
    nu_hat: Option<f64>,
}

fn run_into(sim: &SimConfig, out: &Path) -> Result<RunResult, CliError> {
    let start = manifest::now();
    let report = solver::run(&sim.run)?;
    let mut files = Vec::new();
    let mut index = String::from("index,t,file\n");
    for (k, frame) in report.frames.iter().enumerate() {
        let name = format!("frame_{k:05}.csv");
        write_with(&out.join("snapshots").join(&name), |w| io::write_snapshot(w, frame))?;
        index.push_str(&format!("{k},{},{name}\n", frame.t));
        files.push(format!("snapshots/{name}"));
    }
    fs::create_dir_all(out.join("snapshots"))?;
    fs::write(out.join("snapshots/times.csv"), index)?;
    files.push("snapshots/times.csv".into());

    let options = DiagnosticsOptions {
        nonlinear: sim.run.nonlinear,
        g_radii: sim.g_radii.clone(),
        ball_radii: sim.ball_radii.clone(),
    };
    let series = analysis::diagnostics_series(&report.frames, None, &options)?;
    write_with(&out.join("series.csv"), |w| io::write_series(w, &series))?;
    files.push("series.csv".into());

    let summary = RunSummary {
        outcome: report.outcome,
        family: sim.run.data.family_name(),
        steps: report.steps,
        energy_drift: report.energy_drift,
        max_amplitude: report.max_amplitude,
        contamination_time: report.contamination_time,
        samples: &report.samples,
    };
    write_with(&out.join("report.json"), |w| io::write_json(w, &summary))?;
    files.push("report.json".into());
    write_manifest(out, &(&sim.run, &sim.g_radii, &sim.ball_radii, sim.seed), start, report.outcome.name(), &files)?;

    let nu_hat = report.outcome.t_star().and_then(|t_star| {
        let times: Vec<f64> = series.rows.iter().map(|r| r.t).collect();
        let radii: Vec<Option<f64>> = series.rows.iter().map(|r| r.radii.lambda1).collect();
        analysis::fit_exponent(&times, &radii, t_star).ok().map(|f| f.nu_hat)
    });
    Ok(RunResult {
        outcome: report.outcome,
        nu_hat,
    })
}

fn simulate(cli: &Cli) -> Result<(), CliError> {
    let (kv, base) = load_config(cli)?;
    let sim = config::build(&kv, &base)?;
    let out = cli.global.out_dir();
    let result = run_into(&sim, &out)?;
    let t_star = result
        .outcome
        .t_star()
        .map(|t| format!(" t* = {t}"))
        .unwrap_or_default();
    cli.global.say(format!("{}{t_star} -> {}", result.outcome.name(), out.display()));
    Ok(())
}

fn dalembert_check(cli: &Cli, n: usize) -> Result<(), CliError> {
    let seed = cli.global.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = dalembert::channel_batch(&mut rng, n)?;
    if n == 0 {
        cli.global.say("0 cases (vacuous)");
        return Ok(());
    }
    cli.global.say(format!("cases {n} seed {seed} worst ratio {}", batch.worst_ratio));
    if batch.failures > 0 || batch.worst_ratio < 0.5 - dalembert::CHANNEL_SLACK {
        return Err(CliError::Channel(format!(
            "{} of {n} cases below 1/2 (worst {})",
            batch.failures, batch.worst_ratio
        )));
    }
    Ok(())
}

fn dalembert_evolve(cli: &Cli, input: &Path, t: f64) -> Result<(), CliError> {
    let start = manifest::now();
    let file = File::open(input)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?;
    let data = io::read_breakpoints(BufReader::new(file)).map_err(|e| CliError::Config(e.to_string()))?;
    if !t.is_finite() {
        return Err(CliError::Config("--t must be finite".into()));
    }
    let f = dalembert::build_f(&data).map_err(|e| CliError::Config(e.to_string()))?;
    let evolved = f.evolve(t);
    let out = cli.global.out_dir();
    write_with(&out.join("evolved.csv"), |w| io::write_breakpoints(w, &evolved))?;
    write_manifest(&out, &(&data, t), start, "evolved", &["evolved.csv".into()])?;
    cli.global.say(format!("{} breakpoints at t = {t}", evolved.nodes.len()));
    Ok(())
}

fn read_frames(dir: &Path) -> Result<Vec<FieldState>, CliError> {
    let dir = if dir.join("snapshots/times.csv").exists() {
        dir.join("snapshots")
    } else {
        dir.to_path_buf()
    };
    let index = fs::read_to_string(dir.join("times.csv"))
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.join("times.csv").display())))?;
    let mut frames = Vec::new();
    for line in index.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        let [_, t, name] = cells[..] else {
            return Err(CliError::Config(format!("bad times.csv row {line:?}")));
        };
        let t: f64 = t
            .parse()
            .map_err(|_| CliError::Config(format!("bad time {t:?}")))?;
        let file = File::open(dir.join(name))
            .map_err(|e| CliError::Config(format!("cannot read {name}: {e}")))?;
        frames.push(io::read_snapshot(BufReader::new(file), t).map_err(|e| CliError::Config(e.to_string()))?);
    }
    // One shared mesh so frame differences stay cheap.
    if let Some(first) = frames.first() {
        let mesh = first.mesh.clone();
        for f in frames.iter_mut() {
            if f.mesh.nodes() == mesh.nodes() {
                f.mesh = Arc::clone(&mesh);
            }
        }
    }
    Ok(frames)
}

fn analyze(cli: &Cli, args: &crate::AnalyzeArgs) -> Result<(), CliError> {
    let start = manifest::now();
    let frames = read_frames(&args.snapshots)?;
    let options = DiagnosticsOptions {
        nonlinear: !args.linear,
        g_radii: config::parse_list("--g-radii", &args.g_radii)?,
        ball_radii: config::parse_list("--ball-radii", &args.ball_radii)?,
    };
    let series: DiagnosticsSeries = analysis::diagnostics_series(&frames, None, &options)?;
    let out = cli.global.out_dir();
    write_with(&out.join("series.csv"), |w| io::write_series(w, &series))?;
    write_manifest(&out, &options, start, "analyzed", &["series.csv".into()])?;
    cli.global.say(format!("{} frames -> {}", series.rows.len(), out.join("series.csv").display()));
    Ok(())
}

fn parse_bubbles(list: &str) -> Result<Vec<(i8, f64)>, CliError> {
    list.split(',')
        .map(|item| {
            let bad = || CliError::Config(format!("bad bubble {item:?}; expected iota:lambda"));
            let (s, l) = item.trim().split_once(':').ok_or_else(bad)?;
            let iota: i8 = s.trim().parse().map_err(|_| bad())?;
            let lambda: f64 = l.trim().parse().map_err(|_| bad())?;
            if iota.abs() != 1 || !(lambda > 0.0) {
                return Err(bad());
            }
            Ok((iota, lambda))
        })
        .collect()
}

fn profiles_cmd(cli: &Cli, args: &crate::ProfilesArgs) -> Result<(), CliError> {
    let start = manifest::now();
    let out = cli.global.out_dir();
    let mut files = Vec::new();
    let snapshot = match (&args.snapshot, &args.synthetic) {
        (Some(path), None) => {
            let file = File::open(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            io::read_snapshot(BufReader::new(file), 0.0).map_err(|e| CliError::Config(e.to_string()))?
        }
        (None, Some(list)) => {
            let bubbles = parse_bubbles(list)?;
            let min = bubbles.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
            let max = bubbles.iter().map(|b| b.1).fold(0.0, f64::max);
            let mesh = Arc::new(profiles::multiscale_mesh(min, max).map_err(|e| CliError::Config(e.to_string()))?);
            let mut rng = ChaCha8Rng::seed_from_u64(cli.global.seed.unwrap_or(0));
            let snap = profiles::synthetic_snapshot(mesh, &bubbles, args.noise, &mut rng)?;
            write_with(&out.join("snapshot.csv"), |w| io::write_snapshot(w, &snap))?;
            files.push("snapshot.csv".to_string());
            snap
        }
        _ => return Err(CliError::Config("give exactly one of --snapshot or --synthetic".into())),
    };
    let cfg = ExtractConfig {
        max_profiles: args.max_profiles,
        correlation_floor: args.floor,
        separation_factor: args.separation,
        lambda_range: None,
    };
    let dec = profiles::extract(&snapshot, &cfg).map_err(|e| match e {
        critwave::Error::InvalidParameter(m) => CliError::Config(m),
        other => CliError::Runtime(other.to_string()),
    })?;
    let record = dec.record(&snapshot)?;
    write_with(&out.join("decomposition.json"), |w| io::write_json(w, &record))?;
    files.push("decomposition.json".into());
    write_manifest(&out, &(&cfg, &args.synthetic, cli.global.seed), start, "extracted", &files)?;
    for p in &record.profiles {
        cli.global.say(format!("iota {:+} lambda {} coefficient {}", p.iota, p.lambda, p.raw_coefficient));
    }
    Ok(())
}

fn sweep(cli: &Cli, args: &crate::SweepArgs) -> Result<(), CliError> {
    use rayon::prelude::*;
    let start = manifest::now();
    let (template, base) = load_config(cli)?;
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for g in &args.grid {
        let (k, vs) = g
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--grid {g:?}: expected key=v1,v2")))?;
        let values: Vec<String> = vs.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(CliError::Config(format!("--grid {g:?} has no values")));
        }
        axes.push((k.trim().to_string(), values));
    }
    let mut cells: Vec<Vec<String>> = vec![Vec::new()];
    for (_, values) in &axes {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    let out = cli.global.out_dir();
    let results: Vec<Result<RunResult, CliError>> = cells
        .par_iter()
        .enumerate()
        .map(|(k, values)| {
            let mut kv = template.clone();
            for ((key, _), v) in axes.iter().zip(values) {
                kv.insert(key.clone(), v.clone());
            }
            let sim = config::build(&kv, &base)?;
            run_into(&sim, &out.join(format!("cell_{k:03}")))
        })
        .collect();

    let mut text = String::from("cell");
    for (key, _) in &axes {
        text.push(',');
        text.push_str(key);
    }
    text.push_str(",outcome,t_star,nu_hat,error\n");
    let mut ok = 0;
    for (k, (values, result)) in cells.iter().zip(&results).enumerate() {
        text.push_str(&format!("{k},{}", values.join(",")));
        match result {
            Ok(r) => {
                ok += 1;
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                text.push_str(&format!(",{},{},{},\n", r.outcome.name(), opt(r.outcome.t_star()), opt(r.nu_hat)));
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                text.push_str(&format!(",failed,,,{msg}\n"));
            }
        }
    }
    fs::create_dir_all(&out)?;
    fs::write(out.join("aggregate.csv"), &text)?;
    write_manifest(&out, &(&template, &args.grid), start, &format!("{ok}/{} cells", cells.len()), &["aggregate.csv".into()])?;
    cli.global.say(format!("{ok}/{} cells succeeded -> {}", cells.len(), out.join("aggregate.csv").display()));
    if ok == 0 {
        return Err(CliError::Runtime("every sweep cell failed".into()));
    }
    Ok(())
}
