use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use lmsurf_core::analysis::{self, gain_vs_baseline};
use lmsurf_core::config::{Preset, RunConfig};
use lmsurf_core::geometry::serialize_pattern;
use lmsurf_core::medium::{self, tm_wave_parameters};
use lmsurf_core::pipeline::{self, Metrics};
use lmsurf_core::{Error, FieldMap};

use crate::manifest::{self, RunManifest};
use crate::{Axis, ScenarioArgs};

pub const FIELD_MAP: &str = "field.swf";
pub const FIELD_MAP_DB: &str = "field_db.swf";
pub const ISOLATION: &str = "isolation.txt";
pub const PATH_LOSS: &str = "path_loss.csv";
pub const PATTERN: &str = "pattern.txt";
pub const METRICS: &str = "metrics.json";
pub const MANIFEST: &str = "manifest.json";

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::runtime(format!("cannot write {}: {e}", path.display()))
    }

    fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::usage(format!("cannot read {}: {e}", path.display()))
    }

    /// Keeps the core error's usage/runtime classification.
    fn context(prefix: &str, e: &Error) -> Self {
        CliError {
            code: if e.is_usage() { 2 } else { 1 },
            message: format!("{prefix}{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::context("", &e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn load_config(args: &ScenarioArgs) -> CliResult<RunConfig> {
    let base = Preset::from(args.preset).config();
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path, base).map_err(|e| match e {
            Error::Io(io) => CliError::read(path, io),
            other => other.into(),
        })?,
        None => base,
    };
    if let Some(dx) = args.dx {
        cfg.set("dx", &dx.to_string())
            .map_err(|m| CliError::usage(format!("--dx: {m}")))?;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> lmsurf_core::Result<()>,
) -> CliResult {
    let file = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| CliError::write(path, e))?;
    w.flush().map_err(|e| CliError::write(path, e))
}

fn write_metrics(dir: &Path, metrics: &Metrics) -> CliResult {
    write_file(&dir.join(ISOLATION), |w| {
        w.write_all(metrics.isolation.to_key_value().as_bytes())?;
        Ok(())
    })?;
    write_file(&dir.join(PATH_LOSS), |w| metrics.path_loss.write_csv(w))
}

fn print_summary(metrics: &Metrics) {
    println!("isolation_db = {:.3}", metrics.isolation.isolation_db);
    println!("level_at_d_db = {:.3}", metrics.level_at_d_db);
}

pub fn design(args: &ScenarioArgs, freqs: &str, phi: Option<f64>, out: Option<&Path>) -> CliResult {
    let cfg = load_config(args)?;
    let surface = cfg.scenario.surface;
    let freqs = freqs
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::usage(format!("--freqs: `{s}` is not a number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;

    let mut table =
        String::from("f_hz,phi,eps_eff,delta_skin_m,x_s_ohm,n_eff,confinement_height_m\n");
    for f in freqs {
        let report = match phi {
            Some(phi) => medium::surface_impedance_with_porosity(&surface, f, phi)?,
            None => medium::surface_impedance(&surface, f)?,
        };
        let tm = tm_wave_parameters(&report);
        table.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            f,
            report.phi,
            report.eps_eff,
            report.delta_skin,
            report.x_s,
            tm.n_eff,
            tm.confinement_height
        ));
    }
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                create_dir(parent)?;
            }
            fs::write(path, table).map_err(|e| CliError::write(path, e))
        }
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

pub fn simulate(args: &ScenarioArgs, out: &Path) -> CliResult {
    let cfg = load_config(args)?;
    let started = Instant::now();
    let sim = pipeline::simulate(&cfg)?;
    let duration_s = started.elapsed().as_secs_f64();

    create_dir(out)?;
    let map = &sim.field_map;
    let db = analysis::to_db(map, analysis::REFERENCE_POINT)?;
    write_file(&out.join(FIELD_MAP), |w| map.write_to(w))?;
    write_file(&out.join(FIELD_MAP_DB), |w| db.write_to(w))?;
    write_metrics(out, &sim.metrics)?;
    write_file(&out.join(PATTERN), |w| {
        w.write_all(serialize_pattern(&sim.pattern).as_bytes())?;
        Ok(())
    })?;

    let mut outputs: Vec<String> = [
        FIELD_MAP,
        FIELD_MAP_DB,
        ISOLATION,
        PATH_LOSS,
        PATTERN,
        MANIFEST,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    outputs.sort();
    let record = RunManifest {
        config_path: args.config.as_ref().map(|p| p.display().to_string()),
        preset: Preset::from(args.preset).as_str(),
        parameters: &cfg,
        medium: &sim.medium,
        content_hash: cfg.content_hash(),
        steps: map.meta.steps,
        dt_s: map.meta.dt,
        duration_s,
        outputs,
        metrics: &sim.metrics,
    };
    let path = out.join(MANIFEST);
    manifest::write(&record, &path).map_err(|e| CliError::write(&path, e))?;
    print_summary(&sim.metrics);
    Ok(())
}

pub fn analyze(field_map: &Path, args: &ScenarioArgs, out: &Path) -> CliResult {
    let cfg = load_config(args)?;
    let file = File::open(field_map).map_err(|e| CliError::read(field_map, e))?;
    let map = FieldMap::read_from(BufReader::new(file)).map_err(|e| match e {
        Error::Io(io) => CliError::read(field_map, io),
        other => CliError::usage(format!("{}: {other}", field_map.display())),
    })?;
    let hash = cfg.content_hash();
    if !map.meta.scenario_hash.is_empty() && map.meta.scenario_hash != hash {
        eprintln!(
            "warning: {} was produced from different parameters (hash {}, expected {})",
            field_map.display(),
            map.meta.scenario_hash,
            hash
        );
    }
    let metrics = pipeline::analyze(&map, &cfg)?;
    create_dir(out)?;
    write_metrics(out, &metrics)?;
    let path = out.join(METRICS);
    let text = serde_json::to_string_pretty(&metrics).map_err(|e| CliError::write(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::write(&path, e))?;
    print_summary(&metrics);
    Ok(())
}

struct Row {
    value: String,
    isolation_db: f64,
    gain_at_d_db: f64,
    runtime_s: f64,
}

/// Guided metrics and the wall time of the guided run.
fn timed_metrics(cfg: &RunConfig) -> lmsurf_core::Result<(Metrics, f64)> {
    let started = Instant::now();
    let sim = pipeline::simulate(cfg)?;
    Ok((sim.metrics, started.elapsed().as_secs_f64()))
}

fn row(
    value: &str,
    cfg: &RunConfig,
    guided: &Metrics,
    runtime_s: f64,
    baseline: &Metrics,
) -> lmsurf_core::Result<Row> {
    Ok(Row {
        value: value.to_string(),
        isolation_db: guided.isolation.isolation_db,
        gain_at_d_db: gain_vs_baseline(&guided.path_loss, &baseline.path_loss, cfg.scenario.d)?,
        runtime_s,
    })
}

pub fn sweep(
    args: &ScenarioArgs,
    axis: Axis,
    values: &str,
    parallel: bool,
    csv: &Path,
) -> CliResult {
    let base = load_config(args)?;
    let mut points = Vec::new();
    for v in values.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mut cfg = base;
        cfg.set(axis.key(), v)
            .map_err(|m| CliError::usage(format!("--values: {}: {m}", axis.key())))?;
        points.push((v.to_string(), cfg));
    }
    if points.is_empty() {
        return Err(CliError::usage("--values lists no values"));
    }
    if let Some(parent) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let file = File::create(csv).map_err(|e| CliError::write(csv, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |line: String| -> CliResult {
        writeln!(w, "{line}")
            .and_then(|_| w.flush())
            .map_err(|e| CliError::write(csv, e))
    };
    emit(format!(
        "# value: {} in {}; isolation_db: interior minus exterior mean power; \
         gain_at_d_db: guided minus no-cavity smoothed centerline level at d; runtime_s: guided run",
        axis.key(),
        axis.unit()
    ))?;
    emit("value,isolation_db,gain_at_d_db,runtime_s".to_string())?;
    let format_row = |r: &Row| {
        format!(
            "{},{:?},{:?},{:?}",
            r.value, r.isolation_db, r.gain_at_d_db, r.runtime_s
        )
    };
    let abort =
        |value: &str, e: &CliError| format!("# aborted at {}={value}: {}", axis.key(), e.message);

    // Baselines depend only on the non-cavity parameters; share them.
    let mut baseline_keys = Vec::new();
    let mut baseline_cfgs = Vec::new();
    for (_, cfg) in &points {
        let b = cfg.baseline();
        let key = b.content_hash();
        if !baseline_keys.contains(&key) {
            baseline_keys.push(key);
            baseline_cfgs.push(b);
        }
    }

    let mut failure: Option<CliError> = None;
    if parallel {
        let baselines: Vec<_> = baseline_cfgs.par_iter().map(timed_metrics).collect();
        let guided: Vec<_> = points
            .par_iter()
            .map(|(_, cfg)| timed_metrics(cfg))
            .collect();
        let by_key: HashMap<&String, &lmsurf_core::Result<(Metrics, f64)>> =
            baseline_keys.iter().zip(&baselines).collect();
        for ((value, cfg), g) in points.iter().zip(guided) {
            let b = by_key[&cfg.baseline().content_hash()];
            let result = match (g, b) {
                (Ok((g, t)), Ok((b, _))) => row(value, cfg, &g, t, b).map_err(CliError::from),
                (Err(e), _) => Err(e.into()),
                (_, Err(e)) => Err(CliError::context("baseline run: ", e)),
            };
            match result {
                Ok(r) => emit(format_row(&r))?,
                Err(e) => {
                    emit(abort(value, &e))?;
                    failure.get_or_insert(e);
                }
            }
        }
    } else {
        let mut cache: HashMap<String, Metrics> = HashMap::new();
        for (value, cfg) in &points {
            let result = (|| -> CliResult<Row> {
                let b = cfg.baseline();
                let key = b.content_hash();
                if !cache.contains_key(&key) {
                    let (m, _) =
                        timed_metrics(&b).map_err(|e| CliError::context("baseline run: ", &e))?;
                    cache.insert(key.clone(), m);
                }
                let (g, t) = timed_metrics(cfg)?;
                Ok(row(value, cfg, &g, t, &cache[&key])?)
            })();
            match result {
                Ok(r) => emit(format_row(&r))?,
                Err(e) => {
                    emit(abort(value, &e))?;
                    failure = Some(e);
                    break;
                }
            }
        }
    }
    match failure {
        None => {
            println!("wrote {}", csv.display());
            Ok(())
        }
        Some(e) => Err(CliError {
            code: e.code,
            message: format!(
                "sweep aborted, partial results in {}: {}",
                csv.display(),
                e.message
            ),
        }),
    }
}
