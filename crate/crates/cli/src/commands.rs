use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use sunshade::classifiers::{parse_method_list, train, ClassifierSpec, Method, TrainedModel};
use sunshade::evaluation::{
    self, balance_classes, compute_metrics, cross_scene_eval, importance_on_pattern, report, run_ablation, run_cv,
    task_seed, with_jobs, CvOptions, FoldPattern,
};
use sunshade::features::{apply_mask, labels_of, read_feature_csv, write_feature_csv, FeatureRow, FeatureSetMask};
use sunshade::nmea::{parse_log, write_observations_csv};
use sunshade::pipeline::{label_counts, rows_from_scene, rows_from_sources, sun_fraction, LabelOptions};
use sunshade::scenesim::{builtin_scene, simulate, SceneConfig};
use sunshade::groundtruth::SunShade;

use crate::manifest::{FileRecord, RunManifest};
use crate::{
    AblateArgs, Cli, Command, CrossSceneArgs, EvaluateArgs, FeaturizeArgs, ImportanceArgs, ModelArgs, ParseArgs,
    PredictArgs, SimulateArgs, TrainArgs,
};

/// What a command read and wrote, for the manifest.
struct Outcome {
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Parse(_) => "parse",
        Command::Featurize(_) => "featurize",
        Command::Train(_) => "train",
        Command::Predict(_) => "predict",
        Command::Evaluate(_) => "evaluate",
        Command::Ablate(_) => "ablate",
        Command::Importance(_) => "importance",
        Command::CrossScene(_) => "cross-scene",
        Command::Replay(_) => "replay",
    }
}

pub fn run(cli: Cli, args: Vec<String>) -> Result<()> {
    if let Command::Replay(r) = &cli.command {
        return replay(&r.manifest, cli.jobs);
    }
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let started = Instant::now();
    let out = cli.out.clone();
    let outcome = with_jobs(cli.jobs, || execute(&cli.command, &out))?;
    let elapsed = started.elapsed().as_secs_f64() * 1000.0;
    let records = |paths: &[PathBuf]| paths.iter().map(|p| FileRecord::of(p)).collect::<Result<Vec<_>>>();
    let manifest = RunManifest {
        tool: "sunshade".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command_name(&cli.command).into(),
        args,
        working_dir: std::env::current_dir()?,
        out_dir: cli.out.clone(),
        seed: outcome.seed,
        config: outcome.config,
        inputs: records(&outcome.inputs)?,
        outputs: records(&outcome.outputs)?,
        timings_ms: BTreeMap::from([("total".to_string(), elapsed)]),
    };
    let path = manifest.save()?;
    println!("manifest: {}", path.display());
    Ok(())
}

fn execute(command: &Command, out: &Path) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Parse(a) => cmd_parse(a, out),
        Command::Featurize(a) => cmd_featurize(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Ablate(a) => cmd_ablate(a, out),
        Command::Importance(a) => cmd_importance(a, out),
        Command::CrossScene(a) => cmd_cross_scene(a, out),
        Command::Replay(_) => unreachable!("handled by run"),
    }
}

fn replay(manifest_path: &Path, jobs: usize) -> Result<()> {
    let recorded = RunManifest::load(manifest_path)?;
    std::env::set_current_dir(&recorded.working_dir)
        .with_context(|| format!("entering {}", recorded.working_dir.display()))?;
    let argv = std::iter::once("sunshade".to_string()).chain(recorded.args.iter().cloned());
    let mut cli = <Cli as clap::Parser>::try_parse_from(argv).context("recorded arguments no longer parse")?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("a replay manifest cannot be replayed");
    }
    cli.out = recorded.out_dir.clone();
    if jobs != 0 {
        cli.jobs = jobs;
    }
    run(cli, recorded.args.clone())?;
    let mut differing = 0;
    for rec in &recorded.outputs {
        let now = FileRecord::of(&rec.path)?;
        let same = now.sha256 == rec.sha256;
        println!("{} {}", if same { "identical" } else { "DIFFERS  " }, rec.path.display());
        differing += usize::from(!same);
    }
    if differing > 0 {
        bail!("{differing} of {} outputs differ from the manifest", recorded.outputs.len());
    }
    Ok(())
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Writes `{stem}.json`, `{stem}.txt` and `{stem}.csv` and echoes the text.
fn write_report<T: Serialize>(
    out: &Path,
    stem: &str,
    value: &T,
    text: &str,
    csv: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>,
) -> Result<Vec<PathBuf>> {
    print!("{text}");
    let mut csv_bytes = Vec::new();
    csv(&mut csv_bytes)?;
    Ok(vec![
        write(out.join(format!("{stem}.json")), serde_json::to_string_pretty(value)? + "\n")?,
        write(out.join(format!("{stem}.txt")), text)?,
        write(out.join(format!("{stem}.csv")), csv_bytes)?,
    ])
}

fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_feature_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    if rows.is_empty() {
        bail!("{}: no feature rows", path.display());
    }
    Ok(rows)
}

fn parse_mask(s: &str) -> Result<FeatureSetMask> {
    Ok(s.parse()?)
}

fn spec_for(method: Method, seed: u64, raw: bool) -> ClassifierSpec {
    let mut spec = ClassifierSpec::new(method).with_seed(seed);
    spec.standardize = !raw;
    spec
}

fn model_spec(m: &ModelArgs) -> Result<ClassifierSpec> {
    Ok(spec_for(m.method.parse()?, m.seed, m.raw))
}

fn balance_line(rows: &[FeatureRow]) -> String {
    let counts = label_counts(rows);
    format!(
        "{} rows: {} sun, {} shade (sun fraction {:.3})",
        rows.len(),
        counts.get(&SunShade::Sun).unwrap_or(&0),
        counts.get(&SunShade::Shade).unwrap_or(&0),
        sun_fraction(rows)
    )
}

fn load_scene(scene: &str) -> Result<(SceneConfig, Option<PathBuf>)> {
    let path = Path::new(scene);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {scene}"))?;
        let cfg = SceneConfig::from_json(&text).with_context(|| format!("scene config {scene}"))?;
        return Ok((cfg, Some(path.to_path_buf())));
    }
    match builtin_scene(scene) {
        Some(cfg) => Ok((cfg, None)),
        None => bail!("unknown scene {scene:?}: not a file and not one of default-a, default-b"),
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &Path) -> Result<Outcome> {
    let (mut cfg, source) = load_scene(&a.scene)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(t) = a.threshold {
        cfg.shade_threshold = t;
    }
    let scene = simulate(&cfg)?;
    let files = scene.write_to_dir(out)?;
    let config_path = write(
        out.join(format!("{}_config.json", cfg.name)),
        serde_json::to_string_pretty(&cfg)? + "\n",
    )?;
    let rows = rows_from_scene(
        &scene,
        &LabelOptions {
            threshold: cfg.shade_threshold,
            ..LabelOptions::default()
        },
    )?
    .rows;
    let sun_minutes = scene.truth.minutes.iter().filter(|m| m.label == SunShade::Sun).count();
    println!(
        "scene {}: {} days, {} minutes ({} sun, {} shade), {} satellites",
        cfg.name,
        scene.days.len(),
        scene.truth.minutes.len(),
        sun_minutes,
        scene.truth.minutes.len() - sun_minutes,
        cfg.n_satellites
    );
    println!("feature {}", balance_line(&rows));
    let mut outputs = files.nmea.clone();
    outputs.extend(files.uv.iter().cloned());
    outputs.push(files.truth.clone());
    outputs.push(config_path);
    Ok(Outcome {
        seed: Some(cfg.seed),
        config: json!({ "scene": a.scene, "resolved": cfg }),
        inputs: source.into_iter().collect(),
        outputs,
    })
}

fn cmd_parse(a: &ParseArgs, out: &Path) -> Result<Outcome> {
    let mut observations = Vec::new();
    let mut stats = Vec::new();
    for path in &a.nmea {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let log = parse_log(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
        println!(
            "{}: {} lines, {} GSV, {} RMC, {} checksum failures, {} malformed, {} observations, {} fixes",
            path.display(),
            log.stats.lines,
            log.stats.gsv_sentences,
            log.stats.rmc_sentences,
            log.stats.checksum_failures,
            log.stats.malformed,
            log.observations.len(),
            log.fixes.len()
        );
        stats.push(json!({ "path": path, "stats": log.stats }));
        observations.extend(log.observations);
    }
    let mut bytes = Vec::new();
    write_observations_csv(&mut bytes, &observations)?;
    let csv_path = write(out.join("observations.csv"), bytes)?;
    let stats_path = write(out.join("parse_stats.json"), serde_json::to_string_pretty(&stats)? + "\n")?;
    Ok(Outcome {
        seed: None,
        config: json!({}),
        inputs: a.nmea.clone(),
        outputs: vec![csv_path, stats_path],
    })
}

fn cmd_featurize(a: &FeaturizeArgs, out: &Path) -> Result<Outcome> {
    if a.uv.is_empty() {
        bail!("ground truth required: pass the UV logs with --uv");
    }
    let mut nmea = Vec::new();
    for p in &a.nmea {
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        nmea.push((p.display().to_string(), BufReader::new(f)));
    }
    let mut uv = Vec::new();
    for p in &a.uv {
        let f = File::open(p).with_context(|| format!("ground truth required: cannot open {}", p.display()))?;
        uv.push((p.display().to_string(), BufReader::new(f)));
    }
    let options = LabelOptions {
        threshold: a.threshold,
        clock_offset: chrono::Duration::seconds(a.clock_offset),
    };
    let output = rows_from_sources(nmea, uv, &options)?;
    let mut bytes = Vec::new();
    write_feature_csv(&mut bytes, &output.rows)?;
    let csv_path = write(out.join(&a.file_name), bytes)?;
    let stats_path = write(
        out.join("featurize_stats.json"),
        serde_json::to_string_pretty(&output.stats)? + "\n",
    )?;
    println!("{}", balance_line(&output.rows));
    println!(
        "{} observations, {} minute aggregates, {} dropped at session edges or without labels",
        output.stats.observations, output.stats.aggregates, output.stats.dropped_aggregates
    );
    let mut inputs = a.nmea.clone();
    inputs.extend(a.uv.iter().cloned());
    Ok(Outcome {
        seed: None,
        config: json!({ "threshold": a.threshold, "clock_offset_seconds": a.clock_offset }),
        inputs,
        outputs: vec![csv_path, stats_path],
    })
}

fn cmd_train(a: &TrainArgs, out: &Path) -> Result<Outcome> {
    let rows = read_features(&a.features)?;
    let mask = parse_mask(&a.mask)?;
    let spec = model_spec(&a.model)?;
    let training = balance_classes(&rows, task_seed(a.model.seed, "balance/train"))?;
    let (x, names) = apply_mask(&training, mask);
    let model = train(&spec, &x, &labels_of(&training))?.with_features(Some(mask), names);
    let predicted = model.predict(&x)?;
    let fit = compute_metrics(&predicted, &labels_of(&training))?;
    println!(
        "{} on mask {}: {} balanced training rows, training accuracy {:.4}",
        spec.method.display_name(),
        mask.code(),
        training.len(),
        fit.accuracy
    );
    if model.convergence_warning {
        eprintln!("warning: solver stopped at its iteration cap");
    }
    let path = write(out.join("model.json"), model.to_json() + "\n")?;
    Ok(Outcome {
        seed: Some(a.model.seed),
        config: json!({ "method": spec.method, "mask": mask, "standardize": spec.standardize }),
        inputs: vec![a.features.clone()],
        outputs: vec![path],
    })
}

#[derive(Serialize)]
struct Prediction {
    minute_utc: String,
    talker: String,
    svid: u16,
    decision: f64,
    predicted: SunShade,
    label: SunShade,
}

fn cmd_predict(a: &PredictArgs, out: &Path) -> Result<Outcome> {
    let text = fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let model = TrainedModel::from_json(&text)?;
    let rows = read_features(&a.features)?;
    let mask = model.mask.unwrap_or(FeatureSetMask::ALL);
    let (x, names) = apply_mask(&rows, mask);
    if !model.feature_names.is_empty() && names != model.feature_names {
        bail!("model expects columns {:?}", model.feature_names);
    }
    let decisions = model.decision_values(&x)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut predicted = Vec::with_capacity(rows.len());
    for (r, d) in rows.iter().zip(&decisions) {
        let p = sunshade::classifiers::label_of(*d);
        predicted.push(p);
        w.serialize(Prediction {
            minute_utc: r.minute.to_string(),
            talker: r.sat.talker.to_string(),
            svid: r.sat.svid,
            decision: *d,
            predicted: p,
            label: r.label,
        })?;
    }
    let metrics = compute_metrics(&predicted, &labels_of(&rows))?;
    println!(
        "{} rows, accuracy {:.4}, precision {:.4}, recall {:.4}, f1 {:.4}",
        rows.len(),
        metrics.accuracy,
        metrics.precision,
        metrics.recall,
        metrics.f1
    );
    let csv_path = write(out.join("predictions.csv"), w.into_inner().context("flushing predictions")?)?;
    let metrics_path = write(out.join("predict_metrics.json"), serde_json::to_string_pretty(&metrics)? + "\n")?;
    Ok(Outcome {
        seed: None,
        config: json!({ "method": model.spec.method, "mask": mask }),
        inputs: vec![a.model.clone(), a.features.clone()],
        outputs: vec![csv_path, metrics_path],
    })
}

fn warn_convergence(results: &[evaluation::MethodResult]) {
    for r in results {
        for p in &r.per_pattern {
            if p.convergence_warning {
                eprintln!(
                    "warning: {} ({}) on {} stopped at its iteration cap",
                    r.method.display_name(),
                    r.mask.code(),
                    p.pattern
                );
            }
        }
    }
}

fn cmd_evaluate(a: &EvaluateArgs, out: &Path) -> Result<Outcome> {
    let rows = read_features(&a.features)?;
    let mask = parse_mask(&a.mask)?;
    let methods = parse_method_list(&a.methods)?;
    let specs: Vec<ClassifierSpec> = methods.iter().map(|m| spec_for(*m, a.seed, a.raw)).collect();
    let patterns = FoldPattern::from_rows(&rows)?;
    let options = CvOptions {
        seed: a.seed,
        minute_vote: a.minute_vote,
    };
    let result = run_cv(&rows, &patterns, &specs, mask, &options)?;
    warn_convergence(&result.methods);
    let mut text = report::cv_table(&result);
    if let Some(t) = report::minute_vote_table(&result) {
        text.push('\n');
        text.push_str(&t);
    }
    let outputs = write_report(out, "evaluate", &result, &text, |w| report::write_cv_csv(w, &result))?;
    Ok(Outcome {
        seed: Some(a.seed),
        config: json!({ "methods": methods, "mask": mask, "standardize": !a.raw, "minute_vote": a.minute_vote }),
        inputs: vec![a.features.clone()],
        outputs,
    })
}

fn cmd_ablate(a: &AblateArgs, out: &Path) -> Result<Outcome> {
    let rows = read_features(&a.features)?;
    let spec = model_spec(&a.model)?;
    let patterns = FoldPattern::from_rows(&rows)?;
    let options = CvOptions {
        seed: a.model.seed,
        minute_vote: false,
    };
    let result = run_ablation(&rows, &patterns, &spec, &options)?;
    warn_convergence(&result.masks);
    let text = report::ablation_table(&result);
    let outputs = write_report(out, "ablation", &result, &text, |w| report::write_ablation_csv(w, &result))?;
    Ok(Outcome {
        seed: Some(a.model.seed),
        config: json!({ "method": spec.method, "standardize": spec.standardize }),
        inputs: vec![a.features.clone()],
        outputs,
    })
}

fn cmd_importance(a: &ImportanceArgs, out: &Path) -> Result<Outcome> {
    let rows = read_features(&a.features)?;
    let spec = model_spec(&a.model)?;
    let days = evaluation::days_of(&rows);
    let test_day = match a.test_day {
        Some(d) => d,
        None => *days.last().expect("rows are not empty"),
    };
    if !days.contains(&test_day) {
        bail!("no rows on test day {test_day}");
    }
    let pattern = FoldPattern {
        name: "holdout".into(),
        training_days: days.iter().filter(|d| **d != test_day).copied().collect(),
        test_day,
    };
    if pattern.training_days.is_empty() {
        bail!("importance needs at least 2 days of rows");
    }
    let result = importance_on_pattern(&rows, &pattern, &spec, a.repeats, a.model.seed)?;
    let text = report::importance_table(&result);
    let outputs = write_report(out, "importance", &result, &text, |w| report::write_importance_csv(w, &result))?;
    Ok(Outcome {
        seed: Some(a.model.seed),
        config: json!({ "method": spec.method, "repeats": a.repeats, "test_day": test_day, "standardize": spec.standardize }),
        inputs: vec![a.features.clone()],
        outputs,
    })
}

fn cmd_cross_scene(a: &CrossSceneArgs, out: &Path) -> Result<Outcome> {
    let train_rows = read_features(&a.train)?;
    let test_rows = read_features(&a.test)?;
    let mask = parse_mask(&a.mask)?;
    let spec = model_spec(&a.model)?;
    let result = cross_scene_eval(&train_rows, &test_rows, &spec, mask, a.model.seed)?;
    let text = report::cross_scene_table(&result);
    let outputs = write_report(out, "cross_scene", &result, &text, |w| report::write_cross_scene_csv(w, &result))?;
    Ok(Outcome {
        seed: Some(a.model.seed),
        config: json!({ "method": spec.method, "mask": mask, "standardize": spec.standardize }),
        inputs: vec![a.train.clone(), a.test.clone()],
        outputs,
    })
}
