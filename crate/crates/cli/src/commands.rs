use std::path::{Path, PathBuf};

use fuselab_core::analysis::{bump_chart_csv, rank_models};
use fuselab_core::ingest::{
    input_label, load_manifest, panel_rows, parse_metrics_table, read_input, serialize_metrics_table,
    serialize_score_file, DatasetEntry, FusionSettings, LoadedManifest, RunManifest, StrategyChoice, WeightSource,
};
use fuselab_core::metrics::{curve_points, CurveKind};
use fuselab_core::model::{DatasetId, MetricKind, MetricsTable};
use fuselab_core::pipeline::{run_manifest, Run, RunOptions};
use fuselab_core::report::{canonical_json, render_json, render_markdown, Provenance, ReportBundle};
use fuselab_core::synth::{generate_panel, SynthSpec};
use fuselab_core::{Error, Result};
use serde_json::json;

use crate::{InputArgs, RunArgs, SynthArgs};

fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Invariant(e.to_string()))?;
    canonical_json(&v)
}

fn absolute(path: &Path) -> Result<PathBuf> {
    if path.is_absolute() {
        return Ok(path.to_path_buf());
    }
    let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
    Ok(cwd.join(path))
}

fn manifest_path(input: &InputArgs) -> Result<&Path> {
    input
        .manifest
        .as_deref()
        .ok_or_else(|| Error::Manifest("this command needs --manifest".into()))
}

fn run_options(args: &RunArgs, loaded: &LoadedManifest) -> Result<RunOptions> {
    let mut options = RunOptions::from_manifest(loaded);
    options.join_policy = args.input.join_policy;
    if let Some(s) = args.strategy {
        options.strategy = s;
    }
    if let Some(w) = &args.weights {
        options.weights = match w {
            WeightSource::File(p) => WeightSource::File(absolute(p)?),
            other => other.clone(),
        };
    }
    if let Some(t) = args.accuracy_threshold {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidThreshold(t));
        }
        options.accuracy_threshold = t;
    }
    Ok(options)
}

fn run(args: &RunArgs) -> Result<Run> {
    let loaded = load_manifest(manifest_path(&args.input)?)?;
    let options = run_options(args, &loaded)?;
    let run = run_manifest(&loaded, &options)?;
    for d in &run.datasets {
        if d.dropped > 0 {
            eprintln!(
                "{}: dropped {} samples missing from some score files",
                d.panel.dataset(),
                d.dropped
            );
        }
    }
    Ok(run)
}

/// Metrics either computed from the manifest or read back from a table.
fn metrics(args: &RunArgs) -> Result<(MetricsTable, Provenance)> {
    match &args.input.metrics_table {
        Some(path) => {
            let (text, input) = read_input(path, input_label(&absolute(path)?))?;
            let table = parse_metrics_table(&text).map_err(|e| Error::InFile {
                path: path.clone(),
                source: Box::new(e),
            })?;
            Ok((table, Provenance::new(None, vec![input])))
        }
        None => {
            let run = run(args)?;
            Ok((run.metrics, run.provenance))
        }
    }
}

pub fn validate(args: &InputArgs) -> Result<()> {
    if let Some(path) = &args.metrics_table {
        let (text, _) = read_input(path, input_label(path))?;
        let table = parse_metrics_table(&text)?;
        table.ensure_rectangular()?;
        println!(
            "ok: {} models x {} datasets",
            table.models().len(),
            table.datasets().len()
        );
        return Ok(());
    }
    let loaded = load_manifest(manifest_path(args)?)?;
    for ds in loaded.load_all(args.join_policy)? {
        let p = &ds.panel;
        println!(
            "ok: {}: {} models, {} samples ({} fake, {} real), {} dropped{}",
            p.dataset(),
            p.n_models(),
            p.n_samples(),
            p.n_fake(),
            p.n_samples() - p.n_fake(),
            ds.dropped,
            if ds.validation.is_some() {
                ", validation split present"
            } else {
                ""
            }
        );
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let dataset = DatasetId::new(&args.dataset)?;
    let mut spec = SynthSpec::new(args.n_pos, args.n_neg, args.target_auroc.clone(), args.rho, args.seed);
    spec.dataset = dataset.clone();
    let panel = generate_panel(&spec)?;
    let models = spec.model_ids();

    let mut scores = std::collections::BTreeMap::new();
    for (i, m) in models.iter().enumerate() {
        let rel = format!("{dataset}/{m}.csv");
        write(&args.out_dir.join(&rel), &serialize_score_file(&panel_rows(&panel, i)))?;
        scores.insert(m.clone(), PathBuf::from(rel));
    }

    let validation_spec = args.validation_seed.map(|seed| SynthSpec { seed, ..spec.clone() });
    let validation = match &validation_spec {
        Some(vspec) => {
            let vpanel = generate_panel(vspec)?;
            let mut files = std::collections::BTreeMap::new();
            for (i, m) in models.iter().enumerate() {
                let rel = format!("{dataset}/validation/{m}.csv");
                write(&args.out_dir.join(&rel), &serialize_score_file(&panel_rows(&vpanel, i)))?;
                files.insert(m.clone(), PathBuf::from(rel));
            }
            Some(files)
        }
        None => None,
    };
    write(
        &args.out_dir.join(format!("{dataset}/synth_spec.json")),
        &to_json(&json!({ "scores": spec, "validation": validation_spec }))?,
    )?;

    let entry = DatasetEntry {
        id: dataset.clone(),
        scores,
        validation,
    };
    let manifest_file = args.out_dir.join("manifest.json");
    let manifest = if args.append && manifest_file.exists() {
        let loaded = load_manifest(&manifest_file)?;
        let mut m = loaded.manifest;
        if m.models != models {
            return Err(Error::Manifest(format!(
                "cannot append: manifest has {} models, synthetic dataset has {}",
                m.models.len(),
                models.len()
            )));
        }
        if m.datasets.iter().any(|d| d.id == dataset) {
            return Err(Error::Manifest(format!("dataset `{dataset}` already in manifest")));
        }
        m.datasets.push(entry);
        m
    } else {
        let strategy = if args.validation_seed.is_some() {
            StrategyChoice::Both
        } else {
            StrategyChoice::Uniform
        };
        RunManifest {
            models,
            datasets: vec![entry],
            fusion: FusionSettings {
                strategy,
                ..FusionSettings::default()
            },
        }
    };
    manifest.validate()?;
    write(&manifest_file, &to_json(&manifest)?)?;
    println!(
        "wrote {} score files for `{dataset}` and {}",
        spec.target_auroc.len() * if args.validation_seed.is_some() { 2 } else { 1 },
        manifest_file.display()
    );
    Ok(())
}

pub fn fuse(args: &RunArgs) -> Result<()> {
    let run = run(args)?;
    let mut weights = serde_json::Map::new();
    for d in &run.datasets {
        let dataset = d.panel.dataset();
        for i in d.members.len()..d.panel.n_models() {
            let model = &d.panel.models()[i];
            let path = args.out_dir.join(format!("{dataset}/{model}.csv"));
            write(&path, &serialize_score_file(&panel_rows(&d.panel, i)))?;
            println!("wrote {}", path.display());
        }
        if let Some(w) = &d.weights {
            let per_model: serde_json::Map<String, serde_json::Value> = d
                .members
                .iter()
                .zip(w.as_slice())
                .map(|(m, v)| (m.to_string(), json!(v)))
                .collect();
            weights.insert(dataset.to_string(), serde_json::Value::Object(per_model));
        }
    }
    if !weights.is_empty() {
        write(
            &args.out_dir.join("weights.json"),
            &canonical_json(&serde_json::Value::Object(weights))?,
        )?;
    }
    Ok(())
}

fn print_table(table: &MetricsTable) {
    println!("{:<24} {:<16} {:>8} {:>8}", "model", "dataset", "auroc", "auprc");
    for (m, d, p) in table.iter() {
        println!(
            "{:<24} {:<16} {:>8.4} {:>8.4}",
            m.as_str(),
            d.as_str(),
            p.auroc,
            p.auprc
        );
    }
}

pub fn evaluate(args: &RunArgs) -> Result<()> {
    if args.input.metrics_table.is_some() {
        return Err(Error::Manifest(
            "evaluate computes metrics from scores; use --manifest".into(),
        ));
    }
    let run = run(args)?;
    write(
        &args.out_dir.join("metrics.csv"),
        &serialize_metrics_table(&run.metrics),
    )?;
    for d in &run.datasets {
        let dataset = d.panel.dataset();
        for (model, row) in d.panel.rows() {
            for kind in [CurveKind::Roc, CurveKind::Pr] {
                let curve = curve_points(d.panel.labels(), row, kind)?;
                let path = args
                    .out_dir
                    .join(format!("curves/{dataset}/{model}.{}.csv", kind.as_str()));
                write(&path, &curve.to_csv(model, dataset))?;
            }
        }
    }
    print_table(&run.metrics);
    Ok(())
}

fn write_rank_outputs(out_dir: &Path, bundle: &ReportBundle) -> Result<()> {
    write(&out_dir.join("ranks.json"), &to_json(&bundle.ranks)?)?;
    write(&out_dir.join("robustness.json"), &to_json(&bundle.robustness)?)?;
    write(
        &out_dir.join("bump_chart.csv"),
        &bump_chart_csv(&bundle.shifts, &bundle.datasets),
    )?;
    Ok(())
}

pub fn rank(args: &RunArgs) -> Result<()> {
    let (table, provenance) = metrics(args)?;
    let bundle = ReportBundle::build(table, provenance)?;
    write_rank_outputs(&args.out_dir, &bundle)?;
    print_ranks(&bundle.metrics)?;
    let never: Vec<&str> = bundle.robustness.never_worst.iter().map(|m| m.as_str()).collect();
    println!(
        "never worst: {}",
        if never.is_empty() {
            "(none)".to_string()
        } else {
            never.join(", ")
        }
    );
    Ok(())
}

fn print_ranks(table: &MetricsTable) -> Result<()> {
    for d in table.datasets() {
        for kind in MetricKind::ALL {
            let mut column = rank_models(table, d, kind)?;
            column.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            let line: Vec<String> = column.iter().map(|(m, r)| format!("{r}:{m}")).collect();
            println!("{d} {kind}: {}", line.join(" "));
        }
    }
    Ok(())
}

pub fn report(args: &RunArgs) -> Result<()> {
    let (table, provenance) = metrics(args)?;
    let bundle = ReportBundle::build(table, provenance)?;
    write(
        &args.out_dir.join("metrics.csv"),
        &serialize_metrics_table(&bundle.metrics),
    )?;
    write_rank_outputs(&args.out_dir, &bundle)?;
    write(&args.out_dir.join("report.json"), &render_json(&bundle)?)?;
    let md = render_markdown(&bundle);
    write(&args.out_dir.join("report.md"), &md)?;
    print!("{md}");
    Ok(())
}
