//! Command-line front end. Exit codes: 0 success, 2 input error, 3 endpoint error.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use qe_bias::biasstats::Alternative;
use qe_bias::corpus::{load_dataset_with_report, write_native, Condition, Gender, Schema};
use qe_bias::downstream::{gt_filter, retention_curve, threshold_grid, GtPair, NbestRecord};
use qe_bias::report::{
    emit, gt_filter_markdown, pareto_candidates, pareto_points, run_audit, run_qad, AuditConfig, AuditError,
    AuditReport, Format,
};
use qe_bias::scoring::wire::{serve_scorer, serve_translator, ServeOptions};
use qe_bias::scoring::{
    open_scorer, parse_mock_translator, ContextStrategy, EndpointOptions, MockScorer, ScaleDescriptor, ScoreCache,
    StrategyKind,
};

#[derive(Parser)]
#[command(name = "qe-bias", version, about = "Audit MT quality-estimation scorers for gender bias")]
struct Cli {
    /// Seconds of scorer silence tolerated while responses are outstanding.
    #[arg(long, global = true, default_value_t = 60)]
    scorer_timeout_secs: u64,
    /// Times unanswered requests are re-sent after a timeout.
    #[arg(long, global = true, default_value_t = 0)]
    retries: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a contrastive corpus and report ratios, error rates and Φ per cell.
    Audit(AuditArgs),
    /// Load and validate a corpus, printing minimal-edit diagnostics.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "native")]
        schema: Schema,
        /// Also write the validated instances as native JSONL.
        #[arg(long)]
        write_native: Option<PathBuf>,
    },
    /// Retention curves of feminine and masculine scores over a threshold grid.
    FilterSim {
        #[arg(long, default_value = "0:1:0.01")]
        threshold_grid: String,
        /// CSV with `group,score` columns (group F or M).
        #[arg(long, conflicts_with_all = ["dataset", "scorer"])]
        scores: Option<PathBuf>,
        #[arg(long, requires = "scorer")]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "native")]
        schema: Schema,
        #[arg(long, requires = "dataset")]
        scorer: Option<String>,
        #[arg(long)]
        scale: Option<ScaleDescriptor>,
        #[arg(long, default_value = "structured")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-stage counterfactual filter over JSONL translation pairs.
    GtFilter {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value = "structured")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerank N-best lists by QE score and report δ_M of the chosen outputs.
    Qad {
        #[arg(long)]
        nbest: PathBuf,
        #[arg(long)]
        scorer: String,
        #[arg(long)]
        scale: Option<ScaleDescriptor>,
        /// Lowercase tokens before matching gendered words.
        #[arg(long)]
        fold_case: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pareto frontier of error rate vs. parity gap across metrics.
    Pareto {
        /// CSV with `metric_name,er_total,gap` columns.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Structured audit reports to take points from.
        #[arg(long = "report")]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve a mock scorer over stdin/stdout.
    #[command(hide = true)]
    MockScorer {
        #[arg(long, default_value = "hash")]
        kind: String,
        #[arg(long)]
        reverse_idle_ms: Option<u64>,
        #[arg(long = "drop-id")]
        drop_ids: Vec<String>,
    },
    /// Serve a mock translator over stdin/stdout.
    #[command(hide = true)]
    MockTranslator {
        #[arg(long, default_value = "identity")]
        kind: String,
    },
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "native")]
    schema: Schema,
    /// Conditions to audit (repeatable); all by default.
    #[arg(long)]
    condition: Vec<Condition>,
    #[arg(long)]
    scorer: String,
    /// `min:max:higher|lower`; defaults to the scale the scorer declares.
    #[arg(long)]
    scale: Option<ScaleDescriptor>,
    #[arg(long, default_value = "none")]
    strategy: StrategyKind,
    #[arg(long, default_value = " ")]
    separator: String,
    #[arg(long)]
    translator: Option<String>,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "two-sided")]
    alternative: Alternative,
    /// Also compute a retention curve over this `start:stop:step` grid.
    #[arg(long)]
    threshold_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "structured")]
    format: Format,
}

enum Failure {
    Input(String),
    Endpoint(String),
}

impl From<AuditError> for Failure {
    fn from(e: AuditError) -> Self {
        if e.is_endpoint_failure() {
            Failure::Endpoint(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(input(&path.display().to_string())),
        None => io::stdout().write_all(bytes).map_err(input("stdout")),
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    let file = File::open(path).map_err(input(&path.display().to_string()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(input(&path.display().to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Failure::Input(format!("{}:{}: {e}", path.display(), n + 1)))?);
    }
    Ok(out)
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    let endpoint = EndpointOptions { timeout: Duration::from_secs(cli.scorer_timeout_secs), retries: cli.retries };
    match cli.command {
        Command::Audit(a) => {
            let mut config = AuditConfig::new(a.dataset, a.schema, a.scorer);
            config.conditions = a.condition;
            config.scale = a.scale;
            config.strategy = ContextStrategy::new(a.strategy).with_separator(a.separator);
            config.translator = a.translator;
            config.resamples = a.bootstrap;
            config.seed = a.seed;
            config.alternative = a.alternative;
            config.endpoint = endpoint;
            config.retention_grid =
                a.threshold_grid.as_deref().map(threshold_grid).transpose().map_err(input("threshold grid"))?;
            let report = run_audit(&config)?;
            write_out(a.out.as_deref(), &emit(&report, a.format))
        }
        Command::Validate { dataset, schema, write_native: native } => {
            let loaded = load_dataset_with_report(&dataset, schema).map_err(input(&dataset.display().to_string()))?;
            let mut counts: BTreeMap<Condition, usize> = BTreeMap::new();
            for inst in &loaded.instances {
                *counts.entry(inst.condition).or_default() += 1;
            }
            let mut out = format!("{} instances valid\n", loaded.instances.len());
            for (c, n) in counts {
                out.push_str(&format!("  {c}: {n}\n"));
            }
            for d in &loaded.diagnostics {
                out.push_str(&format!("line {}: {} ({}, diff ratio {:.2})\n", d.line, d.message, d.id, d.diff_ratio));
            }
            if let Some(path) = native {
                let file = File::create(&path).map_err(input(&path.display().to_string()))?;
                write_native(&loaded.instances, io::BufWriter::new(file)).map_err(input(&path.display().to_string()))?;
            }
            write_out(None, out.as_bytes())
        }
        Command::FilterSim { threshold_grid: grid, scores, dataset, schema, scorer, scale, format, out } => {
            let grid = threshold_grid(&grid).map_err(input("threshold grid"))?;
            let curve = match (scores, dataset, scorer) {
                (Some(path), _, _) => {
                    let mut by_group: BTreeMap<Gender, Vec<f64>> = BTreeMap::new();
                    let mut rdr = csv::Reader::from_path(&path).map_err(input(&path.display().to_string()))?;
                    for row in rdr.deserialize::<(String, f64)>() {
                        let (group, score) = row.map_err(input(&path.display().to_string()))?;
                        let g = match group.as_str() {
                            "F" | "f" => Gender::F,
                            "M" | "m" => Gender::M,
                            other => return Err(Failure::Input(format!("unknown group `{other}`"))),
                        };
                        by_group.entry(g).or_default().push(score);
                    }
                    retention_curve(&by_group, &grid).map_err(input("retention"))?
                }
                (None, Some(dataset), Some(scorer)) => {
                    let mut config = AuditConfig::new(dataset, schema, scorer);
                    config.conditions = vec![Condition::AmbiguousFm];
                    config.scale = scale;
                    config.endpoint = endpoint;
                    config.retention_grid = Some(grid);
                    run_audit(&config)?.retention.expect("grid was set")
                }
                _ => return Err(Failure::Input("filter-sim needs --scores or --dataset with --scorer".into())),
            };
            let bytes = match format {
                Format::CsvTables => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["threshold", "retained_f", "retained_m", "gap"]).expect("in-memory csv");
                    let (f, m) = (&curve.retained_fraction_by_group[&Gender::F], &curve.retained_fraction_by_group[&Gender::M]);
                    for i in 0..curve.thresholds.len() {
                        w.write_record([curve.thresholds[i], f[i], m[i], curve.gap[i]].map(|v| v.to_string()))
                            .expect("in-memory csv");
                    }
                    w.into_inner().expect("in-memory csv")
                }
                _ => json_bytes(&curve),
            };
            write_out(out.as_deref(), &bytes)
        }
        Command::GtFilter { pairs, format, out } => {
            let pairs: Vec<GtPair> = read_jsonl(&pairs)?;
            let (retained, stats) = gt_filter(&pairs);
            let bytes = match format {
                Format::MarkdownTables => gt_filter_markdown(&stats).into_bytes(),
                _ => json_bytes(&serde_json::json!({ "stats": stats, "retained": retained })),
            };
            write_out(out.as_deref(), &bytes)
        }
        Command::Qad { nbest, scorer, scale, fold_case, out } => {
            let records: Vec<NbestRecord> = read_jsonl(&nbest)?;
            let mut endpoint = open_scorer(&scorer, endpoint).map_err(|e| Failure::Endpoint(e.to_string()))?;
            let mut cache = ScoreCache::from_env().map_err(input("score cache"))?;
            let report = run_qad(records, endpoint.as_mut(), &mut cache, scale, fold_case)?;
            write_out(out.as_deref(), &json_bytes(&report))
        }
        Command::Pareto { points, reports, out } => {
            let mut all: Vec<(String, f64, f64)> = Vec::new();
            if let Some(path) = points {
                let mut rdr = csv::Reader::from_path(&path).map_err(input(&path.display().to_string()))?;
                for row in rdr.deserialize::<(String, f64, f64)>() {
                    all.push(row.map_err(input(&path.display().to_string()))?);
                }
            }
            for path in reports {
                let text = fs::read_to_string(&path).map_err(input(&path.display().to_string()))?;
                let report = AuditReport::from_json(&text).map_err(input(&path.display().to_string()))?;
                all.extend(pareto_candidates(&report));
            }
            if let Some((name, _, gap)) = all.iter().find(|p| p.2 < 0.0) {
                return Err(Failure::Input(format!("negative gap {gap} for {name}")));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["metric_name", "er_total", "gap", "on_frontier"]).expect("in-memory csv");
            for p in pareto_points(&all) {
                w.write_record([p.metric_name, p.er_total.to_string(), p.gap.to_string(), p.on_frontier.to_string()])
                    .expect("in-memory csv");
            }
            write_out(out.as_deref(), &w.into_inner().expect("in-memory csv"))
        }
        Command::MockScorer { kind, reverse_idle_ms, drop_ids } => {
            let mock: MockScorer = kind.parse().map_err(input("mock kind"))?;
            let options = ServeOptions {
                reverse_after_idle: reverse_idle_ms.map(Duration::from_millis),
                drop_ids: drop_ids.into_iter().collect::<HashSet<_>>(),
            };
            serve_scorer(&mock, io::stdin(), io::stdout().lock(), &options).map_err(input("serving"))?;
            Ok(())
        }
        Command::MockTranslator { kind } => {
            let translator = parse_mock_translator(&kind).map_err(input("mock kind"))?;
            serve_translator(&translator, io::stdin().lock(), io::stdout().lock()).map_err(input("serving"))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Endpoint(msg)) => {
            eprintln!("endpoint error: {msg}");
            ExitCode::from(3)
        }
    }
}
