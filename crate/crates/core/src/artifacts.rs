//! Experiment runs on disk.
//!
//! Layout under the output root:
//!
//! ```text
//! config.toml                      effective config (overrides applied)
//! summary.json                     per-policy aggregates
//! policies.csv                     one row per (policy, seed)
//! dsc_table.txt, dsc_table.csv     segmentation corpora only
//! datasets/seed-<s>.json           with `export_dataset`
//! runs/<policy>/seed-<s>/
//!     log.jsonl                    header line, then one record per iteration
//!     scoring.jsonl                header line, then one record per scoring pass
//!     run.json                     per-run summary
//!     model.json                   segmentation corpora only
//!     histogram.csv, top_selected.csv, share_series.csv
//! ```
//!
//! Derived files (CSVs, tables, summaries) are always rendered from what is on
//! disk, so `report` reproduces them byte for byte. An `INCOMPLETE` file in the
//! root marks a run that has not finished or has failed.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{parse_config, ConfigError, CorpusConfig, ExperimentConfig};
use crate::dataset::{write_dataset, DatasetError, DatasetFile};
use crate::error::Error;
use crate::report::{
    csv_document, emit_selection_report, mean_std, render_dsc_table, DscCell, PolicyDsc,
};
use crate::scheduler::{
    run_scripted, run_segmentation_on, IterationRecord, PhasePlan, Policy, RunResult,
};
use crate::testbed::{generate_held_out, generate_scripted_corpus, generate_segmentation_corpus};

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_ROOT_ENV: &str = "RUCB_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "rucb-output";
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Scripted corpus, one policy.
    Simulate,
    /// Segmentation corpus, one policy.
    TrainToy,
    /// Either corpus, all four policies.
    Compare,
    /// Re-render derived files from an existing output root.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::TrainToy => "train-toy",
            Command::Compare => "compare",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub policy: Option<Policy>,
    pub export_dataset: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

type Result<T, E = ArtifactError> = std::result::Result<T, E>;

/// `--out` beats the config's `output_dir`, which beats the environment default.
pub fn resolve_output_dir(
    cli: Option<&Path>,
    config: Option<&ExperimentConfig>,
    env: Option<OsString>,
) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = config.and_then(|c| c.output_dir.as_deref()) {
        return PathBuf::from(p);
    }
    match env {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUTPUT_ROOT),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema_version: u32,
    pub policy: Policy,
    pub seed: u64,
    pub num_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub policy: Policy,
    pub seed: u64,
    pub num_samples: usize,
    pub total_iterations: u64,
    pub resets: usize,
    pub corrupted: Vec<bool>,
    pub corrupted_share_per_phase: Vec<f64>,
    pub boot_corrupted_share: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsc: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub resets: usize,
    pub boot_corrupted_share: f64,
    pub corrupted_share_per_phase: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_dsc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: Policy,
    pub runs: Vec<RunSummary>,
    pub mean_boot_corrupted_share: f64,
    pub mean_corrupted_share_per_phase: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_dsc: Option<f64>,
    /// AVG row of the DSC table, in percent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsc_avg: Option<DscCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub corpus: String,
    pub num_samples: usize,
    pub total_iterations: u64,
    pub policies: Vec<PolicySummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output_dir: PathBuf,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl ToString) -> ArtifactError {
    ArtifactError::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

fn write_jsonl<H: Serialize, R: Serialize>(path: &Path, header: &H, records: &[R]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut line = |v: String| writeln!(w, "{v}").map_err(io_err(path));
    line(serde_json::to_string(header).expect("header serializes"))?;
    for r in records {
        line(serde_json::to_string(r).expect("record serializes"))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a JSONL file written by this module: one header line, then records.
pub fn read_jsonl<H: DeserializeOwned, R: DeserializeOwned>(path: &Path) -> Result<(H, Vec<R>)> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty file"))?
        .map_err(io_err(path))?;
    let header = serde_json::from_str(&first).map_err(|e| parse_err(path, e))?;
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line)
                .map_err(|e| parse_err(path, format!("line {}: {e}", n + 2)))?,
        );
    }
    Ok((header, records))
}

pub fn run_dir(root: &Path, policy: Policy, seed: u64) -> PathBuf {
    root.join("runs")
        .join(policy.key())
        .join(format!("seed-{seed}"))
}

fn class_names(num_classes: usize) -> Vec<String> {
    (1..num_classes).map(|c| format!("organ {c}")).collect()
}

/// Runs `command`. `config` is required for everything except [`Command::Report`],
/// which reads `config.toml` from the output root.
pub fn run_command(
    command: Command,
    config: Option<&ExperimentConfig>,
    opts: &RunOptions,
) -> Result<Outcome> {
    let root = &opts.output_dir;
    if command == Command::Report {
        let mut outcome = render_outputs(root)?;
        if root.join(INCOMPLETE_MARKER).exists() {
            outcome.warnings.insert(
                0,
                format!("{} is marked {INCOMPLETE_MARKER}", root.display()),
            );
        }
        return Ok(outcome);
    }
    let config = config
        .ok_or_else(|| ArtifactError::Usage(format!("`{}` needs a config", command.name())))?;
    let config = effective_config(command, config, opts)?;

    fs::create_dir_all(root).map_err(io_err(root))?;
    let marker = root.join(INCOMPLETE_MARKER);
    write_text(
        &marker,
        &format!(
            "`{}` started; outputs in this directory are partial\n",
            command.name()
        ),
    )?;
    let result = execute(command, &config, opts).and_then(|()| render_outputs(root));
    match &result {
        Ok(_) => fs::remove_file(&marker).map_err(io_err(&marker))?,
        Err(e) => {
            // best effort: the original error is what gets reported
            let _ = write_text(&marker, &format!("`{}` failed: {e}\n", command.name()));
        }
    }
    result
}

fn effective_config(
    command: Command,
    config: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ExperimentConfig> {
    let mut config = config.clone();
    if let Some(seed) = opts.seed {
        config.seeds = vec![seed];
    }
    match (command, opts.policy) {
        (Command::Compare, Some(_)) => {
            return Err(ArtifactError::Usage(
                "`compare` runs every policy; drop the policy override".into(),
            ))
        }
        (_, Some(p)) => config.plan.policy = p,
        _ => {}
    }
    match (command, config.corpus()) {
        (Command::Simulate, Some(CorpusConfig::Segmentation(_))) => {
            return Err(ArtifactError::Usage(
                "`simulate` needs a [scripted] corpus; use `train-toy` for [segmentation]".into(),
            ))
        }
        (Command::TrainToy, Some(CorpusConfig::Scripted(_))) => {
            return Err(ArtifactError::Usage(
                "`train-toy` needs a [segmentation] corpus; use `simulate` for [scripted]".into(),
            ))
        }
        _ => {}
    }
    let errors = config.check();
    if !errors.is_empty() {
        return Err(ConfigError::Invalid(errors).into());
    }
    Ok(config)
}

fn execute(command: Command, config: &ExperimentConfig, opts: &RunOptions) -> Result<()> {
    let root = &opts.output_dir;
    write_text(&root.join("config.toml"), &config.to_toml_string())?;
    let policies: Vec<Policy> = if command == Command::Compare {
        Policy::ALL.to_vec()
    } else {
        vec![config.plan.policy]
    };
    let corpus = config.corpus().expect("validated config has a corpus");
    for &seed in &config.seeds {
        match corpus {
            CorpusConfig::Scripted(spec) => {
                let data = generate_scripted_corpus(spec, seed)?;
                if opts.export_dataset {
                    export(root, &DatasetFile::scripted(seed, data.clone()))?;
                }
                for &policy in &policies {
                    let plan = PhasePlan {
                        policy,
                        ..config.plan
                    };
                    write_run(root, &run_scripted(&plan, &data, seed)?)?;
                }
            }
            CorpusConfig::Segmentation(spec) => {
                let slices = generate_segmentation_corpus(spec, seed)?;
                let held_out = generate_held_out(spec, seed)?;
                if opts.export_dataset {
                    export(
                        root,
                        &DatasetFile::segmentation(seed, slices.clone(), held_out.clone()),
                    )?;
                }
                for &policy in &policies {
                    let plan = PhasePlan {
                        policy,
                        ..config.plan
                    };
                    write_run(
                        root,
                        &run_segmentation_on(&plan, spec, &slices, &held_out, seed)?,
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn export(root: &Path, file: &DatasetFile) -> Result<()> {
    let dir = root.join("datasets");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_dataset(&dir.join(format!("seed-{}.json", file.seed)), file)?;
    Ok(())
}

/// Writes the primary per-run files: logs, run summary and model.
pub fn write_run(root: &Path, run: &RunResult) -> Result<PathBuf> {
    let dir = run_dir(root, run.policy, run.seed);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let num_samples = run.corrupted.len();
    let header = LogHeader {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        policy: run.policy,
        seed: run.seed,
        num_samples,
    };
    write_jsonl(&dir.join("log.jsonl"), &header, &run.trace.log)?;
    write_jsonl(&dir.join("scoring.jsonl"), &header, &run.trace.scoring)?;
    let manifest = RunManifest {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        policy: run.policy,
        seed: run.seed,
        num_samples,
        total_iterations: run.trace.log.len() as u64,
        resets: run.trace.resets,
        corrupted: run.corrupted.clone(),
        corrupted_share_per_phase: run.corrupted_share_per_phase.clone(),
        boot_corrupted_share: run.boot_corrupted_share,
        dsc: run.dsc.clone(),
    };
    write_json(&dir.join("run.json"), &manifest)?;
    if let Some(model) = &run.model {
        write_json(&dir.join("model.json"), model)?;
    }
    Ok(dir)
}

/// Renders the per-run selection CSVs from `log.jsonl` and `run.json`.
fn render_run(dir: &Path) -> Result<(RunManifest, Vec<String>)> {
    let manifest: RunManifest = read_json(&dir.join("run.json"))?;
    let log_path = dir.join("log.jsonl");
    let (header, log): (LogHeader, Vec<IterationRecord>) = read_jsonl(&log_path)?;
    if header.schema_version != ARTIFACT_SCHEMA_VERSION
        || (header.policy, header.seed, header.num_samples)
            != (manifest.policy, manifest.seed, manifest.num_samples)
    {
        return Err(parse_err(&log_path, "header does not match run.json"));
    }
    let report = emit_selection_report(&log, manifest.num_samples, Some(&manifest.corrupted))
        .map_err(|e| parse_err(&log_path, e))?;
    write_text(
        &dir.join("histogram.csv"),
        &report.histogram_csv(Some(&manifest.corrupted)),
    )?;
    write_text(&dir.join("top_selected.csv"), &report.top_csv())?;
    if let Some(csv) = report.share_csv() {
        write_text(&dir.join("share_series.csv"), &csv)?;
    }
    let warnings = report
        .warnings
        .into_iter()
        .map(|w| format!("{}: {w}", dir.display()))
        .collect();
    Ok((manifest, warnings))
}

fn sorted_seed_dirs(policy_dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut seeds = Vec::new();
    for entry in fs::read_dir(policy_dir).map_err(io_err(policy_dir))? {
        let entry = entry.map_err(io_err(policy_dir))?;
        let name = entry.file_name();
        let seed = name
            .to_str()
            .and_then(|n| n.strip_prefix("seed-"))
            .and_then(|s| s.parse::<u64>().ok());
        if let Some(seed) = seed {
            seeds.push((seed, entry.path()));
        }
    }
    seeds.sort();
    Ok(seeds)
}

/// Re-renders every derived file under `root` from the logs and run summaries.
pub fn render_outputs(root: &Path) -> Result<Outcome> {
    let config = parse_config(root.join("config.toml"))?;
    let corpus = match config.corpus() {
        Some(CorpusConfig::Scripted(_)) => "scripted",
        Some(CorpusConfig::Segmentation(_)) => "segmentation",
        None => unreachable!("parsed config is validated"),
    };
    let mut warnings = Vec::new();

    let mut per_policy: Vec<(Policy, Vec<RunManifest>)> = Vec::new();
    for policy in Policy::ALL {
        let dir = root.join("runs").join(policy.key());
        if !dir.is_dir() {
            continue;
        }
        let mut manifests = Vec::new();
        for (_, seed_dir) in sorted_seed_dirs(&dir)? {
            let (m, w) = render_run(&seed_dir)?;
            manifests.push(m);
            warnings.extend(w);
        }
        if !manifests.is_empty() {
            per_policy.push((policy, manifests));
        }
    }
    if per_policy.is_empty() {
        return Err(ArtifactError::Usage(format!(
            "no runs found under {}",
            root.join("runs").display()
        )));
    }
    let first = &per_policy[0].1[0];
    let (num_samples, total_iterations) = (first.num_samples, first.total_iterations);

    let mut policy_rows = Vec::new();
    let mut summaries = Vec::new();
    let mut dsc_inputs = Vec::new();
    let mut num_classes = None;
    for (policy, manifests) in &per_policy {
        let runs: Vec<RunSummary> = manifests
            .iter()
            .map(|m| RunSummary {
                seed: m.seed,
                resets: m.resets,
                boot_corrupted_share: m.boot_corrupted_share,
                corrupted_share_per_phase: m.corrupted_share_per_phase.clone(),
                mean_dsc: m.dsc.as_ref().map(|d| mean_std(d).0),
            })
            .collect();
        for r in &runs {
            policy_rows.push(vec![
                policy.key().to_string(),
                r.seed.to_string(),
                r.resets.to_string(),
                r.boot_corrupted_share.to_string(),
                r.mean_dsc.map(|d| d.to_string()).unwrap_or_default(),
            ]);
        }
        let phases = runs
            .iter()
            .map(|r| r.corrupted_share_per_phase.len())
            .max()
            .unwrap_or(0);
        let mean_per_phase = (0..phases)
            .map(|p| {
                let v: Vec<f64> = runs
                    .iter()
                    .filter_map(|r| r.corrupted_share_per_phase.get(p).copied())
                    .collect();
                mean_std(&v).0
            })
            .collect();
        let shares: Vec<f64> = runs.iter().map(|r| r.boot_corrupted_share).collect();
        let dsc: Option<Vec<&Vec<f64>>> = manifests.iter().map(|m| m.dsc.as_ref()).collect();
        let mut mean_dsc = None;
        if let Some(dsc) = dsc {
            let classes = dsc[0].len();
            if dsc.iter().any(|d| d.len() != classes) || num_classes.is_some_and(|c| c != classes) {
                return Err(parse_err(
                    root,
                    "runs disagree on the number of organ classes",
                ));
            }
            num_classes = Some(classes);
            let per_class = (0..classes)
                .map(|c| dsc.iter().map(|d| d[c]).collect())
                .collect();
            dsc_inputs.push(PolicyDsc {
                policy: *policy,
                per_class,
            });
            let means: Vec<f64> = runs.iter().filter_map(|r| r.mean_dsc).collect();
            mean_dsc = Some(mean_std(&means).0);
        }
        summaries.push(PolicySummary {
            policy: *policy,
            runs,
            mean_boot_corrupted_share: mean_std(&shares).0,
            mean_corrupted_share_per_phase: mean_per_phase,
            mean_dsc,
            dsc_avg: None,
        });
    }

    if let Some(classes) = num_classes.filter(|_| dsc_inputs.len() == per_policy.len()) {
        let table = render_dsc_table(&dsc_inputs, &class_names(classes + 1))?;
        for (s, avg) in summaries.iter_mut().zip(&table.avg) {
            s.dsc_avg = Some(*avg);
        }
        write_text(&root.join("dsc_table.txt"), &table.to_text())?;
        write_text(&root.join("dsc_table.csv"), &table.to_csv())?;
    }
    write_text(
        &root.join("policies.csv"),
        &csv_document(
            &[
                "policy",
                "seed",
                "resets",
                "boot_corrupted_share",
                "mean_dsc",
            ],
            &policy_rows,
        ),
    )?;
    let summary = Summary {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        corpus: corpus.to_string(),
        num_samples,
        total_iterations,
        policies: summaries,
    };
    write_json(&root.join("summary.json"), &summary)?;
    Ok(Outcome {
        output_dir: root.to_path_buf(),
        summary,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    const SMALL: &str = "seeds = [1, 2]\n[plan]\ninitial_iters = 60\nnum_boot_phases = 2\nt_per_phase = 50\n[scripted]\nsize = 20\ncorruption_rate = 0.1\n";

    fn opts(dir: &Path) -> RunOptions {
        RunOptions {
            output_dir: dir.to_path_buf(),
            ..RunOptions::default()
        }
    }

    #[test]
    fn output_dir_precedence() {
        let cfg = parse_config_str("output_dir = \"from-config\"\n[scripted]\nsize = 5\n").unwrap();
        let env = Some(OsString::from("from-env"));
        assert_eq!(
            resolve_output_dir(Some(Path::new("cli")), Some(&cfg), env.clone()),
            PathBuf::from("cli")
        );
        assert_eq!(
            resolve_output_dir(None, Some(&cfg), env.clone()),
            PathBuf::from("from-config")
        );
        assert_eq!(
            resolve_output_dir(None, None, env),
            PathBuf::from("from-env")
        );
        assert_eq!(
            resolve_output_dir(None, None, Some(OsString::new())),
            PathBuf::from(DEFAULT_OUTPUT_ROOT)
        );
    }

    #[test]
    fn simulate_writes_layout() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config_str(SMALL).unwrap();
        let out = run_command(Command::Simulate, Some(&cfg), &opts(tmp.path())).unwrap();
        assert_eq!(out.summary.policies.len(), 1);
        assert_eq!(out.summary.policies[0].runs.len(), 2);
        assert_eq!(out.summary.total_iterations, 160);
        let run = run_dir(tmp.path(), Policy::Rucb, 2);
        for f in [
            "log.jsonl",
            "scoring.jsonl",
            "run.json",
            "histogram.csv",
            "top_selected.csv",
            "share_series.csv",
        ] {
            assert!(run.join(f).is_file(), "{f}");
        }
        assert!(!tmp.path().join(INCOMPLETE_MARKER).exists());
        assert!(!tmp.path().join("dsc_table.txt").exists());
        let (header, log): (LogHeader, Vec<IterationRecord>) =
            read_jsonl(&run.join("log.jsonl")).unwrap();
        assert_eq!(header.num_samples, 20);
        assert_eq!(log.len(), 160);
        for f in ["histogram.csv", "top_selected.csv", "share_series.csv"] {
            assert!(fs::read_to_string(run.join(f))
                .unwrap()
                .starts_with("# schema_version=1\n"));
        }
    }

    #[test]
    fn overrides_and_usage_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config_str(SMALL).unwrap();
        let o = RunOptions {
            seed: Some(9),
            policy: Some(Policy::Ucb),
            ..opts(tmp.path())
        };
        let out = run_command(Command::Simulate, Some(&cfg), &o).unwrap();
        assert_eq!(out.summary.policies[0].policy, Policy::Ucb);
        assert_eq!(out.summary.policies[0].runs[0].seed, 9);
        let saved = parse_config(tmp.path().join("config.toml")).unwrap();
        assert_eq!(saved.seeds, vec![9]);

        let o = RunOptions {
            policy: Some(Policy::Ucb),
            ..opts(tmp.path())
        };
        assert!(matches!(
            run_command(Command::Compare, Some(&cfg), &o),
            Err(ArtifactError::Usage(_))
        ));
        assert!(matches!(
            run_command(Command::TrainToy, Some(&cfg), &opts(tmp.path())),
            Err(ArtifactError::Usage(_))
        ));
        assert!(matches!(
            run_command(Command::Simulate, None, &opts(tmp.path())),
            Err(ArtifactError::Usage(_))
        ));
    }

    #[test]
    fn report_on_empty_root_fails() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(run_command(Command::Report, None, &opts(tmp.path())).is_err());
    }

    #[test]
    fn failure_leaves_marker() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config_str(SMALL).unwrap();
        // a file where the runs directory should go
        fs::write(tmp.path().join("runs"), "").unwrap();
        assert!(run_command(Command::Simulate, Some(&cfg), &opts(tmp.path())).is_err());
        let marker = fs::read_to_string(tmp.path().join(INCOMPLETE_MARKER)).unwrap();
        assert!(marker.contains("failed"));
    }

    #[test]
    fn truncated_log_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config_str(SMALL).unwrap();
        run_command(Command::Simulate, Some(&cfg), &opts(tmp.path())).unwrap();
        let log = run_dir(tmp.path(), Policy::Rucb, 1).join("log.jsonl");
        let text = fs::read_to_string(&log).unwrap();
        fs::write(&log, &text[..text.len() - 10]).unwrap();
        let err = run_command(Command::Report, None, &opts(tmp.path())).unwrap_err();
        assert!(err.to_string().contains("log.jsonl"), "{err}");
    }
}
