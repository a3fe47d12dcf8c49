use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use survey_core::corpus::{leave_one_out, load_dataset_dir};
use survey_core::harness::synthetic::{self, SyntheticSpec};
use survey_core::harness::{
    classify_only_table, emit_report, median, overhead_report, run_standard_rig, RigConfig,
};
use survey_core::survey::SessionLog;
use survey_core::{
    ClassifierConfig, Corpus, DatasetFormat, Oracle, StopRule, SurveyConfig, SurveySession,
};
use survey_service::{AppState, DEFAULT_PORT, PORT_ENV};

/// Active-learning survey of self-admitted technical debt comments.
#[derive(Debug, Parser)]
#[command(name = "satd-survey", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Classifier {
    Svm,
    Ensemble,
}

#[derive(Debug, clap::Args)]
struct DataArgs {
    /// Directory of per-project comment CSV files.
    #[arg(long, env = "SATD_DATA_DIR")]
    data: PathBuf,
    /// `named` (projectname, classification, commenttext) or
    /// `columns:P,C,T` with zero-based column indices.
    #[arg(long, default_value = "named")]
    format: DatasetFormat,
}

impl DataArgs {
    fn load(&self) -> Result<Vec<Corpus>> {
        load_dataset_dir(&self.data, self.format)
            .with_context(|| format!("loading {}", self.data.display()))
    }
}

#[derive(Debug, clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "svm")]
    classifier: Classifier,
    /// Ensemble size; one tree per training project when omitted.
    #[arg(long)]
    trees: Option<usize>,
    /// `target@0.9`, `target@0.95`, `ros:10` or `cormack:12`.
    #[arg(long, default_value = "target@0.9")]
    stop: StopRule,
    /// Comments per batch.
    #[arg(long, default_value_t = 100)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum document frequency for vocabulary terms.
    #[arg(long, default_value_t = 1)]
    min_df: usize,
}

impl ModelArgs {
    fn classifier(&self, projects: usize) -> ClassifierConfig {
        match self.classifier {
            Classifier::Svm => ClassifierConfig::svm(),
            Classifier::Ensemble => {
                ClassifierConfig::ensemble(self.trees.unwrap_or(projects.saturating_sub(1).max(1)))
            }
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print comment and SATD counts per project.
    Load {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Leave-one-project-out simulation over every project, repeated.
    Rig {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Comma-separated subset of projects to survey.
        #[arg(long, value_delimiter = ',')]
        projects: Option<Vec<String>>,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
        /// Reading time per comment, for the overhead line.
        #[arg(long, default_value_t = 10.3)]
        seconds_per_comment: f64,
    },
    /// Cross-project recall of a tree ensemble without surveying.
    Classify {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
    },
    /// One simulated session on a project, answered from its labels.
    Simulate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        project: String,
        /// Write the session log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Serve the HTTP API on localhost.
    Serve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Where session logs are kept; sessions found here are restored.
        #[arg(long, default_value = "survey-state")]
        state_dir: PathBuf,
    },
    /// Write a synthetic dataset for trying things out.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        projects: usize,
        #[arg(long, default_value_t = 500)]
        size: usize,
        #[arg(long, default_value_t = 0.06)]
        prevalence: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(data: &DataArgs) -> Result<()> {
    let corpora = data.load()?;
    println!("project,comments,satd");
    for c in &corpora {
        println!("{},{},{}", c.name, c.len(), c.positives());
    }
    let total: usize = corpora.iter().map(Corpus::len).sum();
    let satd: usize = corpora.iter().map(Corpus::positives).sum();
    println!("total,{total},{satd}");
    Ok(())
}

fn rig(
    data: &DataArgs,
    model: &ModelArgs,
    repeats: usize,
    projects: Option<Vec<String>>,
    out: &Path,
    seconds_per_comment: f64,
) -> Result<()> {
    let corpora = data.load()?;
    let config = RigConfig {
        classifier: model.classifier(corpora.len()),
        stop: model.stop,
        repeats,
        batch_size: model.batch,
        master_seed: model.seed,
        min_df: model.min_df,
        projects,
    };
    let result = run_standard_rig(&corpora, &config)?;
    let written = emit_report(&result, out)?;
    println!("project,recall_median,recall_iqr,cost_median,cost_iqr");
    for p in result.by_project() {
        let s = p.summary;
        println!(
            "{},{:.1},{:.1},{:.1},{:.1}",
            p.project, s.recall_median, s.recall_iqr, s.cost_median, s.cost_iqr
        );
    }
    if let Some(o) = result.overall() {
        println!(
            "MEDIAN,{:.1},{:.1},{:.1},{:.1}",
            o.recall_median, o.recall_iqr, o.cost_median, o.cost_iqr
        );
    }
    let overhead = overhead_report(&result, seconds_per_comment)?;
    println!(
        "overhead: {:.3} s per batch of {}, {:.2}% of reading time",
        overhead.mean_iteration_seconds, overhead.batch_size, overhead.overhead_percent
    );
    println!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn classify(data: &DataArgs, seed: u64, min_df: usize) -> Result<()> {
    let corpora = data.load()?;
    let table = classify_only_table(&corpora, seed, min_df)?;
    println!("project,recall");
    for (p, r) in &table {
        println!("{p},{r:.1}");
    }
    let recalls: Vec<f64> = table.iter().map(|r| r.1).collect();
    if let Some(m) = median(&recalls) {
        println!("MEDIAN,{m:.1}");
    }
    Ok(())
}

fn simulate(data: &DataArgs, model: &ModelArgs, project: &str, log: Option<&Path>) -> Result<()> {
    let corpora = data.load()?;
    let (train, test) = leave_one_out(&corpora, project)?;
    let test = Arc::new(test);
    let config = SurveyConfig {
        batch_size: model.batch,
        classifier: model.classifier(corpora.len()),
        stop: model.stop,
        seed: model.seed,
        min_df: model.min_df,
    };
    let mut session = SurveySession::new(test.clone(), &train, config)?;
    session.track_recall()?;
    if let Some(path) = log {
        let meta = serde_json::json!({ "project": project, "config": config }).to_string();
        session.attach_log(SessionLog::create(path, &meta)?);
    }
    let oracle = Oracle::simulated(&test)?;
    println!("batch,reads,found,estimate,recall,cost,stop");
    while session.status() == survey_core::SessionStatus::Active {
        let batch = session.next_batch()?;
        let r = session.submit_labels(&oracle.answer_all(&batch.ids())?)?;
        println!(
            "{},{},{},{},{:.1},{:.1},{}",
            r.iteration,
            r.reads,
            r.found,
            r.estimate.total_positives,
            r.recall.unwrap_or(f64::NAN),
            r.cost,
            r.decision.stop
        );
    }
    println!(
        "{}: {} after reading {} of {} comments, found {} of {}",
        project,
        session.status().as_str(),
        session.curve().reads(),
        test.len(),
        session.curve().found(),
        test.positives()
    );
    Ok(())
}

fn serve(data: &DataArgs, port: u16, state_dir: PathBuf) -> Result<()> {
    if !data.data.is_dir() {
        bail!("data directory {} does not exist", data.data.display());
    }
    let state = Arc::new(AppState::new(
        data.data.clone(),
        data.format,
        Some(state_dir),
    ));
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(survey_service::serve(state, addr))?;
    Ok(())
}

fn synth(out: &Path, projects: usize, size: usize, prevalence: f64, seed: u64) -> Result<()> {
    if projects < 2 || size == 0 || !(prevalence > 0.0 && prevalence < 1.0) {
        bail!("need at least two projects, a positive size and a prevalence in (0, 1)");
    }
    let corpora = synthetic::generate(&SyntheticSpec {
        projects,
        comments_per_project: size,
        prevalence,
        seed,
        ..Default::default()
    });
    let written = synthetic::write_dataset(&corpora, out)?;
    println!("wrote {} project files to {}", written.len(), out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Load { data } => load(&data),
        Command::Rig {
            data,
            model,
            repeats,
            projects,
            out,
            seconds_per_comment,
        } => rig(&data, &model, repeats, projects, &out, seconds_per_comment),
        Command::Classify { data, seed, min_df } => classify(&data, seed, min_df),
        Command::Simulate {
            data,
            model,
            project,
            log,
        } => simulate(&data, &model, &project, log.as_deref()),
        Command::Serve {
            data,
            port,
            state_dir,
        } => serve(&data, port, state_dir),
        Command::Synth {
            out,
            projects,
            size,
            prevalence,
            seed,
        } => synth(&out, projects, size, prevalence, seed),
    }
}
