use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topicflow::pipeline::{execute, RunConfig, Target};

/// Topic flow networks from publication corpora.
#[derive(Parser, Debug)]
#[command(name = "topicflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and filter the corpus, write corpus_report.txt.
    Ingest(Flags),
    /// Build the tf-idf matrix and vocabulary.
    Vectorize(Flags),
    /// Fit the topic model (cached in <out>/model).
    FitTopics(Flags),
    /// Build the network and write tfn_edges.tsv.
    BuildTfn(Flags),
    /// PageRank over a year and/or topic slice.
    Pagerank {
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        year: Option<i32>,
        #[arg(long)]
        topic: Option<usize>,
    },
    /// Walktrap communities per year.
    Communities(Flags),
    /// Coreness per topic and year.
    Kcores(Flags),
    /// Intra- and intertopic flow matrices per year.
    Flows(Flags),
    /// ASP and ALC per year and topic.
    Metrics(Flags),
    /// Sankey documents of the strongest flows per year.
    ExportSankey(Flags),
    /// Every stage, plus manifest.json.
    Run(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    window: Option<u32>,
    #[arg(long)]
    top_l: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    english_threshold: Option<f64>,
    #[arg(long)]
    min_year: Option<i32>,
    #[arg(long)]
    max_year: Option<i32>,
    #[arg(long)]
    min_df: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    top_flows: Option<usize>,
    /// Keep papers without an abstract in the training matrix.
    #[arg(long)]
    allow_missing_abstract: bool,
}

impl Flags {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! apply {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$field = v; })*
            };
        }
        apply!(
            input => input, stopwords => stopwords, out => out, topics => n_topics,
            window => window, top_l => top_l, seed => seed,
            english_threshold => english_threshold, min_year => min_year,
            max_year => max_year, min_df => min_df, max_iter => max_iter,
            walk_length => walk_length, top_flows => top_flows
        );
        if self.allow_missing_abstract {
            cfg.require_abstract = false;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (flags, target) = match &cli.command {
        Command::Ingest(f) => (f, Target::Ingest),
        Command::Vectorize(f) => (f, Target::Vectorize),
        Command::FitTopics(f) => (f, Target::FitTopics),
        Command::BuildTfn(f) => (f, Target::BuildTfn),
        Command::Pagerank { flags, year, topic } => (
            flags,
            Target::PageRank {
                year: *year,
                topic: *topic,
            },
        ),
        Command::Communities(f) => (f, Target::Communities),
        Command::Kcores(f) => (f, Target::KCores),
        Command::Flows(f) => (f, Target::Flows),
        Command::Metrics(f) => (f, Target::Metrics),
        Command::ExportSankey(f) => (f, Target::ExportSankey),
        Command::Run(f) => (f, Target::Run),
    };
    let cfg = match flags.config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: [config] {e}");
            return ExitCode::from(1);
        }
    };
    match execute(&cfg, target) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage.exit_code() as u8)
        }
    }
}
