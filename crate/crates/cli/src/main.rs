use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tpm::classify::{evaluate_classification, SplitSpec};
use tpm::graph::{example_graph, Graph, LabeledDataset, NodeIdMap};
use tpm::ingest::{load_citation_dataset, load_edge_list, load_pubmed_diabetes, write_edge_list};
use tpm::linkpred::{
    cross_network_generalization, evaluate_link_prediction_detailed, write_link_scores,
    LinkEvalConfig, LinkOperator, LinkSampleSpec,
};
use tpm::model::ClassifierSpec;
use tpm::oracle::{compare, exact_tpm_with_budget, DEFAULT_BUDGET};
use tpm::report::EvalReport;
use tpm::seed::derive_seed;
use tpm::sweep::{sweep, sweep_csv, write_sweep_csv, SweepParam};
use tpm::synth::{generate_ba, generate_er, generate_planted, BaSpec, PlantedPartitionSpec};
use tpm::tpm::{build_tpm, embed_all};
use tpm::walk::WalkConfig;
use tpm::TpmError;

#[derive(Parser)]
#[command(name = "tpm", version, about = "Anonymous-walk TPM node embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed every node and write the embedding CSV.
    Embed {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Node classification over repeated stratified splits.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        clf: ClassifierArgs,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Link prediction on one graph.
    Linkpred {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        links: LinkArgs,
        #[command(flatten)]
        clf: ClassifierArgs,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Dump every scored test pair as CSV.
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a link predictor on some graphs and test it on others.
    Crossnet {
        /// Training edge lists.
        #[arg(long = "train-edges", num_args = 1..)]
        train_edges: Vec<PathBuf>,
        /// Test edge lists.
        #[arg(long = "test-edges", num_args = 1..)]
        test_edges: Vec<PathBuf>,
        /// Generate train and test graphs instead, e.g. `ba:1000,6`.
        #[arg(long)]
        generate: Option<GenSpec>,
        #[arg(long, default_value_t = 10)]
        train_count: usize,
        #[arg(long, default_value_t = 2)]
        test_count: usize,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        links: LinkArgs,
        #[command(flatten)]
        clf: ClassifierArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic graph as an edge list.
    Generate {
        /// `ba:n,alpha`, `er:n,p` or `planted:communities,size,p_in,p_out`.
        #[arg(long)]
        generate: GenSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// For planted graphs, write `node label` lines usable as `--content`.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Classification scores across walk counts or walk lengths.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        clf: ClassifierArgs,
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare sampled matrices with exact enumeration.
    OracleCheck {
        /// Edge list; the built-in five-node graph when absent.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Node name; every node when absent.
        #[arg(long)]
        node: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        eta: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Whitespace-separated edge list.
    #[arg(long, conflicts_with_all = ["content", "generate"])]
    edges: Option<PathBuf>,
    /// Treat `--edges` as directed; reversed pairs are merged.
    #[arg(long, requires = "edges")]
    directed: bool,
    /// Node file: `id [features...] label` per line.
    #[arg(long, requires = "cites", conflicts_with = "generate")]
    content: Option<PathBuf>,
    /// Citation file: `cited citing` per line.
    #[arg(long, requires = "content")]
    cites: Option<PathBuf>,
    /// Read `--content`/`--cites` in the Pubmed-Diabetes tab layout.
    #[arg(long, requires = "content")]
    pubmed: bool,
    /// `ba:n,alpha`, `er:n,p` or `planted:communities,size,p_in,p_out`.
    #[arg(long)]
    generate: Option<GenSpec>,
}

#[derive(Args)]
struct WalkArgs {
    /// Walks per node.
    #[arg(long, default_value_t = 20)]
    eta: usize,
    /// Walk length.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl WalkArgs {
    fn config(&self) -> Result<WalkConfig> {
        Ok(WalkConfig::new(self.eta, self.m, self.seed)?)
    }
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long, default_value_t = 0.1)]
    test_frac: f64,
    #[arg(long, value_enum, default_value_t = OperatorArg::Hadamard)]
    operator: OperatorArg,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, value_enum, default_value_t = ClassifierArg::Logistic)]
    classifier: ClassifierArg,
    /// Override the classifier's epoch count.
    #[arg(long)]
    epochs: Option<usize>,
    /// Standardize features using training statistics.
    #[arg(long)]
    standardize: bool,
}

impl ClassifierArgs {
    fn spec(&self, seed: u64) -> ClassifierSpec {
        let mut spec = match self.classifier {
            ClassifierArg::Logistic => ClassifierSpec::logistic(),
            ClassifierArg::Mlp => ClassifierSpec::mlp(),
        };
        if let Some(epochs) = self.epochs {
            spec.epochs = epochs;
        }
        spec.standardize = self.standardize;
        spec.with_seed(seed)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Logistic,
    Mlp,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Hadamard,
    Average,
    L1,
    L2,
}

impl From<OperatorArg> for LinkOperator {
    fn from(op: OperatorArg) -> Self {
        match op {
            OperatorArg::Hadamard => LinkOperator::Hadamard,
            OperatorArg::Average => LinkOperator::Average,
            OperatorArg::L1 => LinkOperator::WeightedL1,
            OperatorArg::L2 => LinkOperator::WeightedL2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    Eta,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GenSpec {
    Ba {
        n: usize,
        alpha: usize,
    },
    Er {
        n: usize,
        p: f64,
    },
    Planted {
        communities: usize,
        size: usize,
        p_in: f64,
        p_out: f64,
    },
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| format!("expected kind:args, got {s:?}"))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let bad = |what: &str| format!("{kind}: invalid {what} in {s:?}");
        let int = |i: usize, what: &str| parts[i].parse::<usize>().map_err(|_| bad(what));
        let real = |i: usize, what: &str| parts[i].parse::<f64>().map_err(|_| bad(what));
        let arity = |k: usize| {
            if parts.len() == k {
                Ok(())
            } else {
                Err(format!("{kind} takes {k} values, got {}", parts.len()))
            }
        };
        match kind {
            "ba" => {
                arity(2)?;
                Ok(GenSpec::Ba {
                    n: int(0, "n")?,
                    alpha: int(1, "alpha")?,
                })
            }
            "er" => {
                arity(2)?;
                Ok(GenSpec::Er {
                    n: int(0, "n")?,
                    p: real(1, "p")?,
                })
            }
            "planted" => {
                arity(4)?;
                Ok(GenSpec::Planted {
                    communities: int(0, "communities")?,
                    size: int(1, "size")?,
                    p_in: real(2, "p_in")?,
                    p_out: real(3, "p_out")?,
                })
            }
            _ => Err(format!("unknown generator {kind:?}; use ba, er or planted")),
        }
    }
}

enum Generated {
    Plain(Graph),
    Labeled(LabeledDataset),
}

impl GenSpec {
    fn build(self, seed: u64) -> Result<Generated> {
        Ok(match self {
            GenSpec::Ba { n, alpha } => Generated::Plain(generate_ba(&BaSpec { n, alpha, seed })?),
            GenSpec::Er { n, p } => Generated::Plain(generate_er(n, p, seed)?),
            GenSpec::Planted {
                communities,
                size,
                p_in,
                p_out,
            } => Generated::Labeled(generate_planted(&PlantedPartitionSpec {
                communities,
                nodes_per_community: size,
                p_in,
                p_out,
                seed,
            })?),
        })
    }

    fn graph(self, seed: u64) -> Result<Graph> {
        Ok(match self.build(seed)? {
            Generated::Plain(g) => g,
            Generated::Labeled(d) => d.graph,
        })
    }
}

struct Input {
    graph: Graph,
    ids: NodeIdMap,
    dataset: Option<LabeledDataset>,
    name: String,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

impl InputArgs {
    fn load(&self, seed: u64) -> Result<Input> {
        if let Some(path) = &self.edges {
            let loaded = load_edge_list(path, self.directed)?;
            let c = loaded.report.clean;
            eprintln!(
                "loaded {} nodes, {} edges ({} self-loops, {} duplicates dropped)",
                loaded.graph.node_count(),
                loaded.graph.edge_count(),
                c.self_loops,
                c.duplicates
            );
            return Ok(Input {
                graph: loaded.graph,
                ids: loaded.ids,
                dataset: None,
                name: stem(path),
            });
        }
        if let (Some(content), Some(cites)) = (&self.content, &self.cites) {
            let loaded = if self.pubmed {
                load_pubmed_diabetes(content, cites)?
            } else {
                load_citation_dataset(content, cites)?
            };
            let c = loaded.report;
            eprintln!(
                "loaded {} nodes, {} edges, {} classes ({} citations to unknown papers dropped)",
                loaded.dataset.graph.node_count(),
                loaded.dataset.graph.edge_count(),
                loaded.dataset.class_count,
                c.unknown_endpoints
            );
            return Ok(Input {
                graph: loaded.dataset.graph.clone(),
                ids: loaded.ids,
                dataset: Some(loaded.dataset),
                name: stem(content),
            });
        }
        if let Some(spec) = self.generate {
            let (graph, dataset) = match spec.build(seed)? {
                Generated::Plain(g) => (g, None),
                Generated::Labeled(d) => (d.graph.clone(), Some(d)),
            };
            return Ok(Input {
                ids: NodeIdMap::numeric(graph.node_count()),
                graph,
                dataset,
                name: "generated".into(),
            });
        }
        bail!("no input: pass --edges, --content with --cites, or --generate")
    }

    fn load_labeled(&self, seed: u64) -> Result<(LabeledDataset, String)> {
        let input = self.load(seed)?;
        let dataset = input.dataset.ok_or_else(|| {
            TpmError::Config(
                "labels required: use --content/--cites or --generate planted:...".into(),
            )
        })?;
        Ok((dataset, input.name))
    }
}

fn finish_report(report: &EvalReport, out: Option<&Path>) -> Result<()> {
    println!("{}", report.csv_header());
    println!("{}", report.csv_row());
    if let Some(path) = out {
        report.write_json(path)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed { input, walk, out } => {
            let config = walk.config()?;
            let input = input.load(config.seed)?;
            let embeddings = embed_all(&input.graph, &config)?;
            embeddings.write_csv(&out, &input.ids)?;
            println!(
                "wrote {} x {} embedding to {}",
                embeddings.node_count(),
                embeddings.dim(),
                out.display()
            );
        }
        Command::Classify {
            input,
            walk,
            split,
            clf,
            out,
        } => {
            let config = walk.config()?;
            let (dataset, name) = input.load_labeled(config.seed)?;
            let split = SplitSpec {
                train_fraction: split.train_frac,
                repeats: split.repeats,
                stratified: true,
                seed: config.seed,
            };
            let embeddings = embed_all(&dataset.graph, &config)?;
            let report = evaluate_classification(
                &name,
                &dataset,
                &embeddings,
                &split,
                &clf.spec(config.seed),
            )?;
            finish_report(&report, out.as_deref())?;
        }
        Command::Linkpred {
            input,
            walk,
            links,
            clf,
            runs,
            scores,
            out,
        } => {
            let walk = walk.config()?;
            let input = input.load(walk.seed)?;
            let config = LinkEvalConfig {
                walk,
                links: LinkSampleSpec {
                    test_fraction: links.test_frac,
                    seed: walk.seed,
                },
                classifier: clf.spec(walk.seed),
                operator: links.operator.into(),
            };
            let (report, scored) =
                evaluate_link_prediction_detailed(&input.name, &input.graph, &config, runs)?;
            if let Some(path) = scores {
                write_link_scores(path, &scored, &input.ids)?;
            }
            finish_report(&report, out.as_deref())?;
        }
        Command::Crossnet {
            train_edges,
            test_edges,
            generate,
            train_count,
            test_count,
            walk,
            links,
            clf,
            out,
        } => {
            let walk = walk.config()?;
            let (train, test, name) = match generate {
                Some(spec) => {
                    let make = |purpose: &str, count: usize| {
                        (0..count)
                            .map(|i| spec.graph(derive_seed(walk.seed, purpose, i as u64)))
                            .collect::<Result<Vec<_>>>()
                    };
                    (
                        make("train-graph", train_count)?,
                        make("test-graph", test_count)?,
                        "generated".to_owned(),
                    )
                }
                None => {
                    let read = |paths: &[PathBuf]| {
                        paths
                            .iter()
                            .map(|p| Ok(load_edge_list(p, false)?.graph))
                            .collect::<Result<Vec<_>>>()
                    };
                    (
                        read(&train_edges)?,
                        read(&test_edges)?,
                        "edge-lists".to_owned(),
                    )
                }
            };
            let config = LinkEvalConfig {
                walk,
                links: LinkSampleSpec {
                    test_fraction: links.test_frac,
                    seed: walk.seed,
                },
                classifier: clf.spec(walk.seed),
                operator: links.operator.into(),
            };
            let report = cross_network_generalization(&name, &train, &test, &config)?;
            finish_report(&report, out.as_deref())?;
        }
        Command::Generate {
            generate,
            seed,
            out,
            labels,
        } => {
            let (graph, labeled) = match generate.build(seed)? {
                Generated::Plain(g) => (g, None),
                Generated::Labeled(d) => (d.graph.clone(), Some(d)),
            };
            let ids = NodeIdMap::numeric(graph.node_count());
            write_edge_list(&out, &graph, &ids)?;
            match (labels, labeled) {
                (Some(path), Some(d)) => {
                    let text: String = d
                        .labels
                        .iter()
                        .enumerate()
                        .map(|(v, l)| format!("{}\tc{l}\n", ids.name(v)))
                        .collect();
                    fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                (Some(_), None) => bail!("--labels needs a planted generator"),
                _ => {}
            }
            println!(
                "wrote {} nodes, {} edges to {}",
                graph.node_count(),
                graph.edge_count(),
                out.display()
            );
        }
        Command::Sweep {
            input,
            walk,
            split,
            clf,
            param,
            values,
            out,
        } => {
            let base = walk.config()?;
            let (dataset, _) = input.load_labeled(base.seed)?;
            let param = match param {
                ParamArg::Eta => SweepParam::Eta,
                ParamArg::M => SweepParam::M,
            };
            let split = SplitSpec {
                train_fraction: split.train_frac,
                repeats: split.repeats,
                stratified: true,
                seed: base.seed,
            };
            let rows = sweep(
                &dataset,
                &base,
                param,
                &values,
                &split,
                &clf.spec(base.seed),
            )?;
            match out {
                Some(path) => write_sweep_csv(path, param, &rows)?,
                None => print!("{}", sweep_csv(param, &rows)),
            }
        }
        Command::OracleCheck {
            edges,
            node,
            eta,
            m,
            seed,
            tolerance,
            budget,
        } => {
            let (graph, ids) = match edges {
                Some(path) => {
                    let loaded = load_edge_list(&path, false)?;
                    (loaded.graph, loaded.ids)
                }
                None => example_graph(),
            };
            let nodes: Vec<usize> = match node {
                Some(name) => vec![ids
                    .get(&name)
                    .ok_or_else(|| TpmError::Config(format!("unknown node {name:?}")))?],
                None => (0..graph.node_count()).collect(),
            };
            let config = WalkConfig::new(eta, m, seed)?;
            let mut worst = 0.0f64;
            for v in nodes {
                let exact = exact_tpm_with_budget(&graph, v, m, budget)?;
                let diff = compare(&build_tpm(&graph, v, &config), &exact)?;
                println!("{}\tmax_abs_diff={diff:.6}", ids.name(v));
                worst = worst.max(diff);
            }
            if worst <= tolerance {
                println!("PASS max_abs_diff={worst:.6} tolerance={tolerance}");
            } else {
                println!("FAIL max_abs_diff={worst:.6} tolerance={tolerance}");
                return Err(anyhow!(CheckFailed));
            }
        }
    }
    Ok(())
}

#[derive(Debug)]
struct CheckFailed;

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("sampled matrices exceed tolerance")
    }
}

impl std::error::Error for CheckFailed {}

/// Exit code and label for each failure class.
fn classify_failure(err: &anyhow::Error) -> (u8, &'static str) {
    if err.is::<CheckFailed>() {
        return (6, "check failed");
    }
    if err.chain().any(|e| e.is::<std::io::Error>()) {
        return (3, "bad file");
    }
    match err.downcast_ref::<TpmError>() {
        Some(
            TpmError::Io { .. } | TpmError::Parse { .. } | TpmError::Csv(_) | TpmError::Json(_),
        ) => (3, "bad file"),
        Some(TpmError::BudgetExceeded { .. }) => (5, "budget exceeded"),
        Some(TpmError::Diverged { .. } | TpmError::NonFinite(_)) => (7, "numerical failure"),
        _ => (4, "bad config"),
    }
}

fn main() -> ExitCode {
    tpm::par::init_thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, class) = classify_failure(&err);
            let mut detail = String::new();
            for cause in err.chain().map(ToString::to_string) {
                // typed errors already print their source
                if !detail.contains(&cause) {
                    if !detail.is_empty() {
                        detail.push_str(": ");
                    }
                    detail.push_str(&cause);
                }
            }
            eprintln!("error ({class}): {detail}");
            ExitCode::from(code)
        }
    }
}
