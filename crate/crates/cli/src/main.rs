use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use serde_json::json;

use nestdnf::bench::{run_benchmark, BenchConfig};
use nestdnf::dataio::{binarize, load_csv, read_binary_csv, BinDataset, Schema, DEFAULT_THRESHOLDS};
use nestdnf::dtree::{fit_tree, tree_to_dnfs, DecisionTree};
use nestdnf::dualize::canonical_complement;
use nestdnf::interpret::{
    check_theorem_bound, find_axp, find_cxp, is_k_axp_interpretable, mim_certifies, support_table,
};
use nestdnf::learner::{train, LearnerConfig};
use nestdnf::models::LearnerRegistry;
use nestdnf::nested::NestedModel;
use nestdnf::{Assignment, DnfFormula, Error, FixedBitSet};

#[derive(Parser)]
#[command(name = "nestdnf", version, about = "Learn, check and explain nested k-DNF classifiers")]
struct Cli {
    /// Seed for randomised steps; overrides the benchmark config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress logs and progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// 0/1 CSV with an optional trailing `label` column, a `.nbin` cache, or
    /// a raw CSV together with `--schema`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Thresholds per numeric column when binarizing with `--schema`.
    #[arg(long, default_value_t = DEFAULT_THRESHOLDS)]
    thresholds: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a nested k-DNF; prints the training log as JSON lines.
    TrainNested {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
        /// Learn the complement of the target and negate predictions.
        #[arg(long)]
        complement: bool,
        #[arg(long)]
        out: PathBuf,
        /// Write the training log here instead of stdout.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Fit a depth-k decision tree.
    TrainDt {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict with a saved model; reports accuracy when labels are present.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Write the prediction CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Abductive and contrastive explanation of one decision.
    Explain {
        #[arg(long)]
        model: PathBuf,
        /// Feature values as a 0/1 string, feature 0 first.
        #[arg(long)]
        instance: String,
    },
    /// Check k-DNF form, the induced-matching certificate and the term bound.
    Verify {
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        formula: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Required with `--formula`; defaults to the model's k.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Canonical DNF of the complement of a formula.
    Complement {
        #[arg(long)]
        formula: String,
        /// Keep inconsistent terms.
        #[arg(long)]
        raw: bool,
    },
    /// Binarize a raw CSV; `.nbin` outputs use the packed cache format.
    Binarize {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLDS)]
        thresholds: usize,
        #[arg(long)]
        out: PathBuf,
        /// Held-out CSV encoded with the same features.
        #[arg(long, requires = "apply_out")]
        apply: Option<PathBuf>,
        #[arg(long)]
        apply_out: Option<PathBuf>,
    },
    /// Run every registered learner over the datasets of a config.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_data(args: &DataArgs) -> anyhow::Result<(BinDataset, bool)> {
    if args.data.extension().is_some_and(|e| e == "nbin") {
        return Ok((BinDataset::load_cache(&args.data)?, true));
    }
    match &args.schema {
        Some(schema) => {
            let raw = load_csv(&args.data, &Schema::load(schema)?)?;
            Ok((binarize(&raw, args.thresholds)?.0, true))
        }
        None => Ok(read_binary_csv(&args.data)?),
    }
}

fn save_dataset(ds: &BinDataset, path: &Path) -> anyhow::Result<()> {
    if path.extension().is_some_and(|e| e == "nbin") {
        ds.save_cache(path)?;
    } else {
        ds.write_csv(path)?;
    }
    Ok(())
}

enum AnyModel {
    Nested(NestedModel),
    Tree(DecisionTree),
}

impl AnyModel {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
        if value.get("nodes").is_some() {
            Ok(AnyModel::Tree(DecisionTree::from_json(&text)?))
        } else {
            Ok(AnyModel::Nested(NestedModel::from_json(&text)?))
        }
    }

    fn feature_names(&self) -> &[String] {
        match self {
            AnyModel::Nested(m) => &m.feature_names,
            AnyModel::Tree(t) => &t.feature_names,
        }
    }

    fn predict(&self, row: &FixedBitSet) -> bool {
        match self {
            AnyModel::Nested(m) => m.predict_bits(row),
            AnyModel::Tree(t) => t.predict(row),
        }
    }

    /// A DNF for the positive class, to be negated when the flag is set, and the model's k.
    fn decision_dnf(&self) -> (DnfFormula, bool, usize) {
        match self {
            AnyModel::Nested(m) => (m.expanded().clone(), m.trained_on_complement, m.nested.k()),
            AnyModel::Tree(t) => (tree_to_dnfs(t).0, false, t.max_depth),
        }
    }
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::TrainNested { data, k, complement, out, log } => {
            let (ds, labelled) = load_data(&data)?;
            if !labelled {
                bail!(Error::SchemaMismatch("training data has no label column".into()));
            }
            let mut cfg = LearnerConfig::new(k).complement(complement);
            cfg.seed = cli.seed.unwrap_or(0);
            let outcome = train(&ds, &cfg)?;
            outcome.model.save(&out)?;
            let mut lines = String::new();
            for event in &outcome.log {
                lines.push_str(&serde_json::to_string(event)?);
                lines.push('\n');
            }
            match log {
                Some(path) => fs::write(path, lines)?,
                None if !cli.quiet => print!("{lines}"),
                None => {}
            }
            info!(
                "{} terms, training accuracy {:.2}",
                outcome.model.n_terms(),
                ds.accuracy(|r| outcome.model.predict_bits(r))
            );
        }
        Command::TrainDt { data, k, out } => {
            let (ds, labelled) = load_data(&data)?;
            if !labelled {
                bail!(Error::SchemaMismatch("training data has no label column".into()));
            }
            let tree = fit_tree(&ds, k)?;
            tree.save(&out)?;
            let acc = ds.accuracy(|r| tree.predict(r));
            if cli.json {
                print_json(&json!({"leaves": tree.count_leaves(), "depth": tree.depth(), "train_accuracy": acc}))?;
            } else if !cli.quiet {
                println!("{} leaves, depth {}, training accuracy {acc:.2}", tree.count_leaves(), tree.depth());
            }
        }
        Command::Predict { model, data, out } => {
            let model = AnyModel::load(&model)?;
            let (ds, labelled) = load_data(&data)?;
            if ds.feature_names() != model.feature_names() {
                bail!(Error::SchemaMismatch(format!(
                    "data has features {:?}, model expects {:?}",
                    ds.feature_names(),
                    model.feature_names()
                )));
            }
            let predictions: Vec<bool> = ds.rows().iter().map(|r| model.predict(r)).collect();
            let accuracy = labelled.then(|| ds.accuracy(|r| model.predict(r)));
            if cli.json {
                let p: Vec<u8> = predictions.iter().map(|&b| u8::from(b)).collect();
                print_json(&json!({"predictions": p, "accuracy": accuracy}))?;
                return Ok(());
            }
            let mut csv = String::from("prediction\n");
            for &p in &predictions {
                csv.push_str(if p { "1\n" } else { "0\n" });
            }
            match &out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            if let Some(acc) = accuracy {
                if out.is_some() {
                    println!("accuracy: {acc:.2}");
                } else {
                    eprintln!("accuracy: {acc:.2}");
                }
            }
        }
        Command::Explain { model, instance } => {
            let model = AnyModel::load(&model)?;
            let v: Assignment = instance.parse()?;
            let n = model.feature_names().len();
            if v.len() != n {
                bail!(Error::LengthMismatch { expected: n, got: v.len() });
            }
            let (dnf, flip, _) = model.decision_dnf();
            let (mut table, support) = support_table(&dnf)?;
            if flip {
                table = table.complement();
            }
            let local = Assignment::new(support.iter().map(|&i| v.get(i)).collect());
            let axp = find_axp(&table, &local)?;
            let cxp = find_cxp(&table, &local)?;
            let decision = axp.decision;
            let lift = |fs: &[usize]| fs.iter().map(|&j| support[j]).collect::<Vec<_>>();
            let (axp, cxp) = (lift(&axp.features), lift(&cxp.features));
            let names = |fs: &[usize]| fs.iter().map(|&i| model.feature_names()[i].clone()).collect::<Vec<_>>();
            print_json(&json!({
                "decision": decision,
                "axp": axp,
                "cxp": cxp,
                "axp_features": names(&axp),
                "cxp_features": names(&cxp),
            }))?;
        }
        Command::Verify { formula, model, k } => {
            let (dnf, k) = match (formula, model) {
                (Some(f), _) => {
                    let k = k.ok_or_else(|| {
                        anyhow!(Error::InvalidK { k: 0, reason: "--k is required with --formula".into() })
                    })?;
                    (f.parse::<DnfFormula>()?, k)
                }
                (None, Some(path)) => {
                    let (dnf, _, model_k) = AnyModel::load(&path)?.decision_dnf();
                    (dnf, k.unwrap_or(model_k))
                }
                (None, None) => unreachable!("clap requires one of --formula/--model"),
            };
            print_json(&verify_report(&dnf, k)?)?;
        }
        Command::Complement { formula, raw } => {
            let d: DnfFormula = formula.parse()?;
            let c = canonical_complement(&d, raw);
            let report = json!({"input_size": d.size(), "output_size": c.size(), "max_term_size": c.max_term_size()});
            if cli.json {
                print_json(&json!({"formula": c.to_string(), "report": report}))?;
            } else {
                println!("{c}");
                println!("{report}");
            }
        }
        Command::Binarize { data, schema, thresholds, out, apply, apply_out } => {
            let schema = Schema::load(&schema)?;
            let raw = load_csv(&data, &schema)?;
            let (ds, binarizer) = binarize(&raw, thresholds)?;
            save_dataset(&ds, &out)?;
            if let (Some(apply), Some(apply_out)) = (apply, apply_out) {
                save_dataset(&binarizer.transform(&load_csv(&apply, &schema)?)?, &apply_out)?;
            }
            if cli.json {
                print_json(&json!({"n_examples": ds.n_examples(), "features": ds.feature_names()}))?;
            } else if !cli.quiet {
                println!("{} examples, {} features", ds.n_examples(), ds.n_features());
            }
        }
        Command::Benchmark { config, out } => {
            let mut cfg = BenchConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let run = run_benchmark(&cfg, &LearnerRegistry::with_defaults())?;
            let report = run.report.to_json()?;
            if let Some(path) = out {
                fs::write(path, report.clone() + "\n")?;
            }
            if cli.json {
                println!("{report}");
            } else if !cli.quiet {
                print!("{}", run.render_table());
            }
        }
    }
    std::io::stdout().flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    k_dnf: bool,
    mim_le_k: bool,
    complement_is_k_dnf: bool,
    theorem_bound: Option<nestdnf::interpret::BoundReport>,
}

fn verify_report(d: &DnfFormula, k: usize) -> anyhow::Result<VerifyReport> {
    let k_dnf = d.is_k_dnf(k);
    let mim_le_k = k_dnf && mim_certifies(d, k)?;
    match support_table(d) {
        Ok((table, _)) => {
            let i = is_k_axp_interpretable(&table, k);
            Ok(VerifyReport {
                k_dnf,
                mim_le_k,
                complement_is_k_dnf: i.neg_covers,
                theorem_bound: Some(check_theorem_bound(&i.double_dnf)),
            })
        }
        Err(Error::OracleTooLarge { .. }) => Ok(VerifyReport {
            k_dnf,
            mim_le_k,
            complement_is_k_dnf: canonical_complement(d, false).subsumption_reduced().is_k_dnf(k),
            theorem_bound: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "off" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
