//! Command-line front end: corpus preparation, training, evaluation,
//! training-size sweeps, lambda search and the analysis reports.

mod config;
mod meta;

use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bipos::analysis::{
    component_report, components_csv, context_detail, context_detail_csv, impact, impact_csv,
    curve_csv, rare_word_curve_from_counts, word_detail, word_detail_csv, zipf_curve, ImpactKey,
};
use bipos::corpus::{build_vocabulary, read_lob, split_corpus, TagMap, TaggedCorpus, Tagset};
use bipos::evaluation::{
    evaluate, evaluate_bipos, evaluate_generalized, grid_search_lambda, sweep_csv,
    sweep_training_size, EvalResult, SimpleScorer, SweepConfig,
};
use bipos::models::{
    during_variable, load_model, random_variable, save_model, singular_variable, train_bipos,
    train_generalized, ContextVariable, ModelFile, ModelKind, UniformModel, UnigramModel,
    UnknownRegime,
};
use bipos::Real;

use config::ConfigFile;
use meta::RunMeta;

#[derive(Parser)]
#[command(name = "bipos", version, about = "Class-based bigram language models: train, evaluate, analyze")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it to the output directory.
    Train(TrainArgs),
    /// Evaluate a stored model on a test corpus.
    Eval(EvalArgs),
    /// Run weakness-analysis reports for a model on a test corpus.
    Analyze(AnalyzeArgs),
    /// Retrain on growing prefixes and tabulate the measures per size.
    Sweep(SweepArgs),
    /// Grid-search the interpolation weight of a generalized model.
    LambdaSearch(LambdaArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all randomness (the random context variable).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Tagged corpus in the horizontal `word_TAG` layout.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Tag-map file (raw<TAB>merged).
    #[arg(long)]
    tagmap: Option<PathBuf>,
    /// Train on the first N tokens only.
    #[arg(long)]
    n_train: Option<usize>,
    /// Model kind: bipos, uniform or unigram.
    #[arg(long)]
    kind: Option<String>,
    /// Unknown-word regime stored with the model: m1, m2, m3, m4 or new.
    #[arg(long)]
    regime: Option<UnknownRegime>,
    /// Context variable: singular, during or random:<p>.
    #[arg(long)]
    variable: Option<String>,
    /// Interpolation weight for the specific distribution.
    #[arg(long)]
    lambda: Option<Real>,
    /// Smoothing floor of the tag-transition factor.
    #[arg(long)]
    c2: Option<Real>,
    /// Probability of each unseen vocabulary word.
    #[arg(long)]
    d1: Option<Real>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    tagmap: Option<PathBuf>,
    /// Override the stored unknown-word regime.
    #[arg(long)]
    regime: Option<UnknownRegime>,
    /// Override the stored interpolation weight.
    #[arg(long)]
    lambda: Option<Real>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    tagmap: Option<PathBuf>,
    /// Comma-separated report names, or "all".
    #[arg(long)]
    reports: Option<String>,
    /// Previous tag for the following-tag report (default: the tag with the
    /// largest impact).
    #[arg(long)]
    given: Option<String>,
    /// Tag for the rare-words report (default: the most frequent tag).
    #[arg(long)]
    tag: Option<String>,
    #[arg(long)]
    regime: Option<UnknownRegime>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    tagmap: Option<PathBuf>,
    /// Size of the training portion; the remainder is the test set.
    #[arg(long)]
    n_train: Option<usize>,
    /// Comma-separated prefix sizes to retrain on.
    #[arg(long)]
    sizes: Option<String>,
    /// Fix the vocabulary on the full training portion for every prefix.
    #[arg(long)]
    fixed_vocab: bool,
    #[arg(long)]
    regime: Option<UnknownRegime>,
    #[arg(long)]
    c2: Option<Real>,
    #[arg(long)]
    d1: Option<Real>,
}

#[derive(Args)]
struct LambdaArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    tagmap: Option<PathBuf>,
}

const ALL_REPORTS: [&str; 7] = [
    "impact-prev-tag",
    "following-tag",
    "unknown-impact",
    "components",
    "word-given-tag",
    "zipf",
    "rare-words",
];

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::LambdaSearch(args) => cmd_lambda_search(args),
    }
}

fn require(path: Option<PathBuf>, cfg: &ConfigFile, key: &str) -> Result<PathBuf> {
    if let Some(p) = path {
        return Ok(p);
    }
    if let Some(raw) = cfg.get(key) {
        return Ok(PathBuf::from(raw));
    }
    bail!("missing required --{key} (or config key {key})")
}

fn load_tagmap(path: &Path) -> Result<TagMap> {
    TagMap::from_path(path).with_context(|| format!("cannot load tag map {}", path.display()))
}

fn load_corpus(path: &Path, map: &TagMap) -> Result<(TaggedCorpus, usize)> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open corpus file {}", path.display()))?;
    let outcome = read_lob(BufReader::new(file), map)
        .with_context(|| format!("cannot parse corpus file {}", path.display()))?;
    Ok((outcome.corpus, outcome.skipped_items))
}

fn variable_from_spec(spec: &str, seed: u64) -> Result<Box<dyn ContextVariable>> {
    match spec {
        "singular" => Ok(singular_variable()),
        "during" => Ok(during_variable()),
        other => {
            if let Some(p) = other.strip_prefix("random:") {
                let p: f64 = p.parse().with_context(|| format!("bad probability in {other:?}"))?;
                Ok(random_variable(p, seed))
            } else {
                bail!("unknown variable {spec:?}; expected singular, during or random:<p>")
            }
        }
    }
}

fn out_dir(common: &CommonArgs, cfg: &ConfigFile) -> Result<PathBuf> {
    let dir = match &common.out {
        Some(d) => d.clone(),
        None => PathBuf::from(cfg.get("out").unwrap_or("out")),
    };
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

fn echo_config(meta: &mut RunMeta, cfg: &ConfigFile) {
    for (k, v) in cfg.entries() {
        meta.set(&format!("config.{k}"), v);
    }
}

/// Every test tag must be known to the model's declared tagset.
fn check_tag_compatibility(test: &TaggedCorpus, declared: &[String], tagset_name: &str) -> Result<()> {
    for tok in &test.tokens {
        if !declared.contains(&tok.tag) {
            bail!(
                "test corpus carries tag {:?} which is not part of the model's tagset {:?}; \
                 the tag maps of model and test do not match",
                tok.tag,
                tagset_name
            );
        }
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let corpus_path = require(args.corpus, &cfg, "corpus")?;
    let tagmap_path = require(args.tagmap, &cfg, "tagmap")?;
    let out = out_dir(&args.common, &cfg)?;
    let seed = cfg.resolve(args.common.seed, "seed", 0u64)?;
    let kind = cfg.resolve(args.kind, "kind", "bipos".to_string())?;
    let c2 = cfg.resolve(args.c2, "c2", 1e-4)?;
    let d1 = cfg.resolve(args.d1, "d1", 1e-6)?;
    let regime = cfg.resolve(args.regime, "regime", UnknownRegime::M1)?;
    let variable_spec = cfg.resolve_opt(args.variable, "variable")?;
    let lambda = cfg.resolve(args.lambda, "lambda", 0.5)?;
    let n_train = cfg.resolve_opt(args.n_train, "n_train")?;

    let map = load_tagmap(&tagmap_path)?;
    let (full, skipped) = load_corpus(&corpus_path, &map)?;
    let train = match n_train {
        Some(n) => split_corpus(&full, n)?.0,
        None => full,
    };
    if skipped > 0 {
        eprintln!("note: skipped {skipped} untagged items while reading the corpus");
    }
    let tagset: Tagset = map.image_tagset();
    let vocab = build_vocabulary(&train);

    let mut meta = RunMeta::new("train");
    meta.digest_input("corpus", &corpus_path)?;
    meta.digest_input("tagmap", &tagmap_path)?;
    meta.set("seed", seed);
    meta.set("kind", &kind);
    meta.set("c2", c2);
    meta.set("d1", d1);
    meta.set("regime", regime);
    meta.set("n_train", n_train.map(|n| n.to_string()).unwrap_or_else(|| "all".into()));
    echo_config(&mut meta, &cfg);

    if kind != "bipos" && variable_spec.is_some() {
        bail!("--variable applies to the bipos kind only");
    }
    let model = match kind.as_str() {
        "uniform" => ModelKind::Uniform(UniformModel::new(vocab.clone())),
        "unigram" => ModelKind::Unigram(UnigramModel::<Real>::train(&train, &vocab)?),
        "bipos" => {
            let bipos = train_bipos::<Real>(&train, &vocab, &tagset, c2, d1)?.with_regime(regime)?;
            match &variable_spec {
                Some(spec) => {
                    let mut variable = variable_from_spec(spec, seed)?;
                    meta.set("variable", spec);
                    meta.set("lambda", lambda);
                    ModelKind::Generalized(train_generalized(bipos, &train, variable.as_mut(), lambda)?)
                }
                None => ModelKind::Bipos(bipos),
            }
        }
        other => bail!("unknown model kind {other:?}; expected bipos, uniform or unigram"),
    };

    print_train_summary(&model, vocab.len());
    let path = out.join("model.json");
    save_model(&ModelFile::new(model, meta.to_map()), &path)?;
    println!("model written to {}", path.display());
    Ok(())
}

fn print_train_summary(model: &ModelKind<Real>, vocab_len: usize) {
    println!("|V| = {vocab_len}");
    let bipos = match model {
        ModelKind::Bipos(m) => m,
        ModelKind::Generalized(g) => g.base(),
        _ => return,
    };
    println!(
        "|G| = {} effective ({} declared in {})",
        bipos.tags().len(),
        bipos.declared_tags().len(),
        bipos.tagset_name()
    );
    println!("d2 = {}", bipos.d2());
    println!("u = {}", bipos.unseen_words());
    let mut by_dg: Vec<(usize, Real)> = bipos.d_g().iter().copied().enumerate().collect();
    by_dg.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let top: Vec<String> = by_dg
        .iter()
        .take(5)
        .map(|(i, d)| format!("{}={}", bipos.tags()[*i], d))
        .collect();
    println!("d_g (top 5): {}", top.join(" "));
}

/// Loads a model and evaluates it on a freshly parsed test corpus.
fn run_eval(
    model_path: &Path,
    test_path: &Path,
    tagmap_path: &Path,
    regime: Option<UnknownRegime>,
    lambda: Option<Real>,
    seed: u64,
) -> Result<(ModelFile<Real>, EvalResult<Real>)> {
    let file = load_model::<Real>(model_path)
        .with_context(|| format!("cannot load model {}", model_path.display()))?;
    let map = load_tagmap(tagmap_path)?;
    let (test, _) = load_corpus(test_path, &map)?;

    let result = match &file.model {
        ModelKind::Bipos(m) => {
            if lambda.is_some() {
                bail!("--lambda applies to generalized models; this model has no specific distributions");
            }
            check_tag_compatibility(&test, m.declared_tags(), m.tagset_name())?;
            let m = match regime {
                Some(r) => &m.clone().with_regime(r)?,
                None => m,
            };
            evaluate_bipos(m, m.regime(), &test)?
        }
        ModelKind::Generalized(g) => {
            check_tag_compatibility(&test, g.base().declared_tags(), g.base().tagset_name())?;
            let mut g = g.clone();
            if let Some(r) = regime {
                g = g.with_base_regime(r)?;
            }
            if let Some(l) = lambda {
                g.set_lambda(l);
            }
            let mut variable = variable_from_spec(g.variable_name(), seed)?;
            evaluate_generalized(&g, variable.as_mut(), &test)?
        }
        ModelKind::Uniform(m) => {
            let mut scorer = SimpleScorer::Uniform(m);
            evaluate(&mut scorer, &test)?
        }
        ModelKind::Unigram(m) => {
            let mut scorer = SimpleScorer::Unigram(m);
            evaluate(&mut scorer, &test)?
        }
    };
    Ok((file, result))
}

fn write_eval_outputs(out: &Path, meta: &RunMeta, result: &EvalResult<Real>) -> Result<()> {
    let envelope = serde_json::json!({
        "metadata": meta.json_value(),
        "result": result,
    });
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    std::fs::write(out.join("eval.json"), json)?;
    let csv = format!("{}{}", meta.csv_header(), result.records_csv());
    std::fs::write(out.join("records.csv"), csv)?;
    Ok(())
}

fn print_eval_summary(result: &EvalResult<Real>) {
    println!("n = {}", result.n);
    println!("LTP = {}", result.ltp);
    println!("PP = {}", result.pp);
    println!("ALTP = {}", result.altp);
    println!("APP = {}", result.app);
    println!("s = {}", result.s);
    println!("r = {}", result.r);
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let model_path = require(args.model, &cfg, "model")?;
    let test_path = require(args.test, &cfg, "test")?;
    let tagmap_path = require(args.tagmap, &cfg, "tagmap")?;
    let out = out_dir(&args.common, &cfg)?;
    let seed = cfg.resolve(args.common.seed, "seed", 0u64)?;
    let regime = cfg.resolve_opt(args.regime, "regime")?;
    let lambda = cfg.resolve_opt(args.lambda, "lambda")?;

    let mut meta = RunMeta::new("eval");
    meta.digest_input("model", &model_path)?;
    meta.digest_input("test", &test_path)?;
    meta.digest_input("tagmap", &tagmap_path)?;
    meta.set("seed", seed);
    meta.set("regime", regime.map(|r| r.to_string()).unwrap_or_else(|| "model-default".into()));
    meta.set("lambda", lambda.map(|l| l.to_string()).unwrap_or_else(|| "model-default".into()));
    if regime == Some(UnknownRegime::M2) {
        meta.set(
            "note.m2",
            "first occurrences of out-of-vocabulary words score d2, later ones d1",
        );
    }
    echo_config(&mut meta, &cfg);

    let (_, result) = run_eval(&model_path, &test_path, &tagmap_path, regime, lambda, seed)?;
    write_eval_outputs(&out, &meta, &result)?;
    print_eval_summary(&result);
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let model_path = require(args.model, &cfg, "model")?;
    let test_path = require(args.test, &cfg, "test")?;
    let tagmap_path = require(args.tagmap, &cfg, "tagmap")?;
    let out = out_dir(&args.common, &cfg)?;
    let seed = cfg.resolve(args.common.seed, "seed", 0u64)?;
    let regime = cfg.resolve_opt(args.regime, "regime")?;
    let reports_spec = cfg.resolve(args.reports, "reports", "all".to_string())?;

    let requested: Vec<String> = if reports_spec == "all" {
        ALL_REPORTS.iter().map(|s| s.to_string()).collect()
    } else {
        reports_spec.split(',').map(|s| s.trim().to_string()).collect()
    };
    for name in &requested {
        if !ALL_REPORTS.contains(&name.as_str()) {
            bail!("unknown report {name:?}; valid reports: {}", ALL_REPORTS.join(", "));
        }
    }

    let mut meta = RunMeta::new("analyze");
    meta.digest_input("model", &model_path)?;
    meta.digest_input("test", &test_path)?;
    meta.digest_input("tagmap", &tagmap_path)?;
    meta.set("seed", seed);
    meta.set("reports", requested.join(","));
    meta.set(
        "note.sentence_starts",
        "sentence-initial words are conditioned on the distinguished BEGIN context",
    );
    echo_config(&mut meta, &cfg);

    let (file, result) = run_eval(&model_path, &test_path, &tagmap_path, regime, None, seed)?;
    let bipos = match &file.model {
        ModelKind::Bipos(m) => m.clone(),
        ModelKind::Generalized(g) => g.base().clone(),
        _ => bail!("analysis reports need a bi-pos or generalized model"),
    };

    let prev_tag_report = impact(&result.records, &ImpactKey::PrevTag)?;
    let header = meta.csv_header();
    let mut written = 0usize;
    for name in &requested {
        let body = match name.as_str() {
            "impact-prev-tag" => impact_csv(&prev_tag_report),
            "following-tag" => {
                let given = match &args.given {
                    Some(g) => g.clone(),
                    None => prev_tag_report
                        .rows
                        .iter()
                        .map(|r| r.key.clone())
                        .find(|k| k != "BEGIN")
                        .ok_or_else(|| anyhow!("no tagged contexts in the evaluation records"))?,
                };
                impact_csv(&impact(&result.records, &ImpactKey::FollowingTagGiven(given))?)
            }
            "unknown-impact" => impact_csv(&impact(&result.records, &ImpactKey::WordClass)?),
            "components" => components_csv(&component_report(&result.records)?),
            "word-given-tag" => word_detail_csv(&word_detail(&result.records)?),
            "zipf" => curve_csv(&zipf_curve(&prev_tag_report), "fraction_of_keys", "fraction_of_ltp"),
            "rare-words" => {
                let tag = match &args.tag {
                    Some(t) => t.clone(),
                    None => {
                        let mut best = (0u64, None);
                        for (i, t) in bipos.tags().iter().enumerate() {
                            let total = bipos.tag_total(i as u32);
                            if total > best.0 {
                                best = (total, Some(t.clone()));
                            }
                        }
                        best.1.ok_or_else(|| anyhow!("model has no tags"))?
                    }
                };
                let counts = bipos.word_counts_for_tag(&tag)?;
                curve_csv(
                    &rare_word_curve_from_counts::<Real>(counts),
                    "x",
                    "fraction_below_x",
                )
            }
            _ => unreachable!("validated above"),
        };
        std::fs::write(out.join(format!("{name}.csv")), format!("{header}{body}"))?;
        written += 1;
    }

    // Context detail for the three heaviest tagged contexts, as JSON.
    let top_tags: Vec<String> = prev_tag_report
        .rows
        .iter()
        .map(|r| r.key.clone())
        .filter(|k| k != "BEGIN" && k != "(none)")
        .take(3)
        .collect();
    if !top_tags.is_empty() {
        let refs: Vec<&str> = top_tags.iter().map(String::as_str).collect();
        if let Ok(rows) = context_detail(&result.records, &refs) {
            std::fs::write(
                out.join("context-detail.csv"),
                format!("{header}{}", context_detail_csv(&rows)),
            )?;
        }
    }

    println!("{written} report(s) written to {}", out.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let corpus_path = require(args.corpus, &cfg, "corpus")?;
    let tagmap_path = require(args.tagmap, &cfg, "tagmap")?;
    let out = out_dir(&args.common, &cfg)?;
    let c2 = cfg.resolve(args.c2, "c2", 1e-4)?;
    let d1 = cfg.resolve(args.d1, "d1", 1e-6)?;
    let regime = cfg.resolve(args.regime, "regime", UnknownRegime::M1)?;
    let fixed_vocab = args.fixed_vocab || cfg.get("fixed_vocab") == Some("true");
    let n_train = cfg
        .resolve_opt(args.n_train, "n_train")?
        .ok_or_else(|| anyhow!("sweep needs --n-train to split off the test portion"))?;
    let sizes_spec = cfg
        .resolve_opt(args.sizes, "sizes")?
        .ok_or_else(|| anyhow!("sweep needs --sizes (comma-separated prefix sizes)"))?;
    let sizes: Vec<usize> = sizes_spec
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| anyhow!("bad size {s:?}: {e}")))
        .collect::<Result<_>>()?;

    let map = load_tagmap(&tagmap_path)?;
    let (full, _) = load_corpus(&corpus_path, &map)?;
    let (train, test) = split_corpus(&full, n_train)?;
    let tagset = map.image_tagset();

    let mut meta = RunMeta::new("sweep");
    meta.digest_input("corpus", &corpus_path)?;
    meta.digest_input("tagmap", &tagmap_path)?;
    meta.set("n_train", n_train);
    meta.set("sizes", &sizes_spec);
    meta.set("fixed_vocab", fixed_vocab);
    meta.set("regime", regime);
    meta.set("c2", c2);
    meta.set("d1", d1);
    echo_config(&mut meta, &cfg);

    let rows = sweep_training_size(
        &train,
        &test,
        &tagset,
        &sizes,
        SweepConfig { c2, d1, regime, fixed_vocab },
    )?;
    std::fs::write(out.join("sweep.csv"), format!("{}{}", meta.csv_header(), sweep_csv(&rows)))?;
    let envelope = serde_json::json!({ "metadata": meta.json_value(), "rows": rows });
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    std::fs::write(out.join("sweep.json"), json)?;
    println!("{} row(s) written to {}", rows.len(), out.join("sweep.csv").display());
    Ok(())
}

fn cmd_lambda_search(args: LambdaArgs) -> Result<()> {
    let cfg = ConfigFile::load(args.common.config.as_deref())?;
    let model_path = require(args.model, &cfg, "model")?;
    let test_path = require(args.test, &cfg, "test")?;
    let tagmap_path = require(args.tagmap, &cfg, "tagmap")?;
    let out = out_dir(&args.common, &cfg)?;
    let seed = cfg.resolve(args.common.seed, "seed", 0u64)?;

    let file = load_model::<Real>(&model_path)
        .with_context(|| format!("cannot load model {}", model_path.display()))?;
    let ModelKind::Generalized(mut model) = file.model else {
        bail!("lambda-search needs a generalized model (train with --variable)");
    };
    let map = load_tagmap(&tagmap_path)?;
    let (test, _) = load_corpus(&test_path, &map)?;
    check_tag_compatibility(&test, model.base().declared_tags(), model.base().tagset_name())?;
    let mut variable = variable_from_spec(model.variable_name(), seed)?;

    let mut meta = RunMeta::new("lambda-search");
    meta.digest_input("model", &model_path)?;
    meta.digest_input("test", &test_path)?;
    meta.digest_input("tagmap", &tagmap_path)?;
    meta.set("seed", seed);
    echo_config(&mut meta, &cfg);

    let (best_lambda, result) = grid_search_lambda(&mut model, variable.as_mut(), &test)?;
    println!("best lambda = {best_lambda}");
    print_eval_summary(&result);
    let envelope = serde_json::json!({
        "metadata": meta.json_value(),
        "best_lambda": best_lambda,
        "result": result,
    });
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    std::fs::write(out.join("lambda.json"), json)?;
    Ok(())
}
