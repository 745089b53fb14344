use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use textrep_core::corpus::{load_corpus, CorpusFormat};
use textrep_core::evaluate::{
    compare_subsets, gini_select, load_subset, loo_evaluate, run_seeds, subset_indices, traditional_subset,
    TRADITIONAL_SUBSET_LABEL,
};
use textrep_core::io::{to_csv, write_atomic};
use textrep_core::knowledgebase::{
    build_knowledge_base, check_fold_feasibility, evaluate_representation, rank_row, BuildOutcome,
};
use textrep_core::metafeatures::{extract, meta_vectors_to_csv};
use textrep_core::recommend::recommend_for;
use textrep_core::represent::{load_lexicon, load_word_vectors, RepresentationKind};
use textrep_core::seed::sha256_hex;
use textrep_core::{
    BuildConfig, EvalConfig, ForestConfig, KnowledgeBase, LabeledCorpus, LooConfig, MetaFeatureVector, PosLexicon,
    RepresentationRegistry, Resources,
};

use crate::{
    BuildKbArgs, Command, CompareSubsetsArgs, CorpusArgs, EvalRepsArgs, ExtractMetaArgs, FeatureImportanceArgs, Format,
    LooEvalArgs, OutputArgs, RecommendArgs, ResourceArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::ExtractMeta(a) => extract_meta(a),
        Command::BuildKb(a) => build_kb(a),
        Command::Recommend(a) => recommend(a),
        Command::LooEval(a) => loo_eval(a),
        Command::FeatureImportance(a) => feature_importance(a),
        Command::CompareSubsets(a) => compare(a),
        Command::EvalReps(a) => eval_reps(a),
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    textrep_core::Error::Validation(msg.into()).into()
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        return Err(invalid(format!("{what} '{}' is not a readable file", path.display())));
    }
    Ok(())
}

fn require_positive(value: usize, flag: &str) -> Result<()> {
    if value == 0 {
        return Err(invalid(format!("{flag} must be at least 1")));
    }
    Ok(())
}

// ------------------------------------------------------------------ inputs

fn is_corpus_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| ["jsonl", "csv"].contains(&e.to_ascii_lowercase().as_str()))
}

/// Corpus files of a directory, sorted by name.
fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_corpus_file(p))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(invalid(format!("no .jsonl or .csv corpora in {}", dir.display())));
    }
    Ok(files)
}

fn load_one(path: &Path, cap: usize) -> Result<LabeledCorpus> {
    require_file(path, "corpus")?;
    require_positive(cap, "--cap")?;
    Ok(load_corpus(path, CorpusFormat::from_path(path), Some(cap))?)
}

fn load_many(args: &CorpusArgs) -> Result<Vec<LabeledCorpus>> {
    let paths = if args.corpus.is_dir() { corpus_files(&args.corpus)? } else { vec![args.corpus.clone()] };
    paths.iter().map(|p| load_one(p, args.cap)).collect()
}

fn pos_lexicon(args: &CorpusArgs) -> Result<Arc<PosLexicon>> {
    match &args.pos_lexicon {
        Some(p) => {
            require_file(p, "POS lexicon")?;
            Ok(Arc::new(PosLexicon::load(p)?))
        }
        None => Ok(PosLexicon::bundled()),
    }
}

/// Loads the optional lexicon and word vectors plus a digest of their bytes.
fn resources(lexicon: Option<&Path>, vectors: Option<&Path>) -> Result<(Resources, String)> {
    let mut res = Resources::default();
    let mut digest = String::new();
    if let Some(p) = vectors {
        require_file(p, "word vectors")?;
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        digest.push_str(&format!("vectors:{};", sha256_hex(&bytes)));
        res.word_vectors = Some(Arc::new(load_word_vectors(p)?));
    }
    if let Some(p) = lexicon {
        require_file(p, "lexicon")?;
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        digest.push_str(&format!("lexicon:{};", sha256_hex(&bytes)));
        res.lexicon = Some(Arc::new(load_lexicon(p)?));
    }
    Ok((res, digest))
}

/// An explicit registry is used as given. The built-in grid drops the cells
/// whose resources were not supplied.
fn registry(args: &ResourceArgs, res: &Resources) -> Result<RepresentationRegistry> {
    if let Some(p) = &args.registry {
        require_file(p, "registry")?;
        return Ok(RepresentationRegistry::load(p)?);
    }
    let mut reg = textrep_core::represent::default_registry();
    if res.word_vectors.is_none() {
        log::warn!("no --vectors given; pretrained embedding cells are skipped");
        reg = reg.without(|k| matches!(k, RepresentationKind::Embedding { pretrained: true, .. }))?;
    }
    if res.lexicon.is_none() {
        log::warn!("no --lexicon given; the lexicon cell is skipped");
        reg = reg.without(|k| matches!(k, RepresentationKind::Lexicon))?;
    }
    Ok(reg)
}

fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    require_file(path, "knowledge base")?;
    Ok(KnowledgeBase::load(path)?)
}

fn eval_config(folds: usize, seed: u64) -> Result<EvalConfig> {
    require_positive(folds, "--folds")?;
    Ok(EvalConfig { folds, seed, ..EvalConfig::default() })
}

// ------------------------------------------------------------------ output

fn json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes the rendering selected by `--format` to `--out` or standard output.
fn emit(
    output: &OutputArgs,
    json: impl FnOnce() -> Result<Value>,
    csv: impl FnOnce() -> Result<Vec<u8>>,
    table: impl FnOnce() -> String,
) -> Result<()> {
    let bytes = match output.format {
        Format::Json => json_bytes(&json()?)?,
        Format::Csv => csv()?,
        Format::Table => table().into_bytes(),
    };
    match &output.out {
        Some(p) => write_atomic(p, &bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

// ------------------------------------------------------------------ commands

fn extract_meta(a: ExtractMetaArgs) -> Result<()> {
    let lex = pos_lexicon(&a.corpus)?;
    let corpora = load_many(&a.corpus)?;
    let vectors = corpora
        .iter()
        .map(|c| extract(c, a.seed, &lex).with_context(|| format!("extracting '{}'", c.name())))
        .collect::<Result<Vec<MetaFeatureVector>>>()?;
    let single = !a.corpus.corpus.is_dir();
    emit(
        &a.output,
        || {
            Ok(if single {
                vectors[0].to_json()
            } else {
                Value::Array(vectors.iter().map(MetaFeatureVector::to_json).collect())
            })
        },
        || Ok(meta_vectors_to_csv(&vectors)?),
        || {
            let width = MetaFeatureVector::names().iter().map(String::len).max().unwrap_or(0);
            let mut out = format!("{:width$}", "feature");
            for v in &vectors {
                out.push_str(&format!("  {:>14}", v.corpus));
            }
            out.push('\n');
            for (j, name) in MetaFeatureVector::names().iter().enumerate() {
                out.push_str(&format!("{name:width$}"));
                for v in &vectors {
                    out.push_str(&format!("  {:>14.6}", v.values[j]));
                }
                out.push('\n');
            }
            out
        },
    )
}

fn build_kb(a: BuildKbArgs) -> Result<()> {
    if !a.corpus.corpus.is_dir() {
        return Err(invalid(format!("--corpus '{}' must be a directory", a.corpus.corpus.display())));
    }
    if let Some(j) = a.jobs {
        require_positive(j, "--jobs")?;
    }
    let lex = pos_lexicon(&a.corpus)?;
    let (res, digest) = resources(a.resources.lexicon.as_deref(), a.resources.vectors.as_deref())?;
    let reg = registry(&a.resources, &res)?;
    let corpora = load_many(&a.corpus)?;
    let mut ckpt = a.out.clone().into_os_string();
    ckpt.push(".checkpoints");
    let cfg = BuildConfig {
        eval: eval_config(a.folds, a.seed)?,
        meta_seed: a.seed,
        jobs: a.jobs,
        checkpoint_dir: Some(PathBuf::from(ckpt)),
        cell_budget: a.max_cells,
        resource_digest: digest,
    };
    match build_knowledge_base(&corpora, &reg, &res, &lex, &cfg)? {
        BuildOutcome::Complete(kb) => {
            kb.save(&a.out)?;
            eprintln!(
                "wrote {} ({} corpora x {} representations)",
                a.out.display(),
                kb.n_corpora(),
                kb.n_representations()
            );
        }
        BuildOutcome::Partial { cells_done, cells_total } => {
            eprintln!("stopped after {cells_done} of {cells_total} cells; rerun to resume from the checkpoints");
        }
    }
    Ok(())
}

fn recommend(a: RecommendArgs) -> Result<()> {
    let kb = load_kb(&a.kb)?;
    let lex = pos_lexicon(&a.corpus)?;
    if lex.content_hash() != kb.metadata.pos_lexicon_hash {
        log::warn!("POS lexicon differs from the one used to build the knowledge base");
    }
    let corpus = load_one(&a.corpus.corpus, a.corpus.cap)?;
    let eval = if a.train { Some(eval_config(a.folds, a.seed)?) } else { None };
    let (res, _) = resources(a.lexicon.as_deref(), a.vectors.as_deref())?;
    let meta = extract(&corpus, kb.metadata.meta_seed, &lex)?;
    let forest = ForestConfig { seed: a.seed, ..ForestConfig::default() };
    let rec = recommend_for(&kb, &meta, a.strategy, &forest)?;
    let cv_accuracy = match eval {
        Some(cfg) => {
            check_fold_feasibility(&corpus, cfg.folds)?;
            let cell = evaluate_representation(&corpus.canonicalized(), &rec.spec, &res, &cfg)?;
            if cell.failed {
                log::warn!("recommended representation failed: {}", cell.message.as_deref().unwrap_or(""));
            }
            Some(cell.accuracy)
        }
        None => None,
    };
    emit(
        &a.output,
        || {
            let mut v = serde_json::to_value(&rec)?;
            let obj = v.as_object_mut().expect("recommendation is an object");
            obj.insert("corpus".into(), json!(corpus.name()));
            if let Some(acc) = cv_accuracy {
                obj.insert("cv_accuracy".into(), json!(acc));
            }
            Ok(v)
        },
        || {
            let mut header = vec!["corpus", "strategy", "representation_id", "representation"];
            let mut row = vec![
                corpus.name().to_owned(),
                rec.strategy.name().to_owned(),
                rec.representation_id.to_string(),
                rec.representation.clone(),
            ];
            if let Some(acc) = cv_accuracy {
                header.push("cv_accuracy");
                row.push(acc.to_string());
            }
            Ok(to_csv(&header, [row])?)
        },
        || {
            let mut out = format!(
                "corpus          {}\nstrategy        {}\nrepresentation  r{} {}\n",
                corpus.name(),
                rec.strategy.name(),
                rec.representation_id,
                rec.representation
            );
            if let Some(acc) = cv_accuracy {
                out.push_str(&format!("cv_accuracy     {}\n", fmt(acc)));
            }
            out
        },
    )
}

fn loo_eval(a: LooEvalArgs) -> Result<()> {
    let kb = load_kb(&a.kb)?;
    require_positive(a.runs, "--runs")?;
    let features = match &a.features {
        Some(p) => {
            require_file(p, "feature subset")?;
            Some(subset_indices(&load_subset(p)?)?)
        }
        None => None,
    };
    let cfg = LooConfig {
        strategies: if a.strategy.is_empty() { textrep_core::Strategy::ALL.to_vec() } else { a.strategy.clone() },
        n_runs: a.runs,
        seed: a.seed,
        features,
        fixed: a.fixed.clone(),
        ..LooConfig::default()
    };
    let report = loo_evaluate(&kb, &cfg)?;
    emit(&a.output, || Ok(serde_json::to_value(&report)?), || Ok(report.details_csv()?), || report.render_table())
}

fn feature_importance(a: FeatureImportanceArgs) -> Result<()> {
    let kb = load_kb(&a.kb)?;
    require_positive(a.runs, "--runs")?;
    let ranked = gini_select(&kb, a.k, &ForestConfig::default(), &run_seeds(a.seed, a.runs))?;
    emit(
        &a.output,
        || Ok(Value::Array(ranked.iter().map(|(n, v)| json!({"feature": n, "importance": v})).collect())),
        || Ok(to_csv(&["feature", "importance"], ranked.iter().map(|(n, v)| vec![n.clone(), v.to_string()]))?),
        || {
            let width = ranked.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            ranked.iter().enumerate().map(|(i, (n, v))| format!("{:>2}  {n:width$}  {v:.6}\n", i + 1)).collect()
        },
    )
}

fn subset(spec: &str) -> Result<(String, Vec<String>)> {
    match spec {
        "traditional" => Ok((TRADITIONAL_SUBSET_LABEL.to_owned(), traditional_subset())),
        "all" => Ok(("all-72".to_owned(), MetaFeatureVector::names().to_vec())),
        path => {
            let p = Path::new(path);
            require_file(p, "subset")?;
            Ok((path.to_owned(), load_subset(p)?))
        }
    }
}

fn compare(a: CompareSubsetsArgs) -> Result<()> {
    let kb = load_kb(&a.kb)?;
    require_positive(a.runs, "--runs")?;
    let (label_a, sub_a) = subset(&a.a)?;
    let (label_b, sub_b) = subset(&a.b)?;
    let cfg = LooConfig { n_runs: a.runs, seed: a.seed, ..LooConfig::default() };
    let c = compare_subsets(&kb, &sub_a, &sub_b, a.strategy, &cfg)?;
    let rows = [(&label_a, &c.subset_a, &c.metrics_a), (&label_b, &c.subset_b, &c.metrics_b)];
    emit(
        &a.output,
        || {
            let mut v = serde_json::to_value(&c)?;
            let obj = v.as_object_mut().expect("comparison is an object");
            obj.insert("label_a".into(), json!(label_a));
            obj.insert("label_b".into(), json!(label_b));
            Ok(v)
        },
        || {
            let header = [
                "subset",
                "n_features",
                "avg_accuracy",
                "avg_accuracy_std",
                "avg_rank",
                "avg_rank_std",
                "rank1_hits",
                "t",
                "p_value",
            ];
            Ok(to_csv(
                &header,
                rows.iter().map(|(label, names, m)| {
                    vec![
                        (*label).clone(),
                        names.len().to_string(),
                        m.avg_accuracy.mean.to_string(),
                        m.avg_accuracy.std.to_string(),
                        m.avg_rank.mean.to_string(),
                        m.avg_rank.std.to_string(),
                        m.n_rank1_hits.mean.to_string(),
                        c.test.t.to_string(),
                        c.test.p_value.to_string(),
                    ]
                }),
            )?)
        },
        || {
            let mut out = format!("strategy {}\n", c.strategy.name());
            for (label, names, m) in rows {
                out.push_str(&format!(
                    "{label} ({} features): accuracy {}±{}, rank {:.2}±{:.2}, # of 1s {:.2}\n",
                    names.len(),
                    fmt(m.avg_accuracy.mean),
                    fmt(m.avg_accuracy.std),
                    m.avg_rank.mean,
                    m.avg_rank.std,
                    m.n_rank1_hits.mean
                ));
            }
            out.push_str(&format!(
                "paired t-test over {} corpora: mean difference {}, t = {:.4}, df = {}, p = {:.4}\n",
                c.test.n,
                fmt(c.test.mean_difference),
                c.test.t,
                c.test.df,
                c.test.p_value
            ));
            out
        },
    )
}

fn eval_reps(a: EvalRepsArgs) -> Result<()> {
    let (res, _) = resources(a.resources.lexicon.as_deref(), a.resources.vectors.as_deref())?;
    let reg = registry(&a.resources, &res)?;
    reg.check_resources(&res)?;
    let corpus = load_one(&a.corpus.corpus, a.corpus.cap)?;
    let cfg = eval_config(a.folds, a.seed)?;
    check_fold_feasibility(&corpus, cfg.folds)?;
    let canonical = corpus.canonicalized();
    let cells = reg
        .specs()
        .iter()
        .map(|s| {
            evaluate_representation(&canonical, s, &res, &cfg).with_context(|| format!("r{} {}", s.id, s.describe()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ranks = rank_row(&cells.iter().map(|c| c.accuracy).collect::<Vec<_>>());
    emit(
        &a.output,
        || {
            Ok(json!({
                "corpus": corpus.name(),
                "folds": cfg.folds,
                "seed": cfg.seed,
                "results": reg.specs().iter().zip(&cells).zip(&ranks).map(|((s, c), r)| json!({
                    "id": s.id,
                    "representation": s.describe(),
                    "accuracy": c.accuracy,
                    "rank": r,
                    "failed": c.failed,
                })).collect::<Vec<_>>(),
            }))
        },
        || {
            Ok(to_csv(
                &["id", "representation", "accuracy", "rank", "failed"],
                reg.specs().iter().zip(&cells).zip(&ranks).map(|((s, c), r)| {
                    vec![s.id.to_string(), s.describe(), c.accuracy.to_string(), r.to_string(), c.failed.to_string()]
                }),
            )?)
        },
        || {
            let width = reg.specs().iter().map(|s| s.describe().len()).max().unwrap_or(0);
            let mut out = format!("{:>3}  {:width$}  {:>8}  {:>5}\n", "id", "representation", "accuracy", "rank");
            for ((s, c), r) in reg.specs().iter().zip(&cells).zip(&ranks) {
                let acc = if c.failed { "failed".to_owned() } else { fmt(c.accuracy) };
                out.push_str(&format!("{:>3}  {:width$}  {acc:>8}  {r:>5}\n", s.id, s.describe()));
            }
            out
        },
    )
}
