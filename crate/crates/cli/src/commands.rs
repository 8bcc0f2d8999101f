use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use asymgraph::coldstart::{attach_and_embed, recommend_for_cold, ColdStartConfig};
use asymgraph::config::KvFile;
use asymgraph::eval::{evaluate, make_split, EvalInputs, SplitKind, SplitRatios, Task};
use asymgraph::features::read_features;
use asymgraph::graph::{keys_from_records, read_edge_records, write_edges};
use asymgraph::model::{embed_all, write_embeddings};
use asymgraph::retrieval::{EmbeddingIndex, Filter, IndexMode, QueryMode, Scored};
use asymgraph::synth::{generate, SynthConfig};
use asymgraph::trainer::{LogRow, TrainConfig, TrainState, Trainer};
use asymgraph::{DirectedProductGraph, FeatureRows, KeyMap, NodeId, RelationKind};
use clap::{Args, ValueEnum};

use crate::io::{load_embeddings, load_features, load_graph, load_params, read_text, write_atomic};
use crate::manifest::ManifestWriter;
use crate::UsageError;

pub const MODEL_FILE: &str = "model.bin";
pub const STATE_FILE: &str = "state.bin";
pub const CONFIG_FILE: &str = "config.txt";
pub const LOG_FILE: &str = "training_log.tsv";
pub const EPOCHS_FILE: &str = "epochs.tsv";
pub const EMBEDDINGS_FILE: &str = "embeddings.tsv";
pub const GRAPH_FILE: &str = "train_graph.tsv";

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn seeds(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

// ---------------------------------------------------------------- synth

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `key = value` generator config; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn synth(a: &SynthArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => {
            let mut kv = KvFile::parse(&read_text(p)?, &p.display().to_string())?;
            let c = SynthConfig::from_kv(&mut kv)?;
            kv.finish()?;
            c
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let inputs: Vec<&Path> = a.config.iter().map(PathBuf::as_path).collect();
    let m = ManifestWriter::start(&a.out, "synth", cfg.to_kv(), seeds(&[("synth", cfg.seed)]), &inputs)?;
    let s = generate(&cfg)?;
    log::info!("synthetic graph: {:?}", s.graph.stats());
    write_atomic(&a.out.join("edges.tsv"), |w| s.write_edges(w))?;
    write_atomic(&a.out.join("features.tsv"), |w| s.write_features(w))?;
    write_atomic(&a.out.join("ground_truth.tsv"), |w| s.write_ground_truth(w))?;
    std::fs::write(a.out.join("config.txt"), cfg.to_kv())?;
    m.finish(&["edges.tsv", "features.tsv", "ground_truth.tsv", "config.txt"])
}

// ---------------------------------------------------------------- build-graph

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Fixes the product universe and id order; without it ids follow first appearance.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn build_graph(a: &BuildGraphArgs) -> Result<()> {
    let mut inputs = vec![a.edges.as_path()];
    inputs.extend(a.features.as_deref());
    let m = ManifestWriter::start(&a.out, "build-graph", String::new(), BTreeMap::new(), &inputs)?;
    let records = read_edge_records(
        io::BufReader::new(File::open(&a.edges).with_context(|| format!("opening {}", a.edges.display()))?),
        &a.edges.display().to_string(),
    )?;
    let keys = match &a.features {
        Some(p) => load_features(p)?.0,
        None => keys_from_records(&records),
    };
    let g = asymgraph::graph::ingest(&records, &keys)?;
    let stats = g.stats();
    log::info!("graph: {stats:?}");
    write_atomic(&a.out.join("graph.tsv"), |w| write_edges(w, &g, &keys))?;
    std::fs::write(
        a.out.join("stats.txt"),
        format!(
            "num_nodes = {}\ncp_edges = {}\ncv_pairs = {}\none_way_cp_edges = {}\navg_degree = {:.6}\ndirected_share = {:.6}\n",
            stats.num_nodes,
            stats.cp_edges,
            stats.cv_pairs,
            stats.one_way_cp_edges,
            stats.avg_degree,
            stats.directed_share
        ),
    )?;
    m.finish(&["graph.tsv", "stats.txt"])
}

// ---------------------------------------------------------------- train

/// Held-out split settings stored alongside the training config.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub kind: Option<SplitKind>,
    pub seed: u64,
    pub use_cv: bool,
    pub ratios: SplitRatios,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            kind: Some(SplitKind::Edge),
            seed: 0,
            use_cv: true,
            ratios: SplitRatios::default(),
        }
    }
}

impl SplitSpec {
    fn from_kv(kv: &mut KvFile) -> Result<Self> {
        let mut s = Self::default();
        if let Some(k) = kv.take::<String>("split")? {
            s.kind = match k.as_str() {
                "none" => None,
                other => Some(other.parse().map_err(|e: String| asymgraph::Error::Config(e))?),
            };
        }
        if let Some(v) = kv.take("split_seed")? {
            s.seed = v;
        }
        if let Some(v) = kv.take("use_cv")? {
            s.use_cv = v;
        }
        if let Some(v) = kv.take("train_ratio")? {
            s.ratios.train = v;
        }
        if let Some(v) = kv.take("val_ratio")? {
            s.ratios.val = v;
        }
        if let Some(v) = kv.take("test_ratio")? {
            s.ratios.test = v;
        }
        s.ratios.validate()?;
        Ok(s)
    }

    fn to_kv(&self) -> String {
        format!(
            "split = {}\nsplit_seed = {}\nuse_cv = {}\ntrain_ratio = {:?}\nval_ratio = {:?}\ntest_ratio = {:?}\n",
            self.kind.map_or_else(|| "none".to_string(), |k| k.to_string()),
            self.seed,
            self.use_cv,
            self.ratios.train,
            self.ratios.val,
            self.ratios.test
        )
    }
}

/// Parses a training config file: trainer keys plus split keys.
pub fn parse_train_config(text: &str, path: &str) -> Result<(TrainConfig, SplitSpec)> {
    let mut kv = KvFile::parse(text, path)?;
    let split = SplitSpec::from_kv(&mut kv)?;
    let cfg = TrainConfig::from_kv(&mut kv)?;
    kv.finish()?;
    Ok((cfg, split))
}

fn config_text(cfg: &TrainConfig, split: &SplitSpec) -> String {
    format!("{}{}", cfg.to_kv(), split.to_kv())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// `key = value` training config; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from `state.bin` in the output directory.
    #[arg(long)]
    pub resume: bool,
}

/// The graph a model is trained on and the edges used for early stopping.
fn training_view(
    g: &DirectedProductGraph,
    split: &SplitSpec,
) -> Result<(DirectedProductGraph, Vec<(NodeId, NodeId)>)> {
    Ok(match split.kind {
        None => (g.clone(), Vec::new()),
        Some(kind) => {
            let s = make_split(kind, g, split.ratios, split.seed)?;
            // Validation queries of a node split are isolated in the training
            // graph, so their MRR is always zero; train to the epoch budget.
            let val = if kind == SplitKind::Node {
                log::info!("node split: validation edges unused, training runs to max_epochs");
                Vec::new()
            } else {
                s.val_cp.clone()
            };
            (s.train_graph(split.use_cv), val)
        }
    })
}

fn open_append(path: &Path, fresh: bool) -> Result<BufWriter<File>> {
    let f = if fresh {
        File::create(path)
    } else {
        OpenOptions::new().append(true).open(path)
    }
    .with_context(|| format!("opening {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn train(a: &TrainArgs, seed: Option<u64>) -> Result<()> {
    let (mut cfg, split) = match &a.config {
        Some(p) => parse_train_config(&read_text(p)?, &p.display().to_string())?,
        None => (TrainConfig::default(), SplitSpec::default()),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let text = config_text(&cfg, &split);

    if a.resume {
        let saved = read_text(&a.out.join(CONFIG_FILE))?;
        let (mut old, old_split) = parse_train_config(&saved, CONFIG_FILE)?;
        // Extending the epoch budget is the point of resuming.
        old.max_epochs = cfg.max_epochs;
        old.patience = cfg.patience;
        if old != cfg || old_split != split {
            return Err(usage(format!(
                "--resume: configuration differs from {}",
                a.out.join(CONFIG_FILE).display()
            )));
        }
    }

    let mut inputs = vec![a.graph.as_path(), a.features.as_path()];
    inputs.extend(a.config.as_deref());
    let m = ManifestWriter::start(
        &a.out,
        "train",
        text.clone(),
        seeds(&[("train", cfg.seed), ("split", split.seed)]),
        &inputs,
    )?;

    let (keys, features) = load_features(&a.features)?;
    let g = load_graph(&a.graph, &keys)?;
    let (tg, val) = training_view(&g, &split)?;
    log::info!(
        "training on {} co-purchase edges ({} validation), {} co-view pairs",
        tg.num_cp_edges(),
        val.len(),
        tg.num_cv_pairs()
    );
    std::fs::write(a.out.join(CONFIG_FILE), &text)?;

    let trainer = Trainer::new(&tg, &features, &val, cfg.clone())?;
    let mut state = if a.resume {
        let p = a.out.join(STATE_FILE);
        let f = File::open(&p).with_context(|| format!("opening {}", p.display()))?;
        let st = TrainState::read(io::BufReader::new(f), &cfg)?;
        log::info!("resuming after epoch {}", st.epoch);
        st
    } else {
        trainer.init_state()?
    };
    // A resumed run that was stopped early may continue only if the budget grew.
    if a.resume && state.epoch < cfg.max_epochs && state.epochs_since_best < cfg.patience {
        state.stopped = false;
    }

    let mut log_w = open_append(&a.out.join(LOG_FILE), !a.resume)?;
    let mut ep_w = open_append(&a.out.join(EPOCHS_FILE), !a.resume)?;
    if !a.resume {
        writeln!(log_w, "{}", LogRow::HEADER)?;
        writeln!(ep_w, "epoch\tmean_loss\tval_mrr10\timproved")?;
    }
    while !state.stopped && state.epoch < cfg.max_epochs {
        let mut io_err = None;
        let next = state.epoch + 1;
        let summary = trainer.run_until(&mut state, next, &mut |r| {
            if let Err(e) = writeln!(log_w, "{}", r.to_tsv()) {
                io_err.get_or_insert(e);
            }
        })?;
        if let Some(e) = io_err {
            return Err(e).context("writing training log");
        }
        for s in &summary {
            let val = s.val_mrr.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
            log::debug!("epoch {} mean loss {:.6} val MRR@10 {}", s.epoch, s.mean_loss, val);
            writeln!(ep_w, "{}\t{:.6}\t{}\t{}", s.epoch, s.mean_loss, val, s.improved)?;
        }
        log_w.flush()?;
        ep_w.flush()?;
        write_atomic(&a.out.join(STATE_FILE), |w| state.write(w))?;
    }

    let params = &state.best_params;
    write_atomic(&a.out.join(MODEL_FILE), |w| params.write_checkpoint(w))?;
    let emb = embed_all(&tg, &features, params, cfg.eval_batch_size)?;
    write_atomic(&a.out.join(EMBEDDINGS_FILE), |w| write_embeddings(w, &keys, &emb))?;
    write_atomic(&a.out.join(GRAPH_FILE), |w| write_edges(w, &tg, &keys))?;
    m.finish(&[
        CONFIG_FILE,
        LOG_FILE,
        EPOCHS_FILE,
        STATE_FILE,
        MODEL_FILE,
        EMBEDDINGS_FILE,
        GRAPH_FILE,
    ])
}

// ---------------------------------------------------------------- embed

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Training output directory holding `model.bin`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub batch_size: usize,
}

pub fn embed(a: &EmbedArgs) -> Result<()> {
    let model_path = a.model.join(MODEL_FILE);
    let m = ManifestWriter::start(
        &a.out,
        "embed",
        format!("batch_size = {}\n", a.batch_size),
        BTreeMap::new(),
        &[&model_path, &a.graph, &a.features],
    )?;
    let params = load_params(&model_path)?;
    let (keys, features) = load_features(&a.features)?;
    let g = load_graph(&a.graph, &keys)?;
    if a.batch_size == 0 {
        return Err(usage("--batch-size must be >= 1"));
    }
    let emb = embed_all(&g, &features, &params, a.batch_size)?;
    write_atomic(&a.out.join(EMBEDDINGS_FILE), |w| write_embeddings(w, &keys, &emb))?;
    write_atomic(&a.out.join(GRAPH_FILE), |w| write_edges(w, &g, &keys))?;
    m.finish(&[EMBEDDINGS_FILE, GRAPH_FILE])
}

// ---------------------------------------------------------------- recommend

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Related,
    Similar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FilterArg {
    None,
    Query,
    TrainNeighbors,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Directory with `embeddings.tsv` (and `train_graph.tsv` for the train-neighbors filter).
    #[arg(long)]
    pub index: PathBuf,
    /// A product key, or a file with one key per line.
    #[arg(long)]
    pub query: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Related)]
    pub mode: ModeArg,
    /// Defaults to `none` for related and `query` for similar.
    #[arg(long, value_enum)]
    pub filter: Option<FilterArg>,
    /// Use the approximate inverted-file engine with this many lists.
    #[arg(long)]
    pub approx_lists: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub approx_probes: usize,
}

fn load_index(dir: &Path, lists: Option<usize>, probes: usize, seed: u64) -> Result<(KeyMap, EmbeddingIndex)> {
    let (keys, emb) = load_embeddings(&dir.join(EMBEDDINGS_FILE))?;
    let mode = match lists {
        Some(lists) if lists >= 1 && probes >= 1 => IndexMode::Approximate { lists, probes },
        Some(_) => return Err(usage("--approx-lists and --approx-probes must be >= 1")),
        None => IndexMode::Exact,
    };
    Ok((keys, EmbeddingIndex::new(emb, mode, seed)?))
}

fn filter_for<'a>(arg: FilterArg, graph: Option<&'a DirectedProductGraph>) -> Filter<'a> {
    match (arg, graph) {
        (FilterArg::None, _) => Filter::None,
        (FilterArg::Query, _) => Filter::ExcludeQuery,
        (FilterArg::TrainNeighbors, Some(g)) => Filter::ExcludeTrainNeighbors(g),
        (FilterArg::TrainNeighbors, None) => unreachable!("graph loaded for this filter"),
    }
}

fn write_results(out: &mut impl Write, query: &str, results: &[Scored], keys: &KeyMap) -> Result<()> {
    for (rank, s) in results.iter().enumerate() {
        let key = keys.key(s.id).expect("index ids come from the key map");
        writeln!(out, "{query}\t{}\t{key}\t{:.6}", rank + 1, s.score)?;
    }
    Ok(())
}

pub fn recommend(a: &RecommendArgs, seed: Option<u64>) -> Result<()> {
    if a.k == 0 {
        return Err(usage("--k must be >= 1"));
    }
    let (keys, index) = load_index(&a.index, a.approx_lists, a.approx_probes, seed.unwrap_or(0))?;
    let filter_arg = a.filter.unwrap_or(match a.mode {
        ModeArg::Related => FilterArg::None,
        ModeArg::Similar => FilterArg::Query,
    });
    let graph = match filter_arg {
        FilterArg::TrainNeighbors => Some(load_graph(&a.index.join(GRAPH_FILE), &keys)?),
        _ => None,
    };
    let filter = filter_for(filter_arg, graph.as_ref());

    let query_path = Path::new(&a.query);
    let queries: Vec<String> = if query_path.is_file() {
        read_text(query_path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect()
    } else {
        vec![a.query.clone()]
    };
    let ids: Vec<Option<NodeId>> = queries.iter().map(|q| keys.id(q)).collect();
    let known: Vec<NodeId> = ids.iter().flatten().copied().collect();
    let mode = match a.mode {
        ModeArg::Related => QueryMode::Related,
        ModeArg::Similar => QueryMode::Similar,
    };
    let mut results = index.batch_recommend(&known, a.k, mode, filter).into_iter();

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut unknown = Vec::new();
    for (q, id) in queries.iter().zip(&ids) {
        match id {
            Some(_) => {
                let r = results.next().expect("one result per known query")?;
                write_results(&mut out, q, &r, &keys)?;
            }
            None => {
                log::error!("unknown product key {q:?}");
                unknown.push(q.as_str());
            }
        }
    }
    out.flush()?;
    if !unknown.is_empty() {
        return Err(asymgraph::Error::Invalid(format!("{} unknown query key(s): {}", unknown.len(), unknown.join(", "))).into());
    }
    Ok(())
}

// ---------------------------------------------------------------- coldstart

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RelationArg {
    Cv,
    Cp,
}

#[derive(Debug, Args)]
pub struct ColdstartArgs {
    /// Training output directory.
    #[arg(long)]
    pub model: PathBuf,
    /// Warm catalog features (the file the model was trained with).
    #[arg(long)]
    pub features: PathBuf,
    /// Cold products, in feature-file format.
    #[arg(long)]
    pub cold: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub k_sim: usize,
    /// Relation of the attachment edges.
    #[arg(long, value_enum, default_value_t = RelationArg::Cv)]
    pub relation: RelationArg,
}

pub fn coldstart(a: &ColdstartArgs) -> Result<()> {
    if a.k == 0 {
        return Err(usage("--k must be >= 1"));
    }
    if a.k_sim == 0 {
        return Err(usage("--k-sim must be >= 1"));
    }
    let params = load_params(&a.model.join(MODEL_FILE))?;
    let (keys, features) = load_features(&a.features)?;
    let g = load_graph(&a.model.join(GRAPH_FILE), &keys)?;
    let (emb_keys, index) = load_index(&a.model, None, 1, 0)?;
    if emb_keys.keys() != keys.keys() {
        bail!(asymgraph::Error::Invalid(format!(
            "{} does not list the products of {} in the same order",
            a.model.join(EMBEDDINGS_FILE).display(),
            a.features.display()
        )));
    }
    let cold_path = a.cold.display().to_string();
    let (cold_keys, cold) = read_features(
        io::BufReader::new(File::open(&a.cold).with_context(|| format!("opening {cold_path}"))?),
        &cold_path,
    )
    .map_err(|e| match e {
        asymgraph::Error::NonFinite(m) => asymgraph::Error::Invalid(m),
        e => e,
    })?;
    let cfg = ColdStartConfig {
        k_sim: a.k_sim,
        relation: match a.relation {
            RelationArg::Cv => RelationKind::CoView,
            RelationArg::Cp => RelationKind::CoPurchase,
        },
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (i, key) in cold_keys.keys().iter().enumerate() {
        let c = attach_and_embed(&g, &features, &params, cold.row(i), None, &cfg)
            .with_context(|| format!("cold product {key:?}"))?;
        log::debug!(
            "{key}: attached to {:?}",
            c.warm.iter().map(|w| keys.key(w.0).unwrap_or("?")).collect::<Vec<_>>()
        );
        let r = recommend_for_cold(&c.theta_s, &index, a.k, Filter::None)?;
        write_results(&mut out, key, &r, &keys)?;
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- eval

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// node-rec, lp-exist, lp-dir, coldstart or selection-bias.
    #[arg(long, value_parser = parse_task)]
    pub task: Task,
    /// Training output directory.
    #[arg(long)]
    pub model: PathBuf,
    /// The full graph the training split was cut from.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Must match the split the model was trained on.
    #[arg(long)]
    pub split_seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub k_sim: usize,
    /// Also write report.tsv and summary.txt here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval(a: &EvalArgs, seed: Option<u64>) -> Result<()> {
    if a.ks.contains(&0) {
        return Err(usage("--ks values must be >= 1"));
    }
    if a.k_sim == 0 {
        return Err(usage("--k-sim must be >= 1"));
    }
    let config_path = a.model.join(CONFIG_FILE);
    let (cfg, split) = parse_train_config(&read_text(&config_path)?, &config_path.display().to_string())?;
    let wanted = a.task.split_kind();
    match split.kind {
        Some(k) if k == wanted => {}
        Some(k) => {
            return Err(usage(format!(
                "task {} needs a model trained on a {wanted} split; {} was trained on a {k} split",
                a.task.name(),
                a.model.display()
            )))
        }
        None => {
            return Err(usage(format!(
                "{} was trained on the full graph; evaluation needs a held-out split",
                a.model.display()
            )))
        }
    }
    if split.seed != a.split_seed {
        return Err(usage(format!(
            "--split-seed {} differs from the training split seed {}",
            a.split_seed, split.seed
        )));
    }
    let seed = seed.unwrap_or(0);
    let model_path = a.model.join(MODEL_FILE);
    let m = match &a.out {
        Some(dir) => Some(ManifestWriter::start(
            dir,
            "eval",
            format!("task = {}\n{}", a.task.name(), config_text(&cfg, &split)),
            seeds(&[("split", split.seed), ("eval", seed)]),
            &[&model_path, &a.graph, &a.features],
        )?),
        None => None,
    };

    let params = load_params(&model_path)?;
    let (keys, features) = load_features(&a.features)?;
    let g = load_graph(&a.graph, &keys)?;
    let s = make_split(wanted, &g, split.ratios, split.seed)?;
    let report = evaluate(
        a.task,
        &EvalInputs {
            graph: &g,
            features: &features,
            params: &params,
            split: &s,
            use_cv: split.use_cv,
            batch_size: cfg.eval_batch_size,
            seed,
            ks: &a.ks,
            coldstart: ColdStartConfig {
                k_sim: a.k_sim,
                ..ColdStartConfig::default()
            },
        },
    )?;
    let tsv = report.to_tsv();
    print!("{tsv}");
    eprint!("{}", report.summary());
    if let (Some(dir), Some(m)) = (&a.out, m) {
        std::fs::write(dir.join("report.tsv"), &tsv)?;
        std::fs::write(dir.join("summary.txt"), report.summary())?;
        m.finish(&["report.tsv", "summary.txt"])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_config_roundtrip_with_split_keys() {
        let cfg = TrainConfig {
            max_epochs: 3,
            ..TrainConfig::default()
        };
        let split = SplitSpec {
            kind: Some(SplitKind::SelectionBias),
            seed: 7,
            use_cv: false,
            ratios: SplitRatios::default(),
        };
        let (c2, s2) = parse_train_config(&config_text(&cfg, &split), "cfg").unwrap();
        assert_eq!((c2, s2), (cfg, split));
    }

    #[test]
    fn split_none_parses() {
        let (_, s) = parse_train_config("split = none\n", "cfg").unwrap();
        assert_eq!(s.kind, None);
        assert!(parse_train_config("split = sideways\n", "cfg").is_err());
        assert!(parse_train_config("no_such_key = 1\n", "cfg").is_err());
    }
}
