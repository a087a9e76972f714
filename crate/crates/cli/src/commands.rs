use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use trailaug::annindex::{recall_at_k, spread_queries, AnnError, LshConfig, LshIndex};
use trailaug::convmodel::{EvalResult, Evaluator, ModelError, Partition, Provenance, SeedList, SeedListError, Split};
use trailaug::datamodel::{load_corpus, save_corpus, CorpusError};
use trailaug::embed::{load_embeddings, save_embeddings, train_with_report, EmbedError, EmbeddingFileError};
use trailaug::infotheory::{self, EntropyError, OrgParams};
use trailaug::seedexp::{self, ExpansionTrace, SeedExpError};
use trailaug::synthgen::{self, GroundTruth, SynthError};
use trailaug::TrailCorpus;

use crate::config::PipelineConfig;
use crate::report::{self, Table1Row};
use crate::{
    CliError, Common, EmbedArgs, EntropyArgs, EntropyEmpiricalArgs, ExpandArgs, GenArgs, IndexCheckArgs, ModelArgs,
    ReproArgs, SeedlistInitArgs,
};

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        usage(e)
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::InvalidParams { .. } => usage(e),
            _ => runtime(e),
        }
    }
}

impl From<AnnError> for CliError {
    fn from(e: AnnError) -> Self {
        match e {
            AnnError::InvalidParams { .. } => usage(e),
            _ => runtime(e),
        }
    }
}

impl From<SeedExpError> for CliError {
    fn from(e: SeedExpError) -> Self {
        match e {
            SeedExpError::InvalidParams { .. } => usage(e),
            SeedExpError::Index(e) => e.into(),
            _ => runtime(e),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidSplit(_) => usage(e),
            _ => runtime(e),
        }
    }
}

impl From<EntropyError> for CliError {
    fn from(e: EntropyError) -> Self {
        usage(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        runtime(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        runtime(e)
    }
}

fn config(common: &Common) -> Result<PipelineConfig, CliError> {
    PipelineConfig::load_or_default(common.config.as_deref())
}

fn pick(flag: &Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    flag.clone().or_else(|| fallback.clone()).ok_or_else(|| usage(format!("missing --{what}")))
}

fn existing(path: &Path) -> Result<&Path, CliError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(usage(format!("missing input file {}", path.display())))
    }
}

/// Refuses to write over any input.
fn guard(outputs: &[&Path], inputs: &[&Path]) -> Result<(), CliError> {
    let canon = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    for o in outputs {
        for i in inputs {
            if canon(o) == canon(i) {
                return Err(usage(format!("output {} would overwrite an input", o.display())));
            }
        }
    }
    Ok(())
}

fn read_corpus(path: &Path) -> Result<TrailCorpus, CliError> {
    load_corpus(existing(path)?).map_err(|e| match e {
        CorpusError::Io(e) => runtime(format!("{}: {e}", path.display())),
        e => runtime(format!("{}: {e}", path.display())),
    })
}

fn read_seeds(path: &Path) -> Result<SeedList, CliError> {
    SeedList::load(existing(path)?).map_err(|e| match e {
        SeedListError::Io(e) => runtime(format!("{}: {e}", path.display())),
        e => runtime(format!("{}: {e}", path.display())),
    })
}

fn read_embeddings(path: &Path) -> Result<trailaug::embed::EmbeddingTable, CliError> {
    load_embeddings(existing(path)?).map_err(|e| match e {
        EmbeddingFileError::Io(e) => runtime(format!("{}: {e}", path.display())),
        e => runtime(format!("{}: {e}", path.display())),
    })
}

fn read_truth(path: &Path) -> Result<GroundTruth, CliError> {
    let text = fs::read_to_string(existing(path)?)?;
    serde_json::from_str(&text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn write_truth(truth: &GroundTruth, path: &Path) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, truth).map_err(runtime)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes to `path`, or stdout when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_rows<T: Serialize>(header: &[&str], rows: &[T], w: impl Write) -> Result<(), CliError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn gen(a: GenArgs) -> Result<(), CliError> {
    let mut cfg = config(&a.common)?;
    let s = &mut cfg.synth;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { s.$f = v; } )* };
    }
    set!(k, r, n, p_o, type2_fraction, n_relevant, n_noise, trail_len);
    if let Some(seed) = a.common.seed {
        s.rng_seed = seed;
    }
    cfg.synth.validate()?;
    let out = pick(&a.common.out, &cfg.paths.corpus, "out")?;
    let truth_path = pick(&a.truth, &cfg.paths.truth, "truth")?;
    let (corpus, truth) = synthgen::generate(&cfg.synth)?;
    save_corpus(&corpus, &out)?;
    write_truth(&truth, &truth_path)?;
    Ok(())
}

pub fn embed(a: EmbedArgs) -> Result<(), CliError> {
    let mut cfg = config(&a.common)?;
    let p = &mut cfg.embed;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { p.$f = v; } )* };
    }
    set!(dim, epochs, window, negatives, min_count);
    if let Some(seed) = a.common.seed {
        p.rng_seed = seed;
    }
    if a.deterministic {
        p.deterministic = true;
    }
    if a.parallel {
        p.deterministic = false;
    }
    p.validate()?;
    let corpus_path = pick(&a.corpus, &cfg.paths.corpus, "corpus")?;
    let out = pick(&a.common.out, &cfg.paths.embeddings, "out")?;
    guard(&[&out], &[&corpus_path])?;
    let corpus = read_corpus(&corpus_path)?;
    let (table, report) = train_with_report(&corpus, &cfg.embed)?;
    save_embeddings(&table, &out)?;
    let losses: Vec<String> = report.epoch_losses.iter().map(|l| format!("{l:.5}")).collect();
    eprintln!("vocab {} sentences {} epoch losses {}", report.vocab_size, report.sentences, losses.join(" "));
    Ok(())
}

#[derive(Serialize)]
struct RecallRow {
    n_tables: usize,
    n_planes: usize,
    queries: usize,
    k: usize,
    recall: f64,
}

pub fn index_check(a: IndexCheckArgs) -> Result<(), CliError> {
    let cfg = config(&a.common)?;
    let mut lsh = cfg.lsh;
    if let Some(t) = a.n_tables {
        lsh.n_tables = t;
    }
    if let Some(p) = a.n_planes {
        lsh.n_planes = p;
    }
    if let Some(seed) = a.common.seed {
        lsh.rng_seed = seed;
    }
    lsh.validate()?;
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let path = pick(&a.embeddings, &cfg.paths.embeddings, "embeddings")?;
    let table = read_embeddings(&path)?;
    let queries = spread_queries(table.len(), a.queries);
    let mut counts: Vec<usize> = std::iter::successors(Some(1usize), |t| Some(t * 2)).take_while(|&t| t < lsh.n_tables).collect();
    counts.push(lsh.n_tables);
    let mut rows = Vec::new();
    for n_tables in counts {
        let index = LshIndex::build(&table, LshConfig { n_tables, ..lsh })?;
        let recall = recall_at_k(&index, &queries, a.k)?;
        rows.push(RecallRow { n_tables, n_planes: lsh.n_planes, queries: queries.len(), k: a.k, recall });
    }
    write_rows(&["n_tables", "n_planes", "queries", "k", "recall"], &rows, sink(a.common.out.as_deref())?)
}

pub fn seedlist_init(a: SeedlistInitArgs) -> Result<(), CliError> {
    let cfg = config(&a.common)?;
    let mut p = cfg.expansion;
    if let Some(k) = a.k_initial {
        p.k_initial = k;
    }
    if let Some(m) = a.min_support {
        p.min_support = m;
    }
    if let Some(d) = a.window_days {
        p.label_window_seconds = d * 86_400;
    }
    p.validate()?;
    let corpus_path = pick(&a.corpus, &cfg.paths.corpus, "corpus")?;
    let out = pick(&a.common.out, &cfg.paths.seeds, "out")?;
    let include = a.include.or(cfg.paths.include);
    let exclude = a.exclude.or(cfg.paths.exclude);
    let mut inputs: Vec<&Path> = vec![&corpus_path];
    inputs.extend(include.as_deref());
    inputs.extend(exclude.as_deref());
    guard(&[&out], &inputs)?;

    let corpus = read_corpus(&corpus_path)?;
    let include = include.as_deref().map(read_seeds).transpose()?.unwrap_or_default();
    let exclude = exclude.as_deref().map(read_seeds).transpose()?.unwrap_or_default();
    let seeds = seedexp::initial_seedlist(&corpus, &p, &include, &exclude)?;
    seeds.save(&out)?;
    if let Some(t) = a.truth.as_deref() {
        let truth = read_truth(t)?;
        let hits = seeds.activities().iter().filter(|a| truth.relevant_activities.contains(*a)).count();
        eprintln!("precision {:.4} ({hits}/{})", hits as f64 / seeds.len() as f64, seeds.len());
    }
    Ok(())
}

fn run_expansion(
    cfg: &PipelineConfig,
    corpus: &TrailCorpus,
    table: &trailaug::embed::EmbeddingTable,
    initial: &SeedList,
) -> Result<(Split, SeedList, ExpansionTrace), CliError> {
    let split = Split::by_cluster(corpus, cfg.split.fractions(), cfg.split.seed)?;
    let (seeds, trace) =
        seedexp::expand(corpus, initial, &cfg.expansion, table, &split, cfg.lr, cfg.split.cutoff_seed)?;
    Ok((split, seeds, trace))
}

fn write_expansion(dir: &Path, seeds: &SeedList, trace: &ExpansionTrace) -> Result<(), CliError> {
    seeds.save(dir.join("seeds.txt"))?;
    report::write_trace(trace, BufWriter::new(File::create(dir.join("trace.csv"))?))?;
    Ok(())
}

pub fn expand(a: ExpandArgs) -> Result<(), CliError> {
    let mut cfg = config(&a.common)?;
    let p = &mut cfg.expansion;
    if let Some(v) = a.delta_sim {
        p.delta_sim = v;
    }
    if let Some(v) = a.delta_nbr {
        p.delta_nbr = v;
    }
    if let Some(v) = a.epsilon {
        p.epsilon = v;
    }
    if let Some(v) = a.max_iterations {
        p.max_iterations = v;
    }
    if let Some(seed) = a.common.seed {
        cfg.split.seed = seed;
        cfg.split.cutoff_seed = seed;
        cfg.lr.rng_seed = seed;
        cfg.expansion.lsh_seed = seed;
    }
    cfg.expansion.validate()?;
    let corpus_path = pick(&a.corpus, &cfg.paths.corpus, "corpus")?;
    let emb_path = pick(&a.embeddings, &cfg.paths.embeddings, "embeddings")?;
    let seeds_path = pick(&a.seeds, &cfg.paths.seeds, "seeds")?;
    let dir = pick(&a.common.out, &cfg.paths.out, "out")?;
    let corpus = read_corpus(&corpus_path)?;
    let table = read_embeddings(&emb_path)?;
    let initial = read_seeds(&seeds_path)?;
    fs::create_dir_all(&dir)?;
    guard(&[&dir.join("seeds.txt"), &dir.join("trace.csv")], &[&corpus_path, &emb_path, &seeds_path])?;
    let (_, seeds, trace) = run_expansion(&cfg, &corpus, &table, &initial)?;
    write_expansion(&dir, &seeds, &trace)
}

#[derive(Serialize)]
struct ModelRow {
    seed_iteration: u32,
    auc: f64,
    n_features: usize,
    relevant_users_per_converted_cluster: f64,
}

impl ModelRow {
    fn new(seeds: &SeedList, r: &EvalResult) -> Self {
        Self {
            seed_iteration: seeds.last_iteration().unwrap_or(0),
            auc: r.auc,
            n_features: r.n_features,
            relevant_users_per_converted_cluster: r.relevant_users_per_converted_cluster,
        }
    }
}

const MODEL_HEADER: [&str; 4] = ["seed_iteration", "auc", "n_features", "relevant_users_per_converted_cluster"];

pub fn model(a: ModelArgs, part: Partition) -> Result<(), CliError> {
    let mut cfg = config(&a.common)?;
    if let Some(v) = a.learning_rate {
        cfg.lr.learning_rate = v;
    }
    if let Some(v) = a.l2 {
        cfg.lr.l2 = v;
    }
    if let Some(v) = a.epochs {
        cfg.lr.epochs = v;
    }
    if let Some(seed) = a.common.seed {
        cfg.split.seed = seed;
        cfg.split.cutoff_seed = seed;
        cfg.lr.rng_seed = seed;
    }
    let corpus_path = pick(&a.corpus, &cfg.paths.corpus, "corpus")?;
    let seeds_path = a.seeds.clone().or(cfg.paths.seeds.clone());
    let mut inputs: Vec<&Path> = vec![&corpus_path];
    inputs.extend(seeds_path.as_deref());
    let mut outputs: Vec<&Path> = a.common.out.iter().map(PathBuf::as_path).collect();
    outputs.extend(a.model.as_deref());
    guard(&outputs, &inputs)?;

    let corpus = read_corpus(&corpus_path)?;
    let seeds = seeds_path.as_deref().map(read_seeds).transpose()?.unwrap_or_default();
    let split = Split::by_cluster(&corpus, cfg.split.fractions(), cfg.split.seed)?;
    let evaluator = Evaluator::new(&corpus, &split, cfg.lr, cfg.split.cutoff_seed)?;
    let result = evaluator.evaluate(&seeds, part)?;
    if let Some(path) = a.model.as_deref() {
        let (model, vocab, _) = evaluator.fit(&seeds)?;
        let weights: serde_json::Map<String, serde_json::Value> =
            vocab.ids().iter().zip(&model.weights).map(|(id, w)| (id.to_string(), (*w).into())).collect();
        let doc = serde_json::json!({ "bias": model.bias, "hyper": model.hyper, "weights": weights });
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &doc).map_err(runtime)?;
        writeln!(w)?;
        w.flush()?;
    }
    write_rows(&MODEL_HEADER, &[ModelRow::new(&seeds, &result)], sink(a.common.out.as_deref())?)
}

pub fn entropy(a: EntropyArgs) -> Result<(), CliError> {
    let rows = infotheory::sweep(a.p_o, a.r, a.s.0..=a.s.1)?;
    if let Some(svg) = a.svg.as_deref() {
        fs::write(svg, report::fig3_svg(&rows))?;
    }
    report::write_sweep(&rows, sink(a.common.out.as_deref())?)?;
    Ok(())
}

#[derive(Serialize)]
struct EntropyRow {
    augmented: bool,
    h_bits: f64,
    closed_form_bits: Option<f64>,
    users: u64,
    r1_users: u64,
    r1_converted: u64,
    r0_users: u64,
    r0_converted: u64,
    note: String,
}

const ENTROPY_HEADER: [&str; 9] =
    ["augmented", "h_bits", "closed_form_bits", "users", "r1_users", "r1_converted", "r0_users", "r0_converted", "note"];

/// Parameters of the toy corpus: two organizations of three, one converts.
fn toy_params() -> OrgParams {
    OrgParams::new(0.5, 3, 1).expect("valid")
}

fn entropy_row(corpus: &TrailCorpus, seeds: &SeedList, augmented: bool, toy: bool) -> EntropyRow {
    let st = infotheory::empirical_strata(corpus, seeds, augmented);
    let closed = toy.then(|| {
        let p = toy_params();
        if augmented {
            infotheory::cond_entropy_after(p.p_o(), p.s()).expect("valid")
        } else {
            infotheory::cond_entropy_before(&p)
        }
    });
    let note = if toy && !augmented {
        let p = toy_params();
        let q = p.p_o() / (f64::from(p.s()) - f64::from(p.r()) * p.p_o());
        format!(
            "unweighted H(B({q})) = {:.4} omits the P(R=0) = {:.4} weight; H(C|R) = {:.4}",
            infotheory::binary_entropy(q).expect("valid"),
            1.0 - f64::from(p.r()) * p.p_o() / f64::from(p.s()),
            st.cond_entropy()
        )
    } else {
        String::new()
    };
    EntropyRow {
        augmented,
        h_bits: st.cond_entropy(),
        closed_form_bits: closed,
        users: st.total(),
        r1_users: st.r1,
        r1_converted: st.r1_converted,
        r0_users: st.r0,
        r0_converted: st.r0_converted,
        note,
    }
}

pub fn entropy_empirical(a: EntropyEmpiricalArgs) -> Result<(), CliError> {
    let cfg = config(&a.common)?;
    let (corpus, seeds) = if a.fig2 {
        let (c, t) = synthgen::toy_corpus();
        (c, t.oracle_seed())
    } else {
        let corpus_path = pick(&a.corpus, &cfg.paths.corpus, "corpus")?;
        let corpus = read_corpus(&corpus_path)?;
        let seeds = match (a.seeds.as_deref(), a.truth.as_deref()) {
            (Some(s), _) => read_seeds(s)?,
            (None, Some(t)) => read_truth(t)?.oracle_seed(),
            (None, None) => match cfg.paths.seeds.as_deref() {
                Some(s) => read_seeds(s)?,
                None => return Err(usage("missing --seeds or --truth")),
            },
        };
        (corpus, seeds)
    };
    let row = entropy_row(&corpus, &seeds, a.augmented, a.fig2);
    write_rows(&ENTROPY_HEADER, &[row], sink(a.common.out.as_deref())?)
}

/// Seed list after each trace record: `S_0`, then `S_{i-1} ∪ N_i`.
fn trace_lists(initial: &SeedList, trace: &ExpansionTrace) -> Vec<(usize, SeedList)> {
    let mut out = Vec::new();
    let mut current = initial.clone();
    for (i, r) in trace.records.iter().enumerate() {
        let candidate = if r.iteration == 0 { current.clone() } else { current.union(r.added.iter(), Provenance::Iteration(r.iteration)) };
        if r.auc.is_some() {
            out.push((i, candidate.clone()));
        }
        if r.accepted {
            current = candidate;
        }
    }
    out
}

pub fn repro(a: ReproArgs) -> Result<(), CliError> {
    let mut cfg = match a.common.config.as_deref() {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::desk_scale(),
    };
    if let Some(seed) = a.common.seed {
        cfg.reseed(seed);
    }
    cfg.synth.validate()?;
    cfg.embed.validate()?;
    cfg.expansion.validate()?;
    let dir = pick(&a.common.out, &cfg.paths.out, "out")?;
    fs::create_dir_all(&dir)?;
    let path = |name: &str| dir.join(name);

    fs::write(path("config.toml"), cfg.to_toml())?;
    let (corpus, truth) = synthgen::generate(&cfg.synth)?;
    save_corpus(&corpus, path("corpus.jsonl"))?;
    write_truth(&truth, &path("truth.json"))?;

    let (table, _) = train_with_report(&corpus, &cfg.embed)?;
    save_embeddings(&table, path("vecs.txt"))?;

    let read_opt = |p: &Option<PathBuf>| p.as_deref().map(read_seeds).transpose().map(Option::unwrap_or_default);
    let include = read_opt(&cfg.paths.include)?;
    let exclude = read_opt(&cfg.paths.exclude)?;
    let initial = seedexp::initial_seedlist(&corpus, &cfg.expansion, &include, &exclude)?;
    initial.save(path("seeds_initial.txt"))?;

    let (split, seeds, trace) = run_expansion(&cfg, &corpus, &table, &initial)?;
    seeds.save(path("seeds_final.txt"))?;
    report::write_trace(&trace, BufWriter::new(File::create(path("trace.csv"))?))?;

    let evaluator = Evaluator::new(&corpus, &split, cfg.lr, cfg.split.cutoff_seed)?;
    let baseline = evaluator.evaluate(&SeedList::new(), Partition::Test)?;
    let oracle = evaluator.evaluate(&truth.oracle_seed(), Partition::Test)?;
    let start = initial.clone().without_conversions(&corpus);
    let mut table1 = Vec::new();
    for (i, list) in trace_lists(&start, &trace) {
        let r = evaluator.evaluate(&list, Partition::Test)?;
        let rec = &trace.records[i];
        table1.push(Table1Row {
            iteration: rec.iteration,
            auc_lift_pct: report::auc_lift_pct(r.auc, baseline.auc),
            n_activities_lift_pct: report::size_lift_pct(list.len(), start.len()),
            relevant_users_per_converted_cluster: r.relevant_users_per_converted_cluster,
            accepted: rec.accepted,
        });
    }
    report::write_table1(&table1, BufWriter::new(File::create(path("table1.csv"))?))?;
    fs::write(path("fig4.svg"), report::fig4_svg(&table1))?;

    let final_eval = evaluator.evaluate(&seeds, Partition::Test)?;
    let eval_rows = [
        ModelRow::new(&SeedList::new(), &baseline),
        ModelRow::new(&seeds, &final_eval),
    ];
    write_rows(&MODEL_HEADER, &eval_rows, BufWriter::new(File::create(path("eval.csv"))?))?;

    let sweep = infotheory::sweep(0.1, 1, 3..=50)?;
    report::write_sweep(&sweep, BufWriter::new(File::create(path("sweep.csv"))?))?;
    fs::write(path("fig3.svg"), report::fig3_svg(&sweep))?;

    let (toy, toy_truth) = synthgen::toy_corpus();
    let toy_seed = toy_truth.oracle_seed();
    let oracle_seed = truth.oracle_seed();
    let entropy_rows = [
        entropy_row(&toy, &toy_seed, false, true),
        entropy_row(&toy, &toy_seed, true, true),
        entropy_row(&corpus, &oracle_seed, false, false),
        entropy_row(&corpus, &oracle_seed, true, false),
    ];
    write_rows(&ENTROPY_HEADER, &entropy_rows, BufWriter::new(File::create(path("entropy_empirical.csv"))?))?;

    let recovered = seeds.activities().iter().filter(|a| truth.relevant_activities.contains(*a)).count();
    let mut summary = String::new();
    summary.push_str(&format!("corpus: {} users, {} clusters, {} converters\n", corpus.len(), corpus.n_clusters(), corpus.n_converters()));
    summary.push_str(&format!("embeddings: {} activities, dim {}\n", table.len(), table.dim()));
    summary.push_str(&format!("initial seed list: {} activities\n", initial.len()));
    summary.push_str(&format!(
        "expanded seed list: {} activities, {} planted, stop {}\n",
        seeds.len(),
        recovered,
        trace.stop.as_str()
    ));
    summary.push_str(&format!(
        "test AUC: empty {:.4}, expanded {:.4}, planted {:.4}\n",
        baseline.auc, final_eval.auc, oracle.auc
    ));
    for r in &entropy_rows[..2] {
        summary.push_str(&format!("toy H(C|R) augmented={}: {:.4} bits\n", r.augmented, r.h_bits));
    }
    if !entropy_rows[0].note.is_empty() {
        summary.push_str(&format!("note: {}\n", entropy_rows[0].note));
    }
    fs::write(path("summary.txt"), summary)?;
    Ok(())
}
