use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use resegment::align::{project_boundaries, wer_counts, WerCounts};
use resegment::augment::{augment_corpus, sample_mixture, AugmentError, AugmentationConfig, BitextPair, CorpusPools};
use resegment::config::{PipelineConfig, Strategy};
use resegment::eval::{
    bucket_report, corpus_stats, make_error_variants, resegment_stats, validate_buckets, BleuConfig, BleuStats,
    LengthBucket, LengthBucketReport, Smoothing,
};
use resegment::formats::{
    decode_utf8, parse_bitext_bytes, parse_documents_bytes, parse_timed_transcripts_bytes, write_bitext,
    write_documents,
};
use resegment::noise::{corrupt_boundaries, corrupt_tokens};
use resegment::rng::sub_seed;
use resegment::segment::{split_fixed_length, split_on_pauses, PauseSplitConfig, TimedTranscript};
use resegment::text::{flatten, normalize_document, tokenize, NormalizationPolicy, SegmentedDocument, Token};
use serde_json::json;

use crate::args::{
    AugmentArgs, BleuArgs, Command, MixArgs, NormalizeArgs, Output, PolicyName, ProjectArgs, ReportArgs,
    ReportFormat, ScoreArgs, SegmentArgs, SegmentStrategy, SimulateArgs, VariantsArgs, WerArgs,
};
use crate::error::{CliError, Result};
use crate::table::Table;

pub struct Context<'a> {
    pub config: PipelineConfig,
    pub format: ReportFormat,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Context<'_> {
    fn emit(&mut self, output: &Output, text: &str) -> Result<()> {
        match &output.output {
            Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Malformed(format!("stdout: {e}"))),
        }
    }

    fn note(&mut self, message: std::fmt::Arguments<'_>) {
        let _ = writeln!(self.stderr, "{message}");
    }

    fn note_seed(&mut self, seed: u64) {
        self.note(format_args!("seed: {seed}"));
    }
}

pub fn dispatch(ctx: &mut Context<'_>, command: Command) -> Result<()> {
    match command {
        Command::Normalize(a) => normalize(ctx, a),
        Command::Segment(a) => segment(ctx, a),
        Command::Project(a) => project(ctx, a),
        Command::Variants(a) => variants(ctx, a),
        Command::Augment(a) => augment(ctx, a),
        Command::Mix(a) => mix(ctx, a),
        Command::Score(a) => score(ctx, a),
        Command::Wer(a) => wer(ctx, a),
        Command::Simulate(a) => simulate(ctx, a),
        Command::Report(a) => report(ctx, a),
    }
}

fn usage(err: impl std::fmt::Display) -> CliError {
    CliError::Usage(err.to_string())
}

fn ensure(condition: bool, what: impl FnOnce() -> String) -> Result<()> {
    if condition {
        Ok(())
    } else {
        Err(CliError::Invariant(what()))
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn read_documents(path: &Path) -> Result<Vec<SegmentedDocument>> {
    parse_documents_bytes(&read(path)?).map_err(|e| CliError::format(path, e))
}

fn read_transcripts(path: &Path) -> Result<Vec<TimedTranscript>> {
    parse_timed_transcripts_bytes(&read(path)?).map_err(|e| CliError::format(path, e))
}

fn read_bitext(path: &Path, origin: &str) -> Result<Vec<Vec<BitextPair>>> {
    parse_bitext_bytes(&read(path)?, origin).map_err(|e| CliError::format(path, e))
}

/// Documents of two files matched by position.
fn paired<'d>(
    left: (&Path, &'d [SegmentedDocument]),
    right: (&Path, &'d [SegmentedDocument]),
) -> Result<impl Iterator<Item = (&'d SegmentedDocument, &'d SegmentedDocument)>> {
    if left.1.len() != right.1.len() {
        return Err(CliError::Malformed(format!(
            "{} has {} documents but {} has {}",
            left.0.display(),
            left.1.len(),
            right.0.display(),
            right.1.len()
        )));
    }
    Ok(left.1.iter().zip(right.1))
}

fn normalize(ctx: &mut Context<'_>, a: NormalizeArgs) -> Result<()> {
    let policy = match a.policy {
        Some(PolicyName::Stripped) => NormalizationPolicy::STRIPPED,
        Some(PolicyName::Punctuated) => NormalizationPolicy::PUNCTUATED,
        None => ctx.config.normalization,
    };
    let docs = read_documents(&a.input)?;
    let out: Vec<_> = docs.iter().map(|d| normalize_document(d, &policy)).collect();
    ctx.emit(&a.output, &write_documents(&out))
}

enum Plan {
    Punct,
    Pause(PauseSplitConfig),
    Fixed(NonZeroUsize),
}

fn segment(ctx: &mut Context<'_>, a: SegmentArgs) -> Result<()> {
    let section = &ctx.config.segmentation;
    let pause = |threshold: Option<f64>, max: Option<usize>| {
        PauseSplitConfig::new(
            threshold.unwrap_or(section.pause_threshold_sec),
            max.unwrap_or(section.max_tokens),
        )
        .map(Plan::Pause)
        .map_err(usage)
    };
    let fixed = |n: Option<usize>| {
        NonZeroUsize::new(n.unwrap_or(section.fixed_length))
            .map(Plan::Fixed)
            .ok_or_else(|| usage("--n must be at least 1"))
    };
    let (plan, input, output) = match a.strategy {
        Some(SegmentStrategy::Punct { input, output }) => (Plan::Punct, input, output),
        Some(SegmentStrategy::Pause { input, threshold, max_tokens, output }) => {
            (pause(threshold, max_tokens)?, input, output)
        }
        Some(SegmentStrategy::Fixed { input, n, output }) => (fixed(n)?, input, output),
        None => {
            let plan = match section.strategy {
                Strategy::Punct => Plan::Punct,
                Strategy::Pause => pause(None, None)?,
                Strategy::Fixed => fixed(None)?,
            };
            (plan, a.input.expect("clap requires an input without a strategy"), a.output)
        }
    };

    let out = match plan {
        Plan::Pause(cfg) => read_transcripts(&input)?
            .iter()
            .map(|t| {
                let doc = split_on_pauses(t, &cfg);
                ensure(flatten(&doc).0 == t.tokens(), || format!("pause split changed tokens of {}", t.doc_id()))?;
                Ok(doc)
            })
            .collect::<Result<Vec<_>>>()?,
        plan => {
            let breaker = section.breaker();
            read_documents(&input)?
                .iter()
                .map(|d| {
                    let (tokens, _) = flatten(d);
                    let doc = match plan {
                        Plan::Fixed(n) => split_fixed_length(&tokens, n).with_doc_id(d.doc_id()),
                        _ => breaker.split(d.doc_id(), &tokens),
                    };
                    ensure(flatten(&doc).0 == tokens, || format!("segmentation changed tokens of {}", d.doc_id()))?;
                    Ok(doc)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    ctx.emit(&output, &write_documents(&out))
}

fn project(ctx: &mut Context<'_>, a: ProjectArgs) -> Result<()> {
    let sources = read_documents(&a.source)?;
    let targets = read_documents(&a.target)?;
    let mut out = Vec::with_capacity(targets.len());
    for (source, target) in paired((&a.source, &sources), (&a.target, &targets))? {
        let (tokens, _) = flatten(target);
        let doc = project_boundaries(source, &tokens, &ctx.config.alignment).with_doc_id(target.doc_id());
        ensure(flatten(&doc).0 == tokens, || format!("projection changed tokens of {}", target.doc_id()))?;
        out.push(doc);
    }
    ctx.emit(&a.output, &write_documents(&out))
}

const VARIANT_FILES: [&str; 4] = ["gold.txt", "system.txt", "recognition.txt", "segmentation.txt"];

fn variants(ctx: &mut Context<'_>, a: VariantsArgs) -> Result<()> {
    let golds = read_documents(&a.gold)?;
    let systems = read_documents(&a.system)?;
    let mut sets: [Vec<SegmentedDocument>; 4] = Default::default();
    for (gold, system) in paired((&a.gold, &golds), (&a.system, &systems))? {
        let v = make_error_variants(gold, system, &ctx.config.alignment).map_err(CliError::input)?;
        ensure(flatten(&v.recognition_errors).0 == flatten(system).0, || {
            format!("recognition variant of {} lost system tokens", system.doc_id())
        })?;
        ensure(flatten(&v.segmentation_errors).0 == flatten(gold).0, || {
            format!("segmentation variant of {} lost gold tokens", gold.doc_id())
        })?;
        for (set, doc) in sets.iter_mut().zip([v.gold, v.system, v.recognition_errors, v.segmentation_errors]) {
            set.push(doc);
        }
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let mut table = Table::with_header(["variant", "segments", "tokens", "path"]);
    let mut records = String::new();
    for (name, docs) in VARIANT_FILES.iter().zip(&sets) {
        let path: PathBuf = a.out_dir.join(name);
        fs::write(&path, write_documents(docs)).map_err(|e| CliError::io(&path, e))?;
        let segments: usize = docs.iter().map(|d| d.segments().len()).sum();
        let tokens: usize = docs.iter().map(SegmentedDocument::token_count).sum();
        let variant = name.trim_end_matches(".txt");
        table.row([variant.to_owned(), segments.to_string(), tokens.to_string(), path.display().to_string()]);
        records.push_str(&json!({ "variant": variant, "segments": segments, "tokens": tokens, "path": path }).to_string());
        records.push('\n');
    }
    let text = match ctx.format {
        ReportFormat::Table => table.to_string(),
        ReportFormat::Jsonl => records,
    };
    ctx.emit(&Output { output: None }, &text)
}

/// Augments each document of a bitext file under its own sub-seed, dropping
/// unmerged trailing pairs when `merged_only` is set.
fn augment_documents(docs: &[Vec<BitextPair>], cfg: AugmentationConfig, merged_only: bool) -> (Vec<Vec<BitextPair>>, usize, usize) {
    let (mut skipped, mut passthrough) = (0, 0);
    let out = docs
        .iter()
        .enumerate()
        .map(|(i, doc)| {
            let mut result = augment_corpus(doc, &cfg.with_seed(sub_seed(cfg.seed(), "augment", &i.to_string())));
            skipped += result.skipped;
            passthrough += result.passthrough;
            if merged_only {
                result.pairs.truncate(result.pairs.len() - result.passthrough);
            }
            result.pairs
        })
        .collect();
    (out, skipped, passthrough)
}

fn augment(ctx: &mut Context<'_>, a: AugmentArgs) -> Result<()> {
    let seed = ctx.config.effective_seed(a.seed);
    ctx.note_seed(seed);
    let p_max = a.p_max.unwrap_or(ctx.config.augmentation.p_max);
    let cfg = AugmentationConfig::new(p_max, seed).map_err(usage)?;
    let docs = read_bitext(&a.input, &a.input.display().to_string())?;
    let (out, skipped, passthrough) = augment_documents(&docs, cfg, false);
    let pairs: usize = out.iter().map(Vec::len).sum();
    ctx.note(format_args!(
        "{pairs} pairs written ({skipped} merges skipped, {passthrough} unpaired passed through)"
    ));
    ctx.emit(&a.output, &write_bitext(&out))
}

fn labelled_paths(specs: &[String], flag: &str) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for spec in specs {
        let (label, path) = spec
            .split_once('=')
            .filter(|(l, p)| !l.is_empty() && !p.is_empty())
            .ok_or_else(|| usage(format!("{flag} expects LABEL=PATH, got {spec:?}")))?;
        if out.insert(label.to_owned(), PathBuf::from(path)).is_some() {
            return Err(usage(format!("{flag} given twice for {label}")));
        }
    }
    Ok(out)
}

fn mix(ctx: &mut Context<'_>, a: MixArgs) -> Result<()> {
    let seed = ctx.config.effective_seed(a.seed);
    ctx.note_seed(seed);
    let originals = labelled_paths(&a.corpora, "--corpus")?;
    let augmented = labelled_paths(&a.augmented, "--augmented")?;
    if let Some(label) = augmented.keys().find(|l| !originals.contains_key(*l)) {
        return Err(usage(format!("--augmented {label} has no matching --corpus")));
    }

    let mut spec = ctx.config.mixture.clone();
    spec.seed = seed;
    if !a.weights.is_empty() {
        spec.corpus_weights.clear();
        for w in &a.weights {
            let parsed = w
                .split_once('=')
                .and_then(|(label, value)| Some((label.to_owned(), value.parse::<f64>().ok()?)))
                .ok_or_else(|| usage(format!("--weight expects LABEL=W, got {w:?}")))?;
            spec.corpus_weights.insert(parsed.0, parsed.1);
        }
    } else if spec.corpus_weights.is_empty() {
        let share = 1.0 / originals.len() as f64;
        spec.corpus_weights = originals.keys().map(|l| (l.clone(), share)).collect();
    }
    if let Some(f) = a.augmented_fraction {
        spec.augmented_fraction = f;
    }
    spec.validate().map_err(usage)?;

    let cfg = ctx.config.augmentation_config(seed).map_err(usage)?;
    let mut corpora = BTreeMap::new();
    for (label, path) in &originals {
        let docs = read_bitext(path, label)?;
        let pool = match augmented.get(label) {
            Some(p) => read_bitext(p, label)?.concat(),
            None if spec.fraction_for(label) > 0.0 => augment_documents(&docs, cfg, true).0.concat(),
            None => Vec::new(),
        };
        corpora.insert(
            label.clone(),
            CorpusPools {
                originals: docs.concat(),
                augmented: pool,
            },
        );
    }

    let draws = sample_mixture(&corpora, &spec, a.total).map_err(|e| match e {
        AugmentError::UnknownCorpus(_) => usage(e),
        e => CliError::input(e),
    })?;
    let picked: Vec<BitextPair> = draws
        .iter()
        .map(|d| {
            let pools = &corpora[&d.corpus];
            let pool = if d.augmented { &pools.augmented } else { &pools.originals };
            pool[d.index].clone()
        })
        .collect();
    let text = match ctx.format {
        ReportFormat::Table => write_bitext(&[picked]),
        ReportFormat::Jsonl => draws
            .iter()
            .zip(&picked)
            .map(|(d, p)| {
                json!({
                    "corpus": d.corpus,
                    "augmented": d.augmented,
                    "index": d.index,
                    "source": p.source().to_string(),
                    "target": p.target().to_string(),
                })
                .to_string()
                    + "\n"
            })
            .collect(),
    };
    ctx.emit(&a.output, &text)
}

fn bleu_config(base: BleuConfig, a: &BleuArgs) -> Result<BleuConfig> {
    let mut cfg = base;
    if a.case_insensitive {
        cfg.case_sensitive = false;
    }
    if let Some(n) = a.max_order {
        cfg.max_order = n;
    }
    if cfg.max_order == 0 {
        return Err(usage("--max-order must be at least 1"));
    }
    Ok(cfg)
}

fn score(ctx: &mut Context<'_>, a: ScoreArgs) -> Result<()> {
    let cfg = bleu_config(ctx.config.bleu, &a.bleu)?;
    let hyps = read_documents(&a.hypothesis)?;
    let refs = read_documents(&a.reference)?;
    let mut stats = BleuStats::zero(cfg.max_order);
    for (i, (h, r)) in paired((&a.hypothesis, &hyps), (&a.reference, &refs))?.enumerate() {
        let doc_stats = if a.resegment {
            resegment_stats(h, r, &cfg, &ctx.config.alignment)
        } else {
            if h.segments().len() != r.segments().len() {
                return Err(CliError::Malformed(format!(
                    "document {}: hypothesis has {} segments, reference has {}; pass --resegment to score across segmentations",
                    i + 1,
                    h.segments().len(),
                    r.segments().len()
                )));
            }
            corpus_stats(h.segments(), r.segments(), &cfg)
        };
        stats += &doc_stats.map_err(CliError::input)?;
    }
    if stats.ref_len == 0 {
        return Err(CliError::Malformed(format!("{}: reference is empty", a.reference.display())));
    }
    let report = stats.report(cfg.smoothing);
    let text = match ctx.format {
        ReportFormat::Jsonl => serde_json::to_string(&report).expect("report serializes") + "\n",
        ReportFormat::Table => {
            let mut t = Table::with_header(["metric", "value"]);
            t.row(["BLEU".to_owned(), format!("{:.2}", report.score)]);
            for (n, p) in report.ngram_precisions.iter().enumerate() {
                t.row([format!("{}-gram precision", n + 1), format!("{:.2}", 100.0 * p)]);
            }
            t.row(["brevity penalty".to_owned(), format!("{:.4}", report.brevity_penalty)]);
            t.row(["hypothesis length".to_owned(), report.hyp_len.to_string()]);
            t.row(["reference length".to_owned(), report.ref_len.to_string()]);
            t.to_string()
        }
    };
    ctx.emit(&a.output, &text)
}

fn wer(ctx: &mut Context<'_>, a: WerArgs) -> Result<()> {
    let refs = read_documents(&a.reference)?;
    let hyps = read_documents(&a.hypothesis)?;
    let mut counts = WerCounts::default();
    for (r, h) in paired((&a.reference, &refs), (&a.hypothesis, &hyps))? {
        counts += wer_counts(&flatten(r).0, &flatten(h).0);
    }
    let rate = counts
        .rate()
        .map_err(|e| CliError::Malformed(format!("{}: {e}", a.reference.display())))?;
    let text = match ctx.format {
        ReportFormat::Jsonl => {
            json!({
                "wer": rate,
                "substitutions": counts.substitutions,
                "deletions": counts.deletions,
                "insertions": counts.insertions,
                "reference_len": counts.reference_len,
            })
            .to_string()
                + "\n"
        }
        ReportFormat::Table => {
            let mut t = Table::with_header(["metric", "value"]);
            t.row(["WER".to_owned(), format!("{rate:.4}")])
                .row(["substitutions".to_owned(), counts.substitutions.to_string()])
                .row(["deletions".to_owned(), counts.deletions.to_string()])
                .row(["insertions".to_owned(), counts.insertions.to_string()])
                .row(["reference words".to_owned(), counts.reference_len.to_string()]);
            t.to_string()
        }
    };
    ctx.emit(&a.output, &text)
}

fn simulate(ctx: &mut Context<'_>, a: SimulateArgs) -> Result<()> {
    let seed = ctx.config.effective_seed(a.seed);
    ctx.note_seed(seed);
    let mut noise = ctx.config.noise.clone();
    noise.seed = seed;
    let overrides = [
        (a.substitution_rate, &mut noise.substitution_rate),
        (a.deletion_rate, &mut noise.deletion_rate),
        (a.insertion_rate, &mut noise.insertion_rate),
        (a.merge_rate, &mut noise.boundary_merge_rate),
        (a.split_rate, &mut noise.boundary_split_rate),
    ];
    for (flag, slot) in overrides {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    let docs = read_documents(&a.input)?;
    if let Some(path) = &a.vocab {
        let bytes = read(path)?;
        let text = decode_utf8(&bytes).map_err(|e| CliError::format(path, e))?;
        noise.vocabulary = tokenize(text).into_tokens();
    } else if noise.vocabulary.is_empty() {
        let seen: BTreeSet<&Token> = docs.iter().flat_map(SegmentedDocument::tokens).collect();
        noise.vocabulary = seen.into_iter().cloned().collect();
    }
    noise.validate().map_err(usage)?;
    let out = docs
        .iter()
        .map(|d| {
            let corrupted = corrupt_tokens(d, &noise).and_then(|d| corrupt_boundaries(&d, &noise));
            corrupted.map_err(|e| CliError::Invariant(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ctx.emit(&a.output, &write_documents(&out))
}

fn parse_bounds(text: &str) -> Result<Vec<LengthBucket>> {
    text.split(',')
        .map(|range| {
            let (lo, hi) = range
                .trim()
                .split_once(':')
                .ok_or_else(|| usage(format!("--bounds expects LOWER:UPPER ranges, got {range:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("--bounds: {s:?} is not a length")))
            };
            Ok(LengthBucket::new(parse(lo)?, parse(hi)?))
        })
        .collect()
}

fn report(ctx: &mut Context<'_>, a: ReportArgs) -> Result<()> {
    let bounds = match &a.bounds {
        Some(text) => parse_bounds(text)?,
        None => ctx.config.buckets.buckets(),
    };
    validate_buckets(&bounds).map_err(usage)?;
    let cfg = BleuConfig {
        smoothing: Smoothing::AddOne,
        ..bleu_config(ctx.config.bleu, &a.bleu)?
    };
    let hyps = read_documents(&a.hypothesis)?;
    let refs = read_documents(&a.reference)?;
    let mut total = LengthBucketReport::empty(&bounds);
    for (h, r) in paired((&a.hypothesis, &hyps), (&a.reference, &refs))? {
        let part = bucket_report(h, r, &bounds, &cfg, &ctx.config.alignment).map_err(CliError::input)?;
        total.merge(&part);
    }
    let text = match ctx.format {
        ReportFormat::Jsonl => total
            .buckets
            .iter()
            .map(|b| serde_json::to_string(b).expect("bucket serializes") + "\n")
            .collect(),
        ReportFormat::Table => {
            let mut t = Table::with_header(["reference length", "sentences", "mean BLEU"]);
            for b in &total.buckets {
                t.row([
                    format!("{}-{}", b.lower, b.upper - 1),
                    b.count.to_string(),
                    b.mean_score.map_or_else(|| "-".to_owned(), |s| format!("{s:.2}")),
                ]);
            }
            t.to_string()
        }
    };
    ctx.emit(&a.output, &text)
}
