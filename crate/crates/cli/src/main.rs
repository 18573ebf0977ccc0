//! `portrait`: the pipeline as file-to-file subcommands.

mod error;
mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{ArgGroup, Args, Parser, Subcommand};
use rayon::prelude::*;

use portrait_core::cleaner::{clean_corpus, read_list_file, CleanerConfig};
use portrait_core::config::RunConfig;
use portrait_core::corpus::{
    load_corpus, load_posts, load_profiles, validate_users, AdRule, Corpus, ValidityReport,
};
use portrait_core::lexicon::{
    features_from_csv, features_to_csv, featurize, CompiledMatcher, Lexicon,
};
use portrait_core::model::{fit, predict, scores_from_csv, BigFive, MappingModel, Trait};
use portrait_core::report::{build_bundle, demographic_summary, scores_table};
use portrait_core::segmenter::{segment, WordList};
use portrait_core::stats::{
    binned_trend, correlation_matrix, emoticon_contrast, emoticon_table, group_means,
    group_means_table, join_scores, parse_bins, polarity_split, province_aggregate, province_table,
    tag_contrast, tag_contrast_table, trend_table, Binning, GroupKey,
};
use portrait_core::synth;

use crate::error::Failure;
use crate::io::{
    emoticon_usage, features_table, log, read_jsonl, read_text, to_jsonl, write_out, CleanedPost,
    Format, Output, TokenizedPost,
};

#[derive(Debug, Parser)]
#[command(name = "portrait", version, about = "Microblog user-portrait pipeline")]
struct Cli {
    /// Worker threads for parallel stages; 0 means one per CPU
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Strip URLs, mentions, hashtags and markers; drop spam and notices; extract emoticons
    Clean(CleanArgs),
    /// Split cleaned text into words by forward maximum matching
    Segment(SegmentArgs),
    /// Per-user category frequencies from a lexicon
    Featurize(FeaturizeArgs),
    /// Fit the frequency-to-personality mapping on labeled users
    Fit(FitArgs),
    /// Score users with a fitted model
    Predict(PredictArgs),
    /// Correlate category frequencies with trait scores
    Correlate(CorrelateArgs),
    /// Tag shares in the high and low groups of each trait
    Contrast(ContrastArgs),
    /// Profile composition of the validated corpus
    Demographics(DemographicsArgs),
    /// Emoticon shares in the high and low groups of each trait
    Emoticons(EmoticonsArgs),
    /// Trait means by profile attribute, binned trends or province
    Groups(GroupsArgs),
    /// Run the whole pipeline and write a result bundle
    Report(ReportArgs),
    /// Count users, posts, malformed lines and orphan posts
    LoadSummary(LoadSummaryArgs),
    /// Write the bundled synthetic fixture
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Run configuration (JSON); flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig, Failure> {
        match &self.config {
            Some(p) => Ok(RunConfig::load(p)?),
            None => Ok(RunConfig::default()),
        }
    }
}

fn parse_range(s: &str) -> Result<[u32; 2], String> {
    let (a, b) = s.split_once('-').ok_or("expected LO-HI")?;
    let lo = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
    Ok([lo, hi])
}

fn parse_ad_rule(s: &str) -> Result<AdRule, String> {
    match s {
        "conjunction" => Ok(AdRule::Conjunction),
        "either" => Ok(AdRule::Either),
        _ => Err("expected conjunction or either".into()),
    }
}

fn parse_trait(s: &str) -> Result<Trait, String> {
    Trait::from_letter(s).ok_or_else(|| "expected one of O, C, E, A, N".into())
}

#[derive(Debug, Args)]
struct ValidationArgs {
    /// Date at which ages are computed, YYYY-MM-DD [default: none; required here or in the config]
    #[arg(long)]
    reference_date: Option<NaiveDate>,
    /// Follower count below which an account may be excluded [default: 10]
    #[arg(long)]
    min_followers: Option<u64>,
    /// Inclusive plausible age range; other ages become unknown [default: 10-47]
    #[arg(long, value_parser = parse_range)]
    age_range: Option<[u32; 2]>,
    /// How the follower and ad-URL tests combine: conjunction or either [default: conjunction]
    #[arg(long, value_parser = parse_ad_rule)]
    ad_rule: Option<AdRule>,
    /// Substring marking an ad URL; repeat for several [default: taobao, tmall]
    #[arg(long = "ad-url-pattern")]
    ad_url_patterns: Vec<String>,
}

impl ValidationArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(d) = self.reference_date {
            cfg.reference_date = Some(d);
        }
        if let Some(v) = self.min_followers {
            cfg.min_followers = v;
        }
        if let Some(v) = self.age_range {
            cfg.age_range = v;
        }
        if let Some(v) = self.ad_rule {
            cfg.ad_rule = v;
        }
        if !self.ad_url_patterns.is_empty() {
            cfg.ad_url_patterns = self.ad_url_patterns.clone();
        }
    }
}

#[derive(Debug, Args)]
struct CleanArgs {
    /// Posts file (JSONL)
    #[arg(long)]
    posts: PathBuf,
    /// Spam keyword list, one per line [default: built-in list]
    #[arg(long)]
    spam_keywords: Option<PathBuf>,
    /// System notice list, one per line [default: built-in list]
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Output file (JSONL) [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// Cleaned posts (JSONL from `clean`)
    #[arg(long)]
    cleaned: PathBuf,
    /// Word list, one word per line
    #[arg(long)]
    word_list: PathBuf,
    /// Output file (JSONL) [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    /// Category dictionary (.dic)
    #[arg(long)]
    lexicon: PathBuf,
    /// Tokenized posts (JSONL from `segment`)
    #[arg(long)]
    tokens: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Feature file (CSV from `featurize`)
    #[arg(long)]
    features: PathBuf,
    /// Labels, CSV with columns user_id,O,C,E,A,N
    #[arg(long)]
    labels: PathBuf,
    /// Ridge strength; 0 gives ordinary least squares [default: 1.0]
    #[arg(long)]
    lambda: Option<f64>,
    /// Model file (JSON) [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model file (JSON from `fit`)
    #[arg(long)]
    model: PathBuf,
    /// Feature file (CSV from `featurize`)
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Feature file (CSV from `featurize`)
    #[arg(long)]
    features: PathBuf,
    /// Scores (CSV from `predict`)
    #[arg(long)]
    scores: PathBuf,
    /// Significance level [default: 0.05]
    #[arg(long)]
    alpha: Option<f64>,
    /// One row per category with a column per trait; non-significant values marked `*`
    #[arg(long)]
    wide: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Trait to split on; repeat for several [default: all five]
    #[arg(long = "trait", value_parser = parse_trait)]
    traits: Vec<Trait>,
    /// Share of users in each of the high and low groups [default: 0.25]
    #[arg(long)]
    quantile: Option<f64>,
}

impl SplitArgs {
    fn traits(&self) -> Vec<Trait> {
        if self.traits.is_empty() {
            Trait::ALL.to_vec()
        } else {
            self.traits.clone()
        }
    }
}

#[derive(Debug, Args)]
struct ContrastArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Scores (CSV from `predict`)
    #[arg(long)]
    scores: PathBuf,
    /// Profiles file (JSONL)
    #[arg(long)]
    profiles: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    /// Tags listed per group [default: 20]
    #[arg(long)]
    top_k: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DemographicsArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Profiles file (JSONL) [default: from config]
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Posts file (JSONL) [default: from config]
    #[arg(long)]
    posts: Option<PathBuf>,
    #[command(flatten)]
    validation: ValidationArgs,
    /// Also write the validity report (JSON) here
    #[arg(long)]
    validity: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EmoticonsArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Cleaned posts (JSONL from `clean`)
    #[arg(long)]
    cleaned: PathBuf,
    /// Scores (CSV from `predict`)
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    /// An emoticon is analyzed only when used more than this many times [default: 500]
    #[arg(long)]
    min_count: Option<u64>,
    /// Significance level [default: 0.05]
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("analysis").required(true).args(["by", "trend", "provinces"])))]
struct GroupsArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Profiles file (JSONL) [default: from config]
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Posts file (JSONL) [default: from config]
    #[arg(long)]
    posts: Option<PathBuf>,
    /// Scores (CSV from `predict`)
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    validation: ValidationArgs,
    /// Grouping: gender, verified, education_shared, introduction_shared, location_shared; repeatable
    #[arg(long)]
    by: Vec<String>,
    /// Binned trend: age_year, school_count, introduction_length[:LO-HI,...]; repeatable
    #[arg(long)]
    trend: Vec<String>,
    /// Per-province means
    #[arg(long)]
    provinces: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Bundle directory
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    validation: ValidationArgs,
    /// Share of users in each polarity group [default: 0.25]
    #[arg(long)]
    quantile: Option<f64>,
    /// Significance level [default: 0.05]
    #[arg(long)]
    alpha: Option<f64>,
    /// Emoticon usage threshold [default: 500]
    #[arg(long)]
    emoticon_min_count: Option<u64>,
    /// Tags listed per polarity group [default: 20]
    #[arg(long)]
    top_k: Option<usize>,
    /// Introduction-length bins, LO-HI,... [default: 1-10,11-20,21-30,31-40,41-50,51-60,61-70]
    #[arg(long)]
    introduction_bins: Option<String>,
    /// Profiles file (JSONL) [default: from config]
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Posts file (JSONL) [default: from config]
    #[arg(long)]
    posts: Option<PathBuf>,
    /// Category dictionary [default: from config]
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Segmentation word list [default: from config]
    #[arg(long)]
    word_list: Option<PathBuf>,
    /// Fitted model [default: from config]
    #[arg(long)]
    model: Option<PathBuf>,
    /// Spam keyword list [default: from config, else built-in]
    #[arg(long)]
    spam_keywords: Option<PathBuf>,
    /// System notice list [default: from config, else built-in]
    #[arg(long)]
    templates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LoadSummaryArgs {
    /// Profiles file (JSONL)
    #[arg(long)]
    profiles: PathBuf,
    /// Posts file (JSONL)
    #[arg(long)]
    posts: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory to write the fixture into
    #[arg(long, short)]
    out: PathBuf,
    /// Generator seed [default: 20160630]
    #[arg(long)]
    seed: Option<u64>,
}

fn read_list(path: &Path) -> Result<Vec<String>, Failure> {
    read_list_file(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn read_scores(path: &Path) -> Result<Vec<(String, BigFive)>, Failure> {
    Ok(scores_from_csv(&read_text(path)?)?)
}

fn run_clean(a: CleanArgs) -> Result<(), Failure> {
    let (posts, malformed) = load_posts(&a.posts)?;
    let mut cfg = CleanerConfig::default();
    if let Some(p) = &a.spam_keywords {
        cfg.spam_keywords = read_list(p)?;
    }
    if let Some(p) = &a.templates {
        cfg.system_templates = read_list(p)?;
    }
    let (cleaned, dropped) = clean_corpus(&posts, &cfg);
    let records: Vec<CleanedPost> = cleaned
        .into_iter()
        .map(|(user_id, r)| CleanedPost {
            user_id,
            clean_text: r.clean_text,
            emoticons: r.emoticons,
        })
        .collect();
    write_out(a.out.as_deref(), &to_jsonl(&records))?;
    log(format!(
        "clean: {} posts, {} kept, {} dropped, {} malformed lines skipped",
        posts.len(),
        records.len(),
        dropped,
        malformed
    ));
    Ok(())
}

fn run_segment(a: SegmentArgs) -> Result<(), Failure> {
    let posts: Vec<CleanedPost> = read_jsonl(&a.cleaned)?;
    let words = WordList::load(&a.word_list)?;
    let records: Vec<TokenizedPost> = posts
        .par_iter()
        .map(|p| TokenizedPost {
            user_id: p.user_id.clone(),
            tokens: segment(&p.clean_text, &words),
        })
        .collect();
    write_out(a.out.as_deref(), &to_jsonl(&records))?;
    log(format!("segment: {} posts", records.len()));
    Ok(())
}

fn run_featurize(a: FeaturizeArgs) -> Result<(), Failure> {
    let lexicon = Lexicon::load(&a.lexicon)?;
    let posts: Vec<TokenizedPost> = read_jsonl(&a.tokens)?;
    let mut by_user: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for p in posts {
        by_user.entry(p.user_id).or_default().push(p.tokens);
    }
    let matcher = CompiledMatcher::compile(&lexicon);
    let features = featurize(&by_user, &matcher);
    let names = lexicon.category_names();
    match a.output.format {
        Format::Csv => write_out(a.output.out.as_deref(), &features_to_csv(&names, &features))?,
        Format::Json => a.output.table(&features_table(&names, &features))?,
    }
    let degenerate = features.iter().filter(|f| f.is_degenerate()).count();
    log(format!(
        "featurize: {} users, {} without tokens",
        features.len(),
        degenerate
    ));
    Ok(())
}

fn run_fit(a: FitArgs) -> Result<(), Failure> {
    let cfg = a.config.load()?;
    let lambda = a.lambda.unwrap_or(cfg.ridge_lambda);
    let (names, features) = features_from_csv(&read_text(&a.features)?)?;
    let labels = read_scores(&a.labels)?;
    let model = fit(&names, &features, &labels, lambda)?;
    write_out(a.out.as_deref(), &model.to_json())?;
    log(format!(
        "fit: {} users, {} categories, lambda {}",
        model.n_train,
        names.len(),
        lambda
    ));
    Ok(())
}

fn run_predict(a: PredictArgs) -> Result<(), Failure> {
    let model = MappingModel::from_json(&read_text(&a.model)?)?;
    let (names, features) = features_from_csv(&read_text(&a.features)?)?;
    let preds = predict(&model, &names, &features)?;
    a.output.table(&scores_table(&preds.scores))?;
    log(format!(
        "predict: {} scored, {} skipped (no tokens)",
        preds.scores.len(),
        preds.skipped.len()
    ));
    Ok(())
}

fn run_correlate(a: CorrelateArgs) -> Result<(), Failure> {
    let cfg = a.config.load()?;
    let alpha = a.alpha.unwrap_or(cfg.alpha);
    let (names, features) = features_from_csv(&read_text(&a.features)?)?;
    let scores = read_scores(&a.scores)?;
    let table = correlation_matrix(&names, &features, &scores, alpha)?;
    let out = if a.wide {
        table.to_wide_table()
    } else {
        table.to_table()
    };
    a.output.table(&out)?;
    log(format!(
        "correlate: {} users, {} excluded",
        table.n, table.excluded
    ));
    Ok(())
}

fn score_column(scores: &[(String, BigFive)], t: Trait) -> Vec<(String, f64)> {
    scores
        .iter()
        .map(|(id, s)| (id.clone(), s.get(t)))
        .collect()
}

fn run_contrast(a: ContrastArgs) -> Result<(), Failure> {
    let cfg = a.config.load()?;
    let quantile = a.split.quantile.unwrap_or(cfg.quantile);
    let top_k = a.top_k.unwrap_or(cfg.top_k);
    let scores = read_scores(&a.scores)?;
    let (profiles, _) = load_profiles(&a.profiles)?;
    let mut contrasts = Vec::new();
    for t in a.split.traits() {
        let split = polarity_split(t, &score_column(&scores, t), quantile)?;
        contrasts.push(tag_contrast(&split, &profiles, top_k));
    }
    a.output.table(&tag_contrast_table(&contrasts))
}

/// Loads profiles and posts named by flags or config and validates them.
fn validated_corpus(
    cfg: &mut RunConfig,
    profiles: &Option<PathBuf>,
    posts: &Option<PathBuf>,
    validation: &ValidationArgs,
) -> Result<(Corpus, ValidityReport), Failure> {
    validation.apply(cfg);
    cfg.validate()?;
    let vconf = cfg.validation_config()?;
    let profiles = profiles
        .clone()
        .or_else(|| cfg.inputs.profiles.clone())
        .ok_or_else(|| Failure::usage("missing --profiles"))?;
    let posts = posts
        .clone()
        .or_else(|| cfg.inputs.posts.clone())
        .ok_or_else(|| Failure::usage("missing --posts"))?;
    let loaded = load_corpus(&profiles, &posts)?;
    Ok(validate_users(&loaded.profiles, &loaded.posts, &vconf))
}

fn run_demographics(a: DemographicsArgs) -> Result<(), Failure> {
    let mut cfg = a.config.load()?;
    let (corpus, validity) = validated_corpus(&mut cfg, &a.profiles, &a.posts, &a.validation)?;
    if corpus.profiles.is_empty() {
        return Err(Failure::domain("no users left after validation"));
    }
    a.output.table(&demographic_summary(&corpus.profiles))?;
    if let Some(p) = &a.validity {
        let json = serde_json::to_string_pretty(&validity).expect("report serializes");
        write_out(Some(p), &format!("{json}\n"))?;
    }
    log(format!(
        "demographics: {} users, {} accepted, {} rejected, {} ages cleared",
        validity.total_users,
        validity.accepted,
        validity.rejected.len(),
        validity.age_demoted.len()
    ));
    Ok(())
}

fn run_emoticons(a: EmoticonsArgs) -> Result<(), Failure> {
    let cfg = a.config.load()?;
    let quantile = a.split.quantile.unwrap_or(cfg.quantile);
    let min_count = a.min_count.unwrap_or(cfg.emoticon_min_count);
    let alpha = a.alpha.unwrap_or(cfg.alpha);
    let posts: Vec<CleanedPost> = read_jsonl(&a.cleaned)?;
    let usage = emoticon_usage(&posts);
    let scores = read_scores(&a.scores)?;
    let mut contrasts = Vec::new();
    for t in a.split.traits() {
        let split = polarity_split(t, &score_column(&scores, t), quantile)?;
        let c = emoticon_contrast(&split, &usage, min_count, alpha);
        if let Some(w) = &c.warning {
            log(format!("emoticons: {t}: {w}"));
        }
        contrasts.push(c);
    }
    a.output.table(&emoticon_table(&contrasts))
}

fn run_groups(a: GroupsArgs) -> Result<(), Failure> {
    let mut cfg = a.config.load()?;
    let keys =
        a.by.iter()
            .map(|k| k.parse::<GroupKey>())
            .collect::<Result<Vec<_>, _>>()?;
    let binnings = a
        .trend
        .iter()
        .map(|b| Binning::parse(b))
        .collect::<Result<Vec<_>, _>>()?;
    let (corpus, _) = validated_corpus(&mut cfg, &a.profiles, &a.posts, &a.validation)?;
    let scores = read_scores(&a.scores)?;
    let (users, missing) = join_scores(&corpus.profiles, &scores);
    if missing > 0 {
        log(format!(
            "groups: {missing} scored users have no valid profile"
        ));
    }
    let table = if !keys.is_empty() {
        let groups: Vec<_> = keys.iter().map(|k| group_means(&users, *k)).collect();
        group_means_table(&groups)
    } else if !binnings.is_empty() {
        let trends: Vec<_> = binnings.iter().map(|b| binned_trend(&users, b)).collect();
        trend_table(&trends)
    } else {
        province_table(&province_aggregate(&users))
    };
    a.output.table(&table)
}

fn run_report(a: ReportArgs) -> Result<(), Failure> {
    let mut cfg = a.config.load()?;
    a.validation.apply(&mut cfg);
    if let Some(v) = a.quantile {
        cfg.quantile = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.emoticon_min_count {
        cfg.emoticon_min_count = v;
    }
    if let Some(v) = a.top_k {
        cfg.top_k = v;
    }
    if let Some(spec) = &a.introduction_bins {
        cfg.introduction_bins = parse_bins(spec)?
            .into_iter()
            .map(|(lo, hi)| [lo, hi])
            .collect();
    }
    let inputs = &mut cfg.inputs;
    for (flag, slot) in [
        (&a.profiles, &mut inputs.profiles),
        (&a.posts, &mut inputs.posts),
        (&a.lexicon, &mut inputs.lexicon),
        (&a.word_list, &mut inputs.word_list),
        (&a.model, &mut inputs.model),
        (&a.spam_keywords, &mut inputs.spam_keywords),
        (&a.templates, &mut inputs.templates),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    let (manifest, summary) = build_bundle(&cfg, &a.out)?;
    let v = &summary.validity;
    log(format!(
        "validate: {} users, {} accepted, {} rejected, {} ages cleared",
        v.total_users,
        v.accepted,
        v.rejected.len(),
        v.age_demoted.len()
    ));
    log(format!(
        "clean: {} posts kept, {} dropped",
        summary.posts_kept, summary.posts_dropped
    ));
    log(format!(
        "predict: {} scored, {} skipped",
        summary.users_scored, summary.users_skipped
    ));
    log(format!(
        "report: {} artifacts in {}",
        manifest.artifacts.len(),
        a.out.display()
    ));
    Ok(())
}

fn run_load_summary(a: LoadSummaryArgs) -> Result<(), Failure> {
    let loaded = load_corpus(&a.profiles, &a.posts)?;
    let json = serde_json::to_string(&loaded.summary).expect("summary serializes");
    write_out(None, &format!("{json}\n"))
}

fn run_synth(a: SynthArgs) -> Result<(), Failure> {
    let fx = synth::fixture(a.seed.unwrap_or(synth::FIXTURE_SEED))?;
    let mut cfg = RunConfig {
        reference_date: Some(synth::fixture_reference_date()),
        ..Default::default()
    };
    cfg.inputs.profiles = Some("profiles.jsonl".into());
    cfg.inputs.posts = Some("posts.jsonl".into());
    cfg.inputs.lexicon = Some("fixture.dic".into());
    cfg.inputs.word_list = Some("words.txt".into());
    cfg.inputs.model = Some("model.json".into());
    cfg.inputs.spam_keywords = Some("spam_keywords.txt".into());
    cfg.inputs.templates = Some("templates.txt".into());
    std::fs::create_dir_all(&a.out)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", a.out.display())))?;
    for (name, text) in [
        ("fixture.dic", &fx.lexicon_dic),
        ("words.txt", &fx.word_list),
        ("profiles.jsonl", &fx.profiles_jsonl),
        ("posts.jsonl", &fx.posts_jsonl),
        ("labels.csv", &fx.labels_csv),
        ("model.json", &fx.model_json),
        ("spam_keywords.txt", &fx.spam_keywords),
        ("templates.txt", &fx.templates),
        ("run.json", &cfg.to_json()),
    ] {
        write_out(Some(&a.out.join(name)), text)?;
    }
    log(format!("synth: fixture written to {}", a.out.display()));
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Clean(a) => run_clean(a),
        Command::Segment(a) => run_segment(a),
        Command::Featurize(a) => run_featurize(a),
        Command::Fit(a) => run_fit(a),
        Command::Predict(a) => run_predict(a),
        Command::Correlate(a) => run_correlate(a),
        Command::Contrast(a) => run_contrast(a),
        Command::Demographics(a) => run_demographics(a),
        Command::Emoticons(a) => run_emoticons(a),
        Command::Groups(a) => run_groups(a),
        Command::Report(a) => run_report(a),
        Command::LoadSummary(a) => run_load_summary(a),
        Command::Synth(a) => run_synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e
                .to_string()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("{}", Failure::usage(message).to_line());
            return ExitCode::from(1);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!(
                "{}",
                Failure::usage(format!("cannot start {} threads: {e}", cli.threads)).to_line()
            );
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_line());
            ExitCode::from(f.exit_code())
        }
    }
}
