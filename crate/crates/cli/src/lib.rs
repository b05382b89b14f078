//! The `argucast` command line.
//!
//! Every command renders its result to a string so output can be compared
//! byte for byte. Numbers are printed with six significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use argucast_core::datasets::{
    accuracy_report, fmt_sig6, load_acf, load_dataset, read_json, render_report, to_json_string, DebateDocument,
};
use argucast_core::stats::{
    complexity_means, mcnemar, t_test_one_sided, AxisMeans, ContingencyTable, GroupSummary, ShapeCounts,
};
use argucast_core::variants::{classify, generate, PredictionBand, Shape, TemplateStore, VariantSpec};
use argucast_core::{
    aggregate_forecast, check_coherence, forecaster_is_coherent, ArgumentId, ForecastBase, ForecasterId, PerArgument,
    ThresholdConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "argucast", version, about = "Argumentative coherence for judgmental forecasting")]
pub struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw vs. coherence-filtered accuracy of a forecast dataset.
    Analyze(AnalyzeArgs),
    /// Commands on debate files.
    #[command(subcommand)]
    Debate(DebateCommand),
    /// Generate or classify debate variants.
    #[command(subcommand)]
    Variants(VariantsCommand),
    /// Study statistics.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub xi1: f64,
    /// A number, or `auto` to read per-question priors from `--priors`.
    #[arg(long, default_value = "0.5")]
    pub xi2: String,
    /// JSON object mapping question ids to priors.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Base score of the claim.
    #[arg(long, default_value_t = 0.5)]
    pub base: f64,
}

#[derive(Debug, Subcommand)]
pub enum DebateCommand {
    /// Coherence verdicts for one forecaster and the debate's forecasts.
    Coherence(CoherenceArgs),
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    pub debate: PathBuf,
    #[arg(long)]
    pub user: String,
    #[arg(long, default_value_t = 0.5)]
    pub xi1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub xi2: f64,
    /// JSON object mapping forecasting argument ids to priors used as xi2.
    #[arg(long)]
    pub xi2_map: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
}

#[derive(Debug, Subcommand)]
pub enum VariantsCommand {
    /// Write a generated debate variant.
    Generate(GenerateArgs),
    /// Print the complexity profile of a debate.
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    S,
    V,
    B,
    D,
    Vb,
    Vd,
    Db,
    Vdb,
}

impl ProfileArg {
    fn shape(self) -> Shape {
        match self {
            ProfileArg::S => Shape::Simple,
            ProfileArg::V => Shape::Vote,
            ProfileArg::B => Shape::Breadth,
            ProfileArg::D => Shape::Depth,
            ProfileArg::Vb => Shape::VoteBreadth,
            ProfileArg::Vd => Shape::VoteDepth,
            ProfileArg::Db => Shape::DepthBreadth,
            ProfileArg::Vdb => Shape::VoteDepthBreadth,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BandArg {
    Lt50,
    Eq50,
    Gt50,
}

impl From<BandArg> for PredictionBand {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Lt50 => PredictionBand::Below50,
            BandArg::Eq50 => PredictionBand::At50,
            BandArg::Gt50 => PredictionBand::Above50,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub profile: ProfileArg,
    #[arg(long, value_enum)]
    pub band: BandArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "tennis")]
    pub question: String,
    /// JSON array of debate templates; defaults to the built-in ones.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Write the debate here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub debate: PathBuf,
    #[arg(long)]
    pub user: String,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// McNemar's test on a 2x2 table of (model, user) coherence judgments.
    Mcnemar {
        #[arg(long)]
        yy: u64,
        #[arg(long)]
        yn: u64,
        #[arg(long)]
        ny: u64,
        #[arg(long)]
        nn: u64,
    },
    /// One-sided Welch t-test (H1: mean a > mean b) from summaries.
    Ttest {
        #[arg(long)]
        mean_a: f64,
        #[arg(long)]
        sd_a: f64,
        #[arg(long)]
        n_a: u64,
        #[arg(long)]
        mean_b: f64,
        #[arg(long)]
        sd_b: f64,
        #[arg(long)]
        n_b: u64,
    },
    /// Complex vs. non-complex alignment means from per-shape counts.
    ComplexityMeans { counts: PathBuf },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Overrides ARGUCAST_ADDR.
    #[arg(long)]
    pub addr: Option<std::net::SocketAddr>,
    /// Overrides ARGUCAST_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Overrides ARGUCAST_EPSILON.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flag combination; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] argucast_core::Error),
    #[error(transparent)]
    Serve(#[from] argucast_service::ServeError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Rounds to six significant digits for JSON output.
fn num(x: f64) -> Value {
    fmt_sig6(x).parse::<f64>().map_or(Value::Null, Value::from)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn opt_text(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), fmt_sig6)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Left-aligned first column, right-aligned rest, two-space gutters.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).expect("write to string");
    }
    out
}

fn parse_id(s: &str) -> Result<ArgumentId> {
    Ok(ArgumentId::new(s)?)
}

fn load_prior_map(path: &Path) -> Result<PerArgument> {
    let raw: BTreeMap<String, f64> = read_json(path)?;
    let mut map = PerArgument::constant(0.5);
    for (k, v) in raw {
        map = map.with(parse_id(&k)?, v);
    }
    Ok(map)
}

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, cli.json),
        Command::Debate(DebateCommand::Coherence(a)) => debate_coherence(a, cli.json),
        Command::Variants(VariantsCommand::Generate(a)) => variants_generate(a),
        Command::Variants(VariantsCommand::Classify(a)) => variants_classify(a, cli.json),
        Command::Stats(s) => stats(s, cli.json),
        Command::Serve(a) => serve(a).map(|()| String::new()),
    }
}

fn analyze(a: &AnalyzeArgs, as_json: bool) -> Result<String> {
    let records = load_dataset(&a.dataset)?;
    let xi2 = if a.xi2 == "auto" {
        let path = a
            .priors
            .as_ref()
            .ok_or_else(|| CliError::Usage("--xi2 auto needs --priors <file>".into()))?;
        let priors = load_prior_map(path)?;
        let missing: Vec<&str> = records
            .iter()
            .map(|r| r.question_id.as_str())
            .filter(|q| ArgumentId::new(*q).map_or(true, |id| !priors.overrides.contains_key(&id)))
            .collect();
        if !missing.is_empty() {
            return Err(argucast_core::Error::Precondition(format!(
                "{}: no prior for {}",
                path.display(),
                missing.join(", ")
            ))
            .into());
        }
        priors
    } else {
        let x = a
            .xi2
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("--xi2 must be a number in (0, 1) or `auto`, got `{}`", a.xi2)))?;
        PerArgument::constant(x)
    };
    let cfg = ThresholdConfig {
        xi1: PerArgument::constant(a.xi1),
        xi2,
        epsilon: a.eps,
        ..ThresholdConfig::default()
    };
    let report = accuracy_report(&records, &cfg, a.base)?;
    if as_json {
        return Ok(pretty(&json!({
            "dataset": a.dataset.display().to_string(),
            "total": report.total,
            "correct": report.correct,
            "coherent_total": report.coherent_total,
            "coherent_correct": report.coherent_correct,
            "accuracy": opt_num(report.accuracy),
            "coherent_accuracy": opt_num(report.coherent_accuracy),
            "retention": opt_num(report.retention),
        })));
    }
    let label = a
        .dataset
        .file_name()
        .map_or_else(|| a.dataset.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(render_report(&label, &report))
}

fn debate_coherence(a: &CoherenceArgs, as_json: bool) -> Result<String> {
    let acf = load_acf(&a.debate)?;
    let user = ForecasterId::new(a.user.clone())?;
    let xi2 = match &a.xi2_map {
        Some(path) => {
            let mut m = load_prior_map(path)?;
            m.default = a.xi2;
            m
        }
        None => PerArgument::constant(a.xi2),
    };
    let cfg = ThresholdConfig {
        xi1: PerArgument::constant(a.xi1),
        xi2,
        epsilon: a.eps,
        ..ThresholdConfig::default()
    };
    let base = ForecastBase::default();
    let verdicts = check_coherence(&acf, &user, &cfg, &base)?;
    let coherent = forecaster_is_coherent(&verdicts)?;
    let forecasts = acf
        .forecasting_args()
        .map(|f| aggregate_forecast(&acf, &f.id, &cfg, &base))
        .collect::<argucast_core::Result<Vec<_>>>()?;
    if as_json {
        return Ok(pretty(&json!({
            "user": user.as_str(),
            "coherent": coherent,
            "verdicts": verdicts.iter().map(|v| json!({
                "argument": v.argument.as_str(),
                "sigma": num(v.sigma),
                "prediction": opt_num(v.prediction),
                "xi1": num(v.xi1),
                "xi2": num(v.xi2),
                "branch": v.branch,
                "coherent": v.coherent,
            })).collect::<Vec<_>>(),
            "forecasts": forecasts.iter().map(|s| json!({
                "argument": s.argument.as_str(),
                "raw_mean": opt_num(s.raw_mean),
                "coherent_mean": opt_num(s.coherent_mean),
                "n_raw": s.n_raw,
                "n_coherent": s.n_coherent,
                "xi2": num(cfg.xi2.get(&s.argument)),
            })).collect::<Vec<_>>(),
        })));
    }
    let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
    let mut rows = vec![["argument", "sigma", "p", "xi1", "xi2", "branch", "coherent"]
        .map(String::from)
        .to_vec()];
    for v in &verdicts {
        rows.push(vec![
            v.argument.to_string(),
            fmt_sig6(v.sigma),
            opt_text(v.prediction),
            fmt_sig6(v.xi1),
            fmt_sig6(v.xi2),
            serde_json::to_value(v.branch)
                .ok()
                .and_then(|b| b.as_str().map(String::from))
                .unwrap_or_default(),
            yes_no(v.coherent),
        ]);
    }
    let mut out = format!("forecaster {user}: {}\n\n", if coherent { "coherent" } else { "incoherent" });
    out += &table(&rows);
    out.push('\n');
    let mut rows = vec![["argument", "raw", "coherent", "n_raw", "n_coherent", "xi2"]
        .map(String::from)
        .to_vec()];
    for s in &forecasts {
        rows.push(vec![
            s.argument.to_string(),
            opt_text(s.raw_mean),
            opt_text(s.coherent_mean),
            s.n_raw.to_string(),
            s.n_coherent.to_string(),
            fmt_sig6(cfg.xi2.get(&s.argument)),
        ]);
    }
    out += &table(&rows);
    Ok(out)
}

fn variants_generate(a: &GenerateArgs) -> Result<String> {
    let templates = match &a.templates {
        Some(p) => argucast_core::datasets::load_templates(p)?,
        None => TemplateStore::builtin(),
    };
    let spec = VariantSpec {
        question_id: a.question.clone(),
        profile: a.profile.shape().profile(),
        band: a.band.into(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (acf, _) = generate(&spec, &templates, &mut rng)?;
    let doc = DebateDocument::from(&acf);
    match &a.output {
        Some(path) => {
            argucast_core::datasets::write_json(path, &doc)?;
            Ok(String::new())
        }
        None => Ok(to_json_string(&doc)),
    }
}

fn variants_classify(a: &ClassifyArgs, as_json: bool) -> Result<String> {
    let acf = load_acf(&a.debate)?;
    let profile = classify(&acf, &ForecasterId::new(a.user.clone())?)?;
    if as_json {
        return Ok(pretty(&json!({
            "shape": profile.shape().map(|s| s.code()),
            "label": profile.to_string(),
            "simple": profile.simple,
            "vote_complex": profile.vote_complex,
            "breadth_complex": profile.breadth_complex,
            "depth_complex": profile.depth_complex,
        })));
    }
    Ok(format!("{profile}\n"))
}

fn axis_rows(name: &str, m: &AxisMeans) -> Result<Vec<String>> {
    let w = t_test_one_sided(&m.complex, &m.not_complex)?;
    Ok(vec![
        name.to_string(),
        fmt_sig6(m.complex.mean),
        fmt_sig6(m.complex.sd),
        m.complex.n.to_string(),
        fmt_sig6(m.not_complex.mean),
        fmt_sig6(m.not_complex.sd),
        m.not_complex.n.to_string(),
        fmt_sig6(w.t),
        fmt_sig6(w.df),
        fmt_sig6(w.p),
    ])
}

fn stats(s: &StatsCommand, as_json: bool) -> Result<String> {
    match s {
        StatsCommand::Mcnemar { yy, yn, ny, nn } => {
            let table = ContingencyTable::new(*yy, *yn, *ny, *nn);
            let m = mcnemar(&table)?;
            if as_json {
                return Ok(pretty(&json!({ "chi2": num(m.chi2), "p": num(m.p), "n": table.total() })));
            }
            Ok(format!("chi2  {}\np     {}\nn     {}\n", fmt_sig6(m.chi2), fmt_sig6(m.p), table.total()))
        }
        StatsCommand::Ttest {
            mean_a,
            sd_a,
            n_a,
            mean_b,
            sd_b,
            n_b,
        } => {
            let a = GroupSummary::new(*mean_a, *sd_a, *n_a)?;
            let b = GroupSummary::new(*mean_b, *sd_b, *n_b)?;
            let w = t_test_one_sided(&a, &b)?;
            if as_json {
                return Ok(pretty(&json!({ "t": num(w.t), "df": num(w.df), "p": num(w.p) })));
            }
            Ok(format!("t   {}\ndf  {}\np   {}\n", fmt_sig6(w.t), fmt_sig6(w.df), fmt_sig6(w.p)))
        }
        StatsCommand::ComplexityMeans { counts } => {
            let counts: ShapeCounts = read_json(counts)?;
            let m = complexity_means(&counts)?;
            let axes = [("vote", &m.vote), ("breadth", &m.breadth), ("depth", &m.depth)];
            if as_json {
                let mut out = serde_json::Map::new();
                for (name, axis) in axes {
                    let w = t_test_one_sided(&axis.complex, &axis.not_complex)?;
                    let group = |g: &GroupSummary| json!({ "mean": num(g.mean), "sd": num(g.sd), "n": g.n });
                    out.insert(
                        name.into(),
                        json!({
                            "complex": group(&axis.complex),
                            "not_complex": group(&axis.not_complex),
                            "t": num(w.t),
                            "df": num(w.df),
                            "p": num(w.p),
                        }),
                    );
                }
                return Ok(pretty(&Value::Object(out)));
            }
            let mut rows = vec![["axis", "mean", "sd", "n", "mean_not", "sd_not", "n_not", "t", "df", "p"]
                .map(String::from)
                .to_vec()];
            for (name, axis) in axes {
                rows.push(axis_rows(name, axis)?);
            }
            Ok(table(&rows))
        }
    }
}

fn serve(a: &ServeArgs) -> Result<()> {
    let mut cfg = argucast_service::Config::from_env()?;
    if let Some(addr) = a.addr {
        cfg.addr = addr;
    }
    if let Some(dir) = &a.data_dir {
        cfg.data_dir = dir.clone();
    }
    if let Some(eps) = a.eps {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(argucast_core::Error::OutOfRange {
                what: "--eps".into(),
                value: eps,
                interval: "[0, inf)",
            }
            .into());
        }
        cfg.epsilon = eps;
    }
    let rt = tokio::runtime::Runtime::new().map_err(argucast_service::ServeError::from)?;
    Ok(rt.block_on(argucast_service::serve(cfg))?)
}
