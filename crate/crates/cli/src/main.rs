//! `ngls`: command-line front end for the NGLS library.
//!
//! JSON for single reports, CSV for traces. Exit status 2 marks bad input,
//! 3 a numeric guard (divergent tail, enumeration cap, zero mass).

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ngls_core::config::{self, FamilyConfig};
use ngls_core::dimension::{self, eta, DEFAULT_MAX_CUT};
use ngls_core::expansion::{self, Classification, Target};
use ngls_core::frequency::{self, FrequencyVector};
use ngls_core::gls::{ffi_with_depth, validate_partition, DEFAULT_EXACT_DEPTH};
use ngls_core::measure::{self, EaSampler, FibreBernoulli};
use ngls_core::{approximation, rational, Digit, Exec, Family, OmegaRule};

use report::{emit_csv, emit_json, num, Resolved};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] ngls_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric_guard() => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "ngls", version, about = "Non-autonomous generalised Lüroth series toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Family JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Frequency vector, overriding the config's `alpha`.
    #[arg(long)]
    alpha: Option<String>,
    /// Driving sequence rule, overriding the config's `omega` (default `weave`).
    #[arg(long)]
    omega: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// dim = max{η_T, β} with the β trace summary.
    Dim {
        #[command(flatten)]
        common: Common,
        #[arg(long = "M", default_value_t = DEFAULT_MAX_CUT)]
        max_m: u64,
    },
    /// Exponent of convergence per system.
    Eta {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1 << 20)]
        horizon: u64,
    },
    /// Fibre dimension β; `--trace` emits the R_m table as CSV.
    Beta {
        #[command(flatten)]
        common: Common,
        #[arg(long = "M", default_value_t = DEFAULT_MAX_CUT)]
        max_m: u64,
        #[arg(long)]
        trace: bool,
    },
    /// Leading-order cover exponent g(t; M).
    Coverrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long = "M", default_value_t = DEFAULT_MAX_CUT)]
        max_m: u64,
    },
    /// Exact cover sum over count vectors of length n.
    Coversum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long = "M", default_value_t = 4)]
        max_m: u64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        sequential: bool,
    },
    /// Digits to point.
    Expand {
        #[command(flatten)]
        common: Common,
        /// Comma-separated digits.
        #[arg(long)]
        digits: String,
        #[arg(long, default_value_t = DEFAULT_EXACT_DEPTH)]
        exact_depth: usize,
    },
    /// Point to digits.
    Digits {
        #[command(flatten)]
        common: Common,
        /// Rational or decimal point in [0,1].
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_EXACT_DEPTH)]
        exact_depth: usize,
    },
    /// Woven frequency sequence; final digit counts as CSV.
    Weave {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long = "M", default_value_t = 20)]
        max_m: u64,
    },
    /// Digit counts of the woven sequence at n = 10, 100, … and the full length.
    Freq {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long = "M", default_value_t = 20)]
        max_m: u64,
    },
    /// One word drawn from μ_{ω,α}, position by position.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "M", default_value_t = DEFAULT_MAX_CUT)]
        max_m: u64,
    },
    /// log μ / log |FFI| along sampled words, compared with β.
    Localdim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 1000)]
        every: usize,
        #[arg(long = "M", default_value_t = DEFAULT_MAX_CUT)]
        max_m: u64,
    },
    /// η lower-bound trace on a sampled word of the window measure.
    Etalower {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        k_max: u64,
        #[arg(long, default_value_t = measure::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long, default_value_t = measure::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = measure::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Length of the ω prefix the schedule is built on.
        #[arg(long, default_value_t = 4096)]
        prefix: usize,
    },
    /// Finite approximant T^(m): branch table as JSON, or CSV with `--csv`.
    Approx {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        csv: bool,
    },
    /// Parses the config and checks every system's partition.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "M", default_value_t = DEFAULT_MAX_CUT)]
        max_m: u64,
    },
}

struct Loaded {
    family: Family,
    config: FamilyConfig,
}

impl Loaded {
    fn open(common: &Common) -> Res<Self> {
        let text = fs::read_to_string(&common.config)
            .map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
        let (family, mut config) = config::load_family(&text)?;
        if let Some(a) = &common.alpha {
            config.alpha = Some(a.clone());
        }
        config.omega = Some(common.omega.clone().or(config.omega).unwrap_or_else(|| "weave".into()));
        Ok(Loaded { family, config })
    }

    fn alpha(&self) -> Res<FrequencyVector> {
        let spec = self
            .config
            .alpha
            .as_deref()
            .ok_or_else(|| CliError::Config("no frequency vector: pass --alpha or set `alpha`".into()))?;
        Ok(config::parse_alpha(&self.family, spec)?)
    }

    fn omega(&self, alpha: Option<&FrequencyVector>) -> Res<OmegaRule> {
        Ok(config::parse_omega(&self.family, self.config.omega.as_deref().unwrap_or("weave"), alpha)?)
    }

    fn resolved(&self, command: &'static str) -> Resolved {
        Resolved::new(command, self.config.clone())
    }
}

fn parse_digits(text: &str) -> Res<Vec<Digit>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<Digit>().map_err(|_| CliError::Config(format!("digit {t:?}"))))
        .collect()
}

fn run(cli: Cli) -> Res<()> {
    match cli.command {
        Command::Dim { common, max_m } => {
            let l = Loaded::open(&common)?;
            let alpha = l.alpha()?;
            let r = dimension::dim_formula(&l.family, &alpha, max_m)?;
            let mut res = l.resolved("dim");
            res.param("M", max_m);
            emit_json(
                common.out.as_deref(),
                &res,
                json!({
                    "eta": r.eta_t,
                    "beta": r.beta,
                    "dim": r.dim,
                    "divergent": r.lyapunov_divergent,
                    "oscillation": r.oscillation,
                    "eta_per_symbol": r.eta_per_symbol,
                }),
            )
        }
        Command::Eta { common, horizon } => {
            let l = Loaded::open(&common)?;
            let estimates = l
                .family
                .systems()
                .iter()
                .map(|s| {
                    let e = eta(s, horizon)?;
                    Ok(json!({
                        "symbol": s.symbol().as_str(),
                        "rule": s.rule_name(),
                        "eta": e.value,
                        "analytic": e.analytic,
                        "error": e.error,
                        "last_ratio": e.last_ratio,
                    }))
                })
                .collect::<Res<Vec<_>>>()?;
            let eta_t = estimates.iter().map(|e| e["eta"].as_f64().unwrap_or(0.0)).fold(0.0, f64::max);
            let mut res = l.resolved("eta");
            res.param("horizon", horizon);
            emit_json(common.out.as_deref(), &res, json!({ "eta_t": eta_t, "systems": estimates }))
        }
        Command::Beta { common, max_m, trace } => {
            let l = Loaded::open(&common)?;
            let alpha = l.alpha()?;
            let r = dimension::beta(&l.family, &alpha, max_m)?;
            let mut res = l.resolved("beta");
            res.param("M", max_m).param("trace", trace);
            if trace {
                let rows = r.trace.iter().map(|row| {
                    vec![
                        row.m.to_string(),
                        num(row.numerator),
                        num(row.denominator),
                        row.ratio.map_or_else(String::new, num),
                    ]
                });
                emit_csv(common.out.as_deref(), &res, &["m", "numerator", "denominator", "R_m"], rows)
            } else {
                emit_json(
                    common.out.as_deref(),
                    &res,
                    json!({
                        "beta": r.beta,
                        "window_min": r.window_min,
                        "oscillation": r.oscillation,
                        "window": r.window,
                        "divergent": r.lyapunov_divergent,
                        "lyapunov_partial": r.lyapunov_partial,
                    }),
                )
            }
        }
        Command::Coverrate { common, t, max_m } => {
            let l = Loaded::open(&common)?;
            let alpha = l.alpha()?;
            let r = dimension::cover_rate(&l.family, &alpha, t, max_m)?;
            let mut res = l.resolved("coverrate");
            res.param("t", t).param("M", max_m);
            emit_json(common.out.as_deref(), &res, r)
        }
        Command::Coversum { common, t, n, max_m, epsilon, sequential } => {
            let l = Loaded::open(&common)?;
            let alpha = l.alpha()?;
            let omega = l.omega(Some(&alpha))?.prefix(n);
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            let r = dimension::exact_cover_sum(&l.family, &omega, &alpha, t, max_m, epsilon, exec)?;
            let mut res = l.resolved("coversum");
            res.param("t", t).param("n", n).param("M", max_m).param("epsilon", epsilon);
            emit_json(
                common.out.as_deref(),
                &res,
                json!({
                    "log_sum": r.log_sum,
                    "sum": r.sum(),
                    "vectors": r.vectors,
                    "tau": r.tau,
                    "tail_sums": r.tail_sums,
                    "omega": omega,
                }),
            )
        }
        Command::Expand { common, digits, exact_depth } => {
            let l = Loaded::open(&common)?;
            let word = parse_digits(&digits)?;
            let omega = l.omega(None)?.prefix(word.len());
            let p = expansion::project(&l.family, &omega, word.iter().copied(), Target::Depth(word.len()))?;
            let ffi = ffi_with_depth(&l.family, &omega, &word, exact_depth)?;
            let (exact_point, classification) = match &ffi.exact {
                Some((lo, hi)) => {
                    let mid = (lo + hi) / rational::int(2);
                    let c = expansion::digits_of(&l.family, &omega, &mid, word.len())?.classification;
                    (Some(rational::format(&mid)), c)
                }
                None => (None, Classification::Unique),
            };
            let mut res = l.resolved("expand");
            res.param("exact_depth", exact_depth);
            emit_json(
                common.out.as_deref(),
                &res,
                json!({
                    "word": word,
                    "omega": omega,
                    "point": p.point,
                    "exact_point": exact_point,
                    "error_bound": p.error_bound,
                    "interval": ffi.exact.as_ref().map(|(a, b)| [rational::format(a), rational::format(b)]),
                    "classification": classification,
                }),
            )
        }
        Command::Digits { common, x, n, exact_depth } => {
            let l = Loaded::open(&common)?;
            let point = rational::parse(&x)?;
            let omega = l.omega(None)?.prefix(n);
            let e = expansion::digits_of(&l.family, &omega, &point, n)?;
            let error_bound =
                if e.word.is_empty() { 1.0 } else { ffi_with_depth(&l.family, &omega, &e.word, exact_depth)?.length() };
            let mut res = l.resolved("digits");
            res.param("n", n).param("exact_depth", exact_depth);
            emit_json(
                common.out.as_deref(),
                &res,
                json!({
                    "word": e.word,
                    "omega": &omega[..e.word.len()],
                    "point": rational::format(&point),
                    "error_bound": error_bound,
                    "classification": e.classification,
                }),
            )
        }
        Command::Weave { common, n, max_m } => {
            let (l, alpha, omega, word) = woven(&common, n)?;
            let mut res = l.resolved("weave");
            res.param("n", n).param("M", max_m);
            let table = frequency::digit_frequency_table(&l.family, &alpha, &omega, &word, max_m)?;
            emit_csv(common.out.as_deref(), &res, &FREQ_HEADER, table.iter().map(freq_row))
        }
        Command::Freq { common, n, max_m } => {
            let (l, alpha, omega, word) = woven(&common, n)?;
            let mut res = l.resolved("freq");
            res.param("n", n).param("M", max_m);
            let mut checkpoints: Vec<usize> =
                std::iter::successors(Some(10usize), |c| c.checked_mul(10)).take_while(|&c| c < n).collect();
            checkpoints.push(n);
            let mut rows = Vec::new();
            for c in checkpoints {
                let table = frequency::digit_frequency_table(&l.family, &alpha, &omega[..c], &word[..c], max_m)?;
                rows.extend(table.iter().map(freq_row));
            }
            emit_csv(common.out.as_deref(), &res, &FREQ_HEADER, rows)
        }
        Command::Sample { common, n, seed, max_m } => {
            let (l, m, beta) = bernoulli(&common, max_m)?;
            let (omega, word) = m.sample_level_set(n, seed);
            let trace = m.local_dimension_trace(&omega, &word, 1)?;
            let mut res = l.resolved("sample");
            res.param("n", n).param("seed", seed).param("M", max_m);
            let rows = trace.iter().map(|r| {
                let i = r.n - 1;
                vec![
                    r.n.to_string(),
                    l.family.symbol(omega[i]).to_string(),
                    word[i].to_string(),
                    num(r.log_mass),
                    num(r.log_length),
                    num(r.ratio),
                    num(beta),
                ]
            });
            emit_csv(
                common.out.as_deref(),
                &res,
                &["n", "symbol", "digit", "log_mass", "log_length", "ratio", "comparator"],
                rows,
            )
        }
        Command::Localdim { common, n, seed, seeds, every, max_m } => {
            let (l, m, beta) = bernoulli(&common, max_m)?;
            let seed_list: Vec<u64> = (seed..seed + seeds.max(1)).collect();
            let traces = Exec::Parallel.map(&seed_list, |&s| {
                let (omega, word) = m.sample_level_set(n, s);
                m.local_dimension_trace(&omega, &word, every).map(|t| (s, t))
            });
            let mut rows = Vec::new();
            for trace in traces {
                let (s, trace) = trace?;
                rows.extend(trace.iter().map(|r| {
                    vec![s.to_string(), r.n.to_string(), num(r.log_mass), num(r.log_length), num(r.ratio), num(beta)]
                }));
            }
            let mut res = l.resolved("localdim");
            res.param("n", n).param("seed", seed).param("seeds", seeds).param("every", every).param("M", max_m);
            emit_csv(common.out.as_deref(), &res, &["seed", "n", "log_mass", "log_length", "ratio", "comparator"], rows)
        }
        Command::Etalower { common, seed, k_max, gamma, delta, epsilon, prefix } => {
            let l = Loaded::open(&common)?;
            let alpha = l.alpha()?;
            let omega = l.omega(Some(&alpha))?.prefix(prefix);
            let sampler = EaSampler::new(&l.family, &alpha, omega, gamma, delta, epsilon, k_max, Exec::Parallel)?;
            let depth = sampler.schedule.theta(k_max).unwrap_or(sampler.max_depth());
            let word = sampler.sample(depth, seed)?;
            let trace = sampler.eta_lower_trace(&word)?;
            let mut res = l.resolved("etalower");
            res.param("seed", seed)
                .param("k_max", k_max)
                .param("gamma", gamma)
                .param("delta", delta)
                .param("epsilon", epsilon)
                .param("prefix", prefix)
                .param("kappa", sampler.kappa);
            let rows = trace.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.log_mass),
                    num(r.log_length),
                    num(r.ratio),
                    num(r.comparator),
                    num(r.schedule_share),
                ]
            });
            emit_csv(
                common.out.as_deref(),
                &res,
                &["n", "log_mass", "log_length", "ratio", "comparator", "schedule_share"],
                rows,
            )
        }
        Command::Approx { common, m, csv } => {
            let l = Loaded::open(&common)?;
            let systems = approximation::approximate_family(&l.family, m)?;
            let mut res = l.resolved("approx");
            res.param("m", m).param("csv", csv);
            if csv {
                let rows = systems.iter().flat_map(|sys| {
                    sys.branches.iter().map(move |b| {
                        vec![
                            sys.symbol.clone(),
                            b.digit.to_string(),
                            b.left_text(),
                            b.right_text(),
                            num(b.right - b.left),
                            format!("{:?}", b.orientation).to_lowercase(),
                            merged_text(b.merged.as_ref()),
                        ]
                    })
                });
                return emit_csv(
                    common.out.as_deref(),
                    &res,
                    &["symbol", "digit", "left", "right", "ratio", "orientation", "merged"],
                    rows,
                );
            }
            let tables: Vec<_> = systems
                .iter()
                .map(|sys| {
                    json!({
                        "symbol": sys.symbol,
                        "exact": sys.is_exact(),
                        "branches": sys.branches.iter().map(|b| json!({
                            "digit": b.digit,
                            "interval": [b.left_text(), b.right_text()],
                            "ratio": b.exact.as_ref().map_or_else(|| num(b.right - b.left), |(lo, hi)| rational::format(&(hi - lo))),
                            "orientation": b.orientation,
                            "merged": b.merged,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let dimension = match l.config.alpha.as_deref() {
                Some(_) => Some(approximation::approximant_dimension(&l.family, &l.alpha()?, m)?),
                None => None,
            };
            emit_json(common.out.as_deref(), &res, json!({ "m": m, "systems": tables, "dimension": dimension }))
        }
        Command::Validate { common, max_m } => {
            let l = Loaded::open(&common)?;
            let reports: Vec<_> = l
                .family
                .systems()
                .iter()
                .map(|s| (s.symbol().as_str().to_string(), s.rule_name(), validate_partition(s, max_m)))
                .collect();
            if let Some((sym, _, r)) = reports.iter().find(|(_, _, r)| !r.passed) {
                return Err(CliError::Config(format!(
                    "system {sym}: {}",
                    r.first_violation().unwrap_or("partition check failed")
                )));
            }
            let alpha = match l.config.alpha.as_deref() {
                Some(_) => Some(l.alpha()?),
                None => None,
            };
            l.omega(alpha.as_ref())?;
            let mut res = l.resolved("validate");
            res.param("M", max_m);
            emit_json(
                common.out.as_deref(),
                &res,
                json!({
                    "valid": true,
                    "dagger": alpha.as_ref().map(frequency::check_dagger),
                    "systems": reports.iter().map(|(sym, rule, r)| json!({
                        "symbol": sym, "rule": rule, "partition": r,
                    })).collect::<Vec<_>>(),
                }),
            )
        }
    }
}

const FREQ_HEADER: [&str; 6] = ["n", "d", "count", "count/n", "alpha_d", "deviation"];

fn freq_row(r: &frequency::FrequencyRow) -> Vec<String> {
    vec![
        r.n.to_string(),
        format!("({},{})", r.symbol, r.digit),
        r.count.to_string(),
        num(r.frequency),
        num(r.alpha),
        num(r.deviation),
    ]
}

fn merged_text(m: Option<&approximation::MergedRange>) -> String {
    match m {
        None => String::new(),
        Some(m) if m.open => format!("{}..", m.first),
        Some(m) => m.members.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
    }
}

fn woven(common: &Common, n: usize) -> Res<(Loaded, FrequencyVector, Vec<usize>, Vec<Digit>)> {
    let l = Loaded::open(common)?;
    let alpha = l.alpha()?;
    let omega = l.omega(Some(&alpha))?.prefix(n);
    let word = frequency::woven_sequence(&l.family, &alpha, &omega, Exec::Parallel)?;
    Ok((l, alpha, omega, word))
}

fn bernoulli(common: &Common, max_m: u64) -> Res<(Loaded, FibreBernoulli, f64)> {
    let l = Loaded::open(common)?;
    let alpha = l.alpha()?;
    let beta = dimension::beta(&l.family, &alpha, max_m)?.beta;
    let omega = l.omega(Some(&alpha))?;
    let m = FibreBernoulli::new(l.family.clone(), alpha, omega)?;
    Ok((l, m, beta))
}

fn configure_threads() -> Res<()> {
    #[cfg(feature = "parallel")]
    if let Ok(text) = std::env::var("NGLS_THREADS") {
        let threads: usize =
            text.trim().parse().map_err(|_| CliError::Config(format!("NGLS_THREADS={text:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
