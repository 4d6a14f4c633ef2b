use std::io::{self, Stdout};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};
use shimura_cli::output::Output;
use shimura_cli::{exit, report, verify, Cache, CliError, CliResult};
use shimura_core::global::ExternalCertificates;
use shimura_core::local::{twist_local, LocalStatus, Place};
use shimura_core::quatsigma::{
    fixed_point_free, genus_curve, genus_quotient, trace_hecke, twelve_sigma,
};
use shimura_core::{
    adelic_quotient, class_group, class_number, cm_rational_point, descent_verdict,
    jordan_empty_over_k, quotient_local, ray_class_group, CountRequest, CurveKind, DescentVerdict,
    QuaternionDisc,
};

/// Shimura curves, their Atkin-Lehner quotients and twists: invariants,
/// local solubility, and the search for Hasse-principle counterexamples.
#[derive(Parser)]
#[command(name = "shimura-hasse", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Print aligned tables instead of JSON Lines.
    #[arg(long, global = true)]
    pretty: bool,
    /// Cache file (default: ~/.shimura-hasse/cache.jsonl).
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Worker threads for the pair search and the prime scans.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Exit with status 3 when some result is undetermined.
    #[arg(long, global = true)]
    strict: bool,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Sigma_n(D), the weighted optimal-embedding count.
    Sigma {
        #[arg(long = "D")]
        d: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// Only the exact rational value.
        #[arg(long, conflicts_with = "nonzero")]
        value: bool,
        /// Only whether it vanishes.
        #[arg(long)]
        nonzero: bool,
    },
    /// Trace of the Hecke operator T_n on weight-2 forms for D.
    Trace {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        n: i64,
    },
    /// Genus of X_D, or of X_D / w_m with --m.
    Genus {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Points over F_{p^r} of X_D, of X_D / w_m (--m), or of its twist (--m --twist).
    Count {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        #[arg(long, requires = "m")]
        twist: bool,
    },
    /// Class group of a negative fundamental discriminant.
    Classgroup {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
    },
    /// Ray class group of Q(sqrt -l) of conductor m.
    Rayclass {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        cond: u64,
    },
    /// Local solubility of X_D / w_m at one place, the real place, or all bad places.
    Local {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value = "all")]
        place: String,
    },
    /// Everywhere-local solubility of X_D / w_m.
    Adelic {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        m: u64,
    },
    /// Local solubility of the twist of X_D by Q(sqrt d) through w_m.
    TwistLocal {
        #[arg(long = "D")]
        d: u64,
        #[arg(long, allow_hyphen_values = true)]
        twist: i64,
        #[arg(long, default_value = "all")]
        place: String,
        /// The involution index; inferred when D = l m and the twist is -l.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Emptiness of X_{lm} over Q(sqrt -l) by non-surjection of the ray class group.
    Jordan {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        m: u64,
    },
    /// Whether X_{lm} / w_m has a rational CM point.
    CmPoint {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        m: u64,
    },
    /// Descent of emptiness to X_{lm} / w_m over Q.
    Descent {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        m: u64,
        /// X_{lm}(Q(sqrt -l)) is known to be empty.
        #[arg(long)]
        empty_over_minus_ell: bool,
        /// X_{lm}(Q(sqrt -lm)) is known to be empty.
        #[arg(long)]
        empty_over_minus_ell_m: bool,
    },
    /// One record per pair (l, m) in lexicographic order.
    Search {
        #[arg(long)]
        ell_max: u64,
        #[arg(long)]
        m_max: u64,
    },
    /// Recompute every claim about l = 23, m = 107.
    VerifyExample,
    /// Inspect or extend the cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    Get {
        key: String,
    },
    /// Store a JSON value; refused if the key holds a different one.
    Put {
        key: String,
        value: String,
    },
    List,
}

struct Ctx {
    out: Output<Stdout>,
    cache_path: Option<PathBuf>,
    cache: Option<Cache>,
    undetermined: bool,
}

impl Ctx {
    fn emit<T: Serialize>(&mut self, record: &T) -> CliResult<()> {
        self.out.emit(record)
    }

    fn cache(&mut self) -> CliResult<&Cache> {
        if self.cache.is_none() {
            let cache = match &self.cache_path {
                Some(path) => Cache::open(path)?,
                None => {
                    log::warn!("no home directory; using an in-memory cache");
                    Cache::in_memory()
                }
            };
            self.cache = Some(cache);
        }
        Ok(self.cache.as_ref().unwrap())
    }
}

fn parse_place(s: &str) -> CliResult<Place> {
    if s == "real" {
        return Ok(Place::Real);
    }
    s.parse().map(Place::Prime).map_err(|_| {
        CliError::Usage(format!(
            "place must be a prime, \"real\" or \"all\", not {s:?}"
        ))
    })
}

fn places(disc: &QuaternionDisc, arg: &str) -> CliResult<Vec<Place>> {
    if arg == "all" {
        let mut all = vec![Place::Real];
        all.extend(disc.primes().iter().map(|&p| Place::Prime(p)));
        Ok(all)
    } else {
        Ok(vec![parse_place(arg)?])
    }
}

fn run(cli: Cli, ctx: &mut Ctx) -> CliResult<()> {
    match cli.command {
        Command::Sigma {
            d,
            n,
            value,
            nonzero,
        } => {
            let disc = QuaternionDisc::new(d)?;
            let twelve: i128 = ctx
                .cache()?
                .get_or_compute(&format!("twelve_sigma({d},{n})"), || twelve_sigma(n, &disc))?;
            let exact = Ratio::new(twelve, 12).to_string();
            let record = if value {
                json!({"D": d, "n": n, "value": exact})
            } else if nonzero {
                json!({"D": d, "n": n, "nonzero": twelve != 0})
            } else {
                json!({"D": d, "n": n, "value": exact, "twelve_sigma": twelve, "nonzero": twelve != 0})
            };
            ctx.emit(&record)
        }
        Command::Trace { d, n } => {
            let disc = QuaternionDisc::new(d)?;
            ctx.emit(&json!({"D": d, "n": n, "trace": trace_hecke(n, &disc)?}))
        }
        Command::Genus { d, m: None } => {
            let disc = QuaternionDisc::new(d)?;
            ctx.emit(&json!({"D": d, "genus": genus_curve(&disc)?}))
        }
        Command::Genus { d, m: Some(m) } => {
            let disc = QuaternionDisc::new(d)?;
            let g = genus_quotient(&disc, m)?;
            ctx.undetermined |= g.exact().is_none();
            ctx.emit(&json!({
                "D": d,
                "m": m,
                "genus": g.exact(),
                "exact": g.exact().is_some(),
                "upper_bound": g.bound(),
                "fixed_point_free": fixed_point_free(&disc, m)?,
            }))
        }
        Command::Count { d, m, p, r, twist } => {
            let disc = QuaternionDisc::new(d)?;
            let (kind, tag) = match (m, twist) {
                (None, _) => (CurveKind::Curve, "curve".to_string()),
                (Some(m), false) => (CurveKind::Quotient { m }, format!("quotient:{m}")),
                (Some(m), true) => (CurveKind::Twist { m }, format!("twist:{m}")),
            };
            let request = CountRequest { disc, kind, p, r };
            let count: u64 = ctx
                .cache()?
                .get_or_compute(&format!("count({d},{tag},{p},{r})"), || request.count())?;
            let mut record = serde_json::to_value(kind).map_err(io::Error::from)?;
            let fields = record
                .as_object_mut()
                .expect("curve kinds serialize as objects");
            for (k, v) in [
                ("D", json!(d)),
                ("p", json!(p)),
                ("r", json!(r)),
                ("count", json!(count)),
            ] {
                fields.insert(k.into(), v);
            }
            ctx.emit(&record)
        }
        Command::Classgroup { disc } => {
            let group = class_group(disc)?;
            let key = format!("class_number({disc})");
            let h: u64 = ctx.cache()?.get_or_compute(&key, || class_number(disc))?;
            ctx.emit(&json!({
                "disc": disc,
                "class_number": h,
                "invariant_factors": group.structure.invariant_factors(),
                "reduced_forms": group.reduced_forms,
            }))?;
            if h != group.order() {
                return Err(CliError::Assertion(format!(
                    "{key}: cached {h}, but there are {} reduced forms",
                    group.order()
                )));
            }
            Ok(())
        }
        Command::Rayclass { ell, cond } => {
            let group = ray_class_group(ell, cond)?;
            let h = class_number(-(ell as i64))? as u128;
            let expected = h * (cond as u128 * cond as u128 - 1) / 2;
            ctx.emit(&json!({
                "ell": ell,
                "cond": cond,
                "invariant_factors": group.invariant_factors(),
                "order": group.order(),
                "expected_order": expected,
                "order_check": group.order() == expected,
            }))?;
            if group.order() != expected {
                return Err(CliError::Assertion(format!(
                    "ray_class_order({ell},{cond}): {} != h(-{ell}) (m^2-1)/2 = {expected}",
                    group.order()
                )));
            }
            Ok(())
        }
        Command::Local { d, m, place } => {
            let disc = QuaternionDisc::new(d)?;
            for place in places(&disc, &place)? {
                let v = quotient_local(&disc, m, place)?;
                ctx.undetermined |= v.status == LocalStatus::Undetermined;
                ctx.emit(&v)?;
            }
            Ok(())
        }
        Command::Adelic { d, m } => {
            let disc = QuaternionDisc::new(d)?;
            let r = adelic_quotient(&disc, m)?;
            ctx.undetermined |= r.adelic.is_none();
            ctx.emit(&r)
        }
        Command::TwistLocal { d, twist, place, m } => {
            let disc = QuaternionDisc::new(d)?;
            let m = match m {
                Some(m) => m,
                None => {
                    let q = twist.unsigned_abs();
                    if twist >= 0 || disc.primes().len() != 2 || !disc.primes().contains(&q) {
                        return Err(CliError::Usage(
                            "--m is needed unless D = l m and the twist is -l".into(),
                        ));
                    }
                    d / q
                }
            };
            if d % m != 0 {
                return Err(CliError::Usage(format!("m = {m} does not divide D = {d}")));
            }
            let ell = d / m;
            for place in places(&disc, &place)? {
                let v = twist_local(ell, m, twist, place)?;
                ctx.undetermined |= v.status == LocalStatus::Undetermined;
                ctx.emit(&v)?;
            }
            Ok(())
        }
        Command::Jordan { ell, m } => ctx.emit(&jordan_empty_over_k(ell, m)?),
        Command::CmPoint { ell, m } => ctx.emit(&cm_rational_point(ell, m)?),
        Command::Descent {
            ell,
            m,
            empty_over_minus_ell,
            empty_over_minus_ell_m,
        } => {
            let certs = ExternalCertificates {
                empty_over_q_sqrt_minus_ell: empty_over_minus_ell,
                empty_over_q_sqrt_minus_ell_m: empty_over_minus_ell_m,
            };
            let (verdict, evidence) = descent_verdict(ell, m, certs)?;
            ctx.undetermined |= verdict != DescentVerdict::RationallyEmpty;
            ctx.emit(&json!({"ell": ell, "m": m, "verdict": verdict, "evidence": evidence}))
        }
        Command::Search { ell_max, m_max } => {
            ctx.cache()?;
            let Ctx {
                out,
                cache,
                undetermined,
                ..
            } = ctx;
            report::search(cache.as_ref().unwrap(), ell_max, m_max, |r| {
                *undetermined |= r.adelic.is_none()
                    || (r.classification == report::Classification::CounterexampleQuotient
                        && r.twist_adelic.is_none());
                out.emit(r)
            })
        }
        Command::VerifyExample => {
            let result = verify::verify_flagship(ctx.cache()?)?;
            for check in &result.checks {
                ctx.emit(check)?;
            }
            ctx.emit(&json!({
                "verify": "flagship",
                "ok": result.ok(),
                "checks": result.checks.len(),
                "evidence": result.evidence,
            }))?;
            let failed: Vec<String> = result
                .failures()
                .map(|c| format!("{} (expected {}, got {})", c.check, c.expected, c.actual))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Assertion(failed.join("; ")))
            }
        }
        Command::Cache { action } => match action {
            CacheAction::Get { key } => {
                let value = ctx.cache()?.get(&key).unwrap_or(Value::Null);
                ctx.emit(&json!({"key": key, "value": value}))
            }
            CacheAction::Put { key, value } => {
                let value: Value = serde_json::from_str(&value)
                    .map_err(|e| CliError::Usage(format!("value is not JSON: {e}")))?;
                ctx.cache()?.put(&key, value.clone())?;
                ctx.emit(&json!({"key": key, "value": value}))
            }
            CacheAction::List => {
                for key in ctx.cache()?.keys() {
                    ctx.emit(&json!({"key": key}))?;
                }
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            eprintln!("error: usage: --jobs must be at least 1");
            return ExitCode::from(exit::USAGE);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("the thread pool is configured once");
    }
    let cache_path = cli
        .global
        .cache
        .clone()
        .or_else(|| dirs::home_dir().map(|h| h.join(".shimura-hasse").join("cache.jsonl")));
    let strict = cli.global.strict;
    let mut ctx = Ctx {
        out: Output::new(io::stdout(), cli.global.pretty),
        cache_path,
        cache: None,
        undetermined: false,
    };
    let result = run(cli, &mut ctx);
    let flushed = ctx.out.finish();
    if let Err(e) = result.and(flushed.map(|_| ())) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    if strict && ctx.undetermined {
        eprintln!("error: undetermined results under --strict");
        return ExitCode::from(exit::UNDETERMINED);
    }
    ExitCode::from(exit::SUCCESS)
}
