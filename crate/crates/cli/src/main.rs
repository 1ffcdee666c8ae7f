use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use xmod::indecomp::{decompose_fully, find_decomposition, is_indecomposable, DEFAULT_BUDGET, DEFAULT_SEED};
use xmod::module::ConcreteModule;
use xmod::verify::{check_split_off, run_suite, DPolicy, Report, SweepConfig, Verdict, DEFAULT_SWEEP_SEED, SUITES};
use xmod::xfamily::{build_x, check_conditions, decompose_degenerate_n1, decompose_iii_failure, recover_a, XParams};
use xmod::Error;

/// Modules X_{a,d,m} over (Z/p^m)[C_{p^n}]: construction, hypothesis audits,
/// indecomposability and verification sweeps.
///
/// Parameters are JSON objects such as {"p":3,"n":2,"m":2,"a":[0,2],"d":4}
/// with null for -∞, given inline, as a file path, or as "-" for stdin.
/// Exit codes: 0 pass, 1 property failure, 2 operational error.
#[derive(Parser)]
#[command(name = "xmod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// RNG seed for randomized searches and sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build X and print its order, divisors, lengths and signature.
    Build { params: String },
    /// Evaluate the hypotheses (I)-(V); exit 0 iff all hold.
    Check { params: String },
    /// Decide indecomposability through locality of the endomorphism ring.
    Indecomposable {
        params: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Produce a verified splitting of X.
    Decompose {
        params: String,
        /// Split off <x_(m-1)> using this index i, where a_i + (m-1-i) >= a_(m-1).
        #[arg(long, conflicts_with = "degenerate")]
        witness: Option<usize>,
        /// Use the <y> + <x_(m-1)> splitting for p = 2, n = 1.
        #[arg(long)]
        degenerate: bool,
    },
    /// Read the vector a back from module invariants of X.
    RecoverA { params: String },
    /// Run a verification suite and write its report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name; omit with --replay.
    #[arg(required_unless_present = "replay")]
    suite: Option<String>,
    /// Primes, as "2,3" or "2..5".
    #[arg(long, value_parser = parse_range)]
    range_p: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    range_n: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    range_m: Option<Range>,
    /// "all", or a list of residues such as "1,3,-1".
    #[arg(long, default_value = "all", value_parser = parse_d_policy)]
    d_policy: DPolicy,
    /// Random instances for the property suites.
    #[arg(long)]
    samples: Option<usize>,
    /// Rerun the cases of an earlier report from its own configuration.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// With --replay, only this case id (default: every case that did not pass).
    #[arg(long, requires = "replay")]
    case: Option<String>,
}

#[derive(Clone, Debug)]
struct Range(Vec<u64>);

fn parse_range(s: &str) -> Result<Range, String> {
    let s = s.trim();
    let out: Vec<u64> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
        let hi: u64 = hi.trim_start_matches('=').trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
        (lo..=hi).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err("empty range".into());
    }
    Ok(Range(out))
}

fn parse_d_policy(s: &str) -> Result<DPolicy, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(DPolicy::All);
    }
    let list = s.split(',').map(|t| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err("empty d list".into());
    }
    Ok(DPolicy::List(list))
}

/// An operational failure, reported with exit code 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(bool, Value), Failure>;

fn read_json(arg: &str) -> Result<Value, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if arg == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(|e| Failure(format!("stdin: {e}")))?;
        buf
    } else {
        fs::read_to_string(arg).map_err(|e| Failure(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure(format!("malformed JSON: {e}")))
}

/// Parameters, either bare or wrapped as {"params": ..., "witness": i} as in
/// report payloads.
fn read_params(arg: &str) -> Result<(XParams, Option<usize>), Failure> {
    let v = read_json(arg)?;
    let (params, witness) = match v.get("params") {
        Some(p) => (p.clone(), v.get("witness").and_then(Value::as_u64).map(|w| w as usize)),
        None => (v, None),
    };
    let params = serde_json::from_value(params).map_err(|e| Failure(format!("invalid parameters: {e}")))?;
    Ok((params, witness))
}

fn summary(m: &ConcreteModule) -> Value {
    json!({
        "order": format!("{}^{}", m.base().p(), m.log_order()),
        "log_order": m.log_order(),
        "divisors": m.divisors(),
        "generators": m.labels(),
        "cyclic": m.is_cyclic(),
        "signature": m.iso_signature(),
    })
}

fn cmd_build(params: &str) -> Outcome {
    let (t, _) = read_params(params)?;
    let x = build_x(&t)?;
    let mut v = summary(&x.module);
    v["params"] = json!(t);
    v["length_y"] = json!(x.len_y());
    v["length_x"] = json!((0..t.m as usize).map(|i| x.len_x(i)).collect::<Vec<_>>());
    Ok((true, v))
}

fn cmd_check(params: &str) -> Outcome {
    let (t, _) = read_params(params)?;
    let report = check_conditions(&t);
    Ok((report.overall, json!(report)))
}

fn nonzero_x(t: &XParams) -> Result<xmod::xfamily::XModule, Failure> {
    let x = build_x(t)?;
    if x.module.is_zero_module() {
        return Err(Failure("X is the zero module; indecomposability is not defined for it".into()));
    }
    Ok(x)
}

fn cmd_indecomposable(params: &str, seed: u64, budget: usize) -> Outcome {
    let (t, _) = read_params(params)?;
    let x = nonzero_x(&t)?;
    let (local, report) = is_indecomposable(&x.module)?;
    if local {
        return Ok((true, json!({"indecomposable": true, "locality": report})));
    }
    let cert = find_decomposition(&x.module, seed, budget)?
        .ok_or_else(|| Failure("the endomorphism ring is not local but no idempotent was found".into()))?;
    cert.verify(&x.module)?;
    Ok((false, json!({"indecomposable": false, "locality": report, "certificate": cert})))
}

fn cmd_decompose(params: &str, witness: Option<usize>, degenerate: bool, seed: u64) -> Outcome {
    let (t, from_payload) = read_params(params)?;
    let x = nonzero_x(&t)?;
    if let Some(i) = witness.or(from_payload) {
        return match decompose_iii_failure(&t, i) {
            Ok(split) => {
                split.certificate.verify(&x.module)?;
                Ok((true, json!({"witness": i, "q": split.q, "hat_params": split.hat_params, "certificate": split.certificate})))
            }
            Err(Error::Inconsistency(_)) => {
                let (ok, detail) = check_split_off(&t, i)?;
                Ok((ok, json!({"witness": i, "construction": "unavailable", "detail": detail})))
            }
            Err(e) => Err(e.into()),
        };
    }
    if degenerate {
        let split = decompose_degenerate_n1(&t)?;
        split.certificate.verify(&x.module)?;
        return Ok((true, json!({"certificate": split.certificate})));
    }
    match find_decomposition(&x.module, seed, DEFAULT_BUDGET)? {
        None => Ok((false, json!({"indecomposable": true}))),
        Some(cert) => {
            cert.verify(&x.module)?;
            let parts = decompose_fully(&x.module, seed)?;
            let sigs: Vec<_> = parts.iter().map(|s| s.iso_signature()).collect();
            Ok((true, json!({"certificate": cert, "summand_signatures": sigs})))
        }
    }
}

fn cmd_recover_a(params: &str, seed: u64) -> Outcome {
    let (t, _) = read_params(params)?;
    let x = build_x(&t)?;
    let a = recover_a(&x.module, seed)?;
    Ok((a == t.a, json!({"recovered": a, "expected": t.a})))
}

fn to_u32(v: Option<Range>, what: &str) -> Result<Option<Vec<u32>>, Failure> {
    v.map(|v| v.0.into_iter().map(|x| u32::try_from(x).map_err(|_| Failure(format!("{what} value {x} too large")))).collect())
        .transpose()
}

fn report_outcome(report: &Report) -> Outcome {
    if report.errors > 0 {
        let first = report.cases.iter().find(|c| c.verdict == Verdict::Error).expect("counted");
        eprintln!("{}: {} errors, first {}: {}", report.suite, report.errors, first.id, first.detail);
    }
    eprintln!("{}: {} passed, {} failed, {} errors", report.suite, report.passed, report.failed, report.errors);
    Ok((report.failed == 0 && report.errors == 0, json!(report)))
}

fn cmd_verify(args: VerifyArgs, seed: Option<u64>, jobs: usize) -> Result<(bool, Value, bool), Failure> {
    if let Some(path) = args.replay {
        let old: Report = serde_json::from_value(read_json(path.to_str().unwrap_or_default())?)
            .map_err(|e| Failure(format!("not a report: {e}")))?;
        let cfg = SweepConfig { jobs, ..old.config.clone() };
        let new = run_suite(&old.suite, &cfg)?;
        let wanted: Vec<&str> = match &args.case {
            Some(id) => vec![id.as_str()],
            None => old.cases.iter().filter(|c| c.verdict != Verdict::Pass).map(|c| c.id.as_str()).collect(),
        };
        let cases: Vec<_> = new.cases.iter().filter(|c| wanted.contains(&c.id.as_str())).collect();
        if cases.len() < wanted.len() {
            return Err(Failure("some cases of the report are not produced by its configuration".into()));
        }
        let errored = cases.iter().any(|c| c.verdict == Verdict::Error);
        let ok = cases.iter().all(|c| c.verdict == Verdict::Pass);
        return Ok((ok, json!({"suite": old.suite, "replayed": cases}), errored));
    }
    let suite = args.suite.expect("required");
    if !SUITES.contains(&suite.as_str()) {
        return Err(Failure(format!("unknown suite {suite:?}; known: {}", SUITES.join(", "))));
    }
    let cfg = SweepConfig {
        p: args.range_p.map(|r| r.0),
        n: to_u32(args.range_n, "n")?,
        m: to_u32(args.range_m, "m")?,
        d_policy: args.d_policy,
        seed: seed.unwrap_or(DEFAULT_SWEEP_SEED),
        jobs,
        samples: args.samples,
    };
    let report = run_suite(&suite, &cfg)?;
    let errored = report.errors > 0;
    let (ok, v) = report_outcome(&report)?;
    Ok((ok, v, errored))
}

fn emit(value: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let result = match cli.command {
        Command::Build { params } => cmd_build(&params).map(|(ok, v)| (ok, v, false)),
        Command::Check { params } => cmd_check(&params).map(|(ok, v)| (ok, v, false)),
        Command::Indecomposable { params, budget } => cmd_indecomposable(&params, seed, budget).map(|(ok, v)| (ok, v, false)),
        Command::Decompose { params, witness, degenerate } => {
            cmd_decompose(&params, witness, degenerate, seed).map(|(ok, v)| (ok, v, false))
        }
        Command::RecoverA { params } => cmd_recover_a(&params, seed).map(|(ok, v)| (ok, v, false)),
        Command::Verify(args) => cmd_verify(args, cli.seed, cli.jobs),
    };
    match result.and_then(|(ok, v, errored)| emit(&v, cli.out.as_ref()).map(|_| (ok, errored))) {
        Ok((_, true)) => ExitCode::from(2),
        Ok((true, _)) => ExitCode::SUCCESS,
        Ok((false, _)) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
