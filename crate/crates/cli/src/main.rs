//! `llnlab`: exact Bernoulli cylinder measures, certified tail bounds, and
//! reproducible convergence-rate experiments from one executable.
//!
//! Every numeric row carries the parameters that produced it, so re-running
//! the printed command reproduces the row exactly (seeded experiments are
//! deterministic and independent of `--workers`).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use lln_core::bounds;
use lln_core::numeric::{format_rational, parse_rational, rat_to_f64};
use lln_core::prob::{
    self, FiniteProbabilitySpace, RealRandomVariable, SequencePrefix, Symbol,
};
use lln_core::seqio;
use lln_core::slln;
use lln_core::speedlimit;
use lln_core::testsets;
use lln_core::witness;

#[derive(Parser)]
#[command(name = "llnlab", version, about = "exact measures, certified bounds, and convergence-rate experiments")]
struct Cli {
    /// Output format for tabular results.
    #[arg(long, global = true, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel experiments (results are identical for
    /// any worker count).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Precision budget in bits for certified enclosures.
    #[arg(long, global = true, default_value_t = 64)]
    precision_bits: u32,
    /// Seed for every sampled experiment (derived per-trial seeds make
    /// results independent of worker count).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shannon entropy of a probability space, as a certified enclosure.
    Entropy {
        #[arg(long)]
        space: PathBuf,
    },
    /// Cylinder measure of a word or a word family.
    Measure {
        #[arg(long)]
        space: PathBuf,
        /// Word text (single characters or whitespace-separated tokens).
        #[arg(long, conflicts_with = "family")]
        word: Option<String>,
        /// File with one word per line; the family is prefix-free reduced.
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Certified tail-bound calculators; prints certificates as JSON.
    Bounds(BoundsArgs),
    /// Frequency witness scan of a sequence prefix.
    LlnScan {
        #[arg(long)]
        prefix: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        nmax: u64,
        /// Prefix file stores one symbol index per byte.
        #[arg(long)]
        byte: bool,
    },
    /// Witness scan for the empirical mean of a per-symbol variable.
    RvScan {
        #[arg(long)]
        prefix: PathBuf,
        #[arg(long)]
        space: PathBuf,
        /// Comma-separated rational values, one per alphabet symbol.
        #[arg(long)]
        values: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        byte: bool,
    },
    /// Entropy-rate (equipartition) scan of a sequence prefix.
    Aep {
        #[arg(long)]
        prefix: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        byte: bool,
    },
    /// Pass-rate table over convergence exponents (collapse below t = 2).
    Dichotomy {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        symbol: String,
        /// Comma-separated rational exponents, e.g. "2,5/2,3".
        #[arg(long)]
        t: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        length: u64,
    },
    /// Checkpoint experiments at lengths 4^n with bands 2^n.
    #[command(subcommand)]
    Speedlimit(SpeedlimitCmd),
    /// Bounded-variable almost-sure convergence experiments.
    #[command(subcommand)]
    Slln(SllnCmd),
    /// Sample a sequence prefix from a probability space.
    Gen {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        length: u64,
        /// Output sequence file.
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        byte: bool,
    },
    /// Validate and convert sequence files between token and byte modes.
    Io {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        byte_in: bool,
        #[arg(long)]
        to: Option<PathBuf>,
        #[arg(long)]
        byte_out: bool,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Chernoff deviation bound 2·exp(-eps²·n/2).
    #[arg(long)]
    chernoff: bool,
    /// Hoeffding mean bound 2·exp(-2·eps²·n/(b-a)²).
    #[arg(long)]
    hoeffding: bool,
    /// Geometric tail of exp(-k/(c·n²)) beyond a cutoff.
    #[arg(long)]
    geometric: bool,
    /// Upper incomplete gamma Γ(x, y).
    #[arg(long)]
    gamma: bool,
    /// Certified double sum over n >= g, k >= ceil(n^(2+eps)).
    #[arg(long)]
    double_tail: bool,
    /// Smallest g with the double-sum certificate below 2^-(m+1).
    #[arg(long)]
    find_g: bool,
    /// Standard-normal band integral over [-l, l].
    #[arg(long)]
    normal_band: bool,
    /// Rational ceiling constant above the checkpoint band integral.
    #[arg(long)]
    clt_r: bool,
    /// General-variance ceiling constant (band 2·sqrt(3/v)).
    #[arg(long)]
    clt_r_general: bool,

    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    g: Option<u64>,
    #[arg(long)]
    cutoff: Option<u64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    floor: Option<u64>,
}

#[derive(Subcommand)]
enum SpeedlimitCmd {
    /// Checkpoint scan of a concrete prefix.
    Scan {
        #[arg(long)]
        prefix: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        n1: u32,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        byte: bool,
    },
    /// Generate a prefix passing every checkpoint to the given depth.
    Generate {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        byte: bool,
    },
    /// Monte Carlo checkpoint pass rate with Wilson intervals.
    Mc {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        n1: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        trials: u64,
    },
}

#[derive(Subcommand)]
enum SllnCmd {
    /// Certified start index for the Hoeffding double-sum below delta.
    Cert {
        #[arg(long)]
        rv: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        delta: String,
    },
    /// Convergence scan of one sampled i.i.d. run.
    Scan {
        #[arg(long)]
        rv: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        nmax: u64,
    },
    /// Checkpoint experiment against the convolution DP and r^(n-n1).
    Checkpoint {
        #[arg(long)]
        rv: PathBuf,
        #[arg(long)]
        n1: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        trials: u64,
    },
}

/// A table row: ordered (column, value) pairs.
type Row = Vec<(String, String)>;

fn emit(rows: &[Row], format: &str, out: &Option<PathBuf>) -> Result<()> {
    let text = match format {
        "json" => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut m = serde_json::Map::new();
                    for (k, v) in row {
                        let val = v
                            .parse::<i64>()
                            .map(serde_json::Value::from)
                            .or_else(|_| v.parse::<f64>().map(serde_json::Value::from))
                            .unwrap_or_else(|_| serde_json::Value::String(v.clone()));
                        m.insert(k.clone(), val);
                    }
                    serde_json::Value::Object(m)
                })
                .collect();
            serde_json::to_string_pretty(&objs)? + "\n"
        }
        _ => {
            let mut text = String::new();
            if let Some(first) = rows.first() {
                let header: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
                text.push_str(&header.join(","));
                text.push('\n');
                for row in rows {
                    let vals: Vec<&str> = row.iter().map(|(_, v)| v.as_str()).collect();
                    text.push_str(&vals.join(","));
                    text.push('\n');
                }
            }
            text
        }
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn row(pairs: &[(&str, String)]) -> Row {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn load_space(path: &Path) -> Result<FiniteProbabilitySpace> {
    seqio::load_space(path).with_context(|| format!("loading space {}", path.display()))
}

fn load_prefix(path: &Path, space: &FiniteProbabilitySpace, byte: bool) -> Result<SequencePrefix> {
    let s = if byte {
        seqio::read_sequence_bytes(path, space.len())?
    } else {
        seqio::read_sequence_tokens(path, space.alphabet())?
    };
    Ok(s)
}

fn symbol_of(space: &FiniteProbabilitySpace, name: &str) -> Result<Symbol> {
    Ok(space.alphabet().index_of(name)?)
}

fn parse_rat(s: &str) -> Result<BigRational> {
    Ok(parse_rational(s)?)
}

fn witness_rows(rep: &witness::WitnessReport, extra: &[(&str, String)]) -> Vec<Row> {
    rep.entries
        .iter()
        .map(|e| {
            let (verdict, at_k, symbol) = match &e.verdict {
                witness::NVerdict::HoldsSoFar { checked_to } => {
                    ("holds-so-far".to_string(), checked_to.to_string(), String::new())
                }
                witness::NVerdict::Violated { k, symbol } => (
                    "violated".to_string(),
                    k.to_string(),
                    symbol.map(|s| s.to_string()).unwrap_or_default(),
                ),
                witness::NVerdict::Undetermined => {
                    ("undetermined".to_string(), String::new(), String::new())
                }
            };
            let mut r = row(extra);
            r.extend(row(&[
                ("n", e.n.to_string()),
                ("k_threshold", e.k_threshold.to_string()),
                ("verdict", verdict),
                ("at_k", at_k),
                ("symbol", symbol),
                (
                    "candidate_m",
                    rep.candidate_m.map(|m| m.to_string()).unwrap_or_default(),
                ),
            ]));
            r
        })
        .collect()
}

fn checkpoint_rows(rep: &testsets::CheckpointReport, extra: &[(&str, String)]) -> Vec<Row> {
    rep.entries
        .iter()
        .map(|e| {
            let mut r = row(extra);
            r.extend(row(&[
                ("k", e.k.to_string()),
                ("length", e.length.to_string()),
                ("count_or_sum", e.count_or_sum.clone()),
                ("band", e.band.clone()),
                (
                    "pass",
                    e.pass.map(|b| b.to_string()).unwrap_or_else(|| "undetermined".into()),
                ),
            ]));
            r
        })
        .collect()
}

fn mc_row(extra: &[(&str, String)], est: &lln_core::stats::McEstimate) -> Row {
    let mut r = row(extra);
    r.extend(row(&[
        ("trials", est.trials.to_string()),
        ("passes", est.successes.to_string()),
        ("rate", format!("{:.6}", est.rate)),
        ("wilson95_lo", format!("{:.6}", est.wilson95.0)),
        ("wilson95_hi", format!("{:.6}", est.wilson95.1)),
        ("wilson3s_lo", format!("{:.6}", est.wilson3s.0)),
        ("wilson3s_hi", format!("{:.6}", est.wilson3s.1)),
    ]));
    r
}

fn run_bounds(args: &BoundsArgs, cli: &Cli) -> Result<()> {
    let need = |opt: &Option<String>, name: &str| -> Result<BigRational> {
        parse_rat(opt.as_deref().ok_or_else(|| anyhow!("--{name} is required"))?)
    };
    let needn = |opt: Option<u64>, name: &str| -> Result<u64> {
        opt.ok_or_else(|| anyhow!("--{name} is required"))
    };
    let needf = |opt: Option<f64>, name: &str| -> Result<f64> {
        opt.ok_or_else(|| anyhow!("--{name} is required"))
    };
    let cert = if args.chernoff {
        bounds::chernoff_tail(&need(&args.q, "q")?, &need(&args.eps, "eps")?, needn(args.n, "n")?)?
    } else if args.hoeffding {
        bounds::hoeffding_tail(
            needf(args.a, "a")?,
            needf(args.b, "b")?,
            needf(args.eps.as_deref().map(|s| s.parse()).transpose()?, "eps")?,
            needn(args.n, "n")?,
        )?
    } else if args.geometric {
        let t = bounds::geometric_tail(
            needn(args.n, "n")?,
            needn(args.cutoff, "cutoff")?,
            args.c.unwrap_or(1.0),
        )?;
        let v = serde_json::json!({
            "quantity": "geometric tail sum exp(-k/(c n^2)) beyond the cutoff",
            "exact": t.exact,
            "majorant": t.majorant,
            "params": {"n": args.n, "cutoff": args.cutoff, "c": args.c.unwrap_or(1.0)},
        });
        return emit_json_value(&v, cli);
    } else if args.gamma {
        let g = lln_core::special::upper_incomplete_gamma(
            needf(args.x, "x")?,
            needf(args.y, "y")?,
            args.tol,
        )?;
        let v = serde_json::json!({
            "quantity": "upper incomplete gamma",
            "value": g,
            "params": {"x": args.x, "y": args.y, "tol": args.tol},
        });
        return emit_json_value(&v, cli);
    } else if args.double_tail {
        bounds::double_tail_bound(
            needn(args.g, "g")?,
            &need(&args.eps, "eps")?,
            args.c.unwrap_or(1.0),
        )?
    } else if args.find_g {
        let (g, cert) = bounds::find_g(
            args.m.ok_or_else(|| anyhow!("--m is required"))?,
            &need(&args.eps, "eps")?,
            args.c.unwrap_or(1.0),
            args.floor.unwrap_or(1),
        )?;
        let mut v = cert.to_json();
        v["g"] = serde_json::json!(g);
        return emit_json_value(&v, cli);
    } else if args.normal_band {
        let b = lln_core::special::normal_band(needf(args.l, "l")?, args.tol)?;
        let v = serde_json::json!({
            "quantity": "standard normal band integral",
            "value": b,
            "params": {"l": args.l, "tol": args.tol},
        });
        return emit_json_value(&v, cli);
    } else if args.clt_r {
        let out = bounds::clt_r(&need(&args.p, "p")?)?;
        let v = serde_json::json!({
            "quantity": "rational ceiling above the checkpoint band integral",
            "r": format_rational(&out.r),
            "band_integral": out.band_integral,
            "band_halfwidth": out.band_halfwidth,
        });
        return emit_json_value(&v, cli);
    } else if args.clt_r_general {
        let out = bounds::clt_r_general(needf(args.v, "v")?)?;
        let v = serde_json::json!({
            "quantity": "rational ceiling above the general-variance band integral",
            "r": format_rational(&out.r),
            "band_integral": out.band_integral,
            "band_halfwidth": out.band_halfwidth,
        });
        return emit_json_value(&v, cli);
    } else {
        bail!("choose one of --chernoff --hoeffding --geometric --gamma --double-tail --find-g --normal-band --clt-r --clt-r-general");
    };
    emit_json_value(&cert.to_json(), cli)
}

fn emit_json_value(v: &serde_json::Value, cli: &Cli) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Entropy { space } => {
            let p = load_space(space)?;
            let h = prob::shannon_entropy(&p, cli.precision_bits)?;
            if h.lo == h.hi {
                // exact value: print the rational itself
                println!("{}", format_rational(&h.lo));
            } else {
                println!("{:.15} (+/- {:e})", h.to_f64(), rat_to_f64(&h.width()) / 2.0);
            }
            Ok(())
        }
        Command::Measure { space, word, family } => {
            let p = load_space(space)?;
            let measure = if let Some(text) = word {
                let w = p.alphabet().parse_word(text)?;
                prob::word_measure(&p, &w)?
            } else if let Some(path) = family {
                let text = std::fs::read_to_string(path)?;
                let words = text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| p.alphabet().parse_word(l.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                prob::family_measure(&p, &words)?
            } else {
                bail!("provide --word or --family");
            };
            match measure {
                prob::Measure::Exact(r) => println!("{}", format_rational(&r)),
                prob::Measure::Enclosure(iv) => {
                    println!("[{}, {}]", format_rational(&iv.lo), format_rational(&iv.hi))
                }
            }
            Ok(())
        }
        Command::Bounds(args) => run_bounds(args, cli),
        Command::LlnScan { prefix, space, eps, nmax, byte } => {
            let p = load_space(space)?;
            let s = load_prefix(prefix, &p, *byte)?;
            let rep = witness::lln_witness_scan(&s, &p, &parse_rat(eps)?, *nmax)?;
            let extra = [("eps", eps.clone()), ("prefix_len", s.len().to_string())];
            emit(&witness_rows(&rep, &extra), &cli.format, &cli.out)
        }
        Command::RvScan { prefix, space, values, eps, nmax, byte } => {
            let p = load_space(space)?;
            let s = load_prefix(prefix, &p, *byte)?;
            let vals = values
                .split(',')
                .map(|v| parse_rat(v.trim()))
                .collect::<Result<Vec<_>>>()?;
            let x = RealRandomVariable::with_auto_envelope(vals);
            let rep = witness::rv_witness_scan(&s, &p, &x, &parse_rat(eps)?, *nmax)?;
            let extra = [
                ("eps", eps.clone()),
                ("values", values.clone()),
                ("prefix_len", s.len().to_string()),
            ];
            emit(&witness_rows(&rep, &extra), &cli.format, &cli.out)
        }
        Command::Aep { prefix, space, eps, nmax, byte } => {
            let p = load_space(space)?;
            let s = load_prefix(prefix, &p, *byte)?;
            let rep = witness::aep_scan(&s, &p, &parse_rat(eps)?, *nmax)?;
            let positivity = match rep.positivity_failure {
                None => "ok".to_string(),
                Some((pos, sym)) => format!("zero-probability symbol {sym} at position {pos}"),
            };
            let extra = [
                ("eps", eps.clone()),
                ("positivity", positivity),
                ("prefix_len", s.len().to_string()),
            ];
            emit(&witness_rows(&rep.report, &extra), &cli.format, &cli.out)
        }
        Command::Dichotomy { space, symbol, t, trials, length } => {
            let p = load_space(space)?;
            let a = symbol_of(&p, symbol)?;
            let grid = t.split(',').map(|v| parse_rat(v.trim())).collect::<Result<Vec<_>>>()?;
            let rows_out = witness::dichotomy_experiment(
                &p,
                a,
                &grid,
                *trials,
                *length,
                cli.seed,
                witness::DichotomyWindows::default(),
            )?;
            let rows: Vec<Row> = rows_out
                .iter()
                .map(|r| {
                    mc_row(
                        &[
                            ("t", r.t.clone()),
                            ("event", r.event.clone()),
                            ("window_lo", r.window_lo.to_string()),
                            ("window_hi", r.window_hi.to_string()),
                            ("length", r.length.to_string()),
                            ("seed", r.seed.to_string()),
                        ],
                        &r.estimate,
                    )
                })
                .collect();
            emit(&rows, &cli.format, &cli.out)
        }
        Command::Speedlimit(cmd) => run_speedlimit(cmd, cli),
        Command::Slln(cmd) => run_slln(cmd, cli),
        Command::Gen { space, length, to, byte } => {
            let p = load_space(space)?;
            let s = seqio::sample_sequence(&p, *length, cli.seed)?;
            if *byte {
                seqio::write_sequence_bytes(to, &s)?;
            } else {
                seqio::write_sequence_tokens(to, &s, p.alphabet())?;
            }
            eprintln!("wrote {} symbols to {}", s.len(), to.display());
            Ok(())
        }
        Command::Io { space, input, byte_in, to, byte_out } => {
            let p = load_space(space)?;
            let s = load_prefix(input, &p, *byte_in)?;
            match to {
                Some(path) => {
                    if *byte_out {
                        seqio::write_sequence_bytes(path, &s)?;
                    } else {
                        seqio::write_sequence_tokens(path, &s, p.alphabet())?;
                    }
                    eprintln!("converted {} symbols", s.len());
                }
                None => {
                    let counts: Vec<String> = p
                        .alphabet()
                        .names()
                        .iter()
                        .zip(s.counts())
                        .map(|(n, c)| format!("{n}={c}"))
                        .collect();
                    println!("valid: {} symbols ({})", s.len(), counts.join(", "));
                }
            }
            Ok(())
        }
    }
}

fn run_speedlimit(cmd: &SpeedlimitCmd, cli: &Cli) -> Result<()> {
    match cmd {
        SpeedlimitCmd::Scan { prefix, space, symbol, n1, n, byte } => {
            let p = load_space(space)?;
            let s = load_prefix(prefix, &p, *byte)?;
            let a = symbol_of(&p, symbol)?;
            let n_hi = n.unwrap_or_else(|| {
                let mut k = 1u32;
                while 4u64.pow(k + 1) <= s.len() as u64 {
                    k += 1;
                }
                k
            });
            let rep = speedlimit::checkpoint_scan(&s, &p, a, *n1, n_hi)?;
            let extra = [("symbol", symbol.clone()), ("prefix_len", s.len().to_string())];
            emit(&checkpoint_rows(&rep, &extra), &cli.format, &cli.out)
        }
        SpeedlimitCmd::Generate { space, symbol, depth, to, byte } => {
            let p = load_space(space)?;
            let a = symbol_of(&p, symbol)?;
            let s = speedlimit::adversarial_generate(&p, a, *depth, cli.seed)?;
            if *byte {
                seqio::write_sequence_bytes(to, &s)?;
            } else {
                seqio::write_sequence_tokens(to, &s, p.alphabet())?;
            }
            eprintln!(
                "wrote a depth-{depth} checkpoint-passing prefix ({} symbols) to {}",
                s.len(),
                to.display()
            );
            Ok(())
        }
        SpeedlimitCmd::Mc { space, symbol, n1, n, trials } => {
            let p = load_space(space)?;
            let a = symbol_of(&p, symbol)?;
            let est = speedlimit::montecarlo_pass_rate(&p, a, *n1, *n, *trials, cli.seed)?;
            let r = mc_row(
                &[
                    ("symbol", symbol.clone()),
                    ("n1", n1.to_string()),
                    ("n", n.to_string()),
                    ("length", est.length.to_string()),
                    ("seed", cli.seed.to_string()),
                ],
                &est.estimate,
            );
            emit(&[r], &cli.format, &cli.out)
        }
    }
}

fn run_slln(cmd: &SllnCmd, cli: &Cli) -> Result<()> {
    match cmd {
        SllnCmd::Cert { rv, eps, delta } => {
            let rv = slln::RvManifest::load(rv)?.to_rv()?;
            let (m, cert) = slln::effectivization_certificate(
                &rv,
                &parse_rat(eps)?,
                &parse_rat(delta)?,
            )?;
            let mut v = cert.to_json();
            v["m"] = serde_json::json!(m);
            v["delta"] = serde_json::json!(delta);
            emit_json_value(&v, cli)
        }
        SllnCmd::Scan { rv, n, eps, nmax } => {
            let rv = slln::RvManifest::load(rv)?.to_rv()?;
            let run = slln::sample_iid(&rv, *n, cli.seed);
            let rep = slln::as_convergence_scan(&run, &rv.mean(), &parse_rat(eps)?, *nmax)?;
            let extra =
                [("eps", eps.clone()), ("n", n.to_string()), ("seed", cli.seed.to_string())];
            emit(&witness_rows(&rep, &extra), &cli.format, &cli.out)
        }
        SllnCmd::Checkpoint { rv, n1, n, trials } => {
            let rv = slln::RvManifest::load(rv)?.to_rv()?;
            let out = slln::slln_checkpoint_experiment(&rv, *n1, *n, *trials, cli.seed)?;
            let mut r = mc_row(
                &[("n1", n1.to_string()), ("n", n.to_string()), ("seed", cli.seed.to_string())],
                &out.estimate,
            );
            r.push(("r".into(), out.r.clone()));
            r.push(("r_power".into(), format!("{:.6}", out.r_power)));
            r.push((
                "dp_value".into(),
                out.dp_value.map(|v| format!("{v:.10}")).unwrap_or_default(),
            ));
            emit(&[r], &cli.format, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().is_err() {
            eprintln!("warning: worker pool already initialized");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
