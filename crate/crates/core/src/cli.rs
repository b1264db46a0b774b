//! Command-line front end: family generation, descent certificates, prime
//! sweeps, twist certification, and the full report, with JSONL persistence.
//!
//! Exit codes: 0 success, 2 domain error, 3 inconclusive cells, 4 I/O.

use crate::descent::{self, DescentError, Mode};
use crate::families::{self, FamilyLabel};
use crate::intcore::Int;
use crate::localsolve::DEFAULT_MAX_DEPTH;
use crate::report;
use crate::watkins::{self, CallerFacts};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "ivorra-watkins",
    about = "2-descent rank certificates and quadratic-twist certification \
             for elliptic curves of conductor 2^m p with rational 2-torsion"
)]
pub struct Cli {
    /// Worker threads (defaults to available parallelism)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    Oracle,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Instantiate a family at (type, p) and print the curve pair
    Generate {
        #[arg(long = "type")]
        family: String,
        #[arg(long)]
        p: Int,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<i8>,
        /// Append the JSON record to this file
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the 2-descent and emit a rank certificate
    Descend {
        #[arg(long = "type")]
        family: String,
        #[arg(long)]
        p: Int,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<i8>,
        #[arg(long, value_enum, default_value = "oracle")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        depth: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the primes up to the bound that instantiate a family at fixed k
    Sweep {
        #[arg(long = "type")]
        family: String,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value = "100000")]
        bound: Int,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Certify the 2-divisibility bound for the quadratic twists by ±q
    Certify {
        #[arg(long = "type")]
        family: String,
        #[arg(long)]
        p: Int,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<i8>,
        #[arg(long)]
        q: Int,
        /// Sign of the twist d = ±q
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        twist_sign: i8,
        /// CSV with label,a,b,modular_degree,manin_constant,rank rows
        #[arg(long)]
        data: PathBuf,
        /// Caller-asserted: base curve has rank exactly 1
        #[arg(long, default_value_t = false)]
        rank_one: bool,
        /// Caller-asserted: the 2-divisibility bound is known for the base
        #[arg(long, default_value_t = false)]
        base_known: bool,
        /// Fetch missing rows over HTTP (requires the `fetch` build feature)
        #[arg(long, default_value_t = false)]
        fetch: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the full markdown report
    Report {
        #[arg(long, default_value = "paper")]
        suite: String,
        #[arg(long, default_value = "100000")]
        bound: Int,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        depth: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct JsonEnvelope<T: Serialize> {
    schema: &'static str,
    emitted_at: String,
    #[serde(flatten)]
    body: T,
}

fn timestamp() -> String {
    // wall-clock seconds; the only non-deterministic output field
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    now.to_string()
}

fn append_jsonl<T: Serialize>(path: &Option<PathBuf>, body: &T) -> Result<(), i32> {
    let Some(path) = path else {
        return Ok(());
    };
    let envelope = JsonEnvelope {
        schema: crate::SCHEMA,
        emitted_at: timestamp(),
        body,
    };
    let line = serde_json::to_string(&envelope).map_err(|_| EXIT_IO)?;
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| {
            eprintln!("cannot open {}: {e}", path.display());
            EXIT_IO
        })?;
    writeln!(f, "{line}").map_err(|_| EXIT_IO)?;
    Ok(())
}

/// Re-validate a JSONL certificate file: every line must parse and carry the
/// expected schema tag.
pub fn validate_jsonl(path: &std::path::Path) -> Result<usize, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut n = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        match v.get("schema").and_then(|s| s.as_str()) {
            Some(s) if s == crate::SCHEMA => n += 1,
            other => return Err(format!("line {}: bad schema tag {:?}", i + 1, other)),
        }
    }
    Ok(n)
}

fn parse_family(s: &str) -> Result<FamilyLabel, i32> {
    s.parse::<FamilyLabel>().map_err(|e| {
        eprintln!("{e}");
        EXIT_DOMAIN
    })
}

/// Find the instances at (type, p): all admissible (k, sign) when they are
/// not pinned on the command line.
fn resolve_instances(
    label: FamilyLabel,
    p: &Int,
    k: Option<u64>,
    sign: Option<i8>,
) -> Vec<families::FamilyInstance> {
    let ft = families::family(label);
    let ks: Vec<u64> = match k {
        Some(k) => vec![k],
        None => {
            let cap = crate::intcore::ivorra_bound(p).unwrap_or(18);
            match ft.k_range {
                families::KRange::TwoToFive => (2..=5).collect(),
                families::KRange::ThreeOrFive => vec![3, 5],
                families::KRange::FourToFOfP => (4..=cap).collect(),
                families::KRange::TwoToFOfP => (2..=cap).collect(),
                families::KRange::OneOrTwo => vec![1, 2],
                families::KRange::OneTo164969 => (1..=6).collect(),
                families::KRange::KFree => vec![1],
            }
        }
    };
    let mut out = Vec::new();
    for kk in ks {
        let signs = match sign {
            Some(s) => vec![s],
            None => ft.allowed_signs(kk),
        };
        for s in signs {
            if let Ok(inst) = families::instantiate(label, p, kk, s) {
                out.push(inst);
            }
        }
    }
    out
}

pub fn run(cli: Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        // best effort; a pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match cli.command {
        Command::Generate {
            family,
            p,
            k,
            sign,
            output,
        } => {
            let label = match parse_family(&family) {
                Ok(l) => l,
                Err(c) => return c,
            };
            let instances = resolve_instances(label, &p, k, sign);
            if instances.is_empty() {
                eprintln!("no instance of type {label} at p = {p} (beta is not a perfect square, or k/sign out of range)");
                return EXIT_DOMAIN;
            }
            for inst in &instances {
                println!("{inst}");
                if !inst.strict {
                    println!("  note: p < 29, outside the unconditional classification range");
                }
                println!(
                    "  alpha = {}, beta = {}, possible conductor exponents m in {:?}",
                    inst.alpha, inst.beta, inst.m_set
                );
                let t32 = families::theorem32_applies(inst);
                if t32.applies {
                    println!(
                        "  rank bound case {}: {}",
                        t32.case.unwrap(),
                        t32.reason
                    );
                }
                for row in families::table2_report(inst) {
                    println!("  [{}] {}", row.conditions, row.verdict);
                }
                if append_jsonl(&output, inst).is_err() {
                    return EXIT_IO;
                }
            }
            EXIT_OK
        }
        Command::Descend {
            family,
            p,
            k,
            sign,
            mode,
            depth,
            output,
        } => {
            let label = match parse_family(&family) {
                Ok(l) => l,
                Err(c) => return c,
            };
            let instances = resolve_instances(label, &p, k, sign);
            let Some(inst) = instances.first() else {
                eprintln!("no instance of type {label} at p = {p}");
                return EXIT_DOMAIN;
            };
            let modes: Vec<Mode> = match mode {
                ModeArg::Paper => vec![Mode::PaperFaithful],
                ModeArg::Oracle => vec![Mode::Oracle],
                ModeArg::Both => vec![Mode::PaperFaithful, Mode::Oracle],
            };
            for m in &modes {
                match descent::rank_certificate(inst, *m, depth) {
                    Ok(cert) => {
                        println!("{} [{:?}]", cert.instance, m);
                        println!(
                            "  naive bound {}, selmer bound {} (dims {} + {}), final bound {}",
                            cert.naive_bound,
                            cert.selmer_bound,
                            cert.dim_phi,
                            cert.dim_phi_prime,
                            cert.final_bound
                        );
                        if let Some(note) = &cert.conditional_watkins {
                            println!("  {note}");
                        }
                        print!("{}", descent::render_grid(&[&cert.phi, &cert.phi_prime]));
                        if append_jsonl(&output, &cert).is_err() {
                            return EXIT_IO;
                        }
                    }
                    Err(DescentError::Inconclusive { d, place, depth }) => {
                        eprintln!(
                            "inconclusive cell d = {d} at {place} (depth {depth}); rerun with a larger --depth"
                        );
                        return EXIT_INCONCLUSIVE;
                    }
                    Err(e) => {
                        eprintln!("{e}");
                        return EXIT_DOMAIN;
                    }
                }
            }
            if mode == ModeArg::Both {
                match descent::adjudicate(inst, depth) {
                    Ok(adj) => {
                        if adj.discrepancies.is_empty() {
                            println!("adjudication: oracle confirms the published row ({})", adj.row);
                        } else {
                            println!(
                                "adjudication: {} cell(s) of published row '{}' differ:",
                                adj.discrepancies.len(),
                                adj.row
                            );
                            for d in &adj.discrepancies {
                                println!(
                                    "  side {:?}, d = {}: published {:?}({}) vs oracle {}",
                                    d.side, d.d, d.fixture, d.fixture_tag, d.oracle
                                );
                            }
                        }
                        if append_jsonl(&output, &adj).is_err() {
                            return EXIT_IO;
                        }
                    }
                    Err(DescentError::Other(_)) => {
                        println!("adjudication: no published row for type {label}");
                    }
                    Err(e) => {
                        eprintln!("{e}");
                        return EXIT_INCONCLUSIVE;
                    }
                }
            }
            EXIT_OK
        }
        Command::Sweep {
            family,
            k,
            bound,
            output,
        } => {
            let label = match parse_family(&family) {
                Ok(l) => l,
                Err(c) => return c,
            };
            match families::sweep(label, k, &bound) {
                Ok(primes) => {
                    let arr: Vec<String> = primes.iter().map(|p| p.to_string()).collect();
                    println!("[{}]", arr.join(", "));
                    #[derive(Serialize)]
                    struct SweepOut {
                        family: String,
                        k: u64,
                        bound: String,
                        primes: Vec<String>,
                    }
                    let body = SweepOut {
                        family: label.to_string(),
                        k,
                        bound: bound.to_string(),
                        primes: arr,
                    };
                    if append_jsonl(&output, &body).is_err() {
                        return EXIT_IO;
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_DOMAIN
                }
            }
        }
        Command::Certify {
            family,
            p,
            k,
            sign,
            q,
            twist_sign,
            data,
            rank_one,
            base_known,
            fetch,
            output,
        } => {
            let label = match parse_family(&family) {
                Ok(l) => l,
                Err(c) => return c,
            };
            let instances = resolve_instances(label, &p, k, sign);
            let Some(inst) = instances.first() else {
                eprintln!("no instance of type {label} at p = {p}");
                return EXIT_DOMAIN;
            };
            let rows = match watkins::load_csv(&data) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return EXIT_IO;
                }
            };
            let row = watkins::find_by_coefficients(&rows, &inst.pair.e.a, &inst.pair.e.b);
            let row = match row {
                Some(r) => r.clone(),
                None => {
                    if fetch {
                        #[cfg(feature = "fetch")]
                        {
                            let base = std::env::var("IVORRA_WATKINS_DATA_URL")
                                .unwrap_or_else(|_| "http://localhost:8080".into());
                            match watkins::fetch_curve(&base, &format!("{label}-{p}")) {
                                Ok(r) => r,
                                Err(e) => {
                                    eprintln!("{e}");
                                    return EXIT_IO;
                                }
                            }
                        }
                        #[cfg(not(feature = "fetch"))]
                        {
                            eprintln!("built without the `fetch` feature");
                            return EXIT_DOMAIN;
                        }
                    } else {
                        eprintln!(
                            "no data row matches (a, b) = ({}, {}); extend the CSV or pass --fetch",
                            inst.pair.e.a, inst.pair.e.b
                        );
                        return EXIT_DOMAIN;
                    }
                }
            };
            let facts = CallerFacts {
                rank_exactly_one: rank_one,
                watkins_known_for_base: base_known,
            };
            match watkins::certify_twist(inst, &row, &q, twist_sign, facts) {
                Ok(cert) => {
                    println!(
                        "twist of {} by {}{}: a_q = {}, v2 >= {}, rank bound {}",
                        cert.base,
                        if twist_sign >= 0 { "+" } else { "-" },
                        q,
                        cert.a_q,
                        cert.v2_lower,
                        cert.rank_bound
                    );
                    match &cert.verdict {
                        watkins::Verdict::CertifiedUnconditional { lemma } => {
                            println!("  CERTIFIED (unconditional): {lemma}")
                        }
                        watkins::Verdict::CertifiedConditional { hypotheses } => {
                            println!("  CERTIFIED (conditional): {hypotheses}")
                        }
                        watkins::Verdict::Unknown { reason } => {
                            println!("  UNKNOWN: open case [{reason}]")
                        }
                    }
                    if append_jsonl(&output, &cert).is_err() {
                        return EXIT_IO;
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_DOMAIN
                }
            }
        }
        Command::Report {
            suite,
            bound,
            depth,
            output,
        } => {
            if suite != "paper" {
                eprintln!("unknown suite {suite:?} (only \"paper\" exists)");
                return EXIT_DOMAIN;
            }
            let cfg = report::ReportConfig {
                sweep_bound: bound,
                depth,
            };
            match report::paper_suite(&cfg) {
                Ok(md) => {
                    if let Some(path) = output {
                        if std::fs::write(&path, &md).is_err() {
                            eprintln!("cannot write {}", path.display());
                            return EXIT_IO;
                        }
                        println!("report written to {}", path.display());
                    } else {
                        println!("{md}");
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_DOMAIN
                }
            }
        }
    }
}

pub fn main_entry() -> i32 {
    run(Cli::parse())
}
