//! `s3m`: tables, compositions, reduction, classification and orbit checks.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use s3m_core::catalog::{compose, pi, Complex, Morph};
use s3m_core::classify::{classify_2local, classify_3local, classify_total, homology_audit, localize_decomposition, ManifoldInvariants, WedgeDecomposition};
use s3m_core::descriptor::parse_descriptor;
use s3m_core::oracle::{cross_check_with, shipped_moves, DEFAULT_STATE_BUDGET};
use s3m_core::reduce::canonicalize;
use s3m_core::wedgemap::{AttachingVector, WedgeSpace};
use s3m_core::Error;

const JSON_SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "s3m", version, about = "Homotopy decompositions of triple suspensions of 6-manifolds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Local {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Total,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the homotopy group table of a complex, e.g. `table Ceta7 8`.
    Table { complex: String, degree: u32 },
    /// Compose a map with an element, e.g. `compose 'q[P7(2^1)]' 8 '[1*etatilde]'`.
    Compose { map: String, degree: u32, element: String },
    /// Canonical form of an attaching vector, e.g. `reduce 'P7(2^2)' '[1*i_eta2 + 1*etatilde]'`.
    Reduce {
        wedge: String,
        vector: String,
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// Candidate decompositions for a manifold descriptor.
    Classify {
        /// descriptor file (omit with --batch)
        descriptor: Option<String>,
        #[arg(long, value_enum, default_value = "total")]
        local: Local,
        #[arg(long)]
        json: bool,
        /// file listing one descriptor path per line
        #[arg(long)]
        batch: Option<String>,
    },
    /// Orbit partition of attaching vectors under the shipped self-equivalences.
    Oracle {
        wedge: String,
        /// state budget; overrides S3M_BUDGET
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        #[arg(long)]
        json: bool,
    },
    /// Homology and localization checks for every candidate of a descriptor.
    Audit { descriptor: String },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidSplitting(_) | Error::Parse { .. } => 2,
        Error::FlagMismatch(_) | Error::NoCarrier(_) => 3,
        Error::Indeterminate(_) => 4,
        _ => 1,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {}", e);
    ExitCode::from(exit_code(&e))
}

fn read_descriptor(path: &str) -> Result<ManifoldInvariants, Error> {
    let src = fs::read_to_string(path).map_err(|e| Error::Parse { pos: 0, msg: format!("{}: {}", path, e) })?;
    parse_descriptor(&src)
}

fn classify_at(inv: &ManifoldInvariants, local: Local) -> Result<Vec<WedgeDecomposition>, Error> {
    match local {
        Local::Two => classify_2local(inv),
        Local::Three => classify_3local(inv),
        Local::Total => classify_total(inv),
    }
}

fn candidates_json(path: &str, list: &[WedgeDecomposition]) -> Value {
    json!({
        "schema": JSON_SCHEMA,
        "descriptor": path,
        "candidates": list.iter().map(|d| json!({
            "tag": d.tag,
            "text": d.text,
            "locality": d.locality,
            "free_part": d.free_part.to_string(),
            "cone": d.cone_part.as_ref().map(|(w, v)| json!({ "wedge": w.to_string(), "vector": v.to_string() })),
        })).collect::<Vec<_>>(),
    })
}

fn error_json(path: &str, e: &Error) -> Value {
    json!({ "schema": JSON_SCHEMA, "descriptor": path, "error": e.to_string(), "exit": exit_code(e) })
}

fn run_classify(path: &str, local: Local, as_json: bool) -> (String, Option<Error>) {
    match read_descriptor(path).and_then(|inv| classify_at(&inv, local)) {
        Ok(list) if as_json => (candidates_json(path, &list).to_string(), None),
        Ok(list) => (list.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"), None),
        Err(e) if as_json => (error_json(path, &e).to_string(), Some(e)),
        Err(e) => (format!("{}: error: {}", path, e), Some(e)),
    }
}

fn env_budget() -> usize {
    std::env::var("S3M_BUDGET").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_STATE_BUDGET)
}

fn audit(path: &str) -> Result<bool, Error> {
    let inv = read_descriptor(path)?;
    let mut ok = true;
    let mut line = |pass: bool, what: String| {
        ok &= pass;
        println!("{} {}", if pass { "PASS" } else { "FAIL" }, what);
    };
    let total = classify_total(&inv)?;
    for d in total.iter().chain(&classify_2local(&inv)?).chain(&classify_3local(&inv)?) {
        line(homology_audit(d, &inv), format!("homology {}", d));
    }
    if !inv.smooth {
        let mut two: Vec<String> = total.iter().map(|d| localize_decomposition(d, &inv, 2).map(|x| x.to_string())).collect::<Result<_, _>>()?;
        two.dedup();
        let want: Vec<String> = classify_2local(&inv)?.iter().map(|d| d.to_string()).collect();
        line(sorted(two) == sorted(want), "localization at 2".into());
        let mut three: Vec<String> = total.iter().map(|d| localize_decomposition(d, &inv, 3).map(|x| x.to_string())).collect::<Result<_, _>>()?;
        three.dedup();
        let want: Vec<String> = classify_3local(&inv)?.iter().map(|d| d.to_string()).collect();
        line(sorted(three) == sorted(want), "localization at 3".into());
    }
    Ok(ok)
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v.dedup();
    v
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Table { complex, degree } => {
            let c: Complex = complex.parse()?;
            println!("{}", pi(&c, degree)?);
        }
        Cmd::Compose { map, degree, element } => {
            let m: Morph = map.parse()?;
            let (src, dst) = m.ends()?;
            let x = AttachingVector::parse(&WedgeSpace::new(vec![src])?, degree, &element)?;
            let y = compose(&m, &x.entries[0], degree)?;
            println!("{}", AttachingVector::new(WedgeSpace::new(vec![dst])?, degree, vec![y])?);
        }
        Cmd::Reduce { wedge, vector, trace, degree } => {
            let w: WedgeSpace = wedge.parse()?;
            let v = AttachingVector::parse(&w, degree, &vector)?;
            let red = canonicalize(&v, None)?;
            println!("{}", red.vector);
            if trace {
                for step in &red.trace {
                    println!("  {}", step);
                }
            }
        }
        Cmd::Classify { descriptor, local, json, batch } => {
            let paths: Vec<String> = match (&batch, descriptor) {
                (Some(b), _) => fs::read_to_string(b)
                    .map_err(|e| Error::Parse { pos: 0, msg: format!("{}: {}", b, e) })?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(String::from)
                    .collect(),
                (None, Some(d)) => vec![d],
                (None, None) => return Err(Error::Parse { pos: 0, msg: "a descriptor or --batch is required".into() }),
            };
            let results: Vec<(String, Option<Error>)> = paths.par_iter().map(|p| run_classify(p, local, json)).collect();
            let mut code = 0;
            for (path, (text, err)) in paths.iter().zip(&results) {
                if batch.is_some() && !json {
                    println!("== {}", path);
                }
                if err.is_some() && batch.is_none() && !json {
                    eprintln!("{}", text);
                } else {
                    println!("{}", text);
                }
                if let Some(e) = err {
                    code = code.max(exit_code(e));
                }
            }
            return Ok(ExitCode::from(code));
        }
        Cmd::Oracle { wedge, budget, degree, json } => {
            let w: WedgeSpace = wedge.parse()?;
            let budget = budget.unwrap_or_else(env_budget);
            let report = cross_check_with(&w, degree, &shipped_moves(&w, degree)?, budget)?;
            if json {
                let mut v = serde_json::to_value(&report).map_err(|e| Error::Structural(e.to_string()))?;
                v["schema"] = json!(JSON_SCHEMA);
                println!("{}", v);
            } else {
                println!("{}", report);
            }
        }
        Cmd::Audit { descriptor } => {
            if !audit(&descriptor)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}
