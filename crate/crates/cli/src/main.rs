//! Command-line front end: ad-hoc invariants and catalog verification.

use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use homloci::bwb::CohomologyProfile;
use homloci::chow::anticanonical_degree;
use homloci::koszul::{
    h0_anticanonical, hodge_numbers, tangent_cohomology, FanoConstraints, HodgeTable,
    ZeroLocusProblem, INF,
};
use homloci::models::{self, family_key, ModelRecord, Status, VerifyReport};

#[derive(Parser)]
#[command(
    name = "homloci",
    version,
    about = "Invariants of zero loci in products of flag varieties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog families with their variants and tags.
    List {
        /// Only ids starting with this prefix.
        prefix: Option<String>,
    },
    /// Compute the invariants of the zero locus of a general section.
    Invariants {
        /// Ambient space, e.g. "P(2) x Gr(2,4)".
        #[arg(long)]
        space: String,
        /// Bundle expression, e.g. "dual(U2)(1,0)+O(0,2)".
        #[arg(long)]
        bundle: String,
        /// Required dimension of the zero locus.
        #[arg(long)]
        dim: Option<usize>,
        /// Disable Hodge symmetry, Serre duality and Fano vanishing.
        #[arg(long, conflicts_with = "assume_fano")]
        no_constraints: bool,
        /// Apply Fano vanishing even when -K is not restricted from an ample class.
        #[arg(long)]
        assume_fano: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Verify catalog records against their reference invariants.
    Verify {
        /// Family ids; every variant of each is verified.
        ids: Vec<String>,
        /// Verify the whole catalog.
        #[arg(long)]
        all: bool,
        /// Read records from a model document instead ("-" for stdin).
        #[arg(long)]
        file: Option<String>,
        /// Number of worker threads.
        #[arg(long, env = "HOMLOCI_JOBS")]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the catalog, one canonical record per line.
    Dump,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::List { prefix } => {
            print!("{}", cmd_list(prefix.as_deref().unwrap_or("")));
            Ok(ExitCode::SUCCESS)
        }
        Command::Invariants {
            space,
            bundle,
            dim,
            no_constraints,
            assume_fano,
            format,
        } => {
            let mode = if no_constraints {
                Mode::Bare
            } else if assume_fano {
                Mode::Fano
            } else {
                Mode::Auto
            };
            print!("{}", cmd_invariants(&space, &bundle, dim, mode, format)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            ids,
            all,
            file,
            jobs,
            format,
        } => {
            let records = select_records(&ids, all, file.as_deref())?;
            let reports = verify_all(&records, jobs)?;
            print!("{}", render_reports(&reports, format));
            let failed = reports
                .iter()
                .any(|r| matches!(r.status, Status::Fail | Status::Error));
            Ok(if failed {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Dump => {
            print!("{}", models::dump());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_list(prefix: &str) -> String {
    let mut out = String::new();
    let records = models::list(prefix);
    let mut i = 0;
    while i < records.len() {
        let id = &records[i].id;
        let group: Vec<&ModelRecord> = records[i..]
            .iter()
            .take_while(|r| &r.id == id)
            .copied()
            .collect();
        let variants: Vec<String> = group.iter().map(|r| r.variant.to_string()).collect();
        let mut tags: Vec<String> = Vec::new();
        for r in &group {
            for t in &r.tags {
                let name = if group.len() > 1 {
                    format!("{t}@{}", r.variant)
                } else {
                    t.to_string()
                };
                tags.push(name);
            }
        }
        let _ = writeln!(
            out,
            "{id}\tvariants={}\ttags={}",
            variants.join(","),
            tags.join(",")
        );
        i += group.len();
    }
    out
}

/// Which constraints `invariants` feeds to the interval network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Bare,
    /// Fano vanishing only when `-K_Y` is restricted from an ample class.
    Auto,
    Fano,
}

fn cmd_invariants(
    space: &str,
    bundle: &str,
    dim: Option<usize>,
    mode: Mode,
    format: Format,
) -> Result<String> {
    let space = models::parse_space(space).context("in --space")?;
    let bundle = models::parse_bundle(bundle, &space).context("in --bundle")?;
    let mut problem = ZeroLocusProblem::new(space.clone(), bundle.clone());
    problem.constraints = match mode {
        Mode::Bare => FanoConstraints::none(),
        Mode::Fano => FanoConstraints::all(),
        Mode::Auto => {
            let vanishing = problem.anticanonical_is_ample_restriction()?;
            FanoConstraints {
                vanishing,
                ..FanoConstraints::all()
            }
        }
    };
    let d = problem.locus_dim()?;
    if let Some(want) = dim {
        if want != d {
            bail!("zero locus has dimension {d}, not {want}");
        }
    }
    let degree = anticanonical_degree(&space, &bundle)?;
    let h0 = h0_anticanonical(&problem)?;
    let hodge = hodge_numbers(&problem)?;
    let tangent = tangent_cohomology(&problem)?;
    let mut out = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(out, "dimension: {d}");
            let _ = writeln!(out, "h0(-K): {h0}");
            let _ = writeln!(out, "(-K)^{d}: {degree}");
            let _ = writeln!(out, "Hodge numbers h^(p,q), rows p:");
            for p in 0..=d {
                let row: Vec<String> = (0..=d).map(|q| interval(hodge.interval(p, q))).collect();
                let _ = writeln!(out, "  p={p}: {}", row.join(" "));
            }
            let _ = writeln!(out, "constraints used: {}", constraints_list(&hodge));
            let _ = writeln!(out, "h^q(T_X|Y): {}", profile(&tangent.ambient));
            let _ = writeln!(out, "h^q(F|Y): {}", profile(&tangent.normal));
            let _ = writeln!(out, "h^q(T_Y): {}", profile(&tangent.tangent));
            match tangent.difference {
                Some(v) => {
                    let _ = writeln!(out, "h1(T_Y) - h0(T_Y): {v}");
                }
                None => {
                    let _ = writeln!(out, "h1(T_Y) - h0(T_Y): undetermined");
                }
            }
        }
        Format::Machine => {
            let mut fields = vec![
                format!("dim={d}"),
                format!("h0_antiK={h0}"),
                format!("antiK_top={degree}"),
            ];
            for p in 0..=d {
                for q in 0..=d {
                    fields.push(format!("h{p}{q}={}", interval(hodge.interval(p, q))));
                }
            }
            fields.push(format!("constraints={}", constraints_list(&hodge)));
            fields.push(format!("h_TX={}", profile(&tangent.ambient)));
            fields.push(format!("h_F={}", profile(&tangent.normal)));
            fields.push(format!("h_TY={}", profile(&tangent.tangent)));
            fields.push(format!(
                "deformations={}",
                tangent
                    .difference
                    .map_or("_".to_string(), |v| v.to_string())
            ));
            let _ = writeln!(out, "{}", fields.join("\t"));
        }
    }
    Ok(out)
}

fn select_records(ids: &[String], all: bool, file: Option<&str>) -> Result<Vec<ModelRecord>> {
    if let Some(path) = file {
        let text = if path == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else {
            std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?
        };
        let records = models::parse(&text).context("parsing model document")?;
        if ids.is_empty() {
            return Ok(records);
        }
        return filter_ids(&records.iter().collect::<Vec<_>>(), ids);
    }
    if all {
        return Ok(models::list("").into_iter().cloned().collect());
    }
    if ids.is_empty() {
        bail!("give family ids, --all or --file");
    }
    let mut out = Vec::new();
    for id in ids {
        let found = models::lookup(id);
        if found.is_empty() {
            bail!("unknown id `{id}`");
        }
        out.extend(found.into_iter().cloned());
    }
    Ok(out)
}

fn filter_ids(records: &[&ModelRecord], ids: &[String]) -> Result<Vec<ModelRecord>> {
    let mut out = Vec::new();
    for id in ids {
        let found: Vec<ModelRecord> = records
            .iter()
            .filter(|r| &r.id == id)
            .map(|r| (*r).clone())
            .collect();
        if found.is_empty() {
            bail!("unknown id `{id}`");
        }
        out.extend(found);
    }
    Ok(out)
}

fn verify_all(records: &[ModelRecord], jobs: Option<usize>) -> Result<Vec<VerifyReport>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build()?;
    let mut reports: Vec<VerifyReport> =
        pool.install(|| records.par_iter().map(models::verify).collect());
    reports.sort_by(|a, b| {
        family_key(&a.id)
            .cmp(&family_key(&b.id))
            .then(a.variant.cmp(&b.variant))
    });
    Ok(reports)
}

fn render_reports(reports: &[VerifyReport], format: Format) -> String {
    let mut out = String::new();
    for r in reports {
        match format {
            Format::Text => {
                let _ = write!(out, "{:<8} alt {:<2} {:<8}", r.id, r.variant, r.status);
                for c in &r.checks {
                    let mark = match c.pass {
                        Some(true) => "",
                        Some(false) => "!",
                        None => "?",
                    };
                    let _ = write!(out, " {}={}{}", c.name, interval((c.lb, c.ub)), mark);
                }
                if r.formal {
                    let _ = write!(out, " formal");
                }
                if !r.constraints_used.is_empty() {
                    let used: Vec<String> =
                        r.constraints_used.iter().map(|c| c.to_string()).collect();
                    let _ = write!(out, " using {}", used.join(","));
                }
                if !r.open_entries.is_empty() {
                    let open: Vec<String> = r
                        .open_entries
                        .iter()
                        .map(|(p, q)| format!("h{p}{q}"))
                        .collect();
                    let _ = write!(out, " open {}", open.join(","));
                }
                if let Some(m) = &r.message {
                    let _ = write!(out, " ({m})");
                }
                out.push('\n');
            }
            Format::Machine => {
                let mut fields = vec![
                    format!("id={}", r.id),
                    format!("variant={}", r.variant),
                    format!("status={}", r.status),
                ];
                for c in &r.checks {
                    let expected = c.expected.map_or("_".to_string(), |v| v.to_string());
                    fields.push(format!(
                        "{}={}/{}",
                        c.name,
                        interval((c.lb, c.ub)),
                        expected
                    ));
                }
                fields.push(format!("formal={}", r.formal));
                let used: Vec<String> = r.constraints_used.iter().map(|c| c.to_string()).collect();
                fields.push(format!("constraints={}", used.join(",")));
                let open: Vec<String> = r
                    .open_entries
                    .iter()
                    .map(|(p, q)| format!("h{p}{q}"))
                    .collect();
                fields.push(format!("open={}", open.join(",")));
                let _ = writeln!(out, "{}", fields.join("\t"));
            }
        }
    }
    if format == Format::Text {
        let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
        let _ = writeln!(
            out,
            "summary: {} pass, {} fail, {} error, {} skipped",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Error),
            count(Status::NotMachineVerifiable)
        );
    }
    out
}

fn interval((lb, ub): (i128, i128)) -> String {
    if lb == ub {
        lb.to_string()
    } else if ub >= INF {
        format!("[{lb},inf]")
    } else {
        format!("[{lb},{ub}]")
    }
}

fn profile(p: &CohomologyProfile) -> String {
    let parts: Vec<String> =
        p.lb.iter()
            .zip(&p.ub)
            .map(|(&l, &u)| interval((l, u)))
            .collect();
    format!("({})", parts.join(","))
}

fn constraints_list(t: &HodgeTable) -> String {
    let v: Vec<String> = t.constraints_used.iter().map(|c| c.to_string()).collect();
    if v.is_empty() {
        "none".to_string()
    } else {
        v.join(",")
    }
}
