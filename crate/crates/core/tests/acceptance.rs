//! Acceptance runner: evaluates every acceptance check at exact tolerance,
//! prints one PASS or FAIL line per check and exits non-zero if any fails.
//!
//! Run alone with `cargo test -p homloci --test acceptance --release`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::Outcome;

type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = common::threefold_reports();
    let verify_time = start.elapsed();
    let checks: Vec<Check> = vec![
        ("worked example 2-16", Box::new(common::worked_example)),
        ("del Pezzo table", Box::new(common::del_pezzo_table)),
        (
            "catalog verification",
            Box::new(|| {
                let mut o = common::catalog_verification(&reports);
                o.detail = format!("{} (verification {verify_time:.2?})", o.detail);
                o
            }),
        ),
        (
            "cross-variant agreement",
            Box::new(|| common::cross_variant(&reports)),
        ),
        ("deformation counts", Box::new(common::deformations)),
        (
            "oracle equivalence",
            Box::new(|| common::oracle_equivalence(100, 2024)),
        ),
        ("property suites", Box::new(common::property_suites)),
    ];
    let mut failed = 0;
    for (name, run) in &checks {
        let o = run();
        println!(
            "{:<4} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} passed in {:.2?}",
        checks.len() - failed,
        checks.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
