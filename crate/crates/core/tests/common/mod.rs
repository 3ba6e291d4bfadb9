//! Checks shared by the acceptance runner and the standalone suites. Each
//! check returns an [`Outcome`] instead of panicking so the runner can
//! report every line before deciding the exit status.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use homloci::bundlecalc::{BundleExpr, Calc, DecomposedBundle};
use homloci::bwb::{bott, dual_label, euler_char, FactorDescriptor, SpaceDescriptor};
use homloci::chow::{anticanonical_degree, hrr_chi};
use homloci::combinat::{
    decompose_character, lr_multiply, product_weights, weyl_dim, IntVector, Partition,
    WeightMultiset,
};
use homloci::koszul::{hodge_numbers, restricted_cohomology, tangent_cohomology, ZeroLocusProblem};
use homloci::models::{self, Expected, ModelRecord, Status, VerifyReport};

/// Result of one check with a one-line explanation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn from_failures(failures: Vec<String>, ok: String) -> Self {
        if failures.is_empty() {
            Outcome {
                pass: true,
                detail: ok,
            }
        } else {
            Outcome {
                pass: false,
                detail: failures.join("; "),
            }
        }
    }
}

/// The space of the worked example, `P^2 x Gr(2,4)`.
pub fn worked_space() -> SpaceDescriptor {
    SpaceDescriptor::new(vec![
        FactorDescriptor::Projective(2),
        FactorDescriptor::Grassmannian(2, 4),
    ])
    .unwrap()
}

/// `F = U^dual(1,0) + O(0,2)` on [`worked_space`].
pub fn worked_bundle() -> BundleExpr {
    BundleExpr::Sum(vec![
        BundleExpr::sub(2).dual().twist(vec![1, 0]),
        BundleExpr::Line(vec![0, 2]),
    ])
}

/// `Omega_X` of [`worked_space`] written as a bundle expression.
pub fn worked_cotangent() -> BundleExpr {
    BundleExpr::Sum(vec![
        BundleExpr::quotient(1).dual().twist(vec![-1, 0]),
        BundleExpr::Tensor(vec![BundleExpr::sub(2), BundleExpr::quotient(2).dual()]),
    ])
}

/// Exact cohomology dimensions of a completely reducible ambient bundle.
pub fn ambient_cohomology(space: &SpaceDescriptor, b: &DecomposedBundle) -> Vec<i128> {
    let mut out = vec![0i128; space.dim() + 1];
    for (_, label, mult) in b.summands() {
        let r = bott(space, label).unwrap();
        if let Some(q) = r.degree {
            out[q] += r.dimension as i128 * mult as i128;
        }
    }
    out
}

fn expect_eq(failures: &mut Vec<String>, what: &str, got: Option<i128>, want: i128) {
    if got != Some(want) {
        failures.push(format!("{what}: got {got:?}, want {want}"));
    }
}

/// The worked example on `P^2 x Gr(2,4)`, intermediate groups included.
pub fn worked_example() -> Outcome {
    let start = Instant::now();
    let space = worked_space();
    let problem = ZeroLocusProblem::new(space.clone(), worked_bundle());
    let calc = Calc::new(&space).unwrap();
    let f = calc.normalize(&worked_bundle()).unwrap();
    let fd = calc.dual(&f);
    let omega = calc.cotangent();
    let mut failures = Vec::new();

    let ambient: Vec<(&str, DecomposedBundle, usize, i128)> = vec![
        ("h4(F* x F*)", calc.tensor(&fd, &fd), 4, 1),
        ("h3(F* x Omega)", calc.tensor(&fd, &omega), 3, 1),
        ("h1(Omega)", omega.clone(), 1, 2),
        ("h0(T)", calc.tangent(), 0, 23),
        (
            "h2(Wedge2 F* x F)",
            calc.tensor(&calc.exterior_powers(&fd, 2)[2], &f),
            2,
            1,
        ),
        ("h0(F* x F)", calc.tensor(&fd, &f), 0, 2),
        ("h0(F)", f.clone(), 0, 32),
    ];
    for (name, b, q, want) in ambient {
        let h = ambient_cohomology(&space, &b);
        expect_eq(&mut failures, name, Some(h[q]), want);
    }

    let conormal =
        restricted_cohomology(&problem, &BundleExpr::Dual(Box::new(worked_bundle()))).unwrap();
    expect_eq(&mut failures, "h3(F*|Y)", conormal.exact_at(3), 1);
    let omega_y = restricted_cohomology(&problem, &worked_cotangent()).unwrap();
    expect_eq(&mut failures, "h1(Omega_X|Y)", omega_y.exact_at(1), 2);
    expect_eq(&mut failures, "h2(Omega_X|Y)", omega_y.exact_at(2), 1);

    let table = hodge_numbers(&problem).unwrap();
    expect_eq(&mut failures, "h00", table.get(0, 0), 1);
    expect_eq(&mut failures, "h11", table.get(1, 1), 2);
    expect_eq(&mut failures, "h12", table.get(1, 2), 2);

    let t = tangent_cohomology(&problem).unwrap();
    expect_eq(&mut failures, "h0(T_X|Y)", t.ambient.exact_at(0), 24);
    expect_eq(&mut failures, "h0(F|Y)", t.normal.exact_at(0), 31);
    expect_eq(&mut failures, "h1(T_Y)-h0(T_Y)", t.difference, 7);

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 10.0 {
        failures.push(format!("took {elapsed:?}, limit 10 s"));
    }
    Outcome::from_failures(failures, format!("all 20 values exact in {elapsed:.2?}"))
}

/// Del Pezzo rows in their own numbering with the tabulated `K^2`.
pub const DEL_PEZZO_ROWS: [(&str, u32, i128); 10] = [
    ("dp-1-1", 0, 9),
    ("dp-2-1", 0, 8),
    ("dp-2-2", 0, 8),
    ("dp-3-1", 0, 7),
    ("dp-4-1", 0, 6),
    ("dp-4-1", 1, 6),
    ("dp-5-1", 0, 5),
    ("dp-6-1", 0, 4),
    ("dp-7-1", 0, 3),
    ("dp-8-1", 1, 2),
];

fn record(id: &str, variant: u32) -> Option<&'static ModelRecord> {
    models::lookup(id)
        .into_iter()
        .find(|r| r.variant == variant)
}

/// `K^2` and `chi(-K) = K^2 + 1` for every non-weighted del Pezzo row.
pub fn del_pezzo_table() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (id, variant, k2) in DEL_PEZZO_ROWS {
        let Some(r) = record(id, variant) else {
            failures.push(format!("{id} alt {variant} missing"));
            continue;
        };
        let rep = models::verify(r);
        expect_eq(
            &mut failures,
            &format!("{id}/{variant} K^2"),
            rep.check("K^2").and_then(|c| c.value()),
            k2,
        );
        expect_eq(
            &mut failures,
            &format!("{id}/{variant} chi(-K)"),
            rep.check("chi(-K)").and_then(|c| c.value()),
            k2 + 1,
        );
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        failures.push(format!("took {elapsed:?}, limit 30 s"));
    }
    Outcome::from_failures(
        failures,
        format!("{} rows in {elapsed:.2?}", DEL_PEZZO_ROWS.len()),
    )
}

/// Non-weighted 3-fold records, verified in parallel.
pub fn threefold_reports() -> Vec<VerifyReport> {
    use rayon::prelude::*;
    let records: Vec<&ModelRecord> = models::list("")
        .into_iter()
        .filter(|r| !r.is_surface() && !r.is_weighted())
        .collect();
    records.par_iter().map(|r| models::verify(r)).collect()
}

/// Every non-weighted 3-fold record against its reference values. Records
/// whose Hodge intervals stay open are listed by id.
pub fn catalog_verification(reports: &[VerifyReport]) -> Outcome {
    let start = Instant::now();
    let families: std::collections::BTreeSet<&str> =
        reports.iter().map(|r| r.id.as_str()).collect();
    let mut failures = Vec::new();
    let mut open = Vec::new();
    for r in reports {
        if !r.open_entries.is_empty() {
            open.push(format!("{}/{}", r.id, r.variant));
        }
        if r.status != Status::Pass {
            let bad: Vec<String> = r
                .checks
                .iter()
                .filter(|c| c.pass == Some(false))
                .map(|c| format!("{}=[{},{}]", c.name, c.lb, c.ub))
                .collect();
            failures.push(format!(
                "{}/{} {} {}",
                r.id,
                r.variant,
                r.status,
                bad.join(" ")
            ));
        }
    }
    if families.len() != 102 {
        failures.push(format!(
            "{} non-weighted families, want 102",
            families.len()
        ));
    }
    if !open.is_empty() {
        failures.push(format!(
            "{} records do not pinch: {}",
            open.len(),
            open.join(", ")
        ));
    }
    Outcome::from_failures(
        failures,
        format!(
            "{} records of {} families in {:.2?}",
            reports.len(),
            families.len(),
            start.elapsed()
        ),
    )
}

/// Variants of one family must produce identical invariant tuples.
pub fn cross_variant(reports: &[VerifyReport]) -> Outcome {
    let mut by_id: BTreeMap<&str, Vec<&VerifyReport>> = BTreeMap::new();
    for r in reports {
        by_id.entry(r.id.as_str()).or_default().push(r);
    }
    let mut failures = Vec::new();
    let mut compared = 0;
    for (id, reps) in by_id {
        if reps.len() < 2 {
            continue;
        }
        compared += 1;
        let first = reps[0].invariant_tuple();
        for r in &reps[1..] {
            let t = r.invariant_tuple();
            if t != first || t.iter().any(|x| x.is_none()) {
                failures.push(format!(
                    "{id}: variant {} {:?} vs variant {} {:?}",
                    reps[0].variant, first, r.variant, t
                ));
            }
        }
    }
    Outcome::from_failures(failures, format!("{compared} multi-variant families agree"))
}

/// Deformation counts `h^0(F|Y) - h^0(T_X|Y)` for two families.
pub fn deformations() -> Outcome {
    let mut failures = Vec::new();
    for (id, normal, ambient) in [("3-5", 79, 74), ("4-13", 34, 33)] {
        let r = record(id, 0).expect("primary record");
        let t = tangent_cohomology(&r.problem()).unwrap();
        expect_eq(
            &mut failures,
            &format!("{id} h0(F|Y)"),
            t.normal.exact_at(0),
            normal,
        );
        expect_eq(
            &mut failures,
            &format!("{id} h0(T_X|Y)"),
            t.ambient.exact_at(0),
            ambient,
        );
        expect_eq(
            &mut failures,
            &format!("{id} difference"),
            t.difference,
            normal - ambient,
        );
    }
    Outcome::from_failures(failures, "3-5 gives 79-74=5, 4-13 gives 34-33=1".into())
}

/// Factors small enough to combine into spaces of dimension at most 8.
pub fn small_factors() -> Vec<FactorDescriptor> {
    vec![
        FactorDescriptor::Projective(1),
        FactorDescriptor::Projective(2),
        FactorDescriptor::Projective(3),
        FactorDescriptor::Projective(4),
        FactorDescriptor::Grassmannian(2, 4),
        FactorDescriptor::Grassmannian(2, 5),
        FactorDescriptor::Grassmannian(3, 5),
        FactorDescriptor::Flag(vec![1, 2], 3),
        FactorDescriptor::Flag(vec![1, 2], 4),
        FactorDescriptor::Flag(vec![1, 3], 4),
        FactorDescriptor::Flag(vec![1, 2, 3], 4),
    ]
}

/// A random product space of dimension at most `max_dim`.
pub fn random_space(rng: &mut impl Rng, max_dim: usize) -> SpaceDescriptor {
    let pool = small_factors();
    let mut factors = Vec::new();
    let mut dim = 0;
    let count = rng.gen_range(1..=3);
    for _ in 0..count {
        let fits: Vec<&FactorDescriptor> =
            pool.iter().filter(|f| dim + f.dim() <= max_dim).collect();
        if fits.is_empty() {
            break;
        }
        let f = fits[rng.gen_range(0..fits.len())].clone();
        dim += f.dim();
        factors.push(f);
    }
    SpaceDescriptor::new(factors).unwrap()
}

/// A random blockwise dominant label with entries in `-r..=r`.
pub fn random_label(rng: &mut impl Rng, space: &SpaceDescriptor, r: i64) -> IntVector {
    let mut out = Vec::with_capacity(space.label_len());
    for b in space.all_block_sizes() {
        let mut block: Vec<i64> = (0..b).map(|_| rng.gen_range(-r..=r)).collect();
        block.sort_unstable_by(|x, y| y.cmp(x));
        out.extend(block);
    }
    out
}

/// Euler characteristics from Bott's algorithm against Riemann-Roch by
/// localization, plus integrality of the catalog's degree integrals.
pub fn oracle_equivalence(cases: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let space = random_space(&mut rng, 8);
        let label = random_label(&mut rng, &space, 3);
        let bwb = euler_char(&space, &label).unwrap();
        match hrr_chi(&space, &DecomposedBundle::irreducible(label.clone())) {
            Ok(chi) if chi == BigInt::from(bwb) => {}
            Ok(chi) => failures.push(format!("{space} {label:?}: bott {bwb}, hrr {chi}")),
            Err(e) => failures.push(format!("{space} {label:?}: {e}")),
        }
    }
    // Every localization sum checks integrality and parameter independence
    // before returning, so an Ok result certifies both.
    let mut integrals = 0;
    for r in models::catalog().iter().filter(|r| !r.is_weighted()) {
        match anticanonical_degree(&r.space, &r.bundle) {
            Ok(_) => integrals += 1,
            Err(e) => failures.push(format!("{}/{} degree: {e}", r.id, r.variant)),
        }
    }
    Outcome::from_failures(
        failures,
        format!("{cases} random irreducibles agree; {integrals} catalog integrals integral and parameter independent"),
    )
}

/// `h^q(E) = h^{n-q}(E^dual x K)` for random irreducible `E`.
pub fn serre_duality(cases: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let space = random_space(&mut rng, 8);
        let label = random_label(&mut rng, &space, 4);
        let k = space.canonical_bundle_label();
        let dual: IntVector = dual_label(&space, &label)
            .iter()
            .zip(&k)
            .map(|(a, b)| a + b)
            .collect();
        let a = bott(&space, &label).unwrap();
        let b = bott(&space, &dual).unwrap();
        let n = space.dim();
        let ok = match (a.degree, b.degree) {
            (None, None) => true,
            (Some(p), Some(q)) => p + q == n && a.dimension == b.dimension,
            _ => false,
        };
        if !ok {
            failures.push(format!(
                "{space} {label:?}: {:?} vs {:?}",
                (a.degree, a.dimension),
                (b.degree, b.dimension)
            ));
        }
    }
    Outcome::from_failures(failures, format!("{cases} cases"))
}

/// Partitions with at most `rows` rows and entries at most `max`.
pub fn partitions_in_box(rows: usize, max: u32) -> Vec<Partition> {
    fn go(rows: usize, max: u32, prefix: &mut Vec<i64>, out: &mut Vec<Partition>) {
        out.push(Partition::new(prefix).unwrap());
        if prefix.len() == rows {
            return;
        }
        let cap = prefix.last().map_or(max as i64, |&x| x);
        for v in 1..=cap {
            prefix.push(v);
            go(rows, max, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(rows, max, &mut Vec::new(), &mut out);
    out
}

/// `dim V_lambda * dim V_mu = sum_nu c^nu_{lambda mu} dim V_nu` in `GL(n)`
/// for every `n <= 5` and every pair in the `n x 4` box.
pub fn lr_weyl_consistency() -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    let all = partitions_in_box(5, 4);
    for (i, lambda) in all.iter().enumerate() {
        for mu in &all[i..] {
            let product = lr_multiply(lambda, mu);
            for n in lambda.len().max(mu.len()).max(1)..=5 {
                pairs += 1;
                let lhs =
                    weyl_dim(&lambda.padded(n), n).unwrap() * weyl_dim(&mu.padded(n), n).unwrap();
                let mut rhs = BigInt::from(0);
                for (nu, c) in &product {
                    if nu.len() <= n {
                        rhs += weyl_dim(&nu.padded(n), n).unwrap() * BigInt::from(*c);
                    }
                }
                if lhs != rhs {
                    failures.push(format!("{lambda} x {mu} in GL({n}): {lhs} vs {rhs}"));
                }
            }
        }
    }
    Outcome::from_failures(failures, format!("{pairs} pairs consistent"))
}

/// Sums of random irreducible characters decompose back into themselves.
pub fn decompose_round_trip(cases: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let blocks: Vec<usize> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(1..=3))
            .collect();
        let mut want: BTreeMap<Vec<IntVector>, u64> = BTreeMap::new();
        for _ in 0..rng.gen_range(1..=4) {
            let hw: Vec<IntVector> = blocks
                .iter()
                .map(|&b| {
                    let mut v: Vec<i64> = (0..b).map(|_| rng.gen_range(-2..=3)).collect();
                    v.sort_unstable_by(|x, y| y.cmp(x));
                    v
                })
                .collect();
            *want.entry(hw).or_insert(0) += rng.gen_range(1..=2);
        }
        let mut character = WeightMultiset::new();
        for (hw, m) in &want {
            let refs: Vec<&[i64]> = hw.iter().map(|v| v.as_slice()).collect();
            for (w, c) in product_weights(&refs).unwrap() {
                *character.entry(w).or_insert(0) += c * m;
            }
        }
        match decompose_character(&character, &blocks) {
            Ok(got) if got == want => {}
            Ok(got) => failures.push(format!("{want:?} decomposed as {got:?}")),
            Err(e) => failures.push(format!("{want:?}: {e}")),
        }
    }
    Outcome::from_failures(failures, format!("{cases} characters"))
}

/// The embedded catalog survives printing and parsing unchanged.
pub fn catalog_round_trip() -> Outcome {
    let records = models::catalog();
    let printed = models::print(records);
    let mut failures = Vec::new();
    match models::parse(&printed) {
        Ok(back) if back == records => {
            if models::print(&back) != printed {
                failures.push("printing is not idempotent".into());
            }
        }
        Ok(back) => {
            let first = records.iter().zip(&back).find(|(a, b)| a != b);
            failures.push(format!("first difference: {first:?}"));
        }
        Err(e) => failures.push(e.to_string()),
    }
    Outcome::from_failures(failures, format!("{} records", records.len()))
}

/// All property suites under one outcome, with their runtime.
pub fn property_suites() -> Outcome {
    let start = Instant::now();
    let parts = [
        ("serre", serre_duality(100, 7)),
        ("lr/weyl", lr_weyl_consistency()),
        ("decompose", decompose_round_trip(100, 11)),
        ("catalog", catalog_round_trip()),
    ];
    let mut failures: Vec<String> = parts
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, o)| format!("{n}: {}", o.detail))
        .collect();
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 60.0 {
        failures.push(format!("took {elapsed:?}, limit 60 s"));
    }
    let ok: Vec<String> = parts
        .iter()
        .map(|(n, o)| format!("{n} {}", o.detail))
        .collect();
    Outcome::from_failures(failures, format!("{} in {elapsed:.2?}", ok.join(", ")))
}

/// Reference tuple of a 3-fold record, for tests that need it directly.
pub fn threefold_expected(r: &ModelRecord) -> Option<(i128, i128, i128, i128)> {
    match r.expected {
        Expected::Threefold {
            h0: Some(a),
            k3: Some(b),
            h21: Some(c),
            rho: Some(d),
        } => Some((a, b, c, d)),
        _ => None,
    }
}
