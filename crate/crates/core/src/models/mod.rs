//! The model catalog: records of Fano 3-folds and del Pezzo surfaces as zero
//! loci, the grammar they are written in, and their verification.

pub mod dsl;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_traits::ToPrimitive;

use crate::bundlecalc::{BundleExpr, Calc};
use crate::bwb::SpaceDescriptor;
use crate::chow::anticanonical_degree;
use crate::koszul::{h0_anticanonical, hodge_numbers, Constraint, HodgeTable, ZeroLocusProblem};

pub use dsl::{parse, parse_bundle, parse_space, print, DslError};

/// Reference invariants attached to a record. `None` entries have no
/// reference value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    None,
    /// `(h^0(-K), (-K)^3, h^{2,1}, rho)`.
    Threefold {
        h0: Option<i128>,
        k3: Option<i128>,
        h21: Option<i128>,
        rho: Option<i128>,
    },
    /// `(K^2, chi(-K))`.
    Surface {
        k2: Option<i128>,
        chi: Option<i128>,
    },
}

impl Expected {
    /// Entries in the order of the textual tuple.
    pub fn tuple(&self) -> Option<Vec<Option<i128>>> {
        match *self {
            Expected::None => None,
            Expected::Threefold { h0, k3, h21, rho } => Some(vec![h0, k3, h21, rho]),
            Expected::Surface { k2, chi } => Some(vec![k2, chi]),
        }
    }

    /// Dimension of the zero locus the record describes, when known.
    pub fn locus_dim(&self) -> Option<usize> {
        match self {
            Expected::None => None,
            Expected::Threefold { .. } => Some(3),
            Expected::Surface { .. } => Some(2),
        }
    }
}

/// Catalog tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// The last summand has no sections on the ambient space; the zero
    /// locus is taken on the locus cut by the other summands.
    RestrictedSection,
    /// The ambient space has weighted factors; the record is data only.
    WeightedStoredOnly,
    /// The bundle contains a non-split extension.
    ExtensionBundle,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::RestrictedSection => "restricted-section",
            Tag::WeightedStoredOnly => "weighted-stored-only",
            Tag::ExtensionBundle => "extension-bundle",
        })
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "restricted-section" => Ok(Tag::RestrictedSection),
            "weighted-stored-only" => Ok(Tag::WeightedStoredOnly),
            "extension-bundle" => Ok(Tag::ExtensionBundle),
            other => Err(format!("unknown tag `{other}`")),
        }
    }
}

/// One catalog entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelRecord {
    /// `"rho-N"` for 3-folds, `"dp-a-b"` for del Pezzo surfaces.
    pub id: String,
    /// 0 for the primary description, alternatives count up from 1.
    pub variant: u32,
    pub space: SpaceDescriptor,
    pub bundle: BundleExpr,
    pub expected: Expected,
    pub tags: BTreeSet<Tag>,
    /// Comment lines written directly above the record.
    pub notes: Vec<String>,
}

impl ModelRecord {
    pub fn is_surface(&self) -> bool {
        self.id.starts_with("dp-")
    }

    pub fn is_weighted(&self) -> bool {
        self.tags.contains(&Tag::WeightedStoredOnly)
    }

    /// Picard rank encoded in a 3-fold id.
    pub fn id_rho(&self) -> Option<i128> {
        if self.is_surface() {
            return None;
        }
        self.id.split('-').next()?.parse().ok()
    }

    pub fn problem(&self) -> ZeroLocusProblem {
        ZeroLocusProblem::new(self.space.clone(), self.bundle.clone())
    }
}

const CATALOG_SOURCE: &str = include_str!("catalog.dsl");

/// Text of the embedded catalog.
pub fn catalog_source() -> &'static str {
    CATALOG_SOURCE
}

/// The embedded catalog, in file order.
pub fn catalog() -> &'static [ModelRecord] {
    static CATALOG: OnceLock<Vec<ModelRecord>> = OnceLock::new();
    CATALOG.get_or_init(|| match parse(CATALOG_SOURCE) {
        Ok(v) => v,
        Err(e) => panic!("embedded catalog does not parse: {e}"),
    })
}

/// All variants of a family, sorted by variant. A surface id may omit the
/// trailing `-1`, so `dp-5` names `dp-5-1`.
pub fn lookup(id: &str) -> Vec<&'static ModelRecord> {
    let find = |key: &str| {
        let mut v: Vec<&ModelRecord> = catalog().iter().filter(|r| r.id == key).collect();
        v.sort_by_key(|r| r.variant);
        v
    };
    let v = find(id);
    if v.is_empty() && id.starts_with("dp-") && id.matches('-').count() == 1 {
        return find(&format!("{id}-1"));
    }
    v
}

/// Records whose id starts with `prefix`, sorted by family and variant.
pub fn list(prefix: &str) -> Vec<&'static ModelRecord> {
    let mut v: Vec<&ModelRecord> = catalog()
        .iter()
        .filter(|r| r.id.starts_with(prefix))
        .collect();
    v.sort_by(|a, b| {
        family_key(&a.id)
            .cmp(&family_key(&b.id))
            .then(a.variant.cmp(&b.variant))
    });
    v
}

/// Sort key placing 3-folds before surfaces, each in numeric order.
pub fn family_key(id: &str) -> (bool, Vec<u64>, String) {
    let surface = id.starts_with("dp-");
    let nums = id.split('-').filter_map(|s| s.parse().ok()).collect();
    (surface, nums, id.to_string())
}

/// One record per line in canonical form.
pub fn dump() -> String {
    let mut s = String::new();
    for r in list("") {
        s.push_str(&dsl::record_line(r));
        s.push('\n');
    }
    s
}

/// Overall outcome of a verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    /// Weighted records are data only.
    NotMachineVerifiable,
    /// The engine refused the record.
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotMachineVerifiable => "SKIPPED",
            Status::Error => "ERROR",
        })
    }
}

/// A computed quantity against its reference value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub expected: Option<i128>,
    pub lb: i128,
    pub ub: i128,
    /// `None` when there is no reference value.
    pub pass: Option<bool>,
}

impl Check {
    fn new(name: &str, expected: Option<i128>, lb: i128, ub: i128) -> Self {
        let pass = expected.map(|e| lb == e && ub == e);
        Check {
            name: name.to_string(),
            expected,
            lb,
            ub,
            pass,
        }
    }

    fn exact(name: &str, expected: Option<i128>, value: i128) -> Self {
        Check::new(name, expected, value, value)
    }

    pub fn value(&self) -> Option<i128> {
        (self.lb == self.ub).then_some(self.lb)
    }
}

/// Result of verifying one record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub id: String,
    pub variant: u32,
    pub status: Status,
    pub checks: Vec<Check>,
    pub hodge: Option<HodgeTable>,
    pub constraints_used: BTreeSet<Constraint>,
    /// Set for restricted-section records, whose Koszul resolution is
    /// assumed rather than implied by general position.
    pub formal: bool,
    /// Hodge entries that did not pinch.
    pub open_entries: Vec<(usize, usize)>,
    pub message: Option<String>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Invariants that must agree across variants of a family.
    pub fn invariant_tuple(&self) -> Vec<Option<i128>> {
        self.checks
            .iter()
            .filter(|c| c.name != "dimension")
            .map(|c| c.value())
            .collect()
    }
}

/// Runs the engine on a record and compares with its reference values.
pub fn verify(record: &ModelRecord) -> VerifyReport {
    let mut report = VerifyReport {
        id: record.id.clone(),
        variant: record.variant,
        status: Status::NotMachineVerifiable,
        checks: Vec::new(),
        hodge: None,
        constraints_used: BTreeSet::new(),
        formal: record.tags.contains(&Tag::RestrictedSection),
        open_entries: Vec::new(),
        message: None,
    };
    if record.is_weighted() || record.space.has_weighted() {
        report.message = Some("weighted ambient space; not machine-verifiable".into());
        return report;
    }
    match run_checks(record, &mut report) {
        Ok(()) => {
            let ok = report.checks.iter().all(|c| c.pass != Some(false));
            report.status = if ok { Status::Pass } else { Status::Fail };
        }
        Err(e) => {
            report.status = Status::Error;
            report.message = Some(e);
        }
    }
    report
}

fn run_checks(record: &ModelRecord, report: &mut VerifyReport) -> Result<(), String> {
    let problem = record.problem();
    let calc = Calc::new(&record.space).map_err(|e| e.to_string())?;
    let f = calc.normalize(&record.bundle).map_err(|e| e.to_string())?;
    let rank = calc.rank(&f) as i128;
    let dim = record.space.dim() as i128 - rank;
    let target = record.expected.locus_dim().map(|d| d as i128);
    report.checks.push(Check::exact("dimension", target, dim));
    if dim < 0 || target.is_some_and(|t| t != dim) {
        return Ok(());
    }
    let degree = anticanonical_degree(&record.space, &record.bundle).map_err(|e| e.to_string())?;
    let degree = degree.to_i128().ok_or("anticanonical degree overflows")?;
    let h0 = h0_anticanonical(&problem).map_err(|e| e.to_string())?;
    match record.expected {
        Expected::Surface { k2, chi } => {
            report.checks.push(Check::exact("K^2", k2, degree));
            report.checks.push(Check::exact("chi(-K)", chi, h0));
        }
        Expected::Threefold {
            h0: e_h0,
            k3,
            h21,
            rho,
        } => {
            report.checks.push(Check::exact("h0(-K)", e_h0, h0));
            report.checks.push(Check::exact("(-K)^3", k3, degree));
            let table = hodge_numbers(&problem).map_err(|e| e.to_string())?;
            for q in 1..=3 {
                let (lb, ub) = table.interval(0, q);
                report
                    .checks
                    .push(Check::new(&format!("h0{q}"), Some(0), lb, ub));
            }
            let (lb, ub) = table.interval(1, 1);
            report
                .checks
                .push(Check::new("h11", rho.or(record.id_rho()), lb, ub));
            let (lb, ub) = table.interval(2, 1);
            report.checks.push(Check::new("h21", h21, lb, ub));
            report.open_entries = table.open_entries();
            report.constraints_used = table.constraints_used.clone();
            report.hodge = Some(table);
        }
        Expected::None => {
            report.checks.push(Check::exact("h0(-K)", None, h0));
            report.checks.push(Check::exact("(-K)^d", None, degree));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip_through_text() {
        for t in [
            Tag::RestrictedSection,
            Tag::WeightedStoredOnly,
            Tag::ExtensionBundle,
        ] {
            assert_eq!(t.to_string().parse::<Tag>().unwrap(), t);
        }
        assert!("formal".parse::<Tag>().is_err());
    }

    #[test]
    fn surface_ids_accept_short_form() {
        assert_eq!(lookup("dp-5").len(), 1);
        assert_eq!(lookup("dp-5")[0].id, "dp-5-1");
        assert!(lookup("7-7").is_empty());
    }

    #[test]
    fn weighted_records_are_skipped() {
        let r = lookup("1-11")[0];
        let rep = verify(r);
        assert_eq!(rep.status, Status::NotMachineVerifiable);
        assert!(rep.checks.is_empty());
    }

    #[test]
    fn family_keys_sort_numerically() {
        let mut ids = vec!["2-10", "dp-1-1", "2-9", "10-1", "1-1"];
        ids.sort_by_key(|s| family_key(s));
        assert_eq!(ids, vec!["1-1", "2-9", "2-10", "10-1", "dp-1-1"]);
    }
}
