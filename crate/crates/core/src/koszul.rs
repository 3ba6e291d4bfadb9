//! Cohomology on zero loci of sections of homogeneous bundles.
//!
//! Every sheaf that occurs (ambient bundles, Koszul kernels, restrictions,
//! pieces of exterior powers of the conormal sequence) becomes a node of a
//! network carrying one dimension interval per degree and an exact Euler
//! characteristic. Short exact sequences tie nodes together through their
//! long exact sequences; the unknown ranks of the connecting maps are
//! interval variables too. Propagation shrinks every interval until nothing
//! changes, after which optional constraints (Hodge symmetry, Serre duality,
//! vanishing of `h^{0,q}`) are added and propagation resumes.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bundlecalc::{BundleError, BundleExpr, Calc, DecomposedBundle, Piece};
use crate::bwb::{bott, CohomologyProfile, SpaceDescriptor, SpaceError};

/// Stand-in for an unknown upper bound.
pub const INF: i128 = i128::MAX / 4;

/// Errors raised while computing cohomology on a zero locus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KoszulError {
    #[error("zero locus of a rank {rank} bundle on a {dim}-dimensional space has dimension < 1")]
    Codimension { dim: usize, rank: u128 },
    #[error("interval propagation reached a contradiction at {0}")]
    Inconsistent(String),
    #[error("interval propagation did not reach a fixpoint within {0} rounds")]
    NoFixpoint(usize),
    #[error("dimension does not fit in 128 bits")]
    Overflow,
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

impl From<SpaceError> for KoszulError {
    fn from(e: SpaceError) -> Self {
        KoszulError::Bundle(e.into())
    }
}

/// Constraints beyond the long exact sequences, as recorded in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    Euler,
    HodgeSymmetry,
    SerreDuality,
    FanoVanishing,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Euler => "euler",
            Constraint::HodgeSymmetry => "hodge-symmetry",
            Constraint::SerreDuality => "serre-duality",
            Constraint::FanoVanishing => "fano-vanishing",
        })
    }
}

/// Switches for the optional constraints on Hodge numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FanoConstraints {
    /// `h^{0,q} = 0` for `q > 0`.
    pub vanishing: bool,
    /// `h^{p,q} = h^{q,p}`.
    pub symmetry: bool,
    /// `h^{p,q} = h^{d-p,d-q}`.
    pub serre: bool,
}

impl FanoConstraints {
    pub fn all() -> Self {
        FanoConstraints {
            vanishing: true,
            symmetry: true,
            serre: true,
        }
    }

    pub fn none() -> Self {
        FanoConstraints {
            vanishing: false,
            symmetry: false,
            serre: false,
        }
    }
}

impl Default for FanoConstraints {
    fn default() -> Self {
        Self::all()
    }
}

/// The zero locus `Y` of a general section of `bundle` on `space`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroLocusProblem {
    pub space: SpaceDescriptor,
    pub bundle: BundleExpr,
    pub constraints: FanoConstraints,
}

impl ZeroLocusProblem {
    pub fn new(space: SpaceDescriptor, bundle: BundleExpr) -> Self {
        ZeroLocusProblem {
            space,
            bundle,
            constraints: FanoConstraints::all(),
        }
    }

    pub fn with_constraints(mut self, c: FanoConstraints) -> Self {
        self.constraints = c;
        self
    }

    /// Dimension of the zero locus.
    pub fn locus_dim(&self) -> Result<usize, KoszulError> {
        let calc = Calc::new(&self.space)?;
        let f = calc.normalize(&self.bundle)?;
        locus_dim(&self.space, calc.rank(&f))
    }

    /// Picard coordinates of `c_1(T_X) - c_1(F)`, whose restriction is `-K_Y`.
    pub fn anticanonical_class(&self) -> Result<Vec<i64>, KoszulError> {
        let calc = Calc::new(&self.space)?;
        let t = calc.first_chern(&calc.tangent());
        let f = calc.first_chern(&calc.normalize(&self.bundle)?);
        Ok(t.iter().zip(&f).map(|(a, b)| a - b).collect())
    }

    /// True when `-K_Y` is the restriction of an ample class, so `Y` is Fano.
    pub fn anticanonical_is_ample_restriction(&self) -> Result<bool, KoszulError> {
        Ok(self.anticanonical_class()?.iter().all(|&c| c > 0))
    }
}

fn locus_dim(space: &SpaceDescriptor, rank: u128) -> Result<usize, KoszulError> {
    let dim = space.dim();
    if rank >= dim as u128 {
        return Err(KoszulError::Codimension { dim, rank });
    }
    Ok(dim - rank as usize)
}

/// Hodge numbers of the zero locus as intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeTable {
    pub dim: usize,
    /// `lb[p][q]` bounds `h^{p,q}` from below.
    pub lb: Vec<Vec<i128>>,
    pub ub: Vec<Vec<i128>>,
    /// `chi[p] = chi(Omega^p)`.
    pub chi: Vec<i128>,
    pub constraints_used: BTreeSet<Constraint>,
}

impl HodgeTable {
    pub fn is_exact(&self) -> bool {
        self.lb == self.ub
    }

    /// `h^{p,q}` when pinned.
    pub fn get(&self, p: usize, q: usize) -> Option<i128> {
        (self.lb[p][q] == self.ub[p][q]).then_some(self.lb[p][q])
    }

    pub fn interval(&self, p: usize, q: usize) -> (i128, i128) {
        (self.lb[p][q], self.ub[p][q])
    }

    /// Positions `(p, q)` whose interval is not a point.
    pub fn open_entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..=self.dim {
            for q in 0..=self.dim {
                if self.lb[p][q] != self.ub[p][q] {
                    out.push((p, q));
                }
            }
        }
        out
    }
}

/// Output of the normal-sequence computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentReport {
    /// Cohomology of the ambient tangent bundle restricted to `Y`.
    pub ambient: CohomologyProfile,
    /// Cohomology of the normal bundle `F|_Y`.
    pub normal: CohomologyProfile,
    /// Cohomology of `T_Y`.
    pub tangent: CohomologyProfile,
    /// `h^1(T_Y) - h^0(T_Y)` when the end terms are exact and have no
    /// higher cohomology.
    pub difference: Option<i128>,
}

fn sat_add(a: i128, b: i128) -> i128 {
    if a >= INF || b >= INF {
        INF
    } else {
        a + b
    }
}

#[derive(Clone, Debug)]
struct Node {
    lb: Vec<i128>,
    ub: Vec<i128>,
    chi: i128,
    name: String,
}

/// The long exact sequence of `0 -> a -> b -> c -> 0`.
#[derive(Clone, Debug)]
struct Les {
    nodes: [usize; 3],
    /// Bounds on the rank of the map leaving position `k`.
    rank_lb: Vec<i128>,
    rank_ub: Vec<i128>,
}

#[derive(Clone, Debug)]
struct Link {
    a: (usize, usize),
    b: (usize, usize),
    tag: Constraint,
}

#[derive(Clone, Debug)]
struct Network {
    degrees: usize,
    nodes: Vec<Node>,
    les: Vec<Les>,
    links: Vec<Link>,
    fixed: Vec<((usize, usize), i128, Constraint)>,
    used: BTreeSet<Constraint>,
}

impl Network {
    fn new(degrees: usize) -> Self {
        Network {
            degrees,
            nodes: Vec::new(),
            les: Vec::new(),
            links: Vec::new(),
            fixed: Vec::new(),
            used: BTreeSet::new(),
        }
    }

    /// A node with unknown cohomology in degrees `0..=top` and none above.
    fn unknown(&mut self, name: String, chi: i128, top: usize) -> usize {
        let ub = (0..=self.degrees)
            .map(|q| if q <= top { INF } else { 0 })
            .collect();
        self.nodes.push(Node {
            lb: vec![0; self.degrees + 1],
            ub,
            chi,
            name,
        });
        self.nodes.len() - 1
    }

    fn exact(&mut self, name: String, p: &CohomologyProfile) -> usize {
        let mut lb = vec![0; self.degrees + 1];
        for (q, v) in p.lb.iter().enumerate() {
            lb[q] = *v;
        }
        self.nodes.push(Node {
            ub: lb.clone(),
            lb,
            chi: p.euler,
            name,
        });
        self.nodes.len() - 1
    }

    fn add_les(&mut self, a: usize, b: usize, c: usize) {
        let len = 3 * (self.degrees + 1);
        let mut rank_ub = vec![INF; len];
        rank_ub[len - 1] = 0;
        self.les.push(Les {
            nodes: [a, b, c],
            rank_lb: vec![0; len],
            rank_ub,
        });
    }

    fn profile(&self, n: usize, top: usize) -> CohomologyProfile {
        let node = &self.nodes[n];
        CohomologyProfile {
            lb: node.lb[..=top].to_vec(),
            ub: node.ub[..=top].to_vec(),
            euler: node.chi,
        }
    }

    fn tighten(
        &mut self,
        n: usize,
        q: usize,
        lb: Option<i128>,
        ub: Option<i128>,
    ) -> Result<bool, KoszulError> {
        let node = &mut self.nodes[n];
        let mut changed = false;
        if let Some(l) = lb {
            if l > node.lb[q] {
                node.lb[q] = l;
                changed = true;
            }
        }
        if let Some(u) = ub {
            if u < node.ub[q] {
                node.ub[q] = u;
                changed = true;
            }
        }
        if node.lb[q] > node.ub[q] {
            return Err(KoszulError::Inconsistent(format!(
                "h^{q}({}) in [{}, {}]",
                node.name, node.lb[q], node.ub[q]
            )));
        }
        Ok(changed)
    }

    fn les_step(&mut self, i: usize) -> Result<bool, KoszulError> {
        let mut changed = false;
        let nodes = self.les[i].nodes;
        let len = 3 * (self.degrees + 1);
        let pos = |k: usize| (nodes[k % 3], k / 3);
        let v = |net: &Network, k: usize| {
            let (n, q) = pos(k);
            (net.nodes[n].lb[q], net.nodes[n].ub[q])
        };
        // Ranks of the maps leaving each position: dim V_k = r_{k-1} + r_k.
        for k in 0..len {
            let (vl, vu) = v(self, k);
            let (pl, pu) = if k == 0 {
                (0, 0)
            } else {
                (self.les[i].rank_lb[k - 1], self.les[i].rank_ub[k - 1])
            };
            let (mut nl, mut nu) = (self.les[i].rank_lb[k], self.les[i].rank_ub[k]);
            if vu < INF {
                nu = nu.min(vu - pl);
            }
            if pu < INF {
                nl = nl.max(vl - pu);
            }
            if k + 1 < len {
                let (wl, wu) = v(self, k + 1);
                let (sl, su) = if k + 1 < len - 1 {
                    (self.les[i].rank_lb[k + 1], self.les[i].rank_ub[k + 1])
                } else {
                    (0, 0)
                };
                if wu < INF {
                    nu = nu.min(wu - sl);
                }
                if su < INF {
                    nl = nl.max(wl - su);
                }
            }
            nl = nl.max(0);
            if nl > nu {
                return Err(KoszulError::Inconsistent(format!(
                    "map rank in sequence {i}"
                )));
            }
            if nl != self.les[i].rank_lb[k] || nu != self.les[i].rank_ub[k] {
                self.les[i].rank_lb[k] = nl;
                self.les[i].rank_ub[k] = nu;
                changed = true;
            }
        }
        for k in 0..len {
            let (pl, pu) = if k == 0 {
                (0, 0)
            } else {
                (self.les[i].rank_lb[k - 1], self.les[i].rank_ub[k - 1])
            };
            let (rl, ru) = (self.les[i].rank_lb[k], self.les[i].rank_ub[k]);
            let (n, q) = pos(k);
            changed |= self.tighten(n, q, Some(pl + rl), Some(sat_add(pu, ru)))?;
        }
        Ok(changed)
    }

    fn euler_step(&mut self, n: usize) -> Result<bool, KoszulError> {
        let mut changed = false;
        let deg = self.degrees + 1;
        for q in 0..deg {
            // sum_{q' != q} (-1)^{q'} h^{q'} lies in [rmin, rmax].
            let (mut rmin, mut rmax) = (Some(0i128), Some(0i128));
            for q2 in (0..deg).filter(|&x| x != q) {
                let (l, u) = (self.nodes[n].lb[q2], self.nodes[n].ub[q2]);
                if q2 % 2 == 0 {
                    rmin = rmin.map(|x| x + l);
                    rmax = if u >= INF { None } else { rmax.map(|x| x + u) };
                } else {
                    rmin = if u >= INF { None } else { rmin.map(|x| x - u) };
                    rmax = rmax.map(|x| x - l);
                }
            }
            let c = self.nodes[n].chi;
            let (lb, ub) = if q % 2 == 0 {
                (rmax.map(|r| c - r), rmin.map(|r| c - r))
            } else {
                (rmin.map(|r| r - c), rmax.map(|r| r - c))
            };
            if self.tighten(n, q, lb, ub)? {
                changed = true;
                self.used.insert(Constraint::Euler);
            }
        }
        Ok(changed)
    }

    fn link_step(&mut self, i: usize) -> Result<bool, KoszulError> {
        let Link { a, b, tag } = self.links[i].clone();
        let lb = self.nodes[a.0].lb[a.1].max(self.nodes[b.0].lb[b.1]);
        let ub = self.nodes[a.0].ub[a.1].min(self.nodes[b.0].ub[b.1]);
        let c = self.tighten(a.0, a.1, Some(lb), Some(ub))?
            | self.tighten(b.0, b.1, Some(lb), Some(ub))?;
        if c {
            self.used.insert(tag);
        }
        Ok(c)
    }

    fn propagate(&mut self) -> Result<(), KoszulError> {
        let cap = 10
            * (self.les.len() * 3 * (self.degrees + 1) + self.nodes.len() + self.links.len())
            + 10;
        for _ in 0..cap {
            let mut changed = false;
            for ((n, q), v, tag) in self.fixed.clone() {
                if self.tighten(n, q, Some(v), Some(v))? {
                    self.used.insert(tag);
                    changed = true;
                }
            }
            for i in 0..self.les.len() {
                changed |= self.les_step(i)?;
            }
            for n in 0..self.nodes.len() {
                changed |= self.euler_step(n)?;
            }
            for i in 0..self.links.len() {
                changed |= self.link_step(i)?;
            }
            if !changed {
                return Ok(());
            }
        }
        Err(KoszulError::NoFixpoint(cap))
    }
}

/// Exact cohomology of a completely reducible bundle.
fn piece_profile(space: &SpaceDescriptor, piece: &Piece) -> Result<CohomologyProfile, KoszulError> {
    let dim = space.dim();
    let mut acc = CohomologyProfile::zero(dim);
    for (label, mult) in piece {
        let r = bott(space, label)?;
        if let Some(q) = r.degree {
            let d = i128::try_from(r.dimension)
                .ok()
                .and_then(|d| d.checked_mul(*mult as i128))
                .ok_or(KoszulError::Overflow)?;
            acc.lb[q] += d;
            acc.ub[q] += d;
            acc.euler += if q % 2 == 0 { d } else { -d };
        }
    }
    Ok(acc)
}

/// Exact cohomology of each non-acyclic graded piece, sub to quotient.
fn level_profiles(
    space: &SpaceDescriptor,
    b: &DecomposedBundle,
) -> Result<Vec<CohomologyProfile>, KoszulError> {
    let mut out = Vec::new();
    for piece in b.blocks() {
        let p = piece_profile(space, piece)?;
        if p.ub.iter().any(|&x| x != 0) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Builds networks for one zero-locus problem.
struct Builder<'a> {
    space: &'a SpaceDescriptor,
    calc: Calc<'a>,
    dim_x: usize,
    dim_y: usize,
    f: DecomposedBundle,
    /// `Wedge^p F^dual` for `p = 0..=rank F`.
    koszul: Vec<DecomposedBundle>,
    net: Network,
}

impl<'a> Builder<'a> {
    fn new(space: &'a SpaceDescriptor, bundle: &BundleExpr) -> Result<Self, KoszulError> {
        let calc = Calc::new(space)?;
        let f = calc.normalize(bundle)?;
        let rank = calc.rank(&f);
        let dim_y = locus_dim(space, rank)?;
        let koszul = calc.exterior_powers(&calc.dual(&f), rank as u32);
        let dim_x = space.dim();
        Ok(Builder {
            space,
            calc,
            dim_x,
            dim_y,
            f,
            koszul,
            net: Network::new(dim_x),
        })
    }

    /// A node for an ambient bundle; filtered bundles become a chain of
    /// extensions over their graded pieces.
    fn ambient(&mut self, name: &str, levels: Vec<CohomologyProfile>) -> usize {
        let mut iter = levels.into_iter();
        let Some(first) = iter.next() else {
            return self
                .net
                .exact(name.to_string(), &CohomologyProfile::zero(self.dim_x));
        };
        let mut cur = self.net.exact(format!("{name}[0]"), &first);
        for (i, next) in iter.enumerate() {
            let g = self.net.exact(format!("{name}[gr {}]", i + 1), &next);
            let chi = self.net.nodes[cur].chi + next.euler;
            let e = self
                .net
                .unknown(format!("{name}[<= {}]", i + 1), chi, self.dim_x);
            self.net.add_les(cur, e, g);
            cur = e;
        }
        cur
    }

    /// A node for `G|_Y`, resolved by the Koszul complex.
    fn restricted(&mut self, name: &str, g: &DecomposedBundle) -> Result<usize, KoszulError> {
        let space = self.space;
        let calc = &self.calc;
        let terms: Vec<Result<Vec<CohomologyProfile>, KoszulError>> = self
            .koszul
            .par_iter()
            .map(|w| level_profiles(space, &calc.tensor(w, g)))
            .collect();
        let mut c_nodes = Vec::with_capacity(terms.len());
        for (p, t) in terms.into_iter().enumerate() {
            let t = t?;
            c_nodes.push(self.ambient(&format!("Wedge{p}(F*)*{name}"), t));
        }
        let r = c_nodes.len() - 1;
        let mut k_next = c_nodes[r];
        for p in (0..r).rev() {
            let chi = self.net.nodes[c_nodes[p]].chi - self.net.nodes[k_next].chi;
            let top = if p == 0 { self.dim_y } else { self.dim_x };
            let label = if p == 0 {
                format!("{name}|Y")
            } else {
                format!("K{p}({name})")
            };
            let k = self.net.unknown(label, chi, top);
            self.net.add_les(k_next, c_nodes[p], k);
            k_next = k;
        }
        Ok(k_next)
    }

    /// A node for `Omega^j_Y` via the `j`-th exterior power of the conormal sequence.
    fn hodge_row(&mut self, j: usize) -> Result<usize, KoszulError> {
        let fdual = self.calc.dual(&self.f);
        let sym = self.calc.symmetric_powers(&fdual, j as u32);
        let omega = self.calc.exterior_powers(&self.calc.cotangent(), j as u32);
        let mut m = None;
        for k in 0..=j {
            let term = self.calc.tensor(&sym[j - k], &omega[k]);
            let t = self.restricted(&format!("Sym{}(F*)*Omega{k}", j - k), &term)?;
            m = Some(match m as Option<usize> {
                None => t,
                Some(prev) => {
                    let chi = self.net.nodes[t].chi - self.net.nodes[prev].chi;
                    let name = if k == j {
                        format!("Omega{j}_Y")
                    } else {
                        format!("M{k}[{j}]")
                    };
                    let node = self.net.unknown(name, chi, self.dim_y);
                    self.net.add_les(prev, t, node);
                    node
                }
            });
        }
        Ok(m.expect("row has at least one term"))
    }
}

/// Cohomology of `G|_Y` for `Y` the zero locus of the problem.
pub fn restricted_cohomology(
    problem: &ZeroLocusProblem,
    g: &BundleExpr,
) -> Result<CohomologyProfile, KoszulError> {
    let mut b = Builder::new(&problem.space, &problem.bundle)?;
    let gb = b.calc.normalize(g)?;
    let n = b.restricted("G", &gb)?;
    b.net.propagate()?;
    Ok(b.net.profile(n, b.dim_y))
}

/// Hodge numbers of the zero locus.
///
/// Rows `p` with `2p <= d` are computed from the conormal sequence. With
/// Serre duality enabled the remaining rows are its mirror images;
/// otherwise they are computed the same way.
pub fn hodge_numbers(problem: &ZeroLocusProblem) -> Result<HodgeTable, KoszulError> {
    let mut b = Builder::new(&problem.space, &problem.bundle)?;
    let d = b.dim_y;
    let c = problem.constraints;
    let mut rows = Vec::with_capacity(d + 1);
    for j in 0..=d {
        if c.serre && 2 * j > d {
            let mirror: usize = rows[d - j];
            let chi = if d % 2 == 0 {
                b.net.nodes[mirror].chi
            } else {
                -b.net.nodes[mirror].chi
            };
            rows.push(b.net.unknown(format!("Omega{j}_Y"), chi, d));
        } else {
            rows.push(b.hodge_row(j)?);
        }
    }
    b.net.propagate()?;
    if c.vanishing {
        for q in 1..=d {
            b.net
                .fixed
                .push(((rows[0], q), 0, Constraint::FanoVanishing));
        }
    }
    for p in 0..=d {
        for q in 0..=d {
            if c.symmetry && p < q {
                b.net.links.push(Link {
                    a: (rows[p], q),
                    b: (rows[q], p),
                    tag: Constraint::HodgeSymmetry,
                });
            }
            if c.serre && (p, q) < (d - p, d - q) {
                b.net.links.push(Link {
                    a: (rows[p], q),
                    b: (rows[d - p], d - q),
                    tag: Constraint::SerreDuality,
                });
            }
        }
    }
    // Constraints only count as used when they tighten something beyond
    // what the exact sequences alone give.
    b.net.used.clear();
    b.net.propagate()?;
    let lb = rows
        .iter()
        .map(|&n| b.net.nodes[n].lb[..=d].to_vec())
        .collect();
    let ub = rows
        .iter()
        .map(|&n| b.net.nodes[n].ub[..=d].to_vec())
        .collect();
    let chi = rows.iter().map(|&n| b.net.nodes[n].chi).collect();
    Ok(HodgeTable {
        dim: d,
        lb,
        ub,
        chi,
        constraints_used: b.net.used,
    })
}

/// Cohomology of the normal sequence `0 -> T_Y -> T_X|_Y -> F|_Y -> 0`.
pub fn tangent_cohomology(problem: &ZeroLocusProblem) -> Result<TangentReport, KoszulError> {
    let mut b = Builder::new(&problem.space, &problem.bundle)?;
    let tx = b.calc.tangent();
    let f = b.f.clone();
    let a = b.restricted("T_X", &tx)?;
    let n = b.restricted("F", &f)?;
    let chi = b.net.nodes[a].chi - b.net.nodes[n].chi;
    let t = b.net.unknown("T_Y".to_string(), chi, b.dim_y);
    b.net.add_les(t, a, n);
    b.net.propagate()?;
    let d = b.dim_y;
    let ambient = b.net.profile(a, d);
    let normal = b.net.profile(n, d);
    let tangent = b.net.profile(t, d);
    let higher_vanish = |p: &CohomologyProfile| p.is_exact() && p.ub[1..].iter().all(|&x| x == 0);
    let difference =
        (higher_vanish(&ambient) && higher_vanish(&normal)).then(|| normal.lb[0] - ambient.lb[0]);
    Ok(TangentReport {
        ambient,
        normal,
        tangent,
        difference,
    })
}

/// `h^0(-K_Y) = chi(Y, -K_Y)`, assuming higher cohomology vanishes.
pub fn h0_anticanonical(problem: &ZeroLocusProblem) -> Result<i128, KoszulError> {
    let space = &problem.space;
    let calc = Calc::new(space)?;
    let f = calc.normalize(&problem.bundle)?;
    locus_dim(space, calc.rank(&f))?;
    let c1: Vec<i64> = calc
        .first_chern(&calc.tangent())
        .iter()
        .zip(calc.first_chern(&f))
        .map(|(a, b)| a - b)
        .collect();
    let wedges = calc.exterior_powers(&calc.dual(&f), calc.rank(&f) as u32);
    let mut total: i128 = 0;
    for (p, w) in wedges.iter().enumerate() {
        let twisted = calc.twist(w, &c1)?;
        let mut chi = 0i128;
        for piece in twisted.blocks() {
            chi += piece_profile(space, piece)?.euler;
        }
        total += if p % 2 == 0 { chi } else { -chi };
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bwb::FactorDescriptor;

    fn p(n: usize) -> FactorDescriptor {
        FactorDescriptor::Projective(n)
    }

    fn problem_2_16() -> ZeroLocusProblem {
        let space = SpaceDescriptor::new(vec![p(2), FactorDescriptor::Grassmannian(2, 4)]).unwrap();
        let f = BundleExpr::Sum(vec![
            BundleExpr::sub(2).dual().twist(vec![1, 0]),
            BundleExpr::Line(vec![0, 2]),
        ]);
        ZeroLocusProblem::new(space, f)
    }

    #[test]
    fn structure_sheaf_of_2_16() {
        let pr = problem_2_16();
        let prof = restricted_cohomology(&pr, &BundleExpr::Line(vec![0, 0])).unwrap();
        assert_eq!(prof.lb, vec![1, 0, 0, 0]);
        assert!(prof.is_exact());
    }

    #[test]
    fn conormal_of_2_16() {
        let pr = problem_2_16();
        let f = pr.bundle.clone();
        let prof = restricted_cohomology(&pr, &BundleExpr::Dual(Box::new(f))).unwrap();
        assert!(prof.is_exact());
        assert_eq!(prof.lb, vec![0, 0, 0, 1]);
    }

    #[test]
    fn hodge_of_2_16() {
        let t = hodge_numbers(&problem_2_16()).unwrap();
        assert!(t.is_exact(), "{t:?}");
        assert_eq!(t.get(1, 1), Some(2));
        assert_eq!(t.get(1, 2), Some(2));
        assert_eq!(t.get(1, 0), Some(0));
        assert_eq!(t.get(1, 3), Some(0));
    }

    #[test]
    fn tangent_of_2_16() {
        let r = tangent_cohomology(&problem_2_16()).unwrap();
        assert_eq!(r.ambient.exact_at(0), Some(24));
        assert_eq!(r.normal.exact_at(0), Some(31));
        assert_eq!(r.difference, Some(7));
    }

    #[test]
    fn hyperplane_in_p4() {
        let space = SpaceDescriptor::new(vec![p(4)]).unwrap();
        let pr = ZeroLocusProblem::new(space, BundleExpr::Line(vec![1]))
            .with_constraints(FanoConstraints::none());
        let t = hodge_numbers(&pr).unwrap();
        for a in 0..=3 {
            for b in 0..=3 {
                assert_eq!(t.get(a, b), Some(i128::from(a == b)), "h^{a},{b}");
            }
        }
        assert_eq!(h0_anticanonical(&pr).unwrap(), 35);
    }

    #[test]
    fn quartic_surface() {
        let space = SpaceDescriptor::new(vec![p(3)]).unwrap();
        let pr = ZeroLocusProblem::new(space, BundleExpr::Line(vec![4]));
        let bare = hodge_numbers(&pr.clone().with_constraints(FanoConstraints::none())).unwrap();
        assert_eq!(bare.get(1, 1), None);
        assert_eq!(bare.interval(1, 1), (20, 35));
        let t = hodge_numbers(&pr.with_constraints(FanoConstraints {
            vanishing: false,
            ..FanoConstraints::all()
        }))
        .unwrap();
        assert!(t.is_exact());
        assert!(t.constraints_used.contains(&Constraint::SerreDuality));
        assert_eq!(t.get(1, 1), Some(20));
        assert_eq!(t.get(2, 0), Some(1));
        assert_eq!(t.get(0, 2), Some(1));
        assert_eq!(t.get(1, 0), Some(0));
    }

    #[test]
    fn anticanonical_class_by_adjunction() {
        let p3 = SpaceDescriptor::new(vec![p(3)]).unwrap();
        let quartic = ZeroLocusProblem::new(p3.clone(), BundleExpr::Line(vec![4]));
        assert_eq!(quartic.anticanonical_class().unwrap(), vec![0]);
        assert!(!quartic.anticanonical_is_ample_restriction().unwrap());
        let cubic = ZeroLocusProblem::new(p3, BundleExpr::Line(vec![3]));
        assert!(cubic.anticanonical_is_ample_restriction().unwrap());
        let space = SpaceDescriptor::new(vec![p(2), FactorDescriptor::Grassmannian(2, 4)]).unwrap();
        let f = BundleExpr::Sum(vec![
            BundleExpr::sub(2).dual().twist(vec![1, 0]),
            BundleExpr::Line(vec![0, 2]),
        ]);
        assert_eq!(
            ZeroLocusProblem::new(space, f)
                .anticanonical_class()
                .unwrap(),
            vec![1, 1]
        );
    }

    #[test]
    fn quintic_del_pezzo_anticanonical_sections() {
        let space = SpaceDescriptor::new(vec![FactorDescriptor::Grassmannian(2, 5)]).unwrap();
        let pr = ZeroLocusProblem::new(space, BundleExpr::Sum(vec![BundleExpr::Line(vec![1]); 4]));
        assert_eq!(h0_anticanonical(&pr).unwrap(), 6);
    }

    #[test]
    fn codimension_is_checked() {
        let space = SpaceDescriptor::new(vec![p(2)]).unwrap();
        let pr = ZeroLocusProblem::new(space, BundleExpr::Sum(vec![BundleExpr::Line(vec![1]); 2]));
        assert!(matches!(
            hodge_numbers(&pr),
            Err(KoszulError::Codimension { .. })
        ));
    }
}
