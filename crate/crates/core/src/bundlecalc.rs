//! The bundle-expression algebra and its normal form.
//!
//! A [`DecomposedBundle`] records the associated graded of a filtered
//! homogeneous bundle: a map from an integer filtration level to the
//! completely reducible piece living at that level, lower levels being
//! subbundles. Tensor products add levels and duals negate them, which is
//! exactly the behaviour of associated gradeds, so every operation below is
//! computed on graded pieces only. Extension classes are never represented.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::bwb::{block_coefficients_to_picard, dual_label, SpaceDescriptor, SpaceError};
use crate::combinat::{
    decompose_character, lr_multiply_gl, lr_multiply_shared, product_weights,
    weight_multiset_shared, weyl_dim_u128, IntVector, Partition,
};

/// Errors raised while normalizing bundle expressions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("factor {0} does not exist in the ambient space")]
    NoSuchFactor(usize),
    #[error("tautological index {index} is out of range on factor {factor}")]
    NoSuchIndex { factor: usize, index: usize },
    #[error("twist of arity {got} on a space of Picard rank {expected}")]
    TwistArity { got: usize, expected: usize },
    #[error("Schur functor {lambda} has more rows than the bundle rank {rank}")]
    SchurTooLong { lambda: String, rank: u128 },
    #[error("an extension needs at least two pieces")]
    ShortExtension,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Sub- or quotient tautological bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TautKind {
    Sub,
    Quotient,
}

/// Syntax tree of a homogeneous bundle over a product space.
///
/// Factor and tautological indices are 1-based, as in the textual grammar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BundleExpr {
    /// `O(d_1, ..., d_s)` with one entry per Picard generator.
    Line(Vec<i64>),
    /// `U_{f.i}` or `Q_{f.i}`.
    Taut {
        kind: TautKind,
        factor: usize,
        index: usize,
    },
    Dual(Box<BundleExpr>),
    Twist(Box<BundleExpr>, Vec<i64>),
    Tensor(Vec<BundleExpr>),
    Sum(Vec<BundleExpr>),
    Wedge(u32, Box<BundleExpr>),
    Sym(u32, Box<BundleExpr>),
    Schur(Partition, Box<BundleExpr>),
    /// Graded pieces listed from sub to quotient.
    Ext(Vec<BundleExpr>),
}

impl BundleExpr {
    pub fn sub(factor: usize) -> Self {
        BundleExpr::Taut {
            kind: TautKind::Sub,
            factor,
            index: 1,
        }
    }

    pub fn quotient(factor: usize) -> Self {
        BundleExpr::Taut {
            kind: TautKind::Quotient,
            factor,
            index: 1,
        }
    }

    pub fn dual(self) -> Self {
        BundleExpr::Dual(Box::new(self))
    }

    pub fn twist(self, d: Vec<i64>) -> Self {
        BundleExpr::Twist(Box::new(self), d)
    }

    /// Whether an `Ext` node occurs anywhere in the tree.
    pub fn has_extension(&self) -> bool {
        match self {
            BundleExpr::Line(_) | BundleExpr::Taut { .. } => false,
            BundleExpr::Ext(_) => true,
            BundleExpr::Dual(e)
            | BundleExpr::Twist(e, _)
            | BundleExpr::Wedge(_, e)
            | BundleExpr::Sym(_, e)
            | BundleExpr::Schur(_, e) => e.has_extension(),
            BundleExpr::Tensor(v) | BundleExpr::Sum(v) => v.iter().any(|e| e.has_extension()),
        }
    }

    /// Flattens the tree into a sum of products of atoms, the shape that the
    /// textual grammar can express.
    pub fn sum_of_products(&self) -> Vec<Vec<BundleExpr>> {
        match self {
            BundleExpr::Sum(v) => v.iter().flat_map(|e| e.sum_of_products()).collect(),
            BundleExpr::Tensor(v) => {
                let mut acc: Vec<Vec<BundleExpr>> = vec![Vec::new()];
                for e in v {
                    let terms = e.sum_of_products();
                    let mut next = Vec::new();
                    for a in &acc {
                        for t in &terms {
                            let mut p = a.clone();
                            p.extend(t.iter().cloned());
                            next.push(p);
                        }
                    }
                    acc = next;
                }
                acc
            }
            BundleExpr::Twist(inner, d) => {
                let terms = inner.sum_of_products();
                if terms.len() == 1 && terms[0].len() == 1 {
                    vec![vec![BundleExpr::Twist(
                        Box::new(terms[0][0].clone()),
                        d.clone(),
                    )]]
                } else {
                    terms
                        .into_iter()
                        .map(|mut p| {
                            let last = p.pop().expect("non-empty product");
                            p.push(BundleExpr::Twist(Box::new(last), d.clone()));
                            p
                        })
                        .collect()
                }
            }
            other => vec![vec![other.clone()]],
        }
    }
}

impl fmt::Display for BundleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sum_of_products();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = terms
            .iter()
            .map(|p| p.iter().map(render_atom).collect::<Vec<_>>().join(" * "))
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

fn join_ints(v: &[i64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_atom(e: &BundleExpr) -> String {
    match e {
        BundleExpr::Line(d) => format!("O({})", join_ints(d)),
        BundleExpr::Taut {
            kind,
            factor,
            index,
        } => {
            let letter = if *kind == TautKind::Sub { 'U' } else { 'Q' };
            if *index == 1 {
                format!("{letter}{factor}")
            } else {
                format!("{letter}{factor}.{index}")
            }
        }
        BundleExpr::Dual(inner) => format!("dual({inner})"),
        BundleExpr::Twist(inner, d) => {
            format!("{}({})", render_atom(inner), join_ints(d))
        }
        BundleExpr::Wedge(k, inner) => format!("Wedge{k}({inner})"),
        BundleExpr::Sym(k, inner) => format!("Sym{k}({inner})"),
        BundleExpr::Schur(l, inner) => {
            let parts: Vec<i64> = l.parts().iter().map(|&p| p as i64).collect();
            format!("Schur[{}]({inner})", join_ints(&parts))
        }
        BundleExpr::Ext(v) => {
            let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
            format!("Ext[{}]", parts.join(", "))
        }
        BundleExpr::Sum(_) | BundleExpr::Tensor(_) => e.to_string(),
    }
}

/// A completely reducible bundle: irreducible labels with multiplicity.
pub type Piece = BTreeMap<IntVector, u64>;

/// Associated graded of a filtered homogeneous bundle, keyed by level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecomposedBundle {
    pub levels: BTreeMap<i64, Piece>,
}

impl DecomposedBundle {
    pub fn zero() -> Self {
        DecomposedBundle::default()
    }

    /// A single irreducible summand at level 0.
    pub fn irreducible(label: IntVector) -> Self {
        let mut piece = Piece::new();
        piece.insert(label, 1);
        let mut levels = BTreeMap::new();
        levels.insert(0, piece);
        DecomposedBundle { levels }
    }

    pub fn is_zero(&self) -> bool {
        self.levels.values().all(|p| p.is_empty())
    }

    /// Whether the bundle has at most one graded piece.
    pub fn is_completely_reducible(&self) -> bool {
        self.levels.values().filter(|p| !p.is_empty()).count() <= 1
    }

    /// Graded pieces from sub to quotient.
    pub fn blocks(&self) -> Vec<&Piece> {
        self.levels.values().filter(|p| !p.is_empty()).collect()
    }

    /// Every irreducible summand with its level and multiplicity.
    pub fn summands(&self) -> impl Iterator<Item = (i64, &IntVector, u64)> {
        self.levels
            .iter()
            .flat_map(|(&lvl, p)| p.iter().map(move |(l, &m)| (lvl, l, m)))
    }

    fn add(&mut self, level: i64, label: IntVector, mult: u64) {
        if mult == 0 {
            return;
        }
        *self
            .levels
            .entry(level)
            .or_default()
            .entry(label)
            .or_insert(0) += mult;
    }

    /// Merges all graded pieces into one completely reducible bundle.
    pub fn graded(&self) -> DecomposedBundle {
        let mut out = DecomposedBundle::zero();
        for (_, l, m) in self.summands() {
            out.add(0, l.clone(), m);
        }
        out
    }

    /// Direct sum, aligning levels.
    pub fn direct_sum(&self, other: &DecomposedBundle) -> DecomposedBundle {
        let mut out = self.clone();
        for (lvl, l, m) in other.summands() {
            out.add(lvl, l.clone(), m);
        }
        out
    }

    /// Shifts every level by `delta`.
    pub fn shift_levels(&self, delta: i64) -> DecomposedBundle {
        DecomposedBundle {
            levels: self
                .levels
                .iter()
                .map(|(k, v)| (k + delta, v.clone()))
                .collect(),
        }
    }

    fn min_level(&self) -> Option<i64> {
        self.levels
            .iter()
            .find(|(_, p)| !p.is_empty())
            .map(|(k, _)| *k)
    }

    fn max_level(&self) -> Option<i64> {
        self.levels
            .iter()
            .rev()
            .find(|(_, p)| !p.is_empty())
            .map(|(k, _)| *k)
    }
}

/// Operations on labels and bundles over a fixed ambient space.
pub struct Calc<'a> {
    pub space: &'a SpaceDescriptor,
    block_sizes: Vec<usize>,
    factor_blocks: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

type TensorKey = (Vec<usize>, IntVector, IntVector);
type FunctorKey = (Vec<usize>, IntVector, Partition);
type Decomposition = Rc<Vec<(IntVector, u64)>>;

thread_local! {
    static FACTOR_TENSOR: RefCell<HashMap<TensorKey, Decomposition>> = RefCell::new(HashMap::new());
    static SCHUR_IRREP: RefCell<HashMap<FunctorKey, Decomposition>> = RefCell::new(HashMap::new());
    static RANK_CACHE: RefCell<HashMap<(Vec<usize>, IntVector), u128>> = RefCell::new(HashMap::new());
}

impl<'a> Calc<'a> {
    pub fn new(space: &'a SpaceDescriptor) -> Result<Self, BundleError> {
        space.require_unweighted()?;
        Ok(Calc {
            space,
            block_sizes: space.all_block_sizes(),
            factor_blocks: space.factors.iter().map(|f| f.block_sizes()).collect(),
            offsets: space.factor_offsets(),
        })
    }

    fn canonical(&self, label: &[i64]) -> IntVector {
        self.space.canonical_label(label)
    }

    /// The trivial bundle.
    pub fn trivial(&self) -> DecomposedBundle {
        DecomposedBundle::irreducible(vec![0; self.space.label_len()])
    }

    /// A line bundle from Picard coordinates.
    pub fn line(&self, degrees: &[i64]) -> Result<DecomposedBundle, BundleError> {
        if degrees.len() != self.space.picard_rank() {
            return Err(BundleError::TwistArity {
                got: degrees.len(),
                expected: self.space.picard_rank(),
            });
        }
        Ok(DecomposedBundle::irreducible(
            self.canonical(&self.space.line_bundle_label(degrees)),
        ))
    }

    /// Rank of the irreducible bundle with the given label.
    pub fn label_rank(&self, label: &[i64]) -> u128 {
        let mut r: u128 = 1;
        for (fi, blocks) in self.factor_blocks.iter().enumerate() {
            let off = self.offsets[fi];
            let n: usize = blocks.iter().sum();
            let part = &label[off..off + n];
            if part.iter().all(|&x| x == part[0]) {
                continue;
            }
            let key = (blocks.clone(), part.to_vec());
            let cached = RANK_CACHE.with(|c| c.borrow().get(&key).copied());
            let fr = match cached {
                Some(v) => v,
                None => {
                    let mut v: u128 = 1;
                    let mut s = 0;
                    for &b in blocks {
                        v *= weyl_dim_u128(&part[s..s + b]);
                        s += b;
                    }
                    RANK_CACHE.with(|c| c.borrow_mut().insert(key, v));
                    v
                }
            };
            r *= fr;
        }
        r
    }

    /// Total rank.
    pub fn rank(&self, b: &DecomposedBundle) -> u128 {
        b.summands()
            .map(|(_, l, m)| self.label_rank(l) * m as u128)
            .sum()
    }

    /// First Chern class in Picard coordinates.
    pub fn first_chern(&self, b: &DecomposedBundle) -> Vec<i64> {
        let mut out = vec![0i64; self.space.picard_rank()];
        for (_, l, m) in b.summands() {
            let c = self.label_first_chern(l);
            for (o, x) in out.iter_mut().zip(c) {
                *o += x * m as i64;
            }
        }
        out
    }

    /// First Chern class of an irreducible bundle in Picard coordinates.
    pub fn label_first_chern(&self, label: &[i64]) -> Vec<i64> {
        let rank = self.label_rank(label) as i128;
        let mut out = Vec::with_capacity(self.space.picard_rank());
        for (fi, blocks) in self.factor_blocks.iter().enumerate() {
            let off = self.offsets[fi];
            let mut coeff = Vec::with_capacity(blocks.len());
            let mut s = off;
            for &b in blocks {
                let total: i128 = label[s..s + b].iter().map(|&x| x as i128).sum();
                let num = rank * total;
                assert_eq!(num % b as i128, 0, "first Chern class must be integral");
                coeff.push((num / b as i128) as i64);
                s += b;
            }
            out.extend(block_coefficients_to_picard(&coeff, blocks.len() - 1));
        }
        out
    }

    /// Tensor product of two irreducibles, decomposed blockwise with LR.
    pub fn tensor_labels(&self, a: &[i64], b: &[i64]) -> Vec<(IntVector, u64)> {
        let mut acc: Vec<(IntVector, u64)> = vec![(Vec::with_capacity(a.len()), 1)];
        for (fi, blocks) in self.factor_blocks.iter().enumerate() {
            let off = self.offsets[fi];
            let n: usize = blocks.iter().sum();
            let pa = &a[off..off + n];
            let pb = &b[off..off + n];
            let prod = self.factor_tensor(blocks, pa, pb);
            if prod.len() == 1 {
                let (l, c) = &prod[0];
                for (v, m) in acc.iter_mut() {
                    v.extend_from_slice(l);
                    *m *= c;
                }
            } else {
                let mut next = Vec::with_capacity(acc.len() * prod.len());
                for (v, m) in &acc {
                    for (l, c) in prod.iter() {
                        let mut w = v.clone();
                        w.extend_from_slice(l);
                        next.push((w, m * c));
                    }
                }
                acc = next;
            }
        }
        acc
    }

    fn factor_tensor(&self, blocks: &[usize], a: &[i64], b: &[i64]) -> Rc<Vec<(IntVector, u64)>> {
        let line_a = is_blockwise_constant(a, blocks);
        let line_b = is_blockwise_constant(b, blocks);
        if line_a || line_b {
            let mut v: IntVector = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let shift = v[v.len() - 1];
            v.iter_mut().for_each(|x| *x -= shift);
            return Rc::new(vec![(v, 1)]);
        }
        let key = (blocks.to_vec(), a.to_vec(), b.to_vec());
        if let Some(hit) = FACTOR_TENSOR.with(|c| c.borrow().get(&key).cloned()) {
            return hit;
        }
        let mut acc: Vec<(IntVector, u64)> = vec![(Vec::new(), 1)];
        let mut s = 0;
        for &bs in blocks {
            let prod = lr_multiply_gl(&a[s..s + bs], &b[s..s + bs]);
            let mut next = Vec::with_capacity(acc.len() * prod.len());
            for (v, m) in &acc {
                for (l, c) in &prod {
                    let mut w = v.clone();
                    w.extend_from_slice(l);
                    next.push((w, m * c));
                }
            }
            acc = next;
            s += bs;
        }
        for (v, _) in acc.iter_mut() {
            let shift = v[v.len() - 1];
            v.iter_mut().for_each(|x| *x -= shift);
        }
        let mut merged: BTreeMap<IntVector, u64> = BTreeMap::new();
        for (v, m) in acc {
            *merged.entry(v).or_insert(0) += m;
        }
        let result = Rc::new(merged.into_iter().collect::<Vec<_>>());
        FACTOR_TENSOR.with(|c| c.borrow_mut().insert(key, result.clone()));
        result
    }

    /// Tensor product of filtered bundles; levels add.
    pub fn tensor(&self, a: &DecomposedBundle, b: &DecomposedBundle) -> DecomposedBundle {
        let mut out = DecomposedBundle::zero();
        for (la, xa, ma) in a.summands() {
            for (lb, xb, mb) in b.summands() {
                for (l, c) in self.tensor_labels(xa, xb) {
                    out.add(la + lb, l, ma * mb * c);
                }
            }
        }
        out
    }

    /// Dual bundle; the filtration is reversed.
    pub fn dual(&self, a: &DecomposedBundle) -> DecomposedBundle {
        let mut out = DecomposedBundle::zero();
        for (lvl, l, m) in a.summands() {
            out.add(-lvl, dual_label(self.space, l), m);
        }
        out
    }

    /// Twist by a line bundle in Picard coordinates.
    pub fn twist(
        &self,
        a: &DecomposedBundle,
        degrees: &[i64],
    ) -> Result<DecomposedBundle, BundleError> {
        let line = self.line(degrees)?;
        Ok(self.tensor(a, &line))
    }

    /// Weights of an irreducible bundle as concatenated vectors.
    pub fn label_weights(&self, label: &[i64]) -> Vec<(IntVector, u64)> {
        let blocks = crate::combinat::split_blocks(label, &self.block_sizes);
        let w = product_weights(&blocks).expect("dominant label");
        w.into_iter().collect()
    }

    /// `Schur_mu` of an irreducible bundle, decomposed into irreducibles.
    pub fn schur_of_label(&self, label: &[i64], mu: &Partition) -> Rc<Vec<(IntVector, u64)>> {
        let n = label.len();
        if mu.is_empty() {
            return Rc::new(vec![(vec![0; n], 1)]);
        }
        let key = (self.block_sizes.clone(), label.to_vec(), mu.clone());
        if let Some(hit) = SCHUR_IRREP.with(|c| c.borrow().get(&key).cloned()) {
            return hit;
        }
        let result = Rc::new(self.schur_of_label_uncached(label, mu));
        SCHUR_IRREP.with(|c| c.borrow_mut().insert(key, result.clone()));
        result
    }

    fn schur_of_label_uncached(&self, label: &[i64], mu: &Partition) -> Vec<(IntVector, u64)> {
        let rank = self.label_rank(label);
        let size = mu.size() as i64;
        if rank == 1 {
            if mu.len() > 1 {
                return Vec::new();
            }
            let v: IntVector = label.iter().map(|x| x * size).collect();
            return vec![(self.canonical(&v), 1)];
        }
        if let Some((start, len, shape)) = self.standard_block(label) {
            if mu.len() > len {
                return Vec::new();
            }
            let mut v: IntVector = Vec::with_capacity(label.len());
            let padded = mu.padded(len);
            for (i, &x) in label.iter().enumerate() {
                if i >= start && i < start + len {
                    let j = i - start;
                    let base = match shape {
                        StandardShape::Standard(c) => c * size + padded[j],
                        StandardShape::Dual(c) => c * size - padded[len - 1 - j],
                    };
                    v.push(base);
                } else {
                    v.push(x * size);
                }
            }
            return vec![(self.canonical(&v), 1)];
        }
        let weights: Vec<IntVector> = self
            .label_weights(label)
            .into_iter()
            .flat_map(|(w, m)| std::iter::repeat_n(w, m as usize))
            .collect();
        let r = weights.len();
        if mu.len() > r {
            return Vec::new();
        }
        let contents = weight_multiset_shared(&mu.padded(r), r).expect("partition is dominant");
        let mut total: BTreeMap<IntVector, u64> = BTreeMap::new();
        for (c, &k) in contents.iter() {
            let mut w = vec![0i64; label.len()];
            for (ci, wi) in c.iter().zip(&weights) {
                if *ci != 0 {
                    for (x, y) in w.iter_mut().zip(wi) {
                        *x += ci * y;
                    }
                }
            }
            *total.entry(w).or_insert(0) += k;
        }
        let dec = decompose_character(&total, &self.block_sizes)
            .expect("a Schur functor yields a character");
        let mut merged: BTreeMap<IntVector, u64> = BTreeMap::new();
        for (blocks, m) in dec {
            let flat: IntVector = blocks.concat();
            *merged.entry(self.canonical(&flat)).or_insert(0) += m;
        }
        merged.into_iter().collect()
    }

    /// Detects an irreducible of the form (standard or dual standard of one
    /// block) tensored with a line bundle.
    fn standard_block(&self, label: &[i64]) -> Option<(usize, usize, StandardShape)> {
        let mut found = None;
        let mut s = 0;
        for &b in &self.block_sizes {
            let blk = &label[s..s + b];
            if blk.iter().any(|&x| x != blk[0]) {
                if found.is_some() {
                    return None;
                }
                let lo = blk[b - 1];
                let hi = blk[0];
                let shape = if hi == lo + 1 && blk[1..].iter().all(|&x| x == lo) {
                    StandardShape::Standard(lo)
                } else if hi == lo + 1 && blk[..b - 1].iter().all(|&x| x == hi) {
                    StandardShape::Dual(hi)
                } else {
                    return None;
                };
                found = Some((s, b, shape));
            }
            s += b;
        }
        found
    }

    /// Exterior powers `Wedge^0 .. Wedge^max` of a filtered bundle.
    pub fn exterior_powers(&self, b: &DecomposedBundle, max: u32) -> Vec<DecomposedBundle> {
        self.power_series(b, max, Partition::column)
    }

    /// Symmetric powers `Sym^0 .. Sym^max` of a filtered bundle.
    pub fn symmetric_powers(&self, b: &DecomposedBundle, max: u32) -> Vec<DecomposedBundle> {
        self.power_series(b, max, Partition::row)
    }

    fn power_series(
        &self,
        b: &DecomposedBundle,
        max: u32,
        shape: fn(u32) -> Partition,
    ) -> Vec<DecomposedBundle> {
        let mut acc: Vec<DecomposedBundle> = vec![DecomposedBundle::zero(); max as usize + 1];
        acc[0] = self.trivial();
        for (lvl, label, mult) in b.summands() {
            let powers: Vec<Rc<Vec<(IntVector, u64)>>> = (0..=max)
                .map(|a| self.schur_of_label(label, &shape(a)))
                .collect();
            for _ in 0..mult {
                let mut next = vec![DecomposedBundle::zero(); max as usize + 1];
                for p in 0..=max as usize {
                    for a in 0..=p {
                        if powers[a].is_empty() || acc[p - a].is_zero() {
                            continue;
                        }
                        let mut pa = DecomposedBundle::zero();
                        for (l, m) in powers[a].iter() {
                            pa.add(lvl * a as i64, l.clone(), *m);
                        }
                        let t = self.tensor(&acc[p - a], &pa);
                        next[p] = next[p].direct_sum(&t);
                    }
                }
                acc = next;
            }
        }
        acc
    }

    /// `Schur_lambda` of a filtered bundle via the LR expansion over summands.
    pub fn schur(
        &self,
        b: &DecomposedBundle,
        lambda: &Partition,
    ) -> Result<DecomposedBundle, BundleError> {
        let rank = self.rank(b);
        if lambda.len() as u128 > rank {
            return Err(BundleError::SchurTooLong {
                lambda: lambda.to_string(),
                rank,
            });
        }
        let subs = lambda.subpartitions();
        let mut acc: BTreeMap<Partition, DecomposedBundle> = BTreeMap::new();
        acc.insert(Partition::default(), self.trivial());
        for (lvl, label, mult) in b.summands() {
            for _ in 0..mult {
                let mut next: BTreeMap<Partition, DecomposedBundle> = BTreeMap::new();
                for mu in &subs {
                    let mut total = DecomposedBundle::zero();
                    for (alpha, old) in &acc {
                        if !alpha.contained_in(mu) || old.is_zero() {
                            continue;
                        }
                        for beta in &subs {
                            if alpha.size() + beta.size() != mu.size() || !beta.contained_in(mu) {
                                continue;
                            }
                            let c = lr_multiply_shared(alpha, beta)
                                .get(mu)
                                .copied()
                                .unwrap_or(0);
                            if c == 0 {
                                continue;
                            }
                            let sb = self.schur_of_label(label, beta);
                            if sb.is_empty() {
                                continue;
                            }
                            let mut piece = DecomposedBundle::zero();
                            for (l, m) in sb.iter() {
                                piece.add(lvl * beta.size() as i64, l.clone(), m * c);
                            }
                            total = total.direct_sum(&self.tensor(old, &piece));
                        }
                    }
                    next.insert(mu.clone(), total);
                }
                acc = next;
            }
        }
        Ok(acc.remove(lambda).unwrap_or_default())
    }

    /// The tautological bundle `U_{f.i}` or `Q_{f.i}` (1-based indices).
    pub fn tautological(
        &self,
        kind: TautKind,
        factor: usize,
        index: usize,
    ) -> Result<DecomposedBundle, BundleError> {
        if factor == 0 || factor > self.space.factors.len() {
            return Err(BundleError::NoSuchFactor(factor));
        }
        let f = &self.space.factors[factor - 1];
        let r = f.picard_rank();
        if index == 0 || index > r {
            return Err(BundleError::NoSuchIndex { factor, index });
        }
        // Blocks are numbered 0 (V/U_r) .. r (U_1). U_i consists of blocks
        // r, r-1, .., r-i+1 and Q_i of blocks r-i, .., 0, sub to quotient.
        let blocks: Vec<usize> = match kind {
            TautKind::Sub => (r + 1 - index..=r).rev().collect(),
            TautKind::Quotient => (0..=r - index).rev().collect(),
        };
        let mut out = DecomposedBundle::zero();
        for (lvl, &blk) in blocks.iter().enumerate() {
            out.add(lvl as i64, self.block_standard(factor - 1, blk), 1);
        }
        Ok(out)
    }

    /// Label of the standard representation of one block of one factor.
    fn block_standard(&self, factor: usize, block: usize) -> IntVector {
        let mut v = vec![0i64; self.space.label_len()];
        let off = self.offsets[factor] + self.factor_blocks[factor][..block].iter().sum::<usize>();
        v[off] = 1;
        self.canonical(&v)
    }

    /// The tangent bundle: on each factor, `B_a (x) B_b^dual` for blocks
    /// `a < b`, at filtration level `b - a` (adjacent blocks form the sub).
    pub fn tangent(&self) -> DecomposedBundle {
        let mut out = DecomposedBundle::zero();
        for (fi, blocks) in self.factor_blocks.iter().enumerate() {
            for a in 0..blocks.len() {
                for b in (a + 1)..blocks.len() {
                    let mut v = vec![0i64; self.space.label_len()];
                    let off = self.offsets[fi];
                    let sa = off + blocks[..a].iter().sum::<usize>();
                    let sb = off + blocks[..b].iter().sum::<usize>() + blocks[b] - 1;
                    v[sa] = 1;
                    v[sb] = -1;
                    out.add((b - a) as i64, self.canonical(&v), 1);
                }
            }
        }
        out
    }

    /// The cotangent bundle.
    pub fn cotangent(&self) -> DecomposedBundle {
        self.dual(&self.tangent())
    }

    /// Normal form of an expression.
    pub fn normalize(&self, e: &BundleExpr) -> Result<DecomposedBundle, BundleError> {
        Ok(match e {
            BundleExpr::Line(d) => self.line(d)?,
            BundleExpr::Taut {
                kind,
                factor,
                index,
            } => self.tautological(*kind, *factor, *index)?,
            BundleExpr::Dual(inner) => self.dual(&self.normalize(inner)?),
            BundleExpr::Twist(inner, d) => self.twist(&self.normalize(inner)?, d)?,
            BundleExpr::Tensor(v) => {
                let mut acc = self.trivial();
                for x in v {
                    acc = self.tensor(&acc, &self.normalize(x)?);
                }
                acc
            }
            BundleExpr::Sum(v) => {
                let mut acc = DecomposedBundle::zero();
                for x in v {
                    acc = acc.direct_sum(&self.normalize(x)?);
                }
                acc
            }
            BundleExpr::Wedge(k, inner) => {
                let b = self.normalize(inner)?;
                self.exterior_powers(&b, *k).pop().unwrap_or_default()
            }
            BundleExpr::Sym(k, inner) => {
                let b = self.normalize(inner)?;
                self.symmetric_powers(&b, *k).pop().unwrap_or_default()
            }
            BundleExpr::Schur(l, inner) => self.schur(&self.normalize(inner)?, l)?,
            BundleExpr::Ext(v) => {
                if v.len() < 2 {
                    return Err(BundleError::ShortExtension);
                }
                let mut acc = DecomposedBundle::zero();
                let mut next_level = 0i64;
                for x in v {
                    let b = self.normalize(x)?;
                    let (Some(lo), Some(hi)) = (b.min_level(), b.max_level()) else {
                        continue;
                    };
                    acc = acc.direct_sum(&b.shift_levels(next_level - lo));
                    next_level += hi - lo + 1;
                }
                acc
            }
        })
    }

    /// Rank computed by structural recursion, without normalizing.
    pub fn structural_rank(&self, e: &BundleExpr) -> Result<u128, BundleError> {
        Ok(match e {
            BundleExpr::Line(_) => 1,
            BundleExpr::Taut { .. } => self.rank(&self.normalize(e)?),
            BundleExpr::Dual(inner) | BundleExpr::Twist(inner, _) => self.structural_rank(inner)?,
            BundleExpr::Tensor(v) => {
                let mut r = 1;
                for x in v {
                    r *= self.structural_rank(x)?;
                }
                r
            }
            BundleExpr::Sum(v) | BundleExpr::Ext(v) => {
                let mut r = 0;
                for x in v {
                    r += self.structural_rank(x)?;
                }
                r
            }
            BundleExpr::Wedge(k, inner) => binomial(self.structural_rank(inner)?, *k as u128),
            BundleExpr::Sym(k, inner) => {
                let r = self.structural_rank(inner)?;
                if r == 0 {
                    u128::from(*k == 0)
                } else {
                    binomial(r + *k as u128 - 1, *k as u128)
                }
            }
            BundleExpr::Schur(l, inner) => {
                let r = self.structural_rank(inner)?;
                if l.len() as u128 > r {
                    0
                } else {
                    weyl_dim_u128(&l.padded(r as usize))
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum StandardShape {
    Standard(i64),
    Dual(i64),
}

fn is_blockwise_constant(v: &[i64], blocks: &[usize]) -> bool {
    let mut s = 0;
    for &b in blocks {
        if v[s..s + b].iter().any(|&x| x != v[s]) {
            return false;
        }
        s += b;
    }
    true
}

/// Binomial coefficient in `u128`.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Normal form of an expression over a space.
pub fn normalize(
    expr: &BundleExpr,
    space: &SpaceDescriptor,
) -> Result<DecomposedBundle, BundleError> {
    Calc::new(space)?.normalize(expr)
}

/// Tangent bundle of a space.
pub fn tangent(space: &SpaceDescriptor) -> Result<DecomposedBundle, BundleError> {
    Ok(Calc::new(space)?.tangent())
}

/// Cotangent bundle of a space.
pub fn cotangent(space: &SpaceDescriptor) -> Result<DecomposedBundle, BundleError> {
    Ok(Calc::new(space)?.cotangent())
}

/// Rank of an expression.
pub fn rank(expr: &BundleExpr, space: &SpaceDescriptor) -> Result<u128, BundleError> {
    let c = Calc::new(space)?;
    Ok(c.rank(&c.normalize(expr)?))
}

/// First Chern class of an expression in Picard coordinates.
pub fn first_chern(expr: &BundleExpr, space: &SpaceDescriptor) -> Result<Vec<i64>, BundleError> {
    let c = Calc::new(space)?;
    Ok(c.first_chern(&c.normalize(expr)?))
}
