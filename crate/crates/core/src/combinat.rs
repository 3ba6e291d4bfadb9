//! Partition combinatorics: Littlewood-Richardson coefficients, weight
//! multisets of irreducible `GL(m)` representations, the Weyl dimension
//! formula and the decomposition of characters into irreducibles.
//!
//! Everything here is exact. Dimensions are arbitrary-precision integers,
//! multiplicities of weights and LR coefficients fit comfortably in `u64`
//! for the label sizes this crate works with.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

/// A weight of a torus, or a highest weight of a product of general linear groups.
pub type IntVector = Vec<i64>;

/// Weights counted with multiplicity.
pub type WeightMultiset = BTreeMap<IntVector, u64>;

/// Errors raised by the combinatorial routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatError {
    #[error("sequence {0:?} is not weakly decreasing")]
    NotDominant(Vec<i64>),
    #[error("sequence {0:?} has a negative entry and is not a partition")]
    NegativePart(Vec<i64>),
    #[error("label of length {len} does not fit a group of rank {rank}")]
    LengthMismatch { len: usize, rank: usize },
    #[error("weight multiset is not a character: extraction of {0:?} went negative")]
    NotACharacter(Vec<IntVector>),
}

/// A weakly decreasing sequence of non-negative integers with trailing
/// zeros stripped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition, rejecting increasing or negative sequences.
    pub fn new(parts: &[i64]) -> Result<Self, CombinatError> {
        if parts.iter().any(|&p| p < 0) {
            return Err(CombinatError::NegativePart(parts.to_vec()));
        }
        if !is_weakly_decreasing(parts) {
            return Err(CombinatError::NotDominant(parts.to_vec()));
        }
        let mut v: Vec<u32> = parts.iter().map(|&p| p as u32).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        Ok(Partition { parts: v })
    }

    /// The one-row partition `(k)`.
    pub fn row(k: u32) -> Self {
        if k == 0 {
            Partition::default()
        } else {
            Partition { parts: vec![k] }
        }
    }

    /// The one-column partition `(1^k)`.
    pub fn column(k: u32) -> Self {
        Partition {
            parts: vec![1; k as usize],
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of non-zero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of boxes.
    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// The transposed partition.
    pub fn conjugate(&self) -> Partition {
        let width = self.parts.first().copied().unwrap_or(0);
        let parts = (0..width)
            .map(|c| self.parts.iter().filter(|&&p| p > c).count() as u32)
            .collect();
        Partition { parts }
    }

    /// The parts padded with zeros to length `m`, as signed integers.
    pub fn padded(&self, m: usize) -> IntVector {
        let mut v: IntVector = self.parts.iter().map(|&p| p as i64).collect();
        v.resize(m.max(v.len()), 0);
        v
    }

    /// Whether the Young diagram of `self` lies inside that of `other`.
    pub fn contained_in(&self, other: &Partition) -> bool {
        self.len() <= other.len() && self.parts.iter().zip(&other.parts).all(|(a, b)| a <= b)
    }

    /// All partitions contained in `self`.
    pub fn subpartitions(&self) -> Vec<Partition> {
        fn rec(bound: &[u32], prev: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            let idx = cur.len();
            let mut trimmed = cur.clone();
            while trimmed.last() == Some(&0) {
                trimmed.pop();
            }
            if idx == bound.len() {
                out.push(Partition { parts: trimmed });
                return;
            }
            let hi = bound[idx].min(prev);
            for v in 0..=hi {
                cur.push(v);
                rec(bound, v, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(&self.parts, u32::MAX, &mut Vec::new(), &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", body.join(","))
    }
}

/// Whether the sequence is weakly decreasing.
pub fn is_weakly_decreasing(v: &[i64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

type LrTable = Rc<BTreeMap<Partition, u64>>;

thread_local! {
    static LR_CACHE: RefCell<HashMap<(Partition, Partition), LrTable>> =
        RefCell::new(HashMap::new());
    static GT_CACHE: RefCell<HashMap<IntVector, Rc<WeightMultiset>>> = RefCell::new(HashMap::new());
}

/// Littlewood-Richardson product `s_lambda * s_mu` as a map `nu -> c^nu_{lambda mu}`.
pub fn lr_multiply(lambda: &Partition, mu: &Partition) -> BTreeMap<Partition, u64> {
    (*lr_multiply_shared(lambda, mu)).clone()
}

/// Cached variant of [`lr_multiply`] that avoids cloning the result.
pub fn lr_multiply_shared(lambda: &Partition, mu: &Partition) -> Rc<BTreeMap<Partition, u64>> {
    // The product is commutative; enumerating with the smaller partition as
    // content keeps the search shallow.
    let (big, small) = if (lambda.size(), lambda) >= (mu.size(), mu) {
        (lambda, mu)
    } else {
        (mu, lambda)
    };
    let key = (big.clone(), small.clone());
    if let Some(hit) = LR_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let result = Rc::new(lr_enumerate(big, small));
    LR_CACHE.with(|c| c.borrow_mut().insert(key, result.clone()));
    result
}

/// Enumerates LR tableaux of content `mu` on skew shapes `nu / lambda`.
fn lr_enumerate(lambda: &Partition, mu: &Partition) -> BTreeMap<Partition, u64> {
    let mut out = BTreeMap::new();
    let shape: Vec<u32> = lambda.parts.clone();
    let mut counts: Vec<Vec<u32>> = Vec::new();
    place_label(&shape, &mu.parts, 0, &mut counts, &mut out);
    out
}

/// Places all boxes carrying `label` as a horizontal strip, row by row,
/// respecting the lattice-word condition against `label - 1`.
fn place_label(
    shape: &[u32],
    content: &[u32],
    label: usize,
    counts: &mut Vec<Vec<u32>>,
    out: &mut BTreeMap<Partition, u64>,
) {
    if label == content.len() {
        let mut p = shape.to_vec();
        while p.last() == Some(&0) {
            p.pop();
        }
        *out.entry(Partition { parts: p }).or_insert(0) += 1;
        return;
    }
    let mut new_shape = shape.to_vec();
    new_shape.push(0);
    let rows = new_shape.len();
    while counts.len() < rows {
        counts.push(Vec::new());
    }
    for row in counts.iter_mut() {
        if row.len() <= label {
            row.resize(label + 1, 0);
        }
    }
    place_rows(
        shape,
        content,
        label,
        0,
        content[label],
        0,
        0,
        &mut new_shape,
        counts,
        out,
    );
    for row in counts.iter_mut() {
        row[label] = 0;
    }
}

#[allow(clippy::too_many_arguments)]
fn place_rows(
    old: &[u32],
    content: &[u32],
    label: usize,
    row: usize,
    remaining: u32,
    cum_label: u32,
    cum_prev: u32,
    new_shape: &mut Vec<u32>,
    counts: &mut Vec<Vec<u32>>,
    out: &mut BTreeMap<Partition, u64>,
) {
    if remaining == 0 {
        let next: Vec<u32> = new_shape.clone();
        place_label(&next, content, label + 1, counts, out);
        return;
    }
    if row >= new_shape.len() {
        return;
    }
    let old_len = old.get(row).copied().unwrap_or(0);
    let strip_cap = if row == 0 {
        remaining
    } else {
        old[row - 1] - old_len
    };
    let lattice_cap = if label == 0 {
        remaining
    } else {
        // Boxes labelled `label` in rows 0..=row may not outnumber boxes
        // labelled `label - 1` in rows 0..row.
        cum_prev.saturating_sub(cum_label)
    };
    let cap = remaining.min(strip_cap).min(lattice_cap);
    let prev_here = if label == 0 {
        0
    } else {
        counts[row][label - 1]
    };
    for add in (0..=cap).rev() {
        new_shape[row] = old_len + add;
        counts[row][label] = add;
        place_rows(
            old,
            content,
            label,
            row + 1,
            remaining - add,
            cum_label + add,
            cum_prev + prev_here,
            new_shape,
            counts,
            out,
        );
    }
    new_shape[row] = old_len;
    counts[row][label] = 0;
}

/// Weyl dimension formula for the irreducible `GL(m)` module of highest weight `lambda`.
pub fn weyl_dim(lambda: &[i64], m: usize) -> Result<BigInt, CombinatError> {
    if lambda.len() != m {
        return Err(CombinatError::LengthMismatch {
            len: lambda.len(),
            rank: m,
        });
    }
    if !is_weakly_decreasing(lambda) {
        return Err(CombinatError::NotDominant(lambda.to_vec()));
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..m {
        for j in (i + 1)..m {
            num *= BigInt::from(lambda[i] - lambda[j] + (j - i) as i64);
            den *= BigInt::from((j - i) as i64);
        }
    }
    Ok(num / den)
}

/// [`weyl_dim`] narrowed to `u128`, for labels already known to be dominant.
pub fn weyl_dim_u128(lambda: &[i64]) -> u128 {
    weyl_dim(lambda, lambda.len())
        .expect("dominant label")
        .to_u128()
        .expect("dimension fits in u128")
}

/// All weights of the irreducible `GL(m)` module of highest weight `lambda`,
/// enumerated through Gelfand-Tsetlin patterns.
pub fn weight_multiset(lambda: &[i64], m: usize) -> Result<WeightMultiset, CombinatError> {
    Ok((*weight_multiset_shared(lambda, m)?).clone())
}

/// Cached variant of [`weight_multiset`].
pub fn weight_multiset_shared(
    lambda: &[i64],
    m: usize,
) -> Result<Rc<WeightMultiset>, CombinatError> {
    if lambda.len() != m {
        return Err(CombinatError::LengthMismatch {
            len: lambda.len(),
            rank: m,
        });
    }
    if !is_weakly_decreasing(lambda) {
        return Err(CombinatError::NotDominant(lambda.to_vec()));
    }
    if m == 0 {
        let mut w = WeightMultiset::new();
        w.insert(Vec::new(), 1);
        return Ok(Rc::new(w));
    }
    let key = lambda.to_vec();
    if let Some(hit) = GT_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(hit);
    }
    // Tensoring with a power of the determinant translates every weight, so
    // the enumeration runs on a non-negative representative.
    let shift = lambda[m - 1].min(0);
    let shifted: Vec<i64> = lambda.iter().map(|&x| x - shift).collect();
    let mut memo = HashMap::new();
    let base = gt_weights(&shifted, &mut memo);
    let result: WeightMultiset = base
        .iter()
        .map(|(w, &c)| (w.iter().map(|&x| x + shift).collect(), c))
        .collect();
    let result = Rc::new(result);
    GT_CACHE.with(|c| c.borrow_mut().insert(key, result.clone()));
    Ok(result)
}

fn gt_weights(
    row: &[i64],
    memo: &mut HashMap<IntVector, Rc<WeightMultiset>>,
) -> Rc<WeightMultiset> {
    if let Some(hit) = memo.get(row) {
        return hit.clone();
    }
    let k = row.len();
    let mut out = WeightMultiset::new();
    if k == 1 {
        out.insert(vec![row[0]], 1);
    } else {
        let total: i64 = row.iter().sum();
        let mut next = vec![0i64; k - 1];
        interlacing(row, 0, &mut next, &mut |sub_row| {
            let sub = gt_weights(sub_row, memo);
            let last = total - sub_row.iter().sum::<i64>();
            for (w, &c) in sub.iter() {
                let mut full = w.clone();
                full.push(last);
                *out.entry(full).or_insert(0) += c;
            }
        });
    }
    let out = Rc::new(out);
    memo.insert(row.to_vec(), out.clone());
    out
}

fn interlacing(row: &[i64], i: usize, next: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if i == next.len() {
        f(next);
        return;
    }
    for v in row[i + 1]..=row[i] {
        next[i] = v;
        interlacing(row, i + 1, next, f);
    }
}

/// Splits a concatenated vector into consecutive blocks of the given sizes.
pub fn split_blocks<'a>(v: &'a [i64], block_sizes: &[usize]) -> Vec<&'a [i64]> {
    let mut out = Vec::with_capacity(block_sizes.len());
    let mut start = 0;
    for &b in block_sizes {
        out.push(&v[start..start + b]);
        start += b;
    }
    out
}

/// Whether every block of `v` is weakly decreasing.
pub fn is_blockwise_dominant(v: &[i64], block_sizes: &[usize]) -> bool {
    split_blocks(v, block_sizes)
        .iter()
        .all(|b| is_weakly_decreasing(b))
}

/// Weights of the outer tensor product of irreducibles, one per block,
/// written as concatenated vectors.
pub fn product_weights(blocks: &[&[i64]]) -> Result<WeightMultiset, CombinatError> {
    let mut acc: Vec<(IntVector, u64)> = vec![(Vec::new(), 1)];
    for b in blocks {
        let ws = weight_multiset_shared(b, b.len())?;
        let mut next = Vec::with_capacity(acc.len() * ws.len());
        for (prefix, c) in &acc {
            for (w, d) in ws.iter() {
                let mut v = prefix.clone();
                v.extend_from_slice(w);
                next.push((v, c * d));
            }
        }
        acc = next;
    }
    let mut out = WeightMultiset::new();
    for (v, c) in acc {
        *out.entry(v).or_insert(0) += c;
    }
    Ok(out)
}

/// Decomposes a character of `GL(b_1) x ... x GL(b_s)` into irreducibles by
/// repeatedly extracting the lexicographically largest blockwise-dominant
/// weight, which is always a highest weight of some constituent.
pub fn decompose_character(
    w: &WeightMultiset,
    block_sizes: &[usize],
) -> Result<BTreeMap<Vec<IntVector>, u64>, CombinatError> {
    let total: usize = block_sizes.iter().sum();
    let mut remaining: BTreeMap<IntVector, i128> = BTreeMap::new();
    for (k, &v) in w {
        if k.len() != total {
            return Err(CombinatError::LengthMismatch {
                len: k.len(),
                rank: total,
            });
        }
        if v > 0 {
            remaining.insert(k.clone(), v as i128);
        }
    }
    let mut out = BTreeMap::new();
    loop {
        let top = remaining
            .iter()
            .rev()
            .find(|(k, _)| is_blockwise_dominant(k, block_sizes))
            .map(|(k, &v)| (k.clone(), v));
        let Some((top, mult)) = top else {
            break;
        };
        let blocks = split_blocks(&top, block_sizes);
        let irrep = product_weights(&blocks)?;
        for (k, &c) in &irrep {
            let entry = remaining.entry(k.clone()).or_insert(0);
            *entry -= mult * c as i128;
            if *entry < 0 {
                return Err(CombinatError::NotACharacter(
                    blocks.iter().map(|b| b.to_vec()).collect(),
                ));
            }
            if *entry == 0 {
                remaining.remove(k);
            }
        }
        out.insert(blocks.iter().map(|b| b.to_vec()).collect(), mult as u64);
    }
    if !remaining.is_empty() {
        let k = remaining.keys().next().cloned().unwrap_or_default();
        return Err(CombinatError::NotACharacter(vec![k]));
    }
    Ok(out)
}

/// Littlewood-Richardson product of two `GL(m)` highest weights that may
/// have negative entries, keeping only constituents of length at most `m`.
pub fn lr_multiply_gl(a: &[i64], b: &[i64]) -> Vec<(IntVector, u64)> {
    let m = a.len();
    debug_assert_eq!(m, b.len());
    if m == 0 {
        return vec![(Vec::new(), 1)];
    }
    let sa = a[m - 1];
    let sb = b[m - 1];
    let pa = Partition::new(&a.iter().map(|x| x - sa).collect::<Vec<_>>()).expect("dominant");
    let pb = Partition::new(&b.iter().map(|x| x - sb).collect::<Vec<_>>()).expect("dominant");
    if pa.is_empty() || pb.is_empty() {
        let v = a.iter().zip(b).map(|(x, y)| x + y).collect();
        return vec![(v, 1)];
    }
    let prod = lr_multiply_shared(&pa, &pb);
    prod.iter()
        .filter(|(nu, _)| nu.len() <= m)
        .map(|(nu, &c)| (nu.padded(m).into_iter().map(|x| x + sa + sb).collect(), c))
        .collect()
}
