//! Ambient spaces and Bott's algorithm for irreducible homogeneous bundles
//! on products of Grassmannians and partial flag varieties.
//!
//! A factor of ambient rank `n` carries labels of length `n`, split into
//! blocks ordered from the quotient side: `(Q | U)` of sizes `(n-k, k)` on
//! `Gr(k,n)`, and `(V/U_r | U_r/U_{r-1} | ... | U_1)` on a flag variety.
//! A label of the whole space is the concatenation of its factor labels.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::combinat::{is_weakly_decreasing, weyl_dim_u128, IntVector};

/// Errors raised by computations on ambient spaces.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("weighted projective factors are stored only and cannot be computed with")]
    Weighted,
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("label {label:?} does not fit the space (expected length {expected})")]
    BadLabel { label: Vec<i64>, expected: usize },
    #[error("cohomology dimension overflows 128 bits")]
    Overflow,
}

/// One factor of an ambient product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorDescriptor {
    /// Projective space of the given dimension, identified with `Gr(1, n+1)`.
    Projective(usize),
    /// `Gr(k, n)`.
    Grassmannian(usize, usize),
    /// Partial flags of subspaces of dimensions `k_1 < ... < k_r` in `C^n`.
    Flag(Vec<usize>, usize),
    /// Weighted projective space with the given weights, stored only.
    WeightedProjective(Vec<u32>),
}

impl FactorDescriptor {
    /// Checks the numeric constraints of the factor.
    pub fn validate(&self) -> Result<(), SpaceError> {
        match self {
            FactorDescriptor::Projective(n) if *n >= 1 => Ok(()),
            FactorDescriptor::Grassmannian(k, n) if 0 < *k && k < n => Ok(()),
            FactorDescriptor::Flag(ks, n)
                if !ks.is_empty()
                    && ks[0] > 0
                    && ks.windows(2).all(|w| w[0] < w[1])
                    && ks[ks.len() - 1] < *n =>
            {
                Ok(())
            }
            FactorDescriptor::WeightedProjective(w) if w.len() >= 2 && w.iter().all(|&x| x > 0) => {
                Ok(())
            }
            other => Err(SpaceError::InvalidFactor(format!("{other}"))),
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, FactorDescriptor::WeightedProjective(_))
    }

    /// Dimension `n` of the vector space the factor is built from.
    pub fn ambient_rank(&self) -> usize {
        match self {
            FactorDescriptor::Projective(n) => n + 1,
            FactorDescriptor::Grassmannian(_, n) => *n,
            FactorDescriptor::Flag(_, n) => *n,
            FactorDescriptor::WeightedProjective(w) => w.len(),
        }
    }

    /// Subspace dimensions of the flags parametrised by the factor.
    pub fn subspace_dims(&self) -> Vec<usize> {
        match self {
            FactorDescriptor::Projective(_) => vec![1],
            FactorDescriptor::Grassmannian(k, _) => vec![*k],
            FactorDescriptor::Flag(ks, _) => ks.clone(),
            FactorDescriptor::WeightedProjective(_) => vec![1],
        }
    }

    /// Block sizes, quotient side first.
    pub fn block_sizes(&self) -> Vec<usize> {
        let n = self.ambient_rank();
        let ks = self.subspace_dims();
        let mut out = Vec::with_capacity(ks.len() + 1);
        out.push(n - ks[ks.len() - 1]);
        for i in (0..ks.len()).rev() {
            let below = if i == 0 { 0 } else { ks[i - 1] };
            out.push(ks[i] - below);
        }
        out
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        if let FactorDescriptor::WeightedProjective(w) = self {
            return w.len() - 1;
        }
        let b = self.block_sizes();
        let mut d = 0;
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                d += b[i] * b[j];
            }
        }
        d
    }

    /// Rank of the Picard group.
    pub fn picard_rank(&self) -> usize {
        self.subspace_dims().len()
    }
}

impl fmt::Display for FactorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorDescriptor::Projective(n) => write!(f, "P({n})"),
            FactorDescriptor::Grassmannian(k, n) => write!(f, "Gr({k},{n})"),
            FactorDescriptor::Flag(ks, n) => {
                let ks: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                write!(f, "Fl({};{n})", ks.join(","))
            }
            FactorDescriptor::WeightedProjective(w) => {
                let w: Vec<String> = w.iter().map(|k| k.to_string()).collect();
                write!(f, "WP({})", w.join(","))
            }
        }
    }
}

/// An ordered product of factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceDescriptor {
    pub factors: Vec<FactorDescriptor>,
}

impl SpaceDescriptor {
    pub fn new(factors: Vec<FactorDescriptor>) -> Result<Self, SpaceError> {
        if factors.is_empty() {
            return Err(SpaceError::InvalidFactor("empty product".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(SpaceDescriptor { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    pub fn has_weighted(&self) -> bool {
        self.factors.iter().any(|f| f.is_weighted())
    }

    /// Fails when a weighted factor is present.
    pub fn require_unweighted(&self) -> Result<(), SpaceError> {
        if self.has_weighted() {
            Err(SpaceError::Weighted)
        } else {
            Ok(())
        }
    }

    /// Total Picard rank, the arity of line-bundle twists.
    pub fn picard_rank(&self) -> usize {
        self.factors.iter().map(|f| f.picard_rank()).sum()
    }

    /// Total label length.
    pub fn label_len(&self) -> usize {
        self.factors.iter().map(|f| f.ambient_rank()).sum()
    }

    /// Offsets of each factor inside a concatenated label.
    pub fn factor_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut acc = 0;
        for f in &self.factors {
            out.push(acc);
            acc += f.ambient_rank();
        }
        out
    }

    /// Block sizes of all factors, concatenated.
    pub fn all_block_sizes(&self) -> Vec<usize> {
        self.factors.iter().flat_map(|f| f.block_sizes()).collect()
    }

    /// Offsets of each factor inside a Picard-rank vector.
    pub fn picard_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut acc = 0;
        for f in &self.factors {
            out.push(acc);
            acc += f.picard_rank();
        }
        out
    }

    /// Splits a concatenated label into factor labels.
    pub fn split_label<'a>(&self, label: &'a [i64]) -> Vec<&'a [i64]> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut start = 0;
        for f in &self.factors {
            let n = f.ambient_rank();
            out.push(&label[start..start + n]);
            start += n;
        }
        out
    }

    /// Checks length and blockwise dominance of a label.
    pub fn check_label(&self, label: &[i64]) -> Result<(), SpaceError> {
        let bad = || SpaceError::BadLabel {
            label: label.to_vec(),
            expected: self.label_len(),
        };
        if label.len() != self.label_len() {
            return Err(bad());
        }
        for (f, part) in self.factors.iter().zip(self.split_label(label)) {
            let mut start = 0;
            for b in f.block_sizes() {
                if !is_weakly_decreasing(&part[start..start + b]) {
                    return Err(bad());
                }
                start += b;
            }
        }
        Ok(())
    }

    /// Canonical form: every factor label shifted so that its last entry is zero.
    pub fn canonical_label(&self, label: &[i64]) -> IntVector {
        let mut out = label.to_vec();
        let mut start = 0;
        for f in &self.factors {
            let n = f.ambient_rank();
            let shift = out[start + n - 1];
            for x in &mut out[start..start + n] {
                *x -= shift;
            }
            start += n;
        }
        out
    }

    /// The label of the line bundle `O(d_1, ..., d_s)` in canonical form.
    ///
    /// On a flag factor, `O(a_1, ..., a_r)` is the tensor product of the
    /// pullbacks of `O(a_i)` from `Gr(k_i, n)`, so block `j` (counted from
    /// the quotient side) receives `a_1 + ... + a_{r-j}`.
    pub fn line_bundle_label(&self, degrees: &[i64]) -> IntVector {
        assert_eq!(degrees.len(), self.picard_rank(), "twist arity");
        let mut out = Vec::with_capacity(self.label_len());
        let mut d = 0;
        for f in &self.factors {
            let r = f.picard_rank();
            let a = &degrees[d..d + r];
            for (j, &b) in f.block_sizes().iter().enumerate() {
                let val: i64 = a[..r - j].iter().sum();
                out.extend(std::iter::repeat_n(val, b));
            }
            d += r;
        }
        out
    }

    /// The label of the canonical bundle.
    pub fn canonical_bundle_label(&self) -> IntVector {
        let mut deg = Vec::with_capacity(self.picard_rank());
        for f in &self.factors {
            deg.extend(factor_anticanonical(f).into_iter().map(|x| -x));
        }
        self.line_bundle_label(&deg)
    }
}

/// Picard coordinates of the anticanonical class of a factor.
pub fn factor_anticanonical(f: &FactorDescriptor) -> Vec<i64> {
    let b = f.block_sizes();
    let r = b.len() - 1;
    // c_1 of the tangent bundle is sum_{a<b} (size_b e_a - size_a e_b) where
    // e_a is the sum of the torus parameters of block a.
    let mut coeff = vec![0i64; b.len()];
    for a in 0..b.len() {
        for c in (a + 1)..b.len() {
            coeff[a] += b[c] as i64;
            coeff[c] -= b[a] as i64;
        }
    }
    block_coefficients_to_picard(&coeff, r)
}

/// Converts a class `sum_j c_j e_j` (with `e_j` the block parameter sums) to
/// Picard coordinates, using that the sum of all `e_j` is trivial.
pub fn block_coefficients_to_picard(coeff: &[i64], r: usize) -> Vec<i64> {
    let last = coeff[r];
    let c: Vec<i64> = coeff.iter().map(|x| x - last).collect();
    (1..=r).map(|i| c[r - i] - c[r - i + 1]).collect()
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Per-degree dimension intervals together with the exact Euler characteristic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyProfile {
    pub lb: Vec<i128>,
    pub ub: Vec<i128>,
    pub euler: i128,
}

impl CohomologyProfile {
    /// The zero profile with degrees `0..=dim`.
    pub fn zero(dim: usize) -> Self {
        CohomologyProfile {
            lb: vec![0; dim + 1],
            ub: vec![0; dim + 1],
            euler: 0,
        }
    }

    /// An exact profile from given dimensions.
    pub fn exact(dims: Vec<i128>) -> Self {
        let euler = dims
            .iter()
            .enumerate()
            .map(|(q, d)| if q % 2 == 0 { *d } else { -*d })
            .sum();
        CohomologyProfile {
            lb: dims.clone(),
            ub: dims,
            euler,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lb == self.ub
    }

    /// The dimension in degree `q` when pinned.
    pub fn exact_at(&self, q: usize) -> Option<i128> {
        if q >= self.lb.len() {
            return Some(0);
        }
        (self.lb[q] == self.ub[q]).then_some(self.lb[q])
    }

    /// Adds an exact profile into this one.
    pub fn add_assign(&mut self, other: &CohomologyProfile) {
        for q in 0..self.lb.len().min(other.lb.len()) {
            self.lb[q] += other.lb[q];
            self.ub[q] += other.ub[q];
        }
        self.euler += other.euler;
    }
}

/// Cohomology of one irreducible bundle: all of it sits in one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottResult {
    /// `None` for an acyclic bundle.
    pub degree: Option<usize>,
    pub dimension: u128,
    /// Highest weights (one per factor) of the non-zero cohomology group.
    pub module: Vec<IntVector>,
}

impl BottResult {
    /// The result as an exact profile on a space of dimension `dim`.
    pub fn profile(&self, dim: usize) -> CohomologyProfile {
        let mut dims = vec![0i128; dim + 1];
        if let Some(q) = self.degree {
            dims[q] = self.dimension as i128;
        }
        CohomologyProfile::exact(dims)
    }
}

type FactorKey = (Vec<usize>, IntVector);
type BottEntry = Option<(usize, u128, IntVector)>;

thread_local! {
    static BOTT_CACHE: RefCell<HashMap<FactorKey, BottEntry>> =
        RefCell::new(HashMap::new());
}

/// Bott's algorithm on one factor: returns degree, dimension and the module.
pub fn bott_factor(f: &FactorDescriptor, label: &[i64]) -> Option<(usize, u128, IntVector)> {
    let key = (f.block_sizes(), label.to_vec());
    if let Some(hit) = BOTT_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let n = label.len();
    let mu: Vec<i64> = label
        .iter()
        .enumerate()
        .map(|(i, &x)| x + (n - 1 - i) as i64)
        .collect();
    let mut sorted = mu.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let result = if sorted.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        let mut inversions = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if mu[i] < mu[j] {
                    inversions += 1;
                }
            }
        }
        let hw: Vec<i64> = sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| x - (n - 1 - i) as i64)
            .collect();
        let dim = weyl_dim_u128(&hw);
        Some((inversions, dim, hw))
    };
    BOTT_CACHE.with(|c| c.borrow_mut().insert(key, result.clone()));
    result
}

/// Bott's algorithm on a product space, combining factors by Kunneth.
pub fn bott(space: &SpaceDescriptor, label: &[i64]) -> Result<BottResult, SpaceError> {
    space.require_unweighted()?;
    space.check_label(label)?;
    let mut degree = 0;
    let mut dimension: u128 = 1;
    let mut module = Vec::with_capacity(space.factors.len());
    for (f, part) in space.factors.iter().zip(space.split_label(label)) {
        match bott_factor(f, part) {
            None => {
                return Ok(BottResult {
                    degree: None,
                    dimension: 0,
                    module: Vec::new(),
                })
            }
            Some((q, d, hw)) => {
                degree += q;
                dimension = dimension.checked_mul(d).ok_or(SpaceError::Overflow)?;
                module.push(hw);
            }
        }
    }
    Ok(BottResult {
        degree: Some(degree),
        dimension,
        module,
    })
}

/// Euler characteristic of an irreducible bundle.
pub fn euler_char(space: &SpaceDescriptor, label: &[i64]) -> Result<i128, SpaceError> {
    let r = bott(space, label)?;
    Ok(match r.degree {
        None => 0,
        Some(q) => {
            let d = i128::try_from(r.dimension).map_err(|_| SpaceError::Overflow)?;
            if q % 2 == 0 {
                d
            } else {
                -d
            }
        }
    })
}

/// Blockwise negate-and-reverse: the label of the dual bundle.
pub fn dual_label(space: &SpaceDescriptor, label: &[i64]) -> IntVector {
    let mut out = Vec::with_capacity(label.len());
    for (f, part) in space.factors.iter().zip(space.split_label(label)) {
        let mut start = 0;
        for b in f.block_sizes() {
            out.extend(part[start..start + b].iter().rev().map(|x| -x));
            start += b;
        }
    }
    space.canonical_label(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gr(k: usize, n: usize) -> SpaceDescriptor {
        SpaceDescriptor::new(vec![FactorDescriptor::Grassmannian(k, n)]).unwrap()
    }

    #[test]
    fn plucker_sections() {
        let r = bott(&gr(2, 4), &[0, 0, -1, -1]).unwrap();
        assert_eq!((r.degree, r.dimension), (Some(0), 6));
    }

    #[test]
    fn canonical_bundle_of_gr24() {
        let s = gr(2, 4);
        let r = bott(&s, &[-4, -4, 0, 0]).unwrap();
        assert_eq!((r.degree, r.dimension), (Some(4), 1));
        assert_eq!(
            s.canonical_label(&s.canonical_bundle_label()),
            vec![-4, -4, 0, 0]
        );
        assert_eq!(euler_char(&s, &[-4, -4, 0, 0]).unwrap(), 1);
    }

    #[test]
    fn flag_sections() {
        let s = SpaceDescriptor::new(vec![FactorDescriptor::Flag(vec![1, 2], 5)]).unwrap();
        let label = s.line_bundle_label(&[1, 2]);
        assert_eq!(s.canonical_label(&label), vec![3, 3, 3, 1, 0]);
        let r = bott(&s, &[0, 0, 0, -2, -3]).unwrap();
        assert_eq!((r.degree, r.dimension), (Some(0), 175));
        assert_eq!(factor_anticanonical(&s.factors[0]), vec![2, 4]);
    }

    #[test]
    fn projective_line_bundles() {
        let s = SpaceDescriptor::new(vec![FactorDescriptor::Projective(3)]).unwrap();
        assert_eq!(euler_char(&s, &s.line_bundle_label(&[4])).unwrap(), 35);
        for d in -6..6 {
            let r = bott(&s, &s.line_bundle_label(&[d])).unwrap();
            match r.degree {
                Some(0) => assert!(d >= 0),
                Some(3) => assert!(d <= -4),
                None => assert!((-3..0).contains(&d)),
                Some(_) => panic!("unexpected degree"),
            }
        }
    }

    #[test]
    fn gr25_o2() {
        let s = gr(2, 5);
        assert_eq!(euler_char(&s, &s.line_bundle_label(&[2])).unwrap(), 50);
    }

    #[test]
    fn dimensions_and_blocks() {
        let f = FactorDescriptor::Flag(vec![1, 3], 5);
        assert_eq!(f.block_sizes(), vec![2, 2, 1]);
        assert_eq!(f.dim(), 2 * 2 + 2 + 2);
        assert_eq!(FactorDescriptor::Projective(4).block_sizes(), vec![4, 1]);
        assert_eq!(FactorDescriptor::Grassmannian(3, 7).dim(), 12);
        assert_eq!(
            factor_anticanonical(&FactorDescriptor::Grassmannian(2, 5)),
            vec![5]
        );
    }
}
