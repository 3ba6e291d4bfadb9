//! Intersection numbers by torus fixed-point localization.
//!
//! A fixed point of a flag factor is an ordered set partition of `{0..n}`
//! into blocks of the factor's block sizes; block `B` of a label then has
//! torus weights `t_j` for `j` in the subset attached to `B`. The tangent
//! space at the point has weights `t_i - t_j` for `i` in a block on the
//! quotient side of the block containing `j`. Every integral is evaluated
//! for two independent parameter choices in exact arithmetic, and both
//! integrality and agreement are checked.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::bundlecalc::{BundleError, BundleExpr, Calc, DecomposedBundle};
use crate::bwb::SpaceDescriptor;
use crate::combinat::IntVector;

/// Errors raised by localization.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChowError {
    #[error("localization sum {0} is not an integer")]
    NonIntegral(String),
    #[error("localization sum depends on the torus parameters ({0} versus {1})")]
    ParameterDependence(String, String),
    #[error("zero locus has negative dimension")]
    Codimension,
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// Torus parameters, one list of distinct integers per factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalizationParams {
    pub per_factor: Vec<Vec<i64>>,
}

impl LocalizationParams {
    /// `t_i` is the `i`-th prime.
    pub fn primes(space: &SpaceDescriptor) -> Self {
        let mut primes = Vec::new();
        let mut c = 2i64;
        let need = space
            .factors
            .iter()
            .map(|f| f.ambient_rank())
            .max()
            .unwrap_or(0);
        while primes.len() < need {
            if (2..c).take_while(|d| d * d <= c).all(|d| c % d != 0) {
                primes.push(c);
            }
            c += 1;
        }
        LocalizationParams {
            per_factor: space
                .factors
                .iter()
                .map(|f| primes[..f.ambient_rank()].to_vec())
                .collect(),
        }
    }

    /// `t_i = i^2 + 1`.
    pub fn squares(space: &SpaceDescriptor) -> Self {
        LocalizationParams {
            per_factor: space
                .factors
                .iter()
                .map(|f| (1..=f.ambient_rank() as i64).map(|i| i * i + 1).collect())
                .collect(),
        }
    }
}

/// A torus fixed point: for each factor, the ambient indices listed block
/// by block (quotient side first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedPoint {
    pub per_factor: Vec<Vec<usize>>,
}

/// All fixed points of a space.
pub fn fixed_points(space: &SpaceDescriptor) -> Vec<FixedPoint> {
    let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for f in &space.factors {
        let pts = factor_points(&f.block_sizes());
        let mut next = Vec::with_capacity(acc.len() * pts.len());
        for a in &acc {
            for p in &pts {
                let mut v = a.clone();
                v.push(p.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|per_factor| FixedPoint { per_factor })
        .collect()
}

fn factor_points(blocks: &[usize]) -> Vec<Vec<usize>> {
    fn rec(blocks: &[usize], avail: Vec<usize>, cur: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if blocks.is_empty() {
            out.push(cur);
            return;
        }
        let b = blocks[0];
        for subset in combinations(&avail, b) {
            let rest: Vec<usize> = avail
                .iter()
                .copied()
                .filter(|x| !subset.contains(x))
                .collect();
            let mut next = cur.clone();
            next.extend(&subset);
            rec(&blocks[1..], rest, next, out);
        }
    }
    let n: usize = blocks.iter().sum();
    let mut out = Vec::new();
    rec(blocks, (0..n).collect(), Vec::new(), &mut out);
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..=items.len() - k {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, items[i]);
            out.push(rest);
        }
    }
    out
}

/// Evaluation context at one fixed point for one parameter choice.
pub struct PointEval<'a> {
    t: Vec<i64>,
    tangent: &'a [(usize, usize)],
}

impl PointEval<'_> {
    /// Value of a torus weight (a concatenated label-length vector).
    pub fn weight(&self, w: &[i64]) -> BigInt {
        let mut s: i128 = 0;
        for (x, t) in w.iter().zip(&self.t) {
            s += (*x as i128) * (*t as i128);
        }
        BigInt::from(s)
    }

    /// Tangent weights at the point.
    pub fn tangent_weights(&self) -> Vec<BigInt> {
        self.tangent
            .iter()
            .map(|&(i, j)| BigInt::from(self.t[i] - self.t[j]))
            .collect()
    }

    /// Sum of the listed weights with multiplicity: an equivariant `c_1`.
    pub fn c1(&self, weights: &[(IntVector, u64)]) -> BigInt {
        weights
            .iter()
            .map(|(w, m)| self.weight(w) * BigInt::from(*m))
            .sum()
    }

    /// Product of the listed weights with multiplicity: an equivariant top Chern class.
    pub fn ctop(&self, weights: &[(IntVector, u64)]) -> BigInt {
        let mut p = BigInt::one();
        for (w, m) in weights {
            let v = self.weight(w);
            for _ in 0..*m {
                p *= &v;
            }
        }
        p
    }
}

/// Fixed points, parameters and tangent data of a space.
pub struct Localizer<'a> {
    pub space: &'a SpaceDescriptor,
    points: Vec<FixedPoint>,
    params: [LocalizationParams; 2],
    tangent_pairs: Vec<(usize, usize)>,
    offsets: Vec<usize>,
}

impl<'a> Localizer<'a> {
    pub fn new(space: &'a SpaceDescriptor) -> Result<Self, ChowError> {
        Self::with_params(
            space,
            LocalizationParams::primes(space),
            LocalizationParams::squares(space),
        )
    }

    pub fn with_params(
        space: &'a SpaceDescriptor,
        a: LocalizationParams,
        b: LocalizationParams,
    ) -> Result<Self, ChowError> {
        space.require_unweighted().map_err(BundleError::from)?;
        let offsets = space.factor_offsets();
        // Tangent weights as pairs of positions in the concatenated label:
        // position i of the quotient-side block minus position j.
        let mut tangent_pairs = Vec::new();
        for (fi, f) in space.factors.iter().enumerate() {
            let blocks = f.block_sizes();
            let mut starts = Vec::new();
            let mut s = offsets[fi];
            for &b in &blocks {
                starts.push(s);
                s += b;
            }
            for a in 0..blocks.len() {
                for b in (a + 1)..blocks.len() {
                    for i in 0..blocks[a] {
                        for j in 0..blocks[b] {
                            tangent_pairs.push((starts[a] + i, starts[b] + j));
                        }
                    }
                }
            }
        }
        Ok(Localizer {
            space,
            points: fixed_points(space),
            params: [a, b],
            tangent_pairs,
            offsets,
        })
    }

    pub fn points(&self) -> &[FixedPoint] {
        &self.points
    }

    fn eval_at(&self, p: &FixedPoint, which: usize) -> PointEval<'_> {
        let mut t = vec![0i64; self.space.label_len()];
        for (fi, perm) in p.per_factor.iter().enumerate() {
            let params = &self.params[which].per_factor[fi];
            for (pos, &idx) in perm.iter().enumerate() {
                t[self.offsets[fi] + pos] = params[idx];
            }
        }
        PointEval {
            t,
            tangent: &self.tangent_pairs,
        }
    }

    fn sum_once<F>(&self, which: usize, f: &F) -> BigRational
    where
        F: Fn(&PointEval) -> BigRational + Sync,
    {
        self.points
            .par_iter()
            .map(|p| {
                let e = self.eval_at(p, which);
                let denom: BigInt = e.tangent_weights().iter().product();
                f(&e) / BigRational::from_integer(denom)
            })
            .reduce(BigRational::zero, |a, b| a + b)
    }

    /// Sums `f(p) / e(T_p)` over fixed points for both parameter choices
    /// and checks that the results are equal integers.
    pub fn localize<F>(&self, f: F) -> Result<BigInt, ChowError>
    where
        F: Fn(&PointEval) -> BigRational + Sync,
    {
        let a = self.sum_once(0, &f);
        let b = self.sum_once(1, &f);
        if a != b {
            return Err(ChowError::ParameterDependence(a.to_string(), b.to_string()));
        }
        if !a.is_integer() {
            return Err(ChowError::NonIntegral(a.to_string()));
        }
        Ok(a.to_integer())
    }

    /// Integrates a homogeneous polynomial of the given degree in
    /// equivariant Chern data. Integrals of the wrong degree vanish.
    pub fn integrate<F>(&self, degree: usize, f: F) -> Result<BigInt, ChowError>
    where
        F: Fn(&PointEval) -> BigInt + Sync,
    {
        if degree != self.space.dim() {
            return Ok(BigInt::zero());
        }
        self.localize(|e| BigRational::from_integer(f(e)))
    }
}

/// Weights of a bundle with multiplicity, across all graded pieces.
pub fn bundle_weights(calc: &Calc, b: &DecomposedBundle) -> Vec<(IntVector, u64)> {
    let mut out = Vec::new();
    for (_, l, m) in b.summands() {
        for (w, k) in calc.label_weights(l) {
            out.push((w, k * m));
        }
    }
    out
}

/// `(c_1(T_X) - c_1(F))^d * c_top(F)` integrated over the ambient space,
/// with `d = dim X - rank F`.
pub fn anticanonical_degree(space: &SpaceDescriptor, f: &BundleExpr) -> Result<BigInt, ChowError> {
    let calc = Calc::new(space)?;
    let fb = calc.normalize(f)?;
    let rank = calc.rank(&fb) as usize;
    let dim = space.dim();
    if rank > dim {
        return Err(ChowError::Codimension);
    }
    let d = dim - rank;
    let weights = bundle_weights(&calc, &fb);
    let loc = Localizer::new(space)?;
    loc.integrate(dim, |e| {
        let c1t: BigInt = e.tangent_weights().iter().sum();
        let k = c1t - e.c1(&weights);
        num_traits::pow(k, d) * e.ctop(&weights)
    })
}

/// Euler characteristic by holomorphic Lefschetz localization: the
/// coefficient of `eps^dim` in `ch(eps E) * prod Td(eps tau)` summed over
/// fixed points and divided by the tangent weights.
pub fn hrr_chi(space: &SpaceDescriptor, e: &DecomposedBundle) -> Result<BigInt, ChowError> {
    let calc = Calc::new(space)?;
    let weights = bundle_weights(&calc, e);
    let dim = space.dim();
    let td = todd_coefficients(dim);
    let inv_fact: Vec<BigRational> = (0..=dim)
        .map(|k| BigRational::new(BigInt::one(), factorial(k)))
        .collect();
    let loc = Localizer::new(space)?;
    loc.localize(|p| {
        // Power sums sum_w m_w w^k stay integral; the factorials come last.
        let mut power_sums = vec![BigInt::zero(); dim + 1];
        for (w, m) in &weights {
            let v = p.weight(w);
            let mut pow = BigInt::from(*m);
            for slot in power_sums.iter_mut() {
                *slot += &pow;
                pow *= &v;
            }
        }
        let mut series: Vec<BigRational> = power_sums
            .into_iter()
            .zip(&inv_fact)
            .map(|(s, f)| BigRational::from_integer(s) * f)
            .collect();
        for tau in p.tangent_weights() {
            let tau = BigRational::from_integer(tau);
            let mut factor = Vec::with_capacity(dim + 1);
            let mut pow = BigRational::one();
            for c in td.iter() {
                factor.push(c * &pow);
                pow *= &tau;
            }
            series = truncated_product(&series, &factor);
        }
        series[dim].clone()
    })
}

fn truncated_product(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len();
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Coefficients of `x / (1 - e^{-x})` up to `x^n`.
pub fn todd_coefficients(n: usize) -> Vec<BigRational> {
    // Bernoulli numbers with B_1 = +1/2 via sum_{j<=m} C(m+1, j) B_j = m + 1.
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut s = BigRational::from_integer(BigInt::from(m as i64 + 1));
        for (j, bj) in b.iter().enumerate() {
            s -= BigRational::from_integer(binom(m + 1, j)) * bj;
        }
        b.push(s / BigRational::from_integer(BigInt::from(m as i64 + 1)));
    }
    b.into_iter()
        .enumerate()
        .map(|(k, bk)| bk / BigRational::from_integer(factorial(k)))
        .collect()
}

fn binom(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bwb::FactorDescriptor;
    use crate::combinat::{lr_multiply, Partition};

    fn space(f: Vec<FactorDescriptor>) -> SpaceDescriptor {
        SpaceDescriptor::new(f).unwrap()
    }

    fn sigma1_power(s: &SpaceDescriptor, k: usize) -> BigInt {
        let calc = Calc::new(s).unwrap();
        let o1 = bundle_weights(&calc, &calc.line(&[1]).unwrap());
        Localizer::new(s)
            .unwrap()
            .integrate(k, |e| num_traits::pow(e.c1(&o1), k))
            .unwrap()
    }

    /// Coefficient of the full box in `s_1^k`, by iterated Pieri.
    fn pieri_degree(k: usize, n: usize) -> u64 {
        let mut cur: std::collections::BTreeMap<Partition, u64> = std::collections::BTreeMap::new();
        cur.insert(Partition::default(), 1);
        for _ in 0..k * (n - k) {
            let mut next = std::collections::BTreeMap::new();
            for (p, c) in &cur {
                for (q, d) in lr_multiply(p, &Partition::row(1)) {
                    if q.len() <= k && q.parts().first().copied().unwrap_or(0) as usize <= n - k {
                        *next.entry(q).or_insert(0) += c * d;
                    }
                }
            }
            cur = next;
        }
        cur.values().sum()
    }

    #[test]
    fn point_class_of_p3() {
        let s = space(vec![FactorDescriptor::Projective(3)]);
        assert_eq!(sigma1_power(&s, 3), BigInt::from(1));
    }

    #[test]
    fn grassmannian_degrees() {
        let s = space(vec![FactorDescriptor::Grassmannian(2, 4)]);
        assert_eq!(sigma1_power(&s, 4), BigInt::from(pieri_degree(2, 4)));
        assert_eq!(sigma1_power(&s, 4), BigInt::from(2));
        let s = space(vec![FactorDescriptor::Grassmannian(2, 5)]);
        assert_eq!(sigma1_power(&s, 6), BigInt::from(5));
        assert_eq!(pieri_degree(2, 5), 5);
    }

    #[test]
    fn wrong_degree_integrates_to_zero() {
        let s = space(vec![FactorDescriptor::Projective(3)]);
        let r = Localizer::new(&s)
            .unwrap()
            .integrate(2, |_| BigInt::from(7))
            .unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn anticanonical_examples() {
        let s = space(vec![FactorDescriptor::Projective(4)]);
        assert_eq!(
            anticanonical_degree(&s, &BundleExpr::Line(vec![1])).unwrap(),
            BigInt::from(64)
        );
        let s = space(vec![FactorDescriptor::Grassmannian(2, 5)]);
        let f = BundleExpr::Sum(vec![BundleExpr::Line(vec![1]); 4]);
        assert_eq!(anticanonical_degree(&s, &f).unwrap(), BigInt::from(5));
    }

    #[test]
    fn todd_series() {
        let td = todd_coefficients(4);
        assert_eq!(td[0], BigRational::one());
        assert_eq!(td[1], BigRational::new(1.into(), 2.into()));
        assert_eq!(td[2], BigRational::new(1.into(), 12.into()));
        assert!(td[3].is_zero());
        assert_eq!(td[4], BigRational::new((-1).into(), 720.into()));
    }

    #[test]
    fn hrr_examples() {
        let s = space(vec![FactorDescriptor::Projective(2)]);
        let c = Calc::new(&s).unwrap();
        assert_eq!(
            hrr_chi(&s, &c.line(&[2]).unwrap()).unwrap(),
            BigInt::from(6)
        );
        let s = space(vec![FactorDescriptor::Grassmannian(2, 4)]);
        let c = Calc::new(&s).unwrap();
        assert_eq!(
            hrr_chi(&s, &c.line(&[1]).unwrap()).unwrap(),
            BigInt::from(6)
        );
        assert_eq!(
            hrr_chi(&s, &c.line(&[-4]).unwrap()).unwrap(),
            BigInt::from(1)
        );
    }

    #[test]
    fn fixed_point_counts() {
        assert_eq!(
            fixed_points(&space(vec![FactorDescriptor::Grassmannian(2, 5)])).len(),
            10
        );
        assert_eq!(
            fixed_points(&space(vec![FactorDescriptor::Flag(vec![1, 2], 4)])).len(),
            12
        );
    }
}
