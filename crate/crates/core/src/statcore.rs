//! The largest off-diagonal entry of the sample tensor.
//!
//! For an `n × p` matrix and order `m`, every strictly increasing tuple
//! `i_1 < … < i_m` has entry `Σ_k x[k,i_1]·…·x[k,i_m] / √n`. [`max_entry`]
//! returns the largest absolute entry (`w_abs`) and the largest signed entry
//! (`w_signed`) with their tuples.
//!
//! The fast path walks tuples depth-first, keeping for every depth the
//! length-`n` vector of partial products of the prefix, so a prefix shared by
//! many tuples is multiplied once. Per-tuple arithmetic is the same as in
//! [`max_entry_bruteforce`]: factors multiplied left to right, then summed
//! over `k` in ascending order, then divided by `√n`. Both paths therefore
//! agree bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Default ceiling on the estimated work of one enumeration.
pub const DEFAULT_COST_CEILING: u64 = 10_000_000_000;

/// Largest `C(p, m) · n` the brute-force oracle accepts.
pub const BRUTEFORCE_CEILING: u64 = 10_000_000;

/// A strictly increasing tuple of 1-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TupleIndex(Vec<usize>);

impl TupleIndex {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices[0] == 0 {
            return Err(Error::Dimension(format!("tuple {indices:?} must be 1-based and non-empty")));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Dimension(format!("tuple {indices:?} is not strictly increasing")));
        }
        Ok(Self(indices))
    }

    /// Builds a tuple from 0-based indices that the caller knows are increasing.
    fn from_zero_based(indices: &[usize]) -> Self {
        Self(indices.iter().map(|i| i + 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn within(&self, p: usize) -> bool {
        self.0.last().is_some_and(|&last| last <= p)
    }
}

impl TryFrom<Vec<usize>> for TupleIndex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TupleIndex> for Vec<usize> {
    fn from(t: TupleIndex) -> Self {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub w_abs: f64,
    pub w_signed: f64,
    pub argmax_abs: TupleIndex,
    pub argmax_signed: TupleIndex,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub tuple_count: u64,
}

/// `m` samples with identical shape; factor `s` of every product is taken from matrix `s`.
#[derive(Debug, Clone)]
pub struct MultiSampleInput {
    matrices: Vec<DataMatrix>,
}

impl MultiSampleInput {
    pub fn new(matrices: Vec<DataMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Dimension("at least one matrix is required".into()))?;
        let (n, p) = (first.n(), first.p());
        for (s, x) in matrices.iter().enumerate().skip(1) {
            if (x.n(), x.p()) != (n, p) {
                return Err(Error::Dimension(format!(
                    "matrix {} is {}x{}, expected {n}x{p}",
                    s + 1,
                    x.n(),
                    x.p()
                )));
            }
        }
        Ok(Self { matrices })
    }

    pub fn matrices(&self) -> &[DataMatrix] {
        &self.matrices
    }

    pub fn m(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].n()
    }

    pub fn p(&self) -> usize {
        self.matrices[0].p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostEstimate {
    /// `C(p, m)`.
    pub tuples: u64,
    /// `n · Σ_{s=1..m} C(p, s)` for the prefix-sharing enumeration.
    pub multiply_adds: u64,
    /// Set when either count overflowed and was clamped to `u64::MAX`.
    pub saturated: bool,
}

fn binomial(p: u64, k: u64) -> Option<u128> {
    if k > p {
        return Some(0);
    }
    let k = k.min(p - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // exact: acc * (p - j) is divisible by (j + 1)
        acc = acc.checked_mul(u128::from(p - j))? / u128::from(j + 1);
    }
    Some(acc)
}

/// `C(p, m)`, or `None` when it does not fit in a `u64`.
pub fn tuple_count(p: usize, m: usize) -> Option<u64> {
    binomial(p as u64, m as u64).and_then(|c| u64::try_from(c).ok())
}

pub fn enumeration_cost(p: usize, m: usize, n: usize) -> CostEstimate {
    let tuples = tuple_count(p, m);
    let multiply_adds = (1..=m as u64)
        .try_fold(0u128, |acc, s| acc.checked_add(binomial(p as u64, s)?))
        .and_then(|sum| sum.checked_mul(n as u128))
        .and_then(|v| u64::try_from(v).ok());
    CostEstimate {
        tuples: tuples.unwrap_or(u64::MAX),
        multiply_adds: multiply_adds.unwrap_or(u64::MAX),
        saturated: tuples.is_none() || multiply_adds.is_none(),
    }
}

/// Knobs for [`max_entry_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub cost_ceiling: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            cost_ceiling: DEFAULT_COST_CEILING,
        }
    }
}

fn check_order(m: usize, p: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Dimension(format!("order m must be at least 2, got {m}")));
    }
    if m > p {
        return Err(Error::Dimension(format!("order m = {m} exceeds dimension p = {p}")));
    }
    Ok(())
}

/// Running maxima for a contiguous, lexicographically ordered block of tuples.
///
/// Updates only on strict improvement, so within a block the first
/// (lexicographically smallest) maximizer wins.
#[derive(Debug, Clone)]
struct Best {
    abs: f64,
    abs_at: Vec<usize>,
    signed: f64,
    signed_at: Vec<usize>,
}

impl Best {
    fn empty() -> Self {
        Self {
            abs: f64::NEG_INFINITY,
            abs_at: Vec::new(),
            signed: f64::NEG_INFINITY,
            signed_at: Vec::new(),
        }
    }

    #[inline]
    fn offer(&mut self, value: f64, prefix: &[usize], last: usize) {
        if value.abs() > self.abs {
            self.abs = value.abs();
            self.abs_at.clear();
            self.abs_at.extend_from_slice(prefix);
            self.abs_at.push(last);
        }
        if value > self.signed {
            self.signed = value;
            self.signed_at.clear();
            self.signed_at.extend_from_slice(prefix);
            self.signed_at.push(last);
        }
    }

    /// Merges a block that comes later in lexicographic order.
    fn merge_later(mut self, later: Best) -> Best {
        if later.abs > self.abs {
            self.abs = later.abs;
            self.abs_at = later.abs_at;
        }
        if later.signed > self.signed {
            self.signed = later.signed;
            self.signed_at = later.signed_at;
        }
        self
    }
}

/// Column lookup by depth: depth `s` reads its factor from `matrices[s]`
/// (or from the single matrix for the one-sample statistic).
struct Factors<'a> {
    matrices: &'a [DataMatrix],
}

impl<'a> Factors<'a> {
    #[inline]
    fn column(&self, depth: usize, i: usize) -> &'a [f64] {
        let x = if self.matrices.len() == 1 {
            &self.matrices[0]
        } else {
            &self.matrices[depth]
        };
        x.column(i)
    }
}

struct Walker<'a> {
    factors: Factors<'a>,
    n: usize,
    p: usize,
    m: usize,
    scale: f64,
    /// `partial[s]` holds the products of the first `s + 1` factors.
    partial: Vec<Vec<f64>>,
    prefix: Vec<usize>,
    best: Best,
}

impl<'a> Walker<'a> {
    fn new(factors: Factors<'a>, n: usize, p: usize, m: usize) -> Self {
        Self {
            factors,
            n,
            p,
            m,
            scale: (n as f64).sqrt(),
            partial: vec![vec![0.0; n]; m - 1],
            prefix: Vec::with_capacity(m),
            best: Best::empty(),
        }
    }

    /// Enumerates every tuple whose first index is `first`.
    fn run_first(&mut self, first: usize) {
        self.prefix.clear();
        self.prefix.push(first);
        self.partial[0].copy_from_slice(self.factors.column(0, first));
        self.descend(1, first + 1);
    }

    /// Chooses the index at `depth` from `start..`, given partial products in
    /// `partial[depth - 1]`.
    fn descend(&mut self, depth: usize, start: usize) {
        let remaining_after = self.m - depth - 1;
        let stop = self.p - remaining_after;
        if depth == self.m - 1 {
            self.leaves(start, stop);
            return;
        }
        for i in start..stop {
            let col = self.factors.column(depth, i);
            let (done, rest) = self.partial.split_at_mut(depth);
            let prev = &done[depth - 1];
            for ((out, &a), &b) in rest[0].iter_mut().zip(prev).zip(col) {
                *out = a * b;
            }
            self.prefix.push(i);
            self.descend(depth + 1, i + 1);
            self.prefix.pop();
        }
    }

    /// Final depth: dot products of the prefix products with each candidate
    /// column, four columns at a time. Each sum keeps the ascending-`k` order.
    fn leaves(&mut self, start: usize, stop: usize) {
        let depth = self.m - 1;
        let prev = &self.partial[depth - 1];
        let mut i = start;
        while i + 4 <= stop {
            let c0 = self.factors.column(depth, i);
            let c1 = self.factors.column(depth, i + 1);
            let c2 = self.factors.column(depth, i + 2);
            let c3 = self.factors.column(depth, i + 3);
            let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for k in 0..self.n {
                let a = prev[k];
                s0 += a * c0[k];
                s1 += a * c1[k];
                s2 += a * c2[k];
                s3 += a * c3[k];
            }
            for (j, s) in [s0, s1, s2, s3].into_iter().enumerate() {
                self.best.offer(s / self.scale, &self.prefix, i + j);
            }
            i += 4;
        }
        while i < stop {
            let c = self.factors.column(depth, i);
            let mut s = 0.0f64;
            for k in 0..self.n {
                s += prev[k] * c[k];
            }
            self.best.offer(s / self.scale, &self.prefix, i);
            i += 1;
        }
    }
}

fn enumerate(factors_src: &[DataMatrix], n: usize, p: usize, m: usize) -> Best {
    let firsts: Vec<Best> = (0..=p - m)
        .into_par_iter()
        .map_init(
            || Walker::new(Factors { matrices: factors_src }, n, p, m),
            |w, first| {
                w.best = Best::empty();
                w.run_first(first);
                std::mem::replace(&mut w.best, Best::empty())
            },
        )
        .collect();
    firsts
        .into_iter()
        .reduce(Best::merge_later)
        .expect("p >= m guarantees at least one tuple")
}

fn finish(best: Best, n: usize, p: usize, m: usize) -> StatResult {
    StatResult {
        w_abs: best.abs,
        w_signed: best.signed,
        argmax_abs: TupleIndex::from_zero_based(&best.abs_at),
        argmax_signed: TupleIndex::from_zero_based(&best.signed_at),
        n,
        p,
        m,
        tuple_count: tuple_count(p, m).unwrap_or(u64::MAX),
    }
}

fn check_budget(p: usize, m: usize, n: usize, ceiling: u64) -> Result<()> {
    let cost = enumeration_cost(p, m, n);
    if cost.saturated || cost.multiply_adds > ceiling {
        return Err(Error::Budget {
            estimated: cost.multiply_adds,
            ceiling,
        });
    }
    Ok(())
}

/// `W_n` and `W̃_n` of `x` at order `m` under the default cost ceiling.
pub fn max_entry(x: &DataMatrix, m: usize) -> Result<StatResult> {
    max_entry_with(x, m, &EnumerationOptions::default())
}

pub fn max_entry_with(x: &DataMatrix, m: usize, opts: &EnumerationOptions) -> Result<StatResult> {
    let (n, p) = (x.n(), x.p());
    check_order(m, p)?;
    check_budget(p, m, n, opts.cost_ceiling)?;
    let best = enumerate(std::slice::from_ref(x), n, p, m);
    Ok(finish(best, n, p, m))
}

/// Multi-population statistic `W'_n`: factor `s` of each product comes from matrix `s`.
pub fn max_entry_multi(input: &MultiSampleInput) -> Result<StatResult> {
    max_entry_multi_with(input, &EnumerationOptions::default())
}

pub fn max_entry_multi_with(input: &MultiSampleInput, opts: &EnumerationOptions) -> Result<StatResult> {
    let (n, p, m) = (input.n(), input.p(), input.m());
    check_order(m, p)?;
    check_budget(p, m, n, opts.cost_ceiling)?;
    let best = enumerate(input.matrices(), n, p, m);
    Ok(finish(best, n, p, m))
}

/// Reference evaluation: every tuple recomputed from scratch, no shared work.
pub fn max_entry_bruteforce(x: &DataMatrix, m: usize) -> Result<StatResult> {
    let (n, p) = (x.n(), x.p());
    check_order(m, p)?;
    let tuples = tuple_count(p, m);
    let work = tuples.and_then(|t| t.checked_mul(n as u64));
    match work {
        Some(w) if w <= BRUTEFORCE_CEILING => {}
        _ => {
            return Err(Error::Budget {
                estimated: work.unwrap_or(u64::MAX),
                ceiling: BRUTEFORCE_CEILING,
            })
        }
    }
    let scale = (n as f64).sqrt();
    let mut best = Best::empty();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let mut sum = 0.0f64;
        for k in 0..n {
            let mut prod = x.get(k, idx[0]);
            for &i in &idx[1..] {
                prod *= x.get(k, i);
            }
            sum += prod;
        }
        best.offer(sum / scale, &idx[..m - 1], idx[m - 1]);
        if !next_combination(&mut idx, p) {
            break;
        }
    }
    Ok(finish(best, n, p, m))
}

/// Advances `idx` to the next increasing tuple in lexicographic order.
fn next_combination(idx: &mut [usize], p: usize) -> bool {
    let m = idx.len();
    let mut j = m;
    while j > 0 {
        j -= 1;
        if idx[j] < p - m + j {
            idx[j] += 1;
            for t in j + 1..m {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::populations::{sample_matrix, Family, PopulationSpec};
    use crate::rng::SeedSpec;
    use proptest::prelude::*;

    fn rows(r: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn t(v: &[usize]) -> TupleIndex {
        TupleIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_tuple() {
        let r = max_entry(&rows(&[&[1.0, 2.0]]), 2).unwrap();
        assert_eq!(r.w_abs, 2.0);
        assert_eq!(r.argmax_abs, t(&[1, 2]));
        assert_eq!(r.tuple_count, 1);
        assert_eq!(max_entry_bruteforce(&rows(&[&[1.0, 2.0]]), 2).unwrap().w_abs, 2.0);
    }

    #[test]
    fn three_pairs_by_hand() {
        let x = rows(&[&[1.0, -2.0, 3.0]]);
        for r in [max_entry(&x, 2).unwrap(), max_entry_bruteforce(&x, 2).unwrap()] {
            assert_eq!(r.w_abs, 6.0);
            assert_eq!(r.argmax_abs, t(&[2, 3]));
            assert_eq!(r.w_signed, 3.0);
            assert_eq!(r.argmax_signed, t(&[1, 3]));
            assert_eq!(r.tuple_count, 3);
        }
    }

    #[test]
    fn matches_oracle_at_order_three() {
        let x = sample_matrix(&PopulationSpec::standard_normal(), 15, 10, SeedSpec::new(11, 0)).unwrap();
        let fast = max_entry(&x, 3).unwrap();
        assert_eq!(fast, max_entry_bruteforce(&x, 3).unwrap());
        assert_eq!(fast.tuple_count, 120);
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        // every pair has the same entry
        let x = rows(&[&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]]);
        let r = max_entry(&x, 3).unwrap();
        assert_eq!(r.argmax_abs, t(&[1, 2, 3]));
        assert_eq!(r.argmax_signed, t(&[1, 2, 3]));
        // |−4| ties with |4|: the earlier tuple (1,2) wins for w_abs
        let x = rows(&[&[2.0, -2.0, -2.0]]);
        let r = max_entry(&x, 2).unwrap();
        assert_eq!((r.w_abs, r.argmax_abs.clone()), (4.0, t(&[1, 2])));
        assert_eq!((r.w_signed, r.argmax_signed.clone()), (4.0, t(&[2, 3])));
    }

    #[test]
    fn multi_sample_examples() {
        let one = MultiSampleInput::new(vec![rows(&[&[1.0, 2.0]]), rows(&[&[3.0, 4.0]])]).unwrap();
        let r = max_entry_multi(&one).unwrap();
        assert_eq!(r.w_abs, 4.0);

        let zero = MultiSampleInput::new(vec![rows(&[&[0.0, 0.0]]), rows(&[&[5.0, -7.0]])]).unwrap();
        assert_eq!(max_entry_multi(&zero).unwrap().w_abs, 0.0);

        let x = sample_matrix(&PopulationSpec::rademacher(), 12, 9, SeedSpec::new(4, 4)).unwrap();
        let same = MultiSampleInput::new(vec![x.clone(), x.clone(), x.clone()]).unwrap();
        assert_eq!(max_entry_multi(&same).unwrap(), max_entry(&x, 3).unwrap());

        let bad = MultiSampleInput::new(vec![rows(&[&[1.0, 2.0]]), rows(&[&[1.0, 2.0, 3.0]])]);
        assert!(matches!(bad, Err(Error::Dimension(_))));
    }

    #[test]
    fn cost_examples() {
        let c = enumeration_cost(100, 2, 500);
        assert_eq!((c.tuples, c.multiply_adds, c.saturated), (4950, 2_525_000, false));
        assert_eq!(enumeration_cost(7, 7, 13).tuples, 1);
        assert_eq!(enumeration_cost(30, 3, 1).tuples, 4060);
        let huge = enumeration_cost(1_000_000, 20, 1000);
        assert!(huge.saturated);
        assert_eq!(huge.tuples, u64::MAX);
    }

    #[test]
    fn order_and_budget_errors() {
        let x = rows(&[&[1.0, 2.0, 3.0]]);
        assert!(matches!(max_entry(&x, 1), Err(Error::Dimension(_))));
        assert!(matches!(max_entry(&x, 4), Err(Error::Dimension(_))));
        let opts = EnumerationOptions { cost_ceiling: 5 };
        match max_entry_with(&x, 2, &opts) {
            Err(Error::Budget { estimated, ceiling }) => assert_eq!((estimated, ceiling), (6, 5)),
            other => panic!("expected budget error, got {other:?}"),
        }
        let wide = sample_matrix(&PopulationSpec::standard_normal(), 100, 60, SeedSpec::new(1, 1)).unwrap();
        assert!(matches!(max_entry_bruteforce(&wide, 4), Err(Error::Budget { .. })));
    }

    #[test]
    fn tuple_index_validation() {
        assert!(TupleIndex::new(vec![1, 1]).is_err());
        assert!(TupleIndex::new(vec![0, 2]).is_err());
        assert!(TupleIndex::new(vec![3, 2]).is_err());
        assert!(t(&[2, 5]).within(5));
        assert!(!t(&[2, 5]).within(4));
    }

    #[test]
    fn all_positive_row_signed_equals_abs() {
        let x = rows(&[&[0.5, 2.0, 1.5, 3.0]]);
        let r = max_entry(&x, 2).unwrap();
        assert_eq!(r.w_signed, r.w_abs);
    }

    #[test]
    fn json_shape() {
        let r = max_entry(&rows(&[&[1.0, -2.0, 3.0]]), 2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["argmax_abs"], serde_json::json!([2, 3]));
        assert_eq!(v["tuple_count"], 3);
        let back: StatResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    fn family_strategy() -> impl Strategy<Value = PopulationSpec> {
        prop_oneof![
            Just(PopulationSpec::new(Family::StandardNormal)),
            Just(PopulationSpec::new(Family::Rademacher)),
            Just(PopulationSpec::new(Family::UniformScaled)),
            Just(PopulationSpec::new(Family::CenteredExponential)),
            Just(PopulationSpec::new(Family::StudentTStandardized { df: 4 })),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_equivariance(seed in any::<u64>(), n in 1usize..12, p in 4usize..10, m in 2usize..4, c in 0.25f64..4.0) {
            let x = sample_matrix(&PopulationSpec::standard_normal(), n, p, SeedSpec::new(seed, 0)).unwrap();
            // a power-of-two factor keeps every product exact, so the equality is exact
            let c = c.log2().round().exp2();
            let r = max_entry(&x, m).unwrap();
            let s = max_entry(&x.map(|v| v * c).unwrap(), m).unwrap();
            let cm = c.powi(m as i32);
            prop_assert_eq!(s.w_abs, r.w_abs * cm);
            prop_assert_eq!(s.w_signed, r.w_signed * cm);
            prop_assert_eq!(s.argmax_abs, r.argmax_abs);
            prop_assert_eq!(s.argmax_signed, r.argmax_signed);
        }

        #[test]
        fn column_permutation(seed in any::<u64>(), n in 1usize..10, p in 3usize..9, m in 2usize..4, spec in family_strategy()) {
            prop_assume!(m <= p);
            // small integers keep every product and sum exact, so reordering
            // factors cannot change any entry
            let x = sample_matrix(&spec, n, p, SeedSpec::new(seed, 1)).unwrap().map(|v| (4.0 * v).round()).unwrap();
            let perm: Vec<usize> = (0..p).rev().collect();
            let y = x.permute_columns(&perm).unwrap();
            let a = max_entry(&x, m).unwrap();
            let b = max_entry(&y, m).unwrap();
            prop_assert_eq!(a.w_abs, b.w_abs);
            // column j of y is column p-1-j of x
            let mapped: Vec<usize> = b.argmax_abs.indices().iter().rev().map(|&i| p + 1 - i).collect();
            prop_assert_eq!(tuple_value(&x, &mapped).abs(), a.w_abs);
        }

        #[test]
        fn sign_flip(seed in any::<u64>(), n in 1usize..10, p in 3usize..9, m in 2usize..5) {
            prop_assume!(m <= p);
            let x = sample_matrix(&PopulationSpec::standard_normal(), n, p, SeedSpec::new(seed, 2)).unwrap();
            let neg = x.map(|v| -v).unwrap();
            let a = max_entry(&x, m).unwrap();
            let b = max_entry(&neg, m).unwrap();
            prop_assert_eq!(a.w_abs, b.w_abs);
            prop_assert_eq!(&a.argmax_abs, &b.argmax_abs);
            if m % 2 == 0 {
                prop_assert_eq!(a.w_signed, b.w_signed);
            }
            prop_assert!(a.w_signed <= a.w_abs && a.w_signed >= -a.w_abs);
        }

        #[test]
        fn thread_count_does_not_matter(seed in any::<u64>(), threads in 1usize..6) {
            let x = sample_matrix(&PopulationSpec::standard_normal(), 9, 14, SeedSpec::new(seed, 3)).unwrap();
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let a = pool.install(|| max_entry(&x, 3)).unwrap();
            prop_assert_eq!(a, max_entry(&x, 3).unwrap());
        }
    }

    fn tuple_value(x: &DataMatrix, one_based: &[usize]) -> f64 {
        let mut sum = 0.0;
        for k in 0..x.n() {
            let mut prod = x.get(k, one_based[0] - 1);
            for &i in &one_based[1..] {
                prod *= x.get(k, i - 1);
            }
            sum += prod;
        }
        sum / (x.n() as f64).sqrt()
    }
}
