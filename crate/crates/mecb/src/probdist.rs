//! Finite-alphabet probability primitives.
//!
//! Everything downstream is built on two value types: [`Distribution`] (a
//! validated probability vector over symbols `0..n`) and [`Coupling`] (a
//! validated joint table over two alphabets). All information quantities are
//! measured in bits and wrapped in the [`Bits`] newtype.
//!
//! Conventions, applied uniformly:
//! - `0 * log 0 = 0`;
//! - sums must match 1 within [`SUM_TOLERANCE`]; nothing is renormalized
//!   silently (use [`Distribution::renormalized`] when you mean it);
//! - cells in `[-1e-12, 0)` are clamped to zero, anything below is an error.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for sum-to-one validation.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Negative values above this are treated as float noise and clamped to 0.
const NEG_CLAMP: f64 = -1e-12;

/// An information quantity in bits (base-2 logarithms throughout).
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl AddAssign for Bits {
    fn add_assign(&mut self, rhs: Bits) {
        self.0 += rhs.0;
    }
}

impl Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

/// `-sum p log2 p` over the positive entries of a raw slice.
pub(crate) fn entropy_bits(masses: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in masses {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

fn validate_masses(masses: &mut [f64], what: &str) -> Result<()> {
    for (i, p) in masses.iter_mut().enumerate() {
        if *p < NEG_CLAMP {
            return Err(Error::InvalidDistribution(format!(
                "{what} entry {i} is negative ({p})"
            )));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
        if !p.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "{what} entry {i} is not finite"
            )));
        }
    }
    let sum: f64 = masses.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {sum}, expected 1 within {SUM_TOLERANCE}"
        )));
    }
    Ok(())
}

/// A probability vector over the dense symbol alphabet `0..alphabet_size()`.
///
/// Serializes as `{"probs":[...]}`; deserialization re-validates, so any
/// distribution loaded from disk satisfies the invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct Distribution {
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        Distribution::new(raw.probs)
    }
}

impl Distribution {
    /// Validates and wraps a probability vector.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        validate_masses(&mut probs, "distribution")?;
        Ok(Self { probs })
    }

    /// Explicitly rescales nonnegative weights to sum to one.
    pub fn renormalized(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, cannot renormalize"
            )));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// Internal constructor for vectors that are valid by construction
    /// (marginals of a validated coupling, conditionals, ...).
    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        debug_assert!(probs.iter().all(|&p| p >= 0.0));
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs a nonempty alphabet");
        Self::new_unchecked(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, symbol: usize) -> Self {
        assert!(symbol < n, "point mass symbol out of range");
        let mut probs = vec![0.0; n];
        probs[symbol] = 1.0;
        Self::new_unchecked(probs)
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Shannon entropy `H(p) = -sum p log2 p`, in `[0, log2 n]`.
    pub fn entropy(&self) -> Bits {
        Bits(entropy_bits(&self.probs))
    }
}

/// Binary entropy `h(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<Bits> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "binary entropy needs p in [0,1], got {p}"
        )));
    }
    Ok(Bits(entropy_bits(&[p, 1.0 - p])))
}

/// Entropy decrease from merging two positive masses `p` and `q` of the same
/// distribution into a single mass `p + q`:
///
/// `delta_H(p, q) = p log2(1 + q/p) + q log2(1 + p/q)`
///
/// Equals `H(before) - H(after)` exactly, and `delta_H(p, 1-p) = h(p)`.
pub fn merge_entropy_drop(p: f64, q: f64) -> Result<Bits> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::Domain(format!(
            "merge_entropy_drop needs positive masses, got ({p}, {q})"
        )));
    }
    if p + q > 1.0 + SUM_TOLERANCE {
        return Err(Error::Domain(format!(
            "merged masses exceed total probability: {p} + {q} > 1"
        )));
    }
    Ok(Bits(p * (1.0 + q / p).log2() + q * (1.0 + p / q).log2()))
}

/// A joint probability table over `rows() x cols()` symbols.
///
/// Serializes as `{"table":[[...],...]}` with re-validation on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoupling")]
pub struct Coupling {
    table: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawCoupling {
    table: Vec<Vec<f64>>,
}

impl TryFrom<RawCoupling> for Coupling {
    type Error = Error;
    fn try_from(raw: RawCoupling) -> Result<Self> {
        Coupling::new(raw.table)
    }
}

impl Coupling {
    /// Validates and wraps a joint table.
    pub fn new(mut table: Vec<Vec<f64>>) -> Result<Self> {
        if table.is_empty() || table[0].is_empty() {
            return Err(Error::InvalidCoupling("empty table".into()));
        }
        let cols = table[0].len();
        let mut sum = 0.0;
        for (i, row) in table.iter_mut().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidCoupling(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            for (j, cell) in row.iter_mut().enumerate() {
                if *cell < NEG_CLAMP || !cell.is_finite() {
                    return Err(Error::InvalidCoupling(format!(
                        "cell ({i},{j}) is invalid ({cell})"
                    )));
                }
                if *cell < 0.0 {
                    *cell = 0.0;
                }
                sum += *cell;
            }
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidCoupling(format!(
                "cells sum to {sum}, expected 1 within {SUM_TOLERANCE}"
            )));
        }
        Ok(Self { table })
    }

    pub(crate) fn new_unchecked(table: Vec<Vec<f64>>) -> Self {
        Self { table }
    }

    /// Diagonal coupling of a distribution with itself (`Y = X`).
    pub fn diagonal(d: &Distribution) -> Self {
        let n = d.alphabet_size();
        let mut table = vec![vec![0.0; n]; n];
        for (i, &p) in d.probs().iter().enumerate() {
            table[i][i] = p;
        }
        Self::new_unchecked(table)
    }

    /// Independent coupling `p(x) q(y)`.
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let table = p
            .probs()
            .iter()
            .map(|&px| q.probs().iter().map(|&qy| px * qy).collect())
            .collect();
        Self::new_unchecked(table)
    }

    pub fn rows(&self) -> usize {
        self.table.len()
    }

    pub fn cols(&self) -> usize {
        self.table[0].len()
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.table[row][col]
    }

    /// Row sums and column sums, each a valid distribution.
    pub fn marginals(&self) -> (Distribution, Distribution) {
        let mut rows = vec![0.0; self.rows()];
        let mut cols = vec![0.0; self.cols()];
        for (i, row) in self.table.iter().enumerate() {
            for (j, &cell) in row.iter().enumerate() {
                rows[i] += cell;
                cols[j] += cell;
            }
        }
        (
            Distribution::new_unchecked(rows),
            Distribution::new_unchecked(cols),
        )
    }

    pub fn row_marginal(&self) -> Distribution {
        self.marginals().0
    }

    pub fn col_marginal(&self) -> Distribution {
        self.marginals().1
    }

    /// Joint entropy `H(X,Y) = -sum cells log2 cells`.
    pub fn joint_entropy(&self) -> Bits {
        let mut h = 0.0;
        for row in &self.table {
            h += entropy_bits(row);
        }
        Bits(h)
    }

    /// Mutual information `I(X;Y) = H(X) + H(Y) - H(X,Y)`, clamped to zero
    /// when float noise leaves it within `1e-12` of it.
    pub fn mutual_information(&self) -> Bits {
        let (rows, cols) = self.marginals();
        let mi = rows.entropy().0 + cols.entropy().0 - self.joint_entropy().0;
        if mi.abs() < 1e-12 {
            Bits(0.0)
        } else {
            Bits(mi)
        }
    }

    /// Conditional distribution of the row symbol given column `col`.
    pub fn conditional_col(&self, col: usize) -> Result<Distribution> {
        if col >= self.cols() {
            return Err(Error::Domain(format!("column {col} out of range")));
        }
        let mass: f64 = self.table.iter().map(|row| row[col]).sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMassColumn(col));
        }
        Ok(Distribution::new_unchecked(
            self.table.iter().map(|row| row[col] / mass).collect(),
        ))
    }

    /// Conditional distribution of the column symbol given row `row`.
    pub fn conditional_row(&self, row: usize) -> Result<Distribution> {
        if row >= self.rows() {
            return Err(Error::Domain(format!("row {row} out of range")));
        }
        let mass: f64 = self.table[row].iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMassColumn(row));
        }
        Ok(Distribution::new_unchecked(
            self.table[row].iter().map(|cell| cell / mass).collect(),
        ))
    }

    pub fn transposed(&self) -> Coupling {
        let mut table = vec![vec![0.0; self.rows()]; self.cols()];
        for (i, row) in self.table.iter().enumerate() {
            for (j, &cell) in row.iter().enumerate() {
                table[j][i] = cell;
            }
        }
        Coupling::new_unchecked(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H_4321: f64 = 1.8464393446710154; // H([.4 .3 .2 .1])
    const H_73: f64 = 0.8812908992306927; // H([.7 .3]) = h(0.3)

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(dist(&[0.5, 0.5]).entropy().0, 1.0);
        assert_eq!(dist(&[1.0]).entropy().0, 0.0);
        assert!((dist(&[0.4, 0.3, 0.2, 0.1]).entropy().0 - H_4321).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_invalid() {
        assert!(Distribution::new(vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![1.2, -0.2]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        // tiny negative noise is clamped, not rejected
        let d = Distribution::new(vec![1.0 + 1e-13, -1e-13]).unwrap();
        assert_eq!(d.get(1), 0.0);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap().0, 1.0);
        assert_eq!(binary_entropy(0.0).unwrap().0, 0.0);
        assert!((binary_entropy(0.3).unwrap().0 - H_73).abs() < 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn merge_drop_examples() {
        assert_eq!(merge_entropy_drop(0.5, 0.5).unwrap().0, 1.0);
        assert!((merge_entropy_drop(0.4, 0.3).unwrap().0 - 0.6896596952239761).abs() < 1e-12);
        assert!(merge_entropy_drop(0.0, 0.5).is_err());
        assert!(merge_entropy_drop(0.8, 0.3).is_err());
    }

    #[test]
    fn merge_drop_is_exact_entropy_difference() {
        // H(d) - H(merged d) must equal merge_entropy_drop to 1e-12.
        let d = [0.37, 0.22, 0.21, 0.2];
        let merged = [0.37 + 0.21, 0.22, 0.2];
        let drop = entropy_bits(&d) - entropy_bits(&merged);
        let formula = merge_entropy_drop(0.37, 0.21).unwrap().0;
        assert!((drop - formula).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let u2 = Distribution::uniform(2);
        assert_eq!(Coupling::product(&u2, &u2).mutual_information().0, 0.0);

        let d = dist(&[0.7, 0.2, 0.1]);
        let diag = Coupling::diagonal(&d);
        assert!((diag.mutual_information().0 - 1.1567796494470395).abs() < 1e-12);

        let c = Coupling::new(vec![vec![0.6, 0.0], vec![0.1, 0.3]]).unwrap();
        assert!((c.joint_entropy().0 - 1.295461844238322).abs() < 1e-12);
        assert!((c.mutual_information().0 - 0.5567796494470394).abs() < 1e-12);
    }

    #[test]
    fn marginal_examples() {
        let c = Coupling::new(vec![vec![0.6, 0.0], vec![0.1, 0.3]]).unwrap();
        let (rows, cols) = c.marginals();
        assert_eq!(rows.probs(), &[0.6, 0.4]);
        assert_eq!(cols.probs(), &[0.7, 0.3]);

        let d = dist(&[0.7, 0.2, 0.1]);
        let (r, c2) = Coupling::diagonal(&d).marginals();
        assert_eq!(r, d);
        assert_eq!(c2, d);

        let p = dist(&[0.25, 0.75]);
        let q = dist(&[0.5, 0.3, 0.2]);
        let (r, c3) = Coupling::product(&p, &q).marginals();
        for (a, b) in r.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in c3.probs().iter().zip(q.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_examples() {
        let c = Coupling::new(vec![vec![0.6, 0.0], vec![0.1, 0.3]]).unwrap();
        let given0 = c.conditional_col(0).unwrap();
        assert!((given0.get(0) - 6.0 / 7.0).abs() < 1e-12);
        assert!((given0.get(1) - 1.0 / 7.0).abs() < 1e-12);

        let diag = Coupling::diagonal(&dist(&[0.7, 0.2, 0.1]));
        for j in 0..3 {
            let cond = diag.conditional_col(j).unwrap();
            assert_eq!(cond.get(j), 1.0);
        }

        let flat = Coupling::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert_eq!(flat.conditional_col(1).unwrap().probs(), &[0.5, 0.5]);

        // conditioning on a zero-mass column is the caller's problem
        let degenerate = Coupling::new(vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            degenerate.conditional_col(1),
            Err(Error::ZeroMassColumn(1))
        ));
    }

    #[test]
    fn serde_round_trip_is_lossless() {
        let d = dist(&[0.4, 0.3, 0.2, 0.1]);
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with("{\"probs\":["));
        let back: Distribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);

        let c = Coupling::new(vec![vec![0.6, 0.0], vec![0.1, 0.3]]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: Coupling = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);

        // invalid payloads are rejected on load
        assert!(serde_json::from_str::<Distribution>("{\"probs\":[0.5,0.4]}").is_err());
        assert!(serde_json::from_str::<Coupling>("{\"table\":[[0.5],[0.4]]}").is_err());
    }

    fn arb_dist(max_n: usize) -> impl Strategy<Value = Distribution> {
        prop::collection::vec(1e-4..1.0f64, 1..=max_n)
            .prop_map(|w| Distribution::renormalized(&w).unwrap())
    }

    proptest! {
        #[test]
        fn entropy_bounded_by_log_n(d in arb_dist(16)) {
            let h = d.entropy().0;
            let cap = (d.alphabet_size() as f64).log2();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= cap + 1e-9);
            // the cap is attained exactly by the uniform distribution
            let u = Distribution::uniform(d.alphabet_size());
            prop_assert!((u.entropy().0 - cap).abs() < 1e-9);
        }

        #[test]
        fn entropy_is_permutation_invariant(d in arb_dist(12), seed in any::<u64>()) {
            let mut probs = d.probs().to_vec();
            let n = probs.len();
            // cheap deterministic shuffle
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                probs.swap(i, (state >> 33) as usize % (i + 1));
            }
            let shuffled = Distribution::new_unchecked(probs);
            prop_assert!((shuffled.entropy().0 - d.entropy().0).abs() < 1e-9);
        }

        #[test]
        fn uniform_maximizes_entropy(d in arb_dist(16)) {
            let n = d.alphabet_size();
            let u = Distribution::uniform(n);
            prop_assert!(d.entropy().0 <= u.entropy().0 + 1e-9);
        }

        #[test]
        fn merge_drop_monotone(p in 1e-4..0.5f64, q in 1e-4..0.4f64, bump in 1e-4..0.1f64) {
            let lo = merge_entropy_drop(p, q).unwrap().0;
            let hi = merge_entropy_drop(p, q + bump).unwrap().0;
            prop_assert!(hi >= lo - 1e-12);
        }

        #[test]
        fn merge_drop_midpoint_concave(
            a in 1e-3..0.5f64, b in 1e-3..0.5f64,
            c in 1e-3..0.5f64, d in 1e-3..0.5f64,
        ) {
            let mid = merge_entropy_drop((a + c) / 2.0, (b + d) / 2.0).unwrap().0;
            let avg = (merge_entropy_drop(a, b).unwrap().0 + merge_entropy_drop(c, d).unwrap().0) / 2.0;
            prop_assert!(mid >= avg - 1e-9);
        }

        #[test]
        fn merge_consistency(d in arb_dist(12)) {
            prop_assume!(d.alphabet_size() >= 2);
            let p = d.get(0);
            let q = d.get(1);
            let mut merged = d.probs().to_vec();
            merged[0] = p + q;
            merged.remove(1);
            let drop = d.entropy().0 - entropy_bits(&merged);
            let formula = merge_entropy_drop(p, q).unwrap().0;
            prop_assert!((drop - formula).abs() < 1e-12);
        }

        #[test]
        fn mutual_information_bounds(p in arb_dist(8), q in arb_dist(8), w in 0.0..1.0f64) {
            // blend an independent table toward a max-seeking-ish diagonal mass
            let mut table: Vec<Vec<f64>> = Coupling::product(&p, &q).table().to_vec();
            let k = p.alphabet_size().min(q.alphabet_size());
            for (i, row) in table.iter_mut().enumerate().take(k) {
                row[i] += w * 0.5 / k as f64;
            }
            let total: f64 = table.iter().flatten().sum();
            for row in &mut table {
                for cell in row {
                    *cell /= total;
                }
            }
            let c = Coupling::new(table).unwrap();
            let mi = c.mutual_information().0;
            let (r, col) = c.marginals();
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= r.entropy().0.min(col.entropy().0) + 1e-9);
        }
    }
}
