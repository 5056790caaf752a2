//! Greedy minimum entropy coupling: given two marginals, build a joint table
//! whose entropy is close to the (NP-hard) minimum.
//!
//! Both couplers repeatedly pick a residual entry from each marginal, assign
//! the smaller of the two masses to that cell and subtract it from both
//! sides. [`max_seeking`] always pairs the currently largest residuals;
//! [`zero_seeking`] pairs the residuals with the closest values, trying to
//! zero out both sides at once. Each assignment exhausts at least one
//! residual, so at most `|p| + |q| - 1` cells become nonzero.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::probdist::{Bits, Coupling, Distribution};
use crate::{Error, Result};

/// Residuals below this are zeroed so float dust cannot stall termination.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// Coupler selection for the pipeline/CLI layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplerMethod {
    MaxSeeking,
    ZeroSeeking,
}

impl FromStr for CouplerMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::MaxSeeking),
            "zero" => Ok(Self::ZeroSeeking),
            other => Err(Error::Domain(format!(
                "unknown coupler `{other}` (expected max|zero)"
            ))),
        }
    }
}

impl fmt::Display for CouplerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MaxSeeking => "max",
            Self::ZeroSeeking => "zero",
        })
    }
}

/// Runs the selected greedy coupler.
pub fn couple(p: &Distribution, q: &Distribution, method: CouplerMethod) -> Coupling {
    match method {
        CouplerMethod::MaxSeeking => max_seeking(p, q),
        CouplerMethod::ZeroSeeking => zero_seeking(p, q),
    }
}

fn floor_residual(x: &mut f64) {
    if *x < RESIDUAL_FLOOR {
        *x = 0.0;
    }
}

/// Pairs the largest residual of `p` with the largest residual of `q`
/// (ties: lowest index) until both sides are exhausted.
pub fn max_seeking(p: &Distribution, q: &Distribution) -> Coupling {
    let mut rp = p.probs().to_vec();
    let mut rq = q.probs().to_vec();
    let mut table = vec![vec![0.0; rq.len()]; rp.len()];
    while let (Some(x), Some(y)) = (argmax(&rp), argmax(&rq)) {
        let mass = rp[x].min(rq[y]);
        table[x][y] += mass;
        rp[x] -= mass;
        rq[y] -= mass;
        floor_residual(&mut rp[x]);
        floor_residual(&mut rq[y]);
    }
    Coupling::new_unchecked(table)
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v > 0.0 && best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Pairs the residuals of `p` and `q` whose values differ the least
/// (ties: lowest `(i, j)` lexicographically) until both sides are exhausted.
///
/// The per-step argmin over all pairs is found by merging two sorted residual
/// sequences with a two-pointer walk, rather than scanning the full product.
pub fn zero_seeking(p: &Distribution, q: &Distribution) -> Coupling {
    let mut rp = p.probs().to_vec();
    let mut rq = q.probs().to_vec();
    let mut table = vec![vec![0.0; rq.len()]; rp.len()];
    while let Some((x, y)) = closest_pair(&rp, &rq) {
        let mass = rp[x].min(rq[y]);
        table[x][y] += mass;
        rp[x] -= mass;
        rq[y] -= mass;
        floor_residual(&mut rp[x]);
        floor_residual(&mut rq[y]);
    }
    Coupling::new_unchecked(table)
}

fn closest_pair(rp: &[f64], rq: &[f64]) -> Option<(usize, usize)> {
    let mut ps: Vec<(f64, usize)> = rp
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > 0.0)
        .map(|(i, v)| (v, i))
        .collect();
    let mut qs: Vec<(f64, usize)> = rq
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > 0.0)
        .map(|(j, v)| (v, j))
        .collect();
    if ps.is_empty() || qs.is_empty() {
        return None;
    }
    ps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    qs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best: Option<(f64, usize, usize)> = None;
    let mut consider = |cand: (f64, usize, usize)| {
        let better = match &best {
            None => true,
            Some(b) => match cand.0.total_cmp(&b.0) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => (cand.1, cand.2) < (b.1, b.2),
            },
        };
        if better {
            best = Some(cand);
        }
    };
    let (mut a, mut b) = (0, 0);
    while a < ps.len() && b < qs.len() {
        let (pv, pi) = ps[a];
        let (qv, qj) = qs[b];
        consider(((pv - qv).abs(), pi, qj));
        match pv.total_cmp(&qv) {
            Ordering::Less => a += 1,
            Ordering::Greater => b += 1,
            Ordering::Equal => {
                // walk both equal-value runs so every zero-difference pair
                // with the lexicographically smallest indices is seen
                let mut a2 = a;
                while a2 < ps.len() && ps[a2].0 == pv {
                    consider((0.0, ps[a2].1, qj));
                    a2 += 1;
                }
                let mut b2 = b;
                while b2 < qs.len() && qs[b2].0 == qv {
                    consider((0.0, pi, qs[b2].1));
                    b2 += 1;
                }
                a += 1;
                b += 1;
            }
        }
    }
    while a < ps.len() {
        consider((
            (ps[a].0 - qs[qs.len() - 1].0).abs(),
            ps[a].1,
            qs[qs.len() - 1].1,
        ));
        a += 1;
    }
    while b < qs.len() {
        consider((
            (ps[ps.len() - 1].0 - qs[b].0).abs(),
            ps[ps.len() - 1].1,
            qs[b].1,
        ));
        b += 1;
    }
    best.map(|(_, i, j)| (i, j))
}

/// Joint entropy of a coupling, `-sum cells log2 cells`.
pub fn joint_entropy(c: &Coupling) -> Bits {
    c.joint_entropy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    const H_JOINT: f64 = 1.295461844238322; // H of [[.6 0][.1 .3]]

    fn assert_table_close(c: &Coupling, want: &[[f64; 2]; 2]) {
        for (row, wrow) in c.table().iter().zip(want) {
            for (&a, &b) in row.iter().zip(wrow) {
                assert!((a - b).abs() < 1e-12, "cell {a} vs {b}");
            }
        }
    }

    #[test]
    fn max_seeking_worked_example() {
        let c = max_seeking(&dist(&[0.6, 0.4]), &dist(&[0.7, 0.3]));
        assert_table_close(&c, &[[0.6, 0.0], [0.1, 0.3]]);
        assert!((joint_entropy(&c).0 - H_JOINT).abs() < 1e-9);
    }

    #[test]
    fn zero_seeking_worked_example() {
        let c = zero_seeking(&dist(&[0.6, 0.4]), &dist(&[0.7, 0.3]));
        assert_table_close(&c, &[[0.6, 0.0], [0.1, 0.3]]);
        let indep = dist(&[0.6, 0.4]).entropy().0 + dist(&[0.7, 0.3]).entropy().0;
        assert!(joint_entropy(&c).0 <= indep);
    }

    #[test]
    fn identical_marginals_couple_perfectly() {
        let d = dist(&[0.5, 0.3, 0.2]);
        for method in [CouplerMethod::MaxSeeking, CouplerMethod::ZeroSeeking] {
            let c = couple(&d, &d, method);
            assert!((joint_entropy(&c).0 - d.entropy().0).abs() < 1e-12);
            assert!((c.mutual_information().0 - d.entropy().0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_couples_as_single_row() {
        let p = Distribution::point_mass(3, 1);
        let q = dist(&[0.3, 0.3, 0.4]);
        let c = zero_seeking(&p, &q);
        for (j, &qv) in q.probs().iter().enumerate() {
            assert!((c.at(1, j) - qv).abs() < 1e-12);
        }
        assert!((joint_entropy(&c).0 - q.entropy().0).abs() < 1e-12);
    }

    #[test]
    fn joint_entropy_trivia() {
        let p = dist(&[0.25, 0.75]);
        let q = dist(&[0.5, 0.5]);
        let indep = Coupling::product(&p, &q);
        assert!((joint_entropy(&indep).0 - (p.entropy().0 + q.entropy().0)).abs() < 1e-12);
        let diag = Coupling::diagonal(&p);
        assert!((joint_entropy(&diag).0 - p.entropy().0).abs() < 1e-12);
    }

    #[test]
    fn uniform_pair_couples_to_one_bit() {
        let u = Distribution::uniform(2);
        assert_eq!(joint_entropy(&max_seeking(&u, &u)).0, 1.0);
    }

    fn check_marginals(c: &Coupling, p: &Distribution, q: &Distribution) {
        let (rows, cols) = c.marginals();
        for (a, b) in rows.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in cols.probs().iter().zip(q.probs()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn different_alphabet_sizes_work() {
        let p = dist(&[0.5, 0.2, 0.2, 0.1]);
        let q = dist(&[0.9, 0.1]);
        for method in [CouplerMethod::MaxSeeking, CouplerMethod::ZeroSeeking] {
            let c = couple(&p, &q, method);
            assert_eq!((c.rows(), c.cols()), (4, 2));
            check_marginals(&c, &p, &q);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn greedy_couplers_preserve_marginals(
            pw in prop::collection::vec(1e-4..1.0f64, 1..=64),
            qw in prop::collection::vec(1e-4..1.0f64, 1..=64),
            which in prop::bool::ANY,
        ) {
            let p = Distribution::renormalized(&pw).unwrap();
            let q = Distribution::renormalized(&qw).unwrap();
            let method = if which { CouplerMethod::MaxSeeking } else { CouplerMethod::ZeroSeeking };
            let c = couple(&p, &q, method);
            check_marginals(&c, &p, &q);

            // sandwich: max marginal entropy <= H(X,Y) <= sum of marginals
            let h = joint_entropy(&c).0;
            prop_assert!(h >= p.entropy().0.max(q.entropy().0) - 1e-9);
            prop_assert!(h <= p.entropy().0 + q.entropy().0 + 1e-9);

            // linear-time bound: at most |p| + |q| - 1 assignments
            let nonzero = c.table().iter().flatten().filter(|&&v| v > 0.0).count();
            prop_assert!(nonzero < p.alphabet_size() + q.alphabet_size());
        }
    }
}
