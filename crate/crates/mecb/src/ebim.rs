//! Entropy-bounded information maximization: couple a fixed input marginal
//! `p_X` with a code `T` so that `I(X;T)` is as large as possible under the
//! budget `H(T) <= R`.
//!
//! Only deterministic mappings (partitions of the input alphabet) can attain
//! `I = H(T)`, so the solvers here search partition space:
//!
//! - [`solve_deterministic`] — greedy column-merge search, `O(n log n)`,
//!   with mutual information at most `h(p2)` below the optimum (`p2` the
//!   second-largest input mass);
//! - [`uniform_quantizer`], [`greedy_fill_encoder`] — baseline encoders;
//! - [`brute_force_deterministic`] — exact search over all set partitions
//!   (small alphabets only);
//! - [`perturb_up`] / [`perturb_down`] — the optimal infinitesimal mass
//!   moves away from a deterministic mapping, raising or lowering `H(T)`;
//! - [`frontier_sweep`] — the rate/information frontier assembled from the
//!   deterministic mappings and their perturbed continuations.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::probdist::{entropy_bits, merge_entropy_drop, Bits, Coupling, Distribution};
use crate::{Error, Result};

/// Additive slack for every `H(T) <= R` comparison.
pub const RATE_SLACK: f64 = 1e-9;

/// Brute-force enumeration limit; Bell(12) is ~4.2 million partitions.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Above this many enumerated partitions, `frontier_sweep` applies the
/// perturbed continuations only to the per-rate record mappings.
const FULL_FAMILY_LIMIT: usize = 25_000;

/// How many distinct deterministic rates on each side of a grid point get
/// perturbed continuations in the record-only regime.
const RECORD_NEIGHBORS: usize = 4;

/// Encoder selection for [`solve`] and the pipeline/CLI layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncoderMethod {
    /// Greedy deterministic merge search.
    Alg1,
    /// Block quantizer with `floor(2^R)` equal-size cells.
    Uniform,
    /// Lightest-cell-first assignment with `floor(2^R)` cells.
    GreedyFill,
    /// Exact partition enumeration (small alphabets).
    Brute,
}

impl FromStr for EncoderMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(Self::Alg1),
            "uniform" => Ok(Self::Uniform),
            "greedy-fill" => Ok(Self::GreedyFill),
            "brute" => Ok(Self::Brute),
            other => Err(Error::Domain(format!(
                "unknown encoder method `{other}` (expected alg1|uniform|greedy-fill|brute)"
            ))),
        }
    }
}

impl fmt::Display for EncoderMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Alg1 => "alg1",
            Self::Uniform => "uniform",
            Self::GreedyFill => "greedy-fill",
            Self::Brute => "brute",
        })
    }
}

/// Runs the selected encoder at a rate budget.
pub fn solve(p: &Distribution, rate: f64, method: EncoderMethod) -> Result<Coupling> {
    match method {
        EncoderMethod::Alg1 => solve_deterministic(p, rate),
        EncoderMethod::Uniform => uniform_quantizer(p, rate),
        EncoderMethod::GreedyFill => greedy_fill_encoder(p, code_count(rate)?),
        EncoderMethod::Brute => brute_force_deterministic(p, rate).map(|(c, _)| c),
    }
}

fn code_count(rate: f64) -> Result<usize> {
    let m = (2f64.powf(rate) + RATE_SLACK).floor();
    if !(m >= 1.0) {
        return Err(Error::Domain(format!(
            "rate budget {rate} admits no code symbols"
        )));
    }
    Ok(if m >= usize::MAX as f64 {
        usize::MAX
    } else {
        m as usize
    })
}

fn clamp_tiny(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

// ---------------------------------------------------------------------------
// Deterministic mappings
// ---------------------------------------------------------------------------

/// A partition of the input alphabet into code cells, `T = g(X)`.
///
/// Exactly the couplings with one nonzero per (positive-mass) row, i.e.
/// `H(T|X) = 0`; these are the only couplings achieving `I(X;T) = H(T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicMapping {
    cell_of: Vec<usize>,
    cell_mass: Vec<f64>,
}

impl DeterministicMapping {
    /// Reads a partition off a coupling; fails if some row has two nonzeros.
    pub fn from_coupling(c: &Coupling) -> Result<Self> {
        let mut cell_of = vec![0usize; c.rows()];
        let mut cell_mass = vec![0.0; c.cols()];
        for (i, row) in c.table().iter().enumerate() {
            let mut seen = None;
            for (j, &cell) in row.iter().enumerate() {
                if cell > 0.0 {
                    if seen.is_some() {
                        return Err(Error::Domain(format!(
                            "coupling is not deterministic: row {i} has multiple nonzero cells"
                        )));
                    }
                    seen = Some(j);
                    cell_mass[j] += cell;
                }
            }
            cell_of[i] = seen.unwrap_or(0);
        }
        Ok(Self { cell_of, cell_mass })
    }

    /// Code cell of each input symbol (the function `g`).
    pub fn cell_of(&self) -> &[usize] {
        &self.cell_of
    }

    /// The induced code distribution `p_T`.
    pub fn code_distribution(&self) -> Distribution {
        Distribution::new_unchecked(self.cell_mass.clone())
    }

    pub fn code_entropy(&self) -> Bits {
        Bits(entropy_bits(&self.cell_mass))
    }

    pub fn to_coupling(&self, p: &Distribution) -> Coupling {
        let k = self.cell_mass.len();
        let mut table = vec![vec![0.0; k]; p.alphabet_size()];
        for (i, &cell) in self.cell_of.iter().enumerate() {
            table[i][cell] = p.get(i);
        }
        Coupling::new_unchecked(table)
    }
}

/// Positive-mass symbols of `p`, sorted by descending mass (stable: equal
/// masses keep their original index order).
struct Support {
    symbols: Vec<usize>,
    masses: Vec<f64>,
    alphabet: usize,
}

fn sorted_support(p: &Distribution) -> Support {
    let mut symbols: Vec<usize> = (0..p.alphabet_size()).filter(|&i| p.get(i) > 0.0).collect();
    symbols.sort_by(|&a, &b| {
        p.get(b)
            .partial_cmp(&p.get(a))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let masses = symbols.iter().map(|&i| p.get(i)).collect();
    Support {
        symbols,
        masses,
        alphabet: p.alphabet_size(),
    }
}

/// Builds the coupling table for a partition of support positions, with code
/// cells relabeled in order of their smallest original symbol. Zero-mass
/// symbols reappear as all-zero rows.
fn emit_coupling(support: &Support, cells: &[Vec<usize>]) -> Coupling {
    let min_symbol: Vec<usize> = cells
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&m| support.symbols[m])
                .min()
                .expect("code cells are nonempty")
        })
        .collect();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&ci| min_symbol[ci]);

    let mut table = vec![vec![0.0; cells.len()]; support.alphabet];
    for (j, &ci) in order.iter().enumerate() {
        for &m in &cells[ci] {
            table[support.symbols[m]][j] = support.masses[m];
        }
    }
    Coupling::new_unchecked(table)
}

// ---------------------------------------------------------------------------
// Greedy merge traversal
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct SlotEntry {
    mass: f64,
    rep: usize,
    slot: usize,
}

/// Max-heap entry: larger mass first, ties by lower representative index.
#[derive(Clone, Copy)]
struct LargestFirst(SlotEntry);

impl PartialEq for LargestFirst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for LargestFirst {}
impl PartialOrd for LargestFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for LargestFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .mass
            .total_cmp(&other.0.mass)
            .then(other.0.rep.cmp(&self.0.rep))
    }
}

/// Max-heap entry that surfaces the smallest mass, ties by lower rep.
#[derive(Clone, Copy)]
struct SmallestFirst(SlotEntry);

impl PartialEq for SmallestFirst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for SmallestFirst {}
impl PartialOrd for SmallestFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SmallestFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .mass
            .total_cmp(&self.0.mass)
            .then(other.0.rep.cmp(&self.0.rep))
    }
}

/// Evolving column partition with cached masses and two lazy-deletion heaps,
/// giving the `O(n log n)` merge traversal.
struct MergeState {
    mass: Vec<f64>,
    rep: Vec<usize>,
    members: Vec<Vec<usize>>,
    alive: Vec<bool>,
    largest: BinaryHeap<LargestFirst>,
    smallest: BinaryHeap<SmallestFirst>,
    h_t: f64,
    n_alive: usize,
}

impl MergeState {
    fn new(masses: &[f64]) -> Self {
        let n = masses.len();
        let mut largest = BinaryHeap::with_capacity(2 * n);
        let mut smallest = BinaryHeap::with_capacity(2 * n);
        for (i, &m) in masses.iter().enumerate() {
            let entry = SlotEntry {
                mass: m,
                rep: i,
                slot: i,
            };
            largest.push(LargestFirst(entry));
            smallest.push(SmallestFirst(entry));
        }
        Self {
            mass: masses.to_vec(),
            rep: (0..n).collect(),
            members: (0..n).map(|i| vec![i]).collect(),
            alive: vec![true; n],
            largest,
            smallest,
            h_t: entropy_bits(masses),
            n_alive: n,
        }
    }

    fn two_smallest(&mut self) -> (SlotEntry, SlotEntry) {
        let a = loop {
            let e = self.smallest.pop().expect("at least two live columns");
            if self.alive[e.0.slot] {
                break e;
            }
        };
        let b = loop {
            let e = self.smallest.pop().expect("at least two live columns");
            if self.alive[e.0.slot] {
                break e;
            }
        };
        self.smallest.push(a);
        self.smallest.push(b);
        (a.0, b.0)
    }

    fn two_largest(&mut self) -> (SlotEntry, SlotEntry) {
        let a = loop {
            let e = self.largest.pop().expect("at least two live columns");
            if self.alive[e.0.slot] {
                break e;
            }
        };
        let b = loop {
            let e = self.largest.pop().expect("at least two live columns");
            if self.alive[e.0.slot] {
                break e;
            }
        };
        self.largest.push(a);
        self.largest.push(b);
        (a.0, b.0)
    }

    fn merge(&mut self, a: usize, b: usize) {
        debug_assert!(self.alive[a] && self.alive[b] && a != b);
        self.h_t -= merge_entropy_drop(self.mass[a], self.mass[b])
            .expect("live columns carry positive mass")
            .0;
        let slot = self.mass.len();
        self.mass.push(self.mass[a] + self.mass[b]);
        self.rep.push(self.rep[a].min(self.rep[b]));
        let mut merged = std::mem::take(&mut self.members[a]);
        merged.append(&mut self.members[b]);
        self.members.push(merged);
        self.alive[a] = false;
        self.alive[b] = false;
        self.alive.push(true);
        let entry = SlotEntry {
            mass: self.mass[slot],
            rep: self.rep[slot],
            slot,
        };
        self.largest.push(LargestFirst(entry));
        self.smallest.push(SmallestFirst(entry));
        self.n_alive -= 1;
    }

    fn cells(&self) -> Vec<Vec<usize>> {
        (0..self.members.len())
            .filter(|&s| self.alive[s])
            .map(|s| self.members[s].clone())
            .collect()
    }

    fn cells_with_merge(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        let mut cells = Vec::with_capacity(self.n_alive - 1);
        let mut merged = self.members[a].clone();
        merged.extend_from_slice(&self.members[b]);
        let first = a.min(b);
        for s in 0..self.members.len() {
            if !self.alive[s] || s == a || s == b {
                if s == first {
                    cells.push(std::mem::take(&mut merged));
                }
                continue;
            }
            cells.push(self.members[s].clone());
        }
        cells
    }
}

/// Greedy deterministic solver.
///
/// Walks the merge traversal and returns the first mapping whose mutual
/// information fits the budget; if `rate >= H(X)` the identity mapping is
/// returned directly. The output always satisfies `H(T) <= rate + 1e-9` and
/// sits at most `h(p2)` bits of information below the optimum.
pub fn solve_deterministic(p: &Distribution, rate: f64) -> Result<Coupling> {
    if !(rate >= 0.0) {
        return Err(Error::Domain(format!(
            "rate budget must be >= 0, got {rate}"
        )));
    }
    let support = sorted_support(p);
    let h_x = entropy_bits(&support.masses);
    if h_x <= rate + RATE_SLACK {
        let cells: Vec<Vec<usize>> = (0..support.masses.len()).map(|i| vec![i]).collect();
        return Ok(emit_coupling(&support, &cells));
    }
    let mut state = MergeState::new(&support.masses);
    loop {
        let (sa, sb) = state.two_smallest();
        let info_small = state.h_t - merge_entropy_drop(sa.mass, sb.mass)?.0;
        if info_small <= rate + RATE_SLACK {
            let cells = state.cells_with_merge(sa.slot, sb.slot);
            return Ok(emit_coupling(&support, &cells));
        }
        let (la, lb) = state.two_largest();
        let info_large = state.h_t - merge_entropy_drop(la.mass, lb.mass)?.0;
        state.merge(la.slot, lb.slot);
        if info_large <= rate + RATE_SLACK {
            return Ok(emit_coupling(&support, &state.cells()));
        }
    }
}

/// Full merge traversal: the identity mapping followed by the small-merge and
/// large-merge candidates of every round, `2n - 1` mappings in all, with
/// non-increasing mutual information ending at zero.
pub fn traversal_sequence(p: &Distribution) -> Vec<(Coupling, Bits)> {
    let support = sorted_support(p);
    let mut state = MergeState::new(&support.masses);
    let mut out = Vec::with_capacity(2 * support.masses.len());
    out.push((
        emit_coupling(&support, &state.cells()),
        Bits(clamp_tiny(state.h_t)),
    ));
    while state.n_alive > 1 {
        let (sa, sb) = state.two_smallest();
        let info_small = state.h_t
            - merge_entropy_drop(sa.mass, sb.mass)
                .expect("live columns carry positive mass")
                .0;
        out.push((
            emit_coupling(&support, &state.cells_with_merge(sa.slot, sb.slot)),
            Bits(clamp_tiny(info_small)),
        ));
        let (la, lb) = state.two_largest();
        let info_large = state.h_t
            - merge_entropy_drop(la.mass, lb.mass)
                .expect("live columns carry positive mass")
                .0;
        state.merge(la.slot, lb.slot);
        out.push((
            emit_coupling(&support, &state.cells()),
            Bits(clamp_tiny(info_large)),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Baseline encoders
// ---------------------------------------------------------------------------

/// Splits the positive-mass input symbols, in their given order, into
/// `floor(2^rate)` consecutive blocks of equal size and encodes each block
/// as one symbol. Zero-mass symbols come back as all-zero rows.
pub fn uniform_quantizer(p: &Distribution, rate: f64) -> Result<Coupling> {
    let positive: Vec<usize> = (0..p.alphabet_size()).filter(|&i| p.get(i) > 0.0).collect();
    let n = positive.len();
    let m = code_count(rate)?.min(n);
    let block = n.div_ceil(m);
    let cols = n.div_ceil(block);
    let mut table = vec![vec![0.0; cols]; p.alphabet_size()];
    for (pos, &sym) in positive.iter().enumerate() {
        table[sym][pos / block] = p.get(sym);
    }
    Ok(Coupling::new_unchecked(table))
}

/// Assigns positive-mass symbols in descending-probability order, each to
/// the code cell with the smallest accumulated mass so far (ties: lowest
/// cell index).
pub fn greedy_fill_encoder(p: &Distribution, num_codes: usize) -> Result<Coupling> {
    if num_codes == 0 {
        return Err(Error::Domain("need at least one code cell".into()));
    }
    let support = sorted_support(p);
    let num_codes = num_codes.min(support.symbols.len());
    let mut load = vec![0.0; num_codes];
    let mut table = vec![vec![0.0; num_codes]; p.alphabet_size()];
    for (&sym, &mass) in support.symbols.iter().zip(&support.masses) {
        let mut lightest = 0;
        for (c, &l) in load.iter().enumerate() {
            if l < load[lightest] {
                lightest = c;
            }
        }
        load[lightest] += mass;
        table[sym][lightest] = mass;
    }
    Ok(Coupling::new_unchecked(table))
}

// ---------------------------------------------------------------------------
// Perturbations around deterministic mappings
// ---------------------------------------------------------------------------

fn nonzero_cells(c: &Coupling) -> Result<Vec<(usize, usize, f64)>> {
    let mut cells = Vec::new();
    for (i, row) in c.table().iter().enumerate() {
        let mut seen = false;
        for (j, &mass) in row.iter().enumerate() {
            if mass > 0.0 {
                if seen {
                    return Err(Error::Domain(format!(
                        "coupling is not deterministic: row {i} has multiple nonzero cells"
                    )));
                }
                seen = true;
                cells.push((i, j, mass));
            }
        }
    }
    Ok(cells)
}

/// Entropy-raising move: normalize each column by its sum, take the cell with
/// the smallest normalized value (ties: lowest row, then column) and move
/// `eps` of its mass into a fresh all-zero column in the same row. `H(T)`
/// strictly increases for any `0 < eps <` the cell mass.
pub fn perturb_up(c: &Coupling, eps: f64) -> Result<Coupling> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let cells = nonzero_cells(c)?;
    let mut colsum = vec![0.0; c.cols()];
    for &(_, j, mass) in &cells {
        colsum[j] += mass;
    }
    let &(row, col, mass) = cells
        .iter()
        .min_by(|a, b| {
            (a.2 / colsum[a.1])
                .partial_cmp(&(b.2 / colsum[b.1]))
                .unwrap_or(Ordering::Equal)
                .then(a.0.cmp(&b.0))
                .then(a.1.cmp(&b.1))
        })
        .expect("a valid coupling has positive mass somewhere");
    if eps >= mass {
        return Err(Error::PerturbationTooLarge { eps, cell: mass });
    }
    let mut table: Vec<Vec<f64>> = c.table().to_vec();
    let fresh = c.cols();
    for r in table.iter_mut() {
        r.push(0.0);
    }
    table[row][col] -= eps;
    table[row][fresh] = eps;
    Ok(Coupling::new_unchecked(table))
}

/// Entropy-lowering move: take the smallest cell of the lightest column and
/// move `eps` of its mass to the heaviest column in the same row (ties:
/// lowest column index on both ends). `H(T)` strictly decreases.
pub fn perturb_down(c: &Coupling, eps: f64) -> Result<Coupling> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let cells = nonzero_cells(c)?;
    let mut colsum = vec![0.0; c.cols()];
    for &(_, j, mass) in &cells {
        colsum[j] += mass;
    }
    let positive: Vec<usize> = (0..c.cols()).filter(|&j| colsum[j] > 0.0).collect();
    if positive.len() < 2 {
        return Err(Error::SingleColumn);
    }
    let mut lightest = positive[0];
    for &j in &positive[1..] {
        if colsum[j] < colsum[lightest] {
            lightest = j;
        }
    }
    let mut heaviest = None;
    for &j in &positive {
        if j == lightest {
            continue;
        }
        match heaviest {
            None => heaviest = Some(j),
            Some(h) if colsum[j] > colsum[h] => heaviest = Some(j),
            _ => {}
        }
    }
    let heaviest = heaviest.expect("at least two positive columns");
    let &(row, _, mass) = cells
        .iter()
        .filter(|&&(_, j, _)| j == lightest)
        .min_by(|a, b| {
            a.2.partial_cmp(&b.2)
                .unwrap_or(Ordering::Equal)
                .then(a.0.cmp(&b.0))
        })
        .expect("lightest column has positive mass");
    if eps >= mass {
        return Err(Error::PerturbationTooLarge { eps, cell: mass });
    }
    let mut table: Vec<Vec<f64>> = c.table().to_vec();
    table[row][lightest] -= eps;
    table[row][heaviest] += eps;
    Ok(Coupling::new_unchecked(table))
}

// ---------------------------------------------------------------------------
// Partition enumeration and brute force
// ---------------------------------------------------------------------------

/// Visits every set partition of `{0..n}` exactly once, in restricted-growth
/// order. The callback receives the cell index of each element.
pub fn enumerate_partitions(n: usize, mut visit: impl FnMut(&[usize])) {
    assert!(n >= 1, "cannot partition an empty set");
    fn rec<F: FnMut(&[usize])>(a: &mut [usize], pos: usize, max_used: usize, visit: &mut F) {
        if pos == a.len() {
            visit(a);
            return;
        }
        for c in 0..=max_used + 1 {
            a[pos] = c;
            rec(a, pos + 1, max_used.max(c), visit);
        }
    }
    let mut a = vec![0usize; n];
    rec(&mut a, 1, 0, &mut visit);
}

fn cells_from_assignment(assignment: &[usize]) -> Vec<Vec<usize>> {
    let k = assignment.iter().copied().max().unwrap_or(0) + 1;
    let mut cells = vec![Vec::new(); k];
    for (pos, &c) in assignment.iter().enumerate() {
        cells[c].push(pos);
    }
    cells
}

/// Exact deterministic optimum by enumerating all set partitions of the
/// support (Bell-number many — limited to alphabets of at most
/// [`BRUTE_FORCE_LIMIT`] positive symbols). Returns the feasible partition
/// with maximal mutual information and that information.
pub fn brute_force_deterministic(p: &Distribution, rate: f64) -> Result<(Coupling, Bits)> {
    if !(rate >= 0.0) {
        return Err(Error::Domain(format!(
            "rate budget must be >= 0, got {rate}"
        )));
    }
    let support = sorted_support(p);
    let n = support.masses.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::AlphabetTooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut sums = vec![0.0; n];
    enumerate_partitions(n, |assignment| {
        let k = assignment.iter().copied().max().unwrap_or(0) + 1;
        sums[..k].fill(0.0);
        for (pos, &c) in assignment.iter().enumerate() {
            sums[c] += support.masses[pos];
        }
        let h = entropy_bits(&sums[..k]);
        if h <= rate + RATE_SLACK && best.as_ref().is_none_or(|(b, _)| h > *b) {
            best = Some((h, assignment.to_vec()));
        }
    });
    let (h, assignment) = best.expect("the all-merged partition is always feasible");
    let cells = cells_from_assignment(&assignment);
    Ok((emit_coupling(&support, &cells), Bits(clamp_tiny(h))))
}

// ---------------------------------------------------------------------------
// Frontier sweep
// ---------------------------------------------------------------------------

/// Where a frontier point came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Deterministic,
    PerturbedUp,
    PerturbedDown,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Deterministic => "deterministic",
            Self::PerturbedUp => "perturbed-up",
            Self::PerturbedDown => "perturbed-down",
        })
    }
}

/// One point of the rate/information frontier.
#[derive(Clone, Debug)]
pub struct FrontierPoint {
    pub rate: Bits,
    pub info: Bits,
    pub origin: Origin,
    pub coupling: Coupling,
}

fn neg_xlog2x(z: f64) -> f64 {
    if z > 0.0 {
        -z * z.log2()
    } else {
        0.0
    }
}

/// One deterministic mapping plus everything needed to evaluate its two
/// perturbed continuations in O(1) per probe.
struct Family {
    rate: f64,
    cells: Vec<Vec<usize>>,
    /// entropy-raising move: (cell mass, column mass, row, canonical column)
    up: (f64, f64, usize, usize),
    /// entropy-lowering move: (cell mass, src col mass, tgt col mass, row, src, tgt)
    down: Option<(f64, f64, f64, usize, usize, usize)>,
}

impl Family {
    fn build(support: &Support, cells: Vec<Vec<usize>>) -> Self {
        let k = cells.len();
        let mut col_mass = vec![0.0; k];
        let mut min_symbol = vec![usize::MAX; k];
        for (ci, members) in cells.iter().enumerate() {
            for &m in members {
                col_mass[ci] += support.masses[m];
                min_symbol[ci] = min_symbol[ci].min(support.symbols[m]);
            }
        }
        // canonical column index = rank of the cell's smallest symbol
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&ci| min_symbol[ci]);
        let mut canon = vec![0usize; k];
        for (j, &ci) in order.iter().enumerate() {
            canon[ci] = j;
        }
        let rate = entropy_bits(&col_mass);

        // up: smallest column-normalized cell, ties lowest row then column
        let mut up: Option<(f64, f64, usize, usize)> = None;
        for (ci, members) in cells.iter().enumerate() {
            for &m in members {
                let cand = (
                    support.masses[m],
                    col_mass[ci],
                    support.symbols[m],
                    canon[ci],
                );
                let better = match &up {
                    None => true,
                    Some(best) => {
                        let a = cand.0 / cand.1;
                        let b = best.0 / best.1;
                        a < b || (a == b && (cand.2, cand.3) < (best.2, best.3))
                    }
                };
                if better {
                    up = Some(cand);
                }
            }
        }
        let up = up.expect("partitions have at least one member");

        // down: smallest cell of the lightest column into the heaviest column
        let down = if k >= 2 {
            let mut lightest = 0;
            for ci in 1..k {
                let better = col_mass[ci] < col_mass[lightest]
                    || (col_mass[ci] == col_mass[lightest] && canon[ci] < canon[lightest]);
                if better {
                    lightest = ci;
                }
            }
            let mut heaviest = None;
            for ci in 0..k {
                if ci == lightest {
                    continue;
                }
                let better = match heaviest {
                    None => true,
                    Some(h) => {
                        col_mass[ci] > col_mass[h]
                            || (col_mass[ci] == col_mass[h] && canon[ci] < canon[h])
                    }
                };
                if better {
                    heaviest = Some(ci);
                }
            }
            let heaviest = heaviest.expect("k >= 2");
            let mut donor: Option<(f64, usize)> = None;
            for &m in &cells[lightest] {
                let cand = (support.masses[m], support.symbols[m]);
                let better = match &donor {
                    None => true,
                    Some(best) => cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1),
                };
                if better {
                    donor = Some(cand);
                }
            }
            let (mass, row) = donor.expect("cells are nonempty");
            Some((
                mass,
                col_mass[lightest],
                col_mass[heaviest],
                row,
                canon[lightest],
                canon[heaviest],
            ))
        } else {
            None
        };

        Family {
            rate,
            cells,
            up: (up.0, up.1, up.2, up.3),
            down,
        }
    }

    /// `H(T)` and `I(X;T)` after moving `eps` along the raising direction.
    fn up_point(&self, eps: f64) -> (f64, f64) {
        let (p, m, _, _) = self.up;
        let h = self.rate - neg_xlog2x(m) + neg_xlog2x(m - eps) + neg_xlog2x(eps);
        let info = h + neg_xlog2x(p) - neg_xlog2x(p - eps) - neg_xlog2x(eps);
        (h, info)
    }

    fn down_point(&self, eps: f64) -> Option<(f64, f64)> {
        let (p, a, b, _, _, _) = self.down?;
        let h =
            self.rate - neg_xlog2x(a) - neg_xlog2x(b) + neg_xlog2x(a - eps) + neg_xlog2x(b + eps);
        let info = h + neg_xlog2x(p) - neg_xlog2x(p - eps) - neg_xlog2x(eps);
        Some((h, info))
    }

    /// Solves `H(T)(eps) = target` by bisection on the monotone stretch of
    /// the raising direction; returns `(eps, info)` if the target is in range.
    fn solve_up(&self, target: f64) -> Option<(f64, f64)> {
        let (p, m, _, _) = self.up;
        let hi = (p * (1.0 - 1e-12)).min(m / 2.0);
        if hi <= 0.0 || self.up_point(hi).0 < target - 1e-10 {
            return None;
        }
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.up_point(mid).0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let eps = 0.5 * (lo + hi);
        let (_, info) = self.up_point(eps);
        Some((eps, info))
    }

    fn solve_down(&self, target: f64) -> Option<(f64, f64)> {
        let (p, _, _, _, _, _) = self.down?;
        let hi = p * (1.0 - 1e-12);
        if self.down_point(hi)?.0 > target + 1e-10 {
            return None;
        }
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.down_point(mid).expect("down move exists").0 > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let eps = 0.5 * (lo + hi);
        let (_, info) = self.down_point(eps).expect("down move exists");
        Some((eps, info))
    }

    fn emit_up(&self, support: &Support, eps: f64) -> Coupling {
        let (_, _, row, col) = self.up;
        let base = emit_coupling(support, &self.cells);
        let fresh = base.cols();
        let mut table: Vec<Vec<f64>> = base.table().to_vec();
        for r in table.iter_mut() {
            r.push(0.0);
        }
        table[row][col] -= eps;
        table[row][fresh] = eps;
        Coupling::new_unchecked(table)
    }

    fn emit_down(&self, support: &Support, eps: f64) -> Coupling {
        let (_, _, _, row, src, tgt) = self.down.expect("down move exists");
        let base = emit_coupling(support, &self.cells);
        let mut table: Vec<Vec<f64>> = base.table().to_vec();
        table[row][src] -= eps;
        table[row][tgt] += eps;
        Coupling::new_unchecked(table)
    }
}

fn pack_assignment(assignment: &[usize]) -> u64 {
    let mut packed = 0u64;
    for (i, &c) in assignment.iter().enumerate() {
        packed |= (c as u64) << (4 * i);
    }
    packed
}

fn unpack_assignment(packed: u64, n: usize) -> Vec<usize> {
    (0..n)
        .map(|i| ((packed >> (4 * i)) & 0xf) as usize)
        .collect()
}

/// Best achievable information at each budget of `rate_grid`.
///
/// Candidates are all deterministic mappings (full partition enumeration when
/// the support has at most [`BRUTE_FORCE_LIMIT`] symbols, the merge traversal
/// otherwise) together with their perturbed continuations, with the moved
/// mass solved by bisection so `H(T)` lands on the grid rate. Any solution
/// feasible at a lower rate stays feasible at a higher one, so the result is
/// the running maximum over the ascending grid: non-decreasing, with
/// `I <= R + 1e-9` everywhere.
///
/// With more than `25_000` enumerated partitions only the per-rate record
/// mappings (the nearest distinct deterministic rates around each grid point)
/// get continuations; the deterministic step function itself stays exact.
pub fn frontier_sweep(p: &Distribution, rate_grid: &[f64]) -> Result<Vec<FrontierPoint>> {
    if rate_grid.is_empty() {
        return Err(Error::Domain("empty rate grid".into()));
    }
    for &r in rate_grid {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("grid rates must be >= 0, got {r}")));
        }
    }
    let support = sorted_support(p);
    let n = support.masses.len();

    let mut grid: Vec<f64> = rate_grid.to_vec();
    grid.sort_by(f64::total_cmp);

    // (rate, packed assignment) of every candidate partition, sorted by rate
    // then canonical order; or the explicit traversal cells for large n.
    let families: Vec<Family>;
    let mut sorted_rates: Vec<(f64, u64)> = Vec::new();
    if n <= BRUTE_FORCE_LIMIT {
        let mut sums = vec![0.0; n];
        enumerate_partitions(n, |assignment| {
            let k = assignment.iter().copied().max().unwrap_or(0) + 1;
            sums[..k].fill(0.0);
            for (pos, &c) in assignment.iter().enumerate() {
                sums[c] += support.masses[pos];
            }
            sorted_rates.push((entropy_bits(&sums[..k]), pack_assignment(assignment)));
        });
        sorted_rates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let picks: BTreeSet<u64> = if sorted_rates.len() <= FULL_FAMILY_LIMIT {
            sorted_rates.iter().map(|&(_, packed)| packed).collect()
        } else {
            // record-only regime: nearest distinct rates around each grid point
            let mut picks = BTreeSet::new();
            let run_start = |mut i: usize| {
                while i > 0 && sorted_rates[i - 1].0 == sorted_rates[i].0 {
                    i -= 1;
                }
                i
            };
            for &r in &grid {
                let ub = sorted_rates.partition_point(|&(rg, _)| rg <= r + RATE_SLACK);
                let mut i = ub;
                for _ in 0..RECORD_NEIGHBORS {
                    if i == 0 {
                        break;
                    }
                    i = run_start(i - 1);
                    picks.insert(sorted_rates[i].1);
                    if i == 0 {
                        break;
                    }
                }
                let mut j = ub;
                for _ in 0..RECORD_NEIGHBORS {
                    if j >= sorted_rates.len() {
                        break;
                    }
                    picks.insert(sorted_rates[j].1);
                    let rate = sorted_rates[j].0;
                    while j < sorted_rates.len() && sorted_rates[j].0 == rate {
                        j += 1;
                    }
                }
            }
            picks
        };
        families = picks
            .into_iter()
            .map(|packed| {
                Family::build(
                    &support,
                    cells_from_assignment(&unpack_assignment(packed, n)),
                )
            })
            .collect();
    } else {
        let mut state = MergeState::new(&support.masses);
        let mut all_cells = vec![state.cells()];
        while state.n_alive > 1 {
            let (sa, sb) = state.two_smallest();
            all_cells.push(state.cells_with_merge(sa.slot, sb.slot));
            let (la, lb) = state.two_largest();
            state.merge(la.slot, lb.slot);
            all_cells.push(state.cells());
        }
        families = all_cells
            .into_iter()
            .map(|cells| Family::build(&support, cells))
            .collect();
        sorted_rates = families
            .iter()
            .enumerate()
            .map(|(i, f)| (f.rate, i as u64))
            .collect();
        sorted_rates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    // family lookup for the deterministic winner at each grid point
    let family_by_rate = |target: f64| -> &Family {
        families
            .iter()
            .filter(|f| f.rate <= target + RATE_SLACK)
            .max_by(|a, b| a.rate.total_cmp(&b.rate))
            .expect("the all-merged mapping has rate zero")
    };

    let mut points: Vec<FrontierPoint> = Vec::with_capacity(grid.len());
    for &r in &grid {
        // deterministic step: best enumerated rate <= r
        let ub = sorted_rates.partition_point(|&(rg, _)| rg <= r + RATE_SLACK);
        let det_rate = if ub > 0 { sorted_rates[ub - 1].0 } else { 0.0 };
        let mut best_info = clamp_tiny(det_rate);
        let mut best_origin = Origin::Deterministic;
        let mut best_family: Option<(&Family, f64, Origin)> = None;

        for family in &families {
            // a perturbed candidate must beat the incumbent by more than
            // float noise to claim the point
            if family.rate < r - 1e-12 {
                if let Some((eps, info)) = family.solve_up(r) {
                    if info > best_info + 1e-12 {
                        best_info = info;
                        best_origin = Origin::PerturbedUp;
                        best_family = Some((family, eps, Origin::PerturbedUp));
                    }
                }
            } else if family.rate > r + 1e-12 {
                if let Some((eps, info)) = family.solve_down(r) {
                    if info > best_info + 1e-12 {
                        best_info = info;
                        best_origin = Origin::PerturbedDown;
                        best_family = Some((family, eps, Origin::PerturbedDown));
                    }
                }
            }
        }

        // running maximum: anything feasible below stays feasible here
        if let Some(prev) = points.last() {
            if prev.info.0 > best_info {
                points.push(FrontierPoint {
                    rate: Bits(r),
                    info: prev.info,
                    origin: prev.origin,
                    coupling: prev.coupling.clone(),
                });
                continue;
            }
        }

        let (coupling, origin) = match best_family {
            Some((family, eps, Origin::PerturbedUp)) => {
                (family.emit_up(&support, eps), Origin::PerturbedUp)
            }
            Some((family, eps, Origin::PerturbedDown)) => {
                (family.emit_down(&support, eps), Origin::PerturbedDown)
            }
            _ => {
                let family = family_by_rate(r);
                (emit_coupling(&support, &family.cells), best_origin)
            }
        };
        points.push(FrontierPoint {
            rate: Bits(r),
            info: Bits(clamp_tiny(best_info)),
            origin,
            coupling,
        });
    }
    Ok(points)
}
