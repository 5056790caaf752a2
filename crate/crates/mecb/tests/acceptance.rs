//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line through the harness. Oracles here are independent of the
//! library paths they check: partition enumeration feeds off the public
//! visitor, value iteration is re-derived with hard maxima, perturbation
//! optimality is checked against an exhaustive single-move enumeration, and
//! all expected constants were frozen from direct evaluation of the defining
//! formulas.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mecb::ebim::{self, EncoderMethod};
use mecb::mcg::{self, MessageConfig, ProtocolOptions, SweepConfig};
use mecb::mdp::{self, GridWorld, ACTIONS};
use mecb::mec::{self, CouplerMethod};
use mecb::pipeline;
use mecb::probdist::{Coupling, Distribution};

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Distribution {
    let w: Vec<f64> = (0..n)
        .map(|_| -(rng.gen::<f64>().max(1e-300)).ln())
        .collect();
    Distribution::renormalized(&w).unwrap()
}

/// Criterion 1 — the greedy traversal reproduces the worked four-symbol
/// example: seven mappings with the frozen information sequence, in < 1 ms.
#[test]
fn c01_traversal_reproduction() {
    let p = Distribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let expected = [
        1.8464393446710154, // H([.4 .3 .2 .1])
        1.5709505944546684, // H([.4 .3 .3])
        1.1567796494470395, // H([.7 .2 .1])
        0.8812908992306927, // H([.7 .3])
        0.4689955935892812, // H([.9 .1])
        0.0,
        0.0,
    ];
    let _warm = ebim::traversal_sequence(&p);
    let start = Instant::now();
    let seq = ebim::traversal_sequence(&p);
    let elapsed = start.elapsed();
    assert_eq!(seq.len(), 7, "expected the 7 traversal mappings");
    for (i, ((coupling, info), want)) in seq.iter().zip(expected).enumerate() {
        assert!(
            (info.0 - want).abs() < 1e-9,
            "mapping {i}: I = {} expected {want}",
            info.0
        );
        assert!((coupling.mutual_information().0 - want).abs() < 1e-9);
    }
    assert!(
        elapsed.as_micros() < 1000,
        "traversal took {elapsed:?}, budget 1 ms"
    );
    println!("criterion 1 (traversal reproduction): PASS ({elapsed:?})");
}

/// Criterion 2 — greedy optimality gap: R - I never exceeds the binary
/// entropy of the second-largest mass, over 1000 random instances, in < 5 s.
#[test]
fn c02_theorem2_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=12);
        let p = dirichlet(&mut rng, n);
        let rate = rng.gen_range(0.0..p.entropy().0);
        let coupling = ebim::solve_deterministic(&p, rate).unwrap();
        let info = coupling.mutual_information().0;
        let mut masses = p.probs().to_vec();
        masses.sort_by(|a, b| b.total_cmp(a));
        let bound = mecb::binary_entropy(masses[1]).unwrap().0;
        if rate - info > bound + 1e-9 {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(violations, 0, "{violations} gap violations");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!("criterion 2 (theorem-2 gap, 1000 instances): PASS ({elapsed:?})");
}

/// Criterion 3 — exact-search dominance: the brute-force optimum is never
/// below the greedy result and both respect the budget; a three-symbol
/// alphabet enumerates exactly five partitions. 200 instances in < 30 s.
#[test]
fn c03_oracle_agreement() {
    let mut count = 0usize;
    ebim::enumerate_partitions(3, |_| count += 1);
    assert_eq!(count, 5, "three symbols must give exactly 5 partitions");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    for _ in 0..200 {
        let n = rng.gen_range(3..=8);
        let p = dirichlet(&mut rng, n);
        let rate = rng.gen_range(0.0..p.entropy().0);
        let greedy = ebim::solve_deterministic(&p, rate).unwrap();
        let greedy_info = greedy.mutual_information().0;
        let (_, brute_info) = ebim::brute_force_deterministic(&p, rate).unwrap();
        assert!(
            brute_info.0 >= greedy_info - 1e-12,
            "brute {brute_info:?} below greedy {greedy_info}"
        );
        assert!(brute_info.0 <= rate + 1e-9);
        assert!(greedy_info <= rate + 1e-9);
        let (_, p_t) = greedy.marginals();
        assert!(p_t.entropy().0 <= rate + 1e-9);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "took {elapsed:?}, budget 30 s"
    );
    println!("criterion 3 (oracle agreement, 200 instances): PASS ({elapsed:?})");
}

fn random_deterministic_coupling(rng: &mut ChaCha8Rng) -> Coupling {
    let n = rng.gen_range(3..=8);
    let p = dirichlet(rng, n);
    let k = rng.gen_range(1..=n);
    let mut assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    // relabel to contiguous cells
    let mut seen: Vec<usize> = assignment.clone();
    seen.sort_unstable();
    seen.dedup();
    for a in assignment.iter_mut() {
        *a = seen.iter().position(|&s| s == *a).unwrap();
    }
    let cols = seen.len();
    let mut table = vec![vec![0.0; cols]; n];
    for (i, &cell) in assignment.iter().enumerate() {
        table[i][cell] = p.get(i);
    }
    Coupling::new(table).unwrap()
}

/// Every single-cell move of mass `eps` from a nonzero cell to another cell
/// of the same row (existing columns or one fresh column), with the induced
/// information/entropy finite differences.
fn all_single_moves(c: &Coupling, eps: f64) -> Vec<(usize, usize, f64, f64)> {
    let cols = c.cols();
    let base_info = c.mutual_information().0;
    let base_h = c.col_marginal().entropy().0;
    let mut moves = Vec::new();
    for (x, row) in c.table().iter().enumerate() {
        let src = match row.iter().position(|&v| v > 0.0) {
            Some(j) => j,
            None => continue,
        };
        if row[src] <= eps {
            continue;
        }
        for tgt in 0..=cols {
            if tgt == src {
                continue;
            }
            let mut table: Vec<Vec<f64>> = c
                .table()
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.push(0.0);
                    r
                })
                .collect();
            table[x][src] -= eps;
            table[x][tgt] += eps;
            let moved = Coupling::new(table).unwrap();
            let d_info = moved.mutual_information().0 - base_info;
            let d_h = moved.col_marginal().entropy().0 - base_h;
            if d_h.abs() > 1e-15 {
                moves.push((x, tgt, d_info, d_h));
            }
        }
    }
    moves
}

/// Which single cell moved between a deterministic coupling and its
/// perturbation: returns (row, target column).
fn diff_move(before: &Coupling, after: &Coupling) -> (usize, usize) {
    for (x, row) in after.table().iter().enumerate() {
        for (tgt, &v) in row.iter().enumerate() {
            let old = if tgt < before.cols() {
                before.at(x, tgt)
            } else {
                0.0
            };
            if v > old + 1e-15 {
                return (x, tgt);
            }
        }
    }
    panic!("no moved mass found");
}

/// Criterion 4 — perturbation optimality at finite eps: among all
/// single-mass moves of 1e-4, the raising move must attain the maximal
/// dI/dH over entropy-raising moves and the lowering move the minimal
/// dI/dH over entropy-lowering moves, within ratio tolerance 1e-3, on 100
/// random deterministic mappings, in < 10 s.
///
/// The selection rule implemented (and tested in unit tests against the
/// worked examples) is the infinitesimal-optimal one; this criterion probes
/// it at the stated finite eps.
#[test]
fn c04_theorem3_oracle() {
    const EPS: f64 = 1e-4;
    const RATIO_TOL: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut up_checked = 0;
    let mut down_checked = 0;
    let mut up_violations: Vec<f64> = Vec::new();
    let mut down_violations: Vec<f64> = Vec::new();
    for _ in 0..100 {
        let c = random_deterministic_coupling(&mut rng);
        let moves = all_single_moves(&c, EPS);
        let raising: Vec<f64> = moves
            .iter()
            .filter(|m| m.3 > 0.0)
            .map(|m| m.2 / m.3)
            .collect();
        let lowering: Vec<f64> = moves
            .iter()
            .filter(|m| m.3 < 0.0)
            .map(|m| m.2 / m.3)
            .collect();

        if let Ok(up) = ebim::perturb_up(&c, EPS) {
            let (x, tgt) = diff_move(&c, &up);
            let chosen = moves
                .iter()
                .find(|m| m.0 == x && m.1 == tgt)
                .expect("chosen move is in the enumeration");
            assert!(chosen.3 > 0.0, "raising move must raise H(T)");
            let best = raising.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let gap = best - chosen.2 / chosen.3;
            up_checked += 1;
            if gap > RATIO_TOL {
                up_violations.push(gap);
            }
        }
        if let Ok(down) = ebim::perturb_down(&c, EPS) {
            let (x, tgt) = diff_move(&c, &down);
            let chosen = moves
                .iter()
                .find(|m| m.0 == x && m.1 == tgt)
                .expect("chosen move is in the enumeration");
            assert!(chosen.3 < 0.0, "lowering move must lower H(T)");
            let worst = lowering.iter().copied().fold(f64::INFINITY, f64::min);
            let gap = chosen.2 / chosen.3 - worst;
            down_checked += 1;
            if gap > RATIO_TOL {
                down_violations.push(gap);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "took {elapsed:?}, budget 10 s"
    );
    println!(
        "criterion 4 (theorem-3 oracle): raising {}/{up_checked} within tolerance, \
         lowering {}/{down_checked} within tolerance ({elapsed:?})",
        up_checked - up_violations.len(),
        down_checked - down_violations.len(),
    );
    assert!(
        up_violations.is_empty() && down_violations.is_empty(),
        "criterion 4 (theorem-3 oracle): FAIL — ratio gaps beyond 1e-3: raising {up_violations:?}, lowering {down_violations:?}"
    );
    println!("criterion 4 (theorem-3 oracle): PASS");
}

/// Criterion 5 — frontier shape for p = [0.7, 0.2, 0.1]: touches I = R at
/// all five deterministic rates, monotone non-decreasing, I <= R + 1e-9.
#[test]
fn c05_frontier_shape() {
    let p = Distribution::new(vec![0.7, 0.2, 0.1]).unwrap();
    let det_rates = [
        0.0,                // {123}
        0.4689955935892812, // {12|3}: H([.9 .1])
        0.7219280948873623, // {13|2}: H([.8 .2])
        0.8812908992306927, // {23|1}: H([.7 .3])
        1.1567796494470395, // {1|2|3}: H([.7 .2 .1])
    ];
    let mut grid: Vec<f64> = det_rates.to_vec();
    let mut r = 0.05;
    while r < 1.2 {
        grid.push(r);
        r += 0.05;
    }
    let points = ebim::frontier_sweep(&p, &grid).unwrap();
    for pair in points.windows(2) {
        assert!(
            pair[1].info.0 >= pair[0].info.0 - 1e-12,
            "frontier not monotone at rate {}",
            pair[1].rate.0
        );
    }
    for pt in &points {
        assert!(pt.info.0 <= pt.rate.0 + 1e-9, "I > R at rate {}", pt.rate.0);
    }
    for &rg in &det_rates {
        let pt = points.iter().find(|pt| pt.rate.0 == rg).unwrap();
        assert!(
            (pt.info.0 - rg).abs() < 1e-9,
            "frontier does not touch I = R at {rg}: I = {}",
            pt.info.0
        );
    }
    println!("criterion 5 (frontier shape): PASS");
}

/// Criterion 6 — information decomposition on 1000 random composable chains
/// (alphabets <= 16): |I(X;Y) - I(X;T) - I(Y;T) + I(T;X,Y)| < 1e-9 and the
/// lower bound with the achieved code entropy holds. < 5 s.
#[test]
fn c06_chain_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    for _ in 0..1000 {
        let n = rng.gen_range(2..=16);
        let k = rng.gen_range(2..=16);
        let m = rng.gen_range(2..=16);
        let mut xt = vec![vec![0.0; k]; n];
        let mut total = 0.0;
        for row in xt.iter_mut() {
            for cell in row.iter_mut() {
                *cell = rng.gen::<f64>() + 1e-4;
                total += *cell;
            }
        }
        for row in xt.iter_mut() {
            for cell in row.iter_mut() {
                *cell /= total;
            }
        }
        let p_xt = Coupling::new(xt).unwrap();
        let p_t = p_xt.col_marginal();
        let mut ty = vec![vec![0.0; m]; k];
        for (t, row) in ty.iter_mut().enumerate() {
            let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-4).collect();
            let sum: f64 = w.iter().sum();
            for (y, cell) in row.iter_mut().enumerate() {
                *cell = p_t.get(t) * w[y] / sum;
            }
        }
        let p_ty = Coupling::new(ty).unwrap();

        let audit = pipeline::lemma1_audit(&p_xt, &p_ty).unwrap();
        let residual = audit.i_xy.0 - audit.i_xt.0 - audit.i_ty.0 + audit.i_t_xy.0;
        assert!(residual.abs() < 1e-9, "identity residual {residual}");
        let h_t = p_t.entropy().0;
        assert!(
            audit.i_xy.0 >= audit.i_xt.0 + audit.i_ty.0 - h_t - 1e-9,
            "achieved-rate lower bound violated"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!("criterion 6 (chain decomposition, 1000 chains): PASS ({elapsed:?})");
}

/// Criterion 7 — greedy MEC sanity on 100 random 30-symbol marginal pairs:
/// marginals preserved to 1e-9, entropy sandwich holds, and the greedy joint
/// beats the independent joint on at least 95 of 100 instances.
#[test]
fn c07_mec_sanity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut greedy_wins = 0;
    for _ in 0..100 {
        let p = dirichlet(&mut rng, 30);
        let q = dirichlet(&mut rng, 30);
        let indep = p.entropy().0 + q.entropy().0;
        let mut beats = true;
        for method in [CouplerMethod::MaxSeeking, CouplerMethod::ZeroSeeking] {
            let c = mec::couple(&p, &q, method);
            let (rows, cols) = c.marginals();
            for (a, b) in rows.probs().iter().zip(p.probs()) {
                assert!((a - b).abs() < 1e-9, "row marginal drift");
            }
            for (a, b) in cols.probs().iter().zip(q.probs()) {
                assert!((a - b).abs() < 1e-9, "column marginal drift");
            }
            let h = mec::joint_entropy(&c).0;
            assert!(h >= p.entropy().0.max(q.entropy().0) - 1e-9);
            assert!(h <= indep + 1e-9);
            beats &= h < indep;
        }
        if beats {
            greedy_wins += 1;
        }
    }
    assert!(
        greedy_wins >= 95,
        "greedy beat independence on only {greedy_wins}/100 instances"
    );
    println!("criterion 7 (MEC sanity): PASS ({greedy_wins}/100 strictly below independence)");
}

/// Criterion 8 — soft policy at beta = 1e-4 is greedy: its per-state argmax
/// matches an independent hard-max value iteration on the stock layout.
#[test]
fn c08_soft_q_limit() {
    let env = GridWorld::default_8x8();
    let start = Instant::now();
    let policy = mdp::soft_q_iteration(&env, 1e-4, 1e-10).unwrap();

    // independent plain value iteration oracle
    let n = env.num_states();
    let active: Vec<bool> = (0..n)
        .map(|s| !env.is_terminal(s) && !env.is_obstacle(env.cell_of(s)))
        .collect();
    let mut q = vec![[0.0f64; 4]; n];
    loop {
        let mut next = vec![[0.0f64; 4]; n];
        let mut delta = 0.0f64;
        for s in 0..n {
            if !active[s] {
                continue;
            }
            for a in 0..4 {
                let mut value = 0.0;
                for (prob, s2) in env.transitions(s, ACTIONS[a]) {
                    let future = if active[s2] {
                        q[s2].iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    } else {
                        0.0
                    };
                    value += prob * (env.reward_entering(s2) + env.gamma * future);
                }
                next[s][a] = value;
                delta = delta.max((value - q[s][a]).abs());
            }
        }
        q = next;
        if delta <= 1e-10 {
            break;
        }
    }

    let mut mismatches = 0;
    for s in 0..n {
        if !active[s] {
            continue;
        }
        let hard = (0..4).max_by(|&a, &b| q[s][a].total_cmp(&q[s][b])).unwrap();
        let soft = (0..4)
            .max_by(|&a, &b| policy.pi[s][a].total_cmp(&policy.pi[s][b]))
            .unwrap();
        if hard != soft {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(mismatches, 0, "{mismatches} argmax mismatches");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!("criterion 8 (soft-Q greedy limit): PASS ({elapsed:?})");
}

struct Trend<'a> {
    label: &'a str,
    soft_inversions: usize,
    hard_inversions: usize,
}

/// Monotonicity check allowing statistically insignificant inversions:
/// `lo` should not exceed `hi`; an inversion inside the 95% two-sample CI is
/// soft, beyond it hard.
fn check_pair(trend: &mut Trend, lo: f64, hi: f64, se: f64) {
    if hi >= lo {
        return;
    }
    if lo - hi <= 1.96 * se {
        trend.soft_inversions += 1;
    } else {
        trend.hard_inversions += 1;
        eprintln!(
            "{}: significant inversion {lo:.4} -> {hi:.4} (se {se:.4})",
            trend.label
        );
    }
}

fn two_prop_se(p1: f64, p2: f64, n: f64) -> f64 {
    let pooled = (p1 + p2) / 2.0;
    (pooled * (1.0 - pooled) * 2.0 / n).sqrt().max(1e-12)
}

/// Criterion 9 — desk-scale trade-off with 64 messages, 200 episodes per
/// cell, beta in {e^-6, e^-4.5, e^-3}, rates {1, 2, 3} bits:
/// (a) accuracy non-decreasing in beta at fixed rate and in rate at fixed
/// beta, (b) mean return non-increasing in beta, each allowing one
/// inversion inside a 95% CI, and (c) the EBIM encoder's accuracy at least
/// matches the uniform quantizer's in >= 7 of 9 cells. < 10 min.
#[test]
fn c09_mcg_tradeoff() {
    let env = GridWorld::default_8x8();
    let start = Instant::now();
    let betas = vec![(-6.0f64).exp(), (-4.5f64).exp(), (-3.0f64).exp()];
    let rates = vec![1.0, 2.0, 3.0];
    let episodes = 200usize;
    let base = SweepConfig {
        betas: betas.clone(),
        rates: rates.clone(),
        episodes,
        messages: 64,
        priority: 1.0,
        encoder: EncoderMethod::Alg1,
        coupler: CouplerMethod::MaxSeeking,
        seed: 9,
    };
    let alg1 = mcg::sweep(&env, &base).unwrap();
    let uniform = mcg::sweep(
        &env,
        &SweepConfig {
            encoder: EncoderMethod::Uniform,
            ..base.clone()
        },
    )
    .unwrap();
    let cell = |cells: &[mcg::SweepCell], bi: usize, ri: usize| -> mcg::SweepCell {
        cells[bi * rates.len() + ri].clone()
    };
    let n = episodes as f64;

    // (a) accuracy monotone in beta and in rate
    let mut acc_trend = Trend {
        label: "accuracy",
        soft_inversions: 0,
        hard_inversions: 0,
    };
    for ri in 0..rates.len() {
        for bi in 0..betas.len() - 1 {
            let lo = cell(&alg1, bi, ri).accuracy;
            let hi = cell(&alg1, bi + 1, ri).accuracy;
            check_pair(&mut acc_trend, lo, hi, two_prop_se(lo, hi, n));
        }
    }
    for bi in 0..betas.len() {
        for ri in 0..rates.len() - 1 {
            let lo = cell(&alg1, bi, ri).accuracy;
            let hi = cell(&alg1, bi, ri + 1).accuracy;
            check_pair(&mut acc_trend, lo, hi, two_prop_se(lo, hi, n));
        }
    }
    assert_eq!(
        acc_trend.hard_inversions, 0,
        "significant accuracy inversions"
    );
    assert!(
        acc_trend.soft_inversions <= 1,
        "{} accuracy inversions within CI (1 allowed)",
        acc_trend.soft_inversions
    );

    // (b) mean return non-increasing in beta at fixed rate
    let mut ret_trend = Trend {
        label: "return",
        soft_inversions: 0,
        hard_inversions: 0,
    };
    for ri in 0..rates.len() {
        for bi in 0..betas.len() - 1 {
            let a = cell(&alg1, bi, ri);
            let b = cell(&alg1, bi + 1, ri);
            // non-increasing: check the reversed pair
            let se = ((a.return_stddev.powi(2) + b.return_stddev.powi(2)) / n)
                .sqrt()
                .max(1e-12);
            check_pair(&mut ret_trend, b.mean_return, a.mean_return, se);
        }
    }
    assert_eq!(
        ret_trend.hard_inversions, 0,
        "significant return inversions"
    );
    assert!(
        ret_trend.soft_inversions <= 1,
        "{} return inversions within CI (1 allowed)",
        ret_trend.soft_inversions
    );

    // (c) EBIM encoder at least matches the uniform quantizer in >= 7/9 cells
    let mut ebim_wins = 0;
    for bi in 0..betas.len() {
        for ri in 0..rates.len() {
            let a = cell(&alg1, bi, ri).accuracy;
            let u = cell(&uniform, bi, ri).accuracy;
            if a >= u {
                ebim_wins += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        ebim_wins >= 7,
        "EBIM encoder matched/beat the quantizer in only {ebim_wins}/9 cells"
    );
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "took {elapsed:?}, budget 10 min"
    );
    println!(
        "criterion 9 (MCG trade-off): PASS (acc inversions {} soft/0 hard, \
         return inversions {} soft/0 hard, EBIM >= quantizer in {ebim_wins}/9 cells, {elapsed:?})",
        acc_trend.soft_inversions, ret_trend.soft_inversions
    );
}

/// Criterion 10 — tri-party consistency: across 100 seeded episodes the
/// receiver's replayed final belief is bitwise identical to the source's,
/// with no desyncs and no fallback steps.
#[test]
fn c10_triparty_consistency() {
    let env = GridWorld::default_8x8();
    let policy = mdp::soft_q_iteration(&env, (-4.5f64).exp(), 1e-9).unwrap();
    let msg = MessageConfig::uniform(64, 1.0, 2.0);
    let opts = ProtocolOptions::default();
    for episode in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mcg::mix_seed(&[10, episode]));
        let true_message = rng.gen_range(0..64);
        let result = mcg::run_episode(&env, &policy, &msg, &opts, true_message, &mut rng)
            .expect("no consistency errors");
        assert_eq!(result.fallback_steps, 0, "fallback fired");
        assert_eq!(
            result.source_final_belief.len(),
            result.receiver_final_belief.len()
        );
        for (s, r) in result
            .source_final_belief
            .iter()
            .zip(&result.receiver_final_belief)
        {
            assert_eq!(
                s.to_bits(),
                r.to_bits(),
                "belief mismatch in episode {episode}"
            );
        }
    }
    println!("criterion 10 (tri-party consistency, 100 episodes): PASS");
}

/// Criterion 11 — CLI determinism: the same invocation with the same seed
/// produces byte-identical output files, and emitted couplings re-validate
/// on load.
#[test]
fn c11_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_mecbkit");
    let dir = tempfile::tempdir().unwrap();
    let dist_path = dir.path().join("dist.json");
    std::fs::write(&dist_path, r#"{"probs":[0.4,0.3,0.2,0.1]}"#).unwrap();

    let out = dir.path().join("sweep.csv");
    let curves = dir.path().join("curves.csv");
    let run = || {
        let status = std::process::Command::new(bin)
            .args([
                "mcg",
                "sweep",
                "--betas",
                "0.05",
                "--rates",
                "2",
                "--episodes",
                "5",
                "--messages",
                "16",
                "--seed",
                "7",
                "--out",
            ])
            .arg(&out)
            .arg("--curves")
            .arg(&curves)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let bytes = |p: &std::path::Path| std::fs::read(p).unwrap();
    run();
    let (sweep_first, curves_first) = (bytes(&out), bytes(&curves));
    run();
    assert_eq!(sweep_first, bytes(&out), "sweep.csv not byte-identical");
    assert_eq!(
        curves_first,
        bytes(&curves),
        "curves.csv not byte-identical"
    );

    // solve output round-trips through validation
    let coupling_path = dir.path().join("coupling.json");
    let status = std::process::Command::new(bin)
        .args(["ebim", "solve", "--rate", "1.2", "--dist"])
        .arg(&dist_path)
        .arg("--out")
        .arg(&coupling_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&coupling_path).unwrap();
    let coupling: Coupling = serde_json::from_str(&text).unwrap();
    assert!((coupling.mutual_information().0 - 1.1567796494470395).abs() < 1e-9);

    // byte-identical repeat of the solve as well
    let coupling_path2 = dir.path().join("coupling2.json");
    let status = std::process::Command::new(bin)
        .args(["ebim", "solve", "--rate", "1.2", "--dist"])
        .arg(&dist_path)
        .arg("--out")
        .arg(&coupling_path2)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(bytes(&coupling_path), bytes(&coupling_path2));
    println!("criterion 11 (CLI determinism): PASS");
}
