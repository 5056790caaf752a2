//! Rate-limited Markov coding game.
//!
//! A source holds a private message and may only signal it to the acting
//! agent through a rate-`R` channel; the agent in turn leaks information to
//! the receiver purely through its choice of MDP actions. All three parties
//! track the same message belief and run the same deterministic subroutine
//! each round:
//!
//! 1. `compress` the current belief with an EBIM encoder under rate `R`,
//!    giving `p_MT`;
//! 2. couple the code marginal with the marginal policy at the current
//!    state by greedy MEC, giving `p_TA`;
//! 3. compose `p_MA = sum_t p_MT(.,t) p_{A|T}(t)` and condition on the
//!    chosen action to update the belief.
//!
//! The source samples the signal `t` from `p_{T|M}(true message)`, the agent
//! samples its action from `p_{A|T}(t)`, and the receiver replays the whole
//! trajectory from the prior and decodes `argmax p_M`. Identical inputs give
//! bitwise-identical beliefs across parties, which the episode runner checks
//! every step.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ebim::{self, EncoderMethod};
use crate::mdp::{GridWorld, Policy, ACTIONS};
use crate::mec::{self, CouplerMethod};
use crate::pipeline::compose_chain;
use crate::probdist::{Coupling, Distribution};
use crate::{Error, Result};

/// Beliefs this small are flushed to zero before renormalizing; the protocol
/// guarantees the observed action has positive mass analytically, so only
/// float collapse can trigger the fallback.
const BELIEF_FLOOR: f64 = 1e-300;

/// Tolerance on source/agent belief agreement per step.
const DESYNC_TOLERANCE: f64 = 1e-9;

/// Message-side parameters of a game.
#[derive(Clone, Debug)]
pub struct MessageConfig {
    pub alphabet_size: usize,
    pub prior: Distribution,
    /// Weight of decoding accuracy in the combined score.
    pub priority: f64,
    /// Source-to-agent rate limit in bits per round.
    pub rate: f64,
}

impl MessageConfig {
    pub fn uniform(alphabet_size: usize, priority: f64, rate: f64) -> Self {
        Self {
            alphabet_size,
            prior: Distribution::uniform(alphabet_size),
            priority,
            rate,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alphabet_size == 0 {
            return Err(Error::Domain("message alphabet must be nonempty".into()));
        }
        if self.prior.alphabet_size() != self.alphabet_size {
            return Err(Error::Domain(format!(
                "prior covers {} messages, expected {}",
                self.prior.alphabet_size(),
                self.alphabet_size
            )));
        }
        if !(self.priority >= 0.0) {
            return Err(Error::Domain("message priority must be nonnegative".into()));
        }
        if !(self.rate >= 0.0) {
            return Err(Error::Domain("rate limit must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Encoder and coupler used by every party's coding step.
#[derive(Clone, Copy, Debug)]
pub struct ProtocolOptions {
    pub encoder: EncoderMethod,
    pub coupler: CouplerMethod,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            encoder: EncoderMethod::Alg1,
            coupler: CouplerMethod::MaxSeeking,
        }
    }
}

/// A message belief: a distribution over the message alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Belief {
    dist: Distribution,
}

impl Belief {
    pub fn from_prior(prior: Distribution) -> Self {
        Self { dist: prior }
    }

    pub fn dist(&self) -> &Distribution {
        &self.dist
    }

    pub fn probs(&self) -> &[f64] {
        self.dist.probs()
    }

    /// Highest-mass message, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs().iter().enumerate() {
            if p > self.probs()[best] {
                best = i;
            }
        }
        best
    }
}

/// The three tables of one coding round.
#[derive(Clone, Debug)]
pub struct CodingTables {
    /// `p_MT`: belief coupled with the compressed code.
    pub msg_code: Coupling,
    /// `p_TA`: code marginal coupled with the policy at the current state.
    pub code_action: Coupling,
    /// `p_MA`: the composed message/action coupling.
    pub msg_action: Coupling,
}

/// Compresses a belief under the rate budget. The belief is stably sorted by
/// descending mass first so every party derives the identical code book, then
/// the rows are mapped back to message order.
fn compress(belief: &Distribution, rate: f64, encoder: EncoderMethod) -> Result<Coupling> {
    let n = belief.alphabet_size();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        belief
            .get(b)
            .partial_cmp(&belief.get(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let sorted = Distribution::new_unchecked(order.iter().map(|&i| belief.get(i)).collect());
    let sorted_coupling = ebim::solve(&sorted, rate, encoder)?;
    let k = sorted_coupling.cols();
    let mut table = vec![vec![0.0; k]; n];
    for (pos, &msg) in order.iter().enumerate() {
        table[msg].clone_from_slice(&sorted_coupling.table()[pos]);
    }
    Ok(Coupling::new_unchecked(table))
}

/// One coding round: identical for source, agent and receiver.
pub fn coding_step(
    belief: &Belief,
    policy_at_state: &Distribution,
    rate: f64,
    opts: &ProtocolOptions,
) -> Result<CodingTables> {
    let msg_code = compress(&belief.dist, rate, opts.encoder)?;
    let p_t = msg_code.col_marginal();
    let code_action = mec::couple(&p_t, policy_at_state, opts.coupler);
    let msg_action = compose_chain(&msg_code, &code_action)?;
    Ok(CodingTables {
        msg_code,
        code_action,
        msg_action,
    })
}

/// Bayes update of the belief on an observed action: condition `p_MA` on the
/// action column, flush sub-`1e-300` dust and renormalize.
pub fn belief_update(msg_action: &Coupling, action: usize) -> Result<Belief> {
    if action >= msg_action.cols() {
        return Err(Error::Domain(format!("action {action} out of range")));
    }
    let mut col: Vec<f64> = msg_action.table().iter().map(|row| row[action]).collect();
    for v in col.iter_mut() {
        if *v < BELIEF_FLOOR {
            *v = 0.0;
        }
    }
    let sum: f64 = col.iter().sum();
    if sum <= 0.0 {
        return Err(Error::ZeroMassColumn(action));
    }
    for v in col.iter_mut() {
        *v /= sum;
    }
    Ok(Belief {
        dist: Distribution::new_unchecked(col),
    })
}

/// Outcome of one game episode.
#[derive(Clone, Debug, Serialize)]
pub struct EpisodeResult {
    /// `(state, chosen action)` per round.
    pub trajectory: Vec<(usize, usize)>,
    pub discounted_return: f64,
    /// Receiver's decode: argmax of the replayed final belief.
    pub decoded: usize,
    pub correct: bool,
    /// Source-side belief in the true message after each round.
    pub belief_trace: Vec<f64>,
    /// `discounted_return + priority * correct`.
    pub combined_score: f64,
    /// Rounds on which the zero-mass fallback fired (float collapse only).
    pub fallback_steps: usize,
    pub source_final_belief: Vec<f64>,
    pub receiver_final_belief: Vec<f64>,
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn update_with_fallback(
    belief: Belief,
    tables: &CodingTables,
    action: usize,
    fallbacks: &mut usize,
) -> Result<Belief> {
    match belief_update(&tables.msg_action, action) {
        Ok(updated) => Ok(updated),
        Err(Error::ZeroMassColumn(_)) => {
            eprintln!(
                "warning: observed action {action} has zero posterior mass; keeping previous belief"
            );
            *fallbacks += 1;
            Ok(belief)
        }
        Err(e) => Err(e),
    }
}

/// Plays one episode: the source signals, the agent acts, the environment
/// moves, all parties update beliefs, and the receiver decodes by replaying
/// the trajectory from the prior.
pub fn run_episode(
    env: &GridWorld,
    policy: &Policy,
    msg: &MessageConfig,
    opts: &ProtocolOptions,
    true_message: usize,
    rng: &mut impl Rng,
) -> Result<EpisodeResult> {
    msg.validate()?;
    if true_message >= msg.alphabet_size {
        return Err(Error::Protocol(format!(
            "true message {true_message} outside alphabet of {}",
            msg.alphabet_size
        )));
    }
    if policy.pi.len() != env.num_states() {
        return Err(Error::Protocol(
            "policy state space does not match the environment".into(),
        ));
    }

    let mut source = Belief::from_prior(msg.prior.clone());
    let mut agent = source.clone();
    let mut state = env.start_state();
    let mut trajectory = Vec::new();
    let mut belief_trace = Vec::new();
    let mut discounted_return = 0.0;
    let mut discount = 1.0;
    let mut fallback_steps = 0;

    loop {
        let policy_here = policy.action_distribution(state);

        // Source: compress its belief and signal t for the true message.
        let source_tables = coding_step(&source, &policy_here, msg.rate, opts)?;
        let signal_dist = source_tables.msg_code.conditional_row(true_message)?;
        let signal = sample_index(signal_dist.probs(), rng);

        // Agent: same computation on its own belief, then act given t.
        let agent_tables = coding_step(&agent, &policy_here, msg.rate, opts)?;
        let conditional_policy = agent_tables.code_action.conditional_row(signal)?;
        let action = sample_index(conditional_policy.probs(), rng);

        let outcome = env.step(state, ACTIONS[action], rng)?;
        trajectory.push((state, action));
        discounted_return += discount * outcome.reward;
        discount *= env.gamma;

        source = update_with_fallback(source, &source_tables, action, &mut fallback_steps)?;
        agent = update_with_fallback(agent, &agent_tables, action, &mut fallback_steps)?;

        let gap = source
            .probs()
            .iter()
            .zip(agent.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if gap > DESYNC_TOLERANCE {
            return Err(Error::Desync(gap));
        }

        belief_trace.push(source.probs()[true_message]);
        state = outcome.next_state;
        if outcome.done || trajectory.len() >= env.step_cap {
            break;
        }
    }

    let receiver = receiver_replay(policy, msg, opts, &trajectory)?;
    let decoded = receiver.argmax();
    let correct = decoded == true_message;
    Ok(EpisodeResult {
        discounted_return,
        decoded,
        correct,
        combined_score: discounted_return + msg.priority * (correct as u8 as f64),
        belief_trace,
        fallback_steps,
        source_final_belief: source.probs().to_vec(),
        receiver_final_belief: receiver.probs().to_vec(),
        trajectory,
    })
}

/// Receiver-side decoding: a pure function of the trajectory, prior, policy
/// and rate. Replays every `(state, action)` pair from the prior belief.
pub fn receiver_replay(
    policy: &Policy,
    msg: &MessageConfig,
    opts: &ProtocolOptions,
    trajectory: &[(usize, usize)],
) -> Result<Belief> {
    let mut belief = Belief::from_prior(msg.prior.clone());
    let mut fallbacks = 0;
    for &(state, action) in trajectory {
        let tables = coding_step(&belief, &policy.action_distribution(state), msg.rate, opts)?;
        belief = update_with_fallback(belief, &tables, action, &mut fallbacks)?;
    }
    Ok(belief)
}

// ---------------------------------------------------------------------------
// Experiment sweeps
// ---------------------------------------------------------------------------

/// Grid of a trade-off experiment.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub betas: Vec<f64>,
    pub rates: Vec<f64>,
    pub episodes: usize,
    pub messages: usize,
    pub priority: f64,
    pub encoder: EncoderMethod,
    pub coupler: CouplerMethod,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            betas: vec![(-6.0f64).exp(), (-4.5f64).exp(), (-3.0f64).exp()],
            rates: vec![1.0, 2.0, 3.0],
            episodes: 200,
            messages: 512,
            priority: 1.0,
            encoder: EncoderMethod::Alg1,
            coupler: CouplerMethod::MaxSeeking,
            seed: 0,
        }
    }
}

/// Aggregated metrics of one `(beta, rate)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub beta: f64,
    pub rate: f64,
    pub encoder: String,
    pub episodes: usize,
    pub mean_return: f64,
    /// Population standard deviation of the per-episode discounted return.
    pub return_stddev: f64,
    pub accuracy: f64,
    pub mean_combined: f64,
    pub steps_mean: f64,
    /// `H(M) / R`, the bottleneck tightness of this cell.
    pub compression_rate: f64,
    /// Mean belief in the true message after each round; episodes that end
    /// early hold their final belief.
    pub belief_curve: Vec<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic substream seed from structured parts.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ p))
}

/// Runs `episodes` games per `(beta, rate)` cell; episodes run in parallel
/// on independent substreams, and aggregation order is fixed, so the output
/// depends only on the configuration.
pub fn sweep(env: &GridWorld, cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    if cfg.betas.is_empty() || cfg.rates.is_empty() {
        return Err(Error::Domain(
            "sweep needs nonempty beta and rate grids".into(),
        ));
    }
    if cfg.episodes == 0 {
        return Err(Error::Domain("sweep needs at least one episode".into()));
    }
    let msg_entropy = (cfg.messages as f64).log2();
    let mut cells = Vec::with_capacity(cfg.betas.len() * cfg.rates.len());
    for (bi, &beta) in cfg.betas.iter().enumerate() {
        let policy = crate::mdp::soft_q_iteration(env, beta, 1e-9)?;
        for (ri, &rate) in cfg.rates.iter().enumerate() {
            let msg = MessageConfig::uniform(cfg.messages, cfg.priority, rate);
            let opts = ProtocolOptions {
                encoder: cfg.encoder,
                coupler: cfg.coupler,
            };
            let episodes: Vec<EpisodeResult> = (0..cfg.episodes)
                .into_par_iter()
                .map(|ep| {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[
                        cfg.seed, bi as u64, ri as u64, ep as u64,
                    ]));
                    let true_message = sample_index(msg.prior.probs(), &mut rng);
                    run_episode(env, &policy, &msg, &opts, true_message, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;

            let n = episodes.len() as f64;
            let mean_return = episodes.iter().map(|e| e.discounted_return).sum::<f64>() / n;
            let return_stddev = (episodes
                .iter()
                .map(|e| (e.discounted_return - mean_return).powi(2))
                .sum::<f64>()
                / n)
                .sqrt();
            let accuracy = episodes.iter().filter(|e| e.correct).count() as f64 / n;
            let mean_combined = episodes.iter().map(|e| e.combined_score).sum::<f64>() / n;
            let steps_mean = episodes.iter().map(|e| e.trajectory.len()).sum::<usize>() as f64 / n;
            let max_len = episodes
                .iter()
                .map(|e| e.belief_trace.len())
                .max()
                .unwrap_or(0);
            let belief_curve = (0..max_len)
                .map(|k| {
                    episodes
                        .iter()
                        .map(|e| e.belief_trace[k.min(e.belief_trace.len() - 1)])
                        .sum::<f64>()
                        / n
                })
                .collect();
            cells.push(SweepCell {
                beta,
                rate,
                encoder: cfg.encoder.to_string(),
                episodes: cfg.episodes,
                mean_return,
                return_stddev,
                accuracy,
                mean_combined,
                steps_mean,
                compression_rate: msg_entropy / rate,
                belief_curve,
            });
        }
    }
    Ok(cells)
}
