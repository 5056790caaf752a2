//! Episodic grid-world MDP and maximum-entropy policy learning.
//!
//! The environment is a rectangular grid with a goal (+1), a trap (-1),
//! obstacle cells and slip noise: with probability `noise` the executed move
//! is deflected 90 degrees off the intended direction (either side equally
//! likely). Moves into walls or obstacles leave the agent in place.
//!
//! Policies come from soft Q-value iteration: the Bellman backup uses the
//! soft maximum `beta * ln sum exp(Q/beta)` instead of the hard max, and the
//! extracted policy is `softmax(Q(s,.)/beta)`, so larger `beta` buys extra
//! per-state action entropy at the cost of discounted return.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::probdist::Distribution;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100_000;

/// The four grid moves, in fixed index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Left,
    Right,
    Up,
    Down,
}

pub const ACTIONS: [Action; 4] = [Action::Left, Action::Right, Action::Up, Action::Down];

impl Action {
    pub fn index(self) -> usize {
        match self {
            Action::Left => 0,
            Action::Right => 1,
            Action::Up => 2,
            Action::Down => 3,
        }
    }

    pub fn from_index(i: usize) -> Action {
        ACTIONS[i]
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Left => (0, -1),
            Action::Right => (0, 1),
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
        }
    }

    /// The two directions 90 degrees off this one, in fixed order.
    fn perpendicular(self) -> [Action; 2] {
        match self {
            Action::Left | Action::Right => [Action::Up, Action::Down],
            Action::Up | Action::Down => [Action::Left, Action::Right],
        }
    }
}

fn default_step_cap() -> usize {
    200
}

/// Grid layout and dynamics. Cells are `[row, col]` with row 0 at the top.
///
/// Loads from JSON like
/// `{"width":8,"height":8,"start":[7,0],"goal":[0,7],"trap":[1,7],
///   "obstacles":[[5,0],...],"noise":0.1,"gamma":0.95}`
/// (optional `"step_cap"`, default 200), re-validating on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawGridWorld")]
pub struct GridWorld {
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub trap: (usize, usize),
    pub obstacles: Vec<(usize, usize)>,
    pub noise: f64,
    pub gamma: f64,
    #[serde(default = "default_step_cap")]
    pub step_cap: usize,
}

#[derive(Deserialize)]
struct RawGridWorld {
    width: usize,
    height: usize,
    start: (usize, usize),
    goal: (usize, usize),
    trap: (usize, usize),
    #[serde(default)]
    obstacles: Vec<(usize, usize)>,
    noise: f64,
    gamma: f64,
    #[serde(default = "default_step_cap")]
    step_cap: usize,
}

impl TryFrom<RawGridWorld> for GridWorld {
    type Error = Error;
    fn try_from(raw: RawGridWorld) -> Result<Self> {
        let env = GridWorld {
            width: raw.width,
            height: raw.height,
            start: raw.start,
            goal: raw.goal,
            trap: raw.trap,
            obstacles: raw.obstacles,
            noise: raw.noise,
            gamma: raw.gamma,
            step_cap: raw.step_cap,
        };
        env.validate()?;
        Ok(env)
    }
}

/// Result of one environment transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepOutcome {
    pub next_state: usize,
    pub reward: f64,
    pub done: bool,
}

impl GridWorld {
    /// The stock 8x8 layout: start bottom-left, goal top-right, trap right
    /// below the goal, and two offset walls forcing a winding route.
    pub fn default_8x8() -> GridWorld {
        GridWorld {
            width: 8,
            height: 8,
            start: (7, 0),
            goal: (0, 7),
            trap: (1, 7),
            obstacles: vec![
                (5, 0),
                (5, 1),
                (5, 2),
                (5, 3),
                (5, 4),
                (5, 5),
                (2, 2),
                (2, 3),
                (2, 4),
                (2, 5),
                (2, 6),
                (2, 7),
            ],
            noise: 0.1,
            gamma: 0.95,
            step_cap: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain("grid must be nonempty".into()));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::Domain(format!(
                "noise must be in [0,1), got {}",
                self.noise
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Domain(format!(
                "gamma must be in (0,1], got {}",
                self.gamma
            )));
        }
        if self.step_cap == 0 {
            return Err(Error::Domain("step cap must be positive".into()));
        }
        let in_bounds = |c: (usize, usize)| c.0 < self.height && c.1 < self.width;
        for (name, cell) in [
            ("start", self.start),
            ("goal", self.goal),
            ("trap", self.trap),
        ] {
            if !in_bounds(cell) {
                return Err(Error::Domain(format!("{name} cell out of bounds")));
            }
        }
        if self.start == self.goal || self.start == self.trap || self.goal == self.trap {
            return Err(Error::Domain(
                "start, goal and trap must be distinct".into(),
            ));
        }
        for &cell in &self.obstacles {
            if !in_bounds(cell) {
                return Err(Error::Domain("obstacle cell out of bounds".into()));
            }
            if cell == self.start || cell == self.goal || cell == self.trap {
                return Err(Error::Domain(
                    "start, goal and trap cannot be obstacles".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.width * self.height
    }

    pub fn state_index(&self, cell: (usize, usize)) -> usize {
        cell.0 * self.width + cell.1
    }

    pub fn cell_of(&self, state: usize) -> (usize, usize) {
        (state / self.width, state % self.width)
    }

    pub fn start_state(&self) -> usize {
        self.state_index(self.start)
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        let cell = self.cell_of(state);
        cell == self.goal || cell == self.trap
    }

    pub fn is_obstacle(&self, cell: (usize, usize)) -> bool {
        self.obstacles.contains(&cell)
    }

    /// Destination of a raw move; walls and obstacles bounce back.
    fn moved(&self, state: usize, action: Action) -> usize {
        let (r, c) = self.cell_of(state);
        let (dr, dc) = action.delta();
        let nr = r as isize + dr;
        let nc = c as isize + dc;
        if nr < 0 || nr >= self.height as isize || nc < 0 || nc >= self.width as isize {
            return state;
        }
        let next = (nr as usize, nc as usize);
        if self.is_obstacle(next) {
            state
        } else {
            self.state_index(next)
        }
    }

    /// Reward for entering a cell.
    pub fn reward_entering(&self, state: usize) -> f64 {
        let cell = self.cell_of(state);
        if cell == self.goal {
            1.0
        } else if cell == self.trap {
            -1.0
        } else {
            0.0
        }
    }

    /// The three-outcome transition law of `(state, action)`:
    /// intended move with probability `1 - noise`, each perpendicular
    /// deflection with `noise / 2`.
    pub fn transitions(&self, state: usize, action: Action) -> [(f64, usize); 3] {
        let [p1, p2] = action.perpendicular();
        [
            (1.0 - self.noise, self.moved(state, action)),
            (self.noise / 2.0, self.moved(state, p1)),
            (self.noise / 2.0, self.moved(state, p2)),
        ]
    }

    /// Samples one transition. Terminal states cannot be stepped.
    pub fn step(&self, state: usize, action: Action, rng: &mut impl Rng) -> Result<StepOutcome> {
        if self.is_terminal(state) {
            return Err(Error::Protocol(format!(
                "cannot step terminal state {state}"
            )));
        }
        let u: f64 = rng.gen();
        let realized = if u < 1.0 - self.noise {
            action
        } else if u < 1.0 - self.noise / 2.0 {
            action.perpendicular()[0]
        } else {
            action.perpendicular()[1]
        };
        let next_state = self.moved(state, realized);
        Ok(StepOutcome {
            next_state,
            reward: self.reward_entering(next_state),
            done: self.is_terminal(next_state),
        })
    }
}

/// Soft maximum `beta * ln(sum exp(v / beta))`, computed with a max shift.
/// Always at least `max(v)` and at most `max(v) + beta * ln(len)`.
pub fn soft_max(values: &[f64], beta: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("soft_max of an empty list".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|&v| ((v - m) / beta).exp()).sum();
    Ok(m + beta * sum.ln())
}

/// A learned stochastic policy: per-state soft Q-values and the softmax
/// action distribution extracted from them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Policy {
    pub beta: f64,
    pub width: usize,
    pub height: usize,
    /// `num_states x 4` soft Q-values.
    pub q: Vec<Vec<f64>>,
    /// `num_states x 4` action probabilities.
    pub pi: Vec<Vec<f64>>,
}

impl Policy {
    pub fn action_distribution(&self, state: usize) -> Distribution {
        Distribution::new_unchecked(self.pi[state].clone())
    }

    /// Mean per-state action entropy in bits over non-terminal states.
    pub fn mean_action_entropy(&self, env: &GridWorld) -> f64 {
        let mut total = 0.0;
        let mut count = 0usize;
        for s in 0..env.num_states() {
            if env.is_terminal(s) || env.is_obstacle(env.cell_of(s)) {
                continue;
            }
            total += self.action_distribution(s).entropy().0;
            count += 1;
        }
        total / count as f64
    }
}

/// Soft Q-value iteration: repeats
/// `Q(s,a) <- sum_s' Pr(s'|s,a) (r(s') + gamma * softmax_beta Q(s',.))`
/// until the sup-norm change drops below `tol`, then extracts
/// `pi(.|s) = softmax(Q(s,.) / beta)`.
pub fn soft_q_iteration(env: &GridWorld, beta: f64, tol: f64) -> Result<Policy> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    env.validate()?;
    let n = env.num_states();
    let active: Vec<bool> = (0..n)
        .map(|s| !env.is_terminal(s) && !env.is_obstacle(env.cell_of(s)))
        .collect();

    let mut q = vec![[0.0f64; 4]; n];
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut next = vec![[0.0f64; 4]; n];
        let mut delta = 0.0f64;
        for s in 0..n {
            if !active[s] {
                continue;
            }
            for a in 0..4 {
                let mut value = 0.0;
                for (p, s2) in env.transitions(s, ACTIONS[a]) {
                    let future = if active[s2] {
                        soft_max(&q[s2], beta)?
                    } else {
                        0.0
                    };
                    value += p * (env.reward_entering(s2) + env.gamma * future);
                }
                next[s][a] = value;
                delta = delta.max((value - q[s][a]).abs());
            }
        }
        q = next;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(MAX_SWEEPS));
    }

    let mut pi = Vec::with_capacity(n);
    for qs in &q {
        let m = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = qs.iter().map(|&v| ((v - m) / beta).exp()).collect();
        let sum: f64 = weights.iter().sum();
        pi.push(weights.into_iter().map(|w| w / sum).collect());
    }
    Ok(Policy {
        beta,
        width: env.width,
        height: env.height,
        q: q.into_iter().map(|row| row.to_vec()).collect(),
        pi,
    })
}
