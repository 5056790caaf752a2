//! Train maximum-entropy policies on the stock 8x8 grid at a low and a high
//! temperature and render both: the greedy arrow per cell plus the mean
//! per-state action entropy that the coding game later exploits as channel
//! capacity.
//!
//! ```bash
//! cargo run --example gridworld_policy
//! ```

use mecb::mdp::{soft_q_iteration, GridWorld};

const ARROWS: [char; 4] = ['<', '>', '^', 'v'];

fn render(env: &GridWorld, policy: &mecb::mdp::Policy) {
    for r in 0..env.height {
        let mut line = String::new();
        for c in 0..env.width {
            let cell = (r, c);
            let ch = if cell == env.goal {
                'G'
            } else if cell == env.trap {
                'T'
            } else if env.is_obstacle(cell) {
                '#'
            } else if cell == env.start {
                'S'
            } else {
                let s = env.state_index(cell);
                let best = (0..4)
                    .max_by(|&a, &b| policy.pi[s][a].total_cmp(&policy.pi[s][b]))
                    .unwrap();
                ARROWS[best]
            };
            line.push(ch);
            line.push(' ');
        }
        println!("  {line}");
    }
}

fn main() -> mecb::Result<()> {
    let env = GridWorld::default_8x8();
    for log_beta in [-6.0, -3.0] {
        let beta = f64::exp(log_beta);
        let policy = soft_q_iteration(&env, beta, 1e-9)?;
        println!(
            "log beta = {log_beta}: mean action entropy {:.3} bits/state",
            policy.mean_action_entropy(&env)
        );
        render(&env, &policy);
        println!();
    }
    println!("S start, G goal(+1), T trap(-1), # obstacle; arrows show the greedy action");
    Ok(())
}
