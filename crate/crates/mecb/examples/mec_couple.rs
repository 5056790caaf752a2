//! Compare the two greedy minimum-entropy couplers against the independent
//! joint on random marginal pairs.
//!
//! ```bash
//! cargo run --example mec_couple
//! ```

use mecb::mec::{couple, joint_entropy, CouplerMethod};
use mecb::probdist::{Coupling, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Distribution {
    let w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().ln()).collect();
    Distribution::renormalized(&w).unwrap()
}

fn main() -> mecb::Result<()> {
    // the worked two-symbol pair first
    let p = Distribution::new(vec![0.6, 0.4])?;
    let q = Distribution::new(vec![0.7, 0.3])?;
    let c = couple(&p, &q, CouplerMethod::MaxSeeking);
    println!("max-seeking coupling of [0.6 0.4] with [0.7 0.3]:");
    for row in c.table() {
        println!("  {row:?}");
    }
    println!("joint entropy = {:.5} bits\n", joint_entropy(&c).0);

    // then the average over random instances
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 100;
    let n = 16;
    let mut sums = [0.0f64; 3]; // independent, max-seeking, zero-seeking
    for _ in 0..trials {
        let p = dirichlet(&mut rng, n);
        let q = dirichlet(&mut rng, n);
        sums[0] += joint_entropy(&Coupling::product(&p, &q)).0;
        sums[1] += joint_entropy(&couple(&p, &q, CouplerMethod::MaxSeeking)).0;
        sums[2] += joint_entropy(&couple(&p, &q, CouplerMethod::ZeroSeeking)).0;
    }
    println!("average joint entropy over {trials} random {n}-symbol pairs:");
    println!("  independent joint   {:.3} bits", sums[0] / trials as f64);
    println!("  max-seeking greedy  {:.3} bits", sums[1] / trials as f64);
    println!("  zero-seeking greedy {:.3} bits", sums[2] / trials as f64);
    Ok(())
}
