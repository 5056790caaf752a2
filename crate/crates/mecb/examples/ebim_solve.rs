//! Solve the entropy-bounded information maximization problem for one input
//! distribution at several rate budgets, comparing all four encoders.
//!
//! ```bash
//! cargo run --example ebim_solve
//! ```

use mecb::ebim::{solve, EncoderMethod};
use mecb::probdist::Distribution;

fn cells(c: &mecb::probdist::Coupling) -> String {
    // group input symbols by their code cell for a compact display
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); c.cols()];
    for (x, row) in c.table().iter().enumerate() {
        if let Some(t) = row.iter().position(|&v| v > 0.0) {
            groups[t].push(x);
        }
    }
    groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let inner: Vec<String> = g.iter().map(|x| x.to_string()).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> mecb::Result<()> {
    let p = Distribution::new(vec![0.4, 0.3, 0.2, 0.1])?;
    println!(
        "input p_X = {:?},  H(X) = {:.5} bits\n",
        p.probs(),
        p.entropy().0
    );

    let methods = [
        EncoderMethod::Alg1,
        EncoderMethod::Uniform,
        EncoderMethod::GreedyFill,
        EncoderMethod::Brute,
    ];
    for rate in [0.5, 0.9, 1.2, 2.0] {
        println!("rate budget R = {rate} bits");
        for method in methods {
            let coupling = solve(&p, rate, method)?;
            let (_, p_t) = coupling.marginals();
            println!(
                "  {:<12} I(X;T) = {:.5}  H(T) = {:.5}  cells {}",
                method.to_string(),
                coupling.mutual_information().0,
                p_t.entropy().0,
                cells(&coupling),
            );
        }
        println!();
    }
    Ok(())
}
