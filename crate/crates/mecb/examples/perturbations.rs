//! The two optimal mass moves around a deterministic mapping: one opens a
//! fresh code column to raise H(T) (buying information), the other drains
//! the lightest column into the heaviest to lower H(T) (saving rate).
//!
//! ```bash
//! cargo run --example perturbations
//! ```

use mecb::ebim::{perturb_down, perturb_up};
use mecb::probdist::Coupling;

fn show(label: &str, c: &Coupling) {
    let (_, p_t) = c.marginals();
    println!(
        "{label}: H(T) = {:.6}, I(X;T) = {:.6}",
        p_t.entropy().0,
        c.mutual_information().0
    );
    for row in c.table() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("  [{}]", cells.join(" "));
    }
    println!();
}

fn main() -> mecb::Result<()> {
    // the mapping {0,1} {2} {3} over p_X = [0.4 0.3 0.2 0.1]
    let base = Coupling::new(vec![
        vec![0.4, 0.0, 0.0],
        vec![0.3, 0.0, 0.0],
        vec![0.0, 0.2, 0.0],
        vec![0.0, 0.0, 0.1],
    ])?;
    show("deterministic base", &base);

    let eps = 0.05;
    show(
        &format!("perturb_up, eps = {eps}"),
        &perturb_up(&base, eps)?,
    );
    show(
        &format!("perturb_down, eps = {eps}"),
        &perturb_down(&base, eps)?,
    );

    println!("the raising move splits the smallest normalized cell (row 1 of the");
    println!("0.7 column) into a new column; the lowering move shifts mass from the");
    println!("lightest column (0.1) into the heaviest (0.7) along its own row.");
    Ok(())
}
