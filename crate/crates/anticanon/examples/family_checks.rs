//! Validate a family against the algebraic hypotheses: pairwise
//! anti-commutation, per-operator diagonalizability, linear independence,
//! and the squared-family commutation self-check.
//!
//! Run with: cargo run --example family_checks

use anticanon::family::{
    anticommutation_residual, check_linear_independence, check_squared_commutes, classify_family,
    is_anticommuting, FieldMode, OperatorFamily,
};
use anticanon::numerics::{re, Mat, Scalar};

fn main() -> anticanon::Result<()> {
    // σ₁ and σ₂: the smallest nontrivial anti-commuting pair.
    let mut s1 = Mat::zeros((2, 2));
    s1[[0, 1]] = re(1.0);
    s1[[1, 0]] = re(1.0);
    let mut s2 = Mat::zeros((2, 2));
    s2[[0, 1]] = Scalar::new(0.0, -1.0);
    s2[[1, 0]] = Scalar::new(0.0, 1.0);

    let fam = OperatorFamily::with_default_labels(vec![s1, s2], FieldMode::Complex)?;
    let tol = fam.tolerance();

    println!("pairwise anti-commutator residuals (scaled):");
    let residuals = anticommutation_residual(&fam, &tol);
    for a in 0..fam.len() {
        for b in 0..fam.len() {
            print!("  {:9.2e}", residuals[[a, b]]);
        }
        println!();
    }
    println!(
        "accepted as anti-commuting: {}",
        is_anticommuting(&fam, &tol)
    );

    for (a, class) in classify_family(&fam, &tol)?.iter().enumerate() {
        println!("{}: {class:?}", fam.label(a));
    }
    println!(
        "linear independence: {:?}",
        check_linear_independence(&fam, &tol)
    );
    println!(
        "squared-family commutation self-check: {:.2e}",
        check_squared_commutes(&fam, &tol)
    );

    // A nilpotent member switches the family into the degenerate regime:
    // its square vanishes while the operator does not.
    let mut nil = Mat::zeros((2, 2));
    nil[[0, 1]] = re(1.0);
    let degenerate = OperatorFamily::with_default_labels(vec![nil], FieldMode::Real)?;
    let dtol = degenerate.tolerance();
    println!(
        "\nnilpotent singleton classifies as {:?}",
        classify_family(&degenerate, &dtol)?[0]
    );
    Ok(())
}
