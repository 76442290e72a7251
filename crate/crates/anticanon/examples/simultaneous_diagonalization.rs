//! Simultaneously diagonalize a commuting family of diagonalizable
//! operators and verify the reconstruction.
//!
//! Run with: cargo run --example simultaneous_diagonalization

use anticanon::family::{FieldMode, OperatorFamily};
use anticanon::numerics::{frobenius_norm, inverse, re, Mat};
use anticanon::simdiag::{commutation_residual, simultaneous_diagonalize};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

fn diag(values: &[f64]) -> Mat {
    let mut d = Mat::zeros((values.len(), values.len()));
    for (i, v) in values.iter().enumerate() {
        d[[i, i]] = re(*v);
    }
    d
}

fn main() -> anticanon::Result<()> {
    // Conjugate three integer diagonals by one shared basis: the family
    // commutes by construction, but looks dense.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 5;
    let s = Mat::from_shape_fn((n, n), |_| {
        anticanon::Scalar::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let s_inv = inverse(&s)?;
    let grids = [
        vec![1.0, 1.0, 2.0, 2.0, 3.0],
        vec![5.0, 7.0, 5.0, 7.0, 5.0],
        vec![0.0, 0.0, 1.0, 1.0, 1.0],
    ];
    let ops: Vec<Mat> = grids.iter().map(|g| s.dot(&diag(g)).dot(&s_inv)).collect();
    let fam = OperatorFamily::with_default_labels(ops, FieldMode::Complex)?;
    let tol = fam.tolerance();

    println!(
        "commutation residual: {:.2e}",
        commutation_residual(&fam, &tol)
    );
    let result = simultaneous_diagonalize(&fam, &tol)?;
    println!("basis condition number: {:.2e}", result.p_condition);
    println!("off-diagonal residual:  {:.2e}", result.offdiag_residual);

    println!("\njoint eigenvalue tuples per basis column:");
    for j in 0..fam.dim() {
        let tuple: Vec<String> = result
            .column_tuple(j)
            .iter()
            .map(|v| format!("{:+.2}", v.re))
            .collect();
        println!("  column {j}: ({})", tuple.join(", "));
    }

    for a in 0..fam.len() {
        let mut d = Mat::zeros((fam.dim(), fam.dim()));
        for j in 0..fam.dim() {
            d[[j, j]] = result.diag_values[a][j];
        }
        let resid = frobenius_norm(&(fam.op(a).dot(&result.p) - result.p.dot(&d)));
        println!(
            "reconstruction residual for {}: {:.2e}",
            fam.label(a),
            resid
        );
    }
    Ok(())
}
