//! Canonical form for a pair of anti-commuting operators:
//! A = diag(λI, −λI), B = [[0, D], [I, 0]], B² = diag(D, D).
//!
//! Run with: cargo run --example pair_canonical_form

use anticanon::canonical::pair_canonical_form;
use anticanon::numerics::{re, Mat, TolerancePolicy};

fn print_matrix(name: &str, m: &Mat) {
    println!("{name}:");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[[i, j]];
                if z.im == 0.0 {
                    format!("{:+5.1}", z.re)
                } else {
                    format!("{:+.1}{:+.1}i", z.re, z.im)
                }
            })
            .collect();
        println!("  [{}]", row.join(", "));
    }
}

fn main() -> anticanon::Result<()> {
    // A² = 4I and B exchanges the ±2 eigenspaces with weights 3 and 5.
    let mut a = Mat::zeros((4, 4));
    for (i, v) in [2.0, 2.0, -2.0, -2.0].iter().enumerate() {
        a[[i, i]] = re(*v);
    }
    let mut b = Mat::zeros((4, 4));
    b[[0, 2]] = re(3.0);
    b[[1, 3]] = re(5.0);
    b[[2, 0]] = re(1.0);
    b[[3, 1]] = re(1.0);

    let tol = TolerancePolicy::with_scale(5.0);
    let form = pair_canonical_form(&a, &b, &tol)?;

    println!("lambda = {:+.3}", form.lambda.re);
    let d: Vec<String> = form
        .d_values
        .iter()
        .map(|v| format!("{:+.3}", v.re))
        .collect();
    println!("D = diag({})", d.join(", "));
    print_matrix("canonical A", &form.canon_a);
    print_matrix("canonical B", &form.canon_b);
    print_matrix("canonical B²", &form.canon_b2);
    println!("conjugation residual: {:.2e}", form.residual);
    Ok(())
}
