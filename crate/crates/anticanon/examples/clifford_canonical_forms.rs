//! Full pipeline on a scrambled family: decompose, then construct
//! canonical forms on every block via the halving recursion.
//!
//! Run with: cargo run --example clifford_canonical_forms

use anticanon::canonical::{apply_canonical, global_canonical_residual, BlockForm};
use anticanon::decomposition::decompose;
use anticanon::family::FieldMode;
use anticanon::numerics::re;
use anticanon::oracle::{build_family, scramble, BlockSpec, ScrambleSpec};

fn main() -> anticanon::Result<()> {
    // One four-generator block (minimal dimension 4) next to a kernel line
    // and a two-generator block.
    let specs = vec![
        BlockSpec::kernel(1),
        BlockSpec::clifford(&[0, 1], 2, &[re(2.0), re(1.0)]),
        BlockSpec::clifford(&[0, 1, 2, 3], 4, &[re(1.0), re(1.0), re(1.0), re(4.0)]),
    ];
    let (clean, _) = build_family(&specs, 4, FieldMode::Complex)?;
    let fam = scramble(
        &clean,
        &ScrambleSpec {
            conj_cond_max: 30.0,
            perm_seed: 77,
            noise: 0.0,
        },
    )?;

    let tol = fam.tolerance();
    let rep = decompose(&fam, &tol)?;
    let forms = apply_canonical(&rep, &fam, &tol)?;

    for (bi, form) in forms.iter().enumerate() {
        match form {
            BlockForm::Kernel => println!("block {bi}: kernel, nothing to construct"),
            BlockForm::SingleOperator(f) => {
                let vals: Vec<String> = f
                    .eigenvalues
                    .iter()
                    .map(|v| format!("{:+.2}", v.re))
                    .collect();
                println!(
                    "block {bi}: single operator {}, eigenvalues ({})",
                    fam.label(f.operator),
                    vals.join(", ")
                );
            }
            BlockForm::Clifford(f) => {
                println!(
                    "block {bi}: {} generators, recursion depth {}, residual {:.2e}",
                    f.generators.len(),
                    f.trace.depth(),
                    f.residual
                );
                for (k, gen) in f.generators.iter().enumerate() {
                    let label = fam.label(f.operators[k]);
                    println!("  {label} = {:.3} x", f.normalizers[k].re);
                    for i in 0..gen.nrows() {
                        let row: Vec<String> = (0..gen.ncols())
                            .map(|j| {
                                let z = gen[[i, j]];
                                match (z.re, z.im) {
                                    (0.0, 0.0) => " 0".into(),
                                    (r, 0.0) => format!("{:+.0}", r),
                                    (0.0, im) => format!("{:+.0}i", im),
                                    (r, im) => format!("{r:+.0}{im:+.0}i"),
                                }
                            })
                            .collect();
                        println!("      [{}]", row.join(" "));
                    }
                }
            }
            BlockForm::DegenerateSkipped { note } => println!("block {bi}: skipped ({note})"),
        }
    }
    println!(
        "\nglobal canonical residual: {:.2e}",
        global_canonical_residual(&forms, &fam, &tol)
    );
    Ok(())
}
