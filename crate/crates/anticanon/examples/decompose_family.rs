//! Decompose a scrambled anti-commuting family into its invariant blocks:
//! common kernel, single-operator subspaces, and Clifford representations.
//!
//! Run with: cargo run --example decompose_family

use anticanon::decomposition::{decompose, verify_block_invariance};
use anticanon::family::FieldMode;
use anticanon::numerics::re;
use anticanon::oracle::{build_family, scramble, BlockSpec, ScrambleSpec};

fn main() -> anticanon::Result<()> {
    // Known structure: a kernel line, a subspace owned by operator 3, and
    // two Clifford blocks, one of them three-generator.
    let specs = vec![
        BlockSpec::kernel(1),
        BlockSpec::single(2, 2, re(9.0)),
        BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(2.0)]),
        BlockSpec::clifford(&[0, 1, 2], 4, &[re(1.0), re(1.0), re(3.0)]),
    ];
    let (clean, skeleton) = build_family(&specs, 3, FieldMode::Complex)?;
    let fam = scramble(
        &clean,
        &ScrambleSpec {
            conj_cond_max: 40.0,
            perm_seed: 123,
            noise: 0.0,
        },
    )?;
    println!(
        "scrambled family: {} operators on a {}-dimensional space",
        fam.len(),
        fam.dim()
    );

    let tol = fam.tolerance();
    let rep = decompose(&fam, &tol)?;
    println!("\nblocks:");
    for (i, block) in rep.blocks.iter().enumerate() {
        let support: Vec<&str> = block.support.iter().map(|a| fam.label(*a)).collect();
        let constants: Vec<String> = block
            .constants
            .iter()
            .map(|(a, c)| format!("{}²={:+.2}", fam.label(*a), c.re))
            .collect();
        println!(
            "  {i}: {:?} dim {} support {{{}}} {}",
            block.kind,
            block.dim(),
            support.join(", "),
            constants.join(" ")
        );
    }
    println!("\nresiduals: {:?}", rep.residuals);
    println!(
        "re-verified invariance leak: {:.2e}",
        verify_block_invariance(&rep, &fam, &tol)
    );
    println!(
        "expected block count from the generator: {}",
        skeleton.blocks.len()
    );
    Ok(())
}
