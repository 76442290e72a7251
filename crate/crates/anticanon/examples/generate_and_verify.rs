//! Oracle round-trip: build a family with known block structure, scramble
//! it by conjugation, decompose, and compare against the expectation.
//!
//! Run with: cargo run --example generate_and_verify

use anticanon::decomposition::decompose;
use anticanon::family::FieldMode;
use anticanon::oracle::{
    build_family, compare_reports, paper_example_specs, scramble, ScrambleSpec,
};

fn main() -> anticanon::Result<()> {
    // The bundled 20-dimensional, five-operator worked example.
    let (specs, n_ops) = paper_example_specs();
    let (clean, skeleton) = build_family(&specs, n_ops, FieldMode::Complex)?;
    println!(
        "built family: N = {}, n = {}, {} expected blocks",
        n_ops,
        clean.dim(),
        skeleton.blocks.len()
    );

    for seed in [1u64, 2, 3] {
        let scrambled = scramble(
            &clean,
            &ScrambleSpec {
                conj_cond_max: 50.0,
                perm_seed: seed,
                noise: 0.0,
            },
        )?;
        let tol = scrambled.tolerance();
        let rep = decompose(&scrambled, &tol)?;
        let (ok, diff) = compare_reports(&skeleton, &rep, &tol);
        println!(
            "scramble seed {seed}: {} blocks recovered, match = {ok}",
            rep.blocks.len()
        );
        if !ok {
            println!("{diff}");
        }
    }
    Ok(())
}
