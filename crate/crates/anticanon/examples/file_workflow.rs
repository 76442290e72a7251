//! The file-based workflow without the binary: save a family file, run the
//! check and decompose commands, and read the JSON report back.
//!
//! Run with: cargo run --example file_workflow

use anticanon::commands::{cmd_check, cmd_decompose};
use anticanon::family::{FieldMode, OperatorFamily};
use anticanon::files::{load_report, save_family};
use anticanon::numerics::{re, Mat};

fn main() -> anticanon::Result<()> {
    let dir = std::env::temp_dir().join("anticanon-file-workflow");
    std::fs::create_dir_all(&dir)?;

    // A real pair: σ₁ and the rotation J anti-commute with squares (I, −I).
    let mut s1 = Mat::zeros((2, 2));
    s1[[0, 1]] = re(1.0);
    s1[[1, 0]] = re(1.0);
    let mut j = Mat::zeros((2, 2));
    j[[0, 1]] = re(1.0);
    j[[1, 0]] = re(-1.0);
    let fam = OperatorFamily::with_default_labels(vec![s1, j], FieldMode::Real)?;

    let family_path = dir.join("family.json");
    save_family(&family_path, &fam)?;
    println!("wrote {}", family_path.display());

    let outcome = cmd_check(&family_path, None);
    println!(
        "\n$ anticanon check family.json   (exit {})",
        outcome.exit_code
    );
    print!("{}", outcome.summary);

    let report_path = dir.join("report.json");
    let outcome = cmd_decompose(&family_path, &report_path, true, None);
    println!(
        "\n$ anticanon decompose family.json -o report.json --canon   (exit {})",
        outcome.exit_code
    );
    print!("{}", outcome.summary);

    let report = load_report(&report_path)?;
    println!("\nreport says:");
    for block in &report.blocks {
        println!(
            "  {} dim {} support {:?} signature {:?}",
            block.kind, block.dim, block.support, block.signature
        );
    }
    println!(
        "  real structure claimed: {}",
        report.real_structure_claimed
    );
    Ok(())
}
