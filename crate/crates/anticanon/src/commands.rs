//! File-based command entry points shared by the CLI binary and tests.
//!
//! Exit codes are a stable contract: 0 ok, 1 hypothesis violation,
//! 2 degenerate regime, 3 I/O or format error.

use std::fmt::Write as _;
use std::path::Path;

use crate::canonical::apply_canonical;
use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::family::{
    check_linear_independence, check_squared_commutes, classify_family, is_anticommuting,
    max_anticommutation_residual, IndependenceCheck, OperatorClass, OperatorFamily,
};
use crate::files::{
    self, expected_sidecar_path, kind_str, load_family, load_generate_spec, parse_generate_spec,
    report_to_file, save_family, save_report, save_skeleton, ExitEcho,
};
use crate::numerics::TolerancePolicy;
use crate::oracle::{build_family, scramble};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS_VIOLATION: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_IO_OR_FORMAT: i32 = 3;

/// Result of one command: process exit code and a human-readable summary.
#[derive(Debug)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub summary: String,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::MalformedInput(_)
        | Error::UnknownFormatVersion(_)
        | Error::NonFinite { .. }
        | Error::DimensionMismatch { .. }
        | Error::DuplicateLabel(_)
        | Error::ComplexEntryInRealMode { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidTolerance(_)
        | Error::NonSquare { .. } => EXIT_IO_OR_FORMAT,
        _ => EXIT_HYPOTHESIS_VIOLATION,
    }
}

fn failure(e: &Error) -> CommandOutcome {
    CommandOutcome {
        exit_code: exit_code_for(e),
        summary: format!("error: {e}"),
    }
}

/// One user-facing knob: `--tol` overrides `rel_zero`; the cluster radius
/// keeps its 100× ratio.
fn tolerance_for(fam: &OperatorFamily, tol_override: Option<f64>) -> Result<TolerancePolicy> {
    let scale = fam.norm_scale();
    match tol_override {
        None => Ok(TolerancePolicy::with_scale(scale)),
        Some(rel_zero) => TolerancePolicy::new(rel_zero, rel_zero * 100.0, scale),
    }
}

struct CheckReport {
    exit_code: i32,
    summary: String,
    classes: Vec<OperatorClass>,
}

fn run_checks(fam: &OperatorFamily, tol: &TolerancePolicy) -> Result<CheckReport> {
    let mut out = String::new();
    let anti = max_anticommutation_residual(fam, tol);
    let anticommuting = is_anticommuting(fam, tol);
    writeln!(
        out,
        "anti-commutation: max scaled residual {anti:.3e} → {}",
        if anticommuting { "ok" } else { "VIOLATED" }
    )
    .unwrap();

    let classes = classify_family(fam, tol)?;
    let mut any_square_only = false;
    let mut any_unsupported = false;
    for (a, class) in classes.iter().enumerate() {
        let line = match class {
            OperatorClass::Diagonalizable { eigvec_condition } => {
                format!("diagonalizable (eigenvector condition {eigvec_condition:.3e})")
            }
            OperatorClass::SquareDiagonalizableOnly { kernel_gap } => {
                any_square_only = true;
                format!("square-diagonalizable only (kernel gap {kernel_gap})")
            }
            OperatorClass::Unsupported => {
                any_unsupported = true;
                "neither it nor its square is diagonalizable".to_string()
            }
        };
        writeln!(out, "operator {}: {line}", fam.label(a)).unwrap();
    }

    let indep = check_linear_independence(fam, tol);
    writeln!(
        out,
        "linear independence: {}",
        match indep {
            IndependenceCheck::Independent => "ok",
            IndependenceCheck::Dependent => "DEPENDENT",
            IndependenceCheck::ExemptSquareZero => "not applicable (square-zero member)",
        }
    )
    .unwrap();

    if anticommuting {
        let sq = check_squared_commutes(fam, tol);
        writeln!(
            out,
            "squared-family commutation self-check: max scaled residual {sq:.3e}"
        )
        .unwrap();
    }

    let exit_code = if !anticommuting || any_unsupported {
        EXIT_HYPOTHESIS_VIOLATION
    } else if any_square_only {
        EXIT_DEGENERATE
    } else {
        EXIT_OK
    };
    Ok(CheckReport {
        exit_code,
        summary: out,
        classes,
    })
}

/// Validate a family file against the hypotheses.
pub fn cmd_check(input: &Path, tol_override: Option<f64>) -> CommandOutcome {
    let run = || -> Result<CheckReport> {
        let fam = load_family(input)?;
        let tol = tolerance_for(&fam, tol_override)?;
        run_checks(&fam, &tol)
    };
    match run() {
        Ok(check) => CommandOutcome {
            exit_code: check.exit_code,
            summary: check.summary,
        },
        Err(e) => failure(&e),
    }
}

/// Decompose a family file and write the report; optionally attach
/// canonical forms.
pub fn cmd_decompose(
    input: &Path,
    output: &Path,
    canon: bool,
    tol_override: Option<f64>,
) -> CommandOutcome {
    let run = || -> Result<CommandOutcome> {
        let fam = load_family(input)?;
        let tol = tolerance_for(&fam, tol_override)?;
        let check = run_checks(&fam, &tol)?;
        if check.exit_code == EXIT_HYPOTHESIS_VIOLATION {
            return Ok(CommandOutcome {
                exit_code: EXIT_HYPOTHESIS_VIOLATION,
                summary: format!("{}\nhypotheses violated; no report written", check.summary),
            });
        }
        let rep = decompose(&fam, &tol)?;
        let forms = if canon {
            Some(apply_canonical(&rep, &fam, &tol)?)
        } else {
            None
        };

        let degenerate = rep.has_degenerate_block()
            || check
                .classes
                .iter()
                .any(|c| matches!(c, OperatorClass::SquareDiagonalizableOnly { .. }));
        let exit_code = if degenerate { EXIT_DEGENERATE } else { EXIT_OK };

        let mut diagnostics = rep.warnings.clone();
        if degenerate {
            diagnostics
                .push("degenerate regime: some square vanishes where its operator does not".into());
        }
        let report = report_to_file(
            &rep,
            forms.as_deref(),
            &fam,
            &tol,
            ExitEcho {
                code: exit_code,
                diagnostics,
            },
        );
        save_report(output, &report)?;

        let mut summary = String::new();
        writeln!(summary, "n = {}, operators = {}", fam.dim(), fam.len()).unwrap();
        for (i, b) in rep.blocks.iter().enumerate() {
            let support: Vec<&str> = b.support.iter().map(|a| fam.label(*a)).collect();
            let sig = match b.signature {
                Some((p, q)) => format!(", signature ({p},{q})"),
                None => String::new(),
            };
            writeln!(
                summary,
                "block {i}: {} dim {} support {{{}}}{sig}",
                kind_str(b.kind),
                b.dim(),
                support.join(",")
            )
            .unwrap();
        }
        writeln!(
            summary,
            "residuals: anticommutation {:.3e}, invariance {:.3e}, constancy {:.3e}",
            rep.residuals.anticommutation, rep.residuals.invariance, rep.residuals.constancy
        )
        .unwrap();
        if let Some(forms) = &forms {
            let built = forms
                .iter()
                .filter(|f| {
                    matches!(
                        f,
                        crate::canonical::BlockForm::Clifford(_)
                            | crate::canonical::BlockForm::SingleOperator(_)
                    )
                })
                .count();
            let skipped = forms
                .iter()
                .filter(|f| matches!(f, crate::canonical::BlockForm::DegenerateSkipped { .. }))
                .count();
            writeln!(
                summary,
                "canonical forms: {built} constructed, {skipped} degenerate block(s) skipped"
            )
            .unwrap();
        }
        writeln!(summary, "report written to {}", output.display()).unwrap();
        Ok(CommandOutcome { exit_code, summary })
    };
    match run() {
        Ok(outcome) => outcome,
        Err(e) => failure(&e),
    }
}

/// Generate a family file (plus expected-skeleton sidecar) from a spec.
pub fn cmd_generate(spec_path: &Path, output: &Path, seed: Option<u64>) -> CommandOutcome {
    let run = || -> Result<CommandOutcome> {
        let file = load_generate_spec(spec_path)?;
        let parsed = parse_generate_spec(&file, seed)?;
        let (fam, skeleton) = build_family(&parsed.specs, parsed.n_ops, parsed.field_mode)?;
        let fam = match &parsed.scramble {
            Some(s) => scramble(&fam, s)?,
            None => fam,
        };
        save_family(output, &fam)?;
        let sidecar = expected_sidecar_path(output);
        save_skeleton(&sidecar, &skeleton)?;
        let summary = format!(
            "generated {} operators on dimension {} (seed {})\nfamily:   {}\nexpected: {}",
            fam.len(),
            fam.dim(),
            parsed.seed,
            output.display(),
            sidecar.display()
        );
        Ok(CommandOutcome {
            exit_code: EXIT_OK,
            summary,
        })
    };
    match run() {
        Ok(outcome) => outcome,
        Err(e) => failure(&e),
    }
}

/// Convenience used by integration tests: load a family file and its
/// sidecar, decompose, and compare against the skeleton.
pub fn verify_generated(family_path: &Path, tol_override: Option<f64>) -> Result<(bool, String)> {
    let fam = load_family(family_path)?;
    let skeleton = files::load_skeleton(&expected_sidecar_path(family_path))?;
    let tol = tolerance_for(&fam, tol_override)?;
    let rep = decompose(&fam, &tol)?;
    Ok(crate::oracle::compare_reports(&skeleton, &rep, &tol))
}
