//! On-disk JSON formats: family files, decomposition reports, generation
//! specs and expected-skeleton sidecars.
//!
//! Real-mode matrices store entries as plain numbers, complex-mode as
//! `[re, im]` pairs. Floats are emitted in shortest form that reloads to
//! the identical double, so `load(save(x)) == x` holds bit-for-bit.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::BlockForm;
use crate::decomposition::{BlockKind, DecompositionReport};
use crate::error::{Error, Result};
use crate::family::{FieldMode, OperatorFamily};
use crate::numerics::{Mat, Scalar, TolerancePolicy};
use crate::oracle::{BlockSpec, ExpectedSkeleton, ScrambleSpec};

pub const FAMILY_FORMAT: &str = "anticanon/1";
pub const REPORT_FORMAT: &str = "anticanon-report/1";
pub const GENSPEC_FORMAT: &str = "anticanon-genspec/1";
pub const EXPECTED_FORMAT: &str = "anticanon-expected/1";

/// Write `contents` to `path` atomically: temp file in the same directory,
/// then rename. Partial files are never observable.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::MalformedInput(format!("not a file path: {}", path.display())))?;
    let tmp_name = format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => PathBuf::from(&tmp_name),
    };
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn mode_str(mode: FieldMode) -> &'static str {
    match mode {
        FieldMode::Real => "real",
        FieldMode::Complex => "complex",
    }
}

fn mode_from_str(s: &str) -> Result<FieldMode> {
    match s {
        "real" => Ok(FieldMode::Real),
        "complex" => Ok(FieldMode::Complex),
        other => Err(Error::MalformedInput(format!(
            "field_mode must be \"real\" or \"complex\", got \"{other}\""
        ))),
    }
}

fn scalar_to_value(z: Scalar, mode: FieldMode) -> Value {
    match mode {
        FieldMode::Real => serde_json::json!(z.re),
        FieldMode::Complex => serde_json::json!([z.re, z.im]),
    }
}

fn scalar_from_value(v: &Value, mode: FieldMode, location: &str) -> Result<Scalar> {
    match (mode, v) {
        (FieldMode::Real, Value::Number(x)) => {
            let re = x
                .as_f64()
                .ok_or_else(|| Error::MalformedInput(format!("{location}: not a finite number")))?;
            Ok(Scalar::new(re, 0.0))
        }
        (FieldMode::Complex, Value::Array(pair)) if pair.len() == 2 => {
            let take = |i: usize| -> Result<f64> {
                pair[i].as_f64().ok_or_else(|| {
                    Error::MalformedInput(format!("{location}[{i}]: not a finite number"))
                })
            };
            Ok(Scalar::new(take(0)?, take(1)?))
        }
        (FieldMode::Real, _) => Err(Error::MalformedInput(format!(
            "{location}: real-mode entries are plain numbers"
        ))),
        (FieldMode::Complex, _) => Err(Error::MalformedInput(format!(
            "{location}: complex-mode entries are [re, im] pairs"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Family files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatorEntry {
    pub name: String,
    pub matrix: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FamilyFile {
    pub format: String,
    pub field_mode: String,
    pub n: usize,
    pub operators: Vec<OperatorEntry>,
}

pub fn family_to_file(fam: &OperatorFamily) -> FamilyFile {
    let mode = fam.field_mode();
    let operators = fam
        .ops()
        .iter()
        .zip(fam.labels())
        .map(|(op, name)| OperatorEntry {
            name: name.clone(),
            matrix: (0..fam.dim())
                .map(|i| {
                    (0..fam.dim())
                        .map(|j| scalar_to_value(op[[i, j]], mode))
                        .collect()
                })
                .collect(),
        })
        .collect();
    FamilyFile {
        format: FAMILY_FORMAT.to_string(),
        field_mode: mode_str(mode).to_string(),
        n: fam.dim(),
        operators,
    }
}

pub fn family_from_file(file: &FamilyFile) -> Result<OperatorFamily> {
    if file.format != FAMILY_FORMAT {
        return Err(Error::UnknownFormatVersion(file.format.clone()));
    }
    let mode = mode_from_str(&file.field_mode)?;
    let n = file.n;
    let mut ops = Vec::with_capacity(file.operators.len());
    let mut labels = Vec::with_capacity(file.operators.len());
    for (k, entry) in file.operators.iter().enumerate() {
        if entry.matrix.len() != n {
            return Err(Error::MalformedInput(format!(
                "operators[{k}].matrix: {} rows, expected {n}",
                entry.matrix.len()
            )));
        }
        let mut m = Mat::zeros((n, n));
        for (i, row) in entry.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedInput(format!(
                    "operators[{k}].matrix[{i}]: {} columns, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                let loc = format!("operators[{k}].matrix[{i}][{j}]");
                let z = scalar_from_value(v, mode, &loc)?;
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { location: loc });
                }
                m[[i, j]] = z;
            }
        }
        ops.push(m);
        labels.push(entry.name.clone());
    }
    OperatorFamily::new(ops, labels, mode)
}

pub fn save_family(path: &Path, fam: &OperatorFamily) -> Result<()> {
    let file = family_to_file(fam);
    let mut text =
        serde_json::to_string_pretty(&file).map_err(|e| Error::MalformedInput(e.to_string()))?;
    text.push('\n');
    atomic_write(path, &text)
}

pub fn load_family(path: &Path) -> Result<OperatorFamily> {
    let text = fs::read_to_string(path)?;
    let file: FamilyFile = serde_json::from_str(&text)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))?;
    family_from_file(&file)
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

pub type ComplexEntry = [f64; 2];
pub type ComplexMatrix = Vec<Vec<ComplexEntry>>;

fn matrix_out(m: &Mat) -> ComplexMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[[i, j]].re, m[[i, j]].im])
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InputEcho {
    pub n: usize,
    pub field_mode: String,
    pub operators: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToleranceEcho {
    pub rel_zero: f64,
    pub eig_cluster: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlockEntry {
    pub kind: String,
    pub dim: usize,
    pub columns: Vec<usize>,
    pub support: Vec<String>,
    pub constants: BTreeMap<String, ComplexEntry>,
    pub invariance_leak: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub signature: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TupleGroupEntry {
    pub support: Vec<String>,
    pub constants: BTreeMap<String, ComplexEntry>,
    pub columns: Vec<usize>,
    pub block: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResidualEntry {
    pub anticommutation: f64,
    pub invariance: f64,
    pub constancy: f64,
    pub squared_offdiag: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalEntry {
    Kernel {
        block: usize,
    },
    SingleOperator {
        block: usize,
        operator: String,
        local_basis: ComplexMatrix,
        eigenvalues: Vec<ComplexEntry>,
        opposite_pairs: Vec<(usize, usize)>,
        residual: f64,
    },
    Clifford {
        block: usize,
        operators: Vec<String>,
        local_basis: ComplexMatrix,
        generators: Vec<ComplexMatrix>,
        normalizers: Vec<ComplexEntry>,
        recursion_depth: usize,
        residual: f64,
    },
    DegenerateSkipped {
        block: usize,
        note: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExitEcho {
    pub code: i32,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub format: String,
    pub input: InputEcho,
    pub tolerance: ToleranceEcho,
    pub basis: ComplexMatrix,
    pub basis_condition: f64,
    pub blocks: Vec<BlockEntry>,
    pub tuple_groups: Vec<TupleGroupEntry>,
    pub residuals: ResidualEntry,
    pub real_structure_claimed: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub canonical_forms: Option<Vec<CanonicalEntry>>,
    pub exit: ExitEcho,
}

pub fn kind_str(kind: BlockKind) -> &'static str {
    match kind {
        BlockKind::Kernel => "kernel",
        BlockKind::SingleOperator => "single_operator",
        BlockKind::Clifford => "clifford",
        BlockKind::Degenerate => "degenerate",
    }
}

pub fn report_to_file(
    rep: &DecompositionReport,
    forms: Option<&[BlockForm]>,
    fam: &OperatorFamily,
    tol: &TolerancePolicy,
    exit: ExitEcho,
) -> ReportFile {
    let name_of = |a: &usize| fam.label(*a).to_string();
    let blocks = rep
        .blocks
        .iter()
        .map(|b| BlockEntry {
            kind: kind_str(b.kind).to_string(),
            dim: b.dim(),
            columns: b.columns.clone(),
            support: b.support.iter().map(name_of).collect(),
            constants: b
                .constants
                .iter()
                .map(|(a, c)| (fam.label(*a).to_string(), [c.re, c.im]))
                .collect(),
            invariance_leak: b.invariance_leak,
            signature: b.signature,
        })
        .collect();
    let tuple_groups = rep
        .tuple_groups
        .iter()
        .map(|g| TupleGroupEntry {
            support: g.support.iter().map(name_of).collect(),
            constants: g
                .constants
                .iter()
                .map(|(a, c)| (fam.label(*a).to_string(), [c.re, c.im]))
                .collect(),
            columns: g.columns.clone(),
            block: g.block,
        })
        .collect();
    let canonical_forms = forms.map(|forms| {
        forms
            .iter()
            .enumerate()
            .map(|(bi, form)| match form {
                BlockForm::Kernel => CanonicalEntry::Kernel { block: bi },
                BlockForm::SingleOperator(f) => CanonicalEntry::SingleOperator {
                    block: bi,
                    operator: fam.label(f.operator).to_string(),
                    local_basis: matrix_out(&f.local_basis),
                    eigenvalues: f.eigenvalues.iter().map(|v| [v.re, v.im]).collect(),
                    opposite_pairs: f.opposite_pairs.clone(),
                    residual: f.residual,
                },
                BlockForm::Clifford(f) => CanonicalEntry::Clifford {
                    block: bi,
                    operators: f
                        .operators
                        .iter()
                        .map(|a| fam.label(*a).to_string())
                        .collect(),
                    local_basis: matrix_out(&f.local_basis),
                    generators: f.generators.iter().map(matrix_out).collect(),
                    normalizers: f.normalizers.iter().map(|v| [v.re, v.im]).collect(),
                    recursion_depth: f.trace.depth(),
                    residual: f.residual,
                },
                BlockForm::DegenerateSkipped { note } => CanonicalEntry::DegenerateSkipped {
                    block: bi,
                    note: note.clone(),
                },
            })
            .collect()
    });

    ReportFile {
        format: REPORT_FORMAT.to_string(),
        input: InputEcho {
            n: fam.dim(),
            field_mode: mode_str(fam.field_mode()).to_string(),
            operators: fam.labels().to_vec(),
        },
        tolerance: ToleranceEcho {
            rel_zero: tol.rel_zero,
            eig_cluster: tol.eig_cluster,
            scale: tol.scale,
        },
        basis: matrix_out(&rep.p),
        basis_condition: rep.p_condition,
        blocks,
        tuple_groups,
        residuals: ResidualEntry {
            anticommutation: rep.residuals.anticommutation,
            invariance: rep.residuals.invariance,
            constancy: rep.residuals.constancy,
            squared_offdiag: rep.residuals.squared_offdiag,
        },
        real_structure_claimed: rep.real_structure_claimed,
        warnings: rep.warnings.clone(),
        canonical_forms,
        exit,
    }
}

pub fn save_report(path: &Path, report: &ReportFile) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(report).map_err(|e| Error::MalformedInput(e.to_string()))?;
    text.push('\n');
    atomic_write(path, &text)
}

pub fn load_report(path: &Path) -> Result<ReportFile> {
    let text = fs::read_to_string(path)?;
    let report: ReportFile = serde_json::from_str(&text)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))?;
    if report.format != REPORT_FORMAT {
        return Err(Error::UnknownFormatVersion(report.format));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Generation specs and expected skeletons
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenBlockEntry {
    pub kind: String,
    pub dim: usize,
    /// 1-based operator index for single/degenerate blocks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub operator: Option<usize>,
    /// 1-based operator indices for clifford blocks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub support: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub constant: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub constants: Option<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScrambleEntry {
    #[serde(default = "default_cond_max")]
    pub cond_max: f64,
    #[serde(default)]
    pub noise: f64,
}

fn default_cond_max() -> f64 {
    50.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateSpecFile {
    pub format: String,
    pub field_mode: String,
    /// Number of operators N.
    pub operators: usize,
    #[serde(default)]
    pub seed: u64,
    pub blocks: Vec<GenBlockEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scramble: Option<ScrambleEntry>,
}

pub struct ParsedGenerateSpec {
    pub specs: Vec<BlockSpec>,
    pub n_ops: usize,
    pub field_mode: FieldMode,
    pub seed: u64,
    pub scramble: Option<ScrambleSpec>,
}

fn one_based(index: usize, n_ops: usize, location: &str) -> Result<usize> {
    if index == 0 || index > n_ops {
        return Err(Error::MalformedInput(format!(
            "{location}: operator index {index} out of range 1..={n_ops}"
        )));
    }
    Ok(index - 1)
}

pub fn parse_generate_spec(
    file: &GenerateSpecFile,
    seed_override: Option<u64>,
) -> Result<ParsedGenerateSpec> {
    if file.format != GENSPEC_FORMAT {
        return Err(Error::UnknownFormatVersion(file.format.clone()));
    }
    let mode = mode_from_str(&file.field_mode)?;
    let n_ops = file.operators;
    if file.blocks.is_empty() {
        return Err(Error::InvalidSpec("spec contains no blocks".into()));
    }
    let seed = seed_override.unwrap_or(file.seed);
    let mut specs = Vec::with_capacity(file.blocks.len());
    for (k, entry) in file.blocks.iter().enumerate() {
        let loc = format!("blocks[{k}]");
        let spec = match entry.kind.as_str() {
            "kernel" => BlockSpec::kernel(entry.dim),
            "single" => {
                let op = entry.operator.ok_or_else(|| {
                    Error::MalformedInput(format!("{loc}: single blocks need \"operator\""))
                })?;
                let c = entry.constant.as_ref().ok_or_else(|| {
                    Error::MalformedInput(format!("{loc}: single blocks need \"constant\""))
                })?;
                let c = scalar_from_value(c, mode, &format!("{loc}.constant"))?;
                BlockSpec::single(one_based(op, n_ops, &loc)?, entry.dim, c)
            }
            "clifford" => {
                let support = entry.support.as_ref().ok_or_else(|| {
                    Error::MalformedInput(format!("{loc}: clifford blocks need \"support\""))
                })?;
                let constants = entry.constants.as_ref().ok_or_else(|| {
                    Error::MalformedInput(format!("{loc}: clifford blocks need \"constants\""))
                })?;
                if support.len() != constants.len() {
                    return Err(Error::MalformedInput(format!(
                        "{loc}: support and constants lengths differ"
                    )));
                }
                let sup: Vec<usize> = support
                    .iter()
                    .map(|&a| one_based(a, n_ops, &loc))
                    .collect::<Result<_>>()?;
                let cs: Vec<Scalar> = constants
                    .iter()
                    .enumerate()
                    .map(|(i, v)| scalar_from_value(v, mode, &format!("{loc}.constants[{i}]")))
                    .collect::<Result<_>>()?;
                BlockSpec::clifford(&sup, entry.dim, &cs)
            }
            "degenerate" => {
                let op = entry.operator.ok_or_else(|| {
                    Error::MalformedInput(format!("{loc}: degenerate blocks need \"operator\""))
                })?;
                BlockSpec::degenerate(one_based(op, n_ops, &loc)?, entry.dim)
            }
            other => {
                return Err(Error::MalformedInput(format!(
                    "{loc}: unknown block kind \"{other}\""
                )));
            }
        };
        specs.push(spec.with_seed(seed.wrapping_add(k as u64)));
    }
    let scramble = file.scramble.as_ref().map(|s| ScrambleSpec {
        conj_cond_max: s.cond_max,
        perm_seed: seed,
        noise: s.noise,
    });
    Ok(ParsedGenerateSpec {
        specs,
        n_ops,
        field_mode: mode,
        seed,
        scramble,
    })
}

pub fn load_generate_spec(path: &Path) -> Result<GenerateSpecFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExpectedBlockEntry {
    pub kind: String,
    /// 1-based operator indices.
    pub support: Vec<usize>,
    pub constants: BTreeMap<String, ComplexEntry>,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExpectedSkeletonFile {
    pub format: String,
    pub n: usize,
    pub operators: usize,
    pub blocks: Vec<ExpectedBlockEntry>,
}

pub fn skeleton_to_file(skeleton: &ExpectedSkeleton) -> ExpectedSkeletonFile {
    ExpectedSkeletonFile {
        format: EXPECTED_FORMAT.to_string(),
        n: skeleton.n,
        operators: skeleton.n_ops,
        blocks: skeleton
            .blocks
            .iter()
            .map(|b| ExpectedBlockEntry {
                kind: kind_str(b.kind).to_string(),
                support: b.support.iter().map(|a| a + 1).collect(),
                constants: b
                    .constants
                    .iter()
                    .map(|(a, c)| (format!("{}", a + 1), [c.re, c.im]))
                    .collect(),
                dim: b.dim,
            })
            .collect(),
    }
}

pub fn skeleton_from_file(file: &ExpectedSkeletonFile) -> Result<ExpectedSkeleton> {
    if file.format != EXPECTED_FORMAT {
        return Err(Error::UnknownFormatVersion(file.format.clone()));
    }
    let kind_of = |s: &str| -> Result<BlockKind> {
        match s {
            "kernel" => Ok(BlockKind::Kernel),
            "single_operator" => Ok(BlockKind::SingleOperator),
            "clifford" => Ok(BlockKind::Clifford),
            "degenerate" => Ok(BlockKind::Degenerate),
            other => Err(Error::MalformedInput(format!("unknown block kind {other}"))),
        }
    };
    let blocks = file
        .blocks
        .iter()
        .map(|b| {
            let support: BTreeSet<usize> = b
                .support
                .iter()
                .map(|&a| one_based(a, file.operators, "expected block"))
                .collect::<Result<_>>()?;
            let constants: BTreeMap<usize, Scalar> = b
                .constants
                .iter()
                .map(|(a, c)| {
                    let idx: usize = a
                        .parse()
                        .map_err(|_| Error::MalformedInput(format!("bad constant key {a}")))?;
                    Ok((
                        one_based(idx, file.operators, "expected constants")?,
                        Scalar::new(c[0], c[1]),
                    ))
                })
                .collect::<Result<_>>()?;
            Ok(crate::oracle::ExpectedBlock {
                kind: kind_of(&b.kind)?,
                support,
                constants,
                dim: b.dim,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpectedSkeleton {
        n: file.n,
        n_ops: file.operators,
        blocks,
    })
}

pub fn save_skeleton(path: &Path, skeleton: &ExpectedSkeleton) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&skeleton_to_file(skeleton))
        .map_err(|e| Error::MalformedInput(e.to_string()))?;
    text.push('\n');
    atomic_write(path, &text)
}

pub fn load_skeleton(path: &Path) -> Result<ExpectedSkeleton> {
    let text = fs::read_to_string(path)?;
    let file: ExpectedSkeletonFile = serde_json::from_str(&text)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))?;
    skeleton_from_file(&file)
}

/// Sidecar path for the expected skeleton written next to a generated
/// family file: `fam.json` → `fam.expected.json`.
pub fn expected_sidecar_path(family_path: &Path) -> PathBuf {
    match family_path.extension().and_then(|e| e.to_str()) {
        Some("json") => family_path.with_extension("expected.json"),
        _ => {
            let mut name = family_path.as_os_str().to_os_string();
            name.push(".expected.json");
            PathBuf::from(name)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::test_fixtures::pauli_pair;
    use crate::numerics::re;

    #[test]
    fn family_file_roundtrip_complex() {
        let fam = pauli_pair();
        let file = family_to_file(&fam);
        let back = family_from_file(&file).unwrap();
        assert_eq!(back.dim(), 2);
        for a in 0..2 {
            assert_eq!(crate::numerics::max_abs_diff(fam.op(a), back.op(a)), 0.0);
        }
        // and the serialized text reloads to the identical structure
        let text = serde_json::to_string(&file).unwrap();
        let file2: FamilyFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file, file2);
    }

    #[test]
    fn family_file_real_mode_entries_are_plain_numbers() {
        let m = Mat::from_shape_fn((1, 1), |_| re(0.1 + 0.2));
        let fam = OperatorFamily::with_default_labels(vec![m], FieldMode::Real).unwrap();
        let file = family_to_file(&fam);
        assert!(file.operators[0].matrix[0][0].is_number());
        let back = family_from_file(&file).unwrap();
        assert_eq!(back.op(0)[[0, 0]].re, 0.1 + 0.2);
    }

    #[test]
    fn family_file_rejects_mode_mismatch_with_location() {
        let fam = pauli_pair();
        let mut file = family_to_file(&fam);
        file.field_mode = "real".into();
        let err = family_from_file(&file).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("matrix[0][0]"), "got: {msg}");
    }

    #[test]
    fn family_file_rejects_wrong_version_and_shape() {
        let fam = pauli_pair();
        let mut file = family_to_file(&fam);
        file.format = "anticanon/9".into();
        assert!(matches!(
            family_from_file(&file),
            Err(Error::UnknownFormatVersion(_))
        ));
        let mut file = family_to_file(&fam);
        file.n = 3;
        assert!(family_from_file(&file).is_err());
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        atomic_write(&path, "{}\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "{}\n");
        // no temp litter
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn expected_sidecar_path_rules() {
        assert_eq!(
            expected_sidecar_path(Path::new("fam.json")),
            PathBuf::from("fam.expected.json")
        );
        assert_eq!(
            expected_sidecar_path(Path::new("out/fam")),
            PathBuf::from("out/fam.expected.json")
        );
    }
}
