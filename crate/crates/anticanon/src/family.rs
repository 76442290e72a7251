//! Validation of an operator family against the algebraic hypotheses:
//! pairwise anti-commutation, per-operator diagonalizability class, kernel
//! identities, and the structural consistency checks that follow from them.

use ndarray::Array2;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::numerics::{
    eig, ensure_finite, frobenius_norm, kernel_basis, spectral_norm, Mat, Scalar, TolerancePolicy,
};

/// Scalar field the input family is declared over. Arithmetic is always
/// complex; `Real` constrains the inputs and enables signature reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Real,
    Complex,
}

/// An ordered family of N square matrices of equal size n, with labels.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    n: usize,
    ops: Vec<Mat>,
    labels: Vec<String>,
    field_mode: FieldMode,
}

impl OperatorFamily {
    pub fn new(ops: Vec<Mat>, labels: Vec<String>, field_mode: FieldMode) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::MalformedInput("family has no operators".into()));
        }
        if ops.len() != labels.len() {
            return Err(Error::MalformedInput(format!(
                "{} operators but {} labels",
                ops.len(),
                labels.len()
            )));
        }
        let n = ops[0].nrows();
        let mut seen = BTreeSet::new();
        for (op, label) in ops.iter().zip(&labels) {
            if op.nrows() != n || op.ncols() != n {
                return Err(Error::DimensionMismatch {
                    label: label.clone(),
                    rows: op.nrows(),
                    cols: op.ncols(),
                    n,
                });
            }
            ensure_finite(op, label)?;
            if !seen.insert(label.clone()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
            if field_mode == FieldMode::Real && op.iter().any(|z| z.im != 0.0) {
                return Err(Error::ComplexEntryInRealMode {
                    label: label.clone(),
                });
            }
        }
        Ok(Self {
            n,
            ops,
            labels,
            field_mode,
        })
    }

    /// Family with default labels `A1..AN`.
    pub fn with_default_labels(ops: Vec<Mat>, field_mode: FieldMode) -> Result<Self> {
        let labels = (1..=ops.len()).map(|i| format!("A{i}")).collect();
        Self::new(ops, labels, field_mode)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Mat] {
        &self.ops
    }

    pub fn op(&self, a: usize) -> &Mat {
        &self.ops[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn field_mode(&self) -> FieldMode {
        self.field_mode
    }

    /// Largest operator norm over the family; the tolerance scale.
    pub fn norm_scale(&self) -> f64 {
        self.ops.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Default tolerance policy for this family.
    pub fn tolerance(&self) -> TolerancePolicy {
        TolerancePolicy::with_scale(self.norm_scale())
    }

    /// Dimension of the common kernel ∩ₐ Ker(Aₐ), computed by stacking the
    /// operators vertically and extracting the null space.
    pub fn common_kernel_dim(&self, tol: &TolerancePolicy) -> usize {
        let mut stacked = Array2::zeros((self.n * self.ops.len(), self.n));
        for (a, op) in self.ops.iter().enumerate() {
            stacked
                .slice_mut(ndarray::s![a * self.n..(a + 1) * self.n, ..])
                .assign(op);
        }
        kernel_basis(&stacked, tol).ncols()
    }
}

/// Diagonalizability class of a single operator, with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorClass {
    /// Diagonalizable over C; `Ker(A²) = Ker(A)` holds.
    Diagonalizable { eigvec_condition: f64 },
    /// A itself is not diagonalizable but A² is; the kernel gap
    /// `dim Ker(A²) − dim Ker(A)` is positive.
    SquareDiagonalizableOnly { kernel_gap: usize },
    /// Neither A nor A² is diagonalizable to tolerance.
    Unsupported,
}

impl OperatorClass {
    pub fn is_diagonalizable(&self) -> bool {
        matches!(self, OperatorClass::Diagonalizable { .. })
    }
}

/// N×N matrix of scaled anti-commutator residuals
/// `‖AₐA_b + A_bAₐ‖_F / (scale² + 1)`, zero on the diagonal.
pub fn anticommutation_residual(fam: &OperatorFamily, tol: &TolerancePolicy) -> Array2<f64> {
    let n_ops = fam.len();
    let mut out = Array2::zeros((n_ops, n_ops));
    for a in 0..n_ops {
        for b in (a + 1)..n_ops {
            let anti = fam.op(a).dot(fam.op(b)) + fam.op(b).dot(fam.op(a));
            let r = tol.scaled_residual(frobenius_norm(&anti), 2);
            out[[a, b]] = r;
            out[[b, a]] = r;
        }
    }
    out
}

/// Largest off-diagonal entry of [`anticommutation_residual`]; the family
/// is accepted as anti-commuting when this is at most `tol.rel_zero`.
pub fn max_anticommutation_residual(fam: &OperatorFamily, tol: &TolerancePolicy) -> f64 {
    anticommutation_residual(fam, tol)
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn is_anticommuting(fam: &OperatorFamily, tol: &TolerancePolicy) -> bool {
    max_anticommutation_residual(fam, tol) <= tol.rel_zero
}

/// Classify one operator: diagonalizable, square-diagonalizable only, or
/// unsupported. The kernel gap reported for the middle class is
/// `dim Ker(A²) − dim Ker(A)`.
///
/// A positive kernel gap rules out diagonalizability outright and is
/// numerically robust (ranks are stable under conjugation), unlike
/// eigenvector-rank tests on perturbed Jordan blocks, where the defective
/// directions separate by the square root of the backward error.
pub fn classify_operator(a: &Mat, tol: &TolerancePolicy) -> Result<OperatorClass> {
    let squared = a.dot(a);
    let ker = kernel_basis(a, tol).ncols();
    let ker2 = kernel_basis(&squared, &tol.squared()).ncols();
    if ker2 > ker {
        let e2 = eig(&squared, &tol.squared())?;
        return Ok(if e2.ok {
            OperatorClass::SquareDiagonalizableOnly {
                kernel_gap: ker2 - ker,
            }
        } else {
            OperatorClass::Unsupported
        });
    }
    let e = eig(a, tol)?;
    if e.ok {
        return Ok(OperatorClass::Diagonalizable {
            eigvec_condition: e.condition,
        });
    }
    let e2 = eig(&squared, &tol.squared())?;
    if e2.ok {
        Ok(OperatorClass::SquareDiagonalizableOnly { kernel_gap: 0 })
    } else {
        Ok(OperatorClass::Unsupported)
    }
}

/// Classify every member of the family.
pub fn classify_family(fam: &OperatorFamily, tol: &TolerancePolicy) -> Result<Vec<OperatorClass>> {
    fam.ops()
        .iter()
        .map(|a| classify_operator(a, tol))
        .collect()
}

/// Consistency self-check: for an anti-commuting family the squares commute
/// with each other and with the original operators. Returns the largest
/// scaled residual over `‖Aₐ²A_b² − A_b²Aₐ²‖` (degree 4) and
/// `‖AₐA_b² − A_b²Aₐ‖` (degree 3), a ≠ b.
pub fn check_squared_commutes(fam: &OperatorFamily, tol: &TolerancePolicy) -> f64 {
    let squares: Vec<Mat> = fam.ops().iter().map(|a| a.dot(a)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..fam.len() {
        for b in 0..fam.len() {
            if a == b {
                continue;
            }
            let c4 = squares[a].dot(&squares[b]) - squares[b].dot(&squares[a]);
            worst = worst.max(tol.scaled_residual(frobenius_norm(&c4), 4));
            let c3 = fam.op(a).dot(&squares[b]) - squares[b].dot(fam.op(a));
            worst = worst.max(tol.scaled_residual(frobenius_norm(&c3), 3));
        }
    }
    worst
}

/// Outcome of the linear-independence check. Families containing an
/// operator with A² = 0 are exempt from the independence claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndependenceCheck {
    Independent,
    Dependent,
    /// Some member squares to zero; the claim does not apply.
    ExemptSquareZero,
}

/// Rank test of the family members flattened to vectors of length n².
pub fn check_linear_independence(fam: &OperatorFamily, tol: &TolerancePolicy) -> IndependenceCheck {
    for op in fam.ops() {
        let sq = op.dot(op);
        if frobenius_norm(&sq) <= tol.zero_threshold_squared() && frobenius_norm(op) > 0.0 {
            return IndependenceCheck::ExemptSquareZero;
        }
    }
    let n2 = fam.dim() * fam.dim();
    let mut flat: Mat = Array2::zeros((fam.len(), n2));
    for (a, op) in fam.ops().iter().enumerate() {
        for (k, z) in op.iter().enumerate() {
            flat[[a, k]] = *z;
        }
    }
    // Singular-value threshold rel_zero × scale × n, consistent with the
    // kernel extraction convention.
    use ndarray_linalg::SVD;
    let (_, s, _) = flat.svd(false, false).expect("svd failed");
    let thresh = tol.rel_zero * tol.scale * fam.dim() as f64;
    let rank = s.iter().filter(|&&x| x > thresh).count();
    if rank == fam.len() {
        IndependenceCheck::Independent
    } else {
        IndependenceCheck::Dependent
    }
}

/// Check that a scalar is exactly real-valued storage (imaginary part zero).
pub fn is_real_scalar(z: &Scalar) -> bool {
    z.im == 0.0
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use crate::numerics::re;

    pub fn sigma1() -> Mat {
        let mut m = Mat::zeros((2, 2));
        m[[0, 1]] = re(1.0);
        m[[1, 0]] = re(1.0);
        m
    }

    pub fn sigma2() -> Mat {
        let mut m = Mat::zeros((2, 2));
        m[[0, 1]] = Scalar::new(0.0, -1.0);
        m[[1, 0]] = Scalar::new(0.0, 1.0);
        m
    }

    pub fn sigma3() -> Mat {
        let mut m = Mat::zeros((2, 2));
        m[[0, 0]] = re(1.0);
        m[[1, 1]] = re(-1.0);
        m
    }

    pub fn pauli_pair() -> OperatorFamily {
        OperatorFamily::with_default_labels(vec![sigma1(), sigma2()], FieldMode::Complex).unwrap()
    }
}
