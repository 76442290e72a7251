//! Scalar and matrix foundation: complex arithmetic, norms, the
//! eigendecomposition contract, kernel extraction and the global tolerance
//! policy every other module consumes.
//!
//! All arithmetic is carried out over complex scalars, even for families
//! declared real; realness is a property of the input and a reporting
//! concern, not an arithmetic mode.

use ndarray::prelude::*;
use ndarray_linalg::{Eig, Inverse, QR, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used everywhere.
pub type Scalar = Complex64;

/// Dense complex matrix, row-major.
pub type Mat = Array2<Scalar>;

/// Shorthand for a real scalar promoted to [`Scalar`].
pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// Global tolerance policy, computed once per job.
///
/// `scale` is the largest operator (spectral) norm over the family under
/// analysis. `rel_zero` decides when a scaled magnitude counts as zero and
/// `eig_cluster` decides when two eigenvalues count as equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub rel_zero: f64,
    pub eig_cluster: f64,
    pub scale: f64,
}

pub const DEFAULT_REL_ZERO: f64 = 1e-9;
pub const DEFAULT_EIG_CLUSTER: f64 = 1e-7;

impl TolerancePolicy {
    pub fn new(rel_zero: f64, eig_cluster: f64, scale: f64) -> Result<Self> {
        if !(rel_zero > 0.0 && rel_zero <= eig_cluster && eig_cluster < 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "need 0 < rel_zero <= eig_cluster < 1, got rel_zero={rel_zero}, eig_cluster={eig_cluster}"
            )));
        }
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::InvalidTolerance(format!(
                "scale must be finite and nonnegative, got {scale}"
            )));
        }
        Ok(Self {
            rel_zero,
            eig_cluster,
            scale,
        })
    }

    /// Default thresholds with the given norm scale.
    pub fn with_scale(scale: f64) -> Self {
        Self {
            rel_zero: DEFAULT_REL_ZERO,
            eig_cluster: DEFAULT_EIG_CLUSTER,
            scale,
        }
    }

    /// Policy for the squared family: same relative thresholds, squared scale.
    pub fn squared(&self) -> Self {
        Self {
            rel_zero: self.rel_zero,
            eig_cluster: self.eig_cluster,
            scale: self.scale * self.scale,
        }
    }

    /// Absolute magnitude below which a first-degree quantity counts as zero.
    pub fn zero_threshold(&self) -> f64 {
        self.rel_zero * self.scale
    }

    /// Zero threshold for quantities quadratic in the operators (squares).
    pub fn zero_threshold_squared(&self) -> f64 {
        self.rel_zero * self.scale * self.scale
    }

    /// Clustering radius for eigenvalues of the original operators.
    pub fn cluster_radius(&self) -> f64 {
        self.eig_cluster * self.scale
    }

    /// Clustering radius for eigenvalues of squared operators.
    pub fn cluster_radius_squared(&self) -> f64 {
        self.eig_cluster * self.scale * self.scale
    }

    /// Residual of a degree-`degree` product expression, normalized so that
    /// it is comparable against `rel_zero`.
    pub fn scaled_residual(&self, norm: f64, degree: i32) -> f64 {
        norm / (self.scale.powi(degree) + 1.0)
    }
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self::with_scale(1.0)
    }
}

/// Frobenius norm: sqrt of the sum of squared entry magnitudes.
pub fn frobenius_norm(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value). Zero for empty matrices.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let (_, s, _) = m.svd(false, false).expect("svd failed");
    s.iter().copied().fold(0.0, f64::max)
}

/// Largest singular value over smallest; `f64::INFINITY` when singular.
pub fn condition_number(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 1.0;
    }
    let (_, s, _) = m.svd(false, false).expect("svd failed");
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn identity(n: usize) -> Mat {
    Array2::eye(n).mapv(|x: f64| re(x))
}

/// Conjugate transpose.
pub fn dagger(m: &Mat) -> Mat {
    m.t().mapv(|z| z.conj())
}

/// Largest entrywise absolute difference.
pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn ensure_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &Mat, context: &str) -> Result<()> {
    for ((i, j), z) in m.indexed_iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite {
                location: format!("{context}[{i}][{j}]"),
            });
        }
    }
    Ok(())
}

/// Single-linkage clustering of complex values with the given radius.
///
/// Returns one entry per input value: the index of its cluster, together
/// with the list of cluster representatives (arithmetic means).
pub fn cluster_scalars(values: &[Scalar], radius: f64) -> (Vec<usize>, Vec<Scalar>) {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    // Number clusters by order of first appearance, then replace each
    // member with the cluster mean.
    let mut cluster_of = vec![usize::MAX; n];
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let id = match roots.iter().position(|&x| x == r) {
            Some(id) => id,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        cluster_of[i] = id;
    }
    let mut sums = vec![Scalar::new(0.0, 0.0); roots.len()];
    let mut counts = vec![0usize; roots.len()];
    for (i, &c) in cluster_of.iter().enumerate() {
        sums[c] += values[i];
        counts[c] += 1;
    }
    let reps: Vec<Scalar> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    (cluster_of, reps)
}

/// Result of [`eig`]: eigenvalues (already clustered), the eigenvector
/// matrix, whether the matrix is diagonalizable to tolerance, and the
/// condition number of the eigenvector matrix.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    /// One clustered eigenvalue per eigenvector column.
    pub values: Vec<Scalar>,
    /// Eigenvectors as columns, unit norm.
    pub vectors: Mat,
    /// True when the numerical eigenspace dimensions sum to n.
    pub ok: bool,
    /// Condition number of `vectors`.
    pub condition: f64,
}

impl Eigendecomposition {
    /// Columns belonging to the cluster with the given representative value.
    pub fn columns_for_value(&self, value: Scalar, radius: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&j| (self.values[j] - value).norm() <= radius)
            .collect()
    }
}

/// Full eigendecomposition of a square complex matrix.
///
/// Eigenvalues within `tol.cluster_radius()` of each other (single linkage)
/// are reported as the identical scalar, the cluster mean. `ok` is false
/// when the clustered eigenvector sets are rank deficient, i.e. the matrix
/// is not diagonalizable to tolerance.
pub fn eig(m: &Mat, tol: &TolerancePolicy) -> Result<Eigendecomposition> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Eigendecomposition {
            values: Vec::new(),
            vectors: Mat::zeros((0, 0)),
            ok: true,
            condition: 1.0,
        });
    }
    let (raw_values, vectors) = m.eig()?;
    let raw: Vec<Scalar> = raw_values.iter().copied().collect();
    let (cluster_of, reps) = cluster_scalars(&raw, tol.cluster_radius());
    let values: Vec<Scalar> = cluster_of.iter().map(|&c| reps[c]).collect();

    // Diagonalizability: the numerical rank of each cluster's eigenvector
    // set must add up to n.
    let mut rank_sum = 0usize;
    for c in 0..reps.len() {
        let cols: Vec<usize> = (0..n).filter(|&j| cluster_of[j] == c).collect();
        let block = select_columns(&vectors, &cols);
        rank_sum += numerical_rank(&block, tol.rel_zero);
    }
    let ok = rank_sum == n;
    let condition = condition_number(&vectors);
    Ok(Eigendecomposition {
        values,
        vectors,
        ok,
        condition,
    })
}

/// Numerical rank with threshold `sigma_max * rel * sqrt(max dim)`.
fn numerical_rank(m: &Mat, rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (_, s, _) = m.svd(false, false).expect("svd failed");
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let thresh = smax * rel * (m.nrows().max(m.ncols()) as f64).sqrt();
    s.iter().filter(|&&x| x > thresh).count()
}

pub fn select_columns(m: &Mat, cols: &[usize]) -> Mat {
    let mut out = Mat::zeros((m.nrows(), cols.len()));
    for (k, &j) in cols.iter().enumerate() {
        out.column_mut(k).assign(&m.column(j));
    }
    out
}

pub fn hstack(blocks: &[Mat]) -> Mat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros((rows, total));
    let mut at = 0;
    for b in blocks {
        out.slice_mut(s![.., at..at + b.ncols()]).assign(b);
        at += b.ncols();
    }
    out
}

/// Orthonormal basis of the numerical null space: right singular vectors
/// whose singular value is at most `tol.zero_threshold()`. A full-rank
/// matrix yields a matrix with zero columns.
pub fn kernel_basis(m: &Mat, tol: &TolerancePolicy) -> Mat {
    let cols = m.ncols();
    if cols == 0 {
        return Mat::zeros((0, 0));
    }
    if m.nrows() == 0 {
        return identity(cols);
    }
    let (_, s, vt) = m.svd(false, true).expect("svd failed");
    let vt = vt.expect("svd requested vt");
    let thresh = tol.zero_threshold();
    let null_rows: Vec<usize> = (0..cols)
        .filter(|&j| s.get(j).map_or(true, |&sj| sj <= thresh))
        .collect();
    let mut out = Mat::zeros((cols, null_rows.len()));
    for (k, &j) in null_rows.iter().enumerate() {
        for i in 0..cols {
            out[[i, k]] = vt[[j, i]].conj();
        }
    }
    out
}

/// Matrix of `m` restricted to the column span of `basis`, solved in least
/// squares, together with the invariance leak
/// `‖m·basis − basis·R‖_F / (‖m‖₂ + 1)`.
pub fn restrict(m: &Mat, basis: &Mat, tol: &TolerancePolicy) -> Result<(Mat, f64)> {
    let n = ensure_square(m)?;
    if basis.nrows() != n {
        return Err(Error::DimensionMismatch {
            label: "basis".into(),
            rows: basis.nrows(),
            cols: basis.ncols(),
            n,
        });
    }
    let k = basis.ncols();
    if k == 0 {
        return Ok((Mat::zeros((0, 0)), 0.0));
    }
    let (u, s, vt) = basis.svd(true, true)?;
    let (u, vt) = (u.expect("svd u"), vt.expect("svd vt"));
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    if s.len() < k || smax == 0.0 || smin <= smax * tol.rel_zero * n as f64 {
        return Err(Error::RankDeficientBasis);
    }
    // R = V Σ⁻¹ Uₖᴴ (m·basis)
    let mb = m.dot(basis);
    let uk = u.slice(s![.., ..k]).to_owned();
    let mut proj = dagger(&uk).dot(&mb);
    for (i, &sv) in s.iter().enumerate() {
        proj.row_mut(i).mapv_inplace(|z| z / sv);
    }
    let r = dagger(&vt).dot(&proj);
    let defect = &mb - &basis.dot(&r);
    let leak = frobenius_norm(&defect) / (spectral_norm(m) + 1.0);
    Ok((r, leak))
}

/// Least-squares solution X of `a·X = b` for a full-column-rank `a`.
pub fn lstsq_solve(a: &Mat, b: &Mat, tol: &TolerancePolicy) -> Result<Mat> {
    let k = a.ncols();
    let (u, s, vt) = a.svd(true, true)?;
    let (u, vt) = (u.expect("svd u"), vt.expect("svd vt"));
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    if s.len() < k || smax == 0.0 || smin <= smax * tol.rel_zero * a.nrows() as f64 {
        return Err(Error::RankDeficientBasis);
    }
    let uk = u.slice(s![.., ..k]).to_owned();
    let mut proj = dagger(&uk).dot(b);
    for (i, &sv) in s.iter().enumerate() {
        proj.row_mut(i).mapv_inplace(|z| z / sv);
    }
    Ok(dagger(&vt).dot(&proj))
}

/// Kronecker product.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Mat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            for p in 0..br {
                for q in 0..bc {
                    out[[i * br + p, j * bc + q]] = a[[i, j]] * b[[p, q]];
                }
            }
        }
    }
    out
}

/// Re-orthonormalize the columns of `b` (thin QR). Spans the same subspace.
pub fn orthonormalize(b: &Mat) -> Result<Mat> {
    if b.ncols() == 0 {
        return Ok(b.clone());
    }
    let (q, _) = b.qr()?;
    Ok(q.slice(s![.., ..b.ncols()]).to_owned())
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    Ok(m.inv()?)
}
