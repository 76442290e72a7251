//! Explicit simultaneous canonical forms on decomposition blocks.
//!
//! Two entry points exist. [`pair_canonical_form`] handles two
//! anti-commuting operators where the first squares to a constant and the
//! second is nonsingular, keeping a general diagonal D. For full Clifford
//! blocks, [`clifford_canonical_form`] normalizes every generator to square
//! to the identity and recursively halves the space: the first two
//! generators become diag(I, −I) and the exchange block, and the rest
//! reduce to a Clifford problem of half the dimension with two fewer
//! generators. The pipeline ([`apply_canonical`]) uses the recursion for
//! every Clifford block; the pair form is the standalone general-D entry.
//!
//! Canonical target matrices are constructed, not measured: their entries
//! are exact values from {0, ±1, ±i} scaled by the block data (λ, D), so
//! the generator relations hold with no floating-point noise. All numerical
//! error lives in the local basis.

use num_complex::Complex64;

use crate::decomposition::{BlockKind, DecompositionReport};
use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::numerics::{
    eig, frobenius_norm, hstack, identity, inverse, lstsq_solve, select_columns, Mat, Scalar,
    TolerancePolicy,
};

/// Canonical form of a pair (A, B): A = diag(λI, −λI), B = [[0, D], [I, 0]],
/// B² = diag(D, D) in the local basis.
#[derive(Debug, Clone)]
pub struct PairCanonicalForm {
    /// Basis columns, in the coordinates the input operators were given in.
    pub local_basis: Mat,
    /// Principal square root of the constant value of A².
    pub lambda: Scalar,
    /// Diagonal of B² on the +λ eigenspace, sorted by (re, im).
    pub d_values: Vec<Scalar>,
    pub canon_a: Mat,
    pub canon_b: Mat,
    pub canon_b2: Mat,
    /// Largest Frobenius deviation of the conjugated operators from their
    /// canonical targets.
    pub residual: f64,
}

/// Shape of the halving recursion, innermost last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecursionTrace {
    /// No halving left: zero or one generator on `dim` dimensions; a single
    /// generator splits into `positive` + `negative` eigendirections.
    Base {
        generators: usize,
        dim: usize,
        positive: usize,
        negative: usize,
    },
    Halve {
        dim: usize,
        inner: Box<RecursionTrace>,
    },
}

impl RecursionTrace {
    pub fn depth(&self) -> usize {
        match self {
            RecursionTrace::Base { .. } => 0,
            RecursionTrace::Halve { inner, .. } => 1 + inner.depth(),
        }
    }

    pub fn base_dim(&self) -> usize {
        match self {
            RecursionTrace::Base { dim, .. } => *dim,
            RecursionTrace::Halve { inner, .. } => inner.base_dim(),
        }
    }
}

/// Canonical form of a Clifford block: Aₐ = normalizerₐ · Gₐ in the local
/// basis, where the Gₐ are exact pattern matrices squaring to the identity.
#[derive(Debug, Clone)]
pub struct CliffordCanonicalForm {
    /// Which input operators the generators correspond to, in order.
    pub operators: Vec<usize>,
    pub local_basis: Mat,
    /// Exact canonical generators, entries in {0, ±1, ±i}.
    pub generators: Vec<Mat>,
    /// Principal square roots of the block constants.
    pub normalizers: Vec<Scalar>,
    pub trace: RecursionTrace,
    /// Largest Frobenius deviation of the conjugated operators from
    /// normalizerₐ · Gₐ.
    pub residual: f64,
}

/// Canonical data attached to one block by [`apply_canonical`].
#[derive(Debug, Clone)]
pub enum BlockForm {
    /// Nothing to construct: every operator vanishes.
    Kernel,
    SingleOperator(SingleOperatorForm),
    Clifford(CliffordCanonicalForm),
    /// Canonical forms for degenerate blocks are not known; skipped.
    DegenerateSkipped {
        note: String,
    },
}

/// Eigendecomposition of the one operator acting on a single-operator block.
#[derive(Debug, Clone)]
pub struct SingleOperatorForm {
    pub operator: usize,
    pub local_basis: Mat,
    pub eigenvalues: Vec<Scalar>,
    /// Index pairs (i, j) with μᵢ + μⱼ ≈ 0; present on blocks where the
    /// operator has eigenvalues of equal magnitude and opposite sign.
    pub opposite_pairs: Vec<(usize, usize)>,
    pub residual: f64,
}

/// Deviation of the conjugated operator from a target:
/// `‖basis⁺ · op · basis − target‖_F` with the pseudo-inverse on the left,
/// so non-square (embedded) bases are handled too.
pub fn conjugation_residual(basis: &Mat, op: &Mat, target: &Mat, tol: &TolerancePolicy) -> f64 {
    match lstsq_solve(basis, &op.dot(basis), tol) {
        Ok(conj) => frobenius_norm(&(&conj - target)),
        Err(_) => f64::INFINITY,
    }
}

fn diag_from(values: &[Scalar]) -> Mat {
    let n = values.len();
    let mut out = Mat::zeros((n, n));
    for (i, v) in values.iter().enumerate() {
        out[[i, i]] = *v;
    }
    out
}

/// Constant c with M ≈ c·I, or the deviation when it is not constant.
fn constant_of_square(sq: &Mat, tol: &TolerancePolicy) -> (Scalar, f64) {
    let d = sq.nrows();
    let c = (0..d).map(|i| sq[[i, i]]).sum::<Scalar>() / d as f64;
    let dev = frobenius_norm(&(sq - &(identity(d).mapv(|z| z * c))));
    (c, tol.scaled_residual(dev, 2))
}

/// Canonical form for a pair of anti-commuting operators.
///
/// Requires A² = λ²I with λ ≠ 0 and B nonsingular on an even-dimensional
/// space. The +λ eigenspace (principal-root convention) supplies the X
/// columns, diagonalizing B² there; Y = B·X completes the basis.
pub fn pair_canonical_form(a: &Mat, b: &Mat, tol: &TolerancePolicy) -> Result<PairCanonicalForm> {
    let d = crate::numerics::ensure_square(a)?;
    if crate::numerics::ensure_square(b)? != d {
        return Err(Error::DimensionMismatch {
            label: "B".into(),
            rows: b.nrows(),
            cols: b.ncols(),
            n: d,
        });
    }
    if d % 2 != 0 {
        return Err(Error::OddDimension { dim: d });
    }
    let anti = a.dot(b) + b.dot(a);
    let anti_resid = tol.scaled_residual(frobenius_norm(&anti), 2);
    if anti_resid > tol.rel_zero {
        return Err(Error::AntiCommutationViolation {
            a: 0,
            b: 1,
            residual: anti_resid,
        });
    }
    let (c, dev) = constant_of_square(&a.dot(a), tol);
    if dev > tol.rel_zero {
        return Err(Error::NonConstantSquare {
            operator: 0,
            deviation: dev,
        });
    }
    if c.norm() <= tol.zero_threshold_squared() {
        return Err(Error::SingularFirstOperator);
    }
    let (bc, _) = constant_of_square(&b.dot(b), tol);
    let _ = bc;
    let b_smin = {
        use ndarray_linalg::SVD;
        let (_, s, _) = b.svd(false, false)?;
        s.iter().copied().fold(f64::INFINITY, f64::min)
    };
    if b_smin <= tol.zero_threshold() {
        return Err(Error::SingularSecondOperator);
    }

    let lambda = c.sqrt();
    let ea = eig(a, tol)?;
    if !ea.ok {
        return Err(Error::NotDiagonalizable {
            operator: 0,
            leak: 0.0,
        });
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (j, v) in ea.values.iter().enumerate() {
        if (v - lambda).norm() <= (v + lambda).norm() {
            plus.push(j);
        } else {
            minus.push(j);
        }
    }
    let m = d / 2;
    if plus.len() != m || minus.len() != m {
        return Err(Error::DimensionObstruction {
            dim: d,
            generators: 2,
        });
    }

    // Diagonalize B² on the +λ eigenspace; B² commutes with A so that
    // subspace is invariant.
    let x0 = select_columns(&ea.vectors, &plus);
    let (r2, leak) = crate::numerics::restrict(&b.dot(b), &x0, tol)?;
    let e2 = eig(&r2, &tol.squared())?;
    if !e2.ok {
        return Err(Error::NotDiagonalizable { operator: 1, leak });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        e2.values[i]
            .re
            .total_cmp(&e2.values[j].re)
            .then(e2.values[i].im.total_cmp(&e2.values[j].im))
            .then(i.cmp(&j))
    });
    let d_values: Vec<Scalar> = order.iter().map(|&i| e2.values[i]).collect();
    let x = x0.dot(&select_columns(&e2.vectors, &order));
    let y = b.dot(&x);
    let local_basis = hstack(&[x, y]);

    // Canonical targets: exact zeros off the displayed pattern.
    let mut canon_a = Mat::zeros((d, d));
    let mut canon_b = Mat::zeros((d, d));
    let mut canon_b2 = Mat::zeros((d, d));
    for i in 0..m {
        canon_a[[i, i]] = lambda;
        canon_a[[m + i, m + i]] = -lambda;
        canon_b[[i, m + i]] = d_values[i];
        canon_b[[m + i, i]] = Complex64::new(1.0, 0.0);
        canon_b2[[i, i]] = d_values[i];
        canon_b2[[m + i, m + i]] = d_values[i];
    }

    let inv = inverse(&local_basis)?;
    let res_a = frobenius_norm(&(inv.dot(a).dot(&local_basis) - &canon_a));
    let res_b = frobenius_norm(&(inv.dot(b).dot(&local_basis) - &canon_b));
    let res_b2 = frobenius_norm(&(inv.dot(&b.dot(b)).dot(&local_basis) - &canon_b2));
    let residual = res_a.max(res_b).max(res_b2);

    Ok(PairCanonicalForm {
        local_basis,
        lambda,
        d_values,
        canon_a,
        canon_b,
        canon_b2,
        residual,
    })
}

/// Exact canonical generator patterns for a given recursion shape.
///
/// Base with one generator: diag(Iₚ, −I_q). Each halving wraps the inner
/// generators K as [[0, iK], [−iK, 0]] and prepends diag(I, −I) and the
/// exchange block [[0, I], [I, 0]].
pub fn canonical_generators(trace: &RecursionTrace) -> Vec<Mat> {
    match trace {
        RecursionTrace::Base {
            generators,
            dim,
            positive,
            negative,
        } => {
            if *generators == 0 {
                Vec::new()
            } else {
                debug_assert_eq!(positive + negative, *dim);
                let mut g = Mat::zeros((*dim, *dim));
                for i in 0..*positive {
                    g[[i, i]] = Complex64::new(1.0, 0.0);
                }
                for i in *positive..*dim {
                    g[[i, i]] = Complex64::new(-1.0, 0.0);
                }
                vec![g]
            }
        }
        RecursionTrace::Halve { dim, inner } => {
            let h = dim / 2;
            let inner_gens = canonical_generators(inner);
            let mut out = Vec::with_capacity(inner_gens.len() + 2);
            let mut g1 = Mat::zeros((*dim, *dim));
            let mut g2 = Mat::zeros((*dim, *dim));
            for i in 0..h {
                g1[[i, i]] = Complex64::new(1.0, 0.0);
                g1[[h + i, h + i]] = Complex64::new(-1.0, 0.0);
                g2[[i, h + i]] = Complex64::new(1.0, 0.0);
                g2[[h + i, i]] = Complex64::new(1.0, 0.0);
            }
            out.push(g1);
            out.push(g2);
            let i_unit = Complex64::new(0.0, 1.0);
            for k in &inner_gens {
                let mut g = Mat::zeros((*dim, *dim));
                for p in 0..h {
                    for q in 0..h {
                        g[[p, h + q]] = i_unit * k[[p, q]];
                        g[[h + p, q]] = -i_unit * k[[p, q]];
                    }
                }
                out.push(g);
            }
            out
        }
    }
}

fn unit_tol(tol: &TolerancePolicy) -> TolerancePolicy {
    TolerancePolicy {
        rel_zero: tol.rel_zero,
        eig_cluster: tol.eig_cluster,
        scale: 1.0,
    }
}

/// Recursive halving on normalized generators (Hₐ² = I). Returns the local
/// basis (in the coordinates of the inputs) and the recursion shape.
fn halve(dim: usize, ops: &[Mat], tol: &TolerancePolicy) -> Result<(Mat, RecursionTrace)> {
    let ut = unit_tol(tol);
    match ops.len() {
        0 => Ok((
            identity(dim),
            RecursionTrace::Base {
                generators: 0,
                dim,
                positive: dim,
                negative: 0,
            },
        )),
        1 => {
            let e = eig(&ops[0], &ut)?;
            if !e.ok {
                return Err(Error::NotDiagonalizable {
                    operator: 0,
                    leak: 0.0,
                });
            }
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for (j, v) in e.values.iter().enumerate() {
                let dev = (v * v - Complex64::new(1.0, 0.0)).norm();
                if dev > 10.0 * ut.cluster_radius() {
                    return Err(Error::NonConstantSquare {
                        operator: 0,
                        deviation: dev,
                    });
                }
                if v.re >= 0.0 {
                    plus.push(j);
                } else {
                    minus.push(j);
                }
            }
            let cols: Vec<usize> = plus.iter().chain(minus.iter()).copied().collect();
            let basis = select_columns(&e.vectors, &cols);
            Ok((
                basis,
                RecursionTrace::Base {
                    generators: 1,
                    dim,
                    positive: plus.len(),
                    negative: minus.len(),
                },
            ))
        }
        m => {
            if dim % 2 != 0 {
                return Err(Error::DimensionObstruction { dim, generators: m });
            }
            let h = dim / 2;
            let e = eig(&ops[0], &ut)?;
            if !e.ok {
                return Err(Error::NotDiagonalizable {
                    operator: 0,
                    leak: 0.0,
                });
            }
            let plus: Vec<usize> = (0..dim).filter(|&j| e.values[j].re >= 0.0).collect();
            if plus.len() != h {
                return Err(Error::DimensionObstruction { dim, generators: m });
            }
            let x = select_columns(&e.vectors, &plus);
            let y = ops[1].dot(&x);

            // Remaining generators take the form [[0, −Eₐ], [Eₐ, 0]] with
            // Eₐ² = −I; the iEₐ square to +I and anti-commute, a Clifford
            // problem of half the dimension.
            let i_unit = Complex64::new(0.0, 1.0);
            let mut sub_ops = Vec::with_capacity(m - 2);
            for op in &ops[2..] {
                let e_a = lstsq_solve(&y, &op.dot(&x), tol)?;
                sub_ops.push(e_a.mapv(|z| z * i_unit));
            }
            let (q, inner) = halve(h, &sub_ops, tol)?;
            let x_final = x.dot(&q);
            let y_final = ops[1].dot(&x_final);
            Ok((
                hstack(&[x_final, y_final]),
                RecursionTrace::Halve {
                    dim,
                    inner: Box::new(inner),
                },
            ))
        }
    }
}

/// Canonical form for a full Clifford block: `block_ops[a]` must square to
/// `constants[a]·I` with nonzero constants and pairwise anti-commute.
pub fn clifford_canonical_form(
    block_ops: &[Mat],
    constants: &[Scalar],
    tol: &TolerancePolicy,
) -> Result<CliffordCanonicalForm> {
    assert_eq!(block_ops.len(), constants.len());
    let m = block_ops.len();
    assert!(m >= 1, "need at least one operator");
    let d = crate::numerics::ensure_square(&block_ops[0])?;

    // Static obstruction: the halving recursion removes two generators per
    // level, so the dimension must be divisible by 2^floor(m/2).
    let halvings = m / 2;
    if halvings >= usize::BITS as usize || d % (1usize << halvings) != 0 {
        return Err(Error::DimensionObstruction {
            dim: d,
            generators: m,
        });
    }

    for (a, op) in block_ops.iter().enumerate() {
        if crate::numerics::ensure_square(op)? != d {
            return Err(Error::DimensionMismatch {
                label: format!("operator {a}"),
                rows: op.nrows(),
                cols: op.ncols(),
                n: d,
            });
        }
        let (c, dev) = constant_of_square(&op.dot(op), tol);
        if dev > tol.rel_zero {
            return Err(Error::NonConstantSquare {
                operator: a,
                deviation: dev,
            });
        }
        if (c - constants[a]).norm() > 10.0 * tol.cluster_radius_squared() {
            return Err(Error::NonConstantSquare {
                operator: a,
                deviation: (c - constants[a]).norm(),
            });
        }
        if constants[a].norm() <= tol.zero_threshold_squared() {
            return Err(Error::ZeroSquareConstant { operator: a });
        }
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let anti = block_ops[a].dot(&block_ops[b]) + block_ops[b].dot(&block_ops[a]);
            let r = tol.scaled_residual(frobenius_norm(&anti), 2);
            if r > tol.rel_zero {
                return Err(Error::AntiCommutationViolation { a, b, residual: r });
            }
        }
    }

    let normalizers: Vec<Scalar> = constants.iter().map(|c| c.sqrt()).collect();
    let normalized: Vec<Mat> = block_ops
        .iter()
        .zip(&normalizers)
        .map(|(op, s)| op.mapv(|z| z / s))
        .collect();

    let (local_basis, trace) = halve(d, &normalized, tol)?;
    let generators = canonical_generators(&trace);
    debug_assert_eq!(generators.len(), m);

    let inv = inverse(&local_basis)?;
    let mut residual: f64 = 0.0;
    for a in 0..m {
        let target = generators[a].mapv(|z| z * normalizers[a]);
        let got = inv.dot(&block_ops[a]).dot(&local_basis);
        residual = residual.max(frobenius_norm(&(got - target)));
    }

    Ok(CliffordCanonicalForm {
        operators: (0..m).collect(),
        local_basis,
        generators,
        normalizers,
        trace,
        residual,
    })
}

/// Construct canonical data for every block of a decomposition.
///
/// Kernel blocks need no form; single-operator blocks get the
/// eigendecomposition of their one restricted operator; Clifford blocks go
/// through the halving recursion (complex forms, also for real-mode input);
/// degenerate blocks are skipped with a note. Each returned local basis is
/// composed with the block's global basis columns, so it lives in the
/// family's original coordinates.
pub fn apply_canonical(
    rep: &DecompositionReport,
    fam: &OperatorFamily,
    tol: &TolerancePolicy,
) -> Result<Vec<BlockForm>> {
    assert_eq!(rep.p.nrows(), fam.dim(), "report does not match the family");
    let mut forms = Vec::with_capacity(rep.blocks.len());
    for (bi, block) in rep.blocks.iter().enumerate() {
        let basis = rep.block_basis(bi);
        match block.kind {
            BlockKind::Kernel => forms.push(BlockForm::Kernel),
            BlockKind::Degenerate => forms.push(BlockForm::DegenerateSkipped {
                note: "canonical forms for degenerate blocks are not known; \
                       restrictions are reported as-is"
                    .to_string(),
            }),
            BlockKind::SingleOperator => {
                let a = *block.support.iter().next().expect("nonempty support");
                let r = &rep.restrictions[bi][&a];
                let e = eig(r, tol)?;
                if !e.ok {
                    return Err(Error::NotDiagonalizable {
                        operator: a,
                        leak: block.invariance_leak,
                    });
                }
                let mut dv = Mat::zeros((e.values.len(), e.values.len()));
                for (i, v) in e.values.iter().enumerate() {
                    dv[[i, i]] = *v;
                }
                let residual = frobenius_norm(&(inverse(&e.vectors)?.dot(r).dot(&e.vectors) - &dv));
                let mut opposite_pairs = Vec::new();
                for i in 0..e.values.len() {
                    for j in (i + 1)..e.values.len() {
                        if (e.values[i] + e.values[j]).norm() <= tol.cluster_radius() {
                            opposite_pairs.push((i, j));
                        }
                    }
                }
                forms.push(BlockForm::SingleOperator(SingleOperatorForm {
                    operator: a,
                    local_basis: basis.dot(&e.vectors),
                    eigenvalues: e.values,
                    opposite_pairs,
                    residual,
                }));
            }
            BlockKind::Clifford => {
                let operators: Vec<usize> = block.support.iter().copied().collect();
                let ops: Vec<Mat> = operators
                    .iter()
                    .map(|a| rep.restrictions[bi][a].clone())
                    .collect();
                let constants: Vec<Scalar> = operators.iter().map(|a| block.constants[a]).collect();
                let mut form = clifford_canonical_form(&ops, &constants, tol)?;
                form.operators = operators;
                form.local_basis = basis.dot(&form.local_basis);
                forms.push(BlockForm::Clifford(form));
            }
        }
    }
    Ok(forms)
}

/// Largest canonical-form residual across blocks, measured against the
/// original family operators through the composed (embedded) bases.
pub fn global_canonical_residual(
    forms: &[BlockForm],
    fam: &OperatorFamily,
    tol: &TolerancePolicy,
) -> f64 {
    let mut worst: f64 = 0.0;
    for form in forms {
        match form {
            BlockForm::Kernel | BlockForm::DegenerateSkipped { .. } => {}
            BlockForm::SingleOperator(f) => {
                let target = diag_from(&f.eigenvalues);
                worst = worst.max(conjugation_residual(
                    &f.local_basis,
                    fam.op(f.operator),
                    &target,
                    tol,
                ));
            }
            BlockForm::Clifford(f) => {
                for (k, &a) in f.operators.iter().enumerate() {
                    let target = f.generators[k].mapv(|z| z * f.normalizers[k]);
                    worst = worst.max(conjugation_residual(
                        &f.local_basis,
                        fam.op(a),
                        &target,
                        tol,
                    ));
                }
            }
        }
    }
    worst
}
