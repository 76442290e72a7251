//! Simultaneous diagonalization of a commuting family of diagonalizable
//! operators by recursive eigenspace refinement.
//!
//! Starting from the whole space as a single cell, each operator in turn is
//! restricted to every cell, diagonalized there, and the cell is split along
//! the clustered eigenvalues. Restrictions to invariant subspaces stay
//! diagonalizable, so the refinement terminates with a joint eigenbasis.

use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::numerics::{
    eig, frobenius_norm, hstack, inverse, orthonormalize, restrict, select_columns, Mat, Scalar,
    TolerancePolicy,
};

/// Invertible change of basis rendering every family member diagonal,
/// together with the per-operator diagonal values in that basis.
#[derive(Debug, Clone)]
pub struct SimDiagResult {
    /// Change-of-basis matrix, unit-norm columns.
    pub p: Mat,
    /// Inverse of `p`, precomputed.
    pub p_inv: Mat,
    /// `diag_values[a][j]` is the eigenvalue of operator `a` on column `j`.
    pub diag_values: Vec<Vec<Scalar>>,
    /// Largest scaled off-diagonal residual over the family.
    pub offdiag_residual: f64,
    /// Condition number of `p`.
    pub p_condition: f64,
}

impl SimDiagResult {
    /// Eigenvalue tuple of basis column `j` across the family.
    pub fn column_tuple(&self, j: usize) -> Vec<Scalar> {
        self.diag_values.iter().map(|row| row[j]).collect()
    }
}

/// Largest scaled commutator residual `‖AₐA_b − A_bAₐ‖_F / (scale² + 1)`.
pub fn commutation_residual(fam: &OperatorFamily, tol: &TolerancePolicy) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..fam.len() {
        for b in (a + 1)..fam.len() {
            let comm = fam.op(a).dot(fam.op(b)) - fam.op(b).dot(fam.op(a));
            worst = worst.max(tol.scaled_residual(frobenius_norm(&comm), 2));
        }
    }
    worst
}

struct Cell {
    /// Orthonormal basis of the cell, n×k.
    basis: Mat,
    /// Eigenvalue per already-processed operator, shared by all columns.
    values: Vec<Scalar>,
}

/// Simultaneously diagonalize a commuting family of diagonalizable
/// operators.
///
/// Refinement order is the family order as given; within each cell the
/// restriction's eigenvector images are re-orthonormalized before further
/// refinement to bound error accumulation. Cluster order within a split is
/// by (re, im) of the representative, so the output is deterministic.
pub fn simultaneous_diagonalize(
    fam: &OperatorFamily,
    tol: &TolerancePolicy,
) -> Result<SimDiagResult> {
    for a in 0..fam.len() {
        for b in (a + 1)..fam.len() {
            let comm = fam.op(a).dot(fam.op(b)) - fam.op(b).dot(fam.op(a));
            let r = tol.scaled_residual(frobenius_norm(&comm), 2);
            if r > tol.rel_zero {
                return Err(Error::CommutationViolation { a, b, residual: r });
            }
        }
    }

    let n = fam.dim();
    let mut cells = vec![Cell {
        basis: crate::numerics::identity(n),
        values: Vec::new(),
    }];

    for a in 0..fam.len() {
        let mut next: Vec<Cell> = Vec::new();
        for cell in &cells {
            if cell.basis.ncols() == 1 {
                // 1-dimensional cells cannot split; read the eigenvalue off
                // the restriction directly.
                let (r, _leak) = restrict(fam.op(a), &cell.basis, tol)?;
                let mut values = cell.values.clone();
                values.push(r[[0, 0]]);
                next.push(Cell {
                    basis: cell.basis.clone(),
                    values,
                });
                continue;
            }
            let (r, leak) = restrict(fam.op(a), &cell.basis, tol)?;
            let e = eig(&r, tol)?;
            if !e.ok {
                return Err(Error::NotDiagonalizable { operator: a, leak });
            }
            // Group restriction eigenvector columns by clustered value.
            let mut reps: Vec<Scalar> = Vec::new();
            for v in &e.values {
                if !reps.iter().any(|r| r == v) {
                    reps.push(*v);
                }
            }
            reps.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            for rep in reps {
                let cols: Vec<usize> = (0..e.values.len())
                    .filter(|&j| e.values[j] == rep)
                    .collect();
                let sub = select_columns(&e.vectors, &cols);
                let embedded = cell.basis.dot(&sub);
                let basis = orthonormalize(&embedded)?;
                let mut values = cell.values.clone();
                values.push(rep);
                next.push(Cell { basis, values });
            }
        }
        cells = next;
    }

    let p = hstack(&cells.iter().map(|c| c.basis.clone()).collect::<Vec<_>>());
    let p_inv = inverse(&p)?;
    let p_condition = crate::numerics::condition_number(&p);

    let mut diag_values = vec![Vec::with_capacity(n); fam.len()];
    for cell in &cells {
        for _ in 0..cell.basis.ncols() {
            for (a, v) in cell.values.iter().enumerate() {
                diag_values[a].push(*v);
            }
        }
    }

    let mut offdiag_residual: f64 = 0.0;
    for a in 0..fam.len() {
        let mut d = Mat::zeros((n, n));
        for j in 0..n {
            d[[j, j]] = diag_values[a][j];
        }
        let resid = p_inv.dot(fam.op(a)).dot(&p) - &d;
        offdiag_residual = offdiag_residual.max(tol.scaled_residual(frobenius_norm(&resid), 1));
    }

    Ok(SimDiagResult {
        p,
        p_inv,
        diag_values,
        offdiag_residual,
        p_condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{test_fixtures::*, FieldMode};
    use crate::numerics::{identity, re};
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn diag(values: &[f64]) -> Mat {
        let n = values.len();
        Mat::from_shape_fn(
            (n, n),
            |(i, j)| {
                if i == j {
                    re(values[i])
                } else {
                    re(0.0)
                }
            },
        )
    }

    fn value_tuples(result: &SimDiagResult, n: usize) -> Vec<Vec<(i64, i64)>> {
        let mut tuples: Vec<Vec<(i64, i64)>> = (0..n)
            .map(|j| {
                result
                    .column_tuple(j)
                    .iter()
                    .map(|v| (v.re.round() as i64, v.im.round() as i64))
                    .collect()
            })
            .collect();
        tuples.sort();
        tuples
    }

    #[test]
    fn already_diagonal_family() {
        let fam = OperatorFamily::with_default_labels(
            vec![diag(&[1.0, 2.0]), diag(&[3.0, 3.0])],
            FieldMode::Real,
        )
        .unwrap();
        let tol = fam.tolerance();
        let r = simultaneous_diagonalize(&fam, &tol).unwrap();
        assert!(r.offdiag_residual <= tol.rel_zero);
        assert_eq!(
            value_tuples(&r, 2),
            vec![vec![(1, 0), (3, 0)], vec![(2, 0), (3, 0)]]
        );
    }

    #[test]
    fn identity_member_contributes_constant_values() {
        let m = sigma1();
        let fam =
            OperatorFamily::with_default_labels(vec![identity(2), m], FieldMode::Complex).unwrap();
        let tol = fam.tolerance();
        let r = simultaneous_diagonalize(&fam, &tol).unwrap();
        for j in 0..2 {
            assert!((r.diag_values[0][j] - re(1.0)).norm() < 1e-10);
        }
        let mut vals: Vec<i64> = (0..2)
            .map(|j| r.diag_values[1][j].re.round() as i64)
            .collect();
        vals.sort();
        assert_eq!(vals, vec![-1, 1]);
    }

    #[test]
    fn conjugated_pair_recovers_value_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s = crate::numerics::test_support::random_conditioned(3, 50.0, &mut rng);
        let s_inv = inverse(&s).unwrap();
        let a = s.dot(&diag(&[1.0, 1.0, 2.0])).dot(&s_inv);
        let b = s.dot(&diag(&[5.0, 7.0, 7.0])).dot(&s_inv);
        let fam = OperatorFamily::with_default_labels(vec![a, b], FieldMode::Complex).unwrap();
        let tol = fam.tolerance();
        let r = simultaneous_diagonalize(&fam, &tol).unwrap();
        assert_eq!(
            value_tuples(&r, 3),
            vec![
                vec![(1, 0), (5, 0)],
                vec![(1, 0), (7, 0)],
                vec![(2, 0), (7, 0)],
            ]
        );
    }

    #[test]
    fn rejects_non_commuting_family() {
        let fam = pauli_pair();
        let tol = fam.tolerance();
        assert!(commutation_residual(&fam, &tol) > 0.5);
        assert!(matches!(
            simultaneous_diagonalize(&fam, &tol),
            Err(Error::CommutationViolation { .. })
        ));
    }

    #[test]
    fn commutation_residual_examples() {
        let tol = TolerancePolicy::with_scale(4.0);
        let fam = OperatorFamily::with_default_labels(
            vec![diag(&[1.0, 2.0]), diag(&[3.0, 4.0])],
            FieldMode::Real,
        )
        .unwrap();
        assert_eq!(commutation_residual(&fam, &tol), 0.0);

        let singleton =
            OperatorFamily::with_default_labels(vec![sigma1()], FieldMode::Real).unwrap();
        assert_eq!(
            commutation_residual(&singleton, &singleton.tolerance()),
            0.0
        );

        // σ₁σ₂ − σ₂σ₁ = 2iσ₃ has Frobenius norm 2√2; scale = 1.
        let pauli = pauli_pair();
        let ptol = pauli.tolerance();
        assert!((commutation_residual(&pauli, &ptol) - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_over_random_commuting_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for case in 0..200 {
            let n = 2 + rng.gen_range(0..23usize);
            let n_ops = 1 + rng.gen_range(0..6usize);
            let s = crate::numerics::test_support::random_conditioned(n, 100.0, &mut rng);
            let s_inv = inverse(&s).unwrap();
            let mut ops = Vec::new();
            for _ in 0..n_ops {
                let d = diag(
                    &(0..n)
                        .map(|_| rng.gen_range(-3i64..=3) as f64)
                        .collect::<Vec<_>>(),
                );
                ops.push(s.dot(&d).dot(&s_inv));
            }
            let fam = OperatorFamily::with_default_labels(ops, FieldMode::Complex).unwrap();
            let tol = fam.tolerance();
            let r = simultaneous_diagonalize(&fam, &tol)
                .unwrap_or_else(|e| panic!("case {case} (n={n}, N={n_ops}): {e}"));
            for a in 0..n_ops {
                let mut d = Mat::zeros((n, n));
                for j in 0..n {
                    d[[j, j]] = r.diag_values[a][j];
                }
                let resid = frobenius_norm(&(fam.op(a).dot(&r.p) - r.p.dot(&d)));
                assert!(
                    resid <= tol.rel_zero * tol.scale * n as f64,
                    "case {case}: op {a} residual {resid:.3e}"
                );
            }
        }
    }

    #[test]
    fn reconstructed_families_commute() {
        // Converse direction: anything assembled from a shared basis and
        // diagonal grids commutes up to numerical noise.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 2 + rng.gen_range(0..8usize);
            let s = crate::numerics::test_support::random_conditioned(n, 100.0, &mut rng);
            let s_inv = inverse(&s).unwrap();
            let ops: Vec<Mat> = (0..3)
                .map(|_| {
                    let d = diag(
                        &(0..n)
                            .map(|_| rng.gen_range(-5i64..=5) as f64)
                            .collect::<Vec<_>>(),
                    );
                    s.dot(&d).dot(&s_inv)
                })
                .collect();
            let fam = OperatorFamily::with_default_labels(ops, FieldMode::Complex).unwrap();
            let tol = fam.tolerance();
            assert!(commutation_residual(&fam, &tol) <= 1e-10);
        }
    }

    #[test]
    fn refinement_order_does_not_change_value_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 6;
        let s = crate::numerics::test_support::random_conditioned(n, 30.0, &mut rng);
        let s_inv = inverse(&s).unwrap();
        let d1 = diag(&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let d2 = diag(&[4.0, 5.0, 4.0, 5.0, 4.0, 4.0]);
        let d3 = diag(&[0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let a = s.dot(&d1).dot(&s_inv);
        let b = s.dot(&d2).dot(&s_inv);
        let c = s.dot(&d3).dot(&s_inv);

        let fam1 = OperatorFamily::with_default_labels(
            vec![a.clone(), b.clone(), c.clone()],
            FieldMode::Complex,
        )
        .unwrap();
        let fam2 = OperatorFamily::with_default_labels(vec![c, b, a], FieldMode::Complex).unwrap();
        let tol = fam1.tolerance();
        let r1 = simultaneous_diagonalize(&fam1, &tol).unwrap();
        let r2 = simultaneous_diagonalize(&fam2, &tol).unwrap();
        // fam2 is fam1 reversed; compare tuples after re-reversing.
        let t1 = value_tuples(&r1, n);
        let mut t2: Vec<Vec<(i64, i64)>> = (0..n)
            .map(|j| {
                let mut tup: Vec<(i64, i64)> = r2
                    .column_tuple(j)
                    .iter()
                    .map(|v| (v.re.round() as i64, v.im.round() as i64))
                    .collect();
                tup.reverse();
                tup
            })
            .collect();
        t2.sort();
        assert_eq!(t1, t2);
    }
}
