//! Invariant direct-sum decomposition of an anti-commuting family.
//!
//! The squared family commutes, so it is simultaneously diagonalizable.
//! Grouping the joint eigenbasis columns first by support (which squares
//! act nonzero) and then by the tuple of square-constants yields the
//! invariant summands: the common kernel, per-operator subspaces, and
//! Clifford-representation blocks. Subspaces where an operator acts nonzero
//! while its square vanishes are reported as degenerate and excluded from
//! canonical-form construction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::family::{classify_family, FieldMode, OperatorClass, OperatorFamily};
use crate::numerics::{frobenius_norm, restrict, select_columns, Mat, Scalar, TolerancePolicy};
use crate::simdiag::simultaneous_diagonalize;

/// Kind of one summand of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockKind {
    /// Common kernel of the family.
    Kernel,
    /// Exactly one operator acts, and is nonsingular there.
    SingleOperator,
    /// Two or more operators act, pairwise anti-commuting with constant
    /// nonzero squares: a Clifford-algebra representation.
    Clifford,
    /// Some operator acts nonzero while its square vanishes; canonical
    /// forms are not constructed for these.
    Degenerate,
}

/// One summand of the decomposition.
#[derive(Debug, Clone)]
pub struct Block {
    pub kind: BlockKind,
    /// Column indices into the global basis `p` (contiguous, ascending).
    pub columns: Vec<usize>,
    /// Operator indices acting nonzero on the block.
    pub support: BTreeSet<usize>,
    /// Constant value of Aₐ² on the block, for a ∈ support, when constant
    /// across the whole block. Merged single-operator blocks with mixed
    /// constants leave this empty; the tuple groups carry the fine data.
    pub constants: BTreeMap<usize, Scalar>,
    /// Largest invariance leak over all operators restricted to the block.
    pub invariance_leak: f64,
    /// (positive, negative) counts of real square-constants, reported for
    /// Clifford blocks of real families with real spectra.
    pub signature: Option<(usize, usize)>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }
}

/// Finest grouping level: columns sharing both support set and clustered
/// square-constant tuple. Every tuple group belongs to exactly one block.
#[derive(Debug, Clone)]
pub struct TupleGroup {
    pub support: BTreeSet<usize>,
    pub constants: BTreeMap<usize, Scalar>,
    pub columns: Vec<usize>,
    /// Index of the owning block.
    pub block: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualSummary {
    /// Largest scaled anti-commutator over the family.
    pub anticommutation: f64,
    /// Largest invariance leak over blocks and operators.
    pub invariance: f64,
    /// Largest scaled deviation of a restricted square from its constant.
    pub constancy: f64,
    /// Off-diagonal residual of the squared-family diagonalization.
    pub squared_offdiag: f64,
}

/// Full decomposition result.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    /// Global change of basis; block columns are contiguous in block order.
    pub p: Mat,
    pub blocks: Vec<Block>,
    pub tuple_groups: Vec<TupleGroup>,
    /// Per block: restriction matrix of Aₐ for every a in the block support.
    pub restrictions: Vec<BTreeMap<usize, Mat>>,
    pub residuals: ResidualSummary,
    pub field_mode: FieldMode,
    /// False when a real-mode family has non-real square spectra; the
    /// decomposition then proceeds over C and no real block structure is
    /// claimed.
    pub real_structure_claimed: bool,
    /// Condition number of `p`.
    pub p_condition: f64,
    pub warnings: Vec<String>,
    /// Per-operator classification established during validation.
    pub classes: Vec<OperatorClass>,
}

impl DecompositionReport {
    /// Basis columns of one block as an n×dim matrix.
    pub fn block_basis(&self, block: usize) -> Mat {
        select_columns(&self.p, &self.blocks[block].columns)
    }

    pub fn has_degenerate_block(&self) -> bool {
        self.blocks.iter().any(|b| b.kind == BlockKind::Degenerate)
    }
}

/// The family of squared operators, labels suffixed with `^2`.
pub fn square_family(fam: &OperatorFamily) -> OperatorFamily {
    let ops = fam.ops().iter().map(|a| a.dot(a)).collect();
    let labels = fam.labels().iter().map(|l| format!("{l}^2")).collect();
    OperatorFamily::new(ops, labels, FieldMode::Complex)
        .expect("squaring preserves family validity")
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut out: u128 = 1;
    for i in 0..k.min(n - k) {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out
}

/// Decompose an anti-commuting family into its invariant direct sum.
pub fn decompose(fam: &OperatorFamily, tol: &TolerancePolicy) -> Result<DecompositionReport> {
    let n = fam.dim();
    let n_ops = fam.len();

    // Hypothesis checks: pairwise anti-commutation, per-operator class.
    let anti = crate::family::anticommutation_residual(fam, tol);
    let mut max_anti: f64 = 0.0;
    for a in 0..n_ops {
        for b in (a + 1)..n_ops {
            if anti[[a, b]] > tol.rel_zero {
                return Err(Error::AntiCommutationViolation {
                    a,
                    b,
                    residual: anti[[a, b]],
                });
            }
            max_anti = max_anti.max(anti[[a, b]]);
        }
    }
    let classes = classify_family(fam, tol)?;
    for (a, class) in classes.iter().enumerate() {
        if matches!(class, OperatorClass::Unsupported) {
            return Err(Error::UnsupportedOperator {
                label: fam.label(a).to_string(),
            });
        }
    }

    // Simultaneously diagonalize the squared family.
    let squared = square_family(fam);
    let tol_sq = tol.squared();
    let sd = simultaneous_diagonalize(&squared, &tol_sq)?;

    // Column support sets from the squared diagonal values.
    let zero_sq = tol.zero_threshold_squared();
    let supports: Vec<BTreeSet<usize>> = (0..n)
        .map(|j| {
            (0..n_ops)
                .filter(|&a| sd.diag_values[a][j].norm() > zero_sq)
                .collect()
        })
        .collect();

    // Group by support, then cluster by constant tuple within each group.
    let mut by_support: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for j in 0..n {
        by_support
            .entry(supports[j].iter().copied().collect())
            .or_default()
            .push(j);
    }

    let radius = tol.cluster_radius_squared();
    let mut raw_groups: Vec<(BTreeSet<usize>, BTreeMap<usize, Scalar>, Vec<usize>)> = Vec::new();
    for (support_key, cols) in &by_support {
        let support: BTreeSet<usize> = support_key.iter().copied().collect();
        // Single-linkage union-find over the columns: linked when every
        // component of the constant tuple agrees within the cluster radius.
        let k = cols.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for x in 0..k {
            for y in (x + 1)..k {
                let close = (0..n_ops).all(|a| {
                    (sd.diag_values[a][cols[x]] - sd.diag_values[a][cols[y]]).norm() <= radius
                });
                if close {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                    if rx != ry {
                        parent[rx] = ry;
                    }
                }
            }
        }
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..k {
            let r = find(&mut parent, x);
            members.entry(r).or_default().push(cols[x]);
        }
        for group_cols in members.into_values() {
            let mut constants = BTreeMap::new();
            for &a in &support {
                let mean = group_cols
                    .iter()
                    .map(|&j| sd.diag_values[a][j])
                    .sum::<Scalar>()
                    / group_cols.len() as f64;
                constants.insert(a, mean);
            }
            raw_groups.push((support.clone(), constants, group_cols));
        }
    }

    // Deterministic assembly order: support size, support set, constant
    // tuple (re, im lexicographic), lowest column index.
    raw_groups.sort_by(|x, y| {
        let kx: Vec<f64> = x.1.values().flat_map(|c| [c.re, c.im]).collect();
        let ky: Vec<f64> = y.1.values().flat_map(|c| [c.re, c.im]).collect();
        (x.0.len(), &x.0, kx, x.2[0])
            .partial_cmp(&(y.0.len(), &y.0, ky, y.2[0]))
            .expect("finite sort keys")
    });

    // Support-count bound from the grouping level: distinct support sets of
    // size i can never exceed C(N, i).
    for i in 2..=n_ops {
        let distinct: BTreeSet<&BTreeSet<usize>> = raw_groups
            .iter()
            .filter(|g| g.0.len() == i)
            .map(|g| &g.0)
            .collect();
        assert!(
            (distinct.len() as u128) <= binomial(n_ops, i),
            "support bound violated for size {i}"
        );
    }

    // Inspect each raw group against the original operators: detect
    // degenerate action (nonzero operator with vanishing square).
    let zero_op = tol.zero_threshold();
    struct Inspected {
        support_sq: BTreeSet<usize>,
        constants: BTreeMap<usize, Scalar>,
        columns: Vec<usize>,
        acting: BTreeSet<usize>,
        degenerate: bool,
    }
    let mut inspected: Vec<Inspected> = Vec::new();
    for (support, constants, columns) in raw_groups {
        let basis = select_columns(&sd.p, &columns);
        let mut acting = BTreeSet::new();
        let mut degenerate = false;
        for a in 0..n_ops {
            let (r, _leak) = restrict(fam.op(a), &basis, tol)?;
            if frobenius_norm(&r) > zero_op {
                acting.insert(a);
                if !support.contains(&a) {
                    // Nonzero action where the square vanishes. A singular
                    // restriction is a nilpotent (degenerate) action; a
                    // nonsingular one means the spectrum cannot be
                    // represented consistently at this tolerance.
                    let smin = {
                        use ndarray_linalg::SVD;
                        let (_, s, _) = r.svd(false, false)?;
                        s.iter().copied().fold(f64::INFINITY, f64::min)
                    };
                    if smin > tol.zero_threshold() {
                        return Err(Error::InconsistentSpectrum {
                            operator: a,
                            block_dim: columns.len(),
                        });
                    }
                    degenerate = true;
                }
            }
        }
        inspected.push(Inspected {
            support_sq: support,
            constants,
            columns,
            acting,
            degenerate,
        });
    }

    // Merge into blocks: one kernel block, one single-operator block per
    // operator index, one Clifford block per remaining tuple group. A
    // degenerate group with empty square-support absorbs the plain kernel
    // columns: that subspace is invariant only as a whole.
    enum Slot {
        Kernel,
        Single(usize),
        Group,
    }
    let mut slot_of_group: Vec<Slot> = Vec::new();
    for g in &inspected {
        let slot = if g.support_sq.is_empty() {
            Slot::Kernel
        } else if g.degenerate {
            Slot::Group
        } else if g.support_sq.len() == 1 {
            Slot::Single(*g.support_sq.iter().next().unwrap())
        } else {
            Slot::Group
        };
        slot_of_group.push(slot);
    }

    let mut block_members: Vec<(BlockKind, Vec<usize>)> = Vec::new();
    let kernel_gids: Vec<usize> = (0..inspected.len())
        .filter(|&g| matches!(slot_of_group[g], Slot::Kernel))
        .collect();
    if !kernel_gids.is_empty() {
        let kind = if kernel_gids.iter().any(|&g| inspected[g].degenerate) {
            BlockKind::Degenerate
        } else {
            BlockKind::Kernel
        };
        block_members.push((kind, kernel_gids));
    }
    for a in 0..n_ops {
        let gids: Vec<usize> = (0..inspected.len())
            .filter(|&g| matches!(slot_of_group[g], Slot::Single(b) if b == a))
            .collect();
        if !gids.is_empty() {
            block_members.push((BlockKind::SingleOperator, gids));
        }
    }
    for (gi, slot) in slot_of_group.iter().enumerate() {
        if matches!(slot, Slot::Group) {
            let kind = if inspected[gi].degenerate {
                BlockKind::Degenerate
            } else {
                BlockKind::Clifford
            };
            block_members.push((kind, vec![gi]));
        }
    }

    // Permute the basis so block columns are contiguous, then finalize
    // blocks and tuple groups against the new column numbering.
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    for (_, gids) in &block_members {
        for &gi in gids {
            perm.extend(inspected[gi].columns.iter().copied());
        }
    }
    debug_assert_eq!(perm.len(), n);
    let p = select_columns(&sd.p, &perm);

    let mut real_structure_claimed = fam.field_mode() == FieldMode::Real;
    let mut warnings = Vec::new();

    let mut blocks: Vec<Block> = Vec::new();
    let mut tuple_groups: Vec<TupleGroup> = Vec::new();
    let mut restrictions: Vec<BTreeMap<usize, Mat>> = Vec::new();
    let mut max_leak: f64 = 0.0;
    let mut max_constancy: f64 = 0.0;
    let mut at = 0usize;
    for (kind, gids) in &block_members {
        let mut columns = Vec::new();
        let mut support = BTreeSet::new();
        for &gi in gids {
            let g = &inspected[gi];
            let cols: Vec<usize> = (at..at + g.columns.len()).collect();
            at += g.columns.len();
            columns.extend(cols.iter().copied());
            support.extend(g.acting.iter().copied());
            tuple_groups.push(TupleGroup {
                support: g.support_sq.clone(),
                constants: g.constants.clone(),
                columns: cols,
                block: blocks.len(),
            });
        }

        // Constants: only when shared by every constituent tuple group.
        let mut constants: BTreeMap<usize, Scalar> = BTreeMap::new();
        if let Some(&first) = gids.first() {
            constants = inspected[first].constants.clone();
            for &gi in &gids[1..] {
                constants.retain(|a, c| {
                    inspected[gi]
                        .constants
                        .get(a)
                        .is_some_and(|c2| (*c - c2).norm() <= radius)
                });
            }
            if *kind == BlockKind::Degenerate {
                // Record the (≈ 0) square values of acting operators too.
                for &a in &support {
                    if !constants.contains_key(&a) && gids.len() == 1 {
                        let g = &inspected[first];
                        let mean = g
                            .columns
                            .iter()
                            .map(|&j| sd.diag_values[a][j])
                            .sum::<Scalar>()
                            / g.columns.len() as f64;
                        constants.insert(a, mean);
                    } else {
                        constants.entry(a).or_insert(Scalar::new(0.0, 0.0));
                    }
                }
            }
        }

        let basis = select_columns(&p, &columns);
        let mut block_restrictions = BTreeMap::new();
        let mut leak_max: f64 = 0.0;
        for a in 0..n_ops {
            let (r, leak) = restrict(fam.op(a), &basis, tol)?;
            leak_max = leak_max.max(leak);
            if support.contains(&a) {
                if let Some(c) = constants.get(&a) {
                    let mut dev = r.dot(&r);
                    for i in 0..dev.nrows() {
                        dev[[i, i]] -= c;
                    }
                    max_constancy = max_constancy.max(tol.scaled_residual(frobenius_norm(&dev), 2));
                }
                block_restrictions.insert(a, r);
            }
        }
        max_leak = max_leak.max(leak_max);

        // Signature for real-mode Clifford blocks with real constants.
        let signature = if fam.field_mode() == FieldMode::Real && *kind == BlockKind::Clifford {
            if constants.values().all(|c| c.im.abs() <= radius) {
                let pos = constants.values().filter(|c| c.re > 0.0).count();
                let neg = constants.values().filter(|c| c.re < 0.0).count();
                Some((pos, neg))
            } else {
                real_structure_claimed = false;
                None
            }
        } else {
            None
        };

        blocks.push(Block {
            kind: *kind,
            columns,
            support,
            constants,
            invariance_leak: leak_max,
            signature,
        });
        restrictions.push(block_restrictions);
    }

    if fam.field_mode() == FieldMode::Real && !real_structure_claimed {
        warnings.push(
            "squared family has non-real spectra; no real block structure claimed".to_string(),
        );
    }
    if sd.p_condition > 1e8 {
        warnings.push(format!(
            "basis is ill-conditioned (condition {:.3e})",
            sd.p_condition
        ));
    }

    let dims: usize = blocks.iter().map(Block::dim).sum();
    debug_assert_eq!(dims, n, "blocks must partition the basis columns");

    Ok(DecompositionReport {
        p,
        blocks,
        tuple_groups,
        restrictions,
        residuals: ResidualSummary {
            anticommutation: max_anti,
            invariance: max_leak,
            constancy: max_constancy,
            squared_offdiag: sd.offdiag_residual,
        },
        field_mode: fam.field_mode(),
        real_structure_claimed,
        p_condition: sd.p_condition,
        warnings,
        classes,
    })
}

/// Recompute the largest invariance leak of the report's blocks against the
/// family, from scratch. Must stay at or below `tol.rel_zero` for the
/// decomposition to be accepted.
pub fn verify_block_invariance(
    rep: &DecompositionReport,
    fam: &OperatorFamily,
    tol: &TolerancePolicy,
) -> f64 {
    let mut worst: f64 = 0.0;
    for block in 0..rep.blocks.len() {
        let basis = rep.block_basis(block);
        for a in 0..fam.len() {
            match restrict(fam.op(a), &basis, tol) {
                Ok((_, leak)) => worst = worst.max(leak),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::test_fixtures::*;
    use crate::numerics::{identity, max_abs_diff, re};

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

    #[test]
    fn square_family_examples() {
        let pauli = pauli_pair();
        let sq = square_family(&pauli);
        for a in 0..2 {
            assert!(max_abs_diff(sq.op(a), &identity(2)) < 1e-15);
        }
        assert_eq!(sq.label(0), "A1^2");

        let single =
            OperatorFamily::with_default_labels(vec![diag(&[1.0, -1.0])], FieldMode::Real).unwrap();
        let sq = square_family(&single);
        assert!(max_abs_diff(sq.op(0), &identity(2)) < 1e-15);

        let mut m = Mat::zeros((2, 2));
        m[[0, 1]] = re(2.0);
        m[[1, 0]] = re(1.0);
        let fam = OperatorFamily::with_default_labels(vec![m], FieldMode::Real).unwrap();
        let sq = square_family(&fam);
        assert!(max_abs_diff(sq.op(0), &diag(&[2.0, 2.0])) < 1e-15);
    }

    #[test]
    fn pauli_pair_single_clifford_block() {
        let fam = pauli_pair();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        assert_eq!(rep.blocks.len(), 1);
        let b = &rep.blocks[0];
        assert_eq!(b.kind, BlockKind::Clifford);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.support, BTreeSet::from([0, 1]));
        assert!((b.constants[&0] - re(1.0)).norm() < 1e-10);
        assert!((b.constants[&1] - re(1.0)).norm() < 1e-10);
    }

    #[test]
    fn singleton_diagonal_splits_single_and_kernel() {
        let fam =
            OperatorFamily::with_default_labels(vec![diag(&[3.0, 0.0])], FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        assert_eq!(rep.blocks.len(), 2);
        assert_eq!(rep.blocks[0].kind, BlockKind::Kernel);
        assert_eq!(rep.blocks[0].dim(), 1);
        assert!(rep.blocks[0].support.is_empty());
        assert_eq!(rep.blocks[1].kind, BlockKind::SingleOperator);
        assert_eq!(rep.blocks[1].dim(), 1);
        assert!((rep.blocks[1].constants[&0] - re(9.0)).norm() < 1e-10);
    }

    #[test]
    fn kernel_dim_matches_stacked_kernel() {
        let fam = OperatorFamily::with_default_labels(
            vec![diag(&[3.0, 0.0, 0.0]), diag(&[0.0, 2.0, 0.0])],
            FieldMode::Real,
        )
        .unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        let kernel_dim: usize = rep
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Kernel)
            .map(Block::dim)
            .sum();
        assert_eq!(kernel_dim, fam.common_kernel_dim(&tol));
        assert_eq!(kernel_dim, 1);
    }

    #[test]
    fn nilpotent_member_yields_degenerate_block() {
        let mut nil = Mat::zeros((2, 2));
        nil[[0, 1]] = re(1.0);
        let fam = OperatorFamily::with_default_labels(vec![nil], FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        assert_eq!(rep.blocks.len(), 1);
        assert_eq!(rep.blocks[0].kind, BlockKind::Degenerate);
        assert_eq!(rep.blocks[0].dim(), 2);
        assert_eq!(rep.blocks[0].support, BTreeSet::from([0]));
        assert!(rep.has_degenerate_block());
    }

    #[test]
    fn tiny_eigenvalue_triggers_inconsistent_spectrum() {
        // Diagonalizable with an eigenvalue whose square is below the zero
        // threshold while the operator itself is not: the tolerance regime
        // cannot represent the spectrum consistently.
        let fam =
            OperatorFamily::with_default_labels(vec![diag(&[1e-6, 1.0])], FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        assert!(matches!(
            decompose(&fam, &tol),
            Err(Error::InconsistentSpectrum { .. })
        ));
    }

    #[test]
    fn rejects_commuting_but_not_anticommuting_family() {
        let fam =
            OperatorFamily::with_default_labels(vec![identity(2), identity(2)], FieldMode::Real)
                .unwrap();
        let tol = fam.tolerance();
        assert!(matches!(
            decompose(&fam, &tol),
            Err(Error::AntiCommutationViolation { .. })
        ));
    }

    #[test]
    fn real_pair_signature_reported() {
        // σ₁ and J = [[0,1],[−1,0]] anti-commute with squares (I, −I).
        let mut j = Mat::zeros((2, 2));
        j[[0, 1]] = re(1.0);
        j[[1, 0]] = re(-1.0);
        let fam = OperatorFamily::with_default_labels(vec![sigma1(), j], FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        assert_eq!(rep.blocks.len(), 1);
        assert_eq!(rep.blocks[0].kind, BlockKind::Clifford);
        assert_eq!(rep.blocks[0].signature, Some((1, 1)));
        assert!(rep.real_structure_claimed);
    }

    #[test]
    fn blocks_partition_columns_and_singles_merge() {
        let fam = OperatorFamily::with_default_labels(
            vec![diag(&[3.0, 0.0, 2.0, 0.0]), diag(&[0.0, 0.0, 0.0, 5.0])],
            FieldMode::Real,
        )
        .unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        let mut seen: Vec<usize> = rep
            .blocks
            .iter()
            .flat_map(|b| b.columns.iter().copied())
            .collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3]);
        // Distinct constants on the same single operator merge into one
        // block; the shared-constant map is then empty.
        let singles: Vec<&Block> = rep
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::SingleOperator)
            .collect();
        assert_eq!(singles.len(), 2);
        assert_eq!(
            singles.iter().map(|b| b.dim()).collect::<Vec<_>>(),
            vec![2, 1]
        );
        assert!(singles[0].constants.is_empty());
        assert_eq!(rep.tuple_groups.len(), 4);
    }

    #[test]
    fn verify_invariance_flags_tampered_grouping() {
        let fam = OperatorFamily::with_default_labels(
            vec![diag(&[3.0, 0.0, 2.0]), diag(&[0.0, 5.0, 0.0])],
            FieldMode::Real,
        )
        .unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        assert!(verify_block_invariance(&rep, &fam, &tol) <= tol.rel_zero);

        // Mix a column across two blocks: the leak must explode.
        let mut tampered = rep.clone();
        assert!(tampered.blocks.len() >= 2);
        let (c0, c1) = (tampered.blocks[0].columns[0], tampered.blocks[1].columns[0]);
        let mixed = {
            let x = rep.p.column(c0).to_owned() + rep.p.column(c1).to_owned();
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            x.mapv(|z| z / norm)
        };
        tampered.p.column_mut(c0).assign(&mixed);
        assert!(verify_block_invariance(&tampered, &fam, &tol) > 100.0 * tol.rel_zero);
    }

    #[test]
    fn clifford_block_contract_on_restrictions() {
        // On every Clifford block the restricted operators pairwise
        // anti-commute and square to their constants.
        let specs = vec![
            crate::oracle::BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(2.0)]),
            crate::oracle::BlockSpec::clifford(&[0, 1, 2], 4, &[re(1.0), re(3.0), re(2.0)]),
            crate::oracle::BlockSpec::kernel(1),
        ];
        let (clean, _) = crate::oracle::build_family(&specs, 3, FieldMode::Complex).unwrap();
        let fam = crate::oracle::scramble(
            &clean,
            &crate::oracle::ScrambleSpec {
                conj_cond_max: 30.0,
                perm_seed: 5,
                noise: 0.0,
            },
        )
        .unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        let mut clifford_seen = 0;
        for (bi, block) in rep.blocks.iter().enumerate() {
            if block.kind != BlockKind::Clifford {
                continue;
            }
            clifford_seen += 1;
            let ops: Vec<&Mat> = block
                .support
                .iter()
                .map(|a| &rep.restrictions[bi][a])
                .collect();
            for (i, r) in ops.iter().enumerate() {
                let a = *block.support.iter().nth(i).unwrap();
                let mut sq = r.dot(*r);
                for d in 0..sq.nrows() {
                    sq[[d, d]] -= block.constants[&a];
                }
                assert!(tol.scaled_residual(frobenius_norm(&sq), 2) <= tol.rel_zero);
                for s in &ops[i + 1..] {
                    let anti = r.dot(*s) + s.dot(*r);
                    assert!(tol.scaled_residual(frobenius_norm(&anti), 2) <= tol.rel_zero);
                }
            }
        }
        assert_eq!(clifford_seen, 2);
        // Global basis columns are unit norm.
        for j in 0..fam.dim() {
            let norm: f64 = rep
                .p
                .column(j)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_plus_nilpotent_merge_into_one_degenerate_block() {
        // One true-kernel direction and one nilpotent 2x2 summand: the
        // squared family vanishes on all three columns, so they form one
        // invariant subspace, reported degenerate as a whole.
        let mut op = Mat::zeros((3, 3));
        op[[1, 2]] = re(1.0);
        let fam = OperatorFamily::with_default_labels(vec![op], FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        assert_eq!(rep.blocks.len(), 1);
        assert_eq!(rep.blocks[0].kind, BlockKind::Degenerate);
        assert_eq!(rep.blocks[0].dim(), 3);
        assert!(verify_block_invariance(&rep, &fam, &tol) <= tol.rel_zero);
    }
}
