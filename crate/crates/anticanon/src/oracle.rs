//! Test-data factory and brute-force oracle: builds families with exactly
//! known block structure, scrambles them by conjugation and permutation,
//! and replays the expected report for comparison.
//!
//! Generators are assembled from explicit 2×2 seeds by Kronecker chains,
//! deliberately independent of the halving recursion in the canonical
//! module, so round-trip tests are not self-fulfilling.

use std::collections::{BTreeMap, BTreeSet};

use ndarray_linalg::QR;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::decomposition::{BlockKind, DecompositionReport};
use crate::error::{Error, Result};
use crate::family::{FieldMode, OperatorFamily};
use crate::numerics::{dagger, identity, inverse, kron, re, Mat, Scalar, TolerancePolicy};

/// Specification of one block to synthesize.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub dim: usize,
    /// Operator indices (0-based) acting on the block.
    pub support: BTreeSet<usize>,
    /// Square constants per supported operator. Degenerate blocks carry
    /// zero constants.
    pub constants: BTreeMap<usize, Scalar>,
    /// Drives sign choices inside the block.
    pub seed: u64,
}

impl BlockSpec {
    pub fn kernel(dim: usize) -> Self {
        Self {
            kind: BlockKind::Kernel,
            dim,
            support: BTreeSet::new(),
            constants: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn single(op: usize, dim: usize, constant: Scalar) -> Self {
        Self {
            kind: BlockKind::SingleOperator,
            dim,
            support: BTreeSet::from([op]),
            constants: BTreeMap::from([(op, constant)]),
            seed: 0,
        }
    }

    pub fn clifford(support: &[usize], dim: usize, constants: &[Scalar]) -> Self {
        assert_eq!(support.len(), constants.len());
        let support_set: BTreeSet<usize> = support.iter().copied().collect();
        assert_eq!(support_set.len(), support.len(), "duplicate support index");
        let sorted: Vec<usize> = support_set.iter().copied().collect();
        let map = support
            .iter()
            .zip(constants)
            .map(|(&a, &c)| (a, c))
            .collect();
        let _ = sorted;
        Self {
            kind: BlockKind::Clifford,
            dim,
            support: support_set,
            constants: map,
            seed: 0,
        }
    }

    pub fn degenerate(op: usize, dim: usize) -> Self {
        Self {
            kind: BlockKind::Degenerate,
            dim,
            support: BTreeSet::from([op]),
            constants: BTreeMap::from([(op, re(0.0))]),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// How to scramble a generated family.
#[derive(Debug, Clone, Copy)]
pub struct ScrambleSpec {
    /// Condition-number cap for the random conjugator.
    pub conj_cond_max: f64,
    pub perm_seed: u64,
    /// Entrywise perturbation amplitude, zero except for robustness tests.
    pub noise: f64,
}

impl Default for ScrambleSpec {
    fn default() -> Self {
        Self {
            conj_cond_max: 50.0,
            perm_seed: 0,
            noise: 0.0,
        }
    }
}

/// One expected summand, normalized the same way the decomposition merges
/// blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedBlock {
    pub kind: BlockKind,
    pub support: BTreeSet<usize>,
    pub constants: BTreeMap<usize, Scalar>,
    pub dim: usize,
}

/// Everything [`compare_reports`] needs to check a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedSkeleton {
    pub n: usize,
    pub n_ops: usize,
    pub blocks: Vec<ExpectedBlock>,
}

const SQ_CONST_MATCH_RADIUS_FACTOR: f64 = 10.0;

fn sigma1() -> Mat {
    let mut m = Mat::zeros((2, 2));
    m[[0, 1]] = re(1.0);
    m[[1, 0]] = re(1.0);
    m
}

fn sigma2() -> Mat {
    let mut m = Mat::zeros((2, 2));
    m[[0, 1]] = Scalar::new(0.0, -1.0);
    m[[1, 0]] = Scalar::new(0.0, 1.0);
    m
}

fn sigma3() -> Mat {
    let mut m = Mat::zeros((2, 2));
    m[[0, 0]] = re(1.0);
    m[[1, 1]] = re(-1.0);
    m
}

/// Real rotation J = [[0, 1], [−1, 0]], squares to −I.
fn j_seed() -> Mat {
    let mut m = Mat::zeros((2, 2));
    m[[0, 1]] = re(1.0);
    m[[1, 0]] = re(-1.0);
    m
}

fn tensor_chain(factors: &[Mat]) -> Mat {
    factors.iter().fold(identity(1), |acc, f| kron(&acc, f))
}

/// Minimal-dimension generator set with the square signs each slot carries.
///
/// Complex mode: (σ₁, σ₂) pairs with σ₃ prefixes and a σ₃ tail, all
/// squaring to +I. Real mode: σ₂ is replaced by J (squaring −I), which
/// fixes the number of negative slots; for even counts the last pair can
/// be (σ₁, σ₃) instead, trading one negative slot for a positive one.
fn chain_min_generators(m: usize, mode: FieldMode, negatives: usize) -> Result<Vec<(Mat, f64)>> {
    let k = m / 2;
    let tail = m % 2 == 1;
    let mut out: Vec<(Mat, f64)> = Vec::with_capacity(m);

    let plan_last_pair_positive = match mode {
        FieldMode::Complex => false,
        FieldMode::Real => {
            if tail {
                if negatives != k {
                    return Err(Error::InvalidSpec(format!(
                        "a real block with {m} generators needs exactly {k} negative constants, got {negatives}"
                    )));
                }
                false
            } else if negatives == k {
                false
            } else if k >= 1 && negatives == k - 1 {
                true
            } else {
                return Err(Error::InvalidSpec(format!(
                    "a real block with {m} generators needs {} or {k} negative constants, got {negatives}",
                    k.saturating_sub(1)
                )));
            }
        }
    };

    for level in 0..k {
        let mut first = vec![sigma3(); level];
        first.push(sigma1());
        first.extend(std::iter::repeat_with(|| identity(2)).take(k - level - 1));
        out.push((tensor_chain(&first), 1.0));

        let last_positive_pair = plan_last_pair_positive && level == k - 1;
        let (second_seed, sign) = match mode {
            FieldMode::Complex => (sigma2(), 1.0),
            FieldMode::Real if last_positive_pair => (sigma3(), 1.0),
            FieldMode::Real => (j_seed(), -1.0),
        };
        let mut second = vec![sigma3(); level];
        second.push(second_seed);
        second.extend(std::iter::repeat_with(|| identity(2)).take(k - level - 1));
        out.push((tensor_chain(&second), sign));
    }
    if tail {
        out.push((tensor_chain(&vec![sigma3(); k]), 1.0));
    }
    Ok(out)
}

fn validate_spec(spec: &BlockSpec, n_ops: usize, mode: FieldMode) -> Result<()> {
    if spec.dim == 0 {
        return Err(Error::InvalidSpec(
            "block dimension must be positive".into(),
        ));
    }
    if spec.support.iter().any(|&a| a >= n_ops) {
        return Err(Error::InvalidSpec(format!(
            "support index out of range for {n_ops} operators"
        )));
    }
    if mode == FieldMode::Real && spec.constants.values().any(|c| c.im != 0.0) {
        return Err(Error::InvalidSpec(
            "real-mode block constants must be real".into(),
        ));
    }
    match spec.kind {
        BlockKind::Kernel => {
            if !spec.support.is_empty() {
                return Err(Error::InvalidSpec(
                    "kernel blocks have empty support".into(),
                ));
            }
        }
        BlockKind::SingleOperator => {
            if spec.support.len() != 1 {
                return Err(Error::InvalidSpec(
                    "single-operator blocks need exactly one supported operator".into(),
                ));
            }
            let a = *spec.support.iter().next().unwrap();
            let c = spec.constants.get(&a).copied().unwrap_or(re(0.0));
            if c.norm() == 0.0 {
                return Err(Error::InvalidSpec(
                    "single-operator blocks need a nonzero constant".into(),
                ));
            }
            if mode == FieldMode::Real && c.re < 0.0 && spec.dim % 2 != 0 {
                return Err(Error::InvalidSpec(
                    "a real operator with negative square needs an even-dimensional block".into(),
                ));
            }
        }
        BlockKind::Clifford => {
            let m = spec.support.len();
            if m < 2 {
                return Err(Error::InvalidSpec(
                    "clifford blocks need at least two supported operators".into(),
                ));
            }
            if spec
                .support
                .iter()
                .any(|a| spec.constants.get(a).map_or(true, |c| c.norm() == 0.0))
            {
                return Err(Error::InvalidSpec(
                    "clifford blocks need a nonzero constant per supported operator".into(),
                ));
            }
            let min_dim = 1usize << (m / 2);
            if spec.dim % min_dim != 0 {
                return Err(Error::InvalidSpec(format!(
                    "clifford block with {m} generators needs a dimension divisible by {min_dim}"
                )));
            }
            if mode == FieldMode::Real {
                let negatives = spec.constants.values().filter(|c| c.re < 0.0).count();
                chain_min_generators(m, mode, negatives)?;
            }
        }
        BlockKind::Degenerate => {
            if spec.support.len() != 1 {
                return Err(Error::InvalidSpec(
                    "degenerate blocks are built from one nilpotent operator".into(),
                ));
            }
            if spec.dim % 2 != 0 {
                return Err(Error::InvalidSpec(
                    "degenerate (nilpotent) blocks need even dimension".into(),
                ));
            }
            if spec.constants.values().any(|c| c.norm() != 0.0) {
                return Err(Error::InvalidSpec(
                    "degenerate block constants must be zero".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Per-operator matrices of one block, dim×dim each, zero when the operator
/// is outside the support.
fn build_block(spec: &BlockSpec, n_ops: usize, mode: FieldMode) -> Result<Vec<Mat>> {
    let d = spec.dim;
    let mut out = vec![Mat::zeros((d, d)); n_ops];
    match spec.kind {
        BlockKind::Kernel => {}
        BlockKind::SingleOperator => {
            let a = *spec.support.iter().next().unwrap();
            let c = spec.constants[&a];
            let root = c.sqrt();
            if mode == FieldMode::Real && c.re < 0.0 {
                // √|c| · (I ⊗ J): real, squares to c·I.
                let block = kron(&identity(d / 2), &j_seed());
                out[a] = block.mapv(|z| z * (-c.re).sqrt());
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5151_5151);
                let mut m = Mat::zeros((d, d));
                for i in 0..d {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    m[[i, i]] = root * sign;
                }
                out[a] = m;
            }
        }
        BlockKind::Clifford => {
            let ops: Vec<usize> = spec.support.iter().copied().collect();
            let m = ops.len();
            let negatives = spec
                .constants
                .values()
                .filter(|c| c.im == 0.0 && c.re < 0.0)
                .count();
            let gens = chain_min_generators(m, mode, negatives)?;
            let min_dim = gens[0].0.nrows();
            let copies = d / min_dim;

            // Assign negative-square constants to negative slots (real
            // mode); in complex mode order is immaterial.
            let mut neg_slots: Vec<usize> = Vec::new();
            let mut pos_slots: Vec<usize> = Vec::new();
            for (i, (_, sign)) in gens.iter().enumerate() {
                if *sign < 0.0 {
                    neg_slots.push(i);
                } else {
                    pos_slots.push(i);
                }
            }
            let mut neg_it = neg_slots.into_iter();
            let mut pos_it = pos_slots.into_iter();
            for &a in &ops {
                let c = spec.constants[&a];
                let slot = if mode == FieldMode::Real && c.re < 0.0 {
                    neg_it.next().expect("validated negative slot count")
                } else {
                    pos_it
                        .next()
                        .or_else(|| neg_it.next())
                        .expect("validated slot count")
                };
                let (gen, sign) = &gens[slot];
                // A = α·Γ with α² · sign = c.
                let alpha = if *sign < 0.0 { (-c).sqrt() } else { c.sqrt() };
                let scaled = gen.mapv(|z| z * alpha);
                out[a] = kron(&identity(copies), &scaled);
            }
        }
        BlockKind::Degenerate => {
            let a = *spec.support.iter().next().unwrap();
            let mut nil = Mat::zeros((2, 2));
            nil[[0, 1]] = re(1.0);
            out[a] = kron(&identity(d / 2), &nil);
        }
    }
    Ok(out)
}

/// Normalize a spec list into the block multiset the decomposition reports:
/// kernel dims merge (absorbed by degenerate specs when present), per-
/// operator single blocks merge, and Clifford specs with identical support
/// and constants coalesce.
fn expected_skeleton(specs: &[BlockSpec], n_ops: usize, n: usize) -> ExpectedSkeleton {
    let mut blocks: Vec<ExpectedBlock> = Vec::new();

    let kernel_dim: usize = specs
        .iter()
        .filter(|s| s.kind == BlockKind::Kernel)
        .map(|s| s.dim)
        .sum();
    let degen: Vec<&BlockSpec> = specs
        .iter()
        .filter(|s| s.kind == BlockKind::Degenerate)
        .collect();
    if !degen.is_empty() {
        let mut support = BTreeSet::new();
        let mut constants = BTreeMap::new();
        let mut dim = kernel_dim;
        for s in &degen {
            support.extend(s.support.iter().copied());
            for &a in &s.support {
                constants.insert(a, re(0.0));
            }
            dim += s.dim;
        }
        blocks.push(ExpectedBlock {
            kind: BlockKind::Degenerate,
            support,
            constants,
            dim,
        });
    } else if kernel_dim > 0 {
        blocks.push(ExpectedBlock {
            kind: BlockKind::Kernel,
            support: BTreeSet::new(),
            constants: BTreeMap::new(),
            dim: kernel_dim,
        });
    }

    for a in 0..n_ops {
        let singles: Vec<&BlockSpec> = specs
            .iter()
            .filter(|s| s.kind == BlockKind::SingleOperator && s.support.contains(&a))
            .collect();
        if singles.is_empty() {
            continue;
        }
        let dim = singles.iter().map(|s| s.dim).sum();
        let shared = singles
            .iter()
            .map(|s| s.constants[&a])
            .reduce(|x, y| {
                if (x - y).norm() == 0.0 {
                    x
                } else {
                    Scalar::new(f64::NAN, 0.0)
                }
            })
            .unwrap();
        let constants = if shared.re.is_nan() {
            BTreeMap::new()
        } else {
            BTreeMap::from([(a, shared)])
        };
        blocks.push(ExpectedBlock {
            kind: BlockKind::SingleOperator,
            support: BTreeSet::from([a]),
            constants,
            dim,
        });
    }

    let mut cliffords: Vec<ExpectedBlock> = Vec::new();
    for s in specs.iter().filter(|s| s.kind == BlockKind::Clifford) {
        let merged = cliffords.iter_mut().find(|b| {
            b.support == s.support
                && b.constants
                    .iter()
                    .all(|(a, c)| (s.constants[a] - c).norm() == 0.0)
        });
        match merged {
            Some(b) => b.dim += s.dim,
            None => cliffords.push(ExpectedBlock {
                kind: BlockKind::Clifford,
                support: s.support.clone(),
                constants: s.constants.clone(),
                dim: s.dim,
            }),
        }
    }
    blocks.extend(cliffords);

    ExpectedSkeleton { n, n_ops, blocks }
}

/// Assemble a block-diagonal family from specs, together with the skeleton
/// the decomposition of that family (scrambled or not) must reproduce.
pub fn build_family(
    specs: &[BlockSpec],
    n_ops: usize,
    mode: FieldMode,
) -> Result<(OperatorFamily, ExpectedSkeleton)> {
    if specs.is_empty() {
        return Err(Error::InvalidSpec("no blocks specified".into()));
    }
    if n_ops == 0 {
        return Err(Error::InvalidSpec("need at least one operator".into()));
    }
    for spec in specs {
        validate_spec(spec, n_ops, mode)?;
    }
    let n: usize = specs.iter().map(|s| s.dim).sum();
    let mut ops = vec![Mat::zeros((n, n)); n_ops];
    let mut at = 0usize;
    for spec in specs {
        let block_ops = build_block(spec, n_ops, mode)?;
        for (a, b) in block_ops.iter().enumerate() {
            ops[a]
                .slice_mut(ndarray::s![at..at + spec.dim, at..at + spec.dim])
                .assign(b);
        }
        at += spec.dim;
    }
    let fam = OperatorFamily::with_default_labels(ops, mode)?;
    Ok((fam, expected_skeleton(specs, n_ops, n)))
}

/// Conjugate the family by an explicit invertible matrix after permuting
/// the basis, optionally adding entrywise noise.
pub fn scramble_with(
    fam: &OperatorFamily,
    conjugator: &Mat,
    perm: &[usize],
    noise: f64,
    noise_seed: u64,
) -> Result<OperatorFamily> {
    let n = fam.dim();
    assert_eq!(perm.len(), n);
    let mut t = Mat::zeros((n, n));
    for (j, &pj) in perm.iter().enumerate() {
        t[[pj, j]] = re(1.0);
    }
    let t = t.dot(conjugator);
    let t_inv = inverse(&t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed ^ 0xD15E_A5E5);
    let ops: Vec<Mat> = fam
        .ops()
        .iter()
        .map(|a| {
            let mut m = t_inv.dot(a).dot(&t);
            if noise > 0.0 {
                for z in m.iter_mut() {
                    let dre = rng.gen_range(-noise..noise);
                    let dim = if fam.field_mode() == FieldMode::Complex {
                        rng.gen_range(-noise..noise)
                    } else {
                        0.0
                    };
                    *z += Scalar::new(dre, dim);
                }
            }
            m
        })
        .collect();
    OperatorFamily::new(ops, fam.labels().to_vec(), fam.field_mode())
}

/// Random conjugator with condition number at most `cond_max`: a product of
/// reflection-built unitaries and a diagonal scaling with spectrum in
/// [1, cond_max]. Real mode yields a real orthogonal-times-diagonal matrix.
pub fn random_conjugator(
    n: usize,
    cond_max: f64,
    mode: FieldMode,
    rng: &mut ChaCha8Rng,
) -> Result<Mat> {
    assert!(cond_max >= 1.0);
    let gaussianish = |rng: &mut ChaCha8Rng| -> Mat {
        Mat::from_shape_fn((n, n), |_| {
            let im = if mode == FieldMode::Complex {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            Scalar::new(rng.gen_range(-1.0..1.0), im)
        })
    };
    let (u, _) = gaussianish(rng).qr()?;
    let (v, _) = gaussianish(rng).qr()?;
    let mut d = Mat::zeros((n, n));
    for i in 0..n {
        let sv = if i == 0 {
            1.0
        } else {
            rng.gen_range(1.0..cond_max.max(1.0 + f64::EPSILON))
        };
        d[[i, i]] = re(sv);
    }
    Ok(u.dot(&d).dot(&dagger(&v)))
}

/// Scramble a family per spec: permutation, then conjugation, then noise.
/// Anti-commutation is exactly preserved by conjugation.
pub fn scramble(fam: &OperatorFamily, spec: &ScrambleSpec) -> Result<OperatorFamily> {
    let n = fam.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.perm_seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let s = random_conjugator(n, spec.conj_cond_max, fam.field_mode(), &mut rng)?;
    scramble_with(fam, &s, &perm, spec.noise, spec.perm_seed)
}

/// Structural comparison of an expected skeleton against a computed report.
/// Returns whether they match and a human-readable diff.
pub fn compare_reports(
    expected: &ExpectedSkeleton,
    actual: &DecompositionReport,
    tol: &TolerancePolicy,
) -> (bool, String) {
    let mut diff = String::new();
    let radius = SQ_CONST_MATCH_RADIUS_FACTOR * tol.cluster_radius_squared();

    if expected.n != actual.p.nrows() {
        return (
            false,
            format!(
                "dimension mismatch: expected {}, got {}",
                expected.n,
                actual.p.nrows()
            ),
        );
    }

    let fmt_block = |kind: BlockKind,
                     support: &BTreeSet<usize>,
                     constants: &BTreeMap<usize, Scalar>,
                     dim: usize| {
        let sup: Vec<String> = support.iter().map(|a| format!("A{}", a + 1)).collect();
        let cons: Vec<String> = constants
            .iter()
            .map(|(a, c)| format!("A{}²={:.4}{:+.4}i", a + 1, c.re, c.im))
            .collect();
        format!(
            "{kind:?} dim {dim} support {{{}}} constants [{}]",
            sup.join(","),
            cons.join(", ")
        )
    };

    let mut matched = vec![false; actual.blocks.len()];
    for eb in &expected.blocks {
        let found = actual.blocks.iter().enumerate().position(|(i, ab)| {
            if matched[i] || ab.kind != eb.kind || ab.dim() != eb.dim || ab.support != eb.support {
                return false;
            }
            match eb.kind {
                BlockKind::Kernel => true,
                // Merged single-operator blocks are compared by operator
                // index and total dimension only.
                BlockKind::SingleOperator => true,
                BlockKind::Clifford | BlockKind::Degenerate => eb.constants.iter().all(|(a, c)| {
                    ab.constants
                        .get(a)
                        .is_some_and(|c2| (c - c2).norm() <= radius)
                }),
            }
        });
        match found {
            Some(i) => matched[i] = true,
            None => {
                diff.push_str(&format!(
                    "missing block: {}\n",
                    fmt_block(eb.kind, &eb.support, &eb.constants, eb.dim)
                ));
            }
        }
    }
    for (i, ab) in actual.blocks.iter().enumerate() {
        if !matched[i] {
            diff.push_str(&format!(
                "unexpected block: {}\n",
                fmt_block(ab.kind, &ab.support, &ab.constants, ab.dim())
            ));
        }
    }

    (diff.is_empty(), diff)
}

/// One corpus entry: specs plus scrambling, fully determined by a seed.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub specs: Vec<BlockSpec>,
    pub n_ops: usize,
    pub field_mode: FieldMode,
    pub scramble: ScrambleSpec,
    pub label: String,
}

impl CorpusCase {
    pub fn realize(&self) -> Result<(OperatorFamily, ExpectedSkeleton)> {
        let (fam, skeleton) = build_family(&self.specs, self.n_ops, self.field_mode)?;
        let scrambled = scramble(&fam, &self.scramble)?;
        Ok((scrambled, skeleton))
    }
}

/// Deterministic corpus sampler. Within any contiguous run of 40 indices the
/// corpus contains an N=1 family, a family with no kernel, same-support
/// blocks split only by constants, an odd-dimension single-operator block,
/// and a degenerate (nilpotent) injection.
pub fn sample_case(index: u32, base_seed: u64) -> CorpusCase {
    let seed = base_seed ^ (u64::from(index)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let scramble = ScrambleSpec {
        conj_cond_max: 50.0,
        perm_seed: seed ^ 0xABCD,
        noise: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    match index % 40 {
        0 => CorpusCase {
            specs: vec![
                BlockSpec::single(0, 3, re(4.0)).with_seed(seed),
                BlockSpec::kernel(2),
            ],
            n_ops: 1,
            field_mode: FieldMode::Complex,
            scramble,
            label: format!("case {index}: N=1 with odd single block"),
        },
        1 => CorpusCase {
            specs: vec![
                BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(2.0)]),
                BlockSpec::single(0, 1, re(9.0)),
            ],
            n_ops: 2,
            field_mode: FieldMode::Complex,
            scramble,
            label: format!("case {index}: empty kernel"),
        },
        2 => CorpusCase {
            specs: vec![
                BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(1.0)]),
                BlockSpec::clifford(&[0, 1], 2, &[re(2.0), re(1.0)]),
                BlockSpec::kernel(1),
            ],
            n_ops: 2,
            field_mode: FieldMode::Complex,
            scramble,
            label: format!("case {index}: same support, different constants"),
        },
        3 => CorpusCase {
            specs: vec![
                BlockSpec::single(1, 3, re(2.0)).with_seed(seed),
                BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(3.0)]),
                BlockSpec::kernel(1),
            ],
            n_ops: 2,
            field_mode: FieldMode::Complex,
            scramble,
            label: format!("case {index}: odd-dimension single-operator block"),
        },
        4 => CorpusCase {
            specs: vec![
                BlockSpec::degenerate(0, 2),
                BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(1.0)]),
                BlockSpec::kernel(1),
            ],
            n_ops: 2,
            field_mode: FieldMode::Complex,
            scramble,
            label: format!("case {index}: degenerate (nilpotent) injection"),
        },
        _ => sample_random_case(index, seed, &mut rng, scramble),
    }
}

fn random_constant(rng: &mut ChaCha8Rng, mode: FieldMode) -> Scalar {
    let re_part = (rng.gen_range(1..=6) as f64) * 0.5 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    if mode == FieldMode::Complex && rng.gen_bool(0.4) {
        Scalar::new(re_part, (rng.gen_range(1..=4) as f64) * 0.5)
    } else {
        re(re_part)
    }
}

fn sample_random_case(
    index: u32,
    seed: u64,
    rng: &mut ChaCha8Rng,
    scramble: ScrambleSpec,
) -> CorpusCase {
    let field_mode = if index % 7 == 5 {
        FieldMode::Real
    } else {
        FieldMode::Complex
    };
    let n_ops = 1 + rng.gen_range(0..5usize);
    let mut budget = 32usize;
    let mut specs: Vec<BlockSpec> = Vec::new();
    let mut used_ops: BTreeSet<usize> = BTreeSet::new();

    let spec_count = 1 + rng.gen_range(0..4usize);
    for si in 0..spec_count {
        if budget == 0 {
            break;
        }
        let roll = rng.gen_range(0..10u32);
        if roll < 2 {
            let dim = 1 + rng.gen_range(0..3usize.min(budget));
            specs.push(BlockSpec::kernel(dim));
            budget -= dim;
        } else if roll < 5 || n_ops == 1 {
            let a = rng.gen_range(0..n_ops);
            let dim = 1 + rng.gen_range(0..3usize.min(budget));
            let c = match field_mode {
                FieldMode::Real => {
                    if dim % 2 == 0 && rng.gen_bool(0.3) {
                        re(-(rng.gen_range(1..=4) as f64))
                    } else {
                        re(rng.gen_range(1..=4) as f64)
                    }
                }
                FieldMode::Complex => random_constant(rng, field_mode),
            };
            specs.push(BlockSpec::single(a, dim, c).with_seed(seed ^ si as u64));
            used_ops.insert(a);
            budget -= dim;
        } else {
            let m = 2 + rng.gen_range(0..4usize.min(n_ops).max(2).saturating_sub(1));
            let m = m.min(n_ops).max(2.min(n_ops));
            if m < 2 {
                continue;
            }
            let min_dim = 1usize << (m / 2);
            if min_dim > budget {
                continue;
            }
            let copies = 1 + rng.gen_range(0..(budget / min_dim).min(2));
            let dim = copies * min_dim;
            let mut pool: Vec<usize> = (0..n_ops).collect();
            pool.shuffle(rng);
            let support: Vec<usize> = pool.into_iter().take(m).collect();
            let constants: Vec<Scalar> = match field_mode {
                FieldMode::Complex => (0..m).map(|_| random_constant(rng, field_mode)).collect(),
                FieldMode::Real => {
                    // Negative counts must fit the chain pattern.
                    let k = m / 2;
                    let negatives = if m % 2 == 1 {
                        k
                    } else if rng.gen_bool(0.5) && k >= 1 {
                        k - 1
                    } else {
                        k
                    };
                    let mut cs: Vec<Scalar> = (0..negatives)
                        .map(|_| re(-(rng.gen_range(1..=4) as f64)))
                        .collect();
                    cs.extend((negatives..m).map(|_| re(rng.gen_range(1..=4) as f64)));
                    cs.shuffle(rng);
                    cs
                }
            };
            specs.push(BlockSpec::clifford(&support, dim, &constants));
            used_ops.extend(support);
            budget -= dim;
        }
    }

    // Compact the operator set so no family member is identically zero.
    if used_ops.is_empty() {
        specs.push(BlockSpec::single(0, 1, re(2.0)));
        used_ops.insert(0);
    }
    // A 1×1 total space admits a scalar family member, the one shape the
    // independence bound N < n² genuinely excludes from its argument.
    if specs.iter().map(|s| s.dim).sum::<usize>() < 2 {
        specs.push(BlockSpec::kernel(1));
    }
    let remap: BTreeMap<usize, usize> = used_ops
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    for spec in &mut specs {
        spec.support = spec.support.iter().map(|a| remap[a]).collect();
        spec.constants = spec.constants.iter().map(|(a, c)| (remap[a], *c)).collect();
    }
    let n_ops = used_ops.len();

    CorpusCase {
        specs,
        n_ops,
        field_mode,
        scramble,
        label: format!("case {index}: random ({field_mode:?}, N={n_ops})"),
    }
}

/// Block specs matching the worked 20-dimensional, five-operator example:
/// a one-dimensional common kernel, two single-operator subspaces, two
/// 2-generator blocks (one of dimension 6), two 3-generator blocks split
/// by their constants, and one 4-generator block of dimension 4.
pub fn paper_example_specs() -> (Vec<BlockSpec>, usize) {
    let specs = vec![
        BlockSpec::kernel(1),
        BlockSpec::single(3, 1, re(4.0)).with_seed(31),
        BlockSpec::single(3, 1, re(9.0)).with_seed(32),
        BlockSpec::single(1, 1, re(4.0)).with_seed(33),
        BlockSpec::clifford(&[2, 4], 2, &[re(1.0), re(2.0)]),
        BlockSpec::clifford(&[1, 3], 6, &[re(1.0), re(2.0)]),
        BlockSpec::clifford(&[0, 2, 4], 2, &[re(1.0), re(1.0), re(1.0)]),
        BlockSpec::clifford(&[0, 2, 4], 2, &[re(2.0), re(1.0), re(1.0)]),
        BlockSpec::clifford(&[0, 2, 3, 4], 4, &[re(1.0), re(1.0), re(1.0), re(1.0)]),
    ];
    (specs, 5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::decompose;
    use crate::family::{is_anticommuting, max_anticommutation_residual};
    use crate::numerics::max_abs_diff;

    #[test]
    fn smallest_clifford_spec_builds_pauli_like_pair() {
        let specs = vec![BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(1.0)])];
        let (fam, skeleton) = build_family(&specs, 2, FieldMode::Complex).unwrap();
        assert_eq!(fam.dim(), 2);
        assert_eq!(skeleton.blocks.len(), 1);
        let tol = fam.tolerance();
        assert_eq!(max_anticommutation_residual(&fam, &tol), 0.0);
        for a in 0..2 {
            let sq = fam.op(a).dot(fam.op(a));
            assert!(max_abs_diff(&sq, &identity(2)) < 1e-15);
        }
    }

    #[test]
    fn kernel_only_spec_builds_zero_family() {
        let (fam, skeleton) = build_family(&[BlockSpec::kernel(3)], 2, FieldMode::Real).unwrap();
        for a in 0..2 {
            assert_eq!(crate::numerics::frobenius_norm(fam.op(a)), 0.0);
        }
        assert_eq!(skeleton.blocks[0].kind, BlockKind::Kernel);
        assert_eq!(skeleton.blocks[0].dim, 3);
    }

    #[test]
    fn paper_example_family_builds_and_anticommutes() {
        let (specs, n_ops) = paper_example_specs();
        let (fam, skeleton) = build_family(&specs, n_ops, FieldMode::Complex).unwrap();
        assert_eq!(fam.dim(), 20);
        assert_eq!(fam.len(), 5);
        let tol = fam.tolerance();
        assert!(is_anticommuting(&fam, &tol));
        // kernel 1, two merged singles, W blocks: 2+2+1+1+... count blocks:
        // kernel + U(A4 dim 2) + U(A2 dim 1) + 5 clifford groups.
        assert_eq!(skeleton.blocks.len(), 8);
        let total: usize = skeleton.blocks.iter().map(|b| b.dim).sum();
        assert_eq!(total, 20);
    }

    #[test]
    fn scramble_with_identity_is_identity() {
        let (fam, _) = build_family(
            &[BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(1.0)])],
            2,
            FieldMode::Complex,
        )
        .unwrap();
        let perm: Vec<usize> = (0..2).collect();
        let same = scramble_with(&fam, &identity(2), &perm, 0.0, 0).unwrap();
        for a in 0..2 {
            assert_eq!(max_abs_diff(fam.op(a), same.op(a)), 0.0);
        }
    }

    #[test]
    fn scramble_preserves_anticommutation() {
        let (specs, n_ops) = paper_example_specs();
        let (fam, _) = build_family(&specs, n_ops, FieldMode::Complex).unwrap();
        let tol = fam.tolerance();
        let scrambled = scramble(
            &fam,
            &ScrambleSpec {
                conj_cond_max: 50.0,
                perm_seed: 7,
                noise: 0.0,
            },
        )
        .unwrap();
        let stol = scrambled.tolerance();
        let before = max_anticommutation_residual(&fam, &tol);
        let after = max_anticommutation_residual(&scrambled, &stol);
        assert_eq!(before, 0.0);
        assert!(after <= 1e-12, "after = {after:.3e}");
    }

    #[test]
    fn conjugator_condition_is_capped() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mode in [FieldMode::Real, FieldMode::Complex] {
            let s = random_conjugator(8, 50.0, mode, &mut rng).unwrap();
            let cond = crate::numerics::condition_number(&s);
            assert!(cond <= 50.0 * (1.0 + 1e-9), "cond = {cond}");
            if mode == FieldMode::Real {
                assert!(s.iter().all(|z| z.im == 0.0));
            }
        }
    }

    #[test]
    fn determinism_same_seed_same_bytes() {
        let case = sample_case(17, 99);
        let (fam1, _) = case.realize().unwrap();
        let (fam2, _) = sample_case(17, 99).realize().unwrap();
        for a in 0..fam1.len() {
            assert_eq!(max_abs_diff(fam1.op(a), fam2.op(a)), 0.0);
        }
    }

    #[test]
    fn compare_reports_roundtrip_and_negative_control() {
        let specs = vec![
            BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(2.0)]),
            BlockSpec::kernel(1),
            BlockSpec::single(0, 2, re(4.0)),
        ];
        let (fam, skeleton) = build_family(&specs, 2, FieldMode::Complex).unwrap();
        let tol = fam.tolerance();
        let rep = decompose(&fam, &tol).unwrap();
        let (ok, diff) = compare_reports(&skeleton, &rep, &tol);
        assert!(ok, "unexpected diff:\n{diff}");

        // Tampered expectation: a wrong dimension must be named in the diff.
        let mut wrong = skeleton.clone();
        wrong.blocks[0].dim += 1;
        wrong.n += 1;
        let (ok, _) = compare_reports(&wrong, &rep, &tol);
        assert!(!ok);
        let mut wrong_dim_only = skeleton.clone();
        if let Some(b) = wrong_dim_only
            .blocks
            .iter_mut()
            .find(|b| b.kind == BlockKind::SingleOperator)
        {
            b.dim = 1;
        }
        let (ok, diff) = compare_reports(&wrong_dim_only, &rep, &tol);
        assert!(!ok);
        assert!(diff.contains("SingleOperator"));
    }

    #[test]
    fn scrambled_roundtrip_recovers_structure() {
        let (specs, n_ops) = paper_example_specs();
        let (fam, skeleton) = build_family(&specs, n_ops, FieldMode::Complex).unwrap();
        let scrambled = scramble(&fam, &ScrambleSpec::default()).unwrap();
        let tol = scrambled.tolerance();
        let rep = decompose(&scrambled, &tol).unwrap();
        let (ok, diff) = compare_reports(&skeleton, &rep, &tol);
        assert!(ok, "diff:\n{diff}");
    }

    #[test]
    fn real_mode_chain_sign_validation() {
        // Two negative squares on a 2-dimensional real block cannot exist.
        let bad = BlockSpec::clifford(&[0, 1], 2, &[re(-1.0), re(-2.0)]);
        assert!(build_family(&[bad], 2, FieldMode::Real).is_err());
        // One negative is fine.
        let good = BlockSpec::clifford(&[0, 1], 2, &[re(3.0), re(-2.0)]);
        let (fam, _) = build_family(&[good], 2, FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        assert!(is_anticommuting(&fam, &tol));
        // Both positive works through the (σ₁, σ₃) tail.
        let pos = BlockSpec::clifford(&[0, 1], 2, &[re(1.0), re(2.0)]);
        let (fam, _) = build_family(&[pos], 2, FieldMode::Real).unwrap();
        assert!(fam.ops().iter().all(|m| m.iter().all(|z| z.im == 0.0)));
    }

    #[test]
    fn real_three_generator_chain() {
        let spec = BlockSpec::clifford(&[0, 1, 2], 2, &[re(1.0), re(-1.0), re(4.0)]);
        let (fam, _) = build_family(&[spec], 3, FieldMode::Real).unwrap();
        let tol = fam.tolerance();
        assert!(is_anticommuting(&fam, &tol));
        for (a, want) in [(0usize, 1.0), (1, -1.0), (2, 4.0)] {
            let sq = fam.op(a).dot(fam.op(a));
            let target = identity(2).mapv(|z| z * want);
            assert!(max_abs_diff(&sq, &target) < 1e-15);
        }
    }

    #[test]
    fn sampler_emits_coverage_cases() {
        // Forced indices land on the named coverage scenarios.
        assert_eq!(sample_case(0, 1).n_ops, 1);
        assert!(sample_case(1, 1)
            .specs
            .iter()
            .all(|s| s.kind != BlockKind::Kernel));
        let same_support = sample_case(2, 1);
        assert_eq!(
            same_support
                .specs
                .iter()
                .filter(|s| s.kind == BlockKind::Clifford)
                .count(),
            2
        );
        assert!(sample_case(3, 1)
            .specs
            .iter()
            .any(|s| s.kind == BlockKind::SingleOperator && s.dim % 2 == 1));
        assert!(sample_case(4, 1)
            .specs
            .iter()
            .any(|s| s.kind == BlockKind::Degenerate));
    }

    #[test]
    fn sampled_cases_are_valid_specs() {
        for index in 0..60 {
            let case = sample_case(index, 12345);
            let built = build_family(&case.specs, case.n_ops, case.field_mode);
            assert!(built.is_ok(), "{}: {:?}", case.label, built.err());
            let (fam, _) = built.unwrap();
            assert!(fam.dim() <= 32);
            assert!(fam.len() <= 5);
            let tol = fam.tolerance();
            assert!(is_anticommuting(&fam, &tol), "{}", case.label);
        }
    }
}
