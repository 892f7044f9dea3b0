//! Closed-form sequence families that materialize growing prefixes.
//!
//! `materialize(n)` always returns exactly `n` vectors; the ambient dimension
//! `d(n)` grows with `n` and smaller truncations embed into larger ones by
//! zero-padding. Probes walk a [`TruncationSchedule`] of *levels* instead,
//! where a level is the natural truncation unit of the family (number of
//! complete blocks, iteration depth, or simply the number of vectors).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::hilbert::{ComplexVector, VectorSequence};
use crate::iterative::OperatorSpec;
use crate::normalization::TruncationSchedule;
use crate::random;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSequence {
    /// `e_1, e_2, …`
    OrthonormalBasis,
    /// `e_1, e_1, e_1, …`
    RepeatedFirst,
    /// Each `e_n` repeated `copies` times in a row.
    RepeatedBasis { copies: usize },
    /// `n^power · e_n`.
    PowerScaledBasis { power: f64 },
    /// `{e_n} ∪ {e_n / n}`, interleaved as `e_1, e_1, e_2, e_2/2, …`.
    BasisWithScaledCopies,
    /// Block `k` holds `k` copies of `e_k / √k`. With `whole_blocks` a level
    /// counts complete blocks.
    ScaledRepeatedBlocks { whole_blocks: bool },
    /// `(e_1 + e_{n+1}) / n`.
    ExactBessel,
    /// `e_n` inside `C^{N+1}`.
    ShiftedBasis,
    /// `e_n + e_{n+1}`.
    ShiftedSum,
    /// Odd terms `e_n`; even terms `d_n e_n` (or `d_n e_1` when `collapse`),
    /// with `d_n = (mu/2) 2^{-n/2}` so that `Σ 2 d_n² < mu²`.
    SparseDuplicates { mu: f64, collapse: bool },
    /// `n e_1 + e_{n+1}`.
    GrowingPair,
    /// `per_block` random vectors inside each disjoint coordinate window of
    /// width `width`, norms uniform in `[norm_lo, norm_hi]`.
    Orthoblock { per_block: usize, width: usize, norm_lo: f64, norm_hi: f64, seed: u64 },
    /// `{A^n x}` interleaved over the seeds; a level is the iteration depth.
    OperatorOrbit { op: OperatorSpec, seeds: Vec<ComplexVector> },
    /// A fixed finite sequence; prefixes only.
    Explicit { sequence: VectorSequence },
}

impl GeneratorSequence {
    pub fn kind_id(&self) -> &'static str {
        match self {
            Self::OrthonormalBasis => "orthonormal",
            Self::RepeatedFirst => "repeated_first",
            Self::RepeatedBasis { .. } => "repeated",
            Self::PowerScaledBasis { .. } => "power_scaled",
            Self::BasisWithScaledCopies => "basis_with_scaled_copies",
            Self::ScaledRepeatedBlocks { .. } => "scaled_repeated_blocks",
            Self::ExactBessel => "exact_bessel",
            Self::ShiftedBasis => "shifted_basis",
            Self::ShiftedSum => "shifted_sum",
            Self::SparseDuplicates { .. } => "sparse_duplicates",
            Self::GrowingPair => "growing_pair",
            Self::Orthoblock { .. } => "orthoblock",
            Self::OperatorOrbit { .. } => "operator_orbit",
            Self::Explicit { .. } => "explicit",
        }
    }

    /// Build a generator from a kind name and numeric parameters.
    pub fn from_kind(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let count = |key: &str, default: f64| -> Result<usize> {
            let v = get(key, default);
            if v < 1.0 || v.fract() != 0.0 {
                return Err(FrameError::ParamValidation(format!("`{key}` must be a positive integer, got {v}")));
            }
            Ok(v as usize)
        };
        let g = match kind {
            "orthonormal" => Self::OrthonormalBasis,
            "repeated_first" => Self::RepeatedFirst,
            "repeated" => Self::RepeatedBasis { copies: count("copies", 2.0)? },
            "power_scaled" => Self::PowerScaledBasis { power: get("power", 1.0) },
            "basis_with_scaled_copies" => Self::BasisWithScaledCopies,
            "scaled_repeated_blocks" => Self::ScaledRepeatedBlocks { whole_blocks: get("whole_blocks", 1.0) != 0.0 },
            "exact_bessel" => Self::ExactBessel,
            "shifted_basis" => Self::ShiftedBasis,
            "shifted_sum" => Self::ShiftedSum,
            "sparse_duplicates" => Self::SparseDuplicates { mu: get("mu", 0.1), collapse: get("collapse", 1.0) != 0.0 },
            "growing_pair" => Self::GrowingPair,
            "orthoblock" => Self::Orthoblock {
                per_block: count("per_block", 3.0)?,
                width: count("width", 2.0)?,
                norm_lo: get("norm_lo", 0.5),
                norm_hi: get("norm_hi", 2.0),
                seed: get("seed", 0.0) as u64,
            },
            other => return Err(FrameError::UnknownKind(other.to_string())),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::RepeatedBasis { copies } if *copies == 0 => {
                Err(FrameError::ParamValidation("copies must be at least 1".into()))
            }
            Self::PowerScaledBasis { power } if !power.is_finite() => {
                Err(FrameError::ParamValidation("power must be finite".into()))
            }
            Self::SparseDuplicates { mu, .. } if !(*mu > 0.0 && mu.is_finite()) => {
                Err(FrameError::ParamValidation(format!("mu must be positive, got {mu}")))
            }
            Self::Orthoblock { per_block, width, norm_lo, norm_hi, .. } => {
                if *per_block == 0 || *width == 0 {
                    return Err(FrameError::ParamValidation("orthoblock sizes must be positive".into()));
                }
                if !(*norm_lo > 0.0 && norm_lo <= norm_hi && norm_hi.is_finite()) {
                    return Err(FrameError::ParamValidation(format!(
                        "orthoblock norm range [{norm_lo}, {norm_hi}] is invalid"
                    )));
                }
                Ok(())
            }
            Self::OperatorOrbit { op, seeds } => {
                op.validate()?;
                if seeds.is_empty() {
                    return Err(FrameError::ParamValidation("orbit needs at least one seed".into()));
                }
                for (i, s) in seeds.iter().enumerate() {
                    if s.dim() != op.dim() {
                        return Err(FrameError::DimensionMismatch { expected: op.dim(), found: s.dim() });
                    }
                    if !(s.norm() > crate::tol::ZERO_TOL) {
                        return Err(FrameError::ZeroVector { index: i, norm: s.norm() });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Ambient dimension `d(n)` of the first `n` vectors.
    pub fn dim_for(&self, n: usize) -> usize {
        match self {
            Self::OrthonormalBasis | Self::PowerScaledBasis { .. } => n,
            Self::RepeatedFirst => 1,
            Self::RepeatedBasis { copies } => n.div_ceil(*copies),
            Self::BasisWithScaledCopies | Self::SparseDuplicates { .. } => n.div_ceil(2),
            Self::ScaledRepeatedBlocks { .. } => block_of(n - 1) + 1,
            Self::ExactBessel | Self::ShiftedBasis | Self::ShiftedSum | Self::GrowingPair => n + 1,
            Self::Orthoblock { per_block, width, .. } => n.div_ceil(*per_block) * width,
            Self::OperatorOrbit { op, .. } => op.dim(),
            Self::Explicit { sequence } => sequence.ambient_dim(),
        }
    }

    /// Number of vectors at truncation `level`.
    pub fn level_len(&self, level: usize) -> usize {
        match self {
            Self::ScaledRepeatedBlocks { whole_blocks: true } => level * (level + 1) / 2,
            Self::OperatorOrbit { seeds, .. } => level * seeds.len(),
            _ => level,
        }
    }

    /// Whether every truncation spans its whole ambient space, so lower
    /// bounds are read on the ambient space rather than the span.
    pub fn complete_for_ambient(&self) -> bool {
        matches!(
            self,
            Self::OrthonormalBasis
                | Self::RepeatedFirst
                | Self::RepeatedBasis { .. }
                | Self::PowerScaledBasis { .. }
                | Self::BasisWithScaledCopies
                | Self::ScaledRepeatedBlocks { .. }
                | Self::SparseDuplicates { .. }
        )
    }

    pub fn default_schedule(&self) -> TruncationSchedule {
        match self {
            Self::ScaledRepeatedBlocks { whole_blocks: true } => TruncationSchedule::geometric(4, 4),
            // d_n = (mu/2) 2^{-n/2} drops under the zero tolerance past n ≈ 150
            Self::SparseDuplicates { .. } => TruncationSchedule::geometric(8, 4),
            _ => TruncationSchedule::default(),
        }
    }

    /// Natural orthogonal decomposition of the first `n` vectors, if the
    /// family has one.
    pub fn blocks(&self, n: usize) -> Option<Vec<Vec<usize>>> {
        let group = |key: &dyn Fn(usize) -> usize| {
            let mut out: Vec<Vec<usize>> = Vec::new();
            for i in 0..n {
                let b = key(i);
                if out.len() <= b {
                    out.resize(b + 1, Vec::new());
                }
                out[b].push(i);
            }
            out.retain(|b| !b.is_empty());
            out
        };
        match self {
            Self::OrthonormalBasis | Self::PowerScaledBasis { .. } => Some(group(&|i| i)),
            Self::RepeatedFirst => Some(vec![(0..n).collect()]),
            Self::RepeatedBasis { copies } => Some(group(&|i| i / copies)),
            Self::BasisWithScaledCopies => Some(group(&|i| i / 2)),
            Self::ScaledRepeatedBlocks { .. } => Some(group(&block_of)),
            Self::Orthoblock { per_block, .. } => Some(group(&|i| i / per_block)),
            _ => None,
        }
    }

    pub fn materialize_level(&self, level: usize) -> Result<VectorSequence> {
        self.materialize(self.level_len(level))
    }

    /// The first `n` vectors in dimension `d(n)`.
    pub fn materialize(&self, n: usize) -> Result<VectorSequence> {
        if n == 0 {
            return Err(FrameError::ParamValidation("truncation size must be at least 1".into()));
        }
        self.validate()?;
        let d = self.dim_for(n);
        let label = format!("{}[{n}]", self.kind_id());
        let vectors: Vec<ComplexVector> = match self {
            Self::OperatorOrbit { op, seeds } => {
                let depth = n.div_ceil(seeds.len());
                let mut out = Vec::with_capacity(depth * seeds.len());
                let mut current: Vec<ComplexVector> = seeds.clone();
                'outer: for power in 0..depth {
                    for (s, v) in current.iter().enumerate() {
                        if out.len() == n {
                            break 'outer;
                        }
                        if !(v.norm() > crate::tol::ZERO_TOL) {
                            return Err(FrameError::IterateVanished { power, seed: s });
                        }
                        out.push(v.clone());
                    }
                    current = current.iter().map(|v| op.apply(v)).collect::<Result<_>>()?;
                }
                out
            }
            Self::Explicit { sequence } => {
                if n > sequence.len() {
                    return Err(FrameError::ParamValidation(format!(
                        "explicit sequence has {} vectors, {n} requested",
                        sequence.len()
                    )));
                }
                sequence.vectors()[..n].to_vec()
            }
            _ => (0..n).map(|i| self.closed_form_term(i, d)).collect(),
        };
        VectorSequence::new(d, vectors, label)
    }

    /// Term `i` (zero-based) for the closed-form families, in dimension `d`.
    fn closed_form_term(&self, i: usize, d: usize) -> ComplexVector {
        let unit = |k: usize| ComplexVector::basis(d, k);
        let n = (i + 1) as f64;
        match self {
            Self::OrthonormalBasis => unit(i),
            Self::RepeatedFirst => unit(0),
            Self::RepeatedBasis { copies } => unit(i / copies),
            Self::PowerScaledBasis { power } => unit(i).scaled_real(n.powf(*power)),
            Self::BasisWithScaledCopies => {
                let k = i / 2;
                if i.is_multiple_of(2) {
                    unit(k)
                } else {
                    unit(k).scaled_real(1.0 / (k + 1) as f64)
                }
            }
            Self::ScaledRepeatedBlocks { .. } => {
                let k = block_of(i);
                unit(k).scaled_real(1.0 / ((k + 1) as f64).sqrt())
            }
            Self::ExactBessel => {
                let mut v = unit(0);
                v = v.add(&unit(i + 1)).expect("same dim");
                v.scaled_real(1.0 / n)
            }
            Self::ShiftedBasis => unit(i),
            Self::ShiftedSum => unit(i).add(&unit(i + 1)).expect("same dim"),
            Self::SparseDuplicates { mu, collapse } => {
                let k = i / 2;
                if i.is_multiple_of(2) {
                    unit(k)
                } else {
                    let m = (k + 1) as f64;
                    let dn = 0.5 * mu * 2f64.powf(-m / 2.0);
                    let target = if *collapse { 0 } else { k };
                    unit(target).scaled_real(dn)
                }
            }
            Self::GrowingPair => unit(0).scaled_real(n).add(&unit(i + 1)).expect("same dim"),
            Self::Orthoblock { per_block, width, norm_lo, norm_hi, seed } => {
                use rand::Rng;
                let block = i / per_block;
                let mut rng = random::rng(random::derive_seed(*seed, i as u64));
                let local = random::unit_vector(&mut rng, *width);
                let scale = if norm_hi > norm_lo { rng.random_range(*norm_lo..*norm_hi) } else { *norm_lo };
                let mut comps = vec![crate::hilbert::C64::new(0.0, 0.0); d];
                for (j, z) in local.components().iter().enumerate() {
                    comps[block * width + j] = z * scale;
                }
                ComplexVector::new(comps)
            }
            Self::OperatorOrbit { .. } | Self::Explicit { .. } => unreachable!("not a closed-form family"),
        }
    }
}

/// Zero-based block index of position `i` when block `k` (zero-based) has
/// `k + 1` members.
fn block_of(i: usize) -> usize {
    // largest k with k(k+1)/2 <= i
    let mut k = (((8 * i + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (k + 1) * (k + 2) / 2 <= i {
        k += 1;
    }
    while k * (k + 1) / 2 > i {
        k -= 1;
    }
    k
}
