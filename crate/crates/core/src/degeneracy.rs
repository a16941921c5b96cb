//! Outcome classification and exhaustive degeneracy-set oracles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::StabilizerCode;
use crate::ensemble::SplitterSet;
use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BinaryVector};
use crate::pauli::{symplectic_product_raw, SymplecticVector};

/// Largest `n − k` the enumeration oracles accept.
pub const ORACLE_MAX_RANK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeKind {
    TypeISuccess,
    TypeIISuccess,
    TypeIFailure,
    TypeIIFailure,
}

impl OutcomeKind {
    pub fn is_failure(self) -> bool {
        matches!(self, OutcomeKind::TypeIFailure | OutcomeKind::TypeIIFailure)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub kind: OutcomeKind,
    pub estimate: Option<SymplecticVector>,
    pub winning_path: Option<usize>,
}

/// True iff `e ⊕ est` is a stabilizer.
pub fn logically_equivalent(code: &StabilizerCode, e: &SymplecticVector, est: &SymplecticVector) -> Result<bool> {
    check_len(code.n(), e.num_qubits())?;
    check_len(code.n(), est.num_qubits())?;
    let diff = e.xor(est);
    let in_rowspace = code.is_stabilizer(&diff);
    if cfg!(debug_assertions) && code.syndrome(&diff)?.is_zero() {
        let commutes = commutes_with_logicals(code, &diff);
        debug_assert_eq!(in_rowspace, commutes, "logical basis disagrees with the rowspace test");
    }
    Ok(in_rowspace)
}

fn product(u: &BinaryVector, v: &BinaryVector) -> bool {
    symplectic_product_raw(u.len() / 2, u.words(), v.words())
}

/// For `v` in the normalizer: true iff `v` commutes with every logical row.
pub fn commutes_with_logicals(code: &StabilizerCode, v: &SymplecticVector) -> bool {
    code.logical_basis().row_iter().all(|l| !product(&l, v.as_binary()))
}

/// Sorts a decoder result into one of the four outcome kinds.
pub fn classify(
    code: &StabilizerCode,
    e: &SymplecticVector,
    estimate: Option<SymplecticVector>,
    winning_path: Option<usize>,
) -> Result<DecodeOutcome> {
    let kind = match &estimate {
        None => OutcomeKind::TypeIFailure,
        Some(est) => {
            check_len(code.n(), est.num_qubits())?;
            if code.syndrome(est)? != code.syndrome(e)? {
                return Err(Error::InconsistentEstimate);
            }
            if est == e {
                OutcomeKind::TypeISuccess
            } else if logically_equivalent(code, e, est)? {
                OutcomeKind::TypeIISuccess
            } else {
                OutcomeKind::TypeIIFailure
            }
        }
    };
    Ok(DecodeOutcome {
        kind,
        estimate,
        winning_path,
    })
}

/// Coset label `(λ, ε)` of the degeneracy set `λ + ε + S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DegeneracySetId {
    pub lam: SymplecticVector,
    pub eps: SymplecticVector,
}

fn in_span(basis: &BinaryMatrix, v: &BinaryVector) -> Result<bool> {
    basis.in_rowspace(v)
}

impl DegeneracySetId {
    pub fn new(code: &StabilizerCode, lam: SymplecticVector, eps: SymplecticVector) -> Result<Self> {
        check_len(code.n(), lam.num_qubits())?;
        check_len(code.n(), eps.num_qubits())?;
        if !in_span(code.logical_basis(), lam.as_binary())? {
            return Err(Error::InvalidParameter("lam is not in the logical span".into()));
        }
        if !in_span(code.e_basis(), eps.as_binary())? {
            return Err(Error::InvalidParameter("eps is not in the pure-error span".into()));
        }
        Ok(Self { lam, eps })
    }

    /// Set containing `e`.
    pub fn of_error(code: &StabilizerCode, e: &SymplecticVector) -> Result<Self> {
        let d = code.decompose_error(e)?;
        Ok(Self { lam: d.lam, eps: d.eps })
    }

    /// Uniformly random coset label.
    pub fn random<R: Rng + ?Sized>(code: &StabilizerCode, rng: &mut R) -> Result<Self> {
        let pick = |basis: &BinaryMatrix, rng: &mut R| -> Result<SymplecticVector> {
            let c = BinaryVector::from_bools((0..basis.rows()).map(|_| rng.gen::<bool>()));
            SymplecticVector::from_binary(basis.vec_mul(&c)?)
        };
        let lam = pick(code.logical_basis(), rng)?;
        let eps = pick(code.e_basis(), rng)?;
        Ok(Self { lam, eps })
    }
}

fn check_oracle_scale(code: &StabilizerCode) -> Result<()> {
    if code.rank() > ORACLE_MAX_RANK {
        return Err(Error::TooLarge(format!(
            "n - k = {} exceeds the oracle limit {ORACLE_MAX_RANK}",
            code.rank()
        )));
    }
    Ok(())
}

/// All `2^{n−k}` members of `λ + ε + S`, in Gray-code order over the
/// stabilizer basis.
pub fn enumerate_degeneracy_set(code: &StabilizerCode, id: &DegeneracySetId) -> Result<Vec<SymplecticVector>> {
    check_oracle_scale(code)?;
    let basis: Vec<SymplecticVector> = code
        .stabilizer_basis()
        .row_iter()
        .map(SymplecticVector::from_binary)
        .collect::<Result<_>>()?;
    let mut cur = id.lam.xor(&id.eps);
    let total = 1usize << basis.len();
    let mut out = Vec::with_capacity(total);
    out.push(cur.clone());
    for step in 1..total {
        cur.xor_assign(&basis[step.trailing_zeros() as usize]);
        out.push(cur.clone());
    }
    Ok(out)
}

/// Subset sizes of a degeneracy set split by splitter products.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub delta: usize,
    /// `sizes[g]` counts members whose product vector, read most significant
    /// bit first, equals `g`.
    pub sizes: Vec<usize>,
    pub expected: usize,
}

impl SplittingReport {
    pub fn passes(&self) -> bool {
        self.sizes.iter().all(|&s| s == self.expected)
    }
}

/// Partitions `λ + ε + S` by the products `⟨t_i, σ⟩` with every embedded
/// splitter and reports the subset sizes.
pub fn verify_splitting(
    code: &StabilizerCode,
    splitters: &SplitterSet,
    id: &DegeneracySetId,
) -> Result<SplittingReport> {
    check_len(code.n(), splitters.a_x.cols())?;
    check_len(code.n(), splitters.a_z.cols())?;
    let delta = splitters.delta();
    if delta > code.rank() {
        return Err(Error::InvalidParameter(format!("delta = {delta} exceeds n - k")));
    }
    let members = enumerate_degeneracy_set(code, id)?;
    let embedded = splitters.embedded();
    let mut sizes = vec![0usize; 1 << delta];
    for m in &members {
        let g = embedded.iter().fold(0usize, |acc, t| {
            (acc << 1) | usize::from(product(t.as_binary(), m.as_binary()))
        });
        sizes[g] += 1;
    }
    Ok(SplittingReport {
        delta,
        sizes,
        expected: 1 << (code.rank() - delta),
    })
}
