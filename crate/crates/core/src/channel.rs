//! Depolarizing noise and reproducible per-trial random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, SymplecticVector};

/// Random stream handed to samplers and constructions.
pub type Stream = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingParams {
    p: f64,
}

impl DepolarizingParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("error probability {p} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Identifies one trial of one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedPlan {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    /// Plan reserved for experiment-level constructions (splitters,
    /// overcomplete matrices); trial indices never reach it.
    pub fn construction(master_seed: u64) -> Self {
        Self::new(master_seed, u64::MAX)
    }
}

/// Stream keyed by a hash of `(master_seed, trial_index, path_id)`, so any
/// trial can be regenerated without replaying the ones before it.
pub fn derive_stream(plan: SeedPlan, path_id: u64) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(b"asced/stream/v1");
    hasher.update(plan.master_seed.to_le_bytes());
    hasher.update(plan.trial_index.to_le_bytes());
    hasher.update(path_id.to_le_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(seed)
}

/// Maps one uniform draw in `[0, 1)` to a single-qubit Pauli with
/// thresholds `1 − p`, `1 − 2p/3`, `1 − p/3`.
#[inline]
pub fn depolarizing_pauli(u: f64, p: f64) -> Pauli {
    if u < 1.0 - p {
        Pauli::I
    } else if u < 1.0 - 2.0 * p / 3.0 {
        Pauli::X
    } else if u < 1.0 - p / 3.0 {
        Pauli::Y
    } else {
        Pauli::Z
    }
}

/// Independent depolarizing noise on `n` qubits.
pub fn sample_depolarizing<R: Rng + ?Sized>(n: usize, params: DepolarizingParams, stream: &mut R) -> SymplecticVector {
    let mut e = SymplecticVector::zeros(n);
    for i in 0..n {
        let u: f64 = stream.gen();
        let q = depolarizing_pauli(u, params.p);
        if q != Pauli::I {
            e.set_qubit(i, q);
        }
    }
    e
}
