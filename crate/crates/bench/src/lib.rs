//! Fixtures shared by the decoding benchmarks.

use asced_core::channel::{derive_stream, sample_depolarizing, DepolarizingParams, SeedPlan};
use asced_core::codes::{CodeSpec, StabilizerCode};
use asced_core::gf2::BinaryVector;

pub fn gb46() -> StabilizerCode {
    CodeSpec::Gb {
        ell: 23,
        a: vec![0, 5, 8, 12],
        b: vec![0, 1, 5, 7],
        expect: None,
    }
    .build()
    .unwrap()
}

pub fn gb126() -> StabilizerCode {
    CodeSpec::Gb {
        ell: 63,
        a: vec![0, 1, 14, 16, 22],
        b: vec![0, 3, 13, 20, 42],
        expect: None,
    }
    .build()
    .unwrap()
}

/// Syndromes of `count` depolarizing errors at rate `p`.
pub fn syndromes(code: &StabilizerCode, p: f64, count: u64, seed: u64) -> Vec<BinaryVector> {
    let params = DepolarizingParams::new(p).unwrap();
    (0..count)
        .map(|t| {
            let mut s = derive_stream(SeedPlan::new(seed, t), 0);
            let e = sample_depolarizing(code.n(), params, &mut s);
            code.syndrome(&e).unwrap()
        })
        .collect()
}
