//! Stabilizer code construction and the `E ⊕ S ⊕ L` decomposition of F2^{2n}.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{reduce_against, BinaryMatrix, BinaryVector};
use crate::pauli::{css_check_matrix, pauli_weight, SymplecticVector};

/// The X- and Z-type component parity-check matrices of a CSS code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssBlocks {
    pub hx: BinaryMatrix,
    pub hz: BinaryMatrix,
}

/// An `[[n, k]]` stabilizer code with fixed bases for the stabilizer space
/// S = rowspace(H), a logical space L and a detectable complement E.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    label: String,
    n: usize,
    k: usize,
    h: BinaryMatrix,
    css: Option<CssBlocks>,
    /// RREF basis of rowspace(H), `n − k` rows.
    stabilizer_basis: BinaryMatrix,
    stabilizer_pivots: Vec<usize>,
    logical_basis: BinaryMatrix,
    e_basis: BinaryMatrix,
    /// Inverse of `[e_basis; stabilizer_basis; logical_basis]`.
    coordinates: BinaryMatrix,
}

impl StabilizerCode {
    /// Builds a code from an `m × 2n` check matrix whose rows pairwise commute.
    pub fn from_check_matrix(label: impl Into<String>, h: BinaryMatrix, css: Option<CssBlocks>) -> Result<Self> {
        if !h.cols().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "check matrix needs an even column count, got {}",
                h.cols()
            )));
        }
        let n = h.cols() / 2;
        let (stabilizer_basis, stabilizer_pivots) = h.rref_basis();
        let k = n - stabilizer_basis.rows();
        let logical_basis = compute_logical_basis(&h)?;
        debug_assert_eq!(logical_basis.rows(), 2 * k);
        let s_and_l = stabilizer_basis.stack(&logical_basis)?;
        let e_basis = s_and_l.complete_basis(2 * n)?;
        let full = e_basis.stack(&s_and_l)?;
        let coordinates = full.inverse()?;
        Ok(Self {
            label: label.into(),
            n,
            k,
            h,
            css,
            stabilizer_basis,
            stabilizer_pivots,
            logical_basis,
            e_basis,
            coordinates,
        })
    }

    pub fn from_css(label: impl Into<String>, hx: BinaryMatrix, hz: BinaryMatrix) -> Result<Self> {
        let report = validate_css(&hx, &hz)?;
        if let Some(&(a, b)) = report.violations.first() {
            return Err(Error::NonCommuting(a, hx.rows() + b));
        }
        let h = css_check_matrix(&hx, &hz)?;
        Self::from_check_matrix(label, h, Some(CssBlocks { hx, hz }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn check_matrix(&self) -> &BinaryMatrix {
        &self.h
    }

    pub fn css_blocks(&self) -> Option<&CssBlocks> {
        self.css.as_ref()
    }

    pub fn stabilizer_basis(&self) -> &BinaryMatrix {
        &self.stabilizer_basis
    }

    pub fn logical_basis(&self) -> &BinaryMatrix {
        &self.logical_basis
    }

    pub fn e_basis(&self) -> &BinaryMatrix {
        &self.e_basis
    }

    pub fn rank(&self) -> usize {
        self.n - self.k
    }

    /// True iff `v` lies in the stabilizer space S.
    pub fn is_stabilizer(&self, v: &SymplecticVector) -> bool {
        reduce_against(&self.stabilizer_basis, &self.stabilizer_pivots, v.as_binary()).is_zero()
    }

    /// Unique `(ε, σ, λ)` with `e = ε + σ + λ`, ε ∈ E, σ ∈ S, λ ∈ L.
    pub fn decompose_error(&self, e: &SymplecticVector) -> Result<Decomposition> {
        check_len(self.n, e.num_qubits())?;
        let coeffs = self.coordinates.vec_mul(e.as_binary())?;
        let n_e = self.e_basis.rows();
        let n_s = self.stabilizer_basis.rows();
        let part = |basis: &BinaryMatrix, offset: usize| -> Result<SymplecticVector> {
            let c = BinaryVector::from_bools((0..basis.rows()).map(|i| coeffs.get(offset + i)));
            SymplecticVector::from_binary(basis.vec_mul(&c)?)
        };
        Ok(Decomposition {
            eps: part(&self.e_basis, 0)?,
            sigma: part(&self.stabilizer_basis, n_e)?,
            lam: part(&self.logical_basis, n_e + n_s)?,
        })
    }

    /// Syndrome of `e` against the full check matrix.
    pub fn syndrome(&self, e: &SymplecticVector) -> Result<BinaryVector> {
        syndrome(&self.h, e)
    }
}

/// Components of [`StabilizerCode::decompose_error`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub eps: SymplecticVector,
    pub sigma: SymplecticVector,
    pub lam: SymplecticVector,
}

/// Circulant description of a generalized bicycle code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GbSpec {
    pub ell: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl GbSpec {
    fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.a.is_empty() || self.b.is_empty() {
            return Err(Error::InvalidParameter(
                "GB spec needs ell > 0 and non-empty exponent lists".into(),
            ));
        }
        if let Some(e) = self.a.iter().chain(&self.b).find(|&&e| e >= self.ell) {
            return Err(Error::InvalidParameter(format!(
                "exponent {e} out of range for ell = {}",
                self.ell
            )));
        }
        Ok(())
    }
}

/// Expected `[[n, k]]` guarding against transcription mistakes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedParams {
    pub n: usize,
    pub k: usize,
    /// Reported distance; carried as metadata, never checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

/// On-disk code description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CodeSpec {
    Toric {
        d: usize,
    },
    Gb {
        ell: usize,
        a: Vec<usize>,
        b: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<ExpectedParams>,
    },
}

impl CodeSpec {
    pub fn build(&self) -> Result<StabilizerCode> {
        match self {
            CodeSpec::Toric { d } => build_toric(*d),
            CodeSpec::Gb { ell, a, b, expect } => {
                let code = build_gb(&GbSpec {
                    ell: *ell,
                    a: a.clone(),
                    b: b.clone(),
                })?;
                if let Some(exp) = expect {
                    if exp.n != code.n() || exp.k != code.k() {
                        return Err(Error::ExpectMismatch {
                            expected_n: exp.n,
                            expected_k: exp.k,
                            n: code.n(),
                            k: code.k(),
                        });
                    }
                }
                Ok(code)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Index of the horizontal edge leaving vertex `(r, c)` to the right.
pub fn toric_h_edge(d: usize, r: usize, c: usize) -> usize {
    (r % d) * d + (c % d)
}

/// Index of the vertical edge leaving vertex `(r, c)` downwards.
pub fn toric_v_edge(d: usize, r: usize, c: usize) -> usize {
    d * d + (r % d) * d + (c % d)
}

/// Toric code on a `d × d` torus with qubits on edges.
///
/// Horizontal edges are `0..d²` in row-major vertex order, vertical edges
/// `d²..2d²`. `H_X` row `r·d + c` is the star of vertex `(r, c)`; `H_Z` row
/// `r·d + c` is the plaquette whose top-left corner is `(r, c)`.
pub fn build_toric(d: usize) -> Result<StabilizerCode> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("toric code needs d >= 2, got {d}")));
    }
    let n = 2 * d * d;
    let mut hx = BinaryMatrix::zeros(d * d, n);
    let mut hz = BinaryMatrix::zeros(d * d, n);
    for r in 0..d {
        for c in 0..d {
            let row = r * d + c;
            for q in [
                toric_h_edge(d, r, c),
                toric_h_edge(d, r, c + d - 1),
                toric_v_edge(d, r, c),
                toric_v_edge(d, r + d - 1, c),
            ] {
                hx.set(row, q, true);
            }
            for q in [
                toric_h_edge(d, r, c),
                toric_h_edge(d, r + 1, c),
                toric_v_edge(d, r, c),
                toric_v_edge(d, r, c + 1),
            ] {
                hz.set(row, q, true);
            }
        }
    }
    StabilizerCode::from_css(format!("toric-d{d}"), hx, hz)
}

/// `ell × ell` circulant whose row `i` is `x^i · p(x)` mod `x^ell − 1`.
pub fn circulant(ell: usize, exponents: &[usize]) -> BinaryMatrix {
    let mut m = BinaryMatrix::zeros(ell, ell);
    for i in 0..ell {
        for &e in exponents {
            let c = (i + e) % ell;
            m.set(i, c, !m.get(i, c));
        }
    }
    m
}

/// Generalized bicycle code `H_X = [A B]`, `H_Z = [Bᵀ Aᵀ]`.
pub fn build_gb(spec: &GbSpec) -> Result<StabilizerCode> {
    spec.validate()?;
    let a = circulant(spec.ell, &spec.a);
    let b = circulant(spec.ell, &spec.b);
    let hx = a.hstack(&b)?;
    let hz = b.transpose().hstack(&a.transpose())?;
    StabilizerCode::from_css(format!("gb-{}", 2 * spec.ell), hx, hz)
}

/// Result of [`validate_css`]: offending `(hx row, hz row)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssReport {
    pub violations: Vec<(usize, usize)>,
}

impl CssReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_css(hx: &BinaryMatrix, hz: &BinaryMatrix) -> Result<CssReport> {
    check_len(hx.cols(), hz.cols())?;
    let product = hx.mul(&hz.transpose())?;
    let mut violations = Vec::new();
    for i in 0..product.rows() {
        violations.extend(product.row(i).ones().map(|j| (i, j)));
    }
    Ok(CssReport { violations })
}

/// Swaps the halves of every row: `(a|b) → (b|a)`.
fn swap_halves(m: &BinaryMatrix) -> BinaryMatrix {
    let n = m.cols() / 2;
    let mut out = BinaryMatrix::zeros(m.rows(), m.cols());
    for r in 0..m.rows() {
        for c in m.row(r).ones() {
            out.set(r, (c + n) % (2 * n), true);
        }
    }
    out
}

/// Canonical basis of the logical operators of `h`: the symplectic complement
/// of rowspace(h), reduced modulo rowspace(h) and brought to RREF.
pub fn compute_logical_basis(h: &BinaryMatrix) -> Result<BinaryMatrix> {
    if !h.cols().is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "check matrix needs an even column count".into(),
        ));
    }
    let swapped = swap_halves(h);
    let gram = h.mul(&swapped.transpose())?;
    for i in 0..gram.rows() {
        if let Some(j) = gram.row(i).ones().next() {
            return Err(Error::NonCommuting(i, j));
        }
    }
    // ⟨v, row⟩ = row · swap(v), so the complement is swap(nullspace(h)).
    let complement = swap_halves(&h.nullspace_basis());
    let (s_basis, s_pivots) = h.rref_basis();
    let mut reduced = BinaryMatrix::zeros(0, h.cols());
    for r in 0..complement.rows() {
        reduced.push_row(&reduce_against(&s_basis, &s_pivots, &complement.row(r)))?;
    }
    Ok(reduced.rref_basis().0)
}

/// Syndrome bits `z_j = ⟨e, row_j(h)⟩`.
pub fn syndrome(h: &BinaryMatrix, e: &SymplecticVector) -> Result<BinaryVector> {
    check_len(h.cols(), 2 * e.num_qubits())?;
    h.mul_vec(&e.swapped())
}

/// Largest `2n` accepted by [`min_distance_bruteforce`].
pub const BRUTEFORCE_MAX_BITS: usize = 20;

/// Exhaustive minimum weight of a nontrivial logical; `None` when `k = 0`.
pub fn min_distance_bruteforce(code: &StabilizerCode) -> Result<Option<usize>> {
    let bits = 2 * code.n();
    if bits > BRUTEFORCE_MAX_BITS {
        return Err(Error::TooLarge(format!("2n = {bits} exceeds {BRUTEFORCE_MAX_BITS}")));
    }
    if code.k() == 0 {
        return Ok(None);
    }
    let h = code.check_matrix();
    let rows: Vec<u64> = (0..h.rows())
        .map(|r| {
            let v = h.row(r);
            let n = code.n();
            // pre-swapped so a dot product gives the symplectic product
            let mut w = 0u64;
            for c in v.ones() {
                w |= 1 << ((c + n) % (2 * n));
            }
            w
        })
        .collect();
    let mut best: Option<usize> = None;
    for raw in 1u64..(1u64 << bits) {
        if rows.iter().any(|&r| (r & raw).count_ones() & 1 == 1) {
            continue;
        }
        let v = SymplecticVector::from_binary(BinaryVector::from_bools((0..bits).map(|i| (raw >> i) & 1 == 1)))?;
        let w = pauli_weight(&v);
        if best.is_some_and(|b| w >= b) {
            continue;
        }
        if !code.is_stabilizer(&v) {
            best = Some(w);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::symplectic_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_error(rng: &mut impl Rng, n: usize) -> SymplecticVector {
        SymplecticVector::from_binary(BinaryVector::from_bools((0..2 * n).map(|_| rng.gen::<bool>()))).unwrap()
    }

    fn check_invariants(code: &StabilizerCode) {
        let n = code.n();
        let h = code.check_matrix();
        assert_eq!(h.rank(), n - code.k());
        for i in 0..h.rows() {
            for j in 0..h.rows() {
                let a = SymplecticVector::from_binary(h.row(i)).unwrap();
                let b = SymplecticVector::from_binary(h.row(j)).unwrap();
                assert!(!symplectic_product(&a, &b).unwrap());
            }
        }
        let l = code.logical_basis();
        assert_eq!(l.rows(), 2 * code.k());
        for r in 0..l.rows() {
            let v = SymplecticVector::from_binary(l.row(r)).unwrap();
            assert!(syndrome(h, &v).unwrap().is_zero());
        }
        let hl = h.stack(l).unwrap();
        assert_eq!(hl.rank(), n + code.k());
        assert_eq!(hl.stack(code.e_basis()).unwrap().rank(), 2 * n);
    }

    #[test]
    fn toric_small_parameters() {
        let code = build_toric(2).unwrap();
        assert_eq!((code.n(), code.k(), code.rank()), (8, 2, 6));
        assert_eq!(code.check_matrix().rows(), 8);
        check_invariants(&code);
        assert_eq!(min_distance_bruteforce(&code).unwrap(), Some(2));
        assert!(matches!(build_toric(1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn toric_blocks_are_css_for_several_sizes() {
        for d in 2..=8 {
            let code = build_toric(d).unwrap();
            assert_eq!(code.n(), 2 * d * d);
            assert_eq!(code.k(), 2);
            let css = code.css_blocks().unwrap();
            assert!(validate_css(&css.hx, &css.hz).unwrap().is_ok());
            for r in 0..d * d {
                assert_eq!(css.hx.row_weight(r), 4);
                assert_eq!(css.hz.row_weight(r), 4);
            }
        }
    }

    #[test]
    fn toric_d3_has_no_short_logicals() {
        let code = build_toric(3).unwrap();
        check_invariants(&code);
        // every logical row has weight >= 3, and random combinations too
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = code.logical_basis();
        let s = code.stabilizer_basis();
        for _ in 0..5000 {
            let mut c = BinaryVector::zeros(l.rows());
            while c.is_zero() {
                c = BinaryVector::from_bools((0..l.rows()).map(|_| rng.gen::<bool>()));
            }
            let mut v = l.vec_mul(&c).unwrap();
            let cs = BinaryVector::from_bools((0..s.rows()).map(|_| rng.gen::<bool>()));
            v.xor_assign(&s.vec_mul(&cs).unwrap());
            assert!(pauli_weight(&SymplecticVector::from_binary(v).unwrap()) >= 3);
        }
    }

    #[test]
    fn toric_d8_matches_reported_parameters() {
        let code = build_toric(8).unwrap();
        assert_eq!((code.n(), code.k()), (128, 2));
    }

    #[test]
    fn gb_trivial_spec_has_no_logicals() {
        let code = build_gb(&GbSpec {
            ell: 3,
            a: vec![0],
            b: vec![0],
        })
        .unwrap();
        assert_eq!((code.n(), code.k()), (6, 0));
        assert_eq!(min_distance_bruteforce(&code).unwrap(), None);
    }

    #[test]
    fn gb_random_specs_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let ell = rng.gen_range(2..20);
            let a: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..ell)).collect();
            let b: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..ell)).collect();
            let code = build_gb(&GbSpec { ell, a, b }).unwrap();
            let css = code.css_blocks().unwrap();
            assert!(css.hx.mul(&css.hz.transpose()).unwrap().is_zero());
            assert_eq!(code.n(), 2 * ell);
        }
    }

    #[test]
    fn gb_spec_rejects_bad_exponents() {
        assert!(build_gb(&GbSpec {
            ell: 5,
            a: vec![5],
            b: vec![0]
        })
        .is_err());
        assert!(build_gb(&GbSpec {
            ell: 5,
            a: vec![],
            b: vec![0]
        })
        .is_err());
    }

    #[test]
    fn gb46_logicals() {
        let spec = CodeSpec::Gb {
            ell: 23,
            a: vec![0, 5, 8, 12],
            b: vec![0, 1, 5, 7],
            expect: Some(ExpectedParams { n: 46, k: 2, d: None }),
        };
        let code = spec.build().unwrap();
        check_invariants(&code);
        assert_eq!(code.logical_basis().rows(), 4);
    }

    #[test]
    fn expect_mismatch_is_rejected() {
        let spec = CodeSpec::Gb {
            ell: 23,
            a: vec![0, 5, 8, 12],
            b: vec![0, 1, 5, 7],
            expect: Some(ExpectedParams { n: 46, k: 4, d: None }),
        };
        assert!(matches!(spec.build(), Err(Error::ExpectMismatch { .. })));
    }

    #[test]
    fn code_spec_json() {
        let spec = CodeSpec::from_json(r#"{"type":"toric","d":8}"#).unwrap();
        assert_eq!(spec, CodeSpec::Toric { d: 8 });
        let gb = CodeSpec::from_json(r#"{"type":"gb","ell":3,"a":[0],"b":[0]}"#).unwrap();
        assert!(matches!(gb, CodeSpec::Gb { expect: None, .. }));
        assert!(CodeSpec::from_json(r#"{"type":"hgp"}"#).is_err());
    }

    #[test]
    fn validate_css_cases() {
        let a = BinaryMatrix::from_dense(&[&[1, 1, 0]]);
        assert!(validate_css(&a, &a).unwrap().is_ok());
        let b = BinaryMatrix::from_dense(&[&[1, 0, 0]]);
        assert_eq!(validate_css(&b, &b).unwrap().violations, vec![(0, 0)]);
        assert!(validate_css(&a, &BinaryMatrix::zeros(1, 4)).is_err());
    }

    #[test]
    fn logical_basis_edge_cases() {
        let empty = BinaryMatrix::zeros(0, 2);
        let l = compute_logical_basis(&empty).unwrap();
        assert_eq!(l.rows(), 2);
        assert_eq!(l.rank(), 2);
        // X and Z on one qubit anticommute
        let bad = BinaryMatrix::from_dense(&[&[1, 0], &[0, 1]]);
        assert!(matches!(compute_logical_basis(&bad), Err(Error::NonCommuting(_, _))));
    }

    #[test]
    fn logical_basis_is_canonical() {
        let code = build_toric(3).unwrap();
        let h = code.check_matrix();
        // permuting and duplicating rows of h does not change the basis
        let mut rows: Vec<usize> = (0..h.rows()).rev().collect();
        rows.push(0);
        let shuffled = h.select_rows(&rows);
        assert_eq!(compute_logical_basis(&shuffled).unwrap(), *code.logical_basis());
    }

    #[test]
    fn decomposition_examples() {
        let code = build_toric(2).unwrap();
        let zero = SymplecticVector::zeros(8);
        let d = code.decompose_error(&zero).unwrap();
        assert!(d.eps.is_zero() && d.sigma.is_zero() && d.lam.is_zero());
        let row3 = SymplecticVector::from_binary(code.check_matrix().row(3)).unwrap();
        let d = code.decompose_error(&row3).unwrap();
        assert!(d.eps.is_zero() && d.lam.is_zero());
        assert_eq!(d.sigma, row3);
    }

    #[test]
    fn decomposition_resums_on_small_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let codes = [
            build_toric(2).unwrap(),
            build_toric(3).unwrap(),
            build_gb(&GbSpec {
                ell: 7,
                a: vec![0, 1, 3],
                b: vec![0, 2, 3],
            })
            .unwrap(),
        ];
        for code in &codes {
            let e_rows = code.e_basis();
            let l_rows = code.logical_basis();
            for _ in 0..1000 {
                let e = random_error(&mut rng, code.n());
                let d = code.decompose_error(&e).unwrap();
                assert_eq!(d.eps.xor(&d.sigma).xor(&d.lam), e);
                assert!(e_rows.in_rowspace(d.eps.as_binary()).unwrap());
                assert!(code.check_matrix().in_rowspace(d.sigma.as_binary()).unwrap());
                assert!(l_rows.in_rowspace(d.lam.as_binary()).unwrap());
                // the syndrome depends on the detectable part only
                assert_eq!(code.syndrome(&e).unwrap(), code.syndrome(&d.eps).unwrap());
            }
        }
    }

    #[test]
    fn syndrome_examples() {
        let h = BinaryMatrix::from_dense(&[&[0, 0, 1, 1]]);
        let xi = SymplecticVector::from_binary("1000".parse().unwrap()).unwrap();
        assert_eq!(syndrome(&h, &xi).unwrap().to_bit_string(), "1");
        assert!(syndrome(&h, &SymplecticVector::zeros(2)).unwrap().is_zero());
        assert!(syndrome(&h, &SymplecticVector::zeros(3)).is_err());
    }

    #[test]
    fn syndrome_is_linear_and_stabilizer_invariant() {
        let code = build_toric(3).unwrap();
        let h = code.check_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let e1 = random_error(&mut rng, code.n());
            let e2 = random_error(&mut rng, code.n());
            let s1 = syndrome(h, &e1).unwrap();
            let s2 = syndrome(h, &e2).unwrap();
            assert_eq!(syndrome(h, &e1.xor(&e2)).unwrap(), s1.xor(&s2));
            let c = BinaryVector::from_bools((0..h.rows()).map(|_| rng.gen::<bool>()));
            let stab = SymplecticVector::from_binary(h.vec_mul(&c).unwrap()).unwrap();
            assert_eq!(syndrome(h, &e1.xor(&stab)).unwrap(), s1);
        }
    }

    #[test]
    fn distance_upper_bounded_by_logical_rows() {
        let code = build_toric(2).unwrap();
        let d = min_distance_bruteforce(&code).unwrap().unwrap();
        for r in 0..code.logical_basis().rows() {
            let v = SymplecticVector::from_binary(code.logical_basis().row(r)).unwrap();
            assert!(d <= pauli_weight(&v));
        }
        assert!(matches!(
            min_distance_bruteforce(&build_toric(4).unwrap()),
            Err(Error::TooLarge(_))
        ));
    }
}
