//! Phase-free Pauli operators and their binary symplectic images.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BinaryVector};

/// Single-qubit Pauli operator, global phase discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(x, z)` bits: I→(0,0), X→(1,0), Z→(0,1), Y→(1,1).
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    /// True iff the two single-qubit operators anticommute.
    #[inline]
    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (bx & az)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A phase-free n-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("invalid Pauli character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// Vector `(x | z)` in F2^{2n}: entry `i` is the X part of qubit `i`, entry
/// `n + i` the Z part.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymplecticVector {
    n: usize,
    bits: BinaryVector,
}

impl SymplecticVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            bits: BinaryVector::zeros(2 * n),
        }
    }

    /// Wraps a length-2n binary vector.
    pub fn from_binary(bits: BinaryVector) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "symplectic vector needs even length, got {}",
                bits.len()
            )));
        }
        Ok(Self {
            n: bits.len() / 2,
            bits,
        })
    }

    pub fn from_parts(x: &BinaryVector, z: &BinaryVector) -> Result<Self> {
        check_len(x.len(), z.len())?;
        Ok(Self {
            n: x.len(),
            bits: x.concat(z),
        })
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_binary(&self) -> &BinaryVector {
        &self.bits
    }

    pub fn into_binary(self) -> BinaryVector {
        self.bits
    }

    pub fn x_part(&self) -> BinaryVector {
        self.bits.slice(0, self.n)
    }

    pub fn z_part(&self) -> BinaryVector {
        self.bits.slice(self.n, self.n)
    }

    #[inline]
    pub fn qubit(&self, i: usize) -> Pauli {
        Pauli::from_bits(self.bits.get(i), self.bits.get(self.n + i))
    }

    #[inline]
    pub fn set_qubit(&mut self, i: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.bits.set(i, x);
        self.bits.set(self.n + i, z);
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn xor(&self, other: &SymplecticVector) -> SymplecticVector {
        assert_eq!(self.n, other.n);
        SymplecticVector {
            n: self.n,
            bits: self.bits.xor(&other.bits),
        }
    }

    pub fn xor_assign(&mut self, other: &SymplecticVector) {
        assert_eq!(self.n, other.n);
        self.bits.xor_assign(&other.bits);
    }

    /// `(z | x)`: the symplectic product with `v` equals the ordinary dot
    /// product of this swapped vector with `v`.
    pub fn swapped(&self) -> BinaryVector {
        self.z_part().concat(&self.x_part())
    }
}

impl fmt::Debug for SymplecticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.x_part(), self.z_part())
    }
}

impl fmt::Display for SymplecticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", phi_inv(self))
    }
}

pub fn phi(p: &PauliString) -> SymplecticVector {
    let n = p.len();
    let mut v = SymplecticVector::zeros(n);
    for (i, &q) in p.0.iter().enumerate() {
        v.set_qubit(i, q);
    }
    v
}

pub fn phi_inv(v: &SymplecticVector) -> PauliString {
    PauliString((0..v.n).map(|i| v.qubit(i)).collect())
}

/// ⟨u, v⟩ = Σ u_x·v_z + Σ v_x·u_z over F2.
pub fn symplectic_product(u: &SymplecticVector, v: &SymplecticVector) -> Result<bool> {
    check_len(u.n, v.n)?;
    Ok(symplectic_product_raw(u.n, u.bits.words(), v.bits.words()))
}

/// Symplectic product of two packed `(x|z)` rows of length `2n`.
pub(crate) fn symplectic_product_raw(n: usize, u: &[u64], v: &[u64]) -> bool {
    let mut acc = false;
    for i in 0..n {
        let ux = bit(u, i);
        let uz = bit(u, n + i);
        let vx = bit(v, i);
        let vz = bit(v, n + i);
        acc ^= (ux & vz) ^ (vx & uz);
    }
    acc
}

#[inline]
fn bit(words: &[u64], i: usize) -> bool {
    (words[i / 64] >> (i % 64)) & 1 == 1
}

/// Number of qubits acted on non-trivially.
pub fn pauli_weight(v: &SymplecticVector) -> usize {
    (0..v.n).filter(|&i| v.bits.get(i) || v.bits.get(v.n + i)).count()
}

/// Embeds an X-type block row `r` as `(r | 0)`.
pub fn embed_x(r: &BinaryVector) -> SymplecticVector {
    SymplecticVector {
        n: r.len(),
        bits: r.concat(&BinaryVector::zeros(r.len())),
    }
}

/// Embeds a Z-type block row `r` as `(0 | r)`.
pub fn embed_z(r: &BinaryVector) -> SymplecticVector {
    SymplecticVector {
        n: r.len(),
        bits: BinaryVector::zeros(r.len()).concat(r),
    }
}

/// `[hx 0; 0 hz]` in the `(x|z)` column layout.
pub fn css_check_matrix(hx: &BinaryMatrix, hz: &BinaryMatrix) -> Result<BinaryMatrix> {
    check_len(hx.cols(), hz.cols())?;
    let n = hx.cols();
    let top = hx.hstack(&BinaryMatrix::zeros(hx.rows(), n))?;
    let bottom = BinaryMatrix::zeros(hz.rows(), n).hstack(hz)?;
    top.stack(&bottom)
}
