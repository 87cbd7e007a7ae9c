//! Element values and their canonical byte encodings.
//!
//! Every group in this crate stores elements as [`Elem`] trees. The byte
//! encoding produced by [`crate::Group::encode`] is the stable, documented
//! form used in reports and golden files:
//!
//! * cyclic `Z(n)`: the residue, big-endian, fixed width (enough bytes for `n - 1`);
//! * `Q8`: one byte, `2 * unit + sign` with units `1, i, j, k` and sign `0` for `+`;
//! * direct product: concatenation of the factor codes;
//! * restricted direct sum: a `u32` support count followed by `(index, code)`
//!   pairs in ascending index order, identity coordinates omitted; indices are
//!   `i64` big-endian with the sign bit flipped;
//! * semidirect product `A x| Z(m)`: the code of the `A` part followed by the
//!   cyclic part;
//! * quotients and subgroups reuse the code of the (canonical) parent element.
//!
//! All codes are prefix-free within one ambient group, so byte-lexicographic
//! order on codes coincides with the [`Ord`] implementation of [`Elem`].

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A group element in structured form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    /// Residue of a cyclic group, or the index of a `Q8` element.
    Res(u64),
    /// Components of a direct product, or `(a, x)` for a semidirect product.
    Tuple(Box<[Elem]>),
    /// Finite-support coordinates of a restricted direct sum, sorted by index,
    /// with identity coordinates omitted.
    Sparse(Box<[(i64, Elem)]>),
}

impl Elem {
    pub fn tuple(parts: Vec<Elem>) -> Self {
        Elem::Tuple(parts.into_boxed_slice())
    }

    pub fn sparse(coords: Vec<(i64, Elem)>) -> Self {
        Elem::Sparse(coords.into_boxed_slice())
    }

    pub fn empty_sparse() -> Self {
        Elem::Sparse(Box::new([]))
    }

    pub(crate) fn res(&self) -> u64 {
        match self {
            Elem::Res(r) => *r,
            other => panic!("expected residue, found {other:?}"),
        }
    }

    pub(crate) fn parts(&self) -> &[Elem] {
        match self {
            Elem::Tuple(p) => p,
            other => panic!("expected tuple, found {other:?}"),
        }
    }

    pub(crate) fn coords(&self) -> &[(i64, Elem)] {
        match self {
            Elem::Sparse(c) => c,
            other => panic!("expected sparse element, found {other:?}"),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Elem::Res(_) => 0,
            Elem::Tuple(_) => 1,
            Elem::Sparse(_) => 2,
        }
    }
}

impl Ord for Elem {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Elem::Res(a), Elem::Res(b)) => a.cmp(b),
            (Elem::Tuple(a), Elem::Tuple(b)) => a.iter().cmp(b.iter()),
            // the code carries the support size first
            (Elem::Sparse(a), Elem::Sparse(b)) => a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Elem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical byte encoding of an element within its ambient group.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementCode(pub Vec<u8>);

impl ElementCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in &self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let s = s.strip_prefix("0x").unwrap_or(s);
        if s.len() % 2 != 0 {
            return None;
        }
        let mut out = Vec::with_capacity(s.len() / 2);
        for i in (0..s.len()).step_by(2) {
            out.push(u8::from_str_radix(s.get(i..i + 2)?, 16).ok()?);
        }
        Some(ElementCode(out))
    }
}

impl fmt::Display for ElementCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

impl Serialize for ElementCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ElementCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ElementCode::from_hex(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid hex code {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let code = ElementCode(vec![0, 1, 0xab, 0xff]);
        assert_eq!(code.to_string(), "0x0001abff");
        assert_eq!(ElementCode::from_hex("0x0001abff"), Some(code.clone()));
        assert_eq!(ElementCode::from_hex("0001abff"), Some(code));
        assert_eq!(ElementCode::from_hex("0x1"), None);
        assert_eq!(ElementCode::from_hex("zz"), None);
    }

    #[test]
    fn sparse_order_is_support_size_first() {
        let small = Elem::sparse(vec![(5, Elem::Res(1))]);
        let big = Elem::sparse(vec![(0, Elem::Res(1)), (1, Elem::Res(1))]);
        assert!(small < big);
        assert!(Elem::empty_sparse() < small);
    }
}
