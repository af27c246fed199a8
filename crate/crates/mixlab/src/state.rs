//! State spaces and their dense encodings.
//!
//! Four spaces appear throughout the crate: strings over {0,1,2,3}^n, binary
//! support strings {0,1}^n, Hamming weights {1..n}, and permutations of n
//! elements. Each has a canonical bijection onto `0..size`:
//!
//! * positional strings are ranked little-endian (coordinate 1 is the least
//!   significant digit), so the all-zero string is index 0;
//! * permutations are ranked by Lehmer code, so the identity is index 0.
//!
//! The ranks are dense and reproducible, which keeps exported matrices and
//! golden files bit-identical across implementations.

use crate::error::{Error, Result};
use std::fmt;

/// String over {0,1,2,3}^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    coords: Vec<u8>,
}

/// Binary string over {0,1}^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportString {
    coords: Vec<u8>,
}

/// Number of nonzero coordinates of a state string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HammingWeight(pub usize);

/// Permutation of {1..n}, stored as 0-based images: `images[k] = sigma(k+1) - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<u8>,
}

impl PauliString {
    pub fn new(coords: Vec<u8>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::MalformedState("empty coordinate string".into()));
        }
        if let Some(&c) = coords.iter().find(|&&c| c > 3) {
            return Err(Error::MalformedState(format!(
                "coordinate value {c} outside alphabet {{0,1,2,3}}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u8] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [u8] {
        &mut self.coords
    }

    /// Little-endian base-4 rank.
    pub fn index(&self) -> usize {
        self.coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * 4 + c as usize)
    }

    pub fn from_index(n: usize, mut index: usize) -> Result<Self> {
        if index >= pow_checked(4, n)? {
            return Err(Error::MalformedState(format!(
                "index {index} out of range for n = {n}"
            )));
        }
        let mut coords = vec![0u8; n];
        for c in coords.iter_mut() {
            *c = (index % 4) as u8;
            index /= 4;
        }
        Ok(Self { coords })
    }

    pub fn hamming_weight(&self) -> HammingWeight {
        HammingWeight(self.coords.iter().filter(|&&c| c != 0).count())
    }

    /// Support pattern: 1 where the coordinate is nonzero.
    pub fn support(&self) -> SupportString {
        SupportString {
            coords: self.coords.iter().map(|&c| u8::from(c != 0)).collect(),
        }
    }
}

impl SupportString {
    pub fn new(coords: Vec<u8>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::MalformedState("empty coordinate string".into()));
        }
        if let Some(&c) = coords.iter().find(|&&c| c > 1) {
            return Err(Error::MalformedState(format!(
                "coordinate value {c} outside alphabet {{0,1}}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u8] {
        &self.coords
    }

    /// Little-endian base-2 rank.
    pub fn index(&self) -> usize {
        self.coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * 2 + c as usize)
    }

    pub fn from_index(n: usize, mut index: usize) -> Result<Self> {
        if index >= pow_checked(2, n)? {
            return Err(Error::MalformedState(format!(
                "index {index} out of range for n = {n}"
            )));
        }
        let mut coords = vec![0u8; n];
        for c in coords.iter_mut() {
            *c = (index % 2) as u8;
            index /= 2;
        }
        Ok(Self { coords })
    }

    pub fn hamming_weight(&self) -> HammingWeight {
        HammingWeight(self.coords.iter().filter(|&&c| c != 0).count())
    }
}

/// Hamming weight of the little-endian base-2 expansion of `index`.
pub fn support_weight_of_index(index: usize) -> usize {
    index.count_ones() as usize
}

/// Hamming weight of the little-endian base-4 expansion of `index`.
pub fn pauli_weight_of_index(mut index: usize) -> usize {
    let mut w = 0;
    while index > 0 {
        if !index.is_multiple_of(4) {
            w += 1;
        }
        index /= 4;
    }
    w
}

impl Permutation {
    pub fn new(images_one_based: Vec<usize>) -> Result<Self> {
        let n = images_one_based.len();
        if n == 0 || n > 20 {
            return Err(Error::MalformedState(format!(
                "permutation size {n} outside 1..=20"
            )));
        }
        let mut seen = vec![false; n];
        for &v in &images_one_based {
            if v < 1 || v > n || seen[v - 1] {
                return Err(Error::MalformedState(format!(
                    "images {images_one_based:?} are not a bijection of 1..={n}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self {
            images: images_one_based.iter().map(|&v| (v - 1) as u8).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n as u8).collect(),
        }
    }

    /// Transposition of positions `a` and `b` (0-based).
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.images.swap(a, b);
        p
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// 0-based image of 0-based position `k`.
    pub fn image(&self, k: usize) -> usize {
        self.images[k] as usize
    }

    /// Composition `self` after `other`: `(self * other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            images: other
                .images
                .iter()
                .map(|&k| self.images[k as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u8; self.images.len()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v as usize] = k as u8;
        }
        Self { images }
    }

    /// +1 for even permutations, -1 for odd.
    pub fn sign(&self) -> i8 {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut transpositions = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.images[k] as usize;
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Natural left action on a binary string: the value at position k moves
    /// to position sigma(k).
    pub fn apply_support(&self, s: &SupportString) -> SupportString {
        let mut coords = vec![0u8; s.n()];
        for (k, &v) in s.coords.iter().enumerate() {
            coords[self.images[k] as usize] = v;
        }
        SupportString { coords }
    }

    /// Lehmer-code rank; the identity ranks 0.
    pub fn rank(&self) -> usize {
        let n = self.images.len();
        let mut rank = 0usize;
        for k in 0..n {
            let smaller_later = self.images[k + 1..]
                .iter()
                .filter(|&&v| v < self.images[k])
                .count();
            rank = rank * (n - k) + smaller_later;
        }
        rank
    }

    pub fn from_rank(n: usize, mut rank: usize) -> Result<Self> {
        let size = factorial_checked(n)?;
        if rank >= size {
            return Err(Error::MalformedState(format!(
                "rank {rank} out of range for n = {n}"
            )));
        }
        let mut digits = vec![0usize; n];
        for k in (0..n).rev() {
            digits[k] = rank % (n - k);
            rank /= n - k;
        }
        let mut pool: Vec<u8> = (0..n as u8).collect();
        let mut images = Vec::with_capacity(n);
        for &d in &digits {
            images.push(pool.remove(d));
        }
        Ok(Self { images })
    }
}

fn pow_checked(base: usize, exp: usize) -> Result<usize> {
    base.checked_pow(exp as u32)
        .ok_or_else(|| Error::MalformedState(format!("{base}^{exp} overflows the index space")))
}

fn factorial_checked(n: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for k in 2..=n {
        acc = acc
            .checked_mul(k)
            .ok_or_else(|| Error::MalformedState(format!("{n}! overflows the index space")))?;
    }
    Ok(acc)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.coords {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for SupportString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.coords {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|&v| (v + 1).to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&d| d <= 3)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::MalformedState(format!("bad digit '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(coords)
    }
}

impl std::str::FromStr for SupportString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&d| d <= 1)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::MalformedState(format!("bad digit '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(coords)
    }
}

impl std::str::FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::MalformedState(format!("bad image '{tok}' in \"{s}\"")))
            })
            .collect::<Result<Vec<usize>>>()?;
        Self::new(images)
    }
}

/// Which of the four state spaces a codec indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SpaceKind {
    Pauli,
    Support,
    Weight,
    Perm,
}

/// Bijection between a structured state space of declared size `n` and the
/// dense index range `0..size`.
///
/// Codecs are immutable after construction and carry `n` explicitly; mixing
/// codecs of different `n` is rejected by the consuming operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCodec {
    kind: SpaceKind,
    n: usize,
    size: usize,
}

impl StateCodec {
    pub fn pauli(n: usize) -> Result<Self> {
        check_n(n, 30)?;
        Ok(Self {
            kind: SpaceKind::Pauli,
            n,
            size: pow_checked(4, n)?,
        })
    }

    pub fn support(n: usize) -> Result<Self> {
        check_n(n, 62)?;
        Ok(Self {
            kind: SpaceKind::Support,
            n,
            size: pow_checked(2, n)?,
        })
    }

    /// Hamming weights {1..n}: weight H sits at index H-1.
    pub fn weight(n: usize) -> Result<Self> {
        check_n(n, usize::MAX / 2)?;
        Ok(Self {
            kind: SpaceKind::Weight,
            n,
            size: n,
        })
    }

    pub fn perm(n: usize) -> Result<Self> {
        check_n(n, 20)?;
        Ok(Self {
            kind: SpaceKind::Perm,
            n,
            size: factorial_checked(n)?,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Canonical textual form of the state at `index`, as used in CSV/JSON
    /// output: digit strings like "0312", permutations in one-line notation
    /// like "2 1 3", weights as decimal numbers.
    pub fn label(&self, index: usize) -> String {
        assert!(index < self.size, "index {index} out of range");
        match self.kind {
            SpaceKind::Pauli => PauliString::from_index(self.n, index).unwrap().to_string(),
            SpaceKind::Support => SupportString::from_index(self.n, index)
                .unwrap()
                .to_string(),
            SpaceKind::Weight => (index + 1).to_string(),
            SpaceKind::Perm => Permutation::from_rank(self.n, index).unwrap().to_string(),
        }
    }

    pub fn encode_pauli(&self, s: &PauliString) -> Result<usize> {
        self.expect(SpaceKind::Pauli, s.n())?;
        Ok(s.index())
    }

    pub fn encode_support(&self, s: &SupportString) -> Result<usize> {
        self.expect(SpaceKind::Support, s.n())?;
        Ok(s.index())
    }

    pub fn encode_perm(&self, p: &Permutation) -> Result<usize> {
        self.expect(SpaceKind::Perm, p.n())?;
        Ok(p.rank())
    }

    fn expect(&self, kind: SpaceKind, n: usize) -> Result<()> {
        if self.kind != kind {
            return Err(Error::MalformedState(format!(
                "state of kind {kind:?} offered to a {:?} codec",
                self.kind
            )));
        }
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

fn check_n(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::InvalidParameter(format!(
            "n = {n} outside 1..={max}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pauli_index_examples() {
        // All-zero string is index 0.
        assert_eq!(PauliString::new(vec![0, 0, 0]).unwrap().index(), 0);
        // Little-endian: coordinate 1 is least significant.
        assert_eq!(PauliString::new(vec![1, 0, 0]).unwrap().index(), 1);
        assert_eq!(PauliString::new(vec![0, 0, 1]).unwrap().index(), 16);
        assert_eq!(SupportString::new(vec![1, 0]).unwrap().index(), 1);
        assert_eq!(Permutation::identity(4).rank(), 0);
    }

    #[test]
    fn hamming_weight_examples() {
        assert_eq!(
            PauliString::new(vec![0, 0, 1]).unwrap().hamming_weight(),
            HammingWeight(1)
        );
        assert_eq!(
            PauliString::new(vec![3, 2, 1]).unwrap().hamming_weight(),
            HammingWeight(3)
        );
        assert_eq!(PauliString::zero(5).hamming_weight(), HammingWeight(0));
    }

    #[test]
    fn rejects_malformed_states() {
        assert!(PauliString::new(vec![0, 4]).is_err());
        assert!(SupportString::new(vec![2]).is_err());
        assert!(Permutation::new(vec![1, 1, 3]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        let codec = StateCodec::pauli(3).unwrap();
        let wrong_len = PauliString::new(vec![1, 2]).unwrap();
        assert!(matches!(
            codec.encode_pauli(&wrong_len),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn exhaustive_round_trips() {
        for n in 1..=6 {
            let codec = StateCodec::pauli(n).unwrap();
            for i in 0..codec.size() {
                let s = PauliString::from_index(n, i).unwrap();
                assert_eq!(codec.encode_pauli(&s).unwrap(), i);
                assert_eq!(s.hamming_weight().0, pauli_weight_of_index(i));
            }
        }
        for n in [1, 4, 10, 16] {
            let codec = StateCodec::support(n).unwrap();
            for i in 0..codec.size() {
                let s = SupportString::from_index(n, i).unwrap();
                assert_eq!(codec.encode_support(&s).unwrap(), i);
                assert_eq!(s.hamming_weight().0, support_weight_of_index(i));
            }
        }
        for n in 1..=7 {
            let codec = StateCodec::perm(n).unwrap();
            for i in 0..codec.size() {
                let p = Permutation::from_rank(n, i).unwrap();
                assert_eq!(codec.encode_perm(&p).unwrap(), i);
            }
        }
    }

    #[test]
    fn permutation_algebra() {
        let s = Permutation::new(vec![2, 3, 1]).unwrap(); // 1->2, 2->3, 3->1
        let t = Permutation::transposition(3, 0, 1);
        assert_eq!(s.compose(&s.inverse()), Permutation::identity(3));
        assert_eq!(s.sign(), 1);
        assert_eq!(t.sign(), -1);
        assert_eq!(s.compose(&t).sign(), -1);
        // Action moves the value at position k to position sigma(k).
        let x = SupportString::new(vec![1, 0, 0]).unwrap();
        assert_eq!(
            s.apply_support(&x),
            SupportString::new(vec![0, 1, 0]).unwrap()
        );
        // Left action: (s . t) applied equals s applied after t.
        let both = s.compose(&t).apply_support(&x);
        assert_eq!(both, s.apply_support(&t.apply_support(&x)));
    }

    #[test]
    fn text_forms() {
        let p: PauliString = "0312".parse().unwrap();
        assert_eq!(p.coords(), &[0, 3, 1, 2]);
        assert_eq!(p.to_string(), "0312");
        let q: Permutation = "2 1 3".parse().unwrap();
        assert_eq!(q.to_string(), "2 1 3");
        assert!("04".parse::<PauliString>().is_err());
        assert!("2 2 3".parse::<Permutation>().is_err());
        let codec = StateCodec::weight(4).unwrap();
        assert_eq!(codec.label(0), "1");
        assert_eq!(codec.label(3), "4");
    }

    proptest! {
        #[test]
        fn pauli_roundtrip_prop(n in 1usize..8, seed in 0usize..10_000) {
            let size = 4usize.pow(n as u32);
            let i = seed % size;
            let s = PauliString::from_index(n, i).unwrap();
            prop_assert_eq!(s.index(), i);
        }

        #[test]
        fn lehmer_rank_monotone_in_lexicographic_images(n in 2usize..6, a in 0usize..720, b in 0usize..720) {
            let size: usize = (1..=n).product();
            let (a, b) = (a % size, b % size);
            let pa = Permutation::from_rank(n, a).unwrap();
            let pb = Permutation::from_rank(n, b).unwrap();
            let ia: Vec<usize> = (0..n).map(|k| pa.image(k)).collect();
            let ib: Vec<usize> = (0..n).map(|k| pb.image(k)).collect();
            prop_assert_eq!(a.cmp(&b), ia.cmp(&ib));
        }
    }
}
