//! Constructors for the chain family, with closed-form stationary states and
//! a sparse-triplet export format.
//!
//! All chains are built in exact `i64` rational arithmetic. The family:
//!
//! * `P` — pair resampling on {0,1,2,3}^n: pick a uniform unordered pair of
//!   coordinates; if both are 0 do nothing, otherwise replace the pair with a
//!   uniform choice among the 15 nonzero value pairs. The all-zero string is
//!   an isolated absorbing state.
//! * `Z` — the induced birth-death walk of the Hamming weight on {1..n}.
//! * `Q` — the projection of `P` onto support patterns {0,1}^n; each pair
//!   block sends any active pair to (0,1), (1,0), (1,1) with weights
//!   1/5, 1/5, 3/5.
//! * `Tp` — the pair-swap chain on {0,1}^n (average of coordinate swaps).
//! * `T` — lazy swaps: (1/n) I + ((n-1)/n) Tp.
//! * `M` — the non-swap component of `Q`: per pair block, 01 -> (01: 1/4,
//!   11: 3/4), 10 -> (10: 1/4, 11: 3/4), 11 -> (01: 1/4, 10: 1/4, 11: 1/2).
//! * `Mtilde` — M + (1/(4n)) (Tp - I), so that Q = (1/5) T + (4/5) Mtilde.
//! * `Qprime` — lazy variant (1/n) I + ((n-1)/n) Q, equal to
//!   (1/5) T + (4/5) [(1/n) I + ((n-1)/n) M].
//! * `RT` — the random transposition walk on the symmetric group: stay with
//!   probability 1/n, otherwise compose a uniform transposition (each of the
//!   n(n-1)/2 transpositions has weight 2/n^2).

use crate::error::{Error, Result};
use crate::matrix::{rat_to_big, Distribution, Rat64, SparseMatrix};
use crate::state::{pauli_weight_of_index, support_weight_of_index, Permutation, StateCodec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainKind {
    P,
    Z,
    Q,
    Tp,
    T,
    M,
    Mtilde,
    Qprime,
    RT,
}

impl ChainKind {
    pub const ALL: [ChainKind; 9] = [
        ChainKind::P,
        ChainKind::Z,
        ChainKind::Q,
        ChainKind::Tp,
        ChainKind::T,
        ChainKind::M,
        ChainKind::Mtilde,
        ChainKind::Qprime,
        ChainKind::RT,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChainKind::P => "P",
            ChainKind::Z => "Z",
            ChainKind::Q => "Q",
            ChainKind::Tp => "Tp",
            ChainKind::T => "T",
            ChainKind::M => "M",
            ChainKind::Mtilde => "Mtilde",
            ChainKind::Qprime => "Qprime",
            ChainKind::RT => "RT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown chain kind '{s}'")))
    }

    /// Materialization range. `P` grows as 4^n and is only built explicitly
    /// up to n = 6; beyond that it is available through trajectory sampling.
    pub fn n_range(&self) -> (usize, usize) {
        match self {
            ChainKind::P => (2, 6),
            ChainKind::Z => (2, 1_000_000),
            ChainKind::RT => (2, 7),
            _ => (2, 16),
        }
    }
}

impl std::fmt::Display for ChainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A built chain: kind, size parameter, exact matrix, state codec.
#[derive(Debug, Clone)]
pub struct ChainFamily {
    pub kind: ChainKind,
    pub n: usize,
    pub matrix: SparseMatrix<Rat64>,
    pub codec: StateCodec,
}

impl ChainFamily {
    /// States excluded from stationarity and mixing analysis: the absorbing
    /// all-zero string for the chains living on string state spaces.
    pub fn excluded(&self) -> Vec<usize> {
        match self.kind {
            ChainKind::Z | ChainKind::RT => Vec::new(),
            _ => vec![0],
        }
    }

    pub fn float(&self) -> SparseMatrix<f64> {
        self.matrix.to_f64()
    }
}

fn check_range(kind: ChainKind, n: usize) -> Result<()> {
    let (min, max) = kind.n_range();
    if n < min || n > max {
        return Err(Error::SizeLimit {
            kind: kind.name().into(),
            n,
            min,
            max,
        });
    }
    Ok(())
}

pub fn build(kind: ChainKind, n: usize) -> Result<ChainFamily> {
    match kind {
        ChainKind::P => build_p(n),
        ChainKind::Z => build_z(n),
        ChainKind::Q => build_q(n),
        ChainKind::Tp => build_tp(n),
        ChainKind::T => build_t(n),
        ChainKind::M => build_m(n),
        ChainKind::Mtilde => build_mtilde(n),
        ChainKind::Qprime => build_qprime(n),
        ChainKind::RT => build_rt(n),
    }
}

/// Unordered coordinate pairs (i < j); the builders sum per-pair blocks with
/// weight 2/(n(n-1)) each, which equals the ordered-pair average because the
/// blocks are symmetric in (i, j).
fn coordinate_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// The 15 value pairs over {0,1,2,3}^2 minus (0,0).
fn nonzero_value_pairs() -> Vec<(u8, u8)> {
    let mut out = Vec::with_capacity(15);
    for a in 0..4u8 {
        for b in 0..4u8 {
            if (a, b) != (0, 0) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn build_p(n: usize) -> Result<ChainFamily> {
    check_range(ChainKind::P, n)?;
    let codec = StateCodec::pauli(n)?;
    let dim = codec.size();
    let pairs = coordinate_pairs(n);
    let pair_weight = Rat64::new(2, (n * (n - 1)) as i64);
    let outcome_weight = pair_weight / Rat64::from_integer(15);
    let values = nonzero_value_pairs();
    let pow4: Vec<usize> = (0..n).map(|k| 4usize.pow(k as u32)).collect();

    let mut rows: Vec<Vec<(u32, Rat64)>> = Vec::with_capacity(dim);
    for s in 0..dim {
        let mut row: Vec<(u32, Rat64)> = Vec::new();
        for &(i, j) in &pairs {
            let ci = (s / pow4[i]) % 4;
            let cj = (s / pow4[j]) % 4;
            if ci == 0 && cj == 0 {
                row.push((s as u32, pair_weight));
            } else {
                let base = s - ci * pow4[i] - cj * pow4[j];
                for &(a, b) in &values {
                    let target = base + a as usize * pow4[i] + b as usize * pow4[j];
                    row.push((target as u32, outcome_weight));
                }
            }
        }
        rows.push(row);
    }
    let matrix = SparseMatrix::stochastic(dim, rows)?;
    Ok(ChainFamily {
        kind: ChainKind::P,
        n,
        matrix,
        codec,
    })
}

pub fn build_z(n: usize) -> Result<ChainFamily> {
    check_range(ChainKind::Z, n)?;
    let codec = StateCodec::weight(n)?;
    let den = 5 * (n as i64) * (n as i64 - 1);
    let mut rows: Vec<Vec<(u32, Rat64)>> = Vec::with_capacity(n);
    for h in 1..=n {
        let hi = h as i64;
        let up = Rat64::new(6 * hi * (n as i64 - hi), den);
        let down = Rat64::new(2 * hi * (hi - 1), den);
        let stay = Rat64::one() - up - down;
        let mut row = Vec::new();
        if h > 1 && !down.is_zero() {
            row.push((h as u32 - 2, down));
        }
        row.push((h as u32 - 1, stay));
        if h < n && !up.is_zero() {
            row.push((h as u32, up));
        }
        rows.push(row);
    }
    let matrix = SparseMatrix::stochastic(n, rows)?;
    Ok(ChainFamily {
        kind: ChainKind::Z,
        n,
        matrix,
        codec,
    })
}

/// Per-pair transition rule on support bits, as (target bits, weight) lists.
type PairRule = fn(u8, u8) -> Vec<((u8, u8), Rat64)>;

fn build_support_chain(kind: ChainKind, n: usize, rule: PairRule) -> Result<ChainFamily> {
    check_range(kind, n)?;
    let codec = StateCodec::support(n)?;
    let dim = codec.size();
    let pairs = coordinate_pairs(n);
    let pair_weight = Rat64::new(2, (n * (n - 1)) as i64);

    let mut rows: Vec<Vec<(u32, Rat64)>> = Vec::with_capacity(dim);
    for s in 0..dim {
        let mut row: Vec<(u32, Rat64)> = Vec::new();
        for &(i, j) in &pairs {
            let bi = ((s >> i) & 1) as u8;
            let bj = ((s >> j) & 1) as u8;
            let base = s & !(1usize << i) & !(1usize << j);
            for ((ti, tj), w) in rule(bi, bj) {
                let target = base | ((ti as usize) << i) | ((tj as usize) << j);
                row.push((target as u32, w * pair_weight));
            }
        }
        rows.push(row);
    }
    let matrix = SparseMatrix::stochastic(dim, rows)?;
    Ok(ChainFamily {
        kind,
        n,
        matrix,
        codec,
    })
}

fn q_rule(bi: u8, bj: u8) -> Vec<((u8, u8), Rat64)> {
    if bi == 0 && bj == 0 {
        vec![((0, 0), Rat64::one())]
    } else {
        vec![
            ((0, 1), Rat64::new(1, 5)),
            ((1, 0), Rat64::new(1, 5)),
            ((1, 1), Rat64::new(3, 5)),
        ]
    }
}

fn m_rule(bi: u8, bj: u8) -> Vec<((u8, u8), Rat64)> {
    match (bi, bj) {
        (0, 0) => vec![((0, 0), Rat64::one())],
        (0, 1) => vec![((0, 1), Rat64::new(1, 4)), ((1, 1), Rat64::new(3, 4))],
        (1, 0) => vec![((1, 0), Rat64::new(1, 4)), ((1, 1), Rat64::new(3, 4))],
        _ => vec![
            ((0, 1), Rat64::new(1, 4)),
            ((1, 0), Rat64::new(1, 4)),
            ((1, 1), Rat64::new(1, 2)),
        ],
    }
}

fn swap_rule(bi: u8, bj: u8) -> Vec<((u8, u8), Rat64)> {
    vec![((bj, bi), Rat64::one())]
}

pub fn build_q(n: usize) -> Result<ChainFamily> {
    build_support_chain(ChainKind::Q, n, q_rule)
}

pub fn build_m(n: usize) -> Result<ChainFamily> {
    build_support_chain(ChainKind::M, n, m_rule)
}

pub fn build_tp(n: usize) -> Result<ChainFamily> {
    build_support_chain(ChainKind::Tp, n, swap_rule)
}

fn lazy_mix(kind: ChainKind, n: usize, inner: &ChainFamily) -> Result<ChainFamily> {
    let ni = n as i64;
    let id = SparseMatrix::<Rat64>::identity(inner.matrix.dim());
    let combined =
        id.linear_combination(&Rat64::new(1, ni), &inner.matrix, &Rat64::new(ni - 1, ni))?;
    combined.validate_stochastic()?;
    Ok(ChainFamily {
        kind,
        n,
        matrix: combined,
        codec: inner.codec.clone(),
    })
}

/// Lazy swap chain T = (1/n) I + ((n-1)/n) Tp; aperiodic on every orbit.
pub fn build_t(n: usize) -> Result<ChainFamily> {
    check_range(ChainKind::T, n)?;
    lazy_mix(ChainKind::T, n, &build_tp(n)?)
}

/// Lazy variant Q' = (1/n) I + ((n-1)/n) Q.
pub fn build_qprime(n: usize) -> Result<ChainFamily> {
    check_range(ChainKind::Qprime, n)?;
    lazy_mix(ChainKind::Qprime, n, &build_q(n)?)
}

/// Mtilde = M + (1/(4n)) (Tp - I). Nonnegativity holds because every pair
/// block of M has diagonal at least 1/4; a negative entry would mean a
/// construction bug and is a hard failure.
pub fn build_mtilde(n: usize) -> Result<ChainFamily> {
    check_range(ChainKind::Mtilde, n)?;
    let m = build_m(n)?;
    let tp = build_tp(n)?;
    let ni = n as i64;
    let id = SparseMatrix::<Rat64>::identity(m.matrix.dim());
    let correction =
        tp.matrix
            .linear_combination(&Rat64::new(1, 4 * ni), &id, &Rat64::new(-1, 4 * ni))?;
    let combined = m
        .matrix
        .linear_combination(&Rat64::one(), &correction, &Rat64::one())?;
    combined.validate_stochastic()?;
    Ok(ChainFamily {
        kind: ChainKind::Mtilde,
        n,
        matrix: combined,
        codec: m.codec,
    })
}

/// Random transposition walk on S_n: from sigma, stay with probability 1/n
/// or move to alpha . sigma for a uniform transposition alpha. Symmetric,
/// hence doubly stochastic; stationary state uniform over the n! permutations.
pub fn build_rt(n: usize) -> Result<ChainFamily> {
    check_range(ChainKind::RT, n)?;
    let codec = StateCodec::perm(n)?;
    let dim = codec.size();
    let stay = Rat64::new(1, n as i64);
    let move_w = Rat64::new(2, (n * n) as i64);
    let transpositions: Vec<Permutation> = coordinate_pairs(n)
        .into_iter()
        .map(|(a, b)| Permutation::transposition(n, a, b))
        .collect();

    let mut rows: Vec<Vec<(u32, Rat64)>> = Vec::with_capacity(dim);
    for r in 0..dim {
        let sigma = Permutation::from_rank(n, r)?;
        let mut row = vec![(r as u32, stay)];
        for alpha in &transpositions {
            let rho = alpha.compose(&sigma);
            row.push((rho.rank() as u32, move_w));
        }
        rows.push(row);
    }
    let matrix = SparseMatrix::stochastic(dim, rows)?;
    Ok(ChainFamily {
        kind: ChainKind::RT,
        n,
        matrix,
        codec,
    })
}

fn big_pow(base: u64, exp: usize) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

fn big_binomial(n: usize, k: usize) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Closed-form stationary states:
/// * `P`: uniform 1/(4^n - 1) on nonzero strings;
/// * `Z`: C(n,H) 3^H / (4^n - 1) at weight H;
/// * `Q`: 3^(H(q)) / (4^n - 1) at support pattern q;
/// * `RT`: uniform 1/n!.
pub fn stationary_closed_form(kind: ChainKind, n: usize) -> Result<Distribution<BigRational>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} below 2")));
    }
    let denom = big_pow(4, n) - BigInt::one();
    match kind {
        ChainKind::P => {
            let dim = StateCodec::pauli(n)?.size();
            let share = BigRational::new(BigInt::one(), denom);
            let mut w = vec![share; dim];
            w[0] = BigRational::zero();
            Distribution::new(w)
        }
        ChainKind::Z => {
            let w = (1..=n)
                .map(|h| BigRational::new(big_binomial(n, h) * big_pow(3, h), denom.clone()))
                .collect();
            Distribution::new(w)
        }
        ChainKind::Q => {
            let dim = StateCodec::support(n)?.size();
            let mut w = Vec::with_capacity(dim);
            w.push(BigRational::zero());
            for q in 1..dim {
                let h = support_weight_of_index(q);
                w.push(BigRational::new(big_pow(3, h), denom.clone()));
            }
            Distribution::new(w)
        }
        ChainKind::RT => {
            let dim = StateCodec::perm(n)?.size();
            let share = BigRational::new(BigInt::one(), BigInt::from(dim));
            Distribution::new(vec![share; dim])
        }
        other => Err(Error::InvalidParameter(format!(
            "no closed-form stationary state for chain kind {other}"
        ))),
    }
}

/// Stationary state as doubles, for the float pipelines. M, Mtilde and
/// Qprime share the Q stationary state on the active set.
pub fn stationary_f64(kind: ChainKind, n: usize) -> Result<Distribution<f64>> {
    match kind {
        ChainKind::P | ChainKind::Z | ChainKind::Q | ChainKind::RT => {
            Ok(stationary_closed_form(kind, n)?.to_f64())
        }
        ChainKind::M | ChainKind::Mtilde | ChainKind::Qprime => {
            Ok(stationary_closed_form(ChainKind::Q, n)?.to_f64())
        }
        other => Err(Error::InvalidParameter(format!(
            "chain kind {other} has no unique stationary state"
        ))),
    }
}

/// Sparse-triplet text dump: header `kind n dim`, then one `row col num den`
/// line per entry, sorted by (row, col). Bit-exact and diffable.
pub fn export_triplets(fam: &ChainFamily, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{} {} {}", fam.kind.name(), fam.n, fam.matrix.dim())?;
    for row in 0..fam.matrix.dim() {
        for (col, v) in fam.matrix.row(row) {
            writeln!(w, "{} {} {} {}", row, col, v.numer(), v.denom())?;
        }
    }
    Ok(())
}

/// Hamming weight of the state at `index` in the chain's own codec, where
/// the notion applies.
pub fn state_weight(kind: ChainKind, index: usize) -> Option<usize> {
    match kind {
        ChainKind::P => Some(pauli_weight_of_index(index)),
        ChainKind::Z => Some(index + 1),
        ChainKind::RT => None,
        _ => Some(support_weight_of_index(index)),
    }
}

pub fn rat_distribution_to_big(d: &Distribution<Rat64>) -> Distribution<BigRational> {
    Distribution::new_unchecked(d.weights().iter().map(rat_to_big).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{stationary, Scalar};
    use crate::state::{PauliString, SupportString};
    use num_traits::ToPrimitive;

    fn r(n: i64, d: i64) -> Rat64 {
        Rat64::new(n, d)
    }

    #[test]
    fn p_rows_match_hand_enumeration() {
        // n = 2, row (0,1): uniform 1/15 over the 15 nonzero states.
        let p2 = build_p(2).unwrap();
        let from = PauliString::new(vec![0, 1]).unwrap().index();
        for target in 1..16 {
            assert_eq!(p2.matrix.get(from, target), r(1, 15));
        }
        assert_eq!(p2.matrix.get(from, 0), Rat64::zero());
        // Row of the all-zero string: absorbing.
        assert_eq!(p2.matrix.row(0), &[(0u32, Rat64::one())]);

        // n = 3, row (0,0,1): staying probability 1/3 + 2/45 = 17/45
        // (pair {1,2} inert, pairs {1,3} and {2,3} resample).
        let p3 = build_p(3).unwrap();
        let s = PauliString::new(vec![0, 0, 1]).unwrap().index();
        assert_eq!(p3.matrix.get(s, s), r(17, 45));
    }

    #[test]
    fn z_entries_from_rate_formulas() {
        let z3 = build_z(3).unwrap();
        // H = 1: up 2/5, stay 3/5, no down.
        assert_eq!(z3.matrix.get(0, 1), r(2, 5));
        assert_eq!(z3.matrix.get(0, 0), r(3, 5));
        // H = 3: down 2/5, stay 3/5, no H = 4 state.
        assert_eq!(z3.matrix.get(2, 1), r(2, 5));
        assert_eq!(z3.matrix.get(2, 2), r(3, 5));
        // Diagonal complement identity at every n, H.
        for n in 2..=12 {
            let z = build_z(n).unwrap();
            for h in 1..=n {
                let (hi, ni) = (h as i64, n as i64);
                let expected_stay =
                    Rat64::one() - r(2 * hi * (3 * ni - 2 * hi - 1), 5 * ni * (ni - 1));
                assert_eq!(z.matrix.get(h - 1, h - 1), expected_stay);
            }
        }
    }

    #[test]
    fn q_block_rule_and_small_cases() {
        let idx = |s: &str| s.parse::<SupportString>().unwrap().index();
        // n = 2: Q is the 4x4 pair block itself; active rows identical.
        let q2 = build_q(2).unwrap();
        for from in ["01", "10", "11"] {
            assert_eq!(q2.matrix.get(idx(from), idx("01")), r(1, 5));
            assert_eq!(q2.matrix.get(idx(from), idx("10")), r(1, 5));
            assert_eq!(q2.matrix.get(idx(from), idx("11")), r(3, 5));
            assert_eq!(q2.matrix.get(idx(from), idx("00")), Rat64::zero());
        }
        // n = 3, row 001: stay 7/15, other weight-1 states 1/15 each,
        // adjacent weight-2 states 1/5 each.
        let q3 = build_q(3).unwrap();
        let s = idx("001");
        assert_eq!(q3.matrix.get(s, s), r(7, 15));
        assert_eq!(q3.matrix.get(s, idx("100")), r(1, 15));
        assert_eq!(q3.matrix.get(s, idx("010")), r(1, 15));
        assert_eq!(q3.matrix.get(s, idx("101")), r(1, 5));
        assert_eq!(q3.matrix.get(s, idx("011")), r(1, 5));
    }

    #[test]
    fn pair_block_decomposition_identity() {
        // (1/5) swap + (4/5) M reproduces the Q block row by row; e.g. the 01
        // row: (1/5)(0,0,1,0) + (4/5)(0,1/4,0,3/4) = (0,1/5,1/5,3/5).
        for (bi, bj) in [(0u8, 1u8), (1, 0), (1, 1), (0, 0)] {
            let mut combined = std::collections::BTreeMap::new();
            for ((ti, tj), w) in swap_rule(bi, bj) {
                *combined.entry((ti, tj)).or_insert_with(Rat64::zero) += w * r(1, 5);
            }
            for ((ti, tj), w) in m_rule(bi, bj) {
                *combined.entry((ti, tj)).or_insert_with(Rat64::zero) += w * r(4, 5);
            }
            combined.retain(|_, v| !v.is_zero());
            let expected: std::collections::BTreeMap<(u8, u8), Rat64> =
                q_rule(bi, bj).into_iter().collect();
            assert_eq!(combined, expected);
        }
    }

    #[test]
    fn decompositions_hold_exactly() {
        for n in 2..=6 {
            let q = build_q(n).unwrap().matrix;
            let tp = build_tp(n).unwrap().matrix;
            let m = build_m(n).unwrap().matrix;
            let t = build_t(n).unwrap().matrix;
            let mt = build_mtilde(n).unwrap().matrix;
            let rhs1 = tp.linear_combination(&r(1, 5), &m, &r(4, 5)).unwrap();
            let residual1 = q
                .linear_combination(&Rat64::one(), &rhs1, &r(-1, 1))
                .unwrap();
            assert!(residual1.is_zero(), "Q != (1/5)Tp + (4/5)M at n = {n}");
            let rhs2 = t.linear_combination(&r(1, 5), &mt, &r(4, 5)).unwrap();
            let residual2 = q
                .linear_combination(&Rat64::one(), &rhs2, &r(-1, 1))
                .unwrap();
            assert!(residual2.is_zero(), "Q != (1/5)T + (4/5)Mtilde at n = {n}");
        }
    }

    #[test]
    fn qprime_matches_lazy_q() {
        for n in 2..=5 {
            let qp = build_qprime(n).unwrap().matrix;
            let t = build_t(n).unwrap().matrix;
            let m = build_m(n).unwrap().matrix;
            let ni = n as i64;
            let id = SparseMatrix::<Rat64>::identity(qp.dim());
            let mprime = id
                .linear_combination(&r(1, ni), &m, &r(ni - 1, ni))
                .unwrap();
            let rhs = t.linear_combination(&r(1, 5), &mprime, &r(4, 5)).unwrap();
            let residual = qp
                .linear_combination(&Rat64::one(), &rhs, &r(-1, 1))
                .unwrap();
            assert!(residual.is_zero());
        }
    }

    #[test]
    fn rt_rows() {
        let rt = build_rt(3).unwrap();
        // Diagonal 1/3, three transposition neighbors at 2/9 each.
        for s in 0..6 {
            assert_eq!(rt.matrix.get(s, s), r(1, 3));
            assert_eq!(rt.matrix.row(s).len(), 4);
            for (c, v) in rt.matrix.row(s) {
                if *c as usize != s {
                    assert_eq!(*v, r(2, 9));
                }
            }
        }
        // Symmetric, hence doubly stochastic.
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(rt.matrix.get(x, y), rt.matrix.get(y, x));
            }
        }
    }

    #[test]
    fn closed_forms_match_solver() {
        // P at n = 2: uniform 1/15 off the absorbing zero string.
        let p = build_p(2).unwrap();
        let pi = stationary(&p.matrix, &[0]).unwrap();
        assert_eq!(pi, stationary_closed_form(ChainKind::P, 2).unwrap());
        assert_eq!(ToPrimitive::to_f64(pi.get(3)).unwrap(), 1.0 / 15.0);

        // Z at n = 2: (2/5, 3/5).
        let z = build_z(2).unwrap();
        let zeta = stationary(&z.matrix, &[]).unwrap();
        assert_eq!(zeta, stationary_closed_form(ChainKind::Z, 2).unwrap());
        assert_eq!(zeta.get(0), &Scalar::ratio(2, 5));

        // Q at n = 2: (1/5, 1/5, 3/5) on the three nonzero patterns.
        let q = build_q(2).unwrap();
        let nu = stationary(&q.matrix, &[0]).unwrap();
        assert_eq!(nu, stationary_closed_form(ChainKind::Q, 2).unwrap());
        assert_eq!(nu.get(3), &Scalar::ratio(3, 5));

        // RT at n = 3: uniform 1/6 from the solver too.
        let rt = build_rt(3).unwrap();
        let unif = stationary(&rt.matrix, &[]).unwrap();
        assert_eq!(unif, stationary_closed_form(ChainKind::RT, 3).unwrap());

        // Z at n = 3: (9, 27, 27)/63.
        let want: Vec<BigRational> = [9, 27, 27]
            .iter()
            .map(|&k| BigRational::new(BigInt::from(k), BigInt::from(63)))
            .collect();
        assert_eq!(
            stationary_closed_form(ChainKind::Z, 3).unwrap().weights(),
            &want[..]
        );

        // P at n = 3: 1/63 on each of the 63 nonzero strings.
        let pi3 = stationary_closed_form(ChainKind::P, 3).unwrap();
        assert_eq!(pi3.get(1), &Scalar::ratio(1, 63));
    }

    #[test]
    fn size_limits_enforced() {
        assert!(matches!(build_p(7), Err(Error::SizeLimit { .. })));
        assert!(matches!(build_p(1), Err(Error::SizeLimit { .. })));
        assert!(matches!(build_rt(8), Err(Error::SizeLimit { .. })));
        assert!(ChainKind::parse("mtilde").is_ok());
        assert!(ChainKind::parse("pq").is_err());
    }

    #[test]
    fn export_q2_golden() {
        let q2 = build_q(2).unwrap();
        let mut buf = Vec::new();
        export_triplets(&q2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "\
Q 2 4
0 0 1 1
1 1 1 5
1 2 1 5
1 3 3 5
2 1 1 5
2 2 1 5
2 3 3 5
3 1 1 5
3 2 1 5
3 3 3 5
";
        assert_eq!(text, expected);
    }
}
