//! Sparse row-stochastic matrices and probability vectors, generic over the
//! entry arithmetic.
//!
//! Three scalar types are used:
//!
//! * [`Rat64`] — `i64` rationals for chain construction and entrywise
//!   identities. Every chain built here has entries whose denominators divide
//!   a small constant (at most a few thousand), so sums and products stay far
//!   from overflow; tests run with overflow checks enabled.
//! * [`BigRational`] — arbitrary precision, for stationary distributions and
//!   anything touching `4^n - 1` denominators.
//! * `f64` — eigensolves and long total-variation propagation.
//!
//! Matrices and distributions are immutable values after construction and are
//! safe to share across rayon workers.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

pub type Rat64 = Ratio<i64>;

/// Entry arithmetic used by matrices and distributions.
pub trait Scalar: Clone + PartialEq + PartialOrd + Zero + One + Signed {
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Additive slack for validity checks; `None` means exact comparison.
    fn tolerance() -> Option<Self>;

    fn approx_zero(value: &Self) -> bool {
        match Self::tolerance() {
            None => value.is_zero(),
            Some(tol) => value.abs() <= tol,
        }
    }
}

impl Scalar for Rat64 {
    fn ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn tolerance() -> Option<Self> {
        None
    }
}

impl Scalar for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> Option<Self> {
        None
    }
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Option<Self> {
        Some(1e-12)
    }
}

pub fn rat_to_big(r: &Rat64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Square sparse matrix with per-row column-sorted entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    dim: usize,
    rows: Vec<Vec<(u32, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Build from raw rows without any stochasticity requirement. Duplicate
    /// columns are merged, zeros dropped, columns sorted.
    pub fn raw(dim: usize, rows: Vec<Vec<(u32, T)>>) -> Result<Self> {
        if rows.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let rows = rows
            .into_iter()
            .map(|row| normalize_row(dim, row))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, rows })
    }

    /// Build a row-stochastic matrix: entries nonnegative, each row summing
    /// to one (exactly in rational arithmetic, within 1e-12 for floats).
    pub fn stochastic(dim: usize, rows: Vec<Vec<(u32, T)>>) -> Result<Self> {
        let m = Self::raw(dim, rows)?;
        m.validate_stochastic()?;
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            rows: (0..dim).map(|i| vec![(i as u32, T::one())]).collect(),
        }
    }

    pub fn validate_stochastic(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let mut sum = T::zero();
            for (c, v) in row {
                if *v < T::zero() {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: *c as usize,
                        value: format_scalar(v),
                    });
                }
                sum = sum + v.clone();
            }
            let deviation = sum - T::one();
            if !T::approx_zero(&deviation) {
                return Err(Error::NotStochastic {
                    row: i,
                    sum: format_scalar(&(deviation + T::one())),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[(u32, T)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self.rows[i].binary_search_by_key(&(j as u32), |e| e.0) {
            Ok(pos) => self.rows[i][pos].1.clone(),
            Err(_) => T::zero(),
        }
    }

    /// Row-vector times matrix: `out[y] = sum_x v[x] m(x, y)`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![T::zero(); self.dim];
        for (x, row) in self.rows.iter().enumerate() {
            if v[x].is_zero() {
                continue;
            }
            for (y, w) in row {
                out[*y as usize] = out[*y as usize].clone() + v[x].clone() * w.clone();
            }
        }
        out
    }

    /// Matrix product `self * other` (both row-stochastic convention: the
    /// product describes taking a `self` step then an `other` step).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: Vec<(u32, T)> = Vec::new();
                for (mid, w) in row {
                    for (y, u) in &other.rows[*mid as usize] {
                        acc.push((*y, w.clone() * u.clone()));
                    }
                }
                normalize_row(self.dim, acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: self.dim,
            rows,
        })
    }

    /// Entrywise `a * self + b * other`; result may have negative entries.
    pub fn linear_combination(&self, a: &T, other: &Self, b: &T) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(ra, rb)| {
                let mut acc: Vec<(u32, T)> = Vec::with_capacity(ra.len() + rb.len());
                acc.extend(ra.iter().map(|(c, v)| (*c, a.clone() * v.clone())));
                acc.extend(rb.iter().map(|(c, v)| (*c, b.clone() * v.clone())));
                normalize_row(self.dim, acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: self.dim,
            rows,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    /// Largest absolute entry, for residual reporting.
    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|(_, v)| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Restriction to a subset of states (sorted indices). Entries leading
    /// out of the subset are dropped, so the result is only stochastic when
    /// the subset is closed.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut pos = vec![u32::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new as u32;
        }
        let rows = keep
            .iter()
            .map(|&old| {
                self.rows[old]
                    .iter()
                    .filter(|(c, _)| pos[*c as usize] != u32::MAX)
                    .map(|(c, v)| (pos[*c as usize], v.clone()))
                    .collect()
            })
            .collect();
        Self {
            dim: keep.len(),
            rows,
        }
    }

    pub fn to_f64(&self) -> SparseMatrix<f64> {
        SparseMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(c, v)| (*c, v.to_f64())).collect())
                .collect(),
        }
    }
}

impl SparseMatrix<Rat64> {
    pub fn to_big(&self) -> SparseMatrix<BigRational> {
        SparseMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(c, v)| (*c, rat_to_big(v))).collect())
                .collect(),
        }
    }
}

fn normalize_row<T: Scalar>(dim: usize, mut row: Vec<(u32, T)>) -> Result<Vec<(u32, T)>> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(u32, T)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        if c as usize >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c as usize + 1,
            });
        }
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 = last.1.clone() + v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    Ok(out)
}

pub fn format_scalar<T: Scalar>(v: &T) -> String {
    format!("{}", v.to_f64())
}

/// Probability vector over `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    weights: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        let mut sum = T::zero();
        for (i, w) in weights.iter().enumerate() {
            if *w < T::zero() {
                return Err(Error::NegativeEntry {
                    row: 0,
                    col: i,
                    value: format_scalar(w),
                });
            }
            sum = sum + w.clone();
        }
        if !T::approx_zero(&(sum - T::one())) {
            return Err(Error::NotStochastic {
                row: 0,
                sum: "weights do not sum to 1".into(),
            });
        }
        Ok(Self { weights })
    }

    /// No mass validation; used for propagation output which is stochastic by
    /// construction.
    pub fn new_unchecked(weights: Vec<T>) -> Self {
        Self { weights }
    }

    pub fn point_mass(dim: usize, at: usize) -> Self {
        let mut weights = vec![T::zero(); dim];
        weights[at] = T::one();
        Self { weights }
    }

    pub fn uniform_over(dim: usize, support: &[usize]) -> Self {
        let mut weights = vec![T::zero(); dim];
        let share = T::ratio(1, support.len() as i64);
        for &s in support {
            weights[s] = share.clone();
        }
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> &T {
        &self.weights[i]
    }

    pub fn step(&self, m: &SparseMatrix<T>) -> Result<Self> {
        if self.weights.len() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: self.weights.len(),
            });
        }
        Ok(Self {
            weights: m.apply(&self.weights),
        })
    }

    pub fn tv(&self, other: &Self) -> Result<T> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: other.weights.len(),
            });
        }
        let mut acc = T::zero();
        for (a, b) in self.weights.iter().zip(&other.weights) {
            acc = acc + (a.clone() - b.clone()).abs();
        }
        Ok(acc * T::ratio(1, 2))
    }

    pub fn to_f64(&self) -> Distribution<f64> {
        Distribution {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Total variation distance `(1/2) sum |a_i - b_i|`.
pub fn tv_distance<T: Scalar>(a: &Distribution<T>, b: &Distribution<T>) -> Result<T> {
    a.tv(b)
}

/// Compensated TV distance on raw float slices, used in the hot propagation
/// loops where sums run over tens of thousands of terms.
pub fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let term = (x - y).abs();
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    0.5 * (sum + comp)
}

/// Forward/backward reachability and period of the chain restricted to the
/// complement of `excluded`. Errors if the active set leaks into `excluded`,
/// is not strongly connected, or has period greater than one.
pub fn check_ergodic<T: Scalar>(m: &SparseMatrix<T>, excluded: &[usize]) -> Result<Vec<usize>> {
    let dim = m.dim();
    let mut is_excluded = vec![false; dim];
    for &e in excluded {
        if e >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e + 1,
            });
        }
        is_excluded[e] = true;
    }
    let active: Vec<usize> = (0..dim).filter(|&i| !is_excluded[i]).collect();
    if active.is_empty() {
        return Err(Error::InvalidParameter("no active states".into()));
    }

    for &x in &active {
        for (y, w) in m.row(x) {
            if is_excluded[*y as usize] && !w.is_zero() {
                return Err(Error::ExcludedReachable {
                    from: x,
                    to: *y as usize,
                    weight: format_scalar(w),
                });
            }
        }
    }

    // Forward BFS from the first active state.
    let root = active[0];
    let mut level = vec![usize::MAX; dim];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for (y, _) in m.row(x) {
            let y = *y as usize;
            if level[y] == usize::MAX {
                level[y] = level[x] + 1;
                queue.push_back(y);
            }
        }
    }
    if let Some(&u) = active.iter().find(|&&u| level[u] == usize::MAX) {
        return Err(Error::NotIrreducible { from: root, to: u });
    }

    // Backward BFS over the reversed adjacency.
    let mut radj: Vec<Vec<u32>> = vec![Vec::new(); dim];
    for &x in &active {
        for (y, _) in m.row(x) {
            radj[*y as usize].push(x as u32);
        }
    }
    let mut rseen = vec![false; dim];
    rseen[root] = true;
    queue.push_back(root);
    while let Some(x) = queue.pop_front() {
        for &p in &radj[x] {
            if !rseen[p as usize] {
                rseen[p as usize] = true;
                queue.push_back(p as usize);
            }
        }
    }
    if let Some(&u) = active.iter().find(|&&u| !rseen[u]) {
        return Err(Error::NotIrreducible { from: u, to: root });
    }

    // Period: gcd of level(x) + 1 - level(y) over edges x -> y of a strongly
    // connected graph.
    let mut period: usize = 0;
    for &x in &active {
        for (y, _) in m.row(x) {
            let diff = (level[x] as i64 + 1 - level[*y as usize] as i64).unsigned_abs() as usize;
            period = num_integer::gcd(period, diff);
        }
    }
    if period != 1 {
        return Err(Error::Periodic {
            period,
            state: root,
        });
    }

    Ok(active)
}

/// Exact stationary distribution of the chain restricted off `excluded`.
///
/// The solver first tries the detailed-balance ansatz: fix a root, propagate
/// the ratio `m(x,y)/m(y,x)` along a BFS tree, normalize, and verify
/// `pi * m = pi` with zero residue. When the chain is not reversible the
/// candidate fails verification and a dense exact elimination (feasible for a
/// few hundred states) takes over. Either way the returned vector is exactly
/// verified, supported off `excluded`.
pub fn stationary(
    m: &SparseMatrix<Rat64>,
    excluded: &[usize],
) -> Result<Distribution<BigRational>> {
    let active = check_ergodic(m, excluded)?;

    if let Some(pi) = reversible_ansatz(m, &active) {
        return Ok(pi);
    }

    const MAX_ELIMINATION: usize = 400;
    if active.len() > MAX_ELIMINATION {
        return Err(Error::ExactSolve(format!(
            "chain is not reversible and has {} active states (> {MAX_ELIMINATION}); \
             exact elimination refused",
            active.len()
        )));
    }
    eliminate_stationary(m, &active)
}

fn reversible_ansatz(
    m: &SparseMatrix<Rat64>,
    active: &[usize],
) -> Option<Distribution<BigRational>> {
    let dim = m.dim();
    let mut value: Vec<Option<BigRational>> = vec![None; dim];
    let root = active[0];
    value[root] = Some(BigRational::one());
    let mut queue = std::collections::VecDeque::from([root]);
    let mut visited = 1usize;
    while let Some(x) = queue.pop_front() {
        let vx = value[x].clone().unwrap();
        for (y, w) in m.row(x) {
            let y = *y as usize;
            if value[y].is_some() || y == x {
                continue;
            }
            let back = m.get(y, x);
            if back.is_zero() {
                return None; // one-way edge: ansatz inapplicable
            }
            value[y] = Some(vx.clone() * rat_to_big(w) / rat_to_big(&back));
            visited += 1;
            queue.push_back(y);
        }
    }
    if visited != active.len() {
        return None;
    }

    let total: BigRational = active.iter().map(|&x| value[x].clone().unwrap()).sum();
    let weights: Vec<BigRational> = (0..dim)
        .map(|x| {
            value[x]
                .clone()
                .map(|v| v / total.clone())
                .unwrap_or_else(BigRational::zero)
        })
        .collect();
    let pi = Distribution::new_unchecked(weights);
    verify_stationary(m, &pi).then_some(pi)
}

/// `pi * m == pi` with zero residue.
pub fn verify_stationary(m: &SparseMatrix<Rat64>, pi: &Distribution<BigRational>) -> bool {
    let stepped = m.to_big().apply(pi.weights());
    stepped.iter().zip(pi.weights()).all(|(a, b)| a == b)
}

fn eliminate_stationary(
    m: &SparseMatrix<Rat64>,
    active: &[usize],
) -> Result<Distribution<BigRational>> {
    let k = active.len();
    // Solve pi (M - I) = 0 with sum(pi) = 1: columns of (M - I) transposed,
    // last equation replaced by the normalization.
    let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); k + 1]; k];
    let mut pos = vec![usize::MAX; m.dim()];
    for (new, &old) in active.iter().enumerate() {
        pos[old] = new;
    }
    for (xi, &x) in active.iter().enumerate() {
        for (y, w) in m.row(x) {
            let yi = pos[*y as usize];
            a[yi][xi] += rat_to_big(w);
        }
        a[xi][xi] -= BigRational::one();
    }
    for cell in a[k - 1].iter_mut() {
        *cell = BigRational::one();
    }

    // Gaussian elimination with first-nonzero pivoting.
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::ExactSolve("singular stationary system".into()))?;
        a.swap(col, pivot);
        let inv = a[col][col].clone();
        for cell in a[col][col..].iter_mut() {
            *cell = cell.clone() / inv.clone();
        }
        let pivot_row: Vec<BigRational> = a[col][col..].to_vec();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = row[col].clone();
                for (cell, p) in row[col..].iter_mut().zip(&pivot_row) {
                    *cell -= factor.clone() * p.clone();
                }
            }
        }
    }

    let mut weights = vec![BigRational::zero(); m.dim()];
    for (xi, &x) in active.iter().enumerate() {
        if a[xi][k] < BigRational::zero() {
            return Err(Error::ExactSolve("negative stationary weight".into()));
        }
        weights[x] = a[xi][k].clone();
    }
    let pi = Distribution::new_unchecked(weights);
    if !verify_stationary(m, &pi) {
        return Err(Error::ExactSolve(
            "elimination result failed verification".into(),
        ));
    }
    Ok(pi)
}
