//! Spectra of reversible chains.
//!
//! A reversible chain with stationary state pi is conjugate to the symmetric
//! matrix A = D^(1/2) M D^(-1/2), D = diag(pi), over the states where pi is
//! positive. The full decomposition (dense solve) is used at small sizes;
//! a deflated Lanczos iteration extracts the second-largest eigenvalue (and
//! hence the spectral gap) at sizes where a dense solve is unreasonable.

use crate::error::{Error, Result};
use crate::matrix::{format_scalar, Distribution, Rat64, Scalar, SparseMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues (descending) and eigenfunctions of a reversible chain on its
/// active states, orthonormal in the stationary inner product:
/// `sum_x pi(x) f_i(x) f_j(x) = delta_ij`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[j][k]` is f_j at the k-th active state.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Active state indices, increasing.
    pub active: Vec<usize>,
    /// Stationary weights aligned with `active`.
    pub stationary: Vec<f64>,
}

impl SpectralDecomposition {
    /// Spectral gap 1 - lambda_2.
    pub fn gap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            1.0
        } else {
            1.0 - self.eigenvalues[1]
        }
    }

    /// t-step transition probability rebuilt from the decomposition:
    /// `m^t(x, y) = pi(y) sum_j f_j(x) f_j(y) lambda_j^t`
    /// with x, y positions into `active`.
    pub fn reconstruct_entry(&self, t: u32, x: usize, y: usize) -> f64 {
        let mut acc = 0.0;
        for (lambda, f) in self.eigenvalues.iter().zip(&self.eigenfunctions) {
            acc += f[x] * f[y] * lambda.powi(t as i32);
        }
        self.stationary[y] * acc
    }
}

/// Detailed balance `pi(x) m(x,y) = pi(y) m(y,x)`, exact for exact scalars,
/// within `float_tol` for floats. On failure reports the worst-offending pair.
pub fn check_detailed_balance<T: Scalar>(
    m: &SparseMatrix<T>,
    pi: &Distribution<T>,
    float_tol: f64,
) -> Result<()> {
    if pi.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: pi.dim(),
        });
    }
    let exact = T::tolerance().is_none();
    let mut worst: Option<(usize, usize, T, T, f64)> = None;
    for x in 0..m.dim() {
        for (y, w) in m.row(x) {
            let y = *y as usize;
            if y < x {
                continue; // each unordered pair once
            }
            let lhs = pi.get(x).clone() * w.clone();
            let rhs = pi.get(y).clone() * m.get(y, x);
            let gap = (lhs.clone() - rhs.clone()).abs().to_f64();
            let bad = if exact { lhs != rhs } else { gap > float_tol };
            if bad && worst.as_ref().is_none_or(|(.., g)| gap > *g) {
                worst = Some((x, y, lhs, rhs, gap));
            }
        }
    }
    match worst {
        None => Ok(()),
        Some((x, y, lhs, rhs, _)) => Err(Error::DetailedBalance {
            x,
            y,
            lhs: format_scalar(&lhs),
            rhs: format_scalar(&rhs),
        }),
    }
}

fn active_states(pi: &Distribution<f64>, excluded: &[usize]) -> Vec<usize> {
    let mut is_excluded = vec![false; pi.dim()];
    for &e in excluded {
        is_excluded[e] = true;
    }
    (0..pi.dim())
        .filter(|&x| !is_excluded[x] && *pi.get(x) > 0.0)
        .collect()
}

/// Full dense spectrum of a reversible chain via symmetrization. Detailed
/// balance is verified (tolerance 1e-10) before solving.
pub fn spectrum_reversible(
    m: &SparseMatrix<f64>,
    pi: &Distribution<f64>,
    excluded: &[usize],
) -> Result<SpectralDecomposition> {
    check_detailed_balance(m, pi, 1e-10)?;
    let active = active_states(pi, excluded);
    let k = active.len();
    if k == 0 {
        return Err(Error::InvalidParameter("no active states".into()));
    }
    let stationary: Vec<f64> = active.iter().map(|&x| *pi.get(x)).collect();
    let sqrt_pi: Vec<f64> = stationary.iter().map(|p| p.sqrt()).collect();
    let mut pos = vec![usize::MAX; m.dim()];
    for (i, &x) in active.iter().enumerate() {
        pos[x] = i;
    }

    let mut a = DMatrix::<f64>::zeros(k, k);
    for (i, &x) in active.iter().enumerate() {
        for (y, w) in m.row(x) {
            let j = pos[*y as usize];
            if j != usize::MAX {
                a[(i, j)] = sqrt_pi[i] * w / sqrt_pi[j];
            }
        }
    }
    // Force exact symmetry before the solver sees it.
    for i in 0..k {
        for j in i + 1..k {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }

    let eigen = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        eigen.eigenvalues[j]
            .partial_cmp(&eigen.eigenvalues[i])
            .unwrap()
    });

    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    for &idx in &order {
        let lambda = eigen.eigenvalues[idx];
        if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&lambda) {
            return Err(Error::Eigensolver(format!(
                "eigenvalue {lambda} outside [-1, 1]"
            )));
        }
        eigenvalues.push(lambda);
        let col = eigen.eigenvectors.column(idx);
        eigenfunctions.push((0..k).map(|i| col[i] / sqrt_pi[i]).collect());
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenfunctions,
        active,
        stationary,
    })
}

/// Second-largest eigenvalue of a reversible chain by Lanczos iteration on
/// the symmetrized operator, with the known top eigenvector sqrt(pi)
/// deflated exactly. Returns (lambda_2, gap).
pub fn spectral_gap_lanczos(
    m: &SparseMatrix<f64>,
    pi: &Distribution<f64>,
    excluded: &[usize],
    steps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_detailed_balance(m, pi, 1e-10)?;
    let active = active_states(pi, excluded);
    let k = active.len();
    if k < 2 {
        return Ok((0.0, 1.0));
    }
    let sqrt_pi: Vec<f64> = active.iter().map(|&x| pi.get(x).sqrt()).collect();
    let mut pos = vec![usize::MAX; m.dim()];
    for (i, &x) in active.iter().enumerate() {
        pos[x] = i;
    }

    // (A v)(j) with A = D^(1/2) M D^(-1/2): accumulate row-wise using the
    // symmetry of A, out[j] = sum_i v(i) A(i, j).
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; k];
        for (i, &x) in active.iter().enumerate() {
            let scale = v[i] * sqrt_pi[i];
            if scale == 0.0 {
                continue;
            }
            for (y, w) in m.row(x) {
                let j = pos[*y as usize];
                if j != usize::MAX {
                    out[j] += scale * w / sqrt_pi[j];
                }
            }
        }
        out
    };

    let top: DVector<f64> = DVector::from_iterator(k, sqrt_pi.iter().copied());
    let top = &top / top.norm();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_iterator(k, (0..k).map(|_| rng.random::<f64>() - 0.5));
    v -= &top * top.dot(&v);
    let norm = v.norm();
    if norm < 1e-12 {
        return Err(Error::Eigensolver("degenerate Lanczos start".into()));
    }
    v /= norm;

    let steps = steps.min(k - 1).max(2);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::new();
    basis.push(v);

    for step in 0..steps {
        let mut w = DVector::from_vec(apply(basis[step].as_slice()));
        // Exact deflation of the known top eigenvector plus full
        // reorthogonalization against the Krylov basis.
        w -= &top * top.dot(&w);
        let alpha = basis[step].dot(&w);
        alphas.push(alpha);
        w -= &basis[step] * alpha;
        if step > 0 {
            w -= &basis[step - 1] * betas[step - 1];
        }
        for b in &basis {
            let overlap = b.dot(&w);
            w -= b * overlap;
        }
        w -= &top * top.dot(&w);
        let beta = w.norm();
        if beta < 1e-13 || step + 1 == steps {
            break;
        }
        betas.push(beta);
        basis.push(w / beta);
    }

    let t = alphas.len();
    let mut tri = DMatrix::<f64>::zeros(t, t);
    for i in 0..t {
        tri[(i, i)] = alphas[i];
        if i + 1 < t {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let ritz = tri.symmetric_eigen().eigenvalues;
    let lambda2 = ritz.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(-1.0 - 1e-8..=1.0 + 1e-8).contains(&lambda2) {
        return Err(Error::Eigensolver(format!(
            "Ritz value {lambda2} outside [-1, 1]"
        )));
    }
    Ok((lambda2, 1.0 - lambda2))
}

/// Exact detailed-balance check for rational chains.
pub fn check_detailed_balance_exact(
    m: &SparseMatrix<Rat64>,
    pi: &Distribution<num_rational::BigRational>,
) -> Result<()> {
    let big = m.to_big();
    check_detailed_balance(&big, pi, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{build_p, build_q, stationary_f64, ChainKind};
    use crate::matrix::tv_slices;

    #[test]
    fn identity_spectrum() {
        let id = SparseMatrix::<f64>::identity(4);
        let pi = Distribution::new(vec![0.25; 4]).unwrap();
        let dec = spectrum_reversible(&id, &pi, &[]).unwrap();
        assert!(dec.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert_eq!(dec.gap(), 0.0);
    }

    #[test]
    fn p2_active_block_is_rank_one() {
        // Every active row of P(2) equals the stationary state, so the
        // spectrum is {1, 0 x 14} and the gap is 1.
        let p = build_p(2).unwrap();
        let pi = stationary_f64(ChainKind::P, 2).unwrap();
        let dec = spectrum_reversible(&p.float(), &pi, &[0]).unwrap();
        assert!((dec.eigenvalues[0] - 1.0).abs() < 1e-10);
        for &l in &dec.eigenvalues[1..] {
            assert!(l.abs() < 1e-10);
        }
        assert!((dec.gap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn q_spectrum_embeds_in_p_spectrum() {
        // Lifting sends each eigenfunction of the projected chain to one of
        // the full chain with the same eigenvalue, so the nonzero spectrum of
        // Q embeds in that of P with multiplicity. The converse fails: P has
        // value-odd eigenfunctions that project to zero, e.g. with eigenvalue
        // (n-2)/n, so the two nonzero spectra are not equal as multisets.
        // The top of the spectrum is unaffected: the gaps agree.
        for n in 2..=4usize {
            let p = build_p(n).unwrap();
            let q = build_q(n).unwrap();
            let pi = stationary_f64(ChainKind::P, n).unwrap();
            let nu = stationary_f64(ChainKind::Q, n).unwrap();
            let dp = spectrum_reversible(&p.float(), &pi, &[0]).unwrap();
            let dq = spectrum_reversible(&q.float(), &nu, &[0]).unwrap();
            let mut remaining: Vec<f64> = dp
                .eigenvalues
                .iter()
                .copied()
                .filter(|l| l.abs() > 1e-8)
                .collect();
            for lq in dq.eigenvalues.iter().filter(|l| l.abs() > 1e-8) {
                let hit = remaining
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| (*a - lq).abs().partial_cmp(&(*b - lq).abs()).unwrap())
                    .map(|(i, _)| i)
                    .unwrap();
                assert!(
                    (remaining[hit] - lq).abs() < 1e-8,
                    "Q eigenvalue {lq} missing from P spectrum at n = {n}"
                );
                remaining.swap_remove(hit);
            }
            if n >= 3 {
                // The value-odd mode at (n-2)/n is orthogonal to every
                // lifted eigenfunction, so it survives in the leftover
                // multiset after Q's copies are consumed.
                let odd = (n as f64 - 2.0) / n as f64;
                assert!(remaining.iter().any(|l| (l - odd).abs() < 1e-8));
            }
            assert!((dp.gap() - dq.gap()).abs() < 1e-9, "gaps differ at n = {n}");
        }
    }

    #[test]
    fn orthonormal_in_stationary_inner_product() {
        let q = build_q(3).unwrap();
        let nu = stationary_f64(ChainKind::Q, 3).unwrap();
        let dec = spectrum_reversible(&q.float(), &nu, &[0]).unwrap();
        let k = dec.active.len();
        for i in 0..k {
            for j in 0..k {
                let dot: f64 = (0..k)
                    .map(|x| {
                        dec.stationary[x] * dec.eigenfunctions[i][x] * dec.eigenfunctions[j][x]
                    })
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn detailed_balance_rejection() {
        // Biased lazy 3-cycle: uniform stationary but not reversible.
        let m = SparseMatrix::stochastic(
            3,
            vec![
                vec![(0, 0.5), (1, 0.5)],
                vec![(1, 0.5), (2, 0.5)],
                vec![(0, 0.5), (2, 0.5)],
            ],
        )
        .unwrap();
        let pi = Distribution::new(vec![1.0 / 3.0; 3]).unwrap();
        let err = spectrum_reversible(&m, &pi, &[]).unwrap_err();
        assert!(matches!(err, Error::DetailedBalance { .. }));
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        for n in 3..=8 {
            let q = build_q(n).unwrap();
            let nu = stationary_f64(ChainKind::Q, n).unwrap();
            let dense = spectrum_reversible(&q.float(), &nu, &[0]).unwrap();
            let (lambda2, gap) = spectral_gap_lanczos(&q.float(), &nu, &[0], 220, 11).unwrap();
            assert!(
                (lambda2 - dense.eigenvalues[1]).abs() < 1e-9,
                "n = {n}: lanczos {lambda2} vs dense {}",
                dense.eigenvalues[1]
            );
            assert!((gap - dense.gap()).abs() < 1e-9);
        }
    }

    #[test]
    fn reconstruction_matches_matrix_power() {
        // m^t(x, y) = pi(y) sum_j f_j(x) f_j(y) lambda_j^t for t in {1, 2, 5}.
        let q = build_q(3).unwrap();
        let nu = stationary_f64(ChainKind::Q, 3).unwrap();
        let dec = spectrum_reversible(&q.float(), &nu, &[0]).unwrap();
        let mf = q.float();
        for t in [1u32, 2, 5] {
            for (xi, &x) in dec.active.iter().enumerate() {
                let mut row = vec![0.0; mf.dim()];
                row[x] = 1.0;
                for _ in 0..t {
                    row = mf.apply(&row);
                }
                let rebuilt: Vec<f64> = (0..dec.active.len())
                    .map(|yi| dec.reconstruct_entry(t, xi, yi))
                    .collect();
                let direct: Vec<f64> = dec.active.iter().map(|&y| row[y]).collect();
                assert!(tv_slices(&rebuilt, &direct) < 1e-8);
            }
        }
    }
}
