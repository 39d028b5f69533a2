//! Community-label estimation for the unknown-labels setting.
//!
//! Labels are fit once from the averaged Phase I network by regularized
//! spectral clustering: regularize degrees by the mean degree, form the
//! normalized matrix `D_tau^{-1/2} A D_tau^{-1/2}`, embed nodes with the
//! k eigenvectors of largest-magnitude eigenvalues, row-normalize, and
//! cluster the rows with restarted k-means. The labels are then held
//! fixed through Phase II.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;

const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITERS: usize = 10_000;
const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITERS: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommunityError {
    #[error("phase I graph list is empty")]
    EmptyInput,
    #[error("graphs disagree on node count: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("requested {k} communities for {n} nodes")]
    TooManyCommunities { k: usize, n: usize },
    #[error("label vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Entrywise mean of the adjacency matrices: the average edge weight per
/// node pair over the Phase I snapshots.
pub fn average_graph(phase1: &[Graph]) -> Result<DMatrix<f64>, CommunityError> {
    let first = phase1.first().ok_or(CommunityError::EmptyInput)?;
    let n = first.node_count();
    let mut avg = DMatrix::zeros(n, n);
    for g in phase1 {
        if g.node_count() != n {
            return Err(CommunityError::SizeMismatch(n, g.node_count()));
        }
        for i in 0..n {
            for j in 0..n {
                avg[(i, j)] += g.get(i, j) as f64;
            }
        }
    }
    avg /= phase1.len() as f64;
    Ok(avg)
}

/// Regularized spectral clustering of an averaged network into `k`
/// communities. Deterministic given the rng state (which drives the
/// power-iteration starts and the k-means restarts). Output labels are
/// 0..k, relabeled canonically so that communities appear in order of
/// their smallest member index.
pub fn regularized_spectral<R: Rng + ?Sized>(
    avg: &DMatrix<f64>,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>, CommunityError> {
    let n = avg.nrows();
    if k > n {
        return Err(CommunityError::TooManyCommunities { k, n });
    }
    if k <= 1 {
        return Ok(vec![0; n]);
    }

    let degrees: Vec<f64> = (0..n).map(|i| avg.row(i).sum()).collect();
    let tau = degrees.iter().sum::<f64>() / n as f64;
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&d| {
            let dt = d + tau;
            if dt > 0.0 {
                1.0 / dt.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l_tau = avg.clone();
    for i in 0..n {
        for j in 0..n {
            l_tau[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }

    let vectors = leading_eigenvectors(&l_tau, k, rng);

    // Row-normalized spectral embedding; all-zero rows stay zero.
    let mut rows = vec![vec![0.0f64; k]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (c, v) in vectors.iter().enumerate() {
            row[c] = v[i];
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in row.iter_mut() {
                *x /= norm;
            }
        }
    }

    let assignment = kmeans(&rows, k, rng);
    Ok(canonical_relabel(&assignment, k))
}

/// The `k` eigenvectors of largest-magnitude eigenvalues of a symmetric
/// matrix, by power iteration with deflation.
fn leading_eigenvectors<R: Rng + ?Sized>(
    matrix: &DMatrix<f64>,
    k: usize,
    rng: &mut R,
) -> Vec<DVector<f64>> {
    let n = matrix.nrows();
    let mut deflated = matrix.clone();
    let mut vectors: Vec<DVector<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
        // Stay orthogonal to the eigenvectors already found.
        orthogonalize(&mut v, &vectors);
        if !normalize(&mut v) {
            v = fallback_direction(n, &vectors);
        }
        for _ in 0..EIGEN_MAX_ITERS {
            let mut next = &deflated * &v;
            orthogonalize(&mut next, &vectors);
            if !normalize(&mut next) {
                // The remaining spectrum is (numerically) zero; any unit
                // vector orthogonal to the found ones is an eigenvector.
                break;
            }
            let sign = if v.dot(&next) < 0.0 { -1.0 } else { 1.0 };
            let diff = (&v - &next * sign).norm();
            v = next;
            if diff < EIGEN_TOL {
                break;
            }
        }
        let lambda = v.dot(&(&deflated * &v));
        // Deflate: remove the found component from the operator.
        deflated.ger(-lambda, &v, &v, 1.0);
        vectors.push(v);
    }
    vectors
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let proj = v.dot(b);
        v.axpy(-proj, b, 1.0);
    }
}

fn normalize(v: &mut DVector<f64>) -> bool {
    let norm = v.norm();
    if norm < 1e-12 {
        return false;
    }
    *v /= norm;
    true
}

/// Deterministic unit vector orthogonal to `basis` (used when a random
/// start degenerates, e.g. on an all-zero matrix).
fn fallback_direction(n: usize, basis: &[DVector<f64>]) -> DVector<f64> {
    for axis in 0..n {
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        orthogonalize(&mut v, basis);
        if normalize(&mut v) {
            return v;
        }
    }
    DVector::zeros(n)
}

/// Lloyd's k-means with restarts; returns the assignment with the lowest
/// within-cluster sum of squares. Empty clusters are repaired by seeding
/// them with the point farthest from its current centroid.
fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    let dim = points[0].len();
    let mut best: Option<(f64, Vec<usize>)> = None;

    for _ in 0..KMEANS_RESTARTS {
        // Forgy init: k distinct points.
        let mut indices: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            indices.swap(i, j);
        }
        let mut centroids: Vec<Vec<f64>> = indices[..k].iter().map(|&i| points[i].clone()).collect();
        let mut assignment = vec![0usize; n];

        for _ in 0..KMEANS_MAX_ITERS {
            let mut changed = false;
            for (p, slot) in points.iter().zip(assignment.iter_mut()) {
                let nearest = (0..k)
                    .min_by(|&a, &b| {
                        dist2(p, &centroids[a])
                            .partial_cmp(&dist2(p, &centroids[b]))
                            .unwrap()
                    })
                    .unwrap();
                if nearest != *slot {
                    *slot = nearest;
                    changed = true;
                }
            }

            let mut counts = vec![0usize; k];
            let mut sums = vec![vec![0.0f64; dim]; k];
            for (p, &c) in points.iter().zip(&assignment) {
                counts[c] += 1;
                for (s, &x) in sums[c].iter_mut().zip(p) {
                    *s += x;
                }
            }
            for c in 0..k {
                if counts[c] == 0 {
                    // Repair: move the point farthest from its centroid.
                    let far = (0..n)
                        .max_by(|&a, &b| {
                            dist2(&points[a], &centroids[assignment[a]])
                                .partial_cmp(&dist2(&points[b], &centroids[assignment[b]]))
                                .unwrap()
                        })
                        .unwrap();
                    assignment[far] = c;
                    centroids[c] = points[far].clone();
                    changed = true;
                } else {
                    for (slot, s) in centroids[c].iter_mut().zip(&sums[c]) {
                        *slot = s / counts[c] as f64;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let wcss: f64 = points
            .iter()
            .zip(&assignment)
            .map(|(p, &c)| dist2(p, &centroids[c]))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| wcss < *b) {
            best = Some((wcss, assignment));
        }
    }
    best.unwrap().1
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Renumber clusters by order of first appearance, so the community
/// containing the smallest node index is 0.
fn canonical_relabel(assignment: &[usize], k: usize) -> Vec<usize> {
    let mut rename = vec![usize::MAX; k];
    let mut next = 0;
    let mut out = Vec::with_capacity(assignment.len());
    for &c in assignment {
        if rename[c] == usize::MAX {
            rename[c] = next;
            next += 1;
        }
        out.push(rename[c]);
    }
    out
}

/// Largest fraction of agreeing nodes over all permutations of the
/// estimated labels.
pub fn label_accuracy(est: &[usize], truth: &[usize]) -> Result<f64, CommunityError> {
    if est.len() != truth.len() {
        return Err(CommunityError::LengthMismatch(est.len(), truth.len()));
    }
    if est.is_empty() {
        return Ok(1.0);
    }
    let k = est
        .iter()
        .chain(truth)
        .max()
        .map_or(1, |&m| m + 1);
    // Confusion counts, then the best permutation by exhaustive search
    // (k is small in this study).
    let mut confusion = vec![vec![0usize; k]; k];
    for (&e, &t) in est.iter().zip(truth) {
        confusion[e][t] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute_and_score(&mut perm, 0, &confusion, &mut best);
    Ok(best as f64 / est.len() as f64)
}

fn permute_and_score(
    perm: &mut Vec<usize>,
    depth: usize,
    confusion: &[Vec<usize>],
    best: &mut usize,
) {
    if depth == perm.len() {
        let score: usize = perm.iter().enumerate().map(|(e, &t)| confusion[e][t]).sum();
        *best = (*best).max(score);
        return;
    }
    for i in depth..perm.len() {
        perm.swap(depth, i);
        permute_and_score(perm, depth + 1, confusion, best);
        perm.swap(depth, i);
    }
}
