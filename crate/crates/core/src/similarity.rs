//! Lecture similarity from a user-selected phrase set.
//!
//! Each lecture is reduced to the set of selected phrases it contains.
//! Dice distances between those sets feed classical (Torgerson) MDS, and
//! the resulting 2D layout is linked by distance thresholds.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::indexer::OccurrenceTable;
use crate::{Error, Result, Scalar};

/// `(a, b, c)`: phrases in both sets, only in `i`, only in `j`.
pub fn dice_counts(i: &BTreeSet<usize>, j: &BTreeSet<usize>) -> (usize, usize, usize) {
    let a = i.intersection(j).count();
    (a, i.len() - a, j.len() - a)
}

/// `(b + c) / (2a + b + c)`; 0 when neither set has any phrase.
pub fn dice_distance<T: Scalar>(i: &BTreeSet<usize>, j: &BTreeSet<usize>) -> T {
    let (a, b, c) = dice_counts(i, j);
    dice_from_counts(a, b, c)
}

fn dice_from_counts<T: Scalar>(a: usize, b: usize, c: usize) -> T {
    let denom = 2 * a + b + c;
    if denom == 0 {
        return T::zero();
    }
    T::from_count((b + c) as u64) / T::from_count(denom as u64)
}

/// Per-transcript set of selected phrases with at least `min_count`
/// occurrences.
pub fn memberships(table: &OccurrenceTable, selection: &[usize], min_count: usize) -> Vec<BTreeSet<usize>> {
    let min_count = min_count.max(1);
    (0..table.n_transcripts())
        .map(|t| {
            selection
                .iter()
                .copied()
                .filter(|&p| table.count(p, t) >= min_count)
                .collect()
        })
        .collect()
}

/// Symmetric matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix<T> {
    n: usize,
    values: Vec<T>,
    /// Dice `(a, b, c)` per cell when built from memberships.
    counts: Option<Vec<(usize, usize, usize)>>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Wraps raw distances. Rejects asymmetric, negative or non-finite
    /// entries and non-zero diagonals.
    pub fn from_values(n: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Param(format!("expected {} distances, got {}", n * n, values.len())));
        }
        for i in 0..n {
            if !values[i * n + i].is_zero() {
                return Err(Error::Param(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < T::zero() || v != values[j * n + i] {
                    return Err(Error::Param(format!("invalid distance at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values, counts: None })
    }

    pub fn from_memberships(sets: &[BTreeSet<usize>]) -> Self {
        let n = sets.len();
        let mut values = vec![T::zero(); n * n];
        let mut counts = vec![(0, 0, 0); n * n];
        for i in 0..n {
            for j in 0..n {
                let abc = dice_counts(&sets[i], &sets[j]);
                counts[i * n + j] = abc;
                if i != j {
                    values[i * n + j] = dice_from_counts(abc.0, abc.1, abc.2);
                }
            }
        }
        Self { n, values, counts: Some(counts) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn counts(&self, i: usize, j: usize) -> Option<(usize, usize, usize)> {
        self.counts.as_ref().map(|c| c[i * self.n + j])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.n.max(1))
    }
}

/// Dice distances between every pair of transcripts over `selection`.
pub fn distance_matrix<T: Scalar>(selection: &[usize], table: &OccurrenceTable, min_count: usize) -> Result<DistanceMatrix<T>> {
    if selection.is_empty() {
        return Err(Error::EmptySelection);
    }
    if table.n_transcripts() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: table.n_transcripts() });
    }
    let sets = memberships(table, selection, min_count);
    if sets.iter().all(BTreeSet::is_empty) {
        tracing::warn!("no selected phrase occurs in any transcript; all distances are 0");
    }
    Ok(DistanceMatrix::from_memberships(&sets))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D<T> {
    pub points: Vec<[T; 2]>,
    /// Kruskal-style normalized residual between input and embedded
    /// distances.
    pub stress: T,
    /// The two eigenvalues used, after clamping negatives to zero.
    pub eigenvalues: [T; 2],
}

impl<T: Scalar> Embedding2D<T> {
    pub fn distance(&self, i: usize, j: usize) -> T {
        let [xi, yi] = self.points[i];
        let [xj, yj] = self.points[j];
        (xi - xj).hypot(yi - yj)
    }
}

/// Classical MDS into two dimensions.
///
/// Squares the distances, double-centers (`B = -½ J D² J`), keeps the two
/// largest eigenpairs with negative eigenvalues clamped to zero and scales
/// each eigenvector by the root of its eigenvalue. The output is centered
/// and each axis is signed so its largest-magnitude coordinate is positive.
pub fn mds_embed<T: Scalar>(d: &DistanceMatrix<T>) -> Result<Embedding2D<T>> {
    let n = d.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let nf = T::from_count(n as u64);
    let sq: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| d.get(i, j).powi(2)).collect()).collect();
    let row_mean: Vec<T> = sq.iter().map(|r| r.iter().copied().sum::<T>() / nf).collect();
    let grand = row_mean.iter().copied().sum::<T>() / nf;
    let half = T::lit(0.5);
    let b: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| -half * (sq[i][j] - row_mean[i] - row_mean[j] + grand)).collect())
        .collect();

    let (vals, vecs) = symmetric_eigen(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

    let mut points = vec![[T::zero(); 2]; n];
    let mut eigenvalues = [T::zero(); 2];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = vals[k].max(T::zero());
        eigenvalues[axis] = lambda;
        let scale = lambda.sqrt();
        for (i, p) in points.iter_mut().enumerate() {
            p[axis] = vecs[i][k] * scale;
        }
    }
    canonicalize(&mut points);

    let mut num = T::zero();
    let mut den = T::zero();
    let mut emb = Embedding2D { points, stress: T::zero(), eigenvalues };
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            let diff = dij - emb.distance(i, j);
            num = num + diff * diff;
            den = den + dij * dij;
        }
    }
    emb.stress = if den.is_zero() { T::zero() } else { (num / den).sqrt() };
    Ok(emb)
}

fn canonicalize<T: Scalar>(points: &mut [[T; 2]]) {
    let nf = T::from_count(points.len() as u64);
    for axis in 0..2 {
        let mean = points.iter().map(|p| p[axis]).sum::<T>() / nf;
        for p in points.iter_mut() {
            p[axis] = p[axis] - mean;
        }
        let max_abs = points.iter().map(|p| p[axis].abs()).fold(T::zero(), T::max);
        if max_abs.is_zero() {
            // -0.0 would serialize differently from 0.0
            for p in points.iter_mut() {
                p[axis] = T::zero();
            }
            continue;
        }
        let tol = max_abs * T::lit(1e-9);
        let pivot = points.iter().find(|p| p[axis].abs() >= max_abs - tol).map(|p| p[axis]);
        if pivot.is_some_and(|v| v < T::zero()) {
            for p in points.iter_mut() {
                p[axis] = -p[axis];
            }
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and the eigenvectors as columns of the second matrix.
pub fn symmetric_eigen<T: Scalar>(mut a: Vec<Vec<T>>) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let norm: T = a.iter().flatten().map(|x| *x * *x).sum::<T>();
    let eps = T::epsilon() * T::epsilon() * norm;

    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off <= eps || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.is_zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * apq);
                let t = if (theta * theta).is_infinite() {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                let (rp, rq) = if p < q {
                    let (lo, hi) = a.split_at_mut(q);
                    (&mut lo[p], &mut hi[0])
                } else {
                    let (lo, hi) = a.split_at_mut(p);
                    (&mut hi[0], &mut lo[q])
                };
                for (pk, qk) in rp.iter_mut().zip(rq.iter_mut()) {
                    let (x, y) = (*pk, *qk);
                    *pk = c * x - s * y;
                    *qk = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStrength {
    Strong,
    Weak,
    None,
}

pub fn link_strength<T: Scalar>(d: T, t_strong: T, t_weak: T) -> LinkStrength {
    if d <= t_strong {
        LinkStrength::Strong
    } else if d <= t_weak {
        LinkStrength::Weak
    } else {
        LinkStrength::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode<T> {
    pub lecture: u32,
    pub x: T,
    pub y: T,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge<T> {
    /// Lecture numbers.
    pub i: u32,
    pub j: u32,
    pub d: T,
    pub strength: LinkStrength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGraph<T> {
    pub nodes: Vec<GraphNode<T>>,
    pub edges: Vec<GraphEdge<T>>,
    pub stress: T,
}

/// Nodes at the embedded positions; edges for every pair that is at least
/// weakly linked.
pub fn build_graph<T: Scalar>(
    embedding: &Embedding2D<T>,
    d: &DistanceMatrix<T>,
    lecture_ids: &[u32],
    t_strong: T,
    t_weak: T,
) -> Result<SimilarityGraph<T>> {
    if t_strong > t_weak {
        return Err(Error::Thresholds {
            strong: t_strong.to_f64().unwrap_or(f64::NAN),
            weak: t_weak.to_f64().unwrap_or(f64::NAN),
        });
    }
    let nodes = embedding
        .points
        .iter()
        .zip(lecture_ids)
        .map(|(p, &lecture)| GraphNode {
            lecture,
            x: p[0],
            y: p[1],
            label: lecture.to_string(),
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let dist = d.get(i, j);
            let strength = link_strength(dist, t_strong, t_weak);
            if strength != LinkStrength::None {
                edges.push(GraphEdge {
                    i: lecture_ids[i],
                    j: lecture_ids[j],
                    d: dist,
                    strength,
                });
            }
        }
    }
    Ok(SimilarityGraph {
        nodes,
        edges,
        stress: embedding.stress,
    })
}
