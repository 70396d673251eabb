//! K-means clustering over pixel feature vectors.
//!
//! Lloyd iteration: assign every point to its nearest centroid by Euclidean
//! distance, recompute each centroid as the mean of its members, repeat until
//! the largest centroid displacement drops below the tolerance or the
//! iteration cap is reached. Initial centroids are k distinct points sampled
//! uniformly with a seeded [`SplitMix64`](crate::rng::SplitMix64) stream, so
//! a fixed seed reproduces the model bit for bit.

use std::collections::HashSet;

use crate::colorspace::LabImage;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Which Lab planes feed the feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Chroma only (a*, b*); illumination-invariant clustering.
    Ab,
    /// All three planes (L*, a*, b*). The default: region ranking needs L*.
    Lab,
}

/// Row-major n x d matrix of pixel features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(d: usize, values: Vec<f64>) -> Result<FeatureMatrix> {
        if d == 0 || !values.len().is_multiple_of(d) {
            return Err(Error::InvalidShape {
                detail: format!("{} values do not form rows of dimension {d}", values.len()),
            });
        }
        Ok(FeatureMatrix {
            n: values.len() / d,
            d,
            values,
        })
    }

    /// Extract per-pixel features from Lab planes.
    pub fn from_lab(image: &LabImage, mode: FeatureMode) -> FeatureMatrix {
        let n = image.width() as usize * image.height() as usize;
        match mode {
            FeatureMode::Ab => {
                let mut values = Vec::with_capacity(n * 2);
                for i in 0..n {
                    values.push(image.a_plane()[i] as f64);
                    values.push(image.b_plane()[i] as f64);
                }
                FeatureMatrix { n, d: 2, values }
            }
            FeatureMode::Lab => {
                let mut values = Vec::with_capacity(n * 3);
                for i in 0..n {
                    values.push(image.l_plane()[i] as f64);
                    values.push(image.a_plane()[i] as f64);
                    values.push(image.b_plane()[i] as f64);
                }
                FeatureMatrix { n, d: 3, values }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }
}

/// Stopping parameters for the Lloyd iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansOptions {
    /// Iteration cap.
    pub max_iters: usize,
    /// Convergence threshold on the largest centroid displacement.
    pub tol: f64,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        KmeansOptions {
            max_iters: 100,
            tol: 1e-4,
        }
    }
}

/// Converged clustering: centroids, per-point labels and the objective trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub d: usize,
    /// k x d row-major centroid coordinates.
    pub centroids: Vec<f64>,
    /// Nearest-centroid index per point; ties go to the lowest index.
    pub labels: Vec<u32>,
    /// Sum of squared point-to-centroid distances after each assignment.
    pub objective_trace: Vec<f64>,
    /// Number of assign/update rounds executed.
    pub iterations: usize,
    pub seed: u64,
}

impl ClusterModel {
    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.d..(j + 1) * self.d]
    }

    /// Converged objective: the last trace entry.
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace has at least one entry")
    }

    /// Number of points in each cluster.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Euclidean distance between two equal-dimension vectors.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::FeatureDimMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(squared_distance(x, y).sqrt())
}

#[inline]
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let diff = a - b;
        acc += diff * diff;
    }
    acc
}

/// Assign every point to its nearest centroid; ties break to the lowest
/// centroid index.
pub fn assign_labels(points: &FeatureMatrix, centroids: &[f64]) -> Vec<u32> {
    let d = points.dim();
    let k = centroids.len() / d;
    let mut labels = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let row = points.row(i);
        let mut best = 0u32;
        let mut best_d2 = f64::INFINITY;
        for (j, c) in centroids.chunks_exact(d).enumerate().take(k) {
            let d2 = squared_distance(row, c);
            if d2 < best_d2 {
                best_d2 = d2;
                best = j as u32;
            }
        }
        labels.push(best);
    }
    labels
}

/// Recompute each centroid as the mean of its members. An empty cluster is
/// re-seeded to the point lying farthest from its own centroid; with several
/// empty clusters the next-farthest points follow.
pub fn update_centroids(points: &FeatureMatrix, labels: &[u32], k: usize) -> Vec<f64> {
    let d = points.dim();
    let mut sums = vec![0.0f64; k * d];
    let mut counts = vec![0usize; k];
    for (i, &label) in labels.iter().enumerate() {
        let j = label as usize;
        counts[j] += 1;
        let row = points.row(i);
        for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(row) {
            *s += v;
        }
    }
    let mut centroids = sums;
    for j in 0..k {
        if counts[j] > 0 {
            for c in &mut centroids[j * d..(j + 1) * d] {
                *c /= counts[j] as f64;
            }
        }
    }

    let empties: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
    if !empties.is_empty() {
        // Distance of every point to its own (freshly updated) centroid,
        // ranked descending; ties resolve to the lower point index.
        let mut ranked: Vec<(f64, usize)> = (0..points.len())
            .map(|i| {
                let j = labels[i] as usize;
                (squared_distance(points.row(i), &centroids[j * d..(j + 1) * d]), i)
            })
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for (slot, &j) in empties.iter().enumerate() {
            if let Some(&(_, i)) = ranked.get(slot) {
                centroids[j * d..(j + 1) * d].copy_from_slice(points.row(i));
            }
        }
    }
    centroids
}

fn objective(points: &FeatureMatrix, labels: &[u32], centroids: &[f64]) -> f64 {
    let d = points.dim();
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        let j = label as usize;
        total += squared_distance(points.row(i), &centroids[j * d..(j + 1) * d]);
    }
    total
}

fn feature_key(row: &[f64]) -> Vec<u64> {
    row.iter().map(|v| v.to_bits()).collect()
}

/// Count distinct feature rows, stopping once `needed` are found.
fn distinct_at_least(points: &FeatureMatrix, needed: usize) -> usize {
    let mut seen = HashSet::new();
    for i in 0..points.len() {
        seen.insert(feature_key(points.row(i)));
        if seen.len() >= needed {
            return seen.len();
        }
    }
    seen.len()
}

/// Sample k distinct points as initial centroids. Uniform rejection sampling
/// with a bounded attempt budget; the rare exhaustion falls back to a scan in
/// point order, keeping the draw deterministic either way.
fn initial_centroids(points: &FeatureMatrix, k: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let d = points.dim();
    let mut chosen_keys = HashSet::with_capacity(k);
    let mut centroids = Vec::with_capacity(k * d);
    let budget = 10_000 + 100 * k;
    let mut attempts = 0;
    while chosen_keys.len() < k && attempts < budget {
        attempts += 1;
        let i = rng.next_index(points.len());
        let row = points.row(i);
        if chosen_keys.insert(feature_key(row)) {
            centroids.extend_from_slice(row);
        }
    }
    if chosen_keys.len() < k {
        for i in 0..points.len() {
            let row = points.row(i);
            if chosen_keys.insert(feature_key(row)) {
                centroids.extend_from_slice(row);
                if chosen_keys.len() == k {
                    break;
                }
            }
        }
    }
    centroids
}

/// Run Lloyd's algorithm. Requires at least k distinct points; the result is
/// deterministic for a fixed `(points, k, seed, opts)` tuple.
pub fn kmeans(
    points: &FeatureMatrix,
    k: usize,
    seed: u64,
    opts: KmeansOptions,
) -> Result<ClusterModel> {
    if k == 0 || points.is_empty() {
        return Err(Error::InfeasibleK { k, distinct: 0 });
    }
    let distinct = distinct_at_least(points, k);
    if distinct < k {
        return Err(Error::InfeasibleK { k, distinct });
    }

    let mut rng = SplitMix64::new(seed);
    let mut centroids = initial_centroids(points, k, &mut rng);
    let mut trace = Vec::new();
    let mut iterations = 0;

    let labels = loop {
        let labels = assign_labels(points, &centroids);
        trace.push(objective(points, &labels, &centroids));
        if iterations >= opts.max_iters {
            break labels;
        }
        let next = update_centroids(points, &labels, k);
        let mut moved: f64 = 0.0;
        for (c, n) in centroids.chunks_exact(points.dim()).zip(next.chunks_exact(points.dim())) {
            moved = moved.max(squared_distance(c, n).sqrt());
        }
        centroids = next;
        iterations += 1;
        if moved < opts.tol {
            // Settle labels against the final centroids so the model is a
            // fixed point of assignment.
            let labels = assign_labels(points, &centroids);
            trace.push(objective(points, &labels, &centroids));
            break labels;
        }
    };

    Ok(ClusterModel {
        k,
        d: points.dim(),
        centroids,
        labels,
        objective_trace: trace,
        iterations,
        seed,
    })
}
