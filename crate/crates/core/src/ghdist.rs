//! Finite metric spaces and one-sided Gromov-Hausdorff bounds.
//!
//! `d_GH(A, B) <= dis(R) / 2` for any correspondence `R`, and
//! `d_GH(A, B) >= |diam A - diam B| / 2`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric distance matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    n: usize,
    d: Vec<f64>,
    labels: Vec<String>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, the zero diagonal and the triangle inequality, the
    /// latter with slack `1e-9 * max(1, diam)`.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::with_labels(n, d, labels)
    }

    pub fn with_labels(n: usize, d: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("a metric space needs at least one point".into()));
        }
        if d.len() != n * n || labels.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n}x{n} matrix and {n} labels, got {} entries and {} labels",
                d.len(),
                labels.len()
            )));
        }
        let at = |i: usize, j: usize| d[i * n + j];
        for i in 0..n {
            if at(i, i) != 0.0 {
                return Err(Error::Domain(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let x = at(i, j);
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::Domain(format!("entry ({i}, {j}) = {x} is not a finite nonnegative distance")));
                }
                if x != at(j, i) {
                    return Err(Error::Domain(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let diam = d.iter().cloned().fold(0.0, f64::max);
        let slack = 1e-9 * diam.max(1.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if at(i, k) > at(i, j) + at(j, k) + slack {
                        return Err(Error::Domain(format!("triangle inequality fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(Self { n, d, labels })
    }

    /// Builds the space from a distance function on `n` points.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = dist(i, j);
                d[i * n + j] = x;
                d[j * n + i] = x;
            }
        }
        Self::new(n, d)
    }

    /// Points of the real line with the distance `|x - y|`.
    pub fn from_line(points: &[f64]) -> Result<Self> {
        Self::from_fn(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }
}

/// Relation between the points of two spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn identity(n: usize) -> Self {
        Self { pairs: (0..n).map(|i| (i, i)).collect() }
    }

    /// Bijection `i -> perm[i]`.
    pub fn from_permutation(perm: &[usize]) -> Self {
        Self { pairs: perm.iter().enumerate().map(|(i, &j)| (i, j)).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self { pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect() }
    }

    /// Every point of both spaces must appear in some pair.
    pub fn validate(&self, n_a: usize, n_b: usize) -> Result<()> {
        let mut seen_a = vec![false; n_a];
        let mut seen_b = vec![false; n_b];
        for &(i, j) in &self.pairs {
            if i >= n_a || j >= n_b {
                return Err(Error::InvalidParameter(format!("pair ({i}, {j}) out of range")));
            }
            seen_a[i] = true;
            seen_b[j] = true;
        }
        if seen_a.iter().chain(&seen_b).any(|s| !s) {
            return Err(Error::InvalidParameter("correspondence does not cover both spaces".into()));
        }
        Ok(())
    }
}

/// `max |d_A(i, i') - d_B(j, j')|` over pairs of pairs.
pub fn correspondence_distortion(a: &FiniteMetricSpace, b: &FiniteMetricSpace, corr: &Correspondence) -> Result<f64> {
    corr.validate(a.len(), b.len())?;
    let mut worst: f64 = 0.0;
    for (k, &(i, j)) in corr.pairs.iter().enumerate() {
        for &(i2, j2) in &corr.pairs[k + 1..] {
            worst = worst.max((a.dist(i, i2) - b.dist(j, j2)).abs());
        }
    }
    Ok(worst)
}

fn bijection_distortion(a: &FiniteMetricSpace, b: &FiniteMetricSpace, perm: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..perm.len() {
        for i2 in i + 1..perm.len() {
            worst = worst.max((a.dist(i, i2) - b.dist(perm[i], perm[i2])).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Exhaustive,
    LocalSearch,
}

/// `{n_A, n_B, lower, upper, method, seed}` for one comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhReport {
    #[serde(rename = "n_A")]
    pub n_a: usize,
    #[serde(rename = "n_B")]
    pub n_b: usize,
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
    pub seed: u64,
}

/// Largest size searched exhaustively over all bijections.
pub const EXHAUSTIVE_MAX: usize = 8;

/// Half the least distortion over the bijections explored: every bijection
/// for `n <= 8`, otherwise a swap local search from the identity and from
/// random restarts, `budget` moves in total, driven by `seed`.
pub fn gh_upper_bijection(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    budget: usize,
    seed: u64,
) -> Result<(f64, BoundMethod)> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!("size mismatch: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n <= EXHAUSTIVE_MAX {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = bijection_distortion(a, b, &perm);
        // Heap's algorithm
        let mut c = vec![0usize; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                best = best.min(bijection_distortion(a, b, &perm));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        return Ok((0.5 * best, BoundMethod::Exhaustive));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut current = bijection_distortion(a, b, &perm);
    let mut best = current;
    let restart_every = (budget / 8).max(1);
    for step in 0..budget {
        if step > 0 && step % restart_every == 0 {
            perm.shuffle(&mut rng);
            current = bijection_distortion(a, b, &perm);
        }
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        perm.swap(i, j);
        let candidate = bijection_distortion(a, b, &perm);
        if candidate <= current {
            current = candidate;
            best = best.min(current);
        } else {
            perm.swap(i, j);
        }
    }
    Ok((0.5 * best, BoundMethod::LocalSearch))
}

/// `|diam A - diam B| / 2`.
pub fn gh_lower_diam(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> f64 {
    0.5 * (a.diameter() - b.diameter()).abs()
}

pub fn compare(a: &FiniteMetricSpace, b: &FiniteMetricSpace, budget: usize, seed: u64) -> Result<GhReport> {
    let (upper, method) = gh_upper_bijection(a, b, budget, seed)?;
    Ok(GhReport { n_a: a.len(), n_b: b.len(), lower: gh_lower_diam(a, b), upper, method, seed })
}
