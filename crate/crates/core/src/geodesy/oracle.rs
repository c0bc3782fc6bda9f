//! Brute-force shortest paths on a rectangular mesh of the `(r, t)` chart.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{PlanePoint, RadialProfile};
use crate::error::{Error, Result};

/// Mesh over `[r_min, r_max] x [t_min, t_max]` with `n_r x n_t` nodes.
///
/// Edges join each node to the offsets `(di, dj)` with
/// `max(|di|, |dj|) <= stencil` and `gcd(di, dj) = 1`; `stencil = 1` is the
/// 8-neighbor graph. An edge weighs `sqrt(dr^2 + h(r_mid)^2 dt^2)` with `h`
/// taken at the midpoint radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOracle {
    pub r_min: f64,
    pub r_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n_r: usize,
    pub n_t: usize,
    pub stencil: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl GridOracle {
    pub fn new(r_min: f64, r_max: f64, t_max: f64, n_r: usize, n_t: usize) -> Result<Self> {
        let oracle = Self { r_min, r_max, t_min: 0.0, t_max, n_r, n_t, stencil: 1 };
        oracle.validate()?;
        Ok(oracle)
    }

    pub fn with_stencil(mut self, stencil: usize) -> Self {
        self.stencil = stencil.max(1);
        self
    }

    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = t_min;
        self
    }

    /// A square-ish mesh around two points, with radial slack on both sides.
    pub fn enclosing<P: RadialProfile>(profile: &P, a: PlanePoint, b: PlanePoint, n: usize) -> Result<Self> {
        let (lo, hi) = (a.r.min(b.r), a.r.max(b.r));
        let dt = (b.t - a.t).abs();
        let h_max = profile.h(lo).max(profile.h(hi)).max(profile.h(0.0));
        let margin = 0.5 * (hi - lo) + h_max * dt + 1.0;
        let oracle = Self {
            r_min: lo - margin,
            r_max: hi + margin,
            t_min: a.t.min(b.t),
            t_max: a.t.max(b.t),
            n_r: n,
            n_t: n,
            stencil: 2,
        };
        oracle.validate()?;
        Ok(oracle)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_max > self.r_min) || !(self.t_max > self.t_min) || self.n_r < 2 || self.n_t < 2 {
            return Err(Error::InvalidParameter(format!("degenerate oracle mesh {self:?}")));
        }
        if self.n_r.checked_mul(self.n_t).is_none_or(|n| n > u32::MAX as usize) {
            return Err(Error::InvalidParameter("oracle mesh too large".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.n_r * self.n_t
    }

    fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_r - 1) as f64
    }

    fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_t - 1) as f64
    }

    fn snap(&self, p: PlanePoint) -> Result<(usize, usize)> {
        let eps = 1e-9;
        let fr = (p.r - self.r_min) / (self.r_max - self.r_min);
        let ft = (p.t - self.t_min) / (self.t_max - self.t_min);
        if !(-eps..=1.0 + eps).contains(&fr) || !(-eps..=1.0 + eps).contains(&ft) {
            return Err(Error::Domain(format!("point {p:?} lies outside the oracle rectangle")));
        }
        let i = (fr.clamp(0.0, 1.0) * (self.n_r - 1) as f64).round() as usize;
        let j = (ft.clamp(0.0, 1.0) * (self.n_t - 1) as f64).round() as usize;
        Ok((i, j))
    }

    fn offsets(&self) -> Vec<(isize, isize)> {
        let k = self.stencil as isize;
        let mut out = Vec::new();
        for di in -k..=k {
            for dj in -k..=k {
                if (di, dj) != (0, 0) && gcd(di.unsigned_abs(), dj.unsigned_abs()) == 1 {
                    out.push((di, dj));
                }
            }
        }
        out
    }

    /// Shortest-path length between the mesh nodes nearest to `a` and `b`.
    pub fn distance<P: RadialProfile>(&self, profile: &P, a: PlanePoint, b: PlanePoint) -> Result<f64> {
        let (ai, aj) = self.snap(a)?;
        let (bi, bj) = self.snap(b)?;
        if (ai, aj) == (bi, bj) {
            return Ok(0.0);
        }
        let (n_r, n_t) = (self.n_r, self.n_t);
        let (dr, dt) = (self.dr(), self.dt());
        let offsets = self.offsets();
        let k = self.stencil as isize;
        let width = (2 * k + 1) as usize;

        // weights[(i * width + (di + k)) * offsets.len() + o] for offset o from row i
        let mut weights = vec![f64::INFINITY; n_r * width * offsets.len()];
        for i in 0..n_r {
            for (o, &(di, dj)) in offsets.iter().enumerate() {
                let r_mid = self.r_min + (i as f64 + 0.5 * di as f64) * dr;
                let h = profile.h(r_mid);
                let w = ((di as f64 * dr).powi(2) + (h * dj as f64 * dt).powi(2)).sqrt();
                weights[(i * width + (di + k) as usize) * offsets.len() + o] = w;
            }
        }

        let target = (bi * n_t + bj) as u32;
        let mut dist = vec![f64::INFINITY; n_r * n_t];
        let mut heap = BinaryHeap::new();
        let start = (ai * n_t + aj) as u32;
        dist[start as usize] = 0.0;
        heap.push(Entry { dist: 0.0, node: start });

        while let Some(Entry { dist: d, node }) = heap.pop() {
            if node == target {
                return Ok(d);
            }
            if d > dist[node as usize] {
                continue;
            }
            let i = node as usize / n_t;
            let j = node as usize % n_t;
            for (o, &(di, dj)) in offsets.iter().enumerate() {
                let ni = i as isize + di;
                let nj = j as isize + dj;
                if ni < 0 || nj < 0 || ni >= n_r as isize || nj >= n_t as isize {
                    continue;
                }
                let w = weights[(i * width + (di + k) as usize) * offsets.len() + o];
                let next = ni as usize * n_t + nj as usize;
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(Entry { dist: nd, node: next as u32 });
                }
            }
        }
        Err(Error::Solver("oracle target unreachable".into()))
    }
}

pub fn oracle_distance<P: RadialProfile>(
    oracle: &GridOracle,
    profile: &P,
    a: PlanePoint,
    b: PlanePoint,
) -> Result<f64> {
    oracle.distance(profile, a, b)
}
