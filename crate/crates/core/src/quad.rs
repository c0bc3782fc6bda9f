//! Globally adaptive Gauss-Kronrod (7/15) quadrature for vector-valued
//! integrands. Intervals are bisected in order of largest error estimate
//! until the summed estimate meets the tolerance of every component.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-300, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn kronrod<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = [0.0; N];
    let mut kron = [0.0; N];
    for k in 0..N {
        gauss[k] = fc[k] * WG[3];
        kron[k] = fc[k] * WGK[7];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        value[k] = kron[k] * half;
        error[k] = ((kron[k] - gauss[k]) * half).abs();
    }
    (value, error)
}

fn sum_arrays<const N: usize>(xs: impl Iterator<Item = [f64; N]>) -> [f64; N] {
    let mut out = [0.0; N];
    for x in xs {
        for k in 0..N {
            out[k] += x[k];
        }
    }
    out
}

/// Integrate a vector-valued `f` over `[a, b]`.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if a == b {
        return Ok(QuadResult { value: [0.0; N], error: [0.0; N], intervals: 0 });
    }
    let tolerance = |value: &[f64; N], k: usize| opts.abs_tol.max(opts.rel_tol * value[k].abs());
    let priority = |value: &[f64; N], error: &[f64; N]| {
        (0..N).map(|k| error[k] / opts.abs_tol.max(opts.rel_tol * value[k].abs())).fold(0.0, f64::max)
    };

    let (value, error) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error, priority: priority(&value, &error) });

    loop {
        let total = sum_arrays(heap.iter().map(|s| s.value));
        let err = sum_arrays(heap.iter().map(|s| s.error));
        let converged = (0..N).all(|k| err[k] <= tolerance(&total, k));
        if converged {
            return Ok(QuadResult { value: total, error: err, intervals: heap.len() });
        }
        if heap.len() >= opts.max_intervals {
            let worst = (0..N).map(|k| err[k] / tolerance(&total, k)).fold(0.0, f64::max);
            // accept near-misses caused by roundoff in the error estimate
            if worst < 100.0 {
                return Ok(QuadResult { value: total, error: err, intervals: heap.len() });
            }
            return Err(Error::Quadrature {
                a,
                b,
                error: err.iter().cloned().fold(0.0, f64::max),
                intervals: heap.len(),
            });
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval at machine resolution; keep it as is
            heap.push(Segment { priority: 0.0, ..seg });
            if heap.iter().all(|s| s.priority == 0.0) {
                let total = sum_arrays(heap.iter().map(|s| s.value));
                let err = sum_arrays(heap.iter().map(|s| s.error));
                return Ok(QuadResult { value: total, error: err, intervals: heap.len() });
            }
            continue;
        }
        let (lv, le) = kronrod(&f, seg.a, mid);
        let (rv, re) = kronrod(&f, mid, seg.b);
        // Priorities compare local error with the tolerance of the running total.
        let total_scale = {
            let mut t = total;
            for k in 0..N {
                t[k] = t[k] - seg.value[k] + lv[k] + rv[k];
            }
            t
        };
        heap.push(Segment { a: seg.a, b: mid, value: lv, error: le, priority: priority(&total_scale, &le) });
        heap.push(Segment { a: mid, b: seg.b, value: rv, error: re, priority: priority(&total_scale, &re) });
    }
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| [f(x)], a, b, opts).map(|r| r.value[0])
}
