//! Dormand-Prince 5(4) embedded Runge-Kutta step with error estimate.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// 5th minus 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One step of size `h` from `(x, y)`. Returns the 5th-order solution and a
/// componentwise local error estimate.
pub fn dopri5_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(x, y);
    let k2 = f(x + C2 * h, &axpy(y, &[(A21, &k1)], h));
    let k3 = f(x + C3 * h, &axpy(y, &[(A31, &k1), (A32, &k2)], h));
    let k4 = f(x + C4 * h, &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(x + C5 * h, &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(x + h, &axpy(y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
    let y5 = axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = f(x + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = (h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])).abs();
    }
    (y5, err)
}

/// Scaled RMS error norm used for step acceptance.
pub fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], atol: f64, rtol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [1.0, 0.0];
        let n = 2000;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        for i in 0..n {
            let (y1, _) = dopri5_step(&f, i as f64 * h, &y, h);
            y = y1;
        }
        assert!((y[0] - 1.0).abs() < 1e-12);
        assert!(y[1].abs() < 1e-12);
    }

    #[test]
    fn error_estimate_scales_with_fifth_power() {
        let f = |x: f64, _y: &[f64; 1]| [x.exp()];
        let (_, e1) = dopri5_step(&f, 0.0, &[1.0], 0.2);
        let (_, e2) = dopri5_step(&f, 0.0, &[1.0], 0.1);
        let ratio = e1[0] / e2[0];
        assert!(ratio > 16.0 && ratio < 64.0, "ratio {ratio}");
    }
}
