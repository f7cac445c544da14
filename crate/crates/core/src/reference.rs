//! Slow, independent evaluations used to check the production paths:
//! elliptic integrals by the arithmetic–geometric mean, and the
//! axisymmetric tensor pair by direct quadrature over the azimuth.

use std::f64::consts::PI;

use crate::kernel::{landau_tensor_3v, LandauTensorPair};
use crate::{Error, Result};

/// `(K(m), E(m))` by the arithmetic–geometric mean.
pub fn agm_elliptic_ke(m: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidArgument(format!("elliptic parameter {m} outside [0, 1)")));
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        // c_{n+1} = (a_n - b_n)/2 without the cancellation
        c = 0.25 * c * c / an;
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        let term = pow * c * c;
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
    }
    let k = PI / (2.0 * a);
    Ok((k, k * (1.0 - sum)))
}

/// Periodic trapezoid rule for `f` over `[0, 2π)`, doubling the node count
/// until two successive estimates agree to `rel_tol` of their magnitude.
/// Returns the estimate and the final node count.
pub fn periodic_quadrature<const D: usize, F>(f: F, rel_tol: f64, max_nodes: usize) -> ([f64; D], usize)
where
    F: Fn(f64) -> [f64; D],
{
    let eval = |n: usize, offset: bool| -> [f64; D] {
        let h = 2.0 * PI / n as f64;
        let mut s = [0.0; D];
        let start = if offset { 0.5 * h } else { 0.0 };
        for k in 0..n {
            let v = f(start + k as f64 * h);
            for (a, b) in s.iter_mut().zip(v) {
                *a += b;
            }
        }
        s
    };
    let mut n = 16;
    let mut sum = eval(n, false);
    let mut prev = sum.map(|v| v * 2.0 * PI / n as f64);
    loop {
        // reuse the previous nodes; the new ones sit at the midpoints
        let mid = eval(n, true);
        for (a, b) in sum.iter_mut().zip(mid) {
            *a += b;
        }
        n *= 2;
        let cur = sum.map(|v| v * 2.0 * PI / n as f64);
        let scale = cur.iter().chain(&prev).fold(0.0_f64, |m, v| m.max(v.abs()));
        let diff = cur.iter().zip(&prev).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= rel_tol * scale || n >= max_nodes {
            return (cur, n);
        }
        prev = cur;
    }
}

/// The tensor pair by quadrature of the 3V tensor over the azimuth of the
/// inner point: `v = (r, 0, z)`, `v̄(φ) = (r̄ cos φ, r̄ sin φ, z̄)`.
pub fn azimuthal_tensor_pair(r: f64, z: f64, rbar: f64, zbar: f64) -> LandauTensorPair {
    let integrand = |phi: f64| -> [f64; 8] {
        let (s, c) = phi.sin_cos();
        let u = landau_tensor_3v([r, 0.0, z], [rbar * c, rbar * s, zbar]);
        [
            u[0][0],
            u[0][2],
            u[2][0],
            u[2][2],
            u[0][0] * c + u[0][1] * s,
            u[0][2],
            u[2][0] * c + u[2][1] * s,
            u[2][2],
        ]
    };
    let (v, _) = periodic_quadrature(integrand, 1e-15, 1 << 24);
    LandauTensorPair {
        ud: [[v[0], v[1]], [v[2], v[3]]],
        uk: [[v[4], v[5]], [v[6], v[7]]],
    }
}
