//! Landau tensors: the full 3V projection tensor and the azimuthally
//! integrated pair `(U_K, U_D)` used in axisymmetric coordinates.

use std::f64::consts::PI;

use super::elliptic::{elliptic_ke_complement, elliptic_ke_from_log, horner, ln_lane};

/// `U(v, v̄) = (|d|² I - d dᵀ) / |d|³` with `d = v - v̄`.
///
/// `d` must be nonzero; the caller guards coincident points.
pub fn landau_tensor_3v(v: [f64; 3], vbar: [f64; 3]) -> [[f64; 3]; 3] {
    let d = [v[0] - vbar[0], v[1] - vbar[1], v[2] - vbar[2]];
    let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let inv = 1.0 / d2.sqrt();
    let inv3 = inv / d2;
    let mut u = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let delta = if a == b { inv } else { 0.0 };
            u[a][b] = delta - d[a] * d[b] * inv3;
        }
    }
    u
}

/// Azimuthally integrated Landau tensors between the rings through `(r, z)`
/// and `(r̄, z̄)`. Row index is the outer component `(r, z)`.
///
/// * `ud[a][b] = ∫ U_ab dφ` for `a, b ∈ {r, z}`.
/// * `uk[a][0] = ∫ (U_ax cos φ + U_ay sin φ) dφ`, `uk[a][1] = ∫ U_az dφ`,
///   so that `uk · (∂f/∂r̄, ∂f/∂z̄)` is the azimuthal integral of `U · ∇̄f`.
///
/// The integrals run over the full circle, so the inner `2π` is included.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LandauTensorPair {
    pub uk: [[f64; 2]; 2],
    pub ud: [[f64; 2]; 2],
}

/// Below this value of `β = 2 r r̄ / (r² + r̄² + Δz²)` the cosine moments are
/// summed as a truncated binomial series; above it the elliptic closed form
/// is used. The closed form divides by `m` and `m²`, which loses digits for
/// small `m ≈ 2β`.
pub const SERIES_SWITCH: f64 = 0.1;

/// Number of even (and odd) series terms; `SERIES_SWITCH^(2·SERIES_TERMS)`
/// is below `1e-17`.
const SERIES_TERMS: usize = 9;

/// Cosine moments `I[n][p] = ∫₀^{2π} cosⁿφ (A - B cos φ)^{-p/2} dφ` needed by
/// the tensor pair: `(I0¹, I1¹, I0³, I1³, I2³)`.
#[derive(Clone, Copy, Debug)]
struct Moments {
    i0_1: f64,
    i1_1: f64,
    i0_3: f64,
    i1_3: f64,
    i2_3: f64,
}

/// Series coefficients, highest power first, for
/// `M0¹, M1¹/β, M0³, M1³/β, M2³` as polynomials in `β²`.
///
/// `(1 - β cos φ)^{-p/2} = Σ_k c_k β^k cos^k φ` with `c_k = (p/2)_k / k!`,
/// and `(1/2π) ∫ cos^k φ dφ = (k-1)!!/k!!` for even `k`.
const fn series_coefficients() -> [[f64; SERIES_TERMS]; 5] {
    let mut out = [[0.0; SERIES_TERMS]; 5];
    let mut c1 = 1.0; // c_k for p = 1
    let mut c3 = 1.0; // c_k for p = 3
    let mut avg = 1.0; // (1/2π)∫cos^k for even k
    let mut k = 0;
    while k < 2 * SERIES_TERMS {
        let kf = k as f64;
        let j = SERIES_TERMS - 1 - k / 2;
        if k % 2 == 0 {
            let avg2 = avg * (kf + 1.0) / (kf + 2.0);
            out[0][j] = c1 * avg;
            out[2][j] = c3 * avg;
            out[4][j] = c3 * avg2;
        } else {
            // avg holds (1/2π)∫cos^{k-1}; the odd power pairs with cos^{k+1}
            let avg_next = avg * kf / (kf + 1.0);
            out[1][j] = c1 * avg_next;
            out[3][j] = c3 * avg_next;
            avg = avg_next;
        }
        c1 *= (0.5 + kf) / (kf + 1.0);
        c3 *= (1.5 + kf) / (kf + 1.0);
        k += 1;
    }
    out
}

const SERIES: [[f64; SERIES_TERMS]; 5] = series_coefficients();

#[inline(always)]
fn moments_series(inv_a: f64, beta: f64) -> Moments {
    let b2 = beta * beta;
    let s1 = 2.0 * PI * inv_a.sqrt();
    let s3 = s1 * inv_a;
    Moments {
        i0_1: s1 * horner(b2, &SERIES[0]),
        i1_1: s1 * beta * horner(b2, &SERIES[1]),
        i0_3: s3 * horner(b2, &SERIES[2]),
        i1_3: s3 * beta * horner(b2, &SERIES[3]),
        i2_3: s3 * horner(b2, &SERIES[4]),
    }
}

#[inline(always)]
fn moments_closed(a_plus_b: f64, a_minus_b: f64) -> Moments {
    let inv_apb = 1.0 / a_plus_b;
    let x = a_minus_b * inv_apb;
    moments_from_ke(inv_apb, x, elliptic_ke_complement(x))
}

/// Closed-form moments from `K` and `E` at complementary parameter
/// `x = (A - B)/(A + B)`. The substitution `φ = π - 2t` maps the ring
/// integral onto `∫₀^{π/2}` over `(1 - m sin²t)` with `m = 1 - x`.
#[inline(always)]
fn moments_from_ke(inv_apb: f64, x: f64, (k, e): (f64, f64)) -> Moments {
    let m = 1.0 - x;
    let inv_mx = 1.0 / (m * x);
    let inv_m = x * inv_mx;
    let inv_x = m * inv_mx;
    let kme = (k - e) * inv_m;
    let j0_1 = k;
    let j1_1 = kme;
    let j0_3 = e * inv_x;
    let j1_3 = (e - x * k) * inv_mx;
    let j2_3 = (j0_3 - 2.0 * kme) * inv_m;
    let pref1 = 4.0 * inv_apb.sqrt();
    let pref3 = pref1 * inv_apb;
    Moments {
        i0_1: pref1 * j0_1,
        i1_1: pref1 * (2.0 * j1_1 - j0_1),
        i0_3: pref3 * j0_3,
        i1_3: pref3 * (2.0 * j1_3 - j0_3),
        i2_3: pref3 * (4.0 * (j2_3 - j1_3) + j0_3),
    }
}

/// Axisymmetric tensor pair between outer point `(r, z)` and inner point
/// `(rbar, zbar)`. Points must not coincide; `r, rbar >= 0`.
#[inline(always)]
pub fn axisym_tensor_pair(r: f64, z: f64, rbar: f64, zbar: f64) -> LandauTensorPair {
    let dz = z - zbar;
    let dz2 = dz * dz;
    let rr = r * rbar;
    let r2 = r * r;
    let rb2 = rbar * rbar;
    let a = r2 + rb2 + dz2;
    let b = 2.0 * rr;
    let mo = if b < SERIES_SWITCH * a {
        let inv_a = 1.0 / a;
        moments_series(inv_a, b * inv_a)
    } else {
        let dr_plus = r + rbar;
        let dr_minus = r - rbar;
        moments_closed(dr_plus * dr_plus + dz2, dr_minus * dr_minus + dz2)
    };
    let ud_rr = mo.i0_1 - (r2 * mo.i0_3 - 2.0 * rr * mo.i1_3 + rb2 * mo.i2_3);
    let ud_rz = -dz * (r * mo.i0_3 - rbar * mo.i1_3);
    let ud_zz = mo.i0_1 - dz2 * mo.i0_3;
    let uk_rr = mo.i1_1 + rr * (mo.i0_3 + mo.i2_3) - (r2 + rb2) * mo.i1_3;
    let uk_zr = dz * (rbar * mo.i0_3 - r * mo.i1_3);
    LandauTensorPair {
        uk: [[uk_rr, ud_rz], [uk_zr, ud_zz]],
        ud: [[ud_rr, ud_rz], [ud_rz, ud_zz]],
    }
}

/// Inner points per block in the lane-blocked kernel.
pub const LANES: usize = 32;

/// Tensor pairs for one outer point against [`LANES`] inner points. Only the
/// distinct entries are stored: `uk[0][1] = ud[0][1]` and `uk[1][1] = ud[1][1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBlock {
    pub uk_rr: [f64; LANES],
    pub uk_zr: [f64; LANES],
    pub ud_rr: [f64; LANES],
    pub ud_rz: [f64; LANES],
    pub ud_zz: [f64; LANES],
}

impl Default for PairBlock {
    fn default() -> Self {
        Self {
            uk_rr: [0.0; LANES],
            uk_zr: [0.0; LANES],
            ud_rr: [0.0; LANES],
            ud_rz: [0.0; LANES],
            ud_zz: [0.0; LANES],
        }
    }
}

impl PairBlock {
    pub fn lane(&self, l: usize) -> LandauTensorPair {
        LandauTensorPair {
            uk: [[self.uk_rr[l], self.ud_rz[l]], [self.uk_zr[l], self.ud_zz[l]]],
            ud: [[self.ud_rr[l], self.ud_rz[l]], [self.ud_rz[l], self.ud_zz[l]]],
        }
    }
}

/// [`axisym_tensor_pair`] for a block of inner points, written as a
/// sequence of simple loops over lanes. The series path is evaluated only
/// when some lane needs it. No inner point may coincide with `(r, z)`.
#[inline(always)]
pub fn axisym_tensor_pair_block(r: f64, z: f64, rbar: &[f64; LANES], zbar: &[f64; LANES], out: &mut PairBlock) {
    let r2 = r * r;
    let mut a = [0.0; LANES];
    let mut b = [0.0; LANES];
    let mut inv_apb = [0.0; LANES];
    let mut x = [0.0; LANES];
    let mut series = [false; LANES];
    for l in 0..LANES {
        let dz = z - zbar[l];
        let dz2 = dz * dz;
        a[l] = r2 + rbar[l] * rbar[l] + dz2;
        b[l] = 2.0 * r * rbar[l];
        series[l] = b[l] < SERIES_SWITCH * a[l];
        let rp = r + rbar[l];
        let rm = r - rbar[l];
        inv_apb[l] = 1.0 / (rp * rp + dz2);
        // series lanes get a harmless argument; their values are replaced below
        x[l] = if series[l] { 0.5 } else { (rm * rm + dz2) * inv_apb[l] };
    }
    let mut ln_x = [0.0; LANES];
    for l in 0..LANES {
        ln_x[l] = ln_lane(x[l]);
    }
    let mut m = [[0.0; LANES]; 5];
    for l in 0..LANES {
        let mo = moments_from_ke(inv_apb[l], x[l], elliptic_ke_from_log(x[l], ln_x[l]));
        m[0][l] = mo.i0_1;
        m[1][l] = mo.i1_1;
        m[2][l] = mo.i0_3;
        m[3][l] = mo.i1_3;
        m[4][l] = mo.i2_3;
    }
    if series.iter().any(|&s| s) {
        for l in 0..LANES {
            let inv_a = 1.0 / a[l];
            let mo = moments_series(inv_a, b[l] * inv_a);
            if series[l] {
                m[0][l] = mo.i0_1;
                m[1][l] = mo.i1_1;
                m[2][l] = mo.i0_3;
                m[3][l] = mo.i1_3;
                m[4][l] = mo.i2_3;
            }
        }
    }
    for l in 0..LANES {
        let rb = rbar[l];
        let dz = z - zbar[l];
        let rr = r * rb;
        let (i0_1, i1_1, i0_3, i1_3, i2_3) = (m[0][l], m[1][l], m[2][l], m[3][l], m[4][l]);
        out.ud_rr[l] = i0_1 - (r2 * i0_3 - 2.0 * rr * i1_3 + rb * rb * i2_3);
        out.ud_rz[l] = -dz * (r * i0_3 - rb * i1_3);
        out.ud_zz[l] = i0_1 - dz * dz * i0_3;
        out.uk_rr[l] = i1_1 + rr * (i0_3 + i2_3) - (r2 + rb * rb) * i1_3;
        out.uk_zr[l] = dz * (rb * i0_3 - r * i1_3);
    }
}
