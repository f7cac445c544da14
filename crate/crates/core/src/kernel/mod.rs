//! The O(N²) part of the collision operator.
//!
//! For every outer quadrature point the fused loop visits all `N` global
//! quadrature points, evaluates the axisymmetric tensor pair on demand and
//! accumulates the friction vector `K[α]` and diffusion tensor `D[α]` for
//! every species. Nothing geometric is stored between calls.

pub mod elliptic;
pub mod tensor;

pub use elliptic::{elliptic_ke, elliptic_ke_complement};
pub use tensor::{axisym_tensor_pair, axisym_tensor_pair_block, landau_tensor_3v, LandauTensorPair, PairBlock, LANES};

use crate::fem::QuadPointData;
use crate::{Error, Result};

/// Flops charged per tensor-pair evaluation by the analytic cost model.
pub const TENSOR_PAIR_FLOPS: u64 = 165;
/// Flops per species pair for the `K`/`D` accumulation.
pub const ACCUMULATE_FLOPS_PER_SPECIES_PAIR: u64 = 20;

/// Normalized collision frequencies and mass ratios, `S` species.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionParams {
    species: usize,
    nu_hat: Vec<f64>,
    mass_ratio_o: Vec<f64>,
}

impl CollisionParams {
    /// `nu_hat` is row-major `S × S`; `mass_ratio_o[α] = m_o / m_α`.
    pub fn new(nu_hat: Vec<f64>, mass_ratio_o: Vec<f64>) -> Result<Self> {
        let s = mass_ratio_o.len();
        if s == 0 {
            return Err(Error::InvalidArgument("no species".into()));
        }
        if nu_hat.len() != s * s {
            return Err(Error::DimensionMismatch {
                what: "nu_hat",
                expected: s * s,
                got: nu_hat.len(),
            });
        }
        if nu_hat.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "normalized collision frequencies must be positive".into(),
            ));
        }
        if mass_ratio_o.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("mass ratios must be positive".into()));
        }
        Ok(Self {
            species: s,
            nu_hat,
            mass_ratio_o,
        })
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn nu_hat(&self, alpha: usize, beta: usize) -> f64 {
        self.nu_hat[alpha * self.species + beta]
    }

    pub fn mass_ratio_o(&self, alpha: usize) -> f64 {
        self.mass_ratio_o[alpha]
    }

    /// `ν̂_αβ (m_o/m_α)(m_o/m_β)`, the friction weight.
    pub fn friction_coeff(&self, alpha: usize, beta: usize) -> f64 {
        self.nu_hat(alpha, beta) * self.mass_ratio_o[alpha] * self.mass_ratio_o[beta]
    }

    /// `ν̂_αβ (m_o/m_α)²`, the diffusion weight.
    pub fn diffusion_coeff(&self, alpha: usize, beta: usize) -> f64 {
        let q = self.mass_ratio_o[alpha];
        self.nu_hat(alpha, beta) * q * q
    }
}

/// Per-outer-point accumulators: friction vectors `k[α]` and diffusion
/// tensors `d[α]`, both in physical `(r, z)` components (6S words).
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulators {
    pub k: Vec<[f64; 2]>,
    pub d: Vec<[[f64; 2]; 2]>,
}

impl Accumulators {
    pub fn zeros(species: usize) -> Self {
        Self {
            k: vec![[0.0; 2]; species],
            d: vec![[[0.0; 2]; 2]; species],
        }
    }
}

/// Accumulates `K` and `D` at the outer point `(r, z)` over every point in
/// `data`.
///
/// `K[α] = Σ_n Σ_β ν̂_αβ (m_o/m_α)(m_o/m_β) U_K(n) ∇f_β(n) w(n)` and
/// `D[α] = -Σ_n Σ_β ν̂_αβ (m_o/m_α)² U_D(n) f_β(n) w(n)`. Inner points within
/// `data.exclusion_radius()` of the outer point are skipped.
///
/// Inner points are processed in blocks of [`LANES`]; point `n` feeds the
/// partial sum of lane `n % LANES` and the lanes are reduced in order at the
/// end. Excluded and padding lanes are redirected to a distant dummy point
/// with zero weight.
pub fn fused_inner_loop(r: f64, z: f64, data: &QuadPointData, params: &CollisionParams) -> Accumulators {
    let s = params.species();
    assert_eq!(s, data.species(), "species count of params and data differ");
    let eps2 = data.exclusion_radius() * data.exclusion_radius();
    let (c_fric, c_diff) = coefficient_tables(params);

    // lane partial sums, [α][lane]
    let mut k_r = vec![[0.0_f64; LANES]; s];
    let mut k_z = vec![[0.0_f64; LANES]; s];
    let mut d_rr = vec![[0.0_f64; LANES]; s];
    let mut d_rz = vec![[0.0_f64; LANES]; s];
    let mut d_zz = vec![[0.0_f64; LANES]; s];
    // weighted fields of the current block, [β][lane]
    let mut gr = vec![[0.0_f64; LANES]; s];
    let mut gz = vec![[0.0_f64; LANES]; s];
    let mut fw = vec![[0.0_f64; LANES]; s];
    let mut t = PairBlock::default();

    let (rs, zs, ws) = (data.r(), data.z(), data.w());
    let n = data.len();
    let mut start = 0;
    while start < n {
        let len = LANES.min(n - start);
        let mut rb = [r + 1.0; LANES];
        let mut zb = [z; LANES];
        let mut w = [0.0; LANES];
        for l in 0..len {
            let m = start + l;
            let dr = r - rs[m];
            let dz = z - zs[m];
            if dr * dr + dz * dz >= eps2 {
                rb[l] = rs[m];
                zb[l] = zs[m];
                w[l] = ws[m];
            }
        }
        for b in 0..s {
            let (f, fr, fz) = (
                &data.f(b)[start..start + len],
                &data.df_r(b)[start..start + len],
                &data.df_z(b)[start..start + len],
            );
            fw[b] = [0.0; LANES];
            gr[b] = [0.0; LANES];
            gz[b] = [0.0; LANES];
            for l in 0..len {
                fw[b][l] = f[l] * w[l];
                gr[b][l] = fr[l] * w[l];
                gz[b][l] = fz[l] * w[l];
            }
        }
        axisym_tensor_pair_block(r, z, &rb, &zb, &mut t);
        for a in 0..s {
            let mut g_r = [0.0; LANES];
            let mut g_z = [0.0; LANES];
            let mut h = [0.0; LANES];
            for b in 0..s {
                let cf = c_fric[a * s + b];
                let cd = c_diff[a * s + b];
                for l in 0..LANES {
                    g_r[l] += cf * gr[b][l];
                    g_z[l] += cf * gz[b][l];
                    h[l] += cd * fw[b][l];
                }
            }
            for l in 0..LANES {
                k_r[a][l] += t.uk_rr[l] * g_r[l] + t.ud_rz[l] * g_z[l];
                k_z[a][l] += t.uk_zr[l] * g_r[l] + t.ud_zz[l] * g_z[l];
                d_rr[a][l] -= t.ud_rr[l] * h[l];
                d_rz[a][l] -= t.ud_rz[l] * h[l];
                d_zz[a][l] -= t.ud_zz[l] * h[l];
            }
        }
        start += LANES;
    }

    let mut acc = Accumulators::zeros(s);
    for a in 0..s {
        for l in 0..LANES {
            acc.k[a][0] += k_r[a][l];
            acc.k[a][1] += k_z[a][l];
            acc.d[a][0][0] += d_rr[a][l];
            acc.d[a][0][1] += d_rz[a][l];
            acc.d[a][1][1] += d_zz[a][l];
        }
        acc.d[a][1][0] = acc.d[a][0][1];
    }
    acc
}

fn coefficient_tables(params: &CollisionParams) -> (Vec<f64>, Vec<f64>) {
    let s = params.species();
    let mut c_fric = vec![0.0; s * s];
    let mut c_diff = vec![0.0; s * s];
    for a in 0..s {
        for b in 0..s {
            c_fric[a * s + b] = params.friction_coeff(a, b);
            c_diff[a * s + b] = params.diffusion_coeff(a, b);
        }
    }
    (c_fric, c_diff)
}

/// Point-by-point version of [`fused_inner_loop`] with a single running sum
/// per accumulator and the scalar tensor pair.
pub fn fused_inner_loop_scalar(r: f64, z: f64, data: &QuadPointData, params: &CollisionParams) -> Accumulators {
    let s = params.species();
    assert_eq!(s, data.species(), "species count of params and data differ");
    let eps2 = data.exclusion_radius() * data.exclusion_radius();
    let (c_fric, c_diff) = coefficient_tables(params);
    let mut acc = Accumulators::zeros(s);
    for n in 0..data.len() {
        let dr = r - data.r()[n];
        let dz = z - data.z()[n];
        if dr * dr + dz * dz < eps2 {
            continue;
        }
        let t = axisym_tensor_pair(r, z, data.r()[n], data.z()[n]);
        let w = data.w()[n];
        for a in 0..s {
            let mut g = [0.0; 2];
            let mut h = 0.0;
            for b in 0..s {
                g[0] += c_fric[a * s + b] * data.df_r(b)[n] * w;
                g[1] += c_fric[a * s + b] * data.df_z(b)[n] * w;
                h += c_diff[a * s + b] * data.f(b)[n] * w;
            }
            for i in 0..2 {
                acc.k[a][i] += t.uk[i][0] * g[0] + t.uk[i][1] * g[1];
                for j in 0..2 {
                    acc.d[a][i][j] -= t.ud[i][j] * h;
                }
            }
        }
    }
    acc
}

/// Analytic kernel flop model: `outer_evals · N · (165 + 20 S²)`.
///
/// Lower-order work (transforms and element assembly) is reported
/// separately by [`transform_flops`].
pub fn flop_count(n_points: u64, species: u64, outer_evals: u64) -> u64 {
    outer_evals * n_points * (TENSOR_PAIR_FLOPS + ACCUMULATE_FLOPS_PER_SPECIES_PAIR * species * species)
}

/// Flops outside the inner loop per outer point: the diagonal-Jacobian
/// transform of `K` and `D` (16 per species) and the 9×9 element update
/// (13 per entry per species).
pub fn transform_flops(species: u64, outer_evals: u64) -> u64 {
    outer_evals * species * (16 + 13 * 81)
}
