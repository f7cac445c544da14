//! Complete elliptic integrals of the first and second kind.
//!
//! Evaluated with the classical minimax approximations in the complementary
//! parameter `x = 1 - m`: a pair of degree-10 polynomials `P(x) - ln(x) Q(x)`
//! for `K`, and `P(x) - x ln(x) Q(x)` with a degree-9 `Q` for `E`. These are
//! the polynomial evaluations that dominate the cost of the axisymmetric
//! Landau tensors. Accuracy is close to machine precision on `[0, 1)`.

use crate::{Error, Result};

const K_P: [f64; 11] = [
    1.379_828_646_062_732_371_50e-4,
    2.280_257_240_058_755_673_85e-3,
    7.974_040_132_204_151_793_67e-3,
    9.858_213_790_212_260_087_14e-3,
    6.874_896_874_499_498_779_25e-3,
    6.189_010_336_376_876_132_29e-3,
    8.790_782_739_527_437_722_54e-3,
    1.493_804_489_168_052_527_18e-2,
    3.088_514_652_467_119_959_98e-2,
    9.657_359_028_116_901_265_35e-2,
    1.386_294_361_119_890_625_02e0,
];

const K_Q: [f64; 11] = [
    2.940_789_550_485_985_075_11e-5,
    9.141_847_238_659_172_265_71e-4,
    5.940_583_037_531_677_932_57e-3,
    1.548_505_166_497_623_993_35e-2,
    2.390_896_027_159_248_927_27e-2,
    3.012_047_152_276_040_469_88e-2,
    3.737_743_141_738_232_289_69e-2,
    4.882_803_475_709_982_392_32e-2,
    7.031_249_969_639_574_697_39e-2,
    1.249_999_999_998_708_200_58e-1,
    4.999_999_999_999_999_998_21e-1,
];

const E_P: [f64; 11] = [
    1.535_525_773_010_132_933_65e-4,
    2.508_884_921_636_020_609_90e-3,
    8.687_868_165_658_896_284_29e-3,
    1.073_509_490_560_761_934_03e-2,
    7.773_954_925_167_870_929_51e-3,
    7.583_952_894_135_147_085_19e-3,
    1.156_884_368_105_741_273_19e-2,
    2.183_179_960_155_572_531_03e-2,
    5.680_519_456_178_605_534_70e-2,
    4.431_471_805_609_908_506_18e-1,
    1.000_000_000_000_000_002_99e0,
];

const E_Q: [f64; 10] = [
    3.279_548_985_764_858_726_56e-5,
    1.009_627_926_793_567_151_33e-3,
    6.506_094_899_769_274_914_33e-3,
    1.688_621_639_933_113_173_00e-2,
    2.617_697_424_544_936_595_83e-2,
    3.348_339_048_882_249_186_14e-2,
    4.271_809_265_189_315_117_17e-2,
    5.859_366_344_711_010_556_42e-2,
    9.374_999_971_976_442_784_45e-2,
    2.499_999_999_998_883_143_61e-1,
];

/// ln 4, the leading term of `K` as `x -> 0`.
const LN_4: f64 = 1.386_294_361_119_890_618_8;

/// Reverses a coefficient array (highest power first → lowest first).
const fn ascending<const N: usize>(c: [f64; N]) -> [f64; N] {
    let mut out = [0.0; N];
    let mut i = 0;
    while i < N {
        out[i] = c[N - 1 - i];
        i += 1;
    }
    out
}

const K_P_ASC: [f64; 11] = ascending(K_P);
const K_Q_ASC: [f64; 11] = ascending(K_Q);
const E_P_ASC: [f64; 11] = ascending(E_P);
const E_Q_ASC: [f64; 10] = ascending(E_Q);

/// Polynomial with coefficients lowest power first, by Estrin's scheme
/// (pairwise combination with `x, x², x⁴, ...`), which has a shorter
/// dependency chain than Horner's rule.
#[inline(always)]
pub(crate) fn estrin<const N: usize>(x: f64, c: &[f64; N]) -> f64 {
    let mut buf = *c;
    let mut len = N;
    let mut p = x;
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            buf[i] = buf[2 * i] + buf[2 * i + 1] * p;
        }
        if len % 2 == 1 {
            buf[half] = buf[len - 1];
        }
        len = half + len % 2;
        p *= p;
    }
    buf[0]
}

#[inline(always)]
pub(crate) fn horner<const N: usize>(x: f64, coeffs: &[f64; N]) -> f64 {
    let mut acc = coeffs[0];
    for &c in &coeffs[1..] {
        acc = acc * x + c;
    }
    acc
}

/// `(K, E)` as functions of the complementary parameter `x = 1 - m`, for
/// `x` in `(0, 1]`. No argument checking; callers on the hot path compute
/// `x` directly from geometry to avoid cancellation in `1 - m`.
#[inline(always)]
pub fn elliptic_ke_complement(x: f64) -> (f64, f64) {
    let ln_x = x.ln();
    if x > f64::EPSILON {
        let k = estrin(x, &K_P_ASC) - ln_x * estrin(x, &K_Q_ASC);
        let e = estrin(x, &E_P_ASC) - ln_x * x * estrin(x, &E_Q_ASC);
        (k, e)
    } else {
        (LN_4 - 0.5 * ln_x, 1.0)
    }
}

const LN_2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
const LN_2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

/// `2·atanh(s)/s - 2 = Σ_{k≥1} 2 s^{2k}/(2k+1)` in `s²`, lowest power first.
const ATANH_SERIES: [f64; 12] = [
    2.0 / 3.0,
    2.0 / 5.0,
    2.0 / 7.0,
    2.0 / 9.0,
    2.0 / 11.0,
    2.0 / 13.0,
    2.0 / 15.0,
    2.0 / 17.0,
    2.0 / 19.0,
    2.0 / 21.0,
    2.0 / 23.0,
    2.0 / 25.0,
];

/// Natural logarithm for positive normal `x`, written without branches or
/// library calls so that loops over independent lanes vectorize.
/// `x = 2^e·m` with `m ∈ [√½, √2)`, then `ln m = 2 atanh((m-1)/(m+1))`.
#[inline(always)]
pub(crate) fn ln_lane(x: f64) -> f64 {
    const TWO_52: f64 = 4_503_599_627_370_496.0;
    let bits = x.to_bits();
    // biased exponent as a double, without an integer conversion
    let ef = f64::from_bits((bits >> 52) | 0x4330_0000_0000_0000) - (TWO_52 + 1023.0);
    let m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);
    let big = m > std::f64::consts::SQRT_2;
    let m = if big { 0.5 * m } else { m };
    let ef = if big { ef + 1.0 } else { ef };
    let s = (m - 1.0) / (m + 1.0);
    let s2 = s * s;
    let tail = s * s2 * estrin(s2, &ATANH_SERIES);
    ef * LN_2_HI + (ef * LN_2_LO + (2.0 * s + tail))
}

/// [`elliptic_ke_complement`] given `ln x`, for the blocked kernel.
#[inline(always)]
pub(crate) fn elliptic_ke_from_log(x: f64, ln_x: f64) -> (f64, f64) {
    let tiny = x <= f64::EPSILON;
    let k = estrin(x, &K_P_ASC) - ln_x * estrin(x, &K_Q_ASC);
    let e = estrin(x, &E_P_ASC) - ln_x * x * estrin(x, &E_Q_ASC);
    if tiny {
        (LN_4 - 0.5 * ln_x, 1.0)
    } else {
        (k, e)
    }
}

/// Complete elliptic integrals `(K(m), E(m))` in the parameter convention
/// `K(m) = ∫₀^{π/2} (1 - m sin²t)^{-1/2} dt`.
pub fn elliptic_ke(m: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "elliptic parameter m = {m} outside [0, 1)"
        )));
    }
    Ok(elliptic_ke_complement(1.0 - m))
}
