//! Adaptive Gauss–Kronrod quadrature and the bivariate Gaussian disk
//! integral built on it.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use super::eigen::eig_sym2_pd;
use super::linalg::{SymMat2, Vec2};
use super::special::normal_sf;
use crate::{Error, Result};

/// Default relative tolerance for disk integrals.
pub const DEFAULT_DISK_REL_TOL: f64 = 1e-9;

const MAX_SEGMENTS: usize = 4000;

// 15-point Kronrod abscissae (positive half, descending) and weights; the
// odd-indexed abscissae are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteObjective { abscissa: x })
        }
    };
    let fc = eval(centre)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = eval(centre - dx)? + eval(centre + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// Converged when the summed Kronrod–Gauss differences fall below
/// `max(rel_tol·|I|, abs_tol)`.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_with_breaks(f, a, b, &[], rel_tol, abs_tol)
}

/// As [`integrate`], with interior break points where the integrand is known
/// to change character (peaks, kinks). Break points outside `(a, b)` are
/// ignored.
pub fn integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut points: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    points.push(lo);
    points.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut segments = Vec::with_capacity(64);
    for w in points.windows(2) {
        segments.push(gk15(&mut f, w[0], w[1])?);
    }

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            return Ok(sign * total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNotConverged {
                achieved: err / total.abs().max(f64::MIN_POSITIVE),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            return Err(Error::QuadratureNotConverged {
                achieved: err / total.abs().max(f64::MIN_POSITIVE),
            });
        }
        segments.push(gk15(&mut f, s.a, mid)?);
        segments.push(gk15(&mut f, mid, s.b)?);
    }
}

// P(a <= Z <= b) for a standard normal Z, without cancellation in the tails.
fn normal_interval(a: f64, b: f64) -> f64 {
    let p = if a >= 0.0 {
        normal_sf(a) - normal_sf(b)
    } else if b <= 0.0 {
        normal_sf(-b) - normal_sf(-a)
    } else {
        1.0 - normal_sf(-a) - normal_sf(b)
    };
    p.clamp(0.0, 1.0)
}

/// Probability mass of `N(center, cov)` inside the disk of `radius` centred
/// at the origin.
///
/// In the covariance eigenframe the disk integral factorizes into an outer
/// integral along the major axis and a closed-form normal interval along the
/// minor axis. The outer variable is `u = radius · sin t`, which removes the
/// square-root endpoint behaviour of the chord half-length, and the
/// resulting smooth 1-D integral is evaluated adaptively to `rel_tol`.
pub fn gauss_disk_quadrature(center: Vec2, cov: SymMat2, radius: f64, rel_tol: f64) -> Result<f64> {
    if !center.is_finite() || !radius.is_finite() {
        return Err(Error::NonFinite);
    }
    if radius < 0.0 {
        return Err(Error::InvalidArgument {
            name: "radius",
            reason: "must be non-negative",
        });
    }
    let eig = eig_sym2_pd(&cov)?;
    if radius == 0.0 {
        return Ok(0.0);
    }
    let local = eig.to_eigen_frame(center);
    let (m_minor, m_major) = (local.x, local.y);
    let (sd_minor, sd_major) = (libm::sqrt(eig.lambda1), libm::sqrt(eig.lambda2));
    let norm = 1.0 / (sd_major * libm::sqrt(2.0 * PI));

    let integrand = |t: f64| {
        let (s, c) = (libm::sin(t), libm::cos(t));
        let u = radius * s;
        let h = radius * c;
        if h <= 0.0 {
            return 0.0;
        }
        let zu = (u - m_major) / sd_major;
        let outer = norm * libm::exp(-0.5 * zu * zu);
        let inner = normal_interval((-h - m_minor) / sd_minor, (h - m_minor) / sd_minor);
        h * outer * inner
    };

    let mut breaks: Vec<f64> = Vec::with_capacity(8);
    for u in [
        m_major - 8.0 * sd_major,
        m_major,
        m_major + 8.0 * sd_major,
    ] {
        if u.abs() < radius {
            breaks.push(libm::asin(u / radius));
        }
    }
    for h in [m_minor.abs() - 8.0 * sd_minor, m_minor.abs(), m_minor.abs() + 8.0 * sd_minor] {
        if h > 0.0 && h < radius {
            let t = libm::acos(h / radius);
            breaks.push(t);
            breaks.push(-t);
        }
    }

    let p = integrate_with_breaks(integrand, -FRAC_PI_2, FRAC_PI_2, &breaks, rel_tol, 1e-300)?;
    Ok(p.clamp(0.0, 1.0))
}
