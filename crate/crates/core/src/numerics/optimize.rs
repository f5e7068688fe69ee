//! Bounded scalar minimization (Brent) and bracketed root finding.

use alloc::vec::Vec;

use crate::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const SQRT_EPS: f64 = 1.490_116_119_384_765_6e-8;
const MAX_ITER: usize = 500;

/// Location and value of a minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub min: f64,
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFiniteObjective { abscissa: x })
    }
}

/// Brent's minimizer on `[lo, hi]` (golden section with parabolic steps).
///
/// Returns a local minimizer. The endpoints are compared at the end so that
/// a minimum on the boundary is reported as such.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument {
            name: "lo, hi",
            reason: "need finite lo < hi",
        });
    }
    let tol = tol.abs();
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(&mut f, x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);

    for _ in 0..MAX_ITER {
        let xm = 0.5 * (a + b);
        let tol1 = SQRT_EPS * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut take_golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                take_golden = false;
            }
        }
        if take_golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = eval(&mut f, u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let mut best = Minimum { argmin: x, min: fx };
    for end in [lo, hi] {
        let fe = eval(&mut f, end)?;
        if fe < best.min {
            best = Minimum { argmin: end, min: fe };
        }
    }
    Ok(best)
}

/// Global minimization of a `period`-periodic function.
///
/// The period starting at `start` is scanned on `n_grid` equally spaced
/// points; every discrete local minimum of the scan is refined with
/// [`minimize_scalar`] on the two neighbouring grid cells and the best result
/// is returned.
pub fn minimize_periodic<F>(
    mut f: F,
    start: f64,
    period: f64,
    n_grid: usize,
    tol: f64,
) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    if n_grid < 3 || !(period > 0.0) {
        return Err(Error::InvalidArgument {
            name: "n_grid, period",
            reason: "need at least three grid points and a positive period",
        });
    }
    let step = period / n_grid as f64;
    let mut values = Vec::with_capacity(n_grid);
    for i in 0..n_grid {
        values.push(eval(&mut f, start + step * i as f64)?);
    }
    let mut best = Minimum {
        argmin: start,
        min: values[0],
    };
    for (i, &fi) in values.iter().enumerate() {
        if fi < best.min {
            best = Minimum {
                argmin: start + step * i as f64,
                min: fi,
            };
        }
    }
    for i in 0..n_grid {
        let prev = values[(i + n_grid - 1) % n_grid];
        let next = values[(i + 1) % n_grid];
        if values[i] <= prev && values[i] <= next {
            let centre = start + step * i as f64;
            let m = minimize_scalar(&mut f, centre - step, centre + step, tol)?;
            if m.min < best.min {
                best = m;
            }
        }
    }
    let mut offset = libm::fmod(best.argmin - start, period);
    if offset < 0.0 {
        offset += period;
    }
    let wrapped = offset + start;
    Ok(Minimum {
        argmin: wrapped,
        min: best.min,
    })
}

/// Bracketed root finder: bisection with secant (false-position) steps.
///
/// A secant step is taken only while it keeps shrinking the bracket by at
/// least half per iteration; otherwise the step is a bisection, so the
/// bracket width is at least halved every two iterations. Iteration stops
/// once the bracket is no wider than `tol`, returning the end with the
/// smaller residual.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument {
            name: "lo, hi",
            reason: "need finite lo <= hi",
        });
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = eval(&mut f, a)?;
    let mut fb = eval(&mut f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut use_secant = true;
    for _ in 0..MAX_ITER {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mid = a + 0.5 * width;
        let mut c = mid;
        if use_secant {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                c = s;
            }
        }
        if c <= a || c >= b {
            // bracket collapsed to adjacent floats
            break;
        }
        let fc = eval(&mut f, c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
        use_secant = (b - a) <= 0.5 * width;
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}
