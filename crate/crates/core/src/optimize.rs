//! One-dimensional minimization: bracket search and Brent's method.

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Brent's parabolic-interpolation minimizer on `[lo, hi]`.
///
/// Stops once the bracket around the best point is narrower than about
/// `2 * tol`. NaN values are treated as `+inf`.
pub(crate) fn brent_minimize<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let sqrt_eps = f64::EPSILON.sqrt();

    let mut x = a + GOLDEN * (b - a);
    let mut fx = sanitize(f(x));
    let (mut w, mut fw) = (x, fx);
    let (mut v, mut fv) = (x, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for iter in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Minimum {
                x,
                fx,
                iterations: iter,
                converged: true,
            };
        }

        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = sanitize(f(u));

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
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

    Minimum {
        x,
        fx,
        iterations: max_iter,
        converged: false,
    }
}

/// Walks downhill from `start` in steps that double, staying inside
/// `[lo, hi]`, until the minimum is bracketed.
///
/// Returns `(left, right)` enclosing a local minimum, or the interval touching
/// the boundary when the function keeps decreasing up to it.
pub(crate) fn bracket_minimum<F>(f: &mut F, start: f64, step: f64, lo: f64, hi: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let start = start.clamp(lo, hi);
    let f0 = sanitize(f(start));
    let right = (start + step).min(hi);
    let f_right = sanitize(f(right));

    let (dir, mut prev, mut cur, mut f_cur) = if f_right < f0 {
        (1.0, start, right, f_right)
    } else {
        let left = (start - step).max(lo);
        let f_left = sanitize(f(left));
        if f_left >= f0 {
            return (left, right);
        }
        (-1.0, start, left, f_left)
    };

    let mut h = step;
    loop {
        h *= 2.0;
        let next = (cur + dir * h).clamp(lo, hi);
        if next == cur {
            // pinned at the boundary
            return if dir > 0.0 { (prev, hi) } else { (lo, prev) };
        }
        let f_next = sanitize(f(next));
        if f_next >= f_cur {
            return if dir > 0.0 {
                (prev, next)
            } else {
                (next, prev)
            };
        }
        prev = cur;
        cur = next;
        f_cur = f_next;
    }
}
