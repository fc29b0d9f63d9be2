//! Scalar and small-dimension minimizers: golden-section search with
//! parabolic-interpolation acceleration (Brent), a bounded 2-D Nelder-Mead
//! simplex, and a projected gradient-descent step used by the Pade solver.

/// Result of a bounded scalar minimization.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMin {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search with parabolic interpolation (Brent's method) on
/// [a, b]. `xtol` is the absolute tolerance on the argument.
///
/// The objective may return non-finite values (treated as +inf), so guarded
/// regions inside the interval are skipped over rather than fatal.
pub fn brent_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> ScalarMin {
    const GOLDEN: f64 = 0.381_966_011_250_105_1; // 2 - phi
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let eval = |x: f64, f: &mut F| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = eval(x, &mut f);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let m = 0.5 * (a + b);
        let tol1 = xtol.max(f64::EPSILON * x.abs());
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // parabola through (v, fv), (w, fw), (x, fx)
            let r = (x - w) * (fx - fv);
            let mut qd = (x - v) * (fx - fw);
            let mut p = (x - v) * qd - (x - w) * r;
            qd = 2.0 * (qd - r);
            if qd > 0.0 {
                p = -p;
            } else {
                qd = -qd;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * qd * e_prev).abs() && p > qd * (a - x) && p < qd * (b - x) {
                d = p / qd;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = eval(u, &mut f);
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
    ScalarMin { x, value: fx, iterations }
}

/// Brent minimization preceded by a coarse grid scan; if the grid finds a
/// basin the direct Brent run missed (non-unimodal objective), re-run Brent
/// inside the bracketing cell. Returns the minimizer and whether the
/// fallback path fired.
pub fn brent_min_with_grid_fallback<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    grid_points: usize,
) -> (ScalarMin, bool) {
    let direct = brent_min(&mut f, a, b, xtol, 200);
    let n = grid_points.max(3);
    let mut best = (f64::INFINITY, 0usize);
    let step = (b - a) / (n - 1) as f64;
    for i in 0..n {
        let x = a + step * i as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, i);
        }
    }
    if best.0 < direct.value - 1e-12 * direct.value.abs().max(1.0) {
        let lo = a + step * best.1.saturating_sub(1) as f64;
        let hi = (a + step * (best.1 + 1) as f64).min(b);
        let refined = brent_min(&mut f, lo, hi, xtol, 200);
        if refined.value < direct.value {
            return (refined, true);
        }
    }
    (direct, false)
}

/// Bounded 2-D Nelder-Mead simplex refinement from a starting point.
/// Out-of-bounds or infeasible points must be mapped to +inf by `f`.
pub fn nelder_mead_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    start: (f64, f64),
    scale: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> ((f64, f64), f64) {
    let mut pts = [
        [start.0, start.1],
        [start.0 + scale.0, start.1],
        [start.0, start.1 + scale.1],
    ];
    let mut vals = [f(pts[0][0], pts[0][1]), f(pts[1][0], pts[1][1]), f(pts[2][0], pts[2][1])];

    for _ in 0..max_iter {
        // order ascending by value
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        let spread = (pts[b][0] - pts[w][0]).abs().max((pts[b][1] - pts[w][1]).abs());
        if spread < tol {
            break;
        }
        let centroid = [
            0.5 * (pts[b][0] + pts[m][0]),
            0.5 * (pts[b][1] + pts[m][1]),
        ];
        let refl = [2.0 * centroid[0] - pts[w][0], 2.0 * centroid[1] - pts[w][1]];
        let f_refl = f(refl[0], refl[1]);
        if f_refl < vals[b] {
            let exp = [
                centroid[0] + 2.0 * (refl[0] - centroid[0]),
                centroid[1] + 2.0 * (refl[1] - centroid[1]),
            ];
            let f_exp = f(exp[0], exp[1]);
            if f_exp < f_refl {
                pts[w] = exp;
                vals[w] = f_exp;
            } else {
                pts[w] = refl;
                vals[w] = f_refl;
            }
        } else if f_refl < vals[m] {
            pts[w] = refl;
            vals[w] = f_refl;
        } else {
            let contr = [
                centroid[0] + 0.5 * (pts[w][0] - centroid[0]),
                centroid[1] + 0.5 * (pts[w][1] - centroid[1]),
            ];
            let f_contr = f(contr[0], contr[1]);
            if f_contr < vals[w] {
                pts[w] = contr;
                vals[w] = f_contr;
            } else {
                // shrink toward best
                for i in 0..3 {
                    if i == b {
                        continue;
                    }
                    pts[i] = [
                        pts[b][0] + 0.5 * (pts[i][0] - pts[b][0]),
                        pts[b][1] + 0.5 * (pts[i][1] - pts[b][1]),
                    ];
                    vals[i] = f(pts[i][0], pts[i][1]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    ((pts[best][0], pts[best][1]), vals[best])
}

/// Projected gradient descent on a box [lo, hi] with central finite-difference
/// gradients and a backtracking line search. Returns (x, f(x), iterations).
pub fn projected_gd<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    lo: f64,
    hi: f64,
    fd_step: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64, usize) {
    let clamp = |x: f64| x.clamp(lo, hi);
    let mut x = clamp(x0);
    let mut fx = f(x);
    let mut step = 0.1 * (hi - lo);
    let mut iters = 0;
    for it in 0..max_iter {
        iters = it + 1;
        let g = (f(clamp(x + fd_step)) - f(clamp(x - fd_step))) / (2.0 * fd_step);
        if !g.is_finite() {
            break;
        }
        let mut t = step;
        let mut moved = false;
        for _ in 0..40 {
            let xn = clamp(x - t * g);
            let fn_ = f(xn);
            if fn_ < fx {
                // grow the trust step slowly on success
                step = (t * 2.0).min(0.1 * (hi - lo));
                let dx = (xn - x).abs();
                x = xn;
                fx = fn_;
                moved = true;
                if dx < xtol {
                    return (x, fx, iters);
                }
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, fx, iters)
}
