//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mpp_thinning::geometry::{Point, Window};

/// Area of `poly ∩ w` by Sutherland–Hodgman clipping and the shoelace formula.
pub fn clipped_polygon_area(poly: &[(f64, f64)], w: &Window) -> f64 {
    let mut pts = poly.to_vec();
    type Edge = (fn(&(f64, f64), f64) -> bool, fn((f64, f64), (f64, f64), f64) -> (f64, f64), f64);
    let cut_x = |a: (f64, f64), b: (f64, f64), x: f64| {
        let t = (x - a.0) / (b.0 - a.0);
        (x, a.1 + t * (b.1 - a.1))
    };
    let cut_y = |a: (f64, f64), b: (f64, f64), y: f64| {
        let t = (y - a.1) / (b.1 - a.1);
        (a.0 + t * (b.0 - a.0), y)
    };
    let edges: [Edge; 4] = [
        (|p, v| p.0 >= v, cut_x, w.x_min()),
        (|p, v| p.0 <= v, cut_x, w.x_max()),
        (|p, v| p.1 >= v, cut_y, w.y_min()),
        (|p, v| p.1 <= v, cut_y, w.y_max()),
    ];
    for (inside, cut, v) in edges {
        if pts.is_empty() {
            return 0.0;
        }
        let mut out = Vec::with_capacity(pts.len() + 4);
        for k in 0..pts.len() {
            let cur = pts[k];
            let prev = pts[(k + pts.len() - 1) % pts.len()];
            match (inside(&cur, v), inside(&prev, v)) {
                (true, true) => out.push(cur),
                (true, false) => {
                    out.push(cut(prev, cur, v));
                    out.push(cur);
                }
                (false, true) => out.push(cut(prev, cur, v)),
                (false, false) => {}
            }
        }
        pts = out;
    }
    let n = pts.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    0.5 * twice.abs()
}

/// `|b(c, r) ∩ w|` from a regular `vertices`-gon with the same area as the disc.
pub fn polygon_ball_area(c: Point, r: f64, w: &Window, vertices: usize) -> f64 {
    let step = std::f64::consts::TAU / vertices as f64;
    // Circumradius giving the polygon the disc's area keeps the bias second order at the boundary.
    let rho = r * (std::f64::consts::PI / (0.5 * vertices as f64 * step.sin())).sqrt();
    let poly: Vec<(f64, f64)> = (0..vertices)
        .map(|k| {
            let t = k as f64 * step;
            (c.x + rho * t.cos(), c.y + rho * t.sin())
        })
        .collect();
    clipped_polygon_area(&poly, w)
}

/// `|b(c, r) ∩ w|` by adaptive Simpson integration in x of the exact chord length inside `w`.
pub fn iterated_ball_area(c: Point, r: f64, w: &Window) -> f64 {
    let a = w.x_min().max(c.x - r);
    let b = w.x_max().min(c.x + r);
    if a >= b {
        return 0.0;
    }
    let chord = |x: f64| {
        let h = (r * r - (x - c.x) * (x - c.x)).max(0.0).sqrt();
        (w.y_max().min(c.y + h) - w.y_min().max(c.y - h)).max(0.0)
    };
    // Split where the integrand has kinks: the disc's tangency points with y = const edges.
    let mut cuts = vec![a, b];
    for y in [w.y_min(), w.y_max()] {
        let dy = y - c.y;
        if dy.abs() < r {
            let dx = (r * r - dy * dy).sqrt();
            cuts.extend([c.x - dx, c.x + dx].into_iter().filter(|x| *x > a && *x < b));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|p| adaptive_simpson(&chord, p[0], p[1], 1e-12, 50)).sum()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Logistic ODE `m' = λ m (1 − m/K)` integrated by classical RK4; values at `t = 0, 1, ..., n`.
pub fn rk4_logistic(m0: f64, lambda: f64, k: f64, n: u32, steps_per_unit: u32) -> Vec<f64> {
    let f = |m: f64| lambda * m * (1.0 - m / k);
    let h = 1.0 / steps_per_unit as f64;
    let mut m = m0;
    let mut out = vec![m0];
    for _ in 0..n {
        for _ in 0..steps_per_unit {
            let k1 = f(m);
            let k2 = f(m + 0.5 * h * k1);
            let k3 = f(m + 0.5 * h * k2);
            let k4 = f(m + h * k3);
            m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(m);
    }
    out
}
