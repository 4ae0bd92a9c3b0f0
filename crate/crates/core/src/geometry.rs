//! Planar geometry on an axis-aligned rectangular window.
//!
//! The hard-core bounds need `|b(x, r) ∩ W|`, the area of a closed disc
//! clipped to the window. [`ball_window_area`] computes it exactly by
//! integrating the clipped chord length of the disc piecewise in closed form.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Closed axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::Parameter {
                key: "window",
                msg: format!("[{x_min}, {x_max}] x [{y_min}, {y_max}] is not a proper rectangle"),
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// The square `[0, side]²`.
    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x_min, self.y_min),
            Point::new(self.x_max, self.y_min),
            Point::new(self.x_max, self.y_max),
            Point::new(self.x_min, self.y_max),
        ]
    }

    /// Maps `(u, v) ∈ [0,1]²` affinely onto the window.
    pub fn point_at(&self, u: f64, v: f64) -> Point {
        Point::new(
            self.x_min + u * self.width(),
            self.y_min + v * self.height(),
        )
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }
}

pub fn window_area(w: &Window) -> f64 {
    w.area()
}

/// Antiderivative of `sqrt(r² - u²)` on `[-r, r]`.
fn half_chord_primitive(u: f64, r: f64) -> f64 {
    let u = u.clamp(-r, r);
    let h = (r * r - u * u).max(0.0).sqrt();
    0.5 * (u * h + r * r * (u / r).clamp(-1.0, 1.0).asin())
}

/// Area of the closed disc `b(center, radius)` intersected with `w`.
///
/// In coordinates centred on the disc, the area is `∫ |[y1, y2] ∩ [-h(u), h(u)]| du`
/// over `u ∈ [x1, x2] ∩ [-r, r]` with `h(u) = sqrt(r² - u²)`. The integrand has a
/// fixed algebraic form between the abscissae where `h(u) = |y1|` or `h(u) = |y2|`,
/// so each piece integrates exactly.
pub fn ball_window_area(center: Point, radius: f64, w: &Window) -> f64 {
    if !(radius > 0.0) {
        return 0.0;
    }
    let r = radius;
    let x1 = (w.x_min - center.x).max(-r);
    let x2 = (w.x_max - center.x).min(r);
    let y1 = w.y_min - center.y;
    let y2 = w.y_max - center.y;
    if x1 >= x2 || y1 >= r || y2 <= -r {
        return 0.0;
    }

    let mut cuts = vec![x1, x2];
    for y in [y1, y2] {
        if y.abs() < r {
            let u = (r * r - y * y).sqrt();
            for c in [-u, u] {
                if c > x1 && c < x2 {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);

    let mut area = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let h_mid = (r * r - mid * mid).max(0.0).sqrt();
        let top_is_chord = h_mid < y2;
        let bottom_is_chord = -h_mid > y1;
        let top = if top_is_chord { h_mid } else { y2 };
        let bottom = if bottom_is_chord { -h_mid } else { y1 };
        if top <= bottom {
            continue;
        }
        let chord = half_chord_primitive(b, r) - half_chord_primitive(a, r);
        let len = b - a;
        area += match (top_is_chord, bottom_is_chord) {
            (true, true) => 2.0 * chord,
            (true, false) => chord - y1 * len,
            (false, true) => y2 * len + chord,
            (false, false) => (y2 - y1) * len,
        };
    }
    area.clamp(0.0, (PI * r * r).min(w.area()))
}

/// Smallest distance between two distinct entries, `+∞` for fewer than two points.
pub fn min_pairwise_distance(points: &[Point]) -> f64 {
    closest_pair(points).map_or(f64::INFINITY, |(_, _, d)| d)
}

/// Indices and distance of the closest pair (first such pair in index order).
pub fn closest_pair(points: &[Point]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            let d = p.distance(q);
            if best.map_or(true, |(_, _, b)| d < b) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

/// The index-order-first pair `(i, j)`, `i < j`, at distance `<= h`, found by a sweep
/// over x-sorted points.
pub fn first_pair_within(points: &[Point], h: f64) -> Option<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    let mut best: Option<(usize, usize, f64)> = None;
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if points[b].x - points[a].x > h {
                break;
            }
            let d = points[a].distance(&points[b]);
            if d <= h {
                let pair = (a.min(b), a.max(b), d);
                if best.map_or(true, |(i, j, _)| (pair.0, pair.1) < (i, j)) {
                    best = Some(pair);
                }
            }
        }
    }
    best
}
