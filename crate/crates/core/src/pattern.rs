//! Marked point patterns (the decision-process state), thinning actions and rewards.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{first_pair_within, Point, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoint {
    pub location: Point,
    pub mark: f64,
}

impl MarkedPoint {
    pub const fn new(x: f64, y: f64, mark: f64) -> Self {
        Self {
            location: Point::new(x, y),
            mark,
        }
    }
}

/// A finite simple marked point configuration.
///
/// Point order is kept stable so that actions can refer to points by index,
/// but it carries no meaning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pattern {
    points: Vec<MarkedPoint>,
}

impl Pattern {
    pub fn new(points: Vec<MarkedPoint>) -> Self {
        Self { points }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MarkedPoint> {
        self.points.iter()
    }

    pub fn push(&mut self, p: MarkedPoint) {
        self.points.push(p);
    }

    pub fn locations(&self) -> Vec<Point> {
        self.points.iter().map(|p| p.location).collect()
    }

    pub fn marks(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.mark)
    }

    /// Checks marks in `[0, k]`, locations inside `w`, and simplicity.
    pub fn validate(&self, w: &Window, k: f64) -> Result<()> {
        for (row, p) in self.points.iter().enumerate() {
            if !(p.mark >= 0.0 && p.mark <= k) {
                return Err(Error::Domain {
                    what: "mark",
                    value: p.mark,
                    lo: 0.0,
                    hi: k,
                });
            }
            if !w.contains(&p.location) {
                return Err(Error::Parameter {
                    key: "pattern",
                    msg: format!(
                        "point {row} at ({}, {}) lies outside the window",
                        p.location.x, p.location.y
                    ),
                });
            }
        }
        if let Some((i, j, _)) = first_pair_within(&self.locations(), 0.0) {
            return Err(Error::Parameter {
                key: "pattern",
                msg: format!("points {i} and {j} share a location"),
            });
        }
        Ok(())
    }

    /// Canonical form for exact comparisons: points sorted by `(x, y, mark)` bit patterns.
    pub fn sorted_tuples(&self) -> Vec<(u64, u64, u64)> {
        let mut v: Vec<_> = self
            .points
            .iter()
            .map(|p| (p.location.x.to_bits(), p.location.y.to_bits(), p.mark.to_bits()))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn same_points(&self, other: &Pattern) -> bool {
        self.sorted_tuples() == other.sorted_tuples()
    }

    /// Reads the `x,y,mark` CSV format. Row numbers in errors are 1-based data rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Csv {
            row: 0,
            msg: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "mark"] {
            return Err(Error::Csv {
                row: 0,
                msg: format!("expected header `x,y,mark`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Csv {
                row,
                msg: e.to_string(),
            })?;
            if rec.len() != 3 {
                return Err(Error::Csv {
                    row,
                    msg: format!("expected 3 fields, found {}", rec.len()),
                });
            }
            let field = |k: usize| -> Result<f64> {
                let s = &rec[k];
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Csv {
                        row,
                        msg: format!("`{s}` is not a finite number"),
                    }),
                }
            };
            points.push(MarkedPoint::new(field(0)?, field(1)?, field(2)?));
        }
        Ok(Self { points })
    }

    /// Writes the `x,y,mark` CSV format with shortest round-trip decimal literals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,mark")?;
        for p in &self.points {
            writeln!(out, "{:?},{:?},{:?}", p.location.x, p.location.y, p.mark)?;
        }
        Ok(())
    }
}

impl FromIterator<MarkedPoint> for Pattern {
    fn from_iter<I: IntoIterator<Item = MarkedPoint>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Pattern {
    type Item = &'a MarkedPoint;
    type IntoIter = std::slice::Iter<'a, MarkedPoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// The retained subset `a ⊆ x`, as sorted indices into the parent pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    retained: Vec<usize>,
    parent_len: usize,
}

impl Action {
    pub fn new(mut retained: Vec<usize>, parent: &Pattern) -> Result<Self> {
        retained.sort_unstable();
        if let Some(&last) = retained.last() {
            if last >= parent.len() {
                return Err(Error::InvalidAction(format!(
                    "index {last} out of range for a pattern of {} points",
                    parent.len()
                )));
            }
        }
        if retained.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAction("duplicate index".into()));
        }
        Ok(Self {
            retained,
            parent_len: parent.len(),
        })
    }

    /// Builds the action from a per-point removal predicate.
    pub fn from_removal<F: FnMut(usize, &MarkedPoint) -> bool>(parent: &Pattern, mut remove: F) -> Self {
        let retained = parent
            .iter()
            .enumerate()
            .filter(|(i, p)| !remove(*i, p))
            .map(|(i, _)| i)
            .collect();
        Self {
            retained,
            parent_len: parent.len(),
        }
    }

    pub fn keep_all(parent: &Pattern) -> Self {
        Self::from_removal(parent, |_, _| false)
    }

    pub fn remove_all(parent: &Pattern) -> Self {
        Self::from_removal(parent, |_, _| true)
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn removed_count(&self) -> usize {
        self.parent_len - self.retained.len()
    }

    fn check_parent(&self, x: &Pattern) -> Result<()> {
        if self.parent_len != x.len() {
            return Err(Error::InvalidAction(format!(
                "action built for {} points applied to a pattern of {}",
                self.parent_len,
                x.len()
            )));
        }
        Ok(())
    }

    /// Retained points as a new pattern.
    pub fn apply(&self, x: &Pattern) -> Result<Pattern> {
        self.check_parent(x)?;
        Ok(self.retained.iter().map(|&i| x.points[i]).collect())
    }

    /// Removed points, `x \ a`.
    pub fn removed(&self, x: &Pattern) -> Result<Pattern> {
        self.check_parent(x)?;
        let mut keep = vec![false; x.len()];
        for &i in &self.retained {
            keep[i] = true;
        }
        Ok(x.iter().zip(keep).filter(|(_, k)| !k).map(|(p, _)| *p).collect())
    }
}

pub fn mark_sum(x: &Pattern) -> f64 {
    x.marks().sum()
}

/// `R · Σ m` over the removed points `x \ a`.
pub fn reward(x: &Pattern, a: &Action, r: f64) -> Result<f64> {
    Ok(r * mark_sum(&a.removed(x)?))
}

/// True iff every pair of locations is strictly more than `hc` apart.
pub fn is_hardcore(x: &Pattern, hc: f64) -> bool {
    first_pair_within(&x.locations(), hc).is_none()
}

/// Fails with the first offending pair when `x` breaks the hard core.
pub fn check_hardcore(x: &Pattern, hc: f64) -> Result<()> {
    match first_pair_within(&x.locations(), hc) {
        Some((i, j, distance)) => Err(Error::HardcoreViolation { i, j, distance, hc }),
        None => Ok(()),
    }
}
