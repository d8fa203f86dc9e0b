//! Point-line incidences in the affine plane F_q^2 and in PG(2, q).
//!
//! A classical CHSH_q strategy is the same thing as a *legal* configuration:
//! `q` points with distinct abscissae and `q` non-vertical lines with
//! distinct slopes. Alice's table gives the points `(x, f(x))`, Bob's gives
//! the lines `z2 = y z1 - g(y)`, and winning input pairs are exactly the
//! incidences.

mod constructions;
mod projective;
mod regularize;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Element, Field};
use crate::game::Strategy;

pub use constructions::{
    grid_construction, icbrt, subfield_construction, subspace_construction, subspace_parameters, SubspaceConstruction,
    SubspaceParameters,
};
pub use projective::{census, Census, ProjConfig, ProjLine, ProjPoint, ProjTransform};
pub use regularize::{
    dedup_to_legal, random_projective_regularize, slope_collision_probability, transform_config, RegularizationStats,
    RegularizeOptions, SlopeCollision, TransformedConfig,
};

/// An affine point `(z1, z2)`.
pub type Point = (Element, Element);

/// The non-vertical line `{(z1, z2) : z2 = slope * z1 - intercept}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(Element, Element)", into = "(Element, Element)")]
pub struct Line {
    pub slope: Element,
    pub intercept: Element,
}

impl Line {
    pub fn new(slope: Element, intercept: Element) -> Self {
        Line { slope, intercept }
    }

    /// `y = c x + d`, i.e. intercept `-d`.
    pub fn from_slope_offset(field: &Field, c: Element, d: Element) -> Self {
        Line { slope: c, intercept: field.neg(d) }
    }

    #[inline]
    pub fn contains(&self, field: &Field, p: Point) -> bool {
        field.sub(field.mul(self.slope, p.0), self.intercept) == p.1
    }

    /// Ordinate of the line above `x`.
    #[inline]
    pub fn at(&self, field: &Field, x: Element) -> Element {
        field.sub(field.mul(self.slope, x), self.intercept)
    }
}

impl From<(Element, Element)> for Line {
    fn from((slope, intercept): (Element, Element)) -> Self {
        Line { slope, intercept }
    }
}

impl From<Line> for (Element, Element) {
    fn from(l: Line) -> Self {
        (l.slope, l.intercept)
    }
}

/// Points and lines of the affine plane, each kept sorted and duplicate-free.
/// Serializes as `{q, points: [[x, y], ..], lines: [[a, b], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub q: u32,
    pub points: Vec<Point>,
    pub lines: Vec<Line>,
}

impl Config {
    pub fn new(q: u32, mut points: Vec<Point>, mut lines: Vec<Line>) -> Self {
        points.sort_unstable();
        points.dedup();
        lines.sort_unstable();
        lines.dedup();
        Config { q, points, lines }
    }

    /// Re-establishes sortedness and uniqueness after deserialization and
    /// checks every coordinate against the field.
    pub fn normalized(self, field: &Field) -> Result<Self> {
        if self.q != field.q() {
            return Err(Error::InvalidInput(format!("configuration is over F_{}, expected F_{}", self.q, field.q())));
        }
        let out_of_range = self
            .points
            .iter()
            .flat_map(|p| [p.0, p.1])
            .chain(self.lines.iter().flat_map(|l| [l.slope, l.intercept]))
            .find(|e| e.0 >= field.q());
        if let Some(e) = out_of_range {
            return Err(Error::ElementOutOfRange { value: e.0 as u64, q: field.q() as u64 });
        }
        Ok(Config::new(self.q, self.points, self.lines))
    }
}

/// Number of `(point, line)` pairs with the point on the line.
pub fn incidences(field: &Field, c: &Config) -> u64 {
    let mut columns: BTreeMap<Element, Vec<Element>> = BTreeMap::new();
    for &(x, y) in &c.points {
        columns.entry(x).or_default().push(y);
    }
    for ys in columns.values_mut() {
        ys.sort_unstable();
    }
    let count_line = |l: &Line| -> u64 {
        columns.iter().filter(|(&x, ys)| ys.binary_search(&l.at(field, x)).is_ok()).count() as u64
    };
    if c.lines.len() * columns.len() > 1 << 16 {
        c.lines.par_iter().map(count_line).sum()
    } else {
        c.lines.iter().map(count_line).sum()
    }
}

/// Legal means: at most `q` points, pairwise distinct abscissae, and at most
/// `q` lines, pairwise distinct slopes.
pub fn check_legal(field: &Field, c: &Config) -> Result<()> {
    let q = field.order();
    if c.points.len() > q || c.lines.len() > q {
        return Err(Error::IllegalConfig(format!(
            "{} points and {} lines exceed q = {q}",
            c.points.len(),
            c.lines.len()
        )));
    }
    let mut seen = vec![false; q];
    for p in &c.points {
        if std::mem::replace(&mut seen[p.0.index()], true) {
            return Err(Error::IllegalConfig(format!("two points share abscissa {}", p.0)));
        }
    }
    let mut seen = vec![false; q];
    for l in &c.lines {
        if std::mem::replace(&mut seen[l.slope.index()], true) {
            return Err(Error::IllegalConfig(format!("two lines share slope {}", l.slope)));
        }
    }
    Ok(())
}

pub fn is_legal(field: &Field, c: &Config) -> bool {
    check_legal(field, c).is_ok()
}

/// Points `(x, f(x))` and lines `z2 = y z1 - g(y)`.
pub fn strategy_to_config(field: &Field, s: &Strategy) -> Result<Config> {
    s.validate(field)?;
    let points = field.elements().map(|x| (x, s.f[x.index()])).collect();
    let lines = field.elements().map(|y| Line::new(y, s.g[y.index()])).collect();
    Ok(Config::new(field.q(), points, lines))
}

/// Inverse of [`strategy_to_config`] on legal configurations; inputs with no
/// point (or no line) answer 0.
pub fn config_to_strategy(field: &Field, c: &Config) -> Result<Strategy> {
    check_legal(field, c)?;
    let mut s = Strategy::zero(field);
    for &(x, y) in &c.points {
        s.f[x.index()] = y;
    }
    for l in &c.lines {
        s.g[l.slope.index()] = l.intercept;
    }
    Ok(s)
}

/// `|P|^{3/4} |L|^{3/4} + |P| + |L|`, valid for any configuration.
pub fn trivial_incidence_bound(points: u64, lines: u64) -> f64 {
    let (np, nl) = (points as f64, lines as f64);
    (np * nl).powf(0.75) + np + nl
}
