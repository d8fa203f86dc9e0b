//! The projective plane PG(2, q) and its collineations from PGL(3, q).
//!
//! Points and lines are both homogeneous triples scaled so the first nonzero
//! coordinate is 1. A point `(x:y:z)` lies on a line `(l:m:n)` when
//! `lx + my + nz = 0`. The affine chart is `z != 0`, the line at infinity is
//! `(0:0:1)` and the vertical direction is the point `(0:1:0)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Config, Line, Point};
use crate::error::{Error, Result};
use crate::field::{Element, Field};

type Triple = [Element; 3];

fn canonical(field: &Field, v: Triple) -> Option<Triple> {
    let lead = v.iter().copied().find(|e| !e.is_zero())?;
    let s = field.inv(lead).ok()?;
    Some([field.mul(v[0], s), field.mul(v[1], s), field.mul(v[2], s)])
}

fn dot(field: &Field, a: &Triple, b: &Triple) -> Element {
    let mut acc = Element::ZERO;
    for i in 0..3 {
        acc = field.add(acc, field.mul(a[i], b[i]));
    }
    acc
}

fn cross(field: &Field, a: &Triple, b: &Triple) -> Triple {
    let m = |i: usize, j: usize| field.sub(field.mul(a[i], b[j]), field.mul(a[j], b[i]));
    [m(1, 2), m(2, 0), m(0, 1)]
}

/// All canonical triples in increasing lexicographic order:
/// `(0:0:1)`, then `(0:1:z)`, then `(1:y:z)`.
fn all_triples(field: &Field) -> Vec<Triple> {
    let mut out = Vec::with_capacity(field.order() * field.order() + field.order() + 1);
    out.push([Element::ZERO, Element::ZERO, Element::ONE]);
    for z in field.elements() {
        out.push([Element::ZERO, Element::ONE, z]);
    }
    for y in field.elements() {
        for z in field.elements() {
            out.push([Element::ONE, y, z]);
        }
    }
    out
}

/// A point of PG(2, q) in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint(pub [Element; 3]);

/// A line of PG(2, q) in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjLine(pub [Element; 3]);

impl ProjPoint {
    pub fn new(field: &Field, v: [Element; 3]) -> Result<Self> {
        canonical(field, v)
            .map(ProjPoint)
            .ok_or_else(|| Error::InvalidInput("the zero vector is not a projective point".into()))
    }

    pub fn from_affine(p: Point) -> Self {
        ProjPoint([p.0, p.1, Element::ONE])
    }

    /// `(x/z, y/z)`, or `None` on the line at infinity.
    pub fn to_affine(&self, field: &Field) -> Option<Point> {
        let [x, y, z] = self.0;
        let zi = field.inv(z).ok()?;
        Some((field.mul(x, zi), field.mul(y, zi)))
    }

    pub fn is_at_infinity(&self) -> bool {
        self.0[2].is_zero()
    }

    /// The vertical direction `(0:1:0)`.
    pub fn vertical_infinity() -> Self {
        ProjPoint([Element::ZERO, Element::ONE, Element::ZERO])
    }

    pub fn all(field: &Field) -> Vec<ProjPoint> {
        all_triples(field).into_iter().map(ProjPoint).collect()
    }

    /// Line through two distinct points.
    pub fn join(&self, field: &Field, other: &ProjPoint) -> Option<ProjLine> {
        canonical(field, cross(field, &self.0, &other.0)).map(ProjLine)
    }
}

impl ProjLine {
    pub fn new(field: &Field, v: [Element; 3]) -> Result<Self> {
        canonical(field, v)
            .map(ProjLine)
            .ok_or_else(|| Error::InvalidInput("the zero vector is not a projective line".into()))
    }

    /// `z2 = a z1 - b` is `a x - y - b z = 0`.
    pub fn from_affine(field: &Field, l: &Line) -> Self {
        let v = [l.slope, field.neg(Element::ONE), field.neg(l.intercept)];
        ProjLine(canonical(field, v).expect("second coordinate is nonzero"))
    }

    /// The affine line, or `None` for vertical lines and the line at infinity.
    pub fn to_affine(&self, field: &Field) -> Option<Line> {
        let [l, m, n] = self.0;
        let mi = field.inv(m).ok()?;
        Some(Line::new(field.neg(field.mul(l, mi)), field.mul(n, mi)))
    }

    pub fn at_infinity() -> Self {
        ProjLine([Element::ZERO, Element::ZERO, Element::ONE])
    }

    pub fn is_at_infinity(&self) -> bool {
        *self == Self::at_infinity()
    }

    /// Passes through `(0:1:0)` without being the line at infinity.
    pub fn is_vertical(&self) -> bool {
        self.0[1].is_zero() && !self.is_at_infinity()
    }

    pub fn contains(&self, field: &Field, p: &ProjPoint) -> bool {
        dot(field, &self.0, &p.0).is_zero()
    }

    pub fn all(field: &Field) -> Vec<ProjLine> {
        all_triples(field).into_iter().map(ProjLine).collect()
    }

    /// Intersection with another line.
    pub fn meet(&self, field: &Field, other: &ProjLine) -> Option<ProjPoint> {
        canonical(field, cross(field, &self.0, &other.0)).map(ProjPoint)
    }

    /// The `q + 1` points of the line, sorted.
    pub fn points(&self, field: &Field) -> Vec<ProjPoint> {
        let [l0, l1, l2] = self.0;
        let (zero, one) = (Element::ZERO, Element::ONE);
        let (a, b) = if !l0.is_zero() {
            ([field.neg(l1), l0, zero], [field.neg(l2), zero, l0])
        } else if !l1.is_zero() {
            ([one, zero, zero], [zero, field.neg(l2), l1])
        } else {
            ([one, zero, zero], [zero, one, zero])
        };
        let mut out: Vec<ProjPoint> = std::iter::once(a)
            .chain(field.elements().map(|t| {
                [
                    field.add(b[0], field.mul(t, a[0])),
                    field.add(b[1], field.mul(t, a[1])),
                    field.add(b[2], field.mul(t, a[2])),
                ]
            }))
            .map(|v| ProjPoint(canonical(field, v).expect("independent spanning pair")))
            .collect();
        out.sort_unstable();
        out
    }
}

/// An invertible 3x3 matrix acting on points by `p -> M p` and on lines by
/// `l -> l M^{-1}`, which preserves incidence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjTransform {
    m: [[Element; 3]; 3],
    inv: [[Element; 3]; 3],
}

fn det3(field: &Field, m: &[[Element; 3]; 3]) -> Element {
    let t = |a: usize, b: usize, c: usize| field.mul(m[0][a], field.mul(m[1][b], m[2][c]));
    let pos = field.add(field.add(t(0, 1, 2), t(1, 2, 0)), t(2, 0, 1));
    let neg = field.add(field.add(t(2, 1, 0), t(0, 2, 1)), t(1, 0, 2));
    field.sub(pos, neg)
}

fn inverse3(field: &Field, m: &[[Element; 3]; 3]) -> Option<[[Element; 3]; 3]> {
    let d = field.inv(det3(field, m)).ok()?;
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| {
        field.sub(field.mul(m[r0][c0], m[r1][c1]), field.mul(m[r0][c1], m[r1][c0]))
    };
    // adjugate (transposed cofactors)
    let adj = [
        [c(1, 1, 2, 2), c(0, 2, 2, 1), c(0, 1, 1, 2)],
        [c(1, 2, 2, 0), c(0, 0, 2, 2), c(0, 2, 1, 0)],
        [c(1, 0, 2, 1), c(0, 1, 2, 0), c(0, 0, 1, 1)],
    ];
    Some(adj.map(|row| row.map(|e| field.mul(e, d))))
}

impl ProjTransform {
    pub fn new(field: &Field, m: [[Element; 3]; 3]) -> Result<Self> {
        let inv = inverse3(field, &m)
            .ok_or_else(|| Error::InvalidInput("singular matrix is not a projective transform".into()))?;
        Ok(ProjTransform { m, inv })
    }

    pub fn identity() -> Self {
        let (o, z) = (Element::ONE, Element::ZERO);
        let m = [[o, z, z], [z, o, z], [z, z, o]];
        ProjTransform { m, inv: m }
    }

    pub fn matrix(&self) -> &[[Element; 3]; 3] {
        &self.m
    }

    pub fn determinant(&self, field: &Field) -> Element {
        det3(field, &self.m)
    }

    /// Uniformly random invertible matrix, by rejection.
    pub fn random<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> Self {
        loop {
            let m = [(); 3].map(|_| [(); 3].map(|_| Element(rng.random_range(0..field.q()))));
            if let Ok(t) = Self::new(field, m) {
                return t;
            }
        }
    }

    /// The transform sending `line_at_infinity` to `z = 0`, `vertical` to
    /// `(0:1:0)`, `second` to `(1:0:0)` and `origin` to `(0:0:1)`.
    ///
    /// `vertical` and `second` must be distinct points of `line_at_infinity`
    /// and `origin` must lie off it.
    pub fn from_infinity(
        field: &Field,
        line_at_infinity: &ProjLine,
        vertical: &ProjPoint,
        second: &ProjPoint,
        origin: &ProjPoint,
    ) -> Result<Self> {
        if !line_at_infinity.contains(field, vertical)
            || !line_at_infinity.contains(field, second)
            || vertical == second
            || line_at_infinity.contains(field, origin)
        {
            return Err(Error::InvalidInput("need two distinct points on the chosen line and one point off it".into()));
        }
        // Columns of M^{-1} are the preimages of e1, e2, e3.
        let cols = [second.0, vertical.0, origin.0];
        let minv = [0, 1, 2].map(|r| [cols[0][r], cols[1][r], cols[2][r]]);
        let m = inverse3(field, &minv)
            .ok_or_else(|| Error::InvariantViolation("frame points are not in general position".into()))?;
        Ok(ProjTransform { m, inv: minv })
    }

    pub fn apply_point(&self, field: &Field, p: &ProjPoint) -> ProjPoint {
        let v = [0, 1, 2].map(|r| dot(field, &self.m[r], &p.0));
        ProjPoint(canonical(field, v).expect("invertible map"))
    }

    pub fn apply_line(&self, field: &Field, l: &ProjLine) -> ProjLine {
        let v = [0, 1, 2].map(|c| dot(field, &l.0, &[self.inv[0][c], self.inv[1][c], self.inv[2][c]]));
        ProjLine(canonical(field, v).expect("invertible map"))
    }
}

/// Points and lines of PG(2, q).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProjConfig {
    pub points: Vec<ProjPoint>,
    pub lines: Vec<ProjLine>,
}

impl ProjConfig {
    pub fn from_affine(field: &Field, c: &Config) -> Self {
        ProjConfig {
            points: c.points.iter().map(|&p| ProjPoint::from_affine(p)).collect(),
            lines: c.lines.iter().map(|l| ProjLine::from_affine(field, l)).collect(),
        }
    }

    pub fn incidences(&self, field: &Field) -> u64 {
        self.lines.iter().map(|l| self.points.iter().filter(|p| l.contains(field, p)).count() as u64).sum()
    }

    pub fn apply(&self, field: &Field, t: &ProjTransform) -> Self {
        ProjConfig {
            points: self.points.iter().map(|p| t.apply_point(field, p)).collect(),
            lines: self.lines.iter().map(|l| t.apply_line(field, l)).collect(),
        }
    }
}

/// Sizes of PG(2, q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub points: u64,
    pub lines: u64,
    pub points_per_line: u64,
    /// Whether the numbers were counted rather than taken from the formula.
    pub enumerated: bool,
}

/// Largest q for which [`census`] counts by enumeration.
const CENSUS_ENUMERATION_CAP: u32 = 32;

pub fn census(field: &Field) -> Result<Census> {
    let q = field.q() as u64;
    if field.q() > CENSUS_ENUMERATION_CAP {
        return Ok(Census { points: q * q + q + 1, lines: q * q + q + 1, points_per_line: q + 1, enumerated: false });
    }
    let points = ProjPoint::all(field);
    let lines = ProjLine::all(field);
    let mut per_line = lines.iter().map(|l| points.iter().filter(|p| l.contains(field, p)).count() as u64);
    let first = per_line.next().unwrap_or(0);
    if per_line.any(|c| c != first) {
        return Err(Error::InvariantViolation("lines of unequal size".into()));
    }
    Ok(Census { points: points.len() as u64, lines: lines.len() as u64, points_per_line: first, enumerated: true })
}
