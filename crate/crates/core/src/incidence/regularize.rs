//! Turning an arbitrary configuration into a legal one with a random
//! projective transformation.
//!
//! Procedure, with every random draw taken in this order from a ChaCha8
//! stream keyed by the seed:
//!
//! 1. optionally subsample points and lines down to `floor(q/2)` each;
//! 2. lift to PG(2, q);
//! 3. pick a uniform line `l_inf` (uniform nonzero triple, canonicalized),
//!    then a uniform point `V` of `l_inf` as the new vertical direction,
//!    then a uniform second point of `l_inf` and a uniform point off `l_inf`
//!    to fix the remaining affine frame;
//! 4. map back to the affine chart, dropping points on `l_inf`, the input
//!    line equal to `l_inf` if any, and lines through `V` (they become
//!    vertical);
//! 5. keep the smallest point on each vertical line and the smallest line
//!    of each slope.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::projective::{ProjLine, ProjPoint, ProjTransform};
use super::{check_legal, incidences, Config, Line, Point};
use crate::error::{Error, Result};
use crate::field::{Element, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularizeOptions {
    /// Subsample to at most `floor(q/2)` points and lines first.
    pub downsample: bool,
}

impl Default for RegularizeOptions {
    fn default() -> Self {
        RegularizeOptions { downsample: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularizationStats {
    pub seed: u64,
    pub input_points: usize,
    pub input_lines: usize,
    pub input_incidences: u64,
    pub sampled_points: usize,
    pub sampled_lines: usize,
    pub sampled_incidences: u64,
    pub line_at_infinity: ProjLine,
    pub vertical_point: ProjPoint,
    pub points_at_infinity: usize,
    pub lines_at_infinity: usize,
    pub vertical_lines: usize,
    /// Incidences among the mapped affine points and lines, before dedup.
    pub transformed_incidences: u64,
    pub retained_points: usize,
    pub retained_lines: usize,
    pub retained_incidences: u64,
}

/// Affine image of a configuration under a projective map, before dedup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformedConfig {
    pub points: Vec<Point>,
    pub lines: Vec<Line>,
    pub points_at_infinity: usize,
    pub lines_at_infinity: usize,
    pub vertical_lines: usize,
}

pub fn transform_config(field: &Field, c: &Config, t: &ProjTransform) -> TransformedConfig {
    let mut out = TransformedConfig {
        points: Vec::with_capacity(c.points.len()),
        lines: Vec::with_capacity(c.lines.len()),
        points_at_infinity: 0,
        lines_at_infinity: 0,
        vertical_lines: 0,
    };
    for &p in &c.points {
        match t.apply_point(field, &ProjPoint::from_affine(p)).to_affine(field) {
            Some(a) => out.points.push(a),
            None => out.points_at_infinity += 1,
        }
    }
    for l in &c.lines {
        let image = t.apply_line(field, &ProjLine::from_affine(field, l));
        if image.is_at_infinity() {
            out.lines_at_infinity += 1;
        } else if let Some(a) = image.to_affine(field) {
            out.lines.push(a);
        } else {
            out.vertical_lines += 1;
        }
    }
    out
}

/// Smallest point per abscissa and smallest line per slope.
pub fn dedup_to_legal(q: u32, points: Vec<Point>, lines: Vec<Line>) -> Config {
    let mut c = Config::new(q, points, lines);
    c.points.dedup_by_key(|p| p.0);
    c.lines.dedup_by_key(|l| l.slope);
    c
}

fn subsample<T: Clone, R: Rng + ?Sized>(items: &[T], cap: usize, rng: &mut R) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let mut idx = sample(rng, items.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i].clone()).collect()
}

fn random_line<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> ProjLine {
    loop {
        let v = [(); 3].map(|_| Element(rng.random_range(0..field.q())));
        if let Ok(l) = ProjLine::new(field, v) {
            return l;
        }
    }
}

fn random_point_off<R: Rng + ?Sized>(field: &Field, l: &ProjLine, rng: &mut R) -> ProjPoint {
    loop {
        let v = [(); 3].map(|_| Element(rng.random_range(0..field.q())));
        if let Ok(p) = ProjPoint::new(field, v) {
            if !l.contains(field, &p) {
                return p;
            }
        }
    }
}

/// Makes `c` legal while keeping, in expectation, a constant fraction of its
/// incidences. The output always passes [`check_legal`].
pub fn random_projective_regularize(
    field: &Field,
    c: &Config,
    seed: u64,
    opts: RegularizeOptions,
) -> Result<(Config, RegularizationStats)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = field.order() / 2;
    let (points, lines) = if opts.downsample {
        (subsample(&c.points, cap, &mut rng), subsample(&c.lines, cap, &mut rng))
    } else {
        (c.points.clone(), c.lines.clone())
    };
    let sampled = Config::new(field.q(), points, lines);

    let linf = random_line(field, &mut rng);
    let on_line = linf.points(field);
    let vi = rng.random_range(0..on_line.len());
    let vertical = on_line[vi];
    let mut wi = rng.random_range(0..on_line.len() - 1);
    if wi >= vi {
        wi += 1;
    }
    let second = on_line[wi];
    let origin = random_point_off(field, &linf, &mut rng);
    let t = ProjTransform::from_infinity(field, &linf, &vertical, &second, &origin)?;

    let moved = transform_config(field, &sampled, &t);
    let transformed_incidences = incidences(field, &Config::new(field.q(), moved.points.clone(), moved.lines.clone()));
    let out = dedup_to_legal(field.q(), moved.points, moved.lines);
    check_legal(field, &out).map_err(|e| Error::InvariantViolation(format!("regularized output not legal: {e}")))?;
    let retained_incidences = incidences(field, &out);
    let stats = RegularizationStats {
        seed,
        input_points: c.points.len(),
        input_lines: c.lines.len(),
        input_incidences: incidences(field, c),
        sampled_points: sampled.points.len(),
        sampled_lines: sampled.lines.len(),
        sampled_incidences: incidences(field, &sampled),
        line_at_infinity: linf,
        vertical_point: vertical,
        points_at_infinity: moved.points_at_infinity,
        lines_at_infinity: moved.lines_at_infinity,
        vertical_lines: moved.vertical_lines,
        transformed_incidences,
        retained_points: out.points.len(),
        retained_lines: out.lines.len(),
        retained_incidences,
    };
    Ok((out, stats))
}

/// Exact probabilities that two fixed lines become parallel when the line
/// at infinity is chosen uniformly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeCollision {
    /// Over every `l_inf != l1`, counting `l_inf = l2` as a collision: the
    /// event that `l_inf` crosses `l1` where `l2` does.
    pub probability: BigRational,
    /// Over every `l_inf` other than `l1` and `l2`.
    pub strict: BigRational,
}

/// Enumerates every candidate line at infinity, maps both lines with a
/// concrete frame built on it, and checks whether the images meet on the
/// new line at infinity.
pub fn slope_collision_probability(field: &Field, l1: &Line, l2: &Line) -> Result<SlopeCollision> {
    if l1 == l2 {
        return Err(Error::InvalidInput("lines must be distinct".into()));
    }
    let (p1, p2) = (ProjLine::from_affine(field, l1), ProjLine::from_affine(field, l2));
    let all_points = ProjPoint::all(field);
    let (mut hits, mut total, mut strict_hits, mut strict_total) = (0i64, 0i64, 0i64, 0i64);
    for linf in ProjLine::all(field) {
        if linf == p1 {
            continue;
        }
        total += 1;
        if linf == p2 {
            hits += 1;
            continue;
        }
        let on = linf.points(field);
        let origin = all_points.iter().find(|p| !linf.contains(field, p)).expect("a line never covers the plane");
        let t = ProjTransform::from_infinity(field, &linf, &on[0], &on[1], origin)?;
        let (i1, i2) = (t.apply_line(field, &p1), t.apply_line(field, &p2));
        let parallel = i1.meet(field, &i2).map(|x| x.is_at_infinity()).unwrap_or(true);
        strict_total += 1;
        if parallel {
            hits += 1;
            strict_hits += 1;
        }
    }
    Ok(SlopeCollision {
        probability: BigRational::new(BigInt::from(hits), BigInt::from(total)),
        strict: BigRational::new(BigInt::from(strict_hits), BigInt::from(strict_total)),
    })
}
