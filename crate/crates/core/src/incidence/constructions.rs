//! Explicit configurations with many incidences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Config, Line};
use crate::error::{Error, Result};
use crate::field::Field;

/// Floor of the cube root.
pub fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt().round() as u64;
    while r.pow(3) > n {
        r -= 1;
    }
    while (r + 1).pow(3) <= n {
        r += 1;
    }
    r
}

/// For even degree: points `K x K` and lines `z2 = c z1 - d` with
/// `c, d in K`, where `K` is the subfield of order `sqrt(q)`. Every line
/// meets exactly `|K|` points, giving `q^{3/2}` incidences.
pub fn subfield_construction(field: &Field) -> Result<Config> {
    if !field.s().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "subfield construction needs an even extension degree, got s = {}",
            field.s()
        )));
    }
    let k = field.subfield_elements(field.s() / 2)?;
    let points = k.iter().flat_map(|&a| k.iter().map(move |&b| (a, b))).collect();
    let lines = k.iter().flat_map(|&c| k.iter().map(move |&d| Line::new(c, d))).collect();
    Ok(Config::new(field.q(), points, lines))
}

/// Prime fields only: points `[n1] x [n2]` with `n1 = floor(q^{1/3})` and
/// `n2 = floor(q^{2/3})`, lines `y = c x + d` with `c < floor(n1 / 2)` and
/// `d < floor(n2 / 2)`. No sum `c x + d` reaches `n2`, so there is no modular
/// wraparound and each line meets exactly `n1` points.
pub fn grid_construction(field: &Field) -> Result<Config> {
    if !field.is_prime_field() {
        return Err(Error::InvalidInput(format!("grid construction needs a prime field, got q = {}", field.q())));
    }
    let q = field.q() as u64;
    let n1 = icbrt(q);
    let n2 = icbrt(q * q);
    let points = (0..n1)
        .flat_map(|x| (0..n2).map(move |y| (x, y)))
        .map(|(x, y)| (field.from_int(x), field.from_int(y)))
        .collect();
    let lines = (0..n1 / 2)
        .flat_map(|c| (0..n2 / 2).map(move |d| (c, d)))
        .map(|(c, d)| Line::from_slope_offset(field, field.from_int(c), field.from_int(d)))
        .collect();
    Ok(Config::new(field.q(), points, lines))
}

/// Dimensions used by the subspace construction for odd `s >= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceParameters {
    /// dim A
    pub a: u32,
    /// dim B
    pub b: u32,
    /// dim C = b - a + 1
    pub c: u32,
    /// Each line is kept with probability `p^-thinning`.
    pub thinning: u32,
}

pub fn subspace_parameters(s: u32) -> Result<SubspaceParameters> {
    if s < 3 || s.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("subspace construction needs odd s >= 3, got s = {s}")));
    }
    let k = s / 3;
    let (b, thinning) = match s % 3 {
        0 => (2 * k, 1),
        1 => (2 * k + 1, 2),
        // the unique integer in [2s/3 - 1/2, 2s/3 - 1/3]
        _ => (2 * k + 1, 0),
    };
    let a = s - b;
    Ok(SubspaceParameters { a, b, c: b - a + 1, thinning })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceConstruction {
    pub params: SubspaceParameters,
    /// `P = A x B` with every line of `C x B`, before thinning.
    pub full: Config,
    /// The same points with the randomly thinned line set.
    pub thinned: Config,
    /// `|A| |B| |C|`.
    pub predicted_incidences: u64,
}

/// Odd degree `s >= 3`: with `g` primitive, `A`, `B`, `C` are the F_p-spans
/// of the first `a`, `b`, `b - a + 1` powers of `g`. Since `C A` lies in `B`,
/// every line `y = c x + d` (`c in C`, `d in B`) meets all of `{x} x B` for
/// `x in A`, i.e. exactly `|A|` points.
pub fn subspace_construction(field: &Field, seed: u64) -> Result<SubspaceConstruction> {
    let params = subspace_parameters(field.s())?;
    let g = field.primitive_element();
    let span_a = field.power_span(g, params.a);
    let span_b = field.power_span(g, params.b);
    let span_c = field.power_span(g, params.c);
    let points: Vec<_> = span_a.iter().flat_map(|&x| span_b.iter().map(move |&y| (x, y))).collect();
    let lines: Vec<Line> = span_c
        .iter()
        .flat_map(|&c| span_b.iter().map(move |&d| (c, d)))
        .map(|(c, d)| Line::from_slope_offset(field, c, d))
        .collect();
    let keep = 1.0 / (field.p() as f64).powi(params.thinning as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sorted = lines.clone();
    sorted.sort_unstable();
    let thinned_lines: Vec<Line> =
        if params.thinning == 0 { sorted } else { sorted.into_iter().filter(|_| rng.random::<f64>() < keep).collect() };
    let predicted = (span_a.len() * span_b.len() * span_c.len()) as u64;
    Ok(SubspaceConstruction {
        params,
        full: Config::new(field.q(), points.clone(), lines),
        thinned: Config::new(field.q(), points, thinned_lines),
        predicted_incidences: predicted,
    })
}
