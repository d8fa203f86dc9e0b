//! Bilinear character sums over unit vectors.
//!
//! For unit vectors `u_x, v_y in C^n` indexed by F_q and a nontrivial
//! additive character `chi`,
//! `|sum_{x,y} chi(-x y) <u_x, v_y>| <= q^{3/2}`, with the inner product
//! conjugate-linear in its first argument. The bound is attained by the
//! Fourier family `u_x = e_x`, `v_y(i) = chi(i y) / sqrt(q)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Character, Field};

/// Tolerance on every bound check.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Tolerance on unit norms.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// `q` vectors `u_x` and `q` vectors `v_y` in `C^n`, all of norm 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFamily {
    pub n: usize,
    pub u: Vec<Vec<Complex64>>,
    pub v: Vec<Vec<Complex64>>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let r = norm(&v);
        if r > 1e-12 {
            return v.into_iter().map(|z| z / r).collect();
        }
    }
}

impl VectorFamily {
    pub fn new(n: usize, u: Vec<Vec<Complex64>>, v: Vec<Vec<Complex64>>) -> Result<Self> {
        let fam = VectorFamily { n, u, v };
        fam.validate()?;
        Ok(fam)
    }

    pub fn q(&self) -> usize {
        self.u.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.u.len() != self.v.len() {
            return Err(Error::InvalidInput("u and v must have the same number of vectors".into()));
        }
        for w in self.u.iter().chain(&self.v) {
            if w.len() != self.n {
                return Err(Error::InvalidInput(format!(
                    "vector of dimension {} in a family of dimension {}",
                    w.len(),
                    self.n
                )));
            }
            if (norm(w) - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::InvalidInput(format!("vector of norm {}", norm(w))));
            }
        }
        Ok(())
    }

    /// Independent uniformly random unit vectors.
    pub fn random<R: Rng + ?Sized>(q: usize, n: usize, rng: &mut R) -> Self {
        let u = (0..q).map(|_| random_unit(n, rng)).collect();
        let v = (0..q).map(|_| random_unit(n, rng)).collect();
        VectorFamily { n, u, v }
    }

    /// Unit vectors whose entries are all `+-1/sqrt(n)`.
    pub fn random_real_signs<R: Rng + ?Sized>(q: usize, n: usize, rng: &mut R) -> Self {
        let s = 1.0 / (n as f64).sqrt();
        let mut draw = || -> Vec<Complex64> {
            (0..n).map(|_| Complex64::new(if rng.random::<bool>() { s } else { -s }, 0.0)).collect()
        };
        let u = (0..q).map(|_| draw()).collect();
        let v = (0..q).map(|_| draw()).collect();
        VectorFamily { n, u, v }
    }

    /// `u_x = e_x`, `v_y(i) = chi(i y) / sqrt(q)` in dimension `q`.
    pub fn fourier(field: &Field, chi: &Character) -> Self {
        let q = field.order();
        let s = 1.0 / (q as f64).sqrt();
        let u = (0..q).map(|x| (0..q).map(|i| Complex64::new(if i == x { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
        let v = field.elements().map(|y| field.elements().map(|i| chi.value(field.mul(i, y)) * s).collect()).collect();
        VectorFamily { n: q, u, v }
    }

    pub fn negate_v(&self) -> Self {
        let v = self.v.iter().map(|w| w.iter().map(|z| -z).collect()).collect();
        VectorFamily { n: self.n, u: self.u.clone(), v }
    }
}

fn check_sizes(field: &Field, fam: &VectorFamily, chi: &Character) -> Result<()> {
    if fam.q() != field.order() || chi.q() != field.q() {
        return Err(Error::InvalidInput(format!(
            "family has {} vectors and character is over F_{}, field has q = {}",
            fam.q(),
            chi.q(),
            field.q()
        )));
    }
    fam.validate()
}

/// `w_x = sum_y chi(-x y) v_y`.
fn alice_targets(field: &Field, chi: &Character, v: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    field
        .elements()
        .map(|x| {
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            for y in field.elements() {
                let c = chi.value(field.neg(field.mul(x, y)));
                for (wi, vi) in w.iter_mut().zip(&v[y.index()]) {
                    *wi += c * vi;
                }
            }
            w
        })
        .collect()
}

/// `w'_y = sum_x chi(x y) u_x`, so that the sum equals `sum_y <w'_y, v_y>`.
fn bob_targets(field: &Field, chi: &Character, u: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    field
        .elements()
        .map(|y| {
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            for x in field.elements() {
                let c = chi.value(field.mul(x, y));
                for (wi, ui) in w.iter_mut().zip(&u[x.index()]) {
                    *wi += c * ui;
                }
            }
            w
        })
        .collect()
}

fn raw_sum(field: &Field, fam: &VectorFamily, chi: &Character) -> f64 {
    let w = alice_targets(field, chi, &fam.v, fam.n);
    fam.u.iter().zip(&w).map(|(u, w)| inner(u, w)).sum::<Complex64>().norm()
}

/// `|sum_{x,y} chi(-x y) <u_x, v_y>|`.
pub fn character_bilinear_sum(field: &Field, fam: &VectorFamily, chi: &Character) -> Result<f64> {
    check_sizes(field, fam, chi)?;
    Ok(raw_sum(field, fam, chi))
}

pub fn bound(q: u32) -> f64 {
    (q as f64).powf(1.5)
}

/// Sum at most `q^{3/2}` up to [`BOUND_TOLERANCE`].
pub fn verify_bound(field: &Field, fam: &VectorFamily, chi: &Character) -> Result<bool> {
    Ok(character_bilinear_sum(field, fam, chi)? <= bound(field.q()) + BOUND_TOLERANCE)
}

/// The three quantities of the Cauchy-Schwarz argument: the sum, the middle
/// term `sqrt(q) sum_i ||u(i)|| ||v(i)||` over coordinate functions, and
/// `q^{3/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainValues {
    pub sum: f64,
    pub middle: f64,
    pub bound: f64,
}

impl ChainValues {
    pub fn holds(&self) -> bool {
        self.sum <= self.middle + BOUND_TOLERANCE && self.middle <= self.bound + BOUND_TOLERANCE
    }
}

pub fn cauchy_schwarz_chain(field: &Field, fam: &VectorFamily, chi: &Character) -> Result<ChainValues> {
    check_sizes(field, fam, chi)?;
    let q = field.q();
    let col = |vs: &[Vec<Complex64>], i: usize| vs.iter().map(|w| w[i].norm_sqr()).sum::<f64>().sqrt();
    let middle = (q as f64).sqrt() * (0..fam.n).map(|i| col(&fam.u, i) * col(&fam.v, i)).sum::<f64>();
    Ok(ChainValues { sum: raw_sum(field, fam, chi), middle, bound: bound(q) })
}

/// Result of alternating maximization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximized {
    pub family: VectorFamily,
    pub value: f64,
    /// Objective after every half-step.
    pub trace: Vec<f64>,
    pub rounds: usize,
}

/// Stop once a full round improves the objective by less than this.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-13;

fn align(targets: Vec<Vec<Complex64>>, current: &mut [Vec<Complex64>]) -> f64 {
    let mut total = 0.0;
    for (t, c) in targets.into_iter().zip(current.iter_mut()) {
        let r = norm(&t);
        total += r;
        if r > 0.0 {
            *c = t.into_iter().map(|z| z / r).collect();
        }
    }
    total
}

/// Alternating maximization from `start`: each half-step sets every `u_x`
/// (then every `v_y`) parallel to its target vector, leaving it unchanged
/// when the target vanishes. The objective after a half-step is the sum of
/// target norms.
pub fn maximize_from(field: &Field, chi: &Character, start: VectorFamily, rounds: usize) -> Result<Maximized> {
    if rounds == 0 {
        return Err(Error::InvalidInput("rounds must be at least 1".into()));
    }
    check_sizes(field, &start, chi)?;
    let mut fam = start;
    let mut trace = Vec::with_capacity(2 * rounds);
    let mut done = 0;
    for _ in 0..rounds {
        let before = trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        let a = align(alice_targets(field, chi, &fam.v, fam.n), &mut fam.u);
        trace.push(a);
        let b = align(bob_targets(field, chi, &fam.u, fam.n), &mut fam.v);
        trace.push(b);
        done += 1;
        if b - before < CONVERGENCE_TOLERANCE {
            break;
        }
    }
    let value = raw_sum(field, &fam, chi);
    Ok(Maximized { family: fam, value, trace, rounds: done })
}

/// [`maximize_from`] a seeded random complex family.
pub fn maximize_sum(field: &Field, chi: &Character, n: usize, seed: u64, rounds: usize) -> Result<Maximized> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    maximize_from(field, chi, VectorFamily::random(field.order(), n, &mut rng), rounds)
}

/// Best of several seeded restarts, run in parallel; ties go to the
/// earliest restart.
pub fn maximize_restarts(
    field: &Field,
    chi: &Character,
    n: usize,
    seed: u64,
    restarts: usize,
    rounds: usize,
) -> Result<Maximized> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| master.random()).collect();
    let runs = seeds.par_iter().map(|&s| maximize_sum(field, chi, n, s, rounds)).collect::<Result<Vec<_>>>()?;
    Ok(runs.into_iter().reduce(|best, r| if r.value > best.value { r } else { best }).unwrap())
}

/// Summary of a batch of random families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub q: u32,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_value: f64,
    pub bound: f64,
    pub max_ratio: f64,
    pub violations: usize,
}

/// Checks the bound on `trials` random families; trial `t` draws from
/// ChaCha stream `t` of `seed`.
pub fn verify_random(field: &Field, chi: &Character, n: usize, trials: usize, seed: u64) -> Result<VerifyReport> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            raw_sum(field, &VectorFamily::random(field.order(), n, &mut rng), chi)
        })
        .collect();
    let b = bound(field.q());
    let max_value = values.iter().cloned().fold(0.0, f64::max);
    Ok(VerifyReport {
        q: field.q(),
        n,
        trials,
        seed,
        max_value,
        bound: b,
        max_ratio: max_value / b,
        violations: values.iter().filter(|&&v| v > b + BOUND_TOLERANCE).count(),
    })
}

/// `q^{-1/2}`. The bias of a regular box on the distributed game is `E^2`,
/// which equals a normalized bilinear character sum over unit vectors; the
/// `q^{3/2}` bound on that sum caps `E` at `q^{-1/2}`.
pub fn implied_bias_ceiling(q: u32) -> f64 {
    1.0 / (q as f64).sqrt()
}

/// `max |(H H^*) - I|` over entries, `H_{x,y} = chi(x y) / sqrt(q)`.
pub fn fourier_unitarity_defect(field: &Field, chi: &Character) -> f64 {
    let q = field.order();
    let s = 1.0 / (q as f64).sqrt();
    let h: Vec<Vec<Complex64>> =
        field.elements().map(|x| field.elements().map(|y| chi.value(field.mul(x, y)) * s).collect()).collect();
    (0..q)
        .into_par_iter()
        .map(|a| {
            (0..q)
                .map(|b| {
                    let entry: Complex64 = (0..q).map(|k| h[a][k] * h[b][k].conj()).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    (entry - Complex64::new(target, 0.0)).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Character values used by the sum, indexed by `(x, y)` row-major.
pub fn kernel(field: &Field, chi: &Character) -> Vec<Complex64> {
    field
        .elements()
        .flat_map(|x| field.elements().map(move |y| (x, y)))
        .map(|(x, y)| chi.value(field.neg(field.mul(x, y))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::additive_character;

    #[test]
    fn q2_all_equal_vectors() {
        let f = Field::new(2, 1).unwrap();
        let chi = additive_character(&f);
        let e = vec![Complex64::new(1.0, 0.0)];
        let fam = VectorFamily::new(1, vec![e.clone(), e.clone()], vec![e.clone(), e]).unwrap();
        assert!((character_bilinear_sum(&f, &fam, &chi).unwrap() - 2.0).abs() < 1e-12);
        assert!(verify_bound(&f, &fam, &chi).unwrap());
    }

    #[test]
    fn fourier_family_is_tight() {
        for (p, s) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1)] {
            let f = Field::new(p, s).unwrap();
            let chi = additive_character(&f);
            let fam = VectorFamily::fourier(&f, &chi);
            fam.validate().unwrap();
            let v = character_bilinear_sum(&f, &fam, &chi).unwrap();
            assert!((v - bound(f.q())).abs() < 1e-9, "q = {}: {v}", f.q());
            let neg = character_bilinear_sum(&f, &fam.negate_v(), &chi).unwrap();
            assert!((neg - v).abs() < 1e-12);
        }
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let f = Field::new(3, 1).unwrap();
        let chi = additive_character(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fam = VectorFamily::random(2, 2, &mut rng);
        assert!(character_bilinear_sum(&f, &fam, &chi).is_err());
        assert!(
            VectorFamily::new(1, vec![vec![Complex64::new(2.0, 0.0)]], vec![vec![Complex64::new(1.0, 0.0)]]).is_err()
        );
    }

    #[test]
    fn ceiling_matches_tsirelson() {
        assert!((implied_bias_ceiling(2) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(implied_bias_ceiling(4), 0.5);
        for q in [2u32, 3, 4, 5, 7, 8, 9] {
            let qf = q as f64;
            let lhs = 1.0 / qf + (qf - 1.0) / qf * implied_bias_ceiling(q);
            assert!((lhs - crate::game::tsirelson_bound(q)).abs() < 1e-12);
        }
    }

    #[test]
    fn maximization_is_monotone() {
        let f = Field::new(5, 1).unwrap();
        let chi = additive_character(&f);
        let r = maximize_sum(&f, &chi, 5, 3, 50).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert!(r.value <= bound(5) + BOUND_TOLERANCE);
        assert!(maximize_sum(&f, &chi, 5, 3, 0).is_err());
    }
}
