//! Noisy boxes as error channels.
//!
//! A box for CHSH_q is summarized by the law of its error `e = a + b - x y`.
//! A *regular* box has an input-independent error law that is uniform off
//! zero, so it is fully described by its bias `E`:
//! `Pr[e = 0] = 1/q + (q-1) E / q` and `Pr[e = k] = (1 - E) / q` for `k != 0`.
//! Running a regular box several times and summing outputs adds the errors,
//! so composition is additive convolution over F_q, done here in exact
//! rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Element, Field};
use crate::game::{bias_of, p_win_of, win_count, AffineAction, GameValue, Strategy};
use crate::rational::{format_ratio, serde_ratio, serde_ratio_vec};

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Law of the error `e` over F_q, indexed by element encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDist<T = BigRational> {
    pmf: Vec<T>,
}

impl<T: Num + Clone> ErrorDist<T> {
    pub fn from_pmf(pmf: Vec<T>) -> Self {
        ErrorDist { pmf }
    }

    pub fn point_mass(q: usize) -> Self {
        let mut pmf = vec![T::zero(); q];
        pmf[0] = T::one();
        ErrorDist { pmf }
    }

    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    pub fn into_pmf(self) -> Vec<T> {
        self.pmf
    }

    pub fn prob(&self, e: Element) -> &T {
        &self.pmf[e.index()]
    }

    /// Law of `e1 + e2` for independent `e1 ~ self`, `e2 ~ other`.
    pub fn convolve(&self, other: &Self, field: &Field) -> Self {
        let q = field.order();
        let mut out = vec![T::zero(); q];
        for (i, a) in self.pmf.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.pmf.iter().enumerate() {
                let k = field.add(Element(i as u32), Element(j as u32)).index();
                out[k] = out[k].clone() + a.clone() * b.clone();
            }
        }
        ErrorDist { pmf: out }
    }

    /// `m`-fold self-convolution by repeated squaring.
    pub fn convolve_power(&self, m: u32, field: &Field) -> Self {
        let mut acc = Self::point_mass(field.order());
        let mut base = self.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.convolve(&base, field);
            }
            e >>= 1;
            if e > 0 {
                base = base.convolve(&base, field);
            }
        }
        acc
    }
}

impl ErrorDist<BigRational> {
    /// Entries nonnegative and summing to exactly one.
    pub fn validate(&self) -> Result<()> {
        if self.pmf.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidInput("negative probability".into()));
        }
        let total: BigRational = self.pmf.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::InvalidInput(format!("probabilities sum to {}", format_ratio(&total))));
        }
        Ok(())
    }

    /// The bias, if the law is uniform on the nonzero errors.
    pub fn regular_bias(&self) -> Option<BigRational> {
        let off = self.pmf.get(1)?;
        if self.pmf[1..].iter().any(|p| p != off) {
            return None;
        }
        Some(bias_of(self.pmf.len() as u32, &self.pmf[0]))
    }

    pub fn to_f64(&self) -> ErrorDist<f64> {
        ErrorDist { pmf: self.pmf.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect() }
    }

    /// Total-variation distance `1/2 sum |p - r|`.
    pub fn total_variation(&self, other: &Self) -> BigRational {
        let s: BigRational = self.pmf.iter().zip(&other.pmf).map(|(a, b)| (a - b).abs()).sum();
        s / int(2)
    }

    pub fn pmf_strings(&self) -> Vec<String> {
        self.pmf.iter().map(format_ratio).collect()
    }
}

/// A regular box for CHSH_q with exact bias `E in [-1/(q-1), 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularBox {
    pub q: u32,
    #[serde(with = "serde_ratio")]
    pub bias: BigRational,
}

impl RegularBox {
    pub fn new(q: u32, bias: BigRational) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("q must be at least 2, got {q}")));
        }
        let lo = -BigRational::new(BigInt::one(), BigInt::from(q - 1));
        if bias < lo || bias > int(1) {
            return Err(Error::InvalidInput(format!("bias {} outside [-1/(q-1), 1]", format_ratio(&bias))));
        }
        Ok(RegularBox { q, bias })
    }

    pub fn p_win(&self) -> BigRational {
        p_win_of(self.q, &self.bias)
    }

    /// Regular law with the given bias.
    pub fn error_dist(&self) -> ErrorDist {
        regular_law(self.q, &self.bias)
    }

    /// Closed form after `m` uses: the same law with bias `E^m`.
    pub fn composed_closed_form(&self, m: u32) -> ErrorDist {
        regular_law(self.q, &num_traits::pow(self.bias.clone(), m as usize))
    }
}

fn regular_law(q: u32, bias: &BigRational) -> ErrorDist {
    let qr = int(q as i64);
    let one = int(1);
    let zero = (&one + (&qr - &one) * bias) / &qr;
    let off = (&one - bias) / &qr;
    let mut pmf = vec![off; q as usize];
    pmf[0] = zero;
    ErrorDist { pmf }
}

/// Exact error laws of the relabelled strategy, one per input pair
/// `(x, y)` in row-major order, averaged over `alpha, beta in F_q^*` and
/// `gamma, delta in F_q`.
pub fn regularized_error_table(field: &Field, s: &Strategy) -> Result<Vec<ErrorDist>> {
    s.validate(field)?;
    let q = field.order();
    let draws = ((q - 1) * (q - 1) * q * q) as i64;
    let inputs: Vec<(Element, Element)> =
        field.elements().flat_map(|x| field.elements().map(move |y| (x, y))).collect();
    Ok(inputs
        .par_iter()
        .map(|&(x, y)| {
            let mut counts = vec![0i64; q];
            let xy = field.mul(x, y);
            for alpha in field.units() {
                for beta in field.units() {
                    for gamma in field.elements() {
                        for delta in field.elements() {
                            let act = AffineAction { alpha, beta, gamma, delta };
                            let a = act.alice_output(field, &s.f, x);
                            let b = act.bob_output(field, &s.g, y);
                            counts[field.sub(field.add(a, b), xy).index()] += 1;
                        }
                    }
                }
            }
            ErrorDist {
                pmf: counts.into_iter().map(|c| BigRational::new(BigInt::from(c), BigInt::from(draws))).collect(),
            }
        })
        .collect())
}

/// Outcome of regularizing a deterministic strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regularized {
    pub regular: RegularBox,
    pub original: GameValue,
    /// Largest total-variation distance between the error laws of two input
    /// pairs; zero for a correct regularization.
    #[serde(with = "serde_ratio")]
    pub max_tv: BigRational,
}

/// Wraps a deterministic strategy in the shared-randomness relabelling and
/// returns the resulting regular box. Fails with an invariant violation if
/// the error law depends on the inputs, is not uniform off zero, or the win
/// probability moved.
pub fn regularize(field: &Field, s: &Strategy) -> Result<Regularized> {
    let original = win_count(field, s)?;
    let table = regularized_error_table(field, s)?;
    let first = &table[0];
    let max_tv = table.iter().map(|d| first.total_variation(d)).max().unwrap_or_else(BigRational::zero);
    if !max_tv.is_zero() {
        return Err(Error::InvariantViolation(format!(
            "regularized error law depends on the input (TV {})",
            format_ratio(&max_tv)
        )));
    }
    let bias = first
        .regular_bias()
        .ok_or_else(|| Error::InvariantViolation("regularized error law is not uniform off zero".into()))?;
    if first.pmf[0] != original.p_win {
        return Err(Error::InvariantViolation("regularization changed the win probability".into()));
    }
    Ok(Regularized { regular: RegularBox::new(field.q(), bias)?, original, max_tv })
}

/// Error law after `m` independent uses of the box with outputs summed.
pub fn compose_m(field: &Field, b: &RegularBox, m: u32) -> Result<ErrorDist> {
    check_box_field(field, b)?;
    if m == 0 {
        return Err(Error::InvalidInput("number of uses must be at least 1".into()));
    }
    Ok(b.error_dist().convolve_power(m, field))
}

/// The box induced on the distributed game: Alice answers
/// `a1 + a2 + alpha gamma`, Bob `b1 + b2 + beta delta`, so the error is the
/// sum of the two underlying errors. The result is checked to be regular.
pub fn distribute(field: &Field, b: &RegularBox) -> Result<RegularBox> {
    check_box_field(field, b)?;
    let law = b.error_dist().convolve(&b.error_dist(), field);
    let bias = law.regular_bias().ok_or_else(|| Error::InvariantViolation("distributed box is not regular".into()))?;
    RegularBox::new(b.q, bias)
}

/// `(1/q + (q-1)E/q)^2 + (q-1)(1/q - E/q)^2`, with the off-diagonal sum
/// running over the `q - 1` nonzero errors.
pub fn distributed_win_identity(q: u32, bias: &BigRational) -> BigRational {
    let qr = int(q as i64);
    let one = int(1);
    let hit = (&one + (&qr - &one) * bias) / &qr;
    let miss = (&one - bias) / &qr;
    &hit * &hit + (&qr - &one) * &miss * &miss
}

fn check_box_field(field: &Field, b: &RegularBox) -> Result<()> {
    if field.q() != b.q {
        return Err(Error::InvalidInput(format!("box is for q = {}, field has q = {}", b.q, field.q())));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Base,
    Dist,
}

/// What is being sampled.
#[derive(Clone, Copy, Debug)]
pub enum BoxModel<'a> {
    Regular(&'a RegularBox),
    Strategy(&'a Strategy),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub seed: u64,
    pub samples: u64,
    pub wins: u64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Number of independent ChaCha streams the sampling is split over.
const STREAMS: u64 = 8;

/// Estimates the win probability by sampling. Work is split over a fixed
/// number of seeded streams, so the result depends only on `seed`.
pub fn monte_carlo_win(
    field: &Field,
    model: BoxModel<'_>,
    game: GameKind,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let cdf: Option<Vec<f64>> = match model {
        BoxModel::Regular(b) => {
            check_box_field(field, b)?;
            let mut acc = 0.0;
            let mut cdf: Vec<f64> = b
                .error_dist()
                .to_f64()
                .into_pmf()
                .into_iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            *cdf.last_mut().unwrap() = 1.0;
            Some(cdf)
        }
        BoxModel::Strategy(s) => {
            s.validate(field)?;
            None
        }
    };
    let q = field.q();
    let draw = |rng: &mut ChaCha8Rng| Element(rng.random_range(0..q));
    let sample_error = |rng: &mut ChaCha8Rng, cdf: &[f64]| {
        let u: f64 = rng.random();
        Element(cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u32)
    };
    let wins: u64 = (0..STREAMS)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let n = samples / STREAMS + u64::from(stream < samples % STREAMS);
            let mut wins = 0u64;
            for _ in 0..n {
                let won = match (model, game, &cdf) {
                    (BoxModel::Regular(_), GameKind::Base, Some(cdf)) => sample_error(&mut rng, cdf).is_zero(),
                    (BoxModel::Regular(_), GameKind::Dist, Some(cdf)) => {
                        let e1 = sample_error(&mut rng, cdf);
                        let e2 = sample_error(&mut rng, cdf);
                        field.add(e1, e2).is_zero()
                    }
                    (BoxModel::Strategy(s), GameKind::Base, _) => {
                        let (x, y) = (draw(&mut rng), draw(&mut rng));
                        field.add(s.f[x.index()], s.g[y.index()]) == field.mul(x, y)
                    }
                    (BoxModel::Strategy(s), GameKind::Dist, _) => {
                        // Alice holds (alpha, gamma), Bob (beta, delta).
                        let (al, ga) = (draw(&mut rng), draw(&mut rng));
                        let (be, de) = (draw(&mut rng), draw(&mut rng));
                        let a = field.add(field.add(s.f[al.index()], s.f[ga.index()]), field.mul(al, ga));
                        let b = field.add(field.add(s.g[de.index()], s.g[be.index()]), field.mul(be, de));
                        field.add(a, b) == field.mul(field.add(al, be), field.add(ga, de))
                    }
                    _ => unreachable!("regular boxes always carry a cdf"),
                };
                wins += won as u64;
            }
            wins
        })
        .sum();
    let estimate = wins as f64 / samples as f64;
    let stderr = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(MonteCarloEstimate { seed, samples, wins, estimate, stderr })
}

/// Exact rational pmfs in `"num/den"` form, for output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmfReport {
    pub q: u32,
    #[serde(with = "serde_ratio")]
    pub bias: BigRational,
    #[serde(with = "serde_ratio_vec")]
    pub pmf: Vec<BigRational>,
}
