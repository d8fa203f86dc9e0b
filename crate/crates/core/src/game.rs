//! The CHSH_q game: players receive uniform `x, y` in F_q and win when
//! their outputs satisfy `a + b = x y`.
//!
//! Classical deterministic strategies are pairs of tables `f, g: F_q -> F_q`.
//! The number of winning input pairs decomposes over `y`, so once Alice's
//! table is fixed Bob's optimum is a per-column mode; that is what makes the
//! exhaustive search over `f` alone exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Element, Field};
use crate::rational::serde_ratio;

/// Largest q handled by [`exact_classical_value`].
pub const EXACT_SEARCH_CAP: u32 = 8;

/// Alice's table `f` and Bob's table `g`, both indexed by element encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub f: Vec<Element>,
    pub g: Vec<Element>,
}

impl Strategy {
    pub fn new(f: Vec<Element>, g: Vec<Element>) -> Self {
        Strategy { f, g }
    }

    /// Both players always answer 0.
    pub fn zero(field: &Field) -> Self {
        let q = field.order();
        Strategy { f: vec![Element::ZERO; q], g: vec![Element::ZERO; q] }
    }

    pub fn random<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> Self {
        Strategy { f: random_table(field, rng), g: random_table(field, rng) }
    }

    pub fn validate(&self, field: &Field) -> Result<()> {
        let q = field.order();
        for (name, t) in [("f", &self.f), ("g", &self.g)] {
            if t.len() != q {
                return Err(Error::InvalidInput(format!("table {name} has {} entries, expected {q}", t.len())));
            }
            if let Some(bad) = t.iter().find(|e| e.0 >= field.q()) {
                return Err(Error::ElementOutOfRange { value: bad.0 as u64, q: q as u64 });
            }
        }
        Ok(())
    }
}

pub fn random_table<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> Vec<Element> {
    (0..field.order()).map(|_| Element(rng.random_range(0..field.q()))).collect()
}

/// Exact win statistics of a deterministic strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameValue {
    pub q: u32,
    pub wins: u64,
    #[serde(with = "serde_ratio")]
    pub p_win: BigRational,
    #[serde(with = "serde_ratio")]
    pub bias: BigRational,
}

impl GameValue {
    pub fn from_wins(q: u32, wins: u64) -> Self {
        let qq = BigInt::from(q);
        let p_win = BigRational::new(BigInt::from(wins), &qq * &qq);
        GameValue { q, wins, bias: bias_of(q, &p_win), p_win }
    }
}

/// `E = (q p_win - 1) / (q - 1)`.
pub fn bias_of(q: u32, p_win: &BigRational) -> BigRational {
    let qr = BigRational::from_integer(BigInt::from(q));
    let one = BigRational::from_integer(BigInt::from(1));
    (&qr * p_win - &one) / (qr - one)
}

/// Inverse of [`bias_of`]: `p_win = 1/q + (q-1) E / q`.
pub fn p_win_of(q: u32, bias: &BigRational) -> BigRational {
    let qr = BigRational::from_integer(BigInt::from(q));
    let one = BigRational::from_integer(BigInt::from(1));
    (&one + (&qr - &one) * bias) / qr
}

/// Counts the input pairs `(x, y)` with `f(x) + g(y) = x y`.
pub fn win_count(field: &Field, s: &Strategy) -> Result<GameValue> {
    s.validate(field)?;
    Ok(GameValue::from_wins(field.q(), raw_wins(field, &s.f, &s.g)))
}

pub(crate) fn raw_wins(field: &Field, f: &[Element], g: &[Element]) -> u64 {
    let mut wins = 0;
    for x in field.elements() {
        for y in field.elements() {
            if field.add(f[x.index()], g[y.index()]) == field.mul(x, y) {
                wins += 1;
            }
        }
    }
    wins
}

fn mode_smallest(counts: &[u32]) -> (Element, u32) {
    // max_by_key keeps the last maximum, so scan manually for the first.
    let mut best = (Element::ZERO, counts[0]);
    for (b, &c) in counts.iter().enumerate().skip(1) {
        if c > best.1 {
            best = (Element(b as u32), c);
        }
    }
    best
}

/// Bob's optimal reply to Alice's table: `g(y)` is the most frequent value of
/// `x y - f(x)`, ties going to the smallest encoding.
pub fn best_response_g(field: &Field, f: &[Element]) -> (Vec<Element>, u64) {
    let q = field.order();
    let mut counts = vec![0u32; q];
    let mut wins = 0u64;
    let g = field
        .elements()
        .map(|y| {
            counts.iter_mut().for_each(|c| *c = 0);
            for x in field.elements() {
                counts[field.sub(field.mul(x, y), f[x.index()]).index()] += 1;
            }
            let (b, c) = mode_smallest(&counts);
            wins += c as u64;
            b
        })
        .collect();
    (g, wins)
}

/// Alice's optimal reply to Bob's table, the mirror of [`best_response_g`].
pub fn best_response_f(field: &Field, g: &[Element]) -> (Vec<Element>, u64) {
    let q = field.order();
    let mut counts = vec![0u32; q];
    let mut wins = 0u64;
    let f = field
        .elements()
        .map(|x| {
            counts.iter_mut().for_each(|c| *c = 0);
            for y in field.elements() {
                counts[field.sub(field.mul(x, y), g[y.index()]).index()] += 1;
            }
            let (a, c) = mode_smallest(&counts);
            wins += c as u64;
            a
        })
        .collect();
    (f, wins)
}

/// A value together with a strategy attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solved {
    pub value: GameValue,
    pub strategy: Strategy,
}

/// Exact classical value by enumerating every Alice table with `f(0) = 0`
/// and answering with Bob's best response.
///
/// The shift `(f, g) -> (f + c, g - c)` preserves the win count, so fixing
/// `f(0)` loses nothing. Among optimal tables the lexicographically smallest
/// `f` is returned, independent of how the work is split across threads.
pub fn exact_classical_value(field: &Field) -> Result<Solved> {
    let q = field.q();
    if q > EXACT_SEARCH_CAP {
        return Err(Error::CapExceeded(format!("exhaustive search supports q <= {EXACT_SEARCH_CAP}, got {q}")));
    }
    let qs = q as usize;
    // diff[x][y][a] = x*y - a, so counting never touches the field code.
    let mut diff = vec![0u8; qs * qs * qs];
    for x in field.elements() {
        for y in field.elements() {
            let xy = field.mul(x, y);
            for a in field.elements() {
                diff[(x.index() * qs + y.index()) * qs + a.index()] = field.sub(xy, a).0 as u8;
            }
        }
    }
    let total = (q as u64).pow(q - 1);
    let decode = |mut idx: u64, f: &mut [u8]| {
        f[0] = 0;
        for x in (1..qs).rev() {
            f[x] = (idx % q as u64) as u8;
            idx /= q as u64;
        }
    };
    let (best_wins, best_idx) = (0..total)
        .into_par_iter()
        .map_init(
            || (vec![0u8; qs], vec![0u32; qs]),
            |(f, counts), idx| {
                decode(idx, f);
                let mut wins = 0u64;
                for y in 0..qs {
                    counts.iter_mut().for_each(|c| *c = 0);
                    for x in 0..qs {
                        counts[diff[(x * qs + y) * qs + f[x] as usize] as usize] += 1;
                    }
                    wins += *counts.iter().max().unwrap() as u64;
                }
                (wins, idx)
            },
        )
        .reduce(
            || (0, u64::MAX),
            |a, b| match a.0.cmp(&b.0) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    if a.1 <= b.1 {
                        a
                    } else {
                        b
                    }
                }
            },
        );
    let mut fbuf = vec![0u8; qs];
    decode(best_idx, &mut fbuf);
    let f: Vec<Element> = fbuf.iter().map(|&v| Element(v as u32)).collect();
    let (g, wins) = best_response_g(field, &f);
    if wins != best_wins {
        return Err(Error::InvariantViolation(format!("witness reproduces {wins} wins, search reported {best_wins}")));
    }
    Ok(Solved { value: GameValue::from_wins(q, wins), strategy: Strategy { f, g } })
}

/// Result of alternating best-response search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub value: GameValue,
    pub strategy: Strategy,
    /// Win count after the random start and after every half-step.
    pub trace: Vec<u64>,
    pub rounds: usize,
    pub converged: bool,
}

/// Starts from random `f, g` and alternately replaces each by the best
/// response to the other until a round brings no improvement.
pub fn local_search(field: &Field, seed: u64, max_rounds: usize) -> SearchOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Strategy::random(field, &mut rng);
    polish(field, start, max_rounds)
}

/// Runs alternating best responses from a given strategy.
pub fn polish(field: &Field, start: Strategy, max_rounds: usize) -> SearchOutcome {
    let Strategy { mut f, mut g } = start;
    let mut wins = raw_wins(field, &f, &g);
    let mut trace = vec![wins];
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds {
        rounds += 1;
        let before = wins;
        let (ng, w1) = best_response_g(field, &f);
        g = ng;
        trace.push(w1);
        let (nf, w2) = best_response_f(field, &g);
        f = nf;
        trace.push(w2);
        wins = w2;
        if wins <= before {
            converged = true;
            break;
        }
    }
    SearchOutcome {
        value: GameValue::from_wins(field.q(), wins),
        strategy: Strategy { f, g },
        trace,
        rounds,
        converged,
    }
}

/// Best of `restarts` independent local searches. Restart `i` is seeded from
/// a ChaCha stream keyed by `seed`; ties keep the earliest restart.
pub fn local_search_restarts(field: &Field, seed: u64, restarts: usize, max_rounds: usize) -> SearchOutcome {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| master.random()).collect();
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| (i, local_search(field, s, max_rounds)))
        .reduce_with(|a, b| {
            if b.1.value.wins > a.1.value.wins || (b.1.value.wins == a.1.value.wins && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .map(|(_, o)| o)
        .expect("at least one restart")
}

/// Quantum upper bound `1/q + (q-1)/(q sqrt q)`.
pub fn tsirelson_bound(q: u32) -> f64 {
    let q = q as f64;
    1.0 / q + (q - 1.0) / (q * q.sqrt())
}

/// Element of the group acting on strategies by input relabelling:
/// `x -> alpha x + gamma`, `y -> beta y + delta` with output corrections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineAction {
    pub alpha: Element,
    pub beta: Element,
    pub gamma: Element,
    pub delta: Element,
}

impl AffineAction {
    pub fn new(alpha: Element, beta: Element, gamma: Element, delta: Element) -> Result<Self> {
        if alpha.is_zero() || beta.is_zero() {
            return Err(Error::InvalidInput("alpha and beta must be nonzero".into()));
        }
        Ok(AffineAction { alpha, beta, gamma, delta })
    }

    /// Alice's corrected answer: `(f(alpha x + gamma) - delta alpha x - gamma delta) / (alpha beta)`.
    pub fn alice_output(&self, field: &Field, f: &[Element], x: Element) -> Element {
        let xt = field.add(field.mul(self.alpha, x), self.gamma);
        let corr = field.add(field.mul(field.mul(self.delta, self.alpha), x), field.mul(self.gamma, self.delta));
        let scale = field.inv(field.mul(self.alpha, self.beta)).expect("nonzero");
        field.mul(field.sub(f[xt.index()], corr), scale)
    }

    /// Bob's corrected answer: `(g(beta y + delta) - beta gamma y) / (alpha beta)`.
    pub fn bob_output(&self, field: &Field, g: &[Element], y: Element) -> Element {
        let yt = field.add(field.mul(self.beta, y), self.delta);
        let corr = field.mul(field.mul(self.beta, self.gamma), y);
        let scale = field.inv(field.mul(self.alpha, self.beta)).expect("nonzero");
        field.mul(field.sub(g[yt.index()], corr), scale)
    }

    pub fn apply(&self, field: &Field, s: &Strategy) -> Strategy {
        Strategy {
            f: field.elements().map(|x| self.alice_output(field, &s.f, x)).collect(),
            g: field.elements().map(|y| self.bob_output(field, &s.g, y)).collect(),
        }
    }
}
