//! Entropy and mutual information on explicit tables, the Hadamard index
//! task, the binary-output reduction, and the one-bit message reduction.
//!
//! All logarithms are base 2 and `0 log 0 = 0`.

use std::ops::RangeInclusive;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::ErrorDist;
use crate::error::{Error, Result};
use crate::field::{Element, Field};

/// Tolerance for "sums to one".
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Shannon entropy of a probability vector, in bits.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Binary entropy `H_2(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// A joint law `Pr[X = x, Y = y]` stored row-major, `x` indexing rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDist {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

impl JointDist {
    pub fn new(rows: usize, cols: usize, p: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || p.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "a {rows}x{cols} table needs {} entries, got {}",
                rows * cols,
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidInput(format!("invalid probability {bad}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(JointDist { rows, cols, p })
    }

    /// Empirical law of a count table.
    pub fn from_counts(rows: usize, cols: usize, counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidInput("empty count table".into()));
        }
        JointDist::new(rows, cols, counts.iter().map(|&c| c as f64 / n as f64).collect())
    }

    /// `Pr[X = x] Pr[Y = y]`.
    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        let p = px.iter().flat_map(|&a| py.iter().map(move |&b| a * b)).collect();
        JointDist::new(px.len(), py.len(), p)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.cols + y]
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.p.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.p.chunks(self.cols) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    pub fn entropy_x(&self) -> f64 {
        entropy(&self.marginal_x())
    }

    pub fn entropy_y(&self) -> f64 {
        entropy(&self.marginal_y())
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy(&self.p)
    }

    /// `H(X | Y = y)`; zero when `Pr[Y = y] = 0`.
    pub fn entropy_x_given(&self, y: usize) -> f64 {
        let col: Vec<f64> = (0..self.rows).map(|x| self.get(x, y)).collect();
        let mass: f64 = col.iter().sum();
        if mass <= 0.0 {
            return 0.0;
        }
        entropy(&col.iter().map(|v| v / mass).collect::<Vec<_>>())
    }

    /// `H(X | Y)`.
    pub fn conditional_entropy_x(&self) -> f64 {
        self.joint_entropy() - self.entropy_y()
    }

    /// Law of `(X, f(Y))` for `f: [cols] -> [k]`.
    pub fn map_y(&self, f: &[usize], k: usize) -> Result<JointDist> {
        if f.len() != self.cols || f.iter().any(|&v| v >= k) {
            return Err(Error::InvalidInput("map does not fit the Y alphabet".into()));
        }
        let mut p = vec![0.0; self.rows * k];
        for x in 0..self.rows {
            for y in 0..self.cols {
                p[x * k + f[y]] += self.get(x, y);
            }
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        JointDist::new(self.rows, k, p)
    }
}

/// `I(X; Y) = H(X) + H(Y) - H(X, Y)` in bits, clamped at zero.
pub fn mutual_information(d: &JointDist) -> f64 {
    (d.entropy_x() + d.entropy_y() - d.joint_entropy()).max(0.0)
}

/// Plug-in mutual information with the Miller-Madow bias correction applied
/// to each of the three entropies.
pub fn mutual_information_corrected(rows: usize, cols: usize, counts: &[u64]) -> Result<f64> {
    let d = JointDist::from_counts(rows, cols, counts)?;
    let n: u64 = counts.iter().sum();
    let support = |v: &[f64]| v.iter().filter(|&&x| x > 0.0).count() as f64;
    let correction = (support(&d.marginal_x()) - 1.0) + (support(&d.marginal_y()) - 1.0) - (support(d.table()) - 1.0);
    Ok(d.entropy_x() + d.entropy_y() - d.joint_entropy() + correction / (2.0 * n as f64 * std::f64::consts::LN_2))
}

/// Largest `q^m` the Hadamard task will enumerate.
pub const HADAMARD_ENUMERATION_CAP: u64 = 1 << 20;
/// Largest `(pairs) * q^m` the exhaustive pairwise check will attempt.
pub const PAIRWISE_WORK_CAP: u64 = 1 << 34;

/// Index vectors `xi in F_q^m` whose first nonzero coordinate is 1, one per
/// point of PG(m-1, q), with codeword coordinates `Had_xi(Y) = sum xi_i Y_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HadamardTask {
    pub q: u32,
    pub m: u32,
    pub vectors: Vec<Vec<Element>>,
}

/// `(q^m - 1) / (q - 1)`, if it fits.
pub fn projective_count(q: u64, m: u32) -> Option<u64> {
    let qm = q.checked_pow(m)?;
    Some((qm - 1) / (q - 1))
}

fn all_vectors(q: u32, m: u32) -> impl Iterator<Item = Vec<Element>> {
    let total = (q as u64).pow(m);
    (0..total).map(move |mut idx| {
        let mut v = vec![Element::ZERO; m as usize];
        for slot in v.iter_mut().rev() {
            *slot = Element((idx % q as u64) as u32);
            idx /= q as u64;
        }
        v
    })
}

impl HadamardTask {
    /// Ordered by the position of the leading 1, then lexicographically.
    pub fn build(field: &Field, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        let q = field.q();
        match (q as u64).checked_pow(m) {
            Some(n) if n <= HADAMARD_ENUMERATION_CAP => {}
            _ => {
                return Err(Error::CapExceeded(format!(
                    "q^m = {q}^{m} exceeds the enumeration cap {HADAMARD_ENUMERATION_CAP}"
                )))
            }
        }
        let mut vectors = Vec::new();
        for lead in 0..m {
            for tail in all_vectors(q, m - lead - 1) {
                let mut v = vec![Element::ZERO; lead as usize];
                v.push(Element::ONE);
                v.extend(tail);
                vectors.push(v);
            }
        }
        Ok(HadamardTask { q, m, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `Had_xi(Y)`.
    pub fn had(field: &Field, xi: &[Element], y: &[Element]) -> Element {
        xi.iter().zip(y).fold(Element::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
    }
}

/// Exhaustive joint histograms over every `Y in F_q^m`: each coordinate
/// must be uniform on F_q and every pair uniform on F_q^2.
pub fn pairwise_independence_check(field: &Field, task: &HadamardTask) -> Result<bool> {
    vectors_pairwise_independent(field, task.m, &task.vectors)
}

/// [`pairwise_independence_check`] on an arbitrary list of index vectors.
pub fn vectors_pairwise_independent(field: &Field, m: u32, vectors: &[Vec<Element>]) -> Result<bool> {
    let q = field.order();
    let n_y = match (q as u64).checked_pow(m) {
        Some(n) if n <= HADAMARD_ENUMERATION_CAP => n as usize,
        _ => return Err(Error::CapExceeded(format!("q^m = {q}^{m} is too large to enumerate"))),
    };
    let k = vectors.len() as u64;
    let work = k.saturating_mul(k.saturating_sub(1)) / 2 * n_y as u64;
    if work > PAIRWISE_WORK_CAP {
        return Err(Error::CapExceeded(format!(
            "{k} index vectors over {n_y} seeds is beyond the exhaustive work cap"
        )));
    }
    if vectors.iter().any(|v| v.len() != m as usize) {
        return Err(Error::InvalidInput("index vector of the wrong length".into()));
    }
    let ys: Vec<Vec<Element>> = all_vectors(field.q(), m).collect();
    let codes: Vec<Vec<u32>> =
        vectors.par_iter().map(|xi| ys.iter().map(|y| HadamardTask::had(field, xi, y).0).collect()).collect();
    let single = n_y / q;
    let unbiased = codes.par_iter().all(|c| {
        let mut h = vec![0usize; q];
        c.iter().for_each(|&v| h[v as usize] += 1);
        h.iter().all(|&x| x == single)
    });
    if !unbiased {
        return Ok(false);
    }
    if n_y < q * q {
        return Ok(codes.len() <= 1);
    }
    let joint = n_y / (q * q);
    Ok((0..codes.len()).into_par_iter().all(|i| {
        let mut h = vec![0usize; q * q];
        codes[i + 1..].iter().all(|cj| {
            h.iter_mut().for_each(|x| *x = 0);
            for (a, b) in codes[i].iter().zip(cj) {
                h[*a as usize * q + *b as usize] += 1;
            }
            h.iter().all(|&x| x == joint)
        })
    }))
}

/// Rank route: two codeword coordinates are jointly uniform exactly when
/// their index vectors are linearly independent, so it suffices that no
/// vector is zero and no two are proportional.
pub fn pairwise_independence_by_rank(field: &Field, vectors: &[Vec<Element>]) -> bool {
    let normalize = |v: &Vec<Element>| -> Option<Vec<Element>> {
        let lead = v.iter().find(|e| !e.is_zero())?;
        let inv = field.inv(*lead).ok()?;
        Some(v.iter().map(|&e| field.mul(e, inv)).collect())
    };
    let mut seen = std::collections::HashSet::new();
    vectors.iter().all(|v| normalize(v).is_some_and(|n| seen.insert(n)))
}

/// Result of [`ic_sum`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcSum {
    pub m: u32,
    pub indices: u64,
    pub per_index_mi: f64,
    pub total: f64,
}

/// Law of the summed error after `m` uses of a regular box with bias `e`.
pub fn composed_error_f64(field: &Field, m: u32, bias: f64) -> ErrorDist<f64> {
    let q = field.order() as f64;
    let mut pmf = vec![(1.0 - bias) / q; field.order()];
    pmf[0] = (1.0 + (q - 1.0) * bias) / q;
    ErrorDist::from_pmf(pmf).convolve_power(m, field)
}

/// Builds the joint law of `(X, Z)` with `X` uniform on F_q and
/// `Z = X + e`, `e` the `m`-fold composed error, and multiplies its mutual
/// information by `|U_m|`.
pub fn ic_sum(field: &Field, m: u32, bias: f64) -> Result<IcSum> {
    if !(0.0..=1.0).contains(&bias) {
        return Err(Error::InvalidInput(format!("bias {bias} outside [0, 1]")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let indices = projective_count(field.q() as u64, m)
        .ok_or_else(|| Error::CapExceeded(format!("q^m overflows for m = {m}")))?;
    let noise = composed_error_f64(field, m, bias);
    let joint = additive_channel(field, noise.pmf())?;
    let per_index_mi = mutual_information(&joint);
    Ok(IcSum { m, indices, per_index_mi, total: per_index_mi * indices as f64 })
}

/// `(X, X + e)` with `X` uniform.
pub fn additive_channel(field: &Field, noise: &[f64]) -> Result<JointDist> {
    let q = field.order();
    let mut p = vec![0.0; q * q];
    for x in field.elements() {
        for (e, w) in noise.iter().enumerate() {
            p[x.index() * q + field.add(x, Element(e as u32)).index()] += w / q as f64;
        }
    }
    JointDist::new(q, q, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// Ratio the last totals must grow by, step over step, to count as growing.
pub const GROWTH_FACTOR: f64 = 1.1;

/// `Bounded` if the last three totals are nonincreasing, `Growing` if each
/// of the last two steps grows by at least [`GROWTH_FACTOR`].
pub fn classify(totals: &[f64]) -> Verdict {
    if totals.len() < 3 {
        return Verdict::Indeterminate;
    }
    let t = &totals[totals.len() - 3..];
    if t[1] <= t[0] && t[2] <= t[1] {
        Verdict::Bounded
    } else if t[1] >= GROWTH_FACTOR * t[0] && t[2] >= GROWTH_FACTOR * t[1] && t[0] > 0.0 {
        Verdict::Growing
    } else {
        Verdict::Indeterminate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub q: u32,
    pub bias: f64,
    pub rows: Vec<IcSum>,
    pub verdict: Verdict,
}

/// [`ic_sum`] for every `m` in the range, in parallel, then [`classify`].
pub fn ic_dichotomy_experiment(field: &Field, bias: f64, ms: RangeInclusive<u32>) -> Result<DichotomyReport> {
    let rows = ms.collect::<Vec<_>>().into_par_iter().map(|m| ic_sum(field, m, bias)).collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = rows.iter().map(|r| r.total).collect();
    Ok(DichotomyReport { q: field.q(), bias, verdict: classify(&totals), rows })
}

/// Exact bias as `f64`, for callers holding a rational.
pub fn bias_to_f64(bias: &BigRational) -> f64 {
    crate::rational::to_f64(bias)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryReduction {
    /// `f(y)` for every `y`; 1 exactly at `j_star`.
    pub map: Vec<u8>,
    pub j_star: usize,
    pub original_mi: f64,
    pub achieved_mi: f64,
    /// `I(X; Y) / |B|`.
    pub guarantee: f64,
}

/// With `s = I(X;Y)/H(X)`, `r_j = Pr[Y = j]` and `t_j = H(X|Y=j)/H(X)`,
/// picks `j*` maximizing `r_j (1 - t_j)` (smallest `j` on ties) and returns
/// the indicator of `j*`.
pub fn binary_reduction_select(d: &JointDist) -> Result<BinaryReduction> {
    let px = d.marginal_x();
    let u = 1.0 / d.rows() as f64;
    if px.iter().any(|p| (p - u).abs() > 1e-9) {
        return Err(Error::InvalidInput("X must be uniform".into()));
    }
    let hx = d.entropy_x();
    let py = d.marginal_y();
    let score = |j: usize| {
        if hx <= 0.0 {
            0.0
        } else {
            py[j] * (1.0 - d.entropy_x_given(j) / hx)
        }
    };
    let mut j_star = 0;
    for j in 1..d.cols() {
        if score(j) > score(j_star) {
            j_star = j;
        }
    }
    let map: Vec<u8> = (0..d.cols()).map(|j| u8::from(j == j_star)).collect();
    let indices: Vec<usize> = map.iter().map(|&b| b as usize).collect();
    let original_mi = mutual_information(d);
    let achieved_mi = mutual_information(&d.map_y(&indices, 2)?);
    Ok(BinaryReduction { map, j_star, original_mi, achieved_mi, guarantee: original_mi / d.cols() as f64 })
}

/// A classical one-way protocol given by tables: Alice's input is one of
/// `inputs` (a vector of `n` symbols from `[input_alphabet]`) drawn with
/// `input_probs`, she sends `message[row]` from `[sigma]`, and Bob with index
/// `b` outputs `decoder[b][message]` from `[lambda]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableProtocol {
    pub n: usize,
    pub input_alphabet: usize,
    pub sigma: usize,
    pub lambda: usize,
    pub inputs: Vec<Vec<usize>>,
    pub input_probs: Vec<f64>,
    pub message: Vec<usize>,
    pub decoder: Vec<Vec<usize>>,
}

impl TableProtocol {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        if self.n == 0 || self.sigma == 0 || self.lambda == 0 || self.input_alphabet == 0 {
            return bad("empty alphabet or index set");
        }
        if self.inputs.is_empty()
            || self.inputs.len() != self.input_probs.len()
            || self.inputs.len() != self.message.len()
        {
            return bad("input, probability and message tables differ in length");
        }
        if self.inputs.iter().any(|x| x.len() != self.n || x.iter().any(|&s| s >= self.input_alphabet)) {
            return bad("input row does not fit");
        }
        if self.message.iter().any(|&a| a >= self.sigma) {
            return bad("message outside the message alphabet");
        }
        if self.decoder.len() != self.n
            || self.decoder.iter().any(|r| r.len() != self.sigma || r.iter().any(|&z| z >= self.lambda))
        {
            return bad("decoder table does not fit");
        }
        let total: f64 = self.input_probs.iter().sum();
        if self.input_probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > SUM_TOLERANCE {
            return bad("input probabilities are not a distribution");
        }
        Ok(())
    }

    /// One uniform symbol from `[k]`, sent verbatim and output verbatim.
    pub fn copy(k: usize) -> Self {
        TableProtocol {
            n: 1,
            input_alphabet: k,
            sigma: k,
            lambda: k,
            inputs: (0..k).map(|x| vec![x]).collect(),
            input_probs: vec![1.0 / k as f64; k],
            message: (0..k).collect(),
            decoder: vec![(0..k).collect()],
        }
    }

    /// `n` independent uniform symbols from `[k]`; only the first is sent.
    /// Bob outputs the message for index 0 and a constant otherwise.
    pub fn first_symbol(n: usize, k: usize) -> Self {
        let inputs: Vec<Vec<usize>> = (0..k.pow(n as u32))
            .map(|mut i| {
                let mut row = vec![0; n];
                for s in row.iter_mut().rev() {
                    *s = i % k;
                    i /= k;
                }
                row
            })
            .collect();
        let rows = inputs.len();
        let mut decoder = vec![vec![0; k]; n];
        decoder[0] = (0..k).collect();
        TableProtocol {
            n,
            input_alphabet: k,
            sigma: k,
            lambda: k,
            message: inputs.iter().map(|r| r[0]).collect(),
            inputs,
            input_probs: vec![1.0 / rows as f64; rows],
            decoder,
        }
    }

    /// Exact joint law of `(X_i, Z)` given `b = i`.
    pub fn joint(&self, i: usize) -> Result<JointDist> {
        let mut p = vec![0.0; self.input_alphabet * self.lambda];
        for (row, (&w, &a)) in self.inputs.iter().zip(self.input_probs.iter().zip(&self.message)) {
            p[row[i] * self.lambda + self.decoder[i][a]] += w;
        }
        JointDist::new(self.input_alphabet, self.lambda, p)
    }
}

/// Exact description of the one-bit reduction of a table protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CStarModel {
    pub p_bin1: f64,
    /// `I(X_i; Z | b = i)` of the original protocol.
    pub original_mi: Vec<f64>,
    /// `I(X_i; Z~ | b = i, alpha_bin = 1)`.
    pub mi_given_bin1: Vec<f64>,
    /// `I(X_i; Z~ | b = i, alpha_bin = 0)`.
    pub mi_given_bin0: Vec<f64>,
}

/// Joint laws of `(X_i, Z~)` given each value of `alpha_bin`, computed by
/// summing over the shared guess.
pub fn cstar_model(proto: &TableProtocol) -> Result<CStarModel> {
    proto.validate()?;
    let (ka, kl, sg) = (proto.input_alphabet, proto.lambda, proto.sigma as f64);
    let mut out = CStarModel { p_bin1: 0.0, original_mi: vec![], mi_given_bin1: vec![], mi_given_bin0: vec![] };
    for i in 0..proto.n {
        let mut hit = vec![0.0; ka * kl];
        let mut miss = vec![0.0; ka * kl];
        for (row, (&w, &a)) in proto.inputs.iter().zip(proto.input_probs.iter().zip(&proto.message)) {
            for guess in 0..proto.sigma {
                let w = w / sg;
                if guess == a {
                    hit[row[i] * kl + proto.decoder[i][guess]] += w;
                } else {
                    for z in 0..kl {
                        miss[row[i] * kl + z] += w / kl as f64;
                    }
                }
            }
        }
        let p1: f64 = hit.iter().sum();
        out.p_bin1 = p1;
        out.original_mi.push(mutual_information(&proto.joint(i)?));
        hit.iter_mut().for_each(|v| *v /= p1);
        out.mi_given_bin1.push(mutual_information(&JointDist::new(ka, kl, hit)?));
        if p1 < 1.0 {
            miss.iter_mut().for_each(|v| *v /= 1.0 - p1);
            out.mi_given_bin0.push(mutual_information(&JointDist::new(ka, kl, miss)?));
        } else {
            out.mi_given_bin0.push(0.0);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub index: usize,
    /// Runs with `b = i` and `alpha_bin = 1`.
    pub samples: u64,
    pub mi_estimate: f64,
    pub mi_sigma: f64,
    pub mi_exact: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CStarStats {
    pub seed: u64,
    pub runs: u64,
    pub bin1: u64,
    pub bin1_frequency: f64,
    pub bin1_expected: f64,
    /// Binomial standard deviation of the frequency under the expectation.
    pub bin1_sigma: f64,
    pub per_index: Vec<IndexStats>,
}

const CSTAR_STREAMS: u64 = 8;
/// Bootstrap resamples used for the MI standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Runs the one-bit reduction: a shared uniform guess of the message, Bob
/// decodes with the guess, Alice sends whether the guess was right, and Bob
/// replaces his output by a uniform symbol when it was not. Reports the
/// frequency of a correct guess and, per index, a bias-corrected estimate
/// of `I(X_i; Z~ | alpha_bin = 1)` with a bootstrap standard error.
pub fn simulate_cstar(proto: &TableProtocol, runs: u64, seed: u64) -> Result<CStarStats> {
    proto.validate()?;
    if runs == 0 {
        return Err(Error::InvalidInput("need at least one run".into()));
    }
    let model = cstar_model(proto)?;
    let (ka, kl) = (proto.input_alphabet, proto.lambda);
    let mut acc = 0.0;
    let cdf: Vec<f64> = proto
        .input_probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let partials: Vec<(u64, Vec<Vec<u64>>)> = (0..CSTAR_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let n = runs / CSTAR_STREAMS + u64::from(stream < runs % CSTAR_STREAMS);
            let mut bin1 = 0u64;
            let mut counts = vec![vec![0u64; ka * kl]; proto.n];
            for _ in 0..n {
                let guess = rng.random_range(0..proto.sigma);
                let b = rng.random_range(0..proto.n);
                let u: f64 = rng.random();
                let row = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
                let z_bar = proto.decoder[b][guess];
                if proto.message[row] == guess {
                    bin1 += 1;
                    counts[b][proto.inputs[row][b] * kl + z_bar] += 1;
                }
            }
            (bin1, counts)
        })
        .collect();
    let mut bin1 = 0;
    let mut counts = vec![vec![0u64; ka * kl]; proto.n];
    for (b, c) in partials {
        bin1 += b;
        for (dst, src) in counts.iter_mut().zip(c) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
    }
    let expected = 1.0 / proto.sigma as f64;
    let mut per_index = Vec::with_capacity(proto.n);
    for (i, c) in counts.iter().enumerate() {
        let samples: u64 = c.iter().sum();
        let (mi_estimate, mi_sigma) = if samples == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let est = mutual_information_corrected(ka, kl, c)?;
            let sigma = bootstrap_sigma(ka, kl, c, seed.wrapping_add(i as u64 + 1))?;
            (est, sigma)
        };
        per_index.push(IndexStats { index: i, samples, mi_estimate, mi_sigma, mi_exact: model.original_mi[i] });
    }
    Ok(CStarStats {
        seed,
        runs,
        bin1,
        bin1_frequency: bin1 as f64 / runs as f64,
        bin1_expected: expected,
        bin1_sigma: (expected * (1.0 - expected) / runs as f64).sqrt(),
        per_index,
    })
}

/// Standard deviation of the corrected MI estimate over multinomial
/// resamples of the count table.
fn bootstrap_sigma(rows: usize, cols: usize, counts: &[u64], seed: u64) -> Result<f64> {
    let n: u64 = counts.iter().sum();
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CSTAR_STREAMS);
    let mut values = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0u64; counts.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let (mut left, mut mass) = (n, 1.0f64);
        for (slot, &p) in resample.iter_mut().zip(&probs) {
            let draw = if left == 0 || mass <= 0.0 {
                0
            } else {
                let pp = (p / mass).clamp(0.0, 1.0);
                Binomial::new(left, pp)
                    .map_err(|e| Error::InvariantViolation(format!("bootstrap: {e}")))?
                    .sample(&mut rng)
            };
            *slot = draw;
            left -= draw;
            mass -= p;
        }
        values.push(mutual_information_corrected(rows, cols, &resample)?);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        let ind = JointDist::product(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(mutual_information(&ind).abs() < 1e-15);
        let copy = JointDist::new(3, 3, (0..9).map(|i| if i % 4 == 0 { 1.0 / 3.0 } else { 0.0 }).collect()).unwrap();
        assert!((mutual_information(&copy) - 3f64.log2()).abs() < 1e-12);
        let bsc = JointDist::new(2, 2, vec![0.375, 0.125, 0.125, 0.375]).unwrap();
        assert!((mutual_information(&bsc) - 0.188_721_875_540_867).abs() < 1e-12);
    }

    #[test]
    fn joint_validation() {
        assert!(JointDist::new(2, 2, vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(JointDist::new(2, 1, vec![1.5, -0.5]).is_err());
        assert!(JointDist::new(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn hadamard_index_sets() {
        let f2 = Field::new(2, 1).unwrap();
        let t = HadamardTask::build(&f2, 2).unwrap();
        let e = |v: &[u32]| v.iter().map(|&x| Element(x)).collect::<Vec<_>>();
        assert_eq!(t.vectors, vec![e(&[1, 0]), e(&[1, 1]), e(&[0, 1])]);
        assert_eq!(HadamardTask::build(&Field::new(3, 1).unwrap(), 2).unwrap().len(), 4);
        assert_eq!(HadamardTask::build(&f2, 3).unwrap().len(), 7);
        assert!(HadamardTask::build(&f2, 0).is_err());
        assert!(matches!(HadamardTask::build(&f2, 21), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn proportional_vectors_are_not_independent() {
        let f3 = Field::new(3, 1).unwrap();
        let xi = vec![Element(1), Element(2)];
        let twice = vec![Element(2), Element(1)];
        assert!(!vectors_pairwise_independent(&f3, 2, &[xi.clone(), twice.clone()]).unwrap());
        assert!(!pairwise_independence_by_rank(&f3, &[xi, twice]));
        let t = HadamardTask::build(&f3, 1).unwrap();
        assert!(pairwise_independence_check(&f3, &t).unwrap());
    }

    #[test]
    fn ic_sum_endpoints() {
        let f = Field::new(3, 1).unwrap();
        let zero = ic_sum(&f, 3, 0.0).unwrap();
        assert!(zero.total.abs() < 1e-12);
        let one = ic_sum(&f, 3, 1.0).unwrap();
        assert_eq!(one.indices, 13);
        assert!((one.total - 13.0 * 3f64.log2()).abs() < 1e-10);
        assert!(ic_sum(&f, 3, 1.5).is_err());
    }

    #[test]
    fn classifier_rules() {
        assert_eq!(classify(&[3.0, 2.0, 2.0]), Verdict::Bounded);
        assert_eq!(classify(&[1.0, 1.2, 1.5]), Verdict::Growing);
        assert_eq!(classify(&[1.0, 1.05, 1.2]), Verdict::Indeterminate);
        assert_eq!(classify(&[1.0, 2.0]), Verdict::Indeterminate);
    }

    #[test]
    fn binary_reduction_copy() {
        let copy = JointDist::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let r = binary_reduction_select(&copy).unwrap();
        assert!(r.achieved_mi >= 1.0 / 2.0);
        let skew = JointDist::new(2, 2, vec![0.6, 0.0, 0.0, 0.4]).unwrap();
        assert!(binary_reduction_select(&skew).is_err());
    }

    #[test]
    fn cstar_model_copy() {
        let m = cstar_model(&TableProtocol::copy(3)).unwrap();
        assert!((m.p_bin1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.mi_given_bin1[0] - 3f64.log2()).abs() < 1e-12);
        assert!(m.mi_given_bin0[0].abs() < 1e-12);
        TableProtocol::first_symbol(3, 2).validate().unwrap();
    }
}
