//! Library results checked against independent brute-force or closed-form
//! computations written directly in the tests.

use chshq::boxes::{self, BoxModel, GameKind, RegularBox};
use chshq::field::{additive_character, is_prime, prime_power, Element, Field};
use chshq::fourier::{self, VectorFamily};
use chshq::game::{self, Strategy};
use chshq::incidence::{self, Config, Line, ProjLine, ProjPoint};
use chshq::info::{self, HadamardTask, JointDist, TableProtocol, Verdict};
use chshq::rational::ratio;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prime_powers_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&q| prime_power(q).is_some()).collect()
}

fn field(q: u64) -> Field {
    Field::with_order(q).unwrap()
}

fn log2(x: f64) -> f64 {
    x.log2()
}

#[test]
fn prime_power_recognition_matches_trial_division() {
    for q in 2..=1000u64 {
        let mut factors = Vec::new();
        let mut n = q;
        for d in 2..=q {
            while n % d == 0 {
                factors.push(d);
                n /= d;
            }
        }
        let expected = factors.iter().all(|&f| f == factors[0]);
        assert_eq!(prime_power(q).is_some(), expected, "q = {q}");
        assert_eq!(is_prime(q), factors.len() == 1, "q = {q}");
    }
}

#[test]
fn table_multiplication_matches_schoolbook_reference() {
    for q in prime_powers_up_to(64) {
        let f = field(q);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b), f.mul_reference(a, b), "q={q}: {a} * {b}");
            }
        }
    }
}

#[test]
fn addition_is_coefficientwise_mod_p() {
    for q in prime_powers_up_to(64) {
        let f = field(q);
        let p = f.p();
        for a in f.elements() {
            for b in f.elements() {
                let expect: Vec<u32> = f.coeffs(a).iter().zip(f.coeffs(b)).map(|(x, y)| (x + y) % p).collect();
                assert_eq!(f.coeffs(f.add(a, b)), expect, "q={q}");
            }
        }
    }
}

#[test]
fn inverse_agrees_with_fermat_power() {
    for q in prime_powers_up_to(64) {
        let f = field(q);
        for a in f.units() {
            assert_eq!(f.inv(a).unwrap(), f.pow(a, q - 2), "q={q}");
        }
        assert!(f.inv(Element::ZERO).is_err());
    }
}

#[test]
fn trace_is_sum_of_frobenius_conjugates() {
    for q in prime_powers_up_to(64) {
        let f = field(q);
        for x in f.elements() {
            let mut acc = Element::ZERO;
            let mut y = x;
            for _ in 0..f.s() {
                acc = f.add(acc, y);
                y = f.pow(y, f.p() as u64);
            }
            assert_eq!(f.trace(x), acc, "q={q}");
            assert!(f.trace(x).0 < f.p(), "trace leaves the prime field");
        }
    }
}

#[test]
fn character_orthogonality() {
    for q in prime_powers_up_to(64) {
        let f = field(q);
        let chi = additive_character(&f);
        for a in f.elements() {
            let s: Complex64 = f.elements().map(|x| chi.value(f.mul(a, x))).sum();
            let expect = if a.is_zero() { q as f64 } else { 0.0 };
            assert!((s - Complex64::new(expect, 0.0)).norm() < 1e-9, "q={q}, a={a}: {s}");
        }
    }
}

fn brute_wins(f: &Field, s: &Strategy) -> u64 {
    let mut n = 0;
    for x in f.elements() {
        for y in f.elements() {
            if f.add(s.f[x.index()], s.g[y.index()]) == f.mul(x, y) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn win_count_matches_direct_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in prime_powers_up_to(16) {
        let f = field(q);
        for _ in 0..20 {
            let s = Strategy::random(&f, &mut rng);
            assert_eq!(game::win_count(&f, &s).unwrap().wins, brute_wins(&f, &s));
        }
    }
}

#[test]
fn best_response_is_optimal_per_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for q in prime_powers_up_to(9) {
        let f = field(q);
        for _ in 0..20 {
            let alice = game::random_table(&f, &mut rng);
            let (g, wins) = game::best_response_g(&f, &alice);
            let mut best = 0;
            for y in f.elements() {
                best += f
                    .elements()
                    .map(|b| f.elements().filter(|&x| f.add(alice[x.index()], b) == f.mul(x, y)).count())
                    .max()
                    .unwrap() as u64;
            }
            assert_eq!(wins, best);
            assert_eq!(brute_wins(&f, &Strategy::new(alice, g)), best);
        }
    }
}

#[test]
fn local_search_never_beats_exact_value() {
    for q in [2u64, 3, 4, 5, 7] {
        let f = field(q);
        let exact = game::exact_classical_value(&f).unwrap().value.wins;
        for seed in 0..10 {
            let r = game::local_search(&f, seed, 200);
            assert!(r.value.wins <= exact);
            assert!(r.trace.windows(2).all(|w| w[0] <= w[1]), "search lost wins");
        }
    }
}

fn random_config<R: Rng>(f: &Field, rng: &mut R, n: usize) -> Config {
    let pick = |rng: &mut R| Element(rng.random_range(0..f.q()));
    let points = (0..n).map(|_| (pick(rng), pick(rng))).collect();
    let lines = (0..n).map(|_| Line::new(pick(rng), pick(rng))).collect();
    Config::new(f.q(), points, lines)
}

#[test]
fn incidence_count_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in [5u64, 8, 9, 13, 16, 27] {
        let f = field(q);
        for _ in 0..10 {
            let c = random_config(&f, &mut rng, q as usize);
            let brute = c
                .points
                .iter()
                .flat_map(|p| c.lines.iter().map(move |l| (p, l)))
                .filter(|(p, l)| f.mul(l.slope, p.0) == f.add(p.1, l.intercept))
                .count() as u64;
            assert_eq!(incidence::incidences(&f, &c), brute);
        }
    }
}

#[test]
fn strategy_and_config_round_trip_preserves_wins() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for q in [3u64, 4, 5, 7] {
        let f = field(q);
        for _ in 0..20 {
            let s = Strategy::random(&f, &mut rng);
            let c = incidence::strategy_to_config(&f, &s).unwrap();
            assert!(incidence::is_legal(&f, &c));
            assert_eq!(incidence::incidences(&f, &c), brute_wins(&f, &s));
            assert_eq!(incidence::config_to_strategy(&f, &c).unwrap(), s);
        }
    }
}

#[test]
fn projective_plane_has_the_right_shape() {
    for q in prime_powers_up_to(16) {
        let f = field(q);
        let points = ProjPoint::all(&f);
        let lines = ProjLine::all(&f);
        let n = (q * q + q + 1) as usize;
        assert_eq!((points.len(), lines.len()), (n, n));
        for l in &lines {
            assert_eq!(points.iter().filter(|p| l.contains(&f, p)).count() as u64, q + 1);
        }
        for (i, a) in points.iter().enumerate().take(8) {
            for b in points.iter().skip(i + 1).take(8) {
                let l = a.join(&f, b).unwrap();
                assert!(l.contains(&f, a) && l.contains(&f, b));
            }
        }
    }
}

#[test]
fn composition_matches_repeated_direct_convolution() {
    for q in [3u64, 4, 5] {
        let f = field(q);
        let b = RegularBox::new(q as u32, ratio(2, 5)).unwrap();
        let step = b.error_dist();
        let mut law = step.pmf().to_vec();
        for m in 2..=5 {
            let mut next = vec![ratio(0, 1); q as usize];
            for (i, pi) in law.iter().enumerate() {
                for (j, pj) in step.pmf().iter().enumerate() {
                    let k = f.add(Element(i as u32), Element(j as u32)).index();
                    next[k] += pi * pj;
                }
            }
            law = next;
            assert_eq!(boxes::compose_m(&f, &b, m).unwrap().pmf(), &law[..], "q={q}, m={m}");
        }
    }
}

#[test]
fn monte_carlo_agrees_with_exact_win_probability() {
    let f = field(5);
    let b = RegularBox::new(5, ratio(3, 5)).unwrap();
    let base = boxes::monte_carlo_win(&f, BoxModel::Regular(&b), GameKind::Base, 200_000, 9).unwrap();
    let exact = 1.0 / 5.0 + 4.0 / 5.0 * 0.6;
    assert!((base.estimate - exact).abs() < 4.0 * base.stderr, "{base:?}");
    let dist = boxes::monte_carlo_win(&f, BoxModel::Regular(&b), GameKind::Dist, 200_000, 9).unwrap();
    let exact = 1.0 / 5.0 + 4.0 / 5.0 * 0.36;
    assert!((dist.estimate - exact).abs() < 4.0 * dist.stderr, "{dist:?}");

    let s = game::exact_classical_value(&f).unwrap();
    let est = boxes::monte_carlo_win(&f, BoxModel::Strategy(&s.strategy), GameKind::Base, 200_000, 9).unwrap();
    assert!((est.estimate - 12.0 / 25.0).abs() < 4.0 * est.stderr, "{est:?}");
}

#[test]
fn exhaustive_pairwise_check_agrees_with_rank_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in [2u64, 3, 4, 5] {
        let f = field(q);
        for m in 1..=4u32 {
            let task = HadamardTask::build(&f, m).unwrap();
            assert_eq!(task.len() as u64, info::projective_count(q, m).unwrap());
            assert!(info::pairwise_independence_check(&f, &task).unwrap(), "q={q} m={m}");
            assert!(info::pairwise_independence_by_rank(&f, &task.vectors));
            for _ in 0..10 {
                let k = rng.random_range(1..=4);
                let mut vs: Vec<Vec<Element>> =
                    (0..k).map(|_| (0..m).map(|_| Element(rng.random_range(0..f.q()))).collect()).collect();
                if rng.random_bool(0.5) {
                    let c = Element(rng.random_range(1..f.q()));
                    let scaled = vs[0].iter().map(|&e| f.mul(e, c)).collect();
                    vs.push(scaled);
                }
                assert_eq!(
                    info::vectors_pairwise_independent(&f, m, &vs).unwrap(),
                    info::pairwise_independence_by_rank(&f, &vs),
                    "q={q} m={m} {vs:?}"
                );
            }
        }
    }
}

/// Per-index information of the composed regular channel, written out with
/// the coefficient `(q-1)/q` on the off-diagonal term.
fn regular_channel_mi(q: f64, eps: f64, off_coefficient: f64) -> f64 {
    let mut i = (1.0 / q + (q - 1.0) / q * eps) * log2(1.0 + (q - 1.0) * eps);
    if eps < 1.0 {
        i += off_coefficient * (1.0 - eps) * log2(1.0 - eps);
    }
    i
}

#[test]
fn ic_sum_matches_channel_closed_form() {
    for q in [2u64, 3, 4, 5, 7] {
        let f = field(q);
        let qf = q as f64;
        for bias in [0.0, 0.2, 0.5, 0.65, 0.9, 1.0] {
            for m in 1..=6 {
                let r = info::ic_sum(&f, m, bias).unwrap();
                let eps = bias.powi(m as i32);
                let expect = regular_channel_mi(qf, eps, (qf - 1.0) / qf);
                assert!((r.per_index_mi - expect).abs() < 1e-10, "q={q} E={bias} m={m}");
                let count = (qf.powi(m as i32) - 1.0) / (qf - 1.0);
                assert!((r.total - expect * count).abs() < 1e-8 * count.max(1.0));
                if eps > 0.0 && eps < 1.0 {
                    let displayed = regular_channel_mi(qf, eps, (qf - 1.0) / (qf * qf));
                    assert!((r.per_index_mi - displayed).abs() > 1e-6, "coefficients indistinguishable");
                }
            }
        }
    }
}

#[test]
fn ic_sum_equals_log_q_minus_noise_entropy() {
    let f = field(3);
    let r = info::ic_sum(&f, 4, 0.5).unwrap();
    let law = boxes::compose_m(&f, &RegularBox::new(3, ratio(1, 2)).unwrap(), 4).unwrap().to_f64();
    let h: f64 = law.pmf().iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    assert!((r.per_index_mi - (3f64.log2() - h)).abs() < 1e-10);
    assert!((r.total - 40.0 * r.per_index_mi).abs() < 1e-10);
    let noiseless = info::ic_sum(&f, 3, 1.0).unwrap();
    assert!((noiseless.per_index_mi - 3f64.log2()).abs() < 1e-12);
    assert!((noiseless.total - 13.0 * 3f64.log2()).abs() < 1e-10);
}

#[test]
fn critical_bias_approaches_finite_limit() {
    let f = field(3);
    let e = 1.0 / 3f64.sqrt();
    let totals: Vec<f64> = (2..=14).map(|m| info::ic_sum(&f, m, e).unwrap().total).collect();
    assert!(totals.windows(2).all(|w| w[1] > w[0]));
    let limit = 1.0 / (2.0 * std::f64::consts::LN_2);
    assert!((totals.last().unwrap() - limit).abs() < 1e-3, "{totals:?}");
    let report = info::ic_dichotomy_experiment(&f, e, 2..=8).unwrap();
    assert_eq!(report.verdict, Verdict::Indeterminate);
}

#[test]
fn binary_reduction_sits_between_guarantee_and_best_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let a = rng.random_range(2..=4usize);
        let b = rng.random_range(2..=5usize);
        let mut p = Vec::new();
        for _ in 0..a {
            let row: Vec<f64> = (0..b).map(|_| rng.random::<f64>()).collect();
            let s: f64 = row.iter().sum();
            p.extend(row.iter().map(|v| v / s / a as f64));
        }
        let d = JointDist::new(a, b, p).unwrap();
        let r = info::binary_reduction_select(&d).unwrap();
        let best = (0..1u32 << b)
            .map(|mask| {
                let map: Vec<usize> = (0..b).map(|j| (mask >> j & 1) as usize).collect();
                info::mutual_information(&d.map_y(&map, 2).unwrap())
            })
            .fold(0.0, f64::max);
        assert!(r.achieved_mi <= best + 1e-12);
        assert!(r.achieved_mi >= r.guarantee - 1e-10);
    }
}

#[test]
fn cstar_model_for_copy_protocol() {
    for k in [2usize, 3, 4, 5] {
        let m = info::cstar_model(&TableProtocol::copy(k)).unwrap();
        let log_k = (k as f64).log2();
        assert!((m.p_bin1 - 1.0 / k as f64).abs() < 1e-12);
        assert!((m.original_mi[0] - log_k).abs() < 1e-12);
        assert!((m.mi_given_bin1[0] - log_k).abs() < 1e-12);
        assert!(m.mi_given_bin0[0].abs() < 1e-12);
    }
}

#[test]
fn fourier_matrix_is_unitary() {
    for q in prime_powers_up_to(64) {
        let f = field(q);
        let chi = additive_character(&f);
        assert!(fourier::fourier_unitarity_defect(&f, &chi) < 1e-9, "q={q}");
    }
}

#[test]
fn bilinear_sum_matches_direct_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for q in [3u64, 4, 5] {
        let f = field(q);
        let chi = additive_character(&f);
        let fam = VectorFamily::random(q as usize, 3, &mut rng);
        let mut s = Complex64::new(0.0, 0.0);
        for x in f.elements() {
            for y in f.elements() {
                let tr = f.trace(f.neg(f.mul(x, y))).0 as f64;
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * tr / f.p() as f64);
                let ip: Complex64 = fam.u[x.index()].iter().zip(&fam.v[y.index()]).map(|(a, b)| a.conj() * b).sum();
                s += w * ip;
            }
        }
        let got = fourier::character_bilinear_sum(&f, &fam, &chi).unwrap();
        assert!((got - s.norm()).abs() < 1e-10, "q={q}: {got} vs {}", s.norm());
    }
}

#[test]
fn q2_scalar_real_optimum_is_two_and_complex_reaches_bound() {
    let f = field(2);
    let chi = additive_character(&f);
    let mut best: f64 = 0.0;
    for signs in 0..16u32 {
        let sign = |i: u32| if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
        let u = vec![vec![Complex64::new(sign(0), 0.0)], vec![Complex64::new(sign(1), 0.0)]];
        let v = vec![vec![Complex64::new(sign(2), 0.0)], vec![Complex64::new(sign(3), 0.0)]];
        let fam = VectorFamily::new(1, u, v).unwrap();
        best = best.max(fourier::character_bilinear_sum(&f, &fam, &chi).unwrap());
    }
    assert!((best - 2.0).abs() < 1e-12);

    let r = fourier::maximize_restarts(&f, &chi, 1, 0, 8, 200).unwrap();
    assert!((r.value - 2.0 * 2f64.sqrt()).abs() < 1e-9, "{}", r.value);
    assert!((fourier::bound(2) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}
