//! One function per subcommand, each returning an [`Output`].

use chshq::boxes::{self, BoxModel, GameKind, RegularBox};
use chshq::field::{additive_character, Field};
use chshq::fourier;
use chshq::game::{self, tsirelson_bound, Strategy};
use chshq::incidence::{self, Config, ProjLine, ProjPoint, RegularizeOptions};
use chshq::info::{self, TableProtocol};
use chshq::rational::{format_ratio, to_f64};
use chshq::Error;
use num_rational::BigRational;

use crate::error::CliResult;
use crate::input::config_records;
use crate::output::{Output, Record};
use crate::record;

/// Round limit for each local-search restart.
pub const DEFAULT_SEARCH_ROUNDS: usize = 200;

pub fn table(t: &[chshq::Element]) -> String {
    t.iter().map(|e| e.0.to_string()).collect::<Vec<_>>().join(" ")
}

fn strategy_records(s: &Strategy) -> Vec<Record> {
    s.f.iter().zip(&s.g).enumerate().map(|(i, (a, b))| record! {"input" => i, "alice" => a.0, "bob" => b.0}).collect()
}

pub fn classical_value(
    field: &Field,
    exact: bool,
    search: bool,
    restarts: usize,
    rounds: usize,
    seed: u64,
) -> CliResult<Output> {
    let use_exact = exact || (!search && field.q() <= game::EXACT_SEARCH_CAP);
    let (method, value, strategy, seed_used) = if use_exact {
        let s = game::exact_classical_value(field)?;
        ("exhaustive", s.value, s.strategy, None)
    } else {
        let o = game::local_search_restarts(field, seed, restarts, rounds);
        ("local-search", o.value, o.strategy, Some(seed))
    };
    let summary = record! {
        "q" => field.q(),
        "p" => field.p(),
        "s" => field.s(),
        "method" => method,
        "wins" => value.wins,
        "p_win" => format_ratio(&value.p_win),
        "bias" => format_ratio(&value.bias),
        "tsirelson_bound" => tsirelson_bound(field.q()),
    };
    Ok(Output::new("classical-value", seed_used).with_summary(summary).with_records(strategy_records(&strategy)))
}

pub fn tsirelson_rows(qs: &[u32]) -> Vec<Record> {
    qs.iter()
        .map(|&q| {
            record! {
                "q" => q,
                "tsirelson_bound" => format!("{:.12}", tsirelson_bound(q)),
                "bias_ceiling" => format!("{:.12}", fourier::implied_bias_ceiling(q)),
            }
        })
        .collect()
}

pub fn tsirelson(qs: &[u32]) -> CliResult<Output> {
    for &q in qs {
        if q < 2 {
            return Err(Error::InvalidInput(format!("q must be at least 2, got {q}")).into());
        }
    }
    Ok(Output::new("tsirelson", None).with_records(tsirelson_rows(qs)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ConstructionKind {
    Subfield,
    Grid,
    Subspace,
}

impl ConstructionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstructionKind::Subfield => "subfield",
            ConstructionKind::Grid => "grid",
            ConstructionKind::Subspace => "subspace",
        }
    }
}

/// The configuration and the incidence count predicted for it.
pub fn build_construction(field: &Field, kind: ConstructionKind, seed: u64, thinned: bool) -> CliResult<(Config, u64)> {
    Ok(match kind {
        ConstructionKind::Subfield => {
            let c = incidence::subfield_construction(field)?;
            let k = (field.q() as f64).sqrt().round() as u64;
            (c, k * k * k)
        }
        ConstructionKind::Grid => {
            let c = incidence::grid_construction(field)?;
            let q = field.q() as u64;
            let (n1, n2) = (incidence::icbrt(q), incidence::icbrt(q * q));
            (c, (n1 / 2) * (n2 / 2) * n1)
        }
        ConstructionKind::Subspace => {
            let sc = incidence::subspace_construction(field, seed)?;
            if thinned {
                let n = incidence::incidences(field, &sc.thinned);
                (sc.thinned, n)
            } else {
                (sc.full, sc.predicted_incidences)
            }
        }
    })
}

pub fn construct(field: &Field, kind: ConstructionKind, seed: u64, thinned: bool) -> CliResult<Output> {
    let (c, predicted) = build_construction(field, kind, seed, thinned)?;
    let counted = incidence::incidences(field, &c);
    if counted != predicted {
        return Err(Error::InvariantViolation(format!(
            "{} construction has {counted} incidences, expected {predicted}",
            kind.name()
        ))
        .into());
    }
    let seed_used = (kind == ConstructionKind::Subspace).then_some(seed);
    let summary = record! {
        "q" => field.q(),
        "kind" => kind.name(),
        "points" => c.points.len(),
        "lines" => c.lines.len(),
        "incidences" => counted,
        "legal" => incidence::is_legal(field, &c),
    };
    Ok(Output::new("construct", seed_used).with_summary(summary).with_records(config_records(&c)))
}

pub fn incidences(c: Config) -> CliResult<Output> {
    let field = Field::with_order(c.q as u64)?;
    let c = c.normalized(&field)?;
    let n = incidence::incidences(&field, &c);
    let summary = record! {
        "q" => c.q,
        "points" => c.points.len(),
        "lines" => c.lines.len(),
        "incidences" => n,
        "legal" => incidence::is_legal(&field, &c),
        "trivial_bound" => incidence::trivial_incidence_bound(c.points.len() as u64, c.lines.len() as u64),
    };
    Ok(Output::new("incidences", None).with_summary(summary))
}

fn triple(v: &[chshq::Element; 3]) -> String {
    format!("({}:{}:{})", v[0].0, v[1].0, v[2].0)
}

pub fn regularize(c: Config, seed: u64, downsample: bool) -> CliResult<Output> {
    let field = Field::with_order(c.q as u64)?;
    let c = c.normalized(&field)?;
    let (out, st) = incidence::random_projective_regularize(&field, &c, seed, RegularizeOptions { downsample })?;
    let strategy = incidence::config_to_strategy(&field, &out)?;
    let value = game::win_count(&field, &strategy)?;
    let ProjLine(linf) = st.line_at_infinity;
    let ProjPoint(vert) = st.vertical_point;
    let summary = record! {
        "q" => c.q,
        "input_points" => st.input_points,
        "input_lines" => st.input_lines,
        "input_incidences" => st.input_incidences,
        "sampled_points" => st.sampled_points,
        "sampled_lines" => st.sampled_lines,
        "sampled_incidences" => st.sampled_incidences,
        "line_at_infinity" => triple(&linf),
        "vertical_point" => triple(&vert),
        "points_at_infinity" => st.points_at_infinity,
        "lines_at_infinity" => st.lines_at_infinity,
        "vertical_lines" => st.vertical_lines,
        "transformed_incidences" => st.transformed_incidences,
        "points" => st.retained_points,
        "lines" => st.retained_lines,
        "incidences" => st.retained_incidences,
        "strategy_wins" => value.wins,
        "strategy_p_win" => format_ratio(&value.p_win),
    };
    Ok(Output::new("regularize", Some(seed)).with_summary(summary).with_records(config_records(&out)))
}

fn pmf_records(pmf: &[BigRational]) -> Vec<Record> {
    pmf.iter().enumerate().map(|(e, p)| record! {"error" => e, "probability" => format_ratio(p)}).collect()
}

pub fn box_compose(field: &Field, bias: BigRational, m: u32) -> CliResult<Output> {
    let b = RegularBox::new(field.q(), bias)?;
    let law = boxes::compose_m(field, &b, m)?;
    let closed = b.composed_closed_form(m);
    if law != closed {
        return Err(Error::InvariantViolation("composed law differs from the closed form".into()).into());
    }
    let composed_bias = law.regular_bias().expect("closed form is regular");
    let summary = record! {
        "q" => field.q(),
        "bias" => format_ratio(&b.bias),
        "m" => m,
        "composed_bias" => format_ratio(&composed_bias),
        "p_win" => format_ratio(law.pmf().first().expect("q >= 2")),
        "closed_form_equal" => true,
    };
    Ok(Output::new("box compose", None).with_summary(summary).with_records(pmf_records(law.pmf())))
}

pub fn box_distribute(field: &Field, bias: BigRational) -> CliResult<Output> {
    let b = RegularBox::new(field.q(), bias)?;
    let d = boxes::distribute(field, &b)?;
    let square = &b.bias * &b.bias;
    let identity = boxes::distributed_win_identity(field.q(), &b.bias);
    if d.bias != square || identity != d.p_win() {
        return Err(Error::InvariantViolation("distributed bias is not the square of the bias".into()).into());
    }
    let summary = record! {
        "q" => field.q(),
        "bias" => format_ratio(&b.bias),
        "distributed_bias" => format_ratio(&d.bias),
        "distributed_p_win" => format_ratio(&d.p_win()),
        "bias_squared" => true,
    };
    Ok(Output::new("box distribute", None).with_summary(summary).with_records(pmf_records(d.error_dist().pmf())))
}

pub fn box_simulate(field: &Field, bias: BigRational, game: GameKind, samples: u64, seed: u64) -> CliResult<Output> {
    let b = RegularBox::new(field.q(), bias)?;
    let est = boxes::monte_carlo_win(field, BoxModel::Regular(&b), game, samples, seed)?;
    let exact = match game {
        GameKind::Base => b.p_win(),
        GameKind::Dist => boxes::distribute(field, &b)?.p_win(),
    };
    let summary = record! {
        "q" => field.q(),
        "bias" => format_ratio(&b.bias),
        "game" => match game { GameKind::Base => "base", GameKind::Dist => "dist" },
        "samples" => est.samples,
        "wins" => est.wins,
        "estimate" => est.estimate,
        "stderr" => est.stderr,
        "exact_p_win" => format_ratio(&exact),
        "z_score" => if est.stderr > 0.0 { (est.estimate - to_f64(&exact)) / est.stderr } else { 0.0 },
    };
    Ok(Output::new("box simulate", Some(seed)).with_summary(summary))
}

pub fn ic_sweep_rows(field: &Field, bias: f64, m_min: u32, m_max: u32) -> CliResult<(Vec<Record>, info::Verdict)> {
    if m_min == 0 || m_min > m_max {
        return Err(Error::InvalidInput(format!("empty m range {m_min}..={m_max}")).into());
    }
    let rep = info::ic_dichotomy_experiment(field, bias, m_min..=m_max)?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            record! {
                "m" => r.m,
                "|U_m|" => r.indices,
                "per_index_MI" => r.per_index_mi,
                "total" => r.total,
                "verdict" => rep.verdict.to_string(),
            }
        })
        .collect();
    Ok((rows, rep.verdict))
}

pub fn ic_sweep(field: &Field, bias: BigRational, m_min: u32, m_max: u32) -> CliResult<Output> {
    let (rows, verdict) = ic_sweep_rows(field, to_f64(&bias), m_min, m_max)?;
    let summary = record! {
        "q" => field.q(),
        "E" => format_ratio(&bias),
        "critical_bias" => fourier::implied_bias_ceiling(field.q()),
        "verdict" => verdict.to_string(),
    };
    Ok(Output::new("ic-sweep", None).with_summary(summary).with_records(rows))
}

pub fn fourier_verify(field: &Field, n: usize, trials: usize, seed: u64) -> CliResult<Output> {
    let chi = additive_character(field);
    let rep = fourier::verify_random(field, &chi, n, trials, seed)?;
    let tight = fourier::character_bilinear_sum(field, &fourier::VectorFamily::fourier(field, &chi), &chi)?;
    if rep.violations > 0 {
        return Err(Error::InvariantViolation(format!("{} families exceed q^(3/2)", rep.violations)).into());
    }
    let summary = record! {
        "q" => field.q(),
        "n" => n,
        "trials" => trials,
        "max_value" => rep.max_value,
        "bound" => rep.bound,
        "max_ratio" => rep.max_ratio,
        "violations" => rep.violations,
        "fourier_family_value" => tight,
    };
    Ok(Output::new("fourier verify", Some(seed)).with_summary(summary))
}

pub fn fourier_maximize(field: &Field, n: usize, rounds: usize, restarts: usize, seed: u64) -> CliResult<Output> {
    let chi = additive_character(field);
    let r = fourier::maximize_restarts(field, &chi, n, seed, restarts, rounds)?;
    let bound = fourier::bound(field.q());
    if r.value > bound + fourier::BOUND_TOLERANCE {
        return Err(Error::InvariantViolation(format!("maximized sum {} exceeds q^(3/2)", r.value)).into());
    }
    let summary = record! {
        "q" => field.q(),
        "n" => n,
        "value" => r.value,
        "bound" => bound,
        "ratio" => r.value / bound,
        "rounds" => r.rounds,
    };
    Ok(Output::new("fourier maximize", Some(seed)).with_summary(summary))
}

pub fn cstar(sigma: usize, runs: u64, seed: u64) -> CliResult<Output> {
    if sigma < 2 {
        return Err(Error::InvalidInput("message alphabet needs at least 2 symbols".into()).into());
    }
    let stats = info::simulate_cstar(&TableProtocol::copy(sigma), runs, seed)?;
    let model = info::cstar_model(&TableProtocol::copy(sigma))?;
    let ix = &stats.per_index[0];
    let summary = record! {
        "sigma" => sigma,
        "runs" => runs,
        "bin1" => stats.bin1,
        "bin1_frequency" => stats.bin1_frequency,
        "bin1_expected" => stats.bin1_expected,
        "bin1_sigma" => stats.bin1_sigma,
        "mi_given_bin1" => ix.mi_estimate,
        "mi_sigma" => ix.mi_sigma,
        "mi_original" => ix.mi_exact,
        "mi_given_bin0_exact" => model.mi_given_bin0[0],
    };
    Ok(Output::new("cstar", Some(seed)).with_summary(summary))
}
