//! `report --all`: regenerates every golden table into one directory.
//!
//! Exact tables (classical values, construction counts, box identities) do
//! not depend on the seed. Seeded tables derive every run seed from the
//! master seed, so the whole directory is a function of `--seed`.

use std::path::{Path, PathBuf};

use chshq::boxes::{self, RegularBox};
use chshq::field::{additive_character, Field};
use chshq::incidence::{self, RegularizeOptions};
use chshq::info::{self, TableProtocol};
use chshq::rational::{format_ratio, ratio};
use chshq::{fourier, game};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{self, ConstructionKind};
use crate::error::{CliError, CliResult};
use crate::output::{Format, Output, Record};
use crate::record;

pub const CLASSICAL_ORDERS: [u32; 6] = [2, 3, 4, 5, 7, 8];
pub const TSIRELSON_ORDERS: [u32; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

fn classical_values() -> CliResult<Output> {
    let mut rows = Vec::new();
    for q in CLASSICAL_ORDERS {
        let f = Field::with_order(q as u64)?;
        let s = game::exact_classical_value(&f)?;
        rows.push(record! {
            "q" => q,
            "wins" => s.value.wins,
            "p_win" => format_ratio(&s.value.p_win),
            "bias" => format_ratio(&s.value.bias),
            "f" => commands::table(&s.strategy.f),
            "g" => commands::table(&s.strategy.g),
        });
    }
    Ok(Output::new("report classical-values", None).with_records(rows))
}

fn constructions(seed: u64) -> CliResult<Output> {
    let cases: [(ConstructionKind, u64); 7] = [
        (ConstructionKind::Subfield, 4),
        (ConstructionKind::Subfield, 9),
        (ConstructionKind::Subfield, 16),
        (ConstructionKind::Subfield, 25),
        (ConstructionKind::Grid, 101),
        (ConstructionKind::Grid, 1009),
        (ConstructionKind::Subspace, 243),
    ];
    let mut rows = Vec::new();
    for (kind, q) in cases {
        let f = Field::with_order(q)?;
        let (c, predicted) = commands::build_construction(&f, kind, seed, false)?;
        let counted = incidence::incidences(&f, &c);
        let qf = q as f64;
        let reference = match kind {
            ConstructionKind::Subfield => qf.powf(1.5),
            ConstructionKind::Grid => qf.powf(4.0 / 3.0) / 8.0,
            ConstructionKind::Subspace => qf.powf(4.0 / 3.0),
        };
        rows.push(record! {
            "kind" => kind.name(),
            "q" => q,
            "points" => c.points.len(),
            "lines" => c.lines.len(),
            "incidences" => counted,
            "predicted" => predicted,
            "reference" => format!("{reference:.6}"),
        });
    }
    Ok(Output::new("report constructions", Some(seed)).with_records(rows))
}

fn box_identities() -> CliResult<Output> {
    let mut rows = Vec::new();
    for q in [2u32, 3, 4, 5, 7, 8, 9] {
        let f = Field::with_order(q as u64)?;
        let biases = [ratio(-1, q as i64 - 1), ratio(0, 1), ratio(1, 3), ratio(1, 2), ratio(1, 1)];
        for e in biases {
            let b = RegularBox::new(q, e)?;
            for m in 1..=8 {
                let law = boxes::compose_m(&f, &b, m)?;
                rows.push(record! {
                    "q" => q,
                    "E" => format_ratio(&b.bias),
                    "m" => m,
                    "p_win" => format_ratio(&law.pmf()[0]),
                    "closed_form_equal" => law == b.composed_closed_form(m),
                });
            }
        }
    }
    Ok(Output::new("report box-identities", None).with_records(rows))
}

fn ic_sweep() -> CliResult<Output> {
    let f = Field::with_order(3)?;
    let mut rows = Vec::new();
    for (label, e) in [("1/2", 0.5), ("13/20", 0.65)] {
        let (r, _) = commands::ic_sweep_rows(&f, e, 2, 8)?;
        rows.extend(r.into_iter().map(|mut row| {
            let mut out = record! {"q" => 3, "E" => label};
            out.append(&mut row);
            out
        }));
    }
    Ok(Output::new("report ic-sweep", None).with_records(rows))
}

fn derived_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

fn regularization(seed: u64) -> CliResult<Output> {
    let f = Field::with_order(9)?;
    let c = incidence::subfield_construction(&f)?;
    let mut rows = Vec::new();
    for s in derived_seeds(seed, 16) {
        let (out, st) = incidence::random_projective_regularize(&f, &c, s, RegularizeOptions::default())?;
        let wins = game::win_count(&f, &incidence::config_to_strategy(&f, &out)?)?.wins;
        rows.push(record! {
            "run_seed" => s,
            "sampled_lines" => st.sampled_lines,
            "retained_points" => st.retained_points,
            "retained_lines" => st.retained_lines,
            "retained_incidences" => st.retained_incidences,
            "strategy_wins" => wins,
        });
    }
    Ok(Output::new("report regularization", Some(seed)).with_records(rows))
}

fn fourier_table(seed: u64) -> CliResult<Output> {
    let mut rows = Vec::new();
    for q in [2u32, 3, 4, 5, 7] {
        let f = Field::with_order(q as u64)?;
        let chi = additive_character(&f);
        let r = fourier::maximize_sum(&f, &chi, q as usize, seed, 50)?;
        let bound = fourier::bound(q);
        rows.push(record! {
            "q" => q,
            "n" => q,
            "value" => format!("{:.9}", r.value),
            "bound" => format!("{bound:.9}"),
            "ratio" => format!("{:.9}", r.value / bound),
            "rounds" => r.rounds,
        });
    }
    Ok(Output::new("report fourier", Some(seed)).with_records(rows))
}

fn cstar_table(seed: u64) -> CliResult<Output> {
    let mut rows = Vec::new();
    for k in [2usize, 3, 4] {
        let st = info::simulate_cstar(&TableProtocol::copy(k), 100_000, seed)?;
        let ix = &st.per_index[0];
        rows.push(record! {
            "sigma" => k,
            "runs" => st.runs,
            "bin1" => st.bin1,
            "bin1_expected" => st.bin1_expected,
            "bin1_sigma" => st.bin1_sigma,
            "mi_given_bin1" => ix.mi_estimate,
            "mi_sigma" => ix.mi_sigma,
            "mi_original" => ix.mi_exact,
        });
    }
    Ok(Output::new("report cstar", Some(seed)).with_records(rows))
}

/// Writes every table to `dir` and returns the paths written.
pub fn write_all(dir: &Path, format: Format, seed: u64) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tables: Vec<(&str, Output)> = vec![
        ("classical_values", classical_values()?),
        ("tsirelson", Output::new("report tsirelson", None).with_records(commands::tsirelson_rows(&TSIRELSON_ORDERS))),
        ("constructions", constructions(seed)?),
        ("box_identities", box_identities()?),
        ("ic_sweep", ic_sweep()?),
        ("regularization", regularization(seed)?),
        ("fourier", fourier_table(seed)?),
        ("cstar", cstar_table(seed)?),
    ];
    let mut written = Vec::new();
    for (name, out) in tables {
        let path = dir.join(format!("{name}.{}", format.extension()));
        out.emit(format, Some(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn summary(dir: &Path, written: &[PathBuf], seed: u64) -> Output {
    let rows: Vec<Record> = written
        .iter()
        .map(|p| record! {"file" => p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()})
        .collect();
    Output::new("report", Some(seed))
        .with_summary(record! {"directory" => dir.display().to_string(), "files" => written.len()})
        .with_records(rows)
}
