//! Reading configurations back in.
//!
//! Accepted forms: a bare `{"q", "points", "lines"}` object, the JSON
//! envelope written by `construct` or `regularize`, or the CSV form of that
//! envelope. In the envelope forms each record is `kind,a,b` where a point
//! is `(a, b)` and a line is `z2 = a z1 - b`.

use std::path::Path;

use chshq::field::Element;
use chshq::incidence::{Config, Line, Point};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::Record;
use crate::record;

pub fn config_records(c: &Config) -> Vec<Record> {
    let points = c.points.iter().map(|p| record! {"kind" => "point", "a" => p.0 .0, "b" => p.1 .0});
    let lines = c.lines.iter().map(|l| record! {"kind" => "line", "a" => l.slope.0, "b" => l.intercept.0});
    points.chain(lines).collect()
}

fn parse_u32(text: &str, what: &str) -> CliResult<u32> {
    text.trim().parse().map_err(|_| CliError::Parse(format!("{what}: expected an integer, got {text:?}")))
}

fn from_rows(q: u32, rows: impl Iterator<Item = CliResult<(String, u32, u32)>>) -> CliResult<Config> {
    let mut points: Vec<Point> = Vec::new();
    let mut lines = Vec::new();
    for row in rows {
        let (kind, a, b) = row?;
        match kind.as_str() {
            "point" => points.push((Element(a), Element(b))),
            "line" => lines.push(Line::new(Element(a), Element(b))),
            other => return Err(CliError::Parse(format!("unknown record kind {other:?}"))),
        }
    }
    Ok(Config::new(q, points, lines))
}

fn value_u32(v: &Value, what: &str) -> CliResult<u32> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| CliError::Parse(format!("{what}: {n} is not a valid element"))),
        Value::String(s) => parse_u32(s, what),
        _ => Err(CliError::Parse(format!("{what}: expected a number"))),
    }
}

pub fn parse_config(text: &str) -> CliResult<Config> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed)?;
        if v.get("points").is_some() {
            return Ok(serde_json::from_value(v)?);
        }
        let q = v
            .get("summary")
            .and_then(|s| s.get("q"))
            .ok_or_else(|| CliError::Parse("envelope has no summary.q".into()))?;
        let q = value_u32(q, "q")?;
        let records = v
            .get("records")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Parse("envelope has no records".into()))?;
        return from_rows(
            q,
            records.iter().map(|r| {
                let kind = r.get("kind").and_then(Value::as_str).unwrap_or_default().to_string();
                Ok((kind, value_u32(&r["a"], "a")?, value_u32(&r["b"], "b")?))
            }),
        );
    }
    let mut q = None;
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("q=") {
                q = Some(parse_u32(v, "q")?);
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let q = q.ok_or_else(|| CliError::Parse("CSV input has no `# q=` header".into()))?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
    from_rows(
        q,
        rows.into_iter().map(|r| {
            let field = |i: usize| r.get(i).ok_or_else(|| CliError::Parse("short CSV row".into()));
            Ok((field(0)?.to_string(), parse_u32(field(1)?, "a")?, parse_u32(field(2)?, "b")?))
        }),
    )
}

pub fn read_config(path: &Path) -> CliResult<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Output;

    #[test]
    fn all_three_forms_parse() {
        let c = Config::new(3, vec![(Element(1), Element(2))], vec![Line::new(Element(0), Element(1))]);
        let bare = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&bare).unwrap(), c);
        let out = Output::new("construct", None).with_summary(record! {"q" => 3}).with_records(config_records(&c));
        assert_eq!(parse_config(&out.to_json()).unwrap(), c);
        assert_eq!(parse_config(&out.to_csv().unwrap()).unwrap(), c);
        assert!(parse_config("a,b\n1,2\n").is_err());
    }
}
