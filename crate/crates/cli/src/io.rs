//! Dataset files: CSV with header `chain,s_1..s_D,sp_1..sp_D,terminal`, or
//! JSON lines `{"chain": 1, "state": [..], "next_state": [..] | null, "terminal": false}`.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use csta::{Successor, TransitionDataset, TransitionRecord};

use crate::error::CliError;

fn input_err(path: &Path, line: u64, msg: impl std::fmt::Display) -> anyhow::Error {
    CliError::Input(format!("{}:{line}: {msg}", path.display())).into()
}

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("ndjson") | Some("json")
    )
}

pub fn read_dataset(path: &Path) -> Result<TransitionDataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records = if is_jsonl(path) {
        parse_jsonl(path, &text)?
    } else {
        parse_csv(path, &text)?
    };
    if records.is_empty() {
        return Err(CliError::Input(format!("{}: no transitions", path.display())).into());
    }
    let dataset = TransitionDataset::from_records(records)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    dataset
        .require_contiguous()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(dataset)
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim() {
        "0" | "false" | "False" | "FALSE" => Some(false),
        "1" | "true" | "True" | "TRUE" => Some(true),
        _ => None,
    }
}

fn parse_csv(path: &Path, text: &str) -> Result<Vec<TransitionRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| input_err(path, 1, e))?
        .clone();
    let cols = header.len();
    if cols < 4 || cols % 2 != 0 {
        return Err(input_err(path, 1, "expected header chain,s_1..s_D,sp_1..sp_D,terminal"));
    }
    let dim = (cols - 2) / 2;
    let expected: Vec<String> = std::iter::once("chain".to_string())
        .chain((1..=dim).map(|d| format!("s_{d}")))
        .chain((1..=dim).map(|d| format!("sp_{d}")))
        .chain(std::iter::once("terminal".to_string()))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(input_err(path, 1, format!("expected header {}", expected.join(","))));
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input_err(path, line, e)
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let chain: usize = row[0]
            .parse()
            .map_err(|_| input_err(path, line, format!("invalid chain index {:?}", &row[0])))?;
        let number = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input_err(path, line, format!("invalid value {:?} in column {}", &row[i], &header[i])))
        };
        let state = (1..=dim).map(number).collect::<Result<Vec<_>>>()?;
        let terminal = parse_flag(&row[cols - 1])
            .ok_or_else(|| input_err(path, line, format!("invalid terminal flag {:?}", &row[cols - 1])))?;
        let successor = if terminal {
            Successor::Terminal
        } else {
            Successor::State((dim + 1..=2 * dim).map(number).collect::<Result<Vec<_>>>()?)
        };
        records.push(TransitionRecord { chain, state, successor });
    }
    Ok(records)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    chain: usize,
    state: Vec<f64>,
    #[serde(default)]
    next_state: Option<Vec<f64>>,
    #[serde(default)]
    terminal: bool,
}

fn parse_jsonl(path: &Path, text: &str) -> Result<Vec<TransitionRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(line).map_err(|e| input_err(path, line_no, e))?;
        let successor = match (rec.terminal, rec.next_state) {
            (true, _) => Successor::Terminal,
            (false, Some(s)) => Successor::State(s),
            (false, None) => return Err(input_err(path, line_no, "non-terminal record without next_state")),
        };
        records.push(TransitionRecord {
            chain: rec.chain,
            state: rec.state,
            successor,
        });
    }
    Ok(records)
}

/// Serialises a dataset in the format chosen by the file extension.
pub fn format_dataset(dataset: &TransitionDataset, path: &Path) -> String {
    let dim = dataset.dim();
    let mut out = String::new();
    if is_jsonl(path) {
        for r in dataset.records() {
            let value = serde_json::json!({
                "chain": r.chain,
                "state": r.state,
                "next_state": r.successor.state(),
                "terminal": r.successor.is_terminal(),
            });
            out.push_str(&value.to_string());
            out.push('\n');
        }
        return out;
    }
    let header: Vec<String> = std::iter::once("chain".to_string())
        .chain((1..=dim).map(|d| format!("s_{d}")))
        .chain((1..=dim).map(|d| format!("sp_{d}")))
        .chain(std::iter::once("terminal".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in dataset.records() {
        write!(out, "{}", r.chain).unwrap();
        for v in &r.state {
            write!(out, ",{v}").unwrap();
        }
        match r.successor.state() {
            Some(sp) => {
                for v in sp {
                    write!(out, ",{v}").unwrap();
                }
                out.push_str(",0\n");
            }
            None => {
                out.push_str(&",".repeat(dim));
                out.push_str(",1\n");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let ds = TransitionDataset::from_records(vec![
            TransitionRecord::new(1, vec![0.5, 0.25], vec![0.75, 0.125]),
            TransitionRecord::terminal(2, vec![0.1, 0.2]),
        ])
        .unwrap();
        let path = Path::new("d.csv");
        let text = format_dataset(&ds, path);
        assert!(text.starts_with("chain,s_1,s_2,sp_1,sp_2,terminal\n"));
        assert_eq!(parse_csv(path, &text).unwrap(), ds.records());
        let jpath = Path::new("d.jsonl");
        assert_eq!(parse_jsonl(jpath, &format_dataset(&ds, jpath)).unwrap(), ds.records());
    }

    #[test]
    fn line_numbers_in_errors() {
        let text = "chain,s_1,sp_1,terminal\n1,0.5,0.6,0\n1,abc,0.2,0\n";
        let err = parse_csv(Path::new("d.csv"), text).unwrap_err().to_string();
        assert!(err.contains("d.csv:3"), "{err}");
        let err = parse_csv(Path::new("d.csv"), "chain,x,terminal\n").unwrap_err().to_string();
        assert!(err.contains("d.csv:1"), "{err}");
        let err = parse_jsonl(Path::new("d.jsonl"), "{\"chain\":1,\"state\":[0]}\n").unwrap_err().to_string();
        assert!(err.contains("d.jsonl:1"), "{err}");
    }
}
