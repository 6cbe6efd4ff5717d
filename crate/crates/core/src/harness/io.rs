//! CSV and JSON result files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AggregateRow, EnsembleTable, HarnessError, Observable};
use crate::circuits::Model;

/// One line of a result file; column order is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub chi: Option<usize>,
    pub seed_base: u64,
    pub n_traj: usize,
    pub t: usize,
    pub observable: String,
    pub cut: Option<usize>,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

pub const CSV_HEADER: &str = "model,L,p,beta,gamma,chi,seed_base,n_traj,t,observable,cut,value,stderr,n_samples";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guess from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl EnsembleTable {
    pub fn result_rows(&self) -> Vec<ResultRow> {
        self.rows
            .iter()
            .map(|r| ResultRow {
                model: self.model.to_string(),
                l: self.l,
                p: self.p,
                beta: self.beta,
                gamma: self.gamma,
                chi: self.chi,
                seed_base: self.seed_base,
                n_traj: self.n_traj,
                t: r.t,
                observable: r.observable.to_string(),
                cut: r.cut,
                value: r.mean,
                stderr: r.sem,
                n_samples: r.n,
            })
            .collect()
    }

    /// Regroup file rows into one table per parameter set, in order of first appearance.
    pub fn from_result_rows(rows: &[ResultRow]) -> Result<Vec<EnsembleTable>, HarnessError> {
        let mut tables: Vec<EnsembleTable> = Vec::new();
        for r in rows {
            let model = Model::from_short_name(&r.model)
                .ok_or_else(|| HarnessError::Schedule(format!("unknown model {:?}", r.model)))?;
            let observable: Observable = r.observable.parse().map_err(HarnessError::Schedule)?;
            let same = |t: &EnsembleTable| {
                t.model == model
                    && t.l == r.l
                    && t.p == r.p
                    && t.beta == r.beta
                    && t.gamma == r.gamma
                    && t.chi == r.chi
                    && t.seed_base == r.seed_base
                    && t.n_traj == r.n_traj
            };
            let idx = match tables.iter().position(same) {
                Some(i) => i,
                None => {
                    tables.push(EnsembleTable {
                        model,
                        l: r.l,
                        p: r.p,
                        beta: r.beta,
                        gamma: r.gamma,
                        chi: r.chi,
                        seed_base: r.seed_base,
                        n_traj: r.n_traj,
                        rows: Vec::new(),
                        warnings: Vec::new(),
                    });
                    tables.len() - 1
                }
            };
            tables[idx].rows.push(AggregateRow { t: r.t, observable, cut: r.cut, mean: r.value, sem: r.stderr, n: r.n_samples });
        }
        Ok(tables)
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow], format: Format) -> Result<(), HarnessError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if rows.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn emit_results(table: &EnsembleTable, path: &Path, format: Format) -> Result<(), HarnessError> {
    write_rows(BufWriter::new(File::create(path)?), &table.result_rows(), format)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    match Format::from_path(path) {
        Format::Json => Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?),
        Format::Csv => {
            let mut r = csv::Reader::from_path(path)?;
            Ok(r.deserialize().collect::<Result<_, _>>()?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let rows = vec![row(Some(6)), row(None), ResultRow { l: 24, ..row(Some(3)) }];
        let tables = EnsembleTable::from_result_rows(&rows).unwrap();
        assert_eq!(tables.len(), 2);
        let mut back = tables[0].result_rows();
        back.extend(tables[1].result_rows());
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[], Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    fn row(cut: Option<usize>) -> ResultRow {
        ResultRow {
            model: "clifford-dual".into(),
            l: 12,
            p: 0.5,
            beta: None,
            gamma: Some(1.0),
            chi: None,
            seed_base: 3,
            n_traj: 4,
            t: 7,
            observable: "ee".into(),
            cut,
            value: 1.2345678901234567,
            stderr: 0.1,
            n_samples: 4,
        }
    }

    #[test]
    fn csv_header_and_round_trip() {
        let rows = vec![row(Some(6)), row(None)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let back: Vec<ResultRow> = csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(back, rows);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["r.csv", "r.json"] {
            let path = dir.path().join(name);
            let rows = vec![row(Some(1)), row(Some(2))];
            write_rows(File::create(&path).unwrap(), &rows, Format::from_path(&path)).unwrap();
            assert_eq!(read_results(&path).unwrap(), rows);
        }
    }
}
