use std::io::{Read, Write};
use std::path::Path;

use crate::error::{FlowError, Result};
use crate::flow::DiagnosticsRecord;

pub const CSV_HEADER: [&str; 12] = [
    "t",
    "dt",
    "sup_R",
    "inf_R",
    "sup_u_tilde",
    "sup_grad_sq",
    "w_drift",
    "sup_h",
    "width_bound",
    "cinf_est",
    "res_poisson",
    "res_curv_evo",
];

fn row(r: &DiagnosticsRecord) -> [f64; 12] {
    [
        r.t,
        r.dt,
        r.sup_r,
        r.inf_r,
        r.sup_u_tilde,
        r.sup_grad_sq,
        r.w_drift,
        r.sup_h,
        r.width_bound,
        r.cinf_est,
        r.res_poisson,
        r.res_curv_evo,
    ]
}

/// Streams records as CSV; values use the shortest round-trip form.
pub struct DiagnosticsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> DiagnosticsWriter<W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner })
    }

    /// Continues an existing stream; no header is written.
    pub fn append(sink: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(sink),
        }
    }

    pub fn write(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.inner
            .write_record(row(record).iter().map(|v| format!("{v:e}")))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner
            .flush()
            .map_err(|e| FlowError::io("diagnostics stream", e))
    }
}

pub fn emit_diagnostics<W: Write>(records: &[DiagnosticsRecord], sink: W) -> Result<()> {
    if records.is_empty() {
        return Err(FlowError::History("no records to write".into()));
    }
    let mut w = DiagnosticsWriter::new(sink)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}

/// The twelve CSV columns of one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow(pub [f64; 12]);

impl CsvRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        CSV_HEADER
            .iter()
            .position(|c| *c == column)
            .map(|k| self.0[k])
    }
}

pub fn read_diagnostics<R: Read>(source: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(source);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(FlowError::History(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut vals = [0.0; 12];
        for (k, field) in rec.iter().enumerate() {
            vals[k] = field
                .parse()
                .map_err(|_| FlowError::History(format!("bad number {field:?} in column {k}")))?;
        }
        out.push(CsvRow(vals));
    }
    Ok(out)
}

pub fn read_diagnostics_file(path: &Path) -> Result<Vec<CsvRow>> {
    let f = std::fs::File::open(path).map_err(|e| FlowError::io(path, e))?;
    read_diagnostics(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            dt: 1e-3,
            sup_r: 4.0,
            inf_r: 1e-7,
            sup_u_tilde: 0.0,
            sup_grad_sq: 1.0 / 3.0,
            w_drift: 0.0,
            sup_h: 0.1,
            width_bound: 6.5,
            cinf_est: 6.4,
            res_poisson: 1e-14,
            res_curv_evo: 2e-6,
            bounded: true,
            v_consistency: 0.0,
            cigar_distance: None,
            frame_scale: 0.0,
        }
    }

    #[test]
    fn header_and_full_precision() {
        let mut buf = Vec::new();
        emit_diagnostics(&[record(0.0), record(0.1)], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "t,dt,sup_R,inf_R,sup_u_tilde,sup_grad_sq,w_drift,sup_h,width_bound,cinf_est,res_poisson,res_curv_evo\n"
        ));
        let rows = read_diagnostics(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].get("sup_grad_sq"), Some(1.0 / 3.0));
        assert_eq!(rows[1].get("t"), Some(0.1));
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        assert!(emit_diagnostics(&[], Vec::new()).is_err());
    }
}
