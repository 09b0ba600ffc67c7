use std::io::{Read, Write};

use super::{BenchRecord, SelectionLossSummary};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "matrix_name",
    "num_rows",
    "num_cols",
    "nnz",
    "n",
    "kernel",
    "time_seconds",
    "gflops",
    "correct",
    "selected_by_rule",
];

/// Formats `x` with 6 significant digits, `%g` style: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros
/// removed.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // Round first so that e.g. 999999.5 picks the exponent of its rounded form.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

/// Writes one header line, one line per record, then the summary (if any)
/// as `#`-prefixed comment lines.
pub fn emit_csv<W: Write>(records: &[BenchRecord], summary: Option<&SelectionLossSummary>, sink: W) -> Result<()> {
    let mut w = ::csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.matrix_name.clone(),
            r.num_rows.to_string(),
            r.num_cols.to_string(),
            r.nnz.to_string(),
            r.n.to_string(),
            r.kernel.to_string(),
            format_sig(r.time_seconds),
            format_sig(r.gflops),
            r.correct.to_string(),
            r.selected_by_rule.to_string(),
        ])?;
    }
    w.flush()?;
    let mut sink = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    if let Some(s) = summary {
        writeln!(sink, "# selection loss over {} cells", s.cells)?;
        writeln!(sink, "# overall_loss,{}", format_sig(s.overall_loss))?;
        for (n, l) in &s.per_n_loss {
            writeln!(sink, "# per_n_loss,{n},{}", format_sig(*l))?;
        }
        for (k, l) in &s.single_kernel_loss {
            writeln!(sink, "# single_kernel_loss,{k},{}", format_sig(*l))?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn field(rec: &::csv::StringRecord, i: usize) -> Result<&str> {
    rec.get(i)
        .ok_or_else(|| Error::InvalidConfig(format!("CSV record is missing column {}", CSV_HEADER[i])))
}

fn num<V: std::str::FromStr>(rec: &::csv::StringRecord, i: usize) -> Result<V> {
    let s = field(rec, i)?;
    s.parse()
        .map_err(|_| Error::InvalidConfig(format!("bad {} value {s:?}", CSV_HEADER[i])))
}

/// Reads records written by [`emit_csv`], skipping comment lines.
pub fn parse_csv<R: Read>(source: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(source);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(BenchRecord {
            matrix_name: field(&rec, 0)?.to_string(),
            num_rows: num(&rec, 1)?,
            num_cols: num(&rec, 2)?,
            nnz: num(&rec, 3)?,
            n: num(&rec, 4)?,
            kernel: field(&rec, 5)?.parse()?,
            time_seconds: num(&rec, 6)?,
            gflops: num(&rec, 7)?,
            correct: num(&rec, 8)?,
            selected_by_rule: num(&rec, 9)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{gflops, KernelLabel};
    use super::*;
    use crate::kernels::KernelId;

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(0.8), "0.8");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(123456789.0), "1.23457e8");
        assert_eq!(format_sig(2e-5), "2e-5");
        assert_eq!(format_sig(0.000123456789), "0.000123457");
        assert_eq!(format_sig(1.23456789), "1.23457");
        assert_eq!(format_sig(999999.7), "1e6");
        assert_eq!(format_sig(-42.5), "-42.5");
        assert_eq!(format_sig(0.0), "0");
    }

    fn sample() -> BenchRecord {
        BenchRecord {
            matrix_name: "m,with comma".into(),
            num_rows: 4,
            num_cols: 5,
            nnz: 1000,
            n: 8,
            kernel: KernelLabel::Auto(KernelId::SeqBalanced),
            time_seconds: 2.345678e-5,
            gflops: gflops(1000, 8, 2.345678e-5),
            correct: true,
            selected_by_rule: true,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        emit_csv(&[], None, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn one_record_with_summary() {
        let summary = SelectionLossSummary {
            per_n_loss: [(8, 0.25)].into_iter().collect(),
            single_kernel_loss: [(KernelId::ParRowSplit, 0.5)].into_iter().collect(),
            overall_loss: 0.25,
            cells: 1,
        };
        let mut buf = Vec::new();
        emit_csv(&[sample()], Some(&summary), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 2);
        assert!(lines[1].starts_with("\"m,with comma\",4,5,1000,8,auto:seq-ws,2.34568e-5,"));
        assert!(lines.contains(&"# per_n_loss,8,0.25"));
        assert!(lines.contains(&"# single_kernel_loss,par-rs,0.5"));
    }

    #[test]
    fn parsed_gflops_consistent_with_time() {
        let mut recs = vec![sample()];
        for (i, t) in [1.5e-3, 7.77777e-7, 0.25].into_iter().enumerate() {
            recs.push(BenchRecord {
                matrix_name: format!("m{i}"),
                nnz: 12345 * (i + 1),
                n: 1 << i,
                kernel: KernelLabel::Kernel(KernelId::ALL[i]),
                time_seconds: t,
                gflops: gflops(12345 * (i + 1), 1 << i, t),
                correct: i % 2 == 0,
                selected_by_rule: false,
                ..sample()
            });
        }
        let mut buf = Vec::new();
        emit_csv(&recs, None, &mut buf).unwrap();
        let parsed = parse_csv(&buf[..]).unwrap();
        assert_eq!(parsed.len(), recs.len());
        for (p, r) in parsed.iter().zip(&recs) {
            assert_eq!(
                (p.matrix_name.as_str(), p.nnz, p.n, p.kernel, p.correct),
                (r.matrix_name.as_str(), r.nnz, r.n, r.kernel, r.correct)
            );
            let recomputed = gflops(p.nnz, p.n, p.time_seconds);
            // Two 6-digit roundings: time and gflops.
            assert!(
                (recomputed - p.gflops).abs() <= 2e-5 * p.gflops,
                "{recomputed} vs {}",
                p.gflops
            );
        }
    }
}
