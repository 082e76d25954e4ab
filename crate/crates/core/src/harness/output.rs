//! CSV tables and JSON summaries.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

use super::Summary;

pub const RUN_COLUMNS: [&str; 12] = [
    "seed", "n", "b_n", "S_n", "S_n_bn", "T_n_tn", "T_n_rn", "ratio_trimmed", "ratio_raw", "max_digit",
    "exceed_eps", "phi_half_n",
];
pub const PHI_COLUMNS: [&str; 5] = ["seed", "n", "phi_n", "phi_sq_sum", "dev_scaled"];
pub const PROPB_COLUMNS: [&str; 7] = ["seed", "source", "k", "l", "z_k", "z_l", "z_kl"];
pub const INVARIANT_COLUMNS: [&str; 6] = ["suite", "name", "checked", "defects", "pass", "witness"];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes the header row (always, even for an empty table) and then `rows`.
pub fn write_csv<T: Serialize, W: Write>(out: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_summary<W: Write>(mut out: W, summary: &Summary) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::runs::RunRow;

    #[test]
    fn header_is_written_for_empty_tables() {
        let mut buf = Vec::new();
        write_csv::<RunRow, _>(&mut buf, &RUN_COLUMNS, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "seed,n,b_n,S_n,S_n_bn,T_n_tn,T_n_rn,ratio_trimmed,ratio_raw,max_digit,exceed_eps,phi_half_n\n"
        );
    }

    #[test]
    fn rows_follow_the_schema() {
        let row = RunRow {
            seed: 3,
            n: 1000,
            b_n: -1,
            s_n: 1u128 << 70,
            s_n_bn: 12,
            t_n_tn: 11,
            t_n_rn: 10,
            ratio_trimmed: 0.5,
            ratio_raw: 1.25,
            max_digit: 9,
            exceed_eps: 2,
            phi_half_n: 1001,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &RUN_COLUMNS, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "3,1000,-1,1180591620717411303424,12,11,10,0.5,1.25,9,2,1001");
    }
}
