//! Report rendering: CSV files plus a plain-text summary table.
//! Output bytes are a pure function of the inputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::write_csv_with_comments;
use crate::Result;

use super::{SweepResult, TransferMatrix};

/// Files produced by a report render.
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

fn fmt_rate(rate: f64) -> String {
    format!("{rate:.4}")
}

/// Writes `<stem>.csv` and `<stem>.txt` for a transfer matrix.
pub fn write_matrix_report(
    matrix: &TransferMatrix,
    out_dir: &Path,
    stem: &str,
    extra_comments: &[String],
) -> Result<ReportPaths> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let summary_path = out_dir.join(format!("{stem}.txt"));

    let mut comments = vec![format!("attack_config_fingerprint={}", matrix.config_fingerprint)];
    comments.extend_from_slice(extra_comments);

    let mut header = vec!["source".to_string(), "method".to_string()];
    header.extend(matrix.model_names.iter().cloned());
    let rows: Vec<Vec<String>> = matrix
        .rates
        .iter()
        .enumerate()
        .map(|(si, row)| {
            let mut fields = vec![matrix.model_names[si].clone(), matrix.method.to_string()];
            fields.extend(row.iter().map(|&r| fmt_rate(r)));
            fields
        })
        .collect();
    write_csv_with_comments(&comments, &header, &rows, &csv_path)?;

    std::fs::write(&summary_path, matrix_summary(matrix, extra_comments))?;
    Ok(ReportPaths { csv: csv_path, summary: summary_path })
}

/// Plain-text matrix table; the white-box diagonal is starred.
pub fn matrix_summary(matrix: &TransferMatrix, extra_comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "transfer matrix, method {}", matrix.method);
    let _ = writeln!(out, "attack_config_fingerprint={}", matrix.config_fingerprint);
    for c in extra_comments {
        let _ = writeln!(out, "{c}");
    }
    let _ = writeln!(out, "rows generate, columns evaluate; * marks white-box cells");
    let width = matrix
        .model_names
        .iter()
        .map(|n| n.len())
        .max()
        .unwrap_or(6)
        .max(9);
    let _ = write!(out, "{:width$}", "source");
    for name in &matrix.model_names {
        let _ = write!(out, " {name:>width$}");
    }
    let _ = writeln!(out);
    for (si, row) in matrix.rates.iter().enumerate() {
        let _ = write!(out, "{:width$}", matrix.model_names[si]);
        for (ti, &rate) in row.iter().enumerate() {
            let star = if matrix.is_white_box(si, ti) { "*" } else { "" };
            let cell = format!("{}{star}", fmt_rate(rate));
            let _ = write!(out, " {cell:>width$}");
        }
        let _ = writeln!(out);
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.txt` for a sweep. Columns: the swept
/// value, then one column per (method, target) pair.
pub fn write_sweep_report(
    sweep: &SweepResult,
    out_dir: &Path,
    stem: &str,
    extra_comments: &[String],
) -> Result<ReportPaths> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let summary_path = out_dir.join(format!("{stem}.txt"));

    let mut comments = vec![format!("fixed_config_fingerprint={}", sweep.fixed_fingerprint)];
    comments.extend_from_slice(extra_comments);

    let mut header = vec![sweep.parameter.clone()];
    for method in &sweep.methods {
        for target in &sweep.targets {
            header.push(format!("{method}->{target}"));
        }
    }
    let rows: Vec<Vec<String>> = sweep
        .values
        .iter()
        .enumerate()
        .map(|(vi, &value)| {
            let mut fields = vec![format_value(value)];
            for mi in 0..sweep.methods.len() {
                for ti in 0..sweep.targets.len() {
                    fields.push(fmt_rate(sweep.rates[vi][mi][ti]));
                }
            }
            fields
        })
        .collect();
    write_csv_with_comments(&comments, &header, &rows, &csv_path)?;

    std::fs::write(&summary_path, sweep_summary(sweep, extra_comments))?;
    Ok(ReportPaths { csv: csv_path, summary: summary_path })
}

/// Plain-text sweep table, one block per method.
pub fn sweep_summary(sweep: &SweepResult, extra_comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} sweep over {:?}", sweep.parameter, sweep.values);
    let _ = writeln!(out, "fixed_config_fingerprint={}", sweep.fixed_fingerprint);
    for c in extra_comments {
        let _ = writeln!(out, "{c}");
    }
    let width = sweep.targets.iter().map(|n| n.len()).max().unwrap_or(6).max(9);
    for (mi, method) in sweep.methods.iter().enumerate() {
        let _ = writeln!(out, "method {method} (generated on {})", sweep.targets[0]);
        let _ = write!(out, "{:>10}", sweep.parameter);
        for name in &sweep.targets {
            let _ = write!(out, " {name:>width$}");
        }
        let _ = writeln!(out);
        for (vi, &value) in sweep.values.iter().enumerate() {
            let _ = write!(out, "{:>10}", format_value(value));
            for ti in 0..sweep.targets.len() {
                let _ = write!(out, " {:>width$}", fmt_rate(sweep.rates[vi][mi][ti]));
            }
            let _ = writeln!(out);
        }
    }
    out
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::AttackMethod;
    use tempfile::tempdir;

    fn fixture_matrix() -> TransferMatrix {
        TransferMatrix {
            method: AttackMethod::NmiFgsm,
            model_names: vec!["alpha".into(), "beta".into()],
            rates: vec![vec![91.7, 0.0], vec![3.8, 90.7]],
            config_fingerprint: "cafe0123".into(),
        }
    }

    fn fixture_sweep() -> SweepResult {
        SweepResult {
            parameter: "delta".into(),
            values: vec![65.0, 130.0],
            methods: vec![AttackMethod::NiFgsm, AttackMethod::NiFgm],
            targets: vec!["alpha".into(), "beta".into()],
            rates: vec![
                vec![vec![99.0, 10.0], vec![98.0, 12.0]],
                vec![vec![95.0, 5.0], vec![90.0, 6.0]],
            ],
            fixed_fingerprint: "beef4567".into(),
        }
    }

    #[test]
    fn matrix_render_is_byte_deterministic() {
        let dir = tempdir().unwrap();
        let m = fixture_matrix();
        let p1 = write_matrix_report(&m, dir.path(), "m1", &[]).unwrap();
        let p2 = write_matrix_report(&m, dir.path(), "m2", &[]).unwrap();
        assert_eq!(std::fs::read(&p1.csv).unwrap(), std::fs::read(&p2.csv).unwrap());
        assert_eq!(std::fs::read(&p1.summary).unwrap(), std::fs::read(&p2.summary).unwrap());
        let text = std::fs::read_to_string(&p1.csv).unwrap();
        assert!(text.starts_with("# attack_config_fingerprint=cafe0123\n"));
        assert!(text.contains("source,method,alpha,beta"));
        assert!(text.contains("alpha,nmi-fgsm,91.7000,0.0000"));
    }

    #[test]
    fn matrix_summary_stars_diagonal() {
        let text = matrix_summary(&fixture_matrix(), &[]);
        assert!(text.contains("91.7000*"));
        assert!(text.contains("90.7000*"));
        assert!(!text.contains("0.0000*"));
    }

    #[test]
    fn sweep_csv_schema_is_value_then_method_target_columns() {
        let dir = tempdir().unwrap();
        let s = fixture_sweep();
        let paths = write_sweep_report(&s, dir.path(), "s", &[]).unwrap();
        let text = std::fs::read_to_string(&paths.csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# fixed_config_fingerprint=beef4567");
        assert_eq!(
            lines.next().unwrap(),
            "delta,ni-fgsm->alpha,ni-fgsm->beta,ni-fgm->alpha,ni-fgm->beta"
        );
        assert_eq!(lines.next().unwrap(), "65,99.0000,10.0000,98.0000,12.0000");
        assert_eq!(lines.next().unwrap(), "130,95.0000,5.0000,90.0000,6.0000");
    }

    #[test]
    fn sweep_csv_reparses_to_the_same_grid() {
        let dir = tempdir().unwrap();
        let s = fixture_sweep();
        let paths = write_sweep_report(&s, dir.path(), "s", &[]).unwrap();
        let text = std::fs::read_to_string(&paths.csv).unwrap();
        let body: String = text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let mut parsed = Vec::new();
        for record in reader.records() {
            let record = record.unwrap();
            let row: Vec<f64> = record.iter().skip(1).map(|f| f.parse().unwrap()).collect();
            parsed.push(row);
        }
        assert_eq!(parsed, vec![vec![99.0, 10.0, 98.0, 12.0], vec![95.0, 5.0, 90.0, 6.0]]);
    }
}
