//! Flat `x,y,series` CSV from a saved report.

use serde_json::Value;

use crate::CliError;

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| CliError::Usage(format!("report has no field {key:?}")))
}

fn numbers(v: &Value, key: &str) -> Result<Vec<f64>, CliError> {
    field(v, key)?
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| CliError::Usage(format!("field {key:?} is not a list of numbers")))
}

fn push_series(rows: &mut String, xs: &[f64], ys: &[f64], series: &str) {
    for (x, y) in xs.iter().zip(ys) {
        rows.push_str(&format!("{x},{y:e},{series}\n"));
    }
}

fn certification_rows(rows: &mut String, rep: &Value, prefix: &str) -> Result<(), CliError> {
    let levels = numbers(rep, "levels")?;
    push_series(rows, &levels, &numbers(rep, "commutator_by_level")?, &format!("{prefix}max_commutator"));
    push_series(rows, &levels, &numbers(rep, "expectation_dev_by_level")?, &format!("{prefix}max_expectation_dev"));
    Ok(())
}

pub fn emit_plot_data(text: &str) -> Result<String, CliError> {
    let report: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let data = field(&report, "data")?;
    let mut rows = String::from("x,y,series\n");
    match field(&report, "command")?.as_str() {
        Some("certify") => certification_rows(&mut rows, data, "")?,
        Some("vdh-sweep") => {
            for p in field(data, "points")?.as_array().into_iter().flatten() {
                let (m, fid) = (field(p, "m")?, field(p, "fidelity")?);
                rows.push_str(&format!("{m},{:e},fidelity\n", fid.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Some("universal") => {
            let reports = field(data, "reports")?.as_array().cloned().unwrap_or_default();
            for (i, rep) in reports.iter().filter(|r| r["label"] != "cross-member").enumerate() {
                let levels = numbers(rep, "levels")?;
                push_series(&mut rows, &levels, &numbers(rep, "expectation_dev_by_level")?, &format!("member {i}"));
            }
        }
        other => {
            return Err(CliError::Usage(format!("no plot layout for report kind {other:?}")));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_report_names_position() {
        let err = emit_plot_data("{\n  \"command\": \"certify\",\n  oops\n}").unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 3);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn certification_projection() {
        let text = r#"{"command":"certify","data":{"levels":[1,2],"commutator_by_level":[0.0,0.0],
            "expectation_dev_by_level":[1e-16,2e-16]}}"#;
        let csv = emit_plot_data(text).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,series");
        assert_eq!(lines[1], "1,0e0,max_commutator");
        assert_eq!(lines[4], "2,2e-16,max_expectation_dev");
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(emit_plot_data(r#"{"command":"convert","data":{}}"#).is_err());
    }
}
