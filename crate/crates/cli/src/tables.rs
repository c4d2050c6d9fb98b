//! Tiny numeric-CSV helpers: every file the tool writes is parsed back
//! before the command reports success.

/// Data rows (empty fields become `None`) plus `#`-prefixed footer lines.
pub type NumericTable = (Vec<Vec<Option<f64>>>, Vec<String>);

/// Parse a numeric CSV with the given header. Empty fields become `None`;
/// `#`-prefixed lines are footers and are returned separately.
pub fn parse_numeric_csv(text: &str, expected_header: &str) -> Result<NumericTable, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != expected_header {
        return Err(format!(
            "header mismatch: got {header:?}, expected {expected_header:?}"
        ));
    }
    let width = expected_header.split(',').count();
    let mut rows = Vec::new();
    let mut footers = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(f) = line.strip_prefix('#') {
            footers.push(f.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(format!("row width {} != {width}", fields.len()));
        }
        let row = fields
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|e| format!("{s:?}: {e}"))
                }
            })
            .collect::<Result<Vec<Option<f64>>, String>>()?;
        rows.push(row);
    }
    Ok((rows, footers))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_and_footers() {
        let text = "a,b\n1,2\n3,\n# converged=true\n";
        let (rows, footers) = parse_numeric_csv(text, "a,b").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], vec![Some(1.0), Some(2.0)]);
        assert_eq!(rows[1], vec![Some(3.0), None]);
        assert_eq!(footers, vec!["converged=true"]);
    }

    #[test]
    fn rejects_header_mismatch() {
        assert!(parse_numeric_csv("x,y\n", "a,b").is_err());
    }
}
