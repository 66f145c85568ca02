//! Matrix CSV input: one row per dimension, one column per sample, comma
//! separated. A first line that does not parse as numbers is a header.
//! Blank lines and lines starting with `#` are skipped.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn parse_matrix(text: &str, transpose: bool) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first = true;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Parse(format!(
                        "line {}: entry {} is not finite",
                        lineno + 1,
                        bad + 1
                    )));
                }
                if let Some(prev) = rows.first() {
                    if prev.len() != values.len() {
                        return Err(Error::Parse(format!(
                            "line {}: expected {} entries, found {}",
                            lineno + 1,
                            prev.len(),
                            values.len()
                        )));
                    }
                }
                rows.push(values);
            }
            Err(_) if first => {}
            Err(e) => {
                return Err(Error::Parse(format!("line {}: {e}", lineno + 1)));
            }
        }
        first = false;
    }
    if rows.is_empty() {
        return Err(Error::Parse("no numeric rows".into()));
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    Ok(if transpose { m.transpose() } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_detected() {
        let m = parse_matrix("a,b,c\n1,-2,3\n", false).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 3.0]));
        let m = parse_matrix("# comment\n1, 2\n\n3 ,4\n", true).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]));
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse_matrix("", false), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("1,2\n3\n", false), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("1,2\nx,4\n", false), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("1,inf\n", false), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("h1,h2\n", false), Err(Error::Parse(_))));
    }
}
