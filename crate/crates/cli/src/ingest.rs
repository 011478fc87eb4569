//! Reading a univariate series from CSV.

use std::fmt;

#[derive(Debug)]
pub struct ParseError {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Parses CSV text holding one series. Lines starting with `#` and blank
/// lines are skipped. The value is the last column; earlier columns (an
/// index or a date) are ignored. A first row whose value does not parse as
/// a number is taken as the header.
pub fn parse_series(text: &str) -> Result<Vec<f64>, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = record.iter().next_back().unwrap_or("");
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => {
                return Err(ParseError {
                    line,
                    message: format!("value '{field}' is not finite"),
                })
            }
            Err(_) if first => {}
            Err(_) => {
                return Err(ParseError {
                    line,
                    message: format!("cannot parse '{field}' as a number"),
                })
            }
        }
        first = false;
    }
    if values.is_empty() {
        return Err(ParseError {
            line: 0,
            message: "no observations found".into(),
        });
    }
    Ok(values)
}
