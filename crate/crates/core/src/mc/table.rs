use super::spec::TestId;

pub const CSV_HEADER: &str =
    "cell,hypothesis,dgp,T,test,rejection_rate,mc_std_error,adjusted,replications,failures";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub cell: String,
    /// "null" or "alternative".
    pub hypothesis: String,
    pub dgp: String,
    pub t_len: usize,
    pub test: TestId,
    pub rejection_rate: f64,
    pub mc_std_error: f64,
    pub adjusted: bool,
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.6}")
    }
}

impl ResultTable {
    /// CSV with fixed six-decimal formatting, so identical runs give
    /// identical bytes.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                field(&r.cell),
                field(&r.hypothesis),
                field(&r.dgp),
                r.t_len,
                r.test,
                num(r.rejection_rate),
                num(r.mc_std_error),
                r.adjusted,
                r.replications,
                r.failures
            ));
        }
        out
    }

    pub fn find(&self, cell: &str, hypothesis: &str, test: TestId) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.cell == cell && r.hypothesis == hypothesis && r.test == test)
            .collect()
    }
}
