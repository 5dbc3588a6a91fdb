//! Command output: one table plus keyed metadata, rendered as CSV or JSON.
//!
//! Rendering depends only on the report contents, so identical inputs give
//! identical bytes.

use serde_json::{Map, Value as Json};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_json(&self) -> Json {
        match self {
            Cell::Int(i) => Json::from(*i),
            Cell::Text(s) => Json::from(s.as_str()),
            Cell::Bool(b) => Json::from(*b),
        }
    }

    fn to_text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

pub type Fields = Vec<(String, Cell)>;

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Fields,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub result: Fields,
    pub expected: Fields,
    pub failures: Vec<Fields>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, config: Fields, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            result: Vec::new(),
            expected: Vec::new(),
            failures: Vec::new(),
            pass: true,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_json(&self) -> String {
        let fields = |f: &Fields| -> Json {
            Json::Object(f.iter().map(|(k, v)| (k.clone(), v.to_json())).collect::<Map<_, _>>())
        };
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                Json::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.clone(), v.to_json()))
                        .collect::<Map<_, _>>(),
                )
            })
            .collect();
        let mut top = Map::new();
        top.insert("command".into(), Json::from(self.command.as_str()));
        top.insert("config".into(), fields(&self.config));
        top.insert("rows".into(), Json::Array(rows));
        top.insert("result".into(), fields(&self.result));
        top.insert("expected".into(), fields(&self.expected));
        top.insert("failures".into(), Json::Array(self.failures.iter().map(fields).collect()));
        top.insert("status".into(), Json::from(self.status()));
        let mut out = serde_json::to_string_pretty(&Json::Object(top)).expect("serializable");
        out.push('\n');
        out
    }

    /// `# key: value` header lines, then the table with a header row.
    fn render_csv(&self) -> String {
        let mut out = format!("# command: {}\n", self.command);
        let mut header = |prefix: &str, fields: &Fields| {
            for (k, v) in fields {
                out.push_str(&format!("# {prefix}{k}: {}\n", v.to_text()));
            }
        };
        header("", &self.config);
        header("result.", &self.result);
        header("expected.", &self.expected);
        for f in &self.failures {
            let parts: Vec<String> = f.iter().map(|(k, v)| format!("{k}={}", v.to_text())).collect();
            out.push_str(&format!("# failure: {}\n", parts.join(" ")));
        }
        out.push_str(&format!("# status: {}\n", self.status()));
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::to_text))
                .expect("in-memory write");
        }
        let table = String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8");
        out.push_str(&table);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("coeffs", vec![("route".into(), "b".into())], &["index", "value"]);
        r.push_row(vec![0usize.into(), "1".into()]);
        r.push_row(vec![1usize.into(), "1/2".into()]);
        r.expected.push(("b_1".into(), "1/2".into()));
        r
    }

    #[test]
    fn csv_layout() {
        let text = sample().render(Format::Csv);
        assert_eq!(
            text,
            "# command: coeffs\n# route: b\n# expected.b_1: 1/2\n# status: pass\nindex,value\n0,1\n1,1/2\n"
        );
    }

    #[test]
    fn json_layout() {
        let text = sample().render(Format::Json);
        let v: Json = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["command", "config", "rows", "result", "expected", "failures", "status"]);
        assert_eq!(v["rows"][1]["value"], "1/2");
        assert_eq!(v["rows"][1]["index"], 1);
        assert_eq!(v["status"], "pass");
    }
}
