//! Report emission as JSON or CSV.

use rug::{Complex, Float};
use serde_json::{Map, Value};

use knotlab::num::{fmt_bound, fmt_float};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One output row; numeric entries always come with an `_err` sibling.
#[derive(Clone, Debug, Default)]
pub struct Row {
    fields: Map<String, Value>,
}

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.fields.insert(key.into(), Value::String(v.into()));
        self
    }

    pub fn int(mut self, key: &str, v: i64) -> Self {
        self.fields.insert(key.into(), Value::from(v));
        self
    }

    /// Exact number: error bound is zero.
    pub fn exact(mut self, key: &str, v: impl ToString) -> Self {
        self.fields.insert(key.into(), Value::String(v.to_string()));
        self.fields.insert(format!("{key}_err"), Value::String("0".into()));
        self
    }

    pub fn real(mut self, key: &str, v: &Float, err: &Float, digits: u32) -> Self {
        self.fields.insert(key.into(), Value::String(fmt_float(v, digits)));
        self.fields.insert(format!("{key}_err"), Value::String(fmt_bound(err)));
        self
    }

    pub fn complex(mut self, key: &str, v: &Complex, err: &Float, digits: u32) -> Self {
        self.fields.insert(format!("{key}_re"), Value::String(fmt_float(v.real(), digits)));
        self.fields.insert(format!("{key}_im"), Value::String(fmt_float(v.imag(), digits)));
        self.fields.insert(format!("{key}_err"), Value::String(fmt_bound(err)));
        self
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub meta: Map<String, Value>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), meta: Map::new(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.meta.insert(key.into(), v.into());
        self
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn to_json(&self) -> String {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.clone()));
        for (k, v) in &self.meta {
            top.insert(k.clone(), v.clone());
        }
        let rows = self.rows.iter().map(|r| Value::Object(r.fields.clone())).collect();
        top.insert("results".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json");
        s.push('\n');
        s
    }

    /// Rows only; the header is the union of keys in first-seen order.
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = Vec::new();
        for r in &self.rows {
            for k in r.fields.keys() {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("csv");
        for r in &self.rows {
            let rec: Vec<String> = header
                .iter()
                .map(|k| match r.fields.get(k) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                })
                .collect();
            w.write_record(&rec).expect("csv");
        }
        String::from_utf8(w.into_inner().expect("csv")).expect("utf-8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_key_union() {
        let mut r = Report::new("t");
        r.push(Row::new().int("N", 1).exact("v", 3));
        r.push(Row::new().int("N", 2).text("note", "a,b"));
        assert_eq!(r.to_csv(), "N,v,v_err,note\n1,3,0,\n2,,,\"a,b\"\n");
    }

    #[test]
    fn numeric_fields_have_bounds() {
        let prec = 128;
        let row = Row::new()
            .real("x", &Float::with_val(prec, 1.5), &Float::with_val(53, 1e-20), 10)
            .complex("z", &Complex::with_val(prec, (1, -2)), &Float::new(53), 10);
        let keys: Vec<&String> = row.fields.keys().collect();
        assert_eq!(keys, ["x", "x_err", "z_re", "z_im", "z_err"]);
        assert_eq!(row.fields["z_err"], "0");
    }
}
