//! Flat tabular output: CSV with a header row, or JSON objects.

use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

/// Rows sharing one set of columns. A table built with [`Table::single`]
/// becomes a JSON object instead of an array.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub single: bool,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            single: false,
        }
    }

    pub fn single(fields: Vec<(&'static str, Value)>) -> Self {
        let (columns, row) = fields.into_iter().unzip();
        Self {
            columns,
            rows: vec![row],
            single: true,
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(csv_field)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let objects: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, Json> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), json_value(v)))
                    .collect();
                Json::Object(map)
            })
            .collect();
        let doc = match (self.single, objects.len()) {
            (true, 1) => objects.into_iter().next().unwrap(),
            _ => Json::Array(objects),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        text.push('\n');
        text
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Float(x) => format_sig(*x),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
    }
}

fn json_value(v: &Value) -> Json {
    match v {
        Value::Float(x) => Number::from_f64(*x).map_or(Json::Null, Json::Number),
        Value::Int(i) => Json::from(*i),
        Value::Bool(b) => Json::Bool(*b),
        Value::Text(s) => Json::String(s.clone()),
    }
}

/// `printf("%.12g")`: 12 significant digits, trailing zeros removed,
/// exponent form outside `1e-5 ≤ |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(100.0), "100");
        assert_eq!(format_sig(-2.5e-7), "-2.5e-07");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_sig(0.158113883008419), "0.158113883008");
        assert_eq!(format_sig(9.9999999999999e-6), "1e-05");
        assert_eq!(format_sig(f64::INFINITY), "inf");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![1.5.into(), Value::Int(2)]);
        t.push(vec![f64::NAN.into(), true.into()]);
        assert_eq!(t.to_csv(), "a,b\n1.5,2\nnan,true\n");
        let json: Json = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json[1]["a"], Json::Null);
        assert_eq!(json[0]["b"], Json::from(2));

        let one = Table::single(vec![("x", 0.1.into()), ("label", "noon".into())]);
        let json: Json = serde_json::from_str(&one.to_json()).unwrap();
        assert_eq!(json["label"], "noon");
        assert!(one.to_json().find("\"x\"").unwrap() < one.to_json().find("\"label\"").unwrap());
    }
}
