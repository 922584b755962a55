use serde::Serialize;
use serde_json::{json, Map, Value};

use hodge_wp::linalg::Matrix;
use hodge_wp::model_io::{number_of, ModelFile};
use hodge_wp::scalar::Scalar;
use hodge_wp::wpgeom::Tensor;

/// Everything a command prints. Sections keep insertion order.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub model: ModelFile,
    pub options: Value,
    pub passed: bool,
    pub verdicts: Map<String, Value>,
    pub tables: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub conventions: Vec<String>,
    pub tolerances: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, model: &ModelFile, options: Value) -> Self {
        Report {
            command: command.to_string(),
            inputs_digest: model.digest(),
            model: model.clone(),
            options,
            passed: true,
            verdicts: Map::new(),
            tables: Map::new(),
            residuals: Map::new(),
            conventions: Vec::new(),
            tolerances: Map::new(),
        }
    }

    pub fn verdict(&mut self, name: impl Into<String>, value: impl Serialize) {
        self.verdicts.insert(name.into(), json!(value));
    }

    /// Records a boolean check; a false one fails the report.
    pub fn check(&mut self, name: impl Into<String>, holds: bool) {
        self.passed &= holds;
        self.verdicts.insert(name.into(), json!(holds));
    }

    pub fn table(&mut self, name: impl Into<String>, value: Value) {
        self.tables.insert(name.into(), value);
    }

    pub fn residual(&mut self, name: impl Into<String>, value: impl Serialize) {
        self.residuals.insert(name.into(), json!(value));
    }

    pub fn tolerance(&mut self, name: impl Into<String>, value: f64) {
        self.tolerances.insert(name.into(), json!(value));
    }

    pub fn convention(&mut self, note: &str) {
        self.conventions.push(note.to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("inputs digest: {}\n", self.inputs_digest));
        out.push_str(&format!("passed: {}\n", self.passed));
        section(&mut out, "verdicts", &self.verdicts);
        section(&mut out, "residuals", &self.residuals);
        section(&mut out, "tolerances", &self.tolerances);
        if !self.tables.is_empty() {
            out.push_str("tables:\n");
            for (name, t) in &self.tables {
                out.push_str(&format!("  {name}:\n"));
                render_table(&mut out, t, "    ");
            }
        }
        if !self.conventions.is_empty() {
            out.push_str("conventions:\n");
            for c in &self.conventions {
                out.push_str(&format!("  - {c}\n"));
            }
        }
        out
    }
}

fn section(out: &mut String, title: &str, map: &Map<String, Value>) {
    if map.is_empty() {
        return;
    }
    out.push_str(&format!("{title}:\n"));
    for (k, v) in map {
        out.push_str(&format!("  {k}: {}\n", inline(v)));
    }
}

fn is_number(v: &Value) -> bool {
    match v {
        Value::Number(_) | Value::String(_) => true,
        Value::Array(a) => a.len() == 2 && a.iter().all(Value::is_i64),
        Value::Object(o) => o.contains_key("re") && o.contains_key("im"),
        _ => false,
    }
}

/// Numbers in human form: `p/q`, `a+bi`.
fn inline(v: &Value) -> String {
    match v {
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_i64) => format!("{}/{}", a[0], a[1]),
        Value::Object(o) if o.len() == 2 && o.contains_key("re") && o.contains_key("im") => {
            let im = inline(&o["im"]);
            match im.strip_prefix('-') {
                Some(abs) => format!("{}-{}i", inline(&o["re"]), abs),
                None => format!("{}+{}i", inline(&o["re"]), im),
            }
        }
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        Value::Object(o) => format!(
            "{{{}}}",
            o.iter()
                .map(|(k, v)| format!("{k}: {}", inline(v)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        other => other.to_string(),
    }
}

fn render_table(out: &mut String, t: &Value, indent: &str) {
    match t {
        Value::Object(o) if o.is_empty() => out.push_str(&format!("{indent}(none)\n")),
        Value::Array(a) if a.is_empty() => out.push_str(&format!("{indent}(none)\n")),
        Value::Array(rows) if rows.iter().all(|r| matches!(r, Value::Array(c) if c.iter().all(is_number))) => {
            for r in rows {
                out.push_str(&format!("{indent}{}\n", inline(r)));
            }
        }
        Value::Object(o) => {
            for (k, v) in o {
                match v {
                    Value::Array(a) if a.is_empty() => out.push_str(&format!("{indent}{k}: (none)\n")),
                    Value::Object(m) if m.is_empty() => out.push_str(&format!("{indent}{k}: (none)\n")),
                    Value::Array(_) | Value::Object(_) if !is_number(v) => {
                        out.push_str(&format!("{indent}{k}:\n"));
                        render_table(out, v, &format!("{indent}  "));
                    }
                    _ => out.push_str(&format!("{indent}{k}: {}\n", inline(v))),
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_number(item) {
                    out.push_str(&format!("{indent}{}\n", inline(item)));
                } else {
                    out.push_str(&format!("{indent}-\n"));
                    render_table(out, item, &format!("{indent}  "));
                }
            }
        }
        other => out.push_str(&format!("{indent}{}\n", inline(other))),
    }
}

pub fn num<S: Scalar>(z: &S) -> Value {
    serde_json::to_value(number_of(z)).expect("numbers serialize")
}

pub fn vector<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(num).collect())
}

pub fn matrix<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array((0..m.rows()).map(|r| vector(&m.row(r))).collect())
}

/// Nonzero entries of a tensor, keyed by their index tuple.
pub fn tensor<S: Scalar>(t: &Tensor<S>) -> Value {
    let n = t.dim();
    let rank = t.rank();
    let mut entries = Map::new();
    for (flat, v) in t.data().iter().enumerate() {
        if v.is_negligible(0.0) {
            continue;
        }
        let mut idx = vec![0usize; rank];
        let mut f = flat;
        for slot in idx.iter_mut().rev() {
            *slot = f % n;
            f /= n;
        }
        let key = idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        entries.insert(key, num(v));
    }
    json!({ "dim": n, "rank": rank, "nonzero": entries })
}
