//! Sectioned plain-text reports ending in a `key=value` trailer.

use crate::analysis::{Verdict, Witness};
use crate::graph_model::WeightedMetricGraph;

/// Section names used by reports. The document reader skips them, so a
/// report may follow a graph document in the same text.
pub const REPORT_SECTIONS: &[&str] = &[
    "command",
    "derived-weights",
    "graph",
    "spheres",
    "quantum",
    "solution",
    "vertex-values",
    "residuals",
    "warnings",
    "verdict",
    "witness",
    "diagnostics",
    "value",
    "certificate",
    "origin",
    "error",
    "trailer",
];

/// Fixed report formatting: 15 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    sections: Vec<(String, Vec<String>)>,
    trailer: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a line to section `name`, creating it at the end if needed.
    pub fn line(&mut self, name: &str, text: impl Into<String>) {
        debug_assert!(REPORT_SECTIONS.contains(&name), "{name}");
        match self.sections.iter_mut().find(|(n, _)| n == name) {
            Some((_, lines)) => lines.push(text.into()),
            None => self.sections.push((name.to_string(), vec![text.into()])),
        }
    }

    pub fn kv(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.trailer.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value,
            None => self.trailer.push((key.to_string(), value)),
        }
    }

    pub fn trailer_value(&self, key: &str) -> Option<&str> {
        self.trailer.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, lines) in &self.sections {
            out.push_str(&format!("[{name}]\n"));
            for l in lines {
                out.push_str(l);
                out.push('\n');
            }
        }
        out.push_str("[trailer]\n");
        for (k, v) in &self.trailer {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    /// `ν, l_c, ω, l_i` of every edge.
    pub fn derived_weights(&mut self, g: &WeightedMetricGraph, ids: &[String]) {
        self.line("derived-weights", "edge head tail nu l_c omega l_i");
        for e in g.edge_ids() {
            let (h, t) = g.endpoints(e);
            let s = g.scales(e);
            self.line(
                "derived-weights",
                format!(
                    "{} {} {} {} {} {} {}",
                    ids[e.0],
                    g.label(h),
                    g.label(t),
                    num(s.canonical_measure),
                    num(s.canonical_length),
                    num(s.intrinsic_weight),
                    num(s.intrinsic_length)
                ),
            );
        }
    }

    pub fn verdict(&mut self, v: &Verdict) {
        self.line("verdict", format!("property {}", v.property));
        self.line("verdict", format!("outcome {}", v.outcome));
        self.line("verdict", format!("heuristic {}", v.heuristic));
        let w = |r: &mut Report, s: String| r.line("witness", s);
        match &v.witness {
            Witness::None => w(self, "kind none".into()),
            Witness::Constant(c) => {
                w(self, "kind constant".into());
                w(self, format!("value {}", num(*c)));
            }
            Witness::Bounds { necessary, sufficient } => {
                w(self, "kind bounds".into());
                w(self, format!("necessary {}", num(*necessary)));
                w(self, format!("sufficient {}", num(*sufficient)));
            }
            Witness::Ray { length, prefix } => {
                w(self, "kind ray".into());
                w(self, format!("length {}", num(*length)));
                w(self, format!("prefix {}", join(prefix)));
            }
            Witness::Series {
                partial_sum,
                terms,
                certified,
            } => {
                w(self, "kind series".into());
                w(self, format!("partial_sum {}", num(*partial_sum)));
                w(self, format!("terms {terms}"));
                w(self, format!("certified {certified}"));
            }
            Witness::Energies {
                depths,
                energies,
                limit,
            } => {
                w(self, "kind energies".into());
                for (d, e) in depths.iter().zip(energies) {
                    w(self, format!("depth {d} {}", num(*e)));
                }
                w(self, format!("limit {}", num(*limit)));
            }
            Witness::Recursion { values, generations } => {
                w(self, "kind recursion".into());
                w(self, format!("generations {generations}"));
                w(self, format!("values {}", join(values)));
            }
            Witness::Vertex { label, value } => {
                w(self, "kind vertex".into());
                w(self, format!("vertex {label}"));
                w(self, format!("value {}", num(*value)));
            }
        }
        for d in &v.diagnostics {
            self.line("diagnostics", d.clone());
        }
        self.kv("property", v.property.replace(' ', "-"));
        self.kv("outcome", v.outcome.to_string());
        self.kv("heuristic", v.heuristic.to_string());
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}
