//! Plain-text framework documents.
//!
//! ```text
//! # comment
//! dimension 2
//! [vertices]
//! 1 0.0 0.0
//! 2 1.0 0.0
//! 3 0.5 0.8
//! [edges]
//! 1 2
//! 1 3
//! 2 3
//! [stress]
//! 1 2 -0.25
//! [shared]
//! 1 2
//! ```
//!
//! Vertex labels are `1..=v` in order. The stress block lists off-diagonal
//! entries on edges only; missing edges carry zero and the diagonal is rebuilt
//! from the row sums. The `[stress]` and `[shared]` blocks are optional.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use urigid_core::{Configuration, Edge, Framework, Graph, StressMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub framework: Framework,
    pub stress: Option<StressMatrix>,
    /// Zero-based indices of shared vertices.
    pub shared: Vec<usize>,
}

impl Document {
    pub fn new(framework: Framework) -> Self {
        Self {
            framework,
            stress: None,
            shared: Vec::new(),
        }
    }

    pub fn with_stress(mut self, stress: StressMatrix) -> Self {
        self.stress = Some(stress);
        self
    }

    pub fn with_shared(mut self, shared: Vec<usize>) -> Self {
        self.shared = shared;
        self
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Vertices,
    Edges,
    Stress,
    Shared,
}

fn parse_label(token: &str, line: usize, v: usize) -> Result<usize, ParseError> {
    match token.parse::<usize>() {
        Ok(k) if (1..=v).contains(&k) => Ok(k - 1),
        _ => err(line, format!("unknown vertex label `{token}`")),
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, ParseError> {
    match token.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(line, format!("expected a finite number, found `{token}`")),
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let mut dim: Option<usize> = None;
    let mut section = Section::Header;
    let mut seen_sections = HashSet::new();
    let mut coords: Vec<f64> = Vec::new();
    let mut v = 0usize;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut stress: Option<Vec<(usize, usize, f64, usize)>> = None;
    let mut shared: Vec<usize> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let next = match content {
                "[vertices]" => Section::Vertices,
                "[edges]" => Section::Edges,
                "[stress]" => Section::Stress,
                "[shared]" => Section::Shared,
                other => return err(line, format!("unknown section {other}")),
            };
            if dim.is_none() {
                return err(line, "`dimension` must come first");
            }
            if !seen_sections.insert(content.to_string()) {
                return err(line, format!("section {content} appears twice"));
            }
            if next != Section::Vertices && !seen_sections.contains("[vertices]") {
                return err(line, "[vertices] must precede other sections");
            }
            if next == Section::Stress {
                stress = Some(Vec::new());
            }
            section = next;
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::Header => {
                if tokens.len() != 2 || tokens[0] != "dimension" || dim.is_some() {
                    return err(line, "expected `dimension <d>`");
                }
                match tokens[1].parse::<usize>() {
                    Ok(d) if d >= 1 => dim = Some(d),
                    _ => return err(line, format!("invalid dimension `{}`", tokens[1])),
                }
            }
            Section::Vertices => {
                let d = dim.expect("checked at section start");
                if tokens.len() != d + 1 {
                    return err(line, format!("expected a label and {d} coordinates"));
                }
                if tokens[0].parse::<usize>() != Ok(v + 1) {
                    return err(line, format!("expected vertex label {}", v + 1));
                }
                for t in &tokens[1..] {
                    coords.push(parse_number(t, line)?);
                }
                v += 1;
            }
            Section::Edges => {
                if tokens.len() != 2 {
                    return err(line, "expected two vertex labels");
                }
                let i = parse_label(tokens[0], line, v)?;
                let j = parse_label(tokens[1], line, v)?;
                edges.push((i, j, line));
            }
            Section::Stress => {
                if tokens.len() != 3 {
                    return err(line, "expected two vertex labels and a value");
                }
                let i = parse_label(tokens[0], line, v)?;
                let j = parse_label(tokens[1], line, v)?;
                let w = parse_number(tokens[2], line)?;
                stress.as_mut().expect("opened").push((i, j, w, line));
            }
            Section::Shared => {
                for t in tokens {
                    let s = parse_label(t, line, v)?;
                    if shared.contains(&s) {
                        return err(line, format!("vertex {t} listed twice"));
                    }
                    shared.push(s);
                }
            }
        }
    }

    let Some(d) = dim else {
        return err(0, "missing `dimension` header");
    };
    if v == 0 {
        return err(0, "no vertices");
    }
    let config =
        Configuration::new(DMatrix::from_column_slice(d, v, &coords)).map_err(|e| ParseError {
            line: 0,
            message: e.to_string(),
        })?;

    let mut seen_edges = HashSet::new();
    for &(i, j, line) in &edges {
        if i == j {
            return err(line, "self-loop");
        }
        if !seen_edges.insert(Edge::new(i, j)) {
            return err(line, "duplicate edge");
        }
    }
    let graph = Graph::new(v, edges.iter().map(|&(i, j, _)| (i, j))).map_err(|e| ParseError {
        line: 0,
        message: e.to_string(),
    })?;

    let stress = match stress {
        None => None,
        Some(entries) => {
            let mut weights = vec![0.0; graph.edge_count()];
            let mut filled = HashSet::new();
            for (i, j, w, line) in entries {
                let Some(slot) = graph.edge_index(i, j) else {
                    return err(line, format!("stress on non-edge {{{}, {}}}", i + 1, j + 1));
                };
                if !filled.insert(slot) {
                    return err(line, "stress entry given twice");
                }
                weights[slot] = w;
            }
            Some(
                StressMatrix::from_edge_stresses(graph.clone(), &weights).map_err(|e| {
                    ParseError {
                        line: 0,
                        message: e.to_string(),
                    }
                })?,
            )
        }
    };

    Ok(Document {
        framework: Framework::new(graph, config).expect("sizes agree"),
        stress,
        shared,
    })
}

/// Seventeen significant digits, enough to reproduce every `f64` exactly.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn serialize(doc: &Document) -> String {
    let fw = &doc.framework;
    let mut out = String::new();
    writeln!(out, "dimension {}", fw.dim()).unwrap();
    out.push_str("[vertices]\n");
    for i in 0..fw.vertex_count() {
        write!(out, "{}", i + 1).unwrap();
        for x in fw.config().point(i).iter() {
            write!(out, " {}", number(*x)).unwrap();
        }
        out.push('\n');
    }
    out.push_str("[edges]\n");
    for e in fw.graph().edges() {
        writeln!(out, "{} {}", e.i() + 1, e.j() + 1).unwrap();
    }
    if let Some(sm) = &doc.stress {
        out.push_str("[stress]\n");
        for e in fw.graph().edges() {
            let w = sm.omega()[(e.i(), e.j())];
            writeln!(out, "{} {} {}", e.i() + 1, e.j() + 1, number(w)).unwrap();
        }
    }
    if !doc.shared.is_empty() {
        out.push_str("[shared]\n");
        let labels: Vec<String> = doc.shared.iter().map(|s| (s + 1).to_string()).collect();
        writeln!(out, "{}", labels.join(" ")).unwrap();
    }
    out
}
