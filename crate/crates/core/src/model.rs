//! Line-oriented model files and the builtin example models.
//!
//! ```text
//! # comment
//! [model]
//! name = full2
//! b = 0
//! n_removed = 1
//! vertices = 2
//! [edge] from=1 to=1 roof=1.0 class=0
//! [edge] from=1 to=2 roof=log(2) class=1
//! [chords]
//! tree = 1>2, 1>3
//! chord 2>1 = 0,-1
//! [removed] cycle = 2
//! [quotient] name=z2 lattice=2
//! [quotient] name=s3 degree=3 labels=2,1,3;1,2,3;2,3,1;1,3,2
//! ```
//!
//! A section header may carry `key=value` pairs on its own line; further
//! pairs on the following lines belong to the same section. A line with a
//! single `=` is one pair whose value is the rest of the line; otherwise the
//! line is split on whitespace into `key=value` tokens. Each `[edge]` and
//! `[quotient]` header starts a new entry. Class vectors come either from
//! `class=` on every edge or from a `[chords]` block, never both.

use std::fmt::Write as _;

use crate::counting::FiniteQuotient;
use crate::error::{Error, Result};
use crate::graph_shift::{canonical_form, validate_graph, DirectedGraph, PrimeCycle};
use crate::homology_weights::{weights_from_chords, ChordAssignment, WeightSystem};

/// A real number remembered in the form it was written.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealLiteral {
    Decimal(f64),
    /// `log(p)`, the natural logarithm of `p`.
    Log(f64),
}

impl RealLiteral {
    pub fn value(self) -> f64 {
        match self {
            Self::Decimal(x) => x,
            Self::Log(p) => p.ln(),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("log(").and_then(|r| r.strip_suffix(')')) {
            return inner.trim().parse().ok().map(Self::Log);
        }
        s.parse().ok().map(Self::Decimal)
    }
}

impl std::fmt::Display for RealLiteral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Debug gives the shortest representation that round-trips
        match self {
            Self::Decimal(x) => write!(f, "{x:?}"),
            Self::Log(p) => write!(f, "log({p:?})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassSource {
    PerEdge(Vec<Vec<i64>>),
    Chords(ChordAssignment),
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuotientKind {
    /// Generators of the lattice `L` in `Z^d / L`.
    Lattice(Vec<Vec<i64>>),
    /// One permutation of `1..=degree` per edge.
    Permutation { degree: usize, labels: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpec {
    pub name: String,
    pub kind: QuotientKind,
}

impl QuotientSpec {
    pub fn build(&self, dim: usize) -> Result<FiniteQuotient> {
        match &self.kind {
            QuotientKind::Lattice(gens) => FiniteQuotient::lattice(gens.clone(), dim),
            QuotientKind::Permutation { degree, labels } => FiniteQuotient::permutation(*degree, labels.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub b: usize,
    pub n_removed: usize,
    pub graph: DirectedGraph,
    pub roofs: Vec<RealLiteral>,
    pub classes: ClassSource,
    pub weights: WeightSystem,
    pub removed: Vec<PrimeCycle>,
    pub quotients: Vec<QuotientSpec>,
    pub warnings: Vec<String>,
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.b + self.n_removed
    }

    pub fn quotient(&self, name: &str) -> Result<FiniteQuotient> {
        let spec = self
            .quotients
            .iter()
            .find(|q| q.name == name)
            .ok_or_else(|| Error::Validation(vec![format!("model has no quotient named `{name}`")]))?;
        spec.build(self.dim())
    }
}

struct Pair {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    line: usize,
    name: String,
    pairs: Vec<Pair>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Pair> {
        self.pairs.iter().rev().find(|p| p.key == key)
    }

    fn require(&self, key: &str) -> Result<&Pair> {
        self.get(key)
            .ok_or_else(|| Error::Syntax { line: self.line, message: format!("[{}] needs `{key}`", self.name) })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.pairs.iter().find(|p| !allowed.contains(&p.key.as_str())) {
            Some(p) => Err(syntax(p.line, format!("unknown key `{}` in [{}]", p.key, self.name))),
            None => Ok(()),
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, message: message.into() }
}

fn split_pairs(text: &str, line: usize) -> Result<Vec<Pair>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let pair = |tok: &str| -> Result<Pair> {
        let (k, v) = tok.split_once('=').ok_or_else(|| syntax(line, format!("expected key = value, found `{tok}`")))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(syntax(line, "empty key"));
        }
        Ok(Pair { line, key: key.to_string(), value: v.trim().to_string() })
    };
    match text.matches('=').count() {
        0 => Err(syntax(line, format!("expected key = value, found `{text}`"))),
        1 => Ok(vec![pair(text)?]),
        _ => text.split_whitespace().map(pair).collect(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let rest = if let Some(after) = content.strip_prefix('[') {
            let (name, rest) = after.split_once(']').ok_or_else(|| syntax(line, "unterminated section header"))?;
            let name = name.trim();
            if !["model", "edge", "chords", "removed", "quotient"].contains(&name) {
                return Err(syntax(line, format!("unknown section [{name}]")));
            }
            sections.push(Section { line, name: name.to_string(), pairs: Vec::new() });
            rest
        } else {
            content
        };
        let pairs = split_pairs(rest, line)?;
        let current = sections.last_mut().ok_or_else(|| syntax(line, "key = value outside any section"))?;
        current.pairs.extend(pairs);
    }
    Ok(sections)
}

fn parse_usize(p: &Pair) -> Result<usize> {
    p.value
        .parse()
        .map_err(|_| syntax(p.line, format!("`{}` expects a nonnegative integer, found `{}`", p.key, p.value)))
}

fn parse_list<T: std::str::FromStr>(p: &Pair, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| syntax(p.line, format!("`{}` expects comma-separated integers, found `{s}`", p.key)))
}

fn parse_rows<T: std::str::FromStr>(p: &Pair) -> Result<Vec<Vec<T>>> {
    p.value.split(';').map(|row| parse_list(p, row)).collect()
}

fn parse_arrow(p: &Pair, s: &str) -> Result<(usize, usize)> {
    let bad = || syntax(p.line, format!("expected an edge `i>j`, found `{s}`"));
    let (a, b) = s.split_once('>').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let sections = tokenize(text)?;
    let mut models = sections.iter().filter(|s| s.name == "model");
    let model = models.next().ok_or_else(|| syntax(1, "missing [model] section"))?;
    if let Some(dup) = models.next() {
        return Err(syntax(dup.line, "duplicate [model] section"));
    }
    model.check_keys(&["name", "b", "n_removed", "vertices"])?;
    let name = model.require("name")?.value.clone();
    let b = parse_usize(model.require("b")?)?;
    let n_removed = parse_usize(model.require("n_removed")?)?;
    let vertices = parse_usize(model.require("vertices")?)?;
    let dim = b + n_removed;

    let mut edges = Vec::new();
    let mut roofs = Vec::new();
    let mut edge_classes = Vec::new();
    let mut chords: Option<ChordAssignment> = None;
    let mut removed_raw: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut quotients = Vec::new();
    for s in &sections {
        match s.name.as_str() {
            "edge" => {
                s.check_keys(&["from", "to", "roof", "class"])?;
                edges.push((parse_usize(s.require("from")?)?, parse_usize(s.require("to")?)?));
                let roof = s.require("roof")?;
                roofs.push(
                    RealLiteral::parse(&roof.value)
                        .ok_or_else(|| syntax(roof.line, format!("cannot read roof `{}`", roof.value)))?,
                );
                edge_classes.push(s.get("class").map(|p| parse_list::<i64>(p, &p.value)).transpose()?);
            }
            "chords" => {
                let ca =
                    chords.get_or_insert_with(|| ChordAssignment { tree_edges: Vec::new(), chord_values: Vec::new() });
                for p in &s.pairs {
                    if p.key == "tree" {
                        for part in p.value.split(',').filter(|x| !x.trim().is_empty()) {
                            ca.tree_edges.push(parse_arrow(p, part)?);
                        }
                    } else if let Some(edge) = p.key.strip_prefix("chord ") {
                        ca.chord_values.push((parse_arrow(p, edge)?, parse_list(p, &p.value)?));
                    } else {
                        return Err(syntax(p.line, format!("unknown key `{}` in [chords]", p.key)));
                    }
                }
            }
            "removed" => {
                s.check_keys(&["cycle"])?;
                for p in &s.pairs {
                    removed_raw.push((p.line, parse_list(p, &p.value)?));
                }
            }
            "quotient" => {
                s.check_keys(&["name", "lattice", "degree", "labels"])?;
                let qname = s.require("name")?.value.clone();
                let kind = match (s.get("lattice"), s.get("degree"), s.get("labels")) {
                    (Some(l), None, None) => QuotientKind::Lattice(parse_rows(l)?),
                    (None, Some(d), Some(l)) => {
                        QuotientKind::Permutation { degree: parse_usize(d)?, labels: parse_rows(l)? }
                    }
                    _ => return Err(syntax(s.line, "[quotient] needs either `lattice` or both `degree` and `labels`")),
                };
                quotients.push(QuotientSpec { name: qname, kind });
            }
            _ => {}
        }
    }

    let graph = DirectedGraph::new(vertices, edges).map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let mut violations = validate_graph(&graph);
    for (e, r) in roofs.iter().enumerate() {
        let v = r.value();
        if !(v.is_finite() && v > 0.0) {
            let (from, to) = graph.edges()[e];
            violations.push(format!("roof must be positive on edge {from}->{to}, found {r}"));
        }
    }
    if dim == 0 {
        violations.push("class dimension b + n_removed must be at least 1".into());
    }
    let classes = match chords {
        Some(ca) => {
            if edge_classes.iter().any(Option::is_some) {
                violations.push("classes are given both per edge and by a [chords] block".into());
            }
            ClassSource::Chords(ca)
        }
        None => {
            let mut per_edge = Vec::with_capacity(edge_classes.len());
            for (e, c) in edge_classes.into_iter().enumerate() {
                let (from, to) = graph.edges()[e];
                match c {
                    Some(c) if c.len() == dim => per_edge.push(c),
                    Some(c) => {
                        violations.push(format!("class on edge {from}->{to} has {} entries, expected {dim}", c.len()))
                    }
                    None => violations.push(format!("edge {from}->{to} has no class")),
                }
            }
            ClassSource::PerEdge(per_edge)
        }
    };
    let mut removed: Vec<PrimeCycle> = Vec::new();
    for (line, seq) in &removed_raw {
        let joined = seq.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        match canonical_form(&graph, seq) {
            Ok(c) if removed.contains(&c) => {
                violations.push(format!("line {line}: removed cycle {joined} listed twice"))
            }
            Ok(c) => removed.push(c),
            Err(e) => violations.push(format!("line {line}: removed cycle {joined}: {e}")),
        }
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }

    let class_vectors = match &classes {
        ClassSource::PerEdge(c) => c.clone(),
        ClassSource::Chords(ca) => {
            weights_from_chords(&graph, ca, dim).map_err(|e| Error::Validation(vec![e.to_string()]))?
        }
    };
    let weights = WeightSystem::new(&graph, b, n_removed, roofs.iter().map(|r| r.value()).collect(), class_vectors)
        .map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let mut bad_quotients = Vec::new();
    for q in &quotients {
        if let Err(e) = q.build(dim) {
            bad_quotients.push(format!("quotient `{}`: {e}", q.name));
        }
        if let QuotientKind::Permutation { labels, .. } = &q.kind {
            if labels.len() != graph.edge_count() {
                bad_quotients.push(format!(
                    "quotient `{}` labels {} edges, graph has {}",
                    q.name,
                    labels.len(),
                    graph.edge_count()
                ));
            }
        }
    }
    if !bad_quotients.is_empty() {
        return Err(Error::Validation(bad_quotients));
    }
    let mut warnings = Vec::new();
    if removed.len() != n_removed {
        warnings.push(format!("{} removed cycles listed, n_removed = {n_removed}", removed.len()));
    }
    Ok(ModelSpec { name, b, n_removed, graph, roofs, classes, weights, removed, quotients, warnings })
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

/// Text form accepted by [`parse_model`]; edge order is preserved.
pub fn serialize_model(m: &ModelSpec) -> String {
    let mut out = String::new();
    // writing to a String cannot fail
    let _ = writeln!(
        out,
        "[model]\nname = {}\nb = {}\nn_removed = {}\nvertices = {}",
        m.name,
        m.b,
        m.n_removed,
        m.graph.vertex_count()
    );
    for (e, &(from, to)) in m.graph.edges().iter().enumerate() {
        let _ = write!(out, "[edge] from={from} to={to} roof={}", m.roofs[e]);
        if let ClassSource::PerEdge(c) = &m.classes {
            let _ = write!(out, " class={}", join(&c[e], ","));
        }
        out.push('\n');
    }
    if let ClassSource::Chords(ca) = &m.classes {
        let tree: Vec<String> = ca.tree_edges.iter().map(|(a, b)| format!("{a}>{b}")).collect();
        let _ = writeln!(out, "[chords]\ntree = {}", tree.join(", "));
        for ((a, b), v) in &ca.chord_values {
            let _ = writeln!(out, "chord {a}>{b} = {}", join(v, ","));
        }
    }
    for c in &m.removed {
        let _ = writeln!(out, "[removed] cycle = {}", join(c.vertices(), ","));
    }
    for q in &m.quotients {
        match &q.kind {
            QuotientKind::Lattice(gens) => {
                let rows: Vec<String> = gens.iter().map(|r| join(r, ",")).collect();
                let _ = writeln!(out, "[quotient] name={} lattice={}", q.name, rows.join(";"));
            }
            QuotientKind::Permutation { degree, labels } => {
                let rows: Vec<String> = labels.iter().map(|r| join(r, ",")).collect();
                let _ = writeln!(out, "[quotient] name={} degree={degree} labels={}", q.name, rows.join(";"));
            }
        }
    }
    out
}

pub const BUILTIN_NAMES: [&str; 3] = ["full2", "goldenmean", "bench3"];

const FULL2: &str = "\
# full 2-shift, unit roof; the class counts visits to vertex 2
[model]
name = full2
b = 0
n_removed = 1
vertices = 2
[edge] from=1 to=1 roof=1.0 class=0
[edge] from=1 to=2 roof=1.0 class=1
[edge] from=2 to=1 roof=1.0 class=0
[edge] from=2 to=2 roof=1.0 class=1
[removed] cycle = 2
[quotient] name=z2 lattice=2
[quotient] name=s3 degree=3 labels=2,1,3;1,2,3;2,3,1;1,3,2
";

const GOLDENMEAN: &str = "\
# golden-mean shift: no 2->2 transition
[model]
name = goldenmean
b = 1
n_removed = 0
vertices = 2
[edge] from=1 to=1 roof=1.0 class=0
[edge] from=1 to=2 roof=1.0 class=1
[edge] from=2 to=1 roof=1.0 class=0
[quotient] name=z2 lattice=2
";

const BENCH3: &str = "\
# complete graph on three vertices with incommensurable roofs
[model]
name = bench3
b = 0
n_removed = 2
vertices = 3
[edge] from=1 to=1 roof=log(2)
[edge] from=1 to=2 roof=log(3)
[edge] from=1 to=3 roof=log(5)
[edge] from=2 to=1 roof=log(7)
[edge] from=2 to=2 roof=log(11)
[edge] from=2 to=3 roof=log(13)
[edge] from=3 to=1 roof=log(17)
[edge] from=3 to=2 roof=log(19)
[edge] from=3 to=3 roof=log(23)
[chords]
tree = 1>2, 1>3
chord 1>1 = -1,0
chord 2>1 = 0,-1
chord 2>2 = -1,0
chord 2>3 = 1,1
chord 3>1 = -1,0
chord 3>2 = 0,1
chord 3>3 = 0,1
[removed] cycle = 1,3
[removed] cycle = 2,3
[quotient] name=z2xz3 lattice=2,0;0,3
";

/// Source text of a builtin model.
pub fn builtin_source(name: &str) -> Result<&'static str> {
    match name {
        "full2" => Ok(FULL2),
        "goldenmean" => Ok(GOLDENMEAN),
        "bench3" => Ok(BENCH3),
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

pub fn builtin_model(name: &str) -> Result<ModelSpec> {
    parse_model(builtin_source(name)?)
}
