//! Pure-Circuit instances: nodes carrying values in {0, 1, ⊥} constrained by
//! NOT, NAND and PURIFY gates.
//!
//! Instances are read from a line-oriented `.pc` text format:
//!
//! ```text
//! # two inverters in a loop
//! nodes 2
//! NOT 0 1
//! NOT 1 0
//! ```
//!
//! Every node must be the output of exactly one gate. Degree bounds on the
//! interaction graph are reported by [`validate`] as warnings only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateType {
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "NAND")]
    Nand,
    #[serde(rename = "PURIFY")]
    Purify,
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateType::Not => "NOT",
            GateType::Nand => "NAND",
            GateType::Purify => "PURIFY",
        })
    }
}

/// A gate `(T, u, v, w)`.
///
/// NOT reads `u` and writes `v`; NAND reads `u, v` and writes `w`;
/// PURIFY reads `u` and writes `v, w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub gate_type: GateType,
    pub u: NodeId,
    pub v: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<NodeId>,
}

impl Gate {
    pub fn not(u: usize, v: usize) -> Gate {
        Gate { gate_type: GateType::Not, u: NodeId(u), v: NodeId(v), w: None }
    }

    pub fn nand(u: usize, v: usize, w: usize) -> Gate {
        Gate { gate_type: GateType::Nand, u: NodeId(u), v: NodeId(v), w: Some(NodeId(w)) }
    }

    pub fn purify(u: usize, v: usize, w: usize) -> Gate {
        Gate { gate_type: GateType::Purify, u: NodeId(u), v: NodeId(v), w: Some(NodeId(w)) }
    }

    pub fn inputs(&self) -> Vec<NodeId> {
        match self.gate_type {
            GateType::Not | GateType::Purify => vec![self.u],
            GateType::Nand => vec![self.u, self.v],
        }
    }

    pub fn outputs(&self) -> Vec<NodeId> {
        match self.gate_type {
            GateType::Not => vec![self.v],
            GateType::Nand => vec![self.w.expect("NAND has an output")],
            GateType::Purify => vec![self.v, self.w.expect("PURIFY has two outputs")],
        }
    }

    fn nodes(&self) -> Vec<NodeId> {
        let mut n = vec![self.u, self.v];
        n.extend(self.w);
        n
    }

    /// Directed edges (input, output) this gate contributes to the
    /// interaction graph.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let outs = self.outputs();
        self.inputs()
            .into_iter()
            .flat_map(|i| outs.iter().map(move |&o| (i, o)))
            .collect()
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.gate_type, self.u, self.v)?;
        if let Some(w) = self.w {
            write!(f, " {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "bot")]
    Bot,
}

impl Value {
    pub const ALL: [Value; 3] = [Value::Zero, Value::One, Value::Bot];

    pub fn is_pure(self) -> bool {
        self != Value::Bot
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Value::Zero => "0",
            Value::One => "1",
            Value::Bot => "bot",
        })
    }
}

/// A total assignment of values to nodes, indexed by node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub values: Vec<Value>,
}

impl Assignment {
    pub fn new(values: Vec<Value>) -> Self {
        Assignment { values }
    }

    pub fn get(&self, node: NodeId) -> Option<Value> {
        self.values.get(node.0).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitInstance {
    n: usize,
    gates: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("node {node} is out of range for a {n}-node instance")]
    OutOfRange { node: usize, n: usize },
    #[error("gate {gate} ({text}) repeats node {node}")]
    SelfLoop { gate: usize, node: usize, text: String },
    #[error("node {node} is the output of two gates ({first} and {second})")]
    DuplicateOutput { node: usize, first: usize, second: usize },
    #[error("node {node} is not the output of any gate")]
    MissingOutput { node: usize },
    #[error("gate {gate} of type {gate_type} has the wrong arity")]
    Arity { gate: usize, gate_type: GateType },
}

impl CircuitInstance {
    /// Builds an instance, enforcing distinct nodes per gate and the
    /// one-producer-per-node rule.
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut producer: Vec<Option<usize>> = vec![None; n];
        for (gi, g) in gates.iter().enumerate() {
            let arity_ok = match g.gate_type {
                GateType::Not => g.w.is_none(),
                GateType::Nand | GateType::Purify => g.w.is_some(),
            };
            if !arity_ok {
                return Err(CircuitError::Arity { gate: gi, gate_type: g.gate_type });
            }
            let nodes = g.nodes();
            for node in &nodes {
                if node.0 >= n {
                    return Err(CircuitError::OutOfRange { node: node.0, n });
                }
            }
            for (i, a) in nodes.iter().enumerate() {
                if nodes[i + 1..].contains(a) {
                    return Err(CircuitError::SelfLoop { gate: gi, node: a.0, text: g.to_string() });
                }
            }
            for out in g.outputs() {
                if let Some(first) = producer[out.0] {
                    return Err(CircuitError::DuplicateOutput { node: out.0, first, second: gi });
                }
                producer[out.0] = Some(gi);
            }
        }
        if let Some(node) = producer.iter().position(Option::is_none) {
            return Err(CircuitError::MissingOutput { node });
        }
        Ok(CircuitInstance { n, gates })
    }

    pub fn empty() -> Self {
        CircuitInstance { n: 0, gates: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Index of the gate that outputs `node`.
    pub fn producer(&self, node: NodeId) -> usize {
        self.gates
            .iter()
            .position(|g| g.outputs().contains(&node))
            .expect("every node has a producer")
    }

    pub fn in_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for (_, o) in self.gates.iter().flat_map(Gate::edges) {
            deg[o.0] += 1;
        }
        deg
    }

    pub fn out_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for (i, _) in self.gates.iter().flat_map(Gate::edges) {
            deg[i.0] += 1;
        }
        deg
    }

    /// Serializes to the `.pc` text format.
    pub fn to_pc(&self) -> String {
        let mut out = format!("nodes {}\n", self.n);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Parses a `.pc` document.
pub fn parse_circuit(text: &str) -> Result<CircuitInstance, ParseError> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        // (column, token) pairs, columns 1-based
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in content.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s + 1, &content[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &content[s..]));
        }
        let Some(&(col, head)) = tokens.first() else { continue };
        let syntax = |column: usize, message: String| ParseError::Syntax { line, column, message };
        let number = |&(c, tok): &(usize, &str)| -> Result<usize, ParseError> {
            if tok.bytes().all(|b| b.is_ascii_digit()) {
                tok.parse::<usize>().map_err(|_| syntax(c, format!("node id {tok:?} is too large")))
            } else {
                Err(syntax(c, format!("expected a decimal node id, found {tok:?}")))
            }
        };

        if n.is_none() {
            if head != "nodes" {
                return Err(syntax(col, format!("expected header `nodes <n>`, found {head:?}")));
            }
            if tokens.len() != 2 {
                let c = tokens.get(2).map_or(col + head.len(), |t| t.0);
                return Err(syntax(c, "header takes exactly one argument".into()));
            }
            n = Some(number(&tokens[1])?);
            continue;
        }

        let (gate_type, arity) = match head {
            "NOT" => (GateType::Not, 2),
            "NAND" => (GateType::Nand, 3),
            "PURIFY" => (GateType::Purify, 3),
            "nodes" => return Err(syntax(col, "duplicate `nodes` header".into())),
            other => return Err(syntax(col, format!("unknown gate type {other:?}"))),
        };
        if tokens.len() != arity + 1 {
            let c = tokens.get(arity + 1).map_or(content.trim_end().len() + 1, |t| t.0);
            return Err(syntax(c, format!("{head} takes {arity} node ids, found {}", tokens.len() - 1)));
        }
        let ids = tokens[1..].iter().map(number).collect::<Result<Vec<_>, _>>()?;
        let limit = n.unwrap_or(0);
        for (k, &id) in ids.iter().enumerate() {
            if id >= limit {
                return Err(syntax(tokens[k + 1].0, format!("node {id} is out of range for {limit} nodes")));
            }
        }
        gates.push(Gate {
            gate_type,
            u: NodeId(ids[0]),
            v: NodeId(ids[1]),
            w: ids.get(2).copied().map(NodeId),
        });
    }

    let n = n.ok_or(ParseError::Syntax {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing `nodes <n>` header".into(),
    })?;
    Ok(CircuitInstance::new(n, gates)?)
}

impl FromStr for CircuitInstance {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_circuit(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeWarning {
    pub node: NodeId,
    pub in_degree: usize,
    pub out_degree: usize,
    pub message: String,
}

/// Reports nodes that break the in/out-degree ≤ 2, total degree ≤ 3 bounds
/// on the interaction graph.
pub fn validate(circuit: &CircuitInstance) -> Vec<DegreeWarning> {
    let ins = circuit.in_degree();
    let outs = circuit.out_degree();
    (0..circuit.n())
        .filter_map(|i| {
            let mut problems = Vec::new();
            if ins[i] > 2 {
                problems.push(format!("in-degree {} > 2", ins[i]));
            }
            if outs[i] > 2 {
                problems.push(format!("out-degree {} > 2", outs[i]));
            }
            if ins[i] + outs[i] > 3 {
                problems.push(format!("total degree {} > 3", ins[i] + outs[i]));
            }
            (!problems.is_empty()).then(|| DegreeWarning {
                node: NodeId(i),
                in_degree: ins[i],
                out_degree: outs[i],
                message: format!("node {i}: {}", problems.join(", ")),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateVerdict {
    pub gate: usize,
    pub satisfied: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("assignment covers {got} nodes but the circuit has {n}")]
    MissingValue { got: usize, n: usize },
}

/// Evaluates one verdict per gate against the gate truth tables.
pub fn check_assignment(circuit: &CircuitInstance, a: &Assignment) -> Result<Vec<GateVerdict>, CheckError> {
    if a.len() < circuit.n() {
        return Err(CheckError::MissingValue { got: a.len(), n: circuit.n() });
    }
    Ok(circuit
        .gates()
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let val = |id: NodeId| a.values[id.0];
            let failure = gate_failure(g, val(g.u), val(g.v), g.w.map(val));
            GateVerdict { gate: gi, satisfied: failure.is_none(), reason: failure.unwrap_or_default() }
        })
        .collect())
}

fn gate_failure(g: &Gate, u: Value, v: Value, w: Option<Value>) -> Option<String> {
    use Value::*;
    match g.gate_type {
        GateType::Not => match (u, v) {
            (Zero, v) if v != One => Some(format!("NOT row \"0 → 1\" violated: {} = 0 but {} = {v}", g.u, g.v)),
            (One, v) if v != Zero => Some(format!("NOT row \"1 → 0\" violated: {} = 1 but {} = {v}", g.u, g.v)),
            _ => None,
        },
        GateType::Nand => {
            let w = w.expect("NAND output");
            if u == One && v == One && w != Zero {
                Some(format!("NAND row \"1,1 → 0\" violated: output {} = {w}", g.w.unwrap()))
            } else if (u == Zero || v == Zero) && w != One {
                Some(format!("NAND row \"0 → 1\" violated: an input is 0 but output {} = {w}", g.w.unwrap()))
            } else {
                None
            }
        }
        GateType::Purify => {
            let w = w.expect("PURIFY output");
            if !v.is_pure() && !w.is_pure() {
                Some("PURIFY: At least one output in {0, 1} violated: both outputs are bot".to_string())
            } else if u.is_pure() && (v != u || w != u) {
                Some(format!("PURIFY: pure input {u} must be copied to both outputs, got ({v}, {w})"))
            } else {
                None
            }
        }
    }
}

pub fn all_satisfied(verdicts: &[GateVerdict]) -> bool {
    verdicts.iter().all(|v| v.satisfied)
}

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance has {n} nodes, above the brute-force cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("no satisfying assignment among all 3^{n} candidates; the checker is inconsistent")]
    NoSolution { n: usize },
}

/// Exhaustive search in lexicographic order over (0 < 1 < ⊥), node 0 most
/// significant. Returns the first satisfying assignment.
pub fn brute_force_solve(circuit: &CircuitInstance, cap: usize) -> Result<Assignment, SolveError> {
    let n = circuit.n();
    if n > cap {
        return Err(SolveError::CapExceeded { n, cap });
    }
    let mut digits = vec![0usize; n];
    loop {
        let values: Vec<Value> = digits.iter().map(|&d| Value::ALL[d]).collect();
        let ok = circuit.gates().iter().all(|g| {
            let val = |id: NodeId| values[id.0];
            gate_failure(g, val(g.u), val(g.v), g.w.map(val)).is_none()
        });
        if ok {
            return Ok(Assignment::new(values));
        }
        // increment, last node least significant
        let mut pos = n;
        loop {
            if pos == 0 {
                return Err(SolveError::NoSolution { n });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < 3 {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentDocError {
    #[error("invalid assignment JSON: {0}")]
    Json(String),
    #[error("assignment key {0:?} is not a node index")]
    Key(String),
    #[error("assignment is missing node {0}")]
    Missing(usize),
}

/// `{"0": "1", "1": "bot", …}` with keys in node order.
pub fn assignment_to_json(a: &Assignment) -> String {
    let map: serde_json::Map<String, serde_json::Value> =
        a.values.iter().enumerate().map(|(i, v)| (i.to_string(), serde_json::Value::from(v.to_string()))).collect();
    let mut s = serde_json::to_string_pretty(&map).expect("assignment serializes");
    s.push('\n');
    s
}

/// Parses the object form; keys must be exactly `0..n` in any order.
pub fn assignment_from_json(text: &str) -> Result<Assignment, AssignmentDocError> {
    let map: std::collections::BTreeMap<String, Value> =
        serde_json::from_str(text).map_err(|e| AssignmentDocError::Json(e.to_string()))?;
    let mut values = vec![None; map.len()];
    for (k, v) in map {
        let i: usize = k.parse().map_err(|_| AssignmentDocError::Key(k.clone()))?;
        if i >= values.len() || k != i.to_string() {
            return Err(AssignmentDocError::Key(k));
        }
        values[i] = Some(v);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(AssignmentDocError::Missing(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Assignment::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Value::*;

    const CYCLE: &str = "nodes 2\nNOT 0 1\nNOT 1 0\n";

    #[test]
    fn parses_minimal_cycle() {
        let c = parse_circuit(CYCLE).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.gates(), &[Gate::not(0, 1), Gate::not(1, 0)]);
    }

    #[test]
    fn parses_nand_with_feedback() {
        let c = parse_circuit("nodes 3\nNAND 0 1 2\nNOT 2 0\nNOT 2 1\n").unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.gates().len(), 3);
        assert_eq!(c.producer(NodeId(2)), 0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_circuit("# header\n\nnodes 2 # two\nNOT 0 1  # a\n  NOT 1 0\n").unwrap();
        assert_eq!(c.gates().len(), 2);
    }

    #[test]
    fn rejects_duplicate_output() {
        let err = parse_circuit("nodes 2\nNOT 0 1\nNOT 0 1\n").unwrap_err();
        assert_eq!(err, ParseError::Circuit(CircuitError::DuplicateOutput { node: 1, first: 0, second: 1 }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_circuit("nodes 2\nNOT 0 x\n").unwrap_err() {
            ParseError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 7)),
            e => panic!("unexpected {e:?}"),
        }
        match parse_circuit("nodes 2\nXOR 0 1\n").unwrap_err() {
            ParseError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 1)),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(parse_circuit("NOT 0 1\n"), Err(ParseError::Syntax { line: 1, .. })));
        assert!(matches!(parse_circuit("nodes 2\nNOT 0 1 1\n"), Err(ParseError::Syntax { line: 2, .. })));
    }

    #[test]
    fn rejects_out_of_range_and_self_loops() {
        assert!(matches!(parse_circuit("nodes 2\nNOT 0 2\n"), Err(ParseError::Syntax { line: 2, column: 7, .. })));
        assert!(matches!(
            parse_circuit("nodes 2\nNOT 1 1\nNOT 1 0\n"),
            Err(ParseError::Circuit(CircuitError::SelfLoop { .. }))
        ));
        assert!(matches!(
            parse_circuit("nodes 3\nNOT 0 1\nNOT 1 0\n"),
            Err(ParseError::Circuit(CircuitError::MissingOutput { node: 2 }))
        ));
    }

    #[test]
    fn empty_instance() {
        let c = parse_circuit("nodes 0\n").unwrap();
        assert_eq!(c.n(), 0);
        assert!(validate(&c).is_empty());
        assert_eq!(brute_force_solve(&c, 12).unwrap(), Assignment::new(vec![]));
    }

    #[test]
    fn degree_warnings() {
        let cycle = parse_circuit(CYCLE).unwrap();
        assert!(validate(&cycle).is_empty());
        // node 2: in-degree 2 from the NAND, out-degree 2 into the NOTs
        let nand = parse_circuit("nodes 3\nNAND 0 1 2\nNOT 2 0\nNOT 2 1\n").unwrap();
        let w = validate(&nand);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].node, w[0].in_degree, w[0].out_degree), (NodeId(2), 2, 2));
        assert!(w[0].message.contains("total degree 4"));
        // node 0 feeds three gates: out-degree 3, total 4
        let fan = parse_circuit("nodes 4\nNOT 0 1\nNOT 0 2\nNOT 0 3\nNOT 1 0\n").unwrap();
        let w = validate(&fan);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].node, NodeId(0));
        assert_eq!((w[0].in_degree, w[0].out_degree), (1, 3));
    }

    #[test]
    fn truth_table_rows() {
        let not = CircuitInstance::new(2, vec![Gate::not(0, 1), Gate::not(1, 0)]).unwrap();
        let v = check_assignment(&not, &Assignment::new(vec![Zero, One])).unwrap();
        assert!(all_satisfied(&v));
        let v = check_assignment(&not, &Assignment::new(vec![Zero, Zero])).unwrap();
        assert!(!v[0].satisfied);
        assert!(v[0].reason.contains("0 → 1"));
        // ⊥ input leaves NOT unconstrained
        let v = check_assignment(&not, &Assignment::new(vec![Bot, Bot])).unwrap();
        assert!(all_satisfied(&v));

        let nand = CircuitInstance::new(3, vec![Gate::nand(0, 1, 2), Gate::not(2, 0), Gate::not(0, 1)]).unwrap();
        let v = check_assignment(&nand, &Assignment::new(vec![One, One, Zero])).unwrap();
        assert!(v[0].satisfied);
        let v = check_assignment(&nand, &Assignment::new(vec![Bot, Zero, Bot])).unwrap();
        assert!(!v[0].satisfied);
        let v = check_assignment(&nand, &Assignment::new(vec![Bot, One, Bot])).unwrap();
        assert!(v[0].satisfied);

        let pur = CircuitInstance::new(3, vec![Gate::purify(0, 1, 2), Gate::not(1, 0)]).unwrap();
        let v = check_assignment(&pur, &Assignment::new(vec![Bot, Bot, Bot])).unwrap();
        assert!(!v[0].satisfied);
        assert!(v[0].reason.contains("At least one output in {0, 1}"));
        let v = check_assignment(&pur, &Assignment::new(vec![Bot, Bot, One])).unwrap();
        assert!(v[0].satisfied);
        let v = check_assignment(&pur, &Assignment::new(vec![One, One, Bot])).unwrap();
        assert!(!v[0].satisfied);
    }

    #[test]
    fn missing_values_are_an_error() {
        let c = parse_circuit(CYCLE).unwrap();
        assert_eq!(
            check_assignment(&c, &Assignment::new(vec![Zero])),
            Err(CheckError::MissingValue { got: 1, n: 2 })
        );
    }

    #[test]
    fn brute_force_is_lexicographic() {
        let c = parse_circuit(CYCLE).unwrap();
        assert_eq!(brute_force_solve(&c, 12).unwrap(), Assignment::new(vec![Zero, One]));
        assert_eq!(
            brute_force_solve(&c, 1),
            Err(SolveError::CapExceeded { n: 2, cap: 1 })
        );
    }

    #[test]
    fn assignment_json() {
        let a = Assignment::new(vec![Zero, One, Bot]);
        let text = assignment_to_json(&a);
        assert_eq!(text, "{\n  \"0\": \"0\",\n  \"1\": \"1\",\n  \"2\": \"bot\"\n}\n");
        assert_eq!(assignment_from_json(&text).unwrap(), a);
        assert_eq!(assignment_from_json(r#"{"1":"0","0":"1"}"#).unwrap().values, vec![One, Zero]);
        assert_eq!(assignment_from_json(r#"{"0":"0","2":"0"}"#), Err(AssignmentDocError::Key("2".into())));
        assert_eq!(assignment_from_json(r#"{"00":"0"}"#), Err(AssignmentDocError::Key("00".into())));
        assert!(matches!(assignment_from_json(r#"{"0":"x"}"#), Err(AssignmentDocError::Json(_))));
    }

    #[test]
    fn brute_force_purify_loop() {
        // PURIFY whose outputs are both negated back into its input
        let c = parse_circuit("nodes 3\nPURIFY 0 1 2\nNAND 1 2 0\n").unwrap();
        let a = brute_force_solve(&c, 12).unwrap();
        assert!(all_satisfied(&check_assignment(&c, &a).unwrap()));
    }

    fn arb_circuit() -> impl Strategy<Value = CircuitInstance> {
        // a random permutation of producers: each node gets one gate whose
        // output set covers it; inputs drawn from other nodes
        (3usize..8).prop_flat_map(|n| {
            proptest::collection::vec((0u8..3, 0usize..n, 0usize..n), n).prop_map(move |rows| {
                let mut gates = Vec::new();
                let mut covered = vec![false; n];
                for (node, &(kind, a, b)) in rows.iter().enumerate() {
                    if covered[node] {
                        continue;
                    }
                    let other = |x: usize, avoid: &[usize]| {
                        (0..n).map(|k| (x + k) % n).find(|c| !avoid.contains(c)).unwrap()
                    };
                    match kind {
                        0 => {
                            let u = other(a, &[node]);
                            gates.push(Gate::not(u, node));
                        }
                        1 => {
                            let u = other(a, &[node]);
                            let v = other(b, &[node, u]);
                            gates.push(Gate::nand(u, v, node));
                        }
                        _ => {
                            let w = (node + 1..n).find(|&c| !covered[c]);
                            match w {
                                Some(w) => {
                                    let u = other(a, &[node, w]);
                                    gates.push(Gate::purify(u, node, w));
                                    covered[w] = true;
                                }
                                None => gates.push(Gate::not(other(a, &[node]), node)),
                            }
                        }
                    }
                    covered[node] = true;
                }
                CircuitInstance::new(n, gates).expect("generator builds valid instances")
            })
        })
    }

    proptest! {
        #[test]
        fn pc_round_trip(c in arb_circuit()) {
            let text = c.to_pc();
            prop_assert_eq!(parse_circuit(&text).unwrap(), c);
        }

        #[test]
        fn brute_force_solutions_check(c in arb_circuit()) {
            let a = brute_force_solve(&c, 12).unwrap();
            prop_assert!(all_satisfied(&check_assignment(&c, &a).unwrap()));
        }

        #[test]
        fn not_with_bot_input_is_unconstrained(v in 0usize..3) {
            let c = CircuitInstance::new(2, vec![Gate::not(0, 1), Gate::not(1, 0)]).unwrap();
            let a = Assignment::new(vec![Bot, Value::ALL[v]]);
            prop_assert!(check_assignment(&c, &a).unwrap()[0].satisfied);
        }
    }
}
