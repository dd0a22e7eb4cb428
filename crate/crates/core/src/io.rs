//! Line-oriented instance files. Everything after `#` on a line is a
//! comment; blank lines are ignored. Vertex, arc and variable indices in
//! files are 1-based; entries are integers, `p/q` or finite decimals, all
//! read exactly.
//!
//! ```text
//! qspp            bqp               qap
//! n m             rows m            n
//! s t             <rows lines of B> <n lines of A>
//! <m arcs>        <b>               <n lines of D>
//! nnz             nnz
//! <i j value>     <i j value>
//!                 [linear <m values>]
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exactnum::{Rational, RationalMatrix};
use crate::graph::Dag;
use crate::model::{self, BqpInstance, QsppInstance};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Qspp(QsppInstance),
    Bqp(BqpInstance),
    /// Flow matrix `A` and distance matrix `D`.
    Qap { a: RationalMatrix, d: RationalMatrix },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Qspp(_) => "qspp",
            Instance::Bqp(_) => "bqp",
            Instance::Qap { .. } => "qap",
        }
    }

    pub fn to_bqp(&self) -> Result<BqpInstance> {
        match self {
            Instance::Qspp(q) => Ok(model::qspp_to_bqp(q)),
            Instance::Bqp(b) => Ok(b.clone()),
            Instance::Qap { a, d } => model::qap_to_bqp(a, d),
        }
    }
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            items.extend(body.split_whitespace().map(|t| (k + 1, t)));
        }
        let last_line = text.lines().count().max(1);
        Tokens { items, pos: 0, last_line }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.items.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => self.err(format!("unexpected end of file, expected {what}")),
        }
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected {what}, found {t:?}"),
        })
    }

    /// 1-based index in `1..=max`, returned 0-based.
    fn index(&mut self, what: &str, max: usize) -> Result<usize> {
        let (line, t) = self.next(what)?;
        match t.parse::<usize>() {
            Ok(v) if (1..=max).contains(&v) => Ok(v - 1),
            _ => Err(Error::Parse {
                line,
                msg: format!("expected {what} in 1..={max}, found {t:?}"),
            }),
        }
    }

    fn rational(&mut self, what: &str) -> Result<Rational> {
        let (line, t) = self.next(what)?;
        Rational::from_str(t).map_err(|e| Error::Parse { line, msg: e.to_string() })
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        let (line, t) = self.next(word)?;
        if t == word {
            Ok(())
        } else {
            Err(Error::Parse {
                line,
                msg: format!("expected {word:?}, found {t:?}"),
            })
        }
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("trailing token {t:?}")),
        }
    }

    fn triplets(&mut self, m: usize) -> Result<RationalMatrix> {
        let nnz = self.usize("entry count")?;
        let mut q = RationalMatrix::zeros(m, m);
        for _ in 0..nnz {
            let line = self.line();
            let i = self.index("row index", m)?;
            let j = self.index("column index", m)?;
            let v = self.rational("value")?;
            if !q[(i, j)].is_zero() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate entry ({}, {})", i + 1, j + 1),
                });
            }
            q[(i, j)] = v;
        }
        Ok(q)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<RationalMatrix> {
        let mut out = RationalMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self.rational("matrix entry")?;
            }
        }
        Ok(out)
    }
}

/// Parses any of the three formats, dispatching on the leading tag.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut tok = Tokens::new(text);
    let (line, tag) = tok.next("format tag")?;
    let inst = match tag {
        "qspp" => Instance::Qspp(parse_qspp_body(&mut tok)?),
        "bqp" => Instance::Bqp(parse_bqp_body(&mut tok)?),
        "qap" => {
            let n = tok.usize("n")?;
            if n == 0 {
                return tok.err("QAP size must be positive");
            }
            let a = tok.matrix(n, n)?;
            let d = tok.matrix(n, n)?;
            Instance::Qap { a, d }
        }
        other => {
            return Err(Error::Parse {
                line,
                msg: format!("unknown format tag {other:?}"),
            })
        }
    };
    tok.finish()?;
    Ok(inst)
}

fn parse_qspp_body(tok: &mut Tokens<'_>) -> Result<QsppInstance> {
    let n = tok.usize("vertex count")?;
    let m = tok.usize("arc count")?;
    if n < 2 {
        return tok.err("need at least two vertices");
    }
    let s = tok.index("source", n)?;
    let t = tok.index("target", n)?;
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let u = tok.index("arc tail", n)?;
        let v = tok.index("arc head", n)?;
        arcs.push((u, v));
    }
    let q = tok.triplets(m)?;
    let g = Dag::new(n, arcs, s, t).map_err(|e| match e {
        Error::CycleDetected(v) => Error::Validation(format!("cycle through vertex {}", v + 1)),
        other => Error::Validation(other.to_string()),
    })?;
    if !g.is_corridor() {
        return Err(Error::Validation(
            "corridor violation: some vertex is not on an s-t path".into(),
        ));
    }
    QsppInstance::new(g, q).map_err(|e| Error::Validation(e.to_string()))
}

fn parse_bqp_body(tok: &mut Tokens<'_>) -> Result<BqpInstance> {
    let rows = tok.usize("row count")?;
    let m = tok.usize("variable count")?;
    let b_mat = tok.matrix(rows, m)?;
    let rhs = (0..rows).map(|_| tok.rational("right-hand side")).collect::<Result<Vec<_>>>()?;
    let q = tok.triplets(m)?;
    let linear = if tok.peek() == Some("linear") {
        tok.keyword("linear")?;
        (0..m).map(|_| tok.rational("linear cost")).collect::<Result<Vec<_>>>()?
    } else {
        vec![Rational::zero(); m]
    };
    BqpInstance::new(b_mat, rhs, q, Some(linear)).map_err(|e| Error::Validation(e.to_string()))
}

fn push_triplets(out: &mut String, q: &RationalMatrix) {
    let entries: Vec<(usize, usize)> = (0..q.rows())
        .flat_map(|i| (0..q.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| !q[(i, j)].is_zero())
        .collect();
    let _ = writeln!(out, "{}", entries.len());
    for (i, j) in entries {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, q[(i, j)]);
    }
}

fn push_matrix(out: &mut String, a: &RationalMatrix) {
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Canonical text of an instance; [`parse_instance`] inverts it.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    match inst {
        Instance::Qspp(q) => {
            let g = &q.graph;
            let _ = writeln!(out, "qspp\n{} {}\n{} {}", g.n(), g.m(), g.source() + 1, g.target() + 1);
            for &(u, v) in g.arcs() {
                let _ = writeln!(out, "{} {}", u + 1, v + 1);
            }
            push_triplets(&mut out, &q.cost);
        }
        Instance::Bqp(b) => {
            let _ = writeln!(out, "bqp\n{} {}", b.rows(), b.m());
            push_matrix(&mut out, &b.constraints);
            let rhs: Vec<String> = b.rhs.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", rhs.join(" "));
            push_triplets(&mut out, &b.cost);
            if b.linear.iter().any(|v| !v.is_zero()) {
                let lin: Vec<String> = b.linear.iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "linear {}", lin.join(" "));
            }
        }
        Instance::Qap { a, d } => {
            let _ = writeln!(out, "qap\n{}", a.rows());
            push_matrix(&mut out, a);
            push_matrix(&mut out, d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures;

    const DIAMOND: &str = "# diamond\nqspp\n4 4\n1 4\n1 2\n1 3\n2 4\n3 4\n2\n1 3 5  # q_13\n2 4 -1/2\n";

    #[test]
    fn diamond_file_parses() {
        let inst = parse_instance(DIAMOND).unwrap();
        let Instance::Qspp(q) = &inst else { panic!("wrong kind") };
        assert_eq!((q.graph.n(), q.graph.m()), (4, 4));
        assert_eq!(q.graph.arcs(), fixtures::diamond().arcs());
        assert_eq!(q.cost[(0, 2)], Rational::from_integer(5));
        assert_eq!(q.cost[(1, 3)], Rational::new(-1, 2));
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn cycle_is_a_validation_error() {
        let text = "qspp\n3 3\n1 3\n1 2\n2 1\n2 3\n0\n";
        assert!(matches!(parse_instance(text), Err(Error::Validation(msg)) if msg.contains("cycle")));
    }

    #[test]
    fn dangling_vertex_is_a_corridor_violation() {
        let text = "qspp\n4 3\n1 4\n1 2\n2 4\n1 3\n0\n";
        assert!(matches!(parse_instance(text), Err(Error::Validation(msg)) if msg.contains("corridor")));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "qspp\n4 4\n1 4\n1 2\n1 3\n2 x\n3 4\n0\n";
        assert!(matches!(parse_instance(text), Err(Error::Parse { line: 6, .. })));
        assert!(matches!(parse_instance("qspp\n4 4\n1 9\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_instance("lp\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("qspp\n4 4\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn bqp_and_qap_round_trip() {
        let text = "bqp\n1 3\n1 1 1\n1\n2\n1 2 3\n3 3 -1\nlinear 0 1/3 2\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
        let b = inst.to_bqp().unwrap();
        assert_eq!(b.linear[1], Rational::new(1, 3));

        let qap = parse_instance("qap\n2\n0 1\n1 0\n0 2\n2 0\n").unwrap();
        assert_eq!(parse_instance(&serialize_instance(&qap)).unwrap(), qap);
        assert_eq!(qap.to_bqp().unwrap().m(), 4);
    }

    #[test]
    fn tournament_round_trips() {
        let q = model::generate_tournament(6).unwrap();
        let inst = Instance::Qspp(q);
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }
}
