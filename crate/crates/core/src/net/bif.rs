//! Reader and writer for the common subset of the BIF network format:
//! `network`, `variable` blocks with discrete types, and `probability`
//! blocks given either as a `table` (parentless variables) or as one row per
//! parent configuration. `property` lines are skipped.

use std::collections::HashMap;
use std::fmt::Write;

use super::DiscreteNet;
use crate::error::{Error, Result};
use crate::graph::{GraphKind, MixedGraph};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(c, &mut line, &mut col);
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            i += 2;
            col += 2;
            loop {
                if i + 1 >= chars.len() {
                    return Err(Error::BifSyntax {
                        line: l0,
                        col: c0,
                        msg: "unterminated comment".into(),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    col += 2;
                    break;
                }
                advance(chars[i], &mut line, &mut col);
                i += 1;
            }
        } else if "{}[]();,|".contains(c) {
            out.push(Token {
                tok: Tok::Punct(c),
                line,
                col,
            });
            i += 1;
            col += 1;
        } else if c == '"' {
            let (l0, c0) = (line, col);
            let mut word = String::new();
            i += 1;
            col += 1;
            while i < chars.len() && chars[i] != '"' {
                word.push(chars[i]);
                advance(chars[i], &mut line, &mut col);
                i += 1;
            }
            if i == chars.len() {
                return Err(Error::BifSyntax {
                    line: l0,
                    col: c0,
                    msg: "unterminated string".into(),
                });
            }
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Word(word),
                line: l0,
                col: c0,
            });
        } else {
            let (l0, c0) = (line, col);
            let mut word = String::new();
            while i < chars.len() && !chars[i].is_whitespace() && !"{}[]();,|\"".contains(chars[i])
            {
                word.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Word(word),
                line: l0,
                col: c0,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end);
        Err(Error::BifSyntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn punct(&mut self, c: char) -> Result<()> {
        if self.at_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected a name"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let save = self.pos;
        let w = self.word()?;
        w.parse::<f64>().or_else(|_| {
            self.pos = save;
            self.err(format!("expected a probability, got `{w}`"))
        })
    }

    /// Comma-separated words up to (not including) `close`.
    fn word_list(&mut self, close: char) -> Result<Vec<String>> {
        let mut out = vec![self.word()?];
        while self.at_punct(',') {
            self.pos += 1;
            out.push(self.word()?);
        }
        if !self.at_punct(close) {
            return self.err(format!("expected `,` or `{close}`"));
        }
        Ok(out)
    }

    fn number_list(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![self.number()?];
        while self.at_punct(',') {
            self.pos += 1;
            out.push(self.number()?);
        }
        self.punct(';')?;
        Ok(out)
    }

    /// Skips `property ... ;`.
    fn skip_property(&mut self) -> Result<()> {
        self.keyword("property")?;
        while !self.at_punct(';') {
            if self.peek().is_none() {
                return self.err("unterminated property");
            }
            self.pos += 1;
        }
        self.pos += 1;
        Ok(())
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w == kw)
    }
}

struct VarDecl {
    name: String,
    states: Vec<String>,
    line: usize,
}

enum Rows {
    Table(Vec<f64>),
    Conditional(Vec<(Vec<String>, Vec<f64>)>),
}

struct ProbDecl {
    child: String,
    parents: Vec<String>,
    rows: Rows,
    line: usize,
}

fn sem(msg: String) -> Error {
    Error::InvalidNetwork(msg)
}

pub fn parse_bif(text: &str) -> Result<DiscreteNet> {
    let toks = lex(text)?;
    let end = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, end };
    let mut name = String::from("unknown");
    let mut vars: Vec<VarDecl> = Vec::new();
    let mut probs: Vec<ProbDecl> = Vec::new();
    while let Some(tok) = p.peek() {
        let kw = match tok {
            Tok::Word(w) => w.clone(),
            Tok::Punct(_) => return p.err("expected `network`, `variable` or `probability`"),
        };
        match kw.as_str() {
            "network" => {
                p.pos += 1;
                name = p.word()?;
                p.punct('{')?;
                while !p.at_punct('}') {
                    p.skip_property()?;
                }
                p.punct('}')?;
            }
            "variable" => {
                let line = p.toks[p.pos].line;
                p.pos += 1;
                let vname = p.word()?;
                p.punct('{')?;
                let mut states = None;
                while !p.at_punct('}') {
                    if p.is_keyword("property") {
                        p.skip_property()?;
                        continue;
                    }
                    p.keyword("type")?;
                    p.keyword("discrete")?;
                    p.punct('[')?;
                    let k = p.word()?;
                    let k: usize = match k.parse() {
                        Ok(k) => k,
                        Err(_) => {
                            p.pos -= 1;
                            return p.err("expected a state count");
                        }
                    };
                    p.punct(']')?;
                    p.punct('{')?;
                    let s = p.word_list('}')?;
                    p.punct('}')?;
                    p.punct(';')?;
                    if s.len() != k {
                        return Err(sem(format!(
                            "{vname} declares {k} states but lists {}",
                            s.len()
                        )));
                    }
                    states = Some(s);
                }
                p.punct('}')?;
                let Some(states) = states else {
                    return Err(sem(format!("{vname} has no type declaration")));
                };
                vars.push(VarDecl {
                    name: vname,
                    states,
                    line,
                });
            }
            "probability" => {
                let line = p.toks[p.pos].line;
                p.pos += 1;
                p.punct('(')?;
                let child = p.word()?;
                let mut parents = Vec::new();
                if p.at_punct('|') {
                    p.pos += 1;
                    parents = p.word_list(')')?;
                }
                p.punct(')')?;
                p.punct('{')?;
                let mut table = None;
                let mut cond = Vec::new();
                while !p.at_punct('}') {
                    if p.is_keyword("property") {
                        p.skip_property()?;
                    } else if p.is_keyword("table") {
                        p.pos += 1;
                        table = Some(p.number_list()?);
                    } else if p.at_punct('(') {
                        p.pos += 1;
                        let vals = p.word_list(')')?;
                        p.punct(')')?;
                        cond.push((vals, p.number_list()?));
                    } else {
                        return p.err("expected `table`, `(` or `}`");
                    }
                }
                p.punct('}')?;
                let rows = match (table, cond.is_empty()) {
                    (Some(t), true) => Rows::Table(t),
                    (None, _) => Rows::Conditional(cond),
                    (Some(_), false) => {
                        return Err(sem(format!("{child} mixes `table` with conditional rows")))
                    }
                };
                probs.push(ProbDecl {
                    child,
                    parents,
                    rows,
                    line,
                });
            }
            other => return p.err(format!("unexpected `{other}`")),
        }
    }
    build(name, vars, probs)
}

fn build(name: String, vars: Vec<VarDecl>, probs: Vec<ProbDecl>) -> Result<DiscreteNet> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        if index.insert(v.name.as_str(), i).is_some() {
            return Err(sem(format!(
                "variable {} declared twice (line {})",
                v.name, v.line
            )));
        }
    }
    let lookup = |n: &str, line: usize| {
        index
            .get(n)
            .copied()
            .ok_or_else(|| sem(format!("undeclared variable {n} (line {line})")))
    };
    let n = vars.len();
    let mut decl: Vec<Option<&ProbDecl>> = vec![None; n];
    let mut graph = MixedGraph::new(vars.iter().map(|v| v.name.clone()), GraphKind::Dag);
    for pd in &probs {
        let c = lookup(&pd.child, pd.line)?;
        if decl[c].is_some() {
            return Err(sem(format!("two probability blocks for {}", pd.child)));
        }
        decl[c] = Some(pd);
        for par in &pd.parents {
            let q = lookup(par, pd.line)?;
            graph.add_directed(q, c).map_err(|e| {
                sem(format!(
                    "probability block for {} (line {}): {e}",
                    pd.child, pd.line
                ))
            })?;
        }
    }
    if !graph.is_directed_acyclic() {
        return Err(Error::Cyclic);
    }
    let card: Vec<usize> = vars.iter().map(|v| v.states.len()).collect();
    let mut tables = Vec::with_capacity(n);
    for c in 0..n {
        let pd =
            decl[c].ok_or_else(|| sem(format!("no probability block for {}", vars[c].name)))?;
        let k = card[c];
        let sorted_parents = graph.parents(c);
        let rows: usize = sorted_parents.iter().map(|&q| card[q]).product();
        let mut table = vec![f64::NAN; rows * k];
        match &pd.rows {
            Rows::Table(t) => {
                if !pd.parents.is_empty() {
                    return Err(sem(format!(
                        "`table` for {} which has parents; use one row per parent configuration",
                        pd.child
                    )));
                }
                if t.len() != k {
                    return Err(sem(format!(
                        "table of {} has {} entries, expected {k}",
                        pd.child,
                        t.len()
                    )));
                }
                table.copy_from_slice(t);
            }
            Rows::Conditional(cond) => {
                let declared: Vec<usize> = pd.parents.iter().map(|q| index[q.as_str()]).collect();
                for (vals, probs) in cond {
                    if vals.len() != declared.len() {
                        return Err(sem(format!(
                            "row of {} lists {} parent values",
                            pd.child,
                            vals.len()
                        )));
                    }
                    if probs.len() != k {
                        return Err(sem(format!(
                            "row of {} has {} entries, expected {k}",
                            pd.child,
                            probs.len()
                        )));
                    }
                    let mut assign = vec![0usize; n];
                    for (&q, val) in declared.iter().zip(vals) {
                        assign[q] =
                            vars[q]
                                .states
                                .iter()
                                .position(|s| s == val)
                                .ok_or_else(|| {
                                    sem(format!("{val} is not a state of {}", vars[q].name))
                                })?;
                    }
                    let r = sorted_parents
                        .iter()
                        .fold(0, |acc, &q| acc * card[q] + assign[q]);
                    if !table[r * k].is_nan() {
                        return Err(sem(format!("duplicate row for {}", pd.child)));
                    }
                    table[r * k..(r + 1) * k].copy_from_slice(probs);
                }
                if table.iter().any(|x| x.is_nan()) {
                    return Err(sem(format!(
                        "missing parent configurations for {}",
                        pd.child
                    )));
                }
            }
        }
        tables.push(table);
    }
    let states = vars.into_iter().map(|v| v.states).collect();
    DiscreteNet::with_states(name, graph, states, tables)
}

/// Canonical BIF text: variables in index order, parents in index order,
/// rows in lexicographic parent order.
pub fn write_bif(net: &DiscreteNet) -> String {
    let g = net.graph();
    let mut out = String::new();
    writeln!(out, "network {} {{\n}}", net.name()).unwrap();
    for v in 0..net.n() {
        writeln!(
            out,
            "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}",
            g.name(v),
            net.card()[v],
            net.states()[v].join(", ")
        )
        .unwrap();
    }
    for v in 0..net.n() {
        let cpt = net.cpt(v);
        let k = net.card()[v];
        let fmt_row = |row: &[f64]| {
            row.iter()
                .map(|p| format!("{p:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        if cpt.parents.is_empty() {
            writeln!(
                out,
                "probability ( {} ) {{\n  table {};\n}}",
                g.name(v),
                fmt_row(&cpt.table)
            )
            .unwrap();
            continue;
        }
        let pnames: Vec<&str> = cpt.parents.iter().map(|&q| g.name(q)).collect();
        writeln!(
            out,
            "probability ( {} | {} ) {{",
            g.name(v),
            pnames.join(", ")
        )
        .unwrap();
        let radix: Vec<usize> = cpt.parents.iter().map(|&q| net.card()[q]).collect();
        let mut digits = vec![0; radix.len()];
        for row in cpt.table.chunks(k) {
            let vals: Vec<&str> = cpt
                .parents
                .iter()
                .zip(&digits)
                .map(|(&q, &d)| net.states()[q][d].as_str())
                .collect();
            writeln!(out, "  ({}) {};", vals.join(", "), fmt_row(row)).unwrap();
            super::increment(&mut digits, &radix);
        }
        out.push_str("}\n");
    }
    out
}
