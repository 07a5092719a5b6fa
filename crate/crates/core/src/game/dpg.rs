//! The line-oriented `.dpg` text format.
//!
//! ```text
//! # comment
//! dpg <numVertices>
//! vertex <id> <MIN|MAX> [name]
//! edge <src> <dst> <weight> <discount>
//! ```
//!
//! Edge ids are assigned in order of appearance.

use std::fmt::Write as _;

use super::{Game, Player};
use crate::rational::{format_compact, parse_rational, RationalParseError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn parse_game(text: &str) -> Result<Game, ParseError> {
    let mut header: Option<usize> = None;
    let mut owners: Vec<Option<Player>> = Vec::new();
    let mut names: Vec<Option<String>> = Vec::new();
    let mut edges = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "dpg" => {
                if header.is_some() {
                    return Err(err(line, "duplicate dpg header"));
                }
                let [_, n] = fields[..] else {
                    return Err(err(line, "expected `dpg <numVertices>`"));
                };
                let n: usize = n.parse().map_err(|_| err(line, format!("invalid vertex count `{n}`")))?;
                header = Some(n);
                owners = vec![None; n];
                names = vec![None; n];
            }
            "vertex" => {
                let n = header.ok_or_else(|| err(line, "vertex before dpg header"))?;
                if !(3..=4).contains(&fields.len()) {
                    return Err(err(line, "expected `vertex <id> <MIN|MAX> [name]`"));
                }
                let id: usize = fields[1]
                    .parse()
                    .map_err(|_| err(line, format!("invalid vertex id `{}`", fields[1])))?;
                if id >= n {
                    return Err(err(line, format!("vertex id {id} out of range (dpg {n})")));
                }
                if owners[id].is_some() {
                    return Err(err(line, format!("duplicate vertex id {id}")));
                }
                owners[id] = Some(match fields[2] {
                    "MIN" => Player::Min,
                    "MAX" => Player::Max,
                    other => return Err(err(line, format!("unknown owner `{other}`"))),
                });
                if let Some(name) = fields.get(3) {
                    if names.iter().any(|n| n.as_deref() == Some(*name)) {
                        return Err(err(line, format!("duplicate vertex name `{name}`")));
                    }
                    names[id] = Some(name.to_string());
                }
            }
            "edge" => {
                let n = header.ok_or_else(|| err(line, "edge before dpg header"))?;
                let [_, src, dst, w, l] = fields[..] else {
                    return Err(err(line, "expected `edge <src> <dst> <weight> <discount>`"));
                };
                let vertex = |s: &str| -> Result<usize, ParseError> {
                    let v: usize = s.parse().map_err(|_| err(line, format!("invalid vertex id `{s}`")))?;
                    if v >= n {
                        return Err(err(line, format!("vertex id {v} out of range (dpg {n})")));
                    }
                    Ok(v)
                };
                let rational = |s: &str| {
                    parse_rational(s).map_err(|e| match e {
                        RationalParseError::ZeroDenominator => err(line, "zero denominator"),
                        other => err(line, other.to_string()),
                    })
                };
                edges.push((vertex(src)?, vertex(dst)?, rational(w)?, rational(l)?));
            }
            other => return Err(err(line, format!("unknown declaration `{other}`"))),
        }
    }

    let Some(_) = header else {
        return Err(err(last_line.max(1), "missing dpg header"));
    };
    let owners = owners
        .into_iter()
        .enumerate()
        .map(|(v, o)| o.ok_or_else(|| err(last_line, format!("vertex {v} not declared"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut g = Game::with_names(owners, names);
    for (src, dst, w, l) in edges {
        g.add_edge(src, dst, w, l).expect("endpoints checked during parsing");
    }
    Ok(g)
}

pub fn serialize_game(g: &Game) -> String {
    let mut out = String::new();
    writeln!(out, "dpg {}", g.num_vertices()).unwrap();
    for v in g.vertices() {
        match g.name(v) {
            Some(name) => writeln!(out, "vertex {v} {} {name}", g.owner(v)).unwrap(),
            None => writeln!(out, "vertex {v} {}", g.owner(v)).unwrap(),
        }
    }
    for e in g.edges() {
        writeln!(
            out,
            "edge {} {} {} {}",
            e.src,
            e.dst,
            format_compact(&e.weight),
            format_compact(&e.discount)
        )
        .unwrap();
    }
    out
}
