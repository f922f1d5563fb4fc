//! Text formats for algebras and F-structures.
//!
//! ```text
//! algebra c3
//! size 3
//! leq
//! 111
//! 011
//! 001
//! end
//!
//! fstructure sat3 kind=n4
//! algebra c3
//! N 0: 2
//! N 1: 2
//! N 2: 0 1 2
//! end
//! ```
//!
//! `#` starts a comment. The `algebra` line of an F-structure names an
//! earlier block, a built-in (`one`, `bool2`, `chain3`, `chain4`, `bool4`),
//! or opens an inline block that runs to its own `end`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{parse_algebra_block, Elem, HeytingAlgebra};
use crate::fidel::{FStructure, Kind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FileError {
    pub line: usize,
    pub message: String,
}

impl FileError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        FileError {
            line,
            message: message.into(),
        }
    }
}

/// Named algebras available without a file.
pub fn builtin_algebra(name: &str) -> Option<HeytingAlgebra> {
    Some(match name {
        "one" | "trivial" => HeytingAlgebra::chain(1),
        "bool2" | "two" | "chain2" => HeytingAlgebra::chain(2),
        "chain3" => HeytingAlgebra::chain(3),
        "chain4" => HeytingAlgebra::chain(4),
        "bool4" => HeytingAlgebra::powerset(2),
        "bool8" => HeytingAlgebra::powerset(3),
        _ => return None,
    })
}

fn strip_comments(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| {
            let body = l.split('#').next().unwrap_or("");
            (i + 1, body.to_string())
        })
        .collect()
}

/// Everything defined in a model file.
#[derive(Debug, Clone, Default)]
pub struct ModelFile {
    pub algebras: Vec<(String, HeytingAlgebra)>,
    pub structures: Vec<(String, FStructure)>,
}

pub fn parse_algebra_file(text: &str) -> Result<Vec<(String, HeytingAlgebra)>, FileError> {
    Ok(parse_model_file(text)?.algebras)
}

pub fn parse_fstructure_file(text: &str) -> Result<Vec<(String, FStructure)>, FileError> {
    Ok(parse_model_file(text)?.structures)
}

/// Parses any mix of `algebra` and `fstructure` blocks.
///
/// F-structure blocks are shape-checked only; run the validators of
/// [`crate::fidel`] to check the clauses of their kind.
pub fn parse_model_file(text: &str) -> Result<ModelFile, FileError> {
    let lines = strip_comments(text);
    let mut it = lines.into_iter().filter(|(_, l)| !l.trim().is_empty());
    let mut out = ModelFile::default();
    let mut known: BTreeMap<String, HeytingAlgebra> = BTreeMap::new();
    while let Some((lineno, line)) = it.next() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["algebra", name] => {
                let (name, alg) = parse_algebra_block(&mut it, name)?;
                known.insert(name.clone(), alg.clone());
                out.algebras.push((name, alg));
            }
            ["fstructure", name, rest @ ..] => {
                let mut kind = Kind::N4;
                for w in rest {
                    match w.strip_prefix("kind=") {
                        Some(k) => kind = k.parse().map_err(|e: String| FileError::at(lineno, e))?,
                        None => return Err(FileError::at(lineno, format!("unexpected `{w}`"))),
                    }
                }
                let s = parse_fstructure_body(&mut it, kind, &mut known, lineno)?;
                out.structures.push((name.to_string(), s));
            }
            _ => return Err(FileError::at(lineno, format!("unexpected `{}`", line.trim()))),
        }
    }
    Ok(out)
}

fn parse_fstructure_body(
    it: &mut dyn Iterator<Item = (usize, String)>,
    kind: Kind,
    known: &mut BTreeMap<String, HeytingAlgebra>,
    start: usize,
) -> Result<FStructure, FileError> {
    let mut algebra: Option<HeytingAlgebra> = None;
    let mut negs: BTreeMap<Elem, Vec<Elem>> = BTreeMap::new();
    let mut pending_inline: Option<(usize, String)> = None;
    loop {
        let (lineno, line) = match pending_inline.take() {
            Some(l) => l,
            None => it
                .next()
                .ok_or_else(|| FileError::at(start, "fstructure block not terminated by `end`"))?,
        };
        let t = line.trim();
        if let Some(name) = t.strip_prefix("algebra ") {
            let name = name.trim();
            // Peek: an inline block starts with `size`.
            let next = it
                .next()
                .ok_or_else(|| FileError::at(lineno, "unexpected end of file"))?;
            if next.1.trim().starts_with("size") {
                let mut chained = std::iter::once(next).chain(&mut *it);
                let (n, alg) = parse_algebra_block(&mut chained, name)?;
                known.insert(n, alg.clone());
                algebra = Some(alg);
            } else {
                let alg = known
                    .get(name)
                    .cloned()
                    .or_else(|| builtin_algebra(name))
                    .ok_or_else(|| FileError::at(lineno, format!("unknown algebra `{name}`")))?;
                algebra = Some(alg);
                pending_inline = Some(next);
            }
            continue;
        }
        if t == "end" {
            let alg = algebra.ok_or_else(|| FileError::at(lineno, "fstructure without algebra"))?;
            let size = alg.size();
            let mut family = Vec::with_capacity(size);
            for x in 0..size {
                family.push(
                    negs.remove(&x)
                        .ok_or_else(|| FileError::at(lineno, format!("missing `N {x}:` line")))?,
                );
            }
            if let Some((&x, _)) = negs.iter().next() {
                return Err(FileError::at(lineno, format!("element {x} out of range")));
            }
            return FStructure::unchecked(alg, family, kind)
                .map_err(|e| FileError::at(lineno, e.to_string()));
        }
        if let Some(rest) = t.strip_prefix('N') {
            let (head, vals) = rest
                .split_once(':')
                .ok_or_else(|| FileError::at(lineno, "expected `N <x>: <values>`"))?;
            let x: Elem = head
                .trim()
                .parse()
                .map_err(|_| FileError::at(lineno, "bad element index"))?;
            let values = vals
                .split_whitespace()
                .map(|v| v.parse::<Elem>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| FileError::at(lineno, "bad negation value"))?;
            if negs.insert(x, values).is_some() {
                return Err(FileError::at(lineno, format!("duplicate line for N {x}")));
            }
            continue;
        }
        return Err(FileError::at(lineno, format!("unexpected `{t}` in fstructure block")));
    }
}

/// Writes a structure in the format read by [`parse_fstructure_file`],
/// with its algebra inline.
pub fn write_fstructure(name: &str, s: &FStructure) -> String {
    let alg = crate::algebra::write_algebra(&format!("{name}_algebra"), s.algebra());
    let mut out = format!("fstructure {name} kind={}\n", s.kind().as_str());
    out.push_str(&alg);
    for x in s.algebra().elements() {
        let vals: Vec<String> = s.negs(x).iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("N {x}: {}\n", vals.join(" ")));
    }
    out.push_str("end\n");
    out
}
