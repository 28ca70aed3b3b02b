//! SDPA sparse format (`.dat-s`) export and import.
//!
//! A problem `optimize ⟨C,X⟩ s.t. ⟨A_k,X⟩ = b_k` is written in SDPA's dual
//! orientation: `maximize ⟨F_0,X⟩ s.t. ⟨F_k,X⟩ = c_k`, with `F_0 = ±C`.

use std::fmt::Write as _;
use std::io::Write;

use super::problem::{Block, BlockKind, Constraint, ConstraintKind, SdpProblem, Term};
use crate::error::{Error, Result};
use crate::poly::Sense;

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaEntry {
    /// 0 for the objective, k for constraint k (1-based)
    pub cons: usize,
    /// 1-based
    pub block: usize,
    /// 1-based, `i ≤ j`
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Sorted, merged, zero-free SDPA data; equality of two of these is the
/// round-trip criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalSdpa {
    pub block_sizes: Vec<i64>,
    pub rhs: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

pub fn canonical_form(p: &SdpProblem) -> Result<CanonicalSdpa> {
    if p.constraints.is_empty() {
        return Err(Error::Unencodable {
            index: 0,
            reason: "problem has no constraints".into(),
        });
    }
    p.validate()?;
    let mut raw = Vec::new();
    let sign = match p.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    for t in &p.objective {
        raw.push((0, t, sign));
    }
    for (k, c) in p.constraints.iter().enumerate() {
        if c.kind != ConstraintKind::Eq {
            return Err(Error::Unencodable {
                index: k + 1,
                reason: format!("{:?} constraint; convert to equality form first", c.kind),
            });
        }
        for t in &c.terms {
            raw.push((k + 1, t, 1.0));
        }
    }
    let mut entries: Vec<SdpaEntry> = raw
        .into_iter()
        .map(|(cons, t, s)| SdpaEntry {
            cons,
            block: t.block + 1,
            i: t.i + 1,
            j: t.j + 1,
            value: s * t.value,
        })
        .collect();
    entries.sort_by(|a, b| (a.cons, a.block, a.i, a.j).cmp(&(b.cons, b.block, b.i, b.j)));
    let mut merged: Vec<SdpaEntry> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last_mut() {
            Some(last)
                if (last.cons, last.block, last.i, last.j) == (e.cons, e.block, e.i, e.j) =>
            {
                last.value += e.value
            }
            _ => merged.push(e),
        }
    }
    merged.retain(|e| e.value != 0.0);
    Ok(CanonicalSdpa {
        block_sizes: p
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Psd => b.size as i64,
                BlockKind::Diagonal => -(b.size as i64),
            })
            .collect(),
        rhs: p.constraints.iter().map(|c| c.rhs).collect(),
        entries: merged,
    })
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_sdpa_string(p: &SdpProblem) -> Result<String> {
    let c = canonical_form(p)?;
    let mut s = String::new();
    let _ = writeln!(s, "{}", c.rhs.len());
    let _ = writeln!(s, "{}", c.block_sizes.len());
    let sizes: Vec<String> = c.block_sizes.iter().map(i64::to_string).collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let rhs: Vec<String> = c.rhs.iter().map(|&v| fmt_value(v)).collect();
    let _ = writeln!(s, "{}", rhs.join(" "));
    for e in &c.entries {
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            e.cons,
            e.block,
            e.i,
            e.j,
            fmt_value(e.value)
        );
    }
    Ok(s)
}

pub fn export_sdpa<W: Write>(p: &SdpProblem, sink: &mut W) -> Result<()> {
    sink.write_all(to_sdpa_string(p)?.as_bytes())?;
    Ok(())
}

/// Parses SDPA sparse text into a maximization problem.
///
/// Lines starting with `"` or `*` before the data are comments; `{ } ( ) ,`
/// are treated as whitespace.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem> {
    let mut tokens: Vec<(usize, String)> = Vec::new();
    let mut header_done = false;
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim_start();
        if !header_done && (t.starts_with('"') || t.starts_with('*')) {
            continue;
        }
        header_done = header_done || !t.is_empty();
        let cleaned: String = line
            .chars()
            .map(|c| if "{}(),".contains(c) { ' ' } else { c })
            .collect();
        for tok in cleaned.split_whitespace() {
            tokens.push((ln + 1, tok.to_string()));
        }
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| -> Result<(usize, String)> {
        it.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of input reading {what}"),
        })
    };
    fn num<T: std::str::FromStr>(tok: (usize, String), what: &str) -> Result<T> {
        tok.1.parse().map_err(|_| Error::Parse {
            line: tok.0,
            message: format!("bad {what} {:?}", tok.1),
        })
    }
    let m: usize = num(next("constraint count")?, "constraint count")?;
    let nb: usize = num(next("block count")?, "block count")?;
    let mut blocks = Vec::with_capacity(nb);
    for _ in 0..nb {
        let s: i64 = num(next("block size")?, "block size")?;
        blocks.push(Block {
            kind: if s < 0 {
                BlockKind::Diagonal
            } else {
                BlockKind::Psd
            },
            size: s.unsigned_abs() as usize,
        });
    }
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let rhs: f64 = num(next("right-hand side")?, "right-hand side")?;
        constraints.push(Constraint {
            terms: Vec::new(),
            kind: ConstraintKind::Eq,
            rhs,
        });
    }
    let mut objective = Vec::new();
    let rest: Vec<(usize, String)> = it.collect();
    if rest.len() % 5 != 0 {
        return Err(Error::Parse {
            line: rest.last().map(|t| t.0).unwrap_or(0),
            message: "entry lines must have 5 fields".into(),
        });
    }
    for chunk in rest.chunks(5) {
        let line = chunk[0].0;
        let cons: usize = num(chunk[0].clone(), "constraint index")?;
        let block: usize = num(chunk[1].clone(), "block index")?;
        let i: usize = num(chunk[2].clone(), "row index")?;
        let j: usize = num(chunk[3].clone(), "column index")?;
        let value: f64 = num(chunk[4].clone(), "value")?;
        if cons > m || block == 0 || block > nb || i == 0 || j == 0 {
            return Err(Error::Parse {
                line,
                message: format!("index out of range: {cons} {block} {i} {j}"),
            });
        }
        let t = Term::new(block - 1, i - 1, j - 1, value);
        if cons == 0 {
            objective.push(t);
        } else {
            constraints[cons - 1].terms.push(t);
        }
    }
    let p = SdpProblem {
        blocks,
        constraints,
        objective,
        sense: Sense::Maximize,
    };
    p.validate().map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(p)
}
