//! Text format for generator matrices.
//!
//! ```text
//! 2 3
//! 100
//! 010
//! 001
//!
//! 001
//! 010
//! 100
//! ```
//!
//! Header `n s`, then `n` blocks of `s` rows of `s` characters in `{0,1}`,
//! blocks separated by blank lines. Row `i` of block `j` gives digit `i` of
//! coordinate `j`; character `k` is the entry in column `k`.

use super::GeneratorSet;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_matrix_file(text: &str) -> Result<GeneratorSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('#'));

    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| parse_err(1, "missing header `n s`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(header_line, "header must be `n s`"));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(header_line, format!("bad dimension `{}`", fields[0])))?;
    let s: u32 = fields[1]
        .parse()
        .map_err(|_| parse_err(header_line, format!("bad resolution `{}`", fields[1])))?;
    if n == 0 {
        return Err(parse_err(header_line, "dimension must be at least 1"));
    }
    if s > 63 {
        return Err(parse_err(header_line, "resolution must be at most 63"));
    }

    let mut blocks: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut current: Vec<u64> = Vec::new();
    let mut last_line = header_line;
    for (no, line) in lines {
        last_line = no;
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        if blocks.len() >= n {
            return Err(parse_err(no, format!("more than {n} matrices")));
        }
        if line.chars().count() != s as usize {
            return Err(parse_err(
                no,
                format!("row has length {}, expected {s}", line.chars().count()),
            ));
        }
        let mut row = 0u64;
        for (k, c) in line.chars().enumerate() {
            match c {
                '0' => {}
                '1' => row |= 1 << k,
                other => return Err(parse_err(no, format!("unexpected character `{other}`"))),
            }
        }
        current.push(row);
        if current.len() > s as usize {
            return Err(parse_err(no, format!("matrix {} has more than {s} rows", blocks.len() + 1)));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    if s == 0 {
        blocks.resize(n, Vec::new());
    }
    if blocks.len() != n {
        return Err(parse_err(
            last_line,
            format!("expected {n} matrices, found {}", blocks.len()),
        ));
    }
    if let Some((j, b)) = blocks.iter().enumerate().find(|(_, b)| b.len() != s as usize) {
        return Err(parse_err(
            last_line,
            format!("matrix {} has {} rows, expected {s}", j + 1, b.len()),
        ));
    }
    GeneratorSet::new(n, s, blocks)
}

pub fn write_matrix_file(gens: &GeneratorSet) -> String {
    let s = gens.resolution() as usize;
    let mut out = format!("{} {}\n", gens.dim(), s);
    for (j, m) in gens.rows().iter().enumerate() {
        if j > 0 {
            out.push('\n');
        }
        for row in m {
            out.extend((0..s).map(|k| if (row >> k) & 1 == 1 { '1' } else { '0' }));
            out.push('\n');
        }
    }
    out
}
