use std::fmt::Write;

use super::Mask;
use crate::error::{Error, Result};

/// Parses the text mask format: a `rows cols` header followed by `rows` lines of
/// `cols` characters from `{0,1}`. Blank trailing lines are ignored.
pub fn parse_mask(text: &str) -> Result<Mask> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        col: 1,
        msg: "missing `rows cols` header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |i: usize| -> Result<usize> {
        dims.get(i)
            .ok_or_else(|| Error::Parse {
                line: hline + 1,
                col: 1,
                msg: "header must be `rows cols`".into(),
            })?
            .parse::<usize>()
            .map_err(|e| Error::Parse {
                line: hline + 1,
                col: 1,
                msg: format!("bad dimension: {e}"),
            })
    };
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline + 1,
            col: 1,
            msg: "header must be `rows cols`".into(),
        });
    }
    let (rows, cols) = (parse_dim(0)?, parse_dim(1)?);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: hline + 1,
            col: 1,
            msg: "dimensions must be positive".into(),
        });
    }

    let mut bits = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (lno, line) in lines {
        if seen == rows {
            return Err(Error::Parse {
                line: lno + 1,
                col: 1,
                msg: format!("more than {rows} rows"),
            });
        }
        let line = line.trim_end();
        let mut n = 0;
        for (ci, ch) in line.chars().enumerate() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::Parse {
                        line: lno + 1,
                        col: ci + 1,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
            n += 1;
        }
        if n != cols {
            return Err(Error::Parse {
                line: lno + 1,
                col: n + 1,
                msg: format!("expected {cols} cells, found {n}"),
            });
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse {
            line: hline + 1 + seen + 1,
            col: 1,
            msg: format!("expected {rows} rows, found {seen}"),
        });
    }
    Mask::new(rows, cols, &bits)
}

pub fn format_mask(mask: &Mask) -> String {
    let mut s = String::with_capacity(mask.n_rows() * (mask.n_cols() + 1) + 16);
    let _ = writeln!(s, "{} {}", mask.n_rows(), mask.n_cols());
    for y in 0..mask.n_rows() {
        for x in 0..mask.n_cols() {
            s.push(if mask.get(y, x) { '1' } else { '0' });
        }
        s.push('\n');
    }
    s
}
