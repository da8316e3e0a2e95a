use std::io::{BufRead, Write};

use super::AssociationVars;
use crate::error::{Error, Result};

const HEADER: &str = "side,node,ue,slot";

/// One row per active link, BS rows first, each block in (slot, ue, node) order.
pub fn write_association_csv<W: Write>(v: &AssociationVars, mut w: W) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    let (n_bs, n_sat, n_ue, n_t) = v.dims();
    for (side, arr, nodes) in [("bs", &v.alpha, n_bs), ("sat", &v.beta, n_sat)] {
        for t in 0..n_t {
            for k in 0..n_ue {
                for n in 0..nodes {
                    if arr[[n, k, t]] != 0 {
                        writeln!(w, "{side},{n},{k},{t}")?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Reads an association written by [`write_association_csv`] into arrays of the
/// given shape.
pub fn read_association_csv<R: BufRead>(
    r: R,
    n_bs: usize,
    n_sat: usize,
    n_ue: usize,
    n_slots: usize,
) -> Result<AssociationVars> {
    let mut v = AssociationVars::zeros(n_bs, n_sat, n_ue, n_slots);
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != HEADER {
                return Err(Error::Csv { line: lineno, reason: format!("expected header `{HEADER}`") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Csv { line: lineno, reason: "expected 4 fields".into() });
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Csv { line: lineno, reason: format!("`{s}`: {e}") })
        };
        let (n, k, t) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
        let (arr, nodes) = match fields[0] {
            "bs" => (&mut v.alpha, n_bs),
            "sat" => (&mut v.beta, n_sat),
            other => return Err(Error::Csv { line: lineno, reason: format!("unknown side `{other}`") }),
        };
        if n >= nodes || k >= n_ue || t >= n_slots {
            return Err(Error::Csv { line: lineno, reason: "index out of range".into() });
        }
        arr[[n, k, t]] = 1;
    }
    Ok(v)
}
