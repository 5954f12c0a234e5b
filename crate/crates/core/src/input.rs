//! Text grammars for command-line input.
//!
//! * plane: `"c1,c2,...,cn=b"`
//! * points or matrix rows: `"2,0;0,3"`
//! * r schedule: `"100,1000,5000"` or the geometric form `"100..100000x10"`

use num_bigint::BigInt;

use crate::density::HyperplaneSystem;
use crate::error::{Error, Result};
use crate::intlinalg::IntMatrix;

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<BigInt>> {
    if s.trim().is_empty() {
        return Err(Error::Parse("empty coefficient list".into()));
    }
    s.split(',').map(parse_int).collect()
}

pub fn parse_plane(s: &str) -> Result<HyperplaneSystem> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected \"c1,...,cn=b\", got {s:?}")))?;
    HyperplaneSystem::hyperplane(parse_list(lhs)?, parse_int(rhs)?)
}

/// Semicolon-separated rows of comma-separated integers.
pub fn parse_rows(s: &str) -> Result<Vec<Vec<BigInt>>> {
    let rows: Vec<Vec<BigInt>> = s.split(';').map(parse_list).collect::<Result<_>>()?;
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Parse("rows have different lengths".into()));
    }
    Ok(rows)
}

pub fn parse_matrix(s: &str) -> Result<IntMatrix> {
    IntMatrix::from_rows(parse_rows(s)?)
}

pub fn parse_schedule(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("bad r schedule {s:?}"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let out: Vec<u64> = if let Some((from, rest)) = s.split_once("..") {
        let (to, factor) = rest.split_once('x').ok_or_else(bad)?;
        let (from, to, factor) = (num(from)?, num(to)?, num(factor)?);
        if from == 0 || factor < 2 || to < from {
            return Err(bad());
        }
        std::iter::successors(Some(from), |&r| r.checked_mul(factor))
            .take_while(|&r| r <= to)
            .collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad());
    }
    Ok(out)
}
