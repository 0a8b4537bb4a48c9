//! Complex number tokens on the command line: `2`, `-1.5`, `1+i`,
//! `0.5-2i`, `i`, and `j` / `jbar` for the primitive cube roots of unity.

use anyhow::{anyhow, bail, Result};
use arrangelab_core::ComplexScalar;

/// `(-1 + i sqrt 3) / 2`, a root of `z^2 + z + 1`.
pub fn j() -> ComplexScalar {
    ComplexScalar::new(-0.5, 3f64.sqrt() / 2.0)
}

fn real(s: &str, token: &str) -> Result<f64> {
    let x: f64 = s.parse().map_err(|_| anyhow!("bad number {s:?} in {token:?}"))?;
    if !x.is_finite() {
        bail!("non-finite number in {token:?}");
    }
    Ok(x)
}

pub fn parse_scalar(token: &str) -> Result<ComplexScalar> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    match s.as_str() {
        "" => bail!("empty number"),
        "j" => return Ok(j()),
        "-j" => return Ok(-j()),
        "jbar" | "conj(j)" | "j^2" => return Ok(j().conj()),
        "-jbar" => return Ok(-j().conj()),
        _ => {}
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(ComplexScalar::new(real(&s, token)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k], token)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => real(other, token)?,
    };
    Ok(ComplexScalar::new(re, im))
}

/// Comma-separated scalars.
pub fn parse_list(token: &str) -> Result<Vec<ComplexScalar>> {
    token.split(',').map(parse_scalar).collect()
}

/// Comma-separated reals.
pub fn parse_reals(token: &str) -> Result<Vec<f64>> {
    token.split(',').map(|s| real(s.trim(), token)).collect()
}
