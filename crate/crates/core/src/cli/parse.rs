//! Inline map and number syntax for command-line arguments.
//!
//! Maps: `z`, `id`, `zK`, `rotation(c)`, `moebius(gamma, b)`, `poly(c0, c1, ...)`.
//! Numbers: `0.5`, `-i`, `2i`, `0.3-0.2i`, `polar(r, t)`, with `pi` allowed
//! in reals as `pi`, `pi/4`, `2pi/3`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::maps::{SelfMap, DEFAULT_GRID};
use crate::series::TruncSeries;

pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(pos) = t.find("pi") {
        let (head, tail) = (&t[..pos], &t[pos + 2..]);
        let factor = match head.trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.trim_end_matches('*').parse::<f64>().map_err(|_| format!("bad real `{s}`"))?,
        };
        let divisor = match tail.trim() {
            "" => 1.0,
            d => d.strip_prefix('/').and_then(|d| d.trim().parse::<f64>().ok()).ok_or_else(|| format!("bad real `{s}`"))?,
        };
        return Ok(factor * PI / divisor);
    }
    t.parse::<f64>().map_err(|_| format!("bad real `{s}`"))
}

fn parse_imag_coeff(s: &str) -> Result<f64, String> {
    match s.trim() {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        t => parse_real(t.trim_end_matches('*')),
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let mut t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    while t.starts_with('(') && t.ends_with(')') {
        t = t[1..t.len() - 1].to_string();
    }
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some(args) = call_args(&t, "polar")? {
        let [r, theta] = args.as_slice() else {
            return Err(format!("polar takes two arguments: `{s}`"));
        };
        return Ok(Complex64::from_polar(parse_real(r)?, parse_real(theta)?));
    }
    let Some(body) = t.strip_suffix('i').filter(|_| !t.ends_with("pi")) else {
        return Ok(Complex64::new(parse_real(&t)?, 0.0));
    };
    // Split at the last sign that is not an exponent sign or the leading one.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(parse_real(&body[..k])?, parse_imag_coeff(&body[k..])?)),
        None => Ok(Complex64::new(0.0, parse_imag_coeff(body)?)),
    }
}

/// Splits `name(a, b, ...)` into its top-level arguments, or `None` if `s`
/// is not a call to `name`.
fn call_args(s: &str, name: &str) -> Result<Option<Vec<String>>, String> {
    let Some(rest) = s.strip_prefix(name).and_then(|r| r.strip_prefix('(')) else {
        return Ok(None);
    };
    let inner = rest.strip_suffix(')').ok_or_else(|| format!("unbalanced parentheses in `{s}`"))?;
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced parentheses in `{s}`"));
        }
        cur.push(ch);
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    args.push(cur);
    Ok(Some(args))
}

/// Parses an inline map and validates it on the default grid.
pub fn parse_map(s: &str) -> Result<SelfMap, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let err = |e: crate::maps::MapError| format!("`{s}`: {e}");
    if t == "id" || t == "z" {
        return SelfMap::rotation(Complex64::new(1.0, 0.0)).map_err(err);
    }
    if let Some(k) = t.strip_prefix('z').and_then(|k| k.parse::<usize>().ok()) {
        if k == 0 {
            return Err(format!("`{s}`: constant maps are not accepted"));
        }
        return Ok(SelfMap::monomial(k));
    }
    if let Some(args) = call_args(&t, "rotation")? {
        let [l] = args.as_slice() else {
            return Err(format!("rotation takes one argument: `{s}`"));
        };
        return SelfMap::rotation(parse_complex(l)?).map_err(err);
    }
    if let Some(args) = call_args(&t, "moebius")? {
        let [g, b] = args.as_slice() else {
            return Err(format!("moebius takes two arguments: `{s}`"));
        };
        return SelfMap::moebius(parse_complex(g)?, parse_complex(b)?).map_err(err);
    }
    if let Some(args) = call_args(&t, "poly")? {
        let coeffs = args.iter().map(|a| parse_complex(a)).collect::<Result<Vec<_>, _>>()?;
        let series = TruncSeries::new(coeffs).map_err(|e| format!("`{s}`: {e}"))?;
        return SelfMap::polynomial(series).and_then(|m| m.validated(DEFAULT_GRID)).map_err(err);
    }
    Err(format!("unrecognised map `{s}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("0.5i").unwrap(), c(0.0, 0.5));
        assert_eq!(parse_complex("-0.4+0.2i").unwrap(), c(-0.4, 0.2));
        assert_eq!(parse_complex("(-0.4+0.2i)").unwrap(), c(-0.4, 0.2));
        assert_eq!(parse_complex("0.3 - i").unwrap(), c(0.3, -1.0));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), c(1e-3, 0.2));
        assert!((parse_complex("polar(1, pi/4)").unwrap() - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-16);
        assert!((parse_real("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(parse_complex("pi").unwrap(), c(PI, 0.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn maps() {
        assert!(parse_map("z").unwrap().is_rotation(0.0));
        assert_eq!(parse_map("z3").unwrap(), SelfMap::monomial(3));
        assert!(parse_map("rotation(i)").unwrap().is_rotation(1e-15));
        let m = parse_map("moebius(1, 0.5)").unwrap();
        assert_eq!(m.value_at_origin(), c(0.5, 0.0));
        assert!(parse_map("moebius(polar(1,pi/3), 0.2i)").is_ok());
        let p = parse_map("poly(0, 0.45, 0.45)").unwrap();
        assert_eq!(p.polynomial_degree(), Some(2));
        assert!(parse_map("poly(0, 2)").is_err());
        assert!(parse_map("rotation(2)").is_err());
        assert!(parse_map("z0").is_err());
        assert!(parse_map("sinh").is_err());
        assert!(parse_map("poly(0,(1)").is_err());
    }
}
