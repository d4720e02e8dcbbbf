//! Builtin models addressed by name, e.g. `randers-const(0.5, 0)` or
//! `affine(cylinder(1), 0.3)`.

use crate::error::{FermatError, Result};
use crate::model::PolynomialModel;

/// Parses a registry expression into a model.
///
/// Recognised forms: `flat`, `flat(m)`, `randers-const(b1, .., bm)`,
/// `randers-rot(b)`, `cylinder(R)`, `affine(base, c0)` and
/// `affine-field(base, c0, c1, ..)` where the offset is
/// `d(y) = c0 + c1 y1 + c2 y1^2 + ..`.
pub fn parse_model(spec: &str) -> Result<PolynomialModel> {
    let spec = spec.trim();
    let (name, args) = split_call(spec)?;
    let nums = |args: &[&str]| -> Result<Vec<f64>> { args.iter().map(|a| parse_num(a)).collect() };
    match name {
        "flat" => match args.as_slice() {
            [] => Ok(PolynomialModel::flat(2)),
            [m] => {
                let m: usize = m.trim().parse().map_err(|_| arg_err(spec, "dimension"))?;
                if m == 0 {
                    return Err(arg_err(spec, "dimension must be positive"));
                }
                Ok(PolynomialModel::flat(m))
            }
            _ => Err(arg_err(spec, "flat takes at most one argument")),
        },
        "randers-const" => {
            let b = nums(&args)?;
            if b.is_empty() {
                return Err(arg_err(spec, "randers-const needs the drift vector"));
            }
            Ok(PolynomialModel::randers_const(&b))
        }
        "randers-rot" => match nums(&args)?.as_slice() {
            [b] => Ok(PolynomialModel::randers_rot(*b)),
            _ => Err(arg_err(spec, "randers-rot takes one argument")),
        },
        "cylinder" => match nums(&args)?.as_slice() {
            [r] => PolynomialModel::cylinder(*r),
            _ => Err(arg_err(spec, "cylinder takes one radius")),
        },
        "affine" => match args.as_slice() {
            [base, c0] => {
                let base = parse_model(base)?;
                Ok(PolynomialModel::affine(&base, parse_num(c0)?))
            }
            _ => Err(arg_err(spec, "affine takes (base, c0)")),
        },
        "affine-field" => match args.split_first() {
            Some((base, coeffs)) if !coeffs.is_empty() => {
                let base = parse_model(base)?;
                Ok(PolynomialModel::affine_field(&base, &nums(coeffs)?))
            }
            _ => Err(arg_err(spec, "affine-field takes (base, c0, c1, ..)")),
        },
        other => Err(FermatError::Parse {
            location: None,
            message: format!("unknown model '{other}'"),
        }),
    }
}

/// Splits `name(a, b(c, d), e)` into the name and top-level arguments.
fn split_call(spec: &str) -> Result<(&str, Vec<&str>)> {
    let Some(open) = spec.find('(') else {
        return Ok((spec, Vec::new()));
    };
    if !spec.ends_with(')') {
        return Err(arg_err(spec, "unbalanced parentheses"));
    }
    let name = spec[..open].trim();
    let inner = &spec[open + 1..spec.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(arg_err(spec, "unbalanced parentheses"));
                }
            }
            ',' if depth == 0 => {
                args.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(arg_err(spec, "unbalanced parentheses"));
    }
    let last = inner[start..].trim();
    if !last.is_empty() || !args.is_empty() {
        args.push(last);
    }
    Ok((name, args))
}

fn parse_num(s: &str) -> Result<f64> {
    let s = s.trim();
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| FermatError::Parse {
        location: None,
        message: format!("expected a finite number, got '{s}'"),
    })
}

fn arg_err(spec: &str, msg: &str) -> FermatError {
    FermatError::Parse {
        location: None,
        message: format!("in model '{spec}': {msg}"),
    }
}
