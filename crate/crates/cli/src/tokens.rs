//! Value syntax shared by the config file and the flags.
//!
//! * complex: `re` or `re,im`
//! * point lists: complex values separated by `;`
//! * Herglotz functions (`field.p`):
//!   `const:re[,im]`, `koebe:k`, `power:k,n`, `cayley`,
//!   `essential:tanh-sqrt`, `essential:sqrt-ratio`, `essential:power-ratio:α`,
//!   `rational:n0;n1;…|d0;d1;…`, `series:c0;c1;…` (p = (1+s)/(1−s)),
//!   `file:path` (JSON written by `recover`)
//! * driving (`field.tau`): a complex value, or `steps:t0=τ0;t1=τ1;…[;end=T]`
//! * maps (`map`): `f1:k`, `f2:k`, `fn:k,n`, `fsigma:σ`, `mobius:a;b;c;d`,
//!   `chain`, `grid:path`

use std::path::PathBuf;

use loewner_core::analysis::ClosedFormMap;
use loewner_core::geometry::Mobius;
use loewner_core::herglotz::{BeckerSeries, DrivingSpec, HerglotzSpec, RadialProfile, RationalHerglotz, StepTable};
use loewner_core::Complex64;

use crate::CliError;

pub fn real(name: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.trim().parse().map_err(|_| CliError::config(name, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::config(name, format!("`{v}` is not finite")));
    }
    Ok(x)
}

pub fn complex(name: &str, v: &str) -> Result<Complex64, CliError> {
    match v.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(real(name, re)?, real(name, im)?)),
        None => Ok(Complex64::new(real(name, v)?, 0.0)),
    }
}

pub fn real_list(name: &str, v: &str) -> Result<Vec<f64>, CliError> {
    if v.trim().is_empty() {
        return Err(CliError::config(name, "list is empty".into()));
    }
    v.split(',').map(|x| real(name, x)).collect()
}

pub fn complex_list(name: &str, v: &str) -> Result<Vec<Complex64>, CliError> {
    if v.trim().is_empty() {
        return Err(CliError::config(name, "list is empty".into()));
    }
    v.split(';').map(|x| complex(name, x)).collect()
}

fn int(name: &str, v: &str) -> Result<u32, CliError> {
    v.trim().parse().map_err(|_| CliError::config(name, format!("`{v}` is not a non-negative integer")))
}

/// A Herglotz token. `essential:` tokens also fix the driving, returned
/// alongside.
pub fn herglotz(name: &str, v: &str) -> Result<(HerglotzSpec, Option<DrivingSpec>), CliError> {
    let (head, rest) = v.split_once(':').unwrap_or((v, ""));
    let spec = match head {
        "const" => HerglotzSpec::Constant(complex(name, rest)?),
        "koebe" => HerglotzSpec::koebe(real(name, rest)?)?,
        "power" => {
            let (k, n) = rest.split_once(',').ok_or_else(|| CliError::config(name, "power needs k,n".into()))?;
            HerglotzSpec::power(real(name, k)?, int(name, n)?)?
        }
        "cayley" => HerglotzSpec::Catalog(loewner_core::herglotz::CatalogHerglotz::Cayley),
        "essential" => {
            let profile = match rest.split_once(':') {
                Some(("power-ratio", a)) => RadialProfile::PowerRatio { alpha: real(name, a)? },
                None if rest == "tanh-sqrt" => RadialProfile::TanhSqrt,
                None if rest == "sqrt-ratio" => RadialProfile::SqrtRatio,
                _ => return Err(CliError::config(name, format!("unknown radial profile `{rest}`"))),
            };
            let (p, tau) = loewner_core::chains::essential_example_driving(profile)?;
            return Ok((p, Some(tau)));
        }
        "rational" => {
            let (num, den) = rest.split_once('|').ok_or_else(|| CliError::config(name, "rational needs num|den".into()))?;
            HerglotzSpec::Rational(RationalHerglotz::new(complex_list(name, num)?, complex_list(name, den)?)?)
        }
        "series" => HerglotzSpec::Series(BeckerSeries::new(complex_list(name, rest)?)?),
        "file" => {
            let text = std::fs::read_to_string(rest).map_err(|e| CliError::io(PathBuf::from(rest), e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{rest}: {e}")))?
        }
        _ => return Err(CliError::config(name, format!("unknown Herglotz token `{v}`"))),
    };
    Ok((spec, None))
}

pub fn driving(name: &str, v: &str) -> Result<DrivingSpec, CliError> {
    if let Some(rest) = v.strip_prefix("steps:") {
        let mut starts = Vec::new();
        let mut values = Vec::new();
        let mut end = None;
        for item in rest.split(';') {
            let (t, tau) = item.split_once('=').ok_or_else(|| CliError::config(name, format!("`{item}` is not t=value")))?;
            if t.trim() == "end" {
                end = Some(real(name, tau)?);
            } else {
                starts.push(real(name, t)?);
                values.push(complex(name, tau)?);
            }
        }
        return Ok(DrivingSpec::steps(StepTable::new(starts, values, end)?)?);
    }
    Ok(DrivingSpec::constant(complex(name, v)?)?)
}

/// A map accepted by `beltrami`, `classify` and `schwarzian`.
#[derive(Clone, Debug)]
pub enum MapToken {
    Catalog(ClosedFormMap),
    Mobius(Mobius),
    /// `f_0` of the chain of `field.p`.
    Chain,
    Grid(PathBuf),
}

pub fn map(name: &str, v: &str) -> Result<MapToken, CliError> {
    let (head, rest) = v.split_once(':').unwrap_or((v, ""));
    Ok(match head {
        "f1" | "f2" | "fsigma" => MapToken::Catalog(ClosedFormMap::oracle(head, real(name, rest)?, 0)?),
        "fn" => {
            let (k, n) = rest.split_once(',').ok_or_else(|| CliError::config(name, "fn needs k,n".into()))?;
            MapToken::Catalog(ClosedFormMap::oracle("fn", real(name, k)?, int(name, n)?)?)
        }
        "mobius" => {
            let c = complex_list(name, rest)?;
            if c.len() != 4 {
                return Err(CliError::config(name, "mobius needs four coefficients".into()));
            }
            MapToken::Mobius(Mobius::new(c[0], c[1], c[2], c[3])?)
        }
        "chain" => MapToken::Chain,
        "grid" => MapToken::Grid(PathBuf::from(rest)),
        _ => return Err(CliError::config(name, format!("unknown map `{v}`"))),
    })
}
