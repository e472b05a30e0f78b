//! Parsers for the textual values accepted on the command line and in config files.

use dirac_point::profile::PotentialProfile;
use dirac_point::{AdmissibleLambda, GeneratorA, SpectralPoint};
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

/// A list given either as a comma-separated string or as a JSON array.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ListArg {
    Text(String),
    Numbers(Vec<f64>),
    Items(Vec<String>),
}

impl ListArg {
    pub fn items(&self) -> Vec<String> {
        match self {
            ListArg::Text(s) => s
                .split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect(),
            ListArg::Numbers(v) => v.iter().map(|x| format!("{x:e}")).collect(),
            ListArg::Items(v) => v.clone(),
        }
    }
}

impl std::str::FromStr for ListArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(ListArg::Text(s.to_string()))
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("field `{field}`: {reason}"))
}

/// A real number, also accepting `p/q` and `pi`.
pub fn real(field: &str, text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let (p, q) = (real(field, p)?, real(field, q)?);
        if q == 0.0 {
            return Err(invalid(field, format!("division by zero in `{text}`")));
        }
        return Ok(p / q);
    }
    let value = match t.to_ascii_lowercase().as_str() {
        "pi" => std::f64::consts::PI,
        "-pi" => -std::f64::consts::PI,
        other => other
            .parse::<f64>()
            .map_err(|_| invalid(field, format!("`{text}` is not a number")))?,
    };
    if !value.is_finite() {
        return Err(invalid(field, format!("`{text}` is not finite")));
    }
    Ok(value)
}

/// `x`, `yi`, `i`, `x+yi` or `x-yi`.
pub fn complex(field: &str, text: &str) -> Result<Complex64, CliError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.to_ascii_lowercase().ends_with("pi") {
        return Ok(Complex64::new(real(field, &t)?, 0.0));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(real(field, &t)?, 0.0));
    };
    // split before the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => real(field, other)?,
    };
    Ok(Complex64::new(real(field, re)?, im))
}

/// Spectral point from `re,im` or a complex literal.
pub fn spectral_point(text: &str) -> Result<SpectralPoint, CliError> {
    let z = match text.split_once(',') {
        Some((re, im)) => Complex64::new(real("z", re)?, real("z", im)?),
        None => complex("z", text)?,
    };
    SpectralPoint::new(z).map_err(|e| invalid("z", e))
}

/// `re_a,b,c` (traceless) or `re_a,im_a,b,c`.
pub fn generator(text: &str) -> Result<GeneratorA, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| real("a", p))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [re, b, c] => Ok(GeneratorA::traceless(re, b, c)),
        [re, im, b, c] => Ok(GeneratorA::new(Complex64::new(re, im), b, c)),
        _ => Err(invalid(
            "a",
            format!("expected 3 or 4 comma-separated values, got `{text}`"),
        )),
    }
}

/// `identity`, `diag:<alpha>`, `electrostatic:<eta>` or `phi,alpha,beta,gamma,delta`.
pub fn lambda(text: &str, phi: f64) -> Result<AdmissibleLambda, CliError> {
    let t = text.trim();
    let built = if t == "identity" {
        AdmissibleLambda::new(phi, 1.0, 0.0, 0.0, 1.0)
    } else if let Some(rest) = t.strip_prefix("diag:") {
        let alpha = real("lambda", rest)?;
        if alpha == 0.0 {
            return Err(invalid("lambda", "diag entry must be non-zero"));
        }
        AdmissibleLambda::new(phi, alpha, 0.0, 0.0, 1.0 / alpha)
    } else if let Some(rest) = t.strip_prefix("electrostatic:") {
        let l = dirac_point::electrostatic_lambda(real("lambda", rest)?);
        AdmissibleLambda::new(phi, l.alpha, l.beta, l.gamma, l.delta)
    } else {
        let parts: Vec<f64> = t
            .split(',')
            .map(|p| real("lambda", p))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [phi, alpha, beta, gamma, delta] => {
                AdmissibleLambda::new(phi, alpha, beta, gamma, delta)
            }
            _ => return Err(invalid("lambda", format!("unrecognized matrix `{text}`"))),
        }
    };
    built.map_err(|e| CliError::from_core("lambda", e))
}

/// `indicator`, `gaussian`, `two-triangle` or `table:<path>`.
pub fn profile(
    text: &str,
    center: f64,
    width: f64,
    cutoff: f64,
) -> Result<PotentialProfile, CliError> {
    let t = text.trim();
    let built = match t {
        "indicator" => Ok(PotentialProfile::indicator()),
        "gaussian" => PotentialProfile::truncated_gaussian(center, width, cutoff),
        "two-triangle" => Ok(dirac_point::profile::two_triangle_profile()),
        other => match other.strip_prefix("table:") {
            Some(path) => PotentialProfile::table_from_path(std::path::Path::new(path)),
            None => return Err(invalid("profile", format!("unknown profile `{text}`"))),
        },
    };
    built.map_err(|e| CliError::from_core("profile", e))
}
