//! Mini-grammar for density flags: `name[:p1,p2,...]`.

use quantdesign::{Density, DensitySpec};

pub const KNOWN_FAMILIES: &str =
    "uniform, beta:a,b, truncnormal:mu,sigma, truncexp:lambda, pwl:x0,f0,x1,f1,...";

pub fn parse_density(text: &str) -> Result<Density, String> {
    let (name, params) = match text.split_once(':') {
        Some((n, p)) => (n, p),
        None => (text, ""),
    };
    let values: Vec<f64> = if params.is_empty() {
        Vec::new()
    } else {
        params
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad parameter {s:?}: {e}"))
            })
            .collect::<Result<_, String>>()?
    };
    let arity = |n: usize| -> Result<(), String> {
        if values.len() == n {
            Ok(())
        } else {
            Err(format!(
                "{name} takes {n} parameter(s), got {}",
                values.len()
            ))
        }
    };
    let spec = match name.to_ascii_lowercase().as_str() {
        "uniform" => {
            arity(0)?;
            DensitySpec::Uniform
        }
        "beta" => {
            arity(2)?;
            DensitySpec::Beta {
                alpha: values[0],
                beta: values[1],
            }
        }
        "truncnormal" | "truncated_normal" | "tnorm" => {
            arity(2)?;
            DensitySpec::TruncatedNormal {
                mu: values[0],
                sigma: values[1],
            }
        }
        "truncexp" | "truncated_exponential" | "texp" => {
            arity(1)?;
            DensitySpec::TruncatedExponential { lambda: values[0] }
        }
        "pwl" | "user_piecewise_linear" => {
            if values.len() < 4 || !values.len().is_multiple_of(2) {
                return Err(format!(
                    "pwl takes an even number (>= 4) of values x0,f0,x1,f1,..., got {}",
                    values.len()
                ));
            }
            DensitySpec::UserPiecewiseLinear {
                knots: values.chunks(2).map(|c| (c[0], c[1])).collect(),
            }
        }
        other => {
            return Err(format!(
                "unknown density {other:?}; known families: {KNOWN_FAMILIES}"
            ))
        }
    };
    Density::from_spec(&spec).map_err(|e| e.to_string())
}
