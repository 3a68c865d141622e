//! Parsers for the density, measure, weight, loss and grid strings.

use std::path::Path;

use riskclaim::{LossFunction, Measure, PriceDensity, WeightFunction};

use crate::error::CliError;

fn bad(what: &str, input: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid {what} `{input}`: {why}"))
}

fn number(what: &str, input: &str, token: &str) -> Result<f64, CliError> {
    let t = token.trim();
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(what, input, format_args!("`{t}` is not a finite number")))
}

/// `<a>:<b>` pairs separated by commas.
fn pairs(what: &str, input: &str, body: &str) -> Result<Vec<(f64, f64)>, CliError> {
    body.split(',')
        .map(|item| {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| bad(what, input, format_args!("expected `<level>:<value>`, got `{item}`")))?;
            Ok((number(what, input, a)?, number(what, input, b)?))
        })
        .collect()
}

fn fixed<const N: usize>(what: &str, input: &str, body: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != N {
        return Err(bad(what, input, format_args!("expected {N} comma-separated numbers")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = number(what, input, p)?;
    }
    Ok(out)
}

/// `uniform:<lo>,<hi>`, `plq:<t0>:<q0>,...[,tail:<rate>]` or
/// `atoms:<file.csv>` with header `value,prob`.
pub fn parse_density(input: &str, base: &Path) -> Result<PriceDensity, CliError> {
    const WHAT: &str = "density";
    let (kind, body) = input.split_once(':').ok_or_else(|| bad(WHAT, input, "missing `<kind>:`"))?;
    let built = match kind {
        "uniform" => {
            let [lo, hi] = fixed(WHAT, input, body)?;
            PriceDensity::uniform(lo, hi)
        }
        "plq" => {
            let (knots, rate) = match body.rsplit_once(",tail:") {
                Some((k, r)) => (k, Some(number(WHAT, input, r)?)),
                None => (body, None),
            };
            let knots = pairs(WHAT, input, knots)?;
            match rate {
                Some(r) => PriceDensity::piecewise_linear_with_tail(&knots, r),
                None => PriceDensity::piecewise_linear(&knots),
            }
        }
        "atoms" => PriceDensity::empirical(&read_atoms(&base.join(body))?),
        other => return Err(bad(WHAT, input, format_args!("unknown kind `{other}`"))),
    };
    built.map_err(|e| bad(WHAT, input, e))
}

fn read_atoms(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let shown = path.display();
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{shown}: {e}")))?;
    let headers = reader.headers().map_err(|e| CliError::Config(format!("{shown}: {e}")))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["value", "prob"] {
        return Err(CliError::Config(format!("{shown}: header must be `value,prob`")));
    }
    let mut atoms = vec![];
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CliError::Config(format!("{shown}: line {line}: {e}")))?;
        let field = |j: usize| -> Result<f64, CliError> {
            row.get(j)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("{shown}: line {line}, column {}: not a number", j + 1)))
        };
        atoms.push((field(0)?, field(1)?));
    }
    Ok(atoms)
}

/// `avar:<lambda>`, `twolevel:<xi>,<low>`, `steps:<t0>:<k0>,...` or
/// `linear:<t0>:<k0>,...` (piecewise-linear through the knots, last at `t = 1`).
pub fn parse_weight(input: &str) -> Result<WeightFunction, CliError> {
    const WHAT: &str = "weight";
    let (kind, body) = input.split_once(':').ok_or_else(|| bad(WHAT, input, "missing `<kind>:`"))?;
    let built = match kind {
        "avar" => WeightFunction::avar(number(WHAT, input, body)?),
        "twolevel" => {
            let [xi, low] = fixed(WHAT, input, body)?;
            WeightFunction::two_level(xi, low)
        }
        "steps" => WeightFunction::steps(&pairs(WHAT, input, body)?),
        "linear" => WeightFunction::linear(&pairs(WHAT, input, body)?),
        other => return Err(bad(WHAT, input, format_args!("unknown kind `{other}`"))),
    };
    built.map_err(|e| bad(WHAT, input, e))
}

/// `exp:<a>` or `pow:<p>`.
pub fn parse_loss(input: &str) -> Result<LossFunction, CliError> {
    const WHAT: &str = "loss";
    let (kind, body) = input.split_once(':').ok_or_else(|| bad(WHAT, input, "missing `<kind>:`"))?;
    let x = number(WHAT, input, body)?;
    let built = match kind {
        "exp" => LossFunction::exponential(x),
        "pow" => LossFunction::power(x),
        other => return Err(bad(WHAT, input, format_args!("unknown kind `{other}`"))),
    };
    built.map_err(|e| bad(WHAT, input, e))
}

/// `avar:<lambda>`, `rho_k:<weight>`, `robust:<loss>,<lambda>`,
/// `shifted:<loss>,<lambda>,<x0>` or `var:<lambda>`.
pub fn parse_measure(input: &str) -> Result<Measure, CliError> {
    const WHAT: &str = "measure";
    let (kind, body) = input.split_once(':').ok_or_else(|| bad(WHAT, input, "missing `<kind>:`"))?;
    let lambda_in = |x: f64, upper_closed: bool| {
        if x > 0.0 && (x < 1.0 || (upper_closed && x == 1.0)) {
            Ok(x)
        } else {
            Err(bad(WHAT, input, format_args!("level {x} outside the allowed range")))
        }
    };
    match kind {
        "avar" => Ok(Measure::Avar { lambda: lambda_in(number(WHAT, input, body)?, true)? }),
        "var" => Ok(Measure::ValueAtRisk { lambda: lambda_in(number(WHAT, input, body)?, false)? }),
        "rho_k" => Ok(Measure::QuantileBased { weight: parse_weight(body)? }),
        "robust" => {
            let (loss, lambda) = body
                .split_once(',')
                .ok_or_else(|| bad(WHAT, input, "expected `robust:<loss>,<lambda>`"))?;
            Ok(Measure::RobustUtility { loss: parse_loss(loss)?, lambda: lambda_in(number(WHAT, input, lambda)?, true)? })
        }
        "shifted" => {
            let parts: Vec<&str> = body.split(',').collect();
            let [loss, lambda, x0] = parts[..] else {
                return Err(bad(WHAT, input, "expected `shifted:<loss>,<lambda>,<x0>`"));
            };
            Ok(Measure::Shifted {
                loss: parse_loss(loss)?,
                lambda: lambda_in(number(WHAT, input, lambda)?, true)?,
                x0: number(WHAT, input, x0)?,
            })
        }
        other => Err(bad(WHAT, input, format_args!("unknown kind `{other}`"))),
    }
}

/// `lo:hi:n`: `n >= 2` evenly spaced budgets including both ends.
pub fn parse_grid(input: &str) -> Result<Vec<f64>, CliError> {
    const WHAT: &str = "grid";
    let parts: Vec<&str> = input.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad(WHAT, input, "expected `<lo>:<hi>:<n>`"));
    };
    let (lo, hi) = (number(WHAT, input, lo)?, number(WHAT, input, hi)?);
    let n: usize = n.trim().parse().map_err(|_| bad(WHAT, input, format_args!("`{n}` is not a count")))?;
    if n < 2 || hi <= lo {
        return Err(bad(WHAT, input, "need n >= 2 and lo < hi"));
    }
    let mut grid = riskclaim::numerics::linspace(lo, hi, n);
    // Pin the ends exactly so degenerate budgets are recognized.
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}
