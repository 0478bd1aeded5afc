//! Parsers for the textual set, boundary-data and coefficient arguments.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhcap::capacity::BoundedSet1D;
use rhcap::harmonic::{BoundaryFunction, Regularity};
use rhcap::lusin::PhiSource;
use rhcap::rh::{LambdaBuiltin, UnimodularBV};
use rhcap::Complex64;

fn number(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "pi" => Ok(PI),
        "2pi" => Ok(2.0 * PI),
        _ => t.parse().map_err(|_| anyhow!("bad number {t:?}")),
    }
}

/// Comma-separated numbers.
pub fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(number).collect()
}

/// `interval:a,b[;a,b...]`, `arc:t1,t2[;...]` or `circle:r`.
pub fn parse_set(s: &str) -> Result<BoundedSet1D> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| anyhow!("set spec {s:?} needs a kind prefix"))?;
    let pairs = || -> Result<Vec<(f64, f64)>> {
        rest.split(';')
            .map(|p| match numbers(p)?.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => bail!("expected a pair in {p:?}"),
            })
            .collect()
    };
    Ok(match kind {
        "interval" => BoundedSet1D::intervals(&pairs()?)?,
        "arc" => BoundedSet1D::arcs(&pairs()?)?,
        "circle" => BoundedSet1D::circle(number(rest)?)?,
        _ => bail!("unknown set kind {kind:?}; expected interval, arc or circle"),
    })
}

/// Rows of numeric fields; a first row that does not parse is a header.
fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: Result<Vec<f64>> = rec.iter().map(number).collect();
        match parsed {
            Ok(row) if !row.is_empty() => rows.push(row),
            Ok(_) => {}
            Err(_) if i == 0 => {}
            Err(e) => return Err(e.context(format!("{} line {}", path.display(), i + 1))),
        }
    }
    if rows.is_empty() {
        bail!("{} holds no data", path.display());
    }
    Ok(rows)
}

/// `builtin:cos|sin|step|const:c|noise:seed` or a CSV whose last column
/// holds the samples at `2 pi j / M`.
pub fn parse_boundary(s: &str, m: usize) -> Result<BoundaryFunction> {
    if let Some(name) = s.strip_prefix("builtin:") {
        let (tag, arg) = name.split_once(':').map_or((name, None), |(a, b)| (a, Some(b)));
        return Ok(match (tag, arg) {
            ("cos", None) => BoundaryFunction::from_fn(m, Regularity::Continuous, f64::cos)?,
            ("sin", None) => BoundaryFunction::from_fn(m, Regularity::Continuous, f64::sin)?,
            ("step", None) => BoundaryFunction::from_fn(m, Regularity::Bv, |t| {
                if t == 0.0 || t == PI {
                    0.0
                } else {
                    (t - PI).signum()
                }
            })?,
            ("const", Some(c)) => {
                let c = number(c)?;
                BoundaryFunction::from_fn(m, Regularity::Continuous, |_| c)?
            }
            ("noise", Some(seed)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.trim().parse().context("noise seed")?);
                BoundaryFunction::new((0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect(), Regularity::Measurable)?
            }
            _ => bail!("unknown boundary builtin {name:?}"),
        });
    }
    let rows = read_rows(Path::new(s))?;
    let values: Vec<f64> = rows.iter().map(|r| *r.last().expect("nonempty row")).collect();
    Ok(BoundaryFunction::new(values, Regularity::Measurable)?)
}

/// `builtin:const[:a]|winding[:k]|step`, or a CSV with one column (angles)
/// or two (real and imaginary parts).
pub fn parse_lambda(s: &str, m: usize) -> Result<UnimodularBV> {
    if let Some(name) = s.strip_prefix("builtin:") {
        let builtin: LambdaBuiltin = name.parse()?;
        return Ok(builtin.sample(m)?);
    }
    let rows = read_rows(Path::new(s))?;
    let samples = rows
        .iter()
        .map(|r| match r.as_slice() {
            [a] => Ok(Complex64::from_polar(1.0, *a)),
            [re, im] => Ok(Complex64::new(*re, *im)),
            _ => bail!("lambda rows need one or two columns"),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnimodularBV::new(samples)?)
}

/// Integrand of `lusin run`: `builtin:const1|const:c|sign|noise:seed` or a
/// CSV of cell values.
pub enum LusinPhi {
    Builtin(PhiSource),
    Table(Vec<f64>),
}

pub fn parse_lusin_phi(s: &str) -> Result<LusinPhi> {
    if let Some(name) = s.strip_prefix("builtin:") {
        let source = match name.split_once(':') {
            None if name == "const1" => PhiSource::Constant(1.0),
            None if name == "sign" => PhiSource::Sign,
            Some(("const", c)) => PhiSource::Constant(number(c)?),
            Some(("noise", seed)) => PhiSource::Noise { seed: seed.trim().parse().context("noise seed")? },
            _ => bail!("unknown integrand builtin {name:?}"),
        };
        return Ok(LusinPhi::Builtin(source));
    }
    let rows = read_rows(Path::new(s))?;
    Ok(LusinPhi::Table(rows.iter().map(|r| *r.last().expect("nonempty row")).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_grammar() {
        let s = parse_set("interval:0,1;2,3").unwrap();
        assert_eq!(s.pieces(), &[(0.0, 1.0), (2.0, 3.0)]);
        assert!(parse_set("arc:0,pi").is_ok());
        assert!(parse_set("circle:2").is_ok());
        assert!(parse_set("disk:1").is_err());
        assert!(parse_set("interval:0").is_err());
    }

    #[test]
    fn builtins() {
        let phi = parse_boundary("builtin:cos", 8).unwrap();
        assert_eq!(phi.samples()[0], 1.0);
        assert_eq!(parse_boundary("builtin:step", 8).unwrap().samples()[2], -1.0);
        assert_eq!(parse_boundary("builtin:const:0.5", 8).unwrap().samples()[3], 0.5);
        assert_eq!(
            parse_boundary("builtin:noise:7", 16).unwrap().samples(),
            parse_boundary("builtin:noise:7", 16).unwrap().samples()
        );
        assert!(parse_boundary("builtin:tan", 8).is_err());
        assert_eq!(parse_lambda("builtin:winding", 8).unwrap().len(), 8);
        assert!(matches!(parse_lusin_phi("builtin:sign").unwrap(), LusinPhi::Builtin(PhiSource::Sign)));
    }
}
