//! Loading user-supplied schemes from TOML documents.
//!
//! ```toml
//! name = "mri-ralston2"
//! stages = 2
//! order = 2
//! kind = "mri"            # or "spc"
//! a = [[0, 0], ["2/3", 0]]
//! b = ["1/4", "3/4"]
//! c = [0, "2/3"]
//! # one entry per polynomial degree, lowest first; s×s matrices for "mri",
//! # length-s vectors for "spc"
//! coupling = [ [["2/3", 0], ["-5/12", "3/4"]] ]
//! ```
//!
//! Numbers may be TOML integers or floats, or strings holding a decimal or a
//! `p/q` rational. When every coefficient is exact (integers, rationals, or
//! plain decimals without exponent) the scheme keeps its exact form and is
//! validated symbolically as well.

use std::path::Path;

use num_rational::Rational64;
use serde::Deserialize;

use super::{ratio_to_f64, CouplingScheme, ExactCoefficients, PolynomialMatrix, RkTableau,
    SchemeError, SchemeKind};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Degree {
    Matrix(Vec<Vec<Number>>),
    Vector(Vec<Number>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeDoc {
    name: String,
    stages: usize,
    order: u32,
    kind: String,
    a: Vec<Vec<Number>>,
    b: Vec<Number>,
    c: Vec<Number>,
    coupling: Vec<Degree>,
}

#[derive(Debug, Clone, Copy)]
enum Coefficient {
    Exact(Rational64),
    Float(f64),
}

impl Coefficient {
    fn to_f64(self) -> f64 {
        match self {
            Coefficient::Exact(r) => ratio_to_f64(&r),
            Coefficient::Float(f) => f,
        }
    }
}

fn parse_number(n: &Number) -> Result<Coefficient, SchemeError> {
    match n {
        Number::Int(i) => Ok(Coefficient::Exact(Rational64::from_integer(*i))),
        Number::Float(f) => Ok(Coefficient::Float(*f)),
        Number::Text(s) => parse_text(s.trim()),
    }
}

fn parse_text(s: &str) -> Result<Coefficient, SchemeError> {
    let bad = || SchemeError::Parse(format!("invalid number '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(SchemeError::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(Coefficient::Exact(Rational64::new(p, q)));
    }
    if let Some(r) = exact_decimal(s) {
        return Ok(Coefficient::Exact(r));
    }
    s.parse::<f64>().map(Coefficient::Float).map_err(|_| bad())
}

/// `[-+]digits[.digits]` as an exact rational, when it fits in 64 bits.
fn exact_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i64.checked_pow(u32::try_from(frac.len()).ok()?)?;
    let r = Rational64::new(numer, denom);
    Some(if neg { -r } else { r })
}

fn parse_vec(v: &[Number]) -> Result<Vec<Coefficient>, SchemeError> {
    v.iter().map(parse_number).collect()
}

/// Parses a scheme document.
pub fn parse_scheme(text: &str) -> Result<CouplingScheme, SchemeError> {
    let doc: SchemeDoc = toml::from_str(text).map_err(|e| SchemeError::Parse(e.to_string()))?;
    let kind = match doc.kind.to_ascii_lowercase().as_str() {
        "mri" | "decoupled-mri" => SchemeKind::DecoupledMri,
        "spc" | "step-predictor-corrector" => SchemeKind::StepPredictorCorrector,
        other => return Err(SchemeError::Parse(format!("unknown scheme kind '{other}'"))),
    };
    let s = doc.stages;
    let a = doc
        .a
        .iter()
        .map(|row| parse_vec(row))
        .collect::<Result<Vec<_>, _>>()?;
    let b = parse_vec(&doc.b)?;
    let c = parse_vec(&doc.c)?;
    let cols = match kind {
        SchemeKind::DecoupledMri => s,
        SchemeKind::StepPredictorCorrector => 1,
    };
    let mut coupling = Vec::with_capacity(doc.coupling.len());
    for (k, degree) in doc.coupling.iter().enumerate() {
        let flat = match (kind, degree) {
            (SchemeKind::DecoupledMri, Degree::Matrix(rows)) => {
                if rows.len() != s {
                    return Err(SchemeError::DimensionMismatch {
                        what: "coupling rows",
                        expected: s,
                        found: rows.len(),
                    });
                }
                let mut flat = Vec::with_capacity(s * s);
                for row in rows {
                    flat.extend(parse_vec(row)?);
                }
                flat
            }
            (SchemeKind::StepPredictorCorrector, Degree::Vector(v)) => parse_vec(v)?,
            _ => {
                return Err(SchemeError::Parse(format!(
                    "coupling degree {k}: expected a {} for kind '{kind}'",
                    if kind == SchemeKind::DecoupledMri { "matrix" } else { "vector" }
                )))
            }
        };
        coupling.push(flat);
    }

    let all_exact = a
        .iter()
        .flatten()
        .chain(&b)
        .chain(&c)
        .chain(coupling.iter().flatten())
        .all(|x| matches!(x, Coefficient::Exact(_)));

    if all_exact {
        let ex = |v: &[Coefficient]| -> Vec<Rational64> {
            v.iter()
                .map(|x| match x {
                    Coefficient::Exact(r) => *r,
                    Coefficient::Float(_) => unreachable!(),
                })
                .collect()
        };
        check_lengths(s, &a, &b, &c)?;
        let exact = ExactCoefficients {
            a: a.iter().map(|row| ex(row)).collect(),
            b: ex(&b),
            c: ex(&c),
            coupling: PolynomialMatrix::new(s, cols, coupling.iter().map(|v| ex(v)).collect())?,
        };
        // Explicitness of A is checked on the float copy inside from_exact.
        CouplingScheme::from_exact(doc.name, kind, doc.order, exact)
    } else {
        let fl = |v: &[Coefficient]| v.iter().map(|x| x.to_f64()).collect::<Vec<_>>();
        check_lengths(s, &a, &b, &c)?;
        let tableau = RkTableau::new(
            doc.name.clone(),
            a.iter().map(|row| fl(row)).collect(),
            fl(&b),
            fl(&c),
            doc.order,
        )?;
        let coupling = PolynomialMatrix::new(s, cols, coupling.iter().map(|v| fl(v)).collect())?;
        CouplingScheme::new(doc.name, tableau, kind, coupling)
    }
}

fn check_lengths(
    s: usize,
    a: &[Vec<Coefficient>],
    b: &[Coefficient],
    c: &[Coefficient],
) -> Result<(), SchemeError> {
    for (what, len) in [("tableau rows", a.len()), ("weights", b.len()), ("abscissae", c.len())] {
        if len != s {
            return Err(SchemeError::DimensionMismatch {
                what,
                expected: s,
                found: len,
            });
        }
    }
    Ok(())
}

/// Reads and parses a scheme file.
pub fn load_scheme_file(path: impl AsRef<Path>) -> Result<CouplingScheme, SchemeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SchemeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scheme(&text)
}
