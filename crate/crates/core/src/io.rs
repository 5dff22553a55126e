//! Text formats.
//!
//! Inequalities are stored one JSON object per line:
//!
//! ```text
//! {"scenario":{"parties":2,"settings":2},"coeffs":[2,0,0,0,-1,-1,0,-1,1],"symmetric":"2 -(11) -(21) +(22)"}
//! ```
//!
//! `coeffs` lists `b` in correlation order: index `sum_p i_p (I+1)^(N-1-p)`,
//! so the first party varies slowest and entry 0 is the constant term. The
//! inequality reads `sum_j coeffs[j] <A_j> >= 0`. Integers that fit in 64
//! bits are JSON numbers; larger ones are decimal strings. A record may give
//! only `symmetric`, in which case the coefficients are parsed from it.
//!
//! Cones are `{"dim": d, "rays": [[...], ...]}`, constraint systems are
//! `{"rows": r, "cols": c, "matrix": [[...], ...]}` and run reports are JSON
//! lines with the fields of [`RunReport`].

use std::fmt;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bell::{self, BellError, BellInequality, Scenario};
use crate::cone::{Cone, ConeError};
use crate::constrained::{ConstrainedError, ConstraintSystem};
use crate::linalg::{IntMatrix, IntVector};
use crate::pipeline::{GeneralizationOutput, RunReport};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Bell { line: usize, source: BellError },
    #[error("line {line}: coefficients disagree with the symmetric form")]
    Inconsistent { line: usize },
    #[error("line {line}: neither coeffs nor symmetric given")]
    Empty { line: usize },
    #[error("{what}: expected {expected}, found {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Constrained(#[from] ConstrainedError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An exact integer: a JSON number when it fits in `i64`, a string otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(x) => s.serialize_i64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct JsonIntVisitor;

impl Visitor<'_> for JsonIntVisitor {
    type Value = JsonInt;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a string of decimal digits")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonInt, E> {
        Ok(JsonInt(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonInt, E> {
        Ok(JsonInt(v.into()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonInt, E> {
        v.trim().parse().map(JsonInt).map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(JsonIntVisitor)
    }
}

fn to_json(v: &IntVector) -> Vec<JsonInt> {
    v.iter().cloned().map(JsonInt).collect()
}

fn from_json(v: Vec<JsonInt>) -> IntVector {
    v.into_iter().map(|x| x.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub parties: usize,
    pub settings: usize,
}

/// Where a record came from: the assignments whose runs found it and the
/// position of the class in the output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xi: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub scenario: ScenarioRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<JsonInt>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    /// Reason the record is not part of the result proper, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

impl InequalityRecord {
    /// Full record; the symmetric form is added whenever it exists.
    pub fn from_inequality(b: &BellInequality) -> Self {
        let s = b.scenario();
        Self {
            scenario: ScenarioRecord { parties: s.parties(), settings: s.settings() },
            coeffs: Some(to_json(b.coeffs())),
            symmetric: bell::format_symmetric(b).ok(),
            provenance: None,
            excluded: None,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    fn scenario(&self) -> Result<Scenario, BellError> {
        Scenario::new(self.scenario.parties, self.scenario.settings)
    }

    /// The inequality in primitive form. `line` only labels errors.
    pub fn to_inequality(&self, line: usize) -> Result<BellInequality, IoError> {
        let wrap = |source| IoError::Bell { line, source };
        let s = self.scenario().map_err(wrap)?;
        let parsed = self.symmetric.as_deref().map(|t| bell::parse_symmetric(t, &s)).transpose().map_err(wrap)?;
        let given = match &self.coeffs {
            Some(c) => Some(BellInequality::new(s, from_json(c.clone())).map_err(wrap)?),
            None => None,
        };
        match (given, parsed) {
            (Some(a), Some(b)) if a != b => Err(IoError::Inconsistent { line }),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(IoError::Empty { line }),
        }
    }
}

/// Reads JSON lines, skipping blank lines. Line numbers in errors start at 1.
pub fn read_json_lines<T: for<'de> Deserialize<'de>>(r: impl BufRead) -> Result<Vec<T>, IoError> {
    Ok(numbered_json_lines(r)?.into_iter().map(|(_, x)| x).collect())
}

fn numbered_json_lines<T: for<'de> Deserialize<'de>>(r: impl BufRead) -> Result<Vec<(usize, T)>, IoError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_text = line?;
        if line_text.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line_text).map_err(|source| IoError::Json { line: i + 1, source })?;
        out.push((i + 1, item));
    }
    Ok(out)
}

pub fn write_json_lines<T: Serialize>(mut w: impl Write, items: &[T]) -> Result<(), IoError> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|source| IoError::Json { line: 0, source })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads inequality records and converts them; returns the records as well
/// so that callers can keep their provenance.
pub fn read_inequalities(r: impl BufRead) -> Result<Vec<(InequalityRecord, BellInequality)>, IoError> {
    let records: Vec<(usize, InequalityRecord)> = numbered_json_lines(r)?;
    records
        .into_iter()
        .map(|(line, rec)| {
            let b = rec.to_inequality(line)?;
            Ok((rec, b))
        })
        .collect()
}

pub fn write_inequalities<'a>(
    w: impl Write,
    list: impl IntoIterator<Item = &'a BellInequality>,
) -> Result<(), IoError> {
    let records: Vec<InequalityRecord> = list.into_iter().map(InequalityRecord::from_inequality).collect();
    write_json_lines(w, &records)
}

/// Records of a generalization run: the accepted classes in order, then the
/// classes excluded for a vanishing reduction, marked as such.
pub fn generalization_records(out: &GeneralizationOutput) -> Vec<InequalityRecord> {
    let tagged =
        out.inequalities.iter().map(|g| (g, None)).chain(out.excluded.iter().map(|g| (g, Some("zero reduction"))));
    tagged
        .enumerate()
        .map(|(i, (g, reason))| {
            let provenance =
                Provenance { xi: g.assignments.iter().map(ToString::to_string).collect(), candidate: Some(i) };
            let mut rec = InequalityRecord::from_inequality(&g.representative).with_provenance(provenance);
            rec.excluded = reason.map(str::to_string);
            rec
        })
        .collect()
}

pub fn read_reports(r: impl BufRead) -> Result<Vec<RunReport>, IoError> {
    read_json_lines(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeFile {
    pub dim: usize,
    pub rays: Vec<Vec<JsonInt>>,
}

impl ConeFile {
    pub fn from_cone(c: &Cone) -> Self {
        Self { dim: c.ambient_dim(), rays: c.rays().iter().map(to_json).collect() }
    }

    pub fn to_cone(&self) -> Result<Cone, IoError> {
        if let Some(bad) = self.rays.iter().find(|r| r.len() != self.dim) {
            return Err(IoError::Shape { what: "ray length", expected: self.dim, found: bad.len() });
        }
        Ok(Cone::new(self.dim, self.rays.iter().cloned().map(from_json).collect())?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFile {
    pub rows: usize,
    pub cols: usize,
    pub matrix: Vec<Vec<JsonInt>>,
}

impl ConstraintFile {
    pub fn from_system(cs: &ConstraintSystem) -> Self {
        let (rows, cols) = cs.shape();
        Self { rows, cols, matrix: cs.matrix().rows().iter().map(to_json).collect() }
    }

    pub fn to_system(&self) -> Result<ConstraintSystem, IoError> {
        if self.matrix.len() != self.rows {
            return Err(IoError::Shape { what: "row count", expected: self.rows, found: self.matrix.len() });
        }
        if let Some(bad) = self.matrix.iter().find(|r| r.len() != self.cols) {
            return Err(IoError::Shape { what: "row length", expected: self.cols, found: bad.len() });
        }
        let rows = self.matrix.iter().cloned().map(from_json).collect();
        let g = IntMatrix::new(self.cols, rows).expect("row lengths checked");
        Ok(ConstraintSystem::new(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::catalog;

    #[test]
    fn integers_switch_to_strings_beyond_64_bits() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let v = vec![JsonInt(BigInt::from(-7)), JsonInt(big.clone())];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"[-7,"123456789012345678901234567890"]"#);
        let back: Vec<JsonInt> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<JsonInt>("1.5").is_err());
        assert!(serde_json::from_str::<JsonInt>(r#""12a""#).is_err());
        assert_eq!(serde_json::from_str::<JsonInt>("18446744073709551615").unwrap().0, BigInt::from(u64::MAX));
    }

    #[test]
    fn chsh_record() {
        let mut buf = Vec::new();
        write_inequalities(&mut buf, [&catalog::chsh()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"scenario\":{\"parties\":2,\"settings\":2},\"coeffs\":[2,0,0,0,-1,-1,0,-1,1],\"symmetric\":\"2 -(11) -(21) +(22)\"}\n"
        );
        let back = read_inequalities(text.as_bytes()).unwrap();
        assert_eq!(back[0].1, catalog::chsh());
    }

    #[test]
    fn symmetric_only_records() {
        let text = format!("{{\"scenario\":{{\"parties\":3,\"settings\":3}},\"symmetric\":\"{}\"}}\n\n", catalog::F1);
        let back = read_inequalities(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].1, catalog::f1());
    }

    #[test]
    fn inconsistent_and_malformed_records() {
        let text = r#"{"scenario":{"parties":2,"settings":2},"coeffs":[1,0,0,0,0,0,0,0,0],"symmetric":"2 -(11)"}"#;
        assert!(matches!(read_inequalities(text.as_bytes()), Err(IoError::Inconsistent { line: 1 })));
        let text = "\n{\"scenario\":{\"parties\":2,\"settings\":2},\"coeffs\":[1,2]}";
        assert!(matches!(read_inequalities(text.as_bytes()), Err(IoError::Bell { line: 2, .. })));
        assert!(matches!(read_inequalities("{".as_bytes()), Err(IoError::Json { line: 1, .. })));
        let text = r#"{"scenario":{"parties":2,"settings":2}}"#;
        assert!(matches!(read_inequalities(text.as_bytes()), Err(IoError::Empty { line: 1 })));
    }

    #[test]
    fn cone_and_constraint_files() {
        let c = crate::bell::local_cone(&Scenario::new(2, 1).unwrap());
        let file = ConeFile::from_cone(&c);
        let text = serde_json::to_string(&file).unwrap();
        let back: ConeFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_cone().unwrap(), c);
        let bad = ConeFile { dim: 3, rays: vec![vec![JsonInt(1.into())]] };
        assert!(matches!(bad.to_cone(), Err(IoError::Shape { .. })));

        let cs = ConstraintSystem::from_rows(2, vec![IntVector::from_i64s(&[1, -1])]).unwrap();
        let file = ConstraintFile::from_system(&cs);
        assert_eq!(serde_json::to_string(&file).unwrap(), r#"{"rows":1,"cols":2,"matrix":[[1,-1]]}"#);
        assert_eq!(file.to_system().unwrap().matrix(), cs.matrix());
        let bad = ConstraintFile { rows: 2, cols: 2, matrix: vec![] };
        assert!(matches!(bad.to_system(), Err(IoError::Shape { .. })));
    }
}
