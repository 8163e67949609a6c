//! Serialized coloring certificates. A certificate records the multipole,
//! the palette size, the full assignment, and the claimed classification;
//! verification recomputes everything from the assignment and trusts none of
//! the stored flags.

use crate::coloring::{is_proper, poor_edges, rich_edges, Color, EdgeColoring};
use crate::multipole::{ElementId, FormatError, Multipole};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct Certificate {
    pub multipole: Multipole,
    pub k: u8,
    /// `(flat element id, color)` pairs, edges first then semiedges.
    pub assignment: Vec<(usize, u8)>,
    pub poor: Vec<u32>,
    pub rich: Vec<u32>,
    pub proper: bool,
    pub normal: bool,
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("multipole: {0}")]
    Multipole(#[from] FormatError),
    #[error("certificate references its multipole by hash {0}; supply the multipole explicitly")]
    HashOnly(String),
    #[error("missing field {0}")]
    Missing(&'static str),
    #[error("assignment entry for element {0} out of range")]
    BadElement(usize),
    #[error("assignment is not total: element {0} missing")]
    NotTotal(usize),
}

/// A discrepancy between stored claims and recomputed facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyFailure {
    AssignmentInvalid(String),
    ProperMismatch { stored: bool, actual: bool },
    NormalMismatch { stored: bool, actual: bool },
    PoorMismatch,
    RichMismatch,
}

impl std::fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifyFailure::AssignmentInvalid(e) => write!(f, "assignment invalid: {e}"),
            VerifyFailure::ProperMismatch { stored, actual } => {
                write!(f, "proper flag {stored} but recomputed {actual}")
            }
            VerifyFailure::NormalMismatch { stored, actual } => {
                write!(f, "normal flag {stored} but recomputed {actual}")
            }
            VerifyFailure::PoorMismatch => write!(f, "stored poor set differs from recomputed"),
            VerifyFailure::RichMismatch => write!(f, "stored rich set differs from recomputed"),
        }
    }
}

impl Certificate {
    /// Builds a certificate from a coloring, recording the actual facts.
    pub fn new(m: &Multipole, c: &EdgeColoring) -> Certificate {
        let assignment = (0..m.element_count())
            .map(|i| {
                let el = ElementId::from_flat(m, i).expect("in range");
                (i, c.get(m, el).0)
            })
            .collect();
        Certificate {
            multipole: m.clone(),
            k: c.k,
            assignment,
            poor: poor_edges(m, c),
            rich: rich_edges(m, c),
            proper: is_proper(m, c),
            normal: crate::coloring::is_normal(m, c),
        }
    }

    pub fn coloring(&self) -> Result<EdgeColoring, CertificateError> {
        let m = &self.multipole;
        let mut colors = vec![None; m.element_count()];
        for &(i, c) in &self.assignment {
            if i >= m.element_count() {
                return Err(CertificateError::BadElement(i));
            }
            colors[i] = Some(Color(c));
        }
        let colors: Vec<Color> = colors
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or(CertificateError::NotTotal(i)))
            .collect::<Result<_, _>>()?;
        EdgeColoring::new(m, self.k, colors)
            .map_err(|e| CertificateError::Missing(Box::leak(e.to_string().into_boxed_str())))
    }

    /// Recomputes properness, normality and the poor/rich sets from the
    /// assignment; returns every discrepancy with the stored claims.
    pub fn verify(&self) -> Vec<VerifyFailure> {
        let m = &self.multipole;
        let c = match self.coloring() {
            Ok(c) => c,
            Err(e) => return vec![VerifyFailure::AssignmentInvalid(e.to_string())],
        };
        let mut failures = Vec::new();
        let actual_proper = is_proper(m, &c);
        if actual_proper != self.proper {
            failures.push(VerifyFailure::ProperMismatch {
                stored: self.proper,
                actual: actual_proper,
            });
        }
        let actual_normal = crate::coloring::is_normal(m, &c);
        if actual_normal != self.normal {
            failures.push(VerifyFailure::NormalMismatch {
                stored: self.normal,
                actual: actual_normal,
            });
        }
        if poor_edges(m, &c) != self.poor {
            failures.push(VerifyFailure::PoorMismatch);
        }
        if rich_edges(m, &c) != self.rich {
            failures.push(VerifyFailure::RichMismatch);
        }
        failures
    }

    pub fn to_json(&self) -> Value {
        json!({
            "multipole": self.multipole.to_json(),
            "k": self.k,
            "assignment": self.assignment.iter().map(|&(i, c)| json!([i, c])).collect::<Vec<_>>(),
            "poor": self.poor,
            "rich": self.rich,
            "proper": self.proper,
            "normal": self.normal,
        })
    }

    /// Parses a certificate. The `multipole` field is either inline or a
    /// fingerprint string; the latter needs `fallback` to resolve.
    pub fn from_json(value: &Value, fallback: Option<&Multipole>) -> Result<Certificate, CertificateError> {
        let obj = value.as_object().ok_or(CertificateError::Missing("certificate object"))?;
        let mfield = obj.get("multipole").ok_or(CertificateError::Missing("multipole"))?;
        let multipole = if let Some(hash) = mfield.as_str() {
            match fallback {
                Some(m) if format!("{:016x}", m.fingerprint()) == hash => m.clone(),
                Some(_) => return Err(CertificateError::HashOnly(hash.to_string())),
                None => return Err(CertificateError::HashOnly(hash.to_string())),
            }
        } else {
            Multipole::from_json(mfield)?
        };
        let k = obj
            .get("k")
            .and_then(Value::as_u64)
            .ok_or(CertificateError::Missing("k"))? as u8;
        let assignment = obj
            .get("assignment")
            .and_then(Value::as_array)
            .ok_or(CertificateError::Missing("assignment"))?
            .iter()
            .map(|pair| {
                let a = pair.as_array()?;
                Some((a.first()?.as_u64()? as usize, a.get(1)?.as_u64()? as u8))
            })
            .collect::<Option<Vec<_>>>()
            .ok_or(CertificateError::Missing("assignment pairs"))?;
        let ids = |name: &'static str| -> Result<Vec<u32>, CertificateError> {
            obj.get(name)
                .and_then(Value::as_array)
                .ok_or(CertificateError::Missing(name))?
                .iter()
                .map(|v| v.as_u64().map(|x| x as u32).ok_or(CertificateError::Missing(name)))
                .collect()
        };
        Ok(Certificate {
            multipole,
            k,
            assignment,
            poor: ids("poor")?,
            rich: ids("rich")?,
            proper: obj
                .get("proper")
                .and_then(Value::as_bool)
                .ok_or(CertificateError::Missing("proper"))?,
            normal: obj
                .get("normal")
                .and_then(Value::as_bool)
                .ok_or(CertificateError::Missing("normal"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::search::pipelines::petersen_normal_coloring;
    use crate::search::SearchConfig;

    #[test]
    fn round_trip_and_verify() {
        let m = catalog::petersen();
        let c = petersen_normal_coloring(&SearchConfig::default()).expect("unique");
        let cert = Certificate::new(&m, &c);
        assert!(cert.verify().is_empty());
        let v = cert.to_json();
        let back = Certificate::from_json(&v, None).expect("parses");
        assert!(back.verify().is_empty());
        assert_eq!(back.poor, cert.poor);
    }

    #[test]
    fn tampered_certificate_fails() {
        let m = catalog::petersen();
        let c = petersen_normal_coloring(&SearchConfig::default()).expect("unique");
        let mut cert = Certificate::new(&m, &c);
        cert.assignment[0].1 = if cert.assignment[0].1 == 1 { 2 } else { 1 };
        let failures = cert.verify();
        assert!(!failures.is_empty());
    }

    #[test]
    fn hash_reference_requires_fallback() {
        let m = catalog::petersen();
        let c = petersen_normal_coloring(&SearchConfig::default()).expect("unique");
        let cert = Certificate::new(&m, &c);
        let mut v = cert.to_json();
        v["multipole"] = serde_json::Value::String(format!("{:016x}", m.fingerprint()));
        assert!(Certificate::from_json(&v, None).is_err());
        let back = Certificate::from_json(&v, Some(&m)).expect("resolved");
        assert!(back.verify().is_empty());
    }
}
