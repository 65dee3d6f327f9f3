use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::WeightedSetup;
use crate::entropy::{state, State};
use crate::error::{Error, Result};
use crate::models::ModelSpec;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    #[serde(rename = "H1-pass")]
    H1Pass,
    #[serde(rename = "H1-violation")]
    H1Violation,
    #[serde(rename = "H2-pass")]
    H2Pass,
    #[serde(rename = "H2-violation")]
    H2Violation,
    #[serde(rename = "no-contraction-witness")]
    NoContractionWitness,
    #[serde(rename = "weight-range")]
    WeightRange,
    /// Bundle of sub-certificates without a witness of its own.
    #[serde(rename = "summary")]
    Summary,
}

impl CertificateKind {
    pub fn is_violation(self) -> bool {
        matches!(self, Self::H1Violation | Self::H2Violation | Self::NoContractionWitness)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Nothing above the violation threshold was found on the searched set.
    NoViolationFound,
    Violation,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// `a q(u;u_r) − q(u;u_l)` at `states[0]`.
    DSm,
    /// `D_RH` with `states = [u_−, u_+]` and the stored speed.
    DRh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub functional: Functional,
    pub states: Vec<Vec<f64>>,
    pub sigma: Option<f64>,
    pub value: f64,
    /// `φ` at each stored state.
    pub phi: Vec<f64>,
}

impl Witness {
    pub fn d_sm(setup: &WeightedSetup, u: &State) -> Self {
        Self {
            functional: Functional::DSm,
            states: vec![u.as_slice().to_vec()],
            sigma: None,
            value: setup.d_sm(u),
            phi: vec![setup.phi(u)],
        }
    }

    pub fn d_rh(setup: &WeightedSetup, u_minus: &State, u_plus: &State, sigma: f64) -> Self {
        Self {
            functional: Functional::DRh,
            states: vec![u_minus.as_slice().to_vec(), u_plus.as_slice().to_vec()],
            sigma: Some(sigma),
            value: setup.d_rh_raw(u_minus, u_plus, sigma),
            phi: vec![setup.phi(u_minus), setup.phi(u_plus)],
        }
    }

    /// Recomputes the functional at the stored states.
    pub fn evaluate(&self, setup: &WeightedSetup) -> Result<f64> {
        let states: Vec<State> = self.states.iter().map(|s| state(s)).collect();
        for u in &states {
            if u.len() != setup.model.dim() {
                return Err(Error::Invalid("witness state has the wrong dimension".into()));
            }
        }
        match (self.functional, states.as_slice(), self.sigma) {
            (Functional::DSm, [u], _) => Ok(setup.d_sm(u)),
            (Functional::DRh, [m, p], Some(s)) => Ok(setup.d_rh_raw(m, p, s)),
            _ => Err(Error::Invalid("malformed witness".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupRecord {
    pub model: ModelSpec,
    pub u_l: Vec<f64>,
    pub u_r: Vec<f64>,
    pub sigma: f64,
    pub a: f64,
    pub family: Option<usize>,
}

impl SetupRecord {
    pub fn of(s: &WeightedSetup) -> Result<Self> {
        Ok(Self {
            model: ModelSpec::of(s.model())?,
            u_l: s.u_l.as_slice().to_vec(),
            u_r: s.u_r.as_slice().to_vec(),
            sigma: s.sigma,
            a: s.a,
            family: s.family,
        })
    }

    pub fn rebuild(&self) -> Result<WeightedSetup> {
        WeightedSetup::new(self.model.build()?, state(&self.u_l), state(&self.u_r), self.sigma, self.a, self.family)
    }
}

/// Numeric table carried by a certificate (curve profiles, sweeps).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub verdict: Verdict,
    pub setup: Option<SetupRecord>,
    pub witness: Option<Witness>,
    /// Largest functional value met during the search, if any was evaluated.
    pub max_value: Option<f64>,
    pub tolerance: f64,
    pub coverage: BTreeMap<String, serde_json::Value>,
    pub tables: BTreeMap<String, Table>,
    pub notes: Vec<String>,
    pub sub_certificates: Vec<Certificate>,
    pub tool_version: String,
    pub config_hash: Option<String>,
}

impl Certificate {
    pub fn new(kind: CertificateKind, verdict: Verdict, setup: Option<SetupRecord>, tolerance: f64) -> Self {
        Self {
            kind,
            verdict,
            setup,
            witness: None,
            max_value: None,
            tolerance,
            coverage: BTreeMap::new(),
            tables: BTreeMap::new(),
            notes: Vec::new(),
            sub_certificates: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
            config_hash: None,
        }
    }

    pub fn cover(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.coverage.insert(key.to_string(), v);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn is_violation(&self) -> bool {
        self.verdict == Verdict::Violation
    }

    /// Sets the hash on this certificate and all nested ones.
    pub fn set_config_hash(&mut self, hash: &str) {
        self.config_hash = Some(hash.to_string());
        for c in &mut self.sub_certificates {
            c.set_config_hash(hash);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invalid(format!("serialize certificate: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("parse certificate: {e}")))
    }

    /// Re-evaluates every stored witness from scratch and checks it
    /// reproduces the stored value to `1e-10` (relative to `1 + |value|`),
    /// with a strictly positive sign on violation certificates.
    /// Returns the number of witnesses checked.
    pub fn revalidate(&self) -> Result<usize> {
        let mut checked = 0;
        if let (Some(w), Some(rec)) = (&self.witness, &self.setup) {
            let setup = rec.rebuild()?;
            let v = w.evaluate(&setup)?;
            if (v - w.value).abs() > 1e-10 * (1.0 + w.value.abs()) {
                return Err(Error::Invalid(format!("witness value {} recomputes to {v}", w.value)));
            }
            if self.verdict == Verdict::Violation && !(v > 0.0 && v > self.tolerance) {
                return Err(Error::Invalid(format!("violation witness value {v} is not above the tolerance")));
            }
            checked += 1;
        } else if self.verdict == Verdict::Violation && self.kind.is_violation() {
            return Err(Error::Invalid("violation certificate without witness".into()));
        }
        for c in &self.sub_certificates {
            checked += c.revalidate()?;
        }
        Ok(checked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Burgers;
    use std::sync::Arc;

    #[test]
    fn roundtrip_and_revalidate() {
        let s = WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, 3.0, Some(1)).unwrap();
        let mut c = Certificate::new(CertificateKind::H1Violation, Verdict::Violation, Some(s.record().unwrap()), 1e-8);
        c.witness = Some(Witness::d_sm(&s, &s.u_l));
        let text = c.to_json().unwrap();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json().unwrap(), text);
        assert_eq!(back.witness.as_ref().unwrap().value, 1.0);
        assert_eq!(back.revalidate().unwrap(), 1);
        let mut bad = back.clone();
        bad.witness.as_mut().unwrap().value += 1e-6;
        assert!(bad.revalidate().is_err());
    }
}
