//! Self-verifying certificates.
//!
//! A certificate stores the canonical inputs, their SHA-256 digest, a witness
//! and a transcript of exact claims. Each command provides a `check` that
//! rebuilds the verdict and transcript from inputs and witness alone; the
//! `verify` subcommand reruns only that function and compares.

use crate::error::{CliError, CliResult};
use crate::files::{MarketFile, PairFile, Rat, SequenceFile};
use robust_ftap::rational::format_rational;
use robust_ftap::{parse_rational, Rational};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const FINITE_HORIZON: &str = "finite-horizon certificate";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn parse(s: &str) -> Option<Rel> {
        Some(match s {
            "==" => Rel::Eq,
            "<=" => Rel::Le,
            "<" => Rel::Lt,
            ">=" => Rel::Ge,
            ">" => Rel::Gt,
            _ => return None,
        })
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub claim: String,
    pub lhs: String,
    pub relation: String,
    pub rhs: String,
}

impl Claim {
    /// Re-parses both sides; `None` when the claim is malformed.
    pub fn evaluate(&self) -> Option<bool> {
        let rel = Rel::parse(&self.relation)?;
        let lhs = parse_rational(&self.lhs).ok()?;
        let rhs = parse_rational(&self.rhs).ok()?;
        Some(rel.holds(&lhs, &rhs))
    }
}

#[derive(Debug, Default)]
pub struct Transcript(pub Vec<Claim>);

impl Transcript {
    pub fn claim(&mut self, what: impl Into<String>, lhs: &Rational, rel: Rel, rhs: &Rational) {
        self.0.push(Claim {
            claim: what.into(),
            lhs: format_rational(lhs),
            relation: rel.as_str().to_string(),
            rhs: format_rational(rhs),
        });
    }
}

/// Everything a command reads, in canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<Rat>>,
    pub max_enum: usize,
}

fn missing(field: &str) -> CliError {
    CliError::input(format!("missing required input `{field}`"))
}

impl Inputs {
    pub fn market(&self) -> CliResult<&MarketFile> {
        self.market.as_ref().ok_or_else(|| missing("market"))
    }

    pub fn sequence(&self) -> CliResult<&SequenceFile> {
        self.sequence.as_ref().ok_or_else(|| missing("sequence"))
    }

    pub fn pair(&self) -> CliResult<&PairFile> {
        self.pair.as_ref().ok_or_else(|| missing("pair"))
    }

    pub fn epsilon(&self) -> CliResult<Rational> {
        self.epsilon
            .as_ref()
            .map(|r| r.0.clone())
            .ok_or_else(|| missing("epsilon"))
    }

    pub fn delta(&self) -> CliResult<Rational> {
        self.delta
            .as_ref()
            .map(|r| r.0.clone())
            .ok_or_else(|| missing("delta"))
    }

    pub fn cap(&self) -> robust_ftap::EnumerationCap {
        robust_ftap::EnumerationCap(self.max_enum)
    }
}

pub struct Checked {
    pub verdict: String,
    pub transcript: Vec<Claim>,
}

/// One subcommand: an expensive `compute` and a cheap, pure `check`.
pub trait Procedure {
    const NAME: &'static str;
    const FINITE_HORIZON: bool = false;
    type Witness: Serialize + DeserializeOwned;

    fn compute(inputs: &Inputs) -> CliResult<Self::Witness>;

    /// Rebuilds verdict and transcript; fails on structurally invalid witnesses.
    fn check(inputs: &Inputs, witness: &Self::Witness) -> CliResult<Checked>;

    /// Extra human-readable lines for text output.
    fn notes(_inputs: &Inputs, _witness: &Self::Witness) -> CliResult<Vec<String>> {
        Ok(Vec::new())
    }

    /// A verdict that contradicts a theorem, reported as an internal error.
    fn contradiction(_witness: &Self::Witness) -> Option<String> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    pub inputs: Value,
    pub inputs_digest: String,
    pub verdict: String,
    pub witness: Value,
    pub transcript: Vec<Claim>,
}

pub fn digest(inputs: &Value) -> String {
    hex::encode(Sha256::digest(inputs.to_string().as_bytes()))
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("serialization failed: {e}")))
}

pub struct Emitted {
    pub certificate: Certificate,
    pub notes: Vec<String>,
}

pub fn emit<P: Procedure>(inputs: &Inputs) -> CliResult<Emitted> {
    let witness = P::compute(inputs)?;
    if let Some(msg) = P::contradiction(&witness) {
        return Err(CliError::Internal(msg));
    }
    let checked = P::check(inputs, &witness)?;
    if let Some(bad) = checked
        .transcript
        .iter()
        .find(|c| c.evaluate() != Some(true))
    {
        return Err(CliError::Internal(format!(
            "claim `{}` fails: {} {} {}",
            bad.claim, bad.lhs, bad.relation, bad.rhs
        )));
    }
    let notes = P::notes(inputs, &witness)?;
    let inputs = to_value(inputs)?;
    Ok(Emitted {
        certificate: Certificate {
            command: P::NAME.to_string(),
            scope: P::FINITE_HORIZON.then(|| FINITE_HORIZON.to_string()),
            inputs_digest: digest(&inputs),
            inputs,
            verdict: checked.verdict,
            witness: to_value(&witness)?,
            transcript: checked.transcript,
        },
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub command: String,
    pub accepted: bool,
    pub claims_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

pub fn verify_as<P: Procedure>(cert: &Certificate) -> VerifyReport {
    let reject = |reason: String| VerifyReport {
        command: cert.command.clone(),
        accepted: false,
        claims_checked: 0,
        reason: Some(reason),
    };
    let inputs: Inputs = match serde_json::from_value(cert.inputs.clone()) {
        Ok(i) => i,
        Err(e) => return reject(format!("inputs do not parse: {e}")),
    };
    match to_value(&inputs) {
        Ok(v) if v == cert.inputs => {}
        _ => return reject("inputs are not in canonical form".into()),
    }
    if digest(&cert.inputs) != cert.inputs_digest {
        return reject("inputs digest mismatch".into());
    }
    if cert.scope.as_deref() != P::FINITE_HORIZON.then_some(FINITE_HORIZON) {
        return reject("scope label mismatch".into());
    }
    let witness: P::Witness = match serde_json::from_value(cert.witness.clone()) {
        Ok(w) => w,
        Err(e) => return reject(format!("witness does not parse: {e}")),
    };
    match to_value(&witness) {
        Ok(v) if v == cert.witness => {}
        _ => return reject("witness is not in canonical form".into()),
    }
    let checked = match P::check(&inputs, &witness) {
        Ok(c) => c,
        Err(e) => return reject(format!("witness check failed: {e}")),
    };
    if checked.verdict != cert.verdict {
        return reject(format!("verdict should read {:?}", checked.verdict));
    }
    if checked.transcript.len() != cert.transcript.len() {
        return reject("transcript length mismatch".into());
    }
    for (i, (expected, stored)) in checked.transcript.iter().zip(&cert.transcript).enumerate() {
        if expected != stored {
            return reject(format!(
                "transcript entry {i} ({}) does not match the witness",
                stored.claim
            ));
        }
        if stored.evaluate() != Some(true) {
            return reject(format!(
                "transcript entry {i} fails: {} {} {}",
                stored.lhs, stored.relation, stored.rhs
            ));
        }
    }
    VerifyReport {
        command: cert.command.clone(),
        accepted: true,
        claims_checked: cert.transcript.len(),
        reason: None,
    }
}
