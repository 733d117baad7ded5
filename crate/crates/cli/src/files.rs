//! JSON file formats. Every number is a rational string.

use crate::error::{CliError, CliResult};
use robust_ftap::market::Market;
use robust_ftap::measures::{AmbiguitySet, SampleSpace};
use robust_ftap::rational::format_rational;
use robust_ftap::{parse_rational, EnumerationCap, Rational};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::Path;

/// A rational carried as a string; always re-emitted in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(pub Rational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(Rat)
            .map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for Rat {
    fn from(r: Rational) -> Self {
        Rat(r)
    }
}

impl From<&Rational> for Rat {
    fn from(r: &Rational) -> Self {
        Rat(r.clone())
    }
}

pub fn rats(v: &[Rational]) -> Vec<Rat> {
    v.iter().map(Rat::from).collect()
}

pub fn unrat(v: &[Rat]) -> Vec<Rational> {
    v.iter().map(|r| r.0.clone()).collect()
}

pub fn unrat2(v: &[Vec<Rat>]) -> Vec<Vec<Rational>> {
    v.iter().map(|r| unrat(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub outcomes: Vec<String>,
    pub d: usize,
    #[serde(rename = "S0")]
    pub s0: Vec<Rat>,
    #[serde(rename = "S1")]
    pub s1: Vec<Vec<Rat>>,
    pub ambiguity_vertices: Vec<Vec<Rat>>,
    /// Per-market enumeration cap, overriding the command-line value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_enum: Option<usize>,
}

impl MarketFile {
    pub fn space(&self) -> CliResult<SampleSpace> {
        SampleSpace::new(self.outcomes.iter().cloned())
            .map_err(|e| CliError::input(format!("field `outcomes`: {e}")))
    }

    pub fn to_market(&self, default_cap: EnumerationCap) -> CliResult<Market> {
        let space = self.space()?;
        if self.s0.len() != self.d {
            return Err(CliError::input(format!(
                "field `S0`: expected {} prices, found {}",
                self.d,
                self.s0.len()
            )));
        }
        if self.s1.len() != space.len() {
            return Err(CliError::input(format!(
                "field `S1`: expected one row per outcome ({}), found {}",
                space.len(),
                self.s1.len()
            )));
        }
        if let Some(i) = self.s1.iter().position(|r| r.len() != self.d) {
            return Err(CliError::input(format!(
                "field `S1[{i}]`: expected {} entries",
                self.d
            )));
        }
        let amb = ambiguity(&space, &self.ambiguity_vertices, "ambiguity_vertices")?;
        let cap = self.max_enum.map(EnumerationCap).unwrap_or(default_cap);
        Ok(Market::new(&space, unrat(&self.s0), unrat2(&self.s1), amb)?.with_cap(cap))
    }
}

pub fn ambiguity(
    space: &SampleSpace,
    vertices: &[Vec<Rat>],
    field: &str,
) -> CliResult<AmbiguitySet> {
    if vertices.is_empty() {
        return Err(CliError::input(format!(
            "field `{field}`: at least one vertex is required"
        )));
    }
    for (k, v) in vertices.iter().enumerate() {
        if v.len() != space.len() {
            return Err(CliError::input(format!(
                "field `{field}[{k}]`: expected {} masses, found {}",
                space.len(),
                v.len()
            )));
        }
    }
    AmbiguitySet::from_masses(space, unrat2(vertices))
        .map_err(|e| CliError::input(format!("field `{field}`: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub markets: Vec<MarketFile>,
}

/// A pair of ambiguity sets for the Halmos-Savage commands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub outcomes: Vec<String>,
    pub p_vertices: Vec<Vec<Rat>>,
    pub q_vertices: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_enum: Option<usize>,
}

impl PairFile {
    pub fn sets(&self) -> CliResult<(AmbiguitySet, AmbiguitySet)> {
        let space = SampleSpace::new(self.outcomes.iter().cloned())
            .map_err(|e| CliError::input(format!("field `outcomes`: {e}")))?;
        Ok((
            ambiguity(&space, &self.p_vertices, "p_vertices")?,
            ambiguity(&space, &self.q_vertices, "q_vertices")?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayoffFile {
    Object { payoff: Vec<Rat> },
    Bare(Vec<Rat>),
}

impl PayoffFile {
    pub fn values(self) -> Vec<Rat> {
        match self {
            PayoffFile::Object { payoff } | PayoffFile::Bare(payoff) => payoff,
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Deserializes `text`, naming the offending field and line on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::input(format!("{origin}: field `{path}`: {inner}"))
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(&read_text(path)?, &path.display().to_string())
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    use std::io::Write;
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
