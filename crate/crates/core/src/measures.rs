//! Measure theory on a finite sample space.
//!
//! The sigma-algebra is always the full power set, so a measure is a mass
//! vector indexed by the outcome order of its [`SampleSpace`]. Ambiguity sets
//! are convex hulls of finitely many probability measures (their vertices);
//! a set is polar when every vertex, and hence every member, gives it zero
//! mass.

use crate::lp::{LinearProgram, LpStatus, Relation, Sense};
use crate::rational::{dot, sum, Rational};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use std::sync::Arc;

/// Ordered, labeled outcomes. Cheap to clone.
#[derive(Debug, Clone)]
pub struct SampleSpace {
    labels: Arc<[String]>,
}

impl SampleSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidInput(
                "sample space needs at least one outcome".into(),
            ));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "outcome {i} has an empty label"
                )));
            }
            if labels[..i].contains(label) {
                return Err(Error::InvalidInput(format!(
                    "duplicate outcome label {label:?}"
                )));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// Outcomes labeled `w1, w2, ...`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("w{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub(crate) fn expect_same(&self, other: &SampleSpace) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch(
                "objects live on different sample spaces".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn expect_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{what} has {len} entries but the sample space has {} outcomes",
                self.len()
            )));
        }
        Ok(())
    }
}

impl PartialEq for SampleSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for SampleSpace {}

/// A set of outcomes, stored as sorted distinct indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeSet(Vec<usize>);

impl OutcomeSet {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// The members of `base` selected by the bits of `mask`.
    pub fn from_mask(mask: u64, base: &[usize]) -> Self {
        Self::new(
            base.iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &i)| i),
        )
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn is_subset(&self, other: &OutcomeSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn complement(&self, n: usize) -> Self {
        Self((0..n).filter(|&i| !self.contains(i)).collect())
    }

    pub fn labels<'a>(&'a self, space: &'a SampleSpace) -> impl Iterator<Item = &'a str> + 'a {
        self.0.iter().map(move |&i| space.label(i))
    }
}

fn mass_of(mass: &[Rational], set: &OutcomeSet) -> Rational {
    sum(set.indices().iter().map(|&i| &mass[i]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityMeasure {
    space: SampleSpace,
    mass: Vec<Rational>,
}

impl ProbabilityMeasure {
    pub fn new(space: &SampleSpace, mass: Vec<Rational>) -> Result<Self> {
        space.expect_len(mass.len(), "probability vector")?;
        if let Some(i) = mass.iter().position(|m| m.is_negative()) {
            return Err(Error::InvalidMeasure(format!(
                "mass {} at outcome {:?} is negative",
                mass[i],
                space.label(i)
            )));
        }
        let total = sum(&mass);
        if total != Rational::from_integer(1.into()) {
            return Err(Error::InvalidMeasure(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            space: space.clone(),
            mass,
        })
    }

    pub fn dirac(space: &SampleSpace, index: usize) -> Self {
        let mut mass = vec![Rational::zero(); space.len()];
        mass[index] = Rational::from_integer(1.into());
        Self {
            space: space.clone(),
            mass,
        }
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn mass(&self) -> &[Rational] {
        &self.mass
    }

    pub fn support(&self) -> OutcomeSet {
        OutcomeSet::new((0..self.mass.len()).filter(|&i| !self.mass[i].is_zero()))
    }

    pub fn prob(&self, set: &OutcomeSet) -> Rational {
        mass_of(&self.mass, set)
    }

    pub fn expectation(&self, values: &[Rational]) -> Rational {
        dot(&self.mass, values)
    }

    /// `self << other`: every outcome charged by `self` is charged by `other`.
    pub fn is_abs_continuous_wrt(&self, other: &ProbabilityMeasure) -> bool {
        self.mass
            .iter()
            .zip(&other.mass)
            .all(|(a, b)| a.is_zero() || !b.is_zero())
    }

    pub fn to_signed(&self) -> SignedMeasure {
        SignedMeasure {
            space: self.space.clone(),
            mass: self.mass.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedMeasure {
    space: SampleSpace,
    mass: Vec<Rational>,
}

impl SignedMeasure {
    pub fn new(space: &SampleSpace, mass: Vec<Rational>) -> Result<Self> {
        space.expect_len(mass.len(), "signed measure")?;
        Ok(Self {
            space: space.clone(),
            mass,
        })
    }

    pub fn zero(space: &SampleSpace) -> Self {
        Self {
            space: space.clone(),
            mass: vec![Rational::zero(); space.len()],
        }
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn mass(&self) -> &[Rational] {
        &self.mass
    }

    pub fn measure_of(&self, set: &OutcomeSet) -> Rational {
        mass_of(&self.mass, set)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SignedMeasure, c: &Rational) -> Result<SignedMeasure> {
        self.space.expect_same(&other.space)?;
        Ok(SignedMeasure {
            space: self.space.clone(),
            mass: self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn support(&self) -> OutcomeSet {
        OutcomeSet::new((0..self.mass.len()).filter(|&i| !self.mass[i].is_zero()))
    }
}

/// Hahn-Jordan decomposition `mu = plus - minus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HahnJordan {
    pub plus: SignedMeasure,
    pub minus: SignedMeasure,
    /// Positive set of the Hahn decomposition. Zero-mass outcomes belong here.
    pub positive_set: OutcomeSet,
}

impl HahnJordan {
    pub fn negative_set(&self) -> OutcomeSet {
        self.positive_set.complement(self.plus.space.len())
    }
}

pub fn hahn_jordan(mu: &SignedMeasure) -> HahnJordan {
    let zero = Rational::zero();
    let plus = mu.mass.iter().map(|m| m.max(&zero).clone()).collect();
    let minus = mu.mass.iter().map(|m| (-m).max(zero.clone())).collect();
    HahnJordan {
        plus: SignedMeasure {
            space: mu.space.clone(),
            mass: plus,
        },
        minus: SignedMeasure {
            space: mu.space.clone(),
            mass: minus,
        },
        positive_set: OutcomeSet::new((0..mu.mass.len()).filter(|&i| !mu.mass[i].is_negative())),
    }
}

/// Total-variation norm `mu+(Omega+) + mu-(Omega-)`.
pub fn total_variation(mu: &SignedMeasure) -> Rational {
    let hj = hahn_jordan(mu);
    hj.plus.measure_of(&hj.positive_set) + hj.minus.measure_of(&hj.negative_set())
}

/// The convex hull of finitely many probability measures.
///
/// Redundant (non-extreme or repeated) vertices are allowed and kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguitySet {
    space: SampleSpace,
    vertices: Vec<ProbabilityMeasure>,
}

impl AmbiguitySet {
    pub fn new(space: &SampleSpace, vertices: Vec<ProbabilityMeasure>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput(
                "ambiguity set needs at least one vertex".into(),
            ));
        }
        for v in &vertices {
            space.expect_same(&v.space)?;
        }
        Ok(Self {
            space: space.clone(),
            vertices,
        })
    }

    pub fn from_masses(space: &SampleSpace, masses: Vec<Vec<Rational>>) -> Result<Self> {
        let vertices = masses
            .into_iter()
            .enumerate()
            .map(|(k, m)| {
                ProbabilityMeasure::new(space, m).map_err(|e| match e {
                    Error::InvalidMeasure(msg) => {
                        Error::InvalidMeasure(format!("vertex {k}: {msg}"))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, vertices)
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn vertices(&self) -> &[ProbabilityMeasure] {
        &self.vertices
    }

    /// `sum_k weights[k] * vertex_k`; weights must be a probability vector.
    pub fn mixture(&self, weights: &[Rational]) -> Result<ProbabilityMeasure> {
        if weights.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} mixture weights for {} vertices",
                weights.len(),
                self.vertices.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative())
            || sum(weights) != Rational::from_integer(1.into())
        {
            return Err(Error::InvalidMeasure(
                "mixture weights must form a probability vector".into(),
            ));
        }
        let mut mass = vec![Rational::zero(); self.space.len()];
        for (w, v) in weights.iter().zip(&self.vertices) {
            if w.is_zero() {
                continue;
            }
            for (acc, m) in mass.iter_mut().zip(&v.mass) {
                *acc += w * m;
            }
        }
        ProbabilityMeasure::new(&self.space, mass)
    }

    pub fn uniform_mixture(&self) -> ProbabilityMeasure {
        let k = self.vertices.len() as i64;
        let w = vec![crate::rat(1, k); self.vertices.len()];
        self.mixture(&w)
            .expect("uniform weights are a probability vector")
    }

    /// Largest probability any member assigns to `set` (attained at a vertex).
    pub fn max_prob(&self, set: &OutcomeSet) -> Rational {
        self.vertices
            .iter()
            .map(|v| v.prob(set))
            .max()
            .expect("nonempty")
    }

    pub fn min_prob(&self, set: &OutcomeSet) -> Rational {
        self.vertices
            .iter()
            .map(|v| v.prob(set))
            .min()
            .expect("nonempty")
    }

    /// Mixture weights expressing `p` as a member of the hull, if it is one.
    pub fn membership_weights(&self, p: &ProbabilityMeasure) -> Result<Option<Vec<Rational>>> {
        self.space.expect_same(&p.space)?;
        let k = self.vertices.len();
        let mut lp = LinearProgram::new(Sense::Minimize, vec![Rational::zero(); k]);
        for i in 0..self.space.len() {
            let row = self.vertices.iter().map(|v| v.mass[i].clone()).collect();
            lp.add_constraint(row, Relation::Eq, p.mass[i].clone());
        }
        lp.add_constraint(
            vec![Rational::from_integer(1.into()); k],
            Relation::Eq,
            Rational::from_integer(1.into()),
        );
        let sol = lp.solve()?;
        Ok(match sol.status {
            LpStatus::Optimal => Some(sol.primal),
            _ => None,
        })
    }
}

/// Union of the vertex supports; its complement is the largest polar set.
pub fn quasi_sure_support(p: &AmbiguitySet) -> OutcomeSet {
    OutcomeSet::new(p.vertices.iter().flat_map(|v| v.support().0))
}

/// Whether `q` is absolutely continuous with respect to some member of `p`.
///
/// When it holds, the uniform mixture of the vertices is such a member.
pub fn dominated_by(q: &ProbabilityMeasure, p: &AmbiguitySet) -> Result<bool> {
    q.space.expect_same(&p.space)?;
    Ok(q.support().is_subset(&quasi_sure_support(p)))
}

/// A function on the outcomes, compared modulo the polar sets of an
/// ambiguity set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedFunction {
    space: SampleSpace,
    values: Vec<Rational>,
}

impl BoundedFunction {
    pub fn new(space: &SampleSpace, values: Vec<Rational>) -> Result<Self> {
        space.expect_len(values.len(), "function")?;
        Ok(Self {
            space: space.clone(),
            values,
        })
    }

    pub fn constant(space: &SampleSpace, c: Rational) -> Self {
        Self {
            space: space.clone(),
            values: vec![c; space.len()],
        }
    }

    pub fn indicator(space: &SampleSpace, set: &OutcomeSet) -> Self {
        let values = (0..space.len())
            .map(|i| Rational::from_integer(i64::from(set.contains(i)).into()))
            .collect();
        Self {
            space: space.clone(),
            values,
        }
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Equality in the quotient by functions vanishing quasi-surely.
    pub fn qs_eq(&self, other: &BoundedFunction, p: &AmbiguitySet) -> Result<bool> {
        self.space.expect_same(&other.space)?;
        self.space.expect_same(&p.space)?;
        Ok(quasi_sure_support(p)
            .indices()
            .iter()
            .all(|&i| self.values[i] == other.values[i]))
    }
}

/// `max |h|` over the quasi-sure support.
pub fn qs_sup_norm(h: &BoundedFunction, p: &AmbiguitySet) -> Result<Rational> {
    h.space.expect_same(&p.space)?;
    Ok(quasi_sure_support(p)
        .indices()
        .iter()
        .map(|&i| h.values[i].abs())
        .max()
        .unwrap_or_else(Rational::zero))
}
