use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Snap distance used when comparing integer sample sizes to real cutoffs.
pub const SNAP_TOL: f64 = 1e-12;

/// Which support points a truncated expectation keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truncation {
    /// `k < m`
    Strict,
    /// `k ≤ m`
    Weak,
}

/// Finite-support distribution over sample sizes `k ≥ 1`.
///
/// Serialized as a JSON object with string keys, e.g. `{"1": 0.5, "5": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, f64>", into = "BTreeMap<u32, f64>")]
pub struct SampleSizeDistribution {
    mass: BTreeMap<u32, f64>,
}

impl TryFrom<BTreeMap<u32, f64>> for SampleSizeDistribution {
    type Error = DynamicsError;
    fn try_from(mass: BTreeMap<u32, f64>) -> Result<Self, DynamicsError> {
        Self::from_map(mass)
    }
}

impl From<SampleSizeDistribution> for BTreeMap<u32, f64> {
    fn from(t: SampleSizeDistribution) -> Self {
        t.mass
    }
}

impl SampleSizeDistribution {
    /// Build from `(k, θ(k))` pairs. Repeated sizes have their masses added.
    pub fn new<I: IntoIterator<Item = (u32, f64)>>(pairs: I) -> Result<Self, DynamicsError> {
        let mut mass = BTreeMap::new();
        for (k, w) in pairs {
            *mass.entry(k).or_insert(0.0) += w;
        }
        Self::from_map(mass)
    }

    fn from_map(mass: BTreeMap<u32, f64>) -> Result<Self, DynamicsError> {
        if mass.is_empty() {
            return Err(DynamicsError::EmptySupport);
        }
        let mut total = 0.0;
        for (&k, &w) in &mass {
            if k == 0 {
                return Err(DynamicsError::ZeroSampleSize);
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(DynamicsError::InvalidMass { k, mass: w });
            }
            total += w;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DynamicsError::MassNotNormalized { total });
        }
        Ok(Self { mass })
    }

    /// Every agent samples exactly `k` opponents.
    pub fn degenerate(k: u32) -> Result<Self, DynamicsError> {
        Self::new([(k, 1.0)])
    }

    /// Mass `alpha` on `self`, mass `1 − alpha` on `big_k`.
    pub fn mixture(&self, alpha: f64, big_k: u32) -> Result<Self, DynamicsError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DynamicsError::InvalidMixtureWeight(alpha));
        }
        let pairs = self
            .mass
            .iter()
            .map(|(&k, &w)| (k, alpha * w))
            .chain(std::iter::once((big_k, 1.0 - alpha)));
        Self::new(pairs)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.mass.iter().map(|(&k, &w)| (k, w))
    }

    pub fn mass(&self, k: u32) -> f64 {
        self.mass.get(&k).copied().unwrap_or(0.0)
    }

    pub fn max_size(&self) -> u32 {
        *self.mass.keys().next_back().expect("support is never empty")
    }

    pub fn min_size(&self) -> u32 {
        *self.mass.keys().next().expect("support is never empty")
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    /// `Some(k)` when all mass sits on a single sample size.
    pub fn degenerate_size(&self) -> Option<u32> {
        (self.mass.len() == 1).then(|| self.min_size())
    }

    /// `θ ≡ 1`: every agent copies a single observation.
    pub fn is_unit(&self) -> bool {
        self.degenerate_size() == Some(1)
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(k, w)| k as f64 * w).sum()
    }

    /// `Σ k·θ(k)` over `k < m` (strict) or `k ≤ m` (weak). A cutoff within
    /// `1e−12` of an integer is snapped to it first.
    pub fn truncated_expectation(&self, m: f64, mode: Truncation) -> f64 {
        let snapped = m.round();
        let (cut, inclusive) = if (m - snapped).abs() <= SNAP_TOL {
            (snapped, mode == Truncation::Weak)
        } else {
            (m, false)
        };
        self.iter()
            .filter(|&(k, _)| {
                if inclusive {
                    k as f64 <= cut
                } else {
                    (k as f64) < cut
                }
            })
            .map(|(k, w)| k as f64 * w)
            .sum()
    }
}
