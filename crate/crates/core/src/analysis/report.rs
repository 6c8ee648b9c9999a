use serde::Serialize;

/// Conditions within this distance of their threshold are reported as
/// boundary cases instead of holding or failing.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "fails")]
    Fails,
    #[serde(rename = "boundary")]
    Boundary,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Boundary => "boundary",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

/// A named scalar compared against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub satisfied: bool,
    /// Only strict comparisons have a boundary band.
    pub boundary: bool,
}

impl Condition {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let satisfied = match relation {
            Relation::Greater => value > threshold,
            Relation::Less => value < threshold,
            Relation::AtLeast => value >= threshold,
            Relation::AtMost => value <= threshold,
        };
        let strict = matches!(relation, Relation::Greater | Relation::Less);
        Self {
            name: name.into(),
            value,
            relation,
            threshold,
            satisfied,
            boundary: strict && (value - threshold).abs() <= BOUNDARY_TOL,
        }
    }
}

/// Conditions combined by conjunction (`all`) or disjunction (`any`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportPart {
    pub name: String,
    pub combine: &'static str,
    pub conditions: Vec<Condition>,
    pub verdict: Verdict,
}

impl ReportPart {
    fn build(name: impl Into<String>, combine: &'static str, conditions: Vec<Condition>) -> Self {
        let verdict = if conditions.iter().any(|c| c.boundary) {
            Verdict::Boundary
        } else {
            let ok = if combine == "all" {
                conditions.iter().all(|c| c.satisfied)
            } else {
                conditions.iter().any(|c| c.satisfied)
            };
            if ok {
                Verdict::Holds
            } else {
                Verdict::Fails
            }
        };
        Self {
            name: name.into(),
            combine,
            conditions,
            verdict,
        }
    }

    pub fn all(name: impl Into<String>, conditions: Vec<Condition>) -> Self {
        Self::build(name, "all", conditions)
    }

    pub fn any(name: impl Into<String>, conditions: Vec<Condition>) -> Self {
        Self::build(name, "any", conditions)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.conditions.iter().find(|c| c.name == name).map(|c| c.value)
    }
}

/// Outcome of checking a stability result on a concrete environment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub parts: Vec<ReportPart>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    pub fn new(theorem: impl Into<String>, parts: Vec<ReportPart>) -> Self {
        Self {
            theorem: theorem.into(),
            parts,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn part(&self, name: &str) -> Option<&ReportPart> {
        self.parts.iter().find(|p| p.name == name)
    }

    /// Verdict of the first part.
    pub fn verdict(&self) -> Verdict {
        self.parts.first().map(|p| p.verdict).unwrap_or(Verdict::Fails)
    }
}
