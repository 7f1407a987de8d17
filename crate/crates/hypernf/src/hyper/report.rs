//! Run reports: one JSON document recording everything a run did.
//!
//! A report echoes the input, lists every generator spent at every stage,
//! records per-grade solve data (case routing, rank, removed and surviving
//! slots), logs each point where the computed answer deviates from the
//! documented survivor tables or rank statements, and embeds the verdict of
//! the built-in replay check.  Reports serialize deterministically: the
//! same input always produces byte-identical JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::cases::{CaseTag, CaseVariant, PartitionClass, SolveMode};
use crate::liealg::{ComplexVF, GElement, Monomial, PRTerm, SystemPR};
use crate::scalars::{FreqScalar, Rational};

/// One graded term: a basis slot label and its exact coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    /// Slot label, e.g. `P1[2,0]` or `R2[0,3]`.
    pub term: String,
    /// Exact rational coefficient, e.g. `-1/2`.
    pub coeff: String,
}

/// One complex-coordinate monomial with its exact coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoRecord {
    /// Exponents `[m1, m2, n1, n2]` of `(z1, z1*, z2, z2*)`.
    pub exps: [u32; 4],
    /// Component index `1..=4`.
    pub component: u8,
    /// Exact coefficient, possibly frequency-dependent, e.g. `(1)/(2i*w1)`.
    pub coeff: String,
}

/// The generator spent at one degree of the eigenvalue stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    /// Total degree of the cleared slice.
    pub degree: u32,
    /// The generator as a list of monomials.
    pub generator: Vec<MonoRecord>,
}

/// Divisibility class of the grades below a grade-`n` solve in the
/// opposite-sign family, with the divisor witnesses when present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRecord {
    /// Class id, e.g. `common-at-n-1` or `non-resonant`.
    pub class: String,
    /// First divisor witness (multiplier against the smaller ratio), if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Second divisor witness for the two-grade classes, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<u32>,
}

/// Everything recorded about one grade-`n` homological solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeRecord {
    /// The grade that was cleared.
    pub grade: u32,
    /// Branch id the coefficients routed to, e.g. `diag-opposite(1,2;3,1)`.
    pub case: String,
    /// Divisibility classification (opposite-sign family only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionRecord>,
    /// Solve order used, e.g. `ascending` or `meet(3)`.
    pub mode: String,
    /// Rank of the grade-`n` homological matrix.
    pub rank: u32,
    /// Slots cleared by the solve (pivot rows), sorted.
    pub removed: Vec<String>,
    /// Slots left in the normal form (unpivoted rows), sorted.
    pub surviving: Vec<String>,
    /// The grade-`(n-1)` generator spent on this grade.
    pub generator: Vec<TermRecord>,
    /// The grade-`n` terms remaining after the solve.
    pub residual: Vec<TermRecord>,
}

/// Everything recorded about one higher-level pass at one grade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    /// The level of the pass (3 and up).
    pub level: u32,
    /// The grade the pass acted on.
    pub grade: u32,
    /// Reachable dimension at the previous level.
    pub base_dim: u32,
    /// Reachable dimension at this level.
    pub image_dim: u32,
    /// Extra dimensions gained (`image_dim - base_dim`).
    pub gain: u32,
    /// The generator tuple spent, ascending by grade; empty when no gain.
    pub generator: Vec<Vec<TermRecord>>,
    /// Slots cleared by this pass, sorted.
    pub removed: Vec<String>,
}

/// One logged deviation between a documented value and the computed one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyRecord {
    /// Grade the deviation was observed at.
    pub grade: u32,
    /// What deviated: `rank`, `survivors`, or `level-gain`.
    pub kind: String,
    /// The documented value.
    pub claimed: String,
    /// The computed, replay-verified value.
    pub actual: String,
}

/// Verdict of the built-in replay check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRecord {
    /// `passed` or `failed`.
    pub status: String,
    /// Slot-by-slot differences when the replay disagrees.
    pub mismatches: Vec<String>,
}

/// Case routing echo: branch id, family, and any forced override.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    /// Branch id, e.g. `diag-same-ratio(2)`.
    pub id: String,
    /// Coarse family: `I`, `II`, or `III`.
    pub variant: String,
    /// Override note when routing was forced, e.g. `irrational-ratio`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub override_applied: Option<String>,
}

/// The complete record of a normalization run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormReport {
    /// The two frequency symbol labels.
    pub frequencies: [String; 2],
    /// Whether the normal form includes the rotation term.
    pub includes_theta: bool,
    /// Requested survivor style: `paper` (documented tables) or `lex`.
    pub style: String,
    /// Grade cap of the run.
    pub grade_cap: u32,
    /// Requested level: `1`, `2`, ... or `inf`.
    pub level: String,
    /// Case routing of the grade-1 coefficients.
    pub case: CaseRecord,
    /// Verbatim echo of the parsed input document.
    pub input: serde_json::Value,
    /// Eigenvalue-stage generators, one record per cleared degree.
    pub first_level: Vec<DegreeRecord>,
    /// Truncation degree of the eigenvalue stage.
    pub residual_degree: u32,
    /// Per-grade homological solve records.
    pub grades: Vec<GradeRecord>,
    /// Higher-level pass records.
    pub levels: Vec<LevelRecord>,
    /// Body of the final normal form (rotation term kept separate).
    pub normal_form: Vec<TermRecord>,
    /// Logged deviations from the documented tables and rank statements.
    pub discrepancies: Vec<DiscrepancyRecord>,
    /// Verdict of the built-in replay check.
    pub verification: VerificationRecord,
}

impl NormalFormReport {
    /// Serializes the report as pretty JSON with a trailing newline.
    /// Field order is fixed, so equal reports serialize byte-identically.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::parse("report", e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a report from JSON.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse("report", e.to_string()))
    }

    /// Checks the structural invariants of every grade record: removed and
    /// surviving slots are disjoint, together span the full grade, and the
    /// removed count equals the recorded rank.
    pub fn check_grade_invariants(&self) -> Result<()> {
        for rec in &self.grades {
            let full: Vec<String> = crate::hyper::levels::basis_of_grade(rec.grade)
                .into_iter()
                .map(|t| t.to_string())
                .collect();
            let mut union: Vec<String> =
                rec.removed.iter().chain(rec.surviving.iter()).cloned().collect();
            union.sort();
            let mut expected = full.clone();
            expected.sort();
            if union != expected {
                return Err(Error::KernelViolation(format!(
                    "grade {}: removed and surviving slots do not partition the grade",
                    rec.grade
                )));
            }
            if rec.removed.len() as u32 != rec.rank {
                return Err(Error::KernelViolation(format!(
                    "grade {}: {} removed slots but rank {}",
                    rec.grade,
                    rec.removed.len(),
                    rec.rank
                )));
            }
        }
        Ok(())
    }
}

/// Renders a graded element as term records in slot order.
pub fn term_records(el: &GElement) -> Vec<TermRecord> {
    el.iter()
        .map(|(term, coeff)| TermRecord { term: term.to_string(), coeff: coeff.to_string() })
        .collect()
}

/// Parses term records back into a graded element.
pub fn element_from_records(records: &[TermRecord]) -> Result<GElement> {
    let mut out = GElement::zero();
    for rec in records {
        let term: PRTerm = rec.term.parse()?;
        let coeff: Rational = rec.coeff.parse()?;
        out.add_term(term, coeff);
    }
    Ok(out)
}

/// Renders a complex-coordinate field as monomial records in slot order.
pub fn mono_records(v: &ComplexVF) -> Vec<MonoRecord> {
    v.iter()
        .map(|(mono, coeff)| MonoRecord {
            exps: mono.exps,
            component: mono.component,
            coeff: coeff.to_string(),
        })
        .collect()
}

/// Parses monomial records back into a complex-coordinate field.
pub fn complex_from_records(records: &[MonoRecord]) -> Result<ComplexVF> {
    let mut out = ComplexVF::zero();
    for rec in records {
        if !(1..=4).contains(&rec.component) {
            return Err(Error::parse(
                "report",
                format!("component {} outside 1..=4", rec.component),
            ));
        }
        let mono = Monomial { exps: rec.exps, component: rec.component };
        let coeff: FreqScalar = rec.coeff.parse()?;
        out.add_term(mono, coeff);
    }
    Ok(out)
}

/// Renders a slot list as sorted strings.
pub fn slot_strings(slots: &[PRTerm]) -> Vec<String> {
    let mut sorted: Vec<PRTerm> = slots.to_vec();
    sorted.sort();
    sorted.into_iter().map(|t| t.to_string()).collect()
}

/// Renders the body of a system as term records.
pub fn body_records(system: &SystemPR) -> Vec<TermRecord> {
    term_records(system.body())
}

/// Human-readable solve-order label.
pub fn mode_string(mode: SolveMode) -> String {
    match mode {
        SolveMode::Asc => "ascending".to_string(),
        SolveMode::Dec => "descending".to_string(),
        SolveMode::Meet(j) => format!("meet({j})"),
        SolveMode::Priority => "priority".to_string(),
        SolveMode::Lex => "lex".to_string(),
    }
}

/// Coarse family label.
pub fn variant_string(variant: CaseVariant) -> String {
    match variant {
        CaseVariant::I => "I",
        CaseVariant::II => "II",
        CaseVariant::III => "III",
    }
    .to_string()
}

/// Builds the case routing echo from a routed tag.
pub fn case_record(tag: &CaseTag) -> CaseRecord {
    CaseRecord {
        id: tag.branch.id(),
        variant: variant_string(tag.variant),
        override_applied: tag.override_applied.clone(),
    }
}

/// Builds the partition echo for an opposite-sign grade.
pub fn partition_record(part: &PartitionClass) -> PartitionRecord {
    PartitionRecord { class: part.class.id().to_string(), m: part.m, m2: part.m2 }
}
