//! The graded normalization engine.
//!
//! Everything past the first (eigenvalue) stage lives here: the exact
//! block matrices of the quadratic stage ([`matrix`]), the coefficient
//! branch tables ([`cases`]), the sweep solver ([`solve`]), the kernel
//! chains of the higher levels ([`levels`]), the serializable run report
//! ([`report`]), and the driver that strings the stages together.

pub mod cases;
pub mod levels;
pub mod matrix;
pub mod report;
pub mod solve;

pub use cases::{
    branch_mode, classify_case, classify_case_with_override, defect, partition_classify,
    predicted_complement, rank_law_claimed, rank_law_exact, style_complement, CaseBranch,
    CaseTag, CaseVariant, PartitionClass, ResonanceClass, SolveMode,
};
pub use levels::{
    basis_of_grade, d_ns, higher_levels_pass, image_dim, kernel_basis, kernel_chains,
    second_level_normalize, GradeStep, KernelChain, LevelStep,
};
pub use matrix::{assemble_a, assemble_a_system, rank_exact, Grade1Coeffs, HomMatrix};
pub use report::{
    DiscrepancyRecord, GradeRecord, LevelRecord, NormalFormReport, TermRecord,
    VerificationRecord,
};
pub use solve::{
    asc_solve, dec_solve, opposite_solve, solve_grade, solve_grade_coords, targets_of,
    ComplementStyle, GradeOutcome,
};

use crate::error::{Error, Result};
use crate::liealg::SystemPR;
use crate::verify::{verify_run_chain, TransformationChain};

/// Requested simplification depth: a fixed level, or every level the
/// grade admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSpec {
    /// Stop after the given level (1 is the eigenvalue stage alone).
    Finite(u32),
    /// At grade `n`, simplify through level `n`.
    Infinite,
}

impl LevelSpec {
    /// The command-line token for this depth.
    pub fn token(&self) -> String {
        match self {
            LevelSpec::Finite(s) => s.to_string(),
            LevelSpec::Infinite => "inf".to_string(),
        }
    }
}

impl std::str::FromStr for LevelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinite" => Ok(LevelSpec::Infinite),
            other => match other.parse::<u32>() {
                Ok(v) if v >= 1 => Ok(LevelSpec::Finite(v)),
                _ => Err(Error::parse(
                    "level",
                    format!("expected a positive integer or `inf`, found `{other}`"),
                )),
            },
        }
    }
}

impl std::fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.token())
    }
}

/// A finished normalization run: the final system, the full report, and
/// the spent generator chain for independent replay.
#[derive(Debug, Clone)]
pub struct NormalizeRun {
    /// The normal form through the grade cap.
    pub system: SystemPR,
    /// The complete run record.
    pub report: NormalFormReport,
    /// Every generator spent, in application order.
    pub chain: TransformationChain,
}

/// Normalizes `system` through grade `grade_cap` at the requested level.
///
/// Routes the grade-1 coefficients to their branch, clears each grade with
/// the quadratic stage, then runs levels 3 and up when asked.  Uncovered
/// coefficient patterns and a fully degenerate cubic part are rejected
/// unless `force` is set, in which case the run proceeds with the
/// canonical (lex) survivor order.  Every deviation between the realized
/// outcome and the documented survivor tables or rank statements is
/// logged in the report, and the whole run is replay-verified before the
/// report is returned.
pub fn s_level_normalize(
    system: &SystemPR,
    grade_cap: u32,
    level: LevelSpec,
    style: ComplementStyle,
    force: bool,
) -> Result<NormalizeRun> {
    let co = Grade1Coeffs::from_system(system);
    let tag = classify_case(&co, force)?;
    if let CaseBranch::Uncovered(pattern) = &tag.branch {
        if !force {
            return Err(Error::UncoveredCase(pattern.id().to_string()));
        }
    }
    let lex = style == ComplementStyle::Lex || matches!(tag.branch, CaseBranch::Uncovered(_));

    let mut discrepancies: Vec<DiscrepancyRecord> = Vec::new();
    let mut grade_records: Vec<GradeRecord> = Vec::new();
    let mut level_records: Vec<LevelRecord> = Vec::new();
    let mut chain = TransformationChain {
        degree_cap: 2 * grade_cap + 1,
        grade_cap,
        ..TransformationChain::default()
    };

    let run_graded = match level {
        LevelSpec::Finite(s) => s >= 2,
        LevelSpec::Infinite => true,
    };
    let level_cap = match level {
        LevelSpec::Finite(s) => s.min(grade_cap.max(2)),
        LevelSpec::Infinite => grade_cap.max(2),
    };

    let mut current = system.map_body(system.body().truncate(grade_cap))?;
    if run_graded {
        let (after, steps) = second_level_normalize(&current, grade_cap, &co, &tag.branch, lex)?;
        for step in &steps {
            let n = step.grade;
            if !lex {
                if let Some(mut claimed) = style_complement(&tag.branch, &co, n) {
                    claimed.sort();
                    if claimed != step.complement {
                        discrepancies.push(DiscrepancyRecord {
                            grade: n,
                            kind: "survivors".to_string(),
                            claimed: report::slot_strings(&claimed).join(", "),
                            actual: report::slot_strings(&step.complement).join(", "),
                        });
                    }
                }
                if let CaseBranch::DiagOpposite { p, q, r, s } = tag.branch {
                    let claimed_rank = rank_law_claimed(p, q, r, s, n);
                    if claimed_rank != step.rank {
                        discrepancies.push(DiscrepancyRecord {
                            grade: n,
                            kind: "rank".to_string(),
                            claimed: claimed_rank.to_string(),
                            actual: step.rank.to_string(),
                        });
                    }
                }
            }
            let partition = match tag.branch {
                CaseBranch::DiagOpposite { p, q, r, s } => {
                    Some(report::partition_record(&partition_classify(n, p, q, r, s)))
                }
                _ => None,
            };
            let surviving = report::slot_strings(&step.complement);
            let removed: Vec<String> = basis_of_grade(n)
                .into_iter()
                .filter(|t| !step.complement.contains(t))
                .map(|t| t.to_string())
                .collect();
            grade_records.push(GradeRecord {
                grade: n,
                case: tag.branch.id(),
                partition,
                mode: report::mode_string(step.mode),
                rank: step.rank as u32,
                removed,
                surviving,
                generator: report::term_records(&step.generator),
                residual: report::term_records(&step.residual),
            });
            chain.graded_steps.push(step.generator.clone());
        }
        current = after;
    }

    if level_cap >= 3 && run_graded {
        let (after, steps) = higher_levels_pass(&current, grade_cap, level_cap)?;
        for step in &steps {
            level_records.push(LevelRecord {
                level: step.level,
                grade: step.grade,
                base_dim: step.base_dim as u32,
                image_dim: step.image_dim as u32,
                gain: (step.image_dim - step.base_dim) as u32,
                generator: step.generator.iter().map(report::term_records).collect(),
                removed: report::slot_strings(&step.removed),
            });
            if !step.generator.is_empty() {
                chain.level_steps.push(step.generator.clone());
            }
        }
        current = after;
    }

    let verdict = verify_run_chain(system, &chain, &current)?;
    let verification = VerificationRecord {
        status: if verdict.matches { "passed" } else { "failed" }.to_string(),
        mismatches: verdict.mismatches,
    };

    let report = NormalFormReport {
        frequencies: [system.omega1.clone(), system.omega2.clone()],
        includes_theta: system.includes_theta,
        style: style.token().to_string(),
        grade_cap,
        level: level.token(),
        case: report::case_record(&tag),
        input: serde_json::Value::Null,
        first_level: Vec::new(),
        residual_degree: 2 * grade_cap + 1,
        grades: grade_records,
        levels: level_records,
        normal_form: report::body_records(&current),
        discrepancies,
        verification,
    };
    report.check_grade_invariants()?;

    Ok(NormalizeRun { system: current, report, chain })
}
