//! Independent replay of a normalization run.
//!
//! The normalizer hands out a transformation chain: the generators it
//! spent, stage by stage.  Verification replays that chain against the
//! original input with nothing but the exponential flow — no solving, no
//! tables — and confirms the claimed normal form term by term.  A second
//! probe recomputes removable-image dimensions directly from brackets,
//! cross-checking the closed-form block matrices.

use crate::error::{Error, Result};
use crate::hyper::levels::{ad_v1_matrix, image_dim};
use crate::hyper::matrix::{assemble_a, Grade1Coeffs};
use crate::hyper::report::{self, NormalFormReport};
use crate::liealg::{exp_ad_pr, ComplexVF, GElement, SystemPR};
use crate::poincare::{exp_ad_complex, to_generator_form};

/// The generators a normalization run spends, in application order.
#[derive(Debug, Clone, Default)]
pub struct TransformationChain {
    /// Truncation degree of the eigenvalue stage (when one ran).
    pub degree_cap: u32,
    /// Truncation grade of the graded stages.
    pub grade_cap: u32,
    /// Eigenvalue-stage generators, ascending degree.
    pub complex_steps: Vec<(u32, ComplexVF)>,
    /// Quadratic-stage generators, ascending grade.
    pub graded_steps: Vec<GElement>,
    /// Higher-level chain generators; each step is applied as the negated
    /// sum of its components.
    pub level_steps: Vec<Vec<GElement>>,
}

/// Outcome of a replay.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    /// True when the replayed field equals the claimed normal form.
    pub matches: bool,
    /// Term-by-term differences, empty on success.
    pub mismatches: Vec<String>,
}

/// Replays the graded part of a chain against a starting system.
pub fn replay_graded(start: &SystemPR, chain: &TransformationChain) -> Result<SystemPR> {
    let mut body = start.body().clone();
    for x in &chain.graded_steps {
        if !x.is_zero() {
            body = exp_ad_pr(x, &body, chain.grade_cap)?;
        }
    }
    for components in &chain.level_steps {
        let total = components.iter().fold(GElement::zero(), |acc, z| &acc + z);
        if !total.is_zero() {
            body = exp_ad_pr(&-&total, &body, chain.grade_cap)?;
        }
    }
    start.map_body(body)
}

/// Replays the eigenvalue stage of a chain against a complex field and
/// converts the result to the generator basis.
pub fn replay_complex(start: &ComplexVF, chain: &TransformationChain) -> Result<SystemPR> {
    let mut v = start.truncate_degree(chain.degree_cap);
    for (_, x) in &chain.complex_steps {
        if !x.is_zero() {
            v = exp_ad_complex(x, &v, chain.degree_cap)?;
        }
    }
    to_generator_form(&v)
}

/// Compares a replayed body against the claimed one, slot by slot.
fn diff_bodies(claimed: &GElement, replayed: &GElement) -> Vec<String> {
    let mut slots: Vec<_> = claimed.support();
    for t in replayed.support() {
        if !slots.contains(&t) {
            slots.push(t);
        }
    }
    slots.sort();
    let mut out = Vec::new();
    for t in slots {
        let want = claimed.coeff(&t);
        let got = replayed.coeff(&t);
        if want != got {
            out.push(format!("{t}: claimed {want}, replay {got}"));
        }
    }
    out
}

/// Replays `chain` from `start` and checks the result against `claimed`.
pub fn verify_run_chain(
    start: &SystemPR,
    chain: &TransformationChain,
    claimed: &SystemPR,
) -> Result<VerifyOutcome> {
    let replayed = replay_graded(start, chain)?;
    let mismatches = diff_bodies(
        &claimed.body().truncate(chain.grade_cap),
        &replayed.body().truncate(chain.grade_cap),
    );
    Ok(VerifyOutcome { matches: mismatches.is_empty(), mismatches })
}

/// Like [`verify_run_chain`], starting from a complex field: the
/// eigenvalue steps replay first, then the graded steps.
pub fn verify_run_complex_chain(
    start: &ComplexVF,
    chain: &TransformationChain,
    claimed: &SystemPR,
) -> Result<VerifyOutcome> {
    let converted = replay_complex(start, chain)?;
    verify_run_chain(&converted, chain, claimed)
}

/// The starting field of a run, as parsed from an input document.
#[derive(Debug, Clone)]
pub enum StartField {
    /// Generator-basis input: the graded stages apply directly.
    Graded(SystemPR),
    /// Complex-coordinate input: the eigenvalue stage applies first.
    Complex(ComplexVF),
}

/// Rebuilds the spent generator chain from a report's own records.
pub fn chain_from_report(report: &NormalFormReport) -> Result<TransformationChain> {
    let mut chain = TransformationChain {
        degree_cap: report.residual_degree,
        grade_cap: report.grade_cap,
        ..TransformationChain::default()
    };
    for rec in &report.first_level {
        chain
            .complex_steps
            .push((rec.degree, report::complex_from_records(&rec.generator)?));
    }
    for rec in &report.grades {
        chain.graded_steps.push(report::element_from_records(&rec.generator)?);
    }
    for rec in &report.levels {
        if rec.generator.is_empty() {
            continue;
        }
        let components: Result<Vec<GElement>> =
            rec.generator.iter().map(|g| report::element_from_records(g)).collect();
        chain.level_steps.push(components?);
    }
    Ok(chain)
}

/// Replays a report against the original input and checks its claimed
/// normal form, using nothing but the generators the report itself
/// records.  Also re-checks the report's structural invariants.
pub fn verify_run(start: &StartField, report: &NormalFormReport) -> Result<VerifyOutcome> {
    report.check_grade_invariants()?;
    let chain = chain_from_report(report)?;
    let body = report::element_from_records(&report.normal_form)?;
    let claimed = SystemPR::new(
        report.frequencies[0].clone(),
        report.frequencies[1].clone(),
        report.includes_theta,
        body,
    )?;
    match start {
        StartField::Graded(sys) => verify_run_chain(sys, &chain, &claimed),
        StartField::Complex(v) => verify_run_complex_chain(v, &chain, &claimed),
    }
}

/// Removable-image dimension at grade `n`, level `s`, computed directly
/// from brackets (no closed-form blocks involved).
pub fn image_dim_brute(body: &GElement, n: u32, s: u32) -> Result<usize> {
    image_dim(body, n, s)
}

/// Confirms that the closed-form grade-`n` matrix is exactly the negated
/// bracket action of the grade-1 body, entry by entry.
pub fn check_block_consistency(co: &Grade1Coeffs, n: u32) -> Result<()> {
    let a = assemble_a(n, co)?.to_dense();
    let ad = ad_v1_matrix(&co.to_body(), n - 1);
    for (r, row) in a.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            let neg = -&ad[r][c];
            if *entry != neg {
                return Err(Error::KernelViolation(format!(
                    "block entry ({r},{c}) disagrees with the bracket action"
                )));
            }
        }
    }
    Ok(())
}
