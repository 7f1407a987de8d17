//! Pivot-plan elimination for one grade of the block-bidiagonal system.
//!
//! The matrix of one grade is lower block-bidiagonal, so a full row
//! reduction is never necessary: an ascending sweep pivots each column
//! group against its own row group (consuming the diagonal blocks), a
//! descending sweep pivots each column group against the row group below
//! it (consuming the sub-diagonal blocks), and the two can meet around a
//! deficient column group.  Each branch's [`SolveMode`] picks the sweep;
//! a final catch-all pass pivots whatever rows remain, ordered so that
//! the slots the survivor table wants kept are sacrificed last.
//!
//! The solver returns the generator coordinates, the exact residual, and
//! the complement actually realized (the unpivoted row slots), which the
//! caller compares against the predicted table.

use crate::error::{Error, Result};
use crate::hyper::cases::{style_complement, CaseBranch, SolveMode};
use crate::hyper::matrix::{assemble_a, rank_exact, row_term, Grade1Coeffs, HomMatrix};
use crate::liealg::{GElement, PRTerm, SystemPR};
use crate::scalars::Rational;

/// Ordered pivot preferences for one elimination row.
type Plan = Vec<(usize, Vec<usize>)>;

/// Placed pivots as `(row, col)` pairs, in placement order.
type Pivots = Vec<(usize, usize)>;

/// Result of eliminating one grade.
#[derive(Debug, Clone)]
pub struct GradeOutcome {
    /// Generator coordinates over the column slots.
    pub x: Vec<Rational>,
    /// Rows left without a pivot, ascending.
    pub free_rows: Vec<usize>,
    /// Slot names of the unpivoted rows — the realized complement.
    pub complement: Vec<PRTerm>,
    /// Number of pivots placed (equals the matrix rank).
    pub rank: usize,
    /// The solve mode that produced this outcome.
    pub mode: SolveMode,
}

/// Eliminates `A x = t` following `plan`, then sweeps `pass2` over the
/// remaining rows.  Returns the coordinate vector and the pivot list.
fn plan_solve(
    a: &[Vec<Rational>],
    t: &[Rational],
    plan: &Plan,
    pass2: &[usize],
) -> Result<(Vec<Rational>, Pivots)> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut work: Vec<Vec<Rational>> = a.to_vec();
    let mut tt: Vec<Rational> = t.to_vec();
    let mut pivots: Pivots = Vec::new();
    let mut row_taken = vec![false; rows];
    let mut col_taken = vec![false; cols];

    let reduce_row = |work: &mut Vec<Vec<Rational>>,
                      tt: &mut Vec<Rational>,
                      pivots: &[(usize, usize)],
                      pr: usize| {
        for &(qr, qc) in pivots {
            if work[pr][qc].is_zero() {
                continue;
            }
            let f = work[pr][qc]
                .checked_div(&work[qr][qc])
                .expect("pivot entries are nonzero");
            #[allow(clippy::needless_range_loop)]
            for c in 0..cols {
                let delta = &f * &work[qr][c];
                work[pr][c] = &work[pr][c] - &delta;
            }
            let dt = &f * &tt[qr];
            tt[pr] = &tt[pr] - &dt;
        }
    };

    for (pr, prefs) in plan {
        let pr = *pr;
        if row_taken[pr] {
            continue;
        }
        reduce_row(&mut work, &mut tt, &pivots, pr);
        for &c in prefs {
            if !col_taken[c] && !work[pr][c].is_zero() {
                pivots.push((pr, c));
                row_taken[pr] = true;
                col_taken[c] = true;
                break;
            }
        }
    }

    for &pr in pass2 {
        if row_taken[pr] {
            continue;
        }
        reduce_row(&mut work, &mut tt, &pivots, pr);
        for c in 0..cols {
            if !col_taken[c] && !work[pr][c].is_zero() {
                pivots.push((pr, c));
                row_taken[pr] = true;
                col_taken[c] = true;
                break;
            }
        }
    }

    // Back-substitution.  Each pivot row is reduced against all earlier
    // pivot columns, so walking the pivots in reverse closes the system;
    // free columns stay zero.
    let mut x = vec![Rational::zero(); cols];
    for &(pr, pc) in pivots.iter().rev() {
        let mut acc = tt[pr].clone();
        for c in 0..cols {
            if c != pc && !x[c].is_zero() && !work[pr][c].is_zero() {
                let term = &work[pr][c] * &x[c];
                acc = &acc - &term;
            }
        }
        x[pc] = acc.checked_div(&work[pr][pc])?;
    }

    // Every pivoted row must be satisfied exactly.
    for &(pr, _) in &pivots {
        let mut acc = Rational::zero();
        for c in 0..cols {
            if !a[pr][c].is_zero() && !x[c].is_zero() {
                let term = &a[pr][c] * &x[c];
                acc = &acc + &term;
            }
        }
        if &acc - &t[pr] != Rational::zero() {
            return Err(Error::NonUniqueSolve(format!(
                "pivoted row {pr} not satisfied after back-substitution"
            )));
        }
    }
    Ok((x, pivots))
}

// ---------------------------------------------------------------------------
// Pivot plans
// ---------------------------------------------------------------------------

/// Ascending sweep: pivot column group `i` against row group `i`, letting
/// the `P2` column absorb whichever row in the group goes deficient.
fn asc_plan(n: u32) -> Plan {
    let mut plan = Plan::new();
    for i in 0..n as usize {
        plan.push((4 * i, vec![4 * i, 4 * i + 1]));
        plan.push((4 * i + 1, vec![4 * i + 1]));
        plan.push((4 * i + 2, vec![4 * i + 2, 4 * i + 1]));
        plan.push((4 * i + 3, vec![4 * i + 3, 4 * i + 1]));
    }
    plan
}

/// Descending sweep: pivot column group `i - 1` against row group `i`,
/// letting the `P1` column absorb deficient rows.
fn dec_plan(n: u32) -> Plan {
    let mut plan = Plan::new();
    for i in (1..=n as usize).rev() {
        let j = i - 1;
        plan.push((4 * i, vec![4 * j]));
        plan.push((4 * i + 1, vec![4 * j + 1, 4 * j]));
        plan.push((4 * i + 2, vec![4 * j + 2, 4 * j]));
        plan.push((4 * i + 3, vec![4 * j + 3, 4 * j]));
    }
    plan
}

/// Ascending and descending sweeps meeting at column group `jstar`, which
/// both sweeps leave alone.
fn meet_plan(n: u32, jstar: u32) -> Plan {
    let mut plan = Plan::new();
    for i in 0..jstar as usize {
        plan.push((4 * i, vec![4 * i, 4 * i + 1]));
        plan.push((4 * i + 1, vec![4 * i + 1]));
        plan.push((4 * i + 2, vec![4 * i + 2, 4 * i + 1]));
        plan.push((4 * i + 3, vec![4 * i + 3, 4 * i + 1]));
    }
    let mut i = n as usize;
    while i >= jstar as usize + 2 {
        let j = i - 1;
        plan.push((4 * i, vec![4 * j]));
        plan.push((4 * i + 1, vec![4 * j + 1, 4 * j]));
        plan.push((4 * i + 2, vec![4 * j + 2, 4 * j]));
        plan.push((4 * i + 3, vec![4 * j + 3, 4 * j]));
        i -= 1;
    }
    plan
}

/// All rows ordered so that slots in `keep` are pivoted last (sacrificed
/// last); ties resolve in canonical slot order.
fn row_priority(n: u32, keep: &[PRTerm]) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..4 * (n as usize + 1)).collect();
    rows.sort_by_key(|&r| {
        let t = row_term(n, r);
        (keep.contains(&t), t)
    });
    rows
}

/// All rows in canonical slot order.
fn lex_priority(n: u32) -> Vec<usize> {
    row_priority(n, &[])
}

// ---------------------------------------------------------------------------
// Grade-level driver
// ---------------------------------------------------------------------------

/// Coordinates of the grade-`n` part of `body` over the row slots.
pub fn targets_of(body: &GElement, n: u32) -> Vec<Rational> {
    let mut t = vec![Rational::zero(); 4 * (n as usize + 1)];
    for (term, coeff) in body.iter() {
        if term.grade() == n {
            t[crate::hyper::matrix::slot_index(term) + 4 * term.m as usize] = coeff.clone();
        }
    }
    t
}

/// Reassembles a coordinate vector over the grade-`(n-1)` column slots
/// into an element.
pub fn coords_to_generator(n: u32, x: &[Rational]) -> GElement {
    let mut g = GElement::zero();
    for (c, coeff) in x.iter().enumerate() {
        if !coeff.is_zero() {
            g.add_term(crate::hyper::matrix::col_term(n, c), coeff.clone());
        }
    }
    g
}

/// Eliminates the grade-`n` target `t` for the given branch, following the
/// branch's solve mode (or the canonical order when `lex` is forced).
///
/// The pivot count is checked against the exact matrix rank; a mismatch
/// means the sweep plan failed to realize the full image and is reported
/// as [`Error::NonUniqueSolve`].
pub fn solve_grade_coords(
    n: u32,
    t: &[Rational],
    co: &Grade1Coeffs,
    branch: &CaseBranch,
    force_lex: bool,
) -> Result<GradeOutcome> {
    let hom = assemble_a(n, co)?;
    let a = hom.to_dense();
    let mode = if force_lex {
        SolveMode::Lex
    } else {
        crate::hyper::cases::branch_mode(branch, n)
    };
    let keep = style_complement(branch, co, n).unwrap_or_default();
    let (x, pivots) = match mode {
        SolveMode::Asc => plan_solve(&a, t, &asc_plan(n), &row_priority(n, &keep))?,
        SolveMode::Dec => plan_solve(&a, t, &dec_plan(n), &row_priority(n, &keep))?,
        SolveMode::Meet(j) => plan_solve(&a, t, &meet_plan(n, j), &row_priority(n, &keep))?,
        SolveMode::Priority => plan_solve(&a, t, &Plan::new(), &row_priority(n, &keep))?,
        SolveMode::Lex => plan_solve(&a, t, &Plan::new(), &lex_priority(n))?,
    };

    let rank = rank_exact(&hom);
    if pivots.len() != rank {
        return Err(Error::NonUniqueSolve(format!(
            "grade {n}: placed {} pivots against rank {rank}",
            pivots.len()
        )));
    }

    let mut pivoted = vec![false; a.len()];
    for &(pr, _) in &pivots {
        pivoted[pr] = true;
    }
    let free_rows: Vec<usize> = (0..a.len()).filter(|&r| !pivoted[r]).collect();
    let mut complement: Vec<PRTerm> = free_rows.iter().map(|&r| row_term(n, r)).collect();
    complement.sort();

    Ok(GradeOutcome { x, free_rows, complement, rank, mode })
}

/// Survivor style for a grade solve: keep the documented per-branch
/// tables (the default, selected by the `paper` token on the command
/// line) or fall back to canonical slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComplementStyle {
    /// Honor the documented survivor tables for the routed branch.
    #[default]
    Tabled,
    /// Ignore the tables; pivot rows in canonical slot order.
    Lex,
}

impl ComplementStyle {
    /// The command-line token for this style.
    pub fn token(self) -> &'static str {
        match self {
            ComplementStyle::Tabled => "paper",
            ComplementStyle::Lex => "lex",
        }
    }
}

impl std::str::FromStr for ComplementStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ComplementStyle::Tabled),
            "lex" => Ok(ComplementStyle::Lex),
            other => Err(Error::parse(
                "style",
                format!("expected `paper` or `lex`, found `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for ComplementStyle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Eliminates the grade-`n` part of `system` in the requested style.
///
/// Routes the grade-1 coefficients to their branch (degenerate cubic
/// coefficients are rejected rather than forced) and clears the grade.
pub fn solve_grade(system: &SystemPR, n: u32, style: ComplementStyle) -> Result<GradeOutcome> {
    let co = Grade1Coeffs::from_system(system);
    let tag = crate::hyper::cases::classify_case(&co, false)?;
    let t = targets_of(system.body(), n);
    solve_grade_coords(n, &t, &co, &tag.branch, style == ComplementStyle::Lex)
}

// ---------------------------------------------------------------------------
// Strict block recursions
// ---------------------------------------------------------------------------

/// Solves one 4x4 block exactly; `None` when the block is singular.
fn solve4(block: &[[Rational; 4]; 4], rhs: &[Rational; 4]) -> Option<[Rational; 4]> {
    let mut m: Vec<Vec<Rational>> = (0..4)
        .map(|r| {
            let mut row: Vec<Rational> = block[r].to_vec();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    for c in 0..4 {
        let pivot = (c..4).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, pivot);
        for r in 0..4 {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].checked_div(&m[c][c]).expect("pivot entry is nonzero");
            #[allow(clippy::needless_range_loop)]
            for k in c..5 {
                let delta = &f * &m[c][k];
                m[r][k] = &m[r][k] - &delta;
            }
        }
    }
    let mut x = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
    for (c, slot) in x.iter_mut().enumerate() {
        *slot = m[c][4].checked_div(&m[c][c]).expect("pivot entry is nonzero");
    }
    Some(x)
}

/// Applies a 4x4 block to a column-group slice of `x`.
fn block_times(block: &[[Rational; 4]; 4], x: &[Rational]) -> [Rational; 4] {
    let mut out = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
    for r in 0..4 {
        let mut acc = Rational::zero();
        for c in 0..4 {
            if !block[r][c].is_zero() && !x[c].is_zero() {
                let term = &block[r][c] * &x[c];
                acc = &acc + &term;
            }
        }
        out[r] = acc;
    }
    out
}

/// The strict ascending recursion: each column group is solved against its
/// own row group through the diagonal blocks, feeding the group above.
///
/// Requires every diagonal block invertible; a singular one is reported as
/// [`Error::SingularBlock`].  The top row group is never consumed, so its
/// residual survives.
pub fn asc_solve(hom: &HomMatrix, t: &[Rational]) -> Result<Vec<Rational>> {
    let n = hom.grade() as usize;
    let mut x = vec![Rational::zero(); hom.cols()];
    for i in 0..n {
        let mut rhs = [
            t[4 * i].clone(),
            t[4 * i + 1].clone(),
            t[4 * i + 2].clone(),
            t[4 * i + 3].clone(),
        ];
        if i > 0 {
            let carry = block_times(hom.sub_block(i - 1), &x[4 * (i - 1)..4 * i]);
            for r in 0..4 {
                rhs[r] = &rhs[r] - &carry[r];
            }
        }
        let sol = solve4(hom.diag_block(i), &rhs).ok_or_else(|| Error::SingularBlock {
            group: i,
            role: "diagonal".to_string(),
        })?;
        x[4 * i..4 * (i + 1)].clone_from_slice(&sol);
    }
    Ok(x)
}

/// The strict descending recursion: each column group is solved against
/// the row group above it through the sub-diagonal blocks, seeded at the
/// top.
///
/// Requires every sub-diagonal block invertible; a singular one is
/// reported as [`Error::SingularBlock`].  The bottom row group is never
/// consumed, so its residual survives.
pub fn dec_solve(hom: &HomMatrix, t: &[Rational]) -> Result<Vec<Rational>> {
    let n = hom.grade() as usize;
    let mut x = vec![Rational::zero(); hom.cols()];
    for i in (1..=n).rev() {
        let j = i - 1;
        let mut rhs = [
            t[4 * i].clone(),
            t[4 * i + 1].clone(),
            t[4 * i + 2].clone(),
            t[4 * i + 3].clone(),
        ];
        if i < n {
            let carry = block_times(hom.diag_block(i), &x[4 * i..4 * (i + 1)]);
            for r in 0..4 {
                rhs[r] = &rhs[r] - &carry[r];
            }
        }
        let sol = solve4(hom.sub_block(j), &rhs).ok_or_else(|| Error::SingularBlock {
            group: j,
            role: "sub-diagonal".to_string(),
        })?;
        x[4 * j..4 * i].clone_from_slice(&sol);
    }
    Ok(x)
}

/// The dedicated solver for the opposite-sign family, where deficient
/// grades break both strict recursions: delegates to the branch's meet or
/// priority sweep so the documented survivors are realized.
pub fn opposite_solve(n: u32, t: &[Rational], co: &Grade1Coeffs) -> Result<GradeOutcome> {
    let tag = crate::hyper::cases::classify_case(co, false)?;
    match tag.branch {
        CaseBranch::DiagOpposite { .. } => solve_grade_coords(n, t, co, &tag.branch, false),
        other => Err(Error::UncoveredCase(format!(
            "dedicated opposite-sign solver invoked on branch `{}`",
            other.id()
        ))),
    }
}

/// The residual `t - A x` as an element over the grade-`n` row slots.
pub fn residual_element(
    n: u32,
    t: &[Rational],
    co: &Grade1Coeffs,
    x: &[Rational],
) -> Result<GElement> {
    let hom = assemble_a(n, co)?;
    let a = hom.to_dense();
    let mut out = GElement::zero();
    for r in 0..a.len() {
        let mut acc = t[r].clone();
        for c in 0..a[r].len() {
            if !a[r][c].is_zero() && !x[c].is_zero() {
                let term = &a[r][c] * &x[c];
                acc = &acc - &term;
            }
        }
        if !acc.is_zero() {
            out.add_term(row_term(n, r), acc);
        }
    }
    Ok(out)
}
