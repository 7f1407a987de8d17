//! Higher-level removable directions: kernel chains and image growth.
//!
//! After the quadratic-generator stage has cleared everything the bracket
//! with the grade-1 body can reach, a level-`s` transformation spends a
//! chain of `s - 1` generator components `(Z_1, ..., Z_{s-1})` whose
//! mutual brackets with the lower body grades cancel below the target
//! grade.  The surviving freedom is a kernel chain; bracketing it against
//! the body's higher grades may enlarge the removable image at the target
//! grade.  This module computes those chains, the per-level image, and
//! drives the full multi-level normalization pass.

use crate::error::{Error, Result};
use crate::hyper::cases::{CaseBranch, SolveMode};
use crate::hyper::matrix::{nullspace_dense, rank_dense, slot_index, slot_term, Grade1Coeffs};
use crate::hyper::solve::{coords_to_generator, residual_element, solve_grade_coords, targets_of};
use crate::liealg::{bracket_pr, exp_ad_pr, GElement, PRTerm, SystemPR};
use crate::scalars::Rational;

/// Canonical basis of the grade-`g` slice: slot-major within ascending
/// first exponent, matching the row layout of the grade-`(g+1)` matrix.
pub fn basis_of_grade(g: u32) -> Vec<PRTerm> {
    let mut out = Vec::with_capacity(4 * (g as usize + 1));
    for j in 0..=g {
        for idx in 0..4 {
            out.push(slot_term(idx, j, g - j));
        }
    }
    out
}

/// Coordinates of the grade-`g` part of `e` over [`basis_of_grade`].
pub fn element_coords(e: &GElement, g: u32) -> Vec<Rational> {
    targets_of(e, g)
}

/// Rebuilds an element from coordinates over [`basis_of_grade`].
pub fn coords_to_element(coords: &[Rational], g: u32) -> GElement {
    let mut out = GElement::zero();
    for (i, c) in coords.iter().enumerate() {
        if !c.is_zero() {
            out.add_term(slot_term(i % 4, (i / 4) as u32, g - (i / 4) as u32), c.clone());
        }
    }
    out
}

/// Matrix of `X -> [X, body_1]` from the grade-`g` slice into grade
/// `g + 1`, as dense columns over the canonical bases.
pub fn ad_v1_matrix(body: &GElement, g: u32) -> Vec<Vec<Rational>> {
    let v1 = body.grade_part(1);
    let rows = 4 * (g as usize + 2);
    let mut m = vec![vec![Rational::zero(); 4 * (g as usize + 1)]; rows];
    for (c, x) in basis_of_grade(g).iter().enumerate() {
        let w = bracket_pr(&GElement::generator(*x), &v1);
        for (term, coeff) in w.iter() {
            m[slot_index(term) + 4 * term.m as usize][c] = coeff.clone();
        }
    }
    m
}

/// A generator chain `(Z_1, ..., Z_{t-1})` with `Z_i` of grade
/// `g - t + i`, whose brackets against the body cancel at every grade up
/// to `g`.
pub type KernelChain = Vec<GElement>;

/// The grade-`g` obstruction of a chain prefix: the sum of
/// `[Z_i, body_{t-i}]` over the chain, which the next component must
/// cancel against `[., body_1]`.
fn chain_obstruction(body: &GElement, chain: &[GElement], t: u32) -> GElement {
    let mut w = GElement::zero();
    for (idx, z) in chain.iter().enumerate() {
        let i = idx as u32 + 1;
        let part = body.grade_part(t - i);
        if !part.is_zero() && !z.is_zero() {
            w = &w + &bracket_pr(z, &part);
        }
    }
    w
}

/// All kernel chains of length `t - 1` topping out at grade `g - 1`.
///
/// For `t = 2` these are the single elements killed by the grade-1 body;
/// deeper chains extend every shorter one by a grade-`(g-1)` component
/// chosen so the accumulated obstruction at grade `g` vanishes.
pub fn kernel_chains(body: &GElement, g: u32, t: u32) -> Result<Vec<KernelChain>> {
    if t < 2 || g < t {
        return Err(Error::GradeTooSmall { got: g, min: t });
    }
    if t == 2 {
        let m = ad_v1_matrix(body, g - 1);
        return Ok(nullspace_dense(&m)
            .into_iter()
            .map(|v| vec![coords_to_element(&v, g - 1)])
            .collect());
    }
    let lower = kernel_chains(body, g - 1, t - 1)?;
    let ad = ad_v1_matrix(body, g - 1);
    let rows = 4 * (g as usize + 1);
    let n_lower = lower.len();
    let n_free = 4 * g as usize;
    let mut m = vec![vec![Rational::zero(); n_lower + n_free]; rows];
    for (k, chain) in lower.iter().enumerate() {
        let w = chain_obstruction(body, chain, t);
        for (term, coeff) in w.iter() {
            if term.grade() == g {
                m[slot_index(term) + 4 * term.m as usize][k] = coeff.clone();
            }
        }
    }
    for r in 0..rows {
        for c in 0..n_free {
            m[r][n_lower + c] = ad[r][c].clone();
        }
    }
    let mut out = Vec::new();
    for v in nullspace_dense(&m) {
        let mut chain: Vec<GElement> = vec![GElement::zero(); t as usize - 1];
        for (k, lower_chain) in lower.iter().enumerate() {
            if v[k].is_zero() {
                continue;
            }
            for (i, z) in lower_chain.iter().enumerate() {
                chain[i] = &chain[i] + &z.scale(&v[k]);
            }
        }
        chain[t as usize - 2] = coords_to_element(&v[n_lower..], g - 1);
        out.push(chain);
    }
    Ok(out)
}

/// Checks the defining cancellations of a chain, naming the first grade
/// where they fail.
pub fn check_kernel_chain(body: &GElement, chain: &[GElement], g: u32) -> Result<()> {
    let t = chain.len() as u32 + 1;
    for u in 2..=t {
        let w = chain_obstruction(body, &chain[..u as usize - 1], u);
        let at = g - t + u;
        if !w.grade_part(at).is_zero() {
            return Err(Error::KernelViolation(format!(
                "chain obstruction survives at grade {at}"
            )));
        }
    }
    Ok(())
}

/// Basis of the level-`s` generator freedom for clearing grade `n` of
/// `system`.
///
/// For `s = 1` every grade-`n` direction is free (the eigenvalue stage
/// constrains nothing within a resonant grade), so the basis is the full
/// slice as one-component chains.  For `s >= 2` the freedom is the kernel
/// chains of length `s - 1` topping out at grade `n - 1`.
pub fn kernel_basis(system: &SystemPR, n: u32, s: u32) -> Result<Vec<KernelChain>> {
    if s == 0 {
        return Err(Error::GradeTooSmall { got: 0, min: 1 });
    }
    if s == 1 {
        return Ok(basis_of_grade(n)
            .into_iter()
            .map(|t| vec![GElement::generator(t)])
            .collect());
    }
    kernel_chains(system.body(), n, s)
}

/// The level-`s` homological operator at grade `n`: checks that the tuple
/// is a genuine kernel chain (its obstructions cancel below grade `n`,
/// else [`Error::KernelViolation`]) and returns its grade-`n` obstruction.
///
/// The tuple may carry `s - 1` or `s` components, graded ascending and
/// ending at grade `n - 1` or `n`; a grade-`n` component never contributes
/// because its partner in the sum is the central rotation term.
pub fn d_ns(tuple: &[GElement], system: &SystemPR, n: u32, s: u32) -> Result<GElement> {
    if s < 2 || n < s {
        return Err(Error::GradeTooSmall { got: n, min: s });
    }
    let len = tuple.len() as u32;
    if len != s - 1 && len != s {
        return Err(Error::KernelViolation(format!(
            "level-{s} tuple must carry {} or {s} components, found {len}",
            s - 1
        )));
    }
    for (idx, z) in tuple.iter().enumerate() {
        let expected = n - s + 1 + idx as u32;
        if let Some(g) = z.min_grade() {
            if g != expected || z.max_grade() != Some(expected) {
                return Err(Error::KernelViolation(format!(
                    "tuple component {} must live at grade {expected}",
                    idx + 1
                )));
            }
        }
    }
    let chain = &tuple[..s as usize - 1];
    check_kernel_chain(system.body(), chain, n)?;
    Ok(chain_obstruction(system.body(), chain, s).grade_part(n))
}

/// Dense matrix whose columns span the level-`s` removable directions at
/// grade `n`: the bracket image of the grade-`(n-1)` slice, extended by
/// the obstruction columns of every level-`(s-1)` kernel chain.
pub fn image_matrix_level(body: &GElement, n: u32, s: u32) -> Result<Vec<Vec<Rational>>> {
    if s < 2 || n < s {
        return Err(Error::GradeTooSmall { got: n, min: s });
    }
    let mut m = ad_v1_matrix(body, n - 1);
    if s >= 3 {
        let rows = m.len();
        for chain in kernel_chains(body, n - 1, s - 1)? {
            let w = chain_obstruction(body, &chain, s);
            let mut col = vec![Rational::zero(); rows];
            for (term, coeff) in w.iter() {
                if term.grade() == n {
                    col[slot_index(term) + 4 * term.m as usize] = coeff.clone();
                }
            }
            for (r, entry) in col.into_iter().enumerate() {
                m[r].push(entry);
            }
        }
    }
    Ok(m)
}

/// Dimension of the level-`s` removable space at grade `n`.
pub fn image_dim(body: &GElement, n: u32, s: u32) -> Result<usize> {
    Ok(rank_dense(&image_matrix_level(body, n, s)?))
}

// ---------------------------------------------------------------------------
// Multi-level driver
// ---------------------------------------------------------------------------

/// One quadratic-stage (level-2) grade step.
#[derive(Debug, Clone)]
pub struct GradeStep {
    pub grade: u32,
    pub mode: SolveMode,
    pub rank: usize,
    /// Slots the sweep left without a pivot.
    pub complement: Vec<PRTerm>,
    pub generator: GElement,
    /// The grade part that survives the step.
    pub residual: GElement,
}

/// One level-`s` step at one grade.
#[derive(Debug, Clone)]
pub struct LevelStep {
    pub level: u32,
    pub grade: u32,
    /// Removable dimension at this level.
    pub image_dim: usize,
    /// Removable dimension one level down.
    pub base_dim: usize,
    /// Chain generator when the level gains directions; one element per
    /// chain component, lowest grade first.
    pub generator: Vec<GElement>,
    /// Slots cleared by this level beyond the previous one.
    pub removed: Vec<PRTerm>,
}

/// Runs the quadratic stage grade by grade: solve, push the body through
/// the generator flow, and check the realized residual.
pub fn second_level_normalize(
    sys: &SystemPR,
    cap: u32,
    co: &Grade1Coeffs,
    branch: &CaseBranch,
    force_lex: bool,
) -> Result<(SystemPR, Vec<GradeStep>)> {
    let mut body = sys.body().clone();
    let mut steps = Vec::new();
    for n in 2..=cap {
        let t = targets_of(&body, n);
        let outcome = solve_grade_coords(n, &t, co, branch, force_lex)?;
        let generator = coords_to_generator(n, &outcome.x);
        let residual = residual_element(n, &t, co, &outcome.x)?;
        if !generator.is_zero() {
            body = exp_ad_pr(&generator, &body, cap)?;
        }
        if body.grade_part(n) != residual {
            return Err(Error::NonUniqueSolve(format!(
                "grade {n}: flow disagrees with the eliminated residual"
            )));
        }
        steps.push(GradeStep {
            grade: n,
            mode: outcome.mode,
            rank: outcome.rank,
            complement: outcome.complement,
            generator,
            residual,
        });
    }
    Ok((sys.map_body(body)?, steps))
}

/// Runs levels `3..=level_cap` over grades `s..=cap`, extending the
/// quadratic stage.  Levels that gain nothing are recorded with an empty
/// generator; levels that do gain solve for a chain, push the body
/// through the summed components (negated, so the realized change is a
/// subtraction), and record the newly cleared slots.
pub fn higher_levels_pass(
    sys: &SystemPR,
    cap: u32,
    level_cap: u32,
) -> Result<(SystemPR, Vec<LevelStep>)> {
    let mut body = sys.body().clone();
    let mut steps = Vec::new();
    for s in 3..=level_cap {
        for n in s..=cap {
            let base_dim = image_dim(&body, n, s - 1)?;
            let m = image_matrix_level(&body, n, s)?;
            let dim = rank_dense(&m);
            let mut step = LevelStep {
                level: s,
                grade: n,
                image_dim: dim,
                base_dim,
                generator: Vec::new(),
                removed: Vec::new(),
            };
            if dim > base_dim {
                let before = body.grade_part(n);
                let t = targets_of(&body, n);
                let (y, residual) = eliminate_columns(&m, &t);
                let chain = chain_from_solution(&body, n, s, &y)?;
                let total: GElement =
                    chain.iter().fold(GElement::zero(), |acc, z| &acc + z);
                if !total.is_zero() {
                    body = exp_ad_pr(&-&total, &body, cap)?;
                }
                let after = coords_to_element(&residual, n);
                if body.grade_part(n) != after {
                    return Err(Error::KernelViolation(format!(
                        "level {s} grade {n}: flow disagrees with the eliminated residual"
                    )));
                }
                step.generator = chain;
                step.removed = before
                    .support()
                    .into_iter()
                    .filter(|slot| after.coeff(slot).is_zero())
                    .collect();
            }
            steps.push(step);
        }
    }
    Ok((sys.map_body(body)?, steps))
}

/// Eliminates `t` against the column space of `m` in canonical row order;
/// returns the combination coefficients and the residual.
fn eliminate_columns(m: &[Vec<Rational>], t: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut work: Vec<Vec<Rational>> = m.to_vec();
    let mut tt: Vec<Rational> = t.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut col_taken = vec![false; cols];
    for pr in 0..rows {
        for &(qr, qc) in &pivots {
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
        if let Some(c) = (0..cols).find(|&c| !col_taken[c] && !work[pr][c].is_zero()) {
            pivots.push((pr, c));
            col_taken[c] = true;
        }
    }
    let mut y = vec![Rational::zero(); cols];
    for &(pr, pc) in pivots.iter().rev() {
        let mut acc = tt[pr].clone();
        for c in 0..cols {
            if c != pc && !y[c].is_zero() && !work[pr][c].is_zero() {
                let term = &work[pr][c] * &y[c];
                acc = &acc - &term;
            }
        }
        y[pc] = acc.checked_div(&work[pr][pc]).expect("pivot entry nonzero");
    }
    let mut residual = t.to_vec();
    for (r, item) in residual.iter_mut().enumerate() {
        for c in 0..cols {
            if !m[r][c].is_zero() && !y[c].is_zero() {
                let term = &m[r][c] * &y[c];
                *item = &*item - &term;
            }
        }
    }
    (y, residual)
}

/// Rebuilds the chain generator from a solution over the level-`s` image
/// columns: the leading block weights the grade-`(n-1)` slice, the tail
/// weights the kernel chains.
fn chain_from_solution(
    body: &GElement,
    n: u32,
    s: u32,
    y: &[Rational],
) -> Result<Vec<GElement>> {
    let free = 4 * n as usize;
    let mut chain: Vec<GElement> = vec![GElement::zero(); s as usize - 1];
    chain[s as usize - 2] = coords_to_element(&y[..free], n - 1);
    if s >= 3 {
        for (k, kernel_chain) in kernel_chains(body, n - 1, s - 1)?.iter().enumerate() {
            let weight = &y[free + k];
            if weight.is_zero() {
                continue;
            }
            for (i, z) in kernel_chain.iter().enumerate() {
                chain[i] = &chain[i] + &z.scale(weight);
            }
        }
    }
    Ok(chain)
}
