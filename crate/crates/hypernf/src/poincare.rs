//! The eigenvalue stage: clearing every non-resonant monomial.
//!
//! In complex coordinates the linear part is the pure rotation, so each
//! monomial slot is an eigenvector of its bracket action; the eigenvalue
//! is an exact imaginary combination of the two frequency symbols.  A slot
//! is resonant exactly when that combination vanishes identically — for
//! non-resonant frequencies this is an integer condition, independent of
//! the frequency values, which is why the whole stage can run symbolically.
//! Every non-resonant slot is removed degree by degree; what remains
//! converts losslessly into the graded generator basis.

use crate::error::{Error, Result};
use crate::liealg::{
    bracket_complex, complex_to_pr, theta_complex, ComplexVF, Monomial, SystemPR,
};
use crate::scalars::{FreqPoly, FreqScalar, Gaussian, Rational};

/// The bracket eigenvalue of a monomial slot against the rotation:
/// `i * ((m1 - m2 - s1) w1 + (n1 - n2 - s2) w2)` where `(s1, s2)` selects
/// the component's own rotation weight.
pub fn eigenvalue(mono: &Monomial) -> FreqScalar {
    let [m1, m2, n1, n2] = mono.exps;
    let (s1, s2): (i64, i64) = match mono.component {
        1 => (1, 0),
        2 => (-1, 0),
        3 => (0, 1),
        _ => (0, -1),
    };
    let c1 = i64::from(m1) - i64::from(m2) - s1;
    let c2 = i64::from(n1) - i64::from(n2) - s2;
    let mut poly = FreqPoly::zero();
    poly.add_term((1, 0), Gaussian::new(Rational::zero(), Rational::from_int(c1)));
    poly.add_term((0, 1), Gaussian::new(Rational::zero(), Rational::from_int(c2)));
    FreqScalar::from_poly(poly)
}

/// True when the slot's eigenvalue vanishes identically in the
/// frequencies.
pub fn is_resonant(mono: &Monomial) -> bool {
    eigenvalue(mono).is_zero()
}

/// Pushes `v` through the flow of the generator `x` in complex
/// coordinates, truncated at total degree `cap`.
///
/// `x` must start at degree 2 or higher so the series terminates on every
/// degree slice.
pub fn exp_ad_complex(x: &ComplexVF, v: &ComplexVF, cap: u32) -> Result<ComplexVF> {
    match x.min_degree() {
        None => return Ok(v.truncate_degree(cap)),
        Some(d) if d < 2 => return Err(Error::GradeTooSmall { got: d, min: 2 }),
        Some(_) => {}
    }
    let mut out = v.truncate_degree(cap);
    let mut term = out.clone();
    let mut j: i64 = 1;
    loop {
        let step = bracket_complex(x, &term)
            .truncate_degree(cap)
            .scale(&FreqScalar::from_rational(
                Rational::new(1, j).expect("positive factorial step"),
            ));
        if step.is_zero() {
            break;
        }
        out = &out + &step;
        term = step;
        j += 1;
    }
    Ok(out)
}

/// Outcome of the eigenvalue stage.
#[derive(Debug, Clone)]
pub struct FirstLevelResult {
    /// The cleared field, converted to the graded generator basis.
    pub normal_form: SystemPR,
    /// The cleared field in complex coordinates (same content).
    pub complex_form: ComplexVF,
    /// The degree-`d` generators actually spent, ascending in `d`.
    pub generators: Vec<(u32, ComplexVF)>,
    /// The truncation degree of the run, `2N + 1` for grade cap `N`.
    pub residual_degree: u32,
}

/// Clears every non-resonant monomial of `v` up to total degree `cap`,
/// staying in complex coordinates.
///
/// The field must be a reality-compatible perturbation of the pure
/// rotation: conjugate-partner slots must carry conjugate coefficients
/// ([`Error::RealityViolation`]) and the linear part must be exactly the
/// rotation ([`Error::BadLinearPart`]).  Returns the cleared field together
/// with the degree-homogeneous generators spent, ascending in degree; the
/// cleared field's coefficients may depend on the frequency symbols.
pub fn clear_nonresonant(v: &ComplexVF, cap: u32) -> Result<(ComplexVF, Vec<(u32, ComplexVF)>)> {
    v.check_reality()?;
    let linear = v.degree_part(1);
    if linear != theta_complex() {
        return Err(Error::BadLinearPart(format!(
            "linear part must be the pure rotation, found `{linear}`"
        )));
    }
    let mut current = v.truncate_degree(cap);
    let mut generators = Vec::new();
    for d in 2..=cap {
        let mut x = ComplexVF::zero();
        for (mono, coeff) in current.degree_part(d).iter() {
            let lambda = eigenvalue(mono);
            if lambda.is_zero() {
                continue;
            }
            x.add_term(*mono, coeff.checked_div(&lambda)?);
        }
        if x.is_zero() {
            continue;
        }
        current = exp_ad_complex(&x, &current, cap)?;
        let leftover: Vec<String> = current
            .degree_part(d)
            .iter()
            .filter(|(mono, _)| !is_resonant(mono))
            .map(|(mono, _)| mono.to_string())
            .collect();
        if !leftover.is_empty() {
            return Err(Error::PostRationalityCheck(format!(
                "non-resonant slots survive at degree {d}: {}",
                leftover.join(", ")
            )));
        }
        generators.push((d, x));
    }
    Ok((current, generators))
}

/// Clears every non-resonant monomial of `v` through grade cap `n_cap`
/// (total degree `2 * n_cap + 1`) and converts the result to the graded
/// generator basis.
///
/// Preconditions are those of [`clear_nonresonant`].  Coefficients that stay
/// frequency-dependent after simplification are reported as
/// [`Error::PostRationalityCheck`].
pub fn first_level_normalize(v: &ComplexVF, n_cap: u32) -> Result<FirstLevelResult> {
    let cap = 2 * n_cap + 1;
    let (current, generators) = clear_nonresonant(v, cap)?;
    Ok(FirstLevelResult {
        normal_form: to_generator_form(&current)?,
        complex_form: current,
        generators,
        residual_degree: cap,
    })
}

/// Converts an eigenvalue-stage normal form into the graded generator
/// basis, reporting structure that falls outside the resonant span as
/// [`Error::PostRationalityCheck`].
pub fn to_generator_form(v: &ComplexVF) -> Result<SystemPR> {
    complex_to_pr(v).map_err(|e| match e {
        Error::NotInSpan { monomial, reason } => Error::PostRationalityCheck(format!(
            "resonant slot `{monomial}` is outside the generator span: {reason}"
        )),
        other => other,
    })
}
