//! Input documents and the three command workflows.
//!
//! An input document is a JSON object in one of two modes: `pr` carries
//! generator-basis terms with exact rational coefficients, `complex`
//! carries raw monomials in complex coordinates.  This module parses
//! those documents with field-path error reporting, merges file options
//! with command-line overrides, and drives the end-to-end pipeline:
//! eigenvalue stage (for complex inputs), graded normalization, report
//! assembly, and a final independent replay of the whole run.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::hyper::report::{self, DegreeRecord, NormalFormReport, VerificationRecord};
use crate::hyper::{
    assemble_a, classify_case, rank_exact, s_level_normalize, solve_grade_coords,
    ComplementStyle, Grade1Coeffs, LevelSpec,
};
use crate::liealg::{theta_complex, ComplexVF, GElement, Monomial, PRTerm, SystemPR};
use crate::poincare::first_level_normalize;
use crate::scalars::{FreqScalar, Rational};
use crate::verify::{verify_run, StartField, VerifyOutcome};

/// Options carried by an input document (all optional in the file).
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Grade cap `N`.
    pub grade: Option<u32>,
    /// Simplification depth.
    pub level: Option<LevelSpec>,
    /// Survivor style.
    pub style: Option<ComplementStyle>,
    /// Proceed on uncovered or degenerate coefficient patterns.
    pub force: bool,
}

/// A fully parsed input document.
#[derive(Debug, Clone)]
pub struct ParsedInput {
    /// The starting field (rotation part already in place).
    pub start: StartField,
    /// The two frequency labels.
    pub frequencies: [String; 2],
    /// File-level options.
    pub options: RunOptions,
    /// The parsed document, echoed verbatim into reports.
    pub echo: Value,
}

/// Effective settings after merging command-line overrides over file
/// options and defaults.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub grade: u32,
    pub level: LevelSpec,
    pub style: ComplementStyle,
    pub force: bool,
}

/// Merges command-line overrides (highest priority) with file options.
/// The grade cap must come from one of the two; level defaults to `inf`
/// and style to the documented tables.
pub fn resolve_settings(
    input: &ParsedInput,
    grade: Option<u32>,
    level: Option<LevelSpec>,
    style: Option<ComplementStyle>,
    force: bool,
) -> Result<Settings> {
    let grade = grade.or(input.options.grade).ok_or_else(|| {
        Error::parse("options.grade", "grade cap missing (set it in the file or pass --grade)")
    })?;
    if grade < 1 {
        return Err(Error::parse("options.grade", "grade cap must be at least 1"));
    }
    Ok(Settings {
        grade,
        level: level.or(input.options.level).unwrap_or(LevelSpec::Infinite),
        style: style.or(input.options.style).unwrap_or_default(),
        force: force || input.options.force,
    })
}

// ---------------------------------------------------------------------------
// Document parsing
// ---------------------------------------------------------------------------

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(format!("{path}.{key}"), "missing field"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected a JSON object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(path, "expected a JSON array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::parse(path, "expected a JSON string"))
}

fn as_u32(v: &Value, path: &str) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| Error::parse(path, "expected a small non-negative integer"))
}

/// Parses an input document, reporting problems with their field path.
pub fn parse_input(text: &str) -> Result<ParsedInput> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::parse("input", e.to_string()))?;
    let obj = as_object(&doc, "input")?;
    let mode = as_str(field(obj, "mode", "input")?, "mode")?;

    let frequencies = match obj.get("frequencies") {
        None => ["w1".to_string(), "w2".to_string()],
        Some(v) => {
            let arr = as_array(v, "frequencies")?;
            if arr.len() != 2 {
                return Err(Error::parse("frequencies", "expected exactly two labels"));
            }
            [
                as_str(&arr[0], "frequencies[0]")?.to_string(),
                as_str(&arr[1], "frequencies[1]")?.to_string(),
            ]
        }
    };

    let options = parse_options(obj.get("options"))?;

    let start = match mode {
        "pr" => {
            let terms = as_array(field(obj, "terms", "input")?, "terms")?;
            let (includes_theta, body) = parse_pr_terms(terms)?;
            StartField::Graded(SystemPR::new(
                frequencies[0].clone(),
                frequencies[1].clone(),
                includes_theta,
                body,
            )?)
        }
        "complex" => {
            let monos = as_array(field(obj, "monomials", "input")?, "monomials")?;
            let mut v = parse_monomials(monos)?;
            if v.degree_part(1).is_zero() {
                v = &v + &theta_complex();
            }
            StartField::Complex(v)
        }
        other => {
            return Err(Error::parse("mode", format!("expected `pr` or `complex`, found `{other}`")))
        }
    };

    Ok(ParsedInput { start, frequencies, options, echo: doc })
}

fn parse_options(v: Option<&Value>) -> Result<RunOptions> {
    let Some(v) = v else {
        return Ok(RunOptions::default());
    };
    let obj = as_object(v, "options")?;
    let mut out = RunOptions::default();
    if let Some(g) = obj.get("grade") {
        out.grade = Some(as_u32(g, "options.grade")?);
    }
    if let Some(l) = obj.get("level") {
        let text = match l {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(Error::parse("options.level", "expected an integer or `inf`")),
        };
        out.level = Some(
            text.parse::<LevelSpec>()
                .map_err(|_| Error::parse("options.level", "expected a positive integer or `inf`"))?,
        );
    }
    if let Some(s) = obj.get("style") {
        out.style = Some(as_str(s, "options.style")?.parse()?);
    }
    if let Some(f) = obj.get("force") {
        out.force = f
            .as_bool()
            .ok_or_else(|| Error::parse("options.force", "expected a boolean"))?;
    }
    Ok(out)
}

fn parse_pr_terms(terms: &[Value]) -> Result<(bool, GElement)> {
    let mut includes_theta = false;
    let mut body = GElement::zero();
    for (i, item) in terms.iter().enumerate() {
        let path = format!("terms[{i}]");
        let obj = as_object(item, &path)?;
        let term = as_str(field(obj, "term", &path)?, &format!("{path}.term"))?;
        let coeff = as_str(field(obj, "coeff", &path)?, &format!("{path}.coeff"))?;
        if term == "Theta" {
            let c: Rational = coeff
                .parse()
                .map_err(|_| Error::parse(format!("{path}.coeff"), "expected a rational"))?;
            if c != Rational::from_int(1) {
                return Err(Error::parse(
                    format!("{path}.coeff"),
                    "the rotation term carries coefficient 1 (frequencies scale it)",
                ));
            }
            includes_theta = true;
            continue;
        }
        let slot: PRTerm = term
            .parse()
            .map_err(|e: Error| Error::parse(format!("{path}.term"), e.to_string()))?;
        let c: Rational = coeff
            .parse()
            .map_err(|_| Error::parse(format!("{path}.coeff"), "expected a rational"))?;
        body.add_term(slot, c);
    }
    Ok((includes_theta, body))
}

fn parse_monomials(monos: &[Value]) -> Result<ComplexVF> {
    let mut v = ComplexVF::zero();
    for (i, item) in monos.iter().enumerate() {
        let path = format!("monomials[{i}]");
        let obj = as_object(item, &path)?;
        let exps_val = as_array(field(obj, "exps", &path)?, &format!("{path}.exps"))?;
        if exps_val.len() != 4 {
            return Err(Error::parse(format!("{path}.exps"), "expected four exponents"));
        }
        let mut exps = [0u32; 4];
        for (k, e) in exps_val.iter().enumerate() {
            exps[k] = as_u32(e, &format!("{path}.exps[{k}]"))?;
        }
        let component = as_u32(
            field(obj, "component", &path)?,
            &format!("{path}.component"),
        )?;
        if !(1..=4).contains(&component) {
            return Err(Error::parse(
                format!("{path}.component"),
                "expected a component in 1..=4",
            ));
        }
        let coeff = as_str(field(obj, "coeff", &path)?, &format!("{path}.coeff"))?;
        let c: FreqScalar = coeff
            .parse()
            .map_err(|e: Error| Error::parse(format!("{path}.coeff"), e.to_string()))?;
        v.add_term(Monomial::new(exps, component as u8), c);
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Workflows
// ---------------------------------------------------------------------------

/// Outcome of the normalize workflow.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// The assembled report, verification verdict included.
    pub report: NormalFormReport,
    /// True when the final replay matched the claimed normal form.
    pub passed: bool,
}

/// Runs the full pipeline on a parsed input: eigenvalue stage for complex
/// inputs, graded normalization, report assembly, and a final replay of
/// the whole run from the report's own records.
pub fn run_pipeline(input: &ParsedInput, settings: &Settings) -> Result<PipelineOutput> {
    let (system, first_level, residual_degree) = match &input.start {
        StartField::Complex(v) => {
            let flr = first_level_normalize(v, settings.grade)?;
            let system = SystemPR::new(
                input.frequencies[0].clone(),
                input.frequencies[1].clone(),
                flr.normal_form.includes_theta,
                flr.normal_form.body().clone(),
            )?;
            let records: Vec<DegreeRecord> = flr
                .generators
                .iter()
                .map(|(d, g)| DegreeRecord { degree: *d, generator: report::mono_records(g) })
                .collect();
            (system, records, flr.residual_degree)
        }
        StartField::Graded(sys) => (sys.clone(), Vec::new(), 2 * settings.grade + 1),
    };

    let run = s_level_normalize(&system, settings.grade, settings.level, settings.style, settings.force)?;
    let mut report = run.report;
    report.input = input.echo.clone();
    report.first_level = first_level;
    report.residual_degree = residual_degree;

    let outcome = verify_run(&input.start, &report)?;
    report.verification = VerificationRecord {
        status: if outcome.matches { "passed" } else { "failed" }.to_string(),
        mismatches: outcome.mismatches,
    };
    Ok(PipelineOutput { passed: outcome.matches, report })
}

/// Runs the verify workflow: replays a stored report against a stored
/// input document.  An input echo mismatch is reported alongside slot
/// differences.
pub fn run_verify(input_text: &str, report_text: &str) -> Result<VerifyOutcome> {
    let input = parse_input(input_text)?;
    let report = NormalFormReport::from_json(report_text)?;
    let mut outcome = verify_run(&input.start, &report)?;
    if report.input != Value::Null && report.input != input.echo {
        outcome.matches = false;
        outcome
            .mismatches
            .push("input echo in the report differs from the provided input".to_string());
    }
    Ok(outcome)
}

/// Runs the rank workflow: assembles the grade-`n` matrix for four
/// amplitude coefficients, reports its exact rank, the routed case, and
/// the surviving slots.
pub fn run_rank(n: u32, coeffs: &str) -> Result<Value> {
    let parts: Vec<&str> = coeffs.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::parse(
            "coeffs",
            "expected four comma-separated rationals: a01_1,a01_2,a10_1,a10_2",
        ));
    }
    let mut vals = Vec::with_capacity(4);
    for (i, p) in parts.iter().enumerate() {
        let c: Rational = p
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("coeffs[{i}]"), "expected a rational"))?;
        vals.push(c);
    }
    let co = Grade1Coeffs::from_amplitudes(
        vals[0].clone(),
        vals[1].clone(),
        vals[2].clone(),
        vals[3].clone(),
    );
    let tag = classify_case(&co, true)?;
    let hom = assemble_a(n, &co)?;
    let rank = rank_exact(&hom);
    let zeros = vec![Rational::zero(); 4 * (n as usize + 1)];
    let outcome = solve_grade_coords(n, &zeros, &co, &tag.branch, false)?;
    Ok(serde_json::json!({
        "n": n,
        "coeffs": {
            "a01_1": vals[0].to_string(),
            "a01_2": vals[1].to_string(),
            "a10_1": vals[2].to_string(),
            "a10_2": vals[3].to_string(),
        },
        "case": report::case_record(&tag),
        "rank": rank,
        "surviving": report::slot_strings(&outcome.complement),
    }))
}
