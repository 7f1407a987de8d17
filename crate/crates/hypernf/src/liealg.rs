//! The graded Lie algebra of planar-product vector fields and its complex
//! coordinate representation.
//!
//! Elements are rational combinations of the generators `P1[m,n]`, `P2[m,n]`,
//! `R1[m,n]`, `R2[m,n]` (amplitude and rotation fields of the two planes,
//! indexed by the two amplitude powers).  A generator with indices `(m, n)`
//! has grade `m + n`; the companion polynomial vector field has degree
//! `2*(m + n) + 1`.  The central rotation `Theta = w1*R1[0,0] + w2*R2[0,0]`
//! is carried as a flag on [`SystemPR`], never as a stored term.
//!
//! The bracket on generators closes with integer structure constants; this
//! module implements it directly, together with the faithful translation to
//! and from complex coordinates `(z1, conj z1, z2, conj z2)` where brackets
//! are computed from first principles as `Dw . v - Dv . w`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalars::{FreqScalar, Gaussian, Rational};

// ---------------------------------------------------------------------------
// PRTerm
// ---------------------------------------------------------------------------

/// The two generator families: amplitude (`P`) and rotation (`R`) fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    P,
    R,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::P => 'P',
            Family::R => 'R',
        }
    }
}

/// One basis generator `P{k}[m,n]` or `R{k}[m,n]` with plane index
/// `k in {1,2}` and amplitude exponents `(m, n)`.
///
/// The ordering is the canonical listing order used everywhere: ascending
/// grade, then `P` before `R`, then plane index, then ascending `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PRTerm {
    pub family: Family,
    pub k: u8,
    pub m: u32,
    pub n: u32,
}

impl PRTerm {
    /// Builds a generator, validating the plane index.
    pub fn new(family: Family, k: u8, m: u32, n: u32) -> Self {
        assert!(k == 1 || k == 2, "plane index must be 1 or 2");
        PRTerm { family, k, m, n }
    }

    /// Shorthand for the amplitude family.
    pub fn p(k: u8, m: u32, n: u32) -> Self {
        PRTerm::new(Family::P, k, m, n)
    }

    /// Shorthand for the rotation family.
    pub fn r(k: u8, m: u32, n: u32) -> Self {
        PRTerm::new(Family::R, k, m, n)
    }

    /// The grade `m + n`.
    pub fn grade(&self) -> u32 {
        self.m + self.n
    }

    /// Polynomial degree of the companion vector field, `2*(m+n) + 1`.
    pub fn degree(&self) -> u32 {
        2 * self.grade() + 1
    }

    fn key(&self) -> (u32, Family, u8, u32) {
        (self.grade(), self.family, self.k, self.m)
    }
}

impl PartialOrd for PRTerm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PRTerm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for PRTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}[{},{}]", self.family.letter(), self.k, self.m, self.n)
    }
}

impl FromStr for PRTerm {
    type Err = Error;

    /// Parses the canonical name `P1[m,n]` / `R2[m,n]`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |msg: &str| Error::parse(format!("`{s}`"), msg);
        let bytes = s.as_bytes();
        if bytes.len() < 6 {
            return Err(err("generator name too short"));
        }
        let family = match bytes[0] {
            b'P' => Family::P,
            b'R' => Family::R,
            _ => return Err(err("expected family letter P or R")),
        };
        let k = match bytes[1] {
            b'1' => 1,
            b'2' => 2,
            _ => return Err(err("expected plane index 1 or 2")),
        };
        let inner = s[2..]
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| err("expected bracketed indices"))?;
        let (ms, ns) = inner
            .split_once(',')
            .ok_or_else(|| err("expected two comma-separated indices"))?;
        let m: u32 = ms
            .trim()
            .parse()
            .map_err(|_| err("bad first index"))?;
        let n: u32 = ns
            .trim()
            .parse()
            .map_err(|_| err("bad second index"))?;
        Ok(PRTerm::new(family, k, m, n))
    }
}

/// The grade of a generator (free-function form of [`PRTerm::grade`]).
pub fn grade(t: &PRTerm) -> u32 {
    t.grade()
}

// ---------------------------------------------------------------------------
// GElement
// ---------------------------------------------------------------------------

/// A finite rational combination of generators.  Zero coefficients are never
/// stored, so structural equality is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GElement {
    terms: BTreeMap<PRTerm, Rational>,
}

impl GElement {
    /// The zero element.
    pub fn zero() -> Self {
        GElement { terms: BTreeMap::new() }
    }

    /// A single generator with coefficient 1.
    pub fn generator(t: PRTerm) -> Self {
        let mut e = GElement::zero();
        e.add_term(t, Rational::one());
        e
    }

    /// Builds an element from `(term, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (PRTerm, Rational)>>(it: I) -> Self {
        let mut e = GElement::zero();
        for (t, c) in it {
            e.add_term(t, c);
        }
        e
    }

    /// Adds `c * t` in place.
    pub fn add_term(&mut self, t: PRTerm, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(t).or_insert_with(Rational::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&t);
        }
    }

    /// True when no term is stored.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no term is stored (companion to [`GElement::len`]).
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a generator (zero when absent).
    pub fn coeff(&self, t: &PRTerm) -> Rational {
        self.terms.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    /// Iterates terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&PRTerm, &Rational)> {
        self.terms.iter()
    }

    /// The set of generators present.
    pub fn support(&self) -> Vec<PRTerm> {
        self.terms.keys().copied().collect()
    }

    /// Smallest grade present.
    pub fn min_grade(&self) -> Option<u32> {
        self.terms.keys().map(PRTerm::grade).min()
    }

    /// Largest grade present.
    pub fn max_grade(&self) -> Option<u32> {
        self.terms.keys().map(PRTerm::grade).max()
    }

    /// The part of exactly grade `g`.
    pub fn grade_part(&self, g: u32) -> GElement {
        GElement {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.grade() == g)
                .map(|(t, c)| (*t, c.clone()))
                .collect(),
        }
    }

    /// Drops every term of grade above `g`.
    pub fn truncate(&self, g: u32) -> GElement {
        GElement {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.grade() <= g)
                .map(|(t, c)| (*t, c.clone()))
                .collect(),
        }
    }

    /// Scales every coefficient.
    pub fn scale(&self, c: &Rational) -> GElement {
        if c.is_zero() {
            return GElement::zero();
        }
        GElement {
            terms: self.terms.iter().map(|(t, a)| (*t, a * c)).collect(),
        }
    }
}

impl std::ops::Add for &GElement {
    type Output = GElement;
    fn add(self, rhs: &GElement) -> GElement {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(*t, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &GElement {
    type Output = GElement;
    fn sub(self, rhs: &GElement) -> GElement {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(*t, -c);
        }
        out
    }
}

impl std::ops::Neg for &GElement {
    type Output = GElement;
    fn neg(self) -> GElement {
        self.scale(&Rational::from_int(-1))
    }
}

impl fmt::Display for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| format!("({c}){t}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Bracket on generators
// ---------------------------------------------------------------------------

/// Bracket of two single generators, as a (term, integer factor) list.
///
/// The structure constants close over the generator set:
///
/// ```text
/// [P1[m,n], P1[i,j]] = 2(i-m) P1[m+i, n+j]
/// [P2[m,n], P2[i,j]] = 2(j-n) P2[m+i, n+j]
/// [P1[m,n], P2[i,j]] = 2i P2[m+i, n+j] - 2n P1[m+i, n+j]
/// [P1[m,n], Rk[i,j]] = 2i Rk[m+i, n+j]
/// [P2[m,n], Rk[i,j]] = 2j Rk[m+i, n+j]
/// [Rk[m,n], Rl[i,j]] = 0
/// ```
///
/// with the remaining cases fixed by antisymmetry.
fn bracket_generators(a: &PRTerm, b: &PRTerm) -> Vec<(PRTerm, i64)> {
    let (m, n) = (a.m as i64, a.n as i64);
    let (i, j) = (b.m as i64, b.n as i64);
    let sm = a.m + b.m;
    let sn = a.n + b.n;
    match (a.family, b.family) {
        (Family::P, Family::P) => match (a.k, b.k) {
            (1, 1) => vec![(PRTerm::p(1, sm, sn), 2 * (i - m))],
            (2, 2) => vec![(PRTerm::p(2, sm, sn), 2 * (j - n))],
            (1, 2) => vec![
                (PRTerm::p(2, sm, sn), 2 * i),
                (PRTerm::p(1, sm, sn), -2 * n),
            ],
            (2, 1) => vec![
                (PRTerm::p(2, sm, sn), -2 * m),
                (PRTerm::p(1, sm, sn), 2 * j),
            ],
            _ => unreachable!("plane index validated at construction"),
        },
        (Family::P, Family::R) => {
            let factor = if a.k == 1 { 2 * i } else { 2 * j };
            vec![(PRTerm::r(b.k, sm, sn), factor)]
        }
        (Family::R, Family::P) => {
            let factor = if b.k == 1 { -2 * m } else { -2 * n };
            vec![(PRTerm::r(a.k, sm, sn), factor)]
        }
        (Family::R, Family::R) => Vec::new(),
    }
}

/// Bracket of two elements, extended bilinearly from the generator table.
pub fn bracket_pr(u: &GElement, v: &GElement) -> GElement {
    let mut out = GElement::zero();
    for (ta, ca) in u.iter() {
        for (tb, cb) in v.iter() {
            for (t, factor) in bracket_generators(ta, tb) {
                if factor != 0 {
                    out.add_term(t, &(ca * cb) * &Rational::from_int(factor));
                }
            }
        }
    }
    out
}

/// Pushes `v` through the flow of the generator `x`: the exponential of
/// the bracket action, truncated at grade `cap`.
///
/// `x` must have minimum grade 1 or higher, which makes the series finite
/// on every graded slice: the `j`-th summand `ad_x^j(v) / j!` starts at
/// grade `min_grade(v) + j` and eventually clears the cap.
pub fn exp_ad_pr(x: &GElement, v: &GElement, cap: u32) -> Result<GElement> {
    match x.min_grade() {
        None => return Ok(v.truncate(cap)),
        Some(g) if g < 1 => return Err(Error::GradeTooSmall { got: g, min: 1 }),
        Some(_) => {}
    }
    let mut out = v.truncate(cap);
    let mut term = out.clone();
    let mut j: i64 = 1;
    loop {
        let step = bracket_pr(x, &term)
            .truncate(cap)
            .scale(&Rational::new(1, j).expect("positive factorial step"));
        if step.is_zero() {
            break;
        }
        out = &out + &step;
        term = step;
        j += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// SystemPR
// ---------------------------------------------------------------------------

/// A vector field written in the generator basis: an optional central
/// rotation `Theta(w1, w2)` plus a body of graded terms (grade >= 1).
///
/// The two frequency labels are display names echoed into reports; the
/// algebra itself always works with the fixed symbols `w1`, `w2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemPR {
    pub omega1: String,
    pub omega2: String,
    pub includes_theta: bool,
    body: GElement,
}

impl SystemPR {
    /// Builds a system, rejecting grade-0 body terms (the rotation part is
    /// carried by the flag, and radial linear parts are outside the class).
    pub fn new(
        omega1: impl Into<String>,
        omega2: impl Into<String>,
        includes_theta: bool,
        body: GElement,
    ) -> Result<Self> {
        if let Some(g) = body.min_grade() {
            if g < 1 {
                return Err(Error::GradeTooSmall { got: g, min: 1 });
            }
        }
        Ok(SystemPR {
            omega1: omega1.into(),
            omega2: omega2.into(),
            includes_theta,
            body,
        })
    }

    /// A system with the default labels `w1`, `w2` and the rotation present.
    pub fn with_theta(body: GElement) -> Result<Self> {
        SystemPR::new("w1", "w2", true, body)
    }

    /// The graded body.
    pub fn body(&self) -> &GElement {
        &self.body
    }

    /// Replaces the body, keeping labels and rotation flag.
    pub fn map_body(&self, body: GElement) -> Result<Self> {
        SystemPR::new(self.omega1.clone(), self.omega2.clone(), self.includes_theta, body)
    }

    /// The grade-`g` part of the body.
    pub fn grade_part(&self, g: u32) -> GElement {
        self.body.grade_part(g)
    }
}

impl fmt::Display for SystemPR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.includes_theta {
            write!(f, "Theta({},{})", self.omega1, self.omega2)?;
            if !self.body.is_zero() {
                write!(f, " + {}", self.body)?;
            }
            Ok(())
        } else {
            write!(f, "{}", self.body)
        }
    }
}

// ---------------------------------------------------------------------------
// Complex coordinates
// ---------------------------------------------------------------------------

/// One monomial slot of a complex vector field: exponents of
/// `(z1, conj z1, z2, conj z2)` and the component index `1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub exps: [u32; 4],
    pub component: u8,
}

impl Monomial {
    /// Builds a monomial slot, validating the component index.
    pub fn new(exps: [u32; 4], component: u8) -> Self {
        assert!((1..=4).contains(&component), "component must be 1..=4");
        Monomial { exps, component }
    }

    /// Total polynomial degree.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// The conjugate-partner slot: swapped exponents within each plane and
    /// the paired component (1<->2, 3<->4).
    pub fn conj_partner(&self) -> Monomial {
        let [m1, m2, n1, n2] = self.exps;
        let component = match self.component {
            1 => 2,
            2 => 1,
            3 => 4,
            _ => 3,
        };
        Monomial::new([m2, m1, n2, n1], component)
    }

    fn key(&self) -> (u32, u8, [u32; 4]) {
        (self.degree(), self.component, self.exps)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{},{},{}]@{}",
            self.exps[0], self.exps[1], self.exps[2], self.exps[3], self.component
        )
    }
}

/// A polynomial vector field in complex coordinates, with exact scalar
/// coefficients that may depend on the frequency symbols.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComplexVF {
    terms: BTreeMap<Monomial, FreqScalar>,
}

impl ComplexVF {
    /// The zero field.
    pub fn zero() -> Self {
        ComplexVF { terms: BTreeMap::new() }
    }

    /// Builds a field from `(monomial, coefficient)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, FreqScalar)>>(it: I) -> Self {
        let mut v = ComplexVF::zero();
        for (m, c) in it {
            v.add_term(m, c);
        }
        v
    }

    /// Adds `c * monomial` in place.
    pub fn add_term(&mut self, m: Monomial, c: FreqScalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(FreqScalar::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// True when no term is stored.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no term is stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a monomial slot (zero when absent).
    pub fn coeff(&self, m: &Monomial) -> FreqScalar {
        self.terms.get(m).cloned().unwrap_or_else(FreqScalar::zero)
    }

    /// Iterates terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &FreqScalar)> {
        self.terms.iter()
    }

    /// Smallest total degree present.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    /// The part of exactly total degree `d`.
    pub fn degree_part(&self, d: u32) -> ComplexVF {
        ComplexVF {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Drops every term of total degree above `d`.
    pub fn truncate_degree(&self, d: u32) -> ComplexVF {
        ComplexVF {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Scales every coefficient.
    pub fn scale(&self, c: &FreqScalar) -> ComplexVF {
        if c.is_zero() {
            return ComplexVF::zero();
        }
        ComplexVF {
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    /// Checks the conjugate-pairing required of real fields: the coefficient
    /// at each slot must equal the conjugate of the coefficient at the
    /// partner slot.
    pub fn check_reality(&self) -> Result<()> {
        for (m, c) in &self.terms {
            let partner = m.conj_partner();
            let pc = self.coeff(&partner);
            if pc != c.conj() {
                return Err(Error::RealityViolation(format!(
                    "{m} has coefficient {c} but partner {partner} has {pc}"
                )));
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &ComplexVF {
    type Output = ComplexVF;
    fn add(self, rhs: &ComplexVF) -> ComplexVF {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &ComplexVF {
    type Output = ComplexVF;
    fn sub(self, rhs: &ComplexVF) -> ComplexVF {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl std::ops::Neg for &ComplexVF {
    type Output = ComplexVF;
    fn neg(self) -> ComplexVF {
        self.scale(&-&FreqScalar::one())
    }
}

impl fmt::Display for ComplexVF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c}){m}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Directional derivative `Dw . v` (the Jacobian of `w` applied to `v`),
/// computed monomial by monomial.
fn jacobian_apply(w: &ComplexVF, v: &ComplexVF) -> ComplexVF {
    let mut out = ComplexVF::zero();
    for (mw, cw) in w.iter() {
        for l in 0..4usize {
            let e = mw.exps[l];
            if e == 0 {
                continue;
            }
            for (mv, cv) in v.iter() {
                if usize::from(mv.component) != l + 1 {
                    continue;
                }
                let mut exps = mw.exps;
                exps[l] -= 1;
                for (slot, add) in exps.iter_mut().zip(mv.exps.iter()) {
                    *slot += add;
                }
                let factor = FreqScalar::from_rational(Rational::from_int(i64::from(e)));
                out.add_term(
                    Monomial::new(exps, mw.component),
                    &(&factor * cw) * cv,
                );
            }
        }
    }
    out
}

/// Bracket of complex fields from first principles: `Dw . v - Dv . w`.
pub fn bracket_complex(v: &ComplexVF, w: &ComplexVF) -> ComplexVF {
    &jacobian_apply(w, v) - &jacobian_apply(v, w)
}

// ---------------------------------------------------------------------------
// Translation between representations
// ---------------------------------------------------------------------------

/// The four complex slots of one generator, with their unit coefficients.
fn generator_slots(t: &PRTerm) -> [(Monomial, Gaussian); 2] {
    let (m, n) = (t.m, t.n);
    let (mono_a, mono_b) = match t.k {
        1 => (
            Monomial::new([m + 1, m, n, n], 1),
            Monomial::new([m, m + 1, n, n], 2),
        ),
        _ => (
            Monomial::new([m, m, n + 1, n], 3),
            Monomial::new([m, m, n, n + 1], 4),
        ),
    };
    match t.family {
        Family::P => [(mono_a, Gaussian::one()), (mono_b, Gaussian::one())],
        Family::R => [
            (mono_a, Gaussian::i()),
            (mono_b, -&Gaussian::i()),
        ],
    }
}

/// The pure-rotation linear field `Theta(w1, w2)` in complex coordinates.
pub fn theta_complex() -> ComplexVF {
    let i = FreqScalar::i();
    let w1 = FreqScalar::w1();
    let w2 = FreqScalar::w2();
    ComplexVF::from_terms([
        (Monomial::new([1, 0, 0, 0], 1), &i * &w1),
        (Monomial::new([0, 1, 0, 0], 2), -&(&i * &w1)),
        (Monomial::new([0, 0, 1, 0], 3), &i * &w2),
        (Monomial::new([0, 0, 0, 1], 4), -&(&i * &w2)),
    ])
}

/// Expands a generator-basis system into complex coordinates.
pub fn pr_to_complex(s: &SystemPR) -> ComplexVF {
    let mut out = if s.includes_theta {
        theta_complex()
    } else {
        ComplexVF::zero()
    };
    for (t, c) in s.body().iter() {
        let fc = FreqScalar::from_rational(c.clone());
        for (mono, unit) in generator_slots(t) {
            out.add_term(mono, &fc * &FreqScalar::from_gaussian(unit));
        }
    }
    out
}

/// Collapses a complex field back onto the generator basis.
///
/// Every monomial must sit in one of the four resonant shapes; coefficient
/// pairs must combine to plain rationals; a linear part, if present, must be
/// exactly the rotation `Theta(w1, w2)`.  Violations report the offending
/// monomial.
pub fn complex_to_pr(v: &ComplexVF) -> Result<SystemPR> {
    let mut body = GElement::zero();
    let mut theta_slots = 0u8;
    let two = FreqScalar::from_rational(Rational::from_int(2));
    let two_i = &two * &FreqScalar::i();

    for (mono, c) in v.iter() {
        let [e1, e2, e3, e4] = mono.exps;
        match mono.component {
            1 | 3 => {}
            2 | 4 => {
                // Handled together with the partner slot from component 1/3;
                // require the partner to exist.
                let partner = mono.conj_partner();
                if v.coeff(&partner).is_zero() {
                    return Err(Error::NotInSpan {
                        monomial: mono.to_string(),
                        reason: "no matching slot in the paired component".into(),
                    });
                }
                continue;
            }
            _ => unreachable!("component validated at construction"),
        }

        // Rotation part: the degree-1 slots of Theta.
        if mono.degree() == 1 {
            let expected = theta_complex().coeff(mono);
            if expected.is_zero() || *c != expected {
                return Err(Error::NotInSpan {
                    monomial: mono.to_string(),
                    reason: "linear part must be exactly the central rotation".into(),
                });
            }
            let partner = mono.conj_partner();
            if v.coeff(&partner) != theta_complex().coeff(&partner) {
                return Err(Error::NotInSpan {
                    monomial: partner.to_string(),
                    reason: "linear part must be exactly the central rotation".into(),
                });
            }
            theta_slots += 1;
            continue;
        }

        // Amplitude-resonant shapes: component 1 needs exps (m+1, m, n, n),
        // component 3 needs (m, m, n+1, n).
        let (k, m, n) = if mono.component == 1 {
            if e1 != e2 + 1 || e3 != e4 {
                return Err(Error::NotInSpan {
                    monomial: mono.to_string(),
                    reason: "not a resonant product shape".into(),
                });
            }
            (1u8, e2, e3)
        } else {
            if e1 != e2 || e3 != e4 + 1 {
                return Err(Error::NotInSpan {
                    monomial: mono.to_string(),
                    reason: "not a resonant product shape".into(),
                });
            }
            (2u8, e1, e4)
        };

        let partner = mono.conj_partner();
        let cp = v.coeff(&partner);
        if cp.is_zero() {
            return Err(Error::NotInSpan {
                monomial: mono.to_string(),
                reason: "no matching slot in the paired component".into(),
            });
        }
        // c = a + i b, cp = a - i b with a, b plain rationals.
        let a = (c + &cp).checked_div(&two).expect("division by two");
        let b = (c - &cp).checked_div(&two_i).expect("division by 2i");
        let a = a.as_rational().ok_or_else(|| Error::NotInSpan {
            monomial: mono.to_string(),
            reason: "amplitude coefficient is not a plain rational".into(),
        })?;
        let b = b.as_rational().ok_or_else(|| Error::NotInSpan {
            monomial: mono.to_string(),
            reason: "rotation coefficient is not a plain rational".into(),
        })?;
        body.add_term(PRTerm::p(k, m, n), a);
        body.add_term(PRTerm::r(k, m, n), b);
    }

    if theta_slots != 0 && theta_slots != 2 {
        return Err(Error::BadLinearPart(
            "rotation present in one plane only".into(),
        ));
    }
    SystemPR::new("w1", "w2", theta_slots == 2, body)
}
