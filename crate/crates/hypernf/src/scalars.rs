//! Exact scalar arithmetic.
//!
//! Every quantity in this crate is exact: plain rationals, Gaussian
//! rationals (rationals extended by `i`), and rational functions in the two
//! frequency symbols `w1`, `w2` over the Gaussian rationals.  The widest
//! type, [`FreqScalar`], keeps its denominator as a multiset of normalized
//! factors — in this problem every denominator is a product of linear
//! eigenvalue forms — so that equality is structural, printing is
//! deterministic, and reduction needs only exact-division probes:
//!
//! * no denominator factor divides the numerator, and
//! * each factor's leading coefficient — leading in graded lexicographic
//!   order with `w1` before `w2` — is exactly `1`.
//!
//! Textual round-trips are bit-exact: parsing the `Display` output of any
//! scalar reproduces the same canonical value.  The accepted grammar covers
//! plain rationals (`-3/4`), Gaussian constants (`2-1/3i`), the frequency
//! symbols (`w1`, `w2`), and arbitrary `+ - * / ^ ( )` expressions over
//! them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

/// An arbitrary-precision rational number, always stored reduced with a
/// positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// The additive identity.
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    /// The multiplicative identity.
    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Builds `num/den`, rejecting a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    /// Builds a rational from an integer.
    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Wraps an already-reduced big rational.
    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }

    /// Borrows the underlying big rational.
    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// True when the value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// True when the value is exactly one.
    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// True for values strictly below zero.
    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Absolute value.
    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Exact division, failing on a zero divisor.
    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Multiplicative inverse, failing on zero.
    pub fn recip(&self) -> Result<Rational> {
        Rational::one().checked_div(self)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! impl_binop_rational {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl std::ops::$trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

impl_binop_rational!(Add, add, +);
impl_binop_rational!(Sub, sub, -);
impl_binop_rational!(Mul, mul, *);

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = FreqScalar::from_str(s)?;
        v.as_rational().ok_or_else(|| Error::parse(
            format!("`{s}`"),
            "expected a plain rational value",
        ))
    }
}

// ---------------------------------------------------------------------------
// GaussianRational
// ---------------------------------------------------------------------------

/// A Gaussian rational `re + im*i` with exact rational parts.  The derived
/// order is lexicographic on `(re, im)`; it carries no analytic meaning and
/// exists so containers of scalars can be sorted canonically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Gaussian {
    re: Rational,
    im: Rational,
}

impl Gaussian {
    /// The additive identity.
    pub fn zero() -> Self {
        Gaussian { re: Rational::zero(), im: Rational::zero() }
    }

    /// The multiplicative identity.
    pub fn one() -> Self {
        Gaussian { re: Rational::one(), im: Rational::zero() }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Gaussian { re: Rational::zero(), im: Rational::one() }
    }

    /// Builds a Gaussian rational from its two parts.
    pub fn new(re: Rational, im: Rational) -> Self {
        Gaussian { re, im }
    }

    /// Embeds a plain rational.
    pub fn from_rational(re: Rational) -> Self {
        Gaussian { re, im: Rational::zero() }
    }

    /// Real part.
    pub fn re(&self) -> &Rational {
        &self.re
    }

    /// Imaginary part.
    pub fn im(&self) -> &Rational {
        &self.im
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Gaussian { re: self.re.clone(), im: -&self.im }
    }

    /// True when both parts vanish.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// True when the value is exactly `1`.
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// The real part when the imaginary part vanishes.
    pub fn as_rational(&self) -> Option<Rational> {
        self.im.is_zero().then(|| self.re.clone())
    }

    /// Squared modulus `re^2 + im^2`.
    fn norm(&self) -> Rational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    /// Exact division, failing on a zero divisor.
    pub fn checked_div(&self, rhs: &Gaussian) -> Result<Gaussian> {
        let n = rhs.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = self * &rhs.conj();
        Ok(Gaussian {
            re: num.re.checked_div(&n)?,
            im: num.im.checked_div(&n)?,
        })
    }

    /// Multiplicative inverse, failing on zero.
    pub fn recip(&self) -> Result<Gaussian> {
        Gaussian::one().checked_div(self)
    }
}

impl From<Rational> for Gaussian {
    fn from(re: Rational) -> Self {
        Gaussian::from_rational(re)
    }
}

impl std::ops::Add for &Gaussian {
    type Output = Gaussian;
    fn add(self, rhs: &Gaussian) -> Gaussian {
        Gaussian { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl std::ops::Sub for &Gaussian {
    type Output = Gaussian;
    fn sub(self, rhs: &Gaussian) -> Gaussian {
        Gaussian { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl std::ops::Mul for &Gaussian {
    type Output = Gaussian;
    fn mul(self, rhs: &Gaussian) -> Gaussian {
        Gaussian {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl std::ops::Neg for &Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", gaussian_string(self))
    }
}

impl FromStr for Gaussian {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = FreqScalar::from_str(s)?;
        v.as_gaussian().ok_or_else(|| Error::parse(
            format!("`{s}`"),
            "expected a Gaussian rational constant",
        ))
    }
}

/// Renders a Gaussian rational: `0`, `3/2`, `i`, `-2/3i`, `2-1/3i`, ...
fn gaussian_string(g: &Gaussian) -> String {
    let im_str = |im: &Rational| -> String {
        if im.is_one() {
            "i".to_string()
        } else if (-im).is_one() {
            "-i".to_string()
        } else {
            format!("{im}i")
        }
    };
    if g.is_zero() {
        "0".to_string()
    } else if g.im.is_zero() {
        g.re.to_string()
    } else if g.re.is_zero() {
        im_str(&g.im)
    } else {
        let tail = im_str(&g.im);
        if tail.starts_with('-') {
            format!("{}{}", g.re, tail)
        } else {
            format!("{}+{}", g.re, tail)
        }
    }
}

// ---------------------------------------------------------------------------
// FreqPoly: polynomials in w1, w2 over the Gaussian rationals
// ---------------------------------------------------------------------------

/// Compares monomial exponents `(d1, d2)` in graded lexicographic order with
/// `w1` ranked before `w2`.
fn glex_cmp(a: (u32, u32), b: (u32, u32)) -> Ordering {
    (a.0 + a.1, a.0).cmp(&(b.0 + b.1, b.0))
}

/// A polynomial in the frequency symbols `w1`, `w2` with Gaussian rational
/// coefficients.  Zero coefficients are never stored.  The derived order is
/// structural (term-by-term); it only serves canonical sorting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct FreqPoly {
    terms: BTreeMap<(u32, u32), Gaussian>,
}

impl FreqPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        FreqPoly { terms: BTreeMap::new() }
    }

    /// The constant polynomial `1`.
    pub fn one() -> Self {
        FreqPoly::constant(Gaussian::one())
    }

    /// A constant polynomial.
    pub fn constant(c: Gaussian) -> Self {
        let mut p = FreqPoly::zero();
        p.add_term((0, 0), c);
        p
    }

    /// The symbol `w1`.
    pub fn w1() -> Self {
        let mut p = FreqPoly::zero();
        p.add_term((1, 0), Gaussian::one());
        p
    }

    /// The symbol `w2`.
    pub fn w2() -> Self {
        let mut p = FreqPoly::zero();
        p.add_term((0, 1), Gaussian::one());
        p
    }

    /// Adds `c * w1^d1 * w2^d2` in place, dropping the slot if it cancels.
    pub fn add_term(&mut self, exps: (u32, u32), c: Gaussian) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(Gaussian::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over `(exponents, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Gaussian)> {
        self.terms.iter()
    }

    /// The leading exponent pair in graded lexicographic order, if any.
    pub fn leading_exps(&self) -> Option<(u32, u32)> {
        self.terms.keys().copied().max_by(|a, b| glex_cmp(*a, *b))
    }

    /// The leading coefficient in graded lexicographic order.
    pub fn leading_coeff(&self) -> Option<&Gaussian> {
        self.leading_exps().and_then(|e| self.terms.get(&e))
    }

    /// The constant term when the polynomial has no frequency dependence.
    pub fn as_constant(&self) -> Option<Gaussian> {
        if self.is_zero() {
            Some(Gaussian::zero())
        } else if self.terms.len() == 1 {
            self.terms.get(&(0, 0)).cloned()
        } else {
            None
        }
    }

    /// Scales every coefficient by `c`.
    pub fn scale(&self, c: &Gaussian) -> FreqPoly {
        let mut out = FreqPoly::zero();
        for (e, a) in &self.terms {
            out.add_term(*e, a * c);
        }
        out
    }

    /// Conjugates every coefficient (the frequency symbols stand for real
    /// quantities and are fixed).
    pub fn conj(&self) -> FreqPoly {
        let mut out = FreqPoly::zero();
        for (e, a) in &self.terms {
            out.add_term(*e, a.conj());
        }
        out
    }
}

impl std::ops::Add for &FreqPoly {
    type Output = FreqPoly;
    fn add(self, rhs: &FreqPoly) -> FreqPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &FreqPoly {
    type Output = FreqPoly;
    fn sub(self, rhs: &FreqPoly) -> FreqPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl std::ops::Mul for &FreqPoly {
    type Output = FreqPoly;
    fn mul(self, rhs: &FreqPoly) -> FreqPoly {
        let mut out = FreqPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term((ea.0 + eb.0, ea.1 + eb.1), ca * cb);
            }
        }
        out
    }
}

impl std::ops::Neg for &FreqPoly {
    type Output = FreqPoly;
    fn neg(self) -> FreqPoly {
        self.scale(&-&Gaussian::one())
    }
}

impl fmt::Display for FreqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", poly_string(self))
    }
}

/// Renders one monomial `w1^a*w2^b` (empty for the constant monomial).
fn mono_string(e: (u32, u32)) -> String {
    let mut parts = Vec::new();
    for (sym, d) in [("w1", e.0), ("w2", e.1)] {
        match d {
            0 => {}
            1 => parts.push(sym.to_string()),
            _ => parts.push(format!("{sym}^{d}")),
        }
    }
    parts.join("*")
}

/// Renders a polynomial with terms in descending graded lexicographic order.
fn poly_string(p: &FreqPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut exps: Vec<(u32, u32)> = p.terms.keys().copied().collect();
    exps.sort_by(|a, b| glex_cmp(*b, *a));
    let mut out = String::new();
    for (idx, e) in exps.iter().enumerate() {
        let c = &p.terms[e];
        let mono = mono_string(*e);
        let term = if mono.is_empty() {
            let s = gaussian_string(c);
            if !c.re().is_zero() && !c.im().is_zero() {
                format!("({s})")
            } else {
                s
            }
        } else if c.is_one() {
            mono
        } else if (-c).is_one() {
            format!("-{mono}")
        } else if c.re().is_zero() || c.im().is_zero() {
            format!("{}*{mono}", gaussian_string(c))
        } else {
            format!("({})*{mono}", gaussian_string(c))
        };
        if idx == 0 {
            out.push_str(&term);
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exact bivariate gcd (primitive pseudo-remainder sequence)
// ---------------------------------------------------------------------------
//
// For reduction the polynomial is viewed recursively: an element of
// Q(i)[w2][w1], i.e. a vector of univariate polynomials in w2 indexed by the
// power of w1.

/// Univariate polynomial in `w2` over the Gaussian rationals; index = degree.
type UPoly = Vec<Gaussian>;

fn u_trim(p: &mut UPoly) {
    while p.last().is_some_and(Gaussian::is_zero) {
        p.pop();
    }
}

fn u_is_zero(p: &UPoly) -> bool {
    p.is_empty()
}

fn u_add(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = vec![Gaussian::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    u_trim(&mut out);
    out
}

fn u_neg(a: &UPoly) -> UPoly {
    a.iter().map(|c| -c).collect()
}

fn u_mul(a: &UPoly, b: &UPoly) -> UPoly {
    if u_is_zero(a) || u_is_zero(b) {
        return Vec::new();
    }
    let mut out = vec![Gaussian::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(ca * cb);
        }
    }
    u_trim(&mut out);
    out
}

fn u_scale(a: &UPoly, c: &Gaussian) -> UPoly {
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|x| x * c).collect()
}

/// Division with remainder over the coefficient field.
fn u_divrem(a: &UPoly, b: &UPoly) -> (UPoly, UPoly) {
    assert!(!u_is_zero(b), "univariate division by zero polynomial");
    let mut rem = a.clone();
    let db = b.len() - 1;
    let lb = b.last().expect("nonzero divisor");
    let lb_inv = lb.recip().expect("leading coefficient invertible");
    let mut quo = vec![Gaussian::zero(); a.len().saturating_sub(db)];
    while !u_is_zero(&rem) && rem.len() > db {
        let shift = rem.len() - 1 - db;
        let q = rem.last().expect("nonzero remainder") * &lb_inv;
        quo[shift] = &quo[shift] + &q;
        for (j, cb) in b.iter().enumerate() {
            rem[shift + j] = &rem[shift + j] - &(cb * &q);
        }
        u_trim(&mut rem);
    }
    u_trim(&mut quo);
    (quo, rem)
}

/// Monic gcd over the coefficient field.
fn u_gcd(a: &UPoly, b: &UPoly) -> UPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !u_is_zero(&y) {
        // Rescaling each remainder monic is free over the field and keeps
        // the fractions from compounding across Euclid steps.
        let lc = y.last().expect("nonzero divisor").clone();
        y = u_scale(&y, &lc.recip().expect("nonzero leading coefficient"));
        let (_, r) = u_divrem(&x, &y);
        x = y;
        y = r;
    }
    if u_is_zero(&x) {
        return x;
    }
    let lc = x.last().expect("nonzero gcd").clone();
    u_scale(&x, &lc.recip().expect("nonzero leading coefficient"))
}

/// Bivariate polynomial as coefficients in `w1`: `b[k]` multiplies `w1^k`.
type BPoly = Vec<UPoly>;

fn b_trim(p: &mut BPoly) {
    while p.last().is_some_and(u_is_zero) {
        p.pop();
    }
}

fn b_is_zero(p: &BPoly) -> bool {
    p.is_empty()
}

fn b_from_poly(p: &FreqPoly) -> BPoly {
    let mut out: BPoly = Vec::new();
    for (&(d1, d2), c) in p.terms() {
        let (d1, d2) = (d1 as usize, d2 as usize);
        if out.len() <= d1 {
            out.resize(d1 + 1, Vec::new());
        }
        if out[d1].len() <= d2 {
            out[d1].resize(d2 + 1, Gaussian::zero());
        }
        out[d1][d2] = c.clone();
    }
    for u in &mut out {
        u_trim(u);
    }
    b_trim(&mut out);
    out
}

fn b_to_poly(p: &BPoly) -> FreqPoly {
    let mut out = FreqPoly::zero();
    for (d1, u) in p.iter().enumerate() {
        for (d2, c) in u.iter().enumerate() {
            out.add_term((d1 as u32, d2 as u32), c.clone());
        }
    }
    out
}

fn b_sub(a: &BPoly, b: &BPoly) -> BPoly {
    let mut out = vec![Vec::new(); a.len().max(b.len())];
    for (i, u) in a.iter().enumerate() {
        out[i] = u.clone();
    }
    for (i, u) in b.iter().enumerate() {
        out[i] = u_add(&out[i], &u_neg(u));
    }
    b_trim(&mut out);
    out
}

/// Scales every `w1`-coefficient by a univariate polynomial in `w2`.
fn b_scale_u(a: &BPoly, c: &UPoly) -> BPoly {
    let mut out: BPoly = a.iter().map(|u| u_mul(u, c)).collect();
    b_trim(&mut out);
    out
}

/// `a * c * w1^shift` for a univariate multiplier `c`.
fn b_shift_mul(a: &BPoly, c: &UPoly, shift: usize) -> BPoly {
    let mut out = vec![Vec::new(); shift];
    out.extend(a.iter().map(|u| u_mul(u, c)));
    b_trim(&mut out);
    out
}

/// Content: monic gcd of all `w1`-coefficients (a polynomial in `w2`).
fn b_content(a: &BPoly) -> UPoly {
    let mut g: UPoly = Vec::new();
    for u in a {
        g = u_gcd(&g, u);
    }
    g
}

/// Divides every `w1`-coefficient exactly by a univariate divisor.
fn b_div_u_exact(a: &BPoly, c: &UPoly) -> BPoly {
    let mut out: BPoly = a
        .iter()
        .map(|u| {
            if u_is_zero(u) {
                return Vec::new();
            }
            let (q, r) = u_divrem(u, c);
            assert!(u_is_zero(&r), "content division must be exact");
            q
        })
        .collect();
    b_trim(&mut out);
    out
}

/// Scales the whole polynomial by a unit so its graded-lex leading Gaussian
/// coefficient is 1.  Gcd intermediates are only meaningful up to units, and
/// renormalizing each round stops the pseudo-remainder scale factors from
/// compounding into huge integers.
fn b_scalar_normalize(mut p: BPoly) -> BPoly {
    let Some(lc) = p.last().and_then(|u| u.last()).cloned() else {
        return p;
    };
    if lc.is_one() {
        return p;
    }
    let inv = lc.recip().expect("nonzero leading coefficient");
    for u in &mut p {
        *u = u_scale(u, &inv);
    }
    p
}

/// Pseudo-remainder of `a` by `b` in `w1`, up to a unit scalar and content,
/// both of which the caller strips.  Requires `b` nonzero.
fn b_prem(a: &BPoly, b: &BPoly) -> BPoly {
    let db = b.len() - 1;
    let lb = b.last().expect("nonzero divisor").clone();
    let mut r = a.clone();
    while !b_is_zero(&r) && r.len() > db {
        let shift = r.len() - 1 - db;
        let lr = r.last().expect("nonzero remainder").clone();
        r = b_scalar_normalize(b_sub(&b_scale_u(&r, &lb), &b_shift_mul(b, &lr, shift)));
    }
    r
}

/// Exact division of bivariate polynomials; the divisor must divide exactly.
fn b_div_exact(a: &BPoly, g: &BPoly) -> BPoly {
    if b_is_zero(a) {
        return Vec::new();
    }
    assert!(!b_is_zero(g), "exact division by zero polynomial");
    let dg = g.len() - 1;
    let lg = g.last().expect("nonzero divisor");
    let mut rem = a.clone();
    let mut quo: BPoly = vec![Vec::new(); a.len().saturating_sub(dg)];
    while !b_is_zero(&rem) && rem.len() > dg {
        let shift = rem.len() - 1 - dg;
        let lr = rem.last().expect("nonzero remainder");
        let (q, r) = u_divrem(lr, lg);
        assert!(u_is_zero(&r), "gcd division must be exact");
        quo[shift] = u_add(&quo[shift], &q);
        rem = b_sub(&rem, &b_shift_mul(g, &q, shift));
    }
    assert!(b_is_zero(&rem), "gcd division must leave no remainder");
    b_trim(&mut quo);
    quo
}

/// Gcd of bivariate polynomials via a primitive pseudo-remainder sequence.
/// The result is normalized so its graded-lex leading coefficient is 1.
fn b_gcd(a: &BPoly, b: &BPoly) -> BPoly {
    if b_is_zero(a) {
        return b.clone();
    }
    if b_is_zero(b) {
        return a.clone();
    }
    let ca = b_content(a);
    let cb = b_content(b);
    let cg = u_gcd(&ca, &cb);
    let mut x = b_scalar_normalize(b_div_u_exact(a, &ca));
    let mut y = b_scalar_normalize(b_div_u_exact(b, &cb));
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.len() == 1 {
            // The second operand is a primitive element of Q(i)[w2]; common
            // divisors of the primitive pair are units, so only the content
            // gcd survives.  A genuinely univariate common factor is already
            // inside `cg` unless y itself divides x's content (x primitive),
            // so the primitive part of the gcd is 1.
            let g = vec![cg];
            return b_normalize_leading(g);
        }
        let r = b_prem(&x, &y);
        if b_is_zero(&r) {
            let g = b_scale_u(&y, &cg);
            return b_normalize_leading(g);
        }
        let cr = b_content(&r);
        x = y;
        y = b_scalar_normalize(b_div_u_exact(&r, &cr));
    }
}

/// Scales a polynomial so its graded-lex leading coefficient is exactly 1.
fn b_normalize_leading(g: BPoly) -> BPoly {
    let p = b_to_poly(&g);
    match p.leading_coeff() {
        None => g,
        Some(lc) => {
            let inv = lc.recip().expect("nonzero leading coefficient");
            b_from_poly(&p.scale(&inv))
        }
    }
}

// ---------------------------------------------------------------------------
// FreqScalar
// ---------------------------------------------------------------------------
//
// The denominator is kept as a sorted multiset of normalized factors rather
// than one expanded polynomial.  Every denominator this crate produces is a
// product of linear eigenvalue forms, so reduction never needs a polynomial
// gcd in the hot path: it is enough to probe each tracked factor with one
// exact division.  (The gcd machinery above still backs the one-shot
// reduction in [`FreqScalar::ratio`], which may receive arbitrary composite
// denominators from parsed input.)

/// Denominator factors with multiplicities, sorted structurally; each factor
/// is non-constant with graded-lex leading coefficient 1.
type DenFactors = Vec<(FreqPoly, u32)>;

/// Exact polynomial division: `Some(a / f)` when `f` divides `a` exactly,
/// `None` otherwise.  Leading-term reduction in graded-lex order.
fn poly_div_exact(a: &FreqPoly, f: &FreqPoly) -> Option<FreqPoly> {
    let lf = f.leading_exps()?;
    let lfc = f.leading_coeff()?.clone();
    let mut rem = a.clone();
    let mut quo = FreqPoly::zero();
    while !rem.is_zero() {
        let la = rem.leading_exps().expect("nonzero remainder");
        if la.0 < lf.0 || la.1 < lf.1 {
            return None;
        }
        let qe = (la.0 - lf.0, la.1 - lf.1);
        let qc = rem
            .leading_coeff()
            .expect("nonzero remainder")
            .checked_div(&lfc)
            .expect("nonzero leading coefficient");
        quo.add_term(qe, qc.clone());
        for (e, c) in f.terms() {
            rem.add_term((e.0 + qe.0, e.1 + qe.1), -&(c * &qc));
        }
    }
    Some(quo)
}

/// Splits a polynomial into its graded-lex leading coefficient and the
/// rescaled polynomial with leading coefficient 1.
fn normalize_factor(p: &FreqPoly) -> (Gaussian, FreqPoly) {
    let lc = p.leading_coeff().expect("nonzero factor").clone();
    if lc.is_one() {
        return (lc, p.clone());
    }
    let inv = lc.recip().expect("nonzero leading coefficient");
    (lc, p.scale(&inv))
}

/// Sorts factors and merges equal ones.
fn den_sorted(mut den: DenFactors) -> DenFactors {
    den.retain(|(_, k)| *k > 0);
    den.sort();
    let mut out: DenFactors = Vec::new();
    for (f, k) in den {
        match out.last_mut() {
            Some(last) if last.0 == f => last.1 += k,
            _ => out.push((f, k)),
        }
    }
    out
}

/// Multiset union of two sorted factor lists.
fn den_union(a: &DenFactors, b: &DenFactors) -> DenFactors {
    let mut out = a.clone();
    out.extend(b.iter().cloned());
    den_sorted(out)
}

/// Splits two sorted factor lists into (shared, only-in-a, only-in-b).
fn den_split(a: &DenFactors, b: &DenFactors) -> (DenFactors, DenFactors, DenFactors) {
    let mut common = Vec::new();
    let mut only_a = Vec::new();
    let mut only_b = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                only_a.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                only_b.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let k = a[i].1.min(b[j].1);
                common.push((a[i].0.clone(), k));
                if a[i].1 > k {
                    only_a.push((a[i].0.clone(), a[i].1 - k));
                }
                if b[j].1 > k {
                    only_b.push((b[j].0.clone(), b[j].1 - k));
                }
                i += 1;
                j += 1;
            }
        }
    }
    only_a.extend(a[i..].iter().cloned());
    only_b.extend(b[j..].iter().cloned());
    (common, only_a, only_b)
}

/// Expands a factor list into one polynomial.
fn den_expand(den: &DenFactors) -> FreqPoly {
    let mut out = FreqPoly::one();
    for (f, k) in den {
        for _ in 0..*k {
            out = &out * f;
        }
    }
    out
}

/// A rational function in `w1`, `w2` over the Gaussian rationals, kept in
/// canonical form: the denominator is a sorted multiset of non-constant
/// factors with graded-lex leading coefficient 1, none of which divides the
/// numerator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreqScalar {
    num: FreqPoly,
    den: DenFactors,
}

impl FreqScalar {
    /// The additive identity.
    pub fn zero() -> Self {
        FreqScalar { num: FreqPoly::zero(), den: Vec::new() }
    }

    /// Restores the invariants from raw parts: drops factors that divide the
    /// numerator and resets the denominator of zero.
    fn assemble(num: FreqPoly, den: DenFactors) -> Self {
        if num.is_zero() {
            return FreqScalar::zero();
        }
        let mut num = num;
        let mut den = den_sorted(den);
        den.retain_mut(|(f, k)| {
            while *k > 0 {
                match poly_div_exact(&num, f) {
                    Some(q) => {
                        num = q;
                        *k -= 1;
                    }
                    None => break,
                }
            }
            *k > 0
        });
        FreqScalar { num, den }
    }

    /// The multiplicative identity.
    pub fn one() -> Self {
        FreqScalar::from_poly(FreqPoly::one())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        FreqScalar::from_gaussian(Gaussian::i())
    }

    /// The frequency symbol `w1`.
    pub fn w1() -> Self {
        FreqScalar::from_poly(FreqPoly::w1())
    }

    /// The frequency symbol `w2`.
    pub fn w2() -> Self {
        FreqScalar::from_poly(FreqPoly::w2())
    }

    /// Embeds a polynomial.
    pub fn from_poly(num: FreqPoly) -> Self {
        FreqScalar { num, den: Vec::new() }
    }

    /// Embeds a Gaussian constant.
    pub fn from_gaussian(c: Gaussian) -> Self {
        FreqScalar::from_poly(FreqPoly::constant(c))
    }

    /// Embeds a plain rational.
    pub fn from_rational(r: Rational) -> Self {
        FreqScalar::from_gaussian(Gaussian::from_rational(r))
    }

    /// Builds the reduced ratio `num/den`, rejecting a zero denominator.
    /// The polynomial gcd runs once here, so composite denominators from
    /// parsed input still reduce fully.
    pub fn ratio(num: FreqPoly, den: FreqPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(FreqScalar::zero());
        }
        if let Some(c) = den.as_constant() {
            let inv = c.recip().expect("nonzero denominator");
            return Ok(FreqScalar::from_poly(num.scale(&inv)));
        }
        let (num, den) = if num.as_constant().is_some() {
            (num, den)
        } else {
            let bn = b_from_poly(&num);
            let bd = b_from_poly(&den);
            let g = b_gcd(&bn, &bd);
            if b_to_poly(&g).as_constant().is_none_or(|c| !c.is_one()) {
                (b_to_poly(&b_div_exact(&bn, &g)), b_to_poly(&b_div_exact(&bd, &g)))
            } else {
                (num, den)
            }
        };
        if let Some(c) = den.as_constant() {
            let inv = c.recip().expect("nonzero denominator");
            return Ok(FreqScalar::from_poly(num.scale(&inv)));
        }
        let (lc, f) = normalize_factor(&den);
        let inv = lc.recip().expect("nonzero leading coefficient");
        Ok(FreqScalar::assemble(num.scale(&inv), vec![(f, 1)]))
    }

    /// Numerator of the canonical form.
    pub fn num(&self) -> &FreqPoly {
        &self.num
    }

    /// Denominator of the canonical form, expanded into one polynomial.
    pub fn den(&self) -> FreqPoly {
        den_expand(&self.den)
    }

    /// True for the zero scalar.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The underlying polynomial when the denominator is 1.
    pub fn as_poly(&self) -> Option<FreqPoly> {
        self.den.is_empty().then(|| self.num.clone())
    }

    /// The Gaussian constant value when there is no frequency dependence.
    pub fn as_gaussian(&self) -> Option<Gaussian> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    /// The rational value when the scalar is a plain real rational.
    pub fn as_rational(&self) -> Option<Rational> {
        self.as_gaussian().and_then(|g| g.as_rational())
    }

    /// Conjugates coefficients (frequency symbols are real and fixed).
    pub fn conj(&self) -> FreqScalar {
        // A normalized factor keeps leading coefficient 1 under conjugation,
        // so only re-sorting is needed.
        let den = den_sorted(
            self.den
                .iter()
                .map(|(f, k)| (f.conj(), *k))
                .collect(),
        );
        FreqScalar { num: self.num.conj(), den }
    }

    /// Exact division, failing on a zero divisor.
    pub fn checked_div(&self, rhs: &FreqScalar) -> Result<FreqScalar> {
        Ok(self * &rhs.recip()?)
    }

    /// Multiplicative inverse, failing on zero.
    pub fn recip(&self) -> Result<FreqScalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = den_expand(&self.den);
        if let Some(c) = self.num.as_constant() {
            let inv = c.recip().expect("nonzero constant");
            return Ok(FreqScalar::from_poly(num.scale(&inv)));
        }
        let (lc, f) = normalize_factor(&self.num);
        let inv = lc.recip().expect("nonzero leading coefficient");
        // The old denominator shares no factor with the old numerator, so no
        // reduction pass is needed here.
        Ok(FreqScalar { num: num.scale(&inv), den: vec![(f, 1)] })
    }

    /// Small non-negative power.
    pub fn pow(&self, e: u32) -> FreqScalar {
        let mut out = FreqScalar::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

}

impl From<Rational> for FreqScalar {
    fn from(r: Rational) -> Self {
        FreqScalar::from_rational(r)
    }
}

impl From<Gaussian> for FreqScalar {
    fn from(c: Gaussian) -> Self {
        FreqScalar::from_gaussian(c)
    }
}

impl std::ops::Add for &FreqScalar {
    type Output = FreqScalar;
    fn add(self, rhs: &FreqScalar) -> FreqScalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (common, only_a, only_b) = den_split(&self.den, &rhs.den);
        let num = &(&self.num * &den_expand(&only_b)) + &(&rhs.num * &den_expand(&only_a));
        let den = den_union(&den_union(&common, &only_a), &only_b);
        FreqScalar::assemble(num, den)
    }
}

impl std::ops::Sub for &FreqScalar {
    type Output = FreqScalar;
    fn sub(self, rhs: &FreqScalar) -> FreqScalar {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &FreqScalar {
    type Output = FreqScalar;
    fn mul(self, rhs: &FreqScalar) -> FreqScalar {
        if self.is_zero() || rhs.is_zero() {
            return FreqScalar::zero();
        }
        FreqScalar::assemble(&self.num * &rhs.num, den_union(&self.den, &rhs.den))
    }
}

impl std::ops::Neg for &FreqScalar {
    type Output = FreqScalar;
    fn neg(self) -> FreqScalar {
        FreqScalar { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for FreqScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            write!(f, "{}", poly_string(&self.num))
        } else {
            write!(f, "({})/({})", poly_string(&self.num), poly_string(&den_expand(&self.den)))
        }
    }
}

impl FromStr for FreqScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_scalar(s)
    }
}

// ---------------------------------------------------------------------------
// Named arithmetic entry points
// ---------------------------------------------------------------------------

/// Arithmetic operation selector for [`scalar_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
    Div,
}

/// Performs one exact arithmetic operation on the widest scalar type.
/// Division by zero is reported, never panics.
pub fn scalar_arith(a: &FreqScalar, b: &FreqScalar, kind: ArithKind) -> Result<FreqScalar> {
    match kind {
        ArithKind::Add => Ok(a + b),
        ArithKind::Sub => Ok(a - b),
        ArithKind::Mul => Ok(a * b),
        ArithKind::Div => a.checked_div(b),
    }
}

/// Structural zero test on the canonical form.
pub fn is_zero(a: &FreqScalar) -> bool {
    a.is_zero()
}

// ---------------------------------------------------------------------------
// Expression parser
// ---------------------------------------------------------------------------

mod parse {
    //! Recursive-descent parser for scalar expressions.
    //!
    //! Grammar (whitespace ignored):
    //! ```text
    //! expr   := term  (('+' | '-') term)*
    //! term   := factor (('*' | '/') factor)*
    //! factor := ('-' | '+')* power
    //! power  := atom ('^' digits)?
    //! atom   := '(' expr ')' | 'w1' | 'w2' | 'i' | number
    //! number := digits ('/' digits)? 'i'?     -- maximal munch
    //! ```
    //! The `number` token eats an embedded `/` only when immediately
    //! followed by digits, so ratios of rationals like `1/3i` parse as the
    //! Gaussian constant `(1/3)i` while `1/(w1-w2)` keeps `/` as division.

    use super::*;

    #[derive(Debug, Clone, PartialEq, Eq)]
    enum Tok {
        Num(Rational, bool), // value, trailing-i flag
        W1,
        W2,
        I,
        Plus,
        Minus,
        Star,
        Slash,
        Caret,
        LParen,
        RParen,
    }

    struct Lexer<'a> {
        src: &'a [u8],
        pos: usize,
    }

    impl<'a> Lexer<'a> {
        fn new(src: &'a str) -> Self {
            Lexer { src: src.as_bytes(), pos: 0 }
        }

        fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
            let mut out = Vec::new();
            while self.pos < self.src.len() {
                let start = self.pos;
                let c = self.src[self.pos];
                match c {
                    b' ' | b'\t' | b'\n' | b'\r' => {
                        self.pos += 1;
                    }
                    b'+' => self.push_simple(&mut out, Tok::Plus),
                    b'-' => self.push_simple(&mut out, Tok::Minus),
                    b'*' => self.push_simple(&mut out, Tok::Star),
                    b'/' => self.push_simple(&mut out, Tok::Slash),
                    b'^' => self.push_simple(&mut out, Tok::Caret),
                    b'(' => self.push_simple(&mut out, Tok::LParen),
                    b')' => self.push_simple(&mut out, Tok::RParen),
                    b'w' => {
                        let tok = match self.src.get(self.pos + 1) {
                            Some(b'1') => Tok::W1,
                            Some(b'2') => Tok::W2,
                            _ => {
                                return Err(Error::parse(
                                    format!("char {start}"),
                                    "expected w1 or w2",
                                ))
                            }
                        };
                        self.pos += 2;
                        out.push((start, tok));
                    }
                    b'i' => {
                        self.pos += 1;
                        out.push((start, Tok::I));
                    }
                    b'0'..=b'9' => {
                        let tok = self.number()?;
                        out.push((start, tok));
                    }
                    _ => {
                        return Err(Error::parse(
                            format!("char {start}"),
                            format!("unexpected character `{}`", c as char),
                        ))
                    }
                }
            }
            Ok(out)
        }

        fn push_simple(&mut self, out: &mut Vec<(usize, Tok)>, tok: Tok) {
            out.push((self.pos, tok));
            self.pos += 1;
        }

        fn digits(&mut self) -> String {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
        }

        fn number(&mut self) -> Result<Tok> {
            let start = self.pos;
            let numer = self.digits();
            let mut denom = None;
            if self.src.get(self.pos) == Some(&b'/')
                && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)
            {
                self.pos += 1;
                denom = Some(self.digits());
            }
            let imag = if self.src.get(self.pos) == Some(&b'i') {
                self.pos += 1;
                true
            } else {
                false
            };
            let n: BigInt = numer.parse().map_err(|_| {
                Error::parse(format!("char {start}"), "bad integer literal")
            })?;
            let d: BigInt = match &denom {
                None => BigInt::from(1),
                Some(ds) => ds.parse().map_err(|_| {
                    Error::parse(format!("char {start}"), "bad integer literal")
                })?,
            };
            if d.is_zero() {
                return Err(Error::parse(
                    format!("char {start}"),
                    "zero denominator in numeric literal",
                ));
            }
            Ok(Tok::Num(Rational::from_big(BigRational::new(n, d)), imag))
        }
    }

    struct Parser {
        toks: Vec<(usize, Tok)>,
        pos: usize,
    }

    impl Parser {
        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos).map(|(_, t)| t)
        }

        fn next_pos(&self) -> usize {
            self.toks
                .get(self.pos)
                .map(|(p, _)| *p)
                .unwrap_or(usize::MAX)
        }

        fn bump(&mut self) -> Option<Tok> {
            let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
            self.pos += 1;
            t
        }

        fn err(&self, msg: &str) -> Error {
            let loc = if self.next_pos() == usize::MAX {
                "end of input".to_string()
            } else {
                format!("char {}", self.next_pos())
            };
            Error::parse(loc, msg)
        }

        fn expr(&mut self) -> Result<FreqScalar> {
            let mut acc = self.term()?;
            loop {
                match self.peek() {
                    Some(Tok::Plus) => {
                        self.bump();
                        let rhs = self.term()?;
                        acc = &acc + &rhs;
                    }
                    Some(Tok::Minus) => {
                        self.bump();
                        let rhs = self.term()?;
                        acc = &acc - &rhs;
                    }
                    _ => return Ok(acc),
                }
            }
        }

        fn term(&mut self) -> Result<FreqScalar> {
            let mut acc = self.factor()?;
            loop {
                match self.peek() {
                    Some(Tok::Star) => {
                        self.bump();
                        let rhs = self.factor()?;
                        acc = &acc * &rhs;
                    }
                    Some(Tok::Slash) => {
                        self.bump();
                        let rhs = self.factor()?;
                        acc = acc
                            .checked_div(&rhs)
                            .map_err(|_| self.err("division by zero"))?;
                    }
                    _ => return Ok(acc),
                }
            }
        }

        fn factor(&mut self) -> Result<FreqScalar> {
            let mut negate = false;
            loop {
                match self.peek() {
                    Some(Tok::Minus) => {
                        negate = !negate;
                        self.bump();
                    }
                    Some(Tok::Plus) => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            let v = self.power()?;
            Ok(if negate { -&v } else { v })
        }

        fn power(&mut self) -> Result<FreqScalar> {
            let base = self.atom()?;
            if self.peek() == Some(&Tok::Caret) {
                self.bump();
                match self.bump() {
                    Some(Tok::Num(r, false)) => {
                        let big = r.as_big();
                        if !big.denom().is_one() || big.is_negative() {
                            return Err(self.err("exponent must be a non-negative integer"));
                        }
                        let e: u32 = big.numer().try_into().map_err(|_| {
                            self.err("exponent too large")
                        })?;
                        Ok(base.pow(e))
                    }
                    _ => Err(self.err("expected integer exponent after ^")),
                }
            } else {
                Ok(base)
            }
        }

        fn atom(&mut self) -> Result<FreqScalar> {
            match self.bump() {
                Some(Tok::LParen) => {
                    let v = self.expr()?;
                    match self.bump() {
                        Some(Tok::RParen) => Ok(v),
                        _ => Err(self.err("expected closing parenthesis")),
                    }
                }
                Some(Tok::W1) => Ok(FreqScalar::w1()),
                Some(Tok::W2) => Ok(FreqScalar::w2()),
                Some(Tok::I) => Ok(FreqScalar::i()),
                Some(Tok::Num(r, imag)) => {
                    let g = if imag {
                        Gaussian::new(Rational::zero(), r)
                    } else {
                        Gaussian::from_rational(r)
                    };
                    Ok(FreqScalar::from_gaussian(g))
                }
                _ => Err(self.err("expected a value")),
            }
        }
    }

    /// Parses a full scalar expression; trailing input is an error.
    pub fn parse_scalar(src: &str) -> Result<FreqScalar> {
        let toks = Lexer::new(src).tokens()?;
        if toks.is_empty() {
            return Err(Error::parse("char 0", "empty scalar expression"));
        }
        let mut p = Parser { toks, pos: 0 };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(v)
    }
}
