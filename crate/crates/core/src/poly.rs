//! Homogeneous multivariate polynomials stored as a sparse map from
//! monomials (graded-lex order) to nonzero coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

/// Exponent vector. Ordered graded-lexicographically: higher total degree
/// first compares greater, ties broken by the exponent of the first
/// variable, then the second, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    /// Exact value of the monomial at `coords`.
    pub fn eval(&self, field: &FieldSpec, coords: &[Scalar]) -> Scalar {
        let mut acc = field.one();
        for (e, c) in self.0.iter().zip(coords) {
            if *e > 0 {
                acc = field.mul(&acc, &field.pow(c, *e));
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of the given degree in `nvars` variables, in descending
/// graded-lex order (`x^d` first). Length is `C(degree + nvars - 1, nvars - 1)`.
pub fn monomial_basis(nvars: usize, degree: u32) -> Vec<Monomial> {
    fn fill(prefix: &mut Vec<u32>, slots: usize, left: u32, out: &mut Vec<Monomial>) {
        if slots == 1 {
            prefix.push(left);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            fill(prefix, slots - 1, left - e, out);
            prefix.pop();
        }
    }
    assert!(nvars >= 1, "monomial basis needs at least one variable");
    let mut out = Vec::new();
    fill(&mut Vec::with_capacity(nvars), nvars, degree, &mut out);
    out
}

/// Default variable names by number of variables.
pub fn default_var_names(nvars: usize) -> Vec<String> {
    let names: &[&str] = match nvars {
        1 => &["x"],
        2 => &["x", "y"],
        3 => &["x", "y", "z"],
        4 => &["x", "y", "z", "w"],
        5 => &["x", "y", "z", "t", "u"],
        6 => &["x", "y", "z", "w", "t", "v"],
        _ => return (0..nvars).map(|i| format!("x{i}")).collect(),
    };
    names.iter().map(|s| s.to_string()).collect()
}

/// A homogeneous polynomial. The zero polynomial keeps an explicit degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomoPoly {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, Scalar>,
    field: FieldSpec,
}

/// Why a square root could not be extracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoSqrt {
    OddDegree,
    CharTwo,
    LeadingCoeffNotSquare,
    NotASquare,
}

impl HomoPoly {
    pub fn zero(nvars: usize, degree: u32, field: FieldSpec) -> Self {
        HomoPoly {
            nvars,
            degree,
            terms: BTreeMap::new(),
            field,
        }
    }

    pub fn constant(nvars: usize, c: Scalar, field: FieldSpec) -> Self {
        Self::from_terms(nvars, 0, field, [(Monomial::one(nvars), c)]).expect("constant term")
    }

    pub fn var(nvars: usize, i: usize, field: FieldSpec) -> Self {
        Self::from_terms(nvars, 1, field, [(Monomial::var(nvars, i), field.one())])
            .expect("variable")
    }

    /// Linear form `sum coeffs[i] * x_i`.
    pub fn linear(coeffs: &[Scalar], field: FieldSpec) -> Self {
        let n = coeffs.len();
        Self::from_terms(
            n,
            1,
            field,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (Monomial::var(n, i), c.clone())),
        )
        .expect("linear form")
    }

    /// Builds a polynomial of the stated degree, summing repeated monomials
    /// and dropping zero coefficients.
    pub fn from_terms(
        nvars: usize,
        degree: u32,
        field: FieldSpec,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Result<Self> {
        let mut poly = HomoPoly::zero(nvars, degree, field);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::DimensionMismatch(format!(
                    "monomial in {} variables, expected {nvars}",
                    m.nvars()
                )));
            }
            if m.degree() != degree {
                return Err(Error::NotHomogeneous(degree, m.degree()));
            }
            field.check(&c)?;
            poly.add_term(m, c);
        }
        Ok(poly)
    }

    /// Dense coefficients in `monomial_basis(nvars, degree)` order.
    pub fn from_dense(nvars: usize, degree: u32, field: FieldSpec, coeffs: &[Scalar]) -> Self {
        let basis = monomial_basis(nvars, degree);
        assert_eq!(basis.len(), coeffs.len());
        Self::from_terms(
            nvars,
            degree,
            field,
            basis.into_iter().zip(coeffs.iter().cloned()),
        )
        .expect("dense coefficients")
    }

    pub fn to_dense(&self) -> Vec<Scalar> {
        monomial_basis(self.nvars, self.degree)
            .iter()
            .map(|m| self.coeff(m))
            .collect()
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        let f = self.field;
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = f.add(existing, &c);
                if f.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                if !f.is_zero(&c) {
                    self.terms.insert(m, c);
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    fn same_space(&self, other: &HomoPoly) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &HomoPoly) -> Result<HomoPoly> {
        self.same_space(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "cannot add degree {} and degree {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> HomoPoly {
        self.scale(&self.field.from_i64(-1))
    }

    pub fn sub(&self, other: &HomoPoly) -> Result<HomoPoly> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> HomoPoly {
        let f = self.field;
        let mut out = HomoPoly::zero(self.nvars, self.degree, f);
        if f.is_zero(c) {
            return out;
        }
        out.terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), f.mul(a, c)))
            .collect();
        out
    }

    pub fn mul(&self, other: &HomoPoly) -> Result<HomoPoly> {
        self.same_space(other)?;
        let f = self.field;
        let mut out = HomoPoly::zero(self.nvars, self.degree + other.degree, f);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), f.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> HomoPoly {
        self.mul(self).expect("same space")
    }

    /// Reads the polynomial in a larger ring: variable `i` becomes variable
    /// `positions[i]` of `new_nvars`.
    pub fn embed(&self, new_nvars: usize, positions: &[usize]) -> HomoPoly {
        assert_eq!(positions.len(), self.nvars);
        let mut out = HomoPoly::zero(new_nvars, self.degree, self.field);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_nvars];
            for (i, &pos) in positions.iter().enumerate() {
                e[pos] = m.0[i];
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    fn check_coords(&self, coords: &[Scalar]) -> Result<()> {
        if coords.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for {} variables",
                coords.len(),
                self.nvars
            )));
        }
        coords.iter().try_for_each(|c| self.field.check(c))
    }

    /// Direct monomial-sum evaluation.
    pub fn eval(&self, coords: &[Scalar]) -> Result<Scalar> {
        self.check_coords(coords)?;
        let f = self.field;
        Ok(self.terms.iter().fold(f.zero(), |acc, (m, c)| {
            f.add(&acc, &f.mul(c, &m.eval(&f, coords)))
        }))
    }

    /// Recursive Horner evaluation, one variable at a time. Independent of
    /// [`HomoPoly::eval`]; used to double-check scan results.
    pub fn eval_horner(&self, coords: &[Scalar]) -> Result<Scalar> {
        self.check_coords(coords)?;
        let terms: Vec<(&[u32], &Scalar)> =
            self.terms.iter().map(|(m, c)| (m.exponents(), c)).collect();
        Ok(horner(&self.field, &terms, coords))
    }

    pub fn partial(&self, i: usize) -> HomoPoly {
        assert!(self.degree >= 1, "derivative of a constant");
        let f = self.field;
        let mut out = HomoPoly::zero(self.nvars, self.degree - 1, f);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[i] -= 1;
            out.add_term(Monomial(d), f.mul(c, &f.from_u64(e as u64)));
        }
        out
    }

    pub fn gradient(&self) -> Vec<HomoPoly> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// Matrix of second partials evaluated at `coords`.
    pub fn hessian_at(&self, coords: &[Scalar]) -> Result<Vec<Vec<Scalar>>> {
        self.check_coords(coords)?;
        if self.degree < 2 {
            return Ok(vec![vec![self.field.zero(); self.nvars]; self.nvars]);
        }
        let grad = self.gradient();
        let mut h = vec![vec![self.field.zero(); self.nvars]; self.nvars];
        for i in 0..self.nvars {
            for j in i..self.nvars {
                let v = grad[i].partial(j).eval(coords)?;
                h[j][i] = v.clone();
                h[i][j] = v;
            }
        }
        Ok(h)
    }

    /// Substitutes variable `j` by the linear form with coefficient vector
    /// `images[j]` in `new_nvars` variables.
    pub fn compose_linear(&self, images: &[Vec<Scalar>], new_nvars: usize) -> Result<HomoPoly> {
        if images.len() != self.nvars || images.iter().any(|v| v.len() != new_nvars) {
            return Err(Error::DimensionMismatch("linear substitution shape".into()));
        }
        let f = self.field;
        let forms: Vec<HomoPoly> = images.iter().map(|v| HomoPoly::linear(v, f)).collect();
        let mut powers: Vec<Vec<HomoPoly>> = forms
            .iter()
            .map(|_| vec![HomoPoly::constant(new_nvars, f.one(), f)])
            .collect();
        let mut out = HomoPoly::zero(new_nvars, self.degree, f);
        for (m, c) in &self.terms {
            let mut prod = HomoPoly::constant(new_nvars, c.clone(), f);
            for (j, &e) in m.0.iter().enumerate() {
                while powers[j].len() <= e as usize {
                    let next = powers[j].last().unwrap().mul(&forms[j])?;
                    powers[j].push(next);
                }
                if e > 0 {
                    prod = prod.mul(&powers[j][e as usize])?;
                }
            }
            for (pm, pc) in prod.terms {
                out.add_term(pm, pc);
            }
        }
        Ok(out)
    }

    /// Restricts to the hyperplane `plane = 0` by eliminating the chart
    /// variable. The result lives in the remaining `nvars - 1` variables, in
    /// their original order.
    pub fn restrict_to_plane(&self, plane: &HomoPoly, chart: usize) -> Result<HomoPoly> {
        self.same_space(plane)?;
        if plane.degree != 1 {
            return Err(Error::DegreeMismatch("plane must be a linear form".into()));
        }
        let f = self.field;
        let pivot = plane.coeff(&Monomial::var(self.nvars, chart));
        if f.is_zero(&pivot) {
            return Err(Error::BadChart);
        }
        let inv = f.inv(&pivot).unwrap();
        let n = self.nvars - 1;
        let mut images = Vec::with_capacity(self.nvars);
        for j in 0..self.nvars {
            let mut v = vec![f.zero(); n];
            if j == chart {
                for (slot, k) in (0..self.nvars).filter(|&k| k != chart).enumerate() {
                    let a = plane.coeff(&Monomial::var(self.nvars, k));
                    v[slot] = f.neg(&f.mul(&a, &inv));
                }
            } else {
                v[if j < chart { j } else { j - 1 }] = f.one();
            }
            images.push(v);
        }
        self.compose_linear(&images, n)
    }

    /// Exact square root by coefficient matching from the leading term. The
    /// root's leading coefficient is the principal square root of this
    /// polynomial's leading coefficient.
    pub fn poly_sqrt(&self) -> Result<HomoPoly, NoSqrt> {
        let f = self.field;
        if self.degree % 2 == 1 {
            return Err(NoSqrt::OddDegree);
        }
        if f.characteristic() == 2 {
            return Err(NoSqrt::CharTwo);
        }
        let half = self.degree / 2;
        let mut root = HomoPoly::zero(self.nvars, half, f);
        let Some((lm, lc)) = self.leading_term() else {
            return Ok(root);
        };
        if lm.0.iter().any(|e| e % 2 == 1) {
            return Err(NoSqrt::NotASquare);
        }
        let c0 = f.sqrt(lc).ok_or(NoSqrt::LeadingCoeffNotSquare)?;
        let m0 = Monomial(lm.0.iter().map(|e| e / 2).collect());
        let two_lead = f.add(&c0, &c0);
        root.terms.insert(m0.clone(), c0);
        let max_terms = monomial_basis(self.nvars, half).len();
        loop {
            let rem = self.sub(&root.square()).expect("same space");
            let Some((rm, rc)) = rem.leading_term() else {
                return Ok(root);
            };
            // the next term t satisfies lt(rem) = 2 * lt(root) * t
            let Some(tm) = rm.div(&m0) else {
                return Err(NoSqrt::NotASquare);
            };
            let smallest = root.terms.keys().next().unwrap();
            if tm >= *smallest || root.terms.len() >= max_terms {
                return Err(NoSqrt::NotASquare);
            }
            root.terms.insert(tm, f.div(rc, &two_lead));
        }
    }

    /// Exact quotient by a nonzero linear form, or `None` when it does not
    /// divide.
    pub fn divide_by_linear(&self, linear: &HomoPoly) -> Option<HomoPoly> {
        self.same_space(linear).ok()?;
        if linear.degree != 1 || linear.is_zero() {
            return None;
        }
        let f = self.field;
        if self.degree == 0 {
            return self.is_zero().then(|| self.clone());
        }
        let (lm, lc) = linear.leading_term().unwrap();
        let lc_inv = f.inv(lc).unwrap();
        let mut quotient = HomoPoly::zero(self.nvars, self.degree - 1, f);
        let mut rem = self.clone();
        while let Some((rm, rc)) = rem.leading_term() {
            let qm = rm.div(lm)?;
            let qc = f.mul(rc, &lc_inv);
            let step = HomoPoly::from_terms(self.nvars, self.degree - 1, f, [(qm, qc)]).ok()?;
            rem = rem.sub(&step.mul(linear).ok()?).ok()?;
            quotient = quotient.add(&step).ok()?;
        }
        Some(quotient)
    }

    /// Seeded random polynomial with every coefficient drawn independently:
    /// uniform on `F_p`, uniform integers in `[-9, 9]` over `QQ`. Coefficients
    /// are drawn in descending graded-lex order from a SplitMix64 stream.
    pub fn random(nvars: usize, degree: u32, field: FieldSpec, seed: u64) -> HomoPoly {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let coeffs: Vec<Scalar> = monomial_basis(nvars, degree)
            .iter()
            .map(|_| match field.modulus() {
                Some(p) => field.from_u64(rng.gen_range(0..p)),
                None => field.from_i64(rng.gen_range(-9..=9)),
            })
            .collect();
        HomoPoly::from_dense(nvars, degree, field, &coeffs)
    }

    /// Renders in the text grammar with the given variable names.
    pub fn to_text_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let abs = c.abs();
            let vars: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, e)| **e > 0)
                    .map(|(v, e)| {
                        if *e == 1 {
                            names[v].clone()
                        } else {
                            format!("{}^{}", names[v], e)
                        }
                    })
                    .collect();
            let unit = self.field.is_one(&abs);
            match (vars.is_empty(), unit) {
                (true, _) => out.push_str(&abs.to_string()),
                (false, true) => out.push_str(&vars.join("*")),
                (false, false) => {
                    out.push_str(&abs.to_string());
                    out.push('*');
                    out.push_str(&vars.join("*"));
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.to_text_with(&default_var_names(self.nvars))
    }
}

fn horner(field: &FieldSpec, terms: &[(&[u32], &Scalar)], coords: &[Scalar]) -> Scalar {
    if terms.is_empty() {
        return field.zero();
    }
    if coords.is_empty() {
        return terms
            .iter()
            .fold(field.zero(), |acc, (_, c)| field.add(&acc, c));
    }
    let mut by_power: BTreeMap<u32, Vec<(&[u32], &Scalar)>> = BTreeMap::new();
    for (e, c) in terms {
        by_power.entry(e[0]).or_default().push((&e[1..], *c));
    }
    let top = *by_power.keys().next_back().unwrap();
    let x = &coords[0];
    let mut acc = field.zero();
    for k in (0..=top).rev() {
        acc = field.mul(&acc, x);
        if let Some(group) = by_power.get(&k) {
            acc = field.add(&acc, &horner(field, group, &coords[1..]));
        }
    }
    acc
}

impl fmt::Display for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Serialize for HomoPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses `text` with the default variable names for `nvars`.
pub fn parse_poly(text: &str, nvars: usize, field: FieldSpec) -> Result<HomoPoly> {
    parse_poly_with(text, &default_var_names(nvars), field)
}

/// Parses the grammar
/// `poly ::= ['-'] term (('+'|'-') term)*`,
/// `term ::= [coeff '*'] var ['^' exp] ('*' var ['^' exp])* | coeff`.
/// Whitespace is insignificant. Homogeneity is enforced even for terms whose
/// coefficients cancel.
pub fn parse_poly_with(text: &str, names: &[String], field: FieldSpec) -> Result<HomoPoly> {
    let nvars = names.len();
    let src: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err(Error::Syntax("empty polynomial".into()));
    }
    let bytes = src.as_bytes();
    let mut pos = 0;
    let mut degree: Option<u32> = None;
    let mut terms = Vec::new();
    let mut first = true;
    while pos < bytes.len() {
        let mut negative = false;
        match bytes[pos] {
            b'+' | b'-' => {
                negative = bytes[pos] == b'-';
                pos += 1;
            }
            _ if !first => {
                return Err(Error::Syntax(format!(
                    "expected '+' or '-' at offset {pos}"
                )));
            }
            _ => {}
        }
        first = false;
        let end = src[pos..]
            .find(['+', '-'])
            .map(|i| pos + i)
            .unwrap_or(bytes.len());
        let (m, mut c) = parse_term(&src[pos..end], names, field)?;
        if negative {
            c = field.neg(&c);
        }
        match degree {
            None => degree = Some(m.degree()),
            Some(d) if d != m.degree() => return Err(Error::NotHomogeneous(d, m.degree())),
            _ => {}
        }
        terms.push((m, c));
        pos = end;
    }
    HomoPoly::from_terms(nvars, degree.unwrap_or(0), field, terms)
}

fn parse_term(text: &str, names: &[String], field: FieldSpec) -> Result<(Monomial, Scalar)> {
    if text.is_empty() {
        return Err(Error::Syntax("empty term".into()));
    }
    let mut exps = vec![0u32; names.len()];
    let mut coeff = field.one();
    for (i, factor) in text.split('*').enumerate() {
        if factor.is_empty() {
            return Err(Error::Syntax(format!("empty factor in {text:?}")));
        }
        if factor.as_bytes()[0].is_ascii_digit() {
            if i != 0 {
                return Err(Error::Syntax(format!(
                    "coefficient must lead the term in {text:?}"
                )));
            }
            coeff = field.parse_scalar(factor)?;
            continue;
        }
        let (name, exp) = match factor.split_once('^') {
            Some((n, e)) => (
                n,
                e.parse::<u32>()
                    .map_err(|_| Error::Syntax(format!("bad exponent in {factor:?}")))?,
            ),
            None => (factor, 1),
        };
        if name.is_empty()
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            || name.as_bytes()[0].is_ascii_digit()
        {
            return Err(Error::Syntax(format!("bad variable in {factor:?}")));
        }
        let v = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        exps[v] += exp;
    }
    Ok((Monomial(exps), coeff))
}
