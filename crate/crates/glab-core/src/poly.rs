//! Sparse multivariate polynomials over an exact field.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors; zero coefficients
//! are never stored, so structural equality is semantic equality. Variables
//! print as `t0, t1, ...` and the printed form round-trips through
//! [`MultiPoly::parse`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{GlabError, Result};
use crate::jet::Jet;
use crate::matrix::Matrix;
use crate::scalar::{parse_scalar, FieldTag, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    field: FieldTag,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MultiPoly {
    pub fn zero(field: FieldTag, nvars: usize) -> MultiPoly {
        MultiPoly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar, nvars: usize) -> MultiPoly {
        let mut p = MultiPoly::zero(c.field(), nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn variable(field: FieldTag, i: usize, nvars: usize) -> MultiPoly {
        assert!(i < nvars, "variable index {i} out of {nvars}");
        let mut e = vec![0u32; nvars];
        e[i] = 1;
        let mut p = MultiPoly::zero(field, nvars);
        p.terms.insert(e, Scalar::one(field));
        p
    }

    pub fn monomial(c: Scalar, exps: Vec<u32>) -> MultiPoly {
        let mut p = MultiPoly::zero(c.field(), exps.len());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Scalar {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.field))
    }

    fn check_compatible(&self, other: &MultiPoly) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        assert_eq!(self.field, other.field, "field mismatch");
    }

    fn insert_term(&mut self, e: Vec<u32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, by: &Scalar) -> MultiPoly {
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            let v = c * by;
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    /// Maximum total degree of a term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == d)
    }

    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar> {
        if point.len() != self.nvars {
            return Err(GlabError::LengthMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = Scalar::zero(self.field);
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    term = &term * &x.pow(k);
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    pub fn eval_jet(&self, point: &[Jet]) -> Result<Jet> {
        if point.len() != self.nvars {
            return Err(GlabError::LengthMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let ndirs = point.first().map_or(0, Jet::ndirs);
        let mut acc = Jet::zero(self.field, ndirs);
        for (e, c) in &self.terms {
            let mut term = Jet::constant(c.clone(), ndirs);
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term = term.mul(x);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Substitute a polynomial for each variable.
    pub fn eval_poly(&self, subs: &[MultiPoly]) -> Result<MultiPoly> {
        if subs.len() != self.nvars {
            return Err(GlabError::LengthMismatch {
                expected: self.nvars,
                got: subs.len(),
            });
        }
        let out_nvars = subs.first().map_or(0, MultiPoly::nvars);
        for s in subs {
            if s.nvars() != out_nvars {
                return Err(GlabError::ShapeMismatch(
                    "substituted polynomials disagree on variable count".into(),
                ));
            }
            if s.field() != self.field {
                return Err(GlabError::FieldMismatch);
            }
        }
        let mut acc = MultiPoly::zero(self.field, out_nvars);
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(c.clone(), out_nvars);
            for (s, &k) in subs.iter().zip(e) {
                for _ in 0..k {
                    term = term.mul(s);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// The same polynomial in a larger variable ring, with variable `i`
    /// renamed to `offset + i`.
    pub fn extend_vars(&self, new_nvars: usize, offset: usize) -> MultiPoly {
        assert!(offset + self.nvars <= new_nvars, "extension does not fit");
        let mut out = MultiPoly::zero(self.field, new_nvars);
        for (e, c) in &self.terms {
            let mut exps = vec![0u32; new_nvars];
            exps[offset..offset + self.nvars].copy_from_slice(e);
            out.terms.insert(exps, c.clone());
        }
        out
    }

    /// Symbolic partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> MultiPoly {
        assert!(i < self.nvars, "variable index {i} out of {}", self.nvars);
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            let coeff = c * &Scalar::from_int(self.field, e[i] as i64);
            out.insert_term(d, coeff);
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// Parse the printed grammar: signed sum of `c*t0^a*t1^b` style terms.
    pub fn parse(s: &str, nvars: usize, field: FieldTag) -> Result<MultiPoly> {
        let mut out = MultiPoly::zero(field, nvars);
        let s = s.trim();
        if s.is_empty() {
            return Err(GlabError::Parse("empty polynomial".into()));
        }
        // split into signed terms at top level (no parentheses in the grammar)
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut seen_any = false;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '+' | '-' if seen_any && !cur.trim().is_empty() => {
                    terms.push((neg, std::mem::take(&mut cur)));
                    neg = ch == '-';
                }
                '-' if i == 0 || !seen_any => {
                    neg = !neg;
                    seen_any = true;
                }
                _ => {
                    cur.push(ch);
                    if !ch.is_whitespace() {
                        seen_any = true;
                    }
                }
            }
        }
        if !cur.trim().is_empty() {
            terms.push((neg, cur));
        }
        if terms.is_empty() {
            return Err(GlabError::Parse(format!("no terms in {s:?}")));
        }
        for (negated, term) in terms {
            let mut coeff = Scalar::one(field);
            let mut exps = vec![0u32; nvars];
            for factor in term.split('*') {
                let factor = factor.trim();
                if factor.is_empty() {
                    return Err(GlabError::Parse(format!("empty factor in {term:?}")));
                }
                if let Some(rest) = factor.strip_prefix('t') {
                    let (var_str, exp) = match rest.split_once('^') {
                        Some((v, e)) => {
                            let exp: u32 = e.trim().parse().map_err(|_| {
                                GlabError::Parse(format!("bad exponent in {factor:?}"))
                            })?;
                            (v.trim(), exp)
                        }
                        None => (rest.trim(), 1),
                    };
                    let idx: usize = var_str.parse().map_err(|_| {
                        GlabError::Parse(format!("bad variable name in {factor:?}"))
                    })?;
                    if idx >= nvars {
                        return Err(GlabError::Parse(format!(
                            "variable t{idx} out of range for {nvars} variables"
                        )));
                    }
                    exps[idx] += exp;
                } else {
                    coeff = &coeff * &parse_scalar(factor, field)?;
                }
            }
            if negated {
                coeff = -&coeff;
            }
            out.insert_term(exps, coeff);
        }
        Ok(out)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex(a, b));
        for (i, e) in keys.iter().enumerate() {
            let c = &self.terms[*e];
            let (neg, mag) = if c.is_negative() {
                (true, (-c).to_string())
            } else {
                (false, c.to_string())
            };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| {
                    if k == 1 {
                        format!("t{v}")
                    } else {
                        format!("t{v}^{k}")
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == "1" {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Graded lexicographic comparison of exponent vectors: total degree first,
/// then lexicographic, higher degree sorting first.
pub fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
    db.cmp(&da).then_with(|| b.cmp(a))
}

fn span_rank(polys: &[MultiPoly]) -> Result<usize> {
    let Some(first) = polys.first() else {
        return Ok(0);
    };
    let (field, nvars) = (first.field(), first.nvars());
    let mut monomials: BTreeSet<Vec<u32>> = BTreeSet::new();
    for p in polys {
        if p.field() != field {
            return Err(GlabError::FieldMismatch);
        }
        if p.nvars() != nvars {
            return Err(GlabError::ShapeMismatch(
                "polynomials disagree on variable count".into(),
            ));
        }
        monomials.extend(p.terms.keys().cloned());
    }
    let mut basis: Vec<Vec<u32>> = monomials.into_iter().collect();
    basis.sort_by(|a, b| grlex(a, b));
    let rows: Vec<Vec<Scalar>> = polys
        .iter()
        .map(|p| basis.iter().map(|e| p.coefficient(e)).collect())
        .collect();
    if basis.is_empty() {
        return Ok(0);
    }
    Ok(Matrix::from_rows(rows)?.rank())
}

/// Rank of a family of degree-`d` homogeneous polynomials as vectors of
/// coefficients over the graded-lexicographic monomial basis.
pub fn coefficient_rank(polys: &[MultiPoly], d: u32) -> Result<usize> {
    for p in polys {
        if !p.is_homogeneous_of(d) {
            return Err(GlabError::NonHomogeneous {
                expected: d as usize,
            });
        }
    }
    span_rank(polys)
}

/// Exact Jacobian of a polynomial map: entry (i, j) is the j-th partial of
/// the i-th component, evaluated at `point`. Computed from symbolic
/// derivatives; jet evaluation gives the same rows and is tested against it.
pub fn jacobian_at(polys: &[MultiPoly], point: &[Scalar]) -> Result<Matrix> {
    let Some(first) = polys.first() else {
        return Err(GlabError::ShapeMismatch("empty polynomial map".into()));
    };
    let nvars = first.nvars();
    let mut rows = Vec::with_capacity(polys.len());
    for p in polys {
        if p.nvars() != nvars {
            return Err(GlabError::ShapeMismatch(
                "polynomials disagree on variable count".into(),
            ));
        }
        let mut row = Vec::with_capacity(nvars);
        for j in 0..nvars {
            row.push(p.partial(j).eval(point)?);
        }
        rows.push(row);
    }
    Matrix::from_rows(rows)
}

/// A rectangular grid of polynomials sharing one variable ring; evaluating
/// every entry at a point yields an exact [`Matrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    field: FieldTag,
    nvars: usize,
    entries: Vec<Vec<MultiPoly>>,
}

impl PolyMatrix {
    pub fn from_entries(entries: Vec<Vec<MultiPoly>>) -> Result<PolyMatrix> {
        let Some(first_row) = entries.first() else {
            return Err(GlabError::ShapeMismatch("polynomial matrix with no rows".into()));
        };
        let Some(first) = first_row.first() else {
            return Err(GlabError::ShapeMismatch("polynomial matrix with no columns".into()));
        };
        let (field, nvars, ncols) = (first.field(), first.nvars(), first_row.len());
        for row in &entries {
            if row.len() != ncols {
                return Err(GlabError::ShapeMismatch(format!(
                    "ragged rows: {} vs {}",
                    ncols,
                    row.len()
                )));
            }
            for p in row {
                if p.field() != field {
                    return Err(GlabError::FieldMismatch);
                }
                if p.nvars() != nvars {
                    return Err(GlabError::ShapeMismatch(
                        "entries disagree on variable count".into(),
                    ));
                }
            }
        }
        Ok(PolyMatrix {
            field,
            nvars,
            entries,
        })
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nrows(&self) -> usize {
        self.entries.len()
    }

    pub fn ncols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r][c]
    }

    pub fn row(&self, r: usize) -> &[MultiPoly] {
        &self.entries[r]
    }

    pub fn eval(&self, point: &[Scalar]) -> Result<Matrix> {
        let rows = self
            .entries
            .iter()
            .map(|row| row.iter().map(|p| p.eval(point)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(rows)
    }

    pub fn eval_jet(&self, point: &[Jet]) -> Result<Vec<Vec<Jet>>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|p| p.eval_jet(point)).collect())
            .collect()
    }

    /// Per-row homogeneity degree; a row must be homogeneous of one degree
    /// (zero entries excepted) and not identically zero.
    pub fn row_degrees(&self) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(self.nrows());
        for (r, row) in self.entries.iter().enumerate() {
            let degree = row.iter().filter_map(MultiPoly::degree).max();
            let Some(degree) = degree else {
                return Err(GlabError::ShapeMismatch(format!("row {r} is identically zero")));
            };
            for p in row {
                if !p.is_homogeneous_of(degree) {
                    return Err(GlabError::NonHomogeneous {
                        expected: degree as usize,
                    });
                }
            }
            out.push(degree);
        }
        Ok(out)
    }
}
