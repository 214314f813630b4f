//! First-order jets: dual numbers carrying a value and a vector of
//! directional derivatives, one slot per independent direction.
//!
//! Arithmetic truncates at first order, so determinants of jet matrices give
//! both the value of the determinant and its gradient along the tracked
//! directions in a single exact pass.

use crate::error::{GlabError, Result};
use crate::scalar::{FieldTag, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet {
    pub value: Scalar,
    /// Derivative along each tracked direction; length is the direction count.
    pub inf: Vec<Scalar>,
}

impl Jet {
    pub fn constant(value: Scalar, ndirs: usize) -> Jet {
        let zero = Scalar::zero(value.field());
        Jet {
            value,
            inf: vec![zero; ndirs],
        }
    }

    /// The jet of a coordinate that is `value` and varies along direction `dir`.
    pub fn variable(value: Scalar, dir: usize, ndirs: usize) -> Jet {
        let mut j = Jet::constant(value, ndirs);
        j.inf[dir] = Scalar::one(j.value.field());
        j
    }

    pub fn zero(field: FieldTag, ndirs: usize) -> Jet {
        Jet::constant(Scalar::zero(field), ndirs)
    }

    pub fn one(field: FieldTag, ndirs: usize) -> Jet {
        Jet::constant(Scalar::one(field), ndirs)
    }

    pub fn field(&self) -> FieldTag {
        self.value.field()
    }

    pub fn ndirs(&self) -> usize {
        self.inf.len()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero() && self.inf.iter().all(Scalar::is_zero)
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.inf.len(), rhs.inf.len());
        Jet {
            value: &self.value + &rhs.value,
            inf: self
                .inf
                .iter()
                .zip(&rhs.inf)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.inf.len(), rhs.inf.len());
        Jet {
            value: &self.value - &rhs.value,
            inf: self
                .inf
                .iter()
                .zip(&rhs.inf)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.inf.len(), rhs.inf.len());
        // (a + eps u)(b + eps v) = ab + eps (a v + b u)
        Jet {
            value: &self.value * &rhs.value,
            inf: self
                .inf
                .iter()
                .zip(&rhs.inf)
                .map(|(u, v)| &(&self.value * v) + &(&rhs.value * u))
                .collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            value: -&self.value,
            inf: self.inf.iter().map(|x| -x).collect(),
        }
    }

    pub fn scale(&self, by: &Scalar) -> Jet {
        Jet {
            value: &self.value * by,
            inf: self.inf.iter().map(|x| x * by).collect(),
        }
    }

    /// Inverse exists exactly when the value part is invertible.
    pub fn inverse(&self) -> Result<Jet> {
        let vi = self.value.inverse()?;
        let vi2 = &vi * &vi;
        Ok(Jet {
            value: vi,
            inf: self.inf.iter().map(|u| -&(u * &vi2)).collect(),
        })
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet> {
        Ok(self.mul(&rhs.inverse()?))
    }
}

/// Determinant of a square jet matrix (row-major `n x n`).
///
/// Small sizes expand by cofactors; larger ones run fraction-free
/// elimination, which needs pivots with invertible value part and falls back
/// to cofactors when none is available.
pub fn jet_det(m: &[Vec<Jet>]) -> Result<Jet> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(GlabError::ShapeMismatch(format!(
                "jet determinant of {}x{}",
                n,
                row.len()
            )));
        }
    }
    if n == 0 {
        return Err(GlabError::ShapeMismatch("jet determinant of 0x0".into()));
    }
    if n <= 6 {
        Ok(det_cofactor(m, &(0..n).collect::<Vec<_>>()))
    } else {
        match det_bareiss(m) {
            Some(d) => Ok(d),
            None => Ok(det_cofactor(m, &(0..n).collect::<Vec<_>>())),
        }
    }
}

/// Cofactor expansion along the first remaining row, on the given columns.
fn det_cofactor(m: &[Vec<Jet>], cols: &[usize]) -> Jet {
    let row = m.len() - cols.len();
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let field = m[0][0].field();
    let ndirs = m[0][0].ndirs();
    let mut acc = Jet::zero(field, ndirs);
    for (idx, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_cofactor(m, &rest);
        let term = entry.mul(&minor);
        acc = if idx % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// Bareiss fraction-free elimination over the jet ring. Divisions are exact
/// polynomial identities, so they stay valid here provided every pivot has a
/// nonzero value part; returns `None` when that cannot be arranged.
fn det_bareiss(m: &[Vec<Jet>]) -> Option<Jet> {
    let n = m.len();
    let field = m[0][0].field();
    let ndirs = m[0][0].ndirs();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut sign_flip = false;
    let mut prev = Jet::one(field, ndirs);
    for k in 0..n - 1 {
        let pivot_row = (k..n).find(|&i| !a[i][k].value.is_zero())?;
        if pivot_row != k {
            a.swap(k, pivot_row);
            sign_flip = !sign_flip;
        }
        let prev_inv = prev.inverse().ok()?;
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.mul(&prev_inv);
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Some(if sign_flip { d.neg() } else { d })
}

/// All `r x r` minors of an `r x c` jet matrix (`r <= c`), keyed by the
/// strictly increasing column tuple in lexicographic order.
///
/// Shares subminors between overlapping column sets: one Laplace layer per
/// row over column bitmasks instead of an independent determinant per subset.
pub fn jet_maximal_minors(m: &[Vec<Jet>]) -> Result<Vec<(Vec<usize>, Jet)>> {
    let r = m.len();
    if r == 0 {
        return Err(GlabError::ShapeMismatch("minors of empty matrix".into()));
    }
    let c = m[0].len();
    if r > c || m.iter().any(|row| row.len() != c) {
        return Err(GlabError::ShapeMismatch(format!(
            "maximal minors need r <= c rows, got {}x{}",
            r, c
        )));
    }
    if c > 22 {
        return Err(GlabError::InvalidArgument(format!(
            "maximal-minor table limited to 22 columns, got {c}"
        )));
    }
    let field = m[0][0].field();
    let ndirs = m[0][0].ndirs();
    // level[mask] = det of rows 0..popcount(mask) on the columns of mask
    let mut level: Vec<Option<Jet>> = vec![None; 1usize << c];
    for j in 0..c {
        level[1usize << j] = Some(m[0][j].clone());
    }
    for k in 2..=r {
        let mut next: Vec<Option<Jet>> = vec![None; 1usize << c];
        for mask in 0..(1usize << c) {
            if (mask as u32).count_ones() as usize != k {
                continue;
            }
            let mut acc = Jet::zero(field, ndirs);
            let mut idx = 0usize;
            let mut rest = mask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let entry = &m[k - 1][j];
                if !entry.is_zero() {
                    let sub = level[mask ^ (1usize << j)]
                        .as_ref()
                        .expect("subminor filled at previous level");
                    let term = entry.mul(sub);
                    // expansion along row k-1: sign (-1)^((k-1)+idx)
                    acc = if (k - 1 + idx) % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.sub(&term)
                    };
                }
                idx += 1;
            }
            next[mask] = Some(acc);
        }
        level = next;
    }
    let mut out = Vec::new();
    for mask in 0..(1usize << c) {
        if (mask as u32).count_ones() as usize == r {
            let cols: Vec<usize> = (0..c).filter(|j| mask & (1 << j) != 0).collect();
            out.push((cols, level[mask].clone().expect("minor filled")));
        }
    }
    Ok(out)
}

/// Package a base point together with one infinitesimal direction per entry of
/// `directions`: coordinate j becomes value[j] + eps_d * directions[d][j].
pub fn jet_point(values: &[Scalar], directions: &[Vec<Scalar>]) -> Vec<Jet> {
    values
        .iter()
        .enumerate()
        .map(|(j, v)| Jet {
            value: v.clone(),
            inf: directions.iter().map(|d| d[j].clone()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldTag = FieldTag::Rationals;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(Q, v)
    }

    #[test]
    fn product_rule() {
        // x = 3 + eps, y = 5 + eps in the same single direction
        let x = Jet::variable(s(3), 0, 1);
        let y = Jet::variable(s(5), 0, 1);
        let p = x.mul(&y);
        assert_eq!(p.value, s(15));
        assert_eq!(p.inf, vec![s(8)]);
    }

    #[test]
    fn inverse_first_order() {
        let x = Jet::variable(s(2), 0, 1);
        let i = x.inverse().unwrap();
        assert_eq!(i.value, Scalar::from_ratio(1, 2).unwrap());
        assert_eq!(i.inf, vec![Scalar::from_ratio(-1, 4).unwrap()]);
        assert_eq!(x.mul(&i), Jet::one(Q, 1));
    }

    #[test]
    fn det_2x2_gradient() {
        // det [[x, 1], [1, y]] = xy - 1 at (x, y) = (2, 3)
        let x = Jet::variable(s(2), 0, 2);
        let y = Jet::variable(s(3), 1, 2);
        let one = Jet::one(Q, 2);
        let d = jet_det(&[vec![x, one.clone()], vec![one, y]]).unwrap();
        assert_eq!(d.value, s(5));
        assert_eq!(d.inf, vec![s(3), s(2)]);
    }

    #[test]
    fn cofactor_and_bareiss_agree() {
        // large enough to trigger both routes; pseudo-random integer entries
        // with jet parts in 3 directions
        let n = 7;
        let mut m = Vec::new();
        let mut seedv: i64 = 17;
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..n {
                seedv = (seedv * 31 + 7) % 101;
                let mut jet = Jet::constant(s(seedv - 50), 3);
                jet.inf[(i + j) % 3] = s(((i * 3 + j) % 5) as i64 - 2);
                row.push(jet);
            }
            m.push(row);
        }
        let via_bareiss = det_bareiss(&m).unwrap();
        let cols: Vec<usize> = (0..n).collect();
        let via_cofactor = det_cofactor(&m, &cols);
        assert_eq!(via_bareiss, via_cofactor);
    }

    #[test]
    fn maximal_minors_match_individual_determinants() {
        let rows = 3;
        let cols = 5;
        let mut m = Vec::new();
        let mut v: i64 = 5;
        for _ in 0..rows {
            let mut row = Vec::new();
            for _ in 0..cols {
                v = (v * 13 + 3) % 23;
                let mut jet = Jet::constant(s(v - 11), 2);
                v = (v * 13 + 3) % 23;
                jet.inf[0] = s(v % 3 - 1);
                jet.inf[1] = s(v % 5 - 2);
                row.push(jet);
            }
            m.push(row);
        }
        let table = jet_maximal_minors(&m).unwrap();
        assert_eq!(table.len(), 10);
        for (cols_sel, minor) in &table {
            let sub: Vec<Vec<Jet>> = m
                .iter()
                .map(|row| cols_sel.iter().map(|&c| row[c].clone()).collect())
                .collect();
            assert_eq!(&jet_det(&sub).unwrap(), minor, "columns {cols_sel:?}");
        }
    }

    #[test]
    fn bareiss_declines_nilpotent_pivot_grid() {
        // every value part zero: no usable pivot anywhere
        let eps = |d: usize| Jet::variable(s(0), d, 2);
        let m = vec![
            vec![eps(0), eps(1), eps(0), eps(1), eps(0), eps(1), eps(0)],
            vec![eps(1), eps(0), eps(1), eps(0), eps(1), eps(0), eps(1)],
            vec![eps(0), eps(0), eps(0), eps(1), eps(1), eps(0), eps(0)],
            vec![eps(1), eps(1), eps(0), eps(0), eps(0), eps(1), eps(1)],
            vec![eps(0), eps(1), eps(1), eps(0), eps(0), eps(0), eps(1)],
            vec![eps(1), eps(0), eps(0), eps(1), eps(1), eps(1), eps(0)],
            vec![eps(0), eps(0), eps(1), eps(1), eps(0), eps(1), eps(0)],
        ];
        assert!(det_bareiss(&m).is_none());
        // jet_det still answers via the cofactor fallback; at first order any
        // product of two pure-epsilon entries dies, and a 7x7 determinant is
        // a sum of such products
        assert!(jet_det(&m).unwrap().is_zero());
    }
}
