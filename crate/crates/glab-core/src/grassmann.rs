//! Lines in P^N through their Pluecker embedding.
//!
//! Coordinates are indexed by pairs (i, j), i < j, in lexicographic order.
//! A hyperplane section of the embedding cut out by a codimension-2 subspace
//! gives the divisor of lines meeting it; this module evaluates that form and
//! decides smoothness of its points via exact first-order jets in an affine
//! chart of the Grassmannian.

use std::collections::HashSet;

use crate::error::{GlabError, Result};
use crate::jet::Jet;
use crate::matrix::Matrix;
use crate::projspace::ProjSubspace;
use crate::scalar::{FieldTag, Scalar};

/// Index pairs (i, j), i < j < m, in lexicographic order.
pub fn coord_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            out.push((i, j));
        }
    }
    out
}

/// Position of the pair (i, j) in [`coord_pairs`] order.
pub fn pair_index(i: usize, j: usize, m: usize) -> usize {
    assert!(i < j && j < m, "bad pair ({i}, {j}) for m = {m}");
    // pairs starting at i' < i, then offset within the block of i
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

/// Scale a nonzero vector so its first nonzero entry is 1.
pub fn normalize_projective(mut v: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let Some(first) = v.iter().position(|x| !x.is_zero()) else {
        return Err(GlabError::ZeroParameter);
    };
    let inv = v[first].inverse()?;
    for x in &mut v {
        *x = &*x * &inv;
    }
    Ok(v)
}

/// Pluecker coordinates of a line, scaled so the first nonzero entry is 1.
pub fn plucker(line: &ProjSubspace) -> Result<Vec<Scalar>> {
    if line.dim() != 1 {
        return Err(GlabError::ShapeMismatch(format!(
            "expected a line, got dimension {}",
            line.dim()
        )));
    }
    let b = line.basis();
    let m = b.ncols();
    let mut coords = Vec::with_capacity(m * (m - 1) / 2);
    for (i, j) in coord_pairs(m) {
        let p = &(b.at(0, i) * b.at(1, j)) - &(b.at(0, j) * b.at(1, i));
        coords.push(p);
    }
    normalize_projective(coords)
}

/// Signed lookup in a Pluecker vector: p[j][i] = -p[i][j], p[i][i] = 0.
fn coord_signed(coords: &[Scalar], i: usize, j: usize, m: usize, field: FieldTag) -> Scalar {
    use std::cmp::Ordering;
    match i.cmp(&j) {
        Ordering::Less => coords[pair_index(i, j, m)].clone(),
        Ordering::Equal => Scalar::zero(field),
        Ordering::Greater => -&coords[pair_index(j, i, m)],
    }
}

/// All three-term quadratic relations hold: the vector is decomposable.
pub fn satisfies_plucker_relations(coords: &[Scalar], ambient: usize) -> Result<bool> {
    let m = ambient + 1;
    if coords.len() != m * (m - 1) / 2 {
        return Err(GlabError::LengthMismatch {
            expected: m * (m - 1) / 2,
            got: coords.len(),
        });
    }
    let field = coords
        .first()
        .map(Scalar::field)
        .unwrap_or(FieldTag::Rationals);
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                for l in (k + 1)..m {
                    let a = &coords[pair_index(i, j, m)] * &coords[pair_index(k, l, m)];
                    let b = &coords[pair_index(i, k, m)] * &coords[pair_index(j, l, m)];
                    let c = &coords[pair_index(i, l, m)] * &coords[pair_index(j, k, m)];
                    if !(&(&a - &b) + &c).is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    let _ = field;
    Ok(true)
}

/// Reconstruct the line with the given Pluecker coordinates.
pub fn line_from_plucker(coords: &[Scalar], ambient: usize) -> Result<ProjSubspace> {
    if !satisfies_plucker_relations(coords, ambient)? {
        return Err(GlabError::NotDecomposable);
    }
    let m = ambient + 1;
    let pairs = coord_pairs(m);
    let Some(first) = coords.iter().position(|x| !x.is_zero()) else {
        return Err(GlabError::ZeroParameter);
    };
    let (a, b) = pairs[first];
    let field = coords[first].field();
    // rows u, v with u_k = p[a][k], v_k = p[b][k]; u_b and v_a are nonzero so
    // the rows are independent, and the relations force span = the line
    let u: Vec<Scalar> = (0..m)
        .map(|k| coord_signed(coords, a, k, m, field))
        .collect();
    let v: Vec<Scalar> = (0..m)
        .map(|k| coord_signed(coords, b, k, m, field))
        .collect();
    let line = ProjSubspace::from_spanning_rows(&Matrix::from_rows(vec![u, v])?)?;
    if line.dim() != 1 {
        return Err(GlabError::NotDecomposable);
    }
    Ok(line)
}

/// The induced action of a linear map on Pluecker coordinates: if a line has
/// coordinates p, its image under `m` has coordinates `exterior_square(m) * p`
/// (Cauchy-Binet). Rows are indexed by `coord_pairs(m.nrows())`, columns by
/// `coord_pairs(m.ncols())`.
pub fn exterior_square(m: &Matrix) -> Matrix {
    let out_pairs = coord_pairs(m.nrows());
    let in_pairs = coord_pairs(m.ncols());
    let rows = out_pairs
        .iter()
        .map(|&(a, b)| {
            in_pairs
                .iter()
                .map(|&(i, j)| &(m.at(a, i) * m.at(b, j)) - &(m.at(a, j) * m.at(b, i)))
                .collect()
        })
        .collect();
    Matrix::from_rows(rows).expect("entries share the field")
}

/// A line expressed in the affine chart of the Grassmannian where the two
/// frame columns carry the identity block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartPoint {
    pub frame: (usize, usize),
    /// Full 2 x (N+1) matrix with the identity block in the frame columns.
    pub coords: Matrix,
}

impl ChartPoint {
    /// Coordinates of `line` in the chart at frame `(a, b)`; fails when the
    /// line misses the chart.
    pub fn of_line(line: &ProjSubspace, frame: (usize, usize)) -> Result<ChartPoint> {
        let (a, b) = frame;
        if line.dim() != 1 {
            return Err(GlabError::ShapeMismatch(format!(
                "expected a line, got dimension {}",
                line.dim()
            )));
        }
        let bs = line.basis();
        let m = bs.ncols();
        if a >= m || b >= m || a == b {
            return Err(GlabError::InvalidArgument(format!(
                "bad frame ({a}, {b}) in P^{}",
                m - 1
            )));
        }
        let field = bs.field();
        let s = Matrix::from_rows(vec![
            vec![bs.at(0, a).clone(), bs.at(0, b).clone()],
            vec![bs.at(1, a).clone(), bs.at(1, b).clone()],
        ])?;
        let det = &(s.at(0, 0) * s.at(1, 1)) - &(s.at(0, 1) * s.at(1, 0));
        if det.is_zero() {
            return Err(GlabError::OutsideChart(a, b));
        }
        let det_inv = det.inverse()?;
        // 2x2 inverse times the basis
        let inv = Matrix::from_rows(vec![
            vec![&*s.at(1, 1) * &det_inv, -&(s.at(0, 1) * &det_inv)],
            vec![-&(s.at(1, 0) * &det_inv), &*s.at(0, 0) * &det_inv],
        ])?;
        let coords = inv.mul(bs)?;
        debug_assert!(coords.at(0, a).is_one() && coords.at(1, b).is_one());
        debug_assert!(coords.at(0, b).is_zero() && coords.at(1, a).is_zero());
        let _ = field;
        Ok(ChartPoint { frame, coords })
    }

    /// The frame a canonical basis already uses: its pivot columns.
    pub fn pivot_frame(line: &ProjSubspace) -> Result<(usize, usize)> {
        if line.dim() != 1 {
            return Err(GlabError::ShapeMismatch(format!(
                "expected a line, got dimension {}",
                line.dim()
            )));
        }
        let (_, pivots) = line.basis().rref_with_pivots();
        Ok((pivots[0], pivots[1]))
    }

    pub fn line(&self) -> Result<ProjSubspace> {
        ProjSubspace::from_spanning_rows(&self.coords)
    }
}

/// The linear form on Pluecker coordinates whose zero locus is the divisor
/// of lines meeting a fixed codimension-2 subspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchubertForm {
    ambient: usize,
    center: ProjSubspace,
    coeffs: Vec<Scalar>,
}

impl SchubertForm {
    pub fn new(pi: &ProjSubspace) -> Result<SchubertForm> {
        let ambient = pi.ambient();
        if pi.dim() != ambient as i64 - 2 {
            return Err(GlabError::WrongCodimension {
                dim: pi.dim(),
                ambient,
            });
        }
        let duals = pi.dual_forms();
        debug_assert_eq!(duals.nrows(), 2);
        let m = ambient + 1;
        let mut coeffs = Vec::with_capacity(m * (m - 1) / 2);
        for (i, j) in coord_pairs(m) {
            // c_ij = f_i g_j - f_j g_i for the two defining forms f, g
            let c = &(duals.at(0, i) * duals.at(1, j)) - &(duals.at(0, j) * duals.at(1, i));
            coeffs.push(c);
        }
        Ok(SchubertForm {
            ambient,
            center: pi.clone(),
            coeffs,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn center(&self) -> &ProjSubspace {
        &self.center
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn eval_coords(&self, coords: &[Scalar]) -> Result<Scalar> {
        if coords.len() != self.coeffs.len() {
            return Err(GlabError::LengthMismatch {
                expected: self.coeffs.len(),
                got: coords.len(),
            });
        }
        let mut acc = Scalar::zero(self.coeffs[0].field());
        for (c, p) in self.coeffs.iter().zip(coords) {
            acc = &acc + &(c * p);
        }
        Ok(acc)
    }

    /// Zero exactly when the line meets the center.
    pub fn eval_line(&self, line: &ProjSubspace) -> Result<Scalar> {
        self.eval_coords(&plucker(line)?)
    }

    /// Value and gradient of the form along the chart coordinates at `frame`.
    ///
    /// The 2(N-1) chart entries each get an independent jet direction, in row
    /// major order over the non-frame columns.
    pub fn chart_jet(&self, line: &ProjSubspace, frame: (usize, usize)) -> Result<(Scalar, Vec<Scalar>)> {
        let chart = ChartPoint::of_line(line, frame)?;
        let m = self.ambient + 1;
        let ndirs = 2 * (m - 2);
        let field = chart.coords.field();
        let (a, b) = chart.frame;
        let mut dir = 0;
        let mut jrows: Vec<Vec<Jet>> = vec![Vec::with_capacity(m), Vec::with_capacity(m)];
        for (r, row) in jrows.iter_mut().enumerate() {
            for c in 0..m {
                let v = chart.coords.at(r, c).clone();
                if c == a || c == b {
                    row.push(Jet::constant(v, ndirs));
                } else {
                    row.push(Jet::variable(v, dir, ndirs));
                    dir += 1;
                }
            }
        }
        debug_assert_eq!(dir, ndirs);
        let mut acc = Jet::zero(field, ndirs);
        for (idx, (i, j)) in coord_pairs(m).into_iter().enumerate() {
            if self.coeffs[idx].is_zero() {
                continue;
            }
            let p = jrows[0][i].mul(&jrows[1][j]).sub(&jrows[0][j].mul(&jrows[1][i]));
            acc = acc.add(&p.scale(&self.coeffs[idx]));
        }
        Ok((acc.value, acc.inf))
    }

    /// Is `line` a singular point of the divisor? Requires the line to lie
    /// on the divisor at all.
    pub fn singular_at(&self, line: &ProjSubspace) -> Result<bool> {
        let frame = ChartPoint::pivot_frame(line)?;
        let (value, grad) = self.chart_jet(line, frame)?;
        if !value.is_zero() {
            return Err(GlabError::NotOnDivisor);
        }
        Ok(grad.iter().all(Scalar::is_zero))
    }
}

/// Every line of P^ambient over a small prime field.
pub fn all_lines(field: FieldTag, ambient: usize) -> Result<Vec<ProjSubspace>> {
    let FieldTag::Prime(p) = field else {
        return Err(GlabError::InvalidArgument(
            "exhaustive line enumeration needs a finite field".into(),
        ));
    };
    let m = ambient + 1;
    let total = (p as u128).pow(m as u32);
    if total > 1024 {
        return Err(GlabError::InvalidArgument(format!(
            "too many vectors to enumerate: {total}"
        )));
    }
    let total = total as u64;
    let vectors: Vec<Vec<Scalar>> = (1..total)
        .map(|code| {
            let mut v = Vec::with_capacity(m);
            let mut c = code;
            for _ in 0..m {
                v.push(Scalar::from_int(field, (c % p) as i64));
                c /= p;
            }
            v
        })
        .collect();
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let mat = Matrix::from_rows(vec![vectors[i].clone(), vectors[j].clone()])?;
            let line = ProjSubspace::from_spanning_rows(&mat)?;
            if line.dim() != 1 {
                continue;
            }
            if seen.insert(line.basis().to_string()) {
                out.push(line);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldTag = FieldTag::Rationals;

    fn line(rows: &[&[i64]]) -> ProjSubspace {
        ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(Q, rows)).unwrap()
    }

    fn ints(vals: &[i64]) -> Vec<Scalar> {
        vals.iter().map(|&v| Scalar::from_int(Q, v)).collect()
    }

    #[test]
    fn pair_order_and_index() {
        let pairs = coord_pairs(4);
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (k, (i, j)) in pairs.iter().enumerate() {
            assert_eq!(pair_index(*i, *j, 4), k);
        }
    }

    #[test]
    fn plucker_of_reference_line() {
        let l = line(&[&[1, 2, 0, 0], &[0, 0, 1, 2]]);
        assert_eq!(plucker(&l).unwrap(), ints(&[0, 1, 2, 2, 4, 0]));
    }

    #[test]
    fn plucker_is_basis_independent() {
        let a = line(&[&[1, 2, 0, 0], &[0, 0, 1, 2]]);
        let b = line(&[&[2, 4, 1, 2], &[1, 2, -1, -2]]);
        assert_eq!(plucker(&a).unwrap(), plucker(&b).unwrap());
    }

    #[test]
    fn round_trip_reconstruction() {
        for rows in [
            [[1i64, 2, 0, 0], [0, 0, 1, 2]],
            [[1, 0, 0, 0], [0, 0, 0, 1]],
            [[0, 1, 5, -2], [0, 0, 3, 1]],
        ] {
            let l = line(&[&rows[0], &rows[1]]);
            let p = plucker(&l).unwrap();
            assert!(satisfies_plucker_relations(&p, 3).unwrap());
            let back = line_from_plucker(&p, 3).unwrap();
            assert_eq!(back, l);
        }
    }

    #[test]
    fn non_decomposable_vector_is_rejected() {
        // p01 p23 - p02 p13 + p03 p12 = 1 here, not 0
        let bad = ints(&[1, 0, 0, 0, 0, 1]);
        assert!(!satisfies_plucker_relations(&bad, 3).unwrap());
        assert_eq!(
            line_from_plucker(&bad, 3).unwrap_err(),
            GlabError::NotDecomposable
        );
    }

    #[test]
    fn chart_coordinates_normalize_the_frame_block() {
        let l = line(&[&[1, 2, 0, 0], &[0, 0, 1, 2]]);
        let c = ChartPoint::of_line(&l, (1, 2)).unwrap();
        assert!(c.coords.at(0, 1).is_one() && c.coords.at(1, 2).is_one());
        assert_eq!(c.line().unwrap(), l);
        // frame columns (0, 1) are dependent for this line: outside that chart
        assert_eq!(
            ChartPoint::of_line(&l, (0, 1)).unwrap_err(),
            GlabError::OutsideChart(0, 1)
        );
        assert_eq!(ChartPoint::pivot_frame(&l).unwrap(), (0, 2));
    }

    #[test]
    fn schubert_form_vanishes_exactly_on_meeting_lines() {
        // center {x2 = x3 = 0}: the form is p23 up to scale
        let pi = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[1, 0, 0, 0], &[0, 1, 0, 0]],
        ))
        .unwrap();
        let form = SchubertForm::new(&pi).unwrap();
        let idx = pair_index(2, 3, 4);
        for (k, c) in form.coeffs().iter().enumerate() {
            assert_eq!(c.is_zero(), k != idx);
        }
        let meets = line(&[&[1, 0, 0, 0], &[0, 0, 1, 0]]);
        assert!(form.eval_line(&meets).unwrap().is_zero());
        assert!(meets.meets(&pi).unwrap());
        let misses = line(&[&[0, 0, 1, 0], &[0, 0, 0, 1]]);
        assert!(!form.eval_line(&misses).unwrap().is_zero());
        assert!(!misses.meets(&pi).unwrap());
    }

    #[test]
    fn wrong_codimension_rejected() {
        let hyper = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]],
        ))
        .unwrap();
        assert!(matches!(
            SchubertForm::new(&hyper),
            Err(GlabError::WrongCodimension { dim: 2, ambient: 3 })
        ));
    }

    #[test]
    fn divisor_singular_exactly_at_contained_lines() {
        let pi = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[1, 0, 0, 0], &[0, 1, 0, 0]],
        ))
        .unwrap();
        let form = SchubertForm::new(&pi).unwrap();
        // the center itself, as a line on the divisor: singular
        assert!(form.singular_at(&pi).unwrap());
        // a line meeting the center transversally: smooth point
        let l = line(&[&[1, 0, 0, 0], &[0, 0, 1, 0]]);
        assert!(!form.singular_at(&l).unwrap());
        // a line off the divisor: error
        let off = line(&[&[0, 0, 1, 0], &[0, 0, 0, 1]]);
        assert_eq!(form.singular_at(&off).unwrap_err(), GlabError::NotOnDivisor);
    }

    #[test]
    fn gradient_test_is_chart_independent() {
        let pi = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[1, 0, 0, 0], &[0, 1, 1, 0]],
        ))
        .unwrap();
        let form = SchubertForm::new(&pi).unwrap();
        let l = line(&[&[1, 0, 0, 0], &[0, 1, 1, 0]]);
        let mut verdicts = Vec::new();
        for frame in [(0, 1), (0, 2)] {
            let (value, grad) = form.chart_jet(&l, frame).unwrap();
            assert!(value.is_zero());
            verdicts.push(grad.iter().all(Scalar::is_zero));
        }
        assert_eq!(verdicts[0], verdicts[1]);
        assert!(verdicts[0], "the center is a singular point of its divisor");
    }

    #[test]
    fn f3_line_count_in_p3() {
        let f3 = FieldTag::prime(3).unwrap();
        let lines = all_lines(f3, 3).unwrap();
        assert_eq!(lines.len(), 130);
    }
}
