//! Families of projective subspaces cut out by polynomial matrices, and
//! linear projections acting on them.
//!
//! A family is a polynomial matrix whose rows, evaluated at a nonzero
//! parameter vector, span a subspace of fixed dimension. Keeping the matrix
//! symbolic lets identities (minor expansions, orthogonality, projection
//! formulas) be checked as exact polynomial equalities instead of by
//! sampling.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{GlabError, Result};
use crate::grassmann::{coord_pairs, normalize_projective};
use crate::matrix::Matrix;
use crate::poly::{coefficient_rank, jacobian_at, MultiPoly, PolyMatrix};
use crate::projspace::ProjSubspace;
use crate::sample::{projective_points, Sampler};
use crate::scalar::{FieldTag, Scalar};

/// How to produce a parameter whose member is contained in a given span of
/// members — needed by fiber-dimension style searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessRule {
    /// A random combination of the sampled parameter tuples works (valid
    /// whenever the matrix rows are linear in the parameters and row-compatible,
    /// as for [`veronese_family`]).
    ParameterSpan,
    /// Solve the linear containment system in the parameters (valid when every
    /// row has degree 1).
    LinearSolve,
    /// No way to search for witnesses; callers must supply one explicitly.
    NoRule,
}

/// A family of (nrows-1)-dimensional projective subspaces of P^{ncols-1},
/// parametrized by a projective parameter space.
#[derive(Debug, Clone)]
pub struct SubspaceFamily {
    matrix: PolyMatrix,
    row_degrees: Vec<u32>,
    witness_rule: WitnessRule,
}

fn fmt_params(t: &[Scalar]) -> String {
    let coords: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", coords.join(" : "))
}

impl SubspaceFamily {
    /// Wrap a polynomial matrix; each row must be homogeneous (of its own
    /// degree) and not identically zero. Families with all rows of degree 1
    /// get the [`WitnessRule::LinearSolve`] rule by default.
    pub fn new(matrix: PolyMatrix) -> Result<SubspaceFamily> {
        let row_degrees = matrix.row_degrees()?;
        let witness_rule = if row_degrees.iter().all(|&d| d == 1) {
            WitnessRule::LinearSolve
        } else {
            WitnessRule::NoRule
        };
        Ok(SubspaceFamily {
            matrix,
            row_degrees,
            witness_rule,
        })
    }

    pub fn with_witness_rule(mut self, rule: WitnessRule) -> SubspaceFamily {
        self.witness_rule = rule;
        self
    }

    pub fn field(&self) -> FieldTag {
        self.matrix.field()
    }

    /// Projective dimension of the parameter space.
    pub fn param_dim(&self) -> usize {
        self.matrix.nvars() - 1
    }

    /// Projective dimension of the ambient space.
    pub fn ambient(&self) -> usize {
        self.matrix.ncols() - 1
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.matrix
    }

    pub fn row_degrees(&self) -> &[u32] {
        &self.row_degrees
    }

    pub fn witness_rule(&self) -> WitnessRule {
        self.witness_rule
    }

    /// Evaluate the defining matrix at a nonzero parameter vector.
    pub fn eval_matrix(&self, t: &[Scalar]) -> Result<Matrix> {
        if t.len() != self.matrix.nvars() {
            return Err(GlabError::LengthMismatch {
                expected: self.matrix.nvars(),
                got: t.len(),
            });
        }
        if t.iter().all(Scalar::is_zero) {
            return Err(GlabError::ZeroParameter);
        }
        if t.iter().any(|x| x.field() != self.field()) {
            return Err(GlabError::FieldMismatch);
        }
        self.matrix.eval(t)
    }

    /// The member subspace at parameter `t`; rank-deficient evaluations are
    /// rejected with the parameter that hit the degenerate locus.
    pub fn member(&self, t: &[Scalar]) -> Result<ProjSubspace> {
        let m = self.eval_matrix(t)?;
        let rank = m.rank();
        if rank < self.nrows() {
            return Err(GlabError::DegenerateEvaluation(format!(
                "rank {} < {} at parameter {}",
                rank,
                self.nrows(),
                fmt_params(t)
            )));
        }
        ProjSubspace::from_spanning_rows(&m)
    }

    /// The 2x2 minors of a two-row family, in `coord_pairs` order: the
    /// symbolic Pluecker coordinates of the member line.
    pub fn minors(&self) -> Result<Vec<MultiPoly>> {
        if self.nrows() != 2 {
            return Err(GlabError::ShapeMismatch(format!(
                "minor table needs a 2-row family, got {} rows",
                self.nrows()
            )));
        }
        let mut out = Vec::new();
        for (i, j) in coord_pairs(self.matrix.ncols()) {
            let a = self.matrix.entry(0, i).mul(self.matrix.entry(1, j));
            let b = self.matrix.entry(0, j).mul(self.matrix.entry(1, i));
            out.push(a.sub(&b));
        }
        Ok(out)
    }

    /// Serialize to the on-disk document form.
    pub fn to_doc(&self) -> FamilyDoc {
        FamilyDoc {
            ambient: self.ambient(),
            param_dim: self.param_dim(),
            degree: self.row_degrees.clone(),
            rows: (0..self.nrows())
                .map(|r| {
                    self.matrix
                        .row(r)
                        .iter()
                        .map(|p| p.to_string())
                        .collect()
                })
                .collect(),
        }
    }

    /// Parse a document over the given field; shape fields must agree with
    /// the parsed polynomials.
    pub fn from_doc(doc: &FamilyDoc, field: FieldTag) -> Result<SubspaceFamily> {
        let nvars = doc.param_dim + 1;
        let mut rows = Vec::with_capacity(doc.rows.len());
        for row in &doc.rows {
            let mut parsed = Vec::with_capacity(row.len());
            for s in row {
                parsed.push(MultiPoly::parse(s, nvars, field)?);
            }
            rows.push(parsed);
        }
        let family = SubspaceFamily::new(PolyMatrix::from_entries(rows)?)?;
        if family.ambient() != doc.ambient {
            return Err(GlabError::Parse(format!(
                "declared ambient {} but rows have {} columns",
                doc.ambient,
                family.ambient() + 1
            )));
        }
        if family.row_degrees() != doc.degree.as_slice() {
            return Err(GlabError::Parse(format!(
                "declared degrees {:?} but rows have degrees {:?}",
                doc.degree,
                family.row_degrees()
            )));
        }
        Ok(family)
    }
}

/// On-disk form of a family: polynomial entries in the `parse` grammar
/// (variables t0, t1, ...), one string per matrix entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub ambient: usize,
    pub param_dim: usize,
    /// Homogeneity degree of each row.
    pub degree: Vec<u32>,
    pub rows: Vec<Vec<String>>,
}

/// A linear projection P^N -> P^M given by a full-row-rank matrix; the center
/// (where the map is undefined) is the projectivized kernel.
#[derive(Debug, Clone)]
pub struct ProjectionMap {
    matrix: Matrix,
    center: ProjSubspace,
}

impl ProjectionMap {
    pub fn new(matrix: Matrix) -> Result<ProjectionMap> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(GlabError::ShapeMismatch("empty projection matrix".into()));
        }
        if matrix.rank() < matrix.nrows() {
            return Err(GlabError::ShapeMismatch(
                "projection matrix must have full row rank".into(),
            ));
        }
        let center = ProjSubspace::from_spanning_rows(&matrix.kernel_basis())?;
        debug_assert_eq!(
            center.dim(),
            matrix.ncols() as i64 - matrix.nrows() as i64 - 1
        );
        Ok(ProjectionMap { matrix, center })
    }

    /// The projection away from a subspace: rows are the dual forms of the
    /// center.
    pub fn from_center(center: &ProjSubspace) -> Result<ProjectionMap> {
        if center.dim() == center.ambient() as i64 {
            return Err(GlabError::ShapeMismatch(
                "cannot project away from the whole space".into(),
            ));
        }
        ProjectionMap::new(center.dual_forms().clone())
    }

    pub fn field(&self) -> FieldTag {
        self.matrix.field()
    }

    /// Ambient dimension of the source, N.
    pub fn source_dim(&self) -> usize {
        self.matrix.ncols() - 1
    }

    /// Ambient dimension of the target, M.
    pub fn target_dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn center(&self) -> &ProjSubspace {
        &self.center
    }

    /// Image of a point; points of the center map to zero and are rejected.
    pub fn apply_point(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.matrix.ncols() {
            return Err(GlabError::LengthMismatch {
                expected: self.matrix.ncols(),
                got: v.len(),
            });
        }
        let mut out = Vec::with_capacity(self.matrix.nrows());
        for i in 0..self.matrix.nrows() {
            let mut acc = Scalar::zero(self.field());
            for j in 0..self.matrix.ncols() {
                acc = &acc + &(self.matrix.at(i, j) * &v[j]);
            }
            out.push(acc);
        }
        if out.iter().all(Scalar::is_zero) {
            return Err(GlabError::ProjectionUndefined);
        }
        Ok(out)
    }
}

/// The family of lines in P^{2n+1} spanned by the rows of
/// [[t_0..t_n, 0..0], [0..0, t_0..t_n]].
pub fn veronese_family(field: FieldTag, n: usize) -> Result<SubspaceFamily> {
    if n < 1 {
        return Err(GlabError::InvalidArgument(
            "parameter dimension must be at least 1".into(),
        ));
    }
    let nvars = n + 1;
    let ncols = 2 * n + 2;
    let zero = MultiPoly::zero(field, nvars);
    let mut rows = vec![vec![zero.clone(); ncols], vec![zero; ncols]];
    for i in 0..=n {
        rows[0][i] = MultiPoly::variable(field, i, nvars);
        rows[1][n + 1 + i] = MultiPoly::variable(field, i, nvars);
    }
    Ok(SubspaceFamily::new(PolyMatrix::from_entries(rows)?)?
        .with_witness_rule(WitnessRule::ParameterSpan))
}

/// The projection P^{2n+1} -> P^{n+1},
/// (x_0 : ... : x_{2n+1}) -> (x_0 : x_1+x_{n+1} : ... : x_n+x_{2n} : x_{2n+1});
/// its center is an (n-1)-plane.
pub fn veronese_projection(field: FieldTag, n: usize) -> Result<ProjectionMap> {
    if n < 1 {
        return Err(GlabError::InvalidArgument(
            "parameter dimension must be at least 1".into(),
        ));
    }
    let ncols = 2 * n + 2;
    let mut rows = vec![vec![Scalar::zero(field); ncols]; n + 2];
    rows[0][0] = Scalar::one(field);
    for i in 1..=n {
        rows[i][i] = Scalar::one(field);
        rows[i][n + i] = Scalar::one(field);
    }
    rows[n + 1][2 * n + 1] = Scalar::one(field);
    ProjectionMap::new(Matrix::from_rows(rows)?)
}

/// Seed for the internal genericity pre-check of [`apply_projection`]; fixed
/// so the check is reproducible independently of caller seeds.
const PRECHECK_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Push a family through a linear projection, entry-wise on the polynomial
/// matrix. Rejected when the generic member meets the center (sampled test:
/// if every probe member meets the center, the projected family would drop
/// rank identically).
pub fn apply_projection(map: &ProjectionMap, family: &SubspaceFamily) -> Result<SubspaceFamily> {
    if map.field() != family.field() {
        return Err(GlabError::FieldMismatch);
    }
    if map.source_dim() != family.ambient() {
        return Err(GlabError::AmbientMismatch {
            expected: map.source_dim(),
            got: family.ambient(),
        });
    }
    if map.center().dim() >= 0 {
        let mut smp = Sampler::new(family.field(), PRECHECK_SEED);
        let mut all_meet = true;
        let mut consecutive_bad = 0;
        let mut probes = 0;
        while probes < 20 {
            let t = smp.nonzero_vector(family.param_dim() + 1);
            match family.member(&t) {
                Ok(member) => {
                    consecutive_bad = 0;
                    probes += 1;
                    if !member.meets(map.center())? {
                        all_meet = false;
                        break;
                    }
                }
                Err(_) => {
                    consecutive_bad += 1;
                    if consecutive_bad >= 100 {
                        return Err(GlabError::DegenerateEvaluation(
                            "100 consecutive degenerate probes".into(),
                        ));
                    }
                }
            }
        }
        if all_meet {
            return Err(GlabError::ProjectionUndefined);
        }
    }
    let nvars = family.matrix().nvars();
    let mut rows = Vec::with_capacity(family.nrows());
    for r in 0..family.nrows() {
        let mut row = Vec::with_capacity(map.target_dim() + 1);
        for i in 0..=map.target_dim() {
            let mut acc = MultiPoly::zero(family.field(), nvars);
            for j in 0..=map.source_dim() {
                let c = map.matrix().at(i, j);
                if !c.is_zero() {
                    acc = acc.add(&family.matrix().entry(r, j).scale(c));
                }
            }
            row.push(acc);
        }
        rows.push(row);
    }
    Ok(SubspaceFamily::new(PolyMatrix::from_entries(rows)?)?
        .with_witness_rule(family.witness_rule()))
}

/// Results of the embedding checks for the minor map of the projected
/// family: the quadric system has full rank, the map separates points, and
/// its differential has full rank.
#[derive(Debug, Clone)]
pub struct DoubleVeroneseReport {
    pub n: usize,
    pub minor_count: usize,
    pub coefficient_rank: usize,
    pub expected_rank: usize,
    /// Number of points enumerated in the exhaustive small-field sweep
    /// (only run for n <= 2).
    pub exhaustive_points: Option<usize>,
    pub exhaustive_collisions: usize,
    pub random_pairs: usize,
    pub random_failures: usize,
    pub differential_points: usize,
    pub differential_failures: usize,
}

impl DoubleVeroneseReport {
    pub fn pass(&self) -> bool {
        self.coefficient_rank == self.expected_rank
            && self.exhaustive_collisions == 0
            && self.random_failures == 0
            && self.differential_failures == 0
    }
}

const DV_RANDOM_PAIRS: usize = 1000;
const DV_DIFFERENTIAL_POINTS: usize = 100;
const DV_EXHAUSTIVE_PRIME: u64 = 5;
const DV_EXHAUSTIVE_MAX_N: usize = 2;

/// Check that the minors of the projected family define a quadratic
/// embedding of the parameter space: full coefficient rank C(n+2,2),
/// injectivity (exhaustively over a small field for n <= 2, on random
/// rational pairs otherwise), and differential rank n+1 everywhere sampled.
pub fn double_veronese_check(n: usize, seed: u64) -> Result<DoubleVeroneseReport> {
    let q = FieldTag::Rationals;
    let family = veronese_family(q, n)?;
    let projected = apply_projection(&veronese_projection(q, n)?, &family)?;
    let minors = projected.minors()?;
    let expected_rank = (n + 2) * (n + 1) / 2;
    let rank = coefficient_rank(&minors, 2)?;

    let mut report = DoubleVeroneseReport {
        n,
        minor_count: minors.len(),
        coefficient_rank: rank,
        expected_rank,
        exhaustive_points: None,
        exhaustive_collisions: 0,
        random_pairs: 0,
        random_failures: 0,
        differential_points: 0,
        differential_failures: 0,
    };

    if n <= DV_EXHAUSTIVE_MAX_N {
        let fp = FieldTag::prime(DV_EXHAUSTIVE_PRIME)?;
        let fam_p = veronese_family(fp, n)?;
        let proj_p = apply_projection(&veronese_projection(fp, n)?, &fam_p)?;
        let minors_p = proj_p.minors()?;
        let points = projective_points(fp, n)?;
        let mut seen = HashSet::new();
        for t in &points {
            let values: Vec<Scalar> = minors_p
                .iter()
                .map(|p| p.eval(t))
                .collect::<Result<Vec<_>>>()?;
            let key = fmt_params(&normalize_projective(values)?);
            if !seen.insert(key) {
                report.exhaustive_collisions += 1;
            }
        }
        report.exhaustive_points = Some(points.len());
    }

    let mut smp = Sampler::new(q, seed);
    while report.random_pairs < DV_RANDOM_PAIRS {
        let t = smp.nonzero_vector(n + 1);
        let s = smp.nonzero_vector(n + 1);
        let pair = Matrix::from_rows(vec![t.clone(), s.clone()])?;
        if pair.rank() < 2 {
            continue; // same projective point: nothing to separate
        }
        report.random_pairs += 1;
        let mt: Vec<Scalar> = minors.iter().map(|p| p.eval(&t)).collect::<Result<_>>()?;
        let ms: Vec<Scalar> = minors.iter().map(|p| p.eval(&s)).collect::<Result<_>>()?;
        if Matrix::from_rows(vec![mt, ms])?.rank() != 2 {
            report.random_failures += 1;
        }
    }

    for _ in 0..DV_DIFFERENTIAL_POINTS {
        let t = smp.nonzero_vector(n + 1);
        report.differential_points += 1;
        if jacobian_at(&minors, &t)?.rank() != n + 1 {
            report.differential_failures += 1;
        }
    }

    Ok(report)
}

/// The one-parameter family of r-planes in P^{2r+2} sweeping a rational
/// normal scroll: r rows carrying (s, u) in disjoint 2-column blocks and a
/// final row carrying (s^2, su, u^2) in the trailing 3-column block.
pub fn scroll_fiber_family(field: FieldTag, r: usize) -> Result<SubspaceFamily> {
    if r < 1 {
        return Err(GlabError::InvalidArgument(
            "scroll needs at least one linear block".into(),
        ));
    }
    let ncols = 2 * r + 3;
    let s = MultiPoly::variable(field, 0, 2);
    let u = MultiPoly::variable(field, 1, 2);
    let zero = MultiPoly::zero(field, 2);
    let mut rows = vec![vec![zero; ncols]; r + 1];
    for b in 0..r {
        rows[b][2 * b] = s.clone();
        rows[b][2 * b + 1] = u.clone();
    }
    rows[r][2 * r] = s.mul(&s);
    rows[r][2 * r + 1] = s.mul(&u);
    rows[r][2 * r + 2] = u.mul(&u);
    SubspaceFamily::new(PolyMatrix::from_entries(rows)?)
}

/// The complementary family of (r+1)-planes: at each parameter its rows span
/// the annihilator of the fiber, so fiber * dual^T = 0 identically.
pub fn scroll_dual_family(field: FieldTag, r: usize) -> Result<SubspaceFamily> {
    if r < 1 {
        return Err(GlabError::InvalidArgument(
            "scroll needs at least one linear block".into(),
        ));
    }
    let ncols = 2 * r + 3;
    let u = MultiPoly::variable(field, 1, 2);
    let neg_s = MultiPoly::variable(field, 0, 2).neg();
    let zero = MultiPoly::zero(field, 2);
    let mut rows = vec![vec![zero; ncols]; r + 2];
    for b in 0..r {
        rows[b][2 * b] = u.clone();
        rows[b][2 * b + 1] = neg_s.clone();
    }
    rows[r][2 * r] = u.clone();
    rows[r][2 * r + 1] = neg_s.clone();
    rows[r + 1][2 * r + 1] = u;
    rows[r + 1][2 * r + 2] = neg_s;
    SubspaceFamily::new(PolyMatrix::from_entries(rows)?)
}

/// A lift of the dual family to P^{2r+3}: every row carries (u, -s) in its
/// own 2-column block, and the returned projection (merging coordinates
/// 2r+1 and 2r+2) maps it back onto the dual family entry for entry.
pub fn scroll_lift(field: FieldTag, r: usize) -> Result<(SubspaceFamily, ProjectionMap)> {
    if r < 1 {
        return Err(GlabError::InvalidArgument(
            "scroll needs at least one linear block".into(),
        ));
    }
    let ncols = 2 * r + 4;
    let u = MultiPoly::variable(field, 1, 2);
    let neg_s = MultiPoly::variable(field, 0, 2).neg();
    let zero = MultiPoly::zero(field, 2);
    let mut rows = vec![vec![zero; ncols]; r + 2];
    for k in 0..r + 2 {
        rows[k][2 * k] = u.clone();
        rows[k][2 * k + 1] = neg_s.clone();
    }
    let lift = SubspaceFamily::new(PolyMatrix::from_entries(rows)?)?;

    let mut proj_rows = vec![vec![Scalar::zero(field); ncols]; 2 * r + 3];
    for i in 0..=2 * r {
        proj_rows[i][i] = Scalar::one(field);
    }
    proj_rows[2 * r + 1][2 * r + 1] = Scalar::one(field);
    proj_rows[2 * r + 1][2 * r + 2] = Scalar::one(field);
    proj_rows[2 * r + 2][2 * r + 3] = Scalar::one(field);
    let map = ProjectionMap::new(Matrix::from_rows(proj_rows)?)?;
    Ok((lift, map))
}

/// The lines inside the moving dual planes, in a fixed gauge: with dual rows
/// D_0..D_{r+1}, the member line is spanned by w*D_0 + sum alpha_i D_i and
/// v*D_1 + sum beta_i D_i (i = 2..r+1). The gauge parameters
/// (s, u, w, alpha_2.., v, beta_2..) form P^{2r+3}; each member line is hit
/// by a 2-dimensional gauge orbit, so parameter-space fiber dimensions
/// overshoot line-space fiber dimensions by exactly 2.
pub fn scroll_line_family(field: FieldTag, r: usize) -> Result<SubspaceFamily> {
    let dual = scroll_dual_family(field, r)?;
    let total = 2 * r + 4;
    let ncols = 2 * r + 3;
    let d = |i: usize, j: usize| dual.matrix().entry(i, j).extend_vars(total, 0);
    let var = |k: usize| MultiPoly::variable(field, k, total);
    let mut row_a = Vec::with_capacity(ncols);
    let mut row_b = Vec::with_capacity(ncols);
    for j in 0..ncols {
        let mut a = var(2).mul(&d(0, j));
        let mut b = var(r + 3).mul(&d(1, j));
        for i in 2..=r + 1 {
            a = a.add(&var(i + 1).mul(&d(i, j)));
            b = b.add(&var(r + 2 + i).mul(&d(i, j)));
        }
        row_a.push(a);
        row_b.push(b);
    }
    SubspaceFamily::new(PolyMatrix::from_entries(vec![row_a, row_b])?)
}

/// Dimension estimate for the union of all members, with its certification
/// status.
#[derive(Debug, Clone)]
pub struct UnionDimensionReport {
    /// Max observed Jacobian rank minus one: a certified lower bound for the
    /// dimension of the union.
    pub dim: i64,
    /// A-priori cap min(N, param_dim + nrows - 1); when `dim` reaches it the
    /// estimate is exact.
    pub cap: i64,
    pub certified: bool,
    /// Dimension of the family of lines carried by the members (= param_dim
    /// for line families; lines inside bigger members add 2(nrows-2) more).
    pub carrier_dim: i64,
    /// Whether the union is smaller than a generically finite line-carrier
    /// of this dimension would sweep (union dim < carrier_dim + 1).
    pub compressed: bool,
    pub trials: usize,
    pub seed: u64,
}

/// Generic dimension of the union of the members: parametrize
/// (t, mu) -> sum_r mu_r * row_r(t) and take the max Jacobian rank minus one
/// over random exact sample points.
pub fn union_dimension(
    family: &SubspaceFamily,
    trials: usize,
    seed: u64,
) -> Result<UnionDimensionReport> {
    let field = family.field();
    let nvars = family.matrix().nvars();
    let nrows = family.nrows();
    let ncols = family.matrix().ncols();
    let total = nvars + nrows;
    let mut coords = vec![MultiPoly::zero(field, total); ncols];
    for r in 0..nrows {
        let mu = MultiPoly::variable(field, nvars + r, total);
        for (j, coord) in coords.iter_mut().enumerate() {
            *coord = coord.add(&mu.mul(&family.matrix().entry(r, j).extend_vars(total, 0)));
        }
    }

    let mut smp = Sampler::new(field, seed);
    let mut best: i64 = -1;
    let mut done = 0;
    let mut consecutive_bad = 0;
    while done < trials {
        let t = smp.nonzero_vector(nvars);
        let mu = smp.nonzero_vector(nrows);
        let degenerate = family.eval_matrix(&t)?.rank() < nrows;
        if degenerate {
            consecutive_bad += 1;
            if consecutive_bad >= 100 {
                return Err(GlabError::DegenerateEvaluation(
                    "100 consecutive degenerate union samples".into(),
                ));
            }
            continue;
        }
        consecutive_bad = 0;
        done += 1;
        let point: Vec<Scalar> = t.into_iter().chain(mu).collect();
        let rank = jacobian_at(&coords, &point)?.rank() as i64;
        best = best.max(rank - 1);
    }

    let cap = (family.ambient() as i64).min(family.param_dim() as i64 + nrows as i64 - 1);
    let carrier_dim = family.param_dim() as i64 + 2 * (nrows as i64 - 2).max(0);
    Ok(UnionDimensionReport {
        dim: best,
        cap,
        certified: best == cap,
        carrier_dim,
        compressed: best < carrier_dim + 1,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{exterior_square, plucker};

    const Q: FieldTag = FieldTag::Rationals;

    fn qv(ints: &[i64]) -> Vec<Scalar> {
        ints.iter().map(|&i| Scalar::from_int(Q, i)).collect()
    }

    #[test]
    fn veronese_shapes_and_members() {
        let f = veronese_family(Q, 1).unwrap();
        assert_eq!((f.param_dim(), f.ambient(), f.nrows()), (1, 3, 2));
        let m = f.eval_matrix(&qv(&[1, 2])).unwrap();
        assert_eq!(
            m,
            Matrix::from_int_rows(Q, &[&[1, 2, 0, 0], &[0, 0, 1, 2]])
        );
        let f2 = veronese_family(Q, 2).unwrap();
        let m2 = f2.eval_matrix(&qv(&[0, 0, 1])).unwrap();
        assert_eq!(m2.rank(), 2);
        assert_eq!(
            m2,
            Matrix::from_int_rows(Q, &[&[0, 0, 1, 0, 0, 0], &[0, 0, 0, 0, 0, 1]])
        );
        assert!(veronese_family(Q, 0).is_err());
        assert!(matches!(
            f.member(&qv(&[0, 0])),
            Err(GlabError::ZeroParameter)
        ));
    }

    #[test]
    fn veronese_minors_are_the_squares() {
        let f = veronese_family(Q, 1).unwrap();
        let minors = f.minors().unwrap();
        let strings: Vec<String> = minors.iter().map(|p| p.to_string()).collect();
        assert_eq!(strings, vec!["0", "t0^2", "t0*t1", "t0*t1", "t1^2", "0"]);
    }

    #[test]
    fn projection_centers() {
        let p1 = veronese_projection(Q, 1).unwrap();
        assert_eq!(
            *p1.matrix(),
            Matrix::from_int_rows(Q, &[&[1, 0, 0, 0], &[0, 1, 1, 0], &[0, 0, 0, 1]])
        );
        assert_eq!(p1.center().dim(), 0);
        assert!(p1.center().contains_point(&qv(&[0, 1, -1, 0])).unwrap());

        let p2 = veronese_projection(Q, 2).unwrap();
        assert_eq!(p2.center().dim(), 1);
        assert!(p2.center().contains_point(&qv(&[0, 1, 0, -1, 0, 0])).unwrap());
        assert!(p2.center().contains_point(&qv(&[0, 0, 1, 0, -1, 0])).unwrap());

        for n in 1..=5 {
            let p = veronese_projection(Q, n).unwrap();
            assert_eq!(p.center().dim(), n as i64 - 1);
        }
    }

    #[test]
    fn center_points_have_no_image() {
        let p = veronese_projection(Q, 1).unwrap();
        assert!(matches!(
            p.apply_point(&qv(&[0, 1, -1, 0])),
            Err(GlabError::ProjectionUndefined)
        ));
        assert_eq!(p.apply_point(&qv(&[1, 2, 3, 4])).unwrap(), qv(&[1, 5, 4]));
    }

    #[test]
    fn projected_family_has_the_shifted_form() {
        for n in [1usize, 2] {
            let f = veronese_family(Q, n).unwrap();
            let p = veronese_projection(Q, n).unwrap();
            let g = apply_projection(&p, &f).unwrap();
            assert_eq!(g.ambient(), n + 1);
            for i in 0..=n {
                let ti = MultiPoly::variable(Q, i, n + 1);
                assert_eq!(*g.matrix().entry(0, i), ti);
                assert_eq!(*g.matrix().entry(1, i + 1), ti);
            }
            assert!(g.matrix().entry(0, n + 1).is_zero());
            assert!(g.matrix().entry(1, 0).is_zero());
            assert_eq!(g.witness_rule(), WitnessRule::ParameterSpan);
        }
    }

    #[test]
    fn identity_projection_keeps_the_family() {
        let f = veronese_family(Q, 2).unwrap();
        let id = ProjectionMap::new(Matrix::identity(Q, 6)).unwrap();
        assert_eq!(id.center().dim(), -1);
        let g = apply_projection(&id, &f).unwrap();
        assert_eq!(g.matrix(), f.matrix());
    }

    #[test]
    fn projection_undefined_when_every_member_meets_center() {
        // every line (lambda t, mu t) meets {x2 = x3 = 0} in (t, 0, 0) != 0
        let f = veronese_family(Q, 1).unwrap();
        let bad_center = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[1, 0, 0, 0], &[0, 1, 0, 0]],
        ))
        .unwrap();
        let p = ProjectionMap::from_center(&bad_center).unwrap();
        assert!(matches!(
            apply_projection(&p, &f),
            Err(GlabError::ProjectionUndefined)
        ));
    }

    #[test]
    fn degenerate_evaluations_are_reported() {
        let t0 = MultiPoly::variable(Q, 0, 2);
        let t1 = MultiPoly::variable(Q, 1, 2);
        let zero = MultiPoly::zero(Q, 2);
        let m = PolyMatrix::from_entries(vec![
            vec![t0, zero.clone(), zero.clone()],
            vec![zero.clone(), t1, zero],
        ])
        .unwrap();
        let f = SubspaceFamily::new(m).unwrap();
        assert!(matches!(
            f.member(&qv(&[1, 0])),
            Err(GlabError::DegenerateEvaluation(_))
        ));
        assert!(f.member(&qv(&[1, 1])).is_ok());
    }

    #[test]
    fn plucker_functoriality_under_projection() {
        for n in 1..=3usize {
            let f = veronese_family(Q, n).unwrap();
            let p = veronese_projection(Q, n).unwrap();
            let g = apply_projection(&p, &f).unwrap();
            let e = exterior_square(p.matrix());
            let mut smp = Sampler::new(Q, 2024 + n as u64);
            for _ in 0..1000 {
                let t = smp.nonzero_vector(n + 1);
                let (src, img) = match (f.member(&t), g.member(&t)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                let ps = plucker(&src).unwrap();
                let mapped: Vec<Scalar> = (0..e.nrows())
                    .map(|r| {
                        let mut acc = Scalar::zero(Q);
                        for c in 0..e.ncols() {
                            acc = &acc + &(e.at(r, c) * &ps[c]);
                        }
                        acc
                    })
                    .collect();
                assert_eq!(
                    normalize_projective(mapped).unwrap(),
                    plucker(&img).unwrap()
                );
            }
        }
    }

    #[test]
    fn scroll_fiber_evaluations() {
        let f = scroll_fiber_family(Q, 1).unwrap();
        assert_eq!(
            f.eval_matrix(&qv(&[1, 0])).unwrap(),
            Matrix::from_int_rows(Q, &[&[1, 0, 0, 0, 0], &[0, 0, 1, 0, 0]])
        );
        let a = f.member(&qv(&[1, 0])).unwrap();
        let b = f.member(&qv(&[0, 1])).unwrap();
        assert_eq!(a.meet(&b).unwrap().dim(), -1);
        let f2 = scroll_fiber_family(Q, 2).unwrap();
        let m = f2.eval_matrix(&qv(&[1, 1])).unwrap();
        assert_eq!((m.nrows(), m.ncols(), m.rank()), (3, 7, 3));
    }

    #[test]
    fn scroll_orthogonality_is_polynomial() {
        for r in 1..=4usize {
            let fib = scroll_fiber_family(Q, r).unwrap();
            let dual = scroll_dual_family(Q, r).unwrap();
            for i in 0..fib.nrows() {
                for k in 0..dual.nrows() {
                    let mut acc = MultiPoly::zero(Q, 2);
                    for j in 0..=fib.ambient() {
                        acc = acc.add(&fib.matrix().entry(i, j).mul(dual.matrix().entry(k, j)));
                    }
                    assert!(acc.is_zero(), "r={r} row {i} x dual row {k}");
                }
            }
        }
    }

    #[test]
    fn dual_planes_meet_in_one_point() {
        let dual = scroll_dual_family(Q, 1).unwrap();
        let at_10 = dual.member(&qv(&[1, 0])).unwrap();
        let at_01 = dual.member(&qv(&[0, 1])).unwrap();
        let e134 = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[0, 1, 0, 0, 0], &[0, 0, 0, 1, 0], &[0, 0, 0, 0, 1]],
        ))
        .unwrap();
        let e023 = ProjSubspace::from_spanning_rows(&Matrix::from_int_rows(
            Q,
            &[&[1, 0, 0, 0, 0], &[0, 0, 1, 0, 0], &[0, 0, 0, 1, 0]],
        ))
        .unwrap();
        assert_eq!(at_10, e134);
        assert_eq!(at_01, e023);
        let meet = at_10.meet(&at_01).unwrap();
        assert_eq!(meet.dim(), 0);
        assert!(meet.contains_point(&qv(&[0, 0, 0, 1, 0])).unwrap());
    }

    #[test]
    fn lift_projects_onto_the_dual_family() {
        for r in 1..=3usize {
            let (lift, map) = scroll_lift(Q, r).unwrap();
            let dual = scroll_dual_family(Q, r).unwrap();
            assert_eq!(lift.ambient(), 2 * r + 3);
            assert!(map
                .center()
                .basis()
                .row(0)
                .iter()
                .enumerate()
                .all(|(j, x)| {
                    let expect: i64 = if j == 2 * r + 1 {
                        1
                    } else if j == 2 * r + 2 {
                        -1
                    } else {
                        0
                    };
                    *x == Scalar::from_int(Q, expect)
                }));
            let projected = apply_projection(&map, &lift).unwrap();
            assert_eq!(projected.matrix(), dual.matrix());

            // evaluations at 2r+4 distinct parameters span all of P^{2r+3}
            let mut stacked: Option<Matrix> = None;
            for i in 0..2 * r + 4 {
                let t = qv(&[1, i as i64]);
                let m = lift.eval_matrix(&t).unwrap();
                stacked = Some(match stacked {
                    None => m,
                    Some(s) => s.stack(&m).unwrap(),
                });
            }
            assert_eq!(stacked.unwrap().rank(), 2 * r + 4);
        }
    }

    #[test]
    fn lift_example_rows_r1() {
        let (lift, _) = scroll_lift(Q, 1).unwrap();
        let m = lift.eval_matrix(&qv(&[3, 5])).unwrap();
        assert_eq!(
            m,
            Matrix::from_int_rows(
                Q,
                &[
                    &[5, -3, 0, 0, 0, 0],
                    &[0, 0, 5, -3, 0, 0],
                    &[0, 0, 0, 0, 5, -3]
                ]
            )
        );
    }

    #[test]
    fn union_dimensions_of_known_families() {
        for n in 1..=2usize {
            let f = veronese_family(Q, n).unwrap();
            let rep = union_dimension(&f, 20, 11).unwrap();
            assert_eq!(rep.dim, n as i64 + 1);
            assert!(rep.certified);
            assert!(!rep.compressed);
        }
        let dual = scroll_dual_family(Q, 1).unwrap();
        let rep = union_dimension(&dual, 20, 11).unwrap();
        assert_eq!(rep.dim, 3);
        assert!(rep.certified);
        assert_eq!(rep.carrier_dim, 3);
        assert!(rep.compressed);
    }

    #[test]
    fn union_dimension_degenerate_families() {
        // constant family: one fixed line, union is the line itself
        let one = MultiPoly::constant(Scalar::one(Q), 1);
        let zero = MultiPoly::zero(Q, 1);
        let m = PolyMatrix::from_entries(vec![
            vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), one.clone(), zero.clone(), zero.clone()],
        ])
        .unwrap();
        let constant = SubspaceFamily::new(m).unwrap();
        assert_eq!(union_dimension(&constant, 20, 5).unwrap().dim, 1);

        // cone family: lines through e0 sweep the whole P^3
        let t = |i| MultiPoly::variable(Q, i, 3);
        let z3 = MultiPoly::zero(Q, 3);
        let m = PolyMatrix::from_entries(vec![
            vec![
                MultiPoly::constant(Scalar::one(Q), 3),
                z3.clone(),
                z3.clone(),
                z3.clone(),
            ],
            vec![z3, t(0), t(1), t(2)],
        ])
        .unwrap();
        let cone = SubspaceFamily::new(m).unwrap();
        assert_eq!(union_dimension(&cone, 20, 5).unwrap().dim, 3);
    }

    #[test]
    fn scroll_line_family_members_sit_in_dual_planes() {
        for r in 1..=2usize {
            let lines = scroll_line_family(Q, r).unwrap();
            assert_eq!(lines.param_dim(), 2 * r + 3);
            assert_eq!(lines.row_degrees(), &[2, 2]);
            assert_eq!(lines.witness_rule(), WitnessRule::NoRule);
            let dual = scroll_dual_family(Q, r).unwrap();
            let mut smp = Sampler::new(Q, 77);
            for _ in 0..10 {
                let t = smp.nonzero_vector(2 * r + 4);
                let (line, plane) = match (lines.member(&t), dual.member(&t[..2])) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                assert_eq!(line.dim(), 1);
                assert!(plane.contains(&line).unwrap());
            }
        }
    }

    #[test]
    fn double_veronese_small_cases() {
        let r1 = double_veronese_check(1, 7).unwrap();
        assert_eq!(r1.coefficient_rank, 3);
        assert_eq!(r1.minor_count, 3);
        assert_eq!(r1.exhaustive_points, Some(6));
        assert!(r1.pass(), "{r1:?}");

        let r2 = double_veronese_check(2, 7).unwrap();
        assert_eq!(r2.coefficient_rank, 6);
        assert_eq!(r2.exhaustive_points, Some(31));
        assert!(r2.pass(), "{r2:?}");
    }

    #[test]
    fn family_documents_round_trip() {
        let f = veronese_family(Q, 1).unwrap();
        let doc = f.to_doc();
        assert_eq!(doc.degree, vec![1, 1]);
        let back = SubspaceFamily::from_doc(&doc, Q).unwrap();
        assert_eq!(back.matrix(), f.matrix());

        let mut bad = doc.clone();
        bad.ambient = 7;
        assert!(SubspaceFamily::from_doc(&bad, Q).is_err());
        let mut bad = doc;
        bad.degree = vec![1, 2];
        assert!(SubspaceFamily::from_doc(&bad, Q).is_err());
    }
}
