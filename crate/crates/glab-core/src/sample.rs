//! Deterministic randomized sampling.
//!
//! Every randomized routine in the crate takes an explicit seed and draws
//! from a counter-based generator, so reports are reproducible bit for bit.
//! Rational mode draws integers in [-1000, 1000]; prime mode draws uniform
//! field elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GlabError, Result};
use crate::matrix::Matrix;
use crate::projspace::ProjSubspace;
use crate::scalar::{FieldTag, Scalar};

pub struct Sampler {
    field: FieldTag,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(field: FieldTag, seed: u64) -> Sampler {
        Sampler {
            field,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn scalar(&mut self) -> Scalar {
        match self.field {
            FieldTag::Rationals => {
                Scalar::from_int(self.field, self.rng.random_range(-1000..=1000))
            }
            FieldTag::Prime(p) => {
                Scalar::from_int(self.field, self.rng.random_range(0..p) as i64)
            }
        }
    }

    pub fn nonzero_scalar(&mut self) -> Scalar {
        loop {
            let s = self.scalar();
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn vector(&mut self, len: usize) -> Vec<Scalar> {
        (0..len).map(|_| self.scalar()).collect()
    }

    pub fn nonzero_vector(&mut self, len: usize) -> Vec<Scalar> {
        loop {
            let v = self.vector(len);
            if v.iter().any(|x| !x.is_zero()) {
                return v;
            }
        }
    }

    /// A random point of P^n as an (n+1)-vector.
    pub fn projective_point(&mut self, n: usize) -> Vec<Scalar> {
        self.nonzero_vector(n + 1)
    }

    /// A random subspace of the stated projective dimension (resamples the
    /// rare rank-deficient draws).
    pub fn subspace_of_dim(&mut self, ambient: usize, dim: usize) -> ProjSubspace {
        assert!(dim <= ambient);
        loop {
            let rows: Vec<Vec<Scalar>> = (0..=dim).map(|_| self.vector(ambient + 1)).collect();
            let m = Matrix::from_rows(rows).expect("sampled rows share the field");
            let s = ProjSubspace::from_spanning_rows(&m).expect("ambient is positive");
            if s.dim() == dim as i64 {
                return s;
            }
        }
    }

    /// A random nonzero point in the row space of `m`.
    pub fn point_in_rowspace(&mut self, m: &Matrix) -> Vec<Scalar> {
        assert!(m.nrows() > 0, "empty row space has no points");
        loop {
            let coeffs = self.vector(m.nrows());
            let mut v = vec![Scalar::zero(m.field()); m.ncols()];
            for (r, c) in coeffs.iter().enumerate() {
                for j in 0..m.ncols() {
                    v[j] = &v[j] + &(c * m.at(r, j));
                }
            }
            if v.iter().any(|x| !x.is_zero()) {
                return v;
            }
        }
    }
}

/// All points of P^n over a small prime field, one normalized representative
/// each (first nonzero coordinate scaled to 1).
pub fn projective_points(field: FieldTag, n: usize) -> Result<Vec<Vec<Scalar>>> {
    let FieldTag::Prime(p) = field else {
        return Err(GlabError::InvalidArgument(
            "exhaustive point enumeration needs a finite field".into(),
        ));
    };
    let total = (p as u128).pow(n as u32 + 1);
    if total > 1 << 20 {
        return Err(GlabError::InvalidArgument(format!(
            "too many vectors to enumerate: {total}"
        )));
    }
    let mut out = Vec::new();
    // leading-one representatives: for each pivot position, all suffixes
    for pivot in 0..=n {
        let tail = n - pivot;
        let count = (p as u64).pow(tail as u32);
        for code in 0..count {
            let mut v = vec![Scalar::zero(field); n + 1];
            v[pivot] = Scalar::one(field);
            let mut c = code;
            for k in (pivot + 1)..=n {
                v[k] = Scalar::from_int(field, (c % p) as i64);
                c /= p;
            }
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let f = FieldTag::Rationals;
        let a: Vec<Scalar> = Sampler::new(f, 42).vector(10);
        let b: Vec<Scalar> = Sampler::new(f, 42).vector(10);
        assert_eq!(a, b);
        let c: Vec<Scalar> = Sampler::new(f, 43).vector(10);
        assert_ne!(a, c);
    }

    #[test]
    fn prime_draws_lie_in_field() {
        let f = FieldTag::prime(101).unwrap();
        let mut s = Sampler::new(f, 7);
        for _ in 0..100 {
            match s.scalar() {
                Scalar::Prime { value, modulus } => {
                    assert_eq!(modulus, 101);
                    assert!(value < 101);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn subspace_sampling_hits_requested_dim() {
        let mut s = Sampler::new(FieldTag::Rationals, 3);
        for dim in 0..4 {
            assert_eq!(s.subspace_of_dim(5, dim).dim(), dim as i64);
        }
    }

    #[test]
    fn point_counts_over_f5() {
        let f5 = FieldTag::prime(5).unwrap();
        assert_eq!(projective_points(f5, 1).unwrap().len(), 6);
        assert_eq!(projective_points(f5, 2).unwrap().len(), 31);
        let f3 = FieldTag::prime(3).unwrap();
        assert_eq!(projective_points(f3, 3).unwrap().len(), 40);
    }

    #[test]
    fn rowspace_points_satisfy_membership() {
        let m = Matrix::from_int_rows(FieldTag::Rationals, &[&[1, 0, 1, 0], &[0, 1, 0, 1]]);
        let s = ProjSubspace::from_spanning_rows(&m).unwrap();
        let mut smp = Sampler::new(FieldTag::Rationals, 9);
        for _ in 0..20 {
            let p = smp.point_in_rowspace(&m);
            assert!(s.contains_point(&p).unwrap());
        }
    }
}
