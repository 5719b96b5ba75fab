//! Hypercomplex n-numbers realized as circulant matrices.
//!
//! A [`Circulant`] stores only the generating row: `coeffs[j]` is the
//! coefficient of the j-th power of the cyclic shift generator, so the dense
//! matrix has entry `(r, c) = coeffs[(c - r) mod n]`. Products are cyclic
//! convolutions and every element is diagonalized by the discrete Fourier
//! basis. The forward kernel is `exp(+2πi q j / n)`:
//!
//! ```text
//! k_q = Σ_j coeffs[j] · exp(2πi q j / n)
//! coeffs[j] = (1/n) Σ_q k_q · exp(-2πi q j / n)
//! ```

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    coeffs: Vec<C64>,
}

/// Unit root `exp(±2πi·p/n)`, reducing `p` mod n first to keep the angle small.
pub(crate) fn twiddle(p: usize, n: usize, sign: f64) -> C64 {
    let p = p % n;
    C64::from_polar(1.0, sign * TAU * p as f64 / n as f64)
}

impl Circulant {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCirculant);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(vec![C64::new(0.0, 0.0); n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut c = Self::zero(n)?;
        c.coeffs[0] = C64::new(1.0, 0.0);
        Ok(c)
    }

    /// The cyclic shift `[e_1]`: ones on the first superdiagonal and in the
    /// lower-left corner. For n = 1 this degenerates to the identity.
    pub fn generator(n: usize) -> Result<Self> {
        let mut c = Self::zero(n)?;
        c.coeffs[1 % n] = C64::new(1.0, 0.0);
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Dense entry `(r, c)` of the represented matrix.
    pub fn entry(&self, r: usize, c: usize) -> C64 {
        let n = self.n();
        self.coeffs[(c + n - r % n) % n]
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// Ring product: cyclic convolution of the generating rows.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = self.n();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[(i + j) % n] += a * b;
            }
        }
        Ok(Self { coeffs: out })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { coeffs })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n()).expect("n >= 1");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base).expect("same n");
            }
            base = base.multiply(&base).expect("same n");
            e >>= 1;
        }
        acc
    }

    /// Matrix-vector product with the represented dense matrix.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.n();
        if v.len() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: v.len(),
            });
        }
        Ok((0..n)
            .map(|r| (0..n).map(|c| self.entry(r, c) * v[c]).sum())
            .collect())
    }

    /// Raw eigenvalues `k_q`, ordered by mode index q ascending. No 1/n
    /// normalization is applied here.
    pub fn eigenvalues(&self) -> Vec<C64> {
        forward_dft(&self.coeffs)
    }

    /// Inverse of [`Circulant::eigenvalues`].
    pub fn synthesize(eigvals: &[C64]) -> Result<Self> {
        if eigvals.is_empty() {
            return Err(Error::EmptyCirculant);
        }
        let n = eigvals.len() as f64;
        let coeffs = inverse_dft_unscaled(eigvals)
            .into_iter()
            .map(|c| c / n)
            .collect();
        Ok(Self { coeffs })
    }

    /// Largest coefficient magnitude, handy for comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The eigen-projectors `π_q`: idempotent, mutually annihilating, summing to
/// the identity. `π_q` has a single unit eigenvalue at mode q.
pub fn projectors(n: usize) -> Result<Vec<Circulant>> {
    if n == 0 {
        return Err(Error::EmptyCirculant);
    }
    let inv_n = 1.0 / n as f64;
    Ok((0..n)
        .map(|q| Circulant {
            coeffs: (0..n).map(|j| twiddle(q * j, n, -1.0) * inv_n).collect(),
        })
        .collect())
}

/// `out[q] = Σ_j v[j] exp(+2πi q j / n)`.
pub(crate) fn forward_dft(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|q| {
            v.iter()
                .enumerate()
                .map(|(j, &c)| c * twiddle(q * j, n, 1.0))
                .sum()
        })
        .collect()
}

/// `out[j] = Σ_q v[q] exp(-2πi q j / n)`, without the 1/n factor.
pub(crate) fn inverse_dft_unscaled(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            v.iter()
                .enumerate()
                .map(|(q, &c)| c * twiddle(q * j, n, -1.0))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    type Dense = Vec<Vec<C64>>;

    fn dense(x: &Circulant) -> Dense {
        let n = x.n();
        let row = x.coeffs();
        (0..n)
            .map(|r| (0..n).map(|col| row[(col + n - r) % n]).collect())
            .collect()
    }

    fn dense_mul(a: &Dense, b: &Dense) -> Dense {
        let n = a.len();
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|col| (0..n).map(|s| a[r][s] * b[s][col]).sum())
                    .collect()
            })
            .collect()
    }

    fn max_dense_diff(a: &Dense, b: &Dense) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn arb_circulant(n: usize) -> impl Strategy<Value = Circulant> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n)
            .prop_map(|v| Circulant::new(v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap())
    }

    #[test]
    fn generator_of_one_is_identity() {
        assert_eq!(Circulant::generator(1).unwrap(), Circulant::identity(1).unwrap());
    }

    #[test]
    fn generator_dense_layout() {
        let d = dense(&Circulant::generator(4).unwrap());
        for r in 0..4 {
            for col in 0..4 {
                let one = matches!((r, col), (0, 1) | (1, 2) | (2, 3) | (3, 0));
                assert_eq!(d[r][col], c(if one { 1.0 } else { 0.0 }, 0.0), "({r},{col})");
            }
        }
        let g = Circulant::generator(4).unwrap();
        assert_eq!(g.entry(3, 0), c(1.0, 0.0));
    }

    #[test]
    fn generator_cubed_is_identity() {
        let g = dense(&Circulant::generator(3).unwrap());
        let g3 = dense_mul(&dense_mul(&g, &g), &g);
        let id = dense(&Circulant::identity(3).unwrap());
        assert!(max_dense_diff(&g3, &id) < 1e-15);
        assert_eq!(Circulant::generator(3).unwrap().pow(3), Circulant::identity(3).unwrap());
    }

    #[test]
    fn rejects_zero_size() {
        assert!(matches!(Circulant::generator(0), Err(Error::EmptyCirculant)));
        assert!(matches!(projectors(0), Err(Error::EmptyCirculant)));
        assert!(Circulant::synthesize(&[]).is_err());
    }

    #[test]
    fn multiply_rejects_mismatch() {
        let a = Circulant::identity(3).unwrap();
        let b = Circulant::identity(4).unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::SizeMismatch { left: 3, right: 4 })));
    }

    #[test]
    fn generator_two_squares_to_identity() {
        let g = Circulant::generator(2).unwrap();
        let dg = dense(&g);
        let oracle = dense_mul(&dg, &dg);
        let sq = g.multiply(&g).unwrap();
        assert!(max_dense_diff(&dense(&sq), &oracle) < 1e-15);
        assert_eq!(sq, Circulant::identity(2).unwrap());
    }

    #[test]
    fn generator_four_eigenvalues() {
        // Dense oracle: eigenvector v_c = exp(2πi q c / 4) of the shift has eigenvalue i^q.
        let ev = Circulant::generator(4).unwrap().eigenvalues();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
        let g = Circulant::generator(4).unwrap();
        for (q, &k) in ev.iter().enumerate() {
            let v: Vec<C64> = (0..4).map(|col| twiddle(q * col, 4, 1.0)).collect();
            let mv = g.apply(&v).unwrap();
            for (x, y) in mv.iter().zip(&v) {
                assert!((x - k * y).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn nearest_neighbour_eigenvalues_are_real_cosines() {
        let (x0, x1) = (0.7, -1.3);
        for n in 3..=8 {
            let mut row = vec![0.0; n];
            row[0] = x0;
            row[1] = x1;
            row[n - 1] = x1;
            let ev = Circulant::from_real(&row).unwrap().eigenvalues();
            for (q, k) in ev.iter().enumerate() {
                let want = x0 + 2.0 * x1 * (TAU * q as f64 / n as f64).cos();
                assert!((k.re - want).abs() < 1e-13 && k.im.abs() < 1e-13, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn identity_eigenvalues_and_synthesis() {
        let ev = Circulant::identity(5).unwrap().eigenvalues();
        assert!(ev.iter().all(|k| (k - c(1.0, 0.0)).norm() < 1e-15));
        let s = Circulant::synthesize(&[c(1.0, 0.0); 5]).unwrap();
        assert!(s.max_abs_diff(&Circulant::identity(5).unwrap()) < 1e-15);
    }

    #[test]
    fn synthesize_shift_spectrum() {
        let s = Circulant::synthesize(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert!(s.max_abs_diff(&Circulant::generator(4).unwrap()) < 1e-15);
    }

    #[test]
    fn single_projector_is_identity() {
        let p = projectors(1).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].max_abs_diff(&Circulant::identity(1).unwrap()) < 1e-15);
    }

    #[test]
    fn projector_completeness_and_orthogonality() {
        let p = projectors(3).unwrap();
        let sum = p.iter().skip(1).fold(p[0].clone(), |acc, x| acc.add(x).unwrap());
        assert!(sum.max_abs_diff(&Circulant::identity(3).unwrap()) < 1e-12);

        let p4 = projectors(4).unwrap();
        let prod = dense_mul(&dense(&p4[1]), &dense(&p4[2]));
        let zero = dense(&Circulant::zero(4).unwrap());
        assert!(max_dense_diff(&prod, &zero) < 1e-12);
        assert!(p4[1].multiply(&p4[2]).unwrap().max_abs_diff(&Circulant::zero(4).unwrap()) < 1e-12);
    }

    #[test]
    fn projector_spectrum_is_a_unit_vector() {
        for (q, p) in projectors(6).unwrap().iter().enumerate() {
            for (r, k) in p.eigenvalues().iter().enumerate() {
                let want = if q == r { 1.0 } else { 0.0 };
                assert!((k - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn identity_is_neutral(x in arb_circulant(5)) {
            let id = Circulant::identity(5).unwrap();
            prop_assert!(id.multiply(&x).unwrap().max_abs_diff(&x) < 1e-15);
        }

        #[test]
        fn ring_axioms_against_dense(
            (a, b, cc) in (1usize..=8).prop_flat_map(|n| (arb_circulant(n), arb_circulant(n), arb_circulant(n)))
        ) {
            let ab = a.multiply(&b).unwrap();
            prop_assert!(max_dense_diff(&dense(&ab), &dense_mul(&dense(&a), &dense(&b))) < 1e-10);
            prop_assert!(ab.max_abs_diff(&b.multiply(&a).unwrap()) < 1e-10);
            let left = ab.multiply(&cc).unwrap();
            let right = a.multiply(&b.multiply(&cc).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right) < 1e-10);
            let dist = a.multiply(&b.add(&cc).unwrap()).unwrap();
            let split = ab.add(&a.multiply(&cc).unwrap()).unwrap();
            prop_assert!(dist.max_abs_diff(&split) < 1e-10);
        }

        #[test]
        fn spectral_homomorphism(a in arb_circulant(7), b in arb_circulant(7)) {
            let ea = a.eigenvalues();
            let eb = b.eigenvalues();
            let eab = a.multiply(&b).unwrap().eigenvalues();
            for q in 0..7 {
                prop_assert!((eab[q] - ea[q] * eb[q]).norm() < 1e-10);
            }
        }

        #[test]
        fn synthesis_round_trip(x in arb_circulant(6)) {
            let back = Circulant::synthesize(&x.eigenvalues()).unwrap();
            prop_assert!(back.max_abs_diff(&x) < 1e-12);
        }
    }

}
