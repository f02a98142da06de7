//! Dense complex matrix kernels.
//!
//! Matrices are square and stored row-major. Everything here is generic over
//! [`Real`]; the crate root exposes `f64` aliases.

mod eigen;
mod lanczos;
mod pauli;

pub use eigen::{eigvalsh, HermitianEigen};
pub use lanczos::{top_singular_value, LanczosOptions};
pub use pauli::PauliRotation;

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::scalar::{cexp, cone, czero, Cplx, Real};

/// Dimensions at or below this use the Gram-matrix eigenvalue route for the
/// spectral norm; larger ones use power iteration.
pub const DENSE_NORM_CUTOFF: usize = 256;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![czero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = cone();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a square.
    pub fn from_row_major(entries: Vec<Cplx<T>>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn diagonal(diag: &[Cplx<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Cplx<T>] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Cplx<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn scale(&self, z: Cplx<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * z).collect(),
        }
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// `‖A − A†‖_F / max(‖A‖_F, 1)`.
    pub fn hermitian_deviation(&self) -> T {
        let n = self.dim;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt() / self.frobenius_norm().max(T::one())
    }

    /// Dense product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector.
    pub fn matvec(&self, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(v.len(), self.dim, "matvec dimension");
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    /// `self† · v` without forming the adjoint.
    pub fn adjoint_matvec(&self, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(v.len(), self.dim, "matvec dimension");
        let mut out = vec![czero(); self.dim];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    /// `self^p` by repeated squaring.
    pub fn pow(&self, mut p: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut first = true;
        while p > 0 {
            if p & 1 == 1 {
                result = if first {
                    base.clone()
                } else {
                    result.matmul(&base).expect("same dim")
                };
                first = false;
            }
            p >>= 1;
            if p > 0 {
                base = base.matmul(&base).expect("same dim");
            }
        }
        result
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Cplx<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("matrix dimensions differ")
    }
}

/// `exp(z A)` for Hermitian `A`, via `A = U D U†`.
pub fn herm_exp<T: Real>(a: &ComplexMatrix<T>, z: Cplx<T>) -> Result<ComplexMatrix<T>> {
    if !a.is_finite() || !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let eig = HermitianEigen::new(a)?;
    Ok(eig.exp(z))
}

/// Largest singular value.
///
/// Up to [`DENSE_NORM_CUTOFF`] the full singular spectrum is obtained from the
/// eigenvalues of `A†A`; above it, power iteration on `A†A` (relative tolerance
/// 1e-12, at most 1e4 iterations) from a fixed pseudo-random start.
pub fn spectral_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.dim() <= DENSE_NORM_CUTOFF {
        Ok(singular_values(a)?[0])
    } else {
        power_iteration_norm(a, T::lit(1e-12), 10_000)
    }
}

/// All singular values in descending order.
pub fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    let gram = a.adjoint().matmul(a)?;
    let mut vals = eigvalsh(&gram)?;
    vals.reverse();
    Ok(vals.into_iter().map(|v| v.max(T::zero()).sqrt()).collect())
}

fn power_iteration_norm<T: Real>(a: &ComplexMatrix<T>, tol: T, max_iter: usize) -> Result<T> {
    let n = a.dim();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5eed_0f_a11);
    let mut v: Vec<Cplx<T>> = (0..n)
        .map(|_| Cplx::new(T::lit(rng.random::<f64>() - 0.5), T::lit(rng.random::<f64>() - 0.5)))
        .collect();
    normalize(&mut v);
    let mut prev = T::zero();
    for _ in 0..max_iter {
        let w = a.adjoint_matvec(&a.matvec(&v));
        let lambda = dot(&v, &w).re;
        let nrm = norm(&w);
        if nrm == T::zero() {
            return Ok(T::zero());
        }
        v = w.into_iter().map(|x| x / nrm).collect();
        if (lambda - prev).abs() <= tol * lambda.abs() {
            return Ok(lambda.max(T::zero()).sqrt());
        }
        prev = lambda;
    }
    Ok(prev.max(T::zero()).sqrt())
}

/// Left-to-right product; the first factor ends up leftmost.
pub fn product_chain<T: Real>(factors: &[ComplexMatrix<T>]) -> Result<ComplexMatrix<T>> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| crate::error::invalid("factors", "empty product"))?;
    rest.iter().try_fold(first.clone(), |acc, f| acc.matmul(f))
}

pub(crate) fn dot<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
    a.iter().zip(b).fold(czero(), |acc, (&x, &y)| acc + x.conj() * y)
}

pub(crate) fn norm<T: Real>(a: &[Cplx<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

pub(crate) fn normalize<T: Real>(a: &mut [Cplx<T>]) {
    let n = norm(a);
    if n > T::zero() {
        for x in a.iter_mut() {
            *x = *x / n;
        }
    }
}

impl<T: Real> HermitianEigen<T> {
    /// `U f(D) U†` for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(T) -> Cplx<T>) -> ComplexMatrix<T> {
        let n = self.values.len();
        let fd: Vec<Cplx<T>> = self.values.iter().map(|&d| f(d)).collect();
        let u = &self.vectors;
        let mut out = ComplexMatrix::zeros(n);
        // out = (U fD) U†, accumulated row by row.
        for i in 0..n {
            let urow = u.row(i);
            let scaled: Vec<Cplx<T>> = urow.iter().zip(&fd).map(|(&x, &y)| x * y).collect();
            for j in 0..n {
                let vrow = u.row(j);
                let mut acc = czero();
                for (&s, &v) in scaled.iter().zip(vrow) {
                    acc += s * v.conj();
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }

    pub fn exp(&self, z: Cplx<T>) -> ComplexMatrix<T> {
        self.map(|d| cexp(z * d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn rand_matrix(dim: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        ComplexMatrix::from_fn(dim, |_, _| {
            Cplx::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn rand_hermitian(dim: usize, seed: u64) -> ComplexMatrix<f64> {
        let a = rand_matrix(dim, seed);
        (&a + &a.adjoint()).scale(c(0.5, 0.0))
    }

    fn sigma_x() -> ComplexMatrix<f64> {
        ComplexMatrix::from_fn(2, |i, j| if i != j { cone() } else { czero() })
    }

    fn sigma_z() -> ComplexMatrix<f64> {
        ComplexMatrix::diagonal(&[cone(), c(-1.0, 0.0)])
    }

    fn max_diff(a: &ComplexMatrix<f64>, b: &ComplexMatrix<f64>) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = ComplexMatrix::<f64>::zeros(3);
        let e = herm_exp(&z, c(0.7, -2.0)).unwrap();
        assert!(max_diff(&e, &ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn exp_of_sigma_z_at_minus_i_pi() {
        let e = herm_exp(&sigma_z(), c(0.0, -std::f64::consts::PI)).unwrap();
        let minus_i = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        assert!(max_diff(&e, &minus_i) < 1e-15);
    }

    #[test]
    fn exp_of_sigma_x_is_pauli_rotation() {
        let theta = 0.3_f64;
        let e = herm_exp(&sigma_x(), c(0.0, -theta)).unwrap();
        let expect = ComplexMatrix::from_row_major(vec![
            c(theta.cos(), 0.0),
            c(0.0, -theta.sin()),
            c(0.0, -theta.sin()),
            c(theta.cos(), 0.0),
        ])
        .unwrap();
        assert!(max_diff(&e, &expect) < 1e-12);
    }

    #[test]
    fn exp_rejects_non_hermitian_and_non_finite() {
        let mut a = sigma_x();
        a[(0, 1)] = c(2.0, 0.0);
        assert!(matches!(herm_exp(&a, c(0.0, 1.0)), Err(Error::NotHermitian { .. })));
        let mut b = sigma_z();
        b[(0, 0)] = c(f64::NAN, 0.0);
        assert_eq!(herm_exp(&b, c(0.0, 1.0)), Err(Error::NonFinite));
    }

    #[test]
    fn exp_is_unitary_and_additive() {
        for seed in 0..4 {
            let a = rand_hermitian(9, seed);
            let e1 = herm_exp(&a, c(0.0, -0.8)).unwrap();
            let e2 = herm_exp(&a, c(0.0, 1.9)).unwrap();
            let e12 = herm_exp(&a, c(0.0, 1.1)).unwrap();
            assert!(max_diff(&(&e1 * &e2), &e12) < 1e-10);
            for s in singular_values(&e1).unwrap() {
                assert!((s - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spectral_norm_basic() {
        assert!((spectral_norm(&ComplexMatrix::<f64>::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::<f64>::diagonal(&[c(3.0, 0.0), c(-4.0, 0.0), czero()]);
        assert!((spectral_norm(&d).unwrap() - 4.0).abs() < 1e-13);
    }

    /// Independent oracle: plain power iteration on A†A with many iterations.
    fn oracle_norm(a: &ComplexMatrix<f64>) -> f64 {
        let n = a.dim();
        let mut v: Vec<Cplx<f64>> = (0..n).map(|i| c(1.0 + i as f64 * 0.37, 0.1 * i as f64)).collect();
        let mut est = 0.0;
        for _ in 0..20_000 {
            let av: Vec<Cplx<f64>> = (0..n)
                .map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum())
                .collect();
            let w: Vec<Cplx<f64>> = (0..n)
                .map(|j| (0..n).map(|i| a[(i, j)].conj() * av[i]).sum())
                .collect();
            let nw = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            est = (nw / nv).sqrt();
            v = w.iter().map(|x| x / nw).collect();
        }
        est
    }

    #[test]
    fn spectral_norm_matches_power_iteration_oracle() {
        for seed in [11, 12, 13] {
            let a = rand_matrix(8, seed);
            let got = spectral_norm(&a).unwrap();
            let want = oracle_norm(&a);
            assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn large_dims_use_power_iteration() {
        let a = rand_hermitian(DENSE_NORM_CUTOFF + 4, 5);
        let eig = eigvalsh(&a).unwrap();
        let want = eig.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let got = spectral_norm(&a).unwrap();
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
    }

    #[test]
    fn product_chain_order_and_errors() {
        let i3 = vec![ComplexMatrix::<f64>::identity(2); 3];
        assert!(max_diff(&product_chain(&i3).unwrap(), &ComplexMatrix::identity(2)) < 1e-15);
        let xz = product_chain(&[sigma_x(), sigma_z()]).unwrap();
        let expect =
            ComplexMatrix::from_row_major(vec![czero(), c(-1.0, 0.0), cone(), czero()]).unwrap();
        assert!(max_diff(&xz, &expect) < 1e-15);
        assert!(product_chain::<f64>(&[]).is_err());
        assert!(product_chain(&[sigma_x(), ComplexMatrix::identity(3)]).is_err());
    }

    #[test]
    fn product_chain_of_unitaries_reassociates() {
        let us: Vec<_> = (0..5)
            .map(|s| herm_exp(&rand_hermitian(6, 100 + s), c(0.0, -1.3)).unwrap())
            .collect();
        let left = product_chain(&us).unwrap();
        let mut right = us[4].clone();
        for u in us[..4].iter().rev() {
            right = u.matmul(&right).unwrap();
        }
        assert!(max_diff(&left, &right) < 1e-12);
        for s in singular_values(&left).unwrap() {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn submultiplicative_norm() {
        for seed in 0..6 {
            let a = rand_matrix(7, 200 + seed);
            let b = rand_matrix(7, 300 + seed);
            let ab = spectral_norm(&(&a * &b)).unwrap();
            assert!(ab <= spectral_norm(&a).unwrap() * spectral_norm(&b).unwrap() + 1e-9);
        }
    }

    #[test]
    fn pow_matches_repeated_product() {
        let u = herm_exp(&rand_hermitian(5, 9), c(0.0, -0.4)).unwrap();
        let mut acc = ComplexMatrix::identity(5);
        for _ in 0..13 {
            acc = acc.matmul(&u).unwrap();
        }
        assert!(max_diff(&u.pow(13), &acc) < 1e-12);
        assert!(max_diff(&u.pow(0), &ComplexMatrix::identity(5)) < 1e-15);
    }

    #[test]
    fn f32_exponential_is_unitary_to_single_precision() {
        let a64 = rand_hermitian(6, 77);
        let a32 = ComplexMatrix::<f32>::from_fn(6, |i, j| {
            Cplx::new(a64[(i, j)].re as f32, a64[(i, j)].im as f32)
        });
        let e = herm_exp(&a32, Cplx::new(0.0, -1.0)).unwrap();
        let prod = &e.adjoint() * &e;
        assert!((&prod - &ComplexMatrix::identity(6)).max_abs() < 1e-5);
    }
}
