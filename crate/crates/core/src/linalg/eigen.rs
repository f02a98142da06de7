//! Hermitian eigendecomposition.
//!
//! Householder reduction to a complex tridiagonal form, a diagonal phase
//! change that makes the off-diagonal real, then the implicit QL iteration of
//! the classic `tql2` routine on the real symmetric tridiagonal matrix.

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Cplx, Real};

/// Relative Hermiticity tolerance accepted on input.
const HERMITIAN_TOL: f64 = 1e-10;

/// `A = U diag(values) U†` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn new(a: &ComplexMatrix<T>) -> Result<Self> {
        let a = checked_symmetrized(a)?;
        let n = a.dim();
        let Tridiagonal { diag, off, q } = tridiagonalize(a, true);
        let q = q.expect("requested reflector accumulation");
        let (mut d, mut e, phases) = realify(diag, off);
        let mut zt = RealRows::identity(n);
        tql2(&mut d, &mut e, Some(&mut zt))?;

        // vectors = Q · diag(phases) · Z, where row j of `zt` is column j of Z.
        let mut vectors = ComplexMatrix::zeros(n);
        for r in 0..n {
            let qd: Vec<Cplx<T>> = q.row(r).iter().zip(&phases).map(|(&x, &p)| x * p).collect();
            for j in 0..n {
                let z = zt.row(j);
                let mut acc = czero();
                for (&x, &zz) in qd.iter().zip(z) {
                    acc += x * zz;
                }
                vectors[(r, j)] = acc;
            }
        }
        let (values, vectors) = sort_pairs(d, vectors);
        Ok(Self { values, vectors })
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    let a = checked_symmetrized(a)?;
    let Tridiagonal { diag, off, .. } = tridiagonalize(a, false);
    let (mut d, mut e, _) = realify(diag, off);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal `diag`
/// and sub-diagonal `off` (`off.len() + 1 == diag.len()`).
pub(crate) fn tridiagonal_eigvals<T: Real>(diag: &[T], off: &[T]) -> Result<Vec<T>> {
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(d.len(), T::zero());
    tql2(&mut d, &mut e, None)?;
    Ok(d)
}

fn checked_symmetrized<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let dev = a.hermitian_deviation();
    if dev > T::lit(HERMITIAN_TOL) {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64_lossy(),
        });
    }
    let n = a.dim();
    let half = T::lit(0.5);
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        (a[(i, j)] + a[(j, i)].conj()) * half
    }))
}

struct Tridiagonal<T> {
    diag: Vec<T>,
    /// `off[k]` is entry `(k+1, k)`.
    off: Vec<Cplx<T>>,
    q: Option<ComplexMatrix<T>>,
}

fn tridiagonalize<T: Real>(mut a: ComplexMatrix<T>, accumulate: bool) -> Tridiagonal<T> {
    let n = a.dim();
    let mut off = vec![czero(); n.saturating_sub(1)];
    let mut q = accumulate.then(|| ComplexMatrix::identity(n));
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        // v = x + phase(x0) ‖x‖ e1, with x the column below the diagonal.
        let mut v: Vec<Cplx<T>> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let alpha = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        let tail = v[1..].iter().map(|x| x.norm_sqr()).sum::<T>();
        if alpha == T::zero() {
            off[k] = czero();
            continue;
        }
        if tail == T::zero() {
            // Column already reduced.
            off[k] = v[0];
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == T::zero() {
            cone()
        } else {
            x0 / x0.norm()
        };
        v[0] = x0 + phase * alpha;
        let vnorm2 = v.iter().map(|x| x.norm_sqr()).sum::<T>();
        let tau = two / vnorm2;
        off[k] = -phase * alpha;

        // p = tau · A_sub v
        let base = k + 1;
        let mut p = vec![czero(); m];
        for i in 0..m {
            let row = &a.as_slice()[(base + i) * n + base..(base + i) * n + n];
            let mut acc = czero();
            for (&aij, &vj) in row.iter().zip(&v) {
                acc += aij * vj;
            }
            p[i] = acc * tau;
        }
        // w = p − (tau/2)(v†p) v
        let vp: Cplx<T> = v.iter().zip(&p).fold(czero(), |s, (&x, &y)| s + x.conj() * y);
        let coef = vp * (tau / two);
        let w: Vec<Cplx<T>> = p.iter().zip(&v).map(|(&pi, &vi)| pi - coef * vi).collect();
        // A_sub ← A_sub − v w† − w v†
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a.as_mut_slice()[(base + i) * n + base..(base + i) * n + n];
            for j in 0..m {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        if let Some(q) = q.as_mut() {
            // Q ← Q H,  H = I − tau v v†
            for r in 0..n {
                let row = &mut q.as_mut_slice()[r * n + base..r * n + n];
                let mut s = czero();
                for (&x, &vj) in row.iter().zip(&v) {
                    s += x * vj;
                }
                let s = s * tau;
                for (x, &vj) in row.iter_mut().zip(&v) {
                    *x -= s * vj.conj();
                }
            }
        }
    }
    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    Tridiagonal { diag, off, q }
}

/// Diagonal unitary similarity making the sub-diagonal real and non-negative.
fn realify<T: Real>(diag: Vec<T>, off: Vec<Cplx<T>>) -> (Vec<T>, Vec<T>, Vec<Cplx<T>>) {
    let n = diag.len();
    let mut phases = vec![cone(); n];
    let mut e = vec![T::zero(); n];
    for k in 0..off.len() {
        let mag = off[k].norm();
        e[k] = mag;
        phases[k + 1] = if mag == T::zero() {
            phases[k]
        } else {
            phases[k] * (off[k] / mag)
        };
    }
    (diag, e, phases)
}

/// Row-major real matrix used for the QL rotations; row `j` holds eigenvector `j`.
struct RealRows<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> RealRows<T> {
    fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self { n, data }
    }

    fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// (row_i, row_{i+1}) ← (c row_i − s row_{i+1}, s row_i + c row_{i+1})
    fn rotate(&mut self, i: usize, c: T, s: T) {
        let n = self.n;
        let (lo, hi) = self.data.split_at_mut((i + 1) * n);
        let ri = &mut lo[i * n..];
        let rj = &mut hi[..n];
        for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
            let h = *b;
            *b = s * *a + c * h;
            *a = c * *a - s * h;
        }
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `i` and `i+1`;
/// `e[n-1]` must be zero.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut RealRows<T>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let max_iter = 60 * n.max(4);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence {
                        what: "tridiagonal QL",
                        iterations: max_iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut cc = T::one();
                let mut c2 = cc;
                let mut c3 = cc;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = cc;
                    s2 = s;
                    g = cc * e[i];
                    h = cc * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    cc = p / r;
                    p = cc * d[i] - s * g;
                    d[i + 1] = h + s * (cc * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        z.rotate(i, cc, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = cc * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn sort_pairs<T: Real>(values: Vec<T>, vectors: ComplexMatrix<T>) -> (Vec<T>, ComplexMatrix<T>) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
    let sorted_vals = idx.iter().map(|&i| values[i]).collect();
    let sorted_vecs = ComplexMatrix::from_fn(n, |r, j| vectors[(r, idx[j])]);
    (sorted_vals, sorted_vecs)
}
