//! Hamiltonians as ordered sums of Hermitian terms, and the random-field
//! Heisenberg chain used by the benchmark.
//!
//! Qubit `j` (1-based) is the `j`-th Kronecker factor from the left, i.e. bit
//! `n - j` of a basis-state index.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{herm_exp, ComplexMatrix, HermitianEigen, PauliRotation};
use crate::rng::{rng_from_seed, uniform_symmetric};
use crate::scalar::{c, cone, czero, Cplx, Real};

/// Largest qubit count for which dense `2^n x 2^n` matrices are formed.
pub const DENSE_QUBIT_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn matrix<T: Real>(self) -> [[Cplx<T>; 2]; 2] {
        let (o, z, i) = (cone(), czero(), c(T::zero(), T::one()));
        match self {
            Axis::X => [[z, o], [o, z]],
            Axis::Y => [[z, -i], [i, z]],
            Axis::Z => [[o, z], [z, -o]],
        }
    }
}

/// Tensor product of single-site Pauli operators; sites are 1-based and
/// strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn new(factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut factors: Vec<_> = factors.into_iter().collect();
        factors.sort_by_key(|f| f.0);
        if factors.first().is_some_and(|f| f.0 == 0) {
            return Err(invalid("sites", "site indices start at 1"));
        }
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("sites", "two factors act on the same site"));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn max_site(&self) -> usize {
        self.factors.last().map_or(0, |f| f.0)
    }

    /// Symplectic form on `n` qubits: `(x_mask, z_mask, number of Y factors)`.
    pub fn masks(&self, n: usize) -> (usize, usize, usize) {
        let (mut x, mut z, mut y) = (0, 0, 0);
        for &(site, axis) in &self.factors {
            let bit = 1usize << (n - site);
            match axis {
                Axis::X => x |= bit,
                Axis::Z => z |= bit,
                Axis::Y => {
                    x |= bit;
                    z |= bit;
                    y += 1;
                }
            }
        }
        (x, z, y)
    }

    /// `exp(z P)` as an in-place kernel on `n` qubits.
    pub fn rotation<T: Real>(&self, n: usize, z: Cplx<T>) -> PauliRotation<T> {
        let (x, zm, y) = self.masks(n);
        PauliRotation::new(x, zm, y, z)
    }

    /// Explicit Kronecker product on `n` qubits.
    pub fn matrix<T: Real>(&self, n: usize) -> Result<ComplexMatrix<T>> {
        if self.max_site() > n {
            return Err(invalid("sites", format!("site {} exceeds n = {n}", self.max_site())));
        }
        if n > DENSE_QUBIT_CAP {
            return Err(Error::DimensionCap { qubits: n, cap: DENSE_QUBIT_CAP });
        }
        let mut out = ComplexMatrix::identity(1);
        let mut next = self.factors.iter().peekable();
        for site in 1..=n {
            let f = match next.peek() {
                Some(&&(s, axis)) if s == site => {
                    next.next();
                    axis.matrix()
                }
                _ => [[cone(), czero()], [czero(), cone()]],
            };
            out = kron2(&out, &f);
        }
        Ok(out)
    }
}

fn kron2<T: Real>(a: &ComplexMatrix<T>, b: &[[Cplx<T>; 2]; 2]) -> ComplexMatrix<T> {
    let d = a.dim();
    ComplexMatrix::from_fn(2 * d, |i, j| a[(i / 2, j / 2)] * b[i % 2][j % 2])
}

/// Dense Hermitian body together with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct DenseBody<T> {
    matrix: ComplexMatrix<T>,
    eigen: HermitianEigen<T>,
}

impl<T: Real> DenseBody<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let eigen = HermitianEigen::new(&matrix)?;
        Ok(Self { matrix, eigen })
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn eigen(&self) -> &HermitianEigen<T> {
        &self.eigen
    }

    fn norm(&self) -> T {
        self.eigen.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug)]
pub enum TermBody<T> {
    Pauli(PauliString),
    Dense(DenseBody<T>),
}

#[derive(Clone, Debug)]
pub struct HamiltonianTerm<T> {
    id: usize,
    body: TermBody<T>,
    coefficient: T,
    norm: T,
}

impl<T: Real> HamiltonianTerm<T> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn body(&self) -> &TermBody<T> {
        &self.body
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    /// Spectral norm of `coefficient * body`.
    pub fn norm(&self) -> T {
        self.norm
    }
}

/// `coefficient * body` as a dense matrix on `n` qubits.
pub fn term_matrix<T: Real>(term: &HamiltonianTerm<T>, n: usize) -> Result<ComplexMatrix<T>> {
    let coef = c(term.coefficient, T::zero());
    match &term.body {
        TermBody::Pauli(p) => Ok(p.matrix::<T>(n)?.scale(coef)),
        TermBody::Dense(d) => {
            if d.matrix.dim() != 1usize << n {
                return Err(Error::DimensionMismatch {
                    expected: 1 << n,
                    found: d.matrix.dim(),
                });
            }
            Ok(d.matrix.scale(coef))
        }
    }
}

/// Random-field parameters recorded for generated Heisenberg instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSpec {
    pub h: f64,
    pub seed: u64,
}

/// `H = sum_j H_j` on `n` qubits, terms ordered with ids `1..=L`.
#[derive(Clone, Debug)]
pub struct Hamiltonian<T> {
    n: usize,
    terms: Vec<HamiltonianTerm<T>>,
    lambda_max: T,
    field: Option<FieldSpec>,
}

impl<T: Real> Hamiltonian<T> {
    pub fn new(n: usize, bodies: Vec<(TermBody<T>, T)>) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(invalid("n", "qubit count must be positive and fit a basis index"));
        }
        if bodies.is_empty() {
            return Err(invalid("terms", "a Hamiltonian needs at least one term"));
        }
        let mut terms = Vec::with_capacity(bodies.len());
        for (i, (body, coefficient)) in bodies.into_iter().enumerate() {
            if !coefficient.is_finite() {
                return Err(Error::NonFinite);
            }
            let body_norm = match &body {
                TermBody::Pauli(p) => {
                    if p.max_site() > n {
                        return Err(invalid(
                            "sites",
                            format!("term {} acts on site {} > n = {n}", i + 1, p.max_site()),
                        ));
                    }
                    T::one()
                }
                TermBody::Dense(d) => {
                    if n > DENSE_QUBIT_CAP || d.matrix.dim() != 1usize << n {
                        return Err(Error::DimensionMismatch {
                            expected: 1usize << n.min(DENSE_QUBIT_CAP),
                            found: d.matrix.dim(),
                        });
                    }
                    d.norm()
                }
            };
            terms.push(HamiltonianTerm {
                id: i + 1,
                body,
                coefficient,
                norm: coefficient.abs() * body_norm,
            });
        }
        let lambda_max = terms.iter().fold(T::zero(), |m, t| m.max(t.norm));
        Ok(Self { n, terms, lambda_max, field: None })
    }

    pub fn from_pauli_terms(n: usize, terms: Vec<(PauliString, T)>) -> Result<Self> {
        Self::new(n, terms.into_iter().map(|(p, w)| (TermBody::Pauli(p), w)).collect())
    }

    /// Dense Hermitian terms with unit coefficients; `n` is inferred from the dimension.
    pub fn from_dense_terms(terms: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let dim = terms.first().map_or(0, |m| m.dim());
        if !dim.is_power_of_two() || dim < 2 {
            return Err(invalid("terms", format!("dimension {dim} is not 2^n with n >= 1")));
        }
        let n = dim.trailing_zeros() as usize;
        let bodies = terms
            .into_iter()
            .map(|m| Ok((TermBody::Dense(DenseBody::new(m)?), T::one())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, bodies)
    }

    /// Periodic nearest-neighbour Heisenberg chain with a random `z` field.
    ///
    /// Terms: all `XX` couplings `(j, j+1)` including the wrap-around `(n, 1)`,
    /// then all `YY`, then all `ZZ`, then `h_j Z_j` with `h_j` uniform on
    /// `[-h, h)`, drawn in site order from `rng_from_seed(seed)`.
    pub fn heisenberg(n: usize, h: f64, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(invalid("n", format!("the periodic chain needs n >= 3, got {n}")));
        }
        if !(h >= 0.0 && h.is_finite()) {
            return Err(invalid("h", format!("field strength must be finite and >= 0, got {h}")));
        }
        let mut bodies = Vec::with_capacity(4 * n);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for j in 1..=n {
                let p = PauliString::new([(j, axis), (j % n + 1, axis)])?;
                bodies.push((TermBody::Pauli(p), T::one()));
            }
        }
        let mut rng = rng_from_seed(seed);
        for j in 1..=n {
            let hj = uniform_symmetric(&mut rng, h);
            bodies.push((TermBody::Pauli(PauliString::new([(j, Axis::Z)])?), T::lit(hj)));
        }
        let mut ham = Self::new(n, bodies)?;
        ham.field = Some(FieldSpec { h, seed });
        Ok(ham)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Number of terms `L`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[HamiltonianTerm<T>] {
        &self.terms
    }

    /// Term with 1-based `id`.
    pub fn term(&self, id: usize) -> Result<&HamiltonianTerm<T>> {
        id.checked_sub(1)
            .and_then(|i| self.terms.get(i))
            .ok_or(Error::TermOutOfRange { id, len: self.terms.len() })
    }

    /// `max_j ||H_j||`.
    pub fn lambda_max(&self) -> T {
        self.lambda_max
    }

    pub fn field(&self) -> Option<FieldSpec> {
        self.field
    }

    fn check_dense_cap(&self) -> Result<()> {
        if self.n > DENSE_QUBIT_CAP {
            return Err(Error::DimensionCap { qubits: self.n, cap: DENSE_QUBIT_CAP });
        }
        Ok(())
    }

    /// Dense `sum_j H_j`.
    pub fn dense(&self) -> Result<ComplexMatrix<T>> {
        self.check_dense_cap()?;
        let mut acc = ComplexMatrix::zeros(self.dim());
        for term in &self.terms {
            acc = &acc + &term_matrix(term, self.n)?;
        }
        Ok(acc)
    }

    /// `exp(-i t H)`.
    pub fn ideal_evolution(&self, t: T) -> Result<ComplexMatrix<T>> {
        herm_exp(&self.dense()?, c(T::zero(), -t))
    }

    pub fn to_record(&self) -> Result<HamiltonianRecord> {
        let terms = self
            .terms
            .iter()
            .map(|term| match &term.body {
                TermBody::Pauli(p) => Ok(TermRecord {
                    id: term.id,
                    kind: "pauli".into(),
                    sites: p.factors.iter().map(|f| f.0).collect(),
                    axes: p.factors.iter().map(|f| f.1).collect(),
                    coefficient: term.coefficient.to_f64_lossy(),
                }),
                TermBody::Dense(_) => Err(Error::Serde(format!(
                    "term {} has a dense body, which the JSON schema cannot carry",
                    term.id
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HamiltonianRecord {
            n: self.n,
            h: self.field.map(|f| f.h),
            seed: self.field.map(|f| f.seed),
            terms,
        })
    }

    pub fn from_record(rec: &HamiltonianRecord) -> Result<Self> {
        let mut bodies = Vec::with_capacity(rec.terms.len());
        for (i, t) in rec.terms.iter().enumerate() {
            if t.id != i + 1 {
                return Err(Error::Serde(format!("term ids must run 1..=L, found {} at {}", t.id, i + 1)));
            }
            if t.kind != "pauli" {
                return Err(Error::Serde(format!("unsupported term kind `{}`", t.kind)));
            }
            if t.sites.len() != t.axes.len() {
                return Err(Error::Serde(format!("term {}: sites and axes differ in length", t.id)));
            }
            let p = PauliString::new(t.sites.iter().copied().zip(t.axes.iter().copied()))?;
            bodies.push((TermBody::Pauli(p), T::lit(t.coefficient)));
        }
        let mut ham = Self::new(rec.n, bodies)?;
        if let (Some(h), Some(seed)) = (rec.h, rec.seed) {
            ham.field = Some(FieldSpec { h, seed });
        }
        Ok(ham)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.to_record()?).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: HamiltonianRecord =
            serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        Self::from_record(&rec)
    }
}

/// JSON form `{n, h, seed, terms: [{id, kind, sites, axes, coefficient}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianRecord {
    pub n: usize,
    pub h: Option<f64>,
    pub seed: Option<u64>,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub id: usize,
    pub kind: String,
    pub sites: Vec<usize>,
    pub axes: Vec<Axis>,
    pub coefficient: f64,
}
