//! Dense complex linear algebra for the 2x2 and 4x4 matrices of a
//! two-qubit problem.
//!
//! Storage is a fixed 16-slot array, so matrices are `Copy` and never touch
//! the heap. Shapes up to 4x4 (and 4x2 isometries) fit.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::{Error, Real, Result};

const CAP: usize = 16;

/// Asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default spectral floor for inverse fractional powers.
pub const DEFAULT_FLOOR: f64 = 1e-9;

/// Tensor factor selector for a bipartite 2 (x) 2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Row-major dense complex matrix with at most 16 entries.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: [Complex<T>; CAP],
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows * cols <= CAP, "{rows}x{cols} exceeds fixed capacity");
        Self {
            rows,
            cols,
            data: [Complex::new(T::zero(), T::zero()); CAP],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex<T>]) -> Result<Self> {
        if rows * cols > CAP || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} entries (at most {CAP})"),
                found: format!("{} entries", entries.len()),
            });
        }
        let mut m = Self::zeros(rows, cols);
        m.data[..entries.len()].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        let c: Vec<Complex<T>> = entries.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::from_rows(rows, cols, &c)
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// Column vector from the entries of a ket.
    pub fn column(ket: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(ket.len(), 1);
        m.data[..ket.len()].copy_from_slice(ket);
        m
    }

    /// `|ket><ket|`.
    pub fn projector(ket: &[Complex<T>]) -> Self {
        let n = ket.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[Complex<T>] {
        &self.data[..self.rows * self.cols]
    }

    pub fn column_at(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let mut m = *self;
        for z in &mut m.data[..self.rows * self.cols] {
            *z = f(*z);
        }
        m
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dims(), other.dims(), "shape mismatch in comparison");
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.entries().iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest `|m_ij - conj(m_ji)|`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut d = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        (*self + self.adjoint()).scale(half)
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for ComplexMatrix<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dims(), rhs.dims(), "shape mismatch in addition");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a + *b;
        }
        self
    }
}

impl<T: Real> Sub for ComplexMatrix<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dims(), rhs.dims(), "shape mismatch in subtraction");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a - *b;
        }
        self
    }
}

impl<T: Real> Mul for ComplexMatrix<T> {
    type Output = Self;
    // Delegates to the by-reference product.
    #[allow(clippy::op_ref)]
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut m = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    m[(i, j)] = m[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "{:+.6?}{:+.6?}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices `(sigma_x, sigma_y, sigma_z)`.
pub fn paulis<T: Real>() -> [ComplexMatrix<T>; 3] {
    let o = T::zero();
    let l = T::one();
    let c = |re: T, im: T| Complex::new(re, im);
    [
        ComplexMatrix::from_rows(2, 2, &[c(o, o), c(l, o), c(l, o), c(o, o)]).unwrap(),
        ComplexMatrix::from_rows(2, 2, &[c(o, o), c(o, -l), c(o, l), c(o, o)]).unwrap(),
        ComplexMatrix::from_rows(2, 2, &[c(l, o), c(o, o), c(o, o), c(-l, o)]).unwrap(),
    ]
}

/// Qubit operator `(w I + v . sigma) / 2`.
pub fn bloch_matrix<T: Real>(identity_weight: T, v: [T; 3]) -> ComplexMatrix<T> {
    let half = T::lit(0.5);
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = Complex::new(half * (identity_weight + v[2]), T::zero());
    m[(1, 1)] = Complex::new(half * (identity_weight - v[2]), T::zero());
    m[(0, 1)] = Complex::new(half * v[0], -half * v[1]);
    m[(1, 0)] = Complex::new(half * v[0], half * v[1]);
    m
}

/// Kronecker product; the dimensions multiply.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac) = a.dims();
    let (br, bc) = b.dims();
    let mut m = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    m[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Partial trace of a 4x4 operator on `first (x) second`, keeping `keep`.
pub fn partial_trace<T: Real>(m: &ComplexMatrix<T>, keep: Subsystem) -> Result<ComplexMatrix<T>> {
    if m.dims() != (4, 4) {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..2 {
                acc = acc
                    + match keep {
                        Subsystem::First => m[(2 * i + k, 2 * j + k)],
                        Subsystem::Second => m[(2 * k + i, 2 * k + j)],
                    };
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition `M = Q diag(values) Q^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEig<T> {
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|x| x)
    }

    /// `Q diag(f(values)) Q^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..n {
                let qi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    m[(i, j)] = m[(i, j)] + qi * self.vectors[(j, k)].conj();
                }
            }
        }
        m
    }
}

/// Hermitian eigendecomposition: closed form for 2x2, cyclic Jacobi above.
///
/// Only the upper triangle's Hermitian part is trusted; call
/// [`ComplexMatrix::hermitian_defect`] first when the input is untrusted.
pub fn eigh<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEig<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let h = m.hermitian_part();
    match h.rows() {
        0 => Err(Error::DimensionMismatch {
            expected: "non-empty matrix".into(),
            found: "0x0".into(),
        }),
        1 => Ok(HermitianEig {
            values: vec![h[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        }),
        2 => Ok(eigh2(&h)),
        _ => Ok(jacobi(&h)),
    }
}

fn eigh2<T: Real>(m: &ComplexMatrix<T>) -> HermitianEig<T> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let half = T::lit(0.5);
    let mean = half * (a + d);
    let diff = half * (a - d);
    let h = diff.hypot(b.norm());
    let lo = mean - h;
    let hi = mean + h;

    let scale = a.abs().max(d.abs()).max(b.norm());
    if b.norm() <= T::epsilon() * scale || h == T::zero() {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        // Already diagonal: order the basis vectors by value.
        let vectors = if a <= d {
            ComplexMatrix::from_rows(2, 2, &[one, zero, zero, one]).unwrap()
        } else {
            ComplexMatrix::from_rows(2, 2, &[zero, one, one, zero]).unwrap()
        };
        return HermitianEig {
            values: vec![a.min(d), a.max(d)],
            vectors,
        };
    }

    // Two candidate null vectors of (M - lo I); take the better conditioned one.
    let u = [b, Complex::new(lo - a, T::zero())];
    let w = [Complex::new(lo - d, T::zero()), b.conj()];
    let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
    let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let (v, n) = if nu >= nw { (u, nu) } else { (w, nw) };
    let v0 = v[0] / n;
    let v1 = v[1] / n;
    let vectors = ComplexMatrix::from_rows(2, 2, &[v0, -v1.conj(), v1, v0.conj()]).unwrap();
    HermitianEig {
        values: vec![lo, hi],
        vectors,
    }
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi<T: Real>(m: &ComplexMatrix<T>) -> HermitianEig<T> {
    const MAX_SWEEPS: usize = 64;
    let n = m.rows();
    let mut a = *m;
    let mut q = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let tol = T::lit(1e-14).max(T::epsilon()) * if norm > T::zero() { norm } else { T::one() };

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = a[(p, r)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                // Phase out apq, then a real symmetric rotation zeroes it.
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(r, r)].re;
                let tau = (aqq - app) / (T::lit(2.0) * mag);
                let t = if tau == T::zero() {
                    T::one()
                } else {
                    tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                let mut g = ComplexMatrix::identity(n);
                let pc = phase.conj();
                g[(p, p)] = Complex::new(c, T::zero());
                g[(p, r)] = Complex::new(s, T::zero());
                g[(r, p)] = pc * (-s);
                g[(r, r)] = pc * c;
                a = (g.adjoint() * a) * g;
                a[(p, r)] = Complex::new(T::zero(), T::zero());
                a[(r, p)] = Complex::new(T::zero(), T::zero());
                q = q * g;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = q[(i, src)];
        }
    }
    HermitianEig { values, vectors }
}

/// `m^p` through the spectrum, with eigenvalues below `floor` raised to
/// `floor` first.
pub fn herm_power<T: Real>(m: &ComplexMatrix<T>, p: T, floor: T) -> Result<ComplexMatrix<T>> {
    let defect = m.hermitian_defect();
    if !(defect <= T::lit(HERMITIAN_TOL)) {
        return Err(Error::NotHermitian {
            defect: defect.to_f64_lossy(),
        });
    }
    if !(floor > T::zero()) {
        return Err(Error::OutOfRange {
            name: "floor",
            value: floor.to_f64_lossy(),
            range: "(0, inf)",
        });
    }
    let e = eigh(m)?;
    Ok(e.reconstruct_with(|x| x.max(floor).powf(p)).hermitian_part())
}

/// Which density-matrix check failed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityFailure {
    NotSquare,
    NonFinite,
    NotHermitian,
    NegativeEigenvalue,
    TraceNotOne,
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, Copy)]
pub struct DensityCheck<T> {
    pub valid: bool,
    pub failure: Option<DensityFailure>,
    pub hermitian_defect: T,
    pub min_eigenvalue: T,
    pub trace: Complex<T>,
}

/// Density-matrix test: Hermitian within 1e-10, eigenvalues >= -1e-10,
/// trace within 1e-10 of one.
pub fn validate_density<T: Real>(m: &ComplexMatrix<T>) -> DensityCheck<T> {
    let tol = T::lit(HERMITIAN_TOL);
    let nan = T::nan();
    let fail = |failure, defect, min_eig, trace| DensityCheck {
        valid: false,
        failure: Some(failure),
        hermitian_defect: defect,
        min_eigenvalue: min_eig,
        trace,
    };
    if !m.is_square() {
        return fail(DensityFailure::NotSquare, T::infinity(), nan, Complex::new(nan, nan));
    }
    let trace = m.trace();
    if !m.is_finite() {
        return fail(DensityFailure::NonFinite, nan, nan, trace);
    }
    let defect = m.hermitian_defect();
    let min_eig = eigh(m).map(|e| e.values[0]).unwrap_or(nan);
    let failure = if defect > tol {
        Some(DensityFailure::NotHermitian)
    } else if (trace - Complex::new(T::one(), T::zero())).norm() > tol {
        Some(DensityFailure::TraceNotOne)
    } else if !(min_eig >= -tol) {
        Some(DensityFailure::NegativeEigenvalue)
    } else {
        None
    };
    DensityCheck {
        valid: failure.is_none(),
        failure,
        hermitian_defect: defect,
        min_eigenvalue: min_eig,
        trace,
    }
}
