//! The tetrahedron of two-qubit entangling unitaries.
//!
//! A point `alpha = (alpha_x, alpha_y, alpha_z)` with
//! `pi/2 >= alpha_x >= alpha_y >= alpha_z >= 0` names the unitary that is
//! diagonal in the magic basis. Its vertices are the identity `I`, the
//! CNOT-class gate `C`, the double CNOT `D` and `SWAP` (`S`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::qlin::ComplexMatrix;
use crate::{Error, Real, Result};

/// Slack on the ordering inequalities.
pub const TETRAHEDRON_TOL: f64 = 1e-12;

/// Canonical parameters of a two-qubit unitary, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryParams<T> {
    pub alpha_x: T,
    pub alpha_y: T,
    pub alpha_z: T,
}

impl<T: Real> UnitaryParams<T> {
    /// Validated constructor.
    pub fn new(alpha_x: T, alpha_y: T, alpha_z: T) -> Result<Self> {
        let p = Self {
            alpha_x,
            alpha_y,
            alpha_z,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_array(a: [T; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.alpha_x, self.alpha_y, self.alpha_z]
    }

    /// Euclidean norm `|alpha|`.
    pub fn norm(&self) -> T {
        (self.alpha_x * self.alpha_x + self.alpha_y * self.alpha_y + self.alpha_z * self.alpha_z).sqrt()
    }

    /// Checks `pi/2 >= alpha_x >= alpha_y >= alpha_z >= 0`, naming the
    /// first violated inequality.
    pub fn validate(&self) -> Result<()> {
        let tol = T::lit(TETRAHEDRON_TOL);
        let half_pi = T::FRAC_PI_2();
        let [x, y, z] = self.as_array();
        let show = |v: T| v.to_f64_lossy();
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Tetrahedron(format!(
                "non-finite alpha ({}, {}, {})",
                show(x),
                show(y),
                show(z)
            )));
        }
        if x > half_pi + tol {
            return Err(Error::Tetrahedron(format!("pi/2 >= alpha_x fails: alpha_x = {}", show(x))));
        }
        if y > x + tol {
            return Err(Error::Tetrahedron(format!(
                "alpha_x >= alpha_y fails: {} < {}",
                show(x),
                show(y)
            )));
        }
        if z > y + tol {
            return Err(Error::Tetrahedron(format!(
                "alpha_y >= alpha_z fails: {} < {}",
                show(y),
                show(z)
            )));
        }
        if z < -tol {
            return Err(Error::Tetrahedron(format!("alpha_z >= 0 fails: alpha_z = {}", show(z))));
        }
        Ok(())
    }
}

/// Named vertices of the tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    /// Identity, `(0, 0, 0)`.
    I,
    /// CNOT class, `(pi/2, 0, 0)`.
    C,
    /// SWAP, `(pi/2, pi/2, pi/2)`.
    S,
    /// Double CNOT, `(pi/2, pi/2, 0)`.
    D,
}

impl Vertex {
    pub const ALL: [Vertex; 4] = [Vertex::I, Vertex::C, Vertex::S, Vertex::D];

    pub fn params<T: Real>(self) -> UnitaryParams<T> {
        let h = T::FRAC_PI_2();
        let o = T::zero();
        let (x, y, z) = match self {
            Vertex::I => (o, o, o),
            Vertex::C => (h, o, o),
            Vertex::S => (h, h, h),
            Vertex::D => (h, h, o),
        };
        UnitaryParams {
            alpha_x: x,
            alpha_y: y,
            alpha_z: z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Vertex::I => "I",
            Vertex::C => "C",
            Vertex::S => "S",
            Vertex::D => "D",
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Vertex {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Ok(Vertex::I),
            "C" => Ok(Vertex::C),
            "S" => Ok(Vertex::S),
            "D" => Ok(Vertex::D),
            other => Err(format!("unknown vertex '{other}', expected one of I, C, S, D")),
        }
    }
}

/// Edges of the tetrahedron, named by their endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeId {
    IC,
    IS,
    ID,
    CS,
    CD,
    DS,
}

impl EdgeId {
    pub const ALL: [EdgeId; 6] = [EdgeId::IC, EdgeId::IS, EdgeId::ID, EdgeId::CS, EdgeId::CD, EdgeId::DS];

    pub fn endpoints(self) -> (Vertex, Vertex) {
        use Vertex::*;
        match self {
            EdgeId::IC => (I, C),
            EdgeId::IS => (I, S),
            EdgeId::ID => (I, D),
            EdgeId::CS => (C, S),
            EdgeId::CD => (C, D),
            EdgeId::DS => (D, S),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeId::IC => "IC",
            EdgeId::IS => "IS",
            EdgeId::ID => "ID",
            EdgeId::CS => "CS",
            EdgeId::CD => "CD",
            EdgeId::DS => "DS",
        }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IC" | "CI" => Ok(EdgeId::IC),
            "IS" | "SI" => Ok(EdgeId::IS),
            "ID" | "DI" => Ok(EdgeId::ID),
            "CS" | "SC" => Ok(EdgeId::CS),
            "CD" | "DC" => Ok(EdgeId::CD),
            "DS" | "SD" => Ok(EdgeId::DS),
            other => Err(format!("unknown edge '{other}', expected one of IC, IS, ID, CS, CD, DS")),
        }
    }
}

/// A point on an edge together with its norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint<T> {
    pub params: UnitaryParams<T>,
    /// Euclidean norm `|alpha|`.
    pub norm: T,
    /// Edge coordinate `t * pi/2`: the value of the angle that moves along
    /// the edge. Curves of different edges line up on this axis.
    pub coordinate: T,
}

/// Linear interpolation between the endpoint vertices of `edge`.
pub fn edge_point<T: Real>(edge: EdgeId, t: T) -> Result<EdgePoint<T>> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t.to_f64_lossy(),
            range: "[0, 1]",
        });
    }
    let h = T::FRAC_PI_2();
    let s = t * h;
    let o = T::zero();
    let (x, y, z) = match edge {
        EdgeId::IC => (s, o, o),
        EdgeId::IS => (s, s, s),
        EdgeId::ID => (s, s, o),
        EdgeId::CS => (h, s, s),
        EdgeId::CD => (h, s, o),
        EdgeId::DS => (h, h, s),
    };
    let params = UnitaryParams::new(x, y, z)?;
    Ok(EdgePoint {
        params,
        norm: params.norm(),
        coordinate: s,
    })
}

/// Eigenphases `lambda_1..lambda_4` of the unitary in the magic basis.
pub fn eigenphases<T: Real>(p: &UnitaryParams<T>) -> [T; 4] {
    let half = T::lit(0.5);
    let [x, y, z] = p.as_array();
    [
        half * (x - y + z),
        half * (-x + y + z),
        half * (-x - y - z),
        half * (x + y - z),
    ]
}

/// The unitary in the canonical basis `{|00>, |01>, |10>, |11>}` (probe
/// first, environment second).
pub fn build_unitary<T: Real>(p: &UnitaryParams<T>) -> Result<ComplexMatrix<T>> {
    p.validate()?;
    let half = T::lit(0.5);
    let [x, y, z] = p.as_array();
    let (sm, cm) = (half * (x - y)).sin_cos();
    let (sp, cp) = (half * (x + y)).sin_cos();
    let phase = Complex::new(z.cos(), z.sin());
    let zero = Complex::new(T::zero(), T::zero());
    let diag_outer = Complex::new(cm, T::zero());
    let anti_outer = Complex::new(T::zero(), -sm);
    let diag_inner = phase * cp;
    let anti_inner = phase * Complex::new(T::zero(), -sp);
    #[rustfmt::skip]
    let entries = [
        diag_outer, zero, zero, anti_outer,
        zero, diag_inner, anti_inner, zero,
        zero, anti_inner, diag_inner, zero,
        anti_outer, zero, zero, diag_outer,
    ];
    ComplexMatrix::from_rows(4, 4, &entries)
}

/// Magic basis `|Lambda_1>..|Lambda_4>` as kets in the canonical basis.
pub fn magic_basis<T: Real>() -> [[Complex<T>; 4]; 4] {
    let s = T::FRAC_1_SQRT_2();
    let o = T::zero();
    let re = |v: T| Complex::new(v, o);
    let im = |v: T| Complex::new(o, v);
    [
        [re(s), re(o), re(o), re(s)],
        [im(-s), re(o), re(o), im(s)],
        [re(o), re(s), re(-s), re(o)],
        [re(o), im(-s), im(-s), re(o)],
    ]
}

/// `sum_k exp(-i lambda_k) |Lambda_k><Lambda_k|`.
///
/// This has unit determinant, whereas [`build_unitary`] carries the extra
/// global phase [`canonical_phase`]: `build_unitary = canonical_phase *
/// magic_basis_reconstruction`. Used as an independent cross-check.
pub fn magic_basis_reconstruction<T: Real>(p: &UnitaryParams<T>) -> ComplexMatrix<T> {
    let lambdas = eigenphases(p);
    let basis = magic_basis::<T>();
    let mut u = ComplexMatrix::zeros(4, 4);
    for (lam, ket) in lambdas.iter().zip(basis.iter()) {
        let w = Complex::new(lam.cos(), -lam.sin());
        u = u + ComplexMatrix::projector(ket).scale_complex(w);
    }
    u
}

/// Global phase `exp(i alpha_z / 2)` between the canonical-basis matrix and
/// the magic-basis sum.
pub fn canonical_phase<T: Real>(p: &UnitaryParams<T>) -> Complex<T> {
    let h = T::lit(0.5) * p.alpha_z;
    Complex::new(h.cos(), h.sin())
}
