//! Gate catalog: kinds, the gate taxonomy used to scope mutations, and
//! standard unitaries.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Gate function categories. A gate may belong to several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FunctionCategory {
    Controlled,
    Hadamard,
    Pauli,
    Phase,
    Rotation,
    Swap,
}

impl FunctionCategory {
    pub const ALL: [FunctionCategory; 6] = [
        FunctionCategory::Controlled,
        FunctionCategory::Hadamard,
        FunctionCategory::Pauli,
        FunctionCategory::Phase,
        FunctionCategory::Rotation,
        FunctionCategory::Swap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionCategory::Controlled => "Controlled",
            FunctionCategory::Hadamard => "Hadamard",
            FunctionCategory::Pauli => "Pauli",
            FunctionCategory::Phase => "Phase",
            FunctionCategory::Rotation => "Rotation",
            FunctionCategory::Swap => "Swap",
        }
    }
}

impl FromStr for FunctionCategory {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        FunctionCategory::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown gate category '{s}'")))
    }
}

/// Gate size categories. Every gate belongs to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeCategory {
    Single,
    Two,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Hadamard,
    PauliX,
    PauliY,
    PauliZ,
    PhaseShift,
    RX,
    RY,
    RZ,
    Rot,
    U3,
    CNOT,
    CZ,
    CRX,
    CRY,
    CRZ,
    ControlledPhaseShift,
    SWAP,
    CSWAP,
}

use GateKind::*;

impl GateKind {
    pub const ALL: [GateKind; 18] = [
        Hadamard,
        PauliX,
        PauliY,
        PauliZ,
        PhaseShift,
        RX,
        RY,
        RZ,
        Rot,
        U3,
        CNOT,
        CZ,
        CRX,
        CRY,
        CRZ,
        ControlledPhaseShift,
        SWAP,
        CSWAP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Hadamard => "Hadamard",
            PauliX => "PauliX",
            PauliY => "PauliY",
            PauliZ => "PauliZ",
            PhaseShift => "PhaseShift",
            RX => "RX",
            RY => "RY",
            RZ => "RZ",
            Rot => "Rot",
            U3 => "U3",
            CNOT => "CNOT",
            CZ => "CZ",
            CRX => "CRX",
            CRY => "CRY",
            CRZ => "CRZ",
            ControlledPhaseShift => "ControlledPhaseShift",
            SWAP => "SWAP",
            CSWAP => "CSWAP",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Hadamard | PauliX | PauliY | PauliZ | PhaseShift | RX | RY | RZ | Rot | U3 => 1,
            CNOT | CZ | CRX | CRY | CRZ | ControlledPhaseShift | SWAP => 2,
            CSWAP => 3,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            PhaseShift | RX | RY | RZ | CRX | CRY | CRZ | ControlledPhaseShift => 1,
            Rot | U3 => 3,
            _ => 0,
        }
    }

    pub fn is_parameterized(self) -> bool {
        self.param_count() > 0
    }

    pub fn function_categories(self) -> &'static [FunctionCategory] {
        use FunctionCategory as F;
        match self {
            Hadamard => &[F::Hadamard],
            PauliX | PauliY | PauliZ => &[F::Pauli],
            PhaseShift => &[F::Phase],
            RX | RY | RZ | Rot | U3 => &[F::Rotation],
            CNOT | CZ => &[F::Controlled, F::Pauli],
            CRX | CRY | CRZ => &[F::Controlled, F::Rotation],
            ControlledPhaseShift => &[F::Controlled, F::Phase],
            SWAP | CSWAP => &[F::Swap],
        }
    }

    pub fn in_category(self, category: FunctionCategory) -> bool {
        self.function_categories().contains(&category)
    }

    pub fn size_category(self) -> SizeCategory {
        match self.arity() {
            1 => SizeCategory::Single,
            2 => SizeCategory::Two,
            _ => SizeCategory::Multi,
        }
    }

    /// Other kinds with identical arity and parameter count.
    pub fn equivalence_class(self) -> Vec<GateKind> {
        GateKind::ALL
            .into_iter()
            .filter(|&k| {
                k != self && k.arity() == self.arity() && k.param_count() == self.param_count()
            })
            .collect()
    }

    /// Controlled two-qubit form of a single-qubit gate, if the catalog has one.
    pub fn controlled(self) -> Option<GateKind> {
        match self {
            PauliX => Some(CNOT),
            PauliZ => Some(CZ),
            RX => Some(CRX),
            RY => Some(CRY),
            RZ => Some(CRZ),
            PhaseShift => Some(ControlledPhaseShift),
            _ => None,
        }
    }

    /// Single-qubit base of a controlled gate.
    pub fn uncontrolled(self) -> Option<GateKind> {
        match self {
            CNOT => Some(PauliX),
            CZ => Some(PauliZ),
            CRX => Some(RX),
            CRY => Some(RY),
            CRZ => Some(RZ),
            ControlledPhaseShift => Some(PhaseShift),
            _ => None,
        }
    }

    /// Parameters whose shifted evaluations need the four-term rule
    /// (generator spectrum {0, ±1/2}).
    pub fn needs_four_term_shift(self) -> bool {
        matches!(self, CRX | CRY | CRZ)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown gate kind '{s}'")))
    }
}

/// Dense row-major complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| r.iter().copied())
            .collect::<Vec<_>>();
        assert_eq!(data.len(), dim * dim);
        Matrix { dim, data }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Matrix::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (n, m) = (self.dim, other.dim);
        let mut out = Matrix::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise distance to another matrix.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rx(t: f64) -> Matrix {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    Matrix::from_rows(&[&[c(co, 0.0), c(0.0, -si)], &[c(0.0, -si), c(co, 0.0)]])
}

fn ry(t: f64) -> Matrix {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    Matrix::from_rows(&[&[c(co, 0.0), c(-si, 0.0)], &[c(si, 0.0), c(co, 0.0)]])
}

fn rz(t: f64) -> Matrix {
    Matrix::diag(&[
        Complex64::from_polar(1.0, -t / 2.0),
        Complex64::from_polar(1.0, t / 2.0),
    ])
}

/// Embeds a single-qubit unitary as the target block of a controlled gate
/// (control is the most significant local bit).
fn controlled(u: &Matrix) -> Matrix {
    let mut m = Matrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = u[(i, j)];
        }
    }
    m
}

/// Standard unitary of a gate kind for the given parameters.
///
/// Local basis ordering treats the first wire as the most significant bit,
/// so for controlled gates the control is wire 0.
pub fn unitary(kind: GateKind, params: &[f64]) -> Matrix {
    debug_assert_eq!(params.len(), kind.param_count());
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    match kind {
        Hadamard => Matrix::from_rows(&[
            &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            &[c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
        ]),
        PauliX => Matrix::from_rows(&[&[o, l], &[l, o]]),
        PauliY => Matrix::from_rows(&[&[o, c(0.0, -1.0)], &[c(0.0, 1.0), o]]),
        PauliZ => Matrix::diag(&[l, -l]),
        PhaseShift => Matrix::diag(&[l, Complex64::from_polar(1.0, params[0])]),
        RX => rx(params[0]),
        RY => ry(params[0]),
        RZ => rz(params[0]),
        Rot => rz(params[2]).mul(&ry(params[1])).mul(&rz(params[0])),
        U3 => {
            let (t, p, lam) = (params[0], params[1], params[2]);
            let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
            Matrix::from_rows(&[
                &[c(co, 0.0), -Complex64::from_polar(si, lam)],
                &[
                    Complex64::from_polar(si, p),
                    Complex64::from_polar(co, p + lam),
                ],
            ])
        }
        CNOT => controlled(&unitary(PauliX, &[])),
        CZ => controlled(&unitary(PauliZ, &[])),
        CRX => controlled(&rx(params[0])),
        CRY => controlled(&ry(params[0])),
        CRZ => controlled(&rz(params[0])),
        ControlledPhaseShift => Matrix::diag(&[l, l, l, Complex64::from_polar(1.0, params[0])]),
        SWAP => {
            let mut m = Matrix::zeros(4);
            m[(0, 0)] = l;
            m[(1, 2)] = l;
            m[(2, 1)] = l;
            m[(3, 3)] = l;
            m
        }
        CSWAP => {
            let mut m = Matrix::identity(8);
            m[(5, 5)] = o;
            m[(6, 6)] = o;
            m[(5, 6)] = l;
            m[(6, 5)] = l;
            m
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn taxonomy_is_total() {
        for k in GateKind::ALL {
            assert!(!k.function_categories().is_empty(), "{k}");
            assert_eq!(k.size_category() == SizeCategory::Single, k.arity() == 1);
        }
    }

    #[test]
    fn taxonomy_rows() {
        use FunctionCategory as F;
        let members = |cat: F| {
            GateKind::ALL
                .into_iter()
                .filter(|k| k.in_category(cat))
                .collect::<Vec<_>>()
        };
        assert_eq!(
            members(F::Controlled),
            vec![CNOT, CZ, CRX, CRY, CRZ, ControlledPhaseShift]
        );
        assert_eq!(members(F::Hadamard), vec![Hadamard]);
        assert_eq!(members(F::Pauli), vec![PauliX, PauliY, PauliZ, CNOT, CZ]);
        assert_eq!(members(F::Phase), vec![PhaseShift, ControlledPhaseShift]);
        assert_eq!(
            members(F::Rotation),
            vec![RX, RY, RZ, Rot, U3, CRX, CRY, CRZ]
        );
        assert_eq!(members(F::Swap), vec![SWAP, CSWAP]);
        assert_eq!(CSWAP.size_category(), SizeCategory::Multi);
        assert_eq!(SWAP.size_category(), SizeCategory::Two);
    }

    #[test]
    fn equivalence_classes() {
        assert_eq!(RX.equivalence_class(), vec![PhaseShift, RY, RZ]);
        assert_eq!(Hadamard.equivalence_class(), vec![PauliX, PauliY, PauliZ]);
        assert!(CSWAP.equivalence_class().is_empty());
        for a in GateKind::ALL {
            assert!(!a.equivalence_class().contains(&a));
            for b in a.equivalence_class() {
                assert!(b.equivalence_class().contains(&a));
            }
        }
    }

    #[test]
    fn arity_and_params() {
        assert_eq!((U3.arity(), U3.param_count()), (1, 3));
        assert_eq!((CSWAP.arity(), CSWAP.param_count()), (3, 0));
        assert_eq!((CRZ.arity(), CRZ.param_count()), (2, 1));
    }

    #[test]
    fn known_unitaries() {
        assert!(unitary(RX, &[0.0]).max_abs_diff(&Matrix::identity(2)) < 1e-15);
        let x = unitary(PauliX, &[]);
        assert_eq!(x[(0, 1)], c(1.0, 0.0));
        assert_eq!(x[(0, 0)], c(0.0, 0.0));
        let rpi = unitary(RX, &[PI]);
        let expect =
            Matrix::from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, -1.0), c(0.0, 0.0)]]);
        assert!(rpi.max_abs_diff(&expect) < 1e-15);
        let cps = unitary(ControlledPhaseShift, &[0.3]);
        assert!((cps[(3, 3)] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn u3_matches_rot_up_to_phase() {
        // U3(θ, φ, λ) = e^{i(φ+λ)/2} RZ(φ) RY(θ) RZ(λ)
        let (t, p, l) = (0.7, -1.1, 2.3);
        let u3 = unitary(U3, &[t, p, l]);
        let rot = unitary(Rot, &[l, t, p]).scale(1.0);
        let phase = Complex64::from_polar(1.0, (p + l) / 2.0);
        let rot = Matrix {
            dim: 2,
            data: rot.data.iter().map(|z| z * phase).collect(),
        };
        assert!(u3.max_abs_diff(&rot) < 1e-12);
    }
}
