//! Pauli strings, stabilizer codes and encoding isometries.
//!
//! Qubit 1 (the leftmost letter of a Pauli string) is the most significant
//! bit of a computational-basis index, so `"XI"` is `X ⊗ I`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{from_nested, to_nested, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, ComplexMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::new(2, 2, data.to_vec()).expect("2x2")
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParameter("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n],
        }
    }

    /// Weight-one string with `p` on `qubit` (zero-based).
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[qubit] = p;
        s
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Two strings commute iff they differ non-trivially on an even number of qubits.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.len(), other.len(), "Pauli strings of different length");
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        clashes % 2 == 0
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.letters
            .iter()
            .skip(1)
            .fold(self.letters[0].matrix(), |acc, p| kron(&acc, &p.matrix()))
    }

    /// All strings on `n` qubits of exactly the given weight, in lexicographic
    /// order of (qubit positions, letters X < Y < Z).
    pub fn of_weight(n: usize, weight: usize) -> Vec<PauliString> {
        fn rec(n: usize, start: usize, left: usize, cur: &mut Vec<Pauli>, out: &mut Vec<PauliString>) {
            if left == 0 {
                out.push(PauliString { letters: cur.clone() });
                return;
            }
            for q in start..n {
                if n - q < left {
                    break;
                }
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    cur[q] = p;
                    rec(n, q + 1, left - 1, cur, out);
                    cur[q] = Pauli::I;
                }
            }
        }
        let mut out = Vec::new();
        rec(n, 0, weight, &mut vec![Pauli::I; n], &mut out);
        out
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

pub fn pauli_matrix(p: &str) -> Result<ComplexMatrix> {
    Ok(p.parse::<PauliString>()?.matrix())
}

/// A stabilizer code encoding one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    n: usize,
    generators: Vec<PauliString>,
    logical_z: PauliString,
    logical_x: PauliString,
}

impl StabilizerCode {
    pub fn new(
        generators: Vec<PauliString>,
        logical_z: PauliString,
        logical_x: PauliString,
    ) -> Result<Self> {
        let n = logical_z.len();
        if generators.iter().chain([&logical_x]).any(|g| g.len() != n) {
            return Err(Error::InvalidParameter(
                "generators and logical operators must act on the same number of qubits".into(),
            ));
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes_with(&generators[j]) {
                    return Err(Error::NonCommuting(i, j));
                }
            }
            if !generators[i].commutes_with(&logical_z) {
                return Err(Error::InvalidParameter(format!(
                    "logical Z does not commute with generator {i}"
                )));
            }
        }
        Ok(Self {
            n,
            generators,
            logical_z,
            logical_x,
        })
    }

    pub fn from_strs(generators: &[&str], logical_z: &str, logical_x: &str) -> Result<Self> {
        Self::new(
            generators
                .iter()
                .map(|g| g.parse())
                .collect::<Result<Vec<_>>>()?,
            logical_z.parse()?,
            logical_x.parse()?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }

    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }

    /// `+1` where `error` commutes with generator `i`, `-1` where it anticommutes.
    pub fn syndrome(&self, error: &PauliString) -> Vec<i8> {
        self.generators
            .iter()
            .map(|g| if g.commutes_with(error) { 1 } else { -1 })
            .collect()
    }

    /// `Π_i (I + s_i g_i) / 2`
    pub fn syndrome_projector(&self, syndrome: &[i8]) -> ComplexMatrix {
        let dim = 1 << self.n;
        let id = ComplexMatrix::identity(dim);
        self.generators
            .iter()
            .zip(syndrome)
            .fold(id.clone(), |acc, (g, &s)| {
                let mut factor = g.matrix().scale_real(f64::from(s));
                factor += &id;
                &acc * &factor.scale_real(0.5)
            })
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.syndrome_projector(&vec![1; self.generators.len()])
    }
}

/// The [[5,1,3]] code.
pub fn five_qubit_code() -> StabilizerCode {
    StabilizerCode::from_strs(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"], "ZZZZZ", "XXXXX")
        .expect("five-qubit generators commute")
}

/// Encoding isometry `U_C = Σ_n |n⟩_L ⟨n|`, one column per logical state.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeIsometry {
    u: ComplexMatrix,
    description: String,
}

impl CodeIsometry {
    pub const ISOMETRY_TOL: f64 = 1e-12;

    pub fn new(u: ComplexMatrix, description: impl Into<String>) -> Result<Self> {
        if u.rows() < u.cols() {
            return Err(Error::InvalidParameter(format!(
                "isometry must map into a space at least as large ({}x{})",
                u.rows(),
                u.cols()
            )));
        }
        let gram = &u.adjoint() * &u;
        let residual = gram.max_abs_diff(&ComplexMatrix::identity(u.cols()));
        if residual > Self::ISOMETRY_TOL {
            return Err(Error::InvalidParameter(format!(
                "columns are not orthonormal (residual {residual:e})"
            )));
        }
        Ok(Self {
            u,
            description: description.into(),
        })
    }

    pub fn dim_source(&self) -> usize {
        self.u.cols()
    }

    pub fn dim_code(&self) -> usize {
        self.u.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn logical_state(&self, k: usize) -> Vec<C64> {
        self.u.column(k)
    }

    /// `P_C = U_C U_C†`
    pub fn projector(&self) -> ComplexMatrix {
        &self.u * &self.u.adjoint()
    }

    /// `U_C ρ U_C†`
    pub fn encode(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.u.conjugate(rho)
    }

    /// `U_C† σ U_C`
    pub fn decode(&self, sigma: &ComplexMatrix) -> ComplexMatrix {
        &(&self.u.adjoint() * sigma) * &self.u
    }

    /// Same code with each logical state multiplied by a phase.
    pub fn rephased(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.dim_source() {
            return Err(Error::dims(self.dim_source(), phases.len()));
        }
        let u = ComplexMatrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u[(i, j)] * C64::from_polar(1.0, phases[j])
        });
        Ok(Self {
            u,
            description: self.description.clone(),
        })
    }
}

/// Scales `v` so its first significant amplitude is real and positive.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-9 * max).copied() {
        let phase = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Logical basis states of a stabilizer code: the joint +1 eigenspace of the
/// generators, split by the ±1 eigenvalue of logical Z.
pub fn logical_states(code: &StabilizerCode) -> Result<CodeIsometry> {
    let eig = eig_hermitian(&code.projector())?;
    let basis: Vec<Vec<C64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| (l - 1.0).abs() < 1e-8)
        .map(|(k, _)| eig.vectors.column(k))
        .collect();
    if basis.len() != 2 {
        return Err(Error::CodespaceDimension(basis.len()));
    }
    let v = ComplexMatrix::from_columns(&basis)?;
    let z_restricted = (&(&v.adjoint() * &code.logical_z.matrix()) * &v).hermitian_part();
    let z_eig = eig_hermitian(&z_restricted)?;
    if (z_eig.values[0] - 1.0).abs() > 1e-8 || (z_eig.values[1] + 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "logical Z restricted to the code space has eigenvalues {:?}, expected (1, -1)",
            z_eig.values
        )));
    }
    let mut columns: Vec<Vec<C64>> = (0..2).map(|k| v.mul_vec(&z_eig.vectors.column(k))).collect();
    for c in &mut columns {
        fix_phase(c);
    }
    CodeIsometry::new(
        ComplexMatrix::from_columns(&columns)?,
        format!("stabilizer code on {} qubits", code.n),
    )
}

/// Four-qubit amplitude-damping code with
/// `|0_L⟩ = (|0000⟩ + |1111⟩)/√2` and `|1_L⟩ = (|0011⟩ + |1100⟩)/√2`.
pub fn leung4_code() -> CodeIsometry {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = ComplexMatrix::zeros(16, 2);
    u[(0b0000, 0)] = C64::new(s, 0.0);
    u[(0b1111, 0)] = C64::new(s, 0.0);
    u[(0b0011, 1)] = C64::new(s, 0.0);
    u[(0b1100, 1)] = C64::new(s, 0.0);
    CodeIsometry::new(u, "four-qubit amplitude damping code").expect("orthonormal columns")
}

/// Folds the encoder into the noise: elements `E_i U_C`, a channel from the
/// source space to the code's physical space.
pub fn spreading_transform(noise: &KrausChannel, enc: &CodeIsometry) -> Result<KrausChannel> {
    if noise.dim_in() != enc.dim_code() || noise.dim_out() != enc.dim_code() {
        return Err(Error::dims(
            format!("noise on dimension {}", enc.dim_code()),
            format!("{} -> {}", noise.dim_in(), noise.dim_out()),
        ));
    }
    KrausChannel::new(noise.elements().iter().map(|e| e * enc.matrix()).collect())
}

/// A code read from JSON, either by stabilizer data or as an explicit isometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    Stabilizer {
        n: usize,
        generators: Vec<String>,
        logical_z: String,
        logical_x: String,
    },
    Isometry {
        isometry: Vec<Vec<[f64; 2]>>,
    },
}

/// A resolved code: its isometry, plus stabilizer data when known.
#[derive(Debug, Clone)]
pub struct Code {
    pub isometry: CodeIsometry,
    pub stabilizer: Option<StabilizerCode>,
}

impl Code {
    pub fn five_qubit() -> Result<Self> {
        let stab = five_qubit_code();
        Ok(Self {
            isometry: logical_states(&stab)?,
            stabilizer: Some(stab),
        })
    }

    pub fn leung4() -> Self {
        Self {
            isometry: leung4_code(),
            stabilizer: None,
        }
    }

    /// Number of physical qubits; the code space must have power-of-two dimension.
    pub fn n_qubits(&self) -> Result<usize> {
        let d = self.isometry.dim_code();
        if !d.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "code dimension {d} is not a power of two"
            )));
        }
        Ok(d.trailing_zeros() as usize)
    }

    pub fn from_spec(spec: &CodeSpec) -> Result<Self> {
        match spec {
            CodeSpec::Stabilizer {
                n,
                generators,
                logical_z,
                logical_x,
            } => {
                let gens: Vec<&str> = generators.iter().map(String::as_str).collect();
                let stab = StabilizerCode::from_strs(&gens, logical_z, logical_x)?;
                if stab.n() != *n {
                    return Err(Error::dims(n, stab.n()));
                }
                Ok(Self {
                    isometry: logical_states(&stab)?,
                    stabilizer: Some(stab),
                })
            }
            CodeSpec::Isometry { isometry } => Ok(Self {
                isometry: CodeIsometry::new(from_nested(isometry)?, "isometry from file")?,
                stabilizer: None,
            }),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(&serde_json::from_str(s)?)
    }
}

impl CodeIsometry {
    pub fn to_spec(&self) -> CodeSpec {
        CodeSpec::Isometry {
            isometry: to_nested(&self.u),
        }
    }
}
