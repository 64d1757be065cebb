//! Gate definitions: the classical and quantum gate sets, arities and unitaries.
//!
//! The classical set contains only permutation (basis-preserving) gates; the
//! quantum set adds the Hadamard and phase gates. Matrix convention: qubit 0 of
//! a multi-qubit gate is the most significant index of the gate's local matrix,
//! and the genome records qubit roles explicitly (controls first, targets last).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

/// All gates known to the artifact, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    CNOT,
    SWAP,
    Toffoli,
    Fredkin,
}

pub const ALL_GATES: [GateKind; 13] = [
    GateKind::I,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::H,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
    GateKind::CNOT,
    GateKind::SWAP,
    GateKind::Toffoli,
    GateKind::Fredkin,
];

impl GateKind {
    /// Number of qubits the gate acts on.
    pub fn arity(self) -> usize {
        match self {
            GateKind::I
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::H
            | GateKind::S
            | GateKind::Sdg
            | GateKind::T
            | GateKind::Tdg => 1,
            GateKind::CNOT | GateKind::SWAP => 2,
            GateKind::Toffoli | GateKind::Fredkin => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::CNOT => "CNOT",
            GateKind::SWAP => "SWAP",
            GateKind::Toffoli => "Toffoli",
            GateKind::Fredkin => "Fredkin",
        }
    }

    /// Row-major 2^arity x 2^arity unitary. Qubit 0 of the gate is the most
    /// significant bit of the local row/column index.
    pub fn unitary(self) -> Vec<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let t_phase = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        match self {
            GateKind::I => vec![one, zero, zero, one],
            GateKind::X => vec![zero, one, one, zero],
            GateKind::Y => vec![zero, -i, i, zero],
            GateKind::Z => vec![one, zero, zero, -one],
            GateKind::H => vec![h, h, h, -h],
            GateKind::S => vec![one, zero, zero, i],
            GateKind::Sdg => vec![one, zero, zero, -i],
            GateKind::T => vec![one, zero, zero, t_phase],
            GateKind::Tdg => vec![one, zero, zero, t_phase.conj()],
            GateKind::CNOT => permutation_matrix(2, &[0, 1, 3, 2]),
            GateKind::SWAP => permutation_matrix(2, &[0, 2, 1, 3]),
            GateKind::Toffoli => permutation_matrix(3, &[0, 1, 2, 3, 4, 5, 7, 6]),
            GateKind::Fredkin => permutation_matrix(3, &[0, 1, 2, 3, 4, 6, 5, 7]),
        }
    }

    /// True exactly when every matrix entry is 0 or 1, i.e. the unitary is a
    /// permutation of the computational basis.
    pub fn is_basis_preserving(self) -> bool {
        self.unitary()
            .iter()
            .all(|a| a.im == 0.0 && (a.re == 0.0 || a.re == 1.0))
    }
}

/// Permutation unitary with `map[col] = row` image of each basis state.
fn permutation_matrix(arity: usize, map: &[usize]) -> Vec<Complex64> {
    let dim = 1 << arity;
    debug_assert_eq!(map.len(), dim);
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (col, &row) in map.iter().enumerate() {
        m[row * dim + col] = Complex64::new(1.0, 0.0);
    }
    m
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_GATES
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown gate name `{s}`"))
    }
}

/// Which gate set the algorithm samples from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSetId {
    Classical,
    Quantum,
}

impl GateSetId {
    /// Members of the set in canonical order, optionally filtered by arity.
    pub fn members(self, arity: Option<usize>) -> crate::Result<Vec<GateKind>> {
        if let Some(a) = arity {
            if !(1..=3).contains(&a) {
                return Err(crate::QgaError::InvalidConfig {
                    field: "arity".into(),
                    reason: format!("must be 1, 2 or 3, got {a}"),
                });
            }
        }
        Ok(ALL_GATES
            .iter()
            .copied()
            .filter(|g| self.contains(*g))
            .filter(|g| arity.is_none_or(|a| g.arity() == a))
            .collect())
    }

    pub fn contains(self, gate: GateKind) -> bool {
        match self {
            // Membership follows the published set listings, not a
            // basis-preservation predicate.
            GateSetId::Classical => matches!(
                gate,
                GateKind::I
                    | GateKind::X
                    | GateKind::CNOT
                    | GateKind::SWAP
                    | GateKind::Toffoli
                    | GateKind::Fredkin
            ),
            GateSetId::Quantum => true,
        }
    }
}

impl fmt::Display for GateSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSetId::Classical => f.write_str("classical"),
            GateSetId::Quantum => f.write_str("quantum"),
        }
    }
}

impl FromStr for GateSetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(GateSetId::Classical),
            "quantum" => Ok(GateSetId::Quantum),
            other => Err(format!("unknown gate set `{other}` (expected classical|quantum)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += a[r * dim + k] * b[k * dim + c];
                }
                out[r * dim + c] = acc;
            }
        }
        out
    }

    #[test]
    fn all_gates_are_unitary() {
        for gate in ALL_GATES {
            let dim = 1 << gate.arity();
            let u = gate.unitary();
            let udag: Vec<Complex64> = (0..dim * dim)
                .map(|idx| u[(idx % dim) * dim + idx / dim].conj())
                .collect();
            let prod = matmul(&u, &udag, dim);
            for r in 0..dim {
                for c in 0..dim {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    let delta = (prod[r * dim + c] - Complex64::new(expect, 0.0)).norm();
                    assert!(delta < 1e-12, "{gate}: U U† deviates by {delta} at ({r},{c})");
                }
            }
        }
    }

    #[test]
    fn pauli_x_matrix() {
        let u = GateKind::X.unitary();
        assert_eq!(u[0], Complex64::new(0.0, 0.0));
        assert_eq!(u[1], Complex64::new(1.0, 0.0));
        assert_eq!(u[2], Complex64::new(1.0, 0.0));
        assert_eq!(u[3], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hadamard_entries_are_inv_sqrt2() {
        for a in GateKind::H.unitary() {
            assert!((a.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn toffoli_swaps_110_and_111() {
        let u = GateKind::Toffoli.unitary();
        // column 6 -> row 7 and column 7 -> row 6; all other columns fixed
        assert_eq!(u[7 * 8 + 6], Complex64::new(1.0, 0.0));
        assert_eq!(u[6 * 8 + 7], Complex64::new(1.0, 0.0));
        for col in 0..6 {
            assert_eq!(u[col * 8 + col], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn set_membership_counts() {
        assert_eq!(GateSetId::Classical.members(None).unwrap().len(), 6);
        assert_eq!(GateSetId::Quantum.members(None).unwrap().len(), 13);
        for g in GateSetId::Classical.members(None).unwrap() {
            assert!(GateSetId::Quantum.contains(g));
        }
    }

    #[test]
    fn arity_filters() {
        assert_eq!(
            GateSetId::Classical.members(Some(1)).unwrap(),
            vec![GateKind::I, GateKind::X]
        );
        assert_eq!(
            GateSetId::Quantum.members(Some(3)).unwrap(),
            vec![GateKind::Toffoli, GateKind::Fredkin]
        );
        assert!(GateSetId::Quantum.members(Some(4)).is_err());
    }

    #[test]
    fn basis_preservation() {
        for g in GateSetId::Classical.members(None).unwrap() {
            assert!(g.is_basis_preserving(), "{g} should preserve the basis");
        }
        assert!(!GateKind::H.is_basis_preserving());
        assert!(!GateKind::Z.is_basis_preserving());
        assert!(!GateKind::S.is_basis_preserving());
        assert!(!GateKind::Y.is_basis_preserving());
    }

    #[test]
    fn gate_names_round_trip() {
        for g in ALL_GATES {
            assert_eq!(g.name().parse::<GateKind>().unwrap(), g);
        }
        assert!("CZ".parse::<GateKind>().is_err());
    }
}
