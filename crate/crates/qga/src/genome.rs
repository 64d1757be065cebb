//! Layered circuit genome: the individual's genotype.
//!
//! A genome is an initial computational basis state plus an ordered list of
//! layers. Within a layer no qubit may be touched by more than one gate.
//! Qubits not covered by any instruction carry an implicit identity; the
//! explicit `I` gate is nevertheless legal.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::gateset::GateKind;
use crate::{QgaError, Result};

/// One gene: a gate plus its qubit operands (controls first, targets last).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateInstruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateInstruction {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Layer {
    pub instructions: Vec<GateInstruction>,
}

impl Layer {
    /// Canonical order: within a valid layer supports are disjoint, so sorting
    /// by lowest operand fixes a unique representative per gate multiset.
    pub fn new(mut instructions: Vec<GateInstruction>) -> Self {
        instructions.sort_by_key(|inst| inst.qubits.iter().min().copied().unwrap_or(0));
        Self { instructions }
    }
}

/// Structural validity failure, reported with its location.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenomeViolation {
    #[error("genome has no layers (depth must be >= 1)")]
    EmptyCircuit,
    #[error("initial basis state has {got} digits, expected {expected}")]
    BadInitialState { expected: usize, got: usize },
    #[error("initial basis state contains a non-binary digit")]
    NonBinaryInitialState,
    #[error("layer {layer}: gate {gate} has {got} operands, arity is {arity}")]
    WrongOperandCount {
        layer: usize,
        gate: GateKind,
        arity: usize,
        got: usize,
    },
    #[error("layer {layer}: gate {gate} repeats qubit {qubit}")]
    DuplicateOperand { layer: usize, gate: GateKind, qubit: usize },
    #[error("layer {layer}: qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange {
        layer: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("layer {layer}: qubit {qubit} is used by more than one gate")]
    QubitReused { layer: usize, qubit: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitGenome {
    pub num_qubits: usize,
    pub layers: Vec<Layer>,
    /// MSB-first digits of the initial computational basis state.
    pub initial_basis_state: Vec<u8>,
}

impl CircuitGenome {
    pub fn new(num_qubits: usize, layers: Vec<Layer>, initial_basis_state: Vec<u8>) -> Result<Self> {
        let genome = Self {
            num_qubits,
            layers,
            initial_basis_state,
        };
        genome.validate()?;
        Ok(genome)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.instructions.len()).sum()
    }

    /// Check every structural invariant; reports the first violation found.
    pub fn validate(&self) -> std::result::Result<(), GenomeViolation> {
        if self.layers.is_empty() {
            return Err(GenomeViolation::EmptyCircuit);
        }
        if self.initial_basis_state.len() != self.num_qubits {
            return Err(GenomeViolation::BadInitialState {
                expected: self.num_qubits,
                got: self.initial_basis_state.len(),
            });
        }
        if self.initial_basis_state.iter().any(|&b| b > 1) {
            return Err(GenomeViolation::NonBinaryInitialState);
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.num_qubits];
            for inst in &layer.instructions {
                let arity = inst.kind.arity();
                if inst.qubits.len() != arity {
                    return Err(GenomeViolation::WrongOperandCount {
                        layer: li,
                        gate: inst.kind,
                        arity,
                        got: inst.qubits.len(),
                    });
                }
                for (pos, &q) in inst.qubits.iter().enumerate() {
                    if q >= self.num_qubits {
                        return Err(GenomeViolation::QubitOutOfRange {
                            layer: li,
                            qubit: q,
                            num_qubits: self.num_qubits,
                        });
                    }
                    if inst.qubits[..pos].contains(&q) {
                        return Err(GenomeViolation::DuplicateOperand {
                            layer: li,
                            gate: inst.kind,
                            qubit: q,
                        });
                    }
                    if used[q] {
                        return Err(GenomeViolation::QubitReused { layer: li, qubit: q });
                    }
                    used[q] = true;
                }
            }
        }
        Ok(())
    }

    /// Serialize to the text record format: a header line
    /// `num_qubits depth bitstring`, then one line per layer with
    /// `NAME(q0,q1,...)` entries separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let bits: String = self.initial_basis_state.iter().map(|b| char::from(b'0' + b)).collect();
        out.push_str(&format!("{} {} {}\n", self.num_qubits, self.depth(), bits));
        for layer in &self.layers {
            let line: Vec<String> = layer
                .instructions
                .iter()
                .map(|inst| {
                    let qs: Vec<String> = inst.qubits.iter().map(|q| q.to_string()).collect();
                    format!("{}({})", inst.kind, qs.join(","))
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| QgaError::Parse("empty genome record".into()))?;
        let mut parts = header.split_whitespace();
        let num_qubits: usize = parse_field(parts.next(), "num_qubits")?;
        let depth: usize = parse_field(parts.next(), "depth")?;
        let bits_str = parts
            .next()
            .ok_or_else(|| QgaError::Parse("missing initial basis state in header".into()))?;
        let initial_basis_state: Vec<u8> = bits_str
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(QgaError::Parse(format!("bad basis digit `{other}`"))),
            })
            .collect::<Result<_>>()?;
        let mut layers = Vec::with_capacity(depth);
        for _ in 0..depth {
            let line = lines
                .next()
                .ok_or_else(|| QgaError::Parse(format!("expected {depth} layer lines")))?;
            layers.push(parse_layer(line)?);
        }
        let genome = CircuitGenome {
            num_qubits,
            layers,
            initial_basis_state,
        };
        genome.validate().map_err(QgaError::InvalidGenome)?;
        Ok(genome)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T> {
    field
        .ok_or_else(|| QgaError::Parse(format!("missing header field `{name}`")))?
        .parse()
        .map_err(|_| QgaError::Parse(format!("bad header field `{name}`")))
}

fn parse_layer(line: &str) -> Result<Layer> {
    let mut instructions = Vec::new();
    for token in line.split_whitespace() {
        let open = token
            .find('(')
            .ok_or_else(|| QgaError::Parse(format!("malformed instruction `{token}`")))?;
        if !token.ends_with(')') {
            return Err(QgaError::Parse(format!("malformed instruction `{token}`")));
        }
        let kind: GateKind = token[..open].parse().map_err(QgaError::Parse)?;
        let args = &token[open + 1..token.len() - 1];
        let qubits: Vec<usize> = args
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| QgaError::Parse(format!("bad qubit index `{s}`")))
            })
            .collect::<Result<_>>()?;
        instructions.push(GateInstruction::new(kind, qubits));
    }
    Ok(Layer::new(instructions))
}

impl fmt::Display for CircuitGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Which instruction (by index into the layer) occupies each qubit.
pub fn qubit_occupancy(layer: &Layer, num_qubits: usize) -> Vec<Option<usize>> {
    let mut occ = vec![None; num_qubits];
    for (idx, inst) in layer.instructions.iter().enumerate() {
        for &q in &inst.qubits {
            occ[q] = Some(idx);
        }
    }
    occ
}
