//! Linear binary discretization of real variables.
//!
//! Each variable gets `n` qubits; an MSB-first bitstring is read as an integer
//! `z` and mapped to `a + z (b - a) / (2^n - 1)`. Register `i` occupies the
//! contiguous qubit range `[i*n, (i+1)*n)`, with qubit `i*n` the most
//! significant bit of variable `i`.

use serde::{Deserialize, Serialize};

use crate::{QgaError, Result};

/// Closed interval `[lower, upper]` for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableDomain {
    pub lower: f64,
    pub upper: f64,
}

impl VariableDomain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(QgaError::InvalidConfig {
                field: "domain".into(),
                reason: format!("need finite lower < upper, got [{lower}, {upper}]"),
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Layout of the full register: `m` variables, `n` qubits each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub num_variables: usize,
    pub qubits_per_variable: usize,
    pub domains: Vec<VariableDomain>,
}

impl EncodingSpec {
    pub fn new(num_variables: usize, qubits_per_variable: usize, domains: Vec<VariableDomain>) -> Result<Self> {
        if num_variables == 0 {
            return Err(QgaError::InvalidConfig {
                field: "num_variables".into(),
                reason: "must be at least 1".into(),
            });
        }
        if qubits_per_variable == 0 {
            return Err(QgaError::InvalidConfig {
                field: "qubits_per_variable".into(),
                reason: "must be at least 1".into(),
            });
        }
        if domains.len() != num_variables {
            return Err(QgaError::InvalidConfig {
                field: "domains".into(),
                reason: format!("expected {} domains, got {}", num_variables, domains.len()),
            });
        }
        Ok(Self {
            num_variables,
            qubits_per_variable,
            domains,
        })
    }

    /// Same domain for every variable.
    pub fn uniform(num_variables: usize, qubits_per_variable: usize, domain: VariableDomain) -> Result<Self> {
        Self::new(num_variables, qubits_per_variable, vec![domain; num_variables])
    }

    pub fn total_qubits(&self) -> usize {
        self.num_variables * self.qubits_per_variable
    }

    /// Decode an amplitude index (qubit 0 = most significant bit) into the
    /// real vector. Hot path of fitness evaluation.
    pub fn decode_index(&self, index: usize) -> Vec<f64> {
        let n = self.qubits_per_variable;
        let q = self.total_qubits();
        let mask = (1usize << n) - 1;
        (0..self.num_variables)
            .map(|i| {
                let z = (index >> (q - (i + 1) * n)) & mask;
                integer_to_real_unchecked(z as u64, &self.domains[i], n)
            })
            .collect()
    }
}

/// MSB-first bits to integer.
pub fn bits_to_integer(bits: &[u8]) -> Result<u64> {
    let mut z = 0u64;
    for &b in bits {
        if b > 1 {
            return Err(QgaError::Parse(format!("non-binary digit {b} in bitstring")));
        }
        z = (z << 1) | u64::from(b);
    }
    Ok(z)
}

fn integer_to_real_unchecked(z: u64, domain: &VariableDomain, n: usize) -> f64 {
    let levels = ((1u64 << n) - 1) as f64;
    domain.lower + (z as f64 / levels) * domain.width()
}

/// Map `z` in `[0, 2^n - 1]` linearly onto the domain.
pub fn integer_to_real(z: u64, domain: &VariableDomain, n: usize) -> Result<f64> {
    if z >= (1u64 << n) {
        return Err(QgaError::Parse(format!("z = {z} out of range for n = {n}")));
    }
    Ok(integer_to_real_unchecked(z, domain, n))
}

/// Decode a full measurement bitstring (length `m*n`, MSB first per register).
pub fn decode_global_bitstring(bits: &[u8], spec: &EncodingSpec) -> Result<Vec<f64>> {
    if bits.len() != spec.total_qubits() {
        return Err(QgaError::DimensionMismatch(format!(
            "bitstring length {} does not match {} qubits",
            bits.len(),
            spec.total_qubits()
        )));
    }
    let n = spec.qubits_per_variable;
    (0..spec.num_variables)
        .map(|i| {
            let z = bits_to_integer(&bits[i * n..(i + 1) * n])?;
            integer_to_real(z, &spec.domains[i], n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> VariableDomain {
        VariableDomain::new(-5.12, 5.12).unwrap()
    }

    #[test]
    fn bits_to_integer_msb_first() {
        assert_eq!(bits_to_integer(&[0; 8]).unwrap(), 0);
        assert_eq!(bits_to_integer(&[1; 8]).unwrap(), 255);
        assert_eq!(bits_to_integer(&[1, 0, 0, 0, 0, 0, 0, 0]).unwrap(), 128);
        assert!(bits_to_integer(&[0, 2]).is_err());
    }

    #[test]
    fn integer_to_real_endpoints() {
        assert_eq!(integer_to_real(0, &dom(), 8).unwrap(), -5.12);
        assert_eq!(integer_to_real(255, &dom(), 8).unwrap(), 5.12);
        assert!(integer_to_real(256, &dom(), 8).is_err());
    }

    #[test]
    fn integer_to_real_midpoint() {
        // oracle: direct formula a + z (b - a) / (2^n - 1)
        let expect = -5.12 + (128.0 / 255.0) * 10.24;
        let got = integer_to_real(128, &dom(), 8).unwrap();
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.0200784313725).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_z() {
        let mut prev = f64::NEG_INFINITY;
        for z in 0..256 {
            let x = integer_to_real(z, &dom(), 8).unwrap();
            assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn adjacent_step_size() {
        let step = integer_to_real(1, &dom(), 8).unwrap() - integer_to_real(0, &dom(), 8).unwrap();
        assert!((step - 10.24 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn global_decode_registers_independent() {
        let spec = EncodingSpec::uniform(2, 8, dom()).unwrap();
        assert_eq!(decode_global_bitstring(&[0; 16], &spec).unwrap(), vec![-5.12, -5.12]);
        assert_eq!(decode_global_bitstring(&[1; 16], &spec).unwrap(), vec![5.12, 5.12]);
        let mut bits = [0u8; 16];
        bits[..8].fill(1);
        assert_eq!(decode_global_bitstring(&bits, &spec).unwrap(), vec![5.12, -5.12]);
        assert!(decode_global_bitstring(&[0; 15], &spec).is_err());
    }

    #[test]
    fn decode_index_matches_naive_composition() {
        let spec = EncodingSpec::uniform(2, 4, dom()).unwrap();
        for index in 0..256 {
            let bits: Vec<u8> = (0..8).map(|j| ((index >> (7 - j)) & 1) as u8).collect();
            let naive = decode_global_bitstring(&bits, &spec).unwrap();
            assert_eq!(spec.decode_index(index), naive);
        }
    }
}
