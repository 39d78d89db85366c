//! Exact statevector simulation, finite-shot sampling, and density-matrix
//! simulation with Kraus noise.
//!
//! Qubit ordering is little-endian: qubit 0 is the least significant bit of a
//! basis index.

mod density;
mod noise;

pub use density::{
    channel_acts, draw_firings, expectation_z_density, run_density, run_density_fired,
    run_density_observed, run_fired_from_pure, DensityMatrix, MixedState,
};
pub use noise::{make_channel, ChannelEntry, ChannelKind, NoiseChannel, NoiseSpec};

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{unitary, Circuit, Gate, Matrix};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const MAX_STATEVECTOR_QUBITS: usize = 14;
pub const MAX_DENSITY_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooWide {
                width: num_qubits,
                limit: MAX_STATEVECTOR_QUBITS,
            });
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps amplitudes as given; the caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two(),
                actual: dim,
            });
        }
        let num_qubits = dim.trailing_zeros() as usize;
        if num_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooWide {
                width: num_qubits,
                limit: MAX_STATEVECTOR_QUBITS,
            });
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.num_qubits)?;
        let bit = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

pub(crate) fn check_qubit(qubit: usize, width: usize) -> Result<()> {
    if qubit >= width {
        Err(Error::QubitOutOfRange { qubit, width })
    } else {
        Ok(())
    }
}

/// Applies a `2^a × 2^a` matrix to `wires` of an `n`-qubit amplitude vector.
/// `wires[0]` is the most significant bit of the local index.
pub(crate) fn apply_local(amps: &mut [Complex64], m: &Matrix, wires: &[usize]) {
    let a = wires.len();
    let d = 1usize << a;
    debug_assert_eq!(m.dim, d);
    let mut sorted = wires.to_vec();
    sorted.sort_unstable();
    let groups = amps.len() >> a;
    // base index of group k: k with a zero bit spliced in at every wire
    let base_of = |k: usize| {
        sorted
            .iter()
            .fold(k, |b, &w| ((b >> w) << (w + 1)) | (b & ((1 << w) - 1)))
    };
    if a == 1 {
        let bit = 1usize << wires[0];
        let [m00, m01, m10, m11] = [m.data[0], m.data[1], m.data[2], m.data[3]];
        for k in 0..groups {
            let i0 = base_of(k);
            let (x, y) = (amps[i0], amps[i0 | bit]);
            amps[i0] = m00 * x + m01 * y;
            amps[i0 | bit] = m10 * x + m11 * y;
        }
        return;
    }
    let offsets: Vec<usize> = (0..d)
        .map(|l| {
            (0..a)
                .filter(|j| (l >> (a - 1 - j)) & 1 == 1)
                .fold(0, |o, j| o | (1 << wires[j]))
        })
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    let nonzero: Vec<Vec<(usize, Complex64)>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| (c, m.data[r * d + c]))
                .filter(|(_, v)| *v != zero)
                .collect()
        })
        .collect();
    let mut buf = vec![zero; d];
    for k in 0..groups {
        let base = base_of(k);
        for (l, &off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (row, &off) in nonzero.iter().zip(&offsets) {
            amps[base | off] = row.iter().map(|&(c, v)| v * buf[c]).sum();
        }
    }
}

/// Gate parameters after adding any bound input feature.
pub fn effective_params(gate: &Gate, features: Option<&[f64]>) -> Vec<f64> {
    let mut p = gate.params.clone();
    if let (Some(f), Some(xs)) = (gate.feature, features) {
        if let (Some(first), Some(x)) = (p.first_mut(), xs.get(f)) {
            *first += x;
        }
    }
    p
}

pub fn apply_gate(state: &mut StateVector, gate: &Gate) -> Result<()> {
    apply_gate_with(state, gate, None)
}

pub fn apply_gate_with(
    state: &mut StateVector,
    gate: &Gate,
    features: Option<&[f64]>,
) -> Result<()> {
    for &w in &gate.wires {
        check_qubit(w, state.num_qubits)?;
    }
    let u = unitary(gate.kind, &effective_params(gate, features));
    apply_local(&mut state.amps, &u, &gate.wires);
    Ok(())
}

/// Runs the circuit in canonical order: ascending position, then ascending
/// minimum wire.
pub fn run_statevector(circuit: &Circuit, input: &StateVector) -> Result<StateVector> {
    run_statevector_with(circuit, input, None)
}

pub fn run_statevector_with(
    circuit: &Circuit,
    input: &StateVector,
    features: Option<&[f64]>,
) -> Result<StateVector> {
    if input.num_qubits != circuit.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.num_qubits,
            actual: input.amps.len(),
        });
    }
    let mut state = input.clone();
    for g in circuit.gates() {
        apply_gate_with(&mut state, g, features)?;
    }
    Ok(state)
}

/// Exact `⟨Z⟩` on one qubit.
pub fn exact_expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    Ok(1.0 - 2.0 * state.prob_one(qubit)?)
}

/// Estimates `⟨Z⟩` from `p(1)` using `shots` independent Z-basis outcomes.
pub fn sample_z_from_prob(p_one: f64, shots: u64, rng: &mut Rng) -> f64 {
    let p = p_one.clamp(0.0, 1.0);
    let ones = if p <= 0.0 {
        0
    } else if p >= 1.0 {
        shots
    } else {
        Binomial::new(shots, p).expect("valid binomial").sample(rng)
    };
    (shots as f64 - 2.0 * ones as f64) / shots as f64
}

/// Finite-shot `⟨Z⟩` estimate: (#(+1) − #(−1)) / shots.
pub fn sample_expectation_z(
    state: &StateVector,
    qubit: usize,
    shots: u64,
    rng: &mut Rng,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    Ok(sample_z_from_prob(state.prob_one(qubit)?, shots, rng))
}

/// Uniform draw used for Bernoulli noise insertion.
pub(crate) fn bernoulli(rng: &mut Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::rng::seeded;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        apply_gate(&mut s, &Gate::new(GateKind::Hadamard, &[0], &[], 0)).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // qubit 0 = 1, qubit 1 = 0 -> index 1
        let mut s = StateVector::basis(2, 0b01).unwrap();
        apply_gate(&mut s, &Gate::new(GateKind::CNOT, &[0, 1], &[], 0)).unwrap();
        assert!(close(s.amplitudes()[0b11], 1.0, 0.0));
    }

    #[test]
    fn rx_half_pi() {
        let mut s = StateVector::zero(1).unwrap();
        apply_gate(&mut s, &Gate::new(GateKind::RX, &[0], &[FRAC_PI_2], 0)).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_PI_4.cos(), 0.0));
        assert!(close(s.amplitudes()[1], 0.0, -FRAC_PI_4.sin()));
    }

    #[test]
    fn wire_out_of_range() {
        let mut s = StateVector::zero(1).unwrap();
        assert!(apply_gate(&mut s, &Gate::new(GateKind::PauliX, &[1], &[], 0)).is_err());
    }

    #[test]
    fn run_identities() {
        let input = StateVector::zero(2).unwrap();
        assert_eq!(run_statevector(&Circuit::new(2), &input).unwrap(), input);
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::new(GateKind::Hadamard, &[0], &[], 0),
                Gate::new(GateKind::Hadamard, &[0], &[], 1),
            ],
        );
        let out = run_statevector(&c, &input).unwrap();
        assert!(close(out.amplitudes()[0], 1.0, 0.0));
        assert!(run_statevector(&c, &StateVector::zero(3).unwrap()).is_err());
    }

    #[test]
    fn expectations() {
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(exact_expectation_z(&zero, 0).unwrap(), 1.0);
        let mut h = zero.clone();
        apply_gate(&mut h, &Gate::new(GateKind::Hadamard, &[0], &[], 0)).unwrap();
        assert!(exact_expectation_z(&h, 0).unwrap().abs() < 1e-12);
        let mut r = zero.clone();
        apply_gate(&mut r, &Gate::new(GateKind::RX, &[0], &[1.0], 0)).unwrap();
        assert!((exact_expectation_z(&r, 0).unwrap() - 1.0f64.cos()).abs() < 1e-12);
        assert!(exact_expectation_z(&zero, 1).is_err());
    }

    #[test]
    fn deterministic_outcomes_sample_exactly() {
        let mut rng = seeded(1);
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        for shots in [1, 7, 1000] {
            assert_eq!(
                sample_expectation_z(&zero, 0, shots, &mut rng).unwrap(),
                1.0
            );
            assert_eq!(
                sample_expectation_z(&one, 0, shots, &mut rng).unwrap(),
                -1.0
            );
        }
    }

    #[test]
    fn sampling_concentrates() {
        let mut s = StateVector::zero(1).unwrap();
        apply_gate(&mut s, &Gate::new(GateKind::Hadamard, &[0], &[], 0)).unwrap();
        let z = sample_expectation_z(&s, 0, 1_000_000, &mut seeded(3)).unwrap();
        assert!(z.abs() < 0.01);
        let a = sample_expectation_z(&s, 0, 100, &mut seeded(9)).unwrap();
        let b = sample_expectation_z(&s, 0, 100, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
    }
}
