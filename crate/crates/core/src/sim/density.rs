use num_complex::Complex64;

use super::{
    apply_local, bernoulli, check_qubit, effective_params, NoiseChannel, StateVector,
    MAX_DENSITY_QUBITS,
};
use crate::circuit::{unitary, Circuit, Matrix};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Density matrix stored row-major as a `2n`-qubit amplitude vector: the
/// column index fills qubits `0..n`, the row index fills `n..2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        let n = state.num_qubits();
        if n > MAX_DENSITY_QUBITS {
            return Err(Error::TooWide {
                width: n,
                limit: MAX_DENSITY_QUBITS,
            });
        }
        let a = state.amplitudes();
        let data = a
            .iter()
            .flat_map(|x| a.iter().map(move |y| x * y.conj()))
            .collect();
        Ok(DensityMatrix {
            num_qubits: n,
            data,
        })
    }

    /// Builds from a full matrix (dimension `2^n`).
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: m.dim.next_power_of_two(),
                actual: m.dim,
            });
        }
        let n = m.dim.trailing_zeros() as usize;
        if n > MAX_DENSITY_QUBITS {
            return Err(Error::TooWide {
                width: n,
                limit: MAX_DENSITY_QUBITS,
            });
        }
        Ok(DensityMatrix {
            num_qubits: n,
            data: m.data.clone(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            dim: self.dim(),
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut e = 0.0f64;
        for i in 0..d {
            for j in i..d {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        e
    }

    fn row_wires(&self, wires: &[usize]) -> Vec<usize> {
        wires.iter().map(|w| w + self.num_qubits).collect()
    }

    /// `ρ → U ρ U†`.
    pub fn apply_unitary(&mut self, u: &Matrix, wires: &[usize]) {
        let rows = self.row_wires(wires);
        apply_local(&mut self.data, u, &rows);
        let conj = Matrix {
            dim: u.dim,
            data: u.data.iter().map(|z| z.conj()).collect(),
        };
        apply_local(&mut self.data, &conj, wires);
    }

    /// `ρ → Σ K ρ K†`, applied as one superoperator pass.
    pub fn apply_channel(&mut self, channel: &NoiseChannel, wires: &[usize]) {
        debug_assert_eq!(wires.len(), channel.arity);
        let mut all = self.row_wires(wires);
        all.extend_from_slice(wires);
        apply_local(&mut self.data, channel.superop(), &all);
    }

    /// Reference implementation of [`apply_channel`](Self::apply_channel)
    /// summing the Kraus terms one by one.
    pub fn apply_channel_kraus(&mut self, channel: &NoiseChannel, wires: &[usize]) {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for k in channel.kraus() {
            let mut term = self.clone();
            term.apply_unitary(k, wires);
            acc.iter_mut().zip(&term.data).for_each(|(a, t)| *a += t);
        }
        self.data = acc;
    }

    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.num_qubits)?;
        let bit = 1usize << qubit;
        Ok((0..self.dim())
            .filter(|i| i & bit != 0)
            .map(|i| self.get(i, i).re)
            .sum())
    }
}

/// `tr(Z_q ρ)`.
pub fn expectation_z_density(rho: &DensityMatrix, qubit: usize) -> Result<f64> {
    check_qubit(qubit, rho.num_qubits)?;
    let bit = 1usize << qubit;
    Ok((0..rho.dim())
        .map(|i| {
            if i & bit == 0 {
                rho.get(i, i).re
            } else {
                -rho.get(i, i).re
            }
        })
        .sum())
}

/// Evolves `ρ` through the circuit, inserting each channel after each gate
/// with its probability. Single-qubit channels act on every wire of the gate;
/// two-qubit channels fire only after gates with at least two wires.
pub fn run_density(
    circuit: &Circuit,
    noise: &[(NoiseChannel, f64)],
    input: &DensityMatrix,
    features: Option<&[f64]>,
    rng: &mut Rng,
) -> Result<DensityMatrix> {
    run_density_observed(circuit, noise, input, features, rng, |_| {})
}

/// [`run_density`] with a callback after every gate and every channel.
pub fn run_density_observed(
    circuit: &Circuit,
    noise: &[(NoiseChannel, f64)],
    input: &DensityMatrix,
    features: Option<&[f64]>,
    rng: &mut Rng,
    observe: impl FnMut(&DensityMatrix),
) -> Result<DensityMatrix> {
    let fired = draw_firings(circuit, noise, rng);
    run_density_fired(circuit, noise, input, features, &fired, 0, observe)
}

/// One Bernoulli draw per (gate, channel) in gate-major order; entry
/// `g * noise.len() + c` says whether channel `c` fires after gate `g`.
/// This is exactly the draw sequence [`run_density`] consumes.
pub fn draw_firings(circuit: &Circuit, noise: &[(NoiseChannel, f64)], rng: &mut Rng) -> Vec<bool> {
    let mut fired = Vec::with_capacity(circuit.len() * noise.len());
    for _ in circuit.gates() {
        fired.extend(noise.iter().map(|(_, p)| bernoulli(rng, *p)));
    }
    fired
}

/// Whether a fired channel actually acts after `gate`: drift follows only
/// parameterized gates, and a channel needs at least its arity in wires.
pub fn channel_acts(channel: &NoiseChannel, gate: &crate::circuit::Gate) -> bool {
    !(channel.kind == super::ChannelKind::Drift && !gate.kind.is_parameterized())
        && channel.arity <= gate.wires.len()
}

/// Runs gates `start..` on `input` with a predrawn firing pattern from
/// [`draw_firings`].
pub fn run_density_fired(
    circuit: &Circuit,
    noise: &[(NoiseChannel, f64)],
    input: &DensityMatrix,
    features: Option<&[f64]>,
    fired: &[bool],
    start: usize,
    mut observe: impl FnMut(&DensityMatrix),
) -> Result<DensityMatrix> {
    if input.num_qubits != circuit.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.num_qubits,
            actual: input.dim(),
        });
    }
    debug_assert_eq!(fired.len(), circuit.len() * noise.len());
    let mut rho = input.clone();
    for (gi, g) in circuit.gates().iter().enumerate().skip(start) {
        for &w in &g.wires {
            check_qubit(w, rho.num_qubits)?;
        }
        rho.apply_unitary(&unitary(g.kind, &effective_params(g, features)), &g.wires);
        observe(&rho);
        for (ci, (ch, _)) in noise.iter().enumerate() {
            if !fired[gi * noise.len() + ci] {
                continue;
            }
            if !channel_acts(ch, g) {
                if ch.arity > g.wires.len() {
                    log::warn!(
                        "skipping {:?} after {}-qubit gate {}",
                        ch.kind,
                        g.wires.len(),
                        g.kind
                    );
                }
                continue;
            }
            if ch.arity == 1 {
                for &w in &g.wires {
                    rho.apply_channel(ch, &[w]);
                }
            } else {
                rho.apply_channel(ch, &g.wires[..ch.arity]);
            }
            observe(&rho);
        }
    }
    Ok(rho)
}

/// A state reached from a pure input: either an ensemble of unnormalized
/// pure branches with `ρ = Σ |φ⟩⟨φ|`, or a density matrix once the ensemble
/// would cost more than `ρ` itself.
#[derive(Debug, Clone)]
pub enum MixedState {
    Ensemble(Vec<StateVector>),
    Density(DensityMatrix),
}

impl MixedState {
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        match self {
            MixedState::Ensemble(branches) => branches.iter().map(|b| b.prob_one(qubit)).sum(),
            MixedState::Density(rho) => rho.prob_one(qubit),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            MixedState::Density(rho) => Ok(rho.clone()),
            MixedState::Ensemble(branches) => {
                let n = branches[0].num_qubits();
                if n > MAX_DENSITY_QUBITS {
                    return Err(Error::TooWide {
                        width: n,
                        limit: MAX_DENSITY_QUBITS,
                    });
                }
                let dim = 1usize << n;
                let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
                for b in branches {
                    let a = b.amplitudes();
                    for (i, x) in a.iter().enumerate() {
                        for (j, y) in a.iter().enumerate() {
                            data[i * dim + j] += x * y.conj();
                        }
                    }
                }
                Ok(DensityMatrix {
                    num_qubits: n,
                    data,
                })
            }
        }
    }
}

/// Same result as [`run_density_fired`] from `|ψ⟩⟨ψ|`, but each fired
/// channel splits pure branches by Kraus operator. Switches to the density
/// matrix when the ensemble would exceed `2^(n+1)` branches.
pub fn run_fired_from_pure(
    circuit: &Circuit,
    noise: &[(NoiseChannel, f64)],
    input: &StateVector,
    features: Option<&[f64]>,
    fired: &[bool],
) -> Result<MixedState> {
    let n = input.num_qubits();
    if n != circuit.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.num_qubits,
            actual: input.amplitudes().len(),
        });
    }
    debug_assert_eq!(fired.len(), circuit.len() * noise.len());
    let limit = 1usize << (n + 1);
    let mut state = MixedState::Ensemble(vec![input.clone()]);
    for (gi, g) in circuit.gates().iter().enumerate() {
        for &w in &g.wires {
            check_qubit(w, n)?;
        }
        let u = unitary(g.kind, &effective_params(g, features));
        match &mut state {
            MixedState::Ensemble(branches) => branches
                .iter_mut()
                .for_each(|b| apply_local(&mut b.amps, &u, &g.wires)),
            MixedState::Density(rho) => rho.apply_unitary(&u, &g.wires),
        }
        for (ci, (ch, _)) in noise.iter().enumerate() {
            if !fired[gi * noise.len() + ci] || !channel_acts(ch, g) {
                continue;
            }
            let targets: Vec<&[usize]> = if ch.arity == 1 {
                g.wires.chunks(1).collect()
            } else {
                vec![&g.wires[..ch.arity]]
            };
            for wires in targets {
                if let MixedState::Ensemble(branches) = &state {
                    if branches.len() * ch.kraus().len() > limit {
                        state = MixedState::Density(state.to_density()?);
                    }
                }
                match &mut state {
                    MixedState::Ensemble(branches) => {
                        let mut next = Vec::with_capacity(branches.len() * ch.kraus().len());
                        for b in branches.iter() {
                            for k in ch.kraus() {
                                let mut phi = b.clone();
                                apply_local(&mut phi.amps, k, wires);
                                if phi.amps.iter().any(|z| z.norm_sqr() != 0.0) {
                                    next.push(phi);
                                }
                            }
                        }
                        *branches = next;
                    }
                    MixedState::Density(rho) => rho.apply_channel(ch, wires),
                }
            }
        }
    }
    Ok(state)
}
