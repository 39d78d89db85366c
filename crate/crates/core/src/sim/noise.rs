use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{unitary, GateKind, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Depolarizing,
    BitFlip,
    PhaseFlip,
    PhaseDamping,
    AmplitudeDamping,
    ThermalRelaxation,
    Crosstalk,
    Drift,
}

impl ChannelKind {
    pub fn arity(self) -> usize {
        match self {
            ChannelKind::Crosstalk => 2,
            _ => 1,
        }
    }
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    pub kind: ChannelKind,
    pub arity: usize,
    kraus: Vec<Matrix>,
    /// `Σ K ⊗ conj(K)`, acting on (row wires, column wires) of a vectorized `ρ`.
    superop: Matrix,
}

impl NoiseChannel {
    pub fn new(kind: ChannelKind, kraus: Vec<Matrix>) -> Self {
        let d = 1usize << kind.arity();
        let superop = kraus.iter().fold(Matrix::zeros(d * d), |acc, k| {
            let conj = Matrix {
                dim: d,
                data: k.data.iter().map(|z| z.conj()).collect(),
            };
            acc.add(&k.kron(&conj))
        });
        NoiseChannel {
            kind,
            arity: kind.arity(),
            kraus,
            superop,
        }
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub(crate) fn superop(&self) -> &Matrix {
        &self.superop
    }

    /// `Σ K†K`, which equals the identity for a valid channel.
    pub fn completeness(&self) -> Matrix {
        let d = 1 << self.arity;
        self.kraus
            .iter()
            .fold(Matrix::zeros(d), |acc, k| acc.add(&k.adjoint().mul(k)))
    }
}

fn prob(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = *params
        .get(key)
        .ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{key}'")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "{key} = {v} outside [0, 1]"
        )));
    }
    Ok(v)
}

fn positive(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = *params
        .get(key)
        .ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{key}'")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{key} = {v} must be positive"
        )));
    }
    Ok(v)
}

fn pauli(i: usize) -> Matrix {
    match i {
        0 => Matrix::identity(2),
        1 => unitary(GateKind::PauliX, &[]),
        2 => unitary(GateKind::PauliY, &[]),
        _ => unitary(GateKind::PauliZ, &[]),
    }
}

fn amplitude_damping(gamma: f64) -> [Matrix; 2] {
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut k0 = Matrix::identity(2);
    k0[(1, 1)] = c((1.0 - gamma).sqrt());
    let mut k1 = Matrix::zeros(2);
    k1[(0, 1)] = c(gamma.sqrt());
    [k0, k1]
}

fn phase_damping(lambda: f64) -> [Matrix; 2] {
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut k0 = Matrix::identity(2);
    k0[(1, 1)] = c((1.0 - lambda).sqrt());
    let mut k1 = Matrix::zeros(2);
    k1[(1, 1)] = c(lambda.sqrt());
    [k0, k1]
}

/// Builds the Kraus set of a catalog channel.
///
/// Parameter names: `p` (Depolarizing, BitFlip, PhaseFlip, Crosstalk),
/// `gamma` (AmplitudeDamping), `lambda` (PhaseDamping), `t1`, `t2`,
/// `gate_time` (ThermalRelaxation), `theta_d` (Drift).
pub fn make_channel(kind: ChannelKind, params: &BTreeMap<String, f64>) -> Result<NoiseChannel> {
    let kraus = match kind {
        ChannelKind::BitFlip => {
            let p = prob(params, "p")?;
            vec![pauli(0).scale((1.0 - p).sqrt()), pauli(1).scale(p.sqrt())]
        }
        ChannelKind::PhaseFlip => {
            let p = prob(params, "p")?;
            vec![pauli(0).scale((1.0 - p).sqrt()), pauli(3).scale(p.sqrt())]
        }
        ChannelKind::Depolarizing => {
            let p = prob(params, "p")?;
            let mut ks = vec![pauli(0).scale((1.0 - 0.75 * p).sqrt())];
            ks.extend((1..4).map(|i| pauli(i).scale((p / 4.0).sqrt())));
            ks
        }
        ChannelKind::AmplitudeDamping => amplitude_damping(prob(params, "gamma")?).to_vec(),
        ChannelKind::PhaseDamping => phase_damping(prob(params, "lambda")?).to_vec(),
        ChannelKind::ThermalRelaxation => {
            let t1 = positive(params, "t1")?;
            let t2 = positive(params, "t2")?;
            let t = *params
                .get("gate_time")
                .ok_or_else(|| Error::InvalidParameter("missing parameter 'gate_time'".into()))?;
            if t2 > 2.0 * t1 {
                return Err(Error::InvalidParameter(format!(
                    "t2 = {t2} exceeds 2 * t1 = {}",
                    2.0 * t1
                )));
            }
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gate_time = {t} must be non-negative"
                )));
            }
            // Amplitude damping shrinks coherences by exp(-t / 2T1); pure
            // dephasing supplies the rest of exp(-t / T2).
            let gamma = 1.0 - (-t / t1).exp();
            let lambda = (1.0 - (-2.0 * t / t2 + t / t1).exp()).max(0.0);
            let ad = amplitude_damping(gamma);
            let pd = phase_damping(lambda);
            pd.iter()
                .flat_map(|p| ad.iter().map(move |a| p.mul(a)))
                .collect()
        }
        ChannelKind::Crosstalk => {
            let p = prob(params, "p")?;
            let mut ks = Vec::with_capacity(16);
            for a in 0..4 {
                for b in 0..4 {
                    let w = if a == 0 && b == 0 {
                        1.0 - 15.0 * p / 16.0
                    } else {
                        p / 16.0
                    };
                    ks.push(pauli(a).kron(&pauli(b)).scale(w.sqrt()));
                }
            }
            ks
        }
        ChannelKind::Drift => {
            let theta = *params
                .get("theta_d")
                .ok_or_else(|| Error::InvalidParameter("missing parameter 'theta_d'".into()))?;
            if !theta.is_finite() {
                return Err(Error::InvalidParameter("theta_d must be finite".into()));
            }
            vec![unitary(GateKind::RZ, &[theta])]
        }
    };
    Ok(NoiseChannel::new(kind, kraus))
}

/// One configured channel of a `NoiseSpec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub name: ChannelKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Per-channel insertion probability; falls back to the `NoiseSpec` default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

/// Channels inserted stochastically after gates during density simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default = "default_probability")]
    pub probability: f64,
    pub channels: Vec<ChannelEntry>,
}

fn default_probability() -> f64 {
    0.01
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec {
            probability: 0.0,
            channels: Vec::new(),
        }
    }

    /// All eight catalog channels at 1% insertion probability.
    pub fn representative() -> Self {
        let entry = |name, kv: &[(&str, f64)]| ChannelEntry {
            name,
            params: kv.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            probability: None,
        };
        NoiseSpec {
            probability: 0.01,
            channels: vec![
                entry(ChannelKind::Depolarizing, &[("p", 0.05)]),
                entry(ChannelKind::BitFlip, &[("p", 0.05)]),
                entry(ChannelKind::PhaseFlip, &[("p", 0.05)]),
                entry(ChannelKind::PhaseDamping, &[("lambda", 0.1)]),
                entry(ChannelKind::AmplitudeDamping, &[("gamma", 0.1)]),
                entry(
                    ChannelKind::ThermalRelaxation,
                    &[("t1", 50.0), ("t2", 70.0), ("gate_time", 5.0)],
                ),
                entry(ChannelKind::Crosstalk, &[("p", 0.05)]),
                entry(ChannelKind::Drift, &[("theta_d", 0.05)]),
            ],
        }
    }

    /// Resolves every entry into `(channel, probability)` pairs.
    pub fn build(&self) -> Result<Vec<(NoiseChannel, f64)>> {
        self.channels
            .iter()
            .map(|e| {
                let p = e.probability.unwrap_or(self.probability);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "insertion probability {p} outside [0, 1]"
                    )));
                }
                Ok((make_channel(e.name, &e.params)?, p))
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: NoiseSpec = serde_json::from_str(text)?;
        spec.build()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn bitflip_zero_is_identity() {
        let ch = make_channel(ChannelKind::BitFlip, &params(&[("p", 0.0)])).unwrap();
        assert!(ch.kraus()[0].max_abs_diff(&Matrix::identity(2)) < 1e-15);
        assert!(ch.kraus()[1].data.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn catalog_channels_are_complete() {
        let cases: Vec<(ChannelKind, BTreeMap<String, f64>)> = vec![
            (ChannelKind::Depolarizing, params(&[("p", 1.0)])),
            (ChannelKind::BitFlip, params(&[("p", 0.3)])),
            (ChannelKind::PhaseFlip, params(&[("p", 0.7)])),
            (ChannelKind::PhaseDamping, params(&[("lambda", 0.4)])),
            (ChannelKind::AmplitudeDamping, params(&[("gamma", 0.5)])),
            (
                ChannelKind::ThermalRelaxation,
                params(&[("t1", 50.0), ("t2", 30.0), ("gate_time", 10.0)]),
            ),
            (
                ChannelKind::ThermalRelaxation,
                params(&[("t1", 50.0), ("t2", 100.0), ("gate_time", 10.0)]),
            ),
            (ChannelKind::Crosstalk, params(&[("p", 0.2)])),
            (ChannelKind::Drift, params(&[("theta_d", 0.05)])),
        ];
        for (kind, p) in cases {
            let ch = make_channel(kind, &p).unwrap();
            let id = Matrix::identity(1 << ch.arity);
            assert!(ch.completeness().max_abs_diff(&id) < 1e-10, "{kind:?}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(make_channel(ChannelKind::BitFlip, &params(&[("p", 1.5)])).is_err());
        assert!(make_channel(ChannelKind::AmplitudeDamping, &params(&[])).is_err());
        let bad = params(&[("t1", 10.0), ("t2", 30.0), ("gate_time", 1.0)]);
        assert!(make_channel(ChannelKind::ThermalRelaxation, &bad).is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let text = r#"{"probability": 0.01, "channels": [{"name": "Depolarizing", "params": {"p": 0.1}}]}"#;
        let spec = NoiseSpec::from_json(text).unwrap();
        assert_eq!(spec.channels[0].name, ChannelKind::Depolarizing);
        assert_eq!(spec.build().unwrap()[0].1, 0.01);
        assert!(NoiseSpec::representative().build().is_ok());
    }
}
