//! The nine post-training mutation operators.
//!
//! Every operator makes `k = max(1, round(p · |scope|))` sequential edits.
//! Depth percentages are measured against the original circuit's depth for
//! the whole application, and a gate edited once is never selected again.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Exp, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::circuit::{position_in_range, Circuit, FunctionCategory, Gate, GateKind, MutationScope};
use crate::error::{Error, Result};
use crate::qnn::QnnModel;
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum OperatorKind {
    /// Random gate add.
    RGA,
    /// Random gate delete.
    RGD,
    /// Gate replace within the equivalence class.
    GR,
    /// Gate position move along its wires.
    GPM,
    /// Gate size modify: add or drop a control.
    GSM,
    /// Gate retarget.
    GRT,
    /// Parameter fuzz.
    PF,
    /// Parameter sign flip.
    PSF,
    /// Parameter swap.
    PS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Gate,
    Parameter,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        OperatorKind::RGA,
        OperatorKind::RGD,
        OperatorKind::GR,
        OperatorKind::GPM,
        OperatorKind::GSM,
        OperatorKind::GRT,
        OperatorKind::PF,
        OperatorKind::PSF,
        OperatorKind::PS,
    ];

    pub fn level(self) -> Level {
        match self {
            OperatorKind::PF | OperatorKind::PSF | OperatorKind::PS => Level::Parameter,
            _ => Level::Gate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::RGA => "RGA",
            OperatorKind::RGD => "RGD",
            OperatorKind::GR => "GR",
            OperatorKind::GPM => "GPM",
            OperatorKind::GSM => "GSM",
            OperatorKind::GRT => "GRT",
            OperatorKind::PF => "PF",
            OperatorKind::PSF => "PSF",
            OperatorKind::PS => "PS",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown mutation operator '{s}'")))
    }
}

/// Distribution of inserted parameters (RGA) and additive noise (PF).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NoiseDist {
    Gaussian { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { lambda: f64 },
}

impl Default for NoiseDist {
    fn default() -> Self {
        NoiseDist::Gaussian {
            mean: 0.0,
            std: 1.0,
        }
    }
}

impl NoiseDist {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseDist::Gaussian { mean, std } => mean.is_finite() && std >= 0.0 && std.is_finite(),
            NoiseDist::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            NoiseDist::Exponential { lambda } => lambda > 0.0 && lambda.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid noise distribution {self:?}"
            )))
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            NoiseDist::Gaussian { mean, std } => {
                Normal::new(mean, std).expect("validated").sample(rng)
            }
            NoiseDist::Uniform { low, high } => {
                Uniform::new(low, high).expect("validated").sample(rng)
            }
            NoiseDist::Exponential { lambda } => Exp::new(lambda).expect("validated").sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub operator: OperatorKind,
    #[serde(default)]
    pub scope: MutationScope,
    #[serde(default)]
    pub noise: NoiseDist,
    #[serde(default)]
    pub seed: u64,
}

impl MutationConfig {
    pub fn new(operator: OperatorKind, scope: MutationScope) -> Self {
        MutationConfig {
            operator,
            scope,
            noise: NoiseDist::default(),
            seed: 0,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        MutationConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: MutationConfig = serde_json::from_str(text)?;
        c.noise.validate()?;
        Ok(c)
    }
}

/// One edit: `before` is removed (if any), then `after` is inserted (if any).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditRecord {
    pub op: OperatorKind,
    pub before: Option<Gate>,
    pub after: Option<Gate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutant {
    pub id: String,
    pub model: QnnModel,
    pub diff: Vec<EditRecord>,
    pub config: MutationConfig,
    /// Target edit count; edits stop early only when no eligible target is
    /// left.
    pub requested: usize,
    /// Edits actually made (pairs count once for PS).
    pub edits: usize,
}

fn round_count(p: f64, population: usize) -> usize {
    ((p * population as f64).round() as usize).max(1)
}

/// `max(1, round(p · |gates in scope|))`.
pub fn target_count(scope: &MutationScope, circuit: &Circuit) -> Result<usize> {
    let n = scope.select(circuit, circuit.depth(), true).len();
    if n == 0 {
        return Err(Error::EmptyScope);
    }
    Ok(round_count(scope.gate_percentage, n))
}

/// Gate population that sizes an operator's edit count. Insertion ignores
/// the gate-type filter, which only restricts the inserted kinds.
pub fn scope_population(op: OperatorKind, scope: &MutationScope, circuit: &Circuit) -> usize {
    scope
        .select(circuit, circuit.depth(), op != OperatorKind::RGA)
        .len()
}

fn key(g: &Gate) -> (usize, usize) {
    (g.position, g.min_wire())
}

struct Ctx<'a> {
    op: OperatorKind,
    scope: &'a MutationScope,
    depth: usize,
    qubits: Vec<usize>,
    noise: NoiseDist,
    edited: BTreeSet<(usize, usize)>,
}

impl Ctx<'_> {
    fn pool(&self, c: &Circuit, check_kind: bool) -> Vec<usize> {
        self.scope
            .select(c, self.depth, check_kind)
            .into_iter()
            .filter(|&i| !self.edited.contains(&key(&c.gates()[i])))
            .collect()
    }

    fn position_ok(&self, p: usize) -> bool {
        position_in_range(p, self.depth, self.scope.depth_range)
    }

    /// Moments an edit may land on; insertion may also open one trailing
    /// moment when the range reaches 100%.
    fn positions(&self, trailing: bool) -> Vec<usize> {
        let mut ps: Vec<usize> = (0..self.depth).filter(|&p| self.position_ok(p)).collect();
        if trailing
            && self.depth > 0
            && self.scope.depth_range.1 >= 100.0
            && !ps.contains(&self.depth)
        {
            ps.push(self.depth);
        }
        if self.depth == 0 && trailing {
            ps.push(0);
        }
        ps
    }

    fn tuples(&self, arity: usize) -> Vec<Vec<usize>> {
        fn rec(qs: &[usize], arity: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == arity {
                out.push(cur.clone());
                return;
            }
            for &q in qs {
                if !cur.contains(&q) {
                    cur.push(q);
                    rec(qs, arity, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(&self.qubits, arity, &mut Vec::new(), &mut out);
        out
    }

    fn commit(
        &mut self,
        c: &mut Circuit,
        before: Option<usize>,
        after: Option<Gate>,
    ) -> EditRecord {
        let before = before.map(|i| c.remove(i));
        if let Some(g) = &after {
            self.edited.insert(key(g));
            c.insert(g.clone());
        }
        EditRecord {
            op: self.op,
            before,
            after,
        }
    }
}

fn pick<T: Clone>(rng: &mut Rng, items: &[T]) -> Option<T> {
    (!items.is_empty()).then(|| items[rng.random_range(0..items.len())].clone())
}

fn step(c: &mut Circuit, ctx: &mut Ctx, rng: &mut Rng) -> Option<Vec<EditRecord>> {
    match ctx.op {
        OperatorKind::RGA => {
            let positions = ctx.positions(true);
            let placements = |kind: GateKind| -> Vec<(Vec<usize>, usize)> {
                let mut out = Vec::new();
                for w in ctx.tuples(kind.arity()) {
                    for &p in &positions {
                        if c.cells_free(&w, p, None) {
                            out.push((w.clone(), p));
                        }
                    }
                }
                out
            };
            let kinds: Vec<GateKind> = ctx
                .scope
                .allowed_kinds()
                .into_iter()
                .filter(|&k| k.arity() <= ctx.qubits.len())
                .collect();
            let mut kinds = kinds;
            while let Some(i) = (!kinds.is_empty()).then(|| rng.random_range(0..kinds.len())) {
                let kind = kinds.swap_remove(i);
                if let Some((wires, pos)) = pick(rng, &placements(kind)) {
                    let params: Vec<f64> = (0..kind.param_count())
                        .map(|_| ctx.noise.sample(rng))
                        .collect();
                    let g = Gate::new(kind, &wires, &params, pos);
                    return Some(vec![ctx.commit(c, None, Some(g))]);
                }
            }
            None
        }
        OperatorKind::RGD => {
            let i = pick(rng, &ctx.pool(c, true))?;
            let rec = ctx.commit(c, Some(i), None);
            Some(vec![rec])
        }
        OperatorKind::GR => {
            let cands: Vec<usize> = ctx
                .pool(c, true)
                .into_iter()
                .filter(|&i| !c.gates()[i].kind.equivalence_class().is_empty())
                .collect();
            let i = pick(rng, &cands)?;
            let mut g = c.gates()[i].clone();
            g.kind = pick(rng, &g.kind.equivalence_class())?;
            Some(vec![ctx.commit(c, Some(i), Some(g))])
        }
        OperatorKind::GPM => {
            let positions = ctx.positions(false);
            let moves: Vec<(usize, Vec<usize>)> = ctx
                .pool(c, true)
                .into_iter()
                .map(|i| {
                    let g = &c.gates()[i];
                    let to: Vec<usize> = positions
                        .iter()
                        .copied()
                        .filter(|&p| p != g.position && c.cells_free(&g.wires, p, Some(i)))
                        .collect();
                    (i, to)
                })
                .filter(|(_, to)| !to.is_empty())
                .collect();
            let (i, to) = pick(rng, &moves)?;
            let mut g = c.gates()[i].clone();
            g.position = pick(rng, &to)?;
            Some(vec![ctx.commit(c, Some(i), Some(g))])
        }
        OperatorKind::GSM => {
            let options: Vec<(usize, Vec<usize>)> = ctx
                .pool(c, true)
                .into_iter()
                .filter_map(|i| {
                    let g = &c.gates()[i];
                    if g.kind.uncontrolled().is_some() {
                        return Some((i, Vec::new()));
                    }
                    g.kind.controlled()?;
                    let controls: Vec<usize> = ctx
                        .qubits
                        .iter()
                        .copied()
                        .filter(|&q| !g.wires.contains(&q) && c.cells_free(&[q], g.position, None))
                        .collect();
                    (!controls.is_empty()).then_some((i, controls))
                })
                .collect();
            let (i, controls) = pick(rng, &options)?;
            let mut g = c.gates()[i].clone();
            if let Some(base) = g.kind.uncontrolled() {
                g.kind = base;
                g.wires.remove(0);
            } else {
                g.kind = g.kind.controlled()?;
                g.wires.insert(0, pick(rng, &controls)?);
            }
            Some(vec![ctx.commit(c, Some(i), Some(g))])
        }
        OperatorKind::GRT => {
            let options: Vec<(usize, Vec<Vec<usize>>)> = ctx
                .pool(c, true)
                .into_iter()
                .map(|i| {
                    let g = &c.gates()[i];
                    let to: Vec<Vec<usize>> = ctx
                        .tuples(g.wires.len())
                        .into_iter()
                        .filter(|w| *w != g.wires && c.cells_free(w, g.position, Some(i)))
                        .collect();
                    (i, to)
                })
                .filter(|(_, to)| !to.is_empty())
                .collect();
            let (i, to) = pick(rng, &options)?;
            let mut g = c.gates()[i].clone();
            g.wires = pick(rng, &to)?;
            Some(vec![ctx.commit(c, Some(i), Some(g))])
        }
        OperatorKind::PF => {
            let cands: Vec<usize> = ctx
                .pool(c, true)
                .into_iter()
                .filter(|&i| c.gates()[i].kind.is_parameterized())
                .collect();
            let i = pick(rng, &cands)?;
            let mut g = c.gates()[i].clone();
            let comp = rng.random_range(0..g.params.len());
            g.params[comp] += ctx.noise.sample(rng);
            Some(vec![ctx.commit(c, Some(i), Some(g))])
        }
        OperatorKind::PSF => {
            let nonzero = |g: &Gate| -> Vec<usize> {
                (0..g.params.len())
                    .filter(|&j| g.params[j].abs() >= 1e-9)
                    .collect()
            };
            let cands: Vec<usize> = ctx
                .pool(c, true)
                .into_iter()
                .filter(|&i| !nonzero(&c.gates()[i]).is_empty())
                .collect();
            let i = pick(rng, &cands)?;
            let mut g = c.gates()[i].clone();
            let comp = pick(rng, &nonzero(&g))?;
            g.params[comp] = -g.params[comp];
            Some(vec![ctx.commit(c, Some(i), Some(g))])
        }
        OperatorKind::PS => {
            let cands: Vec<usize> = ctx
                .pool(c, true)
                .into_iter()
                .filter(|&i| c.gates()[i].kind.is_parameterized())
                .collect();
            let shares = |a: GateKind, b: GateKind| {
                a.param_count() == b.param_count()
                    && FunctionCategory::ALL
                        .iter()
                        .any(|&cat| a.in_category(cat) && b.in_category(cat))
            };
            let mut pairs = Vec::new();
            for (x, &i) in cands.iter().enumerate() {
                for &j in &cands[x + 1..] {
                    if shares(c.gates()[i].kind, c.gates()[j].kind) {
                        pairs.push((i, j));
                    }
                }
            }
            let (i, j) = pick(rng, &pairs)?;
            let (mut a, mut b) = (c.gates()[i].clone(), c.gates()[j].clone());
            std::mem::swap(&mut a.params, &mut b.params);
            // i < j and reinsertion keeps canonical order, so i stays valid
            let r1 = ctx.commit(c, Some(j), Some(b));
            let r2 = ctx.commit(c, Some(i), Some(a));
            Some(vec![r1, r2])
        }
    }
}

/// Applies one operator to a circuit. Fails when the scope is empty or not a
/// single edit is possible.
pub fn apply_circuit(
    circuit: &Circuit,
    config: &MutationConfig,
    rng: &mut Rng,
) -> Result<(Circuit, Vec<EditRecord>, usize, usize)> {
    config.scope.validate(circuit.num_qubits)?;
    config.noise.validate()?;
    let population = scope_population(config.operator, &config.scope, circuit);
    if population == 0 {
        return Err(Error::EmptyScope);
    }
    let k = round_count(config.scope.gate_percentage, population);
    let mut ctx = Ctx {
        op: config.operator,
        scope: &config.scope,
        depth: circuit.depth(),
        qubits: config.scope.qubit_list(circuit.num_qubits),
        noise: config.noise,
        edited: BTreeSet::new(),
    };
    let mut c = circuit.clone();
    let mut diff = Vec::new();
    let mut done = 0;
    while done < k {
        match step(&mut c, &mut ctx, rng) {
            Some(recs) => {
                diff.extend(recs);
                done += 1;
            }
            None => break,
        }
    }
    if done == 0 {
        return Err(Error::Inapplicable {
            operator: config.operator.to_string(),
            reason: "no eligible target in scope".into(),
        });
    }
    if done < k {
        log::warn!("{}: only {done} of {k} edits possible", config.operator);
    }
    Ok((c, diff, k, done))
}

/// Mutates the model's circuit with the randomness of `config.seed`.
pub fn apply(original: &QnnModel, config: &MutationConfig) -> Result<Mutant> {
    let mut rng = seeded(config.seed);
    let (circuit, diff, requested, edits) = apply_circuit(original.circuit(), config, &mut rng)?;
    Ok(Mutant {
        id: format!("{}-{:016x}", config.operator, config.seed),
        model: original.with_circuit(circuit),
        diff,
        config: config.clone(),
        requested,
        edits,
    })
}

/// Replays a diff on `circuit`, requiring every removed gate to be present
/// and every inserted gate to land on free cells.
pub fn replay(circuit: &Circuit, diff: &[EditRecord]) -> Result<Circuit> {
    let mut c = circuit.clone();
    for (n, r) in diff.iter().enumerate() {
        if let Some(b) = &r.before {
            let i = c.find(b).ok_or_else(|| {
                Error::Replay(format!(
                    "edit {n}: gate {} at {} not found",
                    b.kind, b.position
                ))
            })?;
            c.remove(i);
        }
        if let Some(a) = &r.after {
            if !c.cells_free(&a.wires, a.position, None) {
                return Err(Error::Replay(format!(
                    "edit {n}: cells of {} at {} occupied",
                    a.kind, a.position
                )));
            }
            c.insert(a.clone());
        }
    }
    Ok(c)
}

pub fn diff_to_json(diff: &[EditRecord]) -> String {
    serde_json::to_string_pretty(diff).expect("diff serialization is infallible")
}

pub fn diff_from_json(text: &str) -> Result<Vec<EditRecord>> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn line(n: usize) -> Circuit {
        Circuit::from_gates(
            1,
            (0..n)
                .map(|p| Gate::new(GateKind::RX, &[0], &[0.1 * p as f64 + 0.1], p))
                .collect(),
        )
    }

    fn cfg(op: OperatorKind, p: f64) -> MutationConfig {
        MutationConfig::new(op, MutationScope::default().with_percentage(p))
    }

    #[test]
    fn target_counts() {
        let c = line(10);
        assert_eq!(
            target_count(&MutationScope::default().with_percentage(0.5), &c).unwrap(),
            5
        );
        assert_eq!(
            target_count(&MutationScope::default().with_percentage(0.01), &c).unwrap(),
            1
        );
        assert!(matches!(
            target_count(&MutationScope::default(), &Circuit::new(2)),
            Err(Error::EmptyScope)
        ));
    }

    #[test]
    fn gate_replace_keeps_wires_and_params() {
        let c = Circuit::from_gates(2, vec![Gate::new(GateKind::RX, &[1], &[0.7], 4)]);
        for seed in 0..20 {
            let (m, diff, _, _) =
                apply_circuit(&c, &cfg(OperatorKind::GR, 1.0), &mut seeded(seed)).unwrap();
            let g = &m.gates()[0];
            assert!([GateKind::RY, GateKind::RZ, GateKind::PhaseShift].contains(&g.kind));
            assert_eq!(
                (g.wires.as_slice(), g.params.as_slice(), g.position),
                (&[1usize][..], &[0.7][..], 4)
            );
            assert_eq!(diff.len(), 1);
        }
    }

    #[test]
    fn fuzz_shifts_by_sampled_noise() {
        let c = Circuit::from_gates(1, vec![Gate::new(GateKind::RZ, &[0], &[0.5], 0)]);
        let mut conf = cfg(OperatorKind::PF, 1.0);
        conf.noise = NoiseDist::Gaussian {
            mean: 0.039,
            std: 0.0,
        };
        let (m, _, _, _) = apply_circuit(&c, &conf, &mut seeded(0)).unwrap();
        assert_eq!(m.gates()[0].params[0], 0.5 + 0.039);
    }

    #[test]
    fn sign_flip() {
        let c = Circuit::from_gates(
            1,
            vec![
                Gate::new(GateKind::RZ, &[0], &[0.142], 0),
                Gate::new(GateKind::RY, &[0], &[0.0], 1),
            ],
        );
        for seed in 0..10 {
            let (m, _, _, done) =
                apply_circuit(&c, &cfg(OperatorKind::PSF, 1.0), &mut seeded(seed)).unwrap();
            assert_eq!(m.gates()[0].params[0], -0.142);
            assert_eq!(m.gates()[1].params[0], 0.0);
            assert_eq!(done, 1);
        }
        let zero = Circuit::from_gates(1, vec![Gate::new(GateKind::RY, &[0], &[0.0], 0)]);
        assert!(matches!(
            apply_circuit(&zero, &cfg(OperatorKind::PSF, 1.0), &mut seeded(0)),
            Err(Error::Inapplicable { .. })
        ));
    }

    #[test]
    fn swap_of_the_only_pair() {
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::new(GateKind::RX, &[0], &[0.3], 0),
                Gate::new(GateKind::RX, &[1], &[1.9], 2),
                Gate::new(GateKind::CNOT, &[0, 1], &[], 1),
            ],
        );
        let (m, diff, _, _) =
            apply_circuit(&c, &cfg(OperatorKind::PS, 0.1), &mut seeded(4)).unwrap();
        assert_eq!(m.gates()[0].params, vec![1.9]);
        assert_eq!(m.gates()[2].params, vec![0.3]);
        assert_eq!(replay(&c, &diff).unwrap(), m);
    }

    #[test]
    fn delete_then_replay() {
        let c = line(6);
        let (m, diff, _, _) =
            apply_circuit(&c, &cfg(OperatorKind::RGD, 0.5), &mut seeded(11)).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(replay(&c, &diff).unwrap(), m);
        let back = diff_from_json(&diff_to_json(&diff)).unwrap();
        assert_eq!(replay(&c, &back).unwrap(), m);
    }

    #[test]
    fn insertion_respects_kind_filter_and_trailing_moment() {
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::new(GateKind::CNOT, &[0, 1], &[], 0),
                Gate::new(GateKind::CNOT, &[1, 0], &[], 1),
            ],
        );
        let mut conf = cfg(OperatorKind::RGA, 1.0);
        conf.scope.gate_types = Some(crate::circuit::GateFilter::Function(
            FunctionCategory::Hadamard,
        ));
        for seed in 0..10 {
            let (m, diff, k, done) = apply_circuit(&c, &conf, &mut seeded(seed)).unwrap();
            assert_eq!((k, done), (2, 2));
            assert!(diff
                .iter()
                .all(|r| r.after.as_ref().unwrap().kind == GateKind::Hadamard));
            assert!(m.gates().iter().all(|g| g.position <= 2));
            assert!(m.is_valid());
        }
    }

    #[test]
    fn size_modify_changes_arity() {
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::new(GateKind::RY, &[1], &[0.4], 0),
                Gate::new(GateKind::CZ, &[0, 1], &[], 1),
            ],
        );
        for seed in 0..10 {
            let (m, diff, _, _) =
                apply_circuit(&c, &cfg(OperatorKind::GSM, 0.5), &mut seeded(seed)).unwrap();
            let r = &diff[0];
            let (b, a) = (r.before.as_ref().unwrap(), r.after.as_ref().unwrap());
            assert_eq!((a.wires.len() as i64 - b.wires.len() as i64).abs(), 1);
            assert_eq!(*a.wires.last().unwrap(), *b.wires.last().unwrap());
            assert!(m.is_valid());
        }
    }

    #[test]
    fn operator_names_round_trip() {
        for op in OperatorKind::ALL {
            assert_eq!(op.name().parse::<OperatorKind>().unwrap(), op);
            assert_eq!(
                op.level() == Level::Parameter,
                matches!(op, OperatorKind::PF | OperatorKind::PSF | OperatorKind::PS)
            );
        }
        assert!("XYZ".parse::<OperatorKind>().is_err());
    }
}
