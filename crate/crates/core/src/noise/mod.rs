//! Error channels and their registry. Trajectory statistics live in
//! [`trajectory`].
//!
//! Each channel reads its own magnitude from a [`NoiseModel`] and may act
//! at up to four points of a trajectory: vacating atoms of the setup,
//! perturbing the schedule, scheduling per-wait events, and adjusting the
//! executor options.

pub mod trajectory;

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::choreography::Setup;
use crate::error::{Error, Result};
use crate::lattice::Spin;
use crate::primitives::apply_atom_phase;
use crate::schedule::{EventKind, ExecOptions, Instruction, ProtocolSchedule, WaitEvent};
use crate::state::SparseState;

pub use trajectory::{run_trajectories, split_seed, TrajectoryConfig, TrajectoryStats};

/// Magnitudes of every supported error source. All zero means noiseless.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Probability that a bulk, plane or line site starts empty.
    pub p_hole: f64,
    /// Relative over-rotation `ε` of every pulse.
    pub pulse_systematic: f64,
    /// Relative per-atom, per-pulse angle jitter.
    pub pulse_sigma: f64,
    /// Offset `δ` added to every wait's collision phase.
    pub collision_systematic: f64,
    /// Per-wait Gaussian jitter of the collision phase.
    pub collision_sigma: f64,
    /// Loss probability per atom per wait.
    pub loss_rate: f64,
    /// Probability per atom per wait of a random phase on |b⟩.
    pub dephasing_rate: f64,
    /// Deterministic phase per wait on every |b⟩ atom during transport.
    pub transport_phase: f64,
    /// Swap |a⟩ and |b⟩ at every sweep turnaround.
    pub echo: bool,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("p_hole", self.p_hole),
            ("loss_rate", self.loss_rate),
            ("dephasing_rate", self.dephasing_rate),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        for (name, v) in [("pulse_sigma", self.pulse_sigma), ("collision_sigma", self.collision_sigma)] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Channels with a nonzero magnitude, in registry order.
    pub fn active(&self, registry: &NoiseRegistry) -> Vec<Arc<dyn NoiseChannel>> {
        registry
            .channels()
            .iter()
            .filter(|c| c.magnitude(self) != 0.0)
            .cloned()
            .collect()
    }
}

/// Context passed to event schedulers.
#[derive(Clone, Copy, Debug)]
pub struct EventContext {
    pub n_atoms: usize,
    pub total_waits: u64,
}

/// An error source. Defaults do nothing, so a channel implements only the
/// hooks it needs.
pub trait NoiseChannel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn magnitude(&self, model: &NoiseModel) -> f64;
    fn set_magnitude(&self, model: &mut NoiseModel, value: f64);
    /// Whether two trajectories can differ.
    fn stochastic(&self) -> bool;

    /// Atom ids vacated before the protocol starts.
    fn holes(&self, _model: &NoiseModel, _setup: &Setup, _rng: &mut ChaCha8Rng) -> Vec<usize> {
        Vec::new()
    }

    fn perturb(&self, _model: &NoiseModel, _schedule: &mut ProtocolSchedule, _n_atoms: usize, _rng: &mut ChaCha8Rng) {}

    /// Events during the protocol. `seed` is private to this channel; per-atom
    /// streams are derived from it so that atom `k`'s draws do not depend on
    /// how many atoms exist.
    fn events(&self, _model: &NoiseModel, _ctx: &EventContext, _seed: u64) -> Vec<WaitEvent> {
        Vec::new()
    }

    fn configure(&self, _model: &NoiseModel, _options: &mut ExecOptions) {}
}

#[derive(Debug)]
pub struct Holes;
#[derive(Debug)]
pub struct PulseSystematic;
#[derive(Debug)]
pub struct PulseGaussian;
#[derive(Debug)]
pub struct CollisionSystematic;
#[derive(Debug)]
pub struct CollisionGaussian;
#[derive(Debug)]
pub struct Loss;
#[derive(Debug)]
pub struct Dephasing;
#[derive(Debug)]
pub struct Transport;

impl NoiseChannel for Holes {
    fn name(&self) -> &'static str {
        "holes"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.p_hole
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.p_hole = v;
    }
    fn stochastic(&self) -> bool {
        true
    }
    fn holes(&self, m: &NoiseModel, setup: &Setup, rng: &mut ChaCha8Rng) -> Vec<usize> {
        sample_holes(setup, m.p_hole, rng)
    }
}

impl NoiseChannel for PulseSystematic {
    fn name(&self) -> &'static str {
        "pulse_systematic"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.pulse_systematic
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.pulse_systematic = v;
    }
    fn stochastic(&self) -> bool {
        false
    }
    fn perturb(&self, m: &NoiseModel, schedule: &mut ProtocolSchedule, _n: usize, _rng: &mut ChaCha8Rng) {
        for ins in schedule.instructions_mut() {
            if let Instruction::Pulse(p) = ins {
                p.angle *= 1.0 + m.pulse_systematic;
                if let Some(per) = &p.per_atom {
                    p.per_atom = Some(per.iter().map(|a| a * (1.0 + m.pulse_systematic)).collect());
                }
            }
        }
    }
}

impl NoiseChannel for PulseGaussian {
    fn name(&self) -> &'static str {
        "pulse_gaussian"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.pulse_sigma
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.pulse_sigma = v;
    }
    fn stochastic(&self) -> bool {
        true
    }
    fn perturb(&self, m: &NoiseModel, schedule: &mut ProtocolSchedule, n: usize, rng: &mut ChaCha8Rng) {
        for ins in schedule.instructions_mut() {
            if let Instruction::Pulse(p) = ins {
                let angles: Arc<[f64]> = (0..n)
                    .map(|id| {
                        let base = p.per_atom.as_ref().map_or(p.angle, |a| a[id]);
                        let z: f64 = StandardNormal.sample(rng);
                        base * (1.0 + m.pulse_sigma * z)
                    })
                    .collect();
                p.per_atom = Some(angles);
            }
        }
    }
}

fn sweep_phases(schedule: &mut ProtocolSchedule, mut f: impl FnMut(f64) -> f64) {
    for ins in schedule.instructions_mut() {
        if let Instruction::Sweep {
            steps,
            phi,
            wait_phases,
            ..
        } = ins
        {
            let n = 2 * *steps as usize;
            let phases: Arc<[f64]> = match wait_phases {
                Some(p) => p.iter().map(|v| f(*v)).collect(),
                None => (0..n).map(|_| f(*phi)).collect(),
            };
            *wait_phases = Some(phases);
        }
    }
}

impl NoiseChannel for CollisionSystematic {
    fn name(&self) -> &'static str {
        "collision_systematic"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.collision_systematic
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.collision_systematic = v;
    }
    fn stochastic(&self) -> bool {
        false
    }
    fn perturb(&self, m: &NoiseModel, schedule: &mut ProtocolSchedule, _n: usize, _rng: &mut ChaCha8Rng) {
        sweep_phases(schedule, |phi| phi + m.collision_systematic);
    }
}

impl NoiseChannel for CollisionGaussian {
    fn name(&self) -> &'static str {
        "collision_gaussian"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.collision_sigma
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.collision_sigma = v;
    }
    fn stochastic(&self) -> bool {
        true
    }
    fn perturb(&self, m: &NoiseModel, schedule: &mut ProtocolSchedule, _n: usize, rng: &mut ChaCha8Rng) {
        sweep_phases(schedule, |phi| {
            let z: f64 = StandardNormal.sample(rng);
            phi + m.collision_sigma * z
        });
    }
}

/// Per-atom renewal process: waits between events are geometric with
/// success probability `rate`; at most `max_events` per atom.
fn renewal_events(
    rate: f64,
    ctx: &EventContext,
    seed: u64,
    max_events: usize,
    mut kind: impl FnMut(&mut ChaCha8Rng) -> EventKind,
) -> Vec<WaitEvent> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let geo = Geometric::new(rate).expect("rate checked to lie in (0, 1]");
    for atom in 0..ctx.n_atoms {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, &[atom as u64]));
        let mut wait = 0u64;
        for _ in 0..max_events {
            wait = wait.saturating_add(geo.sample(&mut rng) + 1);
            if wait > ctx.total_waits {
                break;
            }
            out.push(WaitEvent {
                wait,
                atom,
                kind: kind(&mut rng),
            });
        }
    }
    out
}

impl NoiseChannel for Loss {
    fn name(&self) -> &'static str {
        "loss"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.loss_rate
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.loss_rate = v;
    }
    fn stochastic(&self) -> bool {
        true
    }
    fn events(&self, m: &NoiseModel, ctx: &EventContext, seed: u64) -> Vec<WaitEvent> {
        renewal_events(m.loss_rate, ctx, seed, 1, |_| EventKind::Loss)
    }
}

impl NoiseChannel for Dephasing {
    fn name(&self) -> &'static str {
        "dephasing"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.dephasing_rate
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.dephasing_rate = v;
    }
    fn stochastic(&self) -> bool {
        true
    }
    fn events(&self, m: &NoiseModel, ctx: &EventContext, seed: u64) -> Vec<WaitEvent> {
        renewal_events(m.dephasing_rate, ctx, seed, usize::MAX, |rng| {
            EventKind::Dephase(rng.random::<f64>() * TAU)
        })
    }
}

impl NoiseChannel for Transport {
    fn name(&self) -> &'static str {
        "transport"
    }
    fn magnitude(&self, m: &NoiseModel) -> f64 {
        m.transport_phase
    }
    fn set_magnitude(&self, m: &mut NoiseModel, v: f64) {
        m.transport_phase = v;
    }
    fn stochastic(&self) -> bool {
        false
    }
    fn configure(&self, m: &NoiseModel, options: &mut ExecOptions) {
        options.transport_phase = m.transport_phase;
    }
}

/// Name-keyed set of noise channels.
pub struct NoiseRegistry {
    channels: Vec<Arc<dyn NoiseChannel>>,
}

impl NoiseRegistry {
    pub fn builtin() -> Self {
        NoiseRegistry {
            channels: vec![
                Arc::new(Holes),
                Arc::new(PulseSystematic),
                Arc::new(PulseGaussian),
                Arc::new(CollisionSystematic),
                Arc::new(CollisionGaussian),
                Arc::new(Loss),
                Arc::new(Dephasing),
                Arc::new(Transport),
            ],
        }
    }

    pub fn register(&mut self, channel: Arc<dyn NoiseChannel>) {
        self.channels.retain(|c| c.name() != channel.name());
        self.channels.push(channel);
    }

    pub fn channels(&self) -> &[Arc<dyn NoiseChannel>] {
        &self.channels
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn NoiseChannel>> {
        self.channels
            .iter()
            .find(|c| c.name() == name)
            .cloned()
            .ok_or_else(|| {
                let known: Vec<_> = self.channels.iter().map(|c| c.name()).collect();
                Error::Config(format!("unknown noise channel '{name}' (known: {})", known.join(", ")))
            })
    }
}

/// Vacates every bulk, plane and line atom independently with probability
/// `p`. Draws one uniform per atom in id order.
pub fn sample_holes(setup: &Setup, p: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let s = &setup.structures;
    let mut out = Vec::new();
    for id in 0..setup.lattice.n_atoms() {
        let u: f64 = rng.random();
        let home = setup.lattice.home(id);
        let eligible = s.bulk.contains(home) || s.plane.contains(home) || s.line.contains(home);
        if eligible && u < p {
            out.push(id);
        }
    }
    out
}

/// Removes the listed atoms from every branch.
pub fn remove_atoms(state: &SparseState, ids: &[usize]) -> SparseState {
    if ids.is_empty() {
        return state.clone();
    }
    let lat = state.lattice().clone();
    let mut out = state.new_map();
    for (key, amp) in state.map() {
        let mut k = key.clone();
        for &id in ids {
            lat.set_atom(&mut k, id, None);
        }
        crate::state::add_into(&mut out, k, *amp);
    }
    state.with_map(out)
}

/// Applies the model's schedule perturbations in registry order.
pub fn perturb_schedule(
    schedule: &ProtocolSchedule,
    model: &NoiseModel,
    n_atoms: usize,
    rng: &mut ChaCha8Rng,
) -> ProtocolSchedule {
    let mut s = schedule.clone();
    for c in model.active(&NoiseRegistry::builtin()) {
        c.perturb(model, &mut s, n_atoms, rng);
    }
    s
}

/// Loss of one atom as a trajectory jump: its spin is measured with Born
/// probabilities, the matching branches are kept and rescaled to the
/// pre-jump norm, and the atom is removed from them.
pub fn loss_event(state: &SparseState, atom: usize, rng: &mut ChaCha8Rng) -> Result<SparseState> {
    let lat = state.lattice().clone();
    let mut weight = [0.0f64; 2];
    let mut keys: Vec<_> = state.map().keys().collect();
    keys.sort_unstable();
    for k in &keys {
        let a = lat.atom(k, atom).ok_or(Error::AtomAbsent(atom))?;
        weight[a.spin.index()] += state.map()[*k].norm_sqr();
    }
    let total = weight[0] + weight[1];
    if total == 0.0 {
        return Ok(state.clone());
    }
    let u: f64 = rng.random::<f64>() * total;
    let outcome = if u < weight[0] { Spin::A } else { Spin::B };
    let scale = (total / weight[outcome.index()]).sqrt();
    let mut out = state.new_map();
    for k in keys {
        if lat.atom(k, atom).is_some_and(|a| a.spin == outcome) {
            let mut nk = k.clone();
            lat.set_atom(&mut nk, atom, None);
            crate::state::add_into(&mut out, nk, state.map()[k] * scale);
        }
    }
    Ok(state.with_map(out))
}

/// Stand-alone dephasing over `waits` idle waits: each present atom, at
/// each wait, receives a uniformly random |b⟩ phase with probability `rate`.
pub fn apply_dephasing(state: &SparseState, rate: f64, waits: u64, rng: &mut ChaCha8Rng) -> SparseState {
    let mut s = state.clone();
    if rate <= 0.0 {
        return s;
    }
    for _ in 0..waits {
        for id in 0..s.lattice().n_atoms() {
            if rng.random::<f64>() < rate {
                let theta = rng.random::<f64>() * TAU;
                s = apply_atom_phase(&s, id, Spin::B, theta);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choreography::{build_setup, SetupSpec};
    use crate::lattice::{Configuration, Lattice, Site, WorldBox};
    use crate::primitives::CollisionParams;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn two_atoms() -> Arc<Lattice> {
        Arc::new(Lattice::new(WorldBox::symmetric(4), vec![Site::new(0, 0, 0), Site::new(1, 0, 0)]).unwrap())
    }

    fn cfg(s0: Option<Spin>, s1: Option<Spin>) -> Configuration {
        let mut c = Configuration::vacant(2);
        let atoms = [(0, Site::new(0, 0, 0), s0), (1, Site::new(1, 0, 0), s1)];
        for (id, site, spin) in atoms {
            c.set(id, spin.map(|s| crate::lattice::AtomState::new(site, s)));
        }
        c
    }

    #[test]
    fn holes_extremes() {
        let (_, setup) = build_setup(&SetupSpec::ideal(2, 2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_holes(&setup, 0.0, &mut rng).is_empty());
        let all = sample_holes(&setup, 1.0, &mut rng);
        assert_eq!(all.len(), 14);
        assert!(!all.contains(&0), "the dot is never vacated");
    }

    #[test]
    fn hole_fraction_matches_probability() {
        let (_, setup) = build_setup(&SetupSpec::ideal(2, 2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = 0.2;
        let draws = 10_000;
        let vacated: usize = (0..draws).map(|_| sample_holes(&setup, p, &mut rng).len()).sum();
        let trials = (draws * 14) as f64;
        let frac = vacated as f64 / trials;
        let sigma = (p * (1.0 - p) / trials).sqrt();
        assert!((frac - p).abs() < 3.0 * sigma, "fraction {frac}");
    }

    #[test]
    fn zero_noise_leaves_schedule_unchanged() {
        let (_, setup) = build_setup(&SetupSpec::ideal(2, 1, 1)).unwrap();
        let s = setup.gate_schedule(&CollisionParams::ideal());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = perturb_schedule(&s, &NoiseModel::default(), 6, &mut rng);
        assert_eq!(p, s);
    }

    #[test]
    fn systematic_pulse_error_scales_angles() {
        let (_, setup) = build_setup(&SetupSpec::ideal(2, 1, 1)).unwrap();
        let s = setup.gate_schedule(&CollisionParams::ideal());
        let model = NoiseModel { pulse_systematic: 0.02, ..Default::default() };
        let p = perturb_schedule(&s, &model, 6, &mut ChaCha8Rng::seed_from_u64(0));
        for ins in p.instructions() {
            if let Instruction::Pulse(spec) = ins {
                assert!((spec.angle - FRAC_PI_2 * 1.02).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn systematic_collision_offset_shifts_every_wait() {
        let (_, setup) = build_setup(&SetupSpec::ideal(2, 1, 1)).unwrap();
        let params = CollisionParams::ideal();
        let s = setup.gate_schedule(&params);
        let model = NoiseModel { collision_systematic: 0.1, ..Default::default() };
        let p = perturb_schedule(&s, &model, 6, &mut ChaCha8Rng::seed_from_u64(0));
        for ins in p.instructions() {
            if let Instruction::Sweep { steps, wait_phases, .. } = ins {
                let w = wait_phases.as_ref().unwrap();
                assert_eq!(w.len(), 2 * *steps as usize);
                // there and back over one target: 2(φ + δ) = π + 2δ
                assert!((w[0] + w[1] - (std::f64::consts::PI + 0.2)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn loss_of_definite_atom() {
        let lat = two_atoms();
        let s = SparseState::basis(lat.clone(), &cfg(Some(Spin::A), Some(Spin::B))).unwrap();
        let out = loss_event(&s, 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.entries(), vec![(cfg(None, Some(Spin::B)), Complex64::new(1.0, 0.0))]);
    }

    #[test]
    fn loss_of_absent_atom_errors() {
        let lat = two_atoms();
        let s = SparseState::basis(lat, &cfg(None, Some(Spin::B))).unwrap();
        assert!(matches!(loss_event(&s, 0, &mut ChaCha8Rng::seed_from_u64(0)), Err(Error::AtomAbsent(0))));
    }

    #[test]
    fn loss_of_unentangled_atom_leaves_partner() {
        let lat = two_atoms();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let s = SparseState::from_entries(
            lat,
            [(cfg(Some(Spin::A), Some(Spin::A)), h), (cfg(Some(Spin::B), Some(Spin::A)), h)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let out = loss_event(&s, 0, &mut rng).unwrap();
            let e = out.entries();
            assert_eq!(e.len(), 1);
            assert_eq!(e[0].0, cfg(None, Some(Spin::A)));
            assert!((e[0].1.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn loss_of_entangled_partner_matches_reduced_state() {
        // (|aa⟩ + |bb⟩)/√2: measuring atom 0 leaves atom 1 in a definite spin
        // with probability 1/2 each, i.e. the reduced density matrix I/2.
        let lat = two_atoms();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let s = SparseState::from_entries(
            lat,
            [(cfg(Some(Spin::A), Some(Spin::A)), h), (cfg(Some(Spin::B), Some(Spin::B)), h)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let mut b = 0usize;
        for _ in 0..n {
            let out = loss_event(&s, 0, &mut rng).unwrap();
            let e = out.entries();
            assert_eq!(e.len(), 1);
            if e[0].0.get(1).unwrap().spin == Spin::B {
                b += 1;
            }
        }
        let frac = b as f64 / n as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn dephasing_at_zero_rate_is_identity() {
        let lat = two_atoms();
        let s = SparseState::basis(lat, &cfg(Some(Spin::B), Some(Spin::A))).unwrap();
        let out = apply_dephasing(&s, 0.0, 100, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.entries(), s.entries());
    }

    #[test]
    fn renewal_events_are_nested_across_sizes() {
        let small = EventContext { n_atoms: 5, total_waits: 40 };
        let large = EventContext { n_atoms: 9, total_waits: 80 };
        let m = NoiseModel { loss_rate: 0.05, ..Default::default() };
        let a = Loss.events(&m, &small, 99);
        let b = Loss.events(&m, &large, 99);
        for e in &a {
            assert!(b.contains(e));
        }
    }

    #[test]
    fn registry_lookup() {
        let r = NoiseRegistry::builtin();
        assert_eq!(r.get("loss").unwrap().name(), "loss");
        assert!(r.get("gremlins").is_err());
    }
}
