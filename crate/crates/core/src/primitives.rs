//! The physical operations on a [`SparseState`]: region-addressed pulses,
//! collision-free state-dependent shifts, collisional sweeps, state
//! phases and projective emptying of the b-lattice.

use std::f64::consts::FRAC_1_SQRT_2;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{Axis, Region, Site, Spin};
use crate::state::{add_into, SparseState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PulseKind {
    /// Rotation about `(x - z)/√2`; at `π/2` this is the superposing pulse.
    Half,
    /// Rotation about `x`; at `π/2` this swaps |a⟩ and |b⟩.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Rotation angle in radians, `π/2` for both ideal kinds.
    pub angle: f64,
    pub region: Region,
    /// Optional per-atom angle overrides, indexed by atom id.
    pub per_atom: Option<Arc<[f64]>>,
}

impl PulseSpec {
    pub fn half(region: Region) -> Self {
        PulseSpec {
            kind: PulseKind::Half,
            angle: FRAC_PI_2,
            region,
            per_atom: None,
        }
    }

    pub fn full(region: Region) -> Self {
        PulseSpec {
            kind: PulseKind::Full,
            ..PulseSpec::half(region)
        }
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    fn angle_for(&self, id: usize) -> f64 {
        self.per_atom.as_ref().map_or(self.angle, |a| a[id])
    }
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

/// Single-atom unitary as `m[out][in]` over the basis `(a, b)`.
///
/// `Half`: `exp(-iη n·σ)`, `n = (1,0,-1)/√2`. `Full`: `exp(-iη X)`.
pub fn pulse_matrix(kind: PulseKind, angle: f64) -> [[Complex64; 2]; 2] {
    let c = snap(angle.cos());
    let s = snap(angle.sin());
    match kind {
        PulseKind::Half => {
            let t = s * FRAC_1_SQRT_2;
            [
                [Complex64::new(c, t), Complex64::new(0.0, -t)],
                [Complex64::new(0.0, -t), Complex64::new(c, -t)],
            ]
        }
        PulseKind::Full => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
    }
}

/// Number of present atoms inside `region`, per branch. Errors when the
/// count differs between branches: the pulse's global phase would then
/// become a relative one.
fn membership(state: &SparseState, region: &Region) -> Result<Vec<bool>> {
    let lat = state.lattice();
    let mut touched = vec![false; lat.n_atoms()];
    let mut count: Option<usize> = None;
    for key in state.map().keys() {
        let mut k = 0;
        for (id, t) in touched.iter_mut().enumerate() {
            if let Some(a) = lat.atom(key, id) {
                if region.contains(a.site) {
                    k += 1;
                    *t = true;
                }
            }
        }
        match count {
            None => count = Some(k),
            Some(c) if c != k => {
                return Err(Error::Choreography(format!(
                    "pulse region {region} holds {c} atoms in one branch and {k} in another"
                )))
            }
            _ => {}
        }
    }
    Ok(touched)
}

/// Applies the pulse to every present atom whose current site lies in the
/// region, branch by branch.
pub fn apply_pulse(state: &SparseState, spec: &PulseSpec) -> Result<SparseState> {
    let touched = membership(state, &spec.region)?;
    let lat = state.lattice().clone();
    let mut cur = state.clone();
    for (id, _) in touched.iter().enumerate().filter(|(_, t)| **t) {
        let m = pulse_matrix(spec.kind, spec.angle_for(id));
        let mut out = cur.new_map();
        for (key, amp) in std::mem::take(cur.map_mut()) {
            match lat.atom(&key, id) {
                Some(a) if spec.region.contains(a.site) => {
                    let col = a.spin.index();
                    for spin in [Spin::A, Spin::B] {
                        let c = m[spin.index()][col];
                        if c == Complex64::default() {
                            continue;
                        }
                        let mut k = key.clone();
                        lat.set_spin(&mut k, id, spin);
                        add_into(&mut out, k, amp * c);
                    }
                }
                _ => add_into(&mut out, key, amp),
            }
        }
        *cur.map_mut() = out;
    }
    Ok(cur)
}

/// Collision phase per wait, with `phi = delta_e * t_int`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionParams {
    pub phi: f64,
    pub delta_e: f64,
    pub t_int: f64,
}

impl CollisionParams {
    /// Ideal parameters: `π/2` per wait with unit interaction energy.
    pub fn ideal() -> Self {
        CollisionParams::from_phase(FRAC_PI_2, 1.0).expect("ideal parameters")
    }

    /// Derives `t_int` from the phase per wait and the on-site energy.
    pub fn from_phase(phi: f64, delta_e: f64) -> Result<Self> {
        if delta_e <= 0.0 || !delta_e.is_finite() {
            return Err(Error::Config("interaction energy must be positive".into()));
        }
        Ok(CollisionParams {
            phi,
            delta_e,
            t_int: phi / delta_e,
        })
    }

    pub fn new(phi: f64, delta_e: f64, t_int: f64) -> Result<Self> {
        if (phi - delta_e * t_int).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "collision phase {phi} differs from ΔE·t_int = {}",
                delta_e * t_int
            )));
        }
        Ok(CollisionParams { phi, delta_e, t_int })
    }
}

/// Which co-locations imprint phases.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum CollisionMode {
    /// Every co-located (a, b) pair.
    #[default]
    Physical,
    /// Only movers resting in `control` meeting stationary atoms in `target`.
    Selective { control: Region, target: Region },
}

/// One stretch of stepwise transport with a phase-imprinting wait after
/// each single-site displacement.
pub(crate) struct Segment<'a> {
    pub axis: Axis,
    pub steps: u32,
    /// Spin whose lattice moves. `B` except during echo return passes.
    pub carrier: Spin,
    /// Collision phase of each wait in the segment.
    pub phases: &'a [f64],
    pub selective: Option<(&'a Region, &'a Region)>,
    /// Displacement of movers from their rest sites at the segment start.
    pub rest_offset: Site,
    /// Phase per wait on every atom currently in |b⟩.
    pub transport_phase: f64,
}

pub(crate) fn advance(state: &SparseState, seg: &Segment<'_>) -> Result<SparseState> {
    debug_assert_eq!(seg.phases.len(), seg.steps as usize);
    let lat = state.lattice().clone();
    let world = lat.world();
    let n = lat.n_atoms();
    let mut out = state.new_map();
    let mut movers: Vec<(usize, Site)> = Vec::new();
    let mut stationary: FxHashMap<Site, usize> = FxHashMap::default();
    let steps = seg.steps as i32;
    for (key, amp) in state.map() {
        movers.clear();
        stationary.clear();
        for id in 0..n {
            if let Some(a) = lat.atom(key, id) {
                if a.spin == seg.carrier {
                    movers.push((id, a.site));
                } else {
                    stationary.insert(a.site, id);
                }
            }
        }
        let mut phase = 0.0;
        if !stationary.is_empty() {
            for &(_, start) in &movers {
                let rest = start.minus(seg.rest_offset);
                let from_control = seg.selective.is_none_or(|(c, _)| c.contains(rest));
                if !from_control {
                    continue;
                }
                for k in 1..=steps {
                    let p = start.step(seg.axis, k);
                    if stationary.contains_key(&p)
                        && seg.selective.is_none_or(|(_, t)| t.contains(p))
                    {
                        phase += seg.phases[(k - 1) as usize];
                    }
                }
            }
        }
        if seg.transport_phase != 0.0 {
            let n_b = match seg.carrier {
                Spin::B => movers.len(),
                Spin::A => stationary.len(),
            };
            phase += seg.transport_phase * (n_b as f64) * f64::from(steps);
        }
        let mut k = key.clone();
        for &(id, start) in &movers {
            let end = start.step(seg.axis, steps);
            if !world.contains(end) {
                return Err(Error::OutOfBounds(end));
            }
            lat.set_atom(&mut k, id, Some(crate::lattice::AtomState::new(end, seg.carrier)));
        }
        let a = if phase == 0.0 {
            *amp
        } else {
            amp * Complex64::from_polar(1.0, phase)
        };
        add_into(&mut out, k, a);
    }
    Ok(state.with_map(out))
}

/// Collision-free state-dependent shift: every |b⟩ atom moves `distance`
/// sites along `axis`, nothing else changes.
pub fn shift_free(state: &SparseState, axis: Axis, distance: u32) -> Result<SparseState> {
    let lat = state.lattice().clone();
    let world = lat.world();
    let mut out = state.new_map();
    let mut sites: Vec<Site> = Vec::new();
    for (key, amp) in state.map() {
        let mut k = key.clone();
        sites.clear();
        for id in 0..lat.n_atoms() {
            if let Some(mut a) = lat.atom(key, id) {
                if a.spin == Spin::B {
                    a.site = a.site.step(axis, distance as i32);
                    if !world.contains(a.site) {
                        return Err(Error::OutOfBounds(a.site));
                    }
                    lat.set_atom(&mut k, id, Some(a));
                }
                sites.push(a.site);
            }
        }
        sites.sort_unstable();
        if let Some(w) = sites.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Occupancy(w[0]));
        }
        add_into(&mut out, k, *amp);
    }
    Ok(state.with_map(out))
}

/// Moves the b-lattice `steps` sites, waiting after each displacement.
/// Every site holding one |a⟩ and one |b⟩ atom during a wait multiplies the
/// branch amplitude by `exp(i·phi)`.
pub fn sweep_forward(
    state: &SparseState,
    axis: Axis,
    steps: u32,
    params: &CollisionParams,
) -> Result<SparseState> {
    let phases = vec![params.phi; steps as usize];
    advance(
        state,
        &Segment {
            axis,
            steps,
            carrier: Spin::B,
            phases: &phases,
            selective: None,
            rest_offset: Site::new(0, 0, 0),
            transport_phase: 0.0,
        },
    )
}

/// Forward sweep followed by its reverse. Interior sites on a mover's path
/// see two waits, the turnaround site one.
pub fn sweep_there_and_back(
    state: &SparseState,
    axis: Axis,
    steps: u32,
    params: &CollisionParams,
) -> Result<SparseState> {
    sweep_there_and_back_with(state, axis, steps, params, &CollisionMode::Physical)
}

pub fn sweep_there_and_back_with(
    state: &SparseState,
    axis: Axis,
    steps: u32,
    params: &CollisionParams,
    mode: &CollisionMode,
) -> Result<SparseState> {
    let phases = vec![params.phi; steps as usize];
    let selective = match mode {
        CollisionMode::Physical => None,
        CollisionMode::Selective { control, target } => Some((control, target)),
    };
    let fwd = advance(
        state,
        &Segment {
            axis,
            steps,
            carrier: Spin::B,
            phases: &phases,
            selective,
            rest_offset: Site::new(0, 0, 0),
            transport_phase: 0.0,
        },
    )?;
    advance(
        &fwd,
        &Segment {
            axis: axis.reverse(),
            steps,
            carrier: Spin::B,
            phases: &phases,
            selective,
            rest_offset: Site::new(0, 0, 0).step(axis, steps as i32),
            transport_phase: 0.0,
        },
    )
}

/// Multiplies each branch by `exp(iθ)` per present atom in `region` with
/// the given spin.
pub fn apply_state_phase(state: &SparseState, region: &Region, spin: Spin, theta: f64) -> SparseState {
    let lat = state.lattice();
    let mut s = state.clone();
    for (key, amp) in s.map_mut().iter_mut() {
        let k = (0..lat.n_atoms())
            .filter_map(|id| lat.atom(key, id))
            .filter(|a| a.spin == spin && region.contains(a.site))
            .count();
        if k > 0 {
            *amp *= Complex64::from_polar(1.0, theta * k as f64);
        }
    }
    s
}

/// Phase on a single atom's `spin` component. Used by noise channels only.
pub fn apply_atom_phase(state: &SparseState, id: usize, spin: Spin, theta: f64) -> SparseState {
    let lat = state.lattice().clone();
    let mut s = state.clone();
    let c = Complex64::from_polar(1.0, theta);
    for (key, amp) in s.map_mut().iter_mut() {
        if lat.atom(key, id).is_some_and(|a| a.spin == spin) {
            *amp *= c;
        }
    }
    s
}

/// Projects out every branch with a |b⟩ atom inside `region`. The removed
/// probability is returned and added to the recorded loss; the survivor is
/// left unnormalized.
pub fn empty_b(state: &SparseState, region: &Region) -> (SparseState, f64) {
    let lat = state.lattice().clone();
    let mut s = state.clone();
    let mut lost = 0.0;
    s.map_mut().retain(|key, amp| {
        let hit = (0..lat.n_atoms())
            .filter_map(|id| lat.atom(key, id))
            .any(|a| a.spin == Spin::B && region.contains(a.site));
        if hit {
            lost += amp.norm_sqr();
        }
        !hit
    });
    s.add_recorded_loss(lost);
    (s, lost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BoxRegion, Configuration, Interval, Lattice, WorldBox};
    use std::f64::consts::PI;

    fn line_lattice(xs: &[i32]) -> Arc<Lattice> {
        Arc::new(
            Lattice::new(
                WorldBox::symmetric(16),
                xs.iter().map(|&x| Site::new(x, 0, 0)).collect(),
            )
            .unwrap(),
        )
    }

    fn state(lat: &Arc<Lattice>, spins: &[Spin]) -> SparseState {
        let c = Configuration::from_atoms(
            spins.len(),
            spins.iter().enumerate().map(|(i, s)| (i, lat.home(i), *s)),
        );
        SparseState::basis(lat.clone(), &c).unwrap()
    }

    fn sole_amplitude(s: &SparseState) -> Complex64 {
        assert_eq!(s.len(), 1);
        *s.iter().next().unwrap().1
    }

    /// Equal up to a global phase.
    fn assert_proportional(a: &SparseState, b: &SparseState) {
        let ov = a.inner_product(b);
        assert!((ov.norm() - 1.0).abs() < 1e-12, "overlap {ov}");
    }

    #[test]
    fn half_pulse_creates_superposition() {
        let lat = line_lattice(&[0]);
        let s = apply_pulse(&state(&lat, &[Spin::A]), &PulseSpec::half(Region::all())).unwrap();
        let want = SparseState::from_entries(
            lat.clone(),
            [
                (Configuration::from_atoms(1, [(0, Site::new(0, 0, 0), Spin::B)]), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (Configuration::from_atoms(1, [(0, Site::new(0, 0, 0), Spin::A)]), Complex64::new(-FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        assert_proportional(&s, &want);
        // global phase is -i
        let ov = want.inner_product(&s);
        assert!((ov - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn half_pulse_twice_is_identity_up_to_phase() {
        let lat = line_lattice(&[0]);
        let s0 = state(&lat, &[Spin::B]);
        let p = PulseSpec::half(Region::all());
        let s2 = apply_pulse(&apply_pulse(&s0, &p).unwrap(), &p).unwrap();
        assert_proportional(&s0, &s2);
    }

    #[test]
    fn zero_angle_pulse_is_identity() {
        let lat = line_lattice(&[0, 1]);
        let s0 = state(&lat, &[Spin::A, Spin::B]);
        for kind in [PulseKind::Half, PulseKind::Full] {
            let spec = PulseSpec { kind, angle: 0.0, region: Region::all(), per_atom: None };
            let s = apply_pulse(&s0, &spec).unwrap();
            assert_eq!(sole_amplitude(&s), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn full_pulse_inverts_population() {
        let lat = line_lattice(&[0]);
        let s = apply_pulse(&state(&lat, &[Spin::A]), &PulseSpec::full(Region::all())).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.entries()[0].0.get(0).unwrap().spin, Spin::B);
    }

    #[test]
    fn pulse_matrices_are_unitary() {
        for kind in [PulseKind::Half, PulseKind::Full] {
            for eta in [0.0, 0.3, FRAC_PI_2, 2.0, PI] {
                let m = pulse_matrix(kind, eta);
                for i in 0..2 {
                    for j in 0..2 {
                        let d: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((d - want).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn pulse_with_branch_dependent_membership_is_rejected() {
        let lat = line_lattice(&[0]);
        let s = SparseState::from_entries(
            lat.clone(),
            [
                (Configuration::from_atoms(1, [(0, Site::new(0, 0, 0), Spin::A)]), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (Configuration::from_atoms(1, [(0, Site::new(3, 0, 0), Spin::B)]), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        let region = Region::from(BoxRegion::new(Interval::below(1), Interval::ANY, Interval::ANY));
        assert!(matches!(apply_pulse(&s, &PulseSpec::half(region)), Err(Error::Choreography(_))));
    }

    #[test]
    fn shift_moves_only_b_atoms() {
        let lat = line_lattice(&[0, 5]);
        let s = shift_free(&state(&lat, &[Spin::B, Spin::A]), Axis::PlusX, 3).unwrap();
        let c = &s.entries()[0].0;
        assert_eq!(c.get(0).unwrap().site, Site::new(3, 0, 0));
        assert_eq!(c.get(1).unwrap().site, Site::new(5, 0, 0));
        assert_eq!(sole_amplitude(&s), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn shift_onto_occupied_site_fails() {
        let lat = line_lattice(&[0, 3]);
        let r = shift_free(&state(&lat, &[Spin::B, Spin::A]), Axis::PlusX, 3);
        assert!(matches!(r, Err(Error::Occupancy(s)) if s == Site::new(3, 0, 0)));
    }

    #[test]
    fn shift_out_of_world_fails() {
        let lat = line_lattice(&[0]);
        let r = shift_free(&state(&lat, &[Spin::B]), Axis::MinusX, 17);
        assert!(matches!(r, Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn sweep_forward_single_collision() {
        let lat = line_lattice(&[0, 2]);
        let s = sweep_forward(&state(&lat, &[Spin::B, Spin::A]), Axis::PlusX, 3, &CollisionParams::ideal()).unwrap();
        assert!((sole_amplitude(&s) - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn sweep_without_b_atoms_is_identity() {
        let lat = line_lattice(&[0, 2]);
        let s0 = state(&lat, &[Spin::A, Spin::A]);
        let s = sweep_forward(&s0, Axis::PlusX, 4, &CollisionParams::ideal()).unwrap();
        assert_eq!(s.entries(), s0.entries());
    }

    #[test]
    fn sweep_forward_past_two_targets() {
        // Two co-location waits, one per target: i * i.
        let lat = line_lattice(&[0, 1, 3]);
        let s = sweep_forward(&state(&lat, &[Spin::B, Spin::A, Spin::A]), Axis::PlusX, 4, &CollisionParams::ideal()).unwrap();
        assert!((sole_amplitude(&s) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn there_and_back_interior_target_gets_pi() {
        let lat = line_lattice(&[0, 2]);
        let s0 = state(&lat, &[Spin::B, Spin::A]);
        let s = sweep_there_and_back(&s0, Axis::PlusX, 3, &CollisionParams::ideal()).unwrap();
        assert!((sole_amplitude(&s) + 1.0).norm() < 1e-15);
        assert_eq!(s.entries()[0].0, s0.entries()[0].0);
    }

    #[test]
    fn there_and_back_turnaround_target_gets_one_wait() {
        let lat = line_lattice(&[0, 3]);
        let s = sweep_there_and_back(&state(&lat, &[Spin::B, Spin::A]), Axis::PlusX, 3, &CollisionParams::ideal()).unwrap();
        assert!((sole_amplitude(&s) - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn selective_mode_ignores_undeclared_pairs() {
        let lat = line_lattice(&[0, 1, 2]);
        let s0 = state(&lat, &[Spin::B, Spin::A, Spin::A]);
        let mode = CollisionMode::Selective {
            control: Region::from(BoxRegion::site(Site::new(0, 0, 0))),
            target: Region::from(BoxRegion::site(Site::new(2, 0, 0))),
        };
        let s = sweep_there_and_back_with(&s0, Axis::PlusX, 3, &CollisionParams::ideal(), &mode).unwrap();
        assert!((sole_amplitude(&s) + 1.0).norm() < 1e-15);
        let phys = sweep_there_and_back(&s0, Axis::PlusX, 3, &CollisionParams::ideal()).unwrap();
        assert!((sole_amplitude(&phys) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn state_phase_addresses_spin_and_region() {
        let lat = line_lattice(&[0, 4]);
        let dot = Region::from(BoxRegion::site(Site::new(4, 0, 0)));
        let b = apply_state_phase(&state(&lat, &[Spin::A, Spin::B]), &dot, Spin::B, FRAC_PI_2);
        assert!((sole_amplitude(&b) - Complex64::i()).norm() < 1e-15);
        let a = apply_state_phase(&state(&lat, &[Spin::A, Spin::A]), &dot, Spin::B, FRAC_PI_2);
        assert_eq!(sole_amplitude(&a), Complex64::new(1.0, 0.0));
        let outside = apply_state_phase(&state(&lat, &[Spin::B, Spin::A]), &dot, Spin::B, FRAC_PI_2);
        assert_eq!(sole_amplitude(&outside), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn emptying_records_born_loss() {
        let lat = line_lattice(&[0]);
        let (s, loss) = empty_b(&state(&lat, &[Spin::A]), &Region::all());
        assert_eq!((s.len(), loss), (1, 0.0));
        let (s, loss) = empty_b(&state(&lat, &[Spin::B]), &Region::all());
        assert_eq!((s.len(), loss), (0, 1.0));
        assert_eq!(s.recorded_loss(), 1.0);
        let sup = SparseState::from_entries(
            lat.clone(),
            [
                (Configuration::from_atoms(1, [(0, Site::new(0, 0, 0), Spin::A)]), Complex64::new(0.6, 0.0)),
                (Configuration::from_atoms(1, [(0, Site::new(0, 0, 0), Spin::B)]), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let (s, loss) = empty_b(&sup, &Region::all());
        assert!((loss - 0.64).abs() < 1e-15);
        assert!((s.norm_sqr() + s.recorded_loss() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collision_params_relation() {
        let p = CollisionParams::from_phase(FRAC_PI_2, 2.0).unwrap();
        assert!((p.phi - p.delta_e * p.t_int).abs() < 1e-12);
        assert!(CollisionParams::new(1.0, 2.0, 0.6).is_err());
        assert!(CollisionParams::new(1.0, 2.0, 0.5).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pulses_and_sweeps_preserve_norm(
                angles in proptest::collection::vec(-PI..PI, 4),
                phi in 0.01..PI,
                steps in 1u32..4,
                full in -PI..PI,
            ) {
                let lat = line_lattice(&[0, 2, 4, 6]);
                let s0 = state(&lat, &[Spin::A; 4]);
                let spec = PulseSpec { per_atom: Some(angles.into()), ..PulseSpec::half(Region::all()) };
                let s = apply_pulse(&s0, &spec).unwrap();
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                let p = CollisionParams::from_phase(phi, 1.0).unwrap();
                let s = sweep_there_and_back(&s, Axis::PlusX, steps, &p).unwrap();
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
                let s = apply_pulse(&s, &PulseSpec::full(Region::all()).with_angle(full)).unwrap();
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn opposite_angles_cancel(angle in -PI..PI, b in proptest::collection::vec(any::<bool>(), 3)) {
                let lat = line_lattice(&[0, 1, 2]);
                let spins: Vec<Spin> = b.iter().map(|&x| if x { Spin::B } else { Spin::A }).collect();
                let s0 = state(&lat, &spins);
                let fwd = apply_pulse(&s0, &PulseSpec::half(Region::all()).with_angle(angle)).unwrap();
                let back = apply_pulse(&fwd, &PulseSpec::half(Region::all()).with_angle(-angle)).unwrap();
                prop_assert!((back.inner_product(&s0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
}
