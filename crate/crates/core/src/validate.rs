//! Geometric validation of schedules by an instrumented dry run.
//!
//! The schedule is executed on a probe state. Before every sweep, each
//! branch's mover paths are traced and every (mover, stationary atom) pair
//! that meets is classified by where the two atoms rest: control into
//! target is intended, anything within one structure is an internal phase
//! that cancels under reversal, and everything else is reported.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::choreography::{Placement, Setup};
use crate::collective::{collective_basis, CollectiveMode};
use crate::error::{Error, Result};
use crate::lattice::{Region, Site, Spin};
use crate::primitives::CollisionParams;
use crate::schedule::{ExecOptions, Executor, Instruction, ProtocolSchedule};
use crate::state::SparseState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    /// Two declared regions intersect.
    RegionOverlap,
    /// A pulse region holds a branch-dependent number of atoms.
    MembershipVaries,
    /// A separated target component meets a target atom.
    SeparatedReentry,
    /// A stationary atom sits exactly at a mover's turnaround.
    TurnaroundOccupied,
    /// A mover meets an atom of another structure outside its role.
    UnintendedCollision,
    /// A control atom never reaches a target on its line.
    ShortSweep,
    /// A shift puts two atoms on one site.
    Occupancy,
    OutOfBounds,
    /// Non-permanent shifts do not cancel by the end of the schedule.
    NonzeroNetShift,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::RegionOverlap => "region overlap",
            ViolationKind::MembershipVaries => "pulse membership varies",
            ViolationKind::SeparatedReentry => "separated components re-enter ensemble",
            ViolationKind::TurnaroundOccupied => "turnaround site occupied",
            ViolationKind::UnintendedCollision => "unintended collision",
            ViolationKind::ShortSweep => "sweep too short",
            ViolationKind::Occupancy => "double occupancy",
            ViolationKind::OutOfBounds => "outside world box",
            ViolationKind::NonzeroNetShift => "nonzero net shift",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Offending instruction, if the violation is tied to one.
    pub index: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub violations: Vec<Violation>,
    /// Instructions executed before the run stopped (all, if it did not).
    pub executed: usize,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, index: Option<usize>, kind: ViolationKind, detail: String) {
        if !self.violations.iter().any(|v| v.index == index && v.kind == kind) {
            self.violations.push(Violation { index, kind, detail });
        }
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass ({} instructions)", self.executed);
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            match v.index {
                Some(i) => writeln!(f, "  [{i}] {}: {}", v.kind, v.detail)?,
                None => writeln!(f, "  [-] {}: {}", v.kind, v.detail)?,
            }
        }
        Ok(())
    }
}

/// Named regions; collisions inside one of them count as internal.
#[derive(Clone, Debug, Default)]
pub struct ValidationContext {
    pub structures: Vec<(String, Region)>,
}

impl ValidationContext {
    fn structure_of(&self, s: Site) -> Option<usize> {
        self.structures.iter().position(|(_, r)| r.contains(s))
    }
}

/// Dry-runs `schedule` on `probe` and collects violations.
pub fn validate_schedule(probe: &SparseState, schedule: &ProtocolSchedule, ctx: &ValidationContext) -> Diagnostics {
    let mut d = Diagnostics::default();
    for (i, (na, ra)) in ctx.structures.iter().enumerate() {
        for (nb, rb) in &ctx.structures[i + 1..] {
            if ra.intersects(rb) {
                d.push(None, ViolationKind::RegionOverlap, format!("{na} and {nb} intersect"));
            }
        }
    }
    let options = ExecOptions::default();
    let mut exec = Executor::new(&options);
    let mut state = probe.clone();
    let mut pending = Site::new(0, 0, 0);
    for (idx, ins) in schedule.instructions().iter().enumerate() {
        if let Instruction::Sweep { axis, steps, roles, .. } = ins {
            if let Some(r) = roles {
                if r.control.intersects(&r.target) {
                    d.push(Some(idx), ViolationKind::RegionOverlap, format!("control {} meets target {}", r.control, r.target));
                }
            }
            trace_sweep(&state, idx, *axis, *steps, roles.as_ref().map(|r| (&r.control, &r.target)), pending, ctx, &mut d);
        }
        match exec.step(&state, ins) {
            Ok(s) => state = s,
            Err(e) => {
                let separating = matches!(ins, Instruction::Shift { permanent: false, .. });
                let kind = match e {
                    Error::Occupancy(_) if separating => ViolationKind::SeparatedReentry,
                    Error::Choreography(_) => ViolationKind::MembershipVaries,
                    Error::Occupancy(_) => ViolationKind::Occupancy,
                    Error::OutOfBounds(_) => ViolationKind::OutOfBounds,
                    _ => ViolationKind::UnintendedCollision,
                };
                d.push(Some(idx), kind, e.to_string());
                d.executed = idx;
                return d;
            }
        }
        if let Instruction::Shift { axis, distance, permanent: false } = ins {
            pending = pending.step(*axis, *distance as i32);
        }
    }
    if pending != Site::new(0, 0, 0) {
        d.push(None, ViolationKind::NonzeroNetShift, format!("b-lattice ends displaced by {pending}"));
    }
    d.executed = schedule.len();
    d
}

#[allow(clippy::too_many_arguments)]
fn trace_sweep(
    state: &SparseState,
    idx: usize,
    axis: crate::lattice::Axis,
    steps: u32,
    roles: Option<(&Region, &Region)>,
    pending: Site,
    ctx: &ValidationContext,
    d: &mut Diagnostics,
) {
    let lat = state.lattice();
    let world = lat.world();
    let mut stationary: FxHashMap<Site, usize> = FxHashMap::default();
    let mut seen: BTreeSet<(Site, Site, u32)> = BTreeSet::new();
    let mut keys: Vec<_> = state.iter().map(|(k, _)| k).collect();
    keys.sort_unstable();
    for key in keys {
        stationary.clear();
        let mut movers = Vec::new();
        for id in 0..lat.n_atoms() {
            if let Some(a) = lat.atom(key, id) {
                match a.spin {
                    Spin::B => movers.push(a.site),
                    Spin::A => {
                        stationary.insert(a.site, id);
                    }
                }
            }
        }
        for start in movers {
            let end = start.step(axis, steps as i32);
            if !world.contains(end) {
                d.push(Some(idx), ViolationKind::OutOfBounds, format!("mover from {start} reaches {end}"));
                continue;
            }
            let mut hits: FxHashMap<Site, u32> = FxHashMap::default();
            let forward = (1..=steps as i32).map(|k| start.step(axis, k));
            let back = (0..steps as i32).rev().map(|k| start.step(axis, k));
            for p in forward.chain(back) {
                if stationary.contains_key(&p) {
                    *hits.entry(p).or_default() += 1;
                }
            }
            let rest = start.minus(pending);
            if let Some((_, target)) = roles {
                if pending != Site::new(0, 0, 0) && target.contains(rest) && target.contains(start) {
                    d.push(
                        Some(idx),
                        ViolationKind::SeparatedReentry,
                        format!("component from {rest} is still inside the target at {start}"),
                    );
                }
            }
            for (site, count) in hits {
                if seen.insert((rest, site, count)) {
                    classify(idx, rest, site, count, roles, ctx, d);
                }
            }
        }
    }
}

fn classify(
    idx: usize,
    mover_rest: Site,
    site: Site,
    count: u32,
    roles: Option<(&Region, &Region)>,
    ctx: &ValidationContext,
    d: &mut Diagnostics,
) {
    if let Some((control, target)) = roles {
        if control.contains(mover_rest) && target.contains(site) {
            if count == 1 {
                d.push(
                    Some(idx),
                    ViolationKind::TurnaroundOccupied,
                    format!("mover from {mover_rest} turns around on target {site}"),
                );
            }
            return;
        }
        if target.contains(mover_rest) && target.contains(site) {
            d.push(
                Some(idx),
                ViolationKind::SeparatedReentry,
                format!("target component from {mover_rest} meets target atom at {site}"),
            );
            return;
        }
    }
    match (ctx.structure_of(mover_rest), ctx.structure_of(site)) {
        (Some(a), Some(b)) if a == b => {
            if count == 1 {
                d.push(
                    Some(idx),
                    ViolationKind::TurnaroundOccupied,
                    format!("mover from {mover_rest} turns around on {site}"),
                );
            }
        }
        _ => d.push(
            Some(idx),
            ViolationKind::UnintendedCollision,
            format!("mover from {mover_rest} meets atom at {site}"),
        ),
    }
}

fn occupied_sites(state: &SparseState) -> BTreeSet<Site> {
    let lat = state.lattice();
    state
        .iter()
        .flat_map(|(k, _)| (0..lat.n_atoms()).filter_map(|id| lat.atom(k, id)).map(|a| a.site))
        .collect()
}

/// Probe for gate validation: `(|0⟩ + |1⟩)/√2` with `|1⟩` uniform over
/// the storage sites.
fn gate_probe(setup_state: &SparseState, setup: &Setup) -> Result<SparseState> {
    let mode = CollectiveMode::from_profile(&Default::default(), &setup.storage, setup_state)?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut probe = SparseState::empty(setup_state.lattice().clone());
    probe.add_scaled(setup_state, h)?;
    probe.add_scaled(&collective_basis(setup_state, &mode, 1)?, h)?;
    Ok(probe)
}

/// Validates the gate schedule of `setup` on a probe built from
/// `setup_state` (the setup as it stands before the gate).
pub fn validate_gate(setup_state: &SparseState, setup: &Setup, params: &CollisionParams) -> Result<Diagnostics> {
    let ctx = ValidationContext {
        structures: setup
            .structures
            .named()
            .iter()
            .map(|(n, r)| (n.to_string(), (*r).clone()))
            .collect(),
    };
    let mut d = validate_schedule(&gate_probe(setup_state, setup)?, &setup.gate_schedule(params), &ctx);
    // Every target on a control atom's line must lie strictly inside its reach.
    let occupied = occupied_sites(setup_state);
    let schedule = setup.gate_schedule(params);
    for stage in &setup.stages {
        let idx = schedule.instructions().iter().position(|ins| {
            matches!(ins, Instruction::Sweep { roles: Some(r), axis, .. } if *axis == stage.axis && r.control == stage.control)
        });
        for &c in occupied.iter().filter(|s| stage.control.contains(**s)) {
            for &t in occupied.iter().filter(|s| stage.target.contains(**s)) {
                if let Some((ax, dist)) = crate::lattice::Axis::between(c, t) {
                    if ax == stage.axis && dist >= stage.length as i32 {
                        d.push(
                            idx,
                            ViolationKind::ShortSweep,
                            format!("{}: {c} to {t} is {dist} sites, sweep is {}", stage.name, stage.length),
                        );
                    }
                }
            }
        }
    }
    Ok(d)
}

/// Validates the initialization schedule on a seed spread uniformly over
/// the storage region.
pub fn validate_init(setup_state: &SparseState, setup: &Setup, params: &CollisionParams) -> Result<Diagnostics> {
    if setup.spec.placement != Placement::Faithful {
        return Err(Error::Setup("initialization needs faithful placement".into()));
    }
    let mode = CollectiveMode::from_profile(&Default::default(), &setup.storage, setup_state)?;
    let probe = collective_basis(setup_state, &mode, 1)?;
    let ctx = ValidationContext {
        structures: vec![("bulk".into(), setup.structures.bulk.clone())],
    };
    Ok(validate_schedule(&probe, &setup.init_schedule(params), &ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choreography::{build_setup, InitOffsets, SetupSpec};
    use crate::lattice::{BoxRegion, Interval};

    #[test]
    fn canonical_gate_passes() {
        for (lx, ly, lz) in [(2, 1, 1), (3, 2, 2), (4, 2, 2)] {
            let (s, setup) = build_setup(&SetupSpec::ideal(lx, ly, lz)).unwrap();
            let d = validate_gate(&s, &setup, &CollisionParams::ideal()).unwrap();
            assert!(d.passed(), "{d}");
        }
    }

    #[test]
    fn canonical_init_passes() {
        let (s, setup) = build_setup(&SetupSpec::faithful(4, 2, 2)).unwrap();
        let d = validate_init(&s, &setup, &CollisionParams::ideal()).unwrap();
        assert!(d.passed(), "{d}");
    }

    #[test]
    fn short_separation_reenters() {
        let mut spec = SetupSpec::faithful(4, 2, 2);
        let mut o = InitOffsets::canonical(4, 2, 2);
        o.sep_z = 1;
        spec.offsets = Some(o);
        let (s, setup) = build_setup(&spec).unwrap();
        let d = validate_init(&s, &setup, &CollisionParams::ideal()).unwrap();
        assert!(d.has(ViolationKind::SeparatedReentry), "{d}");
    }

    #[test]
    fn overlapping_structures_are_reported() {
        let (s, mut setup) = build_setup(&SetupSpec::ideal(3, 2, 2)).unwrap();
        setup.structures.plane = setup.structures.plane.clone().union(&Region::from(BoxRegion::new(
            Interval::exactly(4),
            Interval::new(None, None),
            Interval::below(2),
        )));
        let d = validate_gate(&s, &setup, &CollisionParams::ideal()).unwrap();
        assert!(d.has(ViolationKind::RegionOverlap), "{d}");
    }

    #[test]
    fn short_gate_sweep_is_reported() {
        let (s, mut setup) = build_setup(&SetupSpec::ideal(3, 2, 2)).unwrap();
        setup.stages[0].length = 4;
        let d = validate_gate(&s, &setup, &CollisionParams::ideal()).unwrap();
        assert!(d.has(ViolationKind::ShortSweep) || d.has(ViolationKind::TurnaroundOccupied), "{d}");
    }

    #[test]
    fn unmatched_shift_is_reported() {
        let (s, _) = build_setup(&SetupSpec::ideal(2, 1, 1)).unwrap();
        let mut sched = ProtocolSchedule::new();
        sched.push(Instruction::Shift { axis: crate::lattice::Axis::PlusZ, distance: 2, permanent: false });
        let d = validate_schedule(&s, &sched, &ValidationContext::default());
        assert!(d.has(ViolationKind::NonzeroNetShift));
    }
}
