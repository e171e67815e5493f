//! Reference engine for cross-checking.
//!
//! Branches are plain [`Configuration`] values in a map; sweeps move atoms
//! one site at a time and compare every pair of atoms after each step.
//! Nothing here shares code with the packed engine beyond the
//! instruction and configuration types.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{AtomState, Axis, BoxRegion, Configuration, Interval, Lattice, Region, Site, Spin, WorldBox};
use crate::primitives::{PulseKind, PulseSpec};
use crate::schedule::{CollisionModeKind, ExecOptions, Instruction, ProtocolSchedule, Roles};
use crate::state::SparseState;

pub type Branches = HashMap<Configuration, Complex64>;

/// Result of an oracle run.
#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub branches: Branches,
    pub recorded_loss: f64,
}

fn add(map: &mut Branches, c: Configuration, a: Complex64) {
    *map.entry(c).or_default() += a;
}

/// Drops branches below `tol` in modulus, as the engine does after pulses.
fn pruned(mut b: Branches, tol: f64) -> Branches {
    b.retain(|_, a| a.norm() >= tol && *a != Complex64::default());
    b
}

/// `exp(-iη n·σ)` with `n = (1,0,-1)/√2` for HALF and `n = x` for FULL,
/// written out from the Pauli matrices. `cos η` and `sin η` below 1e-15
/// count as zero, so ideal pulses do not spawn ghost branches.
fn single_atom_unitary(kind: PulseKind, eta: f64) -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    let x = [[zero, one], [one, zero]];
    let z = [[one, zero], [zero, -one]];
    let n: [[Complex64; 2]; 2] = match kind {
        PulseKind::Half => {
            let mut m = [[zero; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = (x[i][j] - z[i][j]) * FRAC_1_SQRT_2;
                }
            }
            m
        }
        PulseKind::Full => x,
    };
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    let (c, s) = (snap(eta.cos()), snap(eta.sin()));
    let mut u = [[zero; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { one } else { zero };
            u[i][j] = id * c - Complex64::i() * s * n[i][j];
        }
    }
    u
}

fn spin_index(s: Spin) -> usize {
    match s {
        Spin::A => 0,
        Spin::B => 1,
    }
}

fn pulse(branches: Branches, spec: &PulseSpec, n_atoms: usize) -> Result<Branches> {
    let mut count = None;
    for c in branches.keys() {
        let k = c.present().filter(|(_, a)| spec.region.contains(a.site)).count();
        if *count.get_or_insert(k) != k {
            return Err(Error::Choreography(format!("pulse region {} membership varies", spec.region)));
        }
    }
    let mut cur = branches;
    for id in 0..n_atoms {
        let eta = spec.per_atom.as_ref().map_or(spec.angle, |a| a[id]);
        let u = single_atom_unitary(spec.kind, eta);
        let mut next = Branches::new();
        for (c, amp) in cur {
            match c.get(id) {
                Some(atom) if spec.region.contains(atom.site) => {
                    for out in [Spin::A, Spin::B] {
                        let mut c2 = c.clone();
                        c2.set(id, Some(AtomState::new(atom.site, out)));
                        add(&mut next, c2, amp * u[spin_index(out)][spin_index(atom.spin)]);
                    }
                }
                _ => add(&mut next, c, amp),
            }
        }
        next.retain(|_, a| *a != Complex64::default());
        cur = next;
    }
    Ok(cur)
}

fn step_site(s: Site, axis: Axis) -> Site {
    let (dx, dy, dz) = axis.unit();
    Site::new(s.x + dx, s.y + dy, s.z + dz)
}

fn shift(branches: Branches, axis: Axis, distance: u32, world: WorldBox) -> Result<Branches> {
    let mut out = Branches::new();
    for (c, amp) in branches {
        let mut c2 = c.clone();
        for (id, a) in c.present() {
            if a.spin == Spin::B {
                let mut s = a.site;
                for _ in 0..distance {
                    s = step_site(s, axis);
                }
                if !world.contains(s) {
                    return Err(Error::OutOfBounds(s));
                }
                c2.set(id, Some(AtomState::new(s, Spin::B)));
            }
        }
        let atoms: Vec<(usize, AtomState)> = c2.present().collect();
        for (i, a) in &atoms {
            for (j, b) in &atoms {
                if i < j && a.site == b.site {
                    return Err(Error::Occupancy(a.site));
                }
            }
        }
        add(&mut out, c2, amp);
    }
    Ok(out)
}

struct Pass<'a> {
    axis: Axis,
    steps: u32,
    carrier: Spin,
    phases: &'a [f64],
    roles: Option<&'a Roles>,
    transport: f64,
    world: WorldBox,
}

/// `back`: distance the carrier atoms already travelled from their rest sites.
fn sweep_pass(branches: Branches, p: &Pass<'_>, back: u32) -> Result<Branches> {
    let mut out = Branches::new();
    for (c, amp) in branches {
        let mut rest = c.clone();
        for (id, a) in c.present() {
            if a.spin == p.carrier {
                let mut s = a.site;
                for _ in 0..back {
                    s = step_site(s, p.axis);
                }
                rest.set(id, Some(AtomState::new(s, p.carrier)));
            }
        }
        let mut cur = c.clone();
        let mut phase = 0.0;
        for k in 0..p.steps as usize {
            for (id, a) in c.present() {
                if a.spin == p.carrier {
                    let s = step_site(cur.get(id).expect("present").site, p.axis);
                    cur.set(id, Some(AtomState::new(s, p.carrier)));
                }
            }
            let atoms: Vec<(usize, AtomState)> = cur.present().collect();
            let n_b = atoms.iter().filter(|(_, a)| a.spin == Spin::B).count();
            phase += p.transport * n_b as f64;
            for (i, mover) in &atoms {
                if mover.spin != p.carrier {
                    continue;
                }
                for (_, other) in &atoms {
                    if other.spin == p.carrier || other.site != mover.site {
                        continue;
                    }
                    let counts = match p.roles {
                        None => true,
                        Some(r) => {
                            let home = rest.get(*i).expect("present").site;
                            r.control.contains(home) && r.target.contains(other.site)
                        }
                    };
                    if counts {
                        phase += p.phases[k];
                    }
                }
            }
        }
        for (_, a) in cur.present() {
            if !p.world.contains(a.site) {
                return Err(Error::OutOfBounds(a.site));
            }
        }
        add(&mut out, cur, amp * Complex64::from_polar(1.0, phase));
    }
    Ok(out)
}

/// Runs `schedule` on `initial` without any encoding, pruning or fast
/// paths.
pub fn run(
    initial: &[(Configuration, Complex64)],
    schedule: &ProtocolSchedule,
    options: &ExecOptions,
    world: WorldBox,
) -> Result<OracleOutput> {
    let n_atoms = initial.first().map_or(0, |(c, _)| c.len());
    let mut branches = Branches::new();
    for (c, a) in initial {
        add(&mut branches, c.clone(), *a);
    }
    let mut loss = 0.0;
    for ins in schedule.instructions() {
        branches = match ins {
            Instruction::Pulse(spec) => pruned(pulse(branches, spec, n_atoms)?, options.prune_tol),
            Instruction::Shift { axis, distance, .. } => shift(branches, *axis, *distance, world)?,
            Instruction::Sweep {
                axis,
                steps,
                phi,
                wait_phases,
                roles,
            } => {
                let n = *steps as usize;
                let phases: Vec<f64> = wait_phases.as_ref().map_or_else(|| vec![*phi; 2 * n], |w| w.to_vec());
                let roles = match options.collision_mode {
                    CollisionModeKind::Physical => None,
                    CollisionModeKind::Selective => Some(roles.clone().unwrap_or(Roles {
                        control: Region::empty(),
                        target: Region::empty(),
                    })),
                };
                let there = sweep_pass(
                    branches,
                    &Pass {
                        axis: *axis,
                        steps: *steps,
                        carrier: Spin::B,
                        phases: &phases[..n],
                        roles: roles.as_ref(),
                        transport: options.transport_phase,
                        world,
                    },
                    0,
                )?;
                let swap = PulseSpec::full(Region::all());
                let (there, carrier) = if options.echo {
                    (pruned(pulse(there, &swap, n_atoms)?, options.prune_tol), Spin::A)
                } else {
                    (there, Spin::B)
                };
                let back = sweep_pass(
                    there,
                    &Pass {
                        axis: axis.reverse(),
                        steps: *steps,
                        carrier,
                        phases: &phases[n..],
                        roles: roles.as_ref(),
                        transport: options.transport_phase,
                        world,
                    },
                    *steps,
                )?;
                if options.echo {
                    pruned(pulse(back, &swap, n_atoms)?, options.prune_tol)
                } else {
                    back
                }
            }
            Instruction::StatePhase { region, spin, angle } => branches
                .into_iter()
                .map(|(c, a)| {
                    let k = c.present().filter(|(_, x)| x.spin == *spin && region.contains(x.site)).count();
                    (c, a * Complex64::from_polar(1.0, angle * k as f64))
                })
                .collect(),
            Instruction::Empty { region } => {
                let mut kept = Branches::new();
                for (c, a) in branches {
                    if c.present().any(|(_, x)| x.spin == Spin::B && region.contains(x.site)) {
                        loss += a.norm_sqr();
                    } else {
                        add(&mut kept, c, a);
                    }
                }
                kept
            }
            Instruction::Checkpoint(_) => branches,
        };
        branches.retain(|_, a| *a != Complex64::default());
    }
    branches.retain(|_, a| *a != Complex64::default());
    Ok(OracleOutput {
        branches,
        recorded_loss: loss,
    })
}

/// Largest amplitude difference between an engine state and oracle output.
pub fn max_deviation(engine: &SparseState, oracle: &OracleOutput) -> f64 {
    let e: HashMap<Configuration, Complex64> = engine.entries().into_iter().collect();
    let mut worst: f64 = 0.0;
    for (c, a) in &oracle.branches {
        let b = e.get(c).copied().unwrap_or_default();
        worst = worst.max((a - b).norm());
    }
    for (c, b) in &e {
        if !oracle.branches.contains_key(c) {
            worst = worst.max(b.norm());
        }
    }
    worst
}

/// A randomized small system and schedule.
#[derive(Clone, Debug)]
pub struct RandomCase {
    pub lattice: std::sync::Arc<Lattice>,
    pub initial: Vec<(Configuration, Complex64)>,
    pub schedule: ProtocolSchedule,
    pub options: ExecOptions,
}

fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    match rng.random_range(0..3) {
        0 => Interval::ANY,
        1 => Interval::at_least(rng.random_range(-1..4)),
        _ => {
            let lo = rng.random_range(-1..3);
            Interval::range(lo, lo + rng.random_range(1..4))
        }
    }
}

fn random_region(rng: &mut ChaCha8Rng) -> Region {
    let boxes = (0..rng.random_range(1..3))
        .map(|_| BoxRegion::new(random_interval(rng), random_interval(rng), random_interval(rng)))
        .collect();
    Region::from_boxes(boxes)
}

const AXES: [Axis; 6] = [Axis::PlusX, Axis::MinusX, Axis::PlusY, Axis::MinusY, Axis::PlusZ, Axis::MinusZ];

/// Up to 12 atoms on a 4x4x4 block, a superposition of up to four spin
/// patterns, and 2 to 7 random instructions.
pub fn random_case(rng: &mut ChaCha8Rng) -> RandomCase {
    let n_atoms = rng.random_range(2..=12);
    let mut sites: Vec<Site> = (0..4)
        .flat_map(|x| (0..4).flat_map(move |y| (0..4).map(move |z| Site::new(x, y, z))))
        .collect();
    sites.shuffle(rng);
    // Pack atoms along one line now and then so sweeps actually collide.
    if rng.random_bool(0.5) {
        let (y, z) = (rng.random_range(0..4), rng.random_range(0..4));
        for (i, x) in (0..4).enumerate() {
            let s = Site::new(x, y, z);
            let j = sites.iter().position(|t| *t == s).expect("site in block");
            sites.swap(i, j);
        }
    }
    let homes: Vec<Site> = sites[..n_atoms].to_vec();
    let lattice = std::sync::Arc::new(Lattice::new(WorldBox::symmetric(16), homes.clone()).expect("small world"));
    let n_terms = rng.random_range(1..=4);
    let mut initial: Vec<(Configuration, Complex64)> = Vec::new();
    for _ in 0..n_terms {
        let c = Configuration::from_atoms(
            n_atoms,
            homes.iter().enumerate().map(|(i, s)| (i, *s, if rng.random_bool(0.4) { Spin::B } else { Spin::A })),
        );
        let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        initial.push((c, a));
    }
    let norm = initial.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
    for (_, a) in &mut initial {
        *a /= norm;
    }
    let mut schedule = ProtocolSchedule::new();
    for _ in 0..rng.random_range(2..=7) {
        let ins = match rng.random_range(0..10) {
            0..=2 => {
                let kind = if rng.random_bool(0.7) { PulseKind::Half } else { PulseKind::Full };
                let mut p = PulseSpec::half(random_region(rng)).with_angle(rng.random_range(0.0..std::f64::consts::PI));
                p.kind = kind;
                Instruction::Pulse(p)
            }
            3..=6 => Instruction::Sweep {
                axis: *AXES.choose(rng).expect("nonempty"),
                steps: rng.random_range(1..=5),
                phi: rng.random_range(-3.0..3.0),
                wait_phases: None,
                roles: Some(Roles {
                    control: random_region(rng),
                    target: random_region(rng),
                }),
            },
            7 => Instruction::Shift {
                axis: *AXES.choose(rng).expect("nonempty"),
                distance: rng.random_range(1..=3),
                permanent: false,
            },
            8 => Instruction::StatePhase {
                region: random_region(rng),
                spin: if rng.random_bool(0.5) { Spin::A } else { Spin::B },
                angle: rng.random_range(-3.0..3.0),
            },
            _ => Instruction::Empty { region: random_region(rng) },
        };
        schedule.push(ins);
    }
    let options = ExecOptions {
        collision_mode: if rng.random_bool(0.3) { CollisionModeKind::Selective } else { CollisionModeKind::Physical },
        prune_tol: 0.0,
        transport_phase: if rng.random_bool(0.2) { rng.random_range(-0.5..0.5) } else { 0.0 },
        echo: rng.random_bool(0.2),
    };
    RandomCase {
        lattice,
        initial,
        schedule,
        options,
    }
}

/// Outcome of one engine-versus-oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub enum CaseOutcome {
    /// Both ran; largest amplitude difference.
    Agree(f64),
    /// Both rejected the schedule.
    BothRejected,
    /// Exactly one side rejected, or the recorded losses differ.
    Mismatch(String),
}

pub fn check_case(case: &RandomCase) -> CaseOutcome {
    let engine = SparseState::from_entries(case.lattice.clone(), case.initial.iter().cloned())
        .and_then(|s| crate::schedule::execute(&s, &case.schedule, &case.options));
    let oracle = run(&case.initial, &case.schedule, &case.options, case.lattice.world());
    match (engine, oracle) {
        (Ok(e), Ok(o)) => {
            let d = max_deviation(&e, &o);
            if (e.recorded_loss() - o.recorded_loss).abs() > 1e-12 {
                CaseOutcome::Mismatch(format!("recorded loss {} vs {}", e.recorded_loss(), o.recorded_loss))
            } else {
                CaseOutcome::Agree(d)
            }
        }
        (Err(_), Err(_)) => CaseOutcome::BothRejected,
        (Ok(_), Err(e)) => CaseOutcome::Mismatch(format!("only the oracle rejected: {e}")),
        (Err(e), Ok(_)) => CaseOutcome::Mismatch(format!("only the engine rejected: {e}")),
    }
}
