//! Setup geometry and the protocol choreographies built from primitives:
//! the parity-mapping procedure, the creation procedure, initialization
//! of the plane/line/dot structures and the gate itself.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    AtomState, Axis, BoxRegion, Configuration, Interval, Lattice, Region, Site, Spin, WorldBox,
};
use crate::primitives::{CollisionParams, PulseSpec};
use crate::schedule::{execute, ExecOptions, Instruction, ProtocolSchedule, Roles};
use crate::state::SparseState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Plane, line and dot placed directly at their canonical sites.
    Ideal,
    /// Only the bulk exists; the structures are carved by initialization.
    Faithful,
}

/// Offsets (in sites) of the initialization choreography.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitOffsets {
    /// Lift of the seed atom above the bulk.
    pub extract_z: u32,
    /// Separation of target |b⟩ parts while the line is created.
    pub sep_z: u32,
    pub sweep_z: u32,
    /// Displacement of the line to the -y side of the bulk.
    pub extract_y: u32,
    pub sep_y: u32,
    pub sweep_y: u32,
    /// Displacement of the finished plane away from the bulk.
    pub plane_sep: u32,
}

impl InitOffsets {
    pub fn canonical(lx: i32, ly: i32, lz: i32) -> Self {
        let (lx, ly, lz) = (lx as u32, ly as u32, lz as u32);
        InitOffsets {
            extract_z: 2 * lz + 2,
            sep_z: lz + 1,
            sweep_z: 2 * lz + 1,
            extract_y: 2 * ly + 2,
            sep_y: ly + 1,
            sweep_y: 2 * ly + 1,
            plane_sep: lx + 1,
        }
    }

    fn total(&self) -> i32 {
        (self.extract_z
            + self.sep_z
            + self.sweep_z
            + self.extract_y
            + self.sep_y
            + self.sweep_y
            + self.plane_sep) as i32
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetupSpec {
    pub lx: i32,
    pub ly: i32,
    pub lz: i32,
    pub placement: Placement,
    /// Name of the initialization choreography (see [`ChoreographyRegistry`]).
    pub choreography: String,
    pub offsets: Option<InitOffsets>,
    /// Region that stores the photonic excitation (the bulk if absent).
    pub storage: Option<Region>,
    /// Bulk site of the excitation that seeds faithful initialization.
    pub init_seed: Site,
}

impl SetupSpec {
    pub fn ideal(lx: i32, ly: i32, lz: i32) -> Self {
        SetupSpec {
            lx,
            ly,
            lz,
            placement: Placement::Ideal,
            choreography: Repositioned.name().into(),
            offsets: None,
            storage: None,
            init_seed: Site::new(0, 0, 0),
        }
    }

    pub fn faithful(lx: i32, ly: i32, lz: i32) -> Self {
        SetupSpec {
            placement: Placement::Faithful,
            ..SetupSpec::ideal(lx, ly, lz)
        }
    }

    pub fn bulk_count(&self) -> usize {
        (self.lx * self.ly * self.lz) as usize
    }

    /// Atom count of the completed setup: bulk, plane, line and dot.
    pub fn n_total(&self) -> usize {
        self.bulk_count() + (self.ly * self.lz + self.lz + 1) as usize
    }

    pub fn offsets(&self) -> InitOffsets {
        self.offsets
            .unwrap_or_else(|| InitOffsets::canonical(self.lx, self.ly, self.lz))
    }
}

/// Initialization choreography variant.
pub trait InitChoreography: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    /// Transverse `+x` step taken before each creation stage, so the line
    /// and the plane are drawn from columns untouched by earlier carving.
    fn reposition(&self) -> u32;
}

/// Default: steps one site along `+x` before each creation stage. The
/// structures come out complete; the seed must sit at `x <= Lx - 3`.
#[derive(Debug, Clone, Copy)]
pub struct Repositioned;

impl InitChoreography for Repositioned {
    fn name(&self) -> &'static str {
        "repositioned"
    }
    fn reposition(&self) -> u32 {
        1
    }
}

/// The unmodified sequence: the line is drawn from the seed's own column
/// (missing the seed site) and the plane from its own slab.
#[derive(Debug, Clone, Copy)]
pub struct Literal;

impl InitChoreography for Literal {
    fn name(&self) -> &'static str {
        "literal"
    }
    fn reposition(&self) -> u32 {
        0
    }
}

/// Name-keyed registry of initialization choreographies.
pub struct ChoreographyRegistry {
    entries: Vec<Arc<dyn InitChoreography>>,
}

impl ChoreographyRegistry {
    pub fn builtin() -> Self {
        ChoreographyRegistry {
            entries: vec![Arc::new(Repositioned), Arc::new(Literal)],
        }
    }

    pub fn register(&mut self, c: Arc<dyn InitChoreography>) {
        self.entries.retain(|e| e.name() != c.name());
        self.entries.push(c);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn InitChoreography>> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("unknown choreography '{name}'")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Structures {
    pub bulk: Region,
    pub plane: Region,
    pub line: Region,
    pub dot: Region,
}

impl Structures {
    pub fn named(&self) -> [(&'static str, &Region); 4] {
        [
            ("bulk", &self.bulk),
            ("plane", &self.plane),
            ("line", &self.line),
            ("dot", &self.dot),
        ]
    }

    /// Structure whose region contains `site`.
    pub fn classify(&self, site: Site) -> Option<&'static str> {
        self.named()
            .into_iter()
            .find(|(_, r)| r.contains(site))
            .map(|(n, _)| n)
    }

    /// Everything outside the bulk: plane, line and dot.
    pub fn registers(&self) -> Region {
        self.plane.clone().union(&self.line).union(&self.dot)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageName {
    BulkToPlane,
    PlaneToLine,
    LineToDot,
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageName::BulkToPlane => "bulk->plane",
            StageName::PlaneToLine => "plane->line",
            StageName::LineToDot => "line->dot",
        })
    }
}

/// One parity-mapping stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageSpec {
    pub name: StageName,
    pub control: Region,
    pub target: Region,
    pub axis: Axis,
    pub length: u32,
}

/// One creation stage: control atoms sit on the `toward_control` side of
/// the target ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct CreateStage {
    pub label: String,
    pub control: Region,
    pub target: Region,
    pub toward_control: Axis,
    pub separation: u32,
    pub sweep: u32,
}

#[derive(Clone, Debug)]
pub struct Setup {
    pub spec: SetupSpec,
    pub lattice: Arc<Lattice>,
    pub structures: Structures,
    pub stages: [StageSpec; 3],
    /// Allowed support of the seed excitation (faithful) or of stored
    /// photons (ideal).
    pub storage: Region,
    pub offsets: InitOffsets,
    pub choreography: Arc<dyn InitChoreography>,
}

fn bulk_region(lx: i32, ly: i32, lz: i32) -> Region {
    Region::from(BoxRegion::new(
        Interval::range(0, lx),
        Interval::range(0, ly),
        Interval::range(0, lz),
    ))
}

fn bulk_sites(lx: i32, ly: i32, lz: i32) -> impl Iterator<Item = Site> {
    (0..lx).flat_map(move |x| (0..ly).flat_map(move |y| (0..lz).map(move |z| Site::new(x, y, z))))
}

/// Builds the lattice, the structure regions and the initial state: all
/// atoms in |a⟩, with plane/line/dot present only in ideal placement.
pub fn build_setup(spec: &SetupSpec) -> Result<(SparseState, Setup)> {
    let (lx, ly, lz) = (spec.lx, spec.ly, spec.lz);
    if lx <= 0 || ly <= 0 || lz <= 0 {
        return Err(Error::Setup(format!(
            "bulk dimensions must be positive, got {lx}x{ly}x{lz}"
        )));
    }
    let choreography = ChoreographyRegistry::builtin().get(&spec.choreography)?;
    let offsets = spec.offsets();
    let r = choreography.reposition() as i32;
    let bulk = bulk_region(lx, ly, lz);

    let mut homes = Vec::with_capacity(spec.n_total());
    let (structures, lengths, storage) = match spec.placement {
        Placement::Ideal => {
            let px = lx + 1;
            homes.push(Site::new(px, -2, lz + 1));
            homes.extend((0..lz).map(|z| Site::new(px, -2, z)));
            homes.extend((0..ly).flat_map(|y| (0..lz).map(move |z| Site::new(px, y, z))));
            let structures = Structures {
                bulk: bulk.clone(),
                plane: BoxRegion::new(Interval::exactly(px), Interval::at_least(0), Interval::below(lz)).into(),
                line: BoxRegion::new(Interval::exactly(px), Interval::below(0), Interval::below(lz)).into(),
                dot: BoxRegion::new(Interval::exactly(px), Interval::below(0), Interval::at_least(lz)).into(),
            };
            let storage = spec.storage.clone().unwrap_or_else(|| bulk.clone());
            (structures, [lx + 2, ly + 2, lz + 2], storage)
        }
        Placement::Faithful => {
            let x_max = lx - 1 - 2 * r;
            if x_max < 0 {
                return Err(Error::Setup(format!(
                    "choreography '{}' needs Lx >= {}",
                    choreography.name(),
                    1 + 2 * r
                )));
            }
            let default_storage: Region = BoxRegion::new(
                Interval::range(0, x_max + 1),
                Interval::range(0, ly),
                Interval::range(0, lz),
            )
            .into();
            let storage = spec.storage.clone().unwrap_or(default_storage);
            let seeds: Vec<Site> = bulk_sites(lx, ly, lz).filter(|s| storage.contains(*s)).collect();
            if seeds.is_empty() {
                return Err(Error::Setup("storage region holds no bulk site".into()));
            }
            if let Some(s) = seeds.iter().find(|s| s.x > x_max) {
                return Err(Error::Setup(format!(
                    "storage site {s} lets repositioning leave the bulk (x must be <= {x_max})"
                )));
            }
            let sx = seeds.iter().map(|s| s.x).max().unwrap_or(0);
            let sy = seeds.iter().map(|s| s.y).min().unwrap_or(0);
            let sz = seeds.iter().map(|s| s.z).max().unwrap_or(0);
            let structures = Structures {
                bulk: bulk.clone(),
                plane: BoxRegion::new(Interval::at_least(lx), Interval::at_least(0), Interval::below(lz)).into(),
                line: BoxRegion::new(Interval::at_least(lx), Interval::below(0), Interval::below(lz)).into(),
                dot: BoxRegion::new(Interval::at_least(lx), Interval::below(0), Interval::at_least(lz)).into(),
            };
            let lengths = [
                sx + 2 * r + offsets.plane_sep as i32 + 1,
                ly - sy + offsets.extract_y as i32,
                sz + offsets.extract_z as i32 + 1,
            ];
            (structures, lengths, storage)
        }
    };
    homes.extend(bulk_sites(lx, ly, lz));

    let half = 2 * offsets.total() + 4 * (lx + ly + lz) + 16;
    let lattice = Arc::new(Lattice::new(WorldBox::symmetric(half), homes)?);
    let stages = [
        StageSpec {
            name: StageName::BulkToPlane,
            control: structures.bulk.clone(),
            target: structures.plane.clone(),
            axis: Axis::PlusX,
            length: lengths[0] as u32,
        },
        StageSpec {
            name: StageName::PlaneToLine,
            control: structures.plane.clone(),
            target: structures.line.clone(),
            axis: Axis::MinusY,
            length: lengths[1] as u32,
        },
        StageSpec {
            name: StageName::LineToDot,
            control: structures.line.clone(),
            target: structures.dot.clone(),
            axis: Axis::PlusZ,
            length: lengths[2] as u32,
        },
    ];
    let n = lattice.n_atoms();
    let config = Configuration::from_atoms(n, (0..n).map(|i| (i, lattice.home(i), Spin::A)));
    let state = SparseState::basis(lattice.clone(), &config)?;
    let setup = Setup {
        spec: spec.clone(),
        lattice,
        structures,
        stages,
        storage,
        offsets,
        choreography,
    };
    Ok((state, setup))
}

impl Setup {
    /// Atom id of a bulk site.
    pub fn bulk_atom(&self, site: Site) -> Option<usize> {
        let (lx, ly, lz) = (self.spec.lx, self.spec.ly, self.spec.lz);
        if !self.structures.bulk.contains(site) {
            return None;
        }
        let offset = self.lattice.n_atoms() - self.spec.bulk_count();
        Some(offset + ((site.x * ly + site.y) * lz + site.z) as usize)
            .filter(|_| site.x < lx)
    }

    pub fn stage(&self, name: StageName) -> &StageSpec {
        self.stages.iter().find(|s| s.name == name).expect("all stages exist")
    }

    pub fn gate_schedule(&self, params: &CollisionParams) -> ProtocolSchedule {
        gate_schedule(&self.stages, &self.structures.dot, params)
    }

    pub fn init_schedule(&self, params: &CollisionParams) -> ProtocolSchedule {
        init_schedule(self, params)
    }
}

/// Pulse on the target, there-and-back sweep of the control's |b⟩ atoms,
/// pulse on the target. Targets hit by an odd number of controls end in
/// |b⟩.
pub fn map_schedule(stage: &StageSpec, params: &CollisionParams) -> ProtocolSchedule {
    let mut s = ProtocolSchedule::new();
    s.push(Instruction::Checkpoint(stage.name.to_string()))
        .push(Instruction::Pulse(PulseSpec::half(stage.target.clone())))
        .push(Instruction::Sweep {
            axis: stage.axis,
            steps: stage.length,
            phi: params.phi,
            wait_phases: None,
            roles: Some(Roles {
                control: stage.control.clone(),
                target: stage.target.clone(),
            }),
        })
        .push(Instruction::Pulse(PulseSpec::half(stage.target.clone())));
    s
}

/// Pulse, separate, sweep, un-separate, pulse.
pub fn create_schedule(stage: &CreateStage, params: &CollisionParams) -> ProtocolSchedule {
    let toward = stage.toward_control;
    let mut s = ProtocolSchedule::new();
    s.push(Instruction::Checkpoint(stage.label.clone()))
        .push(Instruction::Pulse(PulseSpec::half(stage.target.clone())))
        .push(Instruction::Shift {
            axis: toward.reverse(),
            distance: stage.separation,
            permanent: false,
        })
        .push(Instruction::Sweep {
            axis: toward.reverse(),
            steps: stage.sweep,
            phi: params.phi,
            wait_phases: None,
            roles: Some(Roles {
                control: stage.control.clone(),
                target: stage.target.clone(),
            }),
        })
        .push(Instruction::Shift {
            axis: toward,
            distance: stage.separation,
            permanent: false,
        })
        .push(Instruction::Pulse(PulseSpec::half(stage.target.clone())));
    s
}

/// Forward mapping through all stages, the `π/2` dot phase, then the
/// stages again in reverse order.
pub fn gate_schedule(stages: &[StageSpec; 3], dot: &Region, params: &CollisionParams) -> ProtocolSchedule {
    let mut s = ProtocolSchedule::new();
    for st in stages {
        s.extend(map_schedule(st, params));
    }
    s.push(Instruction::Checkpoint("dot phase".into()))
        .push(Instruction::StatePhase {
            region: dot.clone(),
            spin: Spin::B,
            angle: FRAC_PI_2,
        });
    for st in stages.iter().rev() {
        s.extend(map_schedule(st, params));
    }
    s
}

fn init_schedule(setup: &Setup, params: &CollisionParams) -> ProtocolSchedule {
    let (lx, lz) = (setup.spec.lx, setup.spec.lz);
    let o = setup.offsets;
    let r = setup.choreography.reposition();
    let bulk = setup.structures.bulk.clone();
    let permanent = |axis, distance| Instruction::Shift {
        axis,
        distance,
        permanent: true,
    };
    let mut s = ProtocolSchedule::new();
    s.push(Instruction::Checkpoint("extract seed".into()))
        .push(permanent(Axis::PlusZ, o.extract_z));
    if r > 0 {
        s.push(permanent(Axis::PlusX, r));
    }
    s.extend(create_schedule(
        &CreateStage {
            label: "create line".into(),
            control: BoxRegion::new(Interval::ANY, Interval::ANY, Interval::at_least(lz)).into(),
            target: bulk.clone(),
            toward_control: Axis::PlusZ,
            separation: o.sep_z,
            sweep: o.sweep_z,
        },
        params,
    ));
    s.push(Instruction::Checkpoint("separate line".into()))
        .push(permanent(Axis::MinusY, o.extract_y));
    if r > 0 {
        s.push(permanent(Axis::PlusX, r));
    }
    s.extend(create_schedule(
        &CreateStage {
            label: "create plane".into(),
            control: BoxRegion::new(Interval::ANY, Interval::below(0), Interval::ANY).into(),
            target: bulk,
            toward_control: Axis::MinusY,
            separation: o.sep_y,
            sweep: o.sweep_y,
        },
        params,
    ));
    let registers: Region = BoxRegion::new(Interval::at_least(lx), Interval::ANY, Interval::ANY).into();
    s.push(Instruction::Checkpoint("separate plane".into()))
        .push(permanent(Axis::PlusX, o.plane_sep))
        .push(Instruction::Checkpoint("reset registers".into()))
        .push(Instruction::Pulse(PulseSpec::full(registers.clone())))
        .push(Instruction::Empty { region: registers });
    s
}

/// Runs one parity-mapping stage.
pub fn procedure_map(
    state: &SparseState,
    stage: &StageSpec,
    params: &CollisionParams,
    options: &ExecOptions,
) -> Result<SparseState> {
    execute(state, &map_schedule(stage, params), options)
}

/// Runs one creation stage.
pub fn procedure_create(
    state: &SparseState,
    stage: &CreateStage,
    params: &CollisionParams,
    options: &ExecOptions,
) -> Result<SparseState> {
    execute(state, &create_schedule(stage, params), options)
}

/// Carves dot, line and plane out of a bulk holding one excitation and
/// resets them to |a⟩. Recorded loss comes from the final emptying step.
pub fn initialize_faithful(
    state: &SparseState,
    setup: &Setup,
    params: &CollisionParams,
    options: &ExecOptions,
) -> Result<SparseState> {
    if setup.spec.placement != Placement::Faithful {
        return Err(Error::Setup("initialization needs faithful placement".into()));
    }
    execute(state, &setup.init_schedule(params), options)
}

/// Builds the setup and, for faithful placement, carves plane, line and
/// dot out of a bulk seeded with one excitation at `spec.init_seed`. The
/// returned state is the one the gate acts on.
pub fn prepared_setup(spec: &SetupSpec, params: &CollisionParams) -> Result<(SparseState, Setup)> {
    let (state, setup) = build_setup(spec)?;
    if spec.placement == Placement::Ideal {
        return Ok((state, setup));
    }
    let seed = spec.init_seed;
    let id = setup
        .bulk_atom(seed)
        .ok_or_else(|| Error::Setup(format!("initialization seed {seed} is not a bulk site")))?;
    let (mut config, _) = state.entries().swap_remove(0);
    config.set(id, Some(AtomState::new(seed, Spin::B)));
    let seeded = SparseState::basis(state.lattice().clone(), &config)?;
    let out = initialize_faithful(&seeded, &setup, params, &ExecOptions::default())?;
    Ok((out, setup))
}

/// Runs the full gate protocol.
pub fn run_gate(
    state: &SparseState,
    setup: &Setup,
    params: &CollisionParams,
    options: &ExecOptions,
) -> Result<SparseState> {
    execute(state, &setup.gate_schedule(params), options)
}

/// Two-atom CNOT: pulse the target, sweep the control across it and back,
/// pulse the target again. The target region is a single site, which is
/// acceptable for this standalone demonstration only.
pub fn cnot_demo(
    state: &SparseState,
    control: Site,
    target: Site,
    params: &CollisionParams,
) -> Result<SparseState> {
    let (axis, distance) = Axis::between(control, target).ok_or_else(|| {
        Error::Choreography(format!(
            "control {control} and target {target} are not on a common lattice line"
        ))
    })?;
    let region: Region = BoxRegion::site(target).into();
    let mut s = ProtocolSchedule::new();
    s.push(Instruction::Pulse(PulseSpec::half(region.clone())))
        .push(Instruction::Sweep {
            axis,
            steps: distance as u32 + 1,
            phi: params.phi,
            wait_phases: None,
            roles: None,
        })
        .push(Instruction::Pulse(PulseSpec::half(region)));
    execute(state, &s, &ExecOptions::default())
}

/// Per-structure atom counts and spins over all branches of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancySummary {
    pub branches: usize,
    /// `(structure, min count, max count)` over branches.
    pub counts: Vec<(&'static str, usize, usize)>,
    /// Bulk sites vacant in at least one branch.
    pub bulk_vacancies: BTreeSet<Site>,
    pub all_a: bool,
    pub norm: f64,
    pub recorded_loss: f64,
}

impl OccupancySummary {
    pub fn of(state: &SparseState, setup: &Setup) -> Self {
        let lat = state.lattice();
        let named = setup.structures.named();
        let mut counts: Vec<(&'static str, usize, usize)> =
            named.iter().map(|(n, _)| (*n, usize::MAX, 0)).collect();
        let mut vacancies = BTreeSet::new();
        let mut all_a = true;
        for (key, _) in state.iter() {
            let config = lat.decode(key);
            let mut occupied = BTreeSet::new();
            let mut c = [0usize; 4];
            for (_, a) in config.present() {
                all_a &= a.spin == Spin::A;
                occupied.insert(a.site);
                if let Some(i) = named.iter().position(|(_, r)| r.contains(a.site)) {
                    c[i] += 1;
                }
            }
            for (slot, k) in counts.iter_mut().zip(c) {
                slot.1 = slot.1.min(k);
                slot.2 = slot.2.max(k);
            }
            vacancies.extend(
                bulk_sites(setup.spec.lx, setup.spec.ly, setup.spec.lz)
                    .filter(|s| !occupied.contains(s)),
            );
        }
        if state.is_empty() {
            for slot in &mut counts {
                slot.1 = 0;
            }
        }
        OccupancySummary {
            branches: state.len(),
            counts,
            bulk_vacancies: vacancies,
            all_a,
            norm: state.norm_sqr(),
            recorded_loss: state.recorded_loss(),
        }
    }

    pub fn count(&self, name: &str) -> (usize, usize) {
        self.counts
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|(_, lo, hi)| (*lo, *hi))
            .unwrap_or((0, 0))
    }

    /// True when plane, line and dot have their full size in every branch.
    pub fn structures_complete(&self, spec: &SetupSpec) -> bool {
        self.count("plane") == ((spec.ly * spec.lz) as usize, (spec.ly * spec.lz) as usize)
            && self.count("line") == (spec.lz as usize, spec.lz as usize)
            && self.count("dot") == (1, 1)
    }
}

impl fmt::Display for OccupancySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "branches: {}", self.branches)?;
        for (n, lo, hi) in &self.counts {
            if lo == hi {
                writeln!(f, "{n}: {lo} atoms")?;
            } else {
                writeln!(f, "{n}: {lo}..{hi} atoms")?;
            }
        }
        let v: Vec<String> = self.bulk_vacancies.iter().map(|s| s.to_string()).collect();
        writeln!(f, "bulk vacancies: {}", v.join(" "))?;
        writeln!(f, "all atoms in a: {}", self.all_a)?;
        writeln!(f, "norm: {:.12}", self.norm)?;
        write!(f, "recorded loss: {:.12}", self.recorded_loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn flip(state: &SparseState, ids: &[usize]) -> SparseState {
        let lat = state.lattice().clone();
        let (c, a) = state.entries().remove(0);
        let mut c = c;
        for &id in ids {
            let mut atom = c.get(id).unwrap();
            atom.spin = atom.spin.flip();
            c.set(id, Some(atom));
        }
        SparseState::from_entries(lat, [(c, a)]).unwrap()
    }

    #[test]
    fn ideal_setup_counts_atoms() {
        let (s, setup) = build_setup(&SetupSpec::ideal(2, 2, 2)).unwrap();
        assert_eq!(setup.lattice.n_atoms(), 15);
        assert_eq!(s.len(), 1);
        assert_eq!(s.entries()[0].0.count_spin(Spin::A), 15);
    }

    #[test]
    fn structure_regions_are_disjoint() {
        let (_, setup) = build_setup(&SetupSpec::ideal(3, 2, 2)).unwrap();
        let named = setup.structures.named();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(!named[i].1.intersects(named[j].1), "{} vs {}", named[i].0, named[j].0);
            }
        }
    }

    #[test]
    fn every_bulk_row_meets_one_plane_site() {
        let spec = SetupSpec::ideal(3, 2, 2);
        let (s, setup) = build_setup(&spec).unwrap();
        let config = &s.entries()[0].0;
        for y in 0..spec.ly {
            for z in 0..spec.lz {
                let hits = (spec.lx..spec.lx + 4)
                    .filter(|&x| {
                        let site = Site::new(x, y, z);
                        config.atom_at(site).is_some() && setup.structures.plane.contains(site)
                    })
                    .count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(build_setup(&SetupSpec::ideal(0, 2, 2)), Err(Error::Setup(_))));
    }

    #[test]
    fn map_flips_plane_site_of_excited_row() {
        let (s, setup) = build_setup(&SetupSpec::ideal(3, 2, 2)).unwrap();
        let p = CollisionParams::ideal();
        let b = setup.bulk_atom(Site::new(1, 1, 0)).unwrap();
        let input = flip(&s, &[b]);
        let out = procedure_map(&input, &setup.stages[0], &p, &ExecOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        let (c, _) = &out.entries()[0];
        let plane_id = c.atom_at(Site::new(4, 1, 0)).unwrap();
        assert_eq!(c.get(plane_id).unwrap().spin, Spin::B);
        assert_eq!(c.count_spin(Spin::B), 2);
    }

    #[test]
    fn map_leaves_plane_site_for_two_excitations_in_row() {
        let (s, setup) = build_setup(&SetupSpec::ideal(3, 2, 2)).unwrap();
        let p = CollisionParams::ideal();
        let ids = [
            setup.bulk_atom(Site::new(0, 0, 1)).unwrap(),
            setup.bulk_atom(Site::new(2, 0, 1)).unwrap(),
        ];
        let out = procedure_map(&flip(&s, &ids), &setup.stages[0], &p, &ExecOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.entries()[0].0.count_spin(Spin::B), 2);
    }

    #[test]
    fn map_without_excitations_is_identity_up_to_phase() {
        let (s, setup) = build_setup(&SetupSpec::ideal(2, 2, 1)).unwrap();
        let out = procedure_map(&s, &setup.stages[0], &CollisionParams::ideal(), &ExecOptions::default()).unwrap();
        assert!((s.inner_product(&out).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnot_truth_table() {
        let lat = Arc::new(
            Lattice::new(WorldBox::symmetric(8), vec![Site::new(0, 0, 0), Site::new(2, 0, 0)]).unwrap(),
        );
        let cfg = |c: Spin, t: Spin| {
            Configuration::from_atoms(2, [(0, Site::new(0, 0, 0), c), (1, Site::new(2, 0, 0), t)])
        };
        let p = CollisionParams::ideal();
        for (c_in, t_out) in [(Spin::A, Spin::A), (Spin::B, Spin::B)] {
            let s = SparseState::basis(lat.clone(), &cfg(c_in, Spin::A)).unwrap();
            let out = cnot_demo(&s, Site::new(0, 0, 0), Site::new(2, 0, 0), &p).unwrap().prune(1e-12);
            assert_eq!(out.len(), 1);
            assert_eq!(out.entries()[0].0, cfg(c_in, t_out));
        }
        let sup = SparseState::from_entries(
            lat.clone(),
            [
                (cfg(Spin::A, Spin::A), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (cfg(Spin::B, Spin::A), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        let out = cnot_demo(&sup, Site::new(0, 0, 0), Site::new(2, 0, 0), &p).unwrap().prune(1e-12);
        let bell = SparseState::from_entries(
            lat,
            [
                (cfg(Spin::A, Spin::A), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (cfg(Spin::B, Spin::B), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        assert!((bell.inner_product(&out).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnot_needs_common_line() {
        let lat = Arc::new(Lattice::new(WorldBox::symmetric(4), vec![Site::new(0, 0, 0)]).unwrap());
        let s = SparseState::basis(lat, &Configuration::vacant(1)).unwrap();
        let r = cnot_demo(&s, Site::new(0, 0, 0), Site::new(1, 1, 0), &CollisionParams::ideal());
        assert!(matches!(r, Err(Error::Choreography(_))));
    }

    #[test]
    fn create_flips_column_below_control() {
        // control above a column of three targets; one vacancy
        let homes = vec![Site::new(0, 0, 8), Site::new(0, 0, 0), Site::new(0, 0, 2)];
        let lat = Arc::new(Lattice::new(WorldBox::symmetric(20), homes.clone()).unwrap());
        let cfg = |c: Spin| {
            Configuration::from_atoms(3, [(0, homes[0], c), (1, homes[1], Spin::A), (2, homes[2], Spin::A)])
        };
        let stage = CreateStage {
            label: "col".into(),
            control: BoxRegion::new(Interval::ANY, Interval::ANY, Interval::at_least(3)).into(),
            target: BoxRegion::new(Interval::ANY, Interval::ANY, Interval::range(0, 3)).into(),
            toward_control: Axis::PlusZ,
            separation: 4,
            sweep: 5,
        };
        let p = CollisionParams::ideal();
        let out = procedure_create(&SparseState::basis(lat.clone(), &cfg(Spin::B)).unwrap(), &stage, &p, &ExecOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        let c = &out.entries()[0].0;
        assert_eq!(c.count_spin(Spin::B), 3);
        assert!(c.atom_at(Site::new(0, 0, 1)).is_none());
        let out = procedure_create(&SparseState::basis(lat, &cfg(Spin::A)).unwrap(), &stage, &p, &ExecOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.entries()[0].0.count_spin(Spin::B), 0);
    }

    #[test]
    fn registry_lookup() {
        let reg = ChoreographyRegistry::builtin();
        assert_eq!(reg.names(), vec!["repositioned", "literal"]);
        assert!(reg.get("literal").is_ok());
        assert!(reg.get("nope").is_err());
    }
}
