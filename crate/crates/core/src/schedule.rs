//! Instruction lists, their line-oriented text form and the executor.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{Axis, Region, Site, Spin};
use crate::primitives::{
    advance, apply_atom_phase, apply_pulse, apply_state_phase, empty_b, shift_free, PulseKind,
    PulseSpec, Segment,
};
use crate::state::SparseState;

/// Control/target regions attached to a sweep. Used by the selective
/// collision mode and by the validator's collision classification.
#[derive(Clone, Debug, PartialEq)]
pub struct Roles {
    pub control: Region,
    pub target: Region,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Pulse(PulseSpec),
    Shift {
        axis: Axis,
        distance: u32,
        /// Initialization separations are never undone.
        permanent: bool,
    },
    /// `sweep_there_and_back` along `axis`.
    Sweep {
        axis: Axis,
        steps: u32,
        phi: f64,
        /// Per-wait collision phases (`2 * steps` of them) overriding `phi`.
        wait_phases: Option<Arc<[f64]>>,
        roles: Option<Roles>,
    },
    StatePhase {
        region: Region,
        spin: Spin,
        angle: f64,
    },
    Empty {
        region: Region,
    },
    Checkpoint(String),
}

impl Instruction {
    pub fn waits(&self) -> u64 {
        match self {
            Instruction::Sweep { steps, .. } => 2 * u64::from(*steps),
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProtocolSchedule {
    instructions: Vec<Instruction>,
}

impl ProtocolSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, ins: Instruction) -> &mut Self {
        self.instructions.push(ins);
        self
    }

    pub fn extend(&mut self, other: ProtocolSchedule) -> &mut Self {
        self.instructions.extend(other.instructions);
        self
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn instructions_mut(&mut self) -> &mut [Instruction] {
        &mut self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Total number of single-site displacement waits.
    pub fn waits(&self) -> u64 {
        self.instructions.iter().map(Instruction::waits).sum()
    }

    /// Net displacement left by non-permanent shifts; zero for a
    /// well-formed schedule.
    pub fn residual_shift(&self) -> Site {
        self.instructions
            .iter()
            .fold(Site::new(0, 0, 0), |acc, ins| match ins {
                Instruction::Shift {
                    axis,
                    distance,
                    permanent: false,
                } => acc.step(*axis, *distance as i32),
                _ => acc,
            })
    }
}

/// Formats an angle as a rational multiple of π (`1/2` is π/2), falling
/// back to `rad:<radians>` when no small denominator fits.
pub fn format_angle(rad: f64) -> String {
    let r = rad / PI;
    for q in 1..=64i64 {
        let p = (r * q as f64).round();
        if (r * q as f64 - p).abs() < 1e-12 {
            let p = p as i64;
            return if q == 1 { p.to_string() } else { format!("{p}/{q}") };
        }
    }
    format!("rad:{rad:?}")
}

pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("malformed angle '{s}'"));
    if let Some(r) = s.strip_prefix("rad:") {
        return r.trim().parse().map_err(|_| bad());
    }
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: f64 = p.parse().map_err(|_| bad())?;
    let q: f64 = q.parse().map_err(|_| bad())?;
    if q == 0.0 {
        return Err(bad());
    }
    Ok(p / q * PI)
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Pulse(p) => {
                let kind = match p.kind {
                    PulseKind::Half => "half",
                    PulseKind::Full => "full",
                };
                write!(f, "pulse {kind} {} {}", format_angle(p.angle), p.region)
            }
            Instruction::Shift {
                axis,
                distance,
                permanent,
            } => {
                write!(f, "shift {axis} {distance}")?;
                if *permanent {
                    f.write_str(" permanent")?;
                }
                Ok(())
            }
            Instruction::Sweep {
                axis,
                steps,
                phi,
                roles,
                ..
            } => {
                write!(f, "sweep {axis} {steps} {}", format_angle(*phi))?;
                if let Some(r) = roles {
                    write!(f, " control={} target={}", r.control, r.target)?;
                }
                Ok(())
            }
            Instruction::StatePhase {
                region,
                spin,
                angle,
            } => write!(f, "phase {spin} {} {region}", format_angle(*angle)),
            Instruction::Empty { region } => write!(f, "empty {region}"),
            Instruction::Checkpoint(label) => write!(f, "checkpoint {label}"),
        }
    }
}

impl fmt::Display for ProtocolSchedule {
    /// One instruction per line. Per-atom pulse angles and per-wait phases
    /// are not part of the text form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

fn parse_instruction(line: &str) -> Result<Instruction> {
    let tok: Vec<&str> = line.split_whitespace().collect();
    let need = |n: usize| -> Result<()> {
        if tok.len() < n {
            Err(Error::Config(format!("too few fields in '{line}'")))
        } else {
            Ok(())
        }
    };
    let int = |s: &str| -> Result<u32> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad integer '{s}'")))
    };
    need(1)?;
    Ok(match tok[0] {
        "pulse" => {
            need(4)?;
            let kind = match tok[1] {
                "half" => PulseKind::Half,
                "full" => PulseKind::Full,
                k => return Err(Error::Config(format!("unknown pulse kind '{k}'"))),
            };
            Instruction::Pulse(PulseSpec {
                kind,
                angle: parse_angle(tok[2])?,
                region: tok[3].parse()?,
                per_atom: None,
            })
        }
        "shift" => {
            need(3)?;
            Instruction::Shift {
                axis: tok[1].parse()?,
                distance: int(tok[2])?,
                permanent: tok.get(3) == Some(&"permanent"),
            }
        }
        "sweep" => {
            need(4)?;
            let mut control = None;
            let mut target = None;
            for t in &tok[4..] {
                if let Some(r) = t.strip_prefix("control=") {
                    control = Some(r.parse()?);
                } else if let Some(r) = t.strip_prefix("target=") {
                    target = Some(r.parse()?);
                } else {
                    return Err(Error::Config(format!("unexpected field '{t}'")));
                }
            }
            let roles = match (control, target) {
                (Some(control), Some(target)) => Some(Roles { control, target }),
                (None, None) => None,
                _ => return Err(Error::Config("sweep needs both control= and target=".into())),
            };
            Instruction::Sweep {
                axis: tok[1].parse()?,
                steps: int(tok[2])?,
                phi: parse_angle(tok[3])?,
                wait_phases: None,
                roles,
            }
        }
        "phase" => {
            need(4)?;
            Instruction::StatePhase {
                spin: tok[1].parse()?,
                angle: parse_angle(tok[2])?,
                region: tok[3].parse()?,
            }
        }
        "empty" => {
            need(2)?;
            Instruction::Empty {
                region: tok[1].parse()?,
            }
        }
        "checkpoint" => Instruction::Checkpoint(tok[1..].join(" ")),
        op => return Err(Error::Config(format!("unknown opcode '{op}'"))),
    })
}

impl FromStr for ProtocolSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut sched = ProtocolSchedule::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ins = parse_instruction(line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            sched.push(ins);
        }
        Ok(sched)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionModeKind {
    #[default]
    Physical,
    /// Phases only for the control/target pair declared on each sweep.
    Selective,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExecOptions {
    pub collision_mode: CollisionModeKind,
    /// Applied after every pulse.
    pub prune_tol: f64,
    /// Phase per wait on every |b⟩ atom while the lattices are shifted.
    pub transport_phase: f64,
    /// Swap |a⟩ and |b⟩ at each sweep turnaround and after the return pass.
    pub echo: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            collision_mode: CollisionModeKind::Physical,
            prune_tol: crate::DEFAULT_PRUNE_TOL,
            transport_phase: 0.0,
            echo: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// Atom transitions to an untrapped state and leaves the lattice.
    Loss,
    /// Random phase kick on the atom's |b⟩ component.
    Dephase(f64),
}

/// A stochastic event applied right after global wait number `wait`
/// (1-based, counted across the whole schedule).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaitEvent {
    pub wait: u64,
    pub atom: usize,
    pub kind: EventKind,
}

/// Runs schedules, splitting sweeps at wait boundaries where events fall.
pub struct Executor<'a> {
    options: &'a ExecOptions,
    events: &'a [WaitEvent],
    next_event: usize,
    waits: u64,
    rng: Option<&'a mut ChaCha8Rng>,
}

impl<'a> Executor<'a> {
    pub fn new(options: &'a ExecOptions) -> Self {
        Executor {
            options,
            events: &[],
            next_event: 0,
            waits: 0,
            rng: None,
        }
    }

    /// Events must be sorted by wait. Loss events need `rng` for the spin
    /// measurement.
    pub fn with_events(mut self, events: &'a [WaitEvent], rng: &'a mut ChaCha8Rng) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0].wait <= w[1].wait));
        self.events = events;
        self.rng = Some(rng);
        self
    }

    pub fn waits_elapsed(&self) -> u64 {
        self.waits
    }

    pub fn run(&mut self, state: &SparseState, schedule: &ProtocolSchedule) -> Result<SparseState> {
        let mut s = state.clone();
        for ins in schedule.instructions() {
            s = self.step(&s, ins)?;
        }
        Ok(s)
    }

    pub fn step(&mut self, state: &SparseState, ins: &Instruction) -> Result<SparseState> {
        match ins {
            Instruction::Pulse(p) => {
                let mut s = apply_pulse(state, p)?;
                s.prune_in_place(self.options.prune_tol);
                Ok(s)
            }
            Instruction::Shift { axis, distance, .. } => shift_free(state, *axis, *distance),
            Instruction::Sweep {
                axis,
                steps,
                phi,
                wait_phases,
                roles,
            } => {
                let n = *steps as usize;
                let owned;
                let phases: &[f64] = match wait_phases {
                    Some(p) if p.len() == 2 * n => p,
                    Some(_) => {
                        return Err(Error::Config(
                            "per-wait phase list must hold 2*steps entries".into(),
                        ))
                    }
                    None => {
                        owned = vec![*phi; 2 * n];
                        &owned
                    }
                };
                let empty = Region::empty();
                let selective = match self.options.collision_mode {
                    CollisionModeKind::Physical => None,
                    CollisionModeKind::Selective => Some(
                        roles
                            .as_ref()
                            .map_or((&empty, &empty), |r| (&r.control, &r.target)),
                    ),
                };
                let origin = Site::new(0, 0, 0);
                let s = self.half(state, *axis, *steps, Spin::B, &phases[..n], selective, origin)?;
                let (s, carrier) = if self.options.echo {
                    (self.swap_all(&s)?, Spin::A)
                } else {
                    (s, Spin::B)
                };
                let turn = origin.step(*axis, *steps as i32);
                let s = self.half(&s, axis.reverse(), *steps, carrier, &phases[n..], selective, turn)?;
                if self.options.echo {
                    self.swap_all(&s)
                } else {
                    Ok(s)
                }
            }
            Instruction::StatePhase {
                region,
                spin,
                angle,
            } => Ok(apply_state_phase(state, region, *spin, *angle)),
            Instruction::Empty { region } => Ok(empty_b(state, region).0),
            Instruction::Checkpoint(_) => Ok(state.clone()),
        }
    }

    fn swap_all(&self, state: &SparseState) -> Result<SparseState> {
        let mut s = apply_pulse(state, &PulseSpec::full(Region::all()))?;
        s.prune_in_place(self.options.prune_tol);
        Ok(s)
    }

    #[allow(clippy::too_many_arguments)]
    fn half(
        &mut self,
        state: &SparseState,
        axis: Axis,
        steps: u32,
        carrier: Spin,
        phases: &[f64],
        selective: Option<(&Region, &Region)>,
        offset: Site,
    ) -> Result<SparseState> {
        let mut s = state.clone();
        let mut done = 0u32;
        while done < steps {
            let remaining = u64::from(steps - done);
            let len = match self.events.get(self.next_event) {
                Some(e) if e.wait > self.waits && e.wait - self.waits < remaining => {
                    (e.wait - self.waits) as u32
                }
                _ => remaining as u32,
            };
            s = advance(
                &s,
                &Segment {
                    axis,
                    steps: len,
                    carrier,
                    phases: &phases[done as usize..(done + len) as usize],
                    selective,
                    rest_offset: offset.step(axis, done as i32),
                    transport_phase: self.options.transport_phase,
                },
            )?;
            done += len;
            self.waits += u64::from(len);
            s = self.apply_due_events(s)?;
        }
        Ok(s)
    }

    fn apply_due_events(&mut self, mut s: SparseState) -> Result<SparseState> {
        while let Some(e) = self.events.get(self.next_event) {
            if e.wait > self.waits {
                break;
            }
            self.next_event += 1;
            let present = s
                .iter()
                .next()
                .is_some_and(|(k, _)| s.lattice().atom(k, e.atom).is_some());
            if !present {
                continue;
            }
            s = match e.kind {
                EventKind::Loss => {
                    let rng = self
                        .rng
                        .as_deref_mut()
                        .ok_or_else(|| Error::Config("loss events need an rng".into()))?;
                    crate::noise::loss_event(&s, e.atom, rng)?
                }
                EventKind::Dephase(theta) => apply_atom_phase(&s, e.atom, Spin::B, theta),
            };
        }
        Ok(s)
    }
}

/// Runs a schedule with default options and no stochastic events.
pub fn execute(state: &SparseState, schedule: &ProtocolSchedule, options: &ExecOptions) -> Result<SparseState> {
    Executor::new(options).run(state, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{BoxRegion, Interval};
    use crate::primitives::CollisionParams;
    use std::f64::consts::FRAC_PI_2;

    fn sample() -> ProtocolSchedule {
        let plane = Region::from(BoxRegion::new(Interval::exactly(4), Interval::at_least(0), Interval::below(2)));
        let mut s = ProtocolSchedule::new();
        s.push(Instruction::Checkpoint("bulk->plane".into()))
            .push(Instruction::Pulse(PulseSpec::half(plane.clone())))
            .push(Instruction::Sweep {
                axis: Axis::PlusX,
                steps: 5,
                phi: CollisionParams::ideal().phi,
                wait_phases: None,
                roles: Some(Roles { control: "x[0,2]".parse().unwrap(), target: plane.clone() }),
            })
            .push(Instruction::Shift { axis: Axis::MinusZ, distance: 3, permanent: true })
            .push(Instruction::StatePhase { region: plane, spin: Spin::B, angle: FRAC_PI_2 })
            .push(Instruction::Empty { region: "x[3,]".parse().unwrap() })
            .push(Instruction::Pulse(PulseSpec::full(Region::all()).with_angle(0.123)));
        s
    }

    #[test]
    fn text_form_round_trips() {
        let s = sample();
        let text = s.to_string();
        let back: ProtocolSchedule = text.parse().unwrap();
        assert_eq!(back.to_string(), text);
        assert_eq!(back.len(), s.len());
        assert_eq!(back.waits(), 10);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = "checkpoint a\n\nsweep +q 3 1/2\n".parse::<ProtocolSchedule>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn angles_print_as_multiples_of_pi() {
        assert_eq!(format_angle(FRAC_PI_2), "1/2");
        assert_eq!(format_angle(PI), "1");
        assert_eq!(format_angle(-PI / 3.0), "-1/3");
        assert!(format_angle(0.1).starts_with("rad:"));
        for a in [FRAC_PI_2, 0.1, -2.5, 0.0] {
            assert!((parse_angle(&format_angle(a)).unwrap() - a).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_shift_ignores_permanent_moves() {
        let mut s = ProtocolSchedule::new();
        s.push(Instruction::Shift { axis: Axis::PlusX, distance: 2, permanent: false })
            .push(Instruction::Shift { axis: Axis::PlusZ, distance: 9, permanent: true });
        assert_eq!(s.residual_shift(), Site::new(2, 0, 0));
        s.push(Instruction::Shift { axis: Axis::MinusX, distance: 2, permanent: false });
        assert_eq!(s.residual_shift(), Site::new(0, 0, 0));
    }
}
