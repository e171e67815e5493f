//! Collective excitations of the bulk, gate-matrix extraction and the
//! duration model.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Region, Site, Spin};
use crate::primitives::CollisionParams;
use crate::schedule::{execute, ExecOptions, ProtocolSchedule};
use crate::state::SparseState;

/// Photonic input `α|0⟩ + β|1⟩ + γ|2⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonicInput {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl PhotonicInput {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfiguration(format!(
                "photonic input has norm² {n}, expected 1"
            )));
        }
        Ok(PhotonicInput { alpha, beta, gamma })
    }

    /// The number state `|n⟩`.
    pub fn basis(n: usize) -> Self {
        let mut c = [Complex64::default(); 3];
        c[n] = Complex64::new(1.0, 0.0);
        PhotonicInput {
            alpha: c[0],
            beta: c[1],
            gamma: c[2],
        }
    }

    pub fn coefficients(&self) -> [Complex64; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

/// Shape of a mode function before it is restricted to occupied sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeProfile {
    /// Equal weight on every site of `region` (the storage region if absent).
    Uniform {
        #[serde(default)]
        region: Option<String>,
    },
    /// All weight on one site.
    Delta { site: [i32; 3] },
    /// Real Gaussian envelope of width `sigma` (sites) around `center`.
    Gaussian {
        center: [f64; 3],
        sigma: f64,
        #[serde(default)]
        region: Option<String>,
    },
}

impl Default for ModeProfile {
    fn default() -> Self {
        ModeProfile::Uniform { region: None }
    }
}

/// Normalized mode function `f_j` over home sites.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveMode {
    weights: Vec<(Site, Complex64)>,
}

impl CollectiveMode {
    /// Entries are summed per site and sorted; the result must be normalized.
    pub fn new(entries: impl IntoIterator<Item = (Site, Complex64)>) -> Result<Self> {
        let mut m: BTreeMap<Site, Complex64> = BTreeMap::new();
        for (s, f) in entries {
            *m.entry(s).or_default() += f;
        }
        let weights: Vec<_> = m.into_iter().filter(|(_, f)| *f != Complex64::default()).collect();
        let n: f64 = weights.iter().map(|(_, f)| f.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfiguration(format!(
                "mode function has norm² {n}, expected 1"
            )));
        }
        Ok(CollectiveMode { weights })
    }

    pub fn uniform(sites: &[Site]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Setup("mode function has empty support".into()));
        }
        let f = Complex64::new(1.0 / (sites.len() as f64).sqrt(), 0.0);
        CollectiveMode::new(sites.iter().map(|s| (*s, f)))
    }

    pub fn delta(site: Site) -> Self {
        CollectiveMode {
            weights: vec![(site, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn gaussian(sites: &[Site], center: [f64; 3], sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::Config("gaussian width must be positive".into()));
        }
        let raw: Vec<(Site, f64)> = sites
            .iter()
            .map(|s| {
                let d2 = (f64::from(s.x) - center[0]).powi(2)
                    + (f64::from(s.y) - center[1]).powi(2)
                    + (f64::from(s.z) - center[2]).powi(2);
                (*s, (-d2 / (4.0 * sigma * sigma)).exp())
            })
            .collect();
        let n = raw.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::Setup("mode function has empty support".into()));
        }
        CollectiveMode::new(raw.into_iter().map(|(s, w)| (s, Complex64::new(w / n, 0.0))))
    }

    /// Builds a mode from `profile`, restricted to sites of `storage` that
    /// hold an atom in |a⟩ in every branch of `setup_state`.
    pub fn from_profile(profile: &ModeProfile, storage: &Region, setup_state: &SparseState) -> Result<Self> {
        let occupied = occupied_in_every_branch(setup_state);
        let support = |region: &Option<String>| -> Result<Vec<Site>> {
            let r: Region = match region {
                Some(text) => text.parse()?,
                None => storage.clone(),
            };
            Ok(occupied.iter().copied().filter(|s| r.contains(*s)).collect())
        };
        match profile {
            ModeProfile::Uniform { region } => CollectiveMode::uniform(&support(region)?),
            ModeProfile::Delta { site } => {
                let s = Site::new(site[0], site[1], site[2]);
                if !occupied.contains(&s) {
                    return Err(Error::UnsupportedSite(s));
                }
                Ok(CollectiveMode::delta(s))
            }
            ModeProfile::Gaussian { center, sigma, region } => {
                CollectiveMode::gaussian(&support(region)?, *center, *sigma)
            }
        }
    }

    pub fn weights(&self) -> &[(Site, Complex64)] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn occupied_in_every_branch(state: &SparseState) -> Vec<Site> {
    let lat = state.lattice();
    let mut common: Option<Vec<Site>> = None;
    for (key, _) in state.iter() {
        let mut sites: Vec<Site> = (0..lat.n_atoms())
            .filter_map(|id| lat.atom(key, id))
            .filter(|a| a.spin == Spin::A)
            .map(|a| a.site)
            .collect();
        sites.sort_unstable();
        common = Some(match common {
            None => sites,
            Some(c) => c.into_iter().filter(|s| sites.binary_search(s).is_ok()).collect(),
        });
    }
    common.unwrap_or_default()
}

/// `|n⟩_A` built on top of `setup_state`, for n ≤ 2. For n = 2 the pair
/// coefficients are `f_i f_j` over unordered pairs, renormalized.
pub fn collective_basis(setup_state: &SparseState, mode: &CollectiveMode, n: usize) -> Result<SparseState> {
    if n > 2 {
        return Err(Error::InvalidConfiguration(format!("excitation number {n} > 2")));
    }
    if n == 0 {
        return Ok(setup_state.clone());
    }
    let lat = setup_state.lattice().clone();
    let w = mode.weights();
    let pairs: Vec<(usize, usize, Complex64)> = if n == 1 {
        (0..w.len()).map(|i| (i, usize::MAX, w[i].1)).collect()
    } else {
        let mut p = Vec::new();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                p.push((i, j, w[i].1 * w[j].1));
            }
        }
        let norm = p.iter().map(|(_, _, g)| g.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Setup("two excitations need at least two mode sites".into()));
        }
        p.into_iter().map(|(i, j, g)| (i, j, g / norm)).collect()
    };
    let mut out = SparseState::empty(lat.clone());
    let mut at_site: FxHashMap<Site, usize> = FxHashMap::default();
    let mut branches: Vec<_> = setup_state.iter().collect();
    branches.sort_unstable_by(|a, b| a.0.cmp(b.0));
    for (key, amp) in branches {
        at_site.clear();
        for id in 0..lat.n_atoms() {
            if let Some(a) = lat.atom(key, id) {
                if a.spin == Spin::A {
                    at_site.insert(a.site, id);
                }
            }
        }
        let id_of = |k: usize| -> Result<usize> {
            let s = w[k].0;
            at_site.get(&s).copied().ok_or(Error::UnsupportedSite(s))
        };
        for &(i, j, g) in &pairs {
            let mut k = key.clone();
            lat.set_spin(&mut k, id_of(i)?, Spin::B);
            if j != usize::MAX {
                lat.set_spin(&mut k, id_of(j)?, Spin::B);
            }
            out.add_amplitude(k, amp * g);
        }
    }
    Ok(out)
}

/// `α|0⟩_A + β|1⟩_A + γ|2⟩_A`.
pub fn prepare_input(setup_state: &SparseState, mode: &CollectiveMode, input: &PhotonicInput) -> Result<SparseState> {
    let mut out = SparseState::empty(setup_state.lattice().clone());
    for (n, c) in input.coefficients().into_iter().enumerate() {
        if c != Complex64::default() {
            out.add_scaled(&collective_basis(setup_state, mode, n)?, c)?;
        }
    }
    Ok(out)
}

/// Overlaps with the three collective basis states and the weight outside
/// their span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub overlaps: [Complex64; 3],
    pub leakage: f64,
    pub recorded_loss: f64,
}

/// The three collective basis states on a fixed setup, for repeated
/// projections.
#[derive(Clone, Debug)]
pub struct CollectiveBasis {
    states: [SparseState; 3],
}

impl CollectiveBasis {
    pub fn new(setup_state: &SparseState, mode: &CollectiveMode) -> Result<Self> {
        Ok(CollectiveBasis {
            states: [
                collective_basis(setup_state, mode, 0)?,
                collective_basis(setup_state, mode, 1)?,
                collective_basis(setup_state, mode, 2)?,
            ],
        })
    }

    pub fn state(&self, n: usize) -> &SparseState {
        &self.states[n]
    }

    pub fn project(&self, state: &SparseState) -> Projection {
        let overlaps = [0, 1, 2].map(|n| self.states[n].inner_product(state));
        let inside: f64 = overlaps.iter().map(|o| o.norm_sqr()).sum();
        Projection {
            overlaps,
            leakage: (state.norm_sqr() - inside).max(0.0),
            recorded_loss: state.recorded_loss(),
        }
    }
}

/// Projects `state` onto the collective basis over `setup_state`.
pub fn project_collective(state: &SparseState, setup_state: &SparseState, mode: &CollectiveMode) -> Result<Projection> {
    Ok(CollectiveBasis::new(setup_state, mode)?.project(state))
}

pub type GateMatrix = [[Complex64; 3]; 3];

pub fn ideal_gate() -> GateMatrix {
    let z = Complex64::default();
    let one = Complex64::new(1.0, 0.0);
    [[one, z, z], [z, Complex64::i(), z], [z, z, one]]
}

/// `|tr(G_ideal† G)|² / 9`.
pub fn gate_fidelity(g: &GateMatrix) -> f64 {
    let ideal = ideal_gate();
    let tr: Complex64 = (0..3).map(|n| ideal[n][n].conj() * g[n][n]).sum();
    tr.norm_sqr() / 9.0
}

/// `1 - mean_n Σ_m |G_mn|²`.
pub fn gate_leakage(g: &GateMatrix) -> f64 {
    let kept: f64 = (0..3)
        .map(|n| (0..3).map(|m| g[m][n].norm_sqr()).sum::<f64>())
        .sum();
    1.0 - kept / 3.0
}

/// Serializes as a flat record: `g{m}{n}_re`, `g{m}{n}_im`, `fidelity`,
/// `leakage`, `recorded_loss`, `duration_waits`, `duration_time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "BTreeMap<String, f64>", try_from = "BTreeMap<String, f64>")]
pub struct GateReport {
    /// `g[m][n]`: overlap with `|m⟩_A` of the output for input `|n⟩_A`.
    pub g: GateMatrix,
    pub fidelity: f64,
    pub leakage: f64,
    /// Mean over the three basis inputs.
    pub recorded_loss: f64,
    pub duration_waits: u64,
    pub duration_time: f64,
}

impl GateReport {
    pub fn from_columns(columns: &[Projection; 3], duration_waits: u64, t_int: f64) -> Self {
        let mut g = [[Complex64::default(); 3]; 3];
        for (n, col) in columns.iter().enumerate() {
            for m in 0..3 {
                g[m][n] = col.overlaps[m];
            }
        }
        GateReport {
            g,
            fidelity: gate_fidelity(&g),
            leakage: gate_leakage(&g),
            recorded_loss: columns.iter().map(|c| c.recorded_loss).sum::<f64>() / 3.0,
            duration_waits,
            duration_time: duration_waits as f64 * t_int,
        }
    }

    /// `G` divided by the phase of `G_00`.
    pub fn dephased(&self) -> GateMatrix {
        let p = self.g[0][0];
        let c = if p.norm() > 0.0 { p.conj() / p.norm() } else { Complex64::new(1.0, 0.0) };
        self.g.map(|row| row.map(|v| v * c))
    }
}

impl fmt::Display for GateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "G (global phase removed):")?;
        for row in self.dephased() {
            let cells: Vec<String> = row
                .iter()
                .map(|v| format!("{:+.9}{:+.9}i", clean(v.re), clean(v.im)))
                .collect();
            writeln!(f, "  [{}]", cells.join("  "))?;
        }
        writeln!(f, "fidelity: {:.9}", self.fidelity)?;
        writeln!(f, "leakage: {:.9}", clean(self.leakage))?;
        writeln!(f, "recorded loss: {:.9}", clean(self.recorded_loss))?;
        writeln!(f, "duration: {} waits", self.duration_waits)?;
        write!(f, "duration time: {}", self.duration_time)
    }
}

impl From<GateReport> for BTreeMap<String, f64> {
    fn from(r: GateReport) -> Self {
        let mut m = BTreeMap::new();
        for (i, row) in r.g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.insert(format!("g{i}{j}_re"), v.re);
                m.insert(format!("g{i}{j}_im"), v.im);
            }
        }
        m.insert("fidelity".into(), r.fidelity);
        m.insert("leakage".into(), r.leakage);
        m.insert("recorded_loss".into(), r.recorded_loss);
        m.insert("duration_waits".into(), r.duration_waits as f64);
        m.insert("duration_time".into(), r.duration_time);
        m
    }
}

impl TryFrom<BTreeMap<String, f64>> for GateReport {
    type Error = String;

    fn try_from(m: BTreeMap<String, f64>) -> std::result::Result<Self, String> {
        let get = |k: &str| m.get(k).copied().ok_or_else(|| format!("missing field {k}"));
        let mut g = [[Complex64::default(); 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = Complex64::new(get(&format!("g{i}{j}_re"))?, get(&format!("g{i}{j}_im"))?);
            }
        }
        if m.len() != 23 {
            return Err(format!("expected 23 fields, got {}", m.len()));
        }
        Ok(GateReport {
            g,
            fidelity: get("fidelity")?,
            leakage: get("leakage")?,
            recorded_loss: get("recorded_loss")?,
            duration_waits: get("duration_waits")? as u64,
            duration_time: get("duration_time")?,
        })
    }
}

/// Maps `-0.0` and sub-print-precision noise to `0.0` so printed reports
/// do not depend on the sign of rounding residue.
fn clean(v: f64) -> f64 {
    if v.abs() < 5e-13 {
        0.0
    } else {
        v
    }
}

/// Runs `schedule` on each collective basis input and extracts `G`.
pub fn effective_gate(
    setup_state: &SparseState,
    mode: &CollectiveMode,
    schedule: &ProtocolSchedule,
    params: &CollisionParams,
    options: &ExecOptions,
) -> Result<GateReport> {
    let basis = CollectiveBasis::new(setup_state, mode)?;
    let columns: Vec<Projection> = (0..3usize)
        .into_par_iter()
        .map(|n| execute(basis.state(n), schedule, options).map(|out| basis.project(&out)))
        .collect::<Result<_>>()?;
    let columns: [Projection; 3] = [columns[0], columns[1], columns[2]];
    let (waits, _) = duration_waits(schedule, params);
    Ok(GateReport::from_columns(&columns, waits, params.t_int))
}

/// Total sweep waits in `schedule` and the corresponding time.
pub fn duration_waits(schedule: &ProtocolSchedule, params: &CollisionParams) -> (u64, f64) {
    let w = schedule.waits();
    (w, w as f64 * params.t_int)
}
