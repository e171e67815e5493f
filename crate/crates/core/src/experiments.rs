//! Experiment drivers behind the command-line subcommands, and the
//! registry of scaling experiments.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::choreography::{build_setup, initialize_faithful, prepared_setup, OccupancySummary, Placement, SetupSpec};
use crate::collective::{effective_gate, CollectiveMode, GateReport};
use crate::config::{set_noise_parameter, ExperimentConfig};
use crate::error::{Error, Result};
use crate::fit::{scaling_fit, Fit, FitKind};
use crate::lattice::{AtomState, Spin};
use crate::noise::trajectory::{run_trajectories, split_seed, TrajectoryStats};
use crate::noise::{NoiseModel, NoiseRegistry};
use crate::oracle::{check_case, random_case, CaseOutcome};
use crate::results::{run_id, timestamp, ResultRecord, SCHEMA_VERSION};
use crate::state::SparseState;
use crate::validate::{validate_gate, validate_init, Diagnostics};

/// Name and magnitude of the noise in a model: the single nonzero
/// parameter, `a+b` (first magnitude) for several, `none` for none.
pub fn noise_label(n: &NoiseModel) -> (String, f64) {
    let params = [
        ("p_hole", n.p_hole),
        ("pulse_systematic", n.pulse_systematic),
        ("pulse_sigma", n.pulse_sigma),
        ("collision_systematic", n.collision_systematic),
        ("collision_sigma", n.collision_sigma),
        ("loss_rate", n.loss_rate),
        ("dephasing_rate", n.dephasing_rate),
        ("transport_phase", n.transport_phase),
    ];
    let set: Vec<_> = params.iter().filter(|(_, v)| *v != 0.0).collect();
    match set.first() {
        None => ("none".into(), 0.0),
        Some((_, v)) => (set.iter().map(|(k, _)| *k).collect::<Vec<_>>().join("+"), *v),
    }
}

pub fn record(cfg: &ExperimentConfig, experiment: &str, index: usize, stats: &TrajectoryStats) -> ResultRecord {
    let hash = cfg.hash();
    let (kind, magnitude) = noise_label(&cfg.noise);
    let (lx, ly, lz) = (cfg.setup.lx, cfg.setup.ly, cfg.setup.lz);
    ResultRecord {
        schema_version: SCHEMA_VERSION,
        run_id: run_id(&hash, cfg.run.seed, index),
        timestamp: timestamp(),
        experiment: experiment.into(),
        config_hash: hash,
        lx,
        ly,
        lz,
        n_total: SetupSpec::ideal(lx, ly, lz).n_total(),
        noise_kind: kind,
        noise_magnitude: magnitude,
        fidelity_mean: stats.fidelity_mean,
        fidelity_stderr: stats.fidelity_stderr,
        leakage: stats.leakage_mean,
        recorded_loss: stats.recorded_loss_mean,
        duration_waits: stats.duration_waits,
        duration_time: stats.duration_time,
        trajectories: stats.trajectories,
        seed: cfg.run.seed,
    }
}

#[derive(Clone, Debug)]
pub struct GateOutcome {
    /// Present for noiseless runs, where the full matrix is available.
    pub report: Option<GateReport>,
    pub stats: TrajectoryStats,
    /// `G` applied to the configured photonic input.
    pub output: Option<[Complex64; 3]>,
    pub record: ResultRecord,
}

impl fmt::Display for GateOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = &self.report {
            writeln!(f, "{r}")?;
        } else {
            let s = &self.stats;
            writeln!(f, "fidelity: {:.9} ± {:.9}", s.fidelity_mean, s.fidelity_stderr)?;
            writeln!(f, "leakage: {:.9}", s.leakage_mean)?;
            writeln!(f, "recorded loss: {:.9}", s.recorded_loss_mean)?;
            writeln!(f, "duration: {} waits, {:.9} t", s.duration_waits, s.duration_time)?;
            writeln!(f, "trajectories: {} ({} failed)", s.trajectories, s.failed)?;
        }
        if let Some(o) = &self.output {
            let c: Vec<String> = o.iter().map(|c| format!("{:.9}{:+.9}i", c.re, c.im)).collect();
            writeln!(f, "output amplitudes: {}", c.join(" "))?;
        }
        Ok(())
    }
}

pub fn gate(cfg: &ExperimentConfig) -> Result<GateOutcome> {
    let registry = NoiseRegistry::builtin();
    if !cfg.noise.active(&registry).is_empty() {
        let stats = run_trajectories(&cfg.trajectory_config()?)?;
        let record = record(cfg, "gate", 0, &stats);
        return Ok(GateOutcome {
            report: None,
            stats,
            output: None,
            record,
        });
    }
    let spec = cfg.setup_spec()?;
    let params = cfg.params()?;
    let (state, setup) = prepared_setup(&spec, &params)?;
    let mode = CollectiveMode::from_profile(&cfg.mode, &setup.storage, &state)?;
    let mut options = cfg.exec_options();
    options.echo = cfg.noise.echo;
    let report = effective_gate(&state, &mode, &setup.gate_schedule(&params), &params, &options)?;
    let input = cfg.photonic_input()?.coefficients();
    let output = std::array::from_fn(|m| (0..3).map(|n| report.g[m][n] * input[n]).sum());
    let stats = TrajectoryStats {
        trajectories: 1,
        failed: 0,
        fidelity_mean: report.fidelity,
        fidelity_stderr: 0.0,
        leakage_mean: report.leakage,
        recorded_loss_mean: report.recorded_loss,
        duration_waits: report.duration_waits,
        duration_time: report.duration_time,
    };
    Ok(GateOutcome {
        record: record(cfg, "gate", 0, &stats),
        report: Some(report),
        stats,
        output: Some(output),
    })
}

#[derive(Clone, Debug)]
pub struct InitOutcome {
    pub placement: Placement,
    pub summary: OccupancySummary,
    pub structures_complete: bool,
    pub final_state: SparseState,
}

impl fmt::Display for InitOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "placement: {:?}", self.placement)?;
        writeln!(f, "{}", self.summary)?;
        write!(f, "structures complete: {}", self.structures_complete)
    }
}

/// Faithful placement: seeds the bulk at `init_seed` and runs the
/// initialization choreography. Ideal placement has nothing to carve and
/// reports the setup as built.
pub fn init(cfg: &ExperimentConfig) -> Result<InitOutcome> {
    let spec = cfg.setup_spec()?;
    let params = cfg.params()?;
    let (state, setup) = build_setup(&spec)?;
    let final_state = match spec.placement {
        Placement::Ideal => state,
        Placement::Faithful => {
            let id = setup
                .bulk_atom(spec.init_seed)
                .ok_or_else(|| Error::Setup(format!("initialization seed {} is not a bulk site", spec.init_seed)))?;
            let (mut config, _) = state.entries().swap_remove(0);
            config.set(id, Some(AtomState::new(spec.init_seed, Spin::B)));
            let seeded = SparseState::basis(state.lattice().clone(), &config)?;
            initialize_faithful(&seeded, &setup, &params, &cfg.exec_options())?
        }
    };
    let summary = OccupancySummary::of(&final_state, &setup);
    Ok(InitOutcome {
        placement: spec.placement,
        structures_complete: summary.structures_complete(&spec) && summary.all_a,
        summary,
        final_state,
    })
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub stats: TrajectoryStats,
    pub record: ResultRecord,
}

/// One trajectory run per value of the `[sweep]` parameter, in grid order.
/// Every point reuses the run seed.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("noise-sweep needs a [sweep] table".into()))?;
    if sweep.values.is_empty() {
        return Err(Error::Config("[sweep] values is empty".into()));
    }
    sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = cfg.clone();
            set_noise_parameter(&mut c.noise, &sweep.parameter, v);
            let stats = run_trajectories(&c.trajectory_config()?)?;
            Ok(SweepPoint {
                value: v,
                record: record(&c, "noise-sweep", i, &stats),
                stats,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ScalingPoint {
    pub size: [i32; 3],
    pub x: f64,
    pub y: f64,
    pub stats: TrajectoryStats,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

/// A size sweep with a fitted law and a pass/fail judgement of the claim.
pub trait ScalingExperiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn claim(&self) -> &'static str;
    fn default_sizes(&self) -> Vec<[i32; 3]>;
    /// Noise parameter varied, or `None` for noiseless runs.
    fn parameter(&self) -> Option<&'static str>;
    fn default_magnitude(&self) -> f64;
    fn fit_kind(&self) -> FitKind;
    fn x(&self, size: [i32; 3], stats: &TrajectoryStats) -> f64;
    fn y(&self, stats: &TrajectoryStats) -> f64 {
        1.0 - stats.fidelity_mean
    }
    fn judge(&self, points: &[ScalingPoint], fit: &Fit) -> Check;
}

struct PulseL;

impl ScalingExperiment for PulseL {
    fn name(&self) -> &'static str {
        "pulse_l"
    }
    fn claim(&self) -> &'static str {
        "systematic pulse-error infidelity is proportional to l^2"
    }
    fn default_sizes(&self) -> Vec<[i32; 3]> {
        vec![[2, 1, 1], [2, 2, 2], [2, 3, 3]]
    }
    fn parameter(&self) -> Option<&'static str> {
        Some("pulse_systematic")
    }
    fn default_magnitude(&self) -> f64 {
        0.02
    }
    fn fit_kind(&self) -> FitKind {
        FitKind::LogLog
    }
    fn x(&self, size: [i32; 3], _: &TrajectoryStats) -> f64 {
        size[1] as f64
    }
    fn judge(&self, _: &[ScalingPoint], fit: &Fit) -> Check {
        Check {
            passed: (fit.slope - 2.0).abs() <= 0.5,
            detail: format!("log-log slope {:.4}, required 2 ± 0.5", fit.slope),
        }
    }
}

struct HolesSize;

impl ScalingExperiment for HolesSize {
    fn name(&self) -> &'static str {
        "holes_size"
    }
    fn claim(&self) -> &'static str {
        "hole-induced infidelity does not depend on the system size"
    }
    fn default_sizes(&self) -> Vec<[i32; 3]> {
        vec![[2, 2, 2], [3, 2, 2], [4, 2, 2]]
    }
    fn parameter(&self) -> Option<&'static str> {
        Some("p_hole")
    }
    fn default_magnitude(&self) -> f64 {
        0.01
    }
    fn fit_kind(&self) -> FitKind {
        FitKind::Linear
    }
    fn x(&self, size: [i32; 3], _: &TrajectoryStats) -> f64 {
        SetupSpec::ideal(size[0], size[1], size[2]).n_total() as f64
    }
    fn judge(&self, points: &[ScalingPoint], _: &Fit) -> Check {
        let mut worst: f64 = 0.0;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let sigma = (a.stats.fidelity_stderr.powi(2) + b.stats.fidelity_stderr.powi(2)).sqrt();
                let z = if sigma > 0.0 { (a.y - b.y).abs() / sigma } else if a.y == b.y { 0.0 } else { f64::INFINITY };
                worst = worst.max(z);
            }
        }
        Check {
            passed: worst <= 3.0,
            detail: format!("largest pairwise difference {worst:.3} combined sigma, required <= 3"),
        }
    }
}

struct LossDuration;

impl ScalingExperiment for LossDuration {
    fn name(&self) -> &'static str {
        "loss_duration"
    }
    fn claim(&self) -> &'static str {
        "loss-induced infidelity scales like the gate duration"
    }
    fn default_sizes(&self) -> Vec<[i32; 3]> {
        (2..=5).map(|lx| [lx, 2, 2]).collect()
    }
    fn parameter(&self) -> Option<&'static str> {
        Some("loss_rate")
    }
    fn default_magnitude(&self) -> f64 {
        1e-4
    }
    fn fit_kind(&self) -> FitKind {
        FitKind::Linear
    }
    fn x(&self, _: [i32; 3], stats: &TrajectoryStats) -> f64 {
        stats.duration_waits as f64
    }
    fn judge(&self, _: &[ScalingPoint], fit: &Fit) -> Check {
        Check {
            passed: fit.r_squared >= 0.9 && fit.slope > 0.0,
            detail: format!("linear R² {:.4} with slope {:.3e}, required R² >= 0.9", fit.r_squared, fit.slope),
        }
    }
}

struct DurationLx;

impl ScalingExperiment for DurationLx {
    fn name(&self) -> &'static str {
        "duration_lx"
    }
    fn claim(&self) -> &'static str {
        "gate duration grows linearly with the bulk length"
    }
    fn default_sizes(&self) -> Vec<[i32; 3]> {
        (2..=5).map(|lx| [lx, 2, 2]).collect()
    }
    fn parameter(&self) -> Option<&'static str> {
        None
    }
    fn default_magnitude(&self) -> f64 {
        0.0
    }
    fn fit_kind(&self) -> FitKind {
        FitKind::Linear
    }
    fn x(&self, size: [i32; 3], _: &TrajectoryStats) -> f64 {
        size[0] as f64
    }
    fn y(&self, stats: &TrajectoryStats) -> f64 {
        stats.duration_waits as f64
    }
    fn judge(&self, _: &[ScalingPoint], fit: &Fit) -> Check {
        Check {
            passed: fit.residual < 1e-9,
            detail: format!("affine fit residual {:.3e}, slope {} waits per site", fit.residual, fit.slope),
        }
    }
}

#[derive(Clone)]
pub struct ScalingRegistry {
    experiments: Vec<Arc<dyn ScalingExperiment>>,
}

impl ScalingRegistry {
    pub fn builtin() -> Self {
        ScalingRegistry {
            experiments: vec![Arc::new(PulseL), Arc::new(HolesSize), Arc::new(LossDuration), Arc::new(DurationLx)],
        }
    }

    pub fn register(&mut self, e: Arc<dyn ScalingExperiment>) {
        self.experiments.retain(|x| x.name() != e.name());
        self.experiments.push(e);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ScalingExperiment>> {
        self.experiments.iter().find(|e| e.name() == name).cloned().ok_or_else(|| {
            Error::Config(format!(
                "unknown scaling experiment '{name}', expected one of {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.experiments.iter().map(|e| e.name()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ScalingOutcome {
    pub name: String,
    pub claim: String,
    pub points: Vec<ScalingPoint>,
    pub fit: Fit,
    pub check: Check,
    pub records: Vec<ResultRecord>,
}

impl fmt::Display for ScalingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, self.claim)?;
        for p in &self.points {
            writeln!(
                f,
                "  {}x{}x{}: x = {}, y = {:.6e} (stderr {:.2e}, {} waits)",
                p.size[0], p.size[1], p.size[2], p.x, p.y, p.stats.fidelity_stderr, p.stats.duration_waits
            )?;
        }
        writeln!(f, "  {}", self.fit)?;
        write!(f, "  {}: {}", if self.check.passed { "PASS" } else { "FAIL" }, self.check.detail)
    }
}

/// Runs a scaling experiment with the `[scaling]` table of `cfg`; the
/// rest of `cfg` (trajectories, seed, collision parameters) applies to
/// every point.
pub fn scaling(cfg: &ExperimentConfig, registry: &ScalingRegistry) -> Result<ScalingOutcome> {
    let sc = cfg
        .scaling
        .as_ref()
        .ok_or_else(|| Error::Config("scaling needs a [scaling] table".into()))?;
    let exp = registry.get(&sc.experiment)?;
    let sizes = if sc.sizes.is_empty() { exp.default_sizes() } else { sc.sizes.clone() };
    let magnitude = sc.magnitude.unwrap_or_else(|| exp.default_magnitude());
    let mut points = Vec::new();
    let mut records = Vec::new();
    for (i, size) in sizes.iter().enumerate() {
        let mut c = cfg.clone();
        (c.setup.lx, c.setup.ly, c.setup.lz) = (size[0], size[1], size[2]);
        if let Some(p) = exp.parameter() {
            set_noise_parameter(&mut c.noise, p, magnitude);
        }
        let stats = run_trajectories(&c.trajectory_config()?)?;
        records.push(record(&c, exp.name(), i, &stats));
        points.push(ScalingPoint {
            size: *size,
            x: exp.x(*size, &stats),
            y: exp.y(&stats),
            stats,
        });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    let fit = scaling_fit(&xy, exp.fit_kind())?;
    let check = exp.judge(&points, &fit);
    Ok(ScalingOutcome {
        name: exp.name().into(),
        claim: exp.claim().into(),
        points,
        fit,
        check,
        records,
    })
}

#[derive(Clone, Debug)]
pub struct ValidationOutcome {
    /// `(schedule name, diagnostics)`.
    pub reports: Vec<(&'static str, Diagnostics)>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|(_, d)| d.passed())
    }
}

impl fmt::Display for ValidationOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, d)) in self.reports.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{name}: {d}")?;
        }
        Ok(())
    }
}

/// Validates the initialization schedule (faithful placement) and the
/// gate schedule.
pub fn validate(cfg: &ExperimentConfig) -> Result<ValidationOutcome> {
    let spec = cfg.setup_spec()?;
    let params = cfg.params()?;
    let mut reports = Vec::new();
    if spec.placement == Placement::Faithful {
        let (state, setup) = build_setup(&spec)?;
        let d = validate_init(&state, &setup, &params)?;
        let init_ok = d.passed();
        reports.push(("initialization", d));
        if !init_ok {
            return Ok(ValidationOutcome { reports });
        }
    }
    let (state, setup) = prepared_setup(&spec, &params)?;
    reports.push(("gate", validate_gate(&state, &setup, &params)?));
    Ok(ValidationOutcome { reports })
}

#[derive(Clone, Debug, Default)]
pub struct OracleSummary {
    pub cases: usize,
    pub agreed: usize,
    pub both_rejected: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub mismatches: Vec<String>,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.max_deviation <= self.tolerance
    }
}

impl fmt::Display for OracleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "cases: {} ({} compared, {} rejected by both)",
            self.cases, self.agreed, self.both_rejected
        )?;
        writeln!(f, "max amplitude deviation: {:.3e} (tolerance {:.1e})", self.max_deviation, self.tolerance)?;
        for m in &self.mismatches {
            writeln!(f, "mismatch: {m}")?;
        }
        write!(f, "{}", if self.passed() { "agree" } else { "disagree" })
    }
}

/// Compares the engine with the enumeration oracle on random cases drawn
/// from `split_seed(seed, [case])`.
pub fn oracle_check(cases: usize, seed: u64, tolerance: f64) -> OracleSummary {
    let mut s = OracleSummary {
        cases,
        tolerance,
        ..Default::default()
    };
    for i in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, &[i as u64]));
        match check_case(&random_case(&mut rng)) {
            CaseOutcome::Agree(d) => {
                s.agreed += 1;
                s.max_deviation = s.max_deviation.max(d);
                if d > tolerance {
                    s.mismatches.push(format!("case {i}: deviation {d:.3e}"));
                }
            }
            CaseOutcome::BothRejected => s.both_rejected += 1,
            CaseOutcome::Mismatch(m) => s.mismatches.push(format!("case {i}: {m}")),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_labels() {
        assert_eq!(noise_label(&NoiseModel::default()), ("none".into(), 0.0));
        let n = NoiseModel { loss_rate: 1e-4, ..Default::default() };
        assert_eq!(noise_label(&n), ("loss_rate".into(), 1e-4));
        let n = NoiseModel { p_hole: 0.1, loss_rate: 1e-4, ..Default::default() };
        assert_eq!(noise_label(&n).0, "p_hole+loss_rate");
    }

    #[test]
    fn ideal_gate_outcome() {
        let cfg = ExperimentConfig::parse("[setup]\nlx = 3\nly = 2\nlz = 2\n[input]\nalpha = \"0,0\"\nbeta = \"1,0\"\n").unwrap();
        let o = gate(&cfg).unwrap();
        assert!(o.stats.fidelity_mean > 1.0 - 1e-9);
        let out = o.output.unwrap();
        assert!(out[0].norm() < 1e-9 && out[2].norm() < 1e-9);
        assert!((out[1].norm() - 1.0).abs() < 1e-9);
        assert_eq!(o.record.n_total, 12 + 4 + 2 + 1);
    }

    #[test]
    fn faithful_init_outcome() {
        let cfg = ExperimentConfig::parse("[setup]\nlx = 4\nly = 2\nlz = 2\nplacement = \"faithful\"\n").unwrap();
        let o = init(&cfg).unwrap();
        assert!(o.structures_complete, "{o}");
        assert_eq!(o.summary.recorded_loss, 0.0);
    }

    #[test]
    fn duration_scaling_is_affine() {
        let cfg = ExperimentConfig::parse("[scaling]\nexperiment = \"duration_lx\"\n").unwrap();
        let o = scaling(&cfg, &ScalingRegistry::builtin()).unwrap();
        assert!(o.check.passed, "{o}");
        assert_eq!(o.fit.slope, 4.0);
    }

    #[test]
    fn unknown_scaling_experiment() {
        let cfg = ExperimentConfig::parse("[scaling]\nexperiment = \"nope\"\n").unwrap();
        assert!(matches!(scaling(&cfg, &ScalingRegistry::builtin()), Err(Error::Config(_))));
    }

    #[test]
    fn oracle_check_agrees() {
        let s = oracle_check(30, 5, 1e-12);
        assert!(s.passed(), "{s}");
    }
}
