//! Monte Carlo over quantum trajectories.
//!
//! Seed splitting: trajectory `t` of a run with seed `s` uses
//! `split_seed(s, [t])`; from that, holes, schedule perturbation, events
//! and the spin measurements of basis input `n` use the sub-seeds
//! `[1]`, `[2]`, `[3, channel index]` and `[4, n]`. Every grid point of a
//! sweep reuses the same run seed, so neighbouring points see correlated
//! noise draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::choreography::{prepared_setup, SetupSpec};
use crate::collective::{collective_basis, gate_fidelity, gate_leakage, CollectiveMode, GateMatrix, ModeProfile};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::primitives::CollisionParams;
use crate::schedule::{EventKind, ExecOptions, Executor, WaitEvent};
use crate::state::SparseState;

use super::{remove_atoms, EventContext, NoiseModel, NoiseRegistry};

const HOLES: u64 = 1;
const PERTURB: u64 = 2;
const EVENTS: u64 = 3;
const MEASURE: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `path` into `seed` with SplitMix64: `h <- mix(h + mix(p))`.
pub fn split_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h.wrapping_add(splitmix64(p))))
}

/// Everything one Monte Carlo run needs.
#[derive(Clone, Debug)]
pub struct TrajectoryConfig {
    pub setup: SetupSpec,
    pub params: CollisionParams,
    pub mode: ModeProfile,
    pub options: ExecOptions,
    pub noise: NoiseModel,
    pub trajectories: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStats {
    pub trajectories: usize,
    pub failed: usize,
    pub fidelity_mean: f64,
    /// Standard error of the mean over per-trajectory fidelities.
    pub fidelity_stderr: f64,
    pub leakage_mean: f64,
    pub recorded_loss_mean: f64,
    pub duration_waits: u64,
    pub duration_time: f64,
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    fidelity: f64,
    leakage: f64,
    recorded_loss: f64,
}

/// Runs `trajectories` independent trajectories. Deterministic noise
/// models are evaluated once and replicated. Trajectories that fail with
/// an error count as failed and are left out of the averages.
pub fn run_trajectories(cfg: &TrajectoryConfig) -> Result<TrajectoryStats> {
    if cfg.trajectories == 0 {
        return Err(Error::Config("trajectory count must be at least 1".into()));
    }
    cfg.noise.validate()?;
    let (state0, setup) = prepared_setup(&cfg.setup, &cfg.params)?;
    let registry = NoiseRegistry::builtin();
    let channels = cfg.noise.active(&registry);
    let schedule0 = setup.gate_schedule(&cfg.params);
    let total_waits = schedule0.waits();
    let mut options = cfg.options.clone();
    options.echo |= cfg.noise.echo;
    for c in &channels {
        c.configure(&cfg.noise, &mut options);
    }
    let stochastic = channels.iter().any(|c| c.stochastic());
    let n_atoms = setup.lattice.n_atoms();

    let run_one = |t: u64| -> Result<Outcome> {
        let seed = split_seed(cfg.seed, &[t]);
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, &[HOLES]));
        let mut holes: Vec<usize> = channels
            .iter()
            .flat_map(|c| c.holes(&cfg.noise, &setup, &mut rng))
            .collect();
        holes.sort_unstable();
        holes.dedup();
        let setup_state = remove_atoms(&state0, &holes);
        let mode = CollectiveMode::from_profile(&cfg.mode, &setup.storage, &setup_state)?;

        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, &[PERTURB]));
        let mut schedule = schedule0.clone();
        for c in &channels {
            c.perturb(&cfg.noise, &mut schedule, n_atoms, &mut rng);
        }

        let ctx = EventContext { n_atoms, total_waits };
        let mut events: Vec<WaitEvent> = channels
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.events(&cfg.noise, &ctx, split_seed(seed, &[EVENTS, i as u64])))
            .filter(|e| holes.binary_search(&e.atom).is_err())
            .collect();
        events.sort_by_key(|e| (e.wait, e.atom));

        // Lost atoms are also missing from the reference, so losing a
        // spectator in |a⟩ costs nothing while losing an excitation does.
        let mut lost: Vec<usize> = events
            .iter()
            .filter(|e| e.kind == EventKind::Loss)
            .map(|e| e.atom)
            .collect();
        lost.sort_unstable();
        lost.dedup();
        let reference_setup = remove_atoms(&setup_state, &lost);
        let lost_sites: Vec<Site> = lost.iter().map(|&id| setup.lattice.home(id)).collect();
        let reference_mode = restrict_mode(&mode, &lost_sites);
        let reference: Vec<Option<SparseState>> = (0..3)
            .map(|n| {
                reference_mode
                    .as_ref()
                    .and_then(|m| collective_basis(&reference_setup, m, n).ok())
                    .or_else(|| (n == 0).then(|| reference_setup.clone()))
            })
            .collect();

        let mut g: GateMatrix = Default::default();
        let mut recorded = 0.0;
        for n in 0..3 {
            let input = collective_basis(&setup_state, &mode, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, &[MEASURE, n as u64]));
            let out = Executor::new(&options)
                .with_events(&events, &mut rng)
                .run(&input, &schedule)?;
            for (m, r) in reference.iter().enumerate() {
                if let Some(r) = r {
                    g[m][n] = r.inner_product(&out);
                }
            }
            recorded += out.recorded_loss();
        }
        Ok(Outcome {
            fidelity: gate_fidelity(&g),
            leakage: gate_leakage(&g),
            recorded_loss: recorded / 3.0,
        })
    };

    let outcomes: Vec<Result<Outcome>> = if stochastic {
        with_thread_cap(|| (0..cfg.trajectories as u64).into_par_iter().map(run_one).collect())
    } else {
        let o = run_one(0)?;
        return Ok(TrajectoryStats {
            trajectories: cfg.trajectories,
            failed: 0,
            fidelity_mean: o.fidelity,
            fidelity_stderr: 0.0,
            leakage_mean: o.leakage,
            recorded_loss_mean: o.recorded_loss,
            duration_waits: total_waits,
            duration_time: total_waits as f64 * cfg.params.t_int,
        });
    };

    let ok: Vec<Outcome> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
    let failed = outcomes.len() - ok.len();
    if ok.is_empty() {
        return Err(outcomes.into_iter().find_map(|o| o.err()).expect("all trajectories failed"));
    }
    let m = ok.len() as f64;
    let mean = ok.iter().map(|o| o.fidelity).sum::<f64>() / m;
    let stderr = if ok.len() > 1 {
        let var = ok.iter().map(|o| (o.fidelity - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(TrajectoryStats {
        trajectories: cfg.trajectories,
        failed,
        fidelity_mean: mean,
        fidelity_stderr: stderr,
        leakage_mean: ok.iter().map(|o| o.leakage).sum::<f64>() / m,
        recorded_loss_mean: ok.iter().map(|o| o.recorded_loss).sum::<f64>() / m,
        duration_waits: total_waits,
        duration_time: total_waits as f64 * cfg.params.t_int,
    })
}

/// Drops `removed` from the mode and renormalizes; `None` if nothing is left.
fn restrict_mode(mode: &CollectiveMode, removed: &[Site]) -> Option<CollectiveMode> {
    if removed.is_empty() {
        return Some(mode.clone());
    }
    let kept: Vec<_> = mode
        .weights()
        .iter()
        .filter(|(s, _)| !removed.contains(s))
        .copied()
        .collect();
    let n = kept.iter().map(|(_, f)| f.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return None;
    }
    CollectiveMode::new(kept.into_iter().map(|(s, f)| (s, f / n))).ok()
}

/// Runs `f` on a pool capped by `SIMGATE_THREADS` when that is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("SIMGATE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choreography::build_setup;
    use crate::collective::effective_gate;

    fn config(noise: NoiseModel, m: usize) -> TrajectoryConfig {
        TrajectoryConfig {
            setup: SetupSpec::ideal(2, 1, 1),
            params: CollisionParams::ideal(),
            mode: ModeProfile::default(),
            options: ExecOptions::default(),
            noise,
            trajectories: m,
            seed: 42,
        }
    }

    #[test]
    fn seed_splitting_separates_streams() {
        assert_ne!(split_seed(1, &[0]), split_seed(1, &[1]));
        assert_ne!(split_seed(1, &[0, 1]), split_seed(1, &[1, 0]));
        assert_eq!(split_seed(9, &[3, 4]), split_seed(9, &[3, 4]));
    }

    #[test]
    fn noiseless_run_reproduces_ideal_report() {
        let cfg = config(NoiseModel::default(), 5);
        let stats = run_trajectories(&cfg).unwrap();
        let (s, setup) = build_setup(&cfg.setup).unwrap();
        let mode = CollectiveMode::from_profile(&cfg.mode, &setup.storage, &s).unwrap();
        let report = effective_gate(&s, &mode, &setup.gate_schedule(&cfg.params), &cfg.params, &cfg.options).unwrap();
        assert_eq!(stats.fidelity_mean, report.fidelity);
        assert_eq!(stats.fidelity_stderr, 0.0);
        assert_eq!(stats.duration_waits, report.duration_waits);
    }

    #[test]
    fn same_seed_same_stats() {
        let noise = NoiseModel { loss_rate: 0.01, ..Default::default() };
        let a = run_trajectories(&config(noise.clone(), 40)).unwrap();
        let b = run_trajectories(&config(noise, 40)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trajectories_rejected() {
        assert!(run_trajectories(&config(NoiseModel::default(), 0)).is_err());
    }
}
