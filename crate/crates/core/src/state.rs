//! Sparse amplitude map over packed configurations.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Key, Lattice};

pub(crate) type AmpMap = HashMap<Key, Complex64, FxBuildHasher>;

/// A pure state stored as `configuration -> amplitude`, plus the
/// probability removed by projective steps (`recorded_loss`) and the mass
/// dropped by explicit pruning (`truncated`).
///
/// The hasher is fixed, so iteration order (and therefore every floating
/// point sum) is a deterministic function of the operation history.
#[derive(Clone, Debug)]
pub struct SparseState {
    lattice: Arc<Lattice>,
    amps: AmpMap,
    recorded_loss: f64,
    truncated: f64,
}

impl SparseState {
    pub fn empty(lattice: Arc<Lattice>) -> Self {
        SparseState {
            lattice,
            amps: AmpMap::default(),
            recorded_loss: 0.0,
            truncated: 0.0,
        }
    }

    /// The basis state `|config⟩`.
    pub fn basis(lattice: Arc<Lattice>, config: &Configuration) -> Result<Self> {
        let key = lattice.encode(config)?;
        let mut s = SparseState::empty(lattice);
        s.amps.insert(key, Complex64::new(1.0, 0.0));
        Ok(s)
    }

    /// Sums `(configuration, amplitude)` pairs into a state.
    pub fn from_entries(
        lattice: Arc<Lattice>,
        entries: impl IntoIterator<Item = (Configuration, Complex64)>,
    ) -> Result<Self> {
        let mut s = SparseState::empty(lattice);
        for (c, a) in entries {
            let key = s.lattice.encode(&c)?;
            s.add_amplitude(key, a);
        }
        Ok(s)
    }

    pub(crate) fn with_map(&self, amps: AmpMap) -> Self {
        SparseState {
            lattice: self.lattice.clone(),
            amps,
            recorded_loss: self.recorded_loss,
            truncated: self.truncated,
        }
    }

    pub(crate) fn map(&self) -> &AmpMap {
        &self.amps
    }

    pub(crate) fn map_mut(&mut self) -> &mut AmpMap {
        &mut self.amps
    }

    pub(crate) fn new_map(&self) -> AmpMap {
        AmpMap::with_capacity_and_hasher(self.amps.len(), FxBuildHasher)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Complex64)> {
        self.amps.iter()
    }

    /// Decoded entries sorted by key, for deterministic inspection.
    pub fn entries(&self) -> Vec<(Configuration, Complex64)> {
        let mut keys: Vec<&Key> = self.amps.keys().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|k| (self.lattice.decode(k), self.amps[k]))
            .collect()
    }

    pub fn amplitude(&self, config: &Configuration) -> Complex64 {
        match self.lattice.encode(config) {
            Ok(k) => self.amps.get(&k).copied().unwrap_or_default(),
            Err(_) => Complex64::default(),
        }
    }

    /// Adds `amp` to the entry at `key`; entries that cancel exactly are removed.
    pub(crate) fn add_amplitude(&mut self, key: Key, amp: Complex64) {
        add_into(&mut self.amps, key, amp);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn recorded_loss(&self) -> f64 {
        self.recorded_loss
    }

    pub(crate) fn add_recorded_loss(&mut self, p: f64) {
        self.recorded_loss += p;
    }

    pub fn truncated(&self) -> f64 {
        self.truncated
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &SparseState) -> Complex64 {
        let (small, large, conj_small) = if self.amps.len() <= other.amps.len() {
            (&self.amps, &other.amps, true)
        } else {
            (&other.amps, &self.amps, false)
        };
        let mut keys: Vec<&Key> = small.keys().collect();
        keys.sort_unstable();
        let mut acc = Complex64::default();
        for k in keys {
            if let Some(b) = large.get(k) {
                let a = small[k];
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    /// Removes entries with `|amp| < tol`. Their mass goes to the truncation
    /// ledger; the state is not renormalized.
    pub fn prune(&self, tol: f64) -> SparseState {
        let mut s = self.clone();
        s.prune_in_place(tol);
        s
    }

    pub fn prune_in_place(&mut self, tol: f64) {
        let mut dropped = 0.0;
        self.amps.retain(|_, a| {
            let n = a.norm();
            if n == 0.0 || n < tol {
                dropped += a.norm_sqr();
                false
            } else {
                true
            }
        });
        self.truncated += dropped;
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in self.amps.values_mut() {
            *a *= c;
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &SparseState, c: Complex64) -> Result<()> {
        if !Arc::ptr_eq(&self.lattice, &other.lattice) && self.lattice != other.lattice {
            return Err(Error::InvalidConfiguration(
                "states live on different lattices".into(),
            ));
        }
        let mut keys: Vec<&Key> = other.amps.keys().collect();
        keys.sort_unstable();
        for k in keys {
            add_into(&mut self.amps, k.clone(), other.amps[k] * c);
        }
        Ok(())
    }

    /// Rescales to unit norm and clears the recorded loss.
    pub fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
        self.recorded_loss = 0.0;
    }
}

pub(crate) fn add_into(map: &mut AmpMap, key: Key, amp: Complex64) {
    use std::collections::hash_map::Entry;
    if amp == Complex64::default() {
        return;
    }
    match map.entry(key) {
        Entry::Occupied(mut e) => {
            let v = *e.get() + amp;
            if v == Complex64::default() {
                e.remove();
            } else {
                *e.get_mut() = v;
            }
        }
        Entry::Vacant(e) => {
            e.insert(amp);
        }
    }
}

/// Free-function form of [`SparseState::inner_product`].
pub fn inner_product(s1: &SparseState, s2: &SparseState) -> Complex64 {
    s1.inner_product(s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Site, Spin, WorldBox};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn lat() -> Arc<Lattice> {
        Arc::new(Lattice::new(WorldBox::symmetric(8), vec![Site::new(0, 0, 0), Site::new(1, 0, 0)]).unwrap())
    }

    fn cfg(s0: Spin, s1: Spin) -> Configuration {
        Configuration::from_atoms(2, [(0, Site::new(0, 0, 0), s0), (1, Site::new(1, 0, 0), s1)])
    }

    #[test]
    fn normalized_state_has_unit_self_overlap() {
        let l = lat();
        let s = SparseState::from_entries(
            l,
            [
                (cfg(Spin::A, Spin::A), Complex64::new(0.6, 0.0)),
                (cfg(Spin::B, Spin::A), Complex64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        assert!((s.inner_product(&s).re - 1.0).abs() < 1e-15);
        assert!(s.inner_product(&s).im.abs() < 1e-15);
    }

    #[test]
    fn distinct_basis_states_are_orthogonal() {
        let l = lat();
        let a = SparseState::basis(l.clone(), &cfg(Spin::A, Spin::A)).unwrap();
        let b = SparseState::basis(l, &cfg(Spin::A, Spin::B)).unwrap();
        assert_eq!(a.inner_product(&b), Complex64::default());
    }

    #[test]
    fn overlap_is_linear() {
        let l = lat();
        let c1 = SparseState::basis(l.clone(), &cfg(Spin::A, Spin::A)).unwrap();
        let sup = SparseState::from_entries(
            l,
            [
                (cfg(Spin::A, Spin::A), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (cfg(Spin::B, Spin::B), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        assert!((c1.inner_product(&sup) - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        // conjugate-linear in the first slot
        let mut ic1 = c1.clone();
        ic1.scale(Complex64::i());
        assert!((ic1.inner_product(&sup) + Complex64::i() * FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn prune_with_zero_tolerance_is_identity() {
        let l = lat();
        let s = SparseState::from_entries(
            l,
            [
                (cfg(Spin::A, Spin::A), Complex64::new(1.0, 0.0)),
                (cfg(Spin::B, Spin::A), Complex64::new(1e-300, 0.0)),
            ],
        )
        .unwrap();
        let p = s.prune(0.0);
        assert_eq!(p.len(), 2);
        assert_eq!(p.truncated(), 0.0);
    }

    #[test]
    fn prune_moves_mass_to_truncation_ledger() {
        let l = lat();
        let mut s = SparseState::from_entries(
            l.clone(),
            [(cfg(Spin::A, Spin::A), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        s.map_mut().insert(l.encode(&cfg(Spin::B, Spin::B)).unwrap(), Complex64::new(1e-16, 0.0));
        s.map_mut().insert(l.encode(&cfg(Spin::A, Spin::B)).unwrap(), Complex64::default());
        let p = s.prune(1e-12);
        assert_eq!(p.len(), 1);
        assert!((p.truncated() - 1e-32).abs() < 1e-45);
        assert_eq!(p.recorded_loss(), 0.0);
        assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
    }
}
