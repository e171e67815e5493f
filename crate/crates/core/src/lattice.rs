//! Lattice geometry: sites, spins, axes, addressable regions and the
//! bit-packed configuration encoding used as the sparse-state key.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Site {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Site { x, y, z }
    }

    pub fn coord(self, c: Coord) -> i32 {
        match c {
            Coord::X => self.x,
            Coord::Y => self.y,
            Coord::Z => self.z,
        }
    }

    /// Translates the site by `distance` lattice spacings along `axis`.
    pub fn step(self, axis: Axis, distance: i32) -> Site {
        let (dx, dy, dz) = axis.unit();
        Site::new(
            self.x + dx * distance,
            self.y + dy * distance,
            self.z + dz * distance,
        )
    }

    pub fn minus(self, other: Site) -> Site {
        Site::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn plus(self, other: Site) -> Site {
        Site::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// Internal atomic state: `A` is |a⟩, `B` is |b⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    A,
    B,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::A => Spin::B,
            Spin::B => Spin::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Spin::A => 0,
            Spin::B => 1,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::A => "a",
            Spin::B => "b",
        })
    }
}

impl FromStr for Spin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Spin::A),
            "b" | "B" => Ok(Spin::B),
            _ => Err(Error::Config(format!("unknown spin '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    X,
    Y,
    Z,
}

impl Coord {
    pub const ALL: [Coord; 3] = [Coord::X, Coord::Y, Coord::Z];
}

/// A signed lattice direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusZ,
    MinusZ,
}

impl Axis {
    pub fn unit(self) -> (i32, i32, i32) {
        match self {
            Axis::PlusX => (1, 0, 0),
            Axis::MinusX => (-1, 0, 0),
            Axis::PlusY => (0, 1, 0),
            Axis::MinusY => (0, -1, 0),
            Axis::PlusZ => (0, 0, 1),
            Axis::MinusZ => (0, 0, -1),
        }
    }

    pub fn reverse(self) -> Axis {
        match self {
            Axis::PlusX => Axis::MinusX,
            Axis::MinusX => Axis::PlusX,
            Axis::PlusY => Axis::MinusY,
            Axis::MinusY => Axis::PlusY,
            Axis::PlusZ => Axis::MinusZ,
            Axis::MinusZ => Axis::PlusZ,
        }
    }

    pub fn coord(self) -> Coord {
        match self {
            Axis::PlusX | Axis::MinusX => Coord::X,
            Axis::PlusY | Axis::MinusY => Coord::Y,
            Axis::PlusZ | Axis::MinusZ => Coord::Z,
        }
    }

    /// Returns the axis pointing from `from` to `to` and the distance, if
    /// both sites lie on a common lattice line.
    pub fn between(from: Site, to: Site) -> Option<(Axis, i32)> {
        let d = to.minus(from);
        match (d.x, d.y, d.z) {
            (x, 0, 0) if x > 0 => Some((Axis::PlusX, x)),
            (x, 0, 0) if x < 0 => Some((Axis::MinusX, -x)),
            (0, y, 0) if y > 0 => Some((Axis::PlusY, y)),
            (0, y, 0) if y < 0 => Some((Axis::MinusY, -y)),
            (0, 0, z) if z > 0 => Some((Axis::PlusZ, z)),
            (0, 0, z) if z < 0 => Some((Axis::MinusZ, -z)),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::PlusX => "+x",
            Axis::MinusX => "-x",
            Axis::PlusY => "+y",
            Axis::MinusY => "-y",
            Axis::PlusZ => "+z",
            Axis::MinusZ => "-z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "+x" | "x" => Axis::PlusX,
            "-x" => Axis::MinusX,
            "+y" | "y" => Axis::PlusY,
            "-y" => Axis::MinusY,
            "+z" | "z" => Axis::PlusZ,
            "-z" => Axis::MinusZ,
            _ => return Err(Error::Config(format!("unknown axis '{s}'"))),
        })
    }
}

/// Inclusive integer interval with optional ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<i32>,
    pub hi: Option<i32>,
}

impl Interval {
    pub const ANY: Interval = Interval { lo: None, hi: None };

    pub fn new(lo: Option<i32>, hi: Option<i32>) -> Self {
        Interval { lo, hi }
    }

    pub fn exactly(v: i32) -> Self {
        Interval::new(Some(v), Some(v))
    }

    /// Half-open range `[lo, hi)` in the usual Rust sense.
    pub fn range(lo: i32, hi_exclusive: i32) -> Self {
        Interval::new(Some(lo), Some(hi_exclusive - 1))
    }

    pub fn at_least(v: i32) -> Self {
        Interval::new(Some(v), None)
    }

    pub fn below(v: i32) -> Self {
        Interval::new(None, Some(v - 1))
    }

    pub fn contains(&self, v: i32) -> bool {
        self.lo.is_none_or(|lo| v >= lo) && self.hi.is_none_or(|hi| v <= hi)
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if lo > hi)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Interval { lo, hi }
    }
}

/// Axis-aligned box with optional bounds per axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BoxRegion {
    pub x: Interval,
    pub y: Interval,
    pub z: Interval,
}

impl BoxRegion {
    pub fn new(x: Interval, y: Interval, z: Interval) -> Self {
        BoxRegion { x, y, z }
    }

    pub fn site(s: Site) -> Self {
        BoxRegion::new(
            Interval::exactly(s.x),
            Interval::exactly(s.y),
            Interval::exactly(s.z),
        )
    }

    pub fn contains(&self, s: Site) -> bool {
        self.x.contains(s.x) && self.y.contains(s.y) && self.z.contains(s.z)
    }

    pub fn intersects(&self, other: &BoxRegion) -> bool {
        !self.x.intersect(&other.x).is_empty()
            && !self.y.intersect(&other.y).is_empty()
            && !self.z.intersect(&other.z).is_empty()
    }

    fn interval(&self, c: Coord) -> &Interval {
        match c {
            Coord::X => &self.x,
            Coord::Y => &self.y,
            Coord::Z => &self.z,
        }
    }
}

/// Union of boxes. Pulses and phases address regions, never single atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Region {
    boxes: Vec<BoxRegion>,
}

impl Region {
    pub fn empty() -> Self {
        Region { boxes: Vec::new() }
    }

    pub fn all() -> Self {
        Region::from(BoxRegion::default())
    }

    pub fn from_boxes(boxes: Vec<BoxRegion>) -> Self {
        Region { boxes }
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn union(mut self, other: &Region) -> Region {
        self.boxes.extend_from_slice(&other.boxes);
        self
    }

    pub fn contains(&self, s: Site) -> bool {
        self.boxes.iter().any(|b| b.contains(s))
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.boxes
            .iter()
            .any(|a| other.boxes.iter().any(|b| a.intersects(b)))
    }
}

impl From<BoxRegion> for Region {
    fn from(b: BoxRegion) -> Self {
        Region { boxes: vec![b] }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return f.write_str("none");
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            let mut any = false;
            for (c, name) in Coord::ALL.iter().zip(["x", "y", "z"]) {
                let iv = b.interval(*c);
                if iv.lo.is_none() && iv.hi.is_none() {
                    continue;
                }
                any = true;
                let lo = iv.lo.map(|v| v.to_string()).unwrap_or_default();
                let hi = iv.hi.map(|v| v.to_string()).unwrap_or_default();
                write!(f, "{name}[{lo},{hi}]")?;
            }
            if !any {
                f.write_str("*")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Region {
    type Err = Error;

    /// Parses `x[0,3]y[,-1]|z[2,]`, `*` (everything) or `none`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Region::empty());
        }
        let bad = || Error::Config(format!("malformed region '{s}'"));
        let mut boxes = Vec::new();
        for part in s.split('|') {
            let mut b = BoxRegion::default();
            let mut rest = part.trim();
            if rest == "*" {
                boxes.push(b);
                continue;
            }
            while !rest.is_empty() {
                let (name, tail) = rest.split_at(1);
                let tail = tail.strip_prefix('[').ok_or_else(bad)?;
                let close = tail.find(']').ok_or_else(bad)?;
                let (lo, hi) = tail[..close].split_once(',').ok_or_else(bad)?;
                let parse = |t: &str| -> Result<Option<i32>> {
                    let t = t.trim();
                    if t.is_empty() {
                        Ok(None)
                    } else {
                        t.parse().map(Some).map_err(|_| bad())
                    }
                };
                let iv = Interval::new(parse(lo)?, parse(hi)?);
                match name {
                    "x" => b.x = iv,
                    "y" => b.y = iv,
                    "z" => b.z = iv,
                    _ => return Err(bad()),
                }
                rest = &tail[close + 1..];
            }
            boxes.push(b);
        }
        Ok(Region { boxes })
    }
}

/// Closed bounding box every atom must stay inside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorldBox {
    pub min: Site,
    pub max: Site,
}

impl WorldBox {
    pub fn new(min: Site, max: Site) -> Self {
        WorldBox { min, max }
    }

    /// A cube `[-half, half]^3`.
    pub fn symmetric(half: i32) -> Self {
        WorldBox::new(Site::new(-half, -half, -half), Site::new(half, half, half))
    }

    pub fn contains(&self, s: Site) -> bool {
        (self.min.x..=self.max.x).contains(&s.x)
            && (self.min.y..=self.max.y).contains(&s.y)
            && (self.min.z..=self.max.z).contains(&s.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AtomState {
    pub site: Site,
    pub spin: Spin,
}

impl AtomState {
    pub fn new(site: Site, spin: Spin) -> Self {
        AtomState { site, spin }
    }
}

/// Classical placement of every atom, indexed by atom identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    atoms: Vec<Option<AtomState>>,
}

impl Configuration {
    /// All `n` atoms absent.
    pub fn vacant(n: usize) -> Self {
        Configuration {
            atoms: vec![None; n],
        }
    }

    /// Builds a configuration from `(id, site, spin)` triples in any order.
    pub fn from_atoms(n: usize, atoms: impl IntoIterator<Item = (usize, Site, Spin)>) -> Self {
        let mut c = Configuration::vacant(n);
        for (id, site, spin) in atoms {
            c.atoms[id] = Some(AtomState::new(site, spin));
        }
        c
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<AtomState> {
        self.atoms[id]
    }

    pub fn set(&mut self, id: usize, atom: Option<AtomState>) {
        self.atoms[id] = atom;
    }

    /// Present atoms as `(id, state)`.
    pub fn present(&self) -> impl Iterator<Item = (usize, AtomState)> + '_ {
        self.atoms
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|a| (i, a)))
    }

    pub fn count_spin(&self, spin: Spin) -> usize {
        self.present().filter(|(_, a)| a.spin == spin).count()
    }

    /// Finds the atom sitting at `site`, if any.
    pub fn atom_at(&self, site: Site) -> Option<usize> {
        self.present().find(|(_, a)| a.site == site).map(|(i, _)| i)
    }

    /// First site holding two atoms, if any.
    pub fn duplicate_site(&self) -> Option<Site> {
        let mut sites: Vec<Site> = self.present().map(|(_, a)| a.site).collect();
        sites.sort_unstable();
        sites.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
    }
}

/// Sparse-state key: packed per-atom fields.
pub type Key = Box<[u64]>;

const COORD_BITS_MAX: u32 = 20;

/// Atom table and key layout shared by every state over the same lattice.
///
/// Each atom owns one fixed-width field `present | spin | x | y | z`, with
/// coordinates stored relative to the world-box minimum. Absent atoms are
/// all-zero fields, so the key is a pure function of the configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    world: WorldBox,
    homes: Vec<Site>,
    coord_bits: [u32; 3],
    field_width: u32,
    words: usize,
}

fn bits_for(span: u32) -> u32 {
    (32 - span.leading_zeros()).max(1)
}

impl Lattice {
    pub fn new(world: WorldBox, homes: Vec<Site>) -> Result<Self> {
        let span = |lo: i32, hi: i32| -> Result<u32> {
            if hi < lo {
                return Err(Error::Setup("empty world box".into()));
            }
            let b = bits_for((hi - lo) as u32);
            if b > COORD_BITS_MAX {
                return Err(Error::Setup("world box too large".into()));
            }
            Ok(b)
        };
        let coord_bits = [
            span(world.min.x, world.max.x)?,
            span(world.min.y, world.max.y)?,
            span(world.min.z, world.max.z)?,
        ];
        for h in &homes {
            if !world.contains(*h) {
                return Err(Error::OutOfBounds(*h));
            }
        }
        let field_width = 2 + coord_bits.iter().sum::<u32>();
        let words = (homes.len() * field_width as usize).div_ceil(64).max(1);
        Ok(Lattice {
            world,
            homes,
            coord_bits,
            field_width,
            words,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.homes.len()
    }

    pub fn home(&self, id: usize) -> Site {
        self.homes[id]
    }

    pub fn homes(&self) -> &[Site] {
        &self.homes
    }

    pub fn world(&self) -> WorldBox {
        self.world
    }

    pub fn key_words(&self) -> usize {
        self.words
    }

    /// The key of the configuration with every atom absent.
    pub fn empty_key(&self) -> Key {
        vec![0u64; self.words].into_boxed_slice()
    }

    /// Canonical encoding. Fails on double occupancy or out-of-world sites.
    pub fn encode(&self, config: &Configuration) -> Result<Key> {
        if config.len() != self.n_atoms() {
            return Err(Error::InvalidConfiguration(format!(
                "configuration has {} atoms, lattice has {}",
                config.len(),
                self.n_atoms()
            )));
        }
        if let Some(site) = config.duplicate_site() {
            return Err(Error::InvalidConfiguration(format!(
                "two atoms occupy site {site}"
            )));
        }
        let mut key = self.empty_key();
        for (id, atom) in config.present() {
            if !self.world.contains(atom.site) {
                return Err(Error::OutOfBounds(atom.site));
            }
            self.set_atom(&mut key, id, Some(atom));
        }
        Ok(key)
    }

    pub fn decode(&self, key: &[u64]) -> Configuration {
        Configuration {
            atoms: (0..self.n_atoms()).map(|id| self.atom(key, id)).collect(),
        }
    }

    /// Reads one atom's field directly from a key.
    #[inline]
    pub fn atom(&self, key: &[u64], id: usize) -> Option<AtomState> {
        let field = get_bits(key, id * self.field_width as usize, self.field_width);
        if field & 1 == 0 {
            return None;
        }
        let spin = if field & 2 == 0 { Spin::A } else { Spin::B };
        let [bx, by, bz] = self.coord_bits;
        let mut rest = field >> 2;
        let x = (rest & mask(bx)) as i32 + self.world.min.x;
        rest >>= bx;
        let y = (rest & mask(by)) as i32 + self.world.min.y;
        rest >>= by;
        let z = (rest & mask(bz)) as i32 + self.world.min.z;
        Some(AtomState::new(Site::new(x, y, z), spin))
    }

    /// Writes one atom's field. The site must lie in the world box.
    #[inline]
    pub fn set_atom(&self, key: &mut [u64], id: usize, atom: Option<AtomState>) {
        let field = match atom {
            None => 0,
            Some(a) => {
                debug_assert!(self.world.contains(a.site));
                let [bx, by, _] = self.coord_bits;
                let x = (a.site.x - self.world.min.x) as u64;
                let y = (a.site.y - self.world.min.y) as u64;
                let z = (a.site.z - self.world.min.z) as u64;
                let coords = x | (y << bx) | (z << (bx + by));
                1 | ((a.spin == Spin::B) as u64) << 1 | coords << 2
            }
        };
        set_bits(key, id * self.field_width as usize, self.field_width, field);
    }

    /// Flips the spin bit of a present atom in place.
    #[inline]
    pub fn set_spin(&self, key: &mut [u64], id: usize, spin: Spin) {
        let off = id * self.field_width as usize + 1;
        set_bits(key, off, 1, (spin == Spin::B) as u64);
    }
}

#[inline]
fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[inline]
fn get_bits(words: &[u64], offset: usize, width: u32) -> u64 {
    let idx = offset / 64;
    let sh = (offset % 64) as u32;
    let mut v = words[idx] >> sh;
    if sh + width > 64 {
        v |= words[idx + 1] << (64 - sh);
    }
    v & mask(width)
}

#[inline]
fn set_bits(words: &mut [u64], offset: usize, width: u32, value: u64) {
    let idx = offset / 64;
    let sh = (offset % 64) as u32;
    let m = mask(width);
    words[idx] = (words[idx] & !(m << sh)) | ((value & m) << sh);
    if sh + width > 64 {
        let spill = 64 - sh;
        let hm = m >> spill;
        words[idx + 1] = (words[idx + 1] & !hm) | ((value & m) >> spill);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lattice(n: usize) -> Lattice {
        let homes = (0..n).map(|i| Site::new(i as i32, 0, 0)).collect();
        Lattice::new(WorldBox::symmetric(40), homes).unwrap()
    }

    #[test]
    fn empty_configuration_has_fixed_encoding() {
        let lat = lattice(5);
        let key = lat.encode(&Configuration::vacant(5)).unwrap();
        assert_eq!(key, lat.empty_key());
        assert!(key.iter().all(|w| *w == 0));
    }

    #[test]
    fn encoding_ignores_enumeration_order() {
        let lat = lattice(3);
        let atoms = [
            (0, Site::new(1, 2, 3), Spin::A),
            (1, Site::new(-4, 0, 7), Spin::B),
            (2, Site::new(0, 0, 0), Spin::A),
        ];
        let fwd = Configuration::from_atoms(3, atoms);
        let rev = Configuration::from_atoms(3, atoms.iter().rev().copied());
        assert_eq!(lat.encode(&fwd).unwrap(), lat.encode(&rev).unwrap());
    }

    #[test]
    fn spin_difference_changes_encoding() {
        let lat = lattice(2);
        let a = Configuration::from_atoms(2, [(0, Site::new(0, 0, 0), Spin::A)]);
        let b = Configuration::from_atoms(2, [(0, Site::new(0, 0, 0), Spin::B)]);
        assert_ne!(lat.encode(&a).unwrap(), lat.encode(&b).unwrap());
    }

    #[test]
    fn duplicate_occupancy_is_rejected() {
        let lat = lattice(2);
        let c = Configuration::from_atoms(
            2,
            [(0, Site::new(1, 1, 1), Spin::A), (1, Site::new(1, 1, 1), Spin::B)],
        );
        assert!(matches!(lat.encode(&c), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn out_of_world_is_rejected() {
        let lat = lattice(1);
        let c = Configuration::from_atoms(1, [(0, Site::new(41, 0, 0), Spin::A)]);
        assert!(matches!(lat.encode(&c), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn region_text_round_trip() {
        for text in ["x[0,3]y[,-1]", "*", "none", "x[5,5]y[0,]z[,1]|z[2,]"] {
            let r: Region = text.parse().unwrap();
            assert_eq!(r.to_string(), text);
        }
        let r: Region = "x[0,3]".parse().unwrap();
        assert!(r.contains(Site::new(3, -100, 9)));
        assert!(!r.contains(Site::new(4, 0, 0)));
    }

    #[test]
    fn box_intersection() {
        let plane = BoxRegion::new(Interval::exactly(5), Interval::at_least(0), Interval::below(2));
        let line = BoxRegion::new(Interval::exactly(5), Interval::below(0), Interval::below(2));
        let dot = BoxRegion::new(Interval::exactly(5), Interval::below(0), Interval::at_least(2));
        assert!(!plane.intersects(&line));
        assert!(!line.intersects(&dot));
        assert!(!plane.intersects(&dot));
        assert!(plane.intersects(&BoxRegion::default()));
    }

    fn arb_config(n: usize) -> impl Strategy<Value = Configuration> {
        proptest::collection::vec(
            proptest::option::of((-40i32..=40, -40i32..=40, -40i32..=40, any::<bool>())),
            n,
        )
        .prop_filter_map("distinct sites", move |atoms| {
            let c = Configuration::from_atoms(
                n,
                atoms.into_iter().enumerate().filter_map(|(i, a)| {
                    a.map(|(x, y, z, b)| (i, Site::new(x, y, z), if b { Spin::B } else { Spin::A }))
                }),
            );
            c.duplicate_site().is_none().then_some(c)
        })
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(c in arb_config(23)) {
            let lat = lattice(23);
            let key = lat.encode(&c).unwrap();
            prop_assert_eq!(lat.decode(&key), c);
        }
    }
}
