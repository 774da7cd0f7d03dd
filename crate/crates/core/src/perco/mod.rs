//! Site percolation on the hexagonal faces: sampling, noise, and arm detectors.

mod detect;
mod dynamic;
mod flow;
mod interlaced;
pub(crate) mod pivotal;

pub use detect::{
    has_circuit, has_crossing, has_disjoint_two_black_static, has_four_arm, has_inner_outer_chain, has_one_arm,
    has_separated_arm, ArmSpec, Detector, Direction, Monotonicity, SeparatedVariant, Workspace,
};
pub use dynamic::{has_disjoint_two_arms_dynamic, DynamicDisjoint, Tri};
pub use interlaced::{Interlaced, InterlacedOutcome};
pub use pivotal::{one_arm_pivotals, pivotal_grad};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{HexSet, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Black,
    White,
}

impl Colour {
    pub fn opposite(self) -> Colour {
        match self {
            Colour::Black => Colour::White,
            Colour::White => Colour::Black,
        }
    }

    pub fn is_black(self) -> bool {
        self == Colour::Black
    }

    pub fn letter(self) -> char {
        match self {
            Colour::Black => 'b',
            Colour::White => 'w',
        }
    }
}

/// ChaCha8 keyed by `seed`, positioned on stream `stream`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One colour bit per lattice hexagon; 1 = black.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PercoConfig {
    words: Vec<u64>,
    len: usize,
    tag: u64,
}

impl PercoConfig {
    pub fn uniform(lattice: &Lattice, colour: Colour) -> Self {
        let mut c = PercoConfig { words: vec![0; lattice.len().div_ceil(64)], len: lattice.len(), tag: lattice.fingerprint() };
        if colour.is_black() {
            c.words.iter_mut().for_each(|w| *w = u64::MAX);
            c.mask_tail();
        }
        c
    }

    pub fn from_fn(lattice: &Lattice, mut f: impl FnMut(u32) -> bool) -> Self {
        let mut c = PercoConfig::uniform(lattice, Colour::White);
        for id in 0..lattice.len() as u32 {
            if f(id) {
                c.set(id, true);
            }
        }
        c
    }

    /// Black exactly on `set`.
    pub fn from_set(lattice: &Lattice, set: &HexSet) -> Self {
        PercoConfig::from_fn(lattice, |id| set.contains(id))
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    #[inline]
    pub fn is_black(&self, id: u32) -> bool {
        let i = id as usize;
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn has_colour(&self, id: u32, colour: Colour) -> bool {
        self.is_black(id) == colour.is_black()
    }

    pub fn colour(&self, id: u32) -> Colour {
        if self.is_black(id) {
            Colour::Black
        } else {
            Colour::White
        }
    }

    #[inline]
    pub fn set(&mut self, id: u32, black: bool) {
        let i = id as usize;
        if black {
            self.words[i >> 6] |= 1 << (i & 63);
        } else {
            self.words[i >> 6] &= !(1 << (i & 63));
        }
    }

    pub fn flip(&mut self, id: u32) {
        let i = id as usize;
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    pub fn with(&self, id: u32, black: bool) -> PercoConfig {
        let mut c = self.clone();
        c.set(id, black);
        c
    }

    pub fn complement(&self) -> PercoConfig {
        let mut c = self.clone();
        c.words.iter_mut().for_each(|w| *w = !*w);
        c.mask_tail();
        c
    }

    pub fn black_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn check_same(&self, other: &PercoConfig) -> Result<()> {
        if self.tag != other.tag || self.len != other.len {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }
}

/// Fair iid colours.
pub fn sample<R: RngCore>(lattice: &Lattice, rng: &mut R) -> PercoConfig {
    let mut c = PercoConfig::uniform(lattice, Colour::White);
    c.words.iter_mut().for_each(|w| *w = rng.next_u64());
    c.mask_tail();
    c
}

/// Flips each bit independently with probability t.
pub fn apply_noise<R: Rng>(c: &PercoConfig, t: f64, rng: &mut R) -> Result<PercoConfig> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("noise parameter {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(c.clone());
    }
    if t == 1.0 {
        return Ok(c.complement());
    }
    let mut out = c.clone();
    if t == 0.5 {
        out.words.iter_mut().for_each(|w| *w ^= rng.next_u64());
        out.mask_tail();
        return Ok(out);
    }
    // Geometric gaps between flipped positions.
    let (p, base) = if t < 0.5 { (t, false) } else { (1.0 - t, true) };
    if base {
        out = out.complement();
    }
    let log_q = (1.0 - p).ln();
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.gen();
        let gap = ((1.0 - u).ln() / log_q).floor();
        if !gap.is_finite() || gap >= (out.len - pos) as f64 {
            break;
        }
        pos += gap as usize;
        out.flip(pos as u32);
        pos += 1;
        if pos >= out.len {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let lat = Lattice::with_unit_pitch(6).unwrap();
        let a = sample(&lat, &mut RngStream::new(7, 3).rng());
        let b = sample(&lat, &mut RngStream::new(7, 3).rng());
        let c = sample(&lat, &mut RngStream::new(7, 4).rng());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn black_density_is_fair() {
        let lat = Lattice::with_unit_pitch(60).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let (mut black, mut total) = (0usize, 0usize);
        while total < 1_000_000 {
            let c = sample(&lat, &mut rng);
            black += c.black_count();
            total += c.len();
        }
        let d = black as f64 / total as f64;
        assert!((0.498..=0.502).contains(&d), "density {d}");
    }

    #[test]
    fn noise_endpoints() {
        let lat = Lattice::with_unit_pitch(5).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        let c = sample(&lat, &mut rng);
        assert_eq!(apply_noise(&c, 0.0, &mut rng).unwrap(), c);
        assert_eq!(apply_noise(&c, 1.0, &mut rng).unwrap(), c.complement());
        assert!(apply_noise(&c, 1.5, &mut rng).is_err());
        assert!(apply_noise(&c, -0.1, &mut rng).is_err());
    }

    #[test]
    fn noise_flip_rate() {
        let lat = Lattice::with_unit_pitch(30).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        for t in [0.01, 0.2, 0.5, 0.8] {
            let (mut flips, mut total, mut agree_black) = (0usize, 0usize, 0i64);
            for _ in 0..40 {
                let c = sample(&lat, &mut rng);
                let d = apply_noise(&c, t, &mut rng).unwrap();
                for id in 0..c.len() as u32 {
                    flips += (c.is_black(id) != d.is_black(id)) as usize;
                    agree_black += (c.is_black(id) && d.is_black(id)) as i64;
                }
                total += c.len();
            }
            let rate = flips as f64 / total as f64;
            let se = (t * (1.0 - t) / total as f64).sqrt();
            assert!((rate - t).abs() < 5.0 * se + 1e-9, "t={t} rate={rate}");
            if t == 0.5 {
                let both = agree_black as f64 / total as f64;
                assert!((both - 0.25).abs() < 0.01);
            }
        }
    }
}
