use serde::{Deserialize, Serialize};

use super::detect::{ArmSpec, Detector, Workspace};
use super::{Colour, PercoConfig};
use crate::error::{Error, Result};
use crate::lattice::{coord, standard_regions, HexId, HexSet, Lattice, Region};

/// Both interlaced events for one coupled pair (ω, ω_t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterlacedOutcome {
    /// ω ∈ E_k(x,y) and ω_t ∈ E_k(x,y).
    pub joint: bool,
    /// ω ∈ E^w_k(x,y') and ω_t ∈ E^b_k(x,y') for some y' ∈ H(B′_k).
    pub union: bool,
}

/// Interlaced circuits at scale k: a black circuit in A_+ and a white circuit in A_−.
#[derive(Clone, Debug)]
pub struct Interlaced {
    k: i64,
    black_plus: Detector,
    white_minus: Detector,
    b_set: HexSet,
    b_prime_set: HexSet,
    lat: Lattice,
}

impl Interlaced {
    pub fn new(lat: &Lattice, k: i64) -> Result<Self> {
        if k < 1 || 7 * k > lat.n_max() {
            return Err(Error::InvalidParameter(format!("interlaced scale {k} needs 1 ≤ k and 7k ≤ {}", lat.n_max())));
        }
        let sr = standard_regions(k, 10 * k)?;
        let black_plus = ArmSpec::Circuit { annulus: sr.a_plus.clone(), colour: Colour::Black }.compile(lat)?;
        let white_minus = ArmSpec::Circuit { annulus: sr.a_minus.clone(), colour: Colour::White }.compile(lat)?;
        let b_set = lat.hexes_meeting(&Region::Rect(sr.b_box.clone()))?;
        let b_prime_set = lat.hexes_meeting(&Region::Rect(sr.b_prime.clone()))?;
        Ok(Interlaced { k, black_plus, white_minus, b_set, b_prime_set, lat: lat.clone() })
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn b_hexes(&self) -> &HexSet {
        &self.b_set
    }

    pub fn b_prime_hexes(&self) -> &HexSet {
        &self.b_prime_set
    }

    /// The hexagons containing the centres (−2k, 2k) of B_k and (2k, −2k) of B′_k.
    pub fn centre_pair(&self) -> Result<(HexId, HexId)> {
        let k = self.k;
        let pick = |x: i64, y: i64| -> Result<HexId> {
            let set = self.lat.hexes_meeting(&Region::point(coord(x), coord(y)))?;
            let id = set.iter().next().ok_or_else(|| Error::Geometry("box centre outside lattice".into()))?;
            Ok(self.lat.hex(id))
        };
        Ok((pick(-2 * k, 2 * k)?, pick(2 * k, -2 * k)?))
    }

    fn ids(&self, x: HexId, y: HexId) -> Result<(u32, u32)> {
        let xi = self.lat.id(x).filter(|&i| self.b_set.contains(i));
        let yi = self.lat.id(y).filter(|&i| self.b_prime_set.contains(i));
        match (xi, yi) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Geometry(format!("need x ∈ H(B_k) and y ∈ H(B′_k), got {x:?}, {y:?}"))),
        }
    }

    /// E_k(x,y): black circuit in A_+ for η^{xy} and white circuit in A_− for η_{xy}.
    pub fn event(&self, c: &PercoConfig, x: HexId, y: HexId, ws: &mut Workspace) -> Result<bool> {
        let (xi, yi) = self.ids(x, y)?;
        if c.tag() != self.lat.fingerprint() {
            return Err(Error::LatticeMismatch);
        }
        Ok(self.event_ids(c, xi, yi, ws))
    }

    /// E^σ_k(x,y) = E_k(x,y) ∩ {η(y) = σ}.
    pub fn decorated(&self, c: &PercoConfig, x: HexId, y: HexId, colour: Colour, ws: &mut Workspace) -> Result<bool> {
        let (_, yi) = self.ids(x, y)?;
        Ok(self.event(c, x, y, ws)? && c.has_colour(yi, colour))
    }

    pub(crate) fn event_ids(&self, c: &PercoConfig, xi: u32, yi: u32, ws: &mut Workspace) -> bool {
        let mut up = c.clone();
        up.set(xi, true);
        up.set(yi, true);
        if !self.black_plus.eval(&up, ws) {
            return false;
        }
        let mut down = c.clone();
        down.set(xi, false);
        down.set(yi, false);
        self.white_minus.eval(&down, ws)
    }

    pub fn outcome(&self, w: &PercoConfig, wt: &PercoConfig, x: HexId, y: HexId, ws: &mut Workspace) -> Result<InterlacedOutcome> {
        let (xi, yi) = self.ids(x, y)?;
        w.check_same(wt)?;
        if w.tag() != self.lat.fingerprint() {
            return Err(Error::LatticeMismatch);
        }
        let joint = self.event_ids(w, xi, yi, ws) && self.event_ids(wt, xi, yi, ws);
        Ok(InterlacedOutcome { joint, union: self.union_ids(w, wt, xi, ws) })
    }

    fn union_ids(&self, w: &PercoConfig, wt: &PercoConfig, xi: u32, ws: &mut Workspace) -> bool {
        // Both circuit conditions are monotone in the colour of y, so forcing all of H(B′_k) bounds every candidate.
        let forced = |c: &PercoConfig, black: bool| {
            let mut f = c.clone();
            f.set(xi, black);
            for id in self.b_prime_set.iter() {
                f.set(id, black);
            }
            f
        };
        for c in [w, wt] {
            if !self.black_plus.eval(&forced(c, true), ws) || !self.white_minus.eval(&forced(c, false), ws) {
                return false;
            }
        }
        self.b_prime_set
            .iter()
            .filter(|&y| !w.is_black(y) && wt.is_black(y))
            .any(|y| self.event_ids(w, xi, y, ws) && self.event_ids(wt, xi, y, ws))
    }
}
