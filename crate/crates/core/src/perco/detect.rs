use serde::{Deserialize, Serialize};

use super::flow;
use super::{Colour, PercoConfig};
use crate::error::{Error, Result};
use crate::lattice::{coord, standard_regions, HexSet, Lattice, Rect, Region, NO_HEX};

/// Reusable scratch buffers for the graph searches.
#[derive(Debug, Default)]
pub struct Workspace {
    mark: Vec<u32>,
    epoch: u32,
    pub(crate) queue: Vec<u32>,
    pub(crate) flow: flow::FlowScratch,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace::default()
    }

    /// Starts a fresh marking round over `len` ids.
    pub(crate) fn begin(&mut self, len: usize) -> u32 {
        if self.mark.len() < len {
            self.mark.resize(len, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.queue.clear();
        self.epoch
    }

    #[inline]
    pub(crate) fn marked(&self, id: u32) -> bool {
        self.mark[id as usize] == self.epoch
    }

    #[inline]
    pub(crate) fn set_mark(&mut self, id: u32) {
        self.mark[id as usize] = self.epoch;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeftRight,
    BottomTop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatedVariant {
    /// Path in R to the bottom of R plus a path in S from ∂Λ_{6k} to ∂Λ_n.
    Long,
    /// Path in R to the bottom of R only.
    Short,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

/// A static arm event, in lattice length units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmSpec {
    OriginColour { colour: Colour },
    /// A_n(σ): σ-chain from a face meeting the origin face to ∂Λ_n.
    OneArm { colour: Colour, n: i64 },
    /// A_n(b) ∩ A_n(w).
    TwoArmPoly { n: i64 },
    /// Alternating four arms across Λ_{k,n}; `k = 0` starts at the origin face.
    FourArm { k: i64, n: i64 },
    Crossing { rect: Rect, dir: Direction, colour: Colour },
    /// σ-circuit in the annulus surrounding its hole.
    Circuit { annulus: Region, colour: Colour },
    Separated { colour: Colour, k: i64, n: i64, variant: SeparatedVariant },
    /// A_n(b) ∘ A_n(b) in a single configuration.
    DisjointTwoBlack { n: i64 },
}

impl ArmSpec {
    pub fn monotonicity(&self) -> Monotonicity {
        let by_colour = |c: &Colour| match c {
            Colour::Black => Monotonicity::Increasing,
            Colour::White => Monotonicity::Decreasing,
        };
        match self {
            ArmSpec::OriginColour { colour }
            | ArmSpec::OneArm { colour, .. }
            | ArmSpec::Crossing { colour, .. }
            | ArmSpec::Circuit { colour, .. }
            | ArmSpec::Separated { colour, .. } => by_colour(colour),
            ArmSpec::DisjointTwoBlack { .. } => Monotonicity::Increasing,
            ArmSpec::TwoArmPoly { .. } | ArmSpec::FourArm { .. } => Monotonicity::Neither,
        }
    }

    /// The same event with colours exchanged, where that is again an `ArmSpec`.
    pub fn colour_swapped(&self) -> Option<ArmSpec> {
        let mut s = self.clone();
        match &mut s {
            ArmSpec::OriginColour { colour }
            | ArmSpec::OneArm { colour, .. }
            | ArmSpec::Crossing { colour, .. }
            | ArmSpec::Circuit { colour, .. } => *colour = colour.opposite(),
            ArmSpec::TwoArmPoly { .. } | ArmSpec::FourArm { .. } => {}
            ArmSpec::Separated { .. } | ArmSpec::DisjointTwoBlack { .. } => return None,
        }
        Some(s)
    }

    pub fn compile(&self, lat: &Lattice) -> Result<Detector> {
        let kind = match self {
            ArmSpec::OriginColour { colour } => Kind::OriginColour(*colour),
            ArmSpec::OneArm { colour, n } => Kind::Chains(vec![(*colour, origin_chain(lat, *n)?)]),
            ArmSpec::TwoArmPoly { n } => {
                let ch = origin_chain(lat, *n)?;
                Kind::Chains(vec![(Colour::Black, ch.clone()), (Colour::White, ch)])
            }
            ArmSpec::FourArm { k, n } => Kind::FourArm(four_arm_ring(lat, *k, *n)?),
            ArmSpec::Crossing { rect, dir, colour } => Kind::Chains(vec![(*colour, crossing_chain(lat, rect, *dir)?)]),
            ArmSpec::Circuit { annulus, colour } => Kind::Circuit(*colour, annulus_ring(lat, annulus)?),
            ArmSpec::Separated { colour, k, n, variant } => {
                Kind::Chains(separated_chains(lat, *colour, *k, *n, *variant)?.into_iter().map(|c| (*colour, c)).collect())
            }
            ArmSpec::DisjointTwoBlack { n } => Kind::DisjointTwoBlack(origin_chain(lat, *n)?),
        };
        Ok(Detector { lat: lat.clone(), kind })
    }
}

/// Allowed region, start faces, and target faces of a confined chain.
#[derive(Clone, Debug)]
pub(crate) struct Chain {
    pub allowed: HexSet,
    pub sources: Vec<u32>,
    pub targets: HexSet,
}

/// Topological annulus S with its inner ring (faces next to the hole) and outer ring.
#[derive(Clone, Debug)]
pub(crate) struct Ring {
    pub s: HexSet,
    pub inner: Vec<u32>,
    pub outer: HexSet,
}

#[derive(Clone, Debug)]
enum Kind {
    OriginColour(Colour),
    Chains(Vec<(Colour, Chain)>),
    FourArm(Ring),
    Circuit(Colour, Ring),
    DisjointTwoBlack(Chain),
}

/// A compiled arm event bound to a lattice.
#[derive(Clone, Debug)]
pub struct Detector {
    lat: Lattice,
    kind: Kind,
}

impl Detector {
    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn eval(&self, c: &PercoConfig, ws: &mut Workspace) -> bool {
        debug_assert_eq!(c.len(), self.lat.len());
        match &self.kind {
            Kind::OriginColour(colour) => c.has_colour(self.lat.origin(), *colour),
            Kind::Chains(chains) => {
                chains.iter().all(|(colour, ch)| chain_exists(&self.lat, c, *colour, ch, None, ws))
            }
            Kind::FourArm(ring) => {
                crossing_clusters(&self.lat, c, Colour::Black, ring, 2, ws) >= 2
                    && crossing_clusters(&self.lat, c, Colour::White, ring, 2, ws) >= 2
            }
            Kind::Circuit(colour, ring) => !ring_crossed(&self.lat, c, colour.opposite(), ring, ws),
            Kind::DisjointTwoBlack(ch) => flow::two_disjoint_arms(&self.lat, c, ch, ws),
        }
    }

    pub fn try_eval(&self, c: &PercoConfig, ws: &mut Workspace) -> Result<bool> {
        if c.tag() != self.lat.fingerprint() || c.len() != self.lat.len() {
            return Err(Error::LatticeMismatch);
        }
        Ok(self.eval(c, ws))
    }

    /// The single confined chain behind a one-arm or crossing detector.
    pub(crate) fn single_chain(&self) -> Option<(Colour, &Chain)> {
        match &self.kind {
            Kind::Chains(v) if v.len() == 1 => Some((v[0].0, &v[0].1)),
            Kind::DisjointTwoBlack(ch) => Some((Colour::Black, ch)),
            _ => None,
        }
    }

    /// Faces on which the event can depend.
    pub fn support(&self) -> HexSet {
        match &self.kind {
            Kind::OriginColour(_) => self.lat.set_of([self.lat.origin()]),
            Kind::Chains(v) => v.iter().fold(self.lat.empty_set(), |acc, (_, ch)| acc.union(&ch.allowed)),
            Kind::FourArm(r) | Kind::Circuit(_, r) => r.s.clone(),
            Kind::DisjointTwoBlack(ch) => ch.allowed.clone(),
        }
    }
}

fn check_scale(lat: &Lattice, n: i64) -> Result<()> {
    if n < 1 || n > lat.n_max() {
        return Err(Error::InvalidParameter(format!("scale {n} outside 1..={}", lat.n_max())));
    }
    Ok(())
}

pub(crate) fn origin_chain(lat: &Lattice, n: i64) -> Result<Chain> {
    check_scale(lat, n)?;
    let allowed = lat.hexes_meeting(&Region::boxed(n)?)?;
    let targets = lat.hexes_meeting(&Region::boundary(n)?)?;
    let sources = lat.origin_star().into_iter().filter(|&h| allowed.contains(h)).collect();
    Ok(Chain { allowed, sources, targets })
}

fn crossing_chain(lat: &Lattice, rect: &Rect, dir: Direction) -> Result<Chain> {
    let allowed = lat.hexes_meeting(&Region::Rect(rect.clone()))?;
    let (from, to) = match dir {
        Direction::LeftRight => (rect.left(), rect.right()),
        Direction::BottomTop => (rect.bottom(), rect.top()),
    };
    let sources = lat.hexes_meeting(&Region::Rect(from))?.iter().collect();
    let targets = lat.hexes_meeting(&Region::Rect(to))?;
    Ok(Chain { allowed, sources, targets })
}

fn separated_chains(lat: &Lattice, colour: Colour, k: i64, n: i64, variant: SeparatedVariant) -> Result<Vec<Chain>> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("separation scale {k} must be ≥ 1")));
    }
    let r = Rect::ints(-k, k, -3 * k, k)?;
    let (r, end) = match colour {
        Colour::Black => (r.clone(), r.bottom()),
        Colour::White => (r.negate(), r.negate().top()),
    };
    let allowed = lat.hexes_meeting(&Region::Rect(r))?;
    let sources = lat.origin_star().into_iter().filter(|&h| allowed.contains(h)).collect();
    let targets = lat.hexes_meeting(&Region::Rect(end))?;
    let mut chains = vec![Chain { allowed, sources, targets }];
    if variant == SeparatedVariant::Long {
        let sr = standard_regions(k, n)?;
        let s = if colour.is_black() { sr.s } else { sr.neg_s };
        let allowed = lat.hexes_meeting(&s)?;
        let sources = lat.hexes_meeting(&Region::boundary(6 * k)?)?.intersection(&allowed).iter().collect();
        let targets = lat.hexes_meeting(&Region::boundary(n)?)?;
        chains.push(Chain { allowed, sources, targets });
    }
    Ok(chains)
}

fn build_ring(lat: &Lattice, s: HexSet, hole: &HexSet) -> Result<Ring> {
    let mut inner = Vec::new();
    let mut outer = lat.empty_set();
    for h in s.iter() {
        let nb = lat.nbr_ids(h);
        if nb.iter().any(|&g| g != NO_HEX && hole.contains(g)) {
            inner.push(h);
        }
        if nb.iter().any(|&g| g == NO_HEX || (!s.contains(g) && !hole.contains(g))) {
            outer.insert(h);
        }
    }
    if inner.is_empty() {
        return Err(Error::Geometry("annulus hole contains no hexagon".into()));
    }
    Ok(Ring { s, inner, outer })
}

pub(crate) fn annulus_ring(lat: &Lattice, annulus: &Region) -> Result<Ring> {
    let Region::Annulus { cx, cy, inner, .. } = annulus else {
        return Err(Error::Geometry("circuit region must be an annulus".into()));
    };
    let s = lat.hexes_meeting(annulus)?;
    let hole = lat.hexes_meeting(&Region::Rect(Rect::square(*cx, *cy, *inner)?))?.difference(&s);
    build_ring(lat, s, &hole)
}

fn four_arm_ring(lat: &Lattice, k: i64, n: i64) -> Result<Ring> {
    check_scale(lat, n)?;
    if k < 0 || k >= n {
        return Err(Error::InvalidParameter(format!("four-arm scales need 0 ≤ k < n, got {k}, {n}")));
    }
    if k == 0 {
        let mut s = lat.hexes_meeting(&Region::boxed(n)?)?;
        s.remove(lat.origin());
        let hole = lat.set_of([lat.origin()]);
        build_ring(lat, s, &hole)
    } else {
        annulus_ring(lat, &Region::translated_annulus(coord(0), coord(0), coord(k), coord(n))?)
    }
}

/// BFS over `colour` faces of `ch.allowed` (minus `blocked`) from the sources; stops at a target.
pub(crate) fn chain_exists(
    lat: &Lattice,
    c: &PercoConfig,
    colour: Colour,
    ch: &Chain,
    blocked: Option<&HexSet>,
    ws: &mut Workspace,
) -> bool {
    ws.begin(lat.len());
    let open = |h: u32| c.has_colour(h, colour) && ch.allowed.contains(h) && blocked.is_none_or(|b| !b.contains(h));
    for &s in &ch.sources {
        if open(s) && !ws.marked(s) {
            if ch.targets.contains(s) {
                return true;
            }
            ws.set_mark(s);
            ws.queue.push(s);
        }
    }
    let mut head = 0;
    while head < ws.queue.len() {
        let h = ws.queue[head];
        head += 1;
        for &g in lat.nbr_ids(h) {
            if g != NO_HEX && !ws.marked(g) && open(g) {
                if ch.targets.contains(g) {
                    return true;
                }
                ws.set_mark(g);
                ws.queue.push(g);
            }
        }
    }
    false
}

/// A `colour` chain inside the ring from its inner to its outer boundary.
fn ring_crossed(lat: &Lattice, c: &PercoConfig, colour: Colour, ring: &Ring, ws: &mut Workspace) -> bool {
    let ch = Chain { allowed: ring.s.clone(), sources: ring.inner.clone(), targets: ring.outer.clone() };
    chain_exists(lat, c, colour, &ch, None, ws)
}

/// Number of distinct `colour` clusters of S joining the inner and outer rings, capped at `cap`.
fn crossing_clusters(lat: &Lattice, c: &PercoConfig, colour: Colour, ring: &Ring, cap: usize, ws: &mut Workspace) -> usize {
    ws.begin(lat.len());
    let mut count = 0;
    for &start in &ring.inner {
        if ws.marked(start) || !c.has_colour(start, colour) {
            continue;
        }
        ws.set_mark(start);
        let base = ws.queue.len();
        ws.queue.push(start);
        let mut head = base;
        let mut reaches = false;
        while head < ws.queue.len() {
            let h = ws.queue[head];
            head += 1;
            reaches |= ring.outer.contains(h);
            for &g in lat.nbr_ids(h) {
                if g != NO_HEX && !ws.marked(g) && ring.s.contains(g) && c.has_colour(g, colour) {
                    ws.set_mark(g);
                    ws.queue.push(g);
                }
            }
        }
        if reaches {
            count += 1;
            if count >= cap {
                break;
            }
        }
    }
    count
}

fn eval_once(lat: &Lattice, c: &PercoConfig, spec: ArmSpec) -> Result<bool> {
    let det = spec.compile(lat)?;
    det.try_eval(c, &mut Workspace::new())
}

pub fn has_one_arm(lat: &Lattice, c: &PercoConfig, colour: Colour, n: i64) -> Result<bool> {
    eval_once(lat, c, ArmSpec::OneArm { colour, n })
}

pub fn has_crossing(lat: &Lattice, c: &PercoConfig, colour: Colour, rect: &Rect, dir: Direction) -> Result<bool> {
    eval_once(lat, c, ArmSpec::Crossing { rect: rect.clone(), dir, colour })
}

pub fn has_circuit(lat: &Lattice, c: &PercoConfig, colour: Colour, annulus: &Region) -> Result<bool> {
    eval_once(lat, c, ArmSpec::Circuit { annulus: annulus.clone(), colour })
}

/// A `colour` chain inside H(annulus) from the faces next to the hole to the faces next to the outside.
pub fn has_inner_outer_chain(lat: &Lattice, c: &PercoConfig, colour: Colour, annulus: &Region) -> Result<bool> {
    let ring = annulus_ring(lat, annulus)?;
    if c.tag() != lat.fingerprint() {
        return Err(Error::LatticeMismatch);
    }
    Ok(ring_crossed(lat, c, colour, &ring, &mut Workspace::new()))
}

pub fn has_four_arm(lat: &Lattice, c: &PercoConfig, k: i64, n: i64) -> Result<bool> {
    eval_once(lat, c, ArmSpec::FourArm { k, n })
}

pub fn has_disjoint_two_black_static(lat: &Lattice, c: &PercoConfig, n: i64) -> Result<bool> {
    eval_once(lat, c, ArmSpec::DisjointTwoBlack { n })
}

pub fn has_separated_arm(
    lat: &Lattice,
    c: &PercoConfig,
    colour: Colour,
    k: i64,
    n: i64,
    variant: SeparatedVariant,
) -> Result<bool> {
    eval_once(lat, c, ArmSpec::Separated { colour, k, n, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::HexId;
    use crate::perco::{sample, RngStream};

    fn lat(n: i64) -> Lattice {
        Lattice::with_unit_pitch(n).unwrap()
    }

    #[test]
    fn uniform_configs() {
        let l = lat(8);
        let black = PercoConfig::uniform(&l, Colour::Black);
        let white = PercoConfig::uniform(&l, Colour::White);
        assert!(has_one_arm(&l, &black, Colour::Black, 8).unwrap());
        assert!(!has_one_arm(&l, &black, Colour::White, 8).unwrap());
        assert!(has_disjoint_two_black_static(&l, &black, 4).unwrap());
        assert!(!has_four_arm(&l, &black, 0, 8).unwrap());
        assert!(!has_four_arm(&l, &white, 2, 8).unwrap());
        let ann = Region::annulus(2, 6).unwrap();
        assert!(has_circuit(&l, &black, Colour::Black, &ann).unwrap());
        assert!(!has_circuit(&l, &white, Colour::Black, &ann).unwrap());
        let rect = Rect::ints(-3, 3, -3, 3).unwrap();
        assert!(has_crossing(&l, &black, Colour::Black, &rect, Direction::LeftRight).unwrap());
        assert!(!has_crossing(&l, &white, Colour::Black, &rect, Direction::BottomTop).unwrap());
        assert!(has_separated_arm(&l, &black, Colour::Black, 1, 8, SeparatedVariant::Long).is_err());
        assert!(has_separated_arm(&l, &black, Colour::Black, 1, 8, SeparatedVariant::Short).unwrap());
    }

    #[test]
    fn separated_all_colour() {
        let l = lat(20);
        let black = PercoConfig::uniform(&l, Colour::Black);
        let white = PercoConfig::uniform(&l, Colour::White);
        for variant in [SeparatedVariant::Long, SeparatedVariant::Short] {
            assert!(has_separated_arm(&l, &black, Colour::Black, 2, 20, variant).unwrap());
            assert!(has_separated_arm(&l, &white, Colour::White, 2, 20, variant).unwrap());
            assert!(!has_separated_arm(&l, &white, Colour::Black, 2, 20, variant).unwrap());
        }
        assert!(has_separated_arm(&l, &black, Colour::Black, 3, 20, SeparatedVariant::Long).is_err());
    }

    #[test]
    fn white_origin_does_not_block_black_arm() {
        let l = lat(6);
        let mut c = PercoConfig::uniform(&l, Colour::White);
        c.set(l.id(HexId::new(1, 0)).unwrap(), true);
        for a in 1..=8 {
            if let Some(id) = l.id(HexId::new(a, 0)) {
                c.set(id, true);
            }
        }
        assert!(has_one_arm(&l, &c, Colour::Black, 6).unwrap());
        assert!(!c.is_black(l.origin()));
        assert!(!has_disjoint_two_black_static(&l, &c, 6).unwrap());
    }

    #[test]
    fn single_radial_chain_is_not_two_disjoint() {
        let l = lat(5);
        let mut c = PercoConfig::uniform(&l, Colour::White);
        for a in 0..=6 {
            if let Some(id) = l.id(HexId::new(a, 0)) {
                c.set(id, true);
            }
        }
        assert!(has_one_arm(&l, &c, Colour::Black, 5).unwrap());
        assert!(!has_disjoint_two_black_static(&l, &c, 5).unwrap());
        for a in -6..=-1 {
            if let Some(id) = l.id(HexId::new(a, 0)) {
                c.set(id, true);
            }
        }
        assert!(has_disjoint_two_black_static(&l, &c, 5).unwrap());
    }

    #[test]
    fn pinwheel_has_four_arms() {
        let l = lat(6);
        // Colour by quadrant of the centre: alternating sectors.
        let c = PercoConfig::from_fn(&l, |id| {
            let (x, y) = l.center(id);
            (x >= 0.0) == (y >= 0.0)
        });
        assert!(has_four_arm(&l, &c, 0, 6).unwrap());
        assert!(has_four_arm(&l, &c, 2, 6).unwrap());
        let half = PercoConfig::from_fn(&l, |id| l.center(id).0 >= 0.0);
        assert!(!has_four_arm(&l, &half, 0, 6).unwrap());
    }

    #[test]
    fn radial_white_line_blocks_circuit() {
        let l = lat(8);
        let ann = Region::annulus(2, 7).unwrap();
        let mut c = PercoConfig::uniform(&l, Colour::Black);
        assert!(has_circuit(&l, &c, Colour::Black, &ann).unwrap());
        for a in 0..=10 {
            if let Some(id) = l.id(HexId::new(a, 0)) {
                c.set(id, false);
            }
        }
        assert!(!has_circuit(&l, &c, Colour::Black, &ann).unwrap());
        let mut ring = PercoConfig::uniform(&l, Colour::Black);
        let hr = l.hexes_meeting(&Region::boundary(4).unwrap()).unwrap();
        for id in hr.iter() {
            ring.set(id, false);
        }
        assert!(has_circuit(&l, &ring, Colour::Black, &ann).unwrap());
        assert!(has_circuit(&l, &ring, Colour::White, &ann).unwrap());
    }

    #[test]
    fn colour_switching_symmetry() {
        let l = lat(10);
        let specs = vec![
            ArmSpec::OneArm { colour: Colour::Black, n: 10 },
            ArmSpec::TwoArmPoly { n: 7 },
            ArmSpec::FourArm { k: 0, n: 6 },
            ArmSpec::FourArm { k: 2, n: 9 },
            ArmSpec::Crossing { rect: Rect::ints(-4, 4, -2, 2).unwrap(), dir: Direction::LeftRight, colour: Colour::Black },
            ArmSpec::Circuit { annulus: Region::annulus(2, 8).unwrap(), colour: Colour::White },
        ];
        let mut ws = Workspace::new();
        for spec in specs {
            let det = spec.compile(&l).unwrap();
            let swapped = spec.colour_swapped().unwrap().compile(&l).unwrap();
            for s in 0..300 {
                let c = sample(&l, &mut RngStream::new(5, s).rng());
                assert_eq!(det.eval(&c, &mut ws), swapped.eval(&c.complement(), &mut ws), "{spec:?}");
            }
        }
    }

    #[test]
    fn increasing_detectors_survive_black_flips() {
        let l = lat(10);
        let specs = vec![
            ArmSpec::OneArm { colour: Colour::Black, n: 9 },
            ArmSpec::Crossing { rect: Rect::ints(-5, 5, -3, 3).unwrap(), dir: Direction::BottomTop, colour: Colour::Black },
            ArmSpec::Circuit { annulus: Region::annulus(2, 8).unwrap(), colour: Colour::Black },
            ArmSpec::DisjointTwoBlack { n: 8 },
            ArmSpec::Separated { colour: Colour::Black, k: 1, n: 10, variant: SeparatedVariant::Long },
        ];
        let mut ws = Workspace::new();
        for spec in specs {
            let det = spec.compile(&l).unwrap();
            let white = ArmSpec::OneArm { colour: Colour::White, n: 9 }.compile(&l).unwrap();
            for s in 0..200 {
                let mut rng = RngStream::new(9, s).rng();
                let c = sample(&l, &mut rng);
                let id = (s as u32 * 7919) % l.len() as u32;
                let up = c.with(id, true);
                if det.eval(&c, &mut ws) {
                    assert!(det.eval(&up, &mut ws), "{spec:?}");
                }
                if white.eval(&up, &mut ws) {
                    assert!(white.eval(&c, &mut ws));
                }
            }
        }
    }

    #[test]
    fn rejects_foreign_lattice_and_bad_scales() {
        let (a, b) = (lat(5), lat(6));
        let c = PercoConfig::uniform(&a, Colour::Black);
        assert_eq!(has_one_arm(&b, &c, Colour::Black, 5), Err(Error::LatticeMismatch));
        assert!(has_one_arm(&a, &c, Colour::Black, 6).is_err());
        assert!(has_four_arm(&a, &c, 5, 5).is_err());
    }
}
