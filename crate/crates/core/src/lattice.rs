//! Hexagonal face lattice: axial indexing, adjacency, regions, and the exact
//! resolution of a region S to the set H(S) of hexagons whose closed face meets it.
//!
//! Hexagon (a, b) is centred at pitch · (a + b/2, b√3/2). Faces are pointy-top
//! with apothem pitch/2, so neighbouring centres are one pitch apart.

use std::cmp::Ordering;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Region coordinates, in lattice length units.
pub type Coord = Ratio<i64>;
type R = Ratio<i128>;

pub fn coord(n: i64) -> Coord {
    Coord::from_integer(n)
}

/// Axial neighbour offsets in counter-clockwise order starting at angle 0.
pub const NEIGHBOUR_OFFSETS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

pub const NO_HEX: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexId {
    pub a: i32,
    pub b: i32,
}

impl HexId {
    pub const ORIGIN: HexId = HexId { a: 0, b: 0 };

    pub fn new(a: i32, b: i32) -> Self {
        HexId { a, b }
    }

    /// The six axial neighbours, counter-clockwise from angle 0.
    pub fn neighbours(self) -> [HexId; 6] {
        NEIGHBOUR_OFFSETS.map(|(da, db)| HexId { a: self.a + da, b: self.b + db })
    }

    pub fn is_adjacent(self, other: HexId) -> bool {
        let (da, db) = (other.a - self.a, other.b - self.b);
        NEIGHBOUR_OFFSETS.contains(&(da, db))
    }

    /// Centre in pitch units.
    pub fn center_unit(self) -> (f64, f64) {
        (self.a as f64 + self.b as f64 / 2.0, self.b as f64 * 3f64.sqrt() / 2.0)
    }
}

/// Closed axis-parallel rectangle; degenerate rectangles are segments or points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: Coord,
    pub x1: Coord,
    pub y0: Coord,
    pub y1: Coord,
}

impl Rect {
    pub fn new(x0: Coord, x1: Coord, y0: Coord, y1: Coord) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return Err(Error::Geometry(format!("empty rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn ints(x0: i64, x1: i64, y0: i64, y1: i64) -> Result<Self> {
        Rect::new(coord(x0), coord(x1), coord(y0), coord(y1))
    }

    /// c + [−r, r]².
    pub fn square(cx: Coord, cy: Coord, r: Coord) -> Result<Self> {
        Rect::new(cx - r, cx + r, cy - r, cy + r)
    }

    pub fn contains_point(&self, x: Coord, y: Coord) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    fn interior_contains(&self, x: Coord, y: Coord) -> bool {
        self.x0 < x && x < self.x1 && self.y0 < y && y < self.y1
    }

    pub fn negate(&self) -> Rect {
        Rect { x0: -self.x1, x1: -self.x0, y0: -self.y1, y1: -self.y0 }
    }

    pub fn translate(&self, dx: Coord, dy: Coord) -> Rect {
        Rect { x0: self.x0 + dx, x1: self.x1 + dx, y0: self.y0 + dy, y1: self.y1 + dy }
    }

    pub fn width(&self) -> Coord {
        self.x1 - self.x0
    }

    pub fn height(&self) -> Coord {
        self.y1 - self.y0
    }

    pub fn left(&self) -> Rect {
        Rect { x1: self.x0, ..self.clone() }
    }

    pub fn right(&self) -> Rect {
        Rect { x0: self.x1, ..self.clone() }
    }

    pub fn bottom(&self) -> Rect {
        Rect { y1: self.y0, ..self.clone() }
    }

    pub fn top(&self) -> Rect {
        Rect { y0: self.y1, ..self.clone() }
    }

    fn within(&self, other: &Rect) -> bool {
        other.x0 <= self.x0 && self.x1 <= other.x1 && other.y0 <= self.y0 && self.y1 <= other.y1
    }

    fn hull(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            x1: self.x1.max(other.x1),
            y0: self.y0.min(other.y0),
            y1: self.y1.max(other.y1),
        }
    }

    fn scaled(&self, pitch: &Coord) -> UnitRect {
        let f = |c: &Coord| {
            let v = c / pitch;
            R::new(*v.numer() as i128, *v.denom() as i128)
        };
        UnitRect { x0: f(&self.x0), x1: f(&self.x1), y0: f(&self.y0), y1: f(&self.y1) }
    }
}

/// A planar region, in lattice length units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Rect(Rect),
    /// c + Λ_{inner,outer} = (c + [−outer, outer]²) ∖ (c + [−inner, inner]²).
    Annulus { cx: Coord, cy: Coord, inner: Coord, outer: Coord },
    /// The boundary curve ∂(c + [−r, r]²).
    Boundary { cx: Coord, cy: Coord, r: Coord },
    Union(Vec<Region>),
}

impl Region {
    /// Λ_n = [−n, n]².
    pub fn boxed(n: i64) -> Result<Region> {
        Ok(Region::Rect(Rect::square(coord(0), coord(0), coord(n))?))
    }

    /// Λ_{k,n} = Λ_n ∖ Λ_k.
    pub fn annulus(k: i64, n: i64) -> Result<Region> {
        Region::translated_annulus(coord(0), coord(0), coord(k), coord(n))
    }

    pub fn translated_annulus(cx: Coord, cy: Coord, inner: Coord, outer: Coord) -> Result<Region> {
        if inner.is_negative() || inner >= outer {
            return Err(Error::Geometry(format!("annulus needs 0 ≤ inner < outer, got {inner}, {outer}")));
        }
        Ok(Region::Annulus { cx, cy, inner, outer })
    }

    /// ∂Λ_n.
    pub fn boundary(n: i64) -> Result<Region> {
        if n < 0 {
            return Err(Error::Geometry(format!("negative radius {n}")));
        }
        Ok(Region::Boundary { cx: coord(0), cy: coord(0), r: coord(n) })
    }

    pub fn point(x: Coord, y: Coord) -> Region {
        Region::Rect(Rect { x0: x, x1: x, y0: y, y1: y })
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Region::Rect(r) => r.clone(),
            Region::Annulus { cx, cy, outer, .. } => Rect::square(*cx, *cy, *outer).expect("outer ≥ 0"),
            Region::Boundary { cx, cy, r } => Rect::square(*cx, *cy, *r).expect("r ≥ 0"),
            Region::Union(parts) => {
                let mut it = parts.iter().map(Region::bbox);
                let first = it.next().unwrap_or_else(|| Rect::ints(0, 0, 0, 0).expect("point"));
                it.fold(first, |acc, r| acc.hull(&r))
            }
        }
    }

    pub fn negate(&self) -> Region {
        match self {
            Region::Rect(r) => Region::Rect(r.negate()),
            Region::Annulus { cx, cy, inner, outer } => {
                Region::Annulus { cx: -cx, cy: -cy, inner: *inner, outer: *outer }
            }
            Region::Boundary { cx, cy, r } => Region::Boundary { cx: -cx, cy: -cy, r: *r },
            Region::Union(parts) => Region::Union(parts.iter().map(Region::negate).collect()),
        }
    }

    pub fn contains_point(&self, x: Coord, y: Coord) -> bool {
        match self {
            Region::Rect(r) => r.contains_point(x, y),
            Region::Annulus { cx, cy, inner, outer } => {
                let o = Rect::square(*cx, *cy, *outer).expect("outer ≥ 0");
                let i = Rect::square(*cx, *cy, *inner).expect("inner ≥ 0");
                o.contains_point(x, y) && !i.contains_point(x, y)
            }
            Region::Boundary { cx, cy, r } => {
                let b = Rect::square(*cx, *cy, *r).expect("r ≥ 0");
                b.contains_point(x, y) && !b.interior_contains(x, y)
            }
            Region::Union(parts) => parts.iter().any(|p| p.contains_point(x, y)),
        }
    }

    /// Whether the closed face of `h` meets this region, exactly.
    pub fn meets_hex(&self, h: HexId, pitch: &Coord) -> bool {
        match self {
            Region::Rect(r) => hex_meets(h, &r.scaled(pitch)),
            Region::Annulus { cx, cy, inner, outer } => {
                let o = Rect::square(*cx, *cy, *outer).expect("outer ≥ 0").scaled(pitch);
                let i = Rect::square(*cx, *cy, *inner).expect("inner ≥ 0").scaled(pitch);
                hex_meets(h, &o) && !hex_inside(h, &i, false)
            }
            Region::Boundary { cx, cy, r } => {
                let b = Rect::square(*cx, *cy, *r).expect("r ≥ 0").scaled(pitch);
                hex_meets(h, &b) && !hex_inside(h, &b, true)
            }
            Region::Union(parts) => parts.iter().any(|p| p.meets_hex(h, pitch)),
        }
    }
}

struct UnitRect {
    x0: R,
    x1: R,
    y0: R,
    y1: R,
}

fn ri(n: i128) -> R {
    R::from_integer(n)
}

/// Sign of r + s√3.
fn surd_sign(r: R, s: R) -> Ordering {
    let (sr, ss) = (r.cmp(&R::zero()), s.cmp(&R::zero()));
    if ss == Ordering::Equal {
        return sr;
    }
    if sr == Ordering::Equal || sr == ss {
        return ss;
    }
    // Opposite signs: compare r² with 3s².
    let diff = r * r - s * s * ri(3);
    match diff.cmp(&R::zero()) {
        Ordering::Equal => Ordering::Equal,
        Ordering::Greater => sr,
        Ordering::Less => ss,
    }
}

/// (r1 + s1√3) ≤ (r2 + s2√3).
fn surd_le(r1: R, s1: R, r2: R, s2: R) -> bool {
    surd_sign(r1 - r2, s1 - s2) != Ordering::Greater
}

fn surd_lt(r1: R, s1: R, r2: R, s2: R) -> bool {
    surd_sign(r1 - r2, s1 - s2) == Ordering::Less
}

/// Separating-axis test between the closed hexagon and a closed rectangle.
/// Axes: x, y (rectangle normals) and 60°, 120° (remaining hexagon normals).
fn hex_meets(h: HexId, r: &UnitRect) -> bool {
    let half = R::new(1, 2);
    let third = R::new(1, 3);
    let (a, b) = (ri(h.a as i128), ri(h.b as i128));
    let cx = a + b * half;
    let z = R::zero();
    if cx - half > r.x1 || cx + half < r.x0 {
        return false;
    }
    // y-extent of the face is √3·(b/2 ∓ 1/3).
    let (ylo, yhi) = (b * half - third, b * half + third);
    if !surd_le(z, ylo, r.y1, z) || !surd_le(r.y0, z, z, yhi) {
        return false;
    }
    // Projection onto (1/2, √3/2): X/2 + (Y/2)√3; the face projects to c60 ± 1/2.
    let quarter3 = R::new(3, 4);
    let c60 = cx * half + b * quarter3;
    if !surd_le(r.x0 * half, r.y0 * half, c60 + half, z) || !surd_le(c60 - half, z, r.x1 * half, r.y1 * half) {
        return false;
    }
    // Projection onto (−1/2, √3/2).
    let c120 = -cx * half + b * quarter3;
    if !surd_le(-r.x1 * half, r.y0 * half, c120 + half, z) || !surd_le(c120 - half, z, -r.x0 * half, r.y1 * half)
    {
        return false;
    }
    true
}

/// Face contained in the closed (or open) rectangle.
fn hex_inside(h: HexId, r: &UnitRect, open: bool) -> bool {
    let half = R::new(1, 2);
    let third = R::new(1, 3);
    let (a, b) = (ri(h.a as i128), ri(h.b as i128));
    let cx = a + b * half;
    let z = R::zero();
    let (ylo, yhi) = (b * half - third, b * half + third);
    if open {
        r.x0 < cx - half && cx + half < r.x1 && surd_lt(r.y0, z, z, ylo) && surd_lt(z, yhi, r.y1, z)
    } else {
        r.x0 <= cx - half && cx + half <= r.x1 && surd_le(r.y0, z, z, ylo) && surd_le(z, yhi, r.y1, z)
    }
}

/// Fixed-capacity bitset over dense hexagon ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HexSet {
    words: Vec<u64>,
    len: usize,
}

impl HexSet {
    pub fn new(len: usize) -> Self {
        HexSet { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn capacity(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        let i = id as usize;
        i < self.len && self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, id: u32) {
        let i = id as usize;
        self.words[i >> 6] |= 1 << (i & 63);
    }

    pub fn remove(&mut self, id: u32) {
        let i = id as usize;
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some((k * 64) as u32 + b)
            })
        })
    }

    pub fn union(&self, other: &HexSet) -> HexSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &HexSet) -> HexSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &HexSet) -> HexSet {
        self.zip(other, |a, b| a & !b)
    }

    fn zip(&self, other: &HexSet, op: impl Fn(u64, u64) -> u64) -> HexSet {
        assert_eq!(self.len, other.len, "hex sets over different lattices");
        HexSet { words: self.words.iter().zip(&other.words).map(|(a, b)| op(*a, *b)).collect(), len: self.len }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// All hexagons of H(Λ_{n_max}) with dense ids and precomputed adjacency.
/// Cloning is cheap: the tables are shared.
#[derive(Clone, Debug)]
pub struct Lattice {
    n_max: i64,
    pitch: Coord,
    hexes: Arc<Vec<HexId>>,
    a_min: i32,
    b_min: i32,
    a_span: usize,
    b_span: usize,
    grid: Arc<Vec<u32>>,
    nbrs: Arc<Vec<[u32; 6]>>,
    origin: u32,
}

impl Lattice {
    pub fn new(n_max: i64, pitch: Coord) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter(format!("lattice extent {n_max} must be ≥ 1")));
        }
        if !pitch.is_positive() {
            return Err(Error::InvalidParameter(format!("pitch {pitch} must be positive")));
        }
        let units = (coord(n_max) / pitch).to_f64().unwrap_or(f64::INFINITY);
        if units > 4096.0 {
            return Err(Error::InvalidParameter(format!("lattice of {units} pitches is too large")));
        }
        let bound = Region::boxed(n_max)?;
        let b_lim = ((units + 1.0) * 2.0 / 3f64.sqrt()).ceil() as i32 + 1;
        let a_lim = units.ceil() as i32 + b_lim + 2;
        let (a_min, b_min) = (-a_lim, -b_lim);
        let (a_span, b_span) = ((2 * a_lim + 1) as usize, (2 * b_lim + 1) as usize);
        let mut grid = vec![NO_HEX; a_span * b_span];
        let mut hexes = Vec::new();
        for b in -b_lim..=b_lim {
            for a in -a_lim..=a_lim {
                let h = HexId { a, b };
                if bound.meets_hex(h, &pitch) {
                    grid[(b - b_min) as usize * a_span + (a - a_min) as usize] = hexes.len() as u32;
                    hexes.push(h);
                }
            }
        }
        let mut lat = Lattice {
            n_max,
            pitch,
            hexes: Arc::new(hexes),
            a_min,
            b_min,
            a_span,
            b_span,
            grid: Arc::new(grid),
            nbrs: Arc::new(Vec::new()),
            origin: 0,
        };
        lat.nbrs = Arc::new(lat.hexes.iter().map(|h| h.neighbours().map(|g| lat.id(g).unwrap_or(NO_HEX))).collect());
        lat.origin = lat.id(HexId::ORIGIN).expect("origin is inside every lattice");
        Ok(lat)
    }

    pub fn with_unit_pitch(n_max: i64) -> Result<Self> {
        Lattice::new(n_max, coord(1))
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn pitch(&self) -> Coord {
        self.pitch
    }

    pub fn len(&self) -> usize {
        self.hexes.len()
    }

    /// Identifies the lattice a configuration was sampled on.
    pub fn fingerprint(&self) -> u64 {
        let parts = [self.n_max as u64, *self.pitch.numer() as u64, *self.pitch.denom() as u64, self.len() as u64];
        parts.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, p| (h ^ p).wrapping_mul(0x0100_0000_01b3))
    }

    pub fn is_empty(&self) -> bool {
        self.hexes.is_empty()
    }

    pub fn hex(&self, id: u32) -> HexId {
        self.hexes[id as usize]
    }

    pub fn hexes(&self) -> &[HexId] {
        &self.hexes
    }

    pub fn id(&self, h: HexId) -> Option<u32> {
        let (da, db) = (h.a - self.a_min, h.b - self.b_min);
        if da < 0 || db < 0 || da as usize >= self.a_span || db as usize >= self.b_span {
            return None;
        }
        let v = self.grid[db as usize * self.a_span + da as usize];
        (v != NO_HEX).then_some(v)
    }

    pub fn origin(&self) -> u32 {
        self.origin
    }

    /// Neighbour ids, `NO_HEX` where the neighbour lies outside the lattice.
    #[inline]
    pub fn nbr_ids(&self, id: u32) -> &[u32; 6] {
        &self.nbrs[id as usize]
    }

    /// Axial neighbours filtered to the lattice extent.
    pub fn neighbors(&self, h: HexId) -> Vec<HexId> {
        h.neighbours().into_iter().filter(|g| self.id(*g).is_some()).collect()
    }

    /// Centre in lattice length units.
    pub fn center(&self, id: u32) -> (f64, f64) {
        let (x, y) = self.hex(id).center_unit();
        let p = self.pitch.to_f64().unwrap_or(1.0);
        (x * p, y * p)
    }

    pub fn empty_set(&self) -> HexSet {
        HexSet::new(self.len())
    }

    pub fn full_set(&self) -> HexSet {
        let mut s = self.empty_set();
        (0..self.len() as u32).for_each(|i| s.insert(i));
        s
    }

    /// The origin hexagon and its neighbours: every face meeting the closed origin face.
    pub fn origin_star(&self) -> Vec<u32> {
        let mut v = vec![self.origin];
        v.extend(self.nbr_ids(self.origin).iter().copied().filter(|&g| g != NO_HEX));
        v
    }

    pub fn set_of(&self, ids: impl IntoIterator<Item = u32>) -> HexSet {
        let mut s = self.empty_set();
        ids.into_iter().for_each(|i| s.insert(i));
        s
    }

    /// H(S): ids of all hexagons whose closed face meets the closed region S.
    pub fn hexes_meeting(&self, region: &Region) -> Result<HexSet> {
        let bbox = region.bbox();
        let lim = Rect::square(coord(0), coord(0), coord(self.n_max))?;
        if !bbox.within(&lim) {
            return Err(Error::Geometry(format!(
                "region with bounding box [{},{}]x[{},{}] exceeds Λ_{}",
                bbox.x0, bbox.x1, bbox.y0, bbox.y1, self.n_max
            )));
        }
        let p = self.pitch.to_f64().unwrap_or(1.0);
        let f = |c: Coord| c.to_f64().unwrap_or(0.0) / p;
        let (x0, x1, y0, y1) = (f(bbox.x0), f(bbox.x1), f(bbox.y0), f(bbox.y1));
        let sq = 3f64.sqrt();
        let b_lo = ((y0 - 1.0) * 2.0 / sq).floor() as i32 - 1;
        let b_hi = ((y1 + 1.0) * 2.0 / sq).ceil() as i32 + 1;
        let mut out = self.empty_set();
        for b in b_lo..=b_hi {
            let a_lo = (x0 - 1.0 - b as f64 / 2.0).floor() as i32 - 1;
            let a_hi = (x1 + 1.0 - b as f64 / 2.0).ceil() as i32 + 1;
            for a in a_lo..=a_hi {
                let h = HexId { a, b };
                if let Some(id) = self.id(h) {
                    if region.meets_hex(h, &self.pitch) {
                        out.insert(id);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Named regions used by the interlaced-circuit and arm-separation constructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardRegions {
    /// (−2k, −2k) + Λ_{3k,5k}.
    pub a_plus: Region,
    /// (2k, 2k) + Λ_{3k,5k}.
    pub a_minus: Region,
    /// [−3k, −k] × [k, 3k].
    pub b_box: Rect,
    /// −B_k.
    pub b_prime: Rect,
    /// [−k, k] × [−3k, k].
    pub r: Rect,
    pub neg_r: Rect,
    /// Λ_{7k,n} ∪ ((0, 6k) + Λ_k).
    pub s: Region,
    pub neg_s: Region,
}

pub fn standard_regions(k: i64, n: i64) -> Result<StandardRegions> {
    if k < 1 || 10 * k > n {
        return Err(Error::InvalidParameter(format!("standard regions need 1 ≤ k and 10k ≤ n, got k={k}, n={n}")));
    }
    let c = coord;
    let a_plus = Region::translated_annulus(c(-2 * k), c(-2 * k), c(3 * k), c(5 * k))?;
    let a_minus = Region::translated_annulus(c(2 * k), c(2 * k), c(3 * k), c(5 * k))?;
    let b_box = Rect::ints(-3 * k, -k, k, 3 * k)?;
    let b_prime = b_box.negate();
    let r = Rect::ints(-k, k, -3 * k, k)?;
    let neg_r = r.negate();
    let s = Region::Union(vec![Region::annulus(7 * k, n)?, Region::Rect(Rect::square(c(0), c(6 * k), c(k))?)]);
    let neg_s = s.negate();
    Ok(StandardRegions { a_plus, a_minus, b_box, b_prime, r, neg_r, s, neg_s })
}
