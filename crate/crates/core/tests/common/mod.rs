//! Exhaustive path-search oracles for the arm detectors, written against lattice geometry only.
#![allow(dead_code)]

use std::collections::HashMap;

use armgap::lattice::{coord, HexSet, Lattice, Rect, Region};
use armgap::perco::{apply_noise, ArmSpec, Colour, Direction, DynamicDisjoint, PercoConfig, RngStream, Tri, Workspace};
use rand::Rng;

/// Local indexing of a set of at most 128 hexagons, with adjacency as bit masks.
pub struct Local {
    pub ids: Vec<u32>,
    pub index: HashMap<u32, usize>,
    pub adj: Vec<u128>,
}

impl Local {
    pub fn new(lat: &Lattice, set: &HexSet) -> Local {
        let ids: Vec<u32> = set.iter().collect();
        assert!(ids.len() <= 128, "oracle region has {} hexagons", ids.len());
        let index: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let adj = ids
            .iter()
            .map(|&h| {
                lat.neighbors(lat.hex(h))
                    .into_iter()
                    .filter_map(|g| lat.id(g).and_then(|g| index.get(&g)))
                    .fold(0u128, |m, &j| m | 1 << j)
            })
            .collect();
        Local { ids, index, adj }
    }

    pub fn mask(&self, hexes: impl IntoIterator<Item = u32>) -> u128 {
        hexes.into_iter().filter_map(|h| self.index.get(&h)).fold(0, |m, &j| m | 1 << j)
    }

    pub fn open(&self, c: &PercoConfig, colour: Colour) -> u128 {
        self.mask(self.ids.iter().copied().filter(|&h| c.has_colour(h, colour)))
    }

    /// Calls `f` with the vertex mask of every induced path through `open` that starts at `start`
    /// and ends at its first vertex in `targets`. Stops early when `f` returns true. A path with a
    /// chord contains an induced path with the same ends, so disjointness questions lose nothing.
    pub fn paths(&self, open: u128, start: usize, targets: u128, f: &mut impl FnMut(u128) -> bool) -> bool {
        if open >> start & 1 == 0 {
            return false;
        }
        self.extend(open, 1 << start, 0, start, targets, f)
    }

    /// `near` holds the neighbours of every used vertex other than `at`.
    fn extend(&self, open: u128, used: u128, near: u128, at: usize, targets: u128, f: &mut impl FnMut(u128) -> bool) -> bool {
        if targets >> at & 1 == 1 {
            return f(used);
        }
        let mut next = self.adj[at] & open & !used & !near;
        while next != 0 {
            let j = next.trailing_zeros() as usize;
            next &= next - 1;
            if self.extend(open, used | 1 << j, near | self.adj[at], j, targets, f) {
                return true;
            }
        }
        false
    }

    /// Depth-first search with a visited set.
    pub fn any_path(&self, open: u128, starts: u128, targets: u128) -> bool {
        let mut seen = 0u128;
        let mut stack: Vec<usize> = bits(starts & open).collect();
        while let Some(v) = stack.pop() {
            if seen >> v & 1 == 1 {
                continue;
            }
            if targets >> v & 1 == 1 {
                return true;
            }
            seen |= 1 << v;
            stack.extend(bits(self.adj[v] & open & !seen));
        }
        false
    }

    /// Calls `f` with every induced cycle of length at least three through `open`, as a vertex
    /// sequence. A cycle with a chord splits into two shorter cycles whose windings add up.
    pub fn cycles(&self, open: u128, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        let mut seq = Vec::new();
        for s in bits(open) {
            // Cycles whose least vertex is s.
            let allowed = open & !((1u128 << s) - 1);
            seq.clear();
            seq.push(s);
            if self.cycle_from(allowed, s, 1 << s, 0, &mut seq, f) {
                return true;
            }
        }
        false
    }

    /// `near` holds the neighbours of the used vertices other than `s` and the last one.
    fn cycle_from(&self, allowed: u128, s: usize, used: u128, near: u128, seq: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        let at = *seq.last().expect("non-empty");
        let near2 = if at == s { near } else { near | self.adj[at] };
        let mut next = self.adj[at] & allowed & !used & !near;
        while next != 0 {
            let j = next.trailing_zeros() as usize;
            next &= next - 1;
            seq.push(j);
            let closes = seq.len() >= 3 && self.adj[j] >> s & 1 == 1;
            let stop = if closes { f(seq) } else { self.cycle_from(allowed, s, used | 1 << j, near2, seq, f) };
            seq.pop();
            if stop {
                return true;
            }
        }
        false
    }
}

pub fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            j
        })
    })
}

fn boxed(lat: &Lattice, n: i64) -> HexSet {
    lat.hexes_meeting(&Region::boxed(n).unwrap()).unwrap()
}

fn boundary(lat: &Lattice, n: i64) -> HexSet {
    lat.hexes_meeting(&Region::boundary(n).unwrap()).unwrap()
}

fn origin_and_neighbours(lat: &Lattice) -> Vec<u32> {
    let o = lat.origin();
    let mut v = vec![o];
    v.extend(lat.neighbors(lat.hex(o)).into_iter().filter_map(|g| lat.id(g)));
    v
}

/// Simple-path search between two face sets inside a confining region.
pub struct Paths {
    pub l: Local,
    pub starts: u128,
    pub targets: u128,
}

impl Paths {
    /// Paths in H(Λ_n) from a face touching the origin face to a face meeting ∂Λ_n.
    pub fn one_arm(lat: &Lattice, n: i64) -> Paths {
        let l = Local::new(lat, &boxed(lat, n));
        let starts = l.mask(origin_and_neighbours(lat));
        let targets = l.mask(boundary(lat, n).iter());
        Paths { l, starts, targets }
    }

    pub fn crossing(lat: &Lattice, r: &Rect, left_right: bool) -> Paths {
        let l = Local::new(lat, &lat.hexes_meeting(&Region::Rect(r.clone())).unwrap());
        let side = |x0, x1, y0, y1| lat.hexes_meeting(&Region::Rect(Rect::new(x0, x1, y0, y1).unwrap())).unwrap();
        let (a, b) = if left_right {
            (side(r.x0, r.x0, r.y0, r.y1), side(r.x1, r.x1, r.y0, r.y1))
        } else {
            (side(r.x0, r.x1, r.y0, r.y0), side(r.x0, r.x1, r.y1, r.y1))
        };
        let (starts, targets) = (l.mask(a.iter()), l.mask(b.iter()));
        Paths { l, starts, targets }
    }

    pub fn exists(&self, c: &PercoConfig, colour: Colour) -> bool {
        self.l.any_path(self.l.open(c, colour), self.starts, self.targets)
    }

    /// Two hexagon-disjoint black paths, the first in `c0` and the second in `c1`.
    pub fn disjoint(&self, c0: &PercoConfig, c1: &PercoConfig) -> bool {
        let l = &self.l;
        let (o0, o1) = (l.open(c0, Colour::Black), l.open(c1, Colour::Black));
        bits(self.starts).any(|s| l.paths(o0, s, self.targets, &mut |p| l.any_path(o1 & !p, self.starts & !p, self.targets)))
    }
}

/// An annulus S around a central hole: the faces next to the hole in angular order and the
/// faces touching the outside.
pub struct Annulus {
    pub l: Local,
    pub inner: Vec<usize>,
    pub targets: u128,
    centres: Vec<(f64, f64)>,
}

impl Annulus {
    /// S = H(Λ_n) without the origin face for k = 0, and H(Λ_{k,n}) otherwise.
    pub fn new(lat: &Lattice, k: i64, n: i64) -> Annulus {
        let (s, hole) = if k == 0 {
            let mut s = boxed(lat, n);
            s.remove(lat.origin());
            (s, lat.set_of([lat.origin()]))
        } else {
            let s = lat.hexes_meeting(&Region::annulus(k, n).unwrap()).unwrap();
            let hole = boxed(lat, k).difference(&s);
            (s, hole)
        };
        let mut inner = vec![];
        let mut outer = vec![];
        for h in s.iter() {
            let nb: Vec<Option<u32>> = lat.hex(h).neighbours().into_iter().map(|g| lat.id(g)).collect();
            if nb.iter().flatten().any(|&g| hole.contains(g)) {
                inner.push(h);
            }
            if nb.iter().any(|g| g.is_none_or(|g| !s.contains(g) && !hole.contains(g))) {
                outer.push(h);
            }
        }
        let angle = |h: u32| {
            let (x, y) = lat.center(h);
            y.atan2(x)
        };
        inner.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
        let l = Local::new(lat, &s);
        let inner = inner.iter().map(|h| l.index[h]).collect();
        let targets = l.mask(outer);
        let centres = l.ids.iter().map(|&h| lat.center(h)).collect();
        Annulus { l, inner, targets, centres }
    }

    /// Four hexagon-disjoint crossings of S coloured b, w, b, w in cyclic order around the hole.
    pub fn four_arm(&self, c: &PercoConfig) -> bool {
        let l = &self.l;
        let t = self.targets;
        let (ob, ow) = (l.open(c, Colour::Black), l.open(c, Colour::White));
        let pair = |open: u128, x: usize, y: usize| l.paths(open, x, t, &mut |p| l.paths(open & !p, y, t, &mut |_| true));
        let q = &self.inner;
        let m = q.len();
        for i in 0..m {
            for j in i + 1..m {
                for u in j + 1..m {
                    for v in u + 1..m {
                        for ((b0, b1), (w0, w1)) in [((q[i], q[u]), (q[j], q[v])), ((q[j], q[v]), (q[i], q[u]))] {
                            if pair(ob, b0, b1) && pair(ow, w0, w1) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// A `colour` cycle of faces of S with non-zero winding number about the centre.
    pub fn circuit(&self, c: &PercoConfig, colour: Colour) -> bool {
        let pi = std::f64::consts::PI;
        self.l.cycles(self.l.open(c, colour), &mut |seq| {
            let mut turn = 0.0;
            for i in 0..seq.len() {
                let (x0, y0) = self.centres[seq[i]];
                let (x1, y1) = self.centres[seq[(i + 1) % seq.len()]];
                let d = y1.atan2(x1) - y0.atan2(x0);
                turn += if d > pi { d - 2.0 * pi } else if d < -pi { d + 2.0 * pi } else { d };
            }
            turn.abs() > pi
        })
    }
}

/// P[event] over all colourings of `support`, as (hits, 2^|support|).
pub fn exhaustive(lat: &Lattice, support: &HexSet, mut event: impl FnMut(&PercoConfig) -> bool) -> (u64, u64) {
    let ids: Vec<u32> = support.iter().collect();
    assert!(ids.len() <= 24);
    let mut c = PercoConfig::from_fn(lat, |_| false);
    let mut hits = 0;
    for mask in 0u64..1 << ids.len() {
        for (j, &h) in ids.iter().enumerate() {
            c.set(h, mask >> j & 1 == 1);
        }
        hits += event(&c) as u64;
    }
    (hits, 1 << ids.len())
}

/// Detector against oracle over random configurations of one event family.
#[derive(Debug)]
pub struct Agreement {
    pub name: &'static str,
    pub instances: u64,
    pub mismatches: u64,
    /// Instances where the oracle reports the event.
    pub positives: u64,
    pub first: Option<String>,
}

impl Agreement {
    fn new(name: &'static str) -> Agreement {
        Agreement { name, instances: 0, mismatches: 0, positives: 0, first: None }
    }

    fn check(&mut self, got: bool, want: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        self.positives += want as u64;
        if got != want {
            self.mismatches += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }
}

/// A configuration with black density cycling through 0.3, 0.5, 0.5, 0.7.
pub fn biased(lat: &Lattice, seed: u64, i: u64) -> PercoConfig {
    let mut rng = RngStream::new(seed, i).rng();
    let p = [0.3, 0.5, 0.5, 0.7][(i % 4) as usize];
    PercoConfig::from_fn(lat, |_| rng.gen_bool(p))
}

/// Runs every detector family on `count` random configurations per family.
pub fn agreement_suite(count: u64, seed: u64) -> Vec<Agreement> {
    let mut ws = Workspace::new();
    let u3 = unit(3);
    let u2 = unit(2);
    let h2 = half_pitch(2);
    let mut out = vec![];

    let mut a = Agreement::new("one_arm");
    let arms: Vec<_> = (1..=3).map(|n| (n, Paths::one_arm(&u3, n))).collect();
    for i in 0..count {
        let c = biased(&u3, seed, i);
        let (n, p) = &arms[(i % 3) as usize];
        for colour in [Colour::Black, Colour::White] {
            let got = ArmSpec::OneArm { colour, n: *n }.compile(&u3).unwrap().eval(&c, &mut ws);
            a.check(got, p.exists(&c, colour), || format!("seed {seed} config {i} n {n} {colour:?}"));
        }
    }
    out.push(a);

    let mut a = Agreement::new("crossing");
    let r = rect(-2, 3, -1, 2);
    let dirs = [(Direction::LeftRight, Paths::crossing(&u3, &r, true)), (Direction::BottomTop, Paths::crossing(&u3, &r, false))];
    let dets: Vec<_> = [Colour::Black, Colour::White]
        .iter()
        .flat_map(|&colour| dirs.iter().map(move |(dir, _)| (colour, *dir)))
        .map(|(colour, dir)| ArmSpec::Crossing { rect: r.clone(), dir, colour }.compile(&u3).unwrap())
        .collect();
    for i in 0..count {
        let c = biased(&u3, seed + 1, i);
        for (j, colour) in [Colour::Black, Colour::White].into_iter().enumerate() {
            for (d, (_, p)) in dirs.iter().enumerate() {
                a.check(dets[2 * j + d].eval(&c, &mut ws), p.exists(&c, colour), || format!("seed {} config {i}", seed + 1));
            }
        }
    }
    out.push(a);

    let mut a = Agreement::new("four_arm");
    let cases = [(&u2, 0, 2), (&u3, 0, 3), (&u3, 1, 3), (&h2, 1, 2)];
    let prepared: Vec<_> = cases
        .iter()
        .map(|&(lat, k, n)| (lat, k, n, ArmSpec::FourArm { k, n }.compile(lat).unwrap(), Annulus::new(lat, k, n)))
        .collect();
    for i in 0..count {
        let (lat, k, n, det, ann) = &prepared[(i % 4) as usize];
        let c = biased(lat, seed + 2, i);
        a.check(det.eval(&c, &mut ws), ann.four_arm(&c), || format!("seed {} config {i} k {k} n {n}", seed + 2));
    }
    out.push(a);

    let mut a = Agreement::new("circuit");
    let cases = [(&u3, 1, 3), (&u3, 2, 3), (&h2, 1, 2)];
    let prepared: Vec<_> = cases
        .iter()
        .map(|&(lat, k, n)| {
            let dets: Vec<_> = [Colour::Black, Colour::White]
                .into_iter()
                .map(|colour| ArmSpec::Circuit { annulus: Region::annulus(k, n).unwrap(), colour }.compile(lat).unwrap())
                .collect();
            (lat, k, n, dets, Annulus::new(lat, k, n))
        })
        .collect();
    for i in 0..count {
        let (lat, k, n, dets, ann) = &prepared[(i % 3) as usize];
        let c = biased(lat, seed + 3, i);
        for (j, colour) in [Colour::Black, Colour::White].into_iter().enumerate() {
            a.check(dets[j].eval(&c, &mut ws), ann.circuit(&c, colour), || format!("seed {} config {i} k {k} n {n}", seed + 3));
        }
    }
    out.push(a);

    let mut a = Agreement::new("disjoint_static");
    let prepared: Vec<_> =
        [(&u2, 2), (&u3, 3)].iter().map(|&(lat, n)| (lat, n, ArmSpec::DisjointTwoBlack { n }.compile(lat).unwrap(), Paths::one_arm(lat, n))).collect();
    for i in 0..count {
        let (lat, n, det, p) = &prepared[(i % 2) as usize];
        let c = biased(lat, seed + 4, i);
        a.check(det.eval(&c, &mut ws), p.disjoint(&c, &c), || format!("seed {} config {i} n {n}", seed + 4));
    }
    out.push(a);

    let mut a = Agreement::new("disjoint_dynamic");
    let prepared: Vec<_> =
        [(&u2, 2), (&u3, 3)].iter().map(|&(lat, n)| (lat, n, DynamicDisjoint::new(lat, n, u64::MAX).unwrap(), Paths::one_arm(lat, n))).collect();
    for i in 0..count {
        let (lat, n, det, p) = &prepared[(i % 2) as usize];
        let c0 = biased(lat, seed + 5, i);
        let c1 = if i % 3 == 0 {
            biased(lat, seed + 6, i)
        } else {
            apply_noise(&c0, 0.1 * (i % 3) as f64, &mut RngStream::new(seed + 7, i).rng()).unwrap()
        };
        let got = det.eval(&c0, &c1, &mut ws).unwrap();
        a.check(got == Tri::Yes, p.disjoint(&c0, &c1), || format!("seed {} config {i} n {n} got {got:?}", seed + 5));
        if got == Tri::Unknown {
            a.mismatches += 1;
        }
    }
    out.push(a);
    out
}

pub fn unit(n: i64) -> Lattice {
    Lattice::with_unit_pitch(n).unwrap()
}

pub fn half_pitch(n: i64) -> Lattice {
    Lattice::new(n, armgap::lattice::Coord::new(1, 2)).unwrap()
}

pub fn rect(x0: i64, x1: i64, y0: i64, y1: i64) -> Rect {
    Rect::new(coord(x0), coord(x1), coord(y0), coord(y1)).unwrap()
}

/// Exact probabilities on small supports, checked by hand where the event is local.
pub fn frozen() -> Vec<(&'static str, i64, ArmSpec, u64, u64)> {
    let black = Colour::Black;
    vec![
        ("origin_black", 1, ArmSpec::OriginColour { colour: black }, 1, 2),
        ("one_arm_1", 1, ArmSpec::OneArm { colour: black, n: 1 }, 63, 64),
        ("two_arm_1", 1, ArmSpec::TwoArmPoly { n: 1 }, 31, 32),
        ("disjoint_two_black_1", 1, ArmSpec::DisjointTwoBlack { n: 1 }, 57, 64),
        ("four_arm_0_1", 1, ArmSpec::FourArm { k: 0, n: 1 }, 1, 2),
        ("crossing_2x2", 2, ArmSpec::Crossing { rect: rect(-1, 1, -1, 1), dir: Direction::LeftRight, colour: black }, 77, 128),
        ("crossing_3x2", 2, ArmSpec::Crossing { rect: rect(-1, 2, -1, 1), dir: Direction::LeftRight, colour: black }, 113, 256),
    ]
}

/// The path-search oracle for a frozen event.
pub fn oracle_event(lat: &Lattice, spec: &ArmSpec) -> Box<dyn Fn(&PercoConfig) -> bool> {
    let o = lat.origin();
    match spec.clone() {
        ArmSpec::OriginColour { colour } => Box::new(move |c| c.has_colour(o, colour)),
        ArmSpec::OneArm { colour, n } => {
            let p = Paths::one_arm(lat, n);
            Box::new(move |c| p.exists(c, colour))
        }
        ArmSpec::TwoArmPoly { n } => {
            let p = Paths::one_arm(lat, n);
            Box::new(move |c| p.exists(c, Colour::Black) && p.exists(c, Colour::White))
        }
        ArmSpec::DisjointTwoBlack { n } => {
            let p = Paths::one_arm(lat, n);
            Box::new(move |c| p.disjoint(c, c))
        }
        ArmSpec::FourArm { k, n } => {
            let a = Annulus::new(lat, k, n);
            Box::new(move |c| a.four_arm(c))
        }
        ArmSpec::Crossing { rect, dir, colour } => {
            let p = Paths::crossing(lat, &rect, dir == Direction::LeftRight);
            Box::new(move |c| p.exists(c, colour))
        }
        other => panic!("no oracle for {other:?}"),
    }
}
