use super::detect::{chain_exists, Chain, Workspace};
use super::{Colour, PercoConfig};
use crate::error::{Error, Result};
use crate::lattice::{HexId, HexSet, Lattice, NO_HEX};
use crate::perco::{ArmSpec, Detector};

/// ∇_x 1_E(c) = 1_E(c^x) − 1_E(c_x), by two evaluations with the bit forced.
pub fn pivotal_grad(det: &Detector, c: &PercoConfig, x: HexId, ws: &mut Workspace) -> Result<i8> {
    let id = det.lattice().id(x).ok_or_else(|| Error::Geometry(format!("hexagon {x:?} is not in the lattice")))?;
    if c.tag() != det.lattice().fingerprint() {
        return Err(Error::LatticeMismatch);
    }
    Ok(forced_grad(det, c, id, ws))
}

pub(crate) fn forced_grad(det: &Detector, c: &PercoConfig, id: u32, ws: &mut Workspace) -> i8 {
    let up = det.eval(&c.with(id, true), ws) as i8;
    let down = det.eval(&c.with(id, false), ws) as i8;
    up - down
}

/// All hexagons x with ∇_x 1_{A_n(σ)}(c) ≠ 0; the sign of the gradient is +1 for black and −1 for white.
pub fn one_arm_pivotals(lat: &Lattice, c: &PercoConfig, colour: Colour, n: i64) -> Result<HexSet> {
    let det = ArmSpec::OneArm { colour, n }.compile(lat)?;
    if c.tag() != lat.fingerprint() {
        return Err(Error::LatticeMismatch);
    }
    let (_, ch) = det.single_chain().expect("one-arm detectors hold a single chain");
    Ok(chain_pivotals(lat, c, colour, ch, &mut Workspace::new()))
}

/// Pivotal hexagons for the existence of a `colour` chain.
pub(crate) fn chain_pivotals(lat: &Lattice, c: &PercoConfig, colour: Colour, ch: &Chain, ws: &mut Workspace) -> HexSet {
    if chain_exists(lat, c, colour, ch, None, ws) {
        separators(lat, c, colour, ch)
    } else {
        bridges(lat, c, colour, ch, ws)
    }
}

/// Opposite-colour hexagons whose flip joins the source cluster to the target cluster.
fn bridges(lat: &Lattice, c: &PercoConfig, colour: Colour, ch: &Chain, ws: &mut Workspace) -> HexSet {
    let open = |h: u32| ch.allowed.contains(h) && c.has_colour(h, colour);
    let grow = |seeds: &mut dyn Iterator<Item = u32>, ws: &mut Workspace| -> HexSet {
        let mut set = lat.empty_set();
        ws.queue.clear();
        for s in seeds {
            if open(s) && !set.contains(s) {
                set.insert(s);
                ws.queue.push(s);
            }
        }
        let mut head = 0;
        while head < ws.queue.len() {
            let h = ws.queue[head];
            head += 1;
            for &g in lat.nbr_ids(h) {
                if g != NO_HEX && !set.contains(g) && open(g) {
                    set.insert(g);
                    ws.queue.push(g);
                }
            }
        }
        set
    };
    let from_s = grow(&mut ch.sources.iter().copied(), ws);
    let from_t = grow(&mut ch.targets.iter(), ws);
    let sources = lat.set_of(ch.sources.iter().copied());
    let touches = |h: u32, set: &HexSet| lat.nbr_ids(h).iter().any(|&g| g != NO_HEX && set.contains(g));
    let mut out = lat.empty_set();
    for h in ch.allowed.iter() {
        if c.has_colour(h, colour) {
            continue;
        }
        let s_ok = sources.contains(h) || touches(h, &from_s);
        if s_ok && (ch.targets.contains(h) || touches(h, &from_t)) {
            out.insert(h);
        }
    }
    out
}

/// Vertices separating a virtual source from a virtual sink in the `colour` graph (iterative Tarjan).
fn separators(lat: &Lattice, c: &PercoConfig, colour: Colour, ch: &Chain) -> HexSet {
    let len = lat.len();
    let (s, t) = (len as u32, len as u32 + 1);
    let targets: Vec<u32> = ch.targets.iter().filter(|&h| ch.allowed.contains(h) && c.has_colour(h, colour)).collect();
    let sources: Vec<u32> = ch.sources.iter().copied().filter(|&h| ch.allowed.contains(h) && c.has_colour(h, colour)).collect();
    let is_source = lat.set_of(sources.iter().copied());
    let open = |h: u32| ch.allowed.contains(h) && c.has_colour(h, colour);
    // Neighbour slot k of a hexagon: 0..6 lattice neighbours, 6 = virtual source, 7 = virtual sink.
    let nbr = |u: u32, k: usize| -> Option<Option<u32>> {
        if u == s {
            return sources.get(k).map(|&h| Some(h));
        }
        if u == t {
            return targets.get(k).map(|&h| Some(h));
        }
        match k {
            0..=5 => {
                let g = lat.nbr_ids(u)[k];
                Some((g != NO_HEX && open(g)).then_some(g))
            }
            6 => Some(is_source.contains(u).then_some(s)),
            7 => Some(ch.targets.contains(u).then_some(t)),
            _ => None,
        }
    };
    let mut disc = vec![0u32; len + 2];
    let mut low = vec![0u32; len + 2];
    let mut has_t = vec![false; len + 2];
    let mut out = lat.empty_set();
    let mut stack: Vec<(u32, usize)> = vec![(s, 0)];
    let mut clock = 1;
    disc[s as usize] = clock;
    low[s as usize] = clock;
    while let Some(&(u, k)) = stack.last() {
        match nbr(u, k) {
            Some(next) => {
                stack.last_mut().expect("non-empty").1 += 1;
                let Some(v) = next else { continue };
                if disc[v as usize] == 0 {
                    clock += 1;
                    disc[v as usize] = clock;
                    low[v as usize] = clock;
                    has_t[v as usize] = v == t;
                    stack.push((v, 0));
                } else {
                    low[u as usize] = low[u as usize].min(disc[v as usize]);
                }
            }
            None => {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    let (ui, pi) = (u as usize, p as usize);
                    low[pi] = low[pi].min(low[ui]);
                    has_t[pi] |= has_t[ui];
                    if p != s && has_t[ui] && low[ui] >= disc[pi] {
                        out.insert(p);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perco::{sample, RngStream};

    #[test]
    fn fast_pivotals_match_forced_evaluations() {
        let lat = Lattice::with_unit_pitch(5).unwrap();
        let mut ws = Workspace::new();
        for colour in [Colour::Black, Colour::White] {
            let det = ArmSpec::OneArm { colour, n: 5 }.compile(&lat).unwrap();
            for s in 0..150 {
                let c = sample(&lat, &mut RngStream::new(21, s).rng());
                let fast = one_arm_pivotals(&lat, &c, colour, 5).unwrap();
                for id in 0..lat.len() as u32 {
                    let g = forced_grad(&det, &c, id, &mut ws);
                    let want = if colour.is_black() { 1 } else { -1 };
                    assert!(g == 0 || g == want);
                    assert_eq!(g != 0, fast.contains(id), "seed {s} hex {:?}", lat.hex(id));
                }
            }
        }
    }

    #[test]
    fn all_black_has_no_pivotal_for_large_arm() {
        let lat = Lattice::with_unit_pitch(4).unwrap();
        let c = PercoConfig::uniform(&lat, Colour::Black);
        assert!(one_arm_pivotals(&lat, &c, Colour::Black, 4).unwrap().is_empty());
        let det = ArmSpec::OneArm { colour: Colour::Black, n: 4 }.compile(&lat).unwrap();
        assert_eq!(pivotal_grad(&det, &c, HexId::ORIGIN, &mut Workspace::new()).unwrap(), 0);
    }
}
