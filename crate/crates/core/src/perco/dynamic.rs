use serde::{Deserialize, Serialize};

use super::detect::{chain_exists, origin_chain, Chain, Workspace};
use super::{Colour, PercoConfig};
use crate::error::{Error, Result};
use crate::lattice::{HexSet, Lattice, NO_HEX};

/// Outcome of a budgeted exact search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// Black arm in c0 and black arm in c1 with disjoint hexagon sets.
#[derive(Clone, Debug)]
pub struct DynamicDisjoint {
    lat: Lattice,
    chain: Chain,
    budget: u64,
}

impl DynamicDisjoint {
    pub fn new(lat: &Lattice, n: i64, budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidParameter("node budget must be positive".into()));
        }
        Ok(DynamicDisjoint { lat: lat.clone(), chain: origin_chain(lat, n)?, budget })
    }

    pub fn eval(&self, c0: &PercoConfig, c1: &PercoConfig, ws: &mut Workspace) -> Result<Tri> {
        c0.check_same(c1)?;
        if c0.tag() != self.lat.fingerprint() {
            return Err(Error::LatticeMismatch);
        }
        let (lat, ch) = (&self.lat, &self.chain);
        let black = Colour::Black;
        if !chain_exists(lat, c0, black, ch, None, ws) || !chain_exists(lat, c1, black, ch, None, ws) {
            return Ok(Tri::No);
        }
        for (a, b) in [(c0, c1), (c1, c0)] {
            if let Some(path) = self.shortest_path(a, ws) {
                if chain_exists(lat, b, black, ch, Some(&path), ws) {
                    return Ok(Tri::Yes);
                }
            }
        }
        Ok(self.branch_and_bound(c0, c1, ws))
    }

    fn shortest_path(&self, c: &PercoConfig, ws: &mut Workspace) -> Option<HexSet> {
        let (lat, ch) = (&self.lat, &self.chain);
        let mut parent = vec![NO_HEX; lat.len()];
        ws.begin(lat.len());
        let open = |h: u32| ch.allowed.contains(h) && c.is_black(h);
        let mut end = None;
        for &s in &ch.sources {
            if open(s) && !ws.marked(s) {
                ws.set_mark(s);
                ws.queue.push(s);
            }
        }
        let mut head = 0;
        while head < ws.queue.len() && end.is_none() {
            let h = ws.queue[head];
            head += 1;
            if ch.targets.contains(h) {
                end = Some(h);
                break;
            }
            for &g in lat.nbr_ids(h) {
                if g != NO_HEX && !ws.marked(g) && open(g) {
                    ws.set_mark(g);
                    parent[g as usize] = h;
                    ws.queue.push(g);
                }
            }
        }
        let mut h = end?;
        let mut path = lat.empty_set();
        loop {
            path.insert(h);
            if parent[h as usize] == NO_HEX {
                return Some(path);
            }
            h = parent[h as usize];
        }
    }

    /// Depth-first search over chordless black paths of c0, pruned by reachability in both configurations.
    fn branch_and_bound(&self, c0: &PercoConfig, c1: &PercoConfig, ws: &mut Workspace) -> Tri {
        let (lat, ch) = (&self.lat, &self.chain);
        let sources = lat.set_of(ch.sources.iter().copied());
        let usable = |h: u32| ch.allowed.contains(h) && c0.is_black(h);
        let mut in_path = lat.empty_set();
        // Number of non-final path hexagons adjacent to each hexagon.
        let mut shadow = vec![0u16; lat.len()];
        let mut path: Vec<(u32, usize)> = Vec::new();
        let mut nodes = 0u64;
        let mut roots = ch.sources.iter().copied().filter(|&s| usable(s));

        let cast_shadow = |shadow: &mut Vec<u16>, h: u32, d: i16| {
            for &g in lat.nbr_ids(h) {
                if g != NO_HEX {
                    shadow[g as usize] = (shadow[g as usize] as i16 + d) as u16;
                }
            }
        };

        loop {
            // Choose the next extension of the current path.
            let next = match path.last_mut() {
                None => match roots.next() {
                    Some(r) => Some(r),
                    None => return Tri::No,
                },
                Some((u, k)) => {
                    let mut found = None;
                    while *k < 6 {
                        let g = lat.nbr_ids(*u)[*k];
                        *k += 1;
                        if g != NO_HEX && usable(g) && !sources.contains(g) && !in_path.contains(g) && shadow[g as usize] == 0 {
                            found = Some(g);
                            break;
                        }
                    }
                    found
                }
            };
            let Some(v) = next else {
                let (u, _) = path.pop().expect("non-empty path");
                in_path.remove(u);
                if let Some(&(p, _)) = path.last() {
                    cast_shadow(&mut shadow, p, -1);
                }
                continue;
            };
            nodes += 1;
            if nodes > self.budget {
                return Tri::Unknown;
            }
            if let Some(&(p, _)) = path.last() {
                cast_shadow(&mut shadow, p, 1);
            }
            path.push((v, 0));
            in_path.insert(v);
            let retreat = if ch.targets.contains(v) {
                if chain_exists(lat, c1, Colour::Black, ch, Some(&in_path), ws) {
                    return Tri::Yes;
                }
                true
            } else {
                !chain_exists(lat, c1, Colour::Black, ch, Some(&in_path), ws) || !self.can_finish(c0, v, &in_path, &shadow, &sources, ws)
            };
            if retreat {
                path.pop();
                in_path.remove(v);
                if let Some(&(p, _)) = path.last() {
                    cast_shadow(&mut shadow, p, -1);
                }
            }
        }
    }

    /// Whether a target is reachable from `v` through hexagons still admissible for the path.
    fn can_finish(
        &self,
        c0: &PercoConfig,
        v: u32,
        in_path: &HexSet,
        shadow: &[u16],
        sources: &HexSet,
        ws: &mut Workspace,
    ) -> bool {
        let (lat, ch) = (&self.lat, &self.chain);
        ws.begin(lat.len());
        ws.set_mark(v);
        ws.queue.push(v);
        let mut head = 0;
        while head < ws.queue.len() {
            let h = ws.queue[head];
            head += 1;
            for &g in lat.nbr_ids(h) {
                if g == NO_HEX || ws.marked(g) {
                    continue;
                }
                if !ch.allowed.contains(g) || !c0.is_black(g) || sources.contains(g) || in_path.contains(g) {
                    continue;
                }
                // Neighbours of v are the only ones allowed next to the last path hexagon.
                if shadow[g as usize] > 0 {
                    continue;
                }
                if ch.targets.contains(g) {
                    return true;
                }
                ws.set_mark(g);
                ws.queue.push(g);
            }
        }
        false
    }
}

pub fn has_disjoint_two_arms_dynamic(
    lat: &Lattice,
    c0: &PercoConfig,
    c1: &PercoConfig,
    n: i64,
    budget: u64,
) -> Result<Tri> {
    DynamicDisjoint::new(lat, n, budget)?.eval(c0, c1, &mut Workspace::new())
}
