use super::detect::{Chain, Workspace};
use super::{Colour, PercoConfig};
use crate::lattice::{Lattice, NO_HEX};

const NONE: u32 = u32::MAX;

/// Residual graph of the vertex-split unit-capacity network.
#[derive(Debug, Default)]
pub(crate) struct FlowScratch {
    local: Vec<u32>,
    head: Vec<u32>,
    to: Vec<u32>,
    cap: Vec<u8>,
    next: Vec<u32>,
    prev: Vec<u32>,
    queue: Vec<u32>,
}

impl FlowScratch {
    fn add_edge(&mut self, a: u32, b: u32) {
        for (u, v, c) in [(a, b, 1u8), (b, a, 0u8)] {
            self.to.push(v);
            self.cap.push(c);
            self.next.push(self.head[u as usize]);
            self.head[u as usize] = self.to.len() as u32 - 1;
        }
    }

    fn augment(&mut self, src: u32, snk: u32) -> bool {
        self.prev.clear();
        self.prev.resize(self.head.len(), NONE);
        self.queue.clear();
        self.queue.push(src);
        self.prev[src as usize] = NONE - 1;
        let mut qh = 0;
        while qh < self.queue.len() {
            let u = self.queue[qh];
            qh += 1;
            let mut e = self.head[u as usize];
            while e != NONE {
                let v = self.to[e as usize];
                if self.cap[e as usize] > 0 && self.prev[v as usize] == NONE {
                    self.prev[v as usize] = e;
                    if v == snk {
                        let mut x = snk;
                        while x != src {
                            let pe = self.prev[x as usize] as usize;
                            self.cap[pe] -= 1;
                            self.cap[pe ^ 1] += 1;
                            x = self.to[pe ^ 1];
                        }
                        return true;
                    }
                    self.queue.push(v);
                }
                e = self.next[e as usize];
            }
        }
        false
    }
}

/// Maximum number of face-disjoint `colour` chains in `ch`, capped at `cap`.
pub(crate) fn disjoint_arm_count(
    lat: &Lattice,
    c: &PercoConfig,
    colour: Colour,
    ch: &Chain,
    cap: usize,
    ws: &mut Workspace,
) -> usize {
    // Restrict the network to the cluster of the sources.
    ws.begin(lat.len());
    let open_hex = |h: u32| ch.allowed.contains(h) && c.has_colour(h, colour);
    let mut reached = false;
    for &s in &ch.sources {
        if open_hex(s) && !ws.marked(s) {
            ws.set_mark(s);
            ws.queue.push(s);
        }
    }
    let mut head = 0;
    while head < ws.queue.len() {
        let h = ws.queue[head];
        head += 1;
        reached |= ch.targets.contains(h);
        for &g in lat.nbr_ids(h) {
            if g != NO_HEX && !ws.marked(g) && open_hex(g) {
                ws.set_mark(g);
                ws.queue.push(g);
            }
        }
    }
    if !reached {
        return 0;
    }
    let cluster = std::mem::take(&mut ws.queue);
    let fs = &mut ws.flow;
    fs.local.clear();
    fs.local.resize(lat.len(), NONE);
    for (i, &h) in cluster.iter().enumerate() {
        fs.local[h as usize] = i as u32;
    }
    let open = cluster.len() as u32;
    // Node 2i is the entry of face i, 2i + 1 its exit.
    let (src, snk) = (2 * open, 2 * open + 1);
    fs.head.clear();
    fs.head.resize(2 * open as usize + 2, NONE);
    fs.to.clear();
    fs.cap.clear();
    fs.next.clear();
    for &h in &cluster {
        let i = fs.local[h as usize];
        fs.add_edge(2 * i, 2 * i + 1);
        for &g in lat.nbr_ids(h) {
            if g != NO_HEX && fs.local[g as usize] != NONE {
                let j = fs.local[g as usize];
                fs.add_edge(2 * i + 1, 2 * j);
            }
        }
        if ch.targets.contains(h) {
            fs.add_edge(2 * i + 1, snk);
        }
    }
    for &s in &ch.sources {
        if fs.local[s as usize] != NONE {
            let i = fs.local[s as usize];
            fs.add_edge(src, 2 * i);
        }
    }
    let mut flow = 0;
    while flow < cap && fs.augment(src, snk) {
        flow += 1;
    }
    ws.queue = cluster;
    flow
}

/// Two face-disjoint black chains.
pub(crate) fn two_disjoint_arms(lat: &Lattice, c: &PercoConfig, ch: &Chain, ws: &mut Workspace) -> bool {
    disjoint_arm_count(lat, c, Colour::Black, ch, 2, ws) >= 2
}
