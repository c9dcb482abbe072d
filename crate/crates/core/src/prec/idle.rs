use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NIL: usize = usize::MAX;
/// End of the unbounded last interval.
pub const OPEN: u64 = u64::MAX;

#[derive(Debug, Clone)]
struct Node {
    start: u64,
    end: u64,
    prio: u64,
    left: usize,
    right: usize,
    max_len: u64,
}

/// Maximal idle intervals `(start, end]`, kept in a treap ordered by start.
/// Every node also stores the longest interval length in its subtree.
#[derive(Debug, Clone)]
pub struct IdleIntervals {
    nodes: Vec<Node>,
    root: usize,
    rng: ChaCha8Rng,
}

impl Default for IdleIntervals {
    fn default() -> Self {
        Self::new()
    }
}

impl IdleIntervals {
    /// Everything after time 0 is idle.
    pub fn new() -> Self {
        let mut s = IdleIntervals { nodes: Vec::new(), root: NIL, rng: ChaCha8Rng::seed_from_u64(0x1d1e) };
        s.root = s.alloc(0, OPEN);
        s
    }

    fn alloc(&mut self, start: u64, end: u64) -> usize {
        let prio = self.rng.gen();
        self.nodes.push(Node { start, end, prio, left: NIL, right: NIL, max_len: end - start });
        self.nodes.len() - 1
    }

    fn max_len(&self, v: usize) -> u64 {
        if v == NIL {
            0
        } else {
            self.nodes[v].max_len
        }
    }

    fn pull(&mut self, v: usize) {
        let n = &self.nodes[v];
        let m = (n.end - n.start).max(self.max_len(n.left)).max(self.max_len(n.right));
        self.nodes[v].max_len = m;
    }

    /// Splits into starts `< key` and starts `≥ key`.
    fn split(&mut self, v: usize, key: u64) -> (usize, usize) {
        if v == NIL {
            return (NIL, NIL);
        }
        if self.nodes[v].start < key {
            let (a, b) = self.split(self.nodes[v].right, key);
            self.nodes[v].right = a;
            self.pull(v);
            (v, b)
        } else {
            let (a, b) = self.split(self.nodes[v].left, key);
            self.nodes[v].left = b;
            self.pull(v);
            (a, v)
        }
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a].prio > self.nodes[b].prio {
            let r = self.merge(self.nodes[a].right, b);
            self.nodes[a].right = r;
            self.pull(a);
            a
        } else {
            let l = self.merge(a, self.nodes[b].left);
            self.nodes[b].left = l;
            self.pull(b);
            b
        }
    }

    /// Leftmost interval with start `> t` and length `≥ p` in the subtree of `v`.
    fn leftmost_fit(&self, v: usize, t: u64, p: u64) -> Option<usize> {
        if v == NIL || self.nodes[v].max_len < p {
            return None;
        }
        let n = &self.nodes[v];
        if n.start > t {
            if let Some(u) = self.leftmost_fit(n.left, t, p) {
                return Some(u);
            }
            if n.end - n.start >= p {
                return Some(v);
            }
        }
        self.leftmost_fit(n.right, t, p)
    }

    /// Smallest `t′ ≥ t` such that every slot of `(t′, t′+p]` is idle.
    pub fn find(&self, t: u64, p: u64) -> u64 {
        if let Some(v) = self.floor_in(self.root, t) {
            let n = &self.nodes[v];
            if n.end > t && n.end - t >= p {
                return t;
            }
        }
        let v = self.leftmost_fit(self.root, t, p).expect("the last interval is unbounded");
        self.nodes[v].start
    }

    /// Marks `(t, t′]` busy; it must lie inside one idle interval.
    pub fn remove(&mut self, t: u64, t2: u64) -> Result<()> {
        if t >= t2 {
            return Err(Error::Argument(format!("empty interval ({t}, {t2}]")));
        }
        let (left, right) = self.split(self.root, t + 1);
        let host = match self.floor_in(left, t) {
            Some(v) if self.nodes[v].end >= t2 => v,
            _ => {
                self.root = self.merge(left, right);
                return Err(Error::Invariant(format!("({t}, {t2}] is not inside an idle interval")));
            }
        };
        let (a, b) = (self.nodes[host].start, self.nodes[host].end);
        let (rest, last) = self.split(left, a);
        debug_assert_eq!(last, host);
        let mut mid = NIL;
        if a < t {
            let u = self.alloc(a, t);
            mid = self.merge(mid, u);
        }
        if t2 < b {
            let u = self.alloc(t2, b);
            mid = self.merge(mid, u);
        }
        let l = self.merge(rest, mid);
        self.root = self.merge(l, right);
        Ok(())
    }

    /// The interval with the largest start `≤ t` in the subtree of `v`.
    fn floor_in(&self, mut v: usize, t: u64) -> Option<usize> {
        let mut best = None;
        while v != NIL {
            if self.nodes[v].start <= t {
                best = Some(v);
                v = self.nodes[v].right;
            } else {
                v = self.nodes[v].left;
            }
        }
        best
    }

    /// Intervals in time order.
    pub fn intervals(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut v = self.root;
        while v != NIL || !stack.is_empty() {
            while v != NIL {
                stack.push(v);
                v = self.nodes[v].left;
            }
            let u = stack.pop().expect("stack is non-empty");
            out.push((self.nodes[u].start, self.nodes[u].end));
            v = self.nodes[u].right;
        }
        out
    }
}
