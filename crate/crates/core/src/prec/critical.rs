use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    t: u64,
    prio: u64,
    left: usize,
    right: usize,
    /// Pending increment for the whole subtree, this node included.
    m_inc: usize,
    m_self: usize,
    /// `m_inc + max(m_self, m_max(left), m_max(right))`.
    m_max: usize,
}

/// Critical time points `T` with the number of jobs `m_t` running right after
/// each one. The count at `t` is the sum of `m_inc` over the root path plus
/// `m_self` at `t`'s node, which lets `increase` touch a whole range at once.
#[derive(Debug, Clone)]
pub struct CriticalCounters {
    m: usize,
    nodes: Vec<Node>,
    root: usize,
    rng: ChaCha8Rng,
}

impl CriticalCounters {
    /// `T = {0}` with `m_0 = 0`; counts saturate at `m`.
    pub fn new(m: usize) -> Self {
        let mut s = CriticalCounters { m, nodes: Vec::new(), root: NIL, rng: ChaCha8Rng::seed_from_u64(0xc417) };
        s.root = s.alloc(0, 0);
        s
    }

    fn alloc(&mut self, t: u64, count: usize) -> usize {
        let prio = self.rng.gen();
        self.nodes.push(Node { t, prio, left: NIL, right: NIL, m_inc: 0, m_self: count, m_max: count });
        self.nodes.len() - 1
    }

    fn m_max(&self, v: usize) -> usize {
        if v == NIL {
            0
        } else {
            self.nodes[v].m_max
        }
    }

    fn bump(&mut self, v: usize, by: usize) {
        if v != NIL {
            self.nodes[v].m_inc += by;
            self.nodes[v].m_max += by;
        }
    }

    fn push(&mut self, v: usize) {
        let inc = self.nodes[v].m_inc;
        if inc > 0 {
            let (l, r) = (self.nodes[v].left, self.nodes[v].right);
            self.bump(l, inc);
            self.bump(r, inc);
            self.nodes[v].m_self += inc;
            self.nodes[v].m_inc = 0;
        }
    }

    fn pull(&mut self, v: usize) {
        let n = &self.nodes[v];
        let m = n.m_inc + n.m_self.max(self.m_max(n.left)).max(self.m_max(n.right));
        self.nodes[v].m_max = m;
    }

    fn split(&mut self, v: usize, key: u64) -> (usize, usize) {
        if v == NIL {
            return (NIL, NIL);
        }
        self.push(v);
        if self.nodes[v].t < key {
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
            self.push(a);
            let r = self.merge(self.nodes[a].right, b);
            self.nodes[a].right = r;
            self.pull(a);
            a
        } else {
            self.push(b);
            let l = self.merge(a, self.nodes[b].left);
            self.nodes[b].left = l;
            self.pull(b);
            b
        }
    }

    /// `m_t` of the largest critical point `≤ t`.
    pub fn count_at(&self, t: u64) -> usize {
        let mut v = self.root;
        let mut acc = 0;
        let mut count = 0;
        while v != NIL {
            let n = &self.nodes[v];
            acc += n.m_inc;
            if n.t <= t {
                count = acc + n.m_self;
                v = n.right;
            } else {
                v = n.left;
            }
        }
        count
    }

    pub fn contains(&self, t: u64) -> bool {
        let mut v = self.root;
        while v != NIL {
            let n = &self.nodes[v];
            if n.t == t {
                return true;
            }
            v = if t < n.t { n.left } else { n.right };
        }
        false
    }

    /// Smallest critical point `> t`.
    pub fn next_after(&self, t: u64) -> Option<u64> {
        let mut v = self.root;
        let mut best = None;
        while v != NIL {
            let n = &self.nodes[v];
            if n.t > t {
                best = Some(n.t);
                v = n.left;
            } else {
                v = n.right;
            }
        }
        best
    }

    /// Adds `t` to `T`, inheriting the count of the critical point before it.
    pub fn insert(&mut self, t: u64) {
        if self.contains(t) {
            return;
        }
        let count = self.count_at(t);
        let u = self.alloc(t, count);
        let (a, b) = self.split(self.root, t);
        let l = self.merge(a, u);
        self.root = self.merge(l, b);
    }

    /// Adds one to `m_t` for every critical `t ∈ [τ, τ′)` and returns the points
    /// that reach `m`, each paired with the critical point after it.
    pub fn increase(&mut self, tau: u64, tau2: u64) -> Result<Vec<(u64, u64)>> {
        let (left, rest) = self.split(self.root, tau);
        let (mid, right) = self.split(rest, tau2);
        if self.m_max(mid) >= self.m {
            let l = self.merge(left, mid);
            self.root = self.merge(l, right);
            return Err(Error::Invariant(format!("more than {} jobs would run inside ({tau}, {tau2}]", self.m)));
        }
        self.bump(mid, 1);
        let mut full = Vec::new();
        self.collect_full(mid, 0, &mut full);
        let l = self.merge(left, mid);
        self.root = self.merge(l, right);
        full.into_iter()
            .map(|t| {
                self.next_after(t)
                    .map(|next| (t, next))
                    .ok_or_else(|| Error::Invariant(format!("critical point {t} has no successor")))
            })
            .collect()
    }

    /// In-order points of the subtree of `v` whose count equals `m`; `acc` is the
    /// sum of `m_inc` strictly above `v`.
    fn collect_full(&self, v: usize, acc: usize, out: &mut Vec<u64>) {
        if v == NIL || acc + self.nodes[v].m_max < self.m {
            return;
        }
        let n = &self.nodes[v];
        let below = acc + n.m_inc;
        self.collect_full(n.left, below, out);
        if below + n.m_self == self.m {
            out.push(n.t);
        }
        self.collect_full(n.right, below, out);
    }

    /// `(t, m_t)` in time order.
    pub fn points(&self) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        self.walk(self.root, 0, &mut out);
        out
    }

    fn walk(&self, v: usize, acc: usize, out: &mut Vec<(u64, usize)>) {
        if v == NIL {
            return;
        }
        let n = &self.nodes[v];
        let below = acc + n.m_inc;
        self.walk(n.left, below, out);
        out.push((n.t, below + n.m_self));
        self.walk(n.right, below, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn hand_run() {
        let mut c = CriticalCounters::new(2);
        c.insert(3);
        assert_eq!(c.increase(0, 3).unwrap(), vec![]);
        c.insert(2);
        assert_eq!(c.points(), vec![(0, 1), (2, 1), (3, 0)]);
        assert_eq!(c.increase(0, 2).unwrap(), vec![(0, 2)]);
        assert_eq!(c.points(), vec![(0, 2), (2, 1), (3, 0)]);
        assert!(c.increase(0, 2).is_err());
        assert_eq!(c.points(), vec![(0, 2), (2, 1), (3, 0)]);
    }

    #[test]
    fn matches_ordered_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = rng.gen_range(1..4);
            let mut c = CriticalCounters::new(m);
            let mut map: BTreeMap<u64, usize> = BTreeMap::from([(0, 0)]);
            for _ in 0..25 {
                if rng.gen_bool(0.5) {
                    let t = rng.gen_range(1..40);
                    c.insert(t);
                    let before = *map.range(..=t).next_back().unwrap().1;
                    map.entry(t).or_insert(before);
                } else {
                    let keys: Vec<u64> = map.keys().copied().collect();
                    let a = rng.gen_range(0..keys.len());
                    let b = rng.gen_range(a..keys.len());
                    let (tau, tau2) = (keys[a], if b + 1 < keys.len() { keys[b + 1] } else { keys[b] + 1 });
                    if map.range(tau..tau2).any(|(_, &v)| v >= m) {
                        assert!(c.increase(tau, tau2).is_err());
                    } else {
                        if b + 1 == keys.len() {
                            c.insert(tau2);
                            map.insert(tau2, map[&keys[b]]);
                        }
                        let mut want = Vec::new();
                        for (&t, v) in map.range_mut(tau..tau2) {
                            *v += 1;
                            if *v == m {
                                want.push(t);
                            }
                        }
                        let want: Vec<(u64, u64)> =
                            want.into_iter().map(|t| (t, *map.range(t + 1..).next().unwrap().0)).collect();
                        assert_eq!(c.increase(tau, tau2).unwrap(), want);
                    }
                }
                let expect: Vec<(u64, usize)> = map.iter().map(|(&t, &v)| (t, v)).collect();
                assert_eq!(c.points(), expect);
                let probe = rng.gen_range(0..45);
                assert_eq!(c.count_at(probe), *map.range(..=probe).next_back().unwrap().1);
            }
        }
    }
}
