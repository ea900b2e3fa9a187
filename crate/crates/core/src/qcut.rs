//! Quantum min-cut on the extended cycle graph.
//!
//! The extended graph has circle vertices `0..m` and one terminal per site,
//! numbered `m..2m`. Circle edges `(i, i+1 mod m)` carry capacity `n`,
//! external edges `(i, m+i)` carry capacity `N`. A cut puts every source
//! terminal on the source side and every sink terminal on the sink side; its
//! quantum capacity is the product of the capacities of the (undirected)
//! edges it crosses, i.e. `N^a · n^b`.

use std::cmp::Ordering;
use std::collections::VecDeque;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mps::Partition;

/// Largest cycle handled by exhaustive enumeration.
pub const MAX_EXHAUSTIVE_SITES: usize = 26;
const FLOW_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedGraph {
    partition: Partition,
    circle_cap: u64,
    external_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Circle,
    External,
}

impl ExtendedGraph {
    pub fn new(partition: Partition, external_cap: u64, circle_cap: u64) -> Result<Self> {
        if external_cap == 0 || circle_cap == 0 {
            return Err(Error::InvalidArgument("capacities must be positive".into()));
        }
        Ok(Self {
            partition,
            circle_cap,
            external_cap,
        })
    }

    pub fn sites(&self) -> usize {
        self.partition.sites()
    }
    pub fn partition(&self) -> &Partition {
        &self.partition
    }
    pub fn vertex_count(&self) -> usize {
        2 * self.sites()
    }

    /// All `2m` edges as `(u, v, kind)`.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeKind)> {
        let m = self.sites();
        (0..m)
            .map(|i| (i, (i + 1) % m, EdgeKind::Circle))
            .chain((0..m).map(|i| (i, m + i, EdgeKind::External)))
            .collect()
    }

    fn capacity_of(&self, kind: EdgeKind) -> u64 {
        match kind {
            EdgeKind::Circle => self.circle_cap,
            EdgeKind::External => self.external_cap,
        }
    }

    /// The cut whose source side is exactly the circle vertices flagged in
    /// `circle_mask` plus the source terminals.
    pub fn cut_from_mask(&self, circle_mask: u64) -> CutSpec {
        let m = self.sites();
        let mut side = vec![false; 2 * m];
        for (i, s) in side.iter_mut().enumerate().take(m) {
            *s = circle_mask >> i & 1 == 1;
        }
        for i in 0..m {
            side[m + i] = self.partition.is_source(i);
        }
        CutSpec { source_side: side }
    }

    fn crossing(&self, cut: &CutSpec) -> CutCapacity {
        let mut cap = CutCapacity::default();
        for (u, v, kind) in self.edges() {
            if cut.source_side[u] != cut.source_side[v] {
                match kind {
                    EdgeKind::Circle => cap.circle_edges += 1,
                    EdgeKind::External => cap.external_edges += 1,
                }
            }
        }
        cap
    }

    fn crossing_mask(&self, circle_mask: u64, terminal_mask: u64) -> CutCapacity {
        let m = self.sites();
        let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let rotated = ((circle_mask >> 1) | (circle_mask << (m - 1))) & full;
        CutCapacity {
            external_edges: ((circle_mask ^ terminal_mask) & full).count_ones(),
            circle_edges: ((circle_mask ^ rotated) & full).count_ones(),
        }
    }

    fn compare(&self, a: &CutCapacity, b: &CutCapacity) -> Ordering {
        if self.circle_cap == self.external_cap {
            (a.external_edges + a.circle_edges).cmp(&(b.external_edges + b.circle_edges))
        } else {
            a.value(self.external_cap, self.circle_cap)
                .cmp(&b.value(self.external_cap, self.circle_cap))
        }
    }
}

/// Assignment of every vertex of the extended graph to the source side
/// (`true`) or the sink side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutSpec {
    pub source_side: Vec<bool>,
}

impl CutSpec {
    pub fn validate(&self, g: &ExtendedGraph) -> Result<()> {
        let m = g.sites();
        if self.source_side.len() != 2 * m {
            return Err(Error::InvalidArgument(format!(
                "cut assigns {} vertices, graph has {}",
                self.source_side.len(),
                2 * m
            )));
        }
        for i in 0..m {
            if self.source_side[m + i] != g.partition.is_source(i) {
                return Err(Error::InvalidArgument(format!(
                    "terminal of site {} is on the wrong side",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Circle vertices on the source side, as 1-based sites.
    pub fn circle_sources(&self) -> Vec<usize> {
        let m = self.source_side.len() / 2;
        (0..m).filter(|&i| self.source_side[i]).map(|i| i + 1).collect()
    }
}

/// Capacity `N^external_edges · n^circle_edges`, kept as exponents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutCapacity {
    pub external_edges: u32,
    pub circle_edges: u32,
}

impl CutCapacity {
    pub fn value(&self, external_cap: u64, circle_cap: u64) -> BigUint {
        BigUint::from(external_cap).pow(self.external_edges)
            * BigUint::from(circle_cap).pow(self.circle_edges)
    }
}

/// Quantum capacity of a cut.
pub fn qcap(g: &ExtendedGraph, cut: &CutSpec) -> Result<BigUint> {
    cut.validate(g)?;
    Ok(g.crossing(cut).value(g.external_cap, g.circle_cap))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QmcResult {
    pub m: usize,
    #[serde(rename = "N")]
    pub external_cap: u64,
    pub n: u64,
    pub partition: Partition,
    #[serde(serialize_with = "serialize_big")]
    pub qmc: BigUint,
    /// Source side of a minimizing cut.
    pub argmin_cut: CutSpec,
}

/// Numbers that fit in `u64` become JSON numbers, larger ones decimal strings.
pub fn serialize_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match u64::try_from(v) {
        Ok(small) => s.serialize_u64(small),
        Err(_) => s.collect_str(v),
    }
}

/// Exact quantum min-cut by enumerating the `2^m` circle assignments
/// (terminals are forced). Ties go to the smallest circle mask.
pub fn qmc(m: usize, external_cap: u64, circle_cap: u64, part: &Partition) -> Result<QmcResult> {
    if part.sites() != m {
        return Err(Error::InvalidPartition(format!(
            "partition has {} sites, cycle has {m}",
            part.sites()
        )));
    }
    if m > MAX_EXHAUSTIVE_SITES {
        return Err(Error::InvalidArgument(format!(
            "exhaustive min-cut supports m <= {MAX_EXHAUSTIVE_SITES}, got {m}"
        )));
    }
    let g = ExtendedGraph::new(part.clone(), external_cap, circle_cap)?;
    let terminal_mask = part.sources().iter().fold(0u64, |acc, &s| acc | 1 << s);
    let (mask, cap) = (0..1u64 << m)
        .into_par_iter()
        .map(|mask| (mask, g.crossing_mask(mask, terminal_mask)))
        .reduce_with(|a, b| match g.compare(&a.1, &b.1) {
            Ordering::Less => a,
            Ordering::Greater => b,
            Ordering::Equal => {
                if a.0 <= b.0 {
                    a
                } else {
                    b
                }
            }
        })
        .expect("at least one assignment");
    Ok(QmcResult {
        m,
        external_cap,
        n: circle_cap,
        partition: part.clone(),
        qmc: cap.value(external_cap, circle_cap),
        argmin_cut: g.cut_from_mask(mask),
    })
}

/// Min-cut found by max-flow on `log(capacity)` edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCut {
    pub log_flow: f64,
    pub cut: CutSpec,
    /// Exact product of the capacities crossing `cut`.
    pub capacity: BigUint,
}

/// Edmonds–Karp on the undirected extended graph with `log` weights, a super
/// source feeding the source terminals and a super sink draining the sink
/// terminals. The cut is read off the residual graph and its capacity is
/// recomputed exactly.
pub fn max_flow_log_cut(g: &ExtendedGraph) -> Result<FlowCut> {
    let m = g.sites();
    let v = 2 * m + 2;
    let (src, snk) = (2 * m, 2 * m + 1);
    let mut cap = vec![vec![0.0f64; v]; v];
    for (a, b, kind) in g.edges() {
        if a == b {
            continue;
        }
        let w = (g.capacity_of(kind) as f64).ln();
        cap[a][b] += w;
        cap[b][a] += w;
    }
    for i in 0..m {
        if g.partition.is_source(i) {
            cap[src][m + i] = f64::INFINITY;
        } else {
            cap[m + i][snk] = f64::INFINITY;
        }
    }
    let mut flow_total = 0.0;
    loop {
        let mut parent = vec![usize::MAX; v];
        parent[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for w in 0..v {
                if parent[w] == usize::MAX && cap[u][w] > FLOW_EPS {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if parent[snk] == usize::MAX {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut w = snk;
        while w != src {
            let u = parent[w];
            bottleneck = bottleneck.min(cap[u][w]);
            w = u;
        }
        if !bottleneck.is_finite() {
            // A source terminal reaches a sink terminal through free edges
            // only; cannot happen with positive capacities on every edge.
            return Err(Error::InvalidArgument("unbounded flow".into()));
        }
        let mut w = snk;
        while w != src {
            let u = parent[w];
            cap[u][w] -= bottleneck;
            cap[w][u] += bottleneck;
            w = u;
        }
        flow_total += bottleneck;
    }
    let mut reachable = vec![false; v];
    reachable[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for w in 0..v {
            if !reachable[w] && cap[u][w] > FLOW_EPS {
                reachable[w] = true;
                queue.push_back(w);
            }
        }
    }
    let cut = CutSpec {
        source_side: reachable[..2 * m].to_vec(),
    };
    let capacity = qcap(g, &cut)?;
    Ok(FlowCut {
        log_flow: flow_total,
        cut,
        capacity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd_even(m: usize) -> Partition {
        Partition::odd_even(m).unwrap()
    }

    #[test]
    fn capacity_examples() {
        let g = ExtendedGraph::new(odd_even(4), 2, 2).unwrap();
        // all circle vertices on the sink side: only the source edges cross
        assert_eq!(qcap(&g, &g.cut_from_mask(0)).unwrap(), BigUint::from(4u32));
        // isolate circle vertex 1 with its terminal
        assert_eq!(qcap(&g, &g.cut_from_mask(0b0001)).unwrap(), BigUint::from(8u32));
        let g3 = ExtendedGraph::new(Partition::parse(5, "1,2").unwrap(), 3, 2).unwrap();
        assert_eq!(qcap(&g3, &g3.cut_from_mask(0)).unwrap(), BigUint::from(9u32));
    }

    #[test]
    fn invalid_cuts_are_rejected() {
        let g = ExtendedGraph::new(odd_even(4), 2, 2).unwrap();
        let mut cut = g.cut_from_mask(0);
        cut.source_side[4] = false;
        assert!(qcap(&g, &cut).is_err());
        assert!(qcap(&g, &CutSpec { source_side: vec![true; 3] }).is_err());
        assert!(ExtendedGraph::new(odd_even(4), 0, 2).is_err());
    }

    #[test]
    fn mask_crossing_matches_edge_walk() {
        for m in 1..=7 {
            for src in 1u64..(1 << m) - 1 {
                let sources: Vec<usize> = (0..m).filter(|&i| src >> i & 1 == 1).collect();
                let g = ExtendedGraph::new(Partition::from_sources(m, &sources).unwrap(), 3, 2).unwrap();
                for mask in 0..1u64 << m {
                    assert_eq!(g.crossing_mask(mask, src), g.crossing(&g.cut_from_mask(mask)));
                }
            }
        }
    }

    #[test]
    fn two_cycle_by_enumeration() {
        // C_2 has a doubled circle edge between the two circle vertices.
        let part = odd_even(2);
        let g = ExtendedGraph::new(part.clone(), 3, 2).unwrap();
        let caps: Vec<BigUint> = (0..4).map(|mask| qcap(&g, &g.cut_from_mask(mask)).unwrap()).collect();
        assert_eq!(caps, vec![3u32, 4, 36, 3].into_iter().map(BigUint::from).collect::<Vec<_>>());
        assert!(caps.iter().all(|c| *c > BigUint::from(1u32)));
        assert_eq!(qmc(2, 3, 2, &part).unwrap().qmc, BigUint::from(3u32));
    }

    #[test]
    fn min_cut_values() {
        for big_n in 2..=8u64 {
            assert_eq!(qmc(4, big_n, big_n, &odd_even(4)).unwrap().qmc, BigUint::from(big_n * big_n));
        }
        for d in 2..=6 {
            for big_n in 2..=3u64 {
                let r = qmc(2 * d, big_n, big_n, &odd_even(2 * d)).unwrap();
                assert_eq!(r.qmc, BigUint::from(big_n).pow(d as u32));
            }
        }
        // unit circle capacities make the all-circle cut free
        assert_eq!(qmc(4, 3, 1, &odd_even(4)).unwrap().qmc, BigUint::from(1u32));
    }

    #[test]
    fn argmin_cut_attains_the_minimum() {
        let part = Partition::parse(6, "1,2,4").unwrap();
        let r = qmc(6, 3, 2, &part).unwrap();
        let g = ExtendedGraph::new(part, 3, 2).unwrap();
        assert_eq!(qcap(&g, &r.argmin_cut).unwrap(), r.qmc);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["qmc"], serde_json::json!(r.qmc.to_string().parse::<u64>().unwrap()));
        assert_eq!(json["partition"], "1,2,4/3,5,6");
    }

    #[test]
    fn large_values_serialize_as_strings() {
        let r = qmc(10, 100_000, 100_000, &odd_even(10)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["qmc"], "10000000000000000000000000");
    }

    #[test]
    fn errors() {
        assert!(qmc(4, 2, 2, &odd_even(6)).is_err());
        assert!(qmc(28, 2, 2, &odd_even(28)).is_err());
    }

    #[test]
    fn flow_cut_agrees_with_enumeration_on_a_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for m in 2..=10 {
            for big_n in 2..=5u64 {
                for n in 2..=5u64 {
                    for _ in 0..20 {
                        let k = rng.gen_range(1..m);
                        let mut sites: Vec<usize> = (0..m).collect();
                        for i in 0..k {
                            let j = rng.gen_range(i..m);
                            sites.swap(i, j);
                        }
                        let part = Partition::from_sources(m, &sites[..k]).unwrap();
                        let exact = qmc(m, big_n, n, &part).unwrap();
                        let g = ExtendedGraph::new(part.clone(), big_n, n).unwrap();
                        let flow = max_flow_log_cut(&g).unwrap();
                        assert_eq!(flow.capacity, exact.qmc, "m={m} N={big_n} n={n} {part}");
                        let swapped = qmc(m, big_n, n, &part.swapped()).unwrap();
                        assert_eq!(swapped.qmc, exact.qmc);
                    }
                }
            }
        }
    }
}
