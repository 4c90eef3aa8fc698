//! Seeded random instances for property checks and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Divisor, MetricGraph, PointOnGraph};
use crate::rational::{int, rat, Rational};
use crate::setfun::{split, GroundSet, ModularPair, OrderedPartition, SetFunction, Subset};

pub use rand_chacha::ChaCha8Rng as Rng64;

pub fn rng(seed: u64) -> Rng64 {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Modular part plus convex functions of nonnegative modular functions,
/// plus an edge-count term; split along a random partition half the time.
pub fn supermodular<R: Rng>(ground: &GroundSet, r: &mut R) -> ModularPair {
    let n = ground.len();
    let q: Vec<Rational> = (0..n).map(|_| rat(r.gen_range(-6..=6), r.gen_range(1..=3))).collect();
    let mut f = SetFunction::modular(ground, &q);
    for _ in 0..r.gen_range(1..=3) {
        let w: Vec<i64> = (0..n).map(|_| r.gen_range(0..=3)).collect();
        let t = r.gen_range(0..=4);
        let c = rat(r.gen_range(1..=4), r.gen_range(1..=2));
        let g = SetFunction::from_fn(ground, |s| {
            let x: i64 = s.iter().map(|i| w[i]).sum();
            let y = (x - t).max(0);
            &c * int(y * y)
        });
        f = f.add(&g).unwrap();
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| r.gen_bool(0.4)).collect();
    let edges = SetFunction::from_fn(ground, |s| int(pairs.iter().filter(|(i, j)| s.contains(*i) && s.contains(*j)).count() as i64));
    f = f.add(&edges).unwrap();
    let pair = ModularPair::from_mu(f);
    if n > 1 && r.gen_bool(0.5) {
        split(&pair, &partition(n, r)).unwrap()
    } else {
        pair
    }
}

pub fn partition<R: Rng>(n: usize, r: &mut R) -> OrderedPartition {
    let k = r.gen_range(1..=n);
    loop {
        let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..k)).collect();
        let parts: Vec<Subset> = (0..k).map(|p| Subset::from_indices((0..n).filter(|&i| labels[i] == p))).filter(|s| !s.is_empty()).collect();
        if let Ok(pi) = OrderedPartition::new(n, parts) {
            return pi;
        }
    }
}

pub fn subset<R: Rng>(n: usize, r: &mut R) -> Subset {
    Subset(r.gen_range(0..1u32 << n))
}

pub fn proper_subset<R: Rng>(n: usize, r: &mut R) -> Subset {
    Subset(r.gen_range(1..(1u32 << n) - 1))
}

fn length<R: Rng>(r: &mut R) -> Rational {
    [int(1), int(2), int(3), rat(1, 2), rat(3, 2)].choose(r).unwrap().clone()
}

/// Connected multigraph with `n` vertices and at most `max_edges` edges
/// (a random spanning tree plus extra edges, loops allowed).
pub fn connected_graph<R: Rng>(n: usize, max_edges: usize, r: &mut R) -> MetricGraph {
    let ground = GroundSet::indexed(n).unwrap();
    let mut triples = Vec::new();
    for v in 1..n {
        triples.push((r.gen_range(0..v), v, length(r)));
    }
    let extra = r.gen_range(0..=max_edges.saturating_sub(n - 1));
    for _ in 0..extra {
        let a = r.gen_range(0..n);
        let b = if r.gen_bool(0.1) { a } else { r.gen_range(0..n) };
        triples.push((a, b, length(r)));
    }
    triples.shuffle(r);
    MetricGraph::from_triples(ground, &triples).unwrap()
}

/// Vertex coefficients in `[lo, hi]`; each edge gets an interior point with
/// probability `p`.
pub fn admissible_divisor<R: Rng>(g: &MetricGraph, lo: i64, hi: i64, p: f64, r: &mut R) -> Divisor {
    let mut d = Divisor::zero();
    for v in 0..g.n() {
        d.add(PointOnGraph::Vertex(v), r.gen_range(lo..=hi));
    }
    for (k, e) in g.edges().iter().enumerate() {
        if r.gen_bool(p) {
            d.add(PointOnGraph::Interior { edge: k, offset: interior_offset(&e.length, r) }, 1);
        }
    }
    d
}

pub fn interior_offset<R: Rng>(l: &Rational, r: &mut R) -> Rational {
    let den = r.gen_range(2..=6);
    l * rat(r.gen_range(1..den), den)
}

/// Arbitrary divisor, possibly non-admissible.
pub fn divisor<R: Rng>(g: &MetricGraph, r: &mut R) -> Divisor {
    let mut d = admissible_divisor(g, -3, 3, 0.0, r);
    let extra = if g.edges().is_empty() { 0 } else { r.gen_range(0..=3) };
    for _ in 0..extra {
        let k = r.gen_range(0..g.edges().len());
        d.add(PointOnGraph::Interior { edge: k, offset: interior_offset(&g.edge(k).length, r) }, r.gen_range(-2..=2));
    }
    d
}
