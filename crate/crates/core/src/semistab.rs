//! Semistability polytopes of admissible divisors.

use std::collections::BTreeSet;

use num_traits::Zero;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{is_admissible, spanning_subgraph, Divisor, EdgeSet, MetricGraph, VertexFunction};
use crate::hpoly::{self, Constraint};
use crate::linalg;
use crate::polytope::{BasePolytope, Point};
use crate::rational::{self, half, int, Rational};
use crate::setfun::{proper_subsets, ModularPair, SetFunction, Subset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemistabilityData {
    pub divisor: Divisor,
    pub pair: ModularPair,
    pub center: Point,
    pub subgraph: EdgeSet,
}

impl SemistabilityData {
    pub fn polytope(&self) -> BasePolytope {
        BasePolytope::new(self.pair.clone())
    }

    pub fn degree(&self) -> i64 {
        self.divisor.degree()
    }

    pub fn is_full_dimensional(&self, g: &MetricGraph) -> bool {
        g.components(&self.subgraph).len() == 1
    }

    pub fn to_json(&self, g: &MetricGraph) -> Value {
        json!({
            "divisor": self.divisor.to_json(g),
            "mu": self.pair.mu.to_json(),
            "center": self.center.to_json(g.vertices()),
            "subgraph": self.subgraph.ids(g),
        })
    }
}

/// `μ_D(I) = deg(D^I) + e(I,I^c)/2`, `μ*_D(I) = deg(D_I) + e(I,I^c)/2` and
/// the center `q_D`.
pub fn mu_of_divisor(g: &MetricGraph, d: &Divisor) -> Result<SemistabilityData> {
    let subgraph = spanning_subgraph(g, d)?;
    let ground = g.vertices();
    let mu = SetFunction::from_fn(ground, |s| {
        let inside = d.degree_inside(g, s) - subgraph.cut_size(g, s) as i64;
        int(inside) + int(g.cut_size(s) as i64) * half()
    });
    let mu_star = SetFunction::from_fn(ground, |s| int(d.degree_inside(g, s)) + int(g.cut_size(s) as i64) * half());
    let pair = ModularPair::new(mu, mu_star)?;
    let mut center = Point(d.vertex_coeffs(g.n()).into_iter().map(int).collect());
    for (e, _, c) in d.interior() {
        let edge = g.edge(e);
        if edge.is_loop() {
            center.0[edge.tail] += int(c);
        } else {
            center.0[edge.tail] += int(c) * half();
            center.0[edge.head] += int(c) * half();
        }
    }
    Ok(SemistabilityData { divisor: d.clone(), pair, center, subgraph })
}

/// `|deg(D_I) − q(I)| ≤ e(I,I^c)/2` for every nonempty proper `I`.
pub fn is_q_semistable(g: &MetricGraph, d: &Divisor, q: &Point) -> Result<bool> {
    if !is_admissible(g, d)? {
        return Err(Error::NotAdmissible);
    }
    if q.len() != g.n() {
        return Err(Error::GroundMismatch);
    }
    if q.total() != int(d.degree()) {
        return Err(Error::DegreeMismatch(d.degree().to_string(), rational::format(&q.total())));
    }
    Ok(proper_subsets(g.n()).all(|s| {
        let dev = int(d.degree_inside(g, s)) - q.eval(s);
        rational::abs(&dev) <= int(g.cut_size(s) as i64) * half()
    }))
}

/// `|q(I) − q_D(I)| ≤ e_D(I,I^c)/2` for every nonempty proper `I`.
pub fn in_centered_system(g: &MetricGraph, sd: &SemistabilityData, q: &Point) -> bool {
    q.total() == sd.center.total()
        && proper_subsets(g.n()).all(|s| rational::abs(&(q.eval(s) - sd.center.eval(s))) <= int(sd.subgraph.cut_size(g, s) as i64) * half())
}

/// Checks that the centered system, the raw semistability system and base
/// polytope membership agree on all greedy vertices and on `probes` random
/// points near the center.
pub fn inequality_equivalence_check<R: Rng>(g: &MetricGraph, d: &Divisor, probes: usize, rng: &mut R) -> Result<bool> {
    let sd = mu_of_divisor(g, d)?;
    let p = sd.polytope();
    let agree = |q: &Point| -> Result<bool> {
        let a = in_centered_system(g, &sd, q);
        let b = is_q_semistable(g, d, q)?;
        let c = p.contains(q)?;
        Ok(a == b && b == c)
    };
    for q in p.vertices()? {
        if !in_centered_system(g, &sd, q) || !agree(q)? {
            return Ok(false);
        }
    }
    let radius = g.edges().len() as i64 + 1;
    for _ in 0..probes {
        let mut q = sd.center.clone();
        for v in 1..g.n() {
            let x = rational::rat(rng.gen_range(-4 * radius..=4 * radius), 4);
            q.0[v] += &x;
            q.0[0] -= x;
        }
        if !agree(&q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Δf(v) = Σ_{tail(e)=v} (f(tail) − f(head))` over oriented edges in `sub`.
pub fn laplacian_apply(g: &MetricGraph, sub: &EdgeSet, f: &VertexFunction) -> Point {
    let mut out = Point::zero(g.n());
    for oe in g.oriented().filter(|oe| sub.contains(oe.edge)) {
        let (t, h) = (oe.tail(g), oe.head(g));
        out.0[t] += &f.0[t] - &f.0[h];
    }
    out
}

/// `½ Σ ∂f(e)²` over oriented edges in `sub`.
pub fn energy(g: &MetricGraph, sub: &EdgeSet, f: &VertexFunction) -> Rational {
    let sum: Rational = g
        .oriented()
        .filter(|oe| sub.contains(oe.edge))
        .map(|oe| {
            let df = &f.0[oe.tail(g)] - &f.0[oe.head(g)];
            &df * &df
        })
        .sum();
    sum * half()
}

fn laplacian_matrix(g: &MetricGraph, sub: &EdgeSet) -> Vec<Vec<Rational>> {
    (0..g.n())
        .map(|v| {
            let e = VertexFunction::indicator(g.n(), Subset::singleton(v), &int(1));
            laplacian_apply(g, sub, &e).0
        })
        .collect::<Vec<_>>()
}

/// Some `f` with `Δf = h`.
pub fn laplacian_preimage(g: &MetricGraph, sub: &EdgeSet, h: &Point) -> Result<VertexFunction> {
    // Δ is symmetric, so the columns above double as rows
    let rows = laplacian_matrix(g, sub);
    linalg::solve_q(&rows, &h.0).map(VertexFunction).ok_or(Error::NoPreimage)
}

/// `‖h‖²` for `h` in the image of the Laplacian.
pub fn laplacian_norm(g: &MetricGraph, sub: &EdgeSet, h: &Point) -> Result<Rational> {
    Ok(energy(g, sub, &laplacian_preimage(g, sub, h)?))
}

/// `⟨h, Δg⟩ = Σ h(v) g(v)`.
pub fn pairing(h: &Point, g: &VertexFunction) -> Rational {
    h.0.iter().zip(&g.0).map(|(a, b)| a * b).sum()
}

/// Vertices of the Voronoi cell of the origin for the lattice `Δ(ℤ^C)` of
/// the subgraph `sub` restricted to the component `comp`, cut by the
/// vectors `Δ(1_J)`. Coordinates are indexed by all of `V`.
pub fn voronoi_vertices(g: &MetricGraph, sub: &EdgeSet, comp: Subset) -> Vec<Point> {
    let idx: Vec<usize> = comp.iter().collect();
    let k = idx.len();
    if k == 1 {
        return vec![Point::zero(g.n())];
    }
    let sub_c = EdgeSet((0..g.edges().len()).map(|e| sub.contains(e) && comp.contains(g.edge(e).tail)).collect());
    let mut ineqs = Vec::new();
    for local in proper_subsets(k) {
        let j = Subset::from_indices(local.iter().map(|i| idx[i]));
        let f = VertexFunction::indicator(g.n(), j, &int(1));
        let rhs = energy(g, &sub_c, &f) * half();
        // ⟨h, Δ1_J⟩ = Σ h(v) 1_J(v)
        let coeffs = idx.iter().map(|&v| if f.0[v].is_zero() { 0 } else { 1 }).collect();
        ineqs.push(Constraint { coeffs, rhs });
    }
    let eq = Constraint { coeffs: vec![1; k], rhs: Rational::zero() };
    hpoly::vertices(k, &[eq], &ineqs)
        .into_iter()
        .map(|local| {
            let mut p = Point::zero(g.n());
            for (i, x) in local.into_iter().enumerate() {
                p.0[idx[i]] = x;
            }
            p
        })
        .collect()
}

/// Checks `⟨h, Δg⟩ ≤ ‖Δg‖²/2` for all `g ∈ {−1,0,1}^V`.
fn nearest_to_origin(g: &MetricGraph, sub: &EdgeSet, h: &Point) -> bool {
    let n = g.n();
    let mut digits = vec![-1i64; n];
    loop {
        let f = VertexFunction(digits.iter().map(|&x| int(x)).collect());
        if pairing(h, &f) > energy(g, sub, &f) * half() {
            return false;
        }
        let Some(i) = digits.iter().position(|&x| x < 1) else { return true };
        digits[i] += 1;
        for x in &mut digits[..i] {
            *x = -1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoronoiReport {
    pub polytope_vertices: usize,
    pub voronoi_vertices: usize,
    pub equal: bool,
    pub nearest_point_ok: bool,
}

impl VoronoiReport {
    pub fn holds(&self) -> bool {
        self.equal && self.nearest_point_ok
    }
}

/// Compares the greedy vertices of `P_D` with `q_D` plus the product of the
/// per-component Voronoi cells of `G_D`.
pub fn voronoi_report(g: &MetricGraph, d: &Divisor) -> Result<VoronoiReport> {
    let sd = mu_of_divisor(g, d)?;
    let ours: BTreeSet<Point> = sd.polytope().vertices()?.iter().cloned().collect();
    let mut product = vec![Point::zero(g.n())];
    for comp in g.components(&sd.subgraph) {
        let cell = voronoi_vertices(g, &sd.subgraph, comp);
        product = product.iter().flat_map(|p| cell.iter().map(move |c| p + c)).collect();
    }
    let nearest_point_ok = product.iter().all(|h| nearest_to_origin(g, &sd.subgraph, h));
    let theirs: BTreeSet<Point> = product.iter().map(|h| h + &sd.center).collect();
    Ok(VoronoiReport {
        polytope_vertices: ours.len(),
        voronoi_vertices: theirs.len(),
        equal: ours == theirs,
        nearest_point_ok,
    })
}

pub fn voronoi_congruence(g: &MetricGraph, d: &Divisor) -> Result<bool> {
    Ok(voronoi_report(g, d)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PointOnGraph;
    use crate::rational::rat;
    use crate::setfun::GroundSet;

    fn triangle() -> MetricGraph {
        let vs = GroundSet::new(["u", "v", "w"]).unwrap();
        MetricGraph::from_triples(vs, &[(0, 1, int(1)), (1, 2, int(1)), (0, 2, int(1))]).unwrap()
    }

    fn p(v: &[Rational]) -> Point {
        Point(v.to_vec())
    }

    #[test]
    fn zero_divisor_on_triangle() {
        let g = triangle();
        let sd = mu_of_divisor(&g, &Divisor::zero()).unwrap();
        let u = Subset::singleton(0);
        assert_eq!(*sd.pair.mu.get(u), int(-1));
        assert_eq!(*sd.pair.mu_star.get(u), int(1));
        assert_eq!(*sd.pair.mu.get(Subset(3)), int(-1));
        assert_eq!(sd.center, Point::zero(3));
    }

    #[test]
    fn fired_divisor_on_triangle() {
        let g = triangle();
        let sd = mu_of_divisor(&g, &Divisor::from_vertices(&[-2, 1, 1])).unwrap();
        let u = Subset::singleton(0);
        assert_eq!(*sd.pair.mu.get(u), int(-3));
        assert_eq!(*sd.pair.mu_star.get(u), int(-1));
        assert_eq!(sd.center, p(&[int(-2), int(1), int(1)]));
    }

    #[test]
    fn semistability_examples() {
        let g = triangle();
        let z = Divisor::zero();
        assert!(is_q_semistable(&g, &z, &Point::zero(3)).unwrap());
        assert!(is_q_semistable(&g, &z, &p(&[int(1), int(-1), int(0)])).unwrap());
        assert!(!is_q_semistable(&g, &z, &p(&[rat(3, 2), rat(-3, 2), int(0)])).unwrap());
        assert!(matches!(is_q_semistable(&g, &z, &p(&[int(1), int(0), int(0)])), Err(Error::DegreeMismatch(_, _))));
    }

    #[test]
    fn laplacian_of_indicator() {
        let g = triangle();
        let all = EdgeSet::all(&g);
        let f = VertexFunction::indicator(3, Subset::singleton(0), &int(1));
        let h = laplacian_apply(&g, &all, &f);
        assert_eq!(h, p(&[int(2), int(-1), int(-1)]));
        assert_eq!(energy(&g, &all, &f), int(2));
        assert_eq!(laplacian_norm(&g, &all, &h).unwrap(), int(2));
        assert_eq!(laplacian_apply(&g, &all, &VertexFunction(vec![int(5); 3])), Point::zero(3));
        let broken = EdgeSet(vec![false, true, false]);
        assert_eq!(laplacian_norm(&g, &broken, &h), Err(Error::NoPreimage));
    }

    #[test]
    fn hexagon_is_voronoi_cell() {
        let g = triangle();
        for d in [Divisor::zero(), Divisor::from_vertices(&[-2, 1, 1])] {
            let r = voronoi_report(&g, &d).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.voronoi_vertices, 6);
        }
    }

    #[test]
    fn path_cell_after_breaking_an_edge() {
        let g = triangle();
        let mut d = Divisor::zero();
        d.add(PointOnGraph::Interior { edge: 1, offset: rat(1, 2) }, 1);
        let r = voronoi_report(&g, &d).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.voronoi_vertices, 4);
    }

    #[test]
    fn all_edges_broken_gives_a_point() {
        let g = triangle();
        let mut d = Divisor::zero();
        for e in 0..3 {
            d.add(PointOnGraph::Interior { edge: e, offset: rat(1, 2) }, 1);
        }
        let sd = mu_of_divisor(&g, &d).unwrap();
        assert_eq!(sd.polytope().vertices().unwrap(), std::slice::from_ref(&sd.center));
        assert!(voronoi_congruence(&g, &d).unwrap());
        let mut r = crate::random::rng(1);
        assert!(inequality_equivalence_check(&g, &d, 100, &mut r).unwrap());
    }

    #[test]
    fn equivalence_on_triangle() {
        let g = triangle();
        let mut r = crate::random::rng(7);
        assert!(inequality_equivalence_check(&g, &Divisor::zero(), 100, &mut r).unwrap());
    }

    #[test]
    fn loops_do_not_cut() {
        let vs = GroundSet::new(["a", "b"]).unwrap();
        let g = MetricGraph::from_triples(vs, &[(0, 1, int(1)), (0, 0, int(2))]).unwrap();
        let mut d = Divisor::from_vertices(&[1, 0]);
        d.add(PointOnGraph::Interior { edge: 1, offset: int(1) }, 1);
        let sd = mu_of_divisor(&g, &d).unwrap();
        assert_eq!(sd.center, p(&[int(2), int(0)]));
        assert!(voronoi_congruence(&g, &d).unwrap());
    }
}
