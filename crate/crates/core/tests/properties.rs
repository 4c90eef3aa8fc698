use proptest::prelude::*;

use tropitile_core::graph::{
    admissible_extension, admissible_inverse, admissible_sum, admissibilize, chip_fire, is_admissible, ml, reduce, spanning_subgraph, twister, Divisor,
    MetricGraph, PointOnGraph, VertexFunction,
};
use tropitile_core::polytope::{combine, BasePolytope, Point};
use tropitile_core::random::{self, Rng64};
use tropitile_core::rational::{int, rat, Rational};
use tropitile_core::semistab::mu_of_divisor;
use tropitile_core::setfun::{adjoint, all_subsets, codimension, is_submodular, is_supermodular, proper_subsets, split, GroundSet, ModularPair, OrderedPartition, SetFunction, Subset};
use tropitile_core::simplex::{brick, bricks_meet_in_face, nu_pair, random_block_subspace, Field};
use tropitile_core::tiling::{enumerate_window, facet_neighbor, facet_sides, Window};

fn rng(seed: u64) -> Rng64 {
    random::rng(seed)
}

fn ground(n: usize) -> GroundSet {
    GroundSet::indexed(n).unwrap()
}

fn random_table(n: usize, r: &mut Rng64) -> SetFunction {
    use rand::Rng;
    let g = ground(n);
    SetFunction::from_fn(&g, |s| if s.is_empty() { int(0) } else { rat(r.gen_range(-9..=9), r.gen_range(1..=4)) })
}

/// A connected graph with an admissible divisor whose `G_D` is connected.
fn connected_instance(seed: u64, n: usize) -> (MetricGraph, Divisor) {
    let mut r = rng(seed);
    let g = random::connected_graph(n, n + 3, &mut r);
    loop {
        let d = random::admissible_divisor(&g, -2, 3, 0.3, &mut r);
        if mu_of_divisor(&g, &d).unwrap().is_full_dimensional(&g) {
            return (g, d);
        }
    }
}

fn random_f(n: usize, r: &mut Rng64) -> VertexFunction {
    use rand::Rng;
    VertexFunction((0..n).map(|_| rat(r.gen_range(-8..=8), 2)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn adjoint_is_an_involution(seed in any::<u64>(), n in 1usize..=5) {
        let f = random_table(n, &mut rng(seed));
        prop_assert_eq!(adjoint(&adjoint(&f)), f);
    }

    #[test]
    fn split_sandwich(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let pair = random::supermodular(&ground(n), &mut r);
        let pi = random::partition(n, &mut r);
        let s = split(&pair, &pi).unwrap();
        for i in all_subsets(n) {
            prop_assert!(pair.mu.get(i) <= s.mu.get(i));
            prop_assert!(s.mu.get(i) <= s.mu_star.get(i));
            prop_assert!(s.mu_star.get(i) <= pair.mu_star.get(i));
        }
    }

    #[test]
    fn refinement_law(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let pair = random::supermodular(&ground(n), &mut r);
        let (p1, p2) = (random::partition(n, &mut r), random::partition(n, &mut r));
        let lhs = split(&split(&pair, &p1).unwrap(), &p2).unwrap();
        prop_assert_eq!(lhs, split(&pair, &p1.induced_refinement(&p2)).unwrap());
    }

    #[test]
    fn split_pairs_are_split_in_every_order(seed in any::<u64>(), n in 1usize..=5) {
        use rand::seq::SliceRandom;
        let mut r = rng(seed);
        let pi = random::partition(n, &mut r);
        let pair = split(&random::supermodular(&ground(n), &mut r), &pi).unwrap();
        let mut order: Vec<usize> = (0..pi.len()).collect();
        order.shuffle(&mut r);
        prop_assert_eq!(split(&pair, &pi.permuted(&order)).unwrap(), pair);
    }

    #[test]
    fn capcup(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let pair = random::supermodular(&ground(n), &mut r);
        let (i1, i2) = (random::subset(n, &mut r), random::subset(n, &mut r));
        let p = BasePolytope::new(pair.clone());
        let mu = &pair.mu;
        if p.vertices().unwrap().iter().any(|q| q.eval(i1) == *mu.get(i1) && q.eval(i2) == *mu.get(i2)) {
            prop_assert_eq!(mu.get(i1) + mu.get(i2), mu.get(i1.union(i2)) + mu.get(i1.inter(i2)));
        }
    }

    #[test]
    fn dimension_plus_codimension(seed in any::<u64>(), n in 1usize..=5) {
        let pair = random::supermodular(&ground(n), &mut rng(seed));
        let dim = BasePolytope::new(pair.clone()).dimension().unwrap();
        prop_assert_eq!(dim + codimension(&pair).0, n);
    }

    #[test]
    fn recover_from_vertices(seed in any::<u64>(), n in 1usize..=5) {
        let pair = random::supermodular(&ground(n), &mut rng(seed));
        let p = BasePolytope::new(pair.clone());
        for q in p.vertices().unwrap() {
            prop_assert!(p.contains(q).unwrap());
        }
        prop_assert_eq!(p.recover().unwrap(), pair);
    }

    #[test]
    fn face_vertices_are_tight_vertices(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let pair = random::supermodular(&ground(n), &mut r);
        let pi = random::partition(n, &mut r);
        let p = BasePolytope::new(pair.clone());
        let tight: Vec<Point> = p
            .vertices()
            .unwrap()
            .iter()
            .filter(|q| pi.flags().iter().all(|f| q.eval(*f) == *pair.mu.get(*f)))
            .cloned()
            .collect();
        let face = p.face(&pi).unwrap();
        prop_assert_eq!(face.vertices().unwrap(), &tight[..]);
    }

    #[test]
    fn greedy_linearity(seed in any::<u64>(), n in 1usize..=4, a in 0usize..4, b in 0usize..4) {
        let mut r = rng(seed);
        let coef = [rat(1, 2), int(1), int(2), int(4)];
        let (p1, p2) = (random::supermodular(&ground(n), &mut r), random::supermodular(&ground(n), &mut r));
        prop_assert!(tropitile_core::polytope::combine_is_linear(&coef[a], &p1, &coef[b], &p2).unwrap());
        prop_assert!(is_supermodular(&combine(&coef[a], &p1, &coef[b], &p2).unwrap().mu));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn extension_preserves_degree_and_ignores_constants(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::divisor(&g, &mut r);
        let f = random_f(n, &mut r);
        let (d2, _) = admissible_extension(&g, &d, &f);
        prop_assert_eq!(d2.degree(), d.degree());
        prop_assert!(is_admissible(&g, &d2).unwrap());
        let shifted = f.shifted(&rat(7, 3));
        prop_assert_eq!(admissible_extension(&g, &d, &shifted).0, d2);
    }

    #[test]
    fn twister_identity(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::divisor(&g, &mut r);
        let tau = twister(&g, &d);
        for oe in g.oriented().filter(|oe| !oe.reversed) {
            let interior: i64 = d.interior_on(oe.edge).map(|(_, c)| c).sum();
            prop_assert_eq!(tau.get(oe) + tau.get(oe.rev()), &g.edge(oe.edge).length * int(interior));
        }
    }

    #[test]
    fn admissible_sum_group_laws(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 2, &mut r);
        let [a, b, c] = [0, 1, 2].map(|_| random::admissible_divisor(&g, -2, 2, 0.4, &mut r));
        let sum = |x: &Divisor, y: &Divisor| admissible_sum(&g, x, y).unwrap();
        prop_assert_eq!(sum(&sum(&a, &b), &c), sum(&a, &sum(&b, &c)));
        prop_assert_eq!(sum(&a, &b), sum(&b, &a));
        prop_assert_eq!(sum(&a, &Divisor::zero()), a.clone());
        prop_assert_eq!(sum(&a, &admissible_inverse(&g, &a).unwrap()), Divisor::zero());
    }

    #[test]
    fn reduce_properties(seed in any::<u64>(), n in 1usize..=5) {
        use rand::Rng;
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = admissibilize(&g, &random::divisor(&g, &mut r));
        let v = r.gen_range(0..n);
        let red = reduce(&g, &d, v).unwrap();
        prop_assert!(is_admissible(&g, &red.divisor).unwrap());
        prop_assert!((0..n).filter(|&w| w != v).all(|w| red.divisor.at_vertex(w) >= 0));
        prop_assert!(mu_of_divisor(&g, &red.divisor).unwrap().is_full_dimensional(&g));
        prop_assert_eq!(admissible_extension(&g, &d, &red.witness).0, red.divisor.clone());
        prop_assert_eq!(reduce(&g, &red.divisor, v).unwrap().divisor, red.divisor.clone());
        let moved = admissible_extension(&g, &d, &random_f(n, &mut r)).0;
        prop_assert_eq!(reduce(&g, &moved, v).unwrap().divisor, red.divisor);
    }

    #[test]
    fn semistability_tables(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.4, &mut r);
        let sd = mu_of_divisor(&g, &d).unwrap();
        prop_assert!(is_supermodular(&sd.pair.mu));
        prop_assert!(is_submodular(&sd.pair.mu_star));
        prop_assert_eq!(&adjoint(&sd.pair.mu), &sd.pair.mu_star);
        for i in all_subsets(n) {
            let e = int(sd.subgraph.cut_size(&g, i) as i64) * rat(1, 2);
            prop_assert_eq!(sd.pair.mu_star.get(i) - sd.center.eval(i), e);
        }
        let dim = sd.polytope().dimension().unwrap();
        prop_assert_eq!(dim == n - 1, sd.is_full_dimensional(&g));
    }

    #[test]
    fn split_detection(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.5, &mut r);
        let sd = mu_of_divisor(&g, &d).unwrap();
        let pi = random::partition(n, &mut r);
        let part_of = |v: usize| pi.parts().iter().position(|p| p.contains(v)).unwrap();
        let crosses = (0..g.edges().len()).any(|e| sd.subgraph.contains(e) && part_of(g.edge(e).tail) != part_of(g.edge(e).head));
        prop_assert_eq!(split(&sd.pair, &pi).unwrap() == sd.pair, !crosses);
    }

    #[test]
    fn interior_positions_do_not_matter(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.5, &mut r);
        let mut moved = Divisor::from_vertices(&d.vertex_coeffs(n));
        for (e, _, c) in d.interior() {
            let offset = random::interior_offset(&g.edge(e).length, &mut r);
            moved.add(PointOnGraph::Interior { edge: e, offset }, c);
        }
        prop_assert_eq!(mu_of_divisor(&g, &d).unwrap().pair, mu_of_divisor(&g, &moved).unwrap().pair);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn facet_flips_are_involutions(seed in any::<u64>(), n in 2usize..=4) {
        let (g, d) = connected_instance(seed, n);
        let sd = mu_of_divisor(&g, &d).unwrap();
        for side in facet_sides(&sd.pair) {
            let (next, _) = facet_neighbor(&g, &d, side).unwrap();
            let pi = OrderedPartition::bipartition(n, side).unwrap();
            let other = mu_of_divisor(&g, &next).unwrap();
            prop_assert_eq!(split(&sd.pair, &pi).unwrap(), split(&other.pair, &pi.reversed()).unwrap());
            let (back, _) = facet_neighbor(&g, &next, side.complement(n)).unwrap();
            prop_assert_eq!(back, d.clone());
        }
    }

    #[test]
    fn chip_firing_threshold(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.4, &mut r);
        let s = random::proper_subset(n, &mut r);
        let m = ml(&g, &d, s).unwrap();
        let mu_at = |t: Rational| mu_of_divisor(&g, &chip_fire(&g, &d, s, &t).unwrap()).unwrap().pair;
        let early = mu_at(&m * rat(1, 3));
        prop_assert_eq!(&mu_at(&m * rat(2, 3)), &early);
        prop_assert_ne!(&mu_at(m.clone()), &early);
    }

    #[test]
    fn subspace_tables(seed in any::<u64>(), n in 1usize..=4, k in 1usize..=4, prime in any::<bool>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let blocks: Vec<usize> = (0..n).map(|_| r.gen_range(0..=2)).collect();
        let width: usize = blocks.iter().sum();
        prop_assume!(width >= k);
        let field = if prime { Field::Gf(5) } else { Field::Q };
        let w = random_block_subspace(&ground(n), &blocks, k, field, &mut r);
        let pair = nu_pair(&w).unwrap();
        prop_assert!(is_supermodular(&pair.mu));
        for i in all_subsets(n) {
            prop_assert_eq!(w.nu(i.complement(n)) + w.nu_star(i), k);
        }
        for q in BasePolytope::new(pair.clone()).vertices().unwrap() {
            prop_assert!(q.0.iter().all(|x| *x >= int(0)));
            prop_assert_eq!(q.total(), int(k as i64));
        }
        let phi: Vec<Rational> = (0..n).map(|_| int(r.gen_range(1..=4))).collect();
        prop_assert_eq!(nu_pair(&w.scaled(&phi).unwrap()).unwrap(), pair);
    }

    #[test]
    fn bricks_meet_in_common_faces(a in proptest::collection::vec(0i64..=12, 2), b in proptest::collection::vec(0i64..=12, 2)) {
        let point = |v: &[i64]| -> Option<Point> {
            let last = 12 - v[0] - v[1];
            (last >= 0).then(|| Point(vec![rat(v[0], 4), rat(v[1], 4), rat(last, 4)]))
        };
        if let (Some(p), Some(q)) = (point(&a), point(&b)) {
            prop_assert!(bricks_meet_in_face(&brick(&p).unwrap(), &brick(&q).unwrap()));
        }
    }
}

#[test]
fn rescaling_lengths_rescales_the_family() {
    let labels = GroundSet::new(["u", "v", "w"]).unwrap();
    let g = MetricGraph::from_triples(labels, &[(0, 1, int(1)), (1, 2, int(2)), (2, 0, int(1)), (0, 1, rat(1, 2))]).unwrap();
    let w = Window::cube(3, -2, 2);
    let a = enumerate_window(&g, &Divisor::zero(), &w).unwrap();
    let c = rat(5, 3);
    let b = enumerate_window(&g.rescaled(&c), &Divisor::zero(), &w).unwrap();
    assert_eq!(a.tiles.len(), b.tiles.len());
    for t in a.tiles.values() {
        let mut scaled = Divisor::from_vertices(&t.data.divisor.vertex_coeffs(3));
        for (e, offset, coeff) in t.data.divisor.interior() {
            scaled.add(PointOnGraph::Interior { edge: e, offset: offset * &c }, coeff);
        }
        let other = &b.tiles[&scaled.key(&b.graph)];
        assert_eq!(other.data.pair, t.data.pair);
    }
}

#[test]
fn full_dimensional_iff_connected_subgraph() {
    let mut r = rng(2024);
    for _ in 0..200 {
        use rand::Rng;
        let n = r.gen_range(1..=5);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.5, &mut r);
        let sd = mu_of_divisor(&g, &d).unwrap();
        let sub = spanning_subgraph(&g, &d).unwrap();
        let connected = g.components(&sub).len() == 1;
        assert_eq!(sd.polytope().dimension().unwrap() == n - 1, connected);
    }
}

#[test]
fn polytopes_determine_their_tables() {
    let mut r = rng(77);
    for _ in 0..100 {
        let a = random::supermodular(&ground(3), &mut r);
        let b = random::supermodular(&ground(3), &mut r);
        let same = BasePolytope::new(a.clone()).vertices().unwrap() == BasePolytope::new(b.clone()).vertices().unwrap();
        assert_eq!(same, a == b);
    }
    let p = random::supermodular(&ground(4), &mut r);
    let q: ModularPair = BasePolytope::new(p.clone()).recover().unwrap();
    assert_eq!(p, q);
    assert!(proper_subsets(4).all(|s: Subset| p.mu.get(s) <= p.mu_star.get(s)));
}
