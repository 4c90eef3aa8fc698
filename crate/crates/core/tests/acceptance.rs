//! One line per acceptance criterion, with its tolerance and time limit.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;

use tropitile_core::graph::{admissible_extension, admissibilize, is_admissible, reduce, Divisor, MetricGraph, PointOnGraph, VertexFunction};
use tropitile_core::polytope::{combine_is_linear, permutations, BasePolytope, Point};
use tropitile_core::random::{self, Rng64};
use tropitile_core::rational::{int, rat, Rational};
use tropitile_core::semistab::{mu_of_divisor, voronoi_congruence};
use tropitile_core::setfun::{adjoint, all_subsets, codimension, split, GroundSet, SetFunction};
use tropitile_core::simplex::{brick_coarsening_check, bricks_meet_in_face, bricks_on_grid, nu_pair, random_block_subspace, simplex_tiling_verify, BlockSubspace, Field};
use tropitile_core::tiling::{enumerate_window, periodicity_lattice, regularity_certificate, verify_family, TileFamily, Window};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: usize, limit: Duration, check: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let (ok, detail) = match outcome {
        Ok(d) if in_time => (true, d),
        Ok(d) => (false, format!("{d}; too slow")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {id:>2}: {} ({:.3} s of {} s) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn rng(seed: u64) -> Rng64 {
    random::rng(seed)
}

fn unit_triangle() -> MetricGraph {
    let ground = GroundSet::new(["u", "v", "w"]).unwrap();
    MetricGraph::from_triples(ground, &[(0, 1, int(1)), (1, 2, int(1)), (2, 0, int(1))]).unwrap()
}

fn triangle_family() -> TileFamily {
    let g = unit_triangle();
    let w = Window::parse(&g, "u:-4..4,v:-4..4,w:-4..4").unwrap();
    enumerate_window(&g, &Divisor::zero(), &w).unwrap()
}

fn five_vertex_extension() -> Check {
    let ground = GroundSet::new(["u", "v", "w", "x", "y"]).unwrap();
    let (u, v, w, x, y) = (0, 1, 2, 3, 4);
    let edges = [(u, v, 3), (u, w, 2), (u, x, 2), (v, x, 2), (w, x, 1), (x, y, 1), (v, y, 1)];
    let g = MetricGraph::from_triples(ground, &edges.map(|(a, b, l)| (a, b, int(l)))).unwrap();
    let mut d = Divisor::from_vertices(&[5, 0, 0, 0, 0]);
    d.add(PointOnGraph::Interior { edge: 2, offset: int(1) }, 1);
    let f = VertexFunction(vec![int(-3), int(0), int(0), int(0), int(0)]);
    let (got, _) = admissible_extension(&g, &d, &f);
    let mut expected = Divisor::from_vertices(&[1, 1, 1, 2, 0]);
    expected.add(PointOnGraph::Interior { edge: 1, offset: int(1) }, 1);
    ensure(got == expected, || format!("got {got:?}"))?;
    Ok("D' = (u)+(v)+(w)+2(x)+(q), exact".into())
}

fn triangle_tiling() -> Check {
    let fam = triangle_family();
    let mut expected = BTreeSet::new();
    for a in -10i64..=10 {
        for b in -10i64..=10 {
            let c = [-2 * a + b, a - 2 * b, a + b];
            if c.iter().all(|x| (-4..=4).contains(x)) {
                expected.insert(Point(c.map(int).to_vec()));
            }
        }
    }
    let got: BTreeSet<Point> = fam.centers_in_window().into_iter().cloned().collect();
    ensure(got == expected && got.len() == 19, || format!("{} centers in the window", got.len()))?;
    let hexagon: BTreeSet<Point> = permutations(3).into_iter().map(|p| Point(p.iter().map(|&i| int(1 - i as i64)).collect())).collect();
    for t in fam.tiles.values() {
        ensure(t.data.is_full_dimensional(&fam.graph), || "a tile is not full-dimensional".into())?;
        let shifted: BTreeSet<Point> = t.data.polytope().vertices().unwrap().iter().map(|q| q - &t.data.center).collect();
        ensure(shifted == hexagon, || "a tile is not the translated hexagon".into())?;
    }
    let report = verify_family(&fam, 1000, 1).unwrap();
    ensure(report.ok() && report.samples == 1000, || format!("{report:?}"))?;
    Ok(format!("19 centers, {} tiles all hexagons, verify_family passed on 1000 samples", fam.tiles.len()))
}

fn voronoi() -> Check {
    let mut r = rng(3);
    let mut done = 0;
    while done < 100 {
        let n = r.gen_range(1..=5);
        let g = random::connected_graph(n, 8, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.4, &mut r);
        if !mu_of_divisor(&g, &d).unwrap().is_full_dimensional(&g) {
            continue;
        }
        ensure(voronoi_congruence(&g, &d).unwrap(), || format!("instance {done} fails"))?;
        done += 1;
    }
    Ok("100 instances, vertex sets equal".into())
}

fn regularity() -> Check {
    let fam = triangle_family();
    let report = regularity_certificate(&fam).unwrap().check(&fam).unwrap();
    ensure(report.ok(), || format!("{report:?}"))?;
    Ok(format!(
        "{} facets, min margin {}, {} cycle residues all 0",
        report.margins.len(),
        tropitile_core::rational::format(report.min_margin().unwrap()),
        report.residues.len()
    ))
}

fn periodicity() -> Check {
    let fam = triangle_family();
    let g = &fam.graph;
    let basis = periodicity_lattice(g).unwrap();
    let (mut in_family, mut outside) = (0, 0);
    for t in fam.tiles.values() {
        for p in &basis {
            let mut moved = t.data.divisor.clone();
            for (v, x) in p.0.iter().enumerate() {
                moved.add(PointOnGraph::Vertex(v), x.to_integer().try_into().unwrap());
            }
            let shifted = t.data.pair.mu.add(&SetFunction::modular(g.vertices(), &p.0)).unwrap();
            let mu = match fam.tiles.get(&moved.key(g)) {
                Some(other) => {
                    in_family += 1;
                    other.data.pair.mu.clone()
                }
                None => {
                    // beyond the enumerated region: still a full-dimensional tile
                    outside += 1;
                    let sd = mu_of_divisor(g, &moved).unwrap();
                    ensure(is_admissible(g, &moved).unwrap() && sd.is_full_dimensional(g), || "translate is not a tile".into())?;
                    sd.pair.mu
                }
            };
            ensure(mu == shifted, || "translated μ table differs".into())?;
        }
    }
    Ok(format!("{} basis vectors; {in_family} translates in the family, {outside} beyond it, all μ tables shifted", basis.len()))
}

fn supermodular_suite() -> Check {
    let mut r = rng(6);
    for k in 0..200 {
        let n = r.gen_range(1..=5);
        let ground = GroundSet::indexed(n).unwrap();
        let table = SetFunction::from_fn(&ground, |s| if s.is_empty() { int(0) } else { rat(r.gen_range(-9..=9), r.gen_range(1..=3)) });
        ensure(adjoint(&adjoint(&table)) == table, || format!("adjoint involution, instance {k}"))?;

        let pair = random::supermodular(&ground, &mut r);
        let pi = random::partition(n, &mut r);
        let s = split(&pair, &pi).unwrap();
        let sandwich = all_subsets(n).all(|i| pair.mu.get(i) <= s.mu.get(i) && s.mu.get(i) <= s.mu_star.get(i) && s.mu_star.get(i) <= pair.mu_star.get(i));
        ensure(sandwich, || format!("sandwich, instance {k}"))?;

        let pi2 = random::partition(n, &mut r);
        ensure(split(&s, &pi2).unwrap() == split(&pair, &pi.induced_refinement(&pi2)).unwrap(), || format!("refinement, instance {k}"))?;

        let p = BasePolytope::new(pair.clone());
        ensure(p.recover().unwrap() == pair, || format!("recover, instance {k}"))?;
        ensure(p.dimension().unwrap() + codimension(&pair).0 == n, || format!("dim + cd, instance {k}"))?;

        let (i1, i2) = (random::subset(n, &mut r), random::subset(n, &mut r));
        let mu = &pair.mu;
        let both_tight = p.vertices().unwrap().iter().any(|q| q.eval(i1) == *mu.get(i1) && q.eval(i2) == *mu.get(i2));
        ensure(!both_tight || mu.get(i1) + mu.get(i2) == mu.get(i1.union(i2)) + mu.get(i1.inter(i2)), || format!("capcup, instance {k}"))?;
    }
    Ok("200 instances of each law".into())
}

fn subspace_suite() -> Check {
    let mut r = rng(7);
    for k in 0..200 {
        let n = r.gen_range(1..=4);
        let dim = r.gen_range(1..=4);
        let mut blocks: Vec<usize> = (0..n).map(|_| r.gen_range(0..=2)).collect();
        while blocks.iter().sum::<usize>() < dim {
            let i = r.gen_range(0..n);
            blocks[i] += 1;
        }
        let field = if k % 2 == 0 { Field::Gf(5) } else { Field::Q };
        let ground = GroundSet::indexed(n).unwrap();
        let w = random_block_subspace(&ground, &blocks, dim, field, &mut r);
        let pair = nu_pair(&w).unwrap();
        ensure(tropitile_core::setfun::is_supermodular(&pair.mu), || format!("ν not supermodular, instance {k}"))?;
        ensure(all_subsets(n).all(|i| w.nu(i.complement(n)) + w.nu_star(i) == dim), || format!("dimension count, instance {k}"))?;
        let in_simplex = BasePolytope::new(pair.clone())
            .vertices()
            .unwrap()
            .iter()
            .all(|q| q.0.iter().all(|x| *x >= int(0)) && q.total() == int(dim as i64));
        ensure(in_simplex, || format!("Q_W leaves the simplex, instance {k}"))?;
        let phi: Vec<Rational> = (0..n).map(|_| int(r.gen_range(1..=4))).collect();
        ensure(nu_pair(&w.scaled(&phi).unwrap()).unwrap() == pair, || format!("scaling changed ν, instance {k}"))?;
    }
    let uv = GroundSet::new(["u", "v"]).unwrap();
    let sub = |rows: [[i64; 4]; 2]| BlockSubspace::new(uv.clone(), Field::Q, vec![2, 2], rows.iter().map(|r| r.map(int).to_vec()).collect()).unwrap();
    let pair = [sub([[1, 0, 0, 0], [0, 1, 0, 1]]), sub([[1, 0, 1, 0], [0, 0, 0, 1]])];
    let report = simplex_tiling_verify(&pair, 1, 500, 7).unwrap();
    ensure(report.ok(), || format!("{report:?}"))?;
    Ok("200 subspaces over GF(5) and Q; two-segment tiling of Δ_2 verified".into())
}

fn mixed() -> Check {
    let mut r = rng(8);
    let coef = [rat(1, 2), int(1), int(2), int(4)];
    for k in 0..100 {
        let n = r.gen_range(1..=4);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = random::admissible_divisor(&g, -2, 3, 0.4, &mut r);
        let mu_d = mu_of_divisor(&g, &d).unwrap().pair;
        let dim = r.gen_range(1..=3);
        let blocks = vec![dim; n];
        let nu = nu_pair(&random_block_subspace(g.vertices(), &blocks, dim, Field::Gf(5), &mut r)).unwrap();
        let (a, b) = (&coef[r.gen_range(0..4)], &coef[r.gen_range(0..4)]);
        ensure(combine_is_linear(a, &mu_d, b, &nu).unwrap(), || format!("instance {k}"))?;
    }
    Ok("100 instances, greedy vertices additive on all orderings".into())
}

fn bricks() -> Check {
    let cells = bricks_on_grid(3, 3, 4).unwrap();
    let mut r = rng(9);
    let simplex = Window::cube(3, 0, 3);
    for k in 0..500 {
        let q = simplex.sample(&int(3), 97, &mut r).unwrap();
        ensure(cells.iter().any(|b| b.contains(&q)), || format!("sample {k} uncovered"))?;
    }
    for a in &cells {
        for b in &cells {
            ensure(bricks_meet_in_face(a, b), || "two bricks overlap".into())?;
        }
    }
    let ground = GroundSet::indexed(3).unwrap();
    for k in 0..20 {
        let blocks: Vec<usize> = (0..3).map(|_| r.gen_range(1..=2)).collect();
        let w = random_block_subspace(&ground, &blocks, 3, Field::Gf(5), &mut r);
        ensure(brick_coarsening_check(&nu_pair(&w).unwrap()).unwrap(), || format!("Q_W {k} is not a union of bricks"))?;
    }
    Ok(format!("{} bricks cover 500 samples and meet in faces; 20 Q_W are unions of bricks", cells.len()))
}

fn reduced() -> Check {
    let mut r = rng(10);
    for k in 0..100 {
        let n = r.gen_range(1..=5);
        let g = random::connected_graph(n, n + 3, &mut r);
        let d = admissibilize(&g, &random::divisor(&g, &mut r));
        let v = r.gen_range(0..n);
        let red = reduce(&g, &d, v).unwrap().divisor;
        ensure(is_admissible(&g, &red).unwrap(), || format!("not admissible, instance {k}"))?;
        ensure((0..n).all(|w| w == v || red.at_vertex(w) >= 0), || format!("not effective away from v, instance {k}"))?;
        ensure(mu_of_divisor(&g, &red).unwrap().is_full_dimensional(&g), || format!("G_D disconnected, instance {k}"))?;
        ensure(reduce(&g, &red, v).unwrap().divisor == red, || format!("not idempotent, instance {k}"))?;
        let f = VertexFunction((0..n).map(|_| rat(r.gen_range(-6..=6), 2)).collect());
        let moved = admissible_extension(&g, &d, &f).0;
        ensure(reduce(&g, &moved, v).unwrap().divisor == red, || format!("class dependence, instance {k}"))?;
    }
    Ok("100 instances".into())
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, s(1), five_vertex_extension),
        run(2, s(10), triangle_tiling),
        run(3, s(60), voronoi),
        run(4, s(5), regularity),
        run(5, s(30), periodicity),
        run(6, s(60), supermodular_suite),
        run(7, s(60), subspace_suite),
        run(8, s(60), mixed),
        run(9, s(60), bricks),
        run(10, s(60), reduced),
    ];
    assert!(results.iter().all(|&ok| ok), "some criteria failed");
}
