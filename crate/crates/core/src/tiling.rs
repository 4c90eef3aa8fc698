//! Tilings of `H_d` by semistability polytopes: enumeration in a window,
//! verification, regularity certificates and the periodicity lattice.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{admissibilize, chip_fire, is_admissible, ml, reduce, Divisor, MetricGraph, PointOnGraph, VertexFunction};
use crate::linalg;
use crate::polytope::{BasePolytope, Point};
use crate::rational::{self, half, int, Rational};
use crate::semistab::{mu_of_divisor, SemistabilityData};
use crate::setfun::{codimension, find_separation, proper_subsets, split, ModularPair, OrderedPartition, SetFunction, Subset};

/// Per-vertex closed bounds; the window is this box inside `H_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl Window {
    pub fn cube(n: usize, lo: i64, hi: i64) -> Window {
        Window { lo: vec![int(lo); n], hi: vec![int(hi); n] }
    }

    /// `"u:-4..4,v:-4..4"`; every vertex must appear once.
    pub fn parse(g: &MetricGraph, s: &str) -> Result<Window> {
        let n = g.n();
        let mut lo = vec![None; n];
        let mut hi = vec![None; n];
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (label, range) = part.split_once(':').ok_or_else(|| Error::Parse(format!("bad window entry {part:?}")))?;
            let (a, b) = range.split_once("..").ok_or_else(|| Error::Parse(format!("bad range {range:?}")))?;
            let v = g.vertex(label.trim())?;
            if lo[v].is_some() {
                return Err(Error::Parse(format!("vertex {label} bounded twice")));
            }
            let (a, b) = (rational::parse(a)?, rational::parse(b)?);
            if a > b {
                return Err(Error::Parse(format!("empty range for {label}")));
            }
            lo[v] = Some(a);
            hi[v] = Some(b);
        }
        let take = |xs: Vec<Option<Rational>>| -> Result<Vec<Rational>> {
            xs.into_iter()
                .enumerate()
                .map(|(i, x)| x.ok_or_else(|| Error::Parse(format!("no bounds for vertex {}", g.vertices().label(i)))))
                .collect()
        };
        Ok(Window { lo: take(lo)?, hi: take(hi)? })
    }

    pub fn format(&self, g: &MetricGraph) -> String {
        (0..self.lo.len())
            .map(|i| format!("{}:{}..{}", g.vertices().label(i), rational::format(&self.lo[i]), rational::format(&self.hi[i])))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn contains(&self, q: &Point) -> bool {
        self.contains_inflated(q, &Rational::zero())
    }

    pub fn contains_inflated(&self, q: &Point, r: &Rational) -> bool {
        q.0.iter().enumerate().all(|(i, x)| *x >= &self.lo[i] - r && *x <= &self.hi[i] + r)
    }

    pub fn interior_contains(&self, q: &Point) -> bool {
        q.0.iter().enumerate().all(|(i, x)| *x > self.lo[i] && *x < self.hi[i])
    }

    pub fn meets_level(&self, d: &Rational) -> bool {
        self.lo.iter().sum::<Rational>() <= *d && *d <= self.hi.iter().sum::<Rational>()
    }

    /// Some point of the window on the level `d`.
    pub fn point_on_level(&self, d: &Rational) -> Option<Point> {
        if !self.meets_level(d) {
            return None;
        }
        let mut q = self.lo.clone();
        let mut rest = d - self.lo.iter().sum::<Rational>();
        for i in 0..q.len() {
            let room = &self.hi[i] - &self.lo[i];
            let take = if rest < room { rest.clone() } else { room };
            q[i] += &take;
            rest -= take;
        }
        Some(Point(q))
    }

    /// Random point of the window on level `d`, with denominators dividing `den`.
    pub fn sample<R: Rng>(&self, d: &Rational, den: i64, rng: &mut R) -> Option<Point> {
        let n = self.lo.len();
        for _ in 0..10_000 {
            let mut q = Vec::with_capacity(n);
            for i in 0..n - 1 {
                let a = (&self.lo[i] * int(den)).ceil().to_integer().to_i64()?;
                let b = (&self.hi[i] * int(den)).floor().to_integer().to_i64()?;
                if a > b {
                    return None;
                }
                q.push(rational::rat(rng.gen_range(a..=b), den));
            }
            let last = d - q.iter().sum::<Rational>();
            if last >= self.lo[n - 1] && last <= self.hi[n - 1] {
                q.push(last);
                return Some(Point(q));
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub data: SemistabilityData,
    /// `divisor = admissible_extension(seed, witness)`.
    pub witness: VertexFunction,
}

/// `b = chip_fire(a, side, flip)`; the shared facet is `q(side) = μ_a(side)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    pub a: String,
    pub b: String,
    pub side: Subset,
    pub flip: Rational,
}

#[derive(Clone, PartialEq, Eq)]
pub struct TileFamily {
    pub graph: MetricGraph,
    pub seed: Divisor,
    pub window: Window,
    pub tiles: BTreeMap<String, Tile>,
    pub adjacency: Vec<Adjacency>,
}

impl fmt::Debug for TileFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TileFamily({} tiles, {} adjacencies)", self.tiles.len(), self.adjacency.len())
    }
}

/// Nonempty proper `I` for which `{q(I) = μ(I)}` is a facet.
pub fn facet_sides(pair: &ModularPair) -> Vec<Subset> {
    let n = pair.n();
    proper_subsets(n)
        .filter(|&i| {
            let pi = OrderedPartition::bipartition(n, i).unwrap();
            codimension(&split(pair, &pi).unwrap()).0 == 2
        })
        .collect()
}

/// Flips across the facet `{q(I) = μ_D(I)}`.
pub fn facet_neighbor(g: &MetricGraph, d: &Divisor, side: Subset) -> Result<(Divisor, Rational)> {
    let sd = mu_of_divisor(g, d)?;
    let n = g.n();
    if side.is_empty() || side == Subset::full(n) {
        return Err(Error::NotFacet);
    }
    let pi = OrderedPartition::bipartition(n, side)?;
    if !sd.is_full_dimensional(g) || codimension(&split(&sd.pair, &pi)?).0 != 2 {
        return Err(Error::NotFacet);
    }
    let b = ml(g, d, side)?;
    Ok((chip_fire(g, d, side, &b)?, b))
}

fn inflation(g: &MetricGraph) -> Rational {
    int(g.edges().len() as i64) * half()
}

impl TileFamily {
    pub fn degree(&self) -> i64 {
        self.seed.degree()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Tiles with centers in the window itself.
    pub fn centers_in_window(&self) -> Vec<&Point> {
        self.tiles.values().map(|t| &t.data.center).filter(|c| self.window.contains(c)).collect()
    }

    /// Drops a tile and every adjacency that mentions it.
    pub fn without_tile(&self, key: &str) -> TileFamily {
        let mut fam = self.clone();
        fam.tiles.remove(key);
        fam.adjacency.retain(|a| a.a != key && a.b != key);
        fam
    }

    pub fn to_json(&self) -> Value {
        let g = &self.graph;
        let index: BTreeMap<&str, usize> = self.tiles.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
        let tiles: Vec<Value> = self
            .tiles
            .values()
            .map(|t| {
                let mut v = t.data.to_json(g);
                let vs = t.data.polytope();
                let verts = vs.vertices().map(|vs| vs.iter().map(|q| q.to_json(g.vertices())).collect::<Vec<_>>()).unwrap_or_default();
                v["vertices"] = Value::Array(verts);
                v["witness"] = t.witness.to_json(g);
                v
            })
            .collect();
        let adjacency: Vec<Value> = self
            .adjacency
            .iter()
            .map(|a| {
                json!({
                    "a": index[a.a.as_str()],
                    "b": index[a.b.as_str()],
                    "side": g.vertices().key(a.side),
                    "flip": rational::to_json(&a.flip),
                })
            })
            .collect();
        json!({
            "graph": g.to_json(),
            "seed": self.seed.to_json(g),
            "window": self.window.format(g),
            "tiles": tiles,
            "adjacency": adjacency,
        })
    }

    /// Stored μ tables and centers are taken as given; `verify_family`
    /// rechecks them against the divisors.
    pub fn from_json(v: &Value) -> Result<TileFamily> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("missing \"{k}\"")));
        let graph = MetricGraph::from_json(field("graph")?)?;
        let seed = Divisor::from_json(&graph, field("seed")?)?;
        let window = Window::parse(&graph, field("window")?.as_str().ok_or_else(|| Error::Parse("\"window\" must be a string".into()))?)?;
        let mut keys = Vec::new();
        let mut tiles = BTreeMap::new();
        for t in field("tiles")?.as_array().ok_or_else(|| Error::Parse("\"tiles\" must be an array".into()))? {
            let get = |k: &str| t.get(k).ok_or_else(|| Error::Parse(format!("tile is missing \"{k}\"")));
            let divisor = Divisor::from_json(&graph, get("divisor")?)?;
            divisor.check_on(&graph)?;
            if !is_admissible(&graph, &divisor)? {
                return Err(Error::NotAdmissible);
            }
            let mu = SetFunction::from_json(get("mu")?)?;
            if mu.ground() != graph.vertices() {
                return Err(Error::GroundMismatch);
            }
            let center = Point::from_json(graph.vertices(), get("center")?)?;
            let subgraph = crate::graph::spanning_subgraph(&graph, &divisor)?;
            let witness = VertexFunction::from_json(&graph, get("witness")?)?;
            let data = SemistabilityData { divisor: divisor.clone(), pair: ModularPair::from_mu(mu), center, subgraph };
            let key = divisor.key(&graph);
            keys.push(key.clone());
            tiles.insert(key, Tile { data, witness });
        }
        let mut adjacency = Vec::new();
        for a in field("adjacency")?.as_array().ok_or_else(|| Error::Parse("\"adjacency\" must be an array".into()))? {
            let idx = |k: &str| -> Result<String> {
                let i = a.get(k).and_then(Value::as_u64).ok_or_else(|| Error::Parse(format!("adjacency needs \"{k}\"")))? as usize;
                keys.get(i).cloned().ok_or_else(|| Error::Parse(format!("tile index {i} out of range")))
            };
            let side = graph.vertices().parse_key(a.get("side").and_then(Value::as_str).ok_or_else(|| Error::Parse("adjacency needs \"side\"".into()))?)?;
            let flip = rational::from_json(a.get("flip").ok_or_else(|| Error::Parse("adjacency needs \"flip\"".into()))?)?;
            adjacency.push(Adjacency { a: idx("a")?, b: idx("b")?, side, flip });
        }
        Ok(TileFamily { graph, seed, window, tiles, adjacency })
    }

    /// CSV of tile centers, one row per tile.
    pub fn centers_csv(&self) -> String {
        let mut out = self.graph.vertices().labels().join(",");
        out.push('\n');
        for t in self.tiles.values() {
            out.push_str(&t.data.center.0.iter().map(rational::format).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

pub const WALK_LIMIT: usize = 10_000;

/// Breadth-first search over facet neighbours from the full-dimensional
/// tile reached from the seed, keeping tiles whose centers lie in the window
/// inflated by `|E|/2`.
pub fn enumerate_window(g: &MetricGraph, seed: &Divisor, w: &Window) -> Result<TileFamily> {
    seed.check_on(g)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if w.lo.len() != g.n() {
        return Err(Error::GroundMismatch);
    }
    let n = g.n();
    let seed = admissibilize(g, seed);
    let d = int(seed.degree());
    let target = w.point_on_level(&d).ok_or_else(|| Error::SeedDegreeOutsideWindowLevel(seed.degree().to_string()))?;

    // a full-dimensional start, then walk towards the window
    let (mut cur, mut witness) = if mu_of_divisor(g, &seed)?.is_full_dimensional(g) {
        (seed.clone(), VertexFunction::zero(n))
    } else {
        let r = reduce(g, &seed, 0)?;
        (r.divisor, r.witness)
    };
    for step in 0.. {
        let sd = mu_of_divisor(g, &cur)?;
        if sd.polytope().contains(&target)? {
            break;
        }
        if step == WALK_LIMIT {
            return Err(Error::StepLimit(WALK_LIMIT));
        }
        let side = facet_sides(&sd.pair)
            .into_iter()
            .find(|&i| target.eval(i) < *sd.pair.mu.get(i))
            .expect("a point outside a full-dimensional polytope violates a facet");
        let (next, b) = facet_neighbor(g, &cur, side)?;
        witness = witness.plus(&VertexFunction::indicator(n, side.complement(n), &b));
        cur = next;
    }

    let radius = inflation(g);
    let mut tiles = BTreeMap::new();
    let mut adjacency = Vec::new();
    let mut seen_pairs: HashSet<(String, String)> = HashSet::new();
    let start_key = cur.key(g);
    tiles.insert(start_key.clone(), Tile { data: mu_of_divisor(g, &cur)?, witness });
    let mut queue = VecDeque::from([start_key]);
    while let Some(key) = queue.pop_front() {
        let tile = tiles[&key].clone();
        for side in facet_sides(&tile.data.pair) {
            let (next, b) = facet_neighbor(g, &tile.data.divisor, side)?;
            let data = mu_of_divisor(g, &next)?;
            if !w.contains_inflated(&data.center, &radius) {
                continue;
            }
            let next_key = next.key(g);
            if !tiles.contains_key(&next_key) {
                let witness = tile.witness.plus(&VertexFunction::indicator(n, side.complement(n), &b));
                tiles.insert(next_key.clone(), Tile { data, witness });
                queue.push_back(next_key.clone());
            }
            let pair = if key < next_key { (key.clone(), next_key.clone()) } else { (next_key.clone(), key.clone()) };
            if seen_pairs.insert(pair) {
                adjacency.push(Adjacency { a: key.clone(), b: next_key, side, flip: b });
            }
        }
    }
    Ok(TileFamily { graph: g.clone(), seed, window: w.clone(), tiles, adjacency })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyReport {
    pub tiles: usize,
    pub consistency_failures: Vec<String>,
    pub pairs_checked: usize,
    pub separation_failures: Vec<(String, String)>,
    pub closedness_checked: usize,
    pub closedness_failures: Vec<String>,
    pub facets_checked: usize,
    pub facet_pairing_failures: Vec<String>,
    pub min_spread: Option<Rational>,
    pub samples: usize,
    pub uncovered: usize,
    pub multiply_covered: usize,
}

impl FamilyReport {
    pub fn positivity_ok(&self) -> bool {
        self.min_spread.as_ref().is_none_or(|s| *s >= half())
    }

    pub fn ok(&self) -> bool {
        self.consistency_failures.is_empty()
            && self.separation_failures.is_empty()
            && self.closedness_failures.is_empty()
            && self.facet_pairing_failures.is_empty()
            && self.positivity_ok()
            && self.uncovered == 0
            && self.multiply_covered == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "tiles": self.tiles,
            "consistency_failures": self.consistency_failures,
            "pairs_checked": self.pairs_checked,
            "separation_failures": self.separation_failures.len(),
            "closedness_checked": self.closedness_checked,
            "closedness_failures": self.closedness_failures.len(),
            "facets_checked": self.facets_checked,
            "facet_pairing_failures": self.facet_pairing_failures.len(),
            "min_spread": self.min_spread.as_ref().map(rational::to_json),
            "positivity_ok": self.positivity_ok(),
            "samples": self.samples,
            "uncovered": self.uncovered,
            "multiply_covered": self.multiply_covered,
        })
    }
}

fn is_interior(pair: &ModularPair, q: &Point) -> bool {
    proper_subsets(pair.n()).all(|i| q.eval(i) > *pair.mu.get(i))
}

/// Successive small moves realizing the face `split(μ_D, π)`.
fn face_divisor(g: &MetricGraph, d: &Divisor, pi: &OrderedPartition) -> Result<Divisor> {
    let flags = pi.flags();
    let mut cur = d.clone();
    for f in &flags[1..flags.len() - 1] {
        let eps = ml(g, &cur, *f)? * half();
        cur = chip_fire(g, &cur, *f, &eps)?;
    }
    Ok(cur)
}

/// Separation, closedness, facet pairing, positivity and coverage checks.
pub fn verify_family(fam: &TileFamily, samples: usize, seed: u64) -> Result<FamilyReport> {
    let g = &fam.graph;
    let n = g.n();
    let tiles: Vec<(&String, &Tile)> = fam.tiles.iter().collect();
    let mut report = FamilyReport { tiles: tiles.len(), samples, ..Default::default() };

    // stored data against the divisors
    for (key, t) in &tiles {
        let fresh = mu_of_divisor(g, &t.data.divisor)?;
        if fresh.pair != t.data.pair || fresh.center != t.data.center {
            report.consistency_failures.push(format!("stored data of {key} differs from its divisor"));
        }
        if crate::graph::admissible_extension(g, &fam.seed, &t.witness).0 != t.data.divisor {
            report.consistency_failures.push(format!("witness of {key} does not reproduce it"));
        }
        if !t.data.is_full_dimensional(g) {
            report.consistency_failures.push(format!("{key} is not full-dimensional"));
        }
    }

    // (a) pairwise nontrivial separation
    let pairs: Vec<(usize, usize)> = (0..tiles.len()).flat_map(|i| (i + 1..tiles.len()).map(move |j| (i, j))).collect();
    report.pairs_checked = pairs.len();
    report.separation_failures = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let (a, b) = (&tiles[i].1.data.pair, &tiles[j].1.data.pair);
            match find_separation(a, b) {
                Ok(Some(s)) if s.is_nontrivial() => None,
                _ => Some((tiles[i].0.clone(), tiles[j].0.clone())),
            }
        })
        .collect();

    // (b) closedness under faces
    let mut rng = crate::random::rng(seed);
    let checks = tiles.len().min(50);
    for _ in 0..checks {
        if tiles.is_empty() {
            break;
        }
        let (key, t) = tiles[rng.gen_range(0..tiles.len())];
        let pi = crate::random::partition(n, &mut rng);
        let face = face_divisor(g, &t.data.divisor, &pi)?;
        report.closedness_checked += 1;
        if mu_of_divisor(g, &face)?.pair != split(&t.data.pair, &pi)? {
            report.closedness_failures.push(format!("{key} along {:?}", pi.parts()));
        }
    }

    // (c) facet pairing
    for a in &fam.adjacency {
        let (Some(ta), Some(tb)) = (fam.tiles.get(&a.a), fam.tiles.get(&a.b)) else {
            report.facet_pairing_failures.push(format!("adjacency {} - {} names a missing tile", a.a, a.b));
            continue;
        };
        let pi = OrderedPartition::bipartition(n, a.side)?;
        let moved = chip_fire(g, &ta.data.divisor, a.side, &a.flip).ok();
        if split(&ta.data.pair, &pi)? != split(&tb.data.pair, &pi.reversed())? || moved.as_ref() != Some(&tb.data.divisor) {
            report.facet_pairing_failures.push(format!("adjacency {} - {} is not a facet flip", a.a, a.b));
        }
    }
    for (key, t) in &tiles {
        for side in facet_sides(&t.data.pair) {
            let pi = OrderedPartition::bipartition(n, side)?;
            let centroid = BasePolytope::new(split(&t.data.pair, &pi)?).centroid()?;
            if !fam.window.interior_contains(&centroid) {
                continue;
            }
            report.facets_checked += 1;
            let matches = fam
                .adjacency
                .iter()
                .filter(|a| (a.a == **key && a.side == side) || (a.b == **key && a.side == side.complement(n)))
                .count();
            if matches != 1 {
                report.facet_pairing_failures.push(format!("{key} facet {} matched {matches} times", g.vertices().key(side)));
            }
        }
    }

    // (d) positivity
    report.min_spread = tiles.iter().map(|(_, t)| crate::setfun::spread(&t.data.pair)).min();

    // (e) coverage
    let d = int(fam.degree());
    let points: Vec<Point> = (0..samples).filter_map(|_| fam.window.sample(&d, 97, &mut rng)).collect();
    report.samples = points.len();
    let polys: Vec<BasePolytope> = tiles.iter().map(|(_, t)| t.data.polytope()).collect();
    let counts: Vec<(usize, usize)> = points
        .par_iter()
        .map(|q| {
            let mut inside = 0;
            let mut interior = 0;
            for p in &polys {
                if p.contains(q).unwrap_or(false) {
                    inside += 1;
                    if is_interior(p.pair(), q) {
                        interior += 1;
                    }
                }
            }
            (inside, interior)
        })
        .collect();
    for (inside, interior) in counts {
        if inside == 0 {
            report.uncovered += 1;
        }
        if interior > 1 {
            report.multiply_covered += 1;
        }
    }
    Ok(report)
}

/// An affine function `q ↦ (f, q) − λ` on `H_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub f: VertexFunction,
    pub lambda: Rational,
}

impl Affine {
    pub fn eval(&self, q: &Point) -> Rational {
        crate::semistab::pairing(q, &self.f) - &self.lambda
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityCertificate {
    pub root: String,
    pub affine: BTreeMap<String, Affine>,
    /// Indices into the family's adjacency list.
    pub tree: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegularityReport {
    pub gluing_failures: Vec<usize>,
    /// Per adjacency, the smaller of the two midpoint margins.
    pub margins: Vec<(usize, Rational)>,
    /// Per adjacency off the tree, `None` if the difference is not constant
    /// on `V`, else the mismatch of the λ shift.
    pub residues: Vec<(usize, Option<Rational>)>,
    pub witness_failures: Vec<String>,
}

impl RegularityReport {
    pub fn min_margin(&self) -> Option<&Rational> {
        self.margins.iter().map(|(_, m)| m).min()
    }

    pub fn ok(&self) -> bool {
        self.gluing_failures.is_empty()
            && self.margins.iter().all(|(_, m)| m.is_positive())
            && self.residues.iter().all(|(_, r)| r.as_ref().is_some_and(Zero::is_zero))
            && self.witness_failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "facets": self.margins.len(),
            "gluing_failures": self.gluing_failures.len(),
            "min_margin": self.min_margin().map(rational::to_json),
            "cycle_edges": self.residues.len(),
            "nonzero_residues": self.residues.iter().filter(|(_, r)| !r.as_ref().is_some_and(Zero::is_zero)).count(),
            "witness_failures": self.witness_failures.len(),
        })
    }
}

/// Affine data across `a` from `from` to the other tile.
fn propagate(fam: &TileFamily, a: &Adjacency, from_a: bool, base: &Affine) -> Affine {
    let n = fam.n();
    let (target, step) = if from_a { (&fam.tiles[&a.b], a.side.complement(n)) } else { (&fam.tiles[&a.a], a.side) };
    Affine {
        f: base.f.plus(&VertexFunction::indicator(n, step, &a.flip)),
        lambda: &base.lambda + &a.flip * target.data.pair.mu.get(step),
    }
}

pub fn regularity_certificate(fam: &TileFamily) -> Result<RegularityCertificate> {
    let Some(root) = fam.tiles.keys().next().cloned() else {
        return Ok(RegularityCertificate { root: String::new(), affine: BTreeMap::new(), tree: vec![] });
    };
    let n = fam.n();
    let mut affine = BTreeMap::from([(root.clone(), Affine { f: VertexFunction::zero(n), lambda: Rational::zero() })]);
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(key) = queue.pop_front() {
        for (k, a) in fam.adjacency.iter().enumerate() {
            let (other, from_a) = if a.a == key { (&a.b, true) } else if a.b == key { (&a.a, false) } else { continue };
            if affine.contains_key(other) || !fam.tiles.contains_key(other) {
                continue;
            }
            let next = propagate(fam, a, from_a, &affine[&key]);
            affine.insert(other.clone(), next);
            tree.push(k);
            queue.push_back(other.clone());
        }
    }
    if affine.len() != fam.tiles.len() {
        return Err(Error::NotConnectedAdjacency);
    }
    Ok(RegularityCertificate { root, affine, tree })
}

impl RegularityCertificate {
    /// Gluing on shared facets, strict convexity across facets, cycle
    /// residues off the tree, and agreement with the tile witnesses.
    pub fn check(&self, fam: &TileFamily) -> Result<RegularityReport> {
        let n = fam.n();
        let d = int(fam.degree());
        let mut report = RegularityReport::default();
        let tree: BTreeSet<usize> = self.tree.iter().copied().collect();
        for (k, a) in fam.adjacency.iter().enumerate() {
            let (Some(fa), Some(fb)) = (self.affine.get(&a.a), self.affine.get(&a.b)) else {
                report.gluing_failures.push(k);
                continue;
            };
            let (ta, tb) = (&fam.tiles[&a.a], &fam.tiles[&a.b]);
            let pi = OrderedPartition::bipartition(n, a.side)?;
            let facet = BasePolytope::new(split(&ta.data.pair, &pi)?);
            if facet.vertices()?.iter().any(|q| fa.eval(q) != fb.eval(q)) {
                report.gluing_failures.push(k);
            }
            let at_b = (fb.eval(&tb.data.center) - fa.eval(&tb.data.center)) * half();
            let at_a = (fa.eval(&ta.data.center) - fb.eval(&ta.data.center)) * half();
            report.margins.push((k, at_a.min(at_b)));
            if !tree.contains(&k) {
                let predicted = propagate(fam, a, true, fa);
                let df = fb.f.minus(&predicted.f);
                let residue = df.constant_value().map(|c| &fb.lambda - &predicted.lambda - c * &d);
                report.residues.push((k, residue));
            }
        }
        if let Some(root) = fam.tiles.get(&self.root) {
            for (key, t) in &fam.tiles {
                let Some(aff) = self.affine.get(key) else { continue };
                // f_D is the witness relative to the root, up to constants
                if aff.f.minus(&t.witness.minus(&root.witness)).constant_value().is_none() {
                    report.witness_failures.push(key.clone());
                }
            }
        }
        Ok(report)
    }
}

/// Basis of the periodicity lattice, as centers `div_ℓ(f; 0)` in `H_0`.
pub fn periodicity_lattice(g: &MetricGraph) -> Result<Vec<Point>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    if n == 1 {
        return Ok(vec![]);
    }
    // lengths are integer multiples m_e of their rational gcd γ
    let den = rational::lcm_of_denominators(g.edges().iter().map(|e| &e.length));
    let scaled: Vec<BigInt> = g.edges().iter().map(|e| (&e.length * Rational::from_integer(den.clone())).to_integer()).collect();
    let gcd = scaled.iter().fold(BigInt::zero(), |a, b| a.gcd(b));
    let gamma = Rational::new(gcd.clone(), den);
    let edges: Vec<(usize, usize, BigInt)> = g
        .edges()
        .iter()
        .zip(&scaled)
        .filter(|(e, _)| !e.is_loop())
        .map(|(e, s)| (e.tail, e.head, s / &gcd))
        .collect();
    // unknowns: x_1..x_{n-1} (x_0 = 0), then k_e; rows x_u − x_w − m_e k_e = 0
    let k = n - 1 + edges.len();
    let rows: Vec<Vec<BigInt>> = edges
        .iter()
        .enumerate()
        .map(|(j, (u, w, m))| {
            let mut row = vec![BigInt::zero(); k];
            if *u > 0 {
                row[u - 1] += 1;
            }
            if *w > 0 {
                row[w - 1] -= 1;
            }
            row[n - 1 + j] = -m.clone();
            row
        })
        .collect();
    let kernel = linalg::integer_kernel(&rows, k);
    let xs: Vec<Vec<BigInt>> = kernel.iter().map(|v| v[..n - 1].to_vec()).collect();
    let basis = linalg::hnf(&xs);
    let zero = Divisor::zero();
    basis
        .iter()
        .map(|x| {
            let mut f = VertexFunction::zero(n);
            for (i, xi) in x.iter().enumerate() {
                f.0[i + 1] = Rational::from_integer(xi.clone()) * &gamma;
            }
            let q = crate::graph::admissible_extension(g, &zero, &f).0;
            debug_assert!(q.is_vertex_supported());
            Ok(Point(q.vertex_coeffs(n).into_iter().map(int).collect()))
        })
        .collect()
}

/// Canonical form of the lattice spanned by integral points.
pub fn lattice_hnf(points: &[Point]) -> Vec<Vec<BigInt>> {
    let rows: Vec<Vec<BigInt>> = points
        .iter()
        .map(|p| p.0.iter().map(|x| {
            assert!(x.is_integer(), "lattice vectors are integral");
            x.to_integer()
        }).collect())
        .collect();
    linalg::hnf(&rows)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PeriodicityReport {
    pub checked: usize,
    pub matched: usize,
    pub failures: Vec<String>,
}

impl PeriodicityReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.matched == self.checked
    }
}

/// For every tile `D` and `±P`, `D + P` is a family tile with `μ` shifted by
/// `P` whenever its center stays in the inflated window.
pub fn periodicity_check(fam: &TileFamily, basis: &[Point]) -> Result<PeriodicityReport> {
    let g = &fam.graph;
    let radius = inflation(g);
    let mut report = PeriodicityReport::default();
    for t in fam.tiles.values() {
        for p in basis.iter().flat_map(|p| [p.clone(), p.scale(&int(-1))]) {
            let center = &t.data.center + &p;
            if !fam.window.contains_inflated(&center, &radius) {
                continue;
            }
            report.checked += 1;
            let mut moved = t.data.divisor.clone();
            for (v, x) in p.0.iter().enumerate() {
                moved.add(PointOnGraph::Vertex(v), x.to_integer().to_i64().expect("small lattice vector"));
            }
            let key = moved.key(g);
            let Some(other) = fam.tiles.get(&key) else {
                report.failures.push(format!("{key} missing"));
                continue;
            };
            let shifted = t.data.pair.mu.add(&SetFunction::modular(g.vertices(), &p.0))?;
            if other.data.pair.mu != shifted {
                report.failures.push(format!("{key} has an unshifted μ table"));
                continue;
            }
            report.matched += 1;
        }
    }
    Ok(report)
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

fn cross(o: &(Rational, Rational), a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Convex hull, counter-clockwise, by the monotone chain.
fn hull(mut pts: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(Rational, Rational)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<(Rational, Rational)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub const SVG_SCALE: f64 = 60.0;

/// Tiles projected to the coordinates `x` and `y`, 60px per unit.
pub fn export_svg(fam: &TileFamily, x: usize, y: usize) -> Result<String> {
    let mut polys = Vec::new();
    for (key, t) in &fam.tiles {
        let vs = t.data.polytope();
        let pts = vs.vertices()?.iter().map(|q| (q.0[x].clone(), q.0[y].clone())).collect();
        polys.push((key, hull(pts)));
    }
    let all = polys.iter().flat_map(|(_, p)| p.iter());
    let to_f = |r: &Rational| r.to_f64().unwrap_or(0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (a, b) in all {
        let (a, b) = (to_f(a), to_f(b));
        x0 = x0.min(a);
        x1 = x1.max(a);
        y0 = y0.min(b);
        y1 = y1.max(b);
    }
    if polys.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.5;
    let (w, h) = ((x1 - x0 + 2.0 * pad) * SVG_SCALE, (y1 - y0 + 2.0 * pad) * SVG_SCALE);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    );
    for (key, poly) in &polys {
        let hash = fnv(key);
        let color = format!("#{:02x}{:02x}{:02x}", 96 + (hash & 0x7f), 96 + (hash >> 8 & 0x7f), 96 + (hash >> 16 & 0x7f));
        let pts: Vec<String> = poly
            .iter()
            .map(|(a, b)| format!("{:.2},{:.2}", (to_f(a) - x0 + pad) * SVG_SCALE, (y1 - to_f(b) + pad) * SVG_SCALE))
            .collect();
        out.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"{color}\" stroke=\"#222\" stroke-width=\"1\"/>\n",
            pts.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
