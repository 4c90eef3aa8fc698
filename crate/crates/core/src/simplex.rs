//! Subspace polymatroids `ν_W` in the simplex `Δ_{r+1}`, mixed polytopes and
//! bricks.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::hpoly::{self, Constraint};
use crate::linalg;
use crate::polytope::{combine, BasePolytope, Point};
use crate::rational::{self, int, Rational};
use crate::semistab::SemistabilityData;
use crate::setfun::{all_subsets, codimension, find_separation, proper_subsets, split, GroundSet, ModularPair, OrderedPartition, SetFunction, Subset};
use crate::tiling::{facet_sides, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Q,
    Gf(u64),
}

impl Field {
    pub fn parse(s: &str) -> Result<Field> {
        let s = s.trim();
        if s == "Q" {
            return Ok(Field::Q);
        }
        let p = s
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|p| p.trim().parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("unknown field {s:?}")))?;
        if !(2..=1 << 31).contains(&p) || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::Parse(format!("{p} is not a prime below 2^31")));
        }
        Ok(Field::Gf(p))
    }

    fn name(self) -> String {
        match self {
            Field::Q => "Q".into(),
            Field::Gf(p) => format!("GF({p})"),
        }
    }

    /// Canonical representative: residues in `[0, p)` for prime fields.
    fn normalize(self, x: &Rational) -> Result<Rational> {
        match self {
            Field::Q => Ok(x.clone()),
            Field::Gf(p) => {
                let p = BigInt::from(p);
                let den = x.denom().mod_floor(&p);
                if den.is_zero() {
                    return Err(Error::Parse(format!("{} has no value mod {p}", rational::format(x))));
                }
                let inv = den.modpow(&(&p - 2), &p);
                Ok(Rational::from_integer((x.numer() * inv).mod_floor(&p)))
            }
        }
    }
}

/// `W ⊆ U = ⊕_v U_v`, given by a basis whose columns are grouped by block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSubspace {
    ground: GroundSet,
    field: Field,
    blocks: Vec<usize>,
    basis: Vec<Vec<Rational>>,
}

impl BlockSubspace {
    pub fn new(ground: GroundSet, field: Field, blocks: Vec<usize>, basis: Vec<Vec<Rational>>) -> Result<BlockSubspace> {
        if blocks.len() != ground.len() {
            return Err(Error::GroundMismatch);
        }
        let width: usize = blocks.iter().sum();
        if basis.iter().any(|row| row.len() != width) {
            return Err(Error::DimensionMismatch(format!("basis rows must have {width} entries")));
        }
        let basis = basis
            .iter()
            .map(|row| row.iter().map(|x| field.normalize(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let w = BlockSubspace { ground, field, blocks, basis };
        if w.rank_of_columns(&(0..width).collect::<Vec<_>>()) != w.basis.len() {
            return Err(Error::RankDeficientBasis);
        }
        Ok(w)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// `r + 1`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn columns(&self, s: Subset) -> Vec<usize> {
        let mut start = 0;
        let mut cols = Vec::new();
        for (v, &b) in self.blocks.iter().enumerate() {
            if s.contains(v) {
                cols.extend(start..start + b);
            }
            start += b;
        }
        cols
    }

    fn to_fp(x: &Rational) -> u64 {
        x.to_integer().to_u64().expect("normalized residue")
    }

    fn rank_of_columns(&self, cols: &[usize]) -> usize {
        match self.field {
            Field::Q => linalg::rank_q(&self.basis.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect::<Vec<_>>()),
            Field::Gf(p) => linalg::rank_fp(&self.basis.iter().map(|r| cols.iter().map(|&c| Self::to_fp(&r[c])).collect()).collect::<Vec<_>>(), p),
        }
    }

    /// Dimension of the coefficient vectors `c` with `c · basis` vanishing on `cols`.
    fn kernel_dim(&self, cols: &[usize]) -> usize {
        let k = self.dim();
        match self.field {
            Field::Q => {
                let rows: Vec<Vec<Rational>> = cols.iter().map(|&c| (0..k).map(|i| self.basis[i][c].clone()).collect()).collect();
                linalg::nullspace_q(&rows, k).len()
            }
            Field::Gf(p) => {
                let rows: Vec<Vec<u64>> = cols.iter().map(|&c| (0..k).map(|i| Self::to_fp(&self.basis[i][c])).collect()).collect();
                linalg::nullspace_fp(&rows, k, p).len()
            }
        }
    }

    /// `dim(W ∩ U_I)`.
    pub fn nu(&self, s: Subset) -> usize {
        self.kernel_dim(&self.columns(s.complement(self.ground.len())))
    }

    /// `dim proj_I(W)`.
    pub fn nu_star(&self, s: Subset) -> usize {
        self.rank_of_columns(&self.columns(s))
    }

    /// Multiplies the block of each vertex by a nonzero scalar.
    pub fn scaled(&self, phi: &[Rational]) -> Result<BlockSubspace> {
        if phi.len() != self.blocks.len() {
            return Err(Error::GroundMismatch);
        }
        let mut factor = Vec::new();
        for (v, &b) in self.blocks.iter().enumerate() {
            factor.extend(std::iter::repeat_n(phi[v].clone(), b));
        }
        let basis = self.basis.iter().map(|r| r.iter().zip(&factor).map(|(x, f)| x * f).collect()).collect();
        let w = BlockSubspace::new(self.ground.clone(), self.field, self.blocks.clone(), basis)?;
        if phi.iter().any(|f| self.field.normalize(f).map_or(true, |f| f.is_zero())) {
            return Err(Error::Parse("scaling factors must be nonzero".into()));
        }
        Ok(w)
    }

    pub fn to_json(&self) -> Value {
        let blocks: Map<String, Value> = self.ground.labels().iter().zip(&self.blocks).map(|(l, b)| (l.clone(), json!(b))).collect();
        json!({
            "field": self.field.name(),
            "blocks": blocks,
            "basis": self.basis.iter().map(|r| r.iter().map(rational::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<BlockSubspace> {
        let field = Field::parse(v.get("field").and_then(Value::as_str).ok_or_else(|| Error::Parse("subspace needs \"field\"".into()))?)?;
        let blocks = v.get("blocks").and_then(Value::as_object).ok_or_else(|| Error::Parse("subspace needs \"blocks\"".into()))?;
        let ground = GroundSet::new(blocks.keys().cloned())?;
        let dims = blocks
            .values()
            .map(|b| b.as_u64().map(|b| b as usize).ok_or_else(|| Error::Parse("block dimensions are nonnegative integers".into())))
            .collect::<Result<Vec<_>>>()?;
        let basis = v
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("subspace needs \"basis\"".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("basis rows are arrays".into()))?
                    .iter()
                    .map(rational::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        BlockSubspace::new(ground, field, dims, basis)
    }
}

/// Reads a list of subspaces: a bare array or `{"subspaces": [...]}`.
pub fn subspaces_from_json(v: &Value) -> Result<Vec<BlockSubspace>> {
    let list = v.as_array().or_else(|| v.get("subspaces").and_then(Value::as_array)).ok_or_else(|| Error::Parse("expected a list of subspaces".into()))?;
    list.iter().map(BlockSubspace::from_json).collect()
}

/// `(ν_W, ν*_W)`, with the exact-sequence count checked.
pub fn nu_pair(w: &BlockSubspace) -> Result<ModularPair> {
    let n = w.ground.len();
    let k = w.dim();
    let mu = SetFunction::from_fn(&w.ground, |s| int(w.nu(s) as i64));
    let mu_star = SetFunction::from_fn(&w.ground, |s| int(w.nu_star(s) as i64));
    for s in all_subsets(n) {
        assert_eq!(
            w.nu(s.complement(n)) + w.nu_star(s),
            k,
            "rank and kernel disagree on {}",
            w.ground.key(s)
        );
    }
    ModularPair::new(mu, mu_star)
}

/// `q_v ∈ Q_W`, where `q_v = (r+1)·1_v`.
pub fn vertex_tile_check(w: &BlockSubspace, v: usize) -> bool {
    let n = w.ground.len();
    w.nu(Subset::full(n).minus(Subset::singleton(v))) == 0
}

/// `(αμ_D + βν_W, αμ*_D + βν*_W)`.
pub fn mixed_pair(alpha: &Rational, sd: &SemistabilityData, beta: &Rational, w: &BlockSubspace) -> Result<ModularPair> {
    if sd.pair.ground() != w.ground() {
        return Err(Error::GroundMismatch);
    }
    combine(alpha, &sd.pair, beta, &nu_pair(w)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplexReport {
    pub subspaces: usize,
    pub distinct: usize,
    pub pairs_checked: usize,
    pub separation_failures: Vec<(usize, usize)>,
    pub facets_checked: usize,
    pub facet_pairing_failures: Vec<String>,
    pub samples: usize,
    pub uncovered: usize,
    pub multiply_covered: usize,
}

impl SimplexReport {
    pub fn ok(&self) -> bool {
        self.separation_failures.is_empty() && self.facet_pairing_failures.is_empty() && self.uncovered == 0 && self.multiply_covered == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "subspaces": self.subspaces,
            "distinct_polytopes": self.distinct,
            "pairs_checked": self.pairs_checked,
            "separation_failures": self.separation_failures,
            "facets_checked": self.facets_checked,
            "facet_pairing_failures": self.facet_pairing_failures,
            "samples": self.samples,
            "uncovered": self.uncovered,
            "multiply_covered": self.multiply_covered,
        })
    }
}

fn is_interior(pair: &ModularPair, q: &Point) -> bool {
    proper_subsets(pair.n()).all(|i| q.eval(i) > *pair.mu.get(i))
}

/// Separation, facet pairing inside the open simplex and sampled coverage of
/// `Δ_{r+1}` by the polytopes `Q_W`.
pub fn simplex_tiling_verify(ws: &[BlockSubspace], r: usize, samples: usize, seed: u64) -> Result<SimplexReport> {
    let Some(first) = ws.first() else {
        return Err(Error::DimensionMismatch("no subspaces".into()));
    };
    for w in ws {
        if w.dim() != r + 1 {
            return Err(Error::DimensionMismatch(format!("subspace of dimension {} where r+1 = {}", w.dim(), r + 1)));
        }
        if w.ground != first.ground || w.blocks != first.blocks || w.field != first.field {
            return Err(Error::DimensionMismatch("subspaces over different blocks".into()));
        }
    }
    let n = first.ground.len();
    let pairs: Vec<ModularPair> = ws.par_iter().map(nu_pair).collect::<Result<Vec<_>>>()?;
    let distinct = pairs.iter().map(|p| p.mu.values()).collect::<BTreeSet<_>>().len();
    let mut report = SimplexReport { subspaces: ws.len(), distinct, ..Default::default() };

    let idx: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|i| (i + 1..pairs.len()).map(move |j| (i, j))).collect();
    report.pairs_checked = idx.len();
    report.separation_failures = idx
        .into_par_iter()
        .filter(|&(i, j)| !matches!(find_separation(&pairs[i], &pairs[j]), Ok(Some(s)) if s.is_nontrivial()))
        .collect();

    let full: Vec<usize> = (0..pairs.len()).filter(|&i| n == 1 || codimension(&pairs[i]).0 == 1).collect();
    for &i in &full {
        for side in facet_sides(&pairs[i]) {
            let pi = OrderedPartition::bipartition(n, side)?;
            let facet = split(&pairs[i], &pi)?;
            let centroid = BasePolytope::new(facet.clone()).centroid()?;
            if !centroid.0.iter().all(|x| x.is_positive()) {
                continue;
            }
            report.facets_checked += 1;
            let mut matches = 0;
            for &j in &full {
                if j != i && split(&pairs[j], &pi.reversed())? == facet {
                    matches += 1;
                }
            }
            if matches != 1 {
                report.facet_pairing_failures.push(format!("polytope {i}, facet {}: {matches} partners", first.ground.key(side)));
            }
        }
    }

    let mut rng = crate::random::rng(seed);
    let total = int(r as i64 + 1);
    let simplex = Window::cube(n, 0, r as i64 + 1);
    let points: Vec<Point> = (0..samples).filter_map(|_| simplex.sample(&total, 97, &mut rng)).collect();
    report.samples = points.len();
    let polys: Vec<BasePolytope> = pairs.iter().map(|p| BasePolytope::new(p.clone())).collect();
    for (inside, interior) in points
        .par_iter()
        .map(|q| {
            let inside: Vec<&BasePolytope> = polys.iter().filter(|p| p.contains(q).unwrap_or(false)).collect();
            let interior = inside.iter().filter(|p| is_interior(p.pair(), q)).count();
            (inside.len(), interior)
        })
        .collect::<Vec<_>>()
    {
        if inside == 0 {
            report.uncovered += 1;
        }
        if interior > 1 {
            report.multiply_covered += 1;
        }
    }
    Ok(report)
}

/// The cell `⌊β(I)⌋ ≤ q(I) ≤ ⌈β(I)⌉` of `Δ_{r+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Brick {
    pub beta: Point,
    /// Indexed by subset mask.
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

pub fn brick(beta: &Point) -> Result<Brick> {
    let n = beta.len();
    if n == 0 || n > 16 || beta.0.iter().any(Signed::is_negative) || !beta.total().is_integer() {
        return Err(Error::NotInSimplex);
    }
    let (lower, upper) = all_subsets(n)
        .map(|s| {
            let x = beta.eval(s);
            (rational::floor_i64(&x), rational::ceil_i64(&x))
        })
        .unzip();
    Ok(Brick { beta: beta.clone(), lower, upper })
}

impl Brick {
    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn rank(&self) -> i64 {
        self.lower[Subset::full(self.n()).index()]
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    fn constraints(&self) -> (Vec<Constraint>, Vec<Constraint>) {
        let n = self.n();
        let eq = Constraint { coeffs: vec![1; n], rhs: int(self.rank()) };
        let mut ineqs = Vec::new();
        for s in proper_subsets(n) {
            ineqs.push(Constraint { coeffs: hpoly::indicator(n, s.0, -1), rhs: int(-self.lower[s.index()]) });
            ineqs.push(Constraint { coeffs: hpoly::indicator(n, s.0, 1), rhs: int(self.upper[s.index()]) });
        }
        (vec![eq], ineqs)
    }

    pub fn contains(&self, q: &Point) -> bool {
        q.len() == self.n()
            && all_subsets(self.n()).all(|s| {
                let x = q.eval(s);
                int(self.lower[s.index()]) <= x && x <= int(self.upper[s.index()])
            })
    }

    pub fn vertices(&self) -> Vec<Point> {
        let (eqs, ineqs) = self.constraints();
        hpoly::vertices(self.n(), &eqs, &ineqs).into_iter().map(Point).collect()
    }

    pub fn to_json(&self, ground: &GroundSet) -> Value {
        json!({
            "beta": self.beta.to_json(ground),
            "vertices": self.vertices().iter().map(|q| q.to_json(ground)).collect::<Vec<_>>(),
        })
    }
}

fn pair_constraints(pair: &ModularPair) -> Vec<Constraint> {
    let n = pair.n();
    proper_subsets(n)
        .flat_map(|s| {
            [
                Constraint { coeffs: hpoly::indicator(n, s.0, -1), rhs: -pair.mu.get(s) },
                Constraint { coeffs: hpoly::indicator(n, s.0, 1), rhs: pair.mu_star.get(s).clone() },
            ]
        })
        .collect()
}

/// Whether the convex hull of `face` is a face of `brick`, by comparing it
/// with the smallest face of the brick containing it.
fn is_face_of(face: &[Point], brick: &Brick) -> bool {
    if face.is_empty() {
        return true;
    }
    let verts = brick.vertices();
    let (_, ineqs) = brick.constraints();
    let dot = |c: &Constraint, q: &Point| -> Rational { c.coeffs.iter().zip(&q.0).map(|(a, x)| int(*a) * x).sum() };
    let tight: Vec<&Constraint> = ineqs.iter().filter(|c| face.iter().all(|q| dot(c, q) == c.rhs)).collect();
    let smallest: BTreeSet<&Point> = verts.iter().filter(|q| tight.iter().all(|c| dot(c, q) == c.rhs)).collect();
    let face: BTreeSet<&Point> = face.iter().collect();
    smallest == face
}

fn intersection(brick: &Brick, extra: &[Constraint]) -> Vec<Point> {
    let (eqs, mut ineqs) = brick.constraints();
    ineqs.extend_from_slice(extra);
    hpoly::vertices(brick.n(), &eqs, &ineqs).into_iter().map(Point).collect()
}

/// Lattice points of `Δ_{r+1}` with denominator `k`.
pub fn simplex_grid(n: usize, rank: i64, k: i64) -> Vec<Point> {
    fn go(n: usize, left: i64, k: i64, cur: &mut Vec<i64>, out: &mut Vec<Point>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(Point(cur.iter().map(|&x| rational::rat(x, k)).collect()));
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            go(n, left - x, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, rank * k, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Distinct bricks at the grid points of denominator `k`.
pub fn bricks_on_grid(n: usize, rank: i64, k: i64) -> Result<Vec<Brick>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for beta in simplex_grid(n, rank, k) {
        let b = brick(&beta)?;
        if seen.insert((b.lower.clone(), b.upper.clone())) {
            out.push(b);
        }
    }
    Ok(out)
}

/// Whether two bricks meet in a common face (possibly empty).
pub fn bricks_meet_in_face(a: &Brick, b: &Brick) -> bool {
    let (_, ineqs) = b.constraints();
    let common = intersection(a, &ineqs);
    is_face_of(&common, a) && is_face_of(&common, b)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BrickReport {
    pub bricks: usize,
    pub contained: usize,
    pub failures: Vec<String>,
}

impl BrickReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({ "ok": self.ok(), "bricks": self.bricks, "contained": self.contained, "failures": self.failures })
    }
}

/// Every brick on the grid of denominator `k` either lies in `P_μ` or meets
/// it in a proper face; bricks through points of `P_μ` lie in it.
pub fn brick_coarsening_report(pair: &ModularPair, k: i64) -> Result<BrickReport> {
    let n = pair.n();
    if pair.mu.values().iter().chain(pair.mu_star.values()).any(|x| !x.is_integer()) {
        return Err(Error::NonIntegralPair);
    }
    let poly = BasePolytope::new(pair.clone());
    let rank = pair.range().to_integer().to_i64().ok_or(Error::NotInSimplex)?;
    if poly.vertices()?.iter().any(|q| q.0.iter().any(Signed::is_negative)) {
        return Err(Error::NotInSimplex);
    }
    let cons = pair_constraints(pair);
    let mut report = BrickReport::default();
    for beta in simplex_grid(n, rank, k) {
        let b = brick(&beta)?;
        report.bricks += 1;
        let inside = poly.contains(&beta)?;
        let vs = b.vertices();
        if inside {
            if vs.iter().all(|q| poly.contains(q).unwrap_or(false)) {
                report.contained += 1;
            } else {
                report.failures.push(format!("brick at {:?} leaves the polytope", beta.0.iter().map(rational::format).collect::<Vec<_>>()));
            }
            continue;
        }
        let common = intersection(&b, &cons);
        if !is_face_of(&common, &b) || common.len() == vs.len() {
            report.failures.push(format!("brick at {:?} overlaps the polytope", beta.0.iter().map(rational::format).collect::<Vec<_>>()));
        }
    }
    Ok(report)
}

pub const BRICK_GRID: i64 = 4;

pub fn brick_coarsening_check(pair: &ModularPair) -> Result<bool> {
    Ok(brick_coarsening_report(pair, BRICK_GRID)?.ok())
}

/// Random full-rank subspace; entries in `-2..=2` over `ℚ`, uniform over `GF(p)`.
pub fn random_block_subspace<R: Rng>(ground: &GroundSet, blocks: &[usize], dim: usize, field: Field, r: &mut R) -> BlockSubspace {
    let width: usize = blocks.iter().sum();
    assert!(dim <= width, "subspace dimension exceeds the ambient space");
    loop {
        let basis: Vec<Vec<Rational>> = (0..dim)
            .map(|_| {
                (0..width)
                    .map(|_| match field {
                        Field::Q => int(r.gen_range(-2..=2)),
                        Field::Gf(p) => int(r.gen_range(0..p) as i64),
                    })
                    .collect()
            })
            .collect();
        if let Ok(w) = BlockSubspace::new(ground.clone(), field, blocks.to_vec(), basis) {
            return w;
        }
    }
}
