//! Metric graphs, divisors, admissible extensions and chip-firing.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setfun::{GroundSet, Subset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: Rational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: GroundSet,
    edges: Vec<Edge>,
    connected: bool,
}

/// An edge with a direction; `reversed` flips the stored orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Oriented {
    pub edge: usize,
    pub reversed: bool,
}

impl Oriented {
    pub fn index(self) -> usize {
        2 * self.edge + self.reversed as usize
    }

    pub fn rev(self) -> Oriented {
        Oriented { edge: self.edge, reversed: !self.reversed }
    }

    pub fn tail(self, g: &MetricGraph) -> usize {
        let e = &g.edges[self.edge];
        if self.reversed { e.head } else { e.tail }
    }

    pub fn head(self, g: &MetricGraph) -> usize {
        let e = &g.edges[self.edge];
        if self.reversed { e.tail } else { e.head }
    }
}

impl MetricGraph {
    pub fn new(vertices: GroundSet, edges: Vec<Edge>) -> Result<MetricGraph> {
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return Err(Error::Parse(format!("edge {} has an unknown endpoint", e.id)));
            }
            if !e.length.is_positive() {
                return Err(Error::Parse(format!("edge {} has non-positive length", e.id)));
            }
            if edges[..k].iter().any(|o| o.id == e.id) {
                return Err(Error::Parse(format!("duplicate edge id {}", e.id)));
            }
        }
        let mut g = MetricGraph { vertices, edges, connected: false };
        g.connected = g.components(&EdgeSet::all(&g)).len() == 1;
        Ok(g)
    }

    /// Builds a graph from `(tail, head, length)` triples with ids `e0, e1, ...`.
    pub fn from_triples(vertices: GroundSet, triples: &[(usize, usize, Rational)]) -> Result<MetricGraph> {
        let edges = triples
            .iter()
            .enumerate()
            .map(|(k, (t, h, l))| Edge { id: format!("e{k}"), tail: *t, head: *h, length: l.clone() })
            .collect();
        MetricGraph::new(vertices, edges)
    }

    pub fn vertices(&self) -> &GroundSet {
        &self.vertices
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.vertices.index_of(label).ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    /// Both orientations of every edge.
    pub fn oriented(&self) -> impl Iterator<Item = Oriented> + '_ {
        (0..self.edges.len()).flat_map(|e| [Oriented { edge: e, reversed: false }, Oriented { edge: e, reversed: true }])
    }

    pub fn is_cut(&self, e: usize, s: Subset) -> bool {
        let e = &self.edges[e];
        s.contains(e.tail) != s.contains(e.head)
    }

    pub fn cut_edges(&self, s: Subset) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.is_cut(e, s))
    }

    /// `e(I, I^c)`.
    pub fn cut_size(&self, s: Subset) -> usize {
        self.cut_edges(s).count()
    }

    /// Vertex sets of the connected components using only `edges`.
    pub fn components(&self, edges: &EdgeSet) -> Vec<Subset> {
        self.components_within(edges, self.vertices.full())
    }

    /// Components of the subgraph induced on `s` using only `edges`.
    pub fn components_within(&self, edges: &EdgeSet, s: Subset) -> Vec<Subset> {
        let mut seen = Subset::EMPTY;
        let mut out = Vec::new();
        for start in s.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = Subset::singleton(start);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for (k, e) in self.edges.iter().enumerate() {
                    if !edges.0[k] {
                        continue;
                    }
                    let y = if e.tail == x { e.head } else if e.head == x { e.tail } else { continue };
                    if s.contains(y) && !comp.contains(y) {
                        comp = comp.with(y);
                        queue.push_back(y);
                    }
                }
            }
            seen = seen.union(comp);
            out.push(comp);
        }
        out
    }

    pub fn rescaled(&self, c: &Rational) -> MetricGraph {
        let edges = self.edges.iter().map(|e| Edge { length: &e.length * c, ..e.clone() }).collect();
        MetricGraph { vertices: self.vertices.clone(), edges, connected: self.connected }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.labels(),
            "edges": self.edges.iter().map(|e| json!({
                "id": e.id,
                "ends": [self.vertices.label(e.tail), self.vertices.label(e.head)],
                "length": rational::to_json(&e.length),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<MetricGraph> {
        let labels = v
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"vertices\"".into()))?
            .iter()
            .map(|l| l.as_str().map(str::to_string).ok_or_else(|| Error::Parse("vertex label must be a string".into())))
            .collect::<Result<Vec<_>>>()?;
        let vertices = GroundSet::new(labels)?;
        let mut edges = Vec::new();
        for (k, e) in v.get("edges").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing \"edges\"".into()))?.iter().enumerate() {
            let id = match e.get("id") {
                Some(Value::String(s)) => s.clone(),
                None => format!("e{k}"),
                Some(x) => return Err(Error::Parse(format!("bad edge id {x}"))),
            };
            let ends = e
                .get("ends")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Parse(format!("edge {id} needs two ends")))?;
            let end = |x: &Value| -> Result<usize> {
                let l = x.as_str().ok_or_else(|| Error::Parse("endpoint must be a string".into()))?;
                vertices.index_of(l).ok_or_else(|| Error::UnknownVertex(l.to_string()))
            };
            let length = rational::from_json(e.get("length").ok_or_else(|| Error::Parse(format!("edge {id} has no length")))?)?;
            edges.push(Edge { id, tail: end(&ends[0])?, head: end(&ends[1])?, length });
        }
        MetricGraph::new(vertices, edges)
    }
}

/// A subset of the edges, as a membership vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSet(pub Vec<bool>);

impl EdgeSet {
    pub fn all(g: &MetricGraph) -> EdgeSet {
        EdgeSet(vec![true; g.edges.len()])
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0[e]
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|x| **x).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `e_D(I, I^c)` for this edge set.
    pub fn cut_size(&self, g: &MetricGraph, s: Subset) -> usize {
        g.cut_edges(s).filter(|&e| self.0[e]).count()
    }

    pub fn ids(&self, g: &MetricGraph) -> Vec<String> {
        (0..g.edges.len()).filter(|&e| self.0[e]).map(|e| g.edges[e].id.clone()).collect()
    }
}

/// A vertex, or an interior point at `offset` from the edge's stored tail.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointOnGraph {
    Vertex(usize),
    Interior { edge: usize, offset: Rational },
}

impl PointOnGraph {
    /// The point at distance `t` from the tail of `oe`.
    pub fn along(g: &MetricGraph, oe: Oriented, t: Rational) -> Result<PointOnGraph> {
        let l = &g.edges[oe.edge].length;
        if t.is_zero() {
            return Ok(PointOnGraph::Vertex(oe.tail(g)));
        }
        if t == *l {
            return Ok(PointOnGraph::Vertex(oe.head(g)));
        }
        if t.is_negative() || t > *l {
            return Err(Error::Parse(format!("offset {} outside edge {}", rational::format(&t), g.edges[oe.edge].id)));
        }
        let offset = if oe.reversed { l - t } else { t };
        Ok(PointOnGraph::Interior { edge: oe.edge, offset })
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor {
    coeffs: BTreeMap<PointOnGraph, i64>,
}

impl Divisor {
    pub fn zero() -> Divisor {
        Divisor::default()
    }

    pub fn from_vertices(coeffs: &[i64]) -> Divisor {
        let mut d = Divisor::zero();
        for (v, &c) in coeffs.iter().enumerate() {
            d.add(PointOnGraph::Vertex(v), c);
        }
        d
    }

    pub fn add(&mut self, p: PointOnGraph, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(p.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&p);
        }
    }

    pub fn get(&self, p: &PointOnGraph) -> i64 {
        self.coeffs.get(p).copied().unwrap_or(0)
    }

    pub fn at_vertex(&self, v: usize) -> i64 {
        self.get(&PointOnGraph::Vertex(v))
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = (&PointOnGraph, &i64)> {
        self.coeffs.iter()
    }

    /// `(edge, offset, coefficient)` for interior support points.
    pub fn interior(&self) -> impl Iterator<Item = (usize, &Rational, i64)> {
        self.coeffs.iter().filter_map(|(p, &c)| match p {
            PointOnGraph::Interior { edge, offset } => Some((*edge, offset, c)),
            PointOnGraph::Vertex(_) => None,
        })
    }

    pub fn interior_on(&self, e: usize) -> impl Iterator<Item = (&Rational, i64)> {
        self.interior().filter(move |(k, _, _)| *k == e).map(|(_, t, c)| (t, c))
    }

    pub fn vertex_coeffs(&self, n: usize) -> Vec<i64> {
        (0..n).map(|v| self.at_vertex(v)).collect()
    }

    pub fn is_vertex_supported(&self) -> bool {
        self.interior().next().is_none()
    }

    pub fn plus(&self, o: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, &c) in &o.coeffs {
            d.add(p.clone(), c);
        }
        d
    }

    pub fn neg(&self) -> Divisor {
        Divisor { coeffs: self.coeffs.iter().map(|(p, c)| (p.clone(), -c)).collect() }
    }

    pub fn minus(&self, o: &Divisor) -> Divisor {
        self.plus(&o.neg())
    }

    /// Coefficient sum over vertices in `s` and interior points of edges
    /// with both ends in `s`.
    pub fn degree_inside(&self, g: &MetricGraph, s: Subset) -> i64 {
        self.coeffs
            .iter()
            .filter(|(p, _)| match p {
                PointOnGraph::Vertex(v) => s.contains(*v),
                PointOnGraph::Interior { edge, .. } => {
                    let e = g.edge(*edge);
                    s.contains(e.tail) && s.contains(e.head)
                }
            })
            .map(|(_, c)| c)
            .sum()
    }

    pub fn check_on(&self, g: &MetricGraph) -> Result<()> {
        for p in self.coeffs.keys() {
            match p {
                PointOnGraph::Vertex(v) if *v >= g.n() => return Err(Error::UnknownVertex(format!("#{v}"))),
                PointOnGraph::Interior { edge, offset } => {
                    let e = g.edges.get(*edge).ok_or_else(|| Error::ForeignPoint(format!("#{edge}")))?;
                    if !offset.is_positive() || *offset >= e.length {
                        return Err(Error::ForeignPoint(e.id.clone()));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self, g: &MetricGraph) -> Value {
        let mut vertex = Map::new();
        for v in 0..g.n() {
            let c = self.at_vertex(v);
            if c != 0 {
                vertex.insert(g.vertices.label(v).to_string(), json!(c));
            }
        }
        let interior: Vec<Value> = self
            .interior()
            .map(|(e, t, c)| {
                let edge = g.edge(e);
                json!({
                    "edge": edge.id,
                    "from": g.vertices.label(edge.tail),
                    "offset": rational::to_json(t),
                    "coeff": c,
                })
            })
            .collect();
        json!({ "vertex": vertex, "interior": interior })
    }

    /// Canonical compact serialization; used as a map key.
    pub fn key(&self, g: &MetricGraph) -> String {
        self.to_json(g).to_string()
    }

    pub fn from_json(g: &MetricGraph, v: &Value) -> Result<Divisor> {
        let mut d = Divisor::zero();
        if let Some(m) = v.get("vertex") {
            let m = m.as_object().ok_or_else(|| Error::Parse("\"vertex\" must be an object".into()))?;
            for (l, c) in m {
                let c = c.as_i64().ok_or_else(|| Error::Parse(format!("coefficient of {l} must be an integer")))?;
                d.add(PointOnGraph::Vertex(g.vertex(l)?), c);
            }
        }
        if let Some(a) = v.get("interior") {
            let a = a.as_array().ok_or_else(|| Error::Parse("\"interior\" must be an array".into()))?;
            for p in a {
                let id = p.get("edge").and_then(Value::as_str).ok_or_else(|| Error::Parse("interior point needs \"edge\"".into()))?;
                let e = g.edge_index(id).ok_or_else(|| Error::ForeignPoint(id.to_string()))?;
                let edge = g.edge(e);
                let reversed = match p.get("from").and_then(Value::as_str) {
                    None => false,
                    Some(l) => {
                        let v = g.vertex(l)?;
                        if v == edge.tail {
                            false
                        } else if v == edge.head {
                            true
                        } else {
                            return Err(Error::Parse(format!("{l} is not an end of {id}")));
                        }
                    }
                };
                let t = rational::from_json(p.get("offset").ok_or_else(|| Error::Parse("interior point needs \"offset\"".into()))?)?;
                let c = p.get("coeff").map_or(Some(1), Value::as_i64).ok_or_else(|| Error::Parse("\"coeff\" must be an integer".into()))?;
                d.add(PointOnGraph::along(g, Oriented { edge: e, reversed }, t)?, c);
            }
        }
        Ok(d)
    }
}

impl fmt::Debug for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(p, c)| match p {
                PointOnGraph::Vertex(v) => format!("{c}(v{v})"),
                PointOnGraph::Interior { edge, offset } => format!("{c}(e{edge}@{})", rational::format(offset)),
            })
            .collect();
        write!(f, "[{}]", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexFunction(pub Vec<Rational>);

impl VertexFunction {
    pub fn zero(n: usize) -> VertexFunction {
        VertexFunction(vec![Rational::zero(); n])
    }

    /// `c` on `s`, zero elsewhere.
    pub fn indicator(n: usize, s: Subset, c: &Rational) -> VertexFunction {
        VertexFunction((0..n).map(|v| if s.contains(v) { c.clone() } else { Rational::zero() }).collect())
    }

    pub fn plus(&self, o: &VertexFunction) -> VertexFunction {
        VertexFunction(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, o: &VertexFunction) -> VertexFunction {
        VertexFunction(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn shifted(&self, c: &Rational) -> VertexFunction {
        VertexFunction(self.0.iter().map(|a| a + c).collect())
    }

    /// `Some(c)` when the function is the constant `c`.
    pub fn constant_value(&self) -> Option<Rational> {
        let c = self.0.first()?.clone();
        self.0.iter().all(|x| *x == c).then_some(c)
    }

    pub fn to_json(&self, g: &MetricGraph) -> Value {
        let mut m = Map::new();
        for (v, x) in self.0.iter().enumerate() {
            m.insert(g.vertices.label(v).to_string(), rational::to_json(x));
        }
        Value::Object(m)
    }

    /// Vertices missing from the object are an error.
    pub fn from_json(g: &MetricGraph, v: &Value) -> Result<VertexFunction> {
        let m = v.as_object().ok_or_else(|| Error::Parse("vertex function must be an object".into()))?;
        let mut out = vec![None; g.n()];
        for (l, x) in m {
            out[g.vertex(l)?] = Some(rational::from_json(x)?);
        }
        Ok(VertexFunction(
            out.into_iter()
                .enumerate()
                .map(|(i, x)| x.ok_or_else(|| Error::Parse(format!("no value for vertex {}", g.vertices.label(i)))))
                .collect::<Result<_>>()?,
        ))
    }
}

/// Values on oriented edges, indexed by [`Oriented::index`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistFunction(pub Vec<Rational>);

impl TwistFunction {
    pub fn get(&self, oe: Oriented) -> &Rational {
        &self.0[oe.index()]
    }
}

/// Integer slopes on oriented edges, indexed by [`Oriented::index`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slopes(pub Vec<i64>);

impl Slopes {
    pub fn get(&self, oe: Oriented) -> i64 {
        self.0[oe.index()]
    }
}

pub fn is_admissible(g: &MetricGraph, d: &Divisor) -> Result<bool> {
    d.check_on(g)?;
    let mut count = vec![0; g.edges().len()];
    for (e, _, c) in d.interior() {
        if c != 1 {
            return Ok(false);
        }
        count[e] += 1;
    }
    Ok(count.iter().all(|&k| k <= 1))
}

/// `E_D`: edges whose interior carries no support point.
pub fn spanning_subgraph(g: &MetricGraph, d: &Divisor) -> Result<EdgeSet> {
    if !is_admissible(g, d)? {
        return Err(Error::NotAdmissible);
    }
    let mut es = EdgeSet::all(g);
    for (e, _, _) in d.interior() {
        es.0[e] = false;
    }
    Ok(es)
}

/// `τ(e) = Σ (ℓ_e − t) D(x_t^e)`.
pub fn twister(g: &MetricGraph, d: &Divisor) -> TwistFunction {
    let mut tau = vec![Rational::zero(); 2 * g.edges().len()];
    for (e, t, c) in d.interior() {
        let l = &g.edge(e).length;
        let c = rational::int(c);
        tau[2 * e] += (l - t) * &c;
        tau[2 * e + 1] += t * &c;
    }
    TwistFunction(tau)
}

/// `⌊(f(tail) − f(head) + τ(e)) / ℓ_e⌋`.
pub fn twisted_slope(g: &MetricGraph, f: &VertexFunction, tau: &TwistFunction, oe: Oriented) -> i64 {
    let y = &f.0[oe.tail(g)] - &f.0[oe.head(g)] + tau.get(oe);
    rational::floor_i64(&(y / &g.edge(oe.edge).length))
}

/// `D + div_ℓ(f; D)` and the slopes of the extension.
pub fn admissible_extension(g: &MetricGraph, d: &Divisor, f: &VertexFunction) -> (Divisor, Slopes) {
    let tau = twister(g, d);
    let mut slopes = vec![0; 2 * g.edges().len()];
    let mut out = Divisor::zero();
    for v in 0..g.n() {
        out.add(PointOnGraph::Vertex(v), d.at_vertex(v));
    }
    for oe in g.oriented() {
        let s = twisted_slope(g, f, &tau, oe);
        slopes[oe.index()] = s;
        out.add(PointOnGraph::Vertex(oe.tail(g)), s);
    }
    for (k, e) in g.edges().iter().enumerate() {
        let oe = Oriented { edge: k, reversed: false };
        let y = &f.0[e.tail] - &f.0[e.head] + tau.get(oe);
        let r = rational::rem_euclid(&y, &e.length);
        if !r.is_zero() {
            // at distance r from the head
            out.add(PointOnGraph::Interior { edge: k, offset: &e.length - r }, 1);
        }
    }
    (out, Slopes(slopes))
}

/// `div_ℓ(f1+f2; D) = div_ℓ(f1; D) + div_ℓ(f2; D + div_ℓ(f1; D))`.
pub fn extension_additivity_check(g: &MetricGraph, d: &Divisor, f1: &VertexFunction, f2: &VertexFunction) -> bool {
    let whole = admissible_extension(g, d, &f1.plus(f2)).0;
    let first = admissible_extension(g, d, f1).0;
    let second = admissible_extension(g, &first, f2).0;
    whole == second
}

/// Minimum length of the cut segments outside `X_D(I)`.
pub fn ml(g: &MetricGraph, d: &Divisor, s: Subset) -> Result<Rational> {
    if !is_admissible(g, d)? {
        return Err(Error::NotAdmissible);
    }
    g.cut_edges(s)
        .map(|e| {
            let edge = g.edge(e);
            match d.interior_on(e).next() {
                None => edge.length.clone(),
                Some((t, _)) => {
                    let from_inside = if s.contains(edge.tail) { t.clone() } else { &edge.length - t };
                    &edge.length - from_inside
                }
            }
        })
        .min()
        .ok_or(Error::EmptyCut)
}

/// Fires the cut of `s` by `eps`: `D + div_ℓ(f; D)` with `f = eps` off `s`.
pub fn chip_fire(g: &MetricGraph, d: &Divisor, s: Subset, eps: &Rational) -> Result<Divisor> {
    let m = ml(g, d, s)?;
    if eps.is_negative() {
        return Err(Error::Parse("negative firing distance".into()));
    }
    if *eps > m {
        return Err(Error::DistanceTooLarge(rational::format(eps), rational::format(&m)));
    }
    let f = VertexFunction::indicator(g.n(), s.complement(g.n()), eps);
    Ok(admissible_extension(g, d, &f).0)
}

/// `D1 +_ℓ D2 = D1 + D2 + div_ℓ(0; D1 + D2)`.
pub fn admissible_sum(g: &MetricGraph, d1: &Divisor, d2: &Divisor) -> Result<Divisor> {
    if !is_admissible(g, d1)? || !is_admissible(g, d2)? {
        return Err(Error::NotAdmissible);
    }
    Ok(admissibilize(g, &d1.plus(d2)))
}

pub fn admissibilize(g: &MetricGraph, d: &Divisor) -> Divisor {
    admissible_extension(g, d, &VertexFunction::zero(g.n())).0
}

/// Inverse for `+_ℓ`.
pub fn admissible_inverse(g: &MetricGraph, d: &Divisor) -> Result<Divisor> {
    if !is_admissible(g, d)? {
        return Err(Error::NotAdmissible);
    }
    Ok(admissibilize(g, &d.neg()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub divisor: Divisor,
    /// `divisor = admissible_extension(d, witness)`.
    pub witness: VertexFunction,
    /// Cut firings `(I, distance)` in order.
    pub moves: Vec<(Subset, Rational)>,
}

pub const REDUCE_STEP_LIMIT: usize = 100_000;

/// Vertices burnt by fire started at `v`; fire crosses only edges of `E_D`.
pub fn burn(g: &MetricGraph, d: &Divisor, v: usize) -> Subset {
    let ed = EdgeSet(
        (0..g.edges().len()).map(|e| d.interior_on(e).next().is_none()).collect(),
    );
    let mut burnt = Subset::singleton(v);
    loop {
        let mut changed = false;
        for w in 0..g.n() {
            if burnt.contains(w) {
                continue;
            }
            let fronts = g
                .edges()
                .iter()
                .enumerate()
                .filter(|(k, e)| {
                    ed.0[*k] && !e.is_loop() && (e.tail == w && burnt.contains(e.head) || e.head == w && burnt.contains(e.tail))
                })
                .count() as i64;
            if fronts > d.at_vertex(w) {
                burnt = burnt.with(w);
                changed = true;
            }
        }
        if !changed {
            return burnt;
        }
    }
}

/// The `v`-reduced divisor linearly equivalent to `d`.
pub fn reduce(g: &MetricGraph, d: &Divisor, v: usize) -> Result<Reduction> {
    d.check_on(g)?;
    if v >= g.n() {
        return Err(Error::UnknownVertex(format!("#{v}")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let mut cur = admissibilize(g, d);
    let mut witness = VertexFunction::zero(n);
    let mut moves = Vec::new();
    let mut apply = |cur: &mut Divisor, s: Subset, eps: Rational, moves: &mut Vec<(Subset, Rational)>| {
        let f = VertexFunction::indicator(n, s.complement(n), &eps);
        *cur = admissible_extension(g, cur, &f).0;
        witness = witness.plus(&f);
        moves.push((s, eps));
    };

    // clear debt layer by layer, deepest first, by pushing chips outward
    let depth = bfs_depth(g, v);
    let max_len = g.edges().iter().map(|e| e.length.clone()).max().unwrap_or_else(Rational::one);
    for k in (1..=depth.iter().copied().max().unwrap_or(0)).rev() {
        let deficit = (0..n).filter(|&w| depth[w] == k).map(|w| -cur.at_vertex(w)).max().unwrap_or(0);
        if deficit <= 0 {
            continue;
        }
        let inner = Subset::from_indices((0..n).filter(|&w| depth[w] < k));
        apply(&mut cur, inner, &max_len * rational::int(deficit + 1), &mut moves);
    }

    let mut steps = 0;
    loop {
        let burnt = burn(g, &cur, v);
        if burnt == Subset::full(n) {
            break;
        }
        steps += 1;
        if steps > REDUCE_STEP_LIMIT {
            return Err(Error::StepLimit(REDUCE_STEP_LIMIT));
        }
        let unburnt = burnt.complement(n);
        let eps = ml(g, &cur, unburnt)?;
        apply(&mut cur, unburnt, eps, &mut moves);
    }
    Ok(Reduction { divisor: cur, witness, moves })
}

fn bfs_depth(g: &MetricGraph, v: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.n()];
    depth[v] = 0;
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        for e in g.edges() {
            let y = if e.tail == x { e.head } else if e.head == x { e.tail } else { continue };
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                queue.push_back(y);
            }
        }
    }
    depth
}

/// The three structural properties of a `v`-reduced divisor.
pub fn looks_reduced(g: &MetricGraph, d: &Divisor, v: usize) -> Result<bool> {
    if !is_admissible(g, d)? {
        return Ok(false);
    }
    let effective = (0..g.n()).filter(|&w| w != v).all(|w| d.at_vertex(w) >= 0);
    let ed = spanning_subgraph(g, d)?;
    Ok(effective && g.components(&ed).len() == 1)
}
