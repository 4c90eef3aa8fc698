//! Base polytopes of modular pairs.

use std::fmt;
use std::ops::{Add, Sub};
use std::sync::OnceLock;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{self, Rational};
use crate::setfun::{all_subsets, GroundSet, ModularPair, OrderedPartition, SetFunction, Subset};

pub const MAX_VERTEX_ENUMERATION: usize = 10;

/// A point of `ℚ^V`, indexed like the ground set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Rational>);

impl Point {
    pub fn zero(n: usize) -> Point {
        Point(vec![Rational::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, s: Subset) -> Rational {
        s.iter().map(|i| &self.0[i]).sum()
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn scale(&self, c: &Rational) -> Point {
        Point(self.0.iter().map(|x| x * c).collect())
    }

    pub fn dot(&self, o: &Point) -> Rational {
        self.0.iter().zip(&o.0).map(|(a, b)| a * b).sum()
    }

    pub fn to_json(&self, ground: &GroundSet) -> Value {
        let mut m = serde_json::Map::new();
        for (i, x) in self.0.iter().enumerate() {
            m.insert(ground.label(i).to_string(), rational::to_json(x));
        }
        Value::Object(m)
    }

    pub fn to_json_array(&self) -> Value {
        Value::Array(self.0.iter().map(rational::to_json).collect())
    }

    pub fn from_json(ground: &GroundSet, v: &Value) -> Result<Point> {
        match v {
            Value::Array(a) if a.len() == ground.len() => Ok(Point(a.iter().map(rational::from_json).collect::<Result<_>>()?)),
            Value::Object(m) => {
                let mut out = vec![None; ground.len()];
                for (k, x) in m {
                    let i = ground.index_of(k).ok_or_else(|| Error::UnknownVertex(k.clone()))?;
                    out[i] = Some(rational::from_json(x)?);
                }
                Ok(Point(
                    out.into_iter()
                        .enumerate()
                        .map(|(i, x)| x.ok_or_else(|| Error::Parse(format!("missing coordinate {}", ground.label(i)))))
                        .collect::<Result<_>>()?,
                ))
            }
            _ => Err(Error::Parse("expected a point".into())),
        }
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, o: &Point) -> Point {
        Point(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, o: &Point) -> Point {
        Point(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(rational::format).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

pub struct BasePolytope {
    pair: ModularPair,
    vertices: OnceLock<Vec<Point>>,
}

impl Clone for BasePolytope {
    fn clone(&self) -> Self {
        BasePolytope { pair: self.pair.clone(), vertices: self.vertices.clone() }
    }
}

impl PartialEq for BasePolytope {
    fn eq(&self, o: &Self) -> bool {
        self.pair == o.pair
    }
}

impl fmt::Debug for BasePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasePolytope({:?})", self.pair.mu)
    }
}

impl BasePolytope {
    pub fn new(pair: ModularPair) -> BasePolytope {
        BasePolytope { pair, vertices: OnceLock::new() }
    }

    pub fn pair(&self) -> &ModularPair {
        &self.pair
    }

    pub fn n(&self) -> usize {
        self.pair.n()
    }

    pub fn contains(&self, q: &Point) -> Result<bool> {
        if q.len() != self.n() {
            return Err(Error::GroundMismatch);
        }
        if q.total() != *self.pair.range() {
            return Ok(false);
        }
        Ok(all_subsets(self.n()).all(|s| q.eval(s) >= *self.pair.mu.get(s)))
    }

    /// Greedy vertex: `q(v_i) = μ(F_i) − μ(F_{i−1})`.
    pub fn vertex_of_ordering(&self, order: &[usize]) -> Result<Point> {
        if order.len() != self.n() {
            return Err(Error::InvalidPermutation);
        }
        let pi = OrderedPartition::singletons(order)?;
        let mu = &self.pair.mu;
        let mut q = Point::zero(self.n());
        for (k, w) in pi.flags().windows(2).enumerate() {
            q.0[order[k]] = mu.get(w[1]) - mu.get(w[0]);
        }
        Ok(q)
    }

    pub fn vertices(&self) -> Result<&[Point]> {
        if self.n() > MAX_VERTEX_ENUMERATION {
            return Err(Error::TooLarge(self.n()));
        }
        Ok(self.vertices.get_or_init(|| {
            let mut vs: Vec<Point> = permutations(self.n())
                .iter()
                .map(|o| self.vertex_of_ordering(o).expect("valid ordering"))
                .collect();
            vs.sort();
            vs.dedup();
            vs
        }))
    }

    /// `μ(I) = min q(I)`, `μ*(I) = max q(I)` over the vertices.
    pub fn recover(&self) -> Result<ModularPair> {
        let vs = self.vertices()?;
        let ground = self.pair.ground();
        let mu = SetFunction::from_fn(ground, |s| vs.iter().map(|q| q.eval(s)).min().unwrap());
        let mu_star = SetFunction::from_fn(ground, |s| vs.iter().map(|q| q.eval(s)).max().unwrap());
        ModularPair::new(mu, mu_star)
    }

    pub fn face(&self, pi: &OrderedPartition) -> Result<BasePolytope> {
        Ok(BasePolytope::new(crate::setfun::split(&self.pair, pi)?))
    }

    /// Exact rank of the vertex differences.
    pub fn dimension(&self) -> Result<usize> {
        let vs = self.vertices()?;
        let rows: Vec<Vec<Rational>> = vs[1..].iter().map(|q| (q - &vs[0]).0).collect();
        Ok(linalg::rank_q(&rows))
    }

    pub fn centroid(&self) -> Result<Point> {
        let vs = self.vertices()?;
        let sum = vs.iter().fold(Point::zero(self.n()), |a, q| &a + q);
        Ok(sum.scale(&Rational::new(1.into(), (vs.len() as i64).into())))
    }

    pub fn to_json(&self) -> Result<Value> {
        let vs = self.vertices()?;
        Ok(json!({
            "mu": self.pair.mu.to_json(),
            "vertices": vs.iter().map(Point::to_json_array).collect::<Vec<_>>(),
        }))
    }

    pub fn to_csv(&self) -> Result<String> {
        let vs = self.vertices()?;
        let mut out = self.pair.ground().labels().join(",");
        out.push('\n');
        for q in vs {
            out.push_str(&q.0.iter().map(rational::format).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

/// `(αμ + βν, αμ* + βν*)`.
pub fn combine(alpha: &Rational, a: &ModularPair, beta: &Rational, b: &ModularPair) -> Result<ModularPair> {
    if *alpha <= Rational::zero() || *beta <= Rational::zero() {
        return Err(Error::NonPositiveCoefficient);
    }
    if a.ground() != b.ground() {
        return Err(Error::GroundMismatch);
    }
    let mu = a.mu.scale(alpha).add(&b.mu.scale(beta))?;
    let mu_star = a.mu_star.scale(alpha).add(&b.mu_star.scale(beta))?;
    ModularPair::new(mu, mu_star)
}

/// Checks greedy linearity of `combine` on every ordering.
pub fn combine_is_linear(alpha: &Rational, a: &ModularPair, beta: &Rational, b: &ModularPair) -> Result<bool> {
    let c = BasePolytope::new(combine(alpha, a, beta, b)?);
    let (pa, pb) = (BasePolytope::new(a.clone()), BasePolytope::new(b.clone()));
    for o in permutations(a.n()) {
        let lhs = c.vertex_of_ordering(&o)?;
        let rhs = &pa.vertex_of_ordering(&o)?.scale(alpha) + &pb.vertex_of_ordering(&o)?.scale(beta);
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::setfun::split;

    fn mu0() -> ModularPair {
        let g = GroundSet::new(["u", "v", "w"]).unwrap();
        ModularPair::from_mu(SetFunction::from_fn(&g, |s| if s.len() % 3 == 0 { int(0) } else { int(-1) }))
    }

    fn p(v: &[i64]) -> Point {
        Point(v.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn membership() {
        let b = BasePolytope::new(mu0());
        assert!(b.contains(&p(&[0, 0, 0])).unwrap());
        assert!(b.contains(&p(&[1, -1, 0])).unwrap());
        assert!(!b.contains(&p(&[2, -2, 0])).unwrap());
        assert!(!b.contains(&p(&[1, 0, 0])).unwrap());
        assert_eq!(b.contains(&p(&[0, 0])), Err(Error::GroundMismatch));
    }

    #[test]
    fn greedy_vertices() {
        let b = BasePolytope::new(mu0());
        assert_eq!(b.vertex_of_ordering(&[0, 1, 2]).unwrap(), p(&[-1, 0, 1]));
        assert_eq!(b.vertex_of_ordering(&[1, 0, 2]).unwrap(), p(&[0, -1, 1]));
        assert_eq!(b.vertex_of_ordering(&[0, 0, 2]), Err(Error::InvalidPermutation));
        let mut want: Vec<Point> = permutations(3)
            .iter()
            .map(|o| {
                let mut q = vec![0; 3];
                for (k, &i) in o.iter().enumerate() {
                    q[i] = 1 - k as i64;
                }
                p(&q)
            })
            .collect();
        want.sort();
        assert_eq!(b.vertices().unwrap(), want.as_slice());
        assert_eq!(b.dimension().unwrap(), 2);
        assert_eq!(b.recover().unwrap(), mu0());
    }

    #[test]
    fn faces() {
        let b = BasePolytope::new(mu0());
        let g = mu0().ground().clone();
        let pi = OrderedPartition::bipartition(3, g.subset(["u"]).unwrap()).unwrap();
        let f = b.face(&pi).unwrap();
        assert_eq!(f.vertices().unwrap(), &[p(&[-1, 0, 1]), p(&[-1, 1, 0])]);
        assert_eq!(f.dimension().unwrap(), 1);
        assert_eq!(b.face(&OrderedPartition::whole(3)).unwrap(), b);
        let point = b.face(&OrderedPartition::singletons(&[2, 0, 1]).unwrap()).unwrap();
        assert_eq!(point.vertices().unwrap().len(), 1);
    }

    #[test]
    fn modular_is_a_point() {
        let g = GroundSet::new(["a", "b"]).unwrap();
        let q = ModularPair::modular(&g, &[int(2), int(-5)]);
        let b = BasePolytope::new(q.clone());
        assert_eq!(b.vertices().unwrap(), &[p(&[2, -5])]);
        assert_eq!(split(&q, &OrderedPartition::singletons(&[1, 0]).unwrap()).unwrap(), q);
    }

    #[test]
    fn doubled_hexagon() {
        let m = mu0();
        let c = combine(&int(1), &m, &int(1), &m).unwrap();
        assert_eq!(c.mu, m.mu.scale(&int(2)));
        assert!(combine_is_linear(&int(1), &m, &int(1), &m).unwrap());
        assert_eq!(combine(&int(0), &m, &int(1), &m), Err(Error::NonPositiveCoefficient));
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn csv_dump() {
        let b = BasePolytope::new(mu0());
        let csv = b.to_csv().unwrap();
        assert!(csv.starts_with("u,v,w\n"));
        assert_eq!(csv.lines().count(), 7);
    }
}
