//! Voronoi skeleton of the punctured plane.
//!
//! Cells are computed by clipping a bounding box with perpendicular bisectors in
//! exact rational arithmetic on sites snapped to a dyadic grid, so vertex
//! identity and orientation tests are exact.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rug::float::Round;
use rug::{Float, Rational};
use serde_json::json;
use thiserror::Error;

use crate::numerics::{Complex, PrecisionContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeletonError {
    #[error("degenerate Voronoi diagram: {0}")]
    DegenerateDiagram(String),
    #[error("no sites")]
    NoSites,
}

/// A puncture of the sphere: a finite critical point (by index) or ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Puncture {
    Finite(usize),
    Infinity,
}

pub type Point = (Rational, Rational);

#[derive(Clone, Debug)]
pub struct VoronoiSkeleton {
    /// Finite sites followed by the six hexagon sites.
    pub sites: Vec<Complex>,
    pub finite_count: usize,
    pub center: Complex,
    pub radius: Float,
    pub vertices: Vec<Complex>,
    pub exact_vertices: Vec<Point>,
    /// Unordered edges stored with the smaller index first, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Closed walks (first == last); index `finite_count` is the ∞ loop.
    pub cell_loops: Vec<Vec<usize>>,
    pub base_vertex: usize,
    /// Distance from each edge segment to the nearest finite site.
    pub edge_clearance: Vec<f64>,
    pub clearance: f64,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

/// Center, radius and the six hexagon points around the finite sites.
pub fn enclosing_hexagon(sites: &[Complex], prec: u32) -> (Complex, Float, Vec<Complex>) {
    let mut c = Complex::zero(prec);
    for s in sites {
        c = &c + s;
    }
    let c = c.scale_f64(1.0 / sites.len() as f64);
    let mut rho = Float::new(prec);
    for s in sites {
        let d = s.dist(&c);
        if d > rho {
            rho = d;
        }
    }
    rho *= 2u32;
    if rho.is_zero() {
        rho = Float::with_val(prec, 1);
    }
    let pi = crate::numerics::pi(prec);
    let hex = (0..6)
        .map(|k| {
            let mut theta = Float::with_val(prec, &pi * (4 * k + 1) as u32);
            theta /= 12u32;
            &c + &Complex::cis(&theta).scale(&rho)
        })
        .collect();
    (c, rho, hex)
}

fn snap(x: &Float, e: i32) -> Rational {
    let mut t = x.clone();
    t <<= e;
    let z = t.to_integer_round(Round::Nearest).map(|v| v.0).unwrap_or_default();
    Rational::from(z) >> e
}

fn to_f64(p: &Point) -> (f64, f64) {
    (p.0.to_f64(), p.1.to_f64())
}

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    let ax = Rational::from(&a.0 - &o.0);
    let ay = Rational::from(&a.1 - &o.1);
    let bx = Rational::from(&b.0 - &o.0);
    let by = Rational::from(&b.1 - &o.1);
    ax * by - ay * bx
}

/// Clip a convex ccw polygon to a·x + b·y ≤ c.
fn clip(poly: &[Point], a: &Rational, b: &Rational, c: &Rational) -> Vec<Point> {
    let val = |p: &Point| -> Rational { Rational::from(a * &p.0) + Rational::from(b * &p.1) - c };
    let vals: Vec<Rational> = poly.iter().map(val).collect();
    let mut out: Vec<Point> = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        let (dp, dq) = (&vals[i], &vals[j]);
        if *dp <= 0 {
            out.push(poly[i].clone());
        }
        if (*dp < 0 && *dq > 0) || (*dp > 0 && *dq < 0) {
            let t = dp / Rational::from(dp - dq);
            let x = Rational::from(&poly[j].0 - &poly[i].0) * &t + &poly[i].0;
            let y = Rational::from(&poly[j].1 - &poly[i].1) * &t + &poly[i].1;
            out.push((x, y));
        }
    }
    out.dedup();
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

fn segment_distance(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Hierholzer circuit over directed edges; every vertex has equal in/out degree.
fn euler_circuit(edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in edges {
        out.entry(u).or_default().push(v);
    }
    for list in out.values_mut() {
        list.sort_unstable_by(|a, b| b.cmp(a));
    }
    let start = *out.keys().next()?;
    let mut stack = vec![start];
    let mut circuit = Vec::new();
    while let Some(&u) = stack.last() {
        match out.get_mut(&u).and_then(|l| l.pop()) {
            Some(v) => stack.push(v),
            None => circuit.push(stack.pop().unwrap()),
        }
    }
    circuit.reverse();
    if circuit.len() != edges.len() + 1 {
        return None;
    }
    Some(circuit)
}

impl VoronoiSkeleton {
    pub fn build(finite: &[Complex], ctx: &PrecisionContext) -> Result<Self, SkeletonError> {
        if finite.is_empty() {
            return Err(SkeletonError::NoSites);
        }
        let prec = ctx.prec();
        let (center, radius, hex) = enclosing_hexagon(finite, prec);
        let mut sites: Vec<Complex> = finite.to_vec();
        sites.extend(hex);
        let m = finite.len();

        // Grid spacing 2^-e relative to the radius. It does not depend on the working precision,
        // so symmetric (cocircular) configurations break ties the same way at every precision.
        let lg = radius.get_exp().unwrap_or(0);
        let mut e = 60 - lg;
        let exact: Vec<Point> = loop {
            let exact: Vec<Point> = sites.iter().map(|s| (snap(&s.re, e), snap(&s.im, e))).collect();
            let distinct = exact.iter().map(|p| (p.0.clone(), p.1.clone())).collect::<BTreeSet<_>>().len() == exact.len();
            if distinct {
                break exact;
            }
            if e + lg >= ctx.working_bits as i32 {
                return Err(SkeletonError::DegenerateDiagram("sites coincide after snapping".into()));
            }
            e += 20;
        };

        let (cx, cy) = (snap(&center.re, e), snap(&center.im, e));
        let half = snap(&Float::with_val(prec, &radius * 4u32), e);
        let bx0 = Rational::from(&cx - &half);
        let bx1 = Rational::from(&cx + &half);
        let by0 = Rational::from(&cy - &half);
        let by1 = Rational::from(&cy + &half);
        let boxpoly: Vec<Point> = vec![
            (bx0.clone(), by0.clone()),
            (bx1.clone(), by0.clone()),
            (bx1.clone(), by1.clone()),
            (bx0.clone(), by1.clone()),
        ];
        let approx: Vec<(f64, f64)> = exact.iter().map(to_f64).collect();

        let mut cells: Vec<Vec<Point>> = Vec::with_capacity(m);
        for p in 0..m {
            let mut order: Vec<usize> = (0..exact.len()).filter(|&q| q != p).collect();
            let d2 = |q: usize| (approx[q].0 - approx[p].0).powi(2) + (approx[q].1 - approx[p].1).powi(2);
            order.sort_by(|&a, &b| d2(a).partial_cmp(&d2(b)).unwrap().then(a.cmp(&b)));
            let mut poly = boxpoly.clone();
            let (px, py) = (&exact[p].0, &exact[p].1);
            let pn = Rational::from(px * px) + Rational::from(py * py);
            for q in order {
                let reach = poly
                    .iter()
                    .map(|v| {
                        let v = to_f64(v);
                        ((v.0 - approx[p].0).powi(2) + (v.1 - approx[p].1).powi(2)).sqrt()
                    })
                    .fold(0.0, f64::max);
                if d2(q).sqrt() > 2.0 * reach * (1.0 + 1e-9) {
                    break;
                }
                let (qx, qy) = (&exact[q].0, &exact[q].1);
                let a = Rational::from(qx - px) * 2u32;
                let b = Rational::from(qy - py) * 2u32;
                let c = Rational::from(qx * qx) + Rational::from(qy * qy) - &pn;
                poly = clip(&poly, &a, &b, &c);
            }
            if poly.len() < 3 {
                return Err(SkeletonError::DegenerateDiagram(format!("cell {} collapsed", p)));
            }
            if poly.iter().any(|v| v.0 == bx0 || v.0 == bx1 || v.1 == by0 || v.1 == by1) {
                return Err(SkeletonError::DegenerateDiagram(format!("cell {} is unbounded", p)));
            }
            cells.push(poly);
        }

        let mut index: HashMap<Point, usize> = HashMap::new();
        let mut exact_vertices: Vec<Point> = Vec::new();
        let mut cell_loops: Vec<Vec<usize>> = Vec::with_capacity(m + 1);
        let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
        for poly in &cells {
            let mut walk: Vec<usize> = poly
                .iter()
                .map(|v| {
                    *index.entry(v.clone()).or_insert_with(|| {
                        exact_vertices.push(v.clone());
                        exact_vertices.len() - 1
                    })
                })
                .collect();
            walk.push(walk[0]);
            for w in walk.windows(2) {
                directed.insert((w[0], w[1]));
            }
            cell_loops.push(walk);
        }
        let outer: Vec<(usize, usize)> = directed.iter().filter(|(u, v)| !directed.contains(&(*v, *u))).cloned().collect();
        let infinity_loop =
            euler_circuit(&outer).ok_or_else(|| SkeletonError::DegenerateDiagram("outer boundary is not closed".into()))?;
        cell_loops.push(infinity_loop);

        let edges: Vec<(usize, usize)> =
            directed.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect::<BTreeSet<_>>().into_iter().collect();
        let vertices: Vec<Complex> =
            exact_vertices.iter().map(|(x, y)| Complex::from_parts(prec, &Float::with_val(prec, x), &Float::with_val(prec, y))).collect();
        let vf: Vec<(f64, f64)> = exact_vertices.iter().map(to_f64).collect();

        let nearest = |v: (f64, f64), range: std::ops::Range<usize>| {
            range.map(|s| ((v.0 - approx[s].0).powi(2) + (v.1 - approx[s].1).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
        };
        let mut base_vertex = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, &v) in vf.iter().enumerate() {
            let d = nearest(v, 0..sites.len());
            let better = d > best
                || (d == best && (exact_vertices[i].0.clone(), exact_vertices[i].1.clone()) < exact_vertices[base_vertex]);
            if better {
                best = d;
                base_vertex = i;
            }
        }

        let edge_clearance: Vec<f64> = edges
            .iter()
            .map(|&(u, v)| (0..m).map(|s| segment_distance(vf[u], vf[v], approx[s])).fold(f64::INFINITY, f64::min))
            .collect();
        let clearance = edge_clearance.iter().cloned().fold(f64::INFINITY, f64::min);

        let nv = vertices.len();
        let mut adj = vec![Vec::new(); nv];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let mut parent = vec![None; nv];
        let mut depth = vec![usize::MAX; nv];
        depth[base_vertex] = 0;
        let mut queue = VecDeque::from([base_vertex]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(SkeletonError::DegenerateDiagram("skeleton graph is disconnected".into()));
        }

        Ok(VoronoiSkeleton {
            sites,
            finite_count: m,
            center,
            radius,
            vertices,
            exact_vertices,
            edges,
            cell_loops,
            base_vertex,
            edge_clearance,
            clearance,
            parent,
            depth,
        })
    }

    pub fn punctures(&self) -> Vec<Puncture> {
        let mut v: Vec<Puncture> = (0..self.finite_count).map(Puncture::Finite).collect();
        v.push(Puncture::Infinity);
        v
    }

    pub fn cell_loop(&self, s: Puncture) -> &[usize] {
        match s {
            Puncture::Finite(i) => &self.cell_loops[i],
            Puncture::Infinity => &self.cell_loops[self.finite_count],
        }
    }

    /// Tree path from the base vertex to `v`.
    pub fn tree_path(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Closed walk from the base vertex around `s` once counterclockwise.
    pub fn loop_path(&self, s: Puncture) -> Vec<usize> {
        let lp = self.cell_loop(s);
        let body = &lp[..lp.len() - 1];
        let k = (0..body.len()).min_by_key(|&i| (self.depth[body[i]], i)).unwrap();
        let path = self.tree_path(body[k]);
        let mut walk = path.clone();
        for i in 1..=body.len() {
            walk.push(body[(k + i) % body.len()]);
        }
        walk.extend(path.iter().rev().skip(1));
        walk
    }

    /// Position of an edge in `edges`, with `true` when traversed as stored.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<(usize, bool)> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok().map(|i| (i, u < v))
    }

    /// Cycle rank of the graph.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// Finite sites ordered by angle about the center.
    pub fn angular_order(&self) -> Vec<usize> {
        let c = self.center.to_f64_pair();
        let mut idx: Vec<usize> = (0..self.finite_count).collect();
        let ang = |i: usize| {
            let (x, y) = self.sites[i].to_f64_pair();
            (y - c.1).atan2(x - c.0)
        };
        idx.sort_by(|&a, &b| ang(a).partial_cmp(&ang(b)).unwrap().then(a.cmp(&b)));
        idx
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pt = |z: &Complex| {
            let (x, y) = z.to_f64_pair();
            json!([x, y])
        };
        json!({
            "center": pt(&self.center),
            "radius": self.radius.to_f64(),
            "sites": self.sites.iter().map(pt).collect::<Vec<_>>(),
            "finite_sites": self.finite_count,
            "vertices": self.vertices.iter().map(pt).collect::<Vec<_>>(),
            "edges": self.edges,
            "loops": self.cell_loops,
            "base_vertex": self.base_vertex,
            "clearance": self.clearance,
        })
    }
}

/// Winding number of a closed vertex walk about a point, by summing angle increments.
pub fn winding_number(points: &[(f64, f64)], walk: &[usize], p: (f64, f64)) -> i64 {
    let mut total = 0.0;
    for w in walk.windows(2) {
        let a = points[w[0]];
        let b = points[w[1]];
        let t0 = (a.1 - p.1).atan2(a.0 - p.0);
        let t1 = (b.1 - p.1).atan2(b.0 - p.0);
        let mut d = t1 - t0;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Sign of the turn a → b → c on exact points: +1 counterclockwise, −1 clockwise, 0 collinear.
pub fn orientation(a: &Point, b: &Point, c: &Point) -> i32 {
    match cross(a, b, c).cmp0() {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{roots, ComplexPoly};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100)
    }

    fn pts(s: &VoronoiSkeleton) -> Vec<(f64, f64)> {
        s.vertices.iter().map(|v| v.to_f64_pair()).collect()
    }

    fn check_windings(s: &VoronoiSkeleton) {
        let p = pts(s);
        for i in 0..s.finite_count {
            for j in 0..s.finite_count {
                let w = winding_number(&p, &s.cell_loops[i], s.sites[j].to_f64_pair());
                assert_eq!(w, (i == j) as i64);
            }
            let w = winding_number(&p, &s.loop_path(Puncture::Finite(i)), s.sites[i].to_f64_pair());
            assert_eq!(w, 1);
            assert_eq!(winding_number(&p, s.cell_loop(Puncture::Infinity), s.sites[i].to_f64_pair()), 1);
        }
    }

    #[test]
    fn hexagon_formula() {
        let c = ctx();
        let sites = vec![Complex::from_f64(c.prec(), -1.0, 0.0), Complex::from_f64(c.prec(), 1.0, 0.0)];
        let (c0, rho, hex) = enclosing_hexagon(&sites, c.prec());
        assert!(c0.abs_f64() < 1e-30);
        assert_eq!(rho.to_f64(), 2.0);
        assert_eq!(hex.len(), 6);
        let (_, rho, _) = enclosing_hexagon(&[Complex::zero(c.prec())], c.prec());
        assert_eq!(rho.to_f64(), 1.0);
    }

    #[test]
    fn two_sites_share_bisector() {
        let c = ctx();
        let sites = vec![Complex::from_f64(c.prec(), -1.0, 0.0), Complex::from_f64(c.prec(), 1.0, 0.0)];
        let s = VoronoiSkeleton::build(&sites, &c).unwrap();
        let on_axis = s.edges.iter().any(|&(u, v)| {
            s.exact_vertices[u].0 == 0 && s.exact_vertices[v].0 == 0
        });
        assert!(on_axis);
        check_windings(&s);
    }

    #[test]
    fn cubic_branch_points() {
        let c = ctx();
        let p = ComplexPoly::from_f64(c.prec(), &[-1.0, -1.0, 0.0, 1.0]);
        let r = roots(&p, &c).unwrap();
        let s = VoronoiSkeleton::build(&r, &c).unwrap();
        let (c0, rho, _) = enclosing_hexagon(&r, c.prec());
        for z in &r {
            assert!(z.dist(&c0) < rho);
        }
        // 9 sites with 6 on the hull: 2·9 − 2 − 6 Voronoi vertices.
        assert_eq!(s.vertices.len(), 10);
        check_windings(&s);
        assert!(s.cycle_rank() >= 3);
        assert!(s.clearance > 0.1);
    }

    #[test]
    fn single_site() {
        let c = ctx();
        let s = VoronoiSkeleton::build(&[Complex::zero(c.prec())], &c).unwrap();
        assert_eq!(s.vertices.len(), 6);
        check_windings(&s);
    }

    #[test]
    fn cocircular_sites() {
        let c = ctx();
        let sites: Vec<Complex> =
            [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (0.0, 0.0)].iter().map(|&(x, y)| Complex::from_f64(c.prec(), x, y)).collect();
        let s = VoronoiSkeleton::build(&sites, &c).unwrap();
        check_windings(&s);
        assert!(s.cycle_rank() >= sites.len());
    }

    #[test]
    fn loop_paths_start_at_base() {
        let c = ctx();
        let sites: Vec<Complex> = (0..7)
            .map(|k| {
                let t = k as f64 * 0.9;
                Complex::from_f64(c.prec(), t.cos() * (1.0 + 0.1 * k as f64), t.sin())
            })
            .collect();
        let s = VoronoiSkeleton::build(&sites, &c).unwrap();
        for p in s.punctures() {
            let w = s.loop_path(p);
            assert_eq!(w[0], s.base_vertex);
            assert_eq!(*w.last().unwrap(), s.base_vertex);
            for e in w.windows(2) {
                assert!(s.edge_index(e[0], e[1]).is_some());
            }
        }
        check_windings(&s);
    }
}
