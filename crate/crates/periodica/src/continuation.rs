//! Certified lifting of skeleton edges: adaptive subdivisions with disjoint
//! Newton disks, sheet permutations and the monodromy representation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::Float;
use serde_json::{json, Value};
use thiserror::Error;

use crate::curve::EmbeddedCurve;
use crate::numerics::{float_from_hex, float_to_hex, newton_refine, roots, Complex, NumericsError, PrecisionContext};
use crate::skeleton::{Puncture, VoronoiSkeleton};

pub type Perm = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("fiber roots too close together (separation {0:e})")]
    NearCriticalFiber(f64),
    #[error("path along edge {0:?} passes too close to a critical point")]
    PathTooClose((usize, usize)),
    #[error("continued fiber does not match the canonical fiber at edge {0:?}")]
    FiberMismatch((usize, usize)),
    #[error("monodromy group is not transitive; the curve is not absolutely irreducible")]
    NotIrreducible,
    #[error("local monodromies are inconsistent: {0}")]
    MonodromyMismatch(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

const MAX_HALVINGS: usize = 60;

/// Continuation data for one oriented edge i → j.
#[derive(Clone, Debug)]
pub struct EdgeLift {
    pub edge: (usize, usize),
    pub start: Complex,
    pub end: Complex,
    pub subdivision: Vec<Float>,
    pub radii: Vec<Float>,
    /// fibers[m][k]: continuation of sheet k of the start vertex at t_m.
    pub fibers: Vec<Vec<Complex>>,
    /// permutation[k]: sheet index at the end vertex reached from sheet k.
    pub permutation: Perm,
}

fn min_separation(ys: &[Complex]) -> Float {
    let prec = ys[0].prec();
    let mut best = Float::with_val(prec, f64::INFINITY);
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            let d = ys[i].dist(&ys[j]);
            if d < best {
                best = d;
            }
        }
    }
    best
}

fn radius_of(ys: &[Complex]) -> Float {
    if ys.len() < 2 {
        return Float::with_val(ys[0].prec(), ys[0].abs_f64().max(1.0));
    }
    min_separation(ys) / 3u32
}

/// The n roots of f(x0, y), sorted; these define the sheet labels at x0.
pub fn fiber(curve: &EmbeddedCurve, x0: &Complex, ctx: &PrecisionContext) -> Result<Vec<Complex>, ContinuationError> {
    let p = curve.fiber_poly(x0);
    let ys = roots(&p, ctx)?;
    if ys.len() > 1 {
        let sep = min_separation(&ys);
        if sep < ctx.frac_tolerance(1, 2) {
            return Err(ContinuationError::NearCriticalFiber(sep.to_f64()));
        }
    }
    Ok(ys)
}

fn point_on(a: &Complex, b: &Complex, t: &Float) -> Complex {
    a + &(b - a).scale(t)
}

/// Advance all branches from `ys` (at the current point) to x1 inside disks of radius `eps`.
fn step_all(curve: &EmbeddedCurve, x1: &Complex, ys: &[Complex], eps: &Float, ctx: &PrecisionContext) -> Result<Vec<Complex>, NumericsError> {
    let p = curve.fiber_poly(x1);
    ys.iter().map(|y| newton_refine(&p, y, eps, ctx)).collect()
}

/// Lift the segment a → b starting from the canonical fiber `start` and matching `end`.
pub fn lift_segment(
    curve: &EmbeddedCurve,
    edge: (usize, usize),
    a: &Complex,
    b: &Complex,
    start: &[Complex],
    end: &[Complex],
    clearance: f64,
    ctx: &PrecisionContext,
) -> Result<EdgeLift, ContinuationError> {
    let prec = ctx.prec();
    let length = a.dist(b).to_f64();
    let mut delta = if length > 0.0 { (clearance / length).min(0.25) } else { 0.25 };
    let mut t = Float::new(prec);
    let mut ys: Vec<Complex> = start.to_vec();
    let mut eps = radius_of(&ys);
    let mut subdivision = vec![t.clone()];
    let mut radii = vec![eps.clone()];
    let mut fibers = vec![ys.clone()];
    let mut successes = 0;
    let mut halvings = 0;
    let floor = ctx.frac_tolerance(1, 2);
    while t < 1 {
        let mut t1 = Float::with_val(prec, &t + delta);
        if t1 > 1 {
            t1 = Float::with_val(prec, 1);
        }
        let x1 = point_on(a, b, &t1);
        match step_all(curve, &x1, &ys, &eps, ctx) {
            Ok(next) => {
                let next_eps = radius_of(&next);
                if next_eps < floor {
                    return Err(ContinuationError::PathTooClose(edge));
                }
                t = t1;
                ys = next;
                eps = next_eps;
                subdivision.push(t.clone());
                radii.push(eps.clone());
                fibers.push(ys.clone());
                halvings = 0;
                successes += 1;
                if successes >= 3 {
                    delta = (delta * 1.5).min(0.25);
                    successes = 0;
                }
            }
            Err(NumericsError::DiskEscape { .. }) | Err(NumericsError::SlowConvergence) => {
                delta /= 2.0;
                successes = 0;
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(ContinuationError::PathTooClose(edge));
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    let permutation = match_fibers(&ys, end, &eps).ok_or(ContinuationError::FiberMismatch(edge))?;
    Ok(EdgeLift { edge, start: a.clone(), end: b.clone(), subdivision, radii, fibers, permutation })
}

/// σ with ys[k] ≈ target[σ(k)] within `eps`; None unless this is a bijection.
fn match_fibers(ys: &[Complex], target: &[Complex], eps: &Float) -> Option<Perm> {
    let mut perm = Vec::with_capacity(ys.len());
    let mut used = vec![false; target.len()];
    for y in ys {
        let (j, d) = target.iter().enumerate().map(|(j, z)| (j, y.dist(z))).min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
        if d >= *eps || used[j] {
            return None;
        }
        used[j] = true;
        perm.push(j);
    }
    Some(perm)
}

impl EdgeLift {
    pub fn sheets(&self) -> usize {
        self.permutation.len()
    }

    pub fn steps(&self) -> usize {
        self.subdivision.len() - 1
    }

    pub fn point(&self, t: &Float) -> Complex {
        point_on(&self.start, &self.end, t)
    }

    /// Fiber values at parameter t, indexed by starting sheet.
    pub fn evaluate(&self, curve: &EmbeddedCurve, t: &Float, ctx: &PrecisionContext) -> Result<Vec<Complex>, NumericsError> {
        let m = match self.subdivision.binary_search_by(|s| s.partial_cmp(t).unwrap()) {
            Ok(m) => return Ok(self.fibers[m].clone()),
            Err(0) => 0,
            Err(m) => m - 1,
        };
        let m = m.min(self.subdivision.len() - 1);
        step_all(curve, &self.point(t), &self.fibers[m], &self.radii[m], ctx)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "edge": [self.edge.0, self.edge.1],
            "start": self.start.to_hex(),
            "end": self.end.to_hex(),
            "t": self.subdivision.iter().map(float_to_hex).collect::<Vec<_>>(),
            "eps": self.radii.iter().map(float_to_hex).collect::<Vec<_>>(),
            "fibers": self.fibers.iter().map(|f| f.iter().map(|y| y.to_hex()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "permutation": self.permutation,
        })
    }

    pub fn from_json(v: &Value, prec: u32) -> Option<EdgeLift> {
        let floats = |key: &str| -> Option<Vec<Float>> {
            v.get(key)?.as_array()?.iter().map(|s| float_from_hex(prec, s.as_str()?)).collect()
        };
        let edge = v.get("edge")?.as_array()?;
        let fibers = v
            .get("fibers")?
            .as_array()?
            .iter()
            .map(|f| f.as_array()?.iter().map(|s| Complex::from_hex(prec, s.as_str()?)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(EdgeLift {
            edge: (edge.first()?.as_u64()? as usize, edge.get(1)?.as_u64()? as usize),
            start: Complex::from_hex(prec, v.get("start")?.as_str()?)?,
            end: Complex::from_hex(prec, v.get("end")?.as_str()?)?,
            subdivision: floats("t")?,
            radii: floats("eps")?,
            fibers,
            permutation: v.get("permutation")?.as_array()?.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<_>>()?,
        })
    }
}

/// Canonical fibers at every skeleton vertex.
pub fn vertex_fibers(curve: &EmbeddedCurve, skel: &VoronoiSkeleton, ctx: &PrecisionContext) -> Result<Vec<Vec<Complex>>, ContinuationError> {
    skel.vertices.par_iter().map(|v| fiber(curve, v, ctx)).collect()
}

/// Lift every skeleton edge in its stored orientation (smaller index first).
pub fn lift_all(
    curve: &EmbeddedCurve,
    skel: &VoronoiSkeleton,
    fibers: &[Vec<Complex>],
    ctx: &PrecisionContext,
) -> Result<Vec<EdgeLift>, ContinuationError> {
    skel.edges
        .par_iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            lift_segment(curve, (i, j), &skel.vertices[i], &skel.vertices[j], &fibers[i], &fibers[j], skel.edge_clearance[e], ctx)
        })
        .collect()
}

pub fn compose(a: &Perm, b: &Perm) -> Perm {
    a.iter().map(|&k| b[k]).collect()
}

pub fn inverse(a: &Perm) -> Perm {
    let mut inv = vec![0; a.len()];
    for (k, &v) in a.iter().enumerate() {
        inv[v] = k;
    }
    inv
}

pub fn identity(n: usize) -> Perm {
    (0..n).collect()
}

/// Cycle lengths in decreasing order.
pub fn cycle_type(p: &Perm) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut k = s;
        while !seen[k] {
            seen[k] = true;
            k = p[k];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn is_even(p: &Perm) -> bool {
    cycle_type(p).iter().map(|l| l - 1).sum::<usize>() % 2 == 0
}

/// Sheet permutation along a vertex walk; steps compose left to right.
pub fn walk_permutation(skel: &VoronoiSkeleton, lifts: &[EdgeLift], walk: &[usize], n: usize) -> Perm {
    let mut acc = identity(n);
    for w in walk.windows(2) {
        let (e, forward) = skel.edge_index(w[0], w[1]).expect("walk uses skeleton edges");
        let s = if forward { lifts[e].permutation.clone() } else { inverse(&lifts[e].permutation) };
        acc = compose(&acc, &s);
    }
    acc
}

#[derive(Clone, Debug)]
pub struct MonodromyRep {
    pub base_vertex: usize,
    pub sheets: usize,
    pub generators: BTreeMap<Puncture, Perm>,
    /// Whether the ∞ generator had to be inverted for the product relation.
    pub infinity_inverted: bool,
    /// Whether the angular-order product relation held exactly (else only parity was checkable).
    pub product_relation_exact: bool,
}

pub fn local_monodromy(skel: &VoronoiSkeleton, lifts: &[EdgeLift], s: Puncture, n: usize) -> Perm {
    walk_permutation(skel, lifts, &skel.loop_path(s), n)
}

fn transitive(gens: &[&Perm], n: usize) -> bool {
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(k) = stack.pop() {
        for g in gens {
            let j = g[k];
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&b| b)
}

impl MonodromyRep {
    pub fn compute(skel: &VoronoiSkeleton, lifts: &[EdgeLift], n: usize) -> Result<Self, ContinuationError> {
        let generators: BTreeMap<Puncture, Perm> =
            skel.punctures().into_iter().map(|s| (s, local_monodromy(skel, lifts, s, n))).collect();
        let gens: Vec<&Perm> = generators.values().collect();
        if !transitive(&gens, n) {
            return Err(ContinuationError::NotIrreducible);
        }
        let mut prod = identity(n);
        for i in skel.angular_order() {
            prod = compose(&prod, &generators[&Puncture::Finite(i)]);
        }
        let inf = &generators[&Puncture::Infinity];
        let id = identity(n);
        let (exact, inverted) = if compose(&prod, inf) == id {
            (true, false)
        } else if compose(&prod, &inverse(inf)) == id {
            (true, true)
        } else {
            // The based loops need not be in standard position, so the product relation only
            // holds up to reordering; its conjugacy-invariant shadow is the parity.
            if is_even(&prod) != is_even(inf) {
                return Err(ContinuationError::MonodromyMismatch("parity of the finite product differs from ∞".into()));
            }
            (false, true)
        };
        Ok(MonodromyRep {
            base_vertex: skel.base_vertex,
            sheets: n,
            generators,
            infinity_inverted: inverted,
            product_relation_exact: exact,
        })
    }

    /// Σ over punctures of Σ over cycles (length − 1).
    pub fn ramification(&self) -> usize {
        self.generators.values().map(|p| cycle_type(p).iter().map(|l| l - 1).sum::<usize>()).sum()
    }

    /// Genus from Riemann–Hurwitz: 2 − 2g = 2n − ramification.
    pub fn genus(&self) -> Option<usize> {
        let r = self.ramification() as i64;
        let twice = r - 2 * self.sheets as i64 + 2;
        if twice < 0 || twice % 2 != 0 {
            None
        } else {
            Some((twice / 2) as usize)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::PlaneCurve;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100)
    }

    fn setup(src: &str) -> (EmbeddedCurve, VoronoiSkeleton, Vec<Vec<Complex>>, Vec<EdgeLift>) {
        let c = ctx();
        let curve = PlaneCurve::parse(src).unwrap();
        let emb = curve.embed(&c).unwrap();
        let s = curve.critical_locus(&c).unwrap();
        let skel = VoronoiSkeleton::build(&s.finite_points, &c).unwrap();
        let fibers = vertex_fibers(&emb, &skel, &c).unwrap();
        let lifts = lift_all(&emb, &skel, &fibers, &c).unwrap();
        (emb, skel, fibers, lifts)
    }

    #[test]
    fn simple_fibers() {
        let c = ctx();
        let emb = PlaneCurve::parse("y^2 - x").unwrap().embed(&c).unwrap();
        let f = fiber(&emb, &Complex::one(c.prec()), &c).unwrap();
        assert!((f[0].re.to_f64() + 1.0).abs() < 1e-30 && (f[1].re.to_f64() - 1.0).abs() < 1e-30);
        let emb = PlaneCurve::parse("y^2 - x^3 + x + 1").unwrap().embed(&c).unwrap();
        let f = fiber(&emb, &Complex::from_f64(c.prec(), 2.0, 0.0), &c).unwrap();
        assert!((f[1].re.to_f64() - 5f64.sqrt()).abs() < 1e-15);
        let emb = PlaneCurve::parse("y^2 - x^2").unwrap().embed(&c).unwrap();
        let r = fiber(&emb, &Complex::zero(c.prec()), &c);
        assert!(matches!(r, Err(ContinuationError::NearCriticalFiber(_))), "{:?}", r);
    }

    #[test]
    fn square_root_continuation() {
        let c = ctx();
        let emb = PlaneCurve::parse("y^2 - x").unwrap().embed(&c).unwrap();
        let p = |x: f64, y: f64| Complex::from_f64(c.prec(), x, y);
        let corners = [p(1.0, -1.0), p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, -1.0)];
        let fibers: Vec<_> = corners.iter().map(|z| fiber(&emb, z, &c).unwrap()).collect();
        // Right half-plane edge: identity.
        let l = lift_segment(&emb, (0, 1), &corners[0], &corners[1], &fibers[0], &fibers[1], 1.0, &c).unwrap();
        // Oracle: principal √ is continuous on Re x > 0.
        let root0 = corners[0].sqrt();
        let k = fibers[0].iter().position(|y| y.dist(&root0).to_f64() < 1e-20).unwrap();
        let root1 = corners[1].sqrt();
        assert!(fibers[1][l.permutation[k]].dist(&root1).to_f64() < 1e-20);
        let mut total = identity(2);
        for i in 0..4 {
            let j = (i + 1) % 4;
            let l = lift_segment(&emb, (i, j), &corners[i], &corners[j], &fibers[i], &fibers[j], 1.0, &c).unwrap();
            total = compose(&total, &l.permutation);
        }
        assert_eq!(total, vec![1, 0]);
    }

    #[test]
    fn evaluation_and_cache_roundtrip() {
        let c = ctx();
        let (emb, _skel, _f, lifts) = setup("y^2 - x^3 + x + 1");
        let l = &lifts[0];
        let t = Float::with_val(c.prec(), 0.37);
        let ys = l.evaluate(&emb, &t, &c).unwrap();
        let p = emb.fiber_poly(&l.point(&t));
        for y in &ys {
            assert!(p.eval(y).abs_f64() < 1e-25);
        }
        assert_eq!(l.evaluate(&emb, &Float::new(c.prec()), &c).unwrap(), l.fibers[0]);
        let back = EdgeLift::from_json(&l.to_json(), c.prec()).unwrap();
        assert_eq!(back.fibers, l.fibers);
        assert_eq!(back.subdivision, l.subdivision);
        assert_eq!(back.permutation, l.permutation);
    }

    #[test]
    fn disjoint_disks_on_every_node() {
        let (_emb, _skel, _f, lifts) = setup("y^3 + x*y + 1");
        for l in &lifts {
            for (m, ys) in l.fibers.iter().enumerate() {
                assert!(Float::with_val(l.radii[m].prec(), &l.radii[m] * 2u32) < min_separation(ys));
            }
        }
    }

    #[test]
    fn elliptic_monodromy() {
        let (_emb, skel, _f, lifts) = setup("y^2 - x^3 + x + 1");
        let rep = MonodromyRep::compute(&skel, &lifts, 2).unwrap();
        for p in rep.generators.values() {
            assert_eq!(cycle_type(p), vec![2]);
        }
        assert_eq!(rep.genus(), Some(1));
    }

    #[test]
    fn square_root_monodromy() {
        let (_emb, skel, _f, lifts) = setup("y^2 - x");
        let rep = MonodromyRep::compute(&skel, &lifts, 2).unwrap();
        assert_eq!(rep.generators[&Puncture::Finite(0)], vec![1, 0]);
        assert_eq!(rep.genus(), Some(0));
    }

    #[test]
    fn reducible_curve_detected() {
        let c = ctx();
        let curve = PlaneCurve::parse("y^2 - x^2 - 1").unwrap();
        let emb = curve.embed(&c).unwrap();
        let s = curve.critical_locus(&c).unwrap();
        let skel = VoronoiSkeleton::build(&s.finite_points, &c).unwrap();
        let fibers = vertex_fibers(&emb, &skel, &c).unwrap();
        let lifts = lift_all(&emb, &skel, &fibers, &c).unwrap();
        assert!(MonodromyRep::compute(&skel, &lifts, 2).is_ok());
        let curve = PlaneCurve::parse("(y - x)*(y + x - 1)").unwrap();
        let emb = curve.embed(&c).unwrap();
        let s = curve.critical_locus(&c).unwrap();
        let skel = VoronoiSkeleton::build(&s.finite_points, &c).unwrap();
        let fibers = vertex_fibers(&emb, &skel, &c).unwrap();
        let lifts = lift_all(&emb, &skel, &fibers, &c).unwrap();
        assert_eq!(MonodromyRep::compute(&skel, &lifts, 2).unwrap_err(), ContinuationError::NotIrreducible);
    }

    #[test]
    fn steps_shrink_near_branch_points() {
        let (_emb, skel, _f, lifts) = setup("y^2 - x^3 + x + 1");
        let by = |better: fn(f64, f64) -> bool| {
            let mut best = 0;
            for e in 0..lifts.len() {
                if better(skel.edge_clearance[e], skel.edge_clearance[best]) {
                    best = e;
                }
            }
            lifts[best].steps()
        };
        assert!(by(|a, b| a < b) > by(|a, b| a > b));
    }
}
