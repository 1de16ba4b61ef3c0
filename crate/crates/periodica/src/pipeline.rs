//! Orchestration from curve text to period matrix, with an on-disk lift cache.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::abelian::AbelianError;
use crate::continuation::{cycle_type, lift_all, vertex_fibers, ContinuationError, EdgeLift, MonodromyRep};
use crate::curve::{CriticalLocus, CurveError, EmbeddedCurve, PlaneCurve};
use crate::differentials::{DifferentialBasis, DifferentialsError};
use crate::homology::{Cycle, HomologyError, LiftedGraph, SymplecticBasis};
use crate::numerics::{Complex, PrecisionContext};
use crate::periods::{all_edge_periods, PeriodMatrix, PeriodsError, RiemannMatrix};
use crate::skeleton::{SkeletonError, VoronoiSkeleton};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("curve: {0}")]
    Curve(#[from] CurveError),
    #[error("skeleton: {0}")]
    Skeleton(#[from] SkeletonError),
    #[error("continuation: {0}")]
    Continuation(#[from] ContinuationError),
    #[error("homology: {0}")]
    Homology(#[from] HomologyError),
    #[error("differentials: {0}")]
    Differentials(#[from] DifferentialsError),
    #[error("periods: {0}")]
    Periods(#[from] PeriodsError),
    #[error("genus mismatch: {baker} differentials from the Newton polygon but genus {genus}; supply --differentials")]
    GenusMismatch { baker: usize, genus: usize },
    #[error("user basis has {given} differentials but genus is {genus}")]
    BasisSizeMismatch { given: usize, genus: usize },
    #[error("abelian: {0}")]
    Abelian(#[from] AbelianError),
    #[error("io: {0}")]
    Io(String),
}

/// Coarse classification used for exit codes and precision escalation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Precision,
    Internal,
}

impl PipelineError {
    pub fn class(&self) -> ErrorClass {
        use ContinuationError as C;
        match self {
            PipelineError::Curve(CurveError::Numerics(_)) => ErrorClass::Precision,
            PipelineError::Curve(_) | PipelineError::Io(_) => ErrorClass::Parse,
            PipelineError::Differentials(DifferentialsError::SmallDenominator) => ErrorClass::Precision,
            PipelineError::Differentials(_) | PipelineError::BasisSizeMismatch { .. } => ErrorClass::Parse,
            PipelineError::Continuation(C::NotIrreducible) => ErrorClass::Parse,
            PipelineError::Continuation(_) | PipelineError::Skeleton(SkeletonError::DegenerateDiagram(_)) => ErrorClass::Precision,
            PipelineError::Periods(PeriodsError::RiemannCheckFailed(_)) => ErrorClass::Internal,
            PipelineError::Periods(_) => ErrorClass::Precision,
            PipelineError::Homology(HomologyError::NotIrreducible) => ErrorClass::Parse,
            PipelineError::Abelian(
                AbelianError::PrecisionTooLow(_) | AbelianError::StructureConstantsNotRational | AbelianError::ClosureFailure | AbelianError::Singular,
            ) => ErrorClass::Precision,
            _ => ErrorClass::Internal,
        }
    }

    pub fn hint(&self) -> &'static str {
        match self {
            PipelineError::GenusMismatch { .. } | PipelineError::Periods(PeriodsError::RiemannCheckFailed(_)) => {
                "the Newton-polygon basis does not apply to this model; supply --differentials"
            }
            _ if self.class() == ErrorClass::Precision => "raise --prec or pass --auto-prec",
            _ => "",
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Read a curve from a path, or treat the argument as inline text when no such file exists.
pub fn load_curve(arg: &str) -> Result<PlaneCurve> {
    let text = if Path::new(arg).is_file() { fs::read_to_string(arg).map_err(|e| PipelineError::Io(e.to_string()))? } else { arg.to_string() };
    Ok(PlaneCurve::parse(&text)?)
}

pub fn load_text(arg: &str) -> Result<String> {
    if Path::new(arg).is_file() {
        fs::read_to_string(arg).map_err(|e| PipelineError::Io(e.to_string()))
    } else {
        Ok(arg.to_string())
    }
}

/// Topological data: skeleton, lifts and monodromy.
pub struct Topology {
    pub curve: PlaneCurve,
    pub ctx: PrecisionContext,
    pub embedded: EmbeddedCurve,
    pub locus: CriticalLocus,
    pub skeleton: VoronoiSkeleton,
    pub lifts: Vec<EdgeLift>,
    pub monodromy: MonodromyRep,
}

/// Symplectic homology basis over the lifted graph.
pub struct Homology {
    pub graph: LiftedGraph,
    pub cycles: Vec<Cycle>,
    pub gram: Vec<Vec<i64>>,
    pub basis: SymplecticBasis,
}

/// Everything through the Riemann matrix.
pub struct Analysis {
    pub topology: Topology,
    pub homology: Homology,
    pub differentials: DifferentialBasis,
    pub periods: PeriodMatrix,
    pub riemann: RiemannMatrix,
}

fn cache_file(dir: &Path, curve: &PlaneCurve, ctx: &PrecisionContext) -> PathBuf {
    dir.join(format!("{}-{}.json", curve.fingerprint(), ctx.working_bits))
}

fn read_cache(path: &Path, skel: &VoronoiSkeleton, prec: u32) -> Option<Vec<EdgeLift>> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).ok()?).ok()?;
    let lifts: Vec<EdgeLift> = v["lifts"].as_array()?.iter().map(|l| EdgeLift::from_json(l, prec)).collect::<Option<_>>()?;
    if lifts.len() != skel.edges.len() || lifts.iter().zip(&skel.edges).any(|(l, e)| l.edge != *e) {
        return None;
    }
    Some(lifts)
}

impl Topology {
    pub fn compute(curve: &PlaneCurve, ctx: &PrecisionContext, cache: Option<&Path>) -> Result<Topology> {
        let embedded = curve.embed(ctx)?;
        let locus = curve.critical_locus(ctx)?;
        let skeleton = VoronoiSkeleton::build(&locus.finite_points, ctx)?;
        let cached = cache.and_then(|d| read_cache(&cache_file(d, curve, ctx), &skeleton, ctx.prec()));
        let lifts = match cached {
            Some(l) => l,
            None => {
                let fibers = vertex_fibers(&embedded, &skeleton, ctx)?;
                let l = lift_all(&embedded, &skeleton, &fibers, ctx)?;
                if let Some(d) = cache {
                    let doc = json!({ "curve": curve.to_string(), "lifts": l.iter().map(|x| x.to_json()).collect::<Vec<_>>() });
                    fs::create_dir_all(d).map_err(|e| PipelineError::Io(e.to_string()))?;
                    fs::write(cache_file(d, curve, ctx), doc.to_string()).map_err(|e| PipelineError::Io(e.to_string()))?;
                }
                l
            }
        };
        let monodromy = MonodromyRep::compute(&skeleton, &lifts, curve.n)?;
        Ok(Topology { curve: curve.clone(), ctx: *ctx, embedded, locus, skeleton, lifts, monodromy })
    }

    pub fn genus(&self) -> usize {
        self.monodromy.genus().unwrap_or(0)
    }

    pub fn homology(&self) -> Result<Homology> {
        let graph = LiftedGraph::new(&self.skeleton, &self.lifts, self.curve.n)?;
        let cycles = graph.fundamental_cycles();
        let gram = graph.gram(&cycles)?;
        let basis = SymplecticBasis::from_cycles(&cycles, &gram)?;
        Ok(Homology { graph, cycles, gram, basis })
    }

    pub fn monodromy_json(&self) -> Value {
        let gens: Vec<Value> = self
            .monodromy
            .generators
            .iter()
            .map(|(p, perm)| json!({ "puncture": format!("{:?}", p), "permutation": perm, "cycle_type": cycle_type(perm) }))
            .collect();
        json!({
            "sheets": self.monodromy.sheets,
            "base_vertex": self.monodromy.base_vertex,
            "generators": gens,
            "product_relation_exact": self.monodromy.product_relation_exact,
            "ramification": self.monodromy.ramification(),
        })
    }
}

impl Analysis {
    pub fn compute(curve: &PlaneCurve, user_basis: Option<&str>, ctx: &PrecisionContext, cache: Option<&Path>) -> Result<Analysis> {
        let topology = Topology::compute(curve, ctx, cache)?;
        Self::from_topology(topology, user_basis)
    }

    pub fn from_topology(topology: Topology, user_basis: Option<&str>) -> Result<Analysis> {
        let genus = topology.genus();
        let differentials = DifferentialBasis::for_curve(&topology.curve, user_basis)?;
        if differentials.len() != genus {
            return Err(match user_basis {
                None => PipelineError::GenusMismatch { baker: differentials.len(), genus },
                Some(_) => PipelineError::BasisSizeMismatch { given: differentials.len(), genus },
            });
        }
        let mut homology = topology.homology()?;
        let ctx = topology.ctx;
        let diffs = differentials.embed(&topology.curve, &topology.embedded.theta);
        let per = all_edge_periods(&topology.embedded, &diffs, &topology.lifts, &topology.locus.finite_points, &ctx)?;
        let (periods, riemann) = PeriodMatrix::assemble(&mut homology.basis, &per, topology.curve.n, &ctx)?;
        Ok(Analysis { topology, homology, differentials, periods, riemann })
    }

    pub fn genus(&self) -> usize {
        self.homology.basis.genus
    }
}

/// Compute with automatic precision doubling (up to three escalations) on precision-class failures.
pub fn with_escalation<T>(
    bits: u32,
    auto: bool,
    mut f: impl FnMut(&PrecisionContext) -> Result<T>,
) -> std::result::Result<(T, u32), (PipelineError, Vec<String>)> {
    let mut ctx = PrecisionContext::new(bits);
    let mut log = Vec::new();
    for attempt in 0..=3 {
        match f(&ctx) {
            Ok(v) => return Ok((v, ctx.working_bits)),
            Err(e) if auto && attempt < 3 && e.class() == ErrorClass::Precision => {
                log.push(format!("{} bits: {}", ctx.working_bits, e));
                ctx = ctx.doubled();
            }
            Err(e) => {
                log.push(format!("{} bits: {}", ctx.working_bits, e));
                return Err((e, log));
            }
        }
    }
    unreachable!()
}

pub fn complex_json(z: &Complex, digits: usize) -> Value {
    Value::String(z.to_decimal(digits))
}

pub fn matrix_json(m: &crate::numerics::linalg::CMatrix, digits: usize) -> Value {
    Value::Array((0..m.rows).map(|i| Value::Array((0..m.cols).map(|j| complex_json(&m[(i, j)], digits)).collect())).collect())
}

/// Report block for Ω and τ.
pub fn analysis_json(a: &Analysis, with_omega: bool) -> Value {
    let digits = (a.topology.ctx.working_bits as f64 * std::f64::consts::LOG10_2) as usize;
    let mut v = json!({
        "genus": a.genus(),
        "differentials": a.differentials.numerators.iter().map(|h| h.format(&a.topology.curve.field)).collect::<Vec<_>>(),
        "gram_certificate": { "fundamental_cycles": a.homology.cycles.len(), "divisors": vec![1; a.genus()] },
        "tau": matrix_json(&a.riemann.tau, digits),
        "symmetry_defect": a.riemann.symmetry_defect,
        "min_imag_eigenvalue": a.riemann.min_imag_eigenvalue,
        "beta_negated": a.periods.beta_negated,
    });
    if with_omega {
        v["omega"] = matrix_json(&a.periods.omega, digits);
    }
    v
}
