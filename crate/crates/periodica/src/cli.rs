//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::abelian::{automorphism_group, decompose, degree_bound, endomorphism_structure, fixed_degree_maps, homomorphisms, Jacobian};
use crate::pipeline::{analysis_json, load_curve, load_text, matrix_json, with_escalation, Analysis, ErrorClass, PipelineError, Topology};

#[derive(Parser, Debug)]
#[command(name = "periodica", version, about = "Period matrices of plane curves and maps between their Jacobians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 100)]
    pub prec: u32,
    /// File (or inline text) with numerators of a basis of regular differentials, one per line.
    #[arg(long, global = true)]
    pub differentials: Option<String>,
    /// Numerators for the second curve of hom/isom.
    #[arg(long, global = true)]
    pub differentials2: Option<String>,
    /// Directory for cached path lifts.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Double the precision (up to three times) on precision failures.
    #[arg(long, global = true)]
    pub auto_prec: bool,
    /// Worker threads for path lifting and integration.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Include the skeleton in the report.
    #[arg(long, global = true)]
    pub dump_skeleton: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Genus from the branch locus and monodromy.
    Genus { curve: String },
    /// Branch points with their local monodromy permutations.
    Monodromy { curve: String },
    /// Symplectic basis of first homology.
    Homology { curve: String },
    /// Big period matrix in the symplectic basis.
    Periods { curve: String },
    /// Small period matrix with its symmetry and positivity checks.
    Riemann { curve: String },
    /// Endomorphism ring: basis, structure constants, symmetric idempotents.
    Endo { curve: String },
    /// Homomorphisms from the Jacobian of the first curve to that of the second.
    Hom { curve: String, curve2: String },
    /// Symplectic isomorphisms, or with --degree d the maps with RᵀE₂R = d·E₁.
    Isom {
        curve: String,
        curve2: String,
        #[arg(long, default_value_t = 1)]
        degree: i64,
    },
    /// Symplectic automorphism group.
    Aut { curve: String },
    /// Isogeny decomposition from primitive symmetric idempotents.
    Decompose { curve: String },
}

impl Command {
    fn curves(&self) -> Vec<&str> {
        match self {
            Command::Genus { curve }
            | Command::Monodromy { curve }
            | Command::Homology { curve }
            | Command::Periods { curve }
            | Command::Riemann { curve }
            | Command::Endo { curve }
            | Command::Aut { curve }
            | Command::Decompose { curve } => vec![curve],
            Command::Hom { curve, curve2 } | Command::Isom { curve, curve2, .. } => vec![curve, curve2],
        }
    }
}

/// Seed for the idempotent search; fixed so reports are reproducible.
const IDEMPOTENT_SEED: u64 = 0x5eed;

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (code, report) = run(&cli);
    let text = serde_json::to_string_pretty(&report).unwrap();
    match &cli.json {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text + "\n") {
                eprintln!("cannot write {}: {}", p.display(), e);
                return ExitCode::from(2);
            }
        }
        None => println!("{}", text),
    }
    ExitCode::from(code)
}

pub fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Parse => 2,
        ErrorClass::Precision => 3,
        ErrorClass::Internal => 4,
    }
}

/// Run a command and return the exit code with its report.
pub fn run(cli: &Cli) -> (u8, Value) {
    let start = Instant::now();
    let mut report = json!({ "schema": "periodica/1", "command": format!("{:?}", cli.command).split_whitespace().next().unwrap_or("").to_lowercase() });
    match execute(cli) {
        Ok((payload, bits)) => {
            report["precision_bits"] = json!(bits);
            if let (Value::Object(r), Value::Object(p)) = (&mut report, payload) {
                r.extend(p);
            }
            let _ = start;
            (0, report)
        }
        Err((e, log)) => {
            eprintln!("error: {}", e);
            if !e.hint().is_empty() {
                eprintln!("hint: {}", e.hint());
            }
            report["error"] = json!({ "message": e.to_string(), "class": format!("{:?}", e.class()), "hint": e.hint(), "attempts": log });
            (exit_code(e.class()), report)
        }
    }
}

fn execute(cli: &Cli) -> Result<(Value, u32), (PipelineError, Vec<String>)> {
    let curves = cli.command.curves().iter().map(|c| load_curve(c)).collect::<Result<Vec<_>, _>>().map_err(|e| (e, vec![]))?;
    let diffs = [&cli.differentials, &cli.differentials2]
        .iter()
        .map(|d| d.as_deref().map(load_text).transpose())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| (e, vec![]))?;
    let cache = cli.cache.as_deref();
    let cmd = cli.command.clone();
    with_escalation(cli.prec, cli.auto_prec, |ctx| {
        let curve = &curves[0];
        let topo = Topology::compute(curve, ctx, cache)?;
        let mut out = json!({ "curve": curve.to_string(), "genus": topo.genus(), "monodromy": topo.monodromy_json() });
        if cli.dump_skeleton {
            out["skeleton"] = topo.skeleton.to_json();
        }
        match cmd {
            Command::Genus { .. } | Command::Monodromy { .. } => {}
            Command::Homology { .. } => {
                let h = topo.homology()?;
                out["homology"] = json!({ "cycles": h.cycles.len(), "gram_rank": h.basis.cycle_count, "genus": h.basis.genus });
            }
            Command::Periods { .. } | Command::Riemann { .. } => {
                let a = Analysis::from_topology(topo, diffs[0].as_deref())?;
                out["periods"] = analysis_json(&a, matches!(cmd, Command::Periods { .. }));
            }
            _ => {
                let a = Analysis::from_topology(topo, diffs[0].as_deref())?;
                let digits = (ctx.working_bits as f64 * std::f64::consts::LOG10_2) as usize;
                let j = Jacobian::new(&a.periods, &a.riemann, ctx);
                out["periods"] = analysis_json(&a, false);
                let second = match &cmd {
                    Command::Hom { .. } | Command::Isom { .. } => {
                        let b = Analysis::compute(&curves[1], diffs[1].as_deref(), ctx, cache)?;
                        out["curve2"] = json!(curves[1].to_string());
                        out["periods2"] = analysis_json(&b, false);
                        Some(Jacobian::new(&b.periods, &b.riemann, ctx))
                    }
                    _ => None,
                };
                let target = second.as_ref().unwrap_or(&j);
                let hom = homomorphisms(&j, target)?;
                match &cmd {
                    Command::Hom { .. } => {
                        out["hom"] = hom.to_json(digits);
                        out["hom"]["image_rank"] = json!(hom.image_rank());
                    }
                    Command::Isom { degree, .. } => {
                        let set = fixed_degree_maps(&j, target, &hom, *degree)?;
                        out["maps"] = set.to_json(digits, true);
                        if let Some(b) = degree_bound(j.genus, target.genus) {
                            out["maps"]["curve_degree_bound"] = json!(b.to_string());
                        }
                    }
                    Command::Aut { .. } => {
                        let set = automorphism_group(&j, &hom)?;
                        out["automorphisms"] = set.to_json(digits, true);
                    }
                    Command::Endo { .. } | Command::Decompose { .. } => {
                        let end = endomorphism_structure(hom.clone(), IDEMPOTENT_SEED)?;
                        out["endomorphisms"] = hom.to_json(digits);
                        out["structure"] = end.to_json();
                        if matches!(cmd, Command::Decompose { .. }) {
                            out["factors"] = Value::Array(
                                decompose(&j, &end)
                                    .iter()
                                    .map(|f| {
                                        json!({
                                            "dimension": f.dimension,
                                            "isogeny_class": f.isogeny_class,
                                            "lattice": f.lattice,
                                            "periods": matrix_json(&f.periods, digits),
                                            "field": if f.field.is_empty() { json!(["Q"]) } else { json!(f.field) },
                                        })
                                    })
                                    .collect(),
                            );
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        Ok(out)
    })
}
