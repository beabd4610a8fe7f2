mod report;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};
use spherepack::complex::parse_radii;
use spherepack::curvature::{
    alpha_curvature, curvature_jacobian, extended_curvature, scalar_curvature, tet_labels,
};
use spherepack::degeneracy::{boundary_for, classify, soddy_radius, SoddyCoefficients};
use spherepack::rigidity::{rigidity_certificate, rigidity_experiment_with, ExperimentConfig};
use spherepack::solver::solve_prescribed;
use spherepack::tetgeom::q_value;
use spherepack::{
    Complex, GeomError, Geometry, PackingError, PackingMetric, PrescribedTarget, SolveOptions,
    TetRadii,
};
use thiserror::Error;

use report::InputDigest;

#[derive(Parser, Debug)]
#[command(name = "spherepack", version, about = "Sphere packing metrics on closed triangulated 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, default_value = "euclidean")]
    geometry: Geometry,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Target document `{"target": [...]}`.
    #[arg(long, global = true)]
    target: Option<PathBuf>,
    /// Initial radii document `{"radii": [...]}`.
    #[arg(long, global = true)]
    init: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    /// Gradient tolerance of the solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a mesh is a closed, connected complex.
    Validate { mesh: PathBuf },
    /// Curvature, α-curvature and the spectrum of Λ.
    Curvature { mesh: PathBuf, radii: PathBuf },
    /// Label every tetrahedron of a metric.
    Admissible { mesh: PathBuf, radii: PathBuf },
    /// Region label of one tetrahedron.
    Classify {
        #[arg(num_args = 4, required = true, value_names = ["R0", "R1", "R2", "R3"])]
        radii: Vec<f64>,
    },
    /// Boundary radius for three given radii.
    Boundary {
        #[arg(num_args = 3, required = true, value_names = ["RJ", "RK", "RL"])]
        radii: Vec<f64>,
    },
    /// Solve for a metric with prescribed (α-)curvature.
    Solve { mesh: PathBuf },
    /// Hessian certificate at a metric.
    Rigidity { mesh: PathBuf, radii: PathBuf },
    /// Recover a sampled ground truth from random starts.
    Experiment { mesh: Option<PathBuf> },
    /// Run the built-in invariant suites.
    Selftest,
}

#[derive(Debug, Error)]
enum Failure {
    /// Exit code 1.
    #[error("{0}")]
    Input(String),
    /// Exit code 2, with a report.
    #[error("{message}")]
    Domain { message: String, detail: Value },
}

impl From<PackingError> for Failure {
    fn from(e: PackingError) -> Self {
        match &e {
            PackingError::LengthMismatch { .. }
            | PackingError::NotClosed(_)
            | PackingError::VertexOutOfRange { .. }
            | PackingError::Geom(GeomError::InvalidRadii(_)) => Failure::Input(e.to_string()),
            _ => Failure::Domain {
                message: e.to_string(),
                detail: Value::Null,
            },
        }
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        PackingError::from(e).into()
    }
}

/// A finished command: the result document and whether it counts as success.
struct Outcome {
    result: Value,
    ok: bool,
}

struct Session<'a> {
    cli: &'a Cli,
    inputs: Vec<InputDigest>,
}

#[derive(Deserialize)]
struct TargetDocument {
    target: Vec<f64>,
}

impl Session<'_> {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest::of_file(path, &bytes));
        String::from_utf8(bytes).map_err(|_| Failure::Input(format!("{} is not UTF-8", path.display())))
    }

    fn mesh(&mut self, path: &Path) -> Result<Complex, Failure> {
        let text = self.read(path)?;
        Complex::parse_mesh(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn radii(&mut self, path: &Path) -> Result<Vec<f64>, Failure> {
        let text = self.read(path)?;
        parse_radii(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn metric(&mut self, c: &Complex, path: &Path) -> Result<PackingMetric, Failure> {
        let radii = self.radii(path)?;
        if radii.len() != c.vertex_count() {
            return Err(Failure::Input(format!(
                "{}: {} radii for {} vertices",
                path.display(),
                radii.len(),
                c.vertex_count()
            )));
        }
        Ok(PackingMetric::new(radii, self.cli.geometry)?)
    }

    fn target(&mut self, c: &Complex) -> Result<Option<PrescribedTarget>, Failure> {
        let Some(path) = self.cli.target.clone() else {
            return Ok(None);
        };
        let text = self.read(&path)?;
        let doc: TargetDocument = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("{}: malformed target document: {e}", path.display())))?;
        if doc.target.len() != c.vertex_count() {
            return Err(Failure::Input(format!(
                "{}: {} target entries for {} vertices",
                path.display(),
                doc.target.len(),
                c.vertex_count()
            )));
        }
        PrescribedTarget::new(doc.target, self.cli.alpha, self.cli.geometry)
            .map(Some)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn run(&mut self) -> Result<Outcome, Failure> {
        let cli = self.cli;
        let g = cli.geometry;
        match &cli.command {
            Command::Validate { mesh } => {
                let c = self.mesh(mesh)?;
                let report = c.validate_closed();
                Ok(Outcome {
                    ok: report.is_closed,
                    result: json!(report),
                })
            }
            Command::Curvature { mesh, radii } => {
                let c = self.mesh(mesh)?;
                let m = self.metric(&c, radii)?;
                let k = match scalar_curvature(&c, &m) {
                    Ok(k) => k,
                    Err(e @ PackingError::InadmissibleTet { .. }) => {
                        let extended = extended_curvature(&c, &m)?;
                        return Err(Failure::Domain {
                            message: e.to_string(),
                            detail: json!({ "K_extended": extended.values }),
                        });
                    }
                    Err(e) => return Err(e.into()),
                };
                let jac = curvature_jacobian(&c, &m)?;
                let mut result = json!({
                    "K": k.values,
                    "alpha": cli.alpha,
                    "eigenvalues": jac.eigenvalues,
                    "kernel_residual": jac.kernel_residual,
                });
                if cli.alpha != 0.0 {
                    result["R_alpha"] = json!(alpha_curvature(&c, &m, cli.alpha)?.values);
                }
                Ok(Outcome { result, ok: true })
            }
            Command::Admissible { mesh, radii } => {
                let c = self.mesh(mesh)?;
                let m = self.metric(&c, radii)?;
                let labels = tet_labels(&c, &m)?;
                let tets: Vec<Value> = c
                    .tetrahedra()
                    .iter()
                    .zip(&labels)
                    .enumerate()
                    .map(|(i, (t, label))| {
                        json!({
                            "index": i,
                            "vertices": t,
                            "label": label,
                            "q": q_value(&m.tet_radii(t), g),
                        })
                    })
                    .collect();
                let admissible = labels.iter().all(|l| *l == spherepack::RegionLabel::Admissible);
                Ok(Outcome {
                    result: json!({ "admissible": admissible, "tetrahedra": tets }),
                    ok: admissible,
                })
            }
            Command::Classify { radii } => {
                let r = TetRadii::new([radii[0], radii[1], radii[2], radii[3]])
                    .map_err(|e| Failure::Input(e.to_string()))?;
                let label = classify(&r, g)?;
                let bounds: Vec<Option<f64>> = (0..4).map(|mu| boundary_for(&r, mu, g).ok()).collect();
                Ok(Outcome {
                    result: json!({
                        "radii": r.get(),
                        "geometry": g,
                        "label": label,
                        "q": q_value(&r, g),
                        "boundary": bounds,
                    }),
                    ok: true,
                })
            }
            Command::Boundary { radii } => {
                let [rj, rk, rl] = [radii[0], radii[1], radii[2]];
                let coefficients = match g {
                    Geometry::Euclidean => SoddyCoefficients::euclidean(rj, rk, rl),
                    Geometry::Hyperbolic => SoddyCoefficients::hyperbolic(rj, rk, rl),
                }
                .map_err(|e| Failure::Input(e.to_string()))?;
                let value = soddy_radius(rj, rk, rl, g)?;
                Ok(Outcome {
                    result: json!({
                        "radii": [rj, rk, rl],
                        "geometry": g,
                        "boundary": value,
                        "branch": coefficients.branch(),
                        "coefficients": coefficients,
                    }),
                    ok: true,
                })
            }
            Command::Solve { mesh } => {
                let c = self.mesh(mesh)?;
                let t = self
                    .target(&c)?
                    .ok_or_else(|| Failure::Input("solve requires --target".into()))?;
                let init = match cli.init.clone() {
                    Some(path) => {
                        let r = self.radii(&path)?;
                        if r.len() != c.vertex_count() {
                            return Err(Failure::Input(format!(
                                "{}: {} radii for {} vertices",
                                path.display(),
                                r.len(),
                                c.vertex_count()
                            )));
                        }
                        r
                    }
                    None => vec![1.0; c.vertex_count()],
                };
                let mut opts = SolveOptions::new(init, &t);
                if let Some(tol) = cli.tol {
                    opts.gradient_tolerance = tol;
                }
                opts.rng_seed = cli.seed.unwrap_or(0);
                let res = solve_prescribed(&c, &t, &opts)?;
                Ok(Outcome {
                    ok: res.converged,
                    result: json!({ "options": opts, "target": t, "solution": res }),
                })
            }
            Command::Rigidity { mesh, radii } => {
                let c = self.mesh(mesh)?;
                let m = self.metric(&c, radii)?;
                let t = match self.target(&c)? {
                    Some(t) => t,
                    None => PrescribedTarget::new(alpha_curvature(&c, &m, cli.alpha)?.values, cli.alpha, g)?,
                };
                let cert = rigidity_certificate(&c, &m, &t)?;
                Ok(Outcome {
                    ok: cert.certified,
                    result: json!({ "radii": m.radii, "target": t, "certificate": cert }),
                })
            }
            Command::Experiment { mesh } => {
                let c = match mesh {
                    Some(path) => self.mesh(path)?,
                    None => {
                        let c = Complex::boundary_4_simplex();
                        self.inputs
                            .push(InputDigest::of_bytes("builtin:boundary_4_simplex", c.to_json().as_bytes()));
                        c
                    }
                };
                let mut cfg = ExperimentConfig::new(cli.trials, cli.seed.unwrap_or(0));
                if let Some(tol) = cli.tol {
                    cfg.gradient_tolerance = tol;
                }
                let report = rigidity_experiment_with(&c, g, cli.alpha, &cfg)?;
                Ok(Outcome {
                    ok: report.passed,
                    result: json!(report),
                })
            }
            Command::Selftest => {
                let suites = selftest::run(cli.seed.unwrap_or(0));
                print!("{}", selftest::table(&suites));
                let ok = suites.iter().all(|s| s.passed());
                Ok(Outcome {
                    result: json!({ "passed": ok, "suites": suites }),
                    ok,
                })
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Curvature { .. } => "curvature",
        Command::Admissible { .. } => "admissible",
        Command::Classify { .. } => "classify",
        Command::Boundary { .. } => "boundary",
        Command::Solve { .. } => "solve",
        Command::Rigidity { .. } => "rigidity",
        Command::Experiment { .. } => "experiment",
        Command::Selftest => "selftest",
    }
}

/// The seed a command actually used, for the report header.
fn seed_used(cli: &Cli) -> Option<u64> {
    match cli.command {
        Command::Solve { .. } | Command::Experiment { .. } | Command::Selftest => Some(cli.seed.unwrap_or(0)),
        _ => cli.seed,
    }
}

fn emit(cli: &Cli, doc: &Value) -> Result<(), String> {
    let text = report::to_string(doc);
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None if matches!(cli.command, Command::Selftest) => Ok(()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let mut session = Session { cli: &cli, inputs: Vec::new() };
    let outcome = session.run();
    let name = command_name(&cli.command);
    let (doc, code) = match outcome {
        Ok(o) => (
            report::document(name, &session.inputs, seed_used(&cli), o.result),
            if o.ok { 0 } else { 2 },
        ),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Domain { message, detail }) => {
            eprintln!("error: {message}");
            let result = json!({ "error": message, "detail": detail });
            (report::document(name, &session.inputs, seed_used(&cli), result), 2)
        }
    };
    if let Err(msg) = emit(&cli, &doc) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
