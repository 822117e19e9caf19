use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::Matrix3;
use serde_json::{json, Value};

use quatorbit::check::{run_criterion, SuiteConfig};
use quatorbit::decompose::{full_decompose, SearchConfig};
use quatorbit::io::{self, LoadedFrame};
use quatorbit::lab::{random_sp_n, rng, GeneratorSpec};
use quatorbit::orbit::{orbit_invariant, same_orbit, same_oriented_two_plane_orbit, sp_n_witness, OrbitInvariant};
use quatorbit::{Error, Space64, Tolerances64};

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Sp(n)-orbit invariants of real subspaces of quaternionic space.
#[derive(Parser)]
#[command(name = "quatorbit", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Rank threshold for Gram-Schmidt and intersections.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_rank: f64,
    /// Snapping threshold for cosines and chain invariants.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_snap: f64,
    /// Threshold for comparing invariants of two subspaces.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_compare: f64,
    /// Isoclinicity threshold on `GGᵀ - σ² Id`.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_iso: f64,
    #[arg(long, global = true, default_value_t = 20240917)]
    seed: u64,
    /// Emit JSON (angles in radians) instead of text (angles in degrees).
    #[arg(long, global = true)]
    json: bool,
    /// Admissible basis as the columns of a rotation, I' J' K', row by row
    /// within each column: `a b g a b g a b g`.
    #[arg(long, global = true, num_args = 9, allow_negative_numbers = true, value_name = "C")]
    basis: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Classification, orbit invariant and angle summary of one subspace.
    Analyze { frame: PathBuf },
    /// Decomposition into quaternionic, complex and totally real parts.
    Decompose { frame: PathBuf },
    /// Whether two subspaces lie in one Sp(n)-orbit.
    SameOrbit {
        a: PathBuf,
        b: PathBuf,
        /// Compare 2-planes as oriented by their stored bases.
        #[arg(long)]
        oriented: bool,
    },
    /// An explicit g ∈ Sp(n) with gA = B.
    Witness { a: PathBuf, b: PathBuf },
    /// Frame JSON for a generator specification.
    Generate {
        /// GeneratorSpec JSON file, or the JSON itself.
        spec: String,
        /// Quaternionic dimension of the ambient space.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Move the result by a random Sp(n) element drawn from --seed.
        #[arg(long)]
        scramble: bool,
    },
    /// Run the acceptance criteria.
    Selftest {
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Fraction of the full sample counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Replace every criterion tolerance, to exercise failure reporting.
        #[arg(long)]
        inject_tol: Option<f64>,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// Outcome of a command: its exit code.
enum Failure {
    Usage(String),
    Health(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Dimension(_) => Failure::Usage(e.to_string()),
            _ => Failure::Health(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    space: Space64,
    tol: Tolerances64,
    json: bool,
    seed: u64,
}

impl Ctx {
    fn new(o: &Options) -> std::result::Result<Self, Failure> {
        for (name, v) in [("tol-rank", o.tol_rank), ("tol-snap", o.tol_snap), ("tol-compare", o.tol_compare), ("tol-iso", o.tol_iso)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("--{name} must be positive")));
            }
        }
        let tol = Tolerances64 {
            rank: o.tol_rank,
            snap: o.tol_snap,
            compare: o.tol_compare,
            iso: o.tol_iso,
            ..Default::default()
        };
        let space = match &o.basis {
            None => Space64::new(1),
            Some(c) => Space64::new(1)
                .with_basis(Matrix3::from_column_slice(c), 1e-9)
                .map_err(|e| Failure::Usage(format!("--basis: {e}")))?,
        };
        Ok(Self { space, tol, json: o.json, seed: o.seed })
    }

    fn space(&self, n: usize) -> Space64 {
        let mut s = self.space.clone();
        s.n = n;
        s
    }

    fn load(&self, path: &PathBuf) -> std::result::Result<LoadedFrame, Failure> {
        let f = io::load_frame(path, self.tol.rank)?;
        if f.dropped > 0 {
            log::warn!("{}: dropped {} dependent columns", path.display(), f.dropped);
        }
        Ok(f)
    }

    fn load_pair(&self, a: &PathBuf, b: &PathBuf) -> std::result::Result<(LoadedFrame, LoadedFrame), Failure> {
        let (fa, fb) = (self.load(a)?, self.load(b)?);
        if fa.n != fb.n {
            return Err(Failure::Usage(format!("ambient dimensions differ: n = {} and n = {}", fa.n, fb.n)));
        }
        Ok((fa, fb))
    }
}

fn deg(x: f64) -> String {
    format!("{:.6}", x.to_degrees())
}

fn degs(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&x| deg(x)).collect::<Vec<_>>().join(", "))
}

fn vec3(v: &[f64]) -> String {
    format!("({:.6}, {:.6}, {:.6})", v[0], v[1], v[2])
}

fn print_json(v: &Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("serializable report"));
}

fn invariant_text(inv: &OrbitInvariant<f64>) -> String {
    match inv {
        OrbitInvariant::TwoPlane { measure } => {
            format!("two-plane, imaginary measure ±{}", vec3(measure.as_slice()))
        }
        OrbitInvariant::Ic4 { angles, xi, chi, eta, delta } => format!(
            "ic4, angles (I, J, K) {} deg, xi {xi:.6}, chi {chi:.6}, eta {eta:.6}, delta {delta:.6}",
            degs(angles)
        ),
        OrbitInvariant::Complex { structure, multiangle } => format!(
            "complex, structure {}, multiangle {} deg",
            vec3(structure.coeffs.as_slice()),
            degs(multiangle)
        ),
        OrbitInvariant::SigmaComplex { parts } => {
            let mut s = format!("sigma-complex, {} parts", parts.len());
            for (st, m) in parts {
                s += &format!("\n  structure {}, multiangle {} deg", vec3(st.coeffs.as_slice()), degs(m));
            }
            s
        }
        OrbitInvariant::Quaternionic { dim } => format!("quaternionic, dim {dim}"),
        OrbitInvariant::Rhps { dim } => format!("real hermitian product subspace, dim {dim}"),
    }
}

fn analyze(ctx: &Ctx, path: &PathBuf) -> Outcome {
    let f = ctx.load(path)?;
    let space = ctx.space(f.n);
    let a = io::analyze(&space, &f.frame, &ctx.tol)?;
    if ctx.json {
        let mut v = io::analysis_json(&a, &ctx.tol);
        v["input_residual"] = json!(f.input_residual);
        v["dropped_columns"] = json!(f.dropped);
        print_json(&v);
    } else {
        out!("dim {} in H^{}, class {}", a.dim, f.n, a.class);
        match &a.invariant {
            Ok(inv) => out!("invariant: {}", invariant_text(inv)),
            Err(e) => out!("invariant: unavailable ({e})"),
        }
        for (name, angles) in ["I", "J", "K"].iter().zip(&a.structure_angles) {
            out!("principal angles U, {name}'U: {} deg", degs(angles));
        }
        if let Some(d) = a.characteristic_deviation {
            out!("characteristic deviation {d:.6}");
        }
        out!("input orthonormality residual {:.3e}", f.input_residual);
    }
    a.invariant.map(|_| ()).map_err(Failure::Health)
}

fn decompose(ctx: &Ctx, path: &PathBuf) -> Outcome {
    let f = ctx.load(path)?;
    let space = ctx.space(f.n);
    let dec = full_decompose(&f.frame, &ctx.tol, &SearchConfig::default())?;
    if ctx.json {
        print_json(&io::decomposition_json(&space, &dec));
    } else {
        out!("U_Q dim {}", dec.quaternionic.dim());
        for s in &dec.sigma {
            let c = space.to_basis_coords(&s.structure);
            out!(
                "complex part: structure {}, dim {}, multiangle {} deg",
                vec3(c.as_slice()),
                s.frame.dim(),
                degs(&s.multiangle())
            );
        }
        out!("U_R dim {}", dec.real.dim());
        out!("orthogonality residual {:.3e}", dec.orthogonality_residual);
        for w in &dec.warnings {
            out!("warning: {w}");
        }
    }
    if dec.orthogonality_residual > ctx.tol.compare {
        return Err(Failure::Health(format!("parts are not orthogonal: {:.3e}", dec.orthogonality_residual)));
    }
    Ok(())
}

fn same(ctx: &Ctx, a: &PathBuf, b: &PathBuf, oriented: bool) -> Outcome {
    let (fa, fb) = ctx.load_pair(a, b)?;
    let space = ctx.space(fa.n);
    let verdict = if oriented {
        same_oriented_two_plane_orbit(&space, &fa.frame, &fb.frame, &ctx.tol)?
    } else {
        same_orbit(&space, &fa.frame, &fb.frame, &ctx.tol)?
    };
    if ctx.json {
        let inv = |f: &LoadedFrame| {
            orbit_invariant(&space, &f.frame, &ctx.tol).map(|i| io::invariant_json(&i, &ctx.tol)).unwrap_or(Value::Null)
        };
        print_json(&json!({ "same_orbit": verdict, "a": inv(&fa), "b": inv(&fb) }));
    } else {
        out!("{}", if verdict { "same orbit" } else { "different orbits" });
    }
    Ok(())
}

fn witness(ctx: &Ctx, a: &PathBuf, b: &PathBuf) -> Outcome {
    let (fa, fb) = ctx.load_pair(a, b)?;
    let space = ctx.space(fa.n);
    let w = sp_n_witness(&space, &fa.frame, &fb.frame, &ctx.tol)?
        .ok_or_else(|| Failure::Health("constructed map failed verification".into()))?;
    if ctx.json {
        print_json(&io::witness_json(&w));
    } else {
        out!("g ∈ Sp({}), {}×{}:", fa.n, w.matrix.nrows(), w.matrix.ncols());
        for r in w.matrix.row_iter() {
            out!("{}", r.iter().map(|x| format!("{x:>10.6}")).collect::<Vec<_>>().join(" "));
        }
        out!("max principal angle between gA and B {} deg", deg(w.max_principal_angle));
        out!(
            "commutator norms {:.3e} {:.3e} {:.3e}, orthogonality residual {:.3e}",
            w.commutator_norms[0], w.commutator_norms[1], w.commutator_norms[2], w.orthogonality_residual
        );
    }
    Ok(())
}

fn generate(ctx: &Ctx, spec: &str, n: usize, scramble: bool) -> Outcome {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?
    };
    let spec: GeneratorSpec = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("generator spec: {e}")))?;
    if n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let space = ctx.space(n);
    let mut u = spec.generate(&space).map_err(|e| Failure::Usage(e.to_string()))?;
    if scramble {
        let g = random_sp_n(&mut rng(ctx.seed, 0), n);
        u = u.transform(&g, ctx.tol.rank);
    }
    print_json(&serde_json::to_value(io::frame_file(n, &u)).expect("serializable frame"));
    Ok(())
}

fn selftest(ctx: &Ctx, n: usize, scale: f64, inject: Option<f64>, only: &[u8]) -> Outcome {
    if n < 4 {
        return Err(Failure::Usage("selftest needs n ≥ 4".into()));
    }
    if !(scale > 0.0) {
        return Err(Failure::Usage("--scale must be positive".into()));
    }
    let cfg = SuiteConfig { n, seed: ctx.seed, scale, tol_override: inject };
    let ids: Vec<u8> = if only.is_empty() { (1..=12).collect() } else { only.to_vec() };
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &cfg).ok_or_else(|| Failure::Usage(format!("no criterion {id}")))?;
        if !ctx.json {
            out!("{r}");
        }
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if ctx.json {
        let rows: Vec<Value> = results
            .iter()
            .map(|r| {
                json!({
                    "id": r.id, "name": r.name, "passed": r.passed, "worst": r.worst,
                    "tolerance": r.tolerance, "samples": r.samples, "detail": r.detail,
                })
            })
            .collect();
        print_json(&json!({ "n": n, "seed": ctx.seed, "criteria": rows, "failed": failed }));
    } else {
        out!("{} passed, {} failed", results.len() - failed, failed);
    }
    if failed > 0 {
        return Err(Failure::Health(format!("{failed} criteria failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = || -> Outcome {
        let ctx = Ctx::new(&cli.opts)?;
        match &cli.command {
            Command::Analyze { frame } => analyze(&ctx, frame),
            Command::Decompose { frame } => decompose(&ctx, frame),
            Command::SameOrbit { a, b, oriented } => same(&ctx, a, b, *oriented),
            Command::Witness { a, b } => witness(&ctx, a, b),
            Command::Generate { spec, n, scramble } => generate(&ctx, spec, *n, *scramble),
            Command::Selftest { n, scale, inject_tol, only } => selftest(&ctx, *n, *scale, *inject_tol, only),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Health(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
