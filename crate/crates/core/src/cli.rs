//! The `crtool` command line: argument parsing, dispatch and report emission.

use std::path::Path;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::corpus;
use crate::dsl::{parse_manifold, print_manifold};
use crate::error::{CrError, Result};
use crate::exactalg::GQ;
use crate::finitetype::{hormander, DEFAULT_LENGTH_MAX};
use crate::geometry::{ambient_vars, classify_point, ManifoldSpec};
use crate::homogeneous::{
    check_homogeneous, level_types, degenerate_selfmap, find_selfmap, real_witness, scale_model, vanishing_coordinate,
    Degeneracy, SelfMap, Witness, DEFAULT_EXP_ORDER, DEFAULT_WITNESS_DEGREE,
};
use crate::mapcheck::{algebraic_dependence, leaf_chart, map_rank, verify_map, LeafFunction, MapSpec};
use crate::nondegen::{
    degeneracy_witness, essentially_finite, nondeg_report, NondegReport, DEFAULT_ALPHA_BOUND, DEFAULT_DEGREE_BOUND,
    DEFAULT_TRIALS,
};
use crate::normalform::{solve_normal, verify_normal, NormalModel};
use crate::segre::{implicitize, segre_dims, SegreChain};

pub const DEFAULT_ORDER: u32 = 8;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "crtool", version, about = "Invariants of real algebraic CR submanifolds, computed exactly")]
pub struct Cli {
    /// Series truncation order (default 8; 10 for exponential maps).
    #[arg(long, global = true)]
    pub order: Option<u32>,
    /// Seed for all random sampling.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pointwise classification (on set, regular, CR, generic, CR dimension).
    Classify {
        manifold: String,
        /// Comma-separated Gaussian rationals; defaults to the declared point.
        #[arg(long)]
        point: Option<String>,
    },
    /// Segre set dimensions and minimality.
    Segre {
        manifold: String,
        /// Also eliminate parameters to get equations of the maximal Segre set.
        #[arg(long)]
        implicitize: bool,
    },
    /// Hörmander numbers from iterated brackets.
    Hormander {
        manifold: String,
        #[arg(long, default_value_t = DEFAULT_LENGTH_MAX)]
        length_max: u32,
    },
    /// Levi number, k-nondegeneracy, essential finiteness and degeneracy witness.
    Nondegen {
        manifold: String,
        #[arg(long, default_value_t = DEFAULT_DEGREE_BOUND)]
        deg_bound: u32,
        #[arg(long, default_value_t = DEFAULT_ALPHA_BOUND)]
        alpha_bound: u32,
    },
    /// Essential finiteness at the point.
    Essfinite {
        manifold: String,
        #[arg(long, default_value_t = DEFAULT_ALPHA_BOUND)]
        alpha_bound: u32,
    },
    /// A holomorphic polynomial real on the set, or minimality.
    Witness {
        manifold: String,
        #[arg(long, default_value_t = DEFAULT_WITNESS_DEGREE)]
        deg_bound: u32,
    },
    /// A nonalgebraic self-map, verified tangent.
    Selfmap { manifold: String },
    /// Verify that a map sends the manifold into a target.
    CheckMap {
        manifold: String,
        #[arg(long)]
        map: String,
        /// Target manifold; defaults to the source.
        #[arg(long)]
        target: Option<String>,
    },
    /// Bounded search for a polynomial relation satisfied by one map component.
    Depend {
        manifold: String,
        #[arg(long)]
        map: String,
        /// Component index, from 1.
        #[arg(long)]
        component: usize,
        #[arg(long, default_value_t = 2)]
        deg_x: u32,
        #[arg(long, default_value_t = 2)]
        deg_u: u32,
        /// Restrict to the leaf `coordinate = value`, e.g. `w3=1/2`.
        #[arg(long)]
        leaf: Option<String>,
    },
    /// The full battery.
    Report { manifold: String },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run with the given arguments (the first being the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let json_mode = cli.json;
    match execute(&cli) {
        Ok((code, report)) => Outcome { code, stdout: render(&report, json_mode), stderr: String::new() },
        Err(e) => {
            let err = json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } });
            let text = if json_mode { format!("{}\n", serde_json::to_string_pretty(&err).unwrap()) } else { format!("error: {}\n", e) };
            if json_mode {
                Outcome { code: 2, stdout: text, stderr: String::new() }
            } else {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            }
        }
    }
}

fn error_kind(e: &CrError) -> &'static str {
    match e {
        CrError::Parse { .. } => "parse",
        CrError::Reality { .. } => "reality",
        CrError::NotOnSet | CrError::PointNotOnSet => "not_on_set",
        CrError::NotCr => "not_cr",
        CrError::ImplicitSolve(_) => "implicit_solve",
        CrError::NotHomogeneous(_) => "not_homogeneous",
        CrError::RemainderWeight(_) => "remainder_weight",
        CrError::AnsatzInsufficient(_) => "ansatz_insufficient",
        CrError::NotTangent(_) => "not_tangent",
        CrError::NotIndependent => "not_independent",
        _ => "invalid",
    }
}

fn render(report: &Value, json_mode: bool) -> String {
    if json_mode {
        return format!("{}\n", serde_json::to_string_pretty(report).unwrap());
    }
    let mut out = String::new();
    if let Some(Value::Object(res)) = report.get("results") {
        for (k, v) in res {
            out.push_str(&format!("{}: {}\n", k, text_value(v)));
        }
    }
    if let Some(Value::Array(flags)) = report.get("flags") {
        if !flags.is_empty() {
            out.push_str(&format!("flags: {}\n", text_value(&Value::Array(flags.clone()))));
        }
    }
    out
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Load a manifold from a file, falling back to a bundled example of the same stem.
pub fn load_manifold(arg: &str) -> Result<(ManifoldSpec, String)> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CrError::Invalid(format!("cannot read {}: {}", arg, e)))?;
        return Ok((parse_manifold(&text)?, arg.to_string()));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    match corpus::manifold_text(stem) {
        Some(t) => Ok((parse_manifold(t)?, format!("bundled:{}", stem))),
        None => Err(CrError::Invalid(format!("no such file or bundled manifold: {}", arg))),
    }
}

fn load_map(arg: &str, source: &[String]) -> Result<(MapSpec, String)> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CrError::Invalid(format!("cannot read {}: {}", arg, e)))?;
        return Ok((MapSpec::parse(&text, source)?, arg.to_string()));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    match corpus::map_text(stem) {
        Some(t) => Ok((MapSpec::parse(t, source)?, format!("bundled:{}", stem))),
        None => Err(CrError::Invalid(format!("no such file or bundled map: {}", arg))),
    }
}

fn parse_point(text: &str, n: usize) -> Result<Vec<GQ>> {
    let p: Vec<GQ> = text
        .split(',')
        .map(|s| s.trim().parse::<GQ>().map_err(|e| CrError::Parse { line: 1, col: 1, msg: e }))
        .collect::<Result<_>>()?;
    if p.len() != n {
        return Err(CrError::Invalid(format!("point has {} coordinates, expected {}", p.len(), n)));
    }
    Ok(p)
}

fn manifold_arg(c: &Command) -> &str {
    match c {
        Command::Classify { manifold, .. }
        | Command::Segre { manifold, .. }
        | Command::Hormander { manifold, .. }
        | Command::Nondegen { manifold, .. }
        | Command::Essfinite { manifold, .. }
        | Command::Witness { manifold, .. }
        | Command::Selfmap { manifold }
        | Command::CheckMap { manifold, .. }
        | Command::Depend { manifold, .. }
        | Command::Report { manifold } => manifold,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify { .. } => "classify",
        Command::Segre { .. } => "segre",
        Command::Hormander { .. } => "hormander",
        Command::Nondegen { .. } => "nondegen",
        Command::Essfinite { .. } => "essfinite",
        Command::Witness { .. } => "witness",
        Command::Selfmap { .. } => "selfmap",
        Command::CheckMap { .. } => "check-map",
        Command::Depend { .. } => "depend",
        Command::Report { .. } => "report",
    }
}

struct Ctx {
    spec: ManifoldSpec,
    point: Vec<GQ>,
    order: u32,
    seed: u64,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn model(&self) -> Result<NormalModel> {
        solve_normal(&self.spec, &self.point, self.order)
    }
}

fn execute(cli: &Cli) -> Result<(i32, Value)> {
    let (spec, source) = load_manifold(manifold_arg(&cli.command))?;
    let exp_command = matches!(cli.command, Command::Selfmap { .. } | Command::CheckMap { .. });
    let order = cli.order.unwrap_or(if exp_command { DEFAULT_EXP_ORDER } else { DEFAULT_ORDER });
    if order < 2 {
        return Err(CrError::OrderTooSmall);
    }
    let point = match &cli.command {
        Command::Classify { point: Some(p), .. } => parse_point(p, spec.dim())?,
        _ => spec.basepoint_or_origin(),
    };
    let ctx = Ctx { spec, point, order, seed: cli.seed };
    let mut inputs = json!({
        "manifold": ctx.spec.name,
        "source": source,
        "coordinates": ctx.spec.coords,
        "point": ctx.point,
    });
    let mut bounds = json!({ "order": order, "seed": cli.seed });
    let mut flags: Vec<String> = Vec::new();
    let mut code = 0;
    let results = match &cli.command {
        Command::Classify { .. } => serde_json::to_value(classify_point(&ctx.spec, &ctx.point, order.min(4))?).unwrap(),
        Command::Segre { implicitize: imp, .. } => {
            let m = ctx.model()?;
            let chain = segre_dims(&m, &mut ctx.rng());
            let mut v = chain_json(&chain);
            if chain.order.is_some() {
                flags.push("truncated-model".into());
            }
            if *imp {
                v["implicit"] = serde_json::to_value(implicitize(&m, chain.j0)?).unwrap();
            }
            v
        }
        Command::Hormander { length_max, .. } => {
            bounds["length_max"] = json!(length_max);
            let m = ctx.model()?;
            serde_json::to_value(hormander(&m, *length_max)?).unwrap()
        }
        Command::Nondegen { deg_bound, alpha_bound, .. } => {
            bounds["deg_bound"] = json!(deg_bound);
            bounds["alpha_bound"] = json!(alpha_bound);
            bounds["trials"] = json!(DEFAULT_TRIALS);
            let m = ctx.model()?;
            nondeg_json(&nondeg_report(&m, *deg_bound, *alpha_bound, DEFAULT_TRIALS, &mut ctx.rng()))
        }
        Command::Essfinite { alpha_bound, .. } => {
            bounds["alpha_bound"] = json!(alpha_bound);
            let m = ctx.model()?;
            serde_json::to_value(essentially_finite(&m, *alpha_bound)).unwrap()
        }
        Command::Witness { deg_bound, .. } => {
            bounds["deg_bound"] = json!(deg_bound);
            match real_witness(&ctx.spec, &ctx.point, *deg_bound, order, &mut ctx.rng()) {
                Ok(w) => serde_json::to_value(w).unwrap(),
                Err(CrError::AnsatzInsufficient(d)) => {
                    code = 1;
                    flags.push("analysis-negative".into());
                    json!({ "status": "ansatz_insufficient", "searched_degree": d })
                }
                Err(e) => return Err(e),
            }
        }
        Command::Selfmap { .. } => match selfmap(&ctx)? {
            Some(m) => {
                if m.nonalgebraic {
                    flags.push("nonalgebraic".into());
                }
                if !(m.check.ok && m.jacobian_invertible) {
                    code = 1;
                    flags.push("analysis-negative".into());
                }
                serde_json::to_value(m).unwrap()
            }
            None => {
                code = 1;
                flags.push("analysis-negative".into());
                json!({ "status": "none" })
            }
        },
        Command::CheckMap { map, target, .. } => {
            let (h, msrc) = load_map(map, &ctx.spec.coords)?;
            let (tgt, tsrc) = match target {
                Some(t) => load_manifold(t)?,
                None => (ctx.spec.clone(), source.clone()),
            };
            inputs["map"] = json!(msrc);
            inputs["target"] = json!(tsrc);
            let check = verify_map(&h, &ctx.spec, &tgt, &ctx.point, order)?;
            if h.nonalgebraic {
                flags.push("nonalgebraic".into());
            }
            if !check.ok {
                code = 1;
                flags.push("analysis-negative".into());
            }
            let mut v = serde_json::to_value(&check).unwrap();
            if h.target_dim() == h.source.len() {
                v["map_rank"] = json!(map_rank(&h, &ctx.point, order, &mut ctx.rng())?);
            }
            v
        }
        Command::Depend { map, component, deg_x, deg_u, leaf, .. } => {
            let (h, msrc) = load_map(map, &ctx.spec.coords)?;
            inputs["map"] = json!(msrc);
            bounds["deg_x"] = json!(deg_x);
            bounds["deg_u"] = json!(deg_u);
            if *component == 0 || *component > h.target_dim() {
                return Err(CrError::Invalid(format!("component must be between 1 and {}", h.target_dim())));
            }
            let (series, vars) = match leaf {
                None => (h.expand_at(&ctx.point, order)?, ctx.spec.coords.clone()),
                Some(l) => {
                    inputs["leaf"] = json!(l);
                    let (coord, value) = l
                        .split_once('=')
                        .ok_or_else(|| CrError::Invalid("leaf must look like coordinate=value".into()))?;
                    let k = ctx
                        .spec
                        .coords
                        .iter()
                        .position(|c| c == coord.trim())
                        .ok_or_else(|| CrError::Invalid(format!("unknown coordinate {}", coord)))?;
                    let c: GQ = value.trim().parse().map_err(|e| CrError::Parse { line: 1, col: 1, msg: e })?;
                    let mut center = ctx.point.clone();
                    center[k] = c.clone();
                    let av = ambient_vars(&ctx.spec.coords);
                    let f = LeafFunction::poly(crate::exactalg::Poly::var(&av, &ctx.spec.coords[k]));
                    let chart = leaf_chart(&ctx.spec, &[f], &[c], &center, order)?;
                    (chart.restrict(&h)?, chart.params.clone())
                }
            };
            match algebraic_dependence(&series[component - 1], &vars, *deg_u, *deg_x, order) {
                Some(cert) => serde_json::to_value(cert).unwrap(),
                None => json!({ "certificate": null, "meaning": "no relation within the bounds and order" }),
            }
        }
        Command::Report { .. } => report(&ctx, &mut bounds, &mut flags),
    };
    if ctx.spec.weights.is_some() {
        inputs["weights"] = json!(ctx.spec.weights.as_ref().unwrap().weights);
    }
    Ok((
        code,
        json!({
            "command": command_name(&cli.command),
            "inputs": inputs,
            "bounds": bounds,
            "results": results,
            "flags": flags,
        }),
    ))
}

fn chain_json(c: &SegreChain) -> Value {
    json!({
        "dims": c.dims,
        "j0": c.j0,
        "orbit_dim": c.orbit_dim,
        "minimal": c.minimal(),
        "levels": c.levels.iter().map(|l| json!({ "j": l.j, "dim": l.dim, "parameters": l.params })).collect::<Vec<_>>(),
        "truncation_order": c.order,
    })
}

fn nondeg_json(r: &NondegReport) -> Value {
    json!({
        "k_nondegenerate_at_point": r.k_order,
        "levi_number": r.levi_number,
        "essentially_finite": r.essentially_finite,
        "witness": r.witness.as_ref().map(|w| w.to_string()),
    })
}

/// Self-map search: a set inside a coordinate hyperplane, then twists built from a real
/// witness, then the flow of `exp(Z_N)·X` for a tangent degeneracy witness `X`.
fn selfmap(ctx: &Ctx) -> Result<Option<SelfMap>> {
    let (spec, p, order) = (&ctx.spec, &ctx.point, ctx.order);
    if let Some(k) = vanishing_coordinate(spec, p, order)? {
        return Ok(Some(degenerate_selfmap(spec, p, &Degeneracy::Hyperplane(k), order)?));
    }
    if let Witness::Found { poly, .. } = real_witness(spec, p, DEFAULT_WITNESS_DEGREE, DEFAULT_ORDER, &mut ctx.rng())
        .unwrap_or(Witness::Minimal)
    {
        if let Some(m) = find_selfmap(spec, p, &poly, order)? {
            return Ok(Some(m));
        }
    }
    let m = solve_normal(spec, p, DEFAULT_ORDER)?;
    if let Some(x) = degeneracy_witness(&m, DEFAULT_DEGREE_BOUND, DEFAULT_ALPHA_BOUND) {
        if x.names.iter().all(|v| spec.coords.contains(v)) {
            let last = spec.coords.last().unwrap().clone();
            let f = crate::dsl::Expr::Exp(Box::new(crate::dsl::Expr::var(&last)));
            let how = Degeneracy::Field { names: x.names.clone(), coeffs: x.coeffs.clone(), f };
            match degenerate_selfmap(spec, p, &how, order) {
                Ok(s) => return Ok(Some(s)),
                Err(CrError::NotTangent(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(None)
}

fn attempt<F: FnOnce() -> Result<Value>>(f: F) -> Value {
    f().unwrap_or_else(|e| json!({ "error": e.to_string() }))
}

fn report(ctx: &Ctx, bounds: &mut Value, flags: &mut Vec<String>) -> Value {
    bounds["length_max"] = json!(DEFAULT_LENGTH_MAX);
    bounds["deg_bound"] = json!(DEFAULT_DEGREE_BOUND);
    bounds["alpha_bound"] = json!(DEFAULT_ALPHA_BOUND);
    bounds["exp_order"] = json!(DEFAULT_EXP_ORDER);
    let mut out = serde_json::Map::new();
    out.insert("manifold".into(), json!(print_manifold(&ctx.spec)));
    out.insert("classify".into(), attempt(|| Ok(serde_json::to_value(classify_point(&ctx.spec, &ctx.point, ctx.order.min(4))?).unwrap())));
    let model = ctx.model();
    match &model {
        Err(e) => {
            out.insert("normal_form".into(), json!({ "error": e.to_string() }));
        }
        Ok(m) => {
            let nc = verify_normal(m);
            out.insert(
                "normal_form".into(),
                json!({
                    "z": m.z, "w": m.w,
                    "q": m.q.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                    "exact": m.is_exact(),
                    "check": nc,
                    "frame": m.frame,
                }),
            );
            if !m.is_exact() {
                flags.push("truncated-model".into());
            }
            let chain = segre_dims(m, &mut ctx.rng());
            out.insert("segre".into(), chain_json(&chain));
            let tr = hormander(m, DEFAULT_LENGTH_MAX);
            out.insert("hormander".into(), attempt(|| Ok(serde_json::to_value(tr.clone()?).unwrap())));
            if let Ok(t) = &tr {
                // intrinsic complexification dimension two ways
                let r = t.r;
                out.insert(
                    "orbit_consistency".into(),
                    json!({ "segre_orbit_dim": chain.orbit_dim, "n_plus_r": m.n() + r, "consistent": chain.orbit_dim == m.n() + r }),
                );
            }
            let nd = nondeg_report(m, DEFAULT_DEGREE_BOUND, DEFAULT_ALPHA_BOUND, DEFAULT_TRIALS, &mut ctx.rng());
            out.insert("nondegeneracy".into(), nondeg_json(&nd));
            if let Some(w) = &ctx.spec.weights {
                out.insert(
                    "homogeneous".into(),
                    attempt(|| {
                        let s = scale_model(m, w)?;
                        let exact = check_homogeneous(m, w).is_ok();
                        let cond = level_types(&s.model, DEFAULT_LENGTH_MAX)?;
                        Ok(json!({
                            "homogeneous_as_given": exact,
                            "r": s.model.r,
                            "degrees": s.model.degrees,
                            "scaled_model": s.model.base.q.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                            "scaling": s.substitution,
                            "level_types": cond.iter().map(|(j, v)| json!({ "level": j, "verdict": v })).collect::<Vec<_>>(),
                        }))
                    }),
                );
            }
        }
    }
    out.insert(
        "witness".into(),
        match real_witness(&ctx.spec, &ctx.point, DEFAULT_WITNESS_DEGREE, ctx.order, &mut ctx.rng()) {
            Ok(w) => serde_json::to_value(w).unwrap(),
            Err(CrError::AnsatzInsufficient(d)) => json!({ "status": "ansatz_insufficient", "searched_degree": d }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    );
    let sctx = Ctx { spec: ctx.spec.clone(), point: ctx.point.clone(), order: DEFAULT_EXP_ORDER, seed: ctx.seed };
    out.insert(
        "selfmap".into(),
        match selfmap(&sctx) {
            Ok(Some(m)) => {
                if m.nonalgebraic {
                    flags.push("nonalgebraic-selfmap".into());
                }
                serde_json::to_value(m).unwrap()
            }
            Ok(None) => json!({ "status": "none" }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    );
    Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        let mut v = vec!["crtool"];
        v.extend_from_slice(args);
        run(v)
    }

    #[test]
    fn segre_of_bundled_ex223() {
        let o = run_args(&["segre", "ex223", "--json"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["command"], "segre");
        assert_eq!(v["results"]["dims"], json!([0, 1, 2, 3, 3]));
        assert_eq!(v["results"]["j0"], 3);
        assert_eq!(v["results"]["minimal"], true);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["segre"]).code, 2);
        assert_eq!(run_args(&["frobnicate", "ex223"]).code, 2);
        let o = run_args(&["segre", "no_such_manifold", "--json"]);
        assert_eq!(o.code, 2);
        assert!(o.stdout.contains("\"error\""));
    }

    #[test]
    fn failing_map_exits_one() {
        let dir = std::env::temp_dir().join(format!("crtool-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("double.map");
        std::fs::write(&f, "2*z\nw\n").unwrap();
        let o = run_args(&["check-map", "lewy", "--map", f.to_str().unwrap(), "--order", "4"]);
        assert_eq!(o.code, 1, "{}", o.stdout);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn classify_at_explicit_point() {
        let o = run_args(&["classify", "ex35", "--point", "0, 0, 0, 0", "--json"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["results"]["cr"], false);
    }
}
