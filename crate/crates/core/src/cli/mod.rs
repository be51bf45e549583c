//! Command-line front end: config ingestion, dispatch and report emission.

mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::MetricConfig;
pub use report::{canonical, config_hash, curve_csv, fmt_f64, render, table_csv, to_value, Sink};

use crate::causality::{hhat_from_metric, violation_certificate, CausalityParams, Profile};
use crate::error::{Error, Result};
use crate::expr::{parse, Expression};
use crate::geodesics::{classify_h, classify_pp, integrate_geodesic, transversal_integrability, GeodesicState, IntegratorOptions};
use crate::harmonic::{
    box_samples, build_lemma_curve, find_theta_r, mean_value_defect, quadratic_fit, superquadratic_witnesses,
    verify_curve_properties,
};
use crate::normalize::{normalize_unchecked, symbolic_harmonic_defect, to_pp_wave, PpWaveForm};
use crate::tensor::{is_ricci_flat, sup_norm, BrinkmannMetric, Connection, DomainBox, GridSpec, Point, Tolerances};

#[derive(Debug, Parser)]
#[command(name = "brinkmann", version, about = "Brinkmann spacetime toolkit", allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric components, Christoffel symbols and Ricci tensor at points.
    Curvature(CurvatureArgs),
    /// Reduce a Ricci-flat metric to pp-wave form.
    Normalize(NormalizeArgs),
    /// Plane wave / Cahen–Wallach / general pp-wave classification.
    Classify(ClassifyArgs),
    /// Tools for planar harmonic functions.
    #[command(subcommand)]
    Harmonic(HarmonicCommand),
    /// Build a strong-causality violation certificate.
    Causality(CausalityArgs),
    /// Integrate a geodesic.
    Geodesic(GeodesicArgs),
}

#[derive(Debug, Args)]
pub struct Out {
    /// Output directory; JSON goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Point `u,v,x,y`; repeatable. Defaults to the config grid.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
    #[command(flatten)]
    pub out: Out,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct NormalizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Skip the Ricci-flatness and harmonicity gates.
    #[arg(long)]
    pub unchecked: bool,
    #[command(flatten)]
    pub out: Out,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    #[arg(long, conflicts_with = "h", required_unless_present = "h")]
    pub config: Option<PathBuf>,
    /// Profile `H(u, x, y)` of a pp-wave.
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: Option<String>,
    /// Box `u0,u1,x0,x1,y0,y1` for `--H`.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub out: Out,
}

#[derive(Debug, Subcommand)]
pub enum HarmonicCommand {
    /// Angle where the radial integral of F vanishes.
    #[command(allow_negative_numbers = true)]
    ThetaR {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long = "R")]
        r: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Loop through a boundary point with the lemma bounds.
    #[command(allow_negative_numbers = true)]
    LemmaCurve {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long = "R")]
        r: f64,
        /// Polar angle of the boundary point.
        #[arg(long)]
        angle: f64,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Mean-value defect on a circle.
    #[command(allow_negative_numbers = true)]
    MeanValue {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        center: String,
        #[arg(long = "R")]
        r: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Least-squares quadratic fit on `[lo, hi]²`.
    #[command(allow_negative_numbers = true)]
    QuadraticFit {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 11)]
        n: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Points with `F(p) > k‖p‖² + k` for `k = 1..kmax`.
    #[command(allow_negative_numbers = true)]
    Witnesses {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        kmax: u32,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        min_norm: f64,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CausalityArgs {
    /// Harmonic `Ĥ(x, y)`.
    #[arg(long = "H", allow_hyphen_values = true, required_unless_present = "config")]
    pub h: Option<String>,
    /// Autonomous metric config; `Ĥ` and `α` are extracted from it.
    #[arg(long, conflicts_with_all = ["h", "alpha"])]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long)]
    pub r0: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub kmax: u32,
    /// Half-width of the witness search box [default: 4·r0].
    #[arg(long)]
    pub search_radius: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub out: Out,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Initial point `u,v,x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Initial velocity `u',v',x',y'`.
    #[arg(long, allow_hyphen_values = true)]
    pub dx0: String,
    #[arg(long)]
    pub s_max: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[command(flatten)]
    pub out: Out,
}

/// Result of one subcommand before it is wrapped in the report envelope.
pub struct Output {
    pub command: &'static str,
    pub input: Value,
    pub tolerances: Value,
    pub status: &'static str,
    pub result: Value,
    /// Extra files `(name, content)`.
    pub files: Vec<(String, String)>,
}

impl Output {
    fn new(command: &'static str, input: Value, tolerances: Value, result: Value) -> Self {
        Output {
            command,
            input,
            tolerances,
            status: "ok",
            result,
            files: Vec::new(),
        }
    }

    pub fn report(&self) -> Value {
        canonical(json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "status": self.status,
            "config_hash": config_hash(&self.input),
            "input": self.input,
            "tolerances": self.tolerances,
            "result": self.result,
        }))
    }
}

fn numbers<const N: usize>(name: &str, text: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Invalid(format!("{name}: {e}")))?;
    v.try_into()
        .map_err(|v: Vec<f64>| Error::Invalid(format!("{name}: expected {N} comma-separated numbers, got {}", v.len())))
}

fn read_config(path: &PathBuf) -> Result<MetricConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    MetricConfig::from_json(&text)
}

fn planar(name: &str, text: &str) -> Result<impl Fn(f64, f64) -> f64 + Sync> {
    let e = parse(text).map_err(|e| Error::Invalid(format!("{name}: {e}")))?;
    if let Some(bad) = e.free_vars().into_iter().find(|v| v != "x" && v != "y") {
        return Err(Error::Invalid(format!("{name} may only use x and y, found '{bad}'")));
    }
    let c = e.compile(&["x", "y"])?;
    Ok(move |x: f64, y: f64| c.eval_or_nan(&[x, y]))
}

fn curvature(a: &CurvatureArgs) -> Result<Output> {
    let cfg = read_config(&a.config)?;
    let m = cfg.metric()?;
    let points: Vec<Point> = if a.points.is_empty() {
        cfg.grid.points(m.domain())
    } else {
        a.points.iter().map(|p| numbers::<4>("point", p)).collect::<Result<_>>()?
    };
    let conn = Connection::new(&m);
    let mut rows = Vec::new();
    for p in &points {
        let ric = conn.ricci(p)?;
        rows.push(json!({
            "point": p,
            "metric": m.metric_components(p)?,
            "christoffel": conn.table(p)?.gamma,
            "ricci": ric,
            "ricci_sup": sup_norm(&ric),
        }));
    }
    let flat = is_ricci_flat(&m, &cfg.grid)?;
    let result = json!({ "points": rows, "ricci_flat": to_value(&flat) });
    Ok(Output::new("curvature", to_value(&cfg), to_value(&cfg.tolerances), result))
}

fn normalize_report(form: &PpWaveForm, m: &BrinkmannMetric, grid: &GridSpec) -> Result<(Value, String)> {
    let tol = m.tol().derivative;
    let harmonic = form.harmonic_defect(grid, tol)?;
    let symbolic = symbolic_harmonic_defect(m, &form.alpha, grid)?;
    let mut rows = Vec::new();
    for p in grid.points(m.domain()) {
        let (u, x, y) = (p[0], p[2], p[3]);
        let [uu, xx, yy] = form.rotation.forward(u, x, y)?;
        rows.push(vec![
            u,
            x,
            y,
            form.potential.value(u, x, y)?,
            form.rotation.beta(u)?,
            uu,
            xx,
            yy,
            form.h_tilde_source(u, x, y)?,
        ]);
    }
    let result = json!({
        "alpha": {
            "expr": form.alpha.expr.to_string(),
            "pointwise": form.alpha.pointwise.to_string(),
            "constant": form.alpha.as_constant(),
            "u_only_defect": form.alpha.u_only_defect,
        },
        "omega_tilde": [form.potential.omega_tilde[0].to_string(), form.potential.omega_tilde[1].to_string()],
        "exactness_defect": form.potential.exactness_defect(m.domain(), grid)?,
        "pullback_residual": form.shift.pullback_residual,
        "pipeline_residual": form.pipeline_residual(m, grid)?,
        "harmonic": to_value(&harmonic),
        "symbolic_laplacian_defect": symbolic,
        "h_hat": form.h_hat.as_ref().map(Expression::to_string),
        "source_domain": to_value(&form.source_domain),
        "mapped_domain": to_value(&form.mapped_domain),
        "provenance": to_value(&form.provenance),
        "samples_header": "u,x,y,f,beta,U,X,Y,H_tilde",
        "samples": rows,
    });
    let csv = table_csv("u,x,y,f,beta,U,X,Y,H_tilde", rows_from(&result));
    Ok((result, csv))
}

fn rows_from(v: &Value) -> Vec<Vec<f64>> {
    v["samples"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|r| r.as_array().map(|r| r.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect()).unwrap_or_default())
                .collect()
        })
        .unwrap_or_default()
}

fn normalize(a: &NormalizeArgs) -> Result<Output> {
    let cfg = read_config(&a.config)?;
    let m = cfg.metric()?;
    let form = if a.unchecked {
        normalize_unchecked(&m, &cfg.grid)?
    } else {
        to_pp_wave(&m, &cfg.grid)?
    };
    let (result, csv) = normalize_report(&form, &m, &cfg.grid)?;
    let mut out = Output::new("normalize", to_value(&cfg), to_value(&cfg.tolerances), result);
    out.files.push(("samples.csv".into(), csv));
    Ok(out)
}

fn classify(a: &ClassifyArgs) -> Result<Output> {
    if let Some(path) = &a.config {
        let cfg = read_config(path)?;
        let m = cfg.metric()?;
        let tol = a.tol.unwrap_or(cfg.tolerances.classification);
        let pp = m.omega()[0].is_zero() && m.omega()[1].is_zero();
        let class = if pp {
            classify_h(m.h(), m.domain(), tol)?
        } else {
            classify_pp(&to_pp_wave(&m, &cfg.grid)?, tol)?
        };
        let integrability = match transversal_integrability(&m, &cfg.grid) {
            Ok(r) => to_value(&r),
            Err(e) => json!({ "error": e.kind(), "message": e.to_string() }),
        };
        let mut tols = to_value(&cfg.tolerances);
        tols["classification"] = json!(tol);
        let result = json!({ "classification": to_value(&class), "transversal_integrability": integrability });
        return Ok(Output::new("classify", to_value(&cfg), canonical(tols), result));
    }
    let h = a.h.as_deref().expect("clap requires --H or --config");
    let e = parse(h).map_err(|e| Error::Invalid(format!("H: {e}")))?;
    if let Some(bad) = e.free_vars().into_iter().find(|v| !["u", "x", "y"].contains(&v.as_str())) {
        return Err(Error::Invalid(format!("H may only use u, x and y, found '{bad}'")));
    }
    let domain = match &a.domain {
        Some(d) => {
            let [u0, u1, x0, x1, y0, y1] = numbers::<6>("domain", d)?;
            let b = DomainBox::new([u0, u1], [x0, x1], [y0, y1]);
            b.validate()?;
            b
        }
        None => DomainBox::default(),
    };
    let tol = a.tol.unwrap_or(Tolerances::default().classification);
    let class = classify_h(&e, &domain, tol)?;
    let input = json!({ "H": h, "domain": to_value(&domain) });
    Ok(Output::new("classify", input, json!({ "classification": tol }), json!({ "classification": to_value(&class) })))
}

fn harmonic(c: &HarmonicCommand) -> Result<Output> {
    let quad = json!({ "quadrature": Tolerances::default().quadrature });
    match c {
        HarmonicCommand::ThetaR { f, r, .. } => {
            let func = planar("F", f)?;
            let t = find_theta_r(&func, *r)?;
            Ok(Output::new("harmonic theta-r", json!({ "F": f, "R": r }), quad, to_value(&t)))
        }
        HarmonicCommand::LemmaCurve { f, r, angle, samples, .. } => {
            let func = planar("F", f)?;
            if *samples < 2 {
                return Err(Error::Invalid("samples must be at least 2".into()));
            }
            let p = [r * angle.cos(), r * angle.sin()];
            let lc = build_lemma_curve(&func, *r, p)?;
            let props = verify_curve_properties(&lc, &func)?;
            let rows = (0..*samples).map(|i| {
                let t = i as f64 / (*samples - 1) as f64;
                let z = lc.curve.position(t);
                vec![t, z[0], z[1], func(z[0], z[1])]
            });
            let mut out = Output::new(
                "harmonic lemma-curve",
                json!({ "F": f, "R": r, "angle": angle, "samples": samples }),
                quad,
                json!({ "curve": to_value(&lc), "properties": to_value(&props) }),
            );
            out.files.push(("curve.csv".into(), table_csv("t,x,y,F", rows)));
            Ok(out)
        }
        HarmonicCommand::MeanValue { f, center, r, n, .. } => {
            let func = planar("F", f)?;
            let c = numbers::<2>("center", center)?;
            if !(*r > 0.0) || *n < 3 {
                return Err(Error::Invalid("need R > 0 and n >= 3".into()));
            }
            let d = mean_value_defect(&func, c, *r, *n);
            Ok(Output::new(
                "harmonic mean-value",
                json!({ "F": f, "center": c, "R": r, "n": n }),
                quad,
                json!({ "defect": d, "center_value": func(c[0], c[1]) }),
            ))
        }
        HarmonicCommand::QuadraticFit { f, lo, hi, n, .. } => {
            let func = planar("F", f)?;
            if !(lo < hi) || *n < 3 {
                return Err(Error::Invalid("need lo < hi and n >= 3".into()));
            }
            let tol = Tolerances::default().classification;
            let m = quadratic_fit(&func, &box_samples(*lo, *hi, *n))?;
            Ok(Output::new(
                "harmonic quadratic-fit",
                json!({ "F": f, "lo": lo, "hi": hi, "n": n }),
                json!({ "classification": tol }),
                json!({ "model": to_value(&m), "is_quadratic": m.is_quadratic(tol) }),
            ))
        }
        HarmonicCommand::Witnesses { f, kmax, radius, min_norm, .. } => {
            let func = planar("F", f)?;
            if !(*radius > 0.0) || *kmax < 1 {
                return Err(Error::Invalid("need radius > 0 and kmax >= 1".into()));
            }
            let s = superquadratic_witnesses(&func, *kmax, *radius, *min_norm);
            Ok(Output::new(
                "harmonic witnesses",
                json!({ "F": f, "kmax": kmax, "radius": radius, "min_norm": min_norm }),
                json!({}),
                to_value(&s),
            ))
        }
    }
}

fn causality(a: &CausalityArgs) -> Result<Output> {
    let (profile, alpha, source) = match &a.config {
        Some(path) => {
            let cfg = read_config(path)?;
            let (p, alpha) = hhat_from_metric(&cfg.metric()?, &cfg.grid)?;
            (p, alpha, to_value(&cfg))
        }
        None => {
            let h = a.h.as_deref().expect("clap requires --H or --config");
            let p = Profile::parse(h).map_err(|e| match e {
                Error::Expr(e) => Error::Invalid(format!("H: {e}")),
                e => e,
            })?;
            (p, a.alpha, json!(h))
        }
    };
    let mut params = CausalityParams::new(alpha, a.r0, a.delta, a.kmax);
    if let Some(r) = a.search_radius {
        params.search_radius = r;
    }
    if let Some(n) = a.samples {
        params.samples = n;
    }
    let input = json!({ "H": source, "params": to_value(&params) });
    let tols = json!({ "harmonic": 1e-8, "timelike": "1e-8 (1 + E)", "quadrature": Tolerances::default().quadrature });
    match violation_certificate(&profile, &params) {
        Ok(cert) => {
            let mut out = Output::new("causality", input, tols, to_value(&cert));
            out.files.push(("curve.csv".into(), curve_csv(&cert.samples)));
            Ok(out)
        }
        Err(e @ Error::NoWitness { .. }) => {
            let mut out = Output::new(
                "causality",
                input,
                tols,
                json!({ "certificate": null, "reason": e.kind(), "message": e.to_string() }),
            );
            out.status = "no_witness";
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

fn geodesic(a: &GeodesicArgs) -> Result<Output> {
    let cfg = read_config(&a.config)?;
    let m = cfg.metric()?;
    let x0 = numbers::<4>("x0", &a.x0)?;
    let dx0 = numbers::<4>("dx0", &a.dx0)?;
    if !(a.s_max > 0.0) || !(a.rtol > 0.0) || !(a.atol > 0.0) {
        return Err(Error::Invalid("need s_max, rtol, atol > 0".into()));
    }
    let opts = IntegratorOptions {
        rtol: a.rtol,
        atol: a.atol,
        ..Default::default()
    };
    let t = integrate_geodesic(&m, GeodesicState::new(x0, dx0), a.s_max, &opts)?;
    let du_drift = t.states.iter().fold(0.0f64, |d, s| d.max((s.dx[0] - dx0[0]).abs()));
    let result = json!({
        "exit": t.exit,
        "completed": t.completed,
        "steps": t.states.len() - 1,
        "rejected_steps": t.rejected_steps,
        "initial_norm": t.norms[0],
        "max_norm_drift": t.max_drift,
        "max_du_drift": du_drift,
        "final": to_value(t.last()),
    });
    let rows = t.states.iter().zip(&t.norms).map(|(s, n)| {
        let mut r = vec![s.s];
        r.extend(s.x);
        r.extend(s.dx);
        r.push(*n);
        r
    });
    let csv = table_csv("s,u,v,x,y,du,dv,dx,dy,g_norm", rows);
    let input = json!({ "config": to_value(&cfg), "x0": x0, "dx0": dx0, "s_max": a.s_max, "rtol": a.rtol, "atol": a.atol });
    let mut out = Output::new("geodesic", input, to_value(&cfg.tolerances), result);
    out.files.push(("trajectory.csv".into(), csv));
    Ok(out)
}

pub fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Curvature(a) => curvature(a),
        Command::Normalize(a) => normalize(a),
        Command::Classify(a) => classify(a),
        Command::Harmonic(c) => harmonic(c),
        Command::Causality(a) => causality(a),
        Command::Geodesic(a) => geodesic(a),
    }
}

fn out_dir(cmd: &Command) -> Option<PathBuf> {
    match cmd {
        Command::Curvature(a) => a.out.out.clone(),
        Command::Normalize(a) => a.out.out.clone(),
        Command::Classify(a) => a.out.out.clone(),
        Command::Causality(a) => a.out.out.clone(),
        Command::Geodesic(a) => a.out.out.clone(),
        Command::Harmonic(h) => match h {
            HarmonicCommand::ThetaR { out, .. }
            | HarmonicCommand::LemmaCurve { out, .. }
            | HarmonicCommand::MeanValue { out, .. }
            | HarmonicCommand::QuadraticFit { out, .. }
            | HarmonicCommand::Witnesses { out, .. } => out.out.clone(),
        },
    }
}

fn report_error(e: &Error) -> i32 {
    let line = json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{line}");
    if e.is_internal() {
        2
    } else {
        1
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BRINKMANN_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Invalid(format!("BRINKMANN_THREADS must be a positive integer, got '{v}'")))?;
        // Already initialised when called more than once in a process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the CLI on `argv` (including the program name) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return report_error(&Error::Invalid(first.to_string()));
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(&e);
    }
    let result = dispatch(&cli.command).and_then(|out| {
        let sink = Sink::new(out_dir(&cli.command))?;
        let name = match (out.command, out.status) {
            ("causality", "ok") => "certificate.json",
            _ => "report.json",
        };
        sink.emit(name, &render(&out.report()))?;
        if sink.dir().is_some() {
            for (f, content) in &out.files {
                sink.emit(f, content)?;
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}
