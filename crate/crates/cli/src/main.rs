use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use henon_core::dynamics::{Dynamics, GridJob, GridMode, Sign, Slice};
use henon_core::fixtures;
use henon_core::io::{
    complex_json, grid_csv, grid_json, grid_meta, grid_pgm, point_json, polymap_json,
    report_envelope, MapSpec,
};
use henon_core::normal_form::{
    admissible_twist_group, chain_normalize_b_only, origin_fixed_form, square_normal_form,
    NormalChain,
};
use henon_core::poly::fmt_complex;
use henon_core::rigidity::{
    check_commute, find_twist, fixed_points, rigidity_report, verify_squares_commute, RightTwist,
};
use henon_core::{Complex, Error, HenonChain, Point2};

#[derive(Parser)]
#[command(
    name = "henon",
    version,
    about = "Hénon map algebra, dynamics and rigidity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Pgm,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct MapArg {
    #[arg(short = 'm', long = "map")]
    map: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long = "f")]
    f: PathBuf,
    #[arg(long = "h")]
    h: PathBuf,
}

#[derive(Args)]
struct PointArgs {
    /// Real point `x y`.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
    /// Complex point `xr xi yr yi`.
    #[arg(long = "point-c", num_args = 4, value_names = ["XR", "XI", "YR", "YI"], allow_negative_numbers = true)]
    point_c: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Gplus,
    Gminus,
    Gmax,
    K,
}

#[derive(Subcommand)]
enum Command {
    /// Chain for F∘H.
    Compose {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Expanded polynomial map.
    Expand {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        common: Common,
    },
    /// Normal form of H².
    NormalizeSquare {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        common: Common,
    },
    /// Normal form of a chain with all c = 0.
    NormalizeChain {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        common: Common,
    },
    /// Normal form with p(0) = 0 for a chain fixing the origin.
    FixOrigin {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        common: Common,
    },
    /// Admissible twist group of a chain in normal form.
    TwistGroup {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        common: Common,
    },
    /// Green function estimate at a point.
    Green {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value = "max")]
        sign: SignArg,
        #[command(flatten)]
        common: Common,
    },
    /// Escape classification of a point.
    Classify {
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled check that G⁺ and G⁻ dominate near the axes.
    VerifyDomination {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 1e3)]
        r0: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Rasterize a grid over a real slice.
    Render {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, value_enum, default_value = "gmax")]
        mode: ModeArg,
        /// `center_s center_t width height`.
        #[arg(long, num_args = 4, value_names = ["CS", "CT", "W", "H"], allow_negative_numbers = true,
              default_values_t = [0.0, 0.0, 5.0, 5.0])]
        window: Vec<f64>,
        /// `columns rows`.
        #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [128, 128])]
        res: Vec<usize>,
        /// Slice base point `xr xi yr yi`.
        #[arg(long = "slice-base", num_args = 4, allow_negative_numbers = true)]
        slice_base: Option<Vec<f64>>,
        /// Slice direction for the first window coordinate.
        #[arg(long = "slice-u", num_args = 4, allow_negative_numbers = true)]
        slice_u: Option<Vec<f64>>,
        /// Slice direction for the second window coordinate.
        #[arg(long = "slice-v", num_args = 4, allow_negative_numbers = true)]
        slice_v: Option<Vec<f64>>,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Fixed points of H or H².
    FixedPoints {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Search for η with F∘H = C_η∘H∘F.
    Twist {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Coefficient comparison of F∘H and H∘F.
    Commute {
        #[command(flatten)]
        pair: PairArgs,
        /// Compare F²∘H² with H²∘F² instead.
        #[arg(long)]
        squares: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Twist, commutation and Jacobian report for a pair.
    Rigidity {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in fixture checks.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Validation(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_map(path: &Path) -> std::result::Result<HenonChain, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    MapSpec::from_json(&text)
        .and_then(|s| s.to_chain())
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn parse_point(args: &PointArgs) -> std::result::Result<Point2, Failure> {
    match (&args.point, &args.point_c) {
        (Some(p), None) => Ok(Point2::real(p[0], p[1])),
        (None, Some(p)) => Ok(Point2::new(
            Complex::new(p[0], p[1]),
            Complex::new(p[2], p[3]),
        )),
        (None, None) => Err(Failure::Validation(
            "a point is required (--point or --point-c)".into(),
        )),
        (Some(_), Some(_)) => Err(Failure::Validation(
            "give only one of --point and --point-c".into(),
        )),
    }
}

fn quad_point(v: &[f64]) -> Point2 {
    Point2::new(Complex::new(v[0], v[1]), Complex::new(v[2], v[3]))
}

fn emit(common: &Common, bytes: &[u8]) -> Outcome {
    match &common.out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Internal(format!("stdout: {e}")))
        }
    }
}

fn emit_report(
    common: &Common,
    command: &str,
    text: String,
    inputs: Value,
    results: Value,
    residuals: Value,
) -> Outcome {
    match common.format.unwrap_or(Format::Text) {
        Format::Text => emit(common, text.as_bytes()),
        Format::Json => {
            let v = report_envelope(command, inputs, results, residuals);
            let mut s = serde_json::to_string_pretty(&v).expect("json");
            s.push('\n');
            emit(common, s.as_bytes())
        }
        other => Err(Failure::Validation(format!(
            "format {other:?} is not available for {command}"
        ))),
    }
}

/// Spec-producing commands print a re-parseable map spec unless text is requested.
fn emit_chain(common: &Common, h: &HenonChain, name: &str) -> Outcome {
    match common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = MapSpec::from_chain(h, Some(name.into())).to_json();
            s.push('\n');
            emit(common, s.as_bytes())
        }
        Format::Text => emit(common, format!("{h}\n").as_bytes()),
        other => Err(Failure::Validation(format!(
            "format {other:?} is not available for {name}"
        ))),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Compose { pair, common } => {
            let (f, h) = (load_map(&pair.f)?, load_map(&pair.h)?);
            emit_chain(&common, &h.then(&f), "F∘H")
        }
        Command::Expand { map, common } => {
            let h = load_map(&map.map)?;
            let m = h.expand()?;
            emit_report(
                &common,
                "expand",
                format!("first: {}\nsecond: {}\n", m.first, m.second),
                json!({"map": map.map}),
                polymap_json(&m),
                json!({}),
            )
        }
        Command::NormalizeSquare { map, common } => {
            let h = load_map(&map.map)?;
            emit_chain(
                &common,
                &square_normal_form(&h).to_chain(),
                "normal form of H²",
            )
        }
        Command::NormalizeChain { map, common } => {
            let h = load_map(&map.map)?;
            emit_chain(
                &common,
                &chain_normalize_b_only(&h)?.to_chain(),
                "normal form",
            )
        }
        Command::FixOrigin { map, common } => {
            let h = load_map(&map.map)?;
            emit_chain(&common, &origin_fixed_form(&h)?, "origin-fixed normal form")
        }
        Command::TwistGroup { map, common } => {
            let h = load_map(&map.map)?;
            let normal = NormalChain::from_chain(&h).ok_or_else(|| {
                Failure::Validation(
                    "map is not in normal form (b = 1, c = 0); normalize it first".into(),
                )
            })?;
            let group = admissible_twist_group(&normal)?;
            let elements = group.elements();
            let mut text = format!(
                "order: {}\ngenerator: {}\n",
                group.order,
                fmt_complex(group.generator)
            );
            for e in &elements {
                text.push_str(&format!("element: {}\n", fmt_complex(*e)));
            }
            emit_report(
                &common,
                "twist-group",
                text,
                json!({"map": map.map}),
                json!({
                    "order": group.order,
                    "generator": complex_json(group.generator),
                    "elements": elements.iter().map(|e| complex_json(*e)).collect::<Vec<_>>(),
                }),
                json!({}),
            )
        }
        Command::Green {
            map,
            point,
            sign,
            common,
        } => {
            let h = load_map(&map.map)?;
            let z = parse_point(&point)?;
            let dy = Dynamics::new(&h)?;
            let g = match sign {
                SignArg::Plus => dy.green(z, Sign::Plus, common.budget),
                SignArg::Minus => dy.green(z, Sign::Minus, common.budget),
                SignArg::Max => dy.green_max(z, common.budget),
            };
            let name = format!("{sign:?}").to_lowercase();
            emit_report(
                &common,
                "green",
                format!(
                    "value: {}\nerror_bound: {:e}\niterations: {}\nescaped: {}\n",
                    g.value, g.error_bound, g.iterations_used, g.escaped
                ),
                json!({"map": map.map, "point": point_json(&z), "sign": name, "budget": common.budget}),
                json!({"value": g.value, "iterations": g.iterations_used, "escaped": g.escaped,
                       "filtration_radius": dy.radius()}),
                json!({"error_bound": g.error_bound}),
            )
        }
        Command::Classify {
            map,
            point,
            sign,
            common,
        } => {
            let h = load_map(&map.map)?;
            let z = parse_point(&point)?;
            let dy = Dynamics::new(&h)?;
            let class = match sign {
                Some(SignArg::Plus) => dy.classify_one_sided(z, Sign::Plus, common.budget),
                Some(SignArg::Minus) => dy.classify_one_sided(z, Sign::Minus, common.budget),
                Some(SignArg::Max) | None => dy.classify(z, common.budget),
            };
            emit_report(
                &common,
                "classify",
                format!("class: {class}\n"),
                json!({"map": map.map, "point": point_json(&z), "budget": common.budget}),
                json!({"class": class.to_string(), "candidate": class.is_candidate(),
                       "filtration_radius": dy.radius()}),
                json!({}),
            )
        }
        Command::VerifyDomination {
            map,
            r0,
            samples,
            common,
        } => {
            let h = load_map(&map.map)?;
            let dy = Dynamics::new(&h)?;
            let report = dy.verify_green_domination(r0, samples, common.budget, common.seed)?;
            let region = |r: &henon_core::dynamics::RegionResult| {
                json!({"samples": r.samples, "certified": r.certified, "worst_margin": r.worst_margin,
                       "inconclusive": r.inconclusive.iter()
                           .map(|s| json!({"point": point_json(&s.point), "margin": s.margin}))
                           .collect::<Vec<_>>()})
            };
            let text = format!(
                "filtration_radius: {}\nr0: {}\nD2 (G+ > G-): {}/{} certified, worst margin {:e}\nD1 (G- > G+): {}/{} certified, worst margin {:e}\n",
                report.radius,
                report.r0,
                report.plus_region.certified,
                report.plus_region.samples,
                report.plus_region.worst_margin,
                report.minus_region.certified,
                report.minus_region.samples,
                report.minus_region.worst_margin,
            );
            emit_report(
                &common,
                "verify-domination",
                text,
                json!({"map": map.map, "r0": r0, "samples": samples, "seed": common.seed, "budget": common.budget}),
                json!({"filtration_radius": report.radius, "D2": region(&report.plus_region),
                       "D1": region(&report.minus_region), "all_certified": report.all_certified()}),
                json!({"worst_margin_D2": report.plus_region.worst_margin,
                       "worst_margin_D1": report.minus_region.worst_margin}),
            )
        }
        Command::Render {
            map,
            mode,
            window,
            res,
            slice_base,
            slice_u,
            slice_v,
            workers,
            common,
        } => {
            let h = load_map(&map.map)?;
            let default = Slice::default();
            let slice = Slice {
                base: slice_base
                    .as_deref()
                    .map(quad_point)
                    .unwrap_or(default.base),
                u: slice_u.as_deref().map(quad_point).unwrap_or(default.u),
                v: slice_v.as_deref().map(quad_point).unwrap_or(default.v),
            };
            let job = GridJob {
                center: (window[0], window[1]),
                width: window[2],
                height: window[3],
                resolution: (res[0], res[1]),
                slice,
                mode: match mode {
                    ModeArg::Gplus => GridMode::GPlus,
                    ModeArg::Gminus => GridMode::GMinus,
                    ModeArg::Gmax => GridMode::GMax,
                    ModeArg::K => GridMode::KMembership,
                },
                budget: common.budget,
            };
            let grid = Dynamics::new(&h)?.rasterize(&job, workers)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => emit(&common, grid_csv(&grid, &job).as_bytes()),
                Format::Pgm => {
                    let Some(out) = &common.out else {
                        return Err(Failure::Validation("pgm output needs --out".into()));
                    };
                    emit(&common, &grid_pgm(&grid))?;
                    let mut meta = out.clone().into_os_string();
                    meta.push(".meta");
                    fs::write(&meta, grid_meta(&grid, &job))
                        .map_err(|e| Failure::Internal(format!("cannot write metadata: {e}")))
                }
                Format::Json => {
                    let v = report_envelope(
                        "render",
                        json!({"map": map.map, "mode": job.mode.to_string(), "window": window, "res": res,
                               "slice": job.slice.to_string(), "budget": job.budget}),
                        grid_json(&grid, &job),
                        json!({}),
                    );
                    emit(
                        &common,
                        format!("{}\n", serde_json::to_string(&v).expect("json")).as_bytes(),
                    )
                }
                Format::Text => emit(
                    &common,
                    format!(
                        "{}\nmin: {}\nmax: {}\nmean: {}\nbounded: {}\nescaped: {}\n",
                        henon_core::io::grid_header(&job),
                        grid.stats.min,
                        grid.stats.max,
                        grid.stats.mean,
                        grid.stats.bounded,
                        grid.stats.escaped
                    )
                    .as_bytes(),
                ),
            }
        }
        Command::FixedPoints { map, order, common } => {
            let h = load_map(&map.map)?;
            let set = fixed_points(&h, order)?;
            let mut text = format!(
                "count: {}\nseeds: {} ({} failed)\n",
                set.points.len(),
                set.seeds_used,
                set.seeds_failed
            );
            for (p, r) in set.points.iter().zip(&set.residuals) {
                text.push_str(&format!("point: {p} residual {r:e}\n"));
            }
            emit_report(
                &common,
                "fixed-points",
                text,
                json!({"map": map.map, "order": order}),
                json!({"points": set.points.iter().map(point_json).collect::<Vec<_>>(),
                       "seeds_used": set.seeds_used, "seeds_failed": set.seeds_failed}),
                json!({"points": set.residuals}),
            )
        }
        Command::Twist { pair, common } => {
            let (f, h) = (load_map(&pair.f)?, load_map(&pair.h)?);
            let inputs = json!({"f": pair.f, "h": pair.h, "tol": common.tol});
            match find_twist(&f, &h, common.tol) {
                Ok(Some(t)) => emit_report(
                    &common,
                    "twist",
                    format!(
                        "eta: {}\nresidual: {:e}\nrelation: {}\nright: {}\n",
                        fmt_complex(t.eta),
                        t.residual,
                        t.relation(),
                        t.right
                    ),
                    inputs,
                    json!({"found": true, "eta": complex_json(t.eta), "relation": t.relation(),
                           "right": t.right.to_string(), "right_holds": t.right != RightTwist::Neither}),
                    json!({"relation": t.residual, "right_eta": t.right_eta_residual,
                           "right_eta_inverse": t.right_eta_inverse_residual}),
                ),
                Ok(None) => emit_report(
                    &common,
                    "twist",
                    "eta: none\n".into(),
                    inputs,
                    json!({"found": false}),
                    json!({}),
                ),
                Err(Error::DegreeMismatch(why)) => emit_report(
                    &common,
                    "twist",
                    format!("eta: none\nreason: {why}\n"),
                    inputs,
                    json!({"found": false, "reason": why}),
                    json!({}),
                ),
                Err(e) => Err(e.into()),
            }
        }
        Command::Commute {
            pair,
            squares,
            common,
        } => {
            let (f, h) = (load_map(&pair.f)?, load_map(&pair.h)?);
            let c = if squares {
                verify_squares_commute(&f, &h, common.tol)?
            } else {
                check_commute(&f, &h, common.tol)?
            };
            emit_report(
                &common,
                "commute",
                format!("commute: {}\nresidual: {:e}\n", c.commute, c.residual),
                json!({"f": pair.f, "h": pair.h, "tol": common.tol, "squares": squares}),
                json!({"commute": c.commute}),
                json!({"coefficients": c.residual}),
            )
        }
        Command::Rigidity { pair, common } => {
            let (f, h) = (load_map(&pair.f)?, load_map(&pair.h)?);
            let report = rigidity_report(&f, &h, common.tol);
            emit_report(
                &common,
                "rigidity",
                report.to_text(),
                json!({"f": pair.f, "h": pair.h, "tol": common.tol}),
                report.to_json(),
                json!({}),
            )
        }
        Command::Verify { common } => verify(&common),
    }
}

fn verify(common: &Common) -> Outcome {
    let h = fixtures::basic_map();
    let f = fixtures::twisted_basic_map();
    let w2 = fixtures::omega() * fixtures::omega();
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let twist = find_twist(&f, &h, 1e-9)?;
    checks.push((
        "twist of C_ω∘H against H is ω²",
        twist.is_some_and(|t| (t.eta - w2).norm() <= 1e-9),
    ));
    let c = check_commute(&f, &h, 1e-9)?;
    checks.push((
        "C_ω∘H and H do not commute",
        !c.commute && c.residual >= 0.1,
    ));
    let s = verify_squares_commute(&f, &h, 1e-9)?;
    checks.push(("their squares commute", s.commute && s.residual <= 1e-9));

    let group = admissible_twist_group(&NormalChain::from_chain(&h).expect("normal"))?;
    checks.push(("twist group of y² has order 3", group.order == 3));

    let dy = Dynamics::new(&h)?;
    let g = dy.green(Point2::real(0.0, 10.0), Sign::Plus, common.budget);
    checks.push((
        "G+(0, 10) = 2.3022 ± 1e-3",
        (g.value - 2.3022).abs() <= 1e-3,
    ));
    checks.push((
        "G vanishes at the fixed points",
        dy.green_max(Point2::origin(), common.budget).value == 0.0
            && dy.green_max(Point2::real(2.0, 2.0), common.budget).value == 0.0,
    ));

    let fp = fixed_points(&h, 1)?;
    checks.push((
        "fixed points are (0,0) and (2,2)",
        fp.points.len() == 2
            && [Point2::origin(), Point2::real(2.0, 2.0)]
                .iter()
                .all(|q| fp.points.iter().any(|p| p.dist(q) <= 1e-8)),
    ));

    let mut text = String::new();
    for (name, ok) in &checks {
        text.push_str(&format!("{} {name}\n", if *ok { "PASS" } else { "FAIL" }));
    }
    let all = checks.iter().all(|(_, ok)| *ok);
    emit_report(
        common,
        "verify",
        text,
        json!({}),
        json!({"checks": checks.iter().map(|(n, ok)| json!({"name": n, "pass": ok})).collect::<Vec<_>>(),
               "all_pass": all}),
        json!({}),
    )?;
    if all {
        Ok(())
    } else {
        Err(Failure::Validation("fixture checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
