//! `bowditch`: classify imaginary characters, walk orbits and geodesics,
//! render and measure level surfaces.

mod literal;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use bowditch_core::classify::{bq_check, classify, BqReport, Budget, Classification, EndEstimate};
use bowditch_core::raster::{render_full, sidecar, write_csv, Coloring, RasterJob, VariantFilter};
use bowditch_core::surface::{level_topology, measure_with_error, slopes, z_sheet, SheetSelector, Window};
use bowditch_core::tree::{alternating_geodesic, base_vertex, fit_closed_form};
use bowditch_core::{apply_word, kappa, psi, BoundaryKind, Color, ImaginaryCharacter, MoveWord, Scalar};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use literal::Literal;
use num_rational::BigRational;
use serde_json::{json, Map, Number, Value};

#[derive(Parser)]
#[command(name = "bowditch", version, about = "Dynamics of imaginary characters on level surfaces of the commutator trace")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a character by descending the directed tree.
    Classify {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Exact rational arithmetic; inputs must be rational literals.
        #[arg(long)]
        exact: bool,
    },
    /// Apply a word in the generators (1 2 3 Vieta, a b c sign-changes, p swap).
    Orbit {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_parser = MoveWord::from_str)]
        word: MoveWord,
        #[arg(long)]
        exact: bool,
    },
    /// CSV of the traces around one region (`n,trace`), with the fitted closed form.
    Geodesic {
        #[command(flatten)]
        point: PointArgs,
        /// Region to turn around: 1, 2 or 3.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
        slot: u8,
        #[arg(long, default_value_t = -20, allow_hyphen_values = true)]
        from: i64,
        #[arg(long, default_value_t = 20, allow_hyphen_values = true)]
        to: i64,
        #[arg(long)]
        exact: bool,
    },
    /// Render a window of a level surface to PPM with a JSON sidecar.
    Render {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value_t = ColoringArg::Variant)]
        coloring: ColoringArg,
        /// Output image; the sidecar goes next to it with a .json extension.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-pixel CSV dump.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        threads: Option<u32>,
    },
    /// Invariant area of a window, optionally restricted to one classification.
    Measure {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        threads: Option<u32>,
    },
    /// Topology of the level set, and the sector slopes for k >= 2.
    Topology {
        #[arg(long, allow_hyphen_values = true)]
        k: Literal,
    },
    /// Point of the k = 2 level from hyperbolic parameters.
    Psi {
        #[arg(long, allow_hyphen_values = true)]
        a: Literal,
        #[arg(long, allow_hyphen_values = true)]
        b: Literal,
    },
    /// Search for primitive regions with small trace.
    Bq {
        #[command(flatten)]
        point: PointArgs,
        /// Trace bound of the search.
        #[arg(long, default_value = "2", allow_hyphen_values = true)]
        c: Literal,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: Literal,
    #[arg(long, allow_hyphen_values = true)]
    y: Literal,
    /// Third coordinate; if absent it is solved from --k on --sheet.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<Literal>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "z")]
    k: Option<Literal>,
    #[arg(long, value_enum, default_value_t = SheetArg::Plus)]
    sheet: SheetArg,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    k: Literal,
    #[arg(long, value_enum, default_value_t = SheetArg::Plus)]
    sheet: SheetArg,
    /// `x_min:x_max:y_min:y_max`
    #[arg(long, default_value = "-4:4:-4:4", value_parser = parse_window, allow_hyphen_values = true)]
    window: [f64; 4],
    /// Pixels per side.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(1..))]
    res: u32,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_depth: u64,
    #[arg(long, default_value = "1e300")]
    budget_max_abs: Literal,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_walk: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SheetArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColoringArg {
    Variant,
    End,
    Depth,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Fricke,
    GeneralizedFrickeC11,
    FrickeC02,
    AttractingIndecisiveEdge,
    EllipticPrimitive,
    Exceptional,
    Undetermined,
}

impl From<SheetArg> for SheetSelector {
    fn from(s: SheetArg) -> Self {
        match s {
            SheetArg::Plus => SheetSelector::Plus,
            SheetArg::Minus => SheetSelector::Minus,
        }
    }
}

impl From<VariantArg> for VariantFilter {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Fricke => VariantFilter::Fricke,
            VariantArg::GeneralizedFrickeC11 => VariantFilter::GeneralizedFrickeC11,
            VariantArg::FrickeC02 => VariantFilter::FrickeC02,
            VariantArg::AttractingIndecisiveEdge => VariantFilter::AttractingIndecisiveEdge,
            VariantArg::EllipticPrimitive => VariantFilter::EllipticPrimitive,
            VariantArg::Exceptional => VariantFilter::Exceptional,
            VariantArg::Undetermined => VariantFilter::Undetermined,
        }
    }
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c, d] = parts[..] else {
        return Err("expected x_min:x_max:y_min:y_max".into());
    };
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip([a, b, c, d]) {
        *slot = part.parse::<Literal>()?.to_f64();
    }
    Ok(out)
}

enum Failure {
    /// Bad flag value discovered after parsing: exit 2.
    Flag(String),
    /// Valid flags, impossible request: exit 1.
    Domain(String),
    Io(io::Error),
}

impl From<bowditch_core::Error> for Failure {
    fn from(e: bowditch_core::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome<T> = Result<T, Failure>;

/// Numbers in output: 17 significant digits for floats, `p/q` strings for
/// rationals.
trait Emit: Scalar {
    fn emit(&self) -> Value;
}

impl Emit for f64 {
    fn emit(&self) -> Value {
        float(*self)
    }
}

impl Emit for BigRational {
    fn emit(&self) -> Value {
        Value::String(self.to_string())
    }
}

fn float(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{v:.16e}")).map_or(Value::Null, Value::Number)
}

fn float_text(v: f64) -> String {
    float(v).to_string()
}

/// Conversion from a flag literal in the current arithmetic mode.
trait FromLiteral: Emit {
    fn from_literal(flag: &str, l: &Literal) -> Outcome<Self>;
}

impl FromLiteral for f64 {
    fn from_literal(flag: &str, l: &Literal) -> Outcome<Self> {
        let v = l.to_f64();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Failure::Flag(format!("--{flag} is not a finite number")))
        }
    }
}

impl FromLiteral for BigRational {
    fn from_literal(flag: &str, l: &Literal) -> Outcome<Self> {
        l.as_rational()
            .cloned()
            .ok_or_else(|| Failure::Flag(format!("--{flag}: only rational literals are allowed with --exact")))
    }
}

fn character_json<T: Emit>(c: &ImaginaryCharacter<T>) -> Value {
    json!({ "x": c.x.emit(), "y": c.y.emit(), "z": c.z.emit() })
}

fn point<T: FromLiteral>(p: &PointArgs) -> Outcome<ImaginaryCharacter<T>> {
    let x = T::from_literal("x", &p.x)?;
    let y = T::from_literal("y", &p.y)?;
    let z = match (&p.z, &p.k) {
        (Some(z), _) => T::from_literal("z", z)?,
        (None, Some(k)) => {
            if T::EXACT {
                return Err(Failure::Flag("--k: lifting to a sheet is irrational; give --z with --exact".into()));
            }
            let z = z_sheet(f64::from_literal("k", k)?, x.to_f64(), y.to_f64(), p.sheet.into()).ok_or_else(|| {
                Failure::Domain(format!("({}, {}) has no preimage on this level", x.to_f64(), y.to_f64()))
            })?;
            T::from_literal("k", &Literal::Rational(BigRational::from_float(z).expect("finite")))?
        }
        (None, None) => return Err(Failure::Flag("one of --z or --k is required".into())),
    };
    Ok(ImaginaryCharacter::new(x, y, z))
}

fn budget(b: &BudgetArgs) -> Outcome<Budget> {
    let max_abs = f64::from_literal("budget-max-abs", &b.budget_max_abs)?;
    Budget::new(b.budget_depth as usize, max_abs, b.budget_walk as usize).map_err(|e| Failure::Flag(format!("--budget-max-abs: {e}")))
}

fn window(g: &GridArgs) -> Outcome<Window> {
    let [a, b, c, d] = g.window;
    Window::new(a, b, c, d, g.res as usize, g.res as usize).map_err(|e| Failure::Flag(format!("--window: {e}")))
}

fn with_schema(fields: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!("v1"));
    if let Value::Object(m) = fields {
        out.extend(m);
    }
    Value::Object(out)
}

fn boundary_json(b: &BoundaryKind) -> Value {
    match *b {
        BoundaryKind::Geodesic { length } => json!({ "kind": "Geodesic", "length": float(length) }),
        BoundaryKind::Cusp => json!({ "kind": "Cusp" }),
        BoundaryKind::Cone { angle } => json!({ "kind": "Cone", "angle": float(angle) }),
    }
}

fn classification_json<T: Emit>(input: &ImaginaryCharacter<T>, r: &Classification<T>) -> Value {
    let mut out = json!({
        "variant": r.variant_name(),
        "character": character_json(input),
        "kappa": kappa(input).emit(),
        "word": r.word().map(|w| w.to_string()),
        "depth": r.depth(),
    });
    let m = out.as_object_mut().expect("object");
    match r {
        Classification::GeneralizedFrickeC11 { sink, delta, boundary, .. } => {
            m.insert("sink".into(), character_json(sink));
            m.insert("delta".into(), delta.emit());
            m.insert("boundary".into(), boundary_json(boundary));
        }
        Classification::FrickeC02 { sink, .. } => {
            m.insert("sink".into(), character_json(sink));
        }
        Classification::AttractingIndecisiveEdge { endpoints, .. } => {
            m.insert("endpoints".into(), json!([character_json(&endpoints[0]), character_json(&endpoints[1])]));
        }
        Classification::EllipticPrimitive { region_fraction, trace, .. } => {
            m.insert("region_fraction".into(), json!(region_fraction.to_string()));
            m.insert("trace".into(), trace.emit());
        }
        Classification::Exceptional { kind } => {
            m.insert("kind".into(), json!(format!("{kind:?}")));
        }
        Classification::Undetermined { end_estimate, .. } => {
            let e = match end_estimate {
                None => Value::Null,
                Some(EndEstimate::Region(f)) => json!({ "region": f.to_string() }),
                Some(EndEstimate::Prefix(p)) => {
                    json!({ "prefix": p.iter().map(|t| t.to_string()).collect::<Vec<_>>() })
                }
            };
            m.insert("end_estimate".into(), e);
        }
    }
    with_schema(out)
}

fn bq_json(r: &BqReport) -> Value {
    let witness = r.witness.as_ref().map(|w| {
        json!({ "fraction": w.fraction.to_string(), "parity": format!("{:?}", w.parity), "trace": float(w.trace) })
    });
    with_schema(json!({
        "satisfied": r.satisfied,
        "complete": r.complete,
        "omega_size": r.omega_size,
        "witness": witness,
    }))
}

fn print_json(out: &mut impl Write, v: &Value) -> Outcome<()> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| Failure::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn run_classify<T: FromLiteral>(p: &PointArgs, b: &BudgetArgs, out: &mut impl Write) -> Outcome<()> {
    let c = point::<T>(p)?;
    let r = classify(&c, &budget(b)?)?;
    print_json(out, &classification_json(&c, &r))
}

fn run_orbit<T: FromLiteral>(p: &PointArgs, word: &MoveWord, out: &mut impl Write) -> Outcome<()> {
    let c = point::<T>(p)?;
    let image = apply_word(&c, word);
    print_json(
        out,
        &with_schema(json!({
            "word": word.to_string(),
            "character": character_json(&image),
            "kappa": kappa(&image).emit(),
        })),
    )
}

fn run_geodesic<T: FromLiteral>(p: &PointArgs, slot: u8, from: i64, to: i64, out: &mut impl Write) -> Outcome<()> {
    if from > to {
        return Err(Failure::Flag(format!("--from {from} is after --to {to}")));
    }
    let c = point::<T>(p)?;
    let slot = Color::from_number(slot).expect("validated by clap");
    let traces = alternating_geodesic(&base_vertex(&c), slot, from..=to);
    let z = c.coord(slot).to_f64();
    writeln!(out, "# slot {} trace {}", slot.number(), float_text(z))?;
    let samples: Vec<(i64, f64)> = traces.iter().map(|t| (t.index, t.value.to_f64())).collect();
    match fit_closed_form(z, &samples) {
        Ok((a, b, lambda)) => {
            writeln!(out, "# a {}", float_text(a))?;
            writeln!(out, "# b {}", float_text(b))?;
            writeln!(out, "# lambda {}", float_text(lambda))?;
        }
        Err(e) => writeln!(out, "# no closed-form fit: {e}")?,
    }
    writeln!(out, "n,trace")?;
    for t in &traces {
        let v = match t.value.emit() {
            Value::String(s) => s,
            v => v.to_string(),
        };
        writeln!(out, "{},{}", t.index, v)?;
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn run(cli: Cli, out: &mut impl Write) -> Outcome<()> {
    match cli.command {
        Command::Classify { point, budget, exact } => {
            if exact {
                run_classify::<BigRational>(&point, &budget, out)
            } else {
                run_classify::<f64>(&point, &budget, out)
            }
        }
        Command::Orbit { point, word, exact } => {
            if exact {
                run_orbit::<BigRational>(&point, &word, out)
            } else {
                run_orbit::<f64>(&point, &word, out)
            }
        }
        Command::Geodesic { point, slot, from, to, exact } => {
            if exact {
                run_geodesic::<BigRational>(&point, slot, from, to, out)
            } else {
                run_geodesic::<f64>(&point, slot, from, to, out)
            }
        }
        Command::Render { grid, budget: b, coloring, out: path, csv, threads } => {
            let job = RasterJob {
                k: f64::from_literal("k", &grid.k)?,
                sheet: grid.sheet.into(),
                window: window(&grid)?,
                budget: budget(&b)?,
                coloring: match coloring {
                    ColoringArg::Variant => Coloring::ByVariant,
                    ColoringArg::End => Coloring::ByEndEstimate,
                    ColoringArg::Depth => Coloring::ByDepth,
                },
            };
            let rendered = render_full(&job, threads.map(|n| n as usize))?;
            if rendered.records.iter().all(|r| r.z.is_none()) {
                return Err(Failure::Domain("window is void: no pixel has a preimage on this level".into()));
            }
            rendered.image.write_ppm(BufWriter::new(File::create(&path)?))?;
            let side = sidecar(&job, &rendered.records);
            let side_path = sidecar_path(&path);
            let mut f = BufWriter::new(File::create(&side_path)?);
            serde_json::to_writer_pretty(&mut f, &side).map_err(|e| Failure::Io(e.into()))?;
            writeln!(f)?;
            f.flush()?;
            if let Some(csv) = &csv {
                let mut f = BufWriter::new(File::create(csv)?);
                write_csv(&rendered.records, &mut f)?;
                f.flush()?;
            }
            print_json(
                out,
                &with_schema(json!({
                    "image": path.display().to_string(),
                    "sidecar": side_path.display().to_string(),
                    "csv": csv.map(|p| p.display().to_string()),
                    "resolution": [job.window.nx, job.window.ny],
                    "stats": side.stats,
                })),
            )
        }
        Command::Measure { grid, budget: b, variant, threads } => {
            let k = f64::from_literal("k", &grid.k)?;
            let w = window(&grid)?;
            let b = budget(&b)?;
            let sheet = grid.sheet.into();
            let go = || match variant {
                None => measure_with_error(k, sheet, &w, |_| true),
                Some(v) => {
                    let filter = VariantFilter::from(v);
                    measure_with_error(k, sheet, &w, |c| classify(c, &b).is_ok_and(|r| filter.matches(&r)))
                }
            };
            let report = match threads {
                None => go()?,
                Some(n) => rayon_pool(n as usize)?.install(go)?,
            };
            print_json(
                out,
                &with_schema(json!({
                    "value": float(report.value),
                    "resolution": report.resolution,
                    "error_estimate": float(report.error_estimate),
                })),
            )
        }
        Command::Topology { k } => {
            let k = f64::from_literal("k", &k)?;
            let mut v = json!({ "topology": format!("{:?}", level_topology(k)) });
            if let Ok((plus, minus)) = slopes(k) {
                v["slopes"] = json!([float(plus), float(minus)]);
            }
            print_json(out, &with_schema(v))
        }
        Command::Psi { a, b } => {
            let c = psi(f64::from_literal("a", &a)?, f64::from_literal("b", &b)?);
            print_json(out, &with_schema(json!({ "character": character_json(&c), "kappa": float(kappa(&c)) })))
        }
        Command::Bq { point: p, c, budget: b, exact } => {
            let report = if exact {
                bq_check(&point::<BigRational>(&p)?, &BigRational::from_literal("c", &c)?, &budget(&b)?)?
            } else {
                bq_check(&point::<f64>(&p)?, &f64::from_literal("c", &c)?, &budget(&b)?)?
            };
            print_json(out, &bq_json(&report))
        }
    }
}

fn rayon_pool(n: usize) -> Outcome<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Failure::Domain(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Failure::Io));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Flag(msg)) => Cli::command().error(ErrorKind::ValueValidation, msg).exit(),
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
