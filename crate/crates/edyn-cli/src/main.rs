//! `edyn`: command-line front end for effective dynamical systems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use edyn::algebraic::{exclusion_sweep, format_values, parse_values, box_excluded, AlgebraicPresentation, TorusPointPrefix};
use edyn::cantor::{brouwer_encode, parse_word, word_str, BrouwerOptions};
use edyn::covers::{refine_cover_sequence, subshift_cover_forbidden, EffectiveCover, Window};
use edyn::dynprops::{periods_complement, system_by_name, system_from_json, weds_check};
use edyn::extension::{build_extension, EdsSpec, ExtensionTower};
use edyn::groups::{subshift_pullback, SubshiftSpec};
use edyn::kernel::rational::{fmt_q, parse_q};
use edyn::kernel::{semi_decide_empty, Cell, EffClosedSet, Point, SeqPoint, Space};
use edyn::{Error, Fuel, SemiDecision};

#[derive(Parser)]
#[command(name = "edyn", version, about = "Certified computations on effective dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Fuel budget; falls back to EDYN_DEFAULT_FUEL.
    #[arg(long, global = true)]
    fuel: Option<Fuel>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Built-in system name (odometer, shift, golden_mean, lamplighter, full_shift, identity, rotation, circles, tower, ...).
    #[arg(long, conflicts_with = "system")]
    builtin: Option<String>,
    /// Parameters for --builtin as JSON.
    #[arg(long, default_value = "null")]
    params: String,
    /// JSON system spec {"builtin": name, "params": {...}}.
    #[arg(long)]
    system: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct WindowArgs {
    #[arg(long, default_value_t = 1)]
    radius: usize,
    /// Use the full ball of words instead of positive words.
    #[arg(long)]
    ball: bool,
}

impl WindowArgs {
    fn window(&self) -> Window {
        if self.ball {
            Window::Ball(self.radius)
        } else {
            Window::Forward(self.radius)
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the forbidden cover patterns of the subshift cover.
    Forbid {
        #[command(flatten)]
        sys: SystemArgs,
        /// depth:d (cylinders), arcs:m (equal arcs), refine:n, or a cover JSON file.
        #[arg(long, default_value = "depth:1")]
        partition: String,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Print the n-th refined cover, or verify a cover file.
    Cover {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Semi-decide whether the carrier misses a cylinder or arc.
    Empty {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, conflicts_with = "arc")]
        cylinder: Option<String>,
        /// a,b
        #[arg(long)]
        arc: Option<String>,
    },
    /// Brouwer encoding of the carrier.
    Encode {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Zero-dimensional extension tower.
    Extend {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[command(flatten)]
        window: WindowArgs,
        /// Evaluate the factor map on the orbit coding of the point with this prefix.
        #[arg(long)]
        eval: Option<String>,
        #[arg(long, default_value_t = 1)]
        precision: usize,
    },
    /// Exclusion sweep of an algebraic presentation.
    Algebraic {
        /// Presentation JSON; the harmonic model when absent.
        #[arg(long)]
        presentation: Option<PathBuf>,
        /// Comma-separated window words.
        #[arg(long, default_value = ",a,b,ab")]
        window: String,
        #[arg(long, default_value_t = 2)]
        precision: u32,
        /// Test the single box with these comma-separated values.
        #[arg(long)]
        values: Option<String>,
    },
    /// Certify non-periods n in a range a..b.
    Periods {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value = "1..4")]
        range: String,
    },
    /// Forbidden table of the cylinder coding at a depth.
    Weds {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Forbidden codings of the pullback of a subshift.
    Pullback {
        /// Built-in subshift name.
        #[arg(long, conflicts_with = "subshift")]
        builtin: Option<String>,
        /// Subshift JSON file.
        #[arg(long)]
        subshift: Option<PathBuf>,
    },
}

struct Report {
    text: String,
    json: Value,
    /// False when some query stayed undetermined within the fuel, or an enumeration emitted nothing.
    determined: bool,
}

enum Failure {
    Fuel(String),
    Spec(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NeedsMoreFuel(_) => Failure::Fuel(e.to_string()),
            _ => Failure::Spec(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn spec_err(path: &str, msg: impl Into<String>) -> Failure {
    Failure::from(Error::spec(path, msg))
}

fn read_json(path: &PathBuf) -> Res<Value> {
    let s = std::fs::read_to_string(path).map_err(|e| Failure::Spec(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Failure::Spec(format!("{}: {e}", path.display())))
}

fn load_system(a: &SystemArgs) -> Res<EdsSpec> {
    match (&a.builtin, &a.system) {
        (Some(name), None) => {
            let params: Value = serde_json::from_str(&a.params).map_err(|e| spec_err("params", e.to_string()))?;
            Ok(system_by_name(name, &params)?)
        }
        (None, Some(path)) => Ok(system_from_json(&read_json(path)?)?),
        _ => Err(Failure::Spec("give exactly one of --builtin and --system".into())),
    }
}

fn fuel_of(cli: &Cli) -> Res<Fuel> {
    if let Some(f) = cli.fuel {
        return Ok(f);
    }
    match std::env::var("EDYN_DEFAULT_FUEL") {
        Ok(s) => s.trim().parse().map_err(|_| spec_err("EDYN_DEFAULT_FUEL", format!("not a fuel amount: {s:?}"))),
        Err(_) => Err(Failure::Spec("no fuel given: pass --fuel or set EDYN_DEFAULT_FUEL".into())),
    }
}

fn all_words(arity: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| (0..arity).map(move |s| [w.clone(), vec![s]].concat())).collect();
    }
    out
}

fn make_cover(e: &EdsSpec, partition: &str, fuel: Fuel) -> Res<EffectiveCover> {
    let (kind, arg) = partition.split_once(':').unwrap_or(("file", partition));
    let num = || arg.parse::<usize>().map_err(|_| spec_err("partition", format!("bad number {arg:?}")));
    match kind {
        "depth" => {
            let Space::Cantor { arity } = e.space() else {
                return Err(spec_err("partition", "depth partitions need a Cantor space"));
            };
            Ok(EffectiveCover::cylinders(e.carrier.clone(), &all_words(*arity, num()?), fuel)?)
        }
        "arcs" => {
            let m = num()? as i64;
            if m == 0 {
                return Err(spec_err("partition", "need at least one arc"));
            }
            let cuts: Vec<_> = (0..=m).map(|i| edyn::kernel::rational::q(i, m)).collect();
            Ok(EffectiveCover::arcs(e.carrier.clone(), &cuts, fuel)?)
        }
        "refine" => Ok(refine_cover_sequence(e.carrier.clone(), num()?, matches!(e.space(), Space::Cantor { .. }), fuel)?),
        _ => Ok(EffectiveCover::from_json(e.carrier.clone(), &read_json(&PathBuf::from(arg))?, fuel)?),
    }
}

fn forbid(e: &EdsSpec, partition: &str, window: Window, fuel: Fuel) -> Res<Report> {
    let cover = make_cover(e, partition, fuel)?;
    let pats = subshift_cover_forbidden(&e.action, &cover, window, fuel)?;
    let g = &e.group.gens;
    let mut text = String::new();
    for p in &pats {
        text += &format!("{}\n", p.display(g));
    }
    text += &format!("{} forbidden patterns over {} pieces, window {:?}\n", pats.len(), cover.len(), window);
    let json = json!({
        "patterns": pats.iter().map(|p| p.to_json(g)).collect::<Vec<_>>(),
        "summary": {"count": pats.len(), "pieces": cover.len(), "window": format!("{window:?}"), "fuel": fuel},
    });
    Ok(Report { text, json, determined: true })
}

fn cover(e: &EdsSpec, level: usize, verify: &Option<PathBuf>, fuel: Fuel) -> Res<Report> {
    let c = match verify {
        Some(p) => EffectiveCover::from_json(e.carrier.clone(), &read_json(p)?, fuel)?,
        None => refine_cover_sequence(e.carrier.clone(), level, matches!(e.space(), Space::Cantor { .. }), fuel)?,
    };
    let json = c.to_json()?;
    let text = format!(
        "{} pieces, diameter {}, certificate at fuel {}\n",
        c.len(),
        fmt_q(&c.diameter()),
        c.certificate.fuel.map_or("-".into(), |f| f.to_string())
    );
    Ok(Report { text, json, determined: true })
}

fn empty(e: &EdsSpec, cylinder: &Option<String>, arc: &Option<String>, fuel: Fuel) -> Res<Report> {
    let space = e.space().clone();
    let cell = match (cylinder, arc, &space) {
        (Some(w), None, Space::Cantor { arity }) => Cell::word(&parse_word(w, *arity)?),
        (None, Some(a), Space::Circle | Space::Interval) => {
            let (x, y) = a.split_once(',').ok_or_else(|| spec_err("arc", "expected a,b"))?;
            Cell::Seg(parse_q(x.trim())?, parse_q(y.trim())?)
        }
        _ => return Err(spec_err("cylinder", format!("need --cylinder for Cantor spaces or --arc for {}", space.name()))),
    };
    let d = semi_decide_empty(&EffClosedSet::cell(space, cell), &*e.carrier, fuel)?;
    Ok(decision_report(d, fuel))
}

fn decision_report(d: SemiDecision, fuel: Fuel) -> Report {
    match d {
        SemiDecision::Accepted(f) => Report {
            text: format!("accepted (fuel {f})\n"),
            json: json!({"outcome": "accepted", "fuel": f}),
            determined: true,
        },
        SemiDecision::Undetermined => Report {
            text: format!("undetermined within fuel {fuel}\n"),
            json: json!({"outcome": "undetermined", "fuel": fuel}),
            determined: false,
        },
    }
}

fn encode(e: &EdsSpec, levels: usize, fuel: Fuel) -> Res<Report> {
    let enc = brouwer_encode(e.carrier.clone(), &BrouwerOptions { levels, fuel, ..Default::default() })?;
    let json = enc.tree.to_json(levels);
    let mut text = String::new();
    if let Some(nodes) = json.get("nodes").and_then(Value::as_array) {
        for n in nodes {
            text += &format!("{} -> {}\n", n["word"], n["code"]);
        }
    }
    Ok(Report { text, json, determined: true })
}

fn tower_json(t: &ExtensionTower) -> Res<Value> {
    let g = &t.eds.group.gens;
    let levels = t
        .levels
        .iter()
        .map(|l| {
            Ok(json!({
                "cover": l.cover.to_json()?,
                "inclusions": l.cover.inclusions,
                "forbidden": l.forbidden.iter().map(|p| p.to_json(g)).collect::<Vec<_>>(),
                "chains": l.chains,
            }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(json!({"system": t.eds.name, "window": format!("{:?}", t.window), "fuel": t.fuel, "levels": levels}))
}

fn extend(e: &EdsSpec, levels: usize, window: Window, eval: &Option<String>, precision: usize, fuel: Fuel) -> Res<Report> {
    let t = build_extension(e, levels, window, fuel)?;
    let mut json = tower_json(&t)?;
    let mut text = String::new();
    for (k, l) in t.levels.iter().enumerate() {
        text += &format!(
            "level {}: {} pieces, {} chains, {} forbidden patterns\n",
            k + 1,
            l.cover.len(),
            l.chains.len(),
            l.forbidden.len()
        );
    }
    text += &format!("nesting {}\n", if t.nesting_holds() { "holds" } else { "fails" });
    if let Some(prefix) = eval {
        let Space::Cantor { arity } = e.space() else {
            return Err(spec_err("eval", "--eval takes a Cantor prefix"));
        };
        let x = Point::Seq(SeqPoint::new(parse_word(prefix, *arity)?, 0));
        let z = t.orbit_coding(&x, &window.words(&e.group.gens))?;
        let b = t.factor_eval(&z, precision)?;
        text += &format!("factor({prefix}0^∞) at precision {precision}: ball({}, {})\n", b.center, fmt_q(&b.radius));
        json["eval"] = json!({"point": x.to_string(), "precision": precision, "center": b.center.to_string(), "radius": fmt_q(&b.radius)});
    }
    Ok(Report { text, json, determined: true })
}

fn algebraic(presentation: &Option<PathBuf>, window: &str, precision: u32, values: &Option<String>, fuel: Fuel) -> Res<Report> {
    let pres = match presentation {
        Some(p) => AlgebraicPresentation::from_json(&read_json(p)?)?,
        None => AlgebraicPresentation::harmonic(),
    };
    let gens = pres.gens().clone();
    let words = window.split(',').map(|w| gens.parse(w.trim())).collect::<Result<Vec<_>, Error>>()?;
    if let Some(v) = values {
        let vals = parse_values(v)?;
        let coords: Vec<_> = (0..pres.n).flat_map(|i| words.iter().map(move |w| (i, w.clone()))).collect();
        if vals.len() != coords.len() {
            return Err(spec_err("values", format!("expected {} values", coords.len())));
        }
        let x = TorusPointPrefix::new(coords.into_iter().zip(vals.iter().cloned()), precision);
        let ex = box_excluded(&pres, &x.to_cell(&pres), fuel);
        let verdict = if ex { "excluded" } else { "not excluded" };
        return Ok(Report {
            text: format!("{}: {verdict}\n", format_values(&vals)),
            json: json!({"values": vals.iter().map(fmt_q).collect::<Vec<_>>(), "excluded": ex, "fuel": fuel}),
            determined: ex,
        });
    }
    let rows = exclusion_sweep(&pres, &words, precision, fuel);
    let excluded: Vec<_> = rows.iter().filter(|r| r.excluded).collect();
    let mut text: String = excluded.iter().map(|r| format!("{}\n", format_values(&r.values))).collect();
    text += &format!("{} of {} boxes excluded at precision {precision}\n", excluded.len(), rows.len());
    let json = json!({
        "precision": precision,
        "window": words.iter().map(|w| gens.format(w)).collect::<Vec<_>>(),
        "boxes": rows.len(),
        "excluded": excluded.iter().map(|r| r.values.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, determined: !excluded.is_empty() })
}

fn parse_range(s: &str) -> Res<std::ops::RangeInclusive<i64>> {
    let bad = || spec_err("range", format!("expected a..b, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    Ok(a.trim().parse().map_err(|_| bad())?..=b.trim().parse().map_err(|_| bad())?)
}

fn periods(e: &EdsSpec, range: &str, fuel: Fuel) -> Res<Report> {
    let range = parse_range(range)?;
    let certs = periods_complement(e, range.clone(), fuel)?;
    let mut text: String = certs.iter().map(|c| format!("no point has period {} (fuel {})\n", c.n, c.fuel)).collect();
    let open: Vec<i64> = range.filter(|n| certs.iter().all(|c| c.n != *n)).collect();
    if !open.is_empty() {
        text += &format!("undetermined: {open:?}\n");
    }
    let json = json!({"certificates": certs.iter().map(|c| c.to_json()).collect::<Vec<_>>(), "undetermined": open});
    Ok(Report { text, json, determined: open.is_empty() })
}

fn weds(e: &EdsSpec, depth: usize, window: Window, fuel: Fuel) -> Res<Report> {
    let t = weds_check(e, depth, window, fuel)?;
    let g = &e.group.gens;
    let mut text: String = t.words.iter().enumerate().map(|(i, w)| format!("piece {i}: [{}]\n", word_str(w))).collect();
    for p in &t.forbidden {
        text += &format!("{}\n", p.display(g));
    }
    text += &format!("{} forbidden patterns at depth {depth}\n", t.forbidden.len());
    let json = json!({
        "depth": depth,
        "pieces": t.words.iter().map(|w| word_str(w)).collect::<Vec<_>>(),
        "forbidden": t.forbidden.iter().map(|p| p.to_json(g)).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, determined: true })
}

fn pullback(builtin: &Option<String>, file: &Option<PathBuf>, fuel: Fuel) -> Res<Report> {
    let x = match (builtin, file) {
        (Some(name), None) => SubshiftSpec::builtin(name)?,
        (None, Some(p)) => SubshiftSpec::from_json(&read_json(p)?)?,
        _ => return Err(Failure::Spec("give exactly one of --builtin and --subshift".into())),
    };
    let y = subshift_pullback(&x);
    let codings = y.forbidden_prefix(fuel);
    let g = &y.group.gens;
    let mut text: String = codings.iter().map(|c| format!("{}\n", c.to_json(g, &y.alphabet)["entries"])).collect();
    text += &format!("{} forbidden codings within fuel {fuel}\n", codings.len());
    Ok(Report { text, json: y.to_json(fuel), determined: !codings.is_empty() })
}

fn run(cli: &Cli) -> Res<Report> {
    let fuel = fuel_of(cli)?;
    match &cli.command {
        Command::Forbid { sys, partition, window } => forbid(&load_system(sys)?, partition, window.window(), fuel),
        Command::Cover { sys, level, verify } => cover(&load_system(sys)?, *level, verify, fuel),
        Command::Empty { sys, cylinder, arc } => empty(&load_system(sys)?, cylinder, arc, fuel),
        Command::Encode { sys, levels } => encode(&load_system(sys)?, *levels, fuel),
        Command::Extend { sys, levels, window, eval, precision } => {
            extend(&load_system(sys)?, *levels, window.window(), eval, *precision, fuel)
        }
        Command::Algebraic { presentation, window, precision, values } => {
            algebraic(presentation, window, *precision, values, fuel)
        }
        Command::Periods { sys, range } => periods(&load_system(sys)?, range, fuel),
        Command::Weds { sys, depth, window } => weds(&load_system(sys)?, *depth, window.window(), fuel),
        Command::Pullback { builtin, subshift } => pullback(builtin, subshift, fuel),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            match cli.format {
                Format::Text => print!("{}", r.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&r.json).expect("serializable")),
            }
            ExitCode::from(if r.determined { 0 } else { 2 })
        }
        Err(Failure::Fuel(m)) => {
            eprintln!("edyn: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Spec(m)) => {
            eprintln!("edyn: {m}");
            ExitCode::from(1)
        }
    }
}
