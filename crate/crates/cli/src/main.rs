use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gl2measure::checks::{run_suite, Suite};
use gl2measure::serial::dddset_to_doc;
use gl2measure::{
    common_refinement, f_integrate, f_mu, family_integral, integrate, is_refinement, CircleFamily, Error, GlobalParams,
    MeasureContext, ValueElem, Workspace,
};

#[derive(Parser, Debug)]
#[command(name = "gl2measure", version, about = "Haar measure and integration on GL2 of a two-dimensional local field")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Residue field size (a prime).
    #[arg(long, global = true, default_value_t = 2)]
    q: u32,
    /// Stored t1-exponent range, as LO,HI.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    t1_window: Option<(i32, i32)>,
    /// Stored t2-exponent range, as LO,HI.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    t2_window: Option<(i32, i32)>,
    /// Highest X-exponent kept in series results.
    #[arg(long, global = true, default_value_t = 8)]
    x_trunc: i64,
    /// Maximum number of cosets any single enumeration may produce.
    #[arg(long, global = true, default_value_t = 100_000)]
    coset_budget: u64,
    /// Seed for the property suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// `structured` prints JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run independent property cases on separate threads.
    #[arg(long, global = true)]
    parallel: bool,
    /// JSON workspace with named sets and functions.
    #[arg(long, short = 'w', global = true)]
    workspace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure of a named set.
    Measure { set: String },
    /// Integral of a named function.
    Integrate { function: String },
    /// Common refinement of two presentations of the same set.
    Refine { a: String, b: String },
    /// Run randomised property suites.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        /// Random cases per property.
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Integrals of |det g|^s over unions of determinant circles.
    Examples {
        #[arg(value_enum)]
        kind: ExampleKind,
        /// Positive integer exponent of |det g|.
        #[arg(long, default_value_t = 1)]
        s: i64,
        /// Lowest t1-exponent of the quarter plane.
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        m: i64,
        /// Lowest t2-exponent of the quarter plane.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        /// Highest X-exponent kept; defaults to --x-trunc.
        #[arg(long)]
        trunc: Option<i64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Invariants,
    Oracle,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExampleKind {
    Disc,
    Quarter,
    Triangle,
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let lo = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

/// What a command produced: its rendering in both formats and whether it
/// counts as success.
struct Report {
    text: String,
    doc: Value,
    ok: bool,
}

fn params(g: &GlobalArgs) -> Result<GlobalParams, Error> {
    let d = GlobalParams::default();
    let p = GlobalParams {
        q: g.q,
        t1_window: g.t1_window.unwrap_or(d.t1_window),
        t2_window: g.t2_window.unwrap_or(d.t2_window),
        x_trunc: g.x_trunc,
        coset_budget: g.coset_budget,
    };
    p.validate()?;
    Ok(p)
}

fn load(g: &GlobalArgs) -> Result<Workspace, Error> {
    let p = params(g)?;
    match &g.workspace {
        None => Ok(Workspace::new(p)),
        Some(path) => {
            let s = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            Workspace::from_json(&s, &p)
        }
    }
}

fn value_report(key: &str, name: &str, v: ValueElem) -> Report {
    Report { text: v.to_string(), doc: json!({ key: name, "value": v.to_string() }), ok: true }
}

fn cmd_measure(ws: &Workspace, name: &str) -> Result<Report, Error> {
    if let Some(parts) = ws.fsets.get(name) {
        let v: ValueElem = parts.iter().map(f_mu).sum();
        return Ok(value_report("set", name, v));
    }
    let a = ws.set(name)?;
    let ctx = MeasureContext::new(ws.params.clone());
    Ok(value_report("set", name, ctx.mu(&a)))
}

fn cmd_integrate(ws: &Workspace, name: &str) -> Result<Report, Error> {
    if let Some(f) = ws.functions.get(name) {
        let ctx = MeasureContext::new(ws.params.clone());
        return Ok(value_report("function", name, integrate(&ctx, f)));
    }
    if let Some(f) = ws.ffunctions.get(name) {
        return Ok(value_report("function", name, f_integrate(f)));
    }
    Err(Error::UnknownName(name.to_string()))
}

fn cmd_refine(ws: &Workspace, a_name: &str, b_name: &str) -> Result<Report, Error> {
    let p = &ws.params;
    let a = ws.set(a_name)?;
    let b = ws.set(b_name)?;
    let r = common_refinement(&a, &b, p)?;
    let ctx = MeasureContext::new(p.clone());
    let refines_a = is_refinement(&a, &r.set, p)?;
    let refines_b = is_refinement(&b, &r.set, p)?;
    let (ma, mb, mr) = (ctx.mu(&a), ctx.mu(&b), ctx.mu(&r.set));
    let measures_equal = ma == mb && mb == mr;
    let refinement = serde_json::to_value(dddset_to_doc(&r.set)).expect("documents serialise");
    let text = format!(
        "{}\nrefines {a_name}: {refines_a}\nrefines {b_name}: {refines_b}\nmeasures equal: {measures_equal} ({mr})\niterations: {}",
        serde_json::to_string_pretty(&refinement).expect("documents serialise"),
        r.iterations
    );
    let doc = json!({
        "refinement": refinement,
        "iterations": r.iterations,
        "report": {
            "refines_a": refines_a,
            "refines_b": refines_b,
            "measures_equal": measures_equal,
            "measure": mr.to_string(),
        },
    });
    Ok(Report { text, doc, ok: refines_a && refines_b && measures_equal })
}

fn cmd_check(ws: &Workspace, kind: CheckKind, count: usize, seed: u64, parallel: bool) -> Report {
    let suite = match kind {
        CheckKind::Invariants => Suite::Invariants,
        CheckKind::Oracle => Suite::Oracle,
        CheckKind::All => Suite::All,
    };
    let results = run_suite(&ws.params, suite, seed, count, parallel);
    let ok = results.iter().all(|r| r.passed());
    let mut text = String::new();
    for r in &results {
        match &r.counterexample {
            None => text.push_str(&format!("PASS {} ({} cases)\n", r.name, r.cases)),
            Some(c) => text.push_str(&format!("FAIL {} (case {}): {c}\n", r.name, r.cases)),
        }
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    text.push_str(&format!("{passed}/{} properties passed", results.len()));
    let doc = json!({
        "q": ws.params.q,
        "seed": seed,
        "count": count,
        "passed": ok,
        "properties": results.iter().map(|r| json!({
            "name": r.name,
            "cases": r.cases,
            "passed": r.passed(),
            "counterexample": r.counterexample,
        })).collect::<Vec<_>>(),
    });
    Report { text, doc, ok }
}

fn cmd_examples(p: &GlobalParams, kind: ExampleKind, s: i64, m: i64, n: i64, trunc: Option<i64>) -> Result<Report, Error> {
    let fam = match kind {
        ExampleKind::Disc => CircleFamily::Disc,
        ExampleKind::Quarter => CircleFamily::QuarterPlane { m, n },
        ExampleKind::Triangle => CircleFamily::Triangle,
    };
    let v = family_integral(p.q, fam, s, trunc.unwrap_or(p.x_trunc))?;
    Ok(Report { text: v.to_string(), doc: json!({ "q": p.q, "s": s, "value": v.to_string() }), ok: true })
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let g = &cli.global;
    if let Command::Examples { kind, s, m, n, trunc } = &cli.command {
        return cmd_examples(&params(g)?, *kind, *s, *m, *n, *trunc);
    }
    let ws = load(g)?;
    match &cli.command {
        Command::Measure { set } => cmd_measure(&ws, set),
        Command::Integrate { function } => cmd_integrate(&ws, function),
        Command::Refine { a, b } => cmd_refine(&ws, a, b),
        Command::Check { kind, count } => Ok(cmd_check(&ws, *kind, *count, g.seed, g.parallel)),
        Command::Examples { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let structured = cli.global.format == Format::Structured;
    match run(&cli) {
        Ok(r) => {
            if structured {
                println!("{}", serde_json::to_string_pretty(&r.doc).expect("reports serialise"));
            } else {
                println!("{}", r.text);
            }
            if r.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            if structured {
                println!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            } else {
                eprintln!("error: {}: {e}", e.kind());
            }
            ExitCode::from(2)
        }
    }
}
