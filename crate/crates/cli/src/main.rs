//! `homlab`: classify periodic diffusion matrices, dump their third-order
//! tensors and invariant measures, rerun the property suites and measure
//! Dirichlet homogenization rates.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nondiv_hom::constructions::{gallery, GALLERY_NAMES};
use nondiv_hom::dirichlet::{preset, run_rate_experiment, BvpSpecFile, RateConfig, RateExperiment, PRESET_NAMES};
use nondiv_hom::field::{upper_pairs, MatrixFieldSpec};
use nondiv_hom::homogenize::{classify, CellSolution, ClassificationReport, ThirdOrderTensor};
use nondiv_hom::suites::{run_suite, SuiteConfig, SuiteReport, SUITE_NAMES};
use nondiv_hom::{ClassifyConfig, Coefficients64, HomError, SolverConfig, Verdict};

#[derive(Parser, Debug)]
#[command(name = "homlab", version, about = "Homogenization laboratory for nondivergence-form operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-resolution type-eps^2 / type-eps verdict. Exit 2 when unresolved.
    Classify(FieldArgs),
    /// The tensor c_j^{kl}, its symmetrization and the effective matrix.
    Tensor(FieldArgs),
    /// The invariant measure r on the solver grid.
    Invariant(FieldArgs),
    /// List the gallery, or recompute one entry against its references.
    Gallery(GalleryArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
    /// Dirichlet rate experiment over a list of eps.
    Rate(RateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FieldSource {
    /// Gallery field name.
    #[arg(long)]
    gallery: Option<String>,
    /// Matrix field JSON document.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[command(flatten)]
    source: FieldSource,
    /// Base grid resolution N (the verdict also uses 2N).
    #[arg(long, value_parser = resolution_in_range)]
    resolution: Option<usize>,
    /// Krylov tolerance.
    #[arg(long, value_parser = tolerance_in_range)]
    tolerance: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct GalleryArgs {
    /// Entry to recompute; lists all entries when absent.
    name: Option<String>,
    #[arg(long, value_parser = resolution_in_range)]
    resolution: Option<usize>,
    #[arg(long, value_parser = tolerance_in_range)]
    tolerance: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One of thm11, lemma22, thm12, thm13, lemma31, lemma32, lemma33, density, gallery_refs.
    suite: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, value_parser = tolerance_in_range)]
    tolerance: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
#[group(id = "rate_source", required = true, multiple = false)]
struct RateSource {
    /// Rate spec JSON.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in spec.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[command(flatten)]
    source: RateSource,
    /// Measure errors on [1/4, 3/4]^n instead of the whole domain.
    #[arg(long)]
    interior: bool,
    /// Krylov tolerance of the Dirichlet solves.
    #[arg(long, value_parser = tolerance_in_range)]
    tolerance: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

fn resolution_in_range(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if !(16..=512).contains(&n) {
        return Err(format!("resolution {n} outside [16, 512]"));
    }
    Ok(n)
}

fn tolerance_in_range(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(1e-15..=1e-2).contains(&t) {
        return Err(format!("tolerance {t} outside [1e-15, 1e-2]"));
    }
    Ok(t)
}

/// What a command produced and how the process should exit.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

type CliResult<T> = Result<T, HomError>;

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn load_field(src: &FieldSource) -> CliResult<Coefficients64> {
    match (&src.gallery, &src.input) {
        (Some(name), _) => Ok(gallery::<f64>(name)?.field),
        (_, Some(path)) => MatrixFieldSpec::parse(&read(path)?)?.to_field(),
        _ => Err(HomError::Invalid("no input given".into())),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| HomError::Invalid(format!("{}: {e}", path.display())))
}

fn solver(tolerance: Option<f64>) -> SolverConfig {
    let mut s = SolverConfig::default();
    if let Some(t) = tolerance {
        s.tolerance = t;
    }
    s
}

fn tensor_csv(t: &ThirdOrderTensor<f64>) -> String {
    let mut s = String::from("j,k,l,c,c_sym\n");
    for j in 0..t.dim {
        for (k, l) in upper_pairs(t.dim) {
            writeln!(s, "{},{},{},{:e},{:e}", j + 1, k + 1, l + 1, t.c[j][k][l], t.c_sym[j][k][l]).unwrap();
        }
    }
    s
}

fn tensor_table(t: &ThirdOrderTensor<f64>) -> String {
    let mut s = String::new();
    writeln!(s, "resolution {} ({:?})", t.resolution, t.discretization).unwrap();
    writeln!(s, "effective matrix").unwrap();
    for k in 0..t.dim {
        let row: Vec<String> = (0..t.dim).map(|l| format!("{:>14.9}", t.effective[k][l])).collect();
        writeln!(s, "  {}", row.join(" ")).unwrap();
    }
    writeln!(s, "{:<10} {:>16} {:>16}", "entry", "c", "C (sym)").unwrap();
    for j in 0..t.dim {
        for (k, l) in upper_pairs(t.dim) {
            let name = format!("c_{}^{}{}", j + 1, k + 1, l + 1);
            writeln!(s, "{name:<10} {:>16.9e} {:>16.9e}", t.c[j][k][l], t.c_sym[j][k][l]).unwrap();
        }
    }
    s
}

fn classify_text(rep: &ClassificationReport<f64>, format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Json => json(rep)?,
        Format::Csv => {
            let mut s = String::from("verdict,max_c,threshold,gap,coarse,fine\n");
            writeln!(s, "{:?},{:e},{:e},{:e},{},{}", rep.verdict, rep.max_c, rep.threshold, rep.gap, rep.resolutions.0, rep.resolutions.1).unwrap();
            s
        }
        Format::Table => {
            let mut s = String::new();
            writeln!(s, "verdict    {} ({:?} criterion)", rep.verdict, rep.criterion).unwrap();
            writeln!(s, "max entry  {:.6e} at N = {}", rep.max_c, rep.resolutions.1).unwrap();
            writeln!(s, "threshold  {:.3e}", rep.threshold).unwrap();
            writeln!(s, "gap        {:.3e} between N = {} and N = {}", rep.gap, rep.resolutions.0, rep.resolutions.1).unwrap();
            s + &tensor_table(&rep.tensor)
        }
    })
}

fn cmd_classify(args: &FieldArgs) -> CliResult<Outcome> {
    let field = load_field(&args.source)?;
    let cfg = ClassifyConfig { solver: solver(args.tolerance), resolution: args.resolution, ..Default::default() };
    let rep = classify(&field, &cfg)?;
    let code = if rep.verdict == Verdict::Unresolved { 2 } else { 0 };
    Ok(Outcome { text: classify_text(&rep, args.out.format)?, code })
}

fn cell_solution(args: &FieldArgs) -> CliResult<CellSolution<f64>> {
    let field = load_field(&args.source)?;
    let mut cfg = solver(args.tolerance);
    cfg.resolution = args.resolution;
    CellSolution::new(&field, &cfg)
}

fn cmd_tensor(args: &FieldArgs) -> CliResult<Outcome> {
    let t = cell_solution(args)?.tensor();
    Ok(Outcome::ok(match args.out.format {
        Format::Json => json(&t)?,
        Format::Csv => tensor_csv(&t),
        Format::Table => tensor_table(&t),
    }))
}

#[derive(Serialize)]
struct InvariantSummary {
    dimension: usize,
    resolution: usize,
    min: f64,
    max: f64,
    mean: f64,
    values: Vec<f64>,
}

fn cmd_invariant(args: &FieldArgs) -> CliResult<Outcome> {
    let sol = cell_solution(args)?;
    let values = sol.r.clone();
    let n = sol.resolution();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let summary = InvariantSummary { dimension: sol.dim(), resolution: n, min, max, mean, values };
    Ok(Outcome::ok(match args.out.format {
        Format::Json => json(&summary)?,
        Format::Csv => {
            let mut s = String::from(if sol.dim() == 3 { "i1,i2,i3,r\n" } else { "i1,i2,r\n" });
            for (idx, v) in summary.values.iter().enumerate() {
                let ix = nondiv_hom::field::fft::unravel(idx, sol.dim(), n);
                let cols: Vec<String> = ix[..sol.dim()].iter().map(|i| i.to_string()).collect();
                writeln!(s, "{},{v:e}", cols.join(",")).unwrap();
            }
            s
        }
        Format::Table => format!(
            "invariant measure on a {n}^{} grid\n  min  {min:.12}\n  max  {max:.12}\n  mean {mean:.12}\n",
            sol.dim()
        ),
    }))
}

#[derive(Serialize)]
struct ReferenceRow {
    entry: String,
    reference: String,
    computed: f64,
    passed: bool,
}

#[derive(Serialize)]
struct GalleryReport {
    name: String,
    citation: String,
    expected_verdict: Verdict,
    verdict: Verdict,
    references: Vec<ReferenceRow>,
    passed: bool,
}

fn cmd_gallery(args: &GalleryArgs) -> CliResult<Outcome> {
    let Some(name) = &args.name else {
        let rows: Vec<(String, usize, Verdict, String)> = GALLERY_NAMES
            .iter()
            .map(|&n| gallery::<f64>(n).map(|e| (n.to_string(), e.dim(), e.expected_verdict, e.citation.to_string())))
            .collect::<CliResult<_>>()?;
        return Ok(Outcome::ok(match args.out.format {
            Format::Json => json(&rows)?,
            Format::Csv => {
                let mut s = String::from("name,dimension,expected_verdict\n");
                for (n, d, v, _) in &rows {
                    writeln!(s, "{n},{d},{v:?}").unwrap();
                }
                s
            }
            Format::Table => {
                let mut s = String::new();
                for (n, d, v, c) in &rows {
                    writeln!(s, "{n:<24} n={d}  {:<11} {c}", v.to_string()).unwrap();
                }
                s
            }
        }));
    };
    let entry = gallery::<f64>(name)?;
    let n = args.resolution.unwrap_or(if entry.dim() == 3 { 32 } else { 64 });
    let cfg = ClassifyConfig { solver: solver(args.tolerance), resolution: Some(n), ..Default::default() };
    let rep = classify(&entry.field, &cfg)?;
    let references: Vec<ReferenceRow> = entry
        .references
        .iter()
        .map(|r| {
            let (computed, passed) = r.check(&rep.tensor);
            ReferenceRow { entry: format!("c_{}^{}{}", r.j + 1, r.k + 1, r.l + 1), reference: r.value.describe(), computed, passed }
        })
        .collect();
    let passed = references.iter().all(|r| r.passed) && rep.verdict == entry.expected_verdict;
    let report = GalleryReport {
        name: entry.name.to_string(),
        citation: entry.citation.to_string(),
        expected_verdict: entry.expected_verdict,
        verdict: rep.verdict,
        references,
        passed,
    };
    let text = match args.out.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut s = String::from("entry,reference,computed,passed\n");
            for r in &report.references {
                writeln!(s, "{},{},{:e},{}", r.entry, r.reference, r.computed, r.passed).unwrap();
            }
            s
        }
        Format::Table => {
            let mut s = format!("{}: {}\nverdict {} (expected {})\n", report.name, report.citation, report.verdict, report.expected_verdict);
            for r in &report.references {
                let mark = if r.passed { "ok" } else { "FAIL" };
                writeln!(s, "  {:<8} {:>16.9e}  ref {:<18} {mark}", r.entry, r.computed, r.reference).unwrap();
            }
            s
        }
    };
    Ok(Outcome { text, code: if passed { 0 } else { 1 } })
}

fn suite_text(r: &SuiteReport, format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Json => json(r)?,
        Format::Csv => {
            let mut s = String::from("label,value,limit,passed\n");
            for c in &r.checks {
                writeln!(s, "\"{}\",{:e},{:e},{}", c.label.replace('"', "'"), c.value, c.limit, c.passed).unwrap();
            }
            s
        }
        Format::Table => {
            let failed = r.failures().count();
            let mut s = format!("suite {} seed {} trials {}: {} checks, {failed} failed\n", r.suite, r.seed, r.trials, r.checks.len());
            for c in r.failures() {
                writeln!(s, "  FAIL {} ({:.3e} > {:.3e})", c.label, c.value, c.limit).unwrap();
            }
            s
        }
    })
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<Outcome> {
    if !SUITE_NAMES.contains(&args.suite.as_str()) {
        return Err(HomError::UnknownName(format!("{} (suites: {})", args.suite, SUITE_NAMES.join(", "))));
    }
    let cfg = SuiteConfig { trials: args.trials, seed: args.seed, solver: solver(args.tolerance), ..Default::default() };
    let report = run_suite(&args.suite, &cfg)?;
    if !report.passed {
        if let Some(first) = report.failures().next() {
            eprintln!("first failure: {} ({:e} > {:e})", first.label, first.value, first.limit);
        }
    }
    Ok(Outcome { text: suite_text(&report, args.out.format)?, code: if report.passed { 0 } else { 1 } })
}

fn rate_csv(exp: &RateExperiment) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epsilon", "error_u", "error_z"]).map_err(|e| HomError::Invalid(e.to_string()))?;
    for r in &exp.rows {
        w.write_record([format!("{:e}", r.epsilon), format!("{:e}", r.error_u), format!("{:e}", r.error_z)])
            .map_err(|e| HomError::Invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HomError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn slope(fit: Option<nondiv_hom::dirichlet::RateFit>) -> String {
    fit.map(|f| format!("{:.3} (fit residual {:.3})", f.slope, f.residual)).unwrap_or_else(|| "n/a".into())
}

fn cmd_rate(args: &RateArgs) -> CliResult<Outcome> {
    let spec = match (&args.source.input, &args.source.preset) {
        (Some(path), _) => BvpSpecFile::parse(&read(path)?)?.to_spec::<f64>()?,
        (_, Some(name)) => preset::<f64>(name).map_err(|e| match e {
            HomError::UnknownName(n) => HomError::UnknownName(format!("{n} (presets: {})", PRESET_NAMES.join(", "))),
            other => other,
        })?,
        _ => return Err(HomError::Invalid("no rate spec given".into())),
    };
    let mut cfg = RateConfig { interior: args.interior, ..Default::default() };
    if let Some(t) = args.tolerance {
        cfg.solver.tolerance = t;
    }
    let exp = run_rate_experiment(&spec, &cfg)?;
    let summary = format!("fitted rate u: {}\nfitted rate z: {}\nflags: {:?}\n", slope(exp.fit_u), slope(exp.fit_z), exp.flags);
    let text = match args.out.format {
        Format::Json => json(&exp)?,
        Format::Csv => {
            if args.out.output.is_some() {
                eprint!("{summary}");
            }
            rate_csv(&exp)?
        }
        Format::Table => {
            let norm = if exp.interior_norm { "[1/4, 3/4]^n" } else { "whole grid" };
            let mut s = format!("sup norm over {norm}\n{:>12} {:>14} {:>14}\n", "eps", "|u^e - u|", "|u^e - u + 2ez|");
            for r in &exp.rows {
                writeln!(s, "{:>12.6} {:>14.6e} {:>14.6e}", r.epsilon, r.error_u, r.error_z).unwrap();
            }
            s + &summary
        }
    };
    Ok(Outcome::ok(text))
}

fn run(cli: &Cli) -> CliResult<(Outcome, Option<&Path>)> {
    Ok(match &cli.command {
        Command::Classify(a) => (cmd_classify(a)?, a.out.output.as_deref()),
        Command::Tensor(a) => (cmd_tensor(a)?, a.out.output.as_deref()),
        Command::Invariant(a) => (cmd_invariant(a)?, a.out.output.as_deref()),
        Command::Gallery(a) => (cmd_gallery(a)?, a.out.output.as_deref()),
        Command::Verify(a) => (cmd_verify(a)?, a.out.output.as_deref()),
        Command::Rate(a) => (cmd_rate(a)?, a.out.output.as_deref()),
    })
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for unresolved verdicts
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((outcome, path)) => {
            match path {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, &outcome.text) {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{}", outcome.text),
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
