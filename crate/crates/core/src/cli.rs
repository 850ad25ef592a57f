//! Command-line front end. Input and output documents are JSON; `--format
//! table` renders the same records as aligned text.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::{analyze, FrobCharPoly, FrobReport};
use crate::kummer::{kummer_finding, KummerFinding, KummerInput};
use crate::lattice::GramMatrix;
use crate::predictor::{cross_validate, predict_reduction, predict_singular, K3CmInput, ReductionReport, ValidationRecord};
use crate::selftest::{run_all, CriterionResult};
use crate::sweep::{run_sweep, SweepKind, SweepResult};
use crate::witt::crystal::{max_precision, BetaEntry, CompElem};
use crate::witt::{
    artin_invariant_via_cokernel, bk_symbolic, fixed_module_basis, specialize_mod_u, FCrystal,
    LocalFieldData, DEFAULT_PRECISION,
};

pub const WORKERS_ENV: &str = "K3RED_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "k3red", version, about = "Reduction invariants of K3 surfaces with complex multiplication")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict reduction invariants from a CM input document.
    Predict {
        /// JSON document; reads standard input if absent or "-".
        input: Option<PathBuf>,
    },
    /// Singular K3 from the Gram matrix of its transcendental lattice.
    Singular {
        /// a1,a2,a3 of [[a1,a2],[a2,a3]].
        #[arg(long, allow_hyphen_values = true)]
        gram: String,
        #[arg(long)]
        p: u64,
    },
    /// Analyze a Frobenius characteristic polynomial.
    Frobenius {
        /// JSON document {"q":..,"p":..,"poly":[..]}; standard input if absent.
        input: Option<PathBuf>,
        /// Require a symmetric slope multiset.
        #[arg(long)]
        strict: bool,
    },
    /// Build the explicit crystal and compute its Artin invariant.
    Crystal {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Witt precision N (default 16, capped so that p^N fits in 63 bits).
        #[arg(long)]
        precision: Option<u32>,
        /// m with W(F_{p^m}); default d.
        #[arg(long)]
        residue_degree: Option<u32>,
        /// Lower Eisenstein coefficients c0,...,c_{e-1}; default T^e - p.
        #[arg(long, allow_hyphen_values = true)]
        eisenstein: Option<String>,
    },
    /// Kummer surface of a product of CM elliptic curves.
    Kummer {
        #[arg(long, default_value_t = -20, allow_hyphen_values = true)]
        d1: i64,
        #[arg(long, default_value_t = -15, allow_hyphen_values = true)]
        d2: i64,
        #[arg(long, default_value_t = 5)]
        p: u64,
    },
    /// Run a property grid: crystal, fixed-module or shimada.
    Sweep { kind: String },
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictOutput {
    pub report: ReductionReport,
    pub validation: ValidationRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedModuleOutput {
    pub rank: usize,
    pub residual_valuation: u32,
    /// One entry per vector: d components, each e rows of m coordinates.
    pub vectors: Vec<Vec<CompElem>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalOutput {
    pub p: u64,
    pub d: u32,
    pub e: u32,
    pub precision: u32,
    pub residue_degree: u32,
    pub eisenstein: Vec<i64>,
    pub extrapolated_normalization: bool,
    pub beta: Vec<BetaEntry>,
    pub bk_mod_u: Vec<(i32, i32)>,
    pub fixed_module: FixedModuleOutput,
    pub g_pi_snf_diagonal: Vec<u32>,
    pub fixed_module_snf_diagonal: Vec<u32>,
    pub artin_invariant: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestOutput {
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Rendering as aligned rows.
pub trait Tabular {
    fn rows(&self) -> Vec<(String, String)>;
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn report_rows(r: &ReductionReport) -> Vec<(String, String)> {
    let mut rows = vec![
        row("field", r.field),
        row("p", r.p),
        row("picard (over C)", r.picard_complex),
        row("picard", r.picard),
        row("height", r.height),
        row("supersingular", r.supersingular),
        row("artin invariant", r.artin_invariant),
        row("relative splitting", format!("{:?}", r.place.relative).to_lowercase()),
        row("[E_p:Q_p]", r.place.local_degree),
        row("[k(q):F_p]", r.place.kq_degree),
    ];
    for d in &r.diagnostics {
        rows.push(row(&format!("{:?}", d.severity).to_lowercase(), &d.message));
    }
    rows
}

impl Tabular for ReductionReport {
    fn rows(&self) -> Vec<(String, String)> {
        report_rows(self)
    }
}

impl Tabular for PredictOutput {
    fn rows(&self) -> Vec<(String, String)> {
        let mut rows = report_rows(&self.report);
        for c in &self.validation.checks {
            rows.push(row(&format!("check {}", c.name), format!("{:?}: {}", c.status, c.detail).to_lowercase()));
        }
        rows
    }
}

impl Tabular for FrobReport {
    fn rows(&self) -> Vec<(String, String)> {
        vec![
            row("degree", self.degree),
            row("picard", self.picard),
            row("height", self.height),
            row("supersingular", self.supersingular),
            row("roots with slope > 0", self.positive_slope_roots),
            row("roots with slope 0", self.unit_slope_roots),
            row("roots with slope < 0", self.negative_slope_roots),
        ]
    }
}

impl Tabular for CrystalOutput {
    fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            row("p", self.p),
            row("d", self.d),
            row("e", self.e),
            row("precision N", self.precision),
            row("residue degree m", self.residue_degree),
        ];
        for b in &self.beta {
            let scalar = b
                .value
                .iter()
                .enumerate()
                .all(|(j, r)| r.iter().enumerate().all(|(k, &x)| (j, k) == (0, 0) || x == 0));
            let shown = if scalar { format!("{} = {}", b.symbol, b.value[0][0]) } else { b.symbol.clone() };
            rows.push(row(&format!("beta_{}", b.index), shown));
        }
        rows.push(row("fixed-module rank", self.fixed_module.rank));
        rows.push(row("g_pi SNF valuations", format!("{:?}", self.g_pi_snf_diagonal)));
        rows.push(row("fixed-module SNF valuations", format!("{:?}", self.fixed_module_snf_diagonal)));
        rows.push(row("artin invariant", self.artin_invariant));
        if self.extrapolated_normalization {
            rows.push(row("note", "e > 1: extrapolated normalization"));
        }
        rows
    }
}

impl Tabular for KummerFinding {
    fn rows(&self) -> Vec<(String, String)> {
        let opt = |x: Option<u32>| x.map_or("-".to_string(), |v| v.to_string());
        vec![
            row("field", self.field),
            row("p", self.p),
            row("picard (over C)", self.picard_complex),
            row("doubled lattice disc", self.doubled_lattice_disc.map_or("-".into(), |v| v.to_string())),
            row("order index", self.order_index.map_or("-".into(), |v| v.to_string())),
            row("supersingular", self.supersingular),
            row("formula would give", opt(self.would_give)),
            row("recorded value", opt(self.actual)),
            row("failed assumptions", format!("{:?}", self.assumption_failed)),
            row("counterexample", self.counterexample),
        ]
    }
}

impl Tabular for SweepResult {
    fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![row("cells", self.cells), row("failures", self.failures)];
        rows.extend(
            self.results
                .iter()
                .map(|c| row(&c.key, format!("{} {}", if c.passed { "ok" } else { "FAIL" }, c.detail))),
        );
        rows
    }
}

impl Tabular for SelftestOutput {
    fn rows(&self) -> Vec<(String, String)> {
        self.criteria
            .iter()
            .map(|c| {
                row(
                    &format!("{}. {}", c.id, c.name),
                    format!("{} ({} ms) {}", if c.passed { "PASS" } else { "FAIL" }, c.elapsed_ms, c.detail),
                )
            })
            .collect()
    }
}

pub fn render_table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn emit<T: Serialize + Tabular>(value: &T, format: Format, out: &mut dyn Write) -> Result<()> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Table => render_table(&value.rows()),
    };
    out.write_all(text.as_bytes()).map_err(|e| Error::Internal(e.to_string()))
}

fn read_document(path: Option<&PathBuf>) -> Result<(String, String)> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            Ok((p.display().to_string(), text))
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
            Ok(("<stdin>".into(), text))
        }
    }
}

pub fn parse_document<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{name}: {e}")))
}

fn parse_ints(s: &str, what: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::InvalidInput(format!("bad {what} entry {t:?}"))))
        .collect()
}

pub fn crystal_output(
    p: u64,
    d: u32,
    e: u32,
    precision: Option<u32>,
    residue_degree: Option<u32>,
    eisenstein: Option<Vec<i64>>,
) -> Result<CrystalOutput> {
    let lfd = match eisenstein {
        Some(c) => LocalFieldData::with_eisenstein(p, d, e, c)?,
        None => LocalFieldData::new(p, d, e)?,
    };
    let precision = precision.unwrap_or_else(|| DEFAULT_PRECISION.min(max_precision(p)));
    let m = residue_degree.unwrap_or(d);
    let crystal = FCrystal::build(&lfd, m, precision)?;
    let artin = artin_invariant_via_cokernel(&crystal)?;
    let fixed = fixed_module_basis(&crystal)?;
    Ok(CrystalOutput {
        p,
        d,
        e,
        precision,
        residue_degree: m,
        eisenstein: lfd.eisenstein.clone(),
        extrapolated_normalization: artin.extrapolated_normalization,
        beta: crystal.beta_table(),
        bk_mod_u: specialize_mod_u(&bk_symbolic(d)?),
        fixed_module: FixedModuleOutput {
            rank: fixed.rank,
            residual_valuation: fixed.residual_valuation,
            vectors: fixed.vectors,
        },
        g_pi_snf_diagonal: artin.g_pi_diagonal,
        fixed_module_snf_diagonal: artin.fixed_module_diagonal,
        artin_invariant: artin.artin_invariant,
    })
}

/// Exit status for an error: 1 for inconsistent data or failed
/// computations, 2 for malformed input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Schema(_) => 2,
        Error::Inconsistent(_) | Error::Precision { .. } | Error::Internal(_) => 1,
    }
}

fn configure_workers(err: &mut dyn Write) {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Fails only if the pool already exists; the existing one is kept.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                let _ = writeln!(err, "warning: ignoring {WORKERS_ENV}={v:?}");
            }
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let fmt = cli.format;
    match &cli.command {
        Command::Predict { input } => {
            let (name, text) = read_document(input.as_ref())?;
            let doc: K3CmInput = parse_document(&name, &text)?;
            let report = predict_reduction(&doc)?;
            let validation = cross_validate(&report, &doc)?;
            let ok = validation.all_passed();
            emit(&PredictOutput { report, validation }, fmt, out)?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::Singular { gram, p } => {
            let v = parse_ints(gram, "gram")?;
            let [a1, a2, a3] = v[..] else {
                return Err(Error::InvalidInput(format!("--gram expects a1,a2,a3, got {gram:?}")));
            };
            let g = GramMatrix::new(vec![vec![a1, a2], vec![a2, a3]])?;
            emit(&predict_singular(&g, *p)?, fmt, out)?;
            Ok(0)
        }
        Command::Frobenius { input, strict } => {
            let (name, text) = read_document(input.as_ref())?;
            let fp: FrobCharPoly = parse_document(&name, &text)?;
            emit(&analyze(&fp, *strict)?, fmt, out)?;
            Ok(0)
        }
        Command::Crystal { p, d, e, precision, residue_degree, eisenstein } => {
            let eis = eisenstein.as_deref().map(|s| parse_ints(s, "Eisenstein")).transpose()?;
            emit(&crystal_output(*p, *d, *e, *precision, *residue_degree, eis)?, fmt, out)?;
            Ok(0)
        }
        Command::Kummer { d1, d2, p } => {
            emit(&kummer_finding(&KummerInput { d1: *d1, d2: *d2 }, *p)?, fmt, out)?;
            Ok(0)
        }
        Command::Sweep { kind } => {
            let result = run_sweep(kind.parse::<SweepKind>()?);
            let ok = result.passed();
            emit(&result, fmt, out)?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::Selftest => {
            let criteria = run_all();
            let passed = criteria.iter().all(|c| c.passed);
            emit(&SelftestOutput { passed, criteria }, fmt, out)?;
            Ok(if passed { 0 } else { 1 })
        }
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_workers(err);
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
