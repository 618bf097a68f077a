//! `quflow`: slow-entropy analysis of quasi-unipotent flows from the command
//! line.
//!
//! Structured results are JSON on stdout; series (Monte Carlo volumes,
//! covering counts) are CSV with a slope-fit JSON object appended as the
//! final line. Exit codes: 0 success, 1 usage error, 2 domain rejection
//! (for example a non-quasi-unipotent operator), 3 failed `--assert-*`
//! tolerance. Every run is reproducible: when `--seed` is omitted one is
//! drawn and printed to stderr.

use std::io::Read;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quflow_core::chains::{self, ChainSpec};
use quflow_core::dynamics::{self, DivergenceState, DynError, McConfig, SupMode};
use quflow_core::linalg::{ad_operator, RatMatrix, Rational};
use quflow_core::torus::{self, CodingConfig, TorusError};
use quflow_core::zoo::{self, AlgebraWithFlow};
use quflow_core::{closed_forms, sl2, BlockSequence, FPoly, JordanLengths, StreamRng};

#[derive(Parser)]
#[command(
    name = "quflow",
    version,
    about = "Slow entropy of quasi-unipotent flows: exact invariants and Monte Carlo checks"
)]
struct Cli {
    /// Cap the number of worker threads for parallel subcommands.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chain analysis of an adjoint operator or an algebra with flow.
    Analyze(AnalyzeArgs),
    /// Closed-form slow-entropy values for the worked families.
    Formulas(FormulasArgs),
    /// Complete a nilpotent element to an sl(2)-triple and read off R.
    Triple(TripleArgs),
    /// Emit example algebras as JSON (pipe into analyze or triple).
    Zoo(ZooArgs),
    /// Monte Carlo divergence experiments.
    Simulate(SimulateArgs),
    /// Hamming-ball covering growth for the toral skew map.
    Torus(TorusArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input path or '-' for stdin: either a rational matrix
    /// ({rows, cols, entries}) used directly as ad_U, or an algebra
    /// ({basis, generator}).
    #[arg(long, default_value = "-")]
    input: String,
    /// Use basis element K as the flow generator instead of the stored one
    /// (algebra input only).
    #[arg(long, value_name = "K")]
    u_index: Option<usize>,
    /// Spectral tolerance for quasi-unipotence and clustering.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also report the sequence entropy R ln(lambda).
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormulaKind {
    Blocks,
    Nilpotent,
    Twisted,
}

#[derive(Args)]
struct FormulasArgs {
    kind: FormulaKind,
    /// Nondecreasing block sizes, comma separated (blocks and twisted kinds).
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    /// Dimension of the nilpotent example family.
    #[arg(long)]
    d: Option<usize>,
    /// Jordan lengths of the twist representation (twisted kind).
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// Shorthand: a single 2-block twisted by the n-th symmetric power.
    #[arg(long, value_name = "N")]
    sym: Option<usize>,
}

#[derive(Args)]
struct TripleArgs {
    /// Algebra JSON ({basis, generator}) path or '-' for stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Complete basis element K instead of the stored generator.
    #[arg(long, value_name = "K")]
    u_index: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Family {
    /// sl(d) with the principal nilpotent as flow generator.
    Sl,
    /// sl(sum k_i) with a block nilpotent generator.
    Blocks,
    /// Filiform algebra of the nilpotent example family.
    Heisenberg,
    /// sl(2) twisted by a symmetric power.
    Twisted,
    /// Synthetic realization of a prescribed chain structure.
    Synthetic,
}

#[derive(Args)]
struct ZooArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Dimension (sl, heisenberg).
    #[arg(long)]
    d: Option<usize>,
    /// Block sizes, comma separated (blocks, twisted).
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    /// Rotation parameter as a rational "p/q" (heisenberg).
    #[arg(long)]
    alpha: Option<String>,
    /// Symmetric-power degree (twisted).
    #[arg(long)]
    sym: Option<usize>,
    /// Pure chain depths, comma separated (synthetic).
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    /// Double chains as depth:alpha pairs, comma separated (synthetic).
    #[arg(long, value_delimiter = ',')]
    doubles: Option<Vec<String>>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SimKind {
    Bowen,
    Sequence,
    Shearing,
    Brudnyi,
}

#[derive(Args)]
struct SimulateArgs {
    kind: SimKind,
    /// Pure chain depths of the structure, comma separated.
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    /// Double chains as depth:alpha pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    doubles: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Smallest membership horizon T.
    #[arg(long, default_value_t = 10.0)]
    tmin: f64,
    /// Geometric ratio of the T grid.
    #[arg(long, default_value_t = 2.0)]
    tratio: f64,
    /// Number of T grid points.
    #[arg(long, default_value_t = 5)]
    tcount: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Sup computation: "derivative-roots" or "grid" / "grid:N".
    #[arg(long, default_value = "derivative-roots")]
    sup_mode: String,
    /// Base time L of the sequence times L lambda^k (sequence kind).
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    /// Time ratio lambda (sequence kind).
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Largest sequence length N (sequence kind).
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    /// Small-scale factor c of the visit threshold (shearing kind).
    #[arg(long, default_value_t = 6e-4)]
    c: f64,
    /// Separation scale eta (shearing kind).
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Number of random displacements (shearing kind).
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Number of random instances (brudnyi kind).
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Maximal polynomial degree (brudnyi kind).
    #[arg(long, default_value_t = 6)]
    max_degree: usize,
    /// Exit 3 unless the fitted exponent is within --slope-tol of this value.
    #[arg(long)]
    assert_slope: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    slope_tol: f64,
    /// Exit 3 on any failed instance (brudnyi) or any visit fraction at or
    /// above --max-fraction (shearing).
    #[arg(long)]
    assert_all_pass: bool,
    #[arg(long, default_value_t = 0.1)]
    max_fraction: f64,
}

#[derive(Args)]
struct TorusArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Rotation number; defaults to sqrt(2) - 1.
    #[arg(long)]
    alpha: Option<f64>,
    /// Cells per axis.
    #[arg(long, default_value_t = 10)]
    q: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Code lengths, comma separated and increasing (at least 4).
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800,1600")]
    grid: Vec<usize>,
    /// Exit 3 unless the fitted exponent is within --exponent-tol of this.
    #[arg(long)]
    assert_exponent: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    exponent_tol: f64,
}

/// Failure classes mapped to exit codes 1 / 2 / 3.
enum Fail {
    Usage(String),
    Domain(Value),
    Assert(String),
}

impl Fail {
    fn domain(msg: impl Into<String>) -> Fail {
        Fail::Domain(json!({ "error": msg.into() }))
    }

    fn code(&self) -> i32 {
        match self {
            Fail::Usage(_) => 1,
            Fail::Domain(_) => 2,
            Fail::Assert(_) => 3,
        }
    }

    fn report(&self) {
        match self {
            Fail::Usage(m) => eprintln!("error: {m}"),
            Fail::Domain(v) => eprintln!("{v}"),
            Fail::Assert(m) => eprintln!("assertion failed: {m}"),
        }
    }
}

/// Validation-style errors are usage problems; everything that arises from
/// the mathematics of a well-formed request is a domain rejection.
fn dyn_fail(e: DynError) -> Fail {
    match e {
        DynError::BadEpsilon(_)
        | DynError::BadTimeGrid
        | DynError::TooFewSamples(_)
        | DynError::BadSupGrid
        | DynError::BadAlpha(_)
        | DynError::EmptyStructure
        | DynError::BadLambda(_)
        | DynError::BadBaseTime(_)
        | DynError::SequenceTooShort { .. }
        | DynError::BadInterval
        | DynError::BadShearing => Fail::Usage(e.to_string()),
        other => Fail::domain(other.to_string()),
    }
}

fn torus_fail(e: TorusError) -> Fail {
    match e {
        TorusError::BadDim
        | TorusError::BadQ(_)
        | TorusError::BadAlpha(_)
        | TorusError::BadLength(_)
        | TorusError::BadEpsilon(_)
        | TorusError::TooFewSamples(_)
        | TorusError::AlphabetOverflow(_)
        | TorusError::PointDim { .. }
        | TorusError::BadGrid => Fail::Usage(e.to_string()),
        other => Fail::domain(other.to_string()),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    let outcome = match cli.cmd {
        Cmd::Analyze(a) => run_analyze(a),
        Cmd::Formulas(a) => run_formulas(a),
        Cmd::Triple(a) => run_triple(a),
        Cmd::Zoo(a) => run_zoo(a),
        Cmd::Simulate(a) => run_simulate(a),
        Cmd::Torus(a) => run_torus(a),
    };
    match outcome {
        Ok(()) => {}
        Err(f) => {
            f.report();
            std::process::exit(f.code());
        }
    }
}

fn read_input(path: &str) -> Result<String, Fail> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Fail::Usage(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("reading {path}: {e}")))
    }
}

enum ParsedInput {
    Algebra(AlgebraWithFlow),
    Matrix(RatMatrix),
}

fn parse_input(text: &str) -> Result<ParsedInput, Fail> {
    if let Ok(alg) = serde_json::from_str::<AlgebraWithFlow>(text) {
        return Ok(ParsedInput::Algebra(alg));
    }
    if let Ok(m) = serde_json::from_str::<RatMatrix>(text) {
        return Ok(ParsedInput::Matrix(m));
    }
    Err(Fail::Usage(
        "input is neither an algebra ({basis, generator}) nor a matrix ({rows, cols, entries})"
            .into(),
    ))
}

fn pick_generator(alg: &AlgebraWithFlow, u_index: Option<usize>) -> Result<RatMatrix, Fail> {
    match u_index {
        None => Ok(alg.generator.clone()),
        Some(k) => alg.basis.get(k).cloned().ok_or_else(|| {
            Fail::Usage(format!(
                "--u-index {k} out of range (basis has {} elements)",
                alg.basis.len()
            ))
        }),
    }
}

fn emit(value: &Value) {
    println!("{value}");
}

fn run_analyze(a: AnalyzeArgs) -> Result<(), Fail> {
    let text = read_input(&a.input)?;
    let ad = match parse_input(&text)? {
        ParsedInput::Algebra(alg) => {
            let u = pick_generator(&alg, a.u_index)?;
            ad_operator(&alg.basis, &u).map_err(|e| Fail::domain(e.to_string()))?
        }
        ParsedInput::Matrix(m) => {
            if a.u_index.is_some() {
                return Err(Fail::Usage(
                    "--u-index requires an algebra input, not a bare matrix".into(),
                ));
            }
            m
        }
    };
    let check = chains::is_quasi_unipotent(&ad, a.tol).map_err(|e| Fail::domain(e.to_string()))?;
    if !check.quasi_unipotent {
        return Err(Fail::Domain(json!({
            "error": "operator is not quasi-unipotent",
            "offending_eigenvalue": check.offending,
            "tol": check.tol,
        })));
    }
    let report = chains::analyze(&ad, a.tol).map_err(|e| Fail::domain(e.to_string()))?;
    let sequence = match a.lambda {
        None => Value::Null,
        Some(lambda) => {
            let h = chains::sequence_entropy(&report.structure, lambda)
                .map_err(|e| Fail::Usage(e.to_string()))?;
            json!({ "lambda": lambda, "value": h })
        }
    };
    let mut out = serde_json::to_value(&report).expect("report serializes");
    out["quasi_unipotent"] = json!(true);
    out["check_path"] = serde_json::to_value(check.path).expect("path serializes");
    out["sequence_entropy"] = sequence;
    emit(&out);
    Ok(())
}

fn run_formulas(a: FormulasArgs) -> Result<(), Fail> {
    let cf = |e: closed_forms::ClosedFormError| Fail::domain(e.to_string());
    let out = match a.kind {
        FormulaKind::Blocks => {
            let blocks = a
                .blocks
                .ok_or_else(|| Fail::Usage("blocks kind needs --blocks".into()))?;
            let seq = BlockSequence::new(blocks.clone()).map_err(cf)?;
            let r = closed_forms::r_block_sequence(&seq);
            json!({ "kind": "blocks", "blocks": blocks, "R": r.to_string() })
        }
        FormulaKind::Nilpotent => {
            let d =
                a.d.ok_or_else(|| Fail::Usage("nilpotent kind needs --d".into()))?;
            let r = closed_forms::r_nilpotent_example(d).map_err(cf)?;
            json!({ "kind": "nilpotent", "d": d, "R": r.to_string() })
        }
        FormulaKind::Twisted => match (a.sym, a.lengths) {
            (Some(n), None) => {
                let r = closed_forms::r_twisted_sym_power(n);
                json!({ "kind": "twisted", "blocks": [2], "sym": n, "R": r.to_string() })
            }
            (None, Some(lengths)) => {
                let blocks = a.blocks.ok_or_else(|| {
                    Fail::Usage("twisted kind needs --blocks with --lengths".into())
                })?;
                let seq = BlockSequence::new(blocks.clone()).map_err(cf)?;
                let lens = JordanLengths::new(lengths.clone()).map_err(cf)?;
                let r = closed_forms::r_twisted(&seq, &lens);
                json!({ "kind": "twisted", "blocks": blocks, "lengths": lengths, "R": r.to_string() })
            }
            _ => {
                return Err(Fail::Usage(
                    "twisted kind needs either --sym or --blocks with --lengths".into(),
                ))
            }
        },
    };
    emit(&out);
    Ok(())
}

fn matrix_json(m: &RatMatrix) -> Value {
    serde_json::to_value(m).expect("matrix serializes")
}

fn run_triple(a: TripleArgs) -> Result<(), Fail> {
    let text = read_input(&a.input)?;
    let alg = match parse_input(&text)? {
        ParsedInput::Algebra(alg) => alg,
        ParsedInput::Matrix(_) => {
            return Err(Fail::Usage(
                "triple needs an algebra input ({basis, generator})".into(),
            ))
        }
    };
    let u = pick_generator(&alg, a.u_index)?;
    let triple = sl2::jacobson_morozov(&alg.basis, &u).map_err(|e| Fail::domain(e.to_string()))?;
    let spectrum =
        sl2::entropy_via_triple(&alg.basis, &triple).map_err(|e| Fail::domain(e.to_string()))?;
    let out = json!({
        "v": matrix_json(triple.v()),
        "x": matrix_json(triple.x()),
        "uprime": matrix_json(triple.uprime()),
        "spectrum": serde_json::to_value(&spectrum).expect("spectrum serializes"),
        "R": spectrum.r().to_string(),
    });
    emit(&out);
    Ok(())
}

fn parse_doubles(raw: &[String]) -> Result<Vec<(usize, f64)>, Fail> {
    raw.iter()
        .map(|s| {
            let (depth, alpha) = s
                .split_once(':')
                .ok_or_else(|| Fail::Usage(format!("double {s:?} is not depth:alpha")))?;
            let depth = depth
                .trim()
                .parse::<usize>()
                .map_err(|_| Fail::Usage(format!("bad depth in double {s:?}")))?;
            let alpha = alpha
                .trim()
                .parse::<f64>()
                .map_err(|_| Fail::Usage(format!("bad alpha in double {s:?}")))?;
            Ok((depth, alpha))
        })
        .collect()
}

fn run_zoo(a: ZooArgs) -> Result<(), Fail> {
    let zf = |e: zoo::ZooError| Fail::domain(e.to_string());
    let alg = match a.family {
        Family::Sl => {
            let d =
                a.d.ok_or_else(|| Fail::Usage("sl family needs --d".into()))?;
            AlgebraWithFlow {
                basis: zoo::sl_basis(d).map_err(zf)?,
                generator: zoo::principal_nilpotent(d),
            }
        }
        Family::Blocks => {
            let blocks = a
                .blocks
                .ok_or_else(|| Fail::Usage("blocks family needs --blocks".into()))?;
            let seq = BlockSequence::new(blocks).map_err(|e| Fail::domain(e.to_string()))?;
            AlgebraWithFlow {
                basis: zoo::sl_basis(seq.dim()).map_err(zf)?,
                generator: zoo::block_nilpotent(&seq),
            }
        }
        Family::Heisenberg => {
            let d =
                a.d.ok_or_else(|| Fail::Usage("heisenberg family needs --d".into()))?;
            let alpha = match &a.alpha {
                None => quflow_core::rat(1),
                Some(s) => Rational::from_str(s)
                    .map_err(|_| Fail::Usage(format!("bad rational alpha {s:?}")))?,
            };
            zoo::heisenberg_type(d, &alpha).map_err(zf)?
        }
        Family::Twisted => {
            let n = a
                .sym
                .ok_or_else(|| Fail::Usage("twisted family needs --sym".into()))?;
            let blocks = a.blocks.unwrap_or_else(|| vec![2]);
            let seq = BlockSequence::new(blocks).map_err(|e| Fail::domain(e.to_string()))?;
            zoo::twisted_algebra(&seq, n).map_err(zf)?
        }
        Family::Synthetic => {
            let spec = ChainSpec {
                pure_depths: a.depths.unwrap_or_default(),
                doubles: parse_doubles(&a.doubles.unwrap_or_default())?,
            };
            zoo::synthetic_from_structure(&spec).map_err(zf)?
        }
    };
    emit(&serde_json::to_value(&alg).expect("algebra serializes"));
    Ok(())
}

fn draw_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            use std::hash::{BuildHasher, Hasher};
            let s = std::collections::hash_map::RandomState::new()
                .build_hasher()
                .finish();
            eprintln!("seed: {s}");
            s
        }
    }
}

fn parse_sup_mode(s: &str) -> Result<SupMode, Fail> {
    match s {
        "derivative-roots" => Ok(SupMode::DerivativeRoots),
        "grid" => Ok(SupMode::Grid(512)),
        _ => match s
            .strip_prefix("grid:")
            .and_then(|n| n.parse::<usize>().ok())
        {
            Some(n) => Ok(SupMode::Grid(n)),
            None => Err(Fail::Usage(format!(
                "bad --sup-mode {s:?}: use derivative-roots, grid, or grid:N"
            ))),
        },
    }
}

fn structure_spec(a: &SimulateArgs) -> Result<ChainSpec, Fail> {
    Ok(ChainSpec {
        pure_depths: a.depths.clone().unwrap_or_default(),
        doubles: parse_doubles(&a.doubles.clone().unwrap_or_default())?,
    })
}

fn assert_slope(fit_exponent: f64, target: Option<f64>, tol: f64) -> Result<(), Fail> {
    if let Some(t) = target {
        let err = (fit_exponent - t).abs();
        if err.is_nan() || err > tol {
            return Err(Fail::Assert(format!(
                "fitted exponent {fit_exponent:.4} differs from {t} by {err:.4} > {tol}"
            )));
        }
    }
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<(), Fail> {
    let seed = draw_seed(a.seed);
    match a.kind {
        SimKind::Bowen => {
            let spec = structure_spec(&a)?;
            let mut cfg =
                McConfig::geometric(a.epsilon, a.tmin, a.tratio, a.tcount, a.samples, seed);
            cfg.sup_mode = parse_sup_mode(&a.sup_mode)?;
            let (points, fit) = dynamics::mc_bowen_volume(&spec, &cfg).map_err(dyn_fail)?;
            println!("T,volume,log10_T,log10_V,accepted,samples");
            for p in &points {
                println!(
                    "{},{},{},{},{},{}",
                    p.t, p.volume, p.log10_t, p.log10_volume, p.accepted, p.samples
                );
            }
            emit(&serde_json::to_value(&fit).expect("fit serializes"));
            assert_slope(fit.exponent, a.assert_slope, a.slope_tol)
        }
        SimKind::Sequence => {
            let spec = structure_spec(&a)?;
            let mut cfg =
                McConfig::geometric(a.epsilon, a.tmin, a.tratio, a.tcount, a.samples, seed);
            cfg.sup_mode = parse_sup_mode(&a.sup_mode)?;
            let (points, fit) = dynamics::sequence_bowen_volume(&spec, a.l, a.lambda, a.nmax, &cfg)
                .map_err(dyn_fail)?;
            println!("n,volume,ln_volume,accepted,samples");
            for p in &points {
                println!(
                    "{},{},{},{},{}",
                    p.n, p.volume, p.ln_volume, p.accepted, p.samples
                );
            }
            emit(&serde_json::to_value(&fit).expect("fit serializes"));
            assert_slope(fit.exponent, a.assert_slope, a.slope_tol)
        }
        SimKind::Shearing => {
            let spec = structure_spec(&a)?;
            if !(a.eta.is_finite() && a.eta > 0.0) {
                return Err(Fail::Usage(format!("bad --eta {}", a.eta)));
            }
            let template = DivergenceState::zero(&spec);
            let mut evaluated = 0usize;
            let mut no_separation = 0usize;
            let mut skipped = 0usize;
            let mut max_fraction = 0.0f64;
            let mut sum_fraction = 0.0f64;
            let mut min_s = f64::INFINITY;
            let mut max_s = 0.0f64;
            for i in 0..a.count as u64 {
                let mut rng = StreamRng::for_sample(seed, 1_000, i);
                let mut state = template.clone();
                for chain in &mut state.chains {
                    for x in chain.iter_mut() {
                        *x = rng.symmetric(a.eta / 2.0);
                    }
                }
                for dbl in &mut state.doubles {
                    for j in 0..dbl.b.len() {
                        dbl.b[j] = rng.symmetric(a.eta / 3.0);
                        dbl.c[j] = rng.symmetric(a.eta / 3.0);
                    }
                }
                match dynamics::shearing_visit_fraction(&state, a.c, a.eta) {
                    Ok((s, fraction)) => {
                        evaluated += 1;
                        max_fraction = max_fraction.max(fraction);
                        sum_fraction += fraction;
                        min_s = min_s.min(s);
                        max_s = max_s.max(s);
                    }
                    Err(DynError::NoSeparation) => no_separation += 1,
                    Err(DynError::BadShearing) => skipped += 1,
                    Err(e) => return Err(dyn_fail(e)),
                }
            }
            if evaluated == 0 {
                return Err(Fail::domain(
                    "no displacement produced a separation time; structure may be all depth zero",
                ));
            }
            let out = json!({
                "count": a.count,
                "evaluated": evaluated,
                "no_separation": no_separation,
                "skipped": skipped,
                "c": a.c,
                "eta": a.eta,
                "max_fraction": max_fraction,
                "mean_fraction": sum_fraction / evaluated as f64,
                "min_separation_time": min_s,
                "max_separation_time": max_s,
            });
            emit(&out);
            if a.assert_all_pass && max_fraction >= a.max_fraction {
                return Err(Fail::Assert(format!(
                    "visit fraction {max_fraction:.4} reached the bound {}",
                    a.max_fraction
                )));
            }
            Ok(())
        }
        SimKind::Brudnyi => {
            let mut failures = 0usize;
            for i in 0..a.trials as u64 {
                let mut rng = StreamRng::for_sample(seed, 1_001, i);
                let deg = (rng.next_u64() % (a.max_degree as u64 + 1)) as usize;
                let coeffs: Vec<f64> = (0..=deg).map(|_| rng.symmetric(1.0)).collect();
                let p = FPoly::new(coeffs);
                let lo = rng.uniform(0.0, 0.8);
                let hi = rng.uniform(lo + 0.05, 1.0);
                let ok = dynamics::check_brudnyi(&p, (0.0, 1.0), &[(lo, hi)]).map_err(dyn_fail)?;
                if !ok {
                    failures += 1;
                }
            }
            let out = json!({
                "trials": a.trials,
                "max_degree": a.max_degree,
                "failures": failures,
            });
            emit(&out);
            if a.assert_all_pass && failures > 0 {
                return Err(Fail::Assert(format!("{failures} instances failed")));
            }
            Ok(())
        }
    }
}

fn run_torus(a: TorusArgs) -> Result<(), Fail> {
    let seed = draw_seed(a.seed);
    let n_max = *a
        .grid
        .last()
        .ok_or_else(|| Fail::Usage("empty --grid".into()))?;
    let mut cfg = CodingConfig::new(a.d, a.q, n_max, a.epsilon, a.samples, seed);
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    let (points, fit) = torus::empirical_slow_entropy(&cfg, &a.grid).map_err(torus_fail)?;
    println!("n,s_greedy,s_separated,s_volume,log10_n,log10_s_volume");
    for p in &points {
        println!(
            "{},{},{},{},{},{}",
            p.n, p.greedy, p.separated_lower, p.volume_count, p.log10_n, p.log10_volume_count
        );
    }
    emit(&serde_json::to_value(&fit).expect("fit serializes"));
    if let Some(target) = a.assert_exponent {
        let err = (fit.exponent - target).abs();
        if err.is_nan() || err > a.exponent_tol {
            return Err(Fail::Assert(format!(
                "fitted exponent {:.4} differs from {target} by {err:.4} > {}",
                fit.exponent, a.exponent_tol
            )));
        }
    }
    Ok(())
}
