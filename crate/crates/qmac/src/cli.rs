//! Command-line front end: channel ingestion, command dispatch, and
//! deterministic report serialization.
//!
//! Exit-code contract: 0 success, 1 a verified property failed, 2 input
//! error, 3 resource cap exceeded.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::capacity::{
    corner_points, ea_capacity_single, phase_flip_region_closed_form, region_for_inputs,
    sum_rate_bound, union_hull, union_region_sample, CornerPoints, OptimizerConfig,
    RegionPentagon,
};
use crate::channels::{
    make_collective_phase_flip, make_completely_dephasing, make_completely_depolarizing,
    ChannelSpecFile, QuantumChannel,
};
use crate::codesim::{
    gentle_measurement_sweep, hayashi_nagaoka_sweep, simulate_packing, PackingConfig,
    PackingReport,
};
use crate::entropy::{verify_entropy_lemmas, verify_strong_subadditivity};
use crate::error::{Error, Result};
use crate::qmath::{CMatrix, DensityOperator};
use crate::typing::verify_typical_properties;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qmac",
    version,
    about = "Entanglement-assisted capacity regions of quantum multiple-access channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate region of a two-sender channel at fixed product inputs, with
    /// sampled union region and convex hull
    Region {
        /// builtin grammar `name:key=value,...` or `file:<path>`
        #[arg(long)]
        channel: String,
        /// input states (`maximally-mixed`)
        #[arg(long, default_value = "maximally-mixed")]
        inputs: String,
        /// number of Ginibre-sampled input pairs added to the union
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// report path; `<out>.json` and `<out>.csv` are written
        #[arg(long)]
        out: Option<PathBuf>,
        /// stdout format when no --out is given (json | csv)
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Optimize entropic objectives over input states
    Optimize {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Packing-lemma simulation with square-root-measurement decoding
    Simulate {
        #[arg(long)]
        channel: String,
        /// resource state (`maximally-mixed`)
        #[arg(long, default_value = "maximally-mixed")]
        inputs: String,
        /// block length
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// rate in bits per channel use (N = 2^{⌊nR⌋})
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the lemma verification suites
    Verify {
        /// all | lemmas | ssa | typical | hn | gentle | dephasing
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// Channel grammar
// ---------------------------------------------------------------------------

/// A parsed channel plus the sender structure it declares.
pub struct ChannelSource {
    pub channel: QuantumChannel,
    pub description: String,
    /// `(d1, d2)` when the channel has a declared two-sender factorization
    pub sender_dims: Option<(usize, usize)>,
}

/// Parse the builtin grammar `name:key=value,...`. Probability vectors are
/// comma-separated, so bare tokens after `p=` extend the vector:
/// `phase-flip:d=2,p=0.5,0.5`.
pub fn parse_channel(spec: &str) -> Result<ChannelSource> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let mut params: Vec<(String, Vec<String>)> = Vec::new();
    if !rest.is_empty() && name != "file" {
        for token in rest.split(',') {
            match token.split_once('=') {
                Some((k, v)) => params.push((k.to_string(), vec![v.to_string()])),
                None => match params.last_mut() {
                    Some((_, vals)) => vals.push(token.to_string()),
                    None => {
                        return Err(Error::Input(format!(
                            "dangling parameter token `{token}` in `{spec}`"
                        )))
                    }
                },
            }
        }
    }
    let get_d = |params: &[(String, Vec<String>)]| -> Result<usize> {
        let d = params
            .iter()
            .find(|(k, _)| k == "d")
            .ok_or_else(|| Error::Input(format!("channel `{name}` needs d=<dim>")))?;
        d.1[0]
            .parse::<usize>()
            .map_err(|_| Error::Input(format!("bad dimension `{}`", d.1[0])))
    };
    match name {
        "phase-flip" => {
            let d = get_d(&params)?;
            let p: Vec<f64> = params
                .iter()
                .find(|(k, _)| k == "p")
                .ok_or_else(|| Error::Input("phase-flip needs p=<probs>".into()))?
                .1
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Input(format!("bad probability `{s}`")))
                })
                .collect::<Result<_>>()?;
            Ok(ChannelSource {
                channel: make_collective_phase_flip(d, &p)?,
                description: format!("phase-flip d={d} p={p:?}"),
                sender_dims: Some((d, d)),
            })
        }
        "dephasing" => {
            let d = get_d(&params)?;
            Ok(ChannelSource {
                channel: make_completely_dephasing(d),
                description: format!("dephasing d={d}"),
                sender_dims: None,
            })
        }
        "depolarizing" => {
            let d = get_d(&params)?;
            Ok(ChannelSource {
                channel: make_completely_depolarizing(d),
                description: format!("depolarizing d={d}"),
                sender_dims: None,
            })
        }
        "identity" => {
            let d = get_d(&params)?;
            Ok(ChannelSource {
                channel: QuantumChannel::identity(d),
                description: format!("identity d={d}"),
                sender_dims: None,
            })
        }
        "file" => {
            let text = std::fs::read_to_string(rest)?;
            let parsed: ChannelSpecFile = serde_json::from_str(&text)?;
            let channel = parsed.to_channel()?;
            // two-sender structure is inferred for perfect-square inputs
            let din = channel.dim_in();
            let root = (din as f64).sqrt().round() as usize;
            let sender_dims = (root >= 2 && root * root == din).then_some((root, root));
            Ok(ChannelSource {
                channel,
                description: format!("file {rest}"),
                sender_dims,
            })
        }
        other => Err(Error::Input(format!("unknown channel `{other}`"))),
    }
}

fn parse_inputs(spec: &str, dims: (usize, usize)) -> Result<(DensityOperator, DensityOperator)> {
    match spec {
        "maximally-mixed" => Ok((
            DensityOperator::maximally_mixed(dims.0),
            DensityOperator::maximally_mixed(dims.1),
        )),
        other => Err(Error::Input(format!("unknown input spec `{other}`"))),
    }
}

fn parse_single_input(spec: &str, dim: usize) -> Result<DensityOperator> {
    match spec {
        "maximally-mixed" => Ok(DensityOperator::maximally_mixed(dim)),
        other => Err(Error::Input(format!("unknown input spec `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Tolerances pinned by the library, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ToleranceSet {
    pub hermiticity: f64,
    pub eigenvalue_clamp: f64,
    pub pseudo_inverse_threshold: f64,
    pub pentagon_consistency: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            hermiticity: crate::qmath::HERM_TOL,
            eigenvalue_clamp: crate::qmath::EIG_CLAMP,
            pseudo_inverse_threshold: crate::codesim::PINV_THRESHOLD,
            pentagon_consistency: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportHeader {
    pub tool_version: String,
    pub command_line: String,
    pub seed: u64,
    pub tolerances: ToleranceSet,
}

impl ReportHeader {
    fn new(seed: u64) -> Self {
        let args: Vec<String> = std::env::args().collect();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: args.join(" "),
            seed,
            tolerances: ToleranceSet::default(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RegionReport {
    pub header: ReportHeader,
    pub channel: String,
    pub pentagon: RegionPentagon,
    pub corners: CornerPoints,
    pub closed_form: Option<RegionPentagon>,
    pub samples: usize,
    pub refined_converged: Vec<bool>,
    pub hull: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct OptimizeReport {
    pub header: ReportHeader,
    pub channel: String,
    pub objective: String,
    pub value: f64,
    pub converged: bool,
    /// argmax state(s) as matrices of [re, im] pairs
    pub argmax: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub header: ReportHeader,
    pub channel: String,
    pub packing: PackingReport,
}

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub header: ReportHeader,
    pub trials: usize,
    pub suites: Vec<SuiteResult>,
    pub all_pass: bool,
}

fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn hull_csv(hull: &[(f64, f64)]) -> String {
    let mut out = String::from("r1,r2\n");
    for (x, y) in hull {
        out.push_str(&format!("{x:.12},{y:.12}\n"));
    }
    out
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Command execution
// ---------------------------------------------------------------------------

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::DimensionCap { .. } => EXIT_CAP,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Region {
            channel,
            inputs,
            samples,
            seed,
            out,
            format,
        } => cmd_region(&channel, &inputs, samples, seed, out, &format),
        Command::Optimize { channel, seed, out } => cmd_optimize(&channel, seed, out),
        Command::Simulate {
            channel,
            inputs,
            n,
            rate,
            gamma,
            delta,
            trials,
            seed,
            out,
        } => cmd_simulate(&channel, &inputs, n, rate, gamma, delta, trials, seed, out),
        Command::Verify {
            suite,
            trials,
            seed,
            out,
        } => cmd_verify(&suite, trials, seed, out),
    }
}

fn cmd_region(
    channel_spec: &str,
    inputs: &str,
    samples: usize,
    seed: u64,
    out: Option<PathBuf>,
    format: &str,
) -> Result<i32> {
    let source = parse_channel(channel_spec)?;
    let dims = source.sender_dims.ok_or_else(|| {
        Error::Input(format!(
            "`{channel_spec}` does not declare a two-sender input factorization"
        ))
    })?;
    let (rho1, rho2) = parse_inputs(inputs, dims)?;
    let pentagon = region_for_inputs(&source.channel, &rho1, &rho2)?;
    let corners = corner_points(&pentagon);

    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let (pentagons, refined_converged) = if samples > 0 {
        let u = union_region_sample(&source.channel, dims, samples, &cfg, seed)?;
        (u.pentagons, u.refined_converged)
    } else {
        (vec![pentagon.clone()], Vec::new())
    };
    let hull = union_hull(&pentagons);

    let closed_form = channel_spec
        .starts_with("phase-flip")
        .then(|| phase_flip_region_closed_form(dims.0, &phase_flip_probs(channel_spec)))
        .transpose()?;

    let report = RegionReport {
        header: ReportHeader::new(seed),
        channel: source.description,
        pentagon,
        corners,
        closed_form,
        samples,
        refined_converged,
        hull,
    };
    let json = serde_json::to_string_pretty(&report)?;
    let csv = hull_csv(&report.hull);
    match &out {
        Some(path) => {
            std::fs::write(path.with_extension("json"), &json)?;
            std::fs::write(path.with_extension("csv"), &csv)?;
        }
        None => {
            if format == "csv" {
                println!("{csv}");
            } else {
                println!("{json}");
            }
        }
    }
    println!(
        "pentagon: r1={:.6} r2={:.6} rsum={:.6}",
        report.pentagon.r1, report.pentagon.r2, report.pentagon.rsum
    );
    println!(
        "corners: O=({:.6},{:.6}) R=({:.6},{:.6}) Q=({:.6},{:.6}) P=({:.6},{:.6})",
        report.corners.o.0,
        report.corners.o.1,
        report.corners.r.0,
        report.corners.r.1,
        report.corners.q.0,
        report.corners.q.1,
        report.corners.p.0,
        report.corners.p.1
    );
    Ok(EXIT_OK)
}

fn phase_flip_probs(spec: &str) -> Vec<f64> {
    // the grammar was already validated by parse_channel
    spec.split_once("p=")
        .map(|(_, rest)| {
            rest.split(',')
                .filter_map(|s| s.parse::<f64>().ok())
                .collect()
        })
        .unwrap_or_default()
}

fn cmd_optimize(channel_spec: &str, seed: u64, out: Option<PathBuf>) -> Result<i32> {
    let source = parse_channel(channel_spec)?;
    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let report = match source.sender_dims {
        Some(dims) => {
            let res = sum_rate_bound(&source.channel, dims, &cfg)?;
            OptimizeReport {
                header: ReportHeader::new(seed),
                channel: source.description,
                objective: "sum-rate over product inputs".into(),
                value: res.value,
                converged: res.converged,
                argmax: vec![
                    matrix_to_pairs(res.rho1.matrix()),
                    matrix_to_pairs(res.rho2.matrix()),
                ],
            }
        }
        None => {
            let res = ea_capacity_single(&source.channel, &cfg)?;
            OptimizeReport {
                header: ReportHeader::new(seed),
                channel: source.description,
                objective: "entanglement-assisted capacity".into(),
                value: res.value,
                converged: res.converged,
                argmax: vec![matrix_to_pairs(res.argmax.matrix())],
            }
        }
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_or_print(&out, &json)?;
    eprintln!("value = {:.6} (converged: {})", report.value, report.converged);
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    channel_spec: &str,
    inputs: &str,
    n: usize,
    rate: f64,
    gamma: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<i32> {
    let source = parse_channel(channel_spec)?;
    let rho = parse_single_input(inputs, source.channel.dim_in())?;
    let cfg = PackingConfig {
        n,
        rate,
        n_codewords: None,
        gamma,
        delta,
        trials: trials.max(1),
        seed,
    };
    let packing = simulate_packing(&source.channel, &rho, &cfg)?;
    let ok = packing.avg_success >= packing.bound;
    let report = SimulateReport {
        header: ReportHeader::new(seed),
        channel: source.description,
        packing,
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_or_print(&out, &json)?;
    eprintln!(
        "avg success = {:.6}, bound = {:.6}",
        report.packing.avg_success, report.packing.bound
    );
    Ok(if ok { EXIT_OK } else { EXIT_ASSERTION })
}

fn cmd_verify(suite: &str, trials: usize, seed: u64, out: Option<PathBuf>) -> Result<i32> {
    let mut suites: Vec<SuiteResult> = Vec::new();
    let want = |name: &str| suite == "all" || suite == name;
    if trials > 0 {
        if want("lemmas") {
            let r = verify_entropy_lemmas(trials, 4, seed);
            suites.push(SuiteResult {
                name: "entropy-lemmas".into(),
                pass: r.pass,
                detail: serde_json::to_value(&r)?,
            });
        }
        if want("ssa") {
            let r = verify_strong_subadditivity(trials, 3, seed);
            suites.push(SuiteResult {
                name: "strong-subadditivity".into(),
                pass: r.pass,
                detail: serde_json::to_value(&r)?,
            });
        }
        if want("typical") {
            let rho = DensityOperator::from_probabilities(&[0.75, 0.25])?;
            let mut reports = Vec::new();
            let mut pass = true;
            let mut last_mass = 0.0;
            let mut monotone = true;
            for n in [4usize, 6, 8] {
                let r = verify_typical_properties(&rho, n, 0.1, 0.25)?;
                pass &= r.pass;
                if r.typical_mass + 1e-12 < last_mass {
                    monotone = false;
                }
                last_mass = r.typical_mass;
                reports.push(r);
            }
            suites.push(SuiteResult {
                name: "typicality".into(),
                pass,
                detail: serde_json::json!({
                    "reports": reports,
                    "mass_monotone_in_n": monotone,
                }),
            });
        }
        if want("hn") {
            let r = hayashi_nagaoka_sweep(trials, 8, seed)?;
            suites.push(SuiteResult {
                name: "hayashi-nagaoka".into(),
                pass: r.pass,
                detail: serde_json::to_value(&r)?,
            });
        }
        if want("gentle") {
            let r = gentle_measurement_sweep(trials, seed)?;
            suites.push(SuiteResult {
                name: "gentle-measurement".into(),
                pass: r.pass,
                detail: serde_json::to_value(&r)?,
            });
        }
        if want("dephasing") {
            let r = crate::capacity::verify_dephasing_maximizer(
                &make_completely_dephasing(2),
                trials,
                seed,
            )?;
            suites.push(SuiteResult {
                name: "dephasing-maximizer".into(),
                pass: r.pass,
                detail: serde_json::to_value(&r)?,
            });
        }
    }
    let all_pass = suites.iter().all(|s| s.pass);
    let report = VerifyReport {
        header: ReportHeader::new(seed),
        trials,
        suites,
        all_pass,
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_or_print(&out, &json)?;
    for s in &report.suites {
        eprintln!("{}: {}", s.name, if s.pass { "pass" } else { "FAIL" });
    }
    Ok(if report.all_pass { EXIT_OK } else { EXIT_ASSERTION })
}
