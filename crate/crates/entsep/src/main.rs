//! `entsep` command-line frontend: parse state specs, run criteria
//! batteries, protocol sweeps and volume studies; emit JSON/CSV reports.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use entsep::criteria::{self, ClassifyHints, EntropicOrder};
use entsep::distill;
use entsep::error::{Error, Result};
use entsep::maps;
use entsep::report::{
    self, AnalyzeReport, Envelope, MatrixFile, UpbCliReport, WitnessReport,
};
use entsep::rng::RngStream;
use entsep::states::{self, StateFamily};
use entsep::volume;
use entsep::DensityMatrix;

#[derive(Parser)]
#[command(
    name = "entsep",
    version,
    about = "Separability criteria, witnesses and distillation protocols for small bipartite systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct StateArgs {
    /// Family name (singlet, max_entangled, werner, isotropic,
    /// two_qubit_example, stormer, rho2x4, tiles_bound_entangled, random)
    #[arg(long)]
    family: Option<String>,
    /// Family parameters as k=v (repeatable), e.g. --param d=3 --param beta=-0.5
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// State file: JSON family spec or matrix file
    #[arg(long)]
    input: Option<PathBuf>,
    /// Shorthand for --param alpha=<v>
    #[arg(long)]
    alpha: Option<f64>,
    /// Shorthand for --param f=<v>
    #[arg(long)]
    f: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output path; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full criteria battery on a state
    Analyze {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Restart budget for the fully-entangled-fraction search
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Classify a state as separable / free entangled / PPT entangled
    Classify {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Random local-projector pairs for the distillability search
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run a distillation protocol and emit its trace
    Distill {
        /// Protocol: bbpssw, filtering, reduction_filter, isotropic_reduce
        #[arg(long)]
        protocol: String,
        /// Input state for the filtering protocols; --f doubles as the
        /// input fidelity for bbpssw
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Target fidelity for bbpssw
        #[arg(long)]
        target: Option<f64>,
    },
    /// Iterate the bound-entanglement activation protocol
    Activate {
        #[arg(long)]
        f: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate PPT volume ratios across the dimension ladder
    Volume {
        /// Samples per dimension pair
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Dimension pairs as dA x dB (repeatable); default ladder
        /// 2x2, 2x3, 2x4, 3x3
        #[arg(long = "dims", value_name = "AxB")]
        dims: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a positive-map witness on a state and certify it on
    /// product states
    Witness {
        /// Map name: transposition, reduction, choi
        #[arg(long, conflicts_with = "witness_file")]
        map: Option<String>,
        /// Import a witness operator from a JSON matrix file instead
        #[arg(long)]
        witness_file: Option<PathBuf>,
        /// Dimension of the map input space (fixed to 3 for choi)
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Product-state probes for the positivity certificate
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write the witness matrix itself to --output instead of a report
        #[arg(long, default_value_t = false)]
        export: bool,
    },
    /// Validate the tiles UPB and its bound entangled complement state
    Upb {
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| {
        std::env::var("ENTSEP_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn resolve_state(args: &StateArgs) -> Result<(DensityMatrix, serde_json::Value)> {
    if let Some(path) = &args.input {
        return report::parse_state_file(path);
    }
    let name = args
        .family
        .as_deref()
        .ok_or_else(|| Error::Input("provide --family or --input".into()))?;
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("--param must be k=v, got \"{kv}\"")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Input(format!("parameter {k} is not a number: \"{v}\"")))?;
        params.insert(k.trim().to_string(), v);
    }
    if let Some(alpha) = args.alpha {
        params.insert("alpha".into(), alpha);
    }
    if let Some(f) = args.f {
        params.insert("f".into(), f);
    }
    let spec = report::family_from_params(name, &params)?;
    let rho = states::make(&spec)?;
    let input = serde_json::to_value(&spec)?;
    Ok((rho, input))
}

fn family_of(input: &serde_json::Value) -> Option<StateFamily> {
    serde_json::from_value(input.clone()).ok()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            state,
            out,
            seed,
            samples,
        } => {
            let seed = resolve_seed(seed);
            let (rho, input) = resolve_state(&state)?;
            let mut rng = RngStream::from_seed(seed);
            let report = analyze(&rho, family_of(&input), samples, &mut rng)?;
            let envelope = Envelope::new(seed, input, report);
            emit_json(&out, &envelope)
        }
        Command::Classify {
            state,
            out,
            seed,
            samples,
        } => {
            let seed = resolve_seed(seed);
            let (rho, input) = resolve_state(&state)?;
            let mut rng = RngStream::from_seed(seed);
            let mut hints = match family_of(&input) {
                Some(family) => ClassifyHints::with_family(family),
                None => ClassifyHints {
                    try_canonical_qubit_projection: true,
                    ..Default::default()
                },
            };
            hints.projector_search_budget = samples;
            let classification = criteria::classify(&rho, &hints, &mut rng);
            let envelope = Envelope::new(seed, input, classification);
            emit_json(&out, &envelope)
        }
        Command::Distill {
            protocol,
            state,
            out,
            seed,
            target,
        } => {
            let seed = resolve_seed(seed);
            match protocol.as_str() {
                "bbpssw" => {
                    let f = state.f.ok_or_else(|| Error::Input("bbpssw needs --f".into()))?;
                    let target =
                        target.ok_or_else(|| Error::Input("bbpssw needs --target".into()))?;
                    let trace = distill::bbpssw_run(f, target)?;
                    let input = serde_json::json!({"protocol": "bbpssw", "f": f, "target": target});
                    emit_trace(&out, seed, input, &trace)
                }
                "filtering" => {
                    let (rho, input) = resolve_state(&state)?;
                    let res = distill::filter_from_negative_eigenvector(&rho)?;
                    let psi_minus_overlap = entsep::matcore::fidelity_with(
                        &res.output,
                        &states::singlet_vector(),
                    )
                    .ok();
                    let result = serde_json::json!({
                        "protocol": "filtering",
                        "success_prob": res.success_prob,
                        "singlet_fraction": criteria::singlet_fraction(&res.output).ok(),
                        "psi_minus_overlap": psi_minus_overlap,
                        "output": MatrixFile::from_state(&res.output),
                    });
                    let envelope = Envelope::new(seed, input, result);
                    emit_json(&out, &envelope)
                }
                "reduction_filter" => {
                    let (rho, input) = resolve_state(&state)?;
                    let res = distill::reduction_filter(&rho)?;
                    let result = serde_json::json!({
                        "protocol": "reduction_filter",
                        "success_prob": res.success_prob,
                        "singlet_fraction": criteria::singlet_fraction(&res.output).ok(),
                        "output": MatrixFile::from_state(&res.output),
                    });
                    let envelope = Envelope::new(seed, input, result);
                    emit_json(&out, &envelope)
                }
                "isotropic_reduce" => {
                    let (rho, input) = resolve_state(&state)?;
                    let reduced = distill::isotropic_reduce_to_qubits(&rho)?;
                    let result = serde_json::json!({
                        "protocol": "isotropic_reduce",
                        "singlet_fraction": criteria::singlet_fraction(&reduced).ok(),
                        "output": MatrixFile::from_state(&reduced),
                    });
                    let envelope = Envelope::new(seed, input, result);
                    emit_json(&out, &envelope)
                }
                other => Err(Error::Input(format!("unknown protocol \"{other}\""))),
            }
        }
        Command::Activate {
            f,
            alpha,
            iters,
            out,
            seed,
        } => {
            let seed = resolve_seed(seed);
            let trace = distill::activation_run(f, alpha, iters)?;
            let input = serde_json::json!({
                "protocol": "activation", "f": f, "alpha": alpha, "iters": iters
            });
            emit_trace(&out, seed, input, &trace)
        }
        Command::Volume {
            samples,
            dims,
            out,
            seed,
        } => {
            let seed = resolve_seed(seed);
            let pairs: Vec<(usize, usize)> = if dims.is_empty() {
                vec![(2, 2), (2, 3), (2, 4), (3, 3)]
            } else {
                dims.iter()
                    .map(|s| {
                        let (a, b) = s
                            .split_once('x')
                            .ok_or_else(|| Error::Input(format!("--dims must be AxB, got \"{s}\"")))?;
                        Ok((
                            a.parse()
                                .map_err(|_| Error::Input(format!("bad dimension \"{a}\"")))?,
                            b.parse()
                                .map_err(|_| Error::Input(format!("bad dimension \"{b}\"")))?,
                        ))
                    })
                    .collect::<Result<_>>()?
            };
            let estimates: Vec<_> = pairs
                .iter()
                .map(|&(a, b)| volume::estimate_ppt_ratio(a, b, samples, seed))
                .collect();
            let input = serde_json::json!({"samples": samples, "dims": pairs});
            match out.format {
                Format::Csv => report::emit(out.output.as_deref(), &report::volume_to_csv(&estimates)?),
                Format::Json => {
                    let envelope = Envelope::new(seed, input, estimates);
                    emit_json(&out, &envelope)
                }
            }
        }
        Command::Witness {
            map,
            witness_file,
            d,
            state,
            out,
            seed,
            samples,
            export,
        } => {
            let seed = resolve_seed(seed);
            let (witness, name, dim) = match (&map, &witness_file) {
                (Some(name), None) => {
                    let (linear_map, dim) = match name.as_str() {
                        "transposition" => (maps::LinearMap::transposition(d), d),
                        "reduction" => (maps::LinearMap::reduction(d), d),
                        "choi" => (maps::LinearMap::choi3(), 3),
                        other => return Err(Error::Input(format!("unknown map \"{other}\""))),
                    };
                    (maps::witness_from_map(&linear_map), name.clone(), dim)
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path)?;
                    let file: MatrixFile = serde_json::from_str(&text)?;
                    let witness = maps::witness_from_matrix_file(&file)?;
                    let dim = witness.dim_a;
                    (witness, format!("file:{}", path.display()), dim)
                }
                _ => {
                    return Err(Error::Input(
                        "provide exactly one of --map or --witness-file".into(),
                    ))
                }
            };
            if export {
                let file = MatrixFile::from_matrix(&witness.op, witness.dim_a, witness.dim_b);
                return report::emit(out.output.as_deref(), &serde_json::to_string_pretty(&file)?);
            }
            let mut rng = RngStream::from_seed(seed);
            let value_on_state = if state.family.is_some() || state.input.is_some() {
                let (rho, _) = resolve_state(&state)?;
                Some(maps::witness_value(&witness, &rho)?)
            } else {
                None
            };
            let cert = maps::certify_witness_on_products(&witness, samples, &mut rng);
            let result = WitnessReport {
                map: name,
                dim,
                value_on_state,
                product_positivity_min: cert.min_value,
                product_positivity_probes: cert.probes,
                product_positivity_passed: cert.passed,
            };
            let input = serde_json::json!({"map": result.map, "d": dim});
            let envelope = Envelope::new(seed, input, result);
            emit_json(&out, &envelope)
        }
        Command::Upb { out, seed } => {
            let seed = resolve_seed(seed);
            let upb = states::tiles_upb();
            let validation = criteria::validate_upb(&upb);
            let complement = states::upb_complement_state(&upb)?;
            let eigs = entsep::matcore::hermitian_eigenvalues(complement.matrix())?;
            let rank = criteria::numerical_rank(&eigs);
            let min_pt = entsep::matcore::min_pt_eigenvalue(&complement)?;
            let mut max_overlap = 0.0f64;
            for k in 0..upb.len() {
                let w = upb.product_vector(k);
                max_overlap = max_overlap
                    .max(entsep::matcore::expectation(complement.matrix(), &w).norm());
            }
            let result = UpbCliReport {
                members: upb.len(),
                dim_a: upb.dim_a(),
                dim_b: upb.dim_b(),
                orthogonal: validation.orthogonal,
                unextendible: validation.unextendible,
                max_gram_offdiag: validation.max_gram_offdiag,
                complement_rank: rank,
                complement_min_pt_eigenvalue: min_pt,
                complement_max_member_overlap: max_overlap,
            };
            let input = serde_json::json!({"upb": "tiles"});
            let envelope = Envelope::new(seed, input, result);
            emit_json(&out, &envelope)
        }
    }
}

fn analyze(
    rho: &DensityMatrix,
    family: Option<StateFamily>,
    fef_budget: usize,
    rng: &mut RngStream,
) -> Result<AnalyzeReport> {
    let mut criteria_reports = vec![
        criteria::ppt_check(rho),
        criteria::reduction_check(rho),
        criteria::entropic_check(rho, EntropicOrder::S0),
        criteria::entropic_check(rho, EntropicOrder::S1),
        criteria::entropic_check(rho, EntropicOrder::S2),
        criteria::entropic_check(rho, EntropicOrder::SInf),
        criteria::rank_bound_check(rho),
        criteria::chsh_m(rho),
        criteria::singlet_fraction_check(rho),
    ];
    let singlet_fraction = criteria::singlet_fraction(rho).ok();
    let fully_entangled_fraction = if rho.dim_a() == rho.dim_b() && rho.dim_a() <= 4 {
        let check = criteria::fully_entangled_fraction_check(rho, fef_budget, rng);
        let value = check.evidence.get("fef_lower_bound").copied();
        criteria_reports.push(check);
        value
    } else {
        None
    };
    let choi_detection = if rho.dim_a() == 3 && rho.dim_b() == 3 {
        Some(maps::choi_detect(rho)?)
    } else {
        None
    };
    let hints = match family {
        Some(family) => ClassifyHints::with_family(family),
        None => ClassifyHints {
            try_canonical_qubit_projection: true,
            ..Default::default()
        },
    };
    let classification = criteria::classify(rho, &hints, rng);
    Ok(AnalyzeReport {
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        criteria: criteria_reports,
        singlet_fraction,
        fully_entangled_fraction,
        choi_detection,
        classification,
    })
}

fn emit_json<T: serde::Serialize>(out: &OutputArgs, envelope: &Envelope<T>) -> Result<()> {
    if out.format == Format::Csv {
        return Err(Error::Input(
            "this command only supports --format json".into(),
        ));
    }
    report::emit(out.output.as_deref(), &envelope.to_json_pretty()?)
}

fn emit_trace(
    out: &OutputArgs,
    seed: u64,
    input: serde_json::Value,
    trace: &distill::ProtocolTrace,
) -> Result<()> {
    match out.format {
        Format::Csv => report::emit(out.output.as_deref(), &report::trace_to_csv(trace)?),
        Format::Json => {
            let envelope = Envelope::new(seed, input, trace);
            emit_json(out, &envelope)
        }
    }
}
