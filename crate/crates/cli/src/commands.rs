//! Subcommand implementations. Every artifact embeds version, input
//! hash, and seeds; reruns with the same inputs are byte-identical.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use tomopoly::credibility::{estimate_credibility, ratio_scan};
use tomopoly::fom::{fom_interval, mle_estimate, FomSpec, MleOptions};
use tomopoly::geometry::{bounding_box, chebyshev_center, hit_and_run_sample, SamplerOptions};
use tomopoly::polytope::{build_polytope_with_groups, ConfidencePolytope, EpsilonSplit};
use tomopoly::quantum::{unembed_state, BlochVector, DensityMatrix, Povm};
use tomopoly::simulation::{
    coverage_rate, make_state, pauli_settings_povm, sample_counts, standard_povm, PovmKind,
    RngSeed, StateKind,
};

use crate::dataset::{dataset_to_json, ingest_dataset, matrix_to_json, Dataset};
use crate::error::CliError;
use crate::mesh::mesh_qubit_polytope;
use crate::report::{facets_to_json, meta_block, sha256_hex};

#[derive(Parser, Debug)]
#[command(
    name = "tomopoly",
    version,
    about = "Confidence polytopes for quantum state tomography"
)]
pub struct Cli {
    /// Worker threads for inner parallelism (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SamplerArgs {
    /// Number of states to draw.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 10)]
    pub thinning: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

impl SamplerArgs {
    fn options(&self) -> SamplerOptions {
        SamplerOptions {
            burn_in: self.burn_in,
            thinning: self.thinning,
            chains: self.chains,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "samples": self.samples,
            "burn_in": self.burn_in,
            "thinning": self.thinning,
            "chains": self.chains,
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the confidence polytope and report its geometry.
    Build {
        /// Dataset JSON path.
        #[arg(long)]
        data: PathBuf,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the maximum-likelihood reference estimate.
        #[arg(long, default_value_t = false)]
        no_mle: bool,
    },
    /// Confidence interval for a figure of merit over the region.
    Fom {
        #[arg(long)]
        data: PathBuf,
        /// fidelity | trace-distance | negativity
        #[arg(long)]
        fom: String,
        /// Reference state: bell, ghz2/ghz3/…, mixed:d, mle,
        /// bloch:x,y,z, pure:a0,a1,…, or a path to a matrix JSON file.
        #[arg(long)]
        reference: Option<String>,
        /// Subsystem dimensions for negativity, e.g. 2,2.
        #[arg(long)]
        dims: Option<String>,
        /// Bipartition cut position for negativity.
        #[arg(long)]
        cut: Option<usize>,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Axis-aligned bounding box of the facet polytope.
    Bbox {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform sample of the region.
    Sample {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Triangle mesh of a qubit region clipped to the Bloch ball.
    Mesh {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate measurement data and write a dataset file.
    Simulate {
        /// sic-qubit | mub-qubit | skewed-sic-qubit | sic-qutrit |
        /// pauli:s | kind*kind (tensor product)
        #[arg(long)]
        povm: String,
        /// bell | ghz2/ghz3/… | noisy-bell:p | mixed:d | bloch:x,y,z |
        /// pure:a0,a1,…
        #[arg(long)]
        state: String,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        epsilon: f64,
        /// Grouping schemes as 0-based index sets, e.g. "0,1;2,3".
        #[arg(long)]
        groups: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical coverage over repeated simulated data sets.
    Coverage {
        #[arg(long)]
        povm: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Credibility defect of a polytope, or an ε/ε_b ratio scan.
    Credibility {
        /// Dataset path for a single estimate.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Scan dimensions, e.g. 2,3 (ignored with --data).
        #[arg(long)]
        dims: Option<String>,
        /// Scan data sizes, e.g. 500,1000 (ignored with --data).
        #[arg(long)]
        ns: Option<String>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Confidence budget for scan-built polytopes.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Recorded Monte-Carlo steps per estimate.
        #[arg(long, default_value_t = 200_000)]
        mc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point used by both `main` and the test harness.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let payload = e.to_json();
            eprintln!("{payload}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Build { data, out, no_mle } => cmd_build(&data, out.as_deref(), no_mle),
        Command::Fom {
            data,
            fom,
            reference,
            dims,
            cut,
            sampler,
            out,
        } => cmd_fom(&data, &fom, reference.as_deref(), dims.as_deref(), cut, &sampler, out.as_deref()),
        Command::Bbox { data, out } => cmd_bbox(&data, out.as_deref()),
        Command::Sample { data, sampler, out } => cmd_sample(&data, &sampler, out.as_deref()),
        Command::Mesh { data, out } => cmd_mesh(&data, out.as_deref()),
        Command::Simulate {
            povm,
            state,
            shots,
            epsilon,
            groups,
            seed,
            out,
        } => cmd_simulate(&povm, &state, shots, epsilon, groups.as_deref(), seed, out.as_deref()),
        Command::Coverage {
            povm,
            state,
            shots,
            epsilon,
            reps,
            seed,
            out,
        } => cmd_coverage(&povm, &state, shots, epsilon, reps, seed, out.as_deref()),
        Command::Credibility {
            data,
            dims,
            ns,
            reps,
            epsilon,
            mc,
            seed,
            out,
        } => cmd_credibility(
            data.as_deref(),
            dims.as_deref(),
            ns.as_deref(),
            reps,
            epsilon,
            mc,
            seed,
            out.as_deref(),
        ),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| CliError::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}

fn emit_json(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    emit(out, &serde_json::to_string_pretty(value).expect("serialisable"))
}

fn load(data: &Path) -> Result<(Dataset, Povm, ConfidencePolytope, String), CliError> {
    let (ds, bytes) = ingest_dataset(data)?;
    let (povm, counts) = ds.realize()?;
    let poly = build_polytope_with_groups(&povm, &counts, ds.epsilon, &ds.split, &ds.groups)?;
    Ok((ds, povm, poly, sha256_hex(&bytes)))
}

// ---- parsing helpers for --povm / --state ----

pub fn parse_povm(spec: &str) -> Result<Povm, CliError> {
    let factors: Vec<&str> = spec.split('*').map(str::trim).collect();
    if factors.len() > 1 {
        let kinds = factors
            .iter()
            .map(|f| parse_povm_kind(f))
            .collect::<Result<Vec<_>, _>>()?;
        return standard_povm(&PovmKind::Tensor(kinds)).map_err(CliError::Core);
    }
    if let Some(rest) = spec.strip_prefix("pauli:") {
        let s: usize = rest
            .parse()
            .map_err(|_| CliError::Usage(format!("bad pauli setting count '{rest}'")))?;
        return pauli_settings_povm(s).map_err(CliError::Core);
    }
    standard_povm(&parse_povm_kind(spec)?).map_err(CliError::Core)
}

fn parse_povm_kind(spec: &str) -> Result<PovmKind, CliError> {
    match spec {
        "sic-qubit" => Ok(PovmKind::SicQubit),
        "mub-qubit" => Ok(PovmKind::MubQubit),
        "skewed-sic-qubit" => Ok(PovmKind::SkewedSicQubit),
        "sic-qutrit" => Ok(PovmKind::SicQutrit),
        other => Err(CliError::Usage(format!(
            "unknown POVM '{other}' (expected sic-qubit, mub-qubit, skewed-sic-qubit, sic-qutrit, pauli:<s>, or a '*' tensor)"
        ))),
    }
}

fn parse_floats(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number '{t}'")))
        })
        .collect()
}

pub fn parse_state(spec: &str) -> Result<DensityMatrix, CliError> {
    if spec == "bell" {
        return make_state(&StateKind::Ghz(2)).map_err(CliError::Core);
    }
    if let Some(rest) = spec.strip_prefix("ghz") {
        let s: usize = rest
            .parse()
            .map_err(|_| CliError::Usage(format!("bad GHZ size '{rest}'")))?;
        return make_state(&StateKind::Ghz(s)).map_err(CliError::Core);
    }
    if let Some(rest) = spec.strip_prefix("noisy-bell:") {
        let p: f64 = rest
            .parse()
            .map_err(|_| CliError::Usage(format!("bad noise level '{rest}'")))?;
        return make_state(&StateKind::NoisyBell(p)).map_err(CliError::Core);
    }
    if let Some(rest) = spec.strip_prefix("mixed:") {
        let d: usize = rest
            .parse()
            .map_err(|_| CliError::Usage(format!("bad dimension '{rest}'")))?;
        return make_state(&StateKind::Mixed(d)).map_err(CliError::Core);
    }
    if let Some(rest) = spec.strip_prefix("bloch:") {
        let coords = parse_floats(rest)?;
        if coords.len() != 3 {
            return Err(CliError::Usage("bloch: expects x,y,z".into()));
        }
        let basis = tomopoly::quantum::gellmann_basis(2).map_err(CliError::Core)?;
        let r = BlochVector::new(2, coords).map_err(CliError::Core)?;
        let m = unembed_state(&r, &basis).map_err(CliError::Core)?;
        return DensityMatrix::new(m).map_err(CliError::Core);
    }
    if let Some(rest) = spec.strip_prefix("pure:") {
        let amps = parse_floats(rest)?;
        let v: Vec<Complex64> = amps.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        return make_state(&StateKind::Pure(v)).map_err(CliError::Core);
    }
    Err(CliError::Usage(format!(
        "unknown state '{spec}' (expected bell, ghz<k>, noisy-bell:<p>, mixed:<d>, bloch:x,y,z, pure:…)"
    )))
}

fn parse_groups(spec: &str) -> Result<Vec<Vec<usize>>, CliError> {
    spec.split(';')
        .map(|g| {
            g.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad group index '{t}'")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

fn reference_state(
    spec: Option<&str>,
    povm: &Povm,
    ds: &Dataset,
) -> Result<Option<DensityMatrix>, CliError> {
    let Some(spec) = spec else {
        return Ok(None);
    };
    if spec == "mle" {
        let counts = tomopoly::quantum::CountVector::new(ds.counts.clone());
        let res = mle_estimate(povm, &counts, MleOptions::default()).map_err(CliError::Core)?;
        return Ok(Some(res.state));
    }
    let as_path = Path::new(spec);
    if as_path.exists() {
        let bytes = std::fs::read(as_path).map_err(|e| CliError::Io {
            path: spec.to_string(),
            message: e.to_string(),
        })?;
        let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Schema {
            path: String::new(),
            message: format!("invalid JSON in reference file: {e}"),
        })?;
        let d = ds.dim;
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(d, d);
        let rows = value
            .as_array()
            .ok_or_else(|| CliError::Schema {
                path: "".into(),
                message: "reference must be a matrix of [re, im] pairs".into(),
            })?;
        if rows.len() != d {
            return Err(CliError::Schema {
                path: "".into(),
                message: format!("reference matrix must be {d}x{d}"),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row
                .as_array()
                .ok_or_else(|| CliError::Schema {
                    path: format!("/{i}"),
                    message: "expected a row".into(),
                })?
                .iter()
                .enumerate()
            {
                let pair = entry.as_array().ok_or_else(|| CliError::Schema {
                    path: format!("/{i}/{j}"),
                    message: "expected [re, im]".into(),
                })?;
                m[(i, j)] = Complex64::new(
                    pair[0].as_f64().unwrap_or(f64::NAN),
                    pair[1].as_f64().unwrap_or(f64::NAN),
                );
            }
        }
        return Ok(Some(DensityMatrix::new(m).map_err(CliError::Core)?));
    }
    Ok(Some(parse_state(spec)?))
}

// ---- subcommands ----

fn geometry_block(poly: &ConfidencePolytope) -> Value {
    let bbox = match bounding_box(poly) {
        Ok(bb) => json!({
            "intervals": bb.intervals,
            "widest_axis": bb.widest_axis,
            "edge_lengths": bb.edge_lengths(),
        }),
        Err(tomopoly::Error::UnboundedAxis(i)) => json!({"unbounded_axis": i}),
        Err(e) => json!({"error": e.kind()}),
    };
    let cheb = match chebyshev_center(poly) {
        Ok((center, radius)) => json!({
            "center": center.coords(),
            "radius": radius,
        }),
        Err(tomopoly::Error::UnboundedAxis(i)) => json!({"unbounded_axis": i}),
        Err(e) => json!({"error": e.kind()}),
    };
    json!({"bounding_box": bbox, "chebyshev": cheb})
}

fn cmd_build(data: &Path, out: Option<&Path>, no_mle: bool) -> Result<(), CliError> {
    let (ds, povm, poly, sha) = load(data)?;
    let mle = if no_mle {
        Value::Null
    } else {
        let counts = tomopoly::quantum::CountVector::new(ds.counts.clone());
        match mle_estimate(&povm, &counts, MleOptions::default()) {
            Ok(res) => json!({
                "state": matrix_to_json(res.state.matrix()),
                "iterations": res.iterations,
                "log_likelihood": res.log_likelihood,
                "converged": res.converged,
            }),
            Err(e) => json!({"error": e.kind()}),
        }
    };
    let report = json!({
        "facets": facets_to_json(&poly),
        "epsilon_total": poly.epsilon_total(),
        "geometry": geometry_block(&poly),
        "mle": mle,
        "informationally_complete": povm.is_informationally_complete(),
        "meta": meta_block(Some(&sha), None, json!({"data": data.display().to_string(), "no_mle": no_mle})),
    });
    emit_json(out, &report)
}

fn cmd_bbox(data: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (_, _, poly, sha) = load(data)?;
    let bb = bounding_box(&poly).map_err(CliError::Core)?;
    let payload = json!({
        "intervals": bb.intervals,
        "widest_axis": bb.widest_axis,
        "edge_lengths": bb.edge_lengths(),
        "meta": meta_block(Some(&sha), None, json!({"data": data.display().to_string()})),
    });
    emit_json(out, &payload)
}

fn cmd_sample(data: &Path, sampler: &SamplerArgs, out: Option<&Path>) -> Result<(), CliError> {
    let (_, _, poly, sha) = load(data)?;
    let set = hit_and_run_sample(
        &poly,
        sampler.samples,
        RngSeed(sampler.seed),
        sampler.options(),
    )
    .map_err(CliError::Core)?;
    let states: Vec<Value> = set.states.iter().map(|s| matrix_to_json(s.matrix())).collect();
    let bloch: Vec<Vec<f64>> = set.bloch(&poly);
    let payload = json!({
        "states": states,
        "bloch": bloch,
        "meta": meta_block(Some(&sha), Some(sampler.seed), sampler.to_json()),
    });
    emit_json(out, &payload)
}

fn cmd_mesh(data: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (_, _, poly, sha) = load(data)?;
    let mesh = mesh_qubit_polytope(&poly).map_err(CliError::Core)?;
    let mut payload = mesh.to_json();
    payload["meta"] = meta_block(Some(&sha), None, json!({"data": data.display().to_string()}));
    emit_json(out, &payload)
}

fn cmd_fom(
    data: &Path,
    fom: &str,
    reference: Option<&str>,
    dims: Option<&str>,
    cut: Option<usize>,
    sampler: &SamplerArgs,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (ds, povm, poly, sha) = load(data)?;
    let spec = match fom {
        "fidelity" | "trace-distance" => {
            let reference = reference_state(reference, &povm, &ds)?.ok_or_else(|| {
                CliError::Usage(format!("--reference is required for {fom}"))
            })?;
            if fom == "fidelity" {
                FomSpec::Fidelity { reference }
            } else {
                FomSpec::TraceDistance { reference }
            }
        }
        "negativity" => {
            let dims_spec = dims.ok_or_else(|| {
                CliError::Usage("--dims is required for negativity (e.g. 2,2)".into())
            })?;
            let dims: Vec<usize> = dims_spec
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad dimension '{t}'")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cut = cut.ok_or_else(|| {
                CliError::Usage("--cut is required for negativity (e.g. 1)".into())
            })?;
            FomSpec::Negativity { dims, cut }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown figure of merit '{other}' (fidelity, trace-distance, negativity)"
            )))
        }
    };
    let interval = fom_interval(
        &poly,
        &spec,
        sampler.samples,
        RngSeed(sampler.seed),
        sampler.options(),
    )
    .map_err(CliError::Core)?;
    let mut options = sampler.to_json();
    options["fom"] = json!(fom);
    if let Some(r) = reference {
        options["reference"] = json!(r);
    }
    if let Some(d) = dims {
        options["dims"] = json!(d);
    }
    if let Some(c) = cut {
        options["cut"] = json!(c);
    }
    let mut payload = json!({
        "fom": interval.name,
        "lower": interval.lower,
        "upper": interval.upper,
        "sample_count": interval.sample_count,
        "meta": meta_block(Some(&sha), Some(sampler.seed), options),
    });
    if let Some(r) = &interval.reference {
        payload["reference"] = matrix_to_json(r.matrix());
    }
    if let Some((dims, cut)) = &interval.bipartition {
        payload["bipartition"] = json!({"dims": dims, "cut": cut});
    }
    emit_json(out, &payload)
}

fn cmd_simulate(
    povm_spec: &str,
    state_spec: &str,
    shots: u64,
    epsilon: f64,
    groups: Option<&str>,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let povm = parse_povm(povm_spec)?;
    let state = parse_state(state_spec)?;
    if state.dim() != povm.dim() {
        return Err(CliError::Usage(format!(
            "state dimension {} does not match POVM dimension {}",
            state.dim(),
            povm.dim()
        )));
    }
    let counts = sample_counts(&state, &povm, shots, RngSeed(seed)).map_err(CliError::Core)?;
    let groups = match groups {
        Some(g) => parse_groups(g)?,
        None => Vec::new(),
    };
    let ds = Dataset {
        dim: povm.dim(),
        povm_elements: povm.elements().to_vec(),
        counts: counts.counts().to_vec(),
        epsilon,
        split: EpsilonSplit::Uniform,
        groups,
        meta: Some(meta_block(
            None,
            Some(seed),
            json!({
                "povm": povm_spec,
                "state": state_spec,
                "shots": shots,
            }),
        )),
    };
    emit_json(out, &dataset_to_json(&ds))
}

fn cmd_coverage(
    povm_spec: &str,
    state_spec: &str,
    shots: u64,
    epsilon: f64,
    reps: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let povm = parse_povm(povm_spec)?;
    let state = parse_state(state_spec)?;
    if state.dim() != povm.dim() {
        return Err(CliError::Usage(format!(
            "state dimension {} does not match POVM dimension {}",
            state.dim(),
            povm.dim()
        )));
    }
    let rate = coverage_rate(
        &state,
        &povm,
        shots,
        epsilon,
        &EpsilonSplit::Uniform,
        reps,
        RngSeed(seed),
    )
    .map_err(CliError::Core)?;
    let payload = json!({
        "rate": rate,
        "reps": reps,
        "target": 1.0 - epsilon,
        "meta": meta_block(
            None,
            Some(seed),
            json!({
                "povm": povm_spec,
                "state": state_spec,
                "shots": shots,
                "epsilon": epsilon,
            })
        ),
    });
    emit_json(out, &payload)
}

#[allow(clippy::too_many_arguments)]
fn cmd_credibility(
    data: Option<&Path>,
    dims: Option<&str>,
    ns: Option<&str>,
    reps: usize,
    epsilon: f64,
    mc: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut csv = String::new();
    csv.push_str(&format!(
        "# tomopoly {} | rng {} | seed {seed} | mc {mc}\n",
        crate::report::TOOL_VERSION,
        tomopoly::RNG_ALGORITHM
    ));
    csv.push_str("d,n,rep,eps,eps_b_hat,stderr,ess,ratio\n");
    if let Some(path) = data {
        let (ds, povm, poly, _) = load(path)?;
        let counts = tomopoly::quantum::CountVector::new(ds.counts.clone());
        let est = estimate_credibility(&poly, &povm, &counts, mc, RngSeed(seed))
            .map_err(CliError::Core)?;
        let n: u64 = ds.counts.iter().sum();
        let ratio = if est.eps_b_hat > 0.0 {
            ds.epsilon / est.eps_b_hat
        } else {
            f64::INFINITY
        };
        if est.effective_sample_size < 100.0 {
            eprintln!(
                "warning: effective sample size {:.1} below 100; estimate is noisy",
                est.effective_sample_size
            );
        }
        csv.push_str(&format!(
            "{},{},0,{},{},{},{},{}\n",
            ds.dim, n, ds.epsilon, est.eps_b_hat, est.std_error, est.effective_sample_size, ratio
        ));
    } else {
        let dims: Vec<usize> = dims
            .ok_or_else(|| CliError::Usage("--dims or --data is required".into()))?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad dimension '{t}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ns: Vec<u64> = ns
            .ok_or_else(|| CliError::Usage("--ns is required for a scan".into()))?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad data size '{t}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = ratio_scan(&dims, &ns, reps, epsilon, mc, RngSeed(seed))
            .map_err(CliError::Core)?;
        for r in rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.dim, r.n, r.rep, r.eps, r.eps_b_hat, r.std_error, r.ess, r.ratio
            ));
        }
    }
    emit(out, csv.trim_end())
}
