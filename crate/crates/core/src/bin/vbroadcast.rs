use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use vbroadcast::audit;
use vbroadcast::channels;
use vbroadcast::choi::{BlochVector, ChoiOperator, EquatorialState};
use vbroadcast::config::Config;
use vbroadcast::constraints;
use vbroadcast::cost;
use vbroadcast::linalg::random_hermitian;
use vbroadcast::reproduce;
use vbroadcast::sampler::{self, Observable, Scenario, ShotPlan, Strategy};
use vbroadcast::symmetry;
use vbroadcast::Error;

#[derive(Parser)]
#[command(name = "vbroadcast", version, about = "Virtual phase-covariant qubit broadcasting toolkit")]
struct Cli {
    /// TOML config file (default: $VBROADCAST_CONFIG, else built-in defaults)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Master seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Obs {
    X,
    Y,
    Z,
    I,
}

impl Obs {
    fn observable(self) -> Observable {
        match self {
            Obs::X => Observable::pauli_x(),
            Obs::Y => Observable::pauli_y(),
            Obs::Z => Observable::pauli_z(),
            Obs::I => Observable::identity(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Requirement {
    Cp,
    Classic,
    Broadcast,
    Phase,
    Flip,
    Swap,
}

#[derive(Subcommand)]
enum Command {
    /// Twirl a Choi operator (random if none given) onto the symmetric family and print its parameters
    DeriveFamily {
        #[arg(long)]
        choi: Option<String>,
        /// Write the twirled Choi operator here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the trace norm over the constrained family, with a grid certificate
    Minimize {
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        grid_points: Option<usize>,
        /// Write the minimizing Choi operator here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a map into positive and negative parts and bound its simulation cost
    Decompose {
        /// Choi JSON file or one of: optimal, cloner, canonical, universal
        #[arg(long)]
        choi: String,
        /// Write e_plus.json and e_minus.json here
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Report HP/TP/CP, classical consistency, broadcasting and symmetry residuals
    Verify {
        #[arg(long)]
        choi: String,
        /// Extra properties that must hold for exit status 0 (HP and TP always must)
        #[arg(long, value_enum, value_delimiter = ',')]
        require: Vec<Requirement>,
    },
    /// Diamond-norm distance with certificates
    Distance {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        starts: Option<usize>,
        /// Exit with status 2 unless the bracket collapses
        #[arg(long)]
        require_certified: bool,
    },
    /// Monte-Carlo estimation by quasiprobability sampling
    Simulate {
        #[arg(long, default_value = "optimal")]
        map: String,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, value_enum, default_value_t = Obs::X)]
        o1: Obs,
        #[arg(long, value_enum, default_value_t = Obs::X)]
        o2: Obs,
        /// Default: (a+b)²·n for the virtual strategy, n for direct
        #[arg(long)]
        shots: Option<u64>,
        /// Use n shots for the virtual strategy instead of (a+b)²·n
        #[arg(long)]
        uninflated: bool,
        /// Measure input copies directly instead of simulating the map
        #[arg(long)]
        direct: bool,
        /// Run a failure-rate experiment with this many repetitions
        #[arg(long)]
        repetitions: Option<usize>,
        /// Per-repetition errors of the failure-rate experiment
        #[arg(long)]
        errors_csv: Option<PathBuf>,
    },
    /// Copy counts of simulating the map versus distributing copies
    SampleReport {
        #[arg(long, default_value = "optimal")]
        map: String,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Canonical broadcaster and universal cloner numbers
    Baseline {
        #[arg(long, default_value_t = 100)]
        states: usize,
    },
    /// Run every headline computation and print one JSON summary
    ReproducePaper,
    /// Write a named map as Choi JSON
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(v) => {
            emit(&v, format);
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(v)) => {
            emit(&v, format);
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut config = Config::resolve(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    let tol = config.tolerances.clone();
    match cli.command {
        Command::DeriveFamily { choi, out } => {
            let (source, c) = match choi {
                Some(arg) => (arg.clone(), load_map(&arg)?),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    let m = random_hermitian(8, &mut rng);
                    (format!("random Hermitian, seed {}", config.seed), ChoiOperator::new(m, 2, vec![2, 2])?)
                }
            };
            let twirled = symmetry::symmetric_twirl(&c);
            let params = symmetry::extract_params(&twirled, 1e-12)?;
            if let Some(path) = out {
                write(&path, &twirled.to_json())?;
            }
            Ok(json!({
                "source": source,
                "params": params,
                "classic_params": constraints::apply_classic(&params),
            }))
        }
        Command::Minimize { starts, grid_points, out } => {
            let mut mc = config.minimize.clone();
            if let Some(s) = starts {
                mc.starts = s;
            }
            if let Some(g) = grid_points {
                mc.grid_points = g;
            }
            let report = cost::minimize(&mc);
            if let Some(path) = out {
                write(&path, &report.argmin.choi().to_json())?;
            }
            let pass = report.grid_certificate.passes();
            let v = to_value(&report)?;
            if pass {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Command::Decompose { choi, out_dir } => {
            let c = load_map(&choi)?;
            let split = cost::pos_neg_split(&c, tol.spectral)?;
            let bounds = cost::base_norm_bounds(&c, tol.spectral, tol.certificate_width)?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).map_err(Error::from)?;
                for (name, part) in [("e_plus.json", &split.e_plus), ("e_minus.json", &split.e_minus)] {
                    if let Some(e) = part {
                        write(&dir.join(name), &e.to_json())?;
                    }
                }
            }
            Ok(json!({
                "a": split.a,
                "b": split.b,
                "cost": split.cost(),
                "tp_exact": split.tp_exact,
                "overlap": split.overlap(),
                "lower": bounds.lower,
                "upper": bounds.upper,
                "certified": bounds.certified,
            }))
        }
        Command::Verify { choi, require } => {
            let c = load_map(&choi)?;
            let a = audit::audit(&c, config.grid_radii, config.grid_angles, tol.structural, tol.broadcast)?;
            let sym_tol = tol.structural;
            let pass = a.is_hptp()
                && require.iter().all(|r| match r {
                    Requirement::Cp => a.completely_positive,
                    Requirement::Classic => a.classic,
                    Requirement::Broadcast => a.broadcast.pass,
                    Requirement::Phase => a.phase_residual <= sym_tol,
                    Requirement::Flip => a.flip_residual <= sym_tol,
                    Requirement::Swap => a.swap_residual <= sym_tol,
                });
            let mut v = to_value(&a)?;
            v["pass"] = json!(pass);
            if pass {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Command::Distance {
            a,
            b,
            starts,
            require_certified,
        } => {
            let (ca, cb) = (load_map(&a)?, load_map(&b)?);
            let mut dc = config.diamond.clone();
            if let Some(s) = starts {
                dc.starts = s;
            }
            let d = channels::diamond_distance(&ca, &cb, &dc)?;
            let v = json!({
                "value": d.value,
                "search_value": d.search_value,
                "lower_cert": d.lower_cert,
                "upper_cert": d.upper_cert,
                "certified": d.certified,
            });
            if require_certified && !d.certified {
                Err(Failure::Verification(v))
            } else {
                Ok(v)
            }
        }
        Command::Simulate {
            map,
            r,
            phi,
            o1,
            o2,
            shots,
            uninflated,
            direct,
            repetitions,
            errors_csv,
        } => {
            let s = &config.sampling;
            let rho = EquatorialState::new(r, phi)?;
            let c = load_map(&map)?;
            let split = cost::pos_neg_split(&c, tol.spectral)?;
            let n = sampler::hoeffding_copies(s.epsilon, s.delta, s.c_range)?;
            let shots = shots.unwrap_or(if direct || uninflated {
                n
            } else {
                sampler::inflated_shots(split.cost(), n)
            });
            let (obs1, obs2) = (o1.observable(), o2.observable());
            if let Some(reps) = repetitions {
                let scenario = Scenario {
                    strategy: if direct {
                        Strategy::Direct
                    } else {
                        Strategy::Virtual { map: c, split }
                    },
                    rho,
                    observable: obs1,
                    epsilon: s.epsilon,
                    shots,
                };
                let report = sampler::empirical_failure_rate(&scenario, reps, config.seed)?;
                if let Some(path) = errors_csv {
                    let file = fs::File::create(&path).map_err(Error::from)?;
                    report.write_csv(file)?;
                }
                return Ok(json!({
                    "strategy": if direct { "direct" } else { "virtual" },
                    "repetitions": report.repetitions,
                    "shots": report.shots,
                    "epsilon": report.epsilon,
                    "delta": s.delta,
                    "exact": report.exact,
                    "failures": report.failures,
                    "rate": report.rate,
                    "binomial_sigma": report.binomial_sigma(s.delta),
                    "mean_estimate": report.mean_estimate,
                }));
            }
            let d = rho.density();
            if direct {
                let est = sampler::simulate_direct(&rho, &obs1, shots, config.seed)?;
                return Ok(json!({ "shots": shots, "estimate": est, "exact": obs1.expectation(&d) }));
            }
            let e = sampler::simulate_virtual(&split, &rho, &obs1, &obs2, shots, config.seed)?;
            Ok(json!({
                "shots": shots,
                "est1": e.est1,
                "est2": e.est2,
                "exact1": obs1.expectation(&c.marginal(&d, 1)?),
                "exact2": obs2.expectation(&c.marginal(&d, 2)?),
                "plus_fraction": e.plus_fraction,
                "expected_plus_fraction": split.a / split.cost(),
            }))
        }
        Command::SampleReport { map, epsilon, delta, c } => {
            let s = &config.sampling;
            let plan = ShotPlan::symmetric(
                epsilon.unwrap_or(s.epsilon),
                delta.unwrap_or(s.delta),
                c.unwrap_or(s.c_range),
            )?;
            let split = cost::pos_neg_split(&load_map(&map)?, tol.spectral)?;
            Ok(to_value(&sampler::sample_cost_report(&plan, &split)?)?)
        }
        Command::Baseline { states } => {
            let canonical = channels::canonical_broadcaster()?;
            let universal = channels::universal_cloner()?;
            let bounds = cost::base_norm_bounds(&canonical, tol.spectral, tol.certificate_width)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let inputs: Vec<BlochVector> = (0..states).map(|_| random_bloch(&mut rng)).collect();
            let broadcast = constraints::verify_broadcast(&canonical, &inputs, tol.broadcast)?;
            let d = channels::diamond_distance(&canonical, &universal, &config.diamond)?;
            let fid = channels::clone_fidelities(&universal, &vbroadcast::linalg::gates::ket(&[0]))?;
            let pass = broadcast.max_deviation <= tol.broadcast && bounds.certified;
            let v = json!({
                "cost_lower": bounds.lower,
                "cost_upper": bounds.upper,
                "cost_certified": bounds.certified,
                "broadcast_states": states,
                "broadcast_max_deviation": broadcast.max_deviation,
                "diamond_to_universal_cloner": d.value,
                "diamond_lower_cert": d.lower_cert,
                "diamond_upper_cert": d.upper_cert,
                "universal_cloner_fidelity": fid[0],
                "pass": pass,
            });
            if pass {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Command::ReproducePaper => {
            let summary = reproduce::run(&config)?;
            let pass = summary.all_pass;
            let v = to_value(&summary)?;
            if pass {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Command::Export { name, out } => {
            let c = named_map(&name)?
                .ok_or_else(|| Failure::Usage(format!("unknown map `{name}`")))?;
            match out {
                Some(path) => {
                    write(&path, &c.to_json())?;
                    Ok(json!({ "written": path }))
                }
                None => Ok(serde_json::from_str(&c.to_json()).map_err(Error::from)?),
            }
        }
    }
}

fn named_map(name: &str) -> Result<Option<ChoiOperator>, Failure> {
    Ok(Some(match name {
        "optimal" => channels::optimal_virtual_broadcaster(),
        "cloner" => channels::phase_covariant_cloner(),
        "canonical" => channels::canonical_broadcaster()?,
        "universal" => channels::universal_cloner()?,
        _ => return Ok(None),
    }))
}

fn load_map(arg: &str) -> Result<ChoiOperator, Failure> {
    if let Some(c) = named_map(arg)? {
        return Ok(c);
    }
    let text = fs::read_to_string(Path::new(arg)).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?;
    ChoiOperator::from_json(&text).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
}

fn random_bloch(rng: &mut impl Rng) -> BlochVector {
    loop {
        let (x, y, z) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if x * x + y * y + z * z <= 1.0 {
            return BlochVector::new(x, y, z).expect("inside the ball");
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn to_value(x: &impl Serialize) -> Result<Value, Failure> {
    Ok(serde_json::to_value(x).map_err(Error::from)?)
}

fn emit(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(v).expect("JSON value")),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let _ = w.write_record(["key", "value"]);
            for (k, val) in rows {
                let _ = w.write_record([k, val]);
            }
            let _ = w.flush();
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
