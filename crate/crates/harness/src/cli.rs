//! The `varsketch` command line: subcommands over the experiment drivers and
//! calculators, JSON/CSV reports, exit code 0 on success, 1 on validation
//! errors, 2 on runtime errors.

use std::collections::HashMap;
use std::fs;

use serde::Deserialize;
use serde_json::json;

use bounds::{budget_report, calibrate_phi, CalibrationKind, ConstantSet, VarietyParams};
use polyapprox::{counting_poly_lower, counting_poly_upper, mom_monte_carlo, CountingPoly};

use crate::config::ExperimentConfig;
use crate::experiments::{run_committee_compare, run_distortion, run_pairwise};
use crate::{config_hash, init_threads, HarnessError};

const USAGE: &str = "\
varsketch — randomized sketching experiments for low-rank tensor sets

USAGE:
  varsketch <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
  sketch     sketch a sampled point set, dump committee profiles (binary)
  distort    sampled-distortion experiment over seeded trials
  compare    median committee vs equal-budget single sketch (paired trials)
  pairwise   pairwise distance estimation, CSV matrix + error summary
  bounds     budget report from the sketching-dimension calculators
  mom        median-of-means tail bound vs Monte Carlo
  polycert   counting-polynomial construction and grid certification
  calibrate  Monte Carlo calibration of tail-function constants

GLOBAL FLAGS:
  --config PATH    JSON experiment/problem configuration
  --out PATH       output file (default: stdout)
  --format FMT     json | csv (default: json)
  --seed U64       override the config master seed

SUBCOMMAND FLAGS:
  mom:       --p F --k N [--trials N] [--seed U64]
  polycert:  --eps F --m F --eta F
  calibrate: --kind gaussian|khatri_rao [--order N] --eps F
             --m-grid a,b,c [--trials N] [--seed U64]
  bounds:    [--eps F] [--delta F] [--c1 F] [--c2 F] [--c3 F] [--c4 F]
             [--k-subg F] [--m-bound F]

Exit codes: 0 success, 1 validation error, 2 runtime error.
";

/// Entry point; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    init_threads();
    match dispatch(args) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}\n\n{USAGE}");
            1
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Validation(String),
    Runtime(String),
}

struct Flags {
    values: HashMap<String, String>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let Some(name) = arg.strip_prefix("--") else {
                return Err(CliError::Usage(format!("unexpected argument '{arg}'")));
            };
            let value = it
                .next()
                .ok_or_else(|| CliError::Usage(format!("missing value for --{name}")))?;
            values.insert(name.to_string(), value.clone());
        }
        Ok(Self { values })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, CliError> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Validation(format!("invalid value '{v}' for --{name}"))),
        }
    }

    fn require_num<T: std::str::FromStr>(&self, name: &str) -> Result<T, CliError> {
        self.require(name)?
            .parse::<T>()
            .map_err(|_| CliError::Validation(format!("invalid value for --{name}")))
    }

    fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        for key in self.values.keys() {
            if !known.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown flag --{key}")));
            }
        }
        Ok(())
    }
}

fn dispatch(args: Vec<String>) -> Result<(), CliError> {
    let Some(sub) = args.first() else {
        return Err(CliError::Usage("missing subcommand".into()));
    };
    let flags = Flags::parse(&args[1..])?;
    match sub.as_str() {
        "sketch" => cmd_sketch(&flags),
        "distort" => cmd_distort(&flags),
        "compare" => cmd_compare(&flags),
        "pairwise" => cmd_pairwise(&flags),
        "bounds" => cmd_bounds(&flags),
        "mom" => cmd_mom(&flags),
        "polycert" => cmd_polycert(&flags),
        "calibrate" => cmd_calibrate(&flags),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn load_config(flags: &Flags) -> Result<ExperimentConfig, CliError> {
    let path = flags.require("config")?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config '{path}': {e}")))?;
    let mut cfg = ExperimentConfig::from_json(&text)
        .map_err(|e| CliError::Validation(format!("config '{path}': {e}")))?;
    if let Some(seed) = flags.parse_num::<u64>("seed")? {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn emit(flags: &Flags, json_text: String, csv_text: Option<String>) -> Result<(), CliError> {
    let format = flags.get("format").unwrap_or("json");
    let body = match format {
        "json" => json_text,
        "csv" => csv_text
            .ok_or_else(|| CliError::Validation("csv format unavailable for this report".into()))?,
        other => return Err(CliError::Validation(format!("unknown format '{other}'"))),
    };
    match flags.get("out") {
        None => {
            println!("{body}");
            Ok(())
        }
        Some(path) => fs::write(path, body.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write '{path}': {e}"))),
    }
}

fn runtime(e: HarnessError) -> CliError {
    CliError::Runtime(e.to_string())
}

fn kv_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("field,value\n");
    for (k, v) in pairs {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

// --- experiment subcommands -------------------------------------------------

fn cmd_distort(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["config", "out", "format", "seed"])?;
    let cfg = load_config(flags)?;
    let report = run_distortion(&cfg).map_err(runtime)?;
    let csv = kv_csv(&[
        ("trials", report.results.trials.to_string()),
        ("epsilon", report.results.epsilon.to_string()),
        ("failure_rate", report.results.failure_rate.to_string()),
        ("failure_ci99_lo", report.results.failure_ci99.0.to_string()),
        ("failure_ci99_hi", report.results.failure_ci99.1.to_string()),
        ("max_distortion", report.results.per_trial_max.max.to_string()),
        ("median_trial_max", report.results.per_trial_max.q50.to_string()),
    ]);
    let json_text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(flags, json_text, Some(csv))
}

fn cmd_compare(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["config", "out", "format", "seed"])?;
    let cfg = load_config(flags)?;
    let report = run_committee_compare(&cfg).map_err(runtime)?;
    let r = &report.results;
    let csv = kv_csv(&[
        ("trials", r.trials.to_string()),
        ("committee_rate", r.committee_rate.to_string()),
        ("single_rate", r.single_rate.to_string()),
        ("committee_ci99_lo", r.committee_ci99.0.to_string()),
        ("committee_ci99_hi", r.committee_ci99.1.to_string()),
        ("single_ci99_lo", r.single_ci99.0.to_string()),
        ("single_ci99_hi", r.single_ci99.1.to_string()),
        ("mcnemar_z", r.mcnemar_z.to_string()),
    ]);
    let json_text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(flags, json_text, Some(csv))
}

fn cmd_pairwise(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["config", "out", "format", "seed"])?;
    let cfg = load_config(flags)?;
    let out = run_pairwise(&cfg).map_err(runtime)?;
    // the distance matrix goes to --out (or stdout) as CSV; the summary JSON
    // accompanies it on stdout when a file is written
    match flags.get("out") {
        Some(path) => {
            fs::write(path, out.csv.as_bytes())
                .map_err(|e| CliError::Runtime(format!("cannot write '{path}': {e}")))?;
            let summary = serde_json::to_string_pretty(&out.report)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{summary}");
            Ok(())
        }
        None => {
            println!("{}", out.csv);
            Ok(())
        }
    }
}

fn cmd_sketch(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["config", "out", "format", "seed"])?;
    let cfg = load_config(flags)?;
    let path = flags.require("out")?;
    let spec = cfg.operator_spec().map_err(runtime)?;
    let target_seed = sketch_ops::seed::derive_seed(cfg.seed, &[0x20]);
    let pts = crate::points::sample_points(
        &cfg.problem,
        sketch_ops::seed::derive_seed(cfg.seed, &[0x23]),
        target_seed,
    )
    .map_err(runtime)?;
    let committee = median_sketch::Committee::from_spec(&spec, cfg.committee_k, cfg.seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let profiles = committee
        .profiles(&pts)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot create '{path}': {e}")))?;
    median_sketch::write_profiles(&mut file, &profiles)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let cfg_bytes = serde_json::to_vec(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let manifest = json!({
        "profiles": path,
        "points": pts.len(),
        "members": committee.size(),
        "m": committee.m(),
        "config_hash": config_hash(&cfg_bytes),
    });
    println!("{}", serde_json::to_string_pretty(&manifest).unwrap());
    Ok(())
}

// --- calculator subcommands ---------------------------------------------------

#[derive(Debug, Deserialize)]
struct BoundsProblem {
    variety: RawVariety,
    eps: f64,
    delta: f64,
    n_ambient: f64,
    #[serde(default)]
    constants: ConstantSet,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum RawVariety {
    Variety {
        n: u32,
        #[serde(default)]
        degree: Option<f64>,
        #[serde(default)]
        log_degree: Option<f64>,
    },
    Polymap {
        n: u32,
        d: u32,
    },
    Reducible {
        components: Vec<(f64, u32)>,
    },
    CpTensor {
        mode_lengths: Vec<usize>,
        rank: usize,
    },
}

impl RawVariety {
    fn build(self) -> Result<VarietyParams, CliError> {
        let verr = |e: bounds::BoundsError| CliError::Validation(e.to_string());
        match self {
            RawVariety::Variety { n, degree, log_degree } => match (degree, log_degree) {
                (Some(d), None) => VarietyParams::variety(n, d).map_err(verr),
                (None, Some(ld)) => Ok(VarietyParams::Variety { n, log_degree: ld }),
                _ => Err(CliError::Validation(
                    "variety mode needs exactly one of 'degree' or 'log_degree'".into(),
                )),
            },
            RawVariety::Polymap { n, d } => VarietyParams::polymap(n, d).map_err(verr),
            RawVariety::Reducible { components } => {
                let vp = VarietyParams::Reducible { components };
                vp.validate().map_err(verr)?;
                Ok(vp)
            }
            RawVariety::CpTensor { mode_lengths, rank } => {
                VarietyParams::cp_tensor(&mode_lengths, rank).map_err(verr)
            }
        }
    }
}

fn cmd_bounds(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&[
        "config", "out", "format", "eps", "delta", "c1", "c2", "c3", "c4", "k-subg", "m-bound",
    ])?;
    let path = flags.require("config")?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config '{path}': {e}")))?;
    let problem: BoundsProblem = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config '{path}': {e}")))?;

    let mut consts = problem.constants;
    if let Some(c) = flags.parse_num::<f64>("c1")? {
        consts.c1 = c;
    }
    if let Some(c) = flags.parse_num::<f64>("c2")? {
        consts.c2 = c;
    }
    if let Some(c) = flags.parse_num::<f64>("c3")? {
        consts.c3 = c;
    }
    if let Some(c) = flags.parse_num::<f64>("c4")? {
        consts.c4 = c;
    }
    if let Some(k) = flags.parse_num::<f64>("k-subg")? {
        consts.k = k;
    }
    if let Some(m) = flags.parse_num::<f64>("m-bound")? {
        consts.m = Some(m);
    }
    let eps = flags.parse_num::<f64>("eps")?.unwrap_or(problem.eps);
    let delta = flags.parse_num::<f64>("delta")?.unwrap_or(problem.delta);

    let vp = problem.variety.build()?;
    let report = budget_report(&vp, eps, delta, problem.n_ambient, &consts)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let csv = kv_csv(&[
        ("phi_threshold", report.phi_threshold.to_string()),
        ("subgaussian_m", report.subgaussian_m.to_string()),
        ("fjlt_m", report.fjlt_m.to_string()),
        (
            "tensor_m",
            report
                .tensor_m
                .map(|m| m.to_string())
                .unwrap_or_else(|| "".into()),
        ),
        ("committee_k", report.committee.bound.k.to_string()),
        ("committee_size", report.committee.bound.size.to_string()),
        (
            "committee_member_m",
            report.committee.member_m_subgaussian.to_string(),
        ),
        (
            "committee_total",
            report.committee.total_measurements.to_string(),
        ),
        ("headline_total", report.headline_total.to_string()),
    ]);
    let json_text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(flags, json_text, Some(csv))
}

fn cmd_mom(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["p", "k", "trials", "seed", "out", "format"])?;
    let p: f64 = flags.require_num("p")?;
    let k: u32 = flags.require_num("k")?;
    let trials: u64 = flags.parse_num("trials")?.unwrap_or(100_000);
    let seed: u64 = flags.parse_num("seed")?.unwrap_or(0);
    let est = mom_monte_carlo(p, k, trials, seed).map_err(|e| CliError::Validation(e.to_string()))?;
    let report = json!({
        "p": p,
        "k": k,
        "trials": est.trials,
        "seed": seed,
        "failures": est.failures,
        "empirical_rate": est.rate,
        "bound": est.bound,
        "ci99_half_width": est.ci99_half_width,
        "within_bound": est.rate <= est.bound + est.ci99_half_width,
    });
    let csv = kv_csv(&[
        ("empirical_rate", est.rate.to_string()),
        ("bound", est.bound.to_string()),
        ("ci99_half_width", est.ci99_half_width.to_string()),
    ]);
    emit(flags, serde_json::to_string_pretty(&report).unwrap(), Some(csv))
}

fn poly_block(result: polyapprox::Result<CountingPoly>) -> (bool, serde_json::Value) {
    match result {
        Ok(cp) => (
            true,
            json!({
                "pass": true,
                "degree": cp.poly.degree(),
                "degree_bound": cp.degree_bound,
                "range_margin": cp.report.range_margin,
                "near_margin": cp.report.near_margin,
                "far_margin": cp.report.far_margin,
            }),
        ),
        Err(e) => (false, json!({ "pass": false, "violation": e.to_string() })),
    }
}

fn cmd_polycert(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["eps", "m", "eta", "out", "format"])?;
    let eps: f64 = flags.require_num("eps")?;
    let m: f64 = flags.require_num("m")?;
    let eta: f64 = flags.require_num("eta")?;
    // parameter-domain violations are validation errors; grid verification
    // failures are reported as a failing certificate
    let bad_eps = !eps.is_finite() || eps <= 0.0 || eps >= 1.0;
    let bad_eta = !eta.is_finite() || eta <= 0.0 || eta >= 0.5;
    if bad_eps || !m.is_finite() || m < 3.0 || bad_eta {
        return Err(CliError::Validation(format!(
            "polycert needs eps in (0,1), m >= 3, eta in (0, 1/2); got eps={eps} m={m} eta={eta}"
        )));
    }
    let (upper_ok, upper) = poly_block(counting_poly_upper(eps, m, eta));
    let (lower_ok, lower) = poly_block(counting_poly_lower(eps, m, eta));
    let report = json!({
        "eps": eps,
        "m": m,
        "eta": eta,
        "upper": upper,
        "lower": lower,
        "pass": upper_ok && lower_ok,
    });
    emit(flags, serde_json::to_string_pretty(&report).unwrap(), None)
}

fn cmd_calibrate(flags: &Flags) -> Result<(), CliError> {
    flags.check_known(&["kind", "order", "eps", "m-grid", "trials", "seed", "out", "format"])?;
    let kind = match flags.require("kind")? {
        "gaussian" => CalibrationKind::Gaussian,
        "khatri_rao" => CalibrationKind::KhatriRao {
            order: flags.parse_num::<u32>("order")?.unwrap_or(2),
        },
        other => {
            return Err(CliError::Validation(format!(
                "unknown calibration kind '{other}' (gaussian | khatri_rao)"
            )))
        }
    };
    let eps: f64 = flags.require_num("eps")?;
    let grid: Vec<u64> = flags
        .require("m-grid")?
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Validation(format!("invalid m-grid entry '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    let trials: u64 = flags.parse_num("trials")?.unwrap_or(20_000);
    let seed: u64 = flags.parse_num("seed")?.unwrap_or(0);
    let cal = calibrate_phi(kind, eps, &grid, trials, seed).map_err(|e| match e {
        bounds::BoundsError::InvalidParameter(_) => CliError::Validation(e.to_string()),
        bounds::BoundsError::DegenerateFit { .. } => CliError::Runtime(e.to_string()),
    })?;
    let json_text =
        serde_json::to_string_pretty(&cal).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(flags, json_text, None)
}
