use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use featurespace_harness::{run, HarnessError, Params};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "featurespace", version, about = "Kernel feature-space experiments")]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Subcommand)]
enum Experiment {
    /// Gram matrix of a kernel on a point set.
    Gram(Flags),
    /// PSD certificate of a Gram matrix.
    Psd(Flags),
    /// Loewner chain 1 <= K <= K^2 <= ... <= K^nmax.
    OrderChain(Flags),
    /// Limit of a monotone kernel family, or its divergence.
    MonotoneLimit(Flags),
    /// Feature-map pairing against a kernel.
    FeatureVerify(Flags),
    /// Monte-Carlo Gaussian-process realization.
    GaussianMc(Flags),
    /// Derivative functionals against each other.
    DualPairing(Flags),
    /// Taylor form of the point evaluation on random polynomials.
    DeltaExpand(Flags),
    /// Spectrum of the order operator, diagonal and sampled.
    OrderOperator(Flags),
    /// Contractive multiplier test.
    Multiplier(Flags),
    /// Iterates of the Cantor transform on the indicator of [0, 1].
    IfsFigure(Flags),
    /// Transformed kernels, invariance and positivity.
    IfsKernel(Flags),
    /// Measure to RKHS and back through the pseudo-inverse.
    KtransformRoundtrip(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON object of parameters; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, default_value = "featurespace-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Kernel name, e.g. szego, bergman, bargmann, inverse-power:3, szego*szego.
    #[arg(long)]
    kernel: Option<String>,
    /// Second kernel (order operator, dual pair).
    #[arg(long)]
    against: Option<String>,
    /// disk:N:rR, interval:N:a:b, triadic:depth or explicit:[...].
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long)]
    nterms: Option<u64>,
    /// partial-sums or powers.
    #[arg(long)]
    family: Option<String>,
    /// onb, tensor, direct-sum or dual.
    #[arg(long)]
    feature: Option<String>,
    /// Monte-Carlo sample count.
    #[arg(long = "M", alias = "samples")]
    samples: Option<u64>,
    /// z, const:c, scale:c or blaschke:a.
    #[arg(long)]
    phi: Option<String>,
    /// Inclusive range such as 0..5.
    #[arg(long)]
    depths: Option<String>,
    #[arg(long)]
    grid: Option<u64>,
    #[arg(long)]
    level: Option<u64>,
    #[arg(long)]
    degree: Option<u64>,
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    terms: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Expected outcome: converge, diverge, contractive or refuted.
    #[arg(long)]
    expect: Option<String>,
}

impl Flags {
    fn params(&self) -> Result<Params, HarnessError> {
        let mut p = Params::new();
        let mut put = |k: &str, v: Option<Value>| -> Result<(), HarnessError> {
            match v {
                Some(v) => p.set(k, v),
                None => Ok(()),
            }
        };
        put("seed", self.seed.map(Value::from))?;
        put("kernel", self.kernel.clone().map(Value::from))?;
        put("against", self.against.clone().map(Value::from))?;
        put("points", self.points.clone().map(Value::from))?;
        put("tol", self.tol.map(Value::from))?;
        put("truncation", self.truncation.map(Value::from))?;
        put("nmax", self.nmax.map(Value::from))?;
        put("nterms", self.nterms.map(Value::from))?;
        put("family", self.family.clone().map(Value::from))?;
        put("feature", self.feature.clone().map(Value::from))?;
        put("M", self.samples.map(Value::from))?;
        put("phi", self.phi.clone().map(Value::from))?;
        put("depths", self.depths.clone().map(Value::from))?;
        put("grid", self.grid.map(Value::from))?;
        put("level", self.level.map(Value::from))?;
        put("degree", self.degree.map(Value::from))?;
        put("count", self.count.map(Value::from))?;
        put("terms", self.terms.map(Value::from))?;
        put("trials", self.trials.map(Value::from))?;
        put("expect", self.expect.clone().map(Value::from))?;
        let base = match &self.config {
            Some(path) => Params::from_file(path)?,
            None => Params::new(),
        };
        Ok(base.merged(p))
    }
}

fn split(e: Experiment) -> (&'static str, Flags) {
    match e {
        Experiment::Gram(f) => ("gram", f),
        Experiment::Psd(f) => ("psd", f),
        Experiment::OrderChain(f) => ("order-chain", f),
        Experiment::MonotoneLimit(f) => ("monotone-limit", f),
        Experiment::FeatureVerify(f) => ("feature-verify", f),
        Experiment::GaussianMc(f) => ("gaussian-mc", f),
        Experiment::DualPairing(f) => ("dual-pairing", f),
        Experiment::DeltaExpand(f) => ("delta-expand", f),
        Experiment::OrderOperator(f) => ("order-operator", f),
        Experiment::Multiplier(f) => ("multiplier", f),
        Experiment::IfsFigure(f) => ("ifs-figure", f),
        Experiment::IfsKernel(f) => ("ifs-kernel", f),
        Experiment::KtransformRoundtrip(f) => ("ktransform-roundtrip", f),
    }
}

fn main() -> ExitCode {
    let (name, flags) = split(Cli::parse().experiment);
    let outcome = flags.params().and_then(|p| run(name, &p, &flags.out));
    match outcome {
        Ok(summary) => {
            for a in &summary.assertions {
                let tag = if a.passed { "PASS" } else { "FAIL" };
                match (a.value, a.tolerance) {
                    (Some(v), Some(t)) => println!("{tag} {}: {v:e} (tol {t:e})", a.name),
                    (Some(v), None) => println!("{tag} {}: {v:e}", a.name),
                    _ => println!("{tag} {}", a.name),
                }
            }
            println!("artifacts in {}", flags.out.display());
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("featurespace {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
