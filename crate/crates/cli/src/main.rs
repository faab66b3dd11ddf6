use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use posdist::bounds::{
    c_constant, pointwise_bound_check, CConstant, ExpBound, MonteCarlo, PointwiseCheck,
    DEFAULT_SEED,
};
use posdist::chaos::pair;
use posdist::integrability::{exp_series, Source, DEFAULT_SERIES_TERMS};
use posdist::moments::{
    classify_growth, directional_moments_p, moment_bound_certificate, MomentBoundCertificate,
    Truncation,
};
use posdist::positivity::{hankel_check, witness_pairing, DEFAULT_TOLERANCE};
use posdist::reconstruct::{gauss_rule, jacobi_from_moments, verify_moments, PairingRow};
use posdist::{
    ChaosElement, Coords, DiscreteMeasure, Document, Error, GrowthCertificate, HankelReport,
    JacobiCoefficients, MomentSequence, Result, Role, ScaleParams, Verdict, WeightSequence,
};

mod corpus;

#[derive(Parser)]
#[command(
    name = "posdist",
    version,
    about = "Positivity, moments and integrability of Gaussian-space distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dual pairing <<PHI, TEST>>.
    Pair {
        phi: PathBuf,
        test: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Moment bound, growth class and Hankel positivity verdict.
    Certify {
        /// A chaos (distribution) or moments file.
        input: PathBuf,
        /// Direction for moments of a chaos input; defaults to the first axis.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[arg(long, default_value_t = 24)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        hankel_size: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Allow moments beyond the degree of a truncated expansion.
        #[arg(long)]
        allow_approximate: bool,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Gauss rule with M nodes from moments.
    Reconstruct {
        /// A moments or chaos (distribution) file.
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Option<Vec<f64>>,
        /// Write the measure here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Exponential integrability series.
    Integrability {
        /// A chaos (distribution), moments or measure file.
        input: PathBuf,
        /// Defaults to half the admissibility threshold.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        p_prime: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[arg(long, default_value_t = DEFAULT_SERIES_TERMS)]
        n_max: usize,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Pointwise exponential bound of a test function at X.
    Bound {
        test: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    #[command(hide = true)]
    WriteExamples { dir: PathBuf },
}

fn weights_for(path: &Option<PathBuf>, dim: usize) -> Result<WeightSequence> {
    match path {
        Some(p) => {
            let w = Document::load(p)?.into_weights()?;
            w.check_dim(dim)?;
            Ok(w)
        }
        None => Ok(WeightSequence::harmonic(dim)),
    }
}

fn direction(xi: &Option<Vec<f64>>, dim: usize) -> Result<Coords> {
    match xi {
        Some(v) if v.len() == dim => Ok(Coords::new(v.clone())),
        Some(v) => Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        }),
        None => Ok(Coords::unit(dim, 0)),
    }
}

fn print_report<T: Serialize>(value: &T) -> Result<()> {
    print!("{}", Document::report(value)?.to_json()?);
    Ok(())
}

fn seed() -> Result<u64> {
    match std::env::var("TOOLKIT_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("TOOLKIT_SEED = {s:?} is not an unsigned integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Serialize)]
struct CertifyReport {
    input_kind: String,
    direction: Coords,
    p: f64,
    q: Option<f64>,
    moments: Vec<f64>,
    approximate: bool,
    moment_bound: Option<MomentBoundCertificate>,
    growth: Option<GrowthCertificate>,
    growth_error: Option<String>,
    hankel: HankelReport,
    witness_pairing: Option<f64>,
    verdict: Verdict,
}

#[allow(clippy::too_many_arguments)]
fn certify(
    input: &Path,
    xi: &Option<Vec<f64>>,
    p: f64,
    q: f64,
    depth: usize,
    m: usize,
    tol: f64,
    allow_approximate: bool,
    weights: &Option<PathBuf>,
) -> Result<()> {
    let doc = Document::load(input)?;
    let input_kind = doc.kind().to_string();
    let (ms, phi_and_w) = match doc {
        Document::Chaos(phi) => {
            let phi = phi.with_role(Role::Distribution);
            let w = weights_for(weights, phi.dim())?;
            let xi = direction(xi, phi.dim())?;
            let truncation = if allow_approximate {
                Truncation::AllowApproximate
            } else {
                Truncation::Exact
            };
            let ms = directional_moments_p(&phi, &xi, depth, p, &w, truncation)?;
            (ms, Some((phi, w)))
        }
        other => (other.into_moments()?, None),
    };
    let moment_bound = match &phi_and_w {
        Some((phi, w)) => Some(moment_bound_certificate(
            phi,
            &ms.direction,
            p,
            q,
            ms.order(),
            w,
        )?),
        None => None,
    };
    let (growth, growth_error) = match classify_growth(&ms) {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let hankel = hankel_check(&ms, m, tol)?;
    let witness = match &phi_and_w {
        Some((phi, w)) => witness_pairing(phi, &hankel, &ms.direction, w)?,
        None => None,
    };
    print_report(&CertifyReport {
        input_kind,
        direction: ms.direction.clone(),
        p: ms.p,
        q: phi_and_w.as_ref().map(|_| q),
        moments: ms.values.clone(),
        approximate: ms.approximate,
        moment_bound,
        growth,
        growth_error,
        verdict: hankel.verdict,
        hankel,
        witness_pairing: witness,
    })
}

#[derive(Serialize)]
struct ReconstructReport {
    m: usize,
    jacobi: JacobiCoefficients,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
    pairing: Vec<PairingRow>,
    pairing_holds: bool,
}

fn reconstruct(
    input: &Path,
    m: usize,
    xi: &Option<Vec<f64>>,
    out: &Option<PathBuf>,
    weights: &Option<PathBuf>,
) -> Result<()> {
    let ms: MomentSequence = match Document::load(input)? {
        Document::Chaos(phi) => {
            let phi = phi.with_role(Role::Distribution);
            let w = weights_for(weights, phi.dim())?;
            let xi = direction(xi, phi.dim())?;
            directional_moments_p(&phi, &xi, (2 * m).max(3) - 1, 0.0, &w, Truncation::Exact)?
        }
        other => other.into_moments()?,
    };
    let jacobi = jacobi_from_moments(&ms, m)?;
    let dm: DiscreteMeasure = gauss_rule(&jacobi, m)?;
    let pairing = verify_moments(&ms, &dm, dm.exactness_degree().min(ms.order()))?;
    if let Some(path) = out {
        Document::Measure(dm.clone()).save(path)?;
    }
    print_report(&ReconstructReport {
        m,
        jacobi,
        nodes: dm.nodes().to_vec(),
        weights: dm.weights().to_vec(),
        total_mass: dm.total_mass(),
        pairing_holds: pairing.iter().all(PairingRow::holds),
        pairing,
    })
}

#[allow(clippy::too_many_arguments)]
fn integrability(
    input: &Path,
    epsilon: Option<f64>,
    p: f64,
    p_prime: f64,
    q: f64,
    n_max: usize,
    weights: &Option<PathBuf>,
) -> Result<()> {
    let source = match Document::load(input)? {
        Document::Chaos(phi) => Source::Distribution(phi.with_role(Role::Distribution)),
        Document::Moments(ms) => Source::Moments(ms),
        Document::Measure(dm) => Source::Discrete(dm),
        other => {
            return Err(Error::Document(format!(
                "expected a chaos, moments or measure document, found {}",
                other.kind()
            )))
        }
    };
    let w = match (&source, weights) {
        (Source::Distribution(_), _) | (_, Some(_)) => weights_for(weights, source.dim())?,
        _ => WeightSequence::unit(1),
    };
    let params = ScaleParams::new(p, q, p_prime)?;
    let epsilon = match epsilon {
        Some(e) => e,
        None => 0.5 * params.threshold(&w)?,
    };
    print_report(&exp_series(&source, None, &params, epsilon, n_max, &w)?)
}

#[derive(Serialize)]
struct BoundReport {
    x: Coords,
    bound: ExpBound,
    c_constant: CConstant,
    check: PointwiseCheck,
    holds: bool,
}

fn bound(
    test: &Path,
    x: Vec<f64>,
    p: f64,
    q: f64,
    samples: usize,
    weights: &Option<PathBuf>,
) -> Result<()> {
    let phi = Document::load(test)?.into_chaos()?.with_role(Role::Test);
    let w = weights_for(weights, phi.dim())?;
    let x = direction(&Some(x), phi.dim())?;
    let bound = ExpBound::new(&phi, p, q, &w)?;
    let c = c_constant(
        p,
        bound.epsilon,
        &w,
        None,
        MonteCarlo {
            samples,
            seed: seed()?,
        },
    )?;
    let check = pointwise_bound_check(&phi, p, q, &x, &w)?;
    print_report(&BoundReport {
        x,
        bound,
        c_constant: c,
        holds: check.holds(),
        check,
    })
}

fn pair_files(phi: &Path, test: &Path, weights: &Option<PathBuf>) -> Result<()> {
    let big_phi = Document::load(phi)?
        .into_chaos()?
        .with_role(Role::Distribution);
    let phi: ChaosElement = Document::load(test)?.into_chaos()?.with_role(Role::Test);
    let w = weights_for(weights, big_phi.dim())?;
    println!("{}", pair(&big_phi, &phi, &w)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pair { phi, test, weights } => pair_files(&phi, &test, &weights),
        Command::Certify {
            input,
            xi,
            p,
            q,
            depth,
            hankel_size,
            tol,
            allow_approximate,
            weights,
        } => certify(
            &input,
            &xi,
            p,
            q,
            depth,
            hankel_size,
            tol,
            allow_approximate,
            &weights,
        ),
        Command::Reconstruct {
            input,
            m,
            xi,
            out,
            weights,
        } => reconstruct(&input, m, &xi, &out, &weights),
        Command::Integrability {
            input,
            epsilon,
            p,
            p_prime,
            q,
            n_max,
            weights,
        } => integrability(&input, epsilon, p, p_prime, q, n_max, &weights),
        Command::Bound {
            test,
            x,
            p,
            q,
            samples,
            weights,
        } => bound(&test, x, p, q, samples, &weights),
        Command::WriteExamples { dir } => corpus::write_corpus(&dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric_domain() { 3 } else { 2 })
        }
    }
}
