//! The shipped example files.

use std::path::Path;

use posdist::special::{double_factorial_odd, factorial};
use posdist::{ChaosElement, Coords, Document, MomentSequence, Result, Role, WeightSequence};

pub const DIM: usize = 3;
pub const SHIFT: [f64; 3] = [0.5, 0.25, 0.0];
pub const SHIFT_TRUNCATION: usize = 16;

fn even_only(n_max: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..=n_max)
        .map(|n| if n % 2 == 1 { 0.0 } else { f(n) })
        .collect()
}

pub fn corpus() -> Result<Vec<(&'static str, Document)>> {
    let e1 = Coords::unit(DIM, 0);
    Ok(vec![
        (
            "harmonic-3.weights",
            Document::Weights(WeightSequence::harmonic(DIM)),
        ),
        (
            "gaussian.chaos",
            Document::Chaos(ChaosElement::constant(DIM, Role::Distribution, 1.0)),
        ),
        (
            "one.chaos",
            Document::Chaos(ChaosElement::constant(DIM, Role::Test, 1.0)),
        ),
        (
            "shifted-gaussian.chaos",
            Document::Chaos(ChaosElement::wick_exponential(
                &Coords::new(SHIFT.to_vec()),
                SHIFT_TRUNCATION,
                Role::Distribution,
            )?),
        ),
        (
            "wick-square.chaos",
            Document::Chaos(ChaosElement::wick_power(&e1, 2, Role::Distribution)?),
        ),
        (
            "square.chaos",
            Document::Chaos(ChaosElement::monomial(&e1, 2, Role::Test)?),
        ),
        (
            "gaussian.moments",
            Document::Moments(MomentSequence::from_values(even_only(
                24,
                double_factorial_odd,
            ))?),
        ),
        (
            "t-square.moments",
            Document::Moments(MomentSequence::from_values(even_only(24, |n| {
                double_factorial_odd(n + 2)
            }))?),
        ),
        (
            "laplace.moments",
            Document::Moments(
                MomentSequence::from_values(even_only(64, factorial))?
                    .with_absolute((0..=64).map(factorial).collect())?,
            ),
        ),
        (
            "exceeds-scale.moments",
            Document::Moments(MomentSequence::from_values(even_only(64, |n| {
                factorial(n).powi(2)
            }))?),
        ),
    ])
}

pub fn write_corpus(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, doc) in corpus()? {
        doc.save(dir.join(name))?;
    }
    Ok(())
}
