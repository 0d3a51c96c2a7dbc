//! Uniform scalar quantizer `Q(t) = δ⌊t/δ⌋`, uniform dither and the
//! quantized map `A(x) = Q(Φx + ξ)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{check_len, Error, Result};
use crate::rng::seeded;
use crate::sensing::SensingOperator;

/// Relative distance to a lattice point under which a value is snapped onto it.
const SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dithering {
    Uniform,
    Disabled,
}

impl Dithering {
    pub fn is_on(self) -> bool {
        self == Dithering::Uniform
    }
}

impl fmt::Display for Dithering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dithering::Uniform => "uniform",
            Dithering::Disabled => "none",
        })
    }
}

impl FromStr for Dithering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" | "uniform" => Ok(Dithering::Uniform),
            "off" | "false" | "no" | "none" => Ok(Dithering::Disabled),
            other => Err(Error::config(format!("bad dithering value {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerConfig {
    delta: f64,
    dithering: Dithering,
}

impl QuantizerConfig {
    pub fn new(delta: f64, dithering: Dithering) -> Result<Self> {
        check_delta(delta)?;
        Ok(QuantizerConfig { delta, dithering })
    }

    pub fn dithered(delta: f64) -> Result<Self> {
        Self::new(delta, Dithering::Uniform)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dithering(&self) -> Dithering {
        self.dithering
    }
}

impl fmt::Display for QuantizerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "delta={}, dither={}", self.delta, self.dithering)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("resolution delta={delta} must be positive and finite")))
    }
}

/// `δ⌊t/δ⌋` for a single value; inputs within `1e-12·δ` of a lattice point
/// are mapped onto that point.
#[inline]
pub fn quantize_scalar(t: f64, delta: f64) -> f64 {
    let q = t / delta;
    let nearest = q.round();
    let cell = if (q - nearest).abs() <= SNAP { nearest } else { q.floor() };
    delta * cell
}

pub fn quantize(u: &[f64], delta: f64) -> Result<Vec<f64>> {
    check_delta(delta)?;
    Ok(u.iter().map(|&t| quantize_scalar(t, delta)).collect())
}

/// i.i.d. uniform dither on `[0, δ)`.
pub fn draw_dither<R: Rng + ?Sized>(m: usize, delta: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_delta(delta)?;
    let law = Uniform::new(0.0, delta);
    Ok((0..m).map(|_| law.sample(rng)).collect())
}

/// Quantized observations with everything needed to re-sense them.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurements {
    pub y: Vec<f64>,
    /// All zeros when dithering is disabled.
    pub dither: Vec<f64>,
    pub config: QuantizerConfig,
    pub operator_seed: u64,
    pub dither_seed: u64,
}

impl Measurements {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// `Q(Φx + ξ)` for a given dither realization.
pub fn quantized_map(
    op: &SensingOperator,
    x: &[f64],
    delta: f64,
    dither: &[f64],
) -> Result<Vec<f64>> {
    check_delta(delta)?;
    check_len(op.m(), dither.len())?;
    let mut z = op.apply(x)?;
    for (zi, xi) in z.iter_mut().zip(dither) {
        *zi = quantize_scalar(*zi + xi, delta);
    }
    Ok(z)
}

/// `y = A(x) = Q(Φx + ξ)`, with the dither drawn from `dither_seed` when
/// enabled.
pub fn sense(
    op: &SensingOperator,
    x: &[f64],
    config: QuantizerConfig,
    dither_seed: u64,
) -> Result<Measurements> {
    let dither = match config.dithering() {
        Dithering::Uniform => draw_dither(op.m(), config.delta(), &mut seeded(dither_seed))?,
        Dithering::Disabled => vec![0.0; op.m()],
    };
    let y = quantized_map(op, x, config.delta(), &dither)?;
    Ok(Measurements {
        y,
        dither,
        config,
        operator_seed: op.seed(),
        dither_seed,
    })
}

/// Empirical mean of `Q(a + ξ)` over `samples` independent dithers.
pub fn dither_expectation_check<R: Rng + ?Sized>(
    a: f64,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    check_delta(delta)?;
    if samples == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let law = Uniform::new(0.0, delta);
    // accumulate offsets from the lower lattice point to keep the sum exact-ish
    let base = quantize_scalar(a, delta);
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += quantize_scalar(a + law.sample(rng), delta) - base;
    }
    Ok(base + acc / samples as f64)
}
