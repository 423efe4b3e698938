//! Error models, worst-case corrigibility, and corrigible-region estimation.
//!
//! A store/retrieve channel is corrigible under an error pair `(ε₁, ε₂)` when
//! *every* input value survives the worst combination of an input-side and an
//! output-side perturbation. The area of the corrigible region in the
//! `(ε₁, ε₂)` plane is estimated by a deterministic grid scan; one over that
//! area is the channel's required precision.

use rayon::prelude::*;
use thiserror::Error;

/// Exhaustive worst-case checks enumerate all `2^n` inputs; keep that sane.
pub const MAX_CHANNEL_BITS: u32 = 20;

/// Interior sample count per perturbation spread for channels whose decode
/// map is not monotone enough for endpoint checks.
const DENSE_SAMPLES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorModel {
    /// Corrupts `x` to an arbitrary element of `[x - ε, x + ε]`, `ε >= 0`.
    Additive,
    /// Corrupts `x > 0` to an arbitrary element of `[x/ε, ε·x]`, `ε >= 1`.
    Multiplicative,
}

impl ErrorModel {
    /// Is `eps` a legal error magnitude for this model?
    pub fn legal_eps(&self, eps: f64) -> bool {
        match self {
            ErrorModel::Additive => eps.is_finite() && eps >= 0.0,
            ErrorModel::Multiplicative => eps.is_finite() && eps >= 1.0,
        }
    }
}

/// A closed interval of real readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A point in error space: input-side and output-side error magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub eps1: f64,
    pub eps2: f64,
}

impl ErrorPair {
    pub fn new(eps1: f64, eps2: f64) -> Self {
        ErrorPair { eps1, eps2 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PrecisionError {
    #[error("error magnitude {eps} is illegal for the {model:?} model")]
    IllegalEps { model: ErrorModel, eps: f64 },
    #[error("multiplicative perturbation requires a positive reading, got {0}")]
    NonPositiveReading(f64),
    #[error("channel width {0} exceeds the exhaustive-check cap of {MAX_CHANNEL_BITS} bits")]
    TooManyBits(u32),
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("resolution {resolution} is larger than bound side {side}")]
    ResolutionTooCoarse { resolution: f64, side: f64 },
    #[error("scan bounds must be finite and non-negative, got [0,{b1}] x [0,{b2}]")]
    BadBounds { b1: f64, b2: f64 },
    #[error("bounds anchored at 0 lie outside the multiplicative model's legal quadrant (eps >= 1)")]
    MultiplicativeScanUnsupported,
    #[error("sweep needs n_max >= 1 and at least one grid cell per axis")]
    BadSweepSettings,
}

/// Worst-case spread of a single value under one perturbation step.
pub fn worst_case_interval(x: f64, model: ErrorModel, eps: f64) -> Result<Interval, PrecisionError> {
    if !model.legal_eps(eps) {
        return Err(PrecisionError::IllegalEps { model, eps });
    }
    match model {
        ErrorModel::Additive => Ok(Interval { lo: x - eps, hi: x + eps }),
        ErrorModel::Multiplicative => {
            if x <= 0.0 {
                return Err(PrecisionError::NonPositiveReading(x));
            }
            Ok(Interval { lo: x / eps, hi: x * eps })
        }
    }
}

/// A store/retrieve channel under test.
///
/// `encode` maps each of the `2^bits` raw values to a physical reading;
/// `decode` is total on all readings; `succeeds` compares the intended raw
/// value with the decoded one. `perturb` widens an already-uncertain reading
/// by one error step; channels with circular readings override it so the
/// spread saturates at a full period.
pub trait Channel {
    fn bits(&self) -> u32;
    fn error_model(&self) -> ErrorModel;
    fn encode(&self, value: u64) -> f64;
    fn decode(&self, reading: f64) -> u64;

    fn succeeds(&self, intended: u64, decoded: u64) -> bool {
        intended == decoded
    }

    fn perturb(&self, spread: Interval, eps: f64) -> Result<Interval, PrecisionError> {
        let model = self.error_model();
        if !model.legal_eps(eps) {
            return Err(PrecisionError::IllegalEps { model, eps });
        }
        match model {
            ErrorModel::Additive => Ok(Interval { lo: spread.lo - eps, hi: spread.hi + eps }),
            ErrorModel::Multiplicative => {
                if spread.lo <= 0.0 {
                    return Err(PrecisionError::NonPositiveReading(spread.lo));
                }
                Ok(Interval { lo: spread.lo / eps, hi: spread.hi * eps })
            }
        }
    }

    /// Whether checking the extreme points of a perturbation spread decides
    /// corrigibility (true for monotone decode maps). Channels returning
    /// false get `DENSE_SAMPLES` interior probes instead.
    fn corner_sufficient(&self) -> bool;

    /// Analytic total-error threshold, if the channel knows one. Used to pick
    /// scan bounds that track the corrigible region as it shrinks.
    fn threshold_hint(&self) -> Option<f64> {
        None
    }
}

fn check_bits(bits: u32) -> Result<(), PrecisionError> {
    if bits == 0 || bits > MAX_CHANNEL_BITS {
        return Err(PrecisionError::TooManyBits(bits));
    }
    Ok(())
}

/// The universally-quantified check, after preconditions have been validated.
/// Fails fast on the first input value with a losing perturbation.
fn corrigible_kernel<C: Channel + ?Sized>(channel: &C, pair: ErrorPair) -> Result<bool, PrecisionError> {
    let values = 1u64 << channel.bits();
    for value in 0..values {
        let ideal = Interval::point(channel.encode(value));
        let implemented = channel.perturb(ideal, pair.eps1)?;
        let measured = channel.perturb(implemented, pair.eps2)?;
        let ok = if channel.corner_sufficient() {
            channel.succeeds(value, channel.decode(measured.lo))
                && channel.succeeds(value, channel.decode(measured.hi))
        } else {
            let step = measured.width() / (DENSE_SAMPLES - 1) as f64;
            (0..DENSE_SAMPLES).all(|k| {
                let reading = measured.lo + step * k as f64;
                channel.succeeds(value, channel.decode(reading))
            })
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff every input value decodes correctly under every perturbation the
/// pair allows (worst case over all `2^bits` inputs).
pub fn corrigible<C: Channel + ?Sized>(channel: &C, pair: ErrorPair) -> Result<bool, PrecisionError> {
    check_bits(channel.bits())?;
    let model = channel.error_model();
    for eps in [pair.eps1, pair.eps2] {
        if !model.legal_eps(eps) {
            return Err(PrecisionError::IllegalEps { model, eps });
        }
    }
    corrigible_kernel(channel, pair)
}

/// The scanned rectangle `[0, eps1_max] x [0, eps2_max]` in error space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanBounds {
    pub eps1_max: f64,
    pub eps2_max: f64,
}

/// A grid-scan area estimate of the corrigible region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEstimate {
    /// `corrigible_cells · resolution²`.
    pub area: f64,
    /// Grid cell side.
    pub resolution: f64,
    pub bounds: ScanBounds,
    pub corrigible_cells: u64,
}

fn cells_along(side: f64, resolution: f64) -> u64 {
    // Tolerate sides that are float-representable multiples of the
    // resolution; never scan past the bound.
    ((side / resolution) + 1e-9).floor() as u64
}

/// Deterministic center-point grid scan of the corrigible region.
///
/// A cell counts iff its center pair is corrigible. Cells are independent and
/// evaluated in parallel; the count (hence the area) is identical for any
/// evaluation order or degree of parallelism.
pub fn region_area<C: Channel + Sync + ?Sized>(
    channel: &C,
    bounds: ScanBounds,
    resolution: f64,
) -> Result<RegionEstimate, PrecisionError> {
    check_bits(channel.bits())?;
    if !resolution.is_finite() || resolution <= 0.0 {
        return Err(PrecisionError::BadResolution(resolution));
    }
    if !bounds.eps1_max.is_finite()
        || !bounds.eps2_max.is_finite()
        || bounds.eps1_max < 0.0
        || bounds.eps2_max < 0.0
    {
        return Err(PrecisionError::BadBounds { b1: bounds.eps1_max, b2: bounds.eps2_max });
    }
    if channel.error_model() == ErrorModel::Multiplicative {
        return Err(PrecisionError::MultiplicativeScanUnsupported);
    }
    // A degenerate zero side scans nothing (area 0); a positive side smaller
    // than one cell is a caller mistake.
    for side in [bounds.eps1_max, bounds.eps2_max] {
        if side > 0.0 && resolution > side {
            return Err(PrecisionError::ResolutionTooCoarse { resolution, side });
        }
    }

    let nx = cells_along(bounds.eps1_max, resolution);
    let ny = cells_along(bounds.eps2_max, resolution);
    let corrigible_cells: u64 = (0..nx)
        .into_par_iter()
        .map(|i| {
            let eps1 = (i as f64 + 0.5) * resolution;
            let mut row = 0u64;
            for j in 0..ny {
                let eps2 = (j as f64 + 0.5) * resolution;
                if corrigible_kernel(channel, ErrorPair { eps1, eps2 })? {
                    row += 1;
                }
            }
            Ok(row)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(RegionEstimate {
        area: corrigible_cells as f64 * resolution * resolution,
        resolution,
        bounds,
        corrigible_cells,
    })
}

/// Required precision: one over the corrigible-region area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    Finite(f64),
    /// Zero measured area: the channel is never corrigible within the
    /// scanned bounds.
    Unbounded,
}

impl Precision {
    pub fn value(&self) -> Option<f64> {
        match self {
            Precision::Finite(v) => Some(*v),
            Precision::Unbounded => None,
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::Finite(v) => write!(f, "{v}"),
            Precision::Unbounded => write!(f, "inf"),
        }
    }
}

pub fn precision_of(estimate: &RegionEstimate) -> Precision {
    if estimate.area > 0.0 {
        Precision::Finite(1.0 / estimate.area)
    } else {
        Precision::Unbounded
    }
}

/// Settings for a precision-complexity sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    /// Grid cells along each error axis.
    pub cells_per_axis: u32,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { cells_per_axis: 500 }
    }
}

/// One row of a precision-complexity sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub n: u32,
    pub estimate: RegionEstimate,
    pub precision: Precision,
}

/// Estimates area and precision per input size for a channel family.
///
/// Bounds per `n`: `[0, 2·hint]²` when the channel exposes a threshold hint
/// (so the grid tracks the shrinking region), else `[0, 1]²`. The worst case
/// over inputs of size `n` is built into [`corrigible`].
pub fn precision_complexity<C, F>(
    family: F,
    n_max: u32,
    settings: &SweepSettings,
) -> Result<Vec<SweepPoint>, PrecisionError>
where
    C: Channel + Sync,
    F: Fn(u32) -> C,
{
    if n_max < 1 || settings.cells_per_axis < 1 {
        return Err(PrecisionError::BadSweepSettings);
    }
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let channel = family(n);
        let side = match channel.threshold_hint() {
            Some(threshold) => 2.0 * threshold,
            None => 1.0,
        };
        let resolution = side / settings.cells_per_axis as f64;
        let bounds = ScanBounds { eps1_max: side, eps2_max: side };
        let estimate = region_area(&channel, bounds, resolution)?;
        out.push(SweepPoint { n, estimate, precision: precision_of(&estimate) });
    }
    Ok(out)
}
