//! Foraging efficiency and summary statistics.
//!
//! Efficiency compares what a species ate in a tick with what random agents
//! would be expected to eat given the food density at the start of that tick.
//! It is 1 for an idealised random forager.

use crate::model::TickReport;

/// `grass_eaten / (sheep * grass_density)` with densities at tick start.
/// Undefined when there were no sheep or no grass.
pub fn sheep_efficiency(report: &TickReport) -> Option<f64> {
    let sheep = report.start.sheep;
    let density = report.start.grass as f64 / report.patch_count as f64;
    if sheep == 0 || report.start.grass == 0 {
        return None;
    }
    Some(report.grass_eaten as f64 / (sheep as f64 * density))
}

/// `sheep_eaten / (wolves * sheep_density)` with densities at tick start.
/// Undefined when there were no wolves or no sheep.
pub fn wolf_efficiency(report: &TickReport) -> Option<f64> {
    let wolves = report.start.wolves;
    let sheep = report.start.sheep;
    if wolves == 0 || sheep == 0 {
        return None;
    }
    let density = sheep as f64 / report.patch_count as f64;
    Some(report.sheep_eaten as f64 / (wolves as f64 * density))
}

/// Mean of the defined values plus how many were skipped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Masked {
    pub mean: Option<f64>,
    pub used: usize,
    pub excluded: usize,
}

pub fn masked_mean(values: impl IntoIterator<Item = Option<f64>>) -> Masked {
    let mut sum = 0.0;
    let (mut used, mut excluded) = (0, 0);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                used += 1;
            }
            None => excluded += 1,
        }
    }
    Masked {
        mean: (used > 0).then(|| sum / used as f64),
        used,
        excluded,
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Half-width of the normal-approximation 95% interval: `1.96 * sd / sqrt(n)`.
pub fn ci95_half_width(values: &[f64]) -> Option<f64> {
    sample_sd(values).map(|sd| 1.96 * sd / (values.len() as f64).sqrt())
}

/// Mean with its 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn of(values: &[f64]) -> Option<Self> {
        Some(Self {
            mean: mean(values)?,
            half_width: ci95_half_width(values).unwrap_or(0.0),
        })
    }

    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }
}
