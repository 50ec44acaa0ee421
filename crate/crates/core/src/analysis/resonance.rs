use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{SMatrixRecord, ScanTable};

/// Which scan quantity is searched for maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceCriterion {
    /// Maxima of `Im S(E)`.
    #[serde(rename = "im-s")]
    ImaginaryPart,
    /// Maxima of `d delta / dE` for the unwrapped phase shift; picks up
    /// broad resonances whose `Im S` maximum is pulled away by the
    /// background phase.
    PhaseDerivative,
    /// Maxima of `|1 - S(E)|`.
    OneMinusS,
}

impl std::str::FromStr for ResonanceCriterion {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "im-s" | "imaginary-part" | "ims" => Ok(Self::ImaginaryPart),
            "phase-derivative" | "dphase" => Ok(Self::PhaseDerivative),
            "one-minus-s" | "abs-1-s" => Ok(Self::OneMinusS),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown resonance criterion `{other}` (im-s | phase-derivative | one-minus-s)"
            ))),
        }
    }
}

impl std::fmt::Display for ResonanceCriterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ImaginaryPart => "im-s",
            Self::PhaseDerivative => "phase-derivative",
            Self::OneMinusS => "one-minus-s",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    pub criterion: ResonanceCriterion,
    /// Peaks with a smaller topographic prominence are dropped. Measured
    /// in the units of the searched quantity (inverse energy for the
    /// phase derivative).
    pub min_prominence: f64,
}

impl ResonanceOptions {
    /// Default threshold for the given criterion.
    pub fn new(criterion: ResonanceCriterion) -> Self {
        let min_prominence = match criterion {
            ResonanceCriterion::ImaginaryPart | ResonanceCriterion::OneMinusS => 0.05,
            ResonanceCriterion::PhaseDerivative => 1.0,
        };
        Self {
            criterion,
            min_prominence,
        }
    }
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self::new(ResonanceCriterion::ImaginaryPart)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Vertex of the parabola through the maximum and its neighbours.
    pub energy: f64,
    pub height: f64,
    /// Full width at half prominence, interpolated on the grid.
    pub width_estimate: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub criterion: ResonanceCriterion,
    /// Sorted by energy.
    pub peaks: Vec<Peak>,
}

impl ResonanceReport {
    /// The reported peak closest to `energy`.
    pub fn nearest(&self, energy: f64) -> Option<&Peak> {
        self.peaks
            .iter()
            .min_by(|a, b| (a.energy - energy).abs().total_cmp(&(b.energy - energy).abs()))
    }

    /// The peak with the largest prominence.
    pub fn dominant(&self) -> Option<&Peak> {
        self.peaks
            .iter()
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    }
}

fn prominence(y: &[f64], i: usize) -> f64 {
    let peak = y[i];
    let mut left_min = peak;
    for &v in y[..i].iter().rev() {
        if v > peak {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = peak;
    for &v in &y[i + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

/// Vertex of the parabola through three points with distinct abscissae.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (a, b) = (x[1] - x[0], x[1] - x[2]);
    let (fa, fb) = (y[1] - y[0], y[1] - y[2]);
    let den = a * fb - b * fa;
    if den == 0.0 {
        return (x[1], y[1]);
    }
    let shift = 0.5 * (a * a * fb - b * b * fa) / den;
    let xv = (x[1] - shift).clamp(x[0], x[2]);
    // Lagrange form evaluated at the vertex
    let l0 = (xv - x[1]) * (xv - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]));
    let l1 = (xv - x[0]) * (xv - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]));
    let l2 = (xv - x[0]) * (xv - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]));
    (xv, y[0] * l0 + y[1] * l1 + y[2] * l2)
}

fn crossing(x: &[f64], y: &[f64], i: usize, level: f64, step: isize) -> Option<f64> {
    let mut j = i as isize;
    loop {
        let k = j + step;
        if k < 0 || k as usize >= y.len() {
            return None;
        }
        let (a, b) = (j as usize, k as usize);
        if y[b] < level {
            let t = (y[a] - level) / (y[a] - y[b]);
            return Some(x[a] + t * (x[b] - x[a]));
        }
        j = k;
    }
}

/// Interior local maxima of `y(x)` with prominence at least
/// `min_prominence`, refined by a three-point parabola. `x` must be
/// strictly increasing; non-finite samples are skipped.
pub fn find_peaks(x: &[f64], y: &[f64], min_prominence: f64) -> Vec<Peak> {
    let (x, y): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    let mut peaks = Vec::new();
    if y.len() < 3 {
        return peaks;
    }
    for i in 1..y.len() - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let prom = prominence(&y, i);
        if prom < min_prominence {
            continue;
        }
        let (energy, height) = parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]);
        let level = y[i] - 0.5 * prom;
        let width_estimate = match (crossing(&x, &y, i, level, -1), crossing(&x, &y, i, level, 1)) {
            (Some(a), Some(b)) => b - a,
            (Some(a), None) => 2.0 * (x[i] - a),
            (None, Some(b)) => 2.0 * (b - x[i]),
            (None, None) => f64::NAN,
        };
        peaks.push(Peak {
            energy,
            height,
            width_estimate,
            prominence: prom,
        });
    }
    peaks
}

/// `d delta / dE` of the unwrapped phase shift at every finite row, with
/// three-point differences on the non-uniform grid. Returns the energies
/// and derivatives of the rows used.
pub fn phase_derivative(table: &ScanTable<SMatrixRecord>) -> (Vec<f64>, Vec<f64>) {
    let (e, mut phase): (Vec<f64>, Vec<f64>) = table
        .iter()
        .filter(|(_, r)| !r.at_pole && r.phase_shift.is_finite())
        .map(|(e, r)| (e, r.phase_shift))
        .unzip();
    // the phase shift is defined modulo pi
    for i in 1..phase.len() {
        let jump = phase[i] - phase[i - 1];
        phase[i] -= PI * (jump / PI).round();
    }
    let n = e.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return (e, d);
    }
    d[0] = (phase[1] - phase[0]) / (e[1] - e[0]);
    d[n - 1] = (phase[n - 1] - phase[n - 2]) / (e[n - 1] - e[n - 2]);
    for i in 1..n - 1 {
        let (h0, h1) = (e[i] - e[i - 1], e[i + 1] - e[i]);
        d[i] = (h0 * h0 * (phase[i + 1] - phase[i]) + h1 * h1 * (phase[i] - phase[i - 1]))
            / (h0 * h1 * (h0 + h1));
    }
    (e, d)
}

/// Resonance peaks of an S-matrix scan.
pub fn find_resonances(table: &ScanTable<SMatrixRecord>, opts: ResonanceOptions) -> ResonanceReport {
    let peaks = match opts.criterion {
        ResonanceCriterion::ImaginaryPart => {
            let y: Vec<f64> = table.records().iter().map(|r| r.s.im).collect();
            find_peaks(table.energies(), &y, opts.min_prominence)
        }
        ResonanceCriterion::OneMinusS => {
            let y: Vec<f64> = table.records().iter().map(|r| r.one_minus_s).collect();
            find_peaks(table.energies(), &y, opts.min_prominence)
        }
        ResonanceCriterion::PhaseDerivative => {
            let (e, d) = phase_derivative(table);
            find_peaks(&e, &d, opts.min_prominence)
        }
    };
    ResonanceReport {
        criterion: opts.criterion,
        peaks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_peak() {
        let x: Vec<f64> = (0..601).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|e| 0.01 / ((e - 3.0).powi(2) + 0.01)).collect();
        let peaks = find_peaks(&x, &y, 0.05);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].energy - 3.0).abs() <= 1e-3);
        // half width 0.1
        assert!((peaks[0].width_estimate - 0.2).abs() < 0.01);
    }

    #[test]
    fn off_grid_peak_is_refined() {
        let x: Vec<f64> = (0..101).map(|i| 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|e| -(e - 4.437).powi(2)).collect();
        let peaks = find_peaks(&x, &y, 0.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].energy - 4.437).abs() < 1e-12);
    }

    #[test]
    fn monotone_data_has_no_peaks() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(find_peaks(&x, &x, 0.0).is_empty());
    }

    #[test]
    fn prominence_filters_ripples() {
        let x: Vec<f64> = (0..400).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|e| (-(e - 2.0f64).powi(2) * 4.0).exp() + 0.01 * (40.0 * e).sin())
            .collect();
        let peaks = find_peaks(&x, &y, 0.2);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].energy - 2.0).abs() < 0.05);
    }

    #[test]
    fn criterion_names() {
        assert_eq!(
            "phase-derivative".parse::<ResonanceCriterion>().unwrap(),
            ResonanceCriterion::PhaseDerivative
        );
        assert_eq!(ResonanceCriterion::ImaginaryPart.to_string(), "im-s");
        assert!("peak".parse::<ResonanceCriterion>().is_err());
    }
}
