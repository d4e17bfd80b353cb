use std::io::{self, Write};
use std::time::Duration;

pub const CSV_HEADER: &str = "step,time,dense_bytes,compressed_bytes,ratio,nnz,zeroed,global_mass,l2_error";

#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub step: usize,
    pub time: f64,
    pub dense_bytes: usize,
    pub compressed_bytes: usize,
    pub ratio: f64,
    pub nnz: usize,
    pub zeroed: usize,
    /// Trapezoid mass of the first component.
    pub global_mass: f64,
    /// Transport only.
    pub l2_error: Option<f64>,
    /// Global mass of every component.
    pub masses: Vec<f64>,
    /// Extremes of the first component over all logical cells.
    pub min: f64,
    pub max: f64,
    /// Largest relative change of any component mass across the
    /// compression cycle of this step.
    pub cycle_mass_drift: f64,
    /// Largest relative disagreement of shared cells after the FV step.
    pub shared_discrepancy: f64,
}

impl StepMetrics {
    pub fn csv_row(&self) -> String {
        let l2 = self.l2_error.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.step,
            self.time,
            self.dense_bytes,
            self.compressed_bytes,
            self.ratio,
            self.nnz,
            self.zeroed,
            self.global_mass,
            l2
        )
    }
}

/// Wall time per phase. Phases run one after another (each possibly in
/// parallel over patches), so their sum never exceeds `total`. `metrics`
/// covers diagnostics (masses, extremes, errors) and is left out of the
/// overhead.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseTimes {
    pub step: Duration,
    pub dwt: Duration,
    pub threshold: Duration,
    pub codec: Duration,
    pub metrics: Duration,
    pub total: Duration,
}

impl PhaseTimes {
    /// `(total - metrics - step) / step`.
    pub fn overhead(&self) -> f64 {
        let step = self.step.as_secs_f64();
        if step == 0.0 {
            return 0.0;
        }
        (self.total.as_secs_f64() - self.metrics.as_secs_f64() - step) / step
    }

    pub fn phase_sum(&self) -> Duration {
        self.step + self.dwt + self.threshold + self.codec + self.metrics
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub steps: Vec<StepMetrics>,
    pub phases: PhaseTimes,
}

impl RunMetrics {
    pub fn average_ratio(&self) -> f64 {
        mean(self.steps.iter().map(|s| s.ratio))
    }

    /// Mean ratio over steps ending at or before `t`.
    pub fn average_ratio_until(&self, t: f64) -> f64 {
        mean(self.steps.iter().filter(|s| s.time <= t).map(|s| s.ratio))
    }

    pub fn final_l2_error(&self) -> Option<f64> {
        self.steps.last().and_then(|s| s.l2_error)
    }

    /// Slope of a least-squares line through `(step, ratio)`.
    pub fn ratio_trend(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.steps.iter().map(|s| (s.step as f64, s.ratio)).collect();
        least_squares_slope(&pts)
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for s in &self.steps {
            writeln!(w, "{}", s.csv_row())?;
        }
        w.flush()
    }

    pub fn summary(&self) -> String {
        let p = &self.phases;
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let mut out = String::new();
        out.push_str(&format!("steps            {}\n", self.steps.len()));
        if let Some(last) = self.steps.last() {
            out.push_str(&format!("final time       {}\n", last.time));
            out.push_str(&format!("final mass       {}\n", last.global_mass));
            if let Some(l2) = last.l2_error {
                out.push_str(&format!("final l2 error   {l2:e}\n"));
            }
        }
        out.push_str(&format!("average ratio    {:.3}\n", self.average_ratio()));
        out.push_str(&format!("step             {:10.3} ms\n", ms(p.step)));
        out.push_str(&format!("wavelet          {:10.3} ms\n", ms(p.dwt)));
        out.push_str(&format!("threshold        {:10.3} ms\n", ms(p.threshold)));
        out.push_str(&format!("codec            {:10.3} ms\n", ms(p.codec)));
        out.push_str(&format!("metrics          {:10.3} ms\n", ms(p.metrics)));
        out.push_str(&format!("total            {:10.3} ms\n", ms(p.total)));
        out.push_str(&format!("overhead         {:+.2}%\n", 100.0 * p.overhead()));
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
