use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::HarnessError;

pub const CURVE_HEADER: &str = "episode,length,total_reward,success,moving_avg_length,optimal_length";

/// One training episode as written to the learning-curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    /// 1-based.
    pub episode: usize,
    pub length: usize,
    pub total_reward: f64,
    pub success: bool,
    /// Mean length over the trailing window, or over all episodes so far
    /// while fewer than a full window exist.
    pub moving_avg_length: f64,
    pub optimal_length: usize,
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{}\n",
            self.episode,
            self.length,
            self.total_reward,
            u8::from(self.success),
            self.moving_avg_length,
            self.optimal_length
        )
    }

    pub fn parse(line: &str) -> Option<MetricsRow> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return None;
        }
        Some(MetricsRow {
            episode: f[0].parse().ok()?,
            length: f[1].parse().ok()?,
            total_reward: f[2].parse().ok()?,
            success: match f[3] {
                "1" => true,
                "0" => false,
                _ => return None,
            },
            moving_avg_length: f[4].parse().ok()?,
            optimal_length: f[5].parse().ok()?,
        })
    }
}

/// Running mean over the last `window` values.
#[derive(Debug, Clone)]
pub struct MovingAverage {
    window: usize,
    values: std::collections::VecDeque<usize>,
    sum: usize,
}

impl MovingAverage {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "window must be positive");
        MovingAverage {
            window,
            values: std::collections::VecDeque::with_capacity(window),
            sum: 0,
        }
    }

    pub fn push(&mut self, value: usize) -> f64 {
        self.values.push_back(value);
        self.sum += value;
        if self.values.len() > self.window {
            self.sum -= self.values.pop_front().expect("non-empty");
        }
        self.sum as f64 / self.values.len() as f64
    }
}

/// Writes the curve file one complete line per write, so an interrupted run
/// leaves a file whose every line parses.
pub struct CurveWriter {
    file: File,
    average: MovingAverage,
    written: usize,
}

impl CurveWriter {
    pub fn create(path: &Path, window: usize) -> Result<Self, HarnessError> {
        let mut file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        file.write_all(format!("{CURVE_HEADER}\n").as_bytes())
            .map_err(|e| HarnessError::io(path, e))?;
        Ok(CurveWriter {
            file,
            average: MovingAverage::new(window),
            written: 0,
        })
    }

    pub fn append(&mut self, length: usize, total_reward: f64, success: bool, optimal: usize) -> std::io::Result<MetricsRow> {
        self.written += 1;
        let row = MetricsRow {
            episode: self.written,
            length,
            total_reward,
            success,
            moving_avg_length: self.average.push(length),
            optimal_length: optimal,
        };
        self.file.write_all(row.to_csv().as_bytes())?;
        Ok(row)
    }
}

/// Reads a curve file back, skipping the header.
pub fn read_curve(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(HarnessError::Runtime(format!("{} is not a curve file", path.display())));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            MetricsRow::parse(l).ok_or_else(|| HarnessError::Runtime(format!("{}:{}: bad row", path.display(), i + 2)))
        })
        .collect()
}
