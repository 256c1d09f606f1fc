use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `scale * x^(2 * half_degree)`.
    Polynomial { half_degree: u32, scale: f64 },
    /// `-depth` on `|x| ≤ half_width`, zero elsewhere.
    SquareWell { depth: f64, half_width: f64 },
    /// Linear interpolation of samples, constant beyond the end points.
    Tabulated { x: Vec<f64>, value: Vec<f64> },
}

impl PotentialSpec {
    pub fn harmonic() -> Self {
        PotentialSpec::Polynomial { half_degree: 1, scale: 0.5 }
    }

    pub fn quartic() -> Self {
        PotentialSpec::Polynomial { half_degree: 2, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Polynomial { half_degree, scale } => {
                if *half_degree == 0 || !(*scale > 0.0) {
                    return Err(Error::Config("polynomial potential must be confining".into()));
                }
            }
            PotentialSpec::SquareWell { depth, half_width } => {
                if !(*depth > 0.0 && *half_width > 0.0) {
                    return Err(Error::Config("square well needs positive depth and width".into()));
                }
            }
            PotentialSpec::Tabulated { x, value } => {
                if x.len() != value.len() || x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("tabulated potential needs increasing abscissae".into()));
                }
                if value.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("tabulated potential must be finite (locally bounded)".into()));
                }
            }
        }
        Ok(())
    }

    /// Read a two-column `x,V` CSV; a non-numeric first line is taken as a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut x = Vec::new();
        let mut value = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two columns", k + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    x.push(a);
                    value.push(b);
                }
                _ if x.is_empty() => continue,
                _ => return Err(Error::Parse(format!("line {}: not a number pair", k + 1))),
            }
        }
        let p = PotentialSpec::Tabulated { x, value };
        p.validate()?;
        Ok(p)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Polynomial { half_degree, scale } => scale * x.powi(2 * *half_degree as i32),
            PotentialSpec::SquareWell { depth, half_width } => {
                if x.abs() <= *half_width {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialSpec::Tabulated { x: xs, value } => {
                let n = xs.len();
                if x <= xs[0] {
                    return value[0];
                }
                if x >= xs[n - 1] {
                    return value[n - 1];
                }
                let k = xs.partition_point(|&v| v < x).clamp(1, n - 1);
                let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                value[k - 1] * (1.0 - t) + value[k] * t
            }
        }
    }

    pub fn is_confining(&self) -> bool {
        matches!(self, PotentialSpec::Polynomial { .. })
    }

    /// Exponent of `x` in a polynomial potential.
    pub fn degree(&self) -> Option<u32> {
        match self {
            PotentialSpec::Polynomial { half_degree, .. } => Some(2 * half_degree),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Polynomial { half_degree, scale } => format!("{scale}*x^{}", 2 * half_degree),
            PotentialSpec::SquareWell { depth, half_width } => format!("-{depth}*1{{|x|<={half_width}}}"),
            PotentialSpec::Tabulated { x, .. } => format!("tabulated({} samples)", x.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_even() {
        for p in [PotentialSpec::harmonic(), PotentialSpec::quartic(), PotentialSpec::SquareWell { depth: 1.0, half_width: 1.0 }] {
            for x in [0.1, 0.9, 1.0, 2.5, 7.0] {
                assert_eq!(p.eval(x), p.eval(-x));
            }
        }
        assert_eq!(PotentialSpec::quartic().eval(2.0), 16.0);
    }

    #[test]
    fn csv_import() {
        let p = PotentialSpec::from_csv("x,V\n-1,1\n0,0\n1,1\n").unwrap();
        assert_eq!(p.eval(0.5), 0.5);
        assert_eq!(p.eval(3.0), 1.0);
        assert!(PotentialSpec::from_csv("0,1\nfoo,bar\n").is_err());
    }
}
