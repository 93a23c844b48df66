//! Experiment configuration: one TOML file fully describes a run (the true
//! crack, the incident field, the observation grid, the noise model, and the
//! method block with its parameters).

use crate::forward::IncidentField;
use crate::geometry::Point;
use crate::scatterers::DiskKind;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrackConfig {
    pub corners: Vec<Point>,
    /// quadrature knots per segment for synthetic data generation
    #[serde(default = "default_knots")]
    pub knots_per_segment: usize,
}

fn default_knots() -> usize {
    32
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservationConfig {
    /// number of observation angles
    pub num_angles: usize,
    /// aperture start (radians)
    pub theta0: f64,
    /// aperture end; theta1 - theta0 = 2 pi means the full circle
    /// (endpoint excluded), otherwise a closed arc (endpoint included)
    pub theta1: f64,
}

impl ObservationConfig {
    pub fn is_full_circle(&self) -> bool {
        ((self.theta1 - self.theta0) - 2.0 * PI).abs() < 1e-12
    }

    /// Observation angles.
    pub fn angles(&self) -> Vec<f64> {
        let l = self.num_angles;
        let denom = if self.is_full_circle() { l } else { l - 1 } as f64;
        (0..l)
            .map(|p| self.theta0 + (self.theta1 - self.theta0) * p as f64 / denom)
            .collect()
    }

    /// Unit observation directions.
    pub fn directions(&self) -> Vec<Point> {
        self.angles()
            .iter()
            .map(|&t| [t.cos(), t.sin()])
            .collect()
    }

    /// Trapezoidal quadrature weights on the aperture.
    pub fn weights(&self) -> Vec<f64> {
        let l = self.num_angles;
        if self.is_full_circle() {
            vec![(self.theta1 - self.theta0) / l as f64; l]
        } else {
            let h = (self.theta1 - self.theta0) / (l - 1) as f64;
            let mut w = vec![h; l];
            w[0] = h / 2.0;
            w[l - 1] = h / 2.0;
            w
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Rectangular sampling grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Grid2d {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
}

impl Grid2d {
    pub fn points(&self) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let x = if self.nx > 1 {
                    self.x0 + (self.x1 - self.x0) * ix as f64 / (self.nx - 1) as f64
                } else {
                    self.x0
                };
                let y = if self.ny > 1 {
                    self.y0 + (self.y1 - self.y0) * iy as f64 / (self.ny - 1) as f64
                } else {
                    self.y0
                };
                pts.push([x, y]);
            }
        }
        pts
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodConfig {
    /// far-field data only (used by `forward` and `make-data`)
    Forward,
    /// misfit against shifted copies of the known crack shape
    ContrastCrack { shifts: Vec<Point> },
    /// misfit against point sources of strength tau on a sampling grid
    ContrastPointSource {
        grid: Grid2d,
        #[serde(default = "default_tau")]
        tau: [f64; 2],
    },
    /// misfit against disk scatterers of fixed radius on a sampling grid
    ContrastDisk {
        grid: Grid2d,
        radius: f64,
        disk: DiskKind,
    },
    /// factorization indicator over explicit (center, radius) combinations
    Factorize {
        disk: DiskKind,
        centers: Vec<Point>,
        radii: Vec<f64>,
        alpha: f64,
    },
    /// factorization indicator against an externally supplied far-field
    /// matrix (e.g. non-disk test bodies); the matrix must be sampled on
    /// this config's observation grid
    FactorizeExternal { matrix_csv: String, alpha: f64 },
    /// radius scans at many centers plus ball-coverage accumulation
    ScanHull {
        disk: DiskKind,
        centers: Vec<Point>,
        r_min: f64,
        r_max: f64,
        r_step: f64,
        alpha: f64,
        /// containment threshold; omitted = geometric mean of the first
        /// center's indicator curve
        epsilon: Option<f64>,
        support_grid: Grid2d,
    },
    /// regularized Newton corner reconstruction
    Newton {
        initial_corners: Vec<Point>,
        alpha: f64,
        alpha0: f64,
        iterations: usize,
        knots_per_segment: usize,
    },
}

fn default_tau() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub crack: CrackConfig,
    pub incident: IncidentField,
    pub observation: ObservationConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub method: MethodConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.crack.corners.len() < 2 {
            return Err(invalid("crack.corners", "need at least 2 corners"));
        }
        if self.crack.knots_per_segment < 2 {
            return Err(invalid("crack.knots_per_segment", "must be >= 2"));
        }
        if self.incident.k <= 0.0 {
            return Err(invalid("incident.k", "wavenumber must be positive"));
        }
        if self.observation.num_angles < 8 {
            return Err(invalid("observation.num_angles", "must be >= 8"));
        }
        if self.observation.theta1 <= self.observation.theta0 {
            return Err(invalid("observation.theta1", "aperture must be non-empty"));
        }
        if self.noise.delta < 0.0 {
            return Err(invalid("noise.delta", "must be >= 0"));
        }
        match &self.method {
            MethodConfig::Forward => {}
            MethodConfig::ContrastCrack { shifts } => {
                if shifts.is_empty() {
                    return Err(invalid("method.shifts", "must not be empty"));
                }
            }
            MethodConfig::ContrastPointSource { grid, tau } => {
                validate_grid("method.grid", grid)?;
                if tau[0] == 0.0 && tau[1] == 0.0 {
                    return Err(invalid("method.tau", "must be nonzero"));
                }
            }
            MethodConfig::ContrastDisk { grid, radius, .. } => {
                validate_grid("method.grid", grid)?;
                if *radius <= 0.0 {
                    return Err(invalid("method.radius", "must be positive"));
                }
            }
            MethodConfig::Factorize {
                centers,
                radii,
                alpha,
                ..
            } => {
                if centers.is_empty() || radii.is_empty() {
                    return Err(invalid("method.centers/radii", "must not be empty"));
                }
                if radii.iter().any(|&r| r <= 0.0) {
                    return Err(invalid("method.radii", "must be positive"));
                }
                if *alpha <= 0.0 {
                    return Err(invalid("method.alpha", "must be positive"));
                }
            }
            MethodConfig::FactorizeExternal { matrix_csv, alpha } => {
                if matrix_csv.is_empty() {
                    return Err(invalid("method.matrix_csv", "must not be empty"));
                }
                if *alpha <= 0.0 {
                    return Err(invalid("method.alpha", "must be positive"));
                }
            }
            MethodConfig::ScanHull {
                centers,
                r_min,
                r_max,
                r_step,
                alpha,
                epsilon,
                support_grid,
                ..
            } => {
                if centers.is_empty() {
                    return Err(invalid("method.centers", "must not be empty"));
                }
                if !(*r_min > 0.0 && r_max > r_min && *r_step > 0.0) {
                    return Err(invalid("method.r_min/r_max/r_step", "need 0 < r_min < r_max and r_step > 0"));
                }
                if *alpha <= 0.0 {
                    return Err(invalid("method.alpha", "must be positive"));
                }
                if let Some(e) = epsilon {
                    if *e <= 0.0 {
                        return Err(invalid("method.epsilon", "must be positive"));
                    }
                }
                validate_grid("method.support_grid", support_grid)?;
            }
            MethodConfig::Newton {
                initial_corners,
                alpha,
                alpha0,
                iterations,
                knots_per_segment,
            } => {
                if initial_corners.len() < 2 {
                    return Err(invalid("method.initial_corners", "need at least 2 corners"));
                }
                if *alpha <= 0.0 || *alpha0 <= 0.0 {
                    return Err(invalid("method.alpha/alpha0", "must be positive"));
                }
                if *iterations < 1 {
                    return Err(invalid("method.iterations", "must be >= 1"));
                }
                if *knots_per_segment < 2 {
                    return Err(invalid("method.knots_per_segment", "must be >= 2"));
                }
            }
        }
        Ok(())
    }

    /// Radii list of a ScanHull method block.
    pub fn scan_radii(r_min: f64, r_max: f64, r_step: f64) -> Vec<f64> {
        let mut radii = Vec::new();
        let mut r = r_min;
        while r <= r_max + 1e-12 {
            radii.push(r);
            r += r_step;
        }
        radii
    }
}

fn validate_grid(field: &str, g: &Grid2d) -> Result<(), ConfigError> {
    if g.nx == 0 || g.ny == 0 {
        return Err(invalid(field, "grid must be non-empty"));
    }
    if g.x1 < g.x0 || g.y1 < g.y0 {
        return Err(invalid(field, "grid bounds must be ordered"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[crack]
corners = [[1.0, 3.0], [3.0, 1.0], [2.0, 0.0]]

[incident]
kind = "point_source"
k = 5.0
y0 = [8.0, 0.0]

[observation]
num_angles = 129
theta0 = 1.5707963267948966
theta1 = 4.71238898038469

[noise]
delta = 0.0
seed = 1

[method]
kind = "contrast_crack"
shifts = [[0.0, 0.0], [2.2, -2.4]]
"#;

    #[test]
    fn parses_and_validates_sample() {
        let cfg: ExperimentConfig = toml::from_str(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.observation.num_angles, 129);
        assert!(!cfg.observation.is_full_circle());
        let th = cfg.observation.angles();
        assert!((th[0] - PI / 2.0).abs() < 1e-12);
        assert!((th[128] - 1.5 * PI).abs() < 1e-9);
        // round trip through TOML
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.crack.corners, cfg.crack.corners);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg: ExperimentConfig = toml::from_str(SAMPLE).unwrap();
        cfg.observation.num_angles = 4;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("observation.num_angles"), "{err}");
        cfg.observation.num_angles = 129;
        cfg.noise.delta = -0.1;
        assert!(cfg.validate().unwrap_err().to_string().contains("noise.delta"));
    }

    #[test]
    fn full_circle_grid_excludes_endpoint() {
        let obs = ObservationConfig {
            num_angles: 64,
            theta0: 0.0,
            theta1: 2.0 * PI,
        };
        assert!(obs.is_full_circle());
        let th = obs.angles();
        assert_eq!(th.len(), 64);
        assert!((th[63] - 2.0 * PI * 63.0 / 64.0).abs() < 1e-12);
        let w = obs.weights();
        assert!((w.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn scan_radii_inclusive_of_endpoint() {
        let r = ExperimentConfig::scan_radii(1.0, 5.0, 0.2);
        assert_eq!(r.len(), 21);
        assert!((r[20] - 5.0).abs() < 1e-9);
    }
}
