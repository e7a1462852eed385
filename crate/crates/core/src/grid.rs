//! Frequency and delay grids.
//!
//! Units are fixed throughout the crate: time in fs, angular frequency in
//! rad/fs, wavelength in nm.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT: f64 = 299.792458;

/// `λ = 2πc/ω`, nm.
pub fn wavelength_nm(omega: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / omega
}

/// `ω = 2πc/λ`, rad/fs.
pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / wavelength_nm
}

/// Converts a wavelength width around `center_nm` to an angular-frequency
/// width using the exact end points `2πc/(λ ∓ Δλ/2)`.
pub fn wavelength_width_to_omega(center_nm: f64, width_nm: f64) -> f64 {
    let lo = center_nm - width_nm / 2.0;
    let hi = center_nm + width_nm / 2.0;
    if lo <= 0.0 {
        // The lower edge runs past zero wavelength; fall back to the
        // first-order conversion which stays finite.
        return TAU * SPEED_OF_LIGHT * width_nm / (center_nm * center_nm);
    }
    angular_frequency(lo) - angular_frequency(hi)
}

/// Uniform angular-frequency grid, `ω_k = center + (k − K/2)·step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub center: f64,
    pub step: f64,
    pub count: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, step: f64, count: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("frequency step must be > 0, got {step}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidGrid("frequency center must be finite".into()));
        }
        if count < 8 || !count.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "frequency count must be a power of two >= 8, got {count}"
            )));
        }
        let grid = FrequencyGrid { center, step, count };
        if grid.omega(0) <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "lowest grid frequency {} rad/fs is not positive",
                grid.omega(0)
            )));
        }
        Ok(grid)
    }

    /// Grid centered on `center_nm` that spans `span` rad/fs with `count` points.
    pub fn around_wavelength(center_nm: f64, span: f64, count: usize) -> Result<Self> {
        Self::new(angular_frequency(center_nm), span / count as f64, count)
    }

    #[inline]
    pub fn omega(&self, k: usize) -> f64 {
        self.center + (k as f64 - (self.count / 2) as f64) * self.step
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.omega(k)).collect()
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        (0..self.count).map(|k| wavelength_nm(self.omega(k))).collect()
    }

    /// Largest `|ω|` represented on the grid, measured as `|center| + K·step/2`.
    pub fn max_abs_omega(&self) -> f64 {
        self.center.abs() + self.count as f64 * self.step / 2.0
    }

    /// Half-width of the grid around its center.
    pub fn half_span(&self) -> f64 {
        self.count as f64 * self.step / 2.0
    }

    /// Time over which sums of `e^{iω_k t}` repeat, `2π/step`.
    pub fn time_period(&self) -> f64 {
        TAU / self.step
    }

    /// Fractional index of `omega` on the grid.
    pub fn index_of(&self, omega: f64) -> f64 {
        (omega - self.center) / self.step + (self.count / 2) as f64
    }

    pub fn matches(&self, other: &FrequencyGrid) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.center - other.center).abs() <= 1e-12 * self.center.abs().max(1.0)
    }

    pub fn ensure_matches(&self, other: &FrequencyGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Delay scan in rotated coordinates: `τ = t₂ − t₁` along the fine axis
/// and `T = (t₁ + t₂)/2` along the coarse axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub tau_step: f64,
    pub tau_count: usize,
    pub t_step: f64,
    pub t_count: usize,
    #[serde(default)]
    pub tau_offset: f64,
    #[serde(default)]
    pub t_offset: f64,
}

impl ScanGrid {
    pub fn new(tau_step: f64, tau_count: usize, t_step: f64, t_count: usize) -> Result<Self> {
        let scan = ScanGrid { tau_step, tau_count, t_step, t_count, tau_offset: 0.0, t_offset: 0.0 };
        scan.validate()?;
        Ok(scan)
    }

    pub fn with_offsets(mut self, tau_offset: f64, t_offset: f64) -> Self {
        self.tau_offset = tau_offset;
        self.t_offset = t_offset;
        self
    }

    /// 4000 × 25 points at 0.233 fs × 66 fs.
    pub fn paper() -> Self {
        ScanGrid { tau_step: 0.233, tau_count: 4000, t_step: 66.0, t_count: 25, tau_offset: 0.0, t_offset: 0.0 }
    }

    /// 2048 × 32 points at 1 fs × 15 fs.
    pub fn desk() -> Self {
        ScanGrid { tau_step: 1.0, tau_count: 2048, t_step: 15.0, t_count: 32, tau_offset: 0.0, t_offset: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau_step", self.tau_step), ("t_step", self.t_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.tau_count < 2 || self.t_count < 2 {
            return Err(Error::InvalidGrid(format!(
                "scan needs at least 2 × 2 points, got {} × {}",
                self.tau_count, self.t_count
            )));
        }
        if !(self.tau_offset.is_finite() && self.t_offset.is_finite()) {
            return Err(Error::InvalidGrid("scan offsets must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tau_count * self.t_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn tau(&self, n: usize) -> f64 {
        self.tau_offset + (n as f64 - (self.tau_count / 2) as f64) * self.tau_step
    }

    #[inline]
    pub fn t(&self, m: usize) -> f64 {
        self.t_offset + (m as f64 - (self.t_count / 2) as f64) * self.t_step
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.tau_count).map(|n| self.tau(n)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.t_count).map(|m| self.t(m)).collect()
    }

    /// `(t₁, t₂) = (T − τ/2, T + τ/2)` for row `m`, column `n`.
    #[inline]
    pub fn delays(&self, m: usize, n: usize) -> (f64, f64) {
        let (t, tau) = (self.t(m), self.tau(n));
        (t - tau / 2.0, t + tau / 2.0)
    }

    /// Row-major point index, T-major and τ-minor.
    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.tau_count + n
    }

    /// Nyquist frequency of the fine axis, `π/tau_step`.
    pub fn tau_nyquist(&self) -> f64 {
        PI / self.tau_step
    }

    /// Largest `|t₁|`, `|t₂|` or `|τ|` reached by the scan.
    pub fn max_abs_delay(&self) -> f64 {
        let corners = [
            self.delays(0, 0),
            self.delays(0, self.tau_count - 1),
            self.delays(self.t_count - 1, 0),
            self.delays(self.t_count - 1, self.tau_count - 1),
        ];
        let taus = [self.tau(0).abs(), self.tau(self.tau_count - 1).abs()];
        corners
            .iter()
            .flat_map(|&(a, b)| [a.abs(), b.abs()])
            .chain(taus)
            .fold(0.0, f64::max)
    }

    /// Refuses scans whose fine step cannot resolve the carrier fringes of
    /// `grid`, or whose delays exceed the half period of sums over `grid`.
    pub fn check_sampling(&self, grid: &FrequencyGrid) -> Result<()> {
        let limit = PI / grid.max_abs_omega();
        if self.tau_step >= limit {
            return Err(Error::Aliasing(format!(
                "tau_step {} fs must be below π/(|ω₀| + K·δω/2) = {:.6} fs",
                self.tau_step, limit
            )));
        }
        let half_period = grid.time_period() / 2.0;
        if self.max_abs_delay() > half_period {
            return Err(Error::Aliasing(format!(
                "scan reaches delay {:.3} fs beyond the frequency grid half period {:.3} fs",
                self.max_abs_delay(),
                half_period
            )));
        }
        Ok(())
    }
}
