//! Type-I downconversion source pumped by the second harmonic of the master
//! pulse, reduced to one spectral dimension.

use std::f64::consts::LN_2;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{angular_frequency, wavelength_nm, wavelength_width_to_omega, FrequencyGrid};
use crate::linalg;
use crate::state::{SpectralAmplitude, SpectralDensityMatrix};

/// Pump/signal group-delay mismatch of BBO, fs/mm, for an extraordinary
/// 387 nm pump and ordinary 774 nm signal and idler at a 29.7° cut. Derived
/// from the Eimerl Sellmeier equations (group indices 1.7509 and 1.6863).
pub const BBO_GVM_387_774: f64 = 215.38;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrystalConfig {
    pub length_mm: f64,
    /// Group-delay mismatch pump ↔ signal, fs/mm.
    pub gvm_pump_signal: f64,
    /// Group-delay mismatch pump ↔ idler, fs/mm.
    pub gvm_pump_idler: f64,
    /// Signal interference filter center, nm.
    pub filter_center_nm: f64,
    /// Signal interference filter intensity FWHM, nm.
    pub filter_fwhm_nm: f64,
    /// Gaussian idler collection bandwidth (intensity FWHM), nm.
    pub collection_fwhm_nm: f64,
}

impl Default for CrystalConfig {
    /// 1 mm BBO with a 10 nm filter at 774.5 nm.
    fn default() -> Self {
        CrystalConfig {
            length_mm: 1.0,
            gvm_pump_signal: BBO_GVM_387_774,
            gvm_pump_idler: BBO_GVM_387_774,
            filter_center_nm: 774.5,
            filter_fwhm_nm: 10.0,
            collection_fwhm_nm: 40.0,
        }
    }
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length_mm", self.length_mm),
            ("filter_center_nm", self.filter_center_nm),
            ("filter_fwhm_nm", self.filter_fwhm_nm),
            ("collection_fwhm_nm", self.collection_fwhm_nm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam(format!("crystal {name} = {v} must be > 0")));
            }
        }
        if !(self.gvm_pump_signal.is_finite() && self.gvm_pump_idler.is_finite()) {
            return Err(Error::InvalidParam("group-delay mismatch must be finite".into()));
        }
        Ok(())
    }
}

/// `f(ω_s, ω_i)` with `∬|f|² dω_s dω_i = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSpectralAmplitude {
    pub signal_grid: FrequencyGrid,
    pub idler_grid: FrequencyGrid,
    /// Rows are signal frequencies, columns idler frequencies.
    pub values: Array2<C64>,
}

impl JointSpectralAmplitude {
    pub fn new(signal_grid: FrequencyGrid, idler_grid: FrequencyGrid, values: Array2<C64>) -> Result<Self> {
        if values.dim() != (signal_grid.count, idler_grid.count) {
            return Err(Error::Size(format!(
                "JSA is {:?}, grids need {} × {}",
                values.dim(),
                signal_grid.count,
                idler_grid.count
            )));
        }
        Ok(JointSpectralAmplitude { signal_grid, idler_grid, values })
    }

    fn measure(&self) -> f64 {
        self.signal_grid.step * self.idler_grid.step
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::DegenerateState("joint spectral amplitude vanishes".into()));
        }
        let s = 1.0 / n.sqrt();
        self.values.mapv_inplace(|v| v * s);
        Ok(self)
    }

    /// Schmidt coefficients `s_k` (descending) with `Σ s_k² = 1` for a
    /// normalized amplitude.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let w = self.measure().sqrt();
        linalg::singular_values(&self.values.mapv(|v| v * w))
    }
}

/// Grid of `2K` points at the same step centered at twice the master center,
/// so that `ω_k + ω_l` of two master samples lands on index `k + l`.
pub fn pump_grid_for(grid: &FrequencyGrid) -> Result<FrequencyGrid> {
    FrequencyGrid::new(2.0 * grid.center, grid.step, 2 * grid.count)
}

/// Perturbative second harmonic, `A₂(ω) ∝ ∫ A(ω′) A(ω − ω′) dω′`,
/// normalized, on [`pump_grid_for`] the master grid.
pub fn shg_pump(master: &SpectralAmplitude) -> Result<SpectralAmplitude> {
    let grid = pump_grid_for(&master.grid)?;
    let a = &master.values;
    let k = a.len();
    let mut out = vec![C64::new(0.0, 0.0); 2 * k];
    for (i, ai) in a.iter().enumerate() {
        for (j, aj) in a.iter().enumerate() {
            out[i + j] += ai * aj;
        }
    }
    out.iter_mut().for_each(|v| *v *= master.grid.step);
    SpectralAmplitude::new(grid, out)?.normalized()
}

/// Gaussian amplitude filter with intensity FWHM `fwhm` (rad/fs).
fn gaussian_filter(omega: f64, center: f64, fwhm: f64) -> f64 {
    let d = omega - center;
    (-2.0 * LN_2 * d * d / (fwhm * fwhm)).exp()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// The separate factors of the joint amplitude besides the pump envelope.
#[derive(Clone, Copy, Debug)]
pub struct JsaFactors {
    /// Degenerate frequency `ω_p0/2`.
    pub degenerate: f64,
    pub filter_center: f64,
    pub filter_fwhm: f64,
    pub collection_center: f64,
    pub collection_fwhm: f64,
}

impl JsaFactors {
    pub fn new(pump: &SpectralAmplitude, crystal: &CrystalConfig) -> Result<Self> {
        crystal.validate()?;
        let pump_center = pump.grid.center;
        let filter_center = angular_frequency(crystal.filter_center_nm);
        let filter_fwhm = wavelength_width_to_omega(crystal.filter_center_nm, crystal.filter_fwhm_nm);
        let collection_center = pump_center - filter_center;
        if collection_center <= 0.0 {
            return Err(Error::InvalidParam("filter center lies above the pump frequency".into()));
        }
        let collection_fwhm = wavelength_width_to_omega(wavelength_nm(collection_center), crystal.collection_fwhm_nm);
        Ok(JsaFactors { degenerate: pump_center / 2.0, filter_center, filter_fwhm, collection_center, collection_fwhm })
    }

    pub fn signal_filter(&self, omega: f64) -> f64 {
        gaussian_filter(omega, self.filter_center, self.filter_fwhm)
    }

    pub fn idler_filter(&self, omega: f64) -> f64 {
        gaussian_filter(omega, self.collection_center, self.collection_fwhm)
    }

    /// Phase-mismatch argument `L(gvm_ps·ν_s + gvm_pi·ν_i)/2`.
    pub fn mismatch(&self, crystal: &CrystalConfig, ws: f64, wi: f64) -> f64 {
        let (nu_s, nu_i) = (ws - self.degenerate, wi - self.degenerate);
        crystal.length_mm * (crystal.gvm_pump_signal * nu_s + crystal.gvm_pump_idler * nu_i) / 2.0
    }
}

/// Pump sample at `omega`, which must fall on the pump grid.
fn pump_at(pump: &SpectralAmplitude, omega: f64) -> Result<C64> {
    let idx = pump.grid.index_of(omega);
    let rounded = idx.round();
    if (idx - rounded).abs() > 1e-6 {
        return Err(Error::GridMismatch(format!(
            "sum frequency {omega} rad/fs falls between pump samples (index {idx})"
        )));
    }
    if rounded < 0.0 || rounded >= pump.grid.count as f64 {
        return Err(Error::Coverage(format!("sum frequency {omega} rad/fs lies outside the pump grid")));
    }
    Ok(pump.values[rounded as usize])
}

/// `f(ω_s, ω_i) = A₂(ω_s + ω_i)·sinc(Δk L/2)·F(ω_s)·G(ω_i)` on explicit
/// signal and idler grids.
pub fn build_jsa_on(
    pump: &SpectralAmplitude,
    signal_grid: FrequencyGrid,
    idler_grid: FrequencyGrid,
    crystal: &CrystalConfig,
) -> Result<JointSpectralAmplitude> {
    let factors = JsaFactors::new(pump, crystal)?;
    let ws = signal_grid.omegas();
    let wi = idler_grid.omegas();
    let mut values = Array2::<C64>::zeros((ws.len(), wi.len()));
    for (r, &s) in ws.iter().enumerate() {
        let fs = factors.signal_filter(s);
        for (c, &i) in wi.iter().enumerate() {
            let env = pump_at(pump, s + i)?;
            let pm = sinc(factors.mismatch(crystal, s, i));
            values[[r, c]] = env * (pm * fs * factors.idler_filter(i));
        }
    }
    JointSpectralAmplitude::new(signal_grid, idler_grid, values)?.normalized()
}

/// Joint amplitude with signal and idler both on the half-frequency grid of
/// `pump` (`K/2` points at the pump step).
pub fn build_jsa(pump: &SpectralAmplitude, crystal: &CrystalConfig) -> Result<JointSpectralAmplitude> {
    let g = pump.grid;
    let half = FrequencyGrid::new(g.center / 2.0, g.step, g.count / 2)?;
    build_jsa_on(pump, half, half, crystal)
}

/// `ρ(ω, ω′) = ∫ f(ω, ω_i) f*(ω′, ω_i) dω_i`, trace-normalized.
pub fn trace_out_idler(jsa: &JointSpectralAmplitude) -> Result<SpectralDensityMatrix> {
    let (ks, ki) = jsa.values.dim();
    let f = &jsa.values;
    let mut rho = Array2::<C64>::zeros((ks, ks));
    for a in 0..ks {
        for b in a..ks {
            let v: C64 = (0..ki).map(|c| f[[a, c]] * f[[b, c]].conj()).sum::<C64>() * jsa.idler_grid.step;
            rho[[a, b]] = v;
            rho[[b, a]] = v.conj();
        }
        rho[[a, a]].im = 0.0;
    }
    SpectralDensityMatrix::new(jsa.signal_grid, rho)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::sigma_from_duration;

    fn master_grid() -> FrequencyGrid {
        FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128).unwrap()
    }

    #[test]
    fn two_lines_give_three_harmonics() {
        let g = master_grid();
        let mut v = vec![C64::new(0.0, 0.0); g.count];
        v[60] = C64::new(1.0, 0.0);
        v[68] = C64::new(1.0, 0.0);
        let a = SpectralAmplitude::new(g, v).unwrap().normalized().unwrap();
        let p = shg_pump(&a).unwrap();
        let nz: Vec<(usize, f64)> =
            p.values.iter().enumerate().filter(|(_, v)| v.norm() > 1e-12).map(|(i, v)| (i, v.norm())).collect();
        assert_eq!(nz.iter().map(|x| x.0).collect::<Vec<_>>(), vec![120, 128, 136]);
        assert!((nz[1].1 / nz[0].1 - 2.0).abs() < 1e-12);
        assert!((nz[2].1 / nz[0].1 - 1.0).abs() < 1e-12);
        let w = |i: usize| p.grid.omega(i);
        assert!((w(128) - 2.0 * g.center).abs() < 1e-12);
        assert!((w(136) - w(128) - 2.0 * 4.0 * g.step).abs() < 1e-12);
    }

    #[test]
    fn shg_of_chirped_gaussian_matches_closed_form() {
        // A(Δ) = e^{−aΔ²}, a = 1/4σ² − iβ  ⇒  ∫A(x)A(Δ−x)dx = √(π/2a)·e^{−aΔ²/2}.
        let g = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 256).unwrap();
        let sigma = sigma_from_duration(40.0);
        for &gdd in &[0.0, 400.0, -900.0] {
            let a = SpectralAmplitude::gaussian(g, g.center, sigma, gdd).unwrap();
            let p = shg_pump(&a).unwrap();
            let coef = C64::new(1.0 / (4.0 * sigma * sigma), -gdd / 2.0);
            let pref = (C64::new(std::f64::consts::PI, 0.0) / (coef * 2.0)).sqrt();
            let raw: Vec<C64> = p
                .grid
                .omegas()
                .iter()
                .map(|&w| {
                    let d = w - 2.0 * g.center;
                    pref * (-coef * d * d / 2.0).exp()
                })
                .collect();
            let oracle = SpectralAmplitude::new(p.grid, raw).unwrap().normalized().unwrap();
            let err = p.values.iter().zip(&oracle.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-8 * oracle.max_abs(), "gdd {gdd}: {err}");
            // SH intensity rms is √2σ, well under twice the input bandwidth.
            let var: f64 = p
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| v.norm_sqr() * (p.grid.omega(i) - 2.0 * g.center).powi(2))
                .sum::<f64>()
                * p.grid.step;
            assert!((var.sqrt() / sigma - 2f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn shg_global_phase() {
        let g = master_grid();
        let a = SpectralAmplitude::gaussian(g, g.center, 0.02, 300.0).unwrap();
        let theta = 0.7;
        let rot = SpectralAmplitude::new(g, a.values.iter().map(|v| v * C64::from_polar(1.0, theta)).collect()).unwrap();
        let p = shg_pump(&a).unwrap();
        let q = shg_pump(&rot).unwrap();
        for (x, y) in p.values.iter().zip(&q.values) {
            assert!((x * C64::from_polar(1.0, 2.0 * theta) - y).norm() < 1e-12);
        }
    }

    #[test]
    fn monochromatic_pump_gives_energy_ridge() {
        let g = master_grid();
        let pg = pump_grid_for(&g).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); pg.count];
        v[pg.count / 2] = C64::new(1.0, 0.0);
        let pump = SpectralAmplitude::new(pg, v).unwrap().normalized().unwrap();
        let crystal = CrystalConfig {
            length_mm: 1e-9,
            filter_center_nm: crate::grid::wavelength_nm(g.center),
            filter_fwhm_nm: 1e9,
            collection_fwhm_nm: 1e9,
            ..CrystalConfig::default()
        };
        let jsa = build_jsa_on(&pump, g, g, &crystal).unwrap();
        for ((r, c), val) in jsa.values.indexed_iter() {
            if r + c != g.count {
                assert!(val.norm() < 1e-10);
            } else {
                assert!(val.norm() > 0.0);
            }
        }
    }

    #[test]
    fn symmetric_configuration_is_exchange_symmetric() {
        let g = master_grid();
        let pump = shg_pump(&SpectralAmplitude::gaussian(g, g.center, 0.01, 0.0).unwrap()).unwrap();
        let crystal = CrystalConfig {
            filter_center_nm: crate::grid::wavelength_nm(g.center),
            filter_fwhm_nm: 12.0,
            collection_fwhm_nm: 12.0,
            ..CrystalConfig::default()
        };
        let jsa = build_jsa_on(&pump, g, g, &crystal).unwrap();
        let k = g.count;
        for r in 0..k {
            for c in 0..k {
                assert!((jsa.values[[r, c]].norm() - jsa.values[[c, r]].norm()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn separable_jsa_gives_pure_state() {
        let g = master_grid();
        let u = SpectralAmplitude::gaussian(g, g.center, 0.01, 200.0).unwrap();
        let v = SpectralAmplitude::gaussian(g, g.center + 0.01, 0.02, -50.0).unwrap();
        let values = Array2::from_shape_fn((g.count, g.count), |(r, c)| u.values[r] * v.values[c]);
        let jsa = JointSpectralAmplitude::new(g, g, values).unwrap().normalized().unwrap();
        let rho = trace_out_idler(&jsa).unwrap();
        assert!((rho.purity().unwrap() - 1.0).abs() < 1e-9);
        let s = jsa.schmidt_coefficients();
        assert!(s[0] >= 1.0 - 1e-8);
    }

    #[test]
    fn coverage_and_alignment_errors() {
        let g = master_grid();
        let pump = shg_pump(&SpectralAmplitude::gaussian(g, g.center, 0.01, 0.0).unwrap()).unwrap();
        let off = FrequencyGrid::new(g.center + 0.3 * g.step, g.step, g.count).unwrap();
        assert!(matches!(build_jsa_on(&pump, off, g, &CrystalConfig::default()), Err(Error::GridMismatch(_))));
        let far = FrequencyGrid::new(g.center + 64.0 * g.step * 3.0, g.step, g.count).unwrap();
        assert!(matches!(build_jsa_on(&pump, far, far, &CrystalConfig::default()), Err(Error::Coverage(_))));
    }
    fn spdc_pump(g: &FrequencyGrid, fwhm_nm: f64) -> SpectralAmplitude {
        let pg = pump_grid_for(g).unwrap();
        let center_nm = crate::grid::wavelength_nm(pg.center);
        let sigma = crate::state::sigma_from_fwhm(wavelength_width_to_omega(center_nm, fwhm_nm));
        SpectralAmplitude::gaussian(pg, pg.center, sigma, 0.0).unwrap()
    }

    fn degenerate_crystal(g: &FrequencyGrid) -> CrystalConfig {
        CrystalConfig {
            gvm_pump_idler: 150.0,
            filter_center_nm: crate::grid::wavelength_nm(g.center),
            ..CrystalConfig::default()
        }
    }

    #[test]
    fn gaussian_phase_matching_approximation() {
        // sinc(x) ≈ e^{−0.193x²} turns the joint amplitude into a double Gaussian.
        let g = master_grid();
        let pump = spdc_pump(&g, 1.3);
        let crystal = degenerate_crystal(&g);
        let jsa = build_jsa_on(&pump, g, g, &crystal).unwrap();
        let factors = JsaFactors::new(&pump, &crystal).unwrap();
        let sigma_p = crate::state::sigma_from_fwhm(wavelength_width_to_omega(crate::grid::wavelength_nm(pump.grid.center), 1.3));
        let w = g.omegas();
        let oracle = Array2::from_shape_fn((g.count, g.count), |(r, c)| {
            let d = w[r] + w[c] - pump.grid.center;
            let x = factors.mismatch(&crystal, w[r], w[c]);
            let v = (-d * d / (4.0 * sigma_p * sigma_p) - 0.193 * x * x).exp()
                * factors.signal_filter(w[r])
                * factors.idler_filter(w[c]);
            C64::new(v, 0.0)
        });
        let oracle = JointSpectralAmplitude::new(g, g, oracle).unwrap().normalized().unwrap();
        let diff: f64 = jsa.values.iter().zip(oracle.values.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let reference: f64 = oracle.values.iter().map(|v| v.norm_sqr()).sum();
        let rms = (diff / reference).sqrt();
        assert!(rms < 0.02, "{rms}");
    }

    #[test]
    fn double_gaussian_width_ratio() {
        // f = exp(−a(x² + y²) − 2bxy) ⇒ |ρ| is Gaussian with diagonal exponent
        // −2(a − b²/a)x² and antidiagonal exponent −2aδ², so the width ratio is
        // √(1 − b²/a²).
        let g = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 256).unwrap();
        let w = g.omegas();
        for &(a, b) in &[(4000.0, 2000.0), (4000.0, 3400.0), (3000.0, -1500.0), (5000.0, 0.0)] {
            let f = Array2::from_shape_fn((g.count, g.count), |(r, c)| {
                let (x, y) = (w[r] - g.center, w[c] - g.center);
                C64::new((-a * (x * x + y * y) - 2.0 * b * x * y).exp(), 0.0)
            });
            let jsa = JointSpectralAmplitude::new(g, g, f).unwrap().normalized().unwrap();
            let rho = trace_out_idler(&jsa).unwrap();
            let widths = crate::analysis::widths(&rho).unwrap();
            let want = (1.0 - b * b / (a * a)).sqrt();
            let got = widths.antidiagonal / widths.diagonal;
            assert!((got / want - 1.0).abs() < 0.02, "a {a} b {b}: {got} vs {want}");
        }
    }

    #[test]
    fn purity_is_sum_of_fourth_powers_of_schmidt_coefficients() {
        let g = master_grid();
        for (fwhm, filter) in [(1.3, 10.0), (0.5, 40.0), (3.0, 3.0)] {
            let pump = spdc_pump(&g, fwhm);
            let crystal = CrystalConfig { filter_fwhm_nm: filter, ..degenerate_crystal(&g) };
            let jsa = build_jsa_on(&pump, g, g, &crystal).unwrap();
            let scale = (g.step * g.step).sqrt();
            let m = nalgebra::DMatrix::from_fn(g.count, g.count, |r, c| {
                let v = jsa.values[[r, c]] * scale;
                nalgebra::Complex::new(v.re, v.im)
            });
            let s = m.svd(false, false).singular_values;
            let oracle: f64 = s.iter().map(|v| v.powi(4)).sum();
            let purity = trace_out_idler(&jsa).unwrap().purity().unwrap();
            assert!((purity - oracle).abs() < 1e-8, "{purity} {oracle}");
            assert!(purity < 1.0);
        }
    }

    #[test]
    fn narrower_filter_raises_purity() {
        let g = master_grid();
        let pump = spdc_pump(&g, 1.3);
        let purities: Vec<f64> = [40.0, 20.0, 10.0, 5.0, 2.5]
            .iter()
            .map(|&filter| {
                let crystal = CrystalConfig { filter_fwhm_nm: filter, ..degenerate_crystal(&g) };
                trace_out_idler(&build_jsa_on(&pump, g, g, &crystal).unwrap()).unwrap().purity().unwrap()
            })
            .collect();
        assert!(purities.windows(2).all(|p| p[1] > p[0]), "{purities:?}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(16))]
        #[test]
        fn reduced_state_is_a_density_matrix(
            length in 0.2f64..3.0,
            gvm_i in 50.0f64..300.0,
            pump_nm in 0.3f64..4.0,
            filter in 2.0f64..40.0,
            collection in 5.0f64..80.0,
        ) {
            let g = FrequencyGrid::new(angular_frequency(774.0), 0.005, 64).unwrap();
            let pump = spdc_pump(&g, pump_nm);
            let crystal = CrystalConfig {
                length_mm: length,
                gvm_pump_idler: gvm_i,
                filter_fwhm_nm: filter,
                collection_fwhm_nm: collection,
                ..degenerate_crystal(&g)
            };
            let rho = trace_out_idler(&build_jsa_on(&pump, g, g, &crystal).unwrap()).unwrap();
            proptest::prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
            proptest::prop_assert!(crate::linalg::hermiticity_defect(&rho.values) < 1e-12);
            let low = rho.min_eigenvalue().unwrap();
            proptest::prop_assert!(low > -1e-10, "{}", low);
            let s = build_jsa_on(&pump, g, g, &crystal).unwrap().schmidt_coefficients();
            let purity = rho.purity().unwrap();
            proptest::prop_assert!(purity <= 1.0 + 1e-12);
            proptest::prop_assert_eq!(purity > 1.0 - 1e-8, s[0] >= 1.0 - 1e-8);
        }
    }
}

