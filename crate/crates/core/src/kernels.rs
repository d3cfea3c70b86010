//! Mellin–Fejér and Mellin–Jackson kernels, plus a log-Gaussian control
//! function that is not band-limited.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::sinc;
use crate::quadrature::{refine_until_stable, AxisRule, QuadratureSpec};
use crate::spectral::LogAxisFunction;

/// Environment variable naming a directory for the persisted Jackson constants.
pub const CACHE_ENV: &str = "MELLIN_SAMPLER_CACHE";
const CACHE_FILE: &str = "jackson_constants.json";

/// `F_ρ^c(x) = (ρ/2π) x^{-c} sinc²(ρ log√x / π)`, band-limited to `[-ρ, ρ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FejerKernel {
    rho: f64,
    c: f64,
}

pub fn fejer_kernel(rho: f64, c: f64) -> Result<FejerKernel> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid(format!("Fejer parameter rho must be positive, got {rho}")));
    }
    if !c.is_finite() {
        return Err(Error::invalid("c must be finite"));
    }
    Ok(FejerKernel { rho, c })
}

impl FejerKernel {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `x^c F(x)` at `x = e^u`.
    pub fn weighted_at_log(&self, u: f64) -> f64 {
        let s = sinc(self.rho * u / (2.0 * std::f64::consts::PI));
        self.rho / (2.0 * std::f64::consts::PI) * s * s
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x.ln();
        (-self.c * u).exp() * self.weighted_at_log(u)
    }
}

impl LogAxisFunction for FejerKernel {
    fn eval_log(&self, u: &[f64]) -> Complex64 {
        Complex64::new((-self.c * u[0]).exp() * self.weighted_at_log(u[0]), 0.0)
    }

    fn weighted_log(&self, u: &[f64], c: &[f64]) -> Complex64 {
        Complex64::new(((c[0] - self.c) * u[0]).exp() * self.weighted_at_log(u[0]), 0.0)
    }
}

/// `J_{α,k}(x) = C_{α,k} x^{-c} sinc^{2k}(log x / (2αkπ))`, band-limited to `[-1/α, 1/α]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonKernel {
    alpha: f64,
    k: u32,
    c: f64,
    constant: f64,
}

pub fn jackson_kernel(alpha: f64, k: u32, c: f64) -> Result<JacksonKernel> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::invalid(format!("Jackson parameter alpha must be >= 1, got {alpha}")));
    }
    if k == 0 {
        return Err(Error::invalid("Jackson order k must be positive"));
    }
    if !c.is_finite() {
        return Err(Error::invalid("c must be finite"));
    }
    let constant = jackson_constant(alpha, k)?;
    Ok(JacksonKernel { alpha, k, c, constant })
}

impl JacksonKernel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// The normalizing constant `C_{α,k}`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn weighted_at_log(&self, u: f64) -> f64 {
        let s = sinc(u / (2.0 * self.alpha * self.k as f64 * std::f64::consts::PI));
        self.constant * s.powi(2 * self.k as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x.ln();
        (-self.c * u).exp() * self.weighted_at_log(u)
    }
}

impl LogAxisFunction for JacksonKernel {
    fn eval_log(&self, u: &[f64]) -> Complex64 {
        Complex64::new((-self.c * u[0]).exp() * self.weighted_at_log(u[0]), 0.0)
    }

    fn weighted_log(&self, u: &[f64], c: &[f64]) -> Complex64 {
        Complex64::new(((c[0] - self.c) * u[0]).exp() * self.weighted_at_log(u[0]), 0.0)
    }
}

/// `x^{-c} exp(-(log x)²)`: its log-axis Fourier transform is a Gaussian, so
/// it is not band-limited to any box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGaussian {
    pub c: f64,
}

impl LogAxisFunction for LogGaussian {
    fn eval_log(&self, u: &[f64]) -> Complex64 {
        Complex64::new((-self.c * u[0] - u[0] * u[0]).exp(), 0.0)
    }

    fn weighted_log(&self, u: &[f64], c: &[f64]) -> Complex64 {
        Complex64::new(((c[0] - self.c) * u[0] - u[0] * u[0]).exp(), 0.0)
    }
}

type ConstantSlot = Arc<OnceLock<Result<f64>>>;

fn slots() -> &'static Mutex<HashMap<(u64, u32), ConstantSlot>> {
    static SLOTS: OnceLock<Mutex<HashMap<(u64, u32), ConstantSlot>>> = OnceLock::new();
    SLOTS.get_or_init(Default::default)
}

/// `C_{α,k}`, computed once per `(α, k)` and shared by all callers.
///
/// When [`CACHE_ENV`] names a directory the value is also read from and
/// written to a small JSON file there.
pub fn jackson_constant(alpha: f64, k: u32) -> Result<f64> {
    let slot = {
        let mut map = slots().lock().unwrap_or_else(|e| e.into_inner());
        map.entry((alpha.to_bits(), k)).or_default().clone()
    };
    slot.get_or_init(|| {
        let key = cache_key(alpha, k);
        if let Some(v) = disk_cache_dir().and_then(|dir| read_disk_cache(&dir).remove(&key)) {
            return Ok(v);
        }
        let value = 1.0 / jackson_mass(alpha, k)?;
        if let Some(dir) = disk_cache_dir() {
            let mut entries = read_disk_cache(&dir);
            entries.insert(key, value);
            if let Err(e) = write_disk_cache(&dir, &entries) {
                log::warn!("could not persist Jackson constant cache: {e}");
            }
        }
        Ok(value)
    })
    .clone()
}

fn cache_key(alpha: f64, k: u32) -> String {
    format!("{:016x}:{k}", alpha.to_bits())
}

fn disk_cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn read_disk_cache(dir: &std::path::Path) -> BTreeMap<String, f64> {
    std::fs::read_to_string(dir.join(CACHE_FILE))
        .ok()
        .and_then(|text| serde_json::from_str(&text).ok())
        .unwrap_or_default()
}

fn write_disk_cache(dir: &std::path::Path, entries: &BTreeMap<String, f64>) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(entries).map_err(std::io::Error::other)?;
    std::fs::write(dir.join(CACHE_FILE), text)
}

/// `∫ sinc^{2k}(u/s) du` with `s = 2αkπ`, by log-axis quadrature.
///
/// The window ends on a zero of the sinc factor, `|u| <= sV` with integer
/// `V`. Beyond it `sin^{2k}` is replaced by its mean `C(2k,k)/4^k`, and the
/// remaining oscillatory part of the tail is `O(V^{-2k-1})`.
fn jackson_mass(alpha: f64, k: u32) -> Result<f64> {
    let scale = 2.0 * alpha * k as f64 * std::f64::consts::PI;
    let periods: f64 = if k == 1 { 4000.0 } else { 400.0 };
    let half = scale * periods;
    let two_k = 2 * k as i32;

    let quad = QuadratureSpec { panel_count: 1, log_radius: half, refinement_tol: 1e-13 * scale, max_refinements: 4 };
    let out = refine_until_stable(&quad, 2 * periods as usize, |panels| {
        // symmetric integrand: integrate [0, half] and double
        let axis = AxisRule::standard(0.0, half, panels);
        let mut acc = crate::numeric::CompensatedSum::new();
        for (u, w) in axis.nodes.iter().zip(&axis.weights) {
            acc.add(w * sinc(u / scale).powi(two_k));
        }
        Ok(vec![Complex64::new(2.0 * acc.value(), 0.0)])
    })?;

    let mean = binomial(2 * k, k) / 4f64.powi(k as i32);
    let pi = std::f64::consts::PI;
    let tail = 2.0 * mean * scale * pi.powi(-two_k) * periods.powi(1 - two_k) / (two_k - 1) as f64;
    Ok(out.values[0].re + tail)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
