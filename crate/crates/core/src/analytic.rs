//! Closed-form hitting probabilities, Green values and drift bounds for the
//! walk-or-switch lamplighter walk on `T_q`, plus the acceleration constant of
//! the switch-walk-switch walk.
//!
//! Notation follows the usual one for this walk: `F` is the probability of ever
//! reaching a fixed neighbour, `F̄` the same without switching any lamp on the
//! way, and `ν̂₁, ν̂₂, ν̂₃` are lower bounds for the boundary probabilities that
//! enter the exact drift formula.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::check_q_p;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub q: u32,
    pub p: f64,
}

impl ModelParams {
    pub fn new(q: u32, p: f64) -> Result<Self> {
        check_q_p(q, p)?;
        Ok(Self { q, p })
    }

    fn qf(&self) -> f64 {
        self.q as f64
    }

    /// `pq + q − 2`, the denominator shared by most expressions below.
    fn switch_denominator(&self) -> f64 {
        self.p * self.qf() + self.qf() - 2.0
    }

    /// `q² − 4(q−1)(1−p)²`.
    fn discriminant(&self) -> f64 {
        let q = self.qf();
        q * q - 4.0 * (q - 1.0) * (1.0 - self.p).powi(2)
    }
}

/// Drift of the projection onto the tree, `(1−p)(q−2)/q`.
pub fn projection_drift(params: ModelParams) -> f64 {
    (1.0 - params.p) * (params.qf() - 2.0) / params.qf()
}

/// Probability of ever reaching a given neighbour: `1/(q−1)`.
pub fn hitting_f(params: ModelParams) -> f64 {
    1.0 / (params.qf() - 1.0)
}

/// Expected number of visits of the projection to the root.
pub fn green_g(params: ModelParams) -> f64 {
    let q = params.qf();
    (q - 1.0) / ((1.0 - params.p) * (q - 2.0))
}

/// Probability of reaching a given neighbour without any switch step: the
/// root below one of `F̄ = (1−p)/q + (1−p)(q−1)/q · F̄²`.
pub fn no_switch_f_bar(params: ModelParams) -> f64 {
    let q = params.qf();
    (q - params.discriminant().sqrt()) / (2.0 * (q - 1.0) * (1.0 - params.p))
}

/// `P[η_∞(o) = 0]` and `P[η_∞(o) = 1]`.
pub fn lamp_state_probs(params: ModelParams) -> (f64, f64) {
    let q = params.qf();
    let p = params.p;
    let d = params.switch_denominator();
    ((q - 2.0 + p) / d, p * (q - 1.0) / d)
}

/// `Ũ = P[T_o < ∞, X_1 ≠ o] = (1−p)/(q−1)`.
pub fn tilde_u(params: ModelParams) -> f64 {
    (1.0 - params.p) / (params.qf() - 1.0)
}

/// `G̃ = 1/(1−Ũ) = (q−1)/(q−2+p)`.
pub fn tilde_g(params: ModelParams) -> f64 {
    1.0 / (1.0 - tilde_u(params))
}

/// `Ḡ = 1/(1−(1−p)F̄)`, visits to `o` before the first switch.
pub fn g_bar(params: ModelParams) -> f64 {
    1.0 / (1.0 - (1.0 - params.p) * no_switch_f_bar(params))
}

/// `L`, expected visits to `a_1` before returning to `o`; equals `1/(q−1)`.
pub fn l_visits(params: ModelParams) -> f64 {
    let q = params.qf();
    let p = params.p;
    let ratio = (q - 1.0) / q * (1.0 - p) * hitting_f(params) + p;
    (1.0 - p) / q / (1.0 - ratio)
}

/// `Û = ((q−1)/q)(1−p)F̄ + ((1−p)/q)F`.
pub fn u_hat(params: ModelParams) -> f64 {
    let q = params.qf();
    let p = params.p;
    (q - 1.0) / q * (1.0 - p) * no_switch_f_bar(params) + (1.0 - p) / q * hitting_f(params)
}

/// `Ĝ = 1/(1−Û)`; this is the value that drives the bounds.
pub fn g_hat(params: ModelParams) -> f64 {
    1.0 / (1.0 - u_hat(params))
}

/// The alternative closed form `2(q−1)/(q−2+√D)`. It does not equal
/// `1/(1−Û)` and is kept for comparison only.
pub fn g_hat_displayed(params: ModelParams) -> f64 {
    let q = params.qf();
    2.0 * (q - 1.0) / (q - 2.0 + params.discriminant().sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NuBounds {
    pub nu1_hat: f64,
    pub nu2_hat: f64,
    pub nu3_hat: f64,
}

/// Lower bounds `ν̂₁ ≤ ν₁`, `ν̂₂ ≤ ν₂` and `ν̂₃ ≤ ν₃ = (q−1)ν₁`.
pub fn nu_bounds(params: ModelParams) -> Result<NuBounds> {
    nu_bounds_with(params, g_hat(params))
}

fn nu_bounds_with(params: ModelParams, g_hat: f64) -> Result<NuBounds> {
    let q = params.qf();
    let p = params.p;
    let d = params.switch_denominator();
    if g_hat * p >= 1.0 {
        return Err(Error::DivergentSeries(g_hat * p));
    }
    let nu1_hat = p / (q * d);
    let nu2_hat = g_hat / (1.0 - g_hat * g_hat * p * p) * (1.0 - p) * (q - 2.0) / (q * (q - 1.0));
    let f_bar = no_switch_f_bar(params);
    let nu3_hat = p * (q - 2.0 + p) / (q * d * (1.0 - f_bar) * (1.0 - (1.0 - p) * f_bar));
    Ok(NuBounds {
        nu1_hat,
        nu2_hat,
        nu3_hat,
    })
}

/// `ℓ` as a function of `ν₁`.
pub fn exact_drift_from_nu1(params: ModelParams, nu1: f64) -> Result<f64> {
    let q = params.qf();
    let max = 1.0 / (q * (q - 1.0));
    if !(0.0..=max).contains(&nu1) {
        return Err(Error::InvalidArgument(format!(
            "nu1 = {nu1} outside [0, {max}]"
        )));
    }
    Ok(drift_from_nu1_unchecked(params, nu1))
}

/// `ℓ` as a function of `ν₂`.
pub fn exact_drift_from_nu2(params: ModelParams, nu2: f64) -> Result<f64> {
    let q = params.qf();
    if !(0.0..=1.0 / q).contains(&nu2) {
        return Err(Error::InvalidArgument(format!(
            "nu2 = {nu2} outside [0, 1/q]"
        )));
    }
    Ok(drift_from_nu2_unchecked(params, nu2))
}

fn switch_gain(params: ModelParams) -> f64 {
    params.p * params.qf() / params.switch_denominator()
}

pub(crate) fn drift_from_nu1_unchecked(params: ModelParams, nu1: f64) -> f64 {
    let q = params.qf();
    projection_drift(params) * (1.0 + 2.0 * q * nu1 + switch_gain(params))
}

pub(crate) fn drift_from_nu2_unchecked(params: ModelParams, nu2: f64) -> f64 {
    let q = params.qf();
    projection_drift(params)
        * ((q + 1.0) / (q - 1.0) - 2.0 * q / (q - 1.0) * nu2 + switch_gain(params))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftBounds {
    pub ell_low: f64,
    pub ell_low2: f64,
    pub ell_up: f64,
    /// `(ℓ_up − max(ℓ_low, ℓ_low2)) / (1 − projection drift)`.
    pub rel_precision: f64,
}

pub fn drift_bounds(params: ModelParams) -> Result<DriftBounds> {
    drift_bounds_from(params, nu_bounds(params)?)
}

fn drift_bounds_from(params: ModelParams, nu: NuBounds) -> Result<DriftBounds> {
    let q = params.qf();
    let p = params.p;
    let proj = projection_drift(params);
    let ell_low = proj * (q - 2.0 + 2.0 * p * (q + 1.0)) / params.switch_denominator();
    let ell_up = drift_from_nu2_unchecked(params, nu.nu2_hat);
    let ell_low2 = drift_from_nu1_unchecked(params, nu.nu3_hat / (q - 1.0));
    let rel_precision = (ell_up - ell_low.max(ell_low2)) / (1.0 - proj);
    Ok(DriftBounds {
        ell_low,
        ell_low2,
        ell_up,
        rel_precision,
    })
}

/// `B = 4(q−1)(q−2)p(1−p)/q³` and the switch-walk-switch drift floor `((q−2)/q)(1+B)`.
pub fn sws_constants(params: ModelParams) -> (f64, f64) {
    let q = params.qf();
    let p = params.p;
    let b = 4.0 * (q - 1.0) * (q - 2.0) * p * (1.0 - p) / (q * q * q);
    (b, (q - 2.0) / q * (1.0 + b))
}

pub const G_HAT_WARNING: &str =
    "Ghat_displayed = 2(q-1)/(q-2+sqrt(D)) differs from 1/(1-Uhat); bounds use 1/(1-Uhat)";

/// Every closed-form quantity for one `(q, p)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub q: u32,
    pub p: f64,
    pub projection_drift: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "F_bar")]
    pub f_bar: f64,
    #[serde(rename = "tildeU")]
    pub tilde_u: f64,
    #[serde(rename = "tildeG")]
    pub tilde_g: f64,
    #[serde(rename = "Gbar")]
    pub g_bar: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Uhat")]
    pub u_hat: f64,
    #[serde(rename = "Ghat")]
    pub g_hat: f64,
    #[serde(rename = "Ghat_displayed")]
    pub g_hat_closed_form: f64,
    pub lamp_off: f64,
    pub lamp_on: f64,
    pub nu1_hat: f64,
    pub nu2_hat: f64,
    pub nu3_hat: f64,
    pub ell_low: f64,
    pub ell_low2: f64,
    pub ell_up: f64,
    pub rel_precision: f64,
    /// `(ℓ_up − ℓ_low)/(1 − projection drift)`, ignoring `ℓ_low2`.
    pub rel_precision_low: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub sws_floor: f64,
    pub warnings: Vec<String>,
}

pub fn bounds_report(params: ModelParams) -> Result<BoundsReport> {
    let nu = nu_bounds(params)?;
    let bounds = drift_bounds_from(params, nu)?;
    let (lamp_off, lamp_on) = lamp_state_probs(params);
    let (b, sws_floor) = sws_constants(params);
    let proj = projection_drift(params);
    let g_hat_value = g_hat(params);
    let g_hat_closed_form = g_hat_displayed(params);
    let mut warnings = Vec::new();
    if (g_hat_value - g_hat_closed_form).abs() > 1e-12 {
        warnings.push(G_HAT_WARNING.to_string());
    }
    Ok(BoundsReport {
        q: params.q,
        p: params.p,
        projection_drift: proj,
        f: hitting_f(params),
        g: green_g(params),
        f_bar: no_switch_f_bar(params),
        tilde_u: tilde_u(params),
        tilde_g: tilde_g(params),
        g_bar: g_bar(params),
        l: l_visits(params),
        u_hat: u_hat(params),
        g_hat: g_hat_value,
        g_hat_closed_form,
        lamp_off,
        lamp_on,
        nu1_hat: nu.nu1_hat,
        nu2_hat: nu.nu2_hat,
        nu3_hat: nu.nu3_hat,
        ell_low: bounds.ell_low,
        ell_low2: bounds.ell_low2,
        ell_up: bounds.ell_up,
        rel_precision: bounds.rel_precision,
        rel_precision_low: (bounds.ell_up - bounds.ell_low) / (1.0 - proj),
        b,
        sws_floor,
        warnings,
    })
}

/// Bounds computed with the displayed `Ĝ` instead of `1/(1−Û)`.
pub fn drift_bounds_displayed_g_hat(params: ModelParams) -> Result<DriftBounds> {
    let nu = nu_bounds_with(params, g_hat_displayed(params))?;
    drift_bounds_from(params, nu)
}

impl BoundsReport {
    pub const CSV_HEADER: &'static str =
        "q,p,projection_drift,ell_low,ell_low2,ell_up,rel_precision";

    /// One row in the column order of [`Self::CSV_HEADER`], six decimals.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.q,
            self.p,
            self.projection_drift,
            self.ell_low,
            self.ell_low2,
            self.ell_up,
            self.rel_precision
        )
    }
}
