//! Norms, energy accounting and monitors for the a-priori estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semigroup::LameParams;
use crate::spectral::{divergence, VectorField};
use crate::stepper::{nonlinear_term, Trajectory};

/// Discrete `‖u‖²_{H^k} = Σ_ξ (1 + |ξ|²)^k |û(ξ)|²`.
pub fn sobolev_norm_sq(u: &VectorField, k: u32) -> f64 {
    let g = u.grid();
    let spec = u.spectral();
    g.exec().sum(g.len(), |i| {
        let w = (1.0 + g.k_sq(i)).powi(k as i32);
        w * spec.iter().map(|c| c[i].norm_sqr()).sum::<f64>()
    })
}

/// `‖∇u‖²_{L²} = Σ_ξ |ξ|² |û(ξ)|²`.
pub fn gradient_norm_sq(u: &VectorField) -> f64 {
    let g = u.grid();
    let spec = u.spectral();
    g.exec().sum(g.len(), |i| {
        g.k_sq(i) * spec.iter().map(|c| c[i].norm_sqr()).sum::<f64>()
    })
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `½‖u‖²`
    pub energy: f64,
    /// `½‖∇u‖²`
    pub enstrophy: f64,
    pub div_l2: f64,
    pub u_max: f64,
    pub h1_sq: f64,
    pub hk_sq: Vec<f64>,
    pub picard_iters: u32,
    pub dt: f64,
}

impl DiagnosticRecord {
    pub fn measure(u: &VectorField, t: f64, hk_orders: &[u32], picard_iters: u32, dt: f64) -> Self {
        let l2 = u.l2_norm_sq();
        let grad = gradient_norm_sq(u);
        DiagnosticRecord {
            t,
            energy: 0.5 * l2,
            enstrophy: 0.5 * grad,
            div_l2: divergence(u).l2_norm(),
            u_max: u.max_magnitude(),
            h1_sq: l2 + grad,
            hk_sq: hk_orders.iter().map(|&k| sobolev_norm_sq(u, k)).collect(),
            picard_iters,
            dt,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.energy, self.enstrophy, self.div_l2, self.u_max, self.h1_sq, self.dt]
            .iter()
            .chain(self.hk_sq.iter())
            .all(|v| v.is_finite())
    }
}

/// Time series of [`DiagnosticRecord`]s with a fixed column order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub hk_orders: Vec<u32>,
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticSeries {
    pub fn new(hk_orders: Vec<u32>) -> Self {
        DiagnosticSeries {
            hk_orders,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: DiagnosticRecord) {
        self.records.push(rec);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Column `‖u‖²_{H^k}`: k = 0 and 1 come from the fixed columns.
    pub fn hk_column(&self, k: u32) -> Option<Vec<f64>> {
        match k {
            0 => Some(self.records.iter().map(|r| 2.0 * r.energy).collect()),
            1 => Some(self.records.iter().map(|r| r.h1_sq).collect()),
            _ => {
                let pos = self.hk_orders.iter().position(|&o| o == k)?;
                Some(self.records.iter().map(|r| r.hk_sq[pos]).collect())
            }
        }
    }

    pub fn csv_header(&self) -> String {
        let mut cols: Vec<String> = ["t", "energy", "enstrophy", "div_l2", "u_max", "h1_sq"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        cols.extend(self.hk_orders.iter().map(|k| format!("h{k}_sq")));
        cols.push("picard_iters".into());
        cols.push("dt".into());
        cols.join(",")
    }

    /// CSV text; floats use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.records {
            let mut fields = vec![
                format!("{:e}", r.t),
                format!("{:e}", r.energy),
                format!("{:e}", r.enstrophy),
                format!("{:e}", r.div_l2),
                format!("{:e}", r.u_max),
                format!("{:e}", r.h1_sq),
            ];
            fields.extend(r.hk_sq.iter().map(|v| format!("{v:e}")));
            fields.push(r.picard_iters.to_string());
            fields.push(format!("{:e}", r.dt));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Trapezoid rule on possibly non-uniform nodes; returns running integrals.
pub fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallEnvelope {
    pub envelope: Vec<f64>,
    pub violated: bool,
    pub first_violation_t: Option<f64>,
}

/// `‖u(t)‖²_{H¹} ≤ ‖u(0)‖²_{H¹} exp(c₁ ∫₀ᵗ ‖u‖²_∞ ds)` along the series.
pub fn gronwall_envelope(series: &DiagnosticSeries, c1: f64) -> GronwallEnvelope {
    let t = series.times();
    let umax_sq: Vec<f64> = series.records.iter().map(|r| r.u_max * r.u_max).collect();
    let integral = cumulative_trapezoid(&t, &umax_sq);
    let h0 = series.records.first().map_or(0.0, |r| r.h1_sq);
    let envelope: Vec<f64> = integral.iter().map(|i| h0 * (c1 * i).exp()).collect();
    let first_violation_t = series
        .records
        .iter()
        .zip(&envelope)
        .find(|(r, e)| r.h1_sq > **e * (1.0 + 1e-12))
        .map(|(r, _)| r.t);
    GronwallEnvelope {
        envelope,
        violated: first_violation_t.is_some(),
        first_violation_t,
    }
}

/// Smallest `c₁ ≥ 0` for which [`gronwall_envelope`] is never violated.
pub fn fit_gronwall_c1(series: &DiagnosticSeries) -> f64 {
    let t = series.times();
    let umax_sq: Vec<f64> = series.records.iter().map(|r| r.u_max * r.u_max).collect();
    let integral = cumulative_trapezoid(&t, &umax_sq);
    let h0 = match series.records.first() {
        Some(r) if r.h1_sq > 0.0 => r.h1_sq,
        _ => return 0.0,
    };
    series
        .records
        .iter()
        .zip(&integral)
        .filter(|(_, &i)| i > 0.0)
        .map(|(r, &i)| (r.h1_sq / h0).ln() / i)
        .fold(0.0, f64::max)
}

/// Largest relative residual of `‖u(t)‖² + 2μ∫₀ᵗ‖∇u‖² − ‖φ‖²` over the
/// recorded times (`‖φ‖²`-relative; absolute when `φ = 0`).
pub fn energy_identity_residual(traj: &Trajectory, mu: f64) -> f64 {
    let series = &traj.series;
    if series.is_empty() {
        return 0.0;
    }
    let t = series.times();
    let grad_sq: Vec<f64> = series.records.iter().map(|r| 2.0 * r.enstrophy).collect();
    let dissipated = cumulative_trapezoid(&t, &grad_sq);
    let e0 = 2.0 * series.records[0].energy;
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    series
        .records
        .iter()
        .zip(&dissipated)
        .map(|(r, d)| (2.0 * r.energy + 2.0 * mu * d - e0).abs() / scale)
        .fold(0.0, f64::max)
}

/// Per-interval residual of the Lamé energy budget
/// `d/dt ½‖u‖² + μ‖∇u‖² + (λ+μ)‖div u‖² + ⟨u,(u·∇)u⟩ = 0`, evaluated on
/// consecutive stored snapshots with the trapezoid rule. Returns the
/// largest residual divided by the largest dissipation rate seen.
pub fn energy_budget_residual(traj: &Trajectory, params: &LameParams) -> f64 {
    let rate = |u: &VectorField| {
        let adv = nonlinear_term(u, true);
        let power: f64 = (0..u.dim())
            .map(|a| {
                let x = u.component(a).spectral();
                let y = adv.component(a).spectral();
                x.iter().zip(y).map(|(p, q)| (p.conj() * q).re).sum::<f64>()
            })
            .sum();
        params.mu() * gradient_norm_sq(u)
            + params.penalty() * divergence(u).l2_norm().powi(2)
            + power
    };
    let snaps = &traj.snapshots;
    let rates: Vec<f64> = snaps.iter().map(|s| rate(&s.field)).collect();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 1..snaps.len() {
        let dt = snaps[i].t - snaps[i - 1].t;
        let de = 0.5 * (snaps[i].field.l2_norm_sq() - snaps[i - 1].field.l2_norm_sq());
        let res = de / dt + 0.5 * (rates[i] + rates[i - 1]);
        worst = worst.max(res.abs());
        scale = scale.max(rates[i].abs());
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Smallest `c_k ≥ 0` with `d/dt‖u‖²_{H^k} ≤ c_k ‖u‖²_∞ ‖u‖²_{H^k}` on every
/// recorded interval (forward differences, midpoint right-hand side).
pub fn hk_inequality_check(traj: &Trajectory, k: u32) -> Result<f64> {
    let series = &traj.series;
    if series.len() < 3 {
        return Err(Error::InsufficientEntries {
            needed: 3,
            got: series.len(),
        });
    }
    let hk = series.hk_column(k).ok_or_else(|| {
        Error::InvalidArgument(format!("H^{k} norm was not recorded for this trajectory"))
    })?;
    let recs = &series.records;
    let mut c: f64 = 0.0;
    for i in 1..recs.len() {
        let dt = recs[i].t - recs[i - 1].t;
        let slope = (hk[i] - hk[i - 1]) / dt;
        if slope <= 0.0 {
            continue;
        }
        let umax_sq = 0.5 * (recs[i].u_max.powi(2) + recs[i - 1].u_max.powi(2));
        let rhs = umax_sq * 0.5 * (hk[i] + hk[i - 1]);
        if rhs > 0.0 {
            c = c.max(slope / rhs);
        } else {
            c = f64::INFINITY;
        }
    }
    Ok(c)
}
