//! Conductivities and the affine Hodgkin–Huxley-type membrane model.
//!
//! The gating variable obeys `∂t w + g(V, w) = 0` with
//! `g(p, q) = a(p)(q − 1) + b(p) q`, and the ionic current is
//! `I_ion(V, w) = h1(V) + h2(V) w`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Region};

/// Which conductivity a field represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConductivityKind {
    /// `σ_i`, intracellular, healthy region.
    BIntra,
    /// `σ_e`, extracellular, healthy region.
    BExtra,
    /// `σ_d`, damaged region.
    D,
}

impl ConductivityKind {
    pub fn region(self) -> Region {
        match self {
            ConductivityKind::BIntra | ConductivityKind::BExtra => Region::B,
            ConductivityKind::D => Region::D,
        }
    }
}

/// Piecewise-constant scalar conductivity, one value per mesh cell. Only the
/// cells of the field's region are read or checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityField {
    kind: ConductivityKind,
    values: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl ConductivityField {
    pub fn new(mesh: &Mesh, kind: ConductivityKind, values: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::DimensionMismatch {
                context: "conductivity values per cell",
                expected: mesh.n_cells(),
                actual: values.len(),
            });
        }
        if !(lower > 0.0) || !(upper >= lower) || !upper.is_finite() {
            return Err(Error::config(format!(
                "{kind:?} conductivity bounds must satisfy 0 < c0 <= C0 (got {lower}, {upper})"
            )));
        }
        let region = kind.region();
        for (c, cell) in mesh.cells().iter().enumerate() {
            if cell.region == region && !(values[c] >= lower && values[c] <= upper) {
                return Err(Error::config(format!(
                    "{kind:?} conductivity {} on cell {c} outside [{lower}, {upper}]",
                    values[c]
                )));
            }
        }
        Ok(Self {
            kind,
            values,
            lower,
            upper,
        })
    }

    pub fn uniform(mesh: &Mesh, kind: ConductivityKind, value: f64) -> Result<Self> {
        Self::new(mesh, kind, vec![value; mesh.n_cells()], value, value)
    }

    /// Conductivity sampled at cell centroids; bounds taken from the samples.
    pub fn from_fn(mesh: &Mesh, kind: ConductivityKind, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..mesh.n_cells()).map(|c| f(mesh.cell_centroid(c))).collect();
        let region = kind.region();
        let (lo, hi) = mesh
            .cells()
            .iter()
            .zip(&values)
            .filter(|(cell, _)| cell.region == region)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| {
                (lo.min(v), hi.max(v))
            });
        Self::new(mesh, kind, values, lo, hi)
    }

    pub fn kind(&self) -> ConductivityKind {
        self.kind
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::config("conductivity scale factor must be positive"));
        }
        Ok(Self {
            kind: self.kind,
            values: self.values.iter().map(|v| v * k).collect(),
            lower: self.lower * k,
            upper: self.upper * k,
        })
    }
}

/// The three conductivities of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Conductivities {
    pub sigma_i: ConductivityField,
    pub sigma_e: ConductivityField,
    pub sigma_d: ConductivityField,
}

impl Conductivities {
    pub fn uniform(mesh: &Mesh, sigma_i: f64, sigma_e: f64, sigma_d: f64) -> Result<Self> {
        Ok(Self {
            sigma_i: ConductivityField::uniform(mesh, ConductivityKind::BIntra, sigma_i)?,
            sigma_e: ConductivityField::uniform(mesh, ConductivityKind::BExtra, sigma_e)?,
            sigma_d: ConductivityField::uniform(mesh, ConductivityKind::D, sigma_d)?,
        })
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Ok(Self {
            sigma_i: self.sigma_i.scaled(k)?,
            sigma_e: self.sigma_e.scaled(k)?,
            sigma_d: self.sigma_d.scaled(k)?,
        })
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declared Lipschitz constants `L_*` and bounds `M_*` of the model functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonicConstants {
    pub l_a: f64,
    pub l_b: f64,
    pub l_h1: f64,
    pub l_h2: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub m_h2: f64,
}

#[derive(Clone)]
pub struct IonicModel {
    name: String,
    a: ScalarFn,
    b: ScalarFn,
    h1: ScalarFn,
    h2: ScalarFn,
    constants: IonicConstants,
}

impl fmt::Debug for IonicModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IonicModel")
            .field("name", &self.name)
            .field("constants", &self.constants)
            .finish_non_exhaustive()
    }
}

/// Points at which model invariants are sampled.
pub fn default_probe_points() -> Vec<f64> {
    let mut p: Vec<f64> = (0..=4000).map(|i| -20.0 + 40.0 * i as f64 / 4000.0).collect();
    p.extend([-1e3, -100.0, -50.0, 50.0, 100.0, 1e3]);
    p.sort_by(f64::total_cmp);
    p
}

fn logistic(p: f64) -> f64 {
    if p >= 0.0 {
        1.0 / (1.0 + (-p).exp())
    } else {
        let e = p.exp();
        e / (1.0 + e)
    }
}

impl IonicModel {
    /// Registers a custom model. Positivity, bounds and Lipschitz constants are
    /// checked on [`default_probe_points`].
    pub fn new(
        name: impl Into<String>,
        a: ScalarFn,
        b: ScalarFn,
        h1: ScalarFn,
        h2: ScalarFn,
        constants: IonicConstants,
    ) -> Result<Self> {
        let m = Self {
            name: name.into(),
            a,
            b,
            h1,
            h2,
            constants,
        };
        let violations = m.check_invariants(&default_probe_points());
        if let Some(v) = violations.first() {
            return Err(Error::config(format!("ionic model '{}': {v}", m.name)));
        }
        Ok(m)
    }

    /// `a = ½·logistic(p)`, `b = ½·logistic(−p)`, `h1 = tanh`, `h2 = 1`.
    pub fn default_hh() -> Self {
        Self::new(
            "default",
            Arc::new(|p| 0.5 * logistic(p)),
            Arc::new(|p| 0.5 * logistic(-p)),
            Arc::new(f64::tanh),
            Arc::new(|_| 1.0),
            IonicConstants {
                l_a: 0.125,
                l_b: 0.125,
                l_h1: 1.0,
                l_h2: 0.0,
                m_a: 0.5,
                m_b: 0.5,
                m_h2: 1.0,
            },
        )
        .expect("default model satisfies its own constants")
    }

    /// `h1(p) = k p`, `h2 = 0`, default rates. Gating has no effect on the current.
    pub fn linear(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::config("linear ionic slope must be finite"));
        }
        Self::new(
            "linear",
            Arc::new(|p| 0.5 * logistic(p)),
            Arc::new(|p| 0.5 * logistic(-p)),
            Arc::new(move |p| k * p),
            Arc::new(|_| 0.0),
            IonicConstants {
                l_a: 0.125,
                l_b: 0.125,
                l_h1: k.abs(),
                l_h2: 0.0,
                m_a: 0.5,
                m_b: 0.5,
                m_h2: 0.0,
            },
        )
    }

    /// `h1(p) = clamp(p, −c, c)³`, `h2 = 1`, default rates.
    pub fn clipped_cubic(clip: f64) -> Result<Self> {
        if !(clip > 0.0) || !clip.is_finite() {
            return Err(Error::config("clipped cubic needs a positive finite clip level"));
        }
        Self::new(
            "clipped-cubic",
            Arc::new(|p| 0.5 * logistic(p)),
            Arc::new(|p| 0.5 * logistic(-p)),
            Arc::new(move |p| p.clamp(-clip, clip).powi(3)),
            Arc::new(|_| 1.0),
            IonicConstants {
                l_a: 0.125,
                l_b: 0.125,
                l_h1: 3.0 * clip * clip,
                l_h2: 0.0,
                m_a: 0.5,
                m_b: 0.5,
                m_h2: 1.0,
            },
        )
    }

    /// Zero current, zero rates: gating is frozen.
    pub fn zero() -> Self {
        Self::new(
            "zero",
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            IonicConstants {
                l_a: 0.0,
                l_b: 0.0,
                l_h1: 0.0,
                l_h2: 0.0,
                m_a: 0.0,
                m_b: 0.0,
                m_h2: 0.0,
            },
        )
        .expect("zero model is admissible")
    }

    /// Looks a built-in model up by its config name.
    pub fn by_name(name: &str, slope: Option<f64>, clip: Option<f64>) -> Result<Self> {
        match name {
            "default" | "hh" => Ok(Self::default_hh()),
            "linear" => Self::linear(slope.unwrap_or(1.0)),
            "clipped-cubic" => Self::clipped_cubic(clip.unwrap_or(1.0)),
            "zero" => Ok(Self::zero()),
            other => Err(Error::config(format!(
                "unknown ionic model '{other}' (expected default, linear, clipped-cubic or zero)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> IonicConstants {
        self.constants
    }

    pub fn a(&self, p: f64) -> f64 {
        (self.a)(p)
    }

    pub fn b(&self, p: f64) -> f64 {
        (self.b)(p)
    }

    pub fn h1(&self, p: f64) -> f64 {
        (self.h1)(p)
    }

    pub fn h2(&self, p: f64) -> f64 {
        (self.h2)(p)
    }

    /// `g(p, q) = a(p)(q − 1) + b(p) q`
    pub fn g(&self, p: f64, q: f64) -> f64 {
        self.a(p) * (q - 1.0) + self.b(p) * q
    }

    /// `h1(V) + h2(V) w`
    pub fn ionic_current(&self, v: f64, w: f64) -> f64 {
        self.h1(v) + self.h2(v) * w
    }

    /// Exact flow of `∂t w = a(V) − (a(V)+b(V)) w` over `dt` with `V` frozen.
    pub fn gating_exact_step(&self, w: f64, v: f64, dt: f64) -> f64 {
        let a = self.a(v);
        let k = a + self.b(v);
        if k <= 0.0 || dt <= 0.0 {
            return w;
        }
        let w_inf = a / k;
        // convex combination of w and w_inf; -expm1 keeps small k·dt accurate
        let theta = -(-k * dt).exp_m1();
        (1.0 - theta) * w + theta * w_inf
    }

    /// Upper bound on `‖I_ion(V1,w1) − I_ion(V2,w2)‖ / ‖V1 − V2‖` in discrete
    /// `L²(0,T)` for gating driven by piecewise-constant potentials from the
    /// same `w_in`, with currents sampled as the stepper does (`Vⁿ`, `wⁿ⁺¹`).
    pub fn composed_lipschitz_bound(&self, horizon: f64, dt: f64) -> f64 {
        let c = self.constants;
        c.l_h1 + c.l_h2 + c.m_h2 * c.l_a.max(c.l_b) * (horizon * (horizon + dt) / 2.0).sqrt()
    }

    /// Sampled check of positivity, bounds and Lipschitz constants; returns
    /// one message per violated property.
    pub fn check_invariants(&self, points: &[f64]) -> Vec<String> {
        let c = self.constants;
        let mut out = Vec::new();
        let slack = |bound: f64| bound * (1.0 + 1e-9) + 1e-12;
        let mut check_fn = |label: &str, f: &ScalarFn, lip: f64, bound: Option<f64>, nonneg: bool| {
            let vals: Vec<f64> = points.iter().map(|&p| f(p)).collect();
            if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
                out.push(format!("{label}({}) is not finite", points[i]));
                return;
            }
            if nonneg {
                if let Some(i) = vals.iter().position(|&v| v < 0.0) {
                    out.push(format!("{label}({}) = {} is negative", points[i], vals[i]));
                }
            }
            if let Some(m) = bound {
                if let Some(i) = vals.iter().position(|v| v.abs() > slack(m)) {
                    out.push(format!(
                        "|{label}({})| = {} exceeds bound {m}",
                        points[i],
                        vals[i].abs()
                    ));
                }
            }
            for i in 1..points.len() {
                let dp = points[i] - points[i - 1];
                if dp > 0.0 {
                    let q = (vals[i] - vals[i - 1]).abs() / dp;
                    if q > slack(lip) {
                        out.push(format!(
                            "{label} Lipschitz quotient {q} near p = {} exceeds declared {lip}",
                            points[i]
                        ));
                        break;
                    }
                }
            }
        };
        check_fn("a", &self.a, c.l_a, Some(c.m_a), true);
        check_fn("b", &self.b, c.l_b, Some(c.m_b), true);
        check_fn("h1", &self.h1, c.l_h1, None, false);
        check_fn("h2", &self.h2, c.l_h2, Some(c.m_h2), false);
        out
    }
}

/// Pair of piecewise-constant potential histories (one value per step)
/// driving the gating variable from a common initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzSample {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub w_in: f64,
}

/// Largest observed quotient `‖I_ion(V1,w1) − I_ion(V2,w2)‖ / ‖V1 − V2‖`
/// over the samples, norms in discrete `L²(0, N·dt)`. Samples with
/// `V1 = V2` are skipped; an empty set gives 0.
pub fn composed_lipschitz_probe(model: &IonicModel, samples: &[LipschitzSample], dt: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for (k, s) in samples.iter().enumerate() {
        if s.v1.len() != s.v2.len() {
            return Err(Error::DimensionMismatch {
                context: "Lipschitz sample histories",
                expected: s.v1.len(),
                actual: s.v2.len(),
            });
        }
        if s.v1.iter().chain(&s.v2).any(|v| !v.is_finite()) || !(0.0..=1.0).contains(&s.w_in) {
            return Err(Error::config(format!("Lipschitz sample {k} is not admissible")));
        }
        let (mut w1, mut w2) = (s.w_in, s.w_in);
        let (mut num, mut den) = (0.0, 0.0);
        for (&p1, &p2) in s.v1.iter().zip(&s.v2) {
            w1 = model.gating_exact_step(w1, p1, dt);
            w2 = model.gating_exact_step(w2, p2, dt);
            let di = model.ionic_current(p1, w1) - model.ionic_current(p2, w2);
            num += dt * di * di;
            den += dt * (p1 - p2) * (p1 - p2);
        }
        if den > 0.0 {
            best = best.max((num / den).sqrt());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(a: f64, b: f64) -> IonicModel {
        IonicModel::new(
            "const",
            Arc::new(move |_| a),
            Arc::new(move |_| b),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            IonicConstants {
                l_a: 0.0,
                l_b: 0.0,
                l_h1: 0.0,
                l_h2: 0.0,
                m_a: a,
                m_b: b,
                m_h2: 0.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        assert_eq!(IonicModel::default_hh().gating_exact_step(0.3, 1.7, 0.0), 0.3);
    }

    #[test]
    fn steady_state_is_ratio() {
        let w = rates(1.0, 1.0).gating_exact_step(0.0, 0.0, 50.0);
        assert!((w - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_decay_halves() {
        let w = rates(0.0, 2.0).gating_exact_step(1.0, 0.0, std::f64::consts::LN_2 / 2.0);
        assert!((w - 0.5).abs() < 1e-15);
    }

    #[test]
    fn frozen_gate_when_rates_vanish() {
        assert_eq!(IonicModel::zero().gating_exact_step(0.42, 3.0, 10.0), 0.42);
    }

    #[test]
    fn ionic_current_examples() {
        let lin = IonicModel::linear(1.0).unwrap();
        assert_eq!(lin.ionic_current(2.0, 0.7), 2.0);
        let only_h2 = IonicModel::new(
            "h2",
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 1.0),
            IonicConstants {
                l_a: 0.0,
                l_b: 0.0,
                l_h1: 0.0,
                l_h2: 0.0,
                m_a: 0.0,
                m_b: 0.0,
                m_h2: 1.0,
            },
        )
        .unwrap();
        assert_eq!(only_h2.ionic_current(5.0, 0.25), 0.25);
        let cubic = IonicModel::clipped_cubic(2.0).unwrap();
        assert_eq!(cubic.ionic_current(1.0, 1.0), 1.0 + 1.0);
        assert_eq!(cubic.h1(3.0), 8.0);
    }

    #[test]
    fn declared_constants_hold_for_builtins() {
        let pts = default_probe_points();
        for m in [
            IonicModel::default_hh(),
            IonicModel::zero(),
            IonicModel::linear(-2.0).unwrap(),
            IonicModel::clipped_cubic(1.5).unwrap(),
        ] {
            assert!(m.check_invariants(&pts).is_empty(), "{}", m.name());
        }
    }

    #[test]
    fn understated_constant_is_rejected() {
        let r = IonicModel::new(
            "bad",
            Arc::new(|p| 0.5 * logistic(p)),
            Arc::new(|p| 0.5 * logistic(-p)),
            Arc::new(|p| 2.0 * p),
            Arc::new(|_| 0.0),
            IonicConstants {
                l_a: 0.125,
                l_b: 0.125,
                l_h1: 1.0,
                l_h2: 0.0,
                m_a: 0.5,
                m_b: 0.5,
                m_h2: 0.0,
            },
        );
        assert!(r.is_err());
    }

    #[test]
    fn probe_examples() {
        let m = IonicModel::linear(1.0).unwrap();
        let same = LipschitzSample {
            v1: vec![1.0, 2.0],
            v2: vec![1.0, 2.0],
            w_in: 0.5,
        };
        assert_eq!(composed_lipschitz_probe(&m, &[same], 0.1).unwrap(), 0.0);
        let diff = LipschitzSample {
            v1: vec![1.0, -2.0, 0.5],
            v2: vec![0.0, 3.0, 0.25],
            w_in: 0.2,
        };
        assert!(composed_lipschitz_probe(&m, &[diff], 0.1).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn conductivity_rejects_zero() {
        let mesh = crate::mesh::build_interval_mesh(2, 2, 0.5).unwrap();
        assert!(ConductivityField::uniform(&mesh, ConductivityKind::BIntra, 0.0).is_err());
        let f = ConductivityField::from_fn(&mesh, ConductivityKind::D, |x| 1.0 + x[0]).unwrap();
        assert!(f.bounds().0 > 1.5);
    }
}
