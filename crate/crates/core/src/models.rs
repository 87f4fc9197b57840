//! The benchmark reaction-diffusion systems.
//!
//! Each model is `u_t = d_u lap(u) + f(u, v)`, `v_t = d_v lap(v) + g(u, v)`
//! (one species for Fisher). Reactions are pointwise in `(u, v)`; there is no
//! spatial coupling outside the diffusion term.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::state::State;

/// Pointwise reaction terms. `fields[s]` and `rates[s]` hold species `s` on
/// every node.
pub trait Reaction: Send + Sync + fmt::Debug {
    fn species(&self) -> usize;

    fn apply(&self, fields: &[Vec<f64>], rates: &mut [Vec<f64>]);

    /// Convenience wrapper allocating the output.
    fn rates(&self, fields: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = fields.iter().map(|f| vec![0.0; f.len()]).collect();
        self.apply(fields, &mut out);
        out
    }
}

fn apply1(fields: &[Vec<f64>], rates: &mut [Vec<f64>], f: impl Fn(f64) -> f64) {
    for (r, &u) in rates[0].iter_mut().zip(&fields[0]) {
        *r = f(u);
    }
}

fn apply2(fields: &[Vec<f64>], rates: &mut [Vec<f64>], f: impl Fn(f64, f64) -> (f64, f64)) {
    let (ru, rv) = rates.split_at_mut(1);
    for ((a, b), (&u, &v)) in ru[0]
        .iter_mut()
        .zip(rv[0].iter_mut())
        .zip(fields[0].iter().zip(&fields[1]))
    {
        (*a, *b) = f(u, v);
    }
}

/// `u (1 - u)`
#[derive(Debug, Clone, Copy, Default)]
pub struct Fisher;

impl Fisher {
    #[inline]
    pub fn rate(u: f64) -> f64 {
        u * (1.0 - u)
    }
}

impl Reaction for Fisher {
    fn species(&self) -> usize {
        1
    }
    fn apply(&self, fields: &[Vec<f64>], rates: &mut [Vec<f64>]) {
        apply1(fields, rates, Self::rate);
    }
}

/// Infectives `u`, susceptibles `v`: `(u (v - lambda), -u v)`.
#[derive(Debug, Clone, Copy)]
pub struct Epidemic {
    pub lambda: f64,
}

impl Epidemic {
    #[inline]
    pub fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        (u * (v - self.lambda), -u * v)
    }
}

impl Reaction for Epidemic {
    fn species(&self) -> usize {
        2
    }
    fn apply(&self, fields: &[Vec<f64>], rates: &mut [Vec<f64>]) {
        apply2(fields, rates, |u, v| self.rates(u, v));
    }
}

/// Gray-Scott with feed `A` and kill `B`: `(-u v^2 + A (1 - u), u v^2 - B v)`.
#[derive(Debug, Clone, Copy)]
pub struct GrayScott {
    pub feed: f64,
    pub kill: f64,
}

impl GrayScott {
    /// Rescaled parameters `A = eps a`, `B = eps^(1/3) b`.
    pub fn from_scaled(a: f64, b: f64, eps: f64) -> Self {
        Self {
            feed: eps * a,
            kill: eps.powf(1.0 / 3.0) * b,
        }
    }

    #[inline]
    pub fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        let uvv = u * v * v;
        (-uvv + self.feed * (1.0 - u), uvv - self.kill * v)
    }
}

impl Reaction for GrayScott {
    fn species(&self) -> usize {
        2
    }
    fn apply(&self, fields: &[Vec<f64>], rates: &mut [Vec<f64>]) {
        apply2(fields, rates, |u, v| self.rates(u, v));
    }
}

/// Cubic autocatalysis `m U + V -> (m+1) U`: `(v F(u), -v F(u))` with
/// `F(u) = max(u, 0)^m`.
#[derive(Debug, Clone, Copy)]
pub struct Autocatalysis {
    pub m: i32,
}

impl Autocatalysis {
    #[inline]
    pub fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        let r = v * u.max(0.0).powi(self.m);
        (r, -r)
    }
}

impl Reaction for Autocatalysis {
    fn species(&self) -> usize {
        2
    }
    fn apply(&self, fields: &[Vec<f64>], rates: &mut [Vec<f64>]) {
        apply2(fields, rates, |u, v| self.rates(u, v));
    }
}

/// FitzHugh-Nagumo type activator-inhibitor:
/// `(u - u^3 - v, delta (u - a1 v - a0))`.
#[derive(Debug, Clone, Copy)]
pub struct Labyrinthine {
    pub a0: f64,
    pub a1: f64,
    pub delta: f64,
}

impl Labyrinthine {
    #[inline]
    pub fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        (u - u * u * u - v, self.delta * (u - self.a1 * v - self.a0))
    }
}

impl Reaction for Labyrinthine {
    fn species(&self) -> usize {
        2
    }
    fn apply(&self, fields: &[Vec<f64>], rates: &mut [Vec<f64>]) {
        apply2(fields, rates, |u, v| self.rates(u, v));
    }
}

/// Identically zero reaction; reduces any model to pure diffusion.
#[derive(Debug, Clone, Copy)]
pub struct NoReaction {
    pub species: usize,
}

impl Reaction for NoReaction {
    fn species(&self) -> usize {
        self.species
    }
    fn apply(&self, _fields: &[Vec<f64>], rates: &mut [Vec<f64>]) {
        rates.iter_mut().for_each(|r| r.fill(0.0));
    }
}

/// Uncoupled linear growth `u_s' = rate_s * u_s`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub rates: Vec<f64>,
}

impl Reaction for Linear {
    fn species(&self) -> usize {
        self.rates.len()
    }
    fn apply(&self, fields: &[Vec<f64>], out: &mut [Vec<f64>]) {
        for ((o, f), &k) in out.iter_mut().zip(fields).zip(&self.rates) {
            for (a, &b) in o.iter_mut().zip(f) {
                *a = k * b;
            }
        }
    }
}

/// Smallest real root of `a1 u^3 + (1 - a1) u - a0 = 0` on `[-10, 10]`.
pub fn cubic_root_u_minus(a0: f64, a1: f64) -> Result<f64> {
    const LO: f64 = -10.0;
    const HI: f64 = 10.0;
    if a1 == 0.0 || !a1.is_finite() || !a0.is_finite() {
        return Err(Error::InvalidParameter(format!("a1 must be finite and non-zero, got {a1}")));
    }
    let f = |u: f64| a1 * u * u * u + u * (1.0 - a1) - a0;
    let df = |u: f64| 3.0 * a1 * u * u + (1.0 - a1);

    let scan = 4000;
    let h = (HI - LO) / scan as f64;
    let mut bracket = None;
    let mut prev = f(LO);
    for k in 1..=scan {
        let x = LO + k as f64 * h;
        let cur = f(x);
        if prev == 0.0 {
            bracket = Some((x - h, x - h));
            break;
        }
        if prev.signum() != cur.signum() {
            bracket = Some((x - h, x));
            break;
        }
        prev = cur;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoRootBracketed { lo: LO, hi: HI })?;
    let flo = f(lo);
    while hi - lo > 1e-15 * (1.0 + lo.abs()) && lo != hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut root = 0.5 * (lo + hi);
    // one Newton polish; bisection already sits at the rounding floor
    let d = df(root);
    if d != 0.0 {
        let next = root - f(root) / d;
        if f(next).abs() < f(root).abs() {
            root = next;
        }
    }
    Ok(root)
}

/// The registered benchmark systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Fisher1d,
    Fisher2d,
    Epidemic,
    Gray1d,
    Gray2d,
    Auto,
    Labyrinthe2d,
}

pub const MODEL_NAMES: [&str; 7] = [
    "fisher1d",
    "fisher2d",
    "epidemic",
    "gray1d",
    "gray2d",
    "auto",
    "labyrinthe2d",
];

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Fisher1d,
        ModelKind::Fisher2d,
        ModelKind::Epidemic,
        ModelKind::Gray1d,
        ModelKind::Gray2d,
        ModelKind::Auto,
        ModelKind::Labyrinthe2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fisher1d => "fisher1d",
            ModelKind::Fisher2d => "fisher2d",
            ModelKind::Epidemic => "epidemic",
            ModelKind::Gray1d => "gray1d",
            ModelKind::Gray2d => "gray2d",
            ModelKind::Auto => "auto",
            ModelKind::Labyrinthe2d => "labyrinthe2d",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn dims(self) -> usize {
        match self {
            ModelKind::Fisher2d | ModelKind::Gray2d | ModelKind::Labyrinthe2d => 2,
            _ => 1,
        }
    }

    pub fn species(self) -> usize {
        match self {
            ModelKind::Fisher1d | ModelKind::Fisher2d => 1,
            _ => 2,
        }
    }

    fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::Fisher1d => &[("delta", 1.0)],
            ModelKind::Fisher2d => &[],
            // not fixed by the literature; demonstration values only
            ModelKind::Epidemic => &[("lambda", 1.0), ("eps", 1.0)],
            ModelKind::Gray1d => &[("a", 9.0), ("b", 0.4), ("eps", 0.01)],
            ModelKind::Gray2d => &[("a", 9.0), ("b", 0.4), ("eps", 0.01), ("asym", 1.0)],
            ModelKind::Auto => &[("m", 9.0), ("eps", 0.1)],
            ModelKind::Labyrinthe2d => &[
                ("a0", -0.1),
                ("a1", 2.0),
                ("eps", 0.05),
                ("delta", 4.0),
                ("axisym", 0.0),
            ],
        }
    }

    /// `(n, half_length)` used when the caller supplies no grid.
    pub fn default_grid(self) -> (usize, f64) {
        match self {
            ModelKind::Fisher1d => (512, 150.0),
            ModelKind::Fisher2d => (256, 25.0),
            ModelKind::Epidemic => (512, 100.0),
            ModelKind::Gray1d => (512, 50.0),
            ModelKind::Gray2d => (256, 20.0),
            ModelKind::Auto => (512, 50.0),
            ModelKind::Labyrinthe2d => (128, 100.0),
        }
    }

    fn equations(self) -> &'static str {
        match self {
            ModelKind::Fisher1d => "u_t = u_xx + u(1 - u)",
            ModelKind::Fisher2d => "u_t = u_xx + u_yy + u(1 - u)",
            ModelKind::Epidemic => "u_t = u_xx + u(v - lambda),  v_t = eps v_xx - u v",
            ModelKind::Gray1d => {
                "u_t = u_xx - u v^2 + A(1 - u),  v_t = eps v_xx + u v^2 - B v,  A = eps a, B = eps^(1/3) b"
            }
            ModelKind::Gray2d => {
                "u_t = lap u - u v^2 + A(1 - u),  v_t = eps lap v + u v^2 - B v,  A = eps a, B = eps^(1/3) b"
            }
            ModelKind::Auto => "u_t = u_xx + v F(u),  v_t = eps v_xx - v F(u),  F(u) = max(u, 0)^m",
            ModelKind::Labyrinthe2d => {
                "u_t = u - u^3 - v + lap u,  v_t = delta (u - a1 v - a0) + eps lap v"
            }
        }
    }

    fn initial_condition_text(self) -> &'static str {
        match self {
            ModelKind::Fisher1d => "u = 1 / (2 cosh(delta x))",
            ModelKind::Fisher2d => "u = 0.2 exp(-0.25 (x^2 + y^2))",
            ModelKind::Epidemic => "u = 1 / (2 cosh x), v = 1",
            ModelKind::Gray1d => {
                "u = 1 - sin^100(pi (x - L) / 2L) / 2, v = sin^100(pi (x - L) / 2L) / 4"
            }
            ModelKind::Gray2d => {
                "u = 1 - exp(-r^2/20) / 2, v = exp(-r^2/20) / 4, r^2 = x^2/2 + y^2 (asym=1) or x^2 + y^2"
            }
            ModelKind::Auto => {
                "u = (1 + tanh(10 (10 - |x|))) / 2, v = 1 - (1 + tanh(10 (10 - |x|))) / 4"
            }
            ModelKind::Labyrinthe2d => {
                "u = a1 v- + a0 - 4 a1 v- e^(-0.1 (x^2 + 0.01 y^2)), v = v- - 2 v- e^(-0.1 (x^2 + 0.01 y^2))"
            }
        }
    }
}

/// Named real parameters, in a stable order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    fn req(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Everything needed to integrate one system: diffusivities, reaction and
/// defaults.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub kind: Option<ModelKind>,
    pub params: Params,
    pub diffusivities: Vec<f64>,
    pub reaction: Arc<dyn Reaction>,
    pub dims: usize,
    pub default_grid: (usize, f64),
    pub default_dt: f64,
}

impl ModelSpec {
    pub fn by_name(name: &str, overrides: &[(String, f64)]) -> Result<Self> {
        Self::builtin(ModelKind::from_name(name)?, overrides)
    }

    pub fn builtin(kind: ModelKind, overrides: &[(String, f64)]) -> Result<Self> {
        let mut params: BTreeMap<String, f64> = kind
            .default_params()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        for (k, v) in overrides {
            match params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    let known: Vec<&str> = kind.default_params().iter().map(|p| p.0).collect();
                    return Err(Error::InvalidParameter(format!(
                        "model {} has no parameter `{k}` (known: {})",
                        kind.name(),
                        if known.is_empty() { "none".to_string() } else { known.join(", ") }
                    )));
                }
            }
        }
        let params = Params(params);
        let p = |k: &str| params.req(k);
        for (k, v) in params.iter() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{k} must be finite, got {v}")));
            }
        }
        if let Some(eps) = params.get("eps") {
            if eps <= 0.0 {
                return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
            }
        }

        let mut default_dt = 0.1;
        let (diffusivities, reaction): (Vec<f64>, Arc<dyn Reaction>) = match kind {
            ModelKind::Fisher1d | ModelKind::Fisher2d => {
                if let Some(d) = params.get("delta") {
                    if d <= 0.0 {
                        return Err(Error::InvalidParameter(format!("delta must be positive, got {d}")));
                    }
                }
                (vec![1.0], Arc::new(Fisher))
            }
            ModelKind::Epidemic => (vec![1.0, p("eps")], Arc::new(Epidemic { lambda: p("lambda") })),
            ModelKind::Gray1d | ModelKind::Gray2d => (
                vec![1.0, p("eps")],
                Arc::new(GrayScott::from_scaled(p("a"), p("b"), p("eps"))),
            ),
            ModelKind::Auto => {
                let m = p("m");
                if m < 1.0 || m.fract() != 0.0 || m > i32::MAX as f64 {
                    return Err(Error::InvalidParameter(format!("m must be a positive integer, got {m}")));
                }
                if m >= 10.0 {
                    default_dt = 0.02;
                }
                (vec![1.0, p("eps")], Arc::new(Autocatalysis { m: m as i32 }))
            }
            ModelKind::Labyrinthe2d => {
                if p("a1") == 0.0 {
                    return Err(Error::InvalidParameter("a1 must be non-zero".into()));
                }
                (
                    vec![1.0, p("eps")],
                    Arc::new(Labyrinthine {
                        a0: p("a0"),
                        a1: p("a1"),
                        delta: p("delta"),
                    }),
                )
            }
        };

        Ok(Self {
            name: kind.name().to_string(),
            kind: Some(kind),
            params,
            diffusivities,
            reaction,
            dims: kind.dims(),
            default_grid: kind.default_grid(),
            default_dt,
        })
    }

    /// A model outside the registry. It has no built-in initial condition.
    pub fn custom(
        name: &str,
        diffusivities: Vec<f64>,
        reaction: Arc<dyn Reaction>,
        dims: usize,
        default_grid: (usize, f64),
    ) -> Result<Self> {
        if diffusivities.len() != reaction.species() {
            return Err(Error::InvalidParameter(format!(
                "{} diffusivities for a {}-species reaction",
                diffusivities.len(),
                reaction.species()
            )));
        }
        if let Some(d) = diffusivities.iter().find(|d| !(**d >= 0.0)) {
            return Err(Error::InvalidParameter(format!("diffusivity must be non-negative, got {d}")));
        }
        Ok(Self {
            name: name.to_string(),
            kind: None,
            params: Params::default(),
            diffusivities,
            reaction,
            dims,
            default_grid,
            default_dt: 0.1,
        })
    }

    pub fn species(&self) -> usize {
        self.diffusivities.len()
    }

    /// Same model with the reaction replaced by zero.
    pub fn without_reaction(&self) -> Self {
        Self {
            reaction: Arc::new(NoReaction {
                species: self.species(),
            }),
            ..self.clone()
        }
    }

    pub fn default_grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.default_grid.0, self.default_grid.1, self.dims)
    }

    /// Canonical initial state on `grid`.
    pub fn initial_condition(&self, grid: &GridSpec) -> Result<State> {
        let kind = self
            .kind
            .ok_or_else(|| Error::UnknownModel(format!("{} (no built-in initial condition)", self.name)))?;
        if grid.dims() != kind.dims() {
            return Err(Error::InvalidGrid(format!(
                "{} is {}D but the grid is {}D",
                kind.name(),
                kind.dims(),
                grid.dims()
            )));
        }
        let p = |k: &str| self.params.req(k);
        let fields = match kind {
            ModelKind::Fisher1d => {
                let delta = p("delta");
                vec![grid.sample(|x, _| 1.0 / (2.0 * (delta * x).cosh()))]
            }
            ModelKind::Fisher2d => vec![grid.sample(|x, y| 0.2 * (-0.25 * (x * x + y * y)).exp())],
            ModelKind::Epidemic => vec![
                grid.sample(|x, _| 1.0 / (2.0 * x.cosh())),
                vec![1.0; grid.len()],
            ],
            ModelKind::Gray1d => {
                let l = grid.axis(0).half_length;
                let bump = grid.sample(|x, _| (PI * (x - l) / (2.0 * l)).sin().powi(100));
                vec![
                    bump.iter().map(|s| 1.0 - 0.5 * s).collect(),
                    bump.iter().map(|s| 0.25 * s).collect(),
                ]
            }
            ModelKind::Gray2d => {
                let sx = if p("asym") != 0.0 { 0.5 } else { 1.0 };
                let bump = grid.sample(|x, y| (-(sx * x * x + y * y) / 20.0).exp());
                vec![
                    bump.iter().map(|s| 1.0 - 0.5 * s).collect(),
                    bump.iter().map(|s| 0.25 * s).collect(),
                ]
            }
            ModelKind::Auto => {
                let front = grid.sample(|x, _| 1.0 + (10.0 * (10.0 - x.abs())).tanh());
                vec![
                    front.iter().map(|s| 0.5 * s).collect(),
                    front.iter().map(|s| 1.0 - 0.25 * s).collect(),
                ]
            }
            ModelKind::Labyrinthe2d => {
                let (a0, a1) = (p("a0"), p("a1"));
                let u_minus = cubic_root_u_minus(a0, a1)?;
                let v_minus = (u_minus - a0) / a1;
                let sy = if p("axisym") != 0.0 { 1.0 } else { 0.01 };
                let mound = grid.sample(|x, y| (-0.1 * (x * x + sy * y * y)).exp());
                vec![
                    mound
                        .iter()
                        .map(|m| a1 * v_minus + a0 - 4.0 * a1 * v_minus * m)
                        .collect(),
                    mound.iter().map(|m| v_minus - 2.0 * v_minus * m).collect(),
                ]
            }
        };
        State::from_physical(grid, 0.0, fields)
    }
}

pub fn list_models() -> &'static [&'static str] {
    &MODEL_NAMES
}

/// Human-readable summary of a registered model.
pub fn describe(name: &str) -> Result<String> {
    let kind = ModelKind::from_name(name)?;
    let spec = ModelSpec::builtin(kind, &[])?;
    let mut out = String::new();
    out.push_str(&format!("{} ({}D, {} species)\n", kind.name(), kind.dims(), kind.species()));
    out.push_str(&format!("  equations: {}\n", kind.equations()));
    out.push_str(&format!("  initial condition: {}\n", kind.initial_condition_text()));
    let params: Vec<String> = spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    out.push_str(&format!(
        "  parameters: {}\n",
        if params.is_empty() { "none".into() } else { params.join(", ") }
    ));
    if matches!(kind, ModelKind::Gray1d | ModelKind::Gray2d) {
        let eps = spec.params.req("eps");
        let g = GrayScott::from_scaled(spec.params.req("a"), spec.params.req("b"), eps);
        out.push_str(&format!("  derived: A=eps*a={}, B=eps^(1/3)*b={}\n", g.feed, g.kill));
    }
    if kind == ModelKind::Epidemic {
        out.push_str("  note: lambda and eps defaults are arbitrary demonstration values\n");
    }
    let (n, l) = kind.default_grid();
    out.push_str(&format!(
        "  diffusivities: {:?}\n  default grid: n={n}, L={l}\n  default dt: {}\n",
        spec.diffusivities, spec.default_dt
    ));
    Ok(out)
}
