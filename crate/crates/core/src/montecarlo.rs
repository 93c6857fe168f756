//! Monte Carlo simulation of the open chain on the one-particle matrix
//! `G_{ji} = Tr(c_i† c_j ρ)`. Sites run from `0` to `L` (one hopping edge
//! between consecutive sites), with injection/extraction at both ends.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutations::Cycle;

/// How each trajectory starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `G = diag(n*)`, the exact steady mean profile.
    #[default]
    Profile,
    /// Empty chain.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QssepConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "D")]
    pub d: f64,
    pub alpha0: f64,
    pub beta0: f64,
    #[serde(rename = "alphaL")]
    pub alpha_l: f64,
    #[serde(rename = "betaL")]
    pub beta_l: f64,
    pub dt: f64,
    pub t_max: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Fraction of each trajectory discarded before sampling.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    /// Time between recorded snapshots in the sampling window.
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default)]
    pub init: InitialState,
}

fn default_burn_in() -> f64 {
    0.5
}

fn default_sample_interval() -> f64 {
    0.1
}

impl Default for QssepConfig {
    fn default() -> Self {
        QssepConfig {
            l: 10,
            d: 1.0,
            alpha0: 1.0,
            beta0: 0.0,
            alpha_l: 0.0,
            beta_l: 1.0,
            dt: 1e-3,
            t_max: 50.0,
            n_traj: 10_000,
            seed: 1,
            burn_in: default_burn_in(),
            sample_interval: default_sample_interval(),
            init: InitialState::Profile,
        }
    }
}

impl QssepConfig {
    /// Checks ranges; returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.l < 2 {
            return bad(format!("L = {} must be at least 2", self.l));
        }
        let rates = [self.alpha0, self.beta0, self.alpha_l, self.beta_l, self.d];
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return bad("rates and D must be finite and non-negative".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_max > 0.0) {
            return bad("dt and t_max must be positive".into());
        }
        if self.n_traj == 0 {
            return bad("n_traj must be positive".into());
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return bad(format!("burn_in = {} must lie in [0, 1)", self.burn_in));
        }
        if !(self.sample_interval > 0.0) {
            return bad("sample_interval must be positive".into());
        }
        if self.sample_steps() == 0 {
            return bad("sampling window contains no snapshot".into());
        }
        let mut warnings = Vec::new();
        let fastest = rates.iter().cloned().fold(0.0, f64::max);
        if self.dt * fastest > 0.1 {
            warnings.push(format!("dt·max(rate) = {} exceeds 0.1", self.dt * fastest));
        }
        Ok(warnings)
    }

    pub fn sites(&self) -> usize {
        self.l + 1
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    fn interval_steps(&self) -> usize {
        ((self.sample_interval / self.dt).round() as usize).max(1)
    }

    fn first_sample_step(&self) -> usize {
        (self.burn_in * self.steps() as f64).ceil() as usize
    }

    /// Number of snapshots recorded per trajectory.
    pub fn sample_steps(&self) -> usize {
        let (first, last, every) = (self.first_sample_step(), self.steps(), self.interval_steps());
        if first > last {
            0
        } else {
            (last - first) / every + 1
        }
    }

    pub fn n_a(&self) -> f64 {
        self.alpha0 / (self.alpha0 + self.beta0)
    }

    pub fn n_b(&self) -> f64 {
        self.alpha_l / (self.alpha_l + self.beta_l)
    }

    pub fn a(&self) -> f64 {
        self.d / (self.alpha0 + self.beta0)
    }

    pub fn b(&self) -> f64 {
        self.d / (self.alpha_l + self.beta_l)
    }

    pub fn delta_n(&self) -> f64 {
        self.n_b() - self.n_a()
    }

    /// `n_j* = (n_a(L + b − j) + n_b(j + a)) / (L + a + b)` for `j = 0..=L`.
    pub fn steady_profile(&self) -> Vec<f64> {
        let (l, a, b) = (self.l as f64, self.a(), self.b());
        (0..=self.l)
            .map(|j| {
                let j = j as f64;
                (self.n_a() * (l + b - j) + self.n_b() * (j + a)) / (l + a + b)
            })
            .collect()
    }

    /// Scaled position `x = i / L`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.l as f64
    }

    fn closed(&self) -> bool {
        self.alpha0 == 0.0 && self.beta0 == 0.0 && self.alpha_l == 0.0 && self.beta_l == 0.0
    }
}

/// Hermitian one-particle matrix, row-major, real and imaginary parts stored
/// separately.
#[derive(Clone, Debug, PartialEq)]
pub struct GState {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// An edge unitary `[[c, −v̄], [v, c]]` with `c` real, stored as `(c, Re v, Im v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeUnitary {
    pub c: f64,
    pub vr: f64,
    pub vi: f64,
}

impl EdgeUnitary {
    /// `exp(−i h)` for the edge block `h = [[0, w̄], [w, 0]]`.
    pub fn new(w: Complex64) -> Self {
        let r2 = w.norm_sqr();
        // cos r and sin(r)/r; the series is exact to rounding for small r.
        let (c, sinc) = if r2 < 4e-3 {
            let c = 1.0 - r2 / 2.0 * (1.0 - r2 / 12.0 * (1.0 - r2 / 30.0 * (1.0 - r2 / 56.0 * (1.0 - r2 / 90.0))));
            let sc = 1.0 - r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0 * (1.0 - r2 / 72.0 * (1.0 - r2 / 110.0))));
            (c, sc)
        } else {
            let r = r2.sqrt();
            let (s, c) = r.sin_cos();
            (c, s / r)
        };
        // v = −i·sinc·w
        EdgeUnitary {
            c,
            vr: sinc * w.im,
            vi: -sinc * w.re,
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let c = Complex64::new(self.c, 0.0);
        let v = Complex64::new(self.vr, self.vi);
        [[c, -v.conj()], [v, c]]
    }
}

/// `exp(−i h)` for the edge block `h = [[0, w̄], [w, 0]]`.
pub fn edge_unitary(w: Complex64) -> [[Complex64; 2]; 2] {
    EdgeUnitary::new(w).matrix()
}

impl GState {
    pub fn zeros(n: usize) -> Self {
        GState {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut s = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            s.re[i * s.n + i] = d;
        }
        s
    }

    pub fn from_rows(n: usize, g: Vec<Complex64>) -> Result<Self> {
        if g.len() != n * n {
            return Err(Error::InvalidConfig(format!("expected {} entries, got {}", n * n, g.len())));
        }
        Ok(GState {
            n,
            re: g.iter().map(|z| z.re).collect(),
            im: g.iter().map(|z| z.im).collect(),
        })
    }

    pub fn initial(cfg: &QssepConfig) -> Self {
        match cfg.init {
            InitialState::Profile => Self::diagonal(&cfg.steady_profile()),
            InitialState::Empty => Self::zeros(cfg.sites()),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.n + j;
        Complex64::new(self.re[k], self.im[k])
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, z: Complex64) {
        let k = i * self.n + j;
        self.re[k] = z.re;
        self.im[k] = z.im;
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    pub fn real_parts(&self) -> &[f64] {
        &self.re
    }

    pub fn imag_parts(&self) -> &[f64] {
        &self.im
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re[i * self.n + i]).sum()
    }

    /// `max |G − G†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `G ← (G + G†)/2`.
    pub fn hermitize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.im[i * n + i] = 0.0;
            for j in i + 1..n {
                let (u, l) = (i * n + j, j * n + i);
                let r = 0.5 * (self.re[u] + self.re[l]);
                let m = 0.5 * (self.im[u] - self.im[l]);
                self.re[u] = r;
                self.re[l] = r;
                self.im[u] = m;
                self.im[l] = -m;
            }
        }
    }

    /// `G ← V G V†` with `V` acting on sites `j, j + 1`.
    pub fn conjugate_edge(&mut self, j: usize, v: [[Complex64; 2]; 2]) {
        let n = self.n;
        let k = j + 1;
        for c in 0..n {
            let (a, b) = (self.get(j, c), self.get(k, c));
            self.set(j, c, v[0][0] * a + v[0][1] * b);
            self.set(k, c, v[1][0] * a + v[1][1] * b);
        }
        for r in 0..n {
            let (a, b) = (self.get(r, j), self.get(r, k));
            self.set(r, j, a * v[0][0].conj() + b * v[0][1].conj());
            self.set(r, k, a * v[1][0].conj() + b * v[1][1].conj());
        }
    }

    /// `G ← U G U†` with `U = V_{m−1}⋯V₀` and `V_e` acting on sites `e, e + 1`,
    /// computed as `U (U G)†` with row operations only, then re-hermitized.
    pub fn conjugate_chain(&mut self, vs: &[EdgeUnitary]) {
        self.left_multiply_chain(vs);
        self.adjoint_in_place();
        self.left_multiply_chain(vs);
        self.hermitize();
    }

    fn left_multiply_chain(&mut self, vs: &[EdgeUnitary]) {
        let n = self.n;
        for (e, u) in vs.iter().enumerate() {
            let (c, p, q) = (u.c, u.vr, u.vi);
            let (re_head, re_tail) = self.re.split_at_mut((e + 1) * n);
            let (im_head, im_tail) = self.im.split_at_mut((e + 1) * n);
            let (xr, yr) = (&mut re_head[e * n..], &mut re_tail[..n]);
            let (xi, yi) = (&mut im_head[e * n..], &mut im_tail[..n]);
            for t in 0..n {
                let (ar, ai, br, bi) = (xr[t], xi[t], yr[t], yi[t]);
                // x' = c·x − v̄·y, y' = v·x + c·y
                xr[t] = c * ar - (p * br + q * bi);
                xi[t] = c * ai - (p * bi - q * br);
                yr[t] = p * ar - q * ai + c * br;
                yi[t] = p * ai + q * ar + c * bi;
            }
        }
    }

    fn adjoint_in_place(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.im[i * n + i] = -self.im[i * n + i];
            for j in i + 1..n {
                let (u, l) = (i * n + j, j * n + i);
                self.re.swap(u, l);
                let (a, b) = (self.im[u], self.im[l]);
                self.im[u] = -b;
                self.im[l] = -a;
            }
        }
    }

    /// Euler step of the boundary dissipator at site `j` with rates `(α, β)`.
    pub fn boundary_step(&mut self, j: usize, alpha: f64, beta: f64, dt: f64) {
        let n = self.n;
        let f = 1.0 - dt * (alpha + beta) / 2.0;
        for c in (0..n).filter(|&c| c != j) {
            for k in [j * n + c, c * n + j] {
                self.re[k] *= f;
                self.im[k] *= f;
            }
        }
        let d = &mut self.re[j * n + j];
        *d += dt * (alpha * (1.0 - *d) - beta * *d);
    }

    fn check_finite(&self, step: usize) -> Result<()> {
        if self.re.iter().chain(&self.im).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { step })
        }
    }
}

/// One time step: the unitary noise on every edge in sequence, then the two
/// boundary dissipators.
pub fn step<R: Rng + ?Sized>(state: &mut GState, cfg: &QssepConfig, rng: &mut R, index: usize) -> Result<()> {
    let sigma = (cfg.d * cfg.dt / 2.0).sqrt();
    let closed = cfg.closed();
    let before = if closed { state.trace() } else { 0.0 };
    let mut stack = [EdgeUnitary::default(); MAX_EDGES_ON_STACK];
    let mut heap;
    let vs: &mut [EdgeUnitary] = if cfg.l <= MAX_EDGES_ON_STACK {
        &mut stack[..cfg.l]
    } else {
        heap = vec![EdgeUnitary::default(); cfg.l];
        &mut heap
    };
    for v in vs.iter_mut() {
        let xi1: f64 = rng.sample(StandardNormal);
        let xi2: f64 = rng.sample(StandardNormal);
        *v = EdgeUnitary::new(Complex64::new(sigma * xi1, sigma * xi2));
    }
    state.conjugate_chain(vs);
    if closed {
        let after = state.trace();
        if (after - before).abs() > 1e-9 * (1.0 + before.abs()) {
            return Err(Error::Invariant(format!(
                "particle number drifted from {before} to {after} at step {index}"
            )));
        }
    } else {
        state.boundary_step(0, cfg.alpha0, cfg.beta0, cfg.dt);
        state.boundary_step(cfg.l, cfg.alpha_l, cfg.beta_l, cfg.dt);
    }
    Ok(())
}

const MAX_EDGES_ON_STACK: usize = 64;

/// Deterministic per-trajectory generator.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs one trajectory to `t_max` and returns the final state.
pub fn run_trajectory(cfg: &QssepConfig, index: usize) -> Result<GState> {
    let mut rng = trajectory_rng(cfg.seed, index);
    let mut state = GState::initial(cfg);
    for s in 1..=cfg.steps() {
        step(&mut state, cfg, &mut rng, s)?;
    }
    state.check_finite(cfg.steps())?;
    Ok(state)
}

/// Time averages of `G_{ij}` and `|G_{ij}|²` over the sampling window of one
/// trajectory.
#[derive(Clone, Debug)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub mean: Vec<Complex64>,
    pub mean_abs2: Vec<f64>,
}

/// Per-trajectory summaries of a run; trajectories are the independent units
/// for error bars.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub sites: usize,
    pub trajectories: Vec<TrajectorySummary>,
}

fn simulate_summary(cfg: &QssepConfig, index: usize) -> Result<TrajectorySummary> {
    let n = cfg.sites();
    let mut rng = trajectory_rng(cfg.seed, index);
    let mut state = GState::initial(cfg);
    let (first, every) = (cfg.first_sample_step(), cfg.interval_steps());
    let mut mean = vec![Complex64::new(0.0, 0.0); n * n];
    let mut mean_abs2 = vec![0.0; n * n];
    let mut samples = 0;
    let mut record = |state: &GState| {
        for (k, (&r, &i)) in state.real_parts().iter().zip(state.imag_parts()).enumerate() {
            mean[k] += Complex64::new(r, i);
            mean_abs2[k] += r * r + i * i;
        }
        samples += 1;
    };
    if first == 0 {
        record(&state);
    }
    for s in 1..=cfg.steps() {
        step(&mut state, cfg, &mut rng, s)?;
        if s >= first && (s - first) % every == 0 {
            state.check_finite(s)?;
            record(&state);
        }
    }
    let inv = 1.0 / samples as f64;
    mean.iter_mut().for_each(|z| *z *= inv);
    mean_abs2.iter_mut().for_each(|z| *z *= inv);
    Ok(TrajectorySummary {
        samples,
        mean,
        mean_abs2,
    })
}

/// Runs `n_traj` independent trajectories in parallel, discarding the burn-in.
pub fn run_steady(cfg: &QssepConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let trajectories = (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| simulate_summary(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        sites: cfg.sites(),
        trajectories,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl CumulantEstimate {
    /// `(value − target) / stderr`, infinite when a nonzero gap has no error bar.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = self.value - target;
        if self.stderr > 0.0 {
            gap / self.stderr
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY * gap.signum()
        }
    }
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        f64::NAN
    };
    (mean, (var / n as f64).sqrt(), n)
}

impl Ensemble {
    fn index(&self, i: usize, j: usize) -> Result<usize> {
        let max = self.sites - 1;
        if i > max || j > max {
            return Err(Error::IndexOutOfRange { index: i.max(j), max });
        }
        Ok(i * self.sites + j)
    }

    /// Mean of `G_{ii}`.
    pub fn density(&self, i: usize) -> Result<CumulantEstimate> {
        let k = self.index(i, i)?;
        let (value, stderr, n) = mean_and_stderr(self.trajectories.iter().map(|t| t.mean[k].re));
        Ok(CumulantEstimate {
            value,
            stderr,
            n_samples: n,
        })
    }

    /// `𝔼[G_{ij}G_{ji}] − 𝔼[G_{ij}]𝔼[G_{ji}]`; for `i = j` the variance of `G_{ii}`.
    /// The error bar comes from the linearized estimator over trajectories.
    pub fn pair_cumulant(&self, i: usize, j: usize) -> Result<CumulantEstimate> {
        let k = self.index(i, j)?;
        let b = self.trajectories.len() as f64;
        let m = self.trajectories.iter().map(|t| t.mean[k]).sum::<Complex64>() / b;
        let m2 = self.trajectories.iter().map(|t| t.mean_abs2[k]).sum::<f64>() / b;
        let influence = self
            .trajectories
            .iter()
            .map(move |t| t.mean_abs2[k] - 2.0 * (m.re * t.mean[k].re + m.im * t.mean[k].im));
        let (_, stderr, n) = mean_and_stderr(influence);
        Ok(CumulantEstimate {
            value: m2 - m.norm_sqr(),
            stderr,
            n_samples: n,
        })
    }
}

/// Loop cumulant at increasing chain `points` for a one- or two-point loop.
pub fn estimate_loop_cumulant(ens: &Ensemble, points: &[usize], loop_: &Cycle) -> Result<CumulantEstimate> {
    if points.len() != loop_.size() {
        return Err(Error::InvalidConfig(format!(
            "{} points for loop {loop_}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("points must be increasing".into()));
    }
    match points {
        [i] => ens.density(*i),
        [i, j] => ens.pair_cumulant(*i, *j),
        _ => Err(Error::Unsupported(format!(
            "cumulants of {}-point loops are not estimated",
            points.len()
        ))),
    }
}

/// Leading large-`L` prediction: the exact profile for one point,
/// `(Δn)² x(1 − y)/L` for two points `x ≤ y`.
pub fn predicted_loop_cumulant(cfg: &QssepConfig, points: &[usize]) -> Result<f64> {
    match points {
        [i] => cfg
            .steady_profile()
            .get(*i)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: *i, max: cfg.l }),
        [i, j] => {
            let (x, y) = (cfg.x(*i), cfg.x(*j));
            Ok(cfg.delta_n().powi(2) * x * (1.0 - y) / cfg.l as f64)
        }
        _ => Err(Error::Unsupported(format!("{}-point prediction", points.len()))),
    }
}

/// One row of a simulation-versus-theory table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub observable: String,
    pub indices: String,
    pub estimate: f64,
    pub stderr: f64,
    pub prediction: f64,
    pub z_score: f64,
}

impl Comparison {
    /// `|estimate − prediction| ≤ max(k·stderr, rel·|prediction|)`.
    pub fn within(&self, k: f64, rel: f64) -> bool {
        let gap = (self.estimate - self.prediction).abs();
        gap <= (k * self.stderr).max(rel * self.prediction.abs())
    }

    pub fn relative_error(&self) -> f64 {
        (self.estimate - self.prediction).abs() / self.prediction.abs()
    }
}

/// Density at every site, the requested pair cumulants and site variances.
pub fn compare(
    cfg: &QssepConfig,
    ens: &Ensemble,
    pairs: &[(usize, usize)],
    variances: &[usize],
) -> Result<Vec<Comparison>> {
    let two = Cycle::regular(2);
    let one = Cycle::regular(1);
    let mut rows = Vec::new();
    let mut push = |name: &str, pts: &[usize], cycle: &Cycle| -> Result<()> {
        let est = estimate_loop_cumulant(ens, pts, cycle)?;
        let prediction = predicted_loop_cumulant(cfg, pts)?;
        rows.push(Comparison {
            observable: name.to_string(),
            indices: pts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "),
            estimate: est.value,
            stderr: est.stderr,
            prediction,
            z_score: est.z_score(prediction),
        });
        Ok(())
    };
    for i in 0..cfg.sites() {
        push("density", &[i], &one)?;
    }
    for &(i, j) in pairs {
        push("pair", &[i.min(j), i.max(j)], &two)?;
    }
    for &i in variances {
        push("variance", &[i, i], &two)?;
    }
    Ok(rows)
}
