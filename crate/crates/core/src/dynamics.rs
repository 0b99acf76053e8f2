//! Example expanding maps and the cylinder measures they code.
//!
//! A *branch system* is a family of increasing inverse branches
//! `G_0, …, G_{p-1} : [0,1] → [0,1]` whose images tile the interval in
//! order. Composing branches along a digit word gives the cylinder of that
//! word, so the coded measure assigns `I_w` the length of
//! `G_{i_0}(G_{i_1}(…([0,1])))`. When the branch derivatives sum to one
//! pointwise, the coded measure is invariant for the underlying times-`p`
//! map — the three families built here are designed around exactly that
//! identity, and [`partition_check`] measures how well it survives
//! numerically.
//!
//! Three constructions are provided:
//!
//! * [`make_sine_branches`] — sine-perturbed affine branches with uniform
//!   expansion, whose balance constant admits the explicit positive floor
//!   `(a-1)/(1+(p-2)A/a)` from the derivative range `[a, A]`;
//! * [`make_parabolic_branches`] — a two-branch family with a neutral fixed point
//!   at the origin, whose sibling-mass ratios along the `0…0` spine decay
//!   to zero by an explicit one-dimensional recursion ([`imbalance_profile`]);
//! * [`conjugate_to_lebesgue`] — inverse branches of a smooth expanding
//!   circle map conjugated by the distribution function of its absolutely
//!   continuous invariant density, computed with a transfer-operator
//!   fixed-point iteration ([`transfer_fixed_density`]).

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::measure::CylinderMeasure;

/// Hard ceiling on `p^depth` for breakpoint recursions.
const MAX_CODED_CELLS: u64 = 1 << 22;

/// Smooth uniformly expanding degree-`p` circle map
/// `f(x) = p·x + ε·sin(2πx)/(2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpandingMap {
    p: u32,
    epsilon: f64,
}

impl ExpandingMap {
    /// Requires `p ≥ 2` and `0 ≤ ε < p - 1` so that `f' ≥ p - ε > 1`.
    pub fn new(p: u32, epsilon: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::BaseTooSmall(p));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::ParamOutOfRange {
                what: "epsilon",
                got: format!("{epsilon}"),
                requirement: "epsilon must be finite and nonnegative",
            });
        }
        let min_derivative = p as f64 - epsilon;
        if min_derivative <= 1.0 {
            return Err(Error::NotExpanding { a: min_derivative });
        }
        Ok(ExpandingMap { p, epsilon })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The lift value `p·x + ε·sin(2πx)/(2π)` (not reduced mod 1).
    pub fn apply(&self, x: f64) -> f64 {
        self.p as f64 * x + self.epsilon * (TAU * x).sin() / TAU
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.p as f64 + self.epsilon * (TAU * x).cos()
    }

    pub fn min_derivative(&self) -> f64 {
        self.p as f64 - self.epsilon
    }

    /// The unique `y ∈ [0,1]` with `f(y) = t + j`, for `t ∈ [0,1]` and
    /// branch index `j < p`: bisection to a safe bracket, then Newton.
    pub fn branch_inverse(&self, j: u32, t: f64) -> Result<f64> {
        if j >= self.p {
            return Err(Error::DigitOutOfRange { digit: j, p: self.p });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::PointOutOfRange(format!("{t}")));
        }
        let target = t + j as f64;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if self.apply(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut y = 0.5 * (lo + hi);
        for _ in 0..4 {
            let residual = self.apply(y) - target;
            y -= residual / self.derivative(y);
            y = y.clamp(0.0, 1.0);
        }
        debug_assert!((self.apply(y) - target).abs() < 1e-12);
        Ok(y)
    }
}

/// Invariant density of an [`ExpandingMap`] sampled on a uniform grid
/// (`size + 1` nodes, the last duplicating the first by periodicity),
/// normalized to unit integral.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    size: usize,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Node values, `values[i] = ρ(i/size)`, length `size + 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation on `[0,1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let clamped = x.clamp(0.0, 1.0);
        let scaled = clamped * self.size as f64;
        let cell = (scaled.floor() as usize).min(self.size - 1);
        let frac = scaled - cell as f64;
        self.values[cell] * (1.0 - frac) + self.values[cell + 1] * frac
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid integral over `[0,1]`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values) / self.size as f64
    }
}

fn trapezoid(values: &[f64]) -> f64 {
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    inner + 0.5 * (values[0] + values[values.len() - 1])
}

/// Convergence data for the transfer-operator iteration.
#[derive(Debug, Clone)]
pub struct TransferStats {
    pub p: u32,
    pub epsilon: f64,
    pub grid: usize,
    pub iterations: u32,
    pub residual: f64,
    /// `|∫ Lρ - ∫ ρ|` across the final sweep, before renormalization; the
    /// operator preserves mass, so this shrinks with the residual.
    pub mass_defect: f64,
    pub density_min: f64,
    pub density_max: f64,
}

/// Iterate `(Lρ)(x) = Σ_j ρ(y_j)/f'(y_j)` over the preimages `y_j` of `x`
/// to the invariant density, starting from the constant function.
///
/// Preimages of all grid nodes are found once; each sweep is then linear
/// interpolation. Stops when the sup-norm step drops below `tol`.
pub fn transfer_fixed_density(
    map: &ExpandingMap,
    grid: usize,
    tol: f64,
    max_iters: u32,
) -> Result<(DensityGrid, TransferStats)> {
    if !(16..=(1 << 20)).contains(&grid) {
        return Err(Error::ParamOutOfRange {
            what: "grid size",
            got: grid.to_string(),
            requirement: "grid must be between 16 and 2^20",
        });
    }
    if !(tol > 0.0) {
        return Err(Error::NotPositive { what: "iteration tolerance" });
    }
    let p = map.p() as usize;
    let nodes = grid + 1;
    let mut pulls: Vec<(f64, f64)> = Vec::with_capacity(nodes * p);
    for i in 0..nodes {
        let x = i as f64 / grid as f64;
        for j in 0..p {
            let y = map.branch_inverse(j as u32, x)?;
            pulls.push((y, 1.0 / map.derivative(y)));
        }
    }
    let mut density = DensityGrid { size: grid, values: vec![1.0; nodes] };
    let mut residual = f64::INFINITY;
    let mut mass_defect = 0.0;
    let mut iterations = 0;
    for iter in 1..=max_iters {
        let mut next = vec![0.0f64; nodes];
        for i in 0..nodes {
            let mut acc = 0.0;
            for j in 0..p {
                let (y, w) = pulls[i * p + j];
                acc += density.eval(y) * w;
            }
            next[i] = acc;
        }
        let mass = trapezoid(&next) / grid as f64;
        mass_defect = (mass - density.integral()).abs();
        for v in &mut next {
            *v /= mass;
        }
        residual = next
            .iter()
            .zip(&density.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        density.values = next;
        iterations = iter;
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(Error::NoConvergence { residual, tol, iters: iterations });
    }
    let min = density.min_value();
    if !(min > 0.0) {
        return Err(Error::DensityVanishes { min });
    }
    let stats = TransferStats {
        p: map.p(),
        epsilon: map.epsilon(),
        grid,
        iterations,
        residual,
        mass_defect,
        density_min: min,
        density_max: density.max_value(),
    };
    Ok((density, stats))
}

/// Branch families with a common interface.
#[derive(Debug, Clone)]
enum BranchKind {
    /// `G_i(x) = (x+i)/p + δ·s_i·sin(πx)/π` with signs summing to zero.
    Sine { delta: f64, signs: Vec<f64> },
    /// `G_0 = x - x^{1+α}/2`, `G_1 = (1 + x^{1+α})/2`.
    Parabolic { alpha: f64 },
    /// `G_j = h ∘ f_j^{-1} ∘ h^{-1}` for the distribution function `h` of
    /// an invariant density.
    Conjugated { map: ExpandingMap, density: DensityGrid, cdf: Vec<f64> },
}

/// A family of increasing inverse branches tiling `[0,1]`.
#[derive(Debug, Clone)]
pub struct BranchSystem {
    p: u32,
    kind: BranchKind,
}

impl BranchSystem {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            BranchKind::Sine { .. } => "sine",
            BranchKind::Parabolic { .. } => "parabolic",
            BranchKind::Conjugated { .. } => "conjugated",
        }
    }

    /// `G_i(x)` for `x ∈ [0,1]`.
    pub fn apply(&self, i: u32, x: f64) -> Result<f64> {
        if i >= self.p {
            return Err(Error::DigitOutOfRange { digit: i, p: self.p });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutOfRange(format!("{x}")));
        }
        Ok(match &self.kind {
            BranchKind::Sine { delta, signs } => {
                (x + i as f64) / self.p as f64 + delta * signs[i as usize] * (PI * x).sin() / PI
            }
            BranchKind::Parabolic { alpha } => {
                let lift = x.powf(1.0 + alpha);
                if i == 0 {
                    x - lift / 2.0
                } else {
                    (1.0 + lift) / 2.0
                }
            }
            BranchKind::Conjugated { map, cdf, .. } => {
                let u = inverse_cdf(cdf, x);
                let y = map.branch_inverse(i, u)?;
                eval_cdf(cdf, y)
            }
        })
    }

    /// `G_i'(x)`; for conjugated branches via the chain rule on the stored
    /// density, elsewhere in closed form.
    pub fn derivative(&self, i: u32, x: f64) -> Result<f64> {
        if i >= self.p {
            return Err(Error::DigitOutOfRange { digit: i, p: self.p });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutOfRange(format!("{x}")));
        }
        Ok(match &self.kind {
            BranchKind::Sine { delta, signs } => {
                1.0 / self.p as f64 + delta * signs[i as usize] * (PI * x).cos()
            }
            BranchKind::Parabolic { alpha } => {
                let ramp = (1.0 + alpha) * x.powf(*alpha) / 2.0;
                if i == 0 {
                    1.0 - ramp
                } else {
                    ramp
                }
            }
            BranchKind::Conjugated { map, density, cdf } => {
                let u = inverse_cdf(cdf, x);
                let y = map.branch_inverse(i, u)?;
                density.eval(y) / (map.derivative(y) * density.eval(u))
            }
        })
    }
}

fn eval_cdf(cdf: &[f64], x: f64) -> f64 {
    let size = cdf.len() - 1;
    let scaled = x.clamp(0.0, 1.0) * size as f64;
    let cell = (scaled.floor() as usize).min(size - 1);
    let frac = scaled - cell as f64;
    cdf[cell] * (1.0 - frac) + cdf[cell + 1] * frac
}

fn inverse_cdf(cdf: &[f64], t: f64) -> f64 {
    let size = cdf.len() - 1;
    let t = t.clamp(0.0, 1.0);
    let idx = cdf.partition_point(|&v| v < t);
    if idx == 0 {
        return 0.0;
    }
    let hi = idx.min(size);
    let lo = hi - 1;
    let span = cdf[hi] - cdf[lo];
    let frac = if span > 0.0 { (t - cdf[lo]) / span } else { 0.0 };
    ((lo as f64 + frac) / size as f64).clamp(0.0, 1.0)
}

/// Derivative-range constants of the sine-perturbed family: forward
/// expansion lies in `[a, A]` and the balance constant of the coded measure
/// is at least `floor = (a-1)/(1 + (p-2)·A/a)`.
#[derive(Debug, Clone, Copy)]
pub struct SineConstants {
    pub a: f64,
    pub big_a: f64,
    pub floor: f64,
}

pub fn sine_constants(p: u32, delta: f64) -> SineConstants {
    let pf = p as f64;
    let a = pf / (1.0 + pf * delta);
    let big_a = pf / (1.0 - pf * delta);
    let floor = (a - 1.0) / (1.0 + (pf - 2.0) * big_a / a);
    SineConstants { a, big_a, floor }
}

/// Sine-perturbed affine branches. Signs alternate `+1, -1, …` with a
/// trailing zero when `p` is odd, so the derivative sum is exactly one and
/// the coded measure is invariant. Requires `0 ≤ δ < 1/p`.
pub fn make_sine_branches(p: u32, delta: f64) -> Result<BranchSystem> {
    if p < 2 {
        return Err(Error::BaseTooSmall(p));
    }
    if !delta.is_finite() || delta < 0.0 || delta >= 1.0 / p as f64 {
        return Err(Error::ParamOutOfRange {
            what: "delta",
            got: format!("{delta}"),
            requirement: "perturbation needs 0 <= delta < 1/p",
        });
    }
    let mut signs: Vec<f64> = (0..p).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    if p % 2 == 1 {
        signs[p as usize - 1] = 0.0;
    }
    Ok(BranchSystem { p, kind: BranchKind::Sine { delta, signs } })
}

/// Two branches with a neutral fixed point at 0: `G_0 = x - x^{1+α}/2` and
/// `G_1 = (1 + x^{1+α})/2`, for `0 < α < 1`.
pub fn make_parabolic_branches(alpha: f64) -> Result<BranchSystem> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::ParamOutOfRange {
            what: "alpha",
            got: format!("{alpha}"),
            requirement: "exponent needs 0 < alpha < 1",
        });
    }
    Ok(BranchSystem { p: 2, kind: BranchKind::Parabolic { alpha } })
}

/// Conjugate the inverse branches of `map` by the distribution function of
/// its invariant density, yielding a branch system whose coded measure has
/// uniform level-1 cells.
pub fn conjugate_to_lebesgue(map: &ExpandingMap, density: &DensityGrid) -> Result<BranchSystem> {
    let min = density.min_value();
    if !(min > 0.0) {
        return Err(Error::DensityVanishes { min });
    }
    let size = density.size();
    let values = density.values();
    let mut cdf = Vec::with_capacity(size + 1);
    let mut acc = 0.0f64;
    cdf.push(0.0);
    for i in 0..size {
        acc += 0.5 * (values[i] + values[i + 1]) / size as f64;
        cdf.push(acc);
    }
    let total = cdf[size];
    for v in &mut cdf {
        *v /= total;
    }
    cdf[size] = 1.0;
    Ok(BranchSystem {
        p: map.p(),
        kind: BranchKind::Conjugated { map: *map, density: density.clone(), cdf },
    })
}

/// Largest deviation of `Σ_i G_i'(x)` from 1 over midpoint samples — the
/// identity that makes coded measures invariant.
#[derive(Debug, Clone, Copy)]
pub struct PartitionReport {
    pub samples: usize,
    pub max_deviation: f64,
}

pub fn partition_check(system: &BranchSystem, samples: usize) -> Result<PartitionReport> {
    if samples == 0 {
        return Err(Error::NotPositive { what: "sample count" });
    }
    let mut max_deviation = 0.0f64;
    for s in 0..samples {
        let x = (s as f64 + 0.5) / samples as f64;
        let mut total = 0.0;
        for i in 0..system.p() {
            total += system.derivative(i, x)?;
        }
        max_deviation = max_deviation.max((total - 1.0).abs());
    }
    Ok(PartitionReport { samples, max_deviation })
}

/// Code the branch system to depth `depth`: cylinder `I_{i_0…i_{d-1}}` is
/// `G_{i_0}(…G_{i_{d-1}}([0,1])…)` and its coded mass is its length.
///
/// Breakpoints are built level by level. Each level keeps the single shared
/// value at every junction (the image of the previous branch's right
/// endpoint), so masses telescope and the total is exact.
pub fn conjugacy_cylinders(system: &BranchSystem, depth: u32) -> Result<CylinderMeasure<f64>> {
    if depth == 0 {
        return Err(Error::NotPositive { what: "coding depth" });
    }
    let p = system.p();
    let mut cells: u64 = 1;
    for _ in 0..depth {
        cells = cells
            .checked_mul(p as u64)
            .filter(|&c| c <= MAX_CODED_CELLS)
            .ok_or(Error::CellCountOverflow { p, depth })?;
    }
    let mut points: Vec<f64> = vec![0.0, 1.0];
    for _ in 0..depth {
        let mut next: Vec<f64> = Vec::with_capacity(p as usize * (points.len() - 1) + 1);
        for i in 0..p {
            let skip = if i == 0 { 0 } else { 1 };
            for &x in &points[skip..] {
                next.push(system.apply(i, x)?);
            }
        }
        for pair in next.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::NonMonotoneBranch { x: pair[0] });
            }
        }
        points = next;
    }
    let weights: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
    CylinderMeasure::new(p, depth, weights)
}

/// Report for the balance floor of the sine-perturbed family.
#[derive(Debug, Clone)]
pub struct SineBoundReport {
    pub p: u32,
    pub delta: f64,
    pub depth: u32,
    pub constants: SineConstants,
    pub invariance_defect: f64,
    pub c0: f64,
    /// `c0 ≥ floor` within `tol`.
    pub pass: bool,
}

/// Build the sine-perturbed system, code it to `depth`, and compare the
/// scanned balance constant against the closed-form floor.
pub fn verify_sine_bound(p: u32, delta: f64, depth: u32, tol: f64) -> Result<SineBoundReport> {
    let system = make_sine_branches(p, delta)?;
    let mu = conjugacy_cylinders(&system, depth)?;
    let profile = mu.balance_profile(depth)?;
    let constants = sine_constants(p, delta);
    let c0 = profile.c0;
    Ok(SineBoundReport {
        p,
        delta,
        depth,
        constants,
        invariance_defect: mu.invariance_defect(),
        c0,
        pass: c0 + tol >= constants.floor,
    })
}

/// One row of the spine imbalance table: the sibling mass ratio of digit 0
/// at the base word `0^{n-1}`.
#[derive(Debug, Clone, Copy)]
pub struct ImbalanceRow {
    pub n: u32,
    /// Right endpoint `z_{n-1} = G_0^{n-1}(1)` of the parent cylinder.
    pub endpoint: f64,
    /// `r_n = z^{1+α} / (2z - z^{1+α})` at `z = z_{n-1}`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ImbalanceProfile {
    pub alpha: f64,
    pub rows: Vec<ImbalanceRow>,
}

/// Closed recursion for the parabolic family's spine ratios: the cylinder
/// `I_{0^n}` is `[0, z_n]` with `z_n = G_0(z_{n-1})`, and the sibling ratio
/// needs only the endpoint. Drives home—without any cylinder tables—that
/// the balance constant of this measure degenerates to zero.
pub fn imbalance_profile(alpha: f64, n_max: u32) -> Result<ImbalanceProfile> {
    // Reuse the parameter validation in the constructor.
    let _ = make_parabolic_branches(alpha)?;
    if n_max == 0 {
        return Err(Error::NotPositive { what: "n_max" });
    }
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut z = 1.0f64; // z_0
    for n in 1..=n_max {
        let lift = z.powf(1.0 + alpha);
        let ratio = lift / (2.0 * z - lift);
        rows.push(ImbalanceRow { n, endpoint: z, ratio });
        z -= lift / 2.0;
    }
    Ok(ImbalanceProfile { alpha, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Word;

    #[test]
    fn sine_values_and_constants() {
        let system = make_sine_branches(2, 0.1).unwrap();
        let g1_half = system.apply(1, 0.5).unwrap();
        assert!((g1_half - (0.75 - 0.1 / PI)).abs() < 1e-15);
        let c = sine_constants(2, 0.1);
        assert!((c.a - 5.0 / 3.0).abs() < 1e-15);
        assert!((c.big_a - 2.5).abs() < 1e-15);
        assert!((c.floor - 2.0 / 3.0).abs() < 1e-15);
        // p = 3 leaves the last branch unperturbed.
        let system = make_sine_branches(3, 0.2).unwrap();
        assert!((system.apply(2, 0.5).unwrap() - 2.5 / 3.0).abs() < 1e-15);
        assert!(make_sine_branches(2, 0.5).is_err());
        assert!(make_sine_branches(2, -0.01).is_err());
    }

    #[test]
    fn sine_derivatives_partition_unity() {
        for (p, delta) in [(2u32, 0.1), (3, 0.15), (4, 0.2), (5, 0.05)] {
            let system = make_sine_branches(p, delta).unwrap();
            let report = partition_check(&system, 257).unwrap();
            assert!(report.max_deviation < 1e-14, "p = {p}: {}", report.max_deviation);
        }
    }

    #[test]
    fn unperturbed_sine_codes_lebesgue() {
        let system = make_sine_branches(2, 0.0).unwrap();
        let mu = conjugacy_cylinders(&system, 6).unwrap();
        for w in mu.weights() {
            assert_eq!(*w, 1.0 / 64.0);
        }
        let profile = mu.balance_profile(6).unwrap();
        assert_eq!(profile.c0, 1.0);
    }

    #[test]
    fn sine_coded_measure_is_invariant_and_balanced() {
        let report = verify_sine_bound(2, 0.1, 10, 1e-10).unwrap();
        assert!(report.invariance_defect < 1e-12, "defect {}", report.invariance_defect);
        assert!(report.pass, "c0 = {} < floor = {}", report.c0, report.constants.floor);
        assert!(report.c0 < 1.0); // genuinely perturbed away from Lebesgue
    }

    #[test]
    fn parabolic_branch_values() {
        let system = make_parabolic_branches(0.5).unwrap();
        let z2 = system.apply(0, 0.5).unwrap();
        assert!((z2 - 0.32322330470336313).abs() < 1e-15);
        assert_eq!(system.apply(0, 1.0).unwrap(), 0.5);
        assert_eq!(system.apply(1, 0.0).unwrap(), 0.5);
        assert_eq!(system.apply(1, 1.0).unwrap(), 1.0);
        let report = partition_check(&system, 400).unwrap();
        assert!(report.max_deviation < 1e-15);
        assert!(make_parabolic_branches(1.5).is_err());
        assert!(make_parabolic_branches(0.0).is_err());
    }

    #[test]
    fn imbalance_recursion_values() {
        let profile = imbalance_profile(0.5, 40).unwrap();
        assert!((profile.rows[0].ratio - 1.0).abs() < 1e-15);
        assert!((profile.rows[1].ratio - 0.5469181606780271).abs() < 1e-15);
        for pair in profile.rows.windows(2) {
            assert!(pair[1].ratio < pair[0].ratio, "not strictly decreasing at n = {}", pair[1].n);
        }
        let r10 = profile.rows[9].ratio;
        let r40 = profile.rows[39].ratio;
        assert!(r40 < r10 / 2.0, "r40 = {r40}, r10 = {r10}");
    }

    #[test]
    fn imbalance_matches_coded_cylinders() {
        // Dual route: the closed recursion against literal cylinder masses.
        let alpha = 0.5;
        let depth = 8u32;
        let system = make_parabolic_branches(alpha).unwrap();
        let mu = conjugacy_cylinders(&system, depth).unwrap();
        assert!(mu.invariance_defect() < 1e-13);
        let profile = imbalance_profile(alpha, depth).unwrap();
        for n in 1..=depth as usize {
            // Base word 0^{n-1}: sibling digit 1 over digit 0.
            let mut hi_digits = vec![0u32; n];
            hi_digits[0] = 1;
            let hi = mu.mass(&Word::new(2, hi_digits).unwrap()).unwrap();
            let lo = mu.mass(&Word::new(2, vec![0u32; n]).unwrap()).unwrap();
            let want = profile.rows[n - 1].ratio;
            assert!(
                (hi / lo - want).abs() < 1e-12,
                "n = {n}: coded {} vs recursion {want}",
                hi / lo
            );
        }
    }

    #[test]
    fn transfer_unperturbed_is_uniform() {
        let map = ExpandingMap::new(2, 0.0).unwrap();
        let (density, stats) = transfer_fixed_density(&map, 64, 1e-12, 50).unwrap();
        assert!(stats.residual <= 1e-12);
        for v in density.values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let system = conjugate_to_lebesgue(&map, &density).unwrap();
        let mu = conjugacy_cylinders(&system, 5).unwrap();
        for w in mu.weights() {
            assert!((w - 1.0 / 32.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_perturbed_density_and_conjugation() {
        let map = ExpandingMap::new(2, 0.5).unwrap();
        let (density, stats) = transfer_fixed_density(&map, 4096, 1e-9, 200).unwrap();
        assert!(stats.residual <= 1e-9);
        assert!(stats.mass_defect < 1e-8);
        assert!(density.min_value() > 0.5);
        assert!(density.max_value() < 2.0);
        assert!((density.integral() - 1.0).abs() < 1e-12);

        // Independent invariance oracle: μ(f^{-1}[a,b]) = μ([a,b]) for a few
        // intervals, integrating the density directly — no transfer operator
        // involved in this direction.
        for (a, b) in [(0.0, 0.25), (0.3, 0.7), (0.5, 1.0)] {
            let fine = 4000usize;
            let mut direct = 0.0;
            for s in 0..fine {
                let x0 = a + (b - a) * s as f64 / fine as f64;
                let x1 = a + (b - a) * (s + 1) as f64 / fine as f64;
                direct += 0.5 * (density.eval(x0) + density.eval(x1)) * (x1 - x0);
            }
            let mut pulled = 0.0;
            for j in 0..2u32 {
                let lo = map.branch_inverse(j, a).unwrap();
                let hi = map.branch_inverse(j, b).unwrap();
                for s in 0..fine {
                    let x0 = lo + (hi - lo) * s as f64 / fine as f64;
                    let x1 = lo + (hi - lo) * (s + 1) as f64 / fine as f64;
                    pulled += 0.5 * (density.eval(x0) + density.eval(x1)) * (x1 - x0);
                }
            }
            assert!(
                (direct - pulled).abs() < 1e-5,
                "interval ({a},{b}): direct {direct} vs pulled {pulled}"
            );
        }

        let system = conjugate_to_lebesgue(&map, &density).unwrap();
        let partition = partition_check(&system, 512).unwrap();
        assert!(partition.max_deviation < 1e-6, "dev = {}", partition.max_deviation);
        let mu = conjugacy_cylinders(&system, 6).unwrap();
        assert!(mu.invariance_defect() < 1e-6, "defect = {}", mu.invariance_defect());
        let balance = mu.balance_profile(6).unwrap();
        assert!(balance.c0 > 0.0);
    }

    #[test]
    fn map_validation() {
        assert!(matches!(ExpandingMap::new(2, 1.5), Err(Error::NotExpanding { .. })));
        assert!(ExpandingMap::new(1, 0.0).is_err());
        assert!(ExpandingMap::new(2, -0.1).is_err());
        let map = ExpandingMap::new(3, 0.5).unwrap();
        for j in 0..3u32 {
            for t in [0.0, 0.25, 0.8, 1.0] {
                let y = map.branch_inverse(j, t).unwrap();
                assert!((map.apply(y) - (t + j as f64)).abs() < 1e-11);
            }
        }
    }
}
