//! Cylinder measures at finite resolution.
//!
//! A [`CylinderMeasure`] assigns a weight to every depth-`N` cylinder; masses
//! of coarser cylinders are obtained by summing children, so the data is a
//! consistent tower of level vectors. On top of that tower sit the checks
//! this crate exists for:
//!
//! * invariance under the times-`p` map at the cylinder level,
//! * the balance profile — the minimum over all sibling families of the
//!   mass ratio `Σ_{j≠i} μ(I_{jw}) / μ(I_{iw})`,
//! * smoothing views `ν_n` obtained by averaging the `p^n` translates of
//!   the measure by `k/p^n`,
//! * the step ratios `ν_m / ν_{m+1}`, the density estimates `φ_n`, and the
//!   discrete approximations to `∫ φ_n dμ`.
//!
//! With the rational backend every identity here is exact; tolerances only
//! enter through the float backend.

use std::sync::OnceLock;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};
use crate::symbolic::Word;

/// Default invariance tolerance for float-backed measures (map-generated
/// weights carry roundoff; exact backends require a literal zero defect).
pub const FLOAT_INVARIANCE_TOL: f64 = 1e-9;

/// Tolerance for unit total mass in the float backend.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

/// A measure given by its weights on all `p^depth` cylinders, indexed by
/// word index (most significant digit first). Weights are nonnegative and
/// sum to one.
#[derive(Debug)]
pub struct CylinderMeasure<S: Scalar> {
    p: u32,
    depth: u32,
    weights: Vec<S>,
    /// Lazily aggregated masses for depths `0..depth`; `coarse[d]` has `p^d` entries.
    coarse: OnceLock<Vec<Vec<S>>>,
}

impl<S: Scalar> Clone for CylinderMeasure<S> {
    fn clone(&self) -> Self {
        CylinderMeasure {
            p: self.p,
            depth: self.depth,
            weights: self.weights.clone(),
            coarse: OnceLock::new(),
        }
    }
}

/// `p^depth` as a usize, or an overflow error.
fn cell_count(p: u32, depth: u32) -> Result<usize> {
    let mut cells: usize = 1;
    for _ in 0..depth {
        cells = cells
            .checked_mul(p as usize)
            .ok_or(Error::CellCountOverflow { p, depth })?;
    }
    Ok(cells)
}

impl<S: Scalar> CylinderMeasure<S> {
    pub fn new(p: u32, depth: u32, weights: Vec<S>) -> Result<Self> {
        if p < 2 {
            return Err(Error::BaseTooSmall(p));
        }
        if depth == 0 {
            return Err(Error::NotPositive { what: "measure depth" });
        }
        if depth as usize > crate::symbolic::MAX_DEPTH {
            return Err(Error::DepthTooLarge {
                depth: depth as usize,
                max: crate::symbolic::MAX_DEPTH,
            });
        }
        let cells = cell_count(p, depth)?;
        if weights.len() != cells {
            return Err(Error::WeightLength { got: weights.len(), expected: cells });
        }
        if let Some(index) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::NegativeWeight { index });
        }
        let total = S::sum_slice(&weights);
        let deviation = (total.clone() - S::one()).abs();
        let ok = if S::exact() {
            deviation.is_zero()
        } else {
            deviation.to_f64() <= FLOAT_MASS_TOL
        };
        if !ok {
            return Err(Error::MassNotOne { total: total.to_string(), tol: FLOAT_MASS_TOL });
        }
        Ok(CylinderMeasure { p, depth, weights, coarse: OnceLock::new() })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    /// Weights of the finest level, in index order.
    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn cells(&self) -> usize {
        self.weights.len()
    }

    fn coarse_levels(&self) -> &Vec<Vec<S>> {
        self.coarse.get_or_init(|| {
            let mut levels: Vec<Vec<S>> = Vec::with_capacity(self.depth as usize);
            let p = self.p as usize;
            let mut finer: &[S] = &self.weights;
            // Build from depth-1 aggregation of the finest level downward.
            let mut stack: Vec<Vec<S>> = Vec::new();
            for _ in (0..self.depth).rev() {
                let coarser: Vec<S> = finer
                    .chunks(p)
                    .map(|chunk| S::sum_slice(chunk))
                    .collect();
                stack.push(coarser);
                finer = stack.last().unwrap();
            }
            // stack holds depths depth-1, …, 0; store as coarse[0..depth].
            stack.reverse();
            levels.extend(stack);
            levels
        })
    }

    /// Masses of all depth-`d` cylinders, `0 ≤ d ≤ depth`, in index order.
    pub fn masses_at_depth(&self, d: u32) -> Result<&[S]> {
        if d > self.depth {
            return Err(Error::BelowResolution { word_depth: d as usize, depth: self.depth });
        }
        if d == self.depth {
            Ok(&self.weights)
        } else {
            Ok(&self.coarse_levels()[d as usize])
        }
    }

    fn word_index(&self, w: &Word) -> Result<usize> {
        if w.p() != self.p {
            return Err(Error::DigitOutOfRange { digit: u32::MAX, p: self.p });
        }
        if w.depth() > self.depth as usize {
            return Err(Error::BelowResolution { word_depth: w.depth(), depth: self.depth });
        }
        Ok(w.index_usize().expect("level fits memory"))
    }

    /// Mass of the cylinder coded by `w` (any depth up to the resolution).
    pub fn mass(&self, w: &Word) -> Result<S> {
        let idx = self.word_index(w)?;
        Ok(self.masses_at_depth(w.depth() as u32)?[idx].clone())
    }

    /// Maximum defect `|Σ_i μ(I_{iw}) - μ(I_w)|` over all words of depth
    /// `< depth`, with the first witness attaining it.
    pub fn check_p_invariance(&self) -> InvarianceReport<S> {
        let p = self.p as usize;
        let mut max_defect = S::zero();
        let mut witness: Option<Word> = None;
        for d in 1..self.depth {
            let here = self.masses_at_depth(d).expect("in range");
            let finer = self.masses_at_depth(d + 1).expect("in range");
            let stride = here.len();
            for (k, mass) in here.iter().enumerate() {
                let mut pulled = S::zero();
                for i in 0..p {
                    pulled = pulled + finer[i * stride + k].clone();
                }
                let defect = (pulled - mass.clone()).abs();
                if defect > max_defect {
                    max_defect = defect;
                    witness = Some(
                        Word::from_index(self.p, d as usize, &BigUint::from(k))
                            .expect("valid index"),
                    );
                }
            }
        }
        InvarianceReport { max_defect, witness, levels_checked: self.depth.saturating_sub(1) }
    }

    /// Scan all sibling families up to `max_depth` for the minimum mass
    /// ratio `Σ_{j≠i} μ(I_{jw}) / μ(I_{iw})`.
    pub fn balance_profile(&self, max_depth: u32) -> Result<BalanceProfile<S>> {
        if max_depth < 2 {
            return Err(Error::ParamOutOfRange {
                what: "max_depth",
                got: max_depth.to_string(),
                requirement: "balance scan needs depth >= 2",
            });
        }
        if max_depth > self.depth {
            return Err(Error::BelowResolution {
                word_depth: max_depth as usize,
                depth: self.depth,
            });
        }
        let p = self.p as usize;
        let mut min_finite: Option<(S, Word, u32)> = None;
        let mut per_depth: Vec<DepthMinimum<S>> = Vec::new();
        let mut degenerate: Vec<(Word, u32)> = Vec::new();
        let mut unbounded: Vec<(Word, u32)> = Vec::new();
        for n in 2..=max_depth {
            let finer = self.masses_at_depth(n)?;
            let stride = finer.len() / p;
            let mut depth_min: Option<S> = None;
            for base in 0..stride {
                let siblings: Vec<&S> = (0..p).map(|j| &finer[j * stride + base]).collect();
                let total = siblings
                    .iter()
                    .fold(S::zero(), |acc, s| acc + (*s).clone());
                for (i, s_i) in siblings.iter().enumerate() {
                    let numerator = total.clone() - (*s_i).clone();
                    if s_i.is_zero() {
                        let w = Word::from_index(self.p, (n - 1) as usize, &BigUint::from(base))
                            .expect("valid index");
                        if numerator.is_zero() {
                            degenerate.push((w, i as u32));
                        } else {
                            unbounded.push((w, i as u32));
                        }
                        continue;
                    }
                    let ratio = numerator / (*s_i).clone();
                    if depth_min.as_ref().map_or(true, |m| ratio < *m) {
                        depth_min = Some(ratio.clone());
                    }
                    if min_finite.as_ref().map_or(true, |(m, _, _)| ratio < *m) {
                        let w = Word::from_index(self.p, (n - 1) as usize, &BigUint::from(base))
                            .expect("valid index");
                        min_finite = Some((ratio, w, i as u32));
                    }
                }
            }
            per_depth.push(DepthMinimum { depth: n, min_ratio: depth_min });
        }
        // A zero-mass cylinder anywhere in scope voids a uniform positive
        // lower bound, whether it showed up as a 0/0 family or as an
        // unbounded ratio; the scan details are kept alongside.
        let zero_mass_seen = !degenerate.is_empty() || !unbounded.is_empty();
        let (c0, witness) = match (&min_finite, zero_mass_seen) {
            (_, true) => (S::zero(), min_finite.clone().map(|(_, w, i)| (w, i))),
            (Some((m, w, i)), false) => (m.clone(), Some((w.clone(), *i))),
            (None, false) => (S::zero(), None),
        };
        Ok(BalanceProfile {
            c0,
            witness,
            per_depth,
            degenerate,
            unbounded,
            max_depth,
        })
    }

    /// Invariance defect as a float, for tolerance checks.
    pub fn invariance_defect(&self) -> f64 {
        self.check_p_invariance().max_defect.to_f64()
    }

    /// Smoothing view `ν_n`: the average of the `p^n` translates of the
    /// measure by `k/p^n`. Requires invariance (exact for the rational
    /// backend, within [`FLOAT_INVARIANCE_TOL`] for floats).
    pub fn smooth_nu(&self, n: u32) -> Result<SmoothedView<'_, S>> {
        let tol = if S::exact() { 0.0 } else { FLOAT_INVARIANCE_TOL };
        self.smooth_nu_with_tol(n, tol)
    }

    /// As [`smooth_nu`](Self::smooth_nu) with an explicit defect tolerance.
    pub fn smooth_nu_with_tol(&self, n: u32, tol: f64) -> Result<SmoothedView<'_, S>> {
        if n >= self.depth {
            return Err(Error::SmoothingTooDeep { level: n, depth: self.depth });
        }
        let defect = self.invariance_defect();
        if defect > tol {
            return Err(Error::NotInvariant { defect, tol });
        }
        Ok(SmoothedView { base: self, level: n })
    }

    /// One factor `ν_m(I_w) / ν_{m+1}(I_w)` of the density telescoping
    /// product, computed from cylinder masses:
    /// `p · μ(I_{σ^m w}) / Σ_j μ(I_{j · σ^{m+1} w})`.
    pub fn ratio_step(&self, m: u32, w: &Word) -> Result<S> {
        let d = w.depth();
        if d < (m as usize) + 2 {
            return Err(Error::BelowResolution { word_depth: d, depth: m + 1 });
        }
        let idx = self.word_index(w)?;
        let p = self.p as usize;
        let num_depth = d - m as usize;
        let num_level = self.masses_at_depth(num_depth as u32)?;
        let numerator = num_level[idx % num_level.len()].clone();
        // Preimages of σ^{m+1} w live one level finer than σ^{m+1} w itself,
        // i.e. at the numerator's depth, with indices j·p^{d-m-1} + rest.
        let stride = num_level.len() / p;
        let rest = idx % stride;
        let mut denominator = S::zero();
        for j in 0..p {
            denominator = denominator + num_level[j * stride + rest].clone();
        }
        if denominator.is_zero() {
            let base = w.shift_by(m as usize + 1).expect("depth checked");
            return Err(Error::DegenerateCylinder { word: base.to_string() });
        }
        let p_scalar = S::from_ratio(self.p as i64, 1);
        Ok(p_scalar * numerator / denominator)
    }

    /// Cylinder estimate `φ_n(w) = p^n · μ(I_w) / μ(I_{σ^n w})` of the
    /// smoothing density `dμ/dν_n` on the cylinder of `w`.
    pub fn phi_estimate(&self, n: u32, w: &Word) -> Result<S> {
        let d = w.depth();
        if d <= n as usize {
            return Err(Error::BelowResolution { word_depth: d, depth: n });
        }
        let idx = self.word_index(w)?;
        let fine = self.masses_at_depth(d as u32)?;
        let numerator = fine[idx].clone();
        let coarse = self.masses_at_depth((d - n as usize) as u32)?;
        let denominator = coarse[idx % coarse.len()].clone();
        if denominator.is_zero() {
            let base = w.shift_by(n as usize).expect("depth checked");
            return Err(Error::DegenerateCylinder { word: base.to_string() });
        }
        let scale = S::from_ratio(self.p as i64, 1).powu(n);
        Ok(scale * numerator / denominator)
    }

    /// Check `φ_n ≤ (p/(1+C₀))^n` over every word of depth in
    /// `(n, max_depth]`, with `C₀` taken from the balance profile at
    /// `max_depth`.
    pub fn phi_bound_check(&self, n: u32, max_depth: u32) -> Result<PhiBoundReport<S>> {
        if n == 0 {
            return Err(Error::NotPositive { what: "smoothing level n" });
        }
        if max_depth <= n {
            return Err(Error::ParamOutOfRange {
                what: "max_depth",
                got: max_depth.to_string(),
                requirement: "scan depth must exceed the smoothing level",
            });
        }
        let profile = self.balance_profile(max_depth)?;
        let c0 = profile.c0.clone();
        let p_scalar = S::from_ratio(self.p as i64, 1);
        let bound = (p_scalar / (S::one() + c0.clone())).powu(n);
        let mut max_phi: Option<(S, Word)> = None;
        let mut violations = 0usize;
        let mut degenerate_count = 0usize;
        for d in (n + 1)..=max_depth {
            let fine = self.masses_at_depth(d)?;
            let coarse = self.masses_at_depth(d - n)?;
            let scale = S::from_ratio(self.p as i64, 1).powu(n);
            for (idx, w_mass) in fine.iter().enumerate() {
                let base = &coarse[idx % coarse.len()];
                if base.is_zero() {
                    degenerate_count += 1;
                    continue;
                }
                let phi = scale.clone() * w_mass.clone() / base.clone();
                if phi > bound {
                    violations += 1;
                }
                if max_phi.as_ref().map_or(true, |(m, _)| phi > *m) {
                    let w = Word::from_index(self.p, d as usize, &BigUint::from(idx))
                        .expect("valid index");
                    max_phi = Some((phi, w));
                }
            }
        }
        let (max_phi, witness) = match max_phi {
            Some((m, w)) => (m, Some(w)),
            None => (S::zero(), None),
        };
        Ok(PhiBoundReport {
            n,
            max_depth,
            c0,
            bound,
            max_phi,
            witness,
            violations,
            degenerate_count,
        })
    }

    /// Discrete approximation `Σ_{w_k} μ(I_{w_k})² / ν_n(I_{w_k})` to
    /// `∫ φ_n dμ`, over the depth-`k` partition. Nondecreasing in `k` and
    /// at least 1.
    pub fn integral_phi(&self, n: u32, k: u32) -> Result<IntegralPhi<S>> {
        if k == 0 {
            return Err(Error::NotPositive { what: "partition depth k" });
        }
        if k > self.depth {
            return Err(Error::BelowResolution { word_depth: k as usize, depth: self.depth });
        }
        if n >= self.depth {
            return Err(Error::SmoothingTooDeep { level: n, depth: self.depth });
        }
        let masses = self.masses_at_depth(k)?;
        let mut degenerate_count = 0usize;
        let value = if k > n {
            let p_pow_n = S::from_ratio(self.p as i64, 1).powu(n);
            let coarse = self.masses_at_depth(k - n)?;
            let terms: Vec<S> = masses
                .iter()
                .enumerate()
                .filter_map(|(idx, m)| {
                    let base = &coarse[idx % coarse.len()];
                    if base.is_zero() {
                        degenerate_count += 1;
                        return None;
                    }
                    // μ(w)² / (μ(σⁿw)/pⁿ)
                    Some(m.clone() * m.clone() * p_pow_n.clone() / base.clone())
                })
                .collect();
            S::sum_slice(&terms)
        } else {
            // ν_n is exactly uniform on partitions at or above its level.
            let p_pow_k = S::from_ratio(self.p as i64, 1).powu(k);
            let terms: Vec<S> = masses
                .iter()
                .map(|m| m.clone() * m.clone() * p_pow_k.clone())
                .collect();
            S::sum_slice(&terms)
        };
        Ok(IntegralPhi { n, partition_depth: k, value, degenerate_count })
    }

    /// Convert the weights to a float-backed measure (identity on floats).
    pub fn to_float(&self) -> CylinderMeasure<f64> {
        let weights: Vec<f64> = self.weights.iter().map(|w| w.to_f64()).collect();
        CylinderMeasure::new(self.p, self.depth, weights)
            .expect("float conversion of a valid measure stays valid")
    }
}

/// Result of the invariance scan.
#[derive(Debug, Clone)]
pub struct InvarianceReport<S: Scalar> {
    pub max_defect: S,
    pub witness: Option<Word>,
    pub levels_checked: u32,
}

/// Per-depth minimum of the sibling mass ratio (None when every family at
/// that depth was degenerate or unbounded).
#[derive(Debug, Clone)]
pub struct DepthMinimum<S: Scalar> {
    pub depth: u32,
    pub min_ratio: Option<S>,
}

/// Balance scan result. `c0` is positive exactly when no cylinder in scope
/// has zero mass; zero-mass families are listed in `degenerate` (0/0) and
/// `unbounded` (positive siblings over a zero denominator).
#[derive(Debug, Clone)]
pub struct BalanceProfile<S: Scalar> {
    pub c0: S,
    pub witness: Option<(Word, u32)>,
    pub per_depth: Vec<DepthMinimum<S>>,
    pub degenerate: Vec<(Word, u32)>,
    pub unbounded: Vec<(Word, u32)>,
    pub max_depth: u32,
}

/// Report for the `φ_n ≤ (p/(1+C₀))^n` sweep.
#[derive(Debug, Clone)]
pub struct PhiBoundReport<S: Scalar> {
    pub n: u32,
    pub max_depth: u32,
    pub c0: S,
    pub bound: S,
    pub max_phi: S,
    pub witness: Option<Word>,
    pub violations: usize,
    pub degenerate_count: usize,
}

/// Value of the depth-`k` approximation to `∫ φ_n dμ`.
#[derive(Debug, Clone)]
pub struct IntegralPhi<S: Scalar> {
    pub n: u32,
    pub partition_depth: u32,
    pub value: S,
    pub degenerate_count: usize,
}

/// The smoothing measure `ν_n` of a `p`-invariant base measure, as a lazy
/// view. Masses come from the closed form
/// `ν_n(I_w) = μ(I_{σ^n w}) / p^n` for words deeper than `n`, and are
/// exactly `p^{-depth}` at or above the smoothing level.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedView<'a, S: Scalar> {
    base: &'a CylinderMeasure<S>,
    level: u32,
}

impl<'a, S: Scalar> SmoothedView<'a, S> {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn base(&self) -> &'a CylinderMeasure<S> {
        self.base
    }

    pub fn mass(&self, w: &Word) -> Result<S> {
        let d = w.depth();
        if d > self.base.depth() as usize {
            return Err(Error::BelowResolution { word_depth: d, depth: self.base.depth() });
        }
        let p_pow = |e: u32| S::from_ratio(self.base.p() as i64, 1).powu(e);
        if d <= self.level as usize {
            // Averaging over p^n translates makes ν_n uniform at this scale.
            return Ok(S::one() / p_pow(d as u32));
        }
        let shifted = w.shift_by(self.level as usize).expect("depth checked");
        Ok(self.base.mass(&shifted)? / p_pow(self.level))
    }

    /// Materialize the view as a full cylinder measure at the base depth.
    pub fn materialize(&self) -> CylinderMeasure<S> {
        let base_depth = self.base.depth();
        let coarse = self
            .base
            .masses_at_depth(base_depth - self.level)
            .expect("level below depth");
        let scale = S::one() / S::from_ratio(self.base.p() as i64, 1).powu(self.level);
        let weights: Vec<S> = (0..self.base.cells())
            .map(|idx| coarse[idx % coarse.len()].clone() * scale.clone())
            .collect();
        CylinderMeasure::new(self.base.p(), base_depth, weights)
            .expect("smoothing preserves total mass")
    }

    /// Materialize directly into the float backend (avoids a rational
    /// intermediate when only trigonometric work follows).
    pub fn materialize_f64(&self) -> CylinderMeasure<f64> {
        let base_depth = self.base.depth();
        let coarse = self
            .base
            .masses_at_depth(base_depth - self.level)
            .expect("level below depth");
        let scale = 1.0 / (self.base.p() as f64).powi(self.level as i32);
        let weights: Vec<f64> = (0..self.base.cells())
            .map(|idx| coarse[idx % coarse.len()].to_f64() * scale)
            .collect();
        CylinderMeasure::new(self.base.p(), base_depth, weights)
            .expect("smoothing preserves total mass")
    }
}

/// Lebesgue at resolution `depth`: every weight `p^{-depth}`.
pub fn make_uniform<S: Scalar>(p: u32, depth: u32) -> Result<CylinderMeasure<S>> {
    let cells = cell_count(p, depth)?;
    let w = S::one() / S::from_ratio(p as i64, 1).powu(depth);
    CylinderMeasure::new(p, depth, vec![w; cells])
}

/// Product measure with digit distribution `probs` (length `p`).
pub fn make_bernoulli<S: Scalar>(p: u32, probs: &[S], depth: u32) -> Result<CylinderMeasure<S>> {
    validate_distribution(p, probs)?;
    let cells = cell_count(p, depth)?;
    let mut weights: Vec<S> = vec![S::one()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(weights.len() * p as usize);
        for w in &weights {
            for prob in probs {
                next.push(w.clone() * prob.clone());
            }
        }
        weights = next;
    }
    debug_assert_eq!(weights.len(), cells);
    CylinderMeasure::new(p, depth, weights)
}

/// Markov measure with transition rows `rows` and initial digit law
/// `initial`, which must be stationary for the rows.
pub fn make_markov<S: Scalar>(
    p: u32,
    rows: &[Vec<S>],
    initial: &[S],
    depth: u32,
) -> Result<CylinderMeasure<S>> {
    validate_distribution(p, initial)?;
    if rows.len() != p as usize {
        return Err(Error::NonStochastic(format!(
            "expected {p} transition rows, got {}",
            rows.len()
        )));
    }
    for row in rows {
        validate_distribution(p, row)?;
    }
    // Stationarity is what makes the cylinder tower invariant, so it is a
    // hard precondition, not a property report.
    let mut defect = S::zero();
    for j in 0..p as usize {
        let mut pushed = S::zero();
        for i in 0..p as usize {
            pushed = pushed + initial[i].clone() * rows[i][j].clone();
        }
        let d = (pushed - initial[j].clone()).abs();
        if d > defect {
            defect = d;
        }
    }
    let stationary_ok = if S::exact() {
        defect.is_zero()
    } else {
        defect.to_f64() <= FLOAT_MASS_TOL
    };
    if !stationary_ok {
        return Err(Error::NotStationary { defect: defect.to_f64() });
    }
    let cells = cell_count(p, depth)?;
    let mut weights: Vec<S> = initial.to_vec();
    for _ in 1..depth {
        let mut next = Vec::with_capacity(weights.len() * p as usize);
        for (idx, w) in weights.iter().enumerate() {
            let last = idx % p as usize;
            for j in 0..p as usize {
                next.push(w.clone() * rows[last][j].clone());
            }
        }
        weights = next;
    }
    debug_assert_eq!(weights.len(), cells);
    CylinderMeasure::new(p, depth, weights)
}

/// The stationary row of a stochastic matrix, solved exactly in the scalar
/// field (Gaussian elimination with partial pivoting).
pub fn markov_stationary<S: Scalar>(p: u32, rows: &[Vec<S>]) -> Result<Vec<S>> {
    if rows.len() != p as usize {
        return Err(Error::NonStochastic(format!(
            "expected {p} transition rows, got {}",
            rows.len()
        )));
    }
    for row in rows {
        validate_distribution(p, row)?;
    }
    let n = p as usize;
    // Solve (Pᵀ - I) π = 0 with Σ π = 1 replacing the last equation.
    let mut a: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = rows[j][i].clone();
                    if i == j {
                        v = v - S::one();
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut b: Vec<S> = vec![S::zero(); n];
    a[n - 1] = vec![S::one(); n];
    b[n - 1] = S::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("weights are ordered")
            })
            .expect("nonempty");
        if a[pivot][col].is_zero() {
            return Err(Error::NonStochastic(
                "transition matrix has no unique stationary row".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                a[r][c] = a[r][c].clone() - factor.clone() * a[col][c].clone();
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    let mut pi = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut rhs = b[row].clone();
        for c in (row + 1)..n {
            rhs = rhs - a[row][c].clone() * pi[c].clone();
        }
        pi[row] = rhs / a[row][row].clone();
    }
    Ok(pi)
}

fn validate_distribution<S: Scalar>(p: u32, probs: &[S]) -> Result<()> {
    if probs.len() != p as usize {
        return Err(Error::NonStochastic(format!(
            "distribution has {} entries, expected {p}",
            probs.len()
        )));
    }
    if probs.iter().any(|x| x.is_negative()) {
        return Err(Error::NonStochastic("negative probability".into()));
    }
    let total = S::sum_slice(probs);
    let dev = (total.clone() - S::one()).abs();
    let ok = if S::exact() { dev.is_zero() } else { dev.to_f64() <= FLOAT_MASS_TOL };
    if !ok {
        return Err(Error::NonStochastic(format!("probabilities sum to {total}")));
    }
    Ok(())
}
