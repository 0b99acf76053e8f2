//! Fourier coefficients of cylinder measures and Weyl-sum diagnostics.
//!
//! A depth-`N` weight vector is read as the piecewise-uniform density taking
//! the value `p^N·w_k` on the cell `[k/p^N, (k+1)/p^N)`. Its Fourier
//! coefficient at an integer frequency `m ≥ 1` has the closed form
//!
//! ```text
//! ∫ e(m x) dμ = (e(m/P) - 1) · P/(2πi·m) · Σ_k w_k e(m k / P),   P = p^N,
//! ```
//!
//! so the trigonometric work reduces to one exponential sum over the cells.
//! Phases are reduced exactly: the lattice index `m·k mod P` is maintained
//! incrementally in integer arithmetic and looks up a precomputed table of
//! `P`-th roots of unity, so no large floating-point angle is ever folded.
//! Sums are compensated and chunked with a fixed block size, which makes the
//! output bytes independent of how many worker threads run the blocks.
//!
//! The Weyl averages studied here are
//! `β_T(x) = (1/T) Σ_{k<T} e(m q^k x)`. Squaring and integrating against a
//! level-`n` smoothed measure kills every off-diagonal pair exactly — the
//! smoothed weight vector is constant across translated blocks, so its
//! exponential sum factors through `Σ_{j<p^n} e(d j / p^n) = 0` whenever
//! `p^n ∤ d`, and orbit distinctness guarantees exactly that for the pair
//! frequencies `d = m(q^k - q^l)`. The identity `∫ |β_{T_n}|² dν_n = 1/T_n`
//! therefore holds for every invariant base measure, and the report records
//! the floating-point deviation from it.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::measure::CylinderMeasure;
use crate::orders::{orbit_size, order_profile, padic_valuation_u64};
use crate::scalar::{kahan_sum, Rational, Scalar};

/// Fixed block size for parallel compensated sums. Results must not depend
/// on the thread count, so the split is by this constant, never by worker.
const SUM_CHUNK: usize = 8192;

/// Largest orbit size accepted for pairwise Weyl expansions.
pub const ORBIT_PAIR_CAP: u64 = 1024;

/// Largest number of terms a direct Weyl sum will enumerate.
pub const WEYL_TERM_CAP: u64 = 1_000_000;

/// Component-wise Neumaier summation for complex terms.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedComplex {
    re: f64,
    im: f64,
    re_comp: f64,
    im_comp: f64,
}

impl CompensatedComplex {
    fn add(&mut self, z: Complex64) {
        let t = self.re + z.re;
        self.re_comp += if self.re.abs() >= z.re.abs() {
            (self.re - t) + z.re
        } else {
            (z.re - t) + self.re
        };
        self.re = t;
        let t = self.im + z.im;
        self.im_comp += if self.im.abs() >= z.im.abs() {
            (self.im - t) + z.im
        } else {
            (z.im - t) + self.im
        };
        self.im = t;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_comp, self.im + self.im_comp)
    }
}

/// One Fourier coefficient of a piecewise-uniform cylinder density.
#[derive(Debug, Clone)]
pub struct FourierCoefficient {
    pub frequency: BigUint,
    pub value: Complex64,
    /// Depth of the weight vector the value was computed from.
    pub depth: u32,
    /// Oscillation bound `min(2, 2π·m/p^N)`: any measure with the same
    /// depth-`N` cylinder masses has a coefficient within this distance.
    pub error_bound: f64,
}

/// Reusable evaluator holding the float weights and the roots table.
pub struct FourierEngine {
    p: u32,
    depth: u32,
    cells: u64,
    weights: Vec<f64>,
    roots: Vec<Complex64>,
}

impl FourierEngine {
    pub fn new<S: Scalar>(mu: &CylinderMeasure<S>) -> Self {
        let cells = mu.cells() as u64;
        let weights: Vec<f64> = mu.weights().iter().map(|w| w.to_f64()).collect();
        let roots: Vec<Complex64> = (0..cells)
            .map(|j| {
                let theta = TAU * (j as f64) / (cells as f64);
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        FourierEngine { p: mu.p(), depth: mu.depth(), cells, weights, roots }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    /// `Σ_k w_k e(f·k/P)` with the phase index walked exactly mod `P`.
    fn raw_sum(&self, f: u64) -> Complex64 {
        debug_assert!(f < self.cells);
        let cells = self.cells;
        let partials: Vec<Complex64> = self
            .weights
            .par_chunks(SUM_CHUNK)
            .enumerate()
            .map(|(chunk_no, chunk)| {
                let start = (chunk_no * SUM_CHUNK) as u64;
                let mut idx = ((start as u128 * f as u128) % cells as u128) as u64;
                let mut acc = CompensatedComplex::default();
                for &w in chunk {
                    let root = self.roots[idx as usize];
                    acc.add(Complex64::new(w * root.re, w * root.im));
                    idx += f;
                    if idx >= cells {
                        idx -= cells;
                    }
                }
                acc.value()
            })
            .collect();
        let mut total = CompensatedComplex::default();
        for part in partials {
            total.add(part);
        }
        total.value()
    }

    /// Fourier coefficient at frequency `m ≥ 1`.
    pub fn coefficient(&self, frequency: &BigUint) -> Result<FourierCoefficient> {
        if frequency.is_zero() {
            return Err(Error::NotPositive { what: "frequency" });
        }
        let p_f = self.cells as f64;
        let m_f = frequency.to_f64().unwrap_or(f64::INFINITY);
        let error_bound = (TAU * m_f / p_f).min(2.0);
        let f = (frequency % self.cells)
            .to_u64()
            .expect("residue below cell count");
        let value = if f == 0 {
            // Full-period frequencies integrate to zero against every cell.
            Complex64::new(0.0, 0.0)
        } else {
            let s = self.raw_sum(f);
            let theta = TAU * (f as f64) / p_f;
            let edge_re = theta.cos() - 1.0;
            let edge_im = theta.sin();
            // (e(θ)-1)·P/(2πi·m); division by i rotates by -π/2.
            let scale = p_f / (TAU * m_f);
            let prefactor = Complex64::new(edge_im * scale, -edge_re * scale);
            prefactor * s
        };
        Ok(FourierCoefficient {
            frequency: frequency.clone(),
            value,
            depth: self.depth,
            error_bound,
        })
    }
}

/// One-shot coefficient; build a [`FourierEngine`] for repeated frequencies.
pub fn fourier<S: Scalar>(mu: &CylinderMeasure<S>, m: &BigUint) -> Result<FourierCoefficient> {
    FourierEngine::new(mu).coefficient(m)
}

/// `β_T(x) = (1/T) Σ_{k<T} e(m q^k x)` at a rational point, with every
/// phase reduced mod 1 in integer arithmetic before any trigonometry.
pub fn weyl_sum(x: &Rational, m: &BigUint, q: u64, terms: u64) -> Result<Complex64> {
    if terms == 0 {
        return Err(Error::NotPositive { what: "number of Weyl terms" });
    }
    if terms > WEYL_TERM_CAP {
        return Err(Error::ExpansionTooLarge { terms: terms.to_string(), cap: WEYL_TERM_CAP });
    }
    if m.is_zero() {
        return Err(Error::NotPositive { what: "frequency" });
    }
    if q == 0 {
        return Err(Error::NotPositive { what: "base q" });
    }
    let den = x.denom().magnitude().clone();
    let num = x.numer().mod_floor(x.denom()).magnitude().clone();
    let den_f = den.to_f64().unwrap_or(f64::INFINITY);
    let q_big = BigUint::from(q);
    let mut residue = (m * &num) % &den;
    let mut acc = CompensatedComplex::default();
    for _ in 0..terms {
        let theta = TAU * residue.to_f64().expect("residue below denominator") / den_f;
        acc.add(Complex64::new(theta.cos(), theta.sin()));
        residue = (&residue * &q_big) % &den;
    }
    Ok(acc.value() / terms as f64)
}

/// Exact value of the block sum `Σ_{j < p^n} e(m(q^k - q^l) j / p^n)`:
/// `p^n` when `p^n` divides `m(q^k - q^l)`, zero otherwise.
pub fn exp_sum_zero(m: &BigUint, q: u64, p: u64, n: u32, k: u32, l: u32) -> Result<BigUint> {
    if p < 2 {
        return Err(Error::BaseTooSmall(p as u32));
    }
    if q < 2 {
        return Err(Error::ParamOutOfRange {
            what: "base q",
            got: q.to_string(),
            requirement: "q must be at least 2",
        });
    }
    if m.is_zero() {
        return Err(Error::NotPositive { what: "frequency" });
    }
    let (hi, lo) = if k >= l { (k, l) } else { (l, k) };
    if hi as u64 > WEYL_TERM_CAP {
        return Err(Error::ExpansionTooLarge { terms: hi.to_string(), cap: WEYL_TERM_CAP });
    }
    let q_big = BigUint::from(q);
    let diff = q_big.pow(hi) - q_big.pow(lo);
    let modulus = BigUint::from(p).pow(n);
    if ((m * diff) % &modulus).is_zero() {
        Ok(modulus)
    } else {
        Ok(BigUint::zero())
    }
}

/// `∫ |β_{T_n}|² dν_n` expanded over orbit pairs, with the exact target
/// `1/T_n` and the observed deviation.
#[derive(Debug, Clone)]
pub struct WeylL2Report {
    pub p: u32,
    pub n: u32,
    pub m: u64,
    pub q: u64,
    pub t_n: u64,
    pub value: f64,
    pub expected: f64,
    pub deviation: f64,
    /// Largest off-diagonal coefficient modulus seen (all should be noise).
    pub max_offdiag: f64,
    pub depth: u32,
}

/// Integrate the squared Weyl average against the level-`n` smoothing of an
/// invariant measure. The off-diagonal terms cancel exactly in theory; the
/// report carries whatever the floats left behind.
pub fn weyl_l2_nu<S: Scalar>(
    mu: &CylinderMeasure<S>,
    n: u32,
    m: u64,
    q: u64,
) -> Result<WeylL2Report> {
    if m == 0 {
        return Err(Error::NotPositive { what: "frequency seed m" });
    }
    let p = mu.p() as u64;
    let t_big = orbit_size(m, p, q, n)?;
    let t = t_big
        .to_u64()
        .filter(|&t| t <= ORBIT_PAIR_CAP)
        .ok_or_else(|| Error::ExpansionTooLarge {
            terms: t_big.to_string(),
            cap: ORBIT_PAIR_CAP,
        })?;
    let nu = mu.smooth_nu(n)?.materialize_f64();
    let engine = FourierEngine::new(&nu);
    let q_big = BigUint::from(q);
    let mut powers: Vec<BigUint> = Vec::with_capacity(t as usize);
    let mut acc = BigUint::one();
    for _ in 0..t {
        powers.push(acc.clone());
        acc *= &q_big;
    }
    let m_big = BigUint::from(m);
    let mut off_terms: Vec<f64> = Vec::with_capacity((t as usize * (t as usize - 1)) / 2);
    let mut max_offdiag = 0.0f64;
    for k in 0..t as usize {
        for l in (k + 1)..t as usize {
            let freq = &m_big * (&powers[l] - &powers[k]);
            let coeff = engine.coefficient(&freq)?;
            max_offdiag = max_offdiag.max(coeff.value.norm());
            off_terms.push(2.0 * coeff.value.re);
        }
    }
    let t_f = t as f64;
    let value = (t_f + kahan_sum(off_terms)) / (t_f * t_f);
    let expected = 1.0 / t_f;
    Ok(WeylL2Report {
        p: mu.p(),
        n,
        m,
        q,
        t_n: t,
        value,
        expected,
        deviation: value - expected,
        max_offdiag,
        depth: mu.depth(),
    })
}

/// Difference between the orbit-averaged coefficient and the plain one:
/// a direct probe of how far the measure is from `×q` invariance in the
/// `m`-th frequency.
#[derive(Debug, Clone)]
pub struct QTransferReport {
    pub m: u64,
    pub q: u64,
    pub terms: u64,
    pub average: Complex64,
    pub single: Complex64,
    pub defect: f64,
}

pub fn q_invariance_transfer<S: Scalar>(
    mu: &CylinderMeasure<S>,
    m: u64,
    q: u64,
    terms: u64,
) -> Result<QTransferReport> {
    if m == 0 {
        return Err(Error::NotPositive { what: "frequency seed m" });
    }
    if q < 2 {
        return Err(Error::ParamOutOfRange {
            what: "base q",
            got: q.to_string(),
            requirement: "q must be at least 2",
        });
    }
    if terms == 0 || terms > ORBIT_PAIR_CAP {
        return Err(Error::ExpansionTooLarge { terms: terms.to_string(), cap: ORBIT_PAIR_CAP });
    }
    let engine = FourierEngine::new(mu);
    let m_big = BigUint::from(m);
    let q_big = BigUint::from(q);
    let single = engine.coefficient(&m_big)?.value;
    let mut freq = m_big;
    let mut acc = CompensatedComplex::default();
    for _ in 0..terms {
        acc.add(engine.coefficient(&freq)?.value);
        freq *= &q_big;
    }
    let average = acc.value() / terms as f64;
    Ok(QTransferReport { m, q, terms, average, single, defect: (average - single).norm() })
}

/// Every quantity in the chained estimate
/// `|∫ β_{T_n} dμ|² ≤ ∫φ_n dμ · ∫|β_{T_n}|² dν_n ≤ (1/C₁)·(1+C₀)^{-n}`,
/// with the slack of each link.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub p: u32,
    pub m: u64,
    pub q: u64,
    pub n: u32,
    pub depth: u32,
    /// Stabilization threshold of the orbit-size table.
    pub n0: u32,
    pub t_n: u64,
    /// Whether `T_n = c1·p^n` held exactly in integer arithmetic.
    pub scaling_exact: bool,
    pub c0: f64,
    pub c1: Rational,
    /// `|(1/T_n) Σ_k f̂(m q^k)|²` for the base measure.
    pub lhs: f64,
    pub integral_phi: f64,
    pub weyl_l2: f64,
    pub weyl_deviation: f64,
    /// `φ·weyl - lhs`; nonnegative up to rounding by Cauchy–Schwarz.
    pub cs_slack: f64,
    /// `(p/(1+c0))^n`, the proven ceiling for `∫φ_n`.
    pub phi_bound: f64,
    pub phi_slack: f64,
    /// `(1/c1)·(1+c0)^{-n}`.
    pub final_bound: f64,
    pub final_slack: f64,
}

/// Run the full estimate at level `n` for the frequency orbit
/// `{m·q^k}`. Requires the measure to be balanced (`C₀ > 0`) and the level
/// to sit strictly above the orbit-size stabilization threshold.
pub fn rigidity_chain<S: Scalar>(
    mu: &CylinderMeasure<S>,
    m: u64,
    q: u64,
    n: u32,
) -> Result<RigidityReport> {
    if m == 0 {
        return Err(Error::NotPositive { what: "frequency seed m" });
    }
    let p = mu.p() as u64;
    let (r, _) = padic_valuation_u64(m, p)?;
    let profile = order_profile(m, p, q, (n + 2).max(r + 2))?;
    if n <= profile.n0 {
        return Err(Error::BelowStabilization { n, n0: profile.n0 });
    }
    let t_big = profile.t(n)?;
    let t = t_big
        .to_u64()
        .filter(|&t| t <= ORBIT_PAIR_CAP)
        .ok_or_else(|| Error::ExpansionTooLarge {
            terms: t_big.to_string(),
            cap: ORBIT_PAIR_CAP,
        })?;
    let balance = mu.balance_profile(mu.depth())?;
    let c0 = balance.c0.to_f64();
    if !(c0 > 0.0) {
        let witness = balance
            .witness
            .or_else(|| balance.degenerate.first().cloned())
            .or_else(|| balance.unbounded.first().cloned())
            .map(|(w, i)| format!("digit {i} under {w}"))
            .unwrap_or_else(|| "unknown".to_string());
        return Err(Error::Unbalanced { witness });
    }
    let engine = FourierEngine::new(mu);
    let m_big = BigUint::from(m);
    let q_big = BigUint::from(q);
    let mut freq = m_big;
    let mut acc = CompensatedComplex::default();
    for _ in 0..t {
        acc.add(engine.coefficient(&freq)?.value);
        freq *= &q_big;
    }
    let lhs = (acc.value() / t as f64).norm_sqr();
    let phi = mu.integral_phi(n, mu.depth())?.value.to_f64();
    let weyl = weyl_l2_nu(mu, n, m, q)?;
    let cs_slack = phi * weyl.value - lhs;
    let phi_bound = (p as f64 / (1.0 + c0)).powi(n as i32);
    let c1_f = Scalar::to_f64(&profile.c1);
    let final_bound = (1.0 + c0).powi(-(n as i32)) / c1_f;
    Ok(RigidityReport {
        p: mu.p(),
        m,
        q,
        n,
        depth: mu.depth(),
        n0: profile.n0,
        t_n: t,
        scaling_exact: profile.scaling_exact(n)?,
        c0,
        c1: profile.c1.clone(),
        lhs,
        integral_phi: phi,
        weyl_l2: weyl.value,
        weyl_deviation: weyl.deviation,
        cs_slack,
        phi_bound,
        phi_slack: phi_bound - phi,
        final_bound,
        final_slack: final_bound - lhs,
    })
}
