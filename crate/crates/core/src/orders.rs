//! Orbit sizes of geometric progressions in residue rings.
//!
//! For coprime bases `p, q > 1` and a seed `a ≥ 1`, the quantity of interest
//! is `T_n = #{a·q^k mod p^n : k ≥ 0}`. Writing `a = b·p^r` with
//! `gcd(b, p) = 1`, the orbit is a coset of the cyclic group generated by
//! `q` modulo `p^{n-r}`, so `T_n = 1` for `n ≤ r` and
//! `T_n = ord(q mod p^{n-r})` beyond.
//!
//! The useful regime is *stabilized* growth `T_{n+1} = p·T_n`, i.e.
//! `T_n = C₁·p^n` with a constant rational `C₁`. Writing
//! `q^{T_n} = 1 + u·p^v` with `gcd(u, p) = 1`, the growth stabilizes at the
//! smallest `n` with `v = n - r`, *provided* `p` is odd or `v ≥ 2`: from
//! such a configuration the multiplicative order lifts by exactly `p` per
//! level. (For `p = 2` and `v = 1`, squaring `1 + 2u` jumps the valuation
//! by an irregular amount, so detection must wait — a naive "first
//! nontrivial level plus valuation" shortcut over-reports stabilization for
//! even `p`.) Everything here is verified two ways: the detected threshold
//! is cross-checked against the computed table, and small moduli can be
//! certified by literal orbit enumeration.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Moduli at most this large use the direct multiplication walk.
pub const BRUTE_ORDER_LIMIT: u64 = 10_000_000;

/// Trial-division bound for factoring group exponents.
const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Cap for literal orbit enumeration (`p^n` at most this).
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// `x = u·p^v` with `gcd(u, p) = 1`; returns `(v, u)`.
pub fn padic_valuation(x: &BigUint, p: u64) -> Result<(u32, BigUint)> {
    if p < 2 {
        return Err(Error::BaseTooSmall(p as u32));
    }
    if x.is_zero() {
        return Err(Error::NotPositive { what: "argument of the p-adic valuation" });
    }
    let p_big = BigUint::from(p);
    let mut v = 0u32;
    let mut u = x.clone();
    loop {
        let (quot, rem) = u.div_rem(&p_big);
        if !rem.is_zero() {
            return Ok((v, u));
        }
        v += 1;
        u = quot;
    }
}

/// Convenience form for machine-word inputs.
pub fn padic_valuation_u64(x: u64, p: u64) -> Result<(u32, u64)> {
    let (v, u) = padic_valuation(&BigUint::from(x), p)?;
    Ok((v, u.to_u64().expect("u divides x")))
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, m);
        }
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for u64.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factor by trial division up to the configured bound, accepting a single
/// large prime remainder. Fails on remainders that would need genuine
/// factorization machinery.
fn factor(x: &BigUint) -> Result<BTreeMap<u64, u32>> {
    let mut factors: BTreeMap<u64, u32> = BTreeMap::new();
    let mut rest = x.clone();
    let push = |p: u64, factors: &mut BTreeMap<u64, u32>| {
        *factors.entry(p).or_insert(0) += 1;
    };
    let mut d = 2u64;
    while d <= TRIAL_DIVISION_BOUND {
        let d_big = BigUint::from(d);
        if &d_big * &d_big > rest {
            break;
        }
        loop {
            let (q, r) = rest.div_rem(&d_big);
            if r.is_zero() {
                push(d, &mut factors);
                rest = q;
            } else {
                break;
            }
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if rest.is_one() {
        return Ok(factors);
    }
    if let Some(rest_u64) = rest.to_u64() {
        // No factor up to the bound: a remainder below bound² is prime, and
        // larger word-size remainders are settled by Miller–Rabin.
        if rest_u64 <= TRIAL_DIVISION_BOUND.saturating_mul(TRIAL_DIVISION_BOUND)
            || is_prime_u64(rest_u64)
        {
            push(rest_u64, &mut factors);
            return Ok(factors);
        }
    }
    Err(Error::FactorBound(rest.to_string()))
}

fn brute_order_u64(q: u64, m: u64) -> BigUint {
    debug_assert!(m > 1);
    let base = q % m;
    let mut acc = base;
    let mut t: u64 = 1;
    while acc != 1 {
        acc = mulmod_u64(acc, base, m);
        t += 1;
    }
    BigUint::from(t)
}

/// Carmichael exponent of `(ℤ/m)^×` from a factorization of `m`.
fn carmichael(factors: &BTreeMap<u64, u32>) -> BigUint {
    let mut lambda = BigUint::one();
    for (&p, &k) in factors {
        let component = if p == 2 {
            match k {
                1 => BigUint::one(),
                2 => BigUint::from(2u32),
                _ => BigUint::from(2u32).pow(k - 2),
            }
        } else {
            BigUint::from(p).pow(k - 1) * BigUint::from(p - 1)
        };
        lambda = lambda.lcm(&component);
    }
    lambda
}

/// Multiplicative order of `q` modulo `m` (requires `gcd(q, m) = 1`).
///
/// Small moduli walk the cycle directly; larger ones factor the Carmichael
/// exponent and strip primes.
pub fn mult_order(q: &BigUint, m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::NotPositive { what: "modulus" });
    }
    if m.is_one() {
        return Ok(BigUint::one());
    }
    let q_red = q % m;
    if q_red.gcd(m) != BigUint::one() {
        return Err(Error::ParamOutOfRange {
            what: "order base",
            got: q.to_string(),
            requirement: "base must be coprime to the modulus",
        });
    }
    if let Some(m_u64) = m.to_u64() {
        if m_u64 <= BRUTE_ORDER_LIMIT {
            return Ok(brute_order_u64(
                q_red.to_u64().expect("reduced below modulus"),
                m_u64,
            ));
        }
    }
    let m_factors = factor(m)?;
    let lambda = carmichael(&m_factors);
    // Prime support of λ: the p's themselves and the factors of each p-1.
    let mut lambda_primes: Vec<u64> = Vec::new();
    for (&p, _) in &m_factors {
        lambda_primes.push(p);
        if p > 2 {
            for (&f, _) in &factor(&BigUint::from(p - 1))? {
                lambda_primes.push(f);
            }
        }
    }
    lambda_primes.sort_unstable();
    lambda_primes.dedup();
    let mut order = lambda;
    for &prime in &lambda_primes {
        let prime = BigUint::from(prime);
        loop {
            let (candidate, rem) = order.div_rem(&prime);
            if !rem.is_zero() {
                break;
            }
            if q_red.modpow(&candidate, m).is_one() {
                order = candidate;
            } else {
                break;
            }
        }
    }
    Ok(order)
}

fn validate_triple(a: u64, p: u64, q: u64) -> Result<()> {
    if a == 0 {
        return Err(Error::NotPositive { what: "seed a" });
    }
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
    if p.gcd(&q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    Ok(())
}

/// `T_n = #{a·q^k mod p^n}` via the order reduction.
pub fn orbit_size(a: u64, p: u64, q: u64, n: u32) -> Result<BigUint> {
    validate_triple(a, p, q)?;
    if n == 0 {
        return Ok(BigUint::one());
    }
    let (r, _) = padic_valuation_u64(a, p)?;
    if n <= r {
        return Ok(BigUint::one());
    }
    mult_order(&BigUint::from(q), &BigUint::from(p).pow(n - r))
}

/// Literal orbit walk modulo `p^n`; the reference oracle for small moduli.
pub fn orbit_enumerate(a: u64, p: u64, q: u64, n: u32) -> Result<u64> {
    validate_triple(a, p, q)?;
    let mut modulus: u64 = 1;
    for _ in 0..n {
        modulus = modulus.checked_mul(p).filter(|&m| m <= ENUMERATION_CAP).ok_or(
            Error::ParamOutOfRange {
                what: "p^n",
                got: format!("{p}^{n}"),
                requirement: "enumeration requires p^n within the brute-force cap",
            },
        )?;
    }
    if modulus == 1 {
        return Ok(1);
    }
    // Multiplication by q permutes residues, so the orbit is a pure cycle:
    // its size is the first return time to the seed.
    let start = a % modulus;
    let mut x = mulmod_u64(start, q % modulus, modulus);
    let mut count: u64 = 1;
    while x != start {
        x = mulmod_u64(x, q % modulus, modulus);
        count += 1;
    }
    Ok(count)
}

/// Witness data for a detected stabilization threshold:
/// `q^{T_{n₀}} = 1 + u·p^v` with `gcd(u, p) = 1`, recorded modulo `p^{v+2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationCertificate {
    pub v: u32,
    pub unit_mod_p2: BigUint,
}

/// Orbit-size table with detected geometric-growth threshold.
#[derive(Debug, Clone)]
pub struct OrderProfile {
    pub a: u64,
    pub p: u64,
    pub q: u64,
    /// `p`-adic valuation of the seed.
    pub r: u32,
    /// `table[n-1] = T_n`, for `1 ≤ n ≤ n_max`.
    pub table: Vec<BigUint>,
    /// Smallest level from which `T_{n+1} = p·T_n` holds forever.
    pub n0: u32,
    /// The stabilized constant: `T_n = c1·p^n` for `n ≥ n0`.
    pub c1: Rational,
    pub certificate: StabilizationCertificate,
}

impl OrderProfile {
    pub fn n_max(&self) -> u32 {
        self.table.len() as u32
    }

    /// `T_n` for `1 ≤ n ≤ n_max`.
    pub fn t(&self, n: u32) -> Result<&BigUint> {
        if n == 0 || n > self.n_max() {
            return Err(Error::ParamOutOfRange {
                what: "level n",
                got: n.to_string(),
                requirement: "1 <= n <= n_max of the profile",
            });
        }
        Ok(&self.table[(n - 1) as usize])
    }

    /// Exact check of `T_n = c1·p^n` at one level in the stabilized range.
    pub fn scaling_exact(&self, n: u32) -> Result<bool> {
        let t_n = self.t(n)?;
        if n < self.n0 {
            return Ok(false);
        }
        let expected = self.c1.clone()
            * BigRational::from_integer(num_bigint::BigInt::from(self.p).pow(n));
        Ok(expected == BigRational::from_integer(t_n.clone().into()))
    }

    /// Recompute the certificate congruence `q^{T_{n₀}} ≡ 1 + u·p^v (mod p^{v+2})`.
    pub fn verify_certificate(&self) -> bool {
        let p = BigUint::from(self.p);
        let v = self.certificate.v;
        if v != self.n0 - self.r {
            return false;
        }
        let modulus = p.pow(v + 2);
        let t_n0 = match self.t(self.n0) {
            Ok(t) => t.clone(),
            Err(_) => return false,
        };
        let w = BigUint::from(self.q).modpow(&t_n0, &modulus);
        let expected = (BigUint::one() + &self.certificate.unit_mod_p2 * p.pow(v)) % &modulus;
        let unit_coprime = (&self.certificate.unit_mod_p2 % &p) != BigUint::zero();
        w == expected && unit_coprime
    }

    /// Certify the table against literal enumeration for every level with
    /// `p^n` under the cap; returns the highest certified level.
    pub fn certify_by_enumeration(&self) -> Result<u32> {
        let mut certified = 0u32;
        for n in 1..=self.n_max() {
            match orbit_enumerate(self.a, self.p, self.q, n) {
                Ok(count) => {
                    if BigUint::from(count) != *self.t(n)? {
                        return Err(Error::ParamOutOfRange {
                            what: "orbit table",
                            got: format!("T_{n} = {} vs enumerated {count}", self.t(n)?),
                            requirement: "order reduction must match enumeration",
                        });
                    }
                    certified = n;
                }
                Err(_) => break, // p^n above the enumeration cap
            }
        }
        Ok(certified)
    }
}

/// Compute `T_1 … T_{n_max}`, detect the stabilization threshold, and
/// package the scaling constant with its certificate.
pub fn order_profile(a: u64, p: u64, q: u64, n_max: u32) -> Result<OrderProfile> {
    validate_triple(a, p, q)?;
    let (r, _) = padic_valuation_u64(a, p)?;
    if n_max < r + 2 {
        return Err(Error::ParamOutOfRange {
            what: "n_max",
            got: n_max.to_string(),
            requirement: "profile needs n_max >= r + 2 to see one lift",
        });
    }
    let p_big = BigUint::from(p);
    let q_big = BigUint::from(q);
    let mut table: Vec<BigUint> = Vec::with_capacity(n_max as usize);
    // T_n for n ≤ r is 1; beyond that, lift the order one level at a time:
    // ord mod p^{j+1} is ord mod p^j times 1 or p.
    let mut ord = BigUint::one();
    for n in 1..=n_max {
        if n > r {
            let j = n - r;
            let modulus = p_big.pow(j);
            if j == 1 {
                ord = mult_order(&q_big, &modulus)?;
            } else if !q_big.modpow(&ord, &modulus).is_one() {
                ord *= &p_big;
                debug_assert!(q_big.modpow(&ord, &modulus).is_one());
            }
        }
        table.push(ord.clone());
    }
    // Detection: v_p(q^{T_n} - 1) equals n - r exactly (not more), and for
    // p = 2 the valuation must already be ≥ 2 for squaring to lift cleanly.
    let mut detected: Option<u32> = None;
    for n in (r + 1)..=n_max {
        let v_required = n - r;
        if p == 2 && v_required < 2 {
            continue;
        }
        let t_n = &table[(n - 1) as usize];
        let probe = p_big.pow(v_required + 1);
        if !q_big.modpow(t_n, &probe).is_one() {
            detected = Some(n);
            break;
        }
    }
    let n0 = detected.ok_or_else(|| Error::NotStabilized {
        n_max,
        table: table
            .iter()
            .enumerate()
            .map(|(i, t)| format!("T_{} = {}", i + 1, t))
            .collect::<Vec<_>>()
            .join(", "),
    })?;
    // The table itself must agree with geometric growth from n0 on.
    for n in n0..n_max {
        let here = &table[(n - 1) as usize];
        let next = &table[n as usize];
        if next != &(here * &p_big) {
            return Err(Error::NotStabilized {
                n_max,
                table: format!("T_{} = {}, T_{} = {}", n, here, n + 1, next),
            });
        }
    }
    let t_n0 = table[(n0 - 1) as usize].clone();
    let c1 = BigRational::new(t_n0.clone().into(), p_big.pow(n0).into());
    let v = n0 - r;
    let w = q_big.modpow(&t_n0, &p_big.pow(v + 2));
    let unit_mod_p2 = (w - BigUint::one()) / p_big.pow(v);
    let profile = OrderProfile {
        a,
        p,
        q,
        r,
        table,
        n0,
        c1,
        certificate: StabilizationCertificate { v, unit_mod_p2 },
    };
    debug_assert!(profile.verify_certificate());
    Ok(profile)
}
