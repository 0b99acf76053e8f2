//! Base-`p` coding of the circle.
//!
//! A [`Word`] of depth `n` is a finite digit string `i_0 i_1 … i_{n-1}`
//! (most significant first) naming the cylinder interval
//! `[k/p^n, (k+1)/p^n]` with `k = Σ i_j · p^{n-1-j}`. Under this indexing
//! the times-`p` map sends a cylinder onto the cylinder of the left-shifted
//! word, and prepending a digit selects one of the `p` preimage branches.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Hard cap on word depth; keeps indices and interval arithmetic desk-scale.
pub const MAX_DEPTH: usize = 64;

/// A finite word over the digit alphabet `{0, …, p-1}`, most significant
/// digit first. Depth is between 1 and [`MAX_DEPTH`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    p: u32,
    digits: Vec<u32>,
}

impl Word {
    pub fn new(p: u32, digits: Vec<u32>) -> Result<Self> {
        if p < 2 {
            return Err(Error::BaseTooSmall(p));
        }
        if digits.is_empty() {
            return Err(Error::EmptyWord);
        }
        if digits.len() > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth: digits.len(), max: MAX_DEPTH });
        }
        if let Some(&digit) = digits.iter().find(|&&d| d >= p) {
            return Err(Error::DigitOutOfRange { digit, p });
        }
        Ok(Word { p, digits })
    }

    /// The word of depth `n` whose index is `k` (i.e. `k` written in base
    /// `p` with exactly `n` digits, most significant first).
    pub fn from_index(p: u32, n: usize, k: &BigUint) -> Result<Self> {
        if p < 2 {
            return Err(Error::BaseTooSmall(p));
        }
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        if n > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth: n, max: MAX_DEPTH });
        }
        let base = BigUint::from(p);
        if *k >= base.pow(n as u32) {
            return Err(Error::DigitOutOfRange { digit: u32::MAX, p });
        }
        let mut digits = vec![0u32; n];
        let mut rest = k.clone();
        for d in digits.iter_mut().rev() {
            let (q, r) = rest.div_rem(&base);
            *d = r.to_u32().expect("digit fits");
            rest = q;
        }
        Ok(Word { p, digits })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Index `k = Σ i_j p^{n-1-j}` of the cylinder among depth-`n` cylinders.
    pub fn index(&self) -> BigUint {
        let base = BigUint::from(self.p);
        let mut k = BigUint::zero();
        for &d in &self.digits {
            k = k * &base + BigUint::from(d);
        }
        k
    }

    /// Index as `usize`, when the full level fits addressable memory.
    pub fn index_usize(&self) -> Option<usize> {
        self.index().to_usize()
    }

    /// Drop the leading (most significant) digit: the action of the
    /// times-`p` map on coding words.
    pub fn shift(&self) -> Result<Word> {
        if self.digits.len() == 1 {
            return Err(Error::ShiftEmptyWord);
        }
        Ok(Word { p: self.p, digits: self.digits[1..].to_vec() })
    }

    /// Shift `m` times (`m` strictly below the depth).
    pub fn shift_by(&self, m: usize) -> Result<Word> {
        if m >= self.digits.len() {
            return Err(Error::ShiftEmptyWord);
        }
        Ok(Word { p: self.p, digits: self.digits[m..].to_vec() })
    }

    /// Prepend a digit: selects one of the `p` branches of the inverse map,
    /// so `f_p(I_{prepend(i, w)}) = I_w`.
    pub fn prepend(&self, digit: u32) -> Result<Word> {
        if digit >= self.p {
            return Err(Error::DigitOutOfRange { digit, p: self.p });
        }
        if self.digits.len() + 1 > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth: self.digits.len() + 1, max: MAX_DEPTH });
        }
        let mut digits = Vec::with_capacity(self.digits.len() + 1);
        digits.push(digit);
        digits.extend_from_slice(&self.digits);
        Ok(Word { p: self.p, digits })
    }

    /// All `p` preimage words `i·w`, in digit order.
    pub fn preimages(&self) -> Result<Vec<Word>> {
        (0..self.p).map(|i| self.prepend(i)).collect()
    }

    /// Append a digit: refines the cylinder by one level.
    pub fn append(&self, digit: u32) -> Result<Word> {
        if digit >= self.p {
            return Err(Error::DigitOutOfRange { digit, p: self.p });
        }
        if self.digits.len() + 1 > MAX_DEPTH {
            return Err(Error::DepthTooLarge { depth: self.digits.len() + 1, max: MAX_DEPTH });
        }
        let mut digits = self.digits.clone();
        digits.push(digit);
        Ok(Word { p: self.p, digits })
    }

    /// The `p` children `w·j`; their intervals partition `I_w`.
    pub fn children(&self) -> Result<Vec<Word>> {
        (0..self.p).map(|j| self.append(j)).collect()
    }

    /// The cylinder interval `[k/p^n, (k+1)/p^n]` coded by this word.
    pub fn interval(&self) -> CylinderInterval {
        let k = self.index();
        let den = BigUint::from(self.p).pow(self.depth() as u32);
        let lo = BigRational::new(k.clone().into(), den.clone().into());
        let hi = BigRational::new((k + BigUint::one()).into(), den.into());
        CylinderInterval { lo, hi, word: self.clone() }
    }
}

impl std::fmt::Display for Word {
    /// Digit-string form: `"101"` for p ≤ 10, alphanumeric through p = 36,
    /// dot-separated decimal digits beyond.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.p <= 36 {
            for &d in &self.digits {
                write!(f, "{}", char::from_digit(d, 36).expect("digit < 36"))?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Parse a digit-string form back into a word over the given base.
pub fn parse_word(p: u32, s: &str) -> Result<Word> {
    let err = |reason: &str| Error::WordParse { input: s.to_string(), p, reason: reason.into() };
    if s.is_empty() {
        return Err(err("empty"));
    }
    let digits: Vec<u32> = if s.contains('.') {
        s.split('.')
            .map(|part| part.parse::<u32>().map_err(|_| err("bad digit")))
            .collect::<Result<_>>()?
    } else {
        s.chars()
            .map(|c| c.to_digit(36).ok_or_else(|| err("bad digit")))
            .collect::<Result<_>>()?
    };
    Word::new(p, digits)
}

/// A dyadic-style cylinder interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderInterval {
    lo: BigRational,
    hi: BigRational,
    word: Word,
}

impl CylinderInterval {
    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Membership in the closed interval.
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Image under the times-`p` map, reduced mod 1. Well defined because a
    /// cylinder of depth `n ≥ 2` maps onto a single depth-`(n-1)` cylinder.
    pub fn image_times_p(&self) -> Result<CylinderInterval> {
        Ok(self.word.shift()?.interval())
    }
}

impl std::fmt::Display for CylinderInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// The depth-`n` word whose cylinder contains `x ∈ [0,1)`, with points on a
/// cylinder boundary assigned to the interval having `x` as left endpoint
/// (`k = ⌊x·p^n⌋`).
pub fn code_point(p: u32, x: &BigRational, n: usize) -> Result<Word> {
    if p < 2 {
        return Err(Error::BaseTooSmall(p));
    }
    if x < &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::PointOutOfRange(x.to_string()));
    }
    if n == 0 {
        return Err(Error::EmptyWord);
    }
    if n > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth: n, max: MAX_DEPTH });
    }
    let scaled = x * BigRational::from_integer(num_bigint::BigInt::from(p).pow(n as u32));
    let k = scaled.floor().to_integer().to_biguint().expect("x >= 0");
    Word::from_index(p, n, &k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn word(p: u32, digits: &[u32]) -> Word {
        Word::new(p, digits.to_vec()).unwrap()
    }

    /// Oracle: compose the inverse branches g_i(x) = (x+i)/p from the inside
    /// out and evaluate at the endpoints of [0,1].
    fn branch_composition_interval(w: &Word) -> (BigRational, BigRational) {
        let p = rat(w.p() as i64, 1);
        let apply = |x: &BigRational| {
            let mut y = x.clone();
            for &d in w.digits().iter().rev() {
                y = (y + rat(d as i64, 1)) / p.clone();
            }
            y
        };
        (apply(&BigRational::zero()), apply(&BigRational::one()))
    }

    #[test]
    fn interval_of_101() {
        let w = word(2, &[1, 0, 1]);
        let iv = w.interval();
        assert_eq!(iv.lo(), &rat(5, 8));
        assert_eq!(iv.hi(), &rat(6, 8));
    }

    #[test]
    fn interval_matches_branch_composition() {
        for (p, digits) in [
            (2u32, vec![1, 0, 1]),
            (3, vec![2, 0, 1, 1]),
            (5, vec![4, 0, 3]),
            (2, vec![0]),
            (7, vec![6, 6, 6, 6]),
        ] {
            let w = word(p, &digits);
            let iv = w.interval();
            let (lo, hi) = branch_composition_interval(&w);
            assert_eq!(iv.lo(), &lo, "word {w}");
            assert_eq!(iv.hi(), &hi, "word {w}");
        }
    }

    #[test]
    fn shift_drops_leading_digit_and_maps_interval() {
        let w = word(2, &[1, 0, 1]);
        let s = w.shift().unwrap();
        assert_eq!(s.digits(), &[0, 1]);
        // f_2([5/8, 6/8]) = [5/4 - 1, 6/4 - 1] = [1/4, 2/4] = I_{01}.
        assert_eq!(s.interval().lo(), &rat(1, 4));
        assert_eq!(s.interval().hi(), &rat(2, 4));
        assert_eq!(w.interval().image_times_p().unwrap(), s.interval());
    }

    #[test]
    fn shift_depth_one_fails() {
        let err = word(2, &[1]).shift().unwrap_err();
        assert!(err.to_string().contains("cannot shift to empty word"));
    }

    #[test]
    fn prepend_selects_preimage_branch() {
        // p = 2: preimages of I_0 = [0, 1/2] are I_00 = [0, 1/4] and I_10 = [1/2, 3/4].
        let w = word(2, &[0]);
        let pre = w.preimages().unwrap();
        assert_eq!(pre[0].interval().lo(), &rat(0, 1));
        assert_eq!(pre[0].interval().hi(), &rat(1, 4));
        assert_eq!(pre[1].interval().lo(), &rat(1, 2));
        assert_eq!(pre[1].interval().hi(), &rat(3, 4));
        for q in &pre {
            assert_eq!(q.shift().unwrap(), w);
        }
    }

    #[test]
    fn children_partition_parent() {
        let w = word(3, &[2, 1]);
        let kids = w.children().unwrap();
        assert_eq!(kids[0].interval().lo(), w.interval().lo());
        assert_eq!(kids.last().unwrap().interval().hi(), w.interval().hi());
        for pair in kids.windows(2) {
            assert_eq!(pair[0].interval().hi(), pair[1].interval().lo());
        }
        let total: BigRational = kids.iter().map(|k| k.interval().length()).sum();
        assert_eq!(total, w.interval().length());
    }

    #[test]
    fn code_point_left_endpoint_rule() {
        // 5/8 is the left endpoint of I_101 and the right endpoint of I_100.
        let w = code_point(2, &rat(5, 8), 3).unwrap();
        assert_eq!(w.digits(), &[1, 0, 1]);
        // Interior points.
        assert_eq!(code_point(2, &rat(11, 16), 3).unwrap().digits(), &[1, 0, 1]);
        // Out of range.
        assert!(code_point(2, &rat(-1, 8), 3).is_err());
        assert!(code_point(2, &rat(1, 1), 3).is_err());
    }

    #[test]
    fn index_round_trip_and_laws() {
        let w = word(3, &[1, 0, 2, 1]);
        let k = w.index();
        assert_eq!(k, BigUint::from(1 * 27 + 0 * 9 + 2 * 3 + 1u32));
        assert_eq!(Word::from_index(3, 4, &k).unwrap(), w);
        // prepend is index shift by i·p^n; append is base-p append.
        let pre = w.prepend(2).unwrap();
        assert_eq!(pre.index(), BigUint::from(2u32) * BigUint::from(3u32).pow(4) + &k);
        let app = w.append(2).unwrap();
        assert_eq!(app.index(), &k * BigUint::from(3u32) + BigUint::from(2u32));
    }

    #[test]
    fn depth_cap_enforced() {
        assert!(Word::new(2, vec![0; MAX_DEPTH]).is_ok());
        assert!(matches!(
            Word::new(2, vec![0; MAX_DEPTH + 1]),
            Err(Error::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn digit_validation() {
        assert!(matches!(Word::new(2, vec![0, 2]), Err(Error::DigitOutOfRange { .. })));
        assert!(matches!(Word::new(1, vec![0]), Err(Error::BaseTooSmall(1))));
    }

    #[test]
    fn display_and_parse() {
        let w = word(2, &[1, 0, 1]);
        assert_eq!(w.to_string(), "101");
        assert_eq!(parse_word(2, "101").unwrap(), w);
        let w36 = word(13, &[12, 0, 11]);
        assert_eq!(parse_word(13, &w36.to_string()).unwrap(), w36);
        let big = Word::new(40, vec![39, 0]).unwrap();
        assert_eq!(parse_word(40, &big.to_string()).unwrap(), big);
    }
}
