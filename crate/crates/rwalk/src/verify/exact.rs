//! Exact accumulation of `f64` sums.
//!
//! Ensemble determinism requires reductions whose results do not depend on
//! how the work was split.  Compensated summation is not enough: two merge
//! orders can disagree in the last bit.  [`ExactSum`] instead keeps the
//! running sum as a fixed-point integer spanning the entire double range
//! (a small superaccumulator), so addition is exact, merging is exactly
//! associative and commutative, and [`ExactSum::value`] rounds the one true
//! real number to nearest-even.  Sums of any finite inputs, in any order and
//! any grouping, produce the same bits.

/// 32 value bits per limb; the value is `Σ limbs[j]·2^{32j−1074}` with the
/// top limb carrying the sign.  68 limbs cover products of full-range
/// doubles plus carry headroom for 2³⁰ unnormalized additions.
const LIMBS: usize = 68;
const MASK: i64 = 0xFFFF_FFFF;
/// Normalize after this many additions so limbs stay far from i64 overflow.
const PENDING_LIMIT: u32 = 1 << 30;

/// An exact, order-independent sum of `f64` values.
#[derive(Clone, Debug)]
pub struct ExactSum {
    limbs: Box<[i64; LIMBS]>,
    pending: u32,
    /// Accumulates non-finite inputs by ordinary addition; zero means none.
    nonfinite: f64,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    /// The empty sum.
    pub fn new() -> Self {
        ExactSum {
            limbs: Box::new([0; LIMBS]),
            pending: 0,
            nonfinite: 0.0,
        }
    }

    /// Add one value, exactly.
    pub fn add(&mut self, x: f64) {
        if !x.is_finite() {
            self.nonfinite += x;
            return;
        }
        if x == 0.0 {
            return;
        }
        if self.pending >= PENDING_LIMIT {
            self.normalize();
        }
        self.pending += 1;
        let bits = x.to_bits();
        let negative = bits >> 63 != 0;
        let e = ((bits >> 52) & 0x7FF) as u64;
        let frac = bits & ((1u64 << 52) - 1);
        // x = mant · 2^(off − 1074); subnormals sit at offset 0.
        let (mant, off) = if e == 0 { (frac, 0) } else { (frac | (1 << 52), e - 1) };
        let j = (off / 32) as usize;
        let wide = (mant as u128) << (off % 32);
        let parts = [
            (wide & MASK as u128) as i64,
            ((wide >> 32) & MASK as u128) as i64,
            ((wide >> 64) & MASK as u128) as i64,
        ];
        for (k, part) in parts.into_iter().enumerate() {
            if negative {
                self.limbs[j + k] -= part;
            } else {
                self.limbs[j + k] += part;
            }
        }
    }

    /// Fold another sum in; exactly equivalent to having added its inputs.
    pub fn merge(&mut self, other: &ExactSum) {
        self.normalize();
        let mut rhs = other.clone();
        rhs.normalize();
        for j in 0..LIMBS {
            self.limbs[j] += rhs.limbs[j];
        }
        self.pending = 1;
        self.nonfinite += rhs.nonfinite;
    }

    /// Carry-propagate so every limb is in `[0, 2³²)` (top limb signed).
    fn normalize(&mut self) {
        let mut carry = 0i64;
        for j in 0..LIMBS - 1 {
            let v = self.limbs[j] + carry;
            self.limbs[j] = v & MASK;
            carry = v >> 32;
        }
        self.limbs[LIMBS - 1] += carry;
        self.pending = 0;
    }

    /// The sum, rounded to nearest-even; the unique correctly rounded
    /// double of the exact real value, whatever the addition order was.
    pub fn value(&self) -> f64 {
        if self.nonfinite != 0.0 || self.nonfinite.is_nan() {
            return self.nonfinite;
        }
        let mut limbs = *self.limbs;
        carry_pass(&mut limbs);
        let negative = limbs[LIMBS - 1] < 0;
        if negative {
            for l in limbs.iter_mut() {
                *l = -*l;
            }
            carry_pass(&mut limbs);
        }
        let top = match limbs.iter().rposition(|&l| l != 0) {
            None => return 0.0,
            Some(j) => j,
        };
        let msb = 63 - (limbs[top] as u64).leading_zeros() as u64;
        let mut pos = 32 * top as u64 + msb;
        if pos <= 52 {
            // At most 53 bits above the subnormal LSB: exactly representable.
            let m = ((limbs[1] as u64) << 32) | limbs[0] as u64;
            let small = m as f64 * f64::from_bits(1);
            return if negative { -small } else { small };
        }
        let window = |j: isize| -> u128 {
            if j < 0 { 0 } else { limbs[j as usize] as u128 }
        };
        let w = (window(top as isize) << 64)
            | (window(top as isize - 1) << 32)
            | window(top as isize - 2);
        let base = 32 * (top as i64 - 2);
        let shift = (pos as i64 - 52 - base) as u32;
        let mut mant = (w >> shift) as u64;
        let round = (w >> (shift - 1)) & 1 == 1;
        let mut sticky = w & ((1u128 << (shift - 1)) - 1) != 0;
        if top >= 3 {
            sticky |= limbs[..top - 2].iter().any(|&l| l != 0);
        }
        if round && (sticky || mant & 1 == 1) {
            mant += 1;
            if mant == 1 << 53 {
                mant >>= 1;
                pos += 1;
            }
        }
        if pos > 2097 {
            return if negative { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        // mant ∈ [2⁵², 2⁵³): a normal double times an exact power of two.
        // The scale itself is subnormal for results near the bottom of the
        // normal range; both encodings are exact.
        let k = pos as i64 - 52 - 1074;
        let scale = if k >= -1022 {
            f64::from_bits(((k + 1023) as u64) << 52)
        } else {
            f64::from_bits(1u64 << (k + 1074))
        };
        let out = mant as f64 * scale;
        if negative {
            -out
        } else {
            out
        }
    }
}

fn carry_pass(limbs: &mut [i64; LIMBS]) {
    let mut carry = 0i64;
    for j in 0..LIMBS - 1 {
        let v = limbs[j] + carry;
        limbs[j] = v & MASK;
        carry = v >> 32;
    }
    limbs[LIMBS - 1] += carry;
}

/// Sum a slice exactly.
pub fn exact_sum(xs: &[f64]) -> f64 {
    let mut acc = ExactSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}
