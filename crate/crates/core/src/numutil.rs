//! Small exact-arithmetic helpers shared across modules.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[cfg(test)]
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Clears denominators and divides out the content, so the result is an
/// integer vector with gcd 1. The sign is kept. Zero vectors stay zero.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut content = BigInt::zero();
    for x in &ints {
        content = content.gcd(x);
    }
    if !content.is_zero() && !content.is_one() {
        for x in &mut ints {
            *x /= &content;
        }
    }
    ints
}

/// Divides an integer vector by its content (gcd), keeping the sign.
pub fn primitive_of_integers(v: &[BigInt]) -> Vec<BigInt> {
    let mut content = BigInt::zero();
    for x in v {
        content = content.gcd(x);
    }
    if content.is_zero() || content.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &content).collect()
}

/// Canonical antipodal representative: flips the sign so the first nonzero
/// coordinate is positive.
pub fn canonical_sign(v: &mut [BigInt]) {
    for x in v.iter() {
        match x.sign() {
            Sign::Plus => return,
            Sign::Minus => break,
            Sign::NoSign => continue,
        }
    }
    for x in v.iter_mut() {
        *x = -std::mem::take(x);
    }
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative());
    n.sqrt()
}

/// Largest integer `k` with `k <= x` for rational `x`.
pub fn rat_floor(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// Largest integer `n` with `(n + c)^2 <= b`, given `b >= 0`.
/// Used for exact Fincke-Pohst interval bounds.
pub fn floor_of_sqrt_shifted(b: &BigRational, c: &BigRational) -> BigInt {
    debug_assert!(!b.is_negative());
    // Exactly floor(sqrt(b) - c): with b = p/q and c = u/w this is
    // floor((w*sqrt(p*q) - u*q) / (q*w)). The integer square root
    // underestimates w*sqrt(p*q) by less than one, which can pull the
    // quotient's floor down by at most one; a single exact check settles it.
    let (p, q) = (b.numer(), b.denom());
    let (u, w) = (c.numer(), c.denom());
    let s = isqrt(&(w * w * p * q));
    let n = (s - u * q).div_floor(&(q * w));
    let up = &n + BigInt::one();
    let t = BigRational::from_integer(up.clone()) + c;
    if &t * &t <= *b {
        up
    } else {
        n
    }
}

/// Smallest integer `n` with `(n + c)^2 <= b`, given `b >= 0`.
pub fn ceil_of_neg_sqrt_shifted(b: &BigRational, c: &BigRational) -> BigInt {
    // ceil(-sqrt(b) - c) = -floor(sqrt(b) + c)
    -floor_of_sqrt_shifted(b, &-c)
}

/// The rational with the smallest denominator (then smallest numerator
/// magnitude) strictly between `lo` and `hi`. Stern-Brocot style descent;
/// keeps the coefficients of the flip bisection small.
pub fn simplest_rational_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo < hi);
    // If an integer lies strictly inside, take the one closest to lo.
    let f = rat_floor(lo);
    let candidate = BigRational::from_integer(&f + BigInt::one());
    if &candidate > lo && &candidate < hi {
        return candidate;
    }
    if lo.is_integer() {
        // (lo, hi) contains no integer and lo is one, so 0 < hi - lo <= 1.
        // The lowest-denominator rational in (0, h) is 1/k for the least k
        // with 1/k < h.
        let h = hi - lo;
        let k = rat_floor(&h.recip()) + BigInt::one();
        return BigRational::new(BigInt::one(), k) + lo;
    }
    if !f.is_zero() || lo.is_negative() {
        let base = BigRational::from_integer(f);
        return simplest_rational_between(&(lo - &base), &(hi - &base)) + base;
    }
    // Now 0 < lo < hi < 1: invert and flip.
    let inv = simplest_rational_between(&hi.recip(), &lo.recip());
    inv.recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_vector_examples() {
        let v = vec![rat(1, 2), rat(1, 3), int(0)];
        assert_eq!(
            primitive_integer_vector(&v),
            vec![BigInt::from(3), BigInt::from(2), BigInt::from(0)]
        );
        let w = vec![int(-4), int(6)];
        assert_eq!(
            primitive_integer_vector(&w),
            vec![BigInt::from(-2), BigInt::from(3)]
        );
    }

    #[test]
    fn canonical_sign_flips_leading_negative() {
        let mut v = vec![BigInt::from(0), BigInt::from(-2), BigInt::from(5)];
        canonical_sign(&mut v);
        assert_eq!(v, vec![BigInt::from(0), BigInt::from(2), BigInt::from(-5)]);
    }

    #[test]
    fn sqrt_shifted_small_radicand_far_shift() {
        // b < 1 with the feasible interval far from zero: the naive
        // isqrt(floor(b)) estimate starts below the interval and a step-wise
        // fix-up never terminates.
        assert_eq!(
            floor_of_sqrt_shifted(&rat(9, 196), &rat(45, 14)),
            BigInt::from(-3)
        );
        // empty ranges must come out inverted (lo > hi)
        let lo = ceil_of_neg_sqrt_shifted(&rat(1, 100), &rat(1, 2));
        let hi = floor_of_sqrt_shifted(&rat(1, 100), &rat(1, 2));
        assert!(lo > hi);
    }

    #[test]
    fn sqrt_shifted_exhaustive_small() {
        for bn in 0..40i64 {
            for bd in 1..8i64 {
                for cn in -25..25i64 {
                    for cd in 1..6i64 {
                        let b = rat(bn, bd);
                        let c = rat(cn, cd);
                        let n = floor_of_sqrt_shifted(&b, &c);
                        let f = |k: &BigInt| {
                            let t = BigRational::from_integer(k.clone()) + &c;
                            &t * &t <= b
                        };
                        let above = &n + BigInt::one();
                        // n + c <= sqrt(b) and n+1 + c > sqrt(b)
                        let t = BigRational::from_integer(n.clone()) + &c;
                        assert!(t <= BigRational::zero() || f(&n), "b={b} c={c}");
                        let ta = BigRational::from_integer(above.clone()) + &c;
                        assert!(ta > BigRational::zero() && !f(&above), "b={b} c={c}");
                    }
                }
            }
        }
    }

    #[test]
    fn sqrt_shifted_bounds() {
        // (n + 1/2)^2 <= 10 -> n <= 2 (2.5^2 = 6.25, 3.5^2 = 12.25)
        assert_eq!(floor_of_sqrt_shifted(&int(10), &rat(1, 2)), BigInt::from(2));
        assert_eq!(
            ceil_of_neg_sqrt_shifted(&int(10), &rat(1, 2)),
            BigInt::from(-3)
        );
    }

    #[test]
    fn simplest_rational_small_denominators() {
        let x = simplest_rational_between(&rat(1, 3), &rat(1, 2));
        assert_eq!(x, rat(2, 5));
        let y = simplest_rational_between(&rat(5, 2), &rat(7, 2));
        assert_eq!(y, int(3));
        let z = simplest_rational_between(&rat(-3, 2), &rat(-4, 3));
        assert!(z > rat(-3, 2) && z < rat(-4, 3));
        assert_eq!(z, rat(-7, 5));
    }
}
