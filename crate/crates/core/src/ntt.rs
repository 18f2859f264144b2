//! Exact convolution of nonnegative integer vectors by number-theoretic
//! transforms over two primes `< 2^32` with CRT reconstruction.

use rayon::join;

pub(crate) const P1: u64 = 3_221_225_473; // 3·2^30 + 1
const G1: u64 = 5;
pub(crate) const P2: u64 = 3_489_660_929; // 13·2^28 + 1
const G2: u64 = 3;

/// Largest supported transform length.
pub(crate) const MAX_LEN: usize = 1 << 28;

/// Exclusive bound on values that survive reconstruction.
pub(crate) const MODULUS_PRODUCT: u128 = P1 as u128 * P2 as u128;

fn pow_mod<const P: u64>(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= P;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % P;
        }
        base = base * base % P;
        exp >>= 1;
    }
    acc
}

fn transform<const P: u64, const G: u64>(a: &mut [u64], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }

    let mut twiddles = Vec::with_capacity(n / 2);
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod::<P>(G, (P - 1) / len as u64);
        if invert {
            w = pow_mod::<P>(w, P - 2);
        }
        let half = len / 2;
        twiddles.clear();
        let mut cur = 1u64;
        for _ in 0..half {
            twiddles.push(cur);
            cur = cur * w % P;
        }
        for block in a.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for ((x, y), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let u = *x;
                let v = *y * tw % P;
                *x = if u + v >= P { u + v - P } else { u + v };
                *y = if u >= v { u - v } else { u + P - v };
            }
        }
        len <<= 1;
    }

    if invert {
        let inv_n = pow_mod::<P>(n as u64, P - 2);
        for x in a.iter_mut() {
            *x = *x * inv_n % P;
        }
    }
}

fn padded<const P: u64>(v: &[u64], len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for (o, &x) in out.iter_mut().zip(v) {
        *o = x % P;
    }
    out
}

/// Residues of a vector under one prime, kept in transformed form.
struct Spectrum<const P: u64, const G: u64>(Vec<u64>);

impl<const P: u64, const G: u64> Spectrum<P, G> {
    fn of(v: &[u64], len: usize) -> Self {
        let mut a = padded::<P>(v, len);
        transform::<P, G>(&mut a, false);
        Self(a)
    }

    fn product(&self, other: &Self, keep: usize) -> Vec<u64> {
        let mut c: Vec<u64> = self.0.iter().zip(&other.0).map(|(x, y)| x * y % P).collect();
        transform::<P, G>(&mut c, true);
        c.truncate(keep);
        c
    }
}

fn crt(r1: u64, r2: u64, inv: u64) -> u128 {
    // x = r1 + P1·((r2 − r1)·P1⁻¹ mod P2)
    let diff = (r2 + P2 - r1 % P2) % P2;
    let k = diff * inv % P2;
    r1 as u128 + P1 as u128 * k as u128
}

/// Transform length for a product truncated to `keep` entries.
pub(crate) fn length_for(keep: usize) -> usize {
    (2 * keep).next_power_of_two().max(1)
}

/// Exact `(a * b)[0..keep]`; every true entry must be `< MODULUS_PRODUCT`.
pub(crate) fn convolve(a: &[u64], b: &[u64], keep: usize) -> Vec<u64> {
    let len = length_for(keep);
    assert!(len <= MAX_LEN, "transform length {len} exceeds 2^28");
    let a = &a[..a.len().min(keep)];
    let b = &b[..b.len().min(keep)];
    let square = std::ptr::eq(a, b);
    let (c1, c2) = join(
        || {
            let fa = Spectrum::<P1, G1>::of(a, len);
            if square {
                fa.product(&fa, keep)
            } else {
                fa.product(&Spectrum::of(b, len), keep)
            }
        },
        || {
            let fa = Spectrum::<P2, G2>::of(a, len);
            if square {
                fa.product(&fa, keep)
            } else {
                fa.product(&Spectrum::of(b, len), keep)
            }
        },
    );
    let inv = pow_mod::<P2>(P1 % P2, P2 - 2);
    c1.iter()
        .zip(&c2)
        .map(|(&x, &y)| {
            let v = crt(x, y, inv);
            debug_assert!(v < u64::MAX as u128);
            v as u64
        })
        .collect()
}
