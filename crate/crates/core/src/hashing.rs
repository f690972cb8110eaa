//! Seeded k-wise independent hashing over the Mersenne prime field `2^61 - 1`.
//!
//! A degree-`k-1` polynomial with uniformly random coefficients is a k-wise
//! independent function into `Z_p`. Bucket indices keep the low `lg b` bits of
//! the value and signs keep the lowest bit; both are biased by at most `b / p`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// The field modulus `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE_61;
    let hi = (x >> 61) as u64;
    let mut r = lo + hi;
    r = (r & MERSENNE_61) + (r >> 61);
    if r >= MERSENNE_61 {
        r -= MERSENNE_61;
    }
    r
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent-looking sub-seed for `(domain, index)` from a master
/// seed. Used to give every repetition, level and code its own stream.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    let a = mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let b = mix64(a ^ domain.wrapping_mul(0xd6e8_feb8_6659_fd93));
    mix64(b ^ index.wrapping_mul(0xa076_1d64_78bd_642f).wrapping_add(1))
}

/// Random polynomial over `Z_p`; `k = coefficients.len()` gives k-wise
/// independence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHash {
    coefficients: Vec<u64>,
}

impl PolyHash {
    /// Draws `independence` coefficients uniformly from `Z_p`.
    pub fn random(independence: usize, rng: &mut impl RngCore) -> Self {
        assert!(independence >= 1);
        let coefficients = (0..independence)
            .map(|_| loop {
                // Rejection keeps the draw exactly uniform and platform independent.
                let v = rng.next_u64() >> 3;
                if v < MERSENNE_61 {
                    break v;
                }
            })
            .collect();
        PolyHash { coefficients }
    }

    pub fn from_coefficients(coefficients: Vec<u64>) -> Self {
        assert!(!coefficients.is_empty());
        let coefficients = coefficients.into_iter().map(|c| c % MERSENNE_61).collect();
        PolyHash { coefficients }
    }

    pub fn independence(&self) -> usize {
        self.coefficients.len()
    }

    /// The raw field value in `[0, p)`.
    #[inline]
    pub fn value(&self, x: u64) -> u64 {
        let x = x % MERSENNE_61;
        let mut acc = 0u64;
        for &c in self.coefficients.iter().rev() {
            acc = mul_mod(acc, x) + c;
            if acc >= MERSENNE_61 {
                acc -= MERSENNE_61;
            }
        }
        acc
    }

    /// `value(x) mod b` for a power-of-two `b`, given as `mask = b - 1`.
    #[inline]
    pub fn bucket(&self, x: u64, mask: u64) -> usize {
        (self.value(x) & mask) as usize
    }

    /// Lowest bit mapped `0 -> +1`, `1 -> -1`.
    #[inline]
    pub fn sign(&self, x: u64) -> f64 {
        if self.value(x) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SignIndependence {
    /// 2-wise independent `s1`, `s2` (the Count-Sketch requirement).
    #[default]
    Pairwise,
    /// 4-wise independent `s1`, `s2` (needed for second-moment estimates).
    FourWise,
}

impl SignIndependence {
    pub fn k(self) -> usize {
        match self {
            SignIndependence::Pairwise => 2,
            SignIndependence::FourWise => 4,
        }
    }
}

/// Decomposable splitting and sign functions on index pairs.
///
/// `split(i, j) = (h1(i) + h2(j)) mod b` and `sign(i, j) = s1(i) * s2(j)`.
pub trait PairHash: Sync {
    fn buckets(&self) -> usize;
    fn row_bucket(&self, i: usize) -> usize;
    fn col_bucket(&self, j: usize) -> usize;
    fn row_sign(&self, i: usize) -> f64;
    fn col_sign(&self, j: usize) -> f64;

    #[inline]
    fn split(&self, i: usize, j: usize) -> usize {
        (self.row_bucket(i) + self.col_bucket(j)) & (self.buckets() - 1)
    }

    #[inline]
    fn sign(&self, i: usize, j: usize) -> f64 {
        self.row_sign(i) * self.col_sign(j)
    }
}

/// `h1, h2` are 3-wise independent into `[0, b)`; `s1, s2` are 2- or 4-wise
/// independent signs. Everything is a deterministic function of the seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairHashFamily {
    seed: u64,
    buckets: usize,
    signs: SignIndependence,
    h1: PolyHash,
    h2: PolyHash,
    s1: PolyHash,
    s2: PolyHash,
}

impl PairHashFamily {
    pub fn new(seed: u64, buckets: usize, signs: SignIndependence) -> Result<Self> {
        if buckets < 2 || !buckets.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "bucket count {buckets} must be a power of two >= 2"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h1 = PolyHash::random(3, &mut rng);
        let h2 = PolyHash::random(3, &mut rng);
        let s1 = PolyHash::random(signs.k(), &mut rng);
        let s2 = PolyHash::random(signs.k(), &mut rng);
        Ok(PairHashFamily {
            seed,
            buckets,
            signs,
            h1,
            h2,
            s1,
            s2,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sign_independence(&self) -> SignIndependence {
        self.signs
    }

    pub fn row_sign_hash(&self) -> &PolyHash {
        &self.s1
    }

    pub fn col_sign_hash(&self) -> &PolyHash {
        &self.s2
    }
}

impl PairHash for PairHashFamily {
    #[inline]
    fn buckets(&self) -> usize {
        self.buckets
    }
    #[inline]
    fn row_bucket(&self, i: usize) -> usize {
        self.h1.bucket(i as u64, self.buckets as u64 - 1)
    }
    #[inline]
    fn col_bucket(&self, j: usize) -> usize {
        self.h2.bucket(j as u64, self.buckets as u64 - 1)
    }
    #[inline]
    fn row_sign(&self, i: usize) -> f64 {
        self.s1.sign(i as u64)
    }
    #[inline]
    fn col_sign(&self, j: usize) -> f64 {
        self.s2.sign(j as u64)
    }
}
