//! Binary codes `E : [n] -> {0,1}^l` with certified minimum distance.
//!
//! The default code is an affine systematic random linear code: the first
//! `m = ceil(lg n)` bits are the binary expansion of `x`, the remaining
//! `l - m` are random parities of it, and a fixed random offset is XORed onto
//! every codeword so that no index maps to the all-zero word. Differences of
//! codewords are codewords of the underlying linear code, so the minimum
//! distance is certified by enumerating the `2^m - 1` nonzero messages.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hashing::derive_seed;
use crate::sketch::Masks;
use crate::{Error, Result};

const CODE_DOMAIN: u64 = 0x434f_4445;
const ATTEMPTS: u64 = 32;
const GROWTH_ROUNDS: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    /// Scan of all `n` codewords.
    #[default]
    NearestCodeword,
    /// Greedy message-bit flipping, verified against the codeword and falling
    /// back to the full scan when no candidate within radius is found.
    BitFlip,
}

/// Length and tolerated error fraction `delta = num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeParams {
    /// `None` selects `4 * ceil(lg n)`, lengthened if no certified code of
    /// that length turns up.
    pub len: Option<usize>,
    pub delta_num: u32,
    pub delta_den: u32,
}

impl Default for CodeParams {
    fn default() -> Self {
        CodeParams {
            len: None,
            delta_num: 1,
            delta_den: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code {
    n: usize,
    msg_bits: usize,
    len: usize,
    delta: (u32, u32),
    seed: Option<u64>,
    words_per: usize,
    table: Vec<u64>,
    min_distance: usize,
    decoder: DecoderKind,
}

fn message_bits(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn check_delta(num: u32, den: u32) -> Result<()> {
    if num == 0 || den == 0 || num >= den {
        return Err(Error::InvalidParameter(format!("delta = {num}/{den} must lie in (0, 1)")));
    }
    Ok(())
}

/// Generator of one candidate code.
struct Generator {
    offset: Vec<u64>,
    parity: Vec<u64>,
}

impl Generator {
    fn draw(m: usize, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = len.div_ceil(64);
        let mut offset: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
        if len % 64 != 0 {
            offset[words - 1] &= (1u64 << (len % 64)) - 1;
        }
        let msg_mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let parity = (m..len).map(|_| rng.random::<u64>() & msg_mask).collect();
        Generator { offset, parity }
    }

    /// Weight of the linear (offset-free) codeword of `x`.
    fn linear_weight(&self, x: u64) -> usize {
        x.count_ones() as usize + self.parity.iter().filter(|&&p| (p & x).count_ones() % 2 == 1).count()
    }

    fn encode_into(&self, m: usize, x: u64, out: &mut [u64]) {
        out.copy_from_slice(&self.offset);
        out[0] ^= x;
        for (r, &p) in self.parity.iter().enumerate() {
            if (p & x).count_ones() % 2 == 1 {
                let bit = m + r;
                out[bit / 64] ^= 1 << (bit % 64);
            }
        }
    }
}

impl Code {
    /// Searches seeded candidates until one has minimum distance `> 2 delta l`.
    pub fn new(n: usize, params: &CodeParams, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("code domain must be non-empty".into()));
        }
        check_delta(params.delta_num, params.delta_den)?;
        let m = message_bits(n);
        let lengths: Vec<usize> = match params.len {
            Some(len) => vec![len],
            None => (0..GROWTH_ROUNDS).map(|g| (4 + g) * m).collect(),
        };
        let mut attempt = 0u64;
        let mut last_len = 0;
        for len in lengths {
            last_len = len;
            for _ in 0..ATTEMPTS {
                let s = derive_seed(seed, CODE_DOMAIN, attempt);
                attempt += 1;
                match Self::from_seed(n, len, params.delta_num, params.delta_den, s) {
                    Ok(code) => return Ok(code),
                    Err(Error::CodeConstruction { reason, .. }) if reason.starts_with("minimum distance") => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Err(Error::CodeConstruction {
            n,
            length: last_len,
            reason: format!("no certified code found in {attempt} attempts"),
        })
    }

    /// Rebuilds the candidate drawn from `seed` (as reported by
    /// [`seed`](Self::seed)) and certifies it.
    pub fn from_seed(n: usize, len: usize, delta_num: u32, delta_den: u32, seed: u64) -> Result<Self> {
        check_delta(delta_num, delta_den)?;
        let m = message_bits(n);
        if n == 0 || m > 32 {
            return Err(Error::InvalidParameter(format!("code domain size {n} unsupported")));
        }
        if len < m {
            return Err(Error::CodeConstruction {
                n,
                length: len,
                reason: format!("length {len} is shorter than the {m} message bits"),
            });
        }
        let g = Generator::draw(m, len, seed);
        let min_distance = if m == 0 {
            len
        } else {
            (1..1u64 << m).map(|x| g.linear_weight(x)).min().unwrap_or(len)
        };
        if m > 0 && (min_distance as u64) * (delta_den as u64) <= 2 * delta_num as u64 * len as u64 {
            return Err(Error::CodeConstruction {
                n,
                length: len,
                reason: format!("minimum distance {min_distance} is not above 2*delta*{len}"),
            });
        }
        let words_per = len.div_ceil(64).max(1);
        let mut table = vec![0u64; n * words_per];
        if len > 0 {
            for (x, out) in table.chunks_exact_mut(words_per).enumerate() {
                g.encode_into(m, x as u64, out);
            }
        }
        Ok(Code {
            n,
            msg_bits: m,
            len,
            delta: (delta_num, delta_den),
            seed: Some(seed),
            words_per,
            table,
            min_distance,
            decoder: DecoderKind::default(),
        })
    }

    /// A code with explicitly given codewords; rejects duplicate words and
    /// insufficient distance.
    pub fn from_codewords(words: &[Vec<bool>], delta_num: u32, delta_den: u32) -> Result<Self> {
        check_delta(delta_num, delta_den)?;
        let n = words.len();
        let len = words.first().map_or(0, Vec::len);
        if n == 0 || words.iter().any(|w| w.len() != len) {
            return Err(Error::InvalidParameter("codewords must be non-empty and of equal length".into()));
        }
        let words_per = len.div_ceil(64).max(1);
        let mut table = vec![0u64; n * words_per];
        for (x, w) in words.iter().enumerate() {
            for (r, &bit) in w.iter().enumerate() {
                if bit {
                    table[x * words_per + r / 64] |= 1 << (r % 64);
                }
            }
        }
        let mut code = Code {
            n,
            msg_bits: message_bits(n),
            len,
            delta: (delta_num, delta_den),
            seed: None,
            words_per,
            table,
            min_distance: len,
            decoder: DecoderKind::default(),
        };
        let mut min = len;
        for x in 0..n {
            for y in x + 1..n {
                min = min.min(code.distance_packed(code.packed(x), code.packed(y)));
            }
        }
        if n > 1 && (min as u64) * (delta_den as u64) <= 2 * delta_num as u64 * len as u64 {
            return Err(Error::CodeConstruction {
                n,
                length: len,
                reason: format!("minimum distance {min} is not above 2*delta*{len}"),
            });
        }
        code.min_distance = min;
        Ok(code)
    }

    pub fn with_decoder(mut self, decoder: DecoderKind) -> Self {
        self.decoder = decoder;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn delta(&self) -> (u32, u32) {
        self.delta
    }

    /// Seed that regenerates this code through [`from_seed`](Self::from_seed);
    /// `None` for codes given explicitly.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn decoder(&self) -> DecoderKind {
        self.decoder
    }

    /// Certified minimum pairwise distance (`len` when `n = 1`).
    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    /// Decoding radius `floor(delta * len)`.
    pub fn radius(&self) -> usize {
        (self.delta.0 as u64 * self.len as u64 / self.delta.1 as u64) as usize
    }

    pub fn words_per_codeword(&self) -> usize {
        self.words_per
    }

    /// Packed codeword of `x`: bit `r` lives at bit `r % 64` of word `r / 64`.
    pub fn packed(&self, x: usize) -> &[u64] {
        &self.table[x * self.words_per..(x + 1) * self.words_per]
    }

    pub fn bit(&self, x: usize, r: usize) -> bool {
        self.table[x * self.words_per + r / 64] >> (r % 64) & 1 == 1
    }

    pub fn codeword(&self, x: usize) -> Vec<bool> {
        (0..self.len).map(|r| self.bit(x, r)).collect()
    }

    fn distance_packed(&self, a: &[u64], b: &[u64]) -> usize {
        a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum()
    }

    pub fn distance(&self, x: usize, word: &[bool]) -> usize {
        word.iter().enumerate().filter(|&(r, &w)| self.bit(x, r) != w).count()
    }

    /// Index whose codeword lies within the decoding radius of `word`.
    pub fn decode(&self, word: &[bool]) -> Result<Option<usize>> {
        if word.len() != self.len {
            return Err(Error::LengthMismatch {
                left: word.len(),
                right: self.len,
            });
        }
        let mut packed = vec![0u64; self.words_per];
        for (r, &b) in word.iter().enumerate() {
            if b {
                packed[r / 64] |= 1 << (r % 64);
            }
        }
        Ok(self.decode_packed(&packed))
    }

    /// [`decode`](Self::decode) for a packed word of
    /// [`words_per_codeword`](Self::words_per_codeword) words.
    pub fn decode_packed(&self, word: &[u64]) -> Option<usize> {
        match self.decoder {
            DecoderKind::NearestCodeword => self.decode_nearest(word),
            DecoderKind::BitFlip => self.decode_bit_flip(word).or_else(|| self.decode_nearest(word)),
        }
    }

    fn decode_nearest(&self, word: &[u64]) -> Option<usize> {
        if self.n == 1 {
            return (self.distance_packed(word, self.packed(0)) <= self.radius()).then_some(0);
        }
        let radius = self.radius();
        (0..self.n).find(|&x| self.distance_packed(word, self.packed(x)) <= radius)
    }

    /// Reads the systematic bits, then greedily flips the message bit that
    /// brings the re-encoded word closest, up to `radius` times.
    fn decode_bit_flip(&self, word: &[u64]) -> Option<usize> {
        let m = self.msg_bits;
        let radius = self.radius();
        if self.seed.is_none() || m == 0 {
            return None;
        }
        let offset_bits = self.offset_message_bits();
        let mut x = (word[0] ^ offset_bits) & ((1u64 << m) - 1);
        let dist = |x: u64| -> usize {
            if (x as usize) < self.n {
                self.distance_packed(word, self.packed(x as usize))
            } else {
                usize::MAX
            }
        };
        let mut cur = dist(x);
        for _ in 0..=radius {
            if cur <= radius {
                return Some(x as usize);
            }
            let best = (0..m).map(|b| x ^ (1 << b)).min_by_key(|&y| dist(y))?;
            let d = dist(best);
            if d >= cur {
                return None;
            }
            x = best;
            cur = d;
        }
        (cur <= radius).then_some(x as usize)
    }

    /// Offset on the systematic part, i.e. the codeword of 0 restricted to
    /// the message bits.
    fn offset_message_bits(&self) -> u64 {
        let m = self.msg_bits;
        self.table[0] & ((1u64 << m) - 1)
    }
}

impl Masks for Code {
    fn width(&self) -> usize {
        self.len
    }
    fn bit(&self, index: usize, r: usize) -> bool {
        Code::bit(self, index, r)
    }
}
