//! Count-Sketch of a matrix product computed one outer product at a time.
//!
//! For repetition `t` with hash family `(h1, h2, s1, s2)`, column `k` of `A`
//! becomes the polynomial `sum_i s1(i) A[i,k] x^h1(i)` and row `k` of `B`
//! becomes `sum_j s2(j) B[k,j] x^h2(j)`. Their product modulo `x^b - 1` is
//! exactly the Count-Sketch of the outer product under
//! `h(i, j) = h1(i) + h2(j) mod b`, `s(i, j) = s1(i) s2(j)`. Products are
//! accumulated in the Fourier basis and transformed back once per repetition.

use num_complex::Complex64;

use crate::fft::FftPlan;
use crate::hashing::{derive_seed, PairHash, PairHashFamily, PolyHash, SignIndependence};
use crate::matrix::{DenseMatrix, Operand};
use crate::{Error, Exec, Result};

const SKETCH_DOMAIN: u64 = 0x534b_4554_4348;

/// Largest `n1 * n3` that [`SketchSet::decompress_all`] materialises.
pub const DEFAULT_DENSE_CAP: usize = 1 << 26;

/// Bucket count, repetition count, master seed and sign independence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SketchParams {
    buckets: usize,
    reps: usize,
    seed: u64,
    signs: SignIndependence,
}

impl SketchParams {
    /// `requested_buckets` is rounded up to the next power of two; see
    /// [`buckets`](Self::buckets) for the effective value.
    pub fn new(requested_buckets: usize, reps: usize, seed: u64) -> Result<Self> {
        if requested_buckets < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 buckets, got {requested_buckets}"
            )));
        }
        if reps == 0 {
            return Err(Error::InvalidParameter("need at least one repetition".into()));
        }
        let buckets = requested_buckets
            .checked_next_power_of_two()
            .ok_or_else(|| Error::InvalidParameter(format!("{requested_buckets} buckets is too many")))?;
        Ok(SketchParams {
            buckets,
            reps,
            seed,
            signs: SignIndependence::Pairwise,
        })
    }

    pub fn with_signs(mut self, signs: SignIndependence) -> Self {
        self.signs = signs;
        self
    }

    /// `max(1, 6 * ceil(lg max(n1, n3)))`.
    pub fn default_reps(n1: usize, n3: usize) -> usize {
        let n = n1.max(n3).max(1);
        let lg = usize::BITS - (n - 1).leading_zeros();
        (6 * lg as usize).max(1)
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn signs(&self) -> SignIndependence {
        self.signs
    }

    /// Hash family of repetition `t`.
    pub fn family(&self, t: usize) -> PairHashFamily {
        PairHashFamily::new(derive_seed(self.seed, SKETCH_DOMAIN, t as u64), self.buckets, self.signs)
            .expect("bucket count validated at construction")
    }

    pub fn families(&self) -> Vec<PairHashFamily> {
        (0..self.reps).map(|t| self.family(t)).collect()
    }
}

/// Per-index membership bits that restrict which rows (or columns) a masked
/// family sketches. Family `r` keeps index `x` iff `bit(x, r)`.
pub trait Masks: Sync {
    fn width(&self) -> usize;
    fn bit(&self, index: usize, r: usize) -> bool;
}

/// No masked families.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoMasks;

impl Masks for NoMasks {
    fn width(&self) -> usize {
        0
    }
    fn bit(&self, _: usize, _: usize) -> bool {
        false
    }
}

pub(crate) fn check_dims<A: Operand, B: Operand>(a: &A, b: &B) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Builds, for every hash family, `1 + row_masks.width() + col_masks.width()`
/// coefficient vectors of length `b`: the sketch of `AB`, then the sketches of
/// `(I_r A) B` for each row mask, then `A (B I_r)` for each column mask.
///
/// Returns one flat vector per family.
pub(crate) fn sketch_engine<A, B, H, RM, CM>(
    a: &A,
    b: &B,
    families: &[H],
    row_masks: &RM,
    col_masks: &CM,
    exec: Exec,
) -> Result<Vec<Vec<f64>>>
where
    A: Operand,
    B: Operand,
    H: PairHash,
    RM: Masks,
    CM: Masks,
{
    check_dims(a, b)?;
    let Some(first) = families.first() else {
        return Ok(Vec::new());
    };
    let buckets = first.buckets();
    if families.iter().any(|f| f.buckets() != buckets) {
        return Err(Error::InvalidParameter("families disagree on bucket count".into()));
    }
    let plan = FftPlan::new(buckets)?;
    Ok(exec.map(families.len(), |t| {
        sketch_one_family(a, b, &families[t], row_masks, col_masks, &plan)
    }))
}

struct Term {
    bucket: usize,
    value: f64,
    index: usize,
}

fn sketch_one_family<A, B, H, RM, CM>(
    a: &A,
    b: &B,
    hash: &H,
    row_masks: &RM,
    col_masks: &CM,
    plan: &FftPlan,
) -> Vec<f64>
where
    A: Operand,
    B: Operand,
    H: PairHash,
    RM: Masks,
    CM: Masks,
{
    let nb = plan.len();
    let (lr, lc) = (row_masks.width(), col_masks.width());
    // Polynomial slots: 0 = A unmasked, 1..=lr = A row-masked,
    // lr+1 = B unmasked, lr+2.. = B column-masked.
    let a_slots = 1 + lr;
    let slots = a_slots + 1 + lc;
    let families = 1 + lr + lc;
    let zero = Complex64::new(0.0, 0.0);

    let mut acc = vec![zero; families * nb];
    let mut spectra = vec![zero; slots * nb];
    let mut buf = vec![zero; nb];
    let mut present = vec![false; slots];
    let mut a_terms: Vec<Term> = Vec::new();
    let mut b_terms: Vec<Term> = Vec::new();

    for k in 0..a.ncols() {
        a_terms.clear();
        a.for_each_in_column(k, |i, v| {
            a_terms.push(Term {
                bucket: hash.row_bucket(i),
                value: hash.row_sign(i) * v,
                index: i,
            })
        });
        if a_terms.is_empty() {
            continue;
        }
        b_terms.clear();
        b.for_each_in_row(k, |j, v| {
            b_terms.push(Term {
                bucket: hash.col_bucket(j),
                value: hash.col_sign(j) * v,
                index: j,
            })
        });
        if b_terms.is_empty() {
            continue;
        }

        present.fill(false);
        present[0] = true;
        present[a_slots] = true;
        for r in 0..lr {
            present[1 + r] = a_terms.iter().any(|t| row_masks.bit(t.index, r));
        }
        for r in 0..lc {
            present[a_slots + 1 + r] = b_terms.iter().any(|t| col_masks.bit(t.index, r));
        }

        let fill = |slot: usize, out: &mut [Complex64], imag: bool| {
            let (terms, mask): (&[Term], Option<(&dyn Masks, usize)>) = if slot < a_slots {
                (&a_terms, (slot > 0).then(|| (row_masks as &dyn Masks, slot - 1)))
            } else {
                let r = slot - a_slots;
                (&b_terms, (r > 0).then(|| (col_masks as &dyn Masks, r - 1)))
            };
            for t in terms {
                if mask.is_none_or(|(m, r)| m.bit(t.index, r)) {
                    if imag {
                        out[t.bucket].im += t.value;
                    } else {
                        out[t.bucket].re += t.value;
                    }
                }
            }
        };

        // Transform the real polynomials two at a time; the unmasked pair
        // goes first so that family 0 is computed exactly as without masks.
        let mut live = [0, a_slots]
            .into_iter()
            .chain((1..slots).filter(|&s| s != a_slots && present[s]));
        while let Some(s1) = live.next() {
            let s2 = live.next();
            buf.fill(zero);
            fill(s1, &mut buf, false);
            if let Some(s2) = s2 {
                fill(s2, &mut buf, true);
            }
            match s2 {
                Some(s2) => {
                    let (d1, d2) = two_blocks(&mut spectra, nb, s1, s2);
                    plan.forward_real_pair(&mut buf, |z, x, y| {
                        d1[z] = x;
                        d2[z] = y;
                    });
                }
                None => {
                    let d1 = &mut spectra[s1 * nb..(s1 + 1) * nb];
                    plan.forward_real_pair(&mut buf, |z, x, _| d1[z] = x);
                }
            }
        }

        let pa = &spectra[..nb];
        let pb = &spectra[a_slots * nb..(a_slots + 1) * nb];
        for z in 0..nb {
            acc[z] += pa[z] * pb[z];
        }
        for r in 0..lr {
            if present[1 + r] {
                let pr = &spectra[(1 + r) * nb..(2 + r) * nb];
                let dst = &mut acc[(1 + r) * nb..(2 + r) * nb];
                for z in 0..nb {
                    dst[z] += pr[z] * pb[z];
                }
            }
        }
        for r in 0..lc {
            let slot = a_slots + 1 + r;
            if present[slot] {
                let pr = &spectra[slot * nb..(slot + 1) * nb];
                let dst = &mut acc[(1 + lr + r) * nb..(2 + lr + r) * nb];
                for z in 0..nb {
                    dst[z] += pa[z] * pr[z];
                }
            }
        }
    }
    drop(spectra);
    drop(buf);

    let mut out = Vec::with_capacity(families * nb);
    for f in 0..families {
        let block = &mut acc[f * nb..(f + 1) * nb];
        plan.inverse_in_place(block);
        out.extend(block.iter().map(|c| c.re));
    }
    out
}

/// Disjoint mutable blocks `x` and `y` (`x != y`) of length `nb`.
fn two_blocks<T>(v: &mut [T], nb: usize, x: usize, y: usize) -> (&mut [T], &mut [T]) {
    if x < y {
        let (lo, hi) = v.split_at_mut(y * nb);
        (&mut lo[x * nb..(x + 1) * nb], &mut hi[..nb])
    } else {
        let (lo, hi) = v.split_at_mut(x * nb);
        (&mut hi[..nb], &mut lo[y * nb..(y + 1) * nb])
    }
}

/// `d` Count-Sketch coefficient vectors of `AB`.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchSet {
    dims: (usize, usize, usize),
    params: SketchParams,
    families: Vec<PairHashFamily>,
    coeffs: Vec<f64>,
}

/// Median of the per-repetition estimates `X_t = s(i, j) c_t[h(i, j)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryEstimate {
    pub value: f64,
    pub per_rep: Vec<f64>,
}

/// Median; for an even count, the mean of the two central order statistics.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn compressed_product<A: Operand, B: Operand>(a: &A, b: &B, params: &SketchParams) -> Result<SketchSet> {
    compressed_product_with(a, b, params, Exec::default())
}

pub fn compressed_product_with<A: Operand, B: Operand>(
    a: &A,
    b: &B,
    params: &SketchParams,
    exec: Exec,
) -> Result<SketchSet> {
    let families = params.families();
    let blocks = sketch_engine(a, b, &families, &NoMasks, &NoMasks, exec)?;
    Ok(SketchSet {
        dims: (a.nrows(), a.ncols(), b.ncols()),
        params: *params,
        families,
        coeffs: blocks.concat(),
    })
}

/// Sketch coefficient vectors of `AB` under caller-supplied hash families, one
/// vector per family. [`compressed_product`] is this with the families derived
/// from [`SketchParams`].
pub fn sketch_with_families<A: Operand, B: Operand, H: PairHash>(
    a: &A,
    b: &B,
    families: &[H],
    exec: Exec,
) -> Result<Vec<Vec<f64>>> {
    sketch_engine(a, b, families, &NoMasks, &NoMasks, exec)
}

impl SketchSet {
    /// Reassembles a sketch from stored coefficients (`reps * buckets` values,
    /// repetition-major).
    pub fn from_parts(dims: (usize, usize, usize), params: SketchParams, coeffs: Vec<f64>) -> Result<Self> {
        let want = params.reps() * params.buckets();
        if coeffs.len() != want {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: want,
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sketch coefficient".into()));
        }
        Ok(SketchSet {
            dims,
            families: params.families(),
            params,
            coeffs,
        })
    }

    /// `(n1, n2, n3)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn families(&self) -> &[PairHashFamily] {
        &self.families
    }

    pub fn coefficients(&self, t: usize) -> &[f64] {
        let b = self.params.buckets();
        &self.coeffs[t * b..(t + 1) * b]
    }

    pub fn all_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        let (n1, _, n3) = self.dims;
        if i >= n1 || j >= n3 {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: n1,
                cols: n3,
            });
        }
        Ok(())
    }

    /// Estimate of `(AB)[i, j]` (0-based).
    pub fn decompress(&self, i: usize, j: usize) -> Result<EntryEstimate> {
        self.check_index(i, j)?;
        let per_rep: Vec<f64> = self
            .families
            .iter()
            .enumerate()
            .map(|(t, f)| f.sign(i, j) * self.coefficients(t)[f.split(i, j)])
            .collect();
        Ok(EntryEstimate {
            value: median(&per_rep),
            per_rep,
        })
    }

    pub fn decompress_all(&self) -> Result<DenseMatrix> {
        self.decompress_all_with(DEFAULT_DENSE_CAP, Exec::default())
    }

    /// Materialises every estimate, refusing when `n1 * n3 > cap`.
    pub fn decompress_all_with(&self, cap: usize, exec: Exec) -> Result<DenseMatrix> {
        let (n1, _, n3) = self.dims;
        let entries = n1.saturating_mul(n3);
        if entries > cap {
            return Err(Error::MemoryCap { entries, cap });
        }
        let d = self.params.reps();
        let b = self.params.buckets();
        // Column hashes are shared by every row.
        let col: Vec<(usize, f64)> = (0..n3)
            .flat_map(|j| self.families.iter().map(move |f| (f.col_bucket(j), f.col_sign(j))))
            .collect();
        let mut data = vec![0.0; entries];
        exec.for_each_chunk_mut(&mut data, n3.max(1), |i, row| {
            let rh: Vec<(usize, f64)> = self.families.iter().map(|f| (f.row_bucket(i), f.row_sign(i))).collect();
            let mut xs = vec![0.0; d];
            for (j, out) in row.iter_mut().enumerate() {
                for t in 0..d {
                    let (cb, cs) = col[j * d + t];
                    let bucket = (rh[t].0 + cb) & (b - 1);
                    xs[t] = rh[t].1 * cs * self.coeffs[t * b + bucket];
                }
                *out = median(&xs);
            }
        });
        DenseMatrix::new(n1, n3, data)
    }

    fn check_compatible(&self, other: &SketchSet) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::SketchMismatch(format!(
                "dimensions {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        if self.params != other.params {
            return Err(Error::SketchMismatch(format!(
                "parameters {:?} vs {:?}",
                self.params, other.params
            )));
        }
        Ok(())
    }

    /// Coefficientwise sum; both sketches must share dimensions, parameters and seeds.
    pub fn add(&self, other: &SketchSet) -> Result<SketchSet> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y).collect();
        Ok(SketchSet {
            coeffs,
            ..self.clone()
        })
    }

    pub fn scale(&self, alpha: f64) -> Result<SketchSet> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("scale factor {alpha} is not finite")));
        }
        Ok(SketchSet {
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
            ..self.clone()
        })
    }

    /// Adds `value` at position `(i, j)` of the sketched matrix.
    pub(crate) fn add_to_entry(&mut self, i: usize, j: usize, value: f64) {
        let b = self.params.buckets();
        for (t, f) in self.families.iter().enumerate() {
            self.coeffs[t * b + f.split(i, j)] += f.sign(i, j) * value;
        }
    }
}

/// AMS sketch of the outer product `u v^T`: `(sum_i s1(i) u_i)(sum_j s2(j) v_j)`.
pub fn ams_outer_sketch(u: &[f64], v: &[f64], s1: &PolyHash, s2: &PolyHash) -> f64 {
    let su: f64 = u.iter().enumerate().map(|(i, x)| s1.sign(i as u64) * x).sum();
    let sv: f64 = v.iter().enumerate().map(|(j, x)| s2.sign(j as u64) * x).sum();
    su * sv
}

/// AMS sketch `sum_{ij} s1(i) s2(j) (AB)_{ij}` of a product, summed over its
/// outer products in `O(N)`.
pub fn ams_product_sketch<A: Operand, B: Operand>(a: &A, b: &B, s1: &PolyHash, s2: &PolyHash) -> Result<f64> {
    check_dims(a, b)?;
    let mut total = 0.0;
    for k in 0..a.ncols() {
        let mut su = 0.0;
        a.for_each_in_column(k, |i, v| su += s1.sign(i as u64) * v);
        if su == 0.0 {
            continue;
        }
        let mut sv = 0.0;
        b.for_each_in_row(k, |j, v| sv += s2.sign(j as u64) * v);
        total += su * sv;
    }
    Ok(total)
}
