//! Iterative radix-2 FFT for power-of-two lengths.
//!
//! The forward transform evaluates `p(w^t)` for `w = exp(-2 pi i / b)`; the
//! inverse includes the `1/b` normalisation so that `inverse(forward(x)) = x`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Precomputed twiddles and bit-reversal permutation for one size.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        // Computed directly rather than by repeated multiplication to keep the
        // error at one rounding per twiddle.
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Ok(FftPlan {
            len,
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length must match the plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for v in buf.iter_mut() {
                *v *= scale;
            }
        }
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
    }

    /// Transforms two real sequences packed as `buf[t] = x[t] + i y[t]` and
    /// returns their spectra through `f(t, X[t], Y[t])`.
    ///
    /// Uses `X[t] = (Z[t] + conj Z[-t]) / 2` and `Y[t] = (Z[t] - conj Z[-t]) / 2i`.
    pub fn forward_real_pair(&self, buf: &mut [Complex64], mut f: impl FnMut(usize, Complex64, Complex64)) {
        self.forward_in_place(buf);
        let n = self.len;
        for t in 0..n {
            let z = buf[t];
            let zc = buf[(n - t) & (n - 1)].conj();
            let x = (z + zc) * 0.5;
            let y = (z - zc) * Complex64::new(0.0, -0.5);
            f(t, x, y);
        }
    }
}

pub fn fft_forward(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.forward_in_place(&mut out);
    Ok(out)
}

pub fn fft_inverse(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.inverse_in_place(&mut out);
    Ok(out)
}

/// Cyclic convolution `out[k] = sum_{i + j = k mod b} u[i] v[j]` of two real
/// vectors of equal power-of-two length. Imaginary residues are discarded.
pub fn cyclic_convolve(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let plan = FftPlan::new(u.len())?;
    let mut buf: Vec<Complex64> = u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let mut prod = vec![Complex64::new(0.0, 0.0); u.len()];
    plan.forward_real_pair(&mut buf, |t, x, y| prod[t] = x * y);
    plan.inverse_in_place(&mut prod);
    Ok(prod.into_iter().map(|c| c.re).collect())
}
