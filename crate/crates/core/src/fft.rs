//! Complex and real discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two sizes use an iterative radix-2 transform; every other size
//! goes through Bluestein's chirp-z reformulation on a padded power-of-two
//! transform. Forward transforms are unnormalized, inverse transforms
//! divide by the length, so `inverse(forward(x)) == x`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// A reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct Dft {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    // twiddles[k] = exp(-2πik/len) for k < len/2
    twiddles: Vec<Complex64>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    // chirp[n] = exp(-πi n² / len)
    chirp: Vec<Complex64>,
    // FFT of the conjugate chirp, wrapped onto the padded length
    kernel_hat: Vec<Complex64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Self { len, twiddles }
    }

    /// Unnormalized in-place transform; `inverse` flips the exponent sign.
    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(buf.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut tw = self.twiddles[k * stride];
                    if inverse {
                        tw = tw.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * tw;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let padded = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(padded);
        // n² mod 2len keeps the angle argument small for large n.
        let chirp: Vec<Complex64> = (0..len)
            .map(|n| {
                let sq = (n as u128 * n as u128 % (2 * len as u128)) as f64;
                Complex64::from_polar(1.0, -PI * sq / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); padded];
        kernel[0] = chirp[0].conj();
        for n in 1..len {
            kernel[n] = chirp[n].conj();
            kernel[padded - n] = chirp[n].conj();
        }
        inner.process(&mut kernel, false);
        Self { inner, chirp, kernel_hat: kernel }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let len = self.chirp.len();
        let padded = self.inner.len;
        let chirp = |n: usize| if inverse { self.chirp[n].conj() } else { self.chirp[n] };
        let mut work = vec![Complex64::new(0.0, 0.0); padded];
        for n in 0..len {
            work[n] = buf[n] * chirp(n);
        }
        self.inner.process(&mut work, false);
        // The kernel is even modulo the padded length, so the spectrum of
        // its conjugate (needed for the inverse) is the conjugate spectrum.
        for (w, k) in work.iter_mut().zip(&self.kernel_hat) {
            *w *= if inverse { k.conj() } else { *k };
        }
        self.inner.process(&mut work, true);
        let scale = 1.0 / padded as f64;
        for k in 0..len {
            buf[k] = work[k] * scale * chirp(k);
        }
    }
}

impl Dft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let kind = if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len))
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized forward transform `X_k = Σ x_n e^{-2πikn/N}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        match &self.kind {
            Kind::Radix2(r) => r.process(buf, false),
            Kind::Bluestein(b) => b.process(buf, false),
        }
    }

    /// In-place inverse transform, normalized by `1/N`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        match &self.kind {
            Kind::Radix2(r) => r.process(buf, true),
            Kind::Bluestein(b) => b.process(buf, true),
        }
        let scale = 1.0 / self.len as f64;
        for x in buf.iter_mut() {
            *x *= scale;
        }
    }

    /// Real-input transform returning the `N/2 + 1` non-negative frequency
    /// bins.
    pub fn forward_real(&self, input: &[f64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.len);
        let mut buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf.truncate(self.len / 2 + 1);
        buf
    }

    /// Inverse of [`Dft::forward_real`]: rebuilds the Hermitian spectrum
    /// from the `N/2 + 1` half and returns the real part.
    pub fn inverse_real(&self, half: &[Complex64]) -> Vec<f64> {
        let n = self.len;
        assert_eq!(half.len(), n / 2 + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..half.len()].copy_from_slice(half);
        for k in half.len()..n {
            buf[k] = half[n - k].conj();
        }
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Naive `O(N²)` DFT, kept for cross-checks and tiny inputs.
pub fn naive_dft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let angle = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                    x * Complex64::new(angle.cos(), angle.sin())
                })
                .sum()
        })
        .collect()
}
