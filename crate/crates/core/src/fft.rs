//! Radix-2 discrete Fourier transform with directly evaluated twiddles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// `X_n = Σ_j x_j e^{−2πi nj/N}`; `N` must be a power of two.
pub(crate) fn forward(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    let mut data: Vec<Complex64> = (0..n)
        .map(|i| if bits == 0 { input[0] } else { input[i.reverse_bits() >> (usize::BITS - bits)] })
        .collect();
    let twiddles: Vec<Complex64> = (0..n / 2).map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)).collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
        len *= 2;
    }
    data
}
