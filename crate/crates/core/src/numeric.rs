//! Small numerical building blocks shared by the other modules: compensated
//! summation, fixed-order reductions, logarithms of big integers and the
//! seeded sample streams used by every randomised experiment.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values (independent real/imaginary lanes).
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Pairwise summation with a fixed split, so the result depends only on the
/// order of `xs` and never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => {
            let mut acc = CompensatedSum::new();
            xs.iter().for_each(|&x| acc.add(x));
            acc.value()
        }
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn pairwise_sum_complex(zs: &[Complex64]) -> Complex64 {
    match zs.len() {
        0 => Complex64::zero(),
        n if n <= 8 => {
            let mut acc = CompensatedComplex::new();
            zs.iter().for_each(|&z| acc.add(z));
            acc.value()
        }
        n => {
            let (a, b) = zs.split_at(n / 2);
            pairwise_sum_complex(a) + pairwise_sum_complex(b)
        }
    }
}

/// Index and value of the first maximum (ties resolved towards the lower index).
pub fn first_max(xs: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            Some((_, b)) if !(x > b) => {}
            _ => best = Some((i, x)),
        }
    }
    best
}

/// Natural logarithm of a non-negative big integer; `-inf` at zero.
///
/// Uses the leading 64 bits, so the relative error is a few ulps for any size.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        let digits = x.to_u64_digits();
        return (digits[0] as f64).ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let lead = top.to_u64_digits()[0] as f64;
    lead.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// `ln |x|` for a signed big integer.
pub fn ln_abs_bigint(x: &BigInt) -> f64 {
    ln_biguint(&x.abs().to_biguint().expect("absolute value is non-negative"))
}

/// Counter-based sample stream: sample `index` of seed `seed` is the same
/// regardless of which thread draws it or in which order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
