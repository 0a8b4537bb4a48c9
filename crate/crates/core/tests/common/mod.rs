#![allow(dead_code)]

use arrangelab_core::{is_generic, Arrangement, Combinatorics, ComplexScalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn cx(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

pub fn random_complex(rng: &mut ChaCha8Rng, r: f64) -> ComplexScalar {
    cx(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// Random sizes summing to `d` with at least two classes.
pub fn random_combinatorics(rng: &mut ChaCha8Rng, d: usize) -> Combinatorics {
    loop {
        let mut sizes = Vec::new();
        let mut left = d;
        while left > 0 {
            let p = if rng.gen_bool(0.35) { rng.gen_range(1..=left.min(3)) } else { 1 };
            sizes.push(p);
            left -= p;
        }
        if sizes.len() >= 2 {
            return Combinatorics::new(sizes).unwrap();
        }
    }
}

/// Random generic arrangement with complex coefficients and the given
/// combinatorics.
pub fn random_generic(rng: &mut ChaCha8Rng, comb: &Combinatorics) -> Arrangement {
    loop {
        let mut triples = Vec::new();
        for &p in comb.class_sizes() {
            let (a, b) = (random_complex(rng, 1.0), random_complex(rng, 1.0));
            for _ in 0..p {
                triples.push([a, b, random_complex(rng, 2.0)]);
            }
        }
        if let Ok(arr) = Arrangement::from_coefficients(&triples) {
            if is_generic(&arr, 1e-9).map(|r| r.is_generic).unwrap_or(false) && &arrangelab_core::combinatorics(&arr) == comb {
                return arr;
            }
        }
    }
}
