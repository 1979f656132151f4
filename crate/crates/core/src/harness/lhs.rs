use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n × dims` Latin hypercube in `[0, 1)`: in every column each of the `n`
/// equal-width bins holds exactly one sample.
pub fn latin_hypercube(n: usize, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![0.0; dims]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let nf = n as f64;
    for d in 0..dims {
        perm.shuffle(&mut rng);
        for (i, &bin) in perm.iter().enumerate() {
            let jitter: f64 = rng.random();
            out[i][d] = place_in_bin((bin as f64 + jitter) / nf, bin, nf);
        }
    }
    out
}

// Guard against the division rounding a sample across a bin edge.
fn place_in_bin(mut v: f64, bin: usize, nf: f64) -> f64 {
    let lo = bin as f64 / nf;
    while v >= 1.0 || (v * nf).floor() as usize > bin {
        v = v.next_down();
    }
    while v < lo || ((v * nf).floor() as usize) < bin {
        v = v.next_up();
    }
    v
}
