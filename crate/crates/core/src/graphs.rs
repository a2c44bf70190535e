//! Stock graph builders used by tests, benchmarks, and the self-check suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph_model::ShiftGraph;
use crate::{Error, Result, Tolerances};

/// Directed N-cycle: edges n -> n+1 mod N. Its shift is the DSP delay
/// (ones on the subdiagonal plus the top-right corner).
pub fn cycle(n: usize) -> ShiftGraph {
    assert!(n >= 2);
    let edges: Vec<(usize, usize, f64)> = (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect();
    ShiftGraph::from_edges(n, &edges).unwrap()
}

/// Directed ladder on 2K vertices: top rail 0 -> 1 -> ... -> K-1, bottom
/// rail 2K-1 -> 2K-2 -> ... -> K, rungs i -> K+i for i = 1..K-1, and a
/// closing rung K -> 0. For 2K = 12 the characteristic polynomial is
/// x^12 - x^8 - x^6 - x^4 - x^2 - 1 (all unit weights).
pub fn ladder(n: usize) -> Result<ShiftGraph> {
    if n < 6 || n % 2 != 0 {
        return Err(Error::MalformedInput(format!(
            "ladder size must be even and at least 6, got {n}"
        )));
    }
    let k = n / 2;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..k - 1 {
        edges.push((i, i + 1, 1.0)); // top rail, forward
        edges.push((k + i + 1, k + i, 1.0)); // bottom rail, backward
    }
    edges.push((k, 0, 1.0)); // closing rung back to the start
    for i in 1..k {
        edges.push((i, k + i, 1.0)); // downward rungs
    }
    ShiftGraph::from_edges(n, &edges)
}

/// Seeded random strongly connected digraph: a weighted Hamiltonian cycle
/// plus Erdős–Rényi extra edges with small weights, normalized to unit
/// spectral radius and regenerated until the eigenvalue gap clears
/// `min_gap`. The weak perturbation keeps the spectrum spread near the
/// unit circle, which keeps the Vandermonde transforms well conditioned.
pub fn random_strongly_connected(
    n: usize,
    seed: u64,
    min_gap: f64,
) -> Result<(ShiftGraph, crate::graph_model::SpectralDecomposition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (2.0 * (n as f64).ln() / n as f64).min(0.8).max(0.3);
    for _attempt in 0..500 {
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        // guarantee a Hamiltonian cycle so strong connectivity is frequent
        for v in 0..n {
            edges.push((v, (v + 1) % n, rng.gen_range(0.7..1.3)));
        }
        for from in 0..n {
            for to in 0..n {
                if from == to || to == (from + 1) % n {
                    continue;
                }
                if rng.gen::<f64>() < p {
                    edges.push((from, to, rng.gen_range(0.05..0.25)));
                }
            }
        }
        let g = ShiftGraph::from_edges(n, &edges)?;
        if !g.is_strongly_connected() {
            continue;
        }
        match crate::graph_model::decompose(&g, Tolerances::default()) {
            Ok(d) => {
                if d.min_gap <= min_gap {
                    continue;
                }
                // normalize to unit spectral radius: keeps the Vandermonde
                // transforms well scaled for interpolation and convolution
                let rho = d.lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let scaled: Vec<(usize, usize, f64)> = edges
                    .iter()
                    .map(|&(f, t, w)| (f, t, w / rho))
                    .collect();
                let g = ShiftGraph::from_edges(n, &scaled)?;
                match crate::graph_model::decompose(&g, Tolerances::default()) {
                    Ok(d) if d.min_gap > min_gap => return Ok((g, d)),
                    _ => continue,
                }
            }
            Err(_) => continue,
        }
    }
    Err(Error::EigensolverFailure(format!(
        "no admissible random graph found for n = {n}, seed = {seed}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_strongly_connected() {
        let g = ladder(12).unwrap();
        assert!(g.is_strongly_connected());
        assert!(ladder(5).is_err());
        assert!(ladder(4).is_err());
    }

    #[test]
    fn random_generator_deterministic() {
        let (g1, d1) = random_strongly_connected(8, 42, 1e-3).unwrap();
        let (g2, d2) = random_strongly_connected(8, 42, 1e-3).unwrap();
        assert_eq!(g1.adjacency(), g2.adjacency());
        for k in 0..8 {
            assert_eq!(d1.lambda[k], d2.lambda[k]);
        }
        assert!(g1.is_strongly_connected());
        assert!(d1.min_gap > 1e-3);
    }
}
