//! Stable recovery of the impulse representations: barycentric Lagrange
//! interpolation through the eigenvalues, evaluated at the N-th roots of
//! unity, followed by an inverse FFT.

use nalgebra::DVector;

use crate::fftpoly::fft;
use crate::graph_model::{GraphSignal, Rep};
use crate::model::Model;
use crate::{C64, Error, Result};

/// Precomputed barycentric weights `w_i = 1 / prod_{k != i} (node_i - node_k)`
/// for one node set. Build once, reuse for every signal on the same model.
#[derive(Debug, Clone)]
pub struct BarycentricTable {
    pub nodes: Vec<C64>,
    /// Weights scaled by 2^(-rescale_exp); the common factor cancels in the
    /// barycentric quotient.
    pub weights: Vec<C64>,
    pub rescale_exp: i64,
}

/// O(N^2) weight computation with a running power-of-two rescale whenever a
/// partial product's magnitude leaves [2^-512, 2^512].
pub fn build_table(nodes: &[C64]) -> Result<BarycentricTable> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::MalformedInput("no interpolation nodes".into()));
    }
    let scale = nodes.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    // (mantissa, binary exponent) of prod_{k != i} (node_i - node_k)
    let mut mant = vec![C64::new(1.0, 0.0); n];
    let mut exp = vec![0i64; n];
    const LIM: f64 = 1.3407807929942597e154; // 2^512
    for i in 0..n {
        for k in 0..n {
            if k == i {
                continue;
            }
            let d = nodes[i] - nodes[k];
            if d.norm() <= 1e-14 * scale {
                return Err(Error::MalformedInput(format!(
                    "duplicate interpolation nodes at indices {i} and {k}"
                )));
            }
            mant[i] *= d;
            let m = mant[i].norm();
            if m > LIM {
                mant[i] /= LIM;
                exp[i] += 512;
            } else if m < 1.0 / LIM {
                mant[i] *= LIM;
                exp[i] -= 512;
            }
        }
    }
    // w_i = 2^(-exp_i) / mant_i; pull out a common exponent so the stored
    // mantissas stay in range
    let mean_exp = (exp.iter().sum::<i64>() as f64 / n as f64).round() as i64;
    let rescale_exp = -mean_exp;
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let rel = -(exp[i] - mean_exp);
        let w = mant[i].inv() * 2f64.powi(rel.clamp(-1060, 1060) as i32);
        if !w.re.is_finite() || !w.im.is_finite() || w.norm() == 0.0 {
            return Err(Error::InterpolationFailure(format!(
                "weight {i} not representable after rescaling"
            )));
        }
        weights.push(w);
    }
    Ok(BarycentricTable { nodes: nodes.to_vec(), weights, rescale_exp })
}

/// Barycentric evaluation of the interpolant through
/// (node_i, values_i) at `x`. Snaps to the node value inside
/// `1e-12 * (1 + |x|)` — the removable singularity of the quotient form.
pub fn eval(table: &BarycentricTable, values: &[C64], x: C64) -> Result<C64> {
    let n = table.nodes.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} nodes",
            values.len(),
            n
        )));
    }
    let snap_tol = 1e-12 * (1.0 + x.norm());
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for i in 0..n {
        let d = x - table.nodes[i];
        if d.norm() <= snap_tol {
            return Ok(values[i]);
        }
        let t = table.weights[i] / d;
        num += t * values[i];
        den += t;
    }
    let num_scale = table.weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if den.norm() <= 1e-300_f64.max(1e-15 * num_scale * 1e-15) || !den.norm().is_finite() {
        return Err(Error::InterpolationFailure(format!(
            "barycentric denominator underflow at x = {x}"
        )));
    }
    Ok(num / den)
}

/// Coefficients (length N) of the unique degree-< N polynomial through the
/// table's nodes with the given values: evaluate at the N-th roots of unity
/// `e^{-j 2 pi k / N}`, then inverse DFT.
pub fn interpolate_coeffs(table: &BarycentricTable, values: &[C64]) -> Result<Vec<C64>> {
    let n = table.nodes.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} nodes",
            values.len(),
            n
        )));
    }
    let mut ring = Vec::with_capacity(n);
    for k in 0..n {
        let ang = -std::f64::consts::TAU * k as f64 / n as f64;
        ring.push(eval(table, values, C64::new(ang.cos(), ang.sin()))?);
    }
    Ok(fft(&ring, true))
}

/// Result of a p/q recovery: the signal plus its residual diagnostics.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub signal: GraphSignal,
    /// `|| (1/sqrt(N)) B x - rhs ||^2` with B the relevant Vandermonde.
    pub mse: f64,
    /// Largest imaginary magnitude dropped by realification (0 when the
    /// input was complex and nothing was dropped).
    pub imag_dropped: f64,
}

fn finish_recovery(
    model: &Model,
    coeffs: Vec<C64>,
    rhs: &DVector<C64>,
    conj_nodes: bool,
    rep: Rep,
    input_real: bool,
) -> Recovery {
    let n = model.n();
    let mut values = DVector::from_vec(coeffs);
    let mut imag_dropped = 0.0;
    if input_real {
        imag_dropped = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        values = values.map(|z| C64::new(z.re, 0.0));
    }
    // residual against the defining Vandermonde relation
    let root_n = (n as f64).sqrt();
    let mut mse = 0.0;
    for i in 0..n {
        let node = if conj_nodes { model.decomp().lambda[i].conj() } else { model.decomp().lambda[i] };
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..n).rev() {
            acc = acc * node + values[k];
        }
        mse += (acc / root_n - rhs[i]).norm_sqr();
    }
    Recovery {
        signal: GraphSignal { values, rep, model_id: model.id() },
        mse,
        imag_dropped,
    }
}

/// `s_hat -> p`: interpolate `sqrt(N) s_hat` at the eigenvalues.
pub fn recover_coeffs(model: &Model, shat: &GraphSignal) -> Result<Recovery> {
    if shat.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    if shat.rep != Rep::SpectrumHat {
        return Err(Error::MalformedInput("recover_coeffs expects a spectrum signal".into()));
    }
    let n = model.n();
    let root_n = (n as f64).sqrt();
    let values: Vec<C64> = shat.values.iter().map(|&z| z * root_n).collect();
    let coeffs = interpolate_coeffs(model.table_p(), &values)?;
    // p is real exactly when s is real, i.e. when s_hat is conjugate-symmetric
    let s = &model.decomp().gft_inv * &shat.values;
    let input_real = s.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
        <= 1e-10 * s.norm().max(1e-300);
    Ok(finish_recovery(model, coeffs, &shat.values, false, Rep::ImpulseP, input_real))
}

/// `s -> q`: same pipeline with nodes conj(lambda) and values `sqrt(N) s`.
pub fn recover_q(model: &Model, s: &GraphSignal) -> Result<Recovery> {
    if s.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    if s.rep != Rep::VertexS {
        return Err(Error::MalformedInput("recover_q expects a vertex signal".into()));
    }
    let n = model.n();
    let root_n = (n as f64).sqrt();
    let values: Vec<C64> = s.values.iter().map(|&z| z * root_n).collect();
    let coeffs = interpolate_coeffs(model.table_q(), &values)?;
    // q is real exactly when s_hat is real
    let shat = &model.decomp().gft * &s.values;
    let input_real = shat.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
        <= 1e-10 * shat.norm().max(1e-300);
    Ok(finish_recovery(model, coeffs, &s.values, true, Rep::SpectralImpulseQ, input_real))
}

/// Dense Vandermonde solve by Gaussian elimination with partial pivoting:
/// the unstable textbook path, kept as a diagnostic cross-check for the
/// barycentric pipeline.
pub fn vandermonde_solve(nodes: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    let n = nodes.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch(format!("{} rhs for {} nodes", rhs.len(), n)));
    }
    let mut aug = vec![vec![C64::new(0.0, 0.0); n + 1]; n];
    for i in 0..n {
        let mut pow = C64::new(1.0, 0.0);
        for j in 0..n {
            aug[i][j] = pow;
            pow *= nodes[i];
        }
        aug[i][n] = rhs[i];
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| aug[a][col].norm().partial_cmp(&aug[b][col].norm()).unwrap())
            .unwrap();
        if aug[piv][col].norm() == 0.0 {
            return Err(Error::InterpolationFailure("singular Vandermonde system".into()));
        }
        aug.swap(col, piv);
        for row in col + 1..n {
            let f = aug[row][col] / aug[col][col];
            for j in col..=n {
                let sub = f * aug[col][j];
                aug[row][j] -= sub;
            }
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = aug[row][n];
        for j in row + 1..n {
            acc -= aug[row][j] * x[j];
        }
        x[row] = acc / aug[row][row];
    }
    Ok(x)
}
