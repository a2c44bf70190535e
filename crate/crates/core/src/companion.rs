//! The canonical (companion) model: companion shift, companion graph,
//! Vandermonde transforms, spectral companion counterparts, and conversion
//! of signals among the four representations.

use nalgebra::{DMatrix, DVector};

use crate::graph_model::{CharPoly, GraphSignal, Rep, SpectralDecomposition};
use crate::model::Model;
use crate::{C64, Error, Result};

#[derive(Debug, Clone)]
pub struct CompanionModel {
    /// Exact companion structure: ones on the subdiagonal, last column
    /// `-[c_0 .. c_{N-1}]^T`.
    pub c_comp: DMatrix<f64>,
    /// Vandermonde with rows `[1, lambda_i, ..., lambda_i^{N-1}]`.
    pub vand: DMatrix<C64>,
    /// `(1/sqrt(N)) V` — the companion model's Fourier transform.
    pub gft_comp: DMatrix<C64>,
    /// `sqrt(N) inverse(conj(V))` — the spectral companion's transform.
    pub gft_comp_sp: DMatrix<C64>,
    /// `conj(V) Lambda inverse(conj(V))`; its eigenvectors are the
    /// columns `(1/sqrt(N)) conj(lambda)^n`.
    pub a_comp_sp: DMatrix<C64>,
    /// `V conj(Lambda) V^-1` — the companion model's spectral shift.
    pub m_comp: DMatrix<C64>,
    /// Condition-number estimate of V (2-norm, power iteration).
    pub cond_vand: f64,
}

fn vandermonde(lambda: &DVector<C64>) -> DMatrix<C64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| lambda[i].powu(j as u32))
}

/// Largest-eigenvalue estimate of the Hermitian matrix `B^H B` by power
/// iteration; with the same on the inverse this gives cond(B).
fn cond_estimate(b: &DMatrix<C64>) -> f64 {
    let n = b.nrows();
    let bh = b.adjoint();
    let gram = &bh * b;
    let power = |mul: &dyn Fn(&DVector<C64>) -> Option<DVector<C64>>| -> f64 {
        let mut x = DVector::from_fn(n, |i, _| C64::new(1.0, 0.1 * (i + 1) as f64));
        x = x.unscale(x.norm());
        let mut val = 0.0;
        for _ in 0..60 {
            let y = match mul(&x) {
                Some(y) => y,
                None => return f64::INFINITY,
            };
            val = y.norm();
            if val == 0.0 || !val.is_finite() {
                return f64::INFINITY;
            }
            x = y.unscale(val);
        }
        val
    };
    let smax2 = power(&|x| Some(&gram * x));
    let lu = gram.clone().lu();
    let smin2_inv = power(&|x| lu.solve(x));
    (smax2 * smin2_inv).sqrt()
}

/// Assemble the companion model directly from the characteristic
/// polynomial's coefficients (never by similarity transform).
pub fn build_companion(d: &SpectralDecomposition, cp: &CharPoly) -> Result<CompanionModel> {
    let n = d.n();
    if cp.degree() != n {
        return Err(Error::DimensionMismatch(format!(
            "characteristic polynomial degree {} for model size {n}",
            cp.degree()
        )));
    }
    let mut c_comp = DMatrix::zeros(n, n);
    for i in 1..n {
        c_comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c_comp[(i, n - 1)] = -cp.coeffs[i];
    }

    let vand = vandermonde(&d.lambda);
    let vand_conj = vand.map(|z| z.conj());
    let root_n = (n as f64).sqrt();
    let gft_comp = vand.map(|z| z / root_n);
    let vand_inv = vand
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NumericalInvariant("Vandermonde matrix numerically singular".into()))?;
    let vand_conj_inv = vand_conj.clone().lu().try_inverse().ok_or_else(|| {
        Error::NumericalInvariant("conjugate Vandermonde matrix numerically singular".into())
    })?;
    let gft_comp_sp = vand_conj_inv.map(|z| z * root_n);

    let scale_cols = |m: &DMatrix<C64>, diag: &dyn Fn(usize) -> C64| -> DMatrix<C64> {
        let mut out = m.clone();
        for k in 0..n {
            let c = diag(k);
            for i in 0..n {
                out[(i, k)] *= c;
            }
        }
        out
    };
    let a_comp_sp = scale_cols(&vand_conj, &|k| d.lambda[k]) * &vand_conj_inv;
    let m_comp = scale_cols(&vand, &|k| d.lambda[k].conj()) * &vand_inv;

    let cond_vand = cond_estimate(&vand);

    Ok(CompanionModel {
        c_comp,
        vand,
        gft_comp,
        gft_comp_sp,
        a_comp_sp,
        m_comp,
        cond_vand,
    })
}

/// Boundary-condition weights `-c_n` (the last companion column).
pub fn boundary_weights(m: &CompanionModel) -> Vec<f64> {
    let n = m.c_comp.nrows();
    (0..n).map(|i| m.c_comp[(i, n - 1)]).collect()
}

/// DOT rendering of the companion graph: a red directed path plus green
/// backward edges from the last node weighted by `-c_k`. Zero-weight edges
/// are omitted; unlabeled edges have weight 1.
pub fn companion_graph_dot(m: &CompanionModel) -> String {
    let n = m.c_comp.nrows();
    let w = boundary_weights(m);
    // weights are computed from an eigenvalue product; structural zeros come
    // back as rounding dust, so cut below a relative threshold
    let zero_tol = 1e-9 * (1.0 + w.iter().map(|x| x.abs()).fold(0.0, f64::max));
    let mut out = String::from("digraph companion {\n  rankdir=LR;\n");
    if w[0].abs() <= zero_tol {
        out.push_str("  // not strongly connected: c0 = 0\n");
    }
    for i in 0..n - 1 {
        out.push_str(&format!("  {} -> {} [color=red];\n", i, i + 1));
    }
    for (k, &wk) in w.iter().enumerate() {
        if wk.abs() <= zero_tol {
            continue;
        }
        if (wk - 1.0).abs() < 1e-9 {
            out.push_str(&format!("  {} -> {} [color=green];\n", n - 1, k));
        } else {
            out.push_str(&format!("  {} -> {} [color=green, label=\"{}\"];\n", n - 1, k, wk));
        }
    }
    out.push_str("}\n");
    out
}

/// Convert a signal to another representation along the transform diagram:
/// `s <-> s_hat` via the GFT, `p -> s_hat` via `(1/sqrt(N)) V`,
/// `s_hat -> p` via barycentric interpolation, `q -> s` via
/// `(1/sqrt(N)) conj(V)`, `s -> q` via interpolation on conjugate nodes;
/// everything else composes those edges.
pub fn to_representation(model: &Model, sig: &GraphSignal, target: Rep) -> Result<GraphSignal> {
    if sig.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    if sig.rep == target {
        return Ok(sig.clone());
    }
    let d = model.decomp();
    let comp = model.companion();
    let n = model.n();
    let root_n = (n as f64).sqrt();
    let mk = |values: DVector<C64>, rep: Rep| GraphSignal { values, rep, model_id: model.id() };
    match (sig.rep, target) {
        (Rep::VertexS, Rep::SpectrumHat) => Ok(mk(&d.gft * &sig.values, Rep::SpectrumHat)),
        (Rep::SpectrumHat, Rep::VertexS) => Ok(mk(&d.gft_inv * &sig.values, Rep::VertexS)),
        (Rep::ImpulseP, Rep::SpectrumHat) => {
            Ok(mk((&comp.vand * &sig.values) / C64::new(root_n, 0.0), Rep::SpectrumHat))
        }
        (Rep::SpectrumHat, Rep::ImpulseP) => {
            Ok(crate::interp::recover_coeffs(model, sig)?.signal)
        }
        (Rep::SpectralImpulseQ, Rep::VertexS) => {
            let vc = comp.vand.map(|z| z.conj());
            Ok(mk((vc * &sig.values) / C64::new(root_n, 0.0), Rep::VertexS))
        }
        (Rep::VertexS, Rep::SpectralImpulseQ) => Ok(crate::interp::recover_q(model, sig)?.signal),
        // composite routes: p goes through s_hat, q goes through s
        (Rep::ImpulseP, _) => {
            let hat = to_representation(model, sig, Rep::SpectrumHat)?;
            to_representation(model, &hat, target)
        }
        (Rep::SpectralImpulseQ, _) => {
            let s = to_representation(model, sig, Rep::VertexS)?;
            to_representation(model, &s, target)
        }
        (Rep::VertexS, Rep::ImpulseP) => {
            let hat = to_representation(model, sig, Rep::SpectrumHat)?;
            to_representation(model, &hat, target)
        }
        (Rep::SpectrumHat, Rep::SpectralImpulseQ) => {
            let s = to_representation(model, sig, Rep::VertexS)?;
            to_representation(model, &s, target)
        }
        _ => unreachable!("all representation pairs handled"),
    }
}

/// The companion-domain impulse `delta_comp,n = e_n` in the p
/// representation; its companion Fourier transform is `(1/sqrt(N)) lambda^n`.
pub fn companion_delta(model: &Model, n_idx: usize) -> Result<GraphSignal> {
    let n = model.n();
    if n_idx >= n {
        return Err(Error::IndexOutOfRange { index: n_idx, n });
    }
    let mut values = DVector::from_element(n, C64::new(0.0, 0.0));
    values[n_idx] = C64::new(1.0, 0.0);
    Ok(GraphSignal { values, rep: Rep::ImpulseP, model_id: model.id() })
}

/// Apply the representation's native shift `times` times: `A` for vertex,
/// `M` for spectrum, and the shared companion matrix for both impulse
/// representations (the vertex and spectral companion shifts coincide).
pub fn shift_in_rep(model: &Model, sig: &GraphSignal, times: usize) -> Result<GraphSignal> {
    if sig.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    let d = model.decomp();
    let mut values = sig.values.clone();
    match sig.rep {
        Rep::VertexS => {
            let ac = d.adjacency_complex();
            for _ in 0..times {
                values = &ac * values;
            }
        }
        Rep::SpectrumHat => {
            for _ in 0..times {
                values = &d.m_shift * values;
            }
        }
        Rep::ImpulseP | Rep::SpectralImpulseQ => {
            let cc = model.companion().c_comp.map(|x| C64::new(x, 0.0));
            for _ in 0..times {
                values = &cc * values;
            }
        }
    }
    Ok(GraphSignal { values, rep: sig.rep, model_id: model.id() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{graphs, Tolerances};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn model(g: &crate::ShiftGraph) -> Model {
        Model::build(g, Tolerances::default()).unwrap()
    }

    #[test]
    fn cycle_companion_is_the_cycle_shift() {
        for n in [2usize, 4, 8] {
            let m = model(&graphs::cycle(n));
            let comp = m.companion();
            // structure is exact; c_0 = -1 up to rounding in the root product
            for i in 0..n {
                for j in 0..n - 1 {
                    assert_eq!(comp.c_comp[(i, j)], if i == j + 1 { 1.0 } else { 0.0 });
                }
            }
            assert!((comp.c_comp[(0, n - 1)] - 1.0).abs() < 1e-9);
            for i in 1..n {
                assert!(comp.c_comp[(i, n - 1)].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_node_swap_companion() {
        let g = crate::ShiftGraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let m = model(&g);
        let cc = &m.companion().c_comp;
        assert_eq!(cc[(0, 0)], 0.0);
        assert!((cc[(0, 1)] - 1.0).abs() < 1e-12);
        assert_eq!(cc[(1, 0)], 1.0);
        assert!(cc[(1, 1)].abs() < 1e-12);
    }

    #[test]
    fn ladder_boundary_weights_all_one() {
        let m = model(&graphs::ladder(12).unwrap());
        let w = boundary_weights(m.companion());
        for (k, &wk) in w.iter().enumerate() {
            if wk.abs() > 1e-6 {
                assert!((wk - 1.0).abs() < 1e-6, "weight at {k} is {wk}");
            }
        }
        // nonzero backward edges at the even powers 0, 2, 4, 6, 8
        for k in [0usize, 2, 4, 6, 8] {
            assert!(w[k].abs() > 0.5, "missing backward edge to {k}");
        }
    }

    #[test]
    fn companion_structure_exact() {
        let m = model(&graphs::ladder(12).unwrap());
        let cc = &m.companion().c_comp;
        for i in 0..12 {
            for j in 0..11 {
                let expect = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(cc[(i, j)], expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn vandermonde_diagonalizes_companion() {
        for seed in 0..5u64 {
            let n = 6 + 2 * seed as usize;
            let (g, _) = graphs::random_strongly_connected(n, 40 + seed, 1e-3).unwrap();
            let m = model(&g);
            let comp = m.companion();
            let vinv = comp.vand.clone().lu().try_inverse().unwrap();
            let mut lam_v = comp.vand.clone();
            for k in 0..n {
                let l = m.decomp().lambda[k];
                for j in 0..n {
                    lam_v[(k, j)] *= l;
                }
            }
            // V^-1 Lambda V: rows of V scaled by lambda on the left
            let got = &vinv * lam_v;
            let want = comp.c_comp.map(|x| c(x, 0.0));
            let err = (got - want).norm();
            assert!(
                err <= 1e-6 * comp.cond_vand,
                "n = {n}, seed {seed}: residual {err:.3e}, cond {:.3e}",
                comp.cond_vand
            );
        }
    }

    #[test]
    fn left_eigenvector_rows() {
        let m = model(&graphs::ladder(12).unwrap());
        let comp = m.companion();
        let cc = comp.c_comp.map(|x| c(x, 0.0));
        for i in 0..12 {
            let row = comp.vand.row(i).clone_owned();
            let prod = &row * &cc;
            let want = row.map(|z| z * m.decomp().lambda[i]);
            assert!((prod - want).norm() <= 1e-6 * comp.cond_vand);
        }
    }

    #[test]
    fn spectral_companion_matrices() {
        let m = model(&graphs::ladder(12).unwrap());
        let d = m.decomp();
        let comp = m.companion();
        // eigenvectors of a_comp_sp are conj(lambda)^n columns
        for nn in 0..12 {
            let col = nalgebra::DVector::from_fn(12, |i, _| d.lambda[i].conj().powu(nn as u32));
            let got = &comp.a_comp_sp * &col;
            let want = col.map(|z| z * d.lambda[nn]);
            assert!(
                (got - want).norm() <= 1e-6 * comp.cond_vand * col.norm(),
                "column {nn}"
            );
        }
        // the spectral companion shift V*^-1 conj(Lambda) V* equals c_comp
        let vc = comp.vand.map(|z| z.conj());
        let vc_inv = vc.clone().lu().try_inverse().unwrap();
        let mut lam_vc = vc.clone();
        for i in 0..12 {
            let l = d.lambda[i].conj();
            for j in 0..12 {
                lam_vc[(i, j)] *= l;
            }
        }
        let got = &vc_inv * lam_vc;
        let want = comp.c_comp.map(|x| c(x, 0.0));
        assert!((got - want).norm() <= 1e-6 * comp.cond_vand);
    }

    #[test]
    fn dot_output_cycle() {
        let m = model(&graphs::cycle(4));
        let dot = companion_graph_dot(m.companion());
        assert!(dot.contains("0 -> 1"));
        assert!(dot.contains("1 -> 2"));
        assert!(dot.contains("2 -> 3"));
        assert!(dot.contains("3 -> 0 [color=green]"));
        assert!(!dot.contains("not strongly connected"));
    }

    #[test]
    fn dot_output_ladder_backward_edges() {
        let m = model(&graphs::ladder(12).unwrap());
        let dot = companion_graph_dot(m.companion());
        for k in [0, 2, 4, 6, 8] {
            assert!(dot.contains(&format!("11 -> {k} [color=green]")), "edge to {k}");
        }
        assert!(!dot.contains("11 -> 1 ["));
    }

    #[test]
    fn cycle_p_equals_s_and_q_equals_hat() {
        let m = model(&graphs::cycle(6));
        let d = m.decomp();
        let s_vals: Vec<f64> = (0..6).map(|i| ((i * i) as f64 * 0.31).cos()).collect();
        let s = GraphSignal::from_real(&s_vals, Rep::VertexS, d).unwrap();
        let p = m.to_representation(&s, Rep::ImpulseP).unwrap();
        for i in 0..6 {
            assert!((p.values[i] - s.values[i]).norm() < 1e-8);
        }
        let hat = m.to_representation(&s, Rep::SpectrumHat).unwrap();
        let q = m.to_representation(&s, Rep::SpectralImpulseQ).unwrap();
        for i in 0..6 {
            assert!((q.values[i] - hat.values[i]).norm() < 1e-8);
        }
    }

    #[test]
    fn all_round_trips() {
        let (g, _) = graphs::random_strongly_connected(9, 17, 1e-3).unwrap();
        let m = model(&g);
        let d = m.decomp();
        let mut state = 5u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let values = nalgebra::DVector::from_fn(9, |_, _| c(next(), next()));
        let reps = [Rep::VertexS, Rep::SpectrumHat, Rep::ImpulseP, Rep::SpectralImpulseQ];
        for &from in &reps {
            let sig = GraphSignal::new(values.clone(), from, d).unwrap();
            for &to in &reps {
                let there = m.to_representation(&sig, to).unwrap();
                assert_eq!(there.rep, to);
                let back = m.to_representation(&there, from).unwrap();
                let err = (&back.values - &sig.values).norm();
                assert!(
                    err < 1e-7 * values.norm() * m.cond_vand().max(1.0),
                    "{from:?} -> {to:?} round trip error {err:.3e}"
                );
            }
        }
    }

    #[test]
    fn ladder_p_residual() {
        let m = model(&graphs::ladder(12).unwrap());
        let d = m.decomp();
        let mut e5 = vec![0.0; 12];
        e5[5] = 1.0;
        let s = GraphSignal::from_real(&e5, Rep::VertexS, d).unwrap();
        let hat = m.to_representation(&s, Rep::SpectrumHat).unwrap();
        let rec = crate::interp::recover_coeffs(&m, &hat).unwrap();
        assert!(rec.mse <= 1e-6, "mse = {:.3e}", rec.mse);
    }

    #[test]
    fn companion_delta_properties() {
        let m = model(&graphs::ladder(12).unwrap());
        let comp = m.companion();
        let e0 = companion_delta(&m, 0).unwrap();
        // GFT_comp e_0 = (1/sqrt(N)) 1
        let hat = &comp.gft_comp * &e0.values;
        for z in hat.iter() {
            assert!((z - c(1.0 / 12f64.sqrt(), 0.0)).norm() < 1e-12);
        }
        // e_1 in the vertex domain is A delta_0
        let e1 = companion_delta(&m, 1).unwrap();
        let vertex = m.to_representation(&e1, Rep::VertexS).unwrap();
        let d0 = crate::graph_model::vertex_impulse(m.decomp());
        let ad0 = m.decomp().adjacency_complex() * &d0.values;
        assert!((&vertex.values - ad0).norm() < 1e-7);
        // shifting e_{N-1} lands on the boundary column
        let elast = companion_delta(&m, 11).unwrap();
        let shifted = shift_in_rep(&m, &elast, 1).unwrap();
        for i in 0..12 {
            let want = -m.charpoly().coeffs[i];
            assert!((shifted.values[i] - c(want, 0.0)).norm() < 1e-12);
        }
        assert!(companion_delta(&m, 12).is_err());
    }

    #[test]
    fn shifts_commute_with_conversion() {
        let (g, _) = graphs::random_strongly_connected(8, 23, 1e-3).unwrap();
        let m = model(&g);
        let d = m.decomp();
        let mut state = 9u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let values = nalgebra::DVector::from_fn(8, |_, _| c(next(), next()));
        let s = GraphSignal::new(values, Rep::VertexS, d).unwrap();
        // to_p(A s) = C_comp to_p(s)
        let shifted_s = shift_in_rep(&m, &s, 1).unwrap();
        let p_of_shifted = m.to_representation(&shifted_s, Rep::ImpulseP).unwrap();
        let p = m.to_representation(&s, Rep::ImpulseP).unwrap();
        let shifted_p = shift_in_rep(&m, &p, 1).unwrap();
        let tol = 1e-7 * s.norm().max(1.0) * m.cond_vand().max(1.0);
        assert!((&p_of_shifted.values - &shifted_p.values).norm() < tol);
        // to_q(M-shifted s_hat) = C_comp to_q(s)
        let hat = m.to_representation(&s, Rep::SpectrumHat).unwrap();
        let shifted_hat = shift_in_rep(&m, &hat, 1).unwrap();
        let q_of_shifted = m
            .to_representation(&shifted_hat, Rep::SpectralImpulseQ)
            .unwrap();
        let q = m.to_representation(&s, Rep::SpectralImpulseQ).unwrap();
        let shifted_q = shift_in_rep(&m, &q, 1).unwrap();
        assert!((&q_of_shifted.values - &shifted_q.values).norm() < tol);
    }
}
