//! Graph/shift ingestion, eigendecomposition, spectral shift, characteristic
//! polynomial, impulses, and the classic GFT pipeline.

use nalgebra::{DMatrix, DVector};

use crate::{fresh_model_id, C64, Error, Result, Tolerances};

/// Weighted directed graph together with its adjacency shift `A`.
///
/// Entry `(i, j)` is the weight of edge `j -> i` (the signal-processing
/// convention: `A` is the transpose of the usual CS adjacency matrix).
#[derive(Debug, Clone)]
pub struct ShiftGraph {
    n: usize,
    a: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl ShiftGraph {
    pub fn from_matrix(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::MalformedInput(format!(
                "shift matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.nrows() < 2 {
            return Err(Error::MalformedInput("need at least 2 vertices".into()));
        }
        Ok(ShiftGraph { n: a.nrows(), a, labels: None })
    }

    /// Edge list: `(from, to, weight)` sets `A[to, from] = weight`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::MalformedInput("need at least 2 vertices".into()));
        }
        let mut a = DMatrix::zeros(n, n);
        for &(from, to, w) in edges {
            if from >= n || to >= n {
                return Err(Error::MalformedInput(format!(
                    "edge ({from}, {to}) out of range for n = {n}"
                )));
            }
            a[(to, from)] = w;
        }
        Self::from_matrix(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Kosaraju SCC count == 1. Reported as a diagnostic (Assumption 1),
    /// never silently assumed.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n;
        let reachable = |transpose: bool| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let w = if transpose { self.a[(u, v)] } else { self.a[(v, u)] };
                    if w != 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        reachable(false).into_iter().all(|x| x) && reachable(true).into_iter().all(|x| x)
    }
}

/// Which basis a [`GraphSignal`]'s coordinates refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rep {
    /// Standard (Euclidean) vertex coordinates `s`.
    VertexS,
    /// Graph Fourier coordinates `s_hat`.
    SpectrumHat,
    /// Vertex impulse coordinates `p` (companion model).
    ImpulseP,
    /// Spectral impulse coordinates `q` (spectral companion model).
    SpectralImpulseQ,
}

impl Rep {
    pub fn as_str(self) -> &'static str {
        match self {
            Rep::VertexS => "s",
            Rep::SpectrumHat => "hat",
            Rep::ImpulseP => "p",
            Rep::SpectralImpulseQ => "q",
        }
    }
}

impl std::str::FromStr for Rep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" | "vertex" => Ok(Rep::VertexS),
            "hat" | "spectrum" => Ok(Rep::SpectrumHat),
            "p" | "impulse" => Ok(Rep::ImpulseP),
            "q" | "spectral-impulse" => Ok(Rep::SpectralImpulseQ),
            other => Err(Error::MalformedInput(format!("unknown representation '{other}'"))),
        }
    }
}

/// A length-N complex signal tagged with the representation it lives in and
/// the model it is expressed against.
#[derive(Debug, Clone)]
pub struct GraphSignal {
    pub values: DVector<C64>,
    pub rep: Rep,
    pub model_id: u64,
}

impl GraphSignal {
    pub fn new(values: DVector<C64>, rep: Rep, d: &SpectralDecomposition) -> Result<Self> {
        if values.len() != d.n {
            return Err(Error::DimensionMismatch(format!(
                "signal length {} vs model size {}",
                values.len(),
                d.n
            )));
        }
        Ok(GraphSignal { values, rep, model_id: d.id })
    }

    pub fn from_real(values: &[f64], rep: Rep, d: &SpectralDecomposition) -> Result<Self> {
        let v = DVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(v, rep, d)
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a shift with canonical eigenvalue ordering and
/// conjugate-pairing metadata.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub(crate) id: u64,
    pub(crate) n: usize,
    pub(crate) a: DMatrix<f64>,
    /// Eigenvalues in canonical order: ascending phase of conj(lambda) in
    /// [0, 2pi), ties by descending magnitude, then stable original index.
    pub lambda: DVector<C64>,
    pub gft: DMatrix<C64>,
    /// Columns are the unit-norm, gauge-fixed eigenvectors.
    pub gft_inv: DMatrix<C64>,
    /// Spectral shift `M = GFT conj(Lambda) GFT^-1`.
    pub m_shift: DMatrix<C64>,
    /// Smallest pairwise eigenvalue distance.
    pub min_gap: f64,
    /// `pairing[k]` is the index of conj(lambda_k); `k` itself when real.
    pub pairing: Vec<usize>,
    pub tol: Tolerances,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn adjacency_complex(&self) -> DMatrix<C64> {
        to_complex(&self.a)
    }
}

fn conj_phase(z: C64) -> f64 {
    let p = -z.arg();
    if p < -1e-15 {
        p + std::f64::consts::TAU
    } else if p < 0.0 {
        0.0
    } else {
        p
    }
}

/// Force the eigenvalue multiset of a real matrix to be exactly closed under
/// conjugation: near-real values are realified, complex values are matched
/// into pairs and the lower-half member replaced by the exact conjugate.
fn symmetrize_spectrum(lam: &mut [C64]) -> Result<()> {
    let scale = lam.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = 1e-9 * scale;
    let mut upper: Vec<usize> = Vec::new();
    let mut lower: Vec<usize> = Vec::new();
    for (k, z) in lam.iter_mut().enumerate() {
        if z.im.abs() <= eps {
            z.im = 0.0;
        } else if z.im > 0.0 {
            upper.push(k);
        } else {
            lower.push(k);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::EigensolverFailure(
            "complex eigenvalues of a real matrix did not pair up".into(),
        ));
    }
    let mut used = vec![false; lam.len()];
    for &u in &upper {
        let target = lam[u].conj();
        let mut best: Option<(usize, f64)> = None;
        for &l in &lower {
            if used[l] {
                continue;
            }
            let d = (lam[l] - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((l, d));
            }
        }
        let (l, d) = best.ok_or_else(|| {
            Error::EigensolverFailure("conjugate partner matching failed".into())
        })?;
        if d > 1e-6 * scale {
            return Err(Error::EigensolverFailure(format!(
                "conjugate partner mismatch {d:.3e}"
            )));
        }
        lam[l] = target;
        used[l] = true;
    }
    Ok(())
}

fn to_complex(a: &DMatrix<f64>) -> DMatrix<C64> {
    a.map(|x| C64::new(x, 0.0))
}

/// Eigenvalues via real Schur. The QR iteration can stall on highly
/// structured matrices (e.g. permutations); retry under a deterministic
/// random orthogonal similarity, which preserves the spectrum exactly.
fn schur_eigenvalues(a: &DMatrix<f64>) -> Result<DVector<C64>> {
    if let Some(s) = a.clone().try_schur(1e-12, 10_000) {
        return Ok(s.complex_eigenvalues());
    }
    let n = a.nrows();
    let mut state = 0x5DEECE66Du64;
    for _attempt in 0..6 {
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let rnd = DMatrix::from_fn(n, n, |_, _| next());
        let qr = rnd.qr();
        let q = qr.q();
        let b = q.transpose() * a * &q;
        if let Some(s) = b.try_schur(1e-12, 10_000) {
            return Ok(s.complex_eigenvalues());
        }
    }
    Err(Error::EigensolverFailure("Schur iteration did not converge".into()))
}

/// One eigenvector by shifted inverse iteration with a complex LU factor.
fn inverse_iteration(a: &DMatrix<C64>, lambda: C64, a_fro: f64) -> Result<DVector<C64>> {
    let n = a.nrows();
    let mut shift = lambda;
    for attempt in 0..4 {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let lu = m.lu();
        // deterministic start with components along every direction
        let mut x = DVector::from_fn(n, |i, _| C64::new(1.0, 0.3 + 0.07 * i as f64));
        x = x.unscale(x.norm());
        let mut ok = true;
        for _ in 0..4 {
            match lu.solve(&x) {
                Some(y) => {
                    let ny = y.norm();
                    if !ny.is_finite() || ny == 0.0 {
                        ok = false;
                        break;
                    }
                    x = y.unscale(ny);
                }
                None => {
                    ok = false;
                    break;
                }
            }
            let res = (a * &x - x.map(|v| v * lambda)).norm();
            if res <= 1e-13 * a_fro.max(1.0) {
                return Ok(x);
            }
        }
        if ok {
            let res = (a * &x - x.map(|v| v * lambda)).norm();
            if res <= 1e-9 * a_fro.max(1.0) {
                return Ok(x);
            }
        }
        // exactly singular factor or stalled iteration: nudge the shift
        let mag = 1e-12 * (1.0 + lambda.norm()) * 10f64.powi(attempt);
        shift = lambda + C64::new(mag, mag);
    }
    Err(Error::EigensolverFailure(format!(
        "inverse iteration did not converge for lambda = {lambda}"
    )))
}

/// Gauge: largest-magnitude entry (lowest index on near-ties) made real
/// positive; vector already unit norm.
fn gauge_fix(v: &mut DVector<C64>) {
    let mut max_mag: f64 = 0.0;
    for z in v.iter() {
        max_mag = max_mag.max(z.norm());
    }
    let mut anchor = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() >= max_mag * (1.0 - 1e-9) {
            anchor = i;
            break;
        }
    }
    let a = v[anchor];
    let phase = a / a.norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
    // kill the rounding dust in the anchor's imaginary part
    v[anchor] = C64::new(v[anchor].norm(), 0.0);
}

/// Canonically ordered eigendecomposition of the shift.
///
/// Fails when the smallest pairwise eigenvalue gap is at or below
/// `distinct_tol * max(max|lambda|, ||A||_F)` (distinct-eigenvalue
/// assumption; the matrix norm keeps near-nilpotent shifts, whose computed
/// eigenvalues are pure rounding scatter, from slipping through) or when
/// the eigen residual exceeds `eig_tol * ||A||_F`.
pub fn decompose(g: &ShiftGraph, tol: Tolerances) -> Result<SpectralDecomposition> {
    let n = g.n();
    let a = g.adjacency().clone();
    let a_fro = a.norm();

    let schur_lam = schur_eigenvalues(&a)?;
    let mut lam: Vec<C64> = schur_lam.iter().copied().collect();
    symmetrize_spectrum(&mut lam)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        conj_phase(lam[i])
            .partial_cmp(&conj_phase(lam[j]))
            .unwrap()
            .then(lam[j].norm().partial_cmp(&lam[i].norm()).unwrap())
            .then(i.cmp(&j))
    });
    let lam: Vec<C64> = order.into_iter().map(|i| lam[i]).collect();

    let max_mag = lam.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_gap = min_gap.min((lam[i] - lam[j]).norm());
        }
    }
    let gap_tol = tol.distinct_tol * max_mag.max(a_fro).max(1e-300);
    if min_gap <= gap_tol {
        return Err(Error::RepeatedEigenvalues { gap: min_gap, tol: gap_tol });
    }

    // pairing metadata (exact after symmetrization)
    let mut pairing = vec![usize::MAX; n];
    for k in 0..n {
        if lam[k].im == 0.0 {
            pairing[k] = k;
        } else {
            let target = lam[k].conj();
            pairing[k] = (0..n)
                .min_by(|&i, &j| {
                    (lam[i] - target)
                        .norm()
                        .partial_cmp(&(lam[j] - target).norm())
                        .unwrap()
                })
                .unwrap();
        }
    }

    let ac = to_complex(&a);
    let mut gft_inv = DMatrix::<C64>::zeros(n, n);
    let mut done = vec![false; n];
    for k in 0..n {
        if done[k] {
            continue;
        }
        if lam[k].im == 0.0 {
            // real eigenvalue: real inverse iteration keeps the vector exactly real
            let v = real_inverse_iteration(&a, lam[k].re, a_fro)?;
            for i in 0..n {
                gft_inv[(i, k)] = C64::new(v[i], 0.0);
            }
            done[k] = true;
        } else {
            let (rep, partner) = if lam[k].im > 0.0 { (k, pairing[k]) } else { (pairing[k], k) };
            let mut v = inverse_iteration(&ac, lam[rep], a_fro)?;
            gauge_fix(&mut v);
            for i in 0..n {
                gft_inv[(i, rep)] = v[i];
                gft_inv[(i, partner)] = v[i].conj();
            }
            done[rep] = true;
            done[partner] = true;
        }
    }

    // residual check on every eigenvector
    let lam_vec = DVector::from_vec(lam.clone());
    for k in 0..n {
        let v = gft_inv.column(k).clone_owned();
        let res = (&ac * &v - v.map(|z| z * lam_vec[k])).norm();
        if res > tol.eig_tol * a_fro.max(1.0) {
            return Err(Error::EigensolverFailure(format!(
                "eigen residual {res:.3e} for eigenvalue {}",
                lam_vec[k]
            )));
        }
    }

    let gft = gft_inv
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::EigensolverFailure("eigenvector matrix is singular".into()))?;

    let mut m_shift = gft.clone();
    for k in 0..n {
        let c = lam_vec[k].conj();
        for i in 0..n {
            m_shift[(i, k)] *= c;
        }
    }
    let m_shift = &m_shift * &gft_inv;

    Ok(SpectralDecomposition {
        id: fresh_model_id(),
        n,
        a,
        lambda: lam_vec,
        gft,
        gft_inv,
        m_shift,
        min_gap,
        pairing,
        tol,
    })
}

fn real_inverse_iteration(a: &DMatrix<f64>, lambda: f64, a_fro: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    let mut shift = lambda;
    for attempt in 0..4 {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let lu = m.lu();
        let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.17 * i as f64);
        x /= x.norm();
        let mut stalled = false;
        for _ in 0..4 {
            match lu.solve(&x) {
                Some(y) => {
                    let ny = y.norm();
                    if !ny.is_finite() || ny == 0.0 {
                        stalled = true;
                        break;
                    }
                    x = y.unscale(ny);
                }
                None => {
                    stalled = true;
                    break;
                }
            }
            if (a * &x - &x * lambda).norm() <= 1e-13 * a_fro.max(1.0) {
                // sign gauge: anchor entry positive
                gauge_sign(&mut x);
                return Ok(x);
            }
        }
        if !stalled && (a * &x - &x * lambda).norm() <= 1e-9 * a_fro.max(1.0) {
            gauge_sign(&mut x);
            return Ok(x);
        }
        shift = lambda + 1e-12 * (1.0 + lambda.abs()) * 10f64.powi(attempt);
    }
    Err(Error::EigensolverFailure(format!(
        "inverse iteration did not converge for real lambda = {lambda}"
    )))
}

fn gauge_sign(v: &mut DVector<f64>) {
    let max_mag = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for i in 0..v.len() {
        if v[i].abs() >= max_mag * (1.0 - 1e-9) {
            if v[i] < 0.0 {
                *v = -v.clone();
            }
            return;
        }
    }
}

/// Monic characteristic polynomial as a real coefficient vector
/// `[c0, ..., c_{N-1}, 1]`.
#[derive(Debug, Clone)]
pub struct CharPoly {
    /// Length N+1, leading coefficient exactly 1.
    pub coeffs: Vec<f64>,
    /// Max imaginary magnitude discarded when realifying.
    pub imag_residual: f64,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Expand `prod_k (x - lambda_k)` by sequential monomial multiplication,
/// then realify. O(N^2), reuses the decomposition.
pub fn char_poly(d: &SpectralDecomposition) -> Result<CharPoly> {
    let n = d.n;
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[0] = C64::new(1.0, 0.0);
    let mut deg = 0usize;
    for k in 0..n {
        let root = d.lambda[k];
        c[deg + 1] = c[deg];
        for j in (1..=deg).rev() {
            c[j] = c[j - 1] - root * c[j];
        }
        c[0] = -root * c[0];
        deg += 1;
    }
    let imag_residual = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = c.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if imag_residual > d.tol.charpoly_tol * scale {
        return Err(Error::NumericalInvariant(format!(
            "characteristic polynomial imaginary residual {imag_residual:.3e}"
        )));
    }
    let mut coeffs: Vec<f64> = c.iter().map(|z| z.re).collect();
    coeffs[n] = 1.0;
    Ok(CharPoly { coeffs, imag_residual })
}

/// Vertex impulse `delta_0 = GFT^-1 (1/sqrt(N)) 1`, returned in the vertex
/// representation. Real for real shifts thanks to the conjugate pairing of
/// the eigenvectors.
pub fn vertex_impulse(d: &SpectralDecomposition) -> GraphSignal {
    let n = d.n;
    let flat = DVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let values = &d.gft_inv * flat;
    GraphSignal { values, rep: Rep::VertexS, model_id: d.id }
}

/// Columns `delta_0 .. delta_{k_max}`, `delta_n = A^n delta_0`, computed by
/// repeated application of `A` (never by matrix powering).
pub fn delayed_impulses(d: &SpectralDecomposition, k_max: usize) -> Result<DMatrix<C64>> {
    if k_max > d.n - 1 {
        return Err(Error::IndexOutOfRange { index: k_max, n: d.n });
    }
    let ac = to_complex(&d.a);
    let mut cols = Vec::with_capacity(k_max + 1);
    let mut cur = vertex_impulse(d).values;
    cols.push(cur.clone());
    for _ in 0..k_max {
        cur = &ac * cur;
        cols.push(cur.clone());
    }
    let m = DMatrix::from_columns(&cols);
    if k_max == d.n - 1 {
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= d.tol.rank_tol * smax {
            return Err(Error::NumericalInvariant(format!(
                "vertex impulsive matrix rank deficient: sigma_min/sigma_max = {:.3e}",
                smin / smax
            )));
        }
    }
    Ok(m)
}

/// Spectral impulse `delta_sp_hat,0 = GFT (1/sqrt(N)) 1` in the spectrum
/// representation.
pub fn spectral_impulse(d: &SpectralDecomposition) -> GraphSignal {
    let n = d.n;
    let flat = DVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let values = &d.gft * flat;
    GraphSignal { values, rep: Rep::SpectrumHat, model_id: d.id }
}

/// Columns `M^n delta_sp_hat,0` by repeated application of `M`.
pub fn delayed_spectral_impulses(d: &SpectralDecomposition, k_max: usize) -> Result<DMatrix<C64>> {
    if k_max > d.n - 1 {
        return Err(Error::IndexOutOfRange { index: k_max, n: d.n });
    }
    let mut cols = Vec::with_capacity(k_max + 1);
    let mut cur = spectral_impulse(d).values;
    cols.push(cur.clone());
    for _ in 0..k_max {
        cur = &d.m_shift * cur;
        cols.push(cur.clone());
    }
    Ok(DMatrix::from_columns(&cols))
}

/// `sum_k coeffs[k] A^k s` by Horner-style repeated shift-and-add.
pub fn lsi_filter_apply(
    d: &SpectralDecomposition,
    coeffs: &[C64],
    sig: &GraphSignal,
) -> Result<GraphSignal> {
    if sig.model_id != d.id {
        return Err(Error::ModelMismatch);
    }
    if sig.rep != Rep::VertexS {
        return Err(Error::MalformedInput("lsi_filter_apply expects a vertex-domain signal".into()));
    }
    if coeffs.len() > d.n {
        return Err(Error::DimensionMismatch(format!(
            "filter length {} exceeds model size {}",
            coeffs.len(),
            d.n
        )));
    }
    let ac = to_complex(&d.a);
    let s = &sig.values;
    let mut acc = DVector::from_element(d.n, C64::new(0.0, 0.0));
    for &c in coeffs.iter().rev() {
        acc = &ac * acc + s.map(|v| v * c);
    }
    Ok(GraphSignal { values: acc, rep: Rep::VertexS, model_id: d.id })
}

/// GFT of a vertex-domain signal.
pub fn gft_apply(d: &SpectralDecomposition, sig: &GraphSignal) -> Result<GraphSignal> {
    if sig.model_id != d.id {
        return Err(Error::ModelMismatch);
    }
    if sig.rep != Rep::VertexS {
        return Err(Error::MalformedInput("gft_apply expects a vertex-domain signal".into()));
    }
    Ok(GraphSignal { values: &d.gft * &sig.values, rep: Rep::SpectrumHat, model_id: d.id })
}

/// Inverse GFT of a spectrum-domain signal.
pub fn gft_inv_apply(d: &SpectralDecomposition, sig: &GraphSignal) -> Result<GraphSignal> {
    if sig.model_id != d.id {
        return Err(Error::ModelMismatch);
    }
    if sig.rep != Rep::SpectrumHat {
        return Err(Error::MalformedInput("gft_inv_apply expects a spectrum signal".into()));
    }
    Ok(GraphSignal { values: &d.gft_inv * &sig.values, rep: Rep::VertexS, model_id: d.id })
}
