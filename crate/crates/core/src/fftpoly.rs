//! Arbitrary-length FFT, complex polynomial arithmetic, remainder mod the
//! characteristic polynomial, and the three-path graph circular convolution.

use nalgebra::DVector;

use crate::graph_model::{CharPoly, GraphSignal, Rep};
use crate::model::Model;
use crate::{C64, Error, Result};

/// Forward DFT (kernel e^{-j 2 pi k n / L}); inverse carries the 1/L factor.
/// Powers of two use iterative radix-2 Cooley-Tukey; other lengths go
/// through Bluestein's chirp-z embedded in a power-of-two transform.
pub fn fft(x: &[C64], inverse: bool) -> Vec<C64> {
    let l = x.len();
    if l <= 1 {
        return x.to_vec();
    }
    if inverse {
        let conj_in: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        let y = fft(&conj_in, false);
        let scale = 1.0 / l as f64;
        return y.into_iter().map(|z| z.conj() * scale).collect();
    }
    if l.is_power_of_two() {
        let mut buf = x.to_vec();
        fft_pow2_in_place(&mut buf, false);
        buf
    } else {
        bluestein(x)
    }
}

fn fft_pow2_in_place(buf: &mut [C64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * std::f64::consts::TAU / len as f64;
        let wl = C64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = C64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wl;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }
}

/// Chirp-z: express the length-L DFT as a circular convolution of chirped
/// sequences and do that convolution with a power-of-two FFT.
fn bluestein(x: &[C64]) -> Vec<C64> {
    let l = x.len();
    // chirp_k = e^{-j pi k^2 / L}; reduce k^2 mod 2L to keep the angle small
    let chirp = |k: usize| -> C64 {
        let e = (k * k) % (2 * l);
        let ang = -std::f64::consts::PI * e as f64 / l as f64;
        C64::new(ang.cos(), ang.sin())
    };
    let m = (2 * l - 1).next_power_of_two();
    let mut a = vec![C64::new(0.0, 0.0); m];
    let mut b = vec![C64::new(0.0, 0.0); m];
    for k in 0..l {
        a[k] = x[k] * chirp(k);
        let c = chirp(k).conj();
        b[k] = c;
        if k > 0 {
            b[m - k] = c;
        }
    }
    fft_pow2_in_place(&mut a, false);
    fft_pow2_in_place(&mut b, false);
    for k in 0..m {
        a[k] *= b[k];
    }
    fft_pow2_in_place(&mut a, true);
    (0..l).map(|k| a[k] * chirp(k)).collect()
}

/// Dense complex polynomial; index = power, trailing near-zeros trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        let trim_tol =
            1e-12 * coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        while let Some(last) = coeffs.last() {
            if last.norm() <= trim_tol {
                coeffs.pop();
            } else {
                break;
            }
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Coefficients padded/truncated to exactly `n` entries.
    pub fn padded(&self, n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, &c) in self.coeffs.iter().enumerate().take(n) {
            out[i] = c;
        }
        out
    }
}

/// Product of two polynomials: schoolbook when the result is short, FFT
/// linear convolution otherwise.
pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let out_len = a.coeffs.len() + b.coeffs.len() - 1;
    if out_len < 16 {
        let mut out = vec![C64::new(0.0, 0.0); out_len];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            for (j, &bj) in b.coeffs.iter().enumerate() {
                out[i + j] += ai * bj;
            }
        }
        return Poly::new(out);
    }
    let m = out_len.next_power_of_two();
    let mut fa = vec![C64::new(0.0, 0.0); m];
    let mut fb = vec![C64::new(0.0, 0.0); m];
    fa[..a.coeffs.len()].copy_from_slice(&a.coeffs);
    fb[..b.coeffs.len()].copy_from_slice(&b.coeffs);
    fft_pow2_in_place(&mut fa, false);
    fft_pow2_in_place(&mut fb, false);
    for k in 0..m {
        fa[k] *= fb[k];
    }
    fft_pow2_in_place(&mut fa, true);
    fa.truncate(out_len);
    Poly::new(fa)
}

/// Remainder of `a` divided by the monic modulus, by coefficient-exact
/// synthetic long division. Degree of the result is < deg(modulus).
pub fn poly_mod(a: &Poly, modulus: &CharPoly) -> Result<Poly> {
    let n = modulus.degree();
    if (modulus.coeffs[n] - 1.0).abs() > 1e-12 {
        return Err(Error::NonMonicModulus);
    }
    let mut r = a.coeffs.clone();
    while r.len() > n {
        let lead = *r.last().unwrap();
        let deg = r.len() - 1;
        r.pop();
        if lead.norm() == 0.0 {
            continue;
        }
        // subtract lead * x^(deg-n) * modulus (the x^deg terms cancel)
        for k in 0..n {
            r[deg - n + k] -= lead * modulus.coeffs[k];
        }
    }
    Ok(Poly::new(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMethod {
    /// p-representation product mod the characteristic polynomial, via FFT.
    Fft,
    /// Nested Horner application of the filter matrices, no transforms.
    Matrix,
    /// Hadamard product of spectra: `GFT^-1 (sqrt(N) t_hat .* s_hat)`.
    Spectral,
}

impl std::str::FromStr for ConvMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fft" => Ok(ConvMethod::Fft),
            "matrix" => Ok(ConvMethod::Matrix),
            "spectral" => Ok(ConvMethod::Spectral),
            other => Err(Error::MalformedInput(format!("unknown convolution method '{other}'"))),
        }
    }
}

/// Graph circular convolution of two vertex-domain signals. All methods
/// return a vertex-domain signal and agree within conv_tol * cond(V).
pub fn convolve(
    model: &Model,
    s: &GraphSignal,
    t: &GraphSignal,
    method: ConvMethod,
) -> Result<GraphSignal> {
    if s.model_id != model.id() || t.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    let n = model.n();
    match method {
        ConvMethod::Fft => {
            let ps = model.to_representation(s, Rep::ImpulseP)?;
            let pt = model.to_representation(t, Rep::ImpulseP)?;
            let prod = poly_mul(
                &Poly::new(ps.values.iter().copied().collect()),
                &Poly::new(pt.values.iter().copied().collect()),
            );
            let reduced = poly_mod(&prod, model.charpoly())?;
            let pu = GraphSignal {
                values: DVector::from_vec(reduced.padded(n)),
                rep: Rep::ImpulseP,
                model_id: model.id(),
            };
            model.to_representation(&pu, Rep::VertexS)
        }
        ConvMethod::Matrix => {
            // t (*) s = P_t(A) (P_s(A) delta_0) = P_t(A) s
            let pt = model.to_representation(t, Rep::ImpulseP)?;
            let coeffs: Vec<C64> = pt.values.iter().copied().collect();
            crate::graph_model::lsi_filter_apply(model.decomp(), &coeffs, s)
        }
        ConvMethod::Spectral => {
            let shat = model.to_representation(s, Rep::SpectrumHat)?;
            let that = model.to_representation(t, Rep::SpectrumHat)?;
            let root_n = (n as f64).sqrt();
            let prod = DVector::from_fn(n, |i, _| root_n * that.values[i] * shat.values[i]);
            let hat = GraphSignal { values: prod, rep: Rep::SpectrumHat, model_id: model.id() };
            model.to_representation(&hat, Rep::VertexS)
        }
    }
}

/// Coefficients of the unique degree-< N filter whose impulse response is
/// `s`: exactly the p-representation of `s`.
pub fn filter_from_signal(model: &Model, s: &GraphSignal) -> Result<Vec<C64>> {
    if s.rep != Rep::VertexS {
        return Err(Error::MalformedInput("filter_from_signal expects a vertex signal".into()));
    }
    let p = model.to_representation(s, Rep::ImpulseP)?;
    Ok(p.values.iter().copied().collect())
}
