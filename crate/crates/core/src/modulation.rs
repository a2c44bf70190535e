//! Carrier modulation with conjugate spectral-frequency-vector powers,
//! K-signal multiplexing in the q domain, and demultiplexing.

use nalgebra::DVector;

use crate::graph_model::{GraphSignal, Rep};
use crate::model::Model;
use crate::{C64, Error, Result};

/// Frequency-division plan: K signals, each confined to the first B
/// q-coordinates, carried at powers 0, B, 2B, ..., (K-1)B.
#[derive(Debug, Clone)]
pub struct MultiplexPlan {
    pub band: usize,
    pub count: usize,
    pub model_id: u64,
}

impl MultiplexPlan {
    pub fn new(model: &Model, band: usize, count: usize) -> Result<Self> {
        if band < 1 || count < 1 {
            return Err(Error::InvalidPlan("band and count must be at least 1".into()));
        }
        if band * count > model.n() {
            return Err(Error::InvalidPlan(format!(
                "K*B = {} exceeds N = {}",
                band * count,
                model.n()
            )));
        }
        if model.has_zero_eigenvalue() {
            return Err(Error::InvalidPlan(
                "model has a (near-)zero eigenvalue; carriers are not invertible".into(),
            ));
        }
        Ok(MultiplexPlan { band, count, model_id: model.id() })
    }

    pub fn carrier_powers(&self) -> Vec<usize> {
        (0..self.count).map(|i| i * self.band).collect()
    }
}

/// Bandlimit test in the q representation: relative tail energy beyond the
/// first `band` coordinates.
pub fn is_q_bandlimited(model: &Model, sig: &GraphSignal, band: usize) -> Result<(bool, f64)> {
    let q = model.to_representation(sig, Rep::SpectralImpulseQ)?;
    let total = q.values.norm();
    if total == 0.0 {
        return Ok((true, 0.0));
    }
    let tail: f64 = q.values.iter().skip(band).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let leakage = tail / total;
    Ok((leakage <= model.tolerances().band_tol, leakage))
}

/// Elementwise carrier product `conj(lambda)^i .* s`; in the q domain this
/// is `i` applications of the companion shift.
pub fn modulate(model: &Model, sig: &GraphSignal, power: usize) -> Result<GraphSignal> {
    if sig.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    if sig.rep != Rep::VertexS {
        return Err(Error::MalformedInput("modulate expects a vertex-domain signal".into()));
    }
    let d = model.decomp();
    let values = DVector::from_fn(model.n(), |i, _| {
        d.lambda[i].conj().powu(power as u32) * sig.values[i]
    });
    Ok(GraphSignal { values, rep: Rep::VertexS, model_id: model.id() })
}

/// `d = sum_i conj(lambda)^(B*i) .* s_i`. Every input must be q-bandlimited
/// to the plan's band; otherwise the shifted bands would overlap and sum.
pub fn multiplex(model: &Model, plan: &MultiplexPlan, signals: &[GraphSignal]) -> Result<GraphSignal> {
    if plan.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    if signals.len() != plan.count {
        return Err(Error::InvalidPlan(format!(
            "{} signals for a K = {} plan",
            signals.len(),
            plan.count
        )));
    }
    for (i, sig) in signals.iter().enumerate() {
        let (ok, leakage) = is_q_bandlimited(model, sig, plan.band)?;
        if !ok {
            return Err(Error::BandLeakage { leakage, tol: model.tolerances().band_tol });
        }
        let _ = i;
    }
    let mut acc = DVector::from_element(model.n(), C64::new(0.0, 0.0));
    for (i, sig) in signals.iter().enumerate() {
        let carried = modulate(model, sig, plan.band * i)?;
        acc += carried.values;
    }
    Ok(GraphSignal { values: acc, rep: Rep::VertexS, model_id: model.id() })
}

/// Recover slot `index` from a multiplexed signal: band-pass plus shift-back
/// realized as direct index relocation in the q coordinates.
pub fn demultiplex(
    model: &Model,
    plan: &MultiplexPlan,
    d: &GraphSignal,
    index: usize,
) -> Result<GraphSignal> {
    if plan.model_id != model.id() || d.model_id != model.id() {
        return Err(Error::ModelMismatch);
    }
    if index >= plan.count {
        return Err(Error::IndexOutOfRange { index, n: plan.count });
    }
    let qd = model.to_representation(d, Rep::SpectralImpulseQ)?;
    let mut q = DVector::from_element(model.n(), C64::new(0.0, 0.0));
    let base = plan.band * index;
    for b in 0..plan.band {
        q[b] = qd.values[base + b];
    }
    let q_sig = GraphSignal { values: q, rep: Rep::SpectralImpulseQ, model_id: model.id() };
    model.to_representation(&q_sig, Rep::VertexS)
}

/// Alternative recovery: undo the carrier with negative Hadamard powers,
/// then project to the band. Cross-checks `demultiplex`; needs nonzero
/// eigenvalues and amplifies noise when |lambda| < 1.
pub fn demultiplex_by_carrier(
    model: &Model,
    plan: &MultiplexPlan,
    d: &GraphSignal,
    index: usize,
) -> Result<GraphSignal> {
    if index >= plan.count {
        return Err(Error::IndexOutOfRange { index, n: plan.count });
    }
    let dec = model.decomp();
    let power = (plan.band * index) as i32;
    let descaled = DVector::from_fn(model.n(), |i, _| {
        d.values[i] * dec.lambda[i].conj().powi(-power)
    });
    let sig = GraphSignal { values: descaled, rep: Rep::VertexS, model_id: model.id() };
    Ok(bandlimit_project(model, &sig, plan.band)?.0)
}

/// GFT of the multiplexed signal; the spectral-domain copies are M-shifted,
/// not translated.
pub fn spectral_view(model: &Model, d: &GraphSignal) -> Result<GraphSignal> {
    model.to_representation(d, Rep::SpectrumHat)
}

/// Zero the q coordinates at and beyond `band`; returns the projected
/// vertex-domain signal and the relative energy removed.
pub fn bandlimit_project(
    model: &Model,
    sig: &GraphSignal,
    band: usize,
) -> Result<(GraphSignal, f64)> {
    let q = model.to_representation(sig, Rep::SpectralImpulseQ)?;
    let total = q.values.norm();
    let mut values = q.values.clone();
    let mut removed = 0.0;
    for b in band..model.n() {
        removed += values[b].norm_sqr();
        values[b] = C64::new(0.0, 0.0);
    }
    let loss = if total == 0.0 { 0.0 } else { removed.sqrt() / total };
    let q_sig = GraphSignal { values, rep: Rep::SpectralImpulseQ, model_id: model.id() };
    Ok((model.to_representation(&q_sig, Rep::VertexS)?, loss))
}
