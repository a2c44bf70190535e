//! One-stop bundle of everything derived from a shift graph: spectral
//! decomposition, characteristic polynomial, companion model, and the
//! reusable interpolation tables for the p/q recoveries.

use nalgebra::DVector;

use crate::companion::{self, CompanionModel};
use crate::graph_model::{
    char_poly, decompose, CharPoly, GraphSignal, Rep, ShiftGraph, SpectralDecomposition,
};
use crate::interp::{build_table, BarycentricTable};
use crate::{C64, Result, Tolerances};

pub type ModelId = u64;

#[derive(Debug, Clone)]
pub struct Model {
    graph: ShiftGraph,
    decomp: SpectralDecomposition,
    charpoly: CharPoly,
    companion: CompanionModel,
    table_p: BarycentricTable,
    table_q: BarycentricTable,
}

impl Model {
    pub fn build(g: &ShiftGraph, tol: Tolerances) -> Result<Model> {
        let decomp = decompose(g, tol)?;
        let charpoly = char_poly(&decomp)?;
        let companion = companion::build_companion(&decomp, &charpoly)?;
        let nodes: Vec<C64> = decomp.lambda.iter().copied().collect();
        let conj_nodes: Vec<C64> = nodes.iter().map(|z| z.conj()).collect();
        let table_p = build_table(&nodes)?;
        let table_q = build_table(&conj_nodes)?;
        Ok(Model { graph: g.clone(), decomp, charpoly, companion, table_p, table_q })
    }

    pub fn n(&self) -> usize {
        self.decomp.n()
    }

    pub fn id(&self) -> ModelId {
        self.decomp.id()
    }

    pub fn graph(&self) -> &ShiftGraph {
        &self.graph
    }

    pub fn decomp(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn charpoly(&self) -> &CharPoly {
        &self.charpoly
    }

    pub fn companion(&self) -> &CompanionModel {
        &self.companion
    }

    pub fn table_p(&self) -> &BarycentricTable {
        &self.table_p
    }

    pub fn table_q(&self) -> &BarycentricTable {
        &self.table_q
    }

    pub fn cond_vand(&self) -> f64 {
        self.companion.cond_vand
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.decomp.tol
    }

    /// True when the zero eigenvalue is present (within the distinctness
    /// scale), which breaks companion-graph strong connectivity and forbids
    /// carrier demodulation by negative Hadamard powers.
    pub fn has_zero_eigenvalue(&self) -> bool {
        let scale = self.decomp.lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.decomp
            .lambda
            .iter()
            .any(|z| z.norm() <= self.decomp.tol.distinct_tol * scale.max(1e-300))
    }

    pub fn signal(&self, values: Vec<C64>, rep: Rep) -> Result<GraphSignal> {
        GraphSignal::new(DVector::from_vec(values), rep, &self.decomp)
    }

    pub fn signal_real(&self, values: &[f64], rep: Rep) -> Result<GraphSignal> {
        GraphSignal::from_real(values, rep, &self.decomp)
    }

    pub fn to_representation(&self, sig: &GraphSignal, target: Rep) -> Result<GraphSignal> {
        companion::to_representation(self, sig, target)
    }
}
