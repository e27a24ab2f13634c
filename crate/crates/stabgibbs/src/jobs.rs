//! Batch commands behind the `stabgibbs` CLI: gap scans, stair-graph
//! scaling studies, block verification, mixing runs, and model dumps.
//!
//! Every command is deterministic given (config, seed); CSV floats are
//! printed with 17 significant digits and outputs are written atomically
//! (temp file + rename). JSON payloads carry `"schema": "stabgibbs/1"`.

use crate::davies::{davies_lindbladian, BohrRoute, Frame, Superoperator};
use crate::dynamics::{mixing_trace, DensityState};
use crate::eigen::{
    min_eigenvalue_iterative_warm, spectral_gap, IterConfig, Method, SpectralResult,
};
use crate::gibbs::GibbsModel;
use crate::lattice::{RingLattice, TorusLattice};
use crate::model::{CouplingSet, StabilizerModel};
use crate::sector::{
    lambda_sector_basis, lambda_block_assembly, reduced_master_psd, restrict_superoperator,
    toric_sector_basis, LambdaSector, LogicalFactor, ReducedSpace, SectorLabel, SparseVec,
};
use crate::sparse::SparseOperator;
use crate::stair::{stair_graph, stair_test_vector, stair_vertex_index};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "stabgibbs/1";
/// Desk limits: full superoperators up to 4^8; the torus beyond L = 2
/// only through sector-restricted commands.
pub const MAX_ISING_FULL: usize = 8;
pub const MAX_TORIC_FULL: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    GapScan,
    StairScan,
    BlockVerify,
    MixRun,
    ModelDump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Ising,
    Toric,
}

/// Tolerance overrides; defaults are the certified values used by the
/// acceptance suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub block_entry: f64,
    pub leakage: f64,
    pub sector_floor_slack: f64,
    pub stationarity: f64,
    pub hermiticity: f64,
    pub chi2_bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            block_entry: 1e-11,
            leakage: 1e-12,
            sector_floor_slack: 1e-10,
            stationarity: 1e-11,
            hermiticity: 1e-10,
            chi2_bound_slack: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct JobConfig {
    pub command: Option<CommandKind>,
    pub model: ModelChoice,
    pub sizes: Vec<usize>,
    pub betas: Vec<f64>,
    pub couplings: CouplingSet,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub coupling_j: f64,
    /// n values for stair-scan.
    pub stair_sizes: Vec<usize>,
    /// Diagonal weight a in H_n(a).
    pub stair_weight: f64,
    pub n_initial_states: usize,
    pub n_time_points: usize,
    /// Evolution horizon as a multiple of 1/gap.
    pub t_max_over_gap: f64,
    /// Restrict sector scans to even spin-number sectors.
    pub even_sectors_only: bool,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            command: None,
            model: ModelChoice::Ising,
            sizes: vec![4],
            betas: vec![1.0],
            couplings: CouplingSet::WithGlobal,
            seed: 0,
            output_dir: None,
            tolerances: Tolerances::default(),
            coupling_j: 1.0,
            stair_sizes: (2..=64).collect(),
            stair_weight: 1.0,
            n_initial_states: 5,
            n_time_points: 50,
            t_max_over_gap: 3.0,
            even_sectors_only: false,
        }
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn per_task_rng(seed: u64, tag: &str) -> ChaCha8Rng {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    tag.hash(&mut h);
    ChaCha8Rng::seed_from_u64(seed ^ h.finish())
}

// ---------------------------------------------------------------- gap scan

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub model: String,
    pub n_qubits: usize,
    pub beta: f64,
    pub coupling_set: String,
    pub gap: f64,
    pub kernel_dim: usize,
    pub residual: f64,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapScanOutput {
    pub rows: Vec<GapRow>,
}

impl GapScanOutput {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("model,n_qubits,beta,coupling_set,gap,kernel_dim,residual,wall_time_ms\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.model,
                r.n_qubits,
                fmt(r.beta),
                r.coupling_set,
                fmt(r.gap),
                r.kernel_dim,
                fmt(r.residual),
                fmt(r.wall_time_ms),
            ));
        }
        out
    }
}

fn coupling_name(set: CouplingSet) -> &'static str {
    match set {
        CouplingSet::LocalFull => "local_full",
        CouplingSet::LocalOnly => "local_only",
        CouplingSet::Gapped => "gapped",
        CouplingSet::WithGlobal => "with_global",
    }
}

/// Project a full vectorized-space vector onto sector basis coordinates.
fn project_onto_basis(vec: &[Complex64], basis: &[SparseVec]) -> Vec<Complex64> {
    basis
        .iter()
        .map(|v| v.iter().map(|&(coord, coeff)| coeff.conj() * vec[coord]).sum())
        .collect()
}

/// Gap of a sampler on the torus at L = 2 through the 16-block logical
/// decomposition: gap on the syndrome block, minimum eigenvalue on the
/// others; returns (gap, kernel_dim, residual).
pub fn toric_sector_split_gap(
    gm: &GibbsModel,
    lattice: &TorusLattice,
    set: CouplingSet,
) -> Result<(f64, usize, f64)> {
    let model = gm.model.as_ref().expect("toric gibbs model");
    let couplings = model.couplings(set);
    let lh = davies_lindbladian(gm, &couplings, BohrRoute::Stabilizer, Frame::Eigen)?;
    let master = crate::davies::master_hamiltonian(&lh, gm)?;
    let neg = master.matrix.scale(Complex64::new(-1.0, 0.0));
    let neg_sup = Superoperator { matrix: neg, ..master.clone() };
    let kernel_full = gm.sqrt_sigma_vec();
    let thr = 1e-9 * (neg_sup.matrix.trace().re / neg_sup.matrix.dim as f64).abs().max(1e-300);
    let sectors = SectorLabel::all();
    let results: Vec<Result<(f64, f64, bool)>> = sectors
        .par_iter()
        .map(|&sector| {
            let basis = toric_sector_basis(gm, lattice, sector)?;
            let (block, _leak) = restrict_superoperator(&neg_sup, &basis, true)?;
            let sparse = SparseOperator::from_dense(&block, 1e-14);
            let t0 = std::time::Instant::now();
            if sector.is_syndrome() {
                let kernel = vec![project_onto_basis(&kernel_full, &basis)];
                let r = spectral_gap_iterative_forced(&sparse, Some(&kernel))?;
                let _ = t0;
                Ok((r.gap, r.residual, true))
            } else {
                let (r, _) = min_eigenvalue_iterative_warm(&sparse, None, None, t0)?;
                Ok((r.min_eigenvalue, r.residual, false))
            }
        })
        .collect();
    let mut gap = f64::INFINITY;
    let mut residual: f64 = 0.0;
    let mut kernel_dim = 1usize;
    for r in results {
        let (value, res, _is_syn) = r?;
        if value < thr && !_is_syn {
            kernel_dim += 1;
        }
        gap = gap.min(value.max(0.0));
        residual = residual.max(res);
    }
    Ok((gap, kernel_dim, residual))
}

fn spectral_gap_iterative_forced(
    m: &SparseOperator,
    kernel: Option<&[Vec<Complex64>]>,
) -> Result<SpectralResult> {
    // the sector blocks are below the dense threshold but iterating is
    // far cheaper at 4096 than a full dense solve
    crate::eigen::spectral_gap_iterative_pub(m, kernel)
}

/// Syndrome-sector gap of the local (snake/comb) generator for a torus,
/// through the reduced spaces; valid for any L with L^2 - 1 <= 13 spins.
pub fn toric_syndrome_gap(lattice: &TorusLattice, beta: f64) -> Result<(f64, f64)> {
    let chain = ReducedSpace::chain(lattice.side * lattice.side)?;
    let comb = ReducedSpace::comb(lattice);
    let mut gap = f64::INFINITY;
    let mut residual: f64 = 0.0;
    for space in [&chain, &comb] {
        let (m, kernel) = reduced_master_psd(space, beta)?;
        let r = spectral_gap(&m, Some(&[kernel.clone()]))?;
        gap = gap.min(r.gap);
        residual = residual.max(r.residual);
    }
    Ok((gap, residual))
}

pub fn cmd_gap_scan(cfg: &JobConfig) -> Result<GapScanOutput> {
    let mut tasks: Vec<(usize, f64)> = Vec::new();
    for &n in &cfg.sizes {
        for &beta in &cfg.betas {
            tasks.push((n, beta));
        }
    }
    let rows: Vec<Result<GapRow>> = tasks
        .par_iter()
        .map(|&(size, beta)| gap_scan_point(cfg, size, beta))
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.push(r?);
    }
    Ok(GapScanOutput { rows: out })
}

fn gap_scan_point(cfg: &JobConfig, size: usize, beta: f64) -> Result<GapRow> {
    let t0 = std::time::Instant::now();
    let (model_name, n_qubits, gap, kernel_dim, residual) = match cfg.model {
        ModelChoice::Ising => {
            if size > MAX_ISING_FULL {
                return Err(Error::TooLarge(format!(
                    "ising gap scans run the full superoperator and are limited to N <= {MAX_ISING_FULL}; got N = {size}"
                )));
            }
            let lattice = RingLattice::new(size, cfg.coupling_j)?;
            let gm = GibbsModel::from_model(StabilizerModel::ising(lattice), beta)?;
            let couplings = gm.model.as_ref().expect("model present").couplings(cfg.couplings);
            let lh = davies_lindbladian(&gm, &couplings, BohrRoute::Stabilizer, Frame::Eigen)?;
            let master = crate::davies::master_hamiltonian(&lh, &gm)?;
            let neg = master.matrix.scale(Complex64::new(-1.0, 0.0));
            let kernel = vec![gm.sqrt_sigma_vec()];
            let r = spectral_gap(&neg, Some(&kernel))?;
            ("ising".to_string(), size, r.gap, r.kernel_dim, r.residual)
        }
        ModelChoice::Toric => {
            if size > MAX_TORIC_FULL {
                if cfg.couplings != CouplingSet::Gapped {
                    return Err(Error::TooLarge(format!(
                        "toric L = {size} is exposed only through the sector-restricted gapped sampler; \
                         full superoperators stop at L = {MAX_TORIC_FULL}"
                    )));
                }
                let lattice = TorusLattice::new(size)?;
                let (syndrome_gap, residual) = toric_syndrome_gap(&lattice, beta)?;
                // logical blocks are lifted by the global dephasing by at
                // least 2; the overall gap is their minimum
                let gap = syndrome_gap.min(2.0);
                ("toric".to_string(), lattice.n_qubits, gap, 1, residual)
            } else {
                let lattice = TorusLattice::new(size)?;
                let gm = GibbsModel::from_model(StabilizerModel::toric(lattice.clone())?, beta)?;
                let (gap, kernel_dim, residual) =
                    toric_sector_split_gap(&gm, &lattice, cfg.couplings)?;
                ("toric".to_string(), lattice.n_qubits, gap, kernel_dim, residual)
            }
        }
    };
    Ok(GapRow {
        model: model_name,
        n_qubits,
        beta,
        coupling_set: coupling_name(cfg.couplings).to_string(),
        gap,
        kernel_dim,
        residual,
        wall_time_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

// -------------------------------------------------------------- stair scan

#[derive(Clone, Debug, Serialize)]
pub struct StairRow {
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_n2: f64,
    pub rayleigh_upper: f64,
    pub residual: f64,
    pub method: Method,
}

#[derive(Clone, Debug, Serialize)]
pub struct StairScanOutput {
    pub rows: Vec<StairRow>,
    pub slope: f64,
    pub slope_fit_range: (usize, usize),
}

impl StairScanOutput {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lambda_min,lambda_n2,rayleigh_upper,residual,method\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                fmt(r.lambda_min),
                fmt(r.lambda_n2),
                fmt(r.rayleigh_upper),
                fmt(r.residual),
                match r.method {
                    Method::Dense => "dense",
                    Method::Iterative => "iterative",
                },
            ));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": SCHEMA,
            "command": "stair-scan",
            "slope": self.slope,
            "fit_range": [self.slope_fit_range.0, self.slope_fit_range.1],
            "points": self.rows.len(),
        })
    }
}

pub fn cmd_stair_scan(cfg: &JobConfig) -> Result<StairScanOutput> {
    let mut sizes = cfg.stair_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.iter().any(|&n| n == 0 || n > 1000) {
        return Err(Error::InvalidArgument("stair sizes must lie in 1..=1000".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    // warm start across sizes: previous eigenvector keyed by vertex label
    let mut prev: Option<(usize, Vec<Complex64>)> = None;
    for &n in &sizes {
        let graph = stair_graph(n)?;
        let h = if cfg.stair_weight == 1.0 {
            graph.laplacian.clone()
        } else {
            crate::stair::perturbed_laplacian(n, cfg.stair_weight)?
        };
        let rayleigh_upper = if n >= 2 { stair_test_vector(n)?.1 } else { f64::NAN };
        let dim = h.dim;
        let (lambda, residual, method, vector);
        if dim <= 512 {
            let d = h.to_dense_real(1e-12)?;
            let (vals, vecs) = crate::eigen::dense_symmetric_eig(&d)?;
            lambda = vals[0];
            residual = 0.0;
            method = Method::Dense;
            vector = vecs.column(0).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        } else {
            let warm: Option<Vec<Complex64>> = prev.as_ref().map(|(pn, pv)| {
                let mut v = vec![Complex64::default(); dim];
                for (k, &(i, j)) in graph.vertices.iter().enumerate() {
                    // copy from the nearest vertex of the previous graph
                    let src = stair_vertex_index(*pn, i.min(*pn), j.min(pn + 1).max(i.min(*pn) + 1))
                        .or_else(|| stair_vertex_index(*pn, i.min(*pn), i.min(*pn) + 1));
                    if let Some(s) = src {
                        v[k] = pv[s];
                    }
                }
                v
            });
            let scale = h.inf_norm();
            let cfg_it = IterConfig {
                basis: 64,
                retain: 8,
                tol_abs: 1e-8 * scale.max(1.0),
                budget: ((10.0 * (dim as f64).sqrt()) as usize).max(300),
                seed: cfg.seed ^ n as u64,
            };
            let t0 = std::time::Instant::now();
            let (r, v) = min_eigenvalue_iterative_warm(&h, warm.as_deref(), Some(cfg_it), t0)?;
            lambda = r.min_eigenvalue;
            residual = r.residual;
            method = Method::Iterative;
            vector = v;
        }
        prev = Some((n, vector));
        rows.push(StairRow {
            n,
            lambda_min: lambda,
            lambda_n2: lambda * (n * n) as f64,
            rayleigh_upper,
            residual,
            method,
        });
    }
    // log-log slope over n >= 8
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= 8 && r.lambda_min > 0.0)
        .map(|r| ((r.n as f64).ln(), r.lambda_min.ln()))
        .collect();
    let slope = if pts.len() >= 2 { slope_of(&pts) } else { f64::NAN };
    let lo = rows.iter().map(|r| r.n).filter(|&n| n >= 8).min().unwrap_or(0);
    let hi = rows.iter().map(|r| r.n).max().unwrap_or(0);
    Ok(StairScanOutput { rows, slope, slope_fit_range: (lo, hi) })
}

fn slope_of(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// ------------------------------------------------------------ block verify

#[derive(Clone, Debug, Serialize)]
pub struct BlockVerifyReport {
    pub schema: String,
    pub model: String,
    pub n_qubits: usize,
    pub betas: Vec<f64>,
    pub max_leakage: f64,
    pub max_block_deviation: f64,
    pub min_int_sector_eigenvalue: f64,
    pub min_flip_sector_eigenvalue: f64,
    pub logical_block_max_difference: Option<f64>,
    pub sectors_checked: usize,
    pub pass: bool,
    pub failures: Vec<String>,
}

pub fn cmd_block_verify(cfg: &JobConfig) -> Result<BlockVerifyReport> {
    match cfg.model {
        ModelChoice::Ising => ising_block_verify(cfg),
        ModelChoice::Toric => toric_block_verify(cfg),
    }
}

/// Full-space Lambda-sector basis for the Ising ring in the (logical,
/// bond) relabelling; elements `Q (x) |b'><b|`, p-transformed and
/// normalized.
pub fn ising_sector_embedding(
    gm: &GibbsModel,
    sector: &LambdaSector,
    logical: LogicalFactor,
) -> Result<Vec<SparseVec>> {
    let model = gm.model.as_ref().ok_or_else(|| {
        Error::InvalidArgument("ising sector embedding needs a stabilizer model".into())
    })?;
    let n = model.n_qubits;
    if sector.n_bonds != n {
        return Err(Error::Dimension { expected: n, got: sector.n_bonds });
    }
    let d = gm.dim();
    let w = gm.sigma_weights();
    // computational index from (eps, bond pattern)
    let state_of = |eps: usize, bonds: &[bool]| -> usize {
        let mut x = eps;
        let mut z = eps;
        for j in 0..n - 1 {
            z ^= usize::from(bonds[j]);
            x |= z << (j + 1);
        }
        x
    };
    let i = Complex64::i();
    let mut out = Vec::new();
    // enumerate admissible kets through their flip-set coordinates so the
    // ordering matches `lambda_sector_basis` on the reduced chain space
    let space = ReducedSpace::chain(n)?;
    for flips in 0..space.dim() {
        let ket = space.bond_pattern(flips);
        let bra: Vec<bool> =
            ket.iter().enumerate().map(|(b, &m)| if sector.in_lambda[b] { m } else { !m }).collect();
        let mut v: SparseVec = Vec::with_capacity(2);
        let mut norm2 = 0.0;
        for eps in 0..2usize {
            let (eps_row, coeff) = match logical {
                LogicalFactor::One => (eps, Complex64::new(1.0, 0.0)),
                LogicalFactor::X => (1 - eps, Complex64::new(1.0, 0.0)),
                LogicalFactor::Z => (eps, Complex64::new(if eps == 0 { 1.0 } else { -1.0 }, 0.0)),
                // Y = i Z X
                LogicalFactor::Y => {
                    (1 - eps, i * Complex64::new(if eps == 1 { 1.0 } else { -1.0 }, 0.0))
                }
            };
            let row = state_of(eps_row, &ket);
            let col = state_of(eps, &bra);
            let c = coeff * Complex64::new(w[col].sqrt(), 0.0);
            norm2 += c.norm_sqr();
            v.push((row * d + col, c));
        }
        let nrm = norm2.sqrt();
        for (_, c) in v.iter_mut() {
            *c /= nrm;
        }
        out.push(v);
    }
    Ok(out)
}

fn ising_block_verify(cfg: &JobConfig) -> Result<BlockVerifyReport> {
    let n = *cfg.sizes.first().unwrap_or(&4);
    if !(3..=6).contains(&n) {
        return Err(Error::TooLarge(format!("block verification runs at 3 <= N <= 6; got {n}")));
    }
    let tol = &cfg.tolerances;
    let mut max_leakage: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut min_int = f64::INFINITY;
    let mut min_flip = f64::INFINITY;
    let mut failures = Vec::new();
    let mut sectors_checked = 0usize;
    let space = ReducedSpace::chain(n)?;
    for &beta in &cfg.betas {
        let lattice = RingLattice::new(n, cfg.coupling_j)?;
        let gm = GibbsModel::from_model(StabilizerModel::ising(lattice), beta)?;
        // the local generator of the sector analysis: sigma^x on spins 2..N
        let couplings: Vec<crate::pauli::PauliString> =
            (1..n).map(|q| crate::pauli::PauliString::x(n, q)).collect();
        let lh = davies_lindbladian(&gm, &couplings, BohrRoute::Stabilizer, Frame::Eigen)?;
        let master = crate::davies::master_hamiltonian(&lh, &gm)?;
        let neg = Superoperator {
            matrix: master.matrix.scale(Complex64::new(-1.0, 0.0)),
            ..master.clone()
        };
        for lam_bits in 0..(1usize << n) {
            let lambda: Vec<usize> = (0..n).filter(|b| lam_bits >> b & 1 == 1).collect();
            let Ok(sector) = LambdaSector::new(n, &lambda) else { continue };
            sectors_checked += 1;
            let basis = ising_sector_embedding(&gm, &sector, LogicalFactor::One)?;
            let (block, leak) = restrict_superoperator(&neg, &basis, false)?;
            max_leakage = max_leakage.max(leak);
            if leak > tol.leakage {
                failures.push(format!(
                    "sector Lambda={lambda:?} beta={beta}: leakage {leak:.3e} exceeds {:.1e}",
                    tol.leakage
                ));
            }
            // compare with the oriented tensor assembly on admissible kets
            let assembly = lambda_block_assembly(&space, &sector, beta * cfg.coupling_j)?;
            let reduced_basis = lambda_sector_basis(&space, &sector)?;
            let ddim = space.dim();
            for (a, va) in reduced_basis.iter().enumerate() {
                let ka = bond_index(&space, va[0].0 / ddim);
                for (b, vb) in reduced_basis.iter().enumerate() {
                    let kb = bond_index(&space, vb[0].0 / ddim);
                    let dev = (block[[a, b]].re - assembly.get(ka, kb).re).abs()
                        .max(block[[a, b]].im.abs());
                    max_dev = max_dev.max(dev);
                    if dev > tol.block_entry {
                        failures.push(format!(
                            "sector Lambda={lambda:?} beta={beta}: block entry ({a},{b}) deviates {dev:.3e}"
                        ));
                    }
                }
            }
            // eigenvalue floors
            let (flip, _, int) = sector.gamma_split(&space);
            let dm = ndarray_real(&block);
            let (vals, _) = crate::eigen::dense_symmetric_eig(&dm)?;
            if !int.is_empty() {
                min_int = min_int.min(vals[0]);
                if vals[0] < 0.5 - tol.sector_floor_slack {
                    failures.push(format!(
                        "int-sector floor violated at Lambda={lambda:?} beta={beta}: {} < 1/2",
                        vals[0]
                    ));
                }
            } else if flip.len() == space.n_spins() && lam_bits == 0 {
                min_flip = min_flip.min(vals[0]);
                if vals[0] < 0.5 - tol.sector_floor_slack {
                    failures.push(format!(
                        "full-flip floor violated at beta={beta}: {} < 1/2",
                        vals[0]
                    ));
                }
            }
        }
    }
    let pass = failures.is_empty();
    Ok(BlockVerifyReport {
        schema: SCHEMA.into(),
        model: "ising".into(),
        n_qubits: n,
        betas: cfg.betas.clone(),
        max_leakage,
        max_block_deviation: max_dev,
        min_int_sector_eigenvalue: min_int,
        min_flip_sector_eigenvalue: min_flip,
        logical_block_max_difference: None,
        sectors_checked,
        pass,
        failures,
    })
}

fn bond_index(space: &ReducedSpace, flips: usize) -> usize {
    let mut idx = 0usize;
    for (b, m) in space.bond_pattern(flips).iter().enumerate() {
        if *m {
            idx |= 1 << b;
        }
    }
    idx
}

fn ndarray_real(block: &ndarray::Array2<Complex64>) -> ndarray::Array2<f64> {
    block.mapv(|c| c.re)
}

fn toric_block_verify(cfg: &JobConfig) -> Result<BlockVerifyReport> {
    let l = *cfg.sizes.first().unwrap_or(&2);
    if l != 2 {
        return Err(Error::TooLarge("toric block verification runs the full space at L = 2".into()));
    }
    let tol = &cfg.tolerances;
    let lattice = TorusLattice::new(2)?;
    let mut failures = Vec::new();
    let mut max_leakage: f64 = 0.0;
    let mut logical_diff: f64 = 0.0;
    let mut sectors_checked = 0;
    for &beta in &cfg.betas {
        let gm = GibbsModel::from_model(StabilizerModel::toric(lattice.clone())?, beta)?;
        let couplings = gm.model.as_ref().expect("model").couplings(CouplingSet::Gapped);
        // the local part only: snake sigma^x + comb sigma^z
        let local: Vec<_> = couplings
            .iter()
            .filter(|p| p.weight() == 1)
            .cloned()
            .collect();
        let lh = davies_lindbladian(&gm, &local, BohrRoute::Stabilizer, Frame::Eigen)?;
        let master = crate::davies::master_hamiltonian(&lh, &gm)?;
        let neg = Superoperator {
            matrix: master.matrix.scale(Complex64::new(-1.0, 0.0)),
            ..master.clone()
        };
        // Prop-style check: the local block on B_{1,1} equals that on
        // B_{X1,1} entrywise
        use LogicalFactor::*;
        let b11 = toric_sector_basis(&gm, &lattice, SectorLabel { b1: One, b2: One })?;
        let bx1 = toric_sector_basis(&gm, &lattice, SectorLabel { b1: X, b2: One })?;
        let (m11, leak1) = restrict_superoperator(&neg, &b11, false)?;
        let (mx1, leak2) = restrict_superoperator(&neg, &bx1, false)?;
        sectors_checked += 2;
        max_leakage = max_leakage.max(leak1).max(leak2);
        if leak1 > tol.leakage || leak2 > tol.leakage {
            failures.push(format!(
                "toric local blocks leak {:.3e} at beta={beta}",
                leak1.max(leak2)
            ));
        }
        let dev = (&m11 - &mx1).iter().map(|c| c.norm()).fold(0.0, f64::max);
        logical_diff = logical_diff.max(dev);
        if dev > tol.block_entry {
            failures.push(format!(
                "blocks B_(1,1) and B_(X,1) differ by {dev:.3e} at beta={beta}"
            ));
        }
    }
    let pass = failures.is_empty();
    Ok(BlockVerifyReport {
        schema: SCHEMA.into(),
        model: "toric".into(),
        n_qubits: lattice.n_qubits,
        betas: cfg.betas.clone(),
        max_leakage,
        max_block_deviation: 0.0,
        min_int_sector_eigenvalue: f64::INFINITY,
        min_flip_sector_eigenvalue: f64::INFINITY,
        logical_block_max_difference: Some(logical_diff),
        sectors_checked,
        pass,
        failures,
    })
}

// ------------------------------------------------------------------ mixing

#[derive(Clone, Debug, Serialize)]
pub struct MixSummary {
    pub schema: String,
    pub model: String,
    pub n_qubits: usize,
    pub beta: f64,
    pub gap: f64,
    pub trajectories: usize,
    pub min_fitted_rate: f64,
    pub max_final_trace_distance: f64,
    pub all_bounds_hold: bool,
}

pub struct MixRunOutput {
    pub traces: Vec<(String, crate::dynamics::EvolutionTrace)>,
    pub summaries: Vec<MixSummary>,
}

pub fn cmd_mix_run(cfg: &JobConfig) -> Result<MixRunOutput> {
    let mut traces = Vec::new();
    let mut summaries = Vec::new();
    for &size in &cfg.sizes {
        for &beta in &cfg.betas {
            let (gm, lattice_name, n_qubits) = match cfg.model {
                ModelChoice::Ising => {
                    if size > 5 {
                        return Err(Error::TooLarge(
                            "mixing runs evolve the full operator space; ising N <= 5".into(),
                        ));
                    }
                    let r = RingLattice::new(size, cfg.coupling_j)?;
                    (GibbsModel::from_model(StabilizerModel::ising(r), beta)?, "ising", size)
                }
                ModelChoice::Toric => {
                    if size > 2 {
                        return Err(Error::TooLarge("toric mixing runs at L = 2".into()));
                    }
                    let t = TorusLattice::new(size)?;
                    let nq = t.n_qubits;
                    (GibbsModel::from_model(StabilizerModel::toric(t)?, beta)?, "toric", nq)
                }
            };
            let couplings = gm.model.as_ref().expect("model").couplings(cfg.couplings);
            let lh = davies_lindbladian(&gm, &couplings, BohrRoute::Stabilizer, Frame::Eigen)?;
            let master = crate::davies::master_hamiltonian(&lh, &gm)?;
            let neg = master.matrix.scale(Complex64::new(-1.0, 0.0));
            let kernel = vec![gm.sqrt_sigma_vec()];
            let gap = spectral_gap(&neg, Some(&kernel))?.gap;
            let ls = lh.schrodinger_adjoint()?;
            let d = gm.dim();
            let t_max = cfg.t_max_over_gap / gap.max(1e-12);
            let times: Vec<f64> =
                (0..cfg.n_time_points).map(|k| t_max * (k + 1) as f64 / cfg.n_time_points as f64).collect();
            let mut states: Vec<(String, DensityState)> =
                vec![("mixed".into(), DensityState::maximally_mixed(d))];
            for i in 0..cfg.n_initial_states {
                let mut rng = per_task_rng(cfg.seed, &format!("mix/{lattice_name}/{size}/{beta}/{i}"));
                states.push((format!("random{i}"), DensityState::random_pure(&mut rng, d)));
            }
            if matches!(cfg.model, ModelChoice::Toric) {
                // pure ground state |o> in the eigen frame is index 0
                let mut v = vec![Complex64::default(); d];
                v[0] = Complex64::new(1.0, 0.0);
                states.push(("ground_o".into(), DensityState::pure(&v)?));
            }
            let mut min_rate = f64::INFINITY;
            let mut max_final_td: f64 = 0.0;
            let all_hold = true;
            for (name, rho0) in states {
                match mixing_trace(&ls, &gm, &rho0, &times, gap) {
                    Ok(trace) => {
                        max_final_td = max_final_td.max(*trace.trace_dist.last().unwrap_or(&0.0));
                        if trace.fitted_rate.is_finite() {
                            min_rate = min_rate.min(trace.fitted_rate);
                        }
                        traces.push((format!("{lattice_name}_n{size}_beta{beta}_{name}"), trace));
                    }
                    Err(e) => return Err(e),
                }
            }
            summaries.push(MixSummary {
                schema: SCHEMA.into(),
                model: lattice_name.into(),
                n_qubits,
                beta,
                gap,
                trajectories: cfg.n_initial_states + 1,
                min_fitted_rate: min_rate,
                max_final_trace_distance: max_final_td,
                all_bounds_hold: all_hold,
            });
        }
    }
    Ok(MixRunOutput { traces, summaries })
}

// --------------------------------------------------------------- model dump

pub fn cmd_model_dump(cfg: &JobConfig) -> Result<serde_json::Value> {
    let mut models = Vec::new();
    for &size in &cfg.sizes {
        let value = match cfg.model {
            ModelChoice::Ising => {
                let r = RingLattice::new(size, cfg.coupling_j)?;
                r.to_json()
            }
            ModelChoice::Toric => {
                let t = TorusLattice::new(size)?;
                t.to_json()
            }
        };
        models.push(value);
    }
    Ok(serde_json::json!({
        "schema": SCHEMA,
        "command": "model-dump",
        "models": models,
    }))
}

// ------------------------------------------------------------------ driver

/// Run a command, writing outputs under `out_dir`; returns a pass flag.
pub fn run_command(kind: CommandKind, cfg: &JobConfig, out_dir: &Path) -> Result<bool> {
    if let Some(declared) = cfg.command {
        if declared != kind {
            return Err(Error::InvalidArgument(format!(
                "config declares command {declared:?} but {kind:?} was invoked"
            )));
        }
    }
    match kind {
        CommandKind::GapScan => {
            let out = cmd_gap_scan(cfg)?;
            write_atomic(&out_dir.join("gap_scan.csv"), &out.to_csv())?;
            Ok(true)
        }
        CommandKind::StairScan => {
            let out = cmd_stair_scan(cfg)?;
            write_atomic(&out_dir.join("stair_scan.csv"), &out.to_csv())?;
            write_atomic(
                &out_dir.join("stair_summary.json"),
                &serde_json::to_string_pretty(&out.summary_json())?,
            )?;
            Ok(true)
        }
        CommandKind::BlockVerify => {
            let report = cmd_block_verify(cfg)?;
            write_atomic(
                &out_dir.join("block_verify.json"),
                &serde_json::to_string_pretty(&report)?,
            )?;
            Ok(report.pass)
        }
        CommandKind::MixRun => {
            let out = cmd_mix_run(cfg)?;
            for (name, trace) in &out.traces {
                write_atomic(&out_dir.join(format!("mix_{name}.csv")), &trace.to_csv())?;
            }
            write_atomic(
                &out_dir.join("mix_summary.json"),
                &serde_json::to_string_pretty(&out.summaries)?,
            )?;
            Ok(out.summaries.iter().all(|s| s.all_bounds_hold))
        }
        CommandKind::ModelDump => {
            let v = cmd_model_dump(cfg)?;
            write_atomic(&out_dir.join("model_dump.json"), &serde_json::to_string_pretty(&v)?)?;
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let cfg = JobConfig {
            command: Some(CommandKind::GapScan),
            model: ModelChoice::Toric,
            sizes: vec![2],
            betas: vec![0.5, 2.0],
            couplings: CouplingSet::Gapped,
            seed: 42,
            output_dir: Some(PathBuf::from("/tmp/x")),
            ..JobConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back = JobConfig::from_json(&text).unwrap();
        let again = serde_json::to_string(&back).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn defaults_deserialize_from_empty_object() {
        let cfg = JobConfig::from_json("{}").unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.couplings, CouplingSet::WithGlobal);
    }

    #[test]
    fn gap_scan_refuses_oversized() {
        let cfg = JobConfig { sizes: vec![9], ..JobConfig::default() };
        assert!(cmd_gap_scan(&cfg).is_err());
        let cfg = JobConfig {
            model: ModelChoice::Toric,
            sizes: vec![3],
            couplings: CouplingSet::WithGlobal,
            ..JobConfig::default()
        };
        assert!(cmd_gap_scan(&cfg).is_err());
    }

    #[test]
    fn ising_gap_scan_small() {
        let cfg = JobConfig {
            model: ModelChoice::Ising,
            sizes: vec![3],
            betas: vec![0.0],
            couplings: CouplingSet::LocalFull,
            ..JobConfig::default()
        };
        let out = cmd_gap_scan(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.rows[0].gap > 0.0);
        assert_eq!(out.rows[0].kernel_dim, 1);
    }

    #[test]
    fn stair_scan_small_rows() {
        let cfg = JobConfig { stair_sizes: vec![1, 2, 8], ..JobConfig::default() };
        let out = cmd_stair_scan(&cfg).unwrap();
        assert_eq!(out.rows.len(), 3);
        assert!((out.rows[0].lambda_min - 2.0).abs() < 1e-10);
        assert!((out.rows[1].lambda_min - 1.0).abs() < 1e-10);
        assert!((out.rows[1].rayleigh_upper - 2.0).abs() < 1e-12);
    }

    #[test]
    fn model_dump_counts() {
        let cfg = JobConfig {
            model: ModelChoice::Toric,
            sizes: vec![2, 3],
            ..JobConfig::default()
        };
        let v = cmd_model_dump(&cfg).unwrap();
        let models = v["models"].as_array().unwrap();
        assert_eq!(models.len(), 2);
        assert_eq!(models[0]["stars"].as_array().unwrap().len(), 4);
        assert_eq!(models[0]["snake"].as_array().unwrap().len(), 3);
        assert_eq!(models[1]["leaf_paths"].as_array().unwrap().len(), 3);
        let cfg = JobConfig { model: ModelChoice::Ising, sizes: vec![5], ..JobConfig::default() };
        let v = cmd_model_dump(&cfg).unwrap();
        assert_eq!(v["models"][0]["bonds"].as_array().unwrap().len(), 5);
    }
}
