//! Affine subcode ensemble decoding (aSCED).
//!
//! Each batch appends `Δ` splitter rows to the CSS check matrix, giving an
//! extended matrix laid out as `[H_X; A_X; H_Z; A_Z]` in the `(x|z)` column
//! convention. The `2^Δ` paths of a batch decode the same extended matrix
//! against every assignment `g` of the unmeasurable splitter syndrome bits.
//! Every path estimate that reproduces the measured syndrome is a
//! candidate; the lowest Pauli weight wins, ties going to the lowest path id.
//!
//! Path ids are `batch · 2^Δ + (δ − 1)` for `δ ∈ [1, 2^Δ]`. The virtual bits
//! `g_δ` are the binary digits of `δ − 1`, most significant first; the first
//! `⌈Δ/2⌉` digits belong to the X-block splitters and the rest to the
//! Z-block splitters.

use std::collections::HashSet;

use log::{debug, warn};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bp4::{Bp4Config, Bp4Decoder, Bp4Workspace, DecodeResult};
use crate::channel::{derive_stream, SeedPlan};
use crate::codes::{CodeSpec, CssBlocks, StabilizerCode};
use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BinaryVector};
use crate::pauli::{embed_x, embed_z, pauli_weight, SymplecticVector};

/// Rejection-sampling attempts allowed per splitter row.
pub const SPLITTER_ATTEMPTS: usize = 10_000;

/// Information sets without a new low-weight row before the overcomplete
/// search raises its weight bound.
const STALL_LIMIT: usize = 64;

/// Splitter rows of one batch, split into X-type and Z-type blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SplitterSet {
    pub a_x: BinaryMatrix,
    pub a_z: BinaryMatrix,
}

impl SplitterSet {
    pub fn empty(n: usize) -> Self {
        Self {
            a_x: BinaryMatrix::zeros(0, n),
            a_z: BinaryMatrix::zeros(0, n),
        }
    }

    pub fn delta(&self) -> usize {
        self.a_x.rows() + self.a_z.rows()
    }

    /// Splitters in F2^{2n}: X-block rows as `(r|0)` then Z-block rows as `(0|r)`.
    pub fn embedded(&self) -> Vec<SymplecticVector> {
        self.a_x
            .row_iter()
            .map(|r| embed_x(&r))
            .chain(self.a_z.row_iter().map(|r| embed_z(&r)))
            .collect()
    }
}

/// How [`generate_splitters`] draws rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitterParams {
    pub delta: usize,
    pub weight: usize,
    /// Largest support overlap allowed with any other row of the same
    /// component block; `None` disables the check.
    pub max_overlap: Option<usize>,
    pub attempts_per_row: usize,
}

impl SplitterParams {
    pub fn new(delta: usize, weight: usize) -> Self {
        Self {
            delta,
            weight,
            max_overlap: Some(1),
            attempts_per_row: SPLITTER_ATTEMPTS,
        }
    }
}

fn css_blocks(code: &StabilizerCode) -> Result<&CssBlocks> {
    code.css_blocks()
        .ok_or_else(|| Error::InvalidParameter(format!("code {} is not CSS", code.label())))
}

/// Draws `Δ` splitters: `⌈Δ/2⌉` X-type and `⌊Δ/2⌋` Z-type rows of the given
/// weight, each independent of the stabilizers, the logicals and the rows
/// already drawn, and overlapping every row of its component block in at
/// most `max_overlap` positions.
pub fn generate_splitters<R: Rng + ?Sized>(
    code: &StabilizerCode,
    params: SplitterParams,
    stream: &mut R,
) -> Result<SplitterSet> {
    let n = code.n();
    let css = css_blocks(code)?;
    if params.delta > code.rank() {
        return Err(Error::InvalidParameter(format!(
            "delta = {} exceeds n - k = {}",
            params.delta,
            code.rank()
        )));
    }
    if params.delta > 0 && (params.weight < 2 || params.weight > n) {
        return Err(Error::InvalidParameter(format!(
            "splitter weight {} outside [2, {n}]",
            params.weight
        )));
    }
    let delta_x = params.delta.div_ceil(2);
    let delta_z = params.delta / 2;
    // S ⊕ L plus every splitter accepted so far
    let mut span = code.stabilizer_basis().stack(code.logical_basis())?;
    let mut set = SplitterSet::empty(n);
    for (block, count, is_x) in [(&css.hx, delta_x, true), (&css.hz, delta_z, false)] {
        let mut rows: Vec<BinaryVector> = block.row_iter().collect();
        for _ in 0..count {
            let mut accepted = None;
            for _ in 0..params.attempts_per_row {
                let support = index::sample(stream, n, params.weight).into_vec();
                let cand = BinaryVector::from_support(n, &support);
                if let Some(limit) = params.max_overlap {
                    if rows.iter().any(|r| r.overlap(&cand) > limit) {
                        continue;
                    }
                }
                let embedded = if is_x { embed_x(&cand) } else { embed_z(&cand) };
                if span.in_rowspace(embedded.as_binary())? {
                    continue;
                }
                span.push_row(embedded.as_binary())?;
                accepted = Some(cand);
                break;
            }
            let cand = accepted.ok_or_else(|| {
                Error::BudgetExhausted(format!(
                    "no valid weight-{} splitter within {} attempts",
                    params.weight, params.attempts_per_row
                ))
            })?;
            if is_x {
                set.a_x.push_row(&cand)?;
            } else {
                set.a_z.push_row(&cand)?;
            }
            rows.push(cand);
        }
    }
    Ok(set)
}

/// Row positions of the four blocks inside an extended check matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtLayout {
    pub m_x: usize,
    pub delta_x: usize,
    pub m_z: usize,
    pub delta_z: usize,
}

impl ExtLayout {
    pub fn rows(&self) -> usize {
        self.m_x + self.delta_x + self.m_z + self.delta_z
    }

    pub fn delta(&self) -> usize {
        self.delta_x + self.delta_z
    }

    /// Indices of the measured (original) checks, in original order.
    pub fn measured_rows(&self) -> Vec<usize> {
        let z0 = self.m_x + self.delta_x;
        (0..self.m_x).chain(z0..z0 + self.m_z).collect()
    }
}

/// `[H_X 0; A_X 0; 0 H_Z; 0 A_Z]`.
pub fn extended_check_matrix(code: &StabilizerCode, splitters: &SplitterSet) -> Result<(BinaryMatrix, ExtLayout)> {
    let css = css_blocks(code)?;
    let n = code.n();
    check_len(n, splitters.a_x.cols())?;
    check_len(n, splitters.a_z.cols())?;
    let mut h = BinaryMatrix::zeros(0, 2 * n);
    for r in css.hx.row_iter().chain(splitters.a_x.row_iter()) {
        h.push_row(embed_x(&r).as_binary())?;
    }
    for r in css.hz.row_iter().chain(splitters.a_z.row_iter()) {
        h.push_row(embed_z(&r).as_binary())?;
    }
    let layout = ExtLayout {
        m_x: css.hx.rows(),
        delta_x: splitters.a_x.rows(),
        m_z: css.hz.rows(),
        delta_z: splitters.a_z.rows(),
    };
    Ok((h, layout))
}

/// Virtual syndrome bits of path `δ` (1-based): the `Δ` binary digits of
/// `δ − 1`, most significant first.
pub fn path_bits(delta: usize, path: usize) -> BinaryVector {
    assert!(
        path >= 1 && path <= 1usize << delta,
        "path {path} outside [1, 2^{delta}]"
    );
    let v = path - 1;
    BinaryVector::from_bools((0..delta).map(|i| (v >> (delta - 1 - i)) & 1 == 1))
}

/// Interleaves the measured syndrome `(z_X, z_Z)` with virtual bits
/// `g = (g_X, g_Z)` into `(z_X, g_X, z_Z, g_Z)`; `g_X` is the first `⌈Δ/2⌉`
/// bits of `g`.
pub fn extended_syndrome(z_measured: &BinaryVector, g: &BinaryVector, m_x: usize) -> Result<BinaryVector> {
    if m_x > z_measured.len() {
        return Err(Error::DimensionMismatch {
            expected: m_x,
            found: z_measured.len(),
        });
    }
    let delta_x = g.len().div_ceil(2);
    let bits = (0..m_x)
        .map(|i| z_measured.get(i))
        .chain((0..delta_x).map(|i| g.get(i)))
        .chain((m_x..z_measured.len()).map(|i| z_measured.get(i)))
        .chain((delta_x..g.len()).map(|i| g.get(i)));
    Ok(BinaryVector::from_bools(bits))
}

/// Settings for the sparse redundant-row search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvercompleteParams {
    /// Total rows of the overcomplete matrix, or rows per component block
    /// when `per_component` is set.
    pub m_oc: usize,
    pub max_row_weight: usize,
    #[serde(default = "default_search_budget")]
    pub search_budget: usize,
    #[serde(default)]
    pub per_component: bool,
}

fn default_search_budget() -> usize {
    10_000
}

impl OvercompleteParams {
    /// Row targets per component. A target below the extended block size
    /// (but not below the original checks) adds no redundant rows.
    fn targets(&self, layout: &ExtLayout) -> Result<(usize, usize)> {
        let (tx, tz) = if self.per_component {
            (self.m_oc, self.m_oc)
        } else {
            (self.m_oc.div_ceil(2), self.m_oc / 2)
        };
        if tx < layout.m_x || tz < layout.m_z {
            return Err(Error::InvalidParameter(format!(
                "m_oc = {} leaves fewer rows than the check matrix ({} + {})",
                self.m_oc, layout.m_x, layout.m_z
            )));
        }
        Ok((tx, tz))
    }
}

/// Redundant checks `h_oc = m_map · h_ext`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overcomplete {
    pub h_oc: BinaryMatrix,
    pub m_map: BinaryMatrix,
    /// Rows missing from the requested total because the search ran out.
    pub shortfall: usize,
}

/// One batch of the ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub splitters: SplitterSet,
    pub h_ext: BinaryMatrix,
    pub layout: ExtLayout,
    pub overcomplete: Option<Overcomplete>,
}

impl Batch {
    /// Matrix the paths of this batch decode on.
    pub fn working_matrix(&self) -> &BinaryMatrix {
        self.overcomplete.as_ref().map_or(&self.h_ext, |oc| &oc.h_oc)
    }

    /// Syndrome of path `δ` on the working matrix.
    pub fn working_syndrome(&self, z_measured: &BinaryVector, path: usize) -> Result<BinaryVector> {
        let g = path_bits(self.layout.delta(), path);
        let z = extended_syndrome(z_measured, &g, self.layout.m_x)?;
        match &self.overcomplete {
            Some(oc) => oc.m_map.mul_vec(&z),
            None => Ok(z),
        }
    }
}

/// Sparse rows of rowspace(`block`) found by randomized information-set
/// sampling, as `(row, coefficients over block rows)`, lowest weight first.
fn search_redundant_rows<R: Rng + ?Sized>(
    block: &BinaryMatrix,
    needed: usize,
    params: &OvercompleteParams,
    stream: &mut R,
) -> Result<Vec<(BinaryVector, BinaryVector)>> {
    if needed == 0 {
        return Ok(Vec::new());
    }
    let n = block.cols();
    let mut seen: HashSet<BinaryVector> = block.row_iter().collect();
    let mut found: Vec<(usize, BinaryVector, BinaryVector)> = Vec::new();
    let mut bound = (0..block.rows())
        .map(|r| block.row_weight(r))
        .filter(|&w| w > 0)
        .min()
        .unwrap_or(1)
        .min(params.max_row_weight);
    let mut stall = 0;
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..params.search_budget {
        if found.len() >= needed {
            break;
        }
        order.shuffle(stream);
        let mut permuted = BinaryMatrix::zeros(block.rows(), n);
        for r in 0..block.rows() {
            for (j, &c) in order.iter().enumerate() {
                if block.get(r, c) {
                    permuted.set(r, j, true);
                }
            }
        }
        let red = permuted.row_reduce();
        let rank = red.pivots.len();
        let mut fresh = 0;
        let mut consider = |weight: usize, coeff: BinaryVector| -> Result<()> {
            if weight == 0 || weight > bound {
                return Ok(());
            }
            let row = block.vec_mul(&coeff)?;
            if seen.insert(row.clone()) {
                found.push((weight, row, coeff));
                fresh += 1;
            }
            Ok(())
        };
        for a in 0..rank {
            consider(red.reduced.row_weight(a), red.transform.row(a))?;
        }
        for a in 0..rank {
            let ra = red.reduced.row(a);
            for b in a + 1..rank {
                let w = ra.xor(&red.reduced.row(b)).weight();
                if w <= bound {
                    consider(w, red.transform.row(a).xor(&red.transform.row(b)))?;
                }
            }
        }
        if fresh == 0 {
            stall += 1;
            if stall >= STALL_LIMIT {
                if bound >= params.max_row_weight {
                    break;
                }
                bound += 1;
                stall = 0;
            }
        } else {
            stall = 0;
        }
    }
    // stable: discovery order breaks weight ties
    found.sort_by_key(|(w, _, _)| *w);
    found.truncate(needed);
    Ok(found.into_iter().map(|(_, row, coeff)| (row, coeff)).collect())
}

/// Assembles the extended matrix for `splitters` and, when requested, an
/// overcomplete matrix whose map `M` starts with the identity on the
/// extended rows.
pub fn build_batch<R: Rng + ?Sized>(
    code: &StabilizerCode,
    splitters: SplitterSet,
    oc_params: Option<&OvercompleteParams>,
    stream: &mut R,
) -> Result<Batch> {
    let (h_ext, layout) = extended_check_matrix(code, &splitters)?;
    let expected = code.rank() + splitters.delta();
    let rank = h_ext.rank();
    if rank != expected {
        return Err(Error::InvalidParameter(format!(
            "extended matrix has rank {rank}, expected {expected}"
        )));
    }
    let overcomplete = match oc_params {
        None => None,
        Some(params) => Some(build_overcomplete(code, &splitters, &h_ext, &layout, params, stream)?),
    };
    Ok(Batch {
        splitters,
        h_ext,
        layout,
        overcomplete,
    })
}

fn build_overcomplete<R: Rng + ?Sized>(
    code: &StabilizerCode,
    splitters: &SplitterSet,
    h_ext: &BinaryMatrix,
    layout: &ExtLayout,
    params: &OvercompleteParams,
    stream: &mut R,
) -> Result<Overcomplete> {
    let css = css_blocks(code)?;
    let (tx, tz) = params.targets(layout)?;
    let rows = layout.rows();
    let mut m_map = BinaryMatrix::identity(rows);
    let mut shortfall = 0;
    let blocks = [
        (css.hx.stack(&splitters.a_x)?, tx, 0),
        (css.hz.stack(&splitters.a_z)?, tz, layout.m_x + layout.delta_x),
    ];
    for (block, target, offset) in &blocks {
        let needed = target.saturating_sub(block.rows());
        let extra = search_redundant_rows(block, needed, params, stream)?;
        shortfall += needed - extra.len();
        for (_, coeff) in extra {
            let mut row = BinaryVector::zeros(rows);
            for i in coeff.ones() {
                row.set(offset + i, true);
            }
            m_map.push_row(&row)?;
        }
    }
    if shortfall > 0 {
        warn!(
            "overcomplete search found {} of {} rows (weight <= {})",
            m_map.rows(),
            m_map.rows() + shortfall,
            params.max_row_weight
        );
    }
    let h_oc = m_map.mul(h_ext)?;
    Ok(Overcomplete { h_oc, m_map, shortfall })
}

/// Ensemble-wide settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(rename = "L")]
    pub l_batches: usize,
    pub delta: usize,
    pub splitter_weight: usize,
    #[serde(default = "default_max_overlap")]
    pub max_overlap: Option<usize>,
    #[serde(default)]
    pub overcomplete: Option<OvercompleteParams>,
    pub decoder: Bp4Config,
    /// Adds one path decoding on the plain (or plain overcomplete) matrix.
    #[serde(default)]
    pub plain_path: bool,
}

fn default_max_overlap() -> Option<usize> {
    Some(1)
}

impl EnsembleConfig {
    /// A single path decoding on `H` (or its overcomplete version).
    pub fn standalone(decoder: Bp4Config, overcomplete: Option<OvercompleteParams>) -> Self {
        Self {
            l_batches: 1,
            delta: 0,
            splitter_weight: 0,
            max_overlap: Some(1),
            overcomplete,
            decoder,
            plain_path: false,
        }
    }

    /// Number of decoding paths `K = L · 2^Δ`, plus the optional plain path.
    pub fn num_paths(&self) -> usize {
        self.l_batches * (1usize << self.delta) + usize::from(self.plain_path)
    }

    pub fn validate(&self, code: &StabilizerCode) -> Result<()> {
        if self.l_batches == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if !self.delta.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("delta = {} must be even", self.delta)));
        }
        if self.delta > code.rank() {
            return Err(Error::InvalidParameter(format!(
                "delta = {} exceeds n - k = {}",
                self.delta,
                code.rank()
            )));
        }
        if self.delta > 16 {
            return Err(Error::InvalidParameter("delta above 16 is not supported".into()));
        }
        self.decoder.validate()
    }

    fn splitter_params(&self) -> SplitterParams {
        SplitterParams {
            delta: self.delta,
            weight: self.splitter_weight,
            max_overlap: self.max_overlap,
            attempts_per_row: SPLITTER_ATTEMPTS,
        }
    }
}

/// All batches of one experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ensemble {
    pub batches: Vec<Batch>,
    /// Optional plain path: `H` itself, or its overcomplete version.
    pub plain: Option<Batch>,
    /// Batches whose splitter set repeats an earlier batch.
    pub duplicate_batches: usize,
}

/// Builds every batch from streams derived from `master_seed`; batch `ℓ`
/// uses path id `ℓ` of the construction plan, the plain path id `L`.
pub fn build_ensemble(code: &StabilizerCode, cfg: &EnsembleConfig, master_seed: u64) -> Result<Ensemble> {
    cfg.validate(code)?;
    let plan = SeedPlan::construction(master_seed);
    let mut batches: Vec<Batch> = Vec::with_capacity(cfg.l_batches);
    let mut duplicate_batches = 0;
    for l in 0..cfg.l_batches {
        let mut stream = derive_stream(plan, l as u64);
        let splitters = generate_splitters(code, cfg.splitter_params(), &mut stream)?;
        if batches.iter().any(|b| b.splitters == splitters) {
            duplicate_batches += 1;
        }
        let batch = build_batch(code, splitters, cfg.overcomplete.as_ref(), &mut stream)?;
        debug!(
            "batch {l}: {} working rows, {} edges-worth of ones",
            batch.working_matrix().rows(),
            (0..batch.working_matrix().rows())
                .map(|r| batch.working_matrix().row_weight(r))
                .sum::<usize>()
        );
        batches.push(batch);
    }
    let plain = if cfg.plain_path {
        let mut stream = derive_stream(plan, cfg.l_batches as u64);
        Some(build_batch(
            code,
            SplitterSet::empty(code.n()),
            cfg.overcomplete.as_ref(),
            &mut stream,
        )?)
    } else {
        None
    };
    Ok(Ensemble {
        batches,
        plain,
        duplicate_batches,
    })
}

/// Minimum Pauli weight, lowest path id on ties.
pub fn select_min_weight(candidates: &[(usize, SymplecticVector)]) -> Result<(usize, SymplecticVector)> {
    candidates
        .iter()
        .min_by_key(|(id, e)| (pauli_weight(e), *id))
        .cloned()
        .ok_or(Error::NoCandidates)
}

/// Per-path summary of one ensemble decode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSummary {
    pub path_id: usize,
    pub batch: usize,
    /// 1-based path index within its batch.
    pub path: usize,
    pub converged: bool,
    pub iterations_used: usize,
    pub admitted: bool,
    pub weight: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AscedResult {
    /// Minimum-weight syndrome-consistent estimate; `None` means no path
    /// reproduced the measured syndrome.
    pub estimate: Option<SymplecticVector>,
    pub winning_path: Option<usize>,
    pub paths: Vec<PathSummary>,
}

struct PathDecoder {
    batch: Batch,
    decoder: Bp4Decoder,
    batch_index: usize,
    num_paths: usize,
}

/// Reusable buffers for [`EnsembleDecoder::decode_with`].
pub struct EnsembleWorkspace {
    per_batch: Vec<Bp4Workspace>,
}

/// Decoders for every batch of an ensemble, ready to run on syndromes.
pub struct EnsembleDecoder {
    h: BinaryMatrix,
    batches: Vec<PathDecoder>,
}

impl EnsembleDecoder {
    pub fn new(code: &StabilizerCode, ensemble: &Ensemble, cfg: &Bp4Config) -> Result<Self> {
        let mut batches = Vec::new();
        for (l, batch) in ensemble.batches.iter().enumerate() {
            batches.push(PathDecoder {
                decoder: Bp4Decoder::new(batch.working_matrix(), *cfg)?,
                num_paths: 1 << batch.layout.delta(),
                batch: batch.clone(),
                batch_index: l,
            });
        }
        if let Some(plain) = &ensemble.plain {
            batches.push(PathDecoder {
                decoder: Bp4Decoder::new(plain.working_matrix(), *cfg)?,
                num_paths: 1,
                batch: plain.clone(),
                batch_index: ensemble.batches.len(),
            });
        }
        Ok(Self {
            h: code.check_matrix().clone(),
            batches,
        })
    }

    pub fn num_paths(&self) -> usize {
        self.batches.iter().map(|b| b.num_paths).sum()
    }

    pub fn workspace(&self) -> EnsembleWorkspace {
        EnsembleWorkspace {
            per_batch: self.batches.iter().map(|b| b.decoder.workspace()).collect(),
        }
    }

    pub fn decode(&self, z_measured: &BinaryVector) -> Result<AscedResult> {
        let mut ws = self.workspace();
        self.decode_with(z_measured, &mut ws)
    }

    /// Runs every path on `z_measured` and selects among admitted estimates.
    pub fn decode_with(&self, z_measured: &BinaryVector, ws: &mut EnsembleWorkspace) -> Result<AscedResult> {
        check_len(self.h.rows(), z_measured.len())?;
        let mut best: Option<(usize, usize, SymplecticVector)> = None;
        let mut paths = Vec::with_capacity(self.num_paths());
        let mut path_id = 0;
        for (pd, bws) in self.batches.iter().zip(ws.per_batch.iter_mut()) {
            for path in 1..=pd.num_paths {
                let z = pd.batch.working_syndrome(z_measured, path)?;
                let DecodeResult {
                    estimate,
                    converged,
                    iterations_used,
                } = pd.decoder.decode_with(&z, bws)?;
                // A converged path satisfies every working row, and the
                // working matrix contains the measured rows.
                let admitted = converged || self.h.mul_vec(&estimate.swapped())? == *z_measured;
                let weight = pauli_weight(&estimate);
                if admitted && best.as_ref().is_none_or(|(w, _, _)| weight < *w) {
                    best = Some((weight, path_id, estimate));
                }
                paths.push(PathSummary {
                    path_id,
                    batch: pd.batch_index,
                    path,
                    converged,
                    iterations_used,
                    admitted,
                    weight,
                });
                path_id += 1;
            }
        }
        Ok(match best {
            Some((_, id, e)) => AscedResult {
                estimate: Some(e),
                winning_path: Some(id),
                paths,
            },
            None => AscedResult {
                estimate: None,
                winning_path: None,
                paths,
            },
        })
    }
}

/// One-shot ensemble decode.
pub fn asced_decode(
    code: &StabilizerCode,
    ensemble: &Ensemble,
    z_measured: &BinaryVector,
    cfg: &EnsembleConfig,
) -> Result<AscedResult> {
    EnsembleDecoder::new(code, ensemble, &cfg.decoder)?.decode(z_measured)
}

/// Serialized batch: matrices in the `rows cols` + bit-string text format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub a_x: String,
    pub a_z: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_map: Option<String>,
}

/// On-disk ensemble, enough to rebuild every working matrix exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub code: CodeSpec,
    pub config: EnsembleConfig,
    pub seed: u64,
    pub batches: Vec<BatchRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plain: Option<BatchRecord>,
    /// SHA-256 of the batch records.
    pub hash: String,
}

fn batch_record(batch: &Batch) -> BatchRecord {
    BatchRecord {
        a_x: batch.splitters.a_x.to_text(),
        a_z: batch.splitters.a_z.to_text(),
        m_map: batch.overcomplete.as_ref().map(|oc| oc.m_map.to_text()),
    }
}

fn restore_batch(code: &StabilizerCode, record: &BatchRecord) -> Result<Batch> {
    let splitters = SplitterSet {
        a_x: BinaryMatrix::from_text(&record.a_x)?,
        a_z: BinaryMatrix::from_text(&record.a_z)?,
    };
    let (h_ext, layout) = extended_check_matrix(code, &splitters)?;
    let expected = code.rank() + splitters.delta();
    if h_ext.rank() != expected {
        return Err(Error::InvalidParameter(
            "stored splitters do not raise the rank by delta".into(),
        ));
    }
    let overcomplete = match &record.m_map {
        None => None,
        Some(text) => {
            let m_map = BinaryMatrix::from_text(text)?;
            check_len(layout.rows(), m_map.cols())?;
            if m_map.rank() != layout.rows() {
                return Err(Error::InvalidParameter(
                    "stored overcomplete map is rank deficient".into(),
                ));
            }
            let h_oc = m_map.mul(&h_ext)?;
            Some(Overcomplete {
                h_oc,
                m_map,
                shortfall: 0,
            })
        }
    };
    Ok(Batch {
        splitters,
        h_ext,
        layout,
        overcomplete,
    })
}

/// Content hash over every stored matrix.
pub fn ensemble_hash(batches: &[BatchRecord], plain: Option<&BatchRecord>) -> String {
    let mut hasher = Sha256::new();
    for record in batches.iter().chain(plain) {
        hasher.update(record.a_x.as_bytes());
        hasher.update(b"|");
        hasher.update(record.a_z.as_bytes());
        hasher.update(b"|");
        hasher.update(record.m_map.as_deref().unwrap_or("-").as_bytes());
        hasher.update(b";");
    }
    hex::encode(hasher.finalize())
}

impl EnsembleFile {
    pub fn new(code: CodeSpec, config: EnsembleConfig, seed: u64, ensemble: &Ensemble) -> Self {
        let batches: Vec<BatchRecord> = ensemble.batches.iter().map(batch_record).collect();
        let plain = ensemble.plain.as_ref().map(batch_record);
        let hash = ensemble_hash(&batches, plain.as_ref());
        Self {
            code,
            config,
            seed,
            batches,
            plain,
            hash,
        }
    }

    /// Rebuilds the ensemble, verifying the stored hash.
    pub fn restore(&self, code: &StabilizerCode) -> Result<Ensemble> {
        let hash = ensemble_hash(&self.batches, self.plain.as_ref());
        if hash != self.hash {
            return Err(Error::Parse(format!(
                "ensemble hash mismatch: stored {}, computed {hash}",
                self.hash
            )));
        }
        let batches = self
            .batches
            .iter()
            .map(|r| restore_batch(code, r))
            .collect::<Result<Vec<_>>>()?;
        let duplicate_batches = batches
            .iter()
            .enumerate()
            .filter(|(i, b)| batches[..*i].iter().any(|o| o.splitters == b.splitters))
            .count();
        let plain = self.plain.as_ref().map(|r| restore_batch(code, r)).transpose()?;
        Ok(Ensemble {
            batches,
            plain,
            duplicate_batches,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
