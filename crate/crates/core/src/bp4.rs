//! Log-domain quaternary belief propagation over the Tanner graph of a
//! binary symplectic check matrix.
//!
//! Variable nodes carry one LLR per nontrivial Pauli `(X, Z, Y)`. Before a
//! check update each variable-to-check vector is collapsed to a scalar LLR
//! for "commutes with the check entry η", check nodes run the usual
//! tanh rule with the syndrome sign, and variable nodes add every check
//! message to the Pauli components that anticommute with that check's entry.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{BinaryMatrix, BinaryVector};
use crate::pauli::{Pauli, SymplecticVector};

/// Default magnitude cap for check messages and quantized beliefs.
pub const DEFAULT_CLAMP: f64 = 30.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// All check nodes, then all variable nodes.
    #[default]
    Flooding,
    /// Check nodes one at a time, posteriors refreshed after each.
    Serial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bp4Config {
    pub p0: f64,
    pub i_max: usize,
    #[serde(default = "default_clamp")]
    pub clamp: f64,
    #[serde(default)]
    pub schedule: Schedule,
}

fn default_clamp() -> f64 {
    DEFAULT_CLAMP
}

impl Bp4Config {
    pub fn new(p0: f64, i_max: usize) -> Self {
        Self {
            p0,
            i_max,
            clamp: DEFAULT_CLAMP,
            schedule: Schedule::Flooding,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 0.75) {
            return Err(Error::InvalidParameter(format!(
                "p0 = {} must lie in (0, 0.75)",
                self.p0
            )));
        }
        if self.i_max == 0 {
            return Err(Error::InvalidParameter("i_max must be at least 1".into()));
        }
        if !(self.clamp > 0.0 && self.clamp.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "clamp = {} must be positive",
                self.clamp
            )));
        }
        Ok(())
    }
}

/// Per-qubit LLRs `ln P(I)/P(ζ)` for ζ ∈ {X, Z, Y}.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LlrVector {
    pub x: f64,
    pub z: f64,
    pub y: f64,
}

impl LlrVector {
    pub fn new(x: f64, z: f64, y: f64) -> Self {
        Self { x, z, y }
    }

    pub fn splat(v: f64) -> Self {
        Self { x: v, z: v, y: v }
    }

    pub fn get(&self, p: Pauli) -> f64 {
        match p {
            Pauli::X => self.x,
            Pauli::Z => self.z,
            Pauli::Y => self.y,
            Pauli::I => 0.0,
        }
    }

    fn add_anticommuting(&mut self, label: Pauli, m: f64) {
        match label {
            Pauli::X => {
                self.z += m;
                self.y += m;
            }
            Pauli::Z => {
                self.x += m;
                self.y += m;
            }
            Pauli::Y => {
                self.x += m;
                self.z += m;
            }
            Pauli::I => {}
        }
    }
}

pub fn prior_llr(p0: f64) -> Result<LlrVector> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter(format!("p0 = {p0} outside (0, 1)")));
    }
    Ok(LlrVector::splat((3.0 * (1.0 - p0) / p0).ln()))
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// The others of `{X, Z, Y}` once `eta` is removed.
#[inline]
fn others(eta: Pauli) -> (Pauli, Pauli) {
    match eta {
        Pauli::X => (Pauli::Z, Pauli::Y),
        Pauli::Z => (Pauli::X, Pauli::Y),
        Pauli::Y => (Pauli::X, Pauli::Z),
        Pauli::I => panic!("quantization against the identity"),
    }
}

/// Belief quantization: `ln((1 + e^{−L_η}) / Σ_{ζ ∉ {I, η}} e^{−L_ζ})`,
/// clamped to `±clamp`.
pub fn quantize(msg: &LlrVector, eta: Pauli, clamp: f64) -> f64 {
    let (a, b) = others(eta);
    let num = softplus(-msg.get(eta));
    let den = log_add(-msg.get(a), -msg.get(b));
    (num - den).clamp(-clamp, clamp)
}

/// `tanh(λ/2)` of the quantized belief, computed directly from the ratio
/// `(A − B)/(A + B)` after shifting every exponent to be non-positive.
#[inline]
fn quantized_tanh(l_eta: f64, l_a: f64, l_b: f64, t_max: f64) -> f64 {
    let s = l_eta.min(l_a).min(l_b).min(0.0);
    let num = s.exp() + (s - l_eta).exp();
    let den = (s - l_a).exp() + (s - l_b).exp();
    ((num - den) / (num + den)).clamp(-t_max, t_max)
}

/// Outgoing messages from tanh-domain inputs: each output excludes its own
/// input from the product (prefix/suffix products, no division).
fn cn_kernel(t: &[f64], flip: bool, clamp: f64, out: &mut [f64]) {
    let d = t.len();
    let mut suffix = 1.0;
    // out[k] temporarily holds the product of t[k+1..]
    for k in (0..d).rev() {
        out[k] = suffix;
        suffix *= t[k];
    }
    let mut prefix = 1.0;
    for k in 0..d {
        let prod = prefix * out[k];
        prefix *= t[k];
        let mag = ((1.0 + prod) / (1.0 - prod)).ln();
        let v = if mag.is_nan() { 0.0 } else { mag.clamp(-clamp, clamp) };
        out[k] = if flip { -v } else { v };
    }
}

/// Check-node update on scalar beliefs: output `k` is
/// `(−1)^z · 2 atanh(Π_{k' ≠ k} tanh(m_k'/2))`, clamped.
pub fn cn_update(incoming: &[f64], z_bit: bool, clamp: f64) -> Vec<f64> {
    let t_max = (clamp / 2.0).tanh();
    let t: Vec<f64> = incoming
        .iter()
        .map(|&m| (m / 2.0).tanh().clamp(-t_max, t_max))
        .collect();
    let mut out = vec![0.0; t.len()];
    cn_kernel(&t, z_bit, clamp, &mut out);
    out
}

/// Variable-node update for one qubit. Returns the outgoing vector for each
/// check and the posterior.
pub fn vn_update(prior: &LlrVector, incoming: &[f64], check_labels: &[Pauli]) -> Result<(Vec<LlrVector>, LlrVector)> {
    check_len(incoming.len(), check_labels.len())?;
    let mut posterior = *prior;
    for (&m, &label) in incoming.iter().zip(check_labels) {
        posterior.add_anticommuting(label, m);
    }
    let outgoing = incoming
        .iter()
        .zip(check_labels)
        .map(|(&m, &label)| {
            let mut v = posterior;
            v.add_anticommuting(label, -m);
            v
        })
        .collect();
    Ok((outgoing, posterior))
}

/// LLR gap below which two Pauli hypotheses count as tied.
const TIE_TOL: f64 = 1e-9;

#[inline]
fn decide(post: &LlrVector) -> Pauli {
    if post.x > 0.0 && post.z > 0.0 && post.y > 0.0 {
        return Pauli::I;
    }
    // ties (up to rounding) resolve X < Y < Z
    let mut best = (Pauli::X, post.x);
    if post.y < best.1 - TIE_TOL {
        best = (Pauli::Y, post.y);
    }
    if post.z < best.1 - TIE_TOL {
        best = (Pauli::Z, post.z);
    }
    best.0
}

/// Positive float `mant · 2^{500·exp}`.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    mant: f64,
    exp: i32,
}

impl Scaled {
    const ONE: Scaled = Scaled { mant: 1.0, exp: 0 };

    /// Multiplies by `w ∈ [e^{−clamp}, e^{clamp}]`.
    #[inline]
    fn mul(&mut self, w: f64) {
        self.mant *= w;
        if self.mant > HUGE {
            self.mant *= TINY;
            self.exp += 1;
        } else if self.mant < TINY {
            self.mant *= HUGE;
            self.exp -= 1;
        }
    }
}

const HUGE: f64 = 3.273390607896142e150; // 2^500
const TINY: f64 = 3.054936363499605e-151; // 2^-500

/// `[e^{−L_X}, e^{−L_Z}, e^{−L_Y}, 1]` divided by their maximum, where
/// `e^{−L_ζ} = prior_ζ / q_ζ`.
#[inline]
fn normalize_beliefs(prior_exp: [f64; 3], q: [Scaled; 3]) -> [f64; 4] {
    // e^{−L} = (prior/mant) · 2^{−500·exp}
    let top = q.iter().map(|s| -s.exp).max().unwrap_or(0).max(0);
    let rescale = |mant: f64, e: i32| match top - e {
        0 => mant,
        1 => mant * TINY,
        2 => mant * TINY * TINY,
        _ => 0.0,
    };
    let v = [
        rescale(prior_exp[0] / q[0].mant, -q[0].exp),
        rescale(prior_exp[1] / q[1].mant, -q[1].exp),
        rescale(prior_exp[2] / q[2].mant, -q[2].exp),
        rescale(1.0, 0),
    ];
    let m = v[0].max(v[1]).max(v[2]).max(v[3]);
    [v[0] / m, v[1] / m, v[2] / m, v[3] / m]
}

/// [`decide`] on normalized exponentials: a larger `e^{−L}` is a smaller LLR.
#[inline]
fn decide_exp(v: &[f64; 4]) -> Pauli {
    let [ex, ez, ey, e1] = *v;
    if ex < e1 && ez < e1 && ey < e1 {
        return Pauli::I;
    }
    let mut best = (Pauli::X, ex);
    if ey > best.1 * (1.0 + TIE_TOL) {
        best = (Pauli::Y, ey);
    }
    if ez > best.1 * (1.0 + TIE_TOL) {
        best = (Pauli::Z, ez);
    }
    best.0
}

/// `2^{−⌊log2 x⌋}` for positive normal `x`.
#[inline]
fn inv_pow2_of(x: f64) -> f64 {
    let e = ((x.to_bits() >> 52) & 0x7ff) as i64;
    // 2046 − e is the biased exponent of 2^{−⌊log2 x⌋}
    f64::from_bits(((2046 - e).clamp(1, 2046) as u64) << 52)
}

/// Per-qubit hard decision: identity iff every LLR is positive, otherwise
/// the Pauli with the smallest LLR.
pub fn hard_decision(posteriors: &[LlrVector]) -> SymplecticVector {
    let mut e = SymplecticVector::zeros(posteriors.len());
    for (i, post) in posteriors.iter().enumerate() {
        let q = decide(post);
        if q != Pauli::I {
            e.set_qubit(i, q);
        }
    }
    e
}

/// Sparse bipartite graph of a check matrix: qubit `i` touches check `j`
/// iff `H[j, i] ∨ H[j, n + i]`, and that edge carries the Pauli entry.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    edge_label: Vec<Pauli>,
    var_ptr: Vec<usize>,
    /// Edge indices grouped by variable node.
    var_edges: Vec<u32>,
    /// Labels of `var_edges`, same order.
    var_labels: Vec<Pauli>,
}

impl TannerGraph {
    pub fn new(h: &BinaryMatrix) -> Result<Self> {
        if !h.cols().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "check matrix needs an even column count".into(),
            ));
        }
        let n = h.cols() / 2;
        let m = h.rows();
        let mut check_ptr = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        let mut edge_label = Vec::new();
        check_ptr.push(0);
        for j in 0..m {
            let row = h.row(j);
            let mut support: Vec<usize> = row.ones().map(|c| c % n).collect();
            support.sort_unstable();
            support.dedup();
            for i in support {
                edge_var.push(i as u32);
                edge_label.push(Pauli::from_bits(row.get(i), row.get(n + i)));
            }
            check_ptr.push(edge_var.len());
        }
        let mut degree = vec![0usize; n];
        for &v in &edge_var {
            degree[v as usize] += 1;
        }
        let mut var_ptr = vec![0usize; n + 1];
        for i in 0..n {
            var_ptr[i + 1] = var_ptr[i] + degree[i];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v as usize]] = e as u32;
            fill[v as usize] += 1;
        }
        let var_labels = var_edges.iter().map(|&e| edge_label[e as usize]).collect();
        Ok(Self {
            n,
            m,
            check_ptr,
            edge_var,
            edge_label,
            var_ptr,
            var_edges,
            var_labels,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Qubits adjacent to check `j` (M(j)).
    pub fn check_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_var[self.check_ptr[j]..self.check_ptr[j + 1]]
            .iter()
            .map(|&v| v as usize)
    }

    /// Checks adjacent to qubit `i` (N(i)), ascending.
    pub fn var_neighbors(&self, i: usize) -> Vec<usize> {
        self.var_edges[self.var_ptr[i]..self.var_ptr[i + 1]]
            .iter()
            .map(|&e| self.check_ptr.partition_point(|&p| p <= e as usize) - 1)
            .collect()
    }

    /// Check entry η_{j,i}, or identity when there is no edge.
    pub fn label(&self, j: usize, i: usize) -> Pauli {
        let range = self.check_ptr[j]..self.check_ptr[j + 1];
        self.edge_var[range.clone()]
            .iter()
            .position(|&v| v as usize == i)
            .map_or(Pauli::I, |k| self.edge_label[range.start + k])
    }

    fn max_check_degree(&self) -> usize {
        self.check_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// True iff the qubit-wise estimate reproduces `z` on every check.
    fn satisfies(&self, estimate: &[Pauli], z: &[bool]) -> bool {
        (0..self.m).all(|j| {
            let mut parity = false;
            for e in self.check_ptr[j]..self.check_ptr[j + 1] {
                parity ^= estimate[self.edge_var[e] as usize].anticommutes(self.edge_label[e]);
            }
            parity == z[j]
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub estimate: SymplecticVector,
    pub converged: bool,
    pub iterations_used: usize,
}

/// Reusable message buffers for one decoder.
#[derive(Clone, Debug, Default)]
pub struct Bp4Workspace {
    check_msg: Vec<f64>,
    posterior: Vec<LlrVector>,
    /// `e^{m}` of every check message (flooding only).
    check_w: Vec<f64>,
    /// Per qubit `[e^{s−L_X}, e^{s−L_Z}, e^{s−L_Y}, e^{s}]`, `s = min(0, L)`.
    var_exp: Vec<[f64; 4]>,
    tanh_buf: Vec<f64>,
    out_buf: Vec<f64>,
    w_buf: Vec<f64>,
    suffix_den: Vec<f64>,
    estimate: Vec<Pauli>,
    z: Vec<bool>,
}

/// A BP4 decoder bound to one check matrix.
#[derive(Clone, Debug)]
pub struct Bp4Decoder {
    graph: TannerGraph,
    cfg: Bp4Config,
    prior: LlrVector,
}

impl Bp4Decoder {
    pub fn new(h: &BinaryMatrix, cfg: Bp4Config) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            graph: TannerGraph::new(h)?,
            prior: prior_llr(cfg.p0)?,
            cfg,
        })
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn config(&self) -> &Bp4Config {
        &self.cfg
    }

    pub fn workspace(&self) -> Bp4Workspace {
        let d = self.graph.max_check_degree();
        Bp4Workspace {
            check_msg: vec![0.0; self.graph.num_edges()],
            posterior: vec![self.prior; self.graph.n],
            check_w: vec![1.0; self.graph.num_edges()],
            var_exp: vec![[0.0; 4]; self.graph.n],
            tanh_buf: vec![0.0; d],
            out_buf: vec![0.0; d],
            w_buf: vec![0.0; d],
            suffix_den: vec![0.0; d],
            estimate: vec![Pauli::I; self.graph.n],
            z: vec![false; self.graph.m],
        }
    }

    pub fn decode(&self, z: &BinaryVector) -> Result<DecodeResult> {
        let mut ws = self.workspace();
        self.decode_with(z, &mut ws)
    }

    pub fn decode_with(&self, z: &BinaryVector, ws: &mut Bp4Workspace) -> Result<DecodeResult> {
        check_len(self.graph.m, z.len())?;
        let g = &self.graph;
        ws.check_msg.iter_mut().for_each(|m| *m = 0.0);
        ws.posterior.iter_mut().for_each(|p| *p = self.prior);
        for (j, zb) in ws.z.iter_mut().enumerate() {
            *zb = z.get(j);
        }

        self.hard_decide(ws);
        if g.satisfies(&ws.estimate, &ws.z) {
            return Ok(self.result(ws, true, 1));
        }
        let (converged, iterations) = match self.cfg.schedule {
            Schedule::Flooding => self.decode_flooding(ws),
            Schedule::Serial => self.decode_serial(ws),
        };
        Ok(self.result(ws, converged, iterations))
    }

    fn decode_serial(&self, ws: &mut Bp4Workspace) -> (bool, usize) {
        for it in 1..=self.cfg.i_max {
            self.check_pass(ws, true);
            self.hard_decide(ws);
            if self.graph.satisfies(&ws.estimate, &ws.z) {
                return (true, it);
            }
        }
        (false, self.cfg.i_max)
    }

    fn result(&self, ws: &Bp4Workspace, converged: bool, iterations_used: usize) -> DecodeResult {
        let mut estimate = SymplecticVector::zeros(self.graph.n);
        for (i, &q) in ws.estimate.iter().enumerate() {
            if q != Pauli::I {
                estimate.set_qubit(i, q);
            }
        }
        DecodeResult {
            estimate,
            converged,
            iterations_used,
        }
    }

    fn hard_decide(&self, ws: &mut Bp4Workspace) {
        for (q, post) in ws.estimate.iter_mut().zip(&ws.posterior) {
            *q = decide(post);
        }
    }

    /// Updates every check message in place. With `serial`, posteriors of
    /// the adjacent qubits absorb each check's new messages immediately.
    fn check_pass(&self, ws: &mut Bp4Workspace, serial: bool) {
        let g = &self.graph;
        let clamp = self.cfg.clamp;
        let t_max = (clamp / 2.0).tanh();
        for j in 0..g.m {
            let range = g.check_ptr[j]..g.check_ptr[j + 1];
            let d = range.len();
            if d == 0 {
                continue;
            }
            for (k, e) in range.clone().enumerate() {
                let i = g.edge_var[e] as usize;
                let eta = g.edge_label[e];
                let post = &ws.posterior[i];
                let own = ws.check_msg[e];
                // the own message sits in the two components that anticommute with η
                let t = match eta {
                    Pauli::X => quantized_tanh(post.x, post.z - own, post.y - own, t_max),
                    Pauli::Z => quantized_tanh(post.z, post.x - own, post.y - own, t_max),
                    Pauli::Y => quantized_tanh(post.y, post.x - own, post.z - own, t_max),
                    Pauli::I => unreachable!("edges never carry the identity"),
                };
                ws.tanh_buf[k] = t;
            }
            cn_kernel(&ws.tanh_buf[..d], ws.z[j], clamp, &mut ws.out_buf[..d]);
            for (k, e) in range.enumerate() {
                let new = ws.out_buf[k];
                if serial {
                    let delta = new - ws.check_msg[e];
                    let i = g.edge_var[e] as usize;
                    ws.posterior[i].add_anticommuting(g.edge_label[e], delta);
                }
                ws.check_msg[e] = new;
            }
        }
    }

    /// Flooding iterations in the exponential domain. Check messages are
    /// kept as `w = e^{m}` and beliefs as `e^{s−L_ζ}` relative to a common
    /// scale, so the loop needs no logarithms and one division per edge.
    fn decode_flooding(&self, ws: &mut Bp4Workspace) -> (bool, usize) {
        let g = &self.graph;
        let prior_exp = [(-self.prior.x).exp(), (-self.prior.z).exp(), (-self.prior.y).exp()];
        ws.check_w.iter_mut().for_each(|w| *w = 1.0);
        let init = normalize_beliefs(prior_exp, [Scaled::ONE; 3]);
        ws.var_exp.iter_mut().for_each(|v| *v = init);
        for it in 1..=self.cfg.i_max {
            self.exp_check_pass(ws);
            for i in 0..g.n {
                let mut q = [Scaled::ONE; 3];
                let range = g.var_ptr[i]..g.var_ptr[i + 1];
                for (&e, &label) in g.var_edges[range.clone()].iter().zip(&g.var_labels[range]) {
                    let w = ws.check_w[e as usize];
                    // a message lands on the two components anticommuting with the label
                    match label {
                        Pauli::X => {
                            q[1].mul(w);
                            q[2].mul(w);
                        }
                        Pauli::Z => {
                            q[0].mul(w);
                            q[2].mul(w);
                        }
                        _ => {
                            q[0].mul(w);
                            q[1].mul(w);
                        }
                    }
                }
                let v = normalize_beliefs(prior_exp, q);
                ws.var_exp[i] = v;
                ws.estimate[i] = decide_exp(&v);
            }
            if g.satisfies(&ws.estimate, &ws.z) {
                return (true, it);
            }
        }
        (false, self.cfg.i_max)
    }

    fn exp_check_pass(&self, ws: &mut Bp4Workspace) {
        let g = &self.graph;
        let clamp = self.cfg.clamp;
        let t_max = (clamp / 2.0).tanh();
        let (w_min, w_max) = ((-clamp).exp(), clamp.exp());
        for j in 0..g.m {
            let range = g.check_ptr[j]..g.check_ptr[j + 1];
            let d = range.len();
            if d == 0 {
                continue;
            }
            let (num, den) = (&mut ws.tanh_buf[..d], &mut ws.out_buf[..d]);
            let edges = g.edge_var[range.clone()].iter().zip(&g.edge_label[range.clone()]);
            let w_in = &ws.check_w[range.clone()];
            for ((((&i, &label), &w), nk), dk) in edges.zip(w_in).zip(num.iter_mut()).zip(den.iter_mut()) {
                let [ex, ez, ey, e1] = ws.var_exp[i as usize];
                let (a, b) = match label {
                    Pauli::X => (e1 + ex, (ez + ey) * w),
                    Pauli::Z => (e1 + ez, (ex + ey) * w),
                    _ => (e1 + ey, (ex + ez) * w),
                };
                // tanh = (a − b)/(a + b), kept as a fraction scaled by a power of two
                let sum = a + b;
                let scale = inv_pow2_of(sum);
                let bound = t_max * sum;
                *nk = (a - b).clamp(-bound, bound) * scale;
                *dk = sum * scale;
            }
            let flip = ws.z[j];
            let (sn, sd) = (&mut ws.w_buf[..d], &mut ws.suffix_den[..d]);
            let (mut pn, mut pd) = (1.0, 1.0);
            for (((snk, sdk), &nk), &dk) in sn.iter_mut().zip(sd.iter_mut()).zip(num.iter()).zip(den.iter()).rev() {
                *snk = pn;
                *sdk = pd;
                pn *= nk;
                pd *= dk;
            }
            let (mut pn, mut pd) = (1.0, 1.0);
            let w_out = &mut ws.check_w[range];
            for ((((w, &snk), &sdk), &nk), &dk) in w_out
                .iter_mut()
                .zip(sn.iter())
                .zip(sd.iter())
                .zip(num.iter())
                .zip(den.iter())
            {
                let n = pn * snk;
                let dd = pd * sdk;
                pn *= nk;
                pd *= dk;
                let ratio = if flip { (dd - n) / (dd + n) } else { (dd + n) / (dd - n) };
                *w = if ratio.is_nan() { 1.0 } else { ratio.clamp(w_min, w_max) };
            }
        }
    }

    /// LLR-domain flooding variable update (reference for the fast path).
    #[cfg(test)]
    fn variable_pass(&self, ws: &mut Bp4Workspace) {
        let g = &self.graph;
        for i in 0..g.n {
            let mut post = self.prior;
            for &e in &g.var_edges[g.var_ptr[i]..g.var_ptr[i + 1]] {
                post.add_anticommuting(g.edge_label[e as usize], ws.check_msg[e as usize]);
            }
            ws.posterior[i] = post;
        }
    }
}

/// One-shot decode of `z` against `h`.
pub fn decode(h: &BinaryMatrix, z: &BinaryVector, cfg: &Bp4Config) -> Result<DecodeResult> {
    Bp4Decoder::new(h, *cfg)?.decode(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_toric, syndrome};
    use crate::pauli::{pauli_weight, symplectic_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn prior_examples() {
        let p = prior_llr(0.75).unwrap();
        assert!(close(p.x, 0.0, 1e-15) && close(p.y, 0.0, 1e-15) && close(p.z, 0.0, 1e-15));
        assert!(close(prior_llr(0.3).unwrap().x, 7f64.ln(), 1e-12));
        assert!(close(prior_llr(0.3).unwrap().x, 1.94591, 1e-5));
        assert!(close(prior_llr(0.49).unwrap().z, (1.53f64 / 0.49).ln(), 1e-12));
        assert!(close(prior_llr(0.49).unwrap().z, 1.1386, 1e-4));
        assert!(prior_llr(0.0).is_err());
        assert!(prior_llr(1.0).is_err());
    }

    #[test]
    fn quantize_examples() {
        let a = 7f64.ln();
        for eta in [Pauli::X, Pauli::Y, Pauli::Z] {
            let q = quantize(&LlrVector::splat(a), eta, 30.0);
            assert!(close(q, 4f64.ln(), 1e-12), "{eta:?}: {q}");
        }
        // (X, Z, Y) = (1, 2, 3) against X factorises to exactly 2
        let q = quantize(&LlrVector::new(1.0, 2.0, 3.0), Pauli::X, 30.0);
        assert!(close(q, 2.0, 1e-12));
        assert_eq!(quantize(&LlrVector::new(100.0, -100.0, -100.0), Pauli::X, 30.0), -30.0);
        assert!(close(
            quantize(&LlrVector::splat(-100.0), Pauli::X, 30.0),
            -(2f64.ln()),
            1e-12
        ));
        assert_eq!(quantize(&LlrVector::new(0.0, 200.0, 200.0), Pauli::X, 30.0), 30.0);
    }

    /// Probability-domain quantization from normalized P(I), P(X), P(Z), P(Y).
    fn quantize_oracle(msg: &LlrVector, eta: Pauli) -> f64 {
        let w = |l: f64| (-l).exp();
        let (px, pz, py) = (w(msg.x), w(msg.z), w(msg.y));
        let total = 1.0 + px + pz + py;
        let prob = |p: Pauli| match p {
            Pauli::I => 1.0 / total,
            Pauli::X => px / total,
            Pauli::Z => pz / total,
            Pauli::Y => py / total,
        };
        let commute: f64 = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .filter(|p| !p.anticommutes(eta))
            .map(prob)
            .sum();
        let anti: f64 = [Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .filter(|p| p.anticommutes(eta))
            .map(prob)
            .sum();
        (commute / anti).ln()
    }

    #[test]
    fn quantize_matches_probability_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20_000 {
            let msg = LlrVector::new(
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
            );
            for eta in [Pauli::X, Pauli::Y, Pauli::Z] {
                let got = quantize(&msg, eta, 1e9);
                let want = quantize_oracle(&msg, eta);
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "{msg:?} {eta:?}: {got} vs {want}"
                );
                assert_eq!(got.signum(), want.signum());
                // the tanh shortcut used inside the decoder agrees too
                let (a, b) = others(eta);
                let t = quantized_tanh(msg.get(eta), msg.get(a), msg.get(b), 1.0);
                assert!((t - (want / 2.0).tanh()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cn_update_degree_two() {
        let out = cn_update(&[1.5, -0.25], false, 30.0);
        assert!(close(out[0], -0.25, 1e-12) && close(out[1], 1.5, 1e-12));
        let out = cn_update(&[1.5, -0.25], true, 30.0);
        assert!(close(out[0], 0.25, 1e-12) && close(out[1], -1.5, 1e-12));
    }

    #[test]
    fn cn_update_degree_three() {
        let direct = |a: f64, b: f64| 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
        let out = cn_update(&[2.0, 2.0, 25.0], false, 30.0);
        assert!(close(out[0], direct(2.0, 25.0), 1e-9));
        assert!(close(out[0], 2.0 * (0.761594f64).atanh(), 1e-5));
        assert!(close(out[2], 1.32502, 5e-5));
        assert!(close(out[2], direct(2.0, 2.0), 1e-12));
    }

    #[test]
    fn cn_update_clamps_and_handles_zero_inputs() {
        let out = cn_update(&[100.0, 100.0], false, 30.0);
        assert!(out.iter().all(|&m| m <= 30.0 && m > 25.0));
        let out = cn_update(&[0.0, 3.0, 4.0], false, 30.0);
        assert_eq!(out[1], 0.0);
        assert!(out[0] > 0.0);
    }

    #[test]
    fn cn_syndrome_flip_negates_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let d = rng.gen_range(1..12);
            let msgs: Vec<f64> = (0..d).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let a = cn_update(&msgs, false, 30.0);
            let b = cn_update(&msgs, true, 30.0);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(*x, -*y);
            }
        }
    }

    #[test]
    fn vn_update_examples() {
        let prior = LlrVector::splat(1.0);
        let (out, post) = vn_update(&prior, &[], &[]).unwrap();
        assert!(out.is_empty());
        assert_eq!(post, prior);
        let (out, post) = vn_update(&prior, &[0.5], &[Pauli::Z]).unwrap();
        assert_eq!(post, LlrVector::new(1.5, 1.0, 1.5));
        assert_eq!(out[0], prior);
        assert!(vn_update(&prior, &[0.5], &[]).is_err());
    }

    #[test]
    fn vn_update_excludes_own_message() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let labels = [Pauli::X, Pauli::Y, Pauli::Z];
        for _ in 0..500 {
            let d = rng.gen_range(1..8);
            let msgs: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let lab: Vec<Pauli> = (0..d).map(|_| labels[rng.gen_range(0..3)]).collect();
            let prior = LlrVector::splat(rng.gen_range(0.0..5.0));
            let (out, post) = vn_update(&prior, &msgs, &lab).unwrap();
            for k in 0..d {
                // recompute from scratch without message k
                let mut want = prior;
                for j in (0..d).filter(|&j| j != k) {
                    for zeta in labels {
                        if zeta.anticommutes(lab[j]) {
                            match zeta {
                                Pauli::X => want.x += msgs[j],
                                Pauli::Z => want.z += msgs[j],
                                _ => want.y += msgs[j],
                            }
                        }
                    }
                }
                for zeta in labels {
                    assert!(close(out[k].get(zeta), want.get(zeta), 1e-12));
                    let diff = post.get(zeta) - out[k].get(zeta);
                    let expect = if zeta.anticommutes(lab[k]) { msgs[k] } else { 0.0 };
                    assert!(close(diff, expect, 1e-12));
                }
            }
        }
    }

    #[test]
    fn hard_decision_examples() {
        assert!(hard_decision(&[LlrVector::splat(1.0); 3]).is_zero());
        assert_eq!(hard_decision(&[LlrVector::new(-1.0, 3.0, 2.0)]).qubit(0), Pauli::X);
        assert_eq!(hard_decision(&[LlrVector::new(-1.0, -1.0, 5.0)]).qubit(0), Pauli::X);
        assert_eq!(hard_decision(&[LlrVector::new(5.0, -1.0, -1.0)]).qubit(0), Pauli::Y);
        assert_eq!(hard_decision(&[LlrVector::new(0.0, 1.0, 1.0)]).qubit(0), Pauli::X);
    }

    #[test]
    fn tanner_graph_structure() {
        // rows: XZ, ZX on two qubits plus a Y check on qubit 1
        let h = BinaryMatrix::from_dense(&[&[1, 0, 0, 1], &[0, 1, 1, 0], &[0, 1, 0, 1]]);
        let g = TannerGraph::new(&h).unwrap();
        assert_eq!((g.num_qubits(), g.num_checks(), g.num_edges()), (2, 3, 5));
        assert_eq!(g.label(0, 0), Pauli::X);
        assert_eq!(g.label(0, 1), Pauli::Z);
        assert_eq!(g.label(2, 1), Pauli::Y);
        assert_eq!(g.label(2, 0), Pauli::I);
        assert_eq!(g.var_neighbors(1), vec![0, 1, 2]);
        assert_eq!(g.check_neighbors(2).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn config_validation() {
        assert!(Bp4Config::new(0.75, 10).validate().is_err());
        assert!(Bp4Config::new(0.1, 0).validate().is_err());
        assert!(Bp4Config::new(0.1, 10).validate().is_ok());
        let cfg: Bp4Config = serde_json::from_str(r#"{"p0":0.3,"i_max":12}"#).unwrap();
        assert_eq!(cfg.clamp, DEFAULT_CLAMP);
        assert_eq!(cfg.schedule, Schedule::Flooding);
    }

    #[test]
    fn zero_syndrome_fast_path() {
        let code = build_toric(4).unwrap();
        let h = code.check_matrix();
        for p0 in [0.1, 0.3, 0.49] {
            let r = decode(h, &BinaryVector::zeros(h.rows()), &Bp4Config::new(p0, 25)).unwrap();
            assert!(r.converged && r.estimate.is_zero());
            assert_eq!(r.iterations_used, 1);
        }
        assert!(decode(h, &BinaryVector::zeros(3), &Bp4Config::new(0.1, 25)).is_err());
    }

    #[test]
    fn single_errors_on_toric_d4() {
        let code = build_toric(4).unwrap();
        let h = code.check_matrix();
        for schedule in [Schedule::Flooding, Schedule::Serial] {
            let cfg = Bp4Config {
                schedule,
                ..Bp4Config::new(0.1, 25)
            };
            let dec = Bp4Decoder::new(h, cfg).unwrap();
            for i in 0..code.n() {
                for q in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let mut e = SymplecticVector::zeros(code.n());
                    e.set_qubit(i, q);
                    let z = syndrome(h, &e).unwrap();
                    let r = dec.decode(&z).unwrap();
                    assert!(r.converged, "{schedule:?} qubit {i} {q:?}");
                    assert_eq!(syndrome(h, &r.estimate).unwrap(), z);
                    assert!(code.is_stabilizer(&r.estimate.xor(&e)));
                }
            }
        }
    }

    #[test]
    fn flooding_fast_path_matches_llr_reference() {
        let gb = crate::codes::CodeSpec::Gb {
            ell: 23,
            a: vec![0, 5, 8, 12],
            b: vec![0, 1, 5, 7],
            expect: None,
        }
        .build()
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for h in [
            build_toric(4).unwrap().check_matrix().clone(),
            gb.check_matrix().clone(),
        ] {
            for trial in 0..40 {
                let z = BinaryVector::from_bools((0..h.rows()).map(|_| rng.gen_bool(0.3)));
                let i_max = 1 + trial % 8;
                let cfg = Bp4Config::new(0.05 + 0.01 * (trial % 10) as f64, i_max);
                let dec = Bp4Decoder::new(&h, cfg).unwrap();
                let mut fast = dec.workspace();
                let r = dec.decode_with(&z, &mut fast).unwrap();
                // same number of LLR-domain iterations
                let mut slow = dec.workspace();
                for (j, zb) in slow.z.iter_mut().enumerate() {
                    *zb = z.get(j);
                }
                for _ in 0..r.iterations_used {
                    dec.check_pass(&mut slow, false);
                    dec.variable_pass(&mut slow);
                }
                dec.hard_decide(&mut slow);
                assert_eq!(slow.estimate, fast.estimate, "trial {trial}");
                // rounding grows through saturated messages over iterations
                let tol = if r.iterations_used == 1 { 1e-12 } else { 1e-6 };
                for (post, v) in slow.posterior.iter().zip(&fast.var_exp) {
                    for (l, e) in [(post.x, v[0]), (post.z, v[1]), (post.y, v[2])] {
                        // P(I)/(P(I)+P(ζ)) both ways
                        let reference = 1.0 / (1.0 + (-l).exp());
                        let got = v[3] / (v[3] + e);
                        assert!((reference - got).abs() < tol, "{reference} vs {got}");
                    }
                }
            }
        }
    }

    #[test]
    fn scaled_products_track_large_exponents() {
        let mut s = Scaled::ONE;
        for _ in 0..200 {
            s.mul(30f64.exp());
        }
        let log = s.mant.ln() + s.exp as f64 * 500.0 * std::f64::consts::LN_2;
        assert!((log - 6000.0).abs() < 1e-6);
        let v = normalize_beliefs([1.0, 1.0, 1.0], [s, Scaled::ONE, Scaled::ONE]);
        assert_eq!(v[1], 1.0);
        assert_eq!(v[0], 0.0);
        assert_eq!(inv_pow2_of(8.0), 0.125);
        assert_eq!(inv_pow2_of(0.3), 4.0);
    }

    #[test]
    fn decode_is_deterministic_and_converged_results_match() {
        let code = build_toric(5).unwrap();
        let h = code.check_matrix();
        let dec = Bp4Decoder::new(h, Bp4Config::new(0.05, 25)).unwrap();
        let mut ws = dec.workspace();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut converged = 0;
        for _ in 0..300 {
            let mut e = SymplecticVector::zeros(code.n());
            for i in 0..code.n() {
                if rng.gen_bool(0.06) {
                    e.set_qubit(i, [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]);
                }
            }
            let z = syndrome(h, &e).unwrap();
            let a = dec.decode_with(&z, &mut ws).unwrap();
            let b = dec.decode(&z).unwrap();
            assert_eq!(a, b);
            assert!(a.iterations_used <= 25);
            if a.converged {
                converged += 1;
                assert_eq!(syndrome(h, &a.estimate).unwrap(), z);
            }
            if z.is_zero() {
                assert!(a.estimate.is_zero());
            }
        }
        assert!(converged > 200, "only {converged} of 300 converged");
    }

    #[test]
    fn single_qubit_y_check() {
        // one qubit, Y-type check: an X error anticommutes with it
        let h = BinaryMatrix::from_dense(&[&[1, 1]]);
        let r = decode(&h, &BinaryVector::from_bools([true]), &Bp4Config::new(0.1, 5)).unwrap();
        assert!(r.converged);
        let q = r.estimate.qubit(0);
        assert!(q.anticommutes(Pauli::Y));
        assert_eq!(pauli_weight(&r.estimate), 1);
        let y = SymplecticVector::from_binary(h.row(0)).unwrap();
        assert!(symplectic_product(&r.estimate, &y).unwrap());
    }
}
