//! Target graphs, chain-of-stars parameterization and the stream-operation
//! compiler.
//!
//! A stream is produced by one stationary parent qubit. `Load` emits the first
//! mobile qubit already entangled with the parent, `Branch` hangs a fresh
//! mobile qubit off the parent, and `PullOut` lets a fresh mobile qubit take
//! over the parent's place (and all of its edges) while the parent moves on as
//! a new vertex attached only to it. `MeasureParent` removes the parent with a
//! computational-basis measurement.
//!
//! Emitted qubits are numbered in emission order. In every graph returned from
//! a schedule the parent, when present, is the last vertex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::qsim::QubitId;

/// Simple undirected graph on `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(vertex_count);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as ordered pairs `(min, max)`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::invalid(format!("self-loop on vertex {a}")));
        }
        if a >= self.vertex_count || b >= self.vertex_count {
            return Err(Error::invalid(format!(
                "edge ({a},{b}) out of range for {} vertices",
                self.vertex_count
            )));
        }
        if !self.edges.insert((a.min(b), a.max(b))) {
            return Err(Error::invalid(format!("duplicate edge ({a},{b})")));
        }
        Ok(())
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (a == v, b == v) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    /// Graph with vertex `v` renamed to `mapping[v]`; `mapping` must be a permutation.
    pub fn relabeled(&self, mapping: &[usize]) -> Result<Graph> {
        if mapping.len() != self.vertex_count {
            return Err(Error::invalid("relabeling has wrong length"));
        }
        let mut seen = vec![false; self.vertex_count];
        for &m in mapping {
            if m >= self.vertex_count || std::mem::replace(&mut seen[m], true) {
                return Err(Error::invalid("relabeling is not a permutation"));
            }
        }
        let mut g = Graph::new(self.vertex_count);
        for (a, b) in self.edges() {
            g.add_edge(mapping[a], mapping[b])?;
        }
        Ok(g)
    }

    /// Deletes vertex `v` and its edges; higher vertices shift down by one.
    pub fn without_vertex(&self, v: usize) -> Graph {
        let shift = |x: usize| if x > v { x - 1 } else { x };
        let mut g = Graph::new(self.vertex_count.saturating_sub(1));
        for (a, b) in self.edges() {
            if a != v && b != v {
                g.edges.insert((shift(a), shift(b)));
            }
        }
        g
    }
}

/// Spine of star centers; entry `i` is the number of leaves on spine vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarChain {
    branch_counts: Vec<usize>,
}

impl StarChain {
    pub fn new(branch_counts: Vec<usize>) -> Result<Self> {
        if branch_counts.is_empty() {
            return Err(Error::invalid("star chain must have at least one spine vertex"));
        }
        Ok(Self { branch_counts })
    }

    pub fn branch_counts(&self) -> &[usize] {
        &self.branch_counts
    }

    pub fn spine_len(&self) -> usize {
        self.branch_counts.len()
    }

    /// Vertex count of [`star_chain_to_graph`].
    pub fn total_size(&self) -> usize {
        self.branch_counts.len() + self.branch_counts.iter().sum::<usize>()
    }

    /// The chain a compiled schedule actually realizes: the loaded seed qubit is
    /// an extra leafless spine vertex in front of `self`.
    pub fn seeded(&self) -> StarChain {
        let mut counts = Vec::with_capacity(self.branch_counts.len() + 1);
        counts.push(0);
        counts.extend_from_slice(&self.branch_counts);
        StarChain {
            branch_counts: counts,
        }
    }

    /// Every chain with `total_size() <= max_size`, in lexicographic order.
    pub fn enumerate(max_size: usize) -> Vec<StarChain> {
        fn rec(prefix: &mut Vec<usize>, budget: usize, out: &mut Vec<StarChain>) {
            if !prefix.is_empty() {
                out.push(StarChain {
                    branch_counts: prefix.clone(),
                });
            }
            if budget == 0 {
                return;
            }
            for leaves in 0..budget {
                prefix.push(leaves);
                rec(prefix, budget - 1 - leaves, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), max_size, &mut out);
        out
    }
}

impl FromStr for StarChain {
    type Err = Error;

    /// Parses `2,0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad branch count {t:?} in star chain {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        StarChain::new(counts)
    }
}

impl fmt::Display for StarChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.branch_counts.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Spine vertices `0..k` form a path; leaves of spine vertex `i` follow in
/// spine-major order.
pub fn star_chain_to_graph(chain: &StarChain) -> Graph {
    let k = chain.spine_len();
    let mut g = Graph::new(chain.total_size());
    for i in 1..k {
        g.edges.insert((i - 1, i));
    }
    let mut next = k;
    for (spine, &leaves) in chain.branch_counts.iter().enumerate() {
        for _ in 0..leaves {
            g.edges.insert((spine, next));
            next += 1;
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamOp {
    Load,
    Branch,
    PullOut,
    MeasureParent,
}

impl StreamOp {
    /// Whether the op emits a mobile qubit.
    pub fn emits(self) -> bool {
        !matches!(self, StreamOp::MeasureParent)
    }

    pub fn name(self) -> &'static str {
        match self {
            StreamOp::Load => "Load",
            StreamOp::Branch => "Branch",
            StreamOp::PullOut => "PullOut",
            StreamOp::MeasureParent => "MeasureParent",
        }
    }
}

/// Validated op sequence: one leading `Load`, optional trailing `MeasureParent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    ops: Vec<StreamOp>,
}

impl Schedule {
    pub fn from_ops(ops: Vec<StreamOp>) -> Result<Self> {
        match ops.first() {
            Some(StreamOp::Load) => {}
            _ => return Err(Error::invalid("schedule must start with Load")),
        }
        if ops.iter().filter(|&&op| op == StreamOp::Load).count() != 1 {
            return Err(Error::invalid("schedule must contain exactly one Load"));
        }
        if let Some(pos) = ops.iter().position(|&op| op == StreamOp::MeasureParent) {
            if pos != ops.len() - 1 {
                return Err(Error::invalid("MeasureParent must be the last op"));
            }
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[StreamOp] {
        &self.ops
    }

    /// Ops that emit a mobile qubit, i.e. everything but `MeasureParent`.
    pub fn emitting_ops(&self) -> impl Iterator<Item = StreamOp> + '_ {
        self.ops.iter().copied().filter(|op| op.emits())
    }

    pub fn emitted_qubit_count(&self) -> usize {
        self.emitting_ops().count()
    }

    pub fn measures_parent(&self) -> bool {
        self.ops.last() == Some(&StreamOp::MeasureParent)
    }

    fn without_measurement(&self) -> Schedule {
        Schedule {
            ops: self.emitting_ops().collect(),
        }
    }
}

/// Single-qubit correction tags, applied in list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameTag {
    I,
    X,
    Z,
    H,
}

pub type Corrections = BTreeMap<QubitId, Vec<FrameTag>>;

/// Deferred single-qubit corrections for a schedule's raw output.
///
/// `unconditional` is applied first. If the parent is measured, the entry of
/// `on_parent_outcome` indexed by the observed outcome is applied afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PauliFrame {
    pub unconditional: Corrections,
    pub on_parent_outcome: [Corrections; 2],
}

impl PauliFrame {
    /// Corrections to apply for the observed parent outcome (`None` if the
    /// parent was not measured), in application order.
    pub fn corrections_for(&self, outcome: Option<u8>) -> Vec<(QubitId, Vec<FrameTag>)> {
        let mut out: Vec<(QubitId, Vec<FrameTag>)> = self
            .unconditional
            .iter()
            .filter(|(q, _)| outcome.is_none() || **q != QubitId::Parent)
            .map(|(q, t)| (*q, t.clone()))
            .collect();
        if let Some(m) = outcome {
            out.extend(
                self.on_parent_outcome[usize::from(m & 1)]
                    .iter()
                    .map(|(q, t)| (*q, t.clone())),
            );
        }
        out.retain(|(_, tags)| tags.iter().any(|t| *t != FrameTag::I));
        out
    }
}

/// Tracks Pauli byproducts (up to phase) of a physical gate realization so
/// they can be deferred to the end of the stream.
///
/// The raw state is `C |ideal>` with `C` a product of `Z^z X^x` per qubit and
/// optional non-Pauli tags on qubits that never interact again.
#[derive(Debug, Clone, Default)]
pub struct FrameTracker {
    paulis: BTreeMap<QubitId, (bool, bool)>,
    fixed: BTreeMap<QubitId, Vec<FrameTag>>,
}

impl FrameTracker {
    pub fn new() -> Self {
        Self::default()
    }

    fn bits(&mut self, q: QubitId) -> &mut (bool, bool) {
        self.paulis.entry(q).or_insert((false, false))
    }

    /// Records a Pauli byproduct `Z^z X^x` picked up by `q`.
    pub fn byproduct(&mut self, q: QubitId, x: bool, z: bool) {
        let b = self.bits(q);
        b.0 ^= x;
        b.1 ^= z;
    }

    /// Records a byproduct that is undone by the given tags on a qubit that
    /// sees no further entangling gates.
    pub fn fixed_correction(&mut self, q: QubitId, tags: Vec<FrameTag>) {
        self.fixed.entry(q).or_default().extend(tags);
    }

    /// Conjugates the frame through an ideal CPHASE.
    pub fn cphase(&mut self, a: QubitId, b: QubitId) {
        let (xa, _) = *self.bits(a);
        let (xb, _) = *self.bits(b);
        self.bits(b).1 ^= xa;
        self.bits(a).1 ^= xb;
    }

    /// Conjugates the frame through an ideal SWAP.
    pub fn swap(&mut self, a: QubitId, b: QubitId) {
        let pa = *self.bits(a);
        let pb = *self.bits(b);
        *self.bits(a) = pb;
        *self.bits(b) = pa;
    }

    /// Whether the parent currently carries an X byproduct (flips its
    /// measured outcome).
    pub fn parent_flipped(&self) -> bool {
        self.paulis.get(&QubitId::Parent).is_some_and(|b| b.0)
    }

    /// Finalizes the frame for the unmeasured graph (parent as last vertex).
    pub fn finish(self, graph_with_parent: &Graph) -> PauliFrame {
        let mut frame = PauliFrame::default();
        for (q, tags) in &self.fixed {
            frame.unconditional.insert(*q, tags.clone());
        }
        for (q, &(x, z)) in &self.paulis {
            let entry = frame.unconditional.entry(*q).or_default();
            if z {
                entry.push(FrameTag::Z);
            }
            if x {
                entry.push(FrameTag::X);
            }
        }
        frame.unconditional.retain(|_, t| !t.is_empty());
        let flipped = self.parent_flipped();
        let parent_index = graph_with_parent.vertex_count() - 1;
        for observed in 0..2u8 {
            let logical = (observed == 1) ^ flipped;
            if logical {
                frame.on_parent_outcome[observed as usize] = graph_with_parent
                    .neighbors(parent_index)
                    .into_iter()
                    .map(|v| (QubitId::Emitted(v), vec![FrameTag::Z]))
                    .collect();
            }
        }
        frame
    }
}

fn stream_graph(ops: impl Iterator<Item = StreamOp>) -> (Graph, bool) {
    // adjacency over emitted indices; parent tracked separately
    let mut emitted = 0usize;
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut parent_nbrs: BTreeSet<usize> = BTreeSet::new();
    let mut measured = false;
    for op in ops {
        match op {
            StreamOp::Load => {
                parent_nbrs.insert(emitted);
                emitted += 1;
            }
            StreamOp::Branch => {
                parent_nbrs.insert(emitted);
                emitted += 1;
            }
            StreamOp::PullOut => {
                let new = emitted;
                emitted += 1;
                for u in std::mem::take(&mut parent_nbrs) {
                    edges.insert((u.min(new), u.max(new)));
                }
                parent_nbrs.insert(new);
            }
            StreamOp::MeasureParent => measured = true,
        }
    }
    let n = emitted + usize::from(!measured);
    let mut g = Graph::new(n);
    g.edges = edges;
    if !measured {
        for u in parent_nbrs {
            g.edges.insert((u, emitted));
        }
    }
    (g, measured)
}

/// Graph generated by the schedule over emitted qubits in emission order, plus
/// the parent as the last vertex unless it is measured out.
pub fn graph_of_schedule(schedule: &Schedule) -> Graph {
    stream_graph(schedule.ops().iter().copied()).0
}

/// Like [`graph_of_schedule`] but always keeps the parent (state just before
/// any `MeasureParent`).
pub fn graph_before_measurement(schedule: &Schedule) -> Graph {
    stream_graph(schedule.without_measurement().ops.into_iter()).0
}

/// Frame for ideal execution (`qsim::run_schedule_ideal`): ideal branch and
/// pull-out produce canonical graph states exactly, so only the parent
/// measurement needs outcome-dependent Z corrections on its neighbors.
pub fn ideal_frame(schedule: &Schedule) -> PauliFrame {
    FrameTracker::new().finish(&graph_before_measurement(schedule))
}

/// Compiles a star chain into stream operations.
///
/// The loaded seed qubit becomes a leafless spine vertex in front of the
/// chain, so the realized graph is `star_chain_to_graph(&chain.seeded())`.
/// With `keep_parent` the parent stays in the register as the last spine
/// vertex; otherwise every spine vertex is pulled out and the parent is
/// measured away at the end.
pub fn compile_schedule(chain: &StarChain, keep_parent: bool) -> (Schedule, PauliFrame) {
    let counts = chain.branch_counts();
    let mut ops = vec![StreamOp::Load];
    for (i, &leaves) in counts.iter().enumerate() {
        ops.extend(std::iter::repeat_n(StreamOp::Branch, leaves));
        if i + 1 < counts.len() || !keep_parent {
            ops.push(StreamOp::PullOut);
        }
    }
    if !keep_parent {
        ops.push(StreamOp::MeasureParent);
    }
    let schedule = Schedule::from_ops(ops).expect("compiler emits valid schedules");
    let frame = ideal_frame(&schedule);
    (schedule, frame)
}

/// Maps each vertex of `graph_of_schedule(compile_schedule(chain, keep_parent))`
/// to its vertex in `star_chain_to_graph(&chain.seeded())`.
pub fn emission_labeling(chain: &StarChain, keep_parent: bool) -> Vec<usize> {
    let seeded = chain.seeded();
    let counts = seeded.branch_counts();
    let k = counts.len();
    // spine-major leaf numbering of the seeded chain
    let mut leaf_start = vec![0usize; k];
    let mut next = k;
    for (i, &c) in counts.iter().enumerate() {
        leaf_start[i] = next;
        next += c;
    }
    let mut labels = vec![0usize];
    for spine in 1..k {
        for leaf in 0..counts[spine] {
            labels.push(leaf_start[spine] + leaf);
        }
        if spine + 1 < k || !keep_parent {
            labels.push(spine);
        }
    }
    if keep_parent {
        labels.push(k - 1);
    }
    labels
}
