//! Dense state-vector simulator for the ideal protocol.
//!
//! A register is an ordered list of [`QubitId`]s kept sorted: emitted qubits in
//! emission order, then the parent. Amplitude index bits are big-endian in
//! register position (position 0 is the most significant bit), so a basis
//! label reads `|q0 q1 ... parent>`.
//!
//! Gate conventions: `CPHASE = diag(1,1,1,-1)`, standard `H`, `X`, `Z`, `SWAP`.

use std::fmt;

use crate::error::{Error, Result};
use crate::graphs::{FrameTag, Graph, PauliFrame, Schedule, StreamOp};
use crate::linalg::{inner, norm_sqr};
use crate::scalar::{cr, frac_1_sqrt_2, Real, C};

/// Qubits with probability below this are treated as impossible branches.
pub const ZERO_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QubitId {
    Emitted(usize),
    Parent,
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitId::Emitted(i) => write!(f, "{i}"),
            QubitId::Parent => f.write_str("p"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H,
    X,
    Z,
    CPhase,
    Swap,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::H | Gate::X | Gate::Z => 1,
            Gate::CPhase | Gate::Swap => 2,
        }
    }
}

impl From<FrameTag> for Option<Gate> {
    fn from(tag: FrameTag) -> Self {
        match tag {
            FrameTag::I => None,
            FrameTag::X => Some(Gate::X),
            FrameTag::Z => Some(Gate::Z),
            FrameTag::H => Some(Gate::H),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    qubits: Vec<QubitId>,
    amps: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// Builds a state; `qubits` must be sorted and distinct, `amps` of length
    /// `2^qubits.len()`. No normalization is imposed.
    pub fn from_amplitudes(qubits: Vec<QubitId>, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != 1usize << qubits.len() {
            return Err(Error::invalid(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                qubits.len()
            )));
        }
        if qubits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("register labels must be sorted and distinct"));
        }
        Ok(Self { qubits, amps })
    }

    /// Emitted qubits `0..n` as consecutive register positions.
    pub fn with_emitted(n: usize, amps: Vec<C<T>>) -> Result<Self> {
        Self::from_amplitudes((0..n).map(QubitId::Emitted).collect(), amps)
    }

    /// Single-qubit state `a|0> + b|1>` labelled as the parent.
    pub fn parent(a: C<T>, b: C<T>) -> Self {
        Self {
            qubits: vec![QubitId::Parent],
            amps: vec![a, b],
        }
    }

    pub fn parent_plus() -> Self {
        let h = cr(frac_1_sqrt_2::<T>());
        Self::parent(h, h)
    }

    /// `|0...0>` on emitted qubits `0..n`.
    pub fn zeros(n: usize) -> Self {
        let mut amps = vec![cr(T::zero()); 1 << n];
        amps[0] = cr(T::one());
        Self {
            qubits: (0..n).map(QubitId::Emitted).collect(),
            amps,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amps)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > T::lit(ZERO_PROBABILITY)) {
            return Err(Error::ZeroProbability {
                probability: n2.to_f64_lossy(),
            });
        }
        let s = T::one() / n2.sqrt();
        Ok(Self {
            qubits: self.qubits.clone(),
            amps: self.amps.iter().map(|a| a.scale(s)).collect(),
        })
    }

    /// Same amplitudes under new labels.
    pub fn relabeled(&self, qubits: Vec<QubitId>) -> Result<Self> {
        Self::from_amplitudes(qubits, self.amps.clone())
    }

    pub fn position(&self, q: QubitId) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&x| x == q)
            .ok_or_else(|| Error::invalid(format!("qubit {q} not in register")))
    }

    fn mask(&self, pos: usize) -> usize {
        1 << (self.qubits.len() - 1 - pos)
    }

    fn next_emitted(&self) -> usize {
        self.qubits
            .iter()
            .filter_map(|q| match q {
                QubitId::Emitted(i) => Some(i + 1),
                QubitId::Parent => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn apply_gate(&self, gate: Gate, targets: &[QubitId]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, targets)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: Gate, targets: &[QubitId]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::invalid(format!(
                "{gate:?} takes {} target(s), got {}",
                gate.arity(),
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::invalid("two-qubit gate targets must be distinct"));
        }
        let masks = targets
            .iter()
            .map(|&q| self.position(q).map(|p| self.mask(p)))
            .collect::<Result<Vec<_>>>()?;
        let dim = self.amps.len();
        match gate {
            Gate::X => {
                let m = masks[0];
                for i in (0..dim).filter(|i| i & m == 0) {
                    self.amps.swap(i, i | m);
                }
            }
            Gate::Z => {
                let m = masks[0];
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::H => {
                let m = masks[0];
                let s = frac_1_sqrt_2::<T>();
                for i in (0..dim).filter(|i| i & m == 0) {
                    let a0 = self.amps[i];
                    let a1 = self.amps[i | m];
                    self.amps[i] = (a0 + a1).scale(s);
                    self.amps[i | m] = (a0 - a1).scale(s);
                }
            }
            Gate::CPhase => {
                let m = masks[0] | masks[1];
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            Gate::Swap => {
                let (ma, mb) = (masks[0], masks[1]);
                for i in (0..dim).filter(|i| i & ma != 0 && i & mb == 0) {
                    self.amps.swap(i, (i & !ma) | mb);
                }
            }
        }
        Ok(())
    }

    /// Inserts qubit `id` in `|+>` at its sorted register position.
    fn insert_plus(&self, id: QubitId) -> Result<Self> {
        if self.qubits.contains(&id) {
            return Err(Error::invalid(format!("qubit {id} already in register")));
        }
        let n = self.qubits.len();
        let pos = self.qubits.partition_point(|&q| q < id);
        let low_bits = n - pos;
        let low_mask = (1usize << low_bits) - 1;
        let s = frac_1_sqrt_2::<T>();
        let mut amps = vec![cr(T::zero()); 1 << (n + 1)];
        for (x, a) in self.amps.iter().enumerate() {
            let hi = x >> low_bits;
            let lo = x & low_mask;
            for b in 0..2usize {
                amps[(hi << (low_bits + 1)) | (b << low_bits) | lo] = a.scale(s);
            }
        }
        let mut qubits = self.qubits.clone();
        qubits.insert(pos, id);
        Ok(Self { qubits, amps })
    }

    /// Projects `q` onto `outcome`, removes it, renormalizes; returns the
    /// outcome probability.
    pub fn measure_z(&self, q: QubitId, outcome: u8) -> Result<(Self, T)> {
        let (post, p) = self.project_out(q, outcome)?;
        if !(p > T::lit(ZERO_PROBABILITY)) {
            return Err(Error::ZeroProbability {
                probability: p.to_f64_lossy(),
            });
        }
        let s = T::one() / p.sqrt();
        let amps = post.amps.iter().map(|a| a.scale(s)).collect();
        Ok((
            Self {
                qubits: post.qubits,
                amps,
            },
            p,
        ))
    }

    /// Unnormalized projection `<outcome|_q |self>` and its squared norm.
    pub fn project_out(&self, q: QubitId, outcome: u8) -> Result<(Self, T)> {
        if outcome > 1 {
            return Err(Error::invalid(format!("measurement outcome must be 0 or 1, got {outcome}")));
        }
        let pos = self.position(q)?;
        let n = self.qubits.len();
        let low_bits = n - 1 - pos;
        let low_mask = (1usize << low_bits) - 1;
        let b = usize::from(outcome);
        let amps: Vec<C<T>> = (0..1usize << (n - 1))
            .map(|y| {
                let hi = y >> low_bits;
                let lo = y & low_mask;
                self.amps[(hi << (low_bits + 1)) | (b << low_bits) | lo]
            })
            .collect();
        let mut qubits = self.qubits.clone();
        qubits.remove(pos);
        let p = norm_sqr(&amps);
        Ok((Self { qubits, amps }, p))
    }

    /// Applies frame corrections for the given parent outcome.
    pub fn apply_frame(&self, frame: &PauliFrame, parent_outcome: Option<u8>) -> Result<Self> {
        let mut out = self.clone();
        for (q, tags) in frame.corrections_for(parent_outcome) {
            for tag in tags {
                if let Some(g) = Option::<Gate>::from(tag) {
                    out.apply_gate_mut(g, &[q])?;
                }
            }
        }
        Ok(out)
    }
}

/// `H^n |0..0>` followed by CPHASE on every edge.
pub fn canonical_graph_state<T: Real>(g: &Graph) -> StateVector<T> {
    let n = g.vertex_count();
    let mut s = StateVector::zeros(n);
    for v in 0..n {
        s.apply_gate_mut(Gate::H, &[QubitId::Emitted(v)])
            .expect("vertex in register");
    }
    for (a, b) in g.edges() {
        s.apply_gate_mut(Gate::CPhase, &[QubitId::Emitted(a), QubitId::Emitted(b)])
            .expect("edge endpoints in register");
    }
    s
}

/// `|0>_p -> |0>_p|+>_i`, `|1>_p -> |1>_p|->_i`: append `|+>` then CPHASE.
pub fn branch<T: Real>(s: &StateVector<T>, parent: QubitId) -> Result<StateVector<T>> {
    s.position(parent)?;
    let new = QubitId::Emitted(s.next_emitted());
    let mut out = s.insert_plus(new)?;
    out.apply_gate_mut(Gate::CPhase, &[parent, new])?;
    Ok(out)
}

/// `|0>_p -> |0>_i|+>_p`, `|1>_p -> |1>_i|->_p`: branch followed by SWAP.
pub fn pull_out<T: Real>(s: &StateVector<T>, parent: QubitId) -> Result<StateVector<T>> {
    let new = QubitId::Emitted(s.next_emitted());
    let mut out = branch(s, parent)?;
    out.apply_gate_mut(Gate::Swap, &[parent, new])?;
    Ok(out)
}

/// Pull-out realized with local Hadamards on parent and new qubit instead of SWAP.
pub fn pull_out_via_hadamards<T: Real>(s: &StateVector<T>, parent: QubitId) -> Result<StateVector<T>> {
    let new = QubitId::Emitted(s.next_emitted());
    let mut out = branch(s, parent)?;
    out.apply_gate_mut(Gate::H, &[parent])?;
    out.apply_gate_mut(Gate::H, &[new])?;
    Ok(out)
}

/// `|<a|b>|^2`.
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    if a.qubit_count() != b.qubit_count() {
        return Err(Error::invalid(format!(
            "fidelity between {}- and {}-qubit states",
            a.qubit_count(),
            b.qubit_count()
        )));
    }
    Ok(inner(&a.amps, &b.amps).norm_sqr())
}

/// Parent measurement taken during an ideal run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParentMeasurement<T> {
    pub outcome: u8,
    pub probability: T,
}

/// Runs a schedule ideally, selecting parent outcome 0 if it is measured.
pub fn run_schedule_ideal<T: Real>(
    schedule: &Schedule,
    parent_init: &StateVector<T>,
) -> Result<(StateVector<T>, Option<ParentMeasurement<T>>)> {
    run_schedule_ideal_with(schedule, parent_init, 0)
}

/// Runs a schedule ideally with an explicit parent-measurement outcome.
pub fn run_schedule_ideal_with<T: Real>(
    schedule: &Schedule,
    parent_init: &StateVector<T>,
    parent_outcome: u8,
) -> Result<(StateVector<T>, Option<ParentMeasurement<T>>)> {
    if parent_init.qubit_count() != 1 {
        return Err(Error::invalid("parent initial state must be a single qubit"));
    }
    let mut state = parent_init.relabeled(vec![QubitId::Parent])?;
    let mut record = None;
    for &op in schedule.ops() {
        state = match op {
            StreamOp::Load | StreamOp::Branch => branch(&state, QubitId::Parent)?,
            StreamOp::PullOut => pull_out(&state, QubitId::Parent)?,
            StreamOp::MeasureParent => {
                let (post, p) = state.measure_z(QubitId::Parent, parent_outcome)?;
                record = Some(ParentMeasurement {
                    outcome: parent_outcome,
                    probability: p,
                });
                post
            }
        };
    }
    Ok((state, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{compile_schedule, graph_of_schedule, StarChain};
    use crate::scalar::c;

    fn e(i: usize) -> QubitId {
        QubitId::Emitted(i)
    }

    fn approx(a: C<f64>, b: C<f64>) -> bool {
        (a - b).norm() < 1e-12
    }

    fn pseudo_random_state(n: usize, seed: u64) -> StateVector<f64> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps: Vec<C<f64>> = (0..1usize << n).map(|_| c(next(), next())).collect();
        StateVector::with_emitted(n, amps).unwrap().normalized().unwrap()
    }

    #[test]
    fn single_vertex_graph_state_is_plus() {
        let s = canonical_graph_state::<f64>(&Graph::new(1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(approx(s.amplitudes()[0], cr(h)) && approx(s.amplitudes()[1], cr(h)));
    }

    #[test]
    fn two_vertex_graph_state() {
        let s = canonical_graph_state::<f64>(&Graph::from_edges(2, &[(0, 1)]).unwrap());
        // (|0+> + |1->)/sqrt2 = (|00> + |01> + |10> - |11>)/2
        let want = [0.5, 0.5, 0.5, -0.5];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!(approx(*a, cr(w)));
        }
    }

    #[test]
    fn three_path_is_locally_ghz() {
        let s = canonical_graph_state::<f64>(&Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        let s = s.apply_gate(Gate::H, &[e(0)]).unwrap().apply_gate(Gate::H, &[e(2)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = vec![cr(0.0); 8];
        ghz[0] = cr(h);
        ghz[7] = cr(h);
        let ghz = StateVector::with_emitted(3, ghz).unwrap();
        assert!((fidelity(&s, &ghz).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cphase_flips_only_one_one() {
        let mut amps = vec![cr(0.0); 4];
        amps[3] = cr(1.0);
        let s = StateVector::with_emitted(2, amps).unwrap();
        let t = s.apply_gate(Gate::CPhase, &[e(0), e(1)]).unwrap();
        assert!(approx(t.amplitudes()[3], cr(-1.0)));
    }

    #[test]
    fn involutions() {
        let s = pseudo_random_state(3, 7);
        let t = s
            .apply_gate(Gate::CPhase, &[e(0), e(2)])
            .unwrap()
            .apply_gate(Gate::CPhase, &[e(0), e(2)])
            .unwrap();
        assert!((fidelity(&s, &t).unwrap() - 1.0).abs() < 1e-12);
        let t = s.apply_gate(Gate::H, &[e(1)]).unwrap().apply_gate(Gate::H, &[e(1)]).unwrap();
        assert!((fidelity(&s, &t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_exchanges_positions() {
        // |01> on (0,1) becomes |10>
        let mut amps = vec![cr(0.0); 4];
        amps[1] = cr(1.0);
        let s = StateVector::with_emitted(2, amps).unwrap();
        let t = s.apply_gate(Gate::Swap, &[e(1), e(0)]).unwrap();
        assert!(approx(t.amplitudes()[2], cr(1.0)));
    }

    #[test]
    fn gate_arity_and_range_errors() {
        let s = StateVector::<f64>::zeros(2);
        assert!(s.apply_gate(Gate::H, &[e(0), e(1)]).is_err());
        assert!(s.apply_gate(Gate::CPhase, &[e(0), e(0)]).is_err());
        assert!(s.apply_gate(Gate::X, &[e(5)]).is_err());
        assert!(s.apply_gate(Gate::X, &[QubitId::Parent]).is_err());
    }

    #[test]
    fn branch_maps_basis_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // register after branch is (new, parent)
        let zero = StateVector::parent(cr(1.0), cr(0.0));
        let b = branch(&zero, QubitId::Parent).unwrap();
        assert_eq!(b.qubits(), &[e(0), QubitId::Parent]);
        // |+>_new |0>_p
        let want = [h, 0.0, h, 0.0];
        for (a, w) in b.amplitudes().iter().zip(want) {
            assert!(approx(*a, cr(w)));
        }
        let one = StateVector::parent(cr(0.0), cr(1.0));
        let b = branch(&one, QubitId::Parent).unwrap();
        // |->_new |1>_p
        let want = [0.0, h, 0.0, -h];
        for (a, w) in b.amplitudes().iter().zip(want) {
            assert!(approx(*a, cr(w)));
        }
        let plus = StateVector::parent_plus();
        let b = branch(&plus, QubitId::Parent).unwrap();
        let g2 = canonical_graph_state::<f64>(&Graph::from_edges(2, &[(0, 1)]).unwrap());
        assert!((fidelity(&b, &g2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pull_out_maps_basis_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero = StateVector::parent(cr(1.0), cr(0.0));
        let p = pull_out(&zero, QubitId::Parent).unwrap();
        // |0>_new |+>_p
        let want = [h, h, 0.0, 0.0];
        for (a, w) in p.amplitudes().iter().zip(want) {
            assert!(approx(*a, cr(w)));
        }
        let one = StateVector::parent(cr(0.0), cr(1.0));
        let p = pull_out(&one, QubitId::Parent).unwrap();
        // |1>_new |->_p
        let want = [0.0, 0.0, h, -h];
        for (a, w) in p.amplitudes().iter().zip(want) {
            assert!(approx(*a, cr(w)));
        }
    }

    #[test]
    fn measuring_plus() {
        let s = StateVector::<f64>::parent_plus();
        let (post, p) = s.measure_z(QubitId::Parent, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(post.qubit_count(), 0);
        assert!(approx(post.amplitudes()[0], cr(1.0)));
    }

    #[test]
    fn measuring_parent_of_two_qubit_graph_state() {
        let s = run_schedule_ideal(
            &compile_schedule(&StarChain::new(vec![0]).unwrap(), true).0,
            &StateVector::<f64>::parent_plus(),
        )
        .unwrap()
        .0;
        let (post, p) = s.measure_z(QubitId::Parent, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let plus = canonical_graph_state(&Graph::new(1));
        assert!((fidelity(&post, &plus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_branch_is_an_error() {
        let s = StateVector::<f64>::zeros(1);
        assert!(matches!(s.measure_z(e(0), 1), Err(Error::ZeroProbability { .. })));
        assert!(s.measure_z(e(0), 2).is_err());
    }

    #[test]
    fn fidelity_reference_values() {
        let zero = StateVector::<f64>::zeros(1);
        let one = zero.apply_gate(Gate::X, &[e(0)]).unwrap();
        let plus = zero.apply_gate(Gate::H, &[e(0)]).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-15);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!(fidelity(&zero, &StateVector::zeros(2)).is_err());
    }

    #[test]
    fn ideal_runs_match_canonical_states() {
        use StreamOp::*;
        let plus = StateVector::<f64>::parent_plus();
        for ops in [
            vec![Load],
            vec![Load, Branch, Branch],
            vec![Load, PullOut],
            vec![Load, PullOut, PullOut, MeasureParent],
        ] {
            let sched = Schedule::from_ops(ops).unwrap();
            let (out, rec) = run_schedule_ideal(&sched, &plus).unwrap();
            let frame = crate::graphs::ideal_frame(&sched);
            let corrected = out.apply_frame(&frame, rec.map(|r| r.outcome)).unwrap();
            let want = canonical_graph_state(&graph_of_schedule(&sched));
            assert!((fidelity(&corrected, &want).unwrap() - 1.0).abs() < 1e-12, "{sched:?}");
        }
    }

    #[test]
    fn generic_over_f32() {
        let s = StateVector::<f32>::parent_plus();
        let b = pull_out(&branch(&s, QubitId::Parent).unwrap(), QubitId::Parent).unwrap();
        assert!((b.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
