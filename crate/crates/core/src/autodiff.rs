//! A small reverse-mode automatic differentiation tape over `f64` vectors.
//!
//! Every node holds a dense vector; scalars are vectors of length one.
//! Weight matrices enter the tape once as [`Op::Param`] leaves and their
//! gradients are scattered back into a [`ParamGrads`] by [`Tape::backward`].

use crate::params::{ParamGrads, ParamId, ParamStore};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(ParamId),
    MatVec { w: Var, x: Var },
    Row { w: Var, index: usize },
    Concat(Vec<Var>),
    Sum(Vec<Var>),
    Scale { x: Var, s: Var },
    ScaleConst { x: Var, c: f64 },
    Relu(Var),
    Stack(Vec<Var>),
    Softmax(Var),
    Pick { x: Var, index: usize },
    Bce { probs: Var, target: usize },
    CrossEntropy { logits: Var, target: usize },
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    /// Matrix shape for parameter leaves; `(len, 1)` otherwise.
    rows: usize,
    cols: usize,
    op: Op,
}

const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    param_vars: Vec<Option<Var>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        let rows = value.len();
        self.nodes.push(Node { value, rows, cols: 1, op });
        Var(self.nodes.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let val = &self.nodes[v.0].value;
        debug_assert_eq!(val.len(), 1);
        val[0]
    }

    pub fn dim(&self, v: Var) -> usize {
        self.nodes[v.0].value.len()
    }

    /// Constant leaf that receives no gradient.
    pub fn input(&mut self, value: Vec<f64>) -> Var {
        self.push(value, Op::Input)
    }

    /// Leaf for a parameter matrix; repeated calls return the same node.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if self.param_vars.len() <= id.0 {
            self.param_vars.resize(id.0 + 1, None);
        }
        if let Some(v) = self.param_vars[id.0] {
            return v;
        }
        let p = store.get(id);
        self.nodes.push(Node { value: p.data.clone(), rows: p.rows, cols: p.cols, op: Op::Param(id) });
        let v = Var(self.nodes.len() - 1);
        self.param_vars[id.0] = Some(v);
        v
    }

    /// `W x` for a parameter leaf `w` of shape `rows x cols`.
    pub fn matvec(&mut self, w: Var, x: Var) -> Var {
        let wn = &self.nodes[w.0];
        let xv = &self.nodes[x.0].value;
        assert_eq!(wn.cols, xv.len(), "matvec shape mismatch");
        let out: Vec<f64> = wn
            .value
            .chunks_exact(wn.cols)
            .map(|row| dot(row, xv))
            .collect();
        self.push(out, Op::MatVec { w, x })
    }

    /// Row `index` of a matrix leaf, as a vector.
    pub fn row(&mut self, w: Var, index: usize) -> Var {
        let wn = &self.nodes[w.0];
        assert!(index < wn.rows, "row out of range");
        let out = wn.value[index * wn.cols..(index + 1) * wn.cols].to_vec();
        self.push(out, Op::Row { w, index })
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut out = Vec::with_capacity(parts.iter().map(|&p| self.dim(p)).sum());
        for &p in parts {
            out.extend_from_slice(&self.nodes[p.0].value);
        }
        self.push(out, Op::Concat(parts.to_vec()))
    }

    /// Elementwise sum of equally sized vectors, reduced in the given order.
    pub fn sum(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "sum of nothing");
        let mut out = self.nodes[parts[0].0].value.clone();
        for &p in &parts[1..] {
            let v = &self.nodes[p.0].value;
            assert_eq!(v.len(), out.len(), "sum shape mismatch");
            for (o, x) in out.iter_mut().zip(v) {
                *o += x;
            }
        }
        self.push(out, Op::Sum(parts.to_vec()))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.sum(&[a, b])
    }

    /// Vector `x` times scalar node `s`.
    pub fn scale(&mut self, x: Var, s: Var) -> Var {
        let c = self.scalar(s);
        let out = self.nodes[x.0].value.iter().map(|v| v * c).collect();
        self.push(out, Op::Scale { x, s })
    }

    pub fn scale_const(&mut self, x: Var, c: f64) -> Var {
        let out = self.nodes[x.0].value.iter().map(|v| v * c).collect();
        self.push(out, Op::ScaleConst { x, c })
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.nodes[x.0].value.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        self.push(out, Op::Relu(x))
    }

    /// Stacks scalar nodes into one vector.
    pub fn stack(&mut self, scalars: &[Var]) -> Var {
        let out = scalars.iter().map(|&s| self.scalar(s)).collect();
        self.push(out, Op::Stack(scalars.to_vec()))
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let out = softmax(&self.nodes[x.0].value);
        self.push(out, Op::Softmax(x))
    }

    pub fn pick(&mut self, x: Var, index: usize) -> Var {
        let v = self.nodes[x.0].value[index];
        self.push(vec![v], Op::Pick { x, index })
    }

    /// Mean over classes of the binary cross entropy between probabilities and a one-hot target.
    pub fn bce(&mut self, probs: Var, target: usize) -> Var {
        let p = &self.nodes[probs.0].value;
        let n = p.len() as f64;
        let loss = p
            .iter()
            .enumerate()
            .map(|(c, &pc)| {
                let pc = pc.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
                if c == target {
                    -pc.ln()
                } else {
                    -(1.0 - pc).ln()
                }
            })
            .sum::<f64>()
            / n;
        self.push(vec![loss], Op::Bce { probs, target })
    }

    /// Softmax cross entropy on raw logits.
    pub fn cross_entropy(&mut self, logits: Var, target: usize) -> Var {
        let l = &self.nodes[logits.0].value;
        let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + l.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let loss = lse - l[target];
        self.push(vec![loss], Op::CrossEntropy { logits, target })
    }

    /// Back-propagates from scalar `root`, accumulating parameter gradients into `grads`.
    pub fn backward(&self, root: Var, grads: &mut ParamGrads) {
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; root.0 + 1];
        adj[root.0] = Some(vec![1.0; self.nodes[root.0].value.len()]);

        fn acc(adj: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut Vec<f64> {
            adj[v.0].get_or_insert_with(|| vec![0.0; len])
        }

        for idx in (0..=root.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => {
                    for (dst, src) in grads.get_mut(*id).iter_mut().zip(&g) {
                        *dst += src;
                    }
                }
                Op::MatVec { w, x } => {
                    let wn = &self.nodes[w.0];
                    let xv = &self.nodes[x.0].value;
                    let cols = wn.cols;
                    {
                        let gw = acc(&mut adj, *w, wn.value.len());
                        for (r, &gr) in g.iter().enumerate() {
                            if gr != 0.0 {
                                for (d, xc) in gw[r * cols..(r + 1) * cols].iter_mut().zip(xv) {
                                    *d += gr * xc;
                                }
                            }
                        }
                    }
                    if self.needs_grad(*x) {
                        let gx = acc(&mut adj, *x, cols);
                        for (r, &gr) in g.iter().enumerate() {
                            if gr != 0.0 {
                                for (d, wv) in gx.iter_mut().zip(&wn.value[r * cols..(r + 1) * cols]) {
                                    *d += gr * wv;
                                }
                            }
                        }
                    }
                }
                Op::Row { w, index } => {
                    let wn = &self.nodes[w.0];
                    let cols = wn.cols;
                    let gw = acc(&mut adj, *w, wn.value.len());
                    for (d, s) in gw[index * cols..(index + 1) * cols].iter_mut().zip(&g) {
                        *d += s;
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let len = self.nodes[p.0].value.len();
                        if self.needs_grad(p) {
                            let gp = acc(&mut adj, p, len);
                            for (d, s) in gp.iter_mut().zip(&g[off..off + len]) {
                                *d += s;
                            }
                        }
                        off += len;
                    }
                }
                Op::Sum(parts) => {
                    for &p in parts {
                        if self.needs_grad(p) {
                            let gp = acc(&mut adj, p, g.len());
                            for (d, s) in gp.iter_mut().zip(&g) {
                                *d += s;
                            }
                        }
                    }
                }
                Op::Scale { x, s } => {
                    let c = self.nodes[s.0].value[0];
                    let xv = &self.nodes[x.0].value;
                    if self.needs_grad(*s) {
                        acc(&mut adj, *s, 1)[0] += dot(&g, xv);
                    }
                    if self.needs_grad(*x) {
                        let gx = acc(&mut adj, *x, g.len());
                        for (d, s) in gx.iter_mut().zip(&g) {
                            *d += s * c;
                        }
                    }
                }
                Op::ScaleConst { x, c } => {
                    if self.needs_grad(*x) {
                        let gx = acc(&mut adj, *x, g.len());
                        for (d, s) in gx.iter_mut().zip(&g) {
                            *d += s * c;
                        }
                    }
                }
                Op::Relu(x) => {
                    if self.needs_grad(*x) {
                        let xv = &self.nodes[x.0].value;
                        let gx = acc(&mut adj, *x, g.len());
                        for ((d, s), &xi) in gx.iter_mut().zip(&g).zip(xv) {
                            if xi > 0.0 {
                                *d += s;
                            }
                        }
                    }
                }
                Op::Stack(scalars) => {
                    for (&s, &gs) in scalars.iter().zip(&g) {
                        if self.needs_grad(s) {
                            acc(&mut adj, s, 1)[0] += gs;
                        }
                    }
                }
                Op::Softmax(x) => {
                    if self.needs_grad(*x) {
                        let p = &node.value;
                        let dot: f64 = g.iter().zip(p).map(|(a, b)| a * b).sum();
                        let gx = acc(&mut adj, *x, g.len());
                        for ((d, &gi), &pi) in gx.iter_mut().zip(&g).zip(p) {
                            *d += pi * (gi - dot);
                        }
                    }
                }
                Op::Pick { x, index } => {
                    if self.needs_grad(*x) {
                        let len = self.nodes[x.0].value.len();
                        acc(&mut adj, *x, len)[*index] += g[0];
                    }
                }
                Op::Bce { probs, target } => {
                    if self.needs_grad(*probs) {
                        let p = &self.nodes[probs.0].value;
                        let n = p.len() as f64;
                        let gp = acc(&mut adj, *probs, p.len());
                        for (c, (d, &pc)) in gp.iter_mut().zip(p).enumerate() {
                            if pc <= PROB_FLOOR || pc >= 1.0 - PROB_FLOOR {
                                continue;
                            }
                            let local = if c == *target { -1.0 / pc } else { 1.0 / (1.0 - pc) };
                            *d += g[0] * local / n;
                        }
                    }
                }
                Op::CrossEntropy { logits, target } => {
                    if self.needs_grad(*logits) {
                        let p = softmax(&self.nodes[logits.0].value);
                        let gl = acc(&mut adj, *logits, p.len());
                        for (c, (d, pc)) in gl.iter_mut().zip(p).enumerate() {
                            let y = if c == *target { 1.0 } else { 0.0 };
                            *d += g[0] * (pc - y);
                        }
                    }
                }
            }
        }
    }

    fn needs_grad(&self, v: Var) -> bool {
        !matches!(self.nodes[v.0].op, Op::Input)
    }
}

/// Dot product with four interleaved partial sums, combined in a fixed order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Numerically stable softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
