//! Dense 64-bit tensors and a reverse-mode gradient tape.
//!
//! Every model equation in the crate is assembled from the handful of
//! operations recorded here. A [`Tape`] owns the forward values; [`Var`] is a
//! cheap handle into it. Leaves created with [`Tape::param`] receive
//! gradients, leaves created with [`Tape::constant`] do not, and any node
//! whose parents are all constants is skipped during the backward sweep.
//!
//! ```
//! use credence::numgrad::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.param(Tensor::vector(vec![1.0, 2.0, 3.0]));
//! let sq = tape.hadamard(x, x).unwrap();
//! let loss = tape.sum_entries(sq);
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.wrt(x).data(), &[2.0, 4.0, 6.0]);
//! ```

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Log clamp used by [`Tape::cross_entropy`].
pub const LOG_EPS: f64 = 1e-12;

/// Rank-0, 1 or 2 shape stored inline.
#[derive(Clone, Copy, PartialEq, Eq)]
struct Shape {
    dims: [usize; 2],
    rank: u8,
}

impl Shape {
    const SCALAR: Shape = Shape { dims: [0, 0], rank: 0 };

    fn vector(n: usize) -> Self {
        Shape { dims: [n, 0], rank: 1 }
    }

    fn matrix(rows: usize, cols: usize) -> Self {
        Shape {
            dims: [rows, cols],
            rank: 2,
        }
    }

    fn from_slice(dims: &[usize]) -> Option<Self> {
        match *dims {
            [] => Some(Shape::SCALAR),
            [n] => Some(Shape::vector(n)),
            [r, c] => Some(Shape::matrix(r, c)),
            _ => None,
        }
    }

    fn as_slice(&self) -> &[usize] {
        &self.dims[..self.rank as usize]
    }

    fn to_vec(self) -> Vec<usize> {
        self.as_slice().to_vec()
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.as_slice().fmt(f)
    }
}

/// Row-major dense array of `f64` of rank at most 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        let parsed = Shape::from_slice(&shape);
        match parsed {
            Some(shape) if expected == data.len() => Ok(Tensor { shape, data }),
            _ => Err(Error::Dimension {
                op: "tensor",
                left: shape,
                right: vec![data.len()],
            }),
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor {
            shape: Shape::vector(data.len()),
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Tensor::new(vec![rows, cols], data)
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: Shape::SCALAR,
            data: vec![value],
        }
    }

    /// # Panics
    /// For more than two dimensions.
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: Shape::from_slice(shape).expect("tensors have rank at most 2"),
            data: vec![0.0; shape.iter().product()],
        }
    }

    /// Uniform initialization in `[-s, s]` with `s = sqrt(6 / (rows + cols))`.
    pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let s = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.random_range(-s..=s)).collect();
        Tensor {
            shape: Shape::matrix(rows, cols),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        self.shape.as_slice()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_vector(&self) -> bool {
        self.shape.rank == 1
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1 && self.shape().iter().all(|&e| e == 1)
    }

    pub fn rows(&self) -> usize {
        self.shape().first().copied().unwrap_or(1)
    }

    pub fn cols(&self) -> usize {
        self.shape().get(1).copied().unwrap_or(1)
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.sum_squares().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Entrywise operation kinds accepted by [`Tape::elementwise`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementwise {
    Sigmoid,
    Tanh,
    Hadamard,
    Add,
    Sub,
    OneMinus,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Affine { w: Var, x: Var, b: Var },
    Sigmoid(Var),
    Tanh(Var),
    OneMinus(Var),
    Hadamard(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    Concat(Vec<Var>),
    Row { table: Var, row: usize },
    Sum(Vec<Var>),
    Softmax(Var),
    CrossEntropy { pred: Var, truth: Vec<f64> },
    SumSquares(Var),
    SumEntries(Var),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
    tracked: bool,
}

/// Append-only record of forward operations. Parents always precede
/// children, so a single reverse sweep computes all gradients.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn mismatch(op: &'static str, a: &Tensor, b: &Tensor) -> Error {
    Error::Dimension {
        op,
        left: a.shape.to_vec(),
        right: b.shape.to_vec(),
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, tracked: bool) -> Var {
        self.nodes.push(Node { value, op, tracked });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, var: Var) -> bool {
        self.nodes[var.0].tracked
    }

    /// Records a leaf that receives a gradient.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Records a leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// `W·x + b` for `W: m×n`, `x: n`, `b: m`.
    pub fn affine(&mut self, w: Var, x: Var, b: Var) -> Result<Var> {
        let (wt, xt, bt) = (self.value(w), self.value(x), self.value(b));
        if wt.shape.rank != 2 || !xt.is_vector() || wt.cols() != xt.len() {
            return Err(mismatch("affine (W·x)", wt, xt));
        }
        if !bt.is_vector() || bt.len() != wt.rows() {
            return Err(mismatch("affine (bias)", wt, bt));
        }
        let n = wt.cols();
        let out: Vec<f64> = wt
            .data
            .chunks_exact(n)
            .zip(&bt.data)
            .map(|(row, bias)| bias + row.iter().zip(&xt.data).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let tracked = self.tracked(w) || self.tracked(x) || self.tracked(b);
        Ok(self.push(Tensor::vector(out), Op::Affine { w, x, b }, tracked))
    }

    fn unary(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let data = self.value(x).data.iter().map(|&v| f(v)).collect();
        let shape = self.value(x).shape;
        let tracked = self.tracked(x);
        self.push(Tensor { shape, data }, op, tracked)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, sigmoid, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, f64::tanh, Op::Tanh(x))
    }

    /// `1 − x` entrywise.
    pub fn one_minus(&mut self, x: Var) -> Var {
        self.unary(x, |v| 1.0 - v, Op::OneMinus(x))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        self.unary(x, |v| v * factor, Op::Scale(x, factor))
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (at, bt) = (self.value(a), self.value(b));
        if at.shape != bt.shape {
            return Err(mismatch(name, at, bt));
        }
        let data = at.data.iter().zip(&bt.data).map(|(&x, &y)| f(x, y)).collect();
        let shape = at.shape;
        let tracked = self.tracked(a) || self.tracked(b);
        Ok(self.push(Tensor { shape, data }, op, tracked))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("hadamard", a, b, |x, y| x * y, Op::Hadamard(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    /// Dispatches an entrywise operation by kind. Unary kinds take one
    /// argument, binary kinds two.
    pub fn elementwise(&mut self, kind: Elementwise, args: &[Var]) -> Result<Var> {
        let unary = matches!(
            kind,
            Elementwise::Sigmoid | Elementwise::Tanh | Elementwise::OneMinus
        );
        let arity = if unary { 1 } else { 2 };
        if args.len() != arity {
            return Err(Error::usage(format!(
                "{kind:?} takes {arity} argument(s), got {}",
                args.len()
            )));
        }
        match kind {
            Elementwise::Sigmoid => Ok(self.sigmoid(args[0])),
            Elementwise::Tanh => Ok(self.tanh(args[0])),
            Elementwise::OneMinus => Ok(self.one_minus(args[0])),
            Elementwise::Hadamard => self.hadamard(args[0], args[1]),
            Elementwise::Add => self.add(args[0], args[1]),
            Elementwise::Sub => self.sub(args[0], args[1]),
        }
    }

    /// Concatenates vectors in argument order.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::usage("concat needs at least one part"));
        }
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            if !t.is_vector() {
                return Err(mismatch("concat", t, t));
            }
            data.extend_from_slice(&t.data);
        }
        let tracked = parts.iter().any(|&p| self.tracked(p));
        Ok(self.push(Tensor::vector(data), Op::Concat(parts.to_vec()), tracked))
    }

    /// Selects one row of a matrix as a vector (embedding lookup).
    pub fn row(&mut self, table: Var, row: usize) -> Result<Var> {
        let t = self.value(table);
        if t.shape.rank != 2 || row >= t.rows() {
            return Err(Error::Dimension {
                op: "row",
                left: t.shape.to_vec(),
                right: vec![row],
            });
        }
        let cols = t.cols();
        let data = t.data[row * cols..(row + 1) * cols].to_vec();
        let tracked = self.tracked(table);
        Ok(self.push(Tensor::vector(data), Op::Row { table, row }, tracked))
    }

    /// Entrywise sum of equally shaped tensors.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(&first) = parts.first() else {
            return Err(Error::usage("sum needs at least one part"));
        };
        let shape = self.value(first).shape;
        let mut data = vec![0.0; self.value(first).len()];
        for &p in parts {
            let t = self.value(p);
            if t.shape != shape {
                return Err(mismatch("sum", self.value(first), t));
            }
            for (acc, v) in data.iter_mut().zip(&t.data) {
                *acc += v;
            }
        }
        let tracked = parts.iter().any(|&p| self.tracked(p));
        Ok(self.push(Tensor { shape, data }, Op::Sum(parts.to_vec()), tracked))
    }

    /// Arithmetic mean of equally shaped tensors.
    pub fn mean(&mut self, parts: &[Var]) -> Result<Var> {
        let total = self.sum(parts)?;
        Ok(self.scale(total, 1.0 / parts.len() as f64))
    }

    /// Max-subtracted softmax of a vector.
    pub fn softmax(&mut self, x: Var) -> Result<Var> {
        let t = self.value(x);
        if !t.is_vector() || t.is_empty() {
            return Err(mismatch("softmax", t, t));
        }
        let max = t.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = t.data.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let data = exps.into_iter().map(|e| e / total).collect();
        let tracked = self.tracked(x);
        Ok(self.push(Tensor::vector(data), Op::Softmax(x), tracked))
    }

    /// `−Σ truth[k]·ln(pred[k] + ε)` against a one-hot target.
    pub fn cross_entropy(&mut self, pred: Var, truth: &[f64]) -> Result<Var> {
        let p = self.value(pred);
        if !p.is_vector() || p.len() != truth.len() {
            return Err(Error::Dimension {
                op: "cross_entropy",
                left: p.shape.to_vec(),
                right: vec![truth.len()],
            });
        }
        let ones = truth.iter().filter(|&&v| v == 1.0).count();
        let zeros = truth.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != truth.len() {
            return Err(Error::usage(format!(
                "cross_entropy target is not one-hot: {truth:?}"
            )));
        }
        let value: f64 = -p
            .data
            .iter()
            .zip(truth)
            .map(|(q, y)| y * (q + LOG_EPS).ln())
            .sum::<f64>();
        let tracked = self.tracked(pred);
        Ok(self.push(
            Tensor::scalar(value),
            Op::CrossEntropy {
                pred,
                truth: truth.to_vec(),
            },
            tracked,
        ))
    }

    /// Scalar `Σ x²`.
    pub fn sum_squares(&mut self, x: Var) -> Var {
        let value = self.value(x).sum_squares();
        let tracked = self.tracked(x);
        self.push(Tensor::scalar(value), Op::SumSquares(x), tracked)
    }

    /// Scalar `Σ x`.
    pub fn sum_entries(&mut self, x: Var) -> Var {
        let value = self.value(x).data.iter().sum();
        let tracked = self.tracked(x);
        self.push(Tensor::scalar(value), Op::SumEntries(x), tracked)
    }

    /// Reverse sweep from a scalar node. Gradients are returned for every
    /// tracked leaf; leaves the loss does not depend on get zeros.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let root = &self.nodes[loss.0].value;
        if !root.is_scalar() {
            return Err(Error::usage(format!(
                "backward needs a scalar loss, got shape {:?}",
                root.shape
            )));
        }
        // one flat buffer; untracked nodes get an empty slot
        let n = loss.0 + 1;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0;
        for node in &self.nodes[..n] {
            offsets.push(total);
            if node.tracked {
                total += node.value.len();
            }
        }
        offsets.push(total);
        let mut buf = vec![0.0; total];
        let mut touched = vec![false; n];
        if self.nodes[loss.0].tracked {
            buf[offsets[loss.0]] = 1.0;
            touched[loss.0] = true;
        }

        for i in (0..n).rev() {
            let node = &self.nodes[i];
            if !touched[i] || matches!(node.op, Op::Leaf) {
                continue;
            }
            let (lower, upper) = buf.split_at_mut(offsets[i]);
            let g = &upper[..offsets[i + 1] - offsets[i]];
            let mut slots = Slots {
                buf: lower,
                offsets: &offsets,
                touched: &mut touched,
                nodes: &self.nodes,
            };
            self.propagate(&node.op, &node.value, g, &mut slots);
        }

        let leaves = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                if !node.tracked || !matches!(node.op, Op::Leaf) {
                    return None;
                }
                let data = if i < n {
                    buf[offsets[i]..offsets[i + 1]].to_vec()
                } else {
                    vec![0.0; node.value.len()]
                };
                Some(Tensor {
                    shape: node.value.shape,
                    data,
                })
            })
            .collect();
        Ok(Gradients { leaves })
    }

    fn propagate(&self, op: &Op, out: &Tensor, g: &[f64], slots: &mut Slots<'_>) {
        let mut acc = |var: Var, f: &mut dyn FnMut(&mut [f64])| slots.with(var, f);
        match op {
            Op::Leaf => {}
            Op::Affine { w, x, b } => {
                let wt = self.value(*w);
                let xt = self.value(*x);
                let n = wt.cols();
                acc(*w, &mut |dw| {
                    for (r, gr) in g.iter().enumerate() {
                        if *gr == 0.0 {
                            continue;
                        }
                        for (d, xv) in dw[r * n..(r + 1) * n].iter_mut().zip(&xt.data) {
                            *d += gr * xv;
                        }
                    }
                });
                acc(*x, &mut |dx| {
                    for (row, gr) in wt.data.chunks_exact(n).zip(g) {
                        for (d, wv) in dx.iter_mut().zip(row) {
                            *d += gr * wv;
                        }
                    }
                });
                acc(*b, &mut |db| {
                    for (d, gr) in db.iter_mut().zip(g) {
                        *d += gr;
                    }
                });
            }
            Op::Sigmoid(x) => acc(*x, &mut |dx| {
                for ((d, y), gr) in dx.iter_mut().zip(&out.data).zip(g) {
                    *d += gr * y * (1.0 - y);
                }
            }),
            Op::Tanh(x) => acc(*x, &mut |dx| {
                for ((d, y), gr) in dx.iter_mut().zip(&out.data).zip(g) {
                    *d += gr * (1.0 - y * y);
                }
            }),
            Op::OneMinus(x) => acc(*x, &mut |dx| {
                for (d, gr) in dx.iter_mut().zip(g) {
                    *d -= gr;
                }
            }),
            Op::Scale(x, c) => acc(*x, &mut |dx| {
                for (d, gr) in dx.iter_mut().zip(g) {
                    *d += gr * c;
                }
            }),
            Op::Hadamard(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                acc(*a, &mut |da| {
                    for ((d, y), gr) in da.iter_mut().zip(&bv.data).zip(g) {
                        *d += gr * y;
                    }
                });
                acc(*b, &mut |db| {
                    for ((d, x), gr) in db.iter_mut().zip(&av.data).zip(g) {
                        *d += gr * x;
                    }
                });
            }
            Op::Add(a, b) | Op::Sub(a, b) => {
                let sign = if matches!(op, Op::Sub(..)) { -1.0 } else { 1.0 };
                acc(*a, &mut |da| {
                    for (d, gr) in da.iter_mut().zip(g) {
                        *d += gr;
                    }
                });
                acc(*b, &mut |db| {
                    for (d, gr) in db.iter_mut().zip(g) {
                        *d += sign * gr;
                    }
                });
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    let slice = &g[offset..offset + len];
                    acc(p, &mut |dp| {
                        for (d, gr) in dp.iter_mut().zip(slice) {
                            *d += gr;
                        }
                    });
                    offset += len;
                }
            }
            Op::Row { table, row } => {
                let cols = self.value(*table).cols();
                acc(*table, &mut |dt| {
                    for (d, gr) in dt[row * cols..(row + 1) * cols].iter_mut().zip(g) {
                        *d += gr;
                    }
                });
            }
            Op::Sum(parts) => {
                for &p in parts {
                    acc(p, &mut |dp| {
                        for (d, gr) in dp.iter_mut().zip(g) {
                            *d += gr;
                        }
                    });
                }
            }
            Op::Softmax(x) => {
                let dot: f64 = g.iter().zip(&out.data).map(|(a, b)| a * b).sum();
                acc(*x, &mut |dx| {
                    for ((d, y), gr) in dx.iter_mut().zip(&out.data).zip(g) {
                        *d += y * (gr - dot);
                    }
                });
            }
            Op::CrossEntropy { pred, truth } => {
                let p = self.value(*pred);
                acc(*pred, &mut |dp| {
                    for ((d, y), q) in dp.iter_mut().zip(truth).zip(&p.data) {
                        if *y != 0.0 {
                            *d -= g[0] * y / (q + LOG_EPS);
                        }
                    }
                });
            }
            Op::SumSquares(x) => {
                let xv = self.value(*x);
                acc(*x, &mut |dx| {
                    for (d, v) in dx.iter_mut().zip(&xv.data) {
                        *d += 2.0 * g[0] * v;
                    }
                });
            }
            Op::SumEntries(x) => acc(*x, &mut |dx| {
                for d in dx.iter_mut() {
                    *d += g[0];
                }
            }),
        }
    }
}

/// Gradient accumulators of the nodes below the one being propagated.
struct Slots<'a> {
    buf: &'a mut [f64],
    offsets: &'a [usize],
    touched: &'a mut [bool],
    nodes: &'a [Node],
}

impl Slots<'_> {
    fn with(&mut self, var: Var, f: &mut dyn FnMut(&mut [f64])) {
        if !self.nodes[var.0].tracked {
            return;
        }
        self.touched[var.0] = true;
        f(&mut self.buf[self.offsets[var.0]..self.offsets[var.0 + 1]]);
    }
}

/// Gradients of one backward sweep, indexed by leaf [`Var`].
#[derive(Clone, Debug)]
pub struct Gradients {
    leaves: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient for a tracked leaf, `None` for constants and interior nodes.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.leaves.get(var.0).and_then(Option::as_ref)
    }

    /// Like [`Gradients::get`] but panics for non-leaf handles.
    pub fn wrt(&self, var: Var) -> &Tensor {
        self.get(var)
            .unwrap_or_else(|| panic!("{var:?} is not a tracked leaf"))
    }
}

/// Outcome of [`finite_diff_check`].
#[derive(Clone, Debug)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// `(parameter, entry)` with the largest error.
    pub worst: Option<(usize, usize)>,
    pub entries: usize,
    pub analytic: Vec<Tensor>,
}

/// Compares tape gradients of `f` against central differences.
///
/// `f` rebuilds the scalar function on a fresh tape from leaf handles, one per
/// entry of `params`. Error per entry is
/// `|analytic − numeric| / max(1e-8, |analytic| + |numeric|)`.
pub fn finite_diff_check<F>(params: &[Tensor], step: f64, f: F) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::usage(format!("finite-difference step must be > 0, got {step}")));
    }
    let eval = |values: &[Tensor], what: &dyn Fn() -> String| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.param(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        let v = tape.value(out).data[0];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEval(what()))
        }
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    if !tape.value(out).data[0].is_finite() {
        return Err(Error::NonFiniteEval("unperturbed parameters".into()));
    }
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars.iter().map(|&v| grads.wrt(v).clone()).collect();

    let mut work = params.to_vec();
    let mut max_rel_error = 0.0;
    let mut worst = None;
    let mut entries = 0;
    for p in 0..params.len() {
        for e in 0..params[p].len() {
            let orig = params[p].data[e];
            work[p].data[e] = orig + step;
            let up = eval(&work, &|| format!("parameter {p} entry {e} (+step)"))?;
            work[p].data[e] = orig - step;
            let down = eval(&work, &|| format!("parameter {p} entry {e} (-step)"))?;
            work[p].data[e] = orig;

            let numeric = (up - down) / (2.0 * step);
            let a = analytic[p].data[e];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            if rel > max_rel_error || worst.is_none() {
                if rel > max_rel_error {
                    max_rel_error = rel;
                }
                worst = Some((p, e));
            }
            entries += 1;
        }
    }
    Ok(GradCheck {
        max_rel_error,
        worst,
        entries,
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_var(tape: &mut Tape, v: &[f64]) -> Var {
        tape.constant(Tensor::vector(v.to_vec()))
    }

    #[test]
    fn affine_examples() {
        let mut tape = Tape::new();
        let w = tape.constant(Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let x = vec_var(&mut tape, &[1.0, 2.0]);
        let b = vec_var(&mut tape, &[0.0, 0.0]);
        let y = tape.affine(w, x, b).unwrap();
        assert_eq!(tape.value(y).data(), &[1.0, 2.0]);

        let w0 = tape.constant(Tensor::zeros(&[1, 1]));
        let x1 = vec_var(&mut tape, &[42.0]);
        let b3 = vec_var(&mut tape, &[3.0]);
        let y = tape.affine(w0, x1, b3).unwrap();
        assert_eq!(tape.value(y).data(), &[3.0]);

        let w = tape.constant(Tensor::matrix(2, 2, vec![1.0, 1.0, 1.0, -1.0]).unwrap());
        let x = vec_var(&mut tape, &[2.0, 3.0]);
        let y = tape.affine(w, x, b).unwrap();
        assert_eq!(tape.value(y).data(), &[5.0, -1.0]);
    }

    #[test]
    fn affine_reports_both_shapes() {
        let mut tape = Tape::new();
        let w = tape.constant(Tensor::zeros(&[2, 3]));
        let x = vec_var(&mut tape, &[1.0, 2.0]);
        let b = vec_var(&mut tape, &[0.0, 0.0]);
        match tape.affine(w, x, b) {
            Err(Error::Dimension { left, right, .. }) => {
                assert_eq!(left, vec![2, 3]);
                assert_eq!(right, vec![2]);
            }
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn elementwise_examples() {
        let mut tape = Tape::new();
        let z = vec_var(&mut tape, &[0.0, 0.0]);
        let s = tape.elementwise(Elementwise::Sigmoid, &[z]).unwrap();
        assert_eq!(tape.value(s).data(), &[0.5, 0.5]);
        let z1 = vec_var(&mut tape, &[0.0]);
        let t = tape.elementwise(Elementwise::Tanh, &[z1]).unwrap();
        assert_eq!(tape.value(t).data(), &[0.0]);
        let a = vec_var(&mut tape, &[2.0, 3.0]);
        let b = vec_var(&mut tape, &[4.0, 0.0]);
        let h = tape.elementwise(Elementwise::Hadamard, &[a, b]).unwrap();
        assert_eq!(tape.value(h).data(), &[8.0, 0.0]);
        assert!(tape.elementwise(Elementwise::Add, &[a, z1]).is_err());
        assert!(tape.elementwise(Elementwise::Add, &[a]).is_err());
    }

    #[test]
    fn concat_examples() {
        let mut tape = Tape::new();
        let a = vec_var(&mut tape, &[1.0]);
        let b = vec_var(&mut tape, &[2.0, 3.0]);
        let c = tape.concat(&[a, b]).unwrap();
        assert_eq!(tape.value(c).data(), &[1.0, 2.0, 3.0]);
        let single = tape.concat(&[b]).unwrap();
        assert_eq!(tape.value(single), tape.value(b));
        assert!(matches!(tape.concat(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn softmax_examples() {
        let mut tape = Tape::new();
        let x = vec_var(&mut tape, &[0.0, 0.0, 0.0]);
        let y = tape.softmax(x).unwrap();
        for v in tape.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let x = vec_var(&mut tape, &[1000.0, 0.0]);
        let y = tape.softmax(x).unwrap();
        let d = tape.value(y).data();
        assert!(d.iter().all(|v| v.is_finite()));
        assert!((d[0] - 1.0).abs() < 1e-15 && d[1] >= 0.0 && d[1] < 1e-300);
        let x = vec_var(&mut tape, &[std::f64::consts::LN_2, 0.0]);
        let y = tape.softmax(x).unwrap();
        let d = tape.value(y).data();
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_examples() {
        let mut tape = Tape::new();
        let p = vec_var(&mut tape, &[1.0, 0.0, 0.0]);
        let l = tape.cross_entropy(p, &[1.0, 0.0, 0.0]).unwrap();
        assert!(tape.value(l).data()[0].abs() < 1e-11);
        let p = vec_var(&mut tape, &[0.5, 0.5]);
        let l = tape.cross_entropy(p, &[1.0, 0.0]).unwrap();
        assert!((tape.value(l).data()[0] - std::f64::consts::LN_2).abs() < 1e-11);
        let p = vec_var(&mut tape, &[1.0 / 6.0; 6]);
        let l = tape.cross_entropy(p, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((tape.value(l).data()[0] - 6f64.ln()).abs() < 1e-10);
        assert!(matches!(
            tape.cross_entropy(p, &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn backward_examples() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::vector(vec![1.0, 2.0, 3.0]));
        let w = tape.param(Tensor::zeros(&[2, 2]));
        let sq = tape.hadamard(x, x).unwrap();
        let loss = tape.sum_entries(sq);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.wrt(x).data(), &[2.0, 4.0, 6.0]);
        assert_eq!(grads.wrt(w).data(), &[0.0; 4]);
        assert!(matches!(tape.backward(sq), Err(Error::Usage(_))));
    }

    #[test]
    fn gradcheck_quadratic_and_constant() {
        let params = vec![Tensor::vector(vec![0.3, -1.2, 2.0])];
        let check = finite_diff_check(&params, 1e-5, |tape, vars| {
            let sq = tape.hadamard(vars[0], vars[0])?;
            let s = tape.sum_entries(sq);
            Ok(tape.scale(s, 1.5))
        })
        .unwrap();
        assert!(check.max_rel_error < 1e-8, "{}", check.max_rel_error);

        let check = finite_diff_check(&params, 1e-5, |tape, _| {
            Ok(tape.constant(Tensor::scalar(4.0)))
        })
        .unwrap();
        assert_eq!(check.max_rel_error, 0.0);
        assert!(check.analytic[0].data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradcheck_names_non_finite_parameter() {
        let params = vec![Tensor::vector(vec![1.0]), Tensor::vector(vec![0.0])];
        let err = finite_diff_check(&params, 1e-5, |tape, vars| {
            // ln(x) explodes once the second parameter is pushed negative
            let y = tape.cross_entropy(vars[1], &[1.0])?;
            let v = tape.value(vars[1]).data()[0];
            if v < 0.0 {
                return Ok(tape.constant(Tensor::scalar(f64::NAN)));
            }
            Ok(y)
        })
        .unwrap_err();
        assert!(err.to_string().contains("parameter 1 entry 0"), "{err}");
        assert!(finite_diff_check(&params, 0.0, |t, v| Ok(t.sum_squares(v[0]))).is_err());
    }
}
