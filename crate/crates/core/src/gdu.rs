//! Gated diffusive unit and the synchronous diffusion network over an
//! [`Hsn`].
//!
//! A unit takes a node feature `x` and two neighbor ports: `z` (gated by the
//! forget gate `f`) and `t` (gated by the adjust gate `e`). The selection
//! gates `g` and `r` mix four `tanh` transforms of the gated / ungated port
//! combinations:
//!
//! ```text
//! c = [x; z; t]
//! f = σ(W_f c)   z̃ = f ⊙ z
//! e = σ(W_e c)   t̃ = e ⊙ t
//! g = σ(W_g c)   r = σ(W_r c)
//! h = g⊙r⊙tanh(W_u[x; z̃; t̃]) + (1−g)⊙r⊙tanh(W_u[x; z; t̃])
//!   + g⊙(1−r)⊙tanh(W_u[x; z̃; t]) + (1−g)⊙(1−r)⊙tanh(W_u[x; z; t])
//! ```
//!
//! Articles read subjects on `z` and their creator on `t`. Creators and
//! subjects read their articles on `z` and a zero vector on `t`.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Hsn, NodeType};
use crate::numgrad::{Tape, Tensor, Var};
use crate::params::Parameters;

/// Weights of one unit. Every matrix is `state × (input + 2·state)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GduParams {
    pub w_forget: Tensor,
    pub b_forget: Tensor,
    pub w_adjust: Tensor,
    pub b_adjust: Tensor,
    pub w_select_g: Tensor,
    pub b_select_g: Tensor,
    pub w_select_r: Tensor,
    pub b_select_r: Tensor,
    pub w_combine: Tensor,
    pub b_combine: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct GduVars {
    pub w_forget: Var,
    pub b_forget: Var,
    pub w_adjust: Var,
    pub b_adjust: Var,
    pub w_select_g: Var,
    pub b_select_g: Var,
    pub w_select_r: Var,
    pub b_select_r: Var,
    pub w_combine: Var,
    pub b_combine: Var,
}

impl GduParams {
    pub fn init<R: Rng + ?Sized>(input: usize, state: usize, rng: &mut R) -> Self {
        let width = input + 2 * state;
        let mut w = || Tensor::glorot(state, width, rng);
        let (wf, we, wg, wr, wu) = (w(), w(), w(), w(), w());
        let b = || Tensor::zeros(&[state]);
        GduParams {
            w_forget: wf,
            b_forget: b(),
            w_adjust: we,
            b_adjust: b(),
            w_select_g: wg,
            b_select_g: b(),
            w_select_r: wr,
            b_select_r: b(),
            w_combine: wu,
            b_combine: b(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.w_combine.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_combine.cols() - 2 * self.state_dim()
    }
}

impl Parameters for GduParams {
    type Bound = GduVars;

    fn tensors(&self) -> Vec<&Tensor> {
        vec![
            &self.w_forget,
            &self.b_forget,
            &self.w_adjust,
            &self.b_adjust,
            &self.w_select_g,
            &self.b_select_g,
            &self.w_select_r,
            &self.b_select_r,
            &self.w_combine,
            &self.b_combine,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![
            &mut self.w_forget,
            &mut self.b_forget,
            &mut self.w_adjust,
            &mut self.b_adjust,
            &mut self.w_select_g,
            &mut self.b_select_g,
            &mut self.w_select_r,
            &mut self.b_select_r,
            &mut self.w_combine,
            &mut self.b_combine,
        ]
    }

    fn bind_from(vars: &mut dyn Iterator<Item = Var>) -> GduVars {
        let mut next = || vars.next().expect("too few vars for GDU");
        GduVars {
            w_forget: next(),
            b_forget: next(),
            w_adjust: next(),
            b_adjust: next(),
            w_select_g: next(),
            b_select_g: next(),
            w_select_r: next(),
            b_select_r: next(),
            w_combine: next(),
            b_combine: next(),
        }
    }
}

/// Gate activations and output of one unit evaluation.
#[derive(Clone, Copy, Debug)]
pub struct GduTrace {
    pub forget: Var,
    pub adjust: Var,
    pub select_g: Var,
    pub select_r: Var,
    pub output: Var,
}

fn check_matrix(tape: &Tape, name: &'static str, w: Var, b: Var, rows: usize, cols: usize) -> Result<()> {
    let wt = tape.value(w);
    if wt.shape() != [rows, cols] {
        return Err(Error::Dimension {
            op: name,
            left: wt.shape().to_vec(),
            right: vec![rows, cols],
        });
    }
    let bt = tape.value(b);
    if bt.shape() != [rows] {
        return Err(Error::Dimension {
            op: name,
            left: bt.shape().to_vec(),
            right: vec![rows],
        });
    }
    Ok(())
}

pub fn gdu_forward(tape: &mut Tape, x: Var, z: Var, t: Var, p: &GduVars) -> Result<Var> {
    Ok(gdu_forward_traced(tape, x, z, t, p)?.output)
}

pub fn gdu_forward_traced(tape: &mut Tape, x: Var, z: Var, t: Var, p: &GduVars) -> Result<GduTrace> {
    let state = tape.value(z).len();
    if tape.value(t).len() != state {
        return Err(Error::Dimension {
            op: "gdu ports (z vs t)",
            left: tape.value(z).shape().to_vec(),
            right: tape.value(t).shape().to_vec(),
        });
    }
    let width = tape.value(x).len() + 2 * state;
    check_matrix(tape, "gdu forget matrix W_f", p.w_forget, p.b_forget, state, width)?;
    check_matrix(tape, "gdu adjust matrix W_e", p.w_adjust, p.b_adjust, state, width)?;
    check_matrix(tape, "gdu selection matrix W_g", p.w_select_g, p.b_select_g, state, width)?;
    check_matrix(tape, "gdu selection matrix W_r", p.w_select_r, p.b_select_r, state, width)?;
    check_matrix(tape, "gdu combination matrix W_u", p.w_combine, p.b_combine, state, width)?;

    let c = tape.concat(&[x, z, t])?;
    let gate = |tape: &mut Tape, w: Var, b: Var| -> Result<Var> {
        let pre = tape.affine(w, c, b)?;
        Ok(tape.sigmoid(pre))
    };
    let f = gate(tape, p.w_forget, p.b_forget)?;
    let e = gate(tape, p.w_adjust, p.b_adjust)?;
    let g = gate(tape, p.w_select_g, p.b_select_g)?;
    let r = gate(tape, p.w_select_r, p.b_select_r)?;
    let z_gated = tape.hadamard(f, z)?;
    let t_gated = tape.hadamard(e, t)?;

    let transform = |tape: &mut Tape, zp: Var, tp: Var| -> Result<Var> {
        let input = tape.concat(&[x, zp, tp])?;
        let pre = tape.affine(p.w_combine, input, p.b_combine)?;
        Ok(tape.tanh(pre))
    };
    let u_both = transform(tape, z_gated, t_gated)?;
    let u_t = transform(tape, z, t_gated)?;
    let u_z = transform(tape, z_gated, t)?;
    let u_none = transform(tape, z, t)?;

    // The four-way mix, evaluated as nested interpolations:
    //   a = u_t + g⊙(u_both − u_t),  b = u_none + g⊙(u_z − u_none),
    //   h = b + r⊙(a − b).
    // Expanding gives exactly the weighted sum above, but equal transforms
    // (e.g. both ports zero) now produce h = u without rounding noise.
    let lerp = |tape: &mut Tape, w: Var, lo: Var, hi: Var| -> Result<Var> {
        let diff = tape.sub(hi, lo)?;
        let step = tape.hadamard(w, diff)?;
        tape.add(lo, step)
    };
    let a = lerp(tape, g, u_t, u_both)?;
    let b = lerp(tape, g, u_none, u_z)?;
    let output = lerp(tape, r, b, a)?;
    Ok(GduTrace {
        forget: f,
        adjust: e,
        select_g: g,
        select_r: r,
        output,
    })
}

/// Mean of `states[i]` over `ids`; `zero` when `ids` is empty.
pub fn aggregate_neighbors(tape: &mut Tape, states: &[Var], ids: &[usize], zero: Var) -> Result<Var> {
    if ids.is_empty() {
        return Ok(zero);
    }
    let mut picked = Vec::with_capacity(ids.len());
    for &i in ids {
        let v = states
            .get(i)
            .ok_or_else(|| Error::usage(format!("aggregate: unknown node index {i} (have {})", states.len())))?;
        picked.push(*v);
    }
    tape.mean(&picked)
}

/// Per-category handles of equal-length node vectors.
#[derive(Clone, Debug, Default)]
pub struct NodeVars {
    pub articles: Vec<Var>,
    pub creators: Vec<Var>,
    pub subjects: Vec<Var>,
}

impl NodeVars {
    pub fn get(&self, kind: NodeType) -> &[Var] {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }

    pub fn values(&self, tape: &Tape, kind: NodeType) -> Vec<Tensor> {
        self.get(kind).iter().map(|&v| tape.value(v).clone()).collect()
    }
}

/// One unit per node category.
#[derive(Clone, Copy, Debug)]
pub struct GduSet {
    pub articles: GduVars,
    pub creators: GduVars,
    pub subjects: GduVars,
}

#[derive(Clone, Debug)]
pub struct DiffusionState {
    pub states: NodeVars,
    pub rounds: usize,
}

/// Runs `rounds` synchronous rounds from all-zero states. Each round reads
/// only the previous round's states.
pub fn diffuse(
    tape: &mut Tape,
    hsn: &Hsn,
    features: &NodeVars,
    units: &GduSet,
    rounds: usize,
) -> Result<DiffusionState> {
    if rounds == 0 {
        return Err(Error::usage("diffusion needs at least one round"));
    }
    for kind in NodeType::ALL {
        if features.get(kind).len() != hsn.count(kind) {
            return Err(Error::usage(format!(
                "features cover {} of {} {kind} nodes",
                features.get(kind).len(),
                hsn.count(kind)
            )));
        }
    }
    let state_dim = units_state_dim(tape, units);
    let zero = tape.constant(Tensor::zeros(&[state_dim]));
    let mut prev = NodeVars {
        articles: vec![zero; hsn.count(NodeType::Article)],
        creators: vec![zero; hsn.count(NodeType::Creator)],
        subjects: vec![zero; hsn.count(NodeType::Subject)],
    };
    for _ in 0..rounds {
        let mut next = NodeVars::default();
        for (a, &x) in features.articles.iter().enumerate() {
            let z = aggregate_neighbors(tape, &prev.subjects, hsn.subjects_of(a), zero)?;
            let t = prev.creators[hsn.creator_of(a)];
            next.articles.push(gdu_forward(tape, x, z, t, &units.articles)?);
        }
        for (c, &x) in features.creators.iter().enumerate() {
            let z = aggregate_neighbors(tape, &prev.articles, hsn.articles_by(c), zero)?;
            next.creators.push(gdu_forward(tape, x, z, zero, &units.creators)?);
        }
        for (s, &x) in features.subjects.iter().enumerate() {
            let z = aggregate_neighbors(tape, &prev.articles, hsn.articles_about(s), zero)?;
            next.subjects.push(gdu_forward(tape, x, z, zero, &units.subjects)?);
        }
        prev = next;
    }
    Ok(DiffusionState { states: prev, rounds })
}

/// Every node's unit evaluated once with both ports at zero; the
/// no-diffusion ablation.
pub fn isolated(tape: &mut Tape, features: &NodeVars, units: &GduSet) -> Result<DiffusionState> {
    let zero = tape.constant(Tensor::zeros(&[units_state_dim(tape, units)]));
    let mut run = |xs: &[Var], p: &GduVars| -> Result<Vec<Var>> {
        xs.iter().map(|&x| gdu_forward(tape, x, zero, zero, p)).collect()
    };
    let states = NodeVars {
        articles: run(&features.articles, &units.articles)?,
        creators: run(&features.creators, &units.creators)?,
        subjects: run(&features.subjects, &units.subjects)?,
    };
    Ok(DiffusionState { states, rounds: 0 })
}

fn units_state_dim(tape: &Tape, units: &GduSet) -> usize {
    tape.value(units.articles.w_combine).rows()
}

/// Shape metadata stored at the front of a checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub d: u64,
    pub embed: u64,
    pub hidden: u64,
    pub latent: u64,
    pub state: u64,
    pub q: u64,
    pub rounds: u64,
    pub classes: u64,
    pub vocab_rows: u64,
    pub seed: u64,
}

const MAGIC: &[u8; 8] = b"CREDGDU\0";
const VERSION: u64 = 1;

impl CheckpointHeader {
    fn fields(&self) -> [u64; 10] {
        [
            self.d,
            self.embed,
            self.hidden,
            self.latent,
            self.state,
            self.q,
            self.rounds,
            self.classes,
            self.vocab_rows,
            self.seed,
        ]
    }
}

/// Layout: magic, version, ten `u64` header fields, value count, then every
/// tensor's entries in order as `f64`. All integers and floats little-endian.
pub fn write_checkpoint(path: &Path, header: &CheckpointHeader, tensors: &[&Tensor]) -> Result<()> {
    let count: usize = tensors.iter().map(|t| t.len()).sum();
    let mut buf = Vec::with_capacity(8 * (13 + count));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for f in header.fields() {
        buf.extend_from_slice(&f.to_le_bytes());
    }
    buf.extend_from_slice(&(count as u64).to_le_bytes());
    for t in tensors {
        for v in t.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, Vec<f64>)> {
    let bytes = fs::read(path)?;
    let mut words = bytes.chunks(8);
    let mut next = |what: &str| -> Result<[u8; 8]> {
        words
            .next()
            .and_then(|w| <[u8; 8]>::try_from(w).ok())
            .ok_or_else(|| Error::Checkpoint(format!("{}: truncated at {what}", path.display())))
    };
    if &next("magic")? != MAGIC {
        return Err(Error::Checkpoint(format!("{}: not a model checkpoint", path.display())));
    }
    let version = u64::from_le_bytes(next("version")?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let mut f = [0u64; 10];
    for slot in &mut f {
        *slot = u64::from_le_bytes(next("header")?);
    }
    let header = CheckpointHeader {
        d: f[0],
        embed: f[1],
        hidden: f[2],
        latent: f[3],
        state: f[4],
        q: f[5],
        rounds: f[6],
        classes: f[7],
        vocab_rows: f[8],
        seed: f[9],
    };
    let count = u64::from_le_bytes(next("value count")?);
    let body = bytes.len() / 8 - 13;
    if bytes.len() % 8 != 0 || body as u64 != count {
        return Err(Error::Checkpoint(format!(
            "{}: expected {count} values, found {} bytes of data",
            path.display(),
            bytes.len().saturating_sub(13 * 8)
        )));
    }
    let values = bytes[13 * 8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vector(tape: &mut Tape, v: &[f64]) -> Var {
        tape.constant(Tensor::vector(v.to_vec()))
    }

    #[test]
    fn zero_params_give_zero_output() {
        let mut p = GduParams::init(3, 2, &mut ChaCha8Rng::seed_from_u64(0));
        for t in p.tensors_mut() {
            t.data_mut().fill(0.0);
        }
        let mut tape = Tape::new();
        let vars = p.bind(&mut tape);
        let x = vector(&mut tape, &[1.0, -2.0, 3.0]);
        let z = vector(&mut tape, &[0.4, 0.1]);
        let t = vector(&mut tape, &[-0.3, 0.9]);
        let tr = gdu_forward_traced(&mut tape, x, z, t, &vars).unwrap();
        for gate in [tr.forget, tr.adjust, tr.select_g, tr.select_r] {
            assert_eq!(tape.value(gate).data(), &[0.5, 0.5]);
        }
        assert_eq!(tape.value(tr.output).data(), &[0.0, 0.0]);
    }

    #[test]
    fn zero_ports_reduce_to_single_transform() {
        let p = GduParams::init(3, 2, &mut ChaCha8Rng::seed_from_u64(5));
        let mut tape = Tape::new();
        let vars = p.bind(&mut tape);
        let x = vector(&mut tape, &[0.7, -0.2, 1.1]);
        let zero = vector(&mut tape, &[0.0, 0.0]);
        let h = gdu_forward(&mut tape, x, zero, zero, &vars).unwrap();
        let c = tape.concat(&[x, zero, zero]).unwrap();
        let pre = tape.affine(vars.w_combine, c, vars.b_combine).unwrap();
        let direct = tape.tanh(pre);
        for (a, b) in tape.value(h).data().iter().zip(tape.value(direct).data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_errors_name_the_matrix() {
        let p = GduParams::init(3, 2, &mut ChaCha8Rng::seed_from_u64(0));
        let mut tape = Tape::new();
        let vars = p.bind(&mut tape);
        let x = vector(&mut tape, &[1.0, 2.0]);
        let z = vector(&mut tape, &[0.0, 0.0]);
        let err = gdu_forward(&mut tape, x, z, z, &vars).unwrap_err().to_string();
        assert!(err.contains("W_f"), "{err}");
    }

    #[test]
    fn aggregate_examples() {
        let mut tape = Tape::new();
        let zero = vector(&mut tape, &[0.0, 0.0]);
        let a = vector(&mut tape, &[1.0, 0.0]);
        let b = vector(&mut tape, &[0.0, 1.0]);
        let c = vector(&mut tape, &[1.0, 2.0]);
        let states = [a, b, c];
        let m = aggregate_neighbors(&mut tape, &states, &[], zero).unwrap();
        assert_eq!(tape.value(m).data(), &[0.0, 0.0]);
        let m = aggregate_neighbors(&mut tape, &states, &[2], zero).unwrap();
        assert_eq!(tape.value(m).data(), &[1.0, 2.0]);
        let m = aggregate_neighbors(&mut tape, &states, &[0, 1], zero).unwrap();
        assert_eq!(tape.value(m).data(), &[0.5, 0.5]);
        assert!(aggregate_neighbors(&mut tape, &states, &[3], zero).is_err());
    }
}
