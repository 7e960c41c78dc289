//! Scalar reference implementations and fixtures shared by the integration
//! and acceptance targets. Nothing here touches the tape: every oracle is a
//! plain loop over `f64` slices.

#![allow(dead_code)]

use credence::features::HfluParams;
use credence::gdu::GduParams;
use credence::graph::{CredLabel, Hsn};
use credence::numgrad::Tensor;
use rand::Rng;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `W v + b` for a row-major `rows × cols` matrix.
pub fn matvec(w: &Tensor, v: &[f64], b: &Tensor) -> Vec<f64> {
    let (rows, cols) = (w.rows(), w.cols());
    assert_eq!(cols, v.len(), "oracle matvec width");
    (0..rows)
        .map(|i| {
            let row = &w.data()[i * cols..(i + 1) * cols];
            let mut acc = b.data()[i];
            for (wij, vj) in row.iter().zip(v) {
                acc += wij * vj;
            }
            acc
        })
        .collect()
}

fn cat(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Gate values and output of one scalar GDU evaluation.
pub struct GduOracle {
    pub f: Vec<f64>,
    pub e: Vec<f64>,
    pub g: Vec<f64>,
    pub r: Vec<f64>,
    pub h: Vec<f64>,
}

/// Direct transcription of the unit: four gates on `[x; z; t]`, then the
/// four-term weighted sum of `tanh(W_u [x; z'; t'] + b_u)`.
pub fn gdu_oracle(p: &GduParams, x: &[f64], z: &[f64], t: &[f64]) -> GduOracle {
    let c = cat(&[x, z, t]);
    let f: Vec<f64> = matvec(&p.w_forget, &c, &p.b_forget).into_iter().map(sigmoid).collect();
    let e: Vec<f64> = matvec(&p.w_adjust, &c, &p.b_adjust).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = matvec(&p.w_select_g, &c, &p.b_select_g).into_iter().map(sigmoid).collect();
    let r: Vec<f64> = matvec(&p.w_select_r, &c, &p.b_select_r).into_iter().map(sigmoid).collect();
    let zt: Vec<f64> = f.iter().zip(z).map(|(a, b)| a * b).collect();
    let tt: Vec<f64> = e.iter().zip(t).map(|(a, b)| a * b).collect();
    let u = |zp: &[f64], tp: &[f64]| -> Vec<f64> {
        matvec(&p.w_combine, &cat(&[x, zp, tp]), &p.b_combine)
            .into_iter()
            .map(f64::tanh)
            .collect()
    };
    let (u1, u2, u3, u4) = (u(&zt, &tt), u(z, &tt), u(&zt, t), u(z, t));
    let h = (0..g.len())
        .map(|i| {
            let (gi, ri) = (g[i], r[i]);
            gi * ri * u1[i]
                + (1.0 - gi) * ri * u2[i]
                + gi * (1.0 - ri) * u3[i]
                + (1.0 - gi) * (1.0 - ri) * u4[i]
        })
        .collect();
    GduOracle { f, e, g, r, h }
}

/// Step-by-step GRU over the real tokens, summed hidden states, sigmoid
/// fusion.
pub fn latent_oracle(p: &HfluParams, tokens: &[usize]) -> Vec<f64> {
    let embed = p.embedding.cols();
    let hidden = p.gru.w_update.rows();
    let mut h = vec![0.0; hidden];
    let mut total = vec![0.0; hidden];
    for &tok in tokens {
        let x = &p.embedding.data()[tok * embed..(tok + 1) * embed];
        let xh = cat(&[x, &h]);
        let z: Vec<f64> = matvec(&p.gru.w_update, &xh, &p.gru.b_update).into_iter().map(sigmoid).collect();
        let r: Vec<f64> = matvec(&p.gru.w_reset, &xh, &p.gru.b_reset).into_iter().map(sigmoid).collect();
        let rh: Vec<f64> = r.iter().zip(&h).map(|(a, b)| a * b).collect();
        let cand: Vec<f64> = matvec(&p.gru.w_candidate, &cat(&[x, &rh]), &p.gru.b_candidate)
            .into_iter()
            .map(f64::tanh)
            .collect();
        for i in 0..hidden {
            h[i] = (1.0 - z[i]) * h[i] + z[i] * cand[i];
            total[i] += h[i];
        }
    }
    matvec(&p.fusion_w, &total, &p.fusion_b).into_iter().map(sigmoid).collect()
}

pub fn uniform<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Unit with every weight and bias drawn from `U(-scale, scale)`.
pub fn random_gdu<R: Rng>(rng: &mut R, input: usize, state: usize, scale: f64) -> GduParams {
    let mut p = GduParams::init(input, state, rng);
    for t in [
        &mut p.w_forget,
        &mut p.b_forget,
        &mut p.w_adjust,
        &mut p.b_adjust,
        &mut p.w_select_g,
        &mut p.b_select_g,
        &mut p.w_select_r,
        &mut p.b_select_r,
        &mut p.w_combine,
        &mut p.b_combine,
    ] {
        for v in t.data_mut() {
            *v = rng.random_range(-scale..scale);
        }
    }
    p
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Three articles, two creators, two subjects. `a3` is tagged with both
/// subjects and shares creator `u1` with `a1`.
pub fn three_article_graph() -> Hsn {
    let mut b = Hsn::builder();
    b.article("a1", "tax cuts help the economy grow", CredLabel::True)
        .article("a2", "obamacare gun ban destroys jobs", CredLabel::False)
        .article("a3", "gun laws and tax rates both rose", CredLabel::HalfTrue)
        .creator("u1", "senator from ohio", None)
        .creator("u2", "talk radio host", None)
        .subject("s1", "economy and taxes", None)
        .subject("s2", "guns and public safety", None)
        .authorship("a1", "u1")
        .authorship("a2", "u2")
        .authorship("a3", "u1")
        .subject_link("a1", "s1")
        .subject_link("a2", "s2")
        .subject_link("a3", "s1")
        .subject_link("a3", "s2");
    b.build().expect("fixture is valid")
}
