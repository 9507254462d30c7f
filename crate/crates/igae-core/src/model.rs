//! The joint estimation network: a small convolutional backbone producing
//! a feature vector `f`, fed into three independent affine classification
//! heads (identity, gender, age group).
//!
//! Each backbone stage is a 3x3 convolution (stride 1, pad 1), ReLU and a
//! 2x2 max-pool of stride 2; global average pooling over the final spatial
//! grid yields `f`. Heads never interact: logits for task `t` are
//! `W_t f + b_t`. Compute and accumulation run in `f64`; parameter storage
//! may be quantized to `f32` (see [`Precision`]).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::image::{Pixels, CHANNELS};
use crate::rng::{stream, RngExt};
use crate::tensor::{Precision, Tensor};

const INIT_STREAM_TAG: u64 = 0x494e4954; // "INIT"

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid backbone spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("invalid class counts: {reason}")]
    InvalidCounts { reason: String },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

/// The three prediction tasks, in canonical head order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Identity,
    Gender,
    Age,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Identity, Task::Gender, Task::Age];

    pub fn index(self) -> usize {
        match self {
            Task::Identity => 0,
            Task::Gender => 1,
            Task::Age => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Identity => "identity",
            Task::Gender => "gender",
            Task::Age => "age",
        }
    }
}

/// Backbone architecture: input side length and output channels per stage.
/// The feature dimension equals the last stage's channel count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackboneSpec {
    pub input_size: usize,
    pub stage_channels: Vec<usize>,
}

impl Default for BackboneSpec {
    fn default() -> Self {
        BackboneSpec {
            input_size: 32,
            stage_channels: vec![8, 16, 32],
        }
    }
}

impl BackboneSpec {
    pub fn feature_dim(&self) -> usize {
        *self.stage_channels.last().unwrap_or(&0)
    }

    /// Spatial side length before each stage and after the last one.
    pub fn spatial_trace(&self) -> Vec<usize> {
        let mut side = self.input_size;
        let mut trace = vec![side];
        for _ in &self.stage_channels {
            side /= 2;
            trace.push(side);
        }
        trace
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |reason: String| Err(ModelError::InvalidSpec { reason });
        if self.stage_channels.is_empty() {
            return err("no stages".into());
        }
        if self.stage_channels.iter().any(|&c| c == 0) {
            return err("zero-channel stage".into());
        }
        let k = self.stage_channels.len();
        let divisor = 1usize << k;
        if self.input_size == 0 || self.input_size % divisor != 0 {
            return err(format!(
                "input size {} not divisible by 2^{k}",
                self.input_size
            ));
        }
        Ok(())
    }
}

/// Class counts per head, canonical order (identity, gender, age).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub identity: usize,
    pub gender: usize,
    pub age: usize,
}

impl ClassCounts {
    pub fn of(&self, task: Task) -> usize {
        match task {
            Task::Identity => self.identity,
            Task::Gender => self.gender,
            Task::Age => self.age,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for task in Task::ALL {
            if self.of(task) < 2 {
                return Err(ModelError::InvalidCounts {
                    reason: format!("{} head needs at least 2 classes", task.name()),
                });
            }
        }
        Ok(())
    }
}

/// One classification head: `weight` is `C x D`, `bias` is `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// One backbone stage: `weight` is `out x in x 3 x 3`, `bias` is `out`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// All trainable tensors. The same shape carries parameters, gradients and
/// Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensors {
    pub stages: Vec<StageParams>,
    pub heads: [HeadParams; 3],
}

impl ParamTensors {
    pub fn zeros_like(&self) -> Self {
        ParamTensors {
            stages: self
                .stages
                .iter()
                .map(|s| StageParams {
                    weight: s.weight.zeros_like(),
                    bias: s.bias.zeros_like(),
                })
                .collect(),
            heads: [0, 1, 2].map(|t| HeadParams {
                weight: self.heads[t].weight.zeros_like(),
                bias: self.heads[t].bias.zeros_like(),
            }),
        }
    }

    /// Tensors with their stable names, in canonical order (stages, then
    /// heads in task order; weight before bias).
    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (k, s) in self.stages.iter().enumerate() {
            out.push((format!("backbone.stage{k}.weight"), &s.weight));
            out.push((format!("backbone.stage{k}.bias"), &s.bias));
        }
        for task in Task::ALL {
            let h = &self.heads[task.index()];
            out.push((format!("head.{}.weight", task.name()), &h.weight));
            out.push((format!("head.{}.bias", task.name()), &h.bias));
        }
        out
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        for (k, s) in self.stages.iter_mut().enumerate() {
            out.push((format!("backbone.stage{k}.weight"), &mut s.weight));
            out.push((format!("backbone.stage{k}.bias"), &mut s.bias));
        }
        for (task, h) in Task::ALL.iter().zip(self.heads.iter_mut()) {
            out.push((format!("head.{}.weight", task.name()), &mut h.weight));
            out.push((format!("head.{}.bias", task.name()), &mut h.bias));
        }
        out
    }

    pub fn numel(&self) -> usize {
        self.named().iter().map(|(_, t)| t.numel()).sum()
    }
}

/// The full model: architecture, head sizes, tensors and their storage
/// precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub spec: BackboneSpec,
    pub counts: ClassCounts,
    pub precision: Precision,
    pub tensors: ParamTensors,
}

/// Fan-in scaled uniform init: weights uniform in `[-a, a]` with
/// `a = sqrt(6 / fan_in)`, biases zero. Deterministic in `seed`.
pub fn init_params(
    spec: &BackboneSpec,
    counts: &ClassCounts,
    seed: u64,
    precision: Precision,
) -> Result<ModelParams, ModelError> {
    spec.validate()?;
    counts.validate()?;
    let mut rng = stream(seed, &[INIT_STREAM_TAG]);
    let mut fill = |t: &mut Tensor, fan_in: usize| {
        let a = (6.0 / fan_in as f64).sqrt();
        for x in t.data_mut() {
            *x = precision.quantize(rng.uniform_in(-a, a));
        }
    };
    let mut stages = Vec::new();
    let mut in_ch = CHANNELS;
    for &out_ch in &spec.stage_channels {
        let mut weight = Tensor::zeros(&[out_ch, in_ch, 3, 3]);
        fill(&mut weight, in_ch * 9);
        stages.push(StageParams {
            weight,
            bias: Tensor::zeros(&[out_ch]),
        });
        in_ch = out_ch;
    }
    let d = spec.feature_dim();
    let heads = [counts.identity, counts.gender, counts.age].map(|c| {
        let mut weight = Tensor::zeros(&[c, d]);
        fill(&mut weight, d);
        HeadParams {
            weight,
            bias: Tensor::zeros(&[c]),
        }
    });
    Ok(ModelParams {
        spec: spec.clone(),
        counts: *counts,
        precision,
        tensors: ParamTensors { stages, heads },
    })
}

/// A batch of normalized images: `n` samples, channel-major, all with the
/// same side length.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelBatch {
    pub n: usize,
    pub side: usize,
    /// `n * 3 * side * side` values.
    pub data: Vec<f64>,
}

impl PixelBatch {
    pub fn from_pixels(samples: &[Pixels]) -> Result<Self, ModelError> {
        let side = samples.first().map(|p| p.height).unwrap_or(0);
        let mut data = Vec::with_capacity(samples.len() * CHANNELS * side * side);
        for p in samples {
            if p.height != side || p.width != side {
                return Err(ModelError::DimensionMismatch {
                    context: format!(
                        "batch mixes image sizes ({side} vs {}x{})",
                        p.height, p.width
                    ),
                });
            }
            data.extend_from_slice(&p.data);
        }
        Ok(PixelBatch {
            n: samples.len(),
            side,
            data,
        })
    }
}

/// Outputs of a forward pass: trunk features (`n x D`) and per-head
/// pre-softmax logits (`n x C_t`, indexed by [`Task`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub n: usize,
    pub features: Vec<f64>,
    pub logits: [Vec<f64>; 3],
}

impl ForwardPass {
    pub fn logit_row(&self, task: Task, sample: usize, classes: usize) -> &[f64] {
        &self.logits[task.index()][sample * classes..(sample + 1) * classes]
    }
}

/// Per-stage activations retained for the backward pass.
struct StageCache {
    /// Stage input, `n * in_ch * side * side`.
    input: Vec<f64>,
    /// Pre-activation conv output, same spatial size as the input.
    preact: Vec<f64>,
    /// For each pooled cell, the flat index of its max in the post-ReLU map.
    pool_src: Vec<u32>,
    in_ch: usize,
    out_ch: usize,
    side: usize,
}

/// Activation record needed to compute parameter gradients.
pub struct BackwardCache {
    stages: Vec<StageCache>,
    /// Side length of the final pooled grid feeding global average pooling.
    final_side: usize,
    features: Vec<f64>,
}

fn conv3x3_forward(
    input: &[f64],
    n: usize,
    in_ch: usize,
    out_ch: usize,
    side: usize,
    weight: &Tensor,
    bias: &Tensor,
) -> Vec<f64> {
    let w = weight.data();
    let b = bias.data();
    let plane = side * side;
    let mut out = vec![0.0; n * out_ch * plane];
    for s in 0..n {
        for o in 0..out_ch {
            let out_base = (s * out_ch + o) * plane;
            for y in 0..side {
                for x in 0..side {
                    let mut acc = b[o];
                    for i in 0..in_ch {
                        let in_base = (s * in_ch + i) * plane;
                        let w_base = (o * in_ch + i) * 9;
                        for ky in 0..3 {
                            let sy = y + ky;
                            if sy < 1 || sy > side {
                                continue;
                            }
                            let sy = sy - 1;
                            for kx in 0..3 {
                                let sx = x + kx;
                                if sx < 1 || sx > side {
                                    continue;
                                }
                                acc += w[w_base + ky * 3 + kx]
                                    * input[in_base + sy * side + (sx - 1)];
                            }
                        }
                    }
                    out[out_base + y * side + x] = acc;
                }
            }
        }
    }
    out
}

/// 2x2 max pool, stride 2. Returns pooled values and the flat source index
/// of each cell's maximum (first occurrence wins ties).
fn maxpool2(
    activ: &[f64],
    n: usize,
    ch: usize,
    side: usize,
) -> (Vec<f64>, Vec<u32>) {
    let half = side / 2;
    let mut out = vec![0.0; n * ch * half * half];
    let mut src = vec![0u32; out.len()];
    for s in 0..n {
        for c in 0..ch {
            let base = (s * ch + c) * side * side;
            let out_base = (s * ch + c) * half * half;
            for py in 0..half {
                for px in 0..half {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = 0usize;
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let idx = base + (2 * py + dy) * side + 2 * px + dx;
                            if activ[idx] > best {
                                best = activ[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out[out_base + py * half + px] = best;
                    src[out_base + py * half + px] = best_idx as u32;
                }
            }
        }
    }
    (out, src)
}

fn run(
    params: &ModelParams,
    batch: &PixelBatch,
    want_cache: bool,
) -> Result<(ForwardPass, Option<BackwardCache>), ModelError> {
    let spec = &params.spec;
    if batch.side != spec.input_size {
        return Err(ModelError::DimensionMismatch {
            context: format!(
                "batch side {} but backbone expects {}",
                batch.side, spec.input_size
            ),
        });
    }
    if batch.data.len() != batch.n * CHANNELS * batch.side * batch.side {
        return Err(ModelError::DimensionMismatch {
            context: "batch buffer length inconsistent with its shape".into(),
        });
    }
    let n = batch.n;
    let mut current = batch.data.clone();
    let mut in_ch = CHANNELS;
    let mut side = spec.input_size;
    let mut caches = Vec::new();
    for (k, &out_ch) in spec.stage_channels.iter().enumerate() {
        let stage = &params.tensors.stages[k];
        let preact = conv3x3_forward(&current, n, in_ch, out_ch, side, &stage.weight, &stage.bias);
        let activ: Vec<f64> = preact.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        let (pooled, pool_src) = maxpool2(&activ, n, out_ch, side);
        if want_cache {
            caches.push(StageCache {
                input: core::mem::take(&mut current),
                preact,
                pool_src,
                in_ch,
                out_ch,
                side,
            });
        }
        current = pooled;
        in_ch = out_ch;
        side /= 2;
    }
    // global average pool over the remaining grid
    let d = spec.feature_dim();
    let plane = side * side;
    let mut features = vec![0.0; n * d];
    for s in 0..n {
        for c in 0..d {
            let base = (s * d + c) * plane;
            let mut acc = 0.0;
            for p in 0..plane {
                acc += current[base + p];
            }
            features[s * d + c] = acc / plane as f64;
        }
    }
    let logits = [Task::Identity, Task::Gender, Task::Age].map(|task| {
        let head = &params.tensors.heads[task.index()];
        let classes = params.counts.of(task);
        let w = head.weight.data();
        let b = head.bias.data();
        let mut out = vec![0.0; n * classes];
        for s in 0..n {
            for c in 0..classes {
                let mut acc = b[c];
                for j in 0..d {
                    acc += w[c * d + j] * features[s * d + j];
                }
                out[s * classes + c] = acc;
            }
        }
        out
    });
    let pass = ForwardPass { n, features: features.clone(), logits };
    let cache = want_cache.then_some(BackwardCache {
        stages: caches,
        final_side: side,
        features,
    });
    Ok((pass, cache))
}

/// Forward pass without gradient bookkeeping.
pub fn forward(params: &ModelParams, batch: &PixelBatch) -> Result<ForwardPass, ModelError> {
    run(params, batch, false).map(|(pass, _)| pass)
}

/// Forward pass retaining the activations needed by [`backward`].
pub fn forward_train(
    params: &ModelParams,
    batch: &PixelBatch,
) -> Result<(ForwardPass, BackwardCache), ModelError> {
    run(params, batch, true).map(|(pass, cache)| (pass, cache.unwrap()))
}

/// Trunk features and per-head pre-softmax logits, for open-set feature
/// matching. Identical to [`forward`] by construction.
pub fn extract_features(
    params: &ModelParams,
    batch: &PixelBatch,
) -> Result<ForwardPass, ModelError> {
    forward(params, batch)
}

/// Exact reverse-mode gradients of a scalar loss with respect to every
/// parameter, given `d(loss)/d(logits)` for each head.
pub fn backward(
    params: &ModelParams,
    cache: &BackwardCache,
    dlogits: &[Vec<f64>; 3],
) -> Result<ParamTensors, ModelError> {
    let n = cache.features.len() / params.spec.feature_dim();
    let d = params.spec.feature_dim();
    for task in Task::ALL {
        let classes = params.counts.of(task);
        if dlogits[task.index()].len() != n * classes {
            return Err(ModelError::DimensionMismatch {
                context: format!("dlogits for {} head has wrong length", task.name()),
            });
        }
    }
    let mut grads = params.tensors.zeros_like();
    // heads, and the feature gradient accumulated across them
    let mut dfeat = vec![0.0; n * d];
    for task in Task::ALL {
        let classes = params.counts.of(task);
        let dl = &dlogits[task.index()];
        let head = &params.tensors.heads[task.index()];
        let gw = grads.heads[task.index()].weight.data_mut();
        let gb = grads.heads[task.index()].bias.data_mut();
        let w = head.weight.data();
        for s in 0..n {
            for c in 0..classes {
                let g = dl[s * classes + c];
                if g == 0.0 {
                    continue;
                }
                gb[c] += g;
                for j in 0..d {
                    gw[c * d + j] += g * cache.features[s * d + j];
                    dfeat[s * d + j] += g * w[c * d + j];
                }
            }
        }
    }
    // global average pool
    let plane = cache.final_side * cache.final_side;
    let mut dcurrent = vec![0.0; n * d * plane];
    for s in 0..n {
        for c in 0..d {
            let g = dfeat[s * d + c] / plane as f64;
            let base = (s * d + c) * plane;
            for p in 0..plane {
                dcurrent[base + p] = g;
            }
        }
    }
    // stages in reverse
    for (k, stage_cache) in cache.stages.iter().enumerate().rev() {
        let StageCache { input, preact, pool_src, in_ch, out_ch, side } = stage_cache;
        let (in_ch, out_ch, side) = (*in_ch, *out_ch, *side);
        // pool scatter, then the ReLU mask
        let mut dpre = vec![0.0; preact.len()];
        for (cell, &src) in pool_src.iter().enumerate() {
            let g = dcurrent[cell];
            if preact[src as usize] > 0.0 {
                dpre[src as usize] += g;
            }
        }
        // conv backward
        let stage = &params.tensors.stages[k];
        let w = stage.weight.data();
        let gw = grads.stages[k].weight.data_mut();
        let gb = grads.stages[k].bias.data_mut();
        let plane = side * side;
        let mut dinput = vec![0.0; n * in_ch * plane];
        for s in 0..n {
            for o in 0..out_ch {
                let out_base = (s * out_ch + o) * plane;
                for y in 0..side {
                    for x in 0..side {
                        let g = dpre[out_base + y * side + x];
                        if g == 0.0 {
                            continue;
                        }
                        gb[o] += g;
                        for i in 0..in_ch {
                            let in_base = (s * in_ch + i) * plane;
                            let w_base = (o * in_ch + i) * 9;
                            for ky in 0..3 {
                                let sy = y + ky;
                                if sy < 1 || sy > side {
                                    continue;
                                }
                                let sy = sy - 1;
                                for kx in 0..3 {
                                    let sx = x + kx;
                                    if sx < 1 || sx > side {
                                        continue;
                                    }
                                    let src = in_base + sy * side + (sx - 1);
                                    gw[w_base + ky * 3 + kx] += g * input[src];
                                    dinput[src] += g * w[w_base + ky * 3 + kx];
                                }
                            }
                        }
                    }
                }
            }
        }
        dcurrent = dinput;
    }
    Ok(grads)
}

/// Numerically stable softmax of one logit row.
pub fn softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> BackboneSpec {
        BackboneSpec { input_size: 8, stage_channels: vec![2, 3] }
    }

    fn counts() -> ClassCounts {
        ClassCounts { identity: 4, gender: 2, age: 6 }
    }

    fn random_batch(spec: &BackboneSpec, n: usize, seed: u64) -> PixelBatch {
        let mut rng = stream(seed, &[99]);
        let len = n * CHANNELS * spec.input_size * spec.input_size;
        PixelBatch {
            n,
            side: spec.input_size,
            data: (0..len).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        }
    }

    #[test]
    fn init_is_deterministic_and_biases_zero() {
        let a = init_params(&tiny_spec(), &counts(), 5, Precision::F64).unwrap();
        let b = init_params(&tiny_spec(), &counts(), 5, Precision::F64).unwrap();
        assert_eq!(a, b);
        for s in &a.tensors.stages {
            assert!(s.bias.iter().all(|&v| v == 0.0));
        }
        for h in &a.tensors.heads {
            assert!(h.bias.iter().all(|&v| v == 0.0));
        }
        let c = init_params(&tiny_spec(), &counts(), 6, Precision::F64).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let p = init_params(&tiny_spec(), &counts(), 1, Precision::F64).unwrap();
        let a = (6.0f64 / (CHANNELS as f64 * 9.0)).sqrt();
        assert!(p.tensors.stages[0].weight.iter().all(|&v| v.abs() <= a));
    }

    #[test]
    fn gender_head_shape_follows_class_count() {
        let p = init_params(&tiny_spec(), &counts(), 0, Precision::F64).unwrap();
        let d = tiny_spec().feature_dim();
        assert_eq!(p.tensors.heads[Task::Gender.index()].weight.dims(), &[2, d]);
        assert_eq!(p.tensors.heads[Task::Age.index()].weight.dims(), &[6, d]);
    }

    #[test]
    fn invalid_input_size_is_rejected() {
        let spec = BackboneSpec { input_size: 10, stage_channels: vec![2, 3] };
        assert!(matches!(
            init_params(&spec, &counts(), 0, Precision::F64),
            Err(ModelError::InvalidSpec { .. })
        ));
    }

    #[test]
    fn spatial_trace_halves_per_stage() {
        let spec = BackboneSpec { input_size: 32, stage_channels: vec![8, 16, 32] };
        assert_eq!(spec.spatial_trace(), vec![32, 16, 8, 4]);
        assert_eq!(spec.feature_dim(), 32);
    }

    #[test]
    fn zero_input_with_zero_biases_gives_zero_outputs() {
        let p = init_params(&tiny_spec(), &counts(), 3, Precision::F64).unwrap();
        let batch = PixelBatch {
            n: 2,
            side: 8,
            data: vec![0.0; 2 * CHANNELS * 64],
        };
        let pass = forward(&p, &batch).unwrap();
        assert!(pass.features.iter().all(|&v| v == 0.0));
        for t in Task::ALL {
            assert!(pass.logits[t.index()].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn forward_matches_feature_extraction() {
        let p = init_params(&tiny_spec(), &counts(), 3, Precision::F64).unwrap();
        let batch = random_batch(&tiny_spec(), 3, 17);
        let a = forward(&p, &batch).unwrap();
        let b = extract_features(&p, &batch).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn permuting_the_batch_permutes_outputs() {
        let spec = tiny_spec();
        let p = init_params(&spec, &counts(), 3, Precision::F64).unwrap();
        let batch = random_batch(&spec, 3, 21);
        let plane = CHANNELS * spec.input_size * spec.input_size;
        let perm = [2usize, 0, 1];
        let mut permuted = batch.clone();
        for (dst, &src) in perm.iter().enumerate() {
            permuted.data[dst * plane..(dst + 1) * plane]
                .copy_from_slice(&batch.data[src * plane..(src + 1) * plane]);
        }
        let a = forward(&p, &batch).unwrap();
        let b = forward(&p, &permuted).unwrap();
        let d = spec.feature_dim();
        for (dst, &src) in perm.iter().enumerate() {
            assert_eq!(
                &b.features[dst * d..(dst + 1) * d],
                &a.features[src * d..(src + 1) * d]
            );
            for t in Task::ALL {
                let c = counts().of(t);
                assert_eq!(
                    &b.logits[t.index()][dst * c..(dst + 1) * c],
                    &a.logits[t.index()][src * c..(src + 1) * c]
                );
            }
        }
    }

    #[test]
    fn heads_are_independent() {
        let p = init_params(&tiny_spec(), &counts(), 3, Precision::F64).unwrap();
        let batch = random_batch(&tiny_spec(), 2, 4);
        let before = forward(&p, &batch).unwrap();
        let mut perturbed = p.clone();
        for v in perturbed.tensors.heads[Task::Gender.index()].weight.data_mut() {
            *v += 0.37;
        }
        let after = forward(&perturbed, &batch).unwrap();
        assert_eq!(before.logits[Task::Identity.index()], after.logits[Task::Identity.index()]);
        assert_eq!(before.logits[Task::Age.index()], after.logits[Task::Age.index()]);
        assert_ne!(before.logits[Task::Gender.index()], after.logits[Task::Gender.index()]);
    }

    #[test]
    fn batch_side_mismatch_is_an_error() {
        let p = init_params(&tiny_spec(), &counts(), 0, Precision::F64).unwrap();
        let batch = PixelBatch { n: 1, side: 16, data: vec![0.0; CHANNELS * 256] };
        assert!(matches!(
            forward(&p, &batch),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn softmax_basics() {
        let p = softmax(&[0.0, 0.0]);
        assert_eq!(p, vec![0.5, 0.5]);
        let q = softmax(&[1000.0, 0.0]);
        assert!(q[0] > 1.0 - 1e-12 && q[1] < 1e-12);
        assert!(q.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let row = [0.3, -1.2, 2.5, 0.0];
        let shifted: Vec<f64> = row.iter().map(|v| v + 123.456).collect();
        let a = softmax(&row);
        let b = softmax(&shifted);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn named_tensors_are_unique_and_cover_everything() {
        let p = init_params(&tiny_spec(), &counts(), 0, Precision::F64).unwrap();
        let named = p.tensors.named();
        let mut names: Vec<_> = named.iter().map(|(n, _)| n.clone()).collect();
        let total = named.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), total);
        assert_eq!(total, 2 * 2 + 2 * 3); // two stages + three heads
    }
}
