//! Fully connected Q-network with hand-written reverse-mode gradients.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Factorized Gaussian noise of a linear layer. The effective weight is
/// `w + σ_w ⊙ (f(ε_out) f(ε_in)ᵀ)`, the effective bias `b + σ_b ⊙ f(ε_out)`
/// with `f(x) = sgn(x) √|x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Noise {
    pub weight_sigma: Vec<f64>,
    pub bias_sigma: Vec<f64>,
    eps_in: Vec<f64>,
    eps_out: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub noise: Option<Noise>,
}

fn scale_noise(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

impl Linear {
    /// Uniform `±1/√inputs` initialization; noisy layers start with
    /// `σ = 0.5/√inputs` and zero noise.
    pub fn new(inputs: usize, outputs: usize, noisy: bool, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut draw =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-bound..=bound)).collect() };
        let weight = draw(inputs * outputs);
        let bias = draw(outputs);
        let noise = noisy.then(|| {
            let sigma = 0.5 / (inputs as f64).sqrt();
            Noise {
                weight_sigma: vec![sigma; inputs * outputs],
                bias_sigma: vec![sigma; outputs],
                eps_in: vec![0.0; inputs],
                eps_out: vec![0.0; outputs],
            }
        });
        Self {
            inputs,
            outputs,
            weight,
            bias,
            noise,
        }
    }

    pub fn from_parts(inputs: usize, weight: Vec<f64>, bias: Vec<f64>) -> Self {
        Self {
            inputs,
            outputs: bias.len(),
            weight,
            bias,
            noise: None,
        }
    }

    pub fn resample_noise(&mut self, rng: &mut impl Rng) {
        if let Some(n) = self.noise.as_mut() {
            for e in n.eps_in.iter_mut().chain(n.eps_out.iter_mut()) {
                *e = scale_noise(rng.sample(StandardNormal));
            }
        }
    }

    pub fn clear_noise(&mut self) {
        if let Some(n) = self.noise.as_mut() {
            n.eps_in.fill(0.0);
            n.eps_out.fill(0.0);
        }
    }

    fn effective_weight(&self, o: usize, i: usize) -> f64 {
        let k = o * self.inputs + i;
        match &self.noise {
            Some(n) => self.weight[k] + n.weight_sigma[k] * n.eps_out[o] * n.eps_in[i],
            None => self.weight[k],
        }
    }

    fn effective_bias(&self, o: usize) -> f64 {
        match &self.noise {
            Some(n) => self.bias[o] + n.bias_sigma[o] * n.eps_out[o],
            None => self.bias[o],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = o * self.inputs;
                let mut acc = self.effective_bias(o);
                match &self.noise {
                    None => {
                        for (w, xi) in self.weight[row..row + self.inputs].iter().zip(x) {
                            acc += w * xi;
                        }
                    }
                    Some(_) => {
                        for (i, xi) in x.iter().enumerate() {
                            acc += self.effective_weight(o, i) * xi;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Accumulates parameter gradients for upstream gradient `g` at input
    /// `x` into `grads` (weight, bias, then σ_w, σ_b when noisy) and returns
    /// the gradient with respect to `x`.
    fn backward(&self, x: &[f64], g: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &go) in g.iter().enumerate() {
            if go == 0.0 {
                continue;
            }
            let row = o * self.inputs;
            grads[1][o] += go;
            for (i, &xi) in x.iter().enumerate() {
                grads[0][row + i] += go * xi;
                dx[i] += go * self.effective_weight(o, i);
            }
            if let Some(n) = &self.noise {
                grads[3][o] += go * n.eps_out[o];
                for (i, &xi) in x.iter().enumerate() {
                    grads[2][row + i] += go * xi * n.eps_out[o] * n.eps_in[i];
                }
            }
        }
        dx
    }

    fn params(&self) -> Vec<&Vec<f64>> {
        let mut p = vec![&self.weight, &self.bias];
        if let Some(n) = &self.noise {
            p.push(&n.weight_sigma);
            p.push(&n.bias_sigma);
        }
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut p = vec![&mut self.weight, &mut self.bias];
        if let Some(n) = self.noise.as_mut() {
            p.push(&mut n.weight_sigma);
            p.push(&mut n.bias_sigma);
        }
        p
    }

    fn param_names(&self, prefix: &str) -> Vec<String> {
        let mut names = vec![format!("{prefix}.weight"), format!("{prefix}.bias")];
        if self.noise.is_some() {
            names.push(format!("{prefix}.weight_sigma"));
            names.push(format!("{prefix}.bias_sigma"));
        }
        names
    }
}

/// `Q_a = V + A_a − mean(A)`.
pub fn dueling_combine(value: f64, advantages: &[f64]) -> Vec<f64> {
    let mean = advantages.iter().sum::<f64>() / advantages.len() as f64;
    advantages.iter().map(|a| value + a - mean).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    Plain(Linear),
    Dueling { value: Linear, advantage: Linear },
}

/// Layer sizes and head options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub inputs: usize,
    pub hidden: Vec<usize>,
    pub outputs: usize,
    pub dueling: bool,
    pub noisy: bool,
}

/// Hidden ReLU layers followed by a plain or dueling linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub hidden: Vec<Linear>,
    pub head: Head,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of each hidden layer, then the input of the head.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Vec<f64>>,
}

impl QNetwork {
    pub fn new(arch: &Architecture, rng: &mut impl Rng) -> Self {
        let mut hidden = Vec::new();
        let mut width = arch.inputs;
        for &h in &arch.hidden {
            hidden.push(Linear::new(width, h, arch.noisy, rng));
            width = h;
        }
        let head = if arch.dueling {
            Head::Dueling {
                value: Linear::new(width, 1, arch.noisy, rng),
                advantage: Linear::new(width, arch.outputs, arch.noisy, rng),
            }
        } else {
            Head::Plain(Linear::new(width, arch.outputs, arch.noisy, rng))
        };
        Self { hidden, head }
    }

    pub fn architecture(&self) -> Architecture {
        let (outputs, dueling, noisy) = match &self.head {
            Head::Plain(l) => (l.outputs, false, l.noise.is_some()),
            Head::Dueling { advantage, .. } => (advantage.outputs, true, advantage.noise.is_some()),
        };
        Architecture {
            inputs: self.input_len(),
            hidden: self.hidden.iter().map(|l| l.outputs).collect(),
            outputs,
            dueling,
            noisy,
        }
    }

    pub fn input_len(&self) -> usize {
        match (self.hidden.first(), &self.head) {
            (Some(l), _) | (None, Head::Plain(l)) | (None, Head::Dueling { value: l, .. }) => {
                l.inputs
            }
        }
    }

    pub fn output_len(&self) -> usize {
        match &self.head {
            Head::Plain(l) => l.outputs,
            Head::Dueling { advantage, .. } => advantage.outputs,
        }
    }

    fn layers(&self) -> impl Iterator<Item = &Linear> {
        let head: Vec<&Linear> = match &self.head {
            Head::Plain(l) => vec![l],
            Head::Dueling { value, advantage } => vec![value, advantage],
        };
        self.hidden.iter().chain(head)
    }

    fn layers_mut(&mut self) -> Vec<&mut Linear> {
        let mut all: Vec<&mut Linear> = self.hidden.iter_mut().collect();
        match &mut self.head {
            Head::Plain(l) => all.push(l),
            Head::Dueling { value, advantage } => {
                all.push(value);
                all.push(advantage);
            }
        }
        all
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if x.len() != self.input_len() {
            return Err(Error::ShapeMismatch {
                expected: self.input_len(),
                actual: x.len(),
            });
        }
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(self.hidden.len() + 1),
            pre: Vec::with_capacity(self.hidden.len()),
        };
        let mut h = x.to_vec();
        for layer in &self.hidden {
            let z = layer.forward(&h);
            let next = z.iter().map(|v| v.max(0.0)).collect();
            cache.inputs.push(h);
            cache.pre.push(z);
            h = next;
        }
        let q = match &self.head {
            Head::Plain(l) => l.forward(&h),
            Head::Dueling { value, advantage } => {
                dueling_combine(value.forward(&h)[0], &advantage.forward(&h))
            }
        };
        cache.inputs.push(h);
        Ok((q, cache))
    }

    /// Accumulates the gradient of `Σ_a dq_a · Q_a` into `grads`.
    pub fn backward(&self, cache: &ForwardCache, dq: &[f64], grads: &mut [Vec<f64>]) {
        let head_input = cache.inputs.last().expect("head input cached");
        let split = self.hidden.iter().map(|l| l.params().len()).sum::<usize>();
        let (hidden_grads, head_grads) = grads.split_at_mut(split);
        let mut dh = match &self.head {
            Head::Plain(l) => l.backward(head_input, dq, head_grads),
            Head::Dueling { value, advantage } => {
                let total: f64 = dq.iter().sum();
                let mean = total / dq.len() as f64;
                let da: Vec<f64> = dq.iter().map(|g| g - mean).collect();
                let nv = value.params().len();
                let (vg, ag) = head_grads.split_at_mut(nv);
                let mut dh = value.backward(head_input, &[total], vg);
                for (d, e) in dh.iter_mut().zip(advantage.backward(head_input, &da, ag)) {
                    *d += e;
                }
                dh
            }
        };
        let mut end = split;
        for (k, layer) in self.hidden.iter().enumerate().rev() {
            let n = layer.params().len();
            let start = end - n;
            for (d, z) in dh.iter_mut().zip(&cache.pre[k]) {
                if *z <= 0.0 {
                    *d = 0.0;
                }
            }
            dh = layer.backward(&cache.inputs[k], &dh, &mut hidden_grads[start..end]);
            end = start;
        }
    }

    /// Every parameter tensor in a fixed order.
    pub fn params(&self) -> Vec<&Vec<f64>> {
        self.layers().flat_map(Linear::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers_mut()
            .into_iter()
            .flat_map(Linear::params_mut)
            .collect()
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (k, l) in self.hidden.iter().enumerate() {
            names.extend(l.param_names(&format!("hidden{k}")));
        }
        match &self.head {
            Head::Plain(l) => names.extend(l.param_names("head")),
            Head::Dueling { value, advantage } => {
                names.extend(value.param_names("value"));
                names.extend(advantage.param_names("advantage"));
            }
        }
        names
    }

    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params().iter().map(|p| vec![0.0; p.len()]).collect()
    }

    /// Copies every parameter from `other`, which must share the
    /// architecture. Noise samples are left untouched.
    pub fn copy_params_from(&mut self, other: &QNetwork) {
        for (dst, src) in self.params_mut().into_iter().zip(other.params()) {
            dst.copy_from_slice(src);
        }
    }

    pub fn resample_noise(&mut self, rng: &mut impl Rng) {
        for l in self.layers_mut() {
            l.resample_noise(rng);
        }
    }

    /// Switches noisy layers to their mean weights.
    pub fn clear_noise(&mut self) {
        for l in self.layers_mut() {
            l.clear_noise();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params()
            .iter()
            .all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Weighted mean Huber loss over a batch, where only the taken action's
    /// output enters the loss, with its gradient and per-sample TD errors
    /// `Q(s, a) − y`.
    pub fn loss_and_gradient(&self, batch: &[LossSample<'_>]) -> Result<LossGradient> {
        let mut grads = self.zero_grads();
        let mut loss = 0.0;
        let mut td_errors = Vec::with_capacity(batch.len());
        let scale = 1.0 / batch.len().max(1) as f64;
        for s in batch {
            let (q, cache) = self.forward_cached(s.input)?;
            if s.action >= q.len() {
                return Err(Error::ActionOutOfRange {
                    index: s.action,
                    count: q.len(),
                });
            }
            let delta = q[s.action] - s.target;
            td_errors.push(delta);
            loss += s.weight * huber(delta) * scale;
            let mut dq = vec![0.0; q.len()];
            dq[s.action] = s.weight * huber_grad(delta) * scale;
            self.backward(&cache, &dq, &mut grads);
        }
        Ok(LossGradient {
            loss,
            grads,
            td_errors,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LossSample<'a> {
    pub input: &'a [f64],
    pub action: usize,
    pub target: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct LossGradient {
    pub loss: f64,
    pub grads: Vec<Vec<f64>>,
    pub td_errors: Vec<f64>,
}

pub const HUBER_DELTA: f64 = 1.0;

pub fn huber(x: f64) -> f64 {
    if x.abs() <= HUBER_DELTA {
        0.5 * x * x
    } else {
        HUBER_DELTA * (x.abs() - 0.5 * HUBER_DELTA)
    }
}

pub fn huber_grad(x: f64) -> f64 {
    x.clamp(-HUBER_DELTA, HUBER_DELTA)
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
