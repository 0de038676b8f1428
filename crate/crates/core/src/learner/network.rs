use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input, hidden and output sizes of the actor and critic towers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub obs_dim: usize,
    pub n_actions: usize,
    pub hidden: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Dense {
    fan_in: usize,
    fan_out: usize,
    /// Row-major `fan_out x fan_in` weights start here.
    w: usize,
    b: usize,
}

impl Dense {
    fn forward(&self, params: &[f64], x: &[f64], out: &mut [f64]) {
        let w = &params[self.w..self.w + self.fan_in * self.fan_out];
        let b = &params[self.b..self.b + self.fan_out];
        for (o, out_o) in out.iter_mut().enumerate() {
            let row = &w[o * self.fan_in..(o + 1) * self.fan_in];
            *out_o = b[o] + row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
        }
    }
}

#[derive(Clone, Debug)]
struct Tower {
    layers: Vec<Dense>,
}

/// Activations of one tower for one input, kept for the backward pass.
#[derive(Clone, Debug, Default)]
pub(crate) struct TowerCache {
    /// `acts[0]` is the input; `acts[k]` the output of layer `k - 1`.
    acts: Vec<Vec<f64>>,
}

impl TowerCache {
    pub(crate) fn output(&self) -> &[f64] {
        self.acts.last().expect("forward ran")
    }
}

impl Tower {
    fn build(sizes: &[usize], offset: &mut usize) -> Self {
        let layers = sizes
            .windows(2)
            .map(|w| {
                let d = Dense {
                    fan_in: w[0],
                    fan_out: w[1],
                    w: *offset,
                    b: *offset + w[0] * w[1],
                };
                *offset += w[0] * w[1] + w[1];
                d
            })
            .collect();
        Self { layers }
    }

    fn new_cache(&self) -> TowerCache {
        let mut acts = vec![vec![0.0; self.layers[0].fan_in]];
        acts.extend(self.layers.iter().map(|l| vec![0.0; l.fan_out]));
        TowerCache { acts }
    }

    fn forward(&self, params: &[f64], input: &[f64], cache: &mut TowerCache) {
        cache.acts[0].copy_from_slice(input);
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let (head, tail) = cache.acts.split_at_mut(k + 1);
            let out = &mut tail[0];
            layer.forward(params, &head[k], out);
            if k < last {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
        }
    }

    /// Accumulates `d loss / d params` into `grad` given `d loss / d output`.
    fn backward(&self, params: &[f64], cache: &TowerCache, d_out: &[f64], grad: &mut [f64], scratch: &mut Vec<f64>) {
        let mut delta = d_out.to_vec();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.acts[k];
            for o in 0..layer.fan_out {
                let d = delta[o];
                grad[layer.b + o] += d;
                if d != 0.0 {
                    let row = &mut grad[layer.w + o * layer.fan_in..layer.w + (o + 1) * layer.fan_in];
                    row.iter_mut().zip(input).for_each(|(g, x)| *g += d * x);
                }
            }
            if k == 0 {
                break;
            }
            scratch.clear();
            scratch.resize(layer.fan_in, 0.0);
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &params[layer.w + o * layer.fan_in..layer.w + (o + 1) * layer.fan_in];
                scratch.iter_mut().zip(row).for_each(|(s, w)| *s += w * d);
            }
            // tanh'(z) = 1 - a^2
            delta.clear();
            delta.extend(scratch.iter().zip(input).map(|(s, a)| s * (1.0 - a * a)));
        }
    }
}

/// Separate actor (categorical logits) and critic (scalar value) towers over
/// one flat parameter vector.
#[derive(Clone, Debug)]
pub struct PolicyNet {
    shape: NetworkShape,
    actor: Tower,
    critic: Tower,
    n_params: usize,
}

/// Cached forward pass of both towers.
#[derive(Clone, Debug, Default)]
pub(crate) struct ForwardCache {
    pub(crate) actor: TowerCache,
    pub(crate) critic: TowerCache,
}

impl ForwardCache {
    pub(crate) fn logits(&self) -> &[f64] {
        self.actor.output()
    }

    pub(crate) fn value(&self) -> f64 {
        self.critic.output()[0]
    }
}

impl PolicyNet {
    pub fn new(shape: NetworkShape) -> Result<Self> {
        if shape.obs_dim == 0 || shape.n_actions < 2 || shape.hidden.iter().any(|&h| h == 0) {
            return Err(Error::config(format!("invalid network shape {shape:?}")));
        }
        let mut offset = 0;
        let mut sizes = vec![shape.obs_dim];
        sizes.extend(&shape.hidden);
        sizes.push(shape.n_actions);
        let actor = Tower::build(&sizes, &mut offset);
        *sizes.last_mut().expect("non-empty") = 1;
        let critic = Tower::build(&sizes, &mut offset);
        Ok(Self {
            shape,
            actor,
            critic,
            n_params: offset,
        })
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Scaled Gaussian initialization with zero biases. The policy output layer
    /// is shrunk so the initial policy is close to uniform.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = vec![0.0; self.n_params];
        for (tower, out_gain) in [(&self.actor, 0.01), (&self.critic, 1.0)] {
            let last = tower.layers.len() - 1;
            for (k, l) in tower.layers.iter().enumerate() {
                let gain = if k == last { out_gain } else { 1.0 };
                let scale = gain / (l.fan_in as f64).sqrt();
                for w in &mut params[l.w..l.w + l.fan_in * l.fan_out] {
                    let z: f64 = StandardNormal.sample(rng);
                    *w = z * scale;
                }
            }
        }
        params
    }

    pub(crate) fn new_cache(&self) -> ForwardCache {
        ForwardCache {
            actor: self.actor.new_cache(),
            critic: self.critic.new_cache(),
        }
    }

    pub(crate) fn forward_cached(&self, params: &[f64], obs: &[f64], cache: &mut ForwardCache) {
        self.actor.forward(params, obs, &mut cache.actor);
        self.critic.forward(params, obs, &mut cache.critic);
    }

    /// Logits and value for one observation.
    pub fn forward(&self, params: &[f64], obs: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check_obs(obs)?;
        let mut cache = self.new_cache();
        self.forward_cached(params, obs, &mut cache);
        Ok((cache.logits().to_vec(), cache.value()))
    }

    pub fn value(&self, params: &[f64], obs: &[f64]) -> Result<f64> {
        self.check_obs(obs)?;
        let mut cache = self.critic.new_cache();
        self.critic.forward(params, obs, &mut cache);
        Ok(cache.output()[0])
    }

    pub fn logits(&self, params: &[f64], obs: &[f64]) -> Result<Vec<f64>> {
        self.check_obs(obs)?;
        let mut cache = self.actor.new_cache();
        self.actor.forward(params, obs, &mut cache);
        Ok(cache.output().to_vec())
    }

    pub(crate) fn backward(
        &self,
        params: &[f64],
        cache: &ForwardCache,
        d_logits: &[f64],
        d_value: f64,
        grad: &mut [f64],
        scratch: &mut Vec<f64>,
    ) {
        self.actor.backward(params, &cache.actor, d_logits, grad, scratch);
        self.critic.backward(params, &cache.critic, &[d_value], grad, scratch);
    }

    fn check_obs(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.shape.obs_dim {
            return Err(Error::DimensionMismatch {
                expected: self.shape.obs_dim,
                got: obs.len(),
            });
        }
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(())
    }
}

/// Numerically stable `log softmax`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_count() {
        let net = PolicyNet::new(NetworkShape {
            obs_dim: 7,
            n_actions: 6,
            hidden: vec![64, 64],
        })
        .unwrap();
        let actor = 7 * 64 + 64 + 64 * 64 + 64 + 64 * 6 + 6;
        let critic = 7 * 64 + 64 + 64 * 64 + 64 + 64 + 1;
        assert_eq!(net.n_params(), actor + critic);
    }

    #[test]
    fn forward_is_deterministic_and_checks_input() {
        let net = PolicyNet::new(NetworkShape {
            obs_dim: 3,
            n_actions: 4,
            hidden: vec![5],
        })
        .unwrap();
        let p = net.init(&mut ChaCha8Rng::seed_from_u64(1));
        let a = net.forward(&p, &[0.1, 0.2, 0.3]).unwrap();
        let b = net.forward(&p, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.len(), 4);
        assert!(net.forward(&p, &[0.1, 0.2]).is_err());
        assert!(net.forward(&p, &[0.1, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn log_softmax_normalizes() {
        let l = log_softmax(&[1.0, 2.0, 3.0, 1000.0]);
        let total: f64 = l.iter().map(|v| v.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(l.iter().all(|v| v.is_finite()));
    }
}
