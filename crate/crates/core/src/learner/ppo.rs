use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gae::normalize;
use super::network::{log_softmax, PolicyNet};
use super::OptimConfig;
use crate::error::{Error, Result};

/// Flattened experience from all workers for one update.
#[derive(Clone, Debug, Default)]
pub struct TrainBatch {
    pub obs_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl TrainBatch {
    pub fn new(obs_dim: usize) -> Self {
        Self {
            obs_dim,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn push(&mut self, obs: &[f64], action: usize, log_prob: f64, advantage: f64, ret: f64) {
        debug_assert_eq!(obs.len(), self.obs_dim);
        self.obs.extend_from_slice(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.advantages.push(advantage);
        self.returns.push(ret);
    }

    pub fn obs_at(&self, i: usize) -> &[f64] {
        &self.obs[i * self.obs_dim..(i + 1) * self.obs_dim]
    }
}

/// Coefficients of the clipped surrogate objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossCoefficients {
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl From<&OptimConfig> for LossCoefficients {
    fn from(c: &OptimConfig) -> Self {
        Self {
            clip: c.clip,
            value_coef: c.value_coef,
            entropy_coef: c.entropy_coef,
        }
    }
}

/// Minibatch means of the loss and its parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

impl LossTerms {
    fn is_finite(&self) -> bool {
        self.total.is_finite() && self.policy.is_finite() && self.value.is_finite() && self.entropy.is_finite()
    }
}

/// Mean clipped-surrogate loss over the samples `idx` of `batch`, using the
/// given per-sample `advantages` (aligned with `idx`).
///
/// `loss = -min(r A, clip(r, 1-e, 1+e) A) + c_v (V - R)^2 - c_e H(pi)`.
/// When `grad` is given, the exact gradient is accumulated into it.
pub fn ppo_loss(
    net: &PolicyNet,
    params: &[f64],
    batch: &TrainBatch,
    idx: &[usize],
    advantages: &[f64],
    coef: LossCoefficients,
    mut grad: Option<&mut [f64]>,
) -> LossTerms {
    assert_eq!(idx.len(), advantages.len());
    let inv_b = 1.0 / idx.len() as f64;
    let n_actions = net.shape().n_actions;
    let mut cache = net.new_cache();
    let mut scratch = Vec::new();
    let mut d_logits = vec![0.0; n_actions];
    let mut terms = LossTerms::default();
    let (lo, hi) = (1.0 - coef.clip, 1.0 + coef.clip);

    for (&i, &adv) in idx.iter().zip(advantages) {
        net.forward_cached(params, batch.obs_at(i), &mut cache);
        let logp = log_softmax(cache.logits());
        let a = batch.actions[i];
        let log_ratio = logp[a] - batch.log_probs[i];
        let ratio = log_ratio.exp();
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(lo, hi) * adv;
        let inside = ratio > lo && ratio < hi;
        let policy = -unclipped.min(clipped);
        let entropy = -logp.iter().map(|l| l.exp() * l).sum::<f64>();
        let v_err = cache.value() - batch.returns[i];

        terms.policy += policy;
        terms.value += v_err * v_err;
        terms.entropy += entropy;
        terms.approx_kl += (ratio - 1.0) - log_ratio;
        if !inside {
            terms.clip_fraction += 1.0;
        }

        if let Some(g) = grad.as_deref_mut() {
            let dmin_dratio = if unclipped < clipped || inside { adv } else { 0.0 };
            let d_logp_a = -dmin_dratio * ratio;
            for (k, d) in d_logits.iter_mut().enumerate() {
                let p = logp[k].exp();
                let onehot = if k == a { 1.0 } else { 0.0 };
                let d_policy = d_logp_a * (onehot - p);
                let d_entropy = coef.entropy_coef * p * (logp[k] + entropy);
                *d = (d_policy + d_entropy) * inv_b;
            }
            let d_value = 2.0 * coef.value_coef * v_err * inv_b;
            net.backward(params, &cache, &d_logits, d_value, g, &mut scratch);
        }
    }

    terms.policy *= inv_b;
    terms.value *= inv_b;
    terms.entropy *= inv_b;
    terms.approx_kl *= inv_b;
    terms.clip_fraction *= inv_b;
    terms.total = terms.policy + coef.value_coef * terms.value - coef.entropy_coef * terms.entropy;
    terms
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Scales `grad` so its global L2 norm is at most `max_norm`; returns the norm
/// before clipping.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
}

/// Clipped-surrogate update: `epochs` passes over shuffled minibatches, each
/// with per-minibatch advantage normalization, global-norm gradient clipping
/// and an Adam step.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &PolicyNet,
    params: &mut [f64],
    adam: &mut Adam,
    batch: &TrainBatch,
    cfg: &OptimConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    if batch.is_empty() {
        return Err(Error::config("empty training batch"));
    }
    let coef = LossCoefficients::from(cfg);
    let n = batch.len();
    let n_mb = cfg.minibatches.clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; net.n_params()];
    let mut stats = UpdateStats::default();
    let mut count = 0.0;

    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        for mb in 0..n_mb {
            let idx = &order[mb * n / n_mb..(mb + 1) * n / n_mb];
            let mut adv: Vec<f64> = idx.iter().map(|&i| batch.advantages[i]).collect();
            if adv.len() > 1 {
                normalize(&mut adv);
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            let terms = ppo_loss(net, params, batch, idx, &adv, coef, Some(&mut grad));
            if !terms.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    minibatch: mb,
                    detail: format!("{terms:?}"),
                });
            }
            let norm = clip_grad_norm(&mut grad, cfg.grad_norm_clip);
            adam.step(params, &grad);

            stats.policy_loss += terms.policy;
            stats.value_loss += terms.value;
            stats.entropy += terms.entropy;
            stats.approx_kl += terms.approx_kl;
            stats.clip_fraction += terms.clip_fraction;
            stats.grad_norm += norm;
            count += 1.0;
        }
    }
    if count > 0.0 {
        stats.policy_loss /= count;
        stats.value_loss /= count;
        stats.entropy /= count;
        stats.approx_kl /= count;
        stats.clip_fraction /= count;
        stats.grad_norm /= count;
    }
    Ok(stats)
}

/// Draws an index from the categorical distribution with log-probabilities
/// `logp`.
pub fn sample_categorical<R: Rng + ?Sized>(logp: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, l) in logp.iter().enumerate() {
        acc += l.exp();
        if u < acc {
            return k;
        }
    }
    // Rounding left a sliver of mass past the last bucket.
    logp.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty distribution")
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
        .0
}

/// Samples an action; returns `(action, log_prob, value)`.
pub fn act<R: Rng + ?Sized>(net: &PolicyNet, params: &[f64], obs: &[f64], rng: &mut R) -> Result<(usize, f64, f64)> {
    let (logits, value) = net.forward(params, obs)?;
    let logp = log_softmax(&logits);
    let a = sample_categorical(&logp, rng);
    Ok((a, logp[a], value))
}

/// Mode of the policy distribution.
pub fn act_greedy(net: &PolicyNet, params: &[f64], obs: &[f64]) -> Result<usize> {
    Ok(argmax(&net.logits(params, obs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::NetworkShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_net() -> PolicyNet {
        PolicyNet::new(NetworkShape {
            obs_dim: 3,
            n_actions: 3,
            hidden: vec![4, 4],
        })
        .unwrap()
    }

    fn batch_for(net: &PolicyNet, params: &[f64], rng: &mut ChaCha8Rng, n: usize) -> TrainBatch {
        let mut b = TrainBatch::new(3);
        for _ in 0..n {
            let obs: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, lp, _) = act(net, params, &obs, rng).unwrap();
            b.push(&obs, a, lp, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        b
    }

    #[test]
    fn uniform_logits_sample_uniformly() {
        let logp = vec![(1.0f64 / 6.0).ln(); 6];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 6];
        for _ in 0..10_000 {
            counts[sample_categorical(&logp, &mut rng)] += 1;
        }
        // 1/6 of 10^4 with binomial sd ~37; allow about 4.5 sd.
        for c in counts {
            assert!((c as f64 - 10_000.0 / 6.0).abs() < 170.0, "{counts:?}");
        }
    }

    #[test]
    fn dominant_logit_always_sampled() {
        let logp = log_softmax(&[50.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(logp[0].exp() >= 1.0 - 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!((0..10_000).all(|_| sample_categorical(&logp, &mut rng) == 0));
    }

    #[test]
    fn act_is_reproducible() {
        let net = small_net();
        let params = net.init(&mut ChaCha8Rng::seed_from_u64(0));
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|i| act(&net, &params, &[0.1 * i as f64, 0.2, -0.3], &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
        assert!(act(&net, &params, &[f64::NAN, 0.0, 0.0], &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn only_entropy_moves_params_with_zero_advantage_and_exact_values() {
        let net = small_net();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = net.init(&mut rng);
        let mut batch = batch_for(&net, &params, &mut rng, 16);
        for i in 0..batch.len() {
            batch.returns[i] = net.value(&params, batch.obs_at(i)).unwrap();
        }
        let idx: Vec<usize> = (0..batch.len()).collect();
        let zeros = vec![0.0; idx.len()];
        let coef = LossCoefficients {
            clip: 0.1,
            value_coef: 0.5,
            entropy_coef: 0.0,
        };
        let mut g = vec![0.0; net.n_params()];
        ppo_loss(&net, &params, &batch, &idx, &zeros, coef, Some(&mut g));
        assert!(g.iter().all(|&v| v == 0.0));
        let mut g = vec![0.0; net.n_params()];
        ppo_loss(
            &net,
            &params,
            &batch,
            &idx,
            &zeros,
            LossCoefficients {
                entropy_coef: 0.01,
                ..coef
            },
            Some(&mut g),
        );
        assert!(g.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn zero_clip_kills_policy_gradient_at_unit_ratio() {
        let net = small_net();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = net.init(&mut rng);
        let batch = batch_for(&net, &params, &mut rng, 8);
        let idx: Vec<usize> = (0..batch.len()).collect();
        let adv: Vec<f64> = (0..8).map(|i| i as f64 - 3.5).collect();
        let coef = LossCoefficients {
            clip: 0.0,
            value_coef: 0.0,
            entropy_coef: 0.0,
        };
        let mut g = vec![0.0; net.n_params()];
        ppo_loss(&net, &params, &batch, &idx, &adv, coef, Some(&mut g));
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut adam = Adam::new(2, 0.1);
        let mut p = vec![1.0, -1.0];
        adam.step(&mut p, &[3.0, -0.5]);
        assert!((p[0] - 0.9).abs() < 1e-6);
        assert!((p[1] + 0.9).abs() < 1e-6);
    }

    #[test]
    fn grad_norm_clipping() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_grad_norm(&mut g, 0.5), 5.0);
        assert!((g[0] - 0.3).abs() < 1e-12 && (g[1] - 0.4).abs() < 1e-12);
        let mut small = vec![0.1, 0.1];
        clip_grad_norm(&mut small, 0.5);
        assert_eq!(small, vec![0.1, 0.1]);
    }

    #[test]
    fn value_regression_decreases_monotonically() {
        let net = small_net();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut params = net.init(&mut rng);
        let batch = batch_for(&net, &params, &mut rng, 64);
        let cfg = OptimConfig {
            epochs: 1,
            minibatches: 1,
            clip: 0.1,
            value_coef: 0.5,
            entropy_coef: 0.0,
            learning_rate: 1e-3,
            ..OptimConfig::default()
        };
        let mut zero_policy = batch.clone();
        zero_policy.advantages.iter_mut().for_each(|a| *a = 0.0);
        let mut adam = Adam::new(net.n_params(), cfg.learning_rate);
        let idx: Vec<usize> = (0..batch.len()).collect();
        let zeros = vec![0.0; idx.len()];
        let coef = LossCoefficients::from(&cfg);
        let mut prev = ppo_loss(&net, &params, &zero_policy, &idx, &zeros, coef, None).value;
        for _ in 0..30 {
            ppo_update(&net, &mut params, &mut adam, &zero_policy, &cfg, &mut rng).unwrap();
            let v = ppo_loss(&net, &params, &zero_policy, &idx, &zeros, coef, None).value;
            assert!(v < prev, "{v} !< {prev}");
            prev = v;
        }
    }

    #[test]
    fn nan_in_batch_aborts_update() {
        let net = small_net();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = net.init(&mut rng);
        let mut batch = batch_for(&net, &params, &mut rng, 8);
        batch.returns[3] = f64::NAN;
        let mut adam = Adam::new(net.n_params(), 3e-4);
        let err = ppo_update(&net, &mut params, &mut adam, &batch, &OptimConfig::default(), &mut rng);
        assert!(matches!(err, Err(Error::NonFiniteLoss { .. })));
    }
}
