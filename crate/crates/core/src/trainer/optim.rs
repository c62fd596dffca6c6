/// AdamW with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamW {
    pub fn new(n_params: usize, weight_decay: f64) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        debug_assert_eq!(params.len(), grads.len());
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * *p);
        }
    }
}

/// Linear warmup to `base_lr` over the first `warmup_steps`, then linear
/// decay to zero at `max_steps`.
pub fn warmup_linear_decay_lr(base_lr: f64, step: u64, warmup_steps: u64, max_steps: u64) -> f64 {
    if max_steps == 0 {
        return 0.0;
    }
    if warmup_steps > 0 && step < warmup_steps {
        return base_lr * (step + 1) as f64 / warmup_steps as f64;
    }
    let remaining = (max_steps - step) as f64;
    let span = (max_steps - warmup_steps).max(1) as f64;
    base_lr * (remaining / span).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_leaves_params_unchanged() {
        let mut opt = AdamW::new(3, 0.01);
        let mut params = vec![1.0, -2.0, 0.5];
        let before = params.clone();
        opt.update(&mut params, &[0.3, -0.2, 0.9], 0.0);
        assert_eq!(params, before);
    }

    #[test]
    fn schedule_ramps_then_decays() {
        let base = 1e-3;
        let lr0 = warmup_linear_decay_lr(base, 0, 10, 100);
        let lr9 = warmup_linear_decay_lr(base, 9, 10, 100);
        let lr10 = warmup_linear_decay_lr(base, 10, 10, 100);
        let lr99 = warmup_linear_decay_lr(base, 99, 10, 100);
        assert!((lr0 - base / 10.0).abs() < 1e-15);
        assert!((lr9 - base).abs() < 1e-15);
        assert!(lr10 <= base && lr10 > lr99);
        assert!(lr99 > 0.0 && lr99 < base * 0.02);
    }

    #[test]
    fn adamw_descends_a_quadratic() {
        // f(w) = w^2, gradient 2w.
        let mut opt = AdamW::new(1, 0.0);
        let mut w = vec![3.0];
        for _ in 0..500 {
            let g = vec![2.0 * w[0]];
            opt.update(&mut w, &g, 0.05);
        }
        assert!(w[0].abs() < 0.1, "w = {}", w[0]);
    }
}
