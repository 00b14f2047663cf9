//! Adam optimizer with decoupled-from-nothing classic L2: weight decay is
//! added to the gradient before the moment updates, and tensors flagged
//! `weight_decay = false` (variable embeddings) are exempt.

use super::tensor::Params;

#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub t: u64,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl AdamState {
    pub fn new(learning_rate: f64, weight_decay: f64) -> Self {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay,
            t: 0,
            moments: Vec::new(),
        }
    }

    /// One bias-corrected Adam step over every tensor in the store.
    pub fn step(&mut self, params: &mut Params) {
        if self.moments.is_empty() {
            self.moments = params
                .iter()
                .map(|t| (vec![0.0; t.len()], vec![0.0; t.len()]))
                .collect();
        }
        assert_eq!(
            self.moments.len(),
            params.len(),
            "optimizer state does not match parameter store"
        );
        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        for (tensor, (m, v)) in params.iter_mut().zip(self.moments.iter_mut()) {
            let wd = if tensor.weight_decay { self.weight_decay } else { 0.0 };
            for i in 0..tensor.values.len() {
                let g = tensor.grad[i] + wd * tensor.values[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                tensor.values[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_grads_leave_params_unchanged() {
        let mut p = Params::new();
        p.add("w", &[2], vec![1.0, -2.0]);
        let mut adam = AdamState::new(0.1, 0.0);
        adam.step(&mut p);
        assert_eq!(p.iter().next().unwrap().values, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // Closed form: with constant grad g, m_hat/sqrt(v_hat) = sign(g)
        // on step one (up to epsilon), so |update| ~= lr.
        let mut p = Params::new();
        let id = p.add("w", &[1], vec![0.5]);
        p.get_mut(id).grad[0] = 3.0;
        let mut adam = AdamState::new(0.01, 0.0);
        adam.step(&mut p);
        let moved = 0.5 - p.get(id).values[0];
        assert!((moved - 0.01).abs() < 1e-6, "moved {moved}");
    }

    #[test]
    fn identical_grads_identical_updates() {
        let mut p = Params::new();
        let a = p.add("a", &[1], vec![1.0]);
        let b = p.add("b", &[1], vec![1.0]);
        p.get_mut(a).grad[0] = 0.7;
        p.get_mut(b).grad[0] = 0.7;
        let mut adam = AdamState::new(0.05, 0.0);
        adam.step(&mut p);
        assert_eq!(p.get(a).values[0].to_bits(), p.get(b).values[0].to_bits());
    }

    #[test]
    fn registration_order_does_not_change_trajectory() {
        let run = |order: [(&str, f64); 2]| {
            let mut p = Params::new();
            let ids: Vec<_> = order.iter().map(|(n, v)| p.add(n, &[1], vec![*v])).collect();
            let mut adam = AdamState::new(0.05, 0.01);
            for step in 0..10 {
                for id in &ids {
                    let sign = if p.get(*id).name == "a" { -0.5 } else { 0.5 };
                    p.get_mut(*id).grad[0] = (step as f64 + 1.0) * sign;
                }
                adam.step(&mut p);
                p.zero_grads();
            }
            order
                .iter()
                .map(|(n, _)| {
                    p.iter()
                        .find(|t| t.name == *n)
                        .unwrap()
                        .values[0]
                        .to_bits()
                })
                .collect::<Vec<_>>()
        };
        // Same (name, init, grad schedule) pairs, registered in both orders.
        let fwd = run([("a", 1.0), ("b", 2.0)]);
        let mut rev = run([("b", 2.0), ("a", 1.0)]);
        rev.reverse();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn no_decay_tensors_skip_weight_decay() {
        let mut p = Params::new();
        let a = p.add("a", &[1], vec![1.0]);
        let b = p.add("ve", &[1], vec![1.0]);
        p.set_no_decay(b);
        let mut adam = AdamState::new(0.01, 0.1);
        adam.step(&mut p);
        // a decays toward zero, the exempt tensor does not move.
        assert!(p.get(a).values[0] < 1.0);
        assert_eq!(p.get(b).values[0], 1.0);
    }

    #[test]
    fn step_counter_increments_by_one() {
        let mut p = Params::new();
        p.add("w", &[1], vec![0.0]);
        let mut adam = AdamState::new(0.01, 0.0);
        for expect in 1..=5 {
            adam.step(&mut p);
            assert_eq!(adam.t, expect);
        }
    }
}
