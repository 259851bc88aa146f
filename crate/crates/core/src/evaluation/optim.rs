/// Adam with decoupled weight decay; moments kept in f64.
#[derive(Clone, Debug)]
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamW {
    pub fn new(n: usize, lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn update(&mut self, i: usize, param: f64, grad: f64, c1: f64, c2: f64) -> f64 {
        self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad;
        self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad * grad;
        let m_hat = self.m[i] / c1;
        let v_hat = self.v[i] / c2;
        param - self.lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * param)
    }

    fn corrections(&mut self) -> (f64, f64) {
        self.t += 1;
        let t = self.t as i32;
        (1.0 - self.beta1.powi(t), 1.0 - self.beta2.powi(t))
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        let (c1, c2) = self.corrections();
        for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
            *p = self.update(i, *p, g, c1, c2);
        }
    }

    pub fn step_f32(&mut self, params: &mut [f32], grads: &[f32]) {
        assert_eq!(params.len(), self.m.len());
        let (c1, c2) = self.corrections();
        for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
            *p = self.update(i, *p as f64, g as f64, c1, c2) as f32;
        }
    }
}
