//! Weight tensors of the graph model.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

pub const TYPE_EMB: usize = 0;
pub const DATASET_EMB: usize = 1;
pub const MSG_SELF: usize = 2;
pub const MSG_NBR: usize = 3;
pub const MSG_DIR: usize = 4;
pub const MSG_B1: usize = 5;
pub const MSG_W2: usize = 6;
pub const MSG_B2: usize = 7;
pub const GRU_WI: usize = 8;
pub const GRU_BI: usize = 9;
pub const GRU_WH: usize = 10;
pub const GRU_BH: usize = 11;
pub const GATE_W: usize = 12;
pub const GATE_B: usize = 13;
pub const PROJ_W: usize = 14;
pub const PROJ_B: usize = 15;
pub const ADDNODE_W: usize = 16;
pub const ADDNODE_B: usize = 17;
pub const ADDEDGE_W: usize = 18;
pub const ADDEDGE_B: usize = 19;
pub const PICK_W: usize = 20;
pub const PICK_V: usize = 21;
pub const N_TENSORS: usize = 22;

pub const TENSOR_NAMES: [&str; N_TENSORS] = [
    "type_embedding",
    "dataset_embedding",
    "message_self",
    "message_neighbor",
    "message_direction",
    "message_bias1",
    "message_out",
    "message_bias2",
    "update_input",
    "update_input_bias",
    "update_hidden",
    "update_hidden_bias",
    "readout_gate",
    "readout_gate_bias",
    "readout_proj",
    "readout_proj_bias",
    "addnode",
    "addnode_bias",
    "addedge",
    "addedge_bias",
    "pick_bilinear",
    "pick_linear",
];

/// All weights, f64 in memory. Biases are column tensors (`cols == 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub tensors: Vec<Tensor>,
}

pub fn shapes(n_types: usize, n_datasets: usize, h: usize) -> [(usize, usize); N_TENSORS] {
    [
        (n_types, h),
        (n_datasets, h),
        (h, h),
        (h, h),
        (h, 1),
        (h, 1),
        (h, h),
        (h, 1),
        (3 * h, h),
        (3 * h, 1),
        (3 * h, h),
        (3 * h, 1),
        (2 * h, h),
        (2 * h, 1),
        (2 * h, h),
        (2 * h, 1),
        (n_types + 1, 2 * h),
        (n_types + 1, 1),
        (1, 3 * h),
        (1, 1),
        (h, h),
        (1, h),
    ]
}

impl Params {
    pub fn zeros(n_types: usize, n_datasets: usize, h: usize) -> Self {
        Self {
            tensors: shapes(n_types, n_datasets, h)
                .iter()
                .map(|&(r, c)| Tensor::zeros(r, c))
                .collect(),
        }
    }

    /// Xavier-uniform matrices, zero biases.
    pub fn xavier(n_types: usize, n_datasets: usize, h: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(n_types, n_datasets, h);
        for t in &mut p.tensors {
            if t.cols == 1 {
                continue;
            }
            let limit = (6.0 / (t.rows + t.cols) as f64).sqrt();
            for x in &mut t.data {
                *x = rng.random_range(-limit..limit);
            }
        }
        p
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self.tensors.iter().map(|t| Tensor::zeros(t.rows, t.cols)).collect(),
        }
    }

    pub fn n_types(&self) -> usize {
        self.tensors[TYPE_EMB].rows
    }

    pub fn hidden(&self) -> usize {
        self.tensors[TYPE_EMB].cols
    }

    pub fn add_assign(&mut self, other: &Params) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for t in &mut self.tensors {
            for x in &mut t.data {
                *x *= s;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    pub fn len(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Adaptive-moment optimizer state.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Params,
    v: Params,
    t: i32,
}

impl Adam {
    pub fn new(like: &Params, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: like.zeros_like(),
            v: like.zeros_like(),
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut Params, grad: &Params) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (k, p) in params.tensors.iter_mut().enumerate() {
            let g = &grad.tensors[k].data;
            let m = &mut self.m.tensors[k].data;
            let v = &mut self.v.tensors[k].data;
            for i in 0..p.data.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                p.data[i] -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + self.eps);
            }
        }
    }
}
