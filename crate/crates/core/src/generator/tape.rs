//! Minimal reverse-mode autodiff over vectors, enough for the graph model.

use super::params::Params;

pub type Var = usize;

#[derive(Debug, Clone)]
enum Op {
    Const,
    Row { p: usize, row: usize },
    /// `W x + s b`
    Affine { w: usize, b: Option<usize>, s: f64, x: Var },
    Add(Var, Var),
    Mul(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    OneMinus(Var),
    Concat(Vec<Var>),
    Sum(Vec<Var>),
    Slice { x: Var, start: usize },
    Dot(Var, Var),
    /// `-log softmax(logits)[target]`
    SoftmaxNll { logits: Var, target: usize },
    /// `-log sigmoid(z)` or `-log (1 - sigmoid(z))`
    SigmoidNll { logit: Var, yes: bool },
}

pub struct Tape<'p> {
    pub params: &'p Params,
    ops: Vec<Op>,
    vals: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    z.iter().map(|x| x - lse).collect()
}

/// `(log sigmoid(z), log (1 - sigmoid(z)))`
pub fn log_sigmoid_pair(z: f64) -> (f64, f64) {
    (-softplus(-z), -softplus(z))
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p Params) -> Self {
        Self {
            params,
            ops: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push(&mut self, op: Op, val: Vec<f64>) -> Var {
        self.ops.push(op);
        self.vals.push(val);
        self.vals.len() - 1
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.vals[v]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn constant(&mut self, x: Vec<f64>) -> Var {
        self.push(Op::Const, x)
    }

    pub fn row(&mut self, p: usize, row: usize) -> Var {
        let v = self.params.tensors[p].row(row).to_vec();
        self.push(Op::Row { p, row }, v)
    }

    pub fn affine(&mut self, w: usize, b: Option<usize>, s: f64, x: Var) -> Var {
        let wt = &self.params.tensors[w];
        let xv = &self.vals[x];
        debug_assert_eq!(wt.cols, xv.len());
        let mut y: Vec<f64> = (0..wt.rows)
            .map(|r| wt.row(r).iter().zip(xv).map(|(a, b)| a * b).sum())
            .collect();
        if let Some(b) = b {
            for (yi, bi) in y.iter_mut().zip(&self.params.tensors[b].data) {
                *yi += s * bi;
            }
        }
        self.push(Op::Affine { w, b, s, x }, y)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let y = self.vals[a].iter().zip(&self.vals[b]).map(|(x, y)| x + y).collect();
        self.push(Op::Add(a, b), y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let y = self.vals[a].iter().zip(&self.vals[b]).map(|(x, y)| x * y).collect();
        self.push(Op::Mul(a, b), y)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let y = self.vals[a].iter().map(|x| x.tanh()).collect();
        self.push(Op::Tanh(a), y)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let y = self.vals[a].iter().map(|&x| sigmoid(x)).collect();
        self.push(Op::Sigmoid(a), y)
    }

    pub fn one_minus(&mut self, a: Var) -> Var {
        let y = self.vals[a].iter().map(|x| 1.0 - x).collect();
        self.push(Op::OneMinus(a), y)
    }

    pub fn concat(&mut self, xs: Vec<Var>) -> Var {
        let y = xs.iter().flat_map(|&x| self.vals[x].iter().copied()).collect();
        self.push(Op::Concat(xs), y)
    }

    /// Elementwise sum; all inputs must share a length. Empty input is invalid.
    pub fn sum(&mut self, xs: Vec<Var>) -> Var {
        let mut y = self.vals[xs[0]].clone();
        for &x in &xs[1..] {
            for (a, b) in y.iter_mut().zip(&self.vals[x]) {
                *a += b;
            }
        }
        self.push(Op::Sum(xs), y)
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Var {
        let y = self.vals[x][start..start + len].to_vec();
        self.push(Op::Slice { x, start }, y)
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Var {
        let y = self.vals[a].iter().zip(&self.vals[b]).map(|(x, y)| x * y).sum();
        self.push(Op::Dot(a, b), vec![y])
    }

    pub fn softmax_nll(&mut self, logits: Var, target: usize) -> Var {
        let lp = log_softmax(&self.vals[logits]);
        self.push(Op::SoftmaxNll { logits, target }, vec![-lp[target]])
    }

    pub fn sigmoid_nll(&mut self, logit: Var, yes: bool) -> Var {
        let (ly, ln) = log_sigmoid_pair(self.vals[logit][0]);
        self.push(Op::SigmoidNll { logit, yes }, vec![-(if yes { ly } else { ln })])
    }

    /// Gradient of `sum(values of roots)` with respect to every parameter.
    pub fn backward(&self, roots: &[Var]) -> Params {
        let mut pg = self.params.zeros_like();
        let mut g: Vec<Vec<f64>> = vec![Vec::new(); self.ops.len()];
        for &r in roots {
            acc(&mut g[r], &[1.0]);
        }
        for v in (0..self.ops.len()).rev() {
            if g[v].is_empty() {
                continue;
            }
            let gv = std::mem::take(&mut g[v]);
            match &self.ops[v] {
                Op::Const => {}
                Op::Row { p, row } => {
                    let t = &mut pg.tensors[*p];
                    let c = t.cols;
                    for (a, b) in t.data[row * c..(row + 1) * c].iter_mut().zip(&gv) {
                        *a += b;
                    }
                }
                Op::Affine { w, b, s, x } => {
                    let wt = &self.params.tensors[*w];
                    let xv = &self.vals[*x];
                    let gw = &mut pg.tensors[*w].data;
                    let mut gx = vec![0.0; wt.cols];
                    for (r, &gr) in gv.iter().enumerate() {
                        if gr == 0.0 {
                            continue;
                        }
                        let off = r * wt.cols;
                        for c in 0..wt.cols {
                            gw[off + c] += gr * xv[c];
                            gx[c] += gr * wt.data[off + c];
                        }
                    }
                    if let Some(b) = b {
                        for (a, gr) in pg.tensors[*b].data.iter_mut().zip(&gv) {
                            *a += s * gr;
                        }
                    }
                    acc(&mut g[*x], &gx);
                }
                Op::Add(a, b) => {
                    acc(&mut g[*a], &gv);
                    acc(&mut g[*b], &gv);
                }
                Op::Mul(a, b) => {
                    let ga: Vec<f64> = gv.iter().zip(&self.vals[*b]).map(|(x, y)| x * y).collect();
                    let gb: Vec<f64> = gv.iter().zip(&self.vals[*a]).map(|(x, y)| x * y).collect();
                    acc(&mut g[*a], &ga);
                    acc(&mut g[*b], &gb);
                }
                Op::Tanh(a) => {
                    let ga: Vec<f64> = gv.iter().zip(&self.vals[v]).map(|(d, y)| d * (1.0 - y * y)).collect();
                    acc(&mut g[*a], &ga);
                }
                Op::Sigmoid(a) => {
                    let ga: Vec<f64> = gv.iter().zip(&self.vals[v]).map(|(d, y)| d * y * (1.0 - y)).collect();
                    acc(&mut g[*a], &ga);
                }
                Op::OneMinus(a) => {
                    let ga: Vec<f64> = gv.iter().map(|d| -d).collect();
                    acc(&mut g[*a], &ga);
                }
                Op::Concat(xs) => {
                    let mut off = 0;
                    for &x in xs {
                        let n = self.vals[x].len();
                        acc(&mut g[x], &gv[off..off + n]);
                        off += n;
                    }
                }
                Op::Sum(xs) => {
                    for &x in xs {
                        acc(&mut g[x], &gv);
                    }
                }
                Op::Slice { x, start } => {
                    let mut gx = vec![0.0; self.vals[*x].len()];
                    gx[*start..start + gv.len()].copy_from_slice(&gv);
                    acc(&mut g[*x], &gx);
                }
                Op::Dot(a, b) => {
                    let d = gv[0];
                    let ga: Vec<f64> = self.vals[*b].iter().map(|y| d * y).collect();
                    let gb: Vec<f64> = self.vals[*a].iter().map(|y| d * y).collect();
                    acc(&mut g[*a], &ga);
                    acc(&mut g[*b], &gb);
                }
                Op::SoftmaxNll { logits, target } => {
                    let lp = log_softmax(&self.vals[*logits]);
                    let mut gl: Vec<f64> = lp.iter().map(|l| gv[0] * l.exp()).collect();
                    gl[*target] -= gv[0];
                    acc(&mut g[*logits], &gl);
                }
                Op::SigmoidNll { logit, yes } => {
                    let p = sigmoid(self.vals[*logit][0]);
                    let d = if *yes { p - 1.0 } else { p };
                    acc(&mut g[*logit], &[gv[0] * d]);
                }
            }
        }
        pg
    }
}

fn acc(slot: &mut Vec<f64>, g: &[f64]) {
    if slot.is_empty() {
        slot.extend_from_slice(g);
    } else {
        for (a, b) in slot.iter_mut().zip(g) {
            *a += b;
        }
    }
}
