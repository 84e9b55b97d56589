use super::config::{CorrectionStart, Quadrature, Reconstruction, Scheme, SchemeConfig};
use super::flow::LinearFlow;
use crate::error::Result;
use crate::expaction::exp_frozen;
use crate::magnus::subflow_step;
use crate::problems::Problem;

/// Values of a step iterate at the quadrature nodes `t`, `t + dt/2`, `t + dt`.
/// The midpoint value is only tracked by the midpoint and Simpson rules.
#[derive(Clone, Debug)]
struct Nodes {
    left: Vec<f64>,
    mid: Option<Vec<f64>>,
    end: Vec<f64>,
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn scale(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

/// One-step maps of every scheme for a fixed problem and configuration.
pub struct Stepper<'a> {
    problem: &'a Problem,
    cfg: SchemeConfig,
    flow: LinearFlow<'a>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a Problem, cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        problem.validate()?;
        Ok(Self {
            problem,
            cfg: cfg.clone(),
            flow: LinearFlow::new(&problem.linear, problem.boundary.as_ref(), &cfg.backend)?,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Advances `u` from `t` to `t + dt` with the configured scheme.
    pub fn step(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        match self.cfg.scheme {
            Scheme::Ab => self.step_ab(t, dt, u),
            Scheme::Ba => self.step_ba(t, dt, u),
            Scheme::Strang => self.step_strang(t, dt, u),
            Scheme::SuccessiveStandard => self.step_successive_standard(t, dt, u),
            Scheme::SuccessiveMultiA => self.step_successive_multi_a(t, dt, u),
            Scheme::SuccessiveMultiB => self.step_successive_multi_b(t, dt, u),
        }
    }

    /// `exp(A dt) exp(Omega(dt, u)) u`.
    pub fn step_ab(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let family = self.problem.nonlinear.as_ref();
        let v = subflow_step(self.cfg.magnus_ab, family, t, dt, u, &self.cfg.backend)?;
        self.flow.affine(t, dt, &v)
    }

    /// `exp(Omega(dt, w)) w` with `w = exp(A dt) u`.
    pub fn step_ba(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let w = self.flow.affine(t, dt, u)?;
        let family = self.problem.nonlinear.as_ref();
        subflow_step(self.cfg.magnus_ba, family, t, dt, &w, &self.cfg.backend)
    }

    /// `BA(dt/2)` applied after `AB(dt/2)`.
    pub fn step_strang(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let h = 0.5 * dt;
        let v = self.step_ab(t, h, u)?;
        self.step_ba(t + h, h, &v)
    }

    fn uses_mid(&self) -> bool {
        self.cfg.quadrature != Quadrature::Trapezoid
    }

    /// `k(s) = B(s, x(s)) y(s)` at every node.
    fn b_times(&self, t: f64, dt: f64, x: &Nodes, y: &Nodes) -> Result<Nodes> {
        let family = self.problem.nonlinear.as_ref();
        let at = |s: f64, xs: &[f64], ys: &[f64]| family.operator(s, xs)?.apply(ys);
        Ok(Nodes {
            left: at(t, &x.left, &y.left)?,
            mid: match (&x.mid, &y.mid) {
                (Some(xm), Some(ym)) => Some(at(t + 0.5 * dt, xm, ym)?),
                _ => None,
            },
            end: at(t + dt, &x.end, &y.end)?,
        })
    }

    /// `(B'(s, x(s))[d(s)]) y(s)` at every node.
    fn b_prime_times(&self, t: f64, dt: f64, x: &Nodes, d: &Nodes, y: &Nodes) -> Result<Nodes> {
        let family = self.problem.nonlinear.as_ref();
        let at = |s: f64, xs: &[f64], ds: &[f64], ys: &[f64]| family.derivative(s, xs, ds)?.apply(ys);
        Ok(Nodes {
            left: at(t, &x.left, &d.left, &y.left)?,
            mid: match (&x.mid, &d.mid, &y.mid) {
                (Some(xm), Some(dm), Some(ym)) => Some(at(t + 0.5 * dt, xm, dm, ym)?),
                _ => None,
            },
            end: at(t + dt, &x.end, &d.end, &y.end)?,
        })
    }

    /// Approximates `int_t^{t+dt} exp(A (t + dt - s)) k(s) ds` at the right
    /// node, and the half-interval integral at the midpoint node by the
    /// trapezoidal rule.
    fn integral(&mut self, dt: f64, k: &Nodes) -> Result<Nodes> {
        let end = match (self.cfg.quadrature, &k.mid) {
            (Quadrature::Trapezoid, _) | (_, None) => {
                let mut w = self.flow.linear(dt, &k.left)?;
                axpy(1.0, &k.end, &mut w);
                scale(0.5 * dt, &w)
            }
            (Quadrature::Midpoint, Some(km)) => scale(dt, &self.flow.linear(0.5 * dt, km)?),
            (Quadrature::Simpson, Some(km)) => {
                let mut w = self.flow.linear(dt, &k.left)?;
                axpy(4.0, &self.flow.linear(0.5 * dt, km)?, &mut w);
                axpy(1.0, &k.end, &mut w);
                scale(dt / 6.0, &w)
            }
        };
        let mid = match &k.mid {
            Some(km) => {
                let mut w = self.flow.linear(0.5 * dt, &k.left)?;
                axpy(1.0, km, &mut w);
                Some(scale(0.25 * dt, &w))
            }
            None => None,
        };
        Ok(Nodes {
            left: vec![0.0; k.left.len()],
            mid,
            end,
        })
    }

    /// Zeroth iterate `u0(s)`: the linear flow from `u` at every node.
    fn linear_nodes(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Nodes> {
        Ok(Nodes {
            left: u.to_vec(),
            mid: if self.uses_mid() {
                Some(self.flow.affine(t, 0.5 * dt, u)?)
            } else {
                None
            },
            end: self.flow.affine(t, dt, u)?,
        })
    }

    /// Right-endpoint values `u_j(t + dt)`, `j = 0..=J`, of the standard
    /// successive (Picard) iteration, together with the corrections
    /// `u~_j(t + dt)`.
    pub fn standard_iterates(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let u0 = self.linear_nodes(t, dt, u)?;
        let mut iterates = vec![u0.end.clone()];
        let mut corrections = Vec::with_capacity(self.cfg.iterations);
        let mut prev = u0.clone();
        for _ in 0..self.cfg.iterations {
            let k = self.b_times(t, dt, &prev, &prev)?;
            let corr = self.integral(dt, &k)?;
            prev = Nodes {
                left: u.to_vec(),
                mid: match (&u0.mid, &corr.mid) {
                    (Some(a), Some(b)) => Some(add(a, b)),
                    _ => None,
                },
                end: add(&u0.end, &corr.end),
            };
            iterates.push(prev.end.clone());
            corrections.push(corr.end);
        }
        Ok((iterates, corrections))
    }

    pub fn step_successive_standard(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let (mut iterates, corrections) = self.standard_iterates(t, dt, u)?;
        Ok(match self.cfg.reconstruction {
            Reconstruction::FinalIterate => iterates.pop().expect("J >= 1"),
            Reconstruction::PaperSum => {
                let mut w = iterates.swap_remove(0);
                for c in &corrections {
                    axpy(1.0, c, &mut w);
                }
                w
            }
        })
    }

    /// `u0 + u~1 + u~2` of the epsilon expansion around the linear flow.
    pub fn step_successive_multi_a(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let eps = self.cfg.epsilon;
        let u0 = self.linear_nodes(t, dt, u)?;
        let k1 = self.b_times(t, dt, &u0, &u0)?;
        let c1 = self.integral(dt, &k1)?;
        let c1_end = scale(eps, &c1.end);
        let mut out = add(&u0.end, &c1_end);
        if self.cfg.iterations >= 2 {
            let u1 = Nodes {
                left: match self.cfg.correction_start {
                    CorrectionStart::Zero => vec![0.0; u.len()],
                    CorrectionStart::Restart => u.to_vec(),
                },
                mid: c1.mid.as_ref().map(|m| scale(eps, m)),
                end: c1_end,
            };
            let mut k2 = self.b_times(t, dt, &u0, &u1)?;
            let k2b = self.b_prime_times(t, dt, &u0, &u1, &u0)?;
            axpy(1.0, &k2b.left, &mut k2.left);
            axpy(1.0, &k2b.end, &mut k2.end);
            if let (Some(a), Some(b)) = (k2.mid.as_mut(), &k2b.mid) {
                axpy(1.0, b, a);
            }
            let c2 = self.integral(dt, &k2)?;
            axpy(eps, &c2.end, &mut out);
        }
        Ok(out)
    }

    /// `u0 + u~1` with `u0 = exp(dt B(u)) u` and the A-term as correction,
    /// propagated by the frozen linearisation `L = B(u) + B'(u)[u]`.
    pub fn step_successive_multi_b(&mut self, t: f64, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
        let family = self.problem.nonlinear.as_ref();
        let backend = &self.cfg.backend;
        let b = family.operator(t, u)?;
        let lin = b.add(&family.derivative(t, u, u)?)?;
        let u0_end = exp_frozen(&b, dt, u, backend)?;
        let f_left = self.flow.vector_field(t, u)?;
        let f_end = self.flow.vector_field(t + dt, &u0_end)?;
        let mid = || -> Result<Vec<f64>> {
            let u0_mid = exp_frozen(&b, 0.5 * dt, u, backend)?;
            let f_mid = self.flow.vector_field(t + 0.5 * dt, &u0_mid)?;
            exp_frozen(&lin, 0.5 * dt, &f_mid, backend)
        };
        let corr = match self.cfg.quadrature {
            Quadrature::Trapezoid => {
                let mut w = exp_frozen(&lin, dt, &f_left, backend)?;
                axpy(1.0, &f_end, &mut w);
                scale(0.5 * dt, &w)
            }
            Quadrature::Midpoint => scale(dt, &mid()?),
            Quadrature::Simpson => {
                let mut w = exp_frozen(&lin, dt, &f_left, backend)?;
                axpy(4.0, &mid()?, &mut w);
                axpy(1.0, &f_end, &mut w);
                scale(dt / 6.0, &w)
            }
        };
        let mut out = u0_end;
        axpy(self.cfg.epsilon, &corr, &mut out);
        Ok(out)
    }
}
