//! First- and second-order nonlinear Magnus operators for the B-subflow
//! `u' = B(t, u) u`, whose one-step solution is approximated by
//! `u(t0 + dt) = exp(Omega) u(t0)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::expaction::{exp_frozen, ExpBackend};
use crate::operators::{FrozenOperator, NonlinearFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MagnusOrder {
    /// `Omega = dt B(t0, u0)`.
    #[serde(rename = "omega1")]
    First,
    /// `Omega = dt B(t0 + dt/2, exp(dt/2 B(t0, u0)) u0)`.
    #[serde(rename = "omega2-midpoint")]
    SecondMidpoint,
    /// `Omega = dt/2 [B(t0, u0) + B(t0 + dt, exp(dt B(t0, u0)) u0)]`.
    #[serde(rename = "omega2-trapezoid")]
    SecondTrapezoid,
    /// Midpoint rule with the collapsed state argument `(dt/2) B(t0, u0)`,
    /// read as the vector of diagonal entries. Kept as a diagnostic; it is
    /// not a consistent Magnus approximation and only accepts diagonal
    /// families.
    #[serde(rename = "omega2-midpoint-as-printed")]
    MidpointAsPrinted,
}

impl MagnusOrder {
    pub fn label(self) -> &'static str {
        match self {
            MagnusOrder::First => "omega1",
            MagnusOrder::SecondMidpoint => "omega2-midpoint",
            MagnusOrder::SecondTrapezoid => "omega2-trapezoid",
            MagnusOrder::MidpointAsPrinted => "omega2-midpoint-as-printed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            MagnusOrder::First,
            MagnusOrder::SecondMidpoint,
            MagnusOrder::SecondTrapezoid,
            MagnusOrder::MidpointAsPrinted,
        ]
        .into_iter()
        .find(|o| o.label() == s)
    }
}

/// An assembled Magnus exponent together with where it was built.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnusOperator {
    pub omega: FrozenOperator,
    pub order: MagnusOrder,
    pub dt: f64,
    pub t0: f64,
    pub anchor: Vec<f64>,
}

impl MagnusOperator {
    pub fn dim(&self) -> usize {
        self.omega.dim()
    }
}

fn check_step(family: &dyn NonlinearFamily, dt: f64, u0: &[f64]) -> Result<()> {
    check_len(family.dim(), u0.len())?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("Magnus step must be positive, got {dt}")));
    }
    Ok(())
}

pub fn omega1(family: &dyn NonlinearFamily, t0: f64, dt: f64, u0: &[f64]) -> Result<MagnusOperator> {
    check_step(family, dt, u0)?;
    let b = family.operator(t0, u0)?;
    Ok(MagnusOperator {
        omega: b.scaled(dt),
        order: MagnusOrder::First,
        dt,
        t0,
        anchor: u0.to_vec(),
    })
}

pub fn omega2_midpoint(
    family: &dyn NonlinearFamily,
    t0: f64,
    dt: f64,
    u0: &[f64],
    backend: &ExpBackend,
) -> Result<MagnusOperator> {
    check_step(family, dt, u0)?;
    let b0 = family.operator(t0, u0)?;
    let u_mid = exp_frozen(&b0, 0.5 * dt, u0, backend)?;
    let b_mid = family.operator(t0 + 0.5 * dt, &u_mid)?;
    Ok(MagnusOperator {
        omega: b_mid.scaled(dt),
        order: MagnusOrder::SecondMidpoint,
        dt,
        t0,
        anchor: u0.to_vec(),
    })
}

pub fn omega2_trapezoid(
    family: &dyn NonlinearFamily,
    t0: f64,
    dt: f64,
    u0: &[f64],
    backend: &ExpBackend,
) -> Result<MagnusOperator> {
    check_step(family, dt, u0)?;
    let b0 = family.operator(t0, u0)?;
    let u_end = exp_frozen(&b0, dt, u0, backend)?;
    let b_end = family.operator(t0 + dt, &u_end)?;
    Ok(MagnusOperator {
        omega: b0.add(&b_end)?.scaled(0.5 * dt),
        order: MagnusOrder::SecondTrapezoid,
        dt,
        t0,
        anchor: u0.to_vec(),
    })
}

pub fn omega_midpoint_as_printed(
    family: &dyn NonlinearFamily,
    t0: f64,
    dt: f64,
    u0: &[f64],
) -> Result<MagnusOperator> {
    check_step(family, dt, u0)?;
    let FrozenOperator::Diagonal(b0) = family.operator(t0, u0)? else {
        return Err(Error::Unsupported("collapsed midpoint argument needs a diagonal family"));
    };
    let arg: Vec<f64> = b0.iter().map(|b| 0.5 * dt * b).collect();
    let b_mid = family.operator(t0 + 0.5 * dt, &arg)?;
    Ok(MagnusOperator {
        omega: b_mid.scaled(dt),
        order: MagnusOrder::MidpointAsPrinted,
        dt,
        t0,
        anchor: u0.to_vec(),
    })
}

/// Builds the Magnus exponent of the requested order.
pub fn omega(
    order: MagnusOrder,
    family: &dyn NonlinearFamily,
    t0: f64,
    dt: f64,
    u0: &[f64],
    backend: &ExpBackend,
) -> Result<MagnusOperator> {
    match order {
        MagnusOrder::First => omega1(family, t0, dt, u0),
        MagnusOrder::SecondMidpoint => omega2_midpoint(family, t0, dt, u0, backend),
        MagnusOrder::SecondTrapezoid => omega2_trapezoid(family, t0, dt, u0, backend),
        MagnusOrder::MidpointAsPrinted => omega_midpoint_as_printed(family, t0, dt, u0),
    }
}

/// `exp(Omega) u`.
pub fn magnus_propagate(omega: &MagnusOperator, u: &[f64], backend: &ExpBackend) -> Result<Vec<f64>> {
    check_len(omega.dim(), u.len())?;
    exp_frozen(&omega.omega, 1.0, u, backend)
}

/// One B-subflow step: build the exponent at `(t0, u)` and apply it to `u`.
pub fn subflow_step(
    order: MagnusOrder,
    family: &dyn NonlinearFamily,
    t0: f64,
    dt: f64,
    u: &[f64],
    backend: &ExpBackend,
) -> Result<Vec<f64>> {
    let om = omega(order, family, t0, dt, u, backend)?;
    magnus_propagate(&om, u, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{ConstantFamily, FnDiagonalFamily, LinearOperator, LogisticFamily, PowerFamily};

    fn diag(op: &FrozenOperator) -> &[f64] {
        match op {
            FrozenOperator::Diagonal(d) => d,
            FrozenOperator::Matrix(_) => panic!("expected a diagonal operator"),
        }
    }

    #[test]
    fn first_order_is_scaled_operator() {
        let f = LogisticFamily::new(3, 1.0, 1.0).unwrap();
        let om = omega1(&f, 0.0, 0.1, &[1.0; 3]).unwrap();
        assert_eq!(diag(&om.omega), &[-0.1; 3]);
    }

    #[test]
    fn hand_evaluated_second_order_scalar_values() {
        let f = PowerFamily::new(1, -1.0, 2).unwrap();
        let b = ExpBackend::default();
        let mid = omega2_midpoint(&f, 0.0, 0.2, &[1.0], &b).unwrap();
        assert!((diag(&mid.omega)[0] + 0.2 * (-0.1f64).exp()).abs() < 1e-15);
        assert!((diag(&mid.omega)[0] + 0.180967).abs() < 1e-6);
        let trap = omega2_trapezoid(&f, 0.0, 0.2, &[1.0], &b).unwrap();
        assert!((diag(&trap.omega)[0] + 0.181873).abs() < 1e-6);
    }

    #[test]
    fn linear_in_time_family_is_integrated_exactly() {
        let f = FnDiagonalFamily::new(2, |t, _u| vec![t; 2]);
        let b = ExpBackend::default();
        let dt = 0.3;
        for order in [MagnusOrder::SecondMidpoint, MagnusOrder::SecondTrapezoid] {
            let om = omega(order, &f, 0.0, dt, &[1.0, 2.0], &b).unwrap();
            assert!((diag(&om.omega)[0] - dt * dt / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_family_orders_coincide() {
        let m = LinearOperator::from_triplets(2, [(0, 0, -1.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, -2.0)]).unwrap();
        let f = ConstantFamily::new(FrozenOperator::Matrix(m.clone()));
        let b = ExpBackend::default();
        let u = [1.0, -1.0];
        let ops: Vec<_> = [MagnusOrder::First, MagnusOrder::SecondMidpoint, MagnusOrder::SecondTrapezoid]
            .into_iter()
            .map(|o| omega(o, &f, 0.0, 0.5, &u, &b).unwrap().omega.to_dense())
            .collect();
        let target = m.to_dense() * 0.5;
        for o in &ops {
            assert!((o - &target).norm() < 1e-15);
        }
    }

    #[test]
    fn propagation_of_zero_exponent_is_identity() {
        let om = MagnusOperator {
            omega: FrozenOperator::zeros(3),
            order: MagnusOrder::First,
            dt: 0.1,
            t0: 0.0,
            anchor: vec![0.0; 3],
        };
        let u = [1.0, 2.0, 3.0];
        assert_eq!(magnus_propagate(&om, &u, &ExpBackend::default()).unwrap(), u);
    }

    #[test]
    fn collapsed_midpoint_rejects_matrix_families() {
        let f = ConstantFamily::new(FrozenOperator::Matrix(LinearOperator::identity(2)));
        assert!(matches!(
            omega_midpoint_as_printed(&f, 0.0, 0.1, &[1.0, 1.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn nonpositive_step_is_rejected() {
        let f = LogisticFamily::new(1, 1.0, 1.0).unwrap();
        assert!(omega1(&f, 0.0, 0.0, &[1.0]).is_err());
    }
}
