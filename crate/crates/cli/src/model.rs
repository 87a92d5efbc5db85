use std::sync::Arc;

use holder_euler::criteria::{AutonomousModel, ScalarFn};
use holder_euler::sde::{make_prototype, CoefficientFn, CoefficientMeta, Domain, SdeModel};
use holder_euler::{Error, Result};

use crate::config::{CustomModel, ModelSpec};
use crate::expr::{Expr, Var};

fn coefficient(label: &str, e: &Arc<Expr>) -> CoefficientFn {
    let e = e.clone();
    CoefficientFn::new(label.to_string(), CoefficientMeta::default(), move |t, x| e.eval(t, x))
}

fn scalar(e: Expr) -> ScalarFn {
    Arc::new(move |x| e.eval(0.0, x))
}

pub fn build_sde(spec: &ModelSpec) -> Result<SdeModel> {
    match spec {
        ModelSpec::Prototype(p) => make_prototype(p),
        ModelSpec::Custom(c) => SdeModel::new(
            "custom",
            coefficient(&c.drift.source, &c.drift.expr),
            coefficient(&c.sigma.source, &c.sigma.expr),
            c.gamma,
            c.x0,
            c.horizon,
            c.domain,
        ),
    }
}

fn custom_autonomous(c: &CustomModel) -> Result<AutonomousModel> {
    if c.drift.expr.depends_on(Var::T) || c.sigma.expr.depends_on(Var::T) {
        return Err(Error::Hypothesis("criterion needs time-independent drift and sigma".into()));
    }
    let (a, sigma) = (c.drift.expr.as_ref().clone(), c.sigma.expr.as_ref().clone());
    let (ap, sp) = (a.dx(), sigma.dx());
    let spp = sp.dx();
    AutonomousModel::new(
        scalar(a),
        scalar(ap),
        scalar(sigma),
        scalar(sp),
        scalar(spp),
        c.gamma,
        c.domain.unwrap_or_else(Domain::real_line),
        c.x0,
    )
}

/// Time-independent form with derivatives, for the boundary criteria.
pub fn build_autonomous(spec: &ModelSpec) -> Result<AutonomousModel> {
    match spec {
        ModelSpec::Prototype(p) => AutonomousModel::from_prototype(p),
        ModelSpec::Custom(c) => custom_autonomous(c),
    }
}
