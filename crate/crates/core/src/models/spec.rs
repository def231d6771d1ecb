use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::scalar::Real;

use super::{Activity, AreaInteractionParams, Interaction, LennardJonesParams, Model, ModelKind, Ruelle};

/// Serialized model definition: `{"kind": ..., "window": {...}, "params": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real", serialize = "T: Real"))]
pub struct ModelSpec<T> {
    pub window: Window<T>,
    #[serde(flatten)]
    pub kind: KindSpec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    bound(deserialize = "T: Real", serialize = "T: Real")
)]
pub enum KindSpec<T> {
    Poisson {
        beta: Activity<T>,
    },
    Pip {
        beta: Activity<T>,
        interaction: InteractionSpec<T>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ruelle: Option<Ruelle<T>>,
    },
    Strauss {
        beta: T,
        gamma: T,
        #[serde(rename = "R")]
        big_r: T,
    },
    HardCoreStrauss {
        beta: T,
        hard_core: T,
        gamma: T,
        #[serde(rename = "R")]
        big_r: T,
    },
    BiScaleStrauss {
        beta: T,
        gamma: T,
        r: T,
        c: T,
        #[serde(rename = "R")]
        big_r: T,
    },
    LennardJones {
        beta: T,
        b: T,
        #[serde(rename = "R")]
        big_r: T,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<T>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<T>,
        #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
        m: Option<T>,
    },
    AreaInteraction {
        beta: T,
        gamma: T,
        #[serde(rename = "R")]
        big_r: T,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rel_tol: Option<T>,
    },
    Conditioned {
        base: Box<KindSpec<T>>,
        k: usize,
        delta: T,
    },
}

/// Interaction of a generic `pip` model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound(deserialize = "T: Real", serialize = "T: Real"))]
pub enum InteractionSpec<T> {
    Constant {
        value: T,
    },
    Strauss {
        gamma: T,
        #[serde(rename = "R")]
        big_r: T,
    },
    HardCoreStrauss {
        hard_core: T,
        gamma: T,
        #[serde(rename = "R")]
        big_r: T,
    },
    BiScaleStrauss {
        gamma: T,
        r: T,
        c: T,
        #[serde(rename = "R")]
        big_r: T,
    },
    Step {
        radii: Vec<T>,
        values: Vec<T>,
    },
    Ramp {
        range: T,
        floor: T,
    },
    LennardJones {
        b: T,
        #[serde(rename = "R")]
        big_r: T,
    },
}

impl<T: Real> InteractionSpec<T> {
    fn build(&self) -> Interaction<T> {
        match self.clone() {
            InteractionSpec::Constant { value } => Interaction::Constant(value),
            InteractionSpec::Strauss { gamma, big_r } => Interaction::Strauss { gamma, radius: big_r },
            InteractionSpec::HardCoreStrauss {
                hard_core,
                gamma,
                big_r,
            } => Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius: big_r,
            },
            InteractionSpec::BiScaleStrauss { gamma, r, c, big_r } => Interaction::BiScaleStrauss {
                gamma,
                r,
                c,
                radius: big_r,
            },
            InteractionSpec::Step { radii, values } => Interaction::Step { radii, values },
            InteractionSpec::Ramp { range, floor } => Interaction::Ramp { range, floor },
            InteractionSpec::LennardJones { b, big_r } => Interaction::LennardJones { b, radius: big_r },
        }
    }

    fn from_interaction(phi: &Interaction<T>) -> Option<Self> {
        Some(match phi.clone() {
            Interaction::Constant(value) => InteractionSpec::Constant { value },
            Interaction::Strauss { gamma, radius } => InteractionSpec::Strauss { gamma, big_r: radius },
            Interaction::HardCoreStrauss {
                hard_core,
                gamma,
                radius,
            } => InteractionSpec::HardCoreStrauss {
                hard_core,
                gamma,
                big_r: radius,
            },
            Interaction::BiScaleStrauss { gamma, r, c, radius } => InteractionSpec::BiScaleStrauss {
                gamma,
                r,
                c,
                big_r: radius,
            },
            Interaction::Step { radii, values } => InteractionSpec::Step { radii, values },
            Interaction::Ramp { range, floor } => InteractionSpec::Ramp { range, floor },
            Interaction::LennardJones { b, radius } => InteractionSpec::LennardJones { b, big_r: radius },
            Interaction::Custom { .. } => return None,
        })
    }
}

impl<T: Real> KindSpec<T> {
    pub fn build(&self, window: Window<T>) -> Result<Model<T>> {
        match self.clone() {
            KindSpec::Poisson { beta } => Model::new(window, ModelKind::Poisson { beta }),
            KindSpec::Pip {
                beta,
                interaction,
                ruelle,
            } => {
                let m = Model::pip(window, beta, interaction.build())?;
                match ruelle {
                    Some(r) => m.with_ruelle(r),
                    None => Ok(m),
                }
            }
            KindSpec::Strauss { beta, gamma, big_r } => Model::strauss(window, beta, gamma, big_r),
            KindSpec::HardCoreStrauss {
                beta,
                hard_core,
                gamma,
                big_r,
            } => Model::hard_core_strauss(window, beta, hard_core, gamma, big_r),
            KindSpec::BiScaleStrauss {
                beta,
                gamma,
                r,
                c,
                big_r,
            } => Model::bi_scale_strauss(window, beta, gamma, r, c, big_r),
            KindSpec::LennardJones {
                beta,
                b,
                big_r,
                rho,
                r,
                m,
            } => {
                let model = Model::lennard_jones(window, beta, b, big_r)?;
                if rho.is_none() && r.is_none() && m.is_none() {
                    return Ok(model);
                }
                let c = LennardJonesParams::classical(b, big_r);
                model.with_lj_constants(LennardJonesParams {
                    b,
                    rho: rho.unwrap_or(c.rho),
                    r: r.unwrap_or(c.r),
                    big_r,
                    m: m.unwrap_or(c.m),
                })
            }
            KindSpec::AreaInteraction {
                beta,
                gamma,
                big_r,
                rel_tol,
            } => Model::new(
                window,
                ModelKind::AreaInteraction(AreaInteractionParams {
                    beta,
                    gamma,
                    big_r,
                    rel_tol: rel_tol.unwrap_or_else(|| T::lit(1e-10)),
                }),
            ),
            KindSpec::Conditioned { base, k, delta } => {
                if matches!(*base, KindSpec::Conditioned { .. }) {
                    return Err(Error::param("nested conditioning is not supported"));
                }
                base.build(window)?.restrict_to_ak(k, delta)
            }
        }
    }
}

impl<T: Real> ModelSpec<T> {
    pub fn build(&self) -> Result<Model<T>> {
        self.kind.build(self.window.clone())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl<T: Real> Model<T> {
    /// The serializable definition of this model; `None` for custom interactions.
    pub fn to_spec(&self) -> Option<ModelSpec<T>> {
        Some(ModelSpec {
            window: self.window().clone(),
            kind: kind_spec(self)?,
        })
    }
}

fn kind_spec<T: Real>(m: &Model<T>) -> Option<KindSpec<T>> {
    Some(match m.kind() {
        ModelKind::Poisson { beta } => KindSpec::Poisson { beta: beta.clone() },
        ModelKind::AreaInteraction(a) => KindSpec::AreaInteraction {
            beta: a.beta,
            gamma: a.gamma,
            big_r: a.big_r,
            rel_tol: Some(a.rel_tol),
        },
        ModelKind::Conditioned(c) => KindSpec::Conditioned {
            base: Box::new(kind_spec(&c.base)?),
            k: c.k,
            delta: c.delta,
        },
        ModelKind::Pip(p) => {
            let beta = p.beta.constant();
            match (&p.phi, beta, p.ruelle) {
                (Interaction::Strauss { gamma, radius }, Some(beta), None) => KindSpec::Strauss {
                    beta,
                    gamma: *gamma,
                    big_r: *radius,
                },
                (
                    Interaction::HardCoreStrauss {
                        hard_core,
                        gamma,
                        radius,
                    },
                    Some(beta),
                    None,
                ) => KindSpec::HardCoreStrauss {
                    beta,
                    hard_core: *hard_core,
                    gamma: *gamma,
                    big_r: *radius,
                },
                (Interaction::BiScaleStrauss { gamma, r, c, radius }, Some(beta), None) => KindSpec::BiScaleStrauss {
                    beta,
                    gamma: *gamma,
                    r: *r,
                    c: *c,
                    big_r: *radius,
                },
                (Interaction::LennardJones { b, radius }, Some(beta), None) => {
                    let lj = p.lj.unwrap_or_else(|| LennardJonesParams::classical(*b, *radius));
                    let classical = LennardJonesParams::classical(*b, *radius);
                    let custom = lj != classical;
                    KindSpec::LennardJones {
                        beta,
                        b: *b,
                        big_r: *radius,
                        rho: custom.then_some(lj.rho),
                        r: custom.then_some(lj.r),
                        m: custom.then_some(lj.m),
                    }
                }
                _ => KindSpec::Pip {
                    beta: p.beta.clone(),
                    interaction: InteractionSpec::from_interaction(&p.phi)?,
                    ruelle: p.ruelle,
                },
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let src = r#"{"kind":"strauss","window":{"dim":2,"lower":[0,0],"upper":[1,1],"torus":true},
                      "params":{"beta":50,"gamma":0.5,"R":0.1}}"#;
        let spec: ModelSpec<f64> = ModelSpec::from_json(src).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.kind_name(), "Strauss");
        let back = serde_json::to_string(&m.to_spec().unwrap()).unwrap();
        let again: ModelSpec<f64> = serde_json::from_str(&back).unwrap();
        assert_eq!(again.kind, spec.kind);
    }

    #[test]
    fn conditioned_and_pip_specs() {
        let src = r#"{"kind":"conditioned","window":{"dim":2,"lower":[0,0],"upper":[1,1]},
            "params":{"k":2,"delta":0.05,"base":{"kind":"bi_scale_strauss","params":{"beta":50,"gamma":0.1,"r":0.05,"c":1.2,"R":0.1}}}}"#;
        let m = ModelSpec::<f64>::from_json(src).unwrap().build().unwrap();
        assert_eq!(m.kind_name(), "Conditioned");
        let src = r#"{"kind":"pip","window":{"dim":1,"lower":[0],"upper":[3]},
            "params":{"beta":{"shape":[4],"values":[1,2,3,4]},"interaction":{"type":"ramp","range":0.2,"floor":0.1}}}"#;
        let m = ModelSpec::<f64>::from_json(src).unwrap().build().unwrap();
        assert!((m.beta(&[1.5]) - 2.5).abs() < 1e-12);
        let bad = r#"{"kind":"strauss","window":{"dim":1,"lower":[0],"upper":[1]},"params":{"beta":5,"gamma":1.5,"R":0.1}}"#;
        assert!(ModelSpec::<f64>::from_json(bad).unwrap().build().is_err());
    }
}
