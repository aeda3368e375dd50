//! JSON family descriptions and the compact α / ω spec strings.
//!
//! Family file:
//! ```json
//! { "systems": [ { "symbol": "L", "kind": "luroth" },
//!                { "symbol": "B", "kind": "finite", "lengths": ["1/2", "1/2"] } ],
//!   "alpha": "L@1/2=geometric:1/2;B@1/2=uniform:2",
//!   "omega": "weave" }
//! ```
//!
//! Law specs: `geometric:r`, `power:p`, `logpower:q`, `dirac:b`, `uniform:k`,
//! `list:a1,a2,…` and `list:a1,…|<tail>` for an explicit head followed by a
//! geometric, power or log-power tail. Multi-symbol α is `ID@weight=law;…`.
//!
//! Omega specs: `weave[:w1,w2,…]`, `periodic:ID,ID,…`, `prefix:ID,…;periodic:ID,…`,
//! `constant:ID`, `bernoulli[:seed]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::{ConditionalLaw, FrequencyVector, Tail};
use crate::gls::{Family, GlsSystem, Layout, Orientation, OrientationRule, ParametricRule, Symbol};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutConfig {
    Ascending,
    #[default]
    Descending,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationConfig {
    #[default]
    Increasing,
    Decreasing,
    Alternating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemConfig {
    Luroth {
        symbol: String,
        #[serde(default)]
        layout: LayoutConfig,
        #[serde(default)]
        orientation: OrientationConfig,
    },
    Geometric {
        symbol: String,
        r: String,
        #[serde(default)]
        layout: LayoutConfig,
        #[serde(default)]
        orientation: OrientationConfig,
    },
    Power {
        symbol: String,
        p: f64,
        #[serde(default)]
        layout: LayoutConfig,
        #[serde(default)]
        orientation: OrientationConfig,
    },
    /// Lengths laid out left to right; digits are labelled by decreasing length.
    Finite {
        symbol: String,
        lengths: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orientations: Option<Vec<OrientationConfig>>,
    },
    /// Explicit `[left, right, orientation]` images in digit order, not checked for tiling.
    Intervals { symbol: String, intervals: Vec<(String, String, OrientationConfig)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub systems: Vec<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
}

fn at(path: String) -> impl Fn(Error) -> Error {
    move |e| Error::Parse(format!("{path}: {e}"))
}

fn fixed_orientation(o: OrientationConfig, path: &str) -> Result<Orientation> {
    match o {
        OrientationConfig::Increasing => Ok(Orientation::Increasing),
        OrientationConfig::Decreasing => Ok(Orientation::Decreasing),
        OrientationConfig::Alternating => {
            Err(Error::Parse(format!("{path}: alternating applies to parametric rules only")))
        }
    }
}

fn orientation_rule(o: OrientationConfig) -> OrientationRule {
    match o {
        OrientationConfig::Increasing => OrientationRule::Increasing,
        OrientationConfig::Decreasing => OrientationRule::Decreasing,
        OrientationConfig::Alternating => OrientationRule::Alternating,
    }
}

fn layout(l: LayoutConfig) -> Layout {
    match l {
        LayoutConfig::Ascending => Layout::Ascending,
        LayoutConfig::Descending => Layout::Descending,
    }
}

impl SystemConfig {
    pub fn symbol(&self) -> &str {
        match self {
            SystemConfig::Luroth { symbol, .. }
            | SystemConfig::Geometric { symbol, .. }
            | SystemConfig::Power { symbol, .. }
            | SystemConfig::Finite { symbol, .. }
            | SystemConfig::Intervals { symbol, .. } => symbol,
        }
    }

    pub fn build(&self, path: &str) -> Result<GlsSystem> {
        let sym = Symbol::new(self.symbol());
        match self {
            SystemConfig::Luroth { layout: l, orientation, .. } => {
                GlsSystem::parametric(sym, ParametricRule::Luroth, layout(*l), orientation_rule(*orientation))
            }
            SystemConfig::Geometric { r, layout: l, orientation, .. } => {
                let r = rational::parse(r).map_err(at(format!("{path}.r")))?;
                GlsSystem::parametric(sym, ParametricRule::Geometric(r), layout(*l), orientation_rule(*orientation))
                    .map_err(at(format!("{path}.r")))
            }
            SystemConfig::Power { p, layout: l, orientation, .. } => {
                GlsSystem::parametric(sym, ParametricRule::Power(*p), layout(*l), orientation_rule(*orientation))
                    .map_err(at(format!("{path}.p")))
            }
            SystemConfig::Finite { lengths, orientations, .. } => {
                if let Some(o) = orientations {
                    if o.len() != lengths.len() {
                        return Err(Error::Parse(format!(
                            "{path}.orientations: {} entries for {} lengths",
                            o.len(),
                            lengths.len()
                        )));
                    }
                }
                let entries = lengths
                    .iter()
                    .enumerate()
                    .map(|(i, text)| {
                        let len = rational::parse(text).map_err(at(format!("{path}.lengths[{i}]")))?;
                        let o = orientations.as_ref().map_or(OrientationConfig::Increasing, |o| o[i]);
                        Ok((len, fixed_orientation(o, &format!("{path}.orientations[{i}]"))?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GlsSystem::finite(sym, &entries).map_err(at(format!("{path}.lengths")))
            }
            SystemConfig::Intervals { intervals, .. } => {
                let parsed = intervals
                    .iter()
                    .enumerate()
                    .map(|(i, (l, r, o))| {
                        let p = format!("{path}.intervals[{i}]");
                        Ok((
                            rational::parse(l).map_err(at(p.clone()))?,
                            rational::parse(r).map_err(at(p.clone()))?,
                            fixed_orientation(*o, &p)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GlsSystem::from_intervals(sym, parsed).map_err(at(format!("{path}.intervals")))
            }
        }
    }
}

impl FamilyConfig {
    /// Parses JSON, reporting the field path of the first error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse(format!("{path}: {inner} (line {}, column {})", inner.line(), inner.column()))
        })
    }

    pub fn build(&self) -> Result<Family> {
        if self.systems.is_empty() {
            return Err(Error::Parse("systems: at least one system is required".into()));
        }
        let systems = self
            .systems
            .iter()
            .enumerate()
            .map(|(i, s)| s.build(&format!("systems[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Family::new(systems).map_err(at("systems".into()))
    }

    pub fn single(system: SystemConfig) -> Self {
        FamilyConfig { systems: vec![system], alpha: None, omega: None }
    }
}

pub fn load_family(text: &str) -> Result<(Family, FamilyConfig)> {
    let config = FamilyConfig::from_json(text)?;
    let family = config.build()?;
    Ok((family, config))
}

fn parse_f64(text: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| Error::Parse(format!("number {text:?}")))
}

fn parse_tail(spec: &str) -> Result<Tail> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| Error::Parse(format!("tail {spec:?}")))?;
    match kind.trim() {
        "geometric" => Ok(Tail::Geometric(rational::parse(arg)?)),
        "power" => Ok(Tail::Power(parse_f64(arg)?)),
        "logpower" => Ok(Tail::LogPower(parse_f64(arg)?)),
        other => Err(Error::Parse(format!("unknown tail rule {other:?}"))),
    }
}

/// One conditional law.
pub fn parse_law(spec: &str) -> Result<ConditionalLaw> {
    let spec = spec.trim();
    let (kind, arg) = spec.split_once(':').ok_or_else(|| Error::Parse(format!("law {spec:?} needs kind:argument")))?;
    let int = |t: &str| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("integer {t:?}")));
    match kind.trim() {
        "geometric" => ConditionalLaw::geometric(rational::parse(arg)?),
        "power" => ConditionalLaw::power(parse_f64(arg)?),
        "logpower" => ConditionalLaw::log_power(parse_f64(arg)?),
        "dirac" => ConditionalLaw::dirac(int(arg)?),
        "uniform" => ConditionalLaw::uniform(int(arg)?),
        "list" => {
            let (head, tail) = match arg.split_once('|') {
                Some((h, t)) => (h, parse_tail(t)?),
                None => (arg, Tail::Zero),
            };
            let head = head.split(',').map(rational::parse).collect::<Result<Vec<_>>>()?;
            ConditionalLaw::new(head, tail)
        }
        other => Err(Error::Parse(format!("unknown law {other:?}"))),
    }
}

/// α from `law` (one-system families) or `ID@weight=law;…`.
pub fn parse_alpha(family: &Family, spec: &str) -> Result<FrequencyVector> {
    let spec = spec.trim();
    if !spec.contains('@') {
        if family.len() != 1 {
            return Err(Error::Parse(format!(
                "alpha {spec:?}: a family of {} systems needs ID@weight=law entries",
                family.len()
            )));
        }
        return FrequencyVector::singleton(family, parse_law(spec)?);
    }
    let mut weights: Vec<Option<Rational>> = vec![None; family.len()];
    let mut laws: Vec<Option<ConditionalLaw>> = vec![None; family.len()];
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let (head, law) = part.split_once('=').ok_or_else(|| Error::Parse(format!("alpha entry {part:?}")))?;
        let (id, w) = head.split_once('@').ok_or_else(|| Error::Parse(format!("alpha entry {part:?}")))?;
        let s = family.index_of(id.trim())?;
        if weights[s].is_some() {
            return Err(Error::Parse(format!("alpha: symbol {id} given twice")));
        }
        weights[s] = Some(rational::parse(w)?);
        laws[s] = Some(parse_law(law)?);
    }
    let missing = |s: usize| Error::Parse(format!("alpha: no entry for symbol {}", family.symbol(s)));
    let weights = weights.into_iter().enumerate().map(|(s, w)| w.ok_or_else(|| missing(s))).collect::<Result<_>>()?;
    let laws = laws.into_iter().enumerate().map(|(s, l)| l.ok_or_else(|| missing(s))).collect::<Result<_>>()?;
    FrequencyVector::new(family, weights, laws)
}

fn symbol_list(family: &Family, text: &str) -> Result<Vec<usize>> {
    text.split(',').filter(|t| !t.trim().is_empty()).map(|t| family.index_of(t.trim())).collect()
}

/// ω rule; `weave` and `bernoulli` default to the symbol weights of α.
pub fn parse_omega(family: &Family, spec: &str, alpha: Option<&FrequencyVector>) -> Result<crate::gls::OmegaRule> {
    use crate::gls::OmegaRule;
    let spec = spec.trim();
    let default_weights = || -> Vec<f64> {
        alpha.map_or_else(|| vec![1.0 / family.len() as f64; family.len()], |a| a.weights().to_vec())
    };
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let rule = match kind {
        "weave" if arg.is_empty() => OmegaRule::Weave { targets: default_weights() },
        "weave" => OmegaRule::Weave {
            targets: arg.split(',').map(|t| rational::parse(t).map(|r| rational::to_f64(&r))).collect::<Result<_>>()?,
        },
        "bernoulli" => OmegaRule::Bernoulli {
            probs: default_weights(),
            seed: if arg.is_empty() {
                0
            } else {
                arg.trim().parse().map_err(|_| Error::Parse(format!("seed {arg:?}")))?
            },
        },
        "constant" => OmegaRule::constant(family.index_of(arg.trim())?),
        "periodic" => OmegaRule::periodic(symbol_list(family, arg)?),
        "prefix" => {
            let (pre, rest) =
                arg.split_once(';').ok_or_else(|| Error::Parse(format!("omega {spec:?} needs prefix:…;periodic:…")))?;
            let cycle = rest
                .trim()
                .strip_prefix("periodic:")
                .ok_or_else(|| Error::Parse(format!("omega {spec:?} needs prefix:…;periodic:…")))?;
            OmegaRule::Periodic { prefix: symbol_list(family, pre)?, cycle: symbol_list(family, cycle)? }
        }
        other => return Err(Error::Parse(format!("unknown omega rule {other:?}"))),
    };
    rule.validate(family.len())?;
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    const MIXED: &str = r#"{
        "systems": [
            { "symbol": "L", "kind": "luroth" },
            { "symbol": "B", "kind": "finite", "lengths": ["1/2", "1/2"] }
        ],
        "alpha": "L@1/2=geometric:1/2;B@1/2=uniform:2",
        "omega": "periodic:L,B"
    }"#;

    #[test]
    fn loads_mixed_family() {
        let (fam, cfg) = load_family(MIXED).unwrap();
        assert_eq!(fam.len(), 2);
        let alpha = parse_alpha(&fam, cfg.alpha.as_deref().unwrap()).unwrap();
        assert_eq!(alpha.alpha_exact(0, 2), Some(frac(1, 8)));
        let omega = parse_omega(&fam, cfg.omega.as_deref().unwrap(), Some(&alpha)).unwrap();
        assert_eq!(omega.prefix(4), vec![0, 1, 0, 1]);
    }

    #[test]
    fn reports_field_paths() {
        let bad = r#"{ "systems": [ { "symbol": "F", "kind": "finite", "lengths": ["0.5", "0.49"] } ] }"#;
        let err = load_family(bad).unwrap_err().to_string();
        assert!(err.contains("systems[0].lengths"), "{err}");
        let bad = r#"{ "systems": [ { "symbol": "F", "kind": "luroth", "colour": 1 } ] }"#;
        let err = load_family(bad).unwrap_err().to_string();
        assert!(err.contains("systems[0]"), "{err}");
    }

    #[test]
    fn law_specs() {
        assert_eq!(parse_law("dirac:2").unwrap().prob(2), 1.0);
        let l = parse_law("list:1/2,1/4|geometric:1/2").unwrap();
        assert_eq!(l.prob_exact(3), Some(frac(1, 8)));
        assert!(parse_law("list:1/2,1/4").is_err());
        assert!(parse_law("zipf:2").is_err());
    }
}
