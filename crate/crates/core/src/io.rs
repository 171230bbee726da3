//! JSON input schemas and CSV export.
//!
//! A polytope is `{"dim": n, "vertices": [["p/q", …], …]}` or
//! `{"facets": [{"normal": [ints], "offset": "p/q"}, …]}`; a function is
//! `{"pieces": [{"slope": [...], "constant": "p/q"}, …]}`. An input file holds
//! one configuration (`{"polytope": …, "function": …}`) or a list of them under
//! `"configs"`. Validation runs during deserialization so every rejection
//! carries the line and column reported by `serde_json`.

use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePolytope;
use crate::plfun::PlConvex;
use crate::quantize::{ToricTestConfig, WeightSpectrum};
use crate::rational::{parse_q, serde_q, serde_qmat, QVec, Q};

#[derive(Serialize, Deserialize)]
struct FacetRepr {
    normal: Vec<i64>,
    #[serde(with = "serde_q")]
    offset: Q,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, with = "opt_qmat", skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<QVec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<FacetRepr>>,
}

mod opt_qmat {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Deserialize)]
    struct M(#[serde(with = "serde_qmat")] Vec<QVec>);

    pub fn serialize<S: Serializer>(m: &Option<Vec<QVec>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_qmat::serialize(m.as_deref().unwrap_or_default(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<QVec>>, D::Error> {
        Ok(Some(M::deserialize(d)?.0))
    }
}

impl TryFrom<PolytopeRepr> for LatticePolytope {
    type Error = Error;

    fn try_from(r: PolytopeRepr) -> Result<Self> {
        let p = match (r.vertices, r.facets) {
            (Some(v), None) => {
                if let Some(n) = r.dim {
                    if v.iter().any(|x| x.len() != n) {
                        return Err(Error::invalid(format!("every vertex must have {n} coordinates")));
                    }
                }
                LatticePolytope::from_vertices(v)?
            }
            (None, Some(f)) => {
                let rows: Vec<(QVec, Q)> = f
                    .into_iter()
                    .map(|f| (f.normal.iter().map(|&u| Q::from_integer(u.into())).collect(), f.offset))
                    .collect();
                LatticePolytope::from_inequalities(&rows)?
            }
            _ => return Err(Error::invalid("polytope needs exactly one of \"vertices\" or \"facets\"")),
        };
        match r.dim {
            Some(n) if n != p.dim() => Err(Error::invalid(format!("declared dim {n} but polytope has dim {}", p.dim()))),
            _ => Ok(p),
        }
    }
}

impl From<LatticePolytope> for PolytopeRepr {
    fn from(p: LatticePolytope) -> Self {
        PolytopeRepr { dim: Some(p.dim()), vertices: Some(p.vertices().to_vec()), facets: None }
    }
}

impl Serialize for LatticePolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeRepr::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticePolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolytopeRepr::deserialize(d)?;
        LatticePolytope::try_from(r).map_err(serde::de::Error::custom)
    }
}

/// One labelled configuration `(P, f)` with `f` in the original (unscaled) form.
#[derive(Debug, Clone)]
pub struct NamedConfig {
    pub id: String,
    pub config: ToricTestConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRepr {
    #[serde(default)]
    id: Option<String>,
    polytope: LatticePolytope,
    function: PlConvex,
}

#[derive(Deserialize)]
struct ConfigFields(#[serde(deserialize_with = "deserialize_config")] (Option<String>, ToricTestConfig));

fn deserialize_config<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<(Option<String>, ToricTestConfig), D::Error> {
    let r = ConfigRepr::deserialize(d)?;
    let tc = ToricTestConfig::new(r.polytope, r.function).map_err(serde::de::Error::custom)?;
    Ok((r.id, tc))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchRepr {
    configs: Vec<ConfigFields>,
}

/// Parses an input file holding one configuration or a `"configs"` list.
pub fn parse_input(text: &str) -> Result<Vec<NamedConfig>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let named = |i: usize, id: Option<String>, config| NamedConfig { id: id.unwrap_or_else(|| format!("c{i}")), config };
    // Deserialize from the text (not the value) so errors keep their positions.
    if value.get("configs").is_some() {
        let batch: BatchRepr = serde_json::from_str(text).map_err(json_error)?;
        if batch.configs.is_empty() {
            return Err(Error::invalid("\"configs\" is empty"));
        }
        Ok(batch.configs.into_iter().enumerate().map(|(i, ConfigFields((id, c)))| named(i, id, c)).collect())
    } else {
        let ConfigFields((id, c)) = serde_json::from_str(text).map_err(json_error)?;
        Ok(vec![named(0, id, c)])
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::invalid(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e.to_string())))
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

/// Parses a basis matrix such as `[[1,0],["1/2",1]]`.
pub fn parse_basis(text: &str) -> Result<Vec<QVec>> {
    #[derive(Deserialize)]
    struct M(#[serde(with = "serde_qmat")] Vec<QVec>);
    serde_json::from_str::<M>(text).map(|m| m.0).map_err(json_error)
}

/// One row per lattice point: `k, coords…, raw_weight, centered_weight`.
pub fn spectrum_csv(spec: &WeightSpectrum) -> String {
    let n = spec.points.first().map_or(0, Vec::len);
    let mut out = String::from("k");
    for j in 0..n {
        let _ = write!(out, ",x{j}");
    }
    out.push_str(",raw_weight,centered_weight\n");
    for ((a, raw), c) in spec.points.iter().zip(&spec.raw_weights).zip(&spec.centered_weights) {
        let _ = write!(out, "{}", spec.k);
        for x in a {
            let _ = write!(out, ",{x}");
        }
        let _ = writeln!(out, ",{raw},{c}");
    }
    out
}

/// Reads back `(N_k, Σ raw, Σ centered)` from [`spectrum_csv`] output.
pub fn resum_spectrum_csv(text: &str) -> Result<(usize, Q, Q)> {
    let mut lines = text.lines();
    lines.next().ok_or_else(|| Error::invalid("empty spectrum CSV"))?;
    let (mut count, mut raw, mut centered) = (0, Q::zero(), Q::zero());
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 3 {
            return Err(Error::invalid(format!("line {}: too few columns", i + 2)));
        }
        raw += parse_q(cells[cells.len() - 2])?;
        centered += parse_q(cells[cells.len() - 1])?;
        count += 1;
    }
    Ok((count, raw, centered))
}
