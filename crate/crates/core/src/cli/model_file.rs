//! The JSON model file: chart box, polynomial fields and an optional
//! generator spec that fills in whatever the file leaves out.

use std::sync::Arc;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::connections::PolyConnection;
use crate::error::{GeomError, Result};
use crate::fields::{ChartDomain, PolyExpr, SmoothTensorField, Term, Valence};
use crate::generate::models::{build_model, ModelKind};
use crate::generate::rng::{label_salt, trial_rng};
use crate::generate::synthesis::raise_lowered;
use crate::generate::{gen_connection, Constraint, GenSpec};
use crate::model::ChartModel;
use crate::structures::{AlmostComplexStructure, Metric, MetricFlavor};

pub const FORMAT_VERSION: u64 = 1;

/// A generator spec as written in a model file. The dimension is the
/// file's own.
#[derive(Debug, Clone, PartialEq)]
pub struct GenEntry {
    pub kind: ModelKind,
    pub seed: u64,
    pub degree: u32,
    pub coef_bound: f64,
    pub constraints: Vec<Constraint>,
}

impl GenEntry {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        GenEntry {
            kind,
            seed,
            degree: 2,
            coef_bound: 0.5,
            constraints: vec![],
        }
    }

    fn spec(&self, dim: usize) -> GenSpec {
        let mut s = GenSpec::new(self.seed, dim);
        s.degree = self.degree;
        s.coef_bound = self.coef_bound;
        s.constraints = self.constraints.iter().copied().collect();
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub version: u64,
    pub domain: ChartDomain,
    pub metric: Option<(MetricFlavor, SmoothTensorField)>,
    pub j: Option<SmoothTensorField>,
    pub gamma: Option<SmoothTensorField>,
    /// `C_{ijl} = b_{kl} Γ^k_{ij}`; the connection is raised through the metric.
    pub gamma_lowered: Option<SmoothTensorField>,
    pub genspec: Option<GenEntry>,
}

impl ModelFile {
    pub fn new(domain: ChartDomain) -> Self {
        ModelFile {
            version: FORMAT_VERSION,
            domain,
            metric: None,
            j: None,
            gamma: None,
            gamma_lowered: None,
            genspec: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn with_metric(mut self, flavor: MetricFlavor, g: SmoothTensorField) -> Self {
        self.metric = Some((flavor, g));
        self
    }

    pub fn with_j(mut self, j: SmoothTensorField) -> Self {
        self.j = Some(j);
        self
    }

    pub fn with_gamma(mut self, gamma: SmoothTensorField) -> Self {
        self.gamma = Some(gamma);
        self.gamma_lowered = None;
        self
    }

    pub fn with_gamma_lowered(mut self, c: SmoothTensorField) -> Self {
        self.gamma_lowered = Some(c);
        self.gamma = None;
        self
    }

    pub fn with_genspec(mut self, g: GenEntry) -> Self {
        self.genspec = Some(g);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| {
            GeomError::schema(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        Self::from_value(&v)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_pretty()).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let root = object(v, "")?;
        for key in root.keys() {
            if !["version", "dimension", "domain", "fields", "genspec"].contains(&key.as_str()) {
                return Err(GeomError::schema(key.clone(), "unknown key"));
            }
        }
        let version = get(root, "", "version")?
            .as_u64()
            .ok_or_else(|| GeomError::schema("version", "expected a non-negative integer"))?;
        if version != FORMAT_VERSION {
            return Err(GeomError::schema(
                "version",
                format!("unsupported version {version}, expected {FORMAT_VERSION}"),
            ));
        }
        let dim = get(root, "", "dimension")?
            .as_u64()
            .ok_or_else(|| GeomError::schema("dimension", "expected a non-negative integer"))? as usize;
        let domain = parse_domain(get(root, "", "domain")?, dim)?;
        let mut out = ModelFile::new(domain);

        if let Some(f) = root.get("fields") {
            let fields = object(f, "fields")?;
            for key in fields.keys() {
                if !["g", "h", "J", "Gamma", "Gamma_lowered"].contains(&key.as_str()) {
                    return Err(GeomError::schema(format!("fields.{key}"), "unknown field"));
                }
            }
            match (fields.get("g"), fields.get("h")) {
                (Some(_), Some(_)) => {
                    return Err(GeomError::schema("fields", "exactly one of `g` and `h` may be given"));
                }
                (Some(g), None) => out.metric = Some(parse_metric(g, "fields.g", dim, MetricFlavor::Hermitian)?),
                (None, Some(h)) => out.metric = Some(parse_metric(h, "fields.h", dim, MetricFlavor::Norden)?),
                (None, None) => {}
            }
            if let Some(j) = fields.get("J") {
                out.j = Some(parse_field(j, "fields.J", dim, Valence::ENDO)?);
            }
            if fields.contains_key("Gamma") && fields.contains_key("Gamma_lowered") {
                return Err(GeomError::schema("fields", "give `Gamma` or `Gamma_lowered`, not both"));
            }
            if let Some(g) = fields.get("Gamma") {
                out.gamma = Some(parse_field(g, "fields.Gamma", dim, Valence::VECTOR_2FORM)?);
            }
            if let Some(c) = fields.get("Gamma_lowered") {
                out.gamma_lowered = Some(parse_field(c, "fields.Gamma_lowered", dim, Valence::TRILINEAR)?);
            }
        }
        if let Some(g) = root.get("genspec") {
            out.genspec = Some(parse_genspec(g)?);
        }
        if out.gamma_lowered.is_some() && out.metric.is_none() && out.genspec.is_none() {
            return Err(GeomError::schema("fields.Gamma_lowered", "needs a metric to raise the index"));
        }
        Ok(out)
    }

    /// The canonical JSON value: sorted keys, normalized polynomials.
    pub fn to_value(&self) -> Value {
        let mut fields = Map::new();
        if let Some((flavor, g)) = &self.metric {
            let key = if *flavor == MetricFlavor::Norden { "h" } else { "g" };
            fields.insert(
                key.into(),
                json!({ "flavor": flavor, "components": field_value(g) }),
            );
        }
        if let Some(j) = &self.j {
            fields.insert("J".into(), field_value(j));
        }
        if let Some(g) = &self.gamma {
            fields.insert("Gamma".into(), field_value(g));
        }
        if let Some(c) = &self.gamma_lowered {
            fields.insert("Gamma_lowered".into(), field_value(c));
        }
        let mut root = Map::new();
        root.insert("version".into(), json!(self.version));
        root.insert("dimension".into(), json!(self.dim()));
        root.insert(
            "domain".into(),
            json!({ "lower": self.domain.lower, "upper": self.domain.upper }),
        );
        root.insert("fields".into(), Value::Object(fields));
        if let Some(g) = &self.genspec {
            root.insert(
                "genspec".into(),
                json!({
                    "kind": g.kind,
                    "seed": g.seed,
                    "degree": g.degree,
                    "coef_bound": g.coef_bound,
                    "constraints": g.constraints,
                }),
            );
        }
        Value::Object(root)
    }

    pub fn canonical(&self) -> String {
        self.to_value().to_string()
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("model json");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Builds the model: generated fields first, explicit ones on top, and
    /// finally a recipe connection when the genspec lists constraints and
    /// no Christoffel symbols are given.
    pub fn to_model(&self) -> Result<ChartModel> {
        let dim = self.dim();
        let mut rng = trial_rng(self.genspec.as_ref().map_or(0, |g| g.seed), dim, 0, label_salt("model-file"));
        let mut model = match &self.genspec {
            Some(g) => {
                let spec = g.spec(dim);
                spec.validate()?;
                let mut m = build_model(g.kind, &spec, &mut rng)?;
                m.domain = self.domain.clone();
                m
            }
            None => ChartModel::new(self.domain.clone()),
        };
        if let Some((flavor, g)) = &self.metric {
            model.metric = Some(Metric::new(*flavor, Arc::new(g.clone()))?);
        }
        if let Some(j) = &self.j {
            model.j = Some(AlmostComplexStructure::new(Arc::new(j.clone()))?);
        }
        if let Some(g) = &self.gamma {
            model.connection = Some(PolyConnection::new(g.clone())?.arc());
        } else if let Some(c) = &self.gamma_lowered {
            model.connection = Some(raise_lowered(model.metric_field()?, Arc::new(c.clone())));
        } else if let Some(g) = self.genspec.as_ref().filter(|g| !g.constraints.is_empty()) {
            model.connection = Some(gen_connection(&g.spec(dim), &mut rng, &model)?);
        }
        Ok(model)
    }

    /// The same file with its connection replaced by the closed-form
    /// recipe for `set`, kept as a genspec so that it can be regenerated.
    pub fn with_recipe(&self, set: &[Constraint], seed: u64) -> Self {
        let mut out = self.clone();
        out.gamma = None;
        out.gamma_lowered = None;
        let mut g = match &self.genspec {
            Some(g) => g.clone(),
            None => {
                let kind = match self.metric.as_ref().map(|m| m.0) {
                    Some(MetricFlavor::Norden) => ModelKind::FlatNorden,
                    _ => ModelKind::FlatHermitian,
                };
                GenEntry::new(kind, seed)
            }
        };
        g.constraints = set.to_vec();
        out.genspec = Some(g);
        out
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| GeomError::schema(display_path(path), "expected an object"))
}

fn get<'a>(m: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    m.get(key)
        .ok_or_else(|| GeomError::schema(join(path, key), "missing required key"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn display_path(path: &str) -> String {
    if path.is_empty() {
        "<root>".into()
    } else {
        path.into()
    }
}

fn numbers(v: &Value, path: &str, len: usize) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| GeomError::schema(path, "expected an array of numbers"))?;
    if arr.len() != len {
        return Err(GeomError::schema(path, format!("length {} but dimension is {len}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| GeomError::schema(format!("{path}[{i}]"), "expected a number"))
        })
        .collect()
}

fn parse_domain(v: &Value, dim: usize) -> Result<ChartDomain> {
    let m = object(v, "domain")?;
    let lower = numbers(get(m, "domain", "lower")?, "domain.lower", dim)?;
    let upper = numbers(get(m, "domain", "upper")?, "domain.upper", dim)?;
    ChartDomain::new(lower, upper).map_err(|e| GeomError::schema("domain", e.to_string()))
}

fn parse_metric(v: &Value, path: &str, dim: usize, default: MetricFlavor) -> Result<(MetricFlavor, SmoothTensorField)> {
    let (flavor, comps) = match v {
        Value::Object(m) => {
            let flavor = match m.get("flavor") {
                None => default,
                Some(f) => serde_json::from_value::<MetricFlavor>(f.clone()).map_err(|_| {
                    GeomError::schema(join(path, "flavor"), "expected hermitian, norden or plain")
                })?,
            };
            (flavor, get(m, path, "components")?)
        }
        _ => (default, v),
    };
    let key_is_h = path.ends_with(".h");
    if key_is_h != (flavor == MetricFlavor::Norden) {
        return Err(GeomError::schema(
            join(path, "flavor"),
            "a Norden metric is written under `h`, any other metric under `g`",
        ));
    }
    Ok((flavor, parse_field(comps, &join(path, "components"), dim, Valence::BILINEAR)?))
}

fn parse_field(v: &Value, path: &str, dim: usize, valence: Valence) -> Result<SmoothTensorField> {
    let rank = valence.rank();
    let mut comps = Vec::with_capacity(dim.pow(rank as u32));
    collect(v, path, dim, rank, &mut comps)?;
    SmoothTensorField::new(dim, valence, comps).map_err(|e| GeomError::schema(path, e.to_string()))
}

/// Walks a nested list `rank` levels deep, row-major.
fn collect(v: &Value, path: &str, dim: usize, depth: usize, out: &mut Vec<PolyExpr>) -> Result<()> {
    if depth == 0 {
        out.push(parse_poly(v, path, dim)?);
        return Ok(());
    }
    let arr = v
        .as_array()
        .ok_or_else(|| GeomError::schema(path, format!("expected a nested list of depth {depth}")))?;
    if arr.len() != dim {
        return Err(GeomError::schema(path, format!("length {} but dimension is {dim}", arr.len())));
    }
    for (i, x) in arr.iter().enumerate() {
        collect(x, &format!("{path}[{i}]"), dim, depth - 1, out)?;
    }
    Ok(())
}

/// A component is a list of `{"exp", "coef"}` terms or a bare number.
fn parse_poly(v: &Value, path: &str, dim: usize) -> Result<PolyExpr> {
    if let Some(c) = v.as_f64() {
        return Ok(PolyExpr::constant(c, dim));
    }
    let arr = v
        .as_array()
        .ok_or_else(|| GeomError::schema(path, "expected a list of terms or a number"))?;
    let mut terms = Vec::with_capacity(arr.len());
    for (i, t) in arr.iter().enumerate() {
        let term: Term = serde_json::from_value(t.clone()).map_err(|e| {
            GeomError::schema(
                format!("{path}[{i}]"),
                format!("expected {{\"exp\": [..], \"coef\": number}}: {e}"),
            )
        })?;
        terms.push(term);
    }
    PolyExpr::from_terms(dim, &terms).map_err(|e| match e {
        GeomError::Schema { path: sub, message } => {
            GeomError::schema(format!("{path}{}", sub.trim_start_matches("terms")), message)
        }
        other => other,
    })
}

fn field_value(f: &SmoothTensorField) -> Value {
    fn nest(comps: &[PolyExpr], dim: usize, depth: usize) -> Value {
        if depth == 0 {
            return serde_json::to_value(comps[0].to_terms()).expect("terms");
        }
        let stride = comps.len() / dim;
        Value::Array((0..dim).map(|i| nest(&comps[i * stride..(i + 1) * stride], dim, depth - 1)).collect())
    }
    nest(f.components(), f.dim(), f.valence().rank())
}

fn parse_genspec(v: &Value) -> Result<GenEntry> {
    let m = object(v, "genspec")?;
    for key in m.keys() {
        if !["kind", "seed", "degree", "coef_bound", "constraints"].contains(&key.as_str()) {
            return Err(GeomError::schema(format!("genspec.{key}"), "unknown key"));
        }
    }
    let kind: ModelKind = serde_json::from_value(get(m, "genspec", "kind")?.clone())
        .map_err(|e| GeomError::schema("genspec.kind", e.to_string()))?;
    let mut g = GenEntry::new(kind, 0);
    if let Some(s) = m.get("seed") {
        g.seed = s
            .as_u64()
            .ok_or_else(|| GeomError::schema("genspec.seed", "expected a non-negative integer"))?;
    }
    if let Some(d) = m.get("degree") {
        g.degree = d
            .as_u64()
            .and_then(|d| u32::try_from(d).ok())
            .ok_or_else(|| GeomError::schema("genspec.degree", "expected a non-negative integer"))?;
    }
    if let Some(c) = m.get("coef_bound") {
        g.coef_bound = c
            .as_f64()
            .filter(|c| *c > 0.0)
            .ok_or_else(|| GeomError::schema("genspec.coef_bound", "expected a positive number"))?;
    }
    if let Some(c) = m.get("constraints") {
        g.constraints = serde_json::from_value(c.clone())
            .map_err(|e| GeomError::schema("genspec.constraints", e.to_string()))?;
    }
    Ok(g)
}
