//! A geometric scenario on one chart: domain, metric, almost complex
//! structure and connection.

use crate::connections::Conn;
use crate::error::{GeomError, Result};
use crate::fields::{ChartDomain, Field, TensorJet};
use crate::structures::{self, AlmostComplexStructure, Metric, MetricFlavor};

#[derive(Clone)]
pub struct ChartModel {
    pub domain: ChartDomain,
    pub metric: Option<Metric>,
    pub j: Option<AlmostComplexStructure>,
    pub connection: Option<Conn>,
}

/// Everything the pointwise operators need at one sample point.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub x: Vec<f64>,
    pub flavor: MetricFlavor,
    pub j: Option<TensorJet>,
    pub b: Option<TensorJet>,
    /// `b(Λ·, ·)`, present when both `b` and `Λ` are.
    pub form: Option<TensorJet>,
}

impl PointFrame {
    pub fn j(&self) -> Result<&TensorJet> {
        self.j.as_ref().ok_or_else(|| GeomError::MissingField("J".into()))
    }
    pub fn b(&self) -> Result<&TensorJet> {
        self.b.as_ref().ok_or_else(|| GeomError::MissingField(self.metric_name().into()))
    }
    pub fn form(&self) -> Result<&TensorJet> {
        self.form
            .as_ref()
            .ok_or_else(|| GeomError::MissingField(format!("{} and J", self.metric_name())))
    }
    fn metric_name(&self) -> &'static str {
        match self.flavor {
            MetricFlavor::Norden => "h",
            _ => "g",
        }
    }
}

impl ChartModel {
    pub fn new(domain: ChartDomain) -> Self {
        ChartModel {
            domain,
            metric: None,
            j: None,
            connection: None,
        }
    }

    pub fn with_metric(mut self, m: Metric) -> Self {
        self.metric = Some(m);
        self
    }
    pub fn with_j(mut self, j: AlmostComplexStructure) -> Self {
        self.j = Some(j);
        self
    }
    pub fn with_connection(mut self, c: Conn) -> Self {
        self.connection = Some(c);
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn flavor(&self) -> MetricFlavor {
        self.metric.as_ref().map(|m| m.flavor).unwrap_or(MetricFlavor::Plain)
    }

    pub fn j_field(&self) -> Result<Field> {
        self.j
            .as_ref()
            .map(|j| j.field.clone())
            .ok_or_else(|| GeomError::MissingField("J".into()))
    }

    pub fn metric_field(&self) -> Result<Field> {
        self.metric
            .as_ref()
            .map(|m| m.field.clone())
            .ok_or_else(|| GeomError::MissingField("g".into()))
    }

    pub fn connection(&self) -> Result<Conn> {
        self.connection
            .clone()
            .ok_or_else(|| GeomError::MissingField("Gamma".into()))
    }

    /// `ω` for Hermitian models, `ℏ` for Norden ones.
    pub fn form_field(&self) -> Result<Field> {
        let b = self.metric_field()?;
        let j = self.j_field()?;
        match self.flavor() {
            MetricFlavor::Norden => Ok(structures::twin_metric(b, j)),
            MetricFlavor::Hermitian => Ok(structures::fundamental_two_form(b, j)),
            MetricFlavor::Plain => Err(GeomError::precondition(
                "a plain metric has no associated form; declare it hermitian or norden",
            )),
        }
    }

    /// Collects jets at `x`. Fields that are absent stay `None`.
    pub fn frame(&self, x: &[f64]) -> Result<PointFrame> {
        self.domain.check(x)?;
        let j = match &self.j {
            Some(j) => Some(j.field.jet(x)?),
            None => None,
        };
        let b = match &self.metric {
            Some(m) => Some(m.field.jet(x)?),
            None => None,
        };
        let form = match (&j, &b) {
            (Some(j), Some(b)) => Some(structures::form_jet(j, b)),
            _ => None,
        };
        Ok(PointFrame {
            x: x.to_vec(),
            flavor: self.flavor(),
            j,
            b,
            form,
        })
    }
}
