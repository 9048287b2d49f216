//! Run configuration: TOML with one table per subsystem and an explicit unit
//! suffix on every dimensioned key, e.g. `shunt_capacitance_fF = 137`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::quantity::Quantity;
use crate::circuit::CircuitParams;
use crate::error::{Error, Result};
use crate::fluorescence::TwoLevelParams;
use crate::kerr::{KerrModel, DEFAULT_TRUNCATION};
use crate::magnetics::{Assembly, CoilGeometry, HelmholtzPair, Vec3, DEFAULT_WIRE_DIAMETER};

/// Typed, unit-checked view of one TOML table. Every key must be consumed;
/// leftovers are reported by [`Section::finish`].
pub struct Section<'a> {
    name: String,
    table: &'a Table,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Section<'a> {
    pub fn new(name: &str, table: &'a Table) -> Self {
        Self {
            name: name.to_string(),
            table,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("[{}] {msg}", self.name))
    }

    /// The single key `base_<suffix>` and its suffix.
    fn find(&self, base: &str) -> Result<Option<(&'a str, &'a str, &'a Value)>> {
        let prefix = format!("{base}_");
        let mut hits = self
            .table
            .iter()
            .filter(|(k, _)| k.as_str() == base || k.starts_with(&prefix))
            .map(|(k, v)| (k.as_str(), k.get(prefix.len().min(k.len())..).unwrap_or(""), v));
        let first = hits.next();
        if let Some((k, _, _)) = hits.next() {
            return Err(self.err(format!("key '{base}' given more than once (also as '{k}')")));
        }
        if let Some((k, suffix, _)) = first {
            self.used.borrow_mut().insert(k.to_string());
            if suffix.is_empty() {
                return Err(self.err(format!("key '{k}' needs a unit suffix")));
            }
        }
        Ok(first)
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.err(format!("key '{key}' must be a number"))),
        }
    }

    pub fn quantity(&self, base: &str, q: Quantity) -> Result<Option<f64>> {
        let Some((key, suffix, v)) = self.find(base)? else {
            return Ok(None);
        };
        let x = self.number(key, v)?;
        q.to_si(x, suffix).map(Some).map_err(|e| self.err(format!("{key}: {e}")))
    }

    pub fn required(&self, base: &str, q: Quantity) -> Result<f64> {
        self.quantity(base, q)?
            .ok_or_else(|| self.err(format!("missing key '{base}_<unit>'")))
    }

    pub fn quantity_list(&self, base: &str, q: Quantity) -> Result<Option<Vec<f64>>> {
        let Some((key, suffix, v)) = self.find(base)? else {
            return Ok(None);
        };
        let Value::Array(items) = v else {
            return Err(self.err(format!("key '{key}' must be an array")));
        };
        items
            .iter()
            .map(|x| {
                let x = self.number(key, x)?;
                q.to_si(x, suffix).map_err(|e| self.err(format!("{key}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Dimensionless value under its exact key.
    pub fn scalar(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => {
                self.used.borrow_mut().insert(key.to_string());
                self.number(key, v).map(Some)
            }
        }
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => {
                self.used.borrow_mut().insert(key.to_string());
                Ok(Some(*i as usize))
            }
            Some(_) => Err(self.err(format!("key '{key}' must be a non-negative integer"))),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<&'a str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => {
                self.used.borrow_mut().insert(key.to_string());
                Ok(Some(s.as_str()))
            }
            Some(_) => Err(self.err(format!("key '{key}' must be a string"))),
        }
    }

    pub fn vector(&self, base: &str, q: Option<Quantity>) -> Result<Option<Vec3>> {
        let values = match q {
            Some(q) => self.quantity_list(base, q)?,
            None => match self.table.get(base) {
                None => None,
                Some(Value::Array(items)) => {
                    self.used.borrow_mut().insert(base.to_string());
                    Some(items.iter().map(|x| self.number(base, x)).collect::<Result<Vec<_>>>()?)
                }
                Some(_) => return Err(self.err(format!("key '{base}' must be an array"))),
            },
        };
        match values {
            None => Ok(None),
            Some(v) if v.len() == 3 => Ok(Some(Vec3::new(v[0], v[1], v[2]))),
            Some(v) => Err(self.err(format!("key '{base}' needs 3 components, got {}", v.len()))),
        }
    }

    /// Errors on any key that was never read.
    pub fn finish(self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .table
            .keys()
            .filter(|k| !used.contains(k.as_str()))
            .map(|k| k.as_str())
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(self.err(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

/// Probe sweep of the two-level model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluorescenceSweep {
    /// On-chip powers (W).
    pub powers: Vec<f64>,
    /// Full probe span around f₁ (Hz).
    pub span: f64,
    pub points: usize,
    /// Generator-to-chip attenuation (dB), reported in trace metadata.
    pub attenuation_db: f64,
}

/// Probe windows around the analytic ladder frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweep {
    /// On-chip powers (W), increasing.
    pub powers: Vec<f64>,
    pub max_order: usize,
    /// Probe step (Hz).
    pub step: f64,
    /// Half width of the window around each ladder frequency (Hz).
    pub half_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSweep {
    /// In-plane fields (T).
    pub fields: Vec<f64>,
}

/// Parsed run configuration. Sections that are absent stay `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub circuit: Option<CircuitParams>,
    pub qubit: Option<TwoLevelParams>,
    pub kerr: Option<KerrModel>,
    pub fluorescence: Option<FluorescenceSweep>,
    pub spectrum: Option<SpectrumSweep>,
    pub field: Option<FieldSweep>,
    /// SHA-256 of the canonicalised document.
    pub digest: String,
}

fn table<'a>(root: &'a Table, name: &str) -> Result<Option<&'a Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(Error::Config(format!("'{name}' must be a table"))),
    }
}

fn parse_toml(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| Error::Config(e.to_string()))
}

/// SHA-256 (hex) of the document with keys sorted at every level, so that
/// reordering keys or tables does not change it.
pub fn config_digest(text: &str) -> Result<String> {
    let root = parse_toml(text)?;
    let canonical = serde_json::to_value(&root).map_err(|e| Error::Config(e.to_string()))?;
    let bytes = serde_json::to_vec(&canonical).map_err(|e| Error::Config(e.to_string()))?;
    Ok(super::sha256_hex(&bytes))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let root = parse_toml(text)?;
        let known = ["circuit", "qubit", "kerr", "fluorescence", "spectrum", "field"];
        if let Some(k) = root.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown section '{k}'")));
        }
        let mut cfg = RunConfig {
            digest: config_digest(text)?,
            ..Default::default()
        };
        if let Some(t) = table(&root, "circuit")? {
            let s = Section::new("circuit", t);
            let c = CircuitParams {
                shunt_capacitance: s.required("shunt_capacitance", Quantity::Capacitance)?,
                geometric_inductance: s.required("geometric_inductance", Quantity::Inductance)?,
                gral_kinetic_inductance: s.required("gral_kinetic_inductance", Quantity::Inductance)?,
                al_kinetic_inductance_zero_field: s.required("al_kinetic_inductance", Quantity::Inductance)?,
                al_critical_field: s.required("al_critical_field", Quantity::Field)?,
                gral_squares: s.scalar("gral_squares")?.unwrap_or(CircuitParams::reference().gral_squares),
            };
            s.finish()?;
            c.validate()?;
            cfg.circuit = Some(c);
        }
        if let Some(t) = table(&root, "qubit")? {
            let s = Section::new("qubit", t);
            let q = TwoLevelParams {
                qubit_frequency: s.required("qubit_frequency", Quantity::Frequency)?,
                external_rate: s.required("external_rate", Quantity::Rate)?,
                internal_rate: s.required("internal_rate", Quantity::Rate)?,
                pure_dephasing_rate: s.quantity("pure_dephasing_rate", Quantity::Rate)?.unwrap_or(0.0),
            };
            s.finish()?;
            q.validate()?;
            cfg.qubit = Some(q);
        }
        if let Some(t) = table(&root, "kerr")? {
            let s = Section::new("kerr", t);
            let m = KerrModel {
                mode_frequency: s.required("mode_frequency", Quantity::Frequency)?,
                self_kerr: s.required("self_kerr", Quantity::Rate)?,
                external_rate: s.required("external_rate", Quantity::Rate)?,
                internal_rate: s.required("internal_rate", Quantity::Rate)?,
                truncation: s.count("levels")?.unwrap_or(DEFAULT_TRUNCATION),
            };
            s.finish()?;
            m.validate()?;
            cfg.kerr = Some(m);
        }
        if let Some(t) = table(&root, "fluorescence")? {
            let s = Section::new("fluorescence", t);
            let f = FluorescenceSweep {
                powers: s.quantity_list("powers", Quantity::Power)?.unwrap_or_default(),
                span: s.required("span", Quantity::Frequency)?,
                points: s.count("points")?.unwrap_or(401),
                attenuation_db: s.quantity("attenuation", Quantity::Ratio)?.unwrap_or(0.0),
            };
            s.finish()?;
            cfg.fluorescence = Some(f);
        }
        if let Some(t) = table(&root, "spectrum")? {
            let s = Section::new("spectrum", t);
            let f = SpectrumSweep {
                powers: s.quantity_list("powers", Quantity::Power)?.unwrap_or_default(),
                max_order: s.count("max_order")?.unwrap_or(10),
                step: s.required("step", Quantity::Frequency)?,
                half_window: s.required("half_window", Quantity::Frequency)?,
            };
            s.finish()?;
            cfg.spectrum = Some(f);
        }
        if let Some(t) = table(&root, "field")? {
            let s = Section::new("field", t);
            let f = FieldSweep {
                fields: s.quantity_list("fields", Quantity::Field)?.unwrap_or_default(),
            };
            s.finish()?;
            cfg.field = Some(f);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Reads a coil assembly description.
///
/// ```toml
/// kind = "helmholtz"          # or "coil"
/// layers = 15
/// turns_per_layer = 80
/// inner_radius_mm = 10.0
/// wire_diameter_um = 140      # optional
/// length_mm = 11.2            # optional, defaults to turns × wire diameter
/// separation_mm = 15.2        # helmholtz only
/// axis = [0, 1, 0]
/// center_mm = [0, 0, 0]       # optional
/// ```
pub fn assembly_from_toml(text: &str) -> Result<Assembly> {
    let root = parse_toml(text)?;
    let s = Section::new("geometry", &root);
    let kind = s.string("kind")?.ok_or_else(|| Error::Config("missing key 'kind'".into()))?;
    let need = |k: &str| -> Result<usize> { s.count(k)?.ok_or_else(|| Error::Config(format!("missing key '{k}'"))) };
    let layer_count = need("layers")?;
    let turns_per_layer = need("turns_per_layer")?;
    let wire_diameter = s.quantity("wire_diameter", Quantity::Length)?.unwrap_or(DEFAULT_WIRE_DIAMETER);
    let coil = CoilGeometry {
        layer_count,
        turns_per_layer,
        inner_radius: s.required("inner_radius", Quantity::Length)?,
        length: s
            .quantity("length", Quantity::Length)?
            .unwrap_or(turns_per_layer as f64 * wire_diameter),
        wire_diameter,
        axis: s.vector("axis", None)?.ok_or_else(|| Error::Config("missing key 'axis'".into()))?,
        center: s.vector("center", Some(Quantity::Length))?.unwrap_or_else(Vec3::zeros),
    };
    let assembly = match kind {
        "coil" => Assembly::Coil(coil),
        "helmholtz" => Assembly::Helmholtz(HelmholtzPair {
            coil,
            separation: s.required("separation", Quantity::Length)?,
        }),
        other => return Err(Error::Config(format!("unknown assembly kind '{other}'"))),
    };
    s.finish()?;
    assembly.validate()?;
    Ok(assembly)
}

pub fn load_assembly(path: &Path) -> Result<Assembly> {
    assembly_from_toml(&std::fs::read_to_string(path)?)
}
