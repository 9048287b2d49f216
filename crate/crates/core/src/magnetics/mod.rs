//! Biot-Savart fields of filamentary coil assemblies.
//!
//! Every turn is a circular filament at the wire centre. A coil with n_L
//! layers and n_w turns per layer is n_L × n_w loops of radius
//! R + layer·d, stacked along the axis with pitch d.

mod elliptic;

pub use elliptic::{complete_elliptic_agm, complete_elliptic_series, SERIES_TERMS};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::MU_0;
use crate::error::{require_positive, Error, Result};

pub type Vec3 = Vector3<f64>;

/// Wire diameter of the coil windings (m).
pub const DEFAULT_WIRE_DIAMETER: f64 = 140e-6;

/// Elliptic-integral evaluation used by [`loop_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopKernel {
    /// Arithmetic-geometric mean.
    #[default]
    Exact,
    /// Truncated power series.
    Series,
}

/// Field of a single loop of radius `radius` in the xy-plane, centred at the
/// origin, with current flowing counter-clockwise about +z.
///
/// Points within half a wire diameter of the filament are rejected.
pub fn loop_field(radius: f64, current: f64, position: Vec3, kernel: LoopKernel) -> Result<Vec3> {
    loop_field_clearance(radius, current, position, kernel, 0.5 * DEFAULT_WIRE_DIAMETER)
}

fn loop_field_clearance(radius: f64, current: f64, position: Vec3, kernel: LoopKernel, clearance: f64) -> Result<Vec3> {
    require_positive(&[("radius", radius)])?;
    if !current.is_finite() || !position.iter().all(|v| v.is_finite()) {
        return Err(Error::domain("current and position must be finite"));
    }
    let rho = position.x.hypot(position.y);
    let z = position.z;
    if (rho - radius).hypot(z) <= clearance {
        return Err(Error::domain(format!(
            "point ({:.6e}, {:.6e}, {:.6e}) m lies on the wire",
            position.x, position.y, position.z
        )));
    }
    let (b_rho, b_z) = loop_field_cylindrical(radius, current, rho, z, kernel);
    let (c, s) = if rho > 0.0 {
        (position.x / rho, position.y / rho)
    } else {
        (1.0, 0.0)
    };
    Ok(Vec3::new(b_rho * c, b_rho * s, b_z))
}

/// (B_ρ, B_z) of a loop at cylindrical coordinates (ρ, z).
fn loop_field_cylindrical(a: f64, current: f64, rho: f64, z: f64, kernel: LoopKernel) -> (f64, f64) {
    let alpha2 = (a - rho).powi(2) + z * z;
    let beta2 = (a + rho).powi(2) + z * z;
    let beta = beta2.sqrt();
    let k = (1.0 - alpha2 / beta2).max(0.0).sqrt();
    let (kk, ee) = match kernel {
        LoopKernel::Exact => complete_elliptic_agm(k),
        LoopKernel::Series => complete_elliptic_series(k),
    };
    let c = MU_0 * current / (2.0 * std::f64::consts::PI);
    let b_z = c / beta * (kk + (a * a - rho * rho - z * z) / alpha2 * ee);
    let b_rho = if rho < 1e-8 * a {
        // First order in ρ; the closed form cancels catastrophically here.
        let r2 = a * a + z * z;
        0.75 * MU_0 * current * a * a * z * rho / r2.powf(2.5)
    } else {
        c * z / (rho * beta) * (-kk + (a * a + rho * rho + z * z) / alpha2 * ee)
    };
    (b_rho, b_z)
}

/// Multi-layer solenoid of round wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilGeometry {
    pub layer_count: usize,
    pub turns_per_layer: usize,
    /// Radius of the innermost layer (m).
    pub inner_radius: f64,
    /// Winding length along the axis (m).
    pub length: f64,
    pub wire_diameter: f64,
    /// Unit vector along the coil axis.
    pub axis: Vec3,
    /// Centre of the winding (m).
    pub center: Vec3,
}

impl CoilGeometry {
    /// Coil centred at the origin with its axis along `axis`, length set to
    /// n_w·d and the default wire.
    pub fn compact(layer_count: usize, turns_per_layer: usize, inner_radius: f64, axis: Vec3) -> Result<Self> {
        let c = Self {
            layer_count,
            turns_per_layer,
            inner_radius,
            length: turns_per_layer as f64 * DEFAULT_WIRE_DIAMETER,
            wire_diameter: DEFAULT_WIRE_DIAMETER,
            axis,
            center: Vec3::zeros(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_count == 0 || self.turns_per_layer == 0 {
            return Err(Error::domain("layer and turn counts must be >= 1"));
        }
        require_positive(&[
            ("inner_radius", self.inner_radius),
            ("length", self.length),
            ("wire_diameter", self.wire_diameter),
        ])?;
        if self.inner_radius <= self.wire_diameter {
            return Err(Error::domain("inner radius must exceed the wire diameter"));
        }
        if self.length + self.wire_diameter < self.turns_per_layer as f64 * self.wire_diameter {
            return Err(Error::domain(format!(
                "length {} m cannot hold {} turns of {} m wire",
                self.length, self.turns_per_layer, self.wire_diameter
            )));
        }
        let n = self.axis.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::domain("axis must be a unit vector"));
        }
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("center must be finite"));
        }
        Ok(())
    }

    pub fn total_turns(&self) -> usize {
        self.layer_count * self.turns_per_layer
    }

    fn outer_radius(&self) -> f64 {
        self.inner_radius + (self.layer_count as f64 - 1.0) * self.wire_diameter
    }

    /// Orthonormal frame (e₁, e₂, axis).
    fn frame(&self) -> (Vec3, Vec3, Vec3) {
        let a = self.axis.normalize();
        let trial = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (trial - a * a.dot(&trial)).normalize();
        let e2 = a.cross(&e1);
        (e1, e2, a)
    }

    fn inside_winding(&self, local: &Vec3) -> bool {
        let rho = local.x.hypot(local.y);
        let half_d = 0.5 * self.wire_diameter;
        let half_len = 0.5 * (self.turns_per_layer as f64 - 1.0) * self.wire_diameter + half_d;
        rho >= self.inner_radius - half_d && rho <= self.outer_radius() + half_d && local.z.abs() <= half_len
    }
}

/// Field of a coil, superposed over its loops.
pub fn coil_field(coil: &CoilGeometry, current: f64, position: Vec3) -> Result<Vec3> {
    coil_field_with(coil, current, position, LoopKernel::Exact)
}

pub fn coil_field_with(coil: &CoilGeometry, current: f64, position: Vec3, kernel: LoopKernel) -> Result<Vec3> {
    coil.validate()?;
    let (e1, e2, a) = coil.frame();
    let rel = position - coil.center;
    let local = Vec3::new(rel.dot(&e1), rel.dot(&e2), rel.dot(&a));
    if coil.inside_winding(&local) {
        return Err(Error::domain(format!(
            "point ({:.6e}, {:.6e}, {:.6e}) m lies inside the winding volume",
            position.x, position.y, position.z
        )));
    }
    let d = coil.wire_diameter;
    let mid = 0.5 * (coil.turns_per_layer as f64 - 1.0);
    let mut b = Vec3::zeros();
    for layer in 0..coil.layer_count {
        let radius = coil.inner_radius + layer as f64 * d;
        for turn in 0..coil.turns_per_layer {
            let offset = (turn as f64 - mid) * d;
            let p = Vec3::new(local.x, local.y, local.z - offset);
            b += loop_field_clearance(radius, current, p, kernel, 0.5 * d)?;
        }
    }
    Ok(e1 * b.x + e2 * b.y + a * b.z)
}

/// Two identical coils sharing an axis, centred at `coil.center ± axis·separation/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzPair {
    pub coil: CoilGeometry,
    /// Distance between the coil centres (m).
    pub separation: f64,
}

impl HelmholtzPair {
    pub fn new(coil: CoilGeometry, separation: f64) -> Result<Self> {
        let p = Self { coil, separation };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.coil.validate()?;
        require_positive(&[("separation", self.separation)])?;
        if self.separation < self.coil.length {
            return Err(Error::domain("coils overlap: separation is shorter than the coil length"));
        }
        Ok(())
    }

    /// The two coils, displaced along the common axis.
    pub fn coils(&self) -> [CoilGeometry; 2] {
        let shift = self.coil.axis * (0.5 * self.separation);
        let mut lo = self.coil;
        let mut hi = self.coil;
        lo.center -= shift;
        hi.center += shift;
        [lo, hi]
    }
}

pub fn helmholtz_field(pair: &HelmholtzPair, current: f64, position: Vec3) -> Result<Vec3> {
    helmholtz_field_with(pair, current, position, LoopKernel::Exact)
}

pub fn helmholtz_field_with(pair: &HelmholtzPair, current: f64, position: Vec3, kernel: LoopKernel) -> Result<Vec3> {
    pair.validate()?;
    let [lo, hi] = pair.coils();
    Ok(coil_field_with(&lo, current, position, kernel)? + coil_field_with(&hi, current, position, kernel)?)
}

/// Anything with a field and a natural centre point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assembly {
    Coil(CoilGeometry),
    Helmholtz(HelmholtzPair),
}

impl Assembly {
    pub fn field(&self, current: f64, position: Vec3) -> Result<Vec3> {
        match self {
            Assembly::Coil(c) => coil_field(c, current, position),
            Assembly::Helmholtz(p) => helmholtz_field(p, current, position),
        }
    }

    pub fn center(&self) -> Vec3 {
        match self {
            Assembly::Coil(c) => c.center,
            Assembly::Helmholtz(p) => p.coil.center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Assembly::Coil(c) => c.validate(),
            Assembly::Helmholtz(p) => p.validate(),
        }
    }
}

/// |B| at the assembly centre per ampere (T/A).
pub fn conversion_factor(assembly: &Assembly) -> Result<f64> {
    Ok(assembly.field(1.0, assembly.center())?.norm())
}

/// Sampled field at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub position: Vec3,
    pub field: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub points: Vec<FieldPoint>,
    /// max |B(x) − B₀| / |B₀| with B₀ the field at the assembly centre.
    pub max_relative_deviation: f64,
}

/// Samples the field at `samples` evenly spaced points from `start` to `end`
/// and compares each against the field at the assembly centre.
pub fn homogeneity_report(
    assembly: &Assembly,
    current: f64,
    start: Vec3,
    end: Vec3,
    samples: usize,
) -> Result<HomogeneityReport> {
    assembly.validate()?;
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let b0 = assembly.field(current, assembly.center())?;
    let mut points = Vec::with_capacity(samples);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let position = start + (end - start) * t;
        let field = assembly.field(current, position)?;
        if b0.norm() > 0.0 {
            worst = worst.max((field - b0).norm() / b0.norm());
        }
        points.push(FieldPoint { position, field });
    }
    Ok(HomogeneityReport {
        points,
        max_relative_deviation: worst,
    })
}
