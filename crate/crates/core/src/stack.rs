//! Planar layer stacks and their generalized reflection coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{MaterialModel, MirrorKind, Response};

/// Thickness of a layer; the two outer layers are semi-infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thickness {
    Finite(f64),
    SemiInfinite,
}

impl Thickness {
    pub fn value(self) -> Option<f64> {
        match self {
            Thickness::Finite(d) => Some(d),
            Thickness::SemiInfinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub thickness: Thickness,
    pub material: MaterialModel,
}

impl Layer {
    pub fn finite(thickness: f64, material: MaterialModel) -> Self {
        Self {
            thickness: Thickness::Finite(thickness),
            material,
        }
    }

    pub fn semi_infinite(material: MaterialModel) -> Self {
        Self {
            thickness: Thickness::SemiInfinite,
            material,
        }
    }
}

/// Layers 0..=n from left to right, with the atom in layer `atom_layer`.
///
/// The atom position is measured from the left interface of its layer,
/// except in layer 0 where it is the distance to the single interface on
/// the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StackFields")]
pub struct LayerStack {
    layers: Vec<Layer>,
    atom_layer: usize,
    atom_position: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StackFields {
    layers: Vec<Layer>,
    atom_layer: usize,
    atom_position: f64,
}

impl TryFrom<StackFields> for LayerStack {
    type Error = Error;

    fn try_from(f: StackFields) -> Result<Self> {
        Self::new(f.layers, f.atom_layer, f.atom_position)
    }
}

/// Which wall of the atom layer a term refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, atom_layer: usize, atom_position: f64) -> Result<Self> {
        let stack = Self {
            layers,
            atom_layer,
            atom_position,
        };
        stack.validate()?;
        Ok(stack)
    }

    /// Atom in vacuum at distance `z` in front of a half-space.
    pub fn half_space(material: MaterialModel, z: f64) -> Result<Self> {
        Self::new(
            vec![
                Layer::semi_infinite(material),
                Layer::semi_infinite(MaterialModel::vacuum()),
            ],
            1,
            z,
        )
    }

    /// Atom at distance `z` in front of a free-standing plate of thickness `d`.
    pub fn plate(material: MaterialModel, d: f64, z: f64) -> Result<Self> {
        Self::new(
            vec![
                Layer::semi_infinite(MaterialModel::vacuum()),
                Layer::finite(d, material),
                Layer::semi_infinite(MaterialModel::vacuum()),
            ],
            2,
            z,
        )
    }

    /// Atom at distance `z` from the left of two half-spaces separated by `s`.
    pub fn cavity(left: MaterialModel, right: MaterialModel, s: f64, z: f64) -> Result<Self> {
        Self::new(
            vec![
                Layer::semi_infinite(left),
                Layer::finite(s, MaterialModel::vacuum()),
                Layer::semi_infinite(right),
            ],
            1,
            z,
        )
    }

    fn validate(&self) -> Result<()> {
        let n = self.layers.len();
        if n < 2 {
            return Err(Error::InvalidStack("at least two layers are required".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let outer = i == 0 || i == n - 1;
            match (layer.thickness, outer) {
                (Thickness::SemiInfinite, true) => {}
                (Thickness::SemiInfinite, false) => {
                    return Err(Error::InvalidStack(format!(
                        "interior layer {i} cannot be semi-infinite"
                    )))
                }
                (Thickness::Finite(_), true) => {
                    return Err(Error::InvalidStack(format!(
                        "outer layer {i} must be semi-infinite"
                    )))
                }
                (Thickness::Finite(d), false) => {
                    if !(d.is_finite() && d > 0.0) {
                        return Err(Error::InvalidStack(format!(
                            "layer {i} has invalid thickness {d}"
                        )));
                    }
                }
            }
        }
        let j = self.atom_layer;
        if j >= n {
            return Err(Error::InvalidStack(format!(
                "atom layer {j} out of range for {n} layers"
            )));
        }
        if !self.layers[j].material.is_vacuum() {
            return Err(Error::InvalidStack(format!("atom layer {j} must be vacuum")));
        }
        let z = self.atom_position;
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::InvalidPosition(format!(
                "atom position must be positive, got {z}"
            )));
        }
        if let Thickness::Finite(d) = self.layers[j].thickness {
            if z >= d {
                return Err(Error::InvalidPosition(format!(
                    "atom position {z} not inside layer of thickness {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn atom_layer(&self) -> usize {
        self.atom_layer
    }

    pub fn atom_position(&self) -> f64 {
        self.atom_position
    }

    pub fn with_atom_position(&self, z: f64) -> Result<Self> {
        Self::new(self.layers.clone(), self.atom_layer, z)
    }

    /// Distance from the atom to the given wall of its layer, `None` when
    /// that side is open (no interface).
    pub fn wall_distance(&self, side: Side) -> Option<f64> {
        let j = self.atom_layer;
        let last = self.layers.len() - 1;
        match (side, j) {
            (Side::Left, 0) => None,
            (Side::Right, 0) => Some(self.atom_position),
            (Side::Left, _) => Some(self.atom_position),
            (Side::Right, _) if j == last => None,
            (Side::Right, _) => self.layers[j]
                .thickness
                .value()
                .map(|d| d - self.atom_position),
        }
    }

    /// Every layer with electric and magnetic responses exchanged.
    pub fn duality_swap(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    thickness: l.thickness,
                    material: l.material.dual(),
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Responses of every layer at imaginary frequency `u`.
    pub fn slice(&self, u: f64) -> StackSlice<'_> {
        let cells = self
            .layers
            .iter()
            .map(|l| Cell {
                response: l.material.response_at(u),
                mirror: l.material.mirror_kind(),
                thickness: l.thickness.value().unwrap_or(f64::INFINITY),
            })
            .collect();
        StackSlice {
            stack: self,
            u,
            cells,
        }
    }

    /// Reflection coefficients at the point (u, q).
    pub fn reflection_coefficients(&self, u: f64, q: f64) -> Result<ReflectionSet> {
        check_point(u, q)?;
        Ok(self.slice(u).reflections(u.hypot(q), q * q))
    }
}

fn check_point(u: f64, q: f64) -> Result<()> {
    if !(u >= 0.0 && q >= 0.0 && u.is_finite() && q.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "(u, q) must be finite and non-negative, got ({u}, {q})"
        )));
    }
    if u == 0.0 && q == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    Ok(())
}

/// b = √(u² ε(iu) μ(iu) + q²).
pub fn axial_wavenumber(material: &MaterialModel, u: f64, q: f64) -> Result<f64> {
    check_point(u, q)?;
    let r = material.response_at(u);
    Ok((u * u * r.index_sq() + q * q).sqrt())
}

/// Polarization of a partial wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pol {
    S,
    P,
}

/// X_f² b_n² − X_n² b_f² for the interface between a near and a far medium,
/// with X = μ (s) or ε (p) and b_l² = q² + u² ε_l μ_l. Written in terms of
/// the susceptibilities so that weak contrasts keep full relative
/// precision.
#[inline]
pub(crate) fn contrast(near: &Response, far: &Response, q2: f64, u2: f64, pol: Pol) -> f64 {
    let (xf, xn, cxf, cxn, cyf, cyn) = match pol {
        Pol::S => (far.mu, near.mu, far.chi_m, near.chi_m, far.chi_e, near.chi_e),
        Pol::P => (far.eps, near.eps, far.chi_e, near.chi_e, far.chi_m, near.chi_m),
    };
    // X_f Y_n − X_n Y_f
    let cross = (cxf - cxn) + (cyn - cyf) + cxf * cyn - cxn * cyf;
    q2 * (cxf - cxn) * (xf + xn) + u2 * xf * xn * cross
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    response: Response,
    mirror: Option<MirrorKind>,
    thickness: f64,
}

/// A stack with all layer responses evaluated at one imaginary frequency.
#[derive(Debug, Clone)]
pub struct StackSlice<'a> {
    stack: &'a LayerStack,
    u: f64,
    cells: Vec<Cell>,
}

/// Generalized reflection coefficients seen from the atom layer and the
/// cavity denominators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionSet {
    pub r_s_minus: f64,
    pub r_s_plus: f64,
    pub r_p_minus: f64,
    pub r_p_plus: f64,
    pub d_s: f64,
    pub d_p: f64,
}

impl ReflectionSet {
    pub const ZERO: ReflectionSet = ReflectionSet {
        r_s_minus: 0.0,
        r_s_plus: 0.0,
        r_p_minus: 0.0,
        r_p_plus: 0.0,
        d_s: 1.0,
        d_p: 1.0,
    };

    pub fn side(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (self.r_s_minus, self.r_p_minus),
            Side::Right => (self.r_s_plus, self.r_p_plus),
        }
    }
}

impl StackSlice<'_> {
    pub fn u(&self) -> f64 {
        self.u
    }

    fn wavenumber(&self, cell: &Cell, q2: f64) -> f64 {
        (q2 + self.u * self.u * cell.response.index_sq()).sqrt()
    }

    /// One recursion step across the interface between `near` (the layer
    /// whose coefficient is being built) and `far`, given the coefficient
    /// `r_far` of `far` on its far side.
    fn step(&self, near: &Cell, far: &Cell, q2: f64, r_far: (f64, f64)) -> (f64, f64) {
        if let Some(kind) = far.mirror {
            return kind.reflection();
        }
        let u2 = self.u * self.u;
        let b_near = self.wavenumber(near, q2);
        let b_far = self.wavenumber(far, q2);
        let e = if far.thickness.is_finite() {
            (-2.0 * b_far * far.thickness).exp()
        } else {
            0.0
        };
        let one = |pol: Pol, x_near: f64, x_far: f64, r: f64| {
            let plus = x_far * b_near + x_near * b_far;
            let minus = contrast(&near.response, &far.response, q2, u2, pol) / plus;
            let er = e * r;
            (minus + plus * er) / (plus + minus * er)
        };
        (
            one(Pol::S, near.response.mu, far.response.mu, r_far.0),
            one(Pol::P, near.response.eps, far.response.eps, r_far.1),
        )
    }

    /// Coefficients at vacuum axial wavenumber `b` in the atom layer, with
    /// q² = b² − u² passed separately to keep its precision.
    pub fn reflections(&self, b: f64, q2: f64) -> ReflectionSet {
        let j = self.stack.atom_layer;
        let n = self.cells.len() - 1;

        let mut left = (0.0, 0.0);
        for l in 1..=j {
            left = self.step(&self.cells[l], &self.cells[l - 1], q2, left);
        }
        let mut right = (0.0, 0.0);
        for l in (j..n).rev() {
            right = self.step(&self.cells[l], &self.cells[l + 1], q2, right);
        }

        let (d_s, d_p) = if j == 0 || j == n {
            (1.0, 1.0)
        } else {
            let e = (-2.0 * b * self.cells[j].thickness).exp();
            (1.0 - left.0 * right.0 * e, 1.0 - left.1 * right.1 * e)
        };
        ReflectionSet {
            r_s_minus: left.0,
            r_s_plus: right.0,
            r_p_minus: left.1,
            r_p_plus: right.1,
            d_s,
            d_p,
        }
    }
}
