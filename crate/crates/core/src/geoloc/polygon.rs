use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point in WGS84 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Coord<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> Coord<T> {
    pub fn new(lat: T, lon: T) -> Self {
        Self { lat, lon }
    }
}

/// Closed ring: first vertex repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Ring<T> {
    points: Vec<Coord<T>>,
}

impl<T: Scalar> Ring<T> {
    /// Closes the ring if needed. Needs at least three distinct vertices.
    pub fn new(mut points: Vec<Coord<T>>) -> Option<Self> {
        if points.first() != points.last() {
            let first = *points.first()?;
            points.push(first);
        }
        (points.len() >= 4).then_some(Self { points })
    }

    pub fn points(&self) -> &[Coord<T>] {
        &self.points
    }

    fn on_boundary(&self, p: Coord<T>) -> bool {
        self.points.windows(2).any(|w| on_segment(w[0], w[1], p))
    }

    /// Even-odd crossing test with a ray towards increasing longitude.
    fn crossings_odd(&self, p: Coord<T>) -> bool {
        let mut inside = false;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let x = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
                if p.lon < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn on_segment<T: Scalar>(a: Coord<T>, b: Coord<T>, p: Coord<T>) -> bool {
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    let scale = ((b.lon - a.lon).abs() + (b.lat - a.lat).abs()).max(T::one());
    if cross.abs() > T::epsilon() * T::lit(16.0) * scale {
        return false;
    }
    p.lon >= a.lon.min(b.lon) && p.lon <= a.lon.max(b.lon) && p.lat >= a.lat.min(b.lat) && p.lat <= a.lat.max(b.lat)
}

/// Exterior ring with optional holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Polygon<T> {
    pub exterior: Ring<T>,
    pub holes: Vec<Ring<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(exterior: Ring<T>, holes: Vec<Ring<T>>) -> Self {
        Self { exterior, holes }
    }

    /// Boundary points (including hole edges) count as inside.
    pub fn contains(&self, p: Coord<T>) -> bool {
        if self.exterior.on_boundary(p) || self.holes.iter().any(|h| h.on_boundary(p)) {
            return true;
        }
        self.exterior.crossings_odd(p) && !self.holes.iter().any(|h| h.crossings_odd(p))
    }
}
