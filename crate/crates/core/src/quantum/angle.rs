use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// An angle in radians.
///
/// The raw value is kept as given; [`Angle::normalized`] returns the unique
/// representative in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Self {
        Angle(radians)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Equivalent angle in `(-pi, pi]`.
    pub fn normalized(self) -> f64 {
        let r = self.0.rem_euclid(2.0 * PI);
        if r > PI {
            r - 2.0 * PI
        } else {
            r
        }
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Self {
        Angle(radians)
    }
}
