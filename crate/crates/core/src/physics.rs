//! Shared physical constants and the free-field Green's function.
//!
//! Time dependence is `e^{+iωt}`: outgoing spherical waves are `e^{-ikr}/r`
//! and the matching spherical Hankel function is `h_n^(2)`. Both the analytic
//! sphere solution and the BEM kernels use [`green`] from here.

use std::f64::consts::PI;

use num_complex::Complex64;

pub const AIR_DENSITY: f64 = 1.2;
pub const SPEED_OF_SOUND: f64 = 343.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// kg/m^3
    pub density: f64,
    /// m/s
    pub sound_speed: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Self { density: AIR_DENSITY, sound_speed: SPEED_OF_SOUND }
    }
}

impl Medium {
    pub fn wavenumber(&self, freq_hz: f64) -> f64 {
        2.0 * PI * freq_hz / self.sound_speed
    }

    pub fn frequency(&self, wavenumber: f64) -> f64 {
        wavenumber * self.sound_speed / (2.0 * PI)
    }

    /// Factor `iρω` converting velocity potential to pressure.
    pub fn potential_to_pressure(&self, wavenumber: f64) -> Complex64 {
        let omega = wavenumber * self.sound_speed;
        Complex64::new(0.0, self.density * omega)
    }
}

/// `e^{-ikr} / (4πr)`.
#[inline]
pub fn green(k: f64, r: f64) -> Complex64 {
    let (s, c) = (k * r).sin_cos();
    Complex64::new(c, -s) / (4.0 * PI * r)
}
