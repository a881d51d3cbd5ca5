//! Deliberately wrong samplers built from a family's profile and scale factor.
//! Their residuals must stay well away from zero.

use super::FieldSampler;
use crate::error::Result;
use crate::families::SolutionFamily;

/// How to corrupt the density of a family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Corruption {
    /// `ρ · a^{-shift}`, i.e. the wrong power of `a` in the denominator.
    ScaleExponent(i32),
    /// `e^{y}/a^N` in place of `y/a^N` (θ≠1 families; identity for the others).
    ExponentialProfile,
}

/// A family sampler with one corruption applied.
#[derive(Clone, Copy, Debug)]
pub struct Corrupted<'a> {
    pub family: &'a SolutionFamily,
    pub corruption: Corruption,
}

impl<'a> Corrupted<'a> {
    pub fn new(family: &'a SolutionFamily, corruption: Corruption) -> Self {
        Self { family, corruption }
    }
}

impl FieldSampler for Corrupted<'_> {
    fn sample(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let s = self.family.eval_fields(t, r)?;
        let (a, _) = self.family.scale_at(t)?;
        let rho = match self.corruption {
            Corruption::ScaleExponent(shift) => s.rho / a.powi(shift),
            Corruption::ExponentialProfile if !self.family.params().is_exponential() => {
                match self.family.profile_y(r / a)? {
                    Some(y) => y.exp() / a.powi(self.family.dim() as i32),
                    None => 0.0,
                }
            }
            Corruption::ExponentialProfile => s.rho,
        };
        Ok((rho, s.u))
    }
}
