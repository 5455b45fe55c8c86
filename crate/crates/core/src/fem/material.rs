use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic material with SIMP interpolation between void and solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus of the solid phase.
    pub e0: f64,
    /// Young's modulus of the void phase.
    pub emin: f64,
    pub nu: f64,
    /// SIMP penalization exponent.
    pub penalty: f64,
    pub thickness: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self {
            e0: 1.0,
            emin: 1e-9,
            nu: 0.3,
            penalty: 3.0,
            thickness: 1.0,
        }
    }
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        if !(self.emin > 0.0 && self.emin < self.e0) {
            return Err(Error::DomainError(format!(
                "need 0 < Emin < E0, got Emin = {}, E0 = {}",
                self.emin, self.e0
            )));
        }
        if !(0.0..0.5).contains(&self.nu) {
            return Err(Error::DomainError(format!("Poisson ratio {} outside [0, 0.5)", self.nu)));
        }
        if !(self.penalty >= 1.0) {
            return Err(Error::DomainError(format!("penalty {} < 1", self.penalty)));
        }
        if !(self.thickness > 0.0) {
            return Err(Error::DomainError(format!("thickness {} <= 0", self.thickness)));
        }
        Ok(())
    }

    /// Two-phase material for layered benchmarks: density 1 is stiff, density
    /// 0 is `e0 / contrast`.
    pub fn two_phase(e0: f64, contrast: f64) -> Result<Self> {
        if !(contrast > 1.0) {
            return Err(Error::DomainError(format!("contrast {contrast} must exceed 1")));
        }
        Ok(Self {
            e0,
            emin: e0 / contrast,
            ..Self::default()
        })
    }
}

/// `E(rho) = Emin + rho^p (E0 - Emin)`.
pub fn simp_modulus(rho: f64, mat: &Material) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::DomainError(format!("density {rho} outside [0, 1]")));
    }
    Ok(mat.emin + rho.powf(mat.penalty) * (mat.e0 - mat.emin))
}

/// Derivative `dE/drho = p rho^(p-1) (E0 - Emin)`.
pub fn simp_modulus_derivative(rho: f64, mat: &Material) -> f64 {
    mat.penalty * rho.powf(mat.penalty - 1.0) * (mat.e0 - mat.emin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let m = Material::default();
        assert_eq!(simp_modulus(1.0, &m).unwrap(), m.e0);
        assert_eq!(simp_modulus(0.0, &m).unwrap(), m.emin);
    }

    #[test]
    fn half_density_cubic() {
        let m = Material::default();
        let e = simp_modulus(0.5, &m).unwrap();
        assert!((e - (1e-9 + 0.125 * (1.0 - 1e-9))).abs() < 1e-16);
        assert!((e - 0.125000000875).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_density() {
        let m = Material::default();
        assert!(matches!(simp_modulus(1.5, &m), Err(Error::DomainError(_))));
        assert!(matches!(simp_modulus(-0.1, &m), Err(Error::DomainError(_))));
        assert!(simp_modulus(f64::NAN, &m).is_err());
    }

    #[test]
    fn monotone_in_density() {
        let m = Material::default();
        let mut prev = 0.0;
        for k in 0..=100 {
            let e = simp_modulus(k as f64 / 100.0, &m).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn validation() {
        assert!(Material::default().validate().is_ok());
        let bad = Material { emin: 2.0, ..Material::default() };
        assert!(bad.validate().is_err());
        let bad = Material { nu: 0.5, ..Material::default() };
        assert!(bad.validate().is_err());
        assert!(Material::two_phase(1.0, 1.0).is_err());
        assert_eq!(Material::two_phase(1.0, 1e4).unwrap().emin, 1e-4);
    }
}
