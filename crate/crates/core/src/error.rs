use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Counts of rejected Monte Carlo samples, by the first constraint they failed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct ViolationCounts {
    pub unstable_at_design_distance: u64,
    pub l1_radius_exceeded: u64,
    pub l2_radius_exceeded: u64,
    pub unstable_in_range: u64,
    pub non_positive: u64,
}

impl std::fmt::Display for ViolationCounts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "non-positive={}, unstable@d_set={}, w00(z_L1)>bound={}, w00(z_L2)>bound={}, unstable in range={}",
            self.non_positive,
            self.unstable_at_design_distance,
            self.l1_radius_exceeded,
            self.l2_radius_exceeded,
            self.unstable_in_range
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty matrix sequence")]
    EmptySequence,

    #[error("resonator unstable at d = {distance} m (g1*g2* = {product})")]
    Unstable { distance: f64, product: f64 },

    #[error("axial position z = {z} m outside [0, {z_max}] m")]
    OutOfRange { z: f64, z_max: f64 },

    #[error("lossless cavity: R1*R2 = {0} >= 1")]
    LosslessCavity(f64),

    #[error("power circulation did not converge, last residual {residual} W")]
    NoConvergence { residual: f64 },

    #[error("no feasible sample after {samples} draws ({counts})")]
    Infeasible { samples: u64, counts: ViolationCounts },

    #[error("functional ascent did not converge (best eta_trans = {best_objective}, a_g = {best_a_g} m, R_M2 = {best_reflectivity})")]
    AscentNoConvergence {
        best_objective: f64,
        best_a_g: f64,
        best_reflectivity: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
