//! Payloads stored under `report` in each artifact.

use serde::{Deserialize, Serialize};
use slowhom::family::{FamilyConstants, FamilyReport};
use slowhom::halfspace::ScheduleCertificate;
use slowhom::lattice::{DirectionCertificate, VerificationReport};

pub const KIND_DIRECTION: &str = "direction";
pub const KIND_HALFSPACE: &str = "halfspace-certificate";
pub const KIND_FAMILY: &str = "family-certificate";
pub const KIND_DEMO: &str = "dirichlet-demo";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionOutput {
    /// Complete certificate, or the stages built before the search stopped.
    pub certificate: DirectionCertificate,
    pub verification: VerificationReport,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceOutput {
    pub direction: DirectionOutput,
    pub schedule: Option<ScheduleCertificate>,
    /// `(ln t, ln S(t))`
    pub decay_curve: Vec<(f64, f64)>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyOutput {
    pub constants: FamilyConstants,
    pub direction: DirectionOutput,
    pub family: Option<FamilyReport>,
    pub failure: Option<String>,
}
