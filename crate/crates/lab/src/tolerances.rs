//! The tolerance manifest, compiled into the binary.

use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = include_str!("../tolerances.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub collapsing: CollapsingTol,
    pub distance: DistanceTol,
    pub rotation: RotationTol,
    pub pfc: PfcTol,
    pub oss: OssTol,
    pub binding: BindingTol,
    pub snark: SnarkTol,
    pub compressed: CompressedTol,
    pub small_range: SmallRangeTol,
    pub pipelines: PipelinesTol,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapsingTol {
    pub max_n: usize,
    pub entry_abs: f64,
    pub time_limit_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTol {
    pub exact_max_n: usize,
    pub exact_abs: f64,
    pub mc_max_n: usize,
    pub mc_samples: usize,
    pub sigmas: f64,
    pub hand_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationTol {
    pub cosets: usize,
    pub max_n: usize,
    pub fidelity_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfcTol {
    pub states: usize,
    pub tv_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OssTol {
    pub honest_runs: usize,
    pub clone_trials: usize,
    pub clone_n: usize,
    pub clone_r: usize,
    pub sigmas: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingTol {
    pub trials: usize,
    pub control_trials: usize,
    pub decx_control_trials: usize,
    pub sigmas: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnarkTol {
    pub completeness: usize,
    pub max_depth: usize,
    pub find_witness_runs: usize,
    pub garbage_trials: usize,
    pub adversary_trials: usize,
    pub sigmas: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressedTol {
    pub involution_abs: f64,
    pub transcript_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallRangeTol {
    pub ranges: Vec<usize>,
    pub q: usize,
    pub trials: usize,
    pub image_queries: usize,
    pub sigmas: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelinesTol {
    pub sobf_programs: usize,
    pub time_limit_s: f64,
}

impl Tolerances {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn builtin() -> Self {
        Self::parse(MANIFEST).expect("bundled manifest parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parses_with_expected_counts() {
        let t = Tolerances::builtin();
        assert_eq!(t.collapsing.max_n, 4);
        assert_eq!(t.distance.mc_samples, 10_000);
        assert_eq!(t.rotation.cosets, 100);
        assert_eq!(t.oss.clone_trials, 10_000);
        assert_eq!(t.small_range.ranges, vec![8, 64, 512]);
    }

    #[test]
    fn unknown_sections_rejected() {
        let text = format!("{MANIFEST}\n[extra]\nx = 1\n");
        assert!(Tolerances::parse(&text).is_err());
    }
}
