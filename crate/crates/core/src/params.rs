//! Every tunable constant of an experiment in one serializable bundle.

use serde::{Deserialize, Serialize};

use crate::explore_graph::{SamplingParams, SparsifyParams};
use crate::llm_bridge::LlmConfig;
use crate::mapping::LidarModel;
use crate::perception::{CameraRig, FusionParams, NoiseModel};
use crate::reasoning::ReasoningParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentParams {
    pub lidar: LidarModel,
    pub camera_fov: f64,
    pub camera_range: f64,
    pub noise: NoiseModel,
    /// Use the confusion pairs declared by the environment file.
    pub env_confusion: bool,
    pub fusion: FusionParams,
    pub sampling: SamplingParams,
    pub sparsify: SparsifyParams,
    /// Points farther than this from every earlier offered point are new.
    pub novelty_threshold: f64,
    pub reasoning: ReasoningParams,
    pub memory_capacity: usize,
    /// Meters per step.
    pub speed: f64,
    pub seconds_per_step: f64,
    pub max_steps: u64,
    /// Steps after which the robot re-decides even if it has not arrived.
    pub replan_interval: u64,
    pub trials: usize,
    /// Object points need this many fused observations before they are
    /// offered as candidates.
    pub min_object_observations: u32,
    pub max_labels: usize,
    pub llm: LlmConfig,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            lidar: LidarModel::default(),
            camera_fov: std::f64::consts::FRAC_PI_2,
            camera_range: 6.0,
            noise: NoiseModel::default(),
            env_confusion: true,
            fusion: FusionParams::default(),
            sampling: SamplingParams::default(),
            sparsify: SparsifyParams::default(),
            novelty_threshold: 3.0,
            reasoning: ReasoningParams::default(),
            memory_capacity: 10,
            speed: 0.5,
            seconds_per_step: 0.5,
            max_steps: 5400,
            replan_interval: 40,
            trials: 15,
            min_object_observations: 2,
            max_labels: 5,
            llm: LlmConfig::default(),
        }
    }
}

impl ExperimentParams {
    pub fn camera_rig(&self) -> CameraRig {
        CameraRig::new(self.camera_fov, self.camera_range)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        if self.replan_interval == 0 {
            return Err("replan_interval must be positive".into());
        }
        if !(self.speed > 0.0) {
            return Err("speed must be positive".into());
        }
        if self.memory_capacity == 0 {
            return Err("memory_capacity must be positive".into());
        }
        if !(1..=5).contains(&self.max_labels) {
            return Err("max_labels must be between 1 and 5".into());
        }
        if self.lidar.ray_count < 8 || !(self.lidar.max_range > 0.0) {
            return Err("lidar needs at least 8 rays and a positive range".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let p = ExperimentParams::default();
        p.validate().unwrap();
        let back: ExperimentParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.trials, 15);
        assert_eq!(p.memory_capacity, 10);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let p: ExperimentParams = serde_json::from_str(r#"{"max_steps": 100}"#).unwrap();
        assert_eq!(p.max_steps, 100);
        assert_eq!(p.replan_interval, 40);
    }
}
