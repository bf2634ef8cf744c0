//! Data ingestion and synthesis: trajectory files, synthetic scenarios, pose
//! banks, pose filtering and sliding-window training instances.

mod instances;
mod posebank;
mod posefilter;
mod synthetic;
mod tsv;

pub use instances::{make_training_instances, InstanceStats, TrainingInstance};
pub use posebank::{generate_pose_bank, load_pose_bank, save_pose_bank, walking_pose, BankPose};
pub use posefilter::{
    apply_pose_filters, pose_consistency_filter, pose_rule_filter, PoseFilterReport, PoseSequence,
    PoseSplit, DEFAULT_CONSISTENCY_WINDOW,
};
pub use synthetic::{generate_synthetic, trajectory_bank, Scenario, ScenarioConfig, ScenarioMix};
pub use tsv::{load_tsv, parse_tsv, write_tsv, Track, TrajectoryDataset};
