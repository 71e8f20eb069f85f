//! Temporal localization of the extracted steps in per-item feature
//! streams by discriminative clustering under ordering and caption timing
//! constraints.

mod features;
mod fw;
mod kernel;
mod localize;
mod oracle;
mod supervised;
mod windows;

pub use features::{
    check_dimensions, list_feature_dir, read_feature_binary, read_feature_csv, read_feature_dir,
    write_feature_binary, write_feature_csv, FeatureStream,
};
pub use fw::{fw_localize, round_solution, LocalizeHistory, LocalizeOptions, LocalizeSolution};
pub use kernel::{
    build_residual_kernel, clustering_cost, clustering_gradient, ridge_gradient, ridge_objective,
    stack_features, ResidualKernel,
};
pub use localize::{
    read_localization, narration_baseline, uniform_baseline, write_localization, ItemLocalization, PlacedStep,
    StepLocalization,
};
pub use oracle::{
    first_infeasible_step, is_valid_placement, ordered_oracle, placement_cost, placement_matrix,
    StepWindow,
};
pub use supervised::{annotation_windows, predict_ordered, train_supervised, SupervisedModel};
pub use windows::{
    build_constraint_windows, step_constraints, ConstraintWindows, StepConstraints,
    DEFAULT_AFTER_S, DEFAULT_BEFORE_S,
};
