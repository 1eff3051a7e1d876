//! Sample schema, dataset container, CSV ingestion, fold planning, and
//! feature maps.

mod csv;
mod features;
mod folds;
mod sample;

pub use csv::{load_csv, write_csv, CsvSchema};
pub use features::{apply_feature_map, z_to_x_transform, FeatureMap, OutcomeFeature, XFeatures};
pub use folds::{make_folds, FoldPlan};
pub use sample::{Dataset, MissingnessRegime, ObservedSample};
