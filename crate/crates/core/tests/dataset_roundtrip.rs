//! Simulator output survives a CSV round trip bit-exactly, and the
//! influence function is mean-zero at the truth with oracle nuisances.

mod common;

use common::single_shot;
use didmar_core::data::{load_csv, write_csv, CsvSchema, MissingnessRegime};
use didmar_core::simulation::{generate, DgpConfig, TrueNuisances, Y1Centering};

#[test]
fn simulator_csv_round_trip_is_identity() {
    for regime in MissingnessRegime::ALL {
        let cfg = DgpConfig::new(2000, regime, 901);
        let (data, _) = generate(&cfg, 0).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        write_csv(&data, file.path()).unwrap();
        let back = load_csv(file.path(), &CsvSchema::default(), regime).unwrap();
        assert_eq!(back.len(), data.len());
        assert_eq!(back.column_names(), data.column_names());
        // Shortest round-trip float formatting makes this bit-exact.
        assert_eq!(back.samples(), data.samples());
    }
}

#[test]
fn influence_mean_zero_at_truth_with_oracle_nuisances() {
    for regime in [
        MissingnessRegime::PreSimple,
        MissingnessRegime::PostSimple,
        MissingnessRegime::BothSimple,
    ] {
        let cfg = DgpConfig::new(50_000, regime, 902);
        let (data, _) = generate(&cfg, 0).unwrap();
        let truth = TrueNuisances::new(regime, 5.0, Y1Centering::Centered).with_clip(0.01);
        let (theta, se) = single_shot(&data, &truth, regime);
        // theta-hat - theta_star is the mean influence value at the truth.
        assert!(
            (theta - 5.0).abs() <= 4.0 * se,
            "{regime}: mean influence {:.4} exceeds 4 standard errors {:.4}",
            theta - 5.0,
            4.0 * se
        );
    }
}
