use proptest::prelude::*;

use coinft::calibration::LabeledFrame;
use coinft::dataio::{format_log, parse_log, Trial, TrialMeta};
use coinft::sensor::CapacitanceFrame;
use coinft::types::Wrench;

fn sample() -> impl Strategy<Value = (f64, [u32; 12], [f64; 6], f64)> {
    (
        1e-6..1.0f64,
        prop::array::uniform12(any::<u32>()),
        prop::array::uniform6(-1e3..1e3f64),
        -40.0..120.0f64,
    )
}

fn trial() -> impl Strategy<Value = Trial> {
    (
        "[a-z_]{1,12}",
        any::<u64>(),
        "[0-9a-f]{16}",
        prop::collection::vec(sample(), 0..30),
    )
        .prop_map(|(scenario, seed, sensor_hash, rows)| {
            let mut t = 0.0;
            let samples = rows
                .into_iter()
                .map(|(dt, counts, w, temp)| {
                    t += dt;
                    LabeledFrame {
                        frame: CapacitanceFrame::from_channels(counts, t, temp),
                        wrench: Wrench::from_array(w),
                    }
                })
                .collect();
            Trial {
                meta: TrialMeta {
                    scenario,
                    seed,
                    sensor_hash,
                },
                samples,
            }
        })
}

proptest! {
    #[test]
    fn log_round_trip_is_exact(t in trial()) {
        let text = format_log(&t);
        let back = parse_log(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(format_log(&back), text);
    }
}
