use proptest::prelude::*;
use scalechain::trace_csv::{parse_trace, write_trace, write_trace_with_carried};
use scalechain_core::{ProfilingTrace, TraceRow};
use tempfile::TempDir;

fn rows() -> impl Strategy<Value = Vec<TraceRow>> {
    prop::collection::vec((1e-9..1e6f64, 0.0..1e6f64, 1e-9..1e3f64), 2..60).prop_map(|v| {
        v.into_iter()
            .enumerate()
            // Distinct rates so the trace is always fittable.
            .map(|(k, (r, m, t))| TraceRow::new(r + k as f64, m, t))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_parse_is_identity(rows in rows(), carried in any::<bool>()) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("t.csv");
        let trace = ProfilingTrace::new(rows).unwrap();
        let flags: Vec<bool> = (0..trace.len()).map(|k| carried && k % 2 == 0).collect();
        if carried {
            write_trace_with_carried(&trace, &flags, &path).unwrap();
        } else {
            write_trace(&trace, &path).unwrap();
        }
        let loaded = parse_trace(&path).unwrap();
        prop_assert_eq!(&loaded.trace, &trace);
        if carried {
            prop_assert_eq!(loaded.carried, Some(flags));
        }
    }
}
