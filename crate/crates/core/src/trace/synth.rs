use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{FailureCategory, FailureEvent, TraceError, TraceSet};

const NODE_STREAM_BASE: u64 = 1 << 40;

/// Synthetic trace over `[0, span_s)` with exponential inter-failure gaps
/// (mean `mtbf_s`, measured from the end of the previous repair) and
/// exponential repair times (mean `mttr_s`). Categories are uniform. Every
/// node gets its own random stream and appears in the roster even without
/// failures; repairs are cut at `span_s`.
pub fn synthesize(
    nodes: u32,
    span_s: i64,
    mtbf_s: f64,
    mttr_s: f64,
    seed: u64,
) -> Result<TraceSet, TraceError> {
    if span_s <= 0 || !(mtbf_s > 0.0) || !(mttr_s > 0.0) {
        return Err(TraceError::InvalidParameter(format!(
            "span_s={span_s}, mtbf_s={mtbf_s}, mttr_s={mttr_s} must all be positive"
        )));
    }
    let gap = Exp::new(1.0 / mtbf_s).expect("positive rate");
    let repair = Exp::new(1.0 / mttr_s).expect("positive rate");
    let span = span_s as f64;
    let mut events = Vec::new();
    for node in 0..nodes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(NODE_STREAM_BASE + u64::from(node));
        let mut t = 0.0;
        loop {
            let start = t + gap.sample(&mut rng);
            if start >= span {
                break;
            }
            let end = (start + repair.sample(&mut rng)).min(span);
            let category = FailureCategory::ALL[rng.random_range(0..FailureCategory::ALL.len())];
            let start_s = start.floor() as i64;
            let end_s = (end.ceil() as i64).clamp(start_s + 1, span_s.max(start_s + 1));
            events.push(FailureEvent {
                node_id: node,
                start_s,
                end_s,
                category,
            });
            t = end_s as f64;
        }
    }
    Ok(TraceSet::with_roster(
        events,
        (0..nodes).collect::<BTreeSet<_>>(),
    ))
}
