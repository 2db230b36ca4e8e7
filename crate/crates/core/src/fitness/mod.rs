//! Objectives, front construction and secondary scores.

mod objective;
mod sorting;

pub use objective::TargetModel;
pub use sorting::{dominates, fast_nondominated_sort, preference_sorting, subvector_dominance};

use crate::interp::DynamicProxies;
use crate::testcase::StaticProxies;

/// The seven performance proxies, in table order:
/// loop cycles, covered method calls, test method calls, instantiations,
/// covered statements, test non-call statements, test length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ProxyVector(pub [u64; 7]);

impl ProxyVector {
    pub fn new(dynamic: DynamicProxies, fixed: StaticProxies) -> Self {
        ProxyVector([
            dynamic.loop_cycles,
            dynamic.method_calls,
            fixed.method_calls,
            dynamic.instantiations,
            dynamic.statements,
            fixed.other_statements,
            fixed.length,
        ])
    }

    /// Sum of the proxies normalised by `x / (x + 1)`; lower is cheaper.
    pub fn performance_score(&self) -> f64 {
        performance_score(self)
    }
}

pub fn performance_score(p: &ProxyVector) -> f64 {
    p.0.iter().map(|&x| x as f64 / (x as f64 + 1.0)).sum()
}

/// Min-max normalised proxy scores within one front; higher is cheaper.
///
/// A proxy that is constant over the front contributes nothing.
pub fn performance_heuristic(front: &[ProxyVector]) -> Vec<f64> {
    let mut out = vec![0.0; front.len()];
    if front.is_empty() {
        return out;
    }
    for k in 0..7 {
        let max = front.iter().map(|p| p.0[k]).max().unwrap();
        let min = front.iter().map(|p| p.0[k]).min().unwrap();
        if max == min {
            continue;
        }
        let span = (max - min) as f64;
        for (o, p) in out.iter_mut().zip(front) {
            *o += (max - p.0[k]) as f64 / span;
        }
    }
    out
}
