use serde::{Deserialize, Serialize};

/// Secondary score used to order tests inside a front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Performance,
    Crowding,
}

/// Stagnation counters of the adaptive selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicState {
    pub performance_counter: u32,
    pub crowding_counter: u32,
    pub previous: Heuristic,
}

impl Default for HeuristicState {
    fn default() -> Self {
        HeuristicState { performance_counter: 0, crowding_counter: 0, previous: Heuristic::Performance }
    }
}

impl HeuristicState {
    fn counter(&mut self, h: Heuristic) -> &mut u32 {
        match h {
            Heuristic::Performance => &mut self.performance_counter,
            Heuristic::Crowding => &mut self.crowding_counter,
        }
    }

    /// One decision given whether the last generation stagnated.
    pub fn decide(&mut self, generation: usize, stagnated: bool) -> Heuristic {
        if generation == 0 {
            *self = HeuristicState::default();
            return Heuristic::Performance;
        }
        let chosen = if stagnated {
            *self.counter(self.previous) += 1;
            if self.performance_counter <= self.crowding_counter {
                Heuristic::Performance
            } else {
                Heuristic::Crowding
            }
        } else {
            *self.counter(self.previous) = 0;
            self.previous
        };
        self.previous = chosen;
        chosen
    }
}

/// Picks the heuristic from the best objective value per uncovered target
/// in the current and previous offspring. Any strict improvement is progress.
pub fn get_secondary_heuristic(
    state: &mut HeuristicState,
    generation: usize,
    current_best: &[f64],
    previous_best: &[f64],
) -> Heuristic {
    let improved = current_best.iter().zip(previous_best).any(|(c, p)| c < p);
    state.decide(generation, !improved)
}
