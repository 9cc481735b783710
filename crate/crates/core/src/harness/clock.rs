use serde::{Deserialize, Serialize};

use crate::behavior::SimParams;

/// Position in the simulated working week, measured in annotations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimClock {
    pub day: u32,
    pub period: u32,
    pub annotations_in_period: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockEvents {
    pub period_end: bool,
    pub day_end: bool,
}

impl ClockEvents {
    pub fn none(&self) -> bool {
        !self.period_end && !self.day_end
    }
}

/// Counts one annotation and rolls the period/day over when it fills.
pub fn advance_clock(clock: SimClock, params: &SimParams) -> (SimClock, ClockEvents) {
    let mut next = clock;
    let mut events = ClockEvents::default();
    next.annotations_in_period += 1;
    if next.annotations_in_period >= params.period_length {
        events.period_end = true;
        next.annotations_in_period = 0;
        next.period += 1;
        if next.period >= params.periods_per_day {
            events.day_end = true;
            next.period = 0;
            next.day += 1;
        }
    }
    (next, events)
}
