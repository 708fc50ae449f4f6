//! Generic colored-timed Petri net: marking, guards, firing and a
//! discrete-event driver.

mod net;
mod token;

pub use net::{
    Advance, CTPNet, DelaySource, Firing, Halt, InputArc, Join, NetError, OutputArc, OutputToken, PendingDelay,
    Place, PlaceId, PlaceRole, Relation, Timing, Transition, TransitionId, TransitionKind, TransitionSpec,
    DEFAULT_LIVELOCK_BOUND,
};
pub use token::{Color, ColorKey, Token};
