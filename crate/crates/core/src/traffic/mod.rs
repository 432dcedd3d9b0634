//! Traffic assignment and road network design.

pub mod assignment;
pub mod design;
pub mod tntp;

pub use assignment::{
    beckmann, bpr_integral, bpr_time, frank_wolfe, relative_gap, total_travel_time, Assignment, Direction,
    FrankWolfeOptions,
};
pub use design::{format_projects, parse_projects, utndp_objective, DesignInstance, Project};
pub use tntp::{parse_net, parse_trips, read_tntp, Demand, Link, TrafficNetwork};
