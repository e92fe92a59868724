//! Sub-Riemannian geodesic flow on `T*H3`, closed geodesics of the quotient,
//! and the confinement of thin cones around the characteristic set.

pub mod closed;
pub mod confinement;
pub mod flow;

pub use closed::{find_closed, find_closed_orbits, ClosedOrbit};
pub use confinement::{confinement_check, ConfinementReport};
pub use flow::{
    exact_flow, g_star, hamiltonian_field, integrate, lattice_distance, GeodesicResult, PhasePoint,
};
