//! Deviation asymptotics for sums of i.i.d. heavy-tailed integer random
//! variables with log-convex weights.

pub mod logspace;
pub mod quad;
pub mod roots;
pub mod weights;
pub mod exactprob;
pub mod series;
pub mod cramer;
pub mod variational;
pub mod contour;
pub mod asymptotics;
