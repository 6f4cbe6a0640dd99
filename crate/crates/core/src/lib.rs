pub mod experiments;
pub mod group;
pub mod lab;
pub mod markov;
pub mod projection;
pub mod rng;
pub mod stats;
pub mod tree;
