pub mod balancer;
pub mod config;
pub mod engine;
pub mod geometry;
pub mod metrics;
pub mod radio;
pub mod sim;
pub mod sweep;
pub mod traffic;
