pub mod adversaries;
pub mod apps;
pub mod chasing;
pub mod ddmdp;
pub mod dracc;
pub mod error;
pub mod experts;
pub mod harness;
pub mod meta;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Exact = num_rational::Rational64;

pub type DraccInstanceF64 = dracc::DraccInstance<f64>;
pub type DraccInstanceF32 = dracc::DraccInstance<f32>;
pub type DraccInstanceExact = dracc::DraccInstance<Exact>;
pub type ExplicitDdMdpF64 = ddmdp::ExplicitDdMdp<f64>;
pub type ExplicitDdMdpExact = ddmdp::ExplicitDdMdp<Exact>;
pub type OjsInstanceF64 = apps::OjsInstance<f64>;
pub type MdbgInstanceF64 = apps::MdbgInstance<f64>;
