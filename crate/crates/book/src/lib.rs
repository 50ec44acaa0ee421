//! The chapters of the guide in `book/src`, included verbatim so that
//! `cargo test` compiles and runs every code block in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/resolvents.md")]
pub mod resolvents {}

#[doc = include_str!("../../../book/src/eigenvectors.md")]
pub mod eigenvectors {}

#[doc = include_str!("../../../book/src/bases.md")]
pub mod bases {}

#[doc = include_str!("../../../book/src/scattering.md")]
pub mod scattering {}

#[doc = include_str!("../../../book/src/resonances.md")]
pub mod resonances {}

#[doc = include_str!("../../../book/src/density.md")]
pub mod density {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
