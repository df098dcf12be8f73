//! The user guide, one module per chapter.
//!
//! Each module's documentation is a chapter of the rendered book in
//! `book/` (build it with `mdbook build book`). Including the sources
//! here means every code block in the book is compiled and executed by
//! `cargo test`, so the guide cannot drift from the API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/forward.md")]
pub mod forward_simulation {}

#[doc = include_str!("../../../book/src/response.md")]
pub mod response_data {}

#[doc = include_str!("../../../book/src/inversion.md")]
pub mod recovering_coefficients {}

#[doc = include_str!("../../../book/src/characterization.md")]
pub mod which_vectors_are_response_data {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod interval_problems_and_spectral_measures {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod command_line_tool {}
