//! Synthetic ground truth: time-domain strip simulation, camera pick-off and
//! textured video rendering.

mod banded;
pub mod excitation;
pub mod newmark;
pub mod render;
pub mod sampling;

pub use excitation::{Excitation, ExcitationMode};
pub use newmark::{simulate, SimConfig, SimHistory};
pub use render::{render_video, Texture};
pub use sampling::{sample_surface, sample_surface_with, SurfaceSampling};
