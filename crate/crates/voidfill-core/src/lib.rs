//! Guided void filling for digital surface model rasters.
//!
//! The core pipeline reconstructs missing elevation regions by solving
//! the Dirichlet-constrained steady state of an edge-enhancing
//! anisotropic diffusion equation whose tensor field is derived from a
//! co-registered optical guide image. Around it: raster containers and
//! bit-exact I/O, Perlin and stroke void-mask synthesis, classical
//! baselines (IDW, thin-plate spline, harmonic), accuracy metrics, and
//! a synthetic scene generator for benchmarking.
//!
//! All types are immutable after construction and all operations are
//! pure functions; results are deterministic given their seeds.

pub mod baselines;
pub mod error;
pub mod grid;
pub mod guide;
pub mod init;
pub mod io;
pub mod masks;
pub mod metrics;
pub mod scene;
pub mod solver;
pub mod util;

pub use error::{Error, Result};
pub use grid::{
    apply_mask, denormalize, extract_void_mask, grid_median_known, normalize, Grid, GuideImage,
    NormMode, NormParams, VoidMask,
};
pub use guide::{
    diffusion_tensor, gaussian_smooth, gradient, luminance, structure_tensor, EdgeParams,
    TensorField,
};
pub use init::{median_init, pyramid_init, InitMode, PyramidConfig};
pub use masks::{
    irregular_mask, mask_coverage, perlin_mask, perlin_noise, rect_mask,
    sample_mask_with_coverage, Pcg32, PerlinParams, StrokeParams,
};
pub use metrics::{evaluate, medae, nmad, residuals, rmse, MetricsReport};
pub use scene::{make_scene, SceneSpec};
pub use solver::{
    assemble_stencil, build_tensor, fill, solve_steady_state, FillResult, Method, SolveConfig,
    StencilField,
};
