pub mod data;
pub mod error;
pub mod estimate;
pub mod linalg;
pub mod marginal;
pub mod prior;
pub mod sampler;
pub mod sim;
pub mod space;
pub mod term;

pub use data::Dataset;
pub use error::{Error, Result};
pub use estimate::{PosteriorSummary, PosteriorTable};
pub use marginal::{GPrior, MarginalEvaluator, ModelScorer};
pub use prior::{ModelPrior, PriorFamily, PriorSpec, Scheme};
pub use sampler::{KernelWeights, SamplerConfig};
pub use space::{Heredity, Model, ModelSpace};
pub use term::Term;

// The guide's snippets run as doctests so the book cannot drift from the code.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model-space.md")]
    mod model_space {}
    #[doc = include_str!("../../../book/src/priors.md")]
    mod priors {}
    #[doc = include_str!("../../../book/src/marginals.md")]
    mod marginals {}
    #[doc = include_str!("../../../book/src/sampler.md")]
    mod sampler {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
