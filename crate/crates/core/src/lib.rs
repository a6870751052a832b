pub mod agents;
pub mod algebra;
pub mod bench;
pub mod cga;
pub mod codegen;
pub mod script;
pub mod symbolic;

/// Guide chapters, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    mod algebra {}
    #[doc = include_str!("../../../book/src/conformal.md")]
    mod conformal {}
    #[doc = include_str!("../../../book/src/script.md")]
    mod script {}
    #[doc = include_str!("../../../book/src/compiler.md")]
    mod compiler {}
    #[doc = include_str!("../../../book/src/agents.md")]
    mod agents {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
}
