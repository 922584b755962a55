//! Truncated power series, Weil–Petersson geometry and period-domain algebra
//! for polarized variations of Hodge structure in normal-form coordinates.
//!
//! ```
//! use hodge_wp::hyperkahler::build_hk_model;
//! use hodge_wp::scalar::{Cq, Scalar};
//! use hodge_wp::wpgeom::{base_curvature_closed_form, SignConvention, WPPotential};
//!
//! let model = build_hk_model::<Cq>(1, 2).unwrap().to_vhs_model(6).unwrap();
//! let p = WPPotential::from_model(&model).unwrap();
//! let r = base_curvature_closed_form(&p, SignConvention::Expansion);
//! assert_eq!(r.get(&[0, 0, 0, 0]), &Cq::from_i64(1));
//! ```
//!
//! The guide in `book/` walks through each module.

pub mod linalg;
pub mod scalar;
pub mod series;
pub mod hodge;
pub mod family;
pub mod wpgeom;
pub mod period;
pub mod hyperkahler;
pub mod model_io;
pub mod random;

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/hodge.md")]
    mod hodge {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/periods.md")]
    mod periods {}
    #[doc = include_str!("../../../book/src/hyperkahler.md")]
    mod hyperkahler {}
    #[doc = include_str!("../../../book/src/model-files.md")]
    mod model_files {}
}
