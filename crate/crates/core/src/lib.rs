//! Envelopes of cross-like unions of product sets.
//!
//! * [`cross`]: defining matrices, reduction, classification, enumeration.
//! * [`envelope`]: exact piecewise-linear descriptions and their construction.
//! * [`radial`]: concentric ball models and their extremal functions.
//! * [`oracle`]: grid solver for torus-invariant extremal functions.

pub mod cross;
pub mod envelope;
pub mod oracle;
pub mod radial;
