//! Reflection spectroscopy of one or two multilevel atoms coupled to a
//! single-mode nanophotonic cavity: the weak-drive reflection model, thermal
//! motion averaging, a master-equation cross-check, two-atom exchange
//! analysis, spectrum fitting and single-shot detection statistics.
//!
//! Rates and detunings are ordinary frequencies in MHz (the 2π is factored
//! out everywhere); lengths are in nm unless a name says otherwise.

pub mod detection;
pub mod error;
pub mod features;
pub mod fit;
pub mod mode;
pub mod oracle;
pub mod qed;
pub mod spectrum;
pub mod two_atom;

pub use detection::{CountHistograms, CountModel, DetectionReport, Hypothesis};
pub use error::{Error, Result};
pub use features::{extract_line_features, LineFeature, Polarity};
pub use fit::{bootstrap_uncertainty, fit_spectrum, FitData, FitParam, FitProblem, FitResult, ParamKind};
pub use mode::{averaged_spectrum, AtomScenario, CooperativityStats, ModeGeometry, MonteCarlo, MotionParams};
pub use oracle::{linear_response_solve, oracle_reflectivity, SystemSpec};
pub use qed::{reflectivity_amplitude, spectrum, Atom, CavityParams, Coupling, EmitterSet, Transition};
pub use spectrum::Spectrum;
pub use two_atom::{anticrossing_map, dressed_frequencies, DressedPair, ReflectivityMap};
