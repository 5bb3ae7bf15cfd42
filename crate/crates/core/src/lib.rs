//! Numerical laboratory for the Abelian integrals of the asymmetric Duffing
//! oscillator's exterior period annulus: direct quadrature over real cycles,
//! Picard-Fuchs continuation to complex energies, boundary values and
//! monodromy on the branch cut, argument-principle zero counts of Melnikov
//! combinations, and bifurcation diagrams of the zero count over the real
//! projective parameter spaces.

pub mod error;
pub mod quad;
pub mod level_curve;
pub mod series;
pub mod picard_fuchs;
pub mod monodromy;
pub mod zero_counter;
pub mod atlas;
pub mod config;
pub mod verify;

pub use atlas::{classify_point, crossing_jump, read_dataset, region_summary, render_svg, scan, write_dataset, write_summary, CellRecord, Locus, ScanResult, Space};
pub use error::{Error, Result};
pub use level_curve::{
    integrate_cycle, integrate_cycle_derivative, oval_roots, Cycle, CycleSpec, Exponent, Quartic,
    Side,
};
pub use picard_fuchs::{
    continue_along_path, fit_asymptotic_constants, i4prime, pf_matrix, plan_path, AsymptoticModel,
    ContinuationPath, Evaluator, OdeTol, PeriodVector,
};
pub use monodromy::{boundary_value, verify_cycle_relations, wronskian, BoundaryValue, Pairing, WronskianSample};
pub use config::{parse_complex, RunConfig};
pub use series::LocalSeries;
pub use zero_counter::{alpha_beta, count_zeros, eval_f, eval_m, petrov_bound, ContourCache, CountStatus, KeyholeContour, MelnikovParams, ZeroCount};
