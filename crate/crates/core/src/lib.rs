//! Direction-of-arrival estimation from a single snapshot of one-bit
//! quantized sparse-array data.
//!
//! The crate provides the array/measurement model ([`array`]), the SBRI
//! probit-likelihood estimator ([`sbri`]), its logistic-likelihood variant
//! SBRI-X ([`sbrix`]), spectrum readout and scoring ([`spectrum`]), a
//! training-corpus generator with a flat binary format ([`dataset`]) and a
//! Monte Carlo benchmark harness ([`bench`]).
//!
//! ```
//! use onebit_doa::array::{build_dictionary, one_bit_quantize, simulate_snapshot, ArrayGeometry, Scene};
//! use onebit_doa::sbri::{sbri_solve, GridMode, SbriConfig};
//! use num_complex::Complex64;
//!
//! let geom = ArrayGeometry::sla18();
//! let dict = build_dictionary(&geom, (-60.0, 60.0), 1.0).unwrap();
//! let scene = Scene::new(vec![-30.0, 30.0], vec![Complex64::new(1.0, 0.0); 2]).unwrap();
//! let snap = simulate_snapshot(&geom, &scene, 20.0, 7).unwrap();
//! let res = sbri_solve(&one_bit_quantize(&snap.y), &dict, &SbriConfig::default(), GridMode::OnGrid).unwrap();
//! assert_eq!(res.x_hat.len(), 121);
//! ```

pub mod array;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod gauss;
pub mod linalg;
pub mod sbri;
pub mod sbrix;
pub mod seeds;
pub mod spectrum;

pub use error::{DoaError, Result};
