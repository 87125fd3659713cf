//! Quantum invariants of knots and the asymptotics behind the volume conjecture.

pub mod knotcore;
pub mod laurent;
pub mod num;

pub use laurent::LaurentHalf;
pub mod cjones;
pub mod acurve;
pub mod table;
pub mod asymfit;
pub mod qrec;
pub mod quantize;
