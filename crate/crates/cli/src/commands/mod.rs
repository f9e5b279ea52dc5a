pub mod g2;
pub mod gate;
pub mod map;
pub mod scatter;
pub mod spectra;
