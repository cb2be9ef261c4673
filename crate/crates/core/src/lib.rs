pub mod error;
pub mod geometry;
pub mod lp;
pub mod poly;
pub mod rational;
pub mod univariate;
pub mod zeros;
pub mod sublevel;
pub mod regions;
pub mod sharpness;
pub mod problem;
pub mod analysis;
pub mod report;
pub mod svg;
