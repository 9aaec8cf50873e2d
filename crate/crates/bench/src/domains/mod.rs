pub mod instradi;
pub mod matches;
pub mod oversub;
pub mod pack;
pub mod painter;
pub mod pour;
pub mod shake;
