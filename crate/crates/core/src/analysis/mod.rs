pub mod bursts;
pub mod delay_map;
pub mod lyapunov;
pub mod regime;
