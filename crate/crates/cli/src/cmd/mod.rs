pub mod detect;
pub mod evaluate;
pub mod extract;
pub mod make_data;
pub mod synth;
