pub mod basis;
pub mod bench;
pub mod categoric;
pub mod error;
pub mod gbdt;
pub mod infill;
pub mod normal;
pub mod numeric;
pub mod pipeline;
pub mod schema;
pub mod table;
