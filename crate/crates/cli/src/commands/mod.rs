pub mod generate;
pub mod ingest;
pub mod simulate;
pub mod train;
pub mod validate;
