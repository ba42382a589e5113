pub mod classifier;
pub mod embeddings;
pub mod eval;
pub mod explain;
pub mod history;
pub mod ingest;
pub mod ontology;
pub mod pipeline;
pub mod pmc;
pub mod service;
pub mod taxonomy;
pub mod text;
