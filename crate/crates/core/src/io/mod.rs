//! File formats and dataset plumbing: embedding files, label files, sparse
//! feature files, encoder checkpoints, prediction TSVs, manifests, and
//! synthetic fixture generation.

mod checkpoint;
mod embedding_file;
mod feature_file;
pub mod fixture;
mod label_file;
mod manifest;
mod tsv;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use embedding_file::{read_embeddings, write_embeddings};
pub use feature_file::{read_features, write_features};
pub use label_file::{read_label_file, write_label_file};
pub use manifest::{sha256_file, FileStamp, Manifest};
pub use tsv::{format_sig6, read_predictions_tsv, write_predictions_tsv};

use std::fs::File;
use std::path::Path;

use crate::error::Result;

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn atomic_write<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut File) -> Result<()>,
{
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp_path = dir.join(format!(".{file_name}.tmp"));
    let mut file = File::create(&tmp_path)?;
    match write(&mut file) {
        Ok(()) => {
            file.sync_all()?;
            drop(file);
            std::fs::rename(&tmp_path, path)?;
            Ok(())
        }
        Err(e) => {
            drop(file);
            let _ = std::fs::remove_file(&tmp_path);
            Err(e)
        }
    }
}
