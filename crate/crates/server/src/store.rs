//! One JSON document per project under a data directory.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dashmap::DashMap;
use relplan_core::model::ProjectState;
use tokio::sync::{Mutex, OwnedMutexGuard};

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
    writers: Arc<DashMap<String, Arc<Mutex<()>>>>,
}

/// Exclusive right to modify one project; released on drop.
pub struct WriteGuard {
    _guard: OwnedMutexGuard<()>,
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn io_error(e: io::Error) -> ApiError {
    ApiError::internal(format!("storage error: {e}"))
}

impl Store {
    pub async fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        tokio::fs::create_dir_all(&dir).await?;
        Ok(Self {
            dir,
            writers: Arc::new(DashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Takes the project's writer lock, failing with `conflict` if another
    /// write is in progress.
    pub fn lock(&self, id: &str) -> Result<WriteGuard, ApiError> {
        let mutex = self.writers.entry(id.to_string()).or_default().clone();
        mutex
            .try_lock_owned()
            .map(|g| WriteGuard { _guard: g })
            .map_err(|_| ApiError::conflict(format!("project {id} is being modified by another request")))
    }

    pub async fn exists(&self, id: &str) -> bool {
        valid_id(id) && tokio::fs::try_exists(self.path(id)).await.unwrap_or(false)
    }

    pub async fn get(&self, id: &str) -> Result<ProjectState, ApiError> {
        if !valid_id(id) {
            return Err(ApiError::not_found(format!("no project {id}")));
        }
        let text = match tokio::fs::read_to_string(self.path(id)).await {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(ApiError::not_found(format!("no project {id}")))
            }
            Err(e) => return Err(io_error(e)),
        };
        ProjectState::from_json(&text)
            .map_err(|e| ApiError::internal(format!("stored project {id} is unreadable: {e}")))
    }

    /// Writes atomically: a temporary file is renamed over the document.
    pub async fn put(&self, id: &str, _guard: &WriteGuard, state: &ProjectState) -> Result<(), ApiError> {
        let tmp = self.dir.join(format!(".{id}.json.tmp"));
        tokio::fs::write(&tmp, state.to_json_pretty()).await.map_err(io_error)?;
        tokio::fs::rename(&tmp, self.path(id)).await.map_err(io_error)
    }

    /// Ids of every stored project, sorted.
    pub async fn list(&self) -> Result<Vec<String>, ApiError> {
        let mut out = Vec::new();
        let mut entries = tokio::fs::read_dir(&self.dir).await.map_err(io_error)?;
        while let Some(entry) = entries.next_entry().await.map_err(io_error)? {
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(".json") {
                if valid_id(id) {
                    out.push(id.to_string());
                }
            }
        }
        out.sort();
        Ok(out)
    }
}
