//! Request handling independent of the HTTP layer.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use optlab_core::catalog::{load_catalog, tpch_like, Catalog, CatalogError, TPCH_LIKE};
use optlab_core::cost::{CostParams, CostParamsOverride};
use optlab_core::pipeline::{optimize, PipelineError};
use optlab_core::trace::OptimizationTrace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::{HistoryEntry, HistoryError, HistoryStore};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub sql: String,
    #[serde(default)]
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Option<CostParamsOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    BadRequest,
    NotFound,
    Internal,
}

/// Structured failure: a machine-readable code, a message and, for SQL
/// errors, the 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ServiceError {
    #[serde(skip)]
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ServiceError {
    pub fn new(kind: ErrorKind, code: &str, message: impl Into<String>) -> Self {
        Self {
            kind,
            code: code.to_string(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

impl From<PipelineError> for ServiceError {
    fn from(e: PipelineError) -> Self {
        let kind = if e.is_client_error() {
            ErrorKind::BadRequest
        } else {
            ErrorKind::Internal
        };
        let mut err = ServiceError::new(kind, e.code(), e.to_string());
        if let Some((line, column)) = e.position() {
            err.line = Some(line);
            err.column = Some(column);
        }
        err
    }
}

impl From<HistoryError> for ServiceError {
    fn from(e: HistoryError) -> Self {
        ServiceError::new(ErrorKind::Internal, "history_error", e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("catalog directory {path}: {source}")]
    CatalogDir {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog `{0}` is defined more than once")]
    DuplicateCatalog(String),
    #[error(transparent)]
    History(#[from] HistoryError),
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogSummary<'a> {
    pub name: &'a str,
    pub relations: &'a [optlab_core::catalog::RelationStats],
}

/// Catalogs, base parameters and the history store shared by all requests.
#[derive(Debug)]
pub struct Service {
    catalogs: BTreeMap<String, Catalog>,
    base_params: CostParams,
    history: Mutex<HistoryStore>,
}

impl Service {
    /// The bundled catalog plus every `*.json` file in `catalog_dir`.
    pub fn new(
        base_params: CostParams,
        history: HistoryStore,
        catalog_dir: Option<&Path>,
    ) -> Result<Self, StartupError> {
        let mut catalogs = BTreeMap::new();
        catalogs.insert(TPCH_LIKE.to_string(), tpch_like());
        if let Some(dir) = catalog_dir {
            let dir_error = |source| StartupError::CatalogDir {
                path: dir.display().to_string(),
                source,
            };
            let mut files = Vec::new();
            for entry in std::fs::read_dir(dir).map_err(dir_error)? {
                let path = entry.map_err(dir_error)?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    files.push(path);
                }
            }
            files.sort();
            for path in files {
                let catalog = load_catalog(&path)?;
                let name = catalog.name().to_string();
                if catalogs.insert(name.clone(), catalog).is_some() {
                    return Err(StartupError::DuplicateCatalog(name));
                }
            }
        }
        Ok(Self {
            catalogs,
            base_params,
            history: Mutex::new(history),
        })
    }

    pub fn base_params(&self) -> &CostParams {
        &self.base_params
    }

    pub fn catalogs(&self) -> Vec<CatalogSummary<'_>> {
        self.catalogs
            .values()
            .map(|c| CatalogSummary {
                name: c.name(),
                relations: c.relations(),
            })
            .collect()
    }

    /// Plans the request, records it and returns the trace.
    pub fn handle_query(&self, request: &QueryRequest) -> Result<OptimizationTrace, ServiceError> {
        let name = request
            .catalog
            .as_deref()
            .unwrap_or(TPCH_LIKE)
            .to_ascii_lowercase();
        let catalog = self.catalogs.get(&name).ok_or_else(|| {
            ServiceError::new(
                ErrorKind::BadRequest,
                "unknown_catalog",
                format!("unknown catalog `{name}`"),
            )
        })?;
        let params = match &request.params {
            Some(overrides) => overrides.apply(&self.base_params).map_err(|e| {
                ServiceError::new(ErrorKind::BadRequest, "invalid_params", e.to_string())
            })?,
            None => self.base_params.clone(),
        };
        let query_id = uuid::Uuid::new_v4().to_string();
        let trace = optimize(&request.sql, catalog, &params, &query_id)?;
        self.lock().append(catalog.name(), trace.clone())?;
        Ok(trace)
    }

    pub fn history_list(&self) -> Vec<HistoryEntry> {
        self.lock().list()
    }

    pub fn history_get(&self, query_id: &str) -> Result<OptimizationTrace, ServiceError> {
        self.lock().get(query_id).cloned().ok_or_else(|| {
            ServiceError::new(
                ErrorKind::NotFound,
                "not_found",
                format!("no query with id `{query_id}`"),
            )
        })
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HistoryStore> {
        // A panic while holding the lock cannot leave the store half
        // written: entries are pushed only after the file append succeeds.
        self.history.lock().unwrap_or_else(|e| e.into_inner())
    }
}
