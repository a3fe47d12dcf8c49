use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::http::StatusCode;
use serde::{Deserialize, Serialize};
use survey_core::corpus::{leave_one_out, load_dataset_dir};
use survey_core::survey::{ParsedLog, SessionLog};
use survey_core::{ClassifierConfig, Corpus, DatasetFormat, StopRule, SurveyConfig, SurveySession};
use tokio::sync::{Mutex, RwLock};

use crate::error::ApiError;
use crate::views::CreateRequest;

/// What it takes to rebuild a session; stored as the first line of its log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: String,
    pub data_dir: PathBuf,
    pub format: String,
    pub project: String,
    pub config: SurveyConfig,
    pub created_at: u64,
}

pub struct Entry {
    pub meta: SessionMeta,
    pub session: SurveySession,
}

pub type SharedEntry = Arc<Mutex<Entry>>;

pub struct AppState {
    data_dir: PathBuf,
    format: DatasetFormat,
    state_dir: Option<PathBuf>,
    datasets: StdMutex<HashMap<PathBuf, Arc<Vec<Corpus>>>>,
    sessions: RwLock<HashMap<String, SharedEntry>>,
    next_id: AtomicU64,
}

impl AppState {
    /// Sessions are persisted under `state_dir` when given.
    pub fn new(data_dir: PathBuf, format: DatasetFormat, state_dir: Option<PathBuf>) -> Self {
        AppState {
            data_dir,
            format,
            state_dir,
            datasets: StdMutex::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    fn dataset(&self, dir: &Path, format: DatasetFormat) -> Result<Arc<Vec<Corpus>>, ApiError> {
        if let Some(d) = self
            .datasets
            .lock()
            .expect("dataset cache poisoned")
            .get(dir)
        {
            return Ok(d.clone());
        }
        let loaded = Arc::new(load_dataset_dir(dir, format).map_err(|e| {
            ApiError::internal(format!(
                "could not load dataset from {}: {e}",
                dir.display()
            ))
        })?);
        self.datasets
            .lock()
            .expect("dataset cache poisoned")
            .insert(dir.to_path_buf(), loaded.clone());
        Ok(loaded)
    }

    fn allocate_id(&self) -> String {
        format!("s{:06}", self.next_id.fetch_add(1, Ordering::SeqCst))
    }

    pub async fn get(&self, id: &str) -> Result<SharedEntry, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    pub async fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().await.keys().cloned().collect();
        ids.sort();
        ids
    }

    fn meta_for(&self, req: &CreateRequest, id: String) -> Result<SessionMeta, ApiError> {
        let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, m);
        let defaults = SurveyConfig::default();
        let classifier = match req.classifier.as_deref().unwrap_or("svm") {
            "svm" => ClassifierConfig::svm(),
            // tree count is fixed once the dataset is known
            "ensemble" => ClassifierConfig::ensemble(req.trees.unwrap_or(0)),
            other => return Err(bad(format!("unknown classifier `{other}`"))),
        };
        let stop = match &req.stop {
            None => defaults.stop,
            Some(s) => s.parse::<StopRule>().map_err(|e| bad(e.to_string()))?,
        };
        let config = SurveyConfig {
            batch_size: req.batch_size.unwrap_or(defaults.batch_size),
            classifier,
            stop,
            seed: req.seed.unwrap_or(defaults.seed),
            min_df: req.min_df.unwrap_or(defaults.min_df),
        };
        if req.classifier.as_deref() != Some("ensemble") {
            config.validate().map_err(|e| bad(e.to_string()))?;
        }
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(SessionMeta {
            id,
            data_dir: req
                .data_dir
                .as_ref()
                .map(PathBuf::from)
                .unwrap_or_else(|| self.data_dir.clone()),
            format: self.format.to_string(),
            project: req.project.clone(),
            config,
            created_at,
        })
    }

    /// Loads the data and trains the starting model. Blocking.
    fn build(&self, meta: &mut SessionMeta) -> Result<SurveySession, ApiError> {
        let format: DatasetFormat = meta.format.parse()?;
        let corpora = self.dataset(&meta.data_dir, format)?;
        if !corpora.iter().any(|c| c.name == meta.project) {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                format!("unknown project `{}`", meta.project),
            ));
        }
        if let ClassifierConfig::Ensemble {
            trees: 0,
            sample_fraction,
        } = meta.config.classifier
        {
            meta.config.classifier = ClassifierConfig::Ensemble {
                trees: corpora.len().saturating_sub(1).max(1),
                sample_fraction,
            };
        }
        meta.config.validate()?;
        let (train, test) = leave_one_out(&corpora, &meta.project)?;
        Ok(SurveySession::new(Arc::new(test), &train, meta.config)?)
    }

    fn log_path(&self, id: &str) -> Option<PathBuf> {
        self.state_dir.as_ref().map(|d| d.join(format!("{id}.log")))
    }

    /// Creates, persists and registers a session. Blocking.
    pub fn create_blocking(&self, req: &CreateRequest) -> Result<SharedEntry, ApiError> {
        let mut meta = self.meta_for(req, self.allocate_id())?;
        let mut session = self.build(&mut meta)?;
        if let Some(path) = self.log_path(&meta.id) {
            let line = serde_json::to_string(&meta)
                .map_err(|e| ApiError::internal(format!("cannot encode session metadata: {e}")))?;
            session.attach_log(SessionLog::create(&path, &line)?);
        }
        Ok(Arc::new(Mutex::new(Entry { meta, session })))
    }

    pub async fn register(&self, entry: SharedEntry) -> String {
        let id = entry.lock().await.meta.id.clone();
        self.sessions.write().await.insert(id.clone(), entry);
        id
    }

    /// Rebuilds every session logged in the state directory. Blocking; call
    /// before serving. Logs that cannot be replayed are skipped with a warning.
    pub fn restore_blocking(&self) -> Result<usize, ApiError> {
        let Some(dir) = &self.state_dir else {
            return Ok(0);
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| ApiError::internal(format!("cannot create {}: {e}", dir.display())))?;
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| ApiError::internal(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "log"))
            .collect();
        paths.sort();
        let mut restored = Vec::new();
        for path in paths {
            match self.restore_one(&path) {
                Ok(entry) => restored.push(entry),
                Err(e) => log::warn!("skipping {}: {}", path.display(), e.message),
            }
        }
        let count = restored.len();
        let mut max_id = 0;
        let mut map = self.sessions.blocking_write();
        for entry in restored {
            if let Some(n) = entry
                .meta
                .id
                .strip_prefix('s')
                .and_then(|n| n.parse::<u64>().ok())
            {
                max_id = max_id.max(n);
            }
            map.insert(entry.meta.id.clone(), Arc::new(Mutex::new(entry)));
        }
        self.next_id.fetch_max(max_id + 1, Ordering::SeqCst);
        Ok(count)
    }

    fn restore_one(&self, path: &Path) -> Result<Entry, ApiError> {
        let parsed = ParsedLog::read(path)?;
        let mut meta: SessionMeta = serde_json::from_str(&parsed.meta)
            .map_err(|e| ApiError::internal(format!("bad metadata line: {e}")))?;
        let mut session = self.build(&mut meta)?;
        parsed.replay(&mut session)?;
        session.attach_log(SessionLog::append_to(path)?);
        Ok(Entry { meta, session })
    }
}
