//! Data directory: outlines, tasks, session logs, assets and exports.
//!
//! ```text
//! <root>/outlines/<outline_id>.json
//! <root>/tasks/<task_id>.json
//! <root>/sessions/<session_id>.log
//! <root>/assets/…
//! <root>/exports/<session_id>/<variant>.<ext>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use tokio::sync::watch;

use crate::assets::{AssetError, AssetStore};
use crate::canon::CanonError;
use crate::domain::{OutlineId, Session, SessionId, StoryOutline, TaskId};
use crate::session::{
    append_event, read_log, replay, write_log, CorruptLog, LogError, SessionTask, TaskBoard,
};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("data directory I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Document { path: PathBuf, source: CanonError },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("{path}: {source}")]
    Corrupt { path: PathBuf, source: CorruptLog },
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error("outline {id} changed: expected version {expected}, stored version {found}")]
    VersionConflict { id: OutlineId, expected: u32, found: u32 },
}

/// One live session. All mutations go through [`SessionSlot::mutate`];
/// readers see the snapshot published after the last mutation and never wait
/// on a running generation.
#[derive(Debug)]
pub struct SessionSlot {
    writer: Mutex<Session>,
    log_path: PathBuf,
    published: watch::Sender<Arc<Session>>,
}

impl SessionSlot {
    fn new(session: Session, log_path: PathBuf) -> Self {
        let (published, _) = watch::channel(Arc::new(session.clone()));
        Self { writer: Mutex::new(session), log_path, published }
    }

    fn lock(&self) -> MutexGuard<'_, Session> {
        self.writer.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn snapshot(&self) -> Arc<Session> {
        self.published.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<Session>> {
        self.published.subscribe()
    }

    /// Runs `f` under the writer lock, appends whatever events it committed
    /// to the log file (whether or not `f` reported an error) and publishes
    /// the new snapshot.
    pub fn mutate<T>(&self, f: impl FnOnce(&mut Session) -> T) -> Result<T, LogError> {
        let mut session = self.lock();
        let before = session.last_seq();
        let out = f(&mut session);
        for ev in session.event_log.iter().filter(|e| e.seq > before) {
            append_event(&self.log_path, ev)?;
        }
        if session.last_seq() != before {
            self.published.send_replace(Arc::new(session.clone()));
        }
        Ok(out)
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    assets: Arc<AssetStore>,
    outlines: Mutex<BTreeMap<OutlineId, StoryOutline>>,
    board: TaskBoard,
    sessions: RwLock<BTreeMap<SessionId, Arc<SessionSlot>>>,
}

fn json_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, std::io::Error> {
    let mut out = Vec::new();
    if dir.is_dir() {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some(ext) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn write_atomic(path: &Path, text: &str) -> Result<(), std::io::Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(tmp, path)
}

impl Store {
    /// Opens `root`, loading every outline, task and session log in it.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let assets = Arc::new(AssetStore::open(&root)?);
        let mut outlines = BTreeMap::new();
        for path in json_files(&root.join("outlines"), "json")? {
            let outline = StoryOutline::from_document(&fs::read_to_string(&path)?)
                .map_err(|source| StoreError::Document { path: path.clone(), source })?;
            outlines.insert(outline.outline_id.clone(), outline);
        }
        let board = TaskBoard::new();
        for path in json_files(&root.join("tasks"), "json")? {
            let task = SessionTask::from_document(&fs::read_to_string(&path)?)
                .map_err(|source| StoreError::Document { path: path.clone(), source })?;
            board.insert(task);
        }
        let mut sessions = BTreeMap::new();
        for path in json_files(&root.join("sessions"), "log")? {
            let events = read_log(&path)?;
            let session =
                replay(&events).map_err(|source| StoreError::Corrupt { path: path.clone(), source })?;
            sessions.insert(session.session_id.clone(), Arc::new(SessionSlot::new(session, path)));
        }
        Ok(Self {
            root,
            assets,
            outlines: Mutex::new(outlines),
            board,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn assets(&self) -> &Arc<AssetStore> {
        &self.assets
    }

    pub fn outline(&self, id: &OutlineId) -> Option<StoryOutline> {
        self.outlines.lock().expect("outline map").get(id).cloned()
    }

    pub fn outlines(&self) -> Vec<StoryOutline> {
        self.outlines.lock().expect("outline map").values().cloned().collect()
    }

    fn persist_outline(&self, outline: &StoryOutline) -> Result<(), StoreError> {
        let path = self.root.join("outlines").join(format!("{}.json", outline.outline_id));
        let text = outline
            .to_document()
            .map_err(|source| StoreError::Document { path: path.clone(), source })?;
        Ok(write_atomic(&path, &text)?)
    }

    /// Stores a new outline or replaces one. With `expected_version`, the
    /// write only happens if the stored version still matches.
    pub fn put_outline(
        &self,
        outline: StoryOutline,
        expected_version: Option<u32>,
    ) -> Result<(), StoreError> {
        let mut map = self.outlines.lock().expect("outline map");
        if let (Some(expected), Some(current)) = (expected_version, map.get(&outline.outline_id)) {
            if current.version != expected {
                return Err(StoreError::VersionConflict {
                    id: outline.outline_id.clone(),
                    expected,
                    found: current.version,
                });
            }
        }
        self.persist_outline(&outline)?;
        map.insert(outline.outline_id.clone(), outline);
        Ok(())
    }

    pub fn board(&self) -> &TaskBoard {
        &self.board
    }

    /// Writes the board's current copy of a task to disk.
    pub fn save_task(&self, id: &TaskId) -> Result<(), StoreError> {
        let Some(task) = self.board.get(id) else { return Ok(()) };
        let path = self.root.join("tasks").join(format!("{id}.json"));
        let text =
            task.to_document().map_err(|source| StoreError::Document { path: path.clone(), source })?;
        Ok(write_atomic(&path, &text)?)
    }

    pub fn add_task(&self, task: SessionTask) -> Result<(), StoreError> {
        let id = task.task_id.clone();
        self.board.insert(task);
        self.save_task(&id)
    }

    pub fn session_log_path(&self, id: &SessionId) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.log"))
    }

    pub fn insert_session(&self, session: Session) -> Result<Arc<SessionSlot>, StoreError> {
        let path = self.session_log_path(&session.session_id);
        write_log(&path, &session.event_log)?;
        let id = session.session_id.clone();
        let slot = Arc::new(SessionSlot::new(session, path));
        self.sessions.write().expect("session map").insert(id, slot.clone());
        Ok(slot)
    }

    pub fn session(&self, id: &SessionId) -> Option<Arc<SessionSlot>> {
        self.sessions.read().expect("session map").get(id).cloned()
    }

    pub fn sessions(&self) -> Vec<Arc<SessionSlot>> {
        self.sessions.read().expect("session map").values().cloned().collect()
    }
}
