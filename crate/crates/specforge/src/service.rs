//! Many sessions at once, each with its own solver, persisted as they go.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use specforge_core::solver::{Solver, SolverError};

use crate::session::{Event, Reply, Session, SessionError, SessionRequest, SessionResult, SessionView, Status};
use crate::store::{SessionStore, StoreError};

pub type BoxSolver = Box<dyn Solver + Send>;
pub type SolverFactory = Arc<dyn Fn() -> Result<BoxSolver, SolverError> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub classification: Reply,
    #[serde(default)]
    pub reason: Option<BTreeSet<String>>,
    /// Posting the same nonce twice applies the answer once.
    #[serde(default)]
    pub nonce: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot start a solver: {0}")]
    Solver(#[from] SolverError),
}

struct Entry {
    session: Session,
    solver: BoxSolver,
}

pub struct SessionManager {
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Entry>>>>,
    next: AtomicU64,
    store: Option<SessionStore>,
    factory: SolverFactory,
}

fn numeric_suffix(id: &str) -> Option<u64> {
    id.strip_prefix('s')?.parse().ok()
}

impl SessionManager {
    /// Sessions found in `store` are replayed; ones that fail to replay
    /// are skipped with a warning.
    pub fn new(factory: SolverFactory, store: Option<SessionStore>) -> Result<Self, ServiceError> {
        let m = SessionManager { sessions: Mutex::new(BTreeMap::new()), next: AtomicU64::new(1), store, factory };
        if let Some(store) = &m.store {
            for id in store.ids()? {
                let events = store.load(&id)?;
                if events.is_empty() {
                    log::warn!("session {id} has an empty log; skipped");
                    continue;
                }
                let mut solver = (m.factory)()?;
                match Session::replay(events, &mut *solver) {
                    Ok(mut session) => {
                        store.append(&id, &session.take_unsaved())?;
                        if let Some(n) = numeric_suffix(&id) {
                            m.next.fetch_max(n + 1, Ordering::SeqCst);
                        }
                        m.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(Entry { session, solver })));
                    }
                    Err(e) => log::warn!("session {id} does not replay: {e}"),
                }
            }
        }
        Ok(m)
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ServiceError> {
        self.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    fn persist(&self, id: &str, session: &mut Session) -> Result<(), ServiceError> {
        let events = session.take_unsaved();
        if let Some(store) = &self.store {
            store.append(id, &events)?;
        }
        Ok(())
    }

    pub fn create(&self, request: SessionRequest) -> Result<SessionView, ServiceError> {
        let mut solver = (self.factory)()?;
        let mut session = Session::create(request, &mut *solver)?;
        let id = format!("s{}", self.next.fetch_add(1, Ordering::SeqCst));
        self.persist(&id, &mut session)?;
        let view = session.view(&id);
        self.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(Entry { session, solver })));
        Ok(view)
    }

    pub fn list(&self) -> Vec<SessionView> {
        let entries: Vec<(String, Arc<Mutex<Entry>>)> =
            self.sessions.lock().unwrap().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        entries.into_iter().map(|(id, e)| e.lock().unwrap().session.view(&id)).collect()
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ServiceError> {
        Ok(self.entry(id)?.lock().unwrap().session.view(id))
    }

    pub fn answer(&self, id: &str, a: AnswerRequest) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock().unwrap();
        let Entry { session, solver } = &mut *guard;
        session.answer(a.classification, a.reason, a.nonce, &mut **solver)?;
        self.persist(id, session)?;
        Ok(session.view(id))
    }

    pub fn undo(&self, id: &str) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock().unwrap();
        let Entry { session, solver } = &mut *guard;
        session.undo(&mut **solver)?;
        self.persist(id, session)?;
        Ok(session.view(id))
    }

    pub fn abort(&self, id: &str) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock().unwrap();
        guard.session.abort("aborted by request")?;
        self.persist(id, &mut guard.session)?;
        Ok(guard.session.view(id))
    }

    pub fn result(&self, id: &str) -> Result<SessionResult, ServiceError> {
        let entry = self.entry(id)?;
        let guard = entry.lock().unwrap();
        match (guard.session.status(), guard.session.result()) {
            (Status::Done, Some(r)) => Ok(r.clone()),
            (s, _) => Err(SessionError::Conflict(format!("session is {s:?}, no result yet")).into()),
        }
    }

    pub fn events(&self, id: &str) -> Result<Vec<Event>, ServiceError> {
        Ok(self.entry(id)?.lock().unwrap().session.events().to_vec())
    }
}
