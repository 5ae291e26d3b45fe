//! Session logs on disk: one JSON-lines file per session.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::session::Event;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: record {line} is unreadable and not the last one: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("`{0}` is not a valid session id")]
    BadId(String),
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::BadId(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.jsonl")))
    }

    /// Append and flush to disk before returning.
    pub fn append(&self, id: &str, events: &[Event]) -> Result<(), StoreError> {
        if events.is_empty() {
            return Ok(());
        }
        let mut text = String::new();
        for e in events {
            text.push_str(&serde_json::to_string(e).expect("events serialize"));
            text.push('\n');
        }
        let mut f = OpenOptions::new().create(true).append(true).open(self.path(id)?)?;
        f.write_all(text.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }

    /// The events of a session. An unreadable last record, as left by a
    /// crash in the middle of a write, is cut off with a warning.
    pub fn load(&self, id: &str) -> Result<Vec<Event>, StoreError> {
        let path = self.path(id)?;
        let mut reader = BufReader::new(File::open(&path)?);
        let mut events = Vec::new();
        let mut good_len = 0u64;
        let mut line = String::new();
        let mut bad: Option<(usize, String)> = None;
        let mut k = 0;
        loop {
            line.clear();
            let n = reader.read_line(&mut line)?;
            if n == 0 {
                break;
            }
            k += 1;
            if let Some((at, message)) = bad.take() {
                return Err(StoreError::Corrupt { path, line: at, message });
            }
            let complete = line.ends_with('\n');
            match serde_json::from_str::<Event>(line.trim_end()) {
                Ok(e) if complete => {
                    events.push(e);
                    good_len += n as u64;
                }
                Ok(_) => bad = Some((k, "record is not terminated".into())),
                Err(e) => bad = Some((k, e.to_string())),
            }
        }
        if let Some((at, message)) = bad {
            log::warn!("{}: dropping unreadable record {at} ({message})", path.display());
            OpenOptions::new().write(true).open(&path)?.set_len(good_len)?;
        }
        Ok(events)
    }

    /// Ids of stored sessions, sorted.
    pub fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let p = entry?.path();
            if p.extension().and_then(|e| e.to_str()) == Some("jsonl") {
                if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                    if valid_id(stem) {
                        out.push(stem.to_string());
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Reply, SessionRequest};

    fn sample() -> Vec<Event> {
        vec![
            Event::Created { request: SessionRequest::new("theory t { int x; vocab { x = 0; } }") },
            Event::Answered { reply: Reply::Vtt, reason: None, nonce: None },
        ]
    }

    #[test]
    fn append_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let s = SessionStore::open(dir.path()).unwrap();
        s.append("s1", &sample()[..1]).unwrap();
        s.append("s1", &sample()[1..]).unwrap();
        assert_eq!(s.load("s1").unwrap(), sample());
        assert_eq!(s.ids().unwrap(), ["s1"]);
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let s = SessionStore::open(dir.path()).unwrap();
        s.append("s1", &sample()).unwrap();
        let path = dir.path().join("s1.jsonl");
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"type\":\"answ").unwrap();
        drop(f);
        assert_eq!(s.load("s1").unwrap(), sample());
        // The file was repaired, so appending continues cleanly.
        s.append("s1", &sample()[1..]).unwrap();
        assert_eq!(s.load("s1").unwrap().len(), 3);
    }

    #[test]
    fn corruption_in_the_middle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let s = SessionStore::open(dir.path()).unwrap();
        fs::write(dir.path().join("s1.jsonl"), "garbage\n{\"type\":\"retracted\",\"event\":1}\n").unwrap();
        assert!(matches!(s.load("s1"), Err(StoreError::Corrupt { line: 1, .. })));
    }

    #[test]
    fn empty_log_has_no_events() {
        let dir = tempfile::tempdir().unwrap();
        let s = SessionStore::open(dir.path()).unwrap();
        fs::write(dir.path().join("s1.jsonl"), "").unwrap();
        assert!(s.load("s1").unwrap().is_empty());
    }

    #[test]
    fn ids_are_checked() {
        let dir = tempfile::tempdir().unwrap();
        let s = SessionStore::open(dir.path()).unwrap();
        assert!(matches!(s.append("../x", &sample()), Err(StoreError::BadId(_))));
    }
}
