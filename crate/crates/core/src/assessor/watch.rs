//! Edit-time assessment of a model file.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use notify::{RecursiveMode, Watcher};

use super::{AssessmentReport, Assessor};
use crate::model::ParseError;
use crate::store::{Result, StoreError};

pub const DEFAULT_DEBOUNCE: Duration = Duration::from_millis(200);

#[derive(Debug, Clone)]
pub struct WatchSession {
    pub path: PathBuf,
    pub entry_id: String,
    pub debounce: Duration,
    pub author: String,
}

impl WatchSession {
    pub fn new(path: impl Into<PathBuf>, entry_id: impl Into<String>) -> Self {
        Self { path: path.into(), entry_id: entry_id.into(), debounce: DEFAULT_DEBOUNCE, author: "watch".into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WatchEvent {
    Report(Box<AssessmentReport>),
    /// The file did not parse; nothing was committed.
    ParseFailure(ParseError),
    /// Terminal: the watched file is gone.
    Ended { reason: String },
}

/// Leading-and-trailing debounce over a stream of change notifications.
///
/// A change after a quiet period fires at once. Changes that arrive within
/// the window of the previous change are coalesced into one trailing fire
/// once the window has passed without further changes. Times are offsets
/// from an arbitrary origin.
#[derive(Debug, Clone)]
pub struct Debouncer {
    window: Duration,
    last_event: Option<Duration>,
    pending: bool,
}

impl Debouncer {
    pub fn new(window: Duration) -> Self {
        Self { window, last_event: None, pending: false }
    }

    /// Records a change at `now`; returns true if it should fire now.
    pub fn event(&mut self, now: Duration) -> bool {
        let quiet = self.last_event.is_none_or(|t| now.saturating_sub(t) >= self.window);
        self.last_event = Some(now);
        if quiet {
            self.pending = false;
            true
        } else {
            self.pending = true;
            false
        }
    }

    /// When the coalesced trailing fire is due, if one is pending.
    pub fn deadline(&self) -> Option<Duration> {
        match (self.pending, self.last_event) {
            (true, Some(t)) => Some(t + self.window),
            _ => None,
        }
    }

    /// Returns true (once) when a pending trailing fire is due at `now`.
    pub fn poll(&mut self, now: Duration) -> bool {
        if self.deadline().is_some_and(|d| now >= d) {
            self.pending = false;
            true
        } else {
            false
        }
    }
}

fn assess_file(assessor: &Assessor, session: &WatchSession) -> Result<Option<WatchEvent>> {
    let bytes = match std::fs::read(&session.path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Ok(Some(WatchEvent::Ended { reason: format!("{} was deleted", session.path.display()) }))
        }
        Err(e) => return Err(e.into()),
    };
    let model_text = match std::str::from_utf8(&bytes) {
        Ok(s) => s,
        Err(_) => return Ok(Some(WatchEvent::ParseFailure(crate::model::parse_model_bytes(&bytes).unwrap_err()))),
    };
    match assessor.commit(&session.entry_id, model_text, &session.author) {
        Ok((_, report)) => Ok(Some(WatchEvent::Report(Box::new(report)))),
        Err(StoreError::Parse(e)) => Ok(Some(WatchEvent::ParseFailure(e))),
        Err(e) => Err(e),
    }
}

fn is_about(event: &notify::Event, target: &Path) -> bool {
    // our own reads of the file show up as access events
    if matches!(event.kind, notify::EventKind::Access(_)) {
        return false;
    }
    let name = target.file_name();
    event.paths.iter().any(|p| p == target || (p.file_name() == name && p.parent().and_then(Path::file_name) == target.parent().and_then(Path::file_name)))
}

/// Watches `session.path` until the file is deleted or `stop` is set.
///
/// The file is assessed once at start. Every debounced change parses the
/// file; a successful parse is committed as a snapshot of the bound entry and
/// its report emitted, a failed parse is emitted without committing.
pub fn watch(assessor: &Assessor, session: &WatchSession, stop: &AtomicBool, mut emit: impl FnMut(WatchEvent)) -> Result<()> {
    assessor.library().meta(&session.entry_id)?;
    let (tx, rx) = mpsc::channel();
    let mut watcher = notify::recommended_watcher(move |res: notify::Result<notify::Event>| {
        if let Ok(ev) = res {
            let _ = tx.send(ev);
        }
    })
    .map_err(|e| StoreError::Io(std::io::Error::other(e)))?;
    let dir = session.path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    watcher
        .watch(dir, RecursiveMode::NonRecursive)
        .map_err(|e| StoreError::Io(std::io::Error::other(e)))?;

    let fire = |emit: &mut dyn FnMut(WatchEvent)| -> Result<bool> {
        match assess_file(assessor, session)? {
            Some(ev @ WatchEvent::Ended { .. }) => {
                emit(ev);
                Ok(true)
            }
            Some(ev) => {
                emit(ev);
                Ok(false)
            }
            None => Ok(false),
        }
    };

    if fire(&mut emit)? {
        return Ok(());
    }
    let start = Instant::now();
    let mut debouncer = Debouncer::new(session.debounce);
    let tick = Duration::from_millis(50);
    while !stop.load(Ordering::Relaxed) {
        let now = start.elapsed();
        let wait = debouncer.deadline().map_or(tick, |d| d.saturating_sub(now).min(tick));
        match rx.recv_timeout(wait) {
            Ok(ev) => {
                if is_about(&ev, &session.path) && debouncer.event(start.elapsed()) && fire(&mut emit)? {
                    return Ok(());
                }
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {}
            Err(mpsc::RecvTimeoutError::Disconnected) => break,
        }
        if debouncer.poll(start.elapsed()) && fire(&mut emit)? {
            return Ok(());
        }
    }
    Ok(())
}
