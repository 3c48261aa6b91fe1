use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Snapshot,
    Assessment,
    Review,
    Attestation,
    Override,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Snapshot => "snapshot",
            EventKind::Assessment => "assessment",
            EventKind::Review => "review",
            EventKind::Attestation => "attestation",
            EventKind::Override => "override",
        }
    }
}

/// One entry of the event stream. Ids start at 1 and increase by one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEvent {
    pub id: u64,
    #[serde(rename = "type")]
    pub kind: EventKind,
    pub entry_id: String,
    pub data: serde_json::Value,
}

/// In-memory history of every event published since the server started,
/// plus a live fan-out to subscribers.
#[derive(Debug)]
pub struct EventLog {
    history: Mutex<Vec<ApiEvent>>,
    live: broadcast::Sender<ApiEvent>,
}

impl Default for EventLog {
    fn default() -> Self {
        Self::new()
    }
}

impl EventLog {
    pub fn new() -> Self {
        Self { history: Mutex::new(Vec::new()), live: broadcast::channel(1024).0 }
    }

    pub fn publish(&self, kind: EventKind, entry_id: &str, data: serde_json::Value) -> ApiEvent {
        let mut history = self.history.lock().unwrap_or_else(|p| p.into_inner());
        let event = ApiEvent { id: history.len() as u64 + 1, kind, entry_id: entry_id.to_string(), data };
        history.push(event.clone());
        // no subscribers is fine
        let _ = self.live.send(event.clone());
        event
    }

    /// Events with id greater than `since`, and a receiver for everything
    /// after them. Taken under one lock, so nothing is missed or repeated.
    pub fn subscribe(&self, since: Option<u64>) -> (Vec<ApiEvent>, broadcast::Receiver<ApiEvent>) {
        let history = self.history.lock().unwrap_or_else(|p| p.into_inner());
        let replay = match since {
            Some(n) => history.iter().skip(n as usize).cloned().collect(),
            None => Vec::new(),
        };
        (replay, self.live.subscribe())
    }

    pub fn history(&self) -> Vec<ApiEvent> {
        self.history.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}
