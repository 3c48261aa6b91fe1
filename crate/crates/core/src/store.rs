//! On-disk model library.
//!
//! Layout under the library root:
//!
//! ```text
//! quality.json                     optional quality model config
//! .modelgate.lock                  writer lock (holds the writer's pid)
//! <entry_id>/meta.json             snapshot index, reviews, attestations,
//!                                  overrides, cached last assessment
//! <entry_id>/snapshots/<seq>.mdl   canonical model text per snapshot
//! ```
//!
//! Every file is replaced by write-to-temp-then-rename. A snapshot file is
//! written before the `meta.json` that lists it, so a crash in between leaves
//! an unlisted file that readers ignore and the next commit overwrites.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::assessor::AssessmentReport;
use crate::gates::{Attestation, ConfigError, Override, QualityModelConfig, Stage, Verdict};
use crate::instruments::{is_medium_metric, CharacteristicClass, QualityAttribute};
use crate::model::{canonical_print, parse_model, ContentHash, ParseError};

pub const CONFIG_FILE: &str = "quality.json";
pub const LOCK_FILE: &str = ".modelgate.lock";
const META_FILE: &str = "meta.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("entry `{0}` already exists")]
    DuplicateEntry(String),
    #[error("no entry `{0}`")]
    UnknownEntry(String),
    #[error("no review `{0}`")]
    UnknownReview(String),
    #[error("invalid entry id `{0}`: use letters, digits, `-` and `_`, starting with a letter or digit")]
    InvalidEntryId(String),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("review cannot go from {from} to {to}")]
    IllegalTransition { from: ReviewStatus, to: ReviewStatus },
    #[error("`{0}` is not a weak attribute; only weak attributes take attestations")]
    NotWeakAttribute(QualityAttribute),
    #[error("`{0}` is not a medium metric; only medium findings can be overridden")]
    NotMediumMetric(String),
    #[error("an override needs a justification")]
    EmptyJustification,
    #[error("a review needs text")]
    EmptyReviewText,
    #[error("no active override for `{metric_id}` at `{element_path}`")]
    UnknownOverride { metric_id: String, element_path: String },
    #[error("library is locked by process {pid} (is `serve` running on this root?)")]
    Locked { pid: String },
    #[error("library opened read-only")]
    ReadOnly,
    #[error("library root `{0}` does not exist; run `init` first")]
    NoLibrary(PathBuf),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("corrupt library data in {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("injected fault at {0:?}")]
    InjectedFault(FailPoint),
}

impl StoreError {
    /// Stable machine-readable identifier, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::DuplicateEntry(_) => "duplicate_entry",
            StoreError::UnknownEntry(_) => "unknown_entry",
            StoreError::UnknownReview(_) => "unknown_review",
            StoreError::InvalidEntryId(_) => "invalid_entry_id",
            StoreError::Parse(_) => "parse_error",
            StoreError::IllegalTransition { .. } => "illegal_transition",
            StoreError::NotWeakAttribute(_) => "not_weak_attribute",
            StoreError::NotMediumMetric(_) => "not_medium_metric",
            StoreError::EmptyJustification => "empty_justification",
            StoreError::EmptyReviewText => "empty_review_text",
            StoreError::UnknownOverride { .. } => "unknown_override",
            StoreError::Locked { .. } => "library_locked",
            StoreError::ReadOnly => "read_only",
            StoreError::NoLibrary(_) => "no_library",
            StoreError::Config(_) => "config_error",
            StoreError::Corrupt { .. } => "corrupt_library",
            StoreError::Io(_) => "io_error",
            StoreError::InjectedFault(_) => "injected_fault",
        }
    }
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hat {
    Yellow,
    Black,
    White,
    Green,
    Red,
}

impl Hat {
    pub const ALL: [Hat; 5] = [Hat::Yellow, Hat::Black, Hat::White, Hat::Green, Hat::Red];

    pub fn as_str(self) -> &'static str {
        match self {
            Hat::Yellow => "yellow",
            Hat::Black => "black",
            Hat::White => "white",
            Hat::Green => "green",
            Hat::Red => "red",
        }
    }
}

impl FromStr for Hat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| format!("unknown hat `{s}` (expected yellow, black, white, green or red)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewStatus {
    Open,
    Done,
    Reopened,
}

impl ReviewStatus {
    pub const ALL: [ReviewStatus; 3] = [ReviewStatus::Open, ReviewStatus::Done, ReviewStatus::Reopened];

    pub fn as_str(self) -> &'static str {
        match self {
            ReviewStatus::Open => "open",
            ReviewStatus::Done => "done",
            ReviewStatus::Reopened => "reopened",
        }
    }

    /// Reopened reviews count as open.
    pub fn is_open(self) -> bool {
        matches!(self, ReviewStatus::Open | ReviewStatus::Reopened)
    }

    pub fn can_move_to(self, to: ReviewStatus) -> bool {
        matches!(
            (self, to),
            (ReviewStatus::Open, ReviewStatus::Done)
                | (ReviewStatus::Done, ReviewStatus::Reopened)
                | (ReviewStatus::Reopened, ReviewStatus::Done)
        )
    }
}

impl fmt::Display for ReviewStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReviewStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|st| st.as_str() == s).ok_or_else(|| format!("unknown review status `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub hat: Hat,
    pub text: String,
    pub author: String,
    pub status: ReviewStatus,
    /// Head snapshot when the review was filed.
    pub snapshot_ref: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub seq_no: u64,
    pub content_hash: ContentHash,
    pub author: String,
    pub created_at: DateTime<Utc>,
    /// Stage from the most recent assessment of this snapshot.
    #[serde(default)]
    pub stage: Option<Stage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seq_no: u64,
    pub content_hash: ContentHash,
    pub source_text: String,
    pub author: String,
    pub created_at: DateTime<Utc>,
}

/// Contents of `<entry_id>/meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryMeta {
    pub entry_id: String,
    pub created_at: DateTime<Utc>,
    pub snapshots: Vec<SnapshotMeta>,
    pub next_review_no: u64,
    pub reviews: Vec<Review>,
    pub attestations: Vec<Attestation>,
    pub overrides: Vec<Override>,
    pub last_assessment: Option<AssessmentReport>,
}

impl EntryMeta {
    pub fn head(&self) -> &SnapshotMeta {
        self.snapshots.last().expect("entries always have a snapshot")
    }

    pub fn open_black_hats(&self) -> usize {
        self.reviews.iter().filter(|r| r.hat == Hat::Black && r.status.is_open()).count()
    }

    pub fn active_overrides(&self) -> impl Iterator<Item = &Override> {
        self.overrides.iter().filter(|o| !o.revoked)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitOutcome {
    pub snapshot: Snapshot,
    /// True when the canonical text equalled the head and nothing was written.
    pub no_op: bool,
}

#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailPoint {
    /// Snapshot file written, `meta.json` untouched.
    AfterSnapshotFile,
    /// New `meta.json` written to its temp file but not renamed.
    BeforeMetaRename,
}

pub fn validate_entry_id(id: &str) -> Result<()> {
    let mut chars = id.chars();
    let ok = id.len() <= 128
        && chars.next().is_some_and(|c| c.is_ascii_alphanumeric())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidEntryId(id.to_string()))
    }
}

/// Review ids are `<entry_id>.r<n>`; `.` never occurs in entry ids.
fn split_review_id(review_id: &str) -> Option<(&str, u64)> {
    let (entry, n) = review_id.split_once(".r")?;
    validate_entry_id(entry).ok()?;
    Some((entry, n.parse().ok()?))
}

struct WriterLock {
    path: PathBuf,
}

impl WriterLock {
    fn acquire(root: &Path) -> Result<Self> {
        let path = root.join(LOCK_FILE);
        for _ in 0..2 {
            match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    write!(f, "{}", std::process::id())?;
                    return Ok(Self { path });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let pid = fs::read_to_string(&path).unwrap_or_default().trim().to_string();
                    if process_gone(&pid) {
                        let _ = fs::remove_file(&path);
                        continue;
                    }
                    return Err(StoreError::Locked { pid });
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(StoreError::Locked { pid: "unknown".into() })
    }
}

impl Drop for WriterLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Only detectable where `/proc` exists; elsewhere a lock is assumed live.
fn process_gone(pid: &str) -> bool {
    let Ok(pid) = pid.parse::<u32>() else {
        return false;
    };
    Path::new("/proc/self").exists() && !Path::new(&format!("/proc/{pid}")).exists()
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn temp_path(path: &Path) -> PathBuf {
    let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp-{}-{n}", std::process::id()));
    path.with_file_name(name)
}

fn write_temp(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    let tmp = temp_path(path);
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(tmp)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = write_temp(path, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn now() -> DateTime<Utc> {
    Utc::now()
}

pub struct Library {
    root: PathBuf,
    config: QualityModelConfig,
    writer: Option<Mutex<WriterLock>>,
    fail_point: Mutex<Option<FailPoint>>,
}

impl fmt::Debug for Library {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Library").field("root", &self.root).field("writable", &self.writer.is_some()).finish()
    }
}

impl Library {
    /// Creates the root directory and a default `quality.json` if absent.
    pub fn init(root: &Path) -> Result<()> {
        fs::create_dir_all(root)?;
        let cfg = root.join(CONFIG_FILE);
        if !cfg.exists() {
            write_atomic(&cfg, QualityModelConfig::default().to_json().as_bytes())?;
        }
        Ok(())
    }

    /// Opens the library as its single writer.
    pub fn open(root: &Path) -> Result<Self> {
        let config = Self::load_config(root)?;
        let lock = WriterLock::acquire(root)?;
        Ok(Self { root: root.to_path_buf(), config, writer: Some(Mutex::new(lock)), fail_point: Mutex::new(None) })
    }

    pub fn open_read_only(root: &Path) -> Result<Self> {
        let config = Self::load_config(root)?;
        Ok(Self { root: root.to_path_buf(), config, writer: None, fail_point: Mutex::new(None) })
    }

    fn load_config(root: &Path) -> Result<QualityModelConfig> {
        if !root.is_dir() {
            return Err(StoreError::NoLibrary(root.to_path_buf()));
        }
        Ok(QualityModelConfig::load(&root.join(CONFIG_FILE))?)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &QualityModelConfig {
        &self.config
    }

    pub fn is_writable(&self) -> bool {
        self.writer.is_some()
    }

    #[doc(hidden)]
    pub fn inject_fault(&self, fp: FailPoint) {
        *self.fail_point.lock().unwrap() = Some(fp);
    }

    fn trip(&self, fp: FailPoint) -> Result<()> {
        let mut slot = self.fail_point.lock().unwrap();
        if *slot == Some(fp) {
            *slot = None;
            return Err(StoreError::InjectedFault(fp));
        }
        Ok(())
    }

    fn entry_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    fn meta_path(&self, id: &str) -> PathBuf {
        self.entry_dir(id).join(META_FILE)
    }

    fn snapshot_path(&self, id: &str, seq: u64) -> PathBuf {
        self.entry_dir(id).join("snapshots").join(format!("{seq}.mdl"))
    }

    /// Runs `f` holding the writer mutex.
    fn write<T>(&self, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let writer = self.writer.as_ref().ok_or(StoreError::ReadOnly)?;
        let _guard = writer.lock().unwrap_or_else(|p| p.into_inner());
        f()
    }

    pub fn entry_ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for dirent in fs::read_dir(&self.root)? {
            let dirent = dirent?;
            let name = dirent.file_name().to_string_lossy().into_owned();
            if validate_entry_id(&name).is_ok() && dirent.path().join(META_FILE).is_file() {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn meta(&self, id: &str) -> Result<EntryMeta> {
        validate_entry_id(id).map_err(|_| StoreError::UnknownEntry(id.to_string()))?;
        let path = self.meta_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::UnknownEntry(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt { path, reason: e.to_string() })
    }

    fn save_meta(&self, meta: &EntryMeta) -> Result<()> {
        let path = self.meta_path(&meta.entry_id);
        let mut bytes = serde_json::to_vec_pretty(meta).expect("meta serializes");
        bytes.push(b'\n');
        let tmp = write_temp(&path, &bytes)?;
        if let Err(e) = self.trip(FailPoint::BeforeMetaRename) {
            let _ = fs::remove_file(&tmp);
            return Err(e);
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn snapshot(&self, id: &str, seq: u64) -> Result<Snapshot> {
        let meta = self.meta(id)?;
        let sm = meta
            .snapshots
            .iter()
            .find(|s| s.seq_no == seq)
            .ok_or_else(|| StoreError::Corrupt { path: self.meta_path(id), reason: format!("no snapshot {seq}") })?;
        self.read_snapshot(id, sm)
    }

    pub fn head(&self, id: &str) -> Result<Snapshot> {
        let meta = self.meta(id)?;
        self.read_snapshot(id, meta.head())
    }

    fn read_snapshot(&self, id: &str, sm: &SnapshotMeta) -> Result<Snapshot> {
        let path = self.snapshot_path(id, sm.seq_no);
        let source_text = fs::read_to_string(&path)?;
        if ContentHash::of_text(&source_text) != sm.content_hash {
            return Err(StoreError::Corrupt { path, reason: "content hash mismatch".into() });
        }
        Ok(Snapshot {
            seq_no: sm.seq_no,
            content_hash: sm.content_hash.clone(),
            source_text,
            author: sm.author.clone(),
            created_at: sm.created_at,
        })
    }

    fn write_snapshot_file(&self, id: &str, seq: u64, canonical: &str) -> Result<()> {
        let path = self.snapshot_path(id, seq);
        fs::create_dir_all(path.parent().expect("snapshot path has a parent"))?;
        write_atomic(&path, canonical.as_bytes())?;
        self.trip(FailPoint::AfterSnapshotFile)
    }

    pub fn create_entry(&self, id: &str, source: &str, author: &str) -> Result<(EntryMeta, Snapshot)> {
        validate_entry_id(id)?;
        let canonical = canonical_print(&parse_model(source)?);
        self.write(|| {
            if self.meta_path(id).exists() {
                return Err(StoreError::DuplicateEntry(id.to_string()));
            }
            let created_at = now();
            let content_hash = ContentHash::of_text(&canonical);
            self.write_snapshot_file(id, 1, &canonical)?;
            let meta = EntryMeta {
                entry_id: id.to_string(),
                created_at,
                snapshots: vec![SnapshotMeta {
                    seq_no: 1,
                    content_hash: content_hash.clone(),
                    author: author.to_string(),
                    created_at,
                    stage: None,
                }],
                next_review_no: 1,
                reviews: Vec::new(),
                attestations: Vec::new(),
                overrides: Vec::new(),
                last_assessment: None,
            };
            self.save_meta(&meta)?;
            let snap = Snapshot { seq_no: 1, content_hash, source_text: canonical, author: author.to_string(), created_at };
            Ok((meta, snap))
        })
    }

    pub fn commit_snapshot(&self, id: &str, source: &str, author: &str) -> Result<CommitOutcome> {
        let model = parse_model(source);
        self.write(|| {
            let mut meta = self.meta(id)?;
            let canonical = canonical_print(&model?);
            let content_hash = ContentHash::of_text(&canonical);
            let head = meta.head();
            if head.content_hash == content_hash {
                let snapshot = self.read_snapshot(id, head)?;
                return Ok(CommitOutcome { snapshot, no_op: true });
            }
            let seq_no = head.seq_no + 1;
            let created_at = now();
            self.write_snapshot_file(id, seq_no, &canonical)?;
            meta.snapshots.push(SnapshotMeta {
                seq_no,
                content_hash: content_hash.clone(),
                author: author.to_string(),
                created_at,
                stage: None,
            });
            self.save_meta(&meta)?;
            let snapshot = Snapshot { seq_no, content_hash, source_text: canonical, author: author.to_string(), created_at };
            Ok(CommitOutcome { snapshot, no_op: false })
        })
    }

    pub fn add_review(&self, id: &str, hat: Hat, text: &str, author: &str) -> Result<Review> {
        if text.trim().is_empty() {
            return Err(StoreError::EmptyReviewText);
        }
        self.write(|| {
            let mut meta = self.meta(id)?;
            let at = now();
            let review = Review {
                review_id: format!("{id}.r{}", meta.next_review_no),
                hat,
                text: text.to_string(),
                author: author.to_string(),
                status: ReviewStatus::Open,
                snapshot_ref: meta.head().seq_no,
                created_at: at,
                updated_at: at,
            };
            meta.next_review_no += 1;
            meta.reviews.push(review.clone());
            self.save_meta(&meta)?;
            Ok(review)
        })
    }

    /// The entry a review belongs to.
    pub fn review_entry(review_id: &str) -> Result<&str> {
        split_review_id(review_id).map(|(e, _)| e).ok_or_else(|| StoreError::UnknownReview(review_id.to_string()))
    }

    pub fn set_review_status(&self, review_id: &str, to: ReviewStatus) -> Result<Review> {
        let entry = Self::review_entry(review_id)?;
        self.write(|| {
            let mut meta = match self.meta(entry) {
                Err(StoreError::UnknownEntry(_)) => return Err(StoreError::UnknownReview(review_id.to_string())),
                other => other?,
            };
            let review = meta
                .reviews
                .iter_mut()
                .find(|r| r.review_id == review_id)
                .ok_or_else(|| StoreError::UnknownReview(review_id.to_string()))?;
            if !review.status.can_move_to(to) {
                return Err(StoreError::IllegalTransition { from: review.status, to });
            }
            review.status = to;
            review.updated_at = now();
            let out = review.clone();
            self.save_meta(&meta)?;
            Ok(out)
        })
    }

    pub fn record_attestation(&self, id: &str, attribute: QualityAttribute, verdict: Verdict, reviewer: &str) -> Result<Attestation> {
        if attribute.characteristic() != CharacteristicClass::Weak {
            return Err(StoreError::NotWeakAttribute(attribute));
        }
        self.write(|| {
            let mut meta = self.meta(id)?;
            let attestation = Attestation {
                attribute,
                content_hash: meta.head().content_hash.clone(),
                reviewer: reviewer.to_string(),
                verdict,
                created_at: now(),
            };
            meta.attestations.push(attestation.clone());
            self.save_meta(&meta)?;
            Ok(attestation)
        })
    }

    /// Re-recording an active override replaces its justification.
    pub fn record_override(&self, id: &str, metric_id: &str, element_path: &str, justification: &str, author: &str) -> Result<Override> {
        if !is_medium_metric(metric_id) {
            return Err(StoreError::NotMediumMetric(metric_id.to_string()));
        }
        if justification.trim().is_empty() {
            return Err(StoreError::EmptyJustification);
        }
        self.write(|| {
            let mut meta = self.meta(id)?;
            let ov = Override {
                metric_id: metric_id.to_string(),
                element_path: element_path.to_string(),
                justification: justification.to_string(),
                author: author.to_string(),
                created_at: now(),
                revoked: false,
            };
            match meta.overrides.iter_mut().find(|o| !o.revoked && o.metric_id == metric_id && o.element_path == element_path) {
                Some(existing) => *existing = ov.clone(),
                None => meta.overrides.push(ov.clone()),
            }
            self.save_meta(&meta)?;
            Ok(ov)
        })
    }

    pub fn revoke_override(&self, id: &str, metric_id: &str, element_path: &str) -> Result<Override> {
        self.write(|| {
            let mut meta = self.meta(id)?;
            let ov = meta
                .overrides
                .iter_mut()
                .find(|o| !o.revoked && o.metric_id == metric_id && o.element_path == element_path)
                .ok_or_else(|| StoreError::UnknownOverride {
                    metric_id: metric_id.to_string(),
                    element_path: element_path.to_string(),
                })?;
            ov.revoked = true;
            let out = ov.clone();
            self.save_meta(&meta)?;
            Ok(out)
        })
    }

    /// Caches `report` as the entry's latest assessment and records the stage
    /// on the assessed snapshot.
    pub fn save_assessment(&self, report: &AssessmentReport) -> Result<()> {
        self.write(|| {
            let mut meta = self.meta(&report.entry_id)?;
            if let Some(s) = meta.snapshots.iter_mut().find(|s| s.seq_no == report.seq_no) {
                s.stage = Some(report.stage);
            }
            meta.last_assessment = Some(report.clone());
            self.save_meta(&meta)
        })
    }
}
