use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, Row};

use super::{evidence_hash, KbEntry};
use crate::absa::SpecificityLabel;
use crate::corpus::normalize_rrid;
use crate::error::{Error, Result};

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS kb_entries (
    rrid TEXT NOT NULL,
    article_id TEXT NOT NULL,
    evidence_hash TEXT NOT NULL,
    specificity INTEGER NOT NULL CHECK (specificity IN (0, 2)),
    evidence TEXT NOT NULL,
    prob_nonspecific REAL NOT NULL,
    prob_neutral REAL NOT NULL,
    prob_specific REAL NOT NULL,
    link_score REAL NOT NULL,
    created_at TEXT NOT NULL,
    PRIMARY KEY (rrid, article_id, evidence_hash)
);
";

const COLUMNS: &str = "rrid, article_id, specificity, evidence, prob_nonspecific, prob_neutral, \
                       prob_specific, link_score, created_at";

/// Single-file evidence store. One writer at a time; readers may share the file.
pub struct KbStore {
    conn: Connection,
}

fn row_to_entry(row: &Row<'_>) -> rusqlite::Result<KbEntry> {
    let label: i64 = row.get(2)?;
    let created: String = row.get(8)?;
    let created_at = DateTime::parse_from_rfc3339(&created)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| rusqlite::Error::FromSqlConversionFailure(8, rusqlite::types::Type::Text, Box::new(e)))?;
    Ok(KbEntry {
        rrid: row.get(0)?,
        article_id: row.get(1)?,
        specificity: SpecificityLabel::from_index(label as usize).unwrap_or(SpecificityLabel::Neutral),
        evidence: row.get(3)?,
        specificity_probs: [row.get(4)?, row.get(5)?, row.get(6)?],
        link_score: row.get(7)?,
        created_at,
    })
}

impl KbStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        Self::init(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.execute_batch(SCHEMA)?;
        Ok(KbStore { conn })
    }

    /// Inserts entries not yet present under their key and returns how many
    /// were new. Neutral entries are never stored.
    pub fn insert(&mut self, entries: &[KbEntry]) -> Result<usize> {
        for e in entries {
            if normalize_rrid(&e.rrid) != Some(e.rrid.as_str()) {
                return Err(Error::MalformedRrid(e.rrid.clone()));
            }
        }
        let tx = self.conn.transaction()?;
        let mut inserted = 0;
        {
            let mut stmt = tx.prepare(
                "INSERT OR IGNORE INTO kb_entries (rrid, article_id, evidence_hash, specificity, evidence, \
                 prob_nonspecific, prob_neutral, prob_specific, link_score, created_at) \
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)",
            )?;
            for e in entries {
                if e.specificity == SpecificityLabel::Neutral {
                    log::warn!("not storing neutral statement for {}", e.rrid);
                    continue;
                }
                inserted += stmt.execute(params![
                    e.rrid,
                    e.article_id,
                    evidence_hash(&e.evidence),
                    e.specificity.index() as i64,
                    e.evidence,
                    e.specificity_probs[0],
                    e.specificity_probs[1],
                    e.specificity_probs[2],
                    e.link_score,
                    e.created_at.to_rfc3339(),
                ])?;
            }
        }
        tx.commit()?;
        Ok(inserted)
    }

    /// All statements about `rrid` (`AB_…` or `RRID:AB_…`), nonspecific first.
    pub fn query(&self, rrid: &str) -> Result<Vec<KbEntry>> {
        let bare = normalize_rrid(rrid).ok_or_else(|| Error::MalformedRrid(rrid.to_string()))?;
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {COLUMNS} FROM kb_entries WHERE rrid = ?1 \
             ORDER BY specificity, article_id, evidence_hash"
        ))?;
        let rows = stmt.query_map([bare], row_to_entry)?;
        Ok(rows.collect::<rusqlite::Result<Vec<_>>>()?)
    }

    pub fn all(&self) -> Result<Vec<KbEntry>> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {COLUMNS} FROM kb_entries ORDER BY rrid, specificity, article_id, evidence_hash"
        ))?;
        let rows = stmt.query_map([], row_to_entry)?;
        Ok(rows.collect::<rusqlite::Result<Vec<_>>>()?)
    }

    pub fn len(&self) -> Result<usize> {
        let n: i64 = self.conn.query_row("SELECT COUNT(*) FROM kb_entries", [], |r| r.get(0))?;
        Ok(n as usize)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    /// Writes every entry as one JSON object per line.
    pub fn export_jsonl(&self, mut out: impl Write) -> Result<usize> {
        let entries = self.all()?;
        for e in &entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(entries.len())
    }
}

pub fn store_entries(entries: &[KbEntry], store: &mut KbStore) -> Result<usize> {
    store.insert(entries)
}

pub fn query_kb(store: &KbStore, rrid: &str) -> Result<Vec<KbEntry>> {
    store.query(rrid)
}
