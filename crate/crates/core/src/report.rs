//! Scan certificates, JSON-lines output and the worker pool.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::angle::{classify_cos, SweepHit};
use crate::error::{Error, Result};
use crate::forms::{self, FormEquation, FormSolution};
use crate::square::SquareRecord;
use crate::triangle::TriangleRecord;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CertificateKind {
    SquareScan,
    TriangleScan,
    ConcordantPair,
    QuarticNorm,
    InnerQuartic,
    AngleSweep,
    Pi2Exclusion,
}

impl CertificateKind {
    pub fn for_equation(equation: FormEquation) -> Self {
        match equation {
            FormEquation::ConcordantPair => CertificateKind::ConcordantPair,
            FormEquation::QuarticNorm => CertificateKind::QuarticNorm,
            FormEquation::InnerQuartic => CertificateKind::InnerQuartic,
            FormEquation::RightAngleSquare => CertificateKind::Pi2Exclusion,
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub enumerated: u64,
    pub exact_hits: u64,
    pub near_misses: u64,
}

/// A record that a bounded search produced a stated hit set.
///
/// `started_at` (seconds since the Unix epoch) and `elapsed_ms` are outside the
/// digest, so re-running a scan reproduces `content_digest` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCertificate {
    pub schema_version: u32,
    pub kind: CertificateKind,
    pub bounds: BTreeMap<String, String>,
    pub counters: Counters,
    pub hits: Vec<Value>,
    pub started_at: u64,
    pub elapsed_ms: u64,
    pub content_digest: String,
}

impl ScanCertificate {
    pub fn new(
        kind: CertificateKind,
        bounds: BTreeMap<String, String>,
        counters: Counters,
        hits: Vec<Value>,
        started_at: SystemTime,
        elapsed: Duration,
    ) -> Self {
        let mut cert = ScanCertificate {
            schema_version: SCHEMA_VERSION,
            kind,
            bounds,
            counters,
            hits,
            started_at: started_at
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            elapsed_ms: elapsed.as_millis().try_into().unwrap_or(u64::MAX),
            content_digest: String::new(),
        };
        cert.content_digest = cert.compute_digest();
        cert
    }

    /// SHA-256 over the compact JSON of the version, kind, bounds, counters and
    /// hits. Object keys are sorted, so the encoding is canonical.
    pub fn compute_digest(&self) -> String {
        let body = json!({
            "schema_version": self.schema_version,
            "kind": self.kind,
            "bounds": self.bounds,
            "counters": self.counters,
            "hits": self.hits,
        });
        let bytes = serde_json::to_vec(&body).expect("certificate body serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn digest_matches(&self) -> bool {
        self.compute_digest() == self.content_digest
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: ScanCertificate =
            serde_json::from_str(text).map_err(|e| Error::CertificateParse(e.to_string()))?;
        if cert.schema_version != SCHEMA_VERSION {
            return Err(Error::CertificateParse(format!(
                "unsupported schema version {}",
                cert.schema_version
            )));
        }
        Ok(cert)
    }

    /// Re-checks every hit through the engine that produced it.
    pub fn hits_revalidate(&self) -> bool {
        self.hits.iter().all(|hit| hit_revalidates(self.kind, hit))
    }
}

fn hit_revalidates(kind: CertificateKind, hit: &Value) -> bool {
    fn parse<T: for<'de> Deserialize<'de>>(hit: &Value) -> Option<T> {
        serde_json::from_value(hit.clone()).ok()
    }
    let form =
        |equation| parse::<FormSolution>(hit).is_some_and(|s| forms::solution_holds(equation, &s));
    match kind {
        CertificateKind::SquareScan => parse::<SquareRecord>(hit).is_some_and(|r| r.revalidate()),
        CertificateKind::TriangleScan => {
            parse::<TriangleRecord>(hit).is_some_and(|r| r.revalidate())
        }
        CertificateKind::ConcordantPair => form(FormEquation::ConcordantPair),
        CertificateKind::QuarticNorm => form(FormEquation::QuarticNorm),
        CertificateKind::InnerQuartic => form(FormEquation::InnerQuartic),
        CertificateKind::Pi2Exclusion => form(FormEquation::RightAngleSquare),
        CertificateKind::AngleSweep => parse::<SweepHit>(hit).is_some_and(|h| {
            h.n >= 1
                && h.m <= 2 * h.n
                && classify_cos(&h.cos)
                    .is_ok_and(|c| c.tag == h.tag && h.tag.cosine() == Some(h.cos.clone()))
                && h.tag.as_pi_fraction().is_some_and(|(num, den)| {
                    h.m * den == num * h.n || h.m * den == (2 * den - num) * h.n
                })
        }),
    }
}

/// `Ok(true)` when the digest matches and every hit re-validates; `Ok(false)`
/// on a mismatch; an error when the file cannot be read or parsed.
pub fn verify_certificate(path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path)?;
    let cert = ScanCertificate::from_json(&text)?;
    Ok(cert.digest_matches() && cert.hits_revalidate())
}

/// Writes one compact JSON object per line.
pub fn write_jsonl<W: Write + ?Sized, T: Serialize>(
    out: &mut W,
    items: impl IntoIterator<Item = T>,
) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, &item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Runs `f` on a dedicated rayon pool of `jobs` threads; `0` uses the rayon
/// default.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
