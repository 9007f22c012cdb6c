//! Parking business layer: entrance charging, the append-only journal,
//! receipts and range reports.
//!
//! Money is integer minor units end to end; timestamps are UTC with second
//! precision and always come from an injected clock, never read directly
//! from the wall.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use platekit_core::config::TariffSettings;
use platekit_core::plate_type::PlateType;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum InventoryError {
    #[error("reading rejected: empty plate text")]
    RejectedReading,
    #[error("plate text {0:?} contains characters the journal cannot store")]
    BadPlateText(String),
    #[error("journal corrupt at line {line}: {message}")]
    JournalCorrupt { line: usize, message: String },
    #[error("invalid report range: from is after to")]
    InvalidRange,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Currency in integer minor units; rendered with two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Money(pub u64);

impl Money {
    pub fn parse(s: &str) -> Option<Money> {
        platekit_core::config::parse_money_minor(s).map(Money)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", platekit_core::config::format_money_minor(self.0))
    }
}

/// Entrance cost per plate type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tariff {
    pub private: Money,
    pub public: Money,
    pub government: Money,
}

impl Tariff {
    pub fn from_settings(s: &TariffSettings) -> Tariff {
        Tariff {
            private: Money(s.private_minor),
            public: Money(s.public_minor),
            government: Money(s.government_minor),
        }
    }

    pub fn cost_for(&self, plate_type: PlateType) -> Money {
        match plate_type {
            PlateType::White => self.private,
            PlateType::Yellow => self.public,
            PlateType::Red => self.government,
        }
    }
}

/// Injected time source so every record is reproducible under test.
pub trait Clock {
    fn now_utc(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_utc(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Fixed instant; handy for tests and for logical-time simulation.
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now_utc(&self) -> DateTime<Utc> {
        self.0
    }
}

/// One parking entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParkingRecord {
    pub plate_text: String,
    pub plate_type: PlateType,
    /// UTC, second precision.
    #[serde(serialize_with = "serialize_rfc3339")]
    pub timestamp: DateTime<Utc>,
    pub cost: Money,
}

fn serialize_rfc3339<S: serde::Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
}

/// Charge an entrance by tariff and stamp it with the injected clock.
/// Re-entry of the same plate is allowed; records are append-only.
pub fn record_entry(
    plate_text: &str,
    plate_type: PlateType,
    tariff: &Tariff,
    clock: &dyn Clock,
) -> Result<ParkingRecord, InventoryError> {
    if plate_text.is_empty() {
        return Err(InventoryError::RejectedReading);
    }
    if plate_text.contains('|') || plate_text.chars().any(|c| c.is_control()) {
        return Err(InventoryError::BadPlateText(plate_text.to_string()));
    }
    let now = clock.now_utc();
    let truncated = now - chrono::Duration::nanoseconds(i64::from(now.timestamp_subsec_nanos()));
    Ok(ParkingRecord {
        plate_text: plate_text.to_string(),
        plate_type,
        timestamp: truncated,
        cost: tariff.cost_for(plate_type),
    })
}

fn record_line(r: &ParkingRecord) -> String {
    format!(
        "v1|{}|{}|{}|{}\n",
        r.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
        r.plate_text,
        r.plate_type,
        r.cost
    )
}

/// Append-only journal writer; one instance owns the file handle, which is
/// the single-writer role the service relies on.
pub struct Journal {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl Journal {
    pub fn open(path: impl AsRef<Path>) -> Result<Journal, InventoryError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Journal {
            path,
            writer: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &ParkingRecord) -> Result<(), InventoryError> {
        if record.plate_text.is_empty() {
            return Err(InventoryError::RejectedReading);
        }
        if record.plate_text.contains('|') || record.plate_text.chars().any(|c| c.is_control()) {
            return Err(InventoryError::BadPlateText(record.plate_text.clone()));
        }
        self.writer.write_all(record_line(record).as_bytes())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Read every record in write order. Any malformed line aborts with its
/// 1-based line number.
pub fn read_all(path: impl AsRef<Path>) -> Result<Vec<ParkingRecord>, InventoryError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let corrupt = |message: &str| InventoryError::JournalCorrupt {
            line: line_no,
            message: message.to_string(),
        };
        let mut fields = line.split('|');
        let version = fields.next().ok_or_else(|| corrupt("empty line"))?;
        if version != "v1" {
            return Err(corrupt(&format!("unknown record version {version:?}")));
        }
        let ts = fields.next().ok_or_else(|| corrupt("missing timestamp"))?;
        let timestamp = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| corrupt(&format!("bad timestamp: {e}")))?
            .with_timezone(&Utc);
        let plate_text = fields.next().ok_or_else(|| corrupt("missing plate text"))?;
        if plate_text.is_empty() {
            return Err(corrupt("empty plate text"));
        }
        let type_field = fields.next().ok_or_else(|| corrupt("missing plate type"))?;
        let plate_type =
            PlateType::parse(type_field).ok_or_else(|| corrupt(&format!("bad plate type {type_field:?}")))?;
        let cost_field = fields.next().ok_or_else(|| corrupt("missing cost"))?;
        let cost = Money::parse(cost_field).ok_or_else(|| corrupt(&format!("bad cost {cost_field:?}")))?;
        if fields.next().is_some() {
            return Err(corrupt("trailing fields"));
        }
        out.push(ParkingRecord {
            plate_text: plate_text.to_string(),
            plate_type,
            timestamp,
            cost,
        });
    }
    Ok(out)
}

/// A rendered entrance receipt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub record: ParkingRecord,
    pub serial: u64,
    pub rendered: String,
}

/// Fixed template, LF line endings. Serial management is the caller's.
pub fn render_receipt(record: &ParkingRecord, serial: u64) -> Receipt {
    let rendered = format!(
        "=== PARKING ENTRY RECEIPT ===\n\
         serial: {:06}\n\
         time:   {}\n\
         plate:  {}\n\
         type:   {} ({})\n\
         cost:   {}\n\
         =============================\n",
        serial,
        record.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
        record.plate_text,
        record.plate_type,
        record.plate_type.category(),
        record.cost
    );
    Receipt {
        record: record.clone(),
        serial,
        rendered,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub plate_type: PlateType,
    pub entries: usize,
    pub revenue: Money,
}

/// Counts and revenue per plate type over an inclusive time range.
#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub from: Option<String>,
    pub to: Option<String>,
    pub rows: Vec<ReportRow>,
    pub total_entries: usize,
    pub total_revenue: Money,
}

impl ReportSummary {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("type        entries  revenue\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:<10}  {:>7}  {:>7}\n",
                format!("{} ({})", row.plate_type, row.plate_type.category()),
                row.entries,
                row.revenue.to_string()
            ));
        }
        out.push_str(&format!(
            "total       {:>7}  {:>7}\n",
            self.total_entries,
            self.total_revenue.to_string()
        ));
        out
    }
}

/// Summarize journal records within `[from, to]`; `None` bounds are open.
pub fn report(
    records: &[ParkingRecord],
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
) -> Result<ReportSummary, InventoryError> {
    if let (Some(f), Some(t)) = (from, to) {
        if f > t {
            return Err(InventoryError::InvalidRange);
        }
    }
    let mut rows: Vec<ReportRow> = [PlateType::Red, PlateType::Yellow, PlateType::White]
        .into_iter()
        .map(|t| ReportRow {
            plate_type: t,
            entries: 0,
            revenue: Money(0),
        })
        .collect();
    let mut total_entries = 0usize;
    let mut total_revenue = 0u64;
    for r in records {
        if from.map(|f| r.timestamp < f).unwrap_or(false) || to.map(|t| r.timestamp > t).unwrap_or(false) {
            continue;
        }
        let row = rows
            .iter_mut()
            .find(|row| row.plate_type == r.plate_type)
            .expect("all three types are present");
        row.entries += 1;
        row.revenue = Money(row.revenue.0 + r.cost.0);
        total_entries += 1;
        total_revenue += r.cost.0;
    }
    Ok(ReportSummary {
        from: from.map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true)),
        to: to.map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true)),
        rows,
        total_entries,
        total_revenue: Money(total_revenue),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
    }

    fn tariff() -> Tariff {
        Tariff {
            private: Money(100),
            public: Money(200),
            government: Money(0),
        }
    }

    fn sample(plate: &str, ty: PlateType, secs: i64) -> ParkingRecord {
        record_entry(plate, ty, &tariff(), &FixedClock(t(secs))).unwrap()
    }

    #[test]
    fn cost_comes_from_the_tariff_table() {
        let r = sample("12A34", PlateType::Yellow, 0);
        assert_eq!(r.cost, Money(200));
        assert_eq!(sample("12A34", PlateType::Red, 0).cost, Money(0));
        assert_eq!(sample("12A34", PlateType::White, 0).cost, Money(100));
    }

    #[test]
    fn empty_text_is_rejected() {
        assert!(matches!(
            record_entry("", PlateType::Red, &tariff(), &FixedClock(t(0))),
            Err(InventoryError::RejectedReading)
        ));
    }

    #[test]
    fn reentry_creates_distinct_records() {
        let a = sample("77X7777", PlateType::White, 0);
        let b = sample("77X7777", PlateType::White, 60);
        assert_ne!(a, b);
        assert_eq!(a.plate_text, b.plate_text);
    }

    #[test]
    fn record_entry_is_pure_given_inputs() {
        let a = sample("12A34", PlateType::Yellow, 5);
        let b = sample("12A34", PlateType::Yellow, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn journal_round_trips_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.log");
        let records = vec![
            sample("11AAA11", PlateType::White, 0),
            sample("22BBB22", PlateType::Yellow, 10),
            sample("33CCC33", PlateType::Red, 20),
        ];
        let mut journal = Journal::open(&path).unwrap();
        for r in &records {
            journal.append(r).unwrap();
        }
        drop(journal);
        assert_eq!(read_all(&path).unwrap(), records);
    }

    #[test]
    fn empty_journal_reads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.log");
        Journal::open(&path).unwrap();
        assert_eq!(read_all(&path).unwrap(), Vec::new());
    }

    #[test]
    fn corrupt_line_reports_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.log");
        let good = record_line(&sample("11AAA11", PlateType::White, 0));
        std::fs::write(&path, format!("{good}v1|garbage\n")).unwrap();
        match read_all(&path) {
            Err(InventoryError::JournalCorrupt { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected corrupt error, got {other:?}"),
        }
    }

    #[test]
    fn pipe_in_plate_text_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let mut journal = Journal::open(dir.path().join("j.log")).unwrap();
        let mut r = sample("OK1", PlateType::White, 0);
        r.plate_text = "BAD|TEXT".into();
        assert!(matches!(
            journal.append(&r),
            Err(InventoryError::BadPlateText(_))
        ));
    }

    #[test]
    fn receipt_contains_every_invariant_field() {
        let r = sample("45T678", PlateType::Yellow, 30);
        let receipt = render_receipt(&r, 42);
        for needle in ["45T678", "Yellow", "000042", "2.00", "T"] {
            assert!(receipt.rendered.contains(needle), "missing {needle}");
        }
        assert!(receipt.rendered.contains(&r.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true)));
        assert!(!receipt.rendered.contains('\r'));
    }

    #[test]
    fn consecutive_serials_differ_by_one() {
        let r = sample("45T678", PlateType::Yellow, 0);
        let a = render_receipt(&r, 7);
        let b = render_receipt(&r, 8);
        assert_eq!(b.serial - a.serial, 1);
    }

    #[test]
    fn report_filters_by_range_and_matches_oracle() {
        let records = vec![
            sample("A1", PlateType::White, 0),
            sample("A2", PlateType::Yellow, 100),
            sample("A3", PlateType::Yellow, 200),
            sample("A4", PlateType::Red, 300),
            sample("A5", PlateType::White, 400),
        ];
        let summary = report(&records, Some(t(50)), Some(t(350))).unwrap();
        assert_eq!(summary.total_entries, 3);

        // brute-force filter+sum oracle
        let expected: u64 = records
            .iter()
            .filter(|r| r.timestamp >= t(50) && r.timestamp <= t(350))
            .map(|r| r.cost.0)
            .sum();
        assert_eq!(summary.total_revenue, Money(expected));
        let yellow = summary.rows.iter().find(|r| r.plate_type == PlateType::Yellow).unwrap();
        assert_eq!(yellow.entries, 2);
        assert_eq!(yellow.revenue, Money(400));
    }

    #[test]
    fn report_rejects_inverted_range() {
        assert!(matches!(
            report(&[], Some(t(10)), Some(t(0))),
            Err(InventoryError::InvalidRange)
        ));
    }

    #[test]
    fn report_on_empty_range_is_all_zero() {
        let records = vec![sample("A1", PlateType::White, 0)];
        let summary = report(&records, Some(t(1000)), Some(t(2000))).unwrap();
        assert_eq!(summary.total_entries, 0);
        assert_eq!(summary.total_revenue, Money(0));
    }
}
