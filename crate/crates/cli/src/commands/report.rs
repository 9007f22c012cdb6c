use std::path::Path;

use anyhow::Result;
use chrono::{DateTime, Utc};
use platekit_parking::inventory::{read_all, report, InventoryError};

use super::usage_error;

fn parse_bound(text: Option<&str>, name: &str) -> Result<Option<DateTime<Utc>>, String> {
    match text {
        None => Ok(None),
        Some(t) => DateTime::parse_from_rfc3339(t)
            .map(|d| Some(d.with_timezone(&Utc)))
            .map_err(|e| format!("--{name} {t:?}: {e}")),
    }
}

pub fn run(journal: &Path, from: Option<&str>, to: Option<&str>, json: bool) -> Result<u8> {
    let from = match parse_bound(from, "from") {
        Ok(b) => b,
        Err(e) => return usage_error(e),
    };
    let to = match parse_bound(to, "to") {
        Ok(b) => b,
        Err(e) => return usage_error(e),
    };
    let records = match read_all(journal) {
        Ok(r) => r,
        Err(e @ InventoryError::Io(_)) => return usage_error(format!("{}: {e}", journal.display())),
        Err(e) => return Err(e.into()),
    };
    let summary = match report(&records, from, to) {
        Ok(s) => s,
        Err(InventoryError::InvalidRange) => return usage_error("--from is after --to"),
        Err(e) => return Err(e.into()),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print!("{}", summary.render_table());
    }
    Ok(0)
}
