//! Deterministic gate controller: proximity sensor, camera trigger, barrier,
//! LCD and seven-segment display behind a line-based wire protocol.
//!
//! Inbound grammar: `SENSOR VEHICLE`, `IMAGE <path>`. Outbound: `CAPTURE`,
//! `BARRIER OPEN <ms>`, `LCD <text>`, `SEG7 <amount>`, `RECEIPT <serial>`,
//! `ERR <code>`. The machine runs on injected logical milliseconds; nothing
//! here reads the wall clock, so a scripted scenario replays bit-identically.

use chrono::{DateTime, Duration, Utc};
use platekit_core::config::{GateSettings, Seg7Mode};
use platekit_core::plate_type::PlateType;

use crate::inventory::{record_entry, render_receipt, FixedClock, InventoryError, Journal, Receipt, Tariff};

#[derive(Debug, thiserror::Error)]
pub enum GateError {
    #[error("scenario line {line}: {message}")]
    Script { line: usize, message: String },
    #[error(transparent)]
    Inventory(#[from] InventoryError),
}

/// Gate controller state. Transitions:
/// IDLE -> CAPTURING -> RECOGNIZING -> { BARRIER_OPEN | REJECTED } -> IDLE,
/// with the timed states expiring back to IDLE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateState {
    Idle,
    Capturing,
    Recognizing,
    BarrierOpen { remaining_ms: u64 },
    Rejected { remaining_ms: u64 },
}

/// One inbound or outbound protocol line at a logical time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateEvent {
    pub inbound: bool,
    pub payload: String,
    pub tick: u64,
}

/// Supplies a recognition result for a captured frame. The production
/// implementation wraps the full pipeline; tests use scripted stubs.
pub trait Recognizer {
    fn read_image(&mut self, path: &str) -> Option<(String, PlateType)>;
}

/// Scripted recognizer: a fixed path -> outcome table.
pub struct StubRecognizer {
    outcomes: Vec<(String, Option<(String, PlateType)>)>,
}

impl StubRecognizer {
    pub fn new(outcomes: Vec<(String, Option<(String, PlateType)>)>) -> Self {
        StubRecognizer { outcomes }
    }
}

impl Recognizer for StubRecognizer {
    fn read_image(&mut self, path: &str) -> Option<(String, PlateType)> {
        self.outcomes
            .iter()
            .find(|(p, _)| p == path)
            .and_then(|(_, outcome)| outcome.clone())
    }
}

/// One gate lane: the state machine plus its single-writer journal handle.
pub struct Gate<R: Recognizer> {
    state: GateState,
    settings: GateSettings,
    tariff: Tariff,
    journal: Journal,
    recognizer: R,
    /// Logical epoch; record timestamps are `base_time + tick`.
    base_time: DateTime<Utc>,
    tick: u64,
    next_serial: u64,
    entries_today: u64,
    receipts: Vec<Receipt>,
}

impl<R: Recognizer> Gate<R> {
    pub fn new(
        recognizer: R,
        journal: Journal,
        tariff: Tariff,
        settings: GateSettings,
        base_time: DateTime<Utc>,
    ) -> Self {
        Gate {
            state: GateState::Idle,
            settings,
            tariff,
            journal,
            recognizer,
            base_time,
            tick: 0,
            next_serial: 1,
            entries_today: 0,
            receipts: Vec::new(),
        }
    }

    pub fn state(&self) -> GateState {
        self.state
    }

    pub fn receipts(&self) -> &[Receipt] {
        &self.receipts
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Advance logical time; timed states expire back to IDLE.
    pub fn advance_to(&mut self, tick: u64) {
        assert!(tick >= self.tick, "logical time cannot run backwards");
        let elapsed = tick - self.tick;
        self.tick = tick;
        self.state = match self.state {
            GateState::BarrierOpen { remaining_ms } => {
                if elapsed >= remaining_ms {
                    GateState::Idle
                } else {
                    GateState::BarrierOpen { remaining_ms: remaining_ms - elapsed }
                }
            }
            GateState::Rejected { remaining_ms } => {
                if elapsed >= remaining_ms {
                    GateState::Idle
                } else {
                    GateState::Rejected { remaining_ms: remaining_ms - elapsed }
                }
            }
            other => other,
        };
    }

    /// Process one inbound protocol line at the current tick.
    pub fn handle_line(&mut self, line: &str) -> Result<Vec<String>, GateError> {
        if line == "SENSOR VEHICLE" {
            return Ok(self.on_sensor());
        }
        if let Some(path) = line.strip_prefix("IMAGE ") {
            return self.on_image(path);
        }
        Ok(vec![format!("ERR protocol")])
    }

    fn on_sensor(&mut self) -> Vec<String> {
        match self.state {
            GateState::Idle => {
                self.state = GateState::Capturing;
                vec!["CAPTURE".to_string()]
            }
            // one vehicle at a time; anything mid-cycle is ignored with a
            // diagnostic line
            _ => vec!["ERR busy".to_string()],
        }
    }

    fn on_image(&mut self, path: &str) -> Result<Vec<String>, GateError> {
        if self.state != GateState::Capturing {
            return Ok(vec!["ERR unexpected".to_string()]);
        }
        self.state = GateState::Recognizing;
        let outcome = self
            .recognizer
            .read_image(path)
            .filter(|(text, _)| !text.is_empty());
        match outcome {
            Some((text, plate_type)) => {
                let clock = FixedClock(self.base_time + Duration::milliseconds(self.tick as i64));
                let record = record_entry(&text, plate_type, &self.tariff, &clock)?;
                self.journal.append(&record)?;
                let serial = self.next_serial;
                self.next_serial += 1;
                self.entries_today += 1;
                let receipt = render_receipt(&record, serial);
                let seg7 = match self.settings.seg7 {
                    Seg7Mode::Cost => record.cost.to_string(),
                    Seg7Mode::DailyCount => self.entries_today.to_string(),
                };
                self.receipts.push(receipt);
                self.state = GateState::BarrierOpen { remaining_ms: self.settings.open_ms };
                Ok(vec![
                    format!("BARRIER OPEN {}", self.settings.open_ms),
                    "LCD You Have Permission to go".to_string(),
                    format!("SEG7 {seg7}"),
                    format!("RECEIPT {serial}"),
                ])
            }
            None => {
                self.state = GateState::Rejected { remaining_ms: self.settings.cooldown_ms };
                Ok(vec!["LCD Recognition Failed".to_string()])
            }
        }
    }

    /// Run a scenario script: one inbound event per line, led by its tick
    /// (`<tick> <payload>`). Returns the outbound transcript in the same
    /// tick-prefixed format.
    pub fn run_script(&mut self, script: &str) -> Result<String, GateError> {
        let mut transcript = String::new();
        for (i, raw) in script.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tick_text, payload) = line.split_once(' ').ok_or(GateError::Script {
                line: line_no,
                message: "expected `<tick> <payload>`".into(),
            })?;
            let tick: u64 = tick_text.parse().map_err(|_| GateError::Script {
                line: line_no,
                message: format!("bad tick {tick_text:?}"),
            })?;
            if tick < self.tick {
                return Err(GateError::Script {
                    line: line_no,
                    message: format!("tick {tick} goes backwards (now {})", self.tick),
                });
            }
            self.advance_to(tick);
            for out in self.handle_line(payload)? {
                transcript.push_str(&format!("{tick} {out}\n"));
            }
        }
        Ok(transcript)
    }
}
