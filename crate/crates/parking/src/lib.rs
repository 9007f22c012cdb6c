//! Parking inventory service: entrance charging by plate type, append-only
//! journal persistence, receipts, range reports, and the simulated gate
//! controller with its line-based wire protocol.

pub mod gatesim;
pub mod inventory;

pub use gatesim::{Gate, GateError, GateState, Recognizer, StubRecognizer};
pub use inventory::{
    read_all, record_entry, render_receipt, report, Clock, FixedClock, InventoryError, Journal,
    Money, ParkingRecord, Receipt, SystemClock, Tariff,
};
