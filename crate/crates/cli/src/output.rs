use clap::ValueEnum;
use serde_json::Value;

use rccs_core::rational::{approx, to_fraction_string};
use rccs_core::Rational;

use crate::error::exit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    /// Graphviz, for `graph` only.
    Dot,
}

/// What a command produced, in every format it supports, and how to exit.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub text: String,
    pub dot: Option<String>,
    pub status: u8,
}

impl Report {
    pub fn new(json: Value, text: String) -> Report {
        Report {
            json,
            text,
            dot: None,
            status: exit::SUCCESS,
        }
    }

    pub fn with_status(mut self, status: u8) -> Report {
        self.status = status;
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("report serializes"),
            Format::Text => self.text.trim_end().to_string(),
            Format::Dot => self.dot.clone().unwrap_or_default().trim_end().to_string(),
        }
    }
}

pub fn fraction(r: &Rational) -> String {
    to_fraction_string(r)
}

/// `num/den` followed by a decimal marked as approximate.
pub fn human(r: &Rational) -> String {
    format!("{} (~{} approx.)", to_fraction_string(r), approx(r))
}
