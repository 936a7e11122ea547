//! Command results and their text, JSON and CSV renderings.

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Everything a command produced. `code` is the process exit code.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub code: u8,
    /// Diagnostics for the error stream, printed in every format.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(text: String, json: Value) -> Self {
        Self {
            text,
            json,
            header: Vec::new(),
            rows: Vec::new(),
            code: 0,
            notes: Vec::new(),
        }
    }

    pub fn table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn fail_if(mut self, failed: bool) -> Self {
        if failed {
            self.code = 1;
        }
        self
    }

    pub fn note(mut self, msg: String) -> Self {
        self.notes.push(msg);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut s = self.text.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                if !self.header.is_empty() {
                    w.write_record(&self.header).expect("in-memory write");
                }
                for r in &self.rows {
                    w.write_record(r).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
            }
        }
    }
}
