//! Term and distribution arguments: a file path, `-` for stdin, or inline text.

use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;

use rccs_core::distribution::{Dist, DistJson, Partition};
use rccs_core::syntax::{parse, Mode, Term};

use crate::error::{CliError, Result};

/// Where an argument's text came from, for error messages.
fn read_source(arg: &str) -> Result<(String, String)> {
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
        return Ok(("<stdin>".into(), text));
    }
    if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|source| CliError::Io { path: arg.into(), source })?;
        return Ok((arg.into(), text));
    }
    Ok(("<inline>".into(), arg.to_string()))
}

fn from_json<T: DeserializeOwned>(origin: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json { path: origin.into(), source })
}

pub enum Input {
    Term(Term),
    Dist(Dist),
}

impl Input {
    pub fn into_dist(self) -> Result<Dist> {
        match self {
            Input::Term(t) => Ok(Dist::dirac(t)?),
            Input::Dist(mu) => Ok(mu),
        }
    }

    pub fn into_term(self) -> Result<Term> {
        match self {
            Input::Term(t) => Ok(t),
            Input::Dist(mu) => match mu.is_dirac() {
                Some(t) => Ok(t.clone()),
                None => Err(CliError::Usage("expected a single term, got a distribution".into())),
            },
        }
    }
}

/// A term, or a distribution when the text is a `{"dist": [...]}` object.
pub fn load(arg: &str, mode: Mode) -> Result<Input> {
    let (origin, text) = read_source(arg)?;
    let text = text.trim();
    if text.starts_with('{') {
        let json: DistJson = from_json(&origin, text)?;
        let mu = Dist::from_json(&json)?;
        if mode == Mode::Process {
            if let Some(t) = mu.support().find(|t| t.contains_omega()) {
                return Err(CliError::Usage(format!("`{t}` uses omega; pass --observer to allow it")));
            }
        }
        return Ok(Input::Dist(mu));
    }
    Ok(Input::Term(parse(text, mode)?))
}

pub fn load_term(arg: &str, mode: Mode) -> Result<Term> {
    load(arg, mode)?.into_term()
}

#[derive(serde::Deserialize)]
struct PartitionJson {
    blocks: Vec<Vec<String>>,
}

/// A partition file `{"blocks": [["P", "Q"], ["a"]]}`.
pub fn load_partition(arg: &str) -> Result<Partition> {
    let (origin, text) = read_source(arg)?;
    let json: PartitionJson = from_json(&origin, &text)?;
    let blocks = json
        .blocks
        .iter()
        .map(|b| b.iter().map(|s| parse(s, Mode::Process)).collect::<rccs_core::Result<Vec<_>>>())
        .collect::<rccs_core::Result<Vec<_>>>()?;
    Ok(Partition::new(blocks)?)
}
