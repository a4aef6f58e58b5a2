//! Diagnostics: every failure becomes one JSON object on stderr.

use std::fmt::Display;

use folsurf_core::blowup::BlowupError;
use folsurf_core::dualgraph::GraphError;
use folsurf_core::germ::GermError;
use folsurf_core::lattice::LatticeError;
use folsurf_core::localindex::IndexError;
use folsurf_core::numerics::NumericsError;
use folsurf_core::quotsing::QuotError;
use folsurf_core::scalar::ScalarError;
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// Valid input on which the computation is undefined or fails.
    Domain,
    /// Malformed input: syntax, files, flags.
    Input,
}

#[derive(Debug)]
pub struct Failure {
    pub severity: Severity,
    pub module: &'static str,
    pub kind: String,
    pub message: String,
    /// Output still worth printing, e.g. a corpus with some failed germs.
    pub partial: Option<String>,
}

impl Failure {
    pub fn input(module: &'static str, kind: &str, message: impl Display) -> Self {
        Failure {
            severity: Severity::Input,
            module,
            kind: kind.into(),
            message: message.to_string(),
            partial: None,
        }
    }

    pub fn domain(module: &'static str, kind: &str, message: impl Display) -> Self {
        Failure {
            severity: Severity::Domain,
            ..Failure::input(module, kind, message)
        }
    }

    pub fn usage(message: String) -> Self {
        Failure::input("cli", "usage", message.trim_end())
    }

    pub fn exit_code(&self) -> u8 {
        match self.severity {
            Severity::Domain => 1,
            Severity::Input => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "module": self.module,
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.exit_code(),
            }
        })
    }

    pub fn report(&self) {
        eprintln!("{}", self.to_json());
    }
}

/// Variant name of an error enum value, from its `Debug` form.
fn variant<E: std::fmt::Debug>(e: &E) -> String {
    let d = format!("{e:?}");
    let end = d.find(['(', ' ', '{']).unwrap_or(d.len());
    let mut out = String::new();
    for (i, ch) in d[..end].chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

impl From<GermError> for Failure {
    fn from(e: GermError) -> Self {
        match e {
            GermError::Syntax { .. } | GermError::DegreeCapExceeded { .. } => {
                Failure::input("germ", &variant(&e), &e)
            }
            _ => Failure::domain("germ", &variant(&e), &e),
        }
    }
}

impl From<IndexError> for Failure {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::BadBranch(_) => Failure::input("localindex", &variant(&e), &e),
            _ => Failure::domain("localindex", &variant(&e), &e),
        }
    }
}

impl From<BlowupError> for Failure {
    fn from(e: BlowupError) -> Self {
        match e {
            BlowupError::Index(i) => i.into(),
            BlowupError::Lattice(l) => l.into(),
            BlowupError::Graph(g) => g.into(),
            BlowupError::BadDepth => Failure::input("blowup", "bad_depth", &e),
            _ => Failure::domain("blowup", &variant(&e), &e),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::DuplicateId(_)
            | GraphError::UnknownNode(_)
            | GraphError::BadMultiplicity { .. } => Failure::input("dualgraph", &variant(&e), &e),
            _ => Failure::domain("dualgraph", &variant(&e), &e),
        }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::NotSquare
            | LatticeError::NotSymmetric
            | LatticeError::BadEntry(..)
            | LatticeError::RankMismatch { .. }
            | LatticeError::RegimeViolation => Failure::input("lattice", &variant(&e), &e),
            _ => Failure::domain("lattice", &variant(&e), &e),
        }
    }
}

impl From<QuotError> for Failure {
    fn from(e: QuotError) -> Self {
        match e {
            QuotError::BadType { .. } => Failure::input("quotsing", "bad_type", &e),
            QuotError::Graph(g) => g.into(),
            QuotError::Index(i) => i.into(),
        }
    }
}

impl From<NumericsError> for Failure {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::BadSheet(_)
            | NumericsError::NegativeM(_)
            | NumericsError::InsufficientSamples(_) => Failure::input("numerics", &variant(&e), &e),
            _ => Failure::domain("numerics", &variant(&e), &e),
        }
    }
}

impl From<ScalarError> for Failure {
    fn from(e: ScalarError) -> Self {
        Failure::input("scalar", &variant(&e), &e)
    }
}
