//! The stages chained together: parse, bound, ground, expand, check, emit.

use std::path::Path;

use crate::checker::{check, Verdict};
use crate::error::Error;
use crate::expand::{expand, AtBound, KripkeStructure};
use crate::frontend::{parse_source, Diagnostic, Document, SourceFile, SourceKind};
use crate::ground::ground_mfstl;
use crate::logic::{bound_profile, BoundProfile, MfstlFormula};
use crate::ltl::LtlFormula;
use crate::model::Sps;
use crate::smv::{emit_smv, SmvDocument};

/// A parsed input. `.mfstl` files take their model from `model` when given.
#[derive(Debug, Clone)]
pub struct Input {
    pub doc: Document,
}

impl Input {
    pub fn load(path: &Path, model: Option<&Path>) -> Result<Input, Error> {
        let src = SourceFile::read(path).map_err(Error::Io)?;
        let sps = match model {
            None => None,
            Some(m) => {
                let msrc = SourceFile::read(m).map_err(Error::Io)?;
                if msrc.kind != SourceKind::Model {
                    return Err(Error::Usage(format!(
                        "{}: --model expects a .sps file",
                        m.display()
                    )));
                }
                parse_source(&msrc, None)?.sps
            }
        };
        Input::from_source(&src, sps.as_ref())
    }

    pub fn from_source(src: &SourceFile, model: Option<&Sps>) -> Result<Input, Error> {
        Ok(Input {
            doc: parse_source(src, model)?,
        })
    }

    pub fn from_text(text: &str, kind: SourceKind, model: Option<&Sps>) -> Result<Input, Error> {
        let src = SourceFile {
            path: Default::default(),
            text: text.to_string(),
            kind,
        };
        Input::from_source(&src, model)
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.doc.warnings
    }

    pub fn sps(&self) -> Result<&Sps, Error> {
        self.doc.sps.as_ref().ok_or_else(|| {
            Error::Usage("no server system given: use a .sps or .spsml file, or pass --model".into())
        })
    }

    pub fn spec(&self) -> Result<&MfstlFormula, Error> {
        self.doc
            .spec
            .as_ref()
            .ok_or_else(|| Error::Usage("no specification given: use a .mfstl or .spsml file".into()))
    }

    pub fn bounds(&self) -> Result<BoundProfile, Error> {
        Ok(bound_profile(self.spec()?, &self.doc.alphabet))
    }

    pub fn ground(&self) -> Result<(BoundProfile, LtlFormula), Error> {
        let bounds = self.bounds()?;
        let ltl = ground_mfstl(self.spec()?, &bounds)?;
        Ok((bounds, ltl))
    }

    pub fn check(&self, at_bound: AtBound) -> Result<CheckReport, Error> {
        let (bounds, ltl) = self.ground()?;
        let kripke = expand(self.sps()?, &bounds, at_bound)?;
        let verdict = check(&kripke, &ltl)?;
        Ok(CheckReport {
            bounds,
            ltl,
            kripke,
            verdict,
        })
    }

    pub fn expand(&self, at_bound: AtBound) -> Result<KripkeStructure, Error> {
        let bounds = self.bounds()?;
        Ok(expand(self.sps()?, &bounds, at_bound)?)
    }

    pub fn emit_smv(&self) -> Result<SmvDocument, Error> {
        let (bounds, ltl) = self.ground()?;
        Ok(emit_smv(self.sps()?, &bounds, &ltl)?)
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub bounds: BoundProfile,
    pub ltl: LtlFormula,
    pub kripke: KripkeStructure,
    pub verdict: Verdict,
}
