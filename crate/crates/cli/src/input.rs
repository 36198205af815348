//! Input documents: series-level module definitions (JSON or TOML) and
//! finite-level objects (JSON with a "kind" field).

use phigamma::error::{Error, Result};
use phigamma::finite_level::{FiniteDoc, FiniteObject};
use phigamma::phigamma::schema::ModuleDoc;
use phigamma::phigamma::EtalePhiGammaModule;
use std::path::Path;

pub enum Input {
    Series(EtalePhiGammaModule),
    Finite(FiniteObject),
}

fn is_finite(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("kind").cloned())
        .is_some()
}

pub fn load(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Input> {
    if is_finite(text) {
        let doc = FiniteDoc::from_json(text)?;
        Ok(Input::Finite(doc.to_object()?))
    } else {
        let doc = ModuleDoc::from_text(text)?;
        Ok(Input::Series(doc.to_module()?))
    }
}
