//! Reading measures from JSON files.

use std::path::Path;

use wlab_core::measure::{validate_measure, DiscreteMeasure, RawMeasure};

use crate::error::{io_err, parse_err, CliError, CliResult};

/// Masses further than this from 1 are reported when renormalized.
const RENORM_WARN: f64 = 1e-14;

#[derive(Debug)]
pub struct Loaded {
    pub measures: Vec<DiscreteMeasure>,
    pub warnings: Vec<String>,
}

/// Reads one measure object or an array of them, in the
/// `{"dim", "support", "weights"}` form.
pub fn load_measures(path: &Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_measures(&text, path)
}

pub fn parse_measures(text: &str, path: &Path) -> CliResult<Loaded> {
    let raws: Vec<RawMeasure> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(parse_err(path))?
    } else {
        vec![serde_json::from_str(text).map_err(parse_err(path))?]
    };
    let mut measures = Vec::with_capacity(raws.len());
    let mut warnings = Vec::new();
    for (index, raw) in raws.into_iter().enumerate() {
        let invalid = |source| CliError::InvalidMeasure { path: path.to_path_buf(), index, source };
        if let Some(p) = raw.support.iter().find(|p| p.len() != raw.dim) {
            return Err(invalid(wlab_core::Error::Dimension { expected: raw.dim, got: p.len() }));
        }
        let sum: f64 = raw.weights.iter().sum();
        let m = validate_measure(raw.support, raw.weights).map_err(invalid)?;
        if (sum - 1.0).abs() > RENORM_WARN {
            warnings.push(format!("measure {index}: weights sum to {sum}; renormalized"));
        }
        measures.push(m);
    }
    Ok(Loaded { measures, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<Loaded> {
        parse_measures(text, Path::new("inline.json"))
    }

    #[test]
    fn single_dirac() {
        let l = parse(r#"{"dim":1,"support":[[0.0]],"weights":[1.0]}"#).unwrap();
        assert_eq!(l.measures.len(), 1);
        assert_eq!(l.measures[0].len(), 1);
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn near_unit_mass_is_renormalized_with_warning() {
        let l = parse(r#"[{"dim":1,"support":[[0.0],[1.0]],"weights":[0.5,0.499999999]}]"#).unwrap();
        assert_eq!(l.warnings.len(), 1);
        let s: f64 = l.measures[0].weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_weight_names_the_index() {
        let e = parse(
            r#"[{"dim":1,"support":[[0.0]],"weights":[1.0]},
                {"dim":1,"support":[[0.0],[1.0]],"weights":[1.5,-0.5]}]"#,
        )
        .unwrap_err();
        assert!(matches!(e, CliError::InvalidMeasure { index: 1, .. }), "{e}");
    }

    #[test]
    fn schema_violation_has_position() {
        let e = parse("{\n\"dim\":1,\n\"support\":[[0.0]]\n}").unwrap_err();
        match e {
            CliError::Parse { line, msg, .. } => {
                assert_eq!(line, 4);
                assert!(msg.contains("weights"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn wrong_point_dimension() {
        let e = parse(r#"{"dim":2,"support":[[0.0]],"weights":[1.0]}"#).unwrap_err();
        assert!(matches!(e, CliError::InvalidMeasure { index: 0, .. }));
    }
}
