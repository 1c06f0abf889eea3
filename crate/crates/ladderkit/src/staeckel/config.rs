//! Plain-text config format for user-defined coordinate systems.
//!
//! ```text
//! [system NAME]
//! coords = r, theta, phi            # optional, defaults to x1, x2, x3
//! transform.x = x1 * sin(x2) * cos(x3)
//! transform.y = x1 * sin(x2) * sin(x3)
//! transform.z = x1 * cos(x2)
//! f.1 = x1^2
//! f.2 = 1 - cos(x2)^2
//! f.3 = sqrt(1 - cos(x3)^2)
//! phi.1.1 = 1
//! phi.1.2 = 1/x1^2
//! ...                               # all nine phi.m.n entries
//! domain.1 = 0.001, 10
//! domain.2 = 0.001, 3.14
//! domain.3 = 0.001, 3.14
//! ```
//!
//! `#` starts a comment. Transform expressions are mandatory; `f.*` and
//! `phi.*.*` are optional as a group (a system without them is
//! transform-only and cannot be Robertson-checked). Expressions use the
//! variables `x1`, `x2`, `x3`. Loaded systems shadow builtin catalog entries
//! of the same name; duplicate names within the loaded set are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::numexpr;
use super::{CoordinateSystem, ScalarField, StaeckelError};
use crate::Scalar;

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

fn parse_sections(text: &str) -> Result<Vec<Section>, StaeckelError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let inner = rest.strip_suffix(']').ok_or(StaeckelError::Config {
                line: line_no,
                message: "expected ']' closing the section header".into(),
            })?;
            let name = inner
                .strip_prefix("system")
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or(StaeckelError::Config {
                    line: line_no,
                    message: "section header must be [system NAME]".into(),
                })?;
            sections.push(Section {
                name: name.to_string(),
                line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(StaeckelError::Config {
            line: line_no,
            message: "expected 'key = value'".into(),
        })?;
        let section = sections.last_mut().ok_or(StaeckelError::Config {
            line: line_no,
            message: "entry before any [system NAME] header".into(),
        })?;
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(StaeckelError::Config {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
        section
            .entries
            .insert(key, (value.trim().to_string(), line_no));
    }
    Ok(sections)
}

fn expr_field<S: Scalar>(
    section: &Section,
    key: &str,
) -> Result<Option<(ScalarField<S>, usize)>, StaeckelError> {
    match section.entries.get(key) {
        None => Ok(None),
        Some((text, line)) => {
            let e = numexpr::parse(text).map_err(|e| StaeckelError::Config {
                line: *line,
                message: e.to_string(),
            })?;
            Ok(Some((ScalarField::Expr(Arc::new(e)), *line)))
        }
    }
}

fn required<S: Scalar>(
    section: &Section,
    key: &str,
) -> Result<ScalarField<S>, StaeckelError> {
    expr_field(section, key)?
        .map(|(f, _)| f)
        .ok_or(StaeckelError::Config {
            line: section.line,
            message: format!("system '{}' is missing '{key}'", section.name),
        })
}

/// Parse a config file into coordinate systems. `existing` holds names
/// already loaded in this process; collisions with it are rejected.
pub fn load_config<S: Scalar>(
    text: &str,
    existing: &[CoordinateSystem<S>],
) -> Result<Vec<CoordinateSystem<S>>, StaeckelError> {
    let sections = parse_sections(text)?;
    let mut out: Vec<CoordinateSystem<S>> = Vec::new();
    for section in &sections {
        if existing.iter().any(|s| s.name == section.name)
            || out.iter().any(|s| s.name == section.name)
        {
            return Err(StaeckelError::Config {
                line: section.line,
                message: format!("duplicate system name '{}'", section.name),
            });
        }
        let transform = [
            required(section, "transform.x")?,
            required(section, "transform.y")?,
            required(section, "transform.z")?,
        ];
        let coords = match section.entries.get("coords") {
            Some((v, line)) => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(StaeckelError::Config {
                        line: *line,
                        message: "coords needs exactly three names".into(),
                    });
                }
                [
                    parts[0].to_string(),
                    parts[1].to_string(),
                    parts[2].to_string(),
                ]
            }
            None => ["x1".into(), "x2".into(), "x3".into()],
        };
        let mut domain = [(S::zero(), S::one()); 3];
        for axis in 0..3 {
            let key = format!("domain.{}", axis + 1);
            let (v, line) = section.entries.get(&key).ok_or(StaeckelError::Config {
                line: section.line,
                message: format!("system '{}' is missing '{key}'", section.name),
            })?;
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            let bad = || StaeckelError::Config {
                line: *line,
                message: format!("'{key}' must be 'lo, hi' with lo < hi"),
            };
            if parts.len() != 2 {
                return Err(bad());
            }
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            if !(lo < hi) {
                return Err(bad());
            }
            domain[axis] = (S::from_f64(lo).unwrap(), S::from_f64(hi).unwrap());
        }
        let mut f_num = [None, None, None];
        let mut phi_num: [[Option<ScalarField<S>>; 3]; 3] = Default::default();
        let mut any = false;
        let mut all = true;
        for n in 0..3 {
            f_num[n] = expr_field(section, &format!("f.{}", n + 1))?.map(|(f, _)| f);
            any |= f_num[n].is_some();
            all &= f_num[n].is_some();
        }
        for m in 0..3 {
            for n in 0..3 {
                phi_num[m][n] =
                    expr_field(section, &format!("phi.{}.{}", m + 1, n + 1))?.map(|(f, _)| f);
                any |= phi_num[m][n].is_some();
                all &= phi_num[m][n].is_some();
            }
        }
        if any && !all {
            return Err(StaeckelError::Config {
                line: section.line,
                message: format!(
                    "system '{}' has partial Stackel data; give all of f.1-3 and phi.1.1-3.3 or none",
                    section.name
                ),
            });
        }
        out.push(CoordinateSystem {
            name: section.name.clone(),
            coords,
            transform,
            partials: None,
            f_sym: [None, None, None],
            f_num,
            phi_sym: Default::default(),
            phi_num,
            domain,
        });
    }
    Ok(out)
}
