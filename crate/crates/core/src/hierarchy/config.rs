//! Hierarchy config files.
//!
//! ```text
//! [VARIANT] WTAH
//! [NODES] NATO RU GB GER US Congress POTUS
//! [ARCS]
//! ALL > NATO
//! NATO > US
//! [THETA]
//! 0.5
//! ALL : 0.67
//! [WEIGHTS]
//! US : Congress=0.5, POTUS=0.5
//! ```

use std::collections::BTreeMap;

use super::{HierarchyError, NodeConfigs, Result, Variant, ViewpointHierarchy};
use crate::configfile;
use crate::ids::ViewpointId;

fn err(line: usize, message: impl Into<String>) -> HierarchyError {
    HierarchyError::Config {
        line,
        message: message.into(),
    }
}

fn number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| err(line, format!("`{}` is not a number", s.trim())))
}

pub(super) fn parse(text: &str) -> Result<ViewpointHierarchy> {
    let mut variant = None;
    let mut nodes: Vec<ViewpointId> = Vec::new();
    let mut arcs = Vec::new();
    let mut configs = NodeConfigs::default();

    for l in configfile::lines(text) {
        match l.section {
            "VARIANT" => {
                let v = Variant::parse(l.text)
                    .ok_or_else(|| err(l.line, format!("unknown variant `{}`", l.text)))?;
                if variant.replace(v).is_some() {
                    return Err(err(l.line, "variant given twice"));
                }
            }
            "NODES" => nodes.extend(l.text.split_whitespace().map(ViewpointId::from)),
            "ARCS" => {
                let (parent, child) = l
                    .text
                    .split_once('>')
                    .ok_or_else(|| err(l.line, "expected `parent > child`"))?;
                arcs.push((
                    ViewpointId::from(parent.trim()),
                    ViewpointId::from(child.trim()),
                ));
            }
            "THETA" => match l.text.split_once(':') {
                Some((node, value)) => {
                    configs
                        .thresholds
                        .insert(node.trim().into(), number(value, l.line)?);
                }
                None => {
                    if configs.global_threshold.replace(number(l.text, l.line)?).is_some() {
                        return Err(err(l.line, "global threshold given twice"));
                    }
                }
            },
            "WEIGHTS" => {
                let (node, entries) = l
                    .text
                    .split_once(':')
                    .ok_or_else(|| err(l.line, "expected `node : member=w,...`"))?;
                let mut weights = BTreeMap::new();
                for entry in configfile::list(entries) {
                    let (member, w) = entry
                        .split_once('=')
                        .ok_or_else(|| err(l.line, format!("expected `member=w`, got `{entry}`")))?;
                    weights.insert(member.trim().to_owned(), number(w, l.line)?);
                }
                configs.weights.insert(node.trim().into(), weights);
            }
            other => return Err(err(l.line, format!("unknown section `[{other}]`"))),
        }
    }
    let variant = variant.ok_or_else(|| err(0, "missing [VARIANT]"))?;
    ViewpointHierarchy::build(nodes, arcs, variant, configs)
}
