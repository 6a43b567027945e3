//! SBML Level 3 Version 1 (core) export, plus a strict reader for the
//! exported subset.
//!
//! The writer emits one compartment (`cell`, size 1), species as
//! substance amounts (`hasOnlySubstanceUnits="true"`), and one
//! irreversible reaction per network reaction whose kinetic law is the
//! power-law monomial `k * prod species^coefficient` with `k` as a
//! local parameter. Output is byte-deterministic for a given network.
//!
//! The reader exists to verify our own exports round-trip and refuses
//! anything outside that subset with a precise feature name. Note that
//! stochastic simulators applying combinatorial propensity corrections
//! (COPASI among them) will interpret the imported power-law form in
//! their own propensity convention; see `docs/formats.md`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::network::{Reaction, ReactionNetwork, ReactionTerm, Species};

const SBML_NS: &str = "http://www.sbml.org/sbml/level3/version1/core";
const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

#[derive(Debug, Error, PartialEq)]
pub enum SbmlError {
    #[error("not well-formed XML: {0}")]
    Xml(String),
    #[error("unsupported SBML feature: {0}")]
    UnsupportedFeature(String),
    #[error("invalid SBML document: {0}")]
    Invalid(String),
}

/// Serialise an admissible network as SBML bytes.
pub fn export_sbml(network: &ReactionNetwork) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<sbml xmlns=\"{SBML_NS}\" level=\"3\" version=\"1\">");
    out.push_str("  <model id=\"reaction_network\">\n");
    out.push_str("    <listOfCompartments>\n");
    out.push_str(
        "      <compartment id=\"cell\" name=\"cell\" size=\"1\" constant=\"true\"/>\n",
    );
    out.push_str("    </listOfCompartments>\n");

    if !network.species.is_empty() {
        out.push_str("    <listOfSpecies>\n");
        for s in &network.species {
            let _ = writeln!(
                out,
                "      <species id=\"{}\" compartment=\"cell\" initialAmount=\"{}\" \
                 hasOnlySubstanceUnits=\"true\" boundaryCondition=\"false\" constant=\"false\"/>",
                s.name, s.initial_amount
            );
        }
        out.push_str("    </listOfSpecies>\n");
    }

    if !network.reactions.is_empty() {
        out.push_str("    <listOfReactions>\n");
        for r in &network.reactions {
            let _ = writeln!(
                out,
                "      <reaction id=\"{}\" reversible=\"false\" fast=\"false\">",
                r.name
            );
            write_species_refs(&mut out, "listOfReactants", &r.reactants, network);
            write_species_refs(&mut out, "listOfProducts", &r.products, network);
            out.push_str("        <kineticLaw>\n");
            let _ = writeln!(out, "          <math xmlns=\"{MATHML_NS}\">");
            write_mass_action_math(&mut out, r, network);
            out.push_str("          </math>\n");
            out.push_str("          <listOfLocalParameters>\n");
            let _ = writeln!(
                out,
                "            <localParameter id=\"k\" value=\"{}\"/>",
                r.rate_constant
            );
            out.push_str("          </listOfLocalParameters>\n");
            out.push_str("        </kineticLaw>\n");
            out.push_str("      </reaction>\n");
        }
        out.push_str("    </listOfReactions>\n");
    }

    out.push_str("  </model>\n</sbml>\n");
    out.into_bytes()
}

fn write_species_refs(
    out: &mut String,
    list: &str,
    terms: &[ReactionTerm],
    network: &ReactionNetwork,
) {
    if terms.is_empty() {
        return;
    }
    let _ = writeln!(out, "        <{list}>");
    for term in terms {
        let _ = writeln!(
            out,
            "          <speciesReference species=\"{}\" stoichiometry=\"{}\" constant=\"true\"/>",
            network.species[term.species].name, term.coefficient
        );
    }
    let _ = writeln!(out, "        </{list}>");
}

/// `k * prod X^a` as MathML; bare `k` for source reactions.
fn write_mass_action_math(out: &mut String, reaction: &Reaction, network: &ReactionNetwork) {
    let indent = "            ";
    if reaction.reactants.is_empty() {
        let _ = writeln!(out, "{indent}<ci> k </ci>");
        return;
    }
    let _ = writeln!(out, "{indent}<apply>");
    let _ = writeln!(out, "{indent}  <times/>");
    let _ = writeln!(out, "{indent}  <ci> k </ci>");
    for term in &reaction.reactants {
        let name = &network.species[term.species].name;
        if term.coefficient == 1 {
            let _ = writeln!(out, "{indent}  <ci> {name} </ci>");
        } else {
            let _ = writeln!(out, "{indent}  <apply>");
            let _ = writeln!(out, "{indent}    <power/>");
            let _ = writeln!(out, "{indent}    <ci> {name} </ci>");
            let _ = writeln!(
                out,
                "{indent}    <cn type=\"integer\">{}</cn>",
                term.coefficient
            );
            let _ = writeln!(out, "{indent}  </apply>");
        }
    }
    let _ = writeln!(out, "{indent}</apply>");
}

/// Parse SBML produced by [`export_sbml`] (or an equivalent subset)
/// back into a network.
pub fn import_sbml_subset(bytes: &[u8]) -> Result<ReactionNetwork, SbmlError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| SbmlError::Xml(format!("document is not UTF-8: {e}")))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| SbmlError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "sbml" {
        return Err(SbmlError::Invalid("root element is not <sbml>".into()));
    }
    if root.attribute("level") != Some("3") {
        return Err(SbmlError::UnsupportedFeature(format!(
            "SBML level {} (only level 3 is read)",
            root.attribute("level").unwrap_or("?")
        )));
    }
    let model = elements(root)
        .find(|n| n.tag_name().name() == "model")
        .ok_or_else(|| SbmlError::Invalid("no <model> element".into()))?;

    let mut species: Vec<Species> = Vec::new();
    let mut reactions = Vec::new();
    for child in elements(model) {
        match child.tag_name().name() {
            "listOfCompartments" => {
                if elements(child).count() > 1 {
                    return Err(SbmlError::UnsupportedFeature(
                        "multiple compartments".into(),
                    ));
                }
            }
            "listOfSpecies" => {
                for node in elements(child) {
                    species.push(read_species(node)?);
                }
            }
            "listOfReactions" => {
                for node in elements(child) {
                    reactions.push(read_reaction(node, &species)?);
                }
            }
            other => {
                return Err(SbmlError::UnsupportedFeature(format!("<{other}>")));
            }
        }
    }
    Ok(ReactionNetwork::new(species, reactions))
}

fn elements<'a, 'input>(
    node: roxmltree::Node<'a, 'input>,
) -> impl Iterator<Item = roxmltree::Node<'a, 'input>> {
    node.children().filter(|n| n.is_element())
}

fn read_species(node: roxmltree::Node) -> Result<Species, SbmlError> {
    if node.tag_name().name() != "species" {
        return Err(SbmlError::UnsupportedFeature(format!(
            "<{}> inside listOfSpecies",
            node.tag_name().name()
        )));
    }
    let id = node
        .attribute("id")
        .ok_or_else(|| SbmlError::Invalid("species without id".into()))?;
    if node.attribute("boundaryCondition") == Some("true") {
        return Err(SbmlError::UnsupportedFeature(format!(
            "boundary-condition species `{id}`"
        )));
    }
    if node.attribute("constant") == Some("true") {
        return Err(SbmlError::UnsupportedFeature(format!(
            "constant species `{id}`"
        )));
    }
    if node.attribute("initialConcentration").is_some() {
        return Err(SbmlError::UnsupportedFeature(format!(
            "initialConcentration on species `{id}` (amounts only)"
        )));
    }
    let amount = node
        .attribute("initialAmount")
        .ok_or_else(|| {
            SbmlError::UnsupportedFeature(format!("species `{id}` without initialAmount"))
        })?
        .parse::<f64>()
        .map_err(|_| SbmlError::Invalid(format!("species `{id}` has non-numeric amount")))?;
    Ok(Species::new(id, amount))
}

fn read_reaction(
    node: roxmltree::Node,
    species: &[Species],
) -> Result<Reaction, SbmlError> {
    if node.tag_name().name() != "reaction" {
        return Err(SbmlError::UnsupportedFeature(format!(
            "<{}> inside listOfReactions",
            node.tag_name().name()
        )));
    }
    let id = node
        .attribute("id")
        .ok_or_else(|| SbmlError::Invalid("reaction without id".into()))?;
    if node.attribute("reversible") == Some("true") {
        return Err(SbmlError::UnsupportedFeature(format!(
            "reversible reaction `{id}`"
        )));
    }
    if node.attribute("fast") == Some("true") {
        return Err(SbmlError::UnsupportedFeature(format!("fast reaction `{id}`")));
    }

    let mut reactants = Vec::new();
    let mut products = Vec::new();
    let mut rate_constant = None;
    let mut math_checked = false;
    for child in elements(node) {
        match child.tag_name().name() {
            "listOfReactants" => reactants = read_species_refs(child, species, id)?,
            "listOfProducts" => products = read_species_refs(child, species, id)?,
            "kineticLaw" => {
                let (k, checked) = read_kinetic_law(child, id)?;
                rate_constant = Some(k);
                math_checked = checked;
            }
            other => {
                return Err(SbmlError::UnsupportedFeature(format!(
                    "<{other}> inside reaction `{id}`"
                )));
            }
        }
    }
    let rate_constant = rate_constant.ok_or_else(|| {
        SbmlError::UnsupportedFeature(format!("reaction `{id}` without kineticLaw"))
    })?;
    let reaction = Reaction::new(id, reactants, products, rate_constant);
    if math_checked {
        verify_math_matches(node, &reaction, species)?;
    }
    Ok(reaction)
}

fn read_species_refs(
    node: roxmltree::Node,
    species: &[Species],
    reaction: &str,
) -> Result<Vec<ReactionTerm>, SbmlError> {
    let mut terms = Vec::new();
    for reference in elements(node) {
        if reference.tag_name().name() != "speciesReference" {
            return Err(SbmlError::UnsupportedFeature(format!(
                "<{}> inside reaction `{reaction}`",
                reference.tag_name().name()
            )));
        }
        let name = reference
            .attribute("species")
            .ok_or_else(|| SbmlError::Invalid(format!("speciesReference without species in `{reaction}`")))?;
        let index = species
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| {
                SbmlError::Invalid(format!(
                    "reaction `{reaction}` references unknown species `{name}`"
                ))
            })?;
        let stoichiometry = match reference.attribute("stoichiometry") {
            None => 1.0,
            Some(text) => text.parse::<f64>().map_err(|_| {
                SbmlError::Invalid(format!("non-numeric stoichiometry in `{reaction}`"))
            })?,
        };
        if stoichiometry.fract() != 0.0 || stoichiometry < 1.0 {
            return Err(SbmlError::UnsupportedFeature(format!(
                "non-integer stoichiometry {stoichiometry} in reaction `{reaction}`"
            )));
        }
        terms.push(ReactionTerm::new(index, stoichiometry as i64));
    }
    Ok(terms)
}

/// Extract the local parameter `k`; report whether a math element was
/// present so the caller can verify its structure.
fn read_kinetic_law(node: roxmltree::Node, reaction: &str) -> Result<(f64, bool), SbmlError> {
    let mut k = None;
    let mut has_math = false;
    for child in elements(node) {
        match child.tag_name().name() {
            "math" => has_math = true,
            "listOfLocalParameters" => {
                for parameter in elements(child) {
                    let id = parameter.attribute("id").unwrap_or_default();
                    if id != "k" {
                        return Err(SbmlError::UnsupportedFeature(format!(
                            "local parameter `{id}` in reaction `{reaction}` (only `k`)"
                        )));
                    }
                    k = parameter
                        .attribute("value")
                        .and_then(|v| v.parse::<f64>().ok());
                }
            }
            other => {
                return Err(SbmlError::UnsupportedFeature(format!(
                    "<{other}> inside kineticLaw of `{reaction}`"
                )));
            }
        }
    }
    let k = k.ok_or_else(|| {
        SbmlError::UnsupportedFeature(format!(
            "kineticLaw of `{reaction}` without local parameter `k`"
        ))
    })?;
    Ok((k, has_math))
}

/// Check that the MathML inside the reaction's kineticLaw is exactly the
/// power-law monomial over its reactants.
fn verify_math_matches(
    reaction_node: roxmltree::Node,
    reaction: &Reaction,
    species: &[Species],
) -> Result<(), SbmlError> {
    let math = reaction_node
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "math")
        .expect("caller saw a math element");
    if math.tag_name().namespace() != Some(MATHML_NS) {
        return Err(SbmlError::UnsupportedFeature(format!(
            "kineticLaw math of `{}` outside the MathML namespace",
            reaction.name
        )));
    }
    let fail = || {
        SbmlError::UnsupportedFeature(format!(
            "kineticLaw of `{}` is not the mass-action monomial k * product(species^coefficient)",
            reaction.name
        ))
    };
    let top: Vec<_> = elements(math).collect();
    let [expr] = top.as_slice() else { return Err(fail()) };

    // Expected factors: k then one per reactant term.
    if reaction.reactants.is_empty() {
        return if is_ci(*expr, "k") { Ok(()) } else { Err(fail()) };
    }
    if expr.tag_name().name() != "apply" {
        return Err(fail());
    }
    let children: Vec<_> = elements(*expr).collect();
    if children.len() != 2 + reaction.reactants.len()
        || children[0].tag_name().name() != "times"
        || !is_ci(children[1], "k")
    {
        return Err(fail());
    }
    for (term, factor) in reaction.reactants.iter().zip(&children[2..]) {
        let name = &species[term.species].name;
        let matches = if term.coefficient == 1 {
            is_ci(*factor, name)
        } else {
            is_power_of(*factor, name, term.coefficient)
        };
        if !matches {
            return Err(fail());
        }
    }
    Ok(())
}

fn is_ci(node: roxmltree::Node, symbol: &str) -> bool {
    node.tag_name().name() == "ci" && node.text().map(str::trim) == Some(symbol)
}

fn is_power_of(node: roxmltree::Node, symbol: &str, exponent: i64) -> bool {
    if node.tag_name().name() != "apply" {
        return false;
    }
    let children: Vec<_> = elements(node).collect();
    children.len() == 3
        && children[0].tag_name().name() == "power"
        && is_ci(children[1], symbol)
        && children[2].tag_name().name() == "cn"
        && children[2]
            .text()
            .map(str::trim)
            .and_then(|t| t.parse::<i64>().ok())
            == Some(exponent)
}
