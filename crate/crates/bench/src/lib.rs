//! Synthetic model generators for benchmarks.

use lamina_core::{parse_model, LayeredModel};

/// Two-layer model whose physical layer joins `s` and `t` through `n`
/// parallel relays. Its reduced physical formula is one n-member clause,
/// so the truth table has 2^n rows and the single-fault plan 2n
/// templates.
pub fn parallel_relays(n: usize) -> LayeredModel {
    assert!(n >= 1);
    let components: Vec<String> = (0..n)
        .map(|i| format!(r#"{{ "id": "r{i:03}", "kind": "relay" }}"#))
        .collect();
    let links: Vec<String> = (0..n)
        .flat_map(|i| [format!(r#"["r{i:03}", "s"]"#), format!(r#"["r{i:03}", "t"]"#)])
        .collect();
    let source = format!(
        r#"{{
            "name": "parallel-relays-{n}",
            "layers": [
                {{"index": 1, "name": "physical",
                  "components": [{}, {{"id": "s", "kind": "host"}}, {{"id": "t", "kind": "host"}}],
                  "links": [{}],
                  "access_points": ["s", "t"]}},
                {{"index": 2, "name": "logical",
                  "components": [{{"id": "u", "kind": "endpoint"}}, {{"id": "v", "kind": "endpoint"}}],
                  "links": [["u", "v"]],
                  "access_points": []}}
            ],
            "projections": [{{"upper": 2, "lower": 1, "map": {{"u": ["s"], "v": ["t"]}}}}],
            "requirements": [{{"name": "r", "layer": 1, "source": "s", "destination": "t"}}]
        }}"#,
        components.join(", "),
        links.join(", "),
    );
    parse_model(&source).expect("generated model parses")
}

/// Complete graph on `n` relays plus the two endpoints, all
/// interconnected. Path enumeration between the endpoints grows
/// factorially with `n`.
pub fn complete_mesh(n: usize) -> LayeredModel {
    let ids: Vec<String> = (0..n)
        .map(|i| format!("m{i:03}"))
        .chain(["s".to_owned(), "t".to_owned()])
        .collect();
    let components: Vec<String> = ids
        .iter()
        .map(|id| format!(r#"{{ "id": "{id}", "kind": "node" }}"#))
        .collect();
    let mut links = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in ids.iter().skip(i + 1) {
            links.push(format!(r#"["{a}", "{b}"]"#));
        }
    }
    let source = format!(
        r#"{{
            "name": "mesh-{n}",
            "layers": [
                {{"index": 1, "name": "physical",
                  "components": [{}],
                  "links": [{}],
                  "access_points": ["s", "t"]}},
                {{"index": 2, "name": "logical",
                  "components": [{{"id": "u", "kind": "endpoint"}}, {{"id": "v", "kind": "endpoint"}}],
                  "links": [["u", "v"]],
                  "access_points": []}}
            ],
            "projections": [{{"upper": 2, "lower": 1, "map": {{"u": ["s"], "v": ["t"]}}}}],
            "requirements": [{{"name": "r", "layer": 1, "source": "s", "destination": "t"}}]
        }}"#,
        components.join(", "),
        links.join(", "),
    );
    parse_model(&source).expect("generated model parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use lamina_core::validate_model;

    #[test]
    fn generators_produce_valid_models() {
        for model in [parallel_relays(4), complete_mesh(4)] {
            assert!(validate_model(&model).is_valid(), "{}", model.name);
        }
    }
}
