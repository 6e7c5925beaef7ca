//! JSON Schema of the experiment config, kept in step with [`crate::config`].

use serde_json::{json, Value};

fn number() -> Value {
    json!({"type": "number"})
}

fn nonneg_int() -> Value {
    json!({"type": "integer", "minimum": 0})
}

fn number_list() -> Value {
    json!({"type": "array", "items": {"type": "number"}})
}

fn closed(properties: Value, required: &[&str]) -> Value {
    json!({"type": "object", "additionalProperties": false, "properties": properties, "required": required})
}

fn kernel() -> Value {
    let shape = |width: &str| {
        let mut props = serde_json::Map::new();
        props.insert(width.to_string(), number());
        props.insert("mass".into(), number());
        props.insert("amplitude".into(), number());
        closed(Value::Object(props), &[width])
    };
    json!({"oneOf": [
        closed(json!({"kind": {"const": "gaussian"}, "params": shape("sigma")}), &["kind", "params"]),
        closed(json!({"kind": {"const": "tophat"}, "params": shape("radius")}), &["kind", "params"]),
        closed(json!({"kind": {"const": "table"}, "params": number_list()}), &["kind", "params"]),
    ]})
}

fn initial_state() -> Value {
    json!({"oneOf": [
        closed(json!({"product": number()}), &["product"]),
        closed(json!({"density": number_list()}), &["density"]),
        closed(json!({"file": {"type": "string"}}), &["file"]),
    ]})
}

fn experiment() -> Value {
    let kind = |k: &str| json!({"const": k});
    json!({"oneOf": [
        closed(json!({
            "kind": kind("evolve"), "initial": initial_state(), "t_fraction": number(), "span": number(),
            "s": number(), "oracle": {"type": "boolean"}, "flow_tau_fraction": number()
        }), &["kind", "initial"]),
        closed(json!({
            "kind": kind("vlasov"), "epsilons": number_list(), "initial": initial_state(),
            "t_fraction": number(), "samples": nonneg_int(),
            "ratio_window": {"type": "array", "items": number(), "minItems": 2, "maxItems": 2}
        }), &["kind", "epsilons", "initial"]),
        closed(json!({
            "kind": kind("kinetic"),
            "initial": {"oneOf": [
                closed(json!({"constant": number()}), &["constant"]),
                closed(json!({"values": number_list()}), &["values"]),
            ]},
            "t_end": number(), "dt": number(), "record_every": nonneg_int(),
            "full_field": {"type": "boolean"}, "homogeneous_tol": number()
        }), &["kind", "initial", "t_end", "dt"]),
        closed(json!({
            "kind": kind("bifurcation"), "b": number_list(), "c": number_list(), "x_hi": number(),
            "resolution": nonneg_int(), "fold_b": number_list(), "expect_roots": nonneg_int()
        }), &["kind", "b", "c"]),
        closed(json!({
            "kind": kind("bounds"), "samples": nonneg_int(), "calibration_samples": nonneg_int()
        }), &["kind"]),
        closed(json!({
            "kind": kind("horizon"), "search_hi": number(), "t_fractions": number_list(),
            "curve_points": nonneg_int()
        }), &["kind"]),
    ]})
}

pub fn config_schema() -> Value {
    let mut root = closed(
        json!({
            "model": closed(json!({
                "kernels": closed(json!({
                    "dim": nonneg_int(), "sites": nonneg_int(), "spacing": number(),
                    "a": kernel(), "phi": kernel()
                }), &["dim", "sites", "spacing", "a", "phi"]),
                "m": number(), "lambda": number(), "n_max": nonneg_int(), "n_hat": number()
            }), &["kernels", "m", "lambda"]),
            "scale": closed(json!({
                "alpha_s": number(), "alpha_star": number(), "nu": number(), "omega": number()
            }), &["alpha_s", "alpha_star"]),
            "solver": closed(json!({
                "Upsilon": number(), "q": number(), "alpha": number(), "n_max": nonneg_int(),
                "term_tol": number(), "quad_tol": number(), "grid_points": nonneg_int(),
                "extrapolate": {"type": "boolean"}
            }), &[]),
            "experiment": experiment(),
            "seed": nonneg_int(),
            "output": closed(json!({"dir": {"type": "string"}, "plotdata": {"type": "boolean"}}), &[]),
        }),
        &["experiment"],
    );
    root["$schema"] = json!("https://json-schema.org/draft/2020-12/schema");
    root["title"] = json!("ovskale experiment config");
    root
}
