//! JSON and CSV renderings of analysis results. Exact quantities are written
//! as fraction strings; values derived from a fitted `a0` are written as decimals.

use serde_json::{json, Value};

use crate::analysis::{Analysis, SublevelRun};
use crate::poly::SparsePolynomial;
use crate::rational::{format_rational, to_f64, Q};
use crate::regions::{Point3, RegionSet, Slice, Verdict};
use crate::sharpness::SharpnessReport;

pub fn num(x: &Q, exact: bool) -> Value {
    if exact {
        Value::String(format_rational(x))
    } else {
        json!(to_f64(x))
    }
}

fn exact_vec(v: &[Q]) -> Value {
    Value::Array(v.iter().map(|x| num(x, true)).collect())
}

fn point3(p: &Point3, exact: bool) -> Value {
    json!([num(&p.x, exact), num(&p.y, exact), num(&p.z, exact)])
}

fn pairs(v: &[(Q, Q)], exact: bool) -> Value {
    Value::Array(v.iter().map(|(a, b)| json!([num(a, exact), num(b, exact)])).collect())
}

fn phase_json(poly: &SparsePolynomial) -> Value {
    serde_json::to_value(poly.to_records()).expect("records serialize")
}

pub fn analysis_json(phase: &SparsePolynomial, a: &Analysis) -> Value {
    let p = &a.profile;
    let exact = p.exact;
    json!({
        "dimension": phase.dim(),
        "phase": phase_json(phase),
        "vertices": a.polyhedron.vertices().iter().map(|v| exact_vec(v)).collect::<Vec<_>>(),
        "d": num(&a.support.d, true),
        "b": exact_vec(&a.support.b),
        "b_next": num(&(&a.support.d * a.support.b_sum()), true),
        "compact_faces": a.zeros.per_face.iter().map(|f| json!({
            "normal": exact_vec(&f.face.normal),
            "value": num(&f.face.value, true),
            "dim": f.face.dimension,
            "vertices": f.face.vertices.iter().map(|v| exact_vec(v)).collect::<Vec<_>>(),
            "order": f.order,
            "method": f.method,
            "low_confidence": f.low_confidence,
        })).collect::<Vec<_>>(),
        "o": a.zeros.o_of_s,
        "o_computed": a.zeros.computed,
        "o_method": a.zeros.method,
        "predicted_a0": a.predicted_a0.as_ref().map(|x| num(x, true)),
        "a0": num(&p.a0, exact || p.a0_source != crate::regions::A0Source::Fitted),
        "a0_source": p.a0_source,
        "d0": p.d0,
        "g": num(&p.g, exact),
        "k": num(&p.k, true),
        "case": p.case,
        "hypotheses": p.hypotheses,
        "exact": exact,
        "low_confidence": p.low_confidence,
        "sublevel_fit": a.sublevel.as_ref().map(sublevel_json),
    })
}

pub fn regions_json(r: &RegionSet) -> Value {
    let exact = r.exact();
    json!({
        "case": r.case,
        "exact": exact,
        "g": num(r.g(), exact),
        "k": num(r.k(), exact),
        "plane": {
            "equation": "(g + k)(x - y) + z = g",
            "g": num(&r.plane.g, exact),
            "k": num(&r.plane.k, exact),
        },
        "pieces": r.pieces.iter().map(|p| json!({
            "label": p.label,
            "vertices": p.vertices.iter().map(|v| point3(v, exact)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "segment_l": r.segment_l.as_ref().map(|(a, b)| json!([point3(a, exact), point3(b, exact)])),
        "triangle_a": pairs(&r.triangle_a, exact),
        "region_b": pairs(&r.region_b, exact),
        "hypotheses": r.hypotheses(),
    })
}

pub fn slice_json(s: &Slice, exact: bool) -> Value {
    json!({
        "vertices": pairs(&s.vertices, exact),
        "excluded_line": {
            "equation": "y = x - offset",
            "offset": num(&s.excluded_offset, exact),
        },
    })
}

pub fn verdict_json(x: f64, y: f64, s: f64, v: &Verdict) -> Value {
    json!({ "point": [x, y, s], "verdict": v.verdict, "witness": v.witness, "notes": v.notes })
}

pub fn sublevel_json(run: &SublevelRun) -> Value {
    let f = &run.fit;
    json!({
        "r": run.r,
        "a0_hat": f.a0_hat,
        "d0_hat": f.d0_hat,
        "lower_constant": f.lower_constant,
        "upper_constant": f.upper_constant,
        "residual": f.residual,
        "unstable": f.unstable,
        "candidates": f.candidates.iter().map(|c| json!({"d0": c.d0, "a0": c.a0, "residual": c.residual})).collect::<Vec<_>>(),
        "eps_schedule": f.eps_schedule,
        "predicted_a0": run.predicted_a0.as_ref().map(|x| num(x, true)),
        "relative_error": run.relative_error(),
    })
}

pub fn sublevel_csv(run: &SublevelRun) -> String {
    let mut out = String::from("eps,measure,stderr\n");
    for m in &run.measurements {
        out.push_str(&format!("{:e},{:e},{:e}\n", m.eps, m.measure, m.stderr));
    }
    out
}

pub fn sharpness_json(reports: &[SharpnessReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| serde_json::to_value(r).expect("report serializes"))
            .collect(),
    )
}

pub fn sharpness_csv(reports: &[SharpnessReport]) -> String {
    let mut out = String::from("s,r,ratio,norm_q,norm_p,window_lb,eps1\n");
    for rep in reports {
        for p in &rep.per_r {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                format_rational(&rep.s),
                p.r,
                p.ratio,
                p.norm_q,
                p.norm_p,
                p.window_lb,
                p.eps1
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::problem::parse_spec;

    #[test]
    fn exact_profiles_print_fractions_only() {
        let spec = parse_spec("dimension = 1\nterms = [{ exps = [3], coeff = 1 }]\n").unwrap();
        let a = analyze(&spec, 0).unwrap();
        let v = regions_json(&a.regions);
        fn walk(v: &Value) {
            match v {
                Value::Number(n) => panic!("float {n} in exact output"),
                Value::Array(a) => a.iter().for_each(walk),
                Value::Object(o) => o.values().for_each(walk),
                _ => {}
            }
        }
        walk(&v["pieces"]);
        walk(&slice_json(&a.slice, true));
        assert_eq!(v["g"], "1/3");
        assert_eq!(analysis_json(&spec.phase, &a)["d"], "3");
    }
}
