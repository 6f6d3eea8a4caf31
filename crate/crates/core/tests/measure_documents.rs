use hcspherical::{parse_measure, BiinvariantMeasure, Error};

#[test]
fn mixture_document_round_trip() {
    let nu: BiinvariantMeasure<f64> = parse_measure(
        r#"{"field":"complex","n":3,"components":[
            {"weight":2.0,"law":{"point":[1.0,0.0,-1.0]}},
            {"weight":1.0,"law":{"sorted_iid":{"marginal":{"uniform":{"lo":-1.0,"hi":1.0}},"n":3}}},
            {"weight":1.0,"law":{"scaled":{"base":{"point":[0.5,0.5,0.0]},"shift":-0.25}}}]}"#,
    )
    .unwrap();
    assert_eq!(nu.n, 3);
    assert!(nu.atoms().is_none());
}

#[test]
fn discrete_mixture_exposes_atoms() {
    let nu: BiinvariantMeasure<f64> = parse_measure(
        r#"{"field":"real","n":2,"components":[
            {"weight":1.0,"law":{"point":[2.0,1.0]}},
            {"weight":3.0,"law":{"point":[0.0,-1.0]}}]}"#,
    )
    .unwrap();
    let atoms = nu.atoms().unwrap();
    let total: f64 = atoms.iter().map(|(w, _)| w).sum();
    assert!((total - 1.0).abs() < 1e-15);
    assert!((atoms[1].0 - 0.75).abs() < 1e-15);
}

#[test]
fn malformed_documents_name_the_field() {
    let cases = [
        (r#"{"field":"real","n":2,"components":[{"weight":-1.0,"law":{"point":[1.0,0.0]}}]}"#, "weight"),
        (r#"{"field":"real","n":2,"components":[{"weight":1.0,"law":{"normal_typo":{}}}]}"#, ""),
        (
            r#"{"field":"real","n":2,"components":[{"weight":1.0,"law":{"sorted_iid":{"marginal":{"normal":{"mu":0.0,"sigma":-1.0}},"n":2}}}]}"#,
            "sigma",
        ),
        (r#"{"field":"quaternion","n":2,"components":[]}"#, ""),
    ];
    for (doc, needle) in cases {
        match parse_measure::<f64>(doc) {
            Err(e @ Error::SpecError { .. }) => assert!(e.to_string().contains(needle), "{e}"),
            Err(e) => assert!(e.is_config_error(), "{doc}: {e}"),
            Ok(_) => panic!("accepted {doc}"),
        }
    }
}
