use serde_json::Value;

#[test]
fn exports_return_parseable_json() {
    let t: Value =
        serde_json::from_str(&meshflood_web::topology("grid:25", 0, 0, 0.0).unwrap()).unwrap();
    assert_eq!(t["edges"].as_array().unwrap().len(), 40);
    assert_eq!(t["connected"], true);

    let s: Value =
        serde_json::from_str(&meshflood_web::simulate("grid:9", 0, 1, 0.0, 10.0).unwrap()).unwrap();
    let relay = s["relay"]["transmissions"].as_u64().unwrap();
    let blind = s["blind"]["transmissions"].as_u64().unwrap();
    assert!(relay <= blind);
    assert_eq!(blind, 5 * 9);

    let o: Value = serde_json::from_str(&meshflood_web::oracle_gap(3, 6, 1).unwrap()).unwrap();
    assert!(o["mean_ratio"].as_f64().unwrap() >= 1.0);
}
