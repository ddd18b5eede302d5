//! Reading and writing system files.
//!
//!     cargo run --example system_files

use min_energy::cli::io::{parse_system, system_to_json};
use min_energy::fixtures;

fn main() -> min_energy::Result<()> {
    let text = r#"{
        "field": "complex",
        "form": "jordan",
        "jordan_blocks": [ { "eig": [0, 1], "size": 2 }, { "eig": [-1, 0], "size": 1 } ],
        "B": [ [[0, 0]], [[1, 0]], [[1, -1]] ]
    }"#;
    let sys = parse_system(text, "inline")?;
    println!(
        "parsed a {}-state {:?} system, A =\n{:.3}",
        sys.n(),
        sys.field,
        sys.a
    );

    let json = system_to_json(&fixtures::fig2(0.25));
    let back = parse_system(&json, "round trip")?;
    assert_eq!(back, fixtures::fig2(0.25));
    println!("A_0.25 written and read back bit for bit:\n{json}");

    match parse_system("{\"A\": [[1, 2], [3]], \"B\": [[1], [0]]}", "bad.json") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
