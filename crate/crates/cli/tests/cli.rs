use std::process::Command;

fn stabilab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_stabilab")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

#[test]
fn run_emits_one_csv_row_per_seed() {
    let (code, out, _) = stabilab(&["run", "--protocol", "mst-cyclic", "--gen", "random", "--n", "7", "--seeds", "0..3"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let conv = headers.iter().position(|h| h == "converged").unwrap();
    let quality = headers.iter().position(|h| h == "quality").unwrap();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(&r[conv], "true");
        assert_eq!(&r[quality], "1.000000");
    }
}

#[test]
fn bad_input_exits_with_two() {
    let (code, _, err) = stabilab(&["run", "--protocol", "nope", "--gen", "ring"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown protocol"));
    let (code, _, _) = stabilab(&["run", "--protocol", "spt", "--gen", "ring", "--faults", "nodes=x"]);
    assert_eq!(code, 2);
}

#[test]
fn dot_output_marks_tree_edges() {
    let dir = std::env::temp_dir().join(format!("stabilab-dot-{}", std::process::id()));
    let (code, _, _) =
        stabilab(&["run", "--protocol", "spt", "--gen", "path", "--n", "4", "--dot", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dot = std::fs::read_to_string(&dir).unwrap();
    std::fs::remove_file(&dir).ok();
    assert!(dot.starts_with("graph"));
    assert_eq!(dot.matches("style=solid").count(), 3);
}
