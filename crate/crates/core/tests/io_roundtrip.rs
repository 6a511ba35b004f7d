mod common;

use common::random_sparse;
use matfin::io::{read_coordinate, read_edge_list, read_metric_table, write_coordinate, write_edge_list, write_metric_table};
use matfin::rng::Rng;
use matfin::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use std::fs::File;
use std::io::{BufReader, Write};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coordinate_files_round_trip(n in 1usize..40, k in 1usize..4, seed: u64) {
        let a = random_sparse(&mut Rng::seed_from_u64(seed), n, k, 1.0);
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write_coordinate(&a, f.as_file_mut()).unwrap();
        let back = read_coordinate(BufReader::new(File::open(f.path()).unwrap())).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn edge_lists_round_trip(edges in prop::collection::vec((0usize..50, 0usize..50), 0..40)) {
        let mut buf = Vec::new();
        write_edge_list(&edges, &mut buf).unwrap();
        prop_assert_eq!(read_edge_list(buf.as_slice()).unwrap(), edges);
    }
}

#[test]
fn metric_table_round_trip() {
    let table: Vec<Vec<u64>> = (0..7).map(|x: u64| (0..7).map(|y: u64| x.abs_diff(y)).collect()).collect();
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write_metric_table(&table, f.as_file_mut()).unwrap();
    let back = read_metric_table(BufReader::new(File::open(f.path()).unwrap())).unwrap();
    assert_eq!(back, table);
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let text = "% header comment\n3 2\n\n# entry\n1 1 2.5 0\n3 2 0 -1\n";
    let a = read_coordinate(text.as_bytes()).unwrap();
    assert_eq!(a.window(), 3);
    assert_eq!(a.nnz(), 2);
    assert_eq!(a.get(0, 0).re, 2.5);
    assert_eq!(a.get(2, 1).im, -1.0);
}

#[test]
fn parse_errors_name_the_line() {
    let bad = "2 1\n1 x 1 0\n";
    match read_coordinate(bad.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(read_coordinate("2 1\n3 1 1 0\n".as_bytes()).is_err());
    assert!(read_edge_list("0 1\n".as_bytes()).is_err());
    assert!(read_metric_table("2\n0 1\n".as_bytes()).is_err());
    assert!(read_coordinate("".as_bytes()).is_err());
}

#[test]
fn files_written_by_hand_load() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "4 4").unwrap();
    for i in 1..=4 {
        writeln!(f, "{i} {i} 1 0").unwrap();
    }
    let a = read_coordinate(BufReader::new(File::open(f.path()).unwrap())).unwrap();
    assert_eq!(a, matfin::SparseOp::identity(4));
}
