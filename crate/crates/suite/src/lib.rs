//! Holds the `acceptance` test target, which prints one PASS/FAIL line per
//! criterion. Run it with `cargo test -p muskat-suite --test acceptance`;
//! pass criterion numbers after `--` to select a subset.
