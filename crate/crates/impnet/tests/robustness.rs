//! Property tests for the textual front end: the parser is total (errors,
//! never panics) and printing a parsed program is a fixed point.

use impnet::cli::parse_bind_file;
use impnet::netsim::parse_topology;
use impnet::syntax::{parse_program, print_program};
use proptest::prelude::*;

proptest! {
    #[test]
    fn parser_never_panics_on_arbitrary_input(text in "\\PC{0,200}") {
        let _ = parse_program(&text);
    }

    #[test]
    fn parser_never_panics_on_grammar_like_input(
        text in "[a-z>=:;(){},\\\\._ \n0-9]{0,200}"
    ) {
        let _ = parse_program(&text);
    }

    #[test]
    fn topology_parser_is_total(text in "\\PC{0,200}") {
        let _ = parse_topology(&text);
    }

    #[test]
    fn bind_parser_is_total(text in "\\PC{0,200}") {
        let _ = parse_bind_file(&text);
    }

    #[test]
    fn printing_a_parsed_program_is_a_fixed_point(
        text in "[a-z>=:;(){},\\\\._ \n0-9]{0,200}"
    ) {
        if let Ok(p) = parse_program(&text) {
            let printed = print_program(&p);
            let reparsed = parse_program(&printed).expect("printed program must reparse");
            prop_assert_eq!(&reparsed, &p);
            prop_assert_eq!(print_program(&reparsed), printed);
        }
    }
}
