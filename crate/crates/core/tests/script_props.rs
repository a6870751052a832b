use gavis::script::{check, parse_source, pretty_print, validate};
use proptest::prelude::*;

mod common;
use common::{line_col, noisy_source, script};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_pretty_print(s in script()) {
        let text = pretty_print(&s);
        let parsed = parse_source(&text);
        prop_assert!(parsed.is_ok(), "{text}\n{parsed:?}");
        prop_assert_eq!(parsed.unwrap(), s);
    }

    #[test]
    fn diagnostic_spans_index_the_source(source in noisy_source()) {
        for d in check(&source) {
            let text = d.span.text(&source);
            prop_assert!(text.is_some(), "{} {:?} in {source:?}", d.code, d.span);
            prop_assert_eq!(line_col(&source, d.span.offset), (d.span.line, d.span.col), "{} in {:?}", d.code, source);
        }
    }

    #[test]
    fn parsed_spans_index_the_source(s in script()) {
        let text = pretty_print(&s);
        let parsed = parse_source(&text).unwrap();
        for stmt in &parsed.statements {
            let slice = stmt.span.text(&text);
            prop_assert!(slice.is_some());
            prop_assert!(!slice.unwrap().contains('\n'));
        }
    }

    #[test]
    fn validation_is_deterministic_and_ordered(source in noisy_source()) {
        if let Ok(script) = parse_source(&source) {
            let first = validate(&script);
            prop_assert_eq!(&first, &validate(&script));
            let offsets: Vec<usize> = first.iter().map(|d| d.span.offset).collect();
            let mut sorted = offsets.clone();
            sorted.sort_unstable();
            prop_assert_eq!(offsets, sorted);
        }
    }
}
