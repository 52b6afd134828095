#![no_main]
use consensus_lab::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = Graph::parse_edge_list(text) {
        // Anything accepted must survive a round trip unchanged.
        let again = Graph::parse_edge_list(&g.to_edge_list()).expect("serialized graph parses");
        assert_eq!(again.node_count(), g.node_count());
        assert_eq!(again.edges(), g.edges());
    }
});
