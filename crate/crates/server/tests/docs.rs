use std::collections::BTreeMap;

use cbt_server::ErrorCode;

/// The error table in the API reference must list exactly the codes the
/// server can emit, with the same statuses.
#[test]
fn api_reference_lists_every_error_code() {
    let doc = include_str!("../../../docs/api.md");
    let section = doc.split("## Errors").nth(1).expect("errors section");
    let documented: BTreeMap<String, u16> = section
        .lines()
        .filter_map(|line| {
            let cells: Vec<&str> = line.split('|').map(str::trim).collect();
            let code = cells.get(1)?.strip_prefix('`')?.strip_suffix('`')?;
            Some((code.to_string(), cells.get(2)?.parse().ok()?))
        })
        .collect();
    let actual: BTreeMap<String, u16> = ErrorCode::ALL
        .iter()
        .map(|c| (c.as_str().to_string(), c.status()))
        .collect();
    assert_eq!(documented, actual);
}

#[test]
fn api_reference_lists_every_route() {
    let doc = include_str!("../../../docs/api.md");
    let source = include_str!("../src/http.rs");
    let routes: Vec<&str> = source
        .lines()
        .filter_map(|l| l.trim().strip_prefix(".route(\""))
        .filter_map(|l| l.split('"').next())
        .collect();
    assert_eq!(routes.len(), 15);
    for route in routes {
        assert!(
            doc.contains(&format!("`{route}`")),
            "{route} is undocumented"
        );
    }
}
