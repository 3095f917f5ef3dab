/// Runtime control line accepted on the scraper's standard input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlLine {
    Query(Vec<String>),
}

pub fn format_query_line(terms: &[String]) -> String {
    format!("QUERY {}", terms.join(" "))
}

/// Parses `QUERY <terms>`; anything else is ignored.
pub fn parse_control_line(line: &str) -> Option<ControlLine> {
    let rest = line.trim().strip_prefix("QUERY")?;
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return None;
    }
    Some(ControlLine::Query(
        rest.split_whitespace().map(str::to_owned).collect(),
    ))
}
