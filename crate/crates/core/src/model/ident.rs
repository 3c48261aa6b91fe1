/// Splits an identifier into lowercase word tokens.
///
/// Boundaries are camelCase transitions (`songTitle`), the end of an acronym
/// run (`HTTPServer` -> `http`, `server`), and any non-letter character.
/// Digits and underscores are dropped.
pub fn split_identifier(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphabetic() {
            flush(&mut current, &mut tokens);
            continue;
        }
        if i > 0 && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| is_lower(*n));
            if (is_lower(prev) && c.is_uppercase()) || (prev.is_uppercase() && c.is_uppercase() && next_lower) {
                flush(&mut current, &mut tokens);
            }
        }
        current.extend(c.to_lowercase());
    }
    flush(&mut current, &mut tokens);
    tokens
}

// Caseless letters count as lowercase.
fn is_lower(c: char) -> bool {
    c.is_alphabetic() && !c.is_uppercase()
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}
