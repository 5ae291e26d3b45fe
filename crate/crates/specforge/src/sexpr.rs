//! Just enough S-expression reading for solver replies.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            _ => None,
        }
    }

    /// An integer literal, including `(- n)`.
    pub fn int(&self) -> Option<i64> {
        match self {
            Sexp::Atom(a) => a.parse().ok(),
            Sexp::List(xs) => match xs.as_slice() {
                [Sexp::Atom(m), x] if m == "-" => x.int().and_then(|v| v.checked_neg()),
                _ => None,
            },
            Sexp::Str(_) => None,
        }
    }

    pub fn bool(&self) -> Option<bool> {
        match self.atom()? {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Incremental reader: feed text, take complete expressions.
#[derive(Debug, Default)]
pub struct Reader {
    buf: String,
}

impl Reader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn feed(&mut self, text: &str) {
        self.buf.push_str(text);
    }

    /// The next complete expression, if the buffer holds one.
    pub fn next(&mut self) -> Result<Option<Sexp>, String> {
        let chars: Vec<char> = self.buf.chars().collect();
        let mut pos = 0;
        match parse(&chars, &mut pos)? {
            Some(x) => {
                let consumed: String = chars[..pos].iter().collect();
                self.buf.drain(..consumed.len());
                Ok(Some(x))
            }
            None => Ok(None),
        }
    }
}

fn skip_ws(s: &[char], pos: &mut usize) {
    while *pos < s.len() {
        if s[*pos].is_whitespace() {
            *pos += 1;
        } else if s[*pos] == ';' {
            while *pos < s.len() && s[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

/// `Ok(None)` when the input ends before the expression does.
fn parse(s: &[char], pos: &mut usize) -> Result<Option<Sexp>, String> {
    skip_ws(s, pos);
    if *pos >= s.len() {
        return Ok(None);
    }
    match s[*pos] {
        '(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(s, pos);
                if *pos >= s.len() {
                    return Ok(None);
                }
                if s[*pos] == ')' {
                    *pos += 1;
                    return Ok(Some(Sexp::List(items)));
                }
                match parse(s, pos)? {
                    Some(x) => items.push(x),
                    None => return Ok(None),
                }
            }
        }
        ')' => Err("unbalanced `)`".into()),
        '"' => {
            *pos += 1;
            let mut out = String::new();
            loop {
                if *pos >= s.len() {
                    return Ok(None);
                }
                if s[*pos] == '"' {
                    if s.get(*pos + 1) == Some(&'"') {
                        out.push('"');
                        *pos += 2;
                        continue;
                    }
                    *pos += 1;
                    return Ok(Some(Sexp::Str(out)));
                }
                out.push(s[*pos]);
                *pos += 1;
            }
        }
        '|' => {
            *pos += 1;
            let start = *pos;
            while *pos < s.len() && s[*pos] != '|' {
                *pos += 1;
            }
            if *pos >= s.len() {
                return Ok(None);
            }
            let name: String = s[start..*pos].iter().collect();
            *pos += 1;
            Ok(Some(Sexp::Atom(name)))
        }
        _ => {
            let start = *pos;
            while *pos < s.len() && !s[*pos].is_whitespace() && !matches!(s[*pos], '(' | ')' | '"' | ';') {
                *pos += 1;
            }
            // An atom at the very end may still be growing.
            if *pos >= s.len() {
                return Ok(None);
            }
            Ok(Some(Sexp::Atom(s[start..*pos].iter().collect())))
        }
    }
}

/// Parse one complete expression.
pub fn parse_one(text: &str) -> Result<Sexp, String> {
    let mut r = Reader::new();
    r.feed(text);
    r.feed("\n");
    r.next()?.ok_or_else(|| "incomplete expression".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_values_and_quoted_names() {
        let x = parse_one("((x (- 3)) (|th!b| 2) (p true))").unwrap();
        let xs = x.list().unwrap();
        assert_eq!(xs[0].list().unwrap()[1].int(), Some(-3));
        assert_eq!(xs[1].list().unwrap()[0].atom(), Some("th!b"));
        assert_eq!(xs[2].list().unwrap()[1].bool(), Some(true));
    }

    #[test]
    fn incremental_feed() {
        let mut r = Reader::new();
        r.feed("(error \"line 1");
        assert_eq!(r.next().unwrap(), None);
        r.feed(" bad\")\nsat\n");
        assert_eq!(r.next().unwrap().unwrap().to_string(), "(error \"line 1 bad\")");
        assert_eq!(r.next().unwrap(), Some(Sexp::Atom("sat".into())));
        assert_eq!(r.next().unwrap(), None);
    }
}
