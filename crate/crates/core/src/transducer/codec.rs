//! Plain-text machine format.
//!
//! ```text
//! # comment
//! p 2
//! arity 1 1
//! states 2
//! initial 0
//! 0 0 -> 1 1
//! 0 1 -> 0 0
//! 1 0 -> 1 0
//! 1 1 -> 1 1
//! ```
//!
//! Each transition line is `<state> <d_1 .. d_m> -> <next> <e_1 .. e_n>`.
//! Every (state, input tuple) pair must appear exactly once.

use std::fmt::Write as _;

use super::{alphabet_size, decode_letter, encode_letter, Transducer, TransducerError};
use crate::padic::check_prime;

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Drop unreachable states and renumber in BFS order.
    pub trim: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { trim: true }
    }
}

/// Parses a machine and trims it.
pub fn load(text: &str) -> Result<Transducer, TransducerError> {
    load_with(text, LoadOptions::default())
}

fn syntax(line: usize, msg: impl Into<String>) -> TransducerError {
    TransducerError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_num(line: usize, tok: &str, what: &str) -> Result<u64, TransducerError> {
    tok.parse::<u64>()
        .map_err(|_| syntax(line, format!("expected {what}, found '{tok}'")))
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    key: &str,
    count: usize,
    last_line: usize,
) -> Result<(usize, Vec<u64>), TransducerError> {
    let (line, toks) = lines
        .next()
        .ok_or_else(|| syntax(last_line, format!("missing '{key}' header")))?;
    if toks[0] != key || toks.len() != count + 1 {
        return Err(syntax(
            line,
            format!("expected '{key}' followed by {count} number(s)"),
        ));
    }
    let vals = toks[1..]
        .iter()
        .map(|t| parse_num(line, t, "a number"))
        .collect::<Result<_, _>>()?;
    Ok((line, vals))
}

fn letter_text(letter: usize, arity: usize, prime: u32) -> String {
    decode_letter(letter, arity, prime)
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn load_with(text: &str, opts: LoadOptions) -> Result<Transducer, TransducerError> {
    let last_line = text.lines().count().max(1);
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    });

    let (pline, p) = header(&mut lines, "p", 1, last_line)?;
    let prime = u32::try_from(p[0]).map_err(|_| syntax(pline, "prime too large"))?;
    check_prime(prime)?;
    let (aline, ar) = header(&mut lines, "arity", 2, last_line)?;
    let (m, n) = (ar[0] as usize, ar[1] as usize);
    if m == 0 || n == 0 || m > 8 || n > 8 {
        return Err(syntax(aline, "arities must be between 1 and 8"));
    }
    let (sline, st) = header(&mut lines, "states", 1, last_line)?;
    let states = st[0] as usize;
    if states == 0 || states > u32::MAX as usize {
        return Err(syntax(sline, "state count out of range"));
    }
    let (iline, ini) = header(&mut lines, "initial", 1, last_line)?;
    let initial = ini[0] as usize;
    if initial >= states {
        return Err(TransducerError::UnknownInitial {
            line: iline,
            state: initial,
        });
    }

    let letters = alphabet_size(prime, m);
    let cells = states
        .checked_mul(letters)
        .filter(|&c| c <= 1 << 28)
        .ok_or_else(|| syntax(sline, "transition table too large"))?;
    let mut next = vec![u32::MAX; cells];
    let mut out = vec![0u32; cells];

    let digit = |line: usize, tok: &str| -> Result<u8, TransducerError> {
        let d = parse_num(line, tok, "a digit")?;
        if d >= prime as u64 {
            return Err(TransducerError::LetterOutOfRange {
                line,
                letter: d,
                prime,
            });
        }
        Ok(d as u8)
    };

    for (line, toks) in lines {
        let arrow = toks
            .iter()
            .position(|&t| t == "->")
            .ok_or_else(|| syntax(line, "expected '->'"))?;
        if arrow != m + 1 || toks.len() != m + n + 3 {
            return Err(syntax(
                line,
                format!("expected '<state> {m} digit(s) -> <next> {n} digit(s)'"),
            ));
        }
        let state = parse_num(line, toks[0], "a state")? as usize;
        if state >= states {
            return Err(TransducerError::UnknownState { line, state });
        }
        let input: Vec<u8> = toks[1..arrow]
            .iter()
            .map(|t| digit(line, t))
            .collect::<Result<_, _>>()?;
        let target = parse_num(line, toks[arrow + 1], "a state")? as usize;
        if target >= states {
            return Err(TransducerError::UnknownState {
                line,
                state: target,
            });
        }
        let output: Vec<u8> = toks[arrow + 2..]
            .iter()
            .map(|t| digit(line, t))
            .collect::<Result<_, _>>()?;
        let idx = state * letters + encode_letter(&input, prime);
        if next[idx] != u32::MAX {
            return Err(TransducerError::DuplicateTransition {
                line,
                state,
                input: toks[1..arrow].join(" "),
            });
        }
        next[idx] = target as u32;
        out[idx] = encode_letter(&output, prime) as u32;
    }

    if let Some(idx) = next.iter().position(|&s| s == u32::MAX) {
        return Err(TransducerError::MissingTransition {
            line: last_line,
            state: idx / letters,
            input: letter_text(idx % letters, m, prime),
        });
    }
    let t = Transducer::new(prime, m, n, initial, next, out)?;
    Ok(if opts.trim { t.trim() } else { t })
}

/// Serializes every transition, states and letters ascending.
pub fn save(t: &Transducer) -> String {
    let mut s = String::new();
    let (p, m, n) = (t.prime(), t.in_arity(), t.out_arity());
    writeln!(s, "p {p}").unwrap();
    writeln!(s, "arity {m} {n}").unwrap();
    writeln!(s, "states {}", t.num_states()).unwrap();
    writeln!(s, "initial {}", t.initial()).unwrap();
    for state in 0..t.num_states() {
        for letter in 0..t.input_letters() {
            let (next, o) = t.step(state, letter);
            writeln!(
                s,
                "{state} {} -> {next} {}",
                letter_text(letter, m, p),
                letter_text(o, n, p)
            )
            .unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const ODOMETER: &str = "\
# z -> z + 1
p 2
arity 1 1
states 2
initial 0
0 0 -> 1 1
0 1 -> 0 0
1 0 -> 1 0
1 1 -> 1 1
";

    #[test]
    fn loads_and_runs() {
        let t = load(ODOMETER).unwrap();
        assert_eq!(t.run_word(&[1, 1]), vec![0, 0]);
        assert_eq!(load(&save(&t)).unwrap(), t);
    }

    #[test]
    fn multi_arity_roundtrip() {
        let add = Transducer::adder(3).unwrap();
        let text = save(&add);
        assert!(text.contains("0 2 2 -> 1 1"));
        assert_eq!(load(&text).unwrap(), add);
    }

    #[test]
    fn duplicate_transition() {
        let text = format!("{ODOMETER}1 1 -> 0 0\n");
        assert_eq!(
            load(&text),
            Err(TransducerError::DuplicateTransition {
                line: 10,
                state: 1,
                input: "1".into()
            })
        );
    }

    #[test]
    fn missing_transition() {
        let text = ODOMETER.replace("1 0 -> 1 0\n", "");
        assert!(matches!(
            load(&text),
            Err(TransducerError::MissingTransition { state: 1, .. })
        ));
    }

    #[test]
    fn letter_out_of_range() {
        let text = ODOMETER.replace("1 1 -> 1 1", "1 2 -> 1 1");
        assert_eq!(
            load(&text),
            Err(TransducerError::LetterOutOfRange {
                line: 9,
                letter: 2,
                prime: 2
            })
        );
    }

    #[test]
    fn unknown_initial() {
        let text = ODOMETER.replace("initial 0", "initial 5");
        assert_eq!(
            load(&text),
            Err(TransducerError::UnknownInitial { line: 5, state: 5 })
        );
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = ODOMETER.replace("0 1 -> 0 0", "0 1 => 0 0");
        assert!(matches!(
            load(&text),
            Err(TransducerError::Syntax { line: 7, .. })
        ));
        assert!(matches!(
            load("p 4\narity 1 1\n"),
            Err(TransducerError::Padic(_))
        ));
        assert!(matches!(load(""), Err(TransducerError::Syntax { .. })));
    }

    #[test]
    fn load_trims_unless_asked() {
        let text = "p 2\narity 1 1\nstates 2\ninitial 0\n\
                    0 0 -> 0 0\n0 1 -> 0 1\n1 0 -> 0 0\n1 1 -> 1 1\n";
        assert_eq!(load(text).unwrap().num_states(), 1);
        let raw = load_with(text, LoadOptions { trim: false }).unwrap();
        assert_eq!(raw.num_states(), 2);
    }
}
