//! Text formats for election instances and scoring rules.
//!
//! A profile block looks like:
//!
//! ```text
//! # any line starting with '#' is a comment
//! m 4 k 2
//! alts a b c d
//! 2 a b
//! 1 c
//! committee a b
//! winners
//! a b
//! a c
//! ```
//!
//! The `m`/`k` header is mandatory and starts a block; `alts` (optional)
//! names the alternatives, defaulting to `a0..`; every following numeric
//! line is a vote (multiplicity then approved names); `committee` labels a
//! single committee and `winners` introduces one committee per line. A file
//! with several blocks (each starting with an `m` header) is a sample set.
//!
//! A rule file has one entry per line, either all bivariate or all
//! univariate, with values as integers or fractions:
//!
//! ```text
//! bxy 1 1 1
//! bxy 2 2 3/2
//! ```
//!
//! ```text
//! u 1 1
//! u 2 2
//! ```
//!
//! Missing entries default to zero; the dimensions come from context.

use crate::model::{
    BivariateScoring, Committee, ModelError, Names, Profile, UnivariateScoring,
};
use crate::Q;
use num::BigInt;
use num::Zero;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn perr(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

/// Parse an integer or `num/den` fraction into an exact rational.
pub fn parse_rational(token: &str) -> Option<Q> {
    match token.split_once('/') {
        None => BigInt::from_str(token).ok().map(Q::from_integer),
        Some((n, d)) => {
            let n = BigInt::from_str(n).ok()?;
            let d = BigInt::from_str(d).ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
    }
}

/// Render a rational as `num/den` (always with the denominator).
pub fn format_rational(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// One parsed profile block: the election, its committee size, display
/// names, and any committee labels the file carried.
#[derive(Debug, Clone)]
pub struct ProfileBlock {
    pub profile: Profile,
    pub k: usize,
    pub names: Names,
    pub committee: Option<Committee>,
    pub winners: Option<Vec<Committee>>,
}

fn parse_committee_names(
    tokens: &[&str],
    names: &Names,
    line: usize,
) -> Result<Committee, IoError> {
    let mut members = BTreeSet::new();
    for t in tokens {
        let a = names
            .index_of(t)
            .ok_or_else(|| perr(line, format!("unknown alternative name '{t}'")))?;
        if !members.insert(a.0) {
            return Err(perr(line, format!("repeated alternative '{t}'")));
        }
    }
    if members.is_empty() {
        return Err(perr(line, "empty committee"));
    }
    Ok(Committee::new(members)?)
}

fn parse_block(lines: &[(usize, &str)]) -> Result<ProfileBlock, IoError> {
    let (first_no, first) = lines[0];
    let head: Vec<&str> = first.split_whitespace().collect();
    if head.len() != 4 || head[0] != "m" || head[2] != "k" {
        return Err(perr(first_no, "expected header 'm <count> k <size>'"));
    }
    let m: usize = head[1]
        .parse()
        .map_err(|_| perr(first_no, format!("bad alternative count '{}'", head[1])))?;
    let k: usize = head[3]
        .parse()
        .map_err(|_| perr(first_no, format!("bad committee size '{}'", head[3])))?;
    if m == 0 || k == 0 || k >= m {
        return Err(perr(first_no, format!("need 0 < k < m, got m={m} k={k}")));
    }

    let mut names: Option<Names> = None;
    let mut votes: Vec<(Vec<usize>, u64)> = Vec::new();
    let mut committee_line: Option<(usize, Vec<String>)> = None;
    let mut winner_lines: Option<Vec<(usize, Vec<String>)>> = None;
    let mut in_winners = false;

    for &(no, line) in &lines[1..] {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "alts" => {
                if names.is_some() || !votes.is_empty() {
                    return Err(perr(no, "'alts' must come right after the header"));
                }
                if tokens.len() != m + 1 {
                    return Err(perr(no, format!("expected {m} names, got {}", tokens.len() - 1)));
                }
                names = Some(Names::new(tokens[1..].iter().map(|s| s.to_string()).collect())?);
            }
            "committee" => {
                if committee_line.is_some() {
                    return Err(perr(no, "second 'committee' line"));
                }
                in_winners = false;
                committee_line =
                    Some((no, tokens[1..].iter().map(|s| s.to_string()).collect()));
            }
            "winners" => {
                if winner_lines.is_some() {
                    return Err(perr(no, "second 'winners' section"));
                }
                if tokens.len() != 1 {
                    return Err(perr(no, "'winners' takes no arguments"));
                }
                winner_lines = Some(Vec::new());
                in_winners = true;
            }
            _ if in_winners => {
                winner_lines
                    .as_mut()
                    .unwrap()
                    .push((no, tokens.iter().map(|s| s.to_string()).collect()));
            }
            _ => {
                let mult: u64 = tokens[0].parse().map_err(|_| {
                    perr(no, format!("expected a vote multiplicity, got '{}'", tokens[0]))
                })?;
                if mult == 0 {
                    return Err(perr(no, "vote multiplicity must be positive"));
                }
                if tokens.len() == 1 {
                    return Err(perr(no, "vote has no alternatives"));
                }
                let nm = names.get_or_insert_with(|| Names::default_for(m));
                let mut alts = Vec::new();
                for t in &tokens[1..] {
                    let a = nm
                        .index_of(t)
                        .ok_or_else(|| perr(no, format!("unknown alternative name '{t}'")))?;
                    if alts.contains(&a.0) {
                        return Err(perr(no, format!("repeated alternative '{t}'")));
                    }
                    alts.push(a.0);
                }
                votes.push((alts, mult));
            }
        }
    }

    let names = names.unwrap_or_else(|| Names::default_for(m));
    let profile = Profile::from_votes(m, votes)?;
    let committee = committee_line
        .map(|(no, toks)| {
            let refs: Vec<&str> = toks.iter().map(|s| s.as_str()).collect();
            let c = parse_committee_names(&refs, &names, no)?;
            if c.len() != k {
                return Err(perr(no, format!("committee has {} members, expected {k}", c.len())));
            }
            Ok(c)
        })
        .transpose()?;
    let winners = winner_lines
        .map(|lines| {
            if lines.is_empty() {
                return Err(IoError::Shape("'winners' section is empty".into()));
            }
            lines
                .into_iter()
                .map(|(no, toks)| {
                    let refs: Vec<&str> = toks.iter().map(|s| s.as_str()).collect();
                    let c = parse_committee_names(&refs, &names, no)?;
                    if c.len() != k {
                        return Err(perr(
                            no,
                            format!("committee has {} members, expected {k}", c.len()),
                        ));
                    }
                    Ok(c)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok(ProfileBlock { profile, k, names, committee, winners })
}

/// Parse a sample set: one block per `m`-header.
pub fn parse_samples(text: &str) -> Result<Vec<ProfileBlock>, IoError> {
    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let starts_block = tokens.len() == 4
            && tokens[0] == "m"
            && tokens[2] == "k"
            && tokens[1].parse::<usize>().is_ok()
            && tokens[3].parse::<usize>().is_ok();
        if starts_block {
            blocks.push(Vec::new());
        } else if blocks.is_empty() {
            return Err(perr(idx + 1, "expected header 'm <count> k <size>'"));
        }
        blocks.last_mut().unwrap().push((idx + 1, line));
    }
    if blocks.is_empty() {
        return Err(IoError::Shape("no profile found".into()));
    }
    blocks.iter().map(|b| parse_block(b)).collect()
}

/// Parse a file holding exactly one profile block.
pub fn parse_profile(text: &str) -> Result<ProfileBlock, IoError> {
    let mut blocks = parse_samples(text)?;
    if blocks.len() != 1 {
        return Err(IoError::Shape(format!("expected one profile, found {}", blocks.len())));
    }
    Ok(blocks.pop().unwrap())
}

fn emit_committee(c: &Committee, names: &Names, out: &mut String) {
    let mut first = true;
    for a in c.members() {
        if !first {
            out.push(' ');
        }
        out.push_str(names.name(*a));
        first = false;
    }
    out.push('\n');
}

/// Render a profile block in the format `parse_profile` reads.
pub fn emit_profile(block: &ProfileBlock) -> String {
    let mut out = String::new();
    let m = block.profile.m();
    writeln!(out, "m {m} k {}", block.k).unwrap();
    write!(out, "alts").unwrap();
    for i in 0..m {
        write!(out, " {}", block.names.name(crate::model::Alternative(i))).unwrap();
    }
    out.push('\n');
    for v in block.profile.votes() {
        write!(out, "{}", v.multiplicity).unwrap();
        for a in &v.alternatives {
            write!(out, " {}", block.names.name(*a)).unwrap();
        }
        out.push('\n');
    }
    if let Some(c) = &block.committee {
        out.push_str("committee ");
        emit_committee(c, &block.names, &mut out);
    }
    if let Some(ws) = &block.winners {
        out.push_str("winners\n");
        for w in ws {
            emit_committee(w, &block.names, &mut out);
        }
    }
    out
}

/// Render a sample set as consecutive profile blocks.
pub fn emit_samples(blocks: &[ProfileBlock]) -> String {
    blocks.iter().map(emit_profile).collect()
}

/// A rule file before dimensions are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedRule {
    Bivariate(Vec<(usize, usize, Q)>),
    Univariate(Vec<(usize, Q)>),
}

/// Parse a rule file: `bxy <x> <y> <value>` or `u <x> <value>` lines.
pub fn parse_rule(text: &str) -> Result<ParsedRule, IoError> {
    let mut bi: Vec<(usize, usize, Q)> = Vec::new();
    let mut uni: Vec<(usize, Q)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "bxy" => {
                if tokens.len() != 4 {
                    return Err(perr(no, "expected 'bxy <x> <y> <value>'"));
                }
                let x: usize =
                    tokens[1].parse().map_err(|_| perr(no, format!("bad x '{}'", tokens[1])))?;
                let y: usize =
                    tokens[2].parse().map_err(|_| perr(no, format!("bad y '{}'", tokens[2])))?;
                let v = parse_rational(tokens[3])
                    .ok_or_else(|| perr(no, format!("bad value '{}'", tokens[3])))?;
                if bi.iter().any(|&(bx, by, _)| bx == x && by == y) {
                    return Err(perr(no, format!("duplicate entry for ({x},{y})")));
                }
                bi.push((x, y, v));
            }
            "u" => {
                if tokens.len() != 3 {
                    return Err(perr(no, "expected 'u <x> <value>'"));
                }
                let x: usize =
                    tokens[1].parse().map_err(|_| perr(no, format!("bad x '{}'", tokens[1])))?;
                let v = parse_rational(tokens[2])
                    .ok_or_else(|| perr(no, format!("bad value '{}'", tokens[2])))?;
                if uni.iter().any(|&(ux, _)| ux == x) {
                    return Err(perr(no, format!("duplicate entry for {x}")));
                }
                uni.push((x, v));
            }
            other => return Err(perr(no, format!("expected 'bxy' or 'u', got '{other}'"))),
        }
        if !bi.is_empty() && !uni.is_empty() {
            return Err(perr(no, "rule file mixes bivariate and univariate entries"));
        }
    }
    if bi.is_empty() && uni.is_empty() {
        return Err(IoError::Shape("rule file has no entries".into()));
    }
    if !bi.is_empty() {
        Ok(ParsedRule::Bivariate(bi))
    } else {
        Ok(ParsedRule::Univariate(uni))
    }
}

impl ParsedRule {
    /// Materialize as a bivariate scoring function for the given dimensions.
    pub fn to_bivariate(&self, m: usize, k: usize) -> Result<BivariateScoring, IoError> {
        match self {
            ParsedRule::Bivariate(entries) => Ok(BivariateScoring::new(
                m,
                k,
                entries.iter().map(|(x, y, v)| ((*x, *y), v.clone())),
            )?),
            ParsedRule::Univariate(_) => {
                let s = self.to_univariate(k)?;
                Ok(BivariateScoring::from_univariate(m, &s)?)
            }
        }
    }

    /// Materialize as a univariate scoring function; bivariate input errors.
    pub fn to_univariate(&self, k: usize) -> Result<UnivariateScoring, IoError> {
        match self {
            ParsedRule::Bivariate(_) => Err(IoError::Shape(
                "expected a univariate rule, found bivariate entries".into(),
            )),
            ParsedRule::Univariate(entries) => {
                let mut values = vec![Q::zero(); k + 1];
                for (x, v) in entries {
                    if *x > k {
                        return Err(IoError::Shape(format!("entry at {x} exceeds k={k}")));
                    }
                    values[*x] = v.clone();
                }
                Ok(UnivariateScoring::new(k, values)?)
            }
        }
    }
}

/// Render a bivariate rule with every domain entry explicit.
pub fn emit_bivariate(f: &BivariateScoring) -> String {
    let mut out = String::new();
    for &(x, y) in f.domain().pairs() {
        writeln!(out, "bxy {x} {y} {}", format_rational(f.value(x, y))).unwrap();
    }
    out
}

/// Render a univariate rule with every entry explicit.
pub fn emit_univariate(s: &UnivariateScoring) -> String {
    let mut out = String::new();
    for (x, v) in s.values().iter().enumerate() {
        writeln!(out, "u {x} {}", format_rational(v)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qr};

    #[test]
    fn parse_profile_example() {
        let text = "# demo\nm 4 k 2\nalts a b c d\n2 a b\n1 c\ncommittee a b\nwinners\na b\na c\n";
        let block = parse_profile(text).unwrap();
        assert_eq!(block.profile.m(), 4);
        assert_eq!(block.k, 2);
        assert_eq!(block.profile.votes().len(), 2);
        assert_eq!(block.profile.voter_count(), 3);
        assert_eq!(block.committee.unwrap(), Committee::new([0, 1]).unwrap());
        assert_eq!(
            block.winners.unwrap(),
            vec![Committee::new([0, 1]).unwrap(), Committee::new([0, 2]).unwrap()]
        );
    }

    #[test]
    fn default_names_when_alts_missing() {
        let block = parse_profile("m 3 k 2\n1 a0 a2\n").unwrap();
        assert_eq!(block.profile.votes()[0].alternatives.len(), 2);
        assert!(block.committee.is_none());
        assert!(block.winners.is_none());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases: &[(&str, usize)] = &[
            ("m 3 k 2\n1 zz\n", 2),
            ("m 3 k 2\nx a0\n", 2),
            ("m 3 k 2\n0 a0\n", 2),
            ("m 3 k 2\n# c\n1 a0\ncommittee a0 a0\n", 4),
            ("m 3 k 5\n1 a0\n", 1),
            ("m 3\n1 a0\n", 1),
            ("m 3 k 2\nalts x y\n", 2),
            ("m 3 k 2\n1 a0\nalts x y z\n", 3),
        ];
        for (text, line) in cases {
            match parse_profile(text) {
                Err(IoError::Parse { line: l, .. }) => assert_eq!(l, *line, "for {text:?}"),
                other => panic!("expected line error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn empty_winner_section_rejected() {
        assert!(parse_profile("m 3 k 2\n1 a0\nwinners\n").is_err());
    }

    #[test]
    fn profile_roundtrip() {
        let text = "m 4 k 2\nalts w x y z\n2 w x\n1 y\ncommittee w x\nwinners\nw x\nw y\n";
        let block = parse_profile(text).unwrap();
        assert_eq!(emit_profile(&block), text);
    }

    #[test]
    fn sample_set_roundtrip() {
        let text = "m 3 k 2\nalts a b c\n1 a\nwinners\na b\na c\nm 4 k 2\nalts a b c d\n2 a d\nwinners\na d\n";
        let blocks = parse_samples(text).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(emit_samples(&blocks), text);
    }

    #[test]
    fn vote_merging_in_files() {
        let block = parse_profile("m 3 k 2\n1 a0 a1\n2 a1 a0\n").unwrap();
        assert_eq!(block.profile.votes().len(), 1);
        assert_eq!(block.profile.votes()[0].multiplicity, 3);
    }

    #[test]
    fn rule_parse_and_materialize() {
        let r = parse_rule("# cc\nbxy 1 1 1\nbxy 1 2 1\nbxy 2 2 1\n").unwrap();
        let f = r.to_bivariate(3, 2).unwrap();
        assert_eq!(f, BivariateScoring::cc(3, 2).unwrap());

        let u = parse_rule("u 1 1\nu 2 2\n").unwrap();
        let s = u.to_univariate(2).unwrap();
        assert_eq!(s, UnivariateScoring::av(2));
        // A univariate file also lifts to a bivariate rule.
        let lifted = u.to_bivariate(4, 2).unwrap();
        assert_eq!(lifted, BivariateScoring::from_univariate(4, &s).unwrap());
    }

    #[test]
    fn rule_values_accept_fractions() {
        let r = parse_rule("u 1 1/3\nu 2 5/3\n").unwrap();
        let s = r.to_univariate(2).unwrap();
        assert_eq!(s.value(1), &qr(1, 3));
        assert_eq!(s.value(2), &qr(5, 3));
    }

    #[test]
    fn rule_parse_errors() {
        assert!(parse_rule("").is_err());
        assert!(parse_rule("bxy 1 1 1\nu 1 1\n").is_err());
        assert!(parse_rule("bxy 1 1\n").is_err());
        assert!(parse_rule("u 1 1/0\n").is_err());
        assert!(parse_rule("u 1 1\nu 1 2\n").is_err());
        assert!(parse_rule("q 1 1\n").is_err());
        // Out-of-domain and non-monotone entries fail at materialization.
        let r = parse_rule("bxy 9 9 1\n").unwrap();
        assert!(r.to_bivariate(3, 2).is_err());
        let r = parse_rule("u 3 1\n").unwrap();
        assert!(r.to_univariate(2).is_err());
        let r = parse_rule("u 1 2\nu 2 1\n").unwrap();
        assert!(r.to_univariate(2).is_err());
    }

    #[test]
    fn rule_roundtrip() {
        for f in [
            BivariateScoring::cc(4, 2).unwrap(),
            BivariateScoring::av(4, 2).unwrap(),
            BivariateScoring::trivial(4, 2).unwrap(),
        ] {
            let text = emit_bivariate(&f);
            assert_eq!(parse_rule(&text).unwrap().to_bivariate(4, 2).unwrap(), f);
        }
        let s = UnivariateScoring::new(2, vec![q(0), qr(1, 2), qr(3, 2)]).unwrap();
        let text = emit_univariate(&s);
        assert_eq!(parse_rule(&text).unwrap().to_univariate(2).unwrap(), s);
        // The all-zero rule stays identifiable because entries are explicit.
        let t = emit_univariate(&UnivariateScoring::trivial(2));
        assert!(parse_rule(&t).unwrap().to_univariate(2).unwrap().is_trivial());
    }

    #[test]
    fn rationals_parse_and_format() {
        assert_eq!(parse_rational("7"), Some(q(7)));
        assert_eq!(parse_rational("-3/6"), Some(qr(-1, 2)));
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&qr(-1, 2)), "-1/2");
        assert_eq!(format_rational(&q(4)), "4/1");
    }
}
