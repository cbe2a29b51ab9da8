//! Modal formulas over a finite set of propositional atoms.
//!
//! The only primitive connectives are `⊥`, `→`, `□` and `◇`. Negation is the
//! abbreviation `φ → ⊥`; the surface syntax accepts `~φ` and desugars it at
//! parse time.
//!
//! Surface syntax:
//!
//! ```text
//! formula := unary ( "->" formula )?          right associative
//! unary   := "~" unary | "[]" unary | "<>" unary | primary
//! primary := atom | "bot" | "(" formula ")"
//! atom    := [a-z][a-z0-9_]*  (but not "bot")
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// A propositional atom. Names follow `[a-z][a-z0-9_]*` and exclude `bot`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(String);

impl Atom {
    /// Builds an atom, rejecting names outside the atom grammar.
    pub fn new(name: &str) -> Result<Atom, ParseError> {
        if is_atom_name(name) {
            Ok(Atom(name.to_string()))
        } else {
            Err(ParseError::new(0, "atom name matching [a-z][a-z0-9_]* other than `bot`"))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// True if `name` is a legal atom name.
pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    name != "bot" && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A modal formula.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Atom),
    Bottom,
    Implies(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
}

impl Formula {
    /// Atom by name. Panics on an illegal name; use [`Atom::new`] for checked input.
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Atom::new(name).expect("illegal atom name"))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// `φ → ⊥`.
    pub fn not(inner: Formula) -> Formula {
        Formula::implies(inner, Formula::Bottom)
    }

    pub fn boxed(inner: Formula) -> Formula {
        Formula::Box(Box::new(inner))
    }

    pub fn diamond(inner: Formula) -> Formula {
        Formula::Diamond(Box::new(inner))
    }

    pub fn is_modal_free(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Bottom => true,
            Formula::Implies(a, b) => a.is_modal_free() && b.is_modal_free(),
            Formula::Box(_) | Formula::Diamond(_) => false,
        }
    }

    /// Nesting depth of connectives; atoms and `⊥` have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bottom => 0,
            Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Box(a) | Formula::Diamond(a) => 1 + a.depth(),
        }
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bottom => 1,
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
            Formula::Box(a) | Formula::Diamond(a) => 1 + a.size(),
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Bottom => Vec::new(),
            Formula::Implies(a, b) => alloc::vec![&**a, &**b],
            Formula::Box(a) | Formula::Diamond(a) => alloc::vec![&**a],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Bottom => f.write_str("bot"),
            Formula::Implies(a, b) => {
                if matches!(**a, Formula::Implies(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
            Formula::Box(a) => write_unary(f, "[]", a),
            Formula::Diamond(a) => write_unary(f, "<>", a),
        }
    }
}

fn write_unary(f: &mut fmt::Formatter<'_>, op: &str, a: &Formula) -> fmt::Result {
    if matches!(a, Formula::Implies(..)) {
        write!(f, "{op}({a})")
    } else {
        write!(f, "{op}{a}")
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A syntax error with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at offset {position}: expected {expected}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
}

impl ParseError {
    fn new(position: usize, expected: &str) -> ParseError {
        ParseError { position, expected: expected.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Bot,
    Tilde,
    BoxOp,
    DiamondOp,
    Arrow,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => {
                out.push((start, Token::Tilde));
                i += 1;
            }
            b'(' => {
                out.push((start, Token::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Token::RParen));
                i += 1;
            }
            b'[' if bytes.get(i + 1) == Some(&b']') => {
                out.push((start, Token::BoxOp));
                i += 2;
            }
            b'<' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Token::DiamondOp));
                i += 2;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Token::Arrow));
                i += 2;
            }
            b'a'..=b'z' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &src[start..i];
                if word == "bot" {
                    out.push((start, Token::Bot));
                } else {
                    out.push((start, Token::Ident(word.to_string())));
                }
            }
            _ => return Err(ParseError::new(start, "`~`, `[]`, `<>`, `->`, `(`, `)`, `bot` or an atom")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Token::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Token::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::BoxOp) => {
                self.pos += 1;
                Ok(Formula::boxed(self.unary()?))
            }
            Some(Token::DiamondOp) => {
                self.pos += 1;
                Ok(Formula::diamond(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(Formula::Atom(Atom(name)))
            }
            Some(Token::Bot) => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(ParseError::new(self.offset(), "`)` or `->`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(ParseError::new(at, "an atom, `bot`, `(`, `~`, `[]` or `<>`")),
        }
    }
}

/// Parses a formula from its surface syntax.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, end: src.len() };
    let f = p.formula()?;
    if p.pos != p.tokens.len() {
        return Err(ParseError::new(p.offset(), "`->` or end of input"));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Formula, ParseError> {
        parse(s)
    }
}

/// Canonical rendering with minimal parentheses. Inverse of [`parse`].
pub fn render(f: &Formula) -> String {
    f.to_string()
}

/// Replaces every `◇ψ` by `(□(ψ → ⊥)) → ⊥`, bottom-up.
pub fn rewrite_diamond(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Bottom => f.clone(),
        Formula::Implies(a, b) => Formula::implies(rewrite_diamond(a), rewrite_diamond(b)),
        Formula::Box(a) => Formula::boxed(rewrite_diamond(a)),
        Formula::Diamond(a) => Formula::not(Formula::boxed(Formula::not(rewrite_diamond(a)))),
    }
}

/// Distinct subformulas, every child listed before its parent; `f` comes last.
pub fn subformulas(f: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, seen: &mut BTreeSet<Formula>, out: &mut Vec<Formula>) {
        if seen.contains(f) {
            return;
        }
        for c in f.children() {
            walk(c, seen, out);
        }
        seen.insert(f.clone());
        out.push(f.clone());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    walk(f, &mut seen, &mut out);
    out
}

/// Atoms occurring in `f`, sorted.
pub fn atoms_of(f: &Formula) -> BTreeSet<Atom> {
    fn walk(f: &Formula, out: &mut BTreeSet<Atom>) {
        match f {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Bottom => {}
            Formula::Implies(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Box(a) | Formula::Diamond(a) => walk(a, out),
        }
    }
    let mut out = BTreeSet::new();
    walk(f, &mut out);
    out
}

/// Random-access view of all formulas up to a depth, in enumeration order.
///
/// Formulas are grouped by exact depth. Depth 0 lists the atoms in the given
/// order followed by `⊥`. Depth `d` lists `□ψ` then `◇ψ` for each `ψ` of depth
/// `d-1` (when modal operators are allowed), then every `ψ → χ` whose deeper
/// side has depth `d-1`, ordered by the positions of `ψ` and `χ`.
#[derive(Clone, Debug)]
pub struct FormulaSpace {
    atoms: Vec<Atom>,
    allow_modal: bool,
    /// `upto[d]` = number of formulas of depth ≤ d.
    upto: Vec<u128>,
}

impl FormulaSpace {
    pub fn new(atoms: &[Atom], max_depth: usize, allow_modal: bool) -> FormulaSpace {
        let mut upto: Vec<u128> = Vec::with_capacity(max_depth + 1);
        upto.push(atoms.len() as u128 + 1);
        for d in 1..=max_depth {
            let n = upto[d - 1];
            let m = if d >= 2 { upto[d - 2] } else { 0 };
            let level_prev = n - m;
            let unary = if allow_modal { 2 * level_prev } else { 0 };
            let level = unary.saturating_add(n.saturating_mul(n) - m * m);
            upto.push(n.saturating_add(level));
        }
        FormulaSpace { atoms: atoms.to_vec(), allow_modal, upto }
    }

    pub fn max_depth(&self) -> usize {
        self.upto.len() - 1
    }

    /// Number of formulas in the space.
    pub fn len(&self) -> u128 {
        *self.upto.last().expect("non-empty")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The formula at position `index`, or `None` past the end.
    pub fn get(&self, index: u128) -> Option<Formula> {
        (index < self.len()).then(|| self.nth(index))
    }

    fn nth(&self, index: u128) -> Formula {
        let depth = self.upto.iter().position(|&n| index < n).expect("index in range");
        if depth == 0 {
            let i = index as usize;
            return if i < self.atoms.len() { Formula::Atom(self.atoms[i].clone()) } else { Formula::Bottom };
        }
        let n = self.upto[depth - 1];
        let m = if depth >= 2 { self.upto[depth - 2] } else { 0 };
        let mut k = index - n;
        if self.allow_modal {
            let level_prev = n - m;
            if k < level_prev {
                return Formula::boxed(self.nth(m + k));
            }
            k -= level_prev;
            if k < level_prev {
                return Formula::diamond(self.nth(m + k));
            }
            k -= level_prev;
        }
        // Pairs (i, j) over the first n formulas, skipping those with both below m.
        let narrow = m * (n - m);
        let (i, j) = if k < narrow {
            (k / (n - m), m + k % (n - m))
        } else {
            let k = k - narrow;
            (m + k / n, k % n)
        };
        Formula::implies(self.nth(i), self.nth(j))
    }

    /// All formulas in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = Formula> + '_ {
        (0..self.len()).map(move |i| self.nth(i))
    }
}

/// Every formula over `atoms` of depth at most `max_depth`, in a fixed order.
pub fn enumerate_formulas(atoms: &[Atom], max_depth: usize, allow_modal: bool) -> impl Iterator<Item = Formula> {
    let space = FormulaSpace::new(atoms, max_depth, allow_modal);
    (0..space.len()).map(move |i| space.nth(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn p() -> Formula {
        Formula::atom("p")
    }

    #[test]
    fn parses_and_renders_examples() {
        assert_eq!(parse("~p").unwrap(), Formula::not(p()));
        assert_eq!(render(&parse("~p").unwrap()), "p -> bot");
        assert_eq!(render(&parse("[]p").unwrap()), "[]p");
        assert_eq!(render(&parse("~~p").unwrap()), "(p -> bot) -> bot");
        assert_eq!(render(&parse("<>(p -> q)").unwrap()), "<>(p -> q)");
        assert_eq!(render(&parse("((p))").unwrap()), "p");
    }

    #[test]
    fn arrow_is_right_associative() {
        let f = parse("p -> q -> r").unwrap();
        let g = Formula::implies(p(), Formula::implies(Formula::atom("q"), Formula::atom("r")));
        assert_eq!(f, g);
        assert_eq!(render(&f), "p -> q -> r");
        let h = parse("(p -> q) -> r").unwrap();
        assert_eq!(render(&h), "(p -> q) -> r");
    }

    #[test]
    fn unary_binds_tighter_than_arrow() {
        let f = parse("[]p -> p").unwrap();
        assert_eq!(f, Formula::implies(Formula::boxed(p()), p()));
        let g = parse("[]<>~p").unwrap();
        assert_eq!(render(&g), "[]<>(p -> bot)");
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(parse("p ->").unwrap_err().position, 4);
        assert_eq!(parse("(p").unwrap_err().position, 2);
        assert!(parse("p q").is_err());
        assert!(parse("P").is_err());
        assert!(parse("").is_err());
        assert!(parse("[p]").is_err());
        assert!(Atom::new("bot").is_err());
        assert!(Atom::new("q_1").is_ok());
    }

    #[test]
    fn diamond_rewrite() {
        let f = parse("<>p").unwrap();
        assert_eq!(render(&rewrite_diamond(&f)), "[](p -> bot) -> bot");
        let g = parse("<><>p -> q").unwrap();
        assert!(rewrite_diamond(&g).to_string().find("<>").is_none());
    }

    #[test]
    fn subformula_order() {
        let f = parse("[](p -> q) -> []p -> []q").unwrap();
        let subs = subformulas(&f);
        assert_eq!(subs.last(), Some(&f));
        for (i, s) in subs.iter().enumerate() {
            for c in s.children() {
                assert!(subs[..i].contains(c));
            }
        }
        assert_eq!(subs.len(), 8);
    }

    #[test]
    fn enumeration_small_cases() {
        let ps = [Atom::new("p").unwrap()];
        let pq = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
        let zero: Vec<_> = enumerate_formulas(&ps, 0, false).collect();
        assert_eq!(zero, vec![p(), Formula::Bottom]);
        assert_eq!(enumerate_formulas(&pq, 1, false).count(), 12);
        assert_eq!(enumerate_formulas(&ps, 1, true).count(), 10);
        assert_eq!(enumerate_formulas(&ps, 2, true).count(), 122);
        assert_eq!(FormulaSpace::new(&pq, 3, true).len(), 363 + 132_135);
    }

    #[test]
    fn enumeration_matches_naive_generation() {
        // Naive oracle: build depth levels explicitly and compare as sets with exact depth.
        let pq = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
        let mut levels: Vec<Vec<Formula>> = vec![vec![Formula::atom("p"), Formula::atom("q"), Formula::Bottom]];
        for d in 1..=2 {
            let below: Vec<Formula> = levels.iter().flatten().cloned().collect();
            let mut level = Vec::new();
            for f in &levels[d - 1] {
                level.push(Formula::boxed(f.clone()));
            }
            for f in &levels[d - 1] {
                level.push(Formula::diamond(f.clone()));
            }
            for a in &below {
                for b in &below {
                    if a.depth().max(b.depth()) == d - 1 {
                        level.push(Formula::implies(a.clone(), b.clone()));
                    }
                }
            }
            levels.push(level);
        }
        let naive: Vec<Formula> = levels.into_iter().flatten().collect();
        let fast: Vec<Formula> = enumerate_formulas(&pq, 2, true).collect();
        assert_eq!(naive, fast);
        let distinct: BTreeSet<_> = fast.iter().cloned().collect();
        assert_eq!(distinct.len(), fast.len());
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Bottom),
            "[a-c][a-z0-9_]{0,2}".prop_filter("not bot", |s| s != "bot").prop_map(|s| Formula::atom(&s)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                inner.clone().prop_map(Formula::boxed),
                inner.prop_map(Formula::diamond),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(f in arb_formula()) {
            prop_assert_eq!(parse(&render(&f)).unwrap(), f);
        }

        #[test]
        fn rewrite_removes_diamonds(f in arb_formula()) {
            let g = rewrite_diamond(&f);
            prop_assert!(!render(&g).contains("<>"));
            prop_assert_eq!(atoms_of(&g), atoms_of(&f));
        }

        #[test]
        fn space_is_depth_sorted(i in 0u128..132_498) {
            let pq = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
            let space = FormulaSpace::new(&pq, 3, true);
            let f = space.get(i).unwrap();
            let d = f.depth();
            prop_assert!(d <= 3);
            let lo = if d == 0 { 0 } else { space.upto[d - 1] };
            prop_assert!(i >= lo && i < space.upto[d]);
        }
    }
}
