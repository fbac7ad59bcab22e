//! Words over `{r, s(α)}`, the standard form `s(αₙ)r···s(α₁)rs(α₀)`, the
//! ζ-chain and the disc-descent membership test for `PE₂(O)`.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{
    dist_sq, lattice_points_within, nearest_lattice_points, Discriminant, KElem, OInt, Rat,
};
use crate::error::{Error, Result};
use crate::moebius::Mat;

/// Default depth cap for [`membership`].
pub const DEFAULT_DEPTH_CAP: usize = 64;

/// Node budget per membership call; exhausting it is reported as inconclusive.
const NODE_BUDGET: usize = 200_000;

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Letter {
    R,
    S(OInt),
}

impl Letter {
    pub fn to_matrix(&self, d: Discriminant) -> Mat {
        match self {
            Letter::R => Mat::r(d),
            Letter::S(a) => Mat::s(a),
        }
    }

    /// Formal inverse; `r` is treated as its own inverse.
    pub fn inverse(&self) -> Letter {
        match self {
            Letter::R => Letter::R,
            Letter::S(a) => Letter::S(-a),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::R => write!(f, "r"),
            Letter::S(a) => write!(f, "s({a})"),
        }
    }
}

/// A finite sequence of letters; the leftmost letter is the leftmost factor.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word {
    d: Discriminant,
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(d: Discriminant, letters: Vec<Letter>) -> Self {
        Self { d, letters }
    }

    pub fn empty(d: Discriminant) -> Self {
        Self::new(d, Vec::new())
    }

    pub fn r(d: Discriminant) -> Self {
        Self::new(d, vec![Letter::R])
    }

    pub fn s(a: &OInt) -> Self {
        Self::new(a.disc(), vec![Letter::S(a.clone())])
    }

    pub fn disc(&self) -> Discriminant {
        self.d
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn r_count(&self) -> usize {
        self.letters.iter().filter(|l| **l == Letter::R).count()
    }

    pub fn to_matrix(&self) -> Mat {
        self.letters.iter().fold(Mat::identity(self.d), |acc, l| {
            acc.mul(&l.to_matrix(self.d))
        })
    }

    pub fn inverse(&self) -> Word {
        Self::new(
            self.d,
            self.letters.iter().rev().map(Letter::inverse).collect(),
        )
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Self::new(self.d, letters)
    }

    pub fn pow(&self, k: u32) -> Word {
        (0..k).fold(Word::empty(self.d), |acc, _| acc.concat(self))
    }

    /// Applies `f` to every shift coefficient; `r` letters map to the empty word
    /// when `drop_r` is set.
    pub fn substitute(&self, drop_r: bool, f: impl Fn(&OInt) -> OInt) -> Word {
        let letters = self
            .letters
            .iter()
            .filter_map(|l| match l {
                Letter::R if drop_r => None,
                Letter::R => Some(Letter::R),
                Letter::S(a) => Some(Letter::S(f(a))),
            })
            .collect();
        Self::new(self.d, letters)
    }

    /// Cancels `s(a)s(-a)` pairs and drops `s(0)`.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            if matches!(l, Letter::S(a) if a.is_zero()) {
                continue;
            }
            match (out.last(), l) {
                (Some(Letter::S(a)), Letter::S(b)) if (a + b).is_zero() => {
                    out.pop();
                }
                _ => out.push(l.clone()),
            }
        }
        Self::new(self.d, out)
    }

    /// Representative of the relator class under cyclic rotation and
    /// inversion, after free and cyclic reduction.
    pub fn canonical_relator(&self) -> Word {
        let mut w = self.free_reduce().letters;
        loop {
            let n = w.len();
            if n < 2 {
                break;
            }
            match (&w[0], &w[n - 1]) {
                (Letter::S(a), Letter::S(b)) if (a + b).is_zero() => {
                    w.remove(n - 1);
                    w.remove(0);
                }
                _ => break,
            }
        }
        let inv: Vec<Letter> = w.iter().rev().map(Letter::inverse).collect();
        let mut best: Vec<Letter> = w.clone();
        for cand in [&w, &inv] {
            for k in 0..cand.len() {
                let mut rot = cand.clone();
                rot.rotate_left(k);
                if rot < best {
                    best = rot;
                }
            }
        }
        Self::new(self.d, best)
    }

    /// Parses `r` and `s(a+b*t)` tokens separated by `*`; `1` is the empty word.
    pub fn parse(text: &str, d: Discriminant) -> Result<Word> {
        let mut p = Parser::new(text);
        p.skip_ws();
        if p.at_end() {
            return Ok(Word::empty(d));
        }
        if p.peek() == Some('1') {
            let save = p.pos;
            p.bump();
            p.skip_ws();
            if p.at_end() {
                return Ok(Word::empty(d));
            }
            p.pos = save;
        }
        let mut letters = Vec::new();
        loop {
            p.skip_ws();
            match p.peek() {
                Some('r') => {
                    p.bump();
                    letters.push(Letter::R);
                }
                Some('s') => {
                    p.bump();
                    p.expect('(')?;
                    let a = p.oint(d)?;
                    p.expect(')')?;
                    letters.push(Letter::S(a));
                }
                _ => return Err(p.error("expected `r` or `s(...)`")),
            }
            p.skip_ws();
            if p.at_end() {
                break;
            }
            p.expect('*')?;
        }
        Ok(Word::new(d, letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses an integer of the order in the `a+b*t` syntax, e.g. `2-t` or `-3*t`.
pub fn parse_oint(text: &str, d: Discriminant) -> Result<OInt> {
    let mut p = Parser::new(text);
    let x = p.oint(d)?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("trailing input"));
    }
    Ok(x)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn integer(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    /// Sum of signed terms, each `n`, `n*t`, `t` or `t*n`.
    fn oint(&mut self, d: Discriminant) -> Result<OInt> {
        let mut a = BigInt::zero();
        let mut b = BigInt::zero();
        let mut first = true;
        loop {
            self.skip_ws();
            let mut sign = BigInt::one();
            match self.peek() {
                Some('+') if !first => self.bump(),
                Some('-') => {
                    self.bump();
                    sign = -sign;
                }
                _ if first => {}
                _ => break,
            }
            self.skip_ws();
            if self.peek() == Some('t') {
                self.bump();
                let mut coef = BigInt::one();
                self.skip_ws();
                if self.peek() == Some('*')
                    && self
                        .chars
                        .get(self.pos + 1)
                        .is_some_and(|c| c.is_ascii_digit())
                {
                    self.bump();
                    coef = self
                        .integer()
                        .ok_or_else(|| self.error("expected integer"))?;
                }
                b += sign * coef;
            } else {
                let n = self
                    .integer()
                    .ok_or_else(|| self.error("expected integer or `t`"))?;
                self.skip_ws();
                if self.peek() == Some('*') && self.chars.get(self.pos + 1) == Some(&'t') {
                    self.pos += 2;
                    b += sign * n;
                } else {
                    a += sign * n;
                }
            }
            first = false;
        }
        Ok(OInt::new(d, a, b))
    }
}

/// The product `s(αₙ)r···s(α₁)rs(α₀)`, stored as `(α₀, α₁, ..., αₙ)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct StandardForm {
    d: Discriminant,
    alphas: Vec<OInt>,
}

impl StandardForm {
    pub fn new(d: Discriminant, alphas: Vec<OInt>) -> Self {
        assert!(!alphas.is_empty(), "a standard form has at least α₀");
        Self { d, alphas }
    }

    pub fn identity(d: Discriminant) -> Self {
        Self::new(d, vec![d.zero()])
    }

    pub fn alphas(&self) -> &[OInt] {
        &self.alphas
    }

    /// Number of `r` letters.
    pub fn n(&self) -> usize {
        self.alphas.len() - 1
    }

    /// `α₁, ..., αₙ₋₁ ∉ {0, ±1}`.
    pub fn satisfies_interior_constraint(&self) -> bool {
        let n = self.n();
        (1..n).all(|i| !self.alphas[i].is_small())
    }

    /// Word form; zero shifts are omitted.
    pub fn to_word(&self) -> Word {
        let mut letters = Vec::with_capacity(2 * self.alphas.len());
        for (i, a) in self.alphas.iter().enumerate().rev() {
            if !a.is_zero() {
                letters.push(Letter::S(a.clone()));
            }
            if i > 0 {
                letters.push(Letter::R);
            }
        }
        Word::new(self.d, letters)
    }

    pub fn to_matrix(&self) -> Mat {
        self.to_word().to_matrix()
    }
}

impl fmt::Display for StandardForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word())
    }
}

/// Rewrites `w` into standard form.
///
/// Letters are consumed right to left into shift slots separated by `r`.
/// Whenever a finished interior slot is `0` or `±1` it is removed with
/// `s(x)rs(0)rs(y) = s(x+y)` or `s(x)rs(±1)rs(y) = s(x∓1)rs(y∓1)`; both
/// remove `r` letters, so the rewriting terminates.
pub fn normal_form(w: &Word) -> Result<StandardForm> {
    let d = w.disc();
    d.require_units_pm1()?;
    let mut slots: Vec<OInt> = vec![d.zero()];
    for l in w.letters().iter().rev() {
        match l {
            Letter::S(a) => {
                let top = slots.last_mut().expect("never empty");
                *top = &*top + a;
            }
            Letter::R => {
                slots.push(d.zero());
                while slots.len() >= 3 && slots[slots.len() - 2].is_small() {
                    let left = slots.pop().unwrap();
                    let mid = slots.pop().unwrap();
                    let right = slots.pop().unwrap();
                    if mid.is_zero() {
                        slots.push(&right + &left);
                    } else {
                        slots.push(&right - &mid);
                        slots.push(&left - &mid);
                    }
                }
            }
        }
    }
    Ok(StandardForm::new(d, slots))
}

/// `ζ₁ = z + α₀`, `ζᵢ₊₁ = αᵢ - 1/ζᵢ`, so that `s(αᵢ)r·(ζᵢ, 1)ᵗ = ζᵢ·(ζᵢ₊₁, 1)ᵗ`.
pub fn zeta_chain(sf: &StandardForm, z: &KElem) -> Result<Vec<KElem>> {
    let n = sf.n();
    let mut chain = Vec::with_capacity(n);
    if n == 0 {
        return Ok(chain);
    }
    chain.push(z.add_oint(&sf.alphas[0]));
    for i in 1..n {
        let prev = &chain[i - 1];
        if prev.is_zero() {
            return Err(Error::DegenerateChain(i));
        }
        let next = prev.recip()?.neg().add_oint(&sf.alphas[i]);
        chain.push(next);
    }
    if chain[n - 1].is_zero() {
        return Err(Error::DegenerateChain(n));
    }
    Ok(chain)
}

/// Both sides of `α - βζ = ±ζₙ···ζ₁` for the matrix of `sf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductIdentity {
    pub lhs: KElem,
    pub product: KElem,
}

impl ProductIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.product || self.lhs == self.product.neg()
    }
}

pub fn product_identity(sf: &StandardForm, z: &KElem) -> Result<ProductIdentity> {
    let chain = zeta_chain(sf, z)?;
    let g = sf.to_matrix();
    let lhs = z.mul_oint(g.m21()).add_oint(g.m22());
    let product = chain
        .iter()
        .fold(KElem::from_oint(z.disc().one()), |acc, x| acc.mul(x));
    Ok(ProductIdentity { lhs, product })
}

pub fn product_identity_check(sf: &StandardForm, z: &KElem) -> Result<bool> {
    Ok(product_identity(sf, z)?.holds())
}

/// Certificate that a matrix lies outside `PE₂(O)`: a node `g·path` whose
/// ratio `α/β` is at squared distance `> 1` from every lattice point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonMemberWitness {
    pub node: Mat,
    pub path: Word,
    pub ratio: KElem,
    pub nearest_dist_sq: Rat,
}

impl NonMemberWitness {
    /// Re-derives the witness from scratch against the queried matrix.
    pub fn verify(&self, g: &Mat) -> bool {
        if g.mul(&self.path.to_matrix()) != self.node || self.node.m21().is_zero() {
            return false;
        }
        let Ok(ratio) = KElem::new(self.node.m22().clone(), &self.node.beta()) else {
            return false;
        };
        ratio == self.ratio && lattice_points_within(&ratio, &Rat::one(), true).is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum MembershipResult {
    Member { certificate: StandardForm },
    NonMember(NonMemberWitness),
    Inconclusive { depth_reached: usize },
}

impl MembershipResult {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipResult::Member { .. })
    }

    pub fn is_non_member(&self) -> bool {
        matches!(self, MembershipResult::NonMember(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            MembershipResult::Member { .. } => "Member",
            MembershipResult::NonMember(_) => "NonMember",
            MembershipResult::Inconclusive { .. } => "Inconclusive",
        }
    }
}

/// Search statistics, including moves that keep `|β|²` constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: usize,
    pub max_depth: usize,
    pub plateau_moves: usize,
}

/// Decides `g ∈ PE₂(O)` by disc descent.
///
/// Every node is `g` times a product of `s(γ)r` factors, so all nodes share
/// `g`'s membership status. A node with `β = 0` is a shift, hence a member.
/// A node whose ratio `α/β` is outside every closed unit disc about a lattice
/// point is a non-member, since every member with `β ≠ 0` has its ratio in
/// such a disc. Otherwise the search moves to `h·s(γ)·r` for each lattice
/// point `γ` in the closed disc, which multiplies `|β|²` by `|α/β - γ|² ≤ 1`.
pub fn membership(g: &Mat, depth_cap: usize) -> Result<MembershipResult> {
    membership_with_stats(g, depth_cap).map(|(r, _)| r)
}

pub fn membership_with_stats(g: &Mat, depth_cap: usize) -> Result<(MembershipResult, SearchStats)> {
    let d = g.disc();
    d.require_units_pm1()?;
    let mut search = Search {
        cap: depth_cap,
        visited: HashSet::new(),
        path: Vec::new(),
        stats: SearchStats::default(),
    };
    search.visited.insert(g.clone());
    let found = search.visit(g.clone(), 0);
    let stats = search.stats;
    let result = match found {
        None => MembershipResult::Inconclusive {
            depth_reached: stats.max_depth,
        },
        Some(Found::Member { shift, path }) => {
            // g = s(shift) · (s(γ₀)r ··· s(γₖ₋₁)r)⁻¹ = s(shift)·r·s(-γₖ₋₁)···r·s(-γ₀)
            let mut letters = vec![Letter::S(shift)];
            for gamma in path.iter().rev() {
                letters.push(Letter::R);
                letters.push(Letter::S(-gamma));
            }
            let certificate = normal_form(&Word::new(d, letters))?;
            assert_eq!(
                certificate.to_matrix(),
                *g,
                "membership certificate must reproduce the input"
            );
            MembershipResult::Member { certificate }
        }
        Some(Found::NonMember { node, path, ratio }) => {
            let (nearest_dist_sq, _) = nearest_lattice_points(&ratio);
            MembershipResult::NonMember(NonMemberWitness {
                node,
                path: path_word(d, &path),
                ratio,
                nearest_dist_sq,
            })
        }
    };
    Ok((result, stats))
}

fn path_word(d: Discriminant, gammas: &[OInt]) -> Word {
    let mut letters = Vec::with_capacity(2 * gammas.len());
    for gamma in gammas {
        letters.push(Letter::S(gamma.clone()));
        letters.push(Letter::R);
    }
    Word::new(d, letters)
}

#[allow(clippy::large_enum_variant)]
enum Found {
    Member {
        shift: OInt,
        path: Vec<OInt>,
    },
    NonMember {
        node: Mat,
        path: Vec<OInt>,
        ratio: KElem,
    },
}

struct Search {
    cap: usize,
    visited: HashSet<Mat>,
    path: Vec<OInt>,
    stats: SearchStats,
}

impl Search {
    fn visit(&mut self, h: Mat, depth: usize) -> Option<Found> {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if h.m21().is_zero() {
            return Some(Found::Member {
                shift: h.m12().clone(),
                path: self.path.clone(),
            });
        }
        let ratio = KElem::new(h.m22().clone(), &h.beta()).expect("β ≠ 0");
        let mut candidates: Vec<(Rat, OInt)> = lattice_points_within(&ratio, &Rat::one(), true)
            .into_iter()
            .map(|gamma| (dist_sq(&ratio, &gamma), gamma))
            .collect();
        if candidates.is_empty() {
            return Some(Found::NonMember {
                node: h,
                path: self.path.clone(),
                ratio,
            });
        }
        if depth >= self.cap || self.stats.nodes >= NODE_BUDGET {
            return None;
        }
        candidates.sort();
        for (dist, gamma) in candidates {
            let child = h.mul(&Mat::s(&gamma)).mul(&Mat::r(h.disc()));
            if !self.visited.insert(child.clone()) {
                continue;
            }
            if dist.is_one() {
                self.stats.plateau_moves += 1;
            }
            self.path.push(gamma);
            let found = self.visit(child, depth + 1);
            self.path.pop();
            if found.is_some() {
                return found;
            }
            if self.stats.nodes >= NODE_BUDGET {
                return None;
            }
        }
        None
    }
}

/// Deterministic random word: each letter is `r` or `s(a+bτ)` with
/// `|a|, |b| ≤ coeff_bound`, with equal probability.
pub fn random_pe2_word(seed: u64, length: usize, coeff_bound: i64, d: Discriminant) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = (0..length)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Letter::R
            } else {
                let a = rng.gen_range(-coeff_bound..=coeff_bound);
                let b = rng.gen_range(-coeff_bound..=coeff_bound);
                Letter::S(d.elem(a, b))
            }
        })
        .collect();
    Word::new(d, letters)
}
