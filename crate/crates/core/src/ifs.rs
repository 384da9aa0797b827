//! Self-similar systems of discs or squares and the pieces of their level-n
//! approximations `G_n`.
//!
//! A map sends `z` to `center + ratio * z`. A word `(w_1, ..., w_n)` names the
//! piece obtained by applying `f_{w_1} ∘ ... ∘ f_{w_n}` to the root region, so
//! its center is `sum_k ratio^(k-1) * center_{w_k}` and its size is
//! `root_size * ratio^n`.
//!
//! Root regions: the unit disc for discs, the unit square `[-1/2, 1/2]^2`
//! (half-side 1/2) for squares. Both lie in the closed unit disc.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed when checking that a child lies in its parent.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-9;

/// Default bound on `L^n` for anything that touches every piece.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disc,
    Square,
}

impl Shape {
    /// Radius of the root disc or half-side of the root square.
    pub fn root_size(self) -> f64 {
        match self {
            Shape::Disc => 1.0,
            Shape::Square => 0.5,
        }
    }

    /// Half-length of the shadow of a piece of size `size` on the line of angle `theta`.
    pub fn shadow_half_width(self, size: f64, theta: f64) -> f64 {
        match self {
            Shape::Disc => size,
            Shape::Square => size * (theta.cos().abs() + theta.sin().abs()),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Shape::Disc => "disc",
            Shape::Square => "square",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMap {
    pub center: Complex64,
    pub ratio: f64,
    pub shape: Shape,
}

impl GeneratorMap {
    pub fn new(center: Complex64, ratio: f64, shape: Shape) -> Self {
        GeneratorMap { center, ratio, shape }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.center + self.ratio * z
    }

    /// How far the image of the root region sticks out of the root region (<= 0 when inside).
    fn containment_excess(&self) -> f64 {
        let s = self.shape.root_size();
        match self.shape {
            Shape::Disc => self.center.norm() + self.ratio * s - s,
            Shape::Square => {
                let reach = self.center.re.abs().max(self.center.im.abs());
                reach + self.ratio * s - s
            }
        }
    }
}

/// A word over the alphabet `0..L`. Build one through [`SimilaritySystem::word`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub center: Complex64,
    /// Radius for discs, half-side for squares.
    pub size: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySystem {
    maps: Vec<GeneratorMap>,
    label: String,
}

/// On-disk description of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub label: String,
    pub shape: Shape,
    pub ratio: f64,
    pub centers: Vec<[f64; 2]>,
}

/// Validates a list of maps and wraps it as a system.
pub fn build_system(label: impl Into<String>, maps: Vec<GeneratorMap>) -> Result<SimilaritySystem> {
    let first = *maps.first().ok_or(Error::EmptySystem)?;
    if !(first.ratio > 0.0 && first.ratio < 1.0) {
        return Err(Error::InvalidInput(format!("ratio {} outside (0, 1)", first.ratio)));
    }
    for (index, map) in maps.iter().enumerate() {
        if map.shape != first.shape {
            return Err(Error::MixedShapes(format!("map {index} is a {} but map 0 is a {}", map.shape.name(), first.shape.name())));
        }
        if map.ratio != first.ratio {
            return Err(Error::MixedShapes(format!("map {index} has ratio {} but map 0 has {}", map.ratio, first.ratio)));
        }
        if !map.center.re.is_finite() || !map.center.im.is_finite() {
            return Err(Error::InvalidInput(format!("map {index} has a non-finite center")));
        }
        let excess = map.containment_excess();
        if excess > CONTAINMENT_TOLERANCE {
            return Err(Error::ContainmentViolation { index, excess });
        }
    }
    Ok(SimilaritySystem { maps, label: label.into() })
}

/// Canned systems: `gasket`, `corner4`, `random-<L>-<seed>`.
///
/// Gasket letters: 0 is the lower-right disc (`α = -1`, direction `e^{-iπ/6}`),
/// 1 the top disc (`α = 0`, direction `i`), 2 the lower-left disc (`α = 1`,
/// direction `e^{7iπ/6}`). Corner4 letters run over the corners
/// `(-,-), (+,-), (-,+), (+,+)`.
pub fn preset(name: &str) -> Result<SimilaritySystem> {
    match name {
        "gasket" => {
            let maps = [-1.0, 0.0, 1.0]
                .iter()
                .map(|alpha| {
                    let dir = Complex64::from_polar(1.0, PI * (0.5 + 2.0 * alpha / 3.0));
                    GeneratorMap::new(dir / 3.0, 1.0 / 3.0, Shape::Disc)
                })
                .collect();
            build_system("gasket", maps)
        }
        "corner4" => {
            let c = 3.0 / 8.0;
            let maps = [(-c, -c), (c, -c), (-c, c), (c, c)]
                .iter()
                .map(|&(re, im)| GeneratorMap::new(Complex64::new(re, im), 0.25, Shape::Square))
                .collect();
            build_system("corner4", maps)
        }
        other => parse_random_preset(other).ok_or_else(|| Error::UnknownPreset(other.to_string()))?,
    }
}

fn parse_random_preset(name: &str) -> Option<Result<SimilaritySystem>> {
    let rest = name.strip_prefix("random-")?;
    let (l, seed) = rest.split_once('-')?;
    let l: usize = l.parse().ok()?;
    let seed: u64 = seed.parse().ok()?;
    if l < 2 {
        return Some(Err(Error::InvalidInput(format!("random preset needs L >= 2, got {l}"))));
    }
    let ratio = 1.0 / l as f64;
    let reach = 1.0 - ratio;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = (0..l)
        .map(|_| {
            let r = reach * rng.random::<f64>().sqrt();
            let angle = 2.0 * PI * rng.random::<f64>();
            GeneratorMap::new(Complex64::from_polar(r, angle), ratio, Shape::Disc)
        })
        .collect();
    Some(build_system(name, maps))
}

impl SimilaritySystem {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn maps(&self) -> &[GeneratorMap] {
        &self.maps
    }

    /// Number of maps, `L`.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn ratio(&self) -> f64 {
        self.maps[0].ratio
    }

    /// `1 / ratio`; equals the number of maps when the pieces have ratio `1/L`.
    pub fn base(&self) -> f64 {
        1.0 / self.ratio()
    }

    pub fn shape(&self) -> Shape {
        self.maps[0].shape
    }

    pub fn centers(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.maps.iter().map(|m| m.center)
    }

    /// Size of every depth-`n` piece.
    pub fn piece_size(&self, n: usize) -> f64 {
        let mut size = self.shape().root_size();
        for _ in 0..n {
            size *= self.ratio();
        }
        size
    }

    pub fn word(&self, letters: Vec<usize>) -> Result<Word> {
        if let Some(bad) = letters.iter().find(|&&l| l >= self.len()) {
            return Err(Error::InvalidInput(format!("letter {bad} outside 0..{}", self.len())));
        }
        Ok(Word(letters))
    }

    /// `sum_k ratio^(k-1) * center_{w_k}`.
    ///
    /// Panics if `word` has a letter outside this system's alphabet.
    pub fn piece_center(&self, word: &Word) -> Complex64 {
        let mut scale = 1.0;
        let mut z = Complex64::new(0.0, 0.0);
        for &letter in word.letters() {
            z += scale * self.maps[letter].center;
            scale *= self.ratio();
        }
        z
    }

    pub fn piece(&self, word: &Word) -> Piece {
        Piece { center: self.piece_center(word), size: self.piece_size(word.depth()), depth: word.depth() }
    }

    /// `L^n`, or `EnumerationCapExceeded` when it is above `cap`.
    pub fn checked_piece_count(&self, n: usize, cap: u64) -> Result<u64> {
        let mut count: u128 = 1;
        for _ in 0..n {
            count = count.saturating_mul(self.len() as u128);
            if count > cap as u128 {
                return Err(Error::EnumerationCapExceeded { requested: count_pow(self.len(), n), cap });
            }
        }
        Ok(count as u64)
    }

    /// Streams all `L^n` depth-`n` pieces in lexicographic word order.
    pub fn enumerate_pieces(&self, n: usize) -> Result<PieceIter<'_>> {
        self.enumerate_pieces_with_cap(n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_pieces_with_cap(&self, n: usize, cap: u64) -> Result<PieceIter<'_>> {
        self.checked_piece_count(n, cap)?;
        Ok(PieceIter::new(self, Word::empty(), n))
    }

    /// Streams the depth-`n` pieces whose word starts with `prefix`; used to split
    /// enumeration across workers.
    pub fn enumerate_pieces_under(&self, prefix: &Word, n: usize) -> Result<PieceIter<'_>> {
        if prefix.depth() > n {
            return Err(Error::InvalidInput(format!("prefix depth {} exceeds n = {n}", prefix.depth())));
        }
        self.checked_piece_count(n - prefix.depth(), DEFAULT_ENUMERATION_CAP)?;
        Ok(PieceIter::new(self, prefix.clone(), n))
    }

    /// `Re(center_j * e^{-iθ})` for every generator.
    pub fn projected_generators(&self, theta: f64) -> Vec<f64> {
        let (s, c) = theta.sin_cos();
        self.maps.iter().map(|m| m.center.re * c + m.center.im * s).collect()
    }

    /// Projections of all depth-`n` piece centers onto the line of angle `theta`,
    /// in lexicographic word order.
    pub fn projected_centers(&self, n: usize, theta: f64, cap: u64) -> Result<Vec<f64>> {
        let count = self.checked_piece_count(n, cap)? as usize;
        let gens = self.projected_generators(theta);
        let mut current = Vec::with_capacity(count);
        current.push(0.0);
        let mut next = Vec::with_capacity(count);
        let mut scale = 1.0;
        for _ in 0..n {
            next.clear();
            for &p in &current {
                next.extend(gens.iter().map(|&g| p + scale * g));
            }
            std::mem::swap(&mut current, &mut next);
            scale *= self.ratio();
        }
        Ok(current)
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            label: self.label.clone(),
            shape: self.shape(),
            ratio: self.ratio(),
            centers: self.centers().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_file(file: &SystemFile) -> Result<Self> {
        let maps = file.centers.iter().map(|&[re, im]| GeneratorMap::new(Complex64::new(re, im), file.ratio, file.shape)).collect();
        build_system(file.label.clone(), maps)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("system file serializes")
    }
}

fn count_pow(base: usize, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// Odometer over words of a fixed depth, keeping prefix sums so each step
/// costs O(1) amortized.
pub struct PieceIter<'a> {
    system: &'a SimilaritySystem,
    letters: Vec<usize>,
    fixed: usize,
    prefix: Vec<Complex64>,
    scales: Vec<f64>,
    size: f64,
    done: bool,
}

impl<'a> PieceIter<'a> {
    fn new(system: &'a SimilaritySystem, prefix_word: Word, n: usize) -> Self {
        let fixed = prefix_word.depth();
        let mut letters = prefix_word.0;
        letters.resize(n, 0);
        let mut scales = Vec::with_capacity(n + 1);
        let mut s = 1.0;
        for _ in 0..=n {
            scales.push(s);
            s *= system.ratio();
        }
        let mut iter = PieceIter {
            system,
            letters,
            fixed,
            prefix: vec![Complex64::new(0.0, 0.0); n + 1],
            scales,
            size: system.piece_size(n),
            done: false,
        };
        iter.refresh_from(0);
        iter
    }

    fn refresh_from(&mut self, start: usize) {
        for k in start..self.letters.len() {
            self.prefix[k + 1] = self.prefix[k] + self.scales[k] * self.system.maps[self.letters[k]].center;
        }
    }

    /// Word of the piece the next call to `next` will return.
    pub fn peek_word(&self) -> Option<Word> {
        (!self.done).then(|| Word(self.letters.clone()))
    }
}

impl Iterator for PieceIter<'_> {
    type Item = Piece;

    fn next(&mut self) -> Option<Piece> {
        if self.done {
            return None;
        }
        let n = self.letters.len();
        let piece = Piece { center: self.prefix[n], size: self.size, depth: n };
        let top = self.system.len() - 1;
        match (self.fixed..n).rev().find(|&k| self.letters[k] < top) {
            Some(k) => {
                self.letters[k] += 1;
                for l in &mut self.letters[k + 1..] {
                    *l = 0;
                }
                self.refresh_from(k);
            }
            None => self.done = true,
        }
        Some(piece)
    }
}
