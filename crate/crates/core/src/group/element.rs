use std::cmp::Ordering;

/// A generator or its formal inverse in a free group.
///
/// Stored as `±(index + 1)`; the ordering follows the generator list
/// `a, a⁻¹, b, b⁻¹, …` used for deterministic tie-breaking.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter(i8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator < 127, "generator index out of range");
        let code = generator as i8 + 1;
        Letter(if inverse { -code } else { code })
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Position of this letter in the ordered generator list.
    pub fn rank(self) -> usize {
        2 * self.generator() + usize::from(self.is_inverse())
    }

    pub fn from_rank(rank: usize) -> Letter {
        Letter::new(rank / 2, rank % 2 == 1)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A nontrivial element of one free factor.
///
/// For a `Z^r` factor `value` holds the `r` coordinates; for `Z/m` it holds a
/// single residue in `1..m`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Syllable {
    pub block: usize,
    pub value: Vec<i64>,
}

/// Group element in normal form.
///
/// Free groups use freely reduced words, free products use alternating
/// syllable lists. Equality of elements is structural equality of normal forms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Element {
    Word(Vec<Letter>),
    Syllables(Vec<Syllable>),
}

impl Element {
    pub fn is_identity(&self) -> bool {
        match self {
            Element::Word(w) => w.is_empty(),
            Element::Syllables(s) => s.is_empty(),
        }
    }

    /// Number of letters (free group) or syllables (free product).
    pub fn len(&self) -> usize {
        match self {
            Element::Word(w) => w.len(),
            Element::Syllables(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn letters(&self) -> Option<&[Letter]> {
        match self {
            Element::Word(w) => Some(w),
            Element::Syllables(_) => None,
        }
    }

    pub fn syllables(&self) -> Option<&[Syllable]> {
        match self {
            Element::Word(_) => None,
            Element::Syllables(s) => Some(s),
        }
    }

    /// Keep only the first `len` letters or syllables.
    pub fn truncate(&mut self, len: usize) {
        match self {
            Element::Word(w) => w.truncate(len),
            Element::Syllables(s) => s.truncate(len),
        }
    }

    /// Units from position `from` on, as an element.
    pub fn suffix(&self, from: usize) -> Element {
        match self {
            Element::Word(w) => Element::Word(w[from..].to_vec()),
            Element::Syllables(s) => Element::Syllables(s[from..].to_vec()),
        }
    }

    pub(crate) fn prefix(&self, len: usize) -> Element {
        match self {
            Element::Word(w) => Element::Word(w[..len].to_vec()),
            Element::Syllables(s) => Element::Syllables(s[..len].to_vec()),
        }
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Element::Word(a), Element::Word(b)) => a.cmp(b),
            (Element::Syllables(a), Element::Syllables(b)) => a.cmp(b),
            (Element::Word(_), Element::Syllables(_)) => Ordering::Less,
            (Element::Syllables(_), Element::Word(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Length of the longest common prefix of two slices.
pub(crate) fn common_prefix<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_roundtrip_and_order() {
        let a = Letter::new(0, false);
        let a_inv = a.inverse();
        let b = Letter::new(1, false);
        assert_eq!(a_inv.generator(), 0);
        assert!(a_inv.is_inverse());
        assert!(a < a_inv && a_inv < b);
        for r in 0..8 {
            assert_eq!(Letter::from_rank(r).rank(), r);
        }
    }
}
