//! Configuration space: ordered dimensions, option enumeration, and the
//! compact label codec.
//!
//! A space is an ordered list of named dimensions, each with an ordered list
//! of option codes. Enumeration walks the Cartesian product in lexicographic
//! choice order (leftmost dimension varies slowest), and every configuration
//! gets a dotted label whose token alphabet depends on the dimension position:
//! lowercase letters, lowercase roman numerals, arabic numerals, uppercase
//! letters, then the same four alphabets again with a numeric position prefix.
//! `"a.ii.3"` is choices `(0, 1, 2)` in a three-dimensional space.

use indexmap::IndexMap;
use serde::Deserialize;

use crate::error::{Error, Result};

/// One named axis of the space with its ordered option codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSpec {
    pub name: String,
    pub options: Vec<String>,
}

impl DimensionSpec {
    /// Builds a dimension, rejecting empty or duplicated option lists.
    pub fn new(name: impl Into<String>, options: Vec<String>) -> Result<Self> {
        let name = name.into();
        if options.is_empty() {
            return Err(Error::EmptyDimension { dimension: name });
        }
        for (i, opt) in options.iter().enumerate() {
            if options[..i].contains(opt) {
                return Err(Error::DuplicateOption {
                    dimension: name,
                    option: opt.clone(),
                });
            }
        }
        Ok(DimensionSpec { name, options })
    }

    /// Index of an option code, if present.
    pub fn option_index(&self, code: &str) -> Option<usize> {
        self.options.iter().position(|o| o == code)
    }
}

/// A point in the space: one option index per dimension, in dimension order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub choices: Vec<usize>,
}

impl Configuration {
    pub fn new(choices: Vec<usize>) -> Self {
        Configuration { choices }
    }

    /// The option codes this configuration picks, in dimension order.
    pub fn option_codes<'a>(&self, space: &'a ConfigSpace) -> Vec<&'a str> {
        self.choices
            .iter()
            .zip(space.dimensions())
            .map(|(&c, d)| d.options[c].as_str())
            .collect()
    }
}

/// Declarative keep/drop rules for deriving a sub-space.
///
/// `include` maps a dimension to the option codes to keep, or to `null` to
/// remove the dimension entirely. `exclude` maps a dimension to option codes
/// to drop. Dimensions not mentioned pass through unchanged.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct SpaceFilter {
    #[serde(default)]
    pub include: IndexMap<String, Option<Vec<String>>>,
    #[serde(default)]
    pub exclude: IndexMap<String, Vec<String>>,
}

impl SpaceFilter {
    pub fn is_empty(&self) -> bool {
        self.include.is_empty() && self.exclude.is_empty()
    }

    /// True when the filter removes some dimension outright.
    pub fn removes_dimensions(&self) -> bool {
        self.include.values().any(|v| v.is_none())
    }

    fn validate(&self, space: &ConfigSpace) -> Result<()> {
        for (dim, rule) in &self.include {
            let (_, spec) = space.dimension(dim)?;
            if let Some(keep) = rule {
                for code in keep {
                    if spec.option_index(code).is_none() {
                        return Err(Error::UnknownOption {
                            dimension: dim.clone(),
                            option: code.clone(),
                        });
                    }
                }
            }
        }
        for (dim, drop) in &self.exclude {
            let (_, spec) = space.dimension(dim)?;
            for code in drop {
                if spec.option_index(code).is_none() {
                    return Err(Error::UnknownOption {
                        dimension: dim.clone(),
                        option: code.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Whether a configuration of `space` survives the keep/drop rules.
    ///
    /// Dimension-removal rules are rejected: a measured configuration always
    /// spans every dimension, so removal is meaningless when slicing data.
    pub fn matches(&self, space: &ConfigSpace, config: &Configuration) -> Result<bool> {
        self.validate(space)?;
        for (dim, rule) in &self.include {
            let (idx, spec) = space.dimension(dim)?;
            match rule {
                None => {
                    return Err(Error::FilterRemovalNotAllowed {
                        dimension: dim.clone(),
                    })
                }
                Some(keep) => {
                    let code = &spec.options[config.choices[idx]];
                    if !keep.contains(code) {
                        return Ok(false);
                    }
                }
            }
        }
        for (dim, drop) in &self.exclude {
            let (idx, spec) = space.dimension(dim)?;
            let code = &spec.options[config.choices[idx]];
            if drop.contains(code) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The full Cartesian space of benchmark configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigSpace {
    dimensions: Vec<DimensionSpec>,
}

impl ConfigSpace {
    /// Builds a space from ordered dimensions; names must be unique and the
    /// list non-empty.
    pub fn new(dimensions: Vec<DimensionSpec>) -> Result<Self> {
        if dimensions.is_empty() {
            return Err(Error::NoDimensions);
        }
        for (i, dim) in dimensions.iter().enumerate() {
            if dimensions[..i].iter().any(|d| d.name == dim.name) {
                return Err(Error::DuplicateDimension {
                    dimension: dim.name.clone(),
                });
            }
        }
        Ok(ConfigSpace { dimensions })
    }

    pub fn dimensions(&self) -> &[DimensionSpec] {
        &self.dimensions
    }

    /// Looks a dimension up by name.
    pub fn dimension(&self, name: &str) -> Result<(usize, &DimensionSpec)> {
        self.dimensions
            .iter()
            .enumerate()
            .find(|(_, d)| d.name == name)
            .ok_or_else(|| Error::UnknownDimension {
                dimension: name.to_string(),
            })
    }

    /// Number of configurations: the product of the option counts.
    pub fn size(&self) -> usize {
        self.dimensions.iter().map(|d| d.options.len()).product()
    }

    /// All configurations in lexicographic choice order; the leftmost
    /// dimension varies slowest.
    pub fn enumerate(&self) -> Vec<Configuration> {
        let mut out = Vec::with_capacity(self.size());
        let mut choices = vec![0usize; self.dimensions.len()];
        loop {
            out.push(Configuration::new(choices.clone()));
            // Odometer increment, rightmost digit fastest.
            let mut pos = self.dimensions.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                choices[pos] += 1;
                if choices[pos] < self.dimensions[pos].options.len() {
                    break;
                }
                choices[pos] = 0;
            }
        }
    }

    /// Labels for [`ConfigSpace::enumerate`], in the same order.
    pub fn labels(&self) -> Vec<String> {
        self.enumerate()
            .iter()
            .map(|c| self.encode_label(c).expect("enumerated configs encode"))
            .collect()
    }

    /// Encodes a configuration as its dotted label.
    pub fn encode_label(&self, config: &Configuration) -> Result<String> {
        if config.choices.len() != self.dimensions.len() {
            return Err(Error::LabelTokenCount {
                label: format!("{:?}", config.choices),
                expected: self.dimensions.len(),
                got: config.choices.len(),
            });
        }
        let mut tokens = Vec::with_capacity(config.choices.len());
        for (pos, (&choice, dim)) in config.choices.iter().zip(&self.dimensions).enumerate() {
            if choice >= dim.options.len() {
                return Err(Error::LabelOutOfRange {
                    position: pos,
                    token: encode_token(pos, choice),
                    index: choice,
                    len: dim.options.len(),
                });
            }
            tokens.push(encode_token(pos, choice));
        }
        Ok(tokens.join("."))
    }

    /// Decodes a dotted label back into a configuration of this space.
    pub fn decode_label(&self, label: &str) -> Result<Configuration> {
        let tokens: Vec<&str> = label.split('.').collect();
        if tokens.len() != self.dimensions.len() {
            return Err(Error::LabelTokenCount {
                label: label.to_string(),
                expected: self.dimensions.len(),
                got: tokens.len(),
            });
        }
        let mut choices = Vec::with_capacity(tokens.len());
        for (pos, token) in tokens.iter().enumerate() {
            let idx = decode_token(pos, token)?;
            let len = self.dimensions[pos].options.len();
            if idx >= len {
                return Err(Error::LabelOutOfRange {
                    position: pos,
                    token: token.to_string(),
                    index: idx,
                    len,
                });
            }
            choices.push(idx);
        }
        Ok(Configuration::new(choices))
    }

    /// True when `label` decodes to a configuration of this space.
    pub fn contains_label(&self, label: &str) -> bool {
        self.decode_label(label).is_ok()
    }

    /// Applies keep/drop rules, producing a smaller space. Labels of the
    /// result are re-encoded against the surviving options.
    pub fn filter(&self, filter: &SpaceFilter) -> Result<ConfigSpace> {
        filter.validate(self)?;
        let mut dims = Vec::new();
        for dim in &self.dimensions {
            match filter.include.get(&dim.name) {
                Some(None) => continue, // dimension removed
                Some(Some(keep)) => {
                    let kept: Vec<String> = dim
                        .options
                        .iter()
                        .filter(|o| keep.contains(o))
                        .cloned()
                        .collect();
                    dims.push((dim.name.clone(), kept));
                }
                None => dims.push((dim.name.clone(), dim.options.clone())),
            }
        }
        for (name, options) in &mut dims {
            if let Some(drop) = filter.exclude.get(name) {
                options.retain(|o| !drop.contains(o));
            }
            if options.is_empty() {
                return Err(Error::FilterEmptiesDimension {
                    dimension: name.clone(),
                });
            }
        }
        if dims.is_empty() {
            return Err(Error::FilterEmptiesSpace);
        }
        ConfigSpace::new(
            dims.into_iter()
                .map(|(name, options)| DimensionSpec { name, options })
                .collect(),
        )
    }
}

const ROMAN: [&str; 20] = [
    "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii", "xiv", "xv",
    "xvi", "xvii", "xviii", "xix", "xx",
];

/// Token for option `idx` at dimension position `pos`.
///
/// Positions 0..4 use lowercase letters, roman numerals, arabic numerals, and
/// uppercase letters; later positions reuse those alphabets cyclically with a
/// 1-based position prefix so tokens stay unambiguous.
pub fn encode_token(pos: usize, idx: usize) -> String {
    let base = match pos % 4 {
        0 => bijective_alpha(idx, b'a'),
        1 => {
            if idx < ROMAN.len() {
                ROMAN[idx].to_string()
            } else {
                format!("r{}", idx + 1)
            }
        }
        2 => (idx + 1).to_string(),
        _ => bijective_alpha(idx, b'A'),
    };
    if pos < 4 {
        base
    } else {
        format!("{}{}", pos + 1, base)
    }
}

/// Inverse of [`encode_token`]; strict, so every token round-trips.
pub fn decode_token(pos: usize, token: &str) -> Result<usize> {
    let err = || Error::LabelToken {
        position: pos,
        token: token.to_string(),
    };
    let body = if pos < 4 {
        token
    } else {
        let prefix = (pos + 1).to_string();
        token.strip_prefix(prefix.as_str()).ok_or_else(err)?
    };
    let idx = match pos % 4 {
        0 => parse_bijective_alpha(body, b'a').ok_or_else(err)?,
        1 => {
            if let Some(i) = ROMAN.iter().position(|r| *r == body) {
                i
            } else if let Some(num) = body.strip_prefix('r') {
                let n: usize = num.parse().map_err(|_| err())?;
                if n <= ROMAN.len() {
                    return Err(err()); // canonical form for 1..=20 is the numeral
                }
                n - 1
            } else {
                return Err(err());
            }
        }
        2 => {
            let n: usize = body.parse().map_err(|_| err())?;
            if n == 0 {
                return Err(err());
            }
            n - 1
        }
        _ => parse_bijective_alpha(body, b'A').ok_or_else(err)?,
    };
    // Reject non-canonical spellings ("01", leading zeros, etc.).
    if encode_token(pos, idx) != token {
        return Err(err());
    }
    Ok(idx)
}

/// Bijective base-26: 0 -> "a", 25 -> "z", 26 -> "aa".
fn bijective_alpha(idx: usize, base: u8) -> String {
    let mut n = idx + 1;
    let mut out = Vec::new();
    while n > 0 {
        n -= 1;
        out.push(base + (n % 26) as u8);
        n /= 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii letters")
}

fn parse_bijective_alpha(s: &str, base: u8) -> Option<usize> {
    if s.is_empty() {
        return None;
    }
    let mut n = 0usize;
    for b in s.bytes() {
        if b < base || b >= base + 26 {
            return None;
        }
        n = n.checked_mul(26)?.checked_add((b - base) as usize + 1)?;
    }
    Some(n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dims(spec: &[(&str, &[&str])]) -> ConfigSpace {
        ConfigSpace::new(
            spec.iter()
                .map(|(n, opts)| {
                    DimensionSpec::new(*n, opts.iter().map(|s| s.to_string()).collect()).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn bench_space() -> ConfigSpace {
        dims(&[
            ("schema", &["st", "vp", "pt", "extvp", "wpt"]),
            ("partition", &["horizontal", "subject", "predicate"]),
            ("storage", &["avro", "csv", "orc", "parquet"]),
        ])
    }

    #[test]
    fn enumerate_matches_nested_loop_oracle() {
        let space = dims(&[("x", &["p", "q"]), ("y", &["1", "2"])]);
        // Oracle written by hand: outer loop over x, inner over y.
        let expected = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let got: Vec<Vec<usize>> = space.enumerate().into_iter().map(|c| c.choices).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn size_is_product_and_enumeration_is_unique() {
        let space = bench_space();
        assert_eq!(space.size(), 60);
        let configs = space.enumerate();
        assert_eq!(configs.len(), 60);
        let mut seen = std::collections::HashSet::new();
        for c in &configs {
            assert!(seen.insert(c.choices.clone()), "duplicate {:?}", c.choices);
        }
    }

    #[test]
    fn single_option_space() {
        let space = dims(&[("only", &["one"])]);
        assert_eq!(space.size(), 1);
        assert_eq!(space.labels(), vec!["a"]);
        assert_eq!(space.decode_label("a").unwrap().choices, vec![0]);
    }

    #[test]
    fn label_examples() {
        let space = bench_space();
        let label = space
            .encode_label(&Configuration::new(vec![0, 1, 2]))
            .unwrap();
        assert_eq!(label, "a.ii.3");
        assert_eq!(
            space
                .encode_label(&Configuration::new(vec![0, 0, 0]))
                .unwrap(),
            "a.i.1"
        );
        assert_eq!(
            space
                .encode_label(&Configuration::new(vec![4, 2, 3]))
                .unwrap(),
            "e.iii.4"
        );
        assert_eq!(space.decode_label("a.ii.3").unwrap().choices, vec![0, 1, 2]);
    }

    #[test]
    fn all_sixty_labels_round_trip() {
        let space = bench_space();
        let labels = space.labels();
        assert_eq!(labels.len(), 60);
        let mut unique = std::collections::HashSet::new();
        for (config, label) in space.enumerate().iter().zip(&labels) {
            assert!(unique.insert(label.clone()), "label collision {label}");
            assert_eq!(&space.decode_label(label).unwrap(), config);
        }
    }

    #[test]
    fn roman_tokens_and_overflow() {
        assert_eq!(encode_token(1, 0), "i");
        assert_eq!(encode_token(1, 3), "iv");
        assert_eq!(encode_token(1, 19), "xx");
        assert_eq!(encode_token(1, 20), "r21");
        assert_eq!(decode_token(1, "xviii").unwrap(), 17);
        assert_eq!(decode_token(1, "r21").unwrap(), 20);
        assert_eq!(decode_token(1, "r100").unwrap(), 99);
        // canonical forms only
        assert!(decode_token(1, "r5").is_err());
        assert!(decode_token(1, "iiii").is_err());
    }

    #[test]
    fn alpha_tokens_grow_bijectively() {
        assert_eq!(encode_token(0, 25), "z");
        assert_eq!(encode_token(0, 26), "aa");
        assert_eq!(encode_token(0, 27), "ab");
        assert_eq!(decode_token(0, "aa").unwrap(), 26);
        assert_eq!(encode_token(3, 0), "A");
        assert_eq!(encode_token(3, 26), "AA");
    }

    #[test]
    fn high_positions_carry_prefix() {
        assert_eq!(encode_token(4, 0), "5a");
        assert_eq!(encode_token(5, 1), "6ii");
        assert_eq!(encode_token(6, 2), "73");
        assert_eq!(encode_token(7, 3), "8D");
        assert_eq!(decode_token(5, "6ii").unwrap(), 1);
        assert!(decode_token(5, "ii").is_err());
    }

    #[test]
    fn decode_rejects_malformed_labels() {
        let space = bench_space();
        match space.decode_label("a.ii") {
            Err(Error::LabelTokenCount { expected, got, .. }) => {
                assert_eq!((expected, got), (3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            space.decode_label("a.bogus.3"),
            Err(Error::LabelToken { position: 1, .. })
        ));
        // valid token, but the storage dimension has only 4 options
        assert!(matches!(
            space.decode_label("a.i.5"),
            Err(Error::LabelOutOfRange { position: 2, .. })
        ));
        assert!(!space.contains_label("f.i.1"));
        assert!(space.contains_label("e.iii.4"));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        assert!(matches!(
            DimensionSpec::new("d", vec!["x".into(), "x".into()]),
            Err(Error::DuplicateOption { .. })
        ));
        let d1 = DimensionSpec::new("d", vec!["x".into()]).unwrap();
        let d2 = DimensionSpec::new("d", vec!["y".into()]).unwrap();
        assert!(matches!(
            ConfigSpace::new(vec![d1, d2]),
            Err(Error::DuplicateDimension { .. })
        ));
        assert!(matches!(
            DimensionSpec::new("d", vec![]),
            Err(Error::EmptyDimension { .. })
        ));
        assert!(matches!(ConfigSpace::new(vec![]), Err(Error::NoDimensions)));
    }

    #[test]
    fn filter_keeps_and_drops_options() {
        let space = bench_space();
        let mut filter = SpaceFilter::default();
        filter.include.insert(
            "schema".into(),
            Some(vec!["st".into(), "vp".into(), "pt".into()]),
        );
        filter
            .exclude
            .insert("partition".into(), vec!["predicate".into()]);
        let sub = space.filter(&filter).unwrap();
        assert_eq!(sub.size(), 3 * 2 * 4);
        assert_eq!(sub.dimensions()[0].options, vec!["st", "vp", "pt"]);
        assert_eq!(sub.dimensions()[1].options, vec!["horizontal", "subject"]);
        // Labels re-encode against the sub-space.
        assert_eq!(sub.labels()[0], "a.i.1");
    }

    #[test]
    fn filter_removes_dimension_with_null() {
        let space = bench_space();
        let mut filter = SpaceFilter::default();
        filter.include.insert("partition".into(), None);
        let sub = space.filter(&filter).unwrap();
        assert_eq!(sub.dimensions().len(), 2);
        assert_eq!(sub.size(), 20);
        assert_eq!(sub.dimensions()[1].name, "storage");
    }

    #[test]
    fn filter_errors() {
        let space = bench_space();
        let mut empties = SpaceFilter::default();
        empties.include.insert("schema".into(), Some(vec![]));
        assert!(matches!(
            space.filter(&empties),
            Err(Error::FilterEmptiesDimension { .. })
        ));

        let mut unknown = SpaceFilter::default();
        unknown
            .exclude
            .insert("schema".into(), vec!["nope".into()]);
        assert!(matches!(
            space.filter(&unknown),
            Err(Error::UnknownOption { .. })
        ));

        let mut all_gone = SpaceFilter::default();
        all_gone.include.insert("schema".into(), None);
        all_gone.include.insert("partition".into(), None);
        all_gone.include.insert("storage".into(), None);
        assert!(matches!(
            space.filter(&all_gone),
            Err(Error::FilterEmptiesSpace)
        ));
    }

    #[test]
    fn filter_matches_is_a_predicate_on_codes() {
        let space = bench_space();
        let mut filter = SpaceFilter::default();
        filter
            .include
            .insert("partition".into(), Some(vec!["predicate".into()]));
        let kept: Vec<String> = space
            .enumerate()
            .iter()
            .filter(|c| filter.matches(&space, c).unwrap())
            .map(|c| space.encode_label(c).unwrap())
            .collect();
        assert_eq!(kept.len(), 20);
        assert!(kept.iter().all(|l| l.contains(".iii.")));

        let mut removal = SpaceFilter::default();
        removal.include.insert("partition".into(), None);
        assert!(matches!(
            removal.matches(&space, &space.enumerate()[0]),
            Err(Error::FilterRemovalNotAllowed { .. })
        ));
    }

    proptest! {
        #[test]
        fn enumerate_len_equals_size(sizes in proptest::collection::vec(1usize..5, 1..5)) {
            let dims: Vec<DimensionSpec> = sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    DimensionSpec::new(
                        format!("d{i}"),
                        (0..n).map(|j| format!("o{j}")).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let space = ConfigSpace::new(dims).unwrap();
            let configs = space.enumerate();
            prop_assert_eq!(configs.len(), space.size());
            // round-trip every label
            for c in &configs {
                let label = space.encode_label(c).unwrap();
                prop_assert_eq!(&space.decode_label(&label).unwrap(), c);
            }
        }

        #[test]
        fn tokens_round_trip(pos in 0usize..8, idx in 0usize..600) {
            let token = encode_token(pos, idx);
            prop_assert_eq!(decode_token(pos, &token).unwrap(), idx);
        }

        #[test]
        fn filtering_is_idempotent(keep in 1usize..4) {
            let space = ConfigSpace::new(vec![
                DimensionSpec::new("a", (0..4).map(|i| format!("x{i}")).collect()).unwrap(),
                DimensionSpec::new("b", (0..3).map(|i| format!("y{i}")).collect()).unwrap(),
            ])
            .unwrap();
            let mut filter = SpaceFilter::default();
            filter.include.insert(
                "a".into(),
                Some((0..keep).map(|i| format!("x{i}")).collect()),
            );
            let once = space.filter(&filter).unwrap();
            let twice = once.filter(&filter).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
