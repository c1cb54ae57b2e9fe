//! Joint entropy oracles over subsets of users.
//!
//! Two source models are supported:
//!
//! * [`LinearSource`]: each user observes packets (field symbols) or linear
//!   combinations of them over a prime field GF(q). The entropy of a set of
//!   users is the rank of everything they jointly observe, measured in field
//!   symbols, so it is always an integer.
//! * [`PmfSource`]: an arbitrary joint probability mass function over the
//!   users' finite alphabets. Entropies are in bits.

mod field;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_ELEMENTS};
use crate::value::{Rational, Value};

pub use field::is_prime;

/// The terminal set, as an ordered list of distinct user ids.
///
/// Algorithms address users by position (`0..len`); ids only appear at the
/// boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserSet {
    ids: Vec<u32>,
}

impl UserSet {
    pub fn new(mut ids: Vec<u32>) -> Result<Self> {
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedSource("duplicate user id".into()));
        }
        if ids.len() < 2 {
            return Err(Error::MalformedSource(
                "at least two users are required".into(),
            ));
        }
        if ids.len() > MAX_ELEMENTS {
            return Err(Error::TooLarge {
                op: "user set",
                size: ids.len(),
                limit: MAX_ELEMENTS,
            });
        }
        Ok(UserSet { ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn id(&self, position: usize) -> u32 {
        self.ids[position]
    }

    pub fn position(&self, id: u32) -> Result<usize> {
        self.ids.binary_search(&id).map_err(|_| Error::UnknownUser(id))
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.ids.len())
    }

    pub fn subset(&self, ids: &[u32]) -> Result<Subset> {
        ids.iter()
            .try_fold(Subset::EMPTY, |s, &id| Ok(s.with(self.position(id)?)))
    }

    pub fn ids_of(&self, set: Subset) -> Vec<u32> {
        set.iter().map(|i| self.ids[i]).collect()
    }
}

/// Entropy oracle `H` over subsets of user positions, with `H(∅) = 0`.
pub trait EntropyOracle<T: Value>: Send + Sync {
    fn users(&self) -> &UserSet;

    fn entropy(&self, set: Subset) -> T;

    /// `H(X | Y) = H(X ∪ Y) − H(Y)` for disjoint `X`, `Y`.
    fn conditional_entropy(&self, x: Subset, y: Subset) -> Result<T> {
        if x.intersects(y) {
            return Err(Error::Overlap);
        }
        Ok(self.entropy(x | y) - self.entropy(y))
    }
}

#[derive(Clone, Debug)]
enum Holdings {
    /// Packet bitsets, one per user.
    Packets(Vec<Vec<u64>>),
    /// Coefficient vectors (rows) over GF(q), one list per user.
    Vectors(Vec<Vec<Vec<u64>>>),
}

/// Finite linear source: packets over GF(q) held by users either directly or
/// as linear combinations.
#[derive(Clone, Debug)]
pub struct LinearSource {
    users: UserSet,
    field: u64,
    packets: Vec<String>,
    holdings: Holdings,
}

impl LinearSource {
    /// Packet-subset form: each user holds a subset of the named packets.
    pub fn from_packets(
        field: u64,
        packets: Vec<String>,
        users: Vec<(u32, Vec<String>)>,
    ) -> Result<Self> {
        check_field(field)?;
        let index = packet_index(&packets)?;
        let words = packets.len().div_ceil(64).max(1);
        let user_set = UserSet::new(users.iter().map(|(id, _)| *id).collect())?;
        let mut holdings = vec![vec![0u64; words]; user_set.len()];
        for (id, held) in &users {
            let pos = user_set.position(*id)?;
            for name in held {
                let p = *index.get(name.as_str()).ok_or_else(|| {
                    Error::MalformedSource(format!("user {id} holds unknown packet {name:?}"))
                })?;
                holdings[pos][p / 64] |= 1 << (p % 64);
            }
        }
        Ok(LinearSource {
            users: user_set,
            field,
            packets,
            holdings: Holdings::Packets(holdings),
        })
    }

    /// Linear-vector form: each user holds coefficient vectors of length
    /// `packets.len()` over GF(`field`).
    pub fn from_vectors(
        field: u64,
        packets: Vec<String>,
        users: Vec<(u32, Vec<Vec<u64>>)>,
    ) -> Result<Self> {
        check_field(field)?;
        packet_index(&packets)?;
        let user_set = UserSet::new(users.iter().map(|(id, _)| *id).collect())?;
        let mut holdings = vec![Vec::new(); user_set.len()];
        for (id, rows) in users {
            for row in &rows {
                if row.len() != packets.len() {
                    return Err(Error::MalformedSource(format!(
                        "user {id}: vector of length {} but {} packets",
                        row.len(),
                        packets.len()
                    )));
                }
                if row.iter().any(|&c| c >= field) {
                    return Err(Error::MalformedSource(format!(
                        "user {id}: coefficient outside GF({field})"
                    )));
                }
            }
            holdings[user_set.position(id)?] = rows;
        }
        Ok(LinearSource {
            users: user_set,
            field,
            packets,
            holdings: Holdings::Vectors(holdings),
        })
    }

    pub fn field(&self) -> u64 {
        self.field
    }

    pub fn packets(&self) -> &[String] {
        &self.packets
    }

    /// Rank (in field symbols) of the observations of `set`.
    pub fn rank(&self, set: Subset) -> usize {
        match &self.holdings {
            Holdings::Packets(held) => {
                let words = held.first().map_or(0, Vec::len);
                (0..words)
                    .map(|w| {
                        set.iter()
                            .fold(0u64, |acc, u| acc | held[u][w])
                            .count_ones() as usize
                    })
                    .sum()
            }
            Holdings::Vectors(held) => field::rank(
                set.iter()
                    .flat_map(|u| held[u].iter().map(Vec::as_slice)),
                self.field,
            ),
        }
    }
}

impl EntropyOracle<Rational> for LinearSource {
    fn users(&self) -> &UserSet {
        &self.users
    }

    fn entropy(&self, set: Subset) -> Rational {
        Rational::from_integer(self.rank(set) as i128)
    }
}

fn check_field(field: u64) -> Result<()> {
    if is_prime(field) {
        Ok(())
    } else {
        Err(Error::MalformedSource(format!(
            "field size {field} is not prime"
        )))
    }
}

fn packet_index(packets: &[String]) -> Result<BTreeMap<&str, usize>> {
    let mut index = BTreeMap::new();
    for (i, p) in packets.iter().enumerate() {
        if index.insert(p.as_str(), i).is_some() {
            return Err(Error::MalformedSource(format!("duplicate packet {p:?}")));
        }
    }
    Ok(index)
}

/// Tolerance on the total probability mass of a pmf table.
pub const PMF_NORMALIZATION_TOL: f64 = 1e-12;

/// General discrete source given by a joint pmf over the product of the
/// users' alphabets. The table is row-major in increasing user-id order (the
/// last user's symbol varies fastest).
#[derive(Clone, Debug)]
pub struct PmfSource {
    users: UserSet,
    alphabets: Vec<Vec<String>>,
    table: Vec<f64>,
    strides: Vec<usize>,
}

impl PmfSource {
    pub fn new(alphabets: Vec<(u32, Vec<String>)>, table: Vec<f64>) -> Result<Self> {
        let users = UserSet::new(alphabets.iter().map(|(id, _)| *id).collect())?;
        let mut sorted = alphabets;
        sorted.sort_by_key(|(id, _)| *id);
        let alphabets: Vec<Vec<String>> = sorted.into_iter().map(|(_, a)| a).collect();
        if alphabets.iter().any(Vec::is_empty) {
            return Err(Error::MalformedSource("empty alphabet".into()));
        }
        let size = alphabets
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .ok_or_else(|| Error::MalformedSource("joint alphabet too large".into()))?;
        if table.len() != size {
            return Err(Error::MalformedSource(format!(
                "table has {} entries, joint alphabet has {size}",
                table.len()
            )));
        }
        if table.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::MalformedSource("negative or non-finite probability".into()));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > PMF_NORMALIZATION_TOL {
            return Err(Error::MalformedSource(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut strides = vec![1usize; alphabets.len()];
        for i in (0..alphabets.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * alphabets[i + 1].len();
        }
        Ok(PmfSource {
            users,
            alphabets,
            table,
            strides,
        })
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }
}

impl EntropyOracle<f64> for PmfSource {
    fn users(&self) -> &UserSet {
        &self.users
    }

    fn entropy(&self, set: Subset) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let coords: Vec<usize> = set.iter().collect();
        let mut marginal_strides = vec![1usize; coords.len()];
        for k in (0..coords.len().saturating_sub(1)).rev() {
            marginal_strides[k] = marginal_strides[k + 1] * self.alphabets[coords[k + 1]].len();
        }
        let marginal_size = marginal_strides[0] * self.alphabets[coords[0]].len();
        let mut marginal = vec![0.0f64; marginal_size];
        for (index, &p) in self.table.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let m: usize = coords
                .iter()
                .zip(&marginal_strides)
                .map(|(&u, &s)| (index / self.strides[u]) % self.alphabets[u].len() * s)
                .sum();
            marginal[m] += p;
        }
        -marginal
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }
}

/// A parsed source of either model.
#[derive(Clone, Debug)]
pub enum Source {
    Linear(LinearSource),
    Pmf(PmfSource),
}

/// Entropy in the source's native representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyValue {
    Exact(Rational),
    Float(f64),
}

impl Source {
    pub fn users(&self) -> &UserSet {
        match self {
            Source::Linear(s) => s.users(),
            Source::Pmf(s) => s.users(),
        }
    }

    /// Joint entropy of the users with the given ids.
    pub fn entropy(&self, ids: &[u32]) -> Result<EntropyValue> {
        let set = self.users().subset(ids)?;
        Ok(match self {
            Source::Linear(s) => EntropyValue::Exact(s.entropy(set)),
            Source::Pmf(s) => EntropyValue::Float(s.entropy(set)),
        })
    }

    /// `H(X | Y)` for disjoint id lists.
    pub fn conditional_entropy(&self, x: &[u32], y: &[u32]) -> Result<EntropyValue> {
        let xs = self.users().subset(x)?;
        let ys = self.users().subset(y)?;
        Ok(match self {
            Source::Linear(s) => EntropyValue::Exact(s.conditional_entropy(xs, ys)?),
            Source::Pmf(s) => EntropyValue::Float(s.conditional_entropy(xs, ys)?),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SourceSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.build()
    }
}

/// JSON form of a source.
///
/// ```json
/// {"model":"linear","field":2,"packets":["a","b"],"users":{"1":["a"],"2":["a","b"]}}
/// {"model":"linear","field":3,"packets":["a","b"],"users":{"1":[[1,2]],"2":[[0,1]]}}
/// {"model":"pmf","alphabets":{"1":["0","1"],"2":["0","1"]},"table":[0.5,0,0,0.5]}
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SourceSpec {
    Linear {
        #[serde(default = "default_field")]
        field: u64,
        packets: Vec<String>,
        users: BTreeMap<String, Holding>,
    },
    Pmf {
        alphabets: BTreeMap<String, Vec<serde_json::Value>>,
        table: Vec<f64>,
    },
}

fn default_field() -> u64 {
    2
}

/// One user's observation in a linear source description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Holding {
    Packets(Vec<String>),
    Vectors(Vec<Vec<u64>>),
}

fn parse_user_id(key: &str) -> Result<u32> {
    key.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("user id {key:?} is not a non-negative integer")))
}

impl SourceSpec {
    pub fn build(self) -> Result<Source> {
        match self {
            SourceSpec::Linear {
                field,
                packets,
                users,
            } => {
                let users: Vec<(u32, Holding)> = users
                    .into_iter()
                    .map(|(k, h)| Ok((parse_user_id(&k)?, h)))
                    .collect::<Result<_>>()?;
                let all_packets = users.iter().all(|(_, h)| match h {
                    Holding::Packets(_) => true,
                    // An empty list deserializes as packet form; treat it as such.
                    Holding::Vectors(v) => v.is_empty(),
                });
                if all_packets {
                    let users = users
                        .into_iter()
                        .map(|(id, h)| match h {
                            Holding::Packets(p) => (id, p),
                            Holding::Vectors(_) => (id, Vec::new()),
                        })
                        .collect();
                    LinearSource::from_packets(field, packets, users).map(Source::Linear)
                } else {
                    let index = packet_index(&packets)?;
                    let n = packets.len();
                    let users = users
                        .into_iter()
                        .map(|(id, h)| match h {
                            Holding::Vectors(v) => Ok((id, v)),
                            Holding::Packets(names) => {
                                let rows = names
                                    .iter()
                                    .map(|name| {
                                        let p = *index.get(name.as_str()).ok_or_else(|| {
                                            Error::MalformedSource(format!(
                                                "user {id} holds unknown packet {name:?}"
                                            ))
                                        })?;
                                        let mut row = vec![0u64; n];
                                        row[p] = 1;
                                        Ok(row)
                                    })
                                    .collect::<Result<Vec<_>>>()?;
                                Ok((id, rows))
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    LinearSource::from_vectors(field, packets, users).map(Source::Linear)
                }
            }
            SourceSpec::Pmf { alphabets, table } => {
                let alphabets = alphabets
                    .into_iter()
                    .map(|(k, symbols)| {
                        let symbols = symbols
                            .into_iter()
                            .map(|s| match s {
                                serde_json::Value::String(s) => s,
                                other => other.to_string(),
                            })
                            .collect();
                        Ok((parse_user_id(&k)?, symbols))
                    })
                    .collect::<Result<Vec<_>>>()?;
                PmfSource::new(alphabets, table).map(Source::Pmf)
            }
        }
    }
}
