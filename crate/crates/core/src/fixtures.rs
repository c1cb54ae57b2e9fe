//! The five-user packet instance used in examples and tests.

use crate::source_model::LinearSource;

/// JSON description of the five-user instance: ten packets `a`..`j` spread over five
/// users.
pub const FIVE_USER_JSON: &str = r#"{
  "model": "linear",
  "field": 2,
  "packets": ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"],
  "users": {
    "1": ["b", "c", "d", "h", "i"],
    "2": ["e", "f", "h", "i"],
    "3": ["b", "c", "e", "j"],
    "4": ["a", "b", "c", "d", "f", "g", "i", "j"],
    "5": ["a", "b", "c", "f", "i", "j"]
  }
}"#;

/// The five-user instance as a packet-subset source.
pub fn five_user_source() -> LinearSource {
    let holdings: [(u32, &str); 5] = [
        (1, "bcdhi"),
        (2, "efhi"),
        (3, "bcej"),
        (4, "abcdfgij"),
        (5, "abcfij"),
    ];
    let packets = ('a'..='j').map(String::from).collect();
    let users = holdings
        .iter()
        .map(|(id, held)| (*id, held.chars().map(String::from).collect()))
        .collect();
    LinearSource::from_packets(2, packets, users).expect("fixture is well formed")
}
