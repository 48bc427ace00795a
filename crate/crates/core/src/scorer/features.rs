//! Hashed surface features of a token.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a. Stable across platforms and releases, which keeps model
/// checkpoints portable.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub(crate) const BOS: &str = "<s>";
pub(crate) const EOS: &str = "</s>";

fn shape(token: &str) -> String {
    let mut out = String::new();
    for c in token.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if !out.ends_with(s) {
            out.push(s);
        }
    }
    out
}

fn prefix(chars: &[char], n: usize) -> String {
    chars.iter().take(n).collect()
}

fn suffix(chars: &[char], n: usize) -> String {
    chars[chars.len().saturating_sub(n)..].iter().collect()
}

/// Feature strings of one token: identity, lowercase form, 2/3-character
/// prefixes and suffixes and a collapsed shape.
pub fn token_features(token: &str) -> Vec<String> {
    if token == BOS || token == EOS {
        return vec![format!("pad={token}")];
    }
    let lower = token.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    vec![
        format!("w={token}"),
        format!("l={lower}"),
        format!("p2={}", prefix(&chars, 2)),
        format!("p3={}", prefix(&chars, 3)),
        format!("s2={}", suffix(&chars, 2)),
        format!("s3={}", suffix(&chars, 3)),
        format!("sh={}", shape(token)),
    ]
}

/// Bucket ids of a token's features.
pub fn hashed_features(token: &str, buckets: usize) -> Vec<u32> {
    token_features(token)
        .iter()
        .map(|f| (fnv1a(f.as_bytes()) % buckets as u64) as u32)
        .collect()
}
