//! Character n-grams of boundary-marked tokens and their hash buckets.

/// Every n-gram of `<token>` with length in `[min_n, max_n]`, ordered by
/// start position and then length. Repeated substrings are kept.
pub fn subword_ngrams(token: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let wrapped: Vec<char> = std::iter::once('<')
        .chain(token.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for start in 0..wrapped.len() {
        for len in min_n.max(1)..=max_n {
            let end = start + len;
            if end > wrapped.len() {
                break;
            }
            out.push(wrapped[start..end].iter().collect());
        }
    }
    out
}

/// 32-bit FNV-1a over the UTF-8 bytes.
pub fn fnv1a(bytes: &[u8]) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for &b in bytes {
        h ^= u32::from(b);
        h = h.wrapping_mul(16_777_619);
    }
    h
}

pub fn ngram_bucket(ngram: &str, bucket: u32) -> u32 {
    fnv1a(ngram.as_bytes()) % bucket
}
