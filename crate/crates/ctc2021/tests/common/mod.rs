#![allow(dead_code)]

use std::path::PathBuf;

use ctc2021::model::{self, Annotation, Edit, FineErrorType, Passage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const POOL: &[char] = &[
    '的', '一', '是', '在', '不', '了', '有', '和', '人', '这', '中', '大', '为', '上', '个',
    '国', '我', '以', '要', '他', '时', '来', '用', '们', '生', '到', '作', '地', '于', '出',
    '就', '分', '对', '成', '会', '可', '主', '发', '年', '动',
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn pool_char(rng: &mut impl Rng) -> char {
    POOL[rng.gen_range(0..POOL.len())]
}

pub fn pool_string(rng: &mut impl Rng, len: usize) -> String {
    (0..len).map(|_| pool_char(rng)).collect()
}

fn distinct_span(rng: &mut impl Rng, len: usize, avoid: &str) -> String {
    loop {
        let s = pool_string(rng, len);
        if s != avoid {
            return s;
        }
    }
}

/// A span with at least two distinct characters, so that rotating it by one
/// yields a different permutation.
fn mixed_span(rng: &mut impl Rng, len: usize) -> String {
    loop {
        let s = pool_string(rng, len);
        let mut chars = s.chars();
        let first = chars.next().unwrap();
        if chars.any(|c| c != first) {
            return s;
        }
    }
}

fn rotate_one(s: &str) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    chars.rotate_left(1);
    chars.into_iter().collect()
}

/// A random well-formed annotation, not tied to any passage text. Useful for
/// serializer round-trips, where only shape matters.
pub fn random_annotation(rng: &mut impl Rng, pid: &str) -> Annotation {
    let n = rng.gen_range(0..=4);
    let mut edits = Vec::new();
    let mut loc = rng.gen_range(0..4);
    for _ in 0..n {
        let t = FineErrorType::ALL[rng.gen_range(0..FineErrorType::ALL.len())];
        let (incorrect, correct) = match t {
            FineErrorType::Character => {
                let inc = pool_string(rng, 1);
                (inc.clone(), distinct_span(rng, 1, &inc))
            }
            FineErrorType::Word => {
                let (li, lc) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
                let inc = pool_string(rng, li);
                let cor = distinct_span(rng, lc, &inc);
                (inc, cor)
            }
            FineErrorType::Missing => {
                let l = rng.gen_range(1..=3);
                (String::new(), pool_string(rng, l))
            }
            FineErrorType::Redundant
            | FineErrorType::SemanticRepetition
            | FineErrorType::SyntacticHybridity => {
                let l = rng.gen_range(1..=4);
                (pool_string(rng, l), String::new())
            }
            FineErrorType::Disordered => {
                let l = rng.gen_range(2..=4);
                let inc = mixed_span(rng, l);
                let cor = rotate_one(&inc);
                (inc, cor)
            }
        };
        let width = incorrect.chars().count();
        edits.push(Edit::new(loc, t, incorrect, correct));
        loc += width + rng.gen_range(1..4);
    }
    Annotation::new(pid.to_string(), edits)
}

/// A random passage together with a gold annotation that validates against it.
pub fn random_case(rng: &mut impl Rng, pid: &str) -> (Passage, Annotation) {
    let len = rng.gen_range(4..40);
    let text = pool_string(rng, len);
    let passage = Passage::new(pid.to_string(), text.clone()).unwrap();
    let chars: Vec<char> = text.chars().collect();

    let mut edits = Vec::new();
    let mut pos = 0;
    while pos < len && edits.len() < 4 {
        if rng.gen_bool(0.4) {
            pos += rng.gen_range(1..4);
            continue;
        }
        let window = (len - pos).min(3);
        match rng.gen_range(0..6) {
            0 => {
                let l = rng.gen_range(1..=2);
                let cor = pool_string(rng, l);
                edits.push(Edit::new(pos, FineErrorType::Missing, String::new(), cor));
                pos += 1;
            }
            1 => {
                let inc: String = chars[pos..pos + 1].iter().collect();
                let cor = distinct_span(rng, 1, &inc);
                edits.push(Edit::new(pos, FineErrorType::Character, inc, cor));
                pos += 1;
            }
            2 if window >= 2 => {
                let k = rng.gen_range(2..=window);
                let inc: String = chars[pos..pos + k].iter().collect();
                let l = rng.gen_range(1..=3);
                let cor = distinct_span(rng, l, &inc);
                edits.push(Edit::new(pos, FineErrorType::Word, inc, cor));
                pos += k;
            }
            3 => {
                let k = rng.gen_range(1..=window);
                let inc: String = chars[pos..pos + k].iter().collect();
                let t = [
                    FineErrorType::Redundant,
                    FineErrorType::SemanticRepetition,
                    FineErrorType::SyntacticHybridity,
                ][rng.gen_range(0..3)];
                edits.push(Edit::new(pos, t, inc, String::new()));
                pos += k;
            }
            4 if window >= 2 => {
                let k = rng.gen_range(2..=window);
                let inc: String = chars[pos..pos + k].iter().collect();
                let first = chars[pos];
                if chars[pos..pos + k].iter().any(|&c| c != first) {
                    let cor = rotate_one(&inc);
                    edits.push(Edit::new(pos, FineErrorType::Disordered, inc, cor));
                    pos += k;
                }
            }
            _ => {}
        }
        pos += rng.gen_range(1..3);
    }

    let annotation = Annotation::new(pid.to_string(), edits);
    model::validate_annotation(&annotation, &passage).expect("generated case must validate");
    (passage, annotation)
}

/// Reference edit application: walk the text left to right, copying
/// untouched characters and substituting at each edit site.
pub fn apply_oracle(text: &str, edits: &[Edit]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    for e in edits {
        while i < e.location {
            out.push(chars[i]);
            i += 1;
        }
        out.push_str(&e.correct);
        i += e.incorrect.chars().count();
    }
    while i < chars.len() {
        out.push(chars[i]);
        i += 1;
    }
    out
}

/// A random single edit that validates against `chars`.
pub fn random_bound_edit(rng: &mut impl Rng, chars: &[char]) -> Edit {
    let len = chars.len();
    loop {
        let loc = rng.gen_range(0..=len);
        let k = rng.gen_range(0..=3.min(len - loc));
        let inc: String = chars[loc..loc + k].iter().collect();
        if k == 0 {
            let l = rng.gen_range(1..=2);
            return Edit::new(loc, FineErrorType::Missing, inc, pool_string(rng, l));
        }
        match rng.gen_range(0..4) {
            0 if k == 1 => {
                let cor = distinct_span(rng, 1, &inc);
                return Edit::new(loc, FineErrorType::Character, inc, cor);
            }
            1 => {
                let l = rng.gen_range(1..=3);
                let cor = distinct_span(rng, l, &inc);
                return Edit::new(loc, FineErrorType::Word, inc, cor);
            }
            2 => return Edit::new(loc, FineErrorType::Redundant, inc, String::new()),
            3 if k >= 2 && chars[loc..loc + k].iter().any(|&c| c != chars[loc]) => {
                let cor: String = {
                    let mut cs: Vec<char> = inc.chars().collect();
                    cs.rotate_left(1);
                    cs.into_iter().collect()
                };
                return Edit::new(loc, FineErrorType::Disordered, inc, cor);
            }
            _ => continue,
        }
    }
}

/// Pad both spans of `e` with one character of surrounding context on each
/// available side: a differently-phrased edit with the same corrected text.
pub fn widen_edit(e: &Edit, chars: &[char]) -> Edit {
    let mut loc = e.location;
    let mut inc: Vec<char> = e.incorrect.chars().collect();
    let mut cor: Vec<char> = e.correct.chars().collect();
    if loc > 0 {
        loc -= 1;
        inc.insert(0, chars[loc]);
        cor.insert(0, chars[loc]);
    }
    let end = e.location + e.incorrect.chars().count();
    if end < chars.len() {
        inc.push(chars[end]);
        cor.push(chars[end]);
    }
    Edit::new(
        loc,
        FineErrorType::Word,
        inc.into_iter().collect::<String>(),
        cor.into_iter().collect::<String>(),
    )
}

/// Confusion tables over the whole character pool, built in memory.
pub fn test_resources() -> ctc2021::corruptor::ConfusionResources {
    let mut res = ctc2021::corruptor::ConfusionResources::default();
    let n = POOL.len();
    for (i, &c) in POOL.iter().enumerate() {
        res.pinyin.insert(
            c.to_string(),
            vec![POOL[(i + 1) % n].to_string(), POOL[(i + 2) % n].to_string()],
        );
        res.shape
            .insert(c.to_string(), vec![POOL[(i + 3) % n].to_string()]);
        res.vocabulary.push(c.to_string());
    }
    res
}

/// Size of a maximum one-to-one matching between two key sequences, by
/// exhaustive backtracking. Small inputs only.
pub fn max_matching<K: PartialEq>(gold: &[K], system: &[K]) -> usize {
    fn go<K: PartialEq>(gi: usize, gold: &[K], system: &[K], used: &mut [bool]) -> usize {
        if gi == gold.len() {
            return 0;
        }
        let mut best = go(gi + 1, gold, system, used);
        for si in 0..system.len() {
            if !used[si] && system[si] == gold[gi] {
                used[si] = true;
                best = best.max(1 + go(gi + 1, gold, system, used));
                used[si] = false;
            }
        }
        best
    }
    let mut used = vec![false; system.len()];
    go(0, gold, system, &mut used)
}
