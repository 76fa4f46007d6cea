//! Leading terms of the free-particle constraint tower, transcribed by hand and compared
//! with the generated constraints modulo moments of order four and higher.

use effcon::constraint_factory::parse_word;
use effcon::reduction_engine::verify_appendix_expansion;
use effcon::symbolic_ring::*;
use effcon::weyl_algebra::parse_operator;
use std::collections::BTreeMap;

#[path = "support/appendix_text.rs"]
mod appendix_text;
use appendix_text::*;

fn labels() -> Labels {
    Labels::new(&[("q", "p"), ("t", "p_t")])
}

fn check(word: &str, n: u32, text: &str) {
    let l = labels();
    let op = parse_operator("phat(1) + phat(0)^2/(2*M)", &l).unwrap();
    let mut bind = BTreeMap::new();
    bind.insert(l.resolve("p_t").unwrap(), parse_expr("Ccl - p^2/(2*M)", &l).unwrap());
    let tr = parse_expr(text, &l).unwrap();
    let w = parse_word(word, &l).unwrap();
    let r = verify_appendix_expansion(&op, &w, n, &bind, &tr, 3).unwrap();
    assert!(r.matches(), "f={word} n={n}: difference {}", r.difference.to_text(&l));
}

#[test]
fn principal_tower() {
    for n in 1..=3 {
        check("1", n, &transcription("1", n));
    }
}

#[test]
fn q_tower() {
    for n in 1..=3 {
        check("q", n, &transcription("q", n));
    }
}

#[test]
fn t_tower() {
    for n in 1..=3 {
        check("t", n, &transcription("t", n));
    }
}

#[test]
fn p_t_tower() {
    for n in 1..=3 {
        check("p_t", n, &transcription("p_t", n));
    }
}

#[test]
fn p_tower() {
    for n in 1..=3 {
        check("p", n, &transcription("p", n));
    }
}

#[test]
fn perturbed_transcription_is_caught() {
    let l = labels();
    let op = parse_operator("phat(1) + phat(0)^2/(2*M)", &l).unwrap();
    let mut bind = BTreeMap::new();
    bind.insert(l.resolve("p_t").unwrap(), parse_expr("Ccl - p^2/(2*M)", &l).unwrap());
    let tr = parse_expr(&format!("{} + G[2,0;0,0]/M", principal(2)), &l).unwrap();
    let r = verify_appendix_expansion(&op, &parse_word("1", &l).unwrap(), 2, &bind, &tr, 3).unwrap();
    assert!(!r.matches());
}
