//! Hand transcriptions of the leading free-particle constraint blocks, `Ccl = p_t + p²/2M`.

fn ff(n: u32, k: u32) -> i64 {
    (0..k).map(|i| n as i64 - i as i64).product()
}

/// `c·Ccl^(n-k)·[block]`, or nothing when the falling factorial vanishes.
fn block(n: u32, k: u32, body: &str) -> String {
    let c = ff(n, k);
    if c == 0 {
        return String::new();
    }
    let pw = if n - k == 0 { "1".to_string() } else { format!("Ccl^{}", n - k) };
    format!(" + {c}*{pw}*({body})")
}

pub fn principal(n: u32) -> String {
    let mut s = format!("Ccl^{n}");
    s += &block(n, 1, "G[2,0;0,0]/(2*M)");
    s += &block(
        n,
        2,
        "p^2/(2*M^2)*G[2,0;0,0] + p/M*G[1,0;1,0] + G[0,0;2,0]/2 + G[2,0;1,0]/(2*M) + p/(2*M^2)*G[3,0;0,0]",
    );
    s += &block(n, 3, "p^2/(2*M^2)*G[2,0;1,0] + p/(2*M)*G[1,0;2,0] + G[0,0;3,0]/6 + p^3/(6*M^3)*G[3,0;0,0]");
    s
}

pub fn with_q(n: u32) -> String {
    let mut s = format!("q*({})", principal(n));
    s += &block(n, 1, "p/M*i*hbar/2 + p/M*G[1,1;0,0] + G[0,1;1,0] + G[2,1;0,0]/(2*M)");
    s += &block(
        n,
        2,
        "i*hbar/2/M*(G[1,0;1,0] + 3*p/(2*M)*G[2,0;0,0]) + p^2/(2*M^2)*G[2,1;0,0] + p/M*G[1,1;1,0] \
         + G[0,1;2,0]/2 + i*hbar/2/(2*M^2)*G[3,0;0,0]",
    );
    s += &block(
        n,
        3,
        "i*hbar/2*(p^2/M^2*G[1,0;1,0] + p^3/(2*M^3)*G[2,0;0,0] + p/(2*M)*G[0,0;2,0] + 3*p/(2*M^2)*G[2,0;1,0] \
         + p^2/M^3*G[3,0;0,0] + G[1,0;2,0]/(2*M))",
    );
    s
}

pub fn with_t(n: u32) -> String {
    let mut s = format!("t*({})", principal(n));
    s += &block(n, 1, "i*hbar/2 + p/M*G[1,0;0,1] + G[0,0;1,1] + G[2,0;0,1]/(2*M)");
    s += &block(n, 2, "i*hbar/2/(2*M)*G[2,0;0,0] + p^2/(2*M^2)*G[2,0;0,1] + p/M*G[1,0;1,1] + G[0,0;2,1]/2");
    s += &block(
        n,
        3,
        "i*hbar/2*(p/M*G[1,0;1,0] + G[0,0;2,0]/2 + p^2/(2*M^2)*G[2,0;0,0] + p/(2*M^2)*G[3,0;0,0] + G[2,0;1,0]/(2*M))",
    );
    s
}

pub fn with_pt(n: u32) -> String {
    let mut s = format!("p_t*({})", principal(n));
    s += &block(n, 1, "p/M*G[1,0;1,0] + G[0,0;2,0] + G[2,0;1,0]/(2*M)");
    s += &block(n, 2, "p^2/(2*M^2)*G[2,0;1,0] + p/M*G[1,0;2,0] + G[0,0;3,0]/2");
    s
}

pub fn with_p(n: u32) -> String {
    let mut s = format!("p*({})", principal(n));
    s += &block(n, 1, "G[1,0;1,0] + G[3,0;0,0]/(2*M) + p/M*G[2,0;0,0]");
    s += &block(n, 2, "p^2/(2*M^2)*G[3,0;0,0] + p/M*G[2,0;1,0] + G[1,0;2,0]/2");
    s
}

/// Transcription for multiplier word `f` at power `n`.
pub fn transcription(f: &str, n: u32) -> String {
    match f {
        "1" => principal(n),
        "q" => with_q(n),
        "t" => with_t(n),
        "p_t" => with_pt(n),
        "p" => with_p(n),
        _ => panic!("no transcription for {f}"),
    }
}
