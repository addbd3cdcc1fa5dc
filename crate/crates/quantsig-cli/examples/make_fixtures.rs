//! Regenerates the bundled test fixtures under `fixtures/`.
//!
//! Both files are pure functions of the constants below and a fixed seed,
//! so rerunning this always reproduces them byte for byte:
//!
//! ```text
//! cargo run -p quantsig-cli --example make_fixtures
//! ```
//!
//! `aapl_daily.csv` is a twelve-year weekday OHLCV walk shaped like a
//! large-cap growth stock (a few incomplete rows included on purpose), and
//! `tweets.csv` is a labeled sentiment corpus with planted positive and
//! negative word pools, label noise, and the usual tweet debris — tickers,
//! hashtags, mentions, links, plus a sprinkle of blank-text and bad-label
//! rows the loader must skip.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRICE_SEED: u64 = 20100104;
const TWEET_SEED: u64 = 6000;

// ---------------------------------------------------------------- price

const FIRST_DAY: &str = "2010-01-04";
const LAST_DAY: &str = "2021-12-31";
const START_PRICE: f64 = 6.5;
const END_PRICE: f64 = 175.0;
const DAILY_SIGMA: f64 = 0.018;
/// Rows whose volume cell is left blank (parsers must skip, not fail).
const BLANK_VOLUME_ROWS: [usize; 2] = [500, 1500];

/// Standard normal via Box–Muller; two uniforms in, one normal out.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn weekdays(first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    let mut days = Vec::new();
    let mut day = first;
    while day <= last {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            days.push(day);
        }
        day += Duration::days(1);
    }
    days
}

fn price_csv() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(PRICE_SEED);
    let days = weekdays(
        NaiveDate::parse_from_str(FIRST_DAY, "%Y-%m-%d").unwrap(),
        NaiveDate::parse_from_str(LAST_DAY, "%Y-%m-%d").unwrap(),
    );
    let drift = (END_PRICE / START_PRICE).ln() / days.len() as f64;

    let mut out = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    let mut prev_close = START_PRICE;
    for (i, day) in days.iter().enumerate() {
        let close = prev_close * (drift + DAILY_SIGMA * normal(&mut rng)).exp();
        let open = prev_close * (1.0 + 0.004 * normal(&mut rng));
        let body_hi = open.max(close);
        let body_lo = open.min(close);
        // the 8e-4 margin keeps the bracket valid after 4-decimal rounding
        let high = body_hi * (1.0 + 8e-4 + 0.006 * normal(&mut rng).abs());
        let low = body_lo * (1.0 - 8e-4 - 0.006 * normal(&mut rng).abs());
        let volume = (9.0e7 * (0.35 * normal(&mut rng)).exp()).round() as u64;

        let volume_cell =
            if BLANK_VOLUME_ROWS.contains(&i) { String::new() } else { volume.to_string() };
        let _ = writeln!(
            out,
            "{day},{open:.4},{high:.4},{low:.4},{close:.4},{close:.4},{volume_cell}"
        );
        prev_close = close;
    }
    out
}

// ---------------------------------------------------------------- tweets

const TWEET_ROWS: usize = 6035;
/// Share of tweets whose underlying mood is positive.
const POSITIVE_SHARE: f64 = 0.53;
/// Chance each content slot carries a mood word rather than filler.
const SIGNAL_RATE: f64 = 0.40;
/// Chance a mood word matches the tweet's actual mood.
const SIGNAL_FIDELITY: f64 = 0.78;
/// Chance the written label contradicts the mood.
const LABEL_NOISE: f64 = 0.10;

const POSITIVE_WORDS: [&str; 40] = [
    "bullish", "rally", "surge", "soar", "gain", "breakout", "upgrade", "beat", "strong",
    "record", "growth", "profit", "winner", "climb", "rebound", "upside", "momentum", "boom",
    "outperform", "buy", "jump", "rocket", "green", "higher", "optimistic", "solid", "robust",
    "expand", "accelerate", "double", "confident", "thriving", "spike", "advance", "recover",
    "dividend", "innovative", "milestone", "golden", "moon",
];

const NEGATIVE_WORDS: [&str; 40] = [
    "bearish", "crash", "plunge", "tank", "loss", "breakdown", "downgrade", "miss", "weak",
    "lawsuit", "decline", "deficit", "loser", "drop", "selloff", "downside", "stall", "bust",
    "underperform", "sell", "dump", "sink", "red", "lower", "pessimistic", "shaky", "fragile",
    "shrink", "decelerate", "halve", "worried", "struggling", "slump", "retreat", "collapse",
    "cut", "overvalued", "warning", "toxic", "dead",
];

const NEUTRAL_WORDS: [&str; 121] = [
    "the", "market", "today", "stock", "shares", "price", "trading", "volume", "open", "close",
    "session", "chart", "level", "support", "resistance", "trend", "analyst", "report",
    "earnings", "quarter", "revenue", "guidance", "forecast", "estimate", "consensus", "call",
    "investor", "trader", "position", "portfolio", "watchlist", "ticker", "index", "sector",
    "tech", "iphone", "product", "launch", "event", "keynote", "supply", "chain", "china",
    "demand", "holiday", "season", "update", "news", "story", "headline", "article", "thread",
    "chatter", "buzz", "volatility", "options", "calls", "puts", "strike", "expiry", "premium",
    "hedge", "fund", "institutional", "retail", "float", "short", "interest", "squeeze",
    "candle", "daily", "weekly", "monthly", "moving", "average", "crossover", "signal",
    "indicator", "pattern", "setup", "entry", "exit", "target", "stop", "risk", "reward",
    "ratio", "cash", "balance", "sheet", "debt", "buyback", "split", "board", "ceo", "team",
    "store", "sales", "unit", "margin", "cost", "capex", "cycle", "macro", "fed", "rates",
    "inflation", "dollar", "bond", "yield", "curve", "economy", "data", "jobs", "print",
    "futures", "premarket", "afterhours", "gap", "watch", "note",
];

const HASHTAGS: [&str; 4] = ["#stocks", "#trading", "#market", "#investing"];
const MENTIONS: [&str; 5] = ["@tim_cook", "@marketwatch", "@cnbc", "@benzinga", "@zerohedge"];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn tweet_text(rng: &mut ChaCha8Rng, positive: bool) -> String {
    let n_words = rng.gen_range(6..15);
    let mut words: Vec<String> = Vec::with_capacity(n_words + 3);

    if rng.gen_bool(0.35) {
        words.push("$AAPL".to_string());
    }
    for _ in 0..n_words {
        let word = if rng.gen_bool(SIGNAL_RATE) {
            let own = rng.gen_bool(SIGNAL_FIDELITY);
            if positive == own {
                pick(rng, &POSITIVE_WORDS)
            } else {
                pick(rng, &NEGATIVE_WORDS)
            }
        } else {
            pick(rng, &NEUTRAL_WORDS)
        };
        words.push(word.to_string());
    }
    if rng.gen_bool(0.20) {
        let spot = rng.gen_range(0..=words.len());
        words.insert(spot, pick(rng, &MENTIONS).to_string());
    }
    if rng.gen_bool(0.25) {
        words.push(pick(rng, &HASHTAGS).to_string());
    }
    if rng.gen_bool(0.15) {
        let tail: String =
            (0..8).map(|_| pick(rng, &["a", "b", "c", "x", "y", "z", "0", "7"])).collect();
        words.push(format!("https://t.co/{tail}"));
    }

    let mut text = words.join(" ");
    if rng.gen_bool(0.5) {
        let mut chars = text.chars();
        if let Some(first) = chars.next() {
            text = first.to_uppercase().collect::<String>() + chars.as_str();
        }
    }
    text
}

fn tweets_csv() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(TWEET_SEED);
    let mut out = String::from("text,label\n");
    for i in 0..TWEET_ROWS {
        // a thin deterministic seam of rows the loader must reject
        if i % 403 == 201 {
            let _ = writeln!(out, ",1");
            continue;
        }
        if i % 403 == 202 {
            let bad = if i % 2 == 0 { "0" } else { "soon" };
            let _ = writeln!(out, "{} {} this week,{bad}", pick(&mut rng, &NEUTRAL_WORDS), pick(&mut rng, &NEUTRAL_WORDS));
            continue;
        }
        let positive = rng.gen_bool(POSITIVE_SHARE);
        let text = tweet_text(&mut rng, positive);
        let flip = rng.gen_bool(LABEL_NOISE);
        let label = if positive != flip { "1" } else { "-1" };
        let _ = writeln!(out, "{text},{label}");
    }
    out
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).expect("create fixtures dir");

    let price = price_csv();
    std::fs::write(dir.join("aapl_daily.csv"), &price).expect("write price fixture");
    println!("aapl_daily.csv: {} lines", price.lines().count());

    let tweets = tweets_csv();
    std::fs::write(dir.join("tweets.csv"), &tweets).expect("write tweet fixture");
    println!("tweets.csv: {} lines", tweets.lines().count());
}
