//! Text normalization: URLs, digits, punctuation, symbols and case.
//!
//!     cargo run --example preprocessing [-- "some text"]

use propmap::textprep::{self, PreprocessConfig};

fn main() {
    let inputs: Vec<String> = match std::env::args().nth(1) {
        Some(t) => vec![t],
        None => vec![
            "Visit https://example.com/a?b=1 NOW!!! Price: $100 (50% off) ©2020".into(),
            "NATION, the #1 threat -- says PERSON's aide in 2019.".into(),
            "Ünïcode Ⅻ ½ «quoted» text".into(),
        ],
    };
    let keep_case = PreprocessConfig {
        lowercase: false,
        ..Default::default()
    };
    for text in &inputs {
        println!("input:      {text}");
        println!("default:    {}", textprep::preprocess(text, &PreprocessConfig::default()));
        println!("keep case:  {}", textprep::preprocess(text, &keep_case));
        println!();
    }
}
