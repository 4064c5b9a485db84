//! Regenerate `data/vocab.txt` from `data/titles.txt`.
//!
//!     cargo run -p cite-audit-core --example build_vocab > crates/core/data/vocab.txt

use cite_audit_core::matching::{build_vocab, bundled_titles};

fn main() {
    let vocab = build_vocab(&bundled_titles()).expect("bundled corpus is not empty");
    print!("{}", vocab.to_lines());
}
