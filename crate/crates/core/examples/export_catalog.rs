//! Writes every built-in basic set as a JSON input document into the given directory.

use sft_core::{catalog, BasicSetDoc};

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "inputs".into());
    std::fs::create_dir_all(&dir).expect("create output directory");
    for name in catalog::NAMES {
        let b = catalog::by_name(name).expect("catalog name");
        let mut doc = BasicSetDoc::from(&b);
        doc.name = Some(name.to_string());
        let path = format!("{dir}/{}.json", name.replace('-', "_"));
        std::fs::write(&path, serde_json::to_string(&doc).expect("doc serializes") + "\n").expect("write document");
        println!("{path}");
    }
}
