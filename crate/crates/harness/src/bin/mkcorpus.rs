//! Regenerates the bundled corpora from the fixture tables. The generated
//! files are committed; rerun after changing `fixtures.rs`.

use ctxaudit_harness::fixtures::{
    shell_records, to_jsonl, web_benign_records, web_exploit_records,
};
use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpora"));
    std::fs::create_dir_all(&out_dir)?;
    for (name, records) in [
        ("web_exploits.jsonl", web_exploit_records()),
        ("web_benign.jsonl", web_benign_records()),
        ("shell_cases.jsonl", shell_records()),
    ] {
        let path = out_dir.join(name);
        std::fs::write(&path, to_jsonl(&records))?;
        println!("wrote {} records to {}", records.len(), path.display());
    }
    Ok(())
}
