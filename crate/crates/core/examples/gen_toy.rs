//! Regenerates the bundled toy corpus under `data/toy`.

use crowdseq::data::write_gold_file;
use crowdseq::toy;

fn main() -> std::io::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    std::fs::create_dir_all(&dir)?;
    let splits = [
        ("train", toy::TRAIN_SIZE, toy::TRAIN_SEED),
        ("dev", toy::DEV_SIZE, toy::DEV_SEED),
        ("test", toy::TEST_SIZE, toy::TEST_SEED),
    ];
    for (name, size, seed) in splits {
        let text = write_gold_file(&toy::generate(size, seed));
        std::fs::write(dir.join(format!("{name}.conll")), text)?;
    }
    Ok(())
}
