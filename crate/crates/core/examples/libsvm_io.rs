//! Write a dataset in LIBSVM format (gzipped), read it back and print the
//! summary row used by the command-line tool.
//!
//! ```text
//! cargo run --release --example libsvm_io [path/to/data.svm]
//! ```

use std::fs::File;

use flate2::write::GzEncoder;
use flate2::Compression;
use ps2gd::data_io::{
    read_libsvm_file, summarize, synth_logistic, write_libsvm, DatasetSummary, ParseOptions,
};
use ps2gd::model::Loss;

fn main() -> ps2gd::Result<()> {
    let dataset = match std::env::args().nth(1) {
        Some(path) => read_libsvm_file(path, ParseOptions::default())?,
        None => {
            let dir = tempfile::tempdir()?;
            let path = dir.path().join("synthetic.svm.gz");
            let original = synth_logistic(500, 30, false, 5)?;
            let mut gz = GzEncoder::new(File::create(&path)?, Compression::default());
            write_libsvm(&original, &mut gz)?;
            gz.finish()?;
            let back = read_libsvm_file(&path, ParseOptions::default())?;
            assert_eq!(back, original);
            println!("round trip through {} is exact", path.display());
            back
        }
    };
    println!("{}", DatasetSummary::HEADER);
    println!("{}", summarize(&dataset, Loss::Logistic, true)?.table_row());
    Ok(())
}
