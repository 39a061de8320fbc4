use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tfpilot::fmt_sig9;
use tfpilot::tfgrid::ComplexGrid;

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Path of the resolved-config echo for `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config");
    PathBuf::from(s)
}

/// `x y z` lines with `x` the column (delay) index, `y` the row (Doppler) index
/// and `z = |g|`; one blank-line separated block per row.
pub fn magnitude_triplets(g: &ComplexGrid) -> String {
    let mut out = String::from("# x=delay_index y=doppler_index z=magnitude\n");
    for row in g.rows().iter() {
        for col in g.cols().iter() {
            out.push_str(&format!("{} {} {}\n", col, row, fmt_sig9(g.get(row, col).norm())));
        }
        out.push('\n');
    }
    out
}

/// Largest magnitude away from the origin.
pub fn max_sidelobe(g: &ComplexGrid) -> f64 {
    g.iter().filter(|(i, _)| i.row != 0 || i.col != 0).map(|(_, v)| v.norm()).fold(0.0, f64::max)
}
