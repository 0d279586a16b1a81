//! Reading and atomically writing the on-disk formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::election::Election;
use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file beside `path`, then renames it into place,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let attempt = || -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        fs::create_dir_all(dir)?;
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    };
    attempt().map_err(|e| e.in_file(path))
}

/// Reads an election in the canonical text format, or JSON when the file
/// name ends in `.json`.
pub fn read_election(path: &Path) -> Result<Election> {
    let attempt = || -> Result<Election> {
        let text = fs::read_to_string(path)?;
        if path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("json"))
        {
            Election::from_json(&text)
        } else {
            Election::from_text(&text)
        }
    };
    attempt().map_err(|e| e.in_file(path))
}

pub fn write_election(path: &Path, e: &Election) -> Result<()> {
    write_atomic(path, e.to_text().as_bytes())
}

/// Election files in `dir` (`.txt`, `.app` or `.json`), sorted by file name.
pub fn election_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let attempt = || -> Result<Vec<std::path::PathBuf>> {
        let mut files: Vec<_> = fs::read_dir(dir)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|x| x.to_str())
                        .is_some_and(|x| matches!(x, "txt" | "app" | "json"))
                    && p.file_name().and_then(|n| n.to_str()) != Some("manifest.json")
            })
            .collect();
        files.sort();
        Ok(files)
    };
    attempt().map_err(|e| e.in_file(dir))
}

/// The file stem, used as an election label.
pub fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let e = Election::new(3, vec![vec![0, 2], vec![]]).unwrap();
        let text = dir.path().join("nested/a.txt");
        write_election(&text, &e).unwrap();
        assert_eq!(read_election(&text).unwrap(), e);

        let json = dir.path().join("b.json");
        write_atomic(&json, e.to_json().as_bytes()).unwrap();
        assert_eq!(read_election(&json).unwrap(), e);
        write_atomic(&dir.path().join("manifest.json"), b"{}").unwrap();

        let files = election_files(dir.path()).unwrap();
        assert_eq!(files, vec![json.clone()]);
        assert_eq!(label_of(&json), "b");

        let err = read_election(&dir.path().join("missing.txt")).unwrap_err();
        assert!(err.to_string().contains("missing.txt"), "{err}");
    }
}
