use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fracflux::diagnostics::{fmt_float, write_metadata};
use fracflux::Trajectory;

/// Files written into one output directory, plus the `meta.txt` sidecar that
/// describes all of them.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    results: Vec<(String, String)>,
}

impl Output {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            results: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn result(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.results.push((key.into(), value.into()));
    }

    pub fn results(&self) -> &[(String, String)] {
        &self.results
    }

    /// Writes `meta.txt`: the header pairs, the list of files, then results.
    pub fn finish(mut self, header: Vec<(String, String)>) -> io::Result<PathBuf> {
        let mut pairs = header;
        pairs.push(("files".into(), self.files.join(";")));
        pairs.append(&mut self.results);
        let path = self.dir.join("meta.txt");
        let mut w = BufWriter::new(File::create(&path)?);
        write_metadata(&mut w, &pairs)?;
        w.flush()?;
        Ok(path)
    }
}

/// One row per recorded time: `t` followed by the samples. The header lists
/// the node positions.
pub fn write_trajectory(w: &mut dyn Write, traj: &Trajectory) -> io::Result<()> {
    let nodes = traj.grid().nodes();
    write!(w, "t")?;
    for x in &nodes {
        write!(w, ",{}", fmt_float(*x))?;
    }
    writeln!(w)?;
    for (t, p) in traj.times().iter().zip(traj.profiles()) {
        write!(w, "{}", fmt_float(*t))?;
        for v in p.values() {
            write!(w, ",{}", fmt_float(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Header line followed by rows of floats.
pub fn write_table(w: &mut dyn Write, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| fmt_float(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
