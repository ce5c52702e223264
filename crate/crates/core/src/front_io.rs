//! Front files: `f1,f2,f3,genotype_id` rows in a CSV file, with the genotypes
//! in a JSON array next to it (`<stem>.genotypes.json`), indexed by id.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoding::Genotype;
use crate::error::{Error, Result};
use crate::evaluator::ObjectiveVector;
use crate::instance::{read_json, write_json};
use crate::moo::{FrontEntry, ParetoFront};

const HEADER: [&str; 4] = ["f1", "f2", "f3", "genotype_id"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    f1: f64,
    f2: f64,
    f3: f64,
    genotype_id: usize,
}

/// Path of the genotype file that accompanies the front CSV at `csv`.
pub fn genotypes_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.genotypes.json"))
}

pub fn export_front(front: &ParetoFront, path: &Path) -> Result<()> {
    if front.is_empty() {
        return Err(Error::EmptyFront);
    }
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for (id, e) in front.entries.iter().enumerate() {
        let o = e.objectives;
        w.serialize(Row { f1: o.f1, f2: o.f2, f3: o.f3, genotype_id: id }).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.into(), source })?;
    let genotypes: Vec<&Genotype> = front.entries.iter().map(|e| &e.genotype).collect();
    write_json(&genotypes_path(path), &genotypes)
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::MalformedFront {
            path: path.into(),
            reason: format!("header is `{}`, expected `{}`", header.iter().collect::<Vec<_>>().join(","), HEADER.join(",")),
        });
    }
    r.deserialize().collect::<std::result::Result<Vec<Row>, _>>().map_err(csv_err)
}

/// Objective vectors of a front CSV, without touching the genotype file.
pub fn import_vectors(path: &Path) -> Result<Vec<ObjectiveVector>> {
    let rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(Error::EmptyFront);
    }
    Ok(rows.iter().map(|r| ObjectiveVector::new(r.f1, r.f2, r.f3)).collect())
}

pub fn import_front(path: &Path) -> Result<ParetoFront> {
    let rows = read_rows(path)?;
    let genotypes: Vec<Genotype> = read_json(&genotypes_path(path))?;
    let mut entries = Vec::with_capacity(rows.len());
    for row in rows {
        let genotype = genotypes.get(row.genotype_id).cloned().ok_or_else(|| Error::MalformedFront {
            path: path.into(),
            reason: format!("genotype id {} not among the {} stored genotypes", row.genotype_id, genotypes.len()),
        })?;
        entries.push(FrontEntry { genotype, objectives: ObjectiveVector::new(row.f1, row.f2, row.f3) });
    }
    Ok(ParetoFront { entries })
}
