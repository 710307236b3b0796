//! CSV ingestion and emission. Input files carry a header row naming the
//! schema's variables in order; every value is a categorical string checked
//! against the schema, no type inference. Errors carry line numbers.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schema::{Dataset, Schema};

pub fn read_dataset_csv(path: &Path, schema: &Arc<Schema>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_error)?;

    let headers = reader.headers().map_err(csv_error)?.clone();
    let expected: Vec<&str> = schema.variables().iter().map(|v| v.name.as_str()).collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Csv {
            line: Some(1),
            message: format!(
                "header mismatch: expected [{}], got [{}]",
                expected.join(","),
                got.join(",")
            ),
        });
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    let borrowed: Vec<Vec<&str>> = rows
        .iter()
        .map(|r| r.iter().map(|s| s.as_str()).collect())
        .collect();
    Dataset::from_names(schema.clone(), &borrowed).map_err(|e| match e {
        // data rows start on line 2
        Error::InvalidRecord { index, detail } => Error::Csv {
            line: Some(index as u64 + 2),
            message: detail,
        },
        other => other,
    })
}

pub fn write_dataset_csv(path: &Path, x: &Dataset) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error)?;
    let header: Vec<&str> = x.schema().variables().iter().map(|v| v.name.as_str()).collect();
    writer.write_record(&header).map_err(csv_error)?;
    for i in 0..x.n() {
        let row: Vec<&str> = (0..x.schema().len()).map(|v| x.value_name(i, v)).collect();
        writer.write_record(&row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Role, Variable};

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![
                Variable::new("state", &["A", "B"], Role::Holding, true),
                Variable::new("county", &["x", "y"], Role::Swapping, false),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = std::env::temp_dir().join(format!("dpspec-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        let x = Dataset::from_names(schema(), &[vec!["A", "x"], vec!["B", "y"]]).unwrap();
        write_dataset_csv(&path, &x).unwrap();
        let back = read_dataset_csv(&path, &x.schema().clone()).unwrap();
        assert_eq!(back, x);
        // a second serialize of the parse is byte-identical
        let path2 = dir.join("roundtrip2.csv");
        write_dataset_csv(&path2, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn bad_value_reports_its_line() {
        let dir = std::env::temp_dir().join(format!("dpspec-csv-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "state,county\nA,x\nA,q\n").unwrap();
        let err = read_dataset_csv(&path, &schema()).unwrap_err();
        match err {
            Error::Csv { line, message } => {
                assert_eq!(line, Some(3));
                assert!(message.contains("\"q\""), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn header_mismatch_is_line_one() {
        let dir = std::env::temp_dir().join(format!("dpspec-csv-hdr-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("hdr.csv");
        std::fs::write(&path, "county,state\nx,A\n").unwrap();
        let err = read_dataset_csv(&path, &schema()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: Some(1), .. }));
        std::fs::remove_dir_all(&dir).ok();
    }
}
