//! CSV ingestion and emission.
//!
//! Count tables are wide: header `group,c1,...,cJ`, one row per group.
//! Multi-response data is long: header `group,subject,var,category` with
//! 0-based integer categories. Plain matrices are headerless rows of
//! numbers.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use ndarray::Array2;
use ordmat::{Error, MultiResponseDataset, OrdinalCounts, Result};

fn parse_error(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Reads a wide count table; returns the group labels in file order.
pub fn read_counts_csv<R: Read>(reader: R) -> Result<(Vec<String>, OrdinalCounts)> {
    let mut csv_reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv_reader.headers().map_err(|e| parse_error(e.to_string()))?.clone();
    if headers.len() < 3 || headers.get(0) != Some("group") {
        return Err(parse_error(
            "count tables need a header group,c1,...,cJ with at least two categories",
        ));
    }
    let categories = headers.len() - 1;
    let mut labels = Vec::new();
    let mut rows: Vec<u64> = Vec::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(e.to_string()))?;
        if record.len() != categories + 1 {
            return Err(parse_error(format!(
                "row {}: expected {} fields, got {}",
                line + 2,
                categories + 1,
                record.len()
            )));
        }
        labels.push(record[0].to_string());
        for field in 1..record.len() {
            let value: u64 = record[field].parse().map_err(|_| {
                parse_error(format!(
                    "row {}, column {}: {:?} is not a nonnegative count",
                    line + 2,
                    field + 1,
                    &record[field]
                ))
            })?;
            rows.push(value);
        }
    }
    if labels.is_empty() {
        return Err(parse_error("count table has no data rows"));
    }
    let counts = Array2::from_shape_vec((labels.len(), categories), rows)
        .map_err(|e| parse_error(e.to_string()))?;
    Ok((labels, OrdinalCounts::new(counts)?))
}

/// Writes a wide count table that [`read_counts_csv`] parses back
/// identically.
pub fn write_counts_csv<W: Write>(
    writer: W,
    labels: &[String],
    counts: &OrdinalCounts,
) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    let mut header = vec!["group".to_string()];
    for j in 1..=counts.categories() {
        header.push(format!("c{j}"));
    }
    csv_writer.write_record(&header).map_err(|e| parse_error(e.to_string()))?;
    for (i, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        for j in 0..counts.categories() {
            row.push(counts.counts()[(i, j)].to_string());
        }
        csv_writer.write_record(&row).map_err(|e| parse_error(e.to_string()))?;
    }
    csv_writer.flush().map_err(|e| parse_error(e.to_string()))?;
    Ok(())
}

/// Reads long-format records. Group and variable order follow first
/// appearance; category counts per variable are inferred from the largest
/// label unless `categories` pins them.
pub fn read_records_csv<R: Read>(
    reader: R,
    categories: Option<usize>,
) -> Result<(Vec<String>, Vec<String>, MultiResponseDataset)> {
    let mut csv_reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv_reader.headers().map_err(|e| parse_error(e.to_string()))?;
    let expected = ["group", "subject", "var", "category"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(parse_error("record files need the header group,subject,var,category"));
    }
    let mut group_names: Vec<String> = Vec::new();
    let mut var_names: Vec<String> = Vec::new();
    // (group, subject) -> var -> label
    let mut subjects: BTreeMap<(usize, String), BTreeMap<usize, u32>> = BTreeMap::new();
    let mut subject_order: Vec<(usize, String)> = Vec::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(e.to_string()))?;
        if record.len() != 4 {
            return Err(parse_error(format!("row {}: expected 4 fields", line + 2)));
        }
        let group = match group_names.iter().position(|g| g == &record[0]) {
            Some(i) => i,
            None => {
                group_names.push(record[0].to_string());
                group_names.len() - 1
            }
        };
        let var = match var_names.iter().position(|v| v == &record[2]) {
            Some(i) => i,
            None => {
                var_names.push(record[2].to_string());
                var_names.len() - 1
            }
        };
        let label: u32 = record[3].parse().map_err(|_| {
            parse_error(format!("row {}: {:?} is not a 0-based category", line + 2, &record[3]))
        })?;
        let key = (group, record[1].to_string());
        if !subjects.contains_key(&key) {
            subject_order.push(key.clone());
        }
        if subjects.entry(key).or_default().insert(var, label).is_some() {
            return Err(parse_error(format!(
                "row {}: duplicate label for subject {:?} variable {:?}",
                line + 2,
                &record[1],
                &record[2]
            )));
        }
    }
    if var_names.is_empty() {
        return Err(parse_error("record file has no data rows"));
    }
    let inferred: Vec<usize> = (0..var_names.len())
        .map(|v| {
            subjects
                .values()
                .filter_map(|labels| labels.get(&v))
                .map(|&l| l as usize + 1)
                .max()
                .unwrap_or(0)
                .max(2)
        })
        .collect();
    let categories: Vec<usize> = match categories {
        Some(j) => vec![j; var_names.len()],
        None => inferred,
    };
    let mut groups: Vec<Vec<Vec<u32>>> = vec![Vec::new(); group_names.len()];
    for key in subject_order {
        let labels = &subjects[&key];
        let mut record = Vec::with_capacity(var_names.len());
        for v in 0..var_names.len() {
            let label = labels.get(&v).ok_or_else(|| {
                parse_error(format!(
                    "subject {:?} in group {:?} is missing variable {:?}",
                    key.1, group_names[key.0], var_names[v]
                ))
            })?;
            record.push(*label);
        }
        groups[key.0].push(record);
    }
    let dataset = MultiResponseDataset::new(groups, categories)?;
    Ok((group_names, var_names, dataset))
}

/// Reads a headerless numeric matrix.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Array2<f64>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data: Vec<f64> = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0;
    for (line, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(e.to_string()))?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_error(format!(
                    "row {}: expected {} fields, got {}",
                    line + 1,
                    c,
                    record.len()
                )));
            }
            _ => {}
        }
        for (field, value) in record.iter().enumerate() {
            let parsed: f64 = value.parse().map_err(|_| {
                parse_error(format!(
                    "row {}, column {}: {value:?} is not a number",
                    line + 1,
                    field + 1
                ))
            })?;
            data.push(parsed);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_error("matrix file is empty"))?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| parse_error(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_round_trip() {
        let input = "group,c1,c2,c3\ncontrol,5,3,2\ntreated,1,4,5\n";
        let (labels, counts) = read_counts_csv(input.as_bytes()).unwrap();
        assert_eq!(labels, vec!["control", "treated"]);
        let mut out = Vec::new();
        write_counts_csv(&mut out, &labels, &counts).unwrap();
        let (labels2, counts2) = read_counts_csv(out.as_slice()).unwrap();
        assert_eq!(labels, labels2);
        assert_eq!(counts, counts2);
    }

    #[test]
    fn counts_rejects_malformed_input() {
        assert!(read_counts_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_counts_csv("group,c1,c2\ng1,1,-2\n".as_bytes()).is_err());
        assert!(read_counts_csv("group,c1,c2\ng1,1,x\n".as_bytes()).is_err());
        assert!(read_counts_csv("group,c1,c2\n".as_bytes()).is_err());
    }

    #[test]
    fn records_parse_in_first_appearance_order() {
        let input = "group,subject,var,category\n\
                     g1,s1,ulcer,2\n\
                     g1,s1,blister,0\n\
                     g1,s2,ulcer,1\n\
                     g1,s2,blister,1\n\
                     g2,s1,ulcer,0\n\
                     g2,s1,blister,2\n";
        let (groups, vars, data) = read_records_csv(input.as_bytes(), None).unwrap();
        assert_eq!(groups, vec!["g1", "g2"]);
        assert_eq!(vars, vec!["ulcer", "blister"]);
        assert_eq!(data.group_sizes(), vec![2, 1]);
        assert_eq!(data.categories(), &[3, 3]);
        let counts = data.counts_for(0).unwrap();
        assert_eq!(counts.counts().row(0).to_vec(), vec![0, 1, 1]);
    }

    #[test]
    fn records_reject_missing_variables() {
        let input = "group,subject,var,category\ng1,s1,a,0\ng1,s2,a,1\ng2,s1,a,0\ng2,s1,b,1\n";
        assert!(read_records_csv(input.as_bytes(), None).is_err());
    }

    #[test]
    fn matrix_parses() {
        let m = read_matrix_csv("1.5,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(m.dim(), (2, 2));
        assert_eq!(m[(0, 0)], 1.5);
        assert!(read_matrix_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_matrix_csv("".as_bytes()).is_err());
    }
}
