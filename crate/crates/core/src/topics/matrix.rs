use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::TopicsError;

const MAGIC: &[u8; 4] = b"AFEM";

/// Item embeddings computed upstream, one row per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texts: Option<Vec<String>>,
}

impl EmbeddingMatrix {
    /// Checks `n ≥ 1`, equal row lengths, finite values and unique ids.
    pub fn new(ids: Vec<String>, rows: Vec<Vec<f64>>, texts: Option<Vec<String>>) -> Result<Self, TopicsError> {
        if rows.is_empty() {
            return Err(TopicsError::Empty);
        }
        if ids.len() != rows.len() || texts.as_ref().is_some_and(|t| t.len() != rows.len()) {
            return Err(TopicsError::Malformed("ids, rows and texts differ in length".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(TopicsError::Malformed("zero-width rows".into()));
        }
        for (id, r) in ids.iter().zip(&rows) {
            if r.len() != d {
                return Err(TopicsError::Malformed(format!("row {id} has {} columns, expected {d}", r.len())));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(TopicsError::Malformed(format!("row {id} has a non-finite value")));
            }
        }
        let mut sorted: Vec<&String> = ids.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(TopicsError::Malformed(format!("duplicate id {}", w[0])));
        }
        Ok(EmbeddingMatrix { ids, rows, texts })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dimensions(&self) -> usize {
        self.rows[0].len()
    }

    /// CSV with an `id` column, an optional `text` column and one numeric
    /// column per dimension.
    pub fn read_csv(r: impl Read) -> Result<Self, TopicsError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("id") {
            return Err(TopicsError::Malformed("first column must be `id`".into()));
        }
        let text_col = header.iter().position(|h| h == "text");
        let (mut ids, mut rows, mut texts) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            ids.push(rec[0].to_string());
            let mut row = Vec::with_capacity(rec.len());
            for (i, field) in rec.iter().enumerate().skip(1) {
                if Some(i) == text_col {
                    texts.push(field.to_string());
                    continue;
                }
                row.push(field.trim().parse::<f64>().map_err(|_| {
                    TopicsError::Malformed(format!("line {}: {:?} is not a number", line + 2, field))
                })?);
            }
            rows.push(row);
        }
        EmbeddingMatrix::new(ids, rows, text_col.map(|_| texts))
    }

    pub fn write_csv(&self, w: impl Write) -> Result<(), TopicsError> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string()];
        if self.texts.is_some() {
            header.push("text".into());
        }
        header.extend((0..self.dimensions()).map(|i| format!("f{i}")));
        out.write_record(&header)?;
        for (i, (id, row)) in self.ids.iter().zip(&self.rows).enumerate() {
            let mut rec = vec![id.clone()];
            if let Some(t) = &self.texts {
                rec.push(t[i].clone());
            }
            rec.extend(row.iter().map(|x| x.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Little-endian binary: `AFEM`, `u32 n`, `u32 d`, then per item a
    /// `u32` id length, the UTF-8 id and `d` `f64` values.
    pub fn read_binary(mut r: impl Read) -> Result<Self, TopicsError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(TopicsError::Malformed("bad magic".into()));
        }
        let mut u32_buf = [0u8; 4];
        let mut read_u32 = |r: &mut dyn Read| -> Result<usize, TopicsError> {
            r.read_exact(&mut u32_buf)?;
            Ok(u32::from_le_bytes(u32_buf) as usize)
        };
        let n = read_u32(&mut r)?;
        let d = read_u32(&mut r)?;
        let (mut ids, mut rows) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let len = read_u32(&mut r)?;
            let mut id = vec![0u8; len];
            r.read_exact(&mut id)?;
            ids.push(String::from_utf8(id).map_err(|_| TopicsError::Malformed("id is not UTF-8".into()))?);
            let mut row = vec![0.0; d];
            let mut b = [0u8; 8];
            for x in &mut row {
                r.read_exact(&mut b)?;
                *x = f64::from_le_bytes(b);
            }
            rows.push(row);
        }
        EmbeddingMatrix::new(ids, rows, None)
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<(), TopicsError> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(self.dimensions() as u32).to_le_bytes())?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            w.write_all(&(id.len() as u32).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
            for x in row {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads binary when the file starts with the magic bytes, CSV otherwise.
    pub fn load(path: &std::path::Path) -> Result<Self, TopicsError> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            Self::read_binary(bytes.as_slice())
        } else {
            Self::read_csv(bytes.as_slice())
        }
    }
}
