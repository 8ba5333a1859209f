//! The recorded CFR tensor and its `ISACCFR1` binary container.
//!
//! Layout, all little-endian:
//!
//! | field            | type                                   |
//! |------------------|----------------------------------------|
//! | magic            | `b"ISACCFR1"`                          |
//! | version          | u32 (= 1)                              |
//! | mode             | u8 (0 = ADTR, 1 = SATR)                |
//! | axis count       | u8                                     |
//! | axis lengths     | u32 each                               |
//! | axis grids       | f64 each, axes in declared order       |
//! | samples          | (re f64, im f64) pairs, last axis fastest |
//! | metadata length  | u64                                    |
//! | metadata         | UTF-8 (scenario snapshot echo)         |
//!
//! ADTR axes are `[time s, frequency Hz, port]`; SATR axes are
//! `[time s, rx element, tx element, frequency Hz]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Mode, Result, C64};

pub const MAGIC: &[u8; 8] = b"ISACCFR1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CfrDataset {
    pub mode: Mode,
    axes: Vec<Vec<f64>>,
    pub samples: Vec<C64>,
    pub metadata: String,
}

impl CfrDataset {
    pub fn new(mode: Mode, axes: Vec<Vec<f64>>, samples: Vec<C64>, metadata: String) -> Result<Self> {
        let want_axes = match mode {
            Mode::Adtr => 3,
            Mode::Satr => 4,
        };
        if axes.len() != want_axes {
            return Err(Error::DimensionMismatch(format!("{mode} dataset needs {want_axes} axes, got {}", axes.len())));
        }
        let total: usize = axes.iter().map(Vec::len).product();
        if total != samples.len() {
            return Err(Error::DimensionMismatch(format!(
                "axes describe {total} samples, tensor holds {}",
                samples.len()
            )));
        }
        Ok(Self {
            mode,
            axes,
            samples,
            metadata,
        })
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.axes[0]
    }

    pub fn freq_grid(&self) -> &[f64] {
        match self.mode {
            Mode::Adtr => &self.axes[1],
            Mode::Satr => &self.axes[3],
        }
    }

    pub fn n_time(&self) -> usize {
        self.axes[0].len()
    }

    pub fn n_freq(&self) -> usize {
        self.freq_grid().len()
    }

    /// ADTR monostatic port count.
    pub fn n_ports(&self) -> usize {
        match self.mode {
            Mode::Adtr => self.axes[2].len(),
            Mode::Satr => self.axes[1].len() * self.axes[2].len(),
        }
    }

    pub fn carrier_hz(&self) -> f64 {
        let f = self.freq_grid();
        (f[0] + f[f.len() - 1]) / 2.0
    }

    pub fn bandwidth_hz(&self) -> f64 {
        let f = self.freq_grid();
        f[f.len() - 1] - f[0]
    }

    pub fn freq_step(&self) -> f64 {
        self.bandwidth_hz() / (self.n_freq() - 1) as f64
    }

    /// Baseband offsets `f - carrier`, rebuilt from the grid endpoints.
    pub fn baseband_offsets(&self) -> Vec<f64> {
        let b = self.bandwidth_hz();
        let df = self.freq_step();
        (0..self.n_freq()).map(|j| -b / 2.0 + j as f64 * df).collect()
    }

    pub fn time_step(&self) -> Option<f64> {
        let t = self.time_grid();
        (t.len() >= 2).then(|| t[1] - t[0])
    }

    pub fn adtr_sample(&self, time: usize, freq: usize, port: usize) -> C64 {
        let (nf, k) = (self.axes[1].len(), self.axes[2].len());
        self.samples[(time * nf + freq) * k + port]
    }

    pub fn satr_sample(&self, time: usize, rx: usize, tx: usize, freq: usize) -> C64 {
        let (nr, nt, nf) = (self.axes[1].len(), self.axes[2].len(), self.axes[3].len());
        self.samples[((time * nr + rx) * nt + tx) * nf + freq]
    }

    /// ADTR `N_t × N_f` time–frequency slice of one port, row-major.
    pub fn port_slice(&self, port: usize) -> Vec<C64> {
        let (nt, nf) = (self.n_time(), self.axes[1].len());
        let mut out = Vec::with_capacity(nt * nf);
        for i in 0..nt {
            for j in 0..nf {
                out.push(self.adtr_sample(i, j, port));
            }
        }
        out
    }

    /// Size of the encoded file in bytes.
    pub fn encoded_len(&self) -> u64 {
        let dims = self.dims();
        header_len(dims.len())
            + 8 * dims.iter().sum::<usize>() as u64
            + 16 * self.samples.len() as u64
            + 8
            + self.metadata.len() as u64
    }
}

fn header_len(axis_count: usize) -> u64 {
    8 + 4 + 1 + 1 + 4 * axis_count as u64
}

fn mode_code(mode: Mode) -> u8 {
    match mode {
        Mode::Adtr => 0,
        Mode::Satr => 1,
    }
}

pub fn write_dataset(d: &CfrDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = crate::fsutil::temp_beside(path)?;
    let io = |e| Error::io(path, e);
    {
        let mut w = BufWriter::with_capacity(1 << 20, tmp.as_file());
        w.write_all(MAGIC).map_err(io)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io)?;
        w.write_all(&[mode_code(d.mode), d.axes.len() as u8]).map_err(io)?;
        for a in &d.axes {
            let len = u32::try_from(a.len()).map_err(|_| Error::invalid("axis longer than u32::MAX"))?;
            w.write_all(&len.to_le_bytes()).map_err(io)?;
        }
        for v in d.axes.iter().flatten() {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        for s in &d.samples {
            w.write_all(&s.re.to_le_bytes()).map_err(io)?;
            w.write_all(&s.im.to_le_bytes()).map_err(io)?;
        }
        w.write_all(&(d.metadata.len() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(d.metadata.as_bytes()).map_err(io)?;
        w.flush().map_err(io)?;
    }
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Byte reader that tracks its offset for diagnostics.
struct Cursor<R> {
    inner: R,
    offset: u64,
    file_len: u64,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| Error::Format {
            offset: self.offset,
            message: format!("read failed: {e}"),
        })?;
        self.offset += N as u64;
        Ok(buf)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn need(&self, expected_total: u64) -> Result<()> {
        if self.file_len < expected_total {
            return Err(Error::Truncated {
                expected: expected_total,
                actual: self.file_len,
            });
        }
        Ok(())
    }
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<CfrDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let file_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut c = Cursor {
        inner: BufReader::with_capacity(1 << 20, file),
        offset: 0,
        file_len,
    };

    c.need(header_len(0))?;
    let magic: [u8; 8] = c.bytes()?;
    if &magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {:?}", String::from_utf8_lossy(&magic)),
        });
    }
    let version = u32::from_le_bytes(c.bytes()?);
    if version != FORMAT_VERSION {
        return Err(Error::Format {
            offset: 8,
            message: format!("unsupported version {version}"),
        });
    }
    let [mode_byte, axis_count] = c.bytes::<2>()?;
    let mode = match mode_byte {
        0 => Mode::Adtr,
        1 => Mode::Satr,
        m => {
            return Err(Error::Format {
                offset: 12,
                message: format!("unknown mode {m}"),
            })
        }
    };
    let axis_count = axis_count as usize;
    c.need(header_len(axis_count))?;
    let lens = (0..axis_count)
        .map(|_| Ok(u32::from_le_bytes(c.bytes()?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let total: u64 = lens.iter().map(|&l| l as u64).product();
    let body_end = header_len(axis_count) + 8 * lens.iter().sum::<usize>() as u64 + 16 * total;
    c.need(body_end + 8)?;

    let axes = lens
        .iter()
        .map(|&l| (0..l).map(|_| c.f64()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::with_capacity(total as usize);
    for _ in 0..total {
        let re = c.f64()?;
        let im = c.f64()?;
        samples.push(C64::new(re, im));
    }
    let meta_len = u64::from_le_bytes(c.bytes()?);
    let expected = body_end + 8 + meta_len;
    if file_len < expected {
        return Err(Error::Truncated {
            expected,
            actual: file_len,
        });
    }
    if file_len > expected {
        return Err(Error::Format {
            offset: expected,
            message: format!("{} trailing bytes", file_len - expected),
        });
    }
    let meta_offset = c.offset;
    let mut meta = vec![0u8; meta_len as usize];
    c.inner.read_exact(&mut meta).map_err(|e| Error::io(path, e))?;
    let metadata = String::from_utf8(meta).map_err(|e| Error::Format {
        offset: meta_offset + e.utf8_error().valid_up_to() as u64,
        message: "metadata is not UTF-8".into(),
    })?;
    CfrDataset::new(mode, axes, samples, metadata).map_err(|e| Error::Format {
        offset: 13,
        message: e.to_string(),
    })
}
