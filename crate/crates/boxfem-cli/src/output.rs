//! Output directory handling and deterministic CSV formatting.
//!
//! Every file is created (with its header) before any analysis starts, so an
//! unwritable path fails fast. All numbers are printed through fixed format
//! strings, which keeps reruns byte-identical.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use boxfem::section::PlateTag;
use boxfem::shearlag::LambdaProfile;

use crate::CliError;

pub const PROFILE_HEADER: &str = "cut_id,plate,x_m,y_m,sigma_Pa,sigma_bar_Pa,lambda,defined_flag";
pub const SUMMARY_HEADER: &str = "cut_id,plate,max_lambda,min_lambda,x_at_max_m";
pub const SWEEP_HEADER: &str = "sweep_value,cut_id,plate,max_lambda,min_lambda,x_at_max_m";
pub const LIVE_SUMMARY_HEADER: &str = "station_z_m,cut_id,plate,max_lambda,min_lambda,x_at_max_m";
pub const STAGE_LOG_HEADER: &str = "stage,active_segments,total_load_N,max_deflection_m";
pub const REACTIONS_HEADER: &str = "node,dof,reaction_N";
pub const ANALYTIC_HEADER: &str =
    "load_case,plate,x_m,y_m,sigma_Pa,sigma_bar_Pa,lambda,defined_flag";
pub const SECTION_HEADER: &str = "section,ring,idx,x_m,y_m";

/// The run's output directory.
pub struct Out {
    dir: PathBuf,
}

impl Out {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| {
            CliError::Config(vec![format!("cannot create '{}': {e}", dir.display())])
        })?;
        Ok(Out {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Creates (truncates) `name` and writes the header line.
    pub fn create(&self, name: &str, header: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.path(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Config(vec![format!("cannot write '{}': {e}", path.display())]))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{header}").map_err(io_err)?;
        Ok(w)
    }

    /// Creates (truncates) `name` without writing anything, for non-CSV
    /// formats that emit their own preamble.
    pub fn create_raw(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.path(name);
        let file = File::create(&path)
            .map_err(|e| CliError::Config(vec![format!("cannot write '{}': {e}", path.display())]))?;
        Ok(BufWriter::new(file))
    }

    /// Reopens a file created earlier for appending (used by sweep workers).
    pub fn append(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.path(name);
        let file = OpenOptions::new().append(true).open(&path).map_err(|e| {
            CliError::Config(vec![format!("cannot reopen '{}': {e}", path.display())])
        })?;
        Ok(BufWriter::new(file))
    }
}

pub fn io_err(e: std::io::Error) -> CliError {
    CliError::Config(vec![format!("write failed: {e}")])
}

/// Stress in scientific notation, 7 significant digits.
pub fn sig(v: f64) -> String {
    format!("{v:.6e}")
}

/// Coordinates, 4 decimals (sub-millimetre).
pub fn coord(v: f64) -> String {
    format!("{v:.4}")
}

/// Dimensionless ratios, 6 decimals.
pub fn ratio(v: f64) -> String {
    format!("{v:.6}")
}

pub fn plate_name(p: PlateTag) -> &'static str {
    match p {
        PlateTag::Top => "top",
        PlateTag::Bottom => "bottom",
        PlateTag::WebLeft => "web_left",
        PlateTag::WebRight => "web_right",
        PlateTag::CantileverLeft => "cant_left",
        PlateTag::CantileverRight => "cant_right",
    }
}

/// Fixed emission order of per-plate summary rows.
pub const PLATE_ORDER: [PlateTag; 6] = [
    PlateTag::Top,
    PlateTag::Bottom,
    PlateTag::CantileverLeft,
    PlateTag::CantileverRight,
    PlateTag::WebLeft,
    PlateTag::WebRight,
];

/// Index of a plate in [`PLATE_ORDER`], for deterministic sorting.
pub fn plate_rank(p: PlateTag) -> usize {
    PLATE_ORDER.iter().position(|&q| q == p).expect("known plate")
}

/// Writes one profile's fiber rows under the documented schema.
pub fn write_profile_rows<W: Write>(
    w: &mut W,
    cut_id: &str,
    profile: &LambdaProfile,
) -> Result<(), CliError> {
    for s in &profile.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            cut_id,
            plate_name(s.plate),
            coord(s.x),
            coord(s.y),
            sig(s.sigma),
            sig(s.sigma_bar),
            ratio(s.lambda),
            u8::from(s.defined),
        )
        .map_err(io_err)?;
    }
    Ok(())
}
