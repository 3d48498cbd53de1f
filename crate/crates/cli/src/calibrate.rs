use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use sentinel_core::geometry::calibrate_focal_length;

use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Real width of the reference face, in meters.
    #[arg(long)]
    pub face_width_m: f64,
    /// Camera-to-face distance in the reference photo, in meters.
    #[arg(long)]
    pub distance_m: f64,
    /// Face width measured in the reference photo, in pixels.
    #[arg(long)]
    pub width_px: f64,
    /// Image size used to place the principal point at the center.
    #[arg(long, default_value_t = 640)]
    pub image_width: u32,
    #[arg(long, default_value_t = 480)]
    pub image_height: u32,
    /// Calibration JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.image_width == 0 || args.image_height == 0 {
        return Err(CliError::Usage("image size must be positive".into()));
    }
    let calib = calibrate_focal_length(args.face_width_m, args.distance_m, args.width_px)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .centered_on(args.image_width, args.image_height);
    let json = serde_json::to_string_pretty(&calib).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(&args.out, json + "\n").map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    writeln!(out, "focal_length_px={}", calib.focal_length_px)?;
    Ok(())
}
