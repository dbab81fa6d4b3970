//! CSV writers. Floats use Rust's shortest round-trip formatting.

use std::io::Write;

use crate::channel::ChannelResponse;
use crate::error::Result;
use crate::leakage::LeakageProfile;

pub fn write_response_csv<W: Write>(mut w: W, resp: &ChannelResponse) -> Result<()> {
    writeln!(w, "frequency_hz,gain_db,phase_rad,v_rx_volts")?;
    for i in 0..resp.len() {
        writeln!(
            w,
            "{},{},{},{}",
            resp.frequencies[i],
            resp.gain_db[i],
            resp.complex_gain[i].arg(),
            resp.v_rx[i].norm()
        )?;
    }
    Ok(())
}

pub fn write_leakage_csv<W: Write>(mut w: W, p: &LeakageProfile) -> Result<()> {
    writeln!(w, "distance_m,v_off_volts,ratio")?;
    for i in 0..p.distances.len() {
        writeln!(w, "{},{},{}", p.distances[i], p.v_off[i], p.ratio[i])?;
    }
    Ok(())
}

/// `frequency_hz,gain_db` rows for magnitude-only responses.
pub fn write_gain_csv<W: Write>(mut w: W, resp: &ChannelResponse) -> Result<()> {
    writeln!(w, "frequency_hz,gain_db")?;
    for i in 0..resp.len() {
        writeln!(w, "{},{}", resp.frequencies[i], resp.gain_db[i])?;
    }
    Ok(())
}
