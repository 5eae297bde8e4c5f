/// Packet size behind the default Mbps to pps conversion (1 Mbps ~= 83.3 pps).
pub const DEFAULT_PACKET_BYTES: f64 = 1500.0;

pub fn mbps_to_pps(mbps: f64, packet_bytes: f64) -> f64 {
    mbps * 1e6 / (8.0 * packet_bytes)
}

pub fn pps_to_mbps(pps: f64, packet_bytes: f64) -> f64 {
    pps * 8.0 * packet_bytes / 1e6
}
