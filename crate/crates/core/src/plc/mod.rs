//! Powerline link model: impulse response, delay spread, gain, noise, BER and PDR.

mod channel;
mod link;

pub use channel::{
    channel_gain, cir_from_cfr, power_delay_profile, read_cfr_csv, rms_delay_spread, synth_cfr, to_db,
    write_cfr_csv, Attenuation, Cfr, Cir, DEFAULT_DELTA_F_HZ, DEFAULT_POINTS, USABLE_MAX_HZ, USABLE_MIN_HZ,
};
pub use link::{
    analyze_link, ber_bpsk, fit_lognormal, noise_psd, pdr_plc, q_function, sinr, LognormalFit, PdrMode,
    PlcLink, PlcParams, QMode, DEFAULT_NOISE_W_PER_HZ, DEFAULT_PACKET_BITS, DEFAULT_TX_PSD_W_PER_HZ,
};
