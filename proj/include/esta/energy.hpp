#pragma once

namespace esta {

enum class EnergyMode { Unit, LinearInBytes };

/// Cost of moving one result-sized packet over one hop.
///
/// Unit mode charges `e_tx` per transmission (receptions are free), which is
/// the E_m bookkeeping used for the worked example. LinearInBytes charges
/// `(e_tx + e_rx) * packet_bytes`.
struct EnergyModel {
    double e_tx = 1.0;
    double e_rx = 0.0;
    EnergyMode mode = EnergyMode::Unit;
    double packet_bytes = 10'000.0;

    double per_hop() const {
        return mode == EnergyMode::Unit ? e_tx : (e_tx + e_rx) * packet_bytes;
    }
};

}  // namespace esta
