#pragma once

#include <stdexcept>
#include <vector>

namespace hsfl {

enum class Mode : int { FL = 0, SL = 1 };

// Decision vector of one round: per-device learning mode, cut layer
// (SL devices), FL bandwidth share, SL aggregate share b0 and batch size.
// cuts[k] and bandwidth[k] are meaningful only for the matching mode.
struct ModeAssignment {
    std::vector<Mode> modes;
    std::vector<int> cuts;          // 1-based layer indices, SL devices
    std::vector<double> bandwidth;  // fraction of B, FL devices
    double b0 = 0.0;                // fraction of B shared by the SL chain
    std::vector<double> batches;    // xi_k, >= 1

    int device_count() const { return static_cast<int>(modes.size()); }

    int sl_count() const
    {
        int n = 0;
        for (const Mode m : modes) n += (m == Mode::SL) ? 1 : 0;
        return n;
    }
    int fl_count() const { return device_count() - sl_count(); }
};

inline std::vector<int> devices_in_mode(const std::vector<Mode>& modes, Mode m)
{
    std::vector<int> ids;
    for (int k = 0; k < static_cast<int>(modes.size()); ++k)
        if (modes[static_cast<std::size_t>(k)] == m) ids.push_back(k);
    return ids;
}

// Raised when a bandwidth allocation leaves some device without spectrum.
struct InfeasibleAllocation : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace hsfl
