#pragma once

#include <vector>

namespace volcal {

/// Model price plus the diagnostics a caller may want to audit. Fields not
/// meaningful for a given pricer keep their defaults.
struct PriceResult {
    double price = 0.0;

    // Characteristic-function / mixture quadrature
    int quad_nodes = 0;     ///< node count the scheme settled on
    double phi_max = 0.0;   ///< integral truncation point
    double raw_p1 = 0.0;    ///< pseudo-probability before clamping
    double raw_p2 = 0.0;

    // Taylor expansion
    int order = 0;                     ///< highest retained term
    std::vector<double> term_sizes;    ///< magnitude of each retained term

    // Monte-Carlo style oracles
    double stderr_est = 0.0;
};

} // namespace volcal
