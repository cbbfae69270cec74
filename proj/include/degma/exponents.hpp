#pragma once

namespace degma {

// Exponents attached to a source power p in (0, 2).
struct ExponentPack {
    double p = 1.0;
    double q = 3.0;      // 3 / (2 - p)
    double theta = 2.0;  // (1 + p) / (2 - p)

    static ExponentPack from_p(double p);

    // True when q and theta agree with a fresh recomputation from p.
    bool consistent() const;
};

}  // namespace degma
