#pragma once
#include <stdexcept>
#include <string>

namespace perpdual {

/// Flat interest rate r and dividend rate delta, both per year.
/// Put-side machinery requires r > 0, call-side machinery requires
/// delta > 0; the degenerate cases collapse to fixed conventions
/// (put price = strike when r = 0, call price = spot when delta = 0).
struct ModelParams {
    double r = 0.0;
    double delta = 0.0;

    void validate() const {
        if (!(r >= 0.0)) throw std::invalid_argument("ModelParams: r must be >= 0");
        if (!(delta >= 0.0)) throw std::invalid_argument("ModelParams: delta must be >= 0");
    }
    void require_put_side() const {
        validate();
        if (!(r > 0.0)) throw std::domain_error("put-side operation requires r > 0");
    }
    void require_call_side() const {
        validate();
        if (!(delta > 0.0)) throw std::domain_error("call-side operation requires delta > 0");
    }
};

/// Swap the roles of interest and dividend rate. Involutive.
inline ModelParams dual_params(const ModelParams& p) { return ModelParams{p.delta, p.r}; }

inline bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.r == b.r && a.delta == b.delta;
}

/// Log-spaced evaluation grid.
struct GridSpec {
    double x_min = 1e-3;
    double x_max = 1e3;
    std::size_t n = 2001;

    void validate() const {
        if (!(x_min > 0.0) || !(x_max > x_min))
            throw std::invalid_argument("GridSpec: need 0 < x_min < x_max");
        if (n < 2) throw std::invalid_argument("GridSpec: need n >= 2");
    }
};

} // namespace perpdual
