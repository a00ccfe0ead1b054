#pragma once

#include "dnkpp/errors.hpp"

#include <cmath>
#include <sstream>

namespace dnkpp {

/// Rates of the birth-death-competition dynamics
///   du/dt = kappa_plus (a+ * u) - mortality u - kappa_minus u (a- * u).
struct ModelParams {
    double kappa_plus = 2.0;
    double kappa_minus = 1.0;
    double mortality = 1.0;

    /// Carrying capacity (kappa_plus - mortality) / kappa_minus; may be <= 0.
    double theta() const noexcept { return (kappa_plus - mortality) / kappa_minus; }

    bool has_positive_theta() const noexcept { return kappa_plus > mortality; }

    /// Throws unless all rates are strictly positive and finite.
    void validate() const {
        auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!ok(kappa_plus) || !ok(kappa_minus) || !ok(mortality)) {
            std::ostringstream os;
            os << "model rates must be finite and positive (kappa_plus=" << kappa_plus
               << ", kappa_minus=" << kappa_minus << ", mortality=" << mortality << ")";
            throw InvalidArgument(os.str());
        }
    }

    /// Throws unless the rates are valid and kappa_plus > mortality.
    void require_positive_theta() const {
        validate();
        if (!has_positive_theta()) {
            std::ostringstream os;
            os << "kappa_plus (" << kappa_plus << ") must exceed mortality (" << mortality
               << ") for a positive carrying capacity";
            throw InvalidArgument(os.str());
        }
    }

    /// Validated construction; `need_theta` additionally demands kappa_plus > mortality.
    static ModelParams make(double kappa_plus, double kappa_minus, double mortality,
                            bool need_theta = true) {
        ModelParams p{kappa_plus, kappa_minus, mortality};
        if (need_theta) {
            p.require_positive_theta();
        } else {
            p.validate();
        }
        return p;
    }
};

}  // namespace dnkpp
