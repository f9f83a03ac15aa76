#pragma once

#include <cmath>
#include <stdexcept>

namespace svinvopt {

/// Dimensionless fluid constants of the linearized tank-liquid model.
struct PhysicalParams {
    double sigma = 1.0;  ///< surface tension, > 0
    double mu = 1.0;     ///< viscosity, > 0
    double kappa = 0.0;  ///< wall friction, >= 0

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("PhysicalParams: sigma must be > 0");
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw std::invalid_argument("PhysicalParams: mu must be > 0");
        if (!(kappa >= 0.0) || !std::isfinite(kappa))
            throw std::invalid_argument("PhysicalParams: kappa must be >= 0");
    }
};

/// Design gains of the quadratic cost and the LgV feedback.
/// Q = 0 selects the tank-only case; the stability and optimality guarantees need Q > 0.
struct ControllerParams {
    double gamma = 3.0;
    double r = 1.0;
    double k = 1.0;
    double Q = 0.1;

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw std::invalid_argument("ControllerParams: gamma must be > 0");
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("ControllerParams: r must be > 0");
        if (!(k > 0.0) || !std::isfinite(k))
            throw std::invalid_argument("ControllerParams: k must be > 0");
        if (!(Q >= 0.0) || !std::isfinite(Q))
            throw std::invalid_argument("ControllerParams: Q must be >= 0");
    }
};

/// Tank position and velocity.
struct TankState {
    double xi = 0.0;
    double w = 0.0;
};

}  // namespace svinvopt
