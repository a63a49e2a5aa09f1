#pragma once

#include "viscomem/spectral_domain.hpp"

#include <functional>

namespace viscomem {

using LinearMap = std::function<SpectralField(const SpectralField&)>;

struct KrylovResult {
    SpectralField x;
    int iterations = 0;
    double residual = 0.0;  ///< final ||b - Ax|| / ||b||
    bool converged = false;
};

/// Preconditioned conjugate gradients for symmetric positive definite maps.
KrylovResult pcg(const LinearMap& apply, const LinearMap& precond, const SpectralField& b, const SpectralField& x0,
                 double rel_tol, int max_iter);

/// Restarted GMRES with right preconditioning.
KrylovResult gmres(const LinearMap& apply, const LinearMap& precond, const SpectralField& b, double rel_tol,
                   int max_iter, int restart = 40);

}  // namespace viscomem
