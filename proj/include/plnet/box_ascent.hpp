#pragma once

#include "plnet/dataset.hpp"

#include <functional>

namespace plnet {

struct BoxAscentOptions {
    double gradient_tol = 1e-6;  // sup-norm of the projected gradient
    double value_tol = 1e-13;    // relative stall threshold; 10 steps in a row with no value
                                 // gain and no projected-gradient decrease stop the run
    int max_iter = 500;
    int memory = 10;
    double armijo = 1e-4;
    int max_backtracks = 50;
};

struct BoxAscentResult {
    double value = 0.0;
    int iterations = 0;
    double projected_gradient = 0.0;
    bool converged = false;     // projected gradient below gradient_tol
    bool stalled = false;       // objective stopped improving before that
    bool line_search_failed = false;
};

/// Objective returning f(x) and writing grad f(x). Returning -inf marks x
/// as outside the domain.
using AscentObjective = std::function<double(const Vector& x, Vector& gradient)>;

/// Positive estimate of the diagonal of -Hessian at x, used as the initial
/// inverse-Hessian scaling of the quasi-Newton update.
using CurvatureEstimate = std::function<void(const Vector& x, Vector& diagonal)>;

/// Maximizes a smooth function subject to x_i >= lower_i (use -inf for free
/// coordinates) with projected limited-memory BFGS and Armijo backtracking.
/// x is projected onto the box, then updated in place. Accepted iterates
/// never decrease f by more than 1e-12 (1 + |f|), the level below which
/// steps are accepted on directional-derivative evidence alone.
BoxAscentResult maximize_box(const AscentObjective& objective, Vector& x, const Vector& lower,
                             const BoxAscentOptions& options, const CurvatureEstimate& curvature = {});

} // namespace plnet
