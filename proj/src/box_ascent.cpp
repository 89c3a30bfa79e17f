#include "plnet/box_ascent.hpp"

#include "plnet/error.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace plnet {

namespace {

constexpr int kFlatSteps = 10;
constexpr double kNoise = 1e-12;

struct Correction {
    Vector s;
    Vector y;
    double rho;
};

void project(Vector& x, const Vector& lower) { x = x.cwiseMax(lower); }

// Minimization view: g is the gradient of -f.
double projected_gradient_norm(const Vector& x, const Vector& g, const Vector& lower) {
    double norm = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double moved = std::max(lower(i), x(i) - g(i));
        norm = std::max(norm, std::abs(x(i) - moved));
    }
    return norm;
}

// Two-loop recursion: returns H * q. `scaling` (if non-empty) is the
// diagonal initial inverse Hessian; otherwise the usual scalar s'y / y'y.
Vector apply_inverse_hessian(const std::deque<Correction>& memory, Vector q, const Vector& scaling) {
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
        alpha[k] = memory[k].rho * memory[k].s.dot(q);
        q -= alpha[k] * memory[k].y;
    }
    if (scaling.size() > 0) {
        q = q.cwiseProduct(scaling);
    } else if (!memory.empty()) {
        const Correction& last = memory.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
        const double beta = memory[k].rho * memory[k].y.dot(q);
        q += (alpha[k] - beta) * memory[k].s;
    }
    return q;
}

} // namespace

BoxAscentResult maximize_box(const AscentObjective& objective, Vector& x, const Vector& lower,
                             const BoxAscentOptions& options, const CurvatureEstimate& curvature) {
    if (x.size() != lower.size()) throw InputError("bound vector has the wrong size");
    if (options.max_iter < 1 || options.memory < 1) throw InputError("invalid optimizer options");
    project(x, lower);

    Vector grad(x.size());
    double value = objective(x, grad);
    if (!std::isfinite(value)) throw NumericalError("objective is not finite at the starting point");
    Vector g = -grad;  // minimization gradient

    BoxAscentResult result;
    std::deque<Correction> memory;
    Vector trial(x.size()), trial_grad(x.size());
    int flat_steps = 0;

    for (int iter = 0; iter < options.max_iter; ++iter) {
        result.projected_gradient = projected_gradient_norm(x, g, lower);
        if (result.projected_gradient < options.gradient_tol) {
            result.converged = true;
            break;
        }

        // Coordinates pinned at their bound with the gradient pushing outward.
        Eigen::Array<bool, Eigen::Dynamic, 1> active(x.size());
        for (Index i = 0; i < x.size(); ++i) active(i) = x(i) <= lower(i) && g(i) > 0.0;

        Vector free_grad = g;
        for (Index i = 0; i < x.size(); ++i)
            if (active(i)) free_grad(i) = 0.0;
        Vector scaling;
        if (curvature) {
            curvature(x, scaling);
            scaling = scaling.cwiseMax(1e-300).cwiseInverse();
        }
        Vector direction = -apply_inverse_hessian(memory, free_grad, scaling);
        for (Index i = 0; i < x.size(); ++i)
            if (active(i)) direction(i) = 0.0;
        if (!(direction.dot(g) < 0.0)) {
            memory.clear();
            direction = scaling.size() > 0 ? Vector(-free_grad.cwiseProduct(scaling)) : Vector(-free_grad);
        }

        double step = 1.0;
        if (memory.empty() && scaling.size() == 0)
            step = std::min(1.0, 1.0 / std::max(direction.lpNorm<Eigen::Infinity>(), 1e-300));

        bool accepted = false;
        double trial_value = value;
        // Near the optimum the gain in f drops below its rounding error; there
        // the step is judged on the directional derivative instead (approximate
        // Armijo: no overshoot past the 1D maximizer), with f allowed to jitter
        // by the noise level.
        const double noise = kNoise * (1.0 + std::abs(value));
        for (int bt = 0; bt < options.max_backtracks; ++bt) {
            trial = x + step * direction;
            project(trial, lower);
            trial_value = objective(trial, trial_grad);
            if (!std::isfinite(trial_value)) {
                step *= 0.5;
                continue;
            }
            const double slope0 = -g.dot(trial - x);         // phi'(0), positive uphill
            const double slope1 = trial_grad.dot(trial - x);  // phi'(1) along the step
            if (trial_value >= value + options.armijo * slope0 && trial_value >= value) {
                accepted = true;
                break;
            }
            if (slope0 <= noise && trial_value >= value - noise &&
                slope1 >= -(1.0 - 2.0 * options.armijo) * slope0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        result.iterations = iter + 1;
        if (!accepted) {
            if (!memory.empty()) {
                memory.clear();
                continue;
            }
            result.line_search_failed = true;
            break;
        }

        Vector s = trial - x;
        Vector y = (-trial_grad) - g;
        const double previous = value;
        x = trial;
        value = trial_value;
        g = -trial_grad;

        const double sy = s.dot(y);
        if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
            memory.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
        }

        const double previous_pg = result.projected_gradient;
        result.projected_gradient = projected_gradient_norm(x, g, lower);
        const bool flat = value - previous <= options.value_tol * (1.0 + std::abs(value)) &&
                          result.projected_gradient >= previous_pg;
        flat_steps = flat ? flat_steps + 1 : 0;
        if (flat_steps >= kFlatSteps) {
            result.projected_gradient = projected_gradient_norm(x, g, lower);
            result.converged = result.projected_gradient < options.gradient_tol;
            result.stalled = !result.converged;
            break;
        }
    }
    if (result.iterations == options.max_iter && !result.converged)
        result.projected_gradient = projected_gradient_norm(x, g, lower);
    result.value = value;
    return result;
}

} // namespace plnet
