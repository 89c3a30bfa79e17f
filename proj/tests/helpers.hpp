#pragma once

#include "plnet/dataset.hpp"
#include "plnet/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

using plnet::Index;
using plnet::Matrix;

struct Instance {
    plnet::CountDataset data;
    plnet::ModelParams params;
    plnet::VariationalParams vparams;
};

// Small random problem with counts drawn around exp(eta).
inline Instance random_instance(std::uint64_t seed, Index n, Index p, Index d) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.2, 1.0);
    Matrix X(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < d; ++k) X(i, k) = k == 0 ? 1.0 : z(rng);
    Matrix O(n, p), B(d, p), M(n, p), S(n, p), Y(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) {
            O(i, j) = 0.3 * z(rng);
            M(i, j) = 0.5 * z(rng);
            S(i, j) = unif(rng);
        }
    for (Index k = 0; k < d; ++k)
        for (Index j = 0; j < p; ++j) B(k, j) = 0.4 * z(rng) + (k == 0 ? 1.0 : 0.0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) {
            std::poisson_distribution<long> pois(std::exp(O(i, j) + (X.row(i) * B.col(j))(0) + M(i, j)));
            Y(i, j) = static_cast<double>(pois(rng));
        }
    Matrix A(p, p);
    for (Index j = 0; j < p; ++j)
        for (Index k = 0; k < p; ++k) A(j, k) = 0.4 * z(rng);
    Matrix omega = A * A.transpose() + Matrix::Identity(p, p);
    return {plnet::CountDataset(Y, X, O), {B, omega}, {M, S}};
}

// Counts from the model itself on a known graph.
inline plnet::CountDataset pln_sample(const Matrix& omega, Index n, double intercept, std::uint64_t seed) {
    const Index p = omega.rows();
    return plnet::sample_pln(Matrix::Ones(n, 1), Matrix::Constant(1, p, intercept), Matrix::Zero(n, p), omega, seed);
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("plnet_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
