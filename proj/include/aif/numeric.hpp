#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace aif {

// Summation over a fixed binary tree: the result depends only on the input
// order, never on how work is partitioned, and carries pairwise error growth.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

double sample_variance(std::span<const double> values);

// Linear-interpolated quantile of a copy of the data, q in [0, 1].
double quantile(std::span<const double> values, double q);

double median(std::span<const double> values);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

// Central finite-difference gradient; exact on quadratics up to roundoff.
Eigen::VectorXd central_fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& theta, double step);

// FNV-1a over raw bytes; used to pin generated artifacts in tests.
std::uint64_t fnv1a(std::span<const unsigned char> bytes);
std::uint64_t fnv1a_file(const std::string& path);

bool approx_rel(double a, double b, double rel_tol, double abs_tol = 0.0);

}  // namespace aif
