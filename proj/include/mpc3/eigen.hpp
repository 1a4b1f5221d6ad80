#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mpc3/common.hpp"

namespace mpc3 {

struct EigenDecomposition {
    std::vector<double> values;  // descending
    std::vector<double> vectors; // column j is the eigenvector of values[j], row-major q x q
};

namespace detail {

inline double frobenius_norm(const std::vector<double>& a) {
    return std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
}

inline double off_diagonal_norm(const std::vector<double>& a, size_t q) {
    double s = 0;
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j)
            if (i != j) s += a[i * q + j] * a[i * q + j];
    return std::sqrt(s);
}

} // namespace detail

// Cyclic Jacobi for real symmetric matrices: sweeps of plane rotations until
// the off-diagonal mass falls below 1e-12 * ||A||_F (30-sweep limit).
// Eigenvectors come out orthonormal by construction.
inline EigenDecomposition jacobi_eigendecompose(std::vector<double> a, size_t q) {
    if (a.size() != q * q) throw UsageError("jacobi: not a q x q matrix");
    double scale = detail::frobenius_norm(a);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = i + 1; j < q; ++j)
            if (std::fabs(a[i * q + j] - a[j * q + i]) > 1e-9 * std::max(1.0, scale))
                throw UsageError("jacobi: matrix is not symmetric");

    std::vector<double> v(q * q, 0.0);
    for (size_t i = 0; i < q; ++i) v[i * q + i] = 1.0;

    const double tol = 1e-12 * std::max(scale, 1e-300);
    int sweep = 0;
    for (; sweep < 30; ++sweep) {
        if (detail::off_diagonal_norm(a, q) <= tol) break;
        for (size_t p = 0; p < q; ++p) {
            for (size_t r = p + 1; r < q; ++r) {
                double apq = a[p * q + r];
                if (std::fabs(apq) <= 1e-300) continue;
                double theta = (a[r * q + r] - a[p * q + p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                double app = a[p * q + p], arr = a[r * q + r];
                a[p * q + p] = app - t * apq;
                a[r * q + r] = arr + t * apq;
                a[p * q + r] = a[r * q + p] = 0.0;
                for (size_t k = 0; k < q; ++k) {
                    if (k != p && k != r) {
                        double akp = a[k * q + p], akr = a[k * q + r];
                        a[k * q + p] = a[p * q + k] = akp - s * (akr + tau * akp);
                        a[k * q + r] = a[r * q + k] = akr + s * (akp - tau * akr);
                    }
                    double vkp = v[k * q + p], vkr = v[k * q + r];
                    v[k * q + p] = vkp - s * (vkr + tau * vkp);
                    v[k * q + r] = vkr + s * (vkp - tau * vkr);
                }
            }
        }
    }
    if (sweep == 30 && detail::off_diagonal_norm(a, q) > tol)
        throw MpcError("jacobi: no convergence after 30 sweeps");

    EigenDecomposition out;
    out.values.resize(q);
    for (size_t i = 0; i < q; ++i) out.values[i] = a[i * q + i];

    std::vector<size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t x, size_t y) { return out.values[x] > out.values[y]; });
    EigenDecomposition sorted;
    sorted.values.resize(q);
    sorted.vectors.resize(q * q);
    for (size_t j = 0; j < q; ++j) {
        sorted.values[j] = out.values[order[j]];
        for (size_t i = 0; i < q; ++i) sorted.vectors[i * q + j] = v[i * q + order[j]];
    }
    return sorted;
}

// E diag(f(lambda)) E^T for a symmetric positive-definite matrix.
inline std::vector<double> invsqrt_real(const std::vector<double>& g, size_t q) {
    auto eig = jacobi_eigendecompose(g, q);
    for (double lam : eig.values)
        if (lam <= 0) throw MpcError("invsqrt_real: matrix is not positive definite");
    std::vector<double> out(q * q, 0.0);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) {
            double acc = 0;
            for (size_t k = 0; k < q; ++k)
                acc += eig.vectors[i * q + k] * eig.vectors[j * q + k] /
                       std::sqrt(eig.values[k]);
            out[i * q + j] = acc;
        }
    return out;
}

} // namespace mpc3
