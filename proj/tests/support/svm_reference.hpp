#pragma once

// Projected-gradient reference solver for the SVM dual, used as an
// independent oracle against the SMO solver on small problems.
//
//   max  e^T a - 1/2 a^T Q a    s.t.  0 <= a <= C,  y^T a = 0
//
// Each step projects exactly onto the feasible set (bisection on the
// hyperplane multiplier). Slow and simple on purpose.

#include <algorithm>
#include <cmath>
#include <vector>

#include "vtc/svm.hpp"

namespace oracle {

struct DualProblem {
    std::vector<double> q; // n x n, Q_ij = y_i y_j K(x_i, x_j)
    std::vector<int> y;
    double C = 1.0;
    std::size_t n = 0;
};

inline DualProblem make_dual(const std::vector<float>& x, int dim, const std::vector<int>& y,
                             double C, double gamma) {
    DualProblem p;
    p.n = y.size();
    p.y = y;
    p.C = C;
    p.q.resize(p.n * p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t j = 0; j < p.n; ++j) {
            p.q[i * p.n + j] =
                y[i] * y[j] *
                vtc::rbf_kernel(x.data() + i * static_cast<std::size_t>(dim),
                                x.data() + j * static_cast<std::size_t>(dim), dim, gamma);
        }
    }
    return p;
}

/// Euclidean projection of v onto {0 <= a <= C, y^T a = 0}.
inline std::vector<double> project(const DualProblem& p, std::vector<double> v) {
    double lo = -1e9, hi = 1e9;
    auto constraint = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.n; ++i) {
            s += p.y[i] * std::clamp(v[i] - lambda * p.y[i], 0.0, p.C);
        }
        return s;
    };
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (constraint(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double lambda = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < p.n; ++i) v[i] = std::clamp(v[i] - lambda * p.y[i], 0.0, p.C);
    return v;
}

inline double dual_objective(const DualProblem& p, const std::vector<double>& a) {
    double obj = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
        double qa = 0.0;
        for (std::size_t j = 0; j < p.n; ++j) qa += p.q[i * p.n + j] * a[j];
        obj += a[i] - 0.5 * a[i] * qa;
    }
    return obj;
}

/// Projected-gradient ascent to (near) optimality.
inline double solve_reference(const DualProblem& p, int iterations = 20000) {
    double qmax = 0.0;
    for (double v : p.q) qmax = std::max(qmax, std::fabs(v));
    const double step = 1.0 / (qmax * static_cast<double>(p.n)); // 1/L bound
    std::vector<double> a(p.n, 0.0);
    a = project(p, a);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> g(p.n);
        for (std::size_t i = 0; i < p.n; ++i) {
            double qa = 0.0;
            for (std::size_t j = 0; j < p.n; ++j) qa += p.q[i * p.n + j] * a[j];
            g[i] = 1.0 - qa;
        }
        for (std::size_t i = 0; i < p.n; ++i) a[i] += step * g[i];
        a = project(p, a);
    }
    return dual_objective(p, a);
}

} // namespace oracle
