#pragma once

// RBF-kernel soft-margin SVM. The binary solver is SMO with maximal
// KKT-violating pair selection (first-order working-set rule) on the dual
//   min 1/2 a^T Q a - e^T a   s.t. 0 <= a <= C, y^T a = 0,
// with an LRU cache of kernel rows. The multiclass wrapper is one-vs-one
// with majority voting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

/// exp(-gamma * ||x - y||^2)
inline double rbf_kernel(const float* x, const float* y, int dim, double gamma) {
    double d = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double diff = static_cast<double>(x[j]) - static_cast<double>(y[j]);
        d += diff * diff;
    }
    return std::exp(-gamma * d);
}

inline double rbf_kernel(const std::vector<float>& x, const std::vector<float>& y, double gamma) {
    if (x.size() != y.size()) {
        throw ShapeError("rbf_kernel: dimension mismatch " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    }
    if (!(gamma > 0.0)) throw ValueError("rbf_kernel: gamma must be > 0");
    return rbf_kernel(x.data(), y.data(), static_cast<int>(x.size()), gamma);
}

struct BinarySvm {
    int dim = 0;
    std::vector<float> support_vectors; // n_sv x dim, row-major
    std::vector<float> dual_coefs;      // alpha_i * y_i, file precision
    float bias = 0.0f;
    float gamma = 1.0f;
    float C = 10.0f;

    int n_sv() const { return dim == 0 ? 0 : static_cast<int>(support_vectors.size()) / dim; }
};

/// f(x) = sum_i alpha_i y_i K(s_i, x) + b
inline double svm_decision(const BinarySvm& svm, const float* x) {
    double f = svm.bias;
    for (int i = 0; i < svm.n_sv(); ++i) {
        f += static_cast<double>(svm.dual_coefs[static_cast<std::size_t>(i)]) *
             rbf_kernel(svm.support_vectors.data() + static_cast<std::size_t>(i) * svm.dim, x,
                        svm.dim, svm.gamma);
    }
    return f;
}

/// sign(f), with f == 0 resolving to +1.
inline int classify_binary(const BinarySvm& svm, const float* x) {
    return svm_decision(svm, x) >= 0.0 ? 1 : -1;
}

struct SmoParams {
    double C = 10.0;
    double gamma = -1.0; // <= 0 means 1 / dim
    double tol = 1e-3;
    int max_passes = 2000;             // update budget, in multiples of n
    std::size_t cache_bytes = 256 << 20;
};

struct SmoResult {
    BinarySvm svm;
    double dual_objective = 0.0; // e^T a - 1/2 a^T Q a at the solution
    int iterations = 0;
    bool converged = false;
};

namespace detail {

/// LRU cache of full kernel rows K(i, *).
class KernelCache {
public:
    KernelCache(const std::vector<float>& x, int dim, double gamma, std::size_t budget_bytes)
        : x_(x), dim_(dim), gamma_(gamma), n_(x.size() / static_cast<std::size_t>(dim)) {
        max_rows_ = std::max<std::size_t>(2, budget_bytes / (n_ * sizeof(double)));
    }

    const std::vector<double>& row(std::size_t i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.lru_it);
            return it->second.values;
        }
        if (map_.size() >= max_rows_) {
            map_.erase(lru_.back());
            lru_.pop_back();
        }
        lru_.push_front(i);
        Entry e;
        e.lru_it = lru_.begin();
        e.values.resize(n_);
        const float* xi = x_.data() + i * static_cast<std::size_t>(dim_);
        for (std::size_t j = 0; j < n_; ++j) {
            e.values[j] =
                rbf_kernel(xi, x_.data() + j * static_cast<std::size_t>(dim_), dim_, gamma_);
        }
        return map_.emplace(i, std::move(e)).first->second.values;
    }

private:
    struct Entry {
        std::vector<double> values;
        std::list<std::size_t>::iterator lru_it;
    };
    const std::vector<float>& x_;
    int dim_;
    double gamma_;
    std::size_t n_;
    std::size_t max_rows_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, Entry> map_;
};

} // namespace detail

/// Trains a binary machine on features (n x dim) and labels in {-1,+1}.
/// Terminates when the maximal KKT violation m(a) - M(a) drops to tol or
/// the update budget is exhausted. Solver state is double precision; the
/// returned model is quantized to file precision (float32) with the
/// equality constraint repaired afterwards, so serialization round-trips
/// cannot change predictions.
inline SmoResult smo_train(const std::vector<float>& features, int dim,
                           const std::vector<int>& labels, const SmoParams& params,
                           std::mt19937& /*rng: reserved, selection is deterministic*/) {
    if (dim < 1) throw ValueError("smo_train: dim must be >= 1");
    const std::size_t n = features.size() / static_cast<std::size_t>(dim);
    if (n != labels.size()) throw ShapeError("smo_train: feature/label count mismatch");
    if (!(params.C > 0.0)) throw ValueError("smo_train: C must be > 0");
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw ValueError("smo_train: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw ValueError("smo_train: both classes must be present");
    for (float v : features) {
        if (!std::isfinite(v)) throw ValueError("smo_train: non-finite feature value");
    }
    const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(dim);
    const double C = params.C;

    detail::KernelCache cache(features, dim, gamma, params.cache_bytes);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // d/da_i of the dual objective
    const long long budget = static_cast<long long>(params.max_passes) * static_cast<long long>(n);

    auto in_up = [&](std::size_t i) {
        return (labels[i] == 1 && alpha[i] < C - 1e-12) || (labels[i] == -1 && alpha[i] > 1e-12);
    };
    auto in_low = [&](std::size_t i) {
        return (labels[i] == -1 && alpha[i] < C - 1e-12) || (labels[i] == 1 && alpha[i] > 1e-12);
    };

    long long iters = 0;
    bool converged = false;
    while (iters < budget) {
        // maximal violating pair (Keerthi's first-order rule)
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t i_up = n, i_low = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double score = -static_cast<double>(labels[t]) * grad[t];
            if (in_up(t) && score > m_up) {
                m_up = score;
                i_up = t;
            }
            if (in_low(t) && score < m_low) {
                m_low = score;
                i_low = t;
            }
        }
        if (i_up == n || i_low == n || m_up - m_low <= params.tol) {
            converged = i_up != n && i_low != n;
            break;
        }
        const std::size_t i = i_up, j = i_low;
        const double yi = labels[i], yj = labels[j];
        const std::vector<double>& ki = cache.row(i);
        const std::vector<double>& kj = cache.row(j);

        // bounds for alpha_j along the constraint line
        double L, H;
        if (labels[i] != labels[j]) {
            L = std::max(0.0, alpha[j] - alpha[i]);
            H = std::min(C, C + alpha[j] - alpha[i]);
        } else {
            L = std::max(0.0, alpha[i] + alpha[j] - C);
            H = std::min(C, alpha[i] + alpha[j]);
        }

        const double eta = ki[i] + kj[j] - 2.0 * ki[j];
        double aj_new;
        if (eta > 1e-12) {
            // unconstrained optimum along the line, then clip
            aj_new = alpha[j] + yj * (yi * grad[i] - yj * grad[j]) / eta;
            aj_new = std::clamp(aj_new, L, H);
        } else {
            // flat direction: move to whichever bound improves the objective
            const double df = yj * (yi * grad[i] - yj * grad[j]);
            aj_new = df > 0.0 ? H : L;
        }
        const double delta_j = aj_new - alpha[j];
        if (std::fabs(delta_j) < 1e-14) {
            // numerically stuck pair; declare convergence at this precision
            converged = m_up - m_low <= std::max(params.tol, 1e-10);
            break;
        }
        const double delta_i = -yi * yj * delta_j;
        alpha[i] += delta_i;
        alpha[j] += delta_j;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += yi * labels[t] * ki[t] * delta_i + yj * labels[t] * kj[t] * delta_j;
        }
        ++iters;
    }

    // bias from non-bound vectors; midpoint of the violation bounds otherwise
    double bias;
    {
        double sum = 0.0;
        int count = 0;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double score = -static_cast<double>(labels[t]) * grad[t];
            if (in_up(t)) m_up = std::max(m_up, score);
            if (in_low(t)) m_low = std::min(m_low, score);
            if (alpha[t] > 1e-12 && alpha[t] < C - 1e-12) {
                sum += score;
                ++count;
            }
        }
        bias = count > 0 ? sum / count : (m_up + m_low) / 2.0;
    }

    // dual objective: e^T a - 1/2 a^T Q a = sum a_i - 1/2 sum a_i (grad_i + 1)
    double objective = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        objective += alpha[t] - 0.5 * alpha[t] * (grad[t] + 1.0);
    }

    SmoResult result;
    result.dual_objective = objective;
    result.iterations = static_cast<int>(iters);
    result.converged = converged;
    result.svm.dim = dim;
    result.svm.gamma = static_cast<float>(gamma);
    result.svm.C = static_cast<float>(C);

    // quantize coefficients to float and repair sum(alpha_i y_i) drift,
    // preferably on a non-bound coefficient so bound classification survives
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t) {
        if (static_cast<float>(alpha[t]) > 0.0f) sv.push_back(t);
    }
    std::vector<float> coefs(sv.size());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        coefs[s] = static_cast<float>(alpha[sv[s]] * labels[sv[s]]);
    }
    if (!sv.empty()) {
        double drift = 0.0;
        for (float c : coefs) drift += c;
        std::size_t pick = sv.size();
        for (std::size_t s = 0; s < sv.size(); ++s) {
            const double a = alpha[sv[s]];
            if (a > 0.01 * C && a < 0.99 * C &&
                (pick == sv.size() || std::fabs(coefs[s]) > std::fabs(coefs[pick]))) {
                pick = s;
            }
        }
        if (pick == sv.size()) {
            pick = 0;
            for (std::size_t s = 1; s < sv.size(); ++s) {
                if (std::fabs(coefs[s]) > std::fabs(coefs[pick])) pick = s;
            }
        }
        coefs[pick] = static_cast<float>(static_cast<double>(coefs[pick]) - drift);
    }
    result.svm.support_vectors.resize(sv.size() * static_cast<std::size_t>(dim));
    for (std::size_t s = 0; s < sv.size(); ++s) {
        const float* src = features.data() + sv[s] * static_cast<std::size_t>(dim);
        std::copy(src, src + dim,
                  result.svm.support_vectors.begin() + static_cast<std::ptrdiff_t>(s * dim));
    }
    result.svm.dual_coefs = std::move(coefs);
    result.svm.bias = static_cast<float>(bias);
    return result;
}

struct KktReport {
    int violations = 0;
    double max_violation = 0.0;
    double alpha_y_sum = 0.0; // should be ~0
};

/// Standalone optimality audit over the full training set: checks the
/// complementary-slackness conditions of every point against the trained
/// machine at tolerance tol.
inline KktReport kkt_audit(const BinarySvm& svm, const std::vector<float>& features,
                           const std::vector<int>& labels, double tol) {
    const std::size_t n = features.size() / static_cast<std::size_t>(svm.dim);
    KktReport report;

    // recover alpha_i for every training point (0 for non-SVs); SV rows are
    // matched to training rows by exact feature equality
    std::vector<double> alpha(n, 0.0);
    std::vector<bool> used(static_cast<std::size_t>(svm.n_sv()), false);
    for (std::size_t t = 0; t < n; ++t) {
        const float* x = features.data() + t * static_cast<std::size_t>(svm.dim);
        for (int s = 0; s < svm.n_sv(); ++s) {
            if (used[static_cast<std::size_t>(s)]) continue;
            const float* sx = svm.support_vectors.data() + static_cast<std::size_t>(s) * svm.dim;
            if (std::equal(x, x + svm.dim, sx)) {
                alpha[t] = std::fabs(static_cast<double>(
                    svm.dual_coefs[static_cast<std::size_t>(s)]));
                used[static_cast<std::size_t>(s)] = true;
                break;
            }
        }
        report.alpha_y_sum += alpha[t] * labels[t];
    }

    const double C = svm.C;
    const double eps = 1e-5 * C; // absorbs float quantization of the coefficients
    for (std::size_t t = 0; t < n; ++t) {
        const float* x = features.data() + t * static_cast<std::size_t>(svm.dim);
        const double margin = labels[t] * svm_decision(svm, x);
        double violation = 0.0;
        if (alpha[t] <= eps) {
            violation = std::max(0.0, 1.0 - margin);
        } else if (alpha[t] >= C - eps) {
            violation = std::max(0.0, margin - 1.0);
        } else {
            violation = std::fabs(margin - 1.0);
        }
        if (violation > tol) ++report.violations;
        report.max_violation = std::max(report.max_violation, violation);
    }
    return report;
}

// ---------------------------------------------------------------- multiclass

struct MulticlassSvm {
    int n_classes = 0;
    int dim = 0;
    std::vector<std::string> class_names;
    std::vector<std::pair<int, int>> pairs; // (a,b), a < b; +1 = class a
    std::vector<BinarySvm> machines;
};

/// One-vs-one training: a machine per unordered class pair, +1 for the
/// lower class index. Every class must be present.
inline MulticlassSvm train_multiclass(const std::vector<float>& features, int dim,
                                      const std::vector<int>& labels, int n_classes,
                                      const std::vector<std::string>& class_names,
                                      const SmoParams& params, std::mt19937& rng) {
    const std::size_t n = features.size() / static_cast<std::size_t>(dim);
    if (n != labels.size()) throw ShapeError("train_multiclass: feature/label count mismatch");
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int y : labels) {
        if (y < 0 || y >= n_classes) {
            throw ValueError("train_multiclass: label " + std::to_string(y) + " out of range");
        }
        ++counts[static_cast<std::size_t>(y)];
    }
    std::string missing;
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            if (!missing.empty()) missing += ", ";
            missing += class_names.empty() ? std::to_string(c)
                                           : class_names[static_cast<std::size_t>(c)];
        }
    }
    if (!missing.empty()) {
        throw ValueError("train_multiclass: no samples for class(es): " + missing);
    }

    MulticlassSvm model;
    model.n_classes = n_classes;
    model.dim = dim;
    model.class_names = class_names;
    for (int a = 0; a < n_classes; ++a) {
        for (int b = a + 1; b < n_classes; ++b) model.pairs.emplace_back(a, b);
    }
    model.machines.resize(model.pairs.size());
    std::vector<uint32_t> machine_seeds(model.pairs.size());
    for (auto& s : machine_seeds) s = rng(); // drawn sequentially, before the parallel region

    // pairwise machines are independent and train in parallel
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < static_cast<int>(model.pairs.size()); ++m) {
        try {
            const auto [a, b] = model.pairs[static_cast<std::size_t>(m)];
            std::vector<float> sub;
            std::vector<int> suby;
            for (std::size_t t = 0; t < n; ++t) {
                if (labels[t] != a && labels[t] != b) continue;
                const float* x = features.data() + t * static_cast<std::size_t>(dim);
                sub.insert(sub.end(), x, x + dim);
                suby.push_back(labels[t] == a ? 1 : -1);
            }
            std::mt19937 machine_rng(machine_seeds[static_cast<std::size_t>(m)]);
            model.machines[static_cast<std::size_t>(m)] =
                smo_train(sub, dim, suby, params, machine_rng).svm;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return model;
}

struct MulticlassVote {
    int class_index = 0;
    std::vector<int> votes;
    std::vector<double> score; // summed |decision value| of won duels
};

/// Majority vote across the pairwise machines. Vote ties break on summed
/// decision-value magnitude, then on the lowest class index.
inline MulticlassVote classify_multiclass(const MulticlassSvm& model, const float* x) {
    MulticlassVote v;
    v.votes.assign(static_cast<std::size_t>(model.n_classes), 0);
    v.score.assign(static_cast<std::size_t>(model.n_classes), 0.0);
    for (std::size_t m = 0; m < model.machines.size(); ++m) {
        const double f = svm_decision(model.machines[m], x);
        const int winner = f >= 0.0 ? model.pairs[m].first : model.pairs[m].second;
        ++v.votes[static_cast<std::size_t>(winner)];
        v.score[static_cast<std::size_t>(winner)] += std::fabs(f);
    }
    int best = 0;
    for (int c = 1; c < model.n_classes; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        const std::size_t bi = static_cast<std::size_t>(best);
        if (v.votes[ci] > v.votes[bi] ||
            (v.votes[ci] == v.votes[bi] && v.score[ci] > v.score[bi])) {
            best = c;
        }
    }
    v.class_index = best;
    return v;
}

} // namespace vtc
